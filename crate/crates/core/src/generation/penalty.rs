use crate::dataset::squared_distance;

/// Euclidean distance from `x` to the closest member of `set`.
pub fn nearest_distance<P: AsRef<[f64]>>(x: &[f64], set: &[P]) -> Option<f64> {
    set.iter()
        .map(|p| squared_distance(x, p.as_ref()))
        .min_by(f64::total_cmp)
        .map(f64::sqrt)
}

/// Distance to the class beyond radius `c1`: `max(0, min_dist(x, D_k) - c1)`.
pub fn penalty_p1<P: AsRef<[f64]>>(x: &[f64], class_points: &[P], c1: f64) -> f64 {
    nearest_distance(x, class_points).map_or(0.0, |d| (d - c1).max(0.0))
}

/// Crowding of earlier generated negatives: `max(0, c2 - min_dist(x, D_k^-))`,
/// zero while nothing has been generated yet.
pub fn penalty_p2<P: AsRef<[f64]>>(x: &[f64], generated: &[P], c2: f64) -> f64 {
    nearest_distance(x, generated).map_or(0.0, |d| (c2 - d).max(0.0))
}

/// Crowding of earlier generated positives, same form as [`penalty_p2`].
pub fn penalty_p3<P: AsRef<[f64]>>(x: &[f64], generated_pos: &[P], c3: f64) -> f64 {
    penalty_p2(x, generated_pos, c3)
}
