use std::io::Write;

use crate::dataset::{Label, SearchBox, NOVEL_TOKEN};
use crate::error::{AsgError, Result};
use crate::open_classifier::OpenClassifier;

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub x1: f64,
    pub x2: f64,
    pub label: Label,
}

/// Predicts every point of a `resolution x resolution` lattice spanning a
/// 2-D box. Rows step through `x2`, columns through `x1`.
pub fn boundary_grid(
    model: &dyn OpenClassifier,
    search: &SearchBox,
    resolution: usize,
) -> Result<Vec<GridPoint>> {
    if search.dim() != 2 || model.dim() != 2 {
        return Err(AsgError::dimension(
            2,
            search.dim().max(model.dim()),
            "boundary grid",
        ));
    }
    if resolution < 2 {
        return Err(AsgError::InvalidConfig(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    let (lo, hi) = (search.lower(), search.upper());
    let at = |j: usize, i: usize| lo[j] + (hi[j] - lo[j]) * i as f64 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        for col in 0..resolution {
            let (x1, x2) = (at(0, col), at(1, row));
            let label = model.predict(&[x1, x2])?.label;
            out.push(GridPoint { x1, x2, label });
        }
    }
    Ok(out)
}

/// Writes the grid as CSV with columns `x1,x2,label`.
pub fn export_boundary_grid<W: Write>(
    model: &dyn OpenClassifier,
    search: &SearchBox,
    resolution: usize,
    out: W,
) -> Result<Vec<GridPoint>> {
    let grid = boundary_grid(model, search, resolution)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "label"])?;
    for p in &grid {
        let label = match p.label {
            Label::Novel => NOVEL_TOKEN.to_string(),
            Label::Class(k) => k.to_string(),
        };
        w.write_record([p.x1.to_string(), p.x2.to_string(), label])?;
    }
    w.flush()?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::open_classifier::Prediction;

    struct Constant(Label);

    impl OpenClassifier for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn num_classes(&self) -> usize {
            1
        }
        fn predict(&self, _: &[f64]) -> Result<Prediction> {
            Ok(Prediction {
                label: self.0,
                confidences: vec![0.0],
            })
        }
    }

    #[test]
    fn corners_at_resolution_two() {
        let b = SearchBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let g = boundary_grid(&Constant(Label::Novel), &b, 2).unwrap();
        let pts: Vec<(f64, f64)> = g.iter().map(|p| (p.x1, p.x2)).collect();
        assert_eq!(pts, vec![(-1.0, 0.0), (1.0, 0.0), (-1.0, 2.0), (1.0, 2.0)]);
    }

    #[test]
    fn constant_model_single_label() {
        let b = SearchBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        let g = export_boundary_grid(&Constant(Label::Class(1)), &b, 7, &mut buf).unwrap();
        assert_eq!(g.len(), 49);
        assert!(g.iter().all(|p| p.label == Label::Class(1)));
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 50);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));
    }

    #[test]
    fn rejects_bad_input() {
        let b3 = SearchBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(boundary_grid(&Constant(Label::Novel), &b3, 3).is_err());
        let b = SearchBox::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(boundary_grid(&Constant(Label::Novel), &b, 1).is_err());
    }
}
