use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Slack for touching children (`offsets[i+1] - offsets[i] == ratio`) after
/// rounding of decimal inputs.
const TOUCH_TOL: f64 = 1e-12;

/// A self-similar Cantor set in `[0, 1]`: `pieces` children of length
/// `ratio`, with left endpoints at `offsets`.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorSpec {
    pieces: usize,
    ratio: f64,
    offsets: Vec<f64>,
}

impl CantorSpec {
    pub fn new(pieces: usize, ratio: f64, offsets: Vec<f64>) -> Result<Self> {
        let spec = CantorSpec {
            pieces,
            ratio,
            offsets,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Children spread evenly from 0 to `1 - ratio`.
    pub fn evenly_spaced(pieces: usize, ratio: f64) -> Result<Self> {
        let offsets = if pieces == 1 {
            vec![0.0]
        } else {
            (0..pieces)
                .map(|i| i as f64 * (1.0 - ratio) / (pieces - 1) as f64)
                .collect()
        };
        Self::new(pieces, ratio, offsets)
    }

    /// Two-piece set `C_s` with similarity dimension `dim`, keeping the endpoints 0 and 1.
    pub fn with_dimension(dim: f64) -> Result<Self> {
        if !(dim > 0.0 && dim <= 1.0) {
            return Err(Error::input(format!(
                "Cantor dimension {dim} outside (0, 1]"
            )));
        }
        Self::evenly_spaced(2, 0.5f64.powf(1.0 / dim))
    }

    pub fn middle_thirds() -> Self {
        CantorSpec {
            pieces: 2,
            ratio: 1.0 / 3.0,
            offsets: vec![0.0, 2.0 / 3.0],
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.pieces;
        if m == 0 {
            return Err(Error::Construction(
                "Cantor spec needs at least one piece".into(),
            ));
        }
        if self.offsets.len() != m {
            return Err(Error::Construction(format!(
                "expected {m} offsets, got {}",
                self.offsets.len()
            )));
        }
        let rho = self.ratio;
        if !(rho > 0.0 && rho * m as f64 <= 1.0 + TOUCH_TOL) {
            return Err(Error::Construction(format!(
                "ratio {rho} outside (0, 1/{m}]"
            )));
        }
        for &o in &self.offsets {
            if !o.is_finite() || o < -TOUCH_TOL || o > 1.0 - rho + TOUCH_TOL {
                return Err(Error::Construction(format!(
                    "offset {o} outside [0, {}]",
                    1.0 - rho
                )));
            }
        }
        for w in self.offsets.windows(2) {
            if w[1] - w[0] < rho - TOUCH_TOL {
                return Err(Error::Construction(format!(
                    "children starting at {} and {} overlap (ratio {rho})",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `log m / log(1/ρ)`; 1 for the full interval.
    pub fn similarity_dimension(&self) -> f64 {
        if self.pieces == 1 && self.ratio >= 1.0 {
            return 1.0;
        }
        (self.pieces as f64).ln() / (1.0 / self.ratio).ln()
    }

    pub fn cell_count(&self, depth: u32) -> u128 {
        (self.pieces as u128).saturating_pow(depth)
    }

    /// Left endpoints of the generation-`depth` cells. Cell `i` at depth
    /// `n + 1` is a child of cell `i / pieces` at depth `n`.
    pub(crate) fn cell_lefts(&self, depth: u32) -> Vec<f64> {
        let mut lefts = vec![0.0];
        let mut len = 1.0;
        for _ in 0..depth {
            let mut next = Vec::with_capacity(lefts.len() * self.pieces);
            for &l in &lefts {
                for &o in &self.offsets {
                    next.push(l + o * len);
                }
            }
            len *= self.ratio;
            lefts = next;
        }
        lefts
    }
}

/// Natural measure at generation `depth`: one atom of mass `m^-depth` at the
/// center of each surviving cell.
pub fn build_cantor(spec: &CantorSpec, depth: u32) -> DiscreteMeasure {
    let cell = spec.ratio.powi(depth as i32);
    let lefts = spec.cell_lefts(depth);
    let mass = 1.0 / lefts.len() as f64;
    let coords: Vec<f64> = lefts.iter().map(|l| l + 0.5 * cell).collect();
    let masses = vec![mass; coords.len()];
    DiscreteMeasure::from_parts(1, coords, masses, vec![cell])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_unit_interval() {
        let mu = build_cantor(&CantorSpec::middle_thirds(), 0);
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.point(0), &[0.5]);
        assert_eq!(mu.mass(0), 1.0);
        assert_eq!(mu.resolution(), 1.0);
    }

    #[test]
    fn middle_thirds_depth_one() {
        let mu = build_cantor(&CantorSpec::middle_thirds(), 1);
        assert_eq!(mu.len(), 2);
        assert!((mu.point(0)[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((mu.point(1)[0] - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(mu.mass(0), 0.5);
        assert!((mu.resolution() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_ratio_depth_two() {
        let spec = CantorSpec::new(2, 0.25, vec![0.0, 0.75]).unwrap();
        let mu = build_cantor(&spec, 2);
        assert_eq!(mu.len(), 4);
        assert!(mu.masses().iter().all(|&m| m == 0.25));
        assert_eq!(mu.point(0)[0], 1.0 / 32.0);
        assert_eq!(mu.resolution(), 1.0 / 16.0);
    }

    #[test]
    fn overlapping_offsets_rejected() {
        let err = CantorSpec::new(2, 0.4, vec![0.0, 0.3]).unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
        assert!(CantorSpec::new(2, 0.4, vec![0.3, 0.0]).is_err());
        assert!(CantorSpec::new(2, 0.6, vec![0.0, 0.4]).is_err());
    }

    #[test]
    fn touching_children_and_full_interval_accepted() {
        let thirds = CantorSpec::new(3, 1.0 / 3.0, vec![0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((thirds.similarity_dimension() - 1.0).abs() < 1e-12);
        let full = CantorSpec::new(1, 1.0, vec![0.0]).unwrap();
        assert_eq!(full.similarity_dimension(), 1.0);
        assert_eq!(build_cantor(&full, 5).len(), 1);
    }

    #[test]
    fn with_dimension_hits_target() {
        for s in [0.3, 0.5, 0.8, 0.9] {
            let c = CantorSpec::with_dimension(s).unwrap();
            assert!((c.similarity_dimension() - s).abs() < 1e-12);
            assert_eq!(c.offsets()[0], 0.0);
            assert!((c.offsets()[1] + c.ratio() - 1.0).abs() < 1e-15);
        }
    }
}
