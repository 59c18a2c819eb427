use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{CantorSpec, DiscreteMeasure};
use crate::numeric::{dist, KahanSum};

/// How the `j = k` terms of the discrete energy are treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagonalPolicy {
    /// Drop them: `Σ_{j≠k} m_j m_k |x_j - x_k|^{-s}`.
    OffDiagonal,
    /// Each atom stands for a copy of the whole measure scaled by
    /// `cell_scale`, contributing `m_j^2 cell_scale^{-s} I`. Solving
    /// `I = offdiag + D I` with `D = Σ m_j^2 cell_scale^{-s}` gives
    /// `I = offdiag / (1 - D)`; requires `D < 1`.
    SelfSimilar { cell_scale: f64 },
}

impl DiagonalPolicy {
    /// Self-similar completion for a Cantor measure at `depth`.
    pub fn self_similar_for(spec: &CantorSpec, depth: u32) -> Self {
        DiagonalPolicy::SelfSimilar {
            cell_scale: spec.ratio().powi(depth as i32),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DiagonalPolicy::OffDiagonal => "off-diagonal",
            DiagonalPolicy::SelfSimilar { .. } => "self-similar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub s: f64,
    pub value: f64,
    /// Generation of the measure, when known.
    pub depth: Option<u32>,
    pub diagonal_policy: &'static str,
    /// The off-diagonal sum, whatever the policy.
    pub off_diagonal: f64,
}

impl EnergyReport {
    pub fn at_depth(mut self, depth: u32) -> Self {
        self.depth = Some(depth);
        self
    }
}

/// Off-diagonal Riesz `s`-energy of a discrete measure.
pub fn energy_integral(measure: &DiscreteMeasure, s: f64) -> Result<EnergyReport> {
    energy_integral_with(measure, s, DiagonalPolicy::OffDiagonal)
}

pub fn energy_integral_with(
    measure: &DiscreteMeasure,
    s: f64,
    policy: DiagonalPolicy,
) -> Result<EnergyReport> {
    let d = measure.dim() as f64;
    if !(s > 0.0 && s < d) {
        return Err(Error::Domain(format!(
            "energy exponent {s} outside (0, {d})"
        )));
    }
    let n = measure.len();
    let rows: Vec<Result<KahanSum>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let xj = measure.point(j);
            let mut acc = KahanSum::new();
            for k in j + 1..n {
                let r = dist(xj, measure.point(k));
                if r == 0.0 {
                    return Err(Error::Domain(format!("atoms {j} and {k} coincide")));
                }
                acc.add(measure.mass(k) * r.powf(-s));
            }
            let mut row = KahanSum::new();
            row.add(2.0 * measure.mass(j) * acc.value());
            Ok(row)
        })
        .collect();
    let mut total = KahanSum::new();
    for r in rows {
        total.merge(&r?);
    }
    let off = total.value();
    let value = match policy {
        DiagonalPolicy::OffDiagonal => off,
        DiagonalPolicy::SelfSimilar { cell_scale } => {
            if !(cell_scale > 0.0 && cell_scale <= 1.0) {
                return Err(Error::Domain(format!(
                    "cell scale {cell_scale} outside (0, 1]"
                )));
            }
            let diag: f64 =
                measure.masses().iter().map(|m| m * m).sum::<f64>() * cell_scale.powf(-s);
            if diag >= 1.0 {
                return Err(Error::Domain(format!(
                    "self-similar diagonal weight {diag} >= 1: energy diverges at s = {s}"
                )));
            }
            off / (1.0 - diag)
        }
    };
    Ok(EnergyReport {
        s,
        value,
        depth: None,
        diagonal_policy: policy.label(),
        off_diagonal: off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::build_cantor;

    #[test]
    fn two_atoms_at_unit_distance() {
        let mu = DiscreteMeasure::uniform_on(1, &[0.0, 1.0], 1e-3).unwrap();
        for s in [0.1, 0.5, 0.99] {
            let e = energy_integral(&mu, s).unwrap();
            assert!((e.value - 0.5).abs() < 1e-15);
            assert_eq!(e.diagonal_policy, "off-diagonal");
        }
    }

    #[test]
    fn exponent_domain() {
        let mu = DiscreteMeasure::uniform_on(1, &[0.0, 1.0], 1e-3).unwrap();
        assert!(matches!(energy_integral(&mu, 0.0), Err(Error::Domain(_))));
        assert!(matches!(energy_integral(&mu, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn matches_naive_double_sum() {
        let mu = build_cantor(&CantorSpec::middle_thirds(), 5);
        let s = 0.4;
        let mut naive = 0.0;
        for (x, mx) in mu.iter() {
            for (y, my) in mu.iter() {
                if x != y {
                    naive += mx * my * (x[0] - y[0]).abs().powf(-s);
                }
            }
        }
        let e = energy_integral(&mu, s).unwrap();
        assert!((e.value - naive).abs() < 1e-12 * naive);
    }

    #[test]
    fn self_similar_completion_needs_convergent_diagonal() {
        let spec = CantorSpec::middle_thirds();
        let mu = build_cantor(&spec, 6);
        let p = DiagonalPolicy::self_similar_for(&spec, 6);
        let e = energy_integral_with(&mu, 0.5, p).unwrap();
        assert!(e.value > e.off_diagonal);
        // 3^0.7 / 2 > 1: the completion does not exist above the dimension.
        assert!(energy_integral_with(&mu, 0.7, p).is_err());
    }
}
