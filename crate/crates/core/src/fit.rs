//! Log-log least-squares fits shared by every scaling experiment.

use crate::error::{Error, Result};

/// One observation of a scaling series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    /// Abscissa: tolerance ε, frequency |ξ|, or inverse box scale.
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Ordinary least squares of `ln value` against `ln x`.
///
/// `points` keeps every input observation; the fit only uses those with
/// `value > 0`. When fewer than two usable points exist the slope is `NaN`
/// and `slope_defined` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<FitPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_used: usize,
    pub slope_defined: bool,
}

impl ScalingFit {
    /// Least-squares fit with at least `min_points` positive values.
    pub fn from_points(points: Vec<FitPoint>, min_points: usize) -> Result<Self> {
        let usable: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.value > 0.0 && p.x > 0.0 && p.value.is_finite())
            .map(|p| (p.x.ln(), p.value.ln()))
            .collect();
        if usable.len() < min_points {
            return Err(Error::Fit(format!(
                "need at least {min_points} points with positive value, got {}",
                usable.len()
            )));
        }
        Ok(Self::fit_logs(points, &usable))
    }

    /// Like [`ScalingFit::from_points`] but never fails: degenerate inputs
    /// yield an undefined slope and keep the raw points.
    pub fn lenient(points: Vec<FitPoint>) -> Self {
        let usable: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.value > 0.0 && p.x > 0.0 && p.value.is_finite())
            .map(|p| (p.x.ln(), p.value.ln()))
            .collect();
        Self::fit_logs(points, &usable)
    }

    fn fit_logs(points: Vec<FitPoint>, usable: &[(f64, f64)]) -> Self {
        let n = usable.len();
        let undefined = |points| ScalingFit {
            points,
            slope: f64::NAN,
            intercept: f64::NAN,
            r_squared: f64::NAN,
            n_used: n,
            slope_defined: false,
        };
        if n < 2 {
            return undefined(points);
        }
        let nf = n as f64;
        let mx = usable.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = usable.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return undefined(points);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            let ss_res: f64 = usable
                .iter()
                .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
                .sum();
            (1.0 - ss_res / syy).clamp(0.0, 1.0)
        };
        ScalingFit {
            points,
            slope,
            intercept,
            r_squared,
            n_used: n,
            slope_defined: true,
        }
    }

    /// `-slope`; the decay exponent for magnitude envelopes.
    pub fn decay_exponent(&self) -> f64 {
        -self.slope
    }
}

/// Fits `value ~ C ε^slope` for a series of `(epsilon, value)` pairs.
pub fn fit_scaling_exponent(series: &[(f64, f64)]) -> Result<ScalingFit> {
    let points = series
        .iter()
        .map(|&(x, value)| FitPoint {
            x,
            value,
            stderr: 0.0,
        })
        .collect();
    ScalingFit::from_points(points, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grid() -> Vec<f64> {
        (4..=12).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn exact_linear_law() {
        let s: Vec<_> = grid().into_iter().map(|e| (e, e)).collect();
        let fit = fit_scaling_exponent(&s).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_five_sixths_law() {
        let s: Vec<_> = grid().into_iter().map(|e| (e, e.powf(5.0 / 6.0))).collect();
        let fit = fit_scaling_exponent(&s).unwrap();
        assert!((fit.slope - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_law_within_regression_error() {
        // 5% multiplicative noise on 9 dyadic points spanning ln(256): the
        // slope standard error is about 0.05 / (sqrt(sum (x - mean)^2)) ~ 0.009.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let s: Vec<_> = grid()
            .into_iter()
            .map(|e| {
                (
                    e,
                    e.powf(0.9) * (1.0 + 0.05 * (2.0 * rng.gen::<f64>() - 1.0)),
                )
            })
            .collect();
        let fit = fit_scaling_exponent(&s).unwrap();
        assert!((fit.slope - 0.9).abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_scaling_exponent(&[(0.1, 0.1), (0.2, 0.0), (0.3, 0.3)]).is_err());
        let lenient = ScalingFit::lenient(vec![FitPoint {
            x: 0.1,
            value: 0.2,
            stderr: 0.0,
        }]);
        assert!(!lenient.slope_defined);
        assert_eq!(lenient.points.len(), 1);
    }
}
