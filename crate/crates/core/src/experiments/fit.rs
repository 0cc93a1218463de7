use serde::Serialize;

use crate::numerics::golden_min;

/// `|u(λ)| ≈ C exp(−c λ^ρ)` fitted by least squares on `ln|u|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub log_c: f64,
    pub c: f64,
    pub rho: f64,
    pub residual_rms: f64,
    pub window: [f64; 2],
    pub points: usize,
}

/// Outcome of a fit attempt; too few usable points is not a failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FitOutcome {
    Fitted(DecayFit),
    Inconclusive { reason: String },
}

impl FitOutcome {
    pub fn fitted(&self) -> Option<&DecayFit> {
        match self {
            FitOutcome::Fitted(f) => Some(f),
            FitOutcome::Inconclusive { .. } => None,
        }
    }
}

/// One scan row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub lambda: f64,
    pub abs_u: f64,
    pub eps_quad: f64,
}

impl ScanPoint {
    /// Usable for fitting: clearly above the quadrature noise.
    pub fn usable(&self) -> bool {
        self.abs_u > 10.0 * self.eps_quad && self.abs_u > 0.0 && self.lambda > 0.0
    }
}

pub const MIN_FIT_POINTS: usize = 4;
const RHO_RANGE: (f64, f64) = (0.2, 4.0);

/// Fits `ln|u| = ln C − c λ^ρ`; `rho = Some(ρ)` fixes the exponent.
pub fn fit_decay(points: &[ScanPoint], rho: Option<f64>) -> FitOutcome {
    let used: Vec<(f64, f64)> = points.iter().filter(|p| p.usable()).map(|p| (p.lambda, p.abs_u.ln())).collect();
    if used.len() < MIN_FIT_POINTS {
        return FitOutcome::Inconclusive {
            reason: format!("{} usable points above 10·ε_quad, need {MIN_FIT_POINTS}", used.len()),
        };
    }
    let rho = match rho {
        Some(r) => r,
        None => golden_min(|r| linear_fit(&used, r).2, RHO_RANGE.0, RHO_RANGE.1, 1e-9).0,
    };
    let (log_c, c, residual_rms) = linear_fit(&used, rho);
    let lo = used.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    FitOutcome::Fitted(DecayFit { log_c, c, rho, residual_rms, window: [lo, hi], points: used.len() })
}

/// Least squares of `y = a − c t` with `t = λ^ρ`; returns `(a, c, rms)`.
fn linear_fit(points: &[(f64, f64)], rho: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let t: Vec<f64> = points.iter().map(|p| p.0.powf(rho)).collect();
    let tm = t.iter().sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (ti, p) in t.iter().zip(points) {
        stt += (ti - tm) * (ti - tm);
        sty += (ti - tm) * (p.1 - ym);
    }
    let slope = sty / stt;
    let a = ym - slope * tm;
    let ss: f64 = t.iter().zip(points).map(|(ti, p)| (p.1 - a - slope * ti).powi(2)).sum();
    (a, -slope, (ss / n).sqrt())
}

/// Nonincreasing in λ among the usable points with `λ ≥ from`.
pub fn is_monotone_beyond(points: &[ScanPoint], from: f64) -> bool {
    let tail: Vec<f64> = points.iter().filter(|p| p.lambda >= from && p.usable()).map(|p| p.abs_u).collect();
    tail.windows(2).all(|w| w[1] <= w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synth(c0: f64, c: f64, rho: f64, lambdas: &[f64]) -> Vec<ScanPoint> {
        lambdas.iter().map(|&l| ScanPoint { lambda: l, abs_u: c0 * (-c * l.powf(rho)).exp(), eps_quad: 0.0 }).collect()
    }

    #[test]
    fn recovers_exact_model() {
        let pts = synth(3.0, 0.4, 1.7, &[2.0, 3.0, 4.0, 5.0, 6.0]);
        let f = fit_decay(&pts, None);
        let f = f.fitted().unwrap();
        assert!((f.rho - 1.7).abs() < 1e-5, "{f:?}");
        assert!((f.c - 0.4).abs() < 1e-4);
        assert!((f.log_c - 3f64.ln()).abs() < 1e-4);
        assert!(f.residual_rms < 1e-6);
        assert_eq!(f.window, [2.0, 6.0]);
        let fixed = fit_decay(&synth(1.0, 2.0, 1.0, &[3.0, 4.0, 5.0, 6.0, 7.0]), Some(1.0));
        assert!((fixed.fitted().unwrap().c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_floor_points_are_excluded() {
        let mut pts = synth(1.0, 1.0, 1.0, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        pts[5].eps_quad = pts[5].abs_u;
        let f = fit_decay(&pts, Some(1.0));
        assert_eq!(f.fitted().unwrap().points, 5);
        for p in pts.iter_mut().skip(2) {
            p.eps_quad = p.abs_u;
        }
        assert!(matches!(fit_decay(&pts, None), FitOutcome::Inconclusive { .. }));
    }

    #[test]
    fn monotone_check() {
        let mut pts = synth(1.0, 1.0, 1.0, &[1.0, 2.0, 3.0, 4.0]);
        assert!(is_monotone_beyond(&pts, 2.0));
        pts[0].abs_u = 1e-9;
        assert!(is_monotone_beyond(&pts, 2.0));
        pts[3].abs_u = 1.0;
        assert!(!is_monotone_beyond(&pts, 2.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn residual_is_never_hidden(c in 0.1f64..2.0, rho in 0.8f64..2.0, noise in prop::collection::vec(-0.3f64..0.3, 6)) {
            let mut pts = synth(1.0, c, rho, &[1.5, 2.5, 3.5, 4.5, 5.5, 6.5]);
            for (p, e) in pts.iter_mut().zip(&noise) {
                p.abs_u *= e.exp();
            }
            let f = fit_decay(&pts, None);
            let f = f.fitted().unwrap();
            let rms = (pts.iter().map(|p| (p.abs_u.ln() - f.log_c + f.c * p.lambda.powf(f.rho)).powi(2)).sum::<f64>() / 6.0).sqrt();
            prop_assert!((rms - f.residual_rms).abs() < 1e-9, "{rms} vs {}", f.residual_rms);
        }
    }
}
