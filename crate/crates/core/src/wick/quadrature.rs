use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::numerics::composite_gauss_legendre;

/// `sqrt(|k|² + m²)`.
#[inline]
pub fn omega(k: &[f64], m: f64) -> f64 {
    (k.iter().map(|v| v * v).sum::<f64>() + m * m).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    GaussLegendre,
    Trapezoid,
}

/// How pair quadratures are built: cutoffs come from an envelope scan unless
/// `cutoff` is set, panel widths from the oscillation of each pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub nodes_per_panel: usize,
    pub max_panel_width: f64,
    pub tail_tol: f64,
    pub cutoff: Option<f64>,
    pub resolution_scale: f64,
    pub max_nodes_per_dim: usize,
    pub refine_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::GaussLegendre,
            nodes_per_panel: 12,
            max_panel_width: 0.5,
            tail_tol: 1e-10,
            cutoff: None,
            resolution_scale: 1.0,
            max_nodes_per_dim: 200_000,
            refine_cutoff: 1.15,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 || !(self.max_panel_width > 0.0) || !(self.resolution_scale > 0.0) {
            return Err(Error::Config("quadrature: nodes_per_panel >= 2, positive widths and scale required".into()));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1e-3) {
            return Err(Error::Config(format!("quadrature: tail_tol {} out of range", self.tail_tol)));
        }
        if !(self.refine_cutoff >= 1.0) {
            return Err(Error::Config("quadrature: refine_cutoff must be >= 1".into()));
        }
        if let Some(k) = self.cutoff {
            if !(k > 0.0) {
                return Err(Error::Config("quadrature: cutoff must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { resolution_scale: self.resolution_scale * factor, ..self.clone() }
    }
}

/// One resolution level: panel count multiplier and cutoff stretch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Level {
    pub panels: f64,
    pub cutoff: f64,
}

impl Level {
    pub const COARSE: Level = Level { panels: 1.0, cutoff: 1.0 };

    pub fn refined(spec: &QuadratureSpec) -> Level {
        Level { panels: 2.0, cutoff: spec.refine_cutoff }
    }
}

/// Nodes and weights on `[a, b]` for the chosen rule.
pub(crate) fn line_rule(rule: QuadratureRule, a: f64, b: f64, panels: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadratureRule::GaussLegendre => composite_gauss_legendre(a, b, panels, per_panel),
        QuadratureRule::Trapezoid => {
            let n = panels * per_panel;
            let h = (b - a) / n as f64;
            let x = (0..=n).map(|i| a + i as f64 * h).collect();
            let w = (0..=n).map(|i| if i == 0 || i == n { 0.5 * h } else { h }).collect();
            (x, w)
        }
    }
}

/// A fixed on-shell rule: spatial nodes with weights that include
/// `1/((2π)^{d−1} 2ω)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OnShellQuadrature {
    pub dim: usize,
    pub mass: f64,
    pub rule: QuadratureRule,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
}

impl OnShellQuadrature {
    /// `d = 2`: composite rule on `[lo, hi]`.
    pub fn line(mass: f64, lo: f64, hi: f64, panels: usize, per_panel: usize, rule: QuadratureRule) -> Result<Self> {
        check_mass(mass)?;
        if !(hi > lo) || panels == 0 {
            return Err(Error::InvalidParameter("empty quadrature interval".into()));
        }
        let (x, w) = line_rule(rule, lo, hi, panels, per_panel);
        let omega: Vec<f64> = x.iter().map(|k| omega(&[*k], mass)).collect();
        let weights = w.iter().zip(&omega).map(|(w, o)| w / (2.0 * std::f64::consts::PI * 2.0 * o)).collect();
        Ok(Self { dim: 2, mass, rule, lo: vec![lo], hi: vec![hi], nodes: x.into_iter().map(|k| vec![k]).collect(), weights, omega })
    }

    /// `d = 4`: tensor rule on `[−K, K]³`.
    pub fn cube(mass: f64, cutoff: f64, panels: usize, per_panel: usize, rule: QuadratureRule) -> Result<Self> {
        check_mass(mass)?;
        if !(cutoff > 0.0) || panels == 0 {
            return Err(Error::InvalidParameter("empty quadrature cube".into()));
        }
        let (x, w) = line_rule(rule, -cutoff, cutoff, panels, per_panel);
        let norm = (2.0 * std::f64::consts::PI).powi(3);
        let n = x.len();
        let mut nodes = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        let mut om = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let k = vec![x[i], x[j], x[l]];
                    let o = omega(&k, mass);
                    weights.push(w[i] * w[j] * w[l] / (norm * 2.0 * o));
                    om.push(o);
                    nodes.push(k);
                }
            }
        }
        Ok(Self { dim: 4, mass, rule, lo: vec![-cutoff; 3], hi: vec![cutoff; 3], nodes, weights, omega: om })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `k₊ = (ω_k, k)` at node `i`.
    pub fn on_shell(&self, i: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.dim);
        p.push(self.omega[i]);
        p.extend_from_slice(&self.nodes[i]);
        p
    }

    /// Largest `|k|` component covered.
    pub fn cutoff(&self) -> f64 {
        self.lo.iter().chain(&self.hi).fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

/// `|f̂(−k₊) ĝ(k₊)| / ω` along the spatial direction `dir`.
pub(crate) fn envelope(f: &TestFunction, g: &TestFunction, mass: f64, dir: &[f64], t: f64) -> f64 {
    let k: Vec<f64> = dir.iter().map(|d| d * t).collect();
    let o = omega(&k, mass);
    let mut plus = Vec::with_capacity(k.len() + 1);
    plus.push(o);
    plus.extend_from_slice(&k);
    let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
    f.fourier(&minus).norm() * g.fourier(&plus).norm() / o
}

/// Range of `t` along `dir` outside of which the envelope stays below
/// `tol` times its peak. Returns `(lo, hi, t_peak)`.
pub(crate) fn envelope_range(f: &TestFunction, g: &TestFunction, mass: f64, dir: &[f64], tol: f64) -> Result<(f64, f64, f64)> {
    let scale = f.spatial_scale().max(g.spatial_scale()).max(1e-3);
    let h0 = (0.25 / scale).min(0.05);
    let carrier = carrier_size(f).max(carrier_size(g));
    let min_reach = 8.0 + 2.0 * carrier;
    const MAX_REACH: f64 = 1e4;
    let mut peak = (0.0f64, 0.0f64);
    let mut sides = [(0.0, 0.0); 2];
    let e0 = envelope(f, g, mass, dir, 0.0);
    peak = if e0 > peak.0 { (e0, 0.0) } else { peak };
    let mut samples: [Vec<(f64, f64)>; 2] = [vec![(0.0, e0)], vec![(0.0, e0)]];
    for (s, sign) in [1.0f64, -1.0].iter().enumerate() {
        let mut t = 0.0f64;
        loop {
            t += h0 * (t / 20.0).max(1.0);
            let e = envelope(f, g, mass, dir, sign * t);
            samples[s].push((t, e));
            if e > peak.0 {
                peak = (e, sign * t);
            }
            if t >= min_reach {
                let tail_max = samples[s].iter().rev().take_while(|(u, _)| *u >= 0.5 * t).map(|x| x.1).fold(0.0, f64::max);
                if tail_max < tol * peak.0 {
                    break;
                }
            }
            if t > MAX_REACH {
                return Err(Error::UnderResolved(format!("envelope does not decay within |k| < {MAX_REACH}")));
            }
        }
    }
    if peak.0 == 0.0 {
        return Ok((-1.0, 1.0, 0.0));
    }
    for s in 0..2 {
        let last = samples[s].iter().rposition(|(_, e)| *e >= tol * peak.0).unwrap_or(0);
        let reach = samples[s].get(last + 1).map(|x| x.0).unwrap_or(samples[s][last].0);
        sides[s] = (reach, 0.0);
    }
    Ok((-sides[1].0.max(h0), sides[0].0.max(h0), peak.1))
}

fn carrier_size(f: &TestFunction) -> f64 {
    match f {
        TestFunction::Gaussian(g) => g.carrier.iter().fold(0.0, |m, v| m.max(v.abs())),
        TestFunction::Bump(_) => 0.0,
    }
}
