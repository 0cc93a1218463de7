use num_complex::Complex64;
use serde::Serialize;

use super::{axis_sign, GaussianPacket, GridFunction, TestFunction};
use crate::error::{Error, Result};
use crate::numerics::golden_min;

/// A weighted sup-norm value. `value` is `+∞` when the norm diverges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub family: String,
    pub rho: f64,
    pub a_bar: f64,
    pub order: usize,
    pub value: f64,
}

impl NormEstimate {
    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `(ρ′, a′)` with `1/ρ + 1/ρ′ = 1` and `(ρ′a′)^ρ (ρa)^{ρ′} = 1`.
pub fn duality_parameters(rho: f64, a: f64) -> Result<(f64, f64)> {
    if !(rho > 1.0) || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("duality needs rho > 1 and a > 0, got rho={rho}, a={a}")));
    }
    let rp = rho / (rho - 1.0);
    let ap = (rho * a).powf(-rp / rho) / rp;
    Ok((rp, ap))
}

/// `sup_x max_{|κ|≤N} |∂^κ f(x)| e^{ā Σ_j |x_j|^ρ}`.
///
/// Gaussian derivatives are exact; bumps go through a sampled grid.
pub fn gs_norm(f: &TestFunction, rho: f64, a_bar: f64, order: usize) -> Result<NormEstimate> {
    check_params(rho, a_bar)?;
    match f {
        TestFunction::Gaussian(g) => Ok(gaussian_norm(g, rho, a_bar, order)),
        TestFunction::Bump(b) => {
            let d = b.center.len();
            let n = match d {
                1 => 1024,
                2 => 160,
                _ => 24,
            };
            let pad = 2.0 * b.radius / n as f64 * 4.0;
            let lo: Vec<f64> = b.center.iter().map(|c| c - b.radius - pad).collect();
            let hi: Vec<f64> = b.center.iter().map(|c| c + b.radius + pad).collect();
            let grid = GridFunction::from_fn(&lo, &hi, &vec![n; d], |x| f.eval(x))?;
            let mut est = gs_norm_grid(&grid, rho, a_bar, order)?;
            est.family = "bump".into();
            Ok(est)
        }
    }
}

fn check_params(rho: f64, a_bar: f64) -> Result<()> {
    if !(rho > 0.0) || !(a_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!("norm needs rho > 0 and a_bar >= 0, got {rho}, {a_bar}")));
    }
    Ok(())
}

/// Coefficients of `P_n` with `d^n/du^n e^{−u²/(2σ²)+βu} = P_n(u) e^{…}`.
fn derivative_polys(sigma: f64, beta: Complex64, order: usize) -> Vec<Vec<Complex64>> {
    let mut polys = vec![vec![Complex64::new(1.0, 0.0)]];
    let inv = 1.0 / (sigma * sigma);
    for n in 0..order {
        let p = &polys[n];
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            if k > 0 {
                next[k - 1] += c * k as f64;
            }
            next[k] += c * beta;
            next[k + 1] -= c * inv;
        }
        polys.push(next);
    }
    polys
}

fn eval_poly(p: &[Complex64], u: f64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * u + c)
}

/// Log of `sup_x e^{φ(x)}` for a function that tends to `−∞` at both ends.
fn log_sup<F: Fn(f64) -> f64>(phi: F, center: f64, scale: f64) -> f64 {
    let mut half = center.abs() + 12.0 * scale + 1.0;
    let samples = 4001;
    for _ in 0..40 {
        let h = 2.0 * half / (samples - 1) as f64;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for i in 0..samples {
            let v = phi(center - half + i as f64 * h);
            if v > best.0 {
                best = (v, i);
            }
        }
        if best.1 > samples / 40 && best.1 < samples - samples / 40 {
            let x = center - half + best.1 as f64 * h;
            let (_, neg) = golden_min(|t| -phi(t), x - h, x + h, 1e-12 * (1.0 + x.abs()));
            return best.0.max(-neg);
        }
        half *= 2.0;
    }
    f64::INFINITY
}

fn gaussian_norm(g: &GaussianPacket, rho: f64, a_bar: f64, order: usize) -> NormEstimate {
    let d = g.center.len();
    let mut est = NormEstimate { family: "gaussian".into(), rho, a_bar, order, value: 0.0 };
    if g.amplitude.norm() == 0.0 {
        return est;
    }
    let divergent = g.widths.iter().zip(&g.center).any(|(s, c)| {
        let t = 1.0 / (2.0 * s * s);
        if rho > 2.0 {
            return a_bar > 0.0;
        }
        if rho < 2.0 {
            return false;
        }
        let rel = (a_bar - t) / t;
        if rel.abs() <= 1e-14 {
            order > 0 || *c != 0.0
        } else {
            rel > 0.0
        }
    });
    if divergent {
        est.value = f64::INFINITY;
        return est;
    }
    // per-axis log sups for every derivative order
    let mut table = vec![vec![0.0; order + 1]; d];
    for mu in 0..d {
        let sigma = g.widths[mu];
        let c = g.center[mu];
        let beta = Complex64::new(0.0, -axis_sign(mu) * g.carrier[mu]);
        let polys = derivative_polys(sigma, beta, order);
        for (n, p) in polys.iter().enumerate() {
            table[mu][n] = log_sup(
                |x| {
                    let u = x - c;
                    eval_poly(p, u).norm().ln() - u * u / (2.0 * sigma * sigma) + a_bar * x.abs().powf(rho)
                },
                c,
                sigma,
            );
        }
    }
    let mut best = f64::NEG_INFINITY;
    for_each_multi_index(d, order, |kappa| {
        let s: f64 = kappa.iter().enumerate().map(|(mu, k)| table[mu][*k]).sum();
        best = best.max(s);
    });
    est.value = g.amplitude.norm() * best.exp();
    est
}

fn for_each_multi_index<F: FnMut(&[usize])>(d: usize, order: usize, mut f: F) {
    fn rec<F: FnMut(&[usize])>(k: &mut Vec<usize>, d: usize, left: usize, f: &mut F) {
        if k.len() == d {
            f(k);
            return;
        }
        for n in 0..=left {
            k.push(n);
            rec(k, d, left - n, f);
            k.pop();
        }
    }
    rec(&mut Vec::with_capacity(d), d, order, &mut f);
}

/// Richardson-extrapolated central difference along one axis, zero outside
/// the box.
fn differentiate(g: &GridFunction, axis: usize) -> GridFunction {
    let n = g.counts[axis] as isize;
    let stride = g.strides()[axis];
    let h = g.spacing(axis);
    let mut out = g.clone();
    let at = |i: usize, j: isize, off: isize| -> Complex64 {
        let t = j + off;
        if t < 0 || t >= n {
            Complex64::new(0.0, 0.0)
        } else {
            g.values[(i as isize + off * stride as isize) as usize]
        }
    };
    for i in 0..g.values.len() {
        let j = ((i / stride) % n as usize) as isize;
        let d1 = (at(i, j, 1) - at(i, j, -1)) / (2.0 * h);
        let d2 = (at(i, j, 2) - at(i, j, -2)) / (4.0 * h);
        out.values[i] = (4.0 * d1 - d2) / 3.0;
    }
    out
}

/// Real-axis norm of sampled data. Derivatives beyond order 4 are refused.
/// A supremum sitting on the outer layer of the box is reported as
/// divergent, since the grid cannot bound what lies beyond it.
pub fn gs_norm_grid(g: &GridFunction, rho: f64, a_bar: f64, order: usize) -> Result<NormEstimate> {
    check_params(rho, a_bar)?;
    if order > 4 {
        return Err(Error::InvalidParameter("grid derivatives limited to order 4".into()));
    }
    let d = g.dim();
    let weight: Vec<f64> = (0..g.len())
        .map(|i| {
            let x = g.point(i);
            a_bar * x.iter().map(|v| v.abs().powf(rho)).sum::<f64>()
        })
        .collect();
    let mut best = 0.0f64;
    let mut on_edge = false;
    let mut failure = None;
    for_each_multi_index(d, order, |kappa| {
        if failure.is_some() {
            return;
        }
        let mut h = g.clone();
        for (axis, k) in kappa.iter().enumerate() {
            for _ in 0..*k {
                h = differentiate(&h, axis);
            }
        }
        for (i, v) in h.values.iter().enumerate() {
            let w = v.norm() * weight[i].exp();
            if w > best {
                best = w;
                let idx = h.multi_index(i);
                on_edge = idx.iter().zip(&h.counts).any(|(j, n)| *j < 2 || *j + 2 >= *n);
            }
        }
        if !best.is_finite() {
            failure = Some(());
        }
    });
    let value = if on_edge && best > 0.0 || failure.is_some() { f64::INFINITY } else { best };
    Ok(NormEstimate { family: "grid".into(), rho, a_bar, order, value })
}

/// `sup_{x,y} |f(x+iy)| Π_j e^{a|x_j|^ρ − b|y_j|^σ}` for a Gaussian packet,
/// using the closed-form analytic continuation.
pub fn complex_plane_norm(g: &GaussianPacket, a: f64, rho: f64, b: f64, sigma_exp: f64) -> Result<NormEstimate> {
    check_params(rho, a)?;
    check_params(sigma_exp, b)?;
    let mut est = NormEstimate { family: "complex".into(), rho, a_bar: a, order: 0, value: 0.0 };
    if g.amplitude.norm() == 0.0 {
        return Ok(est);
    }
    let mut total = 0.0;
    for mu in 0..g.center.len() {
        let s = g.widths[mu];
        let t = 1.0 / (2.0 * s * s);
        let c = g.center[mu];
        let k = axis_sign(mu) * g.carrier[mu];
        let x_div = rho > 2.0 || (rho == 2.0 && (a > t || (a == t && c != 0.0)));
        let y_div = sigma_exp < 2.0 || (sigma_exp == 2.0 && (b < t || (b == t && k != 0.0)));
        if x_div || y_div {
            est.value = f64::INFINITY;
            return Ok(est);
        }
        total += log_sup(|x| -(x - c) * (x - c) * t + a * x.abs().powf(rho), c, s);
        total += log_sup(|y| y * y * t + k * y - b * y.abs().powf(sigma_exp), 0.0, s.max(1.0));
    }
    est.value = g.amplitude.norm() * total.exp();
    Ok(est)
}
