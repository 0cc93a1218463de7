//! Test-function families, Fourier transforms and Gelfand-Shilov norms.
//!
//! The Fourier convention is `f̂(p) = ∫ f(x) e^{i p·x} dx` with the
//! Minkowski pairing `p·x = p⁰x⁰ − Σ_j p^j x^j`. Every module that needs a
//! transform goes through [`minkowski_pairing`] or [`axis_sign`], so the
//! sign is fixed in exactly one place.

mod grid;
mod norms;

pub use grid::GridFunction;
pub use norms::{complex_plane_norm, duality_parameters, gs_norm, gs_norm_grid, NormEstimate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MinkowskiVector;
use crate::numerics::composite_gauss_legendre;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Sign of axis `mu` in the Minkowski pairing: `+1` for time, `-1` for space.
#[inline]
pub fn axis_sign(mu: usize) -> f64 {
    if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `p·x` for coordinate slices of equal length.
#[inline]
pub fn minkowski_pairing(p: &[f64], x: &[f64]) -> f64 {
    p.iter().zip(x).enumerate().map(|(mu, (a, b))| axis_sign(mu) * a * b).sum()
}

fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// `A · Π_μ exp(−(x^μ−c^μ)²/(2σ_μ²)) · exp(−i k·(x−c))`. Its transform is
/// peaked at `p = k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
    #[serde(default, rename = "momentum")]
    pub carrier: Vec<f64>,
    #[serde(default = "unit_amplitude")]
    pub amplitude: Complex64,
}

fn unit_amplitude() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl GaussianPacket {
    pub fn new(center: Vec<f64>, widths: Vec<f64>, carrier: Vec<f64>, amplitude: Complex64) -> Result<Self> {
        let g = Self { center, widths, carrier, amplitude };
        g.validated()
    }

    /// Real, centred at `center`, no carrier.
    pub fn isotropic(center: &[f64], width: f64) -> Self {
        Self {
            center: center.to_vec(),
            widths: vec![width; center.len()],
            carrier: vec![0.0; center.len()],
            amplitude: unit_amplitude(),
        }
    }

    fn validated(mut self) -> Result<Self> {
        let d = self.center.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty center".into()));
        }
        if self.carrier.is_empty() {
            self.carrier = vec![0.0; d];
        }
        if self.widths.len() != d || self.carrier.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: self.widths.len().min(self.carrier.len()) });
        }
        if self.widths.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("gaussian widths must be positive".into()));
        }
        Ok(self)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut e = 0.0;
        let mut u = Vec::with_capacity(x.len());
        for mu in 0..x.len() {
            let d = x[mu] - self.center[mu];
            e -= d * d / (2.0 * self.widths[mu] * self.widths[mu]);
            u.push(d);
        }
        self.amplitude * e.exp() * cis(-minkowski_pairing(&self.carrier, &u))
    }

    pub fn fourier(&self, p: &[f64]) -> Complex64 {
        let mut e = 0.0;
        let mut norm = 1.0;
        for mu in 0..p.len() {
            let s = self.widths[mu];
            let d = p[mu] - self.carrier[mu];
            e -= s * s * d * d / 2.0;
            norm *= SQRT_2PI * s;
        }
        self.amplitude * norm * e.exp() * cis(minkowski_pairing(p, &self.center))
    }

    /// The transform written as a packet in momentum space: centre `k`,
    /// widths `1/σ`, carrier `−c`.
    pub fn fourier_packet(&self) -> GaussianPacket {
        let norm: f64 = self.widths.iter().map(|s| SQRT_2PI * s).product();
        let phase = cis(minkowski_pairing(&self.center, &self.carrier));
        GaussianPacket {
            center: self.carrier.clone(),
            widths: self.widths.iter().map(|s| 1.0 / s).collect(),
            carrier: self.center.iter().map(|c| -c).collect(),
            amplitude: self.amplitude * norm * phase,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            center: self.center.clone(),
            widths: self.widths.clone(),
            carrier: self.carrier.iter().map(|k| -k).collect(),
            amplitude: self.amplitude.conj(),
        }
    }
}

/// Compactly supported bump `A · exp(s − s/(1 − |x−c|²/r²))`, where `s`
/// is the `order` of the mollifier profile. Exactly zero for `|x−c| ≥ r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "default_order")]
    pub order: f64,
    #[serde(default = "unit_amplitude")]
    pub amplitude: Complex64,
}

fn default_order() -> f64 {
    1.0
}

impl BumpFunction {
    pub fn new(center: Vec<f64>, radius: f64, order: f64) -> Result<Self> {
        Self { center, radius, order, amplitude: unit_amplitude() }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.center.is_empty() || self.center.len() > 4 || self.center.len() == 3 {
            return Err(Error::InvalidParameter(format!("bump dimension {} not supported", self.center.len())));
        }
        if !(self.radius > 0.0) || !(self.order > 0.0) {
            return Err(Error::InvalidParameter("bump radius and order must be positive".into()));
        }
        Ok(self)
    }

    /// Radial profile as a function of `u = |x − c| / r`.
    #[inline]
    pub fn profile(&self, u: f64) -> f64 {
        if u >= 1.0 {
            0.0
        } else {
            (self.order - self.order / (1.0 - u * u)).exp()
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        let u = r2.sqrt() / self.radius;
        if u >= 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitude * self.profile(u)
        }
    }

    /// Radial Hankel transform of the profile at Euclidean frequency `s`.
    pub fn radial_transform(&self, s: f64) -> f64 {
        let n = self.center.len();
        let r = self.radius;
        let panels = 24usize.max((s * r / 2.0).ceil() as usize);
        // the profile is below 1e-300 beyond u = 0.9985
        let (nodes, weights) = radial_rule(panels);
        let small = s * r < 1e-8;
        let mut acc = 0.0;
        for (u, w) in nodes.iter().zip(weights.iter()) {
            let rho = u * r;
            let psi = self.profile(*u);
            let k = match n {
                1 => 2.0 * (s * rho).cos(),
                2 => {
                    2.0 * std::f64::consts::PI * rho * puruspe::Jn(0, s * rho)
                }
                4 => {
                    let tp2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
                    if small {
                        tp2 * rho.powi(3) / 2.0
                    } else {
                        tp2 * rho * rho * puruspe::Jn(1, s * rho) / s
                    }
                }
                _ => unreachable!("validated dimension"),
            };
            acc += w * r * psi * k;
        }
        acc
    }

    pub fn fourier(&self, p: &[f64]) -> Complex64 {
        let s = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.amplitude * self.radial_transform(s) * cis(minkowski_pairing(p, &self.center))
    }

    pub fn conj(&self) -> Self {
        Self { amplitude: self.amplitude.conj(), ..self.clone() }
    }
}

fn radial_rule(panels: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Arc, OnceLock, RwLock};
    type Rule = Arc<(Vec<f64>, Vec<f64>)>;
    static CACHE: OnceLock<RwLock<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().expect("rule cache").get(&panels) {
        return (r.0.clone(), r.1.clone());
    }
    let rule = Arc::new(composite_gauss_legendre(0.0, 0.9985, panels, 16));
    cache.write().expect("rule cache").insert(panels, rule.clone());
    (rule.0.clone(), rule.1.clone())
}

/// A smearing function: closed-form Gaussian packet or compact bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Gaussian(GaussianPacket),
    Bump(BumpFunction),
}

impl TestFunction {
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        TestFunction::Gaussian(GaussianPacket::isotropic(center, width))
    }

    pub fn bump(center: &[f64], radius: f64) -> Self {
        TestFunction::Bump(BumpFunction { center: center.to_vec(), radius, order: 1.0, amplitude: unit_amplitude() })
    }

    /// Checks the descriptor after deserialisation.
    pub fn validated(self) -> Result<Self> {
        Ok(match self {
            TestFunction::Gaussian(g) => TestFunction::Gaussian(g.validated()?),
            TestFunction::Bump(b) => TestFunction::Bump(b.validated()?),
        })
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            TestFunction::Gaussian(g) => &g.center,
            TestFunction::Bump(b) => &b.center,
        }
    }

    pub fn center_vector(&self) -> Result<MinkowskiVector> {
        MinkowskiVector::new(self.center())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.eval(x),
            TestFunction::Bump(b) => b.eval(x),
        }
    }

    pub fn fourier(&self, p: &[f64]) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.fourier(p),
            TestFunction::Bump(b) => b.fourier(p),
        }
    }

    pub fn fourier_at(&self, p: &MinkowskiVector) -> Complex64 {
        self.fourier(p.components())
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        match self {
            TestFunction::Gaussian(g) => TestFunction::Gaussian(g.conj()),
            TestFunction::Bump(b) => TestFunction::Bump(b.conj()),
        }
    }

    /// `x ↦ c · f(x)`.
    pub fn scaled(&self, c: Complex64) -> Self {
        match self {
            TestFunction::Gaussian(g) => TestFunction::Gaussian(GaussianPacket { amplitude: g.amplitude * c, ..g.clone() }),
            TestFunction::Bump(b) => TestFunction::Bump(BumpFunction { amplitude: b.amplitude * c, ..b.clone() }),
        }
    }

    /// Radius of the support ball, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            TestFunction::Gaussian(_) => None,
            TestFunction::Bump(b) => Some(b.radius),
        }
    }

    /// Largest position-space length scale.
    pub fn spatial_scale(&self) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.widths.iter().cloned().fold(0.0, f64::max),
            TestFunction::Bump(b) => b.radius,
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.amplitude,
            TestFunction::Bump(b) => b.amplitude,
        }
    }
}

/// `x ↦ f(x − λa)`; the transform picks up `e^{iλ p·a}`.
pub fn translate(f: &TestFunction, a: &[f64], lambda: f64) -> TestFunction {
    let shift = |c: &[f64]| c.iter().zip(a).map(|(c, a)| c + lambda * a).collect::<Vec<_>>();
    match f {
        TestFunction::Gaussian(g) => TestFunction::Gaussian(GaussianPacket { center: shift(&g.center), ..g.clone() }),
        TestFunction::Bump(b) => TestFunction::Bump(BumpFunction { center: shift(&b.center), ..b.clone() }),
    }
}

/// Samples `f` on a grid and transforms it; the result is checked against
/// the closed-form (or quadrature) transform at the grid momenta.
pub fn fourier_on_grid(f: &TestFunction, lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<GridFunction> {
    let g = GridFunction::sample(f, lo, hi, counts)?;
    let hat = g.fourier();
    let defect = hat.relative_l2_defect(|p| f.fourier(p));
    if defect > 1e-6 {
        return Err(Error::UnderResolved(format!("grid transform defect {defect:.3e} exceeds 1e-6")));
    }
    Ok(hat)
}
