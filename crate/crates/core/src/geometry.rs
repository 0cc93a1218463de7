//! Minkowski vectors, the deformation matrix θ, proper orthochronous
//! Lorentz transformations, wedges and cone distances.
//!
//! Signature is `(+, -, ..., -)` and index 0 is time. Only `d = 2` and
//! `d = 4` are supported.

use std::ops::{Add, Neg, Sub};

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

#[inline]
fn metric(mu: usize) -> f64 {
    if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Contravariant components `x^μ` of a point or momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinkowskiVector {
    dim: usize,
    c: [f64; 4],
}

impl MinkowskiVector {
    pub fn new(components: &[f64]) -> Result<Self> {
        check_dim(components.len())?;
        let mut c = [0.0; 4];
        c[..components.len()].copy_from_slice(components);
        Ok(Self { dim: components.len(), c })
    }

    pub fn d2(t: f64, x: f64) -> Self {
        Self { dim: 2, c: [t, x, 0.0, 0.0] }
    }

    pub fn d4(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { dim: 4, c: [t, x, y, z] }
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, c: [0.0; 4] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn get(&self, mu: usize) -> f64 {
        self.c[mu]
    }

    /// Covariant components `x_μ = g_{μν} x^ν`.
    pub fn lower(&self) -> [f64; 4] {
        let mut l = self.c;
        for v in l.iter_mut().skip(1) {
            *v = -*v;
        }
        l
    }

    /// Minkowski pairing `p·x = p⁰x⁰ − **p**·**x**`.
    pub fn dot(&self, other: &Self) -> f64 {
        (0..self.dim).map(|mu| metric(mu) * self.c[mu] * other.c[mu]).sum()
    }

    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v *= s;
        }
        Self { dim: self.dim, c }
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.components().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Add for MinkowskiVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a += b;
        }
        Self { dim: self.dim, c }
    }
}

impl Sub for MinkowskiVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for MinkowskiVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Serialize for MinkowskiVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.components().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MinkowskiVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        MinkowskiVector::new(&v).map_err(serde::de::Error::custom)
    }
}

/// `g_{μν}(x−y)^μ(x−y)^ν`.
pub fn interval(x: &MinkowskiVector, y: &MinkowskiVector) -> f64 {
    (*x - *y).square()
}

pub fn is_spacelike(x: &MinkowskiVector, y: &MinkowskiVector) -> bool {
    interval(x, y) < 0.0
}

const UPPER_INDEX: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn upper_slot(dim: usize, mu: usize, nu: usize) -> usize {
    debug_assert!(mu < nu && nu < dim);
    if dim == 2 {
        0
    } else {
        UPPER_INDEX.iter().position(|&p| p == (mu, nu)).expect("valid index pair")
    }
}

fn upper_len(dim: usize) -> usize {
    dim * (dim - 1) / 2
}

/// Antisymmetric deformation matrix `θ^{μν}`, stored as its strictly upper
/// triangle so that `θ^{νμ} = −θ^{μν}` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMatrix {
    dim: usize,
    upper: [f64; 6],
}

impl ThetaMatrix {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, upper: [0.0; 6] })
    }

    /// Single-block matrix in `d = 2`: `θ^{01} = vartheta`.
    pub fn d2(vartheta: f64) -> Self {
        Self { dim: 2, upper: [vartheta, 0.0, 0.0, 0.0, 0.0, 0.0] }
    }

    /// Builds from `(μ, ν, value)` entries with `μ < ν`.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t = Self::zero(dim)?;
        for &(mu, nu, v) in entries {
            if mu >= nu || nu >= dim {
                return Err(Error::InvalidParameter(format!(
                    "theta entry ({mu}, {nu}) is not strictly upper triangular in d={dim}"
                )));
            }
            t.upper[upper_slot(dim, mu, nu)] = v;
        }
        Ok(t)
    }

    /// Reference matrix: `θ^{01} = ϑ_e` and, in `d = 4`, `θ^{23} = ϑ_m`.
    pub fn reference(vartheta_e: f64, vartheta_m: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if vartheta_e < 0.0 || !vartheta_e.is_finite() {
            return Err(Error::InvalidParameter(format!("vartheta_e must be >= 0, got {vartheta_e}")));
        }
        if dim == 4 && vartheta_m == 0.0 {
            return Err(Error::InvalidParameter("vartheta_m must be nonzero in d=4".into()));
        }
        let mut t = Self::zero(dim)?;
        t.upper[0] = vartheta_e;
        if dim == 4 {
            t.upper[upper_slot(4, 2, 3)] = vartheta_m;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        use std::cmp::Ordering::*;
        match mu.cmp(&nu) {
            Equal => 0.0,
            Less => self.upper[upper_slot(self.dim, mu, nu)],
            Greater => -self.upper[upper_slot(self.dim, nu, mu)],
        }
    }

    /// Strictly upper entries as `(μ, ν, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = upper_len(self.dim);
        if self.dim == 2 {
            vec![(0, 1, self.upper[0])]
        } else {
            UPPER_INDEX[..n].iter().zip(&self.upper).map(|(&(m, n), &v)| (m, n, v)).collect()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut u = self.upper;
        for v in u.iter_mut() {
            *v *= s;
        }
        Self { dim: self.dim, upper: u }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut u = self.upper;
        for (a, b) in u.iter_mut().zip(other.upper) {
            *a += b;
        }
        Self { dim: self.dim, upper: u }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Elementary length `ℓ = sqrt(max |θ^{μν}|)`.
    pub fn elementary_length(&self) -> f64 {
        self.max_abs().sqrt()
    }

    /// `pθq = p_μ θ^{μν} q_ν`, summed over the upper triangle so the result
    /// is exactly antisymmetric under `p ↔ q`.
    #[inline]
    pub fn bilinear(&self, p: &MinkowskiVector, q: &MinkowskiVector) -> f64 {
        let pl = p.lower();
        let ql = q.lower();
        if self.dim == 2 {
            return self.upper[0] * (pl[0] * ql[1] - pl[1] * ql[0]);
        }
        let mut s = 0.0;
        for (k, &(mu, nu)) in UPPER_INDEX.iter().enumerate() {
            s += self.upper[k] * (pl[mu] * ql[nu] - pl[nu] * ql[mu]);
        }
        s
    }

    /// The vector `(θq)^μ = θ^{μν} q_ν`.
    pub fn apply(&self, q: &MinkowskiVector) -> MinkowskiVector {
        let ql = q.lower();
        let mut c = [0.0; 4];
        for (mu, cm) in c.iter_mut().enumerate().take(self.dim) {
            *cm = (0..self.dim).map(|nu| self.get(mu, nu) * ql[nu]).sum();
        }
        MinkowskiVector { dim: self.dim, c }
    }
}

#[derive(Serialize, Deserialize)]
struct ThetaEntry {
    mu: usize,
    nu: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct ThetaJson {
    dim: usize,
    entries: Vec<ThetaEntry>,
}

impl Serialize for ThetaMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ThetaJson {
            dim: self.dim,
            entries: self.entries().into_iter().map(|(mu, nu, value)| ThetaEntry { mu, nu, value }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ThetaJson::deserialize(d)?;
        let e: Vec<_> = j.entries.iter().map(|e| (e.mu, e.nu, e.value)).collect();
        ThetaMatrix::from_entries(j.dim, &e).map_err(serde::de::Error::custom)
    }
}

/// A proper orthochronous Lorentz transformation acting on contravariant
/// components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform {
    dim: usize,
    m: [[f64; 4]; 4],
}

impl LorentzTransform {
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Ok(Self { dim, m })
    }

    /// Boost with rapidity `chi` along spatial `axis` (1-based).
    pub fn boost(dim: usize, axis: usize, chi: f64) -> Result<Self> {
        let mut t = Self::identity(dim)?;
        if axis == 0 || axis >= dim {
            return Err(Error::InvalidParameter(format!("boost axis {axis} out of range")));
        }
        let (c, s) = (chi.cosh(), chi.sinh());
        t.m[0][0] = c;
        t.m[axis][axis] = c;
        t.m[0][axis] = s;
        t.m[axis][0] = s;
        Ok(t)
    }

    /// Rotation by `angle` in the spatial `(i, j)` plane.
    pub fn rotation(dim: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        let mut t = Self::identity(dim)?;
        if i == 0 || j == 0 || i >= dim || j >= dim || i == j {
            return Err(Error::InvalidParameter(format!("rotation plane ({i}, {j}) invalid")));
        }
        let (c, s) = (angle.cos(), angle.sin());
        t.m[i][i] = c;
        t.m[j][j] = c;
        t.m[i][j] = -s;
        t.m[j][i] = s;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.m[r][c]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate().take(self.dim) {
            for (c, v) in row.iter_mut().enumerate().take(self.dim) {
                *v = (0..self.dim).map(|k| self.m[r][k] * other.m[k][c]).sum();
            }
        }
        Self { dim: self.dim, m }
    }

    /// `Λ⁻¹ = η Λᵀ η`.
    pub fn inverse(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate().take(self.dim) {
            for (c, v) in row.iter_mut().enumerate().take(self.dim) {
                *v = metric(r) * self.m[c][r] * metric(c);
            }
        }
        Self { dim: self.dim, m }
    }

    pub fn apply(&self, x: &MinkowskiVector) -> MinkowskiVector {
        let mut c = [0.0; 4];
        for (r, v) in c.iter_mut().enumerate().take(self.dim) {
            *v = (0..self.dim).map(|k| self.m[r][k] * x.c[k]).sum();
        }
        MinkowskiVector { dim: self.dim, c }
    }

    /// Largest entry of `ΛᵀηΛ − η`.
    pub fn metric_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let v: f64 = (0..self.dim).map(|k| self.m[k][a] * metric(k) * self.m[k][b]).sum();
                let target = if a == b { metric(a) } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] = self.m[r][c];
            }
        }
        a.determinant()
    }

    pub fn is_proper_orthochronous(&self, tol: f64) -> bool {
        self.metric_defect() < tol && (self.determinant() - 1.0).abs() < tol && self.m[0][0] >= 1.0 - tol
    }
}

/// `θ ↦ ΛθΛᵀ`, re-antisymmetrised after the floating-point product.
pub fn transform_theta(lambda: &LorentzTransform, theta: &ThetaMatrix) -> Result<ThetaMatrix> {
    if lambda.dim != theta.dim {
        return Err(Error::DimensionMismatch(lambda.dim, theta.dim));
    }
    let n = theta.dim;
    let mut full = [[0.0; 4]; 4];
    for (a, row) in full.iter_mut().enumerate().take(n) {
        for (b, v) in row.iter_mut().enumerate().take(n) {
            let mut s = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    s += lambda.m[a][mu] * theta.get(mu, nu) * lambda.m[b][nu];
                }
            }
            *v = s;
        }
    }
    let mut out = ThetaMatrix::zero(n)?;
    for mu in 0..n {
        for nu in (mu + 1)..n {
            out.upper[upper_slot(n, mu, nu)] = 0.5 * (full[mu][nu] - full[nu][mu]);
        }
    }
    Ok(out)
}

/// The image `sign · Λ W₁` of the right wedge `W₁ = {x¹ > |x⁰|}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wedge {
    boost: LorentzTransform,
    orientation: i8,
}

impl Wedge {
    pub fn reference(dim: usize) -> Result<Self> {
        Ok(Self { boost: LorentzTransform::identity(dim)?, orientation: 1 })
    }

    pub fn boosted(boost: LorentzTransform) -> Self {
        Self { boost, orientation: 1 }
    }

    pub fn opposite(&self) -> Self {
        Self { boost: self.boost, orientation: -self.orientation }
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn boost(&self) -> &LorentzTransform {
        &self.boost
    }

    /// Strict membership: `Λ⁻¹(sign·x)` satisfies `x¹ > |x⁰|`.
    pub fn contains(&self, x: &MinkowskiVector) -> bool {
        let y = self.boost.inverse().apply(&x.scale(self.orientation as f64));
        y.c[1] > y.c[0].abs()
    }

    /// The two covectors `ℓ` with `x ∈ W ⇔ ℓ·x > 0` (Euclidean pairing).
    pub fn half_space_normals(&self) -> [[f64; 4]; 2] {
        let inv = self.boost.inverse();
        let s = self.orientation as f64;
        let mut minus = [0.0; 4];
        let mut plus = [0.0; 4];
        for k in 0..self.boost.dim {
            minus[k] = s * (inv.m[1][k] - inv.m[0][k]);
            plus[k] = s * (inv.m[1][k] + inv.m[0][k]);
        }
        [minus, plus]
    }

    /// Whether the closed Euclidean ball `|x − center| ≤ radius` lies in the
    /// (open) wedge.
    pub fn contains_ball(&self, center: &MinkowskiVector, radius: f64) -> bool {
        self.half_space_normals().iter().all(|l| {
            let dot: f64 = (0..center.dim).map(|k| l[k] * center.c[k]).sum();
            let norm: f64 = l.iter().map(|v| v * v).sum::<f64>().sqrt();
            dot > radius * norm
        })
    }
}

/// A point `θ = Λθ₁Λᵀ` of the orbit of a reference matrix together with its
/// wedge `W_θ = ΛW₁`.
#[derive(Clone, Copy, Debug)]
pub struct ThetaOrbitPoint {
    pub theta: ThetaMatrix,
    pub wedge: Wedge,
}

impl ThetaOrbitPoint {
    pub fn new(reference: ThetaMatrix, lambda: LorentzTransform) -> Result<Self> {
        Ok(Self { theta: transform_theta(&lambda, &reference)?, wedge: Wedge::boosted(lambda) })
    }

    /// `(−θ, −W_θ)`, which lies on the same orbit.
    pub fn negated(&self) -> Self {
        Self { theta: self.theta.scale(-1.0), wedge: self.wedge.opposite() }
    }
}

/// Uniform sample from the open cone `{v : ±v⁰ > |**v**|}` with `|v⁰| ≤ scale`.
fn sample_timelike<R: Rng>(rng: &mut R, dim: usize, future: bool, scale: f64) -> MinkowskiVector {
    loop {
        let t: f64 = rng.random_range(1e-6..1.0) * scale;
        let mut c = [0.0; 4];
        c[0] = if future { t } else { -t };
        let mut r2 = 0.0;
        for v in c.iter_mut().take(dim).skip(1) {
            *v = rng.random_range(-1.0..1.0) * t;
            r2 += *v * *v;
        }
        if r2.sqrt() < t * (1.0 - 1e-9) {
            return MinkowskiVector { dim, c };
        }
    }
}

/// Samples `v` in the open cones `V⁻` and `V⁺` and confirms `½θv ∈ W_θ`
/// and `½θV⁺ ⊂ −W_θ` respectively. Returns the first violation as an error.
pub fn half_theta_cone_check(orbit: &ThetaOrbitPoint, n_samples: usize, seed: u64) -> Result<bool> {
    let dim = orbit.theta.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opposite = orbit.wedge.opposite();
    for index in 0..n_samples {
        let future = index % 2 == 1;
        let v = sample_timelike(&mut rng, dim, future, 10.0);
        let image = orbit.theta.apply(&v).scale(0.5);
        let ok = if future { opposite.contains(&image) } else { orbit.wedge.contains(&image) };
        if !ok {
            return Err(Error::ConeViolation {
                index,
                detail: format!("v = {:?}, θv/2 = {:?}", v.components(), image.components()),
            });
        }
    }
    Ok(true)
}

/// A closed cone given by a membership predicate plus rays sampling its
/// boundary.
pub trait Cone: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    fn boundary_rays(&self, n: usize) -> Vec<Vec<f64>>;
}

/// Closed double light cone `{x : (x⁰)² ≥ |**x**|²}` in `d = 2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LightCone2;

impl Cone for LightCone2 {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, x: &[f64]) -> bool {
        x[0].abs() >= x[1].abs()
    }
    fn boundary_rays(&self, _n: usize) -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]
    }
}

/// Closed spacelike cone `{x : |x⁰| ≤ s|x¹|}` in `d = 2` with aperture `s < 1`.
#[derive(Clone, Copy, Debug)]
pub struct SpacelikeCone2 {
    pub aperture: f64,
}

impl Cone for SpacelikeCone2 {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, x: &[f64]) -> bool {
        x[0].abs() <= self.aperture * x[1].abs()
    }
    fn boundary_rays(&self, _n: usize) -> Vec<Vec<f64>> {
        let s = self.aperture;
        vec![vec![s, 1.0], vec![-s, 1.0], vec![s, -1.0], vec![-s, -1.0]]
    }
}

/// The half-line `{t·u : t ≥ 0}`.
#[derive(Clone, Debug)]
pub struct HalfLine {
    pub direction: Vec<f64>,
}

impl Cone for HalfLine {
    fn dim(&self) -> usize {
        self.direction.len()
    }
    fn contains(&self, x: &[f64]) -> bool {
        let n2: f64 = self.direction.iter().map(|v| v * v).sum();
        let t: f64 = x.iter().zip(&self.direction).map(|(a, b)| a * b).sum::<f64>() / n2;
        t >= 0.0 && x.iter().zip(&self.direction).all(|(a, b)| (a - t * b).abs() <= 1e-14 * (1.0 + a.abs()))
    }
    fn boundary_rays(&self, _n: usize) -> Vec<Vec<f64>> {
        vec![self.direction.clone()]
    }
}

/// `|x|_ρ = (Σ|x_j|^ρ)^{1/ρ}`.
pub fn rho_norm(x: &[f64], rho: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(rho)).sum::<f64>().powf(1.0 / rho)
}

fn distance_to_ray(x: &[f64], ray: &[f64], rho: f64) -> f64 {
    let f = |t: f64| {
        let d: Vec<f64> = x.iter().zip(ray).map(|(a, b)| a - t * b).collect();
        rho_norm(&d, rho)
    };
    let scale = rho_norm(x, rho) / rho_norm(ray, rho).max(1e-300);
    let (_, v) = crate::numerics::golden_min(f, 0.0, 4.0 * scale + 1.0, 1e-12);
    v.min(f(0.0))
}

/// `d_{G,V} = min_{x ∈ G, |x|_ρ = 1} inf_{ξ ∈ V} |x − ξ|_ρ`, with `G` given by
/// sample directions (normalised here) and the inner infimum taken over
/// the boundary rays of `V`.
pub fn angular_distance(g_samples: &[Vec<f64>], v: &dyn Cone, rho: f64, n_boundary: usize) -> Result<f64> {
    if g_samples.is_empty() {
        return Err(Error::InvalidParameter("empty cone sample set".into()));
    }
    let rays = v.boundary_rays(n_boundary);
    let mut best = f64::INFINITY;
    for x in g_samples {
        if x.len() != v.dim() {
            return Err(Error::DimensionMismatch(x.len(), v.dim()));
        }
        let n = rho_norm(x, rho);
        if n == 0.0 {
            continue;
        }
        let u: Vec<f64> = x.iter().map(|c| c / n).collect();
        let d = if v.contains(&u) {
            0.0
        } else {
            rays.iter().map(|r| distance_to_ray(&u, r, rho)).fold(f64::INFINITY, f64::min)
        };
        best = best.min(d);
    }
    Ok(best)
}

/// Unit-ρ-norm samples of the boundary and interior of a `d = 2` spacelike cone.
pub fn spacelike_cone_samples(aperture: f64, n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .flat_map(|i| {
            let t = aperture * (2.0 * i as f64 / n as f64 - 1.0);
            [vec![t, 1.0], vec![t, -1.0]]
        })
        .collect()
}

/// Draws a uniformly distributed point of `W` (or `−W`) inside a box.
pub fn sample_wedge_point<R: Rng>(rng: &mut R, wedge: &Wedge, extent: f64) -> MinkowskiVector {
    let dim = wedge.boost.dim;
    loop {
        let mut c = [0.0; 4];
        for v in c.iter_mut().take(dim) {
            *v = rng.random_range(-extent..extent);
        }
        let x = MinkowskiVector { dim, c };
        if wedge.contains(&x) {
            return x;
        }
    }
}
