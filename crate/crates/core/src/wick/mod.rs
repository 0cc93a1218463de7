//! Free scalar field: on-shell measure, smeared two-point function and
//! Wick-pairing evaluation of (twisted) n-point functions.

mod contract;
mod quadrature;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{translate, TestFunction};
use crate::geometry::{MinkowskiVector, ThetaMatrix};
use crate::numerics::tree_sum;
use crate::star::{twist_phase, TwistTagList};

use contract::{contract, Var};
pub use quadrature::{omega, OnShellQuadrature, QuadratureRule, QuadratureSpec};
use quadrature::{envelope_range, line_rule, Level};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Relative tail level beyond which a fixed cutoff is reported as too small.
const TAIL_LIMIT: f64 = 1e-8;

/// Free scalar field of mass `mass > 0` in `dim` spacetime dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeField {
    pub mass: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

impl FreeField {
    pub fn new(mass: f64, dim: usize) -> Result<Self> {
        Self { mass, dim }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if self.dim != 2 && self.dim != 4 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        Ok(self)
    }

    /// Mass gap of the spectrum.
    pub fn gap(&self) -> f64 {
        self.mass
    }

    /// `⟨Ω, φ(f)φ(g)Ω⟩` with a self-convergence error.
    pub fn two_point(&self, f: &TestFunction, g: &TestFunction, spec: &QuadratureSpec) -> Result<Estimate> {
        let e = self.npoint(&[f.clone(), g.clone()], None, spec)?;
        Ok(Estimate { value: e.value, eps_quad: e.eps_quad })
    }

    /// Sum over Wick pairings of the (optionally twisted) n-point function.
    pub fn npoint(&self, fs: &[TestFunction], tags: Option<&TwistTagList>, spec: &QuadratureSpec) -> Result<NpointEstimate> {
        self.check_slots(fs, tags)?;
        // on the two-point shell p₂ = −p₁ and every twist is trivial
        let twist = match tags {
            Some(t) if fs.len() > 2 => Some(SlotTwist::from_tags(t)?),
            _ => None,
        };
        self.npoint_twisted(fs, twist.as_ref(), spec)
    }

    /// As [`FreeField::npoint`] with a general slot twist.
    pub fn npoint_twisted(&self, fs: &[TestFunction], twist: Option<&SlotTwist>, spec: &QuadratureSpec) -> Result<NpointEstimate> {
        spec.validate()?;
        let n = fs.len();
        self.check_slots(fs, None)?;
        if let Some(t) = twist {
            if t.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: t.len() });
            }
        }
        if n % 2 == 1 {
            return Ok(NpointEstimate { value: ZERO, eps_quad: 0.0, pairings: Vec::new() });
        }
        if self.dim == 4 {
            let coarse = self.cube_two_point(&fs[0], &fs[1], spec, Level::COARSE)?;
            let fine = self.cube_two_point(&fs[0], &fs[1], spec, Level::refined(spec))?;
            let eps = (fine - coarse).norm();
            let pairing = WickPairing { pairs: vec![(0, 1)] };
            return Ok(NpointEstimate { value: fine, eps_quad: eps, pairings: vec![PairingValue { pairing, value: fine, eps_quad: eps }] });
        }
        let planner = Planner::new(*self, fs, spec);
        let pairings = enumerate_pairings(n);
        let mut out = Vec::with_capacity(pairings.len());
        for pairing in pairings {
            let couplings = match twist {
                Some(t) => t.couplings(&pairing)?,
                None => Vec::new(),
            };
            let coarse = planner.evaluate(&pairing, &couplings, Level::COARSE)?;
            let fine = planner.evaluate(&pairing, &couplings, Level::refined(spec))?;
            out.push(PairingValue { pairing, value: fine, eps_quad: (fine - coarse).norm() });
        }
        let value = out.iter().fold(ZERO, |acc, p| acc + p.value);
        let eps_quad = out.iter().map(|p| p.eps_quad).sum();
        Ok(NpointEstimate { value, eps_quad, pairings: out })
    }

    fn check_slots(&self, fs: &[TestFunction], tags: Option<&TwistTagList>) -> Result<()> {
        let n = fs.len();
        if n > 8 {
            return Err(Error::InfeasibleSlots(n));
        }
        if let Some(f) = fs.iter().find(|f| f.dim() != self.dim) {
            return Err(Error::DimensionMismatch(self.dim, f.dim()));
        }
        if let Some(t) = tags {
            if t.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: t.len() });
            }
            if t.dim() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, t.dim()));
            }
        }
        if self.dim == 4 && n > 2 {
            return Err(Error::InvalidParameter("d = 4 supports two-point functions only".into()));
        }
        Ok(())
    }

    fn cube_two_point(&self, f: &TestFunction, g: &TestFunction, spec: &QuadratureSpec, level: Level) -> Result<Complex64> {
        let m = self.mass;
        let cutoff = match spec.cutoff {
            Some(k) => {
                check_tail(f, g, m, k)?;
                k
            }
            None => cube_reach(f, g, m, spec.tail_tol)?,
        } * level.cutoff;
        let freq = center_frequency(f, g) + bump_frequency(f) + bump_frequency(g);
        let width = panel_width(spec, &[f, g], freq, level);
        let panels = ((2.0 * cutoff) / width).ceil().max(1.0) as usize;
        let per_axis = panels * spec.nodes_per_panel;
        if per_axis > spec.max_nodes_per_dim || (per_axis as f64).powi(3) > (1u64 << 27) as f64 {
            return Err(Error::UnderResolved(format!("cube quadrature needs {per_axis} nodes per axis")));
        }
        let (x, w) = line_rule(spec.rule, -cutoff, cutoff, panels, spec.nodes_per_panel);
        let norm = TWO_PI.powi(3);
        let slabs: Vec<Complex64> = (0..x.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = ZERO;
                for j in 0..x.len() {
                    for l in 0..x.len() {
                        let k = [x[i], x[j], x[l]];
                        let o = omega(&k, m);
                        let plus = [o, k[0], k[1], k[2]];
                        let minus = [-o, -k[0], -k[1], -k[2]];
                        acc += w[i] * w[j] * w[l] / (norm * 2.0 * o) * f.fourier(&minus) * g.fourier(&plus);
                    }
                }
                acc
            })
            .collect();
        Ok(tree_sum(&slabs))
    }
}

/// A value together with its self-convergence defect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: Complex64,
    pub eps_quad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingValue {
    pub pairing: WickPairing,
    pub value: Complex64,
    pub eps_quad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NpointEstimate {
    pub value: Complex64,
    pub eps_quad: f64,
    pub pairings: Vec<PairingValue>,
}

impl NpointEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, eps_quad: self.eps_quad }
    }
}

/// Perfect matching of slots `0..n`, pairs `(i, j)` with `i < j` sorted by `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WickPairing {
    pub pairs: Vec<(usize, usize)>,
}

impl WickPairing {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = 2 * pairs.len();
        let mut seen = vec![false; n];
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for s in [p.0, p.1] {
                if s >= n || seen[s] {
                    return Err(Error::InvalidParameter(format!("slot {s} repeated or out of range")));
                }
                seen[s] = true;
            }
        }
        pairs.sort();
        Ok(Self { pairs })
    }

    pub fn slots(&self) -> usize {
        2 * self.pairs.len()
    }

    /// `(pair index, σ)` at each slot, `σ = −1` on the earlier slot.
    pub fn slot_roles(&self) -> Vec<(usize, f64)> {
        let mut roles = vec![(0, 0.0); self.slots()];
        for (a, &(i, j)) in self.pairs.iter().enumerate() {
            roles[i] = (a, -1.0);
            roles[j] = (a, 1.0);
        }
        roles
    }

    /// Slot momenta `p_i = −k₊, p_j = +k₊` for on-shell pair momenta `ks`.
    pub fn slot_momenta(&self, ks: &[MinkowskiVector]) -> Vec<MinkowskiVector> {
        self.slot_roles().iter().map(|&(a, s)| ks[a].scale(s)).collect()
    }
}

/// All `(n−1)!!` pairings of `n` slots in lexicographic order; empty for odd `n`.
pub fn enumerate_pairings(n: usize) -> Vec<WickPairing> {
    fn rec(free: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<WickPairing>) {
        if free.is_empty() {
            out.push(WickPairing { pairs: acc.clone() });
            return;
        }
        let i = free[0];
        for t in 1..free.len() {
            let rest: Vec<usize> = free[1..].iter().cloned().filter(|&s| s != free[t]).collect();
            acc.push((i, free[t]));
            rec(&rest, acc, out);
            acc.pop();
        }
    }
    if n % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out
}

/// Two-dimensional twist between slots: the phase is
/// `exp(−(i/2) Σ_{j<l} t_jl (p_j¹ p_l⁰ − p_j⁰ p_l¹))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotTwist {
    n: usize,
    coeff: Vec<f64>,
}

impl SlotTwist {
    /// The twist of a tag list: `t_jl = θ_j(e₁, e₀)` for every `l > j`.
    pub fn from_tags(tags: &TwistTagList) -> Result<Self> {
        if tags.dim() != 2 {
            return Err(Error::UnsupportedDimension(tags.dim()));
        }
        let n = tags.len();
        let mut coeff = vec![0.0; n * n];
        for (j, t) in tags.tags().iter().enumerate() {
            let u = unit_coefficient(t);
            for l in j + 1..n {
                coeff[j * n + l] = u;
            }
        }
        Ok(Self { n, coeff })
    }

    /// A single twist by `theta` between slots `0..k` and `k..n`.
    pub fn between_blocks(n: usize, k: usize, theta: &ThetaMatrix) -> Result<Self> {
        if theta.dim() != 2 {
            return Err(Error::UnsupportedDimension(theta.dim()));
        }
        if k > n {
            return Err(Error::InvalidParameter(format!("block split {k} beyond {n} slots")));
        }
        let u = unit_coefficient(theta);
        let mut coeff = vec![0.0; n * n];
        for j in 0..k {
            for l in k..n {
                coeff[j * n + l] = u;
            }
        }
        Ok(Self { n, coeff })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.coeff.iter().all(|c| *c == 0.0)
    }

    /// Exponent `Σ_{j<l} t_jl (p_j¹ p_l⁰ − p_j⁰ p_l¹)` at arbitrary slot momenta.
    pub fn exponent(&self, momenta: &[MinkowskiVector]) -> Result<f64> {
        if momenta.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: momenta.len() });
        }
        let mut e = 0.0;
        for j in 0..self.n {
            for l in j + 1..self.n {
                let (p, q) = (&momenta[j], &momenta[l]);
                e += self.coeff[j * self.n + l] * (p.get(1) * q.get(0) - p.get(0) * q.get(1));
            }
        }
        Ok(e)
    }

    /// Pair couplings `(a, b, c_ab)`, `a < b`, such that on the pairing's shell
    /// the phase equals `Π exp(−(i/2) c_ab (k_a ω_b − ω_a k_b))`.
    pub fn couplings(&self, pairing: &WickPairing) -> Result<Vec<(usize, usize, f64)>> {
        let n = pairing.slots();
        if self.n != n {
            return Err(Error::LengthMismatch { expected: n, got: self.n });
        }
        let np = pairing.pairs.len();
        let roles = pairing.slot_roles();
        let mut c = vec![vec![0.0; np]; np];
        for j in 0..n {
            for l in j + 1..n {
                let (a, sa) = roles[j];
                let (b, sb) = roles[l];
                if a == b {
                    continue;
                }
                let v = sa * sb * self.coeff[j * n + l];
                if a < b {
                    c[a][b] += v;
                } else {
                    c[b][a] -= v;
                }
            }
        }
        let mut out = Vec::new();
        for a in 0..np {
            for b in a + 1..np {
                if c[a][b] != 0.0 {
                    out.push((a, b, c[a][b]));
                }
            }
        }
        Ok(out)
    }
}

fn unit_coefficient(theta: &ThetaMatrix) -> f64 {
    theta.bilinear(&MinkowskiVector::d2(0.0, 1.0), &MinkowskiVector::d2(1.0, 0.0))
}

/// Couplings of a tag list on a pairing; see [`SlotTwist::couplings`].
pub fn pairing_couplings(pairing: &WickPairing, tags: &TwistTagList) -> Result<Vec<(usize, usize, f64)>> {
    if tags.len() != pairing.slots() {
        return Err(Error::LengthMismatch { expected: pairing.slots(), got: tags.len() });
    }
    if pairing.pairs.len() < 2 {
        return Ok(Vec::new());
    }
    SlotTwist::from_tags(tags)?.couplings(pairing)
}

/// Integrand of one pairing at spatial pair momenta `ks` (two dimensions),
/// without the measure.
pub fn pairing_integrand(
    pairing: &WickPairing,
    fs: &[TestFunction],
    tags: Option<&TwistTagList>,
    ks: &[f64],
    mass: f64,
) -> Result<Complex64> {
    let on_shell: Vec<MinkowskiVector> = ks.iter().map(|&k| MinkowskiVector::d2(omega(&[k], mass), k)).collect();
    let momenta = pairing.slot_momenta(&on_shell);
    let mut v = Complex64::new(1.0, 0.0);
    for (f, p) in fs.iter().zip(&momenta) {
        v *= f.fourier_at(p);
    }
    if let Some(t) = tags {
        v *= twist_phase(t, &momenta)?;
    }
    Ok(v)
}

/// `Σ_k w_k f̂(−k₊) ĝ(k₊)` on a fixed rule.
pub fn two_point_smeared(f: &TestFunction, g: &TestFunction, quad: &OnShellQuadrature) -> Result<Complex64> {
    for h in [f, g] {
        if h.dim() != quad.dim {
            return Err(Error::DimensionMismatch(quad.dim, h.dim()));
        }
    }
    check_tail(f, g, quad.mass, quad.cutoff())?;
    let terms: Vec<Complex64> = (0..quad.len())
        .into_par_iter()
        .map(|i| {
            let plus = quad.on_shell(i);
            let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
            quad.weights[i] * f.fourier(&minus) * g.fourier(&plus)
        })
        .collect();
    Ok(tree_sum(&terms))
}

/// Pairing sum on a fixed rule used for every pair variable.
pub fn npoint_smeared(fs: &[TestFunction], quad: &OnShellQuadrature, tags: Option<&TwistTagList>) -> Result<Complex64> {
    let field = FreeField::new(quad.mass, quad.dim)?;
    field.check_slots(fs, tags)?;
    let n = fs.len();
    if n % 2 == 1 {
        return Ok(ZERO);
    }
    if n == 2 {
        return two_point_smeared(&fs[0], &fs[1], quad);
    }
    for i in 0..n {
        for j in i + 1..n {
            check_tail(&fs[i], &fs[j], quad.mass, quad.cutoff())?;
        }
    }
    let k: Vec<f64> = quad.nodes.iter().map(|k| k[0]).collect();
    let mut total = ZERO;
    for pairing in enumerate_pairings(n) {
        let vars = pairing
            .pairs
            .iter()
            .map(|&(i, j)| {
                let w = (0..quad.len())
                    .into_par_iter()
                    .map(|t| {
                        let plus = quad.on_shell(t);
                        let minus = [-plus[0], -plus[1]];
                        quad.weights[t] * fs[i].fourier(&minus) * fs[j].fourier(&plus)
                    })
                    .collect();
                Var { k: k.clone(), omega: quad.omega.clone(), w }
            })
            .collect();
        let couplings = match tags {
            Some(t) => pairing_couplings(&pairing, t)?,
            None => Vec::new(),
        };
        total += contract(vars, &couplings)?;
    }
    Ok(total)
}

/// `G_ij = ⟨Ω, φ(f̄_i) φ(f_j) Ω⟩`.
pub fn gram_matrix(field: &FreeField, fs: &[TestFunction], spec: &QuadratureSpec) -> Result<DMatrix<Complex64>> {
    let n = fs.len();
    let mut g = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        let fi = fs[i].conj();
        for j in 0..n {
            g[(i, j)] = field.two_point(&fi, &fs[j], spec)?.value;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of the Hermitian part of `g`.
pub fn min_hermitian_eigenvalue(g: &DMatrix<Complex64>) -> f64 {
    let n = g.nrows();
    let h = (g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            real[(i, j)] = z.re;
            real[(i + n, j + n)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
        }
    }
    real.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Crossed-pairing part of a four-point function with the second pair translated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectEstimate {
    /// Sum of the crossed pairings.
    pub value: Complex64,
    pub eps_quad: f64,
    pub full: Complex64,
    pub product: Complex64,
}

/// `w(f₁, f₂, g₁', g₂') − w(f₁, f₂) w(g₁', g₂')` with `g' = g(· − λa)`.
pub fn connected_four_point_defect(
    field: &FreeField,
    f: &[TestFunction; 2],
    g: &[TestFunction; 2],
    a: &MinkowskiVector,
    lambda: f64,
    tags: Option<&TwistTagList>,
    spec: &QuadratureSpec,
) -> Result<DefectEstimate> {
    if !(a.square() < 0.0) {
        return Err(Error::InvalidParameter("translation must be spacelike".into()));
    }
    let fs = vec![
        f[0].clone(),
        f[1].clone(),
        translate(&g[0], a.components(), lambda),
        translate(&g[1], a.components(), lambda),
    ];
    let full = field.npoint(&fs, tags, spec)?;
    let w_f = field.two_point(&fs[0], &fs[1], spec)?;
    let w_g = field.two_point(&fs[2], &fs[3], spec)?;
    let crossed: Vec<&PairingValue> = full.pairings.iter().filter(|p| p.pairing.pairs != vec![(0, 1), (2, 3)]).collect();
    Ok(DefectEstimate {
        value: crossed.iter().fold(ZERO, |acc, p| acc + p.value),
        eps_quad: crossed.iter().map(|p| p.eps_quad).sum(),
        full: full.value,
        product: w_f.value * w_g.value,
    })
}

fn check_tail(f: &TestFunction, g: &TestFunction, m: f64, cutoff: f64) -> Result<()> {
    let reach = if f.dim() == 2 {
        let (lo, hi, _) = envelope_range(f, g, m, &[1.0], TAIL_LIMIT)?;
        lo.abs().max(hi.abs())
    } else {
        cube_reach(f, g, m, TAIL_LIMIT)?
    };
    if reach > cutoff {
        return Err(Error::CutoffTooSmall(reach / cutoff));
    }
    Ok(())
}

fn cube_reach(f: &TestFunction, g: &TestFunction, m: f64, tol: f64) -> Result<f64> {
    let s = 1.0 / 3f64.sqrt();
    let dirs = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [s, s, s],
        [s, -s, s],
        [s, s, -s],
        [-s, s, s],
    ];
    let mut reach = 0.0f64;
    for d in &dirs {
        let (lo, hi, _) = envelope_range(f, g, m, d, tol)?;
        reach = reach.max(lo.abs()).max(hi.abs());
    }
    Ok(reach)
}

fn center_frequency(f: &TestFunction, g: &TestFunction) -> f64 {
    f.center().iter().zip(g.center()).map(|(a, b)| (a - b).abs()).sum()
}

fn bump_frequency(f: &TestFunction) -> f64 {
    f.support_radius().map_or(0.0, |r| r * std::f64::consts::SQRT_2)
}

fn panel_width(spec: &QuadratureSpec, fs: &[&TestFunction], freq: f64, level: Level) -> f64 {
    let scale = fs.iter().map(|f| f.spatial_scale()).fold(0.0, f64::max);
    let mut w = spec.max_panel_width.min(1.0 / scale);
    if freq > 0.0 {
        w = w.min(spec.nodes_per_panel as f64 * 0.6 / freq);
    }
    w / (spec.resolution_scale * level.panels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct VarKey {
    i: usize,
    j: usize,
    panels: usize,
    lo: u64,
    hi: u64,
}

/// Adaptive pair variables for one slot list.
struct Planner<'a> {
    field: FreeField,
    fs: &'a [TestFunction],
    spec: &'a QuadratureSpec,
    ranges: Mutex<HashMap<(usize, usize), (f64, f64, f64)>>,
    vars: Mutex<HashMap<VarKey, Arc<Var>>>,
}

impl<'a> Planner<'a> {
    fn new(field: FreeField, fs: &'a [TestFunction], spec: &'a QuadratureSpec) -> Self {
        Self { field, fs, spec, ranges: Mutex::new(HashMap::new()), vars: Mutex::new(HashMap::new()) }
    }

    fn range(&self, i: usize, j: usize) -> Result<(f64, f64, f64)> {
        if let Some(r) = self.ranges.lock().expect("range cache").get(&(i, j)) {
            return Ok(*r);
        }
        let (f, g, m) = (&self.fs[i], &self.fs[j], self.field.mass);
        let r = match self.spec.cutoff {
            Some(k) => {
                check_tail(f, g, m, k)?;
                (-k, k, 0.0)
            }
            None => envelope_range(f, g, m, &[1.0], self.spec.tail_tol)?,
        };
        self.ranges.lock().expect("range cache").insert((i, j), r);
        Ok(r)
    }

    fn evaluate(&self, pairing: &WickPairing, couplings: &[(usize, usize, f64)], level: Level) -> Result<Complex64> {
        let np = pairing.pairs.len();
        let mut bounds = Vec::with_capacity(np);
        for &(i, j) in &pairing.pairs {
            let (lo, hi, peak) = self.range(i, j)?;
            bounds.push((peak - level.cutoff * (peak - lo), peak + level.cutoff * (hi - peak)));
        }
        let reach: Vec<f64> = bounds.iter().map(|(lo, hi)| lo.abs().max(hi.abs())).collect();
        let m = self.field.mass;
        let mut vars = Vec::with_capacity(np);
        for (a, &(i, j)) in pairing.pairs.iter().enumerate() {
            let (f, g) = (&self.fs[i], &self.fs[j]);
            let mut freq = center_frequency(f, g) + bump_frequency(f) + bump_frequency(g);
            for &(x, y, c) in couplings {
                let b = if x == a {
                    y
                } else if y == a {
                    x
                } else {
                    continue;
                };
                freq += 0.5 * c.abs() * (2.0 * reach[b] + m);
            }
            let (lo, hi) = bounds[a];
            let width = panel_width(self.spec, &[f, g], freq, level);
            let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
            let nodes = panels * self.spec.nodes_per_panel;
            if nodes > self.spec.max_nodes_per_dim {
                return Err(Error::UnderResolved(format!(
                    "pair ({i}, {j}) needs {nodes} nodes, limit {}",
                    self.spec.max_nodes_per_dim
                )));
            }
            vars.push(self.var(VarKey { i, j, panels, lo: lo.to_bits(), hi: hi.to_bits() })?);
        }
        contract(vars.iter().map(|v| (**v).clone()).collect(), couplings)
    }

    fn var(&self, key: VarKey) -> Result<Arc<Var>> {
        if let Some(v) = self.vars.lock().expect("var cache").get(&key) {
            return Ok(v.clone());
        }
        let (f, g, m) = (&self.fs[key.i], &self.fs[key.j], self.field.mass);
        let (lo, hi) = (f64::from_bits(key.lo), f64::from_bits(key.hi));
        let (k, wq) = line_rule(self.spec.rule, lo, hi, key.panels, self.spec.nodes_per_panel);
        let om: Vec<f64> = k.iter().map(|k| omega(&[*k], m)).collect();
        let w: Vec<Complex64> = (0..k.len())
            .into_par_iter()
            .map(|t| {
                let plus = [om[t], k[t]];
                let minus = [-om[t], -k[t]];
                wq[t] / (TWO_PI * 2.0 * om[t]) * f.fourier(&minus) * g.fourier(&plus)
            })
            .collect();
        let v = Arc::new(Var { k, omega: om, w });
        self.vars.lock().expect("var cache").insert(key, v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests;
