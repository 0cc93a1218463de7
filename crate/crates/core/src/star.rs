//! Twist phases, twisted tensor products on grids and the Moyal star
//! product.
//!
//! A twisted product is formed in momentum space,
//! `(f ⊗_θ g)^(p, q) = e^{−(i/2) pθQ} f̂(p) ĝ(q)` with `Q` the sum of the
//! momenta of `g`'s slots, and transformed back. Grids are only
//! materialised for small total dimension; the Wick quadratures consume the
//! phase lazily instead.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::{axis_sign, fourier_on_grid, GridFunction, TestFunction};
use crate::geometry::{MinkowskiVector, ThetaMatrix};
use crate::numerics::tree_sum;

/// One deformation matrix per slot; a zero matrix leaves its slot
/// undeformed. Only the first `n − 1` tags enter the phase.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistTagList {
    dim: usize,
    tags: Vec<ThetaMatrix>,
}

impl TwistTagList {
    pub fn new(tags: Vec<ThetaMatrix>) -> Result<Self> {
        let first = tags.first().ok_or_else(|| Error::InvalidParameter("empty tag list".into()))?;
        let dim = first.dim();
        if let Some(t) = tags.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, t.dim()));
        }
        Ok(Self { dim, tags })
    }

    pub fn uniform(theta: ThetaMatrix, n: usize) -> Result<Self> {
        Self::new(vec![theta; n])
    }

    pub fn undeformed(dim: usize, n: usize) -> Result<Self> {
        Self::uniform(ThetaMatrix::zero(dim)?, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[ThetaMatrix] {
        &self.tags
    }

    pub fn is_undeformed(&self) -> bool {
        self.tags.iter().all(|t| t.is_zero())
    }
}

/// `Σ_{j<n} p_j θ_j (Σ_{k>j} p_k)`, the real exponent of the twist phase.
pub fn twist_exponent(tags: &TwistTagList, momenta: &[MinkowskiVector]) -> Result<f64> {
    if momenta.len() != tags.len() {
        return Err(Error::LengthMismatch { expected: tags.len(), got: momenta.len() });
    }
    if let Some(p) = momenta.iter().find(|p| p.dim() != tags.dim()) {
        return Err(Error::DimensionMismatch(tags.dim(), p.dim()));
    }
    let n = momenta.len();
    let mut tail = momenta[n - 1];
    let mut e = 0.0;
    for j in (0..n - 1).rev() {
        e += tags.tags[j].bilinear(&momenta[j], &tail);
        tail = tail + momenta[j];
    }
    Ok(e)
}

/// `Π_{j<n} exp(−(i/2) p_j θ_j Σ_{k>j} p_k)`.
pub fn twist_phase(tags: &TwistTagList, momenta: &[MinkowskiVector]) -> Result<Complex64> {
    Ok(Complex64::from_polar(1.0, -0.5 * twist_exponent(tags, momenta)?))
}

fn check_theta_dim(theta: &ThetaMatrix, d: usize) -> Result<()> {
    if theta.dim() != d {
        return Err(Error::DimensionMismatch(d, theta.dim()));
    }
    Ok(())
}

/// Sum of the slot momenta of a multi-slot point.
fn slot_total(point: &[f64], d: usize) -> MinkowskiVector {
    let mut c = [0.0; 4];
    for chunk in point.chunks(d) {
        for (a, v) in c.iter_mut().zip(chunk) {
            *a += v;
        }
    }
    MinkowskiVector::new(&c[..d]).expect("validated dimension")
}

/// Twisted tensor product of two sampled functions of `d`-dimensional
/// slots, returned on the concatenated position box.
pub fn twisted_tensor(f: &GridFunction, g: &GridFunction, theta: &ThetaMatrix) -> Result<GridFunction> {
    let d = theta.dim();
    if f.dim() % d != 0 || g.dim() % d != 0 {
        return Err(Error::DimensionMismatch(d, if f.dim() % d != 0 { f.dim() } else { g.dim() }));
    }
    let lo: Vec<f64> = f.lo.iter().chain(&g.lo).cloned().collect();
    let hi: Vec<f64> = f.hi.iter().chain(&g.hi).cloned().collect();
    let counts: Vec<usize> = f.counts.iter().chain(&g.counts).cloned().collect();
    let mut out = GridFunction::zeros(&lo, &hi, &counts)?;
    let fh = f.fourier_slots(d);
    let gh = g.fourier_slots(d);
    let p_tot: Vec<MinkowskiVector> = (0..fh.len()).map(|i| slot_total(&fh.point(i), d)).collect();
    let q_tot: Vec<MinkowskiVector> = (0..gh.len()).map(|j| slot_total(&gh.point(j), d)).collect();
    let mut mom_lo = fh.lo.clone();
    mom_lo.extend_from_slice(&gh.lo);
    let mut mom_hi = fh.hi.clone();
    mom_hi.extend_from_slice(&gh.hi);
    out.lo = mom_lo;
    out.hi = mom_hi;
    let ng = gh.len();
    out.values.par_chunks_mut(ng).enumerate().for_each(|(i, row)| {
        let a = fh.values[i];
        for (j, v) in row.iter_mut().enumerate() {
            let phase = Complex64::from_polar(1.0, -0.5 * theta.bilinear(&p_tot[i], &q_tot[j]));
            *v = a * gh.values[j] * phase;
        }
    });
    Ok(out.inverse_fourier_slots(&lo, d))
}

/// A uniform box used for every slot of a materialised product.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl SlotGrid {
    pub fn cube(d: usize, half_width: f64, n: usize) -> Self {
        Self { lo: vec![-half_width; d], hi: vec![half_width; d], counts: vec![n; d] }
    }

    /// Plain samples, no resolution check.
    pub fn sample(&self, f: &TestFunction) -> Result<GridFunction> {
        GridFunction::from_fn(&self.lo, &self.hi, &self.counts, |x| f.eval(x))
    }

    /// Samples that must pass the boundary test.
    pub fn sample_resolved(&self, f: &TestFunction) -> Result<GridFunction> {
        GridFunction::sample(f, &self.lo, &self.hi, &self.counts)
    }
}

/// `f ⊗_θ g` for two single-slot test functions sampled on resolved boxes.
pub fn twisted_tensor_functions(
    f: &TestFunction,
    g: &TestFunction,
    theta: &ThetaMatrix,
    f_box: &SlotGrid,
    g_box: &SlotGrid,
) -> Result<GridFunction> {
    check_theta_dim(theta, f.dim())?;
    twisted_tensor(&f_box.sample_resolved(f)?, &g_box.sample_resolved(g)?, theta)
}

/// `max |f₁⊗_θ(f₂⊗_{−θ}g)(x₁,x₂,y) − f₂⊗_{−θ}(f₁⊗_θ g)(x₂,x₁,y)|` on a grid.
pub fn exchange_identity_check(
    f1: &TestFunction,
    f2: &TestFunction,
    g: &TestFunction,
    theta: &ThetaMatrix,
    slot: &SlotGrid,
) -> Result<f64> {
    let d = theta.dim();
    check_theta_dim(theta, f1.dim())?;
    let (s1, s2, sg) = (slot.sample(f1)?, slot.sample(f2)?, slot.sample(g)?);
    let minus = theta.scale(-1.0);
    let lhs = twisted_tensor(&s1, &twisted_tensor(&s2, &sg, &minus)?, theta)?;
    let rhs = twisted_tensor(&s2, &twisted_tensor(&s1, &sg, theta)?, &minus)?;
    let perm: Vec<usize> = (d..2 * d).chain(0..d).chain(2 * d..3 * d).collect();
    let rhs = rhs.permute_axes(&perm)?;
    Ok(max_abs_difference(&lhs, &rhs))
}

/// `max |(f⊗_θ g)⊗_θ h − f⊗_θ(g⊗_θ h)|` on a grid.
pub fn associativity_defect(
    f: &TestFunction,
    g: &TestFunction,
    h: &TestFunction,
    theta: &ThetaMatrix,
    slot: &SlotGrid,
) -> Result<f64> {
    check_theta_dim(theta, f.dim())?;
    let (sf, sg, sh) = (slot.sample(f)?, slot.sample(g)?, slot.sample(h)?);
    let left = twisted_tensor(&twisted_tensor(&sf, &sg, theta)?, &sh, theta)?;
    let right = twisted_tensor(&sf, &twisted_tensor(&sg, &sh, theta)?, theta)?;
    Ok(max_abs_difference(&left, &right))
}

pub fn max_abs_difference(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Contracts the last axis of a row-major array with `table`.
fn contract_last(values: &[Complex64], n: usize, table: &[Complex64]) -> Vec<Complex64> {
    values
        .chunks(n)
        .map(|row| row.iter().zip(table).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
        .collect()
}

/// `(f⋆g)(x)` at the given points by the direct momentum double sum
/// `(2π)^{−2d} Σ_p Σ_q f̂(p) ĝ(q) e^{−i(p+q)·x} e^{−(i/2)pθq}` over two
/// momentum grids.
pub fn star_product_at(
    fhat: &GridFunction,
    ghat: &GridFunction,
    theta: &ThetaMatrix,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    let d = theta.dim();
    if fhat.dim() != d || ghat.dim() != d {
        return Err(Error::DimensionMismatch(d, fhat.dim().max(ghat.dim())));
    }
    let cell = fhat.cell_volume() * ghat.cell_volume() / (2.0 * std::f64::consts::PI).powi(2 * d as i32);
    let q_axes: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..ghat.counts[a]).map(|k| ghat.lo[a] + k as f64 * ghat.spacing(a)).collect())
        .collect();
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        if x.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: x.len() });
        }
        let terms: Vec<Complex64> = (0..fhat.len())
            .into_par_iter()
            .map(|i| {
                let a = fhat.values[i];
                if a == Complex64::new(0.0, 0.0) {
                    return a;
                }
                let p = fhat.point(i);
                // pθq = Σ_ν u_ν q_ν with q_ν = s_ν q^ν
                let u: Vec<f64> = (0..d)
                    .map(|nu| (0..d).map(|mu| axis_sign(mu) * p[mu] * theta.get(mu, nu)).sum())
                    .collect();
                let mut acc = ghat.values.clone();
                for nu in (0..d).rev() {
                    let s = axis_sign(nu);
                    let table: Vec<Complex64> =
                        q_axes[nu].iter().map(|q| Complex64::from_polar(1.0, -s * q * (x[nu] + 0.5 * u[nu]))).collect();
                    acc = contract_last(&acc, q_axes[nu].len(), &table);
                }
                let px: f64 = (0..d).map(|mu| axis_sign(mu) * p[mu] * x[mu]).sum();
                a * Complex64::from_polar(1.0, -px) * acc[0]
            })
            .collect();
        out.push(tree_sum(&terms) * cell);
    }
    Ok(out)
}

/// `f ⋆ g` on every point of `out_box`, from resolved momentum grids of both
/// factors.
pub fn star_product(f: &TestFunction, g: &TestFunction, theta: &ThetaMatrix, sample_box: &SlotGrid, out_box: &SlotGrid) -> Result<GridFunction> {
    check_theta_dim(theta, f.dim())?;
    let fh = fourier_on_grid(f, &sample_box.lo, &sample_box.hi, &sample_box.counts)?;
    let gh = fourier_on_grid(g, &sample_box.lo, &sample_box.hi, &sample_box.counts)?;
    let mut out = GridFunction::zeros(&out_box.lo, &out_box.hi, &out_box.counts)?;
    let points: Vec<Vec<f64>> = (0..out.len()).map(|i| out.point(i)).collect();
    out.values = star_product_at(&fh, &gh, theta, &points)?;
    Ok(out)
}

/// Pointwise evaluator for `(f ⊗_θ g)(x, y) = (2π)^{−dn} Σ_q f(x + ½θQ) ĝ(q) e^{−iq·y}`,
/// with `ĝ` given on a momentum grid of `n` slots.
pub struct ShiftedTensor {
    values: Vec<Complex64>,
    d: usize,
    shifts: Vec<MinkowskiVector>,
    momenta: Vec<Vec<f64>>,
    cell: f64,
}

impl ShiftedTensor {
    pub fn new(ghat: &GridFunction, theta: &ThetaMatrix) -> Result<Self> {
        let d = theta.dim();
        if ghat.dim() % d != 0 {
            return Err(Error::DimensionMismatch(d, ghat.dim()));
        }
        // momenta where ĝ is below 1e-16 of its peak are dropped
        let cut = 1e-16 * ghat.peak();
        let keep: Vec<usize> = (0..ghat.len()).filter(|&j| ghat.values[j].norm() > cut).collect();
        let momenta: Vec<Vec<f64>> = keep.iter().map(|&j| ghat.point(j)).collect();
        let values = keep.iter().map(|&j| ghat.values[j]).collect();
        let shifts = momenta.iter().map(|q| theta.apply(&slot_total(q, d)).scale(0.5)).collect();
        let cell = ghat.cell_volume() / (2.0 * std::f64::consts::PI).powi(ghat.dim() as i32);
        Ok(Self { values, d, shifts, momenta, cell })
    }

    pub fn eval(&self, f: &TestFunction, x: &[f64], y: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut z = vec![0.0; self.d];
        for (j, g) in self.values.iter().enumerate() {
            for (mu, zm) in z.iter_mut().enumerate() {
                *zm = x[mu] + self.shifts[j].get(mu);
            }
            let v = f.eval(&z);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let qy: f64 = self.momenta[j].iter().zip(y).enumerate().map(|(a, (q, y))| axis_sign(a % self.d) * q * y).sum();
            acc += v * g * Complex64::from_polar(1.0, -qy);
        }
        acc * self.cell
    }
}

/// Bounding box of `{x : |F(x, y)| ≥ threshold · peak}` over the points of
/// `x_box`, for the evaluator above at fixed `y`.
pub fn thresholded_support(
    f: &TestFunction,
    tensor: &ShiftedTensor,
    y: &[f64],
    x_box: &SlotGrid,
    threshold: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let grid = GridFunction::zeros(&x_box.lo, &x_box.hi, &x_box.counts)?;
    let vals: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| tensor.eval(f, &grid.point(i), y).norm()).collect();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(None);
    }
    let d = grid.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for (i, v) in vals.iter().enumerate() {
        if *v >= threshold * peak {
            let x = grid.point(i);
            for a in 0..d {
                lo[a] = lo[a].min(x[a]);
                hi[a] = hi[a].max(x[a]);
            }
        }
    }
    Ok(Some((lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::GaussianPacket;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mv(c: &[f64]) -> MinkowskiVector {
        MinkowskiVector::new(c).unwrap()
    }

    fn random_vector<R: rand::Rng>(rng: &mut R, d: usize) -> MinkowskiVector {
        let c: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        mv(&c)
    }

    #[test]
    fn zero_tags_give_unit_phase() {
        let tags = TwistTagList::undeformed(2, 4).unwrap();
        let p = vec![mv(&[1.0, 2.0]), mv(&[0.3, -1.0]), mv(&[5.0, 0.1]), mv(&[-2.0, 2.0])];
        assert_eq!(twist_phase(&tags, &p).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn two_slot_phase() {
        let theta = ThetaMatrix::d2(0.7);
        let tags = TwistTagList::new(vec![theta, ThetaMatrix::zero(2).unwrap()]).unwrap();
        let (p, q) = (mv(&[1.1, -0.4]), mv(&[0.2, 2.5]));
        // p_0 q_1 − p_1 q_0 with lowered spatial components
        let pq = 0.7 * (1.1 * -2.5 - 0.4 * 0.2);
        let expected = Complex64::from_polar(1.0, -0.5 * pq);
        assert!((twist_phase(&tags, &[p, q]).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn three_slot_opposite_tags() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let theta = ThetaMatrix::reference(0.8, 1.3, 4).unwrap();
            let tags = TwistTagList::new(vec![theta, theta.scale(-1.0), ThetaMatrix::zero(4).unwrap()]).unwrap();
            let (p1, p2, q) = (random_vector(&mut rng, 4), random_vector(&mut rng, 4), random_vector(&mut rng, 4));
            let e = theta.bilinear(&p1, &p2) + theta.bilinear(&(p1 - p2), &q);
            let expected = Complex64::from_polar(1.0, -0.5 * e);
            assert!((twist_phase(&tags, &[p1, p2, q]).unwrap() - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn uniform_tags_reduce_to_pairwise_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10_000 {
            let d = if trial % 2 == 0 { 2 } else { 4 };
            let n = rng.random_range(2..7usize);
            let theta = if d == 2 {
                ThetaMatrix::d2(rng.random_range(-1.0..1.0))
            } else {
                ThetaMatrix::reference(rng.random_range(0.0..1.0), rng.random_range(0.1..1.0), 4).unwrap()
            };
            let p: Vec<MinkowskiVector> = (0..n).map(|_| random_vector(&mut rng, d).scale(1.0 / 3.0)).collect();
            let tags = TwistTagList::uniform(theta, n).unwrap();
            let mut expected = Complex64::new(1.0, 0.0);
            for j in 0..n {
                for k in j + 1..n {
                    expected *= Complex64::from_polar(1.0, -0.5 * theta.bilinear(&p[j], &p[k]));
                }
            }
            assert!((twist_phase(&tags, &p).unwrap() - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let tags = TwistTagList::uniform(ThetaMatrix::d2(1.0), 3).unwrap();
        assert!(matches!(twist_phase(&tags, &[mv(&[0.0, 1.0])]), Err(Error::LengthMismatch { .. })));
        assert!(TwistTagList::new(vec![]).is_err());
        assert!(TwistTagList::new(vec![ThetaMatrix::d2(1.0), ThetaMatrix::zero(4).unwrap()]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn phase_is_unimodular(t in -5.0f64..5.0, a in prop::collection::vec(-10.0f64..10.0, 8)) {
            let tags = TwistTagList::uniform(ThetaMatrix::d2(t), 4).unwrap();
            let p: Vec<MinkowskiVector> = a.chunks(2).map(mv).collect();
            prop_assert!((twist_phase(&tags, &p).unwrap().norm() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn phase_flips_under_exchange(t in -5.0f64..5.0, a in prop::collection::vec(-10.0f64..10.0, 4)) {
            let tags = TwistTagList::uniform(ThetaMatrix::d2(t), 2).unwrap();
            let (p, q) = (mv(&a[..2]), mv(&a[2..]));
            let prod = twist_phase(&tags, &[p, q]).unwrap() * twist_phase(&tags, &[q, p]).unwrap();
            prop_assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn untwisted_tensor_is_pointwise_product() {
        let f = TestFunction::gaussian(&[0.3, -0.2], 1.0);
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![-0.5, 0.4], vec![0.8, 1.1], vec![0.5, -0.7], Complex64::new(0.0, 1.0)).unwrap());
        let slot = SlotGrid::cube(2, 9.5, 38);
        let t = twisted_tensor_functions(&f, &g, &ThetaMatrix::zero(2).unwrap(), &slot, &slot).unwrap();
        let mut err = 0.0f64;
        for i in 0..t.len() {
            let x = t.point(i);
            err = err.max((t.values[i] - f.eval(&x[..2]) * g.eval(&x[2..])).norm());
        }
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn narrow_packet_shifts_first_factor() {
        let vartheta = 0.6;
        let theta = ThetaMatrix::d2(vartheta);
        let f = TestFunction::gaussian(&[0.0, 0.0], 1.0);
        let q0 = [1.0, 0.5];
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![0.0, 0.0], vec![3.0, 3.0], q0.to_vec(), Complex64::new(1.0, 0.0)).unwrap());
        let f_box = SlotGrid::cube(2, 8.0, 32);
        let g_box = SlotGrid::cube(2, 24.0, 64);
        let t = twisted_tensor_functions(&f, &g, &theta, &f_box, &g_box).unwrap();
        let shift = theta.apply(&mv(&q0)).scale(0.5);
        // bound: ½ϑ max|∇f| (2π)^{-d} ∫ |q − Q₀| |ĝ(q)| dq
        let gh = g_box.sample(&g).unwrap().fourier();
        let spread: f64 = (0..gh.len())
            .map(|j| {
                let q = gh.point(j);
                ((q[0] - q0[0]).powi(2) + (q[1] - q0[1]).powi(2)).sqrt() * gh.values[j].norm()
            })
            .sum::<f64>()
            * gh.cell_volume()
            / (2.0 * std::f64::consts::PI).powi(2);
        let grad_max = (-0.5f64).exp();
        let bound = 0.5 * vartheta * grad_max * spread;
        let mut err = 0.0f64;
        let mut naive = 0.0f64;
        for i in (0..t.len()).step_by(7) {
            let x = t.point(i);
            let shifted = [x[0] + shift.get(0), x[1] + shift.get(1)];
            err = err.max((t.values[i] - f.eval(&shifted) * g.eval(&x[2..])).norm());
            naive = naive.max((t.values[i] - f.eval(&x[..2]) * g.eval(&x[2..])).norm());
        }
        assert!(err <= bound, "{err} > {bound}");
        assert!(err < 0.5 * naive);
    }

    #[test]
    fn twisted_product_is_associative() {
        let theta = ThetaMatrix::d2(0.5);
        let slot = SlotGrid::cube(2, 4.0, 8);
        let f = TestFunction::gaussian(&[0.2, 0.0], 1.0);
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![0.0, -0.3], vec![1.2, 0.9], vec![0.4, 0.1], Complex64::new(1.0, 0.0)).unwrap());
        let h = TestFunction::gaussian(&[-0.4, 0.5], 0.8);
        let defect = associativity_defect(&f, &g, &h, &theta, &slot).unwrap();
        assert!(defect < 1e-9, "{defect}");
    }

    fn exchange_inputs() -> (TestFunction, TestFunction, TestFunction) {
        (
            TestFunction::gaussian(&[0.5, 0.3], 1.0),
            TestFunction::Gaussian(GaussianPacket::new(vec![-0.4, 0.0], vec![0.9, 1.1], vec![0.3, -0.2], Complex64::new(1.0, 0.0)).unwrap()),
            TestFunction::gaussian(&[0.0, -0.6], 1.2),
        )
    }

    #[test]
    fn exchange_identity_holds() {
        let (f1, f2, g) = exchange_inputs();
        let slot = SlotGrid::cube(2, 4.0, 8);
        let zero = exchange_identity_check(&f1, &f2, &g, &ThetaMatrix::zero(2).unwrap(), &slot).unwrap();
        assert!(zero < 1e-13, "{zero}");
        let theta = ThetaMatrix::d2(0.5);
        let a = exchange_identity_check(&f1, &f2, &g, &theta, &slot).unwrap();
        let b = exchange_identity_check(&f2, &f1, &g, &theta.scale(-1.0), &slot).unwrap();
        assert!(a < 1e-9 && b < 1e-9, "{a} {b}");
    }

    #[test]
    fn exchange_sides_match_direct_momentum_sum() {
        // independent oracle: explicit DFT coefficients and the explicit
        // phase of each side, summed at a few points
        let (f1, f2, g) = exchange_inputs();
        let theta = ThetaMatrix::d2(0.5);
        let slot = SlotGrid::cube(2, 4.0, 8);
        let n = 8usize;
        let dx = 1.0;
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        let xs: Vec<f64> = (0..n).map(|j| -4.0 + j as f64 * dx).collect();
        let ps: Vec<f64> = (0..n).map(|k| (k as f64 - 4.0) * dp).collect();
        let dft = |f: &TestFunction| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); n * n];
            for k0 in 0..n {
                for k1 in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for j0 in 0..n {
                        for j1 in 0..n {
                            let ph = ps[k0] * xs[j0] - ps[k1] * xs[j1];
                            s += f.eval(&[xs[j0], xs[j1]]) * Complex64::from_polar(dx * dx, ph);
                        }
                    }
                    out[k0 * n + k1] = s;
                }
            }
            out
        };
        let (h1, h2, hg) = (dft(&f1), dft(&f2), dft(&g));
        let mom = |k: usize| mv(&[ps[k / n], ps[k % n]]);
        let lhs = twisted_tensor(&slot.sample(&f1).unwrap(), &twisted_tensor(&slot.sample(&f2).unwrap(), &slot.sample(&g).unwrap(), &theta.scale(-1.0)).unwrap(), &theta).unwrap();
        for &flat in &[0usize, 12_345, 131_072 + 77, 262_143] {
            let x = lhs.point(flat);
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..n * n {
                let p1 = mom(a);
                for b in 0..n * n {
                    let p2 = mom(b);
                    for c in 0..n * n {
                        let q = mom(c);
                        let e = theta.bilinear(&p1, &(p2 + q)) - theta.bilinear(&p2, &q);
                        let px = p1.get(0) * x[0] - p1.get(1) * x[1] + p2.get(0) * x[2] - p2.get(1) * x[3] + q.get(0) * x[4] - q.get(1) * x[5];
                        s += h1[a] * h2[b] * hg[c] * Complex64::from_polar(1.0, -0.5 * e - px);
                    }
                }
            }
            let s = s * (dp / (2.0 * std::f64::consts::PI)).powi(6);
            assert!((s - lhs.values[flat]).norm() < 1e-12, "{flat}: {s} vs {}", lhs.values[flat]);
        }
    }

    #[test]
    fn star_product_without_deformation_is_pointwise() {
        let f = TestFunction::gaussian(&[0.2, 0.0], 1.0);
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![0.0, -0.3], vec![1.2, 0.9], vec![0.4, 0.1], Complex64::new(1.0, 0.0)).unwrap());
        let sample = SlotGrid::cube(2, 11.0, 56);
        let out = SlotGrid::cube(2, 2.0, 4);
        let s = star_product(&f, &g, &ThetaMatrix::zero(2).unwrap(), &sample, &out).unwrap();
        for i in 0..s.len() {
            let x = s.point(i);
            let err = (s.values[i] - f.eval(&x) * g.eval(&x)).norm();
            assert!(err < 1e-10, "{x:?}: {err}");
        }
    }

    #[test]
    fn trace_property() {
        let theta = ThetaMatrix::d2(0.8);
        let f = TestFunction::gaussian(&[0.5, 0.0], 1.0);
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![-0.3, 0.2], vec![1.0, 1.0], vec![0.5, 0.2], Complex64::new(1.0, 0.0)).unwrap());
        let sample = SlotGrid::cube(2, 9.0, 36);
        // trapezoid sums on a coarser output grid are spectrally accurate
        let out = SlotGrid::cube(2, 8.4, 28);
        let st = star_product(&f, &g, &theta, &sample, &out).unwrap();
        let lhs: Complex64 = st.values.iter().sum::<Complex64>() * st.cell_volume();
        let plain = GridFunction::from_fn(&out.lo, &out.hi, &out.counts, |x| f.eval(x) * g.eval(x)).unwrap();
        let rhs: Complex64 = plain.values.iter().sum::<Complex64>() * plain.cell_volume();
        assert!((lhs - rhs).norm() < 1e-8 * rhs.norm(), "{lhs} vs {rhs}");
        // the pointwise values do change
        let diff = max_abs_difference(&st, &plain);
        assert!(diff > 1e-3);
    }

    #[test]
    fn windowed_coordinates_commute_to_theta() {
        let vartheta = 0.5;
        let theta = ThetaMatrix::d2(vartheta);
        let window = |t: f64| 0.5 * (puruspe::erf(t + 4.0) - puruspe::erf(t - 4.0));
        let w = move |x: &[f64]| window(x[0]) * window(x[1]);
        let lo = [-10.0, -10.0];
        let hi = [10.0, 10.0];
        let fx = GridFunction::from_fn(&lo, &hi, &[64, 64], |x| Complex64::new(x[0] * w(x), 0.0)).unwrap().fourier();
        let gx = GridFunction::from_fn(&lo, &hi, &[64, 64], |x| Complex64::new(x[1] * w(x), 0.0)).unwrap().fourier();
        let points = vec![vec![0.0, 0.0], vec![0.7, -0.4], vec![-1.0, 0.9]];
        let fg = star_product_at(&fx, &gx, &theta, &points).unwrap();
        let gf = star_product_at(&gx, &fx, &theta, &points).unwrap();
        for (k, x) in points.iter().enumerate() {
            let expected = Complex64::new(0.0, vartheta * w(x).powi(2));
            let bracket = fg[k] - gf[k];
            assert!((bracket - expected).norm() < 1e-3 * vartheta, "{x:?}: {bracket}");
        }
    }

    #[test]
    fn support_moves_by_half_theta_q() {
        let f = TestFunction::bump(&[0.0, 0.0], 0.5);
        let q0 = [2.0, 1.0];
        let sigma_g = 4.0;
        let g = TestFunction::Gaussian(GaussianPacket::new(vec![0.0, 0.0], vec![sigma_g; 2], q0.to_vec(), Complex64::new(1.0, 0.0)).unwrap());
        let gh = SlotGrid::cube(2, 32.0, 128).sample(&g).unwrap().fourier();
        // below 1e-8 of the peak outside this band
        let band = (2.0 * (1e8f64).ln()).sqrt() / sigma_g;
        let x_box = SlotGrid::cube(2, 4.5, 72);
        let mut centres = Vec::new();
        for &vartheta in &[0.5, 1.0, 2.0] {
            let theta = ThetaMatrix::d2(vartheta);
            let ev = ShiftedTensor::new(&gh, &theta).unwrap();
            let (lo, hi) = thresholded_support(&f, &ev, &[0.0, 0.0], &x_box, 1e-8).unwrap().unwrap();
            // allowed region: supp f − ½θ[Q₀ ± band], per axis
            let shift = theta.apply(&mv(&q0)).scale(0.5);
            let slack = 0.5 * vartheta * band + 0.5 + 9.0 / 72.0;
            for a in 0..2 {
                assert!(lo[a] >= -shift.get(a) - slack - 1e-9, "ϑ={vartheta} axis {a}: {lo:?}");
                assert!(hi[a] <= -shift.get(a) + slack + 1e-9, "ϑ={vartheta} axis {a}: {hi:?}");
            }
            centres.push([(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]);
        }
        // shift of the centre is linear in ϑ: θQ₀ = −ϑ(Q₀¹, Q₀⁰)
        let spacing = 9.0 / 72.0;
        for (c, &v) in centres.iter().zip(&[0.5, 1.0, 2.0]) {
            assert!((c[0] - 0.5 * v * q0[1]).abs() <= spacing, "{c:?}");
            assert!((c[1] - 0.5 * v * q0[0]).abs() <= spacing, "{c:?}");
        }
    }
}
