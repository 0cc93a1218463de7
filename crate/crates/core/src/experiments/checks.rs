use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Check, ExperimentConfig, Report};
use crate::error::Result;
use crate::funcspace::{duality_parameters, GaussianPacket, GridFunction, TestFunction};
use crate::geometry::{
    angular_distance, half_theta_cone_check, is_spacelike, rho_norm, sample_wedge_point, spacelike_cone_samples, transform_theta, LightCone2,
    LorentzTransform, MinkowskiVector, ThetaMatrix, ThetaOrbitPoint,
};
use crate::numerics::{fmt_g17, tree_sum};
use crate::star::{associativity_defect, exchange_identity_check, star_product, star_product_at, thresholded_support, ShiftedTensor, SlotGrid};

pub const ASSOCIATIVITY_TOL: f64 = 1e-9;
pub const EXCHANGE_TOL: f64 = 1e-9;
pub const BRACKET_REL_TOL: f64 = 1e-3;
pub const TRACE_TOL: f64 = 1e-10;
pub const DUALITY_TOL: f64 = 1e-12;

fn packet(center: [f64; 2], widths: [f64; 2], carrier: [f64; 2]) -> TestFunction {
    TestFunction::Gaussian(GaussianPacket::new(center.to_vec(), widths.to_vec(), carrier.to_vec(), Complex64::new(1.0, 0.0)).expect("valid packet"))
}

fn associativity(theta: &ThetaMatrix) -> Result<Check> {
    let f = TestFunction::gaussian(&[0.2, 0.0], 1.0);
    let g = packet([0.0, -0.3], [1.2, 0.9], [0.4, 0.1]);
    let h = TestFunction::gaussian(&[-0.4, 0.5], 0.8);
    let d = associativity_defect(&f, &g, &h, theta, &SlotGrid::cube(2, 4.0, 8))?;
    Ok(Check::below("associativity", d, ASSOCIATIVITY_TOL))
}

fn exchange(theta: &ThetaMatrix) -> Result<Check> {
    let f1 = TestFunction::gaussian(&[0.5, 0.3], 1.0);
    let f2 = packet([-0.4, 0.0], [0.9, 1.1], [0.3, -0.2]);
    let g = TestFunction::gaussian(&[0.0, -0.6], 1.2);
    let slot = SlotGrid::cube(2, 4.0, 8);
    let a = exchange_identity_check(&f1, &f2, &g, theta, &slot)?;
    let b = exchange_identity_check(&f2, &f1, &g, &theta.scale(-1.0), &slot)?;
    Ok(Check::below("exchange", a.max(b), EXCHANGE_TOL))
}

/// `[x⁰, x¹]_⋆` with both coordinates cut off by a smooth window far from
/// the sample points.
fn windowed_bracket(theta: &ThetaMatrix) -> Result<Check> {
    let vartheta = theta.get(0, 1);
    // the plateau grows with |θ| so that the shifted edges stay far away
    let plateau = 4.0 * vartheta.abs().max(1.0);
    let window = move |t: f64| 0.5 * (puruspe::erf(t + plateau) - puruspe::erf(t - plateau));
    let w = move |x: &[f64]| window(x[0]) * window(x[1]);
    let half = plateau + 6.0;
    let n = 2 * (half / 0.3125).ceil() as usize;
    let (lo, hi) = ([-half, -half], [half, half]);
    let fx = GridFunction::from_fn(&lo, &hi, &[n, n], |x| Complex64::new(x[0] * w(x), 0.0))?.fourier();
    let gx = GridFunction::from_fn(&lo, &hi, &[n, n], |x| Complex64::new(x[1] * w(x), 0.0))?.fourier();
    let points = vec![vec![0.0, 0.0], vec![0.7, -0.4], vec![-1.0, 0.9]];
    let fg = star_product_at(&fx, &gx, theta, &points)?;
    let gf = star_product_at(&gx, &fx, theta, &points)?;
    let err = points
        .iter()
        .enumerate()
        .map(|(k, x)| (fg[k] - gf[k] - Complex64::new(0.0, vartheta * w(x).powi(2))).norm())
        .fold(0.0, f64::max);
    if vartheta == 0.0 {
        return Ok(Check::below("windowed_bracket", err, 1e-12));
    }
    let rel = err / vartheta.abs();
    let mut c = Check::below("windowed_bracket", rel, BRACKET_REL_TOL);
    c.detail = format!("max |[x⁰, x¹]_⋆ − iθ⁰¹| / |θ⁰¹| = {}", fmt_g17(rel));
    Ok(c)
}

/// `|∫ f⋆g − ∫ fg|`.
fn trace(theta: &ThetaMatrix) -> Result<Check> {
    let f = TestFunction::gaussian(&[0.5, 0.0], 1.0);
    let g = packet([-0.3, 0.2], [1.0, 1.0], [0.5, 0.2]);
    let sample = SlotGrid::cube(2, 9.0, 48);
    let out = SlotGrid::cube(2, 8.4, 28);
    let st = star_product(&f, &g, theta, &sample, &out)?;
    let lhs = tree_sum(&st.values) * st.cell_volume();
    let plain = GridFunction::from_fn(&out.lo, &out.hi, &out.counts, |x| f.eval(x) * g.eval(x))?;
    let rhs = tree_sum(&plain.values) * plain.cell_volume();
    Ok(Check::below("trace", (lhs - rhs).norm(), TRACE_TOL))
}

/// Thresholded support of `f ⊗_θ g` against `supp f − ½θQ₀` for a narrow
/// momentum packet `g` at `Q₀`.
pub(super) fn support_shift(theta: &ThetaMatrix) -> Result<Check> {
    let f = TestFunction::bump(&[0.0, 0.0], 0.5);
    let q0 = MinkowskiVector::d2(2.0, 1.0);
    let sigma_g = 4.0;
    let g = packet([0.0, 0.0], [sigma_g; 2], [q0.get(0), q0.get(1)]);
    let gh = SlotGrid::cube(2, 32.0, 128).sample(&g)?.fourier();
    let x_box = SlotGrid::cube(2, 4.5, 72);
    let spacing = 9.0 / 72.0;
    let band = (2.0 * (1e8f64).ln()).sqrt() / sigma_g;
    let ev = ShiftedTensor::new(&gh, theta)?;
    let Some((lo, hi)) = thresholded_support(&f, &ev, &[0.0, 0.0], &x_box, 1e-8)? else {
        return Ok(Check::new("support_shift", false, f64::NAN, 0.0, "tensor vanishes on the box"));
    };
    let shift = theta.apply(&q0).scale(0.5);
    let vartheta = theta.get(0, 1).abs();
    let slack = 0.5 * vartheta * band + 0.5 + spacing;
    let inside = (0..2).all(|a| lo[a] >= -shift.get(a) - slack - 1e-9 && hi[a] <= -shift.get(a) + slack + 1e-9);
    let centre_err = (0..2).map(|a| ((lo[a] + hi[a]) / 2.0 + shift.get(a)).abs()).fold(0.0, f64::max);
    let shift_len = (shift.get(0).powi(2) + shift.get(1).powi(2)).sqrt();
    let bound = spacing + 0.5 * vartheta * band;
    let mut c = Check::new(
        "support_shift",
        inside && centre_err <= bound,
        centre_err,
        bound,
        format!("|½θQ₀| = {}, support box {:?}..{:?}", fmt_g17(shift_len), lo, hi),
    );
    c.contrast = Some(shift_len);
    Ok(c)
}

fn duality_involution() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for &rho in &[1.25, 1.5, 2.0, 3.0, 5.0] {
        for &a in &[0.1, 0.5, 1.0, 2.5] {
            let (rp, ap) = duality_parameters(rho, a)?;
            let (rb, ab) = duality_parameters(rp, ap)?;
            worst = worst.max(((rb - rho) / rho).abs()).max(((ab - a) / a).abs());
        }
    }
    Ok(Check::below("duality_involution", worst, DUALITY_TOL))
}

/// Associativity, windowed coordinate bracket, support shift, exchange,
/// trace and duality involution at the configured θ.
pub fn run_star_checks(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.require_dim2()?;
    let mut report = Report::new(cfg)?;
    let theta = cfg.theta.theta(2)?;
    report.checks.push(associativity(&theta)?);
    report.checks.push(windowed_bracket(&theta)?);
    report.checks.push(support_shift(&theta)?);
    report.checks.push(exchange(&theta)?);
    report.checks.push(trace(&theta)?);
    report.checks.push(duality_involution()?);
    Ok(report.finish())
}

const SPACE_SAMPLES: usize = 4000;

fn opposite_wedges(cfg: &ExperimentConfig) -> Result<Check> {
    let wedge = cfg.theta.wedge(cfg.dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bad = (0..SPACE_SAMPLES)
        .filter(|_| {
            let x = sample_wedge_point(&mut rng, &wedge, 5.0);
            let y = sample_wedge_point(&mut rng, &wedge.opposite(), 5.0);
            !is_spacelike(&x, &y)
        })
        .count();
    Ok(Check::new("opposite_wedges_spacelike", bad == 0, bad as f64, 0.0, format!("{bad} of {SPACE_SAMPLES} pairs not spacelike")))
}

fn cone_images(cfg: &ExperimentConfig) -> Result<Check> {
    let reference = ThetaMatrix::reference(cfg.theta.vartheta_e, cfg.theta.vartheta_m, cfg.dim)?;
    let orbit = ThetaOrbitPoint::new(reference, cfg.theta.boost(cfg.dim)?)?;
    let outcome = half_theta_cone_check(&orbit, SPACE_SAMPLES, cfg.seed)
        .and_then(|_| half_theta_cone_check(&orbit.negated(), SPACE_SAMPLES, cfg.seed.wrapping_add(1)));
    Ok(match outcome {
        Ok(_) => Check::new("half_theta_cone", true, 0.0, 0.0, "½θV∓ inside ±W_θ for θ and −θ"),
        Err(e) => Check::new("half_theta_cone", false, 1.0, 0.0, e.to_string()),
    })
}

/// Boosts along x¹ (and rotations in the 23-plane) fix the reference matrix.
fn stabilizer(cfg: &ExperimentConfig) -> Result<Check> {
    let reference = ThetaMatrix::reference(cfg.theta.vartheta_e, cfg.theta.vartheta_m, cfg.dim)?;
    let mut worst: f64 = 0.0;
    for &chi in &[-2.0, -0.3, 0.7, 1.5] {
        let mut lambdas = vec![LorentzTransform::boost(cfg.dim, 1, chi)?];
        if cfg.dim == 4 {
            lambdas.push(LorentzTransform::rotation(4, 2, 3, chi)?);
        }
        for l in lambdas {
            worst = worst.max(transform_theta(&l, &reference)?.add(&reference.scale(-1.0)).max_abs());
        }
    }
    let scale = reference.max_abs().max(1.0);
    Ok(Check::below("stabilizer_invariance", worst / scale, 1e-12))
}

/// Sampled distance of a spacelike cone to the light cone against a dense
/// brute-force search along the light rays.
fn angular(cfg: &ExperimentConfig) -> Result<Check> {
    let (aperture, rho) = (0.5, 2.0);
    let samples = spacelike_cone_samples(aperture, 16);
    let sampled = angular_distance(&samples, &LightCone2, rho, 64)?;
    let rays = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
    let mut brute = f64::INFINITY;
    for x in &samples {
        let n = rho_norm(x, rho);
        let u = [x[0] / n, x[1] / n];
        for r in &rays {
            for k in 0..=20_000 {
                let t = 2.0 * k as f64 / 20_000.0;
                brute = brute.min(rho_norm(&[u[0] - t * r[0], u[1] - t * r[1]], rho));
            }
        }
    }
    let _ = cfg;
    let err = (sampled - brute).abs();
    let mut c = Check::below("angular_distance", err, 1e-6);
    c.detail = format!("sampled {} vs brute force {}", fmt_g17(sampled), fmt_g17(brute));
    Ok(c)
}

fn metric(cfg: &ExperimentConfig) -> Result<Check> {
    let l = cfg.theta.boost(cfg.dim)?;
    let d = l.metric_defect();
    let scale = cfg.theta.rapidity.cosh().powi(2);
    let mut c = Check::below("metric_defect", d / scale, 1e-13);
    if !l.is_proper_orthochronous(1e-12) {
        c.status = super::Status::Fail;
        c.detail.push_str("; not proper orthochronous");
    }
    Ok(c)
}

/// Wedge, cone and Lorentz-group checks for the configured θ.
pub fn run_space_checks(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg)?;
    report.checks.push(opposite_wedges(cfg)?);
    report.checks.push(cone_images(cfg)?);
    report.checks.push(stabilizer(cfg)?);
    report.checks.push(angular(cfg)?);
    report.checks.push(metric(cfg)?);
    Ok(report.finish())
}
