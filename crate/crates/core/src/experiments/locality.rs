use rayon::prelude::*;

use super::fit::{fit_decay, is_monotone_beyond, FitOutcome, ScanPoint};
use super::{spacelike_direction, suffixed, Check, ExperimentConfig, NamedFit, Report, Status, Table};
use crate::deform::{commutator_matrix_element, MatrixElement, MatrixElementRequest};
use crate::error::{Error, Result};
use crate::funcspace::{translate, TestFunction};
use crate::geometry::{MinkowskiVector, Wedge};
use crate::numerics::fmt_g17;
use crate::wick::QuadratureSpec;

fn request(cfg: &ExperimentConfig, left: TestFunction, right: TestFunction, tags: [f64; 2], quad: &QuadratureSpec) -> Result<MatrixElementRequest> {
    let mut req = MatrixElementRequest::new(
        cfg.functions_named(&cfg.bra)?,
        left,
        right,
        cfg.functions_named(&cfg.ket)?,
        cfg.theta.theta(cfg.dim)?,
    )?;
    req.field = cfg.field()?;
    req.tags = tags;
    req.quad = quad.clone();
    req.validate()?;
    Ok(req)
}

fn bump_ball(f: &TestFunction, what: &str) -> Result<(MinkowskiVector, f64)> {
    let r = f.support_radius().ok_or_else(|| Error::Config(format!("`{what}` must be a compactly supported bump")))?;
    Ok((f.center_vector()?, r))
}

/// Every point of one ball is spacelike to every point of the other.
fn balls_spacelike(a: &(MinkowskiVector, f64), b: &(MinkowskiVector, f64)) -> bool {
    let d = a.0 - b.0;
    let spatial = d.components()[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    spatial - d.get(0).abs() > std::f64::consts::SQRT_2 * (a.1 + b.1)
}

fn check_supports(cfg: &ExperimentConfig, wedge: &Wedge, left: &TestFunction, right: &TestFunction) -> Result<()> {
    let l = bump_ball(left, "left")?;
    let r = bump_ball(right, "right")?;
    let in_wedges = wedge.contains_ball(&l.0, l.1) && wedge.opposite().contains_ball(&r.0, r.1);
    if in_wedges || (cfg.theta.theta(cfg.dim)?.is_zero() && balls_spacelike(&l, &r)) {
        Ok(())
    } else {
        Err(Error::Config("supports of `left` and `right` are not inside the wedge and its opposite".into()))
    }
}

/// `|u| ≤ tol·contrast` with a contrast clearly above the quadrature error.
fn zero_check(name: &str, u: &MatrixElement, contrast: f64, contrast_eps: f64, tol: f64) -> Check {
    let eps = u.eps_quad.max(contrast_eps);
    let resolved = contrast > 100.0 * eps;
    let small = u.value.norm() <= tol * contrast;
    let status = match (resolved, small) {
        (false, _) => Status::Inconclusive,
        (true, true) => Status::Pass,
        (true, false) => Status::Fail,
    };
    Check {
        name: name.into(),
        status,
        value: u.value.norm(),
        threshold: tol * contrast,
        eps_quad: Some(u.eps_quad),
        contrast: Some(contrast),
        complex: Some(u.value),
        detail: format!("|u| = {}, contrast = {}, ε_quad = {}", fmt_g17(u.value.norm()), fmt_g17(contrast), fmt_g17(eps)),
    }
}

/// Commutator of oppositely deformed fields with supports in the wedge and
/// its opposite, against the same-tag control and a translated copy.
pub fn run_wedge_locality(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.require_dim2()?;
    let mut report = Report::new(cfg)?;
    let left = cfg.required(&cfg.left, "left")?;
    let right = cfg.required(&cfg.right, "right")?;
    let wedge = cfg.theta.wedge(cfg.dim)?;
    check_supports(cfg, &wedge, &left, &right)?;
    let translation = cfg.translation.as_deref().map(MinkowskiVector::new).transpose()?;
    let theta_zero = cfg.theta.theta(cfg.dim)?.is_zero();

    let opposite = commutator_matrix_element(&request(cfg, left.clone(), right.clone(), [1.0, -1.0], &cfg.quadrature)?)?;
    if theta_zero {
        report.notes.push("θ = 0: same-tag control coincides with the opposite-tag run; contrast is |direct correlator|".into());
        let contrast = opposite.direct.value.norm();
        report.checks.push(zero_check("opposite_tags", &opposite, contrast, opposite.direct.eps_quad, cfg.tolerance));
    } else {
        let same = commutator_matrix_element(&request(cfg, left.clone(), right.clone(), [1.0, 1.0], &cfg.quadrature)?)?;
        let contrast = same.value.norm();
        report.checks.push(zero_check("opposite_tags", &opposite, contrast, same.eps_quad, cfg.tolerance));
        let mut control = Check::new(
            "same_tag_contrast",
            contrast > 100.0 * same.eps_quad,
            contrast,
            100.0 * same.eps_quad,
            format!("expected nonzero: |u| = {} vs 100·ε_quad = {}", fmt_g17(contrast), fmt_g17(100.0 * same.eps_quad)),
        );
        control.eps_quad = Some(same.eps_quad);
        control.complex = Some(same.value);
        report.checks.push(control);
    }

    match translation {
        Some(b) => {
            let (l, r) = (translate(&left, b.components(), 1.0), translate(&right, b.components(), 1.0));
            let moved = commutator_matrix_element(&request(cfg, l.clone(), r.clone(), [1.0, -1.0], &cfg.quadrature)?)?;
            let (contrast, ceps) = if theta_zero {
                (moved.direct.value.norm(), moved.direct.eps_quad)
            } else {
                let c = commutator_matrix_element(&request(cfg, l, r, [1.0, 1.0], &cfg.quadrature)?)?;
                (c.value.norm(), c.eps_quad)
            };
            report.checks.push(zero_check("translated", &moved, contrast, ceps, cfg.tolerance));
        }
        None => report.notes.push("no translation given; translated variant skipped".into()),
    }
    Ok(report.finish())
}

fn scan_points(cfg: &ExperimentConfig, quad: &QuadratureSpec) -> Result<Vec<ScanPoint>> {
    let scan = cfg.scan()?;
    let a = spacelike_direction(&scan.direction)?;
    let left = cfg.required(&cfg.left, "left")?;
    let right = cfg.required(&cfg.right, "right")?;
    scan.lambdas
        .par_iter()
        .map(|&lambda| {
            let moved = translate(&right, a.components(), lambda);
            let u = commutator_matrix_element(&request(cfg, left.clone(), moved, [1.0, -1.0], quad)?)?;
            Ok(ScanPoint { lambda, abs_u: u.value.norm(), eps_quad: u.eps_quad })
        })
        .collect()
}

pub const MIN_RHO: f64 = 1.2;
pub const MAX_LOG_RESIDUAL: f64 = 0.15;
pub const MAX_RHO_DRIFT: f64 = 0.1;

/// `|u(λ)|` with `f₂` moved along a spacelike direction, fitted to
/// `C exp(−c λ^ρ)`.
pub fn run_decay_scan(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.require_dim2()?;
    let mut report = Report::new(cfg)?;
    let points = scan_points(cfg, &cfg.quadrature)?;
    report.tables.push(Table { name: "decay".into(), file: cfg.output.table.clone(), rows: points.clone() });

    if cfg.theta.theta(cfg.dim)?.is_zero() && points.iter().all(|p| p.abs_u <= p.eps_quad) {
        let worst = points.iter().map(|p| p.abs_u).fold(0.0, f64::max);
        report.checks.push(Check::new("identically_zero", true, worst, 0.0, "all |u(λ)| ≤ ε_quad; fit skipped"));
        report.fits.push(NamedFit { name: "decay".into(), fit: FitOutcome::Inconclusive { reason: "identically zero".into() } });
        return Ok(report.finish());
    }

    report.notes.push("Gaussian test functions sit at the ρ = 2 boundary of the decay classes; ρ_fit is read against a loose lower bound".into());
    let fit = fit_decay(&points, None);
    report.fits.push(NamedFit { name: "decay".into(), fit: fit.clone() });
    let Some(f) = fit.fitted() else {
        let FitOutcome::Inconclusive { reason } = &fit else { unreachable!() };
        let mut c = Check::new("fit", false, 0.0, 0.0, reason.clone());
        c.status = Status::Inconclusive;
        report.checks.push(c);
        return Ok(report.finish());
    };
    report.checks.push(Check::new("rho_fit", f.rho >= MIN_RHO, f.rho, MIN_RHO, format!("ρ_fit = {} ≥ {MIN_RHO}", fmt_g17(f.rho))));
    report.checks.push(Check::below("log_residual", f.residual_rms, MAX_LOG_RESIDUAL));
    let from = 2.0 / cfg.mass;
    report.checks.push(Check::new(
        "monotone",
        is_monotone_beyond(&points, from),
        from,
        from,
        format!("|u| nonincreasing for λ ≥ {}", fmt_g17(from)),
    ));

    if cfg.check_doubling {
        let fine = scan_points(cfg, &cfg.quadrature.scaled(2.0))?;
        let refit = fit_decay(&fine, None);
        report.tables.push(Table { name: "decay_doubled".into(), file: suffixed(&cfg.output.table, "doubled"), rows: fine });
        report.fits.push(NamedFit { name: "decay_doubled".into(), fit: refit.clone() });
        match refit.fitted() {
            Some(g) => report.checks.push(Check::below("rho_doubling", (g.rho - f.rho).abs(), MAX_RHO_DRIFT)),
            None => {
                let mut c = Check::new("rho_doubling", false, 0.0, MAX_RHO_DRIFT, "doubled-resolution fit inconclusive");
                c.status = Status::Inconclusive;
                report.checks.push(c);
            }
        }
    }
    Ok(report.finish())
}
