use rayon::prelude::*;

use super::fit::{fit_decay, ScanPoint};
use super::{spacelike_direction, suffixed, Check, ExperimentConfig, NamedFit, Report, Status, Table};
use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::star::TwistTagList;
use crate::wick::connected_four_point_defect;

pub const MIN_RATE_FRACTION: f64 = 0.5;
pub const MAX_RATE_SPREAD: f64 = 0.25;

fn pair(cfg: &ExperimentConfig, names: &[String], what: &str) -> Result<[TestFunction; 2]> {
    let fs = cfg.functions_named(names)?;
    fs.try_into().map_err(|_| Error::Config(format!("`{what}` needs exactly two functions")))
}

/// Connected 4-point defect against the separation of two pairs, with and
/// without a common twist, each fitted to `C exp(−c λ)`.
pub fn run_cluster_scan(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.require_dim2()?;
    let mut report = Report::new(cfg)?;
    let first = pair(cfg, &cfg.first, "first")?;
    let second = pair(cfg, &cfg.second, "second")?;
    let scan = cfg.scan()?;
    let a = spacelike_direction(&scan.direction)?;
    let field = cfg.field()?;
    let theta = cfg.theta.theta(cfg.dim)?;
    let deformed = TwistTagList::new(vec![theta; 4])?;

    let run = |tags: Option<&TwistTagList>| -> Result<Vec<ScanPoint>> {
        scan.lambdas
            .par_iter()
            .map(|&lambda| {
                let d = connected_four_point_defect(&field, &first, &second, &a, lambda, tags, &cfg.quadrature)?;
                Ok(ScanPoint { lambda, abs_u: d.value.norm(), eps_quad: d.eps_quad })
            })
            .collect()
    };
    let plain = run(None)?;
    let twisted = run(Some(&deformed))?;
    report.tables.push(Table { name: "undeformed".into(), file: cfg.output.table.clone(), rows: plain.clone() });
    report.tables.push(Table { name: "deformed".into(), file: suffixed(&cfg.output.table, "deformed"), rows: twisted.clone() });

    let fit_plain = fit_decay(&plain, Some(1.0));
    let fit_twisted = fit_decay(&twisted, Some(1.0));
    report.fits.push(NamedFit { name: "undeformed".into(), fit: fit_plain.clone() });
    report.fits.push(NamedFit { name: "deformed".into(), fit: fit_twisted.clone() });
    if theta.is_zero() {
        report.notes.push("θ = 0: deformed and undeformed scans coincide".into());
    }

    let (Some(p), Some(t)) = (fit_plain.fitted(), fit_twisted.fitted()) else {
        let mut c = Check::new("fit", false, 0.0, 0.0, "fewer than four usable points above 10·ε_quad");
        c.status = Status::Inconclusive;
        report.checks.push(c);
        return Ok(report.finish());
    };
    let length = (-a.square()).sqrt();
    let floor = MIN_RATE_FRACTION * cfg.mass * length;
    report.checks.push(Check::new(
        "undeformed_rate",
        p.c >= floor,
        p.c,
        floor,
        format!("c_fit = {} ≥ {}·m·|a| = {}", p.c, MIN_RATE_FRACTION, floor),
    ));
    let spread = (t.c - p.c).abs() / p.c;
    report.checks.push(Check::new(
        "deformed_rate",
        spread <= MAX_RATE_SPREAD,
        spread,
        MAX_RATE_SPREAD,
        format!("deformed c_fit = {} vs undeformed {}", t.c, p.c),
    ));
    Ok(report.finish())
}
