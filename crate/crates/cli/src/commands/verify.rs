use resforge::analysis::{
    check_resonance, interval_bounds, resonance_failures, verify_structure, IntervalBound,
    ResonanceCheck, VerificationReport,
};
use resforge::bragg::{compare_profile, BraggComparison};
use resforge::forward::{default_grid, DEFAULT_TOL};
use resforge::gradient::gradient_cells;
use resforge::optimizer::{
    bangbang_metrics, extract_transitions, kkt_violation, refine_interfaces, BangBangMetrics,
};
use resforge::{find_resonances, newton_resonance, validate_structure, MembershipReport};
use serde::Serialize;

use super::{admissible, read_run, read_structure};
use crate::args::VerifyArgs;
use crate::error::{usage, CliError, CliResult};
use crate::output::write_json;
use crate::parse;

const NEWTON_MAX_ITER: usize = 50;
const BANGBANG_FRACTION: f64 = 0.99;
const QUARTER_WAVE_TOL: f64 = 0.1;

#[derive(Debug, Serialize)]
struct StructureReport {
    schema: u32,
    passed: bool,
    membership: Option<MembershipReport>,
    #[serde(flatten)]
    report: VerificationReport,
}

#[derive(Debug, Serialize)]
struct RunReport {
    schema: u32,
    passed: bool,
    j: Option<usize>,
    resonance: ResonanceCheck,
    membership: MembershipReport,
    bangbang: BangBangMetrics,
    kkt_violation: f64,
    /// Number of intervals `N` and `M = (N - 1) / 4` when it is an integer.
    intervals: Option<usize>,
    m: Option<usize>,
    interval_bounds: Vec<IntervalBound>,
    bragg: Option<BraggComparison>,
    failures: Vec<String>,
    warnings: Vec<String>,
}

fn membership_failures(m: &MembershipReport) -> Vec<String> {
    let mut f = Vec::new();
    if !m.within_bounds {
        f.push(format!("{} cells outside the material bounds", m.violations.len()));
    }
    if !m.length_matches {
        f.push("length differs from the admissible set".into());
    }
    if let Some(d) = m.asymmetry.filter(|d| *d != 0.0) {
        f.push(format!("structure is not mirror-symmetric (asymmetry {d:e})"));
    }
    f
}

fn finish(passed: bool, failures: &[String]) -> CliResult<()> {
    if passed {
        Ok(())
    } else {
        Err(CliError::Domain(format!("verification failed: {}", failures.join("; "))))
    }
}

fn verify_file(a: &VerifyArgs) -> CliResult<()> {
    let s = read_structure(a.structure.as_deref().expect("checked by caller"))?;
    let rect = parse::rect("rect", &a.rect)?;
    let membership = match (a.nmin, a.nmax) {
        (Some(lo), Some(hi)) => {
            let rho = rect.re_min.abs().max(rect.re_max.abs());
            Some(validate_structure(&s, &admissible(s.length(), lo, hi, rho, false)?))
        }
        (None, None) => None,
        _ => return Err(usage("--nmin and --nmax go together")),
    };
    let (nx, ny) = default_grid(&s, &rect);
    let set = find_resonances(&s, &rect, nx, ny, DEFAULT_TOL)?;
    let mut report = verify_structure(&s, &rect, &set)?;
    if let Some(m) = &membership {
        report.failures.extend(membership_failures(m));
    }
    let passed = report.passed();
    let failures = report.failures.clone();
    write_json(a.out.as_deref(), &StructureReport { schema: 1, passed, membership, report })?;
    finish(passed, &failures)
}

fn verify_run(a: &VerifyArgs) -> CliResult<()> {
    let run = read_run(a.run.as_deref().expect("checked by caller"))?;
    let (s, adm) = (&run.structure, &run.admissible);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();

    let pair = newton_resonance(s, run.omega, DEFAULT_TOL, NEWTON_MAX_ITER).map_err(|e| {
        CliError::Domain(format!("stored resonance {} does not converge: {e}", run.omega))
    })?;
    if (pair.omega - run.omega).norm() > 1e-6 * (1.0 + run.omega.norm()) {
        failures.push(format!("stored resonance {} moved to {}", run.omega, pair.omega));
    }
    let resonance = check_resonance(&pair)?;
    failures.extend(resonance_failures(&resonance));
    if pair.omega.re.abs() > adm.rho {
        failures.push(format!("|Re omega| = {} exceeds rho = {}", pair.omega.re.abs(), adm.rho));
    }

    let membership = validate_structure(s, adm);
    failures.extend(membership_failures(&membership));

    let tol = 1e-3 * (adm.n_plus - adm.n_minus);
    let bangbang = bangbang_metrics(s, adm, tol);
    if bangbang.fraction_at_bounds < BANGBANG_FRACTION {
        warnings.push(format!(
            "fraction of length at the bounds is {:.4}",
            bangbang.fraction_at_bounds
        ));
    }
    let kkt = kkt_violation(s, adm, &gradient_cells(&pair)?, tol);

    let transitions = extract_transitions(s, adm, None).ok();
    let intervals = transitions.as_ref().map(|t| t.count());
    let m = intervals.filter(|n| n % 4 == 1).map(|n| (n - 1) / 4);
    match intervals {
        None => warnings.push("profile is not two-level; interval checks skipped".into()),
        Some(n) if m.is_none() => warnings.push(format!("{n} intervals is not of the form 4M + 1")),
        _ => {}
    }

    let (mut bounds, mut bragg) = (Vec::new(), None);
    if transitions.is_some() {
        match refine_interfaces(s, adm, pair.omega, 200) {
            Ok(r) => {
                bounds = interval_bounds(&r.pair, &r.transitions)?;
                for b in bounds.iter().filter(|b| !b.holds()) {
                    failures.push(format!(
                        "interval {} has length {} below its bound {}",
                        b.index, b.lhs, b.rhs
                    ));
                }
                match compare_profile(&r.pair, &r.transitions, adm.n_plus, adm.n_minus) {
                    Ok(c) => {
                        if c.max_deviation > QUARTER_WAVE_TOL {
                            warnings.push(format!(
                                "intervals deviate from quarter-wave widths by up to {:.3}",
                                c.max_deviation
                            ));
                        }
                        if c.center_within_bound() == Some(false) {
                            warnings.push(format!(
                                "center interval {:.6} is not below 2 d_plus = {:.6}",
                                c.center_width.unwrap_or(f64::NAN),
                                c.center_bound
                            ));
                        }
                        bragg = Some(c);
                    }
                    Err(e) => warnings.push(format!("quarter-wave comparison skipped: {e}")),
                }
            }
            Err(e) => warnings.push(format!("interface refinement failed: {e}")),
        }
    }

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let passed = failures.is_empty();
    let report = RunReport {
        schema: 1,
        passed,
        j: run.j,
        resonance,
        membership,
        bangbang,
        kkt_violation: kkt,
        intervals,
        m,
        interval_bounds: bounds,
        bragg,
        failures: failures.clone(),
        warnings,
    };
    write_json(a.out.as_deref(), &report)?;
    finish(passed, &failures)
}

pub fn run(a: VerifyArgs) -> CliResult<()> {
    match (&a.structure, &a.run) {
        (Some(_), None) => verify_file(&a),
        (None, Some(_)) => {
            if a.nmin.is_some() || a.nmax.is_some() {
                return Err(usage("--nmin and --nmax apply to --structure; a run carries its own bounds"));
            }
            verify_run(&a)
        }
        (None, None) => Err(usage("give --structure or --run")),
        (Some(_), Some(_)) => Err(usage("--structure and --run exclude each other")),
    }
}
