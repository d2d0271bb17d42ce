use std::fmt::Write as _;

use serde_json::{json, Value};

use super::config::{ExperimentConfig, Job, KernelPath, Method};
use super::CliError;
use crate::classical::{
    self, closed_form, solve_fundamental, verify_solution, ResidualReport, VerifyStatus,
};
use crate::evolve::{
    self, crank_nicolson, propagate_kernel, time_sliced_oracle, GaussianState, Grid, WavePacket,
};
use crate::io::fmt_f64;
use crate::kernel::{self, GaussianKernel};

/// Files and summary produced by one job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    /// (file name, contents), written in order.
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    /// Set when a validation check failed.
    pub failure: Option<String>,
}

pub fn run_job(config: &ExperimentConfig) -> Result<JobOutput, CliError> {
    match config.job {
        Job::KernelGrid => kernel_grid(config),
        Job::SolveF => solve_f(config),
        Job::Propagate => propagate(config),
        Job::Validate => validate(config),
        Job::OracleCompare => oracle_compare(config),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    // the last point is `hi` itself; lo + (hi − lo)·(n−1)/(n−1) can round past it
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn json_text(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s.into_bytes()
}

fn report_json(r: &ResidualReport) -> Value {
    json!({
        "status": r.status.to_string(),
        "window": [r.window.0, r.window.1],
        "h": r.h,
        "max_residual": r.max_residual,
        "max_residual_half_step": r.max_residual_half,
        "richardson_slope": r.slope,
        "residual_constant": r.constant,
        "worst_time": r.worst_time,
        "jump_mismatches": r.jump_mismatches
            .iter()
            .map(|(t, m)| json!({"t0": t, "mismatch": m}))
            .collect::<Vec<_>>(),
        "error": r.error,
    })
}

fn kernel_grid(c: &ExperimentConfig) -> Result<JobOutput, CliError> {
    let pair = solve_fundamental(&c.profile, c.t_a, c.t_b, c.tol)
        .map_err(|e| CliError::numeric("classical", e))?;
    let k = match c.kernel_path {
        KernelPath::Robust => GaussianKernel::robust(c.mass, &pair, c.t_b),
        KernelPath::Literal => match closed_form(&c.profile) {
            Some(f) if f.status() == VerifyStatus::Pass => {
                GaussianKernel::literal(c.mass, &c.profile, &f, c.t_a, c.t_b)
            }
            _ => GaussianKernel::literal(c.mass, &c.profile, &pair.combination(1.0, 0.0), c.t_a, c.t_b),
        },
    }
    .map_err(|e| CliError::numeric("kernel", e))?;

    let mut csv = String::from(kernel::KERNEL_CSV_HEADER);
    csv.push('\n');
    let qa = linspace(c.q_a_min, c.q_a_max, c.q_a_n);
    let qb = linspace(c.q_b_min, c.q_b_max, c.q_b_n);
    for &a in &qa {
        for &b in &qb {
            csv.push_str(&kernel::csv_row(a, c.t_a, b, c.t_b, &k.eval(a, b)));
            csv.push('\n');
        }
    }
    let (ca, cb, cc) = k.coefficients();
    Ok(JobOutput {
        files: vec![(format!("{}.csv", c.stem()), csv.into_bytes())],
        summary: json!({
            "path": match c.kernel_path { KernelPath::Robust => "robust", KernelPath::Literal => "literal" },
            "rows": qa.len() * qb.len(),
            "modulus": k.modulus(),
            "prefactor_phase": k.prefactor_phase(),
            "action_coefficients": {"q_a2": ca, "q_b2": cb, "q_a_q_b": cc},
            "caustic_flag": k.caustic().as_str(),
            "wronskian_drift": pair.wronskian_drift(),
        }),
        failure: None,
    })
}

fn solve_f(c: &ExperimentConfig) -> Result<JobOutput, CliError> {
    let pair = solve_fundamental(&c.profile, c.t_a, c.t_b, c.tol)
        .map_err(|e| CliError::numeric("classical", e))?;
    let mut csv = String::from("t,u,udot,v,vdot\n");
    for t in linspace(c.t_a, c.t_b, c.samples) {
        let s = pair.state(t).map_err(|e| CliError::numeric("classical", e))?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(s.u),
            fmt_f64(s.udot),
            fmt_f64(s.v),
            fmt_f64(s.vdot)
        );
    }
    let zeros = pair.v_zeros().map_err(|e| CliError::numeric("classical", e))?;
    let catalog = closed_form(&c.profile).map(|f| {
        json!({
            "formula": f.kind().formula(),
            "status": f.status().to_string(),
            "max_residual": f.audit().max_residual,
        })
    });
    Ok(JobOutput {
        files: vec![(format!("{}.csv", c.stem()), csv.into_bytes())],
        summary: json!({
            "samples": c.samples,
            "wronskian_drift": pair.wronskian_drift(),
            "v_zeros": zeros,
            "closed_form": catalog,
        }),
        failure: None,
    })
}

fn initial_packet(c: &ExperimentConfig) -> Result<WavePacket, CliError> {
    let grid = Grid::new(c.q_min, c.q_max, c.n_points).map_err(|e| CliError::numeric("evolve", e))?;
    let state =
        GaussianState::new(c.center, c.momentum, c.sigma).map_err(|e| CliError::numeric("evolve", e))?;
    WavePacket::gaussian(grid, &state, c.t_a).map_err(|e| CliError::numeric("evolve", e))
}

fn evolve_with(
    c: &ExperimentConfig,
    psi: &WavePacket,
    method: Method,
) -> Result<(WavePacket, Option<f64>), CliError> {
    let err = |e| CliError::numeric("evolve", e);
    Ok(match method {
        Method::Kernel => (propagate_kernel(psi, &c.profile, c.mass, c.t_b).map_err(err)?, None),
        Method::CrankNicolson => {
            let out = crank_nicolson(psi, &c.profile, c.mass, c.t_b, c.dt).map_err(err)?;
            (out.packet, out.warning.map(|w| w.indicator))
        }
        Method::TimeSliced => (
            time_sliced_oracle(psi, &c.profile, c.mass, c.t_b, c.n_slices).map_err(err)?,
            None,
        ),
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Kernel => "kernel",
        Method::CrankNicolson => "crank-nicolson",
        Method::TimeSliced => "time-sliced",
    }
}

fn propagate(c: &ExperimentConfig) -> Result<JobOutput, CliError> {
    let psi = initial_packet(c)?;
    let (out, warning) = evolve_with(c, &psi, c.method)?;
    let stem = c.stem();
    let meta = serde_json::to_value(out.metadata()).expect("metadata serializes");
    Ok(JobOutput {
        files: vec![
            (format!("{stem}.csv"), out.to_csv().into_bytes()),
            (format!("{stem}.json"), json_text(&meta)),
        ],
        summary: json!({
            "method": method_name(c.method),
            "norm_in": psi.norm(),
            "norm_out": out.norm(),
            "expectation_q2": out.expectation_q2(),
            "stability_warning": warning,
        }),
        failure: None,
    })
}

fn validate(c: &ExperimentConfig) -> Result<JobOutput, CliError> {
    let window = (c.t_a, c.t_b);
    let (subject, report) = match closed_form(&c.profile) {
        Some(f) => (
            json!({"kind": "closed_form", "formula": f.kind().formula()}),
            verify_solution(&c.profile, &f, window, c.h),
        ),
        None => {
            // no closed form: audit the numerical u instead
            let margin = 2.0 * c.h;
            let pair = classical::solve_fundamental(&c.profile, c.t_a - margin, c.t_b + margin, c.tol)
                .map_err(|e| CliError::numeric("classical", e))?;
            let u = pair.combination(1.0, 0.0);
            (
                json!({"kind": "numerical_u", "tol": c.tol}),
                verify_solution(&c.profile, &u, window, c.h),
            )
        }
    };
    let failure = (report.status == VerifyStatus::Fail).then(|| {
        let mut msg = format!(
            "residual check FAILED for {}: max residual {:.6e} at t = {:.6}, Richardson slope {:.3}",
            c.profile, report.max_residual, report.worst_time, report.slope
        );
        for (t, m) in &report.jump_mismatches {
            let _ = write!(msg, ", jump mismatch {m:.6e} at t0 = {t}");
        }
        if let Some(e) = &report.error {
            let _ = write!(msg, " ({e})");
        }
        msg
    });
    let body = json!({"profile": c.profile.to_string(), "subject": subject, "report": report_json(&report)});
    Ok(JobOutput {
        files: vec![(format!("{}.json", c.stem()), json_text(&body))],
        summary: json!({
            "status": report.status.to_string(),
            "max_residual": report.max_residual,
            "richardson_slope": report.slope,
            "jump_mismatches": report.jump_mismatches.iter().map(|(_, m)| *m).collect::<Vec<_>>(),
        }),
        failure,
    })
}

fn oracle_compare(c: &ExperimentConfig) -> Result<JobOutput, CliError> {
    let psi = initial_packet(c)?;
    let methods = [Method::Kernel, Method::CrankNicolson, Method::TimeSliced];
    let mut outs = Vec::new();
    for m in methods {
        outs.push(evolve_with(c, &psi, m)?.0);
    }
    let stem = c.stem();
    let mut files = Vec::new();
    for (m, out) in methods.iter().zip(&outs) {
        files.push((format!("{stem}.{}.csv", method_name(*m)), out.to_csv().into_bytes()));
    }
    let mut pairs = serde_json::Map::new();
    let mut worst: f64 = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cmp = evolve::compare(&outs[i], &outs[j]).map_err(|e| CliError::numeric("evolve", e))?;
        worst = worst.max(cmp.l2_error);
        pairs.insert(
            format!("{}_vs_{}", method_name(methods[i]), method_name(methods[j])),
            serde_json::to_value(cmp).expect("comparison serializes"),
        );
    }
    let summary = json!({"pairwise": pairs, "max_l2": worst, "agreement_tol": c.agreement_tol});
    files.push((format!("{stem}.json"), json_text(&summary)));
    let failure = (worst > c.agreement_tol).then(|| {
        format!(
            "oracle disagreement: max pairwise L2 {worst:.6e} exceeds {:.1e}",
            c.agreement_tol
        )
    });
    Ok(JobOutput {
        files,
        summary,
        failure,
    })
}
