//! Report building for the `esd` command line: state loading, time grids,
//! CSV and JSON rendering. Everything here is deterministic and free of I/O
//! apart from reading state files, so the binary stays a thin dispatcher.

use std::fmt::Write as _;

use serde::Serialize;

use esd_core::classify::{predict_esd, subspace, EsdVerdict};
use esd_core::dynamics::{esd_time, EsdOutcome, EsdTimeResult, Trajectory, HORIZON_WARN_LAMBDA};
use esd_core::entanglement::concurrence;
use esd_core::qstate::{preset, MatrixFile};
use esd_core::verify::{AdditivityWitness, VerifyReport};
use esd_core::{ChannelKind, DensityMatrix, Error, NoiseRates};

pub const EVOLVE_HEADER: &str = "t,concurrence,Lambda,rho11,rho22,rho33,rho44,purity";
pub const SWEEP_HEADER: &str = "gamma1,gamma2,outcome,t_star";

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation (exit 1).
    Usage(String),
    /// Input that parses but is not acceptable (exit 2).
    Validation(String),
    /// The verification battery found a violation (exit 3).
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// A preset name, or a path (ending in `.json` or containing a directory
/// separator) to a file in the [`MatrixFile`] layout.
pub fn load_state(source: &str) -> Result<DensityMatrix, CliError> {
    if source.ends_with(".json") || source.contains(std::path::MAIN_SEPARATOR) || source.contains('/') {
        let text = std::fs::read_to_string(source)
            .map_err(|e| CliError::Validation(format!("cannot read state file {source}: {e}")))?;
        let file: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad state file {source}: {e}")))?;
        Ok(file.into_density_matrix()?)
    } else {
        Ok(preset(source)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Start of the geometric grid relative to `t_max`.
pub const GEOMETRIC_START: f64 = 1e-6;

/// `points` times from 0 to `t_max`. The geometric grid is 0 followed by
/// log-spaced times from `t_max·1e-6` to `t_max`.
pub fn time_grid(t_max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Validation("--points must be at least 1".into()));
    }
    if !t_max.is_finite() || t_max < 0.0 {
        return Err(CliError::Validation(format!("--tmax must be finite and non-negative, got {t_max}")));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    if t_max == 0.0 {
        return Err(CliError::Validation("--tmax 0 allows only --points 1".into()));
    }
    let last = (points - 1) as f64;
    let grid = match spacing {
        Spacing::Linear => (0..points)
            .map(|k| if k == points - 1 { t_max } else { t_max * k as f64 / last })
            .collect(),
        Spacing::Geometric => {
            let mut g = vec![0.0];
            let n = points - 1;
            for k in 0..n {
                let t = if n == 1 || k == n - 1 {
                    t_max
                } else {
                    t_max * GEOMETRIC_START.powf(1.0 - k as f64 / (n - 1) as f64)
                };
                g.push(t);
            }
            g
        }
    };
    Ok(grid)
}

/// Trajectory as CSV under [`EVOLVE_HEADER`], numbers in shortest
/// round-trip form.
pub fn evolve_csv(tr: &Trajectory) -> String {
    let mut out = String::from(EVOLVE_HEADER);
    out.push('\n');
    for (k, &t) in tr.times.iter().enumerate() {
        let rho = &tr.states[k];
        let c = &tr.lambdas[k];
        let d = rho.diagonal();
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            t,
            c.concurrence,
            c.lambda_cap,
            d[0],
            d[1],
            d[2],
            d[3],
            rho.purity()
        );
    }
    out
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    concurrence: f64,
    #[serde(rename = "Lambda")]
    lambda: f64,
    rho11: f64,
    rho22: f64,
    rho33: f64,
    rho44: f64,
    purity: f64,
}

pub fn evolve_json(tr: &Trajectory) -> serde_json::Value {
    let rows: Vec<EvolveRow> = tr
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let d = tr.states[k].diagonal();
            EvolveRow {
                t,
                concurrence: tr.lambdas[k].concurrence,
                lambda: tr.lambdas[k].lambda_cap,
                rho11: d[0],
                rho22: d[1],
                rho33: d[2],
                rho44: d[3],
                purity: tr.states[k].purity(),
            }
        })
        .collect();
    serde_json::json!({ "channel": tr.kind.short_name(), "rows": rows })
}

/// Verdict string, with "undecided" where no analytic rule applies.
fn prediction(rho: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates) -> Result<Option<EsdVerdict>, CliError> {
    match predict_esd(rho, kind, rates) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undecided { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn verdict_str(v: &Option<EsdVerdict>) -> &'static str {
    v.as_ref().map_or("undecided", |v| v.verdict.as_str())
}

pub fn classify_json(rho: &DensityMatrix, rates: &NoiseRates) -> Result<serde_json::Value, CliError> {
    let label = subspace(rho);
    let phase = prediction(rho, ChannelKind::PhaseDamping, rates)?;
    let amplitude = prediction(rho, ChannelKind::AmplitudeDamping, rates)?;
    let composite = prediction(rho, ChannelKind::Composite, rates)?;
    let c0 = concurrence(rho)?;
    Ok(serde_json::json!({
        "subspace": {
            "vanishing": label.vanishing_labels(),
            "canonical": label.canonical.map(|s| s.to_string()),
        },
        "predictions": {
            "phase": verdict_str(&phase),
            "amplitude": verdict_str(&amplitude),
            "composite": verdict_str(&composite),
        },
        "concurrence_t0": c0.concurrence,
    }))
}

pub fn outcome_str(outcome: &EsdOutcome) -> &'static str {
    match outcome {
        EsdOutcome::FiniteCrossing { .. } => "finite",
        EsdOutcome::NoCrossingWithinHorizon { .. } => "no-crossing",
        EsdOutcome::InitiallySeparable => "initially-separable",
    }
}

fn esd_result_json(r: &EsdTimeResult) -> serde_json::Value {
    serde_json::json!({
        "outcome": outcome_str(&r.outcome),
        "t_star": r.t_star(),
        "horizon": r.horizon,
        "lambda_at_horizon": r.lambda_at_horizon,
    })
}

pub fn esd_time_json(rho: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates) -> Result<serde_json::Value, CliError> {
    let found = esd_time(rho, kind, rates)?;
    let predicted = prediction(rho, kind, rates)?;
    let mut report = esd_result_json(&found);
    let obj = report.as_object_mut().expect("object");
    obj.insert("channel".into(), kind.short_name().into());
    obj.insert("prediction".into(), verdict_str(&predicted).into());
    obj.insert("rule".into(), predicted.map(|v| v.reason.as_str()).into());
    let warn = !found.is_finite_crossing()
        && found.outcome != EsdOutcome::InitiallySeparable
        && found.lambda_at_horizon > HORIZON_WARN_LAMBDA;
    let warning = warn.then(|| {
        format!(
            "Λ is still {:e} at the horizon; entanglement may outlive the search window",
            found.lambda_at_horizon
        )
    });
    obj.insert("warning".into(), warning.into());
    Ok(report)
}

/// Comma-separated list of non-negative rates.
pub fn parse_rate_list(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: '{p}' is not a number")))
        })
        .collect()
}

/// One sweep row: outcome and crossing time (blank unless finite).
fn sweep_row(rho: &DensityMatrix, kind: ChannelKind, g1: f64, g2: f64) -> Result<(&'static str, Option<f64>), CliError> {
    let rates = NoiseRates::symmetric(g1, g2)?;
    match esd_time(rho, kind, &rates) {
        Ok(r) => Ok(match r.outcome {
            EsdOutcome::FiniteCrossing { t_star } => ("finite", Some(t_star)),
            EsdOutcome::NoCrossingWithinHorizon { .. } => ("no-crossing", None),
            EsdOutcome::InitiallySeparable => ("separable", None),
        }),
        // no noise acts: the state is frozen
        Err(Error::AllRatesZero(_)) => {
            let entangled = concurrence(rho)?.lambda_cap > esd_core::dynamics::TOL_ROOT;
            Ok((if entangled { "no-crossing" } else { "separable" }, None))
        }
        Err(e) => Err(e.into()),
    }
}

/// Sweep over symmetric `(Γ₁, Γ₂)`, row-major with `Γ₁` outer.
pub fn sweep_csv(rho: &DensityMatrix, kind: ChannelKind, g1s: &[f64], g2s: &[f64]) -> Result<String, CliError> {
    if g1s.is_empty() || g2s.is_empty() {
        return Err(CliError::Validation("empty sweep grid: give at least one value to --g1 and --g2".into()));
    }
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for &g1 in g1s {
        for &g2 in g2s {
            let (outcome, t) = sweep_row(rho, kind, g1, g2)?;
            let t = t.map(|t| format!("{t:?}")).unwrap_or_default();
            let _ = writeln!(out, "{g1:?},{g2:?},{outcome},{t}");
        }
    }
    Ok(out)
}

fn witness_json(w: &AdditivityWitness) -> serde_json::Value {
    serde_json::json!({
        "sample_index": w.sample_index,
        "state": w.state.to_file(),
        "rates": {
            "g1a": w.rates.gamma1_a, "g1b": w.rates.gamma1_b,
            "g2a": w.rates.gamma2_a, "g2b": w.rates.gamma2_b,
        },
        "phase": esd_result_json(&w.phase),
        "amplitude": esd_result_json(&w.amplitude),
        "composite": esd_result_json(&w.composite),
        "composite_t_star": w.composite.t_star(),
    })
}

fn witness_text(w: &AdditivityWitness) -> String {
    let mut out = format!("additivity witness (sample {}):\n", w.sample_index);
    for row in w.state.to_file().matrix {
        let cells: Vec<String> = row.iter().map(|[re, im]| format!("{re:?}{im:+?}i")).collect();
        let _ = writeln!(out, "  [{}]", cells.join(", "));
    }
    for (name, r) in [("phase", &w.phase), ("amplitude", &w.amplitude), ("composite", &w.composite)] {
        let _ = writeln!(out, "  {name:<9} {}", outcome_str(&r.outcome));
    }
    let _ = writeln!(out, "  composite t* = {:?}", w.composite.t_star().unwrap_or(f64::NAN));
    out
}

pub fn verify_json(report: &VerifyReport) -> serde_json::Value {
    let suites: Vec<_> = report
        .suites
        .iter()
        .map(|s| {
            serde_json::json!({
                "name": s.name,
                "passed": s.passed(),
                "checks": s.checks,
                "failures": s.failures,
                "max_deviation": s.max_deviation,
                "tolerance": s.tolerance,
                "counterexamples": s.counterexamples,
            })
        })
        .collect();
    serde_json::json!({
        "seed": report.seed,
        "n_samples": report.n_samples,
        "prng": report.prng,
        "passed": report.passed(),
        "suites": suites,
        "additivity": report.additivity.as_ref().map(witness_json),
    })
}

pub fn verify_text(report: &VerifyReport) -> String {
    let mut out = format!("seed {} samples {} prng {}\n", report.seed, report.n_samples, report.prng);
    for s in &report.suites {
        let _ = writeln!(
            out,
            "{:<22} {} checks={} max_deviation={:e} tolerance={:e}",
            s.name,
            if s.passed() { "PASS" } else { "FAIL" },
            s.checks,
            s.max_deviation,
            s.tolerance
        );
        for c in &s.counterexamples {
            let _ = writeln!(out, "    {c}");
        }
    }
    if let Some(w) = &report.additivity {
        out.push_str(&witness_text(w));
    }
    let _ = writeln!(out, "{}", if report.passed() { "all suites passed" } else { "verification FAILED" });
    out
}

pub fn additivity_json(seed: u64, budget: usize, w: Option<&AdditivityWitness>) -> serde_json::Value {
    serde_json::json!({
        "seed": seed,
        "budget": budget,
        "found": w.is_some(),
        "witness": w.map(witness_json),
    })
}

pub fn additivity_text(seed: u64, budget: usize, w: Option<&AdditivityWitness>) -> String {
    match w {
        Some(w) => witness_text(w),
        None => format!("no additivity witness among {budget} samples (seed {seed})\n"),
    }
}
