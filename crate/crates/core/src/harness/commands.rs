//! Command dispatch. Exit codes: 0 pass, 1 violation, 2 input error.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::output::{self, to_canonical_json};
use super::scenario::{Built, Scenario};
use crate::decoherence::{beta, check_axioms, Backend, DecoherenceFunctional};
use crate::error::{Error, Result};
use crate::histories::{consistency_report, history_consistency_report};
use crate::ils::{extract_ils, polarized_operator, verify_ils_conditions};
use crate::linalg::{kron_trace, trace_norm, ComplexMatrix, Vector, ZERO};
use crate::probes::tensor_bound_probe;
use crate::sampling::{random_projection_any_rank, random_tensor_sum, rng};
use crate::tracial::{
    build_tracial_operator, evaluate_double_sum, hermitian_form_decomposition, product_diagonal, pure_state_m,
    reconstruct_from_product_diagonal, TracialConfig,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub const CSV_HEADER: &str = "dim,trace_norm,sup_beta_rank_one,elapsed_ms";

/// Largest dimension swept when `--dims` is absent.
const DEFAULT_SWEEP_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Command {
    CheckAxioms,
    ExtractIls,
    VerifyConditions,
    Decompose,
    Tracial,
    Sweep,
    DemoPureState,
    Consistency,
    Reconstruct,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::CheckAxioms,
        Command::ExtractIls,
        Command::VerifyConditions,
        Command::Decompose,
        Command::Tracial,
        Command::Sweep,
        Command::DemoPureState,
        Command::Consistency,
        Command::Reconstruct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::CheckAxioms => "check-axioms",
            Command::ExtractIls => "extract-ils",
            Command::VerifyConditions => "verify-conditions",
            Command::Decompose => "decompose",
            Command::Tracial => "tracial",
            Command::Sweep => "sweep",
            Command::DemoPureState => "demo-pure-state",
            Command::Consistency => "consistency",
            Command::Reconstruct => "reconstruct",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{name}`")))
    }

    fn default_samples(self) -> usize {
        match self {
            Command::CheckAxioms => 200,
            Command::Tracial | Command::Sweep => 1000,
            _ => 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub block_rank: Option<usize>,
    pub tolerance: Option<f64>,
    pub format: Format,
    /// Record wall-clock timings; output is then no longer reproducible.
    pub timings: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub command: &'static str,
    pub verdict: String,
    pub exit_code: i32,
    pub seed: u64,
    pub samples: usize,
    pub scenario_hash: String,
    pub records: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub record: ResultRecord,
    /// Per-dimension table, for `sweep` only.
    pub csv: Option<String>,
}

impl Outcome {
    pub fn json(&self) -> String {
        let mut s = to_canonical_json(&self.record);
        s.push('\n');
        s
    }

    /// The primary output in the requested format; JSON when no table exists.
    pub fn render(&self, format: Format) -> String {
        match (format, &self.csv) {
            (Format::Csv, Some(csv)) => csv.clone(),
            _ => self.json(),
        }
    }
}

/// Error record for input that never reached a command.
pub fn input_error(command: &'static str, err: &Error) -> Outcome {
    Outcome {
        exit_code: EXIT_INPUT,
        record: ResultRecord {
            command,
            verdict: "input_error".into(),
            exit_code: EXIT_INPUT,
            seed: 0,
            samples: 0,
            scenario_hash: String::new(),
            records: Vec::new(),
            summary: None,
            error: Some(err.to_string()),
            timings_ms: None,
        },
        csv: None,
    }
}

fn exit_for(err: &Error) -> i32 {
    match err {
        Error::NotTraciallyBounded { .. } | Error::ConditionViolation { .. } | Error::NonHermitianGram { .. } => {
            EXIT_VIOLATION
        }
        _ => EXIT_INPUT,
    }
}

struct Ctx<'a> {
    built: &'a Built,
    scenario: &'a Scenario,
    flags: &'a Flags,
    seed: u64,
    samples: usize,
}

struct Body {
    pass: bool,
    verdict: Option<String>,
    records: Vec<Value>,
    summary: Option<Value>,
    csv: Option<String>,
}

impl Body {
    fn single(pass: bool, record: Value) -> Self {
        Self {
            pass,
            verdict: None,
            records: vec![record],
            summary: None,
            csv: None,
        }
    }
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run_command(cmd: Command, scenario: &Scenario, flags: &Flags) -> Outcome {
    let start = Instant::now();
    let seed = flags.seed.unwrap_or(scenario.seed);
    let samples = flags.samples.unwrap_or_else(|| cmd.default_samples());
    let hash = scenario.hash();
    let result = scenario.build().and_then(|built| {
        if flags.tolerance.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
            return Err(Error::InvalidArgument("--tolerance must be finite and non-negative".into()));
        }
        let ctx = Ctx {
            built: &built,
            scenario,
            flags,
            seed,
            samples,
        };
        dispatch(cmd, &ctx)
    });
    let timings_ms = flags.timings.then(|| start.elapsed().as_secs_f64() * 1e3);

    let (exit_code, verdict, records, summary, csv, error) = match result {
        Ok(body) => {
            let code = if body.pass { EXIT_PASS } else { EXIT_VIOLATION };
            let verdict = body
                .verdict
                .unwrap_or_else(|| if body.pass { "pass" } else { "violation" }.into());
            (code, verdict, body.records, body.summary, body.csv, None)
        }
        Err(e) => {
            let code = exit_for(&e);
            let verdict = if code == EXIT_VIOLATION { "violation" } else { "input_error" };
            (code, verdict.into(), Vec::new(), None, None, Some(e.to_string()))
        }
    };
    Outcome {
        exit_code,
        record: ResultRecord {
            command: cmd.name(),
            verdict,
            exit_code,
            seed,
            samples,
            scenario_hash: hash,
            records,
            summary,
            error,
            timings_ms,
        },
        csv,
    }
}

fn dispatch(cmd: Command, ctx: &Ctx<'_>) -> Result<Body> {
    match cmd {
        Command::CheckAxioms => cmd_check_axioms(ctx),
        Command::ExtractIls => cmd_extract_ils(ctx),
        Command::VerifyConditions => cmd_verify_conditions(ctx),
        Command::Decompose => cmd_decompose(ctx),
        Command::Tracial => cmd_tracial(ctx),
        Command::Sweep => cmd_sweep(ctx),
        Command::DemoPureState => cmd_demo_pure_state(ctx),
        Command::Consistency => cmd_consistency(ctx),
        Command::Reconstruct => cmd_reconstruct(ctx),
    }
}

fn d<'a>(ctx: &Ctx<'a>) -> &'a DecoherenceFunctional {
    &ctx.built.functional
}

fn tol(ctx: &Ctx<'_>, default: f64) -> f64 {
    ctx.flags.tolerance.unwrap_or(default)
}

fn cmd_check_axioms(ctx: &Ctx<'_>) -> Result<Body> {
    let report = check_axioms(d(ctx), ctx.samples, ctx.seed, tol(ctx, ctx.scenario.tolerances.axioms));
    Ok(Body::single(report.passed(), value(&report)))
}

fn cmd_extract_ils(ctx: &Ctx<'_>) -> Result<Body> {
    let x = extract_ils(d(ctx))?;
    let conditions = verify_ils_conditions(&x.x_op, ctx.samples, ctx.seed, tol(ctx, ctx.scenario.tolerances.conditions))?;
    let mut record = value(&x);
    record["x"] = matrix_value(&x.x_op);
    record["conditions"] = value(&conditions);
    Ok(Body::single(conditions.passed(), record))
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    let (re, im) = m.to_re_im();
    json!({ "re": re, "im": im })
}

fn cmd_verify_conditions(ctx: &Ctx<'_>) -> Result<Body> {
    let x = match d(ctx).backend() {
        Backend::Operator(x) => x.clone(),
        _ => extract_ils(d(ctx))?.x_op,
    };
    let report = verify_ils_conditions(&x, ctx.samples, ctx.seed, tol(ctx, ctx.scenario.tolerances.conditions))?;
    Ok(Body::single(report.passed(), value(&report)))
}

fn cmd_decompose(ctx: &Ctx<'_>) -> Result<Body> {
    let f = d(ctx);
    let dec = hermitian_form_decomposition(f)?;
    let mut r = rng(ctx.seed);
    let mut residual = 0.0_f64;
    for k in 0..ctx.samples {
        let s = random_tensor_sum(&mut r, f.dim(), 1 + k % 3);
        residual = residual.max((dec.beta(&s)? - beta(f, &s)?).norm());
    }
    let tolerance = tol(ctx, ctx.scenario.tolerances.fidelity);
    let sizes_ok = dec.x_family.len() + dec.y_family.len() <= f.dim() * f.dim();
    let record = json!({
        "x_family_size": dec.x_family.len(),
        "y_family_size": dec.y_family.len(),
        "signature": dec.signature,
        "fidelity_residual": residual,
        "tolerance": tolerance,
    });
    Ok(Body::single(sizes_ok && residual <= tolerance, record))
}

fn cmd_tracial(ctx: &Ctx<'_>) -> Result<Body> {
    let f = d(ctx);
    let config = TracialConfig {
        samples: ctx.samples,
        seed: ctx.seed,
        bound: None,
    };
    let m = build_tracial_operator(f, &config)?;
    let n = f.dim();
    let mut r = rng(crate::sampling::derive_seed(ctx.seed, 1));
    let mut pair_residual = 0.0_f64;
    let mut sum_residual = 0.0_f64;
    let block_ranks: Vec<usize> = match ctx.flags.block_rank {
        Some(b) if b == 0 => return Err(Error::InvalidArgument("--block-rank must be at least 1".into())),
        Some(b) => vec![b],
        None => vec![1, 2, n],
    };
    for k in 0..ctx.samples.min(200) {
        let p = random_projection_any_rank(&mut r, n);
        let q = random_projection_any_rank(&mut r, n);
        let direct = kron_trace(p.matrix(), q.matrix(), &m.m_op)?;
        pair_residual = pair_residual.max((direct - f.evaluate(&p, &q)?).norm());
        if k < 20 {
            for &b in &block_ranks {
                sum_residual = sum_residual.max((evaluate_double_sum(&m, &p, &q, b)? - direct).norm());
            }
        }
    }
    let tolerance = tol(ctx, ctx.scenario.tolerances.fidelity);
    let record = json!({
        "probe_sup": m.probe_sup,
        "operator_norm": m.operator_norm,
        "pair_residual": pair_residual,
        "double_sum_residual": sum_residual,
        "block_ranks": block_ranks,
        "tolerance": tolerance,
    });
    Ok(Body::single(pair_residual <= tolerance && sum_residual <= tolerance, record))
}

fn sweep_dims(ctx: &Ctx<'_>) -> Vec<usize> {
    ctx.flags.dims.clone().unwrap_or_else(|| {
        let lo = ctx.scenario.dimension.max(2);
        (lo..=lo.max(DEFAULT_SWEEP_MAX)).collect()
    })
}

fn cmd_sweep(ctx: &Ctx<'_>) -> Result<Body> {
    let f = d(ctx);
    let dims = sweep_dims(ctx);
    let mut report = tensor_bound_probe(|n| f.resize(n), &dims, ctx.samples, ctx.seed)?;
    if !ctx.flags.timings {
        report.elapsed_ms.iter_mut().for_each(|t| *t = 0.0);
    }
    let tolerance = tol(ctx, ctx.scenario.tolerances.conditions);
    let pass = report
        .normalization_residuals
        .iter()
        .chain(&report.swap_adjoint_residuals)
        .all(|&r| r <= tolerance);

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut records = Vec::new();
    for (k, &n) in report.dims.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            n,
            output::float(report.trace_norms[k]),
            output::float(report.sup_beta_rank_one[k]),
            output::float(report.elapsed_ms[k])
        ));
        records.push(json!({
            "dim": n,
            "trace_norm": report.trace_norms[k],
            "sup_beta_rank_one": report.sup_beta_rank_one[k],
            "elapsed_ms": report.elapsed_ms[k],
            "normalization_residual": report.normalization_residuals[k],
            "swap_adjoint_residual": report.swap_adjoint_residuals[k],
        }));
    }
    let summary = json!({
        "growth_slope": report.growth_slope,
        "below_theorem_dim": report.below_theorem_dim,
        "conditions_pass": pass,
        "tolerance": tolerance,
    });
    Ok(Body {
        pass,
        verdict: Some(report.verdict.as_str().into()),
        records,
        summary: Some(summary),
        csv: Some(csv),
    })
}

fn cmd_demo_pure_state(ctx: &Ctx<'_>) -> Result<Body> {
    let psi = match d(ctx).backend() {
        Backend::PureState(psi) => psi.clone(),
        _ => Vector::basis(ctx.scenario.dimension, 0),
    };
    let pu = pure_state_m(&psi)?;
    let check = pu.verify(ctx.samples, ctx.seed)?;
    let family = DecoherenceFunctional::pure_state(psi)?;
    let dims = sweep_dims(ctx);
    let mut growth = Vec::with_capacity(dims.len());
    for &n in &dims {
        let x = polarized_operator(&family.resize(n)?);
        growth.push(json!({ "dim": n, "trace_norm": trace_norm(&x)? }));
    }
    let pass = check.partial_isometry_residual <= 1e-10
        && (check.trace_re - 1.0).abs() <= 1e-10
        && check.trace_im.abs() <= 1e-10
        && check.beta_residual <= 1e-9;
    let mut record = value(&check);
    record["trace_norm_growth"] = Value::Array(growth);
    Ok(Body::single(pass, record))
}

fn cmd_consistency(ctx: &Ctx<'_>) -> Result<Body> {
    let tolerance = tol(ctx, ctx.scenario.tolerances.consistency);
    let criterion = ctx.scenario.criterion;
    let report = match (&ctx.built.model, &ctx.built.histories) {
        (_, Some(set)) => consistency_report(d(ctx), set, tolerance, criterion)?,
        (Some(model), None) => history_consistency_report(model, tolerance, criterion)?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "consistency needs a class_operator functional or a `histories` list".into(),
            ))
        }
    };
    Ok(Body::single(report.consistent, value(&report)))
}

fn cmd_reconstruct(ctx: &Ctx<'_>) -> Result<Body> {
    let f = d(ctx);
    let n = f.dim();
    let x = polarized_operator(f);
    let rec = reconstruct_from_product_diagonal(product_diagonal(&x), n);
    let zero = reconstruct_from_product_diagonal(|_, _| ZERO, n);
    let residual = rec.distance(&x);
    let tolerance = tol(ctx, ctx.scenario.tolerances.fidelity) * x.frobenius_norm().max(1.0);
    let record = json!({
        "reconstruction_residual": residual,
        "zero_oracle_norm": zero.frobenius_norm(),
        "tolerance": tolerance,
    });
    Ok(Body::single(residual <= tolerance && zero.frobenius_norm() == 0.0, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::parse_scenario;

    fn pure(dim: usize) -> Scenario {
        let mut re = vec![0; dim];
        re[0] = 1;
        parse_scenario(&format!(
            r#"{{"dimension": {dim}, "seed": 3, "functional": {{"kind": "pure_state", "psi": {{"re": {re:?}}}}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()).unwrap(), c);
        }
        assert!(Command::parse("nope").is_err());
    }

    #[test]
    fn check_axioms_passes_on_pure_state() {
        let out = run_command(Command::CheckAxioms, &pure(3), &Flags::default());
        assert_eq!(out.exit_code, EXIT_PASS);
        let r = &out.record.records[0];
        assert!(r["hermiticity_residual"].as_f64().unwrap() <= 1e-9);
        assert!(r["normalization_residual"].as_f64().unwrap() <= 1e-9);
    }

    #[test]
    fn extract_ils_rejects_dimension_two() {
        let out = run_command(Command::ExtractIls, &pure(2), &Flags::default());
        assert_eq!(out.exit_code, EXIT_INPUT);
        assert!(out.record.error.unwrap().contains("theorems require dimension ≥ 3"));
    }

    #[test]
    fn sweep_trace_norm_column() {
        let flags = Flags {
            dims: Some((2..=8).collect()),
            samples: Some(200),
            format: Format::Csv,
            ..Flags::default()
        };
        let out = run_command(Command::Sweep, &pure(2), &flags);
        assert_eq!(out.exit_code, EXIT_PASS);
        assert_eq!(out.record.verdict, "divergence_evidence");
        let csv = out.render(Format::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for (n, line) in (2..=8).zip(lines) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[0].parse::<usize>().unwrap(), n);
            assert!((cols[1].parse::<f64>().unwrap() - n as f64).abs() < 1e-8);
            assert_eq!(cols[3], "0.0000000000000000e0");
        }
    }

    #[test]
    fn output_is_deterministic() {
        for c in Command::ALL {
            let a = run_command(c, &pure(3), &Flags::default()).json();
            let b = run_command(c, &pure(3), &Flags::default()).json();
            assert_eq!(a, b, "{}", c.name());
        }
    }
}
