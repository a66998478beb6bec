use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};
use sidon_fq::counts::{r_count, s_star, t_count, t_count_u};
use sidon_fq::experiments::{experiment_concentration, experiment_thick};
use sidon_fq::format::{read_binary, read_text, write_binary, write_text};
use sidon_fq::pairing::{diff_pairing, sum_pair_count, sum_pairing};
use sidon_fq::prob::{
    event_dist_exact, event_prob_bounds, lambda_bounds, lambda_stats, m_star_asymptotic, Schedule,
};
use sidon_fq::sampler::sample_sequence;
use sidon_fq::validate::run_oracles;
use sidon_fq::{CountKind, ExperimentReport, FieldSpec, SequenceSample};

use crate::config::{self, usage, FileConfig};
use crate::{Failure, FieldArgs, ReportFormat};

/// Largest `d` expanded by default for exact laws.
const DEFAULT_D_CAP: usize = 200;

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    n_index: Option<u64>,
    /// constant:V, thick:EPS, thm01, sqrt_log:ALPHA or power_log:ALPHA,C,C',J0,PREFIX
    #[arg(long)]
    schedule: Option<String>,
    /// Single d for `prob bounds`.
    #[arg(long)]
    d: Option<usize>,
    /// Largest d reported.
    #[arg(long)]
    d_max: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    n_index: Option<u64>,
    /// sum or diff
    #[arg(long)]
    kind: Option<String>,
    /// Sequence file; without it a sequence is sampled from --schedule and --seed.
    #[arg(long)]
    input: Option<PathBuf>,
    /// binary or text
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    max_index: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// binary or text (default text on stdout, binary for files)
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConcentrationArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    n_min: Option<u32>,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ThickArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_index: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn print_json(value: &Value) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn field_echo(spec: &FieldSpec) -> Value {
    json!({ "p": spec.p(), "s": spec.s(), "q": spec.q() })
}

fn target(flag: Option<u64>, cfg: &FileConfig) -> Result<u64, Failure> {
    let n = config::require(flag, cfg.n_index, "n-index")?;
    if n == 0 {
        return Err(usage("--n-index must be at least 1").into());
    }
    Ok(n)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn pair(cfg: &FileConfig, field: &FieldArgs, n_index: Option<u64>) -> Result<(), Failure> {
    let spec = config::field(field.p, field.s, cfg)?;
    let n = target(n_index, cfg)?;
    let result = sum_pairing(&spec, n)?;
    print_json(&json!({
        "config": { "command": "pair", "field": field_echo(&spec), "n_index": n },
        "result": to_value(&result),
    }))
}

pub fn diff_pair(
    cfg: &FileConfig,
    field: &FieldArgs,
    n_index: Option<u64>,
    u: Option<u64>,
) -> Result<(), Failure> {
    let spec = config::field(field.p, field.s, cfg)?;
    let n = target(n_index, cfg)?;
    let u = config::require(u, cfg.u, "u")?;
    let result = diff_pairing(&spec, n, u)?;
    print_json(&json!({
        "config": { "command": "diff-pair", "field": field_echo(&spec), "n_index": n, "u": u },
        "result": to_value(&result),
    }))
}

fn parse_kind(text: &str) -> Result<CountKind, Failure> {
    match text {
        "sum" => Ok(CountKind::Sum),
        "diff" => Ok(CountKind::Diff),
        _ => Err(usage(format!("--kind must be sum or diff, got `{text}`")).into()),
    }
}

fn read_sequence(
    path: &Path,
    format: Option<&str>,
) -> Result<(FieldSpec, SequenceSample), Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::Runtime(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    Ok(match format.unwrap_or("binary") {
        "binary" => read_binary(reader)?,
        "text" => read_text(reader)?,
        other => return Err(usage(format!("unknown sequence format `{other}`")).into()),
    })
}

pub fn count(cfg: &FileConfig, args: &CountArgs) -> Result<(), Failure> {
    let n = target(args.n_index, cfg)?;
    let kind = match args.kind.as_deref().or(cfg.kind.map(|k| match k {
        CountKind::Sum => "sum",
        CountKind::Diff => "diff",
    })) {
        Some(k) => parse_kind(k)?,
        None => CountKind::Sum,
    };
    let input = args.input.clone().or(cfg.input.clone());
    let (spec, seq, source) = match input {
        Some(path) => {
            let format = args.format.as_deref().or(cfg.format.as_deref());
            let (spec, seq) = read_sequence(&path, format)?;
            if args.field.p.is_some_and(|p| p != spec.p())
                || args.field.s.is_some_and(|s| s != spec.s())
            {
                return Err(usage("--p/--s disagree with the sequence file").into());
            }
            (spec, seq, json!({ "input": path }))
        }
        None => {
            let spec = config::field(args.field.p, args.field.s, cfg)?;
            let (text, sched) = config::schedule(args.schedule.clone(), cfg, &spec)?;
            let seed = args.seed.or(cfg.seed).unwrap_or(0);
            let degree = spec.poly_deg(n).finite().expect("n >= 1");
            let top = spec.block_len(degree)? - 1;
            let seq = sample_sequence(&sched, top, seed);
            (
                spec,
                seq,
                json!({ "schedule": text, "seed": seed, "max_index": top }),
            )
        }
    };
    let mut result = json!({
        "N": n,
        "s_star": s_star(&seq, n.min(seq.max_index()))?,
    });
    match kind {
        CountKind::Sum => result["r"] = json!(r_count(&spec, &seq, n)?),
        CountKind::Diff => {
            result["t"] = json!(t_count(&spec, &seq, n)?);
            let by_class = (0..spec.q())
                .map(|u| t_count_u(&spec, &seq, n, u))
                .collect::<sidon_fq::Result<Vec<u64>>>()?;
            result["t_by_class"] = json!(by_class);
        }
    }
    print_json(&json!({
        "config": {
            "command": "count",
            "field": field_echo(&spec),
            "n_index": n,
            "kind": kind,
            "source": source,
        },
        "result": result,
    }))
}

struct Query {
    spec: FieldSpec,
    n: u64,
    schedule_text: String,
    sched: Schedule,
}

fn query(cfg: &FileConfig, args: &QueryArgs) -> Result<Query, Failure> {
    let spec = config::field(args.field.p, args.field.s, cfg)?;
    let n = target(args.n_index, cfg)?;
    let (schedule_text, sched) = config::schedule(args.schedule.clone(), cfg, &spec)?;
    Ok(Query {
        spec,
        n,
        schedule_text,
        sched,
    })
}

fn query_echo(command: &str, q: &Query) -> Value {
    json!({
        "command": command,
        "field": field_echo(&q.spec),
        "n_index": q.n,
        "schedule": q.schedule_text,
        "schedule_params": to_value(&q.sched),
    })
}

pub fn prob_exact(cfg: &FileConfig, args: &QueryArgs) -> Result<(), Failure> {
    let q = query(cfg, args)?;
    let m = sum_pair_count(&q.spec, q.n)? as usize;
    let d_max = args.d_max.or(cfg.d_max).unwrap_or(m.min(DEFAULT_D_CAP));
    let dist = event_dist_exact(&q.spec, &q.sched, q.n, d_max)?;
    let mut echo = query_echo("prob exact", &q);
    echo["d_max"] = json!(d_max);
    print_json(&json!({ "config": echo, "result": to_value(&dist) }))
}

pub fn prob_bounds(cfg: &FileConfig, args: &QueryArgs) -> Result<(), Failure> {
    let q = query(cfg, args)?;
    let m = sum_pair_count(&q.spec, q.n)? as usize;
    let ds: Vec<usize> = match args.d.or(cfg.d) {
        Some(d) => vec![d],
        None => (0..=args.d_max.or(cfg.d_max).unwrap_or(m.min(20))).collect(),
    };
    let top = *ds.iter().max().expect("non-empty");
    let exact = event_dist_exact(&q.spec, &q.sched, q.n, top)?;
    let rows = ds
        .iter()
        .map(|&d| {
            let (lower, upper) = event_prob_bounds(&q.spec, &q.sched, q.n, d)?;
            Ok(json!({ "d": d, "lower": lower, "exact": exact.probs[d], "upper": upper }))
        })
        .collect::<sidon_fq::Result<Vec<Value>>>()?;
    let mut echo = query_echo("prob bounds", &q);
    echo["d"] = json!(ds);
    print_json(&json!({ "config": echo, "result": rows }))
}

pub fn lambda(cfg: &FileConfig, args: &QueryArgs) -> Result<(), Failure> {
    let q = query(cfg, args)?;
    let stats = lambda_stats(&q.spec, &q.sched, q.n)?;
    let mut result = to_value(&stats);
    if q.sched.law().is_some() {
        if q.n >= 2 {
            let (lo, hi) = lambda_bounds(&q.spec, &q.sched, q.n)?;
            result["lambda_lower"] = json!(lo);
            result["lambda_upper"] = json!(hi);
        }
        result["m_star_asymptotic"] = json!(m_star_asymptotic(&q.sched, q.n)?);
    }
    print_json(&json!({ "config": query_echo("lambda", &q), "result": result }))
}

pub fn sample(cfg: &FileConfig, args: &SampleArgs) -> Result<(), Failure> {
    let spec = config::field(args.field.p, args.field.s, cfg)?;
    let (text, sched) = config::schedule(args.schedule.clone(), cfg, &spec)?;
    let max_index = config::require(args.max_index, cfg.max_index, "max-index")?;
    if max_index >= sidon_fq::experiments::MAX_SAMPLED_INDICES {
        return Err(usage(format!("--max-index {max_index} is too large")).into());
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let output = args.output.clone().or(cfg.output.clone());
    let default_format = if output.is_some() { "binary" } else { "text" };
    let format = args
        .format
        .clone()
        .or(cfg.format.clone())
        .unwrap_or(default_format.into());
    if format != "binary" && format != "text" {
        return Err(usage(format!("unknown sequence format `{format}`")).into());
    }
    let seq = sample_sequence(&sched, max_index, seed);
    let Some(path) = output else {
        if format == "binary" {
            return Err(usage("binary output needs --output").into());
        }
        let mut out = BufWriter::new(std::io::stdout().lock());
        write_text(&spec, &seq, &mut out)?;
        out.flush()?;
        return Ok(());
    };
    let mut out = BufWriter::new(File::create(&path)?);
    if format == "binary" {
        write_binary(&spec, &seq, &mut out)?;
    } else {
        write_text(&spec, &seq, &mut out)?;
    }
    out.flush()?;
    print_json(&json!({
        "config": {
            "command": "sample",
            "field": field_echo(&spec),
            "schedule": text,
            "schedule_params": to_value(&sched),
            "max_index": max_index,
            "seed": seed,
            "format": format,
            "output": path,
        },
        "result": { "members": seq.len() },
    }))
}

/// Writes a report to `path`, or to stdout without one.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<(), Failure> {
    let text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv()?,
    };
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn report_format(flag: Option<ReportFormat>, cfg: &FileConfig) -> Result<ReportFormat, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match cfg.format.as_deref() {
        None | Some("json") => Ok(ReportFormat::Json),
        Some("csv") => Ok(ReportFormat::Csv),
        Some(other) => {
            Err(usage(format!("report format must be json or csv, got `{other}`")).into())
        }
    }
}

pub fn thm01(cfg: &FileConfig, args: &ConcentrationArgs) -> Result<(), Failure> {
    let spec = config::field(args.field.p, args.field.s, cfg)?;
    let n_min = args.n_min.or(cfg.n_min).unwrap_or(4);
    let n_max = args.n_max.or(cfg.n_max).unwrap_or(10);
    let trials = args.trials.or(cfg.trials).unwrap_or(200);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let format = report_format(args.format, cfg)?;
    let report = experiment_concentration(&spec, n_min..=n_max, trials, seed)?;
    emit_report(
        &report,
        format,
        args.output.as_deref().or(cfg.output.as_deref()),
    )
}

pub fn thick(cfg: &FileConfig, args: &ThickArgs, kind: CountKind) -> Result<(), Failure> {
    let spec = config::field(args.field.p, args.field.s, cfg)?;
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(2.0);
    let max_index = args.max_index.or(cfg.max_index).unwrap_or(1_000_000);
    let trials = args.trials.or(cfg.trials).unwrap_or(50);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let format = report_format(args.format, cfg)?;
    let report = experiment_thick(&spec, epsilon, max_index, trials, seed, kind)?;
    emit_report(
        &report,
        format,
        args.output.as_deref().or(cfg.output.as_deref()),
    )
}

pub fn validate(cfg: &FileConfig, seed: Option<u64>) -> Result<(), Failure> {
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let checks = run_oracles(seed)?;
    let passed = checks.iter().all(|c| c.passed());
    print_json(&json!({
        "config": { "command": "validate", "seed": seed },
        "result": { "passed": passed, "checks": to_value(&checks) },
    }))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Runtime("oracle checks failed".into()))
    }
}
