use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use heckesum::basis::NewformLocalData;
use heckesum::density::{self, DensityConfig, Group};
use heckesum::newform_sums::{cardinality_estimate, pure_sum};
use heckesum::oracles::{dim_cusp, newform_dim, ramanujan_tau, MAX_TAU_BOUND};
use heckesum::petersson::{delta_full, TruncatedSum, TruncationPolicy, WeightLevel};
use heckesum::{bessel, factor, kloosterman, FactoredInteger};
use serde_json::{json, Map, Value};

use crate::config::read_config;
use crate::output::{Format, Payload};
use crate::{CliError, Command, DensityArgs, Truncation};

pub struct CommandResult {
    pub payload: Payload,
    pub default_format: Format,
    /// False when some truncated sum missed its tolerance (exit code 3).
    pub converged: bool,
}

fn record(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("records are built from object literals"),
    }
}

fn json_result(v: Value, converged: bool) -> CommandResult {
    CommandResult { payload: Payload::Record(record(v)), default_format: Format::Json, converged }
}

fn policy(t: &Truncation) -> Result<TruncationPolicy, CliError> {
    let mut p = match (t.tol, t.cmax) {
        (_, Some(c)) => TruncationPolicy::fixed(c),
        (Some(tol), None) => TruncationPolicy::tolerance(tol),
        (None, None) => TruncationPolicy::default(),
    };
    if let Some(cap) = t.hard_cap {
        p = p.with_hard_cap(cap);
    }
    p.validate()?;
    Ok(p)
}

fn level(n: u64) -> Result<FactoredInteger, CliError> {
    if n == 0 {
        return Err(CliError::Lib(heckesum::Error::Precondition("N must be positive".into())));
    }
    Ok(factor(n)?)
}

fn truncated(s: &TruncatedSum) -> Value {
    json!({
        "value": s.value,
        "tail_bound": s.tail_bound,
        "terms_used": s.terms_used,
        "converged": s.converged,
    })
}

pub fn execute(cmd: &Command) -> Result<CommandResult, CliError> {
    match cmd {
        Command::Kloosterman { m, n, c } => {
            let v = kloosterman::kloosterman(*m, *n, *c)?;
            Ok(CommandResult {
                payload: Payload::Scalar { key: "value", value: json!(v) },
                default_format: Format::Text,
                converged: true,
            })
        }
        Command::Besselj { nu, x } => {
            let v = bessel::bessel_j(*nu, *x)?;
            Ok(CommandResult {
                payload: Payload::Scalar { key: "value", value: json!(v) },
                default_format: Format::Text,
                converged: true,
            })
        }
        Command::Delta { k, level: n_level, m, n, trunc } => {
            let wl = WeightLevel::new(*k, *n_level)?;
            let s = delta_full(&wl, *m, *n, &policy(trunc)?)?;
            Ok(json_result(truncated(&s), s.converged))
        }
        Command::Puresum { k, level: n_level, n, x, y, trunc } => {
            let r = pure_sum(*k, &level(*n_level)?, *n, *x, *y, &policy(trunc)?)?;
            let mut m = record(truncated(&r.sum));
            m.insert("heuristic_bound".into(), json!(r.heuristic_bound));
            m.insert("oscillation".into(), json!(r.oscillation));
            m.insert("diagonal".into(), json!(r.diagonal));
            m.insert("X".into(), json!(r.x));
            m.insert("Y".into(), json!(r.y));
            Ok(CommandResult { payload: Payload::Record(m), default_format: Format::Json, converged: r.sum.converged })
        }
        Command::Card { k, level: n_level, x, y, trunc } => {
            let c = cardinality_estimate(*k, &level(*n_level)?, *x, *y, &policy(trunc)?)?;
            let mut m = record(truncated(&c.estimate.sum));
            m.insert("heuristic_bound".into(), json!(c.estimate.heuristic_bound));
            m.insert("oscillation".into(), json!(c.estimate.oscillation));
            m.insert("main_term".into(), json!(c.main_term));
            m.insert("sandwich".into(), json!([c.sandwich.0, c.sandwich.1]));
            m.insert("oracle_dim".into(), json!(c.oracle_dim));
            m.insert("rounded".into(), json!(c.rounded));
            m.insert("X".into(), json!(c.estimate.x));
            m.insert("Y".into(), json!(c.estimate.y));
            Ok(CommandResult {
                payload: Payload::Record(m),
                default_format: Format::Json,
                converged: c.estimate.sum.converged,
            })
        }
        Command::Tau { max } => {
            if *max == 0 || *max > MAX_TAU_BOUND {
                return Err(CliError::Lib(heckesum::Error::Precondition(format!(
                    "--max must be in 1..={MAX_TAU_BOUND}"
                ))));
            }
            let taus = ramanujan_tau(*max)?;
            let rows = taus
                .iter()
                .enumerate()
                .map(|(i, t)| record(json!({"n": i + 1, "tau": Value::String(t.to_string())})))
                .collect();
            Ok(CommandResult { payload: Payload::Table { key: "values", rows }, default_format: Format::Csv, converged: true })
        }
        Command::Dim { k, level: n_level } => {
            let d = dim_cusp(*k, &level(*n_level)?)?;
            Ok(json_result(json!({"k": k, "N": n_level, "dim": d}), true))
        }
        Command::Newdim { k, level: n_level } => {
            let d = newform_dim(*k, &level(*n_level)?)?;
            Ok(json_result(json!({"k": k, "N": n_level, "newdim": d}), true))
        }
        Command::Basis { eigen_data, level: n_level, n } => basis(eigen_data, *n_level, *n),
        Command::Density { params, level: n_level } => {
            let row = density_row(params, *n_level)?;
            let converged = row["Pstar"]["converged"].as_bool().unwrap_or(false);
            Ok(CommandResult { payload: Payload::Record(row), default_format: Format::Json, converged })
        }
        Command::Rmt { group, sigma } => {
            let g: Group = group.parse()?;
            let phi = density::fejer_pair(*sigma)?;
            let r = density::rmt_integral(g, &phi)?;
            Ok(json_result(
                json!({"group": g.name(), "sigma": sigma, "time_side": r.time_side, "fourier_side": r.fourier_side}),
                true,
            ))
        }
        Command::DensityGrid { spec } => density_grid(spec),
    }
}

fn basis(path: &Path, n_level: Option<u64>, n: Option<u64>) -> Result<CommandResult, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let f = NewformLocalData::from_json(&text)?;
    let mut lambda = Map::new();
    for p in f.primes() {
        lambda.insert(p.to_string(), json!(f.lambda_p(p)?));
    }
    let mut m = record(json!({"k": f.k(), "M": f.level().value(), "lambda": lambda}));
    if let Some(nv) = n {
        m.insert("n".into(), json!(nv));
        m.insert("lambda_n".into(), json!(f.hecke_lambda(&factor(nv)?)?));
    }
    if let Some(nl) = n_level {
        let big = level(nl)?;
        let l = big.quotient(f.level()).map_err(|_| {
            heckesum::Error::Precondition(format!("N = {nl} is not a multiple of M = {}", f.level().value()))
        })?;
        m.insert("N".into(), json!(nl));
        m.insert("z_N".into(), json!(f.z_n(&big)?));
        m.insert("xi_one_sum_direct".into(), json!(f.xi_one_sum_direct(&l)?));
        m.insert("xi_one_sum_closed".into(), json!(f.xi_one_sum_closed(&l, &big)?));
    }
    Ok(json_result(Value::Object(m), true))
}

fn density_row(a: &DensityArgs, n_level: u64) -> Result<Map<String, Value>, CliError> {
    let mut cfg = DensityConfig::new(a.k, level(n_level)?, a.u);
    if let Some(r) = a.r {
        cfg.r = r;
    }
    cfg.x = a.x;
    cfg.y = a.y;
    cfg.strict = a.strict;
    cfg.policy = policy(&a.trunc)?;
    let phi = density::fejer_pair(a.sigma)?;
    let est = density::one_level_estimate(&cfg, &phi)?;
    let mut rmt = Map::new();
    for g in Group::ALL {
        rmt.insert(g.name().into(), json!(density::rmt_integral(g, &phi)?.fourier_side));
    }
    let mut pstar = record(truncated(&est.p_star.sum));
    pstar.insert("heuristic_bound".into(), json!(est.p_star.heuristic_bound));
    pstar.insert("primes".into(), json!(est.p_star.primes));
    Ok(record(json!({
        "k": a.k,
        "N": n_level,
        "sigma": a.sigma,
        "u": a.u,
        "R": cfg.r,
        "E": est.e,
        "Pstar": pstar,
        "card": est.card,
        "Pstar_over_card": est.p_star_over_card,
        "D1": est.d1,
        "rmt": rmt,
        "heuristic_error": est.heuristic_error,
        "support_limit": density::support_limit(a.k, n_level as f64)?,
    })))
}

fn parse_value<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    cfg.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Input(format!("grid spec: bad value for {key}: {v:?}"))))
        .transpose()
}

fn required<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    parse_value(cfg, key)?.ok_or_else(|| CliError::Input(format!("grid spec: missing {key}")))
}

/// Grid file: `k`, `sigma`, `u` and a comma-separated list `N`, plus
/// optional `R`, `X`, `Y`, `tol`, `cmax`, `strict`.
fn density_grid(path: &Path) -> Result<CommandResult, CliError> {
    let cfg = read_config(path)?;
    let levels: Vec<u64> = cfg
        .get("N")
        .ok_or_else(|| CliError::Input("grid spec: missing N".into()))?
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Input(format!("grid spec: bad level {s:?}"))))
        .collect::<Result<_, _>>()?;
    let args = DensityArgs {
        k: required(&cfg, "k")?,
        sigma: required(&cfg, "sigma")?,
        u: required(&cfg, "u")?,
        r: parse_value(&cfg, "R")?,
        x: parse_value(&cfg, "X")?,
        y: parse_value(&cfg, "Y")?,
        strict: parse_value(&cfg, "strict")?.unwrap_or(false),
        trunc: Truncation { tol: parse_value(&cfg, "tol")?, cmax: parse_value(&cfg, "cmax")?, hard_cap: None },
    };
    let mut rows = Vec::new();
    let mut converged = true;
    for n in levels {
        let row = density_row(&args, n)?;
        converged &= row["Pstar"]["converged"].as_bool().unwrap_or(false);
        rows.push(row);
    }
    Ok(CommandResult { payload: Payload::Table { key: "rows", rows }, default_format: Format::Csv, converged })
}

/// Run manifest: arguments, versions, thread count and the full result.
pub fn manifest(args: &[OsString], result: &CommandResult) -> Value {
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let payload = match &result.payload {
        Payload::Record(m) => Value::Object(m.clone()),
        Payload::Table { rows, .. } => Value::Array(rows.iter().cloned().map(Value::Object).collect()),
        Payload::Scalar { value, .. } => value.clone(),
    };
    json!({
        "schema": crate::output::SCHEMA_VERSION,
        "tool": "heckesum",
        "cli_version": env!("CARGO_PKG_VERSION"),
        "core_version": heckesum::VERSION,
        "arguments": argv,
        "threads": rayon::current_num_threads(),
        "converged": result.converged,
        "result": payload,
    })
}
