//! Front end for the `shortvar` binary: configuration, subcommands, output.

pub mod config;
pub mod verify;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};
use shortvar::constants::{
    bounded_regime_constant, complex_main_term, e_h_product, leading_constant, tilde_c_product, Regime, ResidueKernel,
    VariancePrediction,
};
use shortvar::empirics::{compare, Mode};
use shortvar::exponents::{profile, range_exponent, ExponentProfile, RangeMode, DEFAULT_MARGIN};
use shortvar::fmt::sig12;
use shortvar::fracsum::{c_coprime_of_H, layer_analysis, scan_c_coprime_of_H, to_csv, FracConstant};

pub use config::{parse_config, parse_config_with, Command, Format, Grid, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// `--help` / `--version` text; not an error for the exit code.
    #[error("{0}")]
    Help(String),
    #[error(transparent)]
    Lib(#[from] shortvar::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => EXIT_OK,
            CliError::Lib(shortvar::Error::Capacity { .. }) | CliError::Lib(shortvar::Error::Overflow(_)) => EXIT_CAPACITY,
            CliError::Io(_) => EXIT_CAPACITY,
            _ => EXIT_USAGE,
        }
    }
}

/// Output text plus notes for stderr; `ok` is false only for a failing `verify`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    pub text: String,
    pub notes: Vec<String>,
    pub ok: bool,
}

/// Run one configured command and write its output; returns the exit code.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    if let Some(n) = cfg.threads {
        // A second initialisation (e.g. in tests) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = render(cfg)?;
    for note in &out.notes {
        eprintln!("{note}");
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.text)?,
        None => print!("{}", out.text),
    }
    Ok(if out.ok { EXIT_OK } else { EXIT_VERIFY })
}

/// Compute a command's output without writing it anywhere.
pub fn render(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        Command::Exponents => exponents(cfg),
        Command::Constants => constants(cfg),
        Command::Cofh => cofh(cfg),
        Command::Predict => predict(cfg),
        Command::Variance => variance(cfg),
        Command::Verify => {
            let checks = verify::run_suite();
            let (text, ok) = verify::report(&checks);
            Ok(Output { text, notes: Vec::new(), ok })
        }
    }
}

fn done(text: String) -> Result<Output, CliError> {
    Ok(Output { text, notes: Vec::new(), ok: true })
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(sig12).unwrap_or_default()
}

fn h_points(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match (&cfg.grid, cfg.h) {
        (Some(g), _) => Ok(g.points()),
        (None, Some(h)) => Ok(vec![h]),
        (None, None) => Err(CliError::Usage("H: required (or give --grid)".into())),
    }
}

fn range_mode(cfg: &RunConfig) -> Result<RangeMode, CliError> {
    match &cfg.mode {
        None => Ok(RangeMode::Unconditional),
        Some(m) => m.parse().map_err(|e| CliError::Usage(format!("mode: {e}"))),
    }
}

fn exponents(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut rows: Vec<ExponentProfile> = Vec::new();
    match cfg.table {
        Some((lo, hi)) => {
            if lo > hi {
                return Err(CliError::Usage(format!("table: K_MIN = {lo} exceeds K_MAX = {hi}")));
            }
            let alphas = if cfg.alpha.is_empty() { vec![0.0] } else { cfg.alpha.clone() };
            for &alpha in &alphas {
                for k in lo..=hi {
                    rows.push(profile(k, alpha)?);
                }
            }
        }
        None => {
            let (k, alphas) = match (cfg.k, cfg.preset.is_some()) {
                (Some(k), _) if !cfg.alpha.is_empty() => (k, cfg.alpha.clone()),
                (_, true) => {
                    let (s, _) = cfg.spec()?;
                    (s.k, vec![s.alpha])
                }
                _ => return Err(CliError::Usage("k: exponents needs --k and --alpha, a --preset, or --table".into())),
            };
            for alpha in alphas {
                rows.push(profile(k, alpha)?);
            }
        }
    }
    let mode = range_mode(cfg)?;
    let h_max = |p: &ExponentProfile| -> Option<f64> {
        let x = cfg.x? as f64;
        range_exponent(p.k, p.alpha, mode).ok().map(|e| x.powf(e - DEFAULT_MARGIN))
    };
    match cfg.format {
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|p| {
                    let mut v = serde_json::to_value(p).expect("profile serialises");
                    if let Some(h) = h_max(p) {
                        v["H_max"] = json!(h);
                    }
                    v
                })
                .collect();
            done(json_text(&if list.len() == 1 { list[0].clone() } else { Value::Array(list) }))
        }
        Format::Csv => {
            let mut s = String::from("k,alpha,nu,e,g,e_hat,g_hat,theta");
            if cfg.x.is_some() {
                s.push_str(",H_max");
            }
            s.push('\n');
            for p in &rows {
                let _ = write!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    p.k,
                    sig12(p.alpha),
                    opt(p.nu),
                    opt(p.e),
                    opt(p.g),
                    opt(p.e_hat),
                    opt(p.g_hat),
                    sig12(p.theta)
                );
                if cfg.x.is_some() {
                    let _ = write!(s, ",{}", opt(h_max(p)));
                }
                s.push('\n');
            }
            done(s)
        }
    }
}

fn constants(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, q) = cfg.spec()?;
    let tc = tilde_c_product(&spec)?;
    let eh = e_h_product(&spec)?;
    let mut fields: Vec<(&str, Value)> = vec![
        ("label", json!(spec.label)),
        ("k", json!(spec.k)),
        ("alpha", json!(spec.alpha)),
        ("beta_sq_re", json!(spec.beta_sq().re)),
        ("beta_sq_im", json!(spec.beta_sq().im)),
        ("tilde_c", json!(tc.value.re)),
        ("tilde_c_tail_bound", json!(tc.tail_bound)),
        ("e_h", json!(eh.value.re)),
        ("e_h_tail_bound", json!(eh.tail_bound)),
    ];
    let mut notes = Vec::new();
    if spec.alpha < 0.5 {
        fields.push(("regime", json!("power-law")));
        match leading_constant(&spec) {
            Ok(c) => fields.push(("c_hk", json!(c))),
            Err(e) => notes.push(format!("note: no closed-form leading constant: {e}")),
        }
    } else {
        fields.push(("regime", json!("bounded")));
        if let Some(h) = cfg.h {
            let c = c_coprime_of_H(&spec, q, h, cfg.tol)?;
            fields.push(("q", json!(q)));
            fields.push(("H", json!(h)));
            fields.push(("c_of_H", json!(c.value)));
            fields.push(("c_of_H_tail_bound", json!(c.tail_bound)));
        }
    }
    let text = match cfg.format {
        Format::Json => json_text(&Value::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())),
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            for (k, v) in fields {
                let v = match v {
                    Value::Number(n) => sig12(n.as_f64().unwrap_or(f64::NAN)),
                    Value::String(t) => t.replace(',', ";"),
                    other => other.to_string(),
                };
                let _ = writeln!(s, "{k},{v}");
            }
            s
        }
    };
    Ok(Output { text, notes, ok: true })
}

fn cofh(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, q) = cfg.spec()?;
    let values: Vec<FracConstant> = match (&cfg.grid, cfg.h) {
        (Some(g), _) => scan_c_coprime_of_H(&spec, q, &g.points())?,
        (None, Some(h)) => vec![c_coprime_of_H(&spec, q, h, cfg.tol)?],
        (None, None) => return Err(CliError::Usage("grid: cofh needs --grid or --H".into())),
    };
    let mut notes = Vec::new();
    let lo = values.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("non-empty grid");
    let hi = values.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("non-empty grid");
    notes.push(format!(
        "{} points, min {} at H = {}, max {} at H = {}",
        values.len(),
        sig12(lo.value),
        sig12(lo.h),
        sig12(hi.value),
        sig12(hi.h)
    ));
    if values.iter().filter(|v| v.h.fract() == 0.0).count() >= 12 {
        let r = layer_analysis(&values);
        notes.push(format!(
            "mod-6 layers (0 | 2,4 | 3 | 1,5): means {:?}, ordered: {}, agreement {:.3}",
            r.layer_means.map(sig12),
            r.ordering_holds,
            r.agreement
        ));
    }
    let text = match cfg.format {
        Format::Csv => to_csv(&values),
        Format::Json => json_text(&serde_json::to_value(&values).expect("values serialise")),
    };
    Ok(Output { text, notes, ok: true })
}

fn predict(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, _) = cfg.spec()?;
    let hs = h_points(cfg)?;
    let rows: Vec<Value> = if spec.alpha >= 0.5 {
        let preds: Vec<VariancePrediction> =
            hs.par_iter().map(|&h| bounded_regime_constant(&spec, h)).collect::<shortvar::Result<_>>()?;
        preds.iter().map(|p| serde_json::to_value(p).expect("prediction serialises")).collect()
    } else if spec.beta_sq_integer().is_some() {
        let kernel = ResidueKernel::new(&spec)?;
        let preds: Vec<VariancePrediction> = hs.iter().map(|&h| kernel.predict(h)).collect::<shortvar::Result<_>>()?;
        preds.iter().map(|p| serde_json::to_value(p).expect("prediction serialises")).collect()
    } else {
        let n = cfg.n.unwrap_or(3);
        hs.iter()
            .map(|&h| {
                let m = complex_main_term(&spec, h, n)?;
                Ok(json!({
                    "H": h,
                    "main_term": m.value,
                    "imag": m.imag,
                    "truncation_estimate": m.truncation_estimate,
                    "N": n,
                    "regime": Regime::PowerLaw,
                }))
            })
            .collect::<shortvar::Result<_>>()?
    };
    let text = match cfg.format {
        Format::Json => json_text(&if rows.len() == 1 { rows[0].clone() } else { Value::Array(rows) }),
        Format::Csv => {
            let mut s = String::from("H,main_term,constant_c,regime\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    sig12(r["H"].as_f64().unwrap_or(f64::NAN)),
                    sig12(r["main_term"].as_f64().unwrap_or(f64::NAN)),
                    opt(r["constant_c"].as_f64()),
                    r["regime"].as_str().unwrap_or("")
                );
            }
            s
        }
    };
    done(text)
}

fn variance(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, _) = cfg.spec()?;
    let x = cfg.x.ok_or_else(|| CliError::Usage("X: required for variance".into()))?;
    let hs = h_points(cfg)?;
    let mode: Mode = match &cfg.mode {
        None => Mode::Continuous,
        Some(m) => m.parse().map_err(|e| CliError::Usage(format!("mode: {e}")))?,
    };
    let reports = hs
        .iter()
        .map(|&h| compare(&spec, x, h, mode, cfg.z))
        .collect::<shortvar::Result<Vec<_>>>()?;
    let notes: Vec<String> = reports.iter().filter_map(|r| r.warning.clone()).map(|w| format!("warning: {w}")).collect();
    let text = match cfg.format {
        Format::Json => {
            let v = serde_json::to_value(&reports).expect("reports serialise");
            json_text(&if reports.len() == 1 { v[0].clone() } else { v })
        }
        Format::Csv => {
            let mut s = String::from("X,H,measured,predicted,ratio\n");
            for r in &reports {
                let _ = writeln!(s, "{},{},{},{},{}", r.x, sig12(r.h), sig12(r.measured), sig12(r.predicted), sig12(r.ratio));
            }
            s
        }
    };
    Ok(Output { text, notes, ok: true })
}
