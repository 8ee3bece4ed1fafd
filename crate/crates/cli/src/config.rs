//! Run configuration: clap flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use shortvar::spec::{preset, FunctionSpec, Sign, Variant};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "shortvar", version, about = "Variance of multiplicative functions in short intervals")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exponent profiles, or a table over k with --table K_MIN K_MAX.
    Exponents(Flags),
    /// Euler-product constants for a spec.
    Constants(Flags),
    /// The bounded-regime constant c(H) along a grid.
    Cofh(Flags),
    /// Predicted variance main terms.
    Predict(Flags),
    /// Measure a variance and compare with the prediction.
    Variance(Flags),
    /// Run the invariant and oracle suite.
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// One value, or a comma-separated list for tables.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Real `b` or complex `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    sign: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long = "X")]
    x: Option<String>,
    #[arg(long = "H")]
    h: Option<String>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Series length for complex-β main terms.
    #[arg(long = "N")]
    n: Option<String>,
    /// `int:A:B` or `real:A:B:STEP`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["K_MIN", "K_MAX"])]
    table: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Exponents,
    Constants,
    Cofh,
    Predict,
    Variance,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Int(u64, u64),
    Real(f64, f64, f64),
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::Int(a, b) => shortvar::fracsum::int_grid(a, b),
            Grid::Real(a, b, step) => shortvar::fracsum::real_grid(a, b, step),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub k: Option<u32>,
    pub alpha: Vec<f64>,
    pub beta: Option<Complex64>,
    pub sign: Sign,
    pub variant: Option<Variant>,
    pub x: Option<u64>,
    pub h: Option<f64>,
    pub z: Option<f64>,
    pub q: Option<u64>,
    pub n: Option<usize>,
    pub grid: Option<Grid>,
    pub mode: Option<String>,
    pub tol: f64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub table: Option<(u32, u32)>,
}

const KEYS: [&str; 17] = [
    "preset", "k", "alpha", "beta", "sign", "variant", "X", "H", "z", "q", "N", "grid", "mode", "tol", "threads", "out",
    "format",
];

/// Flat `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_argv<I, T>(argv: I) -> Result<(Command, Flags), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    Ok(match cli.command {
        Cmd::Exponents(f) => (Command::Exponents, f),
        Cmd::Constants(f) => (Command::Constants, f),
        Cmd::Cofh(f) => (Command::Cofh, f),
        Cmd::Predict(f) => (Command::Predict, f),
        Cmd::Variance(f) => (Command::Variance, f),
        Cmd::Verify(f) => (Command::Verify, f),
    })
}

/// Parse argv (including the program name). A `--config` file is read and
/// its values are overridden by any flag given on the command line.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (command, flags) = parse_argv(argv)?;
    let file = match &flags.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("config: cannot read {}: {e}", path.display())))?,
        ),
        None => None,
    };
    build(command, flags, file.as_deref())
}

/// As [`parse_config`], with the file contents supplied directly.
pub fn parse_config_with<I, T>(argv: I, file: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (command, flags) = parse_argv(argv)?;
    build(command, flags, file)
}

fn build(command: Command, flags: Flags, file: Option<&str>) -> Result<RunConfig, CliError> {
    let mut raw = match file {
        Some(text) => parse_config_file(text)?,
        None => BTreeMap::new(),
    };
    let overrides = [
        ("preset", flags.preset),
        ("k", flags.k),
        ("alpha", flags.alpha),
        ("beta", flags.beta),
        ("sign", flags.sign),
        ("variant", flags.variant),
        ("X", flags.x),
        ("H", flags.h),
        ("z", flags.z),
        ("q", flags.q),
        ("N", flags.n),
        ("grid", flags.grid),
        ("mode", flags.mode),
        ("tol", flags.tol),
        ("threads", flags.threads),
        ("out", flags.out),
        ("format", flags.format),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            raw.insert(key.to_string(), v);
        }
    }
    let get = |key: &str| raw.get(key).map(String::as_str);

    let table = match flags.table {
        Some(v) => Some((parse_int::<u32>("table", &v[0])?, parse_int::<u32>("table", &v[1])?)),
        None => None,
    };
    let threads = match get("threads") {
        Some(v) => Some(parse_int::<usize>("threads", v)?),
        None => match std::env::var("SHORTVAR_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(parse_int::<usize>("SHORTVAR_THREADS", &v)?),
            _ => None,
        },
    };
    if threads == Some(0) {
        return Err(CliError::Usage("threads: must be at least 1".into()));
    }
    let format = match get("format") {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(CliError::Usage(format!("format: expected `csv` or `json`, got `{other}`"))),
    };
    let sign = match get("sign") {
        None | Some("plus") | Some("+") => Sign::Plus,
        Some("minus") | Some("-") => Sign::Minus,
        Some(other) => return Err(CliError::Usage(format!("sign: expected `plus` or `minus`, got `{other}`"))),
    };
    let tol = match get("tol") {
        Some(v) => parse_real("tol", v)?,
        None => shortvar::fracsum::DEFAULT_TOL,
    };
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("tol: must be positive, got {tol}")));
    }
    Ok(RunConfig {
        command,
        preset: get("preset").map(str::to_string),
        k: get("k").map(|v| parse_int("k", v)).transpose()?,
        alpha: match get("alpha") {
            Some(v) => v.split(',').map(|a| parse_real("alpha", a)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        },
        beta: get("beta").map(|v| parse_complex("beta", v)).transpose()?,
        sign,
        variant: get("variant")
            .map(|v| v.parse::<Variant>().map_err(|e| CliError::Usage(format!("variant: {e}"))))
            .transpose()?,
        x: get("X").map(|v| parse_int("X", v)).transpose()?,
        h: get("H").map(|v| parse_real("H", v)).transpose()?,
        z: get("z").map(|v| parse_real("z", v)).transpose()?,
        q: get("q").map(|v| parse_int("q", v)).transpose()?,
        n: get("N").map(|v| parse_int("N", v)).transpose()?,
        grid: get("grid").map(parse_grid).transpose()?,
        mode: get("mode").map(str::to_string),
        tol,
        threads,
        out: get("out").map(PathBuf::from),
        format,
        table,
    })
}

fn parse_real(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{key}: expected a number, got `{v}`")))
}

/// Integers may be written in exponent form (`1e8`) as long as they are exact.
fn parse_int<T: TryFrom<u64>>(key: &str, v: &str) -> Result<T, CliError> {
    let bad = || CliError::Usage(format!("{key}: expected a non-negative integer, got `{v}`"));
    let t = v.trim();
    let n = match t.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = t.parse().map_err(|_| bad())?;
            if !(x >= 0.0 && x.fract() == 0.0 && x < 1.8e19) {
                return Err(bad());
            }
            x as u64
        }
    };
    T::try_from(n).map_err(|_| bad())
}

fn parse_complex(key: &str, v: &str) -> Result<Complex64, CliError> {
    match v.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_real(key, re)?, parse_real(key, im)?)),
        None => Ok(Complex64::new(parse_real(key, v)?, 0.0)),
    }
}

fn parse_grid(v: &str) -> Result<Grid, CliError> {
    let bad = || CliError::Usage(format!("grid: expected `int:A:B` or `real:A:B:STEP`, got `{v}`"));
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        ["int", a, b] => {
            let (a, b) = (parse_int::<u64>("grid", a)?, parse_int::<u64>("grid", b)?);
            if a > b {
                return Err(bad());
            }
            Ok(Grid::Int(a, b))
        }
        ["real", a, b, s] => {
            let (a, b, s) = (parse_real("grid", a)?, parse_real("grid", b)?, parse_real("grid", s)?);
            if !(s > 0.0 && a <= b && a >= 0.0) {
                return Err(bad());
            }
            Ok(Grid::Real(a, b, s))
        }
        _ => Err(bad()),
    }
}

impl RunConfig {
    /// The spec and coprimality modulus: a preset, or inline k/alpha/beta fields.
    pub fn spec(&self) -> Result<(FunctionSpec, u64), CliError> {
        if let Some(name) = &self.preset {
            if self.k.is_some() || self.beta.is_some() || self.variant.is_some() {
                return Err(CliError::Usage("preset: cannot be combined with k, beta or variant".into()));
            }
            let p = preset(name).map_err(|e| CliError::Usage(format!("preset: {e}")))?;
            return Ok((p.spec, self.q.unwrap_or(p.q)));
        }
        let k = self.k.ok_or_else(|| CliError::Usage("k: required when no preset is given".into()))?;
        let alpha = match self.alpha.as_slice() {
            [a] => *a,
            [] => return Err(CliError::Usage("alpha: required when no preset is given".into())),
            _ => return Err(CliError::Usage("alpha: a single value is needed for an inline spec".into())),
        };
        let beta = self.beta.ok_or_else(|| CliError::Usage("beta: required when no preset is given".into()))?;
        let variant = self.variant.unwrap_or(Variant::MobiusTwisted);
        let spec = FunctionSpec::new(k, alpha, beta, self.sign, variant, "inline")
            .map_err(|e| CliError::Usage(format!("spec: {e}")))?;
        Ok((spec, self.q.unwrap_or(1)))
    }
}
