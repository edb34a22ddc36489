//! One bag of parameters per run. Flag parsing and batch files both land
//! here, so a batch entry behaves exactly like the equivalent command line.

use num_complex::Complex64;
use serde::Deserialize;
use specter::pseudospectra::{Mode, Strategy};
use specter::transient::Route;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub m: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub region: Option<String>,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub npert: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub ntheta: Option<usize>,
    #[serde(default)]
    pub times: Option<String>,
    #[serde(default)]
    pub route: Option<String>,
    #[serde(default)]
    pub problem: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub lam: Option<String>,
    #[serde(default)]
    pub lambdas: Option<String>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub out_m: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "standard" => Ok(Mode::Standard),
        "generalized" => Ok(Mode::Generalized),
        "weighted" => Ok(Mode::Weighted),
        _ => Err(format!("unknown mode `{s}` (standard, generalized, weighted)")),
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Standard => "standard",
        Mode::Generalized => "generalized",
        Mode::Weighted => "weighted",
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "full" => Ok(Strategy::Full),
        "rank1" => Ok(Strategy::Rank1),
        "residual" => Ok(Strategy::Residual),
        _ => Err(format!("unknown strategy `{s}` (full, rank1, residual)")),
    }
}

pub fn parse_route(s: &str) -> Result<Route, String> {
    match s {
        "eig" => Ok(Route::Eig),
        "gsvd" => Ok(Route::Gsvd),
        "oracle" => Ok(Route::Oracle),
        _ => Err(format!("unknown route `{s}` (eig, gsvd, oracle)")),
    }
}

pub fn route_name(route: Route) -> &'static str {
    match route {
        Route::Eig => "eig",
        Route::Gsvd => "gsvd",
        Route::Oracle => "oracle",
    }
}

pub fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("unknown format `{s}` (csv, json)")),
    }
}

fn parse_f64(token: &str) -> Result<f64, String> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad number `{}`", token.trim()))
}

/// `re0,re1,im0,im1`
pub fn parse_region(s: &str) -> Result<(f64, f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("region `{s}` must be re0,re1,im0,im1"));
    }
    Ok((
        parse_f64(parts[0])?,
        parse_f64(parts[1])?,
        parse_f64(parts[2])?,
        parse_f64(parts[3])?,
    ))
}

/// Either `t0:t1:k` for k equispaced points including both ends, or a
/// comma-separated list.
pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("times `{s}` must be t0:t1:k or a comma list"));
        }
        let t0 = parse_f64(parts[0])?;
        let t1 = parse_f64(parts[1])?;
        let k = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("bad count `{}`", parts[2].trim()))?;
        if k < 2 {
            return Err("a time range needs at least two points".to_string());
        }
        let step = (t1 - t0) / (k - 1) as f64;
        return Ok((0..k).map(|i| t0 + step * i as f64).collect());
    }
    s.split(',').map(parse_f64).collect()
}

/// `re` or `re,im`
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.len() {
        1 => Ok(Complex64::new(parse_f64(parts[0])?, 0.0)),
        2 => Ok(Complex64::new(parse_f64(parts[0])?, parse_f64(parts[1])?)),
        _ => Err(format!("complex value `{s}` must be re or re,im")),
    }
}

/// Semicolon-separated complex values, e.g. `-1,5;-3;0,-2`.
pub fn parse_spectrum(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(';').map(parse_complex).collect()
}
