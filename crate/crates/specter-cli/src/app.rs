//! Subcommand execution: read inputs, call the library, write outputs.
//!
//! Every output file opens with a comment (or JSON fields) echoing the tool
//! version, the subcommand, and the resolved parameters, so a result file
//! is enough to rerun the computation. Files are written to a temporary
//! sibling and renamed into place, so a failed run leaves nothing behind.

use crate::config::{self, OutputFormat, RunConfig};
use crate::mtx;
use serde_json::{json, Map, Value};
use specter::error::Error as LibError;
use specter::matrix::ComplexMatrix;
use specter::problems;
use specter::pseudospectra::{self, Mode, PencilProblem, Region};
use specter::transient;
use std::fmt;
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs. Exit 1.
    Input(String),
    /// The computation itself gave up. Exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

fn input(msg: impl fmt::Display) -> CliError {
    CliError::Input(msg.to_string())
}

fn lib_err(e: LibError) -> CliError {
    match e {
        LibError::NoConvergence | LibError::NearDefective { .. } => {
            CliError::Numerical(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    resolve_defaults(&mut cfg);
    check_fields(&cfg)?;
    let echo = build_echo(&cfg);
    match cfg.subcommand.as_str() {
        "psgrid" => run_psgrid(&cfg, &echo),
        "scatter" => run_scatter(&cfg, &echo),
        "stabradius" => run_stabradius(&cfg, &echo),
        "gsvd" => run_gsvd(&cfg, &echo),
        "numrange" => run_numrange(&cfg, &echo),
        "growth" => run_growth(&cfg, &echo),
        "gen" => run_gen(&cfg, &echo),
        other => Err(input(format!("unknown subcommand `{other}`"))),
    }
}

/// Fill the defaults before validation so the echoed parameters show what
/// actually ran.
fn resolve_defaults(cfg: &mut RunConfig) {
    if matches!(cfg.subcommand.as_str(), "psgrid" | "scatter" | "stabradius") && cfg.mode.is_none()
    {
        cfg.mode = Some(if cfg.m.is_some() { "generalized" } else { "standard" }.to_string());
    }
    if cfg.subcommand == "scatter" {
        if cfg.strategy.is_none() {
            cfg.strategy = Some("full".to_string());
        }
        if cfg.seed.is_none() {
            cfg.seed = Some(0);
        }
    }
    if cfg.subcommand == "growth" && cfg.route.is_none() {
        cfg.route = Some("eig".to_string());
    }
    if cfg.subcommand == "gen" && cfg.problem.as_deref() == Some("normal") && cfg.seed.is_none() {
        cfg.seed = Some(0);
    }
    if cfg.subcommand != "gen" && cfg.format.is_none() {
        cfg.format = Some(
            if cfg.subcommand == "stabradius" {
                "json"
            } else {
                "csv"
            }
            .to_string(),
        );
    }
}

/// Present fields in canonical flag order, values rendered as they will be
/// echoed.
fn present(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let mut v: Vec<(&'static str, String)> = Vec::new();
    if let Some(x) = &cfg.a {
        v.push(("a", x.clone()));
    }
    if let Some(x) = &cfg.m {
        v.push(("m", x.clone()));
    }
    if let Some(x) = &cfg.b {
        v.push(("b", x.clone()));
    }
    if let Some(x) = &cfg.mode {
        v.push(("mode", x.clone()));
    }
    if let Some(x) = &cfg.region {
        v.push(("region", x.clone()));
    }
    if let Some(x) = cfg.nx {
        v.push(("nx", x.to_string()));
    }
    if let Some(x) = cfg.ny {
        v.push(("ny", x.to_string()));
    }
    if let Some(x) = cfg.eps {
        v.push(("eps", x.to_string()));
    }
    if let Some(x) = cfg.npert {
        v.push(("npert", x.to_string()));
    }
    if let Some(x) = cfg.seed {
        v.push(("seed", x.to_string()));
    }
    if let Some(x) = &cfg.strategy {
        v.push(("strategy", x.clone()));
    }
    if let Some(x) = cfg.ntheta {
        v.push(("ntheta", x.to_string()));
    }
    if let Some(x) = &cfg.times {
        v.push(("times", x.clone()));
    }
    if let Some(x) = &cfg.route {
        v.push(("route", x.clone()));
    }
    if let Some(x) = &cfg.problem {
        v.push(("problem", x.clone()));
    }
    if let Some(x) = cfg.n {
        v.push(("n", x.to_string()));
    }
    if let Some(x) = &cfg.lam {
        v.push(("lam", x.clone()));
    }
    if let Some(x) = &cfg.lambdas {
        v.push(("lambdas", x.clone()));
    }
    if let Some(x) = cfg.c {
        v.push(("c", x.to_string()));
    }
    if let Some(x) = cfg.nu {
        v.push(("nu", x.to_string()));
    }
    if let Some(x) = &cfg.out {
        v.push(("out", x.clone()));
    }
    if let Some(x) = &cfg.out_m {
        v.push(("out_m", x.clone()));
    }
    if let Some(x) = &cfg.format {
        v.push(("format", x.clone()));
    }
    v
}

fn flag_name(field: &str) -> String {
    format!("--{}", field.replace('_', "-"))
}

fn allowed_fields(sub: &str) -> Option<&'static [&'static str]> {
    Some(match sub {
        "psgrid" => &["a", "m", "mode", "region", "nx", "ny", "out", "format"],
        "scatter" => &[
            "a", "m", "mode", "eps", "npert", "seed", "strategy", "out", "format",
        ],
        "stabradius" => &["a", "m", "mode", "out", "format"],
        "gsvd" => &["a", "b", "out", "format"],
        "numrange" => &["a", "m", "ntheta", "out", "format"],
        "growth" => &["a", "m", "times", "route", "out", "format"],
        "gen" => &["problem", "n", "lam", "lambdas", "seed", "c", "nu", "out", "out_m"],
        _ => return None,
    })
}

fn required_fields(sub: &str) -> &'static [&'static str] {
    match sub {
        "psgrid" => &["a", "region", "nx", "ny", "out"],
        "scatter" => &["a", "eps", "npert", "out"],
        "stabradius" => &["a", "out"],
        "gsvd" => &["a", "b", "out"],
        "numrange" => &["a", "ntheta", "out"],
        "growth" => &["a", "times", "out"],
        "gen" => &["problem", "out"],
        _ => &[],
    }
}

fn check_fields(cfg: &RunConfig) -> Result<(), CliError> {
    let sub = cfg.subcommand.as_str();
    let allowed =
        allowed_fields(sub).ok_or_else(|| input(format!("unknown subcommand `{sub}`")))?;
    let fields = present(cfg);
    for (name, _) in &fields {
        if !allowed.contains(name) {
            return Err(input(format!("{} does not apply to {sub}", flag_name(name))));
        }
    }
    for need in required_fields(sub) {
        if !fields.iter().any(|(name, _)| name == need) {
            return Err(input(format!("{sub} requires {}", flag_name(need))));
        }
    }
    if let Some(e) = cfg.eps {
        if !e.is_finite() || e < 0.0 {
            return Err(input("--eps must be finite and nonnegative"));
        }
    }
    for (name, value) in [
        ("nx", cfg.nx),
        ("ny", cfg.ny),
        ("npert", cfg.npert),
        ("ntheta", cfg.ntheta),
        ("n", cfg.n),
    ] {
        if value == Some(0) {
            return Err(input(format!("--{name} must be at least 1")));
        }
    }
    if let Some(mode) = &cfg.mode {
        let mode = config::parse_mode(mode).map_err(input)?;
        if mode == Mode::Standard && cfg.m.is_some() {
            return Err(input("mode standard does not take --m"));
        }
        if mode != Mode::Standard && cfg.m.is_none() {
            return Err(input(format!(
                "mode {} requires --m",
                config::mode_name(mode)
            )));
        }
    }
    if let Some(f) = &cfg.format {
        config::parse_format(f).map_err(input)?;
    }
    Ok(())
}

pub struct Echo {
    /// `specter <version> <subcommand> <flags>`
    line: String,
    /// Just the flag portion.
    flags: String,
}

fn build_echo(cfg: &RunConfig) -> Echo {
    let flags = present(cfg)
        .iter()
        .map(|(name, value)| format!("{} {value}", flag_name(name)))
        .collect::<Vec<_>>()
        .join(" ");
    let line = format!("specter {VERSION} {} {flags}", cfg.subcommand);
    Echo { line, flags }
}

fn read_matrix(path: &str) -> Result<ComplexMatrix, CliError> {
    mtx::parse(Path::new(path)).map_err(|e| input(format!("{path}: {e}")))
}

fn load_problem(cfg: &RunConfig) -> Result<PencilProblem, CliError> {
    let a = read_matrix(cfg.a.as_ref().expect("validated"))?;
    match &cfg.m {
        Some(path) => {
            let m = read_matrix(path)?;
            PencilProblem::generalized(a, m).map_err(lib_err)
        }
        None => PencilProblem::standard(a).map_err(lib_err),
    }
}

fn mode_of(cfg: &RunConfig) -> Result<Mode, CliError> {
    config::parse_mode(cfg.mode.as_deref().unwrap_or("standard")).map_err(input)
}

fn format_of(cfg: &RunConfig) -> Result<OutputFormat, CliError> {
    config::parse_format(cfg.format.as_deref().unwrap_or("csv")).map_err(input)
}

fn out_path(cfg: &RunConfig) -> &str {
    cfg.out.as_ref().expect("validated")
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let err = |e: &dyn fmt::Display| input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| err(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| err(&e))?;
    tmp.persist(path).map_err(|e| err(&e))?;
    Ok(())
}

/// 17 significant digits, enough to reproduce the exact float.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_doc(echo: &Echo, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("# {}\n{}\n", echo.line, columns.join(","));
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn json_doc(cfg: &RunConfig, echo: &Echo, payload: Vec<(&str, Value)>) -> String {
    let mut obj = Map::new();
    obj.insert("version".to_string(), json!(VERSION));
    obj.insert("subcommand".to_string(), json!(cfg.subcommand));
    obj.insert("params".to_string(), json!(echo.flags));
    for (key, value) in payload {
        obj.insert(key.to_string(), value);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("plain data");
    s.push('\n');
    s
}

fn run_psgrid(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let p = load_problem(cfg)?;
    let mode = mode_of(cfg)?;
    let (re0, re1, im0, im1) =
        config::parse_region(cfg.region.as_ref().expect("validated")).map_err(input)?;
    let region = Region::new(re0, re1, im0, im1).map_err(lib_err)?;
    let nx = cfg.nx.expect("validated");
    let ny = cfg.ny.expect("validated");
    let g = pseudospectra::grid(&p, region, nx, ny, mode).map_err(lib_err)?;

    let columns = ["re", "im", "eps_b"];
    let doc = match format_of(cfg)? {
        OutputFormat::Csv => {
            let mut rows = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for k in 0..nx {
                    let z = g.point(j, k);
                    rows.push(vec![fmt_f(z.re), fmt_f(z.im), fmt_f(g.value(j, k))]);
                }
            }
            csv_doc(echo, &columns, &rows)
        }
        OutputFormat::Json => {
            let mut rows = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for k in 0..nx {
                    let z = g.point(j, k);
                    rows.push(json!([z.re, z.im, g.value(j, k)]));
                }
            }
            json_doc(
                cfg,
                echo,
                vec![("columns", json!(columns)), ("rows", Value::Array(rows))],
            )
        }
    };
    write_atomic(Path::new(out_path(cfg)), &doc)
}

fn run_scatter(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let p = load_problem(cfg)?;
    let mode = mode_of(cfg)?;
    let eps = cfg.eps.expect("validated");
    let npert = cfg.npert.expect("validated");
    let seed = cfg.seed.expect("resolved");
    let strategy =
        config::parse_strategy(cfg.strategy.as_deref().expect("resolved")).map_err(input)?;
    let s = pseudospectra::perturbation_scatter(&p, eps, npert, seed, strategy, mode)
        .map_err(lib_err)?;

    let metadata = vec![
        ("mode", json!(cfg.mode)),
        ("eps", json!(eps)),
        ("npert", json!(npert)),
        ("seed", json!(seed)),
        ("strategy", json!(cfg.strategy)),
        ("samples", json!(s.eigenvalues.len())),
    ];
    let columns = ["re", "im"];
    let out = Path::new(out_path(cfg));
    match format_of(cfg)? {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = s
                .eigenvalues
                .iter()
                .map(|z| vec![fmt_f(z.re), fmt_f(z.im)])
                .collect();
            write_atomic(out, &csv_doc(echo, &columns, &rows))?;
            // seed and strategy ride along in a sidecar file
            write_atomic(&out.with_extension("meta.json"), &json_doc(cfg, echo, metadata))
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = s.eigenvalues.iter().map(|z| json!([z.re, z.im])).collect();
            let mut payload = metadata;
            payload.push(("columns", json!(columns)));
            payload.push(("rows", Value::Array(rows)));
            write_atomic(out, &json_doc(cfg, echo, payload))
        }
    }
}

fn run_stabradius(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let p = load_problem(cfg)?;
    let mode = mode_of(cfg)?;
    let rep = pseudospectra::stability_radius(&p, mode).map_err(lib_err)?;
    let doc = match format_of(cfg)? {
        OutputFormat::Json => json_doc(
            cfg,
            echo,
            vec![
                ("radius", json!(rep.radius)),
                ("argmin_y", json!(rep.argmin_y)),
                ("global_guarantee", json!(rep.global_guarantee)),
            ],
        ),
        OutputFormat::Csv => csv_doc(
            echo,
            &["radius", "argmin_y", "global_guarantee"],
            &[vec![
                fmt_f(rep.radius),
                fmt_f(rep.argmin_y),
                rep.global_guarantee.to_string(),
            ]],
        ),
    };
    write_atomic(Path::new(out_path(cfg)), &doc)
}

fn run_gsvd(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let a = read_matrix(cfg.a.as_ref().expect("validated"))?;
    let b = read_matrix(cfg.b.as_ref().expect("validated"))?;
    let r = specter::gsvd::bsv(&a, &b).map_err(lib_err)?;
    let mus: Vec<f64> = r
        .alphas
        .iter()
        .zip(&r.betas)
        .map(|(al, be)| al / be)
        .collect();
    let doc = match format_of(cfg)? {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = r
                .alphas
                .iter()
                .zip(&r.betas)
                .zip(&mus)
                .map(|((al, be), mu)| {
                    vec![fmt_f(*al), fmt_f(*be), fmt_f(*mu), r.degenerate.to_string()]
                })
                .collect();
            csv_doc(echo, &["alpha", "beta", "mu", "degenerate"], &rows)
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = r
                .alphas
                .iter()
                .zip(&r.betas)
                .zip(&mus)
                .map(|((al, be), mu)| json!([al, be, mu]))
                .collect();
            json_doc(
                cfg,
                echo,
                vec![
                    ("degenerate", json!(r.degenerate)),
                    ("columns", json!(["alpha", "beta", "mu"])),
                    ("rows", Value::Array(rows)),
                ],
            )
        }
    };
    write_atomic(Path::new(out_path(cfg)), &doc)
}

fn run_numrange(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let p = load_problem(cfg)?;
    let ntheta = cfg.ntheta.expect("validated");
    let nr = transient::numerical_range(&p, ntheta).map_err(lib_err)?;
    let columns = ["theta", "re", "im", "lambda_theta"];
    let doc = match format_of(cfg)? {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = (0..nr.thetas.len())
                .map(|k| {
                    vec![
                        fmt_f(nr.thetas[k]),
                        fmt_f(nr.support_points[k].re),
                        fmt_f(nr.support_points[k].im),
                        fmt_f(nr.support_values[k]),
                    ]
                })
                .collect();
            csv_doc(echo, &columns, &rows)
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = (0..nr.thetas.len())
                .map(|k| {
                    json!([
                        nr.thetas[k],
                        nr.support_points[k].re,
                        nr.support_points[k].im,
                        nr.support_values[k],
                    ])
                })
                .collect();
            json_doc(
                cfg,
                echo,
                vec![("columns", json!(columns)), ("rows", Value::Array(rows))],
            )
        }
    };
    write_atomic(Path::new(out_path(cfg)), &doc)
}

fn run_growth(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let p = load_problem(cfg)?;
    let times = config::parse_times(cfg.times.as_ref().expect("validated")).map_err(input)?;
    let route = config::parse_route(cfg.route.as_deref().expect("resolved")).map_err(input)?;
    let curve = transient::growth_curve(&p, &times, route).map_err(lib_err)?;
    let route_name = config::route_name(route);
    let doc = match format_of(cfg)? {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = curve
                .times
                .iter()
                .zip(&curve.growth)
                .map(|(t, g)| vec![fmt_f(*t), fmt_f(*g), route_name.to_string()])
                .collect();
            csv_doc(echo, &["t", "growth", "route"], &rows)
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = curve
                .times
                .iter()
                .zip(&curve.growth)
                .map(|(t, g)| json!([t, g]))
                .collect();
            json_doc(
                cfg,
                echo,
                vec![
                    ("route", json!(route_name)),
                    ("columns", json!(["t", "growth"])),
                    ("rows", Value::Array(rows)),
                ],
            )
        }
    };
    write_atomic(Path::new(out_path(cfg)), &doc)
}

fn run_gen(cfg: &RunConfig, echo: &Echo) -> Result<(), CliError> {
    let problem = cfg.problem.as_deref().expect("validated");
    let need = |missing: bool, name: &str| -> Result<(), CliError> {
        if missing {
            return Err(input(format!("{problem} requires --{name}")));
        }
        Ok(())
    };
    let forbid = |present: bool, name: &str| -> Result<(), CliError> {
        if present {
            return Err(input(format!("--{name} does not apply to {problem}")));
        }
        Ok(())
    };

    let p = match problem {
        "jordan" => {
            need(cfg.n.is_none(), "n")?;
            need(cfg.lam.is_none(), "lam")?;
            forbid(cfg.lambdas.is_some(), "lambdas")?;
            forbid(cfg.seed.is_some(), "seed")?;
            forbid(cfg.c.is_some(), "c")?;
            forbid(cfg.nu.is_some(), "nu")?;
            forbid(cfg.out_m.is_some(), "out-m")?;
            let lam = config::parse_complex(cfg.lam.as_deref().unwrap()).map_err(input)?;
            problems::jordan(cfg.n.unwrap(), lam).map_err(lib_err)?
        }
        "normal" => {
            need(cfg.lambdas.is_none(), "lambdas")?;
            forbid(cfg.n.is_some(), "n")?;
            forbid(cfg.lam.is_some(), "lam")?;
            forbid(cfg.c.is_some(), "c")?;
            forbid(cfg.nu.is_some(), "nu")?;
            forbid(cfg.out_m.is_some(), "out-m")?;
            let lambdas = config::parse_spectrum(cfg.lambdas.as_deref().unwrap()).map_err(input)?;
            problems::normal_from_spectrum(&lambdas, cfg.seed.expect("resolved")).map_err(lib_err)?
        }
        "fem" => {
            need(cfg.n.is_none(), "n")?;
            need(cfg.c.is_none(), "c")?;
            need(cfg.nu.is_none(), "nu")?;
            need(cfg.out_m.is_none(), "out-m")?;
            forbid(cfg.lam.is_some(), "lam")?;
            forbid(cfg.lambdas.is_some(), "lambdas")?;
            forbid(cfg.seed.is_some(), "seed")?;
            problems::fem_advection_diffusion(cfg.n.unwrap(), cfg.c.unwrap(), cfg.nu.unwrap())
                .map_err(lib_err)?
        }
        other => return Err(input(format!("unknown problem `{other}` (jordan, normal, fem)"))),
    };

    write_atomic(
        Path::new(out_path(cfg)),
        &mtx::format_matrix(p.a(), &echo.line),
    )?;
    if let Some(out_m) = &cfg.out_m {
        write_atomic(Path::new(out_m), &mtx::format_matrix(p.m(), &echo.line))?;
    }
    Ok(())
}
