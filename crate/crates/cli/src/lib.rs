//! Argument handling, dispatch and report writing for the `lft` binary.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use lft_core::ftype::{check_p, estimate_constant, Estimate, EstimatorConfig};
use lft_core::group::subgroup;
use lft_core::verify::{self, CheckConfig, CheckReport};
use lft_core::vecfun::conjugate;
use lft_core::{BanachSpec, GroupModel, OperatorSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Invalid(#[from] lft_core::Error),
    #[error("invalid --{flag}: {message}")]
    Flag { flag: &'static str, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn flag(flag: &'static str, message: impl Into<String>) -> Self {
        CliError::Flag { flag, message: message.into() }
    }

    /// Help and version requests are not errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "lft", version, about = "Fourier-type constants of operators on LCA group models")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand)]
enum CommandArgs {
    /// Lower-bound estimate of ||T | FT_p^G||
    Estimate(Flags),
    /// Run theorem checks
    Verify(Flags),
    /// Estimate and checks in one report
    Report(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// Group spec, e.g. "Z4", "Z2 x Z3", "Zlat[8] x Z2"
    #[arg(long)]
    group: String,
    /// Subgroup generators: "2" or "1,0;0,1"
    #[arg(long)]
    subgroup: Option<String>,
    /// id:<dim>[:q=..], zero:<dim>[:q=..], scalar:<re>[,<im>], file:<path>, or an inline JSON matrix;
    /// file and inline forms take :qx=..:qy=.. suffixes
    #[arg(long, default_value = "id:1:q=2")]
    op: String,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Relative ratio change at which an ascent stops
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Check to run (repeatable); `all` selects every check
    #[arg(long = "check")]
    checks: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Estimate,
    Verify,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    SincSum,
    Parseval,
    Weil,
    OpenSubgroup,
    Fcc,
    Duality,
    Eqrz,
    Zng,
}

impl CheckId {
    pub const ALL: [CheckId; 8] = [
        CheckId::SincSum,
        CheckId::Parseval,
        CheckId::Weil,
        CheckId::OpenSubgroup,
        CheckId::Fcc,
        CheckId::Duality,
        CheckId::Eqrz,
        CheckId::Zng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::SincSum => "sinc_sum",
            CheckId::Parseval => "parseval",
            CheckId::Weil => "weil",
            CheckId::OpenSubgroup => "open_subgroup",
            CheckId::Fcc => "fcc",
            CheckId::Duality => "duality",
            CheckId::Eqrz => "eqrz",
            CheckId::Zng => "zng",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CheckId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        CheckId::ALL.into_iter().find(|c| c.name() == key).ok_or_else(|| {
            let names: Vec<_> = CheckId::ALL.iter().map(|c| c.name()).collect();
            format!("unknown check `{s}` (expected one of: all, {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub group_spec: String,
    pub group: GroupModel,
    /// Generators of the subgroup used by subgroup checks.
    pub subgroup: Vec<Vec<i64>>,
    pub op_source: String,
    pub operator: OperatorSpec,
    pub p: f64,
    pub estimator: EstimatorConfig,
    pub checks: Vec<CheckId>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, flags) = match cli.command {
        CommandArgs::Estimate(f) => (Command::Estimate, f),
        CommandArgs::Verify(f) => (Command::Verify, f),
        CommandArgs::Report(f) => (Command::Report, f),
    };
    check_p(flags.p)?;
    let group: GroupModel = flags.group.parse()?;
    let operator = parse_operator(&flags.op)?;
    let subgroup = match &flags.subgroup {
        Some(s) => parse_generators(s, group.rank())?,
        None => default_generators(&group),
    };
    let mut checks = Vec::new();
    for c in &flags.checks {
        if c.trim().eq_ignore_ascii_case("all") {
            checks.extend(CheckId::ALL);
        } else {
            checks.push(c.parse().map_err(|m| CliError::flag("check", m))?);
        }
    }
    if checks.is_empty() && command != Command::Estimate {
        checks.extend(CheckId::ALL);
    }
    let mut seen = Vec::new();
    checks.retain(|c| if seen.contains(c) { false } else { seen.push(*c); true });
    if flags.restarts == 0 {
        return Err(CliError::flag("restarts", "at least one restart is needed"));
    }
    if !(flags.tol > 0.0 && flags.tol.is_finite()) {
        return Err(CliError::flag("tol", format!("tolerance must be positive, got {}", flags.tol)));
    }
    let estimator = EstimatorConfig {
        restarts: flags.restarts,
        seed: flags.seed,
        tolerance: flags.tol,
        ..Default::default()
    };
    Ok(RunConfig {
        command,
        group_spec: flags.group,
        group,
        subgroup,
        op_source: flags.op,
        operator,
        p: flags.p,
        estimator,
        checks,
        seed: flags.seed,
        out: flags.out,
        format: flags.format,
    })
}

/// `"2"` or `"1,0;0,1"`: generators separated by `;`, coordinates by `,`.
fn parse_generators(s: &str, rank: usize) -> Result<Vec<Vec<i64>>, CliError> {
    s.split(';')
        .map(|gen| {
            let coords = gen
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| CliError::flag("subgroup", format!("`{x}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if coords.len() != rank {
                return Err(CliError::flag(
                    "subgroup",
                    format!("generator `{gen}` has {} coordinates, the group has rank {rank}", coords.len()),
                ));
            }
            Ok(coords)
        })
        .collect()
}

/// `n1 / (smallest prime factor of n1)` on the first axis: the largest proper
/// subgroup of the first cyclic factor, or the whole group when `n1` is prime.
fn default_generators(g: &GroupModel) -> Vec<Vec<i64>> {
    let mut gen = g.identity();
    if let Some(n) = g.orders().and_then(|o| o.first().copied()) {
        let n = i64::from(n);
        let spf = (2..=n).find(|d| n % d == 0).unwrap_or(1);
        gen[0] = if spf == n { 1 } else { n / spf };
    }
    vec![gen]
}

fn split_options(s: &str) -> (&str, Vec<(&str, &str)>) {
    let mut body = s;
    let mut opts = Vec::new();
    while let Some(i) = body.rfind(':') {
        match body[i + 1..].split_once('=') {
            Some((k, v)) if matches!(k, "q" | "qx" | "qy") => {
                opts.push((k, v));
                body = &body[..i];
            }
            _ => break,
        }
    }
    opts.reverse();
    (body, opts)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Full(OperatorSpec),
    Bare(Vec<Vec<Entry>>),
}

fn operator_from_json(text: &str, qx: f64, qy: f64, explicit_q: bool) -> Result<OperatorSpec, CliError> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| CliError::flag("op", format!("bad matrix JSON: {e}")))?;
    match doc {
        MatrixDoc::Full(t) if !explicit_q => Ok(t),
        MatrixDoc::Full(t) => Ok(OperatorSpec::new(
            t.matrix().to_vec(),
            BanachSpec::new(t.domain().dim, qx)?,
            BanachSpec::new(t.codomain().dim, qy)?,
        )?),
        MatrixDoc::Bare(rows) => {
            let matrix: Vec<Vec<Complex64>> = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|e| match e {
                            Entry::Real(x) => Complex64::new(x, 0.0),
                            Entry::Pair([a, b]) => Complex64::new(a, b),
                        })
                        .collect()
                })
                .collect();
            let cols = matrix.first().map_or(0, Vec::len);
            Ok(OperatorSpec::new(matrix.clone(), BanachSpec::new(cols, qx)?, BanachSpec::new(matrix.len(), qy)?)?)
        }
    }
}

pub fn parse_operator(src: &str) -> Result<OperatorSpec, CliError> {
    let (body, opts) = split_options(src.trim());
    let (mut qx, mut qy) = (2.0, 2.0);
    for (k, v) in &opts {
        let x = parse_q(v)?;
        match *k {
            "q" => (qx, qy) = (x, x),
            "qx" => qx = x,
            _ => qy = x,
        }
    }
    let explicit_q = !opts.is_empty();
    let (kind, arg) = body.split_once(':').unwrap_or((body, ""));
    match kind {
        "id" | "zero" => {
            let dim: usize = arg.parse().map_err(|_| CliError::flag("op", format!("bad dimension `{arg}`")))?;
            let (dom, cod) = (BanachSpec::new(dim, qx)?, BanachSpec::new(dim, qy)?);
            let matrix = (0..dim)
                .map(|i| {
                    (0..dim).map(|j| Complex64::new(if kind == "id" && i == j { 1.0 } else { 0.0 }, 0.0)).collect()
                })
                .collect();
            Ok(OperatorSpec::new(matrix, dom, cod)?)
        }
        "scalar" => {
            let (re, im) = arg.split_once(',').unwrap_or((arg, "0"));
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::flag("op", format!("bad number `{s}`")));
            let c = Complex64::new(num(re)?, num(im)?);
            Ok(OperatorSpec::new(vec![vec![c]], BanachSpec::new(1, qx)?, BanachSpec::new(1, qy)?)?)
        }
        "file" => {
            let text = fs::read_to_string(arg).map_err(|e| CliError::Io { path: arg.into(), source: e })?;
            operator_from_json(&text, qx, qy, explicit_q)
        }
        _ if body.starts_with('[') || body.starts_with('{') => operator_from_json(body, qx, qy, explicit_q),
        _ => Err(CliError::flag("op", format!("unrecognized operator `{src}`"))),
    }
}

fn parse_q(v: &str) -> Result<f64, CliError> {
    if v.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    v.parse().map_err(|_| CliError::flag("op", format!("bad exponent `{v}`")))
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: Command,
    group: String,
    p: f64,
    seed: u64,
    operator: &'a OperatorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<Estimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<CheckReport>,
    passed: bool,
}

fn check_config(cfg: &RunConfig) -> CheckConfig {
    CheckConfig { seed: cfg.seed, estimator: cfg.estimator.clone(), ..Default::default() }
}

pub fn run_check(id: CheckId, cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let (g, t, p) = (&cfg.group, &cfg.operator, cfg.p);
    let cc = check_config(cfg);
    let report = match id {
        CheckId::SincSum => verify::check_sinc_sum_default(conjugate(p), &cc)?,
        CheckId::Parseval => verify::check_parseval(g, t.domain().dim, &cc)?,
        CheckId::Weil => verify::check_weil(g, &subgroup(g, &cfg.subgroup)?, t.domain().dim, p, &cc)?,
        CheckId::OpenSubgroup => verify::check_open_subgroup(g, &subgroup(g, &cfg.subgroup)?, t, p, &cc)?,
        CheckId::Fcc => verify::check_fcc(g, &subgroup(g, &cfg.subgroup)?, t, p, &cc)?,
        CheckId::Duality => verify::check_duality(g, t, p, &cc)?,
        CheckId::Eqrz => verify::check_eqrz(g, t, p, &cc)?,
        CheckId::Zng => verify::check_zng(g, t, p, &cc)?,
    };
    Ok(report)
}

fn render_csv(report: &RunReport<'_>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io { path: "<csv>".into(), source: io::Error::other(e) };
    w.write_record(["kind", "id", "verdict", "value", "budget", "witnesses", "failures"]).map_err(io)?;
    if let Some(e) = &report.estimate {
        let verdict = if e.converged { "pass" } else { "fail" };
        w.write_record([
            "estimate",
            "constant",
            verdict,
            &e.bound.to_string(),
            &e.error.to_string(),
            &e.restarts.to_string(),
            "0",
        ])
        .map_err(io)?;
    }
    for c in &report.checks {
        let verdict = if c.passed() { "pass" } else { "fail" };
        w.write_record([
            "check",
            &c.id,
            verdict,
            &c.margin.to_string(),
            &c.budget.to_string(),
            &c.witnesses.to_string(),
            &c.failures.len().to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), source: e.into_error() })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Runs the configured command and writes the report; returns the exit code
/// (0 all good, 1 a check failed or the estimate did not converge).
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let estimate = match cfg.command {
        Command::Estimate | Command::Report => Some(estimate_constant(&cfg.group, &cfg.operator, cfg.p, &cfg.estimator)?),
        Command::Verify => None,
    };
    let checks = match cfg.command {
        Command::Verify | Command::Report => {
            cfg.checks.iter().map(|&id| run_check(id, cfg)).collect::<Result<Vec<_>, _>>()?
        }
        Command::Estimate => Vec::new(),
    };
    let passed = estimate.as_ref().is_none_or(|e| e.converged) && checks.iter().all(CheckReport::passed);
    let report = RunReport {
        command: cfg.command,
        group: cfg.group.to_string(),
        p: cfg.p,
        seed: cfg.seed,
        operator: &cfg.operator,
        estimate,
        checks,
        passed,
    };
    let bytes = match cfg.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&report).expect("reports serialize");
            b.push(b'\n');
            b
        }
        Format::Csv => render_csv(&report)?,
    };
    match &cfg.out {
        Some(path) => write_atomic(path, &bytes).map_err(|e| CliError::Io { path: path.clone(), source: e })?,
        None => io::stdout().write_all(&bytes).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?,
    }
    Ok(if passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, CliError> {
        parse_args(std::iter::once("lft").chain(args.split_whitespace()))
    }

    #[test]
    fn estimate_config() {
        let c = parse("estimate --group Z4 --op id:2:q=2 --p 1.5 --seed 7").unwrap();
        assert_eq!(c.command, Command::Estimate);
        assert_eq!(c.group.order(), Some(4));
        assert_eq!(c.operator.domain().dim, 2);
        assert_eq!(c.estimator.seed, 7);
        assert!(c.checks.is_empty());
    }

    #[test]
    fn p_out_of_range() {
        let err = parse("estimate --group Z4 --p 2.5").unwrap_err();
        assert!(err.to_string().contains("p must satisfy 1 < p ≤ 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn fcc_config() {
        let c = parse("verify --check fcc --group Z4 --subgroup 2 --p 2").unwrap();
        assert_eq!(c.checks, vec![CheckId::Fcc]);
        assert_eq!(c.subgroup, vec![vec![2]]);
        let c = parse("verify --check all --check fcc --group Z2xZ2 --subgroup 1,0;0,1").unwrap();
        assert_eq!(c.checks.len(), CheckId::ALL.len());
        assert_eq!(c.subgroup, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn unknown_flags_and_bad_specs() {
        assert!(matches!(parse("estimate --group Z4 --bogus 1"), Err(CliError::Usage(_))));
        let err = parse("estimate --group Z4xQ").unwrap_err();
        assert!(err.to_string().contains('^'), "{err}");
        assert!(parse("verify --group Z4 --check nonsense").is_err());
        assert!(parse("verify --group Z4 --subgroup 1,0").is_err());
    }

    #[test]
    fn default_subgroups() {
        let g = |s: &str| s.parse::<GroupModel>().unwrap();
        assert_eq!(default_generators(&g("Z4")), vec![vec![2]]);
        assert_eq!(default_generators(&g("Z6")), vec![vec![3]]);
        assert_eq!(default_generators(&g("Z3 x Z2")), vec![vec![1, 0]]);
    }

    #[test]
    fn operator_forms() {
        let t = parse_operator("zero:3:q=1.5").unwrap();
        assert!(t.is_zero());
        assert_eq!(t.domain().q, 1.5);
        let t = parse_operator("[[[1,0],[0,1]],[2,3]]:qx=1.5:qy=3").unwrap();
        assert_eq!(t.matrix()[0][1], Complex64::new(0.0, 1.0));
        assert_eq!(t.matrix()[1][0], Complex64::new(2.0, 0.0));
        assert_eq!((t.domain().q, t.codomain().q), (1.5, 3.0));
        let t = parse_operator("scalar:0,-2").unwrap();
        assert_eq!(t.matrix()[0][0], Complex64::new(0.0, -2.0));
        let full = serde_json::to_string(&t).unwrap();
        assert_eq!(parse_operator(&full).unwrap(), t);
        assert!(parse_operator("[[1,2],[3]]").is_err());
        assert!(parse_operator("rot:2").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
