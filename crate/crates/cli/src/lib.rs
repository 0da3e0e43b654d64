//! Command-line front end for the klsc library.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use klsc::asymptotics::regularity_class_with_order;
use klsc::curvature::{curvature_sweep, CurvatureRow};
use klsc::geometry::{HermitianMetricRadial, KahlerPotentialDeriv};
use klsc::io::{metric_from_json, metric_to_json, pair_from_json, pair_to_json};
use klsc::klsc::{
    build_klsc_metric, check_admissible, klsc_from_potential, Admissibility, AdmissiblePair, KlscConstruction,
};
use klsc::quadrature::set_tolerance_override;
use klsc::radial::{Annulus, Basepoint, Normalization};
use klsc::suite::{report_json, report_text, run_example, Example};
use klsc::{parse, KlscError};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const MIN_GRID: usize = 16;
pub const DEFECT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "klsc", version, about = "Construct and verify U(n)-invariant Hermitian metrics with S = 2 S_C")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Domain {
    #[arg(long)]
    pub n: Option<usize>,
    /// Inner and outer radius in z = |w|^2; the outer one may be `inf`.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], allow_hyphen_values = true)]
    pub annulus: Option<Vec<String>>,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub domain: Domain,
    #[arg(long = "F")]
    pub f: Option<String>,
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// A number, `inf` or `canonical`.
    #[arg(long, default_value = "canonical")]
    pub basepoint: String,
    /// Value of the antiderivative at the basepoint.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub basevalue: f64,
    /// Pair JSON file; replaces the other pair flags.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Tabulate S, S_C and S - 2 S_C of a radial metric.
    Curvature {
        #[command(flatten)]
        domain: Domain,
        #[arg(long = "E")]
        e: Option<String>,
        #[arg(long = "F")]
        f: Option<String>,
        /// Metric JSON file; replaces --n, --annulus, --E and --F.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Conformally rescale a Kahler metric to a Klsc metric.
    KlscFromPotential {
        #[command(flatten)]
        domain: Domain,
        /// The potential as a function of z.
        #[arg(long, conflicts_with = "dphi")]
        phi: Option<String>,
        /// The derivative of the potential.
        #[arg(long)]
        dphi: Option<String>,
        #[arg(long, default_value = "canonical")]
        basepoint: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        basevalue: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Build the Klsc metric of an admissible pair (F, C).
    KlscFromPair(PairArgs),
    /// Decide whether (F, C) is admissible.
    Admissible(PairArgs),
    /// Regularity class at the origin of the metric of a pair.
    Regularity {
        #[command(flatten)]
        pair: PairArgs,
        /// Series truncation order.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Run the worked examples.
    Examples {
        /// flat, burns, fubini-study, z2-z8 or z-z2.
        #[arg(long)]
        which: Option<String>,
    },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub quad_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli, quad_tol: Option<f64>) -> Self {
        RunConfig { command: cli.command, out: cli.out, json: cli.json, quad_tol }
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<KlscError> for CliError {
    fn from(e: KlscError) -> Self {
        match e {
            KlscError::ToleranceNotMet { .. } | KlscError::TruncationInsufficient(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// What a run produced: the artifact text and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub status: i32,
    pub output: String,
    pub diagnostics: Vec<String>,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_annulus(v: &Option<Vec<String>>) -> Result<Annulus, CliError> {
    let v = v.as_ref().ok_or_else(|| validation("--annulus is required"))?;
    let alpha: f64 = v[0].parse().map_err(|_| validation(format!("bad inner radius `{}`", v[0])))?;
    let beta = match v[1].as_str() {
        "inf" | "infinity" => None,
        b => Some(b.parse::<f64>().map_err(|_| validation(format!("bad outer radius `{b}`")))?),
    };
    Ok(Annulus::new(alpha, beta)?)
}

fn parse_basepoint(s: &str) -> Result<Basepoint, CliError> {
    match s {
        "canonical" => Ok(Basepoint::Canonical),
        "inf" | "infinity" => Ok(Basepoint::Infinity),
        x => Ok(Basepoint::Finite(x.parse().map_err(|_| validation(format!("bad basepoint `{x}`")))?)),
    }
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| validation(format!("{flag} is required")))
}

fn dimension(d: &Domain) -> Result<usize, CliError> {
    d.n.ok_or_else(|| validation("--n is required"))
}

fn check_grid(d: &Domain) -> Result<(), CliError> {
    if d.grid < MIN_GRID {
        return Err(validation(format!("--grid must be at least {MIN_GRID}")));
    }
    Ok(())
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn build_pair(a: &PairArgs) -> Result<AdmissiblePair, CliError> {
    if let Some(path) = &a.input {
        return Ok(pair_from_json(&read_json(path)?)?);
    }
    let norm = Normalization { basepoint: parse_basepoint(&a.basepoint)?, value: a.basevalue };
    let c = a.c.ok_or_else(|| validation("--C is required"))?;
    Ok(AdmissiblePair::with_normalization(
        dimension(&a.domain)?,
        parse_annulus(&a.domain.annulus)?,
        parse(required(&a.f, "--F")?)?,
        c,
        norm,
    )?)
}

fn rows_json(rows: &[CurvatureRow]) -> Value {
    Value::Array(rows.iter().map(|r| json!({"z": r.z, "S": r.s, "S_C": r.s_c, "defect": r.defect})).collect())
}

fn max_defect(rows: &[CurvatureRow]) -> f64 {
    rows.iter().map(|r| r.defect.abs() / (1.0 + r.s.abs())).fold(0.0, f64::max)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn construction_json(c: &KlscConstruction, grid: usize) -> Result<(Value, f64), CliError> {
    let mut pieces = Vec::new();
    let mut worst = 0.0f64;
    for m in c.pieces()? {
        let rows = curvature_sweep(&m, &m.domain().grid(grid))?;
        worst = worst.max(max_defect(&rows));
        let mut v = json!({ "metric": metric_to_json(&m), "max_defect": max_defect(&rows), "sweep": rows_json(&rows) });
        if m.domain().contains(1.0) {
            v["E_at_1"] = json!(m.e().eval(1.0)?);
            v["F_at_1"] = json!(m.f().eval(1.0)?);
        }
        pieces.push(v);
    }
    let v = json!({
        "dphi": c.potential.dphi().print(),
        "factor_squared": c.factor_squared.print(),
        "factor_zero": c.split.zero,
        "max_defect": worst,
        "pieces": pieces,
    });
    Ok((v, worst))
}

fn defect_status(worst: f64, diagnostics: &mut Vec<String>) -> i32 {
    if worst <= DEFECT_TOL {
        EXIT_OK
    } else {
        diagnostics.push(format!("defect {worst:.3e} exceeds {DEFECT_TOL:e}"));
        EXIT_VALIDATION
    }
}

fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut diagnostics = Vec::new();
    let (status, output) = match &cfg.command {
        Command::Curvature { domain, e, f, input } => {
            check_grid(domain)?;
            let m = match input {
                Some(path) => metric_from_json(&read_json(path)?)?,
                None => HermitianMetricRadial::new(
                    dimension(domain)?,
                    parse_annulus(&domain.annulus)?,
                    parse(required(e, "--E")?)?,
                    parse(required(f, "--F")?)?,
                )?,
            };
            let rows = curvature_sweep(&m, &m.domain().grid(domain.grid))?;
            let text = if cfg.json {
                pretty(
                    &json!({ "metric": metric_to_json(&m), "max_defect": max_defect(&rows), "rows": rows_json(&rows) }),
                )
            } else {
                klsc::io::curvature_csv(&rows)
            };
            (EXIT_OK, text)
        }
        Command::KlscFromPotential { domain, phi, dphi, basepoint, basevalue, scale } => {
            check_grid(domain)?;
            let n = dimension(domain)?;
            let annulus = parse_annulus(&domain.annulus)?;
            let p = match (phi, dphi) {
                (Some(phi), None) => KahlerPotentialDeriv::from_potential(n, annulus, &parse(phi)?)?,
                (None, Some(d)) => KahlerPotentialDeriv::new(n, annulus, parse(d)?)?,
                _ => return Err(validation("exactly one of --phi and --dphi is required")),
            };
            let norm = Normalization { basepoint: parse_basepoint(basepoint)?, value: *basevalue };
            let c = klsc_from_potential(&p, norm, *scale)?;
            let (v, worst) = construction_json(&c, domain.grid)?;
            (defect_status(worst, &mut diagnostics), pretty(&v))
        }
        Command::KlscFromPair(a) => {
            check_grid(&a.domain)?;
            let pair = build_pair(a)?;
            if let Admissibility::NotAdmissible { z, reason } = check_admissible(&pair)? {
                return Err(validation(format!("pair is not admissible at z = {z}: {reason}")));
            }
            let c = build_klsc_metric(&pair)?;
            let (mut v, worst) = construction_json(&c, a.domain.grid)?;
            v["pair"] = pair_to_json(&pair);
            (defect_status(worst, &mut diagnostics), pretty(&v))
        }
        Command::Admissible(a) => {
            let pair = build_pair(a)?;
            let adm = check_admissible(&pair)?;
            let (status, v) = match &adm {
                Admissibility::Admissible => (EXIT_OK, json!({"admissible": true})),
                Admissibility::NotAdmissible { z, reason } => {
                    (EXIT_VALIDATION, json!({"admissible": false, "z": z, "reason": reason}))
                }
            };
            let text = if cfg.json {
                pretty(&json!({"pair": pair_to_json(&pair), "result": v}))
            } else {
                match adm {
                    Admissibility::Admissible => "admissible\n".to_string(),
                    Admissibility::NotAdmissible { z, reason } => format!("not admissible at z = {z}: {reason}\n"),
                }
            };
            (status, text)
        }
        Command::Regularity { pair, order } => {
            let pair = build_pair(pair)?;
            let r = regularity_class_with_order(&pair, *order)?;
            let text = if cfg.json {
                pretty(&r.to_json())
            } else {
                let quotient = match r.quotient.ell {
                    Some(l) => format!("{l} ({})", if r.quotient.nonsingular { "nonsingular" } else { "orbifold" }),
                    None => "not an integer".to_string(),
                };
                format!(
                    "class: {}{}\nlog obstruction: {}\neta: {}\ncone order k: {}\nquotient order: {}\n",
                    r.smoothness,
                    if r.truncation_conditional { " (up to the series truncation)" } else { "" },
                    r.log_obstruction,
                    r.eta,
                    r.k,
                    quotient,
                )
            };
            (EXIT_OK, text)
        }
        Command::Examples { which } => {
            let examples = match which {
                None => Example::ALL.to_vec(),
                Some(name) => {
                    vec![Example::from_name(name).ok_or_else(|| validation(format!("unknown example `{name}`")))?]
                }
            };
            let reports: Vec<_> = examples.into_iter().map(run_example).collect();
            let ok = reports.iter().all(|r| r.passed());
            let text = if cfg.json { pretty(&report_json(&reports)) } else { report_text(&reports) };
            (if ok { EXIT_OK } else { EXIT_VALIDATION }, text)
        }
    };
    Ok(Outcome { status, output, diagnostics })
}

/// Write `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(t) = cfg.quad_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(validation("quadrature tolerance must be positive"));
        }
    }
    set_tolerance_override(cfg.quad_tol);
    let outcome = execute(cfg);
    set_tolerance_override(None);
    let outcome = outcome?;
    if let Some(path) = &cfg.out {
        write_atomic(path, &outcome.output).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    }
    Ok(outcome)
}

/// Reads `KLSC_QUAD_TOL`.
pub fn quad_tol_from_env() -> Result<Option<f64>, CliError> {
    match std::env::var("KLSC_QUAD_TOL") {
        Err(_) => Ok(None),
        Ok(s) => s.trim().parse::<f64>().map(Some).map_err(|_| validation(format!("KLSC_QUAD_TOL: bad number `{s}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("klsc").chain(args.iter().copied())).unwrap();
        RunConfig::from_cli(cli, None)
    }

    #[test]
    fn annulus_accepts_infinity() {
        let a = parse_annulus(&Some(vec!["0".into(), "inf".into()])).unwrap();
        assert_eq!((a.alpha(), a.beta()), (0.0, None));
        assert!(parse_annulus(&Some(vec!["2".into(), "1".into()])).is_err());
        assert!(parse_annulus(&None).is_err());
    }

    #[test]
    fn validation_errors_map_to_status_two() {
        let e = run(&config(&["curvature", "--n", "2", "--E", "1", "--F", "1", "--annulus", "1", "2", "--grid", "4"]));
        assert_eq!(e.unwrap_err().exit_code(), EXIT_VALIDATION);
        let mut cfg = config(&["curvature", "--n", "2", "--E", "1", "--F", "1", "--annulus", "1", "2"]);
        cfg.quad_tol = Some(0.0);
        assert_eq!(run(&cfg).unwrap_err().exit_code(), EXIT_VALIDATION);
        let e = CliError::from(KlscError::ToleranceNotMet { achieved: 1.0, requested: 0.1 });
        assert_eq!(e.exit_code(), EXIT_INTERNAL);
    }

    #[test]
    fn flat_curvature_vanishes() {
        let out =
            run(&config(&["curvature", "--n", "3", "--E", "1", "--F", "1", "--annulus", "0.5", "2", "--grid", "16"]))
                .unwrap();
        assert_eq!(out.status, EXIT_OK);
        let rows = klsc::io::parse_curvature_csv(&out.output).unwrap();
        assert!(rows.iter().all(|r| r.s == 0.0 && r.s_c == 0.0 && !r.s.is_sign_negative()));
    }
}
