//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::inequalities::{CheckOptions, InequalityReport};
use crate::io as fio;
use crate::model::{IsoProfile, ModelMeasure};
use crate::norms::{ls_norm, norm, NormSpec};
use crate::oracle::{ProfileBucket, DEFAULT_BUCKETS};
use crate::rearrangement::{rearrange, rearrange_gradient};
use crate::suite::{any_failure, run_builtin, run_supplied, SuiteConfig};
use crate::testfns::{builtin_family, TestFunction};

/// Version of the JSON layout written by every subcommand.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "isosym",
    version,
    about = "Rearrangements, isoperimetric profiles and Poincaré-type checks for μ_r measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// CSV of (t, I(t), asymptotic(t), ratio) on the endpoint-refined grid
    Profile,
    /// Run every checker; JSON reports to --out, CSV summary to --summary
    Verify,
    /// Brute-force profile of the finite space in --in
    Oracle,
    /// Decreasing rearrangement of the function in --in as CSV (s, value)
    Rearrange,
    /// Norms of the function in --in for each --norm
    Norms,
    /// Sample a built-in test function under μ_r^{⊗n}
    Sample,
}

#[derive(Clone, Debug, PartialEq, clap::Args)]
pub struct RunConfig {
    /// Exponent of μ_r, in [1, 2]; verify runs 1.2, 1.5 and 2 when absent
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Dimension; verify runs 1, 2 and 3 when absent
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub points: usize,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Profile nodes (default 256), or measure buckets for the oracle (default 64)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub abs_tol: f64,
    /// Norm spec such as Lp:2, Lorentz:2,1, LpLogL:2,0.5, L1 or Linf; repeatable
    #[arg(long = "norm", global = true)]
    pub norms: Vec<NormSpec<f64>>,
    /// Input file; repeatable for verify
    #[arg(long = "in", global = true)]
    pub input: Vec<PathBuf>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV summary of verify
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// Verify only the --in functions
    #[arg(long, global = true)]
    pub skip_builtin: bool,
    /// Test function for sample: a built-in label or a JSON object
    #[arg(long, global = true, default_value = "coordinate")]
    pub function: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r: None,
            dim: None,
            points: 100_000,
            seed: 7,
            grid: None,
            rel_tol: 1e-3,
            abs_tol: 1e-9,
            norms: Vec::new(),
            input: Vec::new(),
            out: None,
            summary: None,
            skip_builtin: false,
            function: "coordinate".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.r {
            if !(1.0..=2.0).contains(&r) {
                return Err(invalid(format!("--r must lie in [1, 2], got {r}")));
            }
        }
        if self.dim == Some(0) {
            return Err(invalid("--dim must be at least 1"));
        }
        if self.points == 0 {
            return Err(invalid("--points must be at least 1"));
        }
        if let Some(grid) = self.grid.filter(|&g| g < 16) {
            return Err(invalid(format!("--grid must be at least 16, got {grid}")));
        }
        if !(self.rel_tol >= 0.0 && self.abs_tol >= 0.0) {
            return Err(invalid("tolerances must be non-negative"));
        }
        for spec in &self.norms {
            spec.validate()?;
        }
        Ok(())
    }

    fn r_or(&self, default: f64) -> f64 {
        self.r.unwrap_or(default)
    }

    fn one_input(&self) -> Result<&Path> {
        match self.input.as_slice() {
            [path] => Ok(path),
            _ => Err(invalid("give exactly one --in file")),
        }
    }

    fn suite(&self) -> SuiteConfig {
        let mut cfg = SuiteConfig {
            points: self.points,
            seed: self.seed,
            options: CheckOptions {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                ..CheckOptions::default()
            },
            ..SuiteConfig::default()
        };
        if let Some(r) = self.r {
            cfg.rs = vec![r];
        }
        if let Some(n) = self.dim {
            cfg.dims = vec![n];
        }
        if !self.norms.is_empty() {
            cfg.ls_spaces = self.norms.clone();
        }
        cfg
    }
}

/// Runs one subcommand. `Ok(false)` means a checker failed.
pub fn run(command: Command, cfg: &RunConfig) -> Result<bool> {
    cfg.validate()?;
    match command {
        Command::Profile => profile(cfg).map(|_| true),
        Command::Verify => verify(cfg),
        Command::Oracle => oracle(cfg).map(|_| true),
        Command::Rearrange => rearrange_cmd(cfg).map(|_| true),
        Command::Norms => norms(cfg).map(|_| true),
        Command::Sample => sample(cfg).map(|_| true),
    }
}

/// Sends `body` to `path`, or to standard output.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let mut out = fio::create(path)?;
            body(&mut out)?;
            out.flush().map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            body(&mut out)?;
            out.flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn emit_json<S: Serialize>(path: Option<&Path>, value: &S) -> Result<()> {
    emit(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out).map_err(|source| Error::Io {
            path: "<output>".into(),
            source,
        })
    })
}

fn profile(cfg: &RunConfig) -> Result<()> {
    let measure = ModelMeasure::new(cfg.r_or(2.0), 1)?;
    let rows = measure.profile_table(cfg.grid.unwrap_or(256));
    emit(cfg.out.as_deref(), |out| {
        fio::write_profile_table(out, &rows)
    })
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    schema: u32,
    points: usize,
    seed: u64,
    rel_tol: f64,
    abs_tol: f64,
    reports: &'a [InequalityReport],
}

/// Reports for the built-in family and every `--in` file, in that order.
pub fn verify_reports(cfg: &RunConfig) -> Result<Vec<InequalityReport>> {
    let suite = cfg.suite();
    let mut reports = if cfg.skip_builtin {
        Vec::new()
    } else {
        run_builtin(&suite)?
    };
    for path in &cfg.input {
        let f = fio::read_function(path)?;
        reports.extend(run_supplied(&suite, &path.display().to_string(), &f)?);
    }
    Ok(reports)
}

fn verify(cfg: &RunConfig) -> Result<bool> {
    let reports = verify_reports(cfg)?;
    let output = VerifyOutput {
        schema: SCHEMA,
        points: cfg.points,
        seed: cfg.seed,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        reports: &reports,
    };
    emit_json(cfg.out.as_deref(), &output)?;
    if let Some(path) = &cfg.summary {
        emit(Some(path), |out| write_summary(out, &reports))?;
    }
    Ok(!any_failure(&reports))
}

/// One row per report: `checker,function,r,n,verdict,lhs,rhs,realized_constant`.
pub fn write_summary(out: &mut dyn Write, reports: &[InequalityReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "checker",
        "function",
        "r",
        "n",
        "verdict",
        "lhs",
        "rhs",
        "realized_constant",
    ])?;
    for rep in reports {
        let verdict = serde_json::to_value(rep.verdict)?;
        w.serialize((
            &rep.name,
            &rep.function,
            rep.r,
            rep.dim,
            verdict.as_str().unwrap_or(""),
            rep.lhs,
            rep.rhs,
            rep.realized_constant,
        ))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<summary>".into(),
        source,
    })
}

#[derive(Serialize)]
struct ContinuumRow {
    measure: f64,
    discrete: f64,
    continuum: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct OracleOutput {
    schema: u32,
    points: usize,
    h: f64,
    buckets: Vec<ProfileBucket<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    continuum: Option<Vec<ContinuumRow>>,
}

fn oracle(cfg: &RunConfig) -> Result<()> {
    let file = fio::read_space(cfg.one_input()?)?;
    let space = file.build()?;
    let buckets = space.iso_profile_bruteforce(cfg.grid.unwrap_or(DEFAULT_BUCKETS))?;
    let continuum = match file.grid {
        Some(tag) => {
            let profile = ModelMeasure::new(tag.r, 1)?.profile();
            Some(
                buckets
                    .iter()
                    .map(|b| {
                        let continuum = profile.value(b.measure);
                        ContinuumRow {
                            measure: b.measure,
                            discrete: b.min_perimeter,
                            continuum,
                            relative_error: (b.min_perimeter - continuum).abs() / continuum,
                        }
                    })
                    .collect(),
            )
        }
        None => None,
    };
    let output = OracleOutput {
        schema: SCHEMA,
        points: space.len(),
        h: space.resolution(),
        buckets,
        continuum,
    };
    emit_json(cfg.out.as_deref(), &output)
}

fn rearrange_cmd(cfg: &RunConfig) -> Result<()> {
    let f = fio::read_function(cfg.one_input()?)?;
    emit(cfg.out.as_deref(), |out| {
        fio::write_quantile(out, &rearrange(&f))
    })
}

#[derive(Serialize)]
struct NormRow {
    norm: String,
    value: f64,
    gradient: f64,
    ls: f64,
}

#[derive(Serialize)]
struct NormsOutput {
    schema: u32,
    r: f64,
    norms: Vec<NormRow>,
}

fn norms(cfg: &RunConfig) -> Result<()> {
    let f = fio::read_function(cfg.one_input()?)?;
    let r = cfg.r_or(2.0);
    let profile = ModelMeasure::new(r, 1)?.profile().tabulate();
    let specs = if cfg.norms.is_empty() {
        vec![NormSpec::L1, NormSpec::Lp { p: 2.0 }, NormSpec::Linf]
    } else {
        cfg.norms.clone()
    };
    let (q, grad) = (rearrange(&f), rearrange_gradient(&f));
    let rows = specs
        .iter()
        .map(|spec| {
            Ok(NormRow {
                norm: spec.to_string(),
                value: norm(spec, &q)?,
                gradient: norm(spec, &grad)?,
                ls: ls_norm(spec, &f, &profile)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit_json(
        cfg.out.as_deref(),
        &NormsOutput {
            schema: SCHEMA,
            r,
            norms: rows,
        },
    )
}

/// The test function named by `--function`.
pub fn resolve_function(name: &str, dim: usize, seed: u64) -> Result<TestFunction> {
    if name.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(name)?);
    }
    builtin_family(dim, seed)
        .into_iter()
        .find(|(label, _)| label == name)
        .map(|(_, f)| f)
        .ok_or_else(|| {
            let known: Vec<String> = builtin_family(dim, seed)
                .into_iter()
                .map(|(l, _)| l)
                .collect();
            invalid(format!(
                "unknown function {name:?}; built-in: {}",
                known.join(", ")
            ))
        })
}

fn sample(cfg: &RunConfig) -> Result<()> {
    let dim = cfg.dim.unwrap_or(1);
    let tf = resolve_function(&cfg.function, dim, cfg.seed)?;
    let f = tf.sample(&ModelMeasure::new(cfg.r_or(2.0), dim)?.sample(cfg.points, cfg.seed)?)?;
    match cfg.out.as_deref() {
        Some(path) => fio::write_function(path, &f),
        None => emit(None, |out| fio::write_function_csv(out, &f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_ranges() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            RunConfig {
                r: Some(2.5),
                ..RunConfig::default()
            },
            RunConfig {
                r: Some(0.9),
                ..RunConfig::default()
            },
            RunConfig {
                dim: Some(0),
                ..RunConfig::default()
            },
            RunConfig {
                points: 0,
                ..RunConfig::default()
            },
            RunConfig {
                grid: Some(15),
                ..RunConfig::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "isosym",
            "verify",
            "--r",
            "1.5",
            "--norm",
            "Lorentz:2,1",
            "--norm",
            "Linf",
            "--in",
            "a.csv",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::Verify);
        assert_eq!(cli.cfg.r, Some(1.5));
        assert_eq!(
            cli.cfg.norms,
            vec![NormSpec::Lorentz { p: 2.0, q: 1.0 }, NormSpec::Linf]
        );
        assert!(Cli::try_parse_from(["isosym", "norms", "--norm", "Lq:2"]).is_err());
    }

    #[test]
    fn resolves_builtin_and_json_functions() {
        assert_eq!(
            resolve_function("coordinate", 2, 7).unwrap(),
            TestFunction::Coordinate
        );
        assert!(matches!(
            resolve_function("polynomial_1", 2, 7).unwrap(),
            TestFunction::Polynomial { .. }
        ));
        let c = resolve_function(r#"{"kind": "constant", "c": 3}"#, 1, 7).unwrap();
        assert_eq!(c, TestFunction::Constant { c: 3.0 });
        assert!(resolve_function("nope", 1, 7).is_err());
    }
}
