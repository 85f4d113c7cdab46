//! Runs every checker over sampled test functions on `(ℝ^n, μ_r^{⊗n})`.

use rayon::prelude::*;

use crate::error::Result;
use crate::inequalities::{
    check_concentration, check_hardy_condition, check_ledoux, check_linfty_embedding,
    check_lp_loglq, check_ls_poincare, check_main, check_poincare_median, check_polya_szego,
    check_profile_weighted_embeddings, check_talenti_mazya, CheckOptions, InequalityReport,
    Verdict,
};
use crate::model::{IsoProfile, ModelMeasure};
use crate::norms::{deviation_from_mean, NormSpec};
use crate::operators::canonical_testers;
use crate::rearrangement::SampledFunction;
use crate::testfns::{builtin_family, TestFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub rs: Vec<f64>,
    pub dims: Vec<usize>,
    pub points: usize,
    pub seed: u64,
    pub options: CheckOptions,
    /// Spaces `X` for the `LS(X)` Poincaré check.
    pub ls_spaces: Vec<NormSpec<f64>>,
    /// Exponent of the `L^p (log L)^{p/q}` check.
    pub lp_exponent: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            rs: vec![1.2, 1.5, 2.0],
            dims: vec![1, 2, 3],
            points: 100_000,
            seed: 7,
            options: CheckOptions::default(),
            ls_spaces: vec![NormSpec::L1, NormSpec::Lp { p: 2.0 }, NormSpec::Linf],
            lp_exponent: 2.0,
        }
    }
}

fn collect(name: &str, out: &mut Vec<InequalityReport>, rep: Result<InequalityReport>) {
    match rep {
        Ok(rep) => out.push(rep),
        Err(e) => out.push(InequalityReport::skipped(name, &e.to_string())),
    }
}

/// All per-function checks for one sampled function.
pub fn check_function<P: IsoProfile<f64>>(
    f: &SampledFunction<f64>,
    measure: &ModelMeasure<f64>,
    profile: &P,
    cfg: &SuiteConfig,
) -> Vec<InequalityReport> {
    let opts = &cfg.options;
    let mut out = vec![
        check_ledoux(f, profile, opts),
        check_talenti_mazya(f, profile, opts),
        check_polya_szego(f, profile, opts),
        check_main(f, profile, opts),
        check_poincare_median(f, profile, opts),
    ];
    for space in &cfg.ls_spaces {
        collect(
            "ls_poincare",
            &mut out,
            check_ls_poincare(f, profile, space, opts),
        );
    }
    collect(
        "concentration",
        &mut out,
        check_concentration(f, measure, opts),
    );
    collect(
        "linfty_embedding",
        &mut out,
        check_linfty_embedding(f, measure),
    );
    collect(
        "lp_logl",
        &mut out,
        check_lp_loglq(f, measure, cfg.lp_exponent),
    );
    let p = cfg.lp_exponent;
    let x = NormSpec::Lp { p };
    let y = NormSpec::LpLogL {
        p,
        alpha: measure.inv_q(),
    };
    match check_profile_weighted_embeddings(&deviation_from_mean(f), profile, &x, &y, opts) {
        Ok(reps) => out.extend(reps),
        Err(e) => out.push(InequalityReport::skipped(
            "weighted_embedding",
            &e.to_string(),
        )),
    }
    out
}

/// The Hardy-type constant for `X = L^p`, `Y = L^p (log L)^{p/q}` on the
/// canonical testers.
pub fn hardy_report<P: IsoProfile<f64>>(
    measure: &ModelMeasure<f64>,
    profile: &P,
    p: f64,
) -> InequalityReport {
    let x = NormSpec::Lp { p };
    let y = NormSpec::LpLogL {
        p,
        alpha: measure.inv_q(),
    };
    let rep =
        canonical_testers(&x).and_then(|testers| check_hardy_condition(profile, &x, &y, &testers));
    match rep {
        Ok(rep) => rep,
        Err(e) => InequalityReport::skipped("hardy", &e.to_string()),
    }
}

/// Runs the built-in family for every `(r, n)`; reports come out ordered by
/// `(r, n, function, checker)`.
pub fn run_builtin(cfg: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    let mut jobs: Vec<(usize, f64, usize, u64)> = Vec::new();
    for (ri, &r) in cfg.rs.iter().enumerate() {
        for &n in &cfg.dims {
            jobs.push((ri, r, n, cfg.seed ^ ((ri as u64) << 32) ^ (n as u64) << 48));
        }
    }
    let per_job: Vec<Vec<InequalityReport>> = jobs
        .par_iter()
        .map(|&(_, r, n, seed)| -> Result<Vec<InequalityReport>> {
            let measure = ModelMeasure::new(r, n)?;
            let profile = measure.profile().tabulate();
            let points = measure.sample(cfg.points, seed)?;
            let mut out = Vec::new();
            for (label, tf) in builtin_family(n, cfg.seed) {
                let f = tf.sample(&points)?;
                out.extend(
                    check_function(&f, &measure, &profile, cfg)
                        .into_iter()
                        .map(|rep| rep.labelled(&label, Some(r), Some(n))),
                );
            }
            out.push(hardy_report(&measure, &profile, cfg.lp_exponent).labelled(
                "canonical_testers",
                Some(r),
                Some(n),
            ));
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Checks for user-supplied functions, which carry no point coordinates.
pub fn run_supplied(
    cfg: &SuiteConfig,
    name: &str,
    f: &SampledFunction<f64>,
) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    for &r in &cfg.rs {
        let measure = ModelMeasure::new(r, 1)?;
        let profile = measure.profile().tabulate();
        out.extend(
            check_function(f, &measure, &profile, cfg)
                .into_iter()
                .map(|rep| rep.labelled(name, Some(r), None)),
        );
    }
    Ok(out)
}

pub fn any_failure(reports: &[InequalityReport]) -> bool {
    reports.iter().any(|r| r.verdict == Verdict::Fail)
}

/// `f` for the function and points given.
pub fn sample_test_function(
    tf: &TestFunction,
    r: f64,
    dim: usize,
    points: usize,
    seed: u64,
) -> Result<SampledFunction<f64>> {
    let measure = ModelMeasure::new(r, dim)?;
    tf.sample(&measure.sample(points, seed)?)
}
