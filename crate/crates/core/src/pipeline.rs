//! The end-to-end flow: moments, sampling, fitting, testing and the report.
//! Each stage is also callable on its own file artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{compile, CoreProgram, Program};
use crate::engine::{empirical_moments, sample, SampleData};
use crate::estimate::{
    diagnose, moment_support, sample_support, fit_gram_charlier_on, fit_max_entropy, DensityEstimate,
    EstimateKind, FitDiagnostics, MeOptions, Support,
};
use crate::gof::{chi_square_test, error_report, kde, ks_test, ErrorTable, TestResult, Verdict};
use crate::moments::{
    closure_basis, load_moments, moment_validity, propagate, MomentError, MomentSet, DEFAULT_CAP,
};
use crate::poly::rational_to_f64;

pub const DEFAULT_N: u64 = 100;
pub const DEFAULT_E: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BINS: usize = 15;
pub const DEFAULT_ERROR_ORDERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Parse,
    Moments,
    Sample,
    Estimate,
    Gof,
    Report,
    Io,
}

/// A failure tagged with the stage that produced it.
#[derive(Debug, Error)]
#[error("{stage:?} stage: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl ToString) -> Self {
        PipelineError {
            stage,
            message: message.to_string(),
        }
    }

    /// 2 for usage and validation problems, 1 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self.stage {
            Stage::Config | Stage::Parse => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "stage": self.stage, "message": self.message } }).to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MomentSource {
    Propagate,
    External { path: PathBuf },
    Empirical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub program: PathBuf,
    pub var: String,
    pub n: u64,
    pub e: usize,
    pub seed: u64,
    pub m: usize,
    pub source: MomentSource,
    pub support: Option<Support>,
    pub alpha: f64,
    pub bins: usize,
    /// Highest order in the error table (capped by the available exact moments).
    pub error_orders: usize,
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(program: impl Into<PathBuf>, var: impl Into<String>, m: usize) -> Self {
        PipelineConfig {
            program: program.into(),
            var: var.into(),
            n: DEFAULT_N,
            e: DEFAULT_E,
            seed: 0,
            m,
            source: MomentSource::Propagate,
            support: None,
            alpha: DEFAULT_ALPHA,
            bins: DEFAULT_BINS,
            error_orders: DEFAULT_ERROR_ORDERS,
            out_dir: None,
        }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::new(Stage::Config, m));
        if self.m < 2 {
            return fail(format!("at least 2 moments are required, got {}", self.m));
        }
        if self.e == 0 {
            return fail("at least one execution is required".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if self.bins < 2 {
            return fail(format!("at least 2 bins are required, got {}", self.bins));
        }
        if let Some(s) = self.support {
            if !s.is_valid() {
                return fail(format!("support [{}, {}] is empty", s.lo, s.hi));
            }
        }
        Ok(())
    }
}

/// Parses, validates and desugars; every problem is a usage error.
pub fn load_program(source: &str) -> Result<(Program, CoreProgram), PipelineError> {
    compile(source).map_err(|e| PipelineError::new(Stage::Parse, e))
}

/// Propagated moments of orders `1..=orders`.
pub fn propagate_moments(
    core: &CoreProgram,
    var: &str,
    n: u64,
    orders: usize,
) -> Result<MomentSet, PipelineError> {
    let fail = |e: MomentError| PipelineError::new(Stage::Moments, e);
    let v = core
        .var_index(var)
        .ok_or_else(|| fail(MomentError::UnknownVariable(var.to_string())))?;
    if orders == 0 {
        return Err(fail(MomentError::InvalidOrder));
    }
    let basis = closure_basis(core, v, orders as u32, DEFAULT_CAP).map_err(fail)?;
    propagate(core, &basis, n).map_err(fail)
}

/// Moments from the configured source, at least `m` orders and up to
/// `max(m, error_orders)` when the source allows.
pub fn obtain_moments(
    cfg: &PipelineConfig,
    core: &CoreProgram,
    data: &SampleData,
) -> Result<MomentSet, PipelineError> {
    let wanted = cfg.m.max(cfg.error_orders);
    let ms = match &cfg.source {
        MomentSource::Propagate => match propagate_moments(core, &cfg.var, cfg.n, wanted) {
            Ok(ms) => ms,
            // higher orders are only for the error table
            Err(_) if wanted > cfg.m => propagate_moments(core, &cfg.var, cfg.n, cfg.m)?,
            Err(e) => return Err(e),
        },
        MomentSource::External { path } => {
            let text = read(path)?;
            let ms = load_moments(&text, Some(cfg.n)).map_err(|e| PipelineError::new(Stage::Moments, e))?;
            if ms.var != cfg.var {
                return Err(PipelineError::new(
                    Stage::Config,
                    format!("moments are for `{}`, not `{}`", ms.var, cfg.var),
                ));
            }
            ms
        }
        MomentSource::Empirical => empirical_moments(data, &cfg.var, wanted)
            .map_err(|e| PipelineError::new(Stage::Moments, e))?,
    };
    if ms.order() < cfg.m {
        return Err(PipelineError::new(
            Stage::Config,
            format!("{} moments requested but only {} available", cfg.m, ms.order()),
        ));
    }
    Ok(ms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportSource {
    Flag,
    Program,
    Sample,
    Moments,
}

/// Estimation support: explicit flag, then the program's `@support` hint,
/// then the sample rule, then `μ ± 8σ`.
pub fn resolve_support(
    flag: Option<Support>,
    program: Option<&Program>,
    var: &str,
    column: Option<&[f64]>,
    ms: &MomentSet,
) -> Result<(Support, SupportSource), PipelineError> {
    if let Some(s) = flag {
        return Ok((s, SupportSource::Flag));
    }
    if let Some(h) = program.and_then(|p| p.supports.iter().find(|h| h.var == var)) {
        return Ok((
            Support::new(rational_to_f64(&h.lo), rational_to_f64(&h.hi)),
            SupportSource::Program,
        ));
    }
    if let Some(s) = column.and_then(sample_support) {
        return Ok((s, SupportSource::Sample));
    }
    let s = moment_support(ms).map_err(|e| PipelineError::new(Stage::Estimate, e))?;
    Ok((s, SupportSource::Moments))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedEstimate {
    pub estimate: DensityEstimate,
    pub diagnostics: FitDiagnostics,
}

/// Contents of `estimates.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatesDoc {
    pub var: String,
    pub m: usize,
    pub support: Support,
    pub support_source: SupportSource,
    pub estimates: Vec<FittedEstimate>,
}

impl EstimatesDoc {
    pub fn get(&self, kind: EstimateKind) -> Option<&FittedEstimate> {
        self.estimates.iter().find(|f| f.estimate.kind() == kind)
    }
}

/// Fits the requested kinds to the first `m` moments.
pub fn fit_estimates(
    ms: &MomentSet,
    m: usize,
    support: (Support, SupportSource),
    kinds: &[EstimateKind],
) -> Result<EstimatesDoc, PipelineError> {
    let fail = |e: crate::estimate::EstimateError| PipelineError::new(Stage::Estimate, e);
    let used = ms.prefix(m);
    let validity = moment_validity(&used);
    if !validity.ok {
        return Err(PipelineError::new(
            Stage::Estimate,
            validity.message.unwrap_or_else(|| "invalid moment sequence".into()),
        ));
    }
    let mut estimates = Vec::new();
    for kind in kinds {
        let fitted = match kind {
            EstimateKind::MaxEntropy => {
                let (estimate, diagnostics) =
                    fit_max_entropy(&used, support.0, &MeOptions::default()).map_err(fail)?;
                FittedEstimate {
                    estimate,
                    diagnostics,
                }
            }
            EstimateKind::GramCharlier => {
                let estimate = fit_gram_charlier_on(&used, support.0).map_err(fail)?;
                let diagnostics = diagnose(&estimate, &used);
                FittedEstimate {
                    estimate,
                    diagnostics,
                }
            }
        };
        estimates.push(fitted);
    }
    Ok(EstimatesDoc {
        var: ms.var.clone(),
        m: used.order(),
        support: support.0,
        support_source: support.1,
        estimates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofEntry {
    pub kind: EstimateKind,
    pub chi_square: TestResult,
    pub ks: TestResult,
    /// Not rejected when either test does not reject.
    pub verdict: Verdict,
}

/// Contents of `gof.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofDoc {
    pub var: String,
    pub alpha: f64,
    pub k: usize,
    pub sample_size: usize,
    pub results: Vec<GofEntry>,
}

impl GofDoc {
    pub fn get(&self, kind: EstimateKind) -> Option<&GofEntry> {
        self.results.iter().find(|g| g.kind == kind)
    }
}

pub fn run_tests(
    column: &[f64],
    estimates: &EstimatesDoc,
    k: usize,
    alpha: f64,
) -> Result<GofDoc, PipelineError> {
    let fail = |e: crate::gof::GofError| PipelineError::new(Stage::Gof, e);
    let mut results = Vec::new();
    for fitted in &estimates.estimates {
        let chi_square = chi_square_test(column, &fitted.estimate, k, alpha).map_err(fail)?;
        let ks = ks_test(column, &fitted.estimate, alpha).map_err(fail)?;
        let verdict = if chi_square.verdict == Verdict::NotRejected || ks.verdict == Verdict::NotRejected {
            Verdict::NotRejected
        } else {
            Verdict::Rejected
        };
        results.push(GofEntry {
            kind: fitted.estimate.kind(),
            chi_square,
            ks,
            verdict,
        });
    }
    Ok(GofDoc {
        var: estimates.var.clone(),
        alpha,
        k,
        sample_size: column.len(),
        results,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportConfig {
    pub program: String,
    pub var: String,
    pub n: u64,
    pub e: usize,
    pub seed: u64,
    pub m: usize,
    pub source: MomentSource,
    pub alpha: f64,
    pub bins: usize,
    pub error_orders: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdicts {
    #[serde(rename = "A_ME")]
    pub me: Verdict,
    #[serde(rename = "A_GC")]
    pub gc: Verdict,
}

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: ReportConfig,
    pub moments: MomentSet,
    pub estimates: EstimatesDoc,
    pub tests: GofDoc,
    pub verdicts: Verdicts,
    pub errors: ErrorTable,
}

/// Every artifact of one run, in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    pub report: Report,
    pub sample: SampleData,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
}

impl ReportBundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Io, e))?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)
                .map_err(|e| PipelineError::new(Stage::Io, format!("{}: {}", name, e)))?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path)
        .map_err(|e| PipelineError::new(Stage::Config, format!("{}: {}", path.display(), e)))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Reads the program file and runs the pipeline; writes the artifacts when
/// `out_dir` is set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ReportBundle, PipelineError> {
    cfg.check()?;
    let source = read(&cfg.program)?;
    let bundle = run_pipeline_on(cfg, &source)?;
    if let Some(dir) = &cfg.out_dir {
        bundle.write_to(dir)?;
    }
    Ok(bundle)
}

/// The pipeline on program text already in memory.
pub fn run_pipeline_on(cfg: &PipelineConfig, source: &str) -> Result<ReportBundle, PipelineError> {
    cfg.check()?;
    let (program, core) = load_program(source)?;
    if core.var_index(&cfg.var).is_none() {
        return Err(PipelineError::new(
            Stage::Config,
            format!("`{}` is not a state variable of the program", cfg.var),
        ));
    }
    let data = sample(&core, cfg.n, cfg.e, cfg.seed).map_err(|e| PipelineError::new(Stage::Sample, e))?;
    let column = data
        .column(&cfg.var)
        .map_err(|e| PipelineError::new(Stage::Sample, e))?;
    let moments = obtain_moments(cfg, &core, &data)?;

    let support = resolve_support(cfg.support, Some(&program), &cfg.var, Some(&column), &moments.prefix(cfg.m))?;
    let estimates = fit_estimates(
        &moments,
        cfg.m,
        support,
        &[EstimateKind::MaxEntropy, EstimateKind::GramCharlier],
    )?;
    let tests = run_tests(&column, &estimates, cfg.bins, cfg.alpha)?;
    let fits: Vec<&DensityEstimate> = estimates.estimates.iter().map(|f| &f.estimate).collect();
    let errors = error_report(&moments, &data, &fits, cfg.error_orders.min(moments.order()))
        .map_err(|e| PipelineError::new(Stage::Report, e))?;

    let verdict_of = |k| tests.get(k).map(|g| g.verdict).unwrap_or(Verdict::Rejected);
    let report = Report {
        config: ReportConfig {
            program: cfg
                .program
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            var: cfg.var.clone(),
            n: cfg.n,
            e: cfg.e,
            seed: cfg.seed,
            m: cfg.m,
            source: cfg.source.clone(),
            alpha: cfg.alpha,
            bins: cfg.bins,
            error_orders: errors.rows.len(),
        },
        verdicts: Verdicts {
            me: verdict_of(EstimateKind::MaxEntropy),
            gc: verdict_of(EstimateKind::GramCharlier),
        },
        moments,
        estimates,
        tests,
        errors,
    };

    let files = vec![
        ("moments.json".to_string(), to_json(&report.moments)),
        ("sample.csv".to_string(), data.to_csv_string()),
        ("estimates.json".to_string(), to_json(&report.estimates)),
        ("gof.json".to_string(), to_json(&report.tests)),
        ("report.json".to_string(), to_json(&report)),
        ("histogram.csv".to_string(), histogram_csv(&report.tests)),
        ("pdf_curves.csv".to_string(), pdf_curves_csv(&column, &report.estimates)),
        ("errors.csv".to_string(), report.errors.to_csv_string()),
    ];
    Ok(ReportBundle {
        report,
        sample: data,
        files,
    })
}

/// Observed and expected counts per chi-square bin.
pub fn histogram_csv(tests: &GofDoc) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bin".to_string(), "lo".into(), "hi".into(), "observed".into()];
    header.extend(tests.results.iter().map(|g| format!("expected_{}", g.kind.label())));
    out.write_record(&header).expect("in-memory write");
    if let Some(first) = tests.results.first() {
        for (i, bin) in first.chi_square.bins.iter().enumerate() {
            let mut rec = vec![
                i.to_string(),
                bin.lo.to_string(),
                bin.hi.to_string(),
                bin.observed.to_string(),
            ];
            rec.extend(tests.results.iter().map(|g| g.chi_square.bins[i].expected.to_string()));
            out.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(out.into_inner().expect("flush")).expect("ascii output")
}

/// Each estimate's pdf and a kernel density estimate on the KDE grid.
pub fn pdf_curves_csv(column: &[f64], estimates: &EstimatesDoc) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string()];
    header.extend(estimates.estimates.iter().map(|f| format!("f_{}", f.estimate.kind().label())));
    header.push("kde".into());
    out.write_record(&header).expect("in-memory write");
    for (x, y) in kde(column, None) {
        let mut rec = vec![x.to_string()];
        rec.extend(estimates.estimates.iter().map(|f| f.estimate.pdf(x).to_string()));
        rec.push(y.to_string());
        out.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(out.into_inner().expect("flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn config(b: &corpus::Benchmark, seed: u64) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(b.file, b.var, b.moments);
        cfg.seed = seed;
        cfg
    }

    #[test]
    fn vasicek_run() {
        let b = corpus::VASICEK;
        let bundle = run_pipeline_on(&config(&b, 1), b.source).unwrap();
        let r = &bundle.report;
        assert_eq!(r.verdicts.me, Verdict::NotRejected);
        assert_eq!(r.verdicts.gc, Verdict::NotRejected);
        assert_eq!(r.errors.rows.len(), 8);
        assert!((r.tests.results[0].ks.critical_value - 0.0608).abs() < 5e-4);
        assert_eq!(bundle.files.len(), 8);
    }

    #[test]
    fn one_moment_is_a_usage_error() {
        let b = corpus::VASICEK;
        let mut cfg = config(&b, 0);
        cfg.m = 1;
        let err = run_pipeline_on(&cfg, b.source).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_json().contains("\"stage\":\"config\""));
    }
}
