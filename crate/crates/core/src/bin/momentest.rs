use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use momentest::dsl::{parse_program, validate};
use momentest::engine::{sample, SampleData};
use momentest::estimate::{EstimateKind, Support};
use momentest::moments::load_moments;
use momentest::pipeline::{
    load_program, propagate_moments, resolve_support, run_pipeline, run_tests, to_json, EstimatesDoc,
    MomentSource, PipelineConfig, PipelineError, Stage, DEFAULT_ALPHA, DEFAULT_BINS, DEFAULT_E,
    DEFAULT_ERROR_ORDERS, DEFAULT_N,
};

#[derive(Parser)]
#[command(name = "momentest", version, about = "Distribution estimates for probabilistic loops from their moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a program
    Validate {
        #[arg(long)]
        program: PathBuf,
    },
    /// Run the loop e times and write the final states as CSV
    Sample {
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact raw moments of a variable at iteration n
    Moments {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long, default_value_t = DEFAULT_N)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit ME and/or GC estimates to a moments file
    Estimate {
        #[arg(long)]
        moments: PathBuf,
        /// Number of moments to use (default: all in the file)
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Sample CSV for the default support rule
        #[arg(long)]
        sample: Option<PathBuf>,
        /// Program whose `@support` hint applies
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, value_parser = parse_support)]
        support: Option<Support>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chi-square and K-S tests of estimates against a sample
    Gof {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The whole pipeline: moments, sample, fits, tests and report
    Run {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        var: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Source::Propagate)]
        source: Source,
        /// Moments file for `--source external`
        #[arg(long)]
        moments: Option<PathBuf>,
        #[arg(long, value_parser = parse_support)]
        support: Option<Support>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_ERROR_ORDERS)]
        error_orders: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_N)]
    n: u64,
    #[arg(long, default_value_t = DEFAULT_E)]
    e: usize,
    #[arg(long, env = "MOMENTEST_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Me,
    Gc,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Propagate,
    External,
    Empirical,
}

fn parse_support(s: &str) -> Result<Support, String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad bound `{}`", a))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad bound `{}`", b))?;
    let s = Support::new(lo, hi);
    if s.is_valid() {
        Ok(s)
    } else {
        Err("support needs lo < hi".into())
    }
}

fn read(path: &Path, stage: Stage) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::new(stage, format!("{}: {}", path.display(), e)))
}

/// Writes `contents` to `out/name`, or to stdout without `--out`.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<(), PipelineError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Io, e))?;
            fs::write(dir.join(name), contents).map_err(|e| PipelineError::new(Stage::Io, e))
        }
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| PipelineError::new(Stage::Io, e)),
    }
}

fn read_sample(path: &Path) -> Result<SampleData, PipelineError> {
    let text = read(path, Stage::Config)?;
    SampleData::read_csv(text.as_bytes()).map_err(|e| PipelineError::new(Stage::Config, e))
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Validate { program } => {
            let text = read(&program, Stage::Config)?;
            let parsed = parse_program(&text).map_err(|e| PipelineError::new(Stage::Parse, e))?;
            let report = validate(&parsed);
            print!("{}", to_json(&report));
            if report.has_errors() {
                let msgs: Vec<String> = report.errors().map(|i| i.message.clone()).collect();
                return Err(PipelineError::new(Stage::Parse, msgs.join("; ")));
            }
            Ok(())
        }
        Command::Sample { program, run, out } => {
            let (_, core) = load_program(&read(&program, Stage::Config)?)?;
            let data = sample(&core, run.n, run.e, run.seed).map_err(|e| PipelineError::new(Stage::Sample, e))?;
            emit(out.as_deref(), "sample.csv", &data.to_csv_string())
        }
        Command::Moments { program, var, n, m, out } => {
            if m == 0 {
                return Err(PipelineError::new(Stage::Config, "at least one moment is required"));
            }
            let (_, core) = load_program(&read(&program, Stage::Config)?)?;
            if core.var_index(&var).is_none() {
                return Err(PipelineError::new(Stage::Config, format!("unknown variable `{}`", var)));
            }
            let ms = propagate_moments(&core, &var, n, m)?;
            emit(out.as_deref(), "moments.json", &to_json(&ms))
        }
        Command::Estimate {
            moments,
            m,
            method,
            sample,
            program,
            support,
            out,
        } => {
            let ms = load_moments(&read(&moments, Stage::Config)?, None)
                .map_err(|e| PipelineError::new(Stage::Config, e))?;
            let m = m.unwrap_or(ms.order());
            if m < 2 || m > ms.order() {
                return Err(PipelineError::new(
                    Stage::Config,
                    format!("--m must lie in 2..={}", ms.order()),
                ));
            }
            let parsed = match &program {
                Some(p) => Some(load_program(&read(p, Stage::Config)?)?.0),
                None => None,
            };
            let column = match &sample {
                Some(p) => Some(read_sample(p)?.column(&ms.var).map_err(|e| PipelineError::new(Stage::Config, e))?),
                None => None,
            };
            let support = resolve_support(support, parsed.as_ref(), &ms.var, column.as_deref(), &ms.prefix(m))?;
            let kinds: &[EstimateKind] = match method {
                Method::Me => &[EstimateKind::MaxEntropy],
                Method::Gc => &[EstimateKind::GramCharlier],
                Method::Both => &[EstimateKind::MaxEntropy, EstimateKind::GramCharlier],
            };
            let doc = momentest::pipeline::fit_estimates(&ms, m, support, kinds)?;
            emit(out.as_deref(), "estimates.json", &to_json(&doc))
        }
        Command::Gof {
            sample,
            estimates,
            alpha,
            bins,
            out,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) || bins < 2 {
                return Err(PipelineError::new(Stage::Config, "need 0 < alpha < 1 and at least 2 bins"));
            }
            let doc: EstimatesDoc = serde_json::from_str(&read(&estimates, Stage::Config)?)
                .map_err(|e| PipelineError::new(Stage::Config, format!("estimates file: {}", e)))?;
            let column = read_sample(&sample)?
                .column(&doc.var)
                .map_err(|e| PipelineError::new(Stage::Config, e))?;
            let result = run_tests(&column, &doc, bins, alpha)?;
            emit(out.as_deref(), "gof.json", &to_json(&result))
        }
        Command::Run {
            program,
            var,
            run,
            m,
            source,
            moments,
            support,
            alpha,
            bins,
            error_orders,
            out,
        } => {
            let source = match (source, moments) {
                (Source::External, Some(path)) => MomentSource::External { path },
                (Source::External, None) => {
                    return Err(PipelineError::new(Stage::Config, "--source external needs --moments"))
                }
                (Source::Propagate, _) => MomentSource::Propagate,
                (Source::Empirical, _) => MomentSource::Empirical,
            };
            let cfg = PipelineConfig {
                program,
                var,
                n: run.n,
                e: run.e,
                seed: run.seed,
                m,
                source,
                support,
                alpha,
                bins,
                error_orders,
                out_dir: Some(out.clone()),
            };
            let bundle = run_pipeline(&cfg)?;
            let v = &bundle.report.verdicts;
            println!(
                "A_ME = {}, A_GC = {} (artifacts in {})",
                v.me.label(),
                v.gc.label(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
