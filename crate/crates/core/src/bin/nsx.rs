use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nsx::dsl::{self, parse_expr, Env};
use nsx::rng::DEFAULT_SEED;
use nsx::suite::{parse_failure, run_reference_suite, run_scenario, Report, RunOptions};
use nsx::symexpr::{OpaqueRegistry, Poly};
use nsx::{Error, Result};

#[derive(Parser)]
#[command(name = "nsx", version, about = "Check near-symplectic and contact scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunFlags {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random draws per sampled region.
    #[arg(long)]
    samples: Option<usize>,
    /// Zero threshold for floating-point evaluation.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl RunFlags {
    fn options(&self) -> RunOptions {
        RunOptions { seed: self.seed, samples: self.samples, tol: self.tol }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks of a scenario file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the built-in reference scenarios.
    PaperSuite {
        /// Comma-separated scenario ids, e.g. S3,S8.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Print a scenario in canonical form.
    Print { file: PathBuf },
    /// Evaluate the declared expressions and forms at a point.
    Eval {
        file: PathBuf,
        #[arg(long)]
        at: String,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn emit(report: &Report, json: Option<&Path>) -> Result<ExitCode> {
    print!("{}", report.text());
    if let Some(p) = json {
        fs::write(p, report.json()).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn check(file: &Path, flags: &RunFlags) -> Result<ExitCode> {
    let src = read(file)?;
    let opts = flags.options();
    let report = match dsl::parse(&src) {
        Ok(s) => run_scenario(&s, &file.display().to_string(), &opts),
        Err(e) => {
            eprintln!("{}:{e}", file.display());
            let id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            parse_failure(&id, &file.display().to_string(), &e.into())
        }
    };
    emit(&Report::new(opts.seed, vec![report]), flags.json.as_deref())
}

/// `x1=1,x2=-1/2` into exact constants.
fn parse_point(at: &str, env: &Env) -> Result<BTreeMap<String, Poly>> {
    let mut out = BTreeMap::new();
    for part in at.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) =
            part.split_once('=').ok_or_else(|| Error::Invalid(format!("expected name=value, got `{part}`")))?;
        let v = env.scalar(&parse_expr(value)?, None)?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}

fn eval(file: &Path, at: &str) -> Result<ExitCode> {
    let s = dsl::parse(&read(file)?)?;
    let env = Env::from_scenario(&s)?;
    let point = parse_point(at, &env)?;
    let sub = |v: &str| point.get(v).cloned();
    let covers = |names: &[nsx::symexpr::Name]| names.iter().all(|n| point.contains_key(&**n));
    let reg = OpaqueRegistry::default();
    let mut shown = 0;
    for (name, (chart, p)) in &env.exprs {
        if covers(chart.coords()) {
            let v = p.substitute(&sub)?;
            match v.eval_f64(&|_| None, &reg) {
                Ok(x) if v.as_rational().is_none() => println!("{name} = {v} ≈ {x}"),
                _ => println!("{name} = {v}"),
            }
            shown += 1;
        }
    }
    for (name, f) in &env.forms {
        if covers(f.chart().coords()) {
            println!("{name} = {}", f.substitute(&sub)?);
            shown += 1;
        }
    }
    if shown == 0 {
        return Err(Error::Invalid("no declared expression or form lives on a chart covered by --at".into()));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Check { file, flags } => check(&file, &flags),
        Cmd::PaperSuite { only, flags } => {
            let report = run_reference_suite(&flags.options(), only.as_deref());
            emit(&report, flags.json.as_deref())
        }
        Cmd::Print { file } => {
            let s = dsl::parse(&read(&file)?)?;
            print!("{}", dsl::print(&s));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eval { file, at } => eval(&file, &at),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nsx: {e}");
            ExitCode::from(2)
        }
    }
}
