use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ree_core::exec::Execution;
use ree_core::lab::{self, BatchReport, SamplerConfig};
use ree_core::sets::{derive_seed, ConvexSetSpec, SetKind};
use ree_core::solver::{self, SolverOptions};
use ree_core::state::{read_state_file, to_json_string, write_state_file, BipartiteDims};
use ree_core::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VIOLATION: u8 = 4;
const EXIT_NOT_IN_SET: u8 = 5;

#[derive(Parser)]
#[command(name = "ree", version, about = "Relative entropy of entanglement with certified bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified interval for E of the state in FILE.
    Compute {
        file: PathBuf,
        /// Write the closest-state candidate here.
        #[arg(long)]
        minimizer_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check |E(σ1) - E(σ2)| against the continuity bound on sampled pairs.
    Continuity {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value = "2x2")]
        dims: BipartiteDims,
        #[command(flatten)]
        common: Common,
    },
    /// Closest states along (1 - 1/n) state + (1/n) direction.
    Corollary {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        direction: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256,1024")]
        schedule: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fannes' inequality on sampled pairs plus a pair at T = 1/3.
    Fannes {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value = "2x2")]
        dims: BipartiteDims,
        #[command(flatten)]
        common: Common,
    },
    /// The five inequalities of the bound's proof on sampled pairs.
    Proofchain {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value = "2x2")]
        dims: BipartiteDims,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "sep")]
    set: SetKind,
    /// Regularization weight, 1/2 ≤ x < 1.
    #[arg(long, default_value_t = 1.0 - 1e-6)]
    x: f64,
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// SEP oracle restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Units::Nats)]
    units: Units,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit wall-clock fields so identical runs print identical bytes.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    Nats,
    Bits,
}

impl Units {
    fn factor(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions { x: self.x, gap_tol: self.gap_tol, max_iters: self.max_iters, ..Default::default() };
        opts.oracle.sep.restarts = self.restarts;
        opts.oracle.sep.seed = self.seed;
        opts
    }
}

/// Failure with its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConvergenceFailure { .. } | Error::NotConverged(_) | Error::SamplingExhausted(_) => EXIT_SOLVER,
            Error::NotInSet(_) => EXIT_NOT_IN_SET,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn json_text<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    Ok(to_json_string(value)?)
}

fn compute(file: &PathBuf, minimizer_out: Option<&PathBuf>, c: &Common) -> Outcome {
    let sigma = read_state_file(file)?;
    let mut opts = c.solver_options();
    opts.oracle.sep.execution = Execution::from_env();
    let spec = ConvexSetSpec::plain(c.set, sigma.dims());
    let cv = solver::ree(&sigma, &spec, &opts)?;
    if let Some(path) = minimizer_out {
        write_state_file(path, &cv.minimizer)?;
    }
    let f = c.units.factor();
    let confidence = serde_json::to_value(cv.confidence).expect("enum serializes");
    let text = match c.format {
        Format::Json => json_text(&json!({
            "set": c.set.name(),
            "units": c.units.name(),
            "lower": cv.lower * f,
            "upper": cv.upper * f,
            "fwGap": cv.fw_gap * f,
            "x": cv.x,
            "iterations": cv.iterations,
            "confidence": confidence,
        }))?,
        Format::Csv => format!(
            "lower,upper,fwGap,x,confidence\n{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            cv.lower * f,
            cv.upper * f,
            cv.fw_gap * f,
            cv.x,
            confidence.as_str().unwrap_or_default()
        ),
    };
    emit(&text);
    Ok(0)
}

fn run_batch(pairs: usize, dims: BipartiteDims, c: &Common) -> Result<BatchReport, Failure> {
    let spec = ConvexSetSpec::plain(c.set, dims);
    let mut report = lab::batch_report(pairs, &SamplerConfig::default(), &spec, &c.solver_options(), c.seed, Execution::from_env())?;
    if c.deterministic {
        report.elapsed_seconds = None;
    }
    Ok(report)
}

fn continuity(pairs: usize, dims: BipartiteDims, c: &Common) -> Outcome {
    let mut report = run_batch(pairs, dims, c)?;
    let f = c.units.factor();
    report.reports = report.reports.into_iter().map(|r| r.rescaled(f)).collect();
    let text = match c.format {
        Format::Json => json_text(&report)?,
        Format::Csv => lab::continuity_csv(&report.reports),
    };
    emit(&text);
    eprintln!("{}", report.summary_line());
    Ok(if report.failures.is_empty() { 0 } else { EXIT_VIOLATION })
}

/// Per-inequality counts: checked, skipped, violations, smallest slack.
struct Tally {
    name: String,
    checked: usize,
    skipped: usize,
    violations: usize,
    min_slack: f64,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), checked: 0, skipped: 0, violations: 0, min_slack: f64::INFINITY }
    }

    fn add(&mut self, check: &lab::InequalityCheck) {
        self.checked += 1;
        if !check.holds {
            self.violations += 1;
        }
        self.min_slack = self.min_slack.min(check.slack);
    }
}

fn print_tallies(tallies: &[Tally], format: Format) -> Result<(), Failure> {
    let text = match format {
        Format::Json => {
            let rows: Vec<_> = tallies
                .iter()
                .map(|t| {
                    json!({
                        "name": t.name,
                        "checked": t.checked,
                        "skipped": t.skipped,
                        "violations": t.violations,
                        "minSlack": if t.min_slack.is_finite() { Some(t.min_slack) } else { None },
                    })
                })
                .collect();
            json_text(&rows)?
        }
        Format::Csv => {
            let mut s = String::from("name,checked,skipped,violations,minSlack\n");
            for t in tallies {
                let slack = if t.min_slack.is_finite() { format!("{:.16e}", t.min_slack) } else { String::new() };
                s.push_str(&format!("{},{},{},{},{}\n", t.name, t.checked, t.skipped, t.violations, slack));
            }
            s
        }
    };
    emit(&text);
    Ok(())
}

fn fannes(pairs: usize, dims: BipartiteDims, c: &Common) -> Outcome {
    let sampler = SamplerConfig::default();
    let mut tally = Tally::new("fannes");
    let mut boundary = Tally::new("fannes boundary");
    for i in 0..pairs {
        let (s1, s2) = lab::sample_pair(dims, &sampler, derive_seed(c.seed, i as u64))?;
        match lab::fannes_check(&s1, &s2)? {
            Some(check) => tally.add(&check),
            None => tally.skipped += 1,
        }
    }
    let (b1, b2) = lab::fannes_boundary_pair(dims)?;
    match lab::fannes_check(&b1, &b2)? {
        Some(check) => boundary.add(&check),
        None => boundary.skipped += 1,
    }
    let violations = tally.violations + boundary.violations;
    print_tallies(&[tally, boundary], c.format)?;
    Ok(if violations == 0 { 0 } else { EXIT_VIOLATION })
}

fn proofchain(pairs: usize, dims: BipartiteDims, c: &Common) -> Outcome {
    let report = run_batch(pairs, dims, c)?;
    let mut tallies: Vec<Tally> = ["a", "b", "c", "d", "e"].iter().map(|n| Tally::new(n)).collect();
    for r in &report.reports {
        if r.proof_chain.is_empty() {
            tallies.iter_mut().for_each(|t| t.skipped += 1);
        }
        for check in &r.proof_chain {
            if let Some(t) = tallies.iter_mut().find(|t| t.name == check.name) {
                t.add(check);
            }
        }
    }
    let violations: usize = tallies.iter().map(|t| t.violations).sum();
    print_tallies(&tallies, c.format)?;
    Ok(if violations == 0 { 0 } else { EXIT_VIOLATION })
}

fn corollary(state: &PathBuf, direction: &PathBuf, schedule: &[u64], c: &Common) -> Outcome {
    let sigma = read_state_file(state)?;
    let zeta = read_state_file(direction)?;
    let spec = ConvexSetSpec::plain(c.set, sigma.dims());
    let mut trace = lab::corollary_trace(&sigma, &zeta, schedule, &spec, &c.solver_options())?;
    let f = c.units.factor();
    for e in &mut trace.entries {
        e.e_upper *= f;
        e.e_lower *= f;
        e.bound = e.bound.map(|b| b * f);
    }
    let text = match c.format {
        Format::Json => json_text(&trace)?,
        Format::Csv => {
            let mut s = String::from("n,stateDistance,minimizerDistance,eLower,eUpper,bound\n");
            for e in &trace.entries {
                let bound = e.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
                s.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                    e.n, e.state_distance, e.minimizer_distance, e.e_lower, e.e_upper, bound
                ));
            }
            s
        }
    };
    emit(&text);
    Ok(if trace.criterion_met() { 0 } else { EXIT_VIOLATION })
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Compute { file, minimizer_out, common } => compute(file, minimizer_out.as_ref(), common),
        Command::Continuity { pairs, dims, common } => continuity(*pairs, *dims, common),
        Command::Corollary { state, direction, schedule, common } => corollary(state, direction, schedule, common),
        Command::Fannes { pairs, dims, common } => fannes(*pairs, *dims, common),
        Command::Proofchain { pairs, dims, common } => proofchain(*pairs, *dims, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
