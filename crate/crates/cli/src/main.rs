use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use plateau_core::costs::Task;
use plateau_core::harness::{
    emit_csv, emit_layer_csv, fit_slope, haar_suite, run_layer_sweep, run_scaling, selftest, task_observable,
    write_csv, write_layer_csv, DesignKind, EnsembleConfig, ExperimentConfig, HaarSuiteConfig, Placement,
};
use plateau_core::landscape::{bound_report, Method};
use plateau_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "plateau",
    version,
    about = "Variation range of local gates inside random quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean variation range versus qubit count, as CSV
    Scaling(ExperimentArgs),
    /// Scaling runs at several absolute layer counts, as CSV
    Layers {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated repeated-layer counts
        #[arg(long = "layer-list", value_delimiter = ',', default_values_t = (0..10).map(|k| 5 + 10 * k).collect::<Vec<usize>>())]
        layer_list: Vec<usize>,
    },
    /// Monte-Carlo check of the closed-form Haar moments
    ValidateHaar {
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 2021)]
        seed: u64,
    },
    /// Analytic bounds for one task and size
    Bounds {
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Thresholds for the Markov tail bound
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1])]
        eps: Vec<f64>,
    },
    /// Reduced-size acceptance checks
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Flat JSON experiment configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    /// Smallest qubit count
    #[arg(long)]
    n: Option<usize>,
    /// Largest qubit count (defaults to --n)
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    n_step: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Placement of the optimized qubits: leading or trailing
    #[arg(long)]
    a_placement: Option<Placement>,
    #[arg(long)]
    ensemble_config: Option<EnsembleConfig>,
    #[arg(long)]
    design_kind: Option<DesignKind>,
    #[arg(long)]
    layers_multiplier: Option<usize>,
    /// Absolute repeated-layer count
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    optimizer: Option<Method>,
    #[arg(long)]
    grid_resolution: Option<usize>,
    #[arg(long)]
    adam_iterations: Option<usize>,
    #[arg(long)]
    adam_restarts: Option<usize>,
    #[arg(long)]
    adam_learning_rate: Option<f64>,
}

enum Failure {
    /// Subcommand name and message.
    Usage(&'static str, String),
    Error(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundViolation(_) => Failure::Check(e.to_string()),
            other => Failure::Error(other),
        }
    }
}

impl ExperimentArgs {
    fn resolve(&self, subcommand: &'static str, default_ensemble: EnsembleConfig) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => {
                if self.task.is_none() {
                    return Err(Failure::Usage(subcommand, "--task or --config is required".into()));
                }
                ExperimentConfig {
                    ensemble_config: default_ensemble,
                    ..ExperimentConfig::default()
                }
            }
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        set!(
            task,
            n_max,
            n_step,
            m,
            ensemble_config,
            design_kind,
            layers_multiplier,
            samples,
            seed,
            optimizer
        );
        set!(grid_resolution, adam_iterations, adam_restarts, adam_learning_rate);
        if let Some(n) = self.n {
            cfg.n_min = n;
            if self.n_max.is_none() && (self.config.is_none() || cfg.n_max < n) {
                cfg.n_max = n;
            }
        }
        if self.layers.is_some() {
            cfg.layers = self.layers;
        }
        if self.a_placement.is_some() {
            cfg.a_placement = self.a_placement;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn note_conventions(cfg: &ExperimentConfig) {
    if cfg.task == Task::Qae {
        eprintln!("note: qae input is a Haar-random pure state drawn per sample");
    }
}

fn report_slope(rows: &[plateau_core::harness::ExperimentRow]) {
    if let Ok(fit) = fit_slope(rows) {
        eprintln!(
            "log2 slope {:.4} per qubit (intercept {:.4}, r^2 {:.4})",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scaling(args) => {
            let cfg = args.resolve("scaling", EnsembleConfig::Both)?;
            note_conventions(&cfg);
            let rows = run_scaling(&cfg)?;
            match &args.out {
                Some(path) => emit_csv(&rows, path)?,
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            report_slope(&rows);
        }
        Command::Layers { exp, layer_list } => {
            let cfg = exp.resolve("layers", EnsembleConfig::V1Design)?;
            note_conventions(&cfg);
            let rows = run_layer_sweep(&cfg, &layer_list)?;
            match &exp.out {
                Some(path) => emit_layer_csv(&rows, path)?,
                None => write_layer_csv(&rows, std::io::stdout().lock())?,
            }
            for &l in &layer_list {
                let subset: Vec<_> = rows.iter().filter(|r| r.layers == l).map(|r| r.row.clone()).collect();
                if let Ok(fit) = fit_slope(&subset) {
                    eprintln!("layers {l}: log2 slope {:.4} (r^2 {:.4})", fit.slope, fit.r_squared);
                }
            }
        }
        Command::ValidateHaar { samples, pairs, seed } => {
            let suite = haar_suite(&HaarSuiteConfig {
                samples,
                pairs,
                seed,
                ..HaarSuiteConfig::default()
            })?;
            print!("{}", suite.table());
            if !suite.passed() {
                return Err(Failure::Check(format!("{} Haar identities failed", suite.failures())));
            }
        }
        Command::Bounds { task, n, m, eps } => {
            let task = task.ok_or_else(|| Failure::Usage("bounds", "--task is required".into()))?;
            if !(2..=12).contains(&n) {
                return Err(Failure::Error(Error::Config {
                    field: "n".into(),
                    message: format!("{n} is outside [2, 12]"),
                }));
            }
            let part = Placement::default_for(task).partition(n, m)?;
            let r = bound_report(task, &task_observable(task, n)?, &part, &eps)?;
            let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |b| b.to_string());
            println!("task = {}", r.task);
            println!("n = {}", r.n);
            println!("m = {}", r.m);
            println!("w = {}", r.w);
            println!("bound_general = {}", r.general);
            println!("bound_variance = {}", r.variance);
            for (e, p) in &r.markov {
                println!("bound_markov(eps = {e}) = {p}");
            }
            println!("bound_tight = {}", r.tight);
            println!("bound_task = {}", opt(r.task_tight));
            println!("bound_qsl = {}", opt(r.qsl));
            println!("n_a = {}", r.n_a);
            println!("n_ab = {}", r.n_ab);
        }
        Command::Selftest { seed } => {
            let outcomes = selftest(seed);
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(Failure::Check(format!("{failed} self-test checks failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(sub, msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            let help = match cmd.find_subcommand_mut(sub) {
                Some(sc) => sc.render_help(),
                None => cmd.render_help(),
            };
            eprintln!("{help}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
