use clap::{Args, Parser, Subcommand};
use cli::{run, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "a1lab", about = "Bellman-function and remodeling experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// JSON configuration file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out/<command>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form checks and obstacle values of the unweighted recursion.
    UnweightedVerify {
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Convergence of the unweighted recursion and the sampled grid.
    UnweightedDp {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// The weighted recursion at Q = 1 against the unweighted one.
    WeightedDp {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Monotonicity in m, four-point concavity and the obstacle configuration.
    WeightedVerify {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Sign of the quadratic form on the smoothed weighted grid.
    Quadform {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Weak-norm ratios of replayed witnesses across Q.
    Blowup {
        #[arg(long, value_delimiter = ',')]
        qs: Option<Vec<f64>>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Power counting of the contradiction argument.
    Bookkeeping {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long)]
        max_exp: Option<u32>,
    },
    /// Extremal quadruple, remodeled distributions and the Hilbert decomposition.
    Remodel {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u32>>,
        #[arg(long)]
        shift: Option<u32>,
    },
    /// Hilbert transform of the square sine.
    HilbertXi {
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Anti-concentration of sums of independent copies of ξ.
    Lemma83 {
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply(cmd: Cmd, cfg: &mut ExperimentConfig) -> Command {
    match cmd {
        Cmd::UnweightedVerify { depth, samples } => {
            set(&mut cfg.unweighted.depth, depth);
            set(&mut cfg.unweighted.samples, samples);
            Command::UnweightedVerify
        }
        Cmd::UnweightedDp { depth } => {
            set(&mut cfg.unweighted.depth, depth);
            Command::UnweightedDp
        }
        Cmd::WeightedDp { depth } => {
            set(&mut cfg.weighted.consistency_depth, depth);
            Command::WeightedDp
        }
        Cmd::WeightedVerify { q, depth, samples } => {
            set(&mut cfg.weighted.q, q);
            set(&mut cfg.weighted.depth, depth);
            set(&mut cfg.weighted.samples, samples);
            Command::WeightedVerify
        }
        Cmd::Quadform {
            q,
            depth,
            stride,
            tol,
        } => {
            set(&mut cfg.quadform.q, q);
            set(&mut cfg.quadform.depth, depth);
            set(&mut cfg.quadform.stride, stride);
            set(&mut cfg.quadform.tol, tol);
            Command::Quadform
        }
        Cmd::Blowup { qs, depth } => {
            set(&mut cfg.blowup.qs, qs);
            set(&mut cfg.blowup.depth, depth);
            Command::Blowup
        }
        Cmd::Bookkeeping { p, max_exp } => {
            set(&mut cfg.bookkeeping.ps, p);
            set(&mut cfg.bookkeeping.max_exp, max_exp);
            Command::Bookkeeping
        }
        Cmd::Remodel { q, schedule, shift } => {
            set(&mut cfg.remodel.q, q);
            set(&mut cfg.remodel.schedule, schedule);
            set(&mut cfg.remodel.shift, shift);
            Command::Remodel
        }
        Cmd::HilbertXi { bits } => {
            set(&mut cfg.hilbert.grid_bits, bits);
            Command::HilbertXi
        }
        Cmd::Lemma83 { m, samples, delta } => {
            set(&mut cfg.lemma83.ms, m);
            set(&mut cfg.lemma83.samples, samples);
            set(&mut cfg.lemma83.delta, delta);
            Command::Lemma83
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.seed, g.seed);
    if g.workers.is_some() {
        cfg.workers = g.workers;
    }
    let command = apply(cli.command, &mut cfg);
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Some(n) = cfg.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match run(command, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = g
        .out
        .unwrap_or_else(|| PathBuf::from("out").join(command.name()));
    match report.write(&out, &cfg) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {} value={} threshold={}",
            c.check, c.value, c.threshold
        );
    }
    if report.pass() {
        println!("{}: PASS", command.name());
        ExitCode::SUCCESS
    } else {
        let names: Vec<&str> = report.failures().iter().map(|c| c.check.as_str()).collect();
        println!("{}: FAIL ({})", command.name(), names.join(", "));
        ExitCode::from(1)
    }
}
