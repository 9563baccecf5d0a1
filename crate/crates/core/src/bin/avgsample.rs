use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use avgsample::bounds::Theorem;
use avgsample::experiments::{
    constants_report, pretty_report, probability_sweep, run_table, samples_for, surface_for, write_file, write_jsonl,
    Experiment, Stamped, TheoremArgs,
};
use clap::{Parser, Subcommand, ValueEnum};

/// Random average sampling and reconstruction in mixed Lebesgue spaces.
#[derive(Parser, Debug)]
#[command(name = "avgsample", version, about)]
struct Cli {
    /// Experiment configuration (JSON, schema_version 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; defaults to <outputs.dir>/<name>_<command>.<ext>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 2 when any requested row is rank deficient.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reconstruction errors for every configured (n, m).
    ///
    /// CSV columns: n, m, rank, full_rank, linf_error, l1_error, l2_error,
    /// residual, row_seed, config_hash, seed. Error columns are empty for
    /// rank-deficient rows.
    Table,
    /// f, its reconstruction and their difference on a uniform grid over C_K.
    ///
    /// CSV columns: x, y1..yd, f, f_tilde, diff, config_hash, seed.
    Surface {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Empirical recovery rate against theoretical probabilities.
    ///
    /// Writes one JSON record per nm to the output path and every trial
    /// record to <output stem>.trials.jsonl.
    Sweep {
        /// Comma-separated sample counts nm.
        #[arg(long, value_delimiter = ',')]
        nm: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Every constant of one theorem as JSON; a symbol table goes to stdout.
    Constants {
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        beta_tilde: Option<f64>,
    },
    /// A drawn sample set.
    ///
    /// CSV columns: j, k, x, y1..yd (one-based indices), config_hash, seed.
    Samples {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Thm1 => Theorem::SamplingOmega,
            TheoremArg::Thm2 => Theorem::SamplingMu,
            TheoremArg::Thm3 => Theorem::SamplingDelta,
            TheoremArg::Thm4 => Theorem::Reconstruction,
        }
    }
}

fn output_path(cli: &Cli, exp: &Experiment, command: &str, ext: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        Path::new(&exp.config.outputs.dir).join(format!("{}_{command}.{ext}", exp.config.name))
    })
}

/// Appends `config_hash` and `seed` columns to a library sample CSV.
fn stamp_csv(raw: &[u8], hash: &str, seed: u64) -> anyhow::Result<Vec<u8>> {
    let mut reader = csv::Reader::from_reader(raw);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    header.extend(["config_hash".to_string(), "seed".to_string()]);
    w.write_record(&header)?;
    for rec in reader.records() {
        let mut row: Vec<String> = rec?.iter().map(String::from).collect();
        row.push(hash.to_string());
        row.push(seed.to_string());
        w.write_record(&row)?;
    }
    Ok(w.into_inner()?)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let Some(config) = &cli.config else {
        bail!("--config is required");
    };
    let exp = Experiment::from_path(config).with_context(|| format!("loading {}", config.display()))?;
    let seed = cli.seed.unwrap_or(exp.config.seed);
    let hash = exp.config_hash.clone();
    match &cli.command {
        Command::Table => {
            let table = run_table(&exp, seed)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            let path = output_path(cli, &exp, "table", "csv");
            write_file(&path, &buf)?;
            for r in &table.rows {
                match (r.linf_error, r.l1_error, r.l2_error) {
                    (Some(a), Some(b), Some(c)) => {
                        println!("n={:<4} m={:<4} Linf={a:.4e} L1={b:.4e} L2={c:.4e}", r.n, r.m)
                    }
                    _ => println!("n={:<4} m={:<4} rank deficient (rank {})", r.n, r.m, r.rank),
                }
            }
            eprintln!("wrote {}", path.display());
            if cli.strict && !table.all_full_rank() {
                eprintln!("rank-deficient rows present (--strict)");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Surface { n, m, resolution } => {
            let (n0, m0) = exp.config.sample_sizes[0];
            let res = resolution.unwrap_or(exp.config.surface.resolution);
            let surface = surface_for(&exp, n.unwrap_or(n0), m.unwrap_or(m0), seed, res)?;
            let mut buf = Vec::new();
            surface.write_csv(&mut buf, &hash, seed)?;
            let path = output_path(cli, &exp, "surface", "csv");
            write_file(&path, &buf)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Sweep { nm, trials } => {
            let nm = nm.clone().unwrap_or_else(|| exp.config.sweep.nm.clone());
            let trials = trials.unwrap_or(exp.config.sweep.trials);
            let sweep = probability_sweep(&exp, &nm, trials, seed)?;
            let path = output_path(cli, &exp, "sweep", "jsonl");
            let mut buf = Vec::new();
            write_jsonl(&mut buf, &sweep.records)?;
            write_file(&path, &buf)?;
            let trials_path = path.with_extension("trials.jsonl");
            let mut tbuf = Vec::new();
            write_jsonl(&mut tbuf, &sweep.trials)?;
            write_file(&trials_path, &tbuf)?;
            for r in &sweep.records {
                println!(
                    "nm={:<6} fraction={:.4} [{:.4}, {:.4}] rank_deficient={}",
                    r.nm, r.fraction, r.wilson_lower, r.wilson_upper, r.rank_deficient
                );
            }
            eprintln!("wrote {} and {}", path.display(), trials_path.display());
        }
        Command::Constants { theorem, n, m, gamma, omega, mu, eta, delta, eps, beta_tilde } => {
            let args = TheoremArgs {
                n: *n,
                m: *m,
                gamma: *gamma,
                omega: *omega,
                mu: *mu,
                eta: *eta,
                delta: *delta,
                eps: *eps,
                beta_tilde: *beta_tilde,
            };
            let report = constants_report(&exp, (*theorem).into(), &args, seed)?;
            print!("{}", pretty_report(&report));
            let stamped = Stamped { config_hash: hash, seed, body: report };
            let mut buf = serde_json::to_vec_pretty(&stamped)?;
            buf.push(b'\n');
            let path = output_path(cli, &exp, "constants", "json");
            write_file(&path, &buf)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Samples { n, m } => {
            let samples = samples_for(&exp, *n, *m, seed)?;
            let mut raw = Vec::new();
            samples.write_csv(&mut raw)?;
            let path = output_path(cli, &exp, "samples", "csv");
            write_file(&path, &stamp_csv(&raw, &hash, seed)?)?;
            eprintln!("wrote {} (acceptance rate {:.4})", path.display(), samples.acceptance_rate);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
