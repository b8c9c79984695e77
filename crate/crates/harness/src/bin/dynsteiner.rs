use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynsteiner_harness::report::{write_csv, write_summary};
use dynsteiner_harness::{gen_mixed, gen_random, run, Algo, Checks, Geometry, RunConfig, RunError, RunOutput, Trace};

#[derive(Parser)]
#[command(name = "dynsteiner", version, about = "Online Steiner tree maintenance: generate, run and verify traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Initial metric, then every vertex deleted.
    Deletion,
    /// Interleaved additions and deletions.
    Mixed,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Vertices (deletion traces) or requests (mixed traces).
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Kind::Deletion)]
    kind: Kind,
    #[arg(long, value_enum, default_value_t = Geometry::UniformGrid)]
    geometry: Geometry,
    /// Deletion probability per request in mixed traces.
    #[arg(long, default_value_t = 0.4)]
    p_del: f64,
}

impl GenArgs {
    fn trace(&self) -> Trace {
        match self.kind {
            Kind::Deletion => gen_random(self.seed, self.n, self.geometry),
            Kind::Mixed => gen_mixed(self.seed, self.n, self.p_del, self.geometry),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded trace as JSON Lines.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm over a trace and write its step table and summary.
    Run {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, value_enum, default_value_t = Checks::Full)]
        checks: Checks,
        /// Directory for `<algo>.csv` and `<algo>.json`; summary to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        fail_fast: bool,
        /// Additions carry distances to every earlier vertex, deleted ones included.
        #[arg(long)]
        all_distances: bool,
    },
    /// Run every applicable algorithm with full checks; non-zero exit on any failure.
    Verify {
        /// Trace to verify; generated from the flags below if omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        algo: Option<Algo>,
        #[arg(long, value_enum, default_value_t = Checks::Full)]
        checks: Checks,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time runs over consecutive seeds.
    Bench {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long)]
        algo: Option<Algo>,
        #[arg(long, value_enum, default_value_t = Checks::Fast)]
        checks: Checks,
        #[arg(long, value_enum, default_value_t = Geometry::UniformGrid)]
        geometry: Geometry,
        /// Write the timing table as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status 2: the input was unusable.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T> {
    r.map_err(|e| InputError(format!("{:#}", e.into())).into())
}

fn read_trace(path: &Path, all_distances: bool) -> Result<Trace> {
    let f = input(File::open(path).with_context(|| format!("opening {}", path.display())))?;
    let t = input(Trace::read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display())))?;
    Ok(if all_distances { t.restrict_to_alive() } else { t })
}

fn run_checked(trace: &Trace, algo: Algo, cfg: RunConfig) -> Result<RunOutput> {
    match run(trace, algo, cfg) {
        Ok(out) => Ok(out),
        Err(e) if e.is_invariant() => Err(e.into()),
        Err(e @ (RunError::Trace(_) | RunError::Metric(_) | RunError::Dynamic(_) | RunError::Delete(_))) => {
            input(Err(anyhow::Error::new(e).context(algo.to_string())))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_outputs(dir: &Path, algo: Algo, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv = dir.join(format!("{algo}.csv"));
    write_csv(BufWriter::new(File::create(&csv)?), &out.steps).with_context(|| format!("writing {}", csv.display()))?;
    let json = dir.join(format!("{algo}.json"));
    let mut w = BufWriter::new(File::create(&json)?);
    write_summary(&mut w, &out.summary)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn status_line(algo: Algo, out: &RunOutput) -> String {
    let s = &out.summary;
    let opt = s.max_cost_over_opt.map_or("-".to_owned(), |r| format!("{r:.3}"));
    let verdict = match &s.first_failure {
        None => "PASS".to_owned(),
        Some(f) => format!("FAIL ({} failures, first: {f})", s.failures),
    };
    format!(
        "{algo:<9} steps={:<4} churn(total={}, max={}) swaps={} cost/mst<={:.3} cost/opt<={opt} {verdict}",
        s.steps, s.total_churn, s.max_churn, s.total_swaps, s.max_cost_over_mst
    )
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { gen, out } => {
            let trace = gen.trace();
            match out {
                Some(p) => trace.write_jsonl(BufWriter::new(File::create(&p)?))?,
                None => match trace.write_jsonl(io::stdout().lock()) {
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                    r => r?,
                },
            }
            Ok(true)
        }
        Command::Run { trace, algo, checks, out, fail_fast, all_distances } => {
            let trace = read_trace(&trace, all_distances)?;
            let cfg = RunConfig { checks, fail_fast, ..RunConfig::default() };
            let result = run_checked(&trace, algo, cfg)?;
            match out {
                Some(dir) => {
                    write_outputs(&dir, algo, &result)?;
                    println!("{}", status_line(algo, &result));
                }
                None => {
                    write_summary(io::stdout().lock(), &result.summary)?;
                    println!();
                }
            }
            Ok(result.passed())
        }
        Command::Verify { trace, gen, algo, checks, out } => {
            let trace = match trace {
                Some(p) => read_trace(&p, false)?,
                None => gen.trace(),
            };
            input(trace.validate())?;
            let algos: Vec<Algo> = match algo {
                Some(a) => vec![a],
                None if trace.is_deletion_only() => Algo::ALL.to_vec(),
                None => vec![Algo::Dynamic],
            };
            let mut ok = true;
            for a in algos {
                let result = run_checked(&trace, a, RunConfig::with_checks(checks))?;
                println!("{}", status_line(a, &result));
                if let Some(dir) = &out {
                    write_outputs(dir, a, &result)?;
                }
                ok &= result.passed();
            }
            Ok(ok)
        }
        Command::Bench { seed, n, runs, algo, checks, geometry, out } => {
            let algos = algo.map_or(Algo::ALL.to_vec(), |a| vec![a]);
            let mut rows = Vec::new();
            let mut ok = true;
            for a in algos {
                let start = Instant::now();
                let mut steps = 0;
                for s in seed..seed + runs {
                    let trace =
                        if a.deletion_only() { gen_random(s, n, geometry) } else { gen_mixed(s, n, 0.4, geometry) };
                    let r = run_checked(&trace, a, RunConfig::with_checks(checks))?;
                    steps += r.summary.steps;
                    ok &= r.passed();
                }
                let ms = start.elapsed().as_secs_f64() * 1000.0;
                println!("{a:<9} runs={runs} n={n} steps={steps} time={ms:.1}ms ({:.0} steps/s)", steps as f64 / ms * 1000.0);
                rows.push((a, runs, n, steps, ms));
            }
            if let Some(p) = out {
                let mut w = csv::Writer::from_path(&p)?;
                w.write_record(["algo", "runs", "n", "steps", "ms"])?;
                for (a, r, n, s, ms) in rows {
                    w.write_record([a.to_string(), r.to_string(), n.to_string(), s.to_string(), format!("{ms:.3}")])?;
                }
                w.flush()?;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<InputError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
