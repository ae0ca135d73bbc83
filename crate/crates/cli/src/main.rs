//! `ffdioph`: verification suites, best approximations, fractal enumeration,
//! certificate construction and bound tables over F_q((x⁻¹)).
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on invalid
//! configuration or input. `FFDIOPH_WORKERS` sets the size of the worker pool.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use ffdioph::bounds;
use ffdioph::diophantine::{best_approx_sequence, best_approx_sequence_exact, di_test};
use ffdioph::diophantine::best::theta_from_ratfns;
use ffdioph::fractal_lower::{
    build_di_certificate, build_sing_prefix, enumerate_children, replay_certificate, t_window, verify_separation,
    Chooser, LowerNode,
};
use ffdioph::fractal_upper::{contraction_check, enumerate_d, round_up_dyadic, UpperNode};
use ffdioph::parse::{parse_eps_grid, parse_pair, parse_ratfn_vec};
use ffdioph::qexp::{fmt_rational, parse_rational};
use ffdioph::suites::{assemble, build_suite, run_case, SuiteConfig};
use ffdioph::diophantine::ApproxPair;
use ffdioph::Field;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ffdioph::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ffdioph", version)]
#[command(about = "Diophantine approximation over F_q((x^-1)): exact checks, searches and certificates")]
struct Cli {
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChooserArg {
    Lexicographic,
    MaxSeparation,
}

impl From<ChooserArg> for Chooser {
    fn from(c: ChooserArg) -> Self {
        match c {
            ChooserArg::Lexicographic => Chooser::LexicographicFirst,
            ChooserArg::MaxSeparation => Chooser::MaxSeparation,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite, or replay a certificate file with `verify certificate <file>`
    Verify {
        suite: String,
        /// Certificate file (only with the `certificate` suite).
        file: Option<PathBuf>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// ε as `p/q`, a decimal or `b^-k`.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "N")]
        n_max: Option<u32>,
        #[arg(long)]
        cutoff: Option<i64>,
        #[arg(long)]
        degree: Option<i64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Record per-case runtimes (makes the report run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Best approximations of θ up to a degree bound
    BestApprox {
        #[arg(long)]
        q: u32,
        /// Expected dimension (checked against θ).
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated rational functions, e.g. `(x^2+1)/x^3`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        bound: i64,
        /// Also run the Dirichlet-improvability test at this ε.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Build a replayable certificate for an ε-Dirichlet-improvable vector
    ConstructDi {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: String,
        #[arg(long = "N")]
        n_max: u32,
        #[arg(long)]
        steps: usize,
        /// Root pair `(a_1,…,a_d,b)`; defaults to `(0,…,0,1)`.
        #[arg(long)]
        root: Option<String>,
        #[arg(long, value_enum, default_value = "lexicographic")]
        chooser: ChooserArg,
    },
    /// Build a certificate prefix with the shrinking schedule ε_i → 0
    ConstructSing {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        /// First schedule level (needs ln(start+1) > 1).
        #[arg(long, default_value_t = 2)]
        start: i64,
        #[arg(long)]
        levels: usize,
        #[arg(long, value_enum, default_value = "lexicographic")]
        chooser: ChooserArg,
    },
    /// Shells of D(u) and the contraction sum of the upper structure
    EnumerateUpper {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 2)]
        cutoff: i64,
        #[arg(long)]
        u: Option<String>,
    },
    /// Children of a node of the lower structure with their separation report
    EnumerateLower {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: String,
        #[arg(long = "N")]
        n_max: u32,
        #[arg(long)]
        u: Option<String>,
    },
    /// Table of the dimension bounds over an ε grid
    Bounds {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        /// `b^-i..b^-j` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        eps_grid: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// Output of a command: the artifact and whether every check in it passed.
struct Artifact {
    text: String,
    pass: bool,
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn field(q: u32) -> CliResult<Field> {
    Ok(Field::of_order(q)?)
}

fn node_pair(u: Option<&str>, d: usize, f: &Field) -> CliResult<ApproxPair> {
    let u = match u {
        Some(s) => parse_pair(s, f)?,
        None => ApproxPair::root(d),
    };
    if u.d() != d {
        return Err(CliError::Config(format!("u has dimension {}, expected {d}", u.d())));
    }
    Ok(u)
}

fn workers() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FFDIOPH_WORKERS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("FFDIOPH_WORKERS='{v}' is not a number")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<Artifact> {
    match cli.command {
        Command::Verify { suite, file, q, d, lmax, samples, seed, eps, n_max, cutoff, degree, steps, timings } => {
            if let Some(path) = file {
                if suite != "certificate" {
                    return Err(CliError::Config(format!("suite '{suite}' takes no file argument")));
                }
                let text = fs::read_to_string(&path)?;
                let report = replay_certificate(&text)?;
                return Ok(Artifact { pass: report.ok(), text: json(&report) });
            }
            let cfg = SuiteConfig { q, d, lmax, samples, seed, eps, n_max, cutoff, degree, steps };
            let cases = build_suite(&suite, &cfg)?;
            let start = Instant::now();
            let results = workers()?.install(|| {
                cases.par_iter().enumerate().map(|(i, c)| run_case(i, c, timings)).collect::<Vec<_>>()
            });
            let report = assemble(&suite, &cfg, results, timings.then(|| start.elapsed().as_millis()));
            Ok(Artifact { pass: report.pass, text: json(&report) })
        }
        Command::BestApprox { q, d, theta, bound, eps } => {
            let f = field(q)?;
            let theta = parse_ratfn_vec(&theta, &f)?;
            if d.is_some_and(|d| d != theta.len()) {
                return Err(CliError::Config(format!("θ has {} entries, --d says {}", theta.len(), d.unwrap())));
            }
            let seq = best_approx_sequence(&theta_from_ratfns(&theta, bound, &f), bound, &f)?;
            let exact = best_approx_sequence_exact(&theta, bound, &f)?;
            #[derive(Serialize)]
            struct Out<'a> {
                sequence: &'a ffdioph::diophantine::BestApproxSeq,
                lattice_search_agrees: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                di: Option<ffdioph::diophantine::DiReport>,
            }
            let di = eps.map(|e| parse_rational(&e)).transpose()?.map(|e| di_test(&seq, &e, &f));
            let agrees = seq == exact;
            Ok(Artifact { pass: agrees, text: json(&Out { sequence: &seq, lattice_search_agrees: agrees, di }) })
        }
        Command::ConstructDi { q, d, eps, n_max, steps, root, chooser } => {
            let f = field(q)?;
            let eps = parse_rational(&eps)?;
            let root = node_pair(root.as_deref(), d, &f)?;
            let cert = build_di_certificate(&eps, n_max, steps, &root, chooser.into(), &f)?;
            Ok(Artifact { pass: cert.passes(), text: cert.to_json() + "\n" })
        }
        Command::ConstructSing { q, d, start, levels, chooser } => {
            let f = field(q)?;
            let cert = build_sing_prefix(start, levels, d, chooser.into(), &f)?;
            Ok(Artifact { pass: cert.passes(), text: cert.to_json() + "\n" })
        }
        Command::EnumerateUpper { q, d, eps, cutoff, u } => {
            let f = field(q)?;
            let eps = parse_rational(&eps)?;
            let node = UpperNode::new(&node_pair(u.as_deref(), d, &f)?, &f);
            let shells = enumerate_d(&node, cutoff, &f)?;
            let s = round_up_dyadic(bounds::upper_bound(q, d, &eps)?, 10);
            let contraction = contraction_check(&node, &s, &eps, cutoff, &f)?;
            #[derive(Serialize)]
            struct Out {
                u: ApproxPair,
                eps: String,
                in_q_eps: bool,
                d_shells: Vec<ffdioph::fractal_upper::Shell>,
                contraction: ffdioph::fractal_upper::ContractionReport,
            }
            let pass = contraction.holds && shells.iter().all(|s| s.within_bound());
            let out = Out { u: node.u().clone(), eps: fmt_rational(&eps), in_q_eps: node.in_q_eps(&eps, q), d_shells: shells, contraction };
            Ok(Artifact { pass, text: json(&out) })
        }
        Command::EnumerateLower { q, d, eps, n_max, u } => {
            let f = field(q)?;
            let eps = parse_rational(&eps)?;
            let node = LowerNode::new(&node_pair(u.as_deref(), d, &f)?, &f);
            let children = enumerate_children(&node, &eps, n_max, &f)?;
            let pairs: Vec<ApproxPair> = children.iter().map(|c| c.v.clone()).collect();
            let separation = verify_separation(&node, &pairs, &eps, n_max, &f)?;
            #[derive(Serialize)]
            struct Out {
                u: ApproxPair,
                eps: String,
                n_max: u32,
                window: ffdioph::fractal_lower::TWindow,
                children: Vec<ffdioph::fractal_lower::Child>,
                separation: ffdioph::fractal_lower::SeparationReport,
            }
            let pass = separation.bound_holds && separation.distances_are_center_distances;
            let out = Out {
                u: node.u().clone(),
                eps: fmt_rational(&eps),
                n_max,
                window: t_window(&node, &eps, n_max, &f),
                children,
                separation,
            };
            Ok(Artifact { pass, text: json(&out) })
        }
        Command::Bounds { q, d, eps_grid, format } => {
            let grid = parse_eps_grid(&eps_grid)?;
            let rows = bounds::bounds_table(q, d, &grid)?;
            let text = match format {
                Format::Csv => bounds::to_csv(&rows)?,
                Format::Json => json(&rows),
            };
            Ok(Artifact { pass: true, text })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(a) => {
            let written = match &output {
                Some(p) => fs::write(p, &a.text),
                None => {
                    print!("{}", a.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if a.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
