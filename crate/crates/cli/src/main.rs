//! `tetilla`: batch commands over tetilla-core with CSV/JSON output.
//!
//! Exit codes: 0 ok, 1 usage or input error, 2 verification failure,
//! 3 capacity exceeded.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tetilla_core::chaos::{tetilla_moment_algorithm, wigner_moment_f64, wigner_moment_with};
use tetilla_core::identities::{run_suite, Suite, SuiteConfig};
use tetilla_core::kernels::reference_tetilla_kernel;
use tetilla_core::rm_oracle::{alternative_representation_moments, tetilla_trace_moments, SimConfig};
use tetilla_core::theorem::{convergence_report, family_by_name};
use tetilla_core::transforms::{
    density_from_cauchy, moments_from_cumulants, tetilla_cumulant, tetilla_density, tetilla_moment_closed,
    tetilla_support_edge, CumulantSequence,
};
use tetilla_core::{Capacity, Error, Kernel, Rational};

#[derive(Parser)]
#[command(name = "tetilla", version, about = "Exact and numerical tools for the tetilla law")]
struct Cli {
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment table m_2 … m_{MAX_ORDER} as "order, p/q, decimal" rows.
    Moments {
        #[arg(long, value_enum)]
        source: MomentSource,
        /// Even maximal order 2M.
        #[arg(long)]
        max_order: usize,
        /// Kernel JSON for --source kernel (defaults to the reference kernel).
        #[arg(long, value_name = "FILE")]
        kernel: Option<PathBuf>,
    },
    /// Density on K equispaced points of the closed support, CSV "t,h[,h_stieltjes,delta]".
    Density {
        #[arg(long)]
        points: usize,
        /// Distance from the real axis used by the Stieltjes inversion.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Also report −Im G(t + i·eps)/π and its distance to h.
        #[arg(long)]
        compare_stieltjes: bool,
    },
    /// Check the contraction identities on random kernels, JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        q: usize,
        /// Number of grid cells.
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Rational)]
        mode: ModeArg,
    },
    /// Convergence report for a built-in kernel family.
    ///
    /// CSV columns: n, exact m4 and m6, their decimals, distance_i = |m4 − 5/2| + |m6 − 33/4|,
    /// the norm of the order-q combination, one ext_R_S column per extended pair (norm of
    /// (f⌢_R f)⌢_S f), residual_sum and extended_residual_sum, dist_mL for L = 2..=order-cap,
    /// and whether the fourth-moment decomposition held exactly.
    CheckTheorem {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 6)]
        order_cap: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo trace moments, CSV "k,estimate,stderr,target,z_score".
    Simulate {
        /// Matrix dimension.
        #[arg(long = "N", value_name = "DIM")]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// Sample (X² − Y²)/√2 instead of (XY + YX)/√2.
        #[arg(long)]
        alt_representation: bool,
    },
    /// Kernel JSON utilities.
    Kernel {
        /// Print the reference tetilla kernel.
        #[arg(long, required = true)]
        emit_reference: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentSource {
    Closed,
    Algorithm,
    Nc,
    Kernel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Verification(String),
    Capacity(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_capacity() {
            Failure::Capacity(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("bad arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    let (text, failure) = match run(&cli.command) {
        Ok(text) => (Some(text), None),
        Err(Failure::Verification(text)) => (Some(text), Some((2, "verification failed".to_string()))),
        Err(Failure::Usage(msg)) => (None, Some((1, msg))),
        Err(Failure::Capacity(msg)) => (None, Some((3, msg))),
    };
    if let Some(text) = text {
        let written = match &cli.out {
            Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(msg) = written {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some((code, msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Moments {
            source,
            max_order,
            kernel,
        } => moments(*source, *max_order, kernel.as_ref()),
        Command::Density {
            points,
            eps,
            compare_stieltjes,
        } => density(*points, *eps, *compare_stieltjes),
        Command::Verify {
            suite,
            q,
            grid,
            seed,
            reps,
            mode,
        } => verify(suite, *q, *grid, *seed, *reps, *mode),
        Command::CheckTheorem {
            family,
            n_max,
            order_cap,
            format,
        } => {
            let fam = family_by_name(family)?;
            let rep = convergence_report(&fam, *n_max, *order_cap)?;
            Ok(match format {
                Format::Csv => rep.to_csv(),
                Format::Json => format!("{:#}\n", rep.to_json()),
            })
        }
        Command::Simulate {
            dim,
            trials,
            seed,
            kmax,
            alt_representation,
        } => {
            let cfg = SimConfig::new(*dim, *trials, *seed, *kmax)?;
            let est = if *alt_representation {
                alternative_representation_moments(&cfg)?
            } else {
                tetilla_trace_moments(&cfg)?
            };
            Ok(est.to_csv())
        }
        Command::Kernel { .. } => Ok(format!("{:#}\n", reference_tetilla_kernel::<Rational>().to_json())),
    }
}

fn moments(source: MomentSource, max_order: usize, kernel: Option<&PathBuf>) -> Outcome {
    if max_order < 2 || max_order % 2 == 1 {
        return Err(Failure::Usage(format!("--max-order must be an even number ≥ 2, got {max_order}")));
    }
    if kernel.is_some() && !matches!(source, MomentSource::Kernel) {
        return Err(Failure::Usage("--kernel only applies to --source kernel".into()));
    }
    let half = max_order / 2;
    // (exact, decimal) per order 2..=max_order
    let rows: Vec<(Option<Rational>, f64)> = match source {
        MomentSource::Closed => (2..=max_order)
            .map(|k| even_only(k, || tetilla_moment_closed(k / 2)))
            .collect(),
        MomentSource::Algorithm => {
            let alg = tetilla_moment_algorithm(half)?;
            (2..=max_order)
                .map(|k| even_only(k, || alg.even_moments[k / 2 - 1].clone()))
                .collect()
        }
        MomentSource::Nc => {
            let kappa = CumulantSequence::new((1..=max_order).map(tetilla_cumulant).collect())?;
            let m = moments_from_cumulants(&kappa, max_order)?;
            (2..=max_order).map(|k| exact_row(m[k].clone())).collect()
        }
        MomentSource::Kernel => {
            let f: Kernel<Rational> = match kernel {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                    let value: serde_json::Value = serde_json::from_str(&text)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    Kernel::from_json(&value)?
                }
                None => reference_tetilla_kernel(),
            };
            let cap = Capacity::from_env()?;
            let mut rows = Vec::new();
            for k in 2..=max_order {
                match wigner_moment_with(&f, k, &cap) {
                    Ok(v) => rows.push(exact_row(v)),
                    Err(Error::NotExact(_)) => rows.push((None, wigner_moment_f64(&f, k, &cap)?)),
                    Err(e) => return Err(e.into()),
                }
            }
            rows
        }
    };
    let mut out = String::new();
    for (k, (exact, dec)) in (2..).zip(rows) {
        let exact = exact.map_or_else(|| "irrational".to_string(), |r| r.to_string());
        writeln!(out, "{k}, {exact}, {dec:?}").unwrap();
    }
    Ok(out)
}

fn exact_row(r: Rational) -> (Option<Rational>, f64) {
    let d = r.to_f64();
    (Some(r), d)
}

fn even_only(k: usize, f: impl FnOnce() -> Rational) -> (Option<Rational>, f64) {
    if k % 2 == 1 {
        exact_row(Rational::from_integer(0))
    } else {
        exact_row(f())
    }
}

fn density(points: usize, eps: f64, compare: bool) -> Outcome {
    if points < 2 {
        return Err(Failure::Usage("--points must be ≥ 2".into()));
    }
    if points > 10_000_000 {
        return Err(Failure::Capacity(format!("--points {points} exceeds 10000000")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::Usage(format!("--eps must be positive, got {eps}")));
    }
    let edge = tetilla_support_edge();
    let mut out = String::from(if compare { "t,h,h_stieltjes,delta\n" } else { "t,h\n" });
    for i in 0..points {
        let t = -edge + 2.0 * edge * i as f64 / (points - 1) as f64;
        let h = tetilla_density(t);
        if compare {
            let hs = density_from_cauchy(t, eps)?;
            writeln!(out, "{t:?},{h:?},{hs:?},{:?}", (h - hs).abs()).unwrap();
        } else {
            writeln!(out, "{t:?},{h:?}").unwrap();
        }
    }
    Ok(out)
}

fn verify(suite: &str, q: usize, cells: usize, seed: u64, reps: usize, mode: ModeArg) -> Outcome {
    let suite: Suite = suite.parse()?;
    let cfg = SuiteConfig {
        suite,
        q,
        cells,
        seed,
        reps,
    };
    let entries = match mode {
        ModeArg::Rational => run_suite::<Rational>(&cfg)?,
        ModeArg::Float => run_suite::<f64>(&cfg)?,
    };
    let failed = entries.iter().filter(|e| !e.passed).count();
    let report = serde_json::json!({
        "suite": suite_name(suite),
        "q": q,
        "cells": cells,
        "seed": seed,
        "reps": reps,
        "mode": match mode { ModeArg::Rational => "rational", ModeArg::Float => "float" },
        "checks": entries.len(),
        "failed": failed,
        "entries": entries,
    });
    let text = format!("{report:#}\n");
    if failed > 0 {
        Err(Failure::Verification(text))
    } else {
        Ok(text)
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::ContrLink => "contr-link",
        Suite::Lm1 => "lm1",
        Suite::ForbidWalks => "forbid-walks",
        Suite::Nondegeneracy => "nondegeneracy",
        Suite::All => "all",
    }
}
