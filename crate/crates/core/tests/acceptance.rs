//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances and time limits are pinned
//! below.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::{One, Zero};
use tetilla_core::chaos::{
    fourth_moment_decomposition, sixth_moment_combination, tetilla_moment_algorithm, wigner_moment,
};
use tetilla_core::combinatorics::{count_even_block_nc, enumerate_nc};
use tetilla_core::identities::{run_suite, ReportEntry, Suite, SuiteConfig};
use tetilla_core::kernels::{random_mirror_symmetric_kernel, reference_tetilla_kernel};
use tetilla_core::rm_oracle::{
    alternative_representation_moments, combined_z, semicircle_trace_moments, tetilla_trace_moments, SimConfig,
};
use tetilla_core::theorem::{check_condition_i, check_condition_ii, convergence_report, family_by_name};
use tetilla_core::transforms::{
    cauchy_cubic, cauchy_transform_tetilla, moments_from_cumulants, tetilla_cumulant, tetilla_density,
    tetilla_moment_closed, tetilla_moment_numeric, tetilla_support_edge, CumulantSequence, CUBIC_RESIDUAL_TOL,
};
use tetilla_core::{GridSpec, Rational};

const DENSITY_MASS_TOL: f64 = 1e-8;
const DENSITY_MOMENT_TOL: f64 = 1e-6;
const STIELTJES_EPS: f64 = 1e-6;
const STIELTJES_TOL: f64 = 1e-4;
const STIELTJES_POINTS: usize = 1000;
const IDENTITY_REPS: usize = 50;
const PERTURBED_FINAL_TOL: f64 = 1e-2;
const MC_DIM: usize = 512;
const MC_TRIALS: usize = 40;
const MC_SEED: u64 = 20240;
const MC_M4_TOL: f64 = 0.1;
const MC_M6_TOL: f64 = 0.5;
const MC_SEMI_M4_TOL: f64 = 0.05;
const MC_AGREEMENT_Z: f64 = 3.0;

type Outcome = Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: tetilla_core::Error) -> String {
    e.to_string()
}

fn moment_cross_validation() -> Outcome {
    let alg = tetilla_moment_algorithm(6).map_err(err)?;
    let kappa = CumulantSequence::new((1..=12).map(tetilla_cumulant).collect()).map_err(err)?;
    let nc = moments_from_cumulants(&kappa, 12).map_err(err)?;
    let f = reference_tetilla_kernel::<Rational>();
    for n in 1..=6 {
        let closed = tetilla_moment_closed(n);
        let chaos = wigner_moment(&f, 2 * n).map_err(err)?;
        ensure(
            closed == alg.even_moments[n - 1] && closed == nc[2 * n] && closed == chaos,
            || format!("m_{} disagrees: closed {closed}, algorithm {}, nc {}, kernel {chaos}", 2 * n, alg.even_moments[n - 1], nc[2 * n]),
        )?;
    }
    ensure(tetilla_moment_closed(2) == r(5, 2) && tetilla_moment_closed(3) == r(33, 4), || "m4/m6 values".into())?;
    Ok(format!("m2..m12 agree across 4 sources, m4 = 5/2, m6 = 33/4, m12 = {}", tetilla_moment_closed(6)))
}

fn odd_moments() -> Outcome {
    let f = reference_tetilla_kernel::<Rational>();
    for l in [3, 5, 7] {
        let m = wigner_moment(&f, l).map_err(err)?;
        ensure(m.is_zero(), || format!("m_{l} = {m}"))?;
    }
    Ok("m3 = m5 = m7 = 0 exactly".into())
}

fn density_normalization() -> Outcome {
    let edge = tetilla_support_edge();
    let expected_edge = (11.0 + 5.0 * 5f64.sqrt()).sqrt() / 2.0;
    ensure((edge - expected_edge).abs() < 1e-15, || format!("support edge {edge}"))?;
    let mass = tetilla_moment_numeric(0, 1e-10).map_err(err)?;
    ensure((mass - 1.0).abs() <= DENSITY_MASS_TOL, || format!("mass {mass}"))?;
    let mut worst: f64 = 0.0;
    for (k, target) in [(2, 1.0), (4, 2.5), (6, 8.25)] {
        let v = tetilla_moment_numeric(k, 1e-10).map_err(err)?;
        worst = worst.max((v - target).abs());
        ensure((v - target).abs() <= DENSITY_MOMENT_TOL, || format!("moment {k}: {v}"))?;
    }
    Ok(format!("|mass − 1| = {:.1e}, worst moment error {worst:.1e}", (mass - 1.0).abs()))
}

fn stieltjes_consistency() -> Outcome {
    let edge = tetilla_support_edge();
    let mut worst: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for i in 0..STIELTJES_POINTS {
        let t = -edge + 2.0 * edge * (i as f64 + 0.5) / STIELTJES_POINTS as f64;
        let z = Complex64::new(t, STIELTJES_EPS);
        let g = cauchy_transform_tetilla(z).map_err(err)?;
        let residual = cauchy_cubic(z, g).norm() / (1.0 + z.norm().powi(3));
        worst_residual = worst_residual.max(residual);
        let hs = -g.im / std::f64::consts::PI;
        worst = worst.max((hs - tetilla_density(t)).abs());
    }
    ensure(worst <= STIELTJES_TOL, || format!("max deviation {worst:.2e}"))?;
    ensure(worst_residual <= CUBIC_RESIDUAL_TOL, || format!("cubic residual {worst_residual:.2e}"))?;
    Ok(format!("max |h_stieltjes − h| = {worst:.2e}, max scaled cubic residual {worst_residual:.1e}"))
}

fn identity_suites() -> Outcome {
    let mut checked = 0;
    let mut identities = std::collections::BTreeMap::<String, usize>::new();
    for q in 2..=4 {
        for cells in [2, 3] {
            for suite in [Suite::ContrLink, Suite::Lm1, Suite::ForbidWalks] {
                let cfg = SuiteConfig {
                    suite,
                    q,
                    cells,
                    seed: 17 + q as u64,
                    reps: IDENTITY_REPS,
                };
                let exact = run_suite::<Rational>(&cfg).map_err(err)?;
                let float = run_suite::<f64>(&cfg).map_err(err)?;
                let bad: Vec<&ReportEntry> = exact
                    .iter()
                    .filter(|e| !e.passed || e.discrepancy != "0")
                    .chain(float.iter().filter(|e| !e.passed))
                    .collect();
                ensure(bad.is_empty(), || format!("{} failing entries, first {:?}", bad.len(), bad[0]))?;
                for e in &exact {
                    *identities.entry(format!("{} q={}", e.identity, e.q)).or_default() += 1;
                }
                checked += exact.len() + float.len();
            }
        }
    }
    let min_kernels = identities.values().min().copied().unwrap_or(0);
    ensure(min_kernels >= IDENTITY_REPS, || format!("only {min_kernels} kernels for some identity"))?;
    Ok(format!(
        "{checked} checks over {} identity/order pairs, rational discrepancies all 0",
        identities.len()
    ))
}

fn sixth_moment_decomposition() -> Outcome {
    let f = reference_tetilla_kernel::<Rational>();
    let six = sixth_moment_combination(&f).map_err(err)?;
    let terms: Vec<Rational> = six.rhs_terms.iter().map(|t| t.value.clone()).collect();
    ensure(terms == vec![r(0, 1), r(0, 1), r(1, 1), r(1, 1)] && six.lhs == r(2, 1), || {
        format!("reference terms {terms:?}, lhs {}", six.lhs)
    })?;
    let mut kernels = 0;
    for q in 2..=3 {
        for cells in [2, 3] {
            let grid = GridSpec::unit(cells).map_err(err)?;
            for seed in 0..5 {
                let f = random_mirror_symmetric_kernel::<Rational>(q, &grid, 900 + seed).map_err(err)?;
                if q == 2 {
                    let six = sixth_moment_combination(&f).map_err(err)?;
                    ensure(six.lhs == six.rhs(), || format!("six-moment q={q} seed={seed}: {} vs {}", six.lhs, six.rhs()))?;
                }
                let four = fourth_moment_decomposition(&f).map_err(err)?;
                let m4 = wigner_moment(&f, 4).map_err(err)?;
                ensure(four.total == m4, || format!("fourth q={q}: {} vs {m4}", four.total))?;
                kernels += 1;
            }
        }
    }
    Ok(format!("reference (0, 0, 1, 1) with lhs 2; exact on {kernels} random kernels"))
}

fn theorem_sweep() -> Outcome {
    let constant = family_by_name("constant-reference").map_err(err)?;
    for row in convergence_report(&constant, 8, 8).map_err(err)?.rows {
        ensure(
            row.distance_i == 0.0
                && row.condition_ii.residual_sum() == 0.0
                && row.condition_ii.extended_residual_sum() == 0.0
                && row.moment_distances.iter().all(|d| d.distance == 0.0),
            || format!("constant family nonzero at n = {}", row.n),
        )?;
    }
    let perturbed = family_by_name("perturbed-reference").map_err(err)?;
    let rows = convergence_report(&perturbed, 64, 6).map_err(err)?.rows;
    let residual: Vec<f64> = rows.iter().map(|row| row.condition_ii.extended_residual_sum()).collect();
    for n in 8..64 {
        ensure(residual[n] < residual[n - 1], || format!("perturbed residual rises at n = {}", n + 1))?;
    }
    ensure(residual[63] < PERTURBED_FINAL_TOL, || format!("perturbed residual {} at n = 64", residual[63]))?;
    let semi = family_by_name("semicircular-control").map_err(err)?;
    let mut comb = Vec::new();
    for n in 1..=16 {
        let (m4, _) = check_condition_i(&semi, n).map_err(err)?;
        ensure(&m4 - &r(2, 1) == r(1, n as i64), || format!("semicircular m4 = {m4} at n = {n}"))?;
        let ii = check_condition_ii(&semi, n).map_err(err)?;
        let gap = &r(1, 2) - &r(1, n as i64);
        ensure(ii.combination_sq == &gap * &gap, || format!("combination² {} at n = {n}", ii.combination_sq))?;
        comb.push(ii.combination);
    }
    ensure(comb.windows(2).skip(1).all(|w| w[1] > w[0]) && (comb[15] - 0.5).abs() < 0.1, || {
        format!("combination does not approach 1/2: {comb:?}")
    })?;
    Ok(format!(
        "constant exact; perturbed residual {:.2e} at n = 64; semicircular |m4 − 2| = 1/n, combination {:.4} at n = 16",
        residual[63], comb[15]
    ))
}

fn monte_carlo() -> Outcome {
    let cfg = SimConfig::new(MC_DIM, MC_TRIALS, MC_SEED, 6).map_err(err)?;
    let product = tetilla_trace_moments(&cfg).map_err(err)?;
    let alt = alternative_representation_moments(&cfg).map_err(err)?;
    let semi = semicircle_trace_moments(&cfg).map_err(err)?;
    let m4 = product.get(4).unwrap().estimate;
    let m6 = product.get(6).unwrap().estimate;
    let s4 = semi.get(4).unwrap().estimate;
    ensure((m4 - 2.5).abs() <= MC_M4_TOL, || format!("m4 = {m4}"))?;
    ensure((m6 - 8.25).abs() <= MC_M6_TOL, || format!("m6 = {m6}"))?;
    ensure((s4 - 2.0).abs() <= MC_SEMI_M4_TOL, || format!("semicircle m4 = {s4}"))?;
    let mut worst_z: f64 = 0.0;
    for k in 1..=6 {
        worst_z = worst_z.max(combined_z(product.get(k).unwrap(), alt.get(k).unwrap()));
    }
    ensure(worst_z <= MC_AGREEMENT_Z, || format!("representations differ by {worst_z:.2} SE"))?;
    Ok(format!("m4 = {m4:.4}, m6 = {m6:.3}, semicircle m4 = {s4:.4}, max combined z {worst_z:.2}"))
}

fn combinatorial_counts() -> Outcome {
    let mut catalan = vec![1u64];
    for n in 0..10 {
        catalan.push((0..=n).map(|i| catalan[i] * catalan[n - i]).sum());
    }
    for (m, &expected) in catalan.iter().enumerate().skip(1) {
        let count = enumerate_nc(m).map_err(err)?.len() as u64;
        ensure(count == expected, || format!("|NC({m})| = {count}"))?;
    }
    let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    for n in 1..=5u64 {
        let mut total = Rational::zero();
        for k in 1..=n {
            let count = count_even_block_nc(n as usize, k as usize).map_err(err)?;
            let corrected = binom(2 * n, k - 1) * binom(n, k) / n;
            ensure(count == corrected, || format!("even-block count n={n} k={k}: {count} vs {corrected}"))?;
            // m_{2n} = Σ_k count · 2^{k − n}
            total = &total + &(&Rational::from_integer(count as i64) * &r(1 << k, 1 << n));
        }
        ensure(total == tetilla_moment_closed(n as usize), || format!("moment from counts at n = {n}"))?;
    }
    ensure(Rational::one() == tetilla_moment_closed(1), || "m2".into())?;
    Ok("Catalan counts for m ≤ 10; corrected even-block counts for n ≤ 5".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 9] = [
        ("moment cross-validation", moment_cross_validation, secs(60)),
        ("odd moments of the reference kernel", odd_moments, secs(60)),
        ("density normalization", density_normalization, secs(10)),
        ("Stieltjes consistency", stieltjes_consistency, secs(10)),
        ("contraction identities", identity_suites, secs(300)),
        ("sixth- and fourth-moment decompositions", sixth_moment_decomposition, secs(60)),
        ("theorem sweep", theorem_sweep, secs(300)),
        ("Monte Carlo oracle", monte_carlo, secs(300)),
        ("combinatorial counts", combinatorial_counts, secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail}; {elapsed:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail}; {elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
