//! Evaluates the three equivalent conditions of the tetilla convergence
//! criterion along parametrized kernel families.

use std::fmt::Write as _;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::Capacity;
use crate::chaos::{fourth_moment_decomposition, middle_combination, wigner_moment_f64, wigner_moment_with};
use crate::error::{Error, Result};
use crate::kernels::{reference_tetilla_kernel, GridSpec, Kernel};
use crate::rational::Rational;
use crate::scalar::Scalar;
use crate::transforms::tetilla_moment_closed;

/// Largest moment order a sweep may request.
pub const MAX_ORDER_CAP: usize = 10;

/// Seed of the fixed perturbation direction of the perturbed family.
pub const PERTURBATION_SEED: u64 = 2024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// The reference tetilla kernel for every `n`.
    ConstantReference,
    /// `normalize(f + g/(c·n))` on three cells for a seeded integer `g`.
    PerturbedReference,
    /// `n^{−1/2} Σ_{i ≤ n} e_i ⊗ e_i` on `n` cells: `‖f_n ⌢_1 f_n‖² = 1/n`.
    SemicircularControl,
    /// `(2n)^{−1/2} Σ_{i ≤ n} (e_{2i−1} ⊗ e_{2i} + e_{2i} ⊗ e_{2i−1})` on
    /// `2n` cells: `‖f_n ⌢_1 f_n‖² = 1/(2n)`.
    PairedControl,
}

/// A sequence `n ↦ f_n` of unit-norm mirror-symmetric kernels of order `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelFamily {
    pub name: &'static str,
    pub kind: FamilyKind,
    pub q: usize,
    /// Largest `n` whose grid stays within the sixth-moment budget.
    pub max_n: usize,
}

pub fn builtin_families() -> Vec<KernelFamily> {
    vec![
        KernelFamily {
            name: "constant-reference",
            kind: FamilyKind::ConstantReference,
            q: 2,
            max_n: usize::MAX,
        },
        KernelFamily {
            name: "perturbed-reference",
            kind: FamilyKind::PerturbedReference,
            q: 2,
            max_n: usize::MAX,
        },
        KernelFamily {
            name: "semicircular-control",
            kind: FamilyKind::SemicircularControl,
            q: 2,
            max_n: 16,
        },
        KernelFamily {
            name: "paired-control",
            kind: FamilyKind::PairedControl,
            q: 2,
            max_n: 8,
        },
    ]
}

pub fn family_by_name(name: &str) -> Result<KernelFamily> {
    builtin_families().into_iter().find(|f| f.name == name).ok_or_else(|| {
        let known: Vec<_> = builtin_families().iter().map(|f| f.name).collect();
        Error::InvalidInput(format!("unknown family {name:?}; known: {}", known.join(", ")))
    })
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// Integer mirror-symmetric perturbation on three cells, and the divisor
/// that brings its size to about a quarter of the reference kernel.
fn perturbation() -> (Vec<Rational>, i64) {
    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let raw: Vec<Rational> = (0..9).map(|_| Rational::sample(&mut rng)).collect();
    let mut g = vec![Rational::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            g[3 * i + j] = &raw[3 * i + j] + &raw[3 * j + i];
        }
    }
    let norm = g.iter().map(|c| c.to_f64().powi(2)).sum::<f64>().sqrt();
    // reference coefficients have norm √2
    let divisor = (4.0 * norm / 2f64.sqrt()).ceil().max(1.0) as i64;
    (g, divisor)
}

impl KernelFamily {
    pub fn generate(&self, n: usize) -> Result<Kernel<Rational>> {
        if n == 0 {
            return Err(Error::InvalidInput("family index n starts at 1".into()));
        }
        if n > self.max_n {
            return Err(Error::capacity(format!("family {} index", self.name), n as u128, self.max_n as u128));
        }
        match self.kind {
            FamilyKind::ConstantReference => Ok(reference_tetilla_kernel()),
            FamilyKind::PerturbedReference => {
                let (g, divisor) = perturbation();
                let lift = int(divisor * n as i64);
                let coeffs: Vec<Rational> = (0..9)
                    .map(|k| {
                        let (i, j) = (k / 3, k % 3);
                        let base = if (i, j) == (0, 1) || (i, j) == (1, 0) { lift.clone() } else { Rational::zero() };
                        base + g[k].clone()
                    })
                    .collect();
                Kernel::new(2, GridSpec::unit(3)?, Rational::one(), coeffs)?.normalized()
            }
            FamilyKind::SemicircularControl => {
                let grid = GridSpec::unit(n)?;
                Kernel::from_fn(2, grid, Rational::new(1, n as i64), |i| int((i[0] == i[1]) as i64))
            }
            FamilyKind::PairedControl => {
                let grid = GridSpec::unit(2 * n)?;
                Kernel::from_fn(2, grid, Rational::new(1, 2 * n as i64), |i| {
                    int((i[0] / 2 == i[1] / 2 && i[0] != i[1]) as i64)
                })
            }
        }
    }
}

/// `(m_4, m_6)` of `I_q(f_n)`; the tetilla targets are `5/2` and `33/4`.
pub fn check_condition_i(family: &KernelFamily, n: usize) -> Result<(Rational, Rational)> {
    let f = family.generate(n)?;
    let cap = Capacity::from_env()?;
    Ok((wigner_moment_with(&f, 4, &cap)?, wigner_moment_with(&f, 6, &cap)?))
}

/// `‖(f ⌢_r f) ⌢_{r′} f‖` for one index pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairResidual {
    pub r: usize,
    pub r2: usize,
    pub norm_sq: Rational,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionII {
    /// Pairs `r, r′ ∈ 1..q−1` with `r′+2r ≤ 2q` and `r+r′ ≠ q`.
    pub pairs: Vec<PairResidual>,
    /// The pairs with `r′ = q` (and `2r ≤ q`), which the literal condition
    /// leaves out although their double contractions are orders-below-`q`
    /// components of `I_q(f)^3`.
    pub extended: Vec<PairResidual>,
    /// `‖−½ f + Σ_{r=1}^{q−1} (f ⌢_r f) ⌢_{q−r} f‖`.
    pub combination: f64,
    pub combination_sq: Rational,
}

impl ConditionII {
    pub fn residual_sum(&self) -> f64 {
        self.pairs.iter().map(|p| p.norm).sum::<f64>() + self.combination
    }

    pub fn extended_residual_sum(&self) -> f64 {
        self.residual_sum() + self.extended.iter().map(|p| p.norm).sum::<f64>()
    }
}

/// Index pairs of the literal condition (ii).
pub fn condition_ii_pairs(q: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 1..q {
        for r2 in 1..q {
            if r2 + 2 * r <= 2 * q && r + r2 != q {
                out.push((r, r2));
            }
        }
    }
    out
}

/// Pairs with `r′ = q` that complete the literal list.
pub fn condition_ii_extended_pairs(q: usize) -> Vec<(usize, usize)> {
    (1..q).filter(|r| 2 * r <= q).map(|r| (r, q)).collect()
}

fn pair_residual(f: &Kernel<Rational>, r: usize, r2: usize) -> Result<PairResidual> {
    let norm_sq = f.contract(f, r)?.contract(f, r2)?.norm_sq();
    let norm = norm_sq.to_f64().max(0.0).sqrt();
    Ok(PairResidual { r, r2, norm_sq, norm })
}

pub fn check_condition_ii(family: &KernelFamily, n: usize) -> Result<ConditionII> {
    let q = family.q;
    if q < 2 {
        return Err(Error::InvalidInput("condition (ii) needs q ≥ 2".into()));
    }
    let f = family.generate(n)?;
    let pairs = condition_ii_pairs(q)
        .into_iter()
        .map(|(r, r2)| pair_residual(&f, r, r2))
        .collect::<Result<Vec<_>>>()?;
    let extended = condition_ii_extended_pairs(q)
        .into_iter()
        .map(|(r, r2)| pair_residual(&f, r, r2))
        .collect::<Result<Vec<_>>>()?;
    let combination_sq = middle_combination(&f)?.norm_sq();
    Ok(ConditionII {
        pairs,
        extended,
        combination: combination_sq.to_f64().max(0.0).sqrt(),
        combination_sq,
    })
}

/// `|m_l(F_n) − m_l(T)|` for one order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentDistance {
    pub l: usize,
    /// Exact moment when it is rational (always for even `l`).
    pub exact: Option<Rational>,
    pub value: f64,
    pub target: Rational,
    pub distance: f64,
}

/// Tetilla moment of order `l` (zero for odd `l`).
pub fn tetilla_target(l: usize) -> Rational {
    if l % 2 == 1 {
        Rational::zero()
    } else {
        tetilla_moment_closed(l / 2)
    }
}

/// Moment distances for `l = 2..=order_cap`. Convergence in distribution
/// is read as convergence of these moments, which suffices because the
/// tetilla law has compact support.
pub fn check_condition_iii(family: &KernelFamily, n: usize, order_cap: usize) -> Result<Vec<MomentDistance>> {
    if !(2..=MAX_ORDER_CAP).contains(&order_cap) {
        return Err(Error::InvalidInput(format!("order cap {order_cap} outside 2..={MAX_ORDER_CAP}")));
    }
    let f = family.generate(n)?;
    let cap = Capacity::from_env()?;
    (2..=order_cap)
        .map(|l| {
            let target = tetilla_target(l);
            let (exact, value) = match wigner_moment_with(&f, l, &cap) {
                Ok(v) => {
                    let x = v.to_f64();
                    (Some(v), x)
                }
                Err(Error::NotExact(_)) => (None, wigner_moment_f64(&f, l, &cap)?),
                Err(e) => return Err(e),
            };
            let distance = match &exact {
                Some(v) => (v - &target).abs().to_f64(),
                None => (value - target.to_f64()).abs(),
            };
            Ok(MomentDistance { l, exact, value, target, distance })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub m4: Rational,
    pub m6: Rational,
    /// `|m_4 − 5/2| + |m_6 − 33/4|`.
    pub distance_i: f64,
    pub condition_ii: ConditionII,
    pub moment_distances: Vec<MomentDistance>,
    /// `m_4 − 2 = Σ_r ‖f_n ⌢_r f_n‖²` held exactly.
    pub fourth_identity_exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub q: usize,
    pub order_cap: usize,
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_row(family: &KernelFamily, n: usize, order_cap: usize) -> Result<ConvergenceRow> {
    let (m4, m6) = check_condition_i(family, n)?;
    let distance_i = ((&m4 - &Rational::new(5, 2)).abs() + (&m6 - &Rational::new(33, 4)).abs()).to_f64();
    let condition_ii = check_condition_ii(family, n)?;
    let moment_distances = check_condition_iii(family, n, order_cap)?;
    let f = family.generate(n)?;
    let fourth_identity_exact = fourth_moment_decomposition(&f)?.total == m4;
    Ok(ConvergenceRow {
        n,
        m4,
        m6,
        distance_i,
        condition_ii,
        moment_distances,
        fourth_identity_exact,
    })
}

/// Rows for `n = 1..=n_max`, evaluated in parallel and returned in order.
pub fn convergence_report(family: &KernelFamily, n_max: usize, order_cap: usize) -> Result<ConvergenceReport> {
    let ns: Vec<usize> = (1..=n_max).collect();
    convergence_report_for(family, &ns, order_cap)
}

pub fn convergence_report_for(family: &KernelFamily, ns: &[usize], order_cap: usize) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("need at least one family index".into()));
    }
    if let Some(&n) = ns.iter().max() {
        if n > family.max_n {
            return Err(Error::capacity(format!("family {} index", family.name), n as u128, family.max_n as u128));
        }
    }
    let rows = ns
        .par_iter()
        .map(|&n| convergence_row(family, n, order_cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        family: family.name.to_string(),
        q: family.q,
        order_cap,
        rows,
    })
}

impl ConvergenceReport {
    /// Columns: `n, m4, m6, m4_decimal, m6_decimal, distance_i`, one
    /// `res_r_r′` per literal pair, `combination`, one `ext_r_r′` per
    /// extended pair, `residual_sum, extended_residual_sum`, one `dist_m<l>`
    /// per order, `fourth_identity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header = vec!["n", "m4", "m6", "m4_decimal", "m6_decimal", "distance_i"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(condition_ii_pairs(self.q).iter().map(|(r, s)| format!("res_{r}_{s}")));
        header.push("combination".into());
        header.extend(condition_ii_extended_pairs(self.q).iter().map(|(r, s)| format!("ext_{r}_{s}")));
        header.push("residual_sum".into());
        header.push("extended_residual_sum".into());
        header.extend((2..=self.order_cap).map(|l| format!("dist_m{l}")));
        header.push("fourth_identity".into());
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let ii = &row.condition_ii;
            let mut cells = vec![
                row.n.to_string(),
                row.m4.to_string(),
                row.m6.to_string(),
                format!("{:?}", row.m4.to_f64()),
                format!("{:?}", row.m6.to_f64()),
                format!("{:e}", row.distance_i),
            ];
            cells.extend(ii.pairs.iter().map(|p| format!("{:e}", p.norm)));
            cells.push(format!("{:e}", ii.combination));
            cells.extend(ii.extended.iter().map(|p| format!("{:e}", p.norm)));
            cells.push(format!("{:e}", ii.residual_sum()));
            cells.push(format!("{:e}", ii.extended_residual_sum()));
            cells.extend(row.moment_distances.iter().map(|d| format!("{:e}", d.distance)));
            cells.push(row.fourth_identity_exact.to_string());
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // ties share their average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either sample is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
