//! Numerical witnesses for the double-contraction identities, the lemma
//! on forbidden walks, and the nondegeneracy of `(f ⌢_1 f) ⌢_1 f`.
//!
//! Inner products are the real bilinear `⟨g, h⟩ = ∫ g h`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{double_contraction_groups, DoubleContractionGroup};
use crate::error::{Error, Result};
use crate::kernels::{random_kernel, random_mirror_symmetric_kernel, GridSpec, Kernel};
use crate::rational::Rational;
use crate::scalar::{Mode, Scalar};

/// Relative tolerance for identities checked in the float backend.
pub const FLOAT_REL_TOL: f64 = 1e-12;

/// Both sides of a scalar identity.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck<S> {
    pub lhs: S,
    pub rhs: S,
}

impl<S: Scalar> IdentityCheck<S> {
    pub fn discrepancy(&self) -> S {
        let d = self.lhs.clone() - self.rhs.clone();
        if d.to_f64() < 0.0 {
            -d
        } else {
            d
        }
    }

    /// Exact equality in rational mode, relative tolerance in float mode.
    pub fn holds(&self) -> bool {
        within_tolerance::<S>(&self.discrepancy(), self.lhs.abs_f64().max(self.rhs.abs_f64()))
    }
}

fn within_tolerance<S: Scalar>(discrepancy: &S, magnitude: f64) -> bool {
    match S::MODE {
        Mode::Rational => discrepancy.is_zero(),
        Mode::Float => discrepancy.abs_f64() <= FLOAT_REL_TOL * magnitude.max(1.0),
    }
}

fn double<S: Scalar>(f: &Kernel<S>, r: usize, s: usize) -> Result<Kernel<S>> {
    f.contract(f, r)?.contract(f, s)
}

fn precondition(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

/// Index tuple of one of the three double-contraction identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContrLink {
    /// `(r, s, r′, s′)` with `r+s = r′+s′ ≤ q`, `r < r′`, `r′+s ≥ q`.
    Swap { r: usize, s: usize, r2: usize, s2: usize },
    /// `(r, s, r′, s′)` with `r+s = r′+s′ ≤ q`, `r < r′`, `r′+s ≤ q`.
    Shift { r: usize, s: usize, r2: usize, s2: usize },
    /// `(r, s)` with `r ≤ q`, `s ≤ min(q, 2q−2r)`, `r+s ≥ q`.
    Norm { r: usize, s: usize },
}

impl ContrLink {
    pub fn variant(&self) -> u8 {
        match self {
            ContrLink::Swap { .. } => 1,
            ContrLink::Shift { .. } => 2,
            ContrLink::Norm { .. } => 3,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match *self {
            ContrLink::Swap { r, s, r2, s2 } | ContrLink::Shift { r, s, r2, s2 } => vec![r, s, r2, s2],
            ContrLink::Norm { r, s } => vec![r, s],
        }
    }

    /// Builds a tuple for `variant ∈ {1, 2, 3}` from its indices.
    pub fn from_indices(variant: u8, idx: &[usize]) -> Result<Self> {
        match (variant, idx) {
            (1, &[r, s, r2, s2]) => Ok(ContrLink::Swap { r, s, r2, s2 }),
            (2, &[r, s, r2, s2]) => Ok(ContrLink::Shift { r, s, r2, s2 }),
            (3, &[r, s]) => Ok(ContrLink::Norm { r, s }),
            _ => Err(Error::InvalidInput(format!(
                "variant {variant} does not take indices {idx:?}"
            ))),
        }
    }

    pub fn check(&self, q: usize) -> Result<()> {
        let shown = || format!("{:?} for q = {q}", self);
        match *self {
            ContrLink::Swap { r, s, r2, s2 } | ContrLink::Shift { r, s, r2, s2 } => {
                precondition(r.min(s).min(r2).min(s2) >= 1, || format!("indices must be positive: {}", shown()))?;
                precondition(r + s == r2 + s2 && r + s <= q, || format!("need r+s = r′+s′ ≤ q: {}", shown()))?;
                precondition(r < r2, || format!("need r < r′: {}", shown()))?;
                if self.variant() == 1 {
                    precondition(r2 + s >= q, || format!("need r′+s ≥ q: {}", shown()))
                } else {
                    precondition(r2 + s <= q, || format!("need r′+s ≤ q: {}", shown()))
                }
            }
            ContrLink::Norm { r, s } => {
                precondition(r >= 1 && s >= 1, || format!("indices must be positive: {}", shown()))?;
                precondition(r <= q && s <= q.min(2 * q - 2 * r), || {
                    format!("need r ≤ q and s ≤ min(q, 2q−2r): {}", shown())
                })?;
                precondition(r + s >= q, || format!("need r+s ≥ q: {}", shown()))
            }
        }
    }
}

/// Every admissible tuple of the given variant for kernel order `q`.
pub fn contr_link_tuples(q: usize, variant: u8) -> Result<Vec<ContrLink>> {
    let mut out = Vec::new();
    match variant {
        1 | 2 => {
            for r in 1..=q {
                for s in 1..=q {
                    for r2 in r + 1..=q {
                        for s2 in 1..=q {
                            let t = ContrLink::from_indices(variant, &[r, s, r2, s2])?;
                            if t.check(q).is_ok() {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
        3 => {
            for r in 1..=q {
                for s in 1..=q {
                    let t = ContrLink::Norm { r, s };
                    if t.check(q).is_ok() {
                        out.push(t);
                    }
                }
            }
        }
        _ => return Err(Error::InvalidInput(format!("unknown variant {variant}"))),
    }
    Ok(out)
}

/// Evaluates both sides of a double-contraction identity as written.
pub fn verify_contr_link<S: Scalar>(f: &Kernel<S>, link: ContrLink) -> Result<IdentityCheck<S>> {
    let q = f.order();
    precondition(q >= 2, || "kernel order must be ≥ 2".into())?;
    link.check(q)?;
    let (lhs, rhs) = match link {
        ContrLink::Swap { r, s, r2, s2 } => (
            double(f, r, s)?.inner_product(&double(f, r2, s2)?)?,
            double(f, s, 2 * q - 2 * s - r)?.inner_product(&double(f, q - r2, q - s2)?)?,
        ),
        ContrLink::Shift { r, s, r2, s2 } => (
            double(f, r, s)?.inner_product(&double(f, r2, s2)?)?,
            double(f, s, q - s2)?.inner_product(&double(f, q - r2, 2 * r2 - r)?)?,
        ),
        ContrLink::Norm { r, s } => (
            double(f, r, s)?.norm_sq(),
            double(f, q - r, q - s)?.inner_product(&double(f, 2 * q - 2 * r - s, r)?)?,
        ),
    };
    Ok(IdentityCheck { lhs, rhs })
}

fn sum_norms_of_sums<S: Scalar>(groups: &[&DoubleContractionGroup<S>]) -> Result<S> {
    let mut acc = S::zero();
    for g in groups {
        acc += &g.norm_sq_of_sum()?;
    }
    Ok(acc)
}

/// Cross-term identity for the components of `I_q(f)^3`:
/// `Σ_high ‖Σ_B D‖² = Σ_high Σ_B ‖D‖² + 2 Σ_low ‖Σ_B D‖²`, where `D` are the
/// double contractions, "low" are the orders below `q` and "high" those
/// strictly between `q` and `3q`. Both parities of `q` are covered.
pub fn verify_lm1<S: Scalar>(f: &Kernel<S>) -> Result<IdentityCheck<S>> {
    let q = f.order();
    precondition(q >= 2, || "kernel order must be ≥ 2".into())?;
    precondition(f.is_mirror_symmetric(), || "kernel must be mirror-symmetric".into())?;
    let groups = double_contraction_groups(f, |o| o != q && o != 3 * q)?;
    let low: Vec<_> = groups.iter().filter(|g| g.order < q).collect();
    let high: Vec<_> = groups.iter().filter(|g| g.order > q).collect();
    let lhs = sum_norms_of_sums(&high)?;
    let mut rhs = S::zero();
    for g in &high {
        rhs += &g.sum_of_norm_sq();
    }
    let low_sum = sum_norms_of_sums(&low)?;
    rhs += &low_sum;
    rhs += &low_sum;
    Ok(IdentityCheck { lhs, rhs })
}

/// Both kernels of the forbidden-walk lemma and their squared distance.
#[derive(Clone, Debug)]
pub struct KernelIdentity<S> {
    pub lhs: Kernel<S>,
    pub rhs: Kernel<S>,
    pub distance_sq: S,
}

impl<S: Scalar> KernelIdentity<S> {
    pub fn holds(&self) -> bool {
        within_tolerance::<S>(&self.distance_sq, self.lhs.norm_sq().abs_f64())
    }
}

/// Whether `(r, r′)` is admissible for the forbidden-walk lemma with
/// `g` of order `p` and `f` of order `q`.
pub fn forbid_walks_admissible(p: usize, q: usize, r: usize, r2: usize) -> bool {
    p >= 1 && r >= 1 && r < q && r2 >= 1 && r2 <= q && r2 + 2 * r > 2 * q && r2 + 2 * r - 2 * q <= p
}

/// `((g ⊗ f) ⌢_r f) ⌢_{r′} f = g ⌢_{r′+2r−2q} ((f ⌢_r f) ⌢_{2q−2r} f)`.
///
/// Besides `1 ≤ r ≤ q−1`, `1 ≤ r′ ≤ q` and `r′+2r > 2q`, the right-hand
/// contraction needs `r′+2r−2q ≤ p`.
pub fn verify_forbid_walks<S: Scalar>(g: &Kernel<S>, f: &Kernel<S>, r: usize, r2: usize) -> Result<KernelIdentity<S>> {
    let (p, q) = (g.order(), f.order());
    precondition(p >= 1, || "g must have order ≥ 1".into())?;
    precondition(r >= 1 && r < q, || format!("need 1 ≤ r ≤ q−1, got r = {r}, q = {q}"))?;
    precondition(r2 >= 1 && r2 <= q, || format!("need 1 ≤ r′ ≤ q, got r′ = {r2}, q = {q}"))?;
    precondition(r2 + 2 * r > 2 * q, || format!("need r′+2r > 2q, got r = {r}, r′ = {r2}, q = {q}"))?;
    precondition(r2 + 2 * r - 2 * q <= p, || {
        format!("need r′+2r−2q ≤ p, got {} > {p}", r2 + 2 * r - 2 * q)
    })?;
    let lhs = g.tensor(f)?.contract(f, r)?.contract(f, r2)?;
    let inner = f.contract(f, r)?.contract(f, 2 * q - 2 * r)?;
    let rhs = g.contract(&inner, r2 + 2 * r - 2 * q)?;
    let distance_sq = lhs.distance_sq(&rhs)?;
    Ok(KernelIdentity { lhs, rhs, distance_sq })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nondegeneracy<S> {
    /// `‖(f ⌢_1 f) ⌢_1 f‖²`.
    pub norm_sq_t: S,
    /// For `q = 2`: `⟨(f ⌢_1 f) ⌢_1 f, f⟩` and `‖f ⌢_1 f‖²`.
    pub pairing: Option<IdentityCheck<S>>,
}

impl<S: Scalar> Nondegeneracy<S> {
    pub fn norm_t(&self) -> f64 {
        self.norm_sq_t.to_f64().max(0.0).sqrt()
    }
}

/// `T = (f ⌢_1 f) ⌢_1 f` never vanishes for nonzero `f`; for order 2 the
/// pairing `⟨T, f⟩` equals `‖f ⌢_1 f‖²`.
pub fn nondegeneracy_check<S: Scalar>(f: &Kernel<S>) -> Result<Nondegeneracy<S>> {
    let q = f.order();
    precondition(q >= 2, || "kernel order must be ≥ 2".into())?;
    precondition(f.is_mirror_symmetric(), || "kernel must be mirror-symmetric".into())?;
    let c = f.contract(f, 1)?;
    let t = c.contract(f, 1)?;
    let pairing = if q == 2 {
        Some(IdentityCheck {
            lhs: t.inner_product(f)?,
            rhs: c.norm_sq(),
        })
    } else {
        None
    };
    Ok(Nondegeneracy {
        norm_sq_t: t.norm_sq(),
        pairing,
    })
}

/// Which identity family a batch run covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ContrLink,
    Lm1,
    ForbidWalks,
    Nondegeneracy,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contr-link" => Ok(Suite::ContrLink),
            "lm1" => Ok(Suite::Lm1),
            "forbid-walks" => Ok(Suite::ForbidWalks),
            "nondegeneracy" => Ok(Suite::Nondegeneracy),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub identity: String,
    pub q: usize,
    pub indices: Vec<usize>,
    /// Exact value as `"p/q"` in rational mode, decimal in float mode.
    pub discrepancy: String,
    pub mode: Mode,
    pub seed: u64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub q: usize,
    pub cells: usize,
    pub seed: u64,
    pub reps: usize,
}

enum Task {
    ContrLink(ContrLink),
    Lm1,
    ForbidWalks { p: usize, r: usize, r2: usize },
    Nondegeneracy,
}

fn tasks(suite: Suite, q: usize) -> Result<Vec<Task>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::ContrLink {
        for v in 1..=3 {
            out.extend(contr_link_tuples(q, v)?.into_iter().map(Task::ContrLink));
        }
    }
    if all || suite == Suite::Lm1 {
        out.push(Task::Lm1);
    }
    if all || suite == Suite::ForbidWalks {
        for p in 1..=2 {
            for r in 1..q {
                for r2 in 1..=q {
                    if forbid_walks_admissible(p, q, r, r2) {
                        out.push(Task::ForbidWalks { p, r, r2 });
                    }
                }
            }
        }
    }
    if all || suite == Suite::Nondegeneracy {
        out.push(Task::Nondegeneracy);
    }
    Ok(out)
}

fn rendered<S: Scalar>(value: &S) -> String {
    match value.to_json() {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

fn run_task<S: Scalar>(task: &Task, cfg: &SuiteConfig, rep: usize) -> Result<ReportEntry> {
    let grid = GridSpec::unit(cfg.cells)?;
    let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(rep as u64);
    let f = random_mirror_symmetric_kernel::<S>(cfg.q, &grid, seed)?;
    let entry = |identity: String, indices: Vec<usize>, discrepancy: S, passed: bool| ReportEntry {
        identity,
        q: cfg.q,
        indices,
        discrepancy: rendered(&discrepancy),
        mode: S::MODE,
        seed,
        passed,
    };
    Ok(match task {
        Task::ContrLink(link) => {
            let check = verify_contr_link(&f, *link)?;
            entry(format!("contr-link-{}", link.variant()), link.indices(), check.discrepancy(), check.holds())
        }
        Task::Lm1 => {
            let check = verify_lm1(&f)?;
            entry("lm1".into(), vec![], check.discrepancy(), check.holds())
        }
        Task::ForbidWalks { p, r, r2 } => {
            let g = random_kernel::<S>(*p, &grid, seed ^ 0x5eed)?;
            let check = verify_forbid_walks(&g, &f, *r, *r2)?;
            let passed = check.holds();
            entry("forbid-walks".into(), vec![*p, *r, *r2], check.distance_sq, passed)
        }
        Task::Nondegeneracy => {
            let check = nondegeneracy_check(&f)?;
            let positive = check.norm_sq_t.to_f64() > 0.0;
            match check.pairing {
                Some(p) => entry("nondegeneracy".into(), vec![], p.discrepancy(), positive && p.holds()),
                None => entry("nondegeneracy".into(), vec![], S::zero(), positive),
            }
        }
    })
}

/// Runs every admissible check of `cfg.suite` on `cfg.reps` seeded random
/// kernels. Entries are ordered by task, then by repetition, regardless of
/// how the work is scheduled.
pub fn run_suite<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<ReportEntry>> {
    if cfg.q < 2 {
        return Err(Error::InvalidInput("identity suites need q ≥ 2".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidInput("reps must be ≥ 1".into()));
    }
    let tasks = tasks(cfg.suite, cfg.q)?;
    let jobs: Vec<(usize, usize)> = (0..tasks.len()).flat_map(|t| (0..cfg.reps).map(move |k| (t, k))).collect();
    jobs.par_iter().map(|&(t, k)| run_task::<S>(&tasks[t], cfg, k)).collect()
}

/// `Rational` discrepancies are exact; this converts one back for callers
/// that want a number.
pub fn parse_discrepancy(entry: &ReportEntry) -> Result<f64> {
    match entry.mode {
        Mode::Rational => Ok(entry.discrepancy.parse::<Rational>()?.to_f64()),
        Mode::Float => entry
            .discrepancy
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("discrepancy {:?}: {e}", entry.discrepancy))),
    }
}
