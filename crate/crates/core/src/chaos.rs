//! Moments of multiple Wigner integrals from their kernels, the fourth and
//! sixth moment decompositions, and the tetilla moment recursion.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::Capacity;
use crate::combinatorics::{count_paths, enumerate_paths_with, ContractionPath, MAX_L};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rational::Rational;
use crate::scalar::Scalar;

/// Longest moment the kernel engine accepts.
pub const MAX_MOMENT_ORDER: usize = 12;

/// Tolerance for the unit-norm precondition in the float backend.
const FLOAT_UNIT_TOL: f64 = 1e-10;

/// Value of one contraction string together with its walk peak.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionStringValue<S> {
    pub path: ContractionPath,
    pub value: S,
    pub peak_order: usize,
}

/// Left fold `(…((g ⌢_{r_1} f) ⌢_{r_2} f) …) ⌢_{r_{l−1}} f`.
pub fn iterated_contraction<S: Scalar>(g: &Kernel<S>, f: &Kernel<S>, path: &ContractionPath) -> Result<Kernel<S>> {
    iterated_contraction_with(g, f, path, &Capacity::default())
}

pub fn iterated_contraction_with<S: Scalar>(
    g: &Kernel<S>,
    f: &Kernel<S>,
    path: &ContractionPath,
    cap: &Capacity,
) -> Result<Kernel<S>> {
    path.validate()?;
    if path.p != g.order() || path.q != f.order() {
        return Err(Error::InvalidInput(format!(
            "path is for orders (p, q) = ({}, {}), kernels have ({}, {})",
            path.p,
            path.q,
            g.order(),
            f.order()
        )));
    }
    cap.check_scalars(g.grid().cells, path.peak_order())?;
    let mut acc = g.clone();
    for &r in &path.r {
        acc = acc.contract_with(f, r, cap)?;
    }
    Ok(acc)
}

/// Scalar value of an admissible contraction string.
pub fn contraction_string_value<S: Scalar>(
    g: &Kernel<S>,
    f: &Kernel<S>,
    path: &ContractionPath,
) -> Result<ContractionStringValue<S>> {
    let value = iterated_contraction(g, f, path)?.to_scalar()?;
    Ok(ContractionStringValue {
        path: path.clone(),
        value,
        peak_order: path.peak_order(),
    })
}

/// Largest order any walk of `A_{q,q,l}` can reach: climbing by `q` per
/// step and still getting back to zero in the remaining steps.
fn max_peak(q: usize, l: usize) -> usize {
    (0..l).map(|k| q * (k + 1).min(l - 1 - k)).max().unwrap_or(q)
}

fn check_moment_request<S: Scalar>(f: &Kernel<S>, l: usize, cap: &Capacity) -> Result<()> {
    if f.order() == 0 {
        return Err(Error::InvalidInput("moments need a kernel of order ≥ 1".into()));
    }
    if l < 2 {
        return Err(Error::InvalidInput(format!("moment order l = {l} must be ≥ 2")));
    }
    if l > MAX_MOMENT_ORDER.min(MAX_L) {
        return Err(Error::capacity("moment order", l as u128, MAX_MOMENT_ORDER as u128));
    }
    let paths = count_paths(f.order(), f.order(), l, false)?;
    if paths > cap.max_paths as u128 {
        return Err(Error::capacity(
            format!("contraction strings for l = {l}, q = {}", f.order()),
            paths,
            cap.max_paths as u128,
        ));
    }
    cap.check_scalars(f.grid().cells, max_peak(f.order(), l))?;
    if !f.is_mirror_symmetric() {
        log::warn!("kernel is not mirror-symmetric; its moments are those of a non-self-adjoint element");
    }
    Ok(())
}

/// `E[I_q(f)^l] = Σ_{A_{q,q,l}} C_{f, path}(f)`.
///
/// The sum is evaluated depth-first over the tree of walk prefixes, so each
/// partial contraction is computed once and shared by every string that
/// extends it. Subtrees whose partial kernel vanishes are skipped. The
/// first-level branches run in parallel and are summed in a fixed order.
pub fn wigner_moment<S: Scalar>(f: &Kernel<S>, l: usize) -> Result<S> {
    wigner_moment_with(f, l, &Capacity::default())
}

pub fn wigner_moment_with<S: Scalar>(f: &Kernel<S>, l: usize, cap: &Capacity) -> Result<S> {
    let (raw, scale) = wigner_moment_raw(f, l, cap)?;
    S::resolve(&raw, &scale)
}

/// Float value of the moment, available even when the exact value is an
/// irrational multiple of a rational (odd `l` with an irrational scale).
pub fn wigner_moment_f64<S: Scalar>(f: &Kernel<S>, l: usize, cap: &Capacity) -> Result<f64> {
    let (raw, scale) = wigner_moment_raw(f, l, cap)?;
    Ok(raw.to_f64() * scale.to_f64().sqrt())
}

/// Coefficient sum and common squared scale of all leaves.
fn wigner_moment_raw<S: Scalar>(f: &Kernel<S>, l: usize, cap: &Capacity) -> Result<(S, Rational)> {
    check_moment_request(f, l, cap)?;
    let q = f.order();
    let steps = l - 1;
    let branches: Vec<usize> = (0..=q).filter(|&r| admissible_step(q, q, r, steps)).collect();
    let partial: Vec<Result<S>> = branches
        .par_iter()
        .map(|&r| {
            let next = f.contract_with(f, r, cap)?;
            descend(&next, f, steps - 1, cap)
        })
        .collect();
    let mut total = S::zero();
    for v in partial {
        total += &v?;
    }
    // every leaf carries the same scale, so it is resolved once
    Ok((total, f.scale_sq().pow(l as u32)))
}

/// Whether contracting `r` axes from order `order` keeps a route to zero
/// within the `remaining` steps (this one included).
fn admissible_step(q: usize, order: usize, r: usize, remaining: usize) -> bool {
    if r > order || r > q {
        return false;
    }
    let next = order + q - 2 * r;
    next <= (remaining - 1) * q && (remaining > 1 || next == 0)
}

/// Raw coefficient sum over all completions of the prefix ending at `acc`.
fn descend<S: Scalar>(acc: &Kernel<S>, f: &Kernel<S>, remaining: usize, cap: &Capacity) -> Result<S> {
    if remaining == 0 {
        return Ok(acc.coeffs()[0].clone());
    }
    if acc.is_zero() {
        return Ok(S::zero());
    }
    let q = f.order();
    let mut total = S::zero();
    for r in 0..=q {
        if !admissible_step(q, acc.order(), r, remaining) {
            continue;
        }
        let next = acc.contract_with(f, r, cap)?;
        total += &descend(&next, f, remaining - 1, cap)?;
    }
    Ok(total)
}

/// Reference evaluation: one independent fold per enumerated string.
pub fn wigner_moment_naive<S: Scalar>(f: &Kernel<S>, l: usize) -> Result<S> {
    let cap = Capacity::default();
    check_moment_request(f, l, &cap)?;
    let mut total = S::zero();
    for path in enumerate_paths_with(f.order(), f.order(), l, &cap)? {
        let value = iterated_contraction_with(f, f, &path, &cap)?;
        total += &value.coeffs()[0];
    }
    S::resolve(&total, &f.scale_sq().pow(l as u32))
}

fn require_unit_norm<S: Scalar>(f: &Kernel<S>) -> Result<()> {
    let n = f.norm_sq();
    let ok = match S::MODE {
        crate::scalar::Mode::Rational => n == S::one(),
        crate::scalar::Mode::Float => (n.to_f64() - 1.0).abs() <= FLOAT_UNIT_TOL,
    };
    if !ok {
        return Err(Error::Precondition(format!("kernel must have unit norm, ‖f‖² = {}", n.to_f64())));
    }
    Ok(())
}

fn require_mirror_symmetric<S: Scalar>(f: &Kernel<S>) -> Result<()> {
    if !f.is_mirror_symmetric() {
        return Err(Error::Precondition("kernel must be mirror-symmetric".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourthMoment<S> {
    pub total: S,
    /// `‖f ⌢_r f‖²` for `r = 1..q−1`.
    pub residuals: Vec<S>,
}

/// `E[I_q(f)^4] = 2 + Σ_{r=1}^{q−1} ‖f ⌢_r f‖²` for unit `f`.
pub fn fourth_moment_decomposition<S: Scalar>(f: &Kernel<S>) -> Result<FourthMoment<S>> {
    require_unit_norm(f)?;
    require_mirror_symmetric(f)?;
    let residuals = (1..f.order())
        .map(|r| Ok(f.contract(f, r)?.norm_sq()))
        .collect::<Result<Vec<S>>>()?;
    let mut total = S::one() + S::one();
    for v in &residuals {
        total += v;
    }
    Ok(FourthMoment { total, residuals })
}

/// `B_o`: contraction indices `r` whose double contraction
/// `(f ⌢_r f) ⌢_s f` has order `o = 3q − 2r − 2s` and is well defined,
/// i.e. `0 ≤ s ≤ min(q, 2q − 2r)`.
pub fn double_contraction_set(q: usize, order: usize) -> Result<Vec<usize>> {
    if order > 3 * q || !(3 * q - order).is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "order {order} is not 3q − 2(r + s) for q = {q}"
        )));
    }
    let total = (3 * q - order) / 2;
    Ok((0..=q)
        .filter(|&r| r <= total && total - r <= q.min(2 * q - 2 * r))
        .collect())
}

/// `B_{2k}` for even `q` (`0 ≤ k ≤ 3q/2`), or `B_{2k+1}` for odd `q`
/// (`0 ≤ k ≤ 3(q−1)/2`).
pub fn admissible_double_contractions(q: usize, k: usize) -> Result<Vec<usize>> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be ≥ 1".into()));
    }
    let (order, k_max) = if q.is_multiple_of(2) { (2 * k, 3 * q / 2) } else { (2 * k + 1, 3 * (q - 1) / 2) };
    if k > k_max {
        return Err(Error::InvalidInput(format!("k = {k} outside 0..={k_max} for q = {q}")));
    }
    double_contraction_set(q, order)
}

/// One chaos component of `I_q(f)^3`: all double contractions of order `o`.
#[derive(Clone, Debug)]
pub struct DoubleContractionGroup<S> {
    pub order: usize,
    /// `(r, s, (f ⌢_r f) ⌢_s f)` for `r ∈ B_o`.
    pub terms: Vec<(usize, usize, Kernel<S>)>,
}

impl<S: Scalar> DoubleContractionGroup<S> {
    pub fn sum(&self) -> Result<Kernel<S>> {
        Kernel::sum(self.terms.iter().map(|t| &t.2))?
            .ok_or_else(|| Error::InvalidInput(format!("empty group at order {}", self.order)))
    }

    /// `‖Σ_{r ∈ B_o} (f ⌢_r f) ⌢_s f‖²`.
    pub fn norm_sq_of_sum(&self) -> Result<S> {
        Ok(self.sum()?.norm_sq())
    }

    /// `Σ_{r ∈ B_o} ‖(f ⌢_r f) ⌢_s f‖²`.
    pub fn sum_of_norm_sq(&self) -> S {
        let mut acc = S::zero();
        for (_, _, k) in &self.terms {
            acc += &k.norm_sq();
        }
        acc
    }
}

/// Groups of double contractions for the orders `o ≡ q (mod 2)` selected
/// by `keep`, in increasing order.
pub fn double_contraction_groups<S: Scalar>(
    f: &Kernel<S>,
    keep: impl Fn(usize) -> bool,
) -> Result<Vec<DoubleContractionGroup<S>>> {
    let q = f.order();
    let cap = Capacity::default();
    let orders: Vec<usize> = (0..=3 * q).filter(|o| (3 * q - o).is_multiple_of(2) && keep(*o)).collect();
    if let Some(&top) = orders.iter().max() {
        cap.check_scalars(f.grid().cells, top.max(2 * q))?;
    }
    let singles = (0..=q).map(|r| f.contract(f, r)).collect::<Result<Vec<_>>>()?;
    orders
        .into_iter()
        .map(|order| {
            let total = (3 * q - order) / 2;
            let terms = double_contraction_set(q, order)?
                .into_iter()
                .map(|r| {
                    let s = total - r;
                    Ok((r, s, singles[r].contract(f, s)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DoubleContractionGroup { order, terms })
        })
        .collect()
}

/// `−½ f + Σ_{r=1}^{q−1} (f ⌢_r f) ⌢_{q−r} f`.
pub fn middle_combination<S: Scalar>(f: &Kernel<S>) -> Result<Kernel<S>> {
    let mut acc = f.scaled(&Rational::new(-1, 2));
    for r in 1..f.order() {
        acc = acc.add(&f.contract(f, r)?.contract(f, f.order() - r)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledTerm<S> {
    pub label: String,
    pub value: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SixthMoment<S> {
    /// `m_6 − 5 m_4 + (25/4) m_2` from the moment engine.
    pub lhs: S,
    /// Low orders, the order-`q` combination, high orders, then the top
    /// term `‖f ⊗ f ⊗ f‖²`.
    pub rhs_terms: Vec<LabeledTerm<S>>,
}

impl<S: Scalar> SixthMoment<S> {
    pub fn rhs(&self) -> S {
        let mut acc = S::zero();
        for t in &self.rhs_terms {
            acc += &t.value;
        }
        acc
    }
}

/// Chaos expansion of `E[(I_q(f)^3 − (5/2) I_q(f))^2]` for unit,
/// mirror-symmetric `f`; both parities of `q` are handled by indexing the
/// components by their order `o = 3q − 2r − 2s`.
pub fn sixth_moment_combination<S: Scalar>(f: &Kernel<S>) -> Result<SixthMoment<S>> {
    require_unit_norm(f)?;
    require_mirror_symmetric(f)?;
    let q = f.order();
    let m2 = wigner_moment(f, 2)?;
    let m4 = wigner_moment(f, 4)?;
    let m6 = wigner_moment(f, 6)?;
    let five = S::from_rational(&Rational::from_integer(5));
    let quarter25 = S::from_rational(&Rational::new(25, 4));
    let lhs = m6 - five.mul_ref(&m4) + quarter25.mul_ref(&m2);

    let groups = double_contraction_groups(f, |o| o != q && o != 3 * q)?;
    let mut rhs_terms = Vec::new();
    for g in groups.iter().filter(|g| g.order < q) {
        rhs_terms.push(LabeledTerm {
            label: format!("order {}", g.order),
            value: g.norm_sq_of_sum()?,
        });
    }
    rhs_terms.push(LabeledTerm {
        label: format!("order {q} combination"),
        value: middle_combination(f)?.norm_sq(),
    });
    for g in groups.iter().filter(|g| g.order > q) {
        rhs_terms.push(LabeledTerm {
            label: format!("order {}", g.order),
            value: g.norm_sq_of_sum()?,
        });
    }
    let n = f.norm_sq();
    rhs_terms.push(LabeledTerm {
        label: format!("order {}", 3 * q),
        value: n.mul_ref(&n).mul_ref(&n),
    });
    Ok(SixthMoment { lhs, rhs_terms })
}

/// Split sums of the tetilla recursion, indexed by `m ≥ 1`
/// (slot 0 is unused):
/// `s[m] = S_{f,2m}(f)`, `n[m] = S_{f,2m−1}(f ⌢_1 f)` and the
/// positive-walk counterparts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitSums {
    pub s: Vec<Rational>,
    pub s_plus: Vec<Rational>,
    pub n: Vec<Rational>,
    pub n_plus: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgorithmMoments {
    /// `m_2, m_4, …, m_{2·m_max}`.
    pub even_moments: Vec<Rational>,
    pub sums: SplitSums,
}

pub const MAX_ALGORITHM_ORDER: usize = 16;

/// Even tetilla moments from the coupled recursion
///
/// ```text
/// S_{2m}   = S_{2m−2} + N_{2m−1} + Σ_{k=1}^{m−1} S⁺_{2k} S_{2m−2k}
/// N_{2m−1} = ½ S_{2m−2} + Σ_{k=1}^{m−2} S⁺_{2k} N_{2m−2k−1}
/// ```
///
/// with the same system for the positive sums, started from
/// `S_2 = S⁺_2 = 1` and `N_3 = N⁺_3 = ½`.
pub fn tetilla_moment_algorithm(m_max: usize) -> Result<AlgorithmMoments> {
    if m_max == 0 {
        return Err(Error::InvalidInput("m_max must be ≥ 1".into()));
    }
    if m_max > MAX_ALGORITHM_ORDER {
        return Err(Error::capacity("algorithm order", m_max as u128, MAX_ALGORITHM_ORDER as u128));
    }
    let half = Rational::new(1, 2);
    let len = m_max + 1;
    let mut s = vec![Rational::zero(); len];
    let mut sp = vec![Rational::zero(); len];
    let mut n = vec![Rational::zero(); len];
    let mut np = vec![Rational::zero(); len];
    s[1] = Rational::one();
    sp[1] = Rational::one();
    for m in 2..=m_max {
        if m == 2 {
            n[2] = half.clone();
            np[2] = half.clone();
        } else {
            let mut acc = &half * &s[m - 1];
            let mut acc_p = &half * &sp[m - 1];
            for k in 1..=m - 2 {
                acc += &(&sp[k] * &n[m - k]);
                acc_p += &(&sp[k] * &np[m - k]);
            }
            n[m] = acc;
            np[m] = acc_p;
        }
        let mut acc = &s[m - 1] + &n[m];
        let mut acc_p = np[m].clone();
        for k in 1..m {
            acc += &(&sp[k] * &s[m - k]);
            acc_p += &(&sp[k] * &sp[m - k]);
        }
        s[m] = acc;
        sp[m] = acc_p;
    }
    Ok(AlgorithmMoments {
        even_moments: s[1..].to_vec(),
        sums: SplitSums { s, s_plus: sp, n, n_plus: np },
    })
}
