//! Admissible contraction strings and their lattice-walk encoding.
//!
//! A tuple `(r_1, …, r_{l-1})` describes the iterated contraction
//! `(…((g ⌢_{r_1} f) ⌢_{r_2} f) …) ⌢_{r_{l-1}} f` with `g` of order `p` and
//! `f` of order `q`. The walk `M_k = kq + p − 2(r_1 + … + r_k)` records the
//! order of the partial result after step `k`.

use serde::{Deserialize, Serialize};

use crate::capacity::Capacity;
use crate::error::{Error, Result};

pub const MAX_Q: usize = 6;
pub const MAX_L: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContractionPath {
    pub q: usize,
    pub p: usize,
    pub l: usize,
    pub r: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Walk {
    pub values: Vec<usize>,
}

impl ContractionPath {
    /// Validates conditions (a) and (b) of admissibility.
    pub fn new(q: usize, p: usize, r: Vec<usize>) -> Result<Self> {
        let path = ContractionPath { q, p, l: r.len() + 1, r };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        let (q, p) = (self.q, self.p);
        if q == 0 || p == 0 || self.l < 2 || self.r.len() + 1 != self.l {
            return Err(Error::InvalidInput(format!("malformed path {self:?}")));
        }
        let mut order = p as i64;
        for (k, &r) in self.r.iter().enumerate() {
            if r > q {
                return Err(Error::InvalidInput(format!("r_{} = {r} exceeds q = {q}", k + 1)));
            }
            // (a): r_k never exceeds the current order
            if r as i64 > order {
                return Err(Error::InvalidInput(format!(
                    "r_{} = {r} exceeds the current order {order}",
                    k + 1
                )));
            }
            order += q as i64 - 2 * r as i64;
        }
        // (b): ends at a scalar
        if order != 0 {
            return Err(Error::InvalidInput(format!("path ends at order {order}, not 0")));
        }
        Ok(())
    }

    pub fn to_walk(&self) -> Walk {
        path_to_walk(self)
    }

    /// Largest intermediate order along the path.
    pub fn peak_order(&self) -> usize {
        self.to_walk().values.into_iter().max().unwrap_or(0)
    }
}

impl Walk {
    /// Checks constraints (i)–(iii) for kernel order `q`.
    pub fn validate(&self, q: usize) -> Result<()> {
        let v = &self.values;
        if v.len() < 2 {
            return Err(Error::InvalidWalk("walk needs at least two points".into()));
        }
        if v[0] == 0 {
            return Err(Error::InvalidWalk("walk must start at p ≥ 1".into()));
        }
        if *v.last().unwrap() != 0 {
            return Err(Error::InvalidWalk("walk must end at 0".into()));
        }
        for k in 0..v.len() - 1 {
            let (a, b) = (v[k] as i64, v[k + 1] as i64);
            let step = b - a;
            if step.abs() > q as i64 || (step + q as i64) % 2 != 0 {
                return Err(Error::InvalidWalk(format!("step {a} → {b} not in {{-q, -q+2, …, q}}")));
            }
            if a <= q as i64 && b < q as i64 - a {
                return Err(Error::InvalidWalk(format!("step {a} → {b} violates the reflection rule")));
            }
        }
        Ok(())
    }
}

/// `M_k = kq + p − 2(r_1 + … + r_k)`.
pub fn path_to_walk(path: &ContractionPath) -> Walk {
    let mut values = Vec::with_capacity(path.l);
    let mut m = path.p as i64;
    values.push(path.p);
    for &r in &path.r {
        m += path.q as i64 - 2 * r as i64;
        values.push(m.max(0) as usize);
    }
    Walk { values }
}

/// `r_k = (q − M_k + M_{k−1}) / 2`.
pub fn walk_to_path(walk: &Walk, q: usize) -> Result<ContractionPath> {
    walk.validate(q)?;
    let mut r = Vec::with_capacity(walk.values.len() - 1);
    for k in 1..walk.values.len() {
        let twice = q as i64 - walk.values[k] as i64 + walk.values[k - 1] as i64;
        if twice < 0 || twice % 2 != 0 {
            return Err(Error::InvalidWalk(format!("non-integral r_{k} = {twice}/2")));
        }
        r.push((twice / 2) as usize);
    }
    let path = ContractionPath {
        q,
        p: walk.values[0],
        l: walk.values.len(),
        r,
    };
    path.validate().map_err(|e| Error::InvalidWalk(e.to_string()))?;
    Ok(path)
}

fn check_params(q: usize, p: usize, l: usize) -> Result<()> {
    if q == 0 || p == 0 || l < 2 {
        return Err(Error::InvalidInput(format!("need q ≥ 1, p ≥ 1, l ≥ 2 (got q={q}, p={p}, l={l})")));
    }
    if q > MAX_Q {
        return Err(Error::capacity("kernel order q", q as u128, MAX_Q as u128));
    }
    if l > MAX_L {
        return Err(Error::capacity("walk length l", l as u128, MAX_L as u128));
    }
    Ok(())
}

/// Number of admissible walks of `A_{q,p,l}` (optionally strictly positive
/// before the last step), by dynamic programming over the current order.
pub fn count_paths(q: usize, p: usize, l: usize, positive: bool) -> Result<u128> {
    check_params(q, p, l)?;
    let steps = l - 1;
    let max_order = p + steps * q;
    let mut counts = vec![0u128; max_order + 1];
    counts[p] = 1;
    for k in 1..=steps {
        let mut next = vec![0u128; max_order + 1];
        for (m, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for r in 0..=q.min(m) {
                let nm = m + q - 2 * r;
                if positive && k < steps && nm == 0 {
                    continue;
                }
                if nm > (steps - k) * q {
                    continue;
                }
                next[nm] += c;
            }
        }
        counts = next;
    }
    Ok(counts[0])
}

/// Depth-first enumeration of `A_{q,p,l}` in lexicographic order of `r`.
fn enumerate(q: usize, p: usize, l: usize, positive: bool, cap: &Capacity) -> Result<Vec<ContractionPath>> {
    let total = count_paths(q, p, l, positive)?;
    if total > cap.max_paths as u128 {
        return Err(Error::capacity(
            format!("paths in A_{{{q},{p},{l}}}"),
            total,
            cap.max_paths as u128,
        ));
    }
    let steps = l - 1;
    let mut out = Vec::with_capacity(total as usize);
    let mut prefix = Vec::with_capacity(steps);
    fn dfs(
        q: usize,
        order: usize,
        steps: usize,
        positive: bool,
        prefix: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let k = prefix.len();
        if k == steps {
            visit(prefix);
            return;
        }
        for r in 0..=q.min(order) {
            let next = order + q - 2 * r;
            let remaining = steps - k - 1;
            if next > remaining * q || (positive && remaining > 0 && next == 0) {
                continue;
            }
            prefix.push(r);
            dfs(q, next, steps, positive, prefix, visit);
            prefix.pop();
        }
    }
    dfs(q, p, steps, positive, &mut prefix, &mut |r| {
        out.push(ContractionPath { q, p, l, r: r.to_vec() })
    });
    Ok(out)
}

/// All of `A_{q,p,l}`, lexicographically ordered.
///
/// Returns an empty set when `(l−1)q + p` is odd, since no tuple can then
/// reach order zero.
pub fn enumerate_paths(q: usize, p: usize, l: usize) -> Result<Vec<ContractionPath>> {
    enumerate_paths_with(q, p, l, &Capacity::default())
}

pub fn enumerate_paths_with(q: usize, p: usize, l: usize, cap: &Capacity) -> Result<Vec<ContractionPath>> {
    enumerate(q, p, l, false, cap)
}

/// The subset `A⁺_{q,p,l}` of walks with `M_k > 0` for all `k ≤ l − 2`.
pub fn enumerate_positive_paths(q: usize, p: usize, l: usize) -> Result<Vec<ContractionPath>> {
    enumerate_positive_paths_with(q, p, l, &Capacity::default())
}

pub fn enumerate_positive_paths_with(
    q: usize,
    p: usize,
    l: usize,
    cap: &Capacity,
) -> Result<Vec<ContractionPath>> {
    enumerate(q, p, l, true, cap)
}
