//! Step-function kernels on a uniform grid and their contractions.
//!
//! A kernel of order `q` on `n` cells of width `w` stores `n^q` coefficients
//! in row-major order (axis 1 slowest) and a rational `scale_sq`; the
//! function value on a cell is `coeff · √scale_sq`. Carrying the square of
//! the global scale keeps kernels such as `(1/√2)(…)` exact: any quantity
//! of even degree in the kernels resolves to a rational.

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scalar::Scalar;

pub const MAX_CELLS: usize = 32;

/// Work size above which a contraction splits its rows across threads.
const PARALLEL_WORK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_width: Rational,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(cell_width: Rational, cells: usize) -> Result<Self> {
        if cell_width.is_zero() || cell_width.is_negative() {
            return Err(Error::InvalidInput(format!("cell width {cell_width} must be positive")));
        }
        if cells == 0 || cells > MAX_CELLS {
            return Err(Error::InvalidInput(format!("cells = {cells} outside 1..={MAX_CELLS}")));
        }
        Ok(GridSpec { cell_width, cells })
    }

    /// `n` cells of width 1.
    pub fn unit(cells: usize) -> Result<Self> {
        Self::new(Rational::one(), cells)
    }

    fn describe(&self) -> String {
        format!("{} cells of width {}", self.cells, self.cell_width)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<S> {
    order: usize,
    grid: GridSpec,
    scale_sq: Rational,
    coeffs: Vec<S>,
}

fn pow_usize(base: usize, exp: usize) -> usize {
    base.checked_pow(exp as u32).expect("kernel size overflows usize")
}

/// Reverses the base-`n` digits of `k` over `digits` positions.
fn reverse_digits(mut k: usize, n: usize, digits: usize) -> usize {
    let mut out = 0;
    for _ in 0..digits {
        out = out * n + k % n;
        k /= n;
    }
    out
}

impl<S: Scalar> Kernel<S> {
    pub fn new(order: usize, grid: GridSpec, scale_sq: Rational, coeffs: Vec<S>) -> Result<Self> {
        let expected = (grid.cells as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
        if coeffs.len() as u128 != expected {
            return Err(Error::ShapeMismatch(format!(
                "order {order} on {} cells needs {expected} coefficients, got {}",
                grid.cells,
                coeffs.len()
            )));
        }
        if scale_sq.is_zero() || scale_sq.is_negative() {
            return Err(Error::InvalidInput(format!("scale_sq = {scale_sq} must be positive")));
        }
        Ok(Kernel { order, grid, scale_sq, coeffs })
    }

    /// Order-0 kernel holding a plain scalar.
    pub fn scalar(value: S, grid: GridSpec) -> Self {
        Kernel {
            order: 0,
            grid,
            scale_sq: Rational::one(),
            coeffs: vec![value],
        }
    }

    pub fn zeros(order: usize, grid: GridSpec) -> Self {
        let len = pow_usize(grid.cells, order);
        Kernel {
            order,
            grid,
            scale_sq: Rational::one(),
            coeffs: vec![S::zero(); len],
        }
    }

    /// Builds coefficients from a function of the multi-index.
    pub fn from_fn<F: FnMut(&[usize]) -> S>(order: usize, grid: GridSpec, scale_sq: Rational, mut f: F) -> Result<Self> {
        let n = grid.cells;
        let len = pow_usize(n, order);
        let mut idx = vec![0usize; order];
        let mut coeffs = Vec::with_capacity(len);
        for flat in 0..len {
            let mut rest = flat;
            for axis in (0..order).rev() {
                idx[axis] = rest % n;
                rest /= n;
            }
            coeffs.push(f(&idx));
        }
        Self::new(order, grid, scale_sq, coeffs)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scale_sq(&self) -> &Rational {
        &self.scale_sq
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.order, "index rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.grid.cells, "index out of range");
            acc * self.grid.cells + i
        })
    }

    pub fn coeff(&self, idx: &[usize]) -> &S {
        &self.coeffs[self.flat_index(idx)]
    }

    /// Function value on the cell `idx`, as a float.
    pub fn value_f64(&self, idx: &[usize]) -> f64 {
        self.coeff(idx).to_f64() * self.scale_sq.to_f64().sqrt()
    }

    /// Resolves an order-0 kernel to its scalar value.
    pub fn to_scalar(&self) -> Result<S> {
        if self.order != 0 {
            return Err(Error::ShapeMismatch(format!("order-{} kernel is not a scalar", self.order)));
        }
        S::resolve(&self.coeffs[0], &self.scale_sq)
    }

    /// Converts an exact kernel to another backend.
    pub fn to_backend<T: Scalar>(&self) -> Kernel<T>
    where
        S: Into<Rational> + Clone,
    {
        Kernel {
            order: self.order,
            grid: self.grid.clone(),
            scale_sq: self.scale_sq.clone(),
            coeffs: self.coeffs.iter().map(|c| T::from_rational(&c.clone().into())).collect(),
        }
    }

    /// `f*(t_1, …, t_q) = f(t_q, …, t_1)`.
    pub fn adjoint(&self) -> Self {
        let n = self.grid.cells;
        let coeffs = (0..self.coeffs.len())
            .map(|flat| self.coeffs[reverse_digits(flat, n, self.order)].clone())
            .collect();
        Kernel {
            order: self.order,
            grid: self.grid.clone(),
            scale_sq: self.scale_sq.clone(),
            coeffs,
        }
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.grid.cells;
        (0..self.coeffs.len()).all(|flat| self.coeffs[flat] == self.coeffs[reverse_digits(flat, n, self.order)])
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.describe(),
                right: other.grid.describe(),
            });
        }
        Ok(())
    }

    /// The `r`-th contraction `self ⌢_r g` under the default capacity.
    pub fn contract(&self, g: &Self, r: usize) -> Result<Self> {
        self.contract_with(g, r, &Capacity::default())
    }

    /// `(f ⌢_r g)(s, t) = ∫ f(s, x_1..x_r) g(x_r..x_1, t) dx`: the last `r`
    /// axes of `f` meet the first `r` axes of `g` in reversed order.
    ///
    /// Realized as one dense product of `f` viewed as `n^{p−r} × n^r` with
    /// `g` viewed as `n^r × n^{q−r}` (rows permuted to reverse the contracted
    /// axes), scaled by `w^r`.
    pub fn contract_with(&self, g: &Self, r: usize, cap: &Capacity) -> Result<Self> {
        self.check_grid(g)?;
        let (p, q) = (self.order, g.order);
        if r > p.min(q) {
            return Err(Error::InvalidInput(format!("contraction index {r} exceeds min({p}, {q})")));
        }
        let n = self.grid.cells;
        let out_order = p + q - 2 * r;
        cap.check_scalars(n, out_order)?;
        let rows = pow_usize(n, p - r);
        let inner = pow_usize(n, r);
        let cols = pow_usize(n, q - r);
        let perm: Vec<usize> = (0..inner).map(|k| reverse_digits(k, n, r)).collect();
        let width = self.grid.cell_width.pow(r as u32);
        let factor = (!width.is_one()).then(|| S::from_rational(&width));

        let mut out = vec![S::zero(); rows * cols];
        let fill_row = |i: usize, row: &mut [S]| {
            let frow = &self.coeffs[i * inner..(i + 1) * inner];
            for (k, a) in frow.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let brow = &g.coeffs[perm[k] * cols..(perm[k] + 1) * cols];
                for (acc, b) in row.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        acc.mul_add_assign(a, b);
                    }
                }
            }
            if let Some(fac) = &factor {
                for x in row.iter_mut() {
                    if !x.is_zero() {
                        *x = x.mul_ref(fac);
                    }
                }
            }
        };
        if cols > 0 && rows * cols * inner >= PARALLEL_WORK {
            out.par_chunks_mut(cols).enumerate().for_each(|(i, row)| fill_row(i, row));
        } else if cols > 0 {
            out.chunks_mut(cols).enumerate().for_each(|(i, row)| fill_row(i, row));
        }
        Ok(Kernel {
            order: out_order,
            grid: self.grid.clone(),
            scale_sq: &self.scale_sq * &g.scale_sq,
            coeffs: out,
        })
    }

    /// `f ⊗ g`, i.e. the 0-th contraction.
    pub fn tensor(&self, g: &Self) -> Result<Self> {
        self.contract(g, 0)
    }

    fn raw_dot(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            if !a.is_zero() && !b.is_zero() {
                acc.mul_add_assign(a, b);
            }
        }
        acc
    }

    fn volume(&self) -> S {
        S::from_rational(&self.grid.cell_width.pow(self.order as u32))
    }

    /// Real bilinear `⟨f, g⟩ = ∫ f g`.
    pub fn inner_product(&self, other: &Self) -> Result<S> {
        self.check_grid(other)?;
        if self.order != other.order {
            return Err(Error::ShapeMismatch(format!(
                "inner product of orders {} and {}",
                self.order, other.order
            )));
        }
        let dot = self.raw_dot(other) * self.volume();
        S::resolve(&dot, &(&self.scale_sq * &other.scale_sq))
    }

    /// `‖f‖²`, always exact in the rational backend.
    pub fn norm_sq(&self) -> S {
        let dot = self.raw_dot(self) * self.volume();
        if dot.is_zero() {
            return dot;
        }
        dot.mul_ref(&S::from_rational(&self.scale_sq))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().to_f64().max(0.0).sqrt()
    }

    /// Multiplies every value by the rational `c`.
    pub fn scaled(&self, c: &Rational) -> Self {
        let c = S::from_rational(c);
        Kernel {
            order: self.order,
            grid: self.grid.clone(),
            scale_sq: self.scale_sq.clone(),
            coeffs: self.coeffs.iter().map(|x| x.mul_ref(&c)).collect(),
        }
    }

    /// Coefficients of `other` re-expressed against `self.scale_sq`.
    fn coeffs_in_scale_of(&self, other: &Self) -> Result<Vec<S>> {
        if self.scale_sq == other.scale_sq || other.is_zero() {
            return Ok(other.coeffs.clone());
        }
        let ratio = &other.scale_sq / &self.scale_sq;
        let factor = S::one()
            .mul_sqrt(&ratio)
            .ok_or_else(|| Error::NotExact(format!("scale ratio √({ratio}) is irrational")))?;
        Ok(other.coeffs.iter().map(|x| x.mul_ref(&factor)).collect())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.check_grid(other)?;
        if self.order != other.order {
            return Err(Error::ShapeMismatch(format!(
                "cannot combine orders {} and {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// `self + other`; in the rational backend the two scales must differ by
    /// a rational square.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        let rhs = self.coeffs_in_scale_of(other)?;
        let coeffs = self.coeffs.iter().zip(rhs).map(|(a, b)| a.clone() + b).collect();
        Ok(Kernel {
            order: self.order,
            grid: self.grid.clone(),
            scale_sq: self.scale_sq.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(&-Rational::one()))
    }

    /// Sum of same-shape kernels; an empty list gives `None`.
    pub fn sum<'a, I: IntoIterator<Item = &'a Self>>(kernels: I) -> Result<Option<Self>> {
        let mut acc: Option<Self> = None;
        for k in kernels {
            acc = Some(match acc {
                None => k.clone(),
                Some(a) => a.add(k)?,
            });
        }
        Ok(acc)
    }

    /// `‖self − other‖²`.
    pub fn distance_sq(&self, other: &Self) -> Result<S> {
        Ok(self.sub(other)?.norm_sq())
    }

    /// Rescales to unit norm, exactly in the rational backend.
    pub fn normalized(&self) -> Result<Self> {
        let raw = self.raw_dot(self) * self.volume();
        let (mult, scale_sq) = S::normalizer(&raw)?;
        let coeffs = match mult {
            Some(m) => self.coeffs.iter().map(|x| x.mul_ref(&m)).collect(),
            None => self.coeffs.clone(),
        };
        Ok(Kernel {
            order: self.order,
            grid: self.grid.clone(),
            scale_sq,
            coeffs,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "grid": {
                "cell_width": self.grid.cell_width.to_string(),
                "cells": self.grid.cells,
            },
            "scale_sq": self.scale_sq.to_string(),
            "coefficients": self.coeffs.iter().map(S::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |name: &str| value.get(name).ok_or_else(|| Error::Parse(format!("kernel JSON lacks {name:?}")));
        let order = field("order")?
            .as_u64()
            .ok_or_else(|| Error::Parse("order must be a non-negative integer".into()))? as usize;
        let grid = field("grid")?;
        let cell_width: Rational = grid
            .get("cell_width")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("grid.cell_width must be a \"p/q\" string".into()))?
            .parse()?;
        let cells = grid
            .get("cells")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("grid.cells must be an integer".into()))? as usize;
        let scale_sq: Rational = field("scale_sq")?
            .as_str()
            .ok_or_else(|| Error::Parse("scale_sq must be a \"p/q\" string".into()))?
            .parse()?;
        let coeffs = field("coefficients")?
            .as_array()
            .ok_or_else(|| Error::Parse("coefficients must be an array".into()))?
            .iter()
            .map(S::from_json)
            .collect::<Result<Vec<S>>>()?;
        Kernel::new(order, GridSpec::new(cell_width, cells)?, scale_sq, coeffs)
    }
}

/// `f = (1/√2)(1_{[0,1]} ⊗ 1_{[1,2]} + 1_{[1,2]} ⊗ 1_{[0,1]})` on two unit cells.
pub fn reference_tetilla_kernel<S: Scalar>() -> Kernel<S> {
    let grid = GridSpec::unit(2).expect("static grid");
    let coeffs = vec![S::zero(), S::one(), S::one(), S::zero()];
    Kernel::new(2, grid, Rational::new(1, 2), coeffs).expect("static kernel")
}

/// Seeded kernel with independent uniform coefficients (not symmetrized).
pub fn random_kernel<S: Scalar>(q: usize, grid: &GridSpec, seed: u64) -> Result<Kernel<S>> {
    Capacity::default().check_scalars(grid.cells, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = pow_usize(grid.cells, q);
    let coeffs = (0..len).map(|_| S::sample(&mut rng)).collect();
    Kernel::new(q, grid.clone(), Rational::one(), coeffs)
}

/// `(g + g*)/‖g + g*‖` for a seeded uniform `g`: mirror-symmetric, unit norm.
pub fn random_mirror_symmetric_kernel<S: Scalar>(q: usize, grid: &GridSpec, seed: u64) -> Result<Kernel<S>> {
    if q == 0 {
        return Err(Error::InvalidInput("random kernels need order ≥ 1".into()));
    }
    Capacity::default().check_scalars(grid.cells, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = pow_usize(grid.cells, q);
    loop {
        let coeffs: Vec<S> = (0..len).map(|_| S::sample(&mut rng)).collect();
        let g = Kernel::new(q, grid.clone(), Rational::one(), coeffs)?;
        let sym = g.add(&g.adjoint())?;
        if sym.is_zero() {
            continue;
        }
        return sym.normalized();
    }
}
