//! Free moment–cumulant conversion over non-crossing partitions.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{block_type_table, MAX_NC_SIZE};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub const MAX_ORDER: usize = MAX_NC_SIZE;

/// Moments `m_1, …, m_K` (with `m_0 = 1` implied).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentSequence {
    values: Vec<Rational>,
}

/// Free cumulants `κ_1, …, κ_K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CumulantSequence {
    values: Vec<Rational>,
}

macro_rules! sequence_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn new(values: Vec<Rational>) -> Result<Self> {
                if values.len() > MAX_ORDER {
                    return Err(Error::capacity("sequence order", values.len() as u128, MAX_ORDER as u128));
                }
                Ok($ty { values })
            }

            /// Highest stored order `K`.
            pub fn max_order(&self) -> usize {
                self.values.len()
            }

            /// Entry of order `k ≥ 1`; order 0 is not stored.
            pub fn get(&self, k: usize) -> Option<&Rational> {
                k.checked_sub(1).and_then(|i| self.values.get(i))
            }

            pub fn values(&self) -> &[Rational] {
                &self.values
            }
        }

        impl std::ops::Index<usize> for $ty {
            type Output = Rational;
            fn index(&self, k: usize) -> &Rational {
                self.get(k).unwrap_or_else(|| panic!("order {k} outside 1..={}", self.values.len()))
            }
        }
    };
}

sequence_impl!(MomentSequence);
sequence_impl!(CumulantSequence);

/// The three laws the toolkit knows cumulants for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// `S(0, t)`: only `κ_2 = t` is non-zero.
    Semicircular { t: Rational },
    Tetilla,
    /// Law of `x²` for `x ~ S(0, t)`: `κ_m = t^m`.
    FreePoissonSquare { t: Rational },
}

impl DistributionSpec {
    pub fn cumulants(&self, max_order: usize) -> Result<CumulantSequence> {
        let values = match self {
            DistributionSpec::Semicircular { t } => {
                check_positive(t)?;
                (1..=max_order)
                    .map(|m| if m == 2 { t.clone() } else { Rational::zero() })
                    .collect()
            }
            DistributionSpec::Tetilla => (1..=max_order).map(tetilla_cumulant).collect(),
            DistributionSpec::FreePoissonSquare { t } => {
                check_positive(t)?;
                (1..=max_order).map(|m| t.pow(m as u32)).collect()
            }
        };
        CumulantSequence::new(values)
    }

    pub fn moments(&self, max_order: usize) -> Result<MomentSequence> {
        moments_from_cumulants(&self.cumulants(max_order)?, max_order)
    }
}

fn check_positive(t: &Rational) -> Result<()> {
    if t.is_zero() || t.is_negative() {
        return Err(Error::InvalidInput(format!("parameter t = {t} must be positive")));
    }
    Ok(())
}

/// `m_k = Σ_{π ∈ NC(k)} Π_{b ∈ π} κ_{|b|}` for `k = 1..=max_order`.
pub fn moments_from_cumulants(c: &CumulantSequence, max_order: usize) -> Result<MomentSequence> {
    if max_order > MAX_ORDER {
        return Err(Error::capacity("moment order", max_order as u128, MAX_ORDER as u128));
    }
    if max_order > c.max_order() {
        return Err(Error::InvalidInput(format!(
            "need cumulants up to order {max_order}, have {}",
            c.max_order()
        )));
    }
    let mut values = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let table = block_type_table(k)?;
        let mut m = Rational::zero();
        for (sizes, &count) in table.iter() {
            let term: Rational = sizes.iter().map(|&s| c[s].clone()).product();
            if !term.is_zero() {
                m += &(term * Rational::from_integer(count as i64));
            }
        }
        values.push(m);
    }
    MomentSequence::new(values)
}

/// Inverts the moment–cumulant relation order by order. The one-block
/// partition contributes `κ_k` with coefficient 1 and every other partition
/// only involves lower cumulants, so the system is unitriangular.
pub fn cumulants_from_moments(m: &MomentSequence, max_order: usize) -> Result<CumulantSequence> {
    if max_order > MAX_ORDER {
        return Err(Error::capacity("cumulant order", max_order as u128, MAX_ORDER as u128));
    }
    if max_order > m.max_order() {
        return Err(Error::InvalidInput(format!(
            "need moments up to order {max_order}, have {}",
            m.max_order()
        )));
    }
    let mut kappa: Vec<Rational> = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let table = block_type_table(k)?;
        let mut rest = Rational::zero();
        for (sizes, &count) in table.iter() {
            if sizes.len() == 1 {
                continue;
            }
            let term: Rational = sizes.iter().map(|&s| kappa[s - 1].clone()).product();
            if !term.is_zero() {
                rest += &(term * Rational::from_integer(count as i64));
            }
        }
        kappa.push(&m[k] - &rest);
    }
    CumulantSequence::new(kappa)
}

/// `κ_m = 2^{1 − m/2}` for even `m`, zero for odd `m`.
pub fn tetilla_cumulant(m: usize) -> Rational {
    assert!(m >= 1, "cumulant order starts at 1");
    if m % 2 == 1 {
        return Rational::zero();
    }
    let half = m / 2;
    if half <= 1 {
        Rational::from_integer(2i64.pow((1 - half) as u32))
    } else {
        Rational::from_bigint(BigInt::one()) / Rational::from_bigint(BigInt::from(2u8).pow((half - 1) as u32))
    }
}

/// `m_{2n} = (1/(2ⁿ n)) Σ_{k=1}^{n} 2^k C(2n, k−1) C(n, k)`.
pub fn tetilla_moment_closed(n: usize) -> Rational {
    assert!(n >= 1, "moment index starts at 1");
    let two = BigInt::from(2u8);
    let mut sum = BigInt::zero();
    for k in 1..=n {
        let term = two.pow(k as u32)
            * num_integer::binomial(BigInt::from(2 * n), BigInt::from(k - 1))
            * num_integer::binomial(BigInt::from(n), BigInt::from(k));
        sum += term;
    }
    Rational::from_bigint(sum) / Rational::from_bigint(two.pow(n as u32) * BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        let m = DistributionSpec::Semicircular { t: r(1, 1) }.moments(6).unwrap();
        let expect = [0, 1, 0, 2, 0, 5];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(m[k + 1], r(*e, 1));
        }
    }

    #[test]
    fn free_poisson_square_moments() {
        let m = DistributionSpec::FreePoissonSquare { t: r(1, 1) }.moments(3).unwrap();
        assert_eq!(m.values(), &[r(1, 1), r(2, 1), r(5, 1)]);
    }

    #[test]
    fn tetilla_cumulants_give_known_moments() {
        let m = DistributionSpec::Tetilla.moments(6).unwrap();
        assert_eq!(m[2], r(1, 1));
        assert_eq!(m[4], r(5, 2));
        assert_eq!(m[6], r(33, 4));
        assert_eq!(m[3], Rational::zero());
    }

    #[test]
    fn cumulant_values() {
        assert_eq!(tetilla_cumulant(2), r(1, 1));
        assert_eq!(tetilla_cumulant(3), Rational::zero());
        assert_eq!(tetilla_cumulant(6), r(1, 4));
        assert_eq!(tetilla_cumulant(12), r(1, 32));
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(tetilla_moment_closed(1), r(1, 1));
        assert_eq!(tetilla_moment_closed(2), r(5, 2));
        assert_eq!(tetilla_moment_closed(3), r(33, 4));
    }

    #[test]
    fn inversion_examples() {
        let catalan = MomentSequence::new(
            [0, 1, 0, 2, 0, 5, 0, 14].iter().map(|&v| r(v, 1)).collect(),
        )
        .unwrap();
        let k = cumulants_from_moments(&catalan, 8).unwrap();
        for order in 1..=8 {
            let expect = if order == 2 { r(1, 1) } else { Rational::zero() };
            assert_eq!(k[order], expect);
        }
        let zero = MomentSequence::new(vec![Rational::zero(); 5]).unwrap();
        assert!(cumulants_from_moments(&zero, 5).unwrap().values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn order_limits() {
        let c = CumulantSequence::new(vec![Rational::zero(); 4]).unwrap();
        assert!(moments_from_cumulants(&c, 5).is_err());
        assert!(moments_from_cumulants(&c, 17).unwrap_err().is_capacity());
        assert!(CumulantSequence::new(vec![Rational::zero(); 17]).unwrap_err().is_capacity());
        assert!(DistributionSpec::Semicircular { t: r(-1, 1) }.cumulants(2).is_err());
    }
}
