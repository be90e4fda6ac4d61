use crate::error::{Error, Result};

/// Memory and enumeration budget shared by the walk and kernel engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capacity {
    /// Maximum number of contraction paths enumerated in one call.
    pub max_paths: usize,
    /// Maximum number of coefficients in any single kernel.
    pub max_scalars: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity {
            max_paths: 1_000_000,
            max_scalars: 1 << 24,
        }
    }
}

impl Capacity {
    pub const ENV_VAR: &'static str = "TETILLA_CAPACITY";

    /// Parses `PATHS` or `PATHS:SCALARS`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad capacity {spec:?}, expected PATHS or PATHS:SCALARS"));
        let mut cap = Capacity::default();
        match spec.split_once(':') {
            Some((paths, scalars)) => {
                cap.max_paths = paths.trim().parse().map_err(|_| bad())?;
                cap.max_scalars = scalars.trim().parse().map_err(|_| bad())?;
            }
            None => cap.max_paths = spec.trim().parse().map_err(|_| bad())?,
        }
        Ok(cap)
    }

    /// Default budget, overridden by `TETILLA_CAPACITY` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(Self::ENV_VAR) {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn check_scalars(&self, cells: usize, order: usize) -> Result<()> {
        let count = (cells as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
        if count > self.max_scalars as u128 {
            return Err(Error::capacity(
                format!("kernel of order {order} on {cells} cells"),
                count,
                self.max_scalars as u128,
            ));
        }
        Ok(())
    }
}
