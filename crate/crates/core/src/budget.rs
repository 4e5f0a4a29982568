use crate::error::{Error, Result};

/// Caps on the brute-force oracle paths.
///
/// `op_cap` bounds the number of grid points `N^(k+1)` an exhaustive
/// multi-fold average may visit; `materialize_cap` bounds the number of
/// tuples an explicit cube-measure support may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub op_cap: u64,
    pub materialize_cap: u64,
}

pub const DEFAULT_OP_CAP: u64 = 1_000_000_000;
pub const DEFAULT_MATERIALIZE_CAP: u64 = 1_000_000;

impl Default for Budget {
    fn default() -> Self {
        Budget {
            op_cap: DEFAULT_OP_CAP,
            materialize_cap: DEFAULT_MATERIALIZE_CAP,
        }
    }
}

impl Budget {
    pub fn with_op_cap(op_cap: u64) -> Self {
        Budget {
            op_cap,
            ..Budget::default()
        }
    }

    /// Checks `base^exp` against the operation cap.
    pub fn check_grid(&self, base: usize, exp: u32) -> Result<()> {
        let required = (base as u128)
            .checked_pow(exp)
            .unwrap_or(u128::MAX);
        if required > self.op_cap as u128 {
            return Err(Error::BudgetExceeded {
                required,
                cap: self.op_cap,
            });
        }
        Ok(())
    }

    /// Checks a projected explicit-support size against the materialization cap.
    pub fn check_support(&self, atoms: u128) -> Result<()> {
        if atoms > self.materialize_cap as u128 {
            return Err(Error::BudgetExceeded {
                required: atoms,
                cap: self.materialize_cap,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_check_respects_cap() {
        let b = Budget::with_op_cap(1000);
        assert!(b.check_grid(10, 3).is_ok());
        assert!(b.check_grid(10, 4).is_err());
        assert!(b.check_grid(2, 127).is_err());
    }

    #[test]
    fn budget_errors_flagged() {
        let b = Budget::with_op_cap(1);
        let err = b.check_grid(2, 1).unwrap_err();
        assert!(err.is_budget());
    }
}
