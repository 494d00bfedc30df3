//! Elementary-operation budgets for the enumeration routines.

use crate::{Error, Result};

/// Environment variable that overrides the default budget.
pub const BUDGET_ENV: &str = "HYPERELL_BUDGET";

/// Default budget: 10^9 elementary operations (symbol evaluations, polynomial visits).
pub const DEFAULT_BUDGET: f64 = 1e9;

/// Upper bound on the number of elementary operations an enumeration may perform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget(f64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn new(ops: f64) -> Self {
        Budget(ops)
    }

    pub fn unlimited() -> Self {
        Budget(f64::INFINITY)
    }

    /// Reads `HYPERELL_BUDGET`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|b| *b > 0.0)
                .map(Budget)
                .ok_or_else(|| Error::Domain(format!("{BUDGET_ENV}={v} is not a positive number"))),
            Err(_) => Ok(Budget::default()),
        }
    }

    pub fn ops(self) -> f64 {
        self.0
    }

    /// Fails with [`Error::BudgetExceeded`] when `needed` is above the budget.
    pub fn check(self, what: &str, needed: f64) -> Result<()> {
        if needed > self.0 {
            Err(Error::BudgetExceeded { what: what.to_string(), needed, budget: self.0 })
        } else {
            Ok(())
        }
    }
}
