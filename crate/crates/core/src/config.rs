//! Resource limits shared by all computations.

use crate::error::{invalid, Result};

/// Environment variable overriding [`Config::term_budget`].
pub const TERM_BUDGET_ENV: &str = "FROBSPLIT_TERM_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Maximum number of terms any intermediate polynomial may hold.
    pub term_budget: usize,
    /// Largest admissible value of `p^e` (and of any Frobenius power `q`).
    pub power_ceiling: u64,
    /// Root finding enumerates the whole field up to this size, then switches
    /// to equal-degree splitting.
    pub exhaustive_root_limit: u64,
    /// Largest field size over which smoothness is brute-forced.
    pub brute_force_limit: u64,
    /// Largest extension degree accepted for points of divisors.
    pub max_ext_degree: usize,
    /// Attempt budget for randomized equal-degree splitting.
    pub split_attempts: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            term_budget: 50_000_000,
            power_ceiling: i64::MAX as u64,
            exhaustive_root_limit: 1_000_000,
            brute_force_limit: 10_000,
            max_ext_degree: 2,
            split_attempts: 256,
        }
    }
}

impl Config {
    /// Defaults, with the term budget taken from `FROBSPLIT_TERM_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Config::default();
        if let Ok(raw) = std::env::var(TERM_BUDGET_ENV) {
            cfg.term_budget = raw
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{TERM_BUDGET_ENV}={raw:?} is not a term count")))?;
        }
        Ok(cfg)
    }

    /// `base^exp`, or a resource error if it exceeds the power ceiling.
    pub fn checked_power(&self, base: u64, exp: u64) -> Result<u64> {
        let mut acc: u64 = 1;
        for _ in 0..exp {
            acc = acc
                .checked_mul(base)
                .filter(|v| *v <= self.power_ceiling)
                .ok_or_else(|| {
                    crate::error::resource(format!(
                        "{base}^{exp} exceeds the power ceiling {}",
                        self.power_ceiling
                    ))
                })?;
        }
        Ok(acc)
    }
}
