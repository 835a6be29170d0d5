//! Size caps for the exact code paths.
//!
//! Defaults can be overridden once per process through environment
//! variables; overrides are clamped to hard maxima.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest dimension of a [`Config`](crate::Config) bit word.
pub const CONFIG_MAX_N: usize = 64;
/// Largest dimension for a materialized event bitmap.
pub const EVENT_MAX_N: usize = 24;
/// Hard ceiling for the `BK_DENSE_MAX_N` override.
pub const DENSE_HARD_MAX_N: usize = 24;
/// Hard ceiling for the `BK_MONOTONE_MAX_N` override (n = 6 has 7.8M events).
pub const MONOTONE_HARD_MAX_N: usize = 5;
/// Hard ceiling for the `BK_GENERAL_MAX_N` override (single-word bitmaps).
pub const GENERAL_HARD_MAX_N: usize = 6;

pub const DENSE_MAX_N_VAR: &str = "BK_DENSE_MAX_N";
pub const MONOTONE_MAX_N_VAR: &str = "BK_MONOTONE_MAX_N";
pub const GENERAL_MAX_N_VAR: &str = "BK_GENERAL_MAX_N";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub dense_max_n: usize,
    pub monotone_max_n: usize,
    pub general_max_n: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { dense_max_n: 20, monotone_max_n: 5, general_max_n: 5 }
    }
}

impl Limits {
    pub fn from_env() -> Self {
        let d = Limits::default();
        Limits {
            dense_max_n: read_var(DENSE_MAX_N_VAR, d.dense_max_n, DENSE_HARD_MAX_N),
            monotone_max_n: read_var(MONOTONE_MAX_N_VAR, d.monotone_max_n, MONOTONE_HARD_MAX_N),
            general_max_n: read_var(GENERAL_MAX_N_VAR, d.general_max_n, GENERAL_HARD_MAX_N),
        }
    }
}

fn read_var(name: &str, default: usize, hard: usize) -> usize {
    std::env::var(name)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(hard))
        .unwrap_or(default)
}

/// Process-wide limits, read from the environment on first use.
pub fn limits() -> Limits {
    static LIMITS: OnceLock<Limits> = OnceLock::new();
    *LIMITS.get_or_init(Limits::from_env)
}

pub(crate) fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded { what, n, cap })
    } else {
        Ok(())
    }
}
