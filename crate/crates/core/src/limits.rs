//! Resource guards shared by the algebra layer and the elimination engine.

use std::time::{Duration, Instant};

use crate::error::PolyError;
use crate::poly::Poly;

pub const DEFAULT_MAX_TERMS: usize = 5_000_000;
pub const DEFAULT_MAX_BITS: u64 = 1_000_000;
pub const DEFAULT_MAX_EXPONENT: u32 = 1 << 24;

/// Bounds that abort a computation with [`PolyError::Resource`] instead of
/// letting it run away. Nothing is ever truncated.
#[derive(Clone, Debug)]
pub struct Limits {
    pub max_terms: usize,
    pub max_bits: u64,
    pub max_exponent: u32,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_terms: DEFAULT_MAX_TERMS,
            max_bits: DEFAULT_MAX_BITS,
            max_exponent: DEFAULT_MAX_EXPONENT,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits { max_terms: usize::MAX, max_bits: u64::MAX, max_exponent: u32::MAX, deadline: None }
    }

    pub fn with_wall(mut self, budget: Option<Duration>) -> Self {
        self.deadline = budget.map(|d| Instant::now() + d);
        self
    }

    pub fn check_time(&self) -> Result<(), PolyError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(PolyError::Resource("wall budget exhausted".into())),
            _ => Ok(()),
        }
    }

    pub fn check_terms(&self, n: usize) -> Result<(), PolyError> {
        if n > self.max_terms {
            return Err(PolyError::Resource(format!("{n} terms exceeds limit {}", self.max_terms)));
        }
        Ok(())
    }

    pub fn check_poly(&self, p: &Poly) -> Result<(), PolyError> {
        self.check_terms(p.len())?;
        let bits = p.max_coeff_bits();
        if bits > self.max_bits {
            return Err(PolyError::Resource(format!(
                "coefficient of {bits} bits exceeds limit {}",
                self.max_bits
            )));
        }
        self.check_time()
    }
}
