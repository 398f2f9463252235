//! Multiplicative congruential generator modulo 1,000,000.
//!
//! `r_{k+1} = θ·r_k mod 10⁶`, with `θ` odd and both `θ` and the seed coprime
//! to 5. Because `θ` is a unit modulo 10⁶ and the seed is not divisible by 5,
//! no state is ever 0 or divisible by 5, so every state is again a valid seed.

use crate::error::{Error, Result};

pub const MODULUS: u64 = 1_000_000;
pub const DEFAULT_MULTIPLIER: u64 = 314_227;

/// Generator state. A plain value: advancing returns a new state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LcgState {
    r: u64,
    theta: u64,
}

impl LcgState {
    /// Seed with the default multiplier 314,227.
    pub fn new(r: u64) -> Result<Self> {
        Self::with_multiplier(r, DEFAULT_MULTIPLIER)
    }

    pub fn with_multiplier(r: u64, theta: u64) -> Result<Self> {
        let err = |reason| Err(Error::InvalidSeed { r, theta, reason });
        if !(1..MODULUS).contains(&r) {
            return err("seed must lie in [1, 999999]");
        }
        if r.is_multiple_of(5) {
            return err("seed must not be divisible by 5");
        }
        if theta.is_multiple_of(2) || theta.is_multiple_of(5) {
            return err("multiplier must be odd and not divisible by 5");
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    /// Successor state. The product `θ·r` is formed in 128-bit arithmetic so
    /// any 64-bit multiplier is exact.
    #[must_use]
    pub fn next(self) -> Self {
        let r = ((self.theta as u128 * self.r as u128) % MODULUS as u128) as u64;
        Self { r, ..self }
    }

    /// Maps the current state to `a + (b - a)·r/10⁶` and advances.
    pub fn uniform(self, a: f64, b: f64) -> Result<(f64, Self)> {
        if !(a < b) {
            return Err(Error::InvalidRange { a, b });
        }
        Ok((self.map(a, b), self.next()))
    }

    #[inline]
    fn map(&self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.r as f64 / MODULUS as f64
    }
}

/// Mutable cursor over an LCG stream, for call sites that draw many values.
#[derive(Debug, Clone)]
pub struct LcgStream {
    state: LcgState,
}

impl LcgStream {
    pub fn new(state: LcgState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> LcgState {
        self.state
    }

    /// Next draw in `(a, b)`. Callers guarantee `a < b`.
    pub fn draw(&mut self, a: f64, b: f64) -> f64 {
        debug_assert!(a < b);
        let x = self.state.map(a, b);
        self.state = self.state.next();
        x
    }
}
