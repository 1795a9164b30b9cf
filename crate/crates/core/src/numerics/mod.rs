//! Arbitrary precision arithmetic and polynomial containers.

mod complex;
mod poly;
mod real;

pub use complex::BigComplex;
pub use poly::{poly_from_roots, round_to_int_poly, ComplexPoly, IntPoly};
pub use real::Real;

use crate::error::{Error, Result};

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_BITS: u32 = 64;

/// Default cap for the precision doubling loop.
pub const DEFAULT_MAX_BITS: u32 = 1 << 20;

/// Default distance-to-integer tolerance for certified rounding.
pub const DEFAULT_ROUNDING_TOL: f64 = 0.25;

/// Binary working precision shared by a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionCtx {
    bits: u32,
}

impl PrecisionCtx {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::InvalidInput(format!("precision {bits} below the minimum of {MIN_BITS} bits")));
        }
        Ok(PrecisionCtx { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn doubled(&self) -> PrecisionCtx {
        PrecisionCtx { bits: self.bits.saturating_mul(2) }
    }

    pub fn real(&self, v: i64) -> Real {
        Real::from_int(v, self.bits)
    }

    pub fn complex(&self, re: i64, im: i64) -> BigComplex {
        BigComplex::new(self.real(re), self.real(im))
    }
}

/// Precision doubling policy for computations that certify by rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub start_bits: Option<u32>,
    pub max_bits: u32,
    pub tol: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { start_bits: None, max_bits: DEFAULT_MAX_BITS, tol: DEFAULT_ROUNDING_TOL }
    }
}

impl RetryPolicy {
    pub fn starting_at(bits: u32) -> Self {
        RetryPolicy { start_bits: Some(bits), ..Default::default() }
    }

    /// Run `attempt` at increasing precision until it stops reporting
    /// `RoundingUncertified`. Returns the value and the precision that succeeded.
    pub fn run<T>(
        &self,
        default_start: u32,
        mut attempt: impl FnMut(PrecisionCtx) -> Result<T>,
    ) -> Result<(T, u32)> {
        let mut bits = self.start_bits.unwrap_or(default_start).max(MIN_BITS);
        loop {
            if bits > self.max_bits {
                return Err(Error::PrecisionExhausted { bits, cap: self.max_bits });
            }
            match attempt(PrecisionCtx::new(bits)?) {
                Ok(v) => return Ok((v, bits)),
                Err(Error::RoundingUncertified { .. }) => bits = bits.saturating_mul(2),
                Err(e) => return Err(e),
            }
        }
    }
}
