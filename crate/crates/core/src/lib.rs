//! Calculus of variations with self-composition.
//!
//! Lagrangians of the form `L(x, q(x), q'(x), z(x))` with `z = q∘q`, and
//! numerical verification of the identities such problems satisfy along
//! their extremals: the compositional Euler-Lagrange equation, the
//! generalized DuBois-Reymond condition, the invariance condition and the
//! Noether conserved quantity with its gauge term. The crate also carries
//! the Frobenius-Perron machinery for invariant densities of
//! piecewise-monotone interval maps.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classic;
pub mod expr;
mod fd;
pub mod fp;
mod math;
pub mod noether;
mod pieces;
pub mod pwmap;
pub mod quad;
pub mod varcalc;

pub use expr::{EvalError, Expr, Lagrangian};
