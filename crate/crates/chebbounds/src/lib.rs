//! Certified explicit bounds for the Chebyshev functions.
//!
//! This crate computes constants `m_k`, `M_k` such that
//!
//! ```text
//! x (1 - m_k / (log x)^k)  <=  theta(x)  <=  x (1 + M_k / (log x)^k)
//! ```
//!
//! for all `x` beyond given thresholds, where `theta` is the Chebyshev prime
//! sum. The pipeline combines four families of range-specific envelopes
//! (large-range decay bounds, middle-range bounds driven by a table of
//! `|psi(x) - x| <= eps x` constants, small-range comparison bounds, and
//! direct sieve verification), and every published number is evaluated with
//! conservative directed arithmetic so it never understates the truth.

pub mod assemble;
pub mod config;
pub mod conservative;
pub mod envelopes;
pub mod error;
pub mod gap;
pub mod inputs;
pub mod psi_epsilon;
pub mod sieve;
pub mod tables;

pub use conservative::{eval_conservative, present, ConservativeReal, Direction, Expr};
pub use error::{Error, Result};
