//! Numerical core for experiments on high moments of zeta sums
//! `S(x, t) = Σ_{n ≤ x} n^{-it}`.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Everything that
//! can run in parallel takes an [`Executor`]; the serial executor lives here
//! and a thread-pool executor lives in the `zetalab` companion crate. Work is
//! always split into fixed chunks and reduced in a fixed pairwise order, so
//! results do not depend on how many workers ran the chunks.
//!
//! Modules:
//! - [`primes`]: sieve, smallest-prime-factor table, half-open prime ranges.
//! - [`dirichlet`]: the zeta sum and the shifted prime block polynomials,
//!   both pointwise and on uniform grids by phase rotation.
//! - [`steinhaus`]: Steinhaus random multiplicative functions, the
//!   multiplicative-energy oracle, Monte Carlo moments, the factorized
//!   exponential expectation and the Taylor tail identity.
//! - [`proxy`]: the scale subdivision, truncation schedule, truncated
//!   exponentials, the weight `R(t)`, dyadic bands and majorants.
//! - [`moments`]: quadrature of the moment integrals, the tuple oracle,
//!   Hölder extraction and the probes.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dd;
pub mod dirichlet;
pub mod error;
pub mod exec;
pub mod math;
pub mod moments;
pub mod primes;
pub mod proxy;
pub mod steinhaus;
pub mod sum;

pub use dirichlet::{GlobalParams, GridSpec};
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use math::C64;
pub use moments::{Method, MomentEstimate};
pub use primes::PrimeTable;
pub use proxy::{BandAssignment, ProxyConfig, Subdivision};
pub use steinhaus::{EnergyCount, RmfSample};
