//! Relative α-entropy divergences and projections on finite alphabets.
//!
//! The relative α-entropy `I_α(P, Q)` is a one-parameter divergence family
//! that tends to the Kullback-Leibler divergence as `α → 1`. This crate
//! solves the two projection problems attached to it:
//!
//! * **Forward projection** — minimise `I_α(P, R)` over `P` in a linear
//!   family `L = {P : Σ_x P(x) f_i(x) = 0}`. The minimiser has a power-law
//!   form with `k` dual parameters, so the solver works in the dual
//!   ([`forward::forward_project`]).
//! * **Reverse projection** — minimise `I_α(P̂, P_θ)` over an α-power-law
//!   family. For `α = c + 1 > 1` this is maximum mean-power-likelihood
//!   estimation (robust MMPLE); for `α < 1` it arises in mismatched-source
//!   compression. Solved by transforming to a forward projection on an
//!   orthogonal linear family ([`reverse::reverse_project`]).
//!
//! Every solver path is validated against brute-force oracles
//! ([`oracle::grid_forward_oracle`], [`oracle::grid_reverse_oracle`],
//! [`oracle::highprec_divergence`]) at desk scale.
//!
//! # Example
//!
//! ```
//! use ialpha::measures::{AlphaParam, ProbMeasure};
//! use ialpha::families::LinearFamily;
//! use ialpha::forward::{forward_project, SolverOptions};
//!
//! // Minimise I_2(P, uniform) subject to 8p1 + 4p2 + 2p3 + p4 = 7.
//! let r = ProbMeasure::uniform(4);
//! let alpha = AlphaParam::new(2.0).unwrap();
//! let l = LinearFamily::new(vec![vec![1.0, -3.0, -5.0, -6.0]], r.alphabet()).unwrap();
//! let res = forward_project(&l, &r, alpha, &SolverOptions::default()).unwrap();
//! assert!((res.q.weights()[0] - 0.75).abs() < 1e-9);
//! ```

pub mod divergence;
mod error;
pub mod families;
pub mod forward;
mod linalg;
mod linprog;
pub mod measures;
pub mod oracle;
pub mod reverse;

pub use error::{AlphaError, Result};
pub use measures::{Alphabet, AlphaParam, ProbMeasure};
