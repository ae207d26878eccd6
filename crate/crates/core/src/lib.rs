//! Measure-based upper bounds for polynomial minimization.
//!
//! For `f` on the box `[-1, 1]^n` or the unit ball, [`hierarchy`] computes
//!
//! - `f^(r)`, the smallest expected value of `f` under a sum-of-squares
//!   density of degree `2r`, and
//! - `f_pfm^(r)`, the same with densities of the form `s(f(x))` for a
//!   univariate sum of squares `s`, which needs only the moments `E[f^k]`.
//!
//! Moments are exact rationals ([`measures`]). Eigenproblems run in MPFR
//! floating point ([`linalg`]), and [`orthopoly`] supplies the
//! orthogonal-polynomial oracles. [`needle`] builds Chebyshev needles and the
//! resulting certificates. [`geoassume`] estimates local volume growth, and
//! [`experiments`] holds the test functions and MAXCUT machinery.
//!
//! ```
//! use measbound::experiments::test_function;
//! use measbound::hierarchy::{upper_bound_full, upper_bound_pfm, Method};
//! use measbound::linalg::Precision;
//! use measbound::measures::Domain;
//!
//! let tf = test_function("matyas")?;
//! let dom = Domain::unit_box(2);
//! let p = Precision::DEFAULT;
//! let full = upper_bound_full(&tf.poly, &dom, 4, p)?;
//! let pfm = upper_bound_pfm(&tf.poly, &dom, 2, Method::PfmHankel, p)?;
//! assert!(full.value <= pfm.value);
//! # Ok::<(), measbound::Error>(())
//! ```

pub mod error;
pub mod experiments;
pub mod geoassume;
pub mod hierarchy;
pub mod linalg;
pub mod measures;
pub mod needle;
pub mod orthopoly;
pub mod polyring;
pub mod quadrature;

pub use error::{Error, Result};

// Book chapters are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/moments.md")]
    mod moments {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/orthopoly.md")]
    mod orthopoly {}
    #[doc = include_str!("../../../book/src/needle.md")]
    mod needle {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
