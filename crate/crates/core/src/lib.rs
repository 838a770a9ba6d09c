//! Gap probabilities of the Bessel point process on unions of intervals.
//!
//! The crate computes `log F(r x)`, the log-probability of seeing no points
//! of the Bessel process on `(0, r x_1) u (r x_2, r x_3) u ...`, two ways:
//!
//! * directly, as a Fredholm determinant of the Bessel kernel discretized by
//!   spectrally accurate quadrature ([`fredholm`]);
//! * through large-`r` asymptotics built from period integrals of the
//!   underlying genus-`g` hyperelliptic surface, Riemann theta functions and
//!   a linear flow on the `g`-torus ([`surface`], [`theta`], [`abel`],
//!   [`flow`], [`asym`]).
//!
//! The two routes are tied together by exact internal identities (period
//! relations, a characteristic-polynomial identity, theta-function laws)
//! which double as the self-test surface of the crate.

pub mod abel;
pub mod asym;
pub mod bessel;
pub mod check;
pub mod config;
pub mod dd;
pub mod flow;
pub mod fredholm;
pub mod quad;
pub mod real;
pub mod surface;
pub mod theta;

pub use config::{validate, ConfigError, Configuration};
pub use surface::SurfaceData;
