//! Numerical engine for vector-bundle geometric quantization with SU(2)
//! coadjoint-orbit fibers.
//!
//! The fiber `F` is the sphere of spin weight `j` (a coadjoint orbit of SU(2)),
//! quantized with its Kähler polarization into the `2j + 1` dimensional space
//! `Q(F)`. Over a base carrying a Yang–Mills potential, the orbit function of
//! the potential is prequantized fiberwise, producing a `u(n)`-valued
//! connection whose parallel transport drives covariant-constant sections.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is a pure function
//! of its inputs.
//!
//! Module map:
//!
//! - [`numerics`]: quadrature, RK4, matrix exponential, finite differences,
//!   dense complex matrices.
//! - [`orbit`]: classical geometry of the fiber sphere in stereographic charts.
//! - [`fiberq`]: the quantum fiber, prequantization operators, quantized
//!   transitions.
//! - [`gauge`]: base models, orbit functions, horizontal lifts and the
//!   connection by quadrature and by representation.
//! - [`transport`]: path-ordered transport, Wilson loops, covariant sections.
#![no_std]
// `!(x <= tol)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conventions;
pub mod error;
pub mod fiberq;
pub mod gauge;
pub mod numerics;
pub mod orbit;
pub mod su2;
pub mod transport;

pub use error::{Error, Result};
pub use num_complex::Complex64;
