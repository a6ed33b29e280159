//! Exact symbolic-numeric kernel for planar holomorphic webs and homogeneous
//! foliations of the complex projective plane.
//!
//! The crate decides two families of questions exactly, over a computable
//! coefficient field `K = Q(theta)(params)`:
//!
//! * holomorphy of the curvature of an implicit planar `d`-web
//!   `F(x, y, p) = 0` along a smooth component of its discriminant
//!   ([`web`]), and
//! * flatness of the dual (Legendre) web of a homogeneous foliation
//!   `A dx + B dy` of the projective plane ([`foliation`]), including the
//!   Galois maps of the Klein catalog.
//!
//! The exact layer lives in [`field`], [`poly`], [`ratfunc`] and [`upoly`];
//! algebraic root classes, trace sums and local Taylor data are in [`roots`];
//! an arbitrary-precision numeric fallback (simultaneous root iteration over
//! software big-floats) is in [`numeric`]. Everything is `no_std + alloc` and
//! immutable after construction, so values can be shared freely across
//! threads.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod expr;
pub mod field;
pub mod foliation;
pub mod forms;
pub mod numeric;
pub mod poly;
pub mod ratfunc;
pub mod resultant;
pub mod roots;
pub mod upoly;
pub mod web;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldScalar};
pub use poly::{MultiPoly, Var};
pub use ratfunc::RationalFunction;
