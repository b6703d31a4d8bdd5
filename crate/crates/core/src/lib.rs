//! Numerical laboratory for three-dimensional Hénon maps: degenerate
//! periodic orbits with multipliers `(-1, -1, +1)`, their quadratic normal
//! form, and the discrete Lorenz attractors born there.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod io;
pub mod maps;
pub mod newton;
pub mod normal_form;
pub mod orbit;
pub mod quasi;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use maps::{HenonMap, InvParams, Jet2, MapKind, MapParams, SMParams, State3};
