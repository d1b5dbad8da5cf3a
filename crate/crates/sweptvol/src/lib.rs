//! Geometry of codimension-2 shapes on flat tori and in Euclidean space,
//! represented both explicitly (oriented points, closed curves) and
//! implicitly (complex fields whose oriented zero sets are the shapes),
//! together with the connection 1-form on the space of implicit
//! representations whose curvature is the canonical symplectic pairing and
//! whose holonomy measures swept volume.
//!
//! Module map:
//! - [`grid`]: periodic grids, node/edge/face fields, quadrature, discrete d.
//! - [`spectral`]: Coulomb-gauge solve of dλ = F for quantized face sources.
//! - [`trig`]: closed-form test functions and differential forms.
//! - [`currents`]: point/curve/surface currents, pairing, flux, boundary.
//! - [`extract`]: oriented phase level-set extraction (marching cells).
//! - [`explicit`]: explicit shape space, symplectic pairing, Liouville
//!   primitives, binormal flow, momenta.
//! - [`implicit`]: complex-field shape representations, circle differential,
//!   the connection 1-form, structure-group actions.
//! - [`prequantum`]: horizontal projection/lifts, holonomy, finite-difference
//!   exterior derivatives, the zero-set presymplectic formula.
//! - [`zoo`]: canonical shapes, fields, and seeded suites shared by tests.
//! - [`io`]: field container, curve JSON, OBJ export.

pub mod currents;
pub mod error;
pub mod explicit;
pub mod extract;
pub mod grid;
pub mod implicit;
pub mod io;
pub mod prequantum;
pub mod spectral;
pub mod trig;
pub mod zoo;

pub use error::{Error, Result};
