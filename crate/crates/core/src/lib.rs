//! Numerical laboratory for uniformity norms and multiple ergodic averages.
//!
//! The crate makes three families of objects computable on desk-scale models:
//!
//! * Gowers uniformity norms and progression-counting forms on `Z/NZ`
//!   ([`cyclic`], [`gowers`], [`progressions`]), each with independent
//!   evaluation paths that are cross-checked against one another;
//! * cube measures and the associated seminorms on finite ergodic systems
//!   ([`system`], [`cube`]), where the ergodic-theoretic limits degenerate to
//!   exact full-period averages;
//! * orbits and multiple ergodic averages on two explicit 2-step nilsystems
//!   ([`nilsystems`], [`averages`]).
//!
//! Every inequality the library relies on is wired into the seeded property
//! battery in [`verify`], which the `ergolab` CLI exposes as `ergolab verify`.

pub mod averages;
pub mod budget;
pub mod cube;
pub mod cyclic;
pub mod error;
pub mod gowers;
pub mod nilsystems;
pub mod progressions;
pub mod sampling;
pub mod series;
pub mod system;
pub mod verify;

pub use budget::Budget;
pub use error::{Error, Result};

/// Formats a float with 17 significant digits so the decimal text
/// round-trips to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}
