//! Exact arithmetic and experiments on the Mordell curves y² = x³ + d.
//!
//! Modules, bottom-up:
//!
//! * [`integer_lab`]: gcds, exact roots, square parts, the sixth-power-free sieve.
//! * [`curve`]: the group law, primitive triples, torsion.
//! * [`heights`]: naive heights, h_f for f = x³/y², canonical heights.
//! * [`param`]: the (b₀, b₁, d₁, x₁, y₁) parameterization of primitive points.
//! * [`search`]: bounded point search and ζ_d witnesses.
//! * [`forms`]: integer points of ternary forms in boxes.
//! * [`survey`]: density surveys over sixth-power-free d.

pub mod curve;
pub mod error;
pub mod exec;
pub mod forms;
pub mod heights;
pub mod integer_lab;
pub mod param;
pub mod search;
pub mod survey;

pub use curve::{CurvePoint, MordellCurve, PrimitiveTriple, TorsionClass, TorsionStructure};
pub use error::{Error, Result};
pub use exec::Exec;
pub use heights::HeightValue;
