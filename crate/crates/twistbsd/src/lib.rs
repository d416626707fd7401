//! Quadratic twist families of elliptic curves over Q and the 2-part of BSD.
//!
//! The crate is organised bottom-up: exact curve arithmetic ([`curve`]),
//! number-theoretic primitives ([`arith`]), Tate's algorithm ([`localdata`]),
//! the prime and family selection machinery ([`families`]), the archimedean
//! side ([`analytic`]), descent via a rational 2-isogeny ([`descent`]),
//! Heegner points ([`heegner`]) and report assembly ([`bsd`]).

pub mod analytic;
pub mod arith;
pub mod bsd;
pub mod complex;
pub mod curve;
pub mod curvedb;
pub mod descent;
pub mod error;
mod ext;
pub mod families;
pub mod forms;
pub mod heegner;
pub mod height;
pub mod localdata;
pub mod par;
pub mod point;
pub mod report;

pub use curve::{CurveQ, TwoIsogenyPair};
pub use error::{Error, Result};
pub use point::RationalPoint;
