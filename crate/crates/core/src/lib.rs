//! Drinfeld models over F_q[t]: Wieferich places, ordic valuations, L-series,
//! Taelman units, p-adic logarithms and Euler factors.

pub mod anderson;
pub mod checks;
pub mod compact;
pub mod error;
pub mod lseries;
pub mod ring;
pub mod field;
pub mod ore;
pub mod parse;
pub mod places;
pub mod poly;
pub mod rational;
pub mod registry;
pub mod stats;
pub mod residue;
pub mod search;
pub mod tpoly;
pub mod valuation;
pub mod wieferich;

pub use error::{Error, Result};
pub use field::{Elem, Fq};
pub use ore::{DrinfeldModel, OrePoly, Smallness};
pub use places::Place;
pub use poly::Poly;
pub use rational::RationalFunction;
pub use valuation::Valuation;
