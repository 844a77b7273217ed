//! Definable strategic classification: formulas over the reals with
//! exponentiation, the strategic transform, shattering constructions and
//! sample-complexity tooling.

pub mod capacity;
pub mod constructions;
pub mod families;
pub mod formula;
pub mod interval;
pub mod learn;
pub mod rational;
pub mod solve;
pub mod transform;
