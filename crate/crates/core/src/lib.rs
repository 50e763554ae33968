//! Exact invariants of isolated quotient singularities `C^n/G` and arithmetic
//! obstructions to exact fillings of their contact links.

pub mod bernoulli;
pub mod chenruan;
pub mod exactnum;
pub mod genus;
pub mod groups;
pub mod link;
pub mod numtheory;
pub mod obstruct;
