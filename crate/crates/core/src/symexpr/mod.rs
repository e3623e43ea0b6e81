//! Exact rational expressions over registered atoms.

pub mod context;
pub mod eval;
pub mod factor;
pub mod integrate;
pub mod expr;
pub mod gcd;
pub mod int;
pub mod poly;
pub mod render;
pub mod sample;

pub use context::{AtomInfo, AtomKind, Context};
pub use eval::Evaluator;
pub use expr::Expr;
pub use int::Int;
pub use poly::{Mono, Poly};
pub use integrate::antiderivative;
