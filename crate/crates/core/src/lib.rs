//! Exact linear algebra for zigzag algebras, their bimodule complexes, derived
//! twists and the Koszul duality with preprojective algebras, all over a prime
//! field chosen at runtime.

pub mod algebra;
pub mod bimodule;
pub mod complex;
pub mod field;
pub mod koszul;
pub mod named;
pub mod report;
pub mod suites;
pub mod triangles;
pub mod twist;

pub use algebra::{Alg, Algebra, AlgebraError, AlgebraMap};
pub use field::{Field, FieldError, Matrix};
