pub mod algebra;
pub mod cstar;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod matrix_model;
pub mod pu_n;
pub mod rng;
pub mod scalar;
pub mod word;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type Element = algebra::AlgebraElement<f64>;
pub type Element32 = algebra::AlgebraElement<f32>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Matrix32 = linalg::CMatrix<f32>;
pub type Unitary = matrix_model::UnitaryMatrix<f64>;
pub type Unitary32 = matrix_model::UnitaryMatrix<f32>;
pub type Group = cstar::MatrixGroup<f64>;
pub type Rep = pu_n::FiniteRep<f64>;
