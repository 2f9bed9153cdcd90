//! Exact lattice and finite quadratic form computations for elliptic K3
//! surfaces of Picard rank 2.

pub mod arith;
pub mod budget;
pub mod discforms;
pub mod error;
pub mod lagrangians;
pub mod lattices;
pub mod matrix;
pub mod scalar;
pub mod surfaces;

pub use budget::Budget;
pub use error::{Error, Result};
pub use scalar::Scalar;

/// The default scalar: arbitrary precision, so no computation can overflow.
pub type Int = num_bigint::BigInt;
pub type Rational = num_rational::Ratio<Int>;

pub type Lattice = lattices::Lattice<Int>;
pub type NsLattice = lattices::NsLattice<Int>;
pub type RationalVector = lattices::RationalVector<Int>;
pub type IntMatrix = matrix::IntMatrix<Int>;
pub type FiniteQuadForm = discforms::FiniteQuadForm<Int>;
pub type DFElement = discforms::DFElement<Int>;
pub type DFIsometry = discforms::DFIsometry<Int>;
pub type NsDiscriminant = lagrangians::NsDiscriminant<Int>;
pub type LagrangianSubgroup = lagrangians::LagrangianSubgroup<Int>;
pub type GSpec = lagrangians::GSpec<Int>;
pub type UnitSubgroup = surfaces::UnitSubgroup<Int>;
pub type MukaiVector = surfaces::MukaiVector<Int>;
pub type SurfaceModel = surfaces::SurfaceModel<Int>;

pub use lagrangians::Choice;
pub use surfaces::{HTClass, JInvariant};
