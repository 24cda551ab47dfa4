//! Finite element building blocks.

pub mod assembly1d;
pub mod banded;
pub mod mesh1d;
pub mod quadrature;
pub mod space;
pub mod trimesh;

pub use assembly1d::{assemble_helmholtz_1d, assemble_load, sesquilinear_form};
pub use banded::{BandedLu, BandedMatrix, DirichletSystem};
pub use mesh1d::{lagrange_basis, FeFunction1D, Mesh1D};
pub use quadrature::{gauss_legendre, quadrature_on_subdivided_interval};
pub use space::TransverseSpace;
pub use trimesh::{directional_helmholtz_2d, PeriodicTriMesh};
