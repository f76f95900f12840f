pub mod error;
pub mod kernels;
pub mod quadrature;
pub mod rigidity;
pub mod spectral;
pub mod specfun;
pub mod stats;
pub mod variance;
