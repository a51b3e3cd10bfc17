pub mod cli;
pub mod error;
pub mod escape;
pub mod fresnel;
pub mod planar;
pub mod propagator;
pub mod quadrature;
pub mod wavefunc;
pub mod zeno;
