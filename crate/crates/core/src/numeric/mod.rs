//! Generic numerical building blocks: quadrature, root refinement,
//! ODE integration and Hermite tabulation.

pub mod fd;
pub mod hermite;
pub mod ode;
pub mod quadrature;
pub mod roots;
