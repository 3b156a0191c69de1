//! Numerical building blocks: quadrature, ODE stepping, special functions.

pub mod bessel;
pub mod ode;
pub mod quadrature;
