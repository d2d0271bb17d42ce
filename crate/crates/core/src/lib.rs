pub mod classical;
pub mod cli;
pub mod evolve;
pub mod freq_profile;
pub mod io;
pub mod kernel;
pub mod ode;
pub mod omega_expr;
pub mod quadrature;
pub mod specfun;
