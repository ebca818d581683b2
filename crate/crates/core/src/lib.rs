pub mod error;
pub mod ode;
pub mod params;
pub mod phase;
pub mod quadrature;
pub mod radial;
pub mod closed_form;
pub mod estimates;
pub mod verify;
pub mod cli;
