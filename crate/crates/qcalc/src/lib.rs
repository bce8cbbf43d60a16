pub mod context;
pub mod laurent;
pub mod ring;
pub mod scalar;
pub mod cas;
pub mod calculus;
pub mod jackson;
pub mod lattice;
pub mod special;
pub mod fourier;
pub mod schrodinger;
pub mod gauge;
pub mod oscillator;
pub mod cli;
