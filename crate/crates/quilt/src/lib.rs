//! Exact deformation quantization of moduli of flat connections on
//! skeletized coloured surfaces, by chord-algebra fusion.

pub mod associator;
pub mod chords;
pub mod cli;
pub mod hopf;
pub mod jet;
pub mod liealg;
pub mod linalg;
pub mod moduli;
pub mod ordcat;
pub mod rational;
pub mod spaces;

pub use rational::Q;
