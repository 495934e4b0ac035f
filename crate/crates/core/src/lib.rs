pub mod analysis;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod fdm;
pub mod hamilton;
pub mod linalg;
pub mod opalg;
pub mod simulator;
