//! Adversarial constructions: bump families, fooling pairs, Gaussian transport,
//! hypercubes and the embedding of finite-dimensional functions into functionals.

pub mod bump;
pub mod decoder;
pub mod embed;
pub mod fooling;
pub mod hardness;
pub mod hypercube;
pub mod transport;
