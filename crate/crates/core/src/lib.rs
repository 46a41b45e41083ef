//! Forward-looking sonar simulation: closed-form propagation and backscatter,
//! an analytic expected-reverberation model, a Monte-Carlo ray-traced ping
//! simulator with first-order multipath, and a likelihood-ratio detector.

pub mod acoustics;
pub mod beam;
pub mod detect;
pub mod error;
pub mod geometry;
pub mod level;
pub mod nullmodel;
pub mod quadrature;
pub mod raysim;
pub mod runner;
pub mod scatter;
pub mod scenario;
pub mod vec3;

pub use error::{Error, Result};
pub use level::Level;
