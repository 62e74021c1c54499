pub mod physics;
pub mod world;
pub mod env;
pub mod nn;
pub mod rl;
pub mod baselines;
pub mod harness;
