pub mod agents;
pub mod behaviors;
pub mod env;
pub mod geometry;
pub mod harness;
pub mod neural;
pub mod sim;
