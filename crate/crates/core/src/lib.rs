//! Chess endgames as trajectories in an integer configuration space.
//!
//! The crate solves small material classes exactly by retrograde analysis,
//! turns the solved tables into a deterministic optimal-play control
//! function, and measures how strategy paths from nearby starting points
//! drift apart. A second probe fits bounded-capacity linear evaluators to
//! distance-to-mate and reports how far they stay from the truth.

pub mod dynamics;
pub mod encoding;
pub mod evalprobe;
pub mod parallel;
pub mod rules;
pub mod strategy;
pub mod tablebase;
