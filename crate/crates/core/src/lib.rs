//! Plan-based decision support for a restaurant kitchen game.

pub mod explain;
pub mod games;
pub mod ids;
pub mod kitchen;
pub mod metrics;
pub mod model;
pub mod planner;
pub mod session;
