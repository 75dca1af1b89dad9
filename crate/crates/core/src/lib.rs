//! Offline hybrid conditional planning for human-robot collaborative
//! assembly.

pub mod adl;
pub mod assembly;
pub mod cli;
pub mod executor;
pub mod feasibility;
pub mod ground;
pub mod planner;
pub mod plantree;
