//! Greedy SAT-guided planning for totally-ordered HTN problems.
//!
//! Pipeline: [`hddl`] parses and grounds a problem into a [`model::Problem`],
//! [`inference`] derives task profiles, [`planner`] grows a [`pdt::Pdt`]
//! and queries the incremental encoding in [`encoder`], and [`verify`]
//! re-checks the result independently.

pub mod dt;
pub mod encoder;
pub mod hddl;
pub mod inference;
pub mod manifest;
pub mod model;
pub mod pdt;
pub mod plan_format;
pub mod planner;
pub mod score;
pub mod verify;
