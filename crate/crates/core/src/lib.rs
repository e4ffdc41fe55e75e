//! Cold-hardiness prediction for grapevine cultivars: recurrent single-
//! and multi-task models, a thermal-time baseline, and the experiment
//! harness around them.

pub mod cli;
pub mod config;
pub mod dataio;
pub mod ferguson;
pub mod harness;
pub mod models;
pub mod ndiff;
pub mod synthgen;
