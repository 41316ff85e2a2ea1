//! Scripted, deterministic runs of the hub on a virtual clock, with
//! canonical event logs that can be compared against golden files.

pub mod log;
pub mod run;
pub mod scenario;

pub use log::{diff_records, verify_log, Diff, EventLog, LogRecord};
pub use run::{run_scenario, run_scenario_full, run_with_engine, tick_of, Outcome};
pub use scenario::{Scenario, ScriptEntry};
