//! Library side of the `wigprop` command line: scenario schemas,
//! validation, and the run orchestration. The binary in `main.rs` is a
//! thin wrapper so integration tests can drive everything in-process.

pub mod error;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use runner::{run, RunOptions, RunReport};
pub use scenario::{load_scenario, validate, Scenario};

/// Cap the rayon worker count from `WIGPROP_THREADS`, when set. Calling
/// it more than once is harmless (the first global pool wins).
pub fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("WIGPROP_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
