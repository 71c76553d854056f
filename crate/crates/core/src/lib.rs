//! Simulation and analysis of a GHz-modulated photon-pair interferometer.
//!
//! The crate has two halves that meet at the timetag stream:
//!
//! - **Forward model** ([`model`], [`config`], [`simulator`]): closed-form
//!   interference physics of two pair sources in series, and a Monte Carlo
//!   sampler that turns a [`config::RunConfig`] into per-channel detection
//!   streams under a square-wave or DC modulator drive, with detector
//!   efficiency, jitter, dark counts and dead time.
//! - **Measurement pipeline** ([`coincidence`], [`analysis`]): coincidence
//!   identification on sorted streams, delay histograms, folding modulo the
//!   drive period, the offset sweep that recovers the unknown trigger
//!   offset, accidental estimation with background subtraction, fringe
//!   fitting and harmonic selection.
//!
//! [`tagfile`] defines the binary on-disk interchange format; [`stream`]
//! holds the in-memory representation both halves share.
//!
//! Counting follows one convention throughout: channel 0 is the signal,
//! channel 1 the idler, and all times are integer picoseconds.

pub mod analysis;
pub mod coincidence;
pub mod config;
pub mod error;
pub mod model;
pub mod simulator;
pub mod stream;
pub mod tagfile;

pub use error::{Error, Result};

/// Cap rayon's worker threads for every parallel region in this crate.
///
/// Call once, before any parallel work. `None` keeps machine parallelism.
/// Returns an error only if a global pool was already installed.
pub fn set_thread_cap(threads: Option<usize>) -> std::result::Result<(), String> {
    match threads {
        None | Some(0) => Ok(()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string()),
    }
}
