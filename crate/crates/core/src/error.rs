//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or domain parameter violated its invariant. The
    /// message names the offending key so CLI users can find it.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A timetag stream handed to the correlator was not time-sorted.
    #[error("timetag stream on channel {channel} is unsorted at index {index}")]
    UnsortedStream { channel: u8, index: usize },

    /// A folded histogram contained no counts, so visibility is undefined.
    #[error("no counts in folded histogram; visibility is undefined")]
    UndefinedVisibility,

    /// Background subtraction removed more counts than were recorded.
    #[error("background subtraction leaves non-positive total ({denominator:.3})")]
    OverSubtraction { denominator: f64 },

    /// The fringe-fit design matrix was singular (degenerate phase set).
    #[error("fringe fit failed: singular design matrix")]
    SingularFit,

    /// Harmonic selection could not separate n=1 from n=2.
    #[error(
        "ambiguous harmonic: residuals {residual_n1:.6} (n=1) and {residual_n2:.6} (n=2) \
         differ by less than {tolerance:.0}%"
    )]
    AmbiguousHarmonic {
        residual_n1: f64,
        residual_n2: f64,
        tolerance: f64,
    },

    /// The requested run would produce more tags than the simulator accepts.
    #[error("run would produce ~{expected} tags per channel (limit {limit})")]
    TooManyTags { expected: u64, limit: u64 },

    /// No coincidences were found, so downstream analysis has no input.
    #[error("empty coincidence set")]
    EmptyCoincidences,

    /// A timetag file failed structural validation (magic, version, layout).
    #[error("bad timetag file: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Configuration document could not be parsed.
    #[error("config parse error: {0}")]
    Config(#[from] serde_json::Error),
}
