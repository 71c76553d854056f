//! Command implementations behind the `nli` binary.
//!
//! Three commands tie simulation to analysis:
//!
//! - `simulate`: run config -> binary timetag file plus a one-line JSON
//!   summary on stdout.
//! - `analyze`: timetag file -> delay histogram, offset sweep, folded
//!   high/low counts (CSV) and raw/background-subtracted visibilities
//!   (JSON), all evaluated at the offset-sweep maximum.
//! - `scan`: run config -> fringe counts vs phase (CSV) and the fitted
//!   visibility with the selected harmonic (JSON).
//!
//! Every command is deterministic given its inputs. Exit codes are fixed:
//! 0 ok, 2 config, 3 I/O, 4 file format, 5 empty result, 6 ambiguous fit,
//! 1 anything else.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use nli_core::analysis::{fit_fringe, select_harmonic, FringeFit};
use nli_core::coincidence::{
    background_subtract, delay_histogram, estimate_accidentals, find_coincidences,
    fold_midpoints, offset_sweep, visibility_from_fold, VisibilityResult,
};
use nli_core::config::RunConfig;
use nli_core::simulator::{sample_run, simulate_phase_scan};
use nli_core::tagfile;
use nli_core::{Error, Result};

/// Map an error onto the fixed exit-code table.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::Config(_) | Error::TooManyTags { .. } => 2,
        Error::Io(_) => 3,
        Error::Format(_) => 4,
        Error::EmptyCoincidences | Error::UndefinedVisibility => 5,
        Error::AmbiguousHarmonic { .. } => 6,
        _ => 1,
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub channels: usize,
    pub tags: [u64; 2],
    pub empirical_rate_hz: [f64; 2],
    pub duration_s: f64,
    pub seed: u64,
    pub out: String,
}

/// Simulate one run and write both channels into a single timetag file.
pub fn cmd_simulate(config_path: &Path, out_path: &Path) -> Result<SimulateSummary> {
    let text = fs::read_to_string(config_path)?;
    let cfg = RunConfig::from_json(&text)?;
    let (signal, idler) = sample_run(&cfg)?;
    tagfile::write_streams_to_path(out_path, &[signal.clone(), idler.clone()])?;
    Ok(SimulateSummary {
        channels: 2,
        tags: [signal.len() as u64, idler.len() as u64],
        empirical_rate_hz: [
            signal.len() as f64 / cfg.duration_s,
            idler.len() as f64 / cfg.duration_s,
        ],
        duration_s: cfg.duration_s,
        seed: cfg.seed,
        out: out_path.display().to_string(),
    })
}

/// Everything `analyze` needs beyond the input path.
#[derive(Debug, Clone)]
pub struct AnalyzeParams {
    /// Drive period the fold uses, ps.
    pub period_ps: i64,
    /// Coincidence window for the visibility pipeline, ps.
    pub window_ps: i64,
    /// Fold bin count; `None` picks 64 for periods of 10 ns and above,
    /// 16 below (bins should stay a few times the detector jitter).
    pub bins: Option<usize>,
    pub sweep_steps: usize,
    /// Delay-histogram binning for accidental estimation.
    pub hist_bin_ps: i64,
    pub hist_range_ps: i64,
    /// Half-width of the true-coincidence peak to exclude from the
    /// accidental estimate, ps.
    pub peak_halfwidth_ps: i64,
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        Self {
            period_ps: 100_000,
            window_ps: 1_000,
            bins: None,
            sweep_steps: 101,
            hist_bin_ps: 100,
            hist_range_ps: 2_000,
            peak_halfwidth_ps: 200,
        }
    }
}

impl AnalyzeParams {
    pub fn fold_bins(&self) -> usize {
        self.bins.unwrap_or(if self.period_ps >= 10_000 { 64 } else { 16 })
    }

    fn validate(&self) -> Result<()> {
        if self.period_ps <= 0 {
            return Err(Error::InvalidParameter {
                name: "period_ps",
                reason: format!("period must be > 0, got {}", self.period_ps),
            });
        }
        if self.window_ps <= 0 {
            return Err(Error::InvalidParameter {
                name: "window_ps",
                reason: format!("window must be > 0, got {}", self.window_ps),
            });
        }
        if self.window_ps > self.hist_range_ps {
            return Err(Error::InvalidParameter {
                name: "hist_range_ps",
                reason: format!(
                    "histogram range {} must cover the window {}",
                    self.hist_range_ps, self.window_ps
                ),
            });
        }
        let bins = self.fold_bins();
        if bins == 0 || bins % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "bins",
                reason: format!("fold bin count must be even and > 0, got {bins}"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct VisibilityOut {
    pub c_high: u64,
    pub c_low: u64,
    pub v: f64,
    pub sigma_v: f64,
}

impl From<&VisibilityResult> for VisibilityOut {
    fn from(r: &VisibilityResult) -> Self {
        Self {
            c_high: r.c_high,
            c_low: r.c_low,
            v: r.v,
            sigma_v: r.sigma_v,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub period_ps: i64,
    pub window_ps: i64,
    pub coincidences: u64,
    pub best_offset_ps: i64,
    pub accidentals_per_state: f64,
    pub raw: VisibilityOut,
    pub corrected: VisibilityOut,
}

/// Full measurement pipeline over a recorded timetag file.
pub fn cmd_analyze(tags_path: &Path, params: &AnalyzeParams, out_dir: &Path) -> Result<AnalysisReport> {
    params.validate()?;
    let streams = tagfile::read_streams_from_path(tags_path)?;
    if streams.len() < 2 {
        return Err(Error::Format(format!(
            "need at least 2 channels, file holds {}",
            streams.len()
        )));
    }
    let (signal, idler) = (&streams[0], &streams[1]);

    // Wide pass: the delay histogram whose flat wings give the accidental
    // level per histogram bin.
    let wide = find_coincidences(signal, idler, params.hist_range_ps)?;
    let hist = delay_histogram(&wide, params.hist_bin_ps, params.hist_range_ps)?;
    let acc_per_bin = estimate_accidentals(&hist, params.peak_halfwidth_ps)?;
    // Accidentals among the narrow-window coincidences, per modulator state:
    // density (per ps) times the 2w window, split over two states.
    let acc_per_state = acc_per_bin * params.window_ps as f64 / params.hist_bin_ps as f64;

    // Narrow pass: the coincidences the visibility is computed from.
    let events = find_coincidences(signal, idler, params.window_ps)?;
    if events.is_empty() {
        return Err(Error::EmptyCoincidences);
    }

    let sweep = offset_sweep(&events, params.period_ps, params.sweep_steps)?;
    let best_offset = sweep.best().offset_ps;
    let folded = fold_midpoints(&events, params.period_ps, best_offset, params.fold_bins())?;
    let raw = visibility_from_fold(&folded)?;
    let corrected = background_subtract(&raw, acc_per_state)?;

    fs::create_dir_all(out_dir)?;

    let mut f = fs::File::create(out_dir.join("delay_histogram.csv"))?;
    writeln!(f, "bin_start_ps,bin_end_ps,count")?;
    for (k, &c) in hist.counts.iter().enumerate() {
        let (lo, hi) = hist.bin_bounds(k);
        writeln!(f, "{lo},{hi},{c}")?;
    }

    let mut f = fs::File::create(out_dir.join("offset_sweep.csv"))?;
    writeln!(
        f,
        "offset_ps,visibility,sigma_visibility,visibility_corrected,sigma_corrected"
    )?;
    for p in &sweep.points {
        let corr = background_subtract(&p.result, acc_per_state)?;
        writeln!(
            f,
            "{},{:.6},{:.6},{:.6},{:.6}",
            p.offset_ps, p.result.v, p.result.sigma_v, corr.v, corr.sigma_v
        )?;
    }

    let mut f = fs::File::create(out_dir.join("folded_high_low.csv"))?;
    writeln!(
        f,
        "bin_index,bin_start_ps,state,count,accidental_per_bin,count_minus_accidentals"
    )?;
    let acc_per_fold_bin = 2.0 * acc_per_state / folded.n_bins() as f64;
    let bin_span = params.period_ps as f64 / folded.n_bins() as f64;
    for (k, &c) in folded.counts.iter().enumerate() {
        let state = if k < folded.n_bins() / 2 { "high" } else { "low" };
        writeln!(
            f,
            "{},{:.1},{},{},{:.6},{:.6}",
            k,
            k as f64 * bin_span,
            state,
            c,
            acc_per_fold_bin,
            c as f64 - acc_per_fold_bin
        )?;
    }

    let report = AnalysisReport {
        period_ps: params.period_ps,
        window_ps: params.window_ps,
        coincidences: events.len() as u64,
        best_offset_ps: best_offset,
        accidentals_per_state: acc_per_state,
        raw: (&raw).into(),
        corrected: (&corrected).into(),
    };
    fs::write(
        out_dir.join("visibility.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct ScanReport {
    pub points: usize,
    pub dwell_s: f64,
    pub fit: FringeFit,
}

/// Scan the TPS phase over one turn and fit the resulting fringe.
pub fn cmd_scan(
    config_path: &Path,
    points: usize,
    dwell_s: f64,
    out_dir: &Path,
) -> Result<ScanReport> {
    if points < 5 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: format!("scan needs >= 5 points, got {points}"),
        });
    }
    let text = fs::read_to_string(config_path)?;
    let cfg = RunConfig::from_json(&text)?;
    let phases: Vec<f64> = (0..points)
        .map(|k| std::f64::consts::TAU * k as f64 / points as f64)
        .collect();
    let scan = simulate_phase_scan(&cfg, &phases, dwell_s)?;

    fs::create_dir_all(out_dir)?;
    let mut f = fs::File::create(out_dir.join("fringe.csv"))?;
    writeln!(f, "phase_rad,singles_signal,singles_idler,coincidences")?;
    for p in &scan {
        writeln!(
            f,
            "{:.9},{},{},{}",
            p.phase_rad, p.singles_signal, p.singles_idler, p.coincidences
        )?;
    }

    let counts: Vec<f64> = scan.iter().map(|p| p.coincidences as f64).collect();
    let n = select_harmonic(&phases, &counts)?;
    let fit = fit_fringe(&phases, &counts, n)?;
    let report = ScanReport {
        points,
        dwell_s,
        fit,
    };
    fs::write(
        out_dir.join("fit.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}
