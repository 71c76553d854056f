//! Monte Carlo generation of signal/idler timetag streams.
//!
//! Pairs are emitted by an inhomogeneous Poisson process whose rate follows
//! the interference fringe under the configured drive, sampled by thinning
//! against the analytic maximum rate (exact for the piecewise-constant
//! square drive, correct for any waveform). Each emitted pair then passes a
//! detection chain per channel: efficiency thinning, independent Gaussian
//! timing jitter, merging with uncorrelated background counts, and a final
//! non-paralyzable dead-time prune.
//!
//! Generation is chunked over fixed 10 ms windows of run time. Every chunk
//! draws from its own counter-derived RNG stream, so output is bit-identical
//! for a given seed no matter how many threads process the chunks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;

use crate::coincidence::find_coincidences;
use crate::config::{DriveShape, DriveWaveform, RunConfig};
use crate::error::{Error, Result};
use crate::model::{cdm_transmission, phase_from_voltage, visibility_from_ratio, SourceRatio};
use crate::stream::TimetagStream;

/// Fixed generation chunk, 10 ms of run time.
const CHUNK_PS: i64 = 10_000_000_000;

/// Hard cap on generated tags per run.
const MAX_TAGS: u64 = 1 << 31;

// RNG stream identifiers. Each (seed, stream, chunk) triple indexes an
// independent ChaCha8 stream.
const STREAM_PAIRS: u64 = 1;
const STREAM_DETECT: u64 = 2;
const STREAM_DARK_SIGNAL: u64 = 3;
const STREAM_DARK_IDLER: u64 = 4;
const STREAM_T0: u64 = 5;
const STREAM_SCAN: u64 = 6;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-(seed, stream, chunk) generator.
fn sub_rng(master: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut state = master;
    let a = splitmix64(&mut state);
    let mut state = a ^ stream;
    let b = splitmix64(&mut state);
    let mut state = b ^ chunk;
    let mut seed = [0u8; 32];
    for part in seed.chunks_exact_mut(8) {
        part.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Drive voltage at a time, honoring the waveform's pinned trigger offset
/// (an unpinned offset reads as zero; [`sample_run`] resolves the actual
/// draw internally).
pub fn waveform_voltage(t_ps: i64, w: &DriveWaveform) -> f64 {
    voltage_with_t0(t_ps, w, w.t0_ps.unwrap_or(0))
}

fn voltage_with_t0(t_ps: i64, w: &DriveWaveform, t0_ps: i64) -> f64 {
    match w.shape {
        DriveShape::Dc => w.vdc_volts,
        DriveShape::Square => {
            let period = w.period_ps();
            let phase = (t_ps - t0_ps).rem_euclid(period);
            if phase < period / 2 {
                w.vdc_volts + w.vpp_volts / 2.0
            } else {
                w.vdc_volts - w.vpp_volts / 2.0
            }
        }
    }
}

/// Resolve the drive-to-tagger trigger offset for a run: the pinned value if
/// one is configured, otherwise a seed-derived uniform draw over one
/// half-period either side of zero (the unknown-offset condition).
pub fn resolve_t0(c: &RunConfig) -> i64 {
    match c.drive.t0_ps {
        Some(t0) => t0,
        None => {
            if c.drive.shape == DriveShape::Dc {
                return 0;
            }
            let half = (c.drive.period_ps() / 2).max(1);
            let mut rng = sub_rng(c.seed, STREAM_T0, 0);
            rng.random_range(-half..=half)
        }
    }
}

/// Pair-emission rate at a time, Hz.
///
/// The biphoton phase collects every pump-path contribution once and then
/// takes the harmonic factor: `theta(t) = n (phi_cdm(t) + phi_tps +
/// phi_drift(t))`, with `n = 2` for pair interference and `n = 1` for the
/// classical configuration. Modulator transmission scales the pump feeding
/// the second source, so it rescales the pair-production ratio; the rate is
/// normalized so the fringe maximum at the configured ratio (with no excess
/// modulator loss) emits exactly `pair_rate_hz`.
pub fn instantaneous_rate(t_ps: i64, c: &RunConfig) -> f64 {
    rate_with_t0(t_ps, c, c.drive.t0_ps.unwrap_or(0))
}

fn rate_with_t0(t_ps: i64, c: &RunConfig, t0_ps: i64) -> f64 {
    let volts = voltage_with_t0(t_ps, &c.drive, t0_ps);
    let phi_cdm = phase_from_voltage(volts, &c.modulator);
    let drift = c.drift.map_or(0.0, |d| d.rad_per_s * t_ps as f64 * 1e-12);
    let theta = c.harmonic_n.factor() * (phi_cdm + c.tps_offset_rad + drift);

    let transmission = cdm_transmission(phi_cdm.max(0.0), &c.modulator);
    let r_eff = c.ratio_r * transmission;
    let v_eff = 2.0 * r_eff / (1.0 + r_eff * r_eff);
    let weight = (1.0 + r_eff * r_eff) * (1.0 + v_eff * theta.cos());

    c.pair_rate_hz * weight / rate_norm(c)
}

/// Normalization: the fringe-maximum weight at the configured ratio.
fn rate_norm(c: &RunConfig) -> f64 {
    let v0 = visibility_from_ratio(SourceRatio::new(c.ratio_r).expect("validated ratio"));
    (1.0 + c.ratio_r * c.ratio_r) * (1.0 + v0)
}

/// Upper bound on the emission rate over the whole run, used as the thinning
/// envelope. The square drive visits two voltage states; bounding the fringe
/// term by its maximum covers any TPS offset or drift.
fn rate_bound(c: &RunConfig, t0_ps: i64) -> f64 {
    let state_bound = |volts: f64| {
        let phi_cdm = phase_from_voltage(volts, &c.modulator);
        let transmission = cdm_transmission(phi_cdm.max(0.0), &c.modulator);
        let r_eff = c.ratio_r * transmission;
        let v_eff = 2.0 * r_eff / (1.0 + r_eff * r_eff);
        (1.0 + r_eff * r_eff) * (1.0 + v_eff)
    };
    let bound = match c.drive.shape {
        DriveShape::Dc => state_bound(c.drive.vdc_volts),
        DriveShape::Square => {
            let hi = voltage_with_t0(t0_ps, &c.drive, t0_ps);
            let lo = voltage_with_t0(t0_ps + c.drive.period_ps() / 2, &c.drive, t0_ps);
            state_bound(hi).max(state_bound(lo))
        }
    };
    c.pair_rate_hz * bound / rate_norm(c)
}

struct ChunkOutput {
    signal: Vec<i64>,
    idler: Vec<i64>,
}

/// Pair emissions of one chunk, identical whether or not detection runs.
fn chunk_emissions(c: &RunConfig, t0_ps: i64, bound_hz: f64, chunk: u64) -> Vec<i64> {
    let mut out = Vec::new();
    if bound_hz <= 0.0 {
        return out;
    }
    let start = chunk as i64 * CHUNK_PS;
    let end = (start + CHUNK_PS).min(c.duration_ps());
    let span = (end - start) as f64;
    let mut rng = sub_rng(c.seed, STREAM_PAIRS, chunk);
    let exp = Exp::new(bound_hz * 1e-12).expect("positive rate");
    let mut t_rel = 0.0f64;
    loop {
        t_rel += exp.sample(&mut rng);
        // Compare in f64 first: at low rates a single gap can exceed the
        // i64 range entirely.
        if t_rel >= span {
            break;
        }
        let t = start + t_rel.round() as i64;
        if t >= end {
            break;
        }
        let u: f64 = rng.random();
        if u * bound_hz < rate_with_t0(t, c, t0_ps) {
            out.push(t);
        }
    }
    out
}

/// Detection chain for one chunk's emissions: per-channel efficiency
/// thinning and timing jitter. Tags jittered outside the run window are
/// dropped.
fn chunk_detect(c: &RunConfig, emissions: &[i64], chunk: u64) -> (Vec<i64>, Vec<i64>) {
    let mut rng = sub_rng(c.seed, STREAM_DETECT, chunk);
    let duration = c.duration_ps();
    let jitter: Vec<Option<Normal<f64>>> = c
        .detectors
        .iter()
        .map(|d| {
            (d.jitter_sigma_ps > 0.0)
                .then(|| Normal::new(0.0, d.jitter_sigma_ps).expect("valid sigma"))
        })
        .collect();
    let mut signal = Vec::new();
    let mut idler = Vec::new();
    for &t in emissions {
        let keep_s = rng.random::<f64>() < c.detectors[0].efficiency;
        let keep_i = rng.random::<f64>() < c.detectors[1].efficiency;
        if keep_s {
            let t_s = t + jitter[0].map_or(0.0, |n| n.sample(&mut rng)).round() as i64;
            if (0..duration).contains(&t_s) {
                signal.push(t_s);
            }
        }
        if keep_i {
            let t_i = t + jitter[1].map_or(0.0, |n| n.sample(&mut rng)).round() as i64;
            if (0..duration).contains(&t_i) {
                idler.push(t_i);
            }
        }
    }
    (signal, idler)
}

/// Homogeneous background (dark counts plus pump leak) for one chunk.
fn chunk_background(c: &RunConfig, channel: usize, chunk: u64) -> Vec<i64> {
    let rate = c.background_rate_hz(channel);
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let stream = if channel == 0 {
        STREAM_DARK_SIGNAL
    } else {
        STREAM_DARK_IDLER
    };
    let start = chunk as i64 * CHUNK_PS;
    let end = (start + CHUNK_PS).min(c.duration_ps());
    let span = (end - start) as f64;
    let mut rng = sub_rng(c.seed, stream, chunk);
    let exp = Exp::new(rate * 1e-12).expect("positive rate");
    let mut t_rel = 0.0f64;
    loop {
        t_rel += exp.sample(&mut rng);
        if t_rel >= span {
            break;
        }
        let t = start + t_rel.round() as i64;
        if t >= end {
            break;
        }
        out.push(t);
    }
    out
}

/// Non-paralyzable dead time: a tag is kept only if it follows the last
/// kept tag by at least the dead time.
fn prune_dead_time(tags: &mut Vec<i64>, dead_time_ps: i64) {
    if dead_time_ps <= 0 || tags.is_empty() {
        return;
    }
    let mut last_kept = i64::MIN / 2;
    tags.retain(|&t| {
        if t - last_kept >= dead_time_ps {
            last_kept = t;
            true
        } else {
            false
        }
    });
}

fn n_chunks(c: &RunConfig) -> u64 {
    (c.duration_ps() as u64).div_ceil(CHUNK_PS as u64)
}

fn check_tag_budget(c: &RunConfig, bound_hz: f64) -> Result<()> {
    let expected = (bound_hz + c.background_rate_hz(0) + c.background_rate_hz(1))
        * c.duration_s;
    if expected > MAX_TAGS as f64 {
        return Err(Error::TooManyTags {
            expected: expected as u64,
            limit: MAX_TAGS,
        });
    }
    Ok(())
}

/// Pair emission times before any detection effect, in integer picoseconds.
///
/// These are exactly the emissions underlying [`sample_run`] for the same
/// config, which makes them the ground truth for modulation-profile checks.
pub fn sample_emissions(c: &RunConfig) -> Result<Vec<i64>> {
    c.validate()?;
    let t0 = resolve_t0(c);
    let bound = rate_bound(c, t0);
    check_tag_budget(c, bound)?;
    let chunks: Vec<Vec<i64>> = (0..n_chunks(c))
        .into_par_iter()
        .map(|k| chunk_emissions(c, t0, bound, k))
        .collect();
    Ok(chunks.concat())
}

/// Generate the signal and idler timetag streams for one run.
///
/// Deterministic given the config (including seed): chunk RNG streams are
/// derived by counter, so thread count never changes the output.
pub fn sample_run(c: &RunConfig) -> Result<(TimetagStream, TimetagStream)> {
    c.validate()?;
    let t0 = resolve_t0(c);
    let bound = rate_bound(c, t0);
    check_tag_budget(c, bound)?;

    let chunks: Vec<ChunkOutput> = (0..n_chunks(c))
        .into_par_iter()
        .map(|k| {
            let emissions = chunk_emissions(c, t0, bound, k);
            let (signal, idler) = chunk_detect(c, &emissions, k);
            ChunkOutput { signal, idler }
        })
        .collect();

    let backgrounds: Vec<(Vec<i64>, Vec<i64>)> = (0..n_chunks(c))
        .into_par_iter()
        .map(|k| (chunk_background(c, 0, k), chunk_background(c, 1, k)))
        .collect();

    let mut signal = Vec::with_capacity(chunks.iter().map(|ch| ch.signal.len()).sum());
    let mut idler = Vec::with_capacity(chunks.iter().map(|ch| ch.idler.len()).sum());
    for ch in &chunks {
        signal.extend_from_slice(&ch.signal);
        idler.extend_from_slice(&ch.idler);
    }
    for (bg_s, bg_i) in &backgrounds {
        signal.extend_from_slice(bg_s);
        idler.extend_from_slice(bg_i);
    }
    signal.sort_unstable();
    idler.sort_unstable();
    prune_dead_time(&mut signal, c.detectors[0].dead_time_ps);
    prune_dead_time(&mut idler, c.detectors[1].dead_time_ps);

    Ok((
        TimetagStream {
            channel: 0,
            tags: signal,
        },
        TimetagStream {
            channel: 1,
            tags: idler,
        },
    ))
}

/// Counts at one phase setting of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub phase_rad: f64,
    pub singles_signal: u64,
    pub singles_idler: u64,
    pub coincidences: u64,
}

/// Scan the static pump-path phase (the TPS), dwelling `dwell_s` per point.
///
/// Each point runs an independent seeded sub-run with `tps_offset_rad` set
/// to the scan phase; coincidences are counted at the config's window.
pub fn simulate_phase_scan(
    c: &RunConfig,
    phases: &[f64],
    dwell_s: f64,
) -> Result<Vec<ScanPoint>> {
    if !(dwell_s > 0.0 && dwell_s.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dwell_s",
            reason: format!("dwell must be > 0, got {dwell_s}"),
        });
    }
    c.validate()?;
    phases
        .par_iter()
        .enumerate()
        .map(|(k, &phase)| {
            let mut point_cfg = c.clone();
            point_cfg.tps_offset_rad = phase;
            point_cfg.duration_s = dwell_s;
            point_cfg.seed = {
                let mut state = c.seed ^ STREAM_SCAN.rotate_left(32);
                let mut state = splitmix64(&mut state) ^ k as u64;
                splitmix64(&mut state)
            };
            let (signal, idler) = sample_run(&point_cfg)?;
            let events = find_coincidences(&signal, &idler, c.window_ps)?;
            Ok(ScanPoint {
                phase_rad: phase,
                singles_signal: signal.len() as u64,
                singles_idler: idler.len() as u64,
                coincidences: events.len() as u64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AmziParams, DetectorModel, Drift, DriveShape, DriveWaveform, Losses};
    use crate::model::{Harmonic, ModulatorParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn base_config() -> RunConfig {
        RunConfig {
            pump_wavelength_nm: 1544.61,
            pair_rate_hz: 100.0,
            ratio_r: 1.0,
            harmonic_n: Harmonic::Two,
            modulator: ModulatorParams {
                vpi_volts: 8.0,
                alpha_db_per_pi: 0.0,
                base_loss_db: 0.0,
            },
            drive: DriveWaveform {
                shape: DriveShape::Dc,
                freq_hz: 1e7,
                vpp_volts: 0.0,
                vdc_volts: 0.0,
                t0_ps: Some(0),
            },
            tps_offset_rad: 0.0,
            losses: Losses {
                spiral_db: [6.5, 6.5],
                routing_db: 0.3,
                coupling_db: 0.2,
            },
            amzi: AmziParams {
                delta_l_um: 90.0,
                fsr_nm: 6.4,
                extinction_db: 120.0,
            },
            detectors: [
                DetectorModel {
                    efficiency: 1.0,
                    dark_rate_hz: 0.0,
                    jitter_sigma_ps: 0.0,
                    dead_time_ps: 0,
                },
                DetectorModel {
                    efficiency: 1.0,
                    dark_rate_hz: 0.0,
                    jitter_sigma_ps: 0.0,
                    dead_time_ps: 0,
                },
            ],
            window_ps: 1000,
            duration_s: 30.0,
            seed: 42,
            drift: None,
        }
    }

    #[test]
    fn square_wave_voltage_levels() {
        let w = DriveWaveform {
            shape: DriveShape::Square,
            freq_hz: 1e7,
            vpp_volts: 4.0,
            vdc_volts: 2.1,
            t0_ps: Some(12_345),
        };
        let period = w.period_ps();
        assert_abs_diff_eq!(waveform_voltage(12_345 + period / 4, &w), 4.1);
        assert_abs_diff_eq!(waveform_voltage(12_345 + 3 * period / 4, &w), 0.1);
        // Periodic and defined for times before the trigger.
        assert_abs_diff_eq!(waveform_voltage(12_345 + period / 4 - 5 * period, &w), 4.1);

        let dc = DriveWaveform {
            shape: DriveShape::Dc,
            freq_hz: 1e7,
            vpp_volts: 4.0,
            vdc_volts: 2.1,
            t0_ps: None,
        };
        assert_abs_diff_eq!(waveform_voltage(999, &dc), 2.1);
    }

    #[test]
    fn rate_normalization_anchor() {
        // DC drive at the fringe maximum emits exactly the configured rate.
        let c = base_config();
        assert_abs_diff_eq!(instantaneous_rate(77, &c), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn rate_destructive_lock_is_zero() {
        let mut c = base_config();
        c.tps_offset_rad = FRAC_PI_2; // doubled to pi
        assert_abs_diff_eq!(instantaneous_rate(77, &c), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rate_alternates_null_and_max_under_square_drive() {
        let mut c = base_config();
        c.drive = DriveWaveform {
            shape: DriveShape::Square,
            freq_hz: 1e7,
            vpp_volts: 4.0, // vpi/2: doubled phase swing of pi
            vdc_volts: 2.0, // states at 0 V and 4 V
            t0_ps: Some(0),
        };
        let period = c.drive.period_ps();
        // High-voltage state: applied pi/2, doubled to pi -> null.
        assert_abs_diff_eq!(instantaneous_rate(period / 4, &c), 0.0, epsilon = 1e-9);
        // Low-voltage state: 0 V -> fringe maximum.
        assert_abs_diff_eq!(instantaneous_rate(3 * period / 4, &c), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn classical_harmonic_halves_the_phase() {
        let mut c = base_config();
        c.harmonic_n = Harmonic::One;
        c.tps_offset_rad = PI;
        assert_abs_diff_eq!(instantaneous_rate(0, &c), 0.0, epsilon = 1e-9);
        c.tps_offset_rad = FRAC_PI_2;
        assert_abs_diff_eq!(instantaneous_rate(0, &c), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn modulator_loss_reduces_peak_rate() {
        let mut c = base_config();
        c.drive.vdc_volts = 4.0; // applied phase pi/2 on the CDM
        c.tps_offset_rad = -phase_from_voltage(4.0, &c.modulator); // re-center fringe max
        let lossless = instantaneous_rate(0, &c);
        c.modulator.alpha_db_per_pi = 3.0;
        let lossy = instantaneous_rate(0, &c);
        assert!(
            lossy < lossless,
            "phase-correlated loss must lower the pair rate ({lossy} !< {lossless})"
        );
    }

    #[test]
    fn drift_moves_the_phase() {
        let mut c = base_config();
        c.drift = Some(Drift { rad_per_s: PI / 2.0 });
        // After one second the doubled drift phase reaches pi: null.
        assert_abs_diff_eq!(instantaneous_rate(1_000_000_000_000, &c), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut c = base_config();
        c.duration_s = 2.0;
        c.pair_rate_hz = 500.0;
        c.detectors[0].jitter_sigma_ps = 30.0;
        c.detectors[1].jitter_sigma_ps = 30.0;
        c.detectors[0].dark_rate_hz = 200.0;
        let (s1, i1) = sample_run(&c).unwrap();
        let (s2, i2) = sample_run(&c).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(i1, i2);

        c.seed += 1;
        let (s3, _) = sample_run(&c).unwrap();
        assert_ne!(s1.tags, s3.tags, "different seed must change the stream");
    }

    #[test]
    fn lossless_run_pairs_every_tag() {
        // No loss, no jitter, no darks: both channels carry identical times.
        let c = base_config();
        let (signal, idler) = sample_run(&c).unwrap();
        assert_eq!(signal.tags, idler.tags);
        let n = signal.len() as f64;
        let expected = 3000.0;
        assert!(
            (n - expected).abs() < 5.0 * expected.sqrt(),
            "tag count {n} outside 5 sigma of {expected}"
        );
        let events = find_coincidences(&signal, &idler, 10).unwrap();
        assert_eq!(events.len(), signal.len());
        assert!(events.iter().all(|e| e.delay_ps == 0));
    }

    #[test]
    fn dark_only_run_matches_poisson_mean() {
        let mut c = base_config();
        c.pair_rate_hz = 0.0;
        c.duration_s = 10.0;
        c.detectors[0].dark_rate_hz = 100.0;
        c.detectors[1].dark_rate_hz = 100.0;
        let (signal, idler) = sample_run(&c).unwrap();
        for stream in [&signal, &idler] {
            let n = stream.len() as f64;
            assert!(
                (n - 1000.0).abs() < 5.0 * 1000f64.sqrt(),
                "dark count {n} outside 5 sigma of 1000"
            );
        }
    }

    #[test]
    fn emissions_match_sample_run_ground_truth() {
        let mut c = base_config();
        c.duration_s = 5.0;
        c.pair_rate_hz = 300.0;
        let emissions = sample_emissions(&c).unwrap();
        let (signal, _) = sample_run(&c).unwrap();
        // Lossless, jitter-free detection reproduces the emission times.
        assert_eq!(signal.tags, emissions);
    }

    #[test]
    fn streams_are_sorted_and_respect_dead_time() {
        let mut c = base_config();
        c.duration_s = 5.0;
        c.pair_rate_hz = 2000.0;
        c.detectors[0].dead_time_ps = 200_000;
        c.detectors[0].jitter_sigma_ps = 50.0;
        c.detectors[1].dark_rate_hz = 1000.0;
        let (signal, idler) = sample_run(&c).unwrap();
        signal.check_sorted().unwrap();
        idler.check_sorted().unwrap();
        assert!(signal.min_gap().unwrap_or(i64::MAX) >= 200_000);
    }

    #[test]
    fn unpinned_t0_is_reproducible_and_bounded() {
        let mut c = base_config();
        c.drive.shape = DriveShape::Square;
        c.drive.vpp_volts = 1.0;
        c.drive.t0_ps = None;
        let t0 = resolve_t0(&c);
        assert_eq!(t0, resolve_t0(&c));
        assert!(t0.abs() <= c.drive.period_ps() / 2);
        c.seed ^= 0xDEAD_BEEF;
        let other = resolve_t0(&c);
        assert_ne!(t0, other, "draw should depend on the seed");
    }

    #[test]
    fn excessive_rate_is_a_resource_error() {
        let mut c = base_config();
        c.pair_rate_hz = 1e12;
        assert!(matches!(
            sample_run(&c),
            Err(Error::TooManyTags { .. })
        ));
    }

    #[test]
    fn two_point_scan_hits_max_and_null() {
        let mut c = base_config();
        c.pair_rate_hz = 1000.0;
        let points = simulate_phase_scan(&c, &[0.0, FRAC_PI_2], 2.0).unwrap();
        let expected = 2000.0;
        assert!(
            (points[0].coincidences as f64 - expected).abs() < 5.0 * expected.sqrt(),
            "fringe max point: {} vs {expected}",
            points[0].coincidences
        );
        assert_eq!(points[1].coincidences, 0, "doubled pi/2 is the null");
        assert!(points[0].singles_signal > 0);
    }

    #[test]
    fn scan_rejects_bad_dwell() {
        let c = base_config();
        assert!(simulate_phase_scan(&c, &[0.0], 0.0).is_err());
    }
}
