//! Timetag correlation: coincidence identification, delay histograms,
//! modulo-period folding, offset sweeps, and background-corrected
//! visibilities.
//!
//! The pipeline mirrors how gated pair detection is analysed: signal and
//! idler tags whose inter-channel delay is below a window form coincidences;
//! their midpoints, folded modulo the drive period at an offset recovered by
//! a sweep, separate the high and low modulator states; accidentals are read
//! off the flat part of the delay histogram and subtracted.
//!
//! All operations are pure over immutable inputs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stream::TimetagStream;

/// A matched signal/idler pair.
///
/// The midpoint is `(t_s + t_i) / 2` rounded half-down to an integer
/// picosecond; the delay is the signed `t_i - t_s`. `|delay_ps|` never
/// exceeds the window used to find the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceEvent {
    pub midpoint_ps: i64,
    pub delay_ps: i64,
}

/// Histogram of signed inter-channel delays over `[-range_ps, +range_ps)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayHistogram {
    pub bin_width_ps: i64,
    pub range_ps: i64,
    pub counts: Vec<u64>,
    /// Events whose delay fell outside the range.
    pub dropped: u64,
}

impl DelayHistogram {
    /// Half-open bounds `[lo, hi)` of bin `k`.
    pub fn bin_bounds(&self, k: usize) -> (i64, i64) {
        let lo = -self.range_ps + k as i64 * self.bin_width_ps;
        (lo, lo + self.bin_width_ps)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Event counts folded into one drive period at a given offset.
///
/// Bin index of a time `t` is `floor(((t + offset) mod T) * n_bins / T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedHistogram {
    pub period_ps: i64,
    pub offset_ps: i64,
    pub counts: Vec<u64>,
}

impl FoldedHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// High/low-state counts and the visibility they imply.
///
/// `sigma_v` comes from first-order propagation of independent Poisson
/// errors on the two state counts: `2 sqrt(c_h c_l / (c_h + c_l)^3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult {
    pub c_high: u64,
    pub c_low: u64,
    pub v: f64,
    pub sigma_v: f64,
    /// Expected background counts per modulator state that have been
    /// subtracted (zero for a raw result).
    pub accidentals_per_state: f64,
}

/// One offset of a visibility-vs-offset sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub offset_ps: i64,
    pub result: VisibilityResult,
}

/// Visibility evaluated over offsets spanning `[-T/4, +T/4]`.
///
/// For square-modulated data the magnitude of `v` traces a triangle peaked
/// at the true drive-to-tagger offset; `best_index` marks that peak.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSweep {
    pub points: Vec<SweepPoint>,
    pub best_index: usize,
}

impl OffsetSweep {
    pub fn best(&self) -> &SweepPoint {
        &self.points[self.best_index]
    }
}

fn midpoint_half_down(t_s: i64, t_i: i64) -> i64 {
    // Round-half-down (toward negative infinity) so both implementations of
    // the format agree bit-for-bit.
    ((t_s as i128 + t_i as i128).div_euclid(2)) as i64
}

/// Find signal/idler coincidences with `|t_i - t_s| <= window_ps`.
///
/// Matching is greedy-exclusive: every tag joins at most one coincidence,
/// the pairing with the smallest `|delay|` wins, and ties go to the earlier
/// idler tag (then the earlier signal tag). The sweep is a single pass over
/// both streams; tags separated by more than the window never compete, so
/// memory stays bounded by the densest local cluster.
///
/// Events are returned sorted by `(midpoint_ps, delay_ps)`.
pub fn find_coincidences(
    signal: &TimetagStream,
    idler: &TimetagStream,
    window_ps: i64,
) -> Result<Vec<CoincidenceEvent>> {
    if window_ps < 0 {
        return Err(Error::InvalidParameter {
            name: "window_ps",
            reason: format!("coincidence window must be >= 0, got {window_ps}"),
        });
    }
    signal.check_sorted()?;
    idler.check_sorted()?;

    let s = &signal.tags;
    let i = &idler.tags;
    let mut events = Vec::new();
    let mut scratch = ClusterScratch::default();

    // Split the merged stream at gaps larger than the window: no pair can
    // span such a gap, so each cluster is matched independently.
    let (mut a, mut b) = (0usize, 0usize);
    let (mut cluster_a, mut cluster_b) = (0usize, 0usize);
    let mut last_time: Option<i64> = None;
    while a < s.len() || b < i.len() {
        let take_signal = match (s.get(a), i.get(b)) {
            (Some(&ts), Some(&ti)) => ts <= ti,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let t = if take_signal { s[a] } else { i[b] };
        if let Some(prev) = last_time {
            if t - prev > window_ps {
                match_cluster(
                    &s[cluster_a..a],
                    &i[cluster_b..b],
                    window_ps,
                    &mut scratch,
                    &mut events,
                );
                cluster_a = a;
                cluster_b = b;
            }
        }
        if take_signal {
            a += 1;
        } else {
            b += 1;
        }
        last_time = Some(t);
    }
    match_cluster(
        &s[cluster_a..],
        &i[cluster_b..],
        window_ps,
        &mut scratch,
        &mut events,
    );

    events.sort_unstable_by_key(|e| (e.midpoint_ps, e.delay_ps));
    Ok(events)
}

#[derive(Default)]
struct ClusterScratch {
    // (|delay|, t_i, t_s) candidate keys; indices into the cluster slices.
    candidates: Vec<(u64, i64, i64, u32, u32)>,
    signal_used: Vec<bool>,
    idler_used: Vec<bool>,
}

fn match_cluster(
    sig: &[i64],
    idl: &[i64],
    window_ps: i64,
    scratch: &mut ClusterScratch,
    out: &mut Vec<CoincidenceEvent>,
) {
    if sig.is_empty() || idl.is_empty() {
        return;
    }
    scratch.candidates.clear();
    let mut b_lo = 0usize;
    for (si, &ts) in sig.iter().enumerate() {
        while b_lo < idl.len() && idl[b_lo] < ts - window_ps {
            b_lo += 1;
        }
        for (off, &ti) in idl[b_lo..].iter().enumerate() {
            if ti > ts + window_ps {
                break;
            }
            let delay = ti as i128 - ts as i128;
            scratch
                .candidates
                .push((delay.unsigned_abs() as u64, ti, ts, si as u32, (b_lo + off) as u32));
        }
    }
    scratch
        .candidates
        .sort_unstable_by_key(|&(d, ti, ts, _, _)| (d, ti, ts));

    scratch.signal_used.clear();
    scratch.signal_used.resize(sig.len(), false);
    scratch.idler_used.clear();
    scratch.idler_used.resize(idl.len(), false);

    for &(_, ti, ts, si, ii) in &scratch.candidates {
        if scratch.signal_used[si as usize] || scratch.idler_used[ii as usize] {
            continue;
        }
        scratch.signal_used[si as usize] = true;
        scratch.idler_used[ii as usize] = true;
        out.push(CoincidenceEvent {
            midpoint_ps: midpoint_half_down(ts, ti),
            delay_ps: ti - ts,
        });
    }
}

/// Bin signed delays over `[-range_ps, +range_ps)`; out-of-range events are
/// dropped but counted.
pub fn delay_histogram(
    events: &[CoincidenceEvent],
    bin_width_ps: i64,
    range_ps: i64,
) -> Result<DelayHistogram> {
    if bin_width_ps <= 0 {
        return Err(Error::InvalidParameter {
            name: "bin_width_ps",
            reason: format!("bin width must be > 0, got {bin_width_ps}"),
        });
    }
    if range_ps <= 0 || (2 * range_ps) % bin_width_ps != 0 {
        return Err(Error::InvalidParameter {
            name: "range_ps",
            reason: format!(
                "bin width {bin_width_ps} must divide the full span {}",
                2 * range_ps
            ),
        });
    }
    let n_bins = (2 * range_ps / bin_width_ps) as usize;
    let mut counts = vec![0u64; n_bins];
    let mut dropped = 0u64;
    for e in events {
        if e.delay_ps >= -range_ps && e.delay_ps < range_ps {
            counts[((e.delay_ps + range_ps) / bin_width_ps) as usize] += 1;
        } else {
            dropped += 1;
        }
    }
    Ok(DelayHistogram {
        bin_width_ps,
        range_ps,
        counts,
        dropped,
    })
}

/// Fold raw times into one period; every input lands in exactly one bin.
pub fn fold_times(
    times: impl IntoIterator<Item = i64>,
    period_ps: i64,
    offset_ps: i64,
    n_bins: usize,
) -> Result<FoldedHistogram> {
    if period_ps <= 0 {
        return Err(Error::InvalidParameter {
            name: "period_ps",
            reason: format!("period must be > 0, got {period_ps}"),
        });
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter {
            name: "n_bins",
            reason: "need at least one bin".into(),
        });
    }
    let mut counts = vec![0u64; n_bins];
    let period = period_ps as i128;
    for t in times {
        let phase = (t as i128 + offset_ps as i128).rem_euclid(period);
        let idx = (phase * n_bins as i128 / period) as usize;
        counts[idx] += 1;
    }
    Ok(FoldedHistogram {
        period_ps,
        offset_ps,
        counts,
    })
}

/// Fold coincidence midpoints modulo the drive period at a given offset.
pub fn fold_midpoints(
    events: &[CoincidenceEvent],
    period_ps: i64,
    offset_ps: i64,
    n_bins: usize,
) -> Result<FoldedHistogram> {
    fold_times(events.iter().map(|e| e.midpoint_ps), period_ps, offset_ps, n_bins)
}

/// Visibility from the two modulator states of a folded histogram: the first
/// half-period is the high state, the second the low state.
pub fn visibility_from_fold(h: &FoldedHistogram) -> Result<VisibilityResult> {
    if h.n_bins() % 2 != 0 {
        return Err(Error::InvalidParameter {
            name: "n_bins",
            reason: format!("need an even bin count to split states, got {}", h.n_bins()),
        });
    }
    let half = h.n_bins() / 2;
    let c_high: u64 = h.counts[..half].iter().sum();
    let c_low: u64 = h.counts[half..].iter().sum();
    if c_high + c_low == 0 {
        return Err(Error::UndefinedVisibility);
    }
    let (ch, cl) = (c_high as f64, c_low as f64);
    let sum = ch + cl;
    Ok(VisibilityResult {
        c_high,
        c_low,
        v: (ch - cl) / sum,
        sigma_v: 2.0 * (ch * cl / (sum * sum * sum)).sqrt(),
        accidentals_per_state: 0.0,
    })
}

/// Sweep the fold offset over `[-T/4, +T/4]` and evaluate the visibility at
/// each step. The sweep spans half the period because the drive-to-tagger
/// offset is only known up to `1/(2 Omega)`; for square-modulated data the
/// response is a triangle peaked at the true offset, where `best_index`
/// points. Step size is floored at 1 ps.
pub fn offset_sweep(
    events: &[CoincidenceEvent],
    period_ps: i64,
    n_steps: usize,
) -> Result<OffsetSweep> {
    if n_steps < 3 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: format!("offset sweep needs at least 3 steps, got {n_steps}"),
        });
    }
    if period_ps <= 0 {
        return Err(Error::InvalidParameter {
            name: "period_ps",
            reason: format!("period must be > 0, got {period_ps}"),
        });
    }
    if events.is_empty() {
        return Err(Error::EmptyCoincidences);
    }

    let span = period_ps / 2;
    let n_eff = n_steps.min(span as usize + 1).max(3);
    let offsets: Vec<i64> = (0..n_eff)
        .map(|k| {
            let frac = k as f64 / (n_eff - 1) as f64;
            -(period_ps / 4) + (frac * span as f64).round() as i64
        })
        .collect();

    let midpoints: Vec<i64> = events.iter().map(|e| e.midpoint_ps).collect();
    let points: Vec<SweepPoint> = offsets
        .par_iter()
        .map(|&offset_ps| {
            let fold = fold_times(midpoints.iter().copied(), period_ps, offset_ps, 2)?;
            Ok(SweepPoint {
                offset_ps,
                result: visibility_from_fold(&fold)?,
            })
        })
        .collect::<Result<_>>()?;

    let best_index = points
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.result
                .v
                .abs()
                .partial_cmp(&b.result.v.abs())
                .expect("visibility is finite")
        })
        .map(|(k, _)| k)
        .expect("sweep has at least 3 points");

    Ok(OffsetSweep { points, best_index })
}

/// Mean count of the delay-histogram bins lying entirely outside
/// `[-peak_halfwidth_ps, +peak_halfwidth_ps]`: the per-bin accidental level.
pub fn estimate_accidentals(h: &DelayHistogram, peak_halfwidth_ps: i64) -> Result<f64> {
    if peak_halfwidth_ps < 0 || peak_halfwidth_ps >= h.range_ps {
        return Err(Error::InvalidParameter {
            name: "peak_halfwidth_ps",
            reason: format!(
                "peak half-width must be in [0, {}), got {peak_halfwidth_ps}",
                h.range_ps
            ),
        });
    }
    let mut sum = 0u64;
    let mut n = 0u64;
    for (k, &c) in h.counts.iter().enumerate() {
        let (lo, hi) = h.bin_bounds(k);
        if hi <= -peak_halfwidth_ps || lo >= peak_halfwidth_ps {
            sum += c;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "peak_halfwidth_ps",
            reason: "no histogram bins lie outside the peak window".into(),
        });
    }
    Ok(sum as f64 / n as f64)
}

/// Subtract an expected accidental count per modulator state:
/// `v_corr = (c_h - c_l) / (c_h + c_l - 2 a)`.
///
/// The accidental background is state-independent, so it cancels in the
/// numerator and only deflates the denominator. Error propagation treats the
/// subtracted count as Poisson-distributed alongside the two state counts.
pub fn background_subtract(
    r: &VisibilityResult,
    accidentals_per_state: f64,
) -> Result<VisibilityResult> {
    if !(accidentals_per_state >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "accidentals_per_state",
            reason: format!("accidental count must be >= 0, got {accidentals_per_state}"),
        });
    }
    let (ch, cl) = (r.c_high as f64, r.c_low as f64);
    let a = accidentals_per_state;
    let denom = ch + cl - 2.0 * a;
    if denom <= 0.0 {
        return Err(Error::OverSubtraction { denominator: denom });
    }
    let v = (ch - cl) / denom;
    let dv_dh = (2.0 * cl - 2.0 * a) / (denom * denom);
    let dv_dl = -(2.0 * ch - 2.0 * a) / (denom * denom);
    let dv_da = 2.0 * (ch - cl) / (denom * denom);
    let var = dv_dh * dv_dh * ch + dv_dl * dv_dl * cl + dv_da * dv_da * a;
    Ok(VisibilityResult {
        c_high: r.c_high,
        c_low: r.c_low,
        v,
        sigma_v: var.sqrt(),
        accidentals_per_state: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn stream(channel: u8, tags: &[i64]) -> TimetagStream {
        TimetagStream::new(channel, tags.to_vec()).unwrap()
    }

    #[test]
    fn single_pair_within_window() {
        let events =
            find_coincidences(&stream(0, &[100]), &stream(1, &[150]), 100).unwrap();
        assert_eq!(
            events,
            vec![CoincidenceEvent {
                midpoint_ps: 125,
                delay_ps: 50
            }]
        );
    }

    #[test]
    fn pair_outside_window_is_ignored() {
        let events =
            find_coincidences(&stream(0, &[100]), &stream(1, &[300]), 100).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn nearest_delay_wins() {
        // Idler at 12 is closer to the signal at 10 than the idler at 1.
        let events = find_coincidences(&stream(0, &[10]), &stream(1, &[1, 12]), 100).unwrap();
        assert_eq!(
            events,
            vec![CoincidenceEvent {
                midpoint_ps: 11,
                delay_ps: 2
            }]
        );
    }

    #[test]
    fn tie_breaks_toward_earlier_idler() {
        let events = find_coincidences(&stream(0, &[10]), &stream(1, &[5, 15]), 100).unwrap();
        assert_eq!(
            events,
            vec![CoincidenceEvent {
                midpoint_ps: 7,
                delay_ps: -5
            }]
        );
    }

    #[test]
    fn midpoint_rounds_half_down() {
        let events = find_coincidences(&stream(0, &[100]), &stream(1, &[149]), 100).unwrap();
        // (100 + 149) / 2 = 124.5 rounds down.
        assert_eq!(events[0].midpoint_ps, 124);
    }

    #[test]
    fn exclusive_matching_chains() {
        // Both signals find partners even though the first idler is nearest
        // to both: smallest |delay| pairs claim tags first.
        let events =
            find_coincidences(&stream(0, &[0, 4]), &stream(1, &[1, 5]), 10).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].delay_ps, 1);
        assert_eq!(events[1].delay_ps, 1);
    }

    #[test]
    fn unsorted_input_is_rejected() {
        let bad = TimetagStream {
            channel: 0,
            tags: vec![5, 1],
        };
        assert!(matches!(
            find_coincidences(&bad, &stream(1, &[2]), 10),
            Err(Error::UnsortedStream { .. })
        ));
    }

    #[test]
    fn window_monotonicity_spot_check() {
        let s = stream(0, &[0, 50, 120, 400, 900]);
        let i = stream(1, &[30, 130, 410, 800]);
        let mut prev = 0;
        for w in [0, 10, 40, 100, 500] {
            let n = find_coincidences(&s, &i, w).unwrap().len();
            assert!(n >= prev, "window {w} produced fewer events");
            prev = n;
        }
    }

    #[test]
    fn delay_histogram_basics() {
        let events = vec![CoincidenceEvent {
            midpoint_ps: 0,
            delay_ps: 50,
        }];
        let h = delay_histogram(&events, 100, 500).unwrap();
        assert_eq!(h.counts.len(), 10);
        assert_eq!(h.counts[5], 1, "delay +50 lands in [0, 100)");
        assert_eq!(h.total(), 1);
        assert_eq!(h.dropped, 0);
    }

    #[test]
    fn delay_histogram_drops_out_of_range() {
        let events = vec![
            CoincidenceEvent {
                midpoint_ps: 0,
                delay_ps: 499,
            },
            CoincidenceEvent {
                midpoint_ps: 0,
                delay_ps: 500,
            },
            CoincidenceEvent {
                midpoint_ps: 0,
                delay_ps: -501,
            },
        ];
        let h = delay_histogram(&events, 100, 500).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.dropped, 2);
    }

    #[test]
    fn delay_histogram_mirror_symmetry() {
        let events: Vec<CoincidenceEvent> = [50i64, -50, 250, -250, 131, -131]
            .iter()
            .map(|&d| CoincidenceEvent {
                midpoint_ps: 0,
                delay_ps: d,
            })
            .collect();
        let h = delay_histogram(&events, 100, 500).unwrap();
        let n = h.counts.len();
        for k in 0..n / 2 {
            assert_eq!(h.counts[k], h.counts[n - 1 - k], "bin {k} not mirrored");
        }
    }

    #[test]
    fn delay_histogram_rejects_bad_bins() {
        assert!(delay_histogram(&[], 0, 500).is_err());
        assert!(delay_histogram(&[], 300, 500).is_err());
    }

    #[test]
    fn fold_periodicity_and_offset() {
        let t = 1000;
        let h = fold_times([0, t, 2 * t], t, 0, 10).unwrap();
        assert_eq!(h.counts[0], 3);
        let h = fold_times([t / 2], t, t / 2, 10).unwrap();
        assert_eq!(h.counts[0], 1);
    }

    #[test]
    fn fold_conserves_counts_with_negative_times() {
        let times = [-1500, -1, 0, 1, 999, 1000, 123_456_789];
        let h = fold_times(times.iter().copied(), 1000, -333, 7).unwrap();
        assert_eq!(h.total(), times.len() as u64);
    }

    #[test]
    fn fold_uneven_period_stays_in_bounds() {
        // 7 bins over 1001 ps: every index must stay < 7.
        let h = fold_times(0..1001, 1001, 0, 7).unwrap();
        assert_eq!(h.total(), 1001);
    }

    #[test]
    fn visibility_from_fold_values() {
        let h = FoldedHistogram {
            period_ps: 100,
            offset_ps: 0,
            counts: vec![90, 10],
        };
        let r = visibility_from_fold(&h).unwrap();
        assert_abs_diff_eq!(r.v, 0.8);

        let h = FoldedHistogram {
            period_ps: 100,
            offset_ps: 0,
            counts: vec![50, 50],
        };
        let r = visibility_from_fold(&h).unwrap();
        assert_abs_diff_eq!(r.v, 0.0);
        assert_abs_diff_eq!(r.sigma_v, 0.1);

        let h = FoldedHistogram {
            period_ps: 100,
            offset_ps: 0,
            counts: vec![37, 0],
        };
        assert_abs_diff_eq!(visibility_from_fold(&h).unwrap().v, 1.0);
    }

    #[test]
    fn visibility_errors() {
        let odd = FoldedHistogram {
            period_ps: 100,
            offset_ps: 0,
            counts: vec![1, 2, 3],
        };
        assert!(visibility_from_fold(&odd).is_err());
        let empty = FoldedHistogram {
            period_ps: 100,
            offset_ps: 0,
            counts: vec![0, 0],
        };
        assert!(matches!(
            visibility_from_fold(&empty),
            Err(Error::UndefinedVisibility)
        ));
    }

    #[test]
    fn offset_sweep_triangle_is_exact_for_ideal_square() {
        // Midpoints uniformly filling the high half-period [0, 500).
        let period = 1000;
        let events: Vec<CoincidenceEvent> = (0..500)
            .map(|t| CoincidenceEvent {
                midpoint_ps: t,
                delay_ps: 0,
            })
            .collect();
        let sweep = offset_sweep(&events, period, 101).unwrap();
        for p in &sweep.points {
            let expected = 1.0 - 4.0 * p.offset_ps.abs() as f64 / period as f64;
            assert_abs_diff_eq!(p.result.v, expected, epsilon = 1e-12);
        }
        assert_eq!(sweep.best().offset_ps, 0);
        // Endpoints sit at +/- T/4 where half of each state is misclassified.
        assert_abs_diff_eq!(sweep.points.first().unwrap().result.v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sweep.points.last().unwrap().result.v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn offset_sweep_flat_events_have_no_visibility() {
        let period = 1000;
        let events: Vec<CoincidenceEvent> = (0..period)
            .map(|t| CoincidenceEvent {
                midpoint_ps: t,
                delay_ps: 0,
            })
            .collect();
        let sweep = offset_sweep(&events, period, 21).unwrap();
        for p in &sweep.points {
            assert_abs_diff_eq!(p.result.v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn offset_sweep_argument_checks() {
        let e = [CoincidenceEvent {
            midpoint_ps: 0,
            delay_ps: 0,
        }];
        assert!(offset_sweep(&e, 1000, 2).is_err());
        assert!(offset_sweep(&e, 0, 11).is_err());
        assert!(matches!(
            offset_sweep(&[], 1000, 11),
            Err(Error::EmptyCoincidences)
        ));
    }

    #[test]
    fn offset_sweep_respects_one_ps_granularity() {
        let e = [CoincidenceEvent {
            midpoint_ps: 0,
            delay_ps: 0,
        }];
        // Period 8: span 4, so at most 5 distinct integer offsets.
        let sweep = offset_sweep(&e, 8, 101).unwrap();
        assert_eq!(sweep.points.len(), 5);
        let offsets: Vec<i64> = sweep.points.iter().map(|p| p.offset_ps).collect();
        assert_eq!(offsets, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn accidental_estimate_from_flat_histogram() {
        let h = DelayHistogram {
            bin_width_ps: 100,
            range_ps: 500,
            counts: vec![7; 10],
            dropped: 0,
        };
        assert_abs_diff_eq!(estimate_accidentals(&h, 200).unwrap(), 7.0);

        let zero = DelayHistogram {
            bin_width_ps: 100,
            range_ps: 500,
            counts: vec![0; 10],
            dropped: 0,
        };
        assert_abs_diff_eq!(estimate_accidentals(&zero, 200).unwrap(), 0.0);
    }

    #[test]
    fn accidental_estimate_excludes_peak_bins() {
        // Peak of 100 in the two central bins must not contaminate the mean.
        let mut counts = vec![3u64; 10];
        counts[4] = 100;
        counts[5] = 100;
        let h = DelayHistogram {
            bin_width_ps: 100,
            range_ps: 500,
            counts,
            dropped: 0,
        };
        assert_abs_diff_eq!(estimate_accidentals(&h, 100).unwrap(), 3.0);
        assert!(estimate_accidentals(&h, 500).is_err());
    }

    #[test]
    fn background_subtraction_recovers_true_visibility() {
        // Raw 0.78 with accidentals at 6.67% of the total per state
        // corrects to 0.90.
        let total = 10_000u64;
        let raw = VisibilityResult {
            c_high: 8_900,
            c_low: 1_100,
            v: 0.78,
            sigma_v: 0.0,
            accidentals_per_state: 0.0,
        };
        let a = 0.0667 * total as f64;
        let corrected = background_subtract(&raw, a).unwrap();
        assert_abs_diff_eq!(corrected.v, 0.90, epsilon = 5e-4);
    }

    #[test]
    fn background_subtraction_identity_and_null() {
        let r = VisibilityResult {
            c_high: 700,
            c_low: 300,
            v: 0.4,
            sigma_v: 0.0,
            accidentals_per_state: 0.0,
        };
        let same = background_subtract(&r, 0.0).unwrap();
        assert_abs_diff_eq!(same.v, 0.4, epsilon = 1e-15);

        let balanced = VisibilityResult {
            c_high: 500,
            c_low: 500,
            v: 0.0,
            sigma_v: 0.0,
            accidentals_per_state: 0.0,
        };
        let sub = background_subtract(&balanced, 123.0).unwrap();
        assert_abs_diff_eq!(sub.v, 0.0);
    }

    #[test]
    fn background_over_subtraction_is_an_error() {
        let r = VisibilityResult {
            c_high: 50,
            c_low: 50,
            v: 0.0,
            sigma_v: 0.0,
            accidentals_per_state: 0.0,
        };
        assert!(matches!(
            background_subtract(&r, 50.0),
            Err(Error::OverSubtraction { .. })
        ));
    }
}
