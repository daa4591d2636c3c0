//! Monte-Carlo frame error rates and the distillation-efficiency table.
//!
//! Every frame draws its key and noise from its own stream, derived from the
//! cell seed and the frame index, so results do not depend on how frames are
//! spread over threads. Within one width the same streams are reused at every
//! error rate: a bit is flipped when its uniform draw falls below `p`, so the
//! error pattern at a higher `p` contains the one at a lower `p`.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::adapt::{self, AlphaTable, TableCell};
use crate::bits::KeyBlock;
use crate::codec::{encode_syndrome, BpDecoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::manifest::{matrix_hash, RunManifest};
use crate::seed;
use crate::tanner::{MatrixPrefix, ParityMatrix};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Cells whose FER point estimate reaches this are left out of the table.
pub const ABSENT_FER: f64 = 0.99;

/// Wilson score interval for `failures` out of `frames` at 95% confidence.
pub fn wilson_interval(failures: u64, frames: u64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp so the interval always brackets the point estimate despite rounding
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerEstimate {
    pub point: f64,
    pub frames_run: u64,
    pub failures: u64,
    /// Frames where the decoder reported success on a wrong key.
    pub undetected: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub total_iterations: u64,
}

impl FerEstimate {
    fn from_counts(c: &FrameCounts) -> Self {
        let (ci_low, ci_high) = wilson_interval(c.failures, c.frames);
        FerEstimate {
            point: if c.frames == 0 {
                0.0
            } else {
                c.failures as f64 / c.frames as f64
            },
            frames_run: c.frames,
            failures: c.failures,
            undetected: c.undetected,
            ci_low,
            ci_high,
            total_iterations: c.iterations,
        }
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.frames_run == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.frames_run as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameCounts {
    frames: u64,
    failures: u64,
    undetected: u64,
    iterations: u64,
}

impl std::ops::Add for FrameCounts {
    type Output = FrameCounts;
    fn add(self, o: FrameCounts) -> FrameCounts {
        FrameCounts {
            frames: self.frames + o.frames,
            failures: self.failures + o.failures,
            undetected: self.undetected + o.undetected,
            iterations: self.iterations + o.iterations,
        }
    }
}

/// Alice's key and Bob's noisy copy for one frame.
pub fn sample_frame(rng: &mut impl RngCore, width: usize, p: f64) -> (KeyBlock, KeyBlock) {
    let mut key = Vec::with_capacity(width);
    while key.len() < width {
        let word = rng.next_u64();
        let take = (width - key.len()).min(64);
        key.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    let noisy = key
        .iter()
        .map(|&b| b ^ u8::from(rng.random::<f64>() < p))
        .collect();
    (
        KeyBlock::from_bits(key).expect("0/1"),
        KeyBlock::from_bits(noisy).expect("0/1"),
    )
}

fn run_frames(
    prefix: &MatrixPrefix<'_>,
    p: f64,
    config: &DecoderConfig,
    cell_seed: u64,
    frames: std::ops::Range<u64>,
) -> FrameCounts {
    frames
        .into_par_iter()
        .map_init(
            || BpDecoder::new(prefix),
            |decoder, idx| {
                let mut rng = seed::stream(cell_seed, &[idx]);
                let (key, noisy) = sample_frame(&mut rng, prefix.width(), p);
                let syndrome = encode_syndrome(prefix, &key).expect("width matches");
                let out = decoder.decode(&noisy, &syndrome, config).expect("lengths match");
                let wrong = out.corrected_key != key;
                FrameCounts {
                    frames: 1,
                    failures: u64::from(!out.success || wrong),
                    undetected: u64::from(out.success && wrong),
                    iterations: out.iterations_used as u64,
                }
            },
        )
        .reduce(FrameCounts::default, |a, b| a + b)
}

fn validate_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid(format!("crossover probability {p} outside (0, 0.5)")));
    }
    Ok(())
}

/// Frame error rate of `prefix` on a BSC with crossover `p`, decoding with
/// `p` as the prior. A frame fails when decoding does not converge or
/// converges to the wrong key.
pub fn estimate_fer(
    prefix: &MatrixPrefix<'_>,
    p: f64,
    num_frames: u64,
    seed: u64,
    config: &DecoderConfig,
) -> Result<FerEstimate> {
    estimate_fer_until(prefix, p, num_frames, num_frames.max(1), seed, config, |_| false)
}

/// Like [`estimate_fer`], but runs in batches and stops as soon as `stop`
/// returns true for the running estimate.
pub fn estimate_fer_until(
    prefix: &MatrixPrefix<'_>,
    p: f64,
    num_frames: u64,
    batch: u64,
    seed: u64,
    config: &DecoderConfig,
    mut stop: impl FnMut(&FerEstimate) -> bool,
) -> Result<FerEstimate> {
    validate_p(p)?;
    if num_frames == 0 {
        return Err(Error::invalid("need at least one frame"));
    }
    if batch == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    let config = config.with_prior(p)?;
    let mut counts = FrameCounts::default();
    let mut done = 0;
    while done < num_frames {
        let end = (done + batch).min(num_frames);
        counts = counts + run_frames(prefix, p, &config, seed, done..end);
        done = end;
        if done < num_frames && stop(&FerEstimate::from_counts(&counts)) {
            break;
        }
    }
    Ok(FerEstimate::from_counts(&counts))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterizeConfig {
    pub frames_per_point: u64,
    pub seed: u64,
    /// Iteration cap and clamp; the prior is replaced by each cell's error rate.
    pub decoder: DecoderConfig,
    /// Stop a cell early once its α interval lies entirely below the best
    /// α lower bound already measured in the same row.
    pub early_abort: bool,
    pub batch_size: u64,
}

impl CharacterizeConfig {
    pub fn new(frames_per_point: u64, seed: u64) -> Self {
        CharacterizeConfig {
            frames_per_point,
            seed,
            decoder: DecoderConfig {
                max_iterations: DecoderConfig::DEFAULT_MAX_ITERATIONS,
                llr_clamp: DecoderConfig::DEFAULT_LLR_CLAMP,
                crossover_prior: 0.01,
            },
            early_abort: true,
            batch_size: 50,
        }
    }
}

/// A built table together with the raw per-cell estimates.
#[derive(Debug, Clone)]
pub struct Characterization {
    pub table: AlphaTable,
    /// Row-major, aligned with the table's cells.
    pub estimates: Vec<FerEstimate>,
    pub num_checks: usize,
}

impl Characterization {
    pub fn estimate(&self, row: usize, col: usize) -> &FerEstimate {
        &self.estimates[row * self.table.widths().len() + col]
    }

    pub fn total_undetected(&self) -> u64 {
        self.estimates.iter().map(|e| e.undetected).sum()
    }

    /// Adjacent error rates, per width, where the FER estimate drops with
    /// no overlap between the two confidence intervals.
    pub fn fer_monotonicity_violations(&self) -> Vec<(usize, f64, f64)> {
        let rates = self.table.error_rates();
        let mut out = Vec::new();
        for (k, &w) in self.table.widths().iter().enumerate() {
            for r in 1..rates.len() {
                let lo = self.estimate(r - 1, k);
                let hi = self.estimate(r, k);
                if hi.ci_high < lo.ci_low {
                    out.push((w, rates[r - 1], rates[r]));
                }
            }
        }
        out
    }
}

/// Cell RNG seed: depends on the width but not the error rate, which gives
/// the nested noise patterns described in the module docs.
pub fn cell_seed(master: u64, width: usize) -> u64 {
    seed::derive_seed(master, &[width as u64])
}

/// Measures α for every (error rate, width) pair.
///
/// Widths are stored in decreasing order. Within a row the smaller (more
/// robust) widths are measured first so early abort has a reference.
pub fn build_alpha_table(
    matrix: &ParityMatrix,
    widths: &[usize],
    error_grid: &[f64],
    config: &CharacterizeConfig,
) -> Result<Characterization> {
    if widths.is_empty() {
        return Err(Error::invalid("no widths to characterize"));
    }
    if error_grid.is_empty() {
        return Err(Error::invalid("empty error-rate grid"));
    }
    if error_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("error grid must be strictly increasing"));
    }
    for &p in error_grid {
        validate_p(p)?;
    }
    let mut widths = widths.to_vec();
    widths.sort_unstable_by(|a, b| b.cmp(a));
    if widths.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate width"));
    }
    let prefixes = widths
        .iter()
        .map(|&w| matrix.prefix(w))
        .collect::<Result<Vec<_>>>()?;
    if config.frames_per_point == 0 {
        return Err(Error::invalid("frames_per_point must be positive"));
    }
    let m = matrix.num_checks();

    let rows: Vec<Vec<FerEstimate>> = error_grid
        .par_iter()
        .map(|&p| -> Result<Vec<FerEstimate>> {
            let mut row = vec![None; widths.len()];
            let mut best_low = f64::NEG_INFINITY;
            for k in (0..widths.len()).rev() {
                let eer = adapt::eer(m, widths[k])?.eer;
                let floor = best_low;
                let stop = |est: &FerEstimate| {
                    config.early_abort && (1.0 - est.ci_low) * eer < floor
                };
                let est = estimate_fer_until(
                    &prefixes[k],
                    p,
                    config.frames_per_point,
                    config.batch_size.max(1),
                    cell_seed(config.seed, widths[k]),
                    &config.decoder,
                    stop,
                )?;
                best_low = best_low.max((1.0 - est.ci_high) * eer);
                row[k] = Some(est);
            }
            Ok(row.into_iter().map(|e| e.expect("filled")).collect())
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(rows.len() * widths.len());
    let mut estimates = Vec::with_capacity(cells.capacity());
    for row in rows {
        for (k, est) in row.into_iter().enumerate() {
            let eer = adapt::eer(m, widths[k])?.eer;
            let alpha = (est.point < ABSENT_FER)
                .then(|| adapt::alpha(est.point, eer))
                .transpose()?;
            cells.push(TableCell {
                alpha,
                fer: est.point,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
            });
            estimates.push(est);
        }
    }
    let table = AlphaTable::new(error_grid.to_vec(), widths, cells)?;
    Ok(Characterization {
        table,
        estimates,
        num_checks: m,
    })
}

/// Manifest describing a table build.
pub fn characterization_manifest(
    matrix: &ParityMatrix,
    widths: &[usize],
    error_grid: &[f64],
    config: &CharacterizeConfig,
) -> RunManifest {
    let mut man = RunManifest::new("characterize");
    man.push("matrix_sha256", matrix_hash(matrix))
        .push("matrix_checks", matrix.num_checks())
        .push("matrix_vars", matrix.num_vars())
        .push(
            "widths",
            widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","),
        )
        .push(
            "error_grid",
            error_grid
                .iter()
                .map(|&e| adapt::format_rate(e))
                .collect::<Vec<_>>()
                .join(","),
        )
        .push("frames_per_point", config.frames_per_point)
        .push("seed", config.seed)
        .push("max_iterations", config.decoder.max_iterations)
        .push("llr_clamp", config.decoder.llr_clamp)
        .push("early_abort", config.early_abort)
        .push("batch_size", config.batch_size);
    man
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{peg_construct, DegreeProfile};

    fn small_matrix() -> ParityMatrix {
        peg_construct(64, 256, &DegreeProfile::interleaved_4_5(256), 17).unwrap()
    }

    #[test]
    fn wilson_brackets_the_point() {
        for (f, n) in [(0, 10), (10, 10), (3, 500), (250, 500), (0, 1)] {
            let (lo, hi) = wilson_interval(f, n);
            let p = f as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{f}/{n}: {lo} {hi}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        // textbook value: 0 of 500 -> upper bound z^2/(n+z^2)
        let (_, hi) = wilson_interval(0, 500);
        assert!((hi - Z95 * Z95 / (500.0 + Z95 * Z95)).abs() < 1e-12);
    }

    #[test]
    fn frames_are_nested_across_error_rates() {
        let s = 1234;
        let (k1, n1) = sample_frame(&mut seed::stream(s, &[0]), 300, 0.02);
        let (k2, n2) = sample_frame(&mut seed::stream(s, &[0]), 300, 0.05);
        assert_eq!(k1, k2);
        let e1 = k1.xor(&n1);
        let e2 = k2.xor(&n2);
        for (a, b) in e1.bits().iter().zip(e2.bits()) {
            assert!(a <= b);
        }
    }

    #[test]
    fn negligible_noise_never_fails() {
        let h = small_matrix();
        let cfg = DecoderConfig::new(0.01).unwrap();
        let est = estimate_fer(&h.full().unwrap(), 1e-9, 100, 3, &cfg).unwrap();
        assert_eq!(est.failures, 0);
        assert_eq!(est.point, 0.0);
        assert_eq!(est.mean_iterations(), 0.0);
    }

    #[test]
    fn hopeless_noise_always_fails() {
        let h = small_matrix();
        let cfg = DecoderConfig::new(0.01).unwrap();
        let est = estimate_fer(&h.full().unwrap(), 0.3, 100, 3, &cfg).unwrap();
        assert_eq!(est.point, 1.0);
        assert_eq!(est.frames_run, 100);
    }

    #[test]
    fn reproducible_and_batch_independent() {
        let h = small_matrix();
        let p = h.full().unwrap();
        let cfg = DecoderConfig::new(0.01).unwrap();
        let a = estimate_fer(&p, 0.03, 120, 9, &cfg).unwrap();
        let b = estimate_fer_until(&p, 0.03, 120, 7, 9, &cfg, |_| false).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low <= a.point && a.point <= a.ci_high);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = small_matrix();
        let p = h.full().unwrap();
        let cfg = DecoderConfig::new(0.01).unwrap();
        assert!(estimate_fer(&p, 0.0, 10, 1, &cfg).is_err());
        assert!(estimate_fer(&p, 0.01, 0, 1, &cfg).is_err());
        let c = CharacterizeConfig::new(10, 1);
        assert!(build_alpha_table(&h, &[], &[0.01], &c).is_err());
        assert!(build_alpha_table(&h, &[256], &[], &c).is_err());
        assert!(build_alpha_table(&h, &[256], &[0.02, 0.01], &c).is_err());
        assert!(build_alpha_table(&h, &[64], &[0.01], &c).is_err());
    }

    #[test]
    fn table_cells_satisfy_alpha_identity() {
        let h = small_matrix();
        let grid = [0.005, 0.02, 0.06, 0.12];
        let cfg = CharacterizeConfig::new(60, 5);
        let ch = build_alpha_table(&h, &[128, 192, 256], &grid, &cfg).unwrap();
        let t = &ch.table;
        assert_eq!(t.widths(), &[256, 192, 128]);
        for r in 0..grid.len() {
            for k in 0..3 {
                let cell = t.cell(r, k);
                let eer = 1.0 - 64.0 / t.widths()[k] as f64;
                match cell.alpha {
                    Some(a) => assert!((a - (1.0 - cell.fer) * eer).abs() <= 1e-12),
                    None => assert!(cell.fer >= ABSENT_FER),
                }
                if cell.fer == 0.0 {
                    assert_eq!(cell.alpha, Some(eer));
                }
            }
        }
        let again = build_alpha_table(&h, &[256, 192, 128], &grid, &cfg).unwrap();
        assert_eq!(again.table, ch.table);
        assert_eq!(again.estimates, ch.estimates);
    }

    #[test]
    fn early_abort_only_cuts_dominated_cells() {
        let h = small_matrix();
        let grid = [0.12];
        let mut cfg = CharacterizeConfig::new(200, 5);
        let ch = build_alpha_table(&h, &[256, 96], &grid, &cfg).unwrap();
        // width 256 (rate 0.75) is hopeless at 12%, width 96 (rate 1/3) is not
        assert!(ch.estimate(0, 0).frames_run < 200);
        assert_eq!(ch.estimate(0, 1).frames_run, 200);
        cfg.early_abort = false;
        let full = build_alpha_table(&h, &[256, 96], &grid, &cfg).unwrap();
        assert_eq!(full.estimate(0, 0).frames_run, 200);
        assert_eq!(full.table.working_width(0), ch.table.working_width(0));
    }
}
