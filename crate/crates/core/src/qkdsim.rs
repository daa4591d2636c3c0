//! Fiber QKD link model and the one-way reconciliation run over it.
//!
//! The link budget is the usual weak-coherent-pulse model: channel
//! transmittance including detector efficiency, dark counts on two detectors,
//! and a misalignment error set by interference visibility.

use std::fmt::Write as _;

use crate::adapt::{AlphaTable, Selection};
use crate::charact::{estimate_fer, FerEstimate};
use crate::codec::DecoderConfig;
use crate::error::{Error, Result};
use crate::seed;
use crate::tanner::ParityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub attenuation_db_per_km: f64,
    pub pulse_rate_hz: f64,
    pub detector_efficiency: f64,
    /// Dark count probability per pulse, per detector.
    pub dark_count_prob: f64,
    pub visibility: f64,
    pub mean_photon_number: f64,
    /// Fraction of detections kept after basis sifting.
    pub sifting_factor: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            attenuation_db_per_km: 0.2,
            pulse_rate_hz: 2.0e8,
            detector_efficiency: 0.1,
            dark_count_prob: 1e-5,
            visibility: 0.98,
            mean_photon_number: 0.6,
            sifting_factor: 0.5,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit(self.detector_efficiency, "detector_efficiency")?;
        unit(self.dark_count_prob, "dark_count_prob")?;
        unit(self.visibility, "visibility")?;
        if !(self.sifting_factor > 0.0 && self.sifting_factor <= 1.0) {
            return Err(Error::invalid("sifting_factor must lie in (0, 1]"));
        }
        if !(self.pulse_rate_hz > 0.0) || !(self.mean_photon_number > 0.0) {
            return Err(Error::invalid("pulse rate and mean photon number must be positive"));
        }
        if !(self.attenuation_db_per_km >= 0.0) {
            return Err(Error::invalid("attenuation must be non-negative"));
        }
        Ok(())
    }

    /// Parses `key = value` lines, `#` comments allowed. Unknown keys are
    /// rejected; missing keys keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = LinkParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected key = value"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad number {:?}", value.trim())))?;
            let slot = match key.trim() {
                "attenuation_db_per_km" => &mut p.attenuation_db_per_km,
                "pulse_rate_hz" => &mut p.pulse_rate_hz,
                "detector_efficiency" => &mut p.detector_efficiency,
                "dark_count_prob" => &mut p.dark_count_prob,
                "visibility" => &mut p.visibility,
                "mean_photon_number" => &mut p.mean_photon_number,
                "sifting_factor" => &mut p.sifting_factor,
                other => return Err(Error::parse(idx + 1, format!("unknown parameter {other:?}"))),
            };
            *slot = value;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        format!(
            "attenuation_db_per_km = {}\npulse_rate_hz = {}\ndetector_efficiency = {}\n\
             dark_count_prob = {}\nvisibility = {}\nmean_photon_number = {}\nsifting_factor = {}\n",
            self.attenuation_db_per_km,
            self.pulse_rate_hz,
            self.detector_efficiency,
            self.dark_count_prob,
            self.visibility,
            self.mean_photon_number,
            self.sifting_factor
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkObservables {
    pub distance_km: f64,
    /// Channel times detector efficiency.
    pub transmittance: f64,
    /// Detection probability per pulse.
    pub gain: f64,
    pub qber: f64,
    pub sifted_rate_bps: f64,
}

pub fn link_observables(params: &LinkParams, distance_km: f64) -> Result<LinkObservables> {
    params.validate()?;
    if !(distance_km >= 0.0) {
        return Err(Error::invalid(format!("distance {distance_km} must be non-negative")));
    }
    let t = params.detector_efficiency
        * 10f64.powf(-params.attenuation_db_per_km * distance_km / 10.0);
    let y0 = 2.0 * params.dark_count_prob;
    let signal = 1.0 - (-params.mean_photon_number * t).exp();
    let gain = 1.0 - (1.0 - y0) * (1.0 - signal);
    let e_det = (1.0 - params.visibility) / 2.0;
    let qber = if gain > 0.0 {
        ((0.5 * y0 + e_det * signal) / gain).clamp(0.0, 0.5)
    } else {
        0.5
    };
    Ok(LinkObservables {
        distance_km,
        transmittance: t,
        gain,
        qber,
        sifted_rate_bps: params.pulse_rate_hz * params.sifting_factor * gain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub distance_km: f64,
    pub qber: f64,
    /// `None` when no characterized width can reconcile this QBER.
    pub width: Option<usize>,
    pub fer: f64,
    pub secure_ratio: f64,
    pub sifted_bps: f64,
    pub secure_bps: f64,
}

pub const SIM_CSV_HEADER: &str = "distance_km,qber,width,fer,secure_ratio,sifted_bps,secure_bps";

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SIM_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.6},{},{:.6},{:.4},{:.1},{:.1}",
                r.distance_km,
                r.qber,
                r.width.unwrap_or(0),
                r.fer,
                r.secure_ratio,
                r.sifted_bps,
                r.secure_bps
            )
            .unwrap();
        }
        out
    }

    /// Distances at which the secure ratio changes value along the sweep.
    pub fn ratio_steps(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter(|w| w[1].secure_ratio != w[0].secure_ratio)
            .map(|w| w[1].distance_km)
            .collect()
    }
}

/// Reconciles each distance's sifted key with the width the table picks for
/// the model QBER. Failed frames are discarded, which the table's α already
/// accounts for through `1 - FER`.
pub fn simulate_link(params: &LinkParams, table: &AlphaTable, distances: &[f64]) -> Result<SimReport> {
    if distances.is_empty() {
        return Err(Error::invalid("no distances to simulate"));
    }
    if distances.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("distances must be increasing"));
    }
    let rows = distances
        .iter()
        .map(|&d| {
            let obs = link_observables(params, d)?;
            let row = match table.select(obs.qber) {
                Some(Selection {
                    width, alpha, fer, ..
                }) => SimRow {
                    distance_km: d,
                    qber: obs.qber,
                    width: Some(width),
                    fer,
                    secure_ratio: alpha,
                    sifted_bps: obs.sifted_rate_bps,
                    secure_bps: obs.sifted_rate_bps * alpha,
                },
                None => SimRow {
                    distance_km: d,
                    qber: obs.qber,
                    width: None,
                    fer: 1.0,
                    secure_ratio: 0.0,
                    sifted_bps: obs.sifted_rate_bps,
                    secure_bps: 0.0,
                },
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport { rows })
}

/// Frame-level run at one distance compared with the table's prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCheck {
    pub distance_km: f64,
    pub qber: f64,
    pub width: usize,
    pub predicted_ratio: f64,
    pub predicted_fer: f64,
    pub measured: FerEstimate,
    /// `(1 - FER) * EER` from the frames actually decoded.
    pub measured_ratio: f64,
}

impl FrameCheck {
    /// The table's FER lies inside the 95% interval of the frame run.
    pub fn consistent(&self) -> bool {
        (self.measured.ci_low..=self.measured.ci_high).contains(&self.predicted_fer)
    }
}

/// Samples real frames at the model QBER, decodes them with the width the
/// table chose, and discards failures. Returns `None` when the table finds
/// no feasible width for this distance.
pub fn frame_level_check(
    matrix: &ParityMatrix,
    params: &LinkParams,
    table: &AlphaTable,
    distance_km: f64,
    frames: u64,
    seed: u64,
    decoder: &DecoderConfig,
) -> Result<Option<FrameCheck>> {
    let obs = link_observables(params, distance_km)?;
    let Some(sel) = table.select(obs.qber) else {
        return Ok(None);
    };
    let prefix = matrix.prefix(sel.width)?;
    let run_seed = seed::derive_seed(seed, &[distance_km.to_bits()]);
    let measured = estimate_fer(&prefix, obs.qber, frames, run_seed, decoder)?;
    Ok(Some(FrameCheck {
        distance_km,
        qber: obs.qber,
        width: sel.width,
        predicted_ratio: sel.alpha,
        predicted_fer: sel.fer,
        measured_ratio: (1.0 - measured.point) * prefix.rate(),
        measured,
    }))
}
