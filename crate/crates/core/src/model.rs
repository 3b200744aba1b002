//! Channel models for antennas that keep a channel static.
//!
//! The simplest model holds the channel at its initial value,
//! `H(n) = H(n0)` (or `H(t) = H(t0)`). The noisy variant adds a zero-mean
//! residual `Z(n)`, drawn independently for every `n`, whose variance is
//! fixed for the static interval. `Z` acts in the dB-magnitude and phase
//! domains because its variances are given in dB² and rad². When the partner
//! antenna restarts its movement from a new position, a new `H(n0)` begins a
//! new interval; [`generate_interval_stationary`] produces such sequences.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{series_stats, to_db};
use crate::error::{invalid, Error, Result};
use crate::scenario::{wavelength_of, DEFAULT_FREQUENCY_HZ, DEFAULT_STEP_LAMBDA};
use crate::trace::{ChannelSample, Trace};

/// With-movement residual variances measured in the anechoic chamber.
pub const PARTNER_VAR_AMP_DB2: f64 = 0.5711;
pub const PARTNER_VAR_PHASE_RAD2: f64 = 0.0049;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticChannelModel {
    h0: Complex64,
    origin: usize,
}

impl StaticChannelModel {
    pub fn new(h0: Complex64, origin: usize) -> Result<Self> {
        if !(h0.re.is_finite() && h0.im.is_finite()) || h0.norm() == 0.0 {
            return invalid(format!("initial channel must be finite and non-zero, got {h0}"));
        }
        Ok(Self { h0, origin })
    }

    pub fn from_db_phase(h0_db: f64, phase: f64, origin: usize) -> Result<Self> {
        Self::new(Complex64::from_polar(10f64.powf(h0_db / 20.0), phase), origin)
    }

    pub fn h0(&self) -> Complex64 {
        self.h0
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn h0_db(&self) -> f64 {
        to_db(self.h0)
    }

    /// `H(n) = H(n0)`, whatever `n` is.
    pub fn eval(&self, _n: usize) -> Complex64 {
        self.h0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualDistribution {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualModel {
    var_amp: f64,
    var_phase: f64,
    distribution: ResidualDistribution,
}

impl ResidualModel {
    pub fn new(var_amp_db2: f64, var_phase_rad2: f64) -> Result<Self> {
        for (name, v) in [("amplitude", var_amp_db2), ("phase", var_phase_rad2)] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} variance must be >= 0, got {v}"));
            }
        }
        Ok(Self {
            var_amp: var_amp_db2,
            var_phase: var_phase_rad2,
            distribution: ResidualDistribution::Gaussian,
        })
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0).unwrap()
    }

    pub fn var_amp(&self) -> f64 {
        self.var_amp
    }

    pub fn var_phase(&self) -> f64 {
        self.var_phase
    }

    pub fn distribution(&self) -> ResidualDistribution {
        self.distribution
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.distribution {
            ResidualDistribution::Gaussian => {
                let a: f64 = rng.sample(StandardNormal);
                let p: f64 = rng.sample(StandardNormal);
                (a * self.var_amp.sqrt(), p * self.var_phase.sqrt())
            }
        }
    }
}

impl Default for ResidualModel {
    fn default() -> Self {
        Self::new(PARTNER_VAR_AMP_DB2, PARTNER_VAR_PHASE_RAD2).unwrap()
    }
}

/// One draw of `H(n0) + Z(n)`. With both variances zero this is exactly `h0`
/// and no randomness is consumed.
pub fn sample_noisy<R: Rng + ?Sized>(
    model: &StaticChannelModel,
    residual: &ResidualModel,
    rng: &mut R,
) -> Complex64 {
    if residual.var_amp == 0.0 && residual.var_phase == 0.0 {
        return model.h0;
    }
    let (za, zp) = residual.draw(rng);
    let mag_db = model.h0_db() + za;
    Complex64::from_polar(10f64.powf(mag_db / 20.0), model.h0.arg() + zp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum H0Source {
    Given(Complex64),
    /// Ask the generator's callback for a fresh initial channel.
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: usize,
    pub length: usize,
    pub h0: H0Source,
}

/// Contiguous static intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPlan {
    pub intervals: Vec<Interval>,
}

impl IntervalPlan {
    pub fn single(h0: Complex64, length: usize) -> Self {
        Self {
            intervals: vec![Interval {
                start: 0,
                length,
                h0: H0Source::Given(h0),
            }],
        }
    }

    /// `count` back-to-back intervals of `length` samples each; the first
    /// uses `h0`, the rest are drawn.
    pub fn equal(h0: Complex64, count: usize, length: usize) -> Self {
        Self {
            intervals: (0..count)
                .map(|i| Interval {
                    start: i * length,
                    length,
                    h0: if i == 0 { H0Source::Given(h0) } else { H0Source::Draw },
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() {
            return invalid("interval plan is empty");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if iv.length == 0 {
                return invalid(format!("interval {i} has zero length"));
            }
            if i > 0 {
                let prev = &self.intervals[i - 1];
                if iv.start != prev.start + prev.length {
                    return invalid(format!(
                        "interval {i} starts at {} but the previous one ends at {}",
                        iv.start,
                        prev.start + prev.length
                    ));
                }
            }
            if let H0Source::Given(h) = iv.h0 {
                StaticChannelModel::new(h, iv.start)?;
            }
        }
        Ok(())
    }

    pub fn total_len(&self) -> usize {
        self.intervals.iter().map(|i| i.length).sum()
    }
}

/// Spatial and temporal spacing assigned to generated samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub wavelength: f64,
    pub step_length: f64,
    pub time_step: f64,
}

impl Default for SampleGrid {
    /// Same spacing as the default simulated campaign.
    fn default() -> Self {
        let wavelength = wavelength_of(DEFAULT_FREQUENCY_HZ, 1.0).unwrap();
        let step_length = DEFAULT_STEP_LAMBDA * wavelength;
        Self {
            wavelength,
            step_length,
            time_step: step_length / 0.1 + 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTrace {
    pub trace: Trace,
    /// Initial channel actually used by each interval.
    pub interval_h0: Vec<Complex64>,
}

/// Label given to generated traces.
pub const MODEL_LABEL: &str = "interval-stationary model";

/// Samples an interval-stationary channel: inside each interval every sample
/// is an independent [`sample_noisy`] draw around that interval's `h0`.
pub fn generate_interval_stationary<R, F>(
    plan: &IntervalPlan,
    residual: &ResidualModel,
    grid: &SampleGrid,
    rng: &mut R,
    mut draw_h0: F,
) -> Result<GeneratedTrace>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Complex64,
{
    plan.validate()?;
    let mut samples = Vec::with_capacity(plan.total_len());
    let mut interval_h0 = Vec::with_capacity(plan.intervals.len());
    for iv in &plan.intervals {
        let h0 = match iv.h0 {
            H0Source::Given(h) => h,
            H0Source::Draw => draw_h0(rng),
        };
        let model = StaticChannelModel::new(h0, iv.start)?;
        interval_h0.push(h0);
        for n in iv.start..iv.start + iv.length {
            samples.push(ChannelSample {
                step_index: n,
                time: n as f64 * grid.time_step,
                moved_distance: n as f64 * grid.step_length,
                h: sample_noisy(&model, residual, rng),
            });
        }
    }
    let trace = Trace::new("model", MODEL_LABEL, grid.wavelength, samples)?;
    Ok(GeneratedTrace { trace, interval_h0 })
}

/// Estimates the static channel and the residual variances of a trace:
/// `|h0|` in dB is the mean dB magnitude, `arg h0` the mean unwrapped phase,
/// variances are unbiased.
pub fn fit(trace: &Trace) -> Result<(StaticChannelModel, ResidualModel)> {
    if trace.len() < 2 {
        return invalid(format!("fitting needs at least two samples, got {}", trace.len()));
    }
    let mag = series_stats(&trace.mag_db())?;
    let phase = series_stats(&trace.phase_unwrapped())?;
    let origin = trace.samples()[0].step_index;
    let model = StaticChannelModel::from_db_phase(mag.mean, phase.mean, origin)?;
    Ok((model, ResidualModel::new(mag.var, phase.var)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub mean_amp_residual: f64,
    pub mean_phase_residual: f64,
    pub lag1_amp: f64,
    pub lag1_phase: f64,
    /// Share of samples with |phase residual| above three fitted standard deviations.
    pub phase_outlier_fraction: f64,
}

/// Lag-1 autocorrelation about the series mean; 0 for a constant series.
pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / den
}

/// How well a fitted static model explains a trace. Structured residuals
/// (high lag-1 autocorrelation) mean the channel was not static.
pub fn residual_diagnostics(
    trace: &Trace,
    fitted: &(StaticChannelModel, ResidualModel),
) -> ResidualReport {
    let (model, residual) = fitted;
    let amp: Vec<f64> = trace.mag_db().iter().map(|m| m - model.h0_db()).collect();
    let mut phase: Vec<f64> = trace
        .phase_unwrapped()
        .iter()
        .map(|p| p - model.h0().arg())
        .collect();
    // The unwrapped series may sit a whole number of turns away from arg(h0).
    let turns = (phase.iter().sum::<f64>() / phase.len() as f64 / TAU).round();
    if turns != 0.0 {
        phase.iter_mut().for_each(|p| *p -= turns * TAU);
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let sigma = residual.var_phase.sqrt();
    let outliers = if sigma > 0.0 {
        phase.iter().filter(|p| p.abs() > 3.0 * sigma).count()
    } else {
        0
    };
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    ResidualReport {
        mean_amp_residual: clean(mean(&amp)),
        mean_phase_residual: clean(mean(&phase)),
        lag1_amp: lag1_autocorrelation(&amp),
        lag1_phase: lag1_autocorrelation(&phase),
        phase_outlier_fraction: outliers as f64 / phase.len() as f64,
    }
}

/// Model parameters in the key-value text format shared with scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub h0_db: f64,
    pub h0_phase_rad: f64,
    pub var_amp_db2: f64,
    pub var_phase_rad2: f64,
}

impl ModelParams {
    pub fn from_models(model: &StaticChannelModel, residual: &ResidualModel) -> Self {
        Self {
            h0_db: model.h0_db(),
            h0_phase_rad: model.h0().arg(),
            var_amp_db2: residual.var_amp(),
            var_phase_rad2: residual.var_phase(),
        }
    }

    pub fn to_models(&self) -> Result<(StaticChannelModel, ResidualModel)> {
        Ok((
            StaticChannelModel::from_db_phase(self.h0_db, self.h0_phase_rad, 0)?,
            ResidualModel::new(self.var_amp_db2, self.var_phase_rad2)?,
        ))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("plain float table serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
