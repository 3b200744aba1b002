//! Channel traces and their CSV representation.
//!
//! A trace file starts with `#`-prefixed metadata lines (`label`,
//! `scenario_digest`, `wavelength_m`), followed by the mandatory header
//!
//! ```text
//! step_index,time_s,moved_distance_m,moved_distance_lambda,h_re,h_im,mag_db,phase_wrapped_rad,phase_unwrapped_rad
//! ```
//!
//! and one row per sample. Floats carry 17 significant digits so a
//! write/read cycle is lossless. The derived columns (`mag_db`, phases,
//! `moved_distance_lambda`) are recomputed from `h_re`/`h_im` on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::analysis::{to_db, unwrap_phase, wrap_phase_unchecked};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "step_index,time_s,moved_distance_m,moved_distance_lambda,h_re,h_im,mag_db,phase_wrapped_rad,phase_unwrapped_rad";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub step_index: usize,
    /// Seconds since the first measurement.
    pub time: f64,
    /// Mount displacement of the mobile antenna along T, meters.
    pub moved_distance: f64,
    pub h: Complex64,
}

/// Ordered, gapless sequence of channel samples from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    scenario_digest: String,
    strategy_label: String,
    wavelength: f64,
    samples: Vec<ChannelSample>,
}

impl Trace {
    /// Rejects empty traces, index gaps, non-increasing time and non-finite
    /// coefficients.
    pub fn new(
        scenario_digest: impl Into<String>,
        strategy_label: impl Into<String>,
        wavelength: f64,
        samples: Vec<ChannelSample>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("trace has no samples".into()));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be > 0, got {wavelength}"
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            check_sample(s, i.checked_sub(1).map(|j| &samples[j]))
                .map_err(Error::InvalidArgument)?;
        }
        Ok(Self {
            scenario_digest: scenario_digest.into(),
            strategy_label: strategy_label.into(),
            wavelength,
            samples,
        })
    }

    pub fn scenario_digest(&self) -> &str {
        &self.scenario_digest
    }

    pub fn strategy_label(&self) -> &str {
        &self.strategy_label
    }

    pub fn set_strategy_label(&mut self, label: impl Into<String>) {
        self.strategy_label = label.into();
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn samples(&self) -> &[ChannelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.h).collect()
    }

    pub fn mag_db(&self) -> Vec<f64> {
        self.samples.iter().map(|s| to_db(s.h)).collect()
    }

    pub fn phase_wrapped(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| wrap_phase_unchecked(s.h.arg()))
            .collect()
    }

    pub fn phase_unwrapped(&self) -> Vec<f64> {
        unwrap_phase(&self.phase_wrapped())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# label: {}", self.strategy_label)?;
        writeln!(w, "# scenario_digest: {}", self.scenario_digest)?;
        writeln!(w, "# wavelength_m: {:.16e}", self.wavelength)?;
        writeln!(w, "{CSV_HEADER}")?;
        let mag = self.mag_db();
        let wrapped = self.phase_wrapped();
        let unwrapped = unwrap_phase(&wrapped);
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.step_index,
                s.time,
                s.moved_distance,
                s.moved_distance / self.wavelength,
                s.h.re,
                s.h.im,
                mag[i],
                wrapped[i],
                unwrapped[i],
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    /// Parses a trace. Errors carry the 1-based line number.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut label = String::new();
        let mut digest = String::new();
        let mut wavelength: Option<f64> = None;
        let mut header_seen = false;
        let mut samples: Vec<ChannelSample> = Vec::new();
        // Fallback when no wavelength metadata is present.
        let mut ratio: Option<f64> = None;

        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            let err = |message: String| Error::Parse {
                line: lineno,
                message,
            };

            if !header_seen {
                if let Some(meta) = line.strip_prefix('#') {
                    let (key, value) = meta
                        .split_once(':')
                        .ok_or_else(|| err(format!("malformed metadata line '{line}'")))?;
                    let value = value.trim();
                    match key.trim() {
                        "label" => label = value.to_string(),
                        "scenario_digest" => digest = value.to_string(),
                        "wavelength_m" => {
                            wavelength = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(format!("bad wavelength '{value}'")))?,
                            )
                        }
                        other => return Err(err(format!("unknown metadata key '{other}'"))),
                    }
                    continue;
                }
                if line.trim() != CSV_HEADER {
                    return Err(err(format!("expected header '{CSV_HEADER}'")));
                }
                header_seen = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }

            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(err(format!("expected 9 columns, found {}", fields.len())));
            }
            let num = |idx: usize, name: &str| -> Result<f64> {
                fields[idx]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad {name} '{}'", fields[idx])))
            };
            let step_index: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad step_index '{}'", fields[0])))?;
            let sample = ChannelSample {
                step_index,
                time: num(1, "time_s")?,
                moved_distance: num(2, "moved_distance_m")?,
                h: Complex64::new(num(4, "h_re")?, num(5, "h_im")?),
            };
            let lambda_units = num(3, "moved_distance_lambda")?;
            if ratio.is_none() && lambda_units != 0.0 {
                ratio = Some(sample.moved_distance / lambda_units);
            }
            check_sample(&sample, samples.last()).map_err(err)?;
            samples.push(sample);
        }

        if !header_seen {
            return Err(Error::Parse {
                line: 0,
                message: "missing header".into(),
            });
        }
        if samples.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "trace has no samples".into(),
            });
        }
        let wavelength = wavelength.or(ratio).ok_or(Error::Parse {
            line: 0,
            message: "no wavelength metadata and no movement to infer it from".into(),
        })?;
        Trace::new(digest, label, wavelength, samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }
}

fn check_sample(s: &ChannelSample, prev: Option<&ChannelSample>) -> std::result::Result<(), String> {
    if !(s.h.re.is_finite() && s.h.im.is_finite()) {
        return Err(format!("step {}: channel coefficient is not finite", s.step_index));
    }
    if !s.time.is_finite() || !s.moved_distance.is_finite() {
        return Err(format!("step {}: time and distance must be finite", s.step_index));
    }
    if let Some(p) = prev {
        if s.step_index != p.step_index + 1 {
            return Err(format!(
                "step_index gap: expected {}, found {}",
                p.step_index + 1,
                s.step_index
            ));
        }
        if !(s.time > p.time) {
            return Err(format!(
                "step {}: time {} does not increase past {}",
                s.step_index, s.time, p.time
            ));
        }
    }
    Ok(())
}
