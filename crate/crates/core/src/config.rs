//! Scenario files.
//!
//! TOML-style key-value text with these sections (unknown keys are errors):
//!
//! ```toml
//! [carrier]
//! frequency_hz = 2.45e9
//! medium_index = 1.0            # optional, default 1
//!
//! [trajectory]
//! origin = [0.0, 0.0, 0.0]      # optional, default: tx position
//! direction = [1.0, 0.0, 0.0]
//! total_length_m = 1.782
//! step_length_m = 0.0061182     # optional, default 0.05 wavelengths
//!
//! [antenna.A]
//! position = [0.0, 0.0, 0.0]
//! gain_dbi = 0.0                # optional
//! motion = "static"             # static | along_T | along_T_scaled(<factor>)
//!
//! [object.rail]
//! kind = "point_scatterer"      # or plane_reflector with point + normal
//! position = [0.9, 0.35, -0.51]
//! reflectivity = 0.3
//! motion = "static"
//!
//! [noise]                       # optional section
//! positioning_accuracy_m = 2e-5
//! settling_epsilon = 0.0
//! settling_tau_s = 0.04
//! seed = 2450
//!
//! [run]
//! tx = "A"
//! rx = "B"
//! dwell_time_s = 0.2            # optional
//! speed_mps = 0.1               # optional
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scenario::{
    Antenna, Carrier, EnvironmentObject, MotionAssignment, NoiseConfig, ObjectKind, Scenario,
    Trajectory, DEFAULT_STEP_LAMBDA,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    carrier: CarrierSection,
    trajectory: TrajectorySection,
    antenna: BTreeMap<String, AntennaSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    object: BTreeMap<String, ObjectSection>,
    #[serde(default)]
    noise: NoiseSection,
    run: RunSection,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarrierSection {
    frequency_hz: f64,
    #[serde(default = "one")]
    medium_index: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectorySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<[f64; 3]>,
    direction: [f64; 3],
    total_length_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step_length_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntennaSection {
    position: [f64; 3],
    #[serde(default)]
    gain_dbi: f64,
    #[serde(default = "static_motion")]
    motion: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectSection {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<[f64; 3]>,
    reflectivity: f64,
    #[serde(default = "static_motion")]
    motion: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    #[serde(default = "default_accuracy")]
    positioning_accuracy_m: f64,
    #[serde(default)]
    settling_epsilon: f64,
    #[serde(default = "default_tau")]
    settling_tau_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self {
            positioning_accuracy_m: n.positioning_accuracy,
            settling_epsilon: n.settling_epsilon,
            settling_tau_s: n.settling_tau,
            seed: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    tx: String,
    rx: String,
    #[serde(default = "default_dwell")]
    dwell_time_s: f64,
    #[serde(default = "default_speed")]
    speed_mps: f64,
}

fn one() -> f64 {
    1.0
}
fn static_motion() -> String {
    "static".into()
}
fn default_accuracy() -> f64 {
    NoiseConfig::default().positioning_accuracy
}
fn default_tau() -> f64 {
    NoiseConfig::default().settling_tau
}
fn default_dwell() -> f64 {
    0.2
}
fn default_speed() -> f64 {
    0.1
}

fn parse_motion(key: &str, text: &str) -> Result<MotionAssignment> {
    let t = text.trim();
    match t {
        "static" => return Ok(MotionAssignment::Static),
        "along_T" => return Ok(MotionAssignment::AlongT),
        _ => {}
    }
    t.strip_prefix("along_T_scaled(")
        .and_then(|r| r.strip_suffix(')'))
        .and_then(|f| f.trim().parse::<f64>().ok())
        .map(MotionAssignment::AlongTScaled)
        .ok_or_else(|| {
            Error::Config(format!(
                "{key}: expected static, along_T or along_T_scaled(<factor>), got '{text}'"
            ))
        })
}

/// Parses a scenario file. Structural problems (syntax, unknown or missing
/// keys) are errors here; value rules are left to
/// [`validate_scenario`](crate::scenario::validate_scenario).
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let carrier = Carrier::new(file.carrier.frequency_hz, file.carrier.medium_index)
        .map_err(|e| Error::Config(format!("carrier: {e}")))?;

    let mut antennas = Vec::new();
    for (id, a) in &file.antenna {
        antennas.push(Antenna {
            id: id.clone(),
            initial_position: a.position.into(),
            gain_dbi: a.gain_dbi,
            motion: parse_motion(&format!("antenna.{id}.motion"), &a.motion)?,
        });
    }

    let mut objects = Vec::new();
    for (label, o) in &file.object {
        let key = |k: &str| format!("object.{label}.{k}");
        let missing = |k: &str| Error::Config(format!("{}: missing", key(k)));
        let kind = match o.kind.as_str() {
            "point_scatterer" => {
                if o.point.is_some() || o.normal.is_some() {
                    return Err(Error::Config(format!(
                        "{}: point scatterers take only position",
                        key("kind")
                    )));
                }
                ObjectKind::PointScatterer {
                    position: o.position.ok_or_else(|| missing("position"))?.into(),
                    reflectivity: o.reflectivity,
                }
            }
            "plane_reflector" => {
                if o.position.is_some() {
                    return Err(Error::Config(format!(
                        "{}: plane reflectors take point and normal",
                        key("kind")
                    )));
                }
                ObjectKind::PlaneReflector {
                    point: o.point.ok_or_else(|| missing("point"))?.into(),
                    normal: o.normal.ok_or_else(|| missing("normal"))?.into(),
                    reflectivity: o.reflectivity,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "{}: unknown kind '{other}'",
                    key("kind")
                )))
            }
        };
        objects.push(EnvironmentObject {
            label: label.clone(),
            kind,
            motion: parse_motion(&key("motion"), &o.motion)?,
        });
    }

    let tx_pos = file
        .antenna
        .get(&file.run.tx)
        .map(|a| Vec3::from(a.position))
        .unwrap_or_default();
    let t = &file.trajectory;
    let trajectory = Trajectory {
        origin: t.origin.map(Vec3::from).unwrap_or(tx_pos),
        direction: t.direction.into(),
        total_length: t.total_length_m,
        step_length: t
            .step_length_m
            .unwrap_or(DEFAULT_STEP_LAMBDA * carrier.wavelength()),
    };

    Ok(Scenario {
        carrier,
        antennas,
        tx_id: file.run.tx,
        rx_id: file.run.rx,
        trajectory,
        objects,
        noise: NoiseConfig {
            positioning_accuracy: file.noise.positioning_accuracy_m,
            settling_epsilon: file.noise.settling_epsilon,
            settling_tau: file.noise.settling_tau_s,
            seed: file.noise.seed.unwrap_or(crate::scenario::DEFAULT_SEED),
        },
        dwell_time: file.run.dwell_time_s,
        speed: file.run.speed_mps,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// Writes a scenario in the file format; [`parse_scenario`] reads it back
/// unchanged.
pub fn scenario_to_string(s: &Scenario) -> String {
    let file = ScenarioFile {
        carrier: CarrierSection {
            frequency_hz: s.carrier.frequency(),
            medium_index: s.carrier.medium_index(),
        },
        trajectory: TrajectorySection {
            origin: Some(s.trajectory.origin.to_array()),
            direction: s.trajectory.direction.to_array(),
            total_length_m: s.trajectory.total_length,
            step_length_m: Some(s.trajectory.step_length),
        },
        antenna: s
            .antennas
            .iter()
            .map(|a| {
                (
                    a.id.clone(),
                    AntennaSection {
                        position: a.initial_position.to_array(),
                        gain_dbi: a.gain_dbi,
                        motion: a.motion.to_string(),
                    },
                )
            })
            .collect(),
        object: s
            .objects
            .iter()
            .map(|o| {
                let section = match o.kind {
                    ObjectKind::PointScatterer {
                        position,
                        reflectivity,
                    } => ObjectSection {
                        kind: "point_scatterer".into(),
                        position: Some(position.to_array()),
                        point: None,
                        normal: None,
                        reflectivity,
                        motion: o.motion.to_string(),
                    },
                    ObjectKind::PlaneReflector {
                        point,
                        normal,
                        reflectivity,
                    } => ObjectSection {
                        kind: "plane_reflector".into(),
                        position: None,
                        point: Some(point.to_array()),
                        normal: Some(normal.to_array()),
                        reflectivity,
                        motion: o.motion.to_string(),
                    },
                };
                (o.label.clone(), section)
            })
            .collect(),
        noise: NoiseSection {
            positioning_accuracy_m: s.noise.positioning_accuracy,
            settling_epsilon: s.noise.settling_epsilon,
            settling_tau_s: s.noise.settling_tau,
            seed: Some(s.noise.seed),
        },
        run: RunSection {
            tx: s.tx_id.clone(),
            rx: s.rx_id.clone(),
            dwell_time_s: s.dwell_time,
            speed_mps: s.speed,
        },
    };
    toml::to_string(&file).expect("scenario serializes")
}

/// First 16 hex digits of the SHA-256 of the canonical scenario text.
pub fn scenario_digest(s: &Scenario) -> String {
    let hash = Sha256::digest(scenario_to_string(s).as_bytes());
    hash.iter().take(8).fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}
