//! Scenario description: carrier, antennas, trajectory, environment and noise.
//!
//! All lengths are meters. Values normalized to the wavelength only appear in
//! output (trace CSV, plots).

use std::collections::HashSet;
use std::fmt;

use crate::error::{invalid, Result};
use crate::geometry::Vec3;
use crate::motion::{antenna_factor, object_factor, Strategy};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier used by the default scenarios (2.45 GHz ISM band).
pub const DEFAULT_FREQUENCY_HZ: f64 = 2.45e9;

/// Initial tx–rx separation of the default scenarios. Puts the free-space
/// channel at about -43.0 dB.
pub const DEFAULT_SEPARATION_M: f64 = 1.375;

/// Trajectory length of the default scenarios (about 14.56 wavelengths). The
/// uncompensated magnitude then spans about 7.22 dB peak-to-peak.
pub const DEFAULT_TRAJECTORY_M: f64 = 1.782;

/// Default sampling density along the trajectory, in wavelengths.
pub const DEFAULT_STEP_LAMBDA: f64 = 0.05;

/// Seed used whenever the caller does not provide one.
pub const DEFAULT_SEED: u64 = 2450;

const UNIT_TOLERANCE: f64 = 1e-12;
const ORIGIN_TOLERANCE: f64 = 1e-9;

/// Wavelength in a homogeneous medium with refractive index `medium_index`.
pub fn wavelength_of(frequency_hz: f64, medium_index: f64) -> Result<f64> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return invalid(format!("frequency must be positive and finite, got {frequency_hz}"));
    }
    if !(medium_index.is_finite() && medium_index >= 1.0) {
        return invalid(format!("medium index must be >= 1, got {medium_index}"));
    }
    Ok(SPEED_OF_LIGHT / (medium_index * frequency_hz))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Carrier {
    frequency: f64,
    medium_index: f64,
    wavelength: f64,
}

impl Carrier {
    pub fn new(frequency_hz: f64, medium_index: f64) -> Result<Self> {
        let wavelength = wavelength_of(frequency_hz, medium_index)?;
        Ok(Self {
            frequency: frequency_hz,
            medium_index,
            wavelength,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn medium_index(&self) -> f64 {
        self.medium_index
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Phase slope 2π/λ in rad/m.
    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength
    }
}

impl Default for Carrier {
    fn default() -> Self {
        Carrier::new(DEFAULT_FREQUENCY_HZ, 1.0).expect("default carrier is valid")
    }
}

/// How an antenna or object moves while the trajectory is executed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MotionAssignment {
    #[default]
    Static,
    /// Translates along T together with the mobile antenna.
    AlongT,
    /// Translates along T by `factor` times the mobile antenna's displacement.
    AlongTScaled(f64),
}

impl MotionAssignment {
    pub fn factor(self) -> f64 {
        match self {
            MotionAssignment::Static => 0.0,
            MotionAssignment::AlongT => 1.0,
            MotionAssignment::AlongTScaled(f) => f,
        }
    }
}

impl fmt::Display for MotionAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionAssignment::Static => f.write_str("static"),
            MotionAssignment::AlongT => f.write_str("along_T"),
            MotionAssignment::AlongTScaled(k) => write!(f, "along_T_scaled({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Antenna {
    pub id: String,
    pub initial_position: Vec3,
    pub gain_dbi: f64,
    /// Only consulted for antennas other than tx and rx; the strategy decides
    /// how those two move.
    pub motion: MotionAssignment,
}

impl Antenna {
    pub fn isotropic(id: impl Into<String>, position: Vec3) -> Self {
        Self {
            id: id.into(),
            initial_position: position,
            gain_dbi: 0.0,
            motion: MotionAssignment::Static,
        }
    }
}

/// Linear trajectory T of the mobile antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub origin: Vec3,
    pub direction: Vec3,
    pub total_length: f64,
    pub step_length: f64,
}

impl Trajectory {
    /// Index of the last measurement position; positions are `0..=last_step()`.
    pub fn last_step(&self) -> usize {
        // Tolerate representation error when the length is a whole number of steps.
        (self.total_length / self.step_length * (1.0 + 1e-12)).floor() as usize
    }

    pub fn sample_count(&self) -> usize {
        self.last_step() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectKind {
    PointScatterer {
        position: Vec3,
        reflectivity: f64,
    },
    /// Infinite planar reflector through `point` with unit `normal`.
    PlaneReflector {
        point: Vec3,
        normal: Vec3,
        reflectivity: f64,
    },
}

impl ObjectKind {
    pub fn reflectivity(&self) -> f64 {
        match *self {
            ObjectKind::PointScatterer { reflectivity, .. }
            | ObjectKind::PlaneReflector { reflectivity, .. } => reflectivity,
        }
    }

    /// Same object moved by `offset`. Plane normals are unchanged.
    pub fn translated(&self, offset: Vec3) -> ObjectKind {
        match *self {
            ObjectKind::PointScatterer {
                position,
                reflectivity,
            } => ObjectKind::PointScatterer {
                position: position + offset,
                reflectivity,
            },
            ObjectKind::PlaneReflector {
                point,
                normal,
                reflectivity,
            } => ObjectKind::PlaneReflector {
                point: point + offset,
                normal,
                reflectivity,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentObject {
    pub label: String,
    pub kind: ObjectKind,
    pub motion: MotionAssignment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Bound of the uniform positioning jitter along T, meters.
    pub positioning_accuracy: f64,
    pub settling_epsilon: f64,
    pub settling_tau: f64,
    pub seed: u64,
}

impl NoiseConfig {
    /// No positioning error, no settling residue.
    pub fn noiseless() -> Self {
        Self {
            positioning_accuracy: 0.0,
            ..Self::default()
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            positioning_accuracy: 2.0e-5,
            settling_epsilon: 0.0,
            settling_tau: 0.04,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub carrier: Carrier,
    pub antennas: Vec<Antenna>,
    /// The mobile antenna A.
    pub tx_id: String,
    /// The partner antenna B.
    pub rx_id: String,
    pub trajectory: Trajectory,
    pub objects: Vec<EnvironmentObject>,
    pub noise: NoiseConfig,
    pub dwell_time: f64,
    pub speed: f64,
}

impl Scenario {
    /// Two isotropic antennas in free space at 2.45 GHz. A starts at the
    /// origin and moves along +x, away from B.
    pub fn default_free_space() -> Self {
        let carrier = Carrier::default();
        Scenario {
            carrier,
            antennas: vec![
                Antenna::isotropic("A", Vec3::ZERO),
                Antenna::isotropic("B", Vec3::new(-DEFAULT_SEPARATION_M, 0.0, 0.0)),
            ],
            tx_id: "A".into(),
            rx_id: "B".into(),
            trajectory: Trajectory {
                origin: Vec3::ZERO,
                direction: Vec3::new(1.0, 0.0, 0.0),
                total_length: DEFAULT_TRAJECTORY_M,
                step_length: DEFAULT_STEP_LAMBDA * carrier.wavelength(),
            },
            objects: Vec::new(),
            noise: NoiseConfig::default(),
            dwell_time: 0.2,
            speed: 0.1,
        }
    }

    /// Free-space default plus three weak static scatterers standing in for
    /// the uncovered metal of the positioners and cables.
    pub fn default_clutter() -> Self {
        let scatter = |label: &str, p: Vec3, g: f64| EnvironmentObject {
            label: label.into(),
            kind: ObjectKind::PointScatterer {
                position: p,
                reflectivity: g,
            },
            motion: MotionAssignment::Static,
        };
        let mut s = Self::default_free_space();
        s.objects = vec![
            scatter("rail_a", Vec3::new(0.9, 0.35, -0.51), 0.15),
            scatter("rail_b", Vec3::new(-0.6, -0.35, -0.51), 0.15),
            scatter("cable", Vec3::new(0.2, 0.8, -0.3), 0.1),
        ];
        s
    }

    pub fn antenna(&self, id: &str) -> Option<&Antenna> {
        self.antennas.iter().find(|a| a.id == id)
    }

    pub fn tx(&self) -> Option<&Antenna> {
        self.antenna(&self.tx_id)
    }

    pub fn rx(&self) -> Option<&Antenna> {
        self.antenna(&self.rx_id)
    }

    /// Short stable identifier of this scenario's content.
    pub fn digest(&self) -> String {
        crate::config::scenario_digest(self)
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self::default_free_space()
    }
}

/// One broken rule, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every scenario invariant. An empty list means the scenario can be
/// simulated under every strategy without hitting a propagation singularity.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut push = |field: String, rule: String| v.push(Violation::new(field, rule));

    let c = &s.carrier;
    if !(c.frequency.is_finite() && c.frequency > 0.0) {
        push("carrier.frequency_hz".into(), "must be > 0".into());
    }
    if !(c.medium_index.is_finite() && c.medium_index >= 1.0) {
        push("carrier.medium_index".into(), "must be >= 1".into());
    }
    let expected = SPEED_OF_LIGHT / (c.medium_index * c.frequency);
    if !(c.wavelength > 0.0 && ((c.wavelength - expected) / expected).abs() <= 1e-12) {
        push(
            "carrier.wavelength".into(),
            "must equal c0 / (medium_index * frequency)".into(),
        );
    }

    if s.antennas.len() < 2 {
        push("antennas".into(), "at least two antennas required".into());
    }
    let mut seen = HashSet::new();
    for a in &s.antennas {
        let f = format!("antenna.{}", a.id);
        if a.id.is_empty() {
            push("antenna.id".into(), "must not be empty".into());
        }
        if !seen.insert(a.id.as_str()) {
            push(format!("{f}.id"), "must be unique".into());
        }
        if !a.initial_position.is_finite() {
            push(format!("{f}.position"), "must be finite".into());
        }
        if !a.gain_dbi.is_finite() {
            push(format!("{f}.gain_dbi"), "must be finite".into());
        }
        if !a.motion.factor().is_finite() {
            push(format!("{f}.motion"), "factor must be finite".into());
        }
    }

    if s.tx_id == s.rx_id {
        push("run.tx/run.rx".into(), "tx_id and rx_id must differ".into());
    }
    let tx = s.tx();
    let rx = s.rx();
    if tx.is_none() {
        push("run.tx".into(), format!("no antenna with id '{}'", s.tx_id));
    }
    if rx.is_none() {
        push("run.rx".into(), format!("no antenna with id '{}'", s.rx_id));
    }

    let t = &s.trajectory;
    if !t.origin.is_finite() {
        push("trajectory.origin".into(), "must be finite".into());
    }
    if !t.direction.is_finite() || (t.direction.norm() - 1.0).abs() > UNIT_TOLERANCE {
        push("trajectory.direction".into(), "must be a unit vector".into());
    }
    if !(t.total_length.is_finite() && t.total_length > 0.0) {
        push("trajectory.total_length_m".into(), "must be > 0".into());
    }
    if !(t.step_length.is_finite() && t.step_length > 0.0) {
        push("trajectory.step_length_m".into(), "must be > 0".into());
    } else if t.step_length > t.total_length {
        push(
            "trajectory.step_length_m".into(),
            "must not exceed total_length_m".into(),
        );
    }
    if let Some(tx) = tx {
        if tx.initial_position.distance(t.origin) > ORIGIN_TOLERANCE {
            push(
                "trajectory.origin".into(),
                format!("must coincide with the position of tx antenna '{}'", tx.id),
            );
        }
    }

    let mut labels = HashSet::new();
    for o in &s.objects {
        let f = format!("object.{}", o.label);
        if !labels.insert(o.label.as_str()) {
            push(format!("{f}"), "label must be unique".into());
        }
        let g = o.kind.reflectivity();
        if !(0.0..=1.0).contains(&g) {
            push(format!("{f}.reflectivity"), "must lie in [0, 1]".into());
        }
        match o.kind {
            ObjectKind::PointScatterer { position, .. } => {
                if !position.is_finite() {
                    push(format!("{f}.position"), "must be finite".into());
                }
            }
            ObjectKind::PlaneReflector { point, normal, .. } => {
                if !point.is_finite() {
                    push(format!("{f}.point"), "must be finite".into());
                }
                if !normal.is_finite() || (normal.norm() - 1.0).abs() > UNIT_TOLERANCE {
                    push(format!("{f}.normal"), "must be a unit vector".into());
                }
            }
        }
        if !o.motion.factor().is_finite() {
            push(format!("{f}.motion"), "factor must be finite".into());
        }
    }

    let n = &s.noise;
    for (name, val) in [
        ("noise.positioning_accuracy_m", n.positioning_accuracy),
        ("noise.settling_epsilon", n.settling_epsilon),
        ("noise.settling_tau_s", n.settling_tau),
    ] {
        if !(val.is_finite() && val >= 0.0) {
            push(name.into(), "must be >= 0".into());
        }
    }
    if !(s.dwell_time.is_finite() && s.dwell_time >= 0.0) {
        push("run.dwell_time_s".into(), "must be >= 0".into());
    }
    if !(s.speed.is_finite() && s.speed > 0.0) {
        push("run.speed_mps".into(), "must be > 0".into());
    }
    if let (Some(tx), Some(rx)) = (tx, rx) {
        if tx.id != rx.id && tx.initial_position.distance(rx.initial_position) <= 0.0 {
            push(
                "antenna positions".into(),
                "initial tx-rx distance must be > 0".into(),
            );
        }
    }

    // Sweep checks only make sense once the basic shape is sound.
    if v.is_empty() {
        v.extend(sweep_violations(s));
    }
    v
}

/// Keeps every antenna clear of every other antenna, scatterer and plane over
/// the whole trajectory, under every strategy, including positioning jitter.
fn sweep_violations(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = &s.trajectory;
    let span = t.last_step() as f64 * t.step_length;
    let clearance = 2.0 * s.noise.positioning_accuracy + 1e-9;
    let dir = t.direction;

    for strategy in Strategy::ALL {
        let k: Vec<f64> = s
            .antennas
            .iter()
            .map(|a| antenna_factor(s, strategy, a))
            .collect();

        for i in 0..s.antennas.len() {
            for j in (i + 1)..s.antennas.len() {
                let (a, b) = (&s.antennas[i], &s.antennas[j]);
                let d = min_sweep_distance(
                    a.initial_position - b.initial_position,
                    dir * (k[i] - k[j]),
                    span,
                );
                if d <= clearance {
                    out.push(Violation::new(
                        format!("antenna.{}/antenna.{}", a.id, b.id),
                        format!("antennas come within {d:.3e} m under {}", strategy.name()),
                    ));
                }
            }
        }

        for o in &s.objects {
            let ko = object_factor(strategy, o);
            let mut plane_side: Option<f64> = None;
            for (a, &ka) in s.antennas.iter().zip(&k) {
                let rel = dir * (ka - ko);
                match o.kind {
                    ObjectKind::PointScatterer { position, .. } => {
                        let d = min_sweep_distance(a.initial_position - position, rel, span);
                        if d <= clearance {
                            out.push(Violation::new(
                                format!("object.{}.position", o.label),
                                format!(
                                    "antenna '{}' comes within {d:.3e} m under {}",
                                    a.id,
                                    strategy.name()
                                ),
                            ));
                        }
                    }
                    ObjectKind::PlaneReflector { point, normal, .. } => {
                        let h0 = (a.initial_position - point).dot(normal);
                        let h1 = h0 + rel.dot(normal) * span;
                        let side = h0.signum();
                        let ok = h0.abs() > clearance
                            && h1.abs() > clearance
                            && h0.signum() == h1.signum()
                            && plane_side.map_or(true, |p| p == side);
                        plane_side.get_or_insert(side);
                        if !ok {
                            out.push(Violation::new(
                                format!("object.{}", o.label),
                                format!(
                                    "antenna '{}' must stay strictly on the same side of the plane as the others under {}",
                                    a.id,
                                    strategy.name()
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| (&a.field, &a.rule).cmp(&(&b.field, &b.rule)));
    out.dedup();
    out
}

/// Minimum of |offset + rate·u| for u in [0, span].
fn min_sweep_distance(offset: Vec3, rate: Vec3, span: f64) -> f64 {
    let rr = rate.dot(rate);
    let u = if rr == 0.0 {
        0.0
    } else {
        (-offset.dot(rate) / rr).clamp(0.0, span)
    };
    (offset + rate * u).norm()
}
