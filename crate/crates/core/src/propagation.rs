//! Channel coefficient between two antennas: free-space line of sight plus
//! single-bounce contributions from point scatterers and planar reflectors.
//!
//! Every leg uses the Friis amplitude `λ / (4π d)` and the phase
//! `-2π d / λ`. Multipath is single bounce only.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::analysis::unwrap_phase;
use crate::error::{invalid, Result};
use crate::geometry::Vec3;
use crate::scenario::{Carrier, ObjectKind, Scenario};
use crate::trace::Trace;

/// Positions of every antenna and object at one step. Objects are stored in
/// scenario order, already translated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeometryState {
    pub antennas: BTreeMap<String, Vec3>,
    pub objects: Vec<ObjectKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Los,
    Scatter,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathContribution {
    pub kind: PathKind,
    pub path_length: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl PathContribution {
    fn new(kind: PathKind, path_length: f64, scale: f64, carrier: &Carrier) -> Self {
        let lambda = carrier.wavelength();
        Self {
            kind,
            path_length,
            amplitude: scale * lambda / (4.0 * PI * path_length),
            phase: -TAU * path_length / lambda,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

fn los_path(pa: Vec3, pb: Vec3, carrier: &Carrier, gains_dbi: (f64, f64)) -> Result<PathContribution> {
    let d = pa.distance(pb);
    if !(d > 0.0) {
        return invalid(format!("coincident antenna positions {pa} and {pb}"));
    }
    let g = 10f64.powf((gains_dbi.0 + gains_dbi.1) / 20.0);
    Ok(PathContribution::new(PathKind::Los, d, g, carrier))
}

/// Free-space line-of-sight coefficient `g·λ/(4πd)·exp(-i2πd/λ)`.
pub fn los_channel(pa: Vec3, pb: Vec3, carrier: &Carrier, gains_dbi: (f64, f64)) -> Result<Complex64> {
    los_path(pa, pb, carrier, gains_dbi).map(|p| p.value())
}

fn scatter_path(pa: Vec3, s: Vec3, pb: Vec3, carrier: &Carrier, reflectivity: f64) -> Result<PathContribution> {
    let d1 = pa.distance(s);
    let d2 = s.distance(pb);
    if !(d1 > 0.0 && d2 > 0.0) {
        return invalid(format!("scatterer at {s} coincides with an antenna"));
    }
    Ok(PathContribution::new(PathKind::Scatter, d1 + d2, reflectivity, carrier))
}

/// Single bounce off a point scatterer with reflectivity Γ, treated as one
/// free-space leg of length `d1 + d2`.
pub fn point_scatter_contribution(
    pa: Vec3,
    s: Vec3,
    pb: Vec3,
    carrier: &Carrier,
    reflectivity: f64,
) -> Result<Complex64> {
    scatter_path(pa, s, pb, carrier, reflectivity).map(|p| p.value())
}

fn image_path(
    pa: Vec3,
    point: Vec3,
    normal: Vec3,
    pb: Vec3,
    carrier: &Carrier,
    reflectivity: f64,
) -> Result<PathContribution> {
    let ha = (pa - point).dot(normal);
    let hb = (pb - point).dot(normal);
    if !(ha * hb > 0.0) {
        return invalid(format!(
            "antennas at {pa} and {pb} are not strictly on the same side of the plane through {point}"
        ));
    }
    let image = pa.mirror(point, normal);
    let d = image.distance(pb);
    Ok(PathContribution::new(PathKind::Image, d, reflectivity, carrier))
}

/// Reflection off an infinite plane via the image source: Γ times the
/// line-of-sight channel from the mirrored `pa` to `pb`.
pub fn plane_image_contribution(
    pa: Vec3,
    plane: (Vec3, Vec3),
    pb: Vec3,
    carrier: &Carrier,
    reflectivity: f64,
) -> Result<Complex64> {
    image_path(pa, plane.0, plane.1, pb, carrier, reflectivity).map(|p| p.value())
}

/// All propagation paths between antennas `a` and `b`, line of sight first.
pub fn path_contributions(
    state: &GeometryState,
    scenario: &Scenario,
    a: &str,
    b: &str,
) -> Result<Vec<PathContribution>> {
    let lookup = |id: &str| -> Result<(Vec3, f64)> {
        let pos = state.antennas.get(id);
        let ant = scenario.antenna(id);
        match (pos, ant) {
            (Some(p), Some(ant)) => Ok((*p, ant.gain_dbi)),
            _ => invalid(format!("antenna '{id}' missing from geometry or scenario")),
        }
    };
    let (pa, ga) = lookup(a)?;
    let (pb, gb) = lookup(b)?;
    if state.objects.len() != scenario.objects.len() {
        return invalid("geometry state and scenario disagree on the number of objects");
    }
    let carrier = &scenario.carrier;

    let mut paths = Vec::with_capacity(1 + state.objects.len());
    paths.push(los_path(pa, pb, carrier, (ga, gb))?);
    for obj in &state.objects {
        paths.push(match *obj {
            ObjectKind::PointScatterer {
                position,
                reflectivity,
            } => scatter_path(pa, position, pb, carrier, reflectivity)?,
            ObjectKind::PlaneReflector {
                point,
                normal,
                reflectivity,
            } => image_path(pa, point, normal, pb, carrier, reflectivity)?,
        });
    }
    Ok(paths)
}

/// Channel between any two antennas of the scenario.
pub fn total_channel_between(
    state: &GeometryState,
    scenario: &Scenario,
    a: &str,
    b: &str,
) -> Result<Complex64> {
    Ok(path_contributions(state, scenario, a, b)?
        .iter()
        .map(PathContribution::value)
        .sum())
}

/// Channel between the scenario's tx and rx antennas.
pub fn total_channel(state: &GeometryState, scenario: &Scenario) -> Result<Complex64> {
    total_channel_between(state, scenario, &scenario.tx_id, &scenario.rx_id)
}

/// Time derivative of the unwrapped phase, in Hz. One value per pair of
/// consecutive samples.
pub fn instantaneous_frequency(trace: &Trace) -> Result<Vec<f64>> {
    let samples = trace.samples();
    if samples.len() < 2 {
        return invalid("instantaneous frequency needs at least two samples");
    }
    let phase = unwrap_phase(&trace.phase_wrapped());
    samples
        .windows(2)
        .zip(phase.windows(2))
        .map(|(s, p)| {
            let dt = s[1].time - s[0].time;
            if !(dt > 0.0) {
                return invalid(format!(
                    "timestamps of steps {} and {} do not increase",
                    s[0].step_index, s[1].step_index
                ));
            }
            Ok((p[1] - p[0]) / (TAU * dt))
        })
        .collect()
}
