//! Per-step antenna placement for each movement strategy, with positioning
//! jitter and the dwell-settling residue.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::geometry::Vec3;
use crate::propagation::GeometryState;
use crate::scenario::{Antenna, EnvironmentObject, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// A moves along T, B stays put.
    Uncompensated,
    /// B follows A along T.
    WithMovement,
    /// A's mount moves but A counter-moves so that its effective position is
    /// held. Idealized: the hold is perfect.
    CounterMovement,
    /// Nobody moves; the reference run.
    NoMovement,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Uncompensated,
        Strategy::WithMovement,
        Strategy::CounterMovement,
        Strategy::NoMovement,
    ];

    /// The three runs of the measurement campaign, in order.
    pub const TRIPLE: [Strategy; 3] = [
        Strategy::Uncompensated,
        Strategy::WithMovement,
        Strategy::NoMovement,
    ];

    /// Identifier used on the command line and in file names.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uncompensated => "uncompensated",
            Strategy::WithMovement => "with_movement",
            Strategy::CounterMovement => "counter_movement",
            Strategy::NoMovement => "no_movement",
        }
    }

    /// Row label used in traces and summary tables.
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Uncompensated => "regular",
            Strategy::WithMovement => "channel static partner antenna",
            Strategy::CounterMovement => "channel static antenna",
            Strategy::NoMovement => "no movement",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy '{s}'")))
    }
}

/// How far an antenna travels along T relative to the trajectory progress.
pub(crate) fn antenna_factor(s: &Scenario, strategy: Strategy, a: &Antenna) -> f64 {
    let tx = a.id == s.tx_id;
    let rx = a.id == s.rx_id;
    match strategy {
        Strategy::NoMovement => 0.0,
        Strategy::Uncompensated if tx => 1.0,
        Strategy::WithMovement if tx || rx => 1.0,
        Strategy::CounterMovement if tx => 0.0,
        _ if rx => 0.0,
        _ => a.motion.factor(),
    }
}

pub(crate) fn object_factor(strategy: Strategy, o: &EnvironmentObject) -> f64 {
    match strategy {
        Strategy::NoMovement => 0.0,
        _ => o.motion.factor(),
    }
}

/// Where everything is at one measurement position.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    pub step_index: usize,
    /// `step_index · step_length`.
    pub nominal_moved_distance: f64,
    /// Displacement of the mobile antenna's mount along T, including its
    /// positioning error once applied.
    pub moved_distance: f64,
    pub geometry: GeometryState,
    /// Antennas whose position changes with the step index.
    pub moving: BTreeSet<String>,
    pub direction: Vec3,
    pub tx_id: String,
}

pub fn plan_step(scenario: &Scenario, strategy: Strategy, n: usize) -> Result<StepPlan> {
    let t = &scenario.trajectory;
    if n > t.last_step() {
        return invalid(format!(
            "step {n} beyond the last trajectory position {}",
            t.last_step()
        ));
    }
    let nominal = n as f64 * t.step_length;
    let offset = t.direction * nominal;

    let mut geometry = GeometryState::default();
    let mut moving = BTreeSet::new();
    for a in &scenario.antennas {
        let k = antenna_factor(scenario, strategy, a);
        let pos = if k == 0.0 {
            a.initial_position
        } else {
            moving.insert(a.id.clone());
            a.initial_position + offset * k
        };
        geometry.antennas.insert(a.id.clone(), pos);
    }
    for o in &scenario.objects {
        let k = object_factor(strategy, o);
        let kind = if k == 0.0 {
            o.kind
        } else {
            o.kind.translated(offset * k)
        };
        geometry.objects.push(kind);
    }

    Ok(StepPlan {
        step_index: n,
        nominal_moved_distance: nominal,
        moved_distance: nominal,
        geometry,
        moving,
        direction: t.direction,
        tx_id: scenario.tx_id.clone(),
    })
}

/// Jitters every moving antenna along T by an independent uniform draw in
/// `[-accuracy, accuracy]`. Draws happen in antenna-id order.
pub fn apply_positioning_error<R: Rng + ?Sized>(
    mut plan: StepPlan,
    accuracy: f64,
    rng: &mut R,
) -> StepPlan {
    if accuracy == 0.0 {
        return plan;
    }
    for id in &plan.moving {
        let e: f64 = rng.random_range(-accuracy..=accuracy);
        if let Some(p) = plan.geometry.antennas.get_mut(id) {
            *p = *p + plan.direction * e;
        }
        if *id == plan.tx_id {
            plan.moved_distance += e;
        }
    }
    plan
}

/// Standard deviation of the residual vibration after dwelling `dwell_time`.
pub fn settling_scale(dwell_time: f64, epsilon: f64, tau: f64) -> f64 {
    if epsilon == 0.0 {
        0.0
    } else if tau == 0.0 {
        if dwell_time == 0.0 {
            epsilon
        } else {
            0.0
        }
    } else {
        epsilon * (-dwell_time / tau).exp()
    }
}

/// Multiplicative residue `(1 + a)·exp(iβ)` of vibrations that have not died
/// down after the dwell. `a` and `β` are independent zero-mean Gaussians with
/// standard deviation [`settling_scale`].
pub fn settling_perturbation<R: Rng + ?Sized>(
    dwell_time: f64,
    epsilon: f64,
    tau: f64,
    rng: &mut R,
) -> Complex64 {
    let scale = settling_scale(dwell_time, epsilon, tau);
    if scale == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let a: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
    let beta: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
    Complex64::from_polar(1.0 + a, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{MotionAssignment, ObjectKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pos(plan: &StepPlan, id: &str) -> Vec3 {
        plan.geometry.antennas[id]
    }

    #[test]
    fn with_movement_step_zero_is_identity() {
        let s = Scenario::default_free_space();
        let p = plan_step(&s, Strategy::WithMovement, 0).unwrap();
        assert_eq!(pos(&p, "A"), s.antennas[0].initial_position);
        assert_eq!(pos(&p, "B"), s.antennas[1].initial_position);
    }

    #[test]
    fn uncompensated_twenty_steps_is_one_wavelength() {
        let s = Scenario::default_free_space();
        let lambda = s.carrier.wavelength();
        let p = plan_step(&s, Strategy::Uncompensated, 20).unwrap();
        assert!((pos(&p, "A").x - lambda).abs() < 1e-15);
        assert_eq!(pos(&p, "B"), s.antennas[1].initial_position);
    }

    #[test]
    fn with_movement_keeps_relative_vector() {
        let s = Scenario::default_free_space();
        let p0 = plan_step(&s, Strategy::WithMovement, 0).unwrap();
        let p = plan_step(&s, Strategy::WithMovement, 20).unwrap();
        let lambda = s.carrier.wavelength();
        assert!((pos(&p, "A").x - lambda).abs() < 1e-15);
        assert!((pos(&p, "B").x - pos(&p0, "B").x - lambda).abs() < 1e-15);
        let d = (pos(&p, "A") - pos(&p, "B")) - (pos(&p0, "A") - pos(&p0, "B"));
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn counter_and_no_movement_hold_a() {
        let s = Scenario::default_free_space();
        for st in [Strategy::CounterMovement, Strategy::NoMovement] {
            let p = plan_step(&s, st, 100).unwrap();
            assert_eq!(pos(&p, "A"), Vec3::ZERO);
            assert!(p.moving.is_empty());
        }
    }

    #[test]
    fn out_of_range_step() {
        let s = Scenario::default_free_space();
        let last = s.trajectory.last_step();
        assert!(plan_step(&s, Strategy::WithMovement, last).is_ok());
        assert!(matches!(
            plan_step(&s, Strategy::WithMovement, last + 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn co_moving_objects_follow() {
        let mut s = Scenario::default_clutter();
        s.objects[0].motion = MotionAssignment::AlongT;
        let p = plan_step(&s, Strategy::WithMovement, 10).unwrap();
        let step = s.trajectory.step_length;
        match (p.geometry.objects[0], s.objects[0].kind) {
            (
                ObjectKind::PointScatterer { position: moved, .. },
                ObjectKind::PointScatterer { position: start, .. },
            ) => assert!((moved.x - start.x - 10.0 * step).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert_eq!(p.geometry.objects[1], s.objects[1].kind);
    }

    #[test]
    fn zero_accuracy_is_bit_identical() {
        let s = Scenario::default_free_space();
        let p = plan_step(&s, Strategy::WithMovement, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(apply_positioning_error(p.clone(), 0.0, &mut rng), p);
    }

    #[test]
    fn jitter_is_bounded_and_along_t() {
        let s = Scenario::default_free_space();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 0..=s.trajectory.last_step() {
            let p = plan_step(&s, Strategy::WithMovement, n).unwrap();
            let q = apply_positioning_error(p.clone(), 2e-5, &mut rng);
            for id in ["A", "B"] {
                let d = pos(&q, id) - pos(&p, id);
                assert!(d.x.abs() <= 2e-5 + 1e-16);
                assert_eq!((d.y, d.z), (0.0, 0.0));
            }
            assert!((q.moved_distance - p.nominal_moved_distance).abs() <= 2e-5 + 1e-16);
        }
    }

    #[test]
    fn jitter_leaves_static_antennas() {
        let s = Scenario::default_free_space();
        let p = plan_step(&s, Strategy::Uncompensated, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = apply_positioning_error(p.clone(), 1e-3, &mut rng);
        assert_eq!(pos(&q, "B"), pos(&p, "B"));
        assert_ne!(pos(&q, "A"), pos(&p, "A"));
    }

    #[test]
    fn jitter_is_deterministic() {
        let s = Scenario::default_free_space();
        let p = plan_step(&s, Strategy::WithMovement, 5).unwrap();
        let a = apply_positioning_error(p.clone(), 2e-5, &mut ChaCha8Rng::seed_from_u64(4));
        let b = apply_positioning_error(p, 2e-5, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }

    #[test]
    fn settling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            settling_perturbation(0.2, 0.0, 0.04, &mut rng),
            Complex64::new(1.0, 0.0)
        );
        let s = settling_scale(0.2, 1.0, 0.04);
        assert!((s - (-5.0f64).exp()).abs() < 1e-17);
        assert!((s - 0.0067).abs() < 1e-4);
        assert_eq!(settling_scale(0.0, 0.3, 0.04), 0.3);
        assert_eq!(settling_scale(0.0, 0.3, 0.0), 0.3);
        assert_eq!(settling_scale(0.1, 0.3, 0.0), 0.0);
    }

    #[test]
    fn settling_vanishes_with_long_dwell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = settling_perturbation(100.0, 0.5, 0.04, &mut rng);
        assert_eq!(m, Complex64::new(1.0, 0.0));
        let m = settling_perturbation(0.0, 0.05, 0.04, &mut rng);
        assert_ne!(m, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("sideways".parse::<Strategy>().is_err());
    }
}
