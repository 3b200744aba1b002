//! The move / dwell / measure loop.
//!
//! For every position `n` on the trajectory: place the antennas, jitter the
//! moving ones, wait `dwell_time`, then record `H` scaled by the remaining
//! vibration residue. Measurements are instantaneous at the end of the
//! dwell, so sample `n` is stamped `n · (step_length / speed + dwell_time)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::motion::{apply_positioning_error, plan_step, settling_perturbation, Strategy};
use crate::propagation::total_channel;
use crate::scenario::{validate_scenario, Scenario};
use crate::trace::{ChannelSample, Trace};

/// Seed of the `index`-th run of [`run_triple`]:
/// `master XOR ((index + 1) · 0x9E37_79B9_7F4A_7C15)` with wrapping multiply.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    master ^ (index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn ensure_valid(scenario: &Scenario) -> Result<()> {
    let v = validate_scenario(scenario);
    if v.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(Error::Config(msgs.join("; ")))
    }
}

/// Runs one strategy over the whole trajectory.
pub fn run(scenario: &Scenario, strategy: Strategy, seed: u64) -> Result<Trace> {
    ensure_valid(scenario)?;
    let digest = scenario.digest();
    run_validated(scenario, strategy, seed, digest)
}

fn run_validated(scenario: &Scenario, strategy: Strategy, seed: u64, digest: String) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = &scenario.trajectory;
    let noise = &scenario.noise;
    let period = t.step_length / scenario.speed + scenario.dwell_time;

    let mut samples = Vec::with_capacity(t.sample_count());
    for n in 0..=t.last_step() {
        let at_step = |e: Error| Error::Step {
            step: n,
            source: Box::new(e),
        };
        let plan = plan_step(scenario, strategy, n).map_err(at_step)?;
        let plan = apply_positioning_error(plan, noise.positioning_accuracy, &mut rng);
        let h = total_channel(&plan.geometry, scenario).map_err(at_step)?;
        let residue = settling_perturbation(
            scenario.dwell_time,
            noise.settling_epsilon,
            noise.settling_tau,
            &mut rng,
        );
        samples.push(ChannelSample {
            step_index: n,
            time: n as f64 * period,
            moved_distance: plan.moved_distance,
            h: h * residue,
        });
    }
    Trace::new(digest, strategy.label(), scenario.carrier.wavelength(), samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    /// In run order.
    pub traces: Vec<Trace>,
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub scenario_digest: String,
}

impl CampaignResult {
    pub fn get(&self, strategy: Strategy) -> Option<&Trace> {
        self.strategies
            .iter()
            .position(|s| *s == strategy)
            .map(|i| &self.traces[i])
    }

    pub fn by_label(&self, label: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.strategy_label() == label)
    }
}

/// Runs the given strategies, the `i`-th with [`derive_seed`]`(seed, i)`.
/// Runs are independent and execute on separate threads.
pub fn run_many(scenario: &Scenario, strategies: &[Strategy], seed: u64) -> Result<CampaignResult> {
    ensure_valid(scenario)?;
    let digest = scenario.digest();
    let results: Vec<Result<Trace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .enumerate()
            .map(|(i, &st)| {
                let digest = digest.clone();
                scope.spawn(move || run_validated(scenario, st, derive_seed(seed, i as u64), digest))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    Ok(CampaignResult {
        traces: results.into_iter().collect::<Result<_>>()?,
        strategies: strategies.to_vec(),
        seed,
        scenario_digest: digest,
    })
}

/// The measurement campaign: uncompensated, with-movement, no movement.
pub fn run_triple(scenario: &Scenario, seed: u64) -> Result<CampaignResult> {
    run_many(scenario, &Strategy::TRIPLE, seed)
}
