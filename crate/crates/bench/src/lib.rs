//! Fixtures shared by the benchmarks.

use cspa_core::scenario::NoiseConfig;
use cspa_core::Scenario;

/// Clutter scenario with noise switched off, so timings do not depend on
/// random draws.
pub fn quiet_clutter() -> Scenario {
    let mut s = Scenario::default_clutter();
    s.noise = NoiseConfig::noiseless();
    s
}
