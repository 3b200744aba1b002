//! Phase wrapping and unwrapping, dB conversion, and the summary statistics
//! (mean, peak-to-peak, variance) used to compare runs.

use std::f64::consts::{PI, TAU};
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::campaign::CampaignResult;
use crate::error::{invalid, Result};
use crate::trace::Trace;

/// `20·log10|h|`.
pub fn to_db(h: Complex64) -> f64 {
    20.0 * h.norm().log10()
}

/// Reduces `phase` into `(-π, π]`. Values already in range are returned as is.
pub fn wrap_phase(phase: f64) -> Result<f64> {
    if !phase.is_finite() {
        return invalid(format!("phase must be finite, got {phase}"));
    }
    Ok(wrap_phase_unchecked(phase))
}

pub(crate) fn wrap_phase_unchecked(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let mut r = phase.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    if r <= -PI {
        r += TAU;
    }
    r
}

/// Removes 2π jumps: wherever two neighbors differ by more than π, the rest
/// of the series is shifted by the multiple of 2π that brings the step back
/// into `[-π, π]`. The first element is never changed.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut correction = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p - phase[i - 1];
            if d.abs() > PI {
                let mut dm = (d + PI).rem_euclid(TAU) - PI;
                if dm == -PI && d > 0.0 {
                    dm = PI;
                }
                correction += dm - d;
            }
        }
        out.push(p + correction);
    }
    out
}

/// Mean, peak-to-peak and unbiased variance of one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    pub mean: f64,
    pub p2p: f64,
    pub var: f64,
}

/// Single pass (Welford). Length 1 gives zero variance.
pub fn series_stats(x: &[f64]) -> Result<SeriesStats> {
    if x.is_empty() {
        return invalid("statistics of an empty series");
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in x.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let var = if x.len() > 1 {
        (m2 / (x.len() - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(SeriesStats {
        mean,
        p2p: hi - lo,
        var,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseConvention {
    Wrapped,
    Unwrapped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean_db: f64,
    pub p2p_db: f64,
    pub var_db: f64,
    pub mean_phase: f64,
    pub p2p_phase: f64,
    pub var_phase: f64,
    pub phase_convention: PhaseConvention,
}

pub fn stats(mag_db: &[f64], phase: &[f64], convention: PhaseConvention) -> Result<ChannelStats> {
    if mag_db.len() != phase.len() {
        return invalid(format!(
            "magnitude and phase series differ in length ({} vs {})",
            mag_db.len(),
            phase.len()
        ));
    }
    let m = series_stats(mag_db)?;
    let p = series_stats(phase)?;
    Ok(ChannelStats {
        mean_db: m.mean,
        p2p_db: m.p2p,
        var_db: m.var,
        mean_phase: p.mean,
        p2p_phase: p.p2p,
        var_phase: p.var,
        phase_convention: convention,
    })
}

pub fn trace_stats(trace: &Trace, convention: PhaseConvention) -> ChannelStats {
    let phase = match convention {
        PhaseConvention::Wrapped => trace.phase_wrapped(),
        PhaseConvention::Unwrapped => trace.phase_unwrapped(),
    };
    stats(&trace.mag_db(), &phase, convention).expect("traces are non-empty")
}

/// Label of the uncompensated run; it gets both a wrapped and an unwrapped row.
pub const REGULAR_LABEL: &str = "regular";
pub const REGULAR_WRAPPED_ROW: &str = "regular (wrapped 2pi)";
pub const REGULAR_UNWRAPPED_ROW: &str = "regular (not wrapped)";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<(String, ChannelStats)>,
}

pub const SUMMARY_CSV_HEADER: &str =
    "label,mean_db,p2p_db,var_db2,mean_phase_rad,p2p_phase_rad,var_phase_rad2";

impl SummaryTable {
    pub fn row(&self, label: &str) -> Option<&ChannelStats> {
        self.rows.iter().find(|(l, _)| l == label).map(|(_, s)| s)
    }

    fn push_unique(&mut self, label: String, stats: ChannelStats) {
        let mut candidate = label.clone();
        let mut k = 2;
        while self.row(&candidate).is_some() {
            candidate = format!("{label} #{k}");
            k += 1;
        }
        self.rows.push((candidate, stats));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{SUMMARY_CSV_HEADER}").unwrap();
        for (label, s) in &self.rows {
            let label = if label.contains(',') || label.contains('"') {
                format!("\"{}\"", label.replace('"', "\"\""))
            } else {
                label.clone()
            };
            writeln!(
                out,
                "{label},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.mean_db, s.p2p_db, s.var_db, s.mean_phase, s.p2p_phase, s.var_phase
            )
            .unwrap();
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|(l, _)| l.len())
            .max()
            .unwrap_or(0)
            .max(5);
        writeln!(
            f,
            "{:<width$} | {:>10} {:>10} {:>12} | {:>10} {:>10} {:>12}",
            "", "mean/dB", "p2p/dB", "var/dB^2", "mean/rad", "p2p/rad", "var/rad^2"
        )?;
        writeln!(f, "{}", "-".repeat(width + 75))?;
        for (label, s) in &self.rows {
            writeln!(
                f,
                "{:<width$} | {:>10.3} {:>10.3} {:>12.4e} | {:>10.3} {:>10.3} {:>12.4e}",
                label, s.mean_db, s.p2p_db, s.var_db, s.mean_phase, s.p2p_phase, s.var_phase
            )?;
        }
        Ok(())
    }
}

/// One row per trace. The uncompensated ("regular") run is reported twice,
/// with wrapped and with unwrapped phase; all other runs use unwrapped phase.
pub fn summarize_traces<'a>(traces: impl IntoIterator<Item = &'a Trace>) -> SummaryTable {
    let mut table = SummaryTable { rows: Vec::new() };
    for t in traces {
        if t.strategy_label() == REGULAR_LABEL {
            table.push_unique(
                REGULAR_WRAPPED_ROW.into(),
                trace_stats(t, PhaseConvention::Wrapped),
            );
            table.push_unique(
                REGULAR_UNWRAPPED_ROW.into(),
                trace_stats(t, PhaseConvention::Unwrapped),
            );
        } else {
            table.push_unique(
                t.strategy_label().to_string(),
                trace_stats(t, PhaseConvention::Unwrapped),
            );
        }
    }
    table
}

pub fn summarize(result: &CampaignResult) -> SummaryTable {
    summarize_traces(&result.traces)
}

/// Which of two traces is more static on a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    First,
    Second,
    Tie,
    /// Means say nothing about staticness.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricDelta {
    pub metric: &'static str,
    pub first: f64,
    pub second: f64,
    /// `first - second`.
    pub delta: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub first_label: String,
    pub second_label: String,
    pub metrics: Vec<MetricDelta>,
}

impl Comparison {
    pub fn metric(&self, name: &str) -> Option<&MetricDelta> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,first,second,delta,more_static\n");
        for m in &self.metrics {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{}",
                m.metric,
                m.first,
                m.second,
                m.delta,
                self.verdict_name(m.verdict)
            )
            .unwrap();
        }
        out
    }

    fn verdict_name(&self, v: Verdict) -> &str {
        match v {
            Verdict::First => &self.first_label,
            Verdict::Second => &self.second_label,
            Verdict::Tie => "tie",
            Verdict::NotApplicable => "-",
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "first: {}\nsecond: {}",
            self.first_label, self.second_label
        )?;
        writeln!(
            f,
            "{:<12} {:>14} {:>14} {:>14}  more static",
            "metric", "first", "second", "delta"
        )?;
        for m in &self.metrics {
            writeln!(
                f,
                "{:<12} {:>14.6e} {:>14.6e} {:>14.6e}  {}",
                m.metric,
                m.first,
                m.second,
                m.delta,
                self.verdict_name(m.verdict)
            )?;
        }
        Ok(())
    }
}

/// Differences of all statistics (unwrapped phase) between two traces.
/// Smaller spread wins on the p2p and variance metrics.
pub fn compare(a: &Trace, b: &Trace) -> Comparison {
    let sa = trace_stats(a, PhaseConvention::Unwrapped);
    let sb = trace_stats(b, PhaseConvention::Unwrapped);
    let spread = |x: f64, y: f64| {
        if x < y {
            Verdict::First
        } else if y < x {
            Verdict::Second
        } else {
            Verdict::Tie
        }
    };
    let metric = |name, x: f64, y: f64, is_spread: bool| MetricDelta {
        metric: name,
        first: x,
        second: y,
        delta: x - y,
        verdict: if is_spread {
            spread(x, y)
        } else {
            Verdict::NotApplicable
        },
    };
    Comparison {
        first_label: a.strategy_label().to_string(),
        second_label: b.strategy_label().to_string(),
        metrics: vec![
            metric("mean_db", sa.mean_db, sb.mean_db, false),
            metric("p2p_db", sa.p2p_db, sb.p2p_db, true),
            metric("var_db", sa.var_db, sb.var_db, true),
            metric("mean_phase", sa.mean_phase, sb.mean_phase, false),
            metric("p2p_phase", sa.p2p_phase, sb.p2p_phase, true),
            metric("var_phase", sa.var_phase, sb.var_phase, true),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::ChannelSample;

    #[test]
    fn wrap_examples() {
        assert!((wrap_phase(7.0).unwrap() - (7.0 - TAU)).abs() < 1e-15);
        assert!((wrap_phase(7.0).unwrap() - 0.716814).abs() < 1e-6);
        assert_eq!(wrap_phase(-PI).unwrap(), PI);
        assert_eq!(wrap_phase(0.3).unwrap(), 0.3);
        assert_eq!(wrap_phase(PI).unwrap(), PI);
        assert!(wrap_phase(f64::NAN).is_err());
        assert!(wrap_phase(f64::INFINITY).is_err());
    }

    #[test]
    fn unwrap_examples() {
        let u = unwrap_phase(&[3.0, -3.0]);
        assert_eq!(u[0], 3.0);
        assert!((u[1] - (TAU - 3.0)).abs() < 1e-15);
        assert!((u[1] - 3.28319).abs() < 1e-5);
        let smooth = [0.1, 0.5, 1.2, 0.9, -0.4, -2.0];
        assert_eq!(unwrap_phase(&smooth), smooth.to_vec());
        assert!(unwrap_phase(&[]).is_empty());
    }

    #[test]
    fn stats_by_hand() {
        let s = stats(&[-45.0, -44.0, -43.0], &[0.0, 0.0, 0.0], PhaseConvention::Unwrapped).unwrap();
        assert_eq!(s.mean_db, -44.0);
        assert_eq!(s.p2p_db, 2.0);
        assert_eq!(s.var_db, 1.0);
        assert_eq!((s.p2p_phase, s.var_phase), (0.0, 0.0));
    }

    #[test]
    fn constant_and_single() {
        let s = series_stats(&[2.5; 17]).unwrap();
        assert_eq!((s.mean, s.p2p, s.var), (2.5, 0.0, 0.0));
        let s = series_stats(&[1.0]).unwrap();
        assert_eq!(s.var, 0.0);
        assert!(series_stats(&[]).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(stats(&[1.0, 2.0], &[1.0], PhaseConvention::Wrapped).is_err());
    }

    fn trace(label: &str, phases: &[f64]) -> Trace {
        let s = phases
            .iter()
            .enumerate()
            .map(|(n, &p)| ChannelSample {
                step_index: n,
                time: n as f64,
                moved_distance: 0.0,
                h: Complex64::from_polar(0.01 * (1.0 + 0.01 * n as f64), p),
            })
            .collect();
        Trace::new("d", label, 0.12, s).unwrap()
    }

    #[test]
    fn summary_rows() {
        let reg = trace(REGULAR_LABEL, &(0..100).map(|n| -0.5 * n as f64).collect::<Vec<_>>());
        let flat = trace("no movement", &[0.2; 100]);
        let t = summarize_traces([&reg, &flat]);
        let labels: Vec<_> = t.rows.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, [REGULAR_WRAPPED_ROW, REGULAR_UNWRAPPED_ROW, "no movement"]);
        assert!(t.rows[0].1.p2p_phase <= TAU);
        assert!(t.rows[1].1.p2p_phase > 40.0);
        assert!(t.rows[2].1.var_phase < 1e-30);
        let csv = t.to_csv();
        assert!(csv.starts_with(SUMMARY_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn duplicate_labels_are_disambiguated() {
        let a = trace("x", &[0.0, 0.1]);
        let t = summarize_traces([&a, &a]);
        assert_eq!(t.rows[1].0, "x #2");
    }

    #[test]
    fn compare_with_itself_is_all_zero() {
        let a = trace("x", &[0.0, 0.1, 0.3, -0.2]);
        let c = compare(&a, &a);
        for m in &c.metrics {
            assert_eq!(m.delta, 0.0);
            assert!(matches!(m.verdict, Verdict::Tie | Verdict::NotApplicable));
        }
    }

    #[test]
    fn compare_prefers_smaller_spread() {
        let a = trace("calm", &[0.0, 0.01, 0.02]);
        let b = trace("wild", &[0.0, 1.0, 2.0]);
        let c = compare(&a, &b);
        assert_eq!(c.metric("var_phase").unwrap().verdict, Verdict::First);
        assert_eq!(c.metric("mean_db").unwrap().verdict, Verdict::NotApplicable);
    }
}
