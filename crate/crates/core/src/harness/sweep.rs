use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PlanarVec;
use crate::plant::PushEvent;
use crate::walker::{simulate_walk, Strategy, TrialResult, Verdict, WalkSetup};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushSweepSpec {
    pub push_time: f64,
    pub push_duration: f64,
    /// Unit direction of the push.
    pub direction: PlanarVec,
    pub force_lo: f64,
    pub force_hi: f64,
    pub tolerance: f64,
    pub strategy: Strategy,
}

impl Default for PushSweepSpec {
    fn default() -> Self {
        Self {
            push_time: 2.6,
            push_duration: 0.01,
            direction: PlanarVec::new(1.0, 0.0),
            force_lo: 0.0,
            force_hi: 3000.0,
            tolerance: 1.0,
            strategy: Strategy::TorqueOnly,
        }
    }
}

impl PushSweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.force_lo < self.force_hi) {
            bad.push("force_lo must be < force_hi".to_string());
        }
        if !(self.tolerance > 0.0) {
            bad.push("bisection tolerance must be > 0".into());
        }
        if !(self.push_duration > 0.0) {
            bad.push("push_duration must be > 0".into());
        }
        if !(self.push_time >= 0.0) {
            bad.push("push_time must be >= 0".into());
        }
        if (self.direction.norm() - 1.0).abs() > 1e-9 {
            bad.push("push direction must be a unit vector".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn push(&self, force: f64) -> PushEvent {
        PushEvent {
            force: self.direction * force,
            start_time: self.push_time,
            duration: self.push_duration,
        }
    }
}

/// Walk under one push of magnitude `force` with the spec's strategy.
pub fn run_push_trial(setup: &WalkSetup, spec: &PushSweepSpec, force: f64) -> Result<TrialResult> {
    let mut s = setup.clone();
    s.strategy = spec.strategy;
    simulate_walk(&s, None, &[spec.push(force)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub strategy: Strategy,
    /// Largest force found to be recovered.
    pub f_max: f64,
    /// Every probe in evaluation order.
    pub probes: Vec<(f64, Verdict)>,
    pub diagnostics: Vec<String>,
    pub max_step_displacement: f64,
    pub max_abs_delta_t: f64,
}

/// Bisection on the push magnitude. Spot checks below the result guard
/// against a non-monotone verdict; a failing check shrinks the bracket.
pub fn max_recoverable_push(setup: &WalkSetup, spec: &PushSweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut out = SweepOutcome {
        strategy: spec.strategy,
        f_max: spec.force_lo,
        probes: Vec::new(),
        diagnostics: Vec::new(),
        max_step_displacement: 0.0,
        max_abs_delta_t: 0.0,
    };
    let probe = |force: f64, out: &mut SweepOutcome| -> Result<bool> {
        let r = run_push_trial(setup, spec, force)?;
        out.probes.push((force, r.verdict));
        out.max_step_displacement = out.max_step_displacement.max(r.max_step_displacement);
        out.max_abs_delta_t = out.max_abs_delta_t.max(r.max_abs_delta_t);
        Ok(r.verdict == Verdict::Recovered)
    };
    let (mut lo, mut hi) = (spec.force_lo, spec.force_hi);
    if !probe(lo, &mut out)? {
        out.diagnostics
            .push(format!("lower bracket {lo} N already falls"));
        out.f_max = lo;
        return Ok(out);
    }
    if probe(hi, &mut out)? {
        out.diagnostics
            .push(format!("upper bracket {hi} N still recovers"));
        out.f_max = hi;
        return Ok(out);
    }
    loop {
        while hi - lo > spec.tolerance {
            let mid = 0.5 * (lo + hi);
            if probe(mid, &mut out)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut failed = None;
        for frac in [0.5, 0.75, 0.9] {
            let f = spec.force_lo + frac * (lo - spec.force_lo);
            if !probe(f, &mut out)? {
                failed = Some(f);
                break;
            }
        }
        match failed {
            None => break,
            Some(f) => {
                out.diagnostics
                    .push(format!("non-monotone verdict: {f:.1} N falls below {lo:.1} N"));
                lo = spec.force_lo;
                hi = f;
            }
        }
    }
    out.f_max = lo;
    Ok(out)
}

/// One sweep per strategy, run in parallel; results follow `strategies`.
pub fn sweep_strategies(
    setup: &WalkSetup,
    spec: &PushSweepSpec,
    strategies: &[Strategy],
) -> Result<Vec<SweepOutcome>> {
    strategies
        .par_iter()
        .map(|&s| {
            let spec = PushSweepSpec {
                strategy: s,
                ..*spec
            };
            max_recoverable_push(setup, &spec)
        })
        .collect()
}

/// Improvement percentages between the three strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub location_over_torque: f64,
    pub time_over_location: f64,
    pub combined_over_torque: f64,
}

pub fn improvement_report(f_torque: f64, f_location: f64, f_time: f64) -> Improvement {
    let pct = |a: f64, b: f64| (a / b - 1.0) * 100.0;
    Improvement {
        location_over_torque: pct(f_location, f_torque),
        time_over_location: pct(f_time, f_location),
        combined_over_torque: pct(f_time, f_torque),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_examples() {
        let r = improvement_report(325.0, 411.0, 531.0);
        assert!((r.location_over_torque - 26.46).abs() < 0.01);
        assert!((r.time_over_location - 29.20).abs() < 0.01);
        assert!((r.combined_over_torque - 63.38).abs() < 0.01);
    }
}
