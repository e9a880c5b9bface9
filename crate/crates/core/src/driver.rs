//! Explicit time stepping shared by the crystalline and smooth flows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What happened during a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    FacetCollapse,
    Extinction,
    SingularityStop,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EventKind::FacetCollapse => "facet-collapse",
            EventKind::Extinction => "polygon-extinction",
            EventKind::SingularityStop => "singularity-stop",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub t: f64,
    pub kind: EventKind,
    pub facet: Option<usize>,
    pub detail: String,
}

/// Result of advancing a state by at most the requested step.
#[derive(Clone, Debug)]
pub struct Advance<S> {
    pub state: S,
    pub dt_taken: f64,
    /// Event times are relative to the start of the step.
    pub events: Vec<FlowEvent>,
    /// The evolution cannot continue (extinction or singularity).
    pub stop: bool,
}

/// A normal-velocity law together with its explicit integrator.
pub trait FlowLaw {
    type State: Clone;

    /// Largest step the integrator accepts from `s`.
    fn stable_dt(&self, s: &Self::State) -> Result<f64>;

    fn advance(&self, s: &Self::State, dt: f64) -> Result<Advance<Self::State>>;

    fn energy(&self, s: &Self::State) -> f64;

    fn area(&self, s: &Self::State) -> f64;

    /// Shortest facet or edge.
    fn min_length(&self, s: &Self::State) -> f64;
}

/// Step-size controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Controls {
    /// Upper bound on the time step.
    pub dt: f64,
    /// Fraction of the stability bound to use, in `(0, 1]`.
    pub cfl: f64,
    /// Times at which snapshots are recorded, in addition to `0` and the final time.
    pub sample_times: Vec<f64>,
    pub max_steps: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            dt: f64::INFINITY,
            cfl: 1.0,
            sample_times: Vec::new(),
            max_steps: 50_000_000,
        }
    }
}

impl Controls {
    pub fn with_dt(dt: f64) -> Self {
        Controls {
            dt,
            ..Controls::default()
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn sampled(mut self, times: &[f64]) -> Self {
        self.sample_times = times.to_vec();
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Validation(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Validation(format!("cfl factor must lie in (0, 1], got {}", self.cfl)));
        }
        if self.sample_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Validation("sample times must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Sorted distinct sample times in `(0, t_end]`, always ending at `t_end`.
    pub fn targets(&self, t_end: f64) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .sample_times
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < t_end)
            .collect();
        ts.push(t_end);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.retain(|&t| t > 0.0);
        ts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord<S> {
    pub t: f64,
    pub snapshot: S,
    pub energy: f64,
    pub area: f64,
    pub min_length: f64,
}

/// Snapshots of one evolution at the sample times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace<S> {
    pub records: Vec<TraceRecord<S>>,
    pub events: Vec<FlowEvent>,
    /// Energy after every step, for dissipation checks.
    #[serde(skip)]
    pub step_energies: Vec<f64>,
}

impl<S> Default for FlowTrace<S> {
    fn default() -> Self {
        FlowTrace {
            records: Vec::new(),
            events: Vec::new(),
            step_energies: Vec::new(),
        }
    }
}

impl<S> FlowTrace<S> {
    pub fn last(&self) -> Option<&TraceRecord<S>> {
        self.records.last()
    }

    /// Record at time `t` (within `1e-12`), if sampled.
    pub fn at(&self, t: f64) -> Option<&TraceRecord<S>> {
        self.records.iter().find(|r| (r.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn extinction_time(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind == EventKind::Extinction)
            .map(|e| e.t)
    }

    /// Largest per-step energy increase.
    pub fn max_energy_increase(&self) -> f64 {
        self.step_energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn record<L: FlowLaw>(law: &L, t: f64, s: &L::State) -> TraceRecord<L::State> {
    TraceRecord {
        t,
        snapshot: s.clone(),
        energy: law.energy(s),
        area: law.area(s),
        min_length: law.min_length(s),
    }
}

/// Snaps `t` onto `target` when they differ only by rounding.
pub(crate) fn snap(t: f64, target: f64) -> f64 {
    if (target - t).abs() <= 1e-12 * target.abs().max(1.0) {
        target
    } else {
        t
    }
}

/// Integrates `law` from `initial` to `t_end` or until the law stops.
pub fn evolve<L: FlowLaw>(law: &L, initial: L::State, t_end: f64, controls: &Controls) -> Result<FlowTrace<L::State>> {
    controls.check()?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Validation(format!("invalid end time {t_end}")));
    }
    let mut trace = FlowTrace::default();
    let mut state = initial;
    let mut t = 0.0;
    trace.records.push(record(law, 0.0, &state));
    trace.step_energies.push(law.energy(&state));
    if t_end == 0.0 {
        return Ok(trace);
    }

    let targets = controls.targets(t_end);
    let mut next = 0;
    let mut steps = 0usize;
    while next < targets.len() {
        let target = targets[next];
        let bound = law.stable_dt(&state)?;
        let dt = controls.dt.min(controls.cfl * bound).min(target - t);
        let adv = law.advance(&state, dt)?;
        for mut e in adv.events {
            e.t += t;
            trace.events.push(e);
        }
        t = snap(t + adv.dt_taken, target);
        if adv.stop {
            // the stopped state may be degenerate; keep the last regular one
            if trace.records.last().is_none_or(|r| r.t < t) {
                trace.records.push(record(law, t, &state));
            }
            break;
        }
        state = adv.state;
        trace.step_energies.push(law.energy(&state));
        if t >= target {
            trace.records.push(record(law, t, &state));
            next += 1;
        }
        steps += 1;
        if steps >= controls.max_steps {
            return Err(Error::Stalled(format!(
                "step limit {} reached at t = {t:e}",
                controls.max_steps
            )));
        }
    }
    Ok(trace)
}
