//! Launch plus integration with the standard event set.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::{
    Direction, Event, Integrator, IntegratorConfig, SampleKind, Solution, Stats, Termination,
};
use crate::launch::{default_delta, launch, project_onto_constraint};
use crate::monitors::{dw_c0, two_summands_roots};
use crate::systems::{packed_rhs, Ansatz, ProblemSpec, SolitonState};

pub const EVENT_DEGENERATE: &str = "metric_degenerate";
pub const EVENT_SHAPE: &str = "shape_operator_sign";
pub const EVENT_INVARIANT: &str = "invariant_set";
pub const EVENT_OVERFLOW: &str = "overflow";

/// Knobs for [`solve_problem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Launch time; `None` picks [`default_delta`].
    pub launch_delta: Option<f64>,
    /// Re-solve `u̇` from the conservation law at launch.
    pub project: bool,
    /// Stop when some `ḟ_i` reaches zero.
    pub shape_event: bool,
    /// Stop when the ansatz's a priori bound fails.
    pub invariant_event: bool,
    pub overflow: f64,
    /// Extra samples at exactly these times.
    pub output_times: Vec<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            launch_delta: None,
            project: true,
            shape_event: true,
            invariant_event: true,
            overflow: 1e12,
            output_times: Vec::new(),
        }
    }
}

/// Integrated trajectory with its problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub spec: ProblemSpec,
    pub delta: f64,
    pub states: Vec<SolitonState>,
    pub kinds: Vec<SampleKind>,
    pub termination: Termination,
    pub stats: Stats,
    pub events: Vec<(String, f64)>,
}

impl Trajectory {
    fn from_solution(spec: &ProblemSpec, delta: f64, sol: Solution) -> Self {
        let (states, kinds) = sol
            .samples
            .into_iter()
            .map(|s| (SolitonState::from_slice(s.t, &s.y), s.kind))
            .unzip();
        Trajectory {
            spec: spec.clone(),
            delta,
            states,
            kinds,
            termination: sol.termination,
            stats: sol.stats,
            events: sol.events,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &SolitonState {
        self.states.last().expect("trajectory has a launch sample")
    }

    /// `ü` at sample `i`, from the RHS.
    pub fn udd(&self, i: usize) -> f64 {
        udd_at(&self.states[i], &self.spec)
    }

    pub fn udds(&self) -> Vec<f64> {
        self.states.iter().map(|s| udd_at(s, &self.spec)).collect()
    }

    pub fn reached_t_max(&self) -> bool {
        self.termination == Termination::ReachedTMax
    }

    /// Sample at exactly `t`, if one was recorded.
    pub fn at(&self, t: f64) -> Option<&SolitonState> {
        self.states.iter().find(|s| s.t == t)
    }
}

pub(crate) fn udd_at(state: &SolitonState, spec: &ProblemSpec) -> f64 {
    let y = state.to_vec();
    let mut dy = vec![0.0; y.len()];
    let f = packed(&spec.ansatz, spec.epsilon);
    f(state.t, &y, &mut dy);
    dy[y.len() - 1]
}

/// Packed RHS closure for an ansatz.
pub fn packed(ansatz: &Ansatz, eps: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Clone + '_ {
    let d = ansatz.multiplicities();
    move |_t, y, dy| {
        let k = d.len();
        let mut r = [0.0; 16];
        let mut heap;
        let r: &mut [f64] = if k <= 16 {
            &mut r[..k]
        } else {
            heap = vec![0.0; k];
            &mut heap
        };
        ansatz.ricci_terms(&y[..k], r);
        packed_rhs(&d, r, eps, y, dy);
    }
}

/// The default event set for a spec.
pub fn standard_events(spec: &ProblemSpec, opts: &SolveOptions) -> Vec<Event<'static>> {
    let k = spec.ansatz.components();
    let mut events = vec![Event::new(EVENT_DEGENERATE, Direction::Falling, true, move |_, y| {
        y[..k].iter().copied().fold(f64::INFINITY, f64::min)
    })];
    if opts.shape_event {
        events.push(Event::new(EVENT_SHAPE, Direction::Falling, true, move |_, y| {
            y[k..2 * k].iter().copied().fold(f64::INFINITY, f64::min)
        }));
    }
    if opts.invariant_event {
        events.push(invariant_event(spec));
    }
    let cap = opts.overflow;
    events.push(Event::new(EVENT_OVERFLOW, Direction::Rising, true, move |_, y| {
        y.iter().fold(0.0_f64, |m, v| m.max(v.abs())) - cap
    }));
    events
}

/// Ceiling on `ω = f1/f2` for two summands: `ω2` when the discriminant is
/// nonnegative, otherwise `sqrt(A2/(2 A3))`.
pub fn omega_ceiling(a: &crate::systems::TwoSummandsAnsatz) -> f64 {
    let diag = two_summands_roots(a);
    diag.omega2.unwrap_or_else(|| (a.a2 / (2.0 * a.a3)).sqrt())
}

/// Signed distance to the ansatz's a priori bound; negative inside.
pub fn invariant_event(spec: &ProblemSpec) -> Event<'static> {
    match &spec.ansatz {
        Ansatz::TwoSummands(a) => {
            let ceiling = omega_ceiling(a);
            Event::new(EVENT_INVARIANT, Direction::Rising, true, move |_, y| {
                y[0] / y[1] - ceiling
            })
        }
        Ansatz::DancerWang(a) => {
            let m = a.m();
            let c0 = dw_c0(a, &spec.initial);
            let pmin = a.p.iter().copied().min().unwrap_or(1) as f64;
            let bounds: Vec<f64> = (0..m)
                .map(|i| {
                    let q2 = (a.q[i] * a.q[i]) as f64;
                    pmin * 4.0 / (m as f64 * c0 * c0 * (a.d[i] as f64 + 2.0) * q2)
                })
                .collect();
            Event::new(EVENT_INVARIANT, Direction::Rising, true, move |_, y| {
                let mut worst = f64::NEG_INFINITY;
                for i in 0..m {
                    let w = y[0] / y[i + 1];
                    worst = worst.max(w * w / bounds[i] - 1.0);
                    for j in (0..m).filter(|&j| j != i) {
                        worst = worst.max(y[i + 1] / y[j + 1] / c0 - 1.0);
                    }
                }
                worst
            })
        }
        Ansatz::Lpp(a) => {
            let bound = 4.0 * a.p1 as f64 / ((a.d1 as f64 + 2.0) * (a.q1 * a.q1) as f64);
            Event::new(EVENT_INVARIANT, Direction::Rising, true, move |_, y| {
                let w = y[0] / y[1];
                w * w / bound - 1.0
            })
        }
    }
}

/// Integrates from an arbitrary state with the given events.
pub fn integrate(
    spec: &ProblemSpec,
    state0: &SolitonState,
    cfg: &IntegratorConfig,
    events: Vec<Event<'_>>,
    output_times: Vec<f64>,
) -> Result<Trajectory> {
    cfg.validate()?;
    state0.check(spec.ansatz.components())?;
    let k = spec.ansatz.components();
    let sol = Integrator::new(cfg.clone())
        .with_events(events)
        .with_output_times(output_times)
        .with_validity(move |y| y[..k].iter().all(|&f| f > 0.0))
        .run(packed(&spec.ansatz, spec.epsilon), state0.t, &state0.to_vec());
    Ok(Trajectory::from_solution(spec, state0.t, sol))
}

/// Launch, optional projection onto the conservation law, and integration
/// with [`standard_events`].
pub fn solve_problem(
    spec: &ProblemSpec,
    cfg: &IntegratorConfig,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    let delta = opts.launch_delta.unwrap_or_else(|| default_delta(spec));
    let mut state = launch(spec, delta)?;
    if opts.project {
        state = project_onto_constraint(&state, spec)?;
    }
    if cfg.t_max <= delta {
        return Err(crate::Error::invalid(
            "integrator.t_max",
            format!("must exceed the launch time {delta}"),
        ));
    }
    integrate(
        spec,
        &state,
        cfg,
        standard_events(spec, opts),
        opts.output_times.clone(),
    )
}
