//! Compactified coordinates for the Dancer–Wang system.
//!
//! With `𝓛 = 1/(-u̇ + tr L)` and `d/ds = 𝓛 d/dt`, set `X_j = 𝓛 ḟ_j/f_j`,
//! `Y_j = 𝓛/f_j` (index 0 is the circle, `d_0 = 1`). The soliton ODE becomes
//! polynomial in `(X, Y, 𝓛)` apart from the `Y_i⁴/Y_0²` twist terms:
//!
//! ```text
//! Σ'   = Σ d_j X_j² - (ε/2) 𝓛²
//! X_0' = X_0 (Σ' - 1) + (ε/2) 𝓛² + Σ_i (d_i q_i²/4) Y_i⁴/Y_0²
//! X_i' = X_i (Σ' - 1) + (ε/2) 𝓛² + p_i Y_i² - (q_i²/2) Y_i⁴/Y_0²
//! Y_j' = Y_j (Σ' - X_j)
//! 𝓛'   = 𝓛 Σ'
//! ```
//!
//! Physical time and the potential ride along as `t' = 𝓛` and
//! `u' = Σ d_j X_j - 1`, so both are integrated to the same accuracy as the
//! rest of the state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{
    Direction, Event, Integrator, IntegratorConfig, SampleKind, Solution, Stats, Termination,
};
use crate::launch::{default_delta, launch, project_onto_constraint};
use crate::systems::{DancerWangAnsatz, SolitonState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lc: f64,
    pub s: f64,
    /// Physical time reached by quadrature.
    pub t: f64,
    pub u: f64,
}

impl RescaledState {
    pub fn factors(&self) -> usize {
        self.x.len() - 1
    }

    /// `[X.., Y.., 𝓛, t, u]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.x.len() + 3);
        v.extend(&self.x);
        v.extend(&self.y);
        v.extend([self.lc, self.t, self.u]);
        v
    }

    pub fn from_slice(s: f64, v: &[f64]) -> Self {
        let k = (v.len() - 3) / 2;
        RescaledState {
            x: v[..k].to_vec(),
            y: v[k..2 * k].to_vec(),
            lc: v[2 * k],
            s,
            t: v[2 * k + 1],
            u: v[2 * k + 2],
        }
    }

    /// The image of the singular orbit: `X_0 = Y_0 = 1`, everything else 0.
    pub fn critical_point(m: usize) -> Self {
        let mut x = vec![0.0; m + 1];
        let mut y = vec![0.0; m + 1];
        x[0] = 1.0;
        y[0] = 1.0;
        RescaledState {
            x,
            y,
            lc: 0.0,
            s: 0.0,
            t: 0.0,
            u: 0.0,
        }
    }
}

fn multiplicities(a: &DancerWangAnsatz) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(a.d.iter().map(|&d| d as f64))
        .collect()
}

pub fn to_rescaled(state: &SolitonState, a: &DancerWangAnsatz, s: f64) -> Result<RescaledState> {
    state.check(a.m() + 1)?;
    let d = multiplicities(a);
    let xi = state.xi(&d);
    if !(xi > 0.0) {
        return Err(Error::Precondition(format!(
            "-u̇ + tr L must be positive, got {xi}"
        )));
    }
    let lc = 1.0 / xi;
    Ok(RescaledState {
        x: state.shape().into_iter().map(|l| lc * l).collect(),
        y: state.f.iter().map(|f| lc / f).collect(),
        lc,
        s,
        t: state.t,
        u: state.u,
    })
}

/// Recovers `f_j = 𝓛/Y_j`, `ḟ_j = X_j/Y_j`, `u̇ = (Σ d_j X_j - 1)/𝓛`.
pub fn from_rescaled(r: &RescaledState, a: &DancerWangAnsatz) -> Result<SolitonState> {
    if !(r.lc > 0.0) {
        return Err(Error::non_positive("L", r.lc));
    }
    if let Some((i, &y)) = r.y.iter().enumerate().find(|(_, y)| !(**y > 0.0)) {
        return Err(Error::non_positive(format!("Y[{i}]"), y));
    }
    let d = multiplicities(a);
    let sum: f64 = d.iter().zip(&r.x).map(|(d, x)| d * x).sum();
    Ok(SolitonState {
        t: r.t,
        f: r.y.iter().map(|y| r.lc / y).collect(),
        df: r.x.iter().zip(&r.y).map(|(x, y)| x / y).collect(),
        u: r.u,
        du: (sum - 1.0) / r.lc,
    })
}

/// `Y_i⁴/Y_0²`, taken as 0 when `Y_i = 0`.
fn twist(yi: f64, y0sq: f64) -> f64 {
    if yi == 0.0 {
        0.0
    } else {
        yi.powi(4) / y0sq
    }
}

fn packed_rescaled(a: &DancerWangAnsatz, eps: f64) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    let d = multiplicities(a);
    move |_s, v, dv| {
        let k = d.len();
        let (x, y) = (&v[..k], &v[k..2 * k]);
        let lc = v[2 * k];
        let half_eps_l2 = 0.5 * eps * lc * lc;
        let mut sum_x = 0.0;
        let mut sum_x2 = 0.0;
        for j in 0..k {
            sum_x += d[j] * x[j];
            sum_x2 += d[j] * x[j] * x[j];
        }
        let sigma = sum_x2 - half_eps_l2;
        let y0sq = y[0] * y[0];
        let mut circle = 0.0;
        for i in 1..k {
            let q2 = (a.q[i - 1] * a.q[i - 1]) as f64;
            let twist = twist(y[i], y0sq);
            circle += d[i] * q2 / 4.0 * twist;
            dv[i] = x[i] * (sigma - 1.0) + half_eps_l2 + a.p[i - 1] as f64 * y[i] * y[i]
                - q2 / 2.0 * twist;
        }
        dv[0] = x[0] * (sigma - 1.0) + half_eps_l2 + circle;
        for j in 0..k {
            dv[k + j] = y[j] * (sigma - x[j]);
        }
        dv[2 * k] = lc * sigma;
        dv[2 * k + 1] = lc;
        dv[2 * k + 2] = sum_x - 1.0;
    }
}

/// `d/ds` of `(X, Y, 𝓛)`; `t` and `u` rates are left out.
pub fn rhs_rescaled(r: &RescaledState, a: &DancerWangAnsatz, eps: f64) -> RescaledState {
    let v = r.to_vec();
    let mut dv = vec![0.0; v.len()];
    packed_rescaled(a, eps)(r.s, &v, &mut dv);
    let mut out = RescaledState::from_slice(r.s, &dv);
    out.s = 1.0;
    out
}

/// Euclidean norm of the `(X, Y, 𝓛)` part of [`rhs_rescaled`].
pub fn rhs_norm(r: &RescaledState, a: &DancerWangAnsatz, eps: f64) -> f64 {
    let d = rhs_rescaled(r, a, eps);
    d.x.iter()
        .chain(&d.y)
        .chain(std::iter::once(&d.lc))
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusResiduals {
    /// `Σ d_j X_j - 1`.
    pub einstein_trace: f64,
    /// `Σ d_j X_j² + Σ d_i p_i Y_i² - Σ (d_i q_i²/4) Y_i⁴/Y_0² + (n-1)(ε/2)𝓛² - 1`.
    pub einstein_energy: f64,
    /// `X_i² - (q_i²/4) Y_i⁴/Y_0²` per factor.
    pub kahler_first: Vec<f64>,
    /// `X_i (X_0 + 1) - p_i Y_i² - (ε/2) 𝓛²` per factor.
    pub kahler_second: Vec<f64>,
}

pub fn rescaled_locus_residuals(
    r: &RescaledState,
    a: &DancerWangAnsatz,
    eps: f64,
) -> LocusResiduals {
    let d = multiplicities(a);
    let n: f64 = d.iter().sum();
    let y0sq = r.y[0] * r.y[0];
    let half_eps_l2 = 0.5 * eps * r.lc * r.lc;
    let mut trace = -1.0;
    let mut energy = -1.0 + (n - 1.0) * half_eps_l2;
    for j in 0..d.len() {
        trace += d[j] * r.x[j];
        energy += d[j] * r.x[j] * r.x[j];
    }
    let mut first = Vec::with_capacity(a.m());
    let mut second = Vec::with_capacity(a.m());
    for i in 0..a.m() {
        let (p, q2) = (a.p[i] as f64, (a.q[i] * a.q[i]) as f64);
        let yi = r.y[i + 1];
        let twist = twist(yi, y0sq);
        energy += d[i + 1] * (p * yi * yi - q2 / 4.0 * twist);
        let xi = r.x[i + 1];
        first.push(xi * xi - q2 / 4.0 * twist);
        second.push(xi * (r.x[0] + 1.0) - p * yi * yi - half_eps_l2);
    }
    LocusResiduals {
        einstein_trace: trace,
        einstein_energy: energy,
        kahler_first: first,
        kahler_second: second,
    }
}

/// `Σ d_j X_j² + Σ (d_i p_i/2) Y_i² + (n-1)(ε/2) 𝓛²`, bounded by 1 while
/// `Y_i²/Y_0² < 2 p_i/q_i²`.
pub fn bounded_energy(r: &RescaledState, a: &DancerWangAnsatz, eps: f64) -> f64 {
    let d = multiplicities(a);
    let n: f64 = d.iter().sum();
    let mut e = (n - 1.0) * 0.5 * eps * r.lc * r.lc;
    for j in 0..d.len() {
        e += d[j] * r.x[j] * r.x[j];
    }
    for i in 0..a.m() {
        e += d[i + 1] * a.p[i] as f64 / 2.0 * r.y[i + 1] * r.y[i + 1];
    }
    e
}

/// Whether `Y_i²/Y_0² < 2 p_i/q_i²` for every factor.
pub fn twist_bound_holds(r: &RescaledState, a: &DancerWangAnsatz) -> bool {
    (0..a.m()).all(|i| {
        let ratio = r.y[i + 1] / r.y[0];
        ratio * ratio < 2.0 * a.p[i] as f64 / (a.q[i] * a.q[i]) as f64
    })
}

/// Rescaled trajectory, with physical time carried in each state.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledTrajectory {
    pub states: Vec<RescaledState>,
    pub kinds: Vec<SampleKind>,
    pub termination: Termination,
    pub stats: Stats,
    /// Samples hit at requested physical times, in request order.
    pub at_times: Vec<(f64, RescaledState)>,
}

pub const EVENT_HORIZON: &str = "physical_horizon";

/// Integrates in `s` from the rescaled image of `state0` until the
/// recovered physical time reaches `t_max`. Requested physical times are
/// located as non-terminal events.
pub fn integrate_rescaled(
    a: &DancerWangAnsatz,
    eps: f64,
    state0: &SolitonState,
    cfg: &IntegratorConfig,
    physical_times: &[f64],
) -> Result<RescaledTrajectory> {
    cfg.validate()?;
    let r0 = to_rescaled(state0, a, 0.0)?;
    let k = a.m() + 1;
    let ti = 2 * k + 1;
    let t_max = cfg.t_max;
    // s runs much longer than t near the singular orbit, shorter later
    let s_cfg = IntegratorConfig {
        t_max: f64::MAX / 4.0,
        ..cfg.clone()
    };
    let mut integ = Integrator::new(s_cfg)
        .with_event(Event::new(EVENT_HORIZON, Direction::Rising, true, move |_, v| {
            v[ti] - t_max
        }))
        .with_validity(move |v| v[2 * k] > 0.0 && v[k..2 * k].iter().all(|&y| y > 0.0));
    let mut names = Vec::new();
    for (n, &tp) in physical_times.iter().enumerate() {
        if tp > state0.t && tp < t_max {
            let name = format!("t={n}");
            names.push((name.clone(), tp));
            integ = integ.with_event(Event::new(name, Direction::Rising, false, move |_, v| {
                v[ti] - tp
            }));
        }
    }
    let sol: Solution = integ.run(packed_rescaled(a, eps), 0.0, &r0.to_vec());
    let states: Vec<RescaledState> = sol
        .samples
        .iter()
        .map(|s| RescaledState::from_slice(s.t, &s.y))
        .collect();
    let mut at_times = Vec::new();
    for (name, tp) in &names {
        if let Some((_, s_at)) = sol.events.iter().find(|(n, _)| n == name) {
            if let Some(st) = states.iter().find(|st| st.s == *s_at) {
                at_times.push((*tp, st.clone()));
            }
        }
    }
    let termination = match sol.termination {
        Termination::Event { name, .. } if name == EVENT_HORIZON => Termination::ReachedTMax,
        other => other,
    };
    Ok(RescaledTrajectory {
        kinds: sol.samples.iter().map(|s| s.kind).collect(),
        states,
        termination,
        stats: sol.stats,
        at_times,
    })
}

/// Launch, projection and rescaled integration for a Dancer–Wang spec.
pub fn solve_rescaled(
    spec: &crate::systems::ProblemSpec,
    cfg: &IntegratorConfig,
    launch_delta: Option<f64>,
    physical_times: &[f64],
) -> Result<RescaledTrajectory> {
    let crate::systems::Ansatz::DancerWang(a) = &spec.ansatz else {
        return Err(Error::Unsupported(format!(
            "rescaled chart is only available for dancer_wang, not {}",
            spec.ansatz.name()
        )));
    };
    spec.validate()?;
    let delta = launch_delta.unwrap_or_else(|| default_delta(spec));
    let state = project_onto_constraint(&launch(spec, delta)?, spec)?;
    integrate_rescaled(a, spec.epsilon, &state, cfg, physical_times)
}
