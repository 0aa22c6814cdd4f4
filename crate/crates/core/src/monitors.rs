//! Diagnostics along trajectories: roots, loci, potential monotonicity,
//! asymptotics, growth probes, a priori bounds and the completeness verdict.
//!
//! Every report carries a `check` identifier naming the property it tests.
//! Tolerances here are artifact choices, not values from the theory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, Termination};
use crate::solve::{
    self, solve_problem, SolveOptions, Trajectory, EVENT_DEGENERATE, EVENT_INVARIANT,
    EVENT_OVERFLOW, EVENT_SHAPE,
};
use crate::systems::{
    conservation_residual, conservation_residual_trace_form, kahler_residual,
    u_second_derivative_identity, Ansatz, DancerWangAnsatz, Invariants, ProblemSpec, SolitonState,
    TwoSummandsAnsatz,
};

pub const CHECK_ROOTS: &str = "two_summands.discriminant_roots";
pub const CHECK_LOCUS: &str = "preserved_loci";
pub const CHECK_POTENTIAL: &str = "potential.monotone_concave";
pub const CHECK_ASYMPTOTE: &str = "potential.asymptotics";
pub const CHECK_GROWTH: &str = "potential.growth_estimate";
pub const CHECK_OMEGA: &str = "two_summands.omega_slope";
pub const CHECK_DW_APRIORI: &str = "dancer_wang.a_priori_bounds";
pub const CHECK_CONSERVATION: &str = "conservation_law";
pub const CHECK_SCALAR_BOUND: &str = "scalar_curvature_ceiling";
pub const CHECK_KAHLER: &str = "dancer_wang.kahler_locus";
pub const CHECK_VERDICT: &str = "completeness";

// ---------------------------------------------------------------- roots

/// Discriminant and roots of `A3(1/d1 + 2/d2) w² - (A2/d2) w + A1/d1` in
/// `w = ω²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSummandsDiagnostics {
    pub check: &'static str,
    pub discriminant: f64,
    pub omega1: Option<f64>,
    /// Square root of the larger root `w`. Reading `w` itself as `ω2` gives
    /// `(A2/A3)·d1/(2d1+d2)` when `A1 = 0`; that value is `ω2²`, not `ω2`.
    pub omega2: Option<f64>,
    /// `ω1² < A2/(4 A3)`.
    pub omega1_check: Option<bool>,
    /// `ω2² < A2/(2 A3)`.
    pub omega2_check: Option<bool>,
    /// `|f(ω_j)|` for both roots.
    pub back_substitution: Option<[f64; 2]>,
}

/// The quartic `f(ω) = A1/d1 - (A2/d2) ω² + A3 (1/d1 + 2/d2) ω⁴`.
pub fn omega_quartic(a: &TwoSummandsAnsatz, omega: f64) -> f64 {
    let (d1, d2) = (a.d1 as f64, a.d2 as f64);
    let w = omega * omega;
    a.a1 / d1 - a.a2 / d2 * w + a.a3 * (1.0 / d1 + 2.0 / d2) * w * w
}

pub fn two_summands_roots(a: &TwoSummandsAnsatz) -> TwoSummandsDiagnostics {
    let (d1, d2) = (a.d1 as f64, a.d2 as f64);
    let s = 2.0 * d1 + d2;
    let half_sum = a.a2 / (2.0 * a.a3) * d1 / s;
    let product = a.a1 / a.a3 * d2 / s;
    let disc = half_sum * half_sum - product;
    if disc < 0.0 {
        return TwoSummandsDiagnostics {
            check: CHECK_ROOTS,
            discriminant: disc,
            omega1: None,
            omega2: None,
            omega1_check: None,
            omega2_check: None,
            back_substitution: None,
        };
    }
    let root = disc.sqrt();
    // the smaller root via the product avoids cancellation
    let w2 = half_sum + root;
    let w1 = if w2 > 0.0 { product / w2 } else { 0.0 };
    let (o1, o2) = (w1.max(0.0).sqrt(), w2.sqrt());
    TwoSummandsDiagnostics {
        check: CHECK_ROOTS,
        discriminant: disc,
        omega1: Some(o1),
        omega2: Some(o2),
        omega1_check: Some(w1 < a.a2 / (4.0 * a.a3)),
        omega2_check: Some(w2 < a.a2 / (2.0 * a.a3)),
        back_substitution: Some([omega_quartic(a, o1).abs(), omega_quartic(a, o2).abs()]),
    }
}

/// `(Ric^{G/H})²/(4‖A‖²) ≥ (2d1 + d2)(d1 - 1)/d1`, the discriminant test in
/// base-curvature form (valid when `A1 = d1(d1-1)`).
pub fn discriminant_by_base_curvature(a: &TwoSummandsAnsatz) -> bool {
    let (d1, d2) = (a.d1 as f64, a.d2 as f64);
    a.base_ricci().powi(2) / (4.0 * a.o_neill_norm_sq()) >= (2.0 * d1 + d2) * (d1 - 1.0) / d1
}

/// Sufficient conditions for `C0 = 0`: `(d1+1) A2² > 4 d1 d2 (2d1+d2) A3`
/// and `A2² > 2 d2 (d2+2) A3`.
pub fn c0_zero_predicates(a: &TwoSummandsAnsatz) -> (bool, bool) {
    let (d1, d2) = (a.d1 as f64, a.d2 as f64);
    let a2sq = a.a2 * a.a2;
    (
        (d1 + 1.0) * a2sq > 4.0 * d1 * d2 * (2.0 * d1 + d2) * a.a3,
        a2sq > 2.0 * d2 * (d2 + 2.0) * a.a3,
    )
}

/// `y(s) = √(2a) tanh(√(a/2)(s* - s) + artanh(y*/√(2a)))`, solving
/// `y' = -a + y²/2`, `y(s*) = y*`.
pub fn comparison_ode_closed_form(a: f64, y_star: f64, s_star: f64, s: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::non_positive("a", a));
    }
    if !(-a + 0.5 * y_star * y_star < 0.0) {
        return Err(Error::Precondition(format!(
            "need -a + y*²/2 < 0, got a = {a}, y* = {y_star}"
        )));
    }
    let r = (2.0 * a).sqrt();
    Ok(r * ((a / 2.0).sqrt() * (s_star - s) + (y_star / r).atanh()).tanh())
}

// ---------------------------------------------------------------- loci

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusClass {
    Strict,
    Einstein,
    Outside,
    NotClassifiable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusReport {
    pub check: &'static str,
    /// `tr L / ξ`.
    pub trace_ratio: f64,
    /// `(tr L² + tr r)/ξ² + (n-1)(ε/2)/ξ²`.
    pub energy_ratio: f64,
    pub class: LocusClass,
}

pub const EINSTEIN_LOCUS_TOL: f64 = 1e-7;

pub fn locus_membership(state: &SolitonState, spec: &ProblemSpec) -> LocusReport {
    let inv = Invariants::at(state, &spec.ansatz);
    if !(inv.xi > 0.0) {
        return LocusReport {
            check: CHECK_LOCUS,
            trace_ratio: f64::NAN,
            energy_ratio: f64::NAN,
            class: LocusClass::NotClassifiable,
        };
    }
    let lc = 1.0 / inv.xi;
    let trace_ratio = inv.tr_l * lc;
    let energy_ratio =
        (inv.tr_l2 + inv.tr_r) * lc * lc + (inv.n - 1.0) * spec.epsilon / 2.0 * lc * lc;
    let class = if (trace_ratio - 1.0).abs() <= EINSTEIN_LOCUS_TOL
        && (energy_ratio - 1.0).abs() <= EINSTEIN_LOCUS_TOL
    {
        LocusClass::Einstein
    } else if trace_ratio < 1.0 && energy_ratio < 1.0 {
        LocusClass::Strict
    } else {
        LocusClass::Outside
    };
    LocusReport {
        check: CHECK_LOCUS,
        trace_ratio,
        energy_ratio,
        class,
    }
}

// ---------------------------------------------------------------- potential

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleViolation {
    pub index: usize,
    pub t: f64,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialReport {
    pub check: &'static str,
    /// `C = 0`: the potential vanishes and nothing is asserted.
    pub trivial: bool,
    pub max_abs_u: f64,
    pub samples_checked: usize,
    pub violations: Vec<SampleViolation>,
}

impl PotentialReport {
    pub fn first_violation(&self) -> Option<&SampleViolation> {
        self.violations.first()
    }
}

/// `u < 0`, `u̇ < 0` at every sample past launch, and `ü < 0` when `ε > 0`
/// or `L ≠ 0` (largest `ḟ_i/f_i` above `1e-12`).
pub fn potential_report(traj: &Trajectory) -> PotentialReport {
    let spec = &traj.spec;
    let max_abs_u = traj.states.iter().fold(0.0_f64, |m, s| m.max(s.u.abs()));
    let mut report = PotentialReport {
        check: CHECK_POTENTIAL,
        trivial: spec.c == 0.0,
        max_abs_u,
        samples_checked: 0,
        violations: Vec::new(),
    };
    if report.trivial {
        return report;
    }
    for (i, s) in traj.states.iter().enumerate() {
        if s.t <= traj.delta {
            continue;
        }
        report.samples_checked += 1;
        let mut flag = |q: &str, v: f64| {
            report.violations.push(SampleViolation {
                index: i,
                t: s.t,
                quantity: q.into(),
                value: v,
            })
        };
        if !(s.u < 0.0) {
            flag("u", s.u);
        }
        if !(s.du < 0.0) {
            flag("du", s.du);
        }
        let moving = s.shape().into_iter().fold(f64::NEG_INFINITY, f64::max) > 1e-12;
        if spec.epsilon > 0.0 || moving {
            let udd = traj.udd(i);
            if !(udd < 0.0) {
                flag("udd", udd);
            }
        }
    }
    report
}

// ---------------------------------------------------------------- asymptotics

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteReport {
    pub check: &'static str,
    pub steady: bool,
    pub t_end: f64,
    pub terminal_slope: f64,
    pub target_slope: f64,
    /// `|−u̇(t_end) − √−C| / √−C` (absolute when `C = 0`).
    pub slope_error: f64,
    pub terminal_udd: f64,
    /// Expanding: `−u̇(t) < (ε/2) t + √−C` failures.
    pub upper_bound_violations: Vec<SampleViolation>,
    /// Expanding: lower-bound failures over a grid of `t0 > 2√(5/ε)`.
    pub lower_bound_violations: Vec<SampleViolation>,
    pub lower_bound_windows: usize,
}

pub fn asymptote_check(traj: &Trajectory) -> AsymptoteReport {
    let spec = &traj.spec;
    let eps = spec.epsilon;
    let root = (-spec.c).max(0.0).sqrt();
    let last = traj.last();
    let terminal_udd = traj.udd(traj.len() - 1);
    let slope_error = if root > 0.0 {
        (-last.du - root).abs() / root
    } else {
        (-last.du).abs()
    };
    let mut report = AsymptoteReport {
        check: CHECK_ASYMPTOTE,
        steady: eps == 0.0,
        t_end: last.t,
        terminal_slope: -last.du,
        target_slope: root,
        slope_error,
        terminal_udd,
        upper_bound_violations: Vec::new(),
        lower_bound_violations: Vec::new(),
        lower_bound_windows: 0,
    };
    if eps == 0.0 {
        return report;
    }
    for (i, s) in traj.states.iter().enumerate() {
        let bound = eps / 2.0 * s.t + root;
        if !(-s.du < bound) {
            report.upper_bound_violations.push(SampleViolation {
                index: i,
                t: s.t,
                quantity: "upper_bound_gap".into(),
                value: -s.du - bound,
            });
        }
    }
    let n = spec.ansatz.orbit_dim();
    let shift = (n * eps / 2.0).sqrt() + root;
    let threshold = 2.0 * (5.0 / eps).sqrt();
    let starts: Vec<usize> = (0..traj.len())
        .filter(|&i| traj.states[i].t > threshold)
        .collect();
    let stride = (starts.len() / 10).max(1);
    for &i0 in starts.iter().step_by(stride) {
        report.lower_bound_windows += 1;
        let s0 = &traj.states[i0];
        let denom = eps / 2.0 * s0.t + shift;
        for (i, s) in traj.states.iter().enumerate().skip(i0) {
            let lower = 0.9 * (eps / 2.0 * s.t + shift) / denom * (-s0.du);
            if !(lower < -s.du) {
                report.lower_bound_violations.push(SampleViolation {
                    index: i,
                    t: s.t,
                    quantity: format!("lower_bound_gap(t0={})", s0.t),
                    value: lower + s.du,
                });
            }
        }
    }
    report
}

// ---------------------------------------------------------------- growth probe

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSample {
    #[serde(rename = "C")]
    pub c: f64,
    /// `−u̇(τ)`, absent when the run did not reach `τ`.
    pub slope: Option<f64>,
    /// Smallest `ḟ_i/f_i` seen on `[δ, τ]`.
    pub min_shape: f64,
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthProbeReport {
    pub check: &'static str,
    pub c: f64,
    pub tau: f64,
    /// `−tr_g B` at launch; `None` when it is unbounded there (`d_S > 1`).
    pub c_star: Option<f64>,
    pub empirical_c0: f64,
    /// Least negative sampled `C` known to miss the target.
    pub failing_c: f64,
    pub samples: Vec<ProbeSample>,
    /// `−u̇(τ)` fails to be nonincreasing in `C` somewhere on the grid.
    pub monotonicity_violated: bool,
}

/// `−tr_g B` at the launch sizes, where finite.
pub fn curvature_budget(spec: &ProblemSpec) -> Option<f64> {
    let g = &spec.initial;
    match &spec.ansatz {
        Ansatz::TwoSummands(a) => (a.d1 == 1).then(|| a.a2 / (g[0] * g[0])),
        Ansatz::DancerWang(a) => Some(
            (0..a.m())
                .map(|i| (a.d[i] as i64 * a.p[i]) as f64 / (g[i] * g[i]))
                .sum(),
        ),
        Ansatz::Lpp(a) => Some(
            (a.d1 as i64 * a.p1) as f64 / (g[0] * g[0])
                + (a.d2 * (a.d2 - 1)) as f64 / (g[1] * g[1]),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeOptions {
    /// Grid `C = -10^e` for `e` from `log_min` to `log_max`.
    pub log_min: f64,
    pub log_max: f64,
    pub per_decade: usize,
    /// Relative bracket width.
    pub rel_bracket: f64,
    /// Lowest `|C|` reached when extending the grid towards zero.
    pub floor: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            log_min: -2.0,
            log_max: 4.0,
            per_decade: 4,
            rel_bracket: 0.01,
            floor: 1e-12,
        }
    }
}

fn probe_one(
    spec: &ProblemSpec,
    c: f64,
    tau: f64,
    cfg: &IntegratorConfig,
    opts: &SolveOptions,
) -> ProbeSample {
    let mut s = spec.clone();
    s.c = c;
    let cfg = IntegratorConfig {
        t_max: tau,
        ..cfg.clone()
    };
    let opts = SolveOptions {
        shape_event: false,
        invariant_event: false,
        ..opts.clone()
    };
    match solve_problem(&s, &cfg, &opts) {
        Ok(traj) => {
            let min_shape = traj
                .states
                .iter()
                .flat_map(|st| st.shape())
                .fold(f64::INFINITY, f64::min);
            if !traj.reached_t_max() {
                return ProbeSample {
                    c,
                    slope: None,
                    min_shape,
                    excluded: Some(format!("{:?}", traj.termination)),
                };
            }
            let excluded = (min_shape <= 0.0).then(|| "shape operator not positive".to_string());
            ProbeSample {
                c,
                slope: Some(-traj.last().du),
                min_shape,
                excluded,
            }
        }
        Err(e) => ProbeSample {
            c,
            slope: None,
            min_shape: f64::NAN,
            excluded: Some(e.to_string()),
        },
    }
}

fn meets(s: &ProbeSample, target: f64) -> bool {
    s.excluded.is_none() && s.slope.is_some_and(|v| v >= target)
}

/// Samples `C` on a logarithmic grid, then bisects (geometrically) between
/// the least negative `C` whose every more negative neighbour meets
/// `−u̇(τ) ≥ c` and the next grid point towards zero.
pub fn growth_probe(
    spec: &ProblemSpec,
    c: f64,
    tau: f64,
    cfg: &IntegratorConfig,
    solve_opts: &SolveOptions,
    opts: &ProbeOptions,
) -> Result<GrowthProbeReport> {
    if !(c > 0.0) {
        return Err(Error::non_positive("c", c));
    }
    let mut base = spec.clone();
    base.c = -1.0;
    base.validate()?;
    let delta = solve_opts
        .launch_delta
        .unwrap_or_else(|| crate::launch::default_delta(&base));
    if !(tau > delta) {
        return Err(Error::invalid("tau", format!("must exceed launch_delta = {delta}")));
    }
    let steps = ((opts.log_max - opts.log_min) * opts.per_decade as f64).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| -(10f64).powf(opts.log_min + k as f64 / opts.per_decade as f64))
        .collect();
    let run = |cs: &[f64]| -> Vec<ProbeSample> {
        cs.par_iter()
            .map(|&cv| probe_one(spec, cv, tau, cfg, solve_opts))
            .collect()
    };
    // grid is ordered from small |C| to large |C|
    let mut samples = run(&grid);

    let admissible_from = |samples: &[ProbeSample]| -> Option<usize> {
        // least negative index such that it and every more negative one meet
        let mut idx = None;
        for i in (0..samples.len()).rev() {
            if meets(&samples[i], c) {
                idx = Some(i);
            } else {
                break;
            }
        }
        idx
    };

    let Some(mut ok) = admissible_from(&samples) else {
        let last = samples.last().expect("grid is nonempty");
        return Err(Error::NoAdmissibleC {
            most_negative: last.c,
            best_slope: samples
                .iter()
                .filter_map(|s| s.slope)
                .fold(f64::NEG_INFINITY, f64::max),
        });
    };

    // every grid point succeeded: extend towards zero until one fails
    while ok == 0 {
        let next = samples[0].c / 10.0;
        if next.abs() < opts.floor {
            break;
        }
        let s = probe_one(spec, next, tau, cfg, solve_opts);
        samples.insert(0, s);
        ok = if meets(&samples[0], c) { 0 } else { 1 };
    }

    let mut good = samples[ok].c;
    let mut bad = if ok > 0 { samples[ok - 1].c } else { 0.0 };
    let mut extra = Vec::new();
    while bad != 0.0 && (good - bad).abs() > opts.rel_bracket * good.abs() {
        let mid = -((good * bad).sqrt());
        let s = probe_one(spec, mid, tau, cfg, solve_opts);
        if meets(&s, c) {
            good = mid;
        } else {
            bad = mid;
        }
        extra.push(s);
    }
    samples.extend(extra);
    samples.sort_by(|a, b| a.c.total_cmp(&b.c));

    // slopes should not decrease as C decreases
    let slopes: Vec<f64> = samples.iter().filter_map(|s| s.slope).collect();
    let monotonicity_violated = slopes.windows(2).any(|w| w[0] < w[1] * (1.0 - 1e-9));

    Ok(GrowthProbeReport {
        check: CHECK_GROWTH,
        c,
        tau,
        c_star: curvature_budget(&base),
        empirical_c0: good,
        failing_c: bad,
        samples,
        monotonicity_violated,
    })
}

// ---------------------------------------------------------------- omega

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub check: &'static str,
    pub omega2: Option<f64>,
    pub slope_bound: f64,
    pub max_omega: f64,
    pub max_omega_dot: f64,
    /// `ω̇ ≤ (1/f̄)(1 + 1e-6)` wherever `ω ∈ [0, ω2]`.
    pub slope_violations: Vec<SampleViolation>,
    pub below_omega2_throughout: Option<bool>,
    /// No real roots: the window `(0, ω2)` does not exist.
    pub no_root_regime: bool,
}

pub fn two_summands_omega_monitor(traj: &Trajectory) -> Result<OmegaReport> {
    let Ansatz::TwoSummands(a) = &traj.spec.ansatz else {
        return Err(Error::Unsupported("omega monitor needs two summands".into()));
    };
    let roots = two_summands_roots(a);
    let fbar = traj.spec.initial[0];
    let slope_bound = 1.0 / fbar;
    let mut report = OmegaReport {
        check: CHECK_OMEGA,
        omega2: roots.omega2,
        slope_bound,
        max_omega: 0.0,
        max_omega_dot: f64::NEG_INFINITY,
        slope_violations: Vec::new(),
        below_omega2_throughout: roots.omega2.map(|_| true),
        no_root_regime: roots.omega2.is_none(),
    };
    for (i, s) in traj.states.iter().enumerate() {
        let w = s.f[0] / s.f[1];
        let wd = w * (s.df[0] / s.f[0] - s.df[1] / s.f[1]);
        report.max_omega = report.max_omega.max(w);
        report.max_omega_dot = report.max_omega_dot.max(wd);
        if let Some(o2) = roots.omega2 {
            if w >= o2 {
                report.below_omega2_throughout = Some(false);
            } else if traj.spec.c <= 0.0 && wd > slope_bound * (1.0 + 1e-6) {
                report.slope_violations.push(SampleViolation {
                    index: i,
                    t: s.t,
                    quantity: "omega_dot".into(),
                    value: wd,
                });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- Dancer–Wang

/// `C0 = max over pairs of {Q_ij(0), √((d_j+2)/d_j · p_i/p_j)} + 1`, or 1
/// for a single factor.
pub fn dw_c0(a: &DancerWangAnsatz, gbar: &[f64]) -> f64 {
    let m = a.m();
    if m == 1 {
        return 1.0;
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..m {
        for j in 0..m {
            let q0 = gbar[i] / gbar[j];
            let ratio = ((a.d[j] as f64 + 2.0) / a.d[j] as f64 * a.p[i] as f64 / a.p[j] as f64).sqrt();
            best = best.max(q0).max(ratio);
        }
    }
    best + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DwMonitorState {
    pub t: f64,
    pub omega: Vec<f64>,
    /// Row-major `Q_ij = g_i/g_j`.
    pub q: Vec<f64>,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DwReport {
    pub check: &'static str,
    pub c0: f64,
    pub omega_bounds: Vec<f64>,
    pub states: Vec<DwMonitorState>,
    pub bound_ok_throughout: bool,
    /// `Q̇_ij ≤ √(p_i/((d_i-1) g_j(0)²))` failures (`d_i > 1`).
    pub q_dot_violations: Vec<SampleViolation>,
    /// `p_i/g_i² - (q_i²/2) f²/g_i⁴ ≥ d_i p_i/((d_i+2) g_i²)` failures while
    /// the bound holds.
    pub key_estimate_violations: Vec<SampleViolation>,
}

pub fn dw_apriori_monitor(traj: &Trajectory) -> Result<DwReport> {
    let Ansatz::DancerWang(a) = &traj.spec.ansatz else {
        return Err(Error::Unsupported("a priori monitor needs Dancer–Wang".into()));
    };
    let m = a.m();
    let gbar = &traj.spec.initial;
    let c0 = dw_c0(a, gbar);
    let pmin = a.p.iter().copied().min().unwrap_or(1) as f64;
    let omega_bounds: Vec<f64> = (0..m)
        .map(|i| {
            let q2 = (a.q[i] * a.q[i]) as f64;
            pmin * 4.0 / (m as f64 * c0 * c0 * (a.d[i] as f64 + 2.0) * q2)
        })
        .collect();
    let mut report = DwReport {
        check: CHECK_DW_APRIORI,
        c0,
        omega_bounds: omega_bounds.clone(),
        states: Vec::with_capacity(traj.len()),
        bound_ok_throughout: true,
        q_dot_violations: Vec::new(),
        key_estimate_violations: Vec::new(),
    };
    for (idx, s) in traj.states.iter().enumerate() {
        let f = s.f[0];
        let g = &s.f[1..];
        let l: Vec<f64> = s.shape()[1..].to_vec();
        let omega: Vec<f64> = g.iter().map(|gi| f / gi).collect();
        let mut q = Vec::with_capacity(m * m);
        let mut ok = true;
        for i in 0..m {
            ok &= omega[i] * omega[i] <= omega_bounds[i];
            for j in 0..m {
                let qij = g[i] / g[j];
                ok &= qij <= c0;
                q.push(qij);
            }
        }
        if ok {
            for i in 0..m {
                let (p, q2, d) = (a.p[i] as f64, (a.q[i] * a.q[i]) as f64, a.d[i] as f64);
                let lhs = p / (g[i] * g[i]) - q2 / 2.0 * f * f / g[i].powi(4);
                let rhs = d * p / ((d + 2.0) * g[i] * g[i]);
                if lhs < rhs * (1.0 - 1e-12) {
                    report.key_estimate_violations.push(SampleViolation {
                        index: idx,
                        t: s.t,
                        quantity: format!("key_estimate[{i}]"),
                        value: lhs - rhs,
                    });
                }
                if a.d[i] > 1 {
                    for j in 0..m {
                        let qdot = g[i] / g[j] * (l[i] - l[j]);
                        let ceiling = (p / ((d - 1.0) * gbar[j] * gbar[j])).sqrt();
                        if qdot > ceiling * (1.0 + 1e-8) + 1e-12 {
                            report.q_dot_violations.push(SampleViolation {
                                index: idx,
                                t: s.t,
                                quantity: format!("q_dot[{i}{j}]"),
                                value: qdot - ceiling,
                            });
                        }
                    }
                }
            }
        }
        report.bound_ok_throughout &= ok;
        report.states.push(DwMonitorState {
            t: s.t,
            omega,
            q,
            bound_ok: ok,
        });
    }
    Ok(report)
}

/// Largest `|2 g_i ġ_i + q_i f|` along a Dancer–Wang trajectory.
pub fn kahler_drift(traj: &Trajectory) -> Result<f64> {
    let Ansatz::DancerWang(a) = &traj.spec.ansatz else {
        return Err(Error::Unsupported("Kähler residual needs Dancer–Wang".into()));
    };
    Ok(traj
        .states
        .iter()
        .flat_map(|s| kahler_residual(s, a))
        .fold(0.0_f64, |m, r| m.max(r.abs())))
}

// ---------------------------------------------------------------- conservation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub check: &'static str,
    /// Largest `|ü + ξ u̇ − C − ε u|`.
    pub max_residual: f64,
    /// Largest `|trace form|`.
    pub max_trace_residual: f64,
    /// Largest difference between the two forms, relative to the size of
    /// their largest term.
    pub max_form_disagreement: f64,
    /// Largest `|2ü − identity|/(1 + |2ü|)`.
    pub max_identity_error: f64,
    /// Largest excess of `tr r` over `1/2 Σ d_i b_i / f_i²`.
    pub max_scalar_excess: f64,
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let spec = &traj.spec;
    let d = spec.ansatz.multiplicities();
    let b = spec.ansatz.killing_coefficients();
    let mut out = ConservationReport {
        check: CHECK_CONSERVATION,
        max_residual: 0.0,
        max_trace_residual: 0.0,
        max_form_disagreement: 0.0,
        max_identity_error: 0.0,
        max_scalar_excess: f64::NEG_INFINITY,
    };
    for (i, s) in traj.states.iter().enumerate() {
        let udd = traj.udd(i);
        let r3 = conservation_residual(s, udd, spec);
        let r4 = conservation_residual_trace_form(s, spec);
        let inv = Invariants::at(s, &spec.ansatz);
        let scale = 1.0 + inv.tr_r.abs() + inv.tr_l2 + inv.xi * inv.xi + spec.c.abs();
        out.max_residual = out.max_residual.max(r3.abs());
        out.max_trace_residual = out.max_trace_residual.max(r4.abs());
        out.max_form_disagreement = out.max_form_disagreement.max((r3 - r4).abs() / scale);
        let ident = u_second_derivative_identity(s, spec);
        out.max_identity_error = out
            .max_identity_error
            .max((2.0 * udd - ident).abs() / (1.0 + 2.0 * udd.abs()));
        let ceiling: f64 = (0..d.len()).map(|k| 0.5 * d[k] * b[k] / (s.f[k] * s.f[k])).sum();
        out.max_scalar_excess = out.max_scalar_excess.max(inv.tr_r - ceiling);
    }
    out
}

// ---------------------------------------------------------------- verdict

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Reached the horizon with every monitored invariant intact. Evidence
    /// up to `t_max`, not a proof of completeness.
    NumericallyComplete,
    InvariantSetExit { t: f64, reason: String },
    MetricDegenerate { t: f64 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NumericallyComplete => "numerically_complete",
            Verdict::InvariantSetExit { .. } => "invariant_set_exit",
            Verdict::MetricDegenerate { .. } => "metric_degenerate",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    /// Conservation residual allowed, times `1 + |C|`.
    pub residual_tol: f64,
    /// Re-check the a priori bound and the shape-operator sign at every sample.
    pub invariant_set: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            residual_tol: 1e-6,
            invariant_set: true,
        }
    }
}

pub fn classify_completeness(traj: &Trajectory, opts: &ClassifyOptions) -> Verdict {
    match &traj.termination {
        Termination::ReachedTMax => {}
        Termination::Event { name, t } => {
            return match name.as_str() {
                EVENT_DEGENERATE => Verdict::MetricDegenerate { t: *t },
                EVENT_INVARIANT | EVENT_SHAPE => Verdict::InvariantSetExit {
                    t: *t,
                    reason: name.clone(),
                },
                EVENT_OVERFLOW => Verdict::Inconclusive {
                    reason: format!("state overflow at t = {t}"),
                },
                other => Verdict::Inconclusive {
                    reason: format!("stopped by event {other} at t = {t}"),
                },
            }
        }
        Termination::StepFailure { t, reason } => {
            return Verdict::Inconclusive {
                reason: format!("step failure at t = {t}: {reason}"),
            }
        }
        Termination::StateInvalid { t } => return Verdict::MetricDegenerate { t: *t },
    }
    let event = solve::invariant_event(&traj.spec);
    for s in traj.states.iter().filter(|_| opts.invariant_set) {
        let y = s.to_vec();
        if event.eval(s.t, &y) > 0.0 {
            return Verdict::InvariantSetExit {
                t: s.t,
                reason: EVENT_INVARIANT.into(),
            };
        }
        if s.shape().iter().any(|&l| !(l > 0.0)) {
            return Verdict::InvariantSetExit {
                t: s.t,
                reason: EVENT_SHAPE.into(),
            };
        }
    }
    let cons = conservation_report(traj);
    let tol = opts.residual_tol * (1.0 + traj.spec.c.abs());
    if !(cons.max_residual <= tol) {
        return Verdict::Inconclusive {
            reason: format!(
                "conservation residual {:.3e} exceeds {tol:.3e}",
                cons.max_residual
            ),
        };
    }
    Verdict::NumericallyComplete
}
