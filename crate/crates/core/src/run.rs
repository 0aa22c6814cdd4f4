//! Config-driven runs and their on-disk artifacts.
//!
//! A run directory holds `trajectory.csv`, `report.json`, `plot.svg`, an
//! optional `rescaled.csv`, and finally `manifest.json`, which is written
//! last and atomically.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{IsotropyDecomposition, ScalingVector, ValidationReport};
use crate::integrator::{IntegratorConfig, SampleKind, Termination};
use crate::launch::default_delta;
use crate::monitors::{self, ClassifyOptions, GrowthProbeReport, LocusClass, ProbeOptions, Verdict};
use crate::rescaled::{
    from_rescaled, rescaled_locus_residuals, rhs_norm, solve_rescaled, to_rescaled,
    RescaledState, RescaledTrajectory,
};
use crate::solve::{invariant_event, solve_problem, SolveOptions, Trajectory};
use crate::systems::{conservation_residual, conservation_residual_trace_form, Ansatz, ProblemSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes shared by the command-line front ends.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INVARIANT_EXIT: i32 = 2;
    pub const NO_ADMISSIBLE_C: i32 = 3;
    pub const CONFIG: i32 = 64;
    pub const DATA: i32 = 65;
    pub const INTEGRATOR: i32 = 70;
}

/// Exit code for an error that stopped a command before it produced a verdict.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::NonPositive { .. }
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::Unsupported(_)
        | Error::Json(_) => exit::CONFIG,
        Error::NoAdmissibleC { .. } => exit::NO_ADMISSIBLE_C,
        Error::Precondition(_) | Error::Io { .. } => exit::FAILURE,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    #[default]
    Physical,
    Rescaled,
    /// Physical run, cross-checked against the rescaled chart.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    Conservation,
    Potential,
    Asymptotics,
    Loci,
    InvariantSet,
    Ansatz,
    Kahler,
}

impl Monitor {
    pub const ALL: [Monitor; 7] = [
        Monitor::Conservation,
        Monitor::Potential,
        Monitor::Asymptotics,
        Monitor::Loci,
        Monitor::InvariantSet,
        Monitor::Ansatz,
        Monitor::Kahler,
    ];
}

fn all_monitors() -> Vec<Monitor> {
    Monitor::ALL.to_vec()
}

const VERDICT_NAMES: [&str; 4] = [
    "numerically_complete",
    "invariant_set_exit",
    "metric_degenerate",
    "inconclusive",
];

/// Parsed config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub spec: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub launch_delta: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub chart: Chart,
    #[serde(default = "all_monitors")]
    pub monitors: Vec<Monitor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

impl RunConfig {
    pub fn new(spec: ProblemSpec) -> Self {
        RunConfig {
            spec,
            launch_delta: None,
            integrator: IntegratorConfig::default(),
            chart: Chart::Physical,
            monitors: all_monitors(),
            expect: None,
        }
    }

    /// Parses and validates.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.integrator.validate()?;
        if let Some(d) = self.launch_delta {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::non_positive("launch_delta", d));
            }
        }
        if self.integrator.t_max <= self.delta() {
            return Err(Error::invalid(
                "integrator.t_max",
                format!("must exceed the launch time {}", self.delta()),
            ));
        }
        if self.chart != Chart::Physical && !matches!(self.spec.ansatz, Ansatz::DancerWang(_)) {
            return Err(Error::invalid(
                "chart",
                format!("the rescaled chart needs dancer_wang, not {}", self.spec.ansatz.name()),
            ));
        }
        if let Some(e) = &self.expect {
            if !VERDICT_NAMES.contains(&e.as_str()) {
                return Err(Error::invalid(
                    "expect",
                    format!("unknown verdict {e:?}; use one of {}", VERDICT_NAMES.join(", ")),
                ));
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.launch_delta.unwrap_or_else(|| default_delta(&self.spec))
    }

    fn has(&self, m: Monitor) -> bool {
        self.monitors.contains(&m)
    }

    /// First 16 hex digits of the SHA-256 of the normalized config and the
    /// tool version.
    pub fn run_id(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::new()
            .chain_update(text.as_bytes())
            .chain_update(b"\0")
            .chain_update(TOOL_VERSION.as_bytes())
            .finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Headline numbers copied into manifests and sweep summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyDiagnostics {
    pub t_end: f64,
    pub terminal_minus_du: f64,
    pub max_conservation_residual: f64,
    /// Largest distance from the Einstein locus in normalized coordinates.
    pub max_einstein_locus_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_kahler_residual: Option<f64>,
    pub expanding_upper_violations: usize,
    pub potential_violations: usize,
}

/// Physical and rescaled charts compared at common times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartComparison {
    pub times: Vec<f64>,
    /// Largest relative difference in `f`, `ḟ` and `u̇` (relative to
    /// `max(1, |value|)` for the derivatives).
    pub max_difference: f64,
    pub rescaled_termination: Termination,
    /// Both Kähler families, largest over samples, per chart.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kahler_physical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kahler_rescaled: Option<f64>,
    /// `|rhs_rescaled|` at the image of the singular orbit.
    pub critical_point_rhs_norm: f64,
    pub seed_distance_to_critical_point: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub run_id: String,
    pub trajectory: Trajectory,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub diagnostics: KeyDiagnostics,
    pub report: Value,
    pub rescaled: Option<RescaledTrajectory>,
    pub chart_comparison: Option<ChartComparison>,
}

/// Verdict to exit code, honouring an expected verdict.
pub fn solve_exit_code(verdict: &Verdict, termination: &Termination, expect: Option<&str>) -> i32 {
    if matches!(termination, Termination::StepFailure { .. }) {
        return exit::INTEGRATOR;
    }
    match (expect, verdict) {
        (Some(e), v) if e == v.name() => exit::OK,
        (Some(_), _) => exit::FAILURE,
        (None, Verdict::NumericallyComplete) => exit::OK,
        (None, Verdict::InvariantSetExit { .. }) => exit::INVARIANT_EXIT,
        (None, _) => exit::FAILURE,
    }
}

const COMPARISON_HORIZON: f64 = 10.0;
const COMPARISON_STEP: f64 = 0.25;

/// Runs the configured chart(s) and every enabled monitor.
pub fn execute(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    let spec = &config.spec;
    let compare_times: Vec<f64> = (1..)
        .map(|k| f64::from(k) * COMPARISON_STEP)
        .take_while(|&t| t <= COMPARISON_HORIZON && t < config.integrator.t_max)
        .filter(|&t| t > config.delta())
        .collect();
    let opts = SolveOptions {
        launch_delta: config.launch_delta,
        invariant_event: config.has(Monitor::InvariantSet),
        shape_event: config.has(Monitor::InvariantSet),
        output_times: if config.chart == Chart::Both {
            compare_times.clone()
        } else {
            Vec::new()
        },
        ..SolveOptions::default()
    };
    let (trajectory, rescaled) = match config.chart {
        Chart::Physical => (solve_problem(spec, &config.integrator, &opts)?, None),
        Chart::Rescaled => {
            let rt = solve_rescaled(spec, &config.integrator, config.launch_delta, &[])?;
            (physical_view(spec, config.delta(), &rt)?, Some(rt))
        }
        Chart::Both => {
            let traj = solve_problem(spec, &config.integrator, &opts)?;
            let rt = solve_rescaled(spec, &config.integrator, config.launch_delta, &compare_times)?;
            (traj, Some(rt))
        }
    };
    let chart_comparison = match (&rescaled, config.chart) {
        (Some(rt), Chart::Both) => Some(compare_charts(&trajectory, rt)?),
        _ => None,
    };
    let classify = ClassifyOptions {
        invariant_set: config.has(Monitor::InvariantSet),
        ..ClassifyOptions::default()
    };
    let verdict = monitors::classify_completeness(&trajectory, &classify);
    let exit_code = solve_exit_code(&verdict, &trajectory.termination, config.expect.as_deref());
    let (checks, diagnostics) = run_monitors(config, &trajectory);
    let run_id = config.run_id();
    let report = json!({
        "run_id": run_id,
        "tool_version": TOOL_VERSION,
        "system": spec.ansatz.name(),
        "chart": config.chart,
        "launch_delta": trajectory.delta,
        "verdict": verdict,
        "expect": config.expect,
        "exit_code": exit_code,
        "termination": trajectory.termination,
        "events": trajectory.events,
        "stats": trajectory.stats,
        "diagnostics": diagnostics,
        "checks": checks,
        "chart_equivalence": chart_comparison,
    });
    Ok(RunResult {
        config: config.clone(),
        run_id,
        trajectory,
        verdict,
        exit_code,
        diagnostics,
        report,
        rescaled,
        chart_comparison,
    })
}

/// Rescaled samples expressed as physical states.
pub fn physical_view(spec: &ProblemSpec, delta: f64, rt: &RescaledTrajectory) -> Result<Trajectory> {
    let Ansatz::DancerWang(a) = &spec.ansatz else {
        return Err(Error::Unsupported("rescaled chart needs dancer_wang".into()));
    };
    let states = rt
        .states
        .iter()
        .map(|r| from_rescaled(r, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        spec: spec.clone(),
        delta,
        states,
        kinds: rt.kinds.clone(),
        termination: rt.termination.clone(),
        stats: rt.stats,
        events: Vec::new(),
    })
}

fn kahler_max(states: &[RescaledState], spec: &ProblemSpec) -> Option<f64> {
    let Ansatz::DancerWang(a) = &spec.ansatz else {
        return None;
    };
    Some(states.iter().fold(0.0_f64, |m, r| {
        let res = rescaled_locus_residuals(r, a, spec.epsilon);
        res.kahler_first
            .iter()
            .chain(&res.kahler_second)
            .fold(m, |m, v| m.max(v.abs()))
    }))
}

fn rescaled_images(traj: &Trajectory) -> Vec<RescaledState> {
    let Ansatz::DancerWang(a) = &traj.spec.ansatz else {
        return Vec::new();
    };
    traj.states
        .iter()
        .filter_map(|s| to_rescaled(s, a, f64::NAN).ok())
        .collect()
}

pub fn compare_charts(traj: &Trajectory, rt: &RescaledTrajectory) -> Result<ChartComparison> {
    let Ansatz::DancerWang(a) = &traj.spec.ansatz else {
        return Err(Error::Unsupported("chart comparison needs dancer_wang".into()));
    };
    let mut worst = 0.0_f64;
    let mut times = Vec::new();
    for (t, r) in &rt.at_times {
        let Some(p) = traj.at(*t) else { continue };
        let q = from_rescaled(r, a)?;
        for i in 0..p.f.len() {
            worst = worst.max((q.f[i] - p.f[i]).abs() / p.f[i]);
            worst = worst.max((q.df[i] - p.df[i]).abs() / p.df[i].abs().max(1.0));
        }
        worst = worst.max((q.du - p.du).abs() / p.du.abs().max(1.0));
        times.push(*t);
    }
    let m = a.m();
    let seed = &rt.states[0];
    let cp = RescaledState::critical_point(m);
    let dist = seed
        .x
        .iter()
        .zip(&cp.x)
        .chain(seed.y.iter().zip(&cp.y))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ChartComparison {
        times,
        max_difference: worst,
        rescaled_termination: rt.termination.clone(),
        kahler_physical: kahler_max(&rescaled_images(traj), &traj.spec),
        kahler_rescaled: kahler_max(&rt.states, &traj.spec),
        critical_point_rhs_norm: rhs_norm(&cp, a, traj.spec.epsilon),
        seed_distance_to_critical_point: dist,
    })
}

#[derive(Debug, Clone, Serialize)]
struct LociSummary {
    check: &'static str,
    strict: usize,
    einstein: usize,
    outside: usize,
    not_classifiable: usize,
    max_einstein_residual: f64,
    /// `C < 0` runs: the strict trace inequality held at every sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    strict_trace_preserved: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
struct InvariantSummary {
    check: &'static str,
    /// Largest value of the bound function; negative means inside.
    max_bound_value: f64,
    samples_outside: usize,
}

fn run_monitors(config: &RunConfig, traj: &Trajectory) -> (Vec<Value>, KeyDiagnostics) {
    let spec = &traj.spec;
    let mut checks = Vec::new();
    let to_value = |r: Result<Value>, id: &str| {
        r.unwrap_or_else(|e| json!({ "check": id, "error": e.to_string() }))
    };
    let last = traj.last();
    let mut diag = KeyDiagnostics {
        t_end: last.t,
        terminal_minus_du: -last.du,
        max_conservation_residual: f64::NAN,
        max_einstein_locus_residual: 0.0,
        max_kahler_residual: None,
        expanding_upper_violations: 0,
        potential_violations: 0,
    };
    let cons = monitors::conservation_report(traj);
    diag.max_conservation_residual = cons.max_residual;
    if config.has(Monitor::Conservation) {
        checks.push(json!(cons));
    }
    let pot = monitors::potential_report(traj);
    diag.potential_violations = pot.violations.len();
    if config.has(Monitor::Potential) {
        checks.push(json!(pot));
    }
    let asym = monitors::asymptote_check(traj);
    diag.expanding_upper_violations = asym.upper_bound_violations.len();
    if config.has(Monitor::Asymptotics) {
        checks.push(json!(asym));
    }
    let mut loci = LociSummary {
        check: monitors::CHECK_LOCUS,
        strict: 0,
        einstein: 0,
        outside: 0,
        not_classifiable: 0,
        max_einstein_residual: 0.0,
        strict_trace_preserved: (spec.c < 0.0).then_some(true),
    };
    for s in &traj.states {
        let r = monitors::locus_membership(s, spec);
        match r.class {
            LocusClass::Strict => loci.strict += 1,
            LocusClass::Einstein => loci.einstein += 1,
            LocusClass::Outside => loci.outside += 1,
            LocusClass::NotClassifiable => loci.not_classifiable += 1,
        }
        let e = (r.trace_ratio - 1.0).abs().max((r.energy_ratio - 1.0).abs());
        if e.is_finite() {
            loci.max_einstein_residual = loci.max_einstein_residual.max(e);
        }
        if let Some(ok) = loci.strict_trace_preserved.as_mut() {
            *ok &= r.trace_ratio < 1.0;
        }
    }
    diag.max_einstein_locus_residual = loci.max_einstein_residual;
    if config.has(Monitor::Loci) {
        checks.push(json!(loci));
    }
    if config.has(Monitor::InvariantSet) {
        let ev = invariant_event(spec);
        let mut inv = InvariantSummary {
            check: match spec.ansatz {
                Ansatz::TwoSummands(_) => monitors::CHECK_OMEGA,
                _ => monitors::CHECK_DW_APRIORI,
            },
            max_bound_value: f64::NEG_INFINITY,
            samples_outside: 0,
        };
        for s in &traj.states {
            let v = ev.eval(s.t, &s.to_vec());
            inv.max_bound_value = inv.max_bound_value.max(v);
            inv.samples_outside += usize::from(v > 0.0);
        }
        checks.push(json!({ "invariant_set": inv }));
    }
    if config.has(Monitor::Ansatz) {
        match &spec.ansatz {
            Ansatz::TwoSummands(a) => {
                let (p1, p2) = monitors::c0_zero_predicates(a);
                let mut roots = json!(monitors::two_summands_roots(a));
                roots["c0_zero_predicates"] = json!([p1, p2]);
                checks.push(roots);
                checks.push(to_value(
                    monitors::two_summands_omega_monitor(traj).map(|r| json!(r)),
                    monitors::CHECK_OMEGA,
                ));
            }
            Ansatz::DancerWang(_) => checks.push(to_value(
                monitors::dw_apriori_monitor(traj).map(|r| json!(r)),
                monitors::CHECK_DW_APRIORI,
            )),
            Ansatz::Lpp(_) => {}
        }
    }
    if config.has(Monitor::Kahler) {
        if let Some(k) = kahler_max(&rescaled_images(traj), spec) {
            diag.max_kahler_residual = Some(k);
            checks.push(json!({ "check": monitors::CHECK_KAHLER, "max_residual": k }));
        }
    }
    (checks, diag)
}

// ---------------------------------------------------------------- csv

fn num(out: &mut String, v: f64) {
    let _ = write!(out, ",{v:.16e}");
}

pub fn trajectory_header(spec: &ProblemSpec) -> String {
    let k = spec.ansatz.components();
    let mut cols = vec!["t".to_string(), "kind".to_string()];
    cols.extend((0..k).map(|i| format!("f_{i}")));
    cols.extend((0..k).map(|i| format!("df_{i}")));
    cols.extend(
        [
            "u",
            "du",
            "udd",
            "conservation_residual",
            "trace_form_residual",
            "trace_ratio",
            "energy_ratio",
            "invariant_bound",
        ]
        .map(String::from),
    );
    match &spec.ansatz {
        Ansatz::TwoSummands(_) | Ansatz::Lpp(_) => cols.push("omega".into()),
        Ansatz::DancerWang(a) => {
            cols.extend((0..a.m()).map(|i| format!("omega_{}", i + 1)));
            cols.extend((0..a.m()).map(|i| format!("kahler_first_{}", i + 1)));
            cols.extend((0..a.m()).map(|i| format!("kahler_second_{}", i + 1)));
        }
    }
    cols.join(",")
}

fn kind_name(k: SampleKind) -> &'static str {
    match k {
        SampleKind::Initial => "initial",
        SampleKind::Step => "step",
        SampleKind::Output => "output",
        SampleKind::Event => "event",
    }
}

/// One row per sample, every number with 17 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let spec = &traj.spec;
    let ev = invariant_event(spec);
    let mut out = trajectory_header(spec);
    out.push('\n');
    for (i, s) in traj.states.iter().enumerate() {
        let udd = traj.udd(i);
        let _ = write!(out, "{:.16e},{}", s.t, kind_name(traj.kinds[i]));
        for v in s.f.iter().chain(&s.df) {
            num(&mut out, *v);
        }
        let loc = monitors::locus_membership(s, spec);
        for v in [
            s.u,
            s.du,
            udd,
            conservation_residual(s, udd, spec),
            conservation_residual_trace_form(s, spec),
            loc.trace_ratio,
            loc.energy_ratio,
            ev.eval(s.t, &s.to_vec()),
        ] {
            num(&mut out, v);
        }
        match &spec.ansatz {
            Ansatz::TwoSummands(_) | Ansatz::Lpp(_) => num(&mut out, s.f[0] / s.f[1]),
            Ansatz::DancerWang(a) => {
                for i in 0..a.m() {
                    num(&mut out, s.f[0] / s.f[i + 1]);
                }
                match to_rescaled(s, a, f64::NAN) {
                    Ok(r) => {
                        let res = rescaled_locus_residuals(&r, a, spec.epsilon);
                        for v in res.kahler_first.iter().chain(&res.kahler_second) {
                            num(&mut out, *v);
                        }
                    }
                    Err(_) => (0..2 * a.m()).for_each(|_| num(&mut out, f64::NAN)),
                }
            }
        }
        out.push('\n');
    }
    out
}

/// `s, X_j.., Y_j.., L, t, u` per rescaled sample.
pub fn rescaled_csv(rt: &RescaledTrajectory) -> String {
    let k = rt.states.first().map_or(0, |r| r.x.len());
    let mut cols = vec!["s".to_string()];
    cols.extend((0..k).map(|j| format!("X_{j}")));
    cols.extend((0..k).map(|j| format!("Y_{j}")));
    cols.extend(["L", "t", "u"].map(String::from));
    let mut out = cols.join(",");
    out.push('\n');
    for r in &rt.states {
        let _ = write!(out, "{:.16e}", r.s);
        for v in r.x.iter().chain(&r.y).chain([&r.lc, &r.t, &r.u]) {
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- svg

/// Bare-bones line plot: one polyline per series, shared axes.
pub fn svg_plot(title: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let finite = |v: &&f64| v.is_finite();
    let (x0, x1) = bounds(x.iter().filter(finite));
    let (y0, y1) = bounds(series.iter().flat_map(|(_, v)| v.iter()).filter(finite));
    let sx = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"monospace\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{PAD}\" y=\"20\">{title}</text>\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n\
         <text x=\"{PAD}\" y=\"{}\">{x0:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{x1:.3}</text>\n\
         <text x=\"4\" y=\"{}\">{y0:.3}</text><text x=\"4\" y=\"{}\">{y1:.3}</text>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD,
        H - PAD + 14.0,
        W - PAD,
        H - PAD + 14.0,
        H - PAD,
        PAD + 4.0,
    );
    for (n, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>",
            pts.join(" "),
            W - PAD - 90.0,
            PAD + 14.0 * (n as f64 + 1.0),
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn trajectory_svg(traj: &Trajectory) -> String {
    let t: Vec<f64> = traj.states.iter().map(|s| s.t).collect();
    let k = traj.spec.ansatz.components();
    let mut series: Vec<(String, Vec<f64>)> = (0..k)
        .map(|i| (format!("f_{i}"), traj.states.iter().map(|s| s.f[i]).collect()))
        .collect();
    series.push(("-du".into(), traj.states.iter().map(|s| -s.du).collect()));
    svg_plot(traj.spec.ansatz.name(), &t, &series)
}

// ---------------------------------------------------------------- files

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, data: &str) -> Result<()> {
    fs::write(path, data).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `data` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, data: &str) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    write(&tmp, data)?;
    fs::rename(&tmp, path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Refuses to reuse a directory that already holds a different run.
fn claim_dir(dir: &Path, run_id: &str) -> Result<()> {
    create_dir(dir)?;
    let manifest = dir.join("manifest.json");
    if manifest.exists() {
        let old: Value = serde_json::from_str(&read(&manifest)?)?;
        if old.get("run_id").and_then(Value::as_str) != Some(run_id) {
            return Err(Error::Precondition(format!(
                "{} already holds run {}; use a fresh output directory",
                dir.display(),
                old.get("run_id").and_then(Value::as_str).unwrap_or("?")
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub spec: ProblemSpec,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<KeyDiagnostics>,
    pub artifacts: Vec<String>,
    pub wall_time_s: f64,
}

/// Writes a finished run into `dir`; the manifest goes last.
pub fn write_run(dir: &Path, res: &RunResult, wall_time_s: f64) -> Result<RunManifest> {
    claim_dir(dir, &res.run_id)?;
    let mut artifacts = vec![
        "trajectory.csv".to_string(),
        "report.json".into(),
        "plot.svg".into(),
    ];
    write(&dir.join("trajectory.csv"), &trajectory_csv(&res.trajectory))?;
    write(&dir.join("report.json"), &pretty(&res.report))?;
    write(&dir.join("plot.svg"), &trajectory_svg(&res.trajectory))?;
    if let Some(rt) = &res.rescaled {
        write(&dir.join("rescaled.csv"), &rescaled_csv(rt))?;
        artifacts.push("rescaled.csv".into());
    }
    let manifest = RunManifest {
        run_id: res.run_id.clone(),
        tool_version: TOOL_VERSION,
        command: "solve",
        spec: res.config.spec.clone(),
        config: json!(res.config),
        verdict: Some(res.verdict.clone()),
        exit_code: res.exit_code,
        diagnostics: Some(res.diagnostics.clone()),
        artifacts,
        wall_time_s,
    };
    write_atomic(&dir.join("manifest.json"), &pretty(&manifest))?;
    Ok(manifest)
}

/// Solve command: execute and persist. Returns the exit code.
pub fn solve_to_dir(config: &RunConfig, dir: &Path) -> Result<RunResult> {
    let start = Instant::now();
    let res = execute(config)?;
    write_run(dir, &res, start.elapsed().as_secs_f64())?;
    Ok(res)
}

// ---------------------------------------------------------------- sweep

/// `PARAM=start:step:count` over `C`, `epsilon` or `initial[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub param: String,
    pub values: Vec<f64>,
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::invalid("grid", format!("{s:?}: {why}"));
        let (param, range) = s.split_once('=').ok_or_else(|| bad("expected PARAM=start:step:count"))?;
        let param = param.trim();
        if !(param == "C" || param == "epsilon" || parse_initial_index(param).is_some()) {
            return Err(bad("PARAM must be C, epsilon or initial[i]"));
        }
        let parts: Vec<&str> = range.split(':').collect();
        let [start, step, count] = parts[..] else {
            return Err(bad("expected start:step:count"));
        };
        let start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
        let step: f64 = step.trim().parse().map_err(|_| bad("step is not a number"))?;
        let count: usize = count.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
        if count == 0 || !start.is_finite() || !step.is_finite() {
            return Err(bad("need finite start and step and count >= 1"));
        }
        Ok(GridAxis {
            param: param.to_string(),
            values: (0..count).map(|i| start + step * i as f64).collect(),
        })
    }
}

fn parse_initial_index(p: &str) -> Option<usize> {
    p.strip_prefix("initial[")?.strip_suffix(']')?.parse().ok()
}

/// Copy of `config` with one parameter replaced.
pub fn with_param(config: &RunConfig, param: &str, value: f64) -> Result<RunConfig> {
    let mut c = config.clone();
    match param {
        "C" => c.spec.c = value,
        "epsilon" => c.spec.epsilon = value,
        p => {
            let i = parse_initial_index(p).ok_or_else(|| Error::invalid("grid", format!("unknown parameter {p}")))?;
            let n = c.spec.initial.len();
            *c.spec.initial.get_mut(i).ok_or_else(|| {
                Error::invalid("grid", format!("{p} is out of range for {n} initial sizes"))
            })? = value;
        }
    }
    Ok(c)
}

/// Cartesian product of the axes, first axis slowest.
pub fn grid_points(axes: &[GridAxis]) -> Vec<Vec<(String, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.param.clone(), v));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub verdict: Option<String>,
    pub exit_code: i32,
    pub diagnostics: Option<KeyDiagnostics>,
    pub error: Option<String>,
}

/// Runs every grid cell on a pool of `jobs` workers (0 = rayon default),
/// writing `cell_NNNN/` directories and `sweep_summary.csv`.
pub fn run_sweep(config: &RunConfig, axes: &[GridAxis], out: &Path, jobs: usize) -> Result<Vec<SweepCell>> {
    let mut seen = std::collections::HashSet::new();
    for a in axes {
        if !seen.insert(a.param.as_str()) {
            return Err(Error::invalid("grid", format!("{} appears twice", a.param)));
        }
        with_param(config, &a.param, a.values[0])?;
    }
    create_dir(out)?;
    let points = grid_points(axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
    let cells: Vec<SweepCell> = pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(index, params)| sweep_cell(config, index, params, out))
            .collect()
    });
    write(&out.join("sweep_summary.csv"), &sweep_summary_csv(axes, &cells))?;
    Ok(cells)
}

fn sweep_cell(config: &RunConfig, index: usize, params: Vec<(String, f64)>, out: &Path) -> SweepCell {
    let attempt = || -> Result<RunResult> {
        let mut c = config.clone();
        for (p, v) in &params {
            c = with_param(&c, p, *v)?;
        }
        solve_to_dir(&c, &out.join(format!("cell_{index:04}")))
    };
    match attempt() {
        Ok(r) => SweepCell {
            index,
            params,
            verdict: Some(r.verdict.name().to_string()),
            exit_code: r.exit_code,
            diagnostics: Some(r.diagnostics),
            error: None,
        },
        Err(e) => SweepCell {
            index,
            params,
            verdict: None,
            exit_code: error_exit_code(&e),
            diagnostics: None,
            error: Some(e.to_string()),
        },
    }
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn sweep_summary_csv(axes: &[GridAxis], cells: &[SweepCell]) -> String {
    let mut out = String::from("cell");
    for a in axes {
        out.push(',');
        out.push_str(&a.param);
    }
    out.push_str(
        ",verdict,exit_code,t_end,terminal_minus_du,max_conservation_residual,\
         expanding_upper_violations,potential_violations,error\n",
    );
    for c in cells {
        let _ = write!(out, "{:04}", c.index);
        for (_, v) in &c.params {
            num(&mut out, *v);
        }
        let _ = write!(out, ",{},{}", c.verdict.as_deref().unwrap_or("error"), c.exit_code);
        match &c.diagnostics {
            Some(d) => {
                for v in [d.t_end, d.terminal_minus_du, d.max_conservation_residual] {
                    num(&mut out, v);
                }
                let _ = write!(out, ",{},{}", d.expanding_upper_violations, d.potential_violations);
            }
            None => out.push_str(",,,,,"),
        }
        let _ = writeln!(out, ",{}", c.error.as_deref().map(csv_text).unwrap_or_default());
    }
    out
}

// ---------------------------------------------------------------- probe

/// Growth probe persisted as `probe_report.json`, `probe.csv` and a
/// manifest.
pub fn probe_to_dir(config: &RunConfig, c: f64, tau: f64, dir: &Path) -> Result<GrowthProbeReport> {
    let start = Instant::now();
    config.validate()?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::non_positive("c", c));
    }
    if !(tau > config.delta()) || !tau.is_finite() {
        return Err(Error::invalid("tau", format!("must exceed the launch time {}", config.delta())));
    }
    let mut cfg = config.integrator.clone();
    cfg.t_max = tau;
    let opts = SolveOptions {
        launch_delta: config.launch_delta,
        ..SolveOptions::default()
    };
    let report = monitors::growth_probe(&config.spec, c, tau, &cfg, &opts, &ProbeOptions::default())?;
    let run_id = {
        let mut h = Sha256::new();
        h.update(config.run_id().as_bytes());
        h.update(format!("probe {c:e} {tau:e}").as_bytes());
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    claim_dir(dir, &run_id)?;
    let mut csv = String::from("C,minus_du_tau,min_shape,excluded\n");
    for s in &report.samples {
        let _ = write!(csv, "{:.16e}", s.c);
        match s.slope {
            Some(v) => num(&mut csv, v),
            None => csv.push(','),
        }
        num(&mut csv, s.min_shape);
        let _ = writeln!(csv, ",{}", s.excluded.as_deref().map(csv_text).unwrap_or_default());
    }
    write(&dir.join("probe.csv"), &csv)?;
    write(&dir.join("probe_report.json"), &pretty(&report))?;
    let manifest = RunManifest {
        run_id,
        tool_version: TOOL_VERSION,
        command: "probe-c0",
        spec: config.spec.clone(),
        config: json!({ "config": config, "c": c, "tau": tau }),
        verdict: None,
        exit_code: exit::OK,
        diagnostics: None,
        artifacts: vec!["probe.csv".into(), "probe_report.json".into()],
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_atomic(&dir.join("manifest.json"), &pretty(&manifest))?;
    Ok(report)
}

// ---------------------------------------------------------------- curvature

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureOutput {
    pub scalings: Vec<f64>,
    pub scalar_curvature: f64,
    pub ricci_eigenvalues: Vec<f64>,
    pub validation: ValidationReport,
}

pub fn curvature_query(decomposition_json: &str, x: &[f64]) -> Result<CurvatureOutput> {
    let dec = IsotropyDecomposition::from_json_str(decomposition_json)?;
    let xs = ScalingVector::new(x.to_vec())?;
    Ok(CurvatureOutput {
        scalings: x.to_vec(),
        scalar_curvature: dec.scalar_curvature(&xs)?,
        ricci_eigenvalues: dec.ricci_eigenvalues(&xs)?,
        validation: dec.validate(),
    })
}

pub fn curvature_from_file(path: &Path, x: &[f64]) -> Result<CurvatureOutput> {
    curvature_query(&read(path)?, x)
}

/// Parses `1,2.5,3` into scalings.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("x", format!("{p:?} is not a number")))
        })
        .collect()
}

pub fn sweep_dir_cell(out: &Path, index: usize) -> PathBuf {
    out.join(format!("cell_{index:04}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig::from_json_str(
            r#"{"system":"dancer_wang","ansatz":{"d":[2],"p":[2],"q":[1]},
                "epsilon":0,"C":-1,"initial":[1.0],"integrator":{"t_max":2}}"#,
        )
        .unwrap()
    }

    #[test]
    fn grid_axis_parsing() {
        let g: GridAxis = "C=-1:-0.5:3".parse().unwrap();
        assert_eq!(g.values, vec![-1.0, -1.5, -2.0]);
        assert!("initial[1]=1:0.1:2".parse::<GridAxis>().is_ok());
        assert!("x=1:1:1".parse::<GridAxis>().is_err());
        assert!("C=1:1:0".parse::<GridAxis>().is_err());
        assert!("C=1:1".parse::<GridAxis>().is_err());
    }

    #[test]
    fn grid_order_is_row_major() {
        let a: GridAxis = "C=-1:-1:2".parse().unwrap();
        let b: GridAxis = "initial[0]=1:1:3".parse().unwrap();
        let p = grid_points(&[a, b]);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![("C".into(), -1.0), ("initial[0]".into(), 2.0)]);
        assert_eq!(p[3][0].1, -2.0);
    }

    #[test]
    fn run_id_tracks_config() {
        let a = config();
        let mut b = a.clone();
        assert_eq!(a.run_id(), b.run_id());
        b.spec.c = -2.0;
        assert_ne!(a.run_id(), b.run_id());
        assert_eq!(a.run_id().len(), 16);
    }

    #[test]
    fn config_errors_name_fields() {
        let e = RunConfig::from_json_str(
            r#"{"system":"two_summands","ansatz":{"d1":3,"d2":4,"A1":6,"A2":12,"A3":0.75},
                "epsilon":0,"C":-1,"initial":[-1]}"#,
        )
        .unwrap_err();
        assert_eq!(e.field(), Some("initial[0]"));
        assert_eq!(error_exit_code(&e), exit::CONFIG);
        let mut c = config();
        c.expect = Some("complete".into());
        assert_eq!(c.validate().unwrap_err().field(), Some("expect"));
    }

    #[test]
    fn expectation_controls_exit() {
        let t = Termination::ReachedTMax;
        let v = Verdict::InvariantSetExit { t: 1.0, reason: "x".into() };
        assert_eq!(solve_exit_code(&v, &t, None), exit::INVARIANT_EXIT);
        assert_eq!(solve_exit_code(&v, &t, Some("invariant_set_exit")), exit::OK);
        assert_eq!(solve_exit_code(&Verdict::NumericallyComplete, &t, Some("invariant_set_exit")), exit::FAILURE);
        let f = Termination::StepFailure { t: 1.0, reason: "x".into() };
        assert_eq!(solve_exit_code(&Verdict::NumericallyComplete, &f, None), exit::INTEGRATOR);
    }

    #[test]
    fn csv_rows_match_samples() {
        let res = execute(&config()).unwrap();
        let csv = trajectory_csv(&res.trajectory);
        let mut lines = csv.lines();
        let cols = lines.next().unwrap().split(',').count();
        assert_eq!(lines.clone().count(), res.trajectory.len());
        assert!(lines.all(|l| l.split(',').count() == cols));
    }
}
