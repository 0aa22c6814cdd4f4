//! Adaptive DOP853 integration with event location.
//!
//! Hairer's 8(5,3) pair with a PI step-size controller. Events are located
//! by bisection in the step fraction, re-stepping from the start of the
//! accepted step at each trial point, so the refined state carries the full
//! eighth-order accuracy rather than an interpolant's.

use serde::{Deserialize, Serialize};

/// Tolerances and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "is_unbounded")]
    pub max_step: f64,
    pub t_max: f64,
    pub max_steps: usize,
}

fn is_unbounded(v: &f64) -> bool {
    v.is_infinite()
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            t_max: 10.0,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        for (name, v) in [
            ("integrator.rel_tol", self.rel_tol),
            ("integrator.abs_tol", self.abs_tol),
            ("integrator.max_step", self.max_step),
            ("integrator.t_max", self.t_max),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::non_positive(name, v));
            }
        }
        if !self.t_max.is_finite() {
            return Err(Error::invalid("integrator.t_max", "must be finite"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("integrator.max_steps", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn crossed(self, before: f64, after: f64) -> bool {
        let up = before < 0.0 && after >= 0.0;
        let down = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => up,
            Direction::Falling => down,
            Direction::Either => up || down,
        }
    }
}

type EventFn<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>;

/// Scalar function whose sign change marks an event.
pub struct Event<'a> {
    pub name: String,
    pub direction: Direction,
    pub terminal: bool,
    func: EventFn<'a>,
}

impl<'a> Event<'a> {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        terminal: bool,
        func: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Event {
            name: name.into(),
            direction,
            terminal,
            func: Box::new(func),
        }
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> f64 {
        (self.func)(t, y)
    }
}

impl std::fmt::Debug for Event<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Event")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedTMax,
    Event { name: String, t: f64 },
    StepFailure { t: f64, reason: String },
    StateInvalid { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Initial,
    Step,
    Output,
    Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub stats: Stats,
    /// Non-terminal events in order of occurrence.
    pub events: Vec<(String, f64)>,
}

impl Solution {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("solution has an initial sample")
    }

    /// Cubic Hermite interpolation between neighbouring samples. Meant for
    /// plotting; the samples themselves are the accurate values.
    pub fn interpolate<F>(&self, rhs: F, t: f64) -> Option<Vec<f64>>
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let idx = self.samples.partition_point(|s| s.t <= t);
        if idx == 0 || (idx == self.samples.len() && t > self.last().t) {
            return None;
        }
        if idx == self.samples.len() {
            return Some(self.last().y.clone());
        }
        let (a, b) = (&self.samples[idx - 1], &self.samples[idx]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let n = a.y.len();
        let (mut fa, mut fb) = (vec![0.0; n], vec![0.0; n]);
        rhs(a.t, &a.y, &mut fa);
        rhs(b.t, &b.y, &mut fb);
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        Some(
            (0..n)
                .map(|i| h00 * a.y[i] + h10 * h * fa[i] + h01 * b.y[i] + h11 * h * fb[i])
                .collect(),
        )
    }
}

/// Integrator with its event set, output times and state validity test.
pub struct Integrator<'a> {
    cfg: IntegratorConfig,
    events: Vec<Event<'a>>,
    output_times: Vec<f64>,
    validity: Option<Box<dyn Fn(&[f64]) -> bool + Send + Sync + 'a>>,
    first_step: Option<f64>,
}

struct Trial {
    y: Vec<f64>,
    err: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(cfg: IntegratorConfig) -> Self {
        Integrator {
            cfg,
            events: Vec::new(),
            output_times: Vec::new(),
            validity: None,
            first_step: None,
        }
    }

    pub fn with_event(mut self, event: Event<'a>) -> Self {
        self.events.push(event);
        self
    }

    pub fn with_events(mut self, events: impl IntoIterator<Item = Event<'a>>) -> Self {
        self.events.extend(events);
        self
    }

    /// Extra samples at exactly these times (sorted internally).
    pub fn with_output_times(mut self, mut times: Vec<f64>) -> Self {
        times.retain(|t| t.is_finite());
        times.sort_by(f64::total_cmp);
        times.dedup();
        self.output_times = times;
        self
    }

    /// States failing this test end the run with `StateInvalid`.
    pub fn with_validity(mut self, valid: impl Fn(&[f64]) -> bool + Send + Sync + 'a) -> Self {
        self.validity = Some(Box::new(valid));
        self
    }

    /// Overrides the automatic initial step.
    pub fn with_first_step(mut self, h: f64) -> Self {
        self.first_step = Some(h);
        self
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn is_valid(&self, y: &[f64]) -> bool {
        y.iter().all(|v| v.is_finite()) && self.validity.as_ref().is_none_or(|f| f(y))
    }

    pub fn run<F>(&self, rhs: F, t0: f64, y0: &[f64]) -> Solution
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        let cfg = &self.cfg;
        let mut stats = Stats::default();
        let mut samples = vec![Sample {
            t: t0,
            y: y0.to_vec(),
            kind: SampleKind::Initial,
        }];
        let mut fired = Vec::new();
        if !self.is_valid(y0) {
            return Solution {
                samples,
                termination: Termination::StateInvalid { t: t0 },
                stats,
                events: fired,
            };
        }

        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k1 = vec![0.0; n];
        rhs(t, &y, &mut k1);
        stats.rhs_evals += 1;
        let mut work = Work::new(n);
        let mut g: Vec<f64> = self.events.iter().map(|e| e.eval(t, &y)).collect();
        let mut next_output = self.output_times.partition_point(|&s| s <= t0);

        let mut h = self
            .first_step
            .unwrap_or_else(|| self.initial_step(&rhs, t, &y, &k1, &mut stats))
            .min(cfg.max_step)
            .min(cfg.t_max - t);
        let mut facold = 1e-4_f64;
        let mut last_rejected = false;

        let termination = loop {
            if stats.accepted + stats.rejected >= cfg.max_steps {
                break Termination::StepFailure {
                    t,
                    reason: format!("max_steps = {} exhausted", cfg.max_steps),
                };
            }
            if h < 1e-14 * (1.0 + t.abs()) {
                break Termination::StepFailure {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                };
            }
            let last = t + h >= cfg.t_max;
            if last {
                h = cfg.t_max - t;
            }

            let trial = dop853_step(&rhs, t, &y, &k1, h, cfg, &mut work);
            stats.rhs_evals += 11;
            if !trial.err.is_finite() || trial.y.iter().any(|v| !v.is_finite()) {
                stats.rejected += 1;
                h *= 0.2;
                last_rejected = true;
                continue;
            }
            let err = trial.err;
            let fac11 = err.powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            if err > 1.0 {
                stats.rejected += 1;
                h /= FACC1.min(fac11 / SAFE);
                last_rejected = true;
                continue;
            }

            // accepted
            stats.accepted += 1;
            facold = err.max(1e-4);
            let t_new = if last { cfg.t_max } else { t + h };

            // outputs strictly inside the step
            while next_output < self.output_times.len() && self.output_times[next_output] < t_new
            {
                let ts = self.output_times[next_output];
                let ys = dop853_step(&rhs, t, &y, &k1, ts - t, cfg, &mut work).y;
                stats.rhs_evals += 11;
                samples.push(Sample {
                    t: ts,
                    y: ys,
                    kind: SampleKind::Output,
                });
                next_output += 1;
            }

            // events
            let g_new: Vec<f64> = self.events.iter().map(|e| e.eval(t_new, &trial.y)).collect();
            let mut earliest: Option<(usize, f64, Vec<f64>)> = None;
            for (i, ev) in self.events.iter().enumerate() {
                if !ev.direction.crossed(g[i], g_new[i]) {
                    continue;
                }
                let (te, ye) = self.locate(&rhs, ev, t, &y, &k1, t_new - t, g[i], &mut work, &mut stats);
                if earliest.as_ref().is_none_or(|(_, t0, _)| te < *t0) {
                    earliest = Some((i, te, ye));
                }
            }
            if let Some((i, te, ye)) = earliest {
                let ev = &self.events[i];
                // outputs already pushed past te are dropped for terminal events
                if ev.terminal {
                    samples.retain(|s| s.t < te);
                    let valid = self.is_valid(&ye);
                    samples.push(Sample {
                        t: te,
                        y: ye,
                        kind: SampleKind::Event,
                    });
                    if !valid {
                        break Termination::StateInvalid { t: te };
                    }
                    break Termination::Event {
                        name: ev.name.clone(),
                        t: te,
                    };
                }
                let pos = samples.partition_point(|s| s.t < te);
                if samples.get(pos).is_none_or(|s| s.t != te) {
                    samples.insert(
                        pos,
                        Sample {
                            t: te,
                            y: ye,
                            kind: SampleKind::Event,
                        },
                    );
                }
                fired.push((ev.name.clone(), te));
                for (j, e) in self.events.iter().enumerate() {
                    if j != i && e.direction.crossed(g[j], g_new[j]) && !e.terminal {
                        // several non-terminal events in one step: record each
                        let (tj, yj) =
                            self.locate(&rhs, e, t, &y, &k1, t_new - t, g[j], &mut work, &mut stats);
                        let pos = samples.partition_point(|s| s.t < tj);
                        samples.insert(
                            pos,
                            Sample {
                                t: tj,
                                y: yj,
                                kind: SampleKind::Event,
                            },
                        );
                        fired.push((e.name.clone(), tj));
                    }
                }
            }

            t = t_new;
            y = trial.y;
            g = g_new;
            if !self.is_valid(&y) {
                samples.push(Sample {
                    t,
                    y,
                    kind: SampleKind::Step,
                });
                break Termination::StateInvalid { t };
            }
            rhs(t, &y, &mut k1);
            stats.rhs_evals += 1;
            if next_output < self.output_times.len() && self.output_times[next_output] == t {
                next_output += 1;
            }
            samples.push(Sample {
                t,
                y: y.clone(),
                kind: SampleKind::Step,
            });
            if last {
                break Termination::ReachedTMax;
            }

            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(cfg.max_step);
        };

        fired.sort_by(|a, b| a.1.total_cmp(&b.1));
        Solution {
            samples,
            termination,
            stats,
            events: fired,
        }
    }

    /// Bisection on the step fraction to `1e-12 (1 + t)`.
    #[allow(clippy::too_many_arguments)]
    fn locate<F>(
        &self,
        rhs: &F,
        ev: &Event<'_>,
        t: f64,
        y: &[f64],
        k1: &[f64],
        h: f64,
        g0: f64,
        work: &mut Work,
        stats: &mut Stats,
    ) -> (f64, Vec<f64>)
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let (mut lo, mut hi) = (0.0_f64, h);
        let mut y_hi = dop853_step(rhs, t, y, k1, h, &self.cfg, work).y;
        stats.rhs_evals += 11;
        let tol = 1e-12 * (1.0 + t.abs());
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let ym = dop853_step(rhs, t, y, k1, mid, &self.cfg, work).y;
            stats.rhs_evals += 11;
            let gm = ev.eval(t + mid, &ym);
            if ev.direction.crossed(g0, gm) || (gm == 0.0) {
                hi = mid;
                y_hi = ym;
            } else {
                lo = mid;
            }
        }
        (t + hi, y_hi)
    }

    fn initial_step<F>(&self, rhs: &F, t: f64, y: &[f64], f0: &[f64], stats: &mut Stats) -> f64
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let cfg = &self.cfg;
        let n = y.len() as f64;
        let sk: Vec<f64> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
        let norm = |v: &[f64]| -> f64 {
            (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n).sqrt()
        };
        let (d0, d1) = (norm(y), norm(f0));
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(cfg.max_step).min(cfg.t_max - t);
        let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
        let mut f1 = vec![0.0; y.len()];
        rhs(t + h0, &y1, &mut f1);
        stats.rhs_evals += 1;
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = norm(&diff) / h0;
        let big = d1.max(d2);
        let h1 = if big <= 1e-15 {
            (1e-6_f64).max(h0 * 1e-3)
        } else {
            (0.01 / big).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(cfg.max_step)
    }
}

const SAFE: f64 = 0.9;
const FACC1: f64 = 1.0 / 0.333;
const FACC2: f64 = 1.0 / 6.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;

struct Work {
    k: [Vec<f64>; 12],
    tmp: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Work {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

fn dop853_step<F>(
    rhs: &F,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    cfg: &IntegratorConfig,
    w: &mut Work,
) -> Trial
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    // k[0] holds k2 … k[11] holds the final stage
    let stage = |w: &mut Work, c: f64, coeffs: &[(usize, f64)], out: usize| {
        for i in 0..n {
            let mut acc = 0.0;
            for &(s, a) in coeffs {
                let ks = if s == 1 { k1[i] } else { w.k[s - 2][i] };
                acc += a * ks;
            }
            w.tmp[i] = y[i] + h * acc;
        }
        let (tmp, k) = (&w.tmp, &mut w.k);
        rhs(t + c * h, tmp, &mut k[out - 2]);
    };
    stage(w, C2, &[(1, A21)], 2);
    stage(w, C3, &[(1, A31), (2, A32)], 3);
    stage(w, C4, &[(1, A41), (3, A43)], 4);
    stage(w, C5, &[(1, A51), (3, A53), (4, A54)], 5);
    stage(w, C6, &[(1, A61), (4, A64), (5, A65)], 6);
    stage(w, C7, &[(1, A71), (4, A74), (5, A75), (6, A76)], 7);
    stage(w, C8, &[(1, A81), (4, A84), (5, A85), (6, A86), (7, A87)], 8);
    stage(
        w,
        C9,
        &[(1, A91), (4, A94), (5, A95), (6, A96), (7, A97), (8, A98)],
        9,
    );
    stage(
        w,
        C10,
        &[(1, A101), (4, A104), (5, A105), (6, A106), (7, A107), (8, A108), (9, A109)],
        10,
    );
    stage(
        w,
        C11,
        &[
            (1, A111),
            (4, A114),
            (5, A115),
            (6, A116),
            (7, A117),
            (8, A118),
            (9, A119),
            (10, A1110),
        ],
        11,
    );
    stage(
        w,
        1.0,
        &[
            (1, A121),
            (4, A124),
            (5, A125),
            (6, A126),
            (7, A127),
            (8, A128),
            (9, A129),
            (10, A1210),
            (11, A1211),
        ],
        12,
    );
    let k = &w.k;
    let kk = |s: usize, i: usize| if s == 1 { k1[i] } else { k[s - 2][i] };
    let mut y_new = vec![0.0; n];
    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..n {
        let incr = B1 * kk(1, i)
            + B6 * kk(6, i)
            + B7 * kk(7, i)
            + B8 * kk(8, i)
            + B9 * kk(9, i)
            + B10 * kk(10, i)
            + B11 * kk(11, i)
            + B12 * kk(12, i);
        y_new[i] = y[i] + h * incr;
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        let e2 = incr - BHH1 * kk(1, i) - BHH2 * kk(9, i) - BHH3 * kk(12, i);
        err2 += (e2 / sk).powi(2);
        let e = ER1 * kk(1, i)
            + ER6 * kk(6, i)
            + ER7 * kk(7, i)
            + ER8 * kk(8, i)
            + ER9 * kk(9, i)
            + ER10 * kk(10, i)
            + ER11 * kk(11, i)
            + ER12 * kk(12, i);
        err += (e / sk).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err * (1.0 / (deno * n as f64)).sqrt();
    Trial { y: y_new, err }
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;

const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;

const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;
const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;
