//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::geometry::oracle::{HomogeneousSplit, LieAlgebra};
use soliton_lab::geometry::{IsotropyDecomposition, ScalingVector};
use soliton_lab::integrator::{Direction, Event, Integrator, IntegratorConfig};
use soliton_lab::monitors::{
    asymptote_check, comparison_ode_closed_form, conservation_report, growth_probe,
    potential_report, ProbeOptions, Verdict,
};
use soliton_lab::run::{execute, rescaled_csv, trajectory_csv, RunConfig, RunResult};
use soliton_lab::solve::{invariant_event, SolveOptions};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn load(rel: &str) -> RunConfig {
    RunConfig::load(&repo(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn run(rel: &str) -> RunResult {
    execute(&load(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn configs_in(dir: &str) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(repo(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| format!("{dir}/{}", p.file_name().unwrap().to_string_lossy()))
        .collect();
    v.sort();
    v
}

fn shipped() -> Vec<String> {
    let mut v = configs_in("configs");
    v.extend(configs_in("configs/conservation"));
    v
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn conservation_fidelity() -> Outcome {
    let files = configs_in("configs/conservation");
    let mut worst_ratio = 0.0_f64;
    let mut worst_form = 0.0_f64;
    for f in &files {
        let res = run(f);
        let rep = conservation_report(&res.trajectory);
        worst_ratio = worst_ratio.max(rep.max_residual / (1e-8 * (1.0 + res.config.spec.c.abs())));
        worst_form = worst_form.max(rep.max_form_disagreement);
    }
    outcome(
        files.len() == 12 && worst_ratio <= 1.0 && worst_form <= 1e-10,
        format!(
            "{} specs, worst residual at {:.2} of budget, forms agree to {worst_form:.1e}",
            files.len(),
            worst_ratio
        ),
    )
}

fn orthonormal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &out {
            let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            out.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    out
}

fn curvature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst = 0.0_f64;
    for sizes in [&[3usize, 3][..], &[2, 4], &[1, 2, 3]] {
        for _ in 0..10 {
            let basis = orthonormal(6, &mut rng);
            let mut blocks = Vec::new();
            let mut at = 0;
            for &s in sizes {
                blocks.push(basis[at..at + s].to_vec());
                at += s;
            }
            let split =
                HomogeneousSplit::group(LieAlgebra::su2().direct_sum(&LieAlgebra::su2()), blocks)
                    .unwrap();
            let dec = split.decomposition().unwrap();
            let x: Vec<f64> = sizes.iter().map(|_| rng.gen_range(0.2..5.0)).collect();
            let xs = ScalingVector::new(x.clone()).unwrap();
            worst = worst.max(rel(dec.scalar_curvature(&xs).unwrap(), split.scalar_curvature(&x).unwrap()));
            for (a, b) in dec
                .ricci_eigenvalues(&xs)
                .unwrap()
                .iter()
                .zip(split.ricci_eigenvalues(&x).unwrap())
            {
                worst = worst.max(rel(*a, b));
            }
        }
    }
    let torus = IsotropyDecomposition::from_json_str(
        &std::fs::read_to_string(repo("decompositions/abelian.json")).unwrap(),
    )
    .unwrap();
    let flat = torus
        .scalar_curvature(&ScalingVector::new(vec![0.7, 3.0]).unwrap())
        .unwrap();

    let mut trace_worst = 0.0_f64;
    for _ in 0..1000 {
        let s = rng.gen_range(1..=4usize);
        let dims: Vec<usize> = (0..s).map(|_| rng.gen_range(1..=6)).collect();
        let b: Vec<f64> = (0..s).map(|_| rng.gen_range(0.0..4.0)).collect();
        let mut t = vec![0.0; s * s * s];
        for i in 0..s {
            for j in i..s {
                for k in j..s {
                    let v = rng.gen_range(0.0..3.0);
                    for (a, bb, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        t[(a * s + bb) * s + c] = v;
                    }
                }
            }
        }
        let dec = IsotropyDecomposition::new(dims.clone(), b, None, t).unwrap();
        let xs = ScalingVector::new((0..s).map(|_| rng.gen_range(0.05..20.0)).collect()).unwrap();
        let sc = dec.scalar_curvature(&xs).unwrap();
        let terms: Vec<f64> = dec
            .ricci_eigenvalues(&xs)
            .unwrap()
            .iter()
            .zip(&dims)
            .map(|(r, d)| r * *d as f64)
            .collect();
        let scale = terms.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        trace_worst = trace_worst.max((terms.iter().sum::<f64>() - sc).abs() / scale);
    }
    outcome(
        worst <= 1e-12 && flat == 0.0 && trace_worst <= 1e-14,
        format!("oracle gap {worst:.1e}, torus scalar {flat}, trace identity {trace_worst:.1e} over 1000"),
    )
}

fn integrator_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    let mut worst_event = 0.0_f64;
    for a in [0.5_f64, 1.0, 2.0, 8.0] {
        let r = (2.0 * a).sqrt();
        let target = -0.5 * r;
        let times: Vec<f64> = (1..=10).map(|k| 0.5 * f64::from(k)).collect();
        let cfg = IntegratorConfig {
            t_max: 5.0,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let sol = Integrator::new(cfg)
            .with_event(Event::new("half", Direction::Falling, false, move |_, y| y[0] - target))
            .with_output_times(times.clone())
            .run(move |_, y, dy| dy[0] = -a + 0.5 * y[0] * y[0], 0.0, &[0.0]);
        for s in &sol.samples {
            let exact = comparison_ode_closed_form(a, 0.0, 0.0, s.t).unwrap();
            worst = worst.max((s.y[0] - exact).abs());
        }
        let hit = sol.events.iter().find(|(n, _)| n == "half").map(|(_, t)| *t);
        let exact_t = 0.5_f64.atanh() / (a / 2.0).sqrt();
        worst_event = worst_event.max(hit.map_or(f64::INFINITY, |t| (t - exact_t).abs()));
    }
    outcome(
        worst <= 1e-9 && worst_event <= 1e-9,
        format!("max state error {worst:.1e}, event time error {worst_event:.1e}"),
    )
}

fn monotonicity() -> Outcome {
    let mut runs = 0;
    let mut samples = 0;
    let mut violations = 0;
    for f in shipped() {
        let cfg = load(&f);
        if cfg.spec.c >= 0.0 {
            continue;
        }
        let res = execute(&cfg).unwrap();
        let rep = potential_report(&res.trajectory);
        runs += 1;
        samples += rep.samples_checked;
        violations += rep.violations.len();
    }
    outcome(
        runs > 0 && violations == 0,
        format!("{runs} runs with C < 0, {samples} samples, {violations} violations"),
    )
}

fn steady_asymptote() -> Outcome {
    let res = run("configs/two_summands_steady.json");
    let last = res.trajectory.last();
    let target = (-res.config.spec.c).sqrt();
    let err = (-last.du - target).abs() / target;
    let udd = res.trajectory.udd(res.trajectory.len() - 1);
    outcome(
        res.verdict == Verdict::NumericallyComplete && last.t == 100.0 && err <= 0.01 && udd.abs() <= 1e-3,
        format!("-du(100) = {:.5} vs {target:.5} ({:.2}%), udd = {udd:.1e}", -last.du, 100.0 * err),
    )
}

fn expanding_bound() -> Outcome {
    let mut runs = 0;
    let mut violations = 0;
    let mut specs: Vec<RunConfig> = shipped()
        .iter()
        .map(|f| load(f))
        .filter(|c| c.spec.epsilon == 1.0)
        .collect();
    let base = load("configs/dancer_wang_expanding_sweep.json");
    for c in [-4.0, -7.0, -13.0] {
        let mut cfg = base.clone();
        cfg.spec.c = c;
        specs.push(cfg);
    }
    for cfg in specs {
        let res = execute(&cfg).unwrap();
        violations += asymptote_check(&res.trajectory).upper_bound_violations.len();
        runs += 1;
    }
    outcome(violations == 0, format!("{runs} runs with eps = 1, {violations} violations"))
}

fn growth_probe_criterion() -> Outcome {
    let cfg = load("configs/two_summands_circle_probe.json");
    let mut icfg = cfg.integrator.clone();
    icfg.t_max = 0.5;
    let probe = |c: f64| {
        growth_probe(&cfg.spec, c, 0.5, &icfg, &SolveOptions::default(), &ProbeOptions::default())
    };
    let (first, second) = match (probe(5.0), probe(10.0)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            return outcome(false, format!("probe failed: {:?} / {:?}", a.err(), b.err()));
        }
    };
    let c0 = first.empirical_c0;
    let below_ok = first
        .samples
        .iter()
        .filter(|s| s.c < c0 && s.excluded.is_none())
        .all(|s| s.slope.is_some_and(|v| v >= 5.0));
    outcome(
        c0.is_finite() && c0 < 0.0 && below_ok && second.empirical_c0.abs() >= c0.abs(),
        format!(
            "C0(c=5) = {c0:.4}, C0(c=10) = {:.4}, c_star = {:?}",
            second.empirical_c0, first.c_star
        ),
    )
}

fn invariant_sets() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for f in [
        "configs/two_summands_steady.json",
        "configs/dancer_wang_complete.json",
        "configs/lpp_complete.json",
    ] {
        let res = run(f);
        let ev = invariant_event(&res.config.spec);
        let worst = res
            .trajectory
            .states
            .iter()
            .map(|s| ev.eval(s.t, &s.to_vec()))
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = res.verdict == Verdict::NumericallyComplete && res.trajectory.last().t == 100.0 && worst < 0.0;
        pass &= ok;
        notes.push(format!("{} bound {worst:.3}", res.config.spec.ansatz.name()));
    }
    let exit = run("configs/two_summands_exit.json");
    let exited = matches!(exit.verdict, Verdict::InvariantSetExit { .. });
    pass &= exited;
    notes.push(format!("exit spec: {}", exit.verdict.name()));
    outcome(pass, notes.join(", "))
}

fn chart_equivalence() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for f in ["configs/dancer_wang_m1_charts.json", "configs/dancer_wang_m2_charts.json"] {
        let res = run(f);
        let cmp = res.chart_comparison.expect("both charts");
        let covered = cmp.times.first() == Some(&0.25) && cmp.times.last() == Some(&10.0);
        pass &= covered && cmp.max_difference <= 1e-6 && cmp.critical_point_rhs_norm <= 1e-12;
        notes.push(format!(
            "m={} diff {:.1e} over {} times",
            res.config.spec.initial.len(),
            cmp.max_difference,
            cmp.times.len()
        ));
    }
    outcome(pass, format!("{}, critical point stationary", notes.join(", ")))
}

fn kahler_locus() -> Outcome {
    let res = run("configs/dancer_wang_kahler.json");
    let cmp = res.chart_comparison.expect("both charts");
    let (p, r) = (cmp.kahler_physical.unwrap(), cmp.kahler_rescaled.unwrap());
    outcome(
        p <= 1e-6 && r <= 1e-6 && res.trajectory.last().t >= 10.0,
        format!("physical {p:.1e}, rescaled {r:.1e}"),
    )
}

fn determinism() -> Outcome {
    let files = shipped();
    let mut same = 0;
    for f in &files {
        let (a, b) = (run(f), run(f));
        let csv_same = trajectory_csv(&a.trajectory) == trajectory_csv(&b.trajectory);
        let rescaled_same = match (&a.rescaled, &b.rescaled) {
            (Some(x), Some(y)) => rescaled_csv(x) == rescaled_csv(y),
            (None, None) => true,
            _ => false,
        };
        same += usize::from(csv_same && rescaled_same);
    }
    outcome(same == files.len(), format!("{same}/{} specs bitwise identical", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("conservation law fidelity", conservation_fidelity),
        ("curvature oracle equivalence", curvature_oracle),
        ("integrator oracle", integrator_oracle),
        ("potential monotonicity", monotonicity),
        ("steady asymptote", steady_asymptote),
        ("expanding upper bound", expanding_bound),
        ("growth probe", growth_probe_criterion),
        ("invariant-set preservation", invariant_sets),
        ("chart equivalence", chart_equivalence),
        ("Kähler locus", kahler_locus),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "criterion {:>2} {:<30} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
