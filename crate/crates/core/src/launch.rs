//! Launch states at `t = δ` from singular-orbit data.
//!
//! The collapsing component is odd, `f = t + a t³ + …`, every other metric
//! function is even, `f_i = f̄_i (1 + k_i t²/2 + …)`, and the potential is even
//! with `ü(0) = C/(d_S + 1)`. Here `k_i = f̈_i(0)/f_i(0)` solves
//! `(d_S + 1) k_i = ε/2 + r_i(0)`, and the cubic coefficient follows from the
//! `t⁰` order of the collapsing equation,
//! `6 d_S a = ε/2 + ü(0) - Σ_{i≠S} d_i k_i`.
//!
//! The cubic term matters when `d_S > 1`: without it `ḟ_S` is off at order
//! `δ²`, which the conservation law amplifies by `1/δ²`.

use crate::error::{Error, Result};
use crate::systems::{
    Ansatz, DancerWangAnsatz, Invariants, LuPagePopeAnsatz, ProblemSpec, SolitonState,
    TwoSummandsAnsatz,
};

/// `1e-3 · min(1, smallest initial size)`.
pub fn default_delta(spec: &ProblemSpec) -> f64 {
    let smallest = spec.initial.iter().copied().fold(f64::INFINITY, f64::min);
    1e-3 * smallest.min(1.0)
}

fn check(spec: &ProblemSpec, delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::non_positive("launch_delta", delta));
    }
    spec.validate()
}

/// Series with collapsing component first and the given even components.
fn series(
    delta: f64,
    d_s: f64,
    eps: f64,
    c: f64,
    even: &[(f64, f64, f64)], // (size, k, multiplicity)
) -> SolitonState {
    let udd0 = c / (d_s + 1.0);
    let others: f64 = even.iter().map(|(_, k, d)| d * k).sum();
    let a = (eps / 2.0 + udd0 - others) / (6.0 * d_s);
    let d2 = delta * delta;
    let mut f = vec![delta + a * d2 * delta];
    let mut df = vec![1.0 + 3.0 * a * d2];
    for &(size, k, _) in even {
        f.push(size * (1.0 + 0.5 * k * d2));
        df.push(size * k * delta);
    }
    SolitonState {
        t: delta,
        f,
        df,
        u: 0.5 * udd0 * d2,
        du: udd0 * delta,
    }
}

pub fn launch_two_summands(
    a: &TwoSummandsAnsatz,
    eps: f64,
    c: f64,
    fbar: f64,
    delta: f64,
) -> Result<SolitonState> {
    let spec = ProblemSpec {
        ansatz: Ansatz::TwoSummands(*a),
        epsilon: eps,
        c,
        initial: vec![fbar],
    };
    check(&spec, delta)?;
    let d1 = a.d1 as f64;
    let k2 = (eps / 2.0 + a.a2 / (a.d2 as f64 * fbar * fbar)) / (d1 + 1.0);
    Ok(series(delta, d1, eps, c, &[(fbar, k2, a.d2 as f64)]))
}

pub fn launch_dancer_wang(
    a: &DancerWangAnsatz,
    eps: f64,
    c: f64,
    gbar: &[f64],
    delta: f64,
) -> Result<SolitonState> {
    let spec = ProblemSpec {
        ansatz: Ansatz::DancerWang(a.clone()),
        epsilon: eps,
        c,
        initial: gbar.to_vec(),
    };
    check(&spec, delta)?;
    let even: Vec<_> = (0..a.m())
        .map(|i| {
            let g = gbar[i];
            let k = (eps / 2.0 + a.p[i] as f64 / (g * g)) / 2.0;
            (g, k, a.d[i] as f64)
        })
        .collect();
    Ok(series(delta, 1.0, eps, c, &even))
}

pub fn launch_lpp(
    a: &LuPagePopeAnsatz,
    eps: f64,
    c: f64,
    gbar: &[f64],
    delta: f64,
) -> Result<SolitonState> {
    let spec = ProblemSpec {
        ansatz: Ansatz::Lpp(*a),
        epsilon: eps,
        c,
        initial: gbar.to_vec(),
    };
    check(&spec, delta)?;
    let p = [a.p1 as f64, a.d2 as f64 - 1.0];
    let d = [a.d1 as f64, a.d2 as f64];
    let even: Vec<_> = (0..2)
        .map(|i| {
            let g = gbar[i];
            (g, (eps / 2.0 + p[i] / (g * g)) / 2.0, d[i])
        })
        .collect();
    Ok(series(delta, 1.0, eps, c, &even))
}

/// Series launch for any spec.
pub fn launch(spec: &ProblemSpec, delta: f64) -> Result<SolitonState> {
    match &spec.ansatz {
        Ansatz::TwoSummands(a) => launch_two_summands(a, spec.epsilon, spec.c, spec.initial[0], delta),
        Ansatz::DancerWang(a) => launch_dancer_wang(a, spec.epsilon, spec.c, &spec.initial, delta),
        Ansatz::Lpp(a) => launch_lpp(a, spec.epsilon, spec.c, &spec.initial, delta),
    }
}

/// Replaces `u̇` so that the trace form of the conservation law holds
/// exactly: `(-u̇ + tr L)² = tr r + tr L² + (n-1)ε/2 - ε u - C`, taking the
/// root with `-u̇ + tr L > 0`. The correction is `O(δ³)` on a series state.
pub fn project_onto_constraint(state: &SolitonState, spec: &ProblemSpec) -> Result<SolitonState> {
    let inv = Invariants::at(state, &spec.ansatz);
    let xi_sq = inv.tr_r + inv.tr_l2 + (inv.n - 1.0) * spec.epsilon / 2.0
        - spec.epsilon * state.u
        - spec.c;
    if !(xi_sq > 0.0) {
        return Err(Error::Precondition(format!(
            "conservation law has no real root at t = {} (ξ² = {xi_sq})",
            state.t
        )));
    }
    let mut out = state.clone();
    out.du = inv.tr_l - xi_sq.sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{conservation_residual_trace_form, rhs};

    fn two(d1: usize, d2: usize, a2: f64) -> TwoSummandsAnsatz {
        TwoSummandsAnsatz::new(d1, d2, (d1 * (d1 - 1)) as f64, a2, 1.0).unwrap()
    }

    #[test]
    fn potential_from_conservation_constant() {
        let s = launch_two_summands(&two(3, 4, 8.0), 0.0, -2.0, 1.0, 1e-3).unwrap();
        assert!((s.du + 5e-4).abs() < 1e-18);
        assert!((s.u + 2.5e-7).abs() < 1e-20);
    }

    #[test]
    fn even_component_second_order() {
        let s = launch_two_summands(&two(3, 4, 8.0), 0.0, -2.0, 1.0, 1e-3).unwrap();
        assert!((s.f[1] - (1.0 + 2.5e-7)).abs() < 1e-15);
    }

    #[test]
    fn einstein_seed_has_no_potential() {
        let s = launch_two_summands(&two(2, 2, 3.0), 0.5, 0.0, 1.0, 1e-3).unwrap();
        assert_eq!((s.u, s.du), (0.0, 0.0));
        let a = DancerWangAnsatz::new(vec![2], vec![2], vec![1]).unwrap();
        let s = launch_dancer_wang(&a, 0.0, 0.0, &[2.0], 1e-3).unwrap();
        assert_eq!((s.u, s.du), (0.0, 0.0));
    }

    #[test]
    fn dancer_wang_even_components() {
        let a = DancerWangAnsatz::new(vec![2], vec![2], vec![1]).unwrap();
        let s = launch_dancer_wang(&a, 0.0, -1.0, &[2.0], 1e-3).unwrap();
        assert!((s.f[1] - 2.0 * (1.0 + 1.25e-7)).abs() < 1e-15);
        assert!((s.f[0] / s.f[1] - 1e-3 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn lpp_einstein_factor() {
        let a = LuPagePopeAnsatz {
            d1: 2,
            p1: 2,
            q1: 1,
            d2: 3,
        };
        let s = launch_lpp(&a, 0.0, -1.0, &[1.0, 1.0], 1e-3).unwrap();
        assert!((s.f[2] - (1.0 + 5e-7)).abs() < 1e-15);
        let flat = LuPagePopeAnsatz { d2: 1, ..a };
        let s = launch_lpp(&flat, 0.0, -1.0, &[1.0, 1.0], 1e-3).unwrap();
        assert_eq!(s.f[2], 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = two(3, 4, 8.0);
        assert!(launch_two_summands(&a, 0.0, -1.0, 1.0, 0.0).is_err());
        assert_eq!(
            launch_two_summands(&a, 0.0, -1.0, -1.0, 1e-3).unwrap_err().field(),
            Some("initial[0]")
        );
        assert_eq!(
            launch_two_summands(&a, 0.0, 1.0, 1.0, 1e-3).unwrap_err().field(),
            Some("C")
        );
        assert!(launch_two_summands(&a, -1.0, -1.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn launch_residual_shrinks_with_delta() {
        let spec = ProblemSpec {
            ansatz: Ansatz::TwoSummands(two(3, 4, 8.0)),
            epsilon: 1.0,
            c: -1.0,
            initial: vec![1.0],
        };
        let res = |d: f64| conservation_residual_trace_form(&launch(&spec, d).unwrap(), &spec).abs();
        let (r1, r2) = (res(1e-2), res(5e-3));
        assert!(r2 < r1 / 3.0, "{r1} {r2}");
        let projected = project_onto_constraint(&launch(&spec, 1e-2).unwrap(), &spec).unwrap();
        assert!(conservation_residual_trace_form(&projected, &spec).abs() < 1e-10);
        assert!(rhs(&projected, &spec.ansatz, 1.0).is_ok());
    }
}
