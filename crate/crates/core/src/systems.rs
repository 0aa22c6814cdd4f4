//! The three soliton ODE systems and their residuals.
//!
//! Every system is written in the same form: with `ℓ_i = ḟ_i/f_i`,
//! multiplicities `d_i` and `ξ = -u̇ + Σ d_i ℓ_i`,
//!
//! ```text
//! d/dt ℓ_i = r_i(f) - ξ ℓ_i + ε/2
//! ü        = Σ d_i f̈_i/f_i - ε/2
//! ```
//!
//! where `r_i` are the Ricci eigenvalues of the principal orbit. The systems
//! differ only in how `r_i` depends on the metric functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{IsotropyDecomposition, ScalingVector};

/// Fibre `d1` / base `d2` system with constants `A1, A2, A3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSummandsAnsatz {
    pub d1: usize,
    pub d2: usize,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    /// Marks data coming from an actual group diagram, where `A1 = d1(d1-1)`
    /// is expected. Only ever flagged, never enforced.
    #[serde(default)]
    pub geometric: bool,
}

impl TwoSummandsAnsatz {
    pub fn new(d1: usize, d2: usize, a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let a = TwoSummandsAnsatz {
            d1,
            d2,
            a1,
            a2,
            a3,
            geometric: false,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 {
            return Err(Error::invalid("ansatz.d1", "must be a positive integer"));
        }
        if self.d2 == 0 {
            return Err(Error::invalid("ansatz.d2", "must be a positive integer"));
        }
        if !(self.a1 >= 0.0) || !self.a1.is_finite() {
            return Err(Error::invalid("ansatz.A1", "must be finite and nonnegative"));
        }
        if !(self.a2 > 0.0) || !self.a2.is_finite() {
            return Err(Error::non_positive("ansatz.A2", self.a2));
        }
        if !(self.a3 > 0.0) || !self.a3.is_finite() {
            return Err(Error::non_positive("ansatz.A3", self.a3));
        }
        Ok(())
    }

    /// `Ric^{G/H} = A2/d2`.
    pub fn base_ricci(&self) -> f64 {
        self.a2 / self.d2 as f64
    }

    /// `‖A‖² = A3/d2`.
    pub fn o_neill_norm_sq(&self) -> f64 {
        self.a3 / self.d2 as f64
    }

    /// Set when flagged geometric but `A1 ≠ d1(d1-1)`.
    pub fn geometric_mismatch(&self) -> Option<f64> {
        let expected = (self.d1 * (self.d1 - 1)) as f64;
        (self.geometric && (self.a1 - expected).abs() > 1e-12 * (1.0 + expected))
            .then_some(self.a1 - expected)
    }

    /// Encoding with `[111] = [222] = 0`, `[122] = 4 A3`,
    /// `b1 = 2(A1 + 2A3)/d1`, `b2 = 2 A2/d2`.
    pub fn decomposition(&self) -> Result<IsotropyDecomposition> {
        let (d1, d2) = (self.d1 as f64, self.d2 as f64);
        IsotropyDecomposition::from_representatives(
            vec![self.d1, self.d2],
            vec![2.0 * (self.a1 + 2.0 * self.a3) / d1, 2.0 * self.a2 / d2],
            None,
            &[(0, 1, 1, 4.0 * self.a3)],
        )
    }
}

/// Circle bundle over `m` Fano Kähler–Einstein factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DancerWangAnsatz {
    pub d: Vec<usize>,
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    /// Permits `q_i = 0`. Only used to embed the Lü–Page–Pope system.
    #[serde(default)]
    pub allow_degenerate: bool,
}

impl DancerWangAnsatz {
    pub fn new(d: Vec<usize>, p: Vec<i64>, q: Vec<i64>) -> Result<Self> {
        let a = DancerWangAnsatz {
            d,
            p,
            q,
            allow_degenerate: false,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.d.len();
        if m == 0 {
            return Err(Error::invalid("ansatz.d", "needs at least one factor"));
        }
        for (name, len) in [("ansatz.p", self.p.len()), ("ansatz.q", self.q.len())] {
            if len != m {
                return Err(Error::invalid(
                    name,
                    format!("has {len} entries, expected {m}"),
                ));
            }
        }
        for i in 0..m {
            if self.d[i] == 0 || (!self.allow_degenerate && self.d[i] % 2 != 0) {
                return Err(Error::invalid(
                    format!("ansatz.d[{i}]"),
                    "must be even and positive",
                ));
            }
            if self.p[i] <= 0 {
                return Err(Error::non_positive(format!("ansatz.p[{i}]"), self.p[i] as f64));
            }
            if self.q[i] == 0 && !self.allow_degenerate {
                return Err(Error::invalid(format!("ansatz.q[{i}]"), "must be nonzero"));
            }
        }
        Ok(())
    }

    /// Encoding with a one-dimensional summand `0` for the circle fibre:
    /// `b0 = Σ d_i q_i²`, `[0ii] = d_i q_i²`, `b_i = 2 p_i`.
    pub fn decomposition(&self) -> Result<IsotropyDecomposition> {
        let mut dims = vec![1];
        dims.extend(&self.d);
        let mut killing = vec![0.0];
        let mut reps = Vec::new();
        for i in 0..self.m() {
            let w = (self.d[i] as i64 * self.q[i] * self.q[i]) as f64;
            killing[0] += w;
            killing.push(2.0 * self.p[i] as f64);
            reps.push((0, i + 1, i + 1, w));
        }
        IsotropyDecomposition::from_representatives(dims, killing, None, &reps)
    }

    /// The equivalent two-summands data for `m = 1`:
    /// `d1 ↦ 1, d2 ↦ d_1, A1 = 0, A2 = d_1 p_1, A3 = d_1 q_1²/4`.
    pub fn as_two_summands(&self) -> Option<TwoSummandsAnsatz> {
        if self.m() != 1 {
            return None;
        }
        let d = self.d[0] as f64;
        Some(TwoSummandsAnsatz {
            d1: 1,
            d2: self.d[0],
            a1: 0.0,
            a2: d * self.p[0] as f64,
            a3: d * (self.q[0] * self.q[0]) as f64 / 4.0,
            geometric: false,
        })
    }
}

/// Dancer–Wang with one factor, warped with an Einstein manifold `N` of
/// dimension `d2` and Einstein constant `d2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuPagePopeAnsatz {
    pub d1: usize,
    pub p1: i64,
    pub q1: i64,
    pub d2: usize,
}

impl LuPagePopeAnsatz {
    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 || self.d1 % 2 != 0 {
            return Err(Error::invalid("ansatz.d1", "must be even and positive"));
        }
        if self.p1 <= 0 {
            return Err(Error::non_positive("ansatz.p1", self.p1 as f64));
        }
        if self.q1 == 0 {
            return Err(Error::invalid("ansatz.q1", "must be nonzero"));
        }
        if self.d2 == 0 {
            return Err(Error::invalid("ansatz.d2", "must be a positive integer"));
        }
        Ok(())
    }

    /// Embedding as Dancer–Wang with `m = 2`, `(p2, q2) = (d2 - 1, 0)`.
    /// For `d2 = 1` the second `p` is zero, which only the RHS tolerates.
    pub fn as_dancer_wang(&self) -> DancerWangAnsatz {
        DancerWangAnsatz {
            d: vec![self.d1, self.d2],
            p: vec![self.p1, self.d2 as i64 - 1],
            q: vec![self.q1, 0],
            allow_degenerate: true,
        }
    }
}

/// One of the three supported systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", content = "ansatz", rename_all = "snake_case")]
pub enum Ansatz {
    TwoSummands(TwoSummandsAnsatz),
    DancerWang(DancerWangAnsatz),
    Lpp(LuPagePopeAnsatz),
}

impl Ansatz {
    pub fn name(&self) -> &'static str {
        match self {
            Ansatz::TwoSummands(_) => "two_summands",
            Ansatz::DancerWang(_) => "dancer_wang",
            Ansatz::Lpp(_) => "lpp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Ansatz::TwoSummands(a) => a.validate(),
            Ansatz::DancerWang(a) => a.validate(),
            Ansatz::Lpp(a) => a.validate(),
        }
    }

    /// Number of metric functions.
    pub fn components(&self) -> usize {
        match self {
            Ansatz::TwoSummands(_) => 2,
            Ansatz::DancerWang(a) => a.m() + 1,
            Ansatz::Lpp(_) => 3,
        }
    }

    /// Number of sizes in `initial`: `f̄`, or the `ḡ_i`.
    pub fn initial_sizes(&self) -> usize {
        self.components() - 1
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        match self {
            Ansatz::TwoSummands(a) => vec![a.d1 as f64, a.d2 as f64],
            Ansatz::DancerWang(a) => std::iter::once(1.0)
                .chain(a.d.iter().map(|&d| d as f64))
                .collect(),
            Ansatz::Lpp(a) => vec![1.0, a.d1 as f64, a.d2 as f64],
        }
    }

    /// Principal orbit dimension `n = Σ d_i`.
    pub fn orbit_dim(&self) -> f64 {
        self.multiplicities().iter().sum()
    }

    /// Dimension of the collapsing sphere.
    pub fn collapsing_dim(&self) -> usize {
        match self {
            Ansatz::TwoSummands(a) => a.d1,
            _ => 1,
        }
    }

    /// Ricci eigenvalues `r_i` at metric functions `f`.
    pub fn ricci_terms(&self, f: &[f64], r: &mut [f64]) {
        match self {
            Ansatz::TwoSummands(a) => two_summands_ricci(a, f, r),
            Ansatz::DancerWang(a) => dancer_wang_ricci(&a.d, &a.p, &a.q, f, r),
            Ansatz::Lpp(a) => dancer_wang_ricci(
                &[a.d1, a.d2],
                &[a.p1, a.d2 as i64 - 1],
                &[a.q1, 0],
                f,
                r,
            ),
        }
    }

    /// `b_i` of the induced decomposition, used for the scalar-curvature
    /// ceiling `tr r ≤ 1/2 Σ d_i b_i / f_i²`.
    pub fn killing_coefficients(&self) -> Vec<f64> {
        match self {
            Ansatz::TwoSummands(a) => vec![
                2.0 * (a.a1 + 2.0 * a.a3) / a.d1 as f64,
                2.0 * a.a2 / a.d2 as f64,
            ],
            Ansatz::DancerWang(a) => dw_killing(&a.d, &a.p, &a.q),
            Ansatz::Lpp(a) => dw_killing(&[a.d1, a.d2], &[a.p1, a.d2 as i64 - 1], &[a.q1, 0]),
        }
    }

    /// Decomposition data for the generic RHS.
    pub fn decomposition(&self) -> Result<IsotropyDecomposition> {
        match self {
            Ansatz::TwoSummands(a) => a.decomposition(),
            Ansatz::DancerWang(a) => a.decomposition(),
            Ansatz::Lpp(a) => a.as_dancer_wang().decomposition(),
        }
    }
}

fn dw_killing(d: &[usize], p: &[i64], q: &[i64]) -> Vec<f64> {
    let mut b = vec![d
        .iter()
        .zip(q)
        .map(|(&d, &q)| (d as i64 * q * q) as f64)
        .sum()];
    b.extend(p.iter().map(|&p| 2.0 * p as f64));
    b
}

fn two_summands_ricci(a: &TwoSummandsAnsatz, f: &[f64], r: &mut [f64]) {
    let (d1, d2) = (a.d1 as f64, a.d2 as f64);
    let (x1, x2) = (f[0] * f[0], f[1] * f[1]);
    let twist = a.a3 * x1 / (x2 * x2);
    r[0] = a.a1 / (d1 * x1) + twist / d1;
    r[1] = a.a2 / (d2 * x2) - 2.0 * twist / d2;
}

fn dancer_wang_ricci(d: &[usize], p: &[i64], q: &[i64], f: &[f64], r: &mut [f64]) {
    let x0 = f[0] * f[0];
    r[0] = 0.0;
    for i in 0..d.len() {
        let xi = f[i + 1] * f[i + 1];
        let q2 = (q[i] * q[i]) as f64;
        let twist = x0 / (xi * xi);
        r[0] += d[i] as f64 * q2 / 4.0 * twist;
        r[i + 1] = p[i] as f64 / xi - q2 / 2.0 * twist;
    }
}

/// Problem data: ansatz, soliton constant `ε`, conservation constant `C`
/// and the initial orbit sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub ansatz: Ansatz,
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `[f̄]` for two summands, `[ḡ_1, …]` otherwise.
    pub initial: Vec<f64>,
}

impl ProblemSpec {
    /// Checks everything a launcher or monitor relies on.
    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be finite and nonnegative"));
        }
        if !(self.c <= 0.0) || !self.c.is_finite() {
            return Err(Error::invalid("C", "must be finite and nonpositive"));
        }
        let want = self.ansatz.initial_sizes();
        if self.initial.len() != want {
            return Err(Error::invalid(
                "initial",
                format!("has {} entries, expected {want}", self.initial.len()),
            ));
        }
        for (i, &v) in self.initial.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::non_positive(format!("initial[{i}]"), v));
            }
        }
        Ok(())
    }

    pub fn d_s(&self) -> usize {
        self.ansatz.collapsing_dim()
    }
}

/// Time slice `(t, f, ḟ, u, u̇)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonState {
    pub t: f64,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub u: f64,
    pub du: f64,
}

impl SolitonState {
    /// Packs into `[f.., ḟ.., u, u̇]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.f.len() + 2);
        y.extend(&self.f);
        y.extend(&self.df);
        y.push(self.u);
        y.push(self.du);
        y
    }

    pub fn from_slice(t: f64, y: &[f64]) -> Self {
        let k = (y.len() - 2) / 2;
        SolitonState {
            t,
            f: y[..k].to_vec(),
            df: y[k..2 * k].to_vec(),
            u: y[2 * k],
            du: y[2 * k + 1],
        }
    }

    pub fn components(&self) -> usize {
        self.f.len()
    }

    /// Shape-operator eigenvalues `ḟ_i/f_i`.
    pub fn shape(&self) -> Vec<f64> {
        self.f.iter().zip(&self.df).map(|(f, df)| df / f).collect()
    }

    /// `tr L` and `tr L²` for multiplicities `d`.
    pub fn traces(&self, d: &[f64]) -> (f64, f64) {
        let mut tr = 0.0;
        let mut tr2 = 0.0;
        for (i, l) in self.shape().into_iter().enumerate() {
            tr += d[i] * l;
            tr2 += d[i] * l * l;
        }
        (tr, tr2)
    }

    /// `ξ = -u̇ + tr L`.
    pub fn xi(&self, d: &[f64]) -> f64 {
        -self.du + self.traces(d).0
    }

    pub fn check(&self, components: usize) -> Result<()> {
        if self.f.len() != components || self.df.len() != components {
            return Err(Error::DimensionMismatch {
                expected: components,
                found: self.f.len(),
            });
        }
        if let Some((i, &v)) = self.f.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::non_positive(format!("f[{i}]"), v));
        }
        Ok(())
    }
}

/// Time derivative of a state, plus the logarithmic form the systems are
/// written in.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
    pub du: f64,
    pub ddu: f64,
    /// `d/dt (ḟ_i/f_i)`.
    pub dlog: Vec<f64>,
}

impl StateDerivative {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.df.len() + 2);
        y.extend(&self.df);
        y.extend(&self.ddf);
        y.push(self.du);
        y.push(self.ddu);
        y
    }
}

/// Fills `dy` for packed `y` given multiplicities and Ricci terms. Shared by
/// every system and by the integrator's hot loop.
pub(crate) fn packed_rhs(d: &[f64], r: &[f64], eps: f64, y: &[f64], dy: &mut [f64]) {
    let k = d.len();
    let du = y[2 * k + 1];
    let mut tr = 0.0;
    for i in 0..k {
        tr += d[i] * y[k + i] / y[i];
    }
    let xi = -du + tr;
    let mut udd = -0.5 * eps;
    for i in 0..k {
        let l = y[k + i] / y[i];
        let dl = r[i] - xi * l + 0.5 * eps;
        let ratio = dl + l * l;
        dy[i] = y[k + i];
        dy[k + i] = y[i] * ratio;
        udd += d[i] * ratio;
    }
    dy[2 * k] = du;
    dy[2 * k + 1] = udd;
}

fn assemble(state: &SolitonState, d: &[f64], r: &[f64], eps: f64) -> StateDerivative {
    let k = d.len();
    let y = state.to_vec();
    let mut dy = vec![0.0; y.len()];
    packed_rhs(d, r, eps, &y, &mut dy);
    let dlog = (0..k)
        .map(|i| {
            let l = state.df[i] / state.f[i];
            dy[k + i] / state.f[i] - l * l
        })
        .collect();
    StateDerivative {
        df: dy[..k].to_vec(),
        ddf: dy[k..2 * k].to_vec(),
        du: dy[2 * k],
        ddu: dy[2 * k + 1],
        dlog,
    }
}

/// RHS for any of the three ansätze.
pub fn rhs(state: &SolitonState, ansatz: &Ansatz, eps: f64) -> Result<StateDerivative> {
    state.check(ansatz.components())?;
    let d = ansatz.multiplicities();
    let mut r = vec![0.0; d.len()];
    ansatz.ricci_terms(&state.f, &mut r);
    Ok(assemble(state, &d, &r, eps))
}

pub fn rhs_two_summands(
    state: &SolitonState,
    a: &TwoSummandsAnsatz,
    eps: f64,
) -> Result<StateDerivative> {
    rhs(state, &Ansatz::TwoSummands(*a), eps)
}

pub fn rhs_dancer_wang(
    state: &SolitonState,
    a: &DancerWangAnsatz,
    eps: f64,
) -> Result<StateDerivative> {
    rhs(state, &Ansatz::DancerWang(a.clone()), eps)
}

pub fn rhs_lpp(state: &SolitonState, a: &LuPagePopeAnsatz, eps: f64) -> Result<StateDerivative> {
    rhs(state, &Ansatz::Lpp(*a), eps)
}

/// RHS with `r_i` taken from the closed-form Ricci eigenvalues of a
/// decomposition at `x_i = f_i²`.
pub fn rhs_homogeneous(
    state: &SolitonState,
    dec: &IsotropyDecomposition,
    eps: f64,
) -> Result<StateDerivative> {
    state.check(dec.summands())?;
    let d: Vec<f64> = dec.dims().iter().map(|&d| d as f64).collect();
    let x = ScalingVector::new(state.f.iter().map(|f| f * f).collect())?;
    let r = dec.ricci_eigenvalues(&x)?;
    Ok(assemble(state, &d, &r, eps))
}

/// Quantities shared by the conservation residuals and the loci.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub tr_l: f64,
    pub tr_l2: f64,
    pub tr_r: f64,
    pub xi: f64,
    pub n: f64,
}

impl Invariants {
    pub fn at(state: &SolitonState, ansatz: &Ansatz) -> Self {
        let d = ansatz.multiplicities();
        let mut r = vec![0.0; d.len()];
        ansatz.ricci_terms(&state.f, &mut r);
        let (tr_l, tr_l2) = state.traces(&d);
        Invariants {
            tr_l,
            tr_l2,
            tr_r: d.iter().zip(&r).map(|(d, r)| d * r).sum(),
            xi: -state.du + tr_l,
            n: d.iter().sum(),
        }
    }
}

/// `ü + (-u̇ + tr L) u̇ - C - ε u`.
pub fn conservation_residual(state: &SolitonState, udd: f64, spec: &ProblemSpec) -> f64 {
    let d = spec.ansatz.multiplicities();
    udd + state.xi(&d) * state.du - spec.c - spec.epsilon * state.u
}

/// `tr r + tr L² - (-u̇ + tr L)² + (n-1) ε/2 - C - ε u`.
pub fn conservation_residual_trace_form(state: &SolitonState, spec: &ProblemSpec) -> f64 {
    let inv = Invariants::at(state, &spec.ansatz);
    inv.tr_r + inv.tr_l2 - inv.xi * inv.xi + (inv.n - 1.0) * spec.epsilon / 2.0
        - spec.c
        - spec.epsilon * state.u
}

/// `2ü = C + ε u + u̇² + tr L² - (tr L)² + tr r + (n-1) ε/2`, using
/// `(d_S + 1) ü(0) = C`.
pub fn u_second_derivative_identity(state: &SolitonState, spec: &ProblemSpec) -> f64 {
    let inv = Invariants::at(state, &spec.ansatz);
    spec.c + spec.epsilon * state.u + state.du * state.du + inv.tr_l2 - inv.tr_l * inv.tr_l
        + inv.tr_r
        + (inv.n - 1.0) * spec.epsilon / 2.0
}

/// `2 g_i ġ_i + q_i f` per factor; zero on the Kähler locus.
pub fn kahler_residual(state: &SolitonState, a: &DancerWangAnsatz) -> Vec<f64> {
    (0..a.m())
        .map(|i| 2.0 * state.f[i + 1] * state.df[i + 1] + a.q[i] as f64 * state.f[0])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(f: Vec<f64>) -> SolitonState {
        let k = f.len();
        SolitonState {
            t: 1.0,
            f,
            df: vec![0.0; k],
            u: 0.0,
            du: 0.0,
        }
    }

    #[test]
    fn two_summands_substitution() {
        let a = TwoSummandsAnsatz::new(3, 4, 6.0, 8.0, 3.0).unwrap();
        let d = rhs_two_summands(&still(vec![1.0, 1.0]), &a, 0.0).unwrap();
        assert!((d.dlog[0] - 3.0).abs() < 1e-15);
        assert!((d.dlog[1] - 0.5).abs() < 1e-15);
        assert!((d.ddu - 11.0).abs() < 1e-14);
    }

    #[test]
    fn dancer_wang_substitution() {
        let a = DancerWangAnsatz::new(vec![2], vec![2], vec![1]).unwrap();
        let d = rhs_dancer_wang(&still(vec![1.0, 2.0]), &a, 0.0).unwrap();
        assert!((d.dlog[0] - 0.03125).abs() < 1e-15);
        assert!((d.dlog[1] - 0.46875).abs() < 1e-15);
    }

    #[test]
    fn lpp_substitution() {
        let a = LuPagePopeAnsatz {
            d1: 2,
            p1: 2,
            q1: 1,
            d2: 3,
        };
        let d = rhs_lpp(&still(vec![1.0, 2.0, 1.0]), &a, 0.0).unwrap();
        assert!((d.dlog[2] - 2.0).abs() < 1e-15);
        let flat = LuPagePopeAnsatz { d2: 1, ..a };
        let d = rhs_lpp(&still(vec![1.0, 2.0, 1.0]), &flat, 0.0).unwrap();
        assert_eq!(d.dlog[2], 0.0);
    }

    #[test]
    fn manufactured_residual() {
        // u̇ = 1, tr L = 2 via ḟ/f = 2 on a one-dimensional factor
        let spec = ProblemSpec {
            ansatz: Ansatz::DancerWang(DancerWangAnsatz::new(vec![2], vec![1], vec![1]).unwrap()),
            epsilon: 0.0,
            c: -1.0,
            initial: vec![1.0],
        };
        let state = SolitonState {
            t: 1.0,
            f: vec![1.0, 1.0],
            df: vec![2.0, 0.0],
            u: 0.0,
            du: 1.0,
        };
        // (-u̇ + tr L) u̇ = (-1 + 2)·1
        assert_eq!(conservation_residual(&state, 0.0, &spec), 2.0);
    }

    #[test]
    fn kahler_arithmetic() {
        let a = DancerWangAnsatz::new(vec![2], vec![1], vec![-2]).unwrap();
        let state = SolitonState {
            t: 1.0,
            f: vec![2.0, 2.0],
            df: vec![0.0, 1.0],
            u: 0.0,
            du: 0.0,
        };
        assert_eq!(kahler_residual(&state, &a), vec![0.0]);
    }

    #[test]
    fn validation_names_fields() {
        let err = DancerWangAnsatz::new(vec![3], vec![1], vec![1]).unwrap_err();
        assert_eq!(err.field(), Some("ansatz.d[0]"));
        let err = DancerWangAnsatz::new(vec![2], vec![1], vec![0]).unwrap_err();
        assert_eq!(err.field(), Some("ansatz.q[0]"));
        let err = TwoSummandsAnsatz::new(1, 2, 0.0, 0.0, 1.0).unwrap_err();
        assert_eq!(err.field(), Some("ansatz.A2"));
    }

    #[test]
    fn spec_json_shape() {
        let text = r#"{"system":"two_summands","ansatz":{"d1":1,"d2":2,"A1":0,"A2":6,"A3":1},
                       "epsilon":0,"C":-1,"initial":[1.0]}"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.d_s(), 1);
        assert_eq!(spec.ansatz.orbit_dim(), 3.0);
    }
}
