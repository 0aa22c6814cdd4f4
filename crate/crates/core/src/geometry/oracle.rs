//! Brute-force curvature of `G/K` over an explicit basis.
//!
//! Everything here works with coordinates of a Lie algebra whose basis is
//! orthonormal for the biinvariant inner product `b`. Scalar and Ricci
//! curvature are summed directly over a `⟨·,·⟩`-orthonormal basis of `p`,
//! without going through the structure constants `[ijk]`, so the results are
//! an independent check on the closed forms in the parent module.

use crate::error::{Error, Result};

use super::IsotropyDecomposition;

/// A real Lie algebra in a `b`-orthonormal basis: `[e_a, e_b] = Σ_c C_ab^c e_c`.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    consts: Vec<f64>,
}

impl LieAlgebra {
    pub fn new(dim: usize, consts: Vec<f64>) -> Result<Self> {
        if consts.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: consts.len(),
            });
        }
        Ok(LieAlgebra { dim, consts })
    }

    /// `su(2)` with `b = -B`: `[e_a, e_b] = ε_abc e_c / √2`.
    pub fn su2() -> Self {
        let mut consts = vec![0.0; 27];
        let lam = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            consts[(a * 3 + b) * 3 + c] = lam;
            consts[(b * 3 + a) * 3 + c] = -lam;
        }
        LieAlgebra { dim: 3, consts }
    }

    /// Orthogonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &LieAlgebra) -> Self {
        let n = self.dim + other.dim;
        let mut consts = vec![0.0; n * n * n];
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    consts[(a * n + b) * n + c] = self.constant(a, b, c);
                }
            }
        }
        let o = self.dim;
        for a in 0..other.dim {
            for b in 0..other.dim {
                for c in 0..other.dim {
                    consts[((a + o) * n + b + o) * n + c + o] = other.constant(a, b, c);
                }
            }
        }
        LieAlgebra { dim: n, consts }
    }

    /// Structure constants relative to a matrix basis, with `b` the real trace
    /// form `b(X, Y) = Re tr(X Y*)`. The basis is orthonormalized first.
    pub fn from_quaternion_matrices(basis: &[QuatMatrix]) -> Result<(Self, Vec<QuatMatrix>)> {
        let ortho = gram_schmidt_matrices(basis)?;
        let n = ortho.len();
        let mut consts = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let br = ortho[a].commutator(&ortho[b]);
                let mut rest = br.clone();
                for c in 0..n {
                    let coeff = br.inner(&ortho[c]);
                    consts[(a * n + b) * n + c] = coeff;
                    rest = rest.sub(&ortho[c].scale(coeff));
                }
                if rest.norm() > 1e-10 * (1.0 + br.norm()) {
                    return Err(Error::Precondition(
                        "matrix basis is not closed under the bracket".into(),
                    ));
                }
            }
        }
        Ok((LieAlgebra { dim: n, consts }, ortho))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn constant(&self, a: usize, b: usize, c: usize) -> f64 {
        self.consts[(a * self.dim + b) * self.dim + c]
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                let w = x[a] * y[b];
                if w == 0.0 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += w * self.constant(a, b, c);
                }
            }
        }
        out
    }

    /// Killing form `B(x, y) = tr(ad x ∘ ad y)`.
    pub fn killing(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut tr = 0.0;
        for e in 0..n {
            let mut basis = vec![0.0; n];
            basis[e] = 1.0;
            let ady = self.bracket(y, &basis);
            let adx_ady = self.bracket(x, &ady);
            tr += adx_ady[e];
        }
        tr
    }

    /// Largest violation of `b([x, y], z) = -b(y, [x, z])` over basis triples.
    pub fn invariance_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    worst = worst.max((self.constant(a, b, c) + self.constant(a, c, b)).abs());
                }
            }
        }
        worst
    }
}

/// Reductive split `g = k ⊕ p_1 ⊕ … ⊕ p_s`, all bases `b`-orthonormal.
#[derive(Debug, Clone)]
pub struct HomogeneousSplit {
    algebra: LieAlgebra,
    isotropy: Vec<Vec<f64>>,
    summands: Vec<Vec<Vec<f64>>>,
}

impl HomogeneousSplit {
    /// Orthonormalizes each block and checks that the blocks are mutually
    /// `b`-orthogonal and span the algebra.
    pub fn new(
        algebra: LieAlgebra,
        isotropy: Vec<Vec<f64>>,
        summands: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = algebra.dim();
        let isotropy = gram_schmidt(&isotropy)?;
        let summands = summands
            .iter()
            .map(|s| gram_schmidt(s))
            .collect::<Result<Vec<_>>>()?;
        let all: Vec<&Vec<f64>> = isotropy.iter().chain(summands.iter().flatten()).collect();
        if all.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: all.len(),
            });
        }
        for (a, u) in all.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: u.len(),
                });
            }
            for v in all.iter().skip(a + 1) {
                if dot(u, v).abs() > 1e-10 {
                    return Err(Error::Precondition("blocks are not b-orthogonal".into()));
                }
            }
        }
        Ok(HomogeneousSplit {
            algebra,
            isotropy,
            summands,
        })
    }

    /// `G` itself as `G/{e}` with `p = g` split into the given blocks.
    pub fn group(algebra: LieAlgebra, summands: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        HomogeneousSplit::new(algebra, Vec::new(), summands)
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dims(&self) -> Vec<usize> {
        self.summands.iter().map(|s| s.len()).collect()
    }

    /// `A_αβ^γ = b([v_α, v_β], v_γ)` summed in squares per summand triple.
    pub fn structure_constants(&self) -> Vec<f64> {
        let s = self.summands.len();
        let mut out = vec![0.0; s * s * s];
        for i in 0..s {
            for j in 0..s {
                for va in &self.summands[i] {
                    for vb in &self.summands[j] {
                        let br = self.algebra.bracket(va, vb);
                        for k in 0..s {
                            let sq: f64 = self.summands[k].iter().map(|vc| dot(&br, vc).powi(2)).sum();
                            out[(i * s + j) * s + k] += sq;
                        }
                    }
                }
            }
        }
        out
    }

    /// `b_i` with `B|p_i = -b_i b|p_i`, averaged over the summand basis.
    pub fn killing_coefficients(&self) -> Vec<f64> {
        self.summands
            .iter()
            .map(|basis| {
                -basis.iter().map(|v| self.algebra.killing(v, v)).sum::<f64>() / basis.len() as f64
            })
            .collect()
    }

    /// Eigenvalue of `-Σ_z ad(z)^2` on each `p_i`, `z` running over a
    /// `b`-orthonormal basis of `k`. Nonnegative by construction.
    pub fn casimir_constants(&self) -> Vec<f64> {
        self.summands
            .iter()
            .map(|basis| {
                let total: f64 = basis
                    .iter()
                    .map(|v| {
                        self.isotropy
                            .iter()
                            .map(|z| norm_sq(&self.algebra.bracket(z, v)))
                            .sum::<f64>()
                    })
                    .sum();
                total / basis.len() as f64
            })
            .collect()
    }

    pub fn decomposition(&self) -> Result<IsotropyDecomposition> {
        IsotropyDecomposition::new(
            self.dims(),
            self.killing_coefficients(),
            Some(self.casimir_constants()),
            self.structure_constants(),
        )
    }

    /// `p`-projection of `w`, as coefficients on the concatenated `p` basis.
    fn project_p(&self, w: &[f64]) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, basis) in self.summands.iter().enumerate() {
            for v in basis {
                out.push((i, dot(w, v)));
            }
        }
        out
    }

    fn metric_norm_sq_p(&self, w: &[f64], x: &[f64]) -> f64 {
        self.project_p(w)
            .into_iter()
            .map(|(i, c)| x[i] * c * c)
            .sum()
    }

    /// `⟨·,·⟩`-orthonormal basis `e_α = v_α / √x_i`, tagged with its summand.
    fn metric_basis(&self, x: &[f64]) -> Vec<(usize, Vec<f64>)> {
        let mut out = Vec::new();
        for (i, basis) in self.summands.iter().enumerate() {
            let scale = 1.0 / x[i].sqrt();
            for v in basis {
                out.push((i, v.iter().map(|c| c * scale).collect()));
            }
        }
        out
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.summands.len() {
            return Err(Error::DimensionMismatch {
                expected: self.summands.len(),
                found: x.len(),
            });
        }
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::non_positive(format!("x[{i}]"), *v));
        }
        Ok(())
    }

    /// `s = -1/4 Σ |[e_α, e_β]_p|^2 - 1/2 Σ B(e_α, e_α)`.
    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        let basis = self.metric_basis(x);
        let mut bracket = 0.0;
        let mut killing = 0.0;
        for (_, ea) in &basis {
            for (_, eb) in &basis {
                bracket += self.metric_norm_sq_p(&self.algebra.bracket(ea, eb), x);
            }
            killing += self.algebra.killing(ea, ea);
        }
        Ok(-0.25 * bracket - 0.5 * killing)
    }

    /// Per-summand average of
    /// `Ric(X, X) = -1/2 Σ |[X, e_β]_p|^2 - 1/2 B(X, X) + 1/4 Σ ⟨[e_β, e_γ]_p, X⟩^2`
    /// over unit `X` in the summand (unimodular `G`, so the mean-curvature
    /// term vanishes).
    pub fn ricci_eigenvalues(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        let basis = self.metric_basis(x);
        let s = self.summands.len();
        let mut sums = vec![0.0; s];
        let mut counts = vec![0usize; s];
        // ⟨[e_β, e_γ]_p, X⟩ for X = e_α equals x_i b([e_β, e_γ], e_α)
        let mut pair_brackets = Vec::with_capacity(basis.len() * basis.len());
        for (_, eb) in &basis {
            for (_, ec) in &basis {
                pair_brackets.push(self.algebra.bracket(eb, ec));
            }
        }
        for (i, ea) in &basis {
            let mut ric = -0.5 * self.algebra.killing(ea, ea);
            for (_, eb) in &basis {
                ric -= 0.5 * self.metric_norm_sq_p(&self.algebra.bracket(ea, eb), x);
            }
            for w in &pair_brackets {
                let c = x[*i] * dot(w, ea);
                ric += 0.25 * c * c;
            }
            sums[*i] += ric;
            counts[*i] += 1;
        }
        Ok(sums
            .into_iter()
            .zip(counts)
            .map(|(s, c)| s / c as f64)
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

fn gram_schmidt(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = dot(&w, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
        let n = norm_sq(&w).sqrt();
        if n < 1e-12 {
            return Err(Error::Precondition("linearly dependent basis vectors".into()));
        }
        out.push(w.into_iter().map(|c| c / n).collect());
    }
    Ok(out)
}

fn gram_schmidt_matrices(basis: &[QuatMatrix]) -> Result<Vec<QuatMatrix>> {
    let mut out: Vec<QuatMatrix> = Vec::with_capacity(basis.len());
    for m in basis {
        let mut w = m.clone();
        for u in &out {
            w = w.sub(&u.scale(w.inner(u)));
        }
        let n = w.norm();
        if n < 1e-12 {
            return Err(Error::Precondition("linearly dependent matrices".into()));
        }
        out.push(w.scale(1.0 / n));
    }
    Ok(out)
}

/// Quaternion `a + b i + c j + d k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion([0.0; 4]);
    pub const ONE: Quaternion = Quaternion([1.0, 0.0, 0.0, 0.0]);
    pub const I: Quaternion = Quaternion([0.0, 1.0, 0.0, 0.0]);
    pub const J: Quaternion = Quaternion([0.0, 0.0, 1.0, 0.0]);
    pub const K: Quaternion = Quaternion([0.0, 0.0, 0.0, 1.0]);

    pub fn mul(self, o: Quaternion) -> Quaternion {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quaternion([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }

    pub fn conj(self) -> Quaternion {
        let [a, b, c, d] = self.0;
        Quaternion([a, -b, -c, -d])
    }

    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    fn scale(self, s: f64) -> Quaternion {
        Quaternion(self.0.map(|v| v * s))
    }
}

/// Square quaternionic matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatMatrix {
    n: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(n: usize) -> Self {
        QuatMatrix {
            n,
            data: vec![Quaternion::ZERO; n * n],
        }
    }

    /// Matrix with a single entry `q` at `(r, c)`.
    pub fn unit(n: usize, r: usize, c: usize, q: Quaternion) -> Self {
        let mut m = QuatMatrix::zeros(n);
        m.data[r * n + c] = q;
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        self.data[r * self.n + c]
    }

    pub fn add(&self, o: &QuatMatrix) -> QuatMatrix {
        QuatMatrix {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(*b)).collect(),
        }
    }

    pub fn sub(&self, o: &QuatMatrix) -> QuatMatrix {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> QuatMatrix {
        QuatMatrix {
            n: self.n,
            data: self.data.iter().map(|q| q.scale(s)).collect(),
        }
    }

    pub fn mul(&self, o: &QuatMatrix) -> QuatMatrix {
        let n = self.n;
        let mut out = QuatMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = Quaternion::ZERO;
                for k in 0..n {
                    acc = acc.add(self.get(r, k).mul(o.get(k, c)));
                }
                out.data[r * n + c] = acc;
            }
        }
        out
    }

    pub fn commutator(&self, o: &QuatMatrix) -> QuatMatrix {
        self.mul(o).sub(&o.mul(self))
    }

    /// `Re tr(X Y*)`: the sum of entrywise real inner products.
    pub fn inner(&self, o: &QuatMatrix) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.0.iter().zip(b.0.iter()).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

/// Two-summand data `(d1, d2, A1, A2, A3)` read off a split with
/// `[112] = 0`: `A1 = d1 b1/2 - [111]/4 - [122]/2`, `A2 = d2 b2/2 - [222]/4`,
/// `A3 = [122]/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSummandConstants {
    pub d1: usize,
    pub d2: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl TwoSummandConstants {
    pub fn from_decomposition(dec: &IsotropyDecomposition) -> Result<Self> {
        if dec.summands() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: dec.summands(),
            });
        }
        let scale = 1.0 + dec.triple(0, 1, 1).abs() + dec.triple(0, 0, 0).abs();
        if dec.triple(0, 0, 1).abs() > 1e-10 * scale {
            return Err(Error::Precondition(
                "two-summand form needs [112] = 0".into(),
            ));
        }
        let (d1, d2) = (dec.dims()[0], dec.dims()[1]);
        let b = dec.killing();
        Ok(TwoSummandConstants {
            d1,
            d2,
            a1: d1 as f64 * b[0] / 2.0 - dec.triple(0, 0, 0) / 4.0 - dec.triple(0, 1, 1) / 2.0,
            a2: d2 as f64 * b[1] / 2.0 - dec.triple(1, 1, 1) / 4.0,
            a3: dec.triple(0, 1, 1) / 4.0,
        })
    }

    /// Rescale `b` so that `A1 = d1 (d1 - 1)`, i.e. the collapsing sphere
    /// has curvature one. Requires `d1 > 1`.
    pub fn normalized(self) -> Result<Self> {
        let target = (self.d1 * (self.d1 - 1)) as f64;
        if target == 0.0 || self.a1 <= 0.0 {
            return Err(Error::Precondition(
                "normalization needs d1 > 1 and A1 > 0".into(),
            ));
        }
        // b -> λ b divides every A_i by λ
        let lambda = self.a1 / target;
        Ok(TwoSummandConstants {
            a1: target,
            a2: self.a2 / lambda,
            a3: self.a3 / lambda,
            ..self
        })
    }
}

/// Split of `sp(1) ⊕ sp(m+1)` for the group diagram
/// `(Sp(1)×Sp(m+1), Sp(1)×Sp(1)×Sp(m), Sp(1)×Sp(m))`, with `b` the real
/// trace form on block-diagonal quaternionic matrices of size `m + 2`.
///
/// `p_1` is the tangent space of the collapsing `S^3 = H/K`, `p_2` that of
/// the singular orbit `HP^m = G/H`.
pub fn quaternionic_hopf_split(m: usize) -> Result<HomogeneousSplit> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let n = m + 2;
    let imag = [Quaternion::I, Quaternion::J, Quaternion::K];
    let units = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];

    // algebra basis: sp(1) in block 0, sp(m+1) on indices 1..=m+1
    let mut basis = Vec::new();
    for &u in &imag {
        basis.push(QuatMatrix::unit(n, 0, 0, u));
    }
    for a in 1..n {
        for &u in &imag {
            basis.push(QuatMatrix::unit(n, a, a, u));
        }
    }
    let off = |a: usize, b: usize, q: Quaternion| {
        QuatMatrix::unit(n, a, b, q).sub(&QuatMatrix::unit(n, b, a, q.conj()))
    };
    for a in 1..n {
        for b in (a + 1)..n {
            for &q in &units {
                basis.push(off(a, b, q));
            }
        }
    }
    let (algebra, ortho) = LieAlgebra::from_quaternion_matrices(&basis)?;
    let coords = |mat: &QuatMatrix| -> Vec<f64> { ortho.iter().map(|e| mat.inner(e)).collect() };

    // k = Δsp(1) (block 0 with block 1) ⊕ sp(m) (blocks 2..)
    let mut isotropy = Vec::new();
    for &u in &imag {
        isotropy.push(coords(&QuatMatrix::unit(n, 0, 0, u).add(&QuatMatrix::unit(n, 1, 1, u))));
    }
    for a in 2..n {
        for &u in &imag {
            isotropy.push(coords(&QuatMatrix::unit(n, a, a, u)));
        }
        for b in (a + 1)..n {
            for &q in &units {
                isotropy.push(coords(&off(a, b, q)));
            }
        }
    }
    let fibre: Vec<Vec<f64>> = imag
        .iter()
        .map(|&u| coords(&QuatMatrix::unit(n, 0, 0, u).sub(&QuatMatrix::unit(n, 1, 1, u))))
        .collect();
    let mut base = Vec::new();
    for b in 2..n {
        for &q in &units {
            base.push(coords(&off(1, b, q)));
        }
    }
    HomogeneousSplit::new(algebra, isotropy, vec![fibre, base])
}
