//! Curvature of compact homogeneous spaces `G/K` from structure-constant data.
//!
//! A decomposition `p = p_1 ⊕ … ⊕ p_s` of the isotropy representation into
//! `b`-orthogonal summands is described by the dimensions `d_i`, the Killing
//! coefficients `b_i` (`B|p_i = -b_i b|p_i`) and the symmetric tensor `[ijk]`.
//! For a diagonal metric `x_1 b|p_1 ⊥ … ⊥ x_s b|p_s` the scalar curvature and
//! the Ricci eigenvalues are closed-form rational functions of `x`.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-summand metric scalings `x_i > 0` (squared lengths).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector(Vec<f64>);

impl ScalingVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (i, &xi) in x.iter().enumerate() {
            if !(xi > 0.0) || !xi.is_finite() {
                return Err(Error::non_positive(format!("x[{i}]"), xi));
            }
        }
        Ok(ScalingVector(x))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiply every scaling by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        ScalingVector::new(self.0.iter().map(|x| x * lambda).collect())
    }
}

/// Structure data of an isotropy decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyDecomposition {
    dims: Vec<usize>,
    killing: Vec<f64>,
    casimir: Option<Vec<f64>>,
    /// Dense `s x s x s` tensor, index `(i * s + j) * s + k`.
    triples: Vec<f64>,
    normalization: Option<String>,
}

impl IsotropyDecomposition {
    /// Build from a dense tensor. The tensor is taken as given; asymmetric or
    /// negative entries are reported by [`validate`](Self::validate).
    pub fn new(
        dims: Vec<usize>,
        killing: Vec<f64>,
        casimir: Option<Vec<f64>>,
        triples: Vec<f64>,
    ) -> Result<Self> {
        let s = dims.len();
        if s == 0 {
            return Err(Error::invalid("summands", "at least one summand is required"));
        }
        if killing.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: killing.len(),
            });
        }
        if let Some(c) = &casimir {
            if c.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    found: c.len(),
                });
            }
        }
        if triples.len() != s * s * s {
            return Err(Error::DimensionMismatch {
                expected: s * s * s,
                found: triples.len(),
            });
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("summands[{i}].dim"), "must be a positive integer"));
        }
        Ok(IsotropyDecomposition {
            dims,
            killing,
            casimir,
            triples,
            normalization: None,
        })
    }

    /// Build from one representative per unordered triple; all permutations
    /// are filled in.
    pub fn from_representatives(
        dims: Vec<usize>,
        killing: Vec<f64>,
        casimir: Option<Vec<f64>>,
        reps: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let s = dims.len();
        let mut dec = IsotropyDecomposition::new(dims, killing, casimir, vec![0.0; s * s * s])?;
        for &(i, j, k, v) in reps {
            dec.check_index(i, j, k)?;
            for (a, b, c) in permutations(i, j, k) {
                let idx = dec.index(a, b, c);
                dec.triples[idx] = v;
            }
        }
        Ok(dec)
    }

    pub fn with_normalization(mut self, note: impl Into<String>) -> Self {
        self.normalization = Some(note.into());
        self
    }

    fn check_index(&self, i: usize, j: usize, k: usize) -> Result<()> {
        let s = self.summands();
        for (name, v) in [("i", i), ("j", j), ("k", k)] {
            if v >= s {
                return Err(Error::invalid(
                    format!("triples.{name}"),
                    format!("index {v} out of range for {s} summands"),
                ));
            }
        }
        Ok(())
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let s = self.dims.len();
        (i * s + j) * s + k
    }

    pub fn summands(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn killing(&self) -> &[f64] {
        &self.killing
    }

    pub fn casimir(&self) -> Option<&[f64]> {
        self.casimir.as_deref()
    }

    pub fn normalization(&self) -> Option<&str> {
        self.normalization.as_deref()
    }

    /// `[ijk]`.
    pub fn triple(&self, i: usize, j: usize, k: usize) -> f64 {
        self.triples[self.index(i, j, k)]
    }

    /// Total dimension `Σ d_i` of the isotropy representation.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    fn check_x(&self, x: &ScalingVector) -> Result<()> {
        if x.len() != self.summands() {
            return Err(Error::DimensionMismatch {
                expected: self.summands(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `s = -1/4 Σ [ijk] x_k/(x_i x_j) + 1/2 Σ d_i b_i / x_i`.
    pub fn scalar_curvature(&self, x: &ScalingVector) -> Result<f64> {
        self.check_x(x)?;
        let x = x.as_slice();
        let s = self.summands();
        let mut bracket = 0.0;
        for i in 0..s {
            for j in 0..s {
                for k in 0..s {
                    let t = self.triple(i, j, k);
                    if t != 0.0 {
                        bracket += t * x[k] / (x[i] * x[j]);
                    }
                }
            }
        }
        let killing: f64 = (0..s)
            .map(|i| self.dims[i] as f64 * self.killing[i] / x[i])
            .sum();
        Ok(-0.25 * bracket + 0.5 * killing)
    }

    /// Ricci eigenvalue `r_i` on each summand.
    pub fn ricci_eigenvalues(&self, x: &ScalingVector) -> Result<Vec<f64>> {
        self.check_x(x)?;
        let x = x.as_slice();
        let s = self.summands();
        let mut out = Vec::with_capacity(s);
        for i in 0..s {
            let di = self.dims[i] as f64;
            let mut first = 0.0;
            let mut second = 0.0;
            for j in 0..s {
                for k in 0..s {
                    let t = self.triple(i, j, k);
                    if t != 0.0 {
                        first += t * x[k] / (x[i] * x[j]);
                        second += t * x[i] / (x[j] * x[k]);
                    }
                }
            }
            out.push(0.5 * self.killing[i] / x[i] - first / (2.0 * di) + second / (4.0 * di));
        }
        Ok(out)
    }

    /// Upper bound `1/2 Σ d_i b_i / x_i` on the scalar curvature.
    pub fn killing_bound(&self, x: &ScalingVector) -> Result<f64> {
        self.check_x(x)?;
        Ok(0.5
            * x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, xi)| self.dims[i] as f64 * self.killing[i] / xi)
                .sum::<f64>())
    }

    /// Report-only structural checks.
    pub fn validate(&self) -> ValidationReport {
        let s = self.summands();
        let mut report = ValidationReport::default();
        let scale = self
            .triples
            .iter()
            .chain(self.killing.iter())
            .fold(1.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale;
        for i in 0..s {
            for j in 0..s {
                for k in 0..s {
                    let v = self.triple(i, j, k);
                    // report each unordered pair of disagreeing entries once
                    for (a, b, c) in permutations(i, j, k) {
                        if (a, b, c) > (i, j, k) {
                            let w = self.triple(a, b, c);
                            if (v - w).abs() > tol {
                                report.violations.push(Violation::Asymmetric {
                                    first: [i, j, k],
                                    second: [a, b, c],
                                    first_value: v,
                                    second_value: w,
                                });
                            }
                        }
                    }
                    if v < 0.0 {
                        report.violations.push(Violation::NegativeTriple {
                            index: [i, j, k],
                            value: v,
                        });
                    }
                }
            }
            if self.killing[i] < 0.0 {
                report.violations.push(Violation::NegativeKilling {
                    summand: i,
                    value: self.killing[i],
                });
            }
        }
        report.violations.dedup();
        if let Some(c) = &self.casimir {
            let mut residuals = Vec::with_capacity(s);
            for i in 0..s {
                let sum: f64 = (0..s)
                    .flat_map(|j| (0..s).map(move |k| (j, k)))
                    .map(|(j, k)| self.triple(i, j, k))
                    .sum();
                let di = self.dims[i] as f64;
                let residual = sum - di * (self.killing[i] - 2.0 * c[i]);
                if residual.abs() > 1e-10 * (1.0 + sum.abs() + di * self.killing[i].abs()) {
                    report.violations.push(Violation::WangZiller {
                        summand: i,
                        residual,
                    });
                }
                residuals.push(residual);
            }
            report.wang_ziller_residuals = Some(residuals);
        }
        report
    }

    /// Parse the JSON document format.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: DecompositionDocument = serde_json::from_str(text)?;
        doc.into_decomposition()
    }

    pub fn to_document(&self) -> DecompositionDocument {
        let s = self.summands();
        let mut triples = Vec::new();
        for i in 0..s {
            for j in i..s {
                for k in j..s {
                    let v = self.triple(i, j, k);
                    if v != 0.0 {
                        triples.push(TripleEntry { i, j, k, value: v });
                    }
                }
            }
        }
        DecompositionDocument {
            normalization: self.normalization.clone(),
            summands: (0..s)
                .map(|i| SummandEntry {
                    dim: self.dims[i],
                    b: self.killing[i],
                    c: self.casimir.as_ref().map(|c| c[i]),
                })
                .collect(),
            triples,
        }
    }
}

fn permutations(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
}

/// One structural problem found by [`IsotropyDecomposition::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Asymmetric {
        first: [usize; 3],
        second: [usize; 3],
        first_value: f64,
        second_value: f64,
    },
    NegativeTriple { index: [usize; 3], value: f64 },
    NegativeKilling { summand: usize, value: f64 },
    WangZiller { summand: usize, residual: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `Σ_{j,k} [ijk] - d_i (b_i - 2 c_i)` per summand, when `c` is known.
    pub wang_ziller_residuals: Option<Vec<f64>>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_symmetry_violation(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v, Violation::Asymmetric { .. }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummandEntry {
    pub dim: usize,
    pub b: f64,
    #[serde(default)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// On-disk form: one representative per unordered triple, 0-based indices,
/// plus a free-text note recording how the biinvariant metric is normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDocument {
    #[serde(default)]
    pub normalization: Option<String>,
    pub summands: Vec<SummandEntry>,
    #[serde(default)]
    pub triples: Vec<TripleEntry>,
}

impl DecompositionDocument {
    pub fn into_decomposition(self) -> Result<IsotropyDecomposition> {
        let dims: Vec<usize> = self.summands.iter().map(|s| s.dim).collect();
        let killing: Vec<f64> = self.summands.iter().map(|s| s.b).collect();
        let casimir = if self.summands.iter().all(|s| s.c.is_some()) {
            Some(self.summands.iter().map(|s| s.c.unwrap_or(0.0)).collect())
        } else {
            None
        };
        let s = dims.len();
        let mut dec = IsotropyDecomposition::new(dims, killing, casimir, vec![0.0; s * s * s])?;
        // Listed entries are placed verbatim; permutations are filled only
        // where nothing was listed, so conflicting listings surface as
        // symmetry violations.
        let mut listed = vec![false; s * s * s];
        for t in &self.triples {
            dec.check_index(t.i, t.j, t.k)?;
            let idx = dec.index(t.i, t.j, t.k);
            dec.triples[idx] = t.value;
            listed[idx] = true;
        }
        for t in &self.triples {
            for (a, b, c) in permutations(t.i, t.j, t.k) {
                let idx = dec.index(a, b, c);
                if !listed[idx] {
                    dec.triples[idx] = t.value;
                }
            }
        }
        dec.normalization = self.normalization;
        Ok(dec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2_single() -> IsotropyDecomposition {
        // su(2) with b = -B as a single 3-dim summand: [111] = 3, b_1 = 1
        IsotropyDecomposition::from_representatives(vec![3], vec![1.0], Some(vec![0.0]), &[(0, 0, 0, 3.0)])
            .unwrap()
    }

    #[test]
    fn flat_torus_has_zero_curvature() {
        let dec = IsotropyDecomposition::new(vec![2, 1], vec![0.0, 0.0], None, vec![0.0; 8]).unwrap();
        let x = ScalingVector::new(vec![0.7, 3.1]).unwrap();
        assert_eq!(dec.scalar_curvature(&x).unwrap(), 0.0);
        assert_eq!(dec.ricci_eigenvalues(&x).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_summand_without_bracket() {
        let dec = IsotropyDecomposition::new(vec![5], vec![0.8], None, vec![0.0]).unwrap();
        let x = ScalingVector::new(vec![2.5]).unwrap();
        let s = dec.scalar_curvature(&x).unwrap();
        assert!((s - 5.0 * 0.8 / (2.0 * 2.5)).abs() < 1e-15);
    }

    #[test]
    fn round_three_sphere() {
        // SU(2) with b = -B has sectional curvature 1/8: Ric = 1/4, scal = 3/4
        let dec = su2_single();
        let x = ScalingVector::new(vec![1.0]).unwrap();
        assert!((dec.scalar_curvature(&x).unwrap() - 0.75).abs() < 1e-15);
        assert!((dec.ricci_eigenvalues(&x).unwrap()[0] - 0.25).abs() < 1e-15);
        assert!(dec.validate().is_clean());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let dec = su2_single();
        let x = ScalingVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            dec.scalar_curvature(&x),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(dec.ricci_eigenvalues(&x).is_err());
    }

    #[test]
    fn scaling_vector_rejects_nonpositive() {
        assert!(ScalingVector::new(vec![1.0, 0.0]).is_err());
        assert!(ScalingVector::new(vec![-1.0]).is_err());
        assert!(ScalingVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn asymmetric_tensor_is_reported() {
        let mut t = vec![0.0; 27];
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        for (a, b, c) in permutations(0, 1, 2) {
            t[idx(a, b, c)] = 1.0;
        }
        t[idx(1, 0, 2)] = 2.0;
        let dec = IsotropyDecomposition::new(vec![1, 1, 1], vec![1.0; 3], None, t).unwrap();
        let report = dec.validate();
        assert!(report.has_symmetry_violation());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Asymmetric { first, second, .. }
                if (*first == [0, 1, 2] && *second == [1, 0, 2]) || (*first == [1, 0, 2] && *second == [0, 1, 2])
        )));
    }

    #[test]
    fn negative_entries_are_reported() {
        let dec = IsotropyDecomposition::from_representatives(vec![2], vec![-1.0], None, &[(0, 0, 0, -0.5)])
            .unwrap();
        let report = dec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeTriple { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeKilling { summand: 0, .. })));
    }

    #[test]
    fn wang_ziller_residual_tracks_casimir_perturbation() {
        // p = su(2), k = 0: c = 0 and Σ[1jk] = [111] = d b = 3
        let dec = IsotropyDecomposition::from_representatives(
            vec![3],
            vec![1.0],
            Some(vec![0.0]),
            &[(0, 0, 0, 3.0)],
        )
        .unwrap();
        let clean = dec.validate();
        assert!(clean.is_clean(), "{clean:?}");
        assert!(clean.wang_ziller_residuals.as_ref().unwrap()[0].abs() < 1e-12);

        let eta = 0.013;
        let perturbed = IsotropyDecomposition::from_representatives(
            vec![3],
            vec![1.0],
            Some(vec![eta]),
            &[(0, 0, 0, 3.0)],
        )
        .unwrap();
        let report = perturbed.validate();
        let r = report.wang_ziller_residuals.as_ref().unwrap()[0];
        assert!((r - 2.0 * 3.0 * eta).abs() < 1e-12);
        assert!(!report.is_clean());
    }

    #[test]
    fn json_document_fills_permutations() {
        let text = r#"{
            "normalization": "b = -B",
            "summands": [{"dim": 1, "b": 1.0, "c": null}, {"dim": 2, "b": 1.0}],
            "triples": [{"i": 0, "j": 1, "k": 1, "value": 0.5}]
        }"#;
        let dec = IsotropyDecomposition::from_json_str(text).unwrap();
        assert_eq!(dec.triple(1, 0, 1), 0.5);
        assert_eq!(dec.triple(1, 1, 0), 0.5);
        assert_eq!(dec.normalization(), Some("b = -B"));
        assert!(dec.casimir().is_none());
        assert!(dec.validate().is_clean());
    }

    #[test]
    fn json_conflicting_listings_are_asymmetric() {
        let text = r#"{
            "summands": [{"dim": 1, "b": 1.0}, {"dim": 1, "b": 1.0}, {"dim": 1, "b": 1.0}],
            "triples": [{"i": 0, "j": 1, "k": 2, "value": 1.0}, {"i": 1, "j": 0, "k": 2, "value": 2.0}]
        }"#;
        let dec = IsotropyDecomposition::from_json_str(text).unwrap();
        assert!(dec.validate().has_symmetry_violation());
    }

    #[test]
    fn json_index_out_of_range() {
        let text = r#"{"summands": [{"dim": 1, "b": 1.0}], "triples": [{"i": 0, "j": 0, "k": 3, "value": 1.0}]}"#;
        assert!(IsotropyDecomposition::from_json_str(text).is_err());
    }
}
