use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::geometry::oracle::{quaternionic_hopf_split, HomogeneousSplit, LieAlgebra, TwoSummandConstants};
use soliton_lab::geometry::{IsotropyDecomposition, ScalingVector};

fn orthonormal_basis(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
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

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// `su(2) ⊕ su(2)` with `p = g` cut into blocks of the given sizes along a
/// random orthonormal frame.
fn rotated_split(sizes: &[usize], rng: &mut ChaCha8Rng) -> HomogeneousSplit {
    let algebra = LieAlgebra::su2().direct_sum(&LieAlgebra::su2());
    let basis = orthonormal_basis(6, rng);
    let mut blocks = Vec::new();
    let mut at = 0;
    for &s in sizes {
        blocks.push(basis[at..at + s].to_vec());
        at += s;
    }
    HomogeneousSplit::group(algebra, blocks).unwrap()
}

#[test]
fn closed_forms_match_brute_force_on_rotated_splits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for sizes in [&[3, 3][..], &[2, 4], &[1, 2, 3], &[1, 1, 1, 3], &[6]] {
        for _ in 0..8 {
            let split = rotated_split(sizes, &mut rng);
            let dec = split.decomposition().unwrap();
            assert!(dec.validate().is_clean(), "{:?}", dec.validate());
            let x: Vec<f64> = sizes.iter().map(|_| rng.gen_range(0.2..5.0)).collect();
            let xs = ScalingVector::new(x.clone()).unwrap();
            let s_closed = dec.scalar_curvature(&xs).unwrap();
            let s_brute = split.scalar_curvature(&x).unwrap();
            assert!(rel(s_closed, s_brute) < 1e-12, "{sizes:?}: {s_closed} vs {s_brute}");
            let r_closed = dec.ricci_eigenvalues(&xs).unwrap();
            let r_brute = split.ricci_eigenvalues(&x).unwrap();
            for (a, b) in r_closed.iter().zip(&r_brute) {
                assert!(rel(*a, *b) < 1e-12, "{sizes:?}: {r_closed:?} vs {r_brute:?}");
            }
        }
    }
}

#[test]
fn round_su2_factors() {
    // b = -B: each factor has [111] = 3 and b = 1, so s = 3/(4x) per factor
    let split = HomogeneousSplit::group(
        LieAlgebra::su2().direct_sum(&LieAlgebra::su2()),
        vec![
            (0..3).map(|i| (0..6).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
            (3..6).map(|i| (0..6).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
        ],
    )
    .unwrap();
    let dec = split.decomposition().unwrap();
    assert!((dec.triple(0, 0, 0) - 3.0).abs() < 1e-13);
    assert!(dec.triple(0, 0, 1).abs() < 1e-13);
    let s = dec.scalar_curvature(&ScalingVector::new(vec![1.0, 2.0]).unwrap()).unwrap();
    assert!((s - 1.125).abs() < 1e-14);
}

#[test]
fn flat_torus_is_exactly_flat() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../decompositions/abelian.json")).unwrap();
    let dec = IsotropyDecomposition::from_json_str(&text).unwrap();
    let x = ScalingVector::new(vec![0.3, 7.0]).unwrap();
    assert_eq!(dec.scalar_curvature(&x).unwrap(), 0.0);
    assert_eq!(dec.ricci_eigenvalues(&x).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn quaternionic_hopf_constants() {
    let split = quaternionic_hopf_split(1).unwrap();
    let dec = split.decomposition().unwrap();
    assert_eq!(dec.dims(), &[3, 4]);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert!(close(dec.killing()[0], 10.0) && close(dec.killing()[1], 12.0));
    let c = dec.casimir().unwrap();
    assert!(close(c[0], 4.0) && close(c[1], 4.5), "{c:?}");
    assert!(close(dec.triple(0, 1, 1), 6.0));
    for (i, j, k) in [(0, 0, 0), (1, 1, 1), (0, 0, 1)] {
        assert!(dec.triple(i, j, k).abs() < 1e-12);
    }
    assert!(dec.validate().is_clean());
    let raw = TwoSummandConstants::from_decomposition(&dec).unwrap();
    assert!(close(raw.a1, 12.0) && close(raw.a2, 24.0) && close(raw.a3, 1.5));
    let n = raw.normalized().unwrap();
    assert!(close(n.a1, 6.0) && close(n.a2, 12.0) && close(n.a3, 0.75));
    for x in [[1.0, 1.0], [0.5, 2.0]] {
        let xs = ScalingVector::new(x.to_vec()).unwrap();
        let s = split.scalar_curvature(&x).unwrap();
        assert!(rel(dec.scalar_curvature(&xs).unwrap(), s) < 1e-12);
    }
}

fn random_decomposition() -> impl Strategy<Value = (IsotropyDecomposition, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|s| {
        (
            proptest::collection::vec(1usize..=6, s),
            proptest::collection::vec(0.0..4.0_f64, s),
            proptest::collection::vec(0.0..3.0_f64, s * s * s),
            proptest::collection::vec(0.05..20.0_f64, s),
        )
            .prop_map(move |(dims, b, raw, x)| {
                let mut t = vec![0.0; s * s * s];
                for i in 0..s {
                    for j in 0..s {
                        for k in 0..s {
                            let mut key = [i, j, k];
                            key.sort();
                            t[(i * s + j) * s + k] = raw[(key[0] * s + key[1]) * s + key[2]];
                        }
                    }
                }
                (IsotropyDecomposition::new(dims, b, None, t).unwrap(), x)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trace_identity((dec, x) in random_decomposition()) {
        let xs = ScalingVector::new(x).unwrap();
        let s = dec.scalar_curvature(&xs).unwrap();
        let r = dec.ricci_eigenvalues(&xs).unwrap();
        let trace: f64 = r.iter().zip(dec.dims()).map(|(r, d)| r * *d as f64).sum();
        let scale: f64 = r.iter().zip(dec.dims()).map(|(r, d)| (r * *d as f64).abs()).sum::<f64>().max(1.0);
        prop_assert!((trace - s).abs() <= 1e-13 * scale, "{} vs {}", trace, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn curvature_scales_inversely((dec, x) in random_decomposition(), lambda in 0.1..10.0_f64) {
        let xs = ScalingVector::new(x).unwrap();
        let scaled = xs.scaled(lambda).unwrap();
        let s = dec.scalar_curvature(&xs).unwrap();
        let s_l = dec.scalar_curvature(&scaled).unwrap();
        prop_assert!((s_l * lambda - s).abs() <= 1e-12 * (1.0 + s.abs() * 10.0));
        let r = dec.ricci_eigenvalues(&xs).unwrap();
        let r_l = dec.ricci_eigenvalues(&scaled).unwrap();
        for (a, b) in r.iter().zip(&r_l) {
            prop_assert!((b * lambda - a).abs() <= 1e-12 * (1.0 + a.abs() * 10.0));
        }
    }
}
