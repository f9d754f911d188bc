mod common;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use srm_core::pure_spectrum::*;
use srm_core::spectral_models::{CrossBispectrum, CrossSpectrum, FrequencyGrid, OffsetRule, PairIndex, Tensor3};
use srm_core::{Error, C64};

const N: usize = 12;

fn weights() -> [InteractionWeight; 2] {
    [InteractionWeight::DeltaOmega, InteractionWeight::DeltaOmegaSquared]
}

fn mag_table(values: &[f64]) -> impl Fn(usize, usize) -> f64 + '_ {
    move |i, j| values[i * N + j]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn univariate_matches_brute_force_recursion(
        spec in prop::collection::vec(0.5f64..2.0, N),
        mags in prop::collection::vec(0.0f64..0.6, N * N),
        dw in 0.05f64..1.0,
    ) {
        let b = mag_table(&mags);
        let (s, bs) = common::univariate(N, dw, |k| spec[k], |i, j| C64::from_polar(b(i, j), if i == j { 0.0 } else { (i + 2 * j) as f64 }));
        for weight in weights() {
            let oracle = common::scalar_recursion_oracle(&spec, &b, weight.factor(dw));
            match (compute_pure_univariate_with(&s, &bs, weight), oracle) {
                (Ok(p), Ok(expect)) => {
                    for (k, want) in expect.iter().enumerate() {
                        prop_assert!((p.pure.at(0, k)[(0, 0)].re - want).abs() < 1e-12);
                    }
                }
                (Err(Error::InfeasibleBispectrum { at, .. }), Err(bin)) => prop_assert_eq!(at.bin, bin),
                (got, expect) => prop_assert!(false, "mismatch: {:?} vs {:?}", got.map(|_| ()), expect.map(|_| ())),
            }
        }
    }

    #[test]
    fn multivariate_path_reduces_to_univariate(
        spec in prop::collection::vec(0.5f64..2.0, N),
        mags in prop::collection::vec(0.0f64..0.3, N * N),
        dw in 0.05f64..0.5,
    ) {
        let b = mag_table(&mags);
        let (s, bs) = common::univariate(N, dw, |k| spec[k], |i, j| C64::from_polar(b(i, j), if i == j { 0.0 } else { 0.3 * i as f64 - j as f64 }));
        for weight in weights() {
            let (Ok(u), Ok(m)) = (compute_pure_univariate_with(&s, &bs, weight), compute_pure_multivariate_with(&s, &bs, weight)) else {
                continue;
            };
            for k in 0..N {
                prop_assert!((u.pure.at(0, k) - m.pure.at(0, k)).norm() < 1e-12);
                prop_assert!((u.factor.magnitude(0, k, 0, 0) - m.factor.magnitude(0, k, 0, 0)).abs() < 1e-12);
            }
            prop_assert_eq!(u.interactions.len(), m.interactions.len());
            for (x, y) in u.interactions.iter().zip(&m.interactions) {
                prop_assert_eq!(x.pair, y.pair);
                prop_assert!((x.transfer[0] - y.transfer[0]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn hand_recursion_example() {
    let dw = 0.2;
    let b = 1.5;
    let (s, bs) = common::univariate(4, dw, |_| 1.0, |i, j| C64::new(if (i, j) == (1, 1) { b } else { 0.0 }, 0.0));
    let literal = compute_pure_univariate_with(&s, &bs, InteractionWeight::DeltaOmegaSquared).unwrap();
    let expect = [1.0, 1.0, 1.0 - b * b * dw * dw, 1.0];
    for (k, want) in expect.iter().enumerate() {
        assert!((literal.pure.at(0, k)[(0, 0)].re - want).abs() < 1e-15);
    }
    let default = compute_pure_univariate(&s, &bs).unwrap();
    assert!((default.pure.at(0, 2)[(0, 0)].re - (1.0 - b * b * dw)).abs() < 1e-15);
}

#[test]
fn oversized_scalar_bispectrum_is_infeasible_at_first_bin() {
    let dw = 0.5;
    let spec = vec![1.0; N];
    let b = |i: usize, j: usize| if (i, j) == (3, 2) || (i, j) == (4, 4) { 1.6 } else { 0.2 };
    let (s, bs) = common::univariate(N, dw, |k| spec[k], |i, j| C64::new(b(i, j), 0.0));
    let oracle = common::scalar_recursion_oracle(&spec, b, dw).unwrap_err();
    match compute_pure_univariate(&s, &bs) {
        Err(Error::InfeasibleBispectrum { at, deficit }) => {
            assert_eq!(at.bin, oracle);
            assert!(deficit > 0.0);
        }
        other => panic!("expected infeasible error, got {:?}", other.map(|_| ())),
    }
}

/// Two-variate targets that do not depend on the channel, so the inverse factors
/// agree across channels and the summed correction is `B W(w_i) (x) W(w_j) B^H`.
fn channel_constant(dw: f64, spectrum: &[DMatrix<C64>], pairs: &[((usize, usize), Tensor3)]) -> (CrossSpectrum, CrossBispectrum) {
    let grid = FrequencyGrid::new(2, N, dw, OffsetRule::MultivariateDoubleIndex).unwrap();
    let s = CrossSpectrum::from_fn(grid.clone(), |_, k| spectrum[k].clone()).unwrap();
    let mut map = BTreeMap::new();
    for ((i, j), t) in pairs {
        for p in 0..2 {
            for q in 0..2 {
                let key = PairIndex::new(p, *i, q, *j);
                map.insert(key, t.clone());
                map.insert(key.swapped(), t.conj());
            }
        }
    }
    (s, CrossBispectrum::sparse(grid, map).unwrap())
}

fn dense_correction(b: &Tensor3, w_i: &DMatrix<C64>, w_j: &DMatrix<C64>) -> DMatrix<C64> {
    let m = b.dim();
    let mut out = DMatrix::zeros(m, m);
    for a in 0..m {
        for c in 0..m {
            for e in 0..m {
                for f in 0..m {
                    for g in 0..m {
                        for h in 0..m {
                            out[(a, c)] += b.get(a, e, f) * w_i[(e, g)] * w_j[(f, h)] * b.get(c, g, h).conj();
                        }
                    }
                }
            }
        }
    }
    out
}

fn spd(seed: f64) -> DMatrix<C64> {
    let off = C64::from_polar(0.4, seed);
    DMatrix::from_row_slice(2, 2, &[C64::new(1.0 + 0.1 * seed, 0.0), off, off.conj(), C64::new(0.8, 0.0)])
}

#[test]
fn two_variate_correction_matches_dense_contraction() {
    let dw = 0.1;
    let spectrum: Vec<DMatrix<C64>> = (0..N).map(|k| spd(k as f64)).collect();
    let t = Tensor3::from_fn(2, |a, l, n| C64::from_polar(0.3 + 0.1 * (a + 2 * l + n) as f64, 0.7 * (a as f64 - n as f64)));
    let (i, j) = (5, 2);
    let (s, b) = channel_constant(dw, &spectrum, &[((i, j), t.clone())]);
    let p = compute_pure_multivariate(&s, &b).unwrap();
    let w_i = spectrum[i].clone().try_inverse().unwrap();
    let w_j = spectrum[j].clone().try_inverse().unwrap();
    let expect = dense_correction(&t, &w_i, &w_j).scale(dw);
    for c in 0..2 {
        let got = p.interaction.at(c, i + j);
        assert!((got - &expect).norm() < 1e-12 * expect.norm(), "channel {c}: {got} vs {expect}");
        for k in (0..N).filter(|&k| k != i + j) {
            assert_eq!(p.interaction.at(c, k).norm(), 0.0);
        }
    }
}

#[test]
fn two_variate_infeasibility_matches_eigenvalue_oracle() {
    let dw = 0.25;
    let spectrum: Vec<DMatrix<C64>> = (0..N).map(|k| spd(k as f64)).collect();
    let small = Tensor3::from_fn(2, |_, _, _| C64::new(0.05, 0.0));
    let large = Tensor3::from_fn(2, |a, _, _| C64::new(1.2 + 0.2 * a as f64, 0.0));
    let pairs = [((2, 1), small.clone()), ((4, 3), large), ((6, 4), small)];
    let (s, b) = channel_constant(dw, &spectrum, &pairs);

    // Forward recursion on S_p^{-1} directly, without any factorization.
    let mut expected_bin = None;
    let mut pure: Vec<DMatrix<C64>> = spectrum.clone();
    for k in 0..N {
        let mut corr = DMatrix::<C64>::zeros(2, 2);
        for ((i, j), t) in &pairs {
            if i + j == k {
                let w_i = pure[*i].clone().try_inverse().unwrap();
                let w_j = pure[*j].clone().try_inverse().unwrap();
                corr += dense_correction(t, &w_i, &w_j);
            }
        }
        pure[k] = &spectrum[k] - corr.scale(dw);
        let min = nalgebra::SymmetricEigen::new(pure[k].clone()).eigenvalues.min();
        if min < 0.0 {
            expected_bin = Some(k);
            break;
        }
    }
    let expected_bin = expected_bin.expect("construction must be infeasible");
    match compute_pure_multivariate(&s, &b) {
        Err(Error::InfeasibleBispectrum { at, deficit }) => {
            assert_eq!(at.bin, expected_bin);
            assert!(deficit > 0.0);
        }
        other => panic!("expected infeasible error, got {:?}", other.map(|_| ())),
    }
}

fn check_invariants(s: &CrossSpectrum, p: &PureSpectrum) {
    for (c, k, target) in s.iter() {
        let corr = p.interaction.at(c, k);
        assert!((corr - corr.adjoint()).norm() <= 1e-12 * corr.norm().max(f64::MIN_POSITIVE));
        for a in 0..target.nrows() {
            assert!(p.pure.at(c, k)[(a, a)].re <= target[(a, a)].re);
        }
        let rebuilt = p.pure.at(c, k) + corr;
        assert!((rebuilt - target).norm() <= 1e-15 * target.norm().max(f64::MIN_POSITIVE) * 4.0);
    }
}

#[test]
fn wind_pure_spectrum_invariants() {
    let (s, b) = common::wind_targets();
    let p = compute_pure_multivariate_with(&s, &b, InteractionWeight::DeltaOmegaSquared).unwrap();
    check_invariants(&s, &p);
    assert!(matches!(compute_pure_multivariate(&s, &b), Err(Error::InfeasibleBispectrum { .. })));
}

#[test]
fn preset_pure_spectrum_invariants() {
    for m in 1..=3 {
        let pre = common::preset(m);
        let p = compute_pure_multivariate(&pre.s, &pre.b).unwrap();
        check_invariants(&pre.s, &p);
    }
}

#[test]
fn zero_bispectrum_keeps_spectrum() {
    let (s, _) = common::wind_targets();
    let p = compute_pure_multivariate(&s, &CrossBispectrum::zero(s.grid().clone())).unwrap();
    assert_eq!(p.pure, s);
    assert!(p.interactions.is_empty());
}
