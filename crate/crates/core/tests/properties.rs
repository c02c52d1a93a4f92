use hadamard_jsr::numat::{
    hadamard_power, hadamard_product, mat_product, pointwise_leq, spectral_norm_bracket, spectral_radius_bracket,
    weighted_hadamard_mean,
};
use hadamard_jsr::radius::{brute_force_oracle, gsr_lower, jsr_bracket, set_norm, JsrConfig};
use hadamard_jsr::setalg::{adjoint_set, set_power, set_product};
use hadamard_jsr::{NonNegMatrix, OperatorSet};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = NonNegMatrix> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.0..4.0f64], dim * dim)
        .prop_map(move |d| NonNegMatrix::new(dim, d).unwrap())
}

fn any_matrix() -> impl Strategy<Value = NonNegMatrix> {
    (1usize..=5).prop_flat_map(matrix)
}

fn pair() -> impl Strategy<Value = (NonNegMatrix, NonNegMatrix)> {
    (1usize..=4).prop_flat_map(|n| (matrix(n), matrix(n)))
}

fn set(dim: usize, max: usize) -> impl Strategy<Value = OperatorSet> {
    prop::collection::vec(matrix(dim), 1..=max).prop_map(|ms| OperatorSet::new("S", ms).unwrap())
}

fn small_set() -> impl Strategy<Value = OperatorSet> {
    (1usize..=3).prop_flat_map(|d| set(d, 3))
}

fn dense(a: &NonNegMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.dim(), a.dim(), a.entries())
}

fn close(b_lo: f64, b_hi: f64, x: f64, rel: f64) -> bool {
    let eps = rel * x.abs().max(1.0);
    b_lo - eps <= x && x <= b_hi + eps
}

fn cfg() -> JsrConfig {
    JsrConfig { max_depth: 8, budget_products: 200_000, ..JsrConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn radius_matches_eigenvalue_oracle(a in any_matrix()) {
        let b = spectral_radius_bracket(&a, 1e-12);
        let rho = dense(&a).complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(b.lo <= b.hi);
        prop_assert!(close(b.lo, b.hi, rho, 1e-6), "[{}, {}] vs {}", b.lo, b.hi, rho);
    }

    #[test]
    fn norm_matches_singular_value_oracle(a in any_matrix()) {
        let b = spectral_norm_bracket(&a, 1e-12);
        let s = dense(&a).singular_values().max();
        prop_assert!(close(b.lo, b.hi, s, 1e-9), "[{}, {}] vs {}", b.lo, b.hi, s);
        let r = spectral_radius_bracket(&a, 1e-12);
        prop_assert!(r.lo <= b.hi * (1.0 + 1e-12));
    }

    #[test]
    fn hadamard_mean_below_arithmetic_mean((a, b) in pair(), w in 0.01..0.99f64) {
        let g = weighted_hadamard_mean(&[&a, &b], &[w, 1.0 - w]).unwrap();
        let m = a.scale(w).add(&b.scale(1.0 - w)).unwrap();
        prop_assert!(pointwise_leq(&g, &m, 1e-12 * m.max_entry().max(1.0)).unwrap());
    }

    #[test]
    fn radius_and_norm_are_monotone((a, e) in pair()) {
        let b = a.add(&e).unwrap();
        prop_assert!(pointwise_leq(&a, &b, 0.0).unwrap());
        prop_assert!(spectral_radius_bracket(&a, 1e-12).lo <= spectral_radius_bracket(&b, 1e-12).hi);
        prop_assert!(spectral_norm_bracket(&a, 1e-12).lo <= spectral_norm_bracket(&b, 1e-12).hi);
    }

    #[test]
    fn hadamard_powers_distribute((a, b) in pair(), t in 0.1..3.0f64) {
        let lhs = hadamard_power(&hadamard_product(&a, &b).unwrap(), t).unwrap();
        let rhs = hadamard_product(&hadamard_power(&a, t).unwrap(), &hadamard_power(&b, t).unwrap()).unwrap();
        let scale = lhs.max_entry().max(1.0);
        for (x, y) in lhs.entries().iter().zip(rhs.entries()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn radius_of_products_commutes((a, b) in pair()) {
        let ab = spectral_radius_bracket(&mat_product(&a, &b).unwrap(), 1e-12);
        let ba = spectral_radius_bracket(&mat_product(&b, &a).unwrap(), 1e-12);
        prop_assert!(close(ab.lo, ab.hi, ba.mid(), 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jsr_power_identity(s in small_set()) {
        let b = jsr_bracket(&s, &cfg()).bracket();
        let b2 = jsr_bracket(&set_power(&s, 2).unwrap(), &cfg()).bracket();
        prop_assert!(b.mul(&b).overlaps(&b2), "{:?}^2 vs {:?}", b, b2);
    }

    #[test]
    fn jsr_of_set_products_commutes((p, q) in (1usize..=3).prop_flat_map(|d| (set(d, 2), set(d, 2)))) {
        let pq = jsr_bracket(&set_product(&p, &q).unwrap(), &cfg()).bracket();
        let qp = jsr_bracket(&set_product(&q, &p).unwrap(), &cfg()).bracket();
        prop_assert!(pq.overlaps(&qp), "{:?} vs {:?}", pq, qp);
    }

    #[test]
    fn jsr_is_adjoint_invariant(s in small_set()) {
        let b = jsr_bracket(&s, &cfg()).bracket();
        let bt = jsr_bracket(&adjoint_set(&s), &cfg()).bracket();
        prop_assert!(b.overlaps(&bt), "{:?} vs {:?}", b, bt);
    }

    #[test]
    fn set_norm_is_root_of_gram_radius(s in small_set()) {
        let n = set_norm(&s);
        let g = jsr_bracket(&set_product(&adjoint_set(&s), &s).unwrap(), &cfg()).bracket().sqrt();
        prop_assert!(n.overlaps(&g), "{:?} vs {:?}", n, g);
    }

    #[test]
    fn engine_agrees_with_oracle(s in (1usize..=3).prop_flat_map(|d| set(d, 2))) {
        let b = jsr_bracket(&s, &cfg()).bracket();
        let o = brute_force_oracle(&s, 6).unwrap();
        prop_assert!(b.overlaps(&o), "{:?} vs {:?}", b, o);
        prop_assert!(gsr_lower(&s, 6).value <= b.hi);
    }
}
