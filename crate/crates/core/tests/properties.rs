use baker_fr::fluctuation::{exact_distribution, Start};
use baker_fr::maps::PhasePoint;
use baker_fr::observables::{average_contraction, reversed_initial};
use baker_fr::scalar::{int, ratio};
use baker_fr::transfer::{region_measures_from_density, stationary_measures, transition_matrix};
use baker_fr::{Family, Model, Rational};
use proptest::prelude::*;

fn generalized_l() -> impl Strategy<Value = Rational> {
    (4i64..200).prop_flat_map(|den| (1..=den / 4).prop_map(move |num| ratio(num, den)))
}

fn interior_point() -> impl Strategy<Value = PhasePoint<Rational>> {
    (1i64..997, 1i64..997).prop_map(|(a, b)| PhasePoint::new(ratio(a, 997), ratio(b, 997)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn map_is_a_bijection(l in generalized_l(), p in interior_point()) {
        let m = Model::new(Family::Map2, &l).unwrap();
        let q = m.map().apply(&p).unwrap();
        prop_assert_eq!(m.map().apply_inverse(&q).unwrap(), p);
    }

    #[test]
    fn measures_agree(l in generalized_l()) {
        let chain = stationary_measures(&transition_matrix(&l).unwrap()).unwrap();
        let density = region_measures_from_density(Model::new(Family::Map2, &l).unwrap().map()).unwrap();
        prop_assert_eq!(chain, density);
    }

    #[test]
    fn reversed_segment_negates_g(l in generalized_l(), p in interior_point(), n in 1usize..20) {
        let m = Model::new(Family::Map2, &l).unwrap();
        let g = average_contraction(&m, &p, n).unwrap().g;
        let back = reversed_initial(&m, &p, n).unwrap();
        prop_assert_eq!(average_contraction(&m, &back, n).unwrap().g, -g);
    }

    #[test]
    fn distribution_is_normalized_with_exact_mean(l in generalized_l(), n in 1usize..15) {
        let m = Model::new(Family::Map2, &l).unwrap();
        let d = exact_distribution(&m, n, Start::Stationary).unwrap();
        let total: Rational = d.probabilities().values().cloned().sum();
        prop_assert_eq!(total, int(1));
        // Per-step drift μ_B − μ_C = (1 − 4l)/(1 + 4l).
        let drift = (int(1) - int(4) * &l) / (int(1) + int(4) * &l);
        prop_assert_eq!(d.mean_g(), drift * int(n as i64));
    }
}
