use proptest::prelude::*;
use seqmeas::gates::PermutationAction;
use seqmeas::linalg::{self, Matrix};
use seqmeas::random::*;
use seqmeas::testers::choi::{choi_vector, hs_inner};
use seqmeas::testers::entanglement::cuts;
use seqmeas::testers::functions::distance;
use seqmeas::testers::*;
use seqmeas::*;

fn all_tables(domain: usize, codomain: usize) -> Vec<FunctionTable> {
    let count = codomain.pow(domain as u32);
    (0..count)
        .map(|mut code| {
            let values = (0..domain)
                .map(|_| {
                    let v = code % codomain;
                    code /= codomain;
                    v
                })
                .collect();
            FunctionTable::new(values, codomain).unwrap()
        })
        .collect()
}

#[test]
fn function_overlap_counts_agreements_exhaustively() {
    for domain in 1..=6 {
        for codomain in 1..=3 {
            let tables = all_tables(domain, codomain);
            let states: Vec<_> = tables.iter().map(function_state).collect();
            for (f, sf) in tables.iter().zip(&states) {
                for (g, sg) in tables.iter().zip(&states) {
                    let ip = sf.inner(sg).unwrap();
                    assert!((ip.re - (1.0 - distance(f, g).unwrap())).abs() < 1e-12);
                    assert!(ip.im.abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn copy_rules_are_least_integers() {
    assert_eq!(eigen_copies(2, 0.5).unwrap(), 15);
    assert_eq!(membership_copies(2, 0.5).unwrap(), 15);
    for (n, eps) in [(1, 0.1), (3, 0.5), (10, 0.9)] {
        let k = eigen_copies(n, eps).unwrap();
        let f = |k: usize| 4.0 * n as f64 * (1.0 - eps / 2.0).powi(k as i32);
        assert!(f(k) <= CASE2_TARGET && (k == 1 || f(k - 1) > CASE2_TARGET));
    }
    let k = genuine_copies(3, 0.5).unwrap();
    assert_eq!(k % 2, 0);
    assert!(12.0 * (1.0 - 0.125f64).powi(k as i32 / 2) <= CASE2_TARGET);
    assert!(12.0 * (1.0 - 0.125f64).powi(k as i32 / 2 - 1) > CASE2_TARGET);
    assert!(eigen_copies(2, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_unitary_overlap_is_one_minus_distance(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let domain = 2 + (seed % 4) as usize;
        let codomain = 2 + (seed / 7 % 2) as usize;
        let f = FunctionTable::new((0..domain).map(|_| rand::Rng::random_range(&mut rng, 0..codomain)).collect(), codomain).unwrap();
        let g = FunctionTable::new((0..domain).map(|_| rand::Rng::random_range(&mut rng, 0..codomain)).collect(), codomain).unwrap();
        let mut images: Vec<usize> = (0..domain).collect();
        rand::seq::SliceRandom::shuffle(images.as_mut_slice(), &mut rng);
        let sigma = PermutationAction::new(images).unwrap();
        let t = GIsoTester::with_copies(f.clone(), g.clone(), vec![sigma.clone()], 1).unwrap();
        let z = t.overlap(0).unwrap();
        prop_assert!((z.re - (1.0 - distance(&f.compose(&sigma).unwrap(), &g).unwrap())).abs() < 1e-10);
        prop_assert!(z.im.abs() < 1e-10);
    }

    #[test]
    fn circuit_acceptance_matches_closed_form(seed in any::<u64>(), k in 1usize..=6) {
        let mut rng = trial_rng(seed, 1);
        let shape = RegisterShape::qubits(1).unwrap();
        let psi = random_state(&shape, &mut rng);
        let u = random_unitary(2, &mut rng);
        let set = UnitarySet::new(vec![u.clone()]).unwrap();
        let t = EigenTester::from_set(&set, psi.clone(), k).unwrap();
        let closed = analytic_eigen_accept(&u, &psi, k).unwrap();
        prop_assert!((t.circuit_accept_probability(0).unwrap() - closed).abs() < 1e-9);
        prop_assert!((t.family().unwrap().accept_probability(0) - closed).abs() < 1e-9);
    }

    #[test]
    fn choi_identities(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = trial_rng(seed, 2);
        let u = random_unitary(d, &mut rng);
        let v = random_unitary(d, &mut rng);
        let a = gaussian_matrix(d, d, &mut rng);
        let b = gaussian_matrix(d, d, &mut rng);
        let overlap = choi_state(&u).unwrap().inner(&choi_state(&v).unwrap()).unwrap();
        prop_assert!((overlap - hs_inner(&u, &v).unwrap()).norm() < 1e-10);
        let lhs = linalg::kron(&a, &b) * choi_vector(&v);
        let rhs = choi_vector(&(&a * &v * b.transpose()));
        prop_assert!((lhs - rhs).norm() < 1e-10);
        let dd = dist_d(&u, &v).unwrap();
        let td = trace_distance_pure(&choi_state(&u).unwrap(), &choi_state(&v).unwrap()).unwrap();
        prop_assert!((dd - td).abs() < 1e-10);
    }

    #[test]
    fn cut_test_tracks_purity(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 3);
        let shape = RegisterShape::new(vec![2, 2, 3]).unwrap();
        let psi = random_state(&shape, &mut rng);
        for c in cuts(3).unwrap() {
            let p = cut_product_accept(&psi, &c).unwrap();
            prop_assert!((p - (1.0 + subsystem_purity(&psi, &c).unwrap()) / 2.0).abs() < 1e-10);
        }
        let a = random_state(&RegisterShape::qubits(1).unwrap(), &mut rng);
        let b = random_state(&RegisterShape::new(vec![2, 3]).unwrap(), &mut rng);
        prop_assert!((cut_product_accept(&a.tensor(&b), &[0]).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unitary_set_rejects_dimension_mismatch() {
    let err = UnitarySet::new(vec![linalg::identity(2), linalg::identity(3)]);
    assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    assert!(matches!(
        UnitarySet::new(vec![Matrix::zeros(2, 2)]),
        Err(Error::NotUnitary(_))
    ));
}
