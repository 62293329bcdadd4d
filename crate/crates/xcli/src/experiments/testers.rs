use seqmeas::gates::{pauli_x, pauli_z, PermutationAction};
use seqmeas::linalg::{self, c, identity, real, Matrix};
use seqmeas::random::{gaussian_matrix, random_unitary, trial_rng};
use seqmeas::testers::choi::{choi_vector, hs_inner, unitary_set_tester};
use seqmeas::testers::entanglement::cuts;
use seqmeas::testers::functions::distance;
use seqmeas::testers::{
    choi_state, cut_product_accept, dist_d, FunctionTable, GIsoTester, GenuineEntanglementTester, MembershipTester,
    UnitaryIsoTester, UnitarySet, CASE1_TARGET, CASE2_TARGET,
};
use seqmeas::{subsystem_purity, trace_distance_pure, PureState, RegisterShape};

use super::{qubit, Outcome2, TOL};
use crate::Context;

fn exhaustive_tables(domain: usize, codomain: usize) -> Vec<FunctionTable> {
    (0..codomain.pow(domain as u32))
        .map(|mut code| {
            let values = (0..domain)
                .map(|_| {
                    let v = code % codomain;
                    code /= codomain;
                    v
                })
                .collect();
            FunctionTable::new(values, codomain).expect("in range")
        })
        .collect()
}

fn permutations(n: usize) -> Vec<PermutationAction> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<PermutationAction>) {
        if prefix.len() == n {
            out.push(PermutationAction::new(prefix.clone()).expect("bijection"));
            return;
        }
        for x in 0..n {
            if !prefix.contains(&x) {
                prefix.push(x);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

fn giso_case(cx: &mut Context, label: &str, t: &GIsoTester, epsilon: f64) -> Outcome2 {
    let p = t.accept_probability()?;
    let d = t.min_distance()?;
    let mut worst: f64 = 0.0;
    for i in 0..t.group().len() {
        let z = t.overlap(i)?;
        worst = worst.max((z - real(1.0 - t.distance(i)?)).norm());
    }
    let r = &mut cx.record;
    r.push_value(&format!("{label}_copies"), t.copies() as f64);
    r.push_value(&format!("{label}_queries_f"), t.queries().0 as f64);
    r.push_value(&format!("{label}_queries_g"), t.queries().1 as f64);
    r.push_value(&format!("{label}_min_distance"), d);
    r.push_value(&format!("{label}_accept"), p);
    r.check_le(&format!("{label}_overlap_identity"), worst, 0.0, 1e-10);
    if d == 0.0 {
        r.check_ge(&format!("{label}_case1"), p, CASE1_TARGET, TOL);
    } else if d + 1e-12 >= epsilon {
        r.check_le(&format!("{label}_case2"), p, CASE2_TARGET, TOL);
    }
    cx.sample(label, p, |rng| {
        let res = t.run(rng)?;
        Ok((res.accepted, res.rounds_used))
    })
}

pub(crate) fn giso(cx: &mut Context) -> Outcome2 {
    let epsilon = cx.params.f64_in("epsilon", 0.5, 0.0, 1.0)?;
    let cfg = cx.config;
    match (&cfg.fn_f, &cfg.fn_g, &cfg.group) {
        (Some(f), Some(g), group) => {
            let group = match group {
                Some(gr) => gr.clone(),
                None => vec![PermutationAction::identity(f.domain_size())],
            };
            let t = GIsoTester::new(f.clone(), g.clone(), group, epsilon)?;
            giso_case(cx, "input", &t, epsilon)?;
        }
        (None, None, None) => {
            let f = FunctionTable::new(vec![0, 1, 1, 0], 2)?;
            let sigma = PermutationAction::new(vec![2, 3, 0, 1])?;
            let group = vec![PermutationAction::identity(4), sigma.clone()];
            let iso = GIsoTester::new(f.clone(), f.compose(&sigma)?, group.clone(), epsilon)?;
            let far = GIsoTester::new(f, FunctionTable::new(vec![0, 0, 0, 0], 2)?, group, epsilon)?;
            giso_case(cx, "isomorphic", &iso, epsilon)?;
            giso_case(cx, "far", &far, epsilon)?;
        }
        _ => {
            return Err(crate::ExperimentError::InvalidParameter {
                name: "fn-f/fn-g".into(),
                reason: "supply both function tables (and optionally a group) or none".into(),
            })
        }
    }
    // Overlap identity over every (f, g, σ) with |X| = 4, |Y| = 2.
    let tables = exhaustive_tables(4, 2);
    let perms = permutations(4);
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for f in &tables {
        for g in &tables {
            let t = GIsoTester::with_copies(f.clone(), g.clone(), perms.clone(), 1)?;
            for (i, sigma) in perms.iter().enumerate() {
                let z = t.overlap(i)?;
                let expected = 1.0 - distance(&f.compose(sigma)?, g)?;
                worst = worst.max((z - real(expected)).norm());
                count += 1;
            }
        }
    }
    cx.record.push_value("sweep_cases", count as f64);
    cx.record.push_value("sweep_max_error", worst);
    cx.record.check_le("sweep_overlap_identity", worst, 0.0, 1e-10);
    Ok(())
}

pub(crate) fn membership(cx: &mut Context) -> Outcome2 {
    let epsilon = cx.params.f64_in("epsilon", 0.5, 0.0, 0.999)?;
    // Candidates at angle ±θ from |0⟩ with sin θ = ε, so |0⟩ sits at distance exactly ε from both.
    let theta = epsilon.asin();
    let q = RegisterShape::qubits(1)?;
    let cand = |s: f64| {
        PureState::new(
            q.clone(),
            seqmeas::linalg::Vector::from_vec(vec![real(theta.cos()), real(s * theta.sin())]),
        )
    };
    let candidates = vec![cand(1.0)?, cand(-1.0)?];
    let member = MembershipTester::new(candidates.clone(), candidates[0].clone(), epsilon)?;
    let far = MembershipTester::new(candidates, qubit(0), epsilon)?;
    let k = far.copies();
    let closed = (1.0 - epsilon * epsilon).powi(k as i32);
    let p1 = member.accept_probability()?;
    let p2 = far.accept_probability()?;
    let basis = MembershipTester::new(vec![qubit(0), qubit(1)], qubit(0), epsilon)?;
    let p3 = basis.accept_probability()?;
    let r = &mut cx.record;
    r.push_value("copies", k as f64);
    r.push_value("far_min_distance", far.min_distance()?);
    r.push_value("far_measurement_accept_closed_form", closed);
    for i in 0..2 {
        r.push_value(&format!("far_measurement_{i}_accept"), far.measurement_accept(i));
        r.check_close(
            &format!("far_measurement_{i}"),
            far.measurement_accept(i),
            closed,
            1e-10,
        );
    }
    r.push_value("member_accept", p1);
    r.push_value("far_accept", p2);
    r.push_value("basis_member_accept", p3);
    r.check_ge("member_case1", p1, CASE1_TARGET, TOL);
    r.check_ge("far_min_distance", far.min_distance()?, epsilon, 1e-12);
    r.check_le("far_case2", p2, CASE2_TARGET, TOL);
    r.check_ge("basis_member_case1", p3, CASE1_TARGET, TOL);
    cx.sample("member", p1, |rng| member.run(rng).map(|r| (r.accepted, r.rounds_used)))?;
    cx.sample("far", p2, |rng| far.run(rng).map(|r| (r.accepted, r.rounds_used)))
}

fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0)])
}

pub(crate) fn uiso(cx: &mut Context) -> Outcome2 {
    let epsilon = cx.params.f64_in("epsilon", 0.5, 0.0, 1.0)?;
    let choi_instances = cx.params.usize_in("choi_instances", 100, 0, 100_000)?;
    let seed = cx.next_seed();
    let (mut overlap_err, mut sandwich_err, mut dist_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in 0..choi_instances as u64 {
        let mut rng = trial_rng(seed, t);
        let d = 2 + (t % 3) as usize;
        let u = random_unitary(d, &mut rng);
        let v = random_unitary(d, &mut rng);
        let a = gaussian_matrix(d, d, &mut rng);
        let b = gaussian_matrix(d, d, &mut rng);
        let ov = choi_state(&u)?.inner(&choi_state(&v)?)?;
        overlap_err = overlap_err.max((ov - hs_inner(&u, &v)?).norm());
        let lhs = linalg::kron(&a, &b) * choi_vector(&v);
        sandwich_err = sandwich_err.max((lhs - choi_vector(&(&a * &v * b.transpose()))).norm());
        let td = trace_distance_pure(&choi_state(&u)?, &choi_state(&v)?)?;
        dist_err = dist_err.max((dist_d(&u, &v)? - td).abs());
    }
    let set = UnitarySet::new(vec![identity(2), pauli_x()])?;
    let z = pauli_z();
    let iso = UnitaryIsoTester::new(set.clone(), z.clone(), -&z, epsilon)?;
    let far = UnitaryIsoTester::new(set, z.clone(), pauli_y(), epsilon)?;
    let p1 = iso.accept_probability()?;
    let p2 = far.accept_probability()?;
    let mut identity_err: f64 = 0.0;
    for t in [&iso, &far] {
        for i in 0..2 {
            identity_err = identity_err.max((t.overlap(i)? - real(t.predicted_overlap(i)?)).norm());
        }
    }
    let set_far = unitary_set_tester(&UnitarySet::new(vec![identity(2)])?, &z, epsilon)?;
    let p3 = set_far.accept_probability()?;
    let r = &mut cx.record;
    r.push_value("choi_instances", choi_instances as f64);
    r.push_value("choi_overlap_max_error", overlap_err);
    r.push_value("choi_sandwich_max_error", sandwich_err);
    r.push_value("choi_distance_max_error", dist_err);
    r.check_le("choi_overlap_identity", overlap_err, 0.0, 1e-10);
    r.check_le("choi_sandwich_identity", sandwich_err, 0.0, 1e-10);
    r.check_le("choi_distance_identity", dist_err, 0.0, 1e-10);
    r.push_value("copies", iso.copies() as f64);
    r.push_value("conjugation_overlap_max_error", identity_err);
    r.check_le("conjugation_overlap_identity", identity_err, 0.0, 1e-10);
    r.push_value("iso_min_distance", iso.min_distance()?);
    r.push_value("iso_accept", p1);
    r.push_value("far_min_distance", far.min_distance()?);
    r.push_value("far_accept", p2);
    r.check_ge("iso_case1", p1, CASE1_TARGET, TOL);
    r.check_ge("far_min_distance", far.min_distance()?, epsilon, 1e-12);
    r.check_le("far_case2", p2, CASE2_TARGET, TOL);
    r.push_value("set_far_copies", set_far.copies() as f64);
    r.push_value("set_far_accept", p3);
    r.check_le("set_far_case2", p3, CASE2_TARGET, TOL);
    cx.sample("iso", p1, |rng| iso.run(rng).map(|r| (r.accepted, r.rounds_used)))?;
    cx.sample("far", p2, |rng| far.run(rng).map(|r| (r.accepted, r.rounds_used)))
}

pub(crate) fn genuine_ent(cx: &mut Context) -> Outcome2 {
    let epsilon = cx.params.f64_in("epsilon", 0.5, 0.0, 1.0)?;
    let bell = PureState::bell().reshaped(RegisterShape::qubits(2)?)?;
    let product = qubit(0).tensor(&bell);
    let ghz = PureState::ghz(3)?;
    let mut cut_err: f64 = 0.0;
    for psi in [&product, &ghz] {
        for c in cuts(3)? {
            let p = cut_product_accept(psi, &c)?;
            cut_err = cut_err.max((p - (1.0 + subsystem_purity(psi, &c)?) / 2.0).abs());
        }
    }
    let t1 = GenuineEntanglementTester::new(product, epsilon)?;
    let t2 = GenuineEntanglementTester::new(ghz, epsilon)?;
    let p1 = t1.accept_probability()?;
    let p2 = t2.accept_probability()?;
    let r = &mut cx.record;
    r.push_value("cut_test_max_error", cut_err);
    r.check_le("cut_test_purity", cut_err, 0.0, 1e-10);
    r.push_value("copies", t2.copies() as f64);
    for i in 0..t2.cuts().len() {
        r.push_value(&format!("ghz_cut_{i}_accept"), t2.cut_accept(i)?);
    }
    r.push_value("product_accept", p1);
    r.push_value("ghz_accept", p2);
    r.check_ge("product_case1", p1, CASE1_TARGET, TOL);
    r.check_le("ghz_case2", p2, CASE2_TARGET, TOL);
    cx.sample("product", p1, |rng| t1.run(rng).map(|r| (r.accepted, r.rounds_used)))?;
    cx.sample("ghz", p2, |rng| t2.run(rng).map(|r| (r.accepted, r.rounds_used)))
}
