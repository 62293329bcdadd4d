//! Experiment bodies. Each one records exact values, checks the guarantees of
//! the corresponding library procedure, and samples where a sampler exists.

mod sequential;
mod testers;

pub(crate) use sequential::disturbance;
pub(crate) use testers::{genuine_ent, giso, membership, uiso};

use std::f64::consts::PI;

use rand::Rng;
use seqmeas::amplification::{
    mw_accept_exact, mw_accept_survival, mw_bounds as sandwich, run_mw_sampled, Demerlinizer, MwInstance, OrTest,
};
use seqmeas::linalg::{real, Vector};
use seqmeas::measurement::{
    anti_zeno_sequence, anti_zeno_state, gentle_measurement_gap, measure_collapse, sequential_reject_path,
    union_bound_bruteforce, Branch, Outcome, TwoOutcomeMeasurement,
};
use seqmeas::random::{random_contraction, random_density, random_projector, random_state, trial_rng};
use seqmeas::{Error, HermitianOperator, PureState, QuantumState, RegisterShape};

use crate::{Context, ExperimentError};

type Outcome2 = Result<(), ExperimentError>;

pub(crate) const TOL: f64 = 1e-9;

/// `√z ψ + √(1−z) χ` with `χ` a random unit vector orthogonal to `ψ`.
pub(crate) fn tilted<R: Rng + ?Sized>(psi: &PureState, z: f64, rng: &mut R) -> PureState {
    let a = psi.amplitudes();
    let mut chi = random_state(psi.shape(), rng).into_amplitudes();
    let along = a.dotc(&chi);
    chi -= a * along;
    chi /= real(chi.norm());
    let v: Vector = a * real(z.sqrt()) + chi * real((1.0 - z).sqrt());
    PureState::normalized(psi.shape().clone(), v).expect("nonzero")
}

pub(crate) fn qubit(b: usize) -> PureState {
    PureState::basis(RegisterShape::qubits(1).expect("valid"), b).expect("valid")
}

pub(crate) fn antizeno(cx: &mut Context) -> Outcome2 {
    let n = cx.params.usize_in("n", 64, 1, 1 << 16)?;
    let seq = anti_zeno_sequence(n)?;
    let start = qubit(0);
    let run = sequential_reject_path(&seq, &start)?;
    let half = PI / (2.0 * n as f64);
    let step_expected = half.cos().powi(2);
    let step_error = run
        .step_reject
        .iter()
        .map(|p| (p - step_expected).abs())
        .fold(0.0, f64::max);
    let accept_expected = 1.0 - half.cos().powi(2 * n as i32);
    let fidelity = match &run.all_reject_state {
        Some(s) => qubit(1).inner(s)?.norm_sqr(),
        None => 0.0,
    };
    let r = &mut cx.record;
    r.push_value("step_reject_expected", step_expected);
    r.push_value("step_reject_max_error", step_error);
    r.push_value("accept_ever", run.accept_ever);
    r.push_value("accept_ever_closed_form", accept_expected);
    r.push_value("final_fidelity_one", fidelity);
    r.check_le("step_reject_error", step_error, 0.0, 1e-12);
    r.check_close("accept_ever", run.accept_ever, accept_expected, 1e-10);
    r.check_ge("final_fidelity_one", fidelity, 1.0, 1e-10);
    let cap = PI * PI / 4.0 * 1.1;
    for m in [16usize, 64, 256] {
        let scaled = m as f64 * sequential_reject_path(&anti_zeno_sequence(m)?, &start)?.accept_ever;
        cx.record.push_value(&format!("n_times_accept_ever_{m}"), scaled);
        cx.record
            .check_le(&format!("n_times_accept_ever_{m}"), scaled, cap, 0.0);
    }
    cx.sample("sequence", run.accept_ever, |rng| {
        let mut state = start.clone();
        for (i, m) in seq.iter().enumerate() {
            let c = measure_collapse(m, &state, Branch::Sampled(rng))?;
            if c.outcome == Outcome::Accept {
                return Ok((true, i + 1));
            }
            state = c.state;
        }
        Ok((false, seq.len()))
    })
}

struct MwCase {
    exact: f64,
    survival: f64,
    lower: f64,
    upper: f64,
}

pub(crate) fn mw_bounds(cx: &mut Context) -> Outcome2 {
    let max_dim = cx.params.usize_in("max_dim", 8, 2, 64)?;
    let max_n = cx.params.usize_in("max_n", 32, 1, 4096)?;
    let sampled = cx.params.usize_in("sampled", 20, 0, 10_000)?;
    let samples = cx.params.usize_in("samples", 10_000, 1, 10_000_000)? as u64;
    let instances = cx.config.trials;
    let gen_seed = cx.next_seed();
    let build = move |t: u64| -> Result<(HermitianOperator, QuantumState, usize), Error> {
        let mut rng = trial_rng(gen_seed, t);
        let dim = rng.random_range(2..=max_dim);
        let big_n = rng.random_range(1..=max_n);
        let shape = RegisterShape::single(dim)?;
        let lambda = random_contraction(&shape, &mut rng);
        let rank = rng.random_range(1..=dim);
        let state: QuantumState = if rank == 1 {
            random_state(&shape, &mut rng).into()
        } else {
            random_density(&shape, rank, &mut rng).into()
        };
        Ok((lambda, state, big_n))
    };
    let cases: Vec<MwCase> = cx.map_trials(instances, |t, _| {
        let (lambda, state, big_n) = build(t)?;
        let exact = mw_accept_exact(&lambda, &state, big_n)?;
        let m = TwoOutcomeMeasurement::new(lambda.clone())?;
        let survival = mw_accept_survival(&MwInstance::for_measurement(&m, state.clone(), big_n)?)?;
        let b = sandwich(&lambda, &state, big_n)?;
        Ok(MwCase {
            exact,
            survival,
            lower: b.lower,
            upper: b.upper,
        })
    })?;
    let sandwich_ok = cases
        .iter()
        .filter(|c| c.lower <= c.exact + TOL && c.exact <= c.upper + TOL)
        .count();
    let oracle_ok = cases.iter().filter(|c| (c.exact - c.survival).abs() <= TOL).count();
    let max_gap = cases.iter().map(|c| (c.exact - c.survival).abs()).fold(0.0, f64::max);
    let min_lower_slack = cases.iter().map(|c| c.exact - c.lower).fold(f64::INFINITY, f64::min);
    let min_upper_slack = cases.iter().map(|c| c.upper - c.exact).fold(f64::INFINITY, f64::min);
    let r = &mut cx.record;
    r.push_value("instances", cases.len() as f64);
    r.push_value("sandwich_passes", sandwich_ok as f64);
    r.push_value("oracle_agreements", oracle_ok as f64);
    r.push_value("max_oracle_gap", max_gap);
    if !cases.is_empty() {
        r.push_value("min_lower_slack", min_lower_slack);
        r.push_value("min_upper_slack", min_upper_slack);
    }
    r.check_all("sandwich", sandwich_ok, cases.len());
    r.check_all("oracle_agreement", oracle_ok, cases.len());

    for t in 0..(sampled as u64).min(instances) {
        let (lambda, state, big_n) = build(t)?;
        let m = TwoOutcomeMeasurement::new(lambda)?;
        let inst = MwInstance::for_measurement(&m, state, big_n)?;
        cx.sample_n(&format!("instance_{t}"), samples, cases[t as usize].exact, |rng| {
            let res = run_mw_sampled(&inst, rng)?;
            Ok((res.accepted, res.rounds_used))
        })?;
    }
    Ok(())
}

pub(crate) fn or_test(cx: &mut Context) -> Outcome2 {
    let n = cx.params.usize_in("n", 8, 1, 64)?;
    let delta = cx.params.f64_in("delta", 1.0 / 1024.0, 0.0, 1.0)?;
    let dim = cx.params.usize_in("dim", 4, 2, 32)?;
    let epsilon = cx.params.f64("epsilon", 0.0)?;

    let case1 = OrTest::new(&anti_zeno_sequence(n)?, epsilon)?;
    let zero = qubit(0);
    let p1 = case1.accept_probability(&zero.clone().into())?;

    let mut rng = trial_rng(cx.next_seed(), 0);
    let shape = RegisterShape::single(dim)?;
    let psi = PureState::basis(shape, 0)?;
    let ms: Vec<TwoOutcomeMeasurement> = (0..n)
        .map(|_| TwoOutcomeMeasurement::projective(tilted(&psi, delta, &mut rng).projector()))
        .collect::<Result<_, _>>()?;
    let case2 = OrTest::new(&ms, epsilon)?;
    let p2 = case2.accept_probability(&psi.clone().into())?;
    let mut worst: f64 = 0.0;
    for m in &ms {
        worst = worst.max(m.lambda().expectation(&psi)?);
    }

    let r = &mut cx.record;
    r.push_value("repetitions", case1.repetitions() as f64);
    r.push_value("case1_accept", p1);
    r.push_value("case1_bound", case1.case1_bound());
    r.push_value("case2_max_single_accept", worst);
    r.push_value("case2_accept", p2);
    r.push_value("case2_bound", case2.case2_bound(delta));
    r.check_ge("case1_accept", p1, case1.case1_bound(), TOL);
    r.check_le("case2_max_single_accept", worst, delta, TOL);
    r.check_le("case2_accept", p2, case2.case2_bound(delta), TOL);
    cx.sample("case1", p1, |rng| {
        let res = case1.run(zero.clone(), rng)?;
        Ok((res.accepted, res.rounds_used))
    })?;
    cx.sample("case2", p2, |rng| {
        let res = case2.run(psi.clone(), rng)?;
        Ok((res.accepted, res.rounds_used))
    })
}

pub(crate) fn union_bound(cx: &mut Context) -> Outcome2 {
    let max_t = cx.params.usize_in("max_t", 6, 1, 12)?;
    let max_dim = cx.params.usize_in("max_dim", 8, 2, 32)?;
    let max_eps = cx.params.f64_in("max_epsilon", 0.05, 0.0, 1.0)?;
    let instances = cx.config.trials;
    // Half the suite is generic; the other half keeps every acceptance below max_epsilon.
    let checks = cx.map_trials(instances, |_, rng| {
        let t = rng.random_range(1..=max_t);
        let dim = rng.random_range(2..=max_dim);
        let shape = RegisterShape::single(dim)?;
        let low = rng.random::<bool>();
        let (rho, ms) = if low {
            let psi = random_state(&shape, rng);
            let ms = (0..t)
                .map(|_| {
                    let z = max_eps * rng.random::<f64>();
                    TwoOutcomeMeasurement::projective(tilted(&psi, z, rng).projector())
                })
                .collect::<Result<Vec<_>, _>>()?;
            (psi.density(), ms)
        } else {
            let rank = rng.random_range(1..=dim);
            let rho = random_density(&shape, rank, rng);
            let ms = (0..t)
                .map(|_| {
                    let r = rng.random_range(1..dim);
                    TwoOutcomeMeasurement::projective(random_projector(&shape, r, rng))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (rho, ms)
        };
        let c = union_bound_bruteforce(&ms, &rho, None)?;
        Ok((c.p_any_one, c.bound))
    })?;
    let passes = checks.iter().filter(|(p, b)| *p <= b + 1e-10).count();
    let min_slack = checks.iter().map(|(p, b)| b - p).fold(f64::INFINITY, f64::min);
    let az = union_bound_bruteforce(&anti_zeno_sequence(8)?, &anti_zeno_state(8, 0).density(), None)?;
    let r = &mut cx.record;
    r.push_value("instances", checks.len() as f64);
    r.push_value("passes", passes as f64);
    if !checks.is_empty() {
        r.push_value("min_slack", min_slack);
    }
    r.push_value("antizeno8_p_any_one", az.p_any_one);
    r.push_value("antizeno8_bound", az.bound);
    r.check_all("union_bound", passes, checks.len());
    r.check_le("antizeno8", az.p_any_one, az.bound, 1e-10);
    Ok(())
}

pub(crate) fn gentle(cx: &mut Context) -> Outcome2 {
    let min_dim = cx.params.usize_in("min_dim", 2, 2, 64)?;
    let max_dim = cx.params.usize_in("max_dim", 8, min_dim, 64)?;
    let instances = cx.config.trials;
    let gaps = cx.map_trials(instances, |_, rng| {
        let dim = rng.random_range(min_dim..=max_dim);
        let shape = RegisterShape::single(dim)?;
        let rank = rng.random_range(1..=dim);
        let rho = random_density(&shape, rank, rng);
        let lambda = random_contraction(&shape, rng);
        gentle_measurement_gap(&rho, &lambda)
    })?;
    let passes = gaps.iter().filter(|(l, r)| *l <= r + 1e-10).count();
    let min_slack = gaps.iter().map(|(l, r)| r - l).fold(f64::INFINITY, f64::min);
    let (lhs, rhs) = gentle_measurement_gap(&PureState::plus().density(), &qubit(0).projector())?;
    let r = &mut cx.record;
    r.push_value("instances", gaps.len() as f64);
    r.push_value("passes", passes as f64);
    if !gaps.is_empty() {
        r.push_value("min_slack", min_slack);
    }
    r.push_value("equality_lhs", lhs);
    r.push_value("equality_rhs", rhs);
    r.check_all("gentle", passes, gaps.len());
    r.check_close("equality_lhs", lhs, std::f64::consts::FRAC_1_SQRT_2, 1e-10);
    r.check_close("equality_rhs", rhs, std::f64::consts::FRAC_1_SQRT_2, 1e-10);
    Ok(())
}

/// `(1−t)Γ₀ + t|ψσ⟩⟨ψσ|` with the least `t` (to 1e-12) whose best witness reaches `eta`.
fn planted_gamma(
    gamma0: &HermitianOperator,
    target: &PureState,
    psi: &PureState,
    eta: f64,
) -> Result<HermitianOperator, Error> {
    let planted = target.projector();
    let mix = |t: f64| {
        HermitianOperator::new(
            gamma0.shape().clone(),
            gamma0.matrix().scale(1.0 - t) + planted.matrix().scale(t),
        )
    };
    let best = |t: f64| -> Result<f64, Error> { seqmeas::amplification::best_witness_acceptance(&mix(t)?, psi) };
    if best(0.0)? >= eta {
        return mix(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if best(mid)? >= eta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    mix(hi)
}

pub(crate) fn demerlinize(cx: &mut Context) -> Outcome2 {
    let eta = cx.params.f64_in("eta", 2.0 / 3.0, 0.0, 1.0)?;
    let zeta = cx.params.f64_in("zeta", 0.01, 0.0, 1.0)?;
    let dim_a = cx.params.usize_in("dim_a", 4, 2, 16)?;
    let d = cx.params.usize_in("d", 2, 2, 8)?;
    let mut rng = trial_rng(cx.next_seed(), 0);
    let a = RegisterShape::single(dim_a)?;
    let b = RegisterShape::single(d)?;
    let ab = a.tensor(&b);
    let psi = random_state(&a, &mut rng);
    let sigma = random_state(&b, &mut rng);
    let gamma1 = planted_gamma(&random_contraction(&ab, &mut rng), &psi.tensor(&sigma), &psi, eta)?;
    let raw = random_contraction(&ab, &mut rng);
    let top = seqmeas::amplification::best_witness_acceptance(&raw, &psi)?;
    let gamma2 = raw.scale(zeta / top);

    let t1 = Demerlinizer::new(&gamma1, eta)?;
    let t2 = Demerlinizer::new(&gamma2, eta)?;
    let best1 = seqmeas::amplification::best_witness_acceptance(&gamma1, &psi)?;
    let best2 = seqmeas::amplification::best_witness_acceptance(&gamma2, &psi)?;
    let p1 = t1.accept_probability(&psi)?;
    let p2 = t2.accept_probability(&psi)?;
    let r = &mut cx.record;
    r.push_value("repetitions", t1.repetitions() as f64);
    r.push_value("case1_best_witness", best1);
    r.push_value("case1_accept", p1);
    r.push_value("case1_bound", t1.case1_bound());
    r.push_value("case2_best_witness", best2);
    r.push_value("case2_accept", p2);
    r.push_value("case2_bound", t2.case2_bound(zeta));
    r.check_ge("case1_best_witness", best1, eta, TOL);
    r.check_ge("case1_accept", p1, t1.case1_bound(), TOL);
    r.check_le("case2_best_witness", best2, zeta, TOL);
    r.check_le("case2_accept", p2, t2.case2_bound(zeta), TOL);
    cx.sample("case1", p1, |rng| {
        let res = t1.run(&psi, rng)?;
        Ok((res.accepted, res.rounds_used))
    })?;
    cx.sample("case2", p2, |rng| {
        let res = t2.run(&psi, rng)?;
        Ok((res.accepted, res.rounds_used))
    })
}
