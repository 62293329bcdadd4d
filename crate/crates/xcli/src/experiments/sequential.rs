use rand::Rng;
use seqmeas::disturbance::{
    anti_zeno_instance, case1_sweep, exact_sequential_accept, run_sequential_sampled, SequentialInstance,
    CONSERVATION_TOL,
};
use seqmeas::measurement::TwoOutcomeMeasurement;
use seqmeas::random::{random_projector, random_state, trial_rng};
use seqmeas::state::DensityOperator;
use seqmeas::{Error, QuantumState, RegisterShape};

use super::{qubit, tilted, Outcome2, TOL};
use crate::Context;

/// Random instance: dimension 2 to 4, one to four projectors. With `zeta_max`
/// set, every projector is rank one and accepts the (pure) input with
/// probability at most `zeta_max`; otherwise ranks and the input are generic.
fn random_instance<R: Rng + ?Sized>(rng: &mut R, zeta_max: Option<f64>) -> Result<SequentialInstance, Error> {
    let dim = rng.random_range(2..=4);
    let n = rng.random_range(1..=4);
    let eta = 0.3 + 0.7 * rng.random::<f64>();
    let shape = RegisterShape::single(dim)?;
    let psi = random_state(&shape, rng);
    let (ms, state): (Vec<TwoOutcomeMeasurement>, QuantumState) = match zeta_max {
        Some(z) => {
            let ms = (0..n)
                .map(|_| {
                    let zi = z * rng.random::<f64>();
                    TwoOutcomeMeasurement::projective(tilted(&psi, zi, rng).projector())
                })
                .collect::<Result<_, _>>()?;
            (ms, psi.into())
        }
        None => {
            let ms = (0..n)
                .map(|_| {
                    let r = rng.random_range(1..dim);
                    TwoOutcomeMeasurement::projective(random_projector(&shape, r, rng))
                })
                .collect::<Result<_, _>>()?;
            let other = random_state(&shape, rng);
            let w = rng.random::<f64>();
            let state = if rng.random::<bool>() {
                DensityOperator::mixture(&[(w, psi), (1.0 - w, other)])?.into()
            } else {
                psi.into()
            };
            (ms, state)
        }
    };
    SequentialInstance::new(ms, state, eta)
}

pub(crate) fn disturbance(cx: &mut Context) -> Outcome2 {
    let eta = cx.params.f64_in("eta", 0.5, 0.0, 1.0)?;
    let instances = cx.params.usize_in("instances", 20, 0, 10_000)?;
    let case2_instances = cx.params.usize_in("case2_instances", 200, 0, 100_000)?;
    let zeta_max = cx.params.f64_in("zeta_max", 0.002, 0.0, 1.0)?;

    let rows = case1_sweep(|n| anti_zeno_instance(n, eta), &[4, 8, 16, 64, 128])?;
    for row in &rows {
        let r = &mut cx.record;
        r.push_value(&format!("antizeno_{}_accept", row.n), row.accept);
        r.push_value(&format!("antizeno_{}_floor", row.n), row.floor);
        r.check_ge(&format!("antizeno_{}_case1", row.n), row.accept, row.floor, TOL);
    }
    let zero = qubit(0);
    let single = SequentialInstance::new(vec![TwoOutcomeMeasurement::projective(zero.projector())?], zero, 1.0)?;
    let exact = exact_sequential_accept(&single)?;
    cx.record.push_value("single_projector_accept", exact.accept);
    cx.record
        .check_ge("single_projector_case1", exact.accept, single.case1_floor(), TOL);

    // Case 2: every projector rarely accepts the input.
    let seed = cx.next_seed();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_conservation: f64 = 0.0;
    let mut measurement_ok = 0;
    let mut total_ok = 0;
    for t in 0..case2_instances as u64 {
        let inst = random_instance(&mut trial_rng(seed, t), Some(zeta_max))?;
        let ex = exact_sequential_accept(&inst)?;
        let bound = inst.case2_bound()?;
        worst_conservation = worst_conservation.max(ex.max_conservation_error);
        if ex.measurement_accept <= bound + TOL {
            measurement_ok += 1;
        }
        if ex.accept <= bound + TOL {
            total_ok += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(ex.accept / bound);
        }
    }
    let r = &mut cx.record;
    r.push_value("case2_instances", case2_instances as f64);
    r.push_value("case2_max_accept_over_bound", worst_ratio);
    r.check_all("case2_measurement_accept", measurement_ok, case2_instances);
    r.check_all("case2_total_accept", total_ok, case2_instances);

    // Generic instances: conservation and agreement with sampling.
    let seed = cx.next_seed();
    for t in 0..instances as u64 {
        let inst = random_instance(&mut trial_rng(seed, t), None)?;
        let ex = exact_sequential_accept(&inst)?;
        worst_conservation = worst_conservation.max(ex.max_conservation_error);
        cx.sample(&format!("instance_{t}"), ex.accept, |rng| {
            let res = run_sequential_sampled(&inst, rng)?;
            Ok((res.accepted, res.iterations_used))
        })?;
    }
    cx.record.push_value("max_conservation_error", worst_conservation);
    cx.record
        .check_le("conservation", worst_conservation, 0.0, CONSERVATION_TOL);
    Ok(())
}
