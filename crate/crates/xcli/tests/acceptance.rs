//! End-to-end acceptance run. Prints one line per criterion and exits nonzero
//! if any fails. Tolerances and time limits are fixed below.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use seqmeas::gates::{hadamard, pauli_x, GateSpec};
use seqmeas::measurement::{Branch, Outcome};
use seqmeas::random::{random_state, random_unitary, trial_rng};
use seqmeas::testers::{EigenTester, UnitaryCircuit};
use seqmeas::RegisterShape;
use seqmeas_xcli::{run_experiment, ExperimentConfig, ExperimentRecord, EXPERIMENTS};

const SEED: u64 = 20_240_601;
const EXACT_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-10;
const CASE1: f64 = 1.0 / 7.0;
const CASE2: f64 = 1.0 / 8.0;

type Check = Result<String, String>;

fn run(config: ExperimentConfig) -> Result<(ExperimentRecord, Duration), String> {
    let start = Instant::now();
    let record = run_experiment(&config).map_err(|e| e.to_string())?;
    Ok((record, start.elapsed()))
}

fn value(r: &ExperimentRecord, name: &str) -> Result<f64, String> {
    r.value(name).ok_or_else(|| format!("record has no value `{name}`"))
}

fn require(ok: bool, what: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what)
    }
}

fn all_assertions(r: &ExperimentRecord) -> Result<(), String> {
    match r.failed_assertions().next() {
        None => Ok(()),
        Some(a) => Err(format!(
            "assertion {} failed: {} {} {}",
            a.name, a.observed, a.relation, a.bound
        )),
    }
}

/// Strict `|rate − p| ≤ 4σ` on every Monte Carlo series in the record.
fn four_sigma(r: &ExperimentRecord) -> Result<usize, String> {
    for e in &r.empirical {
        let dev = (e.rate - e.expected).abs();
        if dev > 4.0 * e.sigma + 1e-12 {
            return Err(format!(
                "{}: rate {} vs {} is {:.2}σ",
                e.name,
                e.rate,
                e.expected,
                dev / e.sigma
            ));
        }
    }
    Ok(r.empirical.len())
}

fn mw_config(trials: u64, sampled: usize) -> ExperimentConfig {
    ExperimentConfig::new("mw-bounds", SEED, trials)
        .with_param("max_dim", 16)
        .with_param("max_n", 32)
        .with_param("sampled", sampled)
        .with_param("samples", 10_000)
}

fn criterion_1_2() -> (Check, Check) {
    let (r, t) = match run(mw_config(200, 0)) {
        Ok(x) => x,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let c1 = (|| {
        let n = value(&r, "instances")?;
        let ok = value(&r, "sandwich_passes")?;
        require(n == 200.0 && ok == 200.0, format!("{ok}/{n} sandwich passes"))?;
        require(t < Duration::from_secs(10), format!("took {t:?}"))?;
        Ok(format!("200/200 sandwich passes in {:.2} s", t.as_secs_f64()))
    })();
    let c2 = (|| {
        let ok = value(&r, "oracle_agreements")?;
        let gap = value(&r, "max_oracle_gap")?;
        require(
            ok == 200.0 && gap <= EXACT_TOL,
            format!("{ok}/200 agree, max gap {gap:e}"),
        )?;
        Ok(format!("200/200 agree, max gap {gap:.1e}"))
    })();
    (c1, c2)
}

fn criterion_3() -> Check {
    let (r, t) = run(mw_config(200, 20))?;
    let n = four_sigma(&r)?;
    require(n == 20, format!("{n} sampled instances"))?;
    require(r.empirical.iter().all(|e| e.trials == 10_000), "trial count".into())?;
    require(t < Duration::from_secs(60), format!("took {t:?}"))?;
    Ok(format!(
        "20/20 instances within 4σ at 10^4 trials in {:.2} s",
        t.as_secs_f64()
    ))
}

fn criterion_4() -> Check {
    let (r, _) = run(ExperimentConfig::new("antizeno", SEED, 1000).with_param("n", 64))?;
    let step = (PI / 128.0).cos().powi(2);
    let accept = 1.0 - (PI / 128.0).cos().powi(128);
    require(
        (value(&r, "step_reject_expected")? - step).abs() <= 1e-12,
        "step closed form".into(),
    )?;
    require(
        value(&r, "step_reject_max_error")? <= 1e-12,
        "per-step rejection".into(),
    )?;
    let got = value(&r, "accept_ever")?;
    require((got - accept).abs() <= 1e-10, format!("accept-ever {got} vs {accept}"))?;
    require(
        (got - 0.0378).abs() < 5e-5,
        format!("accept-ever {got} is not ≈ 0.0378"),
    )?;
    let fid = value(&r, "final_fidelity_one")?;
    require(fid >= 1.0 - 1e-10, format!("fidelity {fid}"))?;
    let cap = PI * PI / 4.0 * 1.1;
    let mut scaled = Vec::new();
    for n in [16, 64, 256] {
        let s = value(&r, &format!("n_times_accept_ever_{n}"))?;
        require(s <= cap, format!("n={n}: n·accept = {s} > {cap}"))?;
        scaled.push(format!("{s:.3}"));
    }
    all_assertions(&r)?;
    Ok(format!(
        "accept-ever {got:.6}, n·accept = {} ≤ {cap:.3}",
        scaled.join(", ")
    ))
}

fn criterion_5() -> Check {
    let delta = 1.0 / 1024.0;
    let cfg = ExperimentConfig::new("or-test", SEED, 1000)
        .with_param("n", 8)
        .with_param("delta", delta)
        .with_param("epsilon", 0);
    let (r, _) = run(cfg)?;
    let p1 = value(&r, "case1_accept")?;
    let p2 = value(&r, "case2_accept")?;
    let single = value(&r, "case2_max_single_accept")?;
    require(p1 >= CASE1 - EXACT_TOL, format!("case 1 accept {p1}"))?;
    require(single <= delta + EXACT_TOL, format!("case 2 single accept {single}"))?;
    require(p2 <= 4.0 * delta * 8.0 + EXACT_TOL, format!("case 2 accept {p2}"))?;
    Ok(format!(
        "case 1 {p1:.4} ≥ 1/7, case 2 {p2:.4} ≤ 4δn = {:.4}",
        32.0 * delta
    ))
}

fn criterion_6() -> Check {
    let cfg = ExperimentConfig::new("gentle", SEED, 1000)
        .with_param("min_dim", 2)
        .with_param("max_dim", 8);
    let (r, _) = run(cfg)?;
    let ok = value(&r, "passes")?;
    require(ok == 1000.0, format!("{ok}/1000"))?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (l, h) = (value(&r, "equality_lhs")?, value(&r, "equality_rhs")?);
    require(
        (l - s).abs() <= 1e-10 && (h - s).abs() <= 1e-10,
        format!("equality case {l}, {h}"),
    )?;
    Ok("1000/1000 random pairs, equality case lhs = rhs = 1/√2".into())
}

fn criterion_7() -> Check {
    let cfg = ExperimentConfig::new("union-bound", SEED, 1000)
        .with_param("max_t", 6)
        .with_param("max_dim", 8);
    let (r, t) = run(cfg)?;
    let ok = value(&r, "passes")?;
    require(ok == 1000.0, format!("{ok}/1000"))?;
    let (p, b) = (value(&r, "antizeno8_p_any_one")?, value(&r, "antizeno8_bound")?);
    require(p <= b + 1e-10, format!("anti-Zeno n=8: {p} > {b}"))?;
    require(t < Duration::from_secs(30), format!("took {t:?}"))?;
    Ok(format!(
        "1000/1000 suites plus anti-Zeno n=8 in {:.2} s",
        t.as_secs_f64()
    ))
}

fn criterion_8() -> Check {
    let (r, _) = run(ExperimentConfig::new("disturbance", SEED, 1000))?;
    let cons = value(&r, "max_conservation_error")?;
    require(cons <= 1e-9, format!("conservation error {cons:e}"))?;
    for a in ["case2_measurement_accept", "case2_total_accept"] {
        require(r.assertion(a).is_some_and(|a| a.passed), format!("{a} failed"))?;
    }
    let eta: f64 = 0.5;
    for n in [4, 8, 16, 64, 128] {
        let acc = value(&r, &format!("antizeno_{n}_accept"))?;
        let floor = eta * eta / 7.0 - 1.0 / n as f64;
        require(acc >= floor - EXACT_TOL, format!("anti-Zeno n={n}: {acc} < {floor}"))?;
    }
    let n = four_sigma(&r)?;
    all_assertions(&r)?;
    Ok(format!(
        "conservation {cons:.1e}, {} case-2 instances ≤ 2kζ, {n} sampled series within 4σ",
        value(&r, "case2_instances")?
    ))
}

fn criterion_9() -> Check {
    let (r, _) = run(ExperimentConfig::new("giso", SEED, 1000).with_param("epsilon", 0.5))?;
    let p1 = value(&r, "isomorphic_accept")?;
    let p2 = value(&r, "far_accept")?;
    let d = value(&r, "far_min_distance")?;
    require(p1 >= CASE1 - EXACT_TOL, format!("isomorphic accept {p1}"))?;
    require(d == 0.5, format!("far pair distance {d}"))?;
    require(p2 <= CASE2 + EXACT_TOL, format!("far accept {p2}"))?;
    let cases = value(&r, "sweep_cases")?;
    let err = value(&r, "sweep_max_error")?;
    require(cases == (16 * 16 * 24) as f64, format!("{cases} sweep cases"))?;
    require(err <= IDENTITY_TOL, format!("overlap identity error {err:e}"))?;
    Ok(format!(
        "{p1:.4} ≥ 1/7 vs {p2:.4} ≤ 1/8, overlap identity on {cases} cases"
    ))
}

fn criterion_10() -> Check {
    let eps: f64 = 0.5;
    let (r, _) = run(ExperimentConfig::new("membership", SEED, 1000).with_param("epsilon", eps))?;
    let k = value(&r, "copies")?;
    let closed = (1.0 - eps * eps).powi(k as i32);
    for i in 0..2 {
        let p = value(&r, &format!("far_measurement_{i}_accept"))?;
        require(
            (p - closed).abs() <= IDENTITY_TOL,
            format!("measurement {i}: {p} vs {closed}"),
        )?;
    }
    let p1 = value(&r, "member_accept")?;
    let p2 = value(&r, "far_accept")?;
    require(p1 >= CASE1 - EXACT_TOL, format!("member accept {p1}"))?;
    require(p2 <= CASE2 + EXACT_TOL, format!("far accept {p2}"))?;
    Ok(format!("k = {k}, {p1:.4} ≥ 1/7 vs {p2:.4} ≤ 1/8"))
}

fn criterion_11() -> Check {
    let (r, _) = run(ExperimentConfig::new("uiso", SEED, 1000).with_param("epsilon", 0.5))?;
    require(value(&r, "choi_instances")? == 100.0, "instance count".into())?;
    for name in ["choi_overlap_max_error", "choi_sandwich_max_error"] {
        let e = value(&r, name)?;
        require(e <= IDENTITY_TOL, format!("{name} = {e:e}"))?;
    }
    let p1 = value(&r, "iso_accept")?;
    let p2 = value(&r, "far_accept")?;
    let d = value(&r, "far_min_distance")?;
    require(p1 >= CASE1 - EXACT_TOL, format!("iso accept {p1}"))?;
    require(d >= 0.5, format!("far distance {d}"))?;
    require(p2 <= CASE2 + EXACT_TOL, format!("far accept {p2}"))?;
    Ok(format!(
        "Choi identities on 100 instances, {p1:.4} ≥ 1/7 vs {p2:.2e} ≤ 1/8"
    ))
}

fn criterion_12() -> Check {
    let (r, _) = run(ExperimentConfig::new("genuine-ent", SEED, 1000).with_param("epsilon", 0.5))?;
    let p1 = value(&r, "product_accept")?;
    let p2 = value(&r, "ghz_accept")?;
    let err = value(&r, "cut_test_max_error")?;
    require(p1 >= CASE1 - EXACT_TOL, format!("|0⟩⊗Bell accept {p1}"))?;
    require(p2 <= CASE2 + EXACT_TOL, format!("GHZ accept {p2}"))?;
    require(err <= IDENTITY_TOL, format!("cut test error {err:e}"))?;
    Ok(format!("{p1:.4} ≥ 1/7 vs {p2:.2e} ≤ 1/8, cut tests exact"))
}

fn criterion_13() -> Check {
    let cfg = ExperimentConfig::new("demerlinize", SEED, 1000)
        .with_param("dim_a", 4)
        .with_param("d", 2)
        .with_param("eta", 2.0 / 3.0)
        .with_param("zeta", 0.01);
    let (r, _) = run(cfg)?;
    let eta: f64 = 2.0 / 3.0;
    let lo = eta * eta / 7.0;
    // ⌈d/η⌉ = ⌈2 · 3/2⌉ = 3.
    let hi = 2.0 * 0.01 * 3.0;
    let p1 = value(&r, "case1_accept")?;
    let p2 = value(&r, "case2_accept")?;
    require(p1 >= lo - EXACT_TOL, format!("case 1 accept {p1} < {lo}"))?;
    require(p2 <= hi + EXACT_TOL, format!("case 2 accept {p2} > {hi}"))?;
    Ok(format!("case 1 {p1:.4} ≥ η²/7 = {lo:.4}, case 2 {p2:.4} ≤ {hi}"))
}

/// Copies of a random `psi_qubits`-qubit state under two structured unitaries.
fn eigen_instance(psi_qubits: usize) -> Result<EigenTester, seqmeas::Error> {
    let mut rng = trial_rng(SEED, 14);
    let shape = RegisterShape::qubits(psi_qubits)?;
    let mut unitaries = Vec::new();
    for _ in 0..2 {
        let mut gates = Vec::new();
        for q in 0..psi_qubits {
            gates.push(GateSpec::on(q, random_unitary(2, &mut rng))?);
        }
        for q in 1..psi_qubits {
            gates.push(GateSpec::on(q, pauli_x())?.controlled_on(q - 1, 1)?);
        }
        gates.push(GateSpec::on(0, hadamard())?);
        unitaries.push(UnitaryCircuit::new(shape.clone(), gates)?);
    }
    EigenTester::new(unitaries, random_state(&shape, &mut rng), 4)
}

fn timed_cycle(t: &EigenTester) -> Result<(Duration, f64, f64), String> {
    let state = t.initial_state().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let c = t
        .measure_cycle(0, state, Branch::Forced(Outcome::Accept))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    Ok((elapsed, c.probability, t.analytic_accept(0).map_err(|e| e.to_string())?))
}

fn criterion_14() -> Check {
    let t = eigen_instance(3).map_err(|e| e.to_string())?;
    let qubits = t
        .circuit_shape()
        .map_err(|e| e.to_string())?
        .total_dim()
        .trailing_zeros();
    require(qubits == 17, format!("{qubits} qubits"))?;
    let (elapsed, p, analytic) = timed_cycle(&t)?;
    require(
        (p - analytic).abs() <= IDENTITY_TOL,
        format!("cycle accept {p} vs {analytic}"),
    )?;
    require(elapsed < Duration::from_secs(1), format!("cycle took {elapsed:?}"))?;
    let wide = eigen_instance(4).map_err(|e| e.to_string())?;
    let (wide_elapsed, _, _) = timed_cycle(&wide)?;
    Ok(format!(
        "17-qubit cycle in {:.1} ms (21-qubit variant with 4-qubit ψ per copy: {:.1} ms)",
        elapsed.as_secs_f64() * 1e3,
        wide_elapsed.as_secs_f64() * 1e3
    ))
}

fn small_config(name: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::new(name, SEED, 60);
    match name {
        "mw-bounds" => cfg.with_param("sampled", 3).with_param("samples", 200),
        "disturbance" => cfg.with_param("instances", 4).with_param("case2_instances", 20),
        "uiso" => cfg.with_param("choi_instances", 10),
        _ => cfg,
    }
}

fn criterion_15() -> Check {
    for name in EXPERIMENTS {
        let a = run(small_config(name))?.0;
        let b = run(small_config(name))?.0;
        require(a.to_json() == b.to_json(), format!("{name}: result documents differ"))?;
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).map_err(|e| e.to_string())?;
        b.write_csv(&mut cb).map_err(|e| e.to_string())?;
        require(ca == cb, format!("{name}: trial rows differ"))?;
    }
    Ok(format!("{} experiments byte-identical on rerun", EXPERIMENTS.len()))
}

fn main() -> ExitCode {
    let (c1, c2) = criterion_1_2();
    let results = vec![
        c1,
        c2,
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
        criterion_13(),
        criterion_14(),
        criterion_15(),
    ];
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2}: PASS  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
