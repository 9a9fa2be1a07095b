//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use ocp_core::edge_ldp::{circular_law, constrained_measure, left_tail_prediction, psi_left, psi_right};
use ocp_core::exact_beta2::{edge_cdf_log, edge_pdf_log, exact_moment, mgf_log};
use ocp_core::harness::{cumulant_check, describe_scan, extract_subleading, gumbel_check, gumbel_exact_distance, transition_scan};
use ocp_core::radial_moments::{entropy_excess, entropy_functional, mean_field_energy, Potential, TransitionOrder};
use ocp_core::sampler::{sample_kostlan, sample_mcmc, McmcParams, StatExponent};
use ocp_core::stats::{batch_means_std_error, ks_critical_two_sample, ks_two_sample, mean, variance};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_01_quadratic_mgf_oracle() {
    let n = 50u64;
    let mut worst = 0.0f64;
    for &s in &[-0.4f64, 0.1, 1.0, 5.0] {
        let got = mgf_log(n, 2.0, s).unwrap().log_value;
        let want = -((n * (n + 1)) as f64) / 2.0 * (2.0 * s).ln_1p();
        worst = worst.max(((got - want) / want).abs());
    }
    let pass = worst <= 1e-9;
    report(1, "p=2 exact MGF", pass, &format!("max relative error {worst:.3e} (limit 1e-9)"));
    assert!(pass);
}

#[test]
fn criterion_02_subleading_coefficient() {
    let sizes = [25u64, 50, 100];
    let mut worst = 0.0f64;
    for &s in &[-0.4f64, 0.1, 1.0, 5.0] {
        let c = extract_subleading(2.0, s, &sizes).unwrap();
        worst = worst.max((c - 0.25 * (2.0 * s).ln_1p()).abs());
    }
    let c1 = extract_subleading(1.0, 1.0, &sizes).unwrap();
    let quarter_entropy = 0.25 * entropy_excess(1.0, 1.0).unwrap();
    let pass = worst <= 1e-10 && (c1 - 0.2757).abs() <= 0.01;
    report(
        2,
        "1/N coefficient",
        pass,
        &format!("p=2 max error {worst:.3e} (limit 1e-10); p=1 s=1 coefficient {c1:.6} vs 0.2757 +- 0.01 (S_1(1)/4 = {quarter_entropy:.7})"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_left_tail() {
    let n = 250u64;
    let nf = n as f64;
    let mut worst = 0.0f64;
    for i in 3..=9 {
        let x = i as f64 / 10.0;
        let finite = -edge_cdf_log(n, x).unwrap() / (2.0 * nf * nf);
        worst = worst.max((finite - left_tail_prediction(x, n).unwrap()).abs());
    }
    let residual = |n: u64| {
        let nf = n as f64;
        (-edge_cdf_log(n, 0.5).unwrap() / (2.0 * nf * nf) - left_tail_prediction(0.5, n).unwrap()).abs()
    };
    let r = [residual(50), residual(100), residual(250)];
    let monotone = r[0] > r[1] && r[1] > r[2];
    let pass = worst <= 1e-3 && monotone;
    report(
        3,
        "left tail",
        pass,
        &format!("max |residual| at n=250 {worst:.3e} (limit 1e-3); x=0.5 residuals {:.3e} > {:.3e} > {:.3e}", r[0], r[1], r[2]),
    );
    assert!(pass);
}

#[test]
fn criterion_04_right_tail() {
    let residual = |n: u64, x: f64| (-edge_pdf_log(n, x).unwrap() / (2.0 * n as f64) - psi_right(x).unwrap()).abs();
    let mut pass = true;
    let mut detail = String::new();
    for &x in &[1.2, 1.5, 2.0] {
        let r = [residual(50, x), residual(100, x), residual(250, x)];
        pass &= r[2] <= 0.05 && r[0] > r[1] && r[1] > r[2];
        detail += &format!("x={x}: {:.4} > {:.4} > {:.4}; ", r[0], r[1], r[2]);
    }
    report(4, "right tail", pass, &format!("{detail}limit 0.05 at n=250"));
    assert!(pass);
}

#[test]
fn criterion_05_cumulants() {
    let mut pass = true;
    let mut detail = String::new();
    for &p in &[1.0, 2.0] {
        let r = cumulant_check(p, 2.0, 10, 3).unwrap();
        for row in &r.rows {
            pass &= row.rel_error <= 1e-4;
            detail += &format!("p={p} k={}: {:.2e}; ", row.order, row.rel_error);
        }
        // The third cumulant scales as p³, not p²; the two differ unless p = 1.
        let p_squared_form = p * p / (2.0 * 4.0 * 1e4);
        detail += &format!("(p^2 form of k=3 off by {:.2e}) ", (r.rows[2].numeric - p_squared_form).abs() / r.rows[2].numeric);
    }
    report(5, "leading cumulants", pass, &format!("relative errors {detail}(limit 1e-4)"));
    assert!(pass);
}

#[test]
fn criterion_06_transition_orders() {
    let mut pass = true;
    let mut detail = String::new();
    for &(p, want) in &[(0.5, Some(3)), (1.0, Some(4)), (2.0, None)] {
        let r = transition_scan(p).unwrap();
        let lower_ok = r.orders.iter().filter(|o| Some(o.order) != want).all(|o| o.continuous);
        let ok = r.detected == want && r.confirms_expected() && lower_ok;
        pass &= ok;
        detail += &format!("p={p}: detected {:?}; ", r.detected);
        if !ok {
            eprintln!("{}", describe_scan(&r));
        }
        if let TransitionOrder::Order(l) = r.expected {
            assert_eq!(Some(l), want);
        }
    }
    report(6, "transition orders", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_07_samplers() {
    let kostlan = sample_kostlan(100, 10_000, StatExponent::Finite(1.0), 1).unwrap();
    let se = (variance(&kostlan.values) / kostlan.values.len() as f64).sqrt();
    let exact = exact_moment(100, 1.0).unwrap();
    let z = (mean(&kostlan.values) - exact).abs() / se;

    let base = McmcParams {
        n: 32,
        beta: 2.0,
        sweeps: 42_000,
        burn_in: 2_000,
        thinning: 20,
        p: StatExponent::Finite(2.0),
        seed: 7,
        initial_step: 0.1,
        chains: 8,
    };
    let mcmc2 = sample_mcmc(&base).unwrap();
    let reference = sample_kostlan(32, 20_000, StatExponent::Finite(2.0), 3).unwrap();
    let d = ks_two_sample(&mcmc2.values, &reference.values);
    let crit = ks_critical_two_sample(0.01, mcmc2.values.len(), reference.values.len());

    let mcmc4 = sample_mcmc(&McmcParams { beta: 4.0, seed: 8, ..base }).unwrap();
    let var4 = variance(&mcmc4.values);
    let target = 1.0 / (4.0 * 32.0 * 32.0);
    let var_err = (var4 - target).abs() / target;

    let pass = z <= 4.0 && d < crit && var_err <= 0.15;
    report(
        7,
        "samplers",
        pass,
        &format!(
            "Kostlan mean off by {z:.2} SE; KS {d:.4} vs critical {crit:.4} ({} MCMC draws, batch SE {:.2e}); beta=4 variance {var4:.4e} vs {target:.4e} ({:.1}%)",
            mcmc2.values.len(),
            batch_means_std_error(&mcmc2.values, 50),
            100.0 * var_err
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_functional_oracles() {
    let disk = circular_law();
    let e = mean_field_energy(&disk, Potential::Harmonic).unwrap();
    let s = entropy_functional(&disk).unwrap().finite().unwrap();
    let mut worst = 0.0f64;
    for &x in &[0.3, 0.5, 0.7, 0.9] {
        let m = constrained_measure(x).unwrap();
        let gap = mean_field_energy(&m, Potential::Harmonic).unwrap() - 0.375;
        worst = worst.max((gap - psi_left(x).unwrap()).abs());
    }
    let pass = (e - 0.375).abs() <= 1e-10 && (s - std::f64::consts::PI.ln()).abs() <= 1e-10 && worst <= 1e-8;
    report(
        8,
        "functional oracles",
        pass,
        &format!(
            "energy error {:.2e}, entropy error {:.2e} (limit 1e-10); hard-wall energy gap error {worst:.2e} (limit 1e-8)",
            (e - 0.375).abs(),
            (s - std::f64::consts::PI.ln()).abs()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_gumbel_regime() {
    let r = gumbel_check(2000, 10_000, 2024).unwrap();
    let exact = gumbel_exact_distance(2000).unwrap();
    let pass = r.sup_distance <= 0.05;
    report(
        9,
        "Gumbel regime",
        pass,
        &format!(
            "sup-distance {:.4} (limit 0.05); distance of the exact n=2000 CDF from Gumbel is {exact:.4}",
            r.sup_distance
        ),
    );
    assert!(pass, "sup-distance {} exceeds 0.05; the exact finite-n law is {exact} away", r.sup_distance);
}

#[test]
fn criterion_10_sampling_determinism() {
    let params = McmcParams {
        n: 16,
        beta: 4.0,
        sweeps: 600,
        burn_in: 100,
        thinning: 5,
        p: StatExponent::Finite(2.0),
        seed: 7,
        initial_step: 0.1,
        chains: 4,
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let m1 = one.install(|| sample_mcmc(&params).unwrap());
    let m4 = four.install(|| sample_mcmc(&params).unwrap());
    let k1 = one.install(|| sample_kostlan(40, 3000, StatExponent::Infinity, 11).unwrap());
    let k4 = four.install(|| sample_kostlan(40, 3000, StatExponent::Infinity, 11).unwrap());
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let pass = bits(&m1.values) == bits(&m4.values) && bits(&k1.values) == bits(&k4.values);
    report(10, "determinism", pass, "library samplers bit-identical on 1 and 4 threads (CLI byte checks live in the CLI tests)");
    assert!(pass);
}
