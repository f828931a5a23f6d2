//! End-to-end acceptance suite: every headline behavior of the library,
//! each criterion as one test emitting a single [PASS] line. Tolerances and
//! runtime budgets are asserted, not just eyeballed.

use std::time::Instant;

use ialpha::divergence::{kl_divergence, log_convexity_gap, relative_alpha_entropy};
use ialpha::families::{
    sample_in_family, BinomialFamily, ExponentialFamily, LinearFamily, ParametricFamily,
    PowerLawFamily,
};
use ialpha::forward::{
    forward_project, objective_gradient, pythagorean_check, SolverOptions, Status,
};
use ialpha::measures::{escort, Alphabet, AlphaParam, ProbMeasure};
use ialpha::oracle::{grid_forward_oracle, GridSpec, ThetaRange};
use ialpha::reverse::{
    iterative_log_convex_minimize, mmple_fit, parametric_reverse_scan, reverse_project, MemberNet,
    ReverseCase, SampleSet, ThetaReport,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pm(w: &[f64]) -> ProbMeasure {
    ProbMeasure::from_weights(w.to_vec()).unwrap()
}

fn alpha(a: f64) -> AlphaParam {
    AlphaParam::new(a).unwrap()
}

fn random_measure(n: usize, rng: &mut ChaCha8Rng) -> ProbMeasure {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    ProbMeasure::normalized(w, Alphabet::new(n).unwrap()).unwrap()
}

/// A centered random constraint row: the uniform measure satisfies it, so
/// the family is feasible with full support.
fn random_centered_row(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = g.iter().sum::<f64>() / n as f64;
    g.iter().map(|v| v - mean).collect()
}

struct SuiteInstance {
    l: LinearFamily,
    r: ProbMeasure,
    a: f64,
}

/// The fixed 25-instance regression suite: |X| ∈ {3,4,5}, k ∈ {1,2},
/// α ∈ {0.3, 0.5, 0.8, 1.5, 2, 4}, all drawn from seed 0.
fn suite_instances() -> Vec<SuiteInstance> {
    let alphas = [0.3, 0.5, 0.8, 1.5, 2.0, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::new();
    for i in 0..25 {
        let n = [3, 4, 5][i % 3];
        let k = [1, 2][i % 2];
        let a = alphas[i % alphas.len()];
        let rows: Vec<Vec<f64>> = (0..k).map(|_| random_centered_row(n, &mut rng)).collect();
        let l = LinearFamily::new(rows, Alphabet::new(n).unwrap()).unwrap();
        let r = random_measure(n, &mut rng);
        out.push(SuiteInstance { l, r, a });
    }
    out
}

/// Rejection-sample admissible parameter vectors of a power-law family.
fn sample_admissible_thetas(
    m: &PowerLawFamily,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut scale = 1.0;
    let mut out = Vec::new();
    let mut failures = 0;
    while out.len() < count {
        let theta: Vec<f64> = (0..m.k())
            .map(|_| rng.random_range(-scale..scale))
            .collect();
        if m.is_admissible(&theta).unwrap() {
            out.push(theta);
        } else {
            failures += 1;
            if failures % 20 == 0 {
                scale *= 0.5;
            }
        }
    }
    out
}

#[test]
fn criterion_01_support_shrinkage_example() {
    let start = Instant::now();
    let l = LinearFamily::new(
        vec![vec![1.0, -3.0, -5.0, -6.0]], // 8p₁+4p₂+2p₃+p₄ = 7, homogenized
        Alphabet::new(4).unwrap(),
    )
    .unwrap();
    let res = forward_project(&l, &ProbMeasure::uniform(4), alpha(2.0), &SolverOptions::default())
        .unwrap();
    let expect = [0.75, 0.25, 0.0, 0.0];
    let l1: f64 = res
        .q
        .weights()
        .iter()
        .zip(expect.iter())
        .map(|(w, e)| (w - e).abs())
        .sum();
    assert!(l1 <= 1e-6, "L1 gap {l1}");
    assert!((res.theta_star[0] + 0.05).abs() <= 1e-6);
    assert!((res.z - 0.4).abs() <= 1e-6);
    assert_eq!(res.status, Status::Converged);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[PASS] 1. support-shrinkage projection: Q, theta*, Z all within 1e-6 in {elapsed:?}");
}

#[test]
fn criterion_02_strict_pythagorean_inequality() {
    let l = LinearFamily::new(
        vec![vec![1.0, -3.0, -5.0, -6.0]],
        Alphabet::new(4).unwrap(),
    )
    .unwrap();
    let r = ProbMeasure::uniform(4);
    let proj = forward_project(&l, &r, alpha(2.0), &SolverOptions::default()).unwrap();
    let p = pm(&[0.8227, 0.0625, 0.0536, 0.0612]);
    let (lhs, rhs) = pythagorean_check(&p, &proj, &r, alpha(2.0)).unwrap();
    assert!((lhs - 1.0114).abs() <= 5e-4, "lhs {lhs}");
    assert!((rhs - 0.9871).abs() <= 5e-4, "rhs {rhs}");
    assert!(lhs > rhs);
    println!("[PASS] 2. strict Pythagorean inequality above alpha=1: {lhs:.4} > {rhs:.4}");
}

#[test]
fn criterion_03_binomial_bimodality() {
    let start = Instant::now();
    let fam = BinomialFamily::new(2).unwrap();
    let r = ProbMeasure::uniform(3);
    let grid = [ThetaRange {
        lo: 1e-4,
        hi: 1.0 - 1e-4,
        step: 1e-4,
    }];
    let scan2 = parametric_reverse_scan(&fam, &r, alpha(2.0), &grid).unwrap();
    assert_eq!(scan2.minima.len(), 1, "alpha=2 should be unimodal");
    assert!((scan2.minima[0].theta[0] - 0.5).abs() <= 1e-4);
    let scan4 = parametric_reverse_scan(&fam, &r, alpha(4.0), &grid).unwrap();
    assert_eq!(scan4.minima.len(), 2, "alpha=4 should be bimodal");
    let (t0, t1) = (scan4.minima[0].theta[0], scan4.minima[1].theta[0]);
    assert!((t0 + t1 - 1.0).abs() <= 1e-6, "asymmetric minima {t0}, {t1}");
    for scan in [&scan2, &scan4] {
        let n = scan.series.len();
        for i in 0..n {
            let gap = (scan.series[i].1 - scan.series[n - 1 - i].1).abs();
            assert!(gap <= 1e-10, "mirror symmetry broken by {gap}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "[PASS] 3. binomial scan: one minimum at alpha=2, symmetric pair at alpha=4, in {elapsed:?}"
    );
}

#[test]
fn criterion_04_oracle_equivalence_suite() {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let spec = GridSpec {
        resolution: 0.02,
        refine_rounds: 2,
    };
    for (i, inst) in suite_instances().iter().enumerate() {
        let a = alpha(inst.a);
        let solver = forward_project(&inst.l, &inst.r, a, &opts).unwrap();
        let (oracle_p, oracle_v) = grid_forward_oracle(&inst.l, &inst.r, a, &spec).unwrap();
        let solver_v = relative_alpha_entropy(&solver.q, &inst.r, a).unwrap().value();
        assert!(
            (solver_v - oracle_v).abs() <= 1e-6,
            "instance {i}: objective gap {} (solver {solver_v}, oracle {oracle_v})",
            (solver_v - oracle_v).abs()
        );
        let tv = solver.q.total_variation(&oracle_p);
        assert!(tv <= 2e-3, "instance {i}: TV {tv}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("[PASS] 4. solver matches grid oracle on all 25 suite instances in {elapsed:?}");
}

#[test]
fn criterion_05_pythagorean_equality_below_one() {
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    for inst in suite_instances().iter().filter(|inst| inst.a < 1.0) {
        let a = alpha(inst.a);
        let proj = forward_project(&inst.l, &inst.r, a, &opts).unwrap();
        let iqr = relative_alpha_entropy(&proj.q, &inst.r, a).unwrap().value();
        for p in sample_in_family(&inst.l, 100, &mut rng).unwrap() {
            let ipr = relative_alpha_entropy(&p, &inst.r, a).unwrap().value();
            let ipq = relative_alpha_entropy(&p, &proj.q, a).unwrap().value();
            let gap = (ipr - ipq - iqr).abs();
            assert!(gap <= 1e-7, "gap {gap} at alpha {}", inst.a);
            checked += 1;
        }
    }
    assert!(checked >= 1000, "suite should cover many members");
    println!(
        "[PASS] 5. Pythagorean equality below alpha=1 on {checked} sampled members (<= 1e-7)"
    );
}

#[test]
fn criterion_06_reverse_orthogonality() {
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // equality side: below alpha = 1 the projection satisfies the exact
    // three-point identity against every family member
    for a in [0.3, 0.5, 0.8] {
        let n = 4;
        let r = random_measure(n, &mut rng);
        let rows = vec![(0..n)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<f64>>()];
        let m = PowerLawFamily::new(alpha(a), r, rows).unwrap();
        let p_hat = random_measure(n, &mut rng);
        let out = reverse_project(&m, &p_hat, &opts).unwrap();
        assert_eq!(out.case, ReverseCase::InFamily);
        let base = out.divergence.value();
        for theta in sample_admissible_thetas(&m, 50, &mut rng) {
            let s = m.member(&theta).unwrap();
            let lhs = relative_alpha_entropy(&p_hat, &s, alpha(a)).unwrap().value();
            let cross = relative_alpha_entropy(&out.q, &s, alpha(a)).unwrap().value();
            assert!(
                (lhs - base - cross).abs() <= 1e-7,
                "alpha {a}: equality off by {}",
                (lhs - base - cross).abs()
            );
        }
    }
    // inequality side: above alpha = 1 the identity relaxes to >=
    for a in [1.5, 2.0, 4.0] {
        let n = 4;
        let r = random_measure(n, &mut rng);
        let rows = vec![(0..n)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<f64>>()];
        let m = PowerLawFamily::new(alpha(a), r, rows).unwrap();
        let p_hat = random_measure(n, &mut rng);
        let out = reverse_project(&m, &p_hat, &opts).unwrap();
        let base = out.divergence.value();
        for theta in sample_admissible_thetas(&m, 50, &mut rng) {
            let s = m.member(&theta).unwrap();
            let lhs = relative_alpha_entropy(&p_hat, &s, alpha(a)).unwrap().value();
            let cross = relative_alpha_entropy(&out.q, &s, alpha(a)).unwrap().value();
            assert!(
                lhs >= base + cross - 1e-7,
                "alpha {a}: inequality violated by {}",
                base + cross - lhs
            );
        }
    }
    println!("[PASS] 6. reverse-projection orthogonality: equality below 1, inequality above 1");
}

#[test]
fn criterion_07_gradient_matches_finite_differences() {
    let alphas = [0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    for trial in 0..100 {
        let n = 4;
        let p = random_measure(n, &mut rng);
        let r = random_measure(n, &mut rng);
        let a = alpha(alphas[trial % alphas.len()]);
        let grad = objective_gradient(&p, &r, a).unwrap();
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        while j == i {
            j = rng.random_range(0..n);
        }
        let perturb = |sign: f64| -> f64 {
            let mut w = p.weights().to_vec();
            w[i] += sign * h;
            w[j] -= sign * h;
            let moved = ProbMeasure::new(w, p.alphabet()).unwrap();
            relative_alpha_entropy(&moved, &r, a).unwrap().value()
        };
        let fd = (perturb(1.0) - perturb(-1.0)) / (2.0 * h);
        let analytic = grad[i] - grad[j];
        assert!(
            (fd - analytic).abs() <= 1e-5,
            "trial {trial}: fd {fd} vs analytic {analytic}"
        );
    }
    println!("[PASS] 7. objective gradient matches central differences on 100 random triples");
}

#[test]
fn criterion_08_continuity_at_alpha_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..100 {
        let p = random_measure(4, &mut rng);
        let q = random_measure(4, &mut rng);
        let side = if trial % 2 == 0 { 1.0 - 1e-4 } else { 1.0 + 1e-4 };
        let ia = relative_alpha_entropy(&p, &q, alpha(side)).unwrap().value();
        let kl = kl_divergence(&p, &q).unwrap().value();
        assert!((ia - kl).abs() <= 1e-3, "trial {trial}: gap {}", (ia - kl).abs());
    }

    // small-c estimation agrees with maximum likelihood on representable
    // empirical measures
    let c = 1e-3;
    let opts = SolverOptions::default();
    for _ in 0..10 {
        let n = 4;
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..20usize)).collect();
        let mut obs = Vec::new();
        for (sym, &count) in counts.iter().enumerate() {
            obs.extend(std::iter::repeat(sym).take(count));
        }
        let samples = SampleSet::new(obs, Alphabet::new(n).unwrap()).unwrap();
        let p_hat = samples.empirical();
        let r = random_measure(n, &mut rng);
        // one-parameter family built to pass through P̂ at θ = 1
        let row: Vec<f64> = r
            .weights()
            .iter()
            .zip(p_hat.weights())
            .map(|(&rw, &pw)| (rw.powf(c) - pw.powf(c)) / c)
            .collect();
        let m = PowerLawFamily::new(alpha(1.0 + c), r, vec![row]).unwrap();
        let fit = mmple_fit(&m, &samples, c, &opts).unwrap();
        let theta_hat = match &fit.outcome.theta {
            ThetaReport::Member(t) => t[0],
            other => panic!("expected member fit, got {other:?}"),
        };
        let grid = [ThetaRange {
            lo: 0.0,
            hi: 2.0,
            step: 1e-3,
        }];
        let mle = parametric_reverse_scan(&m, &p_hat, alpha(1.0), &grid).unwrap();
        let theta_mle = mle.minima[0].theta[0];
        assert!(
            (theta_hat - theta_mle).abs() <= 1e-3,
            "mmple {theta_hat} vs mle {theta_mle}"
        );
    }
    println!("[PASS] 8. alpha->1 continuity: divergence within 1e-3 of KL, small-c fit matches MLE");
}

#[test]
fn criterion_09_log_convexity_sign_suite() {
    let alphas = [0.3, 0.7, 1.5, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..500 {
        let r = random_measure(4, &mut rng);
        let p = random_measure(4, &mut rng);
        let q = random_measure(4, &mut rng);
        let t: f64 = rng.random_range(0.05..0.95);
        let a = alphas[trial % alphas.len()];
        let gap = log_convexity_gap(&r, &p, &q, t, alpha(a)).unwrap();
        if a < 1.0 {
            assert!(gap >= -1e-10, "trial {trial}: gap {gap} at alpha {a}");
        } else {
            assert!(gap <= 1e-10, "trial {trial}: gap {gap} at alpha {a}");
        }
        let pe = escort(&p, alpha(a));
        let qe = escort(&q, alpha(a));
        let holder: f64 = pe
            .weights()
            .iter()
            .zip(qe.weights())
            .map(|(&x, &y)| x.powf(t) * y.powf(1.0 - t))
            .sum();
        assert!(holder <= 1.0 + 1e-12, "trial {trial}: holder {holder}");
    }
    println!("[PASS] 9. convexity-gap signs and Holder bound hold on 500 random tuples");
}

#[test]
fn criterion_10_iterative_convergence_below_one() {
    let alphas = [0.3, 0.5, 0.8];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..20 {
        let a = alpha(alphas[trial % alphas.len()]);
        let base = random_measure(3, &mut rng);
        let row = random_centered_row(3, &mut rng);
        let fam = ExponentialFamily::new(base, vec![row]).unwrap();
        let thetas = [-1.5, -0.5, 0.5, 1.5];
        let net = MemberNet::new(
            thetas
                .iter()
                .map(|&t| fam.member(&[t]).unwrap())
                .collect(),
        )
        .unwrap();
        let target = random_measure(3, &mut rng);
        let out = iterative_log_convex_minimize(&net, &target, a, 500).unwrap();
        let last = *out.hellinger_tail.last().unwrap();
        assert!(last < 1e-10, "trial {trial}: stopped with step {last}");
        for pair in out.hellinger_tail.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-12,
                "trial {trial}: escort steps not Cauchy: {pair:?}"
            );
        }
        let grid = [ThetaRange {
            lo: -1.5,
            hi: 1.5,
            step: 1e-3,
        }];
        let scan = parametric_reverse_scan(&fam, &target, a, &grid).unwrap();
        let reached = relative_alpha_entropy(&target, &out.q, a).unwrap().value();
        let best = scan.minima[0].value;
        assert!(
            (reached - best).abs() <= 1e-6,
            "trial {trial}: reached {reached}, oracle {best}"
        );
    }
    // no analogous claim is made above alpha = 1: the reverse objective can
    // be multimodal there (see the binomial bimodality criterion), so the
    // descent limit depends on the start
    println!("[PASS] 10. iterative minimizer is Hellinger-Cauchy and oracle-exact on 20 instances");
}
