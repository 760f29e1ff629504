mod common;

use common::max_abs_diff;
use proptest::prelude::*;
use sacd::dataset::synthetic;
use sacd::engine::SerialComm;
use sacd::lasso::SaConfig;
use sacd::matrix::{extract_rows, gram, IndexSelection};
use sacd::sampling::CoordinateSampler;
use sacd::svm::{
    duality_gap, primal_from_dual, run_svm_cd, sa_svm_epoch, sa_svm_run, svm_cd_step, svm_trajectory, SvmLoss,
    SvmProblem, SvmRunSpec, SvmState,
};

fn problem(m: usize, n: usize, density: f64, seed: u64, lambda: f64, loss: SvmLoss) -> SvmProblem {
    SvmProblem::new(synthetic::random_labels(m, n, density, seed), lambda, loss).unwrap()
}

fn worst(got: &[SvmState], want: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter().zip(want).map(|(g, (a, x))| max_abs_diff(&g.alpha, a).max(max_abs_diff(&g.x, x))).fold(0.0, f64::max)
}

#[test]
fn classic_follows_dense_oracle() {
    for (seed, loss) in [(1, SvmLoss::L1), (2, SvmLoss::L2), (3, SvmLoss::L1)] {
        let p = problem(20, 8, 0.5, seed, 1.0, loss);
        let got = svm_trajectory(&p, &SvmRunSpec { iters: 60, unroll: None, seed }).unwrap();
        let want = common::svm_oracle(&p.data, 1.0, loss == SvmLoss::L2, 60, seed);
        assert!(worst(&got, &want) <= 1e-12);
    }
}

#[test]
fn s_step_matches_sequential_oracle() {
    for s in [1usize, 2, 3, 4, 5, 8] {
        for loss in [SvmLoss::L1, SvmLoss::L2] {
            let seed = 30 + s as u64;
            let p = problem(20, 8, 0.5, seed, 1.0, loss);
            let got = svm_trajectory(&p, &SvmRunSpec { iters: 40, unroll: Some(s), seed }).unwrap();
            let want = common::svm_oracle(&p.data, 1.0, loss == SvmLoss::L2, 40, seed);
            assert!(worst(&got, &want) <= 1e-10, "s={s} {loss:?}: {}", worst(&got, &want));
        }
    }
}

#[test]
fn unroll_one_is_bitwise_classic() {
    for loss in [SvmLoss::L1, SvmLoss::L2] {
        let p = problem(25, 10, 0.4, 6, 0.7, loss);
        let a = svm_trajectory(&p, &SvmRunSpec { iters: 80, unroll: None, seed: 2 }).unwrap();
        let b = svm_trajectory(&p, &SvmRunSpec { iters: 80, unroll: Some(1), seed: 2 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.alpha.iter().zip(&y.alpha).all(|(u, v)| u.to_bits() == v.to_bits()));
            assert!(x.x.iter().zip(&y.x).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }
}

#[test]
fn repeated_index_in_one_epoch() {
    // a 2-row problem makes repeats inside an epoch of 6 certain
    for loss in [SvmLoss::L1, SvmLoss::L2] {
        let p = problem(2, 5, 0.8, 4, 1.0, loss);
        let rows = [1usize, 1, 0, 1, 0, 0];
        let mut seq = SvmState::zero(&p.shard());
        for &i in &rows {
            svm_cd_step(&p, &mut seq, i).unwrap();
        }
        let mut sa = SvmState::zero(&p.shard());
        sa_svm_epoch(&p.shard(), &p.params(), &mut sa, &rows, &mut SerialComm::new(), |_, _| Ok(())).unwrap();
        assert!(max_abs_diff(&sa.alpha, &seq.alpha) <= 1e-12);
        assert!(max_abs_diff(&sa.x, &seq.x) <= 1e-12);
    }
}

#[test]
fn run_examples() {
    let p = problem(30, 6, 0.5, 3, 1.0, SvmLoss::L1);
    let run = run_svm_cd(&p, 50, 7).unwrap();
    assert_eq!(run.records[0].metric, 30.0);
    let again = run_svm_cd(&p, 50, 7).unwrap();
    assert_eq!(run.solution, again.solution);
    assert_eq!(run.stats.rounds, 50);
    let sa = sa_svm_run(&p, 50, SaConfig { s: 8, seed: 7 }).unwrap();
    assert_eq!(sa.stats.rounds, 7);
    assert!(max_abs_diff(&sa.solution, &run.solution) <= 1e-10);
}

#[test]
fn gap_falls_on_separable_data() {
    for loss in [SvmLoss::L1, SvmLoss::L2] {
        let p = SvmProblem::new(synthetic::separable(60, 10, 0.6, 5), 1.0, loss).unwrap();
        let run = run_svm_cd(&p, 3000, 1).unwrap();
        let gaps: Vec<f64> = run.records.iter().map(|r| r.metric).collect();
        assert!(gaps.last().unwrap() < &0.1, "{loss:?} {}", gaps.last().unwrap());
        assert!(gaps.iter().all(|g| *g >= -1e-10));
    }
}

#[derive(Debug, Clone)]
struct Case {
    m: usize,
    n: usize,
    density: f64,
    seed: u64,
    lambda: f64,
    loss: SvmLoss,
    iters: usize,
    s: usize,
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=30, 1usize..=12, 0.1f64..1.0, any::<u64>(), 0.05f64..5.0, any::<bool>(), 1usize..=40, 1usize..=8)
        .prop_map(|(m, n, density, seed, lambda, l2, iters, s)| Case {
            m,
            n,
            density,
            seed,
            lambda,
            loss: if l2 { SvmLoss::L2 } else { SvmLoss::L1 },
            iters,
            s,
        })
}

fn check_state(p: &SvmProblem, st: &SvmState) -> Result<(), TestCaseError> {
    let nu = p.nu();
    for &a in &st.alpha {
        prop_assert!(a >= 0.0 && nu.map_or(true, |v| a <= v), "alpha {} outside [0, {:?}]", a, nu);
    }
    let x = primal_from_dual(&p.data.matrix, &p.data.labels, &st.alpha).unwrap();
    let l1: f64 = st.alpha.iter().map(|v| v.abs()).sum();
    prop_assert!(max_abs_diff(&x, &st.x) <= 1e-10 * (1.0 + l1));
    prop_assert!(duality_gap(p, st).unwrap() >= -1e-10);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn feasibility_consistency_weak_duality(c in case()) {
        let p = problem(c.m, c.n, c.density, c.seed, c.lambda, c.loss);
        let mut sampler = CoordinateSampler::new(c.seed);
        let mut st = SvmState::zero(&p.shard());
        check_state(&p, &st)?;
        for _ in 0..c.iters {
            svm_cd_step(&p, &mut st, sampler.next_index(c.m)).unwrap();
            check_state(&p, &st)?;
        }
    }

    #[test]
    fn s_step_invariants_and_equivalence(c in case()) {
        let p = problem(c.m, c.n, c.density, c.seed, c.lambda, c.loss);
        let (shard, params) = (p.shard(), p.params());
        let mut sampler = CoordinateSampler::new(c.seed);
        let mut st = SvmState::zero(&shard);
        let mut comm = SerialComm::new();
        let mut done = 0;
        while done < c.iters {
            let len = c.s.min(c.iters - done);
            let rows: Vec<usize> = (0..len).map(|_| sampler.next_index(c.m)).collect();

            // diag(G) + γ against direct row norms
            let y = extract_rows(&p.data.matrix, &IndexSelection::new(rows.clone(), 0)).unwrap();
            let g = gram(&y.transpose()).unwrap();
            for (j, &i) in rows.iter().enumerate() {
                let (_, vals) = p.data.matrix.row(i);
                let direct: f64 = vals.iter().map(|v| v * v).sum::<f64>() + params.gamma;
                let eta = g.get(j, j) + params.gamma;
                prop_assert!((eta - direct).abs() <= 1e-14 * direct.abs().max(1e-300));
            }

            let mut failure = None;
            sa_svm_epoch(&shard, &params, &mut st, &rows, &mut comm, |s, _| {
                if let Err(e) = check_state(&p, s) { failure = Some(e); }
                Ok(())
            }).unwrap();
            if let Some(e) = failure { return Err(e); }
            done += len;
        }
        let oracle = common::svm_oracle(&p.data, c.lambda, c.loss == SvmLoss::L2, c.iters, c.seed);
        let (alpha, x) = &oracle[c.iters];
        prop_assert!(max_abs_diff(&st.alpha, alpha) <= 1e-10);
        prop_assert!(max_abs_diff(&st.x, x) <= 1e-10);
    }
}
