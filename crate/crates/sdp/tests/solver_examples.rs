//! End-to-end solver checks: small problems with known answers, randomly
//! generated problems with planted optima, and determinism.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachstep_sdp::{solve, Block, BlockMat, SdpProblem, SdpSolution, SolveOptions, SolveStatus};

/// Symmetric unit coefficient matrix: ⟨e_sym(i,j), Z⟩ = Z_ij.
fn e_sym(n: usize, i: usize, j: usize) -> BlockMat {
    let mut m = DMatrix::zeros(n, n);
    if i == j {
        m[(i, i)] = 1.0;
    } else {
        m[(i, j)] = 0.5;
        m[(j, i)] = 0.5;
    }
    BlockMat::Dense(m)
}

/// min w subject to [[w, 1], [1, w]] ⪰ 0, optimal at w = 1.
fn bordered_problem() -> SdpProblem {
    let blocks = vec![Block::Dense(2)];
    let c = vec![BlockMat::zeros(Block::Dense(2))];
    let a = vec![
        vec![e_sym(2, 0, 0)],
        vec![e_sym(2, 0, 1)],
        vec![e_sym(2, 1, 1)],
    ];
    let b = vec![0.0, 1.0, 0.0];
    let f = DMatrix::from_column_slice(3, 1, &[-1.0, 0.0, -1.0]);
    let cf = DVector::from_column_slice(&[1.0]);
    SdpProblem::new(blocks, c, a, b, f, cf).unwrap()
}

fn check_optimal_postconditions(p: &SdpProblem, sol: &SdpSolution) {
    assert_eq!(sol.status, SolveStatus::Optimal);
    let binf = p.rhs().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for (i, row) in p.constraints().iter().enumerate() {
        let mut ax = 0.0;
        for (ab, xb) in row.iter().zip(&sol.x) {
            ax += ab.dot(xb);
        }
        for t in 0..p.num_free() {
            ax += p.free_matrix()[(i, t)] * sol.w[t];
        }
        let viol = (ax - p.rhs()[i]).abs();
        assert!(
            viol <= 1e-6 * (1.0 + binf),
            "constraint {i} violated by {viol:.3e}"
        );
    }
    for (k, xb) in sol.x.iter().enumerate() {
        let lo = xb.min_eig();
        assert!(lo >= -1e-8, "block {k} has eigenvalue {lo:.3e}");
    }
    let gap = (sol.obj_primal - sol.obj_dual).abs();
    assert!(
        gap <= 1e-7 * (1.0 + sol.obj_primal.abs()),
        "objective gap {gap:.3e}"
    );
}

#[test]
fn bordered_matrix_minimum_is_one() {
    let p = bordered_problem();
    let sol = solve(&p, &SolveOptions::default());
    check_optimal_postconditions(&p, &sol);
    assert!((sol.objective - 1.0).abs() < 1e-6, "objective {}", sol.objective);
    assert!((sol.w[0] - 1.0).abs() < 1e-5, "w {}", sol.w[0]);
    // at the optimum the matrix is the rank-one all-ones matrix
    let x = sol.x[0].as_dense();
    assert!((x[(0, 1)] - 1.0).abs() < 1e-4);
}

#[test]
fn unit_trace_feasibility_pins_the_single_entry() {
    let blocks = vec![Block::Dense(1)];
    let c = vec![BlockMat::zeros(Block::Dense(1))];
    let a = vec![vec![BlockMat::identity(Block::Dense(1), 1.0)]];
    let p = SdpProblem::new(blocks, c, a, vec![1.0], DMatrix::zeros(1, 0), DVector::zeros(0))
        .unwrap();
    let sol = solve(&p, &SolveOptions::default());
    check_optimal_postconditions(&p, &sol);
    assert!((sol.x[0].as_dense()[(0, 0)] - 1.0).abs() < 1e-6);
    assert!(sol.objective.abs() < 1e-8);
}

#[test]
fn negative_trace_demand_is_certified_infeasible() {
    let blocks = vec![Block::Dense(1)];
    let c = vec![BlockMat::zeros(Block::Dense(1))];
    let a = vec![vec![BlockMat::identity(Block::Dense(1), 1.0)]];
    let p = SdpProblem::new(blocks, c, a, vec![-1.0], DMatrix::zeros(1, 0), DVector::zeros(0))
        .unwrap();
    let sol = solve(&p, &SolveOptions::default());
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn diagonal_blocks_solve_linear_programs() {
    // min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0
    let blocks = vec![Block::Diag(2)];
    let c = vec![BlockMat::Diag(DVector::from_column_slice(&[1.0, 2.0]))];
    let a = vec![vec![BlockMat::Diag(DVector::from_column_slice(&[1.0, 1.0]))]];
    let p = SdpProblem::new(blocks, c, a, vec![1.0], DMatrix::zeros(1, 0), DVector::zeros(0))
        .unwrap();
    let sol = solve(&p, &SolveOptions::default());
    check_optimal_postconditions(&p, &sol);
    assert!((sol.objective - 1.0).abs() < 1e-6);
    let x = sol.x[0].as_diag();
    assert!((x[0] - 1.0).abs() < 1e-5 && x[1].abs() < 1e-5);
}

/// Plant a strictly complementary primal-dual pair and recover it.
///
/// X* and S* share an eigenbasis with complementary supports; y*, w*, and
/// the constraint data are random; C = S* + A*(y*) and cf = Fᵀy* make the
/// pair optimal with zero duality gap by construction.
#[test]
fn planted_optima_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5D50_7E57);
    for trial in 0..6 {
        let n = 3 + trial % 3;
        let nd = 2;
        let nf = trial % 3;
        let m = 4 + trial;
        let blocks = vec![Block::Dense(n), Block::Diag(nd)];

        let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
            .qr()
            .q();
        let split = 1 + trial % (n - 1);
        let lx = DVector::from_fn(n, |i, _| {
            if i < split {
                rng.random_range(0.2..2.0)
            } else {
                0.0
            }
        });
        let ls = DVector::from_fn(n, |i, _| {
            if i < split {
                0.0
            } else {
                rng.random_range(0.2..2.0)
            }
        });
        let spectral = |d: &DVector<f64>| {
            let mut z = DMatrix::zeros(n, n);
            for i in 0..n {
                z[(i, i)] = d[i];
            }
            let w = &q * z * q.transpose();
            BlockMat::Dense(0.5 * (&w + w.transpose()))
        };
        let x_star = [
            spectral(&lx),
            BlockMat::Diag(DVector::from_column_slice(&[rng.random_range(0.2..2.0), 0.0])),
        ];
        let s_star = [
            spectral(&ls),
            BlockMat::Diag(DVector::from_column_slice(&[0.0, rng.random_range(0.2..2.0)])),
        ];

        let y_star = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let w_star = DVector::from_fn(nf, |_, _| rng.random_range(-1.0..1.0));
        let f = DMatrix::from_fn(m, nf, |_, _| rng.random_range(-1.0..1.0));

        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for i in 0..m {
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let dense = BlockMat::Dense(0.5 * (&raw + raw.transpose()));
            let diag = BlockMat::Diag(DVector::from_fn(nd, |_, _| rng.random_range(-1.0..1.0)));
            let row = vec![dense, diag];
            let mut bi = row.iter().zip(&x_star).map(|(ab, xb)| ab.dot(xb)).sum::<f64>();
            for t in 0..nf {
                bi += f[(i, t)] * w_star[t];
            }
            a.push(row);
            b.push(bi);
        }
        let c: Vec<BlockMat> = (0..2)
            .map(|k| {
                let mut ck = s_star[k].clone();
                for i in 0..m {
                    ck.axpy(y_star[i], &a[i][k]);
                }
                ck.symmetrized()
            })
            .collect();
        let cf = f.transpose() * &y_star;
        let obj_star = c.iter().zip(&x_star).map(|(ck, xk)| ck.dot(xk)).sum::<f64>()
            + cf.dot(&w_star);

        let p = SdpProblem::new(blocks, c, a, b, f, cf).unwrap();
        let sol = solve(&p, &SolveOptions::default());
        check_optimal_postconditions(&p, &sol);
        assert!(
            (sol.objective - obj_star).abs() <= 1e-6 * (1.0 + obj_star.abs()),
            "trial {trial}: objective {} vs planted {obj_star}",
            sol.objective
        );
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let run = || {
        let p = bordered_problem();
        solve(&p, &SolveOptions::default())
    };
    let s1 = run();
    let s2 = run();
    assert_eq!(s1.status, s2.status);
    assert_eq!(s1.iterations, s2.iterations);
    assert_eq!(s1.objective.to_bits(), s2.objective.to_bits());
    for (a, b) in s1.y.iter().zip(&s2.y) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (a, b) in s1.w.iter().zip(&s2.w) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (xa, xb) in s1.x.iter().zip(&s2.x) {
        let (ma, mb) = (xa.as_dense(), xb.as_dense());
        for (va, vb) in ma.iter().zip(mb.iter()) {
            assert_eq!(va.to_bits(), vb.to_bits());
        }
    }
}

#[test]
fn zero_iteration_budget_reports_the_limit() {
    let p = bordered_problem();
    let opts = SolveOptions {
        max_iter: 0,
        ..SolveOptions::default()
    };
    let sol = solve(&p, &opts);
    assert_eq!(sol.status, SolveStatus::IterationLimit);
    assert_eq!(sol.iterations, 0);
}

#[test]
fn dense_regularization_shifts_the_solved_model_but_not_the_report() {
    // with C = 0 the pure-model objective stays 0 while the solved model
    // sees the small trace term
    let blocks = vec![Block::Dense(1)];
    let c = vec![BlockMat::zeros(Block::Dense(1))];
    let a = vec![vec![BlockMat::identity(Block::Dense(1), 1.0)]];
    let p = SdpProblem::new(blocks, c, a, vec![1.0], DMatrix::zeros(1, 0), DVector::zeros(0))
        .unwrap();
    let opts = SolveOptions {
        centering_reg: 1e-9,
        ..SolveOptions::default()
    };
    let sol = solve(&p, &opts);
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.objective.abs() < 1e-7);
    assert!((sol.obj_primal - 1e-9).abs() < 1e-10 + 1e-7);
}
