//! File-format checks: frozen export bytes, solution round trips, and
//! parse-error reporting.

use nalgebra::{DMatrix, DVector};
use reachstep_sdp::{
    export_sdpa, export_solution, import_solution, solve, Block, BlockMat, SdpError, SdpProblem,
    SolveOptions, SolveStatus,
};

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

/// min w subject to [[w, 1], [1, w]] ⪰ 0; exercises the free-scalar pairs
/// encoding in the file format.
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

#[test]
fn export_bytes_are_frozen() {
    let p = bordered_problem();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prob.dat-s");
    export_sdpa(&p, &path).unwrap();
    let got = std::fs::read_to_string(&path).unwrap();
    let want = "\
3
2
2 -2
0.0000000000000000e0 1.0000000000000000e0 0.0000000000000000e0
0 2 1 1 -1.0000000000000000e0
0 2 2 2 1.0000000000000000e0
1 1 1 1 1.0000000000000000e0
1 2 1 1 -1.0000000000000000e0
1 2 2 2 1.0000000000000000e0
2 1 1 2 5.0000000000000000e-1
3 1 2 2 1.0000000000000000e0
3 2 1 1 -1.0000000000000000e0
3 2 2 2 1.0000000000000000e0
";
    assert_eq!(got, want);

    // re-export is byte-identical
    let path2 = dir.path().join("prob2.dat-s");
    export_sdpa(&p, &path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn solution_files_round_trip_exactly() {
    let p = bordered_problem();
    let sol = solve(&p, &SolveOptions::default());
    assert_eq!(sol.status, SolveStatus::Optimal);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prob.sol");
    export_solution(&sol, &p, &path).unwrap();
    let back = import_solution(&path, &p).unwrap();

    assert_eq!(back.y.len(), sol.y.len());
    for (a, b) in back.y.iter().zip(&sol.y) {
        assert_eq!(a, b);
    }
    for (a, b) in back.w.iter().zip(&sol.w) {
        assert_eq!(a, b);
    }
    for (xa, xb) in back.x.iter().zip(&sol.x) {
        for (va, vb) in xa.as_dense().iter().zip(xb.as_dense().iter()) {
            assert_eq!(va, vb);
        }
    }
    for (sa, sb) in back.s.iter().zip(&sol.s) {
        for (va, vb) in sa.as_dense().iter().zip(sb.as_dense().iter()) {
            assert_eq!(va, vb);
        }
    }
    // the re-imported point carries the same residual quality
    assert!(back.pinf < 1e-6, "pinf {}", back.pinf);
    assert!(back.dinf < 1e-6, "dinf {}", back.dinf);
    assert!((back.objective - sol.objective).abs() <= 1e-12 * (1.0 + sol.objective.abs()));
}

#[test]
fn diagonal_blocks_round_trip_through_files() {
    let blocks = vec![Block::Diag(2)];
    let c = vec![BlockMat::Diag(DVector::from_column_slice(&[1.0, 2.0]))];
    let a = vec![vec![BlockMat::Diag(DVector::from_column_slice(&[1.0, 1.0]))]];
    let p = SdpProblem::new(blocks, c, a, vec![1.0], DMatrix::zeros(1, 0), DVector::zeros(0))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();

    let prob_path = dir.path().join("lp.dat-s");
    export_sdpa(&p, &prob_path).unwrap();
    let text = std::fs::read_to_string(&prob_path).unwrap();
    assert!(text.starts_with("1\n1\n-2\n"), "header:\n{text}");

    let sol = solve(&p, &SolveOptions::default());
    let sol_path = dir.path().join("lp.sol");
    export_solution(&sol, &p, &sol_path).unwrap();
    let back = import_solution(&sol_path, &p).unwrap();
    for (va, vb) in back.x[0].as_diag().iter().zip(sol.x[0].as_diag().iter()) {
        assert_eq!(va, vb);
    }
    for (va, vb) in back.s[0].as_diag().iter().zip(sol.s[0].as_diag().iter()) {
        assert_eq!(va, vb);
    }
}

#[test]
fn malformed_solution_lines_report_path_and_line() {
    let p = bordered_problem();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sol");
    let expect_line = |content: &str, line: usize| {
        std::fs::write(&path, content).unwrap();
        match import_solution(&path, &p) {
            Err(SdpError::ParseLine {
                line: got,
                path: in_path,
                ..
            }) => {
                assert_eq!(got, line, "for file {content:?}");
                assert!(in_path.ends_with("bad.sol"));
            }
            Err(e) => panic!("unexpected error kind: {e}"),
            Ok(_) => panic!("import accepted malformed file {content:?}"),
        }
    };

    // bad value token
    expect_line("0.0 0.0 0.0\n2 1 1 1 not_a_number\n", 2);
    // wrong dual count (m = 3)
    expect_line("0.0 0.0\n", 1);
    // empty file
    expect_line("", 1);
    // block index out of range
    expect_line("0.0 0.0 0.0\n2 9 1 1 1.0\n", 2);
    // off-diagonal entry in the pairs block
    expect_line("0.0 0.0 0.0\n2 2 1 2 1.0\n", 2);
    // wrong field count
    expect_line("0.0 0.0 0.0\n2 1 1 1\n", 2);
    // bad matno
    expect_line("0.0 0.0 0.0\n3 1 1 1 1.0\n", 2);
    // dense entry out of range, on a later line
    expect_line("0.0 0.0 0.0\n2 1 1 1 1.0\n2 1 3 1 1.0\n", 3);
}

#[test]
fn exporting_nothing_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.dat-s");

    // no cone blocks and no free scalars
    let p = SdpProblem::new(
        vec![],
        vec![],
        vec![vec![]],
        vec![0.0],
        DMatrix::zeros(1, 0),
        DVector::zeros(0),
    )
    .unwrap();
    assert!(matches!(
        export_sdpa(&p, &path),
        Err(SdpError::DegenerateProblem(_))
    ));

    // no constraints
    let p2 = SdpProblem::new(
        vec![Block::Dense(1)],
        vec![BlockMat::zeros(Block::Dense(1))],
        vec![],
        vec![],
        DMatrix::zeros(0, 0),
        DVector::zeros(0),
    )
    .unwrap();
    assert!(matches!(
        export_sdpa(&p2, &path),
        Err(SdpError::DegenerateProblem(_))
    ));
    assert!(!path.exists());
}
