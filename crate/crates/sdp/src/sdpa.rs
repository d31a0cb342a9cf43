//! SDPA sparse-format export and CSDP-style solution import.
//!
//! Free scalars have no cone home in the SDPA format, so the export splits
//! each one into a difference of nonnegatives, w = p − q, carried in a
//! trailing diagonal block of size 2·nf. The in-process solver never sees
//! this split; it exists only at the file boundary so a problem can be
//! cross-checked against an external solver.

use crate::blocks::bdot;
use crate::{Block, BlockMat, SdpError, SdpProblem, SdpSolution, SolveStatus};
use nalgebra::DVector;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Append one block's nonzero entries as `matno blkno i j value` lines.
/// Dense blocks emit the upper triangle, columns outer, 1-based.
fn emit_block(out: &mut String, matno: usize, blkno: usize, bm: &BlockMat) {
    match bm {
        BlockMat::Dense(mat) => {
            let n = mat.nrows();
            for j in 0..n {
                for i in 0..=j {
                    let v = mat[(i, j)];
                    if v != 0.0 {
                        writeln!(out, "{matno} {blkno} {} {} {}", i + 1, j + 1, fmt(v)).unwrap();
                    }
                }
            }
        }
        BlockMat::Diag(d) => {
            for t in 0..d.len() {
                if d[t] != 0.0 {
                    writeln!(out, "{matno} {blkno} {} {} {}", t + 1, t + 1, fmt(d[t])).unwrap();
                }
            }
        }
    }
}

fn pairs_diag(row: &[f64], negate: bool) -> BlockMat {
    let nf = row.len();
    let mut d = DVector::zeros(2 * nf);
    let sign = if negate { -1.0 } else { 1.0 };
    for t in 0..nf {
        d[t] = sign * row[t];
        d[nf + t] = -sign * row[t];
    }
    BlockMat::Diag(d)
}

/// Write the problem in SDPA sparse format. Deterministic: same problem,
/// same bytes, LF line endings, trailing newline.
pub fn export_sdpa(p: &SdpProblem, path: impl AsRef<Path>) -> Result<(), SdpError> {
    let m = p.b.len();
    let nf = p.f.ncols();
    if p.blocks.is_empty() && nf == 0 {
        return Err(SdpError::DegenerateProblem(
            "no cone blocks and no free scalars".into(),
        ));
    }
    if m == 0 {
        return Err(SdpError::DegenerateProblem("no constraints".into()));
    }
    let mut out = String::new();
    let nb = p.blocks.len() + usize::from(nf > 0);
    writeln!(out, "{m}").unwrap();
    writeln!(out, "{nb}").unwrap();
    let mut sizes: Vec<String> = p
        .blocks
        .iter()
        .map(|blk| match *blk {
            Block::Dense(n) => format!("{n}"),
            Block::Diag(n) => format!("-{n}"),
        })
        .collect();
    if nf > 0 {
        sizes.push(format!("-{}", 2 * nf));
    }
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let bline: Vec<String> = p.b.iter().map(|&v| fmt(v)).collect();
    writeln!(out, "{}", bline.join(" ")).unwrap();

    // objective record (matno 0) holds −C so the file's maximization convention
    // matches our minimization
    for (k, cb) in p.c.iter().enumerate() {
        emit_block(&mut out, 0, k + 1, &cb.scaled(-1.0));
    }
    if nf > 0 {
        let cf_row: Vec<f64> = p.cf.iter().copied().collect();
        emit_block(&mut out, 0, nb, &pairs_diag(&cf_row, true));
    }
    for i in 0..m {
        for (k, ab) in p.a[i].iter().enumerate() {
            emit_block(&mut out, i + 1, k + 1, ab);
        }
        if nf > 0 {
            let f_row: Vec<f64> = (0..nf).map(|t| p.f[(i, t)]).collect();
            emit_block(&mut out, i + 1, nb, &pairs_diag(&f_row, false));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a solution file in the layout CSDP produces: line 1 is the dual
/// vector y, then `matno blk i j value` entries with matno 1 = dual slack
/// and matno 2 = primal matrix, all indices 1-based. The trailing pairs
/// block (present when the problem has free scalars) is folded back into
/// w = p − q. Residual measures are recomputed from the parsed point.
pub fn import_solution(path: impl AsRef<Path>, p: &SdpProblem) -> Result<SdpSolution, SdpError> {
    let pathstr = path.as_ref().display().to_string();
    let text = fs::read_to_string(path.as_ref())?;
    let perr = |line: usize, msg: String| SdpError::ParseLine {
        path: pathstr.clone(),
        line,
        msg,
    };

    let m = p.b.len();
    let nf = p.f.ncols();
    let nb = p.blocks.len() + usize::from(nf > 0);
    let mut lines = text.lines().enumerate();
    let yline = lines
        .next()
        .ok_or_else(|| perr(1, "missing dual vector line".into()))?
        .1;
    let mut yvals = Vec::with_capacity(m);
    for tok in yline.split_whitespace() {
        let v: f64 = tok
            .parse()
            .map_err(|e| perr(1, format!("bad dual value {tok:?}: {e}")))?;
        yvals.push(v);
    }
    if yvals.len() != m {
        return Err(perr(
            1,
            format!("expected {m} dual values, found {}", yvals.len()),
        ));
    }

    let mut x: Vec<BlockMat> = p.blocks.iter().map(|&blk| BlockMat::zeros(blk)).collect();
    let mut s: Vec<BlockMat> = p.blocks.iter().map(|&blk| BlockMat::zeros(blk)).collect();
    let mut wp = vec![0.0f64; nf];
    let mut wq = vec![0.0f64; nf];

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(perr(
                line_no,
                format!("expected 5 fields, found {}", toks.len()),
            ));
        }
        let field = |k: usize| -> Result<usize, SdpError> {
            toks[k]
                .parse::<usize>()
                .map_err(|e| perr(line_no, format!("bad index {:?}: {e}", toks[k])))
        };
        let matno = field(0)?;
        let blk = field(1)?;
        let i = field(2)?;
        let j = field(3)?;
        let v: f64 = toks[4]
            .parse()
            .map_err(|e| perr(line_no, format!("bad value {:?}: {e}", toks[4])))?;
        if matno != 1 && matno != 2 {
            return Err(perr(line_no, format!("matno must be 1 or 2, got {matno}")));
        }
        if blk == 0 || blk > nb {
            return Err(perr(line_no, format!("block {blk} out of range 1..={nb}")));
        }
        if blk == p.blocks.len() + 1 && nf > 0 {
            if i != j {
                return Err(perr(line_no, "off-diagonal entry in pairs block".into()));
            }
            if i == 0 || i > 2 * nf {
                return Err(perr(
                    line_no,
                    format!("pairs index {i} out of range 1..={}", 2 * nf),
                ));
            }
            // only the primal matrix carries the split values
            if matno == 2 {
                if i <= nf {
                    wp[i - 1] = v;
                } else {
                    wq[i - 1 - nf] = v;
                }
            }
            continue;
        }
        let target = if matno == 2 {
            &mut x[blk - 1]
        } else {
            &mut s[blk - 1]
        };
        match target {
            BlockMat::Dense(mat) => {
                let n = mat.nrows();
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(perr(
                        line_no,
                        format!("entry ({i},{j}) out of range for dense block of size {n}"),
                    ));
                }
                mat[(i - 1, j - 1)] = v;
                mat[(j - 1, i - 1)] = v;
            }
            BlockMat::Diag(d) => {
                if i != j {
                    return Err(perr(line_no, "off-diagonal entry in diagonal block".into()));
                }
                if i == 0 || i > d.len() {
                    return Err(perr(
                        line_no,
                        format!("entry {i} out of range for diagonal block of size {}", d.len()),
                    ));
                }
                d[i - 1] = v;
            }
        }
    }

    let w = DVector::from_fn(nf, |t, _| wp[t] - wq[t]);
    let yv = DVector::from_vec(yvals.clone());
    let bv = DVector::from_column_slice(&p.b);
    let objective = bdot(&p.c, &x) + p.cf.dot(&w);
    let obj_dual = bv.dot(&yv);

    let ax = DVector::from_fn(m, |i, _| bdot(&p.a[i], &x));
    let rp = &ax + &p.f * &w - &bv;
    let pinf = rp.norm() / (1.0 + bv.norm());
    let mut rd2 = 0.0;
    for (k, (ck, sk)) in p.c.iter().zip(&s).enumerate() {
        let mut r = ck.clone();
        for i in 0..m {
            if yv[i] != 0.0 {
                r.axpy(-yv[i], &p.a[i][k]);
            }
        }
        r.axpy(-1.0, sk);
        rd2 += r.dot(&r);
    }
    let rf = &p.cf - p.f.transpose() * &yv;
    let normc = 1.0 + (bdot(&p.c, &p.c) + p.cf.dot(&p.cf)).sqrt();
    let dinf = (rd2 + rf.dot(&rf)).sqrt() / normc;
    let gap = (objective - obj_dual).abs() / (1.0 + objective.abs() + obj_dual.abs());

    Ok(SdpSolution {
        status: SolveStatus::Optimal,
        x,
        s,
        y: yvals,
        w: w.iter().copied().collect(),
        objective,
        obj_primal: objective,
        obj_dual,
        iterations: 0,
        pinf,
        dinf,
        gap,
    })
}

/// Write a solution in the layout `import_solution` reads, completing the
/// file round trip. The free part is split as p = max(w, 0), q = max(−w, 0).
pub fn export_solution(
    sol: &SdpSolution,
    p: &SdpProblem,
    path: impl AsRef<Path>,
) -> Result<(), SdpError> {
    let nf = p.f.ncols();
    let mut out = String::new();
    let yline: Vec<String> = sol.y.iter().map(|&v| fmt(v)).collect();
    writeln!(out, "{}", yline.join(" ")).unwrap();
    for (k, sb) in sol.s.iter().enumerate() {
        emit_block(&mut out, 1, k + 1, sb);
    }
    for (k, xb) in sol.x.iter().enumerate() {
        emit_block(&mut out, 2, k + 1, xb);
    }
    if nf > 0 {
        let mut d = DVector::zeros(2 * nf);
        for t in 0..nf {
            if sol.w[t] >= 0.0 {
                d[t] = sol.w[t];
            } else {
                d[nf + t] = -sol.w[t];
            }
        }
        emit_block(&mut out, 2, p.blocks.len() + 1, &BlockMat::Diag(d));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn dense_emission_is_upper_triangle_column_major() {
        let mat = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 0.0]);
        let mut out = String::new();
        emit_block(&mut out, 4, 2, &BlockMat::Dense(mat));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("4 2 1 1 "));
        assert!(lines[1].starts_with("4 2 1 2 "));
    }

    #[test]
    fn float_format_round_trips_bitwise() {
        for v in [0.0, -1.5, 1.0 / 3.0, 6.02e23, -2.2250738585072014e-308] {
            let s = fmt(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }
}
