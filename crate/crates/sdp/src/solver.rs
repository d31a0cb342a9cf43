//! Homogeneous self-dual embedding with NT scaling and a Mehrotra
//! predictor-corrector.
//!
//! Embedding variables: cone pair (X, S), free scalars w, multipliers y, and
//! the homogenizing pair (τ, κ). Residuals:
//!
//!   rp = A(X) + F·w − b·τ
//!   rd = −A*(y) + C·τ − S          (cone blocks)
//!   rf = −Fᵀ·y + cf·τ              (free rows)
//!   rg = b·y − ⟨C,X⟩ − cf·w − κ    (scalar)
//!
//! The central path drives X∘S → μI and τκ → μ with residuals shrinking
//! proportionally; τ → 0 with κ bounded away signals primal or dual
//! infeasibility, which is how this method produces certificates instead of
//! wandering when the model is bad.

use crate::blocks::{bdot, congruence, congruence_t};
use crate::{Block, BlockMat, SdpProblem, SdpSolution, SolveOptions, SolveStatus, GAMMA};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

struct Scaling {
    g: Vec<BlockMat>,
    gi: Vec<BlockMat>,
    /// Block spectra of the scaled point: σ for dense blocks, √(x·s) for
    /// diagonal blocks.
    lam: Vec<DVector<f64>>,
}

struct Factorization {
    cm: Cholesky<f64, Dyn>,
    cw: Option<Cholesky<f64, Dyn>>,
}

struct Direction {
    dx: Vec<BlockMat>,
    dw: DVector<f64>,
    dy: DVector<f64>,
    dtau: f64,
    ds: Vec<BlockMat>,
    dkap: f64,
}

pub fn solve(p: &SdpProblem, opts: &SolveOptions) -> SdpSolution {
    let m = p.b.len();
    let nf = p.f.ncols();
    let blocks = &p.blocks;

    let c_model = p.c.clone();
    let mut c_iter = p.c.clone();
    if opts.centering_reg > 0.0 {
        for (ci, &blk) in c_iter.iter_mut().zip(blocks) {
            if let (BlockMat::Dense(mat), Block::Dense(s)) = (ci, blk) {
                for d in 0..s {
                    mat[(d, d)] += opts.centering_reg;
                }
            }
        }
    }

    // row normalization of [A | F]
    let mut scales = vec![0.0f64; m];
    for (i, sc) in scales.iter_mut().enumerate() {
        let mut s2 = 0.0;
        for ab in &p.a[i] {
            s2 += ab.dot(ab);
        }
        for j in 0..nf {
            s2 += p.f[(i, j)] * p.f[(i, j)];
        }
        *sc = s2.sqrt().max(1e-12);
    }
    let a: Vec<Vec<BlockMat>> = p
        .a
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|ab| ab.scaled(1.0 / scales[i])).collect())
        .collect();
    let f = DMatrix::from_fn(m, nf, |i, j| p.f[(i, j)] / scales[i]);
    let b = DVector::from_fn(m, |i, _| p.b[i] / scales[i]);
    let cf = p.cf.clone();

    let ntot: usize = blocks.iter().map(|blk| blk.size()).sum();
    let normb = 1.0 + b.norm();
    let normc = 1.0 + (bdot(&c_iter, &c_iter) + cf.dot(&cf)).sqrt();

    let aop = |z: &[BlockMat]| DVector::from_fn(m, |i, _| bdot(&a[i], z));
    let atop = |v: &DVector<f64>| -> Vec<BlockMat> {
        let mut out: Vec<BlockMat> = blocks.iter().map(|&blk| BlockMat::zeros(blk)).collect();
        for i in 0..m {
            if v[i] != 0.0 {
                for (o, ab) in out.iter_mut().zip(&a[i]) {
                    o.axpy(v[i], ab);
                }
            }
        }
        out
    };

    let tau0 = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut x: Vec<BlockMat> = blocks
        .iter()
        .map(|&blk| BlockMat::identity(blk, tau0))
        .collect();
    let mut s: Vec<BlockMat> = blocks
        .iter()
        .map(|&blk| BlockMat::identity(blk, 1.0))
        .collect();
    let mut w = DVector::zeros(nf);
    let mut y = DVector::zeros(m);
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0usize;
    let (mut pinf, mut dinf, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut ref_worst = f64::INFINITY;
    let mut stall = 0usize;
    type Snapshot = (
        Vec<BlockMat>,
        DVector<f64>,
        Vec<BlockMat>,
        DVector<f64>,
        f64,
        f64,
        f64,
        f64,
    );
    let mut best: Option<Snapshot> = None;
    let mut best_worst = f64::INFINITY;

    for it in 0..opts.max_iter {
        iterations = it;
        let mu = (bdot(&x, &s) + tau * kappa) / (ntot + 1) as f64;
        let rp = aop(&x) + &f * &w - &b * tau;
        let aty = atop(&y);
        let rd: Vec<BlockMat> = aty
            .iter()
            .zip(&c_iter)
            .zip(&s)
            .map(|((at, c), sb)| {
                let mut r = c.scaled(tau);
                r.axpy(-1.0, at);
                r.axpy(-1.0, sb);
                r
            })
            .collect();
        let rf = cf.scale(tau) - f.transpose() * &y;
        let obj_cx = bdot(&c_iter, &x) + cf.dot(&w);
        let obj_by = b.dot(&y);
        let rg = obj_by - obj_cx - kappa;

        // de-homogenized convergence measures
        pinf = rp.norm() / tau / normb;
        dinf = (rd.iter().map(|r| r.dot(r)).sum::<f64>() + rf.dot(&rf)).sqrt() / tau / normc;
        let objp = obj_cx / tau;
        let objd = obj_by / tau;
        gap = (objp - objd).abs() / (1.0 + objp.abs() + objd.abs());
        log::debug!(
            "it {it:3} mu {mu:9.2e} tau {tau:8.2e} kappa {kappa:8.2e} \
             pinf {pinf:9.2e} dinf {dinf:9.2e} gap {gap:9.2e} obj {objp:13.6e}"
        );

        let worst = pinf.max(dinf).max(gap);
        if worst < best_worst {
            best_worst = worst;
            best = Some((x.clone(), y.clone(), s.clone(), w.clone(), tau, pinf, dinf, gap));
        }
        if pinf < opts.feas_tol && dinf < opts.feas_tol && gap < opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }

        // infeasibility certificates: τ → 0 while κ stays away
        if tau < 1e-10 * kappa.max(1.0) {
            let ny = y.norm();
            if obj_by > 1e-8 * ny {
                let z = atop(&(&y / ny.max(1e-300)));
                let wmax = z
                    .iter()
                    .map(|zb| zb.max_eig())
                    .fold(f64::NEG_INFINITY, f64::max);
                let fty = if nf > 0 {
                    (f.transpose() * &y)
                        .iter()
                        .fold(0.0f64, |acc, v| acc.max(v.abs()))
                } else {
                    0.0
                };
                if wmax < 1e-6 && fty / ny.max(1e-300) < 1e-6 {
                    status = SolveStatus::Infeasible;
                    break;
                }
            }
            if obj_cx < -1e-8 * bdot(&x, &x).sqrt().max(1.0) {
                // a dual-infeasibility (unbounded) ray; our SOS programs are
                // bounded below, so treat it as numerical trouble
                log::warn!(
                    "unbounded-objective certificate at iteration {it} \
                     (obj {obj_cx:.3e}); reporting numerical failure"
                );
                status = SolveStatus::NumericalFailure;
                break;
            }
            status = SolveStatus::NumericalFailure;
            break;
        }
        if worst < 0.90 * ref_worst {
            ref_worst = worst;
            stall = 0;
        } else {
            stall += 1;
            if stall > 40 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        }

        let Some(nt) = nt_scaling(blocks, &x, &s) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let ct: Vec<BlockMat> = nt.g.iter().zip(&c_iter).map(|(g, c)| congruence(g, c)).collect();
        let at: Vec<Vec<BlockMat>> = a
            .iter()
            .map(|row| nt.g.iter().zip(row).map(|(g, ab)| congruence(g, ab)).collect())
            .collect();

        let mut m_mat = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = bdot(&at[i], &at[j]);
                m_mat[(i, j)] = v;
                m_mat[(j, i)] = v;
            }
        }
        let dmax = (0..m)
            .map(|i| m_mat[(i, i)].abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);

        let Some(fact) = factorize(&m_mat, &f, nf, dmax) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let elim = |rt: &DVector<f64>, rb: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
            if nf == 0 {
                return (fact.cm.solve(rt), DVector::zeros(0));
            }
            let dy0 = fact.cm.solve(rt);
            let cw = fact.cw.as_ref().expect("free-scalar factor present");
            let dw = cw.solve(&(f.transpose() * &dy0 - rb));
            (fact.cm.solve(&(rt - &f * &dw)), dw)
        };
        let sadsolve = |rt: &DVector<f64>, rb: &DVector<f64>| {
            let (mut dy, mut dw) = elim(rt, rb);
            // three rounds of iterative refinement against the unshifted
            // system keep the shifted factorization honest
            for _ in 0..3 {
                let mut ry = rt - &m_mat * &dy;
                if nf > 0 {
                    ry -= &f * &dw;
                }
                let rw = if nf > 0 {
                    rb - f.transpose() * &dy
                } else {
                    DVector::zeros(0)
                };
                let (ey, ew) = elim(&ry, &rw);
                dy += ey;
                dw += ew;
            }
            (dy, dw)
        };

        let ac = DVector::from_fn(m, |i, _| bdot(&at[i], &ct));
        let cc = bdot(&ct, &ct);
        let (z1y, z1w) = sadsolve(&(&ac + &b), &cf);

        let directions = |eta: f64, rc: &[BlockMat], rtk: f64| -> Option<Direction> {
            let rt_d: Vec<BlockMat> = nt
                .g
                .iter()
                .zip(&rd)
                .map(|(g, r)| congruence(g, r))
                .collect();
            let d = lyap_inv(blocks, &nt.lam, rc);
            let dpr: Vec<BlockMat> = d
                .iter()
                .zip(&rt_d)
                .map(|(di, ri)| {
                    let mut out = di.clone();
                    out.axpy(-eta, ri);
                    out
                })
                .collect();
            let t1 = DVector::from_fn(m, |i, _| -eta * rp[i] - bdot(&at[i], &dpr));
            let t2 = rf.scale(eta);
            let (z0y, z0w) = sadsolve(&t1, &t2);
            let cdpr = bdot(&ct, &dpr);
            let num = -eta * rg - (&b - &ac).dot(&z0y) + cf.dot(&z0w) + cdpr + rtk / tau;
            let den = (&b - &ac).dot(&z1y) - cf.dot(&z1w) + cc + kappa / tau;
            let dtau = num / den;
            let dy = &z0y + &z1y * dtau;
            let dw = &z0w + &z1w * dtau;
            let atdy = atop(&dy);
            let atdy_t: Vec<BlockMat> = nt
                .g
                .iter()
                .zip(&atdy)
                .map(|(g, z)| congruence(g, z))
                .collect();
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dx = Vec::with_capacity(blocks.len());
            for k in 0..blocks.len() {
                let mut dsk = ct[k].scaled(dtau);
                dsk.axpy(-1.0, &atdy_t[k]);
                dsk.axpy(eta, &rt_d[k]);
                let mut dxk = d[k].clone();
                dxk.axpy(-1.0, &dsk);
                dx.push(dxk.symmetrized());
                ds.push(dsk.symmetrized());
            }
            let dkap = (rtk - kappa * dtau) / tau;
            let finite = dtau.is_finite()
                && dkap.is_finite()
                && dy.iter().all(|v| v.is_finite())
                && dw.iter().all(|v| v.is_finite())
                && dx.iter().all(|p| p.is_finite())
                && ds.iter().all(|p| p.is_finite());
            if !finite {
                return None;
            }
            Some(Direction {
                dx,
                dw,
                dy,
                dtau,
                ds,
                dkap,
            })
        };

        // affine (predictor) direction
        let rc_aff: Vec<BlockMat> = blocks
            .iter()
            .zip(&nt.lam)
            .map(|(&blk, lm)| match blk {
                Block::Dense(sz) => {
                    let mut mzero = DMatrix::zeros(sz, sz);
                    for d2 in 0..sz {
                        mzero[(d2, d2)] = -lm[d2] * lm[d2];
                    }
                    BlockMat::Dense(mzero)
                }
                Block::Diag(_) => BlockMat::Diag(lm.map(|v| -v * v)),
            })
            .collect();
        let Some(aff) = directions(1.0, &rc_aff, -tau * kappa) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let a_aff = steplen(blocks, &nt.lam, &aff, tau, kappa).min(1.0);
        let mut mu_aff = (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkap);
        for (k, (&blk, lm)) in blocks.iter().zip(&nt.lam).enumerate() {
            match blk {
                Block::Dense(sz) => {
                    let da = aff.dx[k].as_dense();
                    let db = aff.ds[k].as_dense();
                    for r in 0..sz {
                        for c2 in 0..sz {
                            let pv = if r == c2 { lm[r] } else { 0.0 } + a_aff * da[(r, c2)];
                            let qv = if r == c2 { lm[r] } else { 0.0 } + a_aff * db[(r, c2)];
                            mu_aff += pv * qv;
                        }
                    }
                }
                Block::Diag(_) => {
                    let da = aff.dx[k].as_diag();
                    let db = aff.ds[k].as_diag();
                    for r in 0..lm.len() {
                        mu_aff += (lm[r] + a_aff * da[r]) * (lm[r] + a_aff * db[r]);
                    }
                }
            }
        }
        mu_aff /= (ntot + 1) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector right-hand side
        let rc: Vec<BlockMat> = blocks
            .iter()
            .zip(&nt.lam)
            .enumerate()
            .map(|(k, (&blk, lm))| match blk {
                Block::Dense(sz) => {
                    let da = aff.dx[k].as_dense();
                    let db = aff.ds[k].as_dense();
                    let corr = 0.5 * (da * db + db * da);
                    let mut out = -corr;
                    for d2 in 0..sz {
                        out[(d2, d2)] += sigma * mu - lm[d2] * lm[d2];
                    }
                    BlockMat::Dense(out)
                }
                Block::Diag(_) => {
                    let da = aff.dx[k].as_diag();
                    let db = aff.ds[k].as_diag();
                    BlockMat::Diag(DVector::from_fn(lm.len(), |r, _| {
                        sigma * mu - lm[r] * lm[r] - da[r] * db[r]
                    }))
                }
            })
            .collect();
        let rtk = sigma * mu - tau * kappa - aff.dtau * aff.dkap;
        let Some(fin) = directions(1.0 - sigma, &rc, rtk) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let alpha = (GAMMA * steplen(blocks, &nt.lam, &fin, tau, kappa)).min(1.0);
        if alpha < 1e-12 {
            status = SolveStatus::NumericalFailure;
            break;
        }

        for (k, &blk) in blocks.iter().enumerate() {
            match blk {
                Block::Dense(_) => {
                    let dxm = congruence_t(&nt.g[k], &fin.dx[k]);
                    x[k].axpy(alpha, &dxm);
                    x[k] = x[k].symmetrized();
                    let dsm = congruence(&nt.gi[k], &fin.ds[k]);
                    s[k].axpy(alpha, &dsm);
                    s[k] = s[k].symmetrized();
                }
                Block::Diag(_) => {
                    x[k].axpy(alpha, &congruence(&nt.g[k], &fin.dx[k]));
                    s[k].axpy(alpha, &congruence(&nt.gi[k], &fin.ds[k]));
                }
            }
        }
        w += &fin.dw * alpha;
        y += &fin.dy * alpha;
        tau += alpha * fin.dtau;
        kappa += alpha * fin.dkap;
    }

    if status != SolveStatus::Optimal {
        if let Some((bx, by, bs, bw, bt, bp, bd, bg)) = best {
            x = bx;
            y = by;
            s = bs;
            w = bw;
            tau = bt;
            pinf = bp;
            dinf = bd;
            gap = bg;
        }
    }
    let xo: Vec<BlockMat> = x.iter().map(|xb| xb.scaled(1.0 / tau)).collect();
    let so: Vec<BlockMat> = s.iter().map(|sb| sb.scaled(1.0 / tau)).collect();
    let wo = &w / tau;
    let y_out: Vec<f64> = (0..m).map(|i| y[i] / tau / scales[i]).collect();
    let obj_primal = bdot(&c_iter, &xo) + cf.dot(&wo);
    let objective = bdot(&c_model, &xo) + cf.dot(&wo);
    let obj_dual: f64 = (0..m).map(|i| p.b[i] * y_out[i]).sum();

    SdpSolution {
        status,
        x: xo,
        s: so,
        y: y_out,
        w: wo.iter().copied().collect(),
        objective,
        obj_primal,
        obj_dual,
        iterations,
        pinf,
        dinf,
        gap,
    }
}

fn nt_scaling(blocks: &[Block], x: &[BlockMat], s: &[BlockMat]) -> Option<Scaling> {
    let mut g = Vec::with_capacity(blocks.len());
    let mut gi = Vec::with_capacity(blocks.len());
    let mut lam = Vec::with_capacity(blocks.len());
    for (k, &blk) in blocks.iter().enumerate() {
        match blk {
            Block::Dense(sz) => {
                let lx = Cholesky::new(x[k].as_dense().clone())?.l();
                let ls = Cholesky::new(s[k].as_dense().clone())?.l();
                let svd = (ls.transpose() * &lx).svd(false, true);
                let sig = svd.singular_values;
                if sig.min() <= 0.0 {
                    return None;
                }
                let vt = svd.v_t.expect("requested v_t");
                // G = Lx · V · diag(1/√σ), G⁻¹ = diag(√σ) · Vᵀ · Lx⁻¹
                let mut v = vt.transpose();
                for c in 0..sz {
                    let f = 1.0 / sig[c].sqrt();
                    v.column_mut(c).scale_mut(f);
                }
                let gk = &lx * v;
                let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(sz, sz))?;
                let mut vts = vt;
                for r in 0..sz {
                    let f = sig[r].sqrt();
                    vts.row_mut(r).scale_mut(f);
                }
                g.push(BlockMat::Dense(gk));
                gi.push(BlockMat::Dense(vts * lx_inv));
                lam.push(sig);
            }
            Block::Diag(_) => {
                let xv = x[k].as_diag();
                let sv = s[k].as_diag();
                if xv.iter().any(|&v| v <= 0.0) || sv.iter().any(|&v| v <= 0.0) {
                    return None;
                }
                let gk = xv.zip_map(sv, |a, b| (a / b).powf(0.25));
                gi.push(BlockMat::Diag(gk.map(|v| 1.0 / v)));
                g.push(BlockMat::Diag(gk));
                lam.push(xv.zip_map(sv, |a, b| (a * b).sqrt()));
            }
        }
    }
    Some(Scaling { g, gi, lam })
}

/// Shifted Cholesky of the Schur system. The shift is iteration-local: it
/// starts at zero and only engages (and then escalates a hundredfold) when a
/// factorization fails; a persistent shift poisons convergence.
fn factorize(
    m_mat: &DMatrix<f64>,
    f: &DMatrix<f64>,
    nf: usize,
    dmax: f64,
) -> Option<Factorization> {
    let m = m_mat.nrows();
    let mut rel_shift = 0.0f64;
    for _ in 0..24 {
        let rho = if rel_shift > 0.0 {
            (rel_shift * dmax).max(1e-10)
        } else {
            0.0
        };
        let shifted = if rho > 0.0 {
            let mut ms = m_mat.clone();
            for d in 0..m {
                ms[(d, d)] += rho;
            }
            ms
        } else {
            m_mat.clone()
        };
        if let Some(cm) = Cholesky::new(shifted) {
            if nf == 0 {
                return Some(Factorization { cm, cw: None });
            }
            let minv_f = cm.solve(f);
            let mut wf = f.transpose() * minv_f;
            for d in 0..nf {
                wf[(d, d)] += rho;
            }
            if let Some(cw) = Cholesky::new(wf) {
                return Some(Factorization { cm, cw: Some(cw) });
            }
        }
        rel_shift = (rel_shift * 100.0).max(1e-14);
    }
    None
}

/// Solve the block Lyapunov system Λ∘D = R in the scaled space:
/// dense Dᵢⱼ = 2Rᵢⱼ/(λᵢ+λⱼ), diagonal D = R/λ.
fn lyap_inv(blocks: &[Block], lam: &[DVector<f64>], rs: &[BlockMat]) -> Vec<BlockMat> {
    blocks
        .iter()
        .zip(lam)
        .zip(rs)
        .map(|((&blk, lm), r)| match blk {
            Block::Dense(sz) => {
                let rm = r.as_dense();
                BlockMat::Dense(DMatrix::from_fn(sz, sz, |i, j| {
                    2.0 * rm[(i, j)] / (lm[i] + lm[j])
                }))
            }
            Block::Diag(_) => BlockMat::Diag(r.as_diag().component_div(lm)),
        })
        .collect()
}

/// Largest step preserving X ≻ 0, S ≻ 0, τ > 0, κ > 0 along the direction,
/// in the scaled coordinates where the current point is diag(λ).
fn steplen(blocks: &[Block], lam: &[DVector<f64>], dir: &Direction, tau: f64, kappa: f64) -> f64 {
    let mut amax = f64::INFINITY;
    for part in [&dir.dx, &dir.ds] {
        for ((&blk, lm), d) in blocks.iter().zip(lam).zip(part) {
            match blk {
                Block::Dense(sz) => {
                    let dm = d.as_dense();
                    let w2 = DMatrix::from_fn(sz, sz, |i, j| {
                        dm[(i, j)] / (lm[i].sqrt() * lm[j].sqrt())
                    });
                    let sym = 0.5 * (&w2 + w2.transpose());
                    let lo = sym.symmetric_eigen().eigenvalues.min();
                    if lo < 0.0 {
                        amax = amax.min(-1.0 / lo);
                    }
                }
                Block::Diag(_) => {
                    let dv = d.as_diag();
                    for r in 0..dv.len() {
                        if dv[r] < 0.0 {
                            amax = amax.min(lm[r] / -dv[r]);
                        }
                    }
                }
            }
        }
    }
    if dir.dtau < 0.0 {
        amax = amax.min(-tau / dir.dtau);
    }
    if dir.dkap < 0.0 {
        amax = amax.min(-kappa / dir.dkap);
    }
    amax
}
