use crate::{Block, BlockMat, SdpError};
use nalgebra::{DMatrix, DVector};

/// min ⟨C,X⟩ + cf·w  subject to  ⟨Aᵢ,X⟩ + Fᵢ·w = bᵢ,  X in the block cone,
/// w ∈ ℝ^{nf} free.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub(crate) blocks: Vec<Block>,
    pub(crate) c: Vec<BlockMat>,
    pub(crate) a: Vec<Vec<BlockMat>>,
    pub(crate) b: Vec<f64>,
    pub(crate) f: DMatrix<f64>,
    pub(crate) cf: DVector<f64>,
}

impl SdpProblem {
    pub fn new(
        blocks: Vec<Block>,
        c: Vec<BlockMat>,
        a: Vec<Vec<BlockMat>>,
        b: Vec<f64>,
        f: DMatrix<f64>,
        cf: DVector<f64>,
    ) -> Result<Self, SdpError> {
        let bad = |msg: String| Err(SdpError::InvalidProblem(msg));
        let m = b.len();
        if c.len() != blocks.len() {
            return bad(format!(
                "objective has {} blocks, structure has {}",
                c.len(),
                blocks.len()
            ));
        }
        if a.len() != m {
            return bad(format!("{} constraint rows for {} right-hand sides", a.len(), m));
        }
        if f.nrows() != m {
            return bad(format!(
                "free-scalar matrix has {} rows for {} constraints",
                f.nrows(),
                m
            ));
        }
        if cf.len() != f.ncols() {
            return bad(format!(
                "free-scalar objective has {} entries for {} columns",
                cf.len(),
                f.ncols()
            ));
        }
        if !b.iter().all(|v| v.is_finite())
            || !f.iter().all(|v| v.is_finite())
            || !cf.iter().all(|v| v.is_finite())
        {
            return bad("non-finite constraint data".into());
        }
        let check_mat = |mat: &BlockMat, blk: Block, what: &str| -> Result<(), SdpError> {
            if !mat.matches(blk) {
                return Err(SdpError::InvalidProblem(format!(
                    "{what} does not match its block shape"
                )));
            }
            if !mat.is_finite() {
                return Err(SdpError::InvalidProblem(format!("{what} has non-finite entries")));
            }
            let asym = mat.max_abs_asymmetry();
            if asym > 1e-12 * (1.0 + mat.max_abs()) {
                return Err(SdpError::InvalidProblem(format!(
                    "{what} is asymmetric by {asym:.3e}"
                )));
            }
            Ok(())
        };
        for (k, (mat, &blk)) in c.iter().zip(&blocks).enumerate() {
            check_mat(mat, blk, &format!("objective block {k}"))?;
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != blocks.len() {
                return bad(format!(
                    "constraint {i} has {} blocks, structure has {}",
                    row.len(),
                    blocks.len()
                ));
            }
            for (k, (mat, &blk)) in row.iter().zip(&blocks).enumerate() {
                check_mat(mat, blk, &format!("constraint {i} block {k}"))?;
            }
        }
        for &blk in &blocks {
            if blk.is_dense() && blk.size() > 300 {
                log::warn!(
                    "dense block of size {} exceeds the intended envelope (300); \
                     expect slow dense factorizations",
                    blk.size()
                );
            }
        }
        Ok(SdpProblem {
            blocks,
            c,
            a,
            b,
            f,
            cf,
        })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn objective_blocks(&self) -> &[BlockMat] {
        &self.c
    }

    pub fn constraints(&self) -> &[Vec<BlockMat>] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn free_matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn free_objective(&self) -> &DVector<f64> {
        &self.cf
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn num_free(&self) -> usize {
        self.f.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Trace regularization added to dense-block objectives inside the
    /// iteration only; reported objectives always use the pure model.
    pub centering_reg: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
            centering_reg: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<BlockMat>,
    pub s: Vec<BlockMat>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    /// Pure model objective ⟨C,X⟩ + cf·w, excluding any centering
    /// regularization.
    pub objective: f64,
    /// Primal objective as the iteration saw it (centering included).
    pub obj_primal: f64,
    pub obj_dual: f64,
    pub iterations: usize,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
}
