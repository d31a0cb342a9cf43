use nalgebra::{DMatrix, DVector};

/// Cone block descriptor: a dense PSD block or a diagonal block (elementwise
/// nonnegative, used for scalar bounds like λ ≥ ε and δ ≥ 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Dense(usize),
    Diag(usize),
}

impl Block {
    pub fn size(&self) -> usize {
        match *self {
            Block::Dense(s) | Block::Diag(s) => s,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Block::Dense(_))
    }
}

/// Per-block data: a full symmetric matrix for dense blocks, the diagonal
/// for diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockMat {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl BlockMat {
    pub fn zeros(block: Block) -> Self {
        match block {
            Block::Dense(s) => BlockMat::Dense(DMatrix::zeros(s, s)),
            Block::Diag(s) => BlockMat::Diag(DVector::zeros(s)),
        }
    }

    pub fn identity(block: Block, scale: f64) -> Self {
        match block {
            Block::Dense(s) => BlockMat::Dense(DMatrix::identity(s, s) * scale),
            Block::Diag(s) => BlockMat::Diag(DVector::from_element(s, scale)),
        }
    }

    pub fn block(&self) -> Block {
        match self {
            BlockMat::Dense(m) => Block::Dense(m.nrows()),
            BlockMat::Diag(v) => Block::Diag(v.len()),
        }
    }

    pub fn matches(&self, block: Block) -> bool {
        self.block() == block
    }

    /// Frobenius inner product; both arguments must share a shape.
    pub fn dot(&self, other: &BlockMat) -> f64 {
        match (self, other) {
            (BlockMat::Dense(a), BlockMat::Dense(b)) => a.dot(b),
            (BlockMat::Diag(a), BlockMat::Diag(b)) => a.dot(b),
            _ => panic!("block kind mismatch"),
        }
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &BlockMat) {
        match (self, other) {
            (BlockMat::Dense(a), BlockMat::Dense(b)) => a.zip_apply(b, |ai, bi| *ai += c * bi),
            (BlockMat::Diag(a), BlockMat::Diag(b)) => a.axpy(c, b, 1.0),
            _ => panic!("block kind mismatch"),
        }
    }

    pub fn scale_mut(&mut self, c: f64) {
        match self {
            BlockMat::Dense(a) => *a *= c,
            BlockMat::Diag(a) => *a *= c,
        }
    }

    pub fn scaled(&self, c: f64) -> BlockMat {
        let mut out = self.clone();
        out.scale_mut(c);
        out
    }

    /// 0.5 (Z + Zᵀ) for dense blocks; identity on diagonal blocks.
    pub fn symmetrized(&self) -> BlockMat {
        match self {
            BlockMat::Dense(a) => BlockMat::Dense(0.5 * (a + a.transpose())),
            BlockMat::Diag(v) => BlockMat::Diag(v.clone()),
        }
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => {
                let mut worst = 0.0f64;
                for i in 0..a.nrows() {
                    for j in (i + 1)..a.ncols() {
                        worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
                    }
                }
                worst
            }
            BlockMat::Diag(_) => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
            BlockMat::Diag(v) => v.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            BlockMat::Dense(a) => a.iter().all(|v| v.is_finite()),
            BlockMat::Diag(v) => v.iter().all(|v| v.is_finite()),
        }
    }

    /// Smallest eigenvalue of the symmetric part (the value itself for
    /// diagonal blocks).
    pub fn min_eig(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => {
                if a.nrows() == 0 {
                    return 0.0;
                }
                let sym = 0.5 * (a + a.transpose());
                sym.symmetric_eigen().eigenvalues.min()
            }
            BlockMat::Diag(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_eig(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => {
                if a.nrows() == 0 {
                    return 0.0;
                }
                let sym = 0.5 * (a + a.transpose());
                sym.symmetric_eigen().eigenvalues.max()
            }
            BlockMat::Diag(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn as_dense(&self) -> &DMatrix<f64> {
        match self {
            BlockMat::Dense(m) => m,
            BlockMat::Diag(_) => panic!("expected dense block"),
        }
    }

    pub fn as_diag(&self) -> &DVector<f64> {
        match self {
            BlockMat::Diag(v) => v,
            BlockMat::Dense(_) => panic!("expected diagonal block"),
        }
    }
}

/// Sum of per-block inner products.
pub fn bdot(a: &[BlockMat], b: &[BlockMat]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dot(q)).sum()
}

/// Gᵀ Z G per block (elementwise g·z·g for diagonal blocks).
pub fn congruence(g: &BlockMat, z: &BlockMat) -> BlockMat {
    match (g, z) {
        (BlockMat::Dense(g), BlockMat::Dense(z)) => BlockMat::Dense(g.transpose() * z * g),
        (BlockMat::Diag(g), BlockMat::Diag(z)) => {
            BlockMat::Diag(g.component_mul(z).component_mul(g))
        }
        _ => panic!("block kind mismatch"),
    }
}

/// G Z Gᵀ per block (same elementwise form for diagonal blocks).
pub fn congruence_t(g: &BlockMat, z: &BlockMat) -> BlockMat {
    match (g, z) {
        (BlockMat::Dense(g), BlockMat::Dense(z)) => BlockMat::Dense(g * z * g.transpose()),
        (BlockMat::Diag(g), BlockMat::Diag(z)) => {
            BlockMat::Diag(g.component_mul(z).component_mul(g))
        }
        _ => panic!("block kind mismatch"),
    }
}
