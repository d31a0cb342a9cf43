use crate::system::lie_derivative;
use crate::{ControlAffineSystem, DynamicsError, RelativeDegreeProfile, SINGULARITY_THRESHOLD};
use nalgebra::{DMatrix, DVector};
use reachstep_symbolic::{Expression, SymbolicError};

/// The input-output relation at full differentiation order:
/// y_i^{(rᵢ)} = Lfr[i] + Σⱼ A[i][j]·uⱼ.
#[derive(Debug, Clone)]
pub struct DecouplingData {
    a: Vec<Vec<Expression>>,
    lfr: Vec<Expression>,
}

pub fn decoupling(sys: &ControlAffineSystem, profile: &RelativeDegreeProfile) -> DecouplingData {
    let m = sys.input_dim();
    let mut a = Vec::with_capacity(m);
    let mut lfr = Vec::with_capacity(m);
    for (i, &ri) in profile.r.iter().enumerate() {
        // L_f^{rᵢ−1} hᵢ, the last chain entry
        let mut scalar = sys.outputs()[i].clone();
        for _ in 1..ri {
            scalar = lie_derivative(&scalar, sys.drift());
        }
        let row: Vec<Expression> = (0..m)
            .map(|j| lie_derivative(&scalar, &sys.g_column(j)))
            .collect();
        a.push(row);
        lfr.push(lie_derivative(&scalar, sys.drift()));
    }
    DecouplingData { a, lfr }
}

impl DecouplingData {
    pub fn input_dim(&self) -> usize {
        self.lfr.len()
    }

    pub fn a(&self) -> &[Vec<Expression>] {
        &self.a
    }

    pub fn lfr(&self) -> &[Expression] {
        &self.lfr
    }

    pub fn eval_a(&self, x: &[f64]) -> Result<DMatrix<f64>, SymbolicError> {
        let m = self.input_dim();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.a[i][j].eval(x)?;
            }
        }
        Ok(out)
    }

    pub fn eval_lfr(&self, x: &[f64]) -> Result<Vec<f64>, SymbolicError> {
        self.lfr.iter().map(|e| e.eval(x)).collect()
    }
}

/// u = A(x)⁻¹ (v − L_f^r h) at a concrete state, by LU with partial
/// pivoting. A is also screened by its smallest singular value so that
/// nearly-rank-deficient points fail loudly instead of producing huge inputs.
pub fn feedback_linearize(
    dec: &DecouplingData,
    v_virtual: &[Expression],
    x: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    let m = dec.input_dim();
    assert_eq!(v_virtual.len(), m, "one virtual input per output");
    let a = dec.eval_a(x)?;
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        rhs[i] = v_virtual[i].eval(x)? - dec.lfr[i].eval(x)?;
    }
    solve_decoupled(a, rhs)
}

/// Shared numeric core; also used by the simulator once expressions are
/// compiled out of the hot path.
pub fn solve_decoupled(a: DMatrix<f64>, rhs: DVector<f64>) -> Result<Vec<f64>, DynamicsError> {
    let sv = a.clone().svd(false, false).singular_values;
    let sigma_min = sv.min();
    let lu = a.lu();
    let det = lu.determinant();
    if det.abs() < SINGULARITY_THRESHOLD || sigma_min < SINGULARITY_THRESHOLD {
        return Err(DynamicsError::SingularDecoupling { det, sigma_min });
    }
    let u = lu
        .solve(&rhs)
        .ok_or(DynamicsError::SingularDecoupling { det, sigma_min })?;
    Ok(u.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{vector_relative_degree, ZeroTestConfig};
    use reachstep_symbolic::{parse_expression, VarTable};

    fn dubins() -> (ControlAffineSystem, RelativeDegreeProfile) {
        let t = VarTable::from_names(["x1", "x2", "theta", "v"]).unwrap();
        let f: Vec<_> = ["v*cos(theta)", "v*sin(theta)", "0", "0"]
            .iter()
            .map(|s| parse_expression(s, &t).unwrap())
            .collect();
        let zero = Expression::zero;
        let one = Expression::one;
        let g = vec![
            vec![zero(), zero()],
            vec![zero(), zero()],
            vec![one(), zero()],
            vec![zero(), one()],
        ];
        let h = vec![
            parse_expression("x1", &t).unwrap(),
            parse_expression("x2", &t).unwrap(),
        ];
        let sys = ControlAffineSystem::new(
            t,
            f,
            g,
            h,
            vec![(-2.4, 2.4), (-1.2, 1.4), (-3.15, 3.15), (5.0, 90.0)],
        )
        .unwrap();
        let p = vector_relative_degree(&sys, &ZeroTestConfig::default()).unwrap();
        (sys, p)
    }

    #[test]
    fn dubins_decoupling_matrix() {
        let (sys, p) = dubins();
        assert_eq!(p.r, vec![2, 2]);
        let dec = decoupling(&sys, &p);
        // A = [[-v sin θ, cos θ], [v cos θ, sin θ]], det = -v
        for (theta, v) in [(0.3, 7.0), (-1.2, 40.0), (2.0, 5.5)] {
            let x = [0.0, 0.0, theta, v];
            let a = dec.eval_a(&x).unwrap();
            let expect = [
                [-v * theta.sin(), theta.cos()],
                [v * theta.cos(), theta.sin()],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[(i, j)] - expect[i][j]).abs() < 1e-12);
                }
            }
            let det = a.determinant();
            assert!((det + v).abs() < 1e-10 * v.abs());
            // L_f^2 h = 0 for this drift
            assert_eq!(dec.eval_lfr(&x).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn dubins_singular_at_zero_speed() {
        let (sys, p) = dubins();
        let dec = decoupling(&sys, &p);
        let v = vec![Expression::one(), Expression::one()];
        match feedback_linearize(&dec, &v, &[0.0, 0.0, 0.4, 0.0]) {
            Err(DynamicsError::SingularDecoupling { det, .. }) => assert!(det.abs() < 1e-10),
            other => panic!("expected singular decoupling, got {other:?}"),
        }
    }

    #[test]
    fn identity_decoupling_passes_v_through() {
        // double integrator: A = [1], L_f^2 h = 0, so u = v
        let t = VarTable::from_names(["y", "dy"]).unwrap();
        let f = vec![parse_expression("dy", &t).unwrap(), Expression::zero()];
        let g = vec![vec![Expression::zero()], vec![Expression::one()]];
        let h = vec![parse_expression("y", &t).unwrap()];
        let sys = ControlAffineSystem::new(t, f, g, h, vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let p = vector_relative_degree(&sys, &ZeroTestConfig::default()).unwrap();
        assert_eq!(p.r, vec![2]);
        let dec = decoupling(&sys, &p);
        let u = feedback_linearize(&dec, &[Expression::constant(3.0).unwrap()], &[0.2, -0.5])
            .unwrap();
        assert!((u[0] - 3.0).abs() < 1e-15);

        // v = L_f^r h means u = 0
        let u0 = feedback_linearize(&dec, &[Expression::zero()], &[0.2, -0.5]).unwrap();
        assert_eq!(u0, vec![0.0]);
    }
}
