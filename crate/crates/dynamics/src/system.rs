use crate::DynamicsError;
use reachstep_symbolic::{Expression, VarTable};

/// The model ẋ = f(x) + Σⱼ gⱼ(x)·uⱼ with outputs y = h(x), together with the
/// closed state box used wherever a "for all x" condition is sampled.
#[derive(Debug, Clone)]
pub struct ControlAffineSystem {
    vars: VarTable,
    f: Vec<Expression>,
    g: Vec<Vec<Expression>>,
    h: Vec<Expression>,
    state_box: Vec<(f64, f64)>,
}

impl ControlAffineSystem {
    /// `g` is row-major: `g[k][j]` multiplies input j in the equation for
    /// state k.
    pub fn new(
        vars: VarTable,
        f: Vec<Expression>,
        g: Vec<Vec<Expression>>,
        h: Vec<Expression>,
        state_box: Vec<(f64, f64)>,
    ) -> Result<Self, DynamicsError> {
        let n = vars.len();
        if n == 0 {
            return Err(DynamicsError::Shape("state dimension is zero".into()));
        }
        if f.len() != n {
            return Err(DynamicsError::Shape(format!(
                "drift has {} rows for {n} states",
                f.len()
            )));
        }
        if g.len() != n {
            return Err(DynamicsError::Shape(format!(
                "input matrix has {} rows for {n} states",
                g.len()
            )));
        }
        let m = g[0].len();
        if m == 0 {
            return Err(DynamicsError::Shape("input dimension is zero".into()));
        }
        if let Some(bad) = g.iter().position(|row| row.len() != m) {
            return Err(DynamicsError::Shape(format!(
                "input matrix row {bad} has {} columns, expected {m}",
                g[bad].len()
            )));
        }
        if h.len() != m {
            return Err(DynamicsError::Shape(format!(
                "{} outputs for {m} inputs; the decoupling matrix must be square",
                h.len()
            )));
        }
        if state_box.len() != n {
            return Err(DynamicsError::Shape(format!(
                "state box has {} intervals for {n} states",
                state_box.len()
            )));
        }
        for (k, &(lo, hi)) in state_box.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DynamicsError::BadStateBox {
                    var: vars.name(k).to_string(),
                    lo,
                    hi,
                });
            }
        }
        let check = |e: &Expression, what: &str| -> Result<(), DynamicsError> {
            match e.max_var() {
                Some(i) if i >= n => Err(DynamicsError::Shape(format!(
                    "{what} references variable index {i}, but the system has {n} states"
                ))),
                _ => Ok(()),
            }
        };
        for (k, e) in f.iter().enumerate() {
            check(e, &format!("f[{k}]"))?;
        }
        for (k, row) in g.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check(e, &format!("g[{k}][{j}]"))?;
            }
        }
        for (i, e) in h.iter().enumerate() {
            check(e, &format!("h[{i}]"))?;
        }
        Ok(ControlAffineSystem {
            vars,
            f,
            g,
            h,
            state_box,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.vars.len()
    }

    pub fn input_dim(&self) -> usize {
        self.g[0].len()
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn drift(&self) -> &[Expression] {
        &self.f
    }

    pub fn input_matrix(&self) -> &[Vec<Expression>] {
        &self.g
    }

    pub fn g_column(&self, j: usize) -> Vec<Expression> {
        self.g.iter().map(|row| row[j].clone()).collect()
    }

    pub fn outputs(&self) -> &[Expression] {
        &self.h
    }

    pub fn state_box(&self) -> &[(f64, f64)] {
        &self.state_box
    }
}

/// L_field scalar = Σₖ ∂scalar/∂xₖ · fieldₖ.
///
/// Constant-folding in the expression constructors drops the zero terms, so
/// chains over sparse systems stay small.
pub fn lie_derivative(scalar: &Expression, field: &[Expression]) -> Expression {
    debug_assert!(scalar.max_var().map(|i| i < field.len()).unwrap_or(true));
    let mut acc = Expression::zero();
    for (k, fk) in field.iter().enumerate() {
        acc = acc.add(&scalar.differentiate(k).mul(fk));
    }
    acc
}
