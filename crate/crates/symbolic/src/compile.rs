use crate::expr::Node;
use crate::{Expression, SymbolicError};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(u32),
    Add,
    Sub,
    Mul,
    Div,
    Pow(u32),
    Sin,
    Cos,
}

/// Flat postfix form of an [`Expression`] for repeated evaluation.
///
/// Building the tape walks the tree once; evaluating it is a tight loop over
/// a slice with a reusable stack, which is what trajectory integration and
/// Monte Carlo sampling hammer on. Results are bitwise identical to
/// [`Expression::eval`] because both perform the same f64 operations in the
/// same order.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    stack_need: usize,
    min_vals: usize,
    source: Expression,
}

impl CompiledExpr {
    pub fn new(expr: &Expression) -> Self {
        let mut ops = Vec::new();
        expr.visit_postorder(&mut |n| {
            ops.push(match n {
                Node::Const(v) => Op::Const(*v),
                Node::Var(i) => Op::Var(*i as u32),
                Node::Add(..) => Op::Add,
                Node::Sub(..) => Op::Sub,
                Node::Mul(..) => Op::Mul,
                Node::Div(..) => Op::Div,
                Node::Pow(_, k) => Op::Pow(*k),
                Node::Sin(_) => Op::Sin,
                Node::Cos(_) => Op::Cos,
            });
        });
        let mut depth = 0usize;
        let mut need = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                Op::Pow(_) | Op::Sin | Op::Cos => {}
            }
            need = need.max(depth);
        }
        CompiledExpr {
            ops,
            stack_need: need,
            min_vals: expr.max_var().map(|i| i + 1).unwrap_or(0),
            source: expr.clone(),
        }
    }

    pub fn source(&self) -> &Expression {
        &self.source
    }

    /// Number of leading entries of `vals` the tape reads.
    pub fn min_vals(&self) -> usize {
        self.min_vals
    }

    /// Evaluates with a caller-owned scratch stack, so batch loops allocate
    /// once. The stack is cleared here; capacity is retained across calls.
    pub fn eval_into(&self, vals: &[f64], stack: &mut Vec<f64>) -> Result<f64, SymbolicError> {
        if vals.len() < self.min_vals {
            return Err(SymbolicError::UnknownVariable {
                index: self.min_vals - 1,
                nvars: vals.len(),
            });
        }
        stack.clear();
        stack.reserve(self.stack_need);
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Var(i) => stack.push(vals[i as usize]),
                Op::Add => {
                    let b = stack.pop().expect("tape balanced");
                    let a = stack.last_mut().expect("tape balanced");
                    *a += b;
                }
                Op::Sub => {
                    let b = stack.pop().expect("tape balanced");
                    let a = stack.last_mut().expect("tape balanced");
                    *a -= b;
                }
                Op::Mul => {
                    let b = stack.pop().expect("tape balanced");
                    let a = stack.last_mut().expect("tape balanced");
                    *a *= b;
                }
                Op::Div => {
                    let b = stack.pop().expect("tape balanced");
                    if b == 0.0 {
                        // Re-run the tree walk to name the offending
                        // subexpression in the error.
                        return self.source.eval(vals);
                    }
                    let a = stack.last_mut().expect("tape balanced");
                    *a /= b;
                }
                Op::Pow(k) => {
                    let a = stack.last_mut().expect("tape balanced");
                    *a = a.powi(k as i32);
                }
                Op::Sin => {
                    let a = stack.last_mut().expect("tape balanced");
                    *a = a.sin();
                }
                Op::Cos => {
                    let a = stack.last_mut().expect("tape balanced");
                    *a = a.cos();
                }
            }
        }
        debug_assert_eq!(stack.len(), 1);
        Ok(stack[0])
    }

    pub fn eval(&self, vals: &[f64]) -> Result<f64, SymbolicError> {
        let mut stack = Vec::with_capacity(self.stack_need);
        self.eval_into(vals, &mut stack)
    }
}
