use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Polynomial, SymbolicError, VarTable};

#[derive(Debug, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Add(Expression, Expression),
    Sub(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    Pow(Expression, u32),
    Sin(Expression),
    Cos(Expression),
}

/// Immutable scalar expression. Cloning is cheap (shared subtrees).
#[derive(Clone, Debug, PartialEq)]
pub struct Expression(Arc<Node>);

// Seed for the numeric fallback of `is_identically_zero`; fixed so the test
// is deterministic across runs.
const ZERO_TEST_SEED: u64 = 0x5EED;

impl Expression {
    fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(n: Node) -> Self {
        Expression(Arc::new(n))
    }

    // Internal constructor for constants already known to be finite.
    pub(crate) fn raw_const(c: f64) -> Self {
        debug_assert!(c.is_finite());
        Self::wrap(Node::Const(c))
    }

    pub fn constant(c: f64) -> Result<Self, SymbolicError> {
        if !c.is_finite() {
            return Err(SymbolicError::NonFiniteConstant(c));
        }
        Ok(Self::raw_const(c))
    }

    pub fn var(index: usize) -> Self {
        Self::wrap(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn zero() -> Self {
        Self::raw_const(0.0)
    }

    pub fn one() -> Self {
        Self::raw_const(1.0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let v = a + b;
            if v.is_finite() {
                return Self::raw_const(v);
            }
        }
        if self.as_const() == Some(0.0) {
            return rhs.clone();
        }
        if rhs.as_const() == Some(0.0) {
            return self.clone();
        }
        Self::wrap(Node::Add(self.clone(), rhs.clone()))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let v = a - b;
            if v.is_finite() {
                return Self::raw_const(v);
            }
        }
        if rhs.as_const() == Some(0.0) {
            return self.clone();
        }
        Self::wrap(Node::Sub(self.clone(), rhs.clone()))
    }

    pub fn neg(&self) -> Self {
        Self::zero().sub(self)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let v = a * b;
            if v.is_finite() {
                return Self::raw_const(v);
            }
        }
        if self.as_const() == Some(0.0) || rhs.as_const() == Some(0.0) {
            return Self::zero();
        }
        if self.as_const() == Some(1.0) {
            return rhs.clone();
        }
        if rhs.as_const() == Some(1.0) {
            return self.clone();
        }
        Self::wrap(Node::Mul(self.clone(), rhs.clone()))
    }

    /// Fails only on a literal zero constant denominator; division by an
    /// expression that merely evaluates to zero is caught at evaluation time.
    pub fn div(&self, rhs: &Self) -> Result<Self, SymbolicError> {
        if rhs.as_const() == Some(0.0) {
            return Err(SymbolicError::ZeroDenominator);
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let v = a / b;
            if v.is_finite() {
                return Ok(Self::raw_const(v));
            }
        }
        if rhs.as_const() == Some(1.0) {
            return Ok(self.clone());
        }
        Ok(Self::wrap(Node::Div(self.clone(), rhs.clone())))
    }

    pub fn pow(&self, k: u32) -> Self {
        match k {
            0 => Self::one(),
            1 => self.clone(),
            _ => {
                if let Some(c) = self.as_const() {
                    let v = c.powi(k as i32);
                    if v.is_finite() {
                        return Self::raw_const(v);
                    }
                }
                Self::wrap(Node::Pow(self.clone(), k))
            }
        }
    }

    pub fn sin(&self) -> Self {
        if let Some(c) = self.as_const() {
            return Self::raw_const(c.sin());
        }
        Self::wrap(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        if let Some(c) = self.as_const() {
            return Self::raw_const(c.cos());
        }
        Self::wrap(Node::Cos(self.clone()))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Node::Pow(a, _) => a.max_var(),
            Node::Sin(a) | Node::Cos(a) => a.max_var(),
        }
    }

    /// True if the variable with this index occurs anywhere in the tree.
    pub fn references_var(&self, index: usize) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == index,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.references_var(index) || b.references_var(index)
            }
            Node::Pow(a, _) => a.references_var(index),
            Node::Sin(a) | Node::Cos(a) => a.references_var(index),
        }
    }

    pub fn eval(&self, vals: &[f64]) -> Result<f64, SymbolicError> {
        match self.node() {
            Node::Const(c) => Ok(*c),
            Node::Var(i) => vals.get(*i).copied().ok_or(SymbolicError::UnknownVariable {
                index: *i,
                nvars: vals.len(),
            }),
            Node::Add(a, b) => Ok(a.eval(vals)? + b.eval(vals)?),
            Node::Sub(a, b) => Ok(a.eval(vals)? - b.eval(vals)?),
            Node::Mul(a, b) => Ok(a.eval(vals)? * b.eval(vals)?),
            Node::Div(a, b) => {
                let den = b.eval(vals)?;
                if den == 0.0 {
                    return Err(SymbolicError::DivisionByZero {
                        subexpr: self.to_canonical_string(),
                    });
                }
                Ok(a.eval(vals)? / den)
            }
            Node::Pow(a, k) => Ok(a.eval(vals)?.powi(*k as i32)),
            Node::Sin(a) => Ok(a.eval(vals)?.sin()),
            Node::Cos(a) => Ok(a.eval(vals)?.cos()),
        }
    }

    /// Partial derivative with respect to the variable at `index`.
    pub fn differentiate(&self, index: usize) -> Self {
        match self.node() {
            Node::Const(_) => Self::zero(),
            Node::Var(i) => {
                if *i == index {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(a, b) => a.differentiate(index).add(&b.differentiate(index)),
            Node::Sub(a, b) => a.differentiate(index).sub(&b.differentiate(index)),
            Node::Mul(a, b) => a
                .differentiate(index)
                .mul(b)
                .add(&a.mul(&b.differentiate(index))),
            Node::Div(a, b) => {
                let da = a.differentiate(index);
                if let Some(c) = b.as_const() {
                    // b is a nonzero constant; prefer a plain scale when 1/c
                    // stays finite.
                    let inv = 1.0 / c;
                    if inv.is_finite() {
                        return da.mul(&Self::raw_const(inv));
                    }
                    return Self::wrap(Node::Div(da, b.clone()));
                }
                let db = b.differentiate(index);
                let num = da.mul(b).sub(&a.mul(&db));
                let den = b.pow(2);
                if num.as_const() == Some(0.0) {
                    return Self::zero();
                }
                // den is a Pow of a non-constant, never a zero constant
                Self::wrap(Node::Div(num, den))
            }
            Node::Pow(a, k) => {
                let da = a.differentiate(index);
                Self::raw_const(*k as f64).mul(&a.pow(k - 1)).mul(&da)
            }
            Node::Sin(a) => a.cos().mul(&a.differentiate(index)),
            Node::Cos(a) => a.sin().neg().mul(&a.differentiate(index)),
        }
    }

    /// Simultaneous substitution: every listed variable is replaced in one
    /// pass, and replacement expressions are not substituted into again.
    pub fn substitute(&self, subs: &[(usize, Expression)]) -> Result<Self, SymbolicError> {
        match self.node() {
            Node::Const(_) => Ok(self.clone()),
            Node::Var(i) => Ok(subs
                .iter()
                .find(|(j, _)| j == i)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone())),
            Node::Add(a, b) => Ok(a.substitute(subs)?.add(&b.substitute(subs)?)),
            Node::Sub(a, b) => Ok(a.substitute(subs)?.sub(&b.substitute(subs)?)),
            Node::Mul(a, b) => Ok(a.substitute(subs)?.mul(&b.substitute(subs)?)),
            Node::Div(a, b) => a.substitute(subs)?.div(&b.substitute(subs)?),
            Node::Pow(a, k) => Ok(a.substitute(subs)?.pow(*k)),
            Node::Sin(a) => Ok(a.substitute(subs)?.sin()),
            Node::Cos(a) => Ok(a.substitute(subs)?.cos()),
        }
    }

    /// Structural conversion to a polynomial in `nvars` variables.
    ///
    /// `Ok(None)` is the distinguished "not a polynomial" outcome, produced
    /// by division with a non-constant (or identically zero) denominator and
    /// by `sin`/`cos` of a variable-containing argument. An out-of-range
    /// variable index is a genuine error.
    pub fn to_polynomial(&self, nvars: usize) -> Result<Option<Polynomial>, SymbolicError> {
        match self.node() {
            Node::Const(c) => Ok(Some(Polynomial::constant(nvars, *c))),
            Node::Var(i) => {
                if *i >= nvars {
                    return Err(SymbolicError::UnknownVariable {
                        index: *i,
                        nvars,
                    });
                }
                Ok(Some(Polynomial::var(nvars, *i)))
            }
            Node::Add(a, b) => Ok(match (a.to_polynomial(nvars)?, b.to_polynomial(nvars)?) {
                (Some(p), Some(q)) => Some(p.add(&q)),
                _ => None,
            }),
            Node::Sub(a, b) => Ok(match (a.to_polynomial(nvars)?, b.to_polynomial(nvars)?) {
                (Some(p), Some(q)) => Some(p.sub(&q)),
                _ => None,
            }),
            Node::Mul(a, b) => Ok(match (a.to_polynomial(nvars)?, b.to_polynomial(nvars)?) {
                (Some(p), Some(q)) => Some(p.mul(&q)),
                _ => None,
            }),
            Node::Div(a, b) => {
                let num = a.to_polynomial(nvars)?;
                let den = b.to_polynomial(nvars)?;
                Ok(match (num, den) {
                    (Some(p), Some(q)) => match q.constant_value() {
                        Some(c) if c != 0.0 && (1.0 / c).is_finite() => Some(p.scale(1.0 / c)),
                        _ => None,
                    },
                    _ => None,
                })
            }
            Node::Pow(a, k) => Ok(a.to_polynomial(nvars)?.map(|p| p.powi(*k))),
            Node::Sin(a) => Ok(a
                .to_polynomial(nvars)?
                .and_then(|p| p.constant_value())
                .map(|c| Polynomial::constant(nvars, c.sin()))),
            Node::Cos(a) => Ok(a
                .to_polynomial(nvars)?
                .and_then(|p| p.constant_value())
                .map(|c| Polynomial::constant(nvars, c.cos()))),
        }
    }

    /// Zero test: structural when the expression converts to a polynomial,
    /// otherwise `|value| <= tol` at `samples` points drawn from `box_` with
    /// a fixed seed.
    ///
    /// The numeric fallback has a documented false-positive mode: an
    /// expression that is uniformly tiny but nonzero on the box (for example
    /// `x * 1e-12` against the default tolerance of 1e-9) is classified as
    /// zero.
    pub fn is_identically_zero(
        &self,
        box_: &[(f64, f64)],
        samples: usize,
        tol: f64,
    ) -> Result<bool, SymbolicError> {
        if let Some(p) = self.to_polynomial(box_.len())? {
            return Ok(p.is_zero());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ZERO_TEST_SEED);
        let mut point = vec![0.0; box_.len()];
        for _ in 0..samples {
            for (slot, &(lo, hi)) in point.iter_mut().zip(box_) {
                *slot = if lo < hi { rng.random_range(lo..hi) } else { lo };
            }
            if self.eval(&point)?.abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Renders with names from `table`; the output parses back to an
    /// identical tree under the same table.
    pub fn to_string_with(&self, table: &VarTable) -> String {
        let mut out = String::new();
        self.write(&mut out, 0, &|i| table.name(i).to_string());
        out
    }

    /// Rendering with positional `x{i}` names, used in error messages.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0, &|i| format!("x{i}"));
        out
    }

    // prec: 1 additive context, 2 multiplicative, 3 unary/÷-rhs, 4 power base.
    // Right operands print one level tighter than left so the output reparses
    // to the identical tree (the parser is left-associative).
    fn write(&self, out: &mut String, prec: u8, name: &dyn Fn(usize) -> String) {
        match self.node() {
            Node::Const(c) => {
                if *c < 0.0 && prec >= 2 {
                    let _ = write!(out, "({c})");
                } else {
                    let _ = write!(out, "{c}");
                }
            }
            Node::Var(i) => out.push_str(&name(*i)),
            Node::Add(a, b) => {
                let paren = prec >= 2;
                if paren {
                    out.push('(');
                }
                a.write(out, 1, name);
                out.push_str(" + ");
                b.write(out, 2, name);
                if paren {
                    out.push(')');
                }
            }
            Node::Sub(a, b) => {
                let unary = a.as_const() == Some(0.0);
                let paren = prec >= 2;
                if paren {
                    out.push('(');
                }
                if unary {
                    out.push('-');
                    b.write(out, 3, name);
                } else {
                    a.write(out, 1, name);
                    out.push_str(" - ");
                    // right operand of '-' binds one level tighter
                    b.write(out, 2, name);
                }
                if paren {
                    out.push(')');
                }
            }
            Node::Mul(a, b) => {
                let paren = prec >= 3;
                if paren {
                    out.push('(');
                }
                a.write(out, 2, name);
                out.push_str(" * ");
                b.write(out, 3, name);
                if paren {
                    out.push(')');
                }
            }
            Node::Div(a, b) => {
                let paren = prec >= 3;
                if paren {
                    out.push('(');
                }
                a.write(out, 2, name);
                out.push_str(" / ");
                b.write(out, 3, name);
                if paren {
                    out.push(')');
                }
            }
            Node::Pow(a, k) => {
                // `^` does not chain in the grammar, so a power base that is
                // itself a power must be parenthesized.
                let paren = prec >= 4;
                if paren {
                    out.push('(');
                }
                a.write(out, 4, name);
                let _ = write!(out, "^{k}");
                if paren {
                    out.push(')');
                }
            }
            Node::Sin(a) => {
                out.push_str("sin(");
                a.write(out, 0, name);
                out.push(')');
            }
            Node::Cos(a) => {
                out.push_str("cos(");
                a.write(out, 0, name);
                out.push(')');
            }
        }
    }

    pub(crate) fn visit_postorder(&self, f: &mut impl FnMut(&Node)) {
        match self.node() {
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_postorder(f);
                b.visit_postorder(f);
            }
            Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) => a.visit_postorder(f),
            _ => {}
        }
        f(self.node());
    }
}
