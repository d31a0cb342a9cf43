use std::collections::BTreeMap;

use crate::{Expression, SymbolicError};

/// Total degree of a polynomial. The zero polynomial gets a distinct
/// minus-infinity marker rather than a sentinel number, and the marker
/// orders below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    /// Finite value, or `fallback` for the zero polynomial. Degree
    /// arithmetic in callers usually wants max(0, ...) semantics.
    pub fn finite_or(self, fallback: u32) -> u32 {
        match self {
            Degree::MinusInfinity => fallback,
            Degree::Finite(d) => d,
        }
    }
}

/// Sparse multivariate polynomial: exponent vector -> coefficient.
///
/// Invariants: every exponent vector has length `nvars`, no zero
/// coefficients are stored, and all coefficients are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        debug_assert!(c.is_finite());
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(SymbolicError::ExponentLength {
                    expected: nvars,
                    got: e.len(),
                });
            }
            if !c.is_finite() {
                return Err(SymbolicError::NonFiniteConstant(c));
            }
            p.insert(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, expo: &[u32]) -> f64 {
        self.terms.get(expo).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.degree() == Degree::Finite(0))
    }

    /// Constant value if the polynomial is constant (zero counts).
    pub fn constant_value(&self) -> Option<f64> {
        if self.terms.is_empty() {
            return Some(0.0);
        }
        if self.is_constant() {
            return self.terms.values().next().copied();
        }
        None
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    fn assert_same_vars(&self, other: &Self) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomial arity mismatch: {} vs {}",
            self.nvars, other.nvars
        );
    }

    fn insert(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let v = o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), -*c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.nvars);
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn differentiate(&self, index: usize) -> Self {
        assert!(index < self.nvars, "variable index out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[index];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[index] = k - 1;
            out.insert(e2, c * k as f64);
        }
        out
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "evaluation point arity mismatch");
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= x.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn to_expression(&self) -> Expression {
        self.to_expression_mapped(&(0..self.nvars).collect::<Vec<_>>())
    }

    /// Expression with variable `i` rendered as `Expression::var(map[i])`,
    /// for embedding output-variable polynomials into a larger table.
    pub fn to_expression_mapped(&self, map: &[usize]) -> Expression {
        assert_eq!(map.len(), self.nvars, "variable map arity mismatch");
        let mut acc = Expression::zero();
        for (e, c) in &self.terms {
            let mut term = Expression::raw_const(*c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&Expression::var(map[i]).pow(k));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}
