use crate::system::lie_derivative;
use crate::{ControlAffineSystem, RelativeDegreeProfile};
use reachstep_symbolic::{Expression, SymbolicError, VarTable};

/// The chain coordinates: per output i the expressions
/// [hᵢ, L_f hᵢ, …, L_f^{rᵢ−1} hᵢ] over the state variables, plus a fresh
/// variable table naming each entry so controllers can be written in η and
/// pulled back to x by substitution.
#[derive(Debug, Clone)]
pub struct EtaMap {
    chains: Vec<Vec<Expression>>,
    eta_vars: VarTable,
    offsets: Vec<usize>,
    fully_linearizable: bool,
}

pub fn build_eta_map(sys: &ControlAffineSystem, profile: &RelativeDegreeProfile) -> EtaMap {
    let mut chains = Vec::with_capacity(sys.input_dim());
    for (i, &ri) in profile.r.iter().enumerate() {
        let mut chain = Vec::with_capacity(ri as usize);
        let mut scalar = sys.outputs()[i].clone();
        for _ in 0..ri {
            chain.push(scalar.clone());
            scalar = lie_derivative(&scalar, sys.drift());
        }
        chains.push(chain);
    }

    let mut eta_vars = VarTable::new();
    let mut offsets = Vec::with_capacity(chains.len());
    let mut next = 0usize;
    for (i, chain) in chains.iter().enumerate() {
        offsets.push(next);
        next += chain.len();
        for l in 0..chain.len() {
            // 1-based to match the usual subscripts; underscores dodge any
            // state variable that happens to be named like a chain symbol
            let mut name = format!("eta{}_{}", i + 1, l + 1);
            while sys.vars().index_of(&name).is_some() || eta_vars.index_of(&name).is_some() {
                name.insert(0, '_');
            }
            eta_vars.add(&name).expect("generated name is fresh");
        }
    }

    EtaMap {
        chains,
        eta_vars,
        offsets,
        fully_linearizable: profile.fully_linearizable,
    }
}

impl EtaMap {
    pub fn chains(&self) -> &[Vec<Expression>] {
        &self.chains
    }

    pub fn chain(&self, output: usize) -> &[Expression] {
        &self.chains[output]
    }

    /// Variable table of the η symbols, in the same output-major order as
    /// [`EtaMap::flat`].
    pub fn eta_vars(&self) -> &VarTable {
        &self.eta_vars
    }

    /// Flat index of η entry `level` of `output`.
    pub fn index(&self, output: usize, level: usize) -> usize {
        debug_assert!(level < self.chains[output].len());
        self.offsets[output] + level
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.eta_vars.len()
    }

    pub fn fully_linearizable(&self) -> bool {
        self.fully_linearizable
    }

    pub fn flat(&self) -> impl Iterator<Item = &Expression> {
        self.chains.iter().flatten()
    }

    /// η = Φ(x) at a concrete state.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, SymbolicError> {
        self.flat().map(|e| e.eval(x)).collect()
    }
}
