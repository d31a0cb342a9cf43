use reachstep_symbolic::SymbolicError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("inconsistent dimensions: {0}")]
    Shape(String),

    #[error("state box for `{var}` is empty or not finite: [{lo}, {hi}]")]
    BadStateBox { var: String, lo: f64, hi: f64 },

    #[error("vector relative degree undefined: {reason}")]
    UndefinedRelativeDegree { reason: String },

    #[error(
        "decoupling matrix singular at evaluation point (det {det:.3e}, smallest singular value {sigma_min:.3e})"
    )]
    SingularDecoupling { det: f64, sigma_min: f64 },

    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
