#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolicError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariableName(String),
    #[error("non-finite constant {0}")]
    NonFiniteConstant(f64),
    #[error("zero constant denominator")]
    ZeroDenominator,
    #[error("division by zero while evaluating `{subexpr}`")]
    DivisionByZero { subexpr: String },
    #[error("variable index {index} out of range (have {nvars} bindings)")]
    UnknownVariable { index: usize, nvars: usize },
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
