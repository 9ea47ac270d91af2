use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("rewrite step budget of {0} exceeded (is the theory terminating?)")]
    StepBudget(usize),
    #[error("rewrite rule mentions an alias: {0}")]
    AliasInRule(String),
    #[error("rewrite rule has a variable as its left-hand side: {0}")]
    VariableLhs(String),
    #[error("right-hand side uses a variable not bound on the left: {0}")]
    UnboundRhsVar(String),
    #[error("theory file line {line}: {msg}")]
    TheorySyntax { line: usize, msg: String },
    #[error("symbol `{0}` used with inconsistent arities")]
    Arity(String),
    #[error("alias {0} is already mapped elsewhere")]
    AliasRebound(String),
    #[error("alias map is not injective at {0}")]
    NotInjective(String),
    #[error("malformed alias map entry `{0}`")]
    BadAliasMap(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("state budget of {0} states exceeded")]
    StateBudget(usize),
    #[error("witness replay failed: {0}")]
    Replay(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
