use thiserror::Error;

use super::sexpr::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("`either` types are not supported")]
    EitherType,
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown object or constant `{0}`")]
    UnknownObject(String),
    #[error("`{predicate}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("argument `{object}` of `{predicate}` has type `{found}`, expected `{expected}`")]
    TypeMismatch {
        predicate: String,
        object: String,
        expected: String,
        found: String,
    },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("derived predicate `{0}` cannot appear in an action effect")]
    DerivedInEffect(String),
    #[error("derived predicate `{0}` cannot appear in the initial state")]
    DerivedInInit(String),
    #[error("derived predicate `{0}` appears negated inside a derivation body")]
    NegatedDerived(String),
    #[error("problem refers to domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
}
