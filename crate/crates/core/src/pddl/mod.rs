//! PDDL front end: s-expression reader, lifted model, parser and printer.

mod error;
mod model;
mod parser;
mod print;
mod sexpr;

pub use error::{ParseError, ParseErrorKind};
pub use model::*;
pub use parser::{parse_domain, parse_problem};
pub use sexpr::{read_one, Pos, SExpr};
