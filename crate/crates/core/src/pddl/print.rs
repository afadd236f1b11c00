//! PDDL pretty-printing. Output re-parses to a structurally identical model.

use std::fmt::{self, Display, Formatter, Write};

use super::model::*;

fn typed_list(names: &[TypedName]) -> String {
    let mut out = String::new();
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", n.name, n.ty);
    }
    out
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl Display for GroundAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

fn nary<T: Display>(f: &mut Formatter<'_>, op: &str, items: &[T]) -> fmt::Result {
    write!(f, "({op}")?;
    for c in items {
        write!(f, " {c}")?;
    }
    f.write_str(")")
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Formula::And(cs) => nary(f, "and", cs),
            Formula::Or(cs) => nary(f, "or", cs),
            Formula::Not(c) => write!(f, "(not {c})"),
            Formula::Imply(a, b) => write!(f, "(imply {a} {b})"),
            Formula::Forall(vs, b) => write!(f, "(forall ({}) {b})", typed_list(vs)),
            Formula::Exists(vs, b) => write!(f, "(exists ({}) {b})", typed_list(vs)),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Equals(a, b) => write!(f, "(= {a} {b})"),
        }
    }
}

impl Display for Effect {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Effect::And(cs) => nary(f, "and", cs),
            Effect::Add(a) => write!(f, "{a}"),
            Effect::Delete(a) => write!(f, "(not {a})"),
            Effect::When(c, e) => write!(f, "(when {c} {e})"),
            Effect::Forall(vs, e) => write!(f, "(forall ({}) {e})", typed_list(vs)),
        }
    }
}

impl Display for DomainModel {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            f.write_str("  (:requirements")?;
            for r in &self.requirements {
                write!(f, " {r}")?;
            }
            writeln!(f, ")")?;
        }
        let types = &self.types.types()[1..];
        if !types.is_empty() {
            f.write_str("  (:types")?;
            for t in types {
                write!(f, " {t} - {}", self.types.parent_of(t).unwrap_or(OBJECT_TYPE))?;
            }
            writeln!(f, ")")?;
        }
        if !self.constants.is_empty() {
            writeln!(f, "  (:constants {})", typed_list(&self.constants))?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            if p.params.is_empty() {
                write!(f, " ({})", p.name)?;
            } else {
                write!(f, " ({} {})", p.name, typed_list(&p.params))?;
            }
        }
        writeln!(f, ")")?;
        for d in &self.derivations {
            if d.params.is_empty() {
                writeln!(f, "  (:derived ({}) {})", d.predicate, d.body)?;
            } else {
                writeln!(f, "  (:derived ({} {}) {})", d.predicate, typed_list(&d.params), d.body)?;
            }
        }
        for a in &self.schemata {
            writeln!(f, "  (:action {}", a.name)?;
            writeln!(f, "    :parameters ({})", typed_list(&a.params))?;
            writeln!(f, "    :precondition {}", a.precondition)?;
            writeln!(f, "    :effect {})", a.effect)?;
        }
        f.write_str(")\n")
    }
}

impl Display for ProblemModel {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        writeln!(f, "  (:objects {})", typed_list(&self.objects))?;
        f.write_str("  (:init")?;
        for a in &self.init {
            write!(f, " {a}")?;
        }
        writeln!(f, ")")?;
        writeln!(f, "  (:goal {}))", self.goal)
    }
}
