//! Lifted PDDL domain and problem representation.

use std::collections::BTreeMap;
use std::fmt;

pub const OBJECT_TYPE: &str = "object";

/// A typed variable (`?x - block`) or typed constant (`a - block`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

/// Variables keep their leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Forall(Vec<TypedName>, Box<Formula>),
    Exists(Vec<TypedName>, Box<Formula>),
    Atom(Atom),
    Equals(Term, Term),
}

impl Formula {
    /// The always-true empty conjunction.
    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn atom(predicate: &str, args: &[&str]) -> Self {
        Formula::Atom(Atom {
            predicate: predicate.to_string(),
            args: args
                .iter()
                .map(|a| {
                    if a.starts_with('?') {
                        Term::Var(a.to_string())
                    } else {
                        Term::Const(a.to_string())
                    }
                })
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    And(Vec<Effect>),
    Add(Atom),
    Delete(Atom),
    When(Formula, Box<Effect>),
    Forall(Vec<TypedName>, Box<Effect>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Formula,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationRule {
    pub predicate: String,
    pub params: Vec<TypedName>,
    pub body: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    Strips,
    Typing,
    Equality,
    NegativePreconditions,
    DisjunctivePreconditions,
    QuantifiedPreconditions,
    ConditionalEffects,
    Adl,
    DerivedPredicates,
}

impl Requirement {
    pub const ALL: [Requirement; 9] = [
        Requirement::Strips,
        Requirement::Typing,
        Requirement::Equality,
        Requirement::NegativePreconditions,
        Requirement::DisjunctivePreconditions,
        Requirement::QuantifiedPreconditions,
        Requirement::ConditionalEffects,
        Requirement::Adl,
        Requirement::DerivedPredicates,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::Equality => ":equality",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::DisjunctivePreconditions => ":disjunctive-preconditions",
            Requirement::QuantifiedPreconditions => ":quantified-preconditions",
            Requirement::ConditionalEffects => ":conditional-effects",
            Requirement::Adl => ":adl",
            Requirement::DerivedPredicates => ":derived-predicates",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.keyword() == kw)
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Single-parent type tree rooted at `object`. Equality ignores declaration order.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    /// Declared types in declaration order, `object` first.
    order: Vec<String>,
    parent: BTreeMap<String, String>,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        TypeHierarchy {
            order: vec![OBJECT_TYPE.to_string()],
            parent: BTreeMap::new(),
        }
    }
}

impl PartialEq for TypeHierarchy {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent
    }
}

impl Eq for TypeHierarchy {}

impl TypeHierarchy {
    pub fn contains(&self, ty: &str) -> bool {
        ty == OBJECT_TYPE || self.parent.contains_key(ty)
    }

    /// Declares `ty` under `parent`; a redeclaration overwrites the parent.
    pub fn declare(&mut self, ty: &str, parent: &str) {
        if ty == OBJECT_TYPE {
            return;
        }
        if !self.parent.contains_key(ty) {
            self.order.push(ty.to_string());
        }
        self.parent.insert(ty.to_string(), parent.to_string());
    }

    pub fn parent_of(&self, ty: &str) -> Option<&str> {
        self.parent.get(ty).map(String::as_str)
    }

    /// Every declared type, `object` first.
    pub fn types(&self) -> &[String] {
        &self.order
    }

    /// Whether `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = sub;
        let mut steps = 0;
        loop {
            if cur == sup {
                return true;
            }
            match self.parent.get(cur) {
                Some(p) if steps <= self.order.len() => {
                    cur = p;
                    steps += 1;
                }
                _ => return sup == OBJECT_TYPE,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainModel {
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub types: TypeHierarchy,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub schemata: Vec<ActionSchema>,
    pub derivations: Vec<DerivationRule>,
}

impl DomainModel {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemata.iter().find(|s| s.name == name)
    }

    pub fn is_derived(&self, predicate: &str) -> bool {
        self.derivations.iter().any(|d| d.predicate == predicate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemModel {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    /// Deduplicated, in first-occurrence order.
    pub init: Vec<GroundAtom>,
    pub goal: Formula,
}
