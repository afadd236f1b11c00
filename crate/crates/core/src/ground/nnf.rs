//! Negation normal form, quantifier enumeration and variable substitution.

use std::collections::HashMap;

use crate::pddl::{Atom, Formula, Term, TypeHierarchy, TypedName};

/// A formula with negation pushed to the leaves.
///
/// `And([])` is true and `Or([])` is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Nnf<L> {
    And(Vec<Nnf<L>>),
    Or(Vec<Nnf<L>>),
    Pos(L),
    Neg(L),
}

impl<L> Nnf<L> {
    pub fn truth() -> Self {
        Nnf::And(Vec::new())
    }

    pub fn falsity() -> Self {
        Nnf::Or(Vec::new())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Nnf::And(cs) if cs.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Nnf::Or(cs) if cs.is_empty())
    }

    pub fn eval<F: Fn(&L) -> bool>(&self, truth: &F) -> bool {
        match self {
            Nnf::And(cs) => cs.iter().all(|c| c.eval(truth)),
            Nnf::Or(cs) => cs.iter().any(|c| c.eval(truth)),
            Nnf::Pos(l) => truth(l),
            Nnf::Neg(l) => !truth(l),
        }
    }

    /// Calls `f(leaf, positive)` on every leaf in left-to-right order.
    pub fn for_each_leaf<F: FnMut(&L, bool)>(&self, f: &mut F) {
        match self {
            Nnf::And(cs) | Nnf::Or(cs) => cs.iter().for_each(|c| c.for_each_leaf(f)),
            Nnf::Pos(l) => f(l, true),
            Nnf::Neg(l) => f(l, false),
        }
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.for_each_leaf(&mut |_, _| n += 1);
        n
    }

    /// Replaces every leaf by a sub-formula (typically a constant or a
    /// re-labelled leaf) and simplifies the result.
    pub fn map_leaves<M, F: FnMut(L, bool) -> Nnf<M>>(self, f: &mut F) -> Nnf<M> {
        let mapped = match self {
            Nnf::And(cs) => Nnf::And(cs.into_iter().map(|c| c.map_leaves(f)).collect()),
            Nnf::Or(cs) => Nnf::Or(cs.into_iter().map(|c| c.map_leaves(f)).collect()),
            Nnf::Pos(l) => f(l, true),
            Nnf::Neg(l) => f(l, false),
        };
        mapped.simplify()
    }

    /// Flattens nested same-type nodes, removes neutral constants and
    /// collapses single-child nodes.
    pub fn simplify(self) -> Self {
        match self {
            Nnf::And(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    match c.simplify() {
                        Nnf::And(inner) => out.extend(inner),
                        c if c.is_false() => return Nnf::falsity(),
                        c => out.push(c),
                    }
                }
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    Nnf::And(out)
                }
            }
            Nnf::Or(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    match c.simplify() {
                        Nnf::Or(inner) => out.extend(inner),
                        c if c.is_true() => return Nnf::truth(),
                        c => out.push(c),
                    }
                }
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    Nnf::Or(out)
                }
            }
            leaf => leaf,
        }
    }
}

/// Leaf of a lifted or ground NNF before propositions are interned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lit {
    Atom(Atom),
    Eq(Term, Term),
}

/// Converts a quantifier-free formula to simplified NNF.
///
/// # Panics
/// If `f` still contains `forall` or `exists`; run [`enumerate_quantifiers`] first.
pub fn to_nnf(f: &Formula) -> Nnf<Lit> {
    nnf_polarity(f, true).simplify()
}

fn nnf_polarity(f: &Formula, positive: bool) -> Nnf<Lit> {
    let leaf = |l: Lit| if positive { Nnf::Pos(l) } else { Nnf::Neg(l) };
    match f {
        Formula::And(cs) | Formula::Or(cs) => {
            let children = cs.iter().map(|c| nnf_polarity(c, positive)).collect();
            if matches!(f, Formula::And(_)) == positive {
                Nnf::And(children)
            } else {
                Nnf::Or(children)
            }
        }
        Formula::Not(c) => nnf_polarity(c, !positive),
        Formula::Imply(a, b) => {
            let (na, nb) = (nnf_polarity(a, !positive), nnf_polarity(b, positive));
            if positive {
                Nnf::Or(vec![na, nb])
            } else {
                Nnf::And(vec![na, nb])
            }
        }
        Formula::Atom(a) => leaf(Lit::Atom(a.clone())),
        Formula::Equals(a, b) => leaf(Lit::Eq(a.clone(), b.clone())),
        Formula::Forall(..) | Formula::Exists(..) => {
            panic!("to_nnf expects a quantifier-free formula")
        }
    }
}

/// Replaces bound variables by constants. Quantifiers shadow outer bindings.
pub fn substitute(f: &Formula, binding: &HashMap<String, String>) -> Formula {
    let term = |t: &Term| match t {
        Term::Var(v) => match binding.get(v) {
            Some(c) => Term::Const(c.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
    };
    match f {
        Formula::And(cs) => Formula::And(cs.iter().map(|c| substitute(c, binding)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| substitute(c, binding)).collect()),
        Formula::Not(c) => Formula::Not(Box::new(substitute(c, binding))),
        Formula::Imply(a, b) => Formula::Imply(Box::new(substitute(a, binding)), Box::new(substitute(b, binding))),
        Formula::Forall(vs, c) | Formula::Exists(vs, c) => {
            let mut inner = binding.clone();
            for v in vs {
                inner.remove(&v.name);
            }
            let body = Box::new(substitute(c, &inner));
            if matches!(f, Formula::Forall(..)) {
                Formula::Forall(vs.clone(), body)
            } else {
                Formula::Exists(vs.clone(), body)
            }
        }
        Formula::Atom(a) => Formula::Atom(Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(term).collect(),
        }),
        Formula::Equals(a, b) => Formula::Equals(term(a), term(b)),
    }
}

/// Expands `forall` into a conjunction and `exists` into a disjunction over
/// every type-compatible object, in object order.
pub fn enumerate_quantifiers(f: &Formula, objects: &[TypedName], types: &TypeHierarchy) -> Formula {
    match f {
        Formula::And(cs) => Formula::And(cs.iter().map(|c| enumerate_quantifiers(c, objects, types)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| enumerate_quantifiers(c, objects, types)).collect()),
        Formula::Not(c) => Formula::Not(Box::new(enumerate_quantifiers(c, objects, types))),
        Formula::Imply(a, b) => Formula::Imply(
            Box::new(enumerate_quantifiers(a, objects, types)),
            Box::new(enumerate_quantifiers(b, objects, types)),
        ),
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let mut children = Vec::new();
            for_each_binding(vs, objects, types, &mut |binding| {
                let instance = substitute(body, binding);
                children.push(enumerate_quantifiers(&instance, objects, types));
            });
            if matches!(f, Formula::Forall(..)) {
                Formula::And(children)
            } else {
                Formula::Or(children)
            }
        }
        Formula::Atom(_) | Formula::Equals(..) => f.clone(),
    }
}

/// Visits every type-compatible assignment of `vars`, lexicographic in object order.
pub fn for_each_binding<F: FnMut(&HashMap<String, String>)>(
    vars: &[TypedName],
    objects: &[TypedName],
    types: &TypeHierarchy,
    f: &mut F,
) {
    let domains: Vec<Vec<&str>> = vars
        .iter()
        .map(|v| {
            objects
                .iter()
                .filter(|o| types.is_subtype(&o.ty, &v.ty))
                .map(|o| o.name.as_str())
                .collect()
        })
        .collect();
    let mut binding = HashMap::new();
    fn rec<F: FnMut(&HashMap<String, String>)>(
        i: usize,
        vars: &[TypedName],
        domains: &[Vec<&str>],
        binding: &mut HashMap<String, String>,
        f: &mut F,
    ) {
        if i == vars.len() {
            f(binding);
            return;
        }
        for o in &domains[i] {
            binding.insert(vars[i].name.clone(), o.to_string());
            rec(i + 1, vars, domains, binding, f);
        }
        binding.remove(&vars[i].name);
    }
    rec(0, vars, &domains, &mut binding, f);
}
