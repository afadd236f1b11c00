//! Domain and problem parsing with scope, arity and type validation.

use std::collections::{HashMap, HashSet};

use super::error::{ParseError, ParseErrorKind};
use super::model::*;
use super::sexpr::{read_one, Pos, SExpr};

type Result<T> = std::result::Result<T, ParseError>;

fn err<T>(pos: Pos, kind: ParseErrorKind) -> Result<T> {
    Err(ParseError::new(pos, kind))
}

fn syntax<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    err(pos, ParseErrorKind::Syntax(msg.into()))
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| ParseError::new(e.pos(), ParseErrorKind::Syntax(format!("expected {what}"))))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol()
        .ok_or_else(|| ParseError::new(e.pos(), ParseErrorKind::Syntax(format!("expected {what}"))))
}

/// Splits `(define (<kind> NAME) section...)` into the name and sections.
fn define_block<'a>(root: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr])> {
    let items = expect_list(root, "`(define ...)`")?;
    match items.first().and_then(SExpr::as_symbol) {
        Some("define") => {}
        _ => return syntax(root.pos(), "expected `(define ...)`"),
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::new(root.pos(), ParseErrorKind::Syntax(format!("missing `({kind} NAME)`"))))?;
    let h = expect_list(header, &format!("`({kind} NAME)`"))?;
    if h.len() != 2 || h[0].as_symbol() != Some(kind) {
        return syntax(header.pos(), format!("expected `({kind} NAME)`"));
    }
    let name = expect_symbol(&h[1], "a name")?;
    Ok((name, &items[2..]))
}

fn parse_requirements(items: &[SExpr]) -> Result<Vec<Requirement>> {
    let mut reqs = Vec::new();
    for item in items {
        let kw = expect_symbol(item, "a requirement flag")?;
        match Requirement::from_keyword(kw) {
            Some(r) => {
                if !reqs.contains(&r) {
                    reqs.push(r)
                }
            }
            None => return err(item.pos(), ParseErrorKind::UnsupportedRequirement(kw.to_string())),
        }
    }
    Ok(reqs)
}

/// Parses `a b - t c - u d` into typed names. Untyped trailing names get `object`.
/// Type names are returned unchecked together with their positions.
fn parse_typed_list(items: &[SExpr], vars: bool) -> Result<Vec<(TypedName, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(&str, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_symbol() == Some("-") {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| ParseError::new(item.pos(), ParseErrorKind::Syntax("missing type after `-`".into())))?;
            let ty = match ty_expr {
                SExpr::Symbol(s, _) => s.as_str(),
                SExpr::List(..) if ty_expr.head() == Some("either") => {
                    return err(ty_expr.pos(), ParseErrorKind::EitherType)
                }
                SExpr::List(..) => return syntax(ty_expr.pos(), "expected a type name"),
            };
            if pending.is_empty() {
                return syntax(item.pos(), "`-` without preceding names");
            }
            for (name, pos) in pending.drain(..) {
                out.push((TypedName::new(name, ty), pos));
            }
            i += 2;
            continue;
        }
        let name = expect_symbol(item, if vars { "a variable" } else { "a name" })?;
        if vars != name.starts_with('?') {
            return syntax(
                item.pos(),
                if vars {
                    format!("expected a variable, found `{name}`")
                } else {
                    format!("unexpected variable `{name}`")
                },
            );
        }
        pending.push((name, item.pos()));
        i += 1;
    }
    for (name, pos) in pending {
        out.push((TypedName::new(name, OBJECT_TYPE), pos));
    }
    Ok(out)
}

/// Symbol tables used while resolving formulas.
struct Symbols<'a> {
    types: &'a TypeHierarchy,
    predicates: HashMap<String, Vec<TypedName>>,
    derived: HashSet<String>,
    objects: HashMap<String, String>,
}

impl Symbols<'_> {
    fn check_type(&self, ty: &str, pos: Pos) -> Result<()> {
        if self.types.contains(ty) {
            Ok(())
        } else {
            err(pos, ParseErrorKind::UnknownType(ty.to_string()))
        }
    }

    fn typed_vars(&self, items: &[SExpr]) -> Result<Vec<TypedName>> {
        let mut out: Vec<TypedName> = Vec::new();
        for (tn, pos) in parse_typed_list(items, true)? {
            self.check_type(&tn.ty, pos)?;
            if out.iter().any(|o| o.name == tn.name) {
                return err(pos, ParseErrorKind::Duplicate(tn.name));
            }
            out.push(tn);
        }
        Ok(out)
    }

    fn term(&self, e: &SExpr, scope: &[TypedName]) -> Result<Term> {
        let s = expect_symbol(e, "a term")?;
        if s.starts_with('?') {
            if scope.iter().any(|v| v.name == s) {
                Ok(Term::Var(s.to_string()))
            } else {
                err(e.pos(), ParseErrorKind::UnboundVariable(s.to_string()))
            }
        } else if self.objects.contains_key(s) {
            Ok(Term::Const(s.to_string()))
        } else {
            err(e.pos(), ParseErrorKind::UnknownObject(s.to_string()))
        }
    }

    fn atom(&self, items: &[SExpr], pos: Pos, scope: &[TypedName]) -> Result<Atom> {
        let name = expect_symbol(&items[0], "a predicate name")?;
        let params = self
            .predicates
            .get(name)
            .ok_or_else(|| ParseError::new(items[0].pos(), ParseErrorKind::UnknownPredicate(name.to_string())))?;
        let args = &items[1..];
        if args.len() != params.len() {
            return err(
                pos,
                ParseErrorKind::ArityMismatch {
                    predicate: name.to_string(),
                    expected: params.len(),
                    found: args.len(),
                },
            );
        }
        let mut terms = Vec::with_capacity(args.len());
        for (arg, param) in args.iter().zip(params) {
            let t = self.term(arg, scope)?;
            if let Term::Const(c) = &t {
                let found = &self.objects[c];
                if !self.types.is_subtype(found, &param.ty) {
                    return err(
                        arg.pos(),
                        ParseErrorKind::TypeMismatch {
                            predicate: name.to_string(),
                            object: c.clone(),
                            expected: param.ty.clone(),
                            found: found.clone(),
                        },
                    );
                }
            }
            terms.push(t);
        }
        Ok(Atom {
            predicate: name.to_string(),
            args: terms,
        })
    }

    fn formula(&self, e: &SExpr, scope: &mut Vec<TypedName>) -> Result<Formula> {
        let items = expect_list(e, "a formula")?;
        let Some(head) = items.first() else {
            return syntax(e.pos(), "empty formula");
        };
        let arity = |n: usize, what: &str| -> Result<()> {
            if items.len() - 1 == n {
                Ok(())
            } else {
                syntax(e.pos(), format!("`{what}` takes {n} argument(s)"))
            }
        };
        match head.as_symbol() {
            Some("and") | Some("or") => {
                let children = items[1..]
                    .iter()
                    .map(|c| self.formula(c, scope))
                    .collect::<Result<Vec<_>>>()?;
                Ok(if head.as_symbol() == Some("and") {
                    Formula::And(children)
                } else {
                    Formula::Or(children)
                })
            }
            Some("not") => {
                arity(1, "not")?;
                Ok(Formula::Not(Box::new(self.formula(&items[1], scope)?)))
            }
            Some("imply") => {
                arity(2, "imply")?;
                let a = self.formula(&items[1], scope)?;
                let b = self.formula(&items[2], scope)?;
                Ok(Formula::Imply(Box::new(a), Box::new(b)))
            }
            Some(q @ ("forall" | "exists")) => {
                arity(2, q)?;
                let vars = self.typed_vars(expect_list(&items[1], "a variable list")?)?;
                let depth = scope.len();
                scope.extend(vars.iter().cloned());
                let body = self.formula(&items[2], scope);
                scope.truncate(depth);
                let body = Box::new(body?);
                Ok(if q == "forall" {
                    Formula::Forall(vars, body)
                } else {
                    Formula::Exists(vars, body)
                })
            }
            Some("=") => {
                arity(2, "=")?;
                Ok(Formula::Equals(
                    self.term(&items[1], scope)?,
                    self.term(&items[2], scope)?,
                ))
            }
            Some(_) => Ok(Formula::Atom(self.atom(items, e.pos(), scope)?)),
            None => syntax(head.pos(), "expected a connective or predicate"),
        }
    }

    fn effect(&self, e: &SExpr, scope: &mut Vec<TypedName>) -> Result<Effect> {
        let items = expect_list(e, "an effect")?;
        let Some(head) = items.first() else {
            return syntax(e.pos(), "empty effect");
        };
        match head.as_symbol() {
            Some("and") => Ok(Effect::And(
                items[1..]
                    .iter()
                    .map(|c| self.effect(c, scope))
                    .collect::<Result<Vec<_>>>()?,
            )),
            Some("not") => {
                if items.len() != 2 {
                    return syntax(e.pos(), "`not` takes 1 argument");
                }
                let inner = expect_list(&items[1], "an atom")?;
                if inner.is_empty() {
                    return syntax(items[1].pos(), "empty atom");
                }
                Ok(Effect::Delete(self.effect_atom(inner, items[1].pos(), scope)?))
            }
            Some("when") => {
                if items.len() != 3 {
                    return syntax(e.pos(), "`when` takes a condition and an effect");
                }
                let cond = self.formula(&items[1], scope)?;
                let eff = self.effect(&items[2], scope)?;
                Ok(Effect::When(cond, Box::new(eff)))
            }
            Some("forall") => {
                if items.len() != 3 {
                    return syntax(e.pos(), "`forall` takes a variable list and an effect");
                }
                let vars = self.typed_vars(expect_list(&items[1], "a variable list")?)?;
                let depth = scope.len();
                scope.extend(vars.iter().cloned());
                let body = self.effect(&items[2], scope);
                scope.truncate(depth);
                Ok(Effect::Forall(vars, Box::new(body?)))
            }
            Some(_) => Ok(Effect::Add(self.effect_atom(items, e.pos(), scope)?)),
            None => syntax(head.pos(), "expected an effect"),
        }
    }

    fn effect_atom(&self, items: &[SExpr], pos: Pos, scope: &[TypedName]) -> Result<Atom> {
        let atom = self.atom(items, pos, scope)?;
        if self.derived.contains(&atom.predicate) {
            return err(pos, ParseErrorKind::DerivedInEffect(atom.predicate));
        }
        Ok(atom)
    }
}

/// Finds a derived predicate occurring with negative polarity.
fn negated_derived<'f>(f: &'f Formula, positive: bool, derived: &HashSet<String>) -> Option<&'f str> {
    match f {
        Formula::And(cs) | Formula::Or(cs) => cs.iter().find_map(|c| negated_derived(c, positive, derived)),
        Formula::Not(c) => negated_derived(c, !positive, derived),
        Formula::Imply(a, b) => {
            negated_derived(a, !positive, derived).or_else(|| negated_derived(b, positive, derived))
        }
        Formula::Forall(_, c) | Formula::Exists(_, c) => negated_derived(c, positive, derived),
        Formula::Atom(a) if !positive && derived.contains(&a.predicate) => Some(&a.predicate),
        Formula::Atom(_) | Formula::Equals(..) => None,
    }
}

fn section(e: &SExpr) -> Result<(&str, &[SExpr])> {
    let items = expect_list(e, "a section")?;
    match items.first().and_then(SExpr::as_symbol) {
        Some(kw) if kw.starts_with(':') => Ok((kw, &items[1..])),
        _ => syntax(e.pos(), "expected a `(:keyword ...)` section"),
    }
}

pub fn parse_domain(text: &str) -> Result<DomainModel> {
    let root = read_one(text)?;
    let (name, sections) = define_block(&root, "domain")?;

    let mut requirements = Vec::new();
    let mut types = TypeHierarchy::default();
    let mut constant_items: Option<&[SExpr]> = None;
    let mut predicate_items: Option<&[SExpr]> = None;
    let mut bodies = Vec::new();

    for s in sections {
        let (kw, rest) = section(s)?;
        match kw {
            ":requirements" => requirements = parse_requirements(rest)?,
            ":types" => {
                for (tn, _) in parse_typed_list(rest, false)? {
                    if !types.contains(&tn.ty) {
                        types.declare(&tn.ty, OBJECT_TYPE);
                    }
                    types.declare(&tn.name, &tn.ty);
                }
            }
            ":constants" => constant_items = Some(rest),
            ":predicates" => predicate_items = Some(rest),
            ":action" | ":derived" => bodies.push((kw, s)),
            other => return syntax(s.pos(), format!("unsupported domain section `{other}`")),
        }
    }

    let mut syms = Symbols {
        types: &types,
        predicates: HashMap::new(),
        derived: HashSet::new(),
        objects: HashMap::new(),
    };

    let mut constants = Vec::new();
    if let Some(items) = constant_items {
        for (tn, pos) in parse_typed_list(items, false)? {
            syms.check_type(&tn.ty, pos)?;
            if syms.objects.insert(tn.name.clone(), tn.ty.clone()).is_some() {
                return err(pos, ParseErrorKind::Duplicate(tn.name));
            }
            constants.push(tn);
        }
    }

    let mut predicates = Vec::new();
    for p in predicate_items.unwrap_or(&[]) {
        let items = expect_list(p, "a predicate declaration")?;
        let Some(first) = items.first() else {
            return syntax(p.pos(), "empty predicate declaration");
        };
        let pname = expect_symbol(first, "a predicate name")?;
        let params = syms.typed_vars(&items[1..])?;
        if syms.predicates.insert(pname.to_string(), params.clone()).is_some() {
            return err(p.pos(), ParseErrorKind::Duplicate(pname.to_string()));
        }
        predicates.push(PredicateDecl {
            name: pname.to_string(),
            params,
        });
    }

    // Derived heads are needed before actions so effects can be checked.
    for (kw, s) in &bodies {
        if *kw == ":derived" {
            let items = s.as_list().unwrap_or(&[]);
            if let Some(head) = items.get(1).and_then(SExpr::head) {
                syms.derived.insert(head.to_string());
            }
        }
    }

    let mut schemata: Vec<ActionSchema> = Vec::new();
    let mut derivations: Vec<DerivationRule> = Vec::new();
    for (kw, s) in &bodies {
        let items = s.as_list().unwrap_or(&[]);
        if *kw == ":action" {
            let schema = parse_action(&syms, s.pos(), &items[1..])?;
            if schemata.iter().any(|o| o.name == schema.name) {
                return err(s.pos(), ParseErrorKind::Duplicate(schema.name));
            }
            schemata.push(schema);
        } else {
            derivations.push(parse_derived(&syms, s.pos(), &items[1..])?);
        }
    }

    Ok(DomainModel {
        name: name.to_string(),
        requirements,
        types,
        constants,
        predicates,
        schemata,
        derivations,
    })
}

fn parse_action(syms: &Symbols, pos: Pos, items: &[SExpr]) -> Result<ActionSchema> {
    let name = expect_symbol(
        items
            .first()
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::Syntax("missing action name".into())))?,
        "an action name",
    )?;
    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 1;
    while i < items.len() {
        let key = expect_symbol(&items[i], "an action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| ParseError::new(items[i].pos(), ParseErrorKind::Syntax(format!("missing value for `{key}`"))))?;
        match key {
            ":parameters" => params = syms.typed_vars(expect_list(value, "a parameter list")?)?,
            ":precondition" => pre_expr = Some(value),
            ":effect" => eff_expr = Some(value),
            other => return syntax(items[i].pos(), format!("unknown action keyword `{other}`")),
        }
        i += 2;
    }
    let mut scope = params.clone();
    let precondition = match pre_expr {
        // `()` is accepted as an empty precondition.
        Some(e) if e.as_list().is_some_and(|l| l.is_empty()) => Formula::truth(),
        Some(e) => syms.formula(e, &mut scope)?,
        None => Formula::truth(),
    };
    let effect = match eff_expr {
        Some(e) if e.as_list().is_some_and(|l| l.is_empty()) => Effect::And(Vec::new()),
        Some(e) => syms.effect(e, &mut scope)?,
        None => Effect::And(Vec::new()),
    };
    Ok(ActionSchema {
        name: name.to_string(),
        params,
        precondition,
        effect,
    })
}

fn parse_derived(syms: &Symbols, pos: Pos, items: &[SExpr]) -> Result<DerivationRule> {
    if items.len() != 2 {
        return syntax(pos, "`:derived` takes a head and a body");
    }
    let head = expect_list(&items[0], "a derived predicate head")?;
    let Some(first) = head.first() else {
        return syntax(items[0].pos(), "empty derived head");
    };
    let pname = expect_symbol(first, "a predicate name")?;
    let decl = syms
        .predicates
        .get(pname)
        .ok_or_else(|| ParseError::new(first.pos(), ParseErrorKind::UnknownPredicate(pname.to_string())))?;
    let mut params = syms.typed_vars(&head[1..])?;
    if params.len() != decl.len() {
        return err(
            items[0].pos(),
            ParseErrorKind::ArityMismatch {
                predicate: pname.to_string(),
                expected: decl.len(),
                found: params.len(),
            },
        );
    }
    // Untyped head variables take the declared predicate types.
    for (p, d) in params.iter_mut().zip(decl) {
        if p.ty == OBJECT_TYPE {
            p.ty = d.ty.clone();
        }
    }
    let mut scope = params.clone();
    let body = syms.formula(&items[1], &mut scope)?;
    if let Some(bad) = negated_derived(&body, true, &syms.derived) {
        return err(items[1].pos(), ParseErrorKind::NegatedDerived(bad.to_string()));
    }
    Ok(DerivationRule {
        predicate: pname.to_string(),
        params,
        body,
    })
}

pub fn parse_problem(text: &str, domain: &DomainModel) -> Result<ProblemModel> {
    let root = read_one(text)?;
    let (name, sections) = define_block(&root, "problem")?;

    let mut syms = Symbols {
        types: &domain.types,
        predicates: domain
            .predicates
            .iter()
            .map(|p| (p.name.clone(), p.params.clone()))
            .collect(),
        derived: domain.derivations.iter().map(|d| d.predicate.clone()).collect(),
        objects: domain
            .constants
            .iter()
            .map(|c| (c.name.clone(), c.ty.clone()))
            .collect(),
    };

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init_items: &[SExpr] = &[];
    let mut goal_expr = None;
    for s in sections {
        let (kw, rest) = section(s)?;
        match kw {
            ":domain" => {
                let [d] = rest else {
                    return syntax(s.pos(), "expected `(:domain NAME)`");
                };
                let d = expect_symbol(d, "a domain name")?;
                if d != domain.name {
                    return err(
                        s.pos(),
                        ParseErrorKind::DomainMismatch {
                            expected: domain.name.clone(),
                            found: d.to_string(),
                        },
                    );
                }
                domain_name = Some(d.to_string());
            }
            ":requirements" => {
                parse_requirements(rest)?;
            }
            ":objects" => {
                for (tn, pos) in parse_typed_list(rest, false)? {
                    syms.check_type(&tn.ty, pos)?;
                    if syms.objects.insert(tn.name.clone(), tn.ty.clone()).is_some() {
                        return err(pos, ParseErrorKind::Duplicate(tn.name));
                    }
                    objects.push(tn);
                }
            }
            ":init" => init_items = rest,
            ":goal" => {
                let [g] = rest else {
                    return syntax(s.pos(), "expected `(:goal FORMULA)`");
                };
                goal_expr = Some(g);
            }
            other => return syntax(s.pos(), format!("unsupported problem section `{other}`")),
        }
    }

    let mut init = Vec::new();
    let mut seen = HashSet::new();
    for item in init_items {
        let items = expect_list(item, "a ground atom")?;
        if items.is_empty() {
            return syntax(item.pos(), "empty atom");
        }
        if matches!(items[0].as_symbol(), Some("not" | "=" | "and")) {
            return syntax(item.pos(), "initial state entries must be positive ground atoms");
        }
        let atom = syms.atom(items, item.pos(), &[])?;
        if syms.derived.contains(&atom.predicate) {
            return err(item.pos(), ParseErrorKind::DerivedInInit(atom.predicate));
        }
        let ground = GroundAtom {
            predicate: atom.predicate,
            args: atom.args.into_iter().map(|t| t.name().to_string()).collect(),
        };
        if seen.insert(ground.clone()) {
            init.push(ground);
        }
    }

    let goal = match goal_expr {
        Some(g) => syms.formula(g, &mut Vec::new())?,
        None => return syntax(root.pos(), "missing `:goal`"),
    };

    Ok(ProblemModel {
        name: name.to_string(),
        domain_name: domain_name.unwrap_or_else(|| domain.name.clone()),
        objects,
        init,
        goal,
    })
}
