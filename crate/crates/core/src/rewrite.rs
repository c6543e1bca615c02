//! Capture-avoiding substitution over formulas and rule sets.

use std::collections::{BTreeSet, HashMap};

use crate::ast::{Aggregate, Expr, Rule, RuleSet, Term};
use crate::error::{Error, Result};
use crate::interp::Sym;

/// Deterministic generator of names `base_N` that occur nowhere else.
#[derive(Clone, Debug, Default)]
pub(crate) struct Fresh {
    used: BTreeSet<Sym>,
    next: usize,
}

impl Fresh {
    pub fn new<I: IntoIterator<Item = Sym>>(used: I) -> Self {
        Fresh {
            used: used.into_iter().collect(),
            next: 0,
        }
    }

    pub fn reserve(&mut self, s: &Sym) {
        self.used.insert(s.clone());
    }

    pub fn is_used(&self, s: &Sym) -> bool {
        self.used.contains(s)
    }

    pub fn fresh(&mut self, base: &Sym) -> Sym {
        loop {
            self.next += 1;
            let cand = Sym::new(&format!("{base}_{}", self.next));
            if self.used.insert(cand.clone()) {
                return cand;
            }
        }
    }
}

/// What a free occurrence of a symbol becomes.
#[derive(Clone, Debug)]
pub(crate) enum Repl {
    /// Replace by a term; applied atoms need a name.
    Term(Term),
    /// `p(t̄)` becomes `q(t̄, extra)`; unapplied uses become `q` only when
    /// `extra` is empty.
    Extend(Sym, Vec<Term>),
}

type Map = HashMap<Sym, Repl>;

/// Every symbol occurring anywhere, bound or free.
pub(crate) fn all_symbols(e: &Expr, out: &mut BTreeSet<Sym>) {
    let terms = |ts: &[Term], out: &mut BTreeSet<Sym>| out.extend(ts.iter().filter_map(Term::symbol).cloned());
    match e {
        Expr::Atom(p, args) => {
            out.insert(p.clone());
            terms(args, out);
        }
        Expr::Cmp(_, a, b) => terms(&[a.clone(), b.clone()], out),
        Expr::Not(x) => all_symbols(x, out),
        Expr::And(es) | Expr::Or(es) => es.iter().for_each(|x| all_symbols(x, out)),
        Expr::Implies(a, b) | Expr::Iff(a, b) => {
            all_symbols(a, out);
            all_symbols(b, out);
        }
        Expr::Quant(_, x, _, b) => {
            out.insert(x.clone());
            all_symbols(b, out);
        }
        Expr::Aggregate(a) => {
            out.extend(a.vars.iter().cloned());
            all_symbols(&a.body, out);
            terms(std::slice::from_ref(&a.bound), out);
        }
        Expr::Definition(d) => rule_set_symbols(d, out),
        Expr::Let(d, b) => {
            rule_set_symbols(d, out);
            all_symbols(b, out);
        }
    }
}

pub(crate) fn rule_set_symbols(d: &RuleSet, out: &mut BTreeSet<Sym>) {
    for r in &d.rules {
        out.insert(r.head.clone());
        out.extend(r.vars.iter().cloned());
        out.extend(r.args.iter().filter_map(Term::symbol).cloned());
        all_symbols(&r.body, out);
    }
}

fn term(t: &Term, map: &Map) -> Result<Term> {
    let Some(s) = t.symbol() else { return Ok(t.clone()) };
    let Some(r) = map.get(s) else { return Ok(t.clone()) };
    match (t, r) {
        (Term::Name(_), Repl::Term(u)) => Ok(u.clone()),
        (Term::Offset(_, k), Repl::Term(u)) => Ok(match u {
            Term::Name(y) => Term::Offset(y.clone(), *k),
            Term::Int(i) => Term::Int(i + k),
            Term::Offset(y, j) => Term::Offset(y.clone(), j + k),
        }),
        (Term::Name(_), Repl::Extend(q, extra)) if extra.is_empty() => Ok(Term::Name(q.clone())),
        (_, Repl::Extend(q, _)) => Err(Error::Rewrite(format!(
            "`{s}` is passed as an argument and cannot be extended to `{q}`"
        ))),
        (Term::Int(_), _) => unreachable!("integers have no symbol"),
    }
}

fn terms(ts: &[Term], map: &Map) -> Result<Vec<Term>> {
    ts.iter().map(|t| term(t, map)).collect()
}

fn applied(p: &Sym, args: Vec<Term>, map: &Map) -> Result<(Sym, Vec<Term>)> {
    match map.get(p) {
        None => Ok((p.clone(), args)),
        Some(Repl::Term(Term::Name(q))) => Ok((q.clone(), args)),
        Some(Repl::Term(t)) => Err(Error::Rewrite(format!("cannot apply `{t}` as a predicate"))),
        Some(Repl::Extend(q, extra)) => {
            let mut args = args;
            args.extend(extra.iter().cloned());
            Ok((q.clone(), args))
        }
    }
}

/// Substitutes free occurrences per `map`. With `fresh`, every binder is
/// renamed to a fresh name; without, binders shadow the map.
pub(crate) fn subst(e: &Expr, map: &Map, fresh: &mut Option<&mut Fresh>) -> Result<Expr> {
    let rec = |x: &Expr, fresh: &mut Option<&mut Fresh>| subst(x, map, fresh);
    Ok(match e {
        Expr::Atom(p, args) => {
            let (q, args) = applied(p, terms(args, map)?, map)?;
            Expr::Atom(q, args)
        }
        Expr::Cmp(op, a, b) => Expr::Cmp(*op, term(a, map)?, term(b, map)?),
        Expr::Not(x) => Expr::Not(Box::new(rec(x, fresh)?)),
        Expr::And(es) => Expr::And(es.iter().map(|x| rec(x, fresh)).collect::<Result<_>>()?),
        Expr::Or(es) => Expr::Or(es.iter().map(|x| rec(x, fresh)).collect::<Result<_>>()?),
        Expr::Implies(a, b) => Expr::Implies(Box::new(rec(a, fresh)?), Box::new(rec(b, fresh)?)),
        Expr::Iff(a, b) => Expr::Iff(Box::new(rec(a, fresh)?), Box::new(rec(b, fresh)?)),
        Expr::Quant(q, x, ty, body) => {
            let (inner, names) = bind(map, std::slice::from_ref(x), fresh);
            Expr::Quant(*q, names[0].clone(), ty.clone(), Box::new(subst(body, &inner, fresh)?))
        }
        Expr::Aggregate(a) => {
            let (inner, vars) = bind(map, &a.vars, fresh);
            Expr::Aggregate(Aggregate {
                func: a.func,
                cmp: a.cmp,
                vars,
                body: Box::new(subst(&a.body, &inner, fresh)?),
                bound: term(&a.bound, map)?,
            })
        }
        Expr::Definition(d) => Expr::Definition(subst_rules(d, map, fresh)?),
        Expr::Let(d, body) => {
            let locals: Vec<Sym> = d.defined().into_iter().collect();
            let (inner, _) = bind(map, &locals, fresh);
            Expr::Let(subst_rules(d, &inner, fresh)?, Box::new(subst(body, &inner, fresh)?))
        }
    })
}

/// Scope for binders `xs`: freshened names or shadowing.
fn bind(map: &Map, xs: &[Sym], fresh: &mut Option<&mut Fresh>) -> (Map, Vec<Sym>) {
    let mut inner = map.clone();
    let mut names = Vec::with_capacity(xs.len());
    for x in xs {
        match fresh {
            Some(f) => {
                let y = f.fresh(x);
                inner.insert(x.clone(), Repl::Term(Term::Name(y.clone())));
                names.push(y);
            }
            None => {
                inner.remove(x);
                names.push(x.clone());
            }
        }
    }
    (inner, names)
}

pub(crate) fn subst_rules(d: &RuleSet, map: &Map, fresh: &mut Option<&mut Fresh>) -> Result<RuleSet> {
    let mut rules = Vec::with_capacity(d.rules.len());
    for r in &d.rules {
        let (inner, vars) = bind(map, &r.vars, fresh);
        let (head, args) = applied(&r.head, terms(&r.args, &inner)?, &inner)?;
        rules.push(Rule {
            vars,
            head,
            args,
            body: subst(&r.body, &inner, fresh)?,
        });
    }
    Ok(RuleSet::new(rules))
}

/// Renames binders that clash with a free symbol or an earlier binder, so
/// that every bound name is unique.
pub(crate) fn uniquify(e: &Expr, fresh: &mut Fresh) -> Result<Expr> {
    let mut seen: BTreeSet<Sym> = e.free_symbols();
    uniq(e, &HashMap::new(), &mut seen, fresh)
}

fn uniq_bind(map: &Map, xs: &[Sym], seen: &mut BTreeSet<Sym>, fresh: &mut Fresh) -> (Map, Vec<Sym>) {
    let mut inner = map.clone();
    let mut names = Vec::new();
    for x in xs {
        if seen.insert(x.clone()) {
            inner.remove(x);
            names.push(x.clone());
        } else {
            let y = fresh.fresh(x);
            seen.insert(y.clone());
            inner.insert(x.clone(), Repl::Term(Term::Name(y.clone())));
            names.push(y);
        }
    }
    (inner, names)
}

fn uniq(e: &Expr, map: &Map, seen: &mut BTreeSet<Sym>, fresh: &mut Fresh) -> Result<Expr> {
    Ok(match e {
        Expr::Atom(..) | Expr::Cmp(..) => subst(e, map, &mut None)?,
        Expr::Not(x) => Expr::Not(Box::new(uniq(x, map, seen, fresh)?)),
        Expr::And(es) => Expr::And(es.iter().map(|x| uniq(x, map, seen, fresh)).collect::<Result<_>>()?),
        Expr::Or(es) => Expr::Or(es.iter().map(|x| uniq(x, map, seen, fresh)).collect::<Result<_>>()?),
        Expr::Implies(a, b) => Expr::Implies(
            Box::new(uniq(a, map, seen, fresh)?),
            Box::new(uniq(b, map, seen, fresh)?),
        ),
        Expr::Iff(a, b) => Expr::Iff(
            Box::new(uniq(a, map, seen, fresh)?),
            Box::new(uniq(b, map, seen, fresh)?),
        ),
        Expr::Quant(q, x, ty, body) => {
            let (inner, names) = uniq_bind(map, std::slice::from_ref(x), seen, fresh);
            Expr::Quant(*q, names[0].clone(), ty.clone(), Box::new(uniq(body, &inner, seen, fresh)?))
        }
        Expr::Aggregate(a) => {
            let (inner, vars) = uniq_bind(map, &a.vars, seen, fresh);
            Expr::Aggregate(Aggregate {
                func: a.func,
                cmp: a.cmp,
                vars,
                body: Box::new(uniq(&a.body, &inner, seen, fresh)?),
                bound: term(&a.bound, map)?,
            })
        }
        // Binders inside rule sets never interact with second-order
        // quantifiers (which may not occur there), so plain substitution
        // of the enclosing renamings suffices.
        Expr::Definition(_) | Expr::Let(..) => subst(e, map, &mut None)?,
    })
}

/// Does a second-order quantifier occur anywhere in `e`?
pub(crate) fn has_so_quantifier(e: &Expr) -> bool {
    match e {
        Expr::Atom(..) | Expr::Cmp(..) => false,
        Expr::Not(x) => has_so_quantifier(x),
        Expr::And(es) | Expr::Or(es) => es.iter().any(has_so_quantifier),
        Expr::Implies(a, b) | Expr::Iff(a, b) => has_so_quantifier(a) || has_so_quantifier(b),
        Expr::Quant(_, _, ty, b) => ty.is_predicate() || has_so_quantifier(b),
        Expr::Aggregate(a) => has_so_quantifier(&a.body),
        Expr::Definition(d) => d.rules.iter().any(|r| has_so_quantifier(&r.body)),
        Expr::Let(d, b) => d.rules.iter().any(|r| has_so_quantifier(&r.body)) || has_so_quantifier(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{Type, Vocabulary};
    use crate::parser::parse_formula;

    #[test]
    fn freshening_avoids_capture() {
        let v = Vocabulary::new().with("p", Type::Pred(2));
        let e = parse_formula("?y: p(x, y)", &v).unwrap();
        let mut fresh = Fresh::new(["x", "y"].map(Sym::new));
        let mut map = Map::new();
        map.insert(Sym::new("x"), Repl::Term(Term::name("y")));
        let out = subst(&e, &map, &mut Some(&mut fresh)).unwrap();
        assert_eq!(out.to_string(), "?y_1: p(y, y_1)");
    }

    #[test]
    fn extension_and_offsets() {
        let v = Vocabulary::new().with("q", Type::Pred(1));
        let e = parse_formula("!x: q(x+1) | q(x)", &v).unwrap();
        let mut map = Map::new();
        map.insert(Sym::new("q"), Repl::Extend(Sym::new("r"), vec![Term::name("z")]));
        let out = subst(&e, &map, &mut None).unwrap();
        assert_eq!(out.to_string(), "!x: r(x+1, z) | r(x, z)");
    }

    #[test]
    fn uniquify_renames_repeated_binders() {
        let v = Vocabulary::new().with("p", Type::Pred(1));
        let e = parse_formula("(!x: p(x)) & (?x: p(x))", &v).unwrap();
        let mut fresh = Fresh::new(["x", "p"].map(Sym::new));
        let out = uniquify(&e, &mut fresh).unwrap();
        assert_eq!(out.to_string(), "(!x: p(x)) & (?x_1: p(x_1))");
    }
}
