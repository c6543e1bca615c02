//! Abstract syntax of the formula language, free symbols, canonical
//! printing, type checking and fragment classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Diagnostic, Error, Result};
use crate::interp::{ArgType, Sym, Type, Vocabulary};
use crate::values::{AggregateFn, CmpOp, Quantifier};

/// A first-order term: a variable or constant, an integer literal, or an
/// integer-valued name shifted by a literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Name(Sym),
    Int(i64),
    Offset(Sym, i64),
}

impl Term {
    pub fn name(s: &str) -> Term {
        Term::Name(Sym::new(s))
    }

    pub fn symbol(&self) -> Option<&Sym> {
        match self {
            Term::Name(s) | Term::Offset(s, _) => Some(s),
            Term::Int(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(s) => write!(f, "{s}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Offset(s, k) if *k < 0 => write!(f, "{s}-{}", k.unsigned_abs()),
            Term::Offset(s, k) => write!(f, "{s}+{k}"),
        }
    }
}

/// Interpreted comparisons between terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Builtin {
    pub fn symbol(self) -> &'static str {
        match self {
            Builtin::Eq => "=",
            Builtin::Ne => "~=",
            Builtin::Lt => "<",
            Builtin::Gt => ">",
            Builtin::Le => "=<",
            Builtin::Ge => ">=",
        }
    }

    pub fn holds<T: Ord>(self, a: T, b: T) -> bool {
        match self {
            Builtin::Eq => a == b,
            Builtin::Ne => a != b,
            Builtin::Lt => a < b,
            Builtin::Gt => a > b,
            Builtin::Le => a <= b,
            Builtin::Ge => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aggregate {
    pub func: AggregateFn,
    pub cmp: CmpOp,
    pub vars: Vec<Sym>,
    pub body: Box<Expr>,
    pub bound: Term,
}

/// A formula.
///
/// Atoms are not split syntactically into first- and second-order
/// applications; which one an atom is follows from the type of its
/// predicate. `true` is the empty conjunction and `false` the empty
/// disjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(Sym, Vec<Term>),
    Cmp(Builtin, Term, Term),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    /// A quantifier over the domain (`Type::Dom`) or over the exact values
    /// of a first-order predicate type (`Type::Pred(n)`).
    Quant(Quantifier, Sym, Type, Box<Expr>),
    Aggregate(Aggregate),
    Definition(RuleSet),
    Let(RuleSet, Box<Expr>),
}

/// `∀ vars (head(args) ← body)`. Head arguments that are not rule
/// variables are matched against the atom being defined.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub vars: Vec<Sym>,
    pub head: Sym,
    pub args: Vec<Term>,
    pub body: Expr,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

/// The fragments of the second-order language with definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fragment {
    Fo,
    Eso,
    Aso,
    So,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::Fo => "FO(ID*)",
            Fragment::Eso => "ESO(ID*)",
            Fragment::Aso => "ASO(ID*)",
            Fragment::So => "SO(ID*)",
        })
    }
}

impl Expr {
    pub fn atom(p: &str, args: &[&str]) -> Expr {
        Expr::Atom(Sym::new(p), args.iter().map(|a| Term::name(a)).collect())
    }

    pub fn truth() -> Expr {
        Expr::And(Vec::new())
    }

    pub fn falsity() -> Expr {
        Expr::Or(Vec::new())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(mut es: Vec<Expr>) -> Expr {
        if es.len() == 1 {
            es.pop().unwrap()
        } else {
            Expr::And(es)
        }
    }

    pub fn or(mut es: Vec<Expr>) -> Expr {
        if es.len() == 1 {
            es.pop().unwrap()
        } else {
            Expr::Or(es)
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Expr, b: Expr) -> Expr {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, body: Expr) -> Expr {
        Expr::Quant(Quantifier::Forall, Sym::new(x), Type::Dom, Box::new(body))
    }

    pub fn exists(x: &str, body: Expr) -> Expr {
        Expr::Quant(Quantifier::Exists, Sym::new(x), Type::Dom, Box::new(body))
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Atom(_, args) => args.len(),
            Expr::Cmp(..) => 2,
            Expr::Not(e) => e.size(),
            Expr::And(es) | Expr::Or(es) => es.iter().map(Expr::size).sum(),
            Expr::Implies(a, b) | Expr::Iff(a, b) => a.size() + b.size(),
            Expr::Quant(_, _, _, b) => b.size(),
            Expr::Aggregate(a) => a.vars.len() + a.body.size() + 1,
            Expr::Definition(d) => d.size(),
            Expr::Let(d, b) => d.size() + b.size(),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Expr::Atom(p, args) => {
                out.insert(p.clone());
                out.extend(args.iter().filter_map(Term::symbol).cloned());
            }
            Expr::Cmp(_, a, b) => out.extend([a, b].into_iter().filter_map(Term::symbol).cloned()),
            Expr::Not(e) => e.collect_free(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_free(out)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Expr::Quant(_, x, _, body) => {
                let mut inner = body.free_symbols();
                inner.remove(x);
                out.extend(inner);
            }
            Expr::Aggregate(a) => {
                let mut inner = a.body.free_symbols();
                for v in &a.vars {
                    inner.remove(v);
                }
                out.extend(inner);
                out.extend(a.bound.symbol().cloned());
            }
            Expr::Definition(d) => out.extend(d.free_symbols()),
            Expr::Let(d, body) => {
                let defined = d.defined();
                let mut inner = d.free_symbols();
                inner.extend(body.free_symbols());
                out.extend(inner.into_iter().filter(|s| !defined.contains(s)));
            }
        }
    }

    fn is_simple(&self) -> bool {
        matches!(
            self,
            Expr::Atom(..) | Expr::Cmp(..) | Expr::Aggregate(_) | Expr::Definition(_)
        ) || matches!(self, Expr::And(es) | Expr::Or(es) if es.is_empty())
    }

    /// Does `x` (free in this expression) occur applied as a predicate?
    /// Returns the arity of the first such use.
    pub fn predicate_use(&self, x: &Sym) -> Option<usize> {
        match self {
            Expr::Atom(p, args) => (p == x).then_some(args.len()),
            Expr::Cmp(..) => None,
            Expr::Not(e) => e.predicate_use(x),
            Expr::And(es) | Expr::Or(es) => es.iter().find_map(|e| e.predicate_use(x)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => a.predicate_use(x).or_else(|| b.predicate_use(x)),
            Expr::Quant(_, y, _, body) => {
                if y == x {
                    None
                } else {
                    body.predicate_use(x)
                }
            }
            Expr::Aggregate(a) => {
                if a.vars.contains(x) {
                    None
                } else {
                    a.body.predicate_use(x)
                }
            }
            Expr::Definition(d) => d.predicate_use(x),
            Expr::Let(d, body) => {
                if d.defined().contains(x) {
                    None
                } else {
                    d.predicate_use(x).or_else(|| body.predicate_use(x))
                }
            }
        }
    }

    /// The first argument type under which free `x` is passed to a
    /// predicate whose type is known in `vocab`.
    pub fn argument_use(&self, x: &Sym, vocab: &Vocabulary) -> Option<ArgType> {
        match self {
            Expr::Atom(p, args) => {
                let ty = vocab.type_of(p)?;
                let types = ty.arg_types();
                args.iter()
                    .zip(types)
                    .find(|(t, _)| matches!(t, Term::Name(n) if n == x))
                    .map(|(_, a)| a)
            }
            Expr::Cmp(..) => None,
            Expr::Not(e) => e.argument_use(x, vocab),
            Expr::And(es) | Expr::Or(es) => es.iter().find_map(|e| e.argument_use(x, vocab)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.argument_use(x, vocab).or_else(|| b.argument_use(x, vocab))
            }
            Expr::Quant(_, y, _, body) => {
                if y == x {
                    None
                } else {
                    body.argument_use(x, vocab)
                }
            }
            Expr::Aggregate(a) => {
                if a.vars.contains(x) {
                    None
                } else {
                    a.body.argument_use(x, vocab)
                }
            }
            Expr::Definition(d) => d.rules.iter().find_map(|r| {
                if r.vars.contains(x) {
                    None
                } else {
                    r.body.argument_use(x, vocab)
                }
            }),
            Expr::Let(d, body) => {
                if d.defined().contains(x) {
                    None
                } else {
                    body.argument_use(x, vocab)
                }
            }
        }
    }
}

impl Rule {
    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        let mut out = self.body.free_symbols();
        out.insert(self.head.clone());
        out.extend(self.args.iter().filter_map(Term::symbol).cloned());
        for v in &self.vars {
            out.remove(v);
        }
        out
    }

    pub fn is_fact(&self) -> bool {
        matches!(&self.body, Expr::And(es) if es.is_empty())
    }
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleSet { rules }
    }

    pub fn defined(&self) -> BTreeSet<Sym> {
        self.rules.iter().map(|r| r.head.clone()).collect()
    }

    pub fn parameters(&self) -> BTreeSet<Sym> {
        let defined = self.defined();
        self.free_symbols()
            .into_iter()
            .filter(|s| !defined.contains(s))
            .collect()
    }

    /// `def(Δ) ∪ pars(Δ)`.
    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        self.rules.iter().flat_map(Rule::free_symbols).collect()
    }

    pub fn size(&self) -> usize {
        self.rules
            .iter()
            .map(|r| 1 + r.vars.len() + r.args.len() + r.body.size())
            .sum()
    }

    fn predicate_use(&self, x: &Sym) -> Option<usize> {
        self.rules.iter().find_map(|r| {
            if r.vars.contains(x) {
                None
            } else if r.head == *x {
                Some(r.args.len())
            } else {
                r.body.predicate_use(x)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Canonical printing. Every compound operand is parenthesized, so printing
// and re-parsing yields the same tree.

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if e.is_simple() {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    write!(f, "(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(p, args) => {
                write!(f, "{p}")?;
                write_args(f, args)
            }
            Expr::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Expr::Not(e) => {
                write!(f, "~")?;
                write_operand(f, e)
            }
            Expr::And(es) if es.is_empty() => write!(f, "true"),
            Expr::Or(es) if es.is_empty() => write!(f, "false"),
            Expr::And(es) | Expr::Or(es) => {
                let sep = if matches!(self, Expr::And(_)) { " & " } else { " | " };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_operand(f, e)?;
                }
                Ok(())
            }
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                let op = if matches!(self, Expr::Implies(..)) { " => " } else { " <=> " };
                write_operand(f, a)?;
                f.write_str(op)?;
                write_operand(f, b)
            }
            Expr::Quant(q, x, ty, body) => {
                let sym = match q {
                    Quantifier::Forall => "!",
                    Quantifier::Exists => "?",
                };
                match ty {
                    Type::Dom => write!(f, "{sym}{x}: {body}"),
                    other => write!(f, "{sym}{sym} {x}/{}: {body}", other.arity()),
                }
            }
            Expr::Aggregate(a) => {
                let name = match a.func {
                    AggregateFn::Card => "#",
                    AggregateFn::Sum => "sum",
                };
                write!(f, "{name}{{")?;
                for (i, v) in a.vars.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ": {}}} {} {}", a.body, a.cmp.symbol(), a.bound)
            }
            Expr::Definition(d) => write!(f, "{d}"),
            Expr::Let(d, body) => write!(f, "let {d} in {body}"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            write!(f, "!")?;
            for (i, v) in self.vars.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ": ")?;
        }
        write!(f, "{}", self.head)?;
        write_args(f, &self.args)?;
        if !self.is_fact() {
            write!(f, " <- {}", self.body)?;
        }
        Ok(())
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{r}.")?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// Fragment classification.

#[derive(Clone, Copy)]
struct Membership {
    fo: bool,
    eso: bool,
    aso: bool,
}

impl Membership {
    const ALL: Membership = Membership {
        fo: true,
        eso: true,
        aso: true,
    };
    const NONE: Membership = Membership {
        fo: false,
        eso: false,
        aso: false,
    };

    fn and(self, o: Membership) -> Membership {
        Membership {
            fo: self.fo && o.fo,
            eso: self.eso && o.eso,
            aso: self.aso && o.aso,
        }
    }

    fn negate(self) -> Membership {
        Membership {
            fo: self.fo,
            eso: self.aso,
            aso: self.eso,
        }
    }

    fn fo_only(fo: bool) -> Membership {
        if fo {
            Membership::ALL
        } else {
            Membership::NONE
        }
    }
}

fn rules_fo(d: &RuleSet) -> bool {
    d.rules.iter().all(|r| membership(&r.body).fo)
}

fn membership(e: &Expr) -> Membership {
    match e {
        Expr::Atom(..) | Expr::Cmp(..) => Membership::ALL,
        Expr::Not(x) => membership(x).negate(),
        // Disjunction is ¬(¬a ∧ ¬b): two flips cancel.
        Expr::And(es) | Expr::Or(es) => es.iter().map(membership).fold(Membership::ALL, Membership::and),
        // a ⇒ b is ¬(a ∧ ¬b).
        Expr::Implies(a, b) => membership(a).negate().and(membership(b)),
        Expr::Iff(a, b) => {
            membership(a)
                .and(membership(a).negate())
                .and(membership(b))
                .and(membership(b).negate())
        }
        Expr::Quant(q, _, ty, body) => {
            let m = membership(body);
            match (ty, q) {
                (Type::Dom, _) => m,
                (_, Quantifier::Exists) => Membership {
                    fo: false,
                    eso: m.eso,
                    aso: false,
                },
                (_, Quantifier::Forall) => Membership {
                    fo: false,
                    eso: false,
                    aso: m.aso,
                },
            }
        }
        Expr::Aggregate(a) => Membership::fo_only(membership(&a.body).fo),
        Expr::Definition(d) => Membership::fo_only(rules_fo(d)),
        Expr::Let(d, body) => {
            let m = membership(body);
            if rules_fo(d) {
                m
            } else {
                Membership::NONE
            }
        }
    }
}

/// The smallest fragment containing `e`. Disjunction, implication and
/// equivalence are read through their classical definitions in terms of
/// negation and conjunction.
pub fn classify(e: &Expr) -> Fragment {
    let m = membership(e);
    if m.fo {
        Fragment::Fo
    } else if m.eso {
        Fragment::Eso
    } else if m.aso {
        Fragment::Aso
    } else {
        Fragment::So
    }
}

// ---------------------------------------------------------------------------
// Type checking.

struct Checker<'a> {
    vocab: &'a Vocabulary,
    scope: Vec<(Sym, Type)>,
    diags: Vec<Diagnostic>,
    path: Vec<String>,
}

impl<'a> Checker<'a> {
    fn lookup(&self, s: &Sym) -> Option<Type> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == s)
            .map(|(_, t)| t.clone())
            .or_else(|| self.vocab.type_of(s).cloned())
    }

    fn error(&mut self, message: String) {
        self.diags.push(Diagnostic {
            path: self.path.join(" / "),
            message,
        });
    }

    fn term(&mut self, t: &Term, expected: ArgType) {
        match (t, expected) {
            (Term::Int(_), ArgType::Dom) => {}
            (Term::Int(i), ArgType::Pred(n)) => {
                self.error(format!("integer {i} where a pred/{n} symbol is expected"))
            }
            (Term::Offset(s, _), ArgType::Dom) => match self.lookup(s) {
                Some(Type::Dom) => {}
                Some(other) => self.error(format!("`{s}` has type {other}, cannot do arithmetic on it")),
                None => self.error(format!("unknown symbol `{s}`")),
            },
            (Term::Offset(..), ArgType::Pred(n)) => {
                self.error(format!("arithmetic term `{t}` where a pred/{n} symbol is expected"))
            }
            (Term::Name(s), ArgType::Dom) => match self.lookup(s) {
                Some(Type::Dom) => {}
                Some(other) => self.error(format!("`{s}` has type {other}, expected a domain term")),
                None => self.error(format!("unknown symbol `{s}`")),
            },
            (Term::Name(s), ArgType::Pred(n)) => match self.lookup(s) {
                Some(Type::Pred(m)) if m == n => {}
                Some(Type::Bool) if n == 0 => {}
                Some(other) => self.error(format!(
                    "`{s}` has type {other}, expected a pred/{n} symbol"
                )),
                None => self.error(format!("unknown symbol `{s}`")),
            },
        }
    }

    fn atom(&mut self, p: &Sym, args: &[Term]) {
        let Some(ty) = self.lookup(p) else {
            self.error(format!("unknown symbol `{p}`"));
            return;
        };
        if !ty.is_predicate() {
            self.error(format!("`{p}` has type {ty} and cannot be applied"));
            return;
        }
        let types = ty.arg_types();
        if types.len() != args.len() {
            self.error(format!(
                "`{p}` expects {} arguments, found {}",
                types.len(),
                args.len()
            ));
            return;
        }
        for (t, a) in args.iter().zip(types) {
            self.term(t, a);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Atom(p, args) => {
                self.path.push(format!("{e}"));
                self.atom(p, args);
                self.path.pop();
            }
            Expr::Cmp(_, a, b) => {
                self.term(a, ArgType::Dom);
                self.term(b, ArgType::Dom);
            }
            Expr::Not(x) => self.expr(x),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|x| self.expr(x)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                self.expr(a);
                self.expr(b);
            }
            Expr::Quant(_, x, ty, body) => {
                if !matches!(ty, Type::Dom | Type::Pred(_)) {
                    self.error(format!("quantified `{x}` must range over the domain or a pred/n type"));
                }
                self.scope.push((x.clone(), ty.clone()));
                self.expr(body);
                self.scope.pop();
            }
            Expr::Aggregate(a) => {
                for v in &a.vars {
                    self.scope.push((v.clone(), Type::Dom));
                }
                self.expr(&a.body);
                for _ in &a.vars {
                    self.scope.pop();
                }
                self.term(&a.bound, ArgType::Dom);
            }
            Expr::Definition(d) => {
                self.path.push("definition".into());
                self.rules(d);
                self.path.pop();
            }
            Expr::Let(d, body) => {
                self.path.push("let".into());
                let locals = let_locals(d);
                match locals {
                    Ok(locals) => {
                        let n = locals.len();
                        self.scope.extend(locals);
                        self.rules(d);
                        self.expr(body);
                        self.scope.truncate(self.scope.len() - n);
                    }
                    Err(msg) => self.error(msg),
                }
                self.path.pop();
            }
        }
    }

    fn rules(&mut self, d: &RuleSet) {
        for r in &d.rules {
            self.path.push(format!("rule for `{}`", r.head));
            let Some(ty) = self.lookup(&r.head) else {
                self.error(format!("unknown defined symbol `{}`", r.head));
                self.path.pop();
                continue;
            };
            let types = ty.arg_types();
            if !ty.is_predicate() || types.len() != r.args.len() {
                self.error(format!(
                    "head `{}` has type {ty} but is given {} arguments",
                    r.head,
                    r.args.len()
                ));
                self.path.pop();
                continue;
            }
            let mut bound = Vec::new();
            for v in &r.vars {
                let pos = r
                    .args
                    .iter()
                    .position(|t| matches!(t, Term::Name(n) if n == v));
                match pos {
                    Some(i) => bound.push((v.clone(), Type::from_arg_type(types[i]))),
                    None => self.error(format!("rule variable `{v}` does not occur in the head")),
                }
            }
            let n = bound.len();
            self.scope.extend(bound);
            for (t, a) in r.args.iter().zip(&types) {
                self.term(t, *a);
            }
            self.expr(&r.body);
            self.scope.truncate(self.scope.len() - n);
            self.path.pop();
        }
    }
}

/// Local symbols introduced by a `let`: first-order predicates typed by
/// their head arity.
pub fn let_locals(d: &RuleSet) -> std::result::Result<Vec<(Sym, Type)>, String> {
    let mut out: BTreeMap<Sym, usize> = BTreeMap::new();
    for r in &d.rules {
        if let Some(n) = out.insert(r.head.clone(), r.args.len()) {
            if n != r.args.len() {
                return Err(format!("`{}` defined with arities {n} and {}", r.head, r.args.len()));
            }
        }
    }
    Ok(out.into_iter().map(|(s, n)| (s, Type::Pred(n))).collect())
}

/// Checks arities and types of every atom, term and rule head.
pub fn typecheck(e: &Expr, sigma: &Vocabulary) -> Result<()> {
    let mut c = Checker {
        vocab: sigma,
        scope: Vec::new(),
        diags: Vec::new(),
        path: Vec::new(),
    };
    c.expr(e);
    if c.diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Type(c.diags))
    }
}

pub fn typecheck_rules(d: &RuleSet, sigma: &Vocabulary) -> Result<()> {
    typecheck(&Expr::Definition(d.clone()), sigma)
}
