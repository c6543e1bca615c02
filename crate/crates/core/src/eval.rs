//! Three-valued evaluation.
//!
//! Kleene mode evaluates every construct by its ultimate approximation;
//! definitions and `let` blocks are approximated over the exact completions
//! of the symbols they read. Supervaluation takes the greatest lower bound of
//! the exact evaluations over all completions of the formula's free symbols.
//!
//! Completions are explored lazily. A branching level *marks* a set of
//! symbols; evaluation proceeds normally, and only when it reads an unknown
//! atom of a marked symbol does the level split into a true and a false
//! branch and replay. Atoms that are never read are never enumerated, so the
//! result equals the glb over all completions without materializing them.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::ast::{let_locals, Aggregate, Expr, Rule, RuleSet, Term};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::interp::{
    carrier, index_tuple, so_arg_atoms, Arg, ArgType, Domain, Elem, PartialInterpretation, Relation, Sym, Tuple,
    Type, Value,
};
use crate::values::{approx_aggregate_entries, Quantifier, ThreeVal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalMode {
    Kleene,
    Supervaluation,
}

/// Semantics of a rule set used as a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    WellFounded,
    Stable,
}

/// Where a symbol's current value lives: the base interpretation or a
/// binding pushed during evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Slot {
    Base(Sym),
    Frame(usize),
}

pub(crate) enum Interrupt {
    Branch { level: usize, slot: Slot, args: Tuple },
    Fail(Error),
}

impl From<Error> for Interrupt {
    fn from(e: Error) -> Self {
        Interrupt::Fail(e)
    }
}

pub(crate) type EResult<T> = std::result::Result<T, Interrupt>;

pub(crate) fn settle<T>(r: EResult<T>) -> Result<T> {
    match r {
        Ok(v) => Ok(v),
        Err(Interrupt::Fail(e)) => Err(e),
        Err(Interrupt::Branch { .. }) => Err(Error::Contract("branch escaped its level".into())),
    }
}

struct Frame {
    name: Sym,
    ty: Type,
    value: Value,
}

#[derive(Default)]
struct Level {
    marked: HashSet<Slot>,
    assign: HashMap<(Slot, Tuple), bool>,
}

pub(crate) struct Env<'a> {
    base: &'a PartialInterpretation,
    pub cfg: &'a Config,
    frames: Vec<Frame>,
    levels: Vec<Level>,
    /// Explore every branch instead of stopping at the first `u`.
    collect: bool,
    watch: HashSet<Slot>,
    reads: RefCell<Vec<(Slot, Tuple)>>,
}

fn arg_value(a: &Arg, at: ArgType, domain_size: usize) -> (Type, Value) {
    match (a, at) {
        (Arg::Elem(e), _) => (Type::Dom, Value::Elem(*e)),
        (Arg::Rel(m), ArgType::Pred(n)) => (Type::Pred(n), Value::rel(Relation::from_mask(n, domain_size, *m))),
        (Arg::Rel(m), ArgType::Dom) => (Type::Pred(0), Value::rel(Relation::from_mask(0, domain_size, *m))),
    }
}

impl<'a> Env<'a> {
    pub fn new(base: &'a PartialInterpretation, cfg: &'a Config) -> Self {
        Env {
            base,
            cfg,
            frames: Vec::new(),
            levels: Vec::new(),
            collect: false,
            watch: HashSet::new(),
            reads: RefCell::new(Vec::new()),
        }
    }

    pub fn domain(&self) -> &Domain {
        self.base.domain()
    }

    fn lookup(&self, s: &Sym) -> Option<Slot> {
        for (i, f) in self.frames.iter().enumerate().rev() {
            if f.name == *s {
                return Some(Slot::Frame(i));
            }
        }
        self.base.interprets(s).then(|| Slot::Base(s.clone()))
    }

    fn resolve(&self, s: &Sym) -> EResult<Slot> {
        self.lookup(s)
            .ok_or_else(|| Error::UnknownSymbol(s.to_string()).into())
    }

    fn slot(&self, slot: &Slot) -> (&Type, &Value) {
        match slot {
            Slot::Frame(i) => (&self.frames[*i].ty, &self.frames[*i].value),
            Slot::Base(s) => (
                self.base.vocabulary().type_of(s).expect("interpreted symbol has a type"),
                self.base.value(s).expect("interpreted symbol has a value"),
            ),
        }
    }

    fn push(&mut self, name: Sym, ty: Type, value: Value) -> usize {
        self.frames.push(Frame { name, ty, value });
        self.frames.len() - 1
    }

    fn set_frame_atom(&mut self, idx: usize, args: &[Arg], v: ThreeVal) {
        if let Value::Rel(r) = &mut self.frames[idx].value {
            Arc::make_mut(r).set(args, v);
        }
    }

    fn read_atom(&self, slot: &Slot, value: &Value, args: &[Arg]) -> EResult<ThreeVal> {
        let v = value.atom(args)?;
        if !self.watch.is_empty() && self.watch.contains(slot) {
            self.reads.borrow_mut().push((slot.clone(), Tuple::from_slice(args)));
        }
        if v != ThreeVal::U || self.levels.is_empty() {
            return Ok(v);
        }
        // The outermost level marking the symbol owns the choice.
        for (li, level) in self.levels.iter().enumerate() {
            if level.marked.contains(slot) {
                let key = (slot.clone(), Tuple::from_slice(args));
                return match level.assign.get(&key) {
                    Some(b) => Ok(ThreeVal::from_bool(*b)),
                    None => Err(Interrupt::Branch {
                        level: li,
                        slot: key.0,
                        args: key.1,
                    }),
                };
            }
        }
        Ok(ThreeVal::U)
    }

    fn elem_of(&self, s: &Sym) -> EResult<Elem> {
        let slot = self.resolve(s)?;
        match self.slot(&slot).1 {
            Value::Elem(e) => Ok(*e),
            _ => Err(Error::Eval(format!("`{s}` is not a domain term")).into()),
        }
    }

    /// The element denoted by a term; `None` when it falls outside the domain.
    fn term(&self, t: &Term) -> EResult<Option<Elem>> {
        match t {
            Term::Int(i) => Ok(self.domain().elem_of_int(*i)),
            Term::Name(s) => Ok(Some(self.elem_of(s)?)),
            Term::Offset(s, k) => {
                let e = self.elem_of(s)?;
                let i = self
                    .domain()
                    .int_value(e)
                    .ok_or_else(|| Error::Eval(format!("`{s}` does not denote an integer")))?;
                Ok(i.checked_add(*k).and_then(|n| self.domain().elem_of_int(n)))
            }
        }
    }

    /// The integer denoted by a term, independent of the domain.
    fn int_term(&self, t: &Term) -> EResult<i64> {
        let not_int = |s: &Sym| Interrupt::from(Error::Eval(format!("`{s}` does not denote an integer")));
        match t {
            Term::Int(i) => Ok(*i),
            Term::Name(s) => self.domain().int_value(self.elem_of(s)?).ok_or_else(|| not_int(s)),
            Term::Offset(s, k) => {
                let i = self.domain().int_value(self.elem_of(s)?).ok_or_else(|| not_int(s))?;
                Ok(i + k)
            }
        }
    }

    /// The exact values a predicate argument can take: a single mask when
    /// the predicate is exact, every completion otherwise.
    fn pred_masks(&self, t: &Term, n: usize) -> EResult<Vec<u64>> {
        let Term::Name(s) = t else {
            return Err(Error::Eval(format!("`{t}` is not a predicate symbol")).into());
        };
        let slot = self.resolve(s)?;
        let (ty, value) = self.slot(&slot);
        let ok = matches!(ty, Type::Pred(m) if *m == n) || (n == 0 && *ty == Type::Bool);
        if !ok {
            return Err(Error::Eval(format!("`{s}` has type {ty}, expected pred/{n}")).into());
        }
        let atoms = so_arg_atoms(n, self.domain(), self.cfg)?;
        if let Value::Rel(r) = value {
            if !self.watch.contains(&slot) {
                if let Some(m) = r.to_mask() {
                    return Ok(vec![m]);
                }
            }
        }
        let size = self.domain().size();
        let mut mask = 0u64;
        let mut unknown = Vec::new();
        for idx in 0..atoms {
            let args: Tuple = index_tuple(idx, n, size).into_iter().map(Arg::Elem).collect();
            match self.read_atom(&slot, value, &args)? {
                ThreeVal::T => mask |= 1 << idx,
                ThreeVal::U => unknown.push(idx),
                ThreeVal::F => {}
            }
        }
        if unknown.len() >= 32 || (1usize << unknown.len()) > self.cfg.max_completions {
            return Err(Error::Cap {
                what: "completions of a predicate argument",
                limit: self.cfg.max_completions,
            }
            .into());
        }
        Ok((0u64..1 << unknown.len())
            .map(|c| {
                unknown
                    .iter()
                    .enumerate()
                    .fold(mask, |m, (bit, idx)| if c >> bit & 1 == 1 { m | 1 << idx } else { m })
            })
            .collect())
    }

    fn eval_atom(&self, p: &Sym, args: &[Term]) -> EResult<ThreeVal> {
        let slot = self.resolve(p)?;
        let (ty, value) = self.slot(&slot);
        let types = ty.arg_types();
        if types.len() != args.len() || !ty.is_predicate() {
            return Err(Error::Arity {
                what: p.to_string(),
                expected: types.len(),
                found: args.len(),
            }
            .into());
        }
        let mut choices: Vec<Vec<Arg>> = Vec::with_capacity(args.len());
        for (t, at) in args.iter().zip(types) {
            match at {
                ArgType::Dom => match self.term(t)? {
                    Some(e) => choices.push(vec![Arg::Elem(e)]),
                    None => return Ok(ThreeVal::F),
                },
                ArgType::Pred(n) => choices.push(self.pred_masks(t, n)?.into_iter().map(Arg::Rel).collect()),
            }
        }
        if choices.iter().all(|c| c.len() == 1) {
            let tuple: Tuple = choices.iter().map(|c| c[0]).collect();
            return self.read_atom(&slot, value, &tuple);
        }
        // A partial predicate argument: glb over its completions.
        let mut idx = vec![0usize; choices.len()];
        let mut acc: Option<ThreeVal> = None;
        loop {
            let tuple: Tuple = choices.iter().zip(&idx).map(|(c, i)| c[*i]).collect();
            let v = self.read_atom(&slot, value, &tuple)?;
            let g = acc.map_or(v, |a| a.glb(v));
            if g == ThreeVal::U {
                return Ok(g);
            }
            acc = Some(g);
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(acc.unwrap_or(ThreeVal::U));
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Kleene evaluation.
    pub fn eval(&mut self, e: &Expr) -> EResult<ThreeVal> {
        use ThreeVal::*;
        match e {
            Expr::Atom(p, args) => self.eval_atom(p, args),
            Expr::Cmp(op, a, b) => match (self.term(a)?, self.term(b)?) {
                (Some(x), Some(y)) => Ok(ThreeVal::from_bool(op.holds(x, y))),
                _ => Ok(F),
            },
            Expr::Not(x) => Ok(self.eval(x)?.negate()),
            Expr::And(es) => {
                let mut acc = T;
                for x in es {
                    let v = self.eval(x)?;
                    if v == F {
                        return Ok(F);
                    }
                    acc = acc.min(v);
                }
                Ok(acc)
            }
            Expr::Or(es) => {
                let mut acc = F;
                for x in es {
                    let v = self.eval(x)?;
                    if v == T {
                        return Ok(T);
                    }
                    acc = acc.max(v);
                }
                Ok(acc)
            }
            Expr::Implies(a, b) => {
                let va = self.eval(a)?;
                if va == F {
                    return Ok(T);
                }
                Ok(va.negate().max(self.eval(b)?))
            }
            Expr::Iff(a, b) => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                Ok(match (va.to_bool(), vb.to_bool()) {
                    (Some(x), Some(y)) => ThreeVal::from_bool(x == y),
                    _ => U,
                })
            }
            Expr::Quant(q, x, ty, body) => self.eval_quant(*q, x, ty, body),
            Expr::Aggregate(a) => self.eval_aggregate(a),
            Expr::Definition(d) => self.eval_rule_set(d, Semantics::WellFounded),
            Expr::Let(d, body) => self.eval_let(d, body),
        }
    }

    fn eval_quant(&mut self, q: Quantifier, x: &Sym, ty: &Type, body: &Expr) -> EResult<ThreeVal> {
        let (stop, mut acc) = match q {
            Quantifier::Forall => (ThreeVal::F, ThreeVal::T),
            Quantifier::Exists => (ThreeVal::T, ThreeVal::F),
        };
        let size = self.domain().size();
        let values: Vec<Value> = match ty {
            Type::Dom => self.domain().elems().map(Value::Elem).collect(),
            Type::Pred(n) => {
                let atoms = so_arg_atoms(*n, self.domain(), self.cfg)?;
                if (1usize << atoms) > self.cfg.max_carrier {
                    return Err(Error::Cap {
                        what: "values of a quantified predicate",
                        limit: self.cfg.max_carrier,
                    }
                    .into());
                }
                (0u64..1 << atoms)
                    .map(|m| Value::rel(Relation::from_mask(*n, size, m)))
                    .collect()
            }
            other => return Err(Error::Eval(format!("cannot quantify over {other}")).into()),
        };
        let depth = self.frames.len();
        for v in values {
            self.push(x.clone(), ty.clone(), v);
            let r = self.eval(body)?;
            self.frames.truncate(depth);
            if r == stop {
                return Ok(stop);
            }
            acc = match q {
                Quantifier::Forall => acc.min(r),
                Quantifier::Exists => acc.max(r),
            };
        }
        Ok(acc)
    }

    fn eval_aggregate(&mut self, a: &Aggregate) -> EResult<ThreeVal> {
        let k = a.vars.len();
        let size = self.domain().size();
        let total = self.domain().atom_count(k).filter(|n| *n <= self.cfg.max_carrier).ok_or(Error::Cap {
            what: "aggregate tuples",
            limit: self.cfg.max_carrier,
        })?;
        let depth = self.frames.len();
        let mut entries = Vec::with_capacity(total);
        for idx in 0..total {
            let elems = index_tuple(idx, k, size);
            for (v, e) in a.vars.iter().zip(&elems) {
                self.push(v.clone(), Type::Dom, Value::Elem(*e));
            }
            let v = self.eval(&a.body)?;
            self.frames.truncate(depth);
            let weight = elems.first().and_then(|e| self.domain().int_value(*e));
            entries.push((weight, v));
        }
        let n = self.int_term(&a.bound)?;
        Ok(approx_aggregate_entries(
            a.func,
            a.cmp,
            &entries,
            n,
            self.cfg.max_aggregate_unknowns,
        )?)
    }

    /// Greatest lower bound of `f` over the completions of the marked slots.
    fn branch_glb<F>(&mut self, slots: Vec<Slot>, mut f: F) -> EResult<ThreeVal>
    where
        F: FnMut(&mut Env<'a>) -> EResult<ThreeVal>,
    {
        let level = self.levels.len();
        let depth = self.frames.len();
        self.levels.push(Level {
            marked: slots.into_iter().collect(),
            assign: HashMap::new(),
        });
        let mut pending = vec![HashMap::new()];
        let mut acc: Option<ThreeVal> = None;
        let mut leaves = 0usize;
        while let Some(assign) = pending.pop() {
            self.levels[level].assign = assign;
            let r = f(self);
            self.frames.truncate(depth);
            self.levels.truncate(level + 1);
            match r {
                Ok(v) => {
                    leaves += 1;
                    let g = acc.map_or(v, |a| a.glb(v));
                    acc = Some(g);
                    if g == ThreeVal::U && !self.collect {
                        break;
                    }
                }
                Err(Interrupt::Branch { level: l, slot, args }) if l == level => {
                    let assign = std::mem::take(&mut self.levels[level].assign);
                    let mut on = assign.clone();
                    on.insert((slot.clone(), args.clone()), true);
                    let mut off = assign;
                    off.insert((slot, args), false);
                    pending.push(off);
                    pending.push(on);
                }
                Err(other) => {
                    self.levels.truncate(level);
                    return Err(other);
                }
            }
            if leaves + pending.len() > self.cfg.max_completions {
                self.levels.truncate(level);
                return Err(Error::Cap {
                    what: "completions explored by one approximation",
                    limit: self.cfg.max_completions,
                }
                .into());
            }
        }
        self.levels.truncate(level);
        Ok(acc.unwrap_or(ThreeVal::U))
    }

    fn slots_of<'s, I: IntoIterator<Item = &'s Sym>>(&self, syms: I) -> EResult<Vec<Slot>> {
        syms.into_iter().map(|s| self.resolve(s)).collect()
    }

    /// A rule set used as a formula, approximated over the completions of
    /// its free symbols.
    pub fn eval_rule_set(&mut self, d: &RuleSet, sem: Semantics) -> EResult<ThreeVal> {
        let slots = self.slots_of(&d.free_symbols())?;
        self.branch_glb(slots, |env| match sem {
            Semantics::WellFounded => env.w_exact(d),
            Semantics::Stable => env.st_exact(d),
        })
    }

    fn eval_let(&mut self, d: &RuleSet, body: &Expr) -> EResult<ThreeVal> {
        let locals = let_locals(d).map_err(Error::Eval)?;
        let slots = self.slots_of(&d.parameters())?;
        self.branch_glb(slots, |env| {
            let rels = env.wfm_full(d, &locals)?;
            if let Some(i) = rels.iter().position(|r| !r.is_exact()) {
                return Err(Error::NonTotal(format!("let-definition of `{}`", locals[i].0)).into());
            }
            let depth = env.frames.len();
            for ((name, ty), r) in locals.iter().zip(rels) {
                env.push(name.clone(), ty.clone(), Value::rel(r));
            }
            let v = env.eval(body)?;
            env.frames.truncate(depth);
            Ok(v)
        })
    }

    fn defined_info(&self, d: &RuleSet) -> EResult<Vec<(Sym, Slot, Type)>> {
        d.defined()
            .into_iter()
            .map(|s| {
                let slot = self.resolve(&s)?;
                let ty = self.slot(&slot).0.clone();
                Ok((s, slot, ty))
            })
            .collect()
    }

    fn read_slot(&self, slot: &Slot, args: &[Arg]) -> EResult<ThreeVal> {
        let value = self.slot(slot).1;
        self.read_atom(slot, value, args)
    }

    /// `t` iff the current (exact) values of the defined symbols are the
    /// well-founded model of `d` in the current context.
    fn w_exact(&mut self, d: &RuleSet) -> EResult<ThreeVal> {
        let info = self.defined_info(d)?;
        let defs: Vec<(Sym, Type)> = info.iter().map(|(s, _, t)| (s.clone(), t.clone())).collect();
        let rels = self.wfm_full(d, &defs)?;
        for ((_, slot, ty), rel) in info.iter().zip(&rels) {
            for t in carrier(ty, self.domain(), self.cfg)? {
                let w = rel.get(&t);
                if w == ThreeVal::U || self.read_slot(slot, &t)? != w {
                    return Ok(ThreeVal::F);
                }
            }
        }
        Ok(ThreeVal::T)
    }

    /// `t` iff the current (exact) values of the defined symbols form a
    /// stable model of `d` in the current context.
    fn st_exact(&mut self, d: &RuleSet) -> EResult<ThreeVal> {
        let info = self.defined_info(d)?;
        let depth = self.frames.len();
        let mut atoms: Vec<(usize, Tuple)> = Vec::new();
        let mut vals = Vec::new();
        let mut frame_ids = Vec::new();
        for (k, (name, slot, ty)) in info.iter().enumerate() {
            let mut rel = Relation::uniform(ty, self.domain().size(), ThreeVal::F)?;
            for t in carrier(ty, self.domain(), self.cfg)? {
                let v = self.read_slot(slot, &t)?;
                rel.set(&t, v);
                vals.push(v);
                atoms.push((k, t));
            }
            frame_ids.push(self.push(name.clone(), ty.clone(), Value::rel(rel)));
        }
        let defs: Vec<(Sym, Type)> = info.iter().map(|(s, _, t)| (s.clone(), t.clone())).collect();
        for (i, (k, t)) in atoms.iter().enumerate() {
            if self.body_value(d, &defs[*k].0, &defs[*k].1, t)? != vals[i] {
                self.frames.truncate(depth);
                return Ok(ThreeVal::F);
            }
        }
        let stable = self.support_closure(d, &defs, &frame_ids, &atoms, &vals)?;
        self.frames.truncate(depth);
        Ok(ThreeVal::from_bool(stable))
    }

    /// For an exact supported interpretation held in the frames: is there
    /// no nonempty set `T` of true atoms with `I[T:u]` closed? Computed as
    /// the limit of `S ↦ {A true : body(A) = t in I[true∖S : u]}`.
    fn support_closure(
        &mut self,
        d: &RuleSet,
        defs: &[(Sym, Type)],
        frame_ids: &[usize],
        atoms: &[(usize, Tuple)],
        vals: &[ThreeVal],
    ) -> EResult<bool> {
        let trues: Vec<usize> = (0..atoms.len()).filter(|i| vals[*i] == ThreeVal::T).collect();
        let mut support: HashSet<usize> = HashSet::new();
        loop {
            for &i in &trues {
                let v = if support.contains(&i) { ThreeVal::T } else { ThreeVal::U };
                self.set_frame_atom(frame_ids[atoms[i].0], &atoms[i].1, v);
            }
            let mut next = HashSet::new();
            for &i in &trues {
                let (k, t) = &atoms[i];
                if self.body_value(d, &defs[*k].0, &defs[*k].1, t)? == ThreeVal::T {
                    next.insert(i);
                }
            }
            if next.len() == support.len() {
                break;
            }
            support = next;
        }
        for &i in &trues {
            self.set_frame_atom(frame_ids[atoms[i].0], &atoms[i].1, ThreeVal::T);
        }
        Ok(support.len() == trues.len())
    }

    /// Binds the rule's variables to match `args`; `false` if the head does
    /// not match. Bindings are pushed as frames.
    fn match_head(&mut self, r: &Rule, types: &[ArgType], args: &[Arg]) -> EResult<bool> {
        let depth = self.frames.len();
        let size = self.domain().size();
        for ((t, at), a) in r.args.iter().zip(types).zip(args) {
            if let Term::Name(s) = t {
                if r.vars.contains(s) {
                    if let Some(f) = self.frames[depth..].iter().find(|f| f.name == *s) {
                        let same = match (&f.value, a) {
                            (Value::Elem(e), Arg::Elem(x)) => e == x,
                            (Value::Rel(rel), Arg::Rel(m)) => rel.to_mask() == Some(*m),
                            _ => false,
                        };
                        if !same {
                            return Ok(false);
                        }
                    } else {
                        let (ty, v) = arg_value(a, *at, size);
                        self.push(s.clone(), ty, v);
                    }
                    continue;
                }
            }
            match (at, a) {
                (ArgType::Dom, Arg::Elem(e)) => {
                    if self.term(t)? != Some(*e) {
                        return Ok(false);
                    }
                }
                (ArgType::Pred(n), Arg::Rel(m)) => {
                    let ms = self.pred_masks(t, *n)?;
                    if ms.len() != 1 {
                        return Err(Error::Eval(format!("partial predicate `{t}` in a rule head")).into());
                    }
                    if ms[0] != *m {
                        return Ok(false);
                    }
                }
                _ => return Err(Error::Eval(format!("ill-typed head argument `{t}`")).into()),
            }
        }
        Ok(true)
    }

    /// `Max_≤` of the bodies of the rules defining `head(args)`.
    pub fn body_value(&mut self, d: &RuleSet, head: &Sym, ty: &Type, args: &[Arg]) -> EResult<ThreeVal> {
        let types = ty.arg_types();
        let mut best = ThreeVal::F;
        for r in d.rules.iter().filter(|r| r.head == *head) {
            let depth = self.frames.len();
            if self.match_head(r, &types, args)? {
                let v = self.eval(&r.body)?;
                best = best.max(v);
            }
            self.frames.truncate(depth);
            if best == ThreeVal::T {
                break;
            }
        }
        Ok(best)
    }

    /// Well-founded model of `d` over the full carriers of `defs`, with the
    /// parameters read from the environment.
    fn wfm_full(&mut self, d: &RuleSet, defs: &[(Sym, Type)]) -> EResult<Vec<Relation>> {
        let depth = self.frames.len();
        let mut atoms = Vec::new();
        let mut frame_ids = Vec::new();
        for (k, (name, ty)) in defs.iter().enumerate() {
            let tuples = carrier(ty, self.domain(), self.cfg)?;
            atoms.extend(tuples.into_iter().map(|t| (k, t)));
            if atoms.len() > self.cfg.max_carrier {
                return Err(Error::Cap {
                    what: "defined atoms of a definition",
                    limit: self.cfg.max_carrier,
                }
                .into());
            }
            let rel = Relation::uniform(ty, self.domain().size(), ThreeVal::U)?;
            frame_ids.push(self.push(name.clone(), ty.clone(), Value::rel(rel)));
        }
        self.refine(d, defs, &frame_ids, &atoms)?;
        let rels = frame_ids
            .iter()
            .map(|i| match &self.frames[*i].value {
                Value::Rel(r) => (**r).clone(),
                _ => unreachable!("defined symbols are bound to relations"),
            })
            .collect();
        self.frames.truncate(depth);
        Ok(rels)
    }

    /// Refines the all-unknown assignment of `atoms` (held in the frames
    /// `frame_ids`) to the well-founded model: alternately make true every
    /// atom with a true body, and make false the greatest unfounded set.
    fn refine(
        &mut self,
        d: &RuleSet,
        defs: &[(Sym, Type)],
        frame_ids: &[usize],
        atoms: &[(usize, Tuple)],
    ) -> EResult<Vec<ThreeVal>> {
        let mut vals = vec![ThreeVal::U; atoms.len()];
        loop {
            let mut changed = false;
            loop {
                let mut any = false;
                for i in 0..atoms.len() {
                    if vals[i] != ThreeVal::U {
                        continue;
                    }
                    let (k, t) = &atoms[i];
                    if self.body_value(d, &defs[*k].0, &defs[*k].1, t)? == ThreeVal::T {
                        vals[i] = ThreeVal::T;
                        self.set_frame_atom(frame_ids[*k], t, ThreeVal::T);
                        any = true;
                    }
                }
                if !any {
                    break;
                }
                changed = true;
            }
            let mut cand: Vec<usize> = (0..atoms.len()).filter(|i| vals[*i] == ThreeVal::U).collect();
            for &i in &cand {
                self.set_frame_atom(frame_ids[atoms[i].0], &atoms[i].1, ThreeVal::F);
            }
            loop {
                let mut keep = Vec::with_capacity(cand.len());
                let mut dropped = false;
                for &i in &cand {
                    let (k, t) = &atoms[i];
                    if self.body_value(d, &defs[*k].0, &defs[*k].1, t)? == ThreeVal::F {
                        keep.push(i);
                    } else {
                        self.set_frame_atom(frame_ids[*k], t, ThreeVal::U);
                        dropped = true;
                    }
                }
                cand = keep;
                if !dropped {
                    break;
                }
            }
            if !cand.is_empty() {
                for &i in &cand {
                    vals[i] = ThreeVal::F;
                }
                changed = true;
            }
            if !changed {
                return Ok(vals);
            }
        }
    }

    /// Well-founded values of the atoms of `defs` that `start` depends on.
    ///
    /// The dependency closure is found by evaluating bodies with every
    /// defined atom unknown and recording which defined atoms are read;
    /// Kleene evaluation only skips subformulas whose value is already
    /// exact, so no refinement can read an atom outside the closure.
    pub fn relevant_wfm(
        &mut self,
        d: &RuleSet,
        defs: &[(Sym, Type)],
        start: (usize, Tuple),
        cap: usize,
    ) -> EResult<Vec<((usize, Tuple), ThreeVal)>> {
        let depth = self.frames.len();
        let mut frame_ids = Vec::new();
        for (name, ty) in defs {
            let rel = Relation::Sparse {
                default: ThreeVal::U,
                entries: Default::default(),
            };
            frame_ids.push(self.push(name.clone(), ty.clone(), Value::rel(rel)));
        }
        let saved_watch = std::mem::take(&mut self.watch);
        let saved_collect = self.collect;
        self.watch = frame_ids.iter().map(|i| Slot::Frame(*i)).collect();
        self.collect = true;
        let mut seen: HashSet<(usize, Tuple)> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start);
        let mut result = Ok(());
        while let Some(atom) = queue.pop_front() {
            self.reads.borrow_mut().clear();
            if let Err(e) = self.body_value(d, &defs[atom.0].0, &defs[atom.0].1, &atom.1) {
                result = Err(e);
                break;
            }
            let reads = std::mem::take(&mut *self.reads.borrow_mut());
            for (slot, args) in reads {
                if let Slot::Frame(fid) = slot {
                    if let Some(k) = frame_ids.iter().position(|x| *x == fid) {
                        let key = (k, args);
                        if seen.insert(key.clone()) {
                            queue.push_back(key);
                        }
                    }
                }
            }
            order.push(atom);
            if seen.len() > cap {
                result = Err(Error::Cap {
                    what: "atoms relevant to a template atom",
                    limit: cap,
                }
                .into());
                break;
            }
        }
        self.watch = saved_watch;
        self.collect = saved_collect;
        self.frames.truncate(depth + frame_ids.len());
        result?;
        let vals = self.refine(d, defs, &frame_ids, &order)?;
        self.frames.truncate(depth);
        Ok(order.into_iter().zip(vals).collect())
    }
}

fn check_symbols(e: &Expr, i: &PartialInterpretation) -> Result<()> {
    match e.free_symbols().into_iter().find(|s| !i.interprets(s)) {
        Some(s) => Err(Error::UnknownSymbol(s.to_string())),
        None => Ok(()),
    }
}

/// Three-valued value of `e` in `i`.
pub fn eval(e: &Expr, i: &PartialInterpretation, mode: EvalMode, cfg: &Config) -> Result<ThreeVal> {
    check_symbols(e, i)?;
    let mut env = Env::new(i, cfg);
    settle(match mode {
        EvalMode::Kleene => env.eval(e),
        EvalMode::Supervaluation => {
            let slots = e.free_symbols().into_iter().map(Slot::Base).collect();
            env.branch_glb(slots, |env| env.eval(e))
        }
    })
}

/// Classical value of `e` in an exact interpretation.
pub fn eval_exact(e: &Expr, i: &PartialInterpretation, cfg: &Config) -> Result<ThreeVal> {
    if !i.is_exact() {
        return Err(Error::Contract("eval_exact needs an exact interpretation".into()));
    }
    eval(e, i, EvalMode::Kleene, cfg)
}

/// Value of a rule set used as a formula under the given semantics.
pub fn eval_rule_set(d: &RuleSet, i: &PartialInterpretation, sem: Semantics, cfg: &Config) -> Result<ThreeVal> {
    check_symbols(&Expr::Definition(d.clone()), i)?;
    let mut env = Env::new(i, cfg);
    settle(env.eval_rule_set(d, sem))
}

/// Well-founded model of `d` for the defined symbols `defs`, with the
/// parameters read from `i`.
pub(crate) fn wfm_relations(d: &RuleSet, defs: &[(Sym, Type)], i: &PartialInterpretation, cfg: &Config) -> Result<Vec<Relation>> {
    let mut env = Env::new(i, cfg);
    settle(env.wfm_full(d, defs))
}

/// Values of the bodies of `atoms` (indices into `defs` plus arguments) in `i`.
pub(crate) fn body_values(
    d: &RuleSet,
    defs: &[(Sym, Type)],
    atoms: &[(usize, Tuple)],
    i: &PartialInterpretation,
    cfg: &Config,
) -> Result<Vec<ThreeVal>> {
    let mut env = Env::new(i, cfg);
    atoms
        .iter()
        .map(|(k, t)| settle(env.body_value(d, &defs[*k].0, &defs[*k].1, t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Domain;
    use crate::parser::parse_formula;
    use crate::interp::Vocabulary;
    use ThreeVal::*;

    fn props(vals: &[(&str, ThreeVal)]) -> PartialInterpretation {
        let mut i = PartialInterpretation::empty(Domain::from_names(&["a"]));
        for (n, v) in vals {
            let rel = Relation::Dense {
                domain_size: 1,
                arity: 0,
                vals: vec![*v],
            };
            i.set(Sym::new(n), Type::Pred(0), Value::rel(rel)).unwrap();
        }
        i
    }

    fn ev(text: &str, i: &PartialInterpretation, mode: EvalMode) -> ThreeVal {
        let e = parse_formula(text, i.vocabulary()).unwrap();
        eval(&e, i, mode, &Config::default()).unwrap()
    }

    #[test]
    fn kleene_versus_supervaluation() {
        let i = props(&[("p", U), ("q", U)]);
        assert_eq!(ev("p | ~p", &i, EvalMode::Kleene), U);
        assert_eq!(ev("p | ~p", &i, EvalMode::Supervaluation), T);
        assert_eq!(ev("p | q", &i, EvalMode::Supervaluation), U);
        assert_eq!(ev("p | q", &i, EvalMode::Kleene), U);
    }

    #[test]
    fn exact_examples() {
        let cfg = Config::default();
        let mut i = PartialInterpretation::empty(Domain::from_names(&["a", "b", "c"]));
        i.set_pred("p", 1, &[&["a"], &["b"]], &[]).unwrap();
        let e = parse_formula("?x: p(x)", i.vocabulary()).unwrap();
        assert_eq!(eval_exact(&e, &i, &cfg).unwrap(), T);
        let e = parse_formula("#{x: p(x)} = 2", i.vocabulary()).unwrap();
        assert_eq!(eval_exact(&e, &i, &cfg).unwrap(), T);
        let e = parse_formula("sum{x: p(x)} = 2", i.vocabulary()).unwrap();
        assert!(eval_exact(&e, &i, &cfg).is_err());
    }

    #[test]
    fn definitions_as_formulas() {
        let cfg = Config::default();
        let i = props(&[("p", T), ("q", F)]);
        let v = i.vocabulary().clone();
        let d = crate::parser::parse_rules("{p <- ~q. q <- ~p.}", &v).unwrap();
        assert_eq!(eval_rule_set(&d, &i, Semantics::Stable, &cfg).unwrap(), T);
        assert_eq!(eval_rule_set(&d, &i, Semantics::WellFounded, &cfg).unwrap(), F);
        let partial = props(&[("p", T), ("q", U)]);
        assert_eq!(eval_rule_set(&d, &partial, Semantics::Stable, &cfg).unwrap(), U);
        let mono = crate::parser::parse_rules("{p <- true. q <- p.}", &v).unwrap();
        let both = props(&[("p", T), ("q", T)]);
        assert_eq!(eval_rule_set(&mono, &both, Semantics::WellFounded, &cfg).unwrap(), T);
    }

    #[test]
    fn let_blocks() {
        let cfg = Config::default();
        let mut i = PartialInterpretation::empty(Domain::from_names(&["a", "b"]));
        i.set_pred("p", 1, &[&["a"]], &[]).unwrap();
        i.set_elem("c", "a").unwrap();
        i.set_elem("d", "b").unwrap();
        let e = parse_formula("let {q(x) <- p(x).} in q(c) & ~q(d)", i.vocabulary()).unwrap();
        assert_eq!(eval(&e, &i, EvalMode::Kleene, &cfg).unwrap(), T);
        let bad = parse_formula("let {r <- ~r.} in r", i.vocabulary()).unwrap();
        assert!(matches!(eval(&bad, &i, EvalMode::Kleene, &cfg), Err(Error::NonTotal(_))));
        let mut partial = PartialInterpretation::empty(Domain::from_names(&["a", "b"]));
        partial.set_pred("p", 1, &[&["a"]], &[&["b"]]).unwrap();
        let e = parse_formula("let {q(x) <- p(x).} in ?x: q(x)", partial.vocabulary()).unwrap();
        assert_eq!(eval(&e, &partial, EvalMode::Kleene, &cfg).unwrap(), T);
    }

    #[test]
    fn second_order_quantifiers() {
        let cfg = Config::default();
        let mut i = PartialInterpretation::empty(Domain::from_names(&["a", "b"]));
        i.set_pred("e", 2, &[&["a", "b"]], &[]).unwrap();
        let e = parse_formula("?Q: !x y: Q(x, y) <=> e(y, x)", i.vocabulary()).unwrap();
        assert_eq!(eval(&e, &i, EvalMode::Kleene, &cfg).unwrap(), T);
        let e = parse_formula("!Q: ?x: Q(x, x)", i.vocabulary()).unwrap();
        assert_eq!(eval(&e, &i, EvalMode::Kleene, &cfg).unwrap(), F);
    }

    #[test]
    fn integer_terms() {
        let cfg = Config::default();
        let mut i = PartialInterpretation::empty(Domain::ints(1, 3));
        i.set_elem("a", "1").unwrap();
        let v = i.vocabulary().clone();
        let check = |text: &str| eval(&parse_formula(text, &v).unwrap(), &i, EvalMode::Kleene, &cfg).unwrap();
        assert_eq!(check("a < a+1"), T);
        assert_eq!(check("a+1 = 2"), T);
        assert_eq!(check("a+5 = a+5"), F);
        assert_eq!(check("3 > a"), T);
        let _ = Vocabulary::new();
    }
}
