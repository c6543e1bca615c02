//! Vocabularies, finite domains and partial interpretations.
//!
//! First-order predicate values are stored densely over `D^n`. Second-order
//! predicate values are sparse maps keyed by tuples whose relation-typed
//! components are exact first-order relations encoded as bitmasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::values::ThreeVal;

/// A symbol name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

/// Argument type of a second-order predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgType {
    Dom,
    Pred(usize),
}

impl fmt::Display for ArgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgType::Dom => write!(f, "dom"),
            ArgType::Pred(n) => write!(f, "pred/{n}"),
        }
    }
}

/// The simple type system: the domain, booleans, first-order predicates,
/// and second-order predicates over first-order predicates and domain
/// elements. Constants are symbols of type `Dom`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Dom,
    Bool,
    Pred(usize),
    SoPred(Vec<ArgType>),
}

impl Type {
    pub fn is_predicate(&self) -> bool {
        !matches!(self, Type::Dom)
    }

    pub fn is_second_order(&self) -> bool {
        matches!(self, Type::SoPred(_))
    }

    /// Argument types of a predicate type.
    pub fn arg_types(&self) -> Vec<ArgType> {
        match self {
            Type::Dom => Vec::new(),
            Type::Bool => Vec::new(),
            Type::Pred(n) => vec![ArgType::Dom; *n],
            Type::SoPred(args) => args.clone(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Type::Dom | Type::Bool => 0,
            Type::Pred(n) => *n,
            Type::SoPred(args) => args.len(),
        }
    }

    pub fn from_arg_type(a: ArgType) -> Type {
        match a {
            ArgType::Dom => Type::Dom,
            ArgType::Pred(n) => Type::Pred(n),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Dom => write!(f, "dom"),
            Type::Bool => write!(f, "bool"),
            Type::Pred(n) => write!(f, "pred/{n}"),
            Type::SoPred(args) => {
                write!(f, "so-pred(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolFlags {
    pub interpreted: bool,
    pub template: bool,
}

impl SymbolFlags {
    pub fn user() -> Self {
        SymbolFlags::default()
    }

    pub fn template() -> Self {
        SymbolFlags {
            template: true,
            ..Default::default()
        }
    }

    pub fn is_user(self) -> bool {
        !self.interpreted && !self.template
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolInfo {
    pub ty: Type,
    pub flags: SymbolFlags,
}

/// A finite set of typed symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: BTreeMap<Sym, SymbolInfo>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Vocabulary::default()
    }

    /// Adds a symbol; re-declaring with a different type is an error.
    pub fn declare(&mut self, name: Sym, ty: Type, flags: SymbolFlags) -> Result<()> {
        if let Some(old) = self.symbols.get(&name) {
            if old.ty != ty {
                return Err(Error::IllTyped {
                    symbol: name.to_string(),
                    reason: format!("redeclared as {ty}, previously {}", old.ty),
                });
            }
        }
        self.symbols.insert(name, SymbolInfo { ty, flags });
        Ok(())
    }

    pub fn with(mut self, name: &str, ty: Type) -> Self {
        self.symbols.insert(
            Sym::new(name),
            SymbolInfo {
                ty,
                flags: SymbolFlags::user(),
            },
        );
        self
    }

    pub fn get(&self, name: &Sym) -> Option<&SymbolInfo> {
        self.symbols.get(name)
    }

    pub fn type_of(&self, name: &Sym) -> Option<&Type> {
        self.symbols.get(name).map(|i| &i.ty)
    }

    pub fn contains(&self, name: &Sym) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, &SymbolInfo)> + '_ {
        self.symbols.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Sym> + '_ {
        self.symbols.keys()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_subset_of(&self, other: &Vocabulary) -> bool {
        self.symbols
            .iter()
            .all(|(k, v)| other.symbols.get(k).is_some_and(|o| o.ty == v.ty))
    }

    pub fn union(&self, other: &Vocabulary) -> Result<Vocabulary> {
        let mut out = self.clone();
        for (k, v) in &other.symbols {
            out.declare(k.clone(), v.ty.clone(), v.flags)?;
        }
        Ok(out)
    }

    /// The sub-vocabulary with the given names (missing names are skipped).
    pub fn select<'a, I: IntoIterator<Item = &'a Sym>>(&self, names: I) -> Vocabulary {
        let mut out = Vocabulary::new();
        for n in names {
            if let Some(info) = self.symbols.get(n) {
                out.symbols.insert(n.clone(), info.clone());
            }
        }
        out
    }

    pub fn remove(&mut self, name: &Sym) -> Option<SymbolInfo> {
        self.symbols.remove(name)
    }

    pub fn set_flags(&mut self, name: &Sym, flags: SymbolFlags) {
        if let Some(info) = self.symbols.get_mut(name) {
            info.flags = flags;
        }
    }
}

/// The printed name of a domain element. Integers sort before names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemName {
    Int(i64),
    Name(Arc<str>),
}

impl fmt::Display for ElemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElemName::Int(i) => write!(f, "{i}"),
            ElemName::Name(n) => write!(f, "{n}"),
        }
    }
}

impl ElemName {
    pub fn parse(s: &str) -> ElemName {
        match s.parse::<i64>() {
            Ok(i) => ElemName::Int(i),
            Err(_) => ElemName::Name(Arc::from(s)),
        }
    }
}

/// Index of a domain element in its domain's canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub u32);

/// A finite domain with a canonical total order on its elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    elems: Vec<ElemName>,
}

impl Domain {
    pub fn new<I: IntoIterator<Item = ElemName>>(names: I) -> Self {
        let mut elems: Vec<ElemName> = names.into_iter().collect();
        elems.sort();
        elems.dedup();
        Domain { elems }
    }

    pub fn from_names(names: &[&str]) -> Self {
        Domain::new(names.iter().map(|n| ElemName::parse(n)))
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Domain::new((lo..=hi).map(ElemName::Int))
    }

    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.elems.len() as u32).map(Elem)
    }

    pub fn name(&self, e: Elem) -> &ElemName {
        &self.elems[e.0 as usize]
    }

    pub fn lookup(&self, name: &ElemName) -> Option<Elem> {
        self.elems.binary_search(name).ok().map(|i| Elem(i as u32))
    }

    pub fn lookup_str(&self, s: &str) -> Option<Elem> {
        self.lookup(&ElemName::parse(s))
    }

    pub fn int_value(&self, e: Elem) -> Option<i64> {
        match self.name(e) {
            ElemName::Int(i) => Some(*i),
            ElemName::Name(_) => None,
        }
    }

    pub fn elem_of_int(&self, i: i64) -> Option<Elem> {
        self.lookup(&ElemName::Int(i))
    }

    /// Number of domain atoms of an `n`-ary first-order predicate.
    pub fn atom_count(&self, arity: usize) -> Option<usize> {
        self.size().checked_pow(arity as u32)
    }
}

/// One component of a domain-atom argument tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Elem(Elem),
    /// An exact first-order relation, bit `i` set iff the `i`-th tuple of
    /// `D^n` (lexicographic order) is a member.
    Rel(u64),
}

pub type Tuple = SmallVec<[Arg; 4]>;

/// Index of an element tuple in the lexicographic order of `D^n`.
pub fn tuple_index(elems: impl IntoIterator<Item = Elem>, domain_size: usize) -> usize {
    elems
        .into_iter()
        .fold(0usize, |acc, e| acc * domain_size + e.0 as usize)
}

/// The `i`-th tuple of `D^n` in lexicographic order.
pub fn index_tuple(mut i: usize, arity: usize, domain_size: usize) -> Vec<Elem> {
    let mut out = vec![Elem(0); arity];
    for slot in out.iter_mut().rev() {
        *slot = Elem((i % domain_size) as u32);
        i /= domain_size;
    }
    out
}

/// Value of a predicate symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// First-order predicate over `D^arity`, indexed lexicographically.
    Dense {
        domain_size: usize,
        arity: usize,
        vals: Vec<ThreeVal>,
    },
    /// Second-order predicate: tuples not listed map to `default`. Entries
    /// equal to the default are never stored.
    Sparse {
        default: ThreeVal,
        entries: BTreeMap<Tuple, ThreeVal>,
    },
}

impl Relation {
    pub fn uniform(ty: &Type, domain_size: usize, v: ThreeVal) -> Result<Relation> {
        match ty {
            Type::Bool => Ok(Relation::Dense {
                domain_size,
                arity: 0,
                vals: vec![v],
            }),
            Type::Pred(n) => {
                let count = domain_size.checked_pow(*n as u32).ok_or(Error::Cap {
                    what: "first-order carrier size",
                    limit: usize::MAX,
                })?;
                Ok(Relation::Dense {
                    domain_size,
                    arity: *n,
                    vals: vec![v; count],
                })
            }
            Type::SoPred(_) => Ok(Relation::Sparse {
                default: v,
                entries: BTreeMap::new(),
            }),
            Type::Dom => Err(Error::IllTyped {
                symbol: String::new(),
                reason: "domain-typed symbols have no relation value".into(),
            }),
        }
    }

    /// An exact first-order relation decoded from a bitmask.
    pub fn from_mask(arity: usize, domain_size: usize, mask: u64) -> Relation {
        let count = domain_size.pow(arity as u32);
        let vals = (0..count)
            .map(|i| ThreeVal::from_bool(mask >> i & 1 == 1))
            .collect();
        Relation::Dense {
            domain_size,
            arity,
            vals,
        }
    }

    /// Bitmask of an exact dense relation.
    pub fn to_mask(&self) -> Option<u64> {
        match self {
            Relation::Dense { vals, .. } if vals.len() <= 64 => {
                let mut mask = 0u64;
                for (i, v) in vals.iter().enumerate() {
                    match v {
                        ThreeVal::T => mask |= 1 << i,
                        ThreeVal::F => {}
                        ThreeVal::U => return None,
                    }
                }
                Some(mask)
            }
            _ => None,
        }
    }

    pub fn get(&self, args: &[Arg]) -> ThreeVal {
        match self {
            Relation::Dense {
                domain_size, vals, ..
            } => {
                let idx = tuple_index(
                    args.iter().map(|a| match a {
                        Arg::Elem(e) => *e,
                        Arg::Rel(_) => panic!("relation argument to a first-order predicate"),
                    }),
                    *domain_size,
                );
                vals[idx]
            }
            Relation::Sparse { default, entries } => entries.get(args).copied().unwrap_or(*default),
        }
    }

    pub fn set(&mut self, args: &[Arg], v: ThreeVal) {
        match self {
            Relation::Dense {
                domain_size, vals, ..
            } => {
                let idx = tuple_index(
                    args.iter().map(|a| match a {
                        Arg::Elem(e) => *e,
                        Arg::Rel(_) => panic!("relation argument to a first-order predicate"),
                    }),
                    *domain_size,
                );
                vals[idx] = v;
            }
            Relation::Sparse { default, entries } => {
                if v == *default {
                    entries.remove(args);
                } else {
                    entries.insert(Tuple::from_slice(args), v);
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Relation::Dense { vals, .. } => vals.iter().all(|v| v.is_exact()),
            Relation::Sparse { default, entries } => {
                default.is_exact() && entries.values().all(|v| v.is_exact())
            }
        }
    }

    /// Pointwise comparison, given the same carrier.
    fn pointwise(&self, other: &Relation, ty: &Type, domain: &Domain, cfg: &Config, leq: fn(ThreeVal, ThreeVal) -> bool) -> Result<bool> {
        match (self, other) {
            (Relation::Dense { vals: a, .. }, Relation::Dense { vals: b, .. }) => {
                Ok(a.len() == b.len() && a.iter().zip(b).all(|(x, y)| leq(*x, *y)))
            }
            (
                Relation::Sparse {
                    default: da,
                    entries: ea,
                },
                Relation::Sparse {
                    default: db,
                    entries: eb,
                },
            ) => {
                if da == db || leq(*da, *db) && ea.is_empty() && eb.is_empty() {
                    let keys: BTreeSet<&Tuple> = ea.keys().chain(eb.keys()).collect();
                    Ok(keys.into_iter().all(|k| leq(self.get(k), other.get(k))) && leq(*da, *db))
                } else {
                    // Defaults differ: fall back to the full carrier.
                    for t in carrier(ty, domain, cfg)? {
                        if !leq(self.get(&t), other.get(&t)) {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
            }
            _ => Ok(false),
        }
    }
}

/// Answers atom queries for a lazily computed predicate value.
pub trait RelationOracle: Send + Sync + fmt::Debug {
    fn atom(&self, args: &[Arg]) -> Result<ThreeVal>;
}

/// A value of a symbol in an interpretation.
#[derive(Clone, Debug)]
pub enum Value {
    Elem(Elem),
    Rel(Arc<Relation>),
    Lazy(Arc<dyn RelationOracle>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Elem(a), Value::Elem(b)) => a == b,
            (Value::Rel(a), Value::Rel(b)) => a == b,
            (Value::Lazy(a), Value::Lazy(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn rel(r: Relation) -> Value {
        Value::Rel(Arc::new(r))
    }

    pub fn atom(&self, args: &[Arg]) -> Result<ThreeVal> {
        match self {
            Value::Rel(r) => Ok(r.get(args)),
            Value::Lazy(o) => o.atom(args),
            Value::Elem(_) => Err(Error::Eval("atom lookup on a domain element".into())),
        }
    }

    pub fn as_relation(&self) -> Option<&Relation> {
        match self {
            Value::Rel(r) => Some(r),
            _ => None,
        }
    }
}

/// `P(d̄)`: a predicate symbol applied to an argument tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DomainAtom {
    pub pred: Sym,
    pub args: Tuple,
}

impl DomainAtom {
    pub fn new(pred: &str, args: &[Arg]) -> Self {
        DomainAtom {
            pred: Sym::new(pred),
            args: Tuple::from_slice(args),
        }
    }

    pub fn of_elems(pred: &str, elems: &[Elem]) -> Self {
        DomainAtom {
            pred: Sym::new(pred),
            args: elems.iter().map(|e| Arg::Elem(*e)).collect(),
        }
    }
}

/// Number of tuples in the carrier of a predicate type.
pub fn carrier_size(ty: &Type, domain: &Domain, cfg: &Config) -> Result<usize> {
    let mut total: usize = 1;
    for a in ty.arg_types() {
        let n = match a {
            ArgType::Dom => domain.size(),
            ArgType::Pred(m) => {
                let atoms = so_arg_atoms(m, domain, cfg)?;
                1usize << atoms
            }
        };
        total = total.checked_mul(n).ok_or(Error::Cap {
            what: "predicate carrier size",
            limit: cfg.max_carrier,
        })?;
    }
    Ok(total)
}

/// Number of domain atoms of a first-order predicate used as a
/// second-order argument; fails when its values cannot be enumerated.
pub fn so_arg_atoms(arity: usize, domain: &Domain, cfg: &Config) -> Result<usize> {
    let limit = cfg.max_so_arg_atoms.min(63);
    match domain.atom_count(arity) {
        Some(n) if n <= limit => Ok(n),
        _ => Err(Error::Cap {
            what: "atoms of a first-order predicate in a second-order argument",
            limit,
        }),
    }
}

/// All argument tuples of a predicate type, in canonical order.
pub fn carrier(ty: &Type, domain: &Domain, cfg: &Config) -> Result<Vec<Tuple>> {
    let size = carrier_size(ty, domain, cfg)?;
    if size > cfg.max_carrier {
        return Err(Error::Cap {
            what: "predicate carrier size",
            limit: cfg.max_carrier,
        });
    }
    let mut out: Vec<Tuple> = vec![Tuple::new()];
    for a in ty.arg_types() {
        let choices: Vec<Arg> = match a {
            ArgType::Dom => domain.elems().map(Arg::Elem).collect(),
            ArgType::Pred(m) => {
                let atoms = so_arg_atoms(m, domain, cfg)?;
                (0..(1u64 << atoms)).map(Arg::Rel).collect()
            }
        };
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for c in &choices {
                let mut t = prefix.clone();
                t.push(*c);
                next.push(t);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Checks that `v` is a well-typed value of type `ty` over `domain`.
pub fn check_value(name: &Sym, ty: &Type, v: &Value, domain: &Domain) -> Result<()> {
    let bad = |reason: String| Error::IllTyped {
        symbol: name.to_string(),
        reason,
    };
    match (ty, v) {
        (Type::Dom, Value::Elem(e)) => {
            if (e.0 as usize) < domain.size() {
                Ok(())
            } else {
                Err(bad("element outside the domain".into()))
            }
        }
        (Type::Bool, Value::Rel(r)) | (Type::Pred(_), Value::Rel(r)) => match &**r {
            Relation::Dense {
                domain_size,
                arity,
                vals,
            } => {
                let n = ty.arity();
                if *arity != n || *domain_size != domain.size() || vals.len() != domain.size().pow(n as u32) {
                    Err(bad(format!("relation shape does not match {ty}")))
                } else {
                    Ok(())
                }
            }
            Relation::Sparse { .. } => Err(bad(format!("sparse value for {ty}"))),
        },
        (Type::SoPred(args), Value::Rel(r)) => match &**r {
            Relation::Sparse { entries, .. } => {
                for key in entries.keys() {
                    if key.len() != args.len() {
                        return Err(bad("tuple of the wrong length".into()));
                    }
                    for (a, t) in key.iter().zip(args) {
                        let ok = match (a, t) {
                            (Arg::Elem(e), ArgType::Dom) => (e.0 as usize) < domain.size(),
                            (Arg::Rel(m), ArgType::Pred(n)) => {
                                let atoms = domain.size().pow(*n as u32);
                                atoms >= 64 || *m >> atoms == 0
                            }
                            _ => false,
                        };
                        if !ok {
                            return Err(bad("tuple component of the wrong type".into()));
                        }
                    }
                }
                Ok(())
            }
            Relation::Dense { .. } => Err(bad(format!("dense value for {ty}"))),
        },
        (t, Value::Lazy(_)) if t.is_predicate() => Ok(()),
        _ => Err(bad(format!("value kind does not match {ty}"))),
    }
}

/// A partial interpretation of a vocabulary over a finite domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialInterpretation {
    domain: Arc<Domain>,
    vocab: Vocabulary,
    values: BTreeMap<Sym, Value>,
}

impl PartialInterpretation {
    /// The interpretation of the empty vocabulary.
    pub fn empty(domain: Domain) -> Self {
        PartialInterpretation {
            domain: Arc::new(domain),
            vocab: Vocabulary::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn with_domain(domain: Arc<Domain>) -> Self {
        PartialInterpretation {
            domain,
            vocab: Vocabulary::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn value(&self, name: &Sym) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn values(&self) -> impl Iterator<Item = (&Sym, &Value)> + '_ {
        self.values.iter()
    }

    pub fn interprets(&self, name: &Sym) -> bool {
        self.values.contains_key(name)
    }

    /// `I|Σ'`.
    pub fn restrict(&self, sub: &Vocabulary) -> Result<Self> {
        if !sub.is_subset_of(&self.vocab) {
            let missing = sub
                .names()
                .find(|n| !self.vocab.contains(n))
                .map(|n| n.to_string())
                .unwrap_or_else(|| "type mismatch".into());
            return Err(Error::UnknownSymbol(missing));
        }
        Ok(PartialInterpretation {
            domain: self.domain.clone(),
            vocab: self.vocab.select(sub.names()),
            values: sub
                .names()
                .map(|n| (n.clone(), self.values[n].clone()))
                .collect(),
        })
    }

    /// Restriction to the named symbols that this interpretation has.
    pub fn restrict_to<'a, I: IntoIterator<Item = &'a Sym>>(&self, names: I) -> Self {
        let sub = self.vocab.select(names);
        self.restrict(&sub).expect("selected from own vocabulary")
    }

    /// `I[σ:v]`: adds or overrides a symbol.
    pub fn expand(&self, name: Sym, ty: Type, v: Value) -> Result<Self> {
        let mut out = self.clone();
        out.set(name, ty, v)?;
        Ok(out)
    }

    /// In-place `expand`.
    pub fn set(&mut self, name: Sym, ty: Type, v: Value) -> Result<()> {
        check_value(&name, &ty, &v, &self.domain)?;
        let flags = self.vocab.get(&name).map(|i| i.flags).unwrap_or_default();
        self.vocab.remove(&name);
        self.vocab.declare(name.clone(), ty, flags)?;
        self.values.insert(name, v);
        Ok(())
    }

    pub fn set_flags(&mut self, name: &Sym, flags: SymbolFlags) {
        self.vocab.set_flags(name, flags);
    }

    pub fn set_elem(&mut self, name: &str, elem: &str) -> Result<()> {
        let e = self
            .domain
            .lookup_str(elem)
            .ok_or_else(|| Error::Structure(format!("`{elem}` is not a domain element")))?;
        self.set(Sym::new(name), Type::Dom, Value::Elem(e))
    }

    /// Sets a first-order predicate from lists of true and unknown tuples;
    /// everything else is false.
    pub fn set_pred(&mut self, name: &str, arity: usize, trues: &[&[&str]], unknowns: &[&[&str]]) -> Result<()> {
        let ty = if arity == 0 { Type::Pred(0) } else { Type::Pred(arity) };
        let mut rel = Relation::uniform(&ty, self.domain.size(), ThreeVal::F)?;
        for (list, v) in [(trues, ThreeVal::T), (unknowns, ThreeVal::U)] {
            for tuple in list {
                if tuple.len() != arity {
                    return Err(Error::Arity {
                        what: name.to_string(),
                        expected: arity,
                        found: tuple.len(),
                    });
                }
                let mut args = Tuple::new();
                for s in tuple.iter() {
                    let e = self
                        .domain
                        .lookup_str(s)
                        .ok_or_else(|| Error::Structure(format!("`{s}` is not a domain element")))?;
                    args.push(Arg::Elem(e));
                }
                rel.set(&args, v);
            }
        }
        self.set(Sym::new(name), ty, Value::rel(rel))
    }

    /// `I[X:v]` for a sequence of revisions applied left to right.
    pub fn revise(&self, atoms: &[DomainAtom], v: ThreeVal) -> Result<Self> {
        let mut out = self.clone();
        for a in atoms {
            let ty = out
                .vocab
                .type_of(&a.pred)
                .ok_or_else(|| Error::UnknownSymbol(a.pred.to_string()))?
                .clone();
            if ty.arity() != a.args.len() {
                return Err(Error::Arity {
                    what: a.pred.to_string(),
                    expected: ty.arity(),
                    found: a.args.len(),
                });
            }
            match out.values.get_mut(&a.pred) {
                Some(Value::Rel(r)) => Arc::make_mut(r).set(&a.args, v),
                _ => {
                    return Err(Error::Eval(format!(
                        "cannot revise atoms of `{}`: not a materialized predicate",
                        a.pred
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn atom_value(&self, atom: &DomainAtom) -> Result<ThreeVal> {
        self.values
            .get(&atom.pred)
            .ok_or_else(|| Error::UnknownSymbol(atom.pred.to_string()))?
            .atom(&atom.args)
    }

    /// All domain atoms of `preds` whose value is `v`, in canonical order.
    pub fn atoms_with_value(&self, preds: &[Sym], v: ThreeVal, cfg: &Config) -> Result<Vec<DomainAtom>> {
        let mut out = Vec::new();
        let mut preds: Vec<&Sym> = preds.iter().collect();
        preds.sort();
        preds.dedup();
        for p in preds {
            let ty = self
                .vocab
                .type_of(p)
                .ok_or_else(|| Error::UnknownSymbol(p.to_string()))?;
            if !ty.is_predicate() {
                continue;
            }
            let value = &self.values[p];
            match value {
                Value::Rel(r) => match &**r {
                    Relation::Dense { vals, arity, domain_size } => {
                        for (i, x) in vals.iter().enumerate() {
                            if *x == v {
                                let elems = index_tuple(i, *arity, *domain_size);
                                out.push(DomainAtom {
                                    pred: p.clone(),
                                    args: elems.into_iter().map(Arg::Elem).collect(),
                                });
                            }
                        }
                    }
                    Relation::Sparse { default, entries } => {
                        if *default == v {
                            for t in carrier(ty, &self.domain, cfg)? {
                                if r.get(&t) == v {
                                    out.push(DomainAtom { pred: p.clone(), args: t });
                                }
                            }
                        } else {
                            for (t, x) in entries {
                                if *x == v {
                                    out.push(DomainAtom {
                                        pred: p.clone(),
                                        args: t.clone(),
                                    });
                                }
                            }
                        }
                    }
                },
                Value::Lazy(_) => {
                    for t in carrier(ty, &self.domain, cfg)? {
                        if value.atom(&t)? == v {
                            out.push(DomainAtom { pred: p.clone(), args: t });
                        }
                    }
                }
                Value::Elem(_) => {}
            }
        }
        Ok(out)
    }

    /// Exact iff every materialized predicate value is exact.
    pub fn is_exact(&self) -> bool {
        self.values.values().all(|v| match v {
            Value::Rel(r) => r.is_exact(),
            _ => true,
        })
    }

    fn compare(&self, other: &Self, cfg: &Config, leq: fn(ThreeVal, ThreeVal) -> bool) -> Result<bool> {
        if self.domain != other.domain || self.vocab != other.vocab {
            return Ok(false);
        }
        for (name, a) in &self.values {
            let b = &other.values[name];
            let ty = self.vocab.type_of(name).expect("symbol in vocabulary");
            let ok = match (a, b) {
                (Value::Rel(x), Value::Rel(y)) => x.pointwise(y, ty, &self.domain, cfg, leq)?,
                _ => a == b,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Pointwise precision order; `false` unless vocabularies, domains and
    /// non-predicate values coincide.
    pub fn leq_prec(&self, other: &Self, cfg: &Config) -> Result<bool> {
        self.compare(other, cfg, ThreeVal::leq_prec)
    }

    pub fn leq_truth(&self, other: &Self, cfg: &Config) -> Result<bool> {
        self.compare(other, cfg, ThreeVal::leq_truth)
    }

    /// Every exact refinement on the symbols in `over`, identical elsewhere.
    pub fn completions(&self, over: &[Sym], cfg: &Config) -> Result<Completions> {
        let unknown = self.atoms_with_value(over, ThreeVal::U, cfg)?;
        if unknown.len() >= 63 || (1usize << unknown.len()) > cfg.max_completions {
            return Err(Error::Cap {
                what: "exact completions",
                limit: cfg.max_completions,
            });
        }
        Ok(Completions {
            base: self.clone(),
            unknown,
            next: 0,
        })
    }
}

impl PartialInterpretation {
    /// All exact interpretations that refine this one and also interpret
    /// the symbols of `extra`: unknown atoms are completed both ways, new
    /// predicates range over all exact values and new constants over the
    /// domain. Ordered by constants first, then completion number.
    pub fn exact_expansions(&self, extra: &Vocabulary, cfg: &Config) -> Result<Vec<PartialInterpretation>> {
        let mut partial = self.clone();
        let mut constants = Vec::new();
        for (s, info) in extra.iter() {
            if partial.interprets(s) {
                continue;
            }
            if info.ty == Type::Dom {
                constants.push(s.clone());
            } else {
                let rel = Relation::uniform(&info.ty, self.domain.size(), ThreeVal::U)?;
                partial.set(s.clone(), info.ty.clone(), Value::rel(rel))?;
                partial.set_flags(s, info.flags);
            }
        }
        let preds: Vec<Sym> = partial
            .vocab
            .iter()
            .filter(|(_, i)| i.ty.is_predicate())
            .map(|(s, _)| s.clone())
            .collect();
        let completions = partial.completions(&preds, cfg)?;
        let assignments = (self.domain.size() as u64)
            .checked_pow(constants.len() as u32)
            .filter(|n| n.saturating_mul(completions.total()) <= cfg.max_completions as u64)
            .ok_or(Error::Cap {
                what: "exact expansions",
                limit: cfg.max_completions,
            })?;
        let mut out = Vec::new();
        for a in 0..assignments {
            let elems = index_tuple(a as usize, constants.len(), self.domain.size());
            for mask in 0..completions.total() {
                let mut i = completions.nth_completion(mask);
                for (c, e) in constants.iter().zip(&elems) {
                    i.set(c.clone(), Type::Dom, Value::Elem(*e))?;
                    if let Some(info) = extra.get(c) {
                        i.set_flags(c, info.flags);
                    }
                }
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// Iterator over the exact completions of an interpretation.
pub struct Completions {
    base: PartialInterpretation,
    unknown: Vec<DomainAtom>,
    next: u64,
}

impl Completions {
    pub fn total(&self) -> u64 {
        1u64 << self.unknown.len()
    }

    pub fn unknown_atoms(&self) -> &[DomainAtom] {
        &self.unknown
    }

    /// The completion numbered `mask`.
    pub fn nth_completion(&self, mask: u64) -> PartialInterpretation {
        let mut out = self.base.clone();
        for (i, atom) in self.unknown.iter().enumerate() {
            let v = ThreeVal::from_bool(mask >> i & 1 == 1);
            if let Some(Value::Rel(r)) = out.values.get_mut(&atom.pred) {
                Arc::make_mut(r).set(&atom.args, v);
            }
        }
        out
    }
}

impl Iterator for Completions {
    type Item = PartialInterpretation;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= 1u64 << self.unknown.len() {
            return None;
        }
        let out = self.nth_completion(self.next);
        self.next += 1;
        Some(out)
    }
}
