//! Second-order templates: libraries, their unique expansion, templification
//! of user definitions, macro expansion and elimination of existential
//! second-order quantifiers.
//!
//! A library's template symbols are evaluated lazily. Querying one atom
//! collects the template atoms its bodies can read (evaluating with all of
//! them unknown), closes that set under dependency, computes the well-founded
//! model of the template restricted to it and caches every value found.
//! Template values depend only on the domain, so one cache serves every
//! structure over that domain.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::ast::{classify, Expr, Fragment, Rule, RuleSet, Term};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{eval_exact, settle, Env};
use crate::interp::{
    carrier, so_arg_atoms, tuple_index, Arg, ArgType, Domain, PartialInterpretation, Relation, RelationOracle, Sym,
    SymbolFlags, Tuple, Type, Value, Vocabulary,
};
use crate::par;
use crate::parser::Document;
use crate::rewrite::{all_symbols, has_so_quantifier, rule_set_symbols, subst, subst_rules, uniquify, Fresh, Repl};
use crate::structure::format_atom;
use crate::values::{Quantifier, ThreeVal};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub rules: RuleSet,
}

/// Templates together with the types of their symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TemplateLibrary {
    vocab: Vocabulary,
    templates: Vec<Template>,
}

/// A violated library condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LibraryIssue {
    Duplicate { symbol: String, templates: Vec<String> },
    Foreign { template: String, symbol: String },
    Cycle(Vec<String>),
    NonTotal { template: String, domain: String, atom: String },
    Undecided { template: String, domain: String, reason: String },
}

impl fmt::Display for LibraryIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LibraryIssue::Duplicate { symbol, templates } => {
                write!(f, "`{symbol}` is defined in several templates: {}", templates.join(", "))
            }
            LibraryIssue::Foreign { template, symbol } => {
                write!(f, "template {template} uses `{symbol}`, which is not a template symbol")
            }
            LibraryIssue::Cycle(c) => write!(f, "templates depend on each other cyclically: {}", c.join(" -> ")),
            LibraryIssue::NonTotal { template, domain, atom } => {
                write!(f, "template {template} is not total on {domain}: {atom} is unknown")
            }
            LibraryIssue::Undecided {
                template,
                domain,
                reason,
            } => write!(f, "template {template} could not be checked on {domain}: {reason}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LibraryReport {
    /// Template names in a stratification order (empty if there is none).
    pub order: Vec<String>,
    pub issues: Vec<LibraryIssue>,
}

impl LibraryReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

pub(crate) fn domain_text(d: &Domain) -> String {
    let names: Vec<String> = d.elems().map(|e| d.name(e).to_string()).collect();
    format!("{{{}}}", names.join(", "))
}

impl TemplateLibrary {
    pub fn new(vocab: Vocabulary, templates: Vec<Template>) -> Self {
        TemplateLibrary { vocab, templates }
    }

    /// The template blocks of a document, with the template-flagged part of
    /// its vocabulary.
    pub fn from_document(doc: &Document) -> Self {
        let names: Vec<Sym> = doc
            .vocab
            .iter()
            .filter(|(_, i)| i.flags.template)
            .map(|(s, _)| s.clone())
            .collect();
        TemplateLibrary {
            vocab: doc.vocab.select(&names),
            templates: doc
                .templates()
                .map(|(n, d)| Template {
                    name: n.to_string(),
                    rules: d.clone(),
                })
                .collect(),
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Template symbol to the (first) template defining it.
    fn owners(&self) -> BTreeMap<Sym, usize> {
        let mut out = BTreeMap::new();
        for (k, t) in self.templates.iter().enumerate() {
            for s in t.rules.defined() {
                out.entry(s).or_insert(k);
            }
        }
        out
    }

    fn defs_of(&self, k: usize) -> Result<Vec<(Sym, Type)>> {
        self.templates[k]
            .rules
            .defined()
            .into_iter()
            .map(|s| {
                let ty = self
                    .vocab
                    .type_of(&s)
                    .cloned()
                    .ok_or_else(|| Error::Library(format!("template symbol `{s}` has no declared type")))?;
                Ok((s, ty))
            })
            .collect()
    }

    /// A topological order of the templates, or a dependency cycle.
    fn stratify(&self) -> std::result::Result<Vec<usize>, Vec<usize>> {
        let owners = self.owners();
        let n = self.templates.len();
        let deps: Vec<BTreeSet<usize>> = self
            .templates
            .iter()
            .enumerate()
            .map(|(k, t)| {
                t.rules
                    .parameters()
                    .iter()
                    .filter_map(|s| owners.get(s).copied())
                    .filter(|o| *o != k)
                    .collect()
            })
            .collect();
        let mut done = vec![false; n];
        let mut order = Vec::new();
        while order.len() < n {
            match (0..n).find(|k| !done[*k] && deps[*k].iter().all(|d| done[*d])) {
                Some(k) => {
                    done[k] = true;
                    order.push(k);
                }
                None => {
                    // Walk dependencies among the remaining templates until
                    // one repeats.
                    let mut path = vec![(0..n).find(|k| !done[*k]).unwrap()];
                    loop {
                        let last = *path.last().unwrap();
                        let next = *deps[last].iter().find(|d| !done[**d]).unwrap();
                        if let Some(pos) = path.iter().position(|p| *p == next) {
                            let mut cycle = path[pos..].to_vec();
                            cycle.push(next);
                            return Err(cycle);
                        }
                        path.push(next);
                    }
                }
            }
        }
        Ok(order)
    }

    fn structural_issues(&self) -> (Vec<LibraryIssue>, Vec<usize>) {
        let mut issues = Vec::new();
        let mut defined_in: BTreeMap<Sym, Vec<String>> = BTreeMap::new();
        for t in &self.templates {
            for s in t.rules.defined() {
                defined_in.entry(s).or_default().push(t.name.clone());
            }
        }
        for (s, ts) in &defined_in {
            if ts.len() > 1 {
                issues.push(LibraryIssue::Duplicate {
                    symbol: s.to_string(),
                    templates: ts.clone(),
                });
            }
        }
        for t in &self.templates {
            for s in t.rules.free_symbols() {
                let ok = self.vocab.get(&s).is_some_and(|i| i.flags.template || i.flags.interpreted);
                if !ok {
                    issues.push(LibraryIssue::Foreign {
                        template: t.name.clone(),
                        symbol: s.to_string(),
                    });
                }
            }
        }
        let order = match self.stratify() {
            Ok(o) => o,
            Err(cycle) => {
                issues.push(LibraryIssue::Cycle(
                    cycle.into_iter().map(|k| self.templates[k].name.clone()).collect(),
                ));
                Vec::new()
            }
        };
        (issues, order)
    }

    /// The single-rule, first-order, non-recursive templates used as macros:
    /// symbol to (head variables, body).
    fn macros(&self) -> Result<HashMap<Sym, (Vec<Sym>, Expr)>> {
        let mut out = HashMap::new();
        for t in &self.templates {
            let [r] = t.rules.rules.as_slice() else {
                return Err(Error::Library(format!("template {} is not a single rule", t.name)));
            };
            let mut vars = Vec::new();
            for a in &r.args {
                match a {
                    Term::Name(v) if r.vars.contains(v) && !vars.contains(v) => vars.push(v.clone()),
                    _ => {
                        return Err(Error::Library(format!(
                            "template {} has a head argument `{a}` that is not a distinct variable",
                            t.name
                        )))
                    }
                }
            }
            if classify(&r.body) != Fragment::Fo {
                return Err(Error::Library(format!("the body of template {} is not first-order", t.name)));
            }
            if r.body.free_symbols().contains(&r.head) {
                return Err(Error::Library(format!("template {} is recursive", t.name)));
            }
            if out.insert(r.head.clone(), (vars, r.body.clone())).is_some() {
                return Err(Error::Library(format!("`{}` is defined in several templates", r.head)));
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Lazy evaluation of template symbols.

struct LibraryState {
    lib: TemplateLibrary,
    owners: BTreeMap<Sym, usize>,
    domain: Arc<Domain>,
    cfg: Config,
    cache: Mutex<HashMap<(Sym, Tuple), ThreeVal>>,
}

/// Answers atom queries of one template symbol.
pub struct TemplateOracle {
    state: Arc<LibraryState>,
    sym: Sym,
}

impl fmt::Debug for TemplateOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TemplateOracle({})", self.sym)
    }
}

impl RelationOracle for TemplateOracle {
    fn atom(&self, args: &[Arg]) -> Result<ThreeVal> {
        LibraryState::value(&self.state, &self.sym, args)
    }
}

impl LibraryState {
    fn lazy_values(state: &Arc<Self>) -> Result<PartialInterpretation> {
        let mut i = PartialInterpretation::with_domain(state.domain.clone());
        for s in state.owners.keys() {
            let ty = state
                .lib
                .vocab
                .type_of(s)
                .cloned()
                .ok_or_else(|| Error::Library(format!("template symbol `{s}` has no declared type")))?;
            let oracle = TemplateOracle {
                state: state.clone(),
                sym: s.clone(),
            };
            i.set(s.clone(), ty, Value::Lazy(Arc::new(oracle)))?;
            i.set_flags(s, SymbolFlags::template());
        }
        Ok(i)
    }

    fn value(state: &Arc<Self>, s: &Sym, args: &[Arg]) -> Result<ThreeVal> {
        let key = (s.clone(), Tuple::from_slice(args));
        if let Some(v) = state.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let k = *state.owners.get(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
        let defs = state.lib.defs_of(k)?;
        let idx = defs.iter().position(|(d, _)| d == s).expect("owner defines the symbol");
        let base = Self::lazy_values(state)?;
        let mut env = Env::new(&base, &state.cfg);
        let found = settle(env.relevant_wfm(
            &state.lib.templates[k].rules,
            &defs,
            (idx, key.1.clone()),
            state.cfg.max_carrier,
        ))?;
        let mut cache = state.cache.lock().expect("cache lock");
        let mut result = ThreeVal::U;
        for ((d, t), v) in found {
            if d == idx && t == key.1 {
                result = v;
            }
            cache.insert((defs[d].0.clone(), t), v);
        }
        Ok(result)
    }
}

/// A library evaluated over one domain; its template values can be added
/// to any structure over that domain.
pub struct LibraryInstance {
    values: PartialInterpretation,
}

impl LibraryInstance {
    pub fn new(lib: &TemplateLibrary, domain: Arc<Domain>, cfg: &Config) -> Result<Self> {
        if let Err(cycle) = lib.stratify() {
            let names: Vec<String> = cycle.into_iter().map(|k| lib.templates[k].name.clone()).collect();
            return Err(Error::Library(format!("templates are not stratified: {}", names.join(" -> "))));
        }
        let state = Arc::new(LibraryState {
            owners: lib.owners(),
            lib: lib.clone(),
            domain,
            cfg: cfg.clone(),
            cache: Mutex::new(HashMap::new()),
        });
        Ok(LibraryInstance {
            values: LibraryState::lazy_values(&state)?,
        })
    }

    /// Lazily computed values of the template symbols.
    pub fn values(&self) -> &PartialInterpretation {
        &self.values
    }

    /// Expands `i` with the template symbols.
    pub fn apply(&self, i: &PartialInterpretation) -> Result<PartialInterpretation> {
        if i.domain() != self.values.domain() {
            return Err(Error::Contract("library instance built for another domain".into()));
        }
        let mut out = i.clone();
        for (s, v) in self.values.values() {
            if i.interprets(s) {
                return Err(Error::Library(format!("`{s}` is interpreted by the structure and the library")));
            }
            let ty = self.values.vocabulary().type_of(s).expect("typed").clone();
            out.set(s.clone(), ty, v.clone())?;
            out.set_flags(s, SymbolFlags::template());
        }
        Ok(out)
    }
}

/// Expands `i` with the values of the library's template symbols, each the
/// well-founded model of its template given the lower strata. Values are
/// computed on demand; see [`materialize`].
pub fn apply_library(i: &PartialInterpretation, lib: &TemplateLibrary, cfg: &Config) -> Result<PartialInterpretation> {
    LibraryInstance::new(lib, i.domain_arc().clone(), cfg)?.apply(i)
}

/// Replaces lazily computed values by explicit relations.
pub fn materialize(i: &PartialInterpretation, cfg: &Config) -> Result<PartialInterpretation> {
    let mut out = i.clone();
    for (s, v) in i.values() {
        let Value::Lazy(oracle) = v else { continue };
        let ty = i.vocabulary().type_of(s).expect("typed").clone();
        let tuples = carrier(&ty, i.domain(), cfg)?;
        let vals = par::map(cfg.parallel, tuples.clone(), |t| oracle.atom(&t));
        let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
        // The most frequent value becomes the default of a sparse relation.
        let default = [ThreeVal::F, ThreeVal::U, ThreeVal::T]
            .into_iter()
            .max_by_key(|x| (vals.iter().filter(|v| *v == x).count(), std::cmp::Reverse(*x)))
            .expect("three candidates");
        let mut rel = Relation::uniform(&ty, i.domain().size(), default)?;
        for (t, v) in tuples.iter().zip(vals) {
            rel.set(t, v);
        }
        let flags = i.vocabulary().get(s).map(|x| x.flags).unwrap_or_default();
        out.set(s.clone(), ty, Value::rel(rel))?;
        out.set_flags(s, flags);
    }
    Ok(out)
}

/// Checks uniqueness of definitions, that templates only use template
/// symbols, stratification, and totality of every template on each test
/// domain (given the values of the lower strata).
pub fn validate_library(lib: &TemplateLibrary, domains: &[Domain], cfg: &Config) -> Result<LibraryReport> {
    let (mut issues, order) = lib.structural_issues();
    let names: Vec<String> = order.iter().map(|k| lib.templates[*k].name.clone()).collect();
    if !issues.is_empty() {
        return Ok(LibraryReport { order: names, issues });
    }
    for domain in domains {
        let dtext = domain_text(domain);
        let inst = LibraryInstance::new(lib, Arc::new(domain.clone()), cfg)?;
        for &k in &order {
            let t = &lib.templates[k];
            if let Some(issue) = check_total(&inst, lib, k, domain, &dtext, cfg)? {
                let _ = t;
                issues.push(issue);
            }
        }
    }
    Ok(LibraryReport { order: names, issues })
}

fn check_total(
    inst: &LibraryInstance,
    lib: &TemplateLibrary,
    k: usize,
    domain: &Domain,
    dtext: &str,
    cfg: &Config,
) -> Result<Option<LibraryIssue>> {
    let t = &lib.templates[k];
    let undecided = |reason: String| {
        Ok(Some(LibraryIssue::Undecided {
            template: t.name.clone(),
            domain: dtext.to_string(),
            reason,
        }))
    };
    for (s, ty) in lib.defs_of(k)? {
        let tuples = match carrier(&ty, domain, cfg) {
            Ok(ts) => ts,
            Err(e) if e.is_cap() => return undecided(e.to_string()),
            Err(e) => return Err(e),
        };
        let value = inst.values.value(&s).expect("template symbol").clone();
        let vals = par::map(cfg.parallel, tuples.clone(), |tup| value.atom(&tup));
        for (tup, v) in tuples.iter().zip(vals) {
            match v {
                Ok(ThreeVal::U) => {
                    return Ok(Some(LibraryIssue::NonTotal {
                        template: t.name.clone(),
                        domain: dtext.to_string(),
                        atom: format_atom(domain, &s, tup, &ty),
                    }))
                }
                Ok(_) => {}
                Err(e @ (Error::Cap { .. } | Error::NonTotal(_))) => return undecided(e.to_string()),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Templification.

/// A user definition turned into a template over its open symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Templified {
    pub rules: RuleSet,
    /// Types of the new template symbols, flagged as template symbols.
    pub vocab: Vocabulary,
    /// Defined symbol to its templified counterpart.
    pub map: BTreeMap<Sym, Sym>,
    /// The open symbols, in argument order.
    pub open: Vec<Sym>,
}

impl Templified {
    pub fn library(&self) -> TemplateLibrary {
        TemplateLibrary::new(
            self.vocab.clone(),
            vec![Template {
                name: "templified".into(),
                rules: self.rules.clone(),
            }],
        )
    }
}

fn capitalized(s: &Sym) -> Sym {
    let mut cs = s.as_str().chars();
    match cs.next() {
        Some(c) => Sym::new(&format!("{}{}", c.to_uppercase(), cs.as_str())),
        None => s.clone(),
    }
}

/// Abstracts the open symbols of a definition: every defined atom `P(t̄)`
/// becomes `P'(t̄, ō)` with the open symbols `ō` turned into rule variables.
/// When `open` is `None`, it is every parameter that is not a template
/// symbol, in name order.
pub fn templify(d: &RuleSet, open: Option<&[Sym]>, vocab: &Vocabulary) -> Result<Templified> {
    let is_template = |s: &Sym| vocab.get(s).is_some_and(|i| i.flags.template);
    if let Some(s) = d.defined().iter().find(|s| is_template(s)) {
        return Err(Error::Rewrite(format!("`{s}` is a template symbol and cannot be templified")));
    }
    let pars = d.parameters();
    let open: Vec<Sym> = match open {
        Some(o) => o.to_vec(),
        None => pars.iter().filter(|s| !is_template(s)).cloned().collect(),
    };
    if let Some(s) = pars.iter().find(|s| !is_template(s) && !open.contains(s)) {
        return Err(Error::Rewrite(format!("parameter `{s}` is neither open nor a template symbol")));
    }
    let mut used = BTreeSet::new();
    rule_set_symbols(d, &mut used);
    used.extend(vocab.names().cloned());
    let mut fresh = Fresh::new(used);

    let mut open_types = Vec::new();
    let mut extra = Vec::new();
    let mut map = HashMap::new();
    for o in &open {
        let n = match vocab.type_of(o) {
            Some(Type::Pred(n)) => *n,
            Some(Type::Bool) => 0,
            Some(t) => return Err(Error::Rewrite(format!("open symbol `{o}` has type {t}, not a first-order predicate"))),
            None => return Err(Error::UnknownSymbol(o.to_string())),
        };
        let upper = capitalized(o);
        let var = if upper != *o && !fresh.is_used(&upper) {
            fresh.reserve(&upper);
            upper
        } else {
            fresh.fresh(&upper)
        };
        open_types.push(ArgType::Pred(n));
        extra.push(Term::Name(var.clone()));
        map.insert(o.clone(), Repl::Term(Term::Name(var)));
    }
    let mut new_vocab = Vocabulary::new();
    let mut renamed = BTreeMap::new();
    for p in d.defined() {
        let ty = vocab
            .type_of(&p)
            .cloned()
            .unwrap_or_else(|| Type::Pred(d.rules.iter().find(|r| r.head == p).map_or(0, |r| r.args.len())));
        if ty.is_second_order() || !ty.is_predicate() {
            return Err(Error::Rewrite(format!("defined symbol `{p}` is not a first-order predicate")));
        }
        let primed = Sym::new(&format!("{p}'"));
        let name = if fresh.is_used(&primed) { fresh.fresh(&p) } else { primed };
        fresh.reserve(&name);
        let mut args = ty.arg_types();
        args.extend(open_types.iter().copied());
        new_vocab.declare(name.clone(), Type::SoPred(args), SymbolFlags::template())?;
        map.insert(p.clone(), Repl::Extend(name.clone(), extra.clone()));
        renamed.insert(p, name);
    }
    let mut rules = subst_rules(d, &map, &mut None)?;
    let vars: Vec<Sym> = extra.iter().filter_map(Term::symbol).cloned().collect();
    for r in &mut rules.rules {
        r.vars.extend(vars.iter().cloned());
    }
    for (s, info) in vocab.iter().filter(|(s, i)| i.flags.template && pars.contains(*s)) {
        new_vocab.declare(s.clone(), info.ty.clone(), info.flags)?;
    }
    Ok(Templified {
        rules,
        vocab: new_vocab,
        map: renamed,
        open,
    })
}

/// For each defined `P`: `P^i = {d̄ | (d̄, ō^i) ∈ P'^{i'}}`, compared
/// pointwise in three values. The open symbols must be exact in `i`.
pub fn check_correspondence(
    t: &Templified,
    i: &PartialInterpretation,
    i_temp: &PartialInterpretation,
    cfg: &Config,
) -> Result<bool> {
    let domain = i.domain();
    let mut masks = Vec::new();
    for o in &t.open {
        let n = i.vocabulary().type_of(o).map_or(0, Type::arity);
        let atoms = so_arg_atoms(n, domain, cfg)?;
        let mut mask = 0u64;
        for idx in 0..atoms {
            let tuple: Tuple = crate::interp::index_tuple(idx, n, domain.size())
                .into_iter()
                .map(Arg::Elem)
                .collect();
            let v = i
                .value(o)
                .ok_or_else(|| Error::UnknownSymbol(o.to_string()))?
                .atom(&tuple)?;
            match v {
                ThreeVal::T => mask |= 1 << idx,
                ThreeVal::F => {}
                ThreeVal::U => return Err(Error::Contract(format!("open symbol `{o}` is not exact"))),
            }
        }
        masks.push(Arg::Rel(mask));
    }
    for (p, q) in &t.map {
        let ty = i.vocabulary().type_of(p).ok_or_else(|| Error::UnknownSymbol(p.to_string()))?;
        let pv = i.value(p).expect("typed symbol has a value");
        let qv = i_temp.value(q).ok_or_else(|| Error::UnknownSymbol(q.to_string()))?;
        for tup in carrier(ty, domain, cfg)? {
            let mut ext = tup.clone();
            ext.extend(masks.iter().copied());
            if pv.atom(&tup)? != qv.atom(&ext)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Macro expansion.

fn check_no_template_definitions(e: &Expr, templates: &HashMap<Sym, (Vec<Sym>, Expr)>) -> Result<()> {
    let check = |d: &RuleSet| -> Result<()> {
        match d.defined().into_iter().find(|s| templates.contains_key(s)) {
            Some(s) => Err(Error::Rewrite(format!("the formula defines template symbol `{s}`"))),
            None => d.rules.iter().try_for_each(|r| check_no_template_definitions(&r.body, templates)),
        }
    };
    match e {
        Expr::Atom(..) | Expr::Cmp(..) => Ok(()),
        Expr::Not(x) => check_no_template_definitions(x, templates),
        Expr::And(es) | Expr::Or(es) => es.iter().try_for_each(|x| check_no_template_definitions(x, templates)),
        Expr::Implies(a, b) | Expr::Iff(a, b) => {
            check_no_template_definitions(a, templates)?;
            check_no_template_definitions(b, templates)
        }
        Expr::Quant(_, _, _, b) => check_no_template_definitions(b, templates),
        Expr::Aggregate(a) => check_no_template_definitions(&a.body, templates),
        Expr::Definition(d) => check(d),
        Expr::Let(d, b) => {
            check(d)?;
            check_no_template_definitions(b, templates)
        }
    }
}

struct Expander<'a> {
    templates: &'a HashMap<Sym, (Vec<Sym>, Expr)>,
    fresh: Fresh,
    stack: Vec<Sym>,
}

impl Expander<'_> {
    fn expr(&mut self, e: &Expr) -> Result<Expr> {
        Ok(match e {
            Expr::Atom(p, args) if self.templates.contains_key(p) => {
                if self.stack.contains(p) {
                    return Err(Error::Rewrite(format!("template `{p}` is used recursively")));
                }
                let (vars, body) = &self.templates[p];
                if vars.len() != args.len() {
                    return Err(Error::Arity {
                        what: p.to_string(),
                        expected: vars.len(),
                        found: args.len(),
                    });
                }
                let map: HashMap<Sym, Repl> = vars
                    .iter()
                    .cloned()
                    .zip(args.iter().map(|a| Repl::Term(a.clone())))
                    .collect();
                let instance = subst(body, &map, &mut Some(&mut self.fresh))?;
                self.stack.push(p.clone());
                let out = self.expr(&instance)?;
                self.stack.pop();
                out
            }
            Expr::Atom(..) | Expr::Cmp(..) => e.clone(),
            Expr::Not(x) => Expr::Not(Box::new(self.expr(x)?)),
            Expr::And(es) => Expr::And(es.iter().map(|x| self.expr(x)).collect::<Result<_>>()?),
            Expr::Or(es) => Expr::Or(es.iter().map(|x| self.expr(x)).collect::<Result<_>>()?),
            Expr::Implies(a, b) => Expr::Implies(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Iff(a, b) => Expr::Iff(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Quant(q, x, ty, b) => Expr::Quant(*q, x.clone(), ty.clone(), Box::new(self.expr(b)?)),
            Expr::Aggregate(a) => {
                let mut a = a.clone();
                a.body = Box::new(self.expr(&a.body)?);
                Expr::Aggregate(a)
            }
            Expr::Definition(d) => Expr::Definition(self.rules(d)?),
            Expr::Let(d, b) => Expr::Let(self.rules(d)?, Box::new(self.expr(b)?)),
        })
    }

    fn rules(&mut self, d: &RuleSet) -> Result<RuleSet> {
        let rules = d
            .rules
            .iter()
            .map(|r| {
                Ok(Rule {
                    vars: r.vars.clone(),
                    head: r.head.clone(),
                    args: r.args.clone(),
                    body: self.expr(&r.body)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(RuleSet::new(rules))
    }
}

/// Replaces every template atom by the template's body instantiated with
/// its arguments, until no template symbol remains. Bound names of inserted
/// bodies are freshened (`x_1`, `x_2`, ...) deterministically.
pub fn macro_expand(phi: &Expr, lib: &TemplateLibrary) -> Result<Expr> {
    let templates = lib.macros()?;
    check_no_template_definitions(phi, &templates)?;
    let mut used = BTreeSet::new();
    all_symbols(phi, &mut used);
    for t in &lib.templates {
        rule_set_symbols(&t.rules, &mut used);
    }
    used.extend(lib.vocab.names().cloned());
    let mut x = Expander {
        templates: &templates,
        fresh: Fresh::new(used),
        stack: Vec::new(),
    };
    x.expr(phi)
}

// ---------------------------------------------------------------------------
// Second-order quantifier elimination.

/// Result of [`eliminate_so`]: a first-order formula over the input
/// vocabulary extended with `new_symbols`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eliminated {
    pub expr: Expr,
    pub new_symbols: Vec<(Sym, Type)>,
}

impl Eliminated {
    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        for (s, t) in &self.new_symbols {
            v.declare(s.clone(), t.clone(), SymbolFlags::user()).expect("fresh symbols");
        }
        v
    }
}

struct Hoister {
    fresh: Fresh,
    universals: Vec<Sym>,
    new_symbols: Vec<(Sym, Type)>,
}

impl Hoister {
    fn no_so(&self, e: &Expr, what: &str) -> Result<Expr> {
        if has_so_quantifier(e) {
            Err(Error::Rewrite(format!("second-order quantifier inside {what}")))
        } else {
            Ok(e.clone())
        }
    }

    fn expr(&mut self, e: &Expr, positive: bool) -> Result<Expr> {
        Ok(match e {
            Expr::Atom(..) | Expr::Cmp(..) => e.clone(),
            Expr::Not(x) => Expr::Not(Box::new(self.expr(x, !positive)?)),
            Expr::And(es) => Expr::And(es.iter().map(|x| self.expr(x, positive)).collect::<Result<_>>()?),
            Expr::Or(es) => Expr::Or(es.iter().map(|x| self.expr(x, positive)).collect::<Result<_>>()?),
            Expr::Implies(a, b) => Expr::Implies(Box::new(self.expr(a, !positive)?), Box::new(self.expr(b, positive)?)),
            Expr::Iff(..) => self.no_so(e, "an equivalence")?,
            Expr::Aggregate(_) => self.no_so(e, "an aggregate")?,
            Expr::Definition(_) => self.no_so(e, "a definition")?,
            Expr::Let(..) => self.no_so(e, "a let block")?,
            Expr::Quant(q, x, Type::Dom, body) => {
                let universal = (*q == Quantifier::Forall) == positive;
                if universal {
                    self.universals.push(x.clone());
                }
                let b = self.expr(body, positive)?;
                if universal {
                    self.universals.pop();
                }
                Expr::Quant(*q, x.clone(), Type::Dom, Box::new(b))
            }
            Expr::Quant(q, x, ty, body) => {
                let existential = (*q == Quantifier::Exists) == positive;
                if !existential {
                    return Err(Error::Rewrite(format!(
                        "`{x}` is universally quantified over predicates; only existential ones can be eliminated"
                    )));
                }
                let n = ty.arity();
                let extra: Vec<Term> = self.universals.iter().cloned().map(Term::Name).collect();
                let b = self.expr(body, positive)?;
                let name = self.fresh.fresh(x);
                self.new_symbols.push((name.clone(), Type::Pred(n + extra.len())));
                let mut map = HashMap::new();
                map.insert(x.clone(), Repl::Extend(name, extra));
                subst(&b, &map, &mut None)?
            }
        })
    }
}

/// Moves every effectively existential second-order quantifier to the front
/// (a predicate quantified under universal variables `x̄` gains them as extra
/// arguments) and replaces it by a fresh free predicate `P_N`.
pub fn eliminate_so(phi: &Expr, vocab: &Vocabulary) -> Result<Eliminated> {
    let mut used = BTreeSet::new();
    all_symbols(phi, &mut used);
    used.extend(vocab.names().cloned());
    let mut fresh = Fresh::new(used);
    let unique = uniquify(phi, &mut fresh)?;
    let mut h = Hoister {
        fresh,
        universals: Vec::new(),
        new_symbols: Vec::new(),
    };
    let expr = h.expr(&unique, true)?;
    Ok(Eliminated {
        expr,
        new_symbols: h.new_symbols,
    })
}

// ---------------------------------------------------------------------------
// Equivalence oracles.

/// Searches the exact structures of `sigma` over `domain` for one on which
/// `left` and `right` disagree.
pub fn find_disagreement<L, R>(
    sigma: &Vocabulary,
    domain: &Domain,
    left: L,
    right: R,
    cfg: &Config,
) -> Result<Option<PartialInterpretation>>
where
    L: Fn(&PartialInterpretation) -> Result<bool> + Sync + Send,
    R: Fn(&PartialInterpretation) -> Result<bool> + Sync + Send,
{
    let structures = PartialInterpretation::empty(domain.clone()).exact_expansions(sigma, cfg)?;
    let verdicts = par::map(cfg.parallel, structures, |i| {
        let agree = left(&i)? == right(&i)?;
        Ok::<_, Error>((!agree).then_some(i))
    });
    for v in verdicts {
        if let Some(i) = v? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// `{phi} ∪ L` and `expanded` have the same models over `sigma` on `domain`;
/// returns a counterexample otherwise.
pub fn check_expansion(
    phi: &Expr,
    expanded: &Expr,
    lib: &TemplateLibrary,
    sigma: &Vocabulary,
    domain: &Domain,
    cfg: &Config,
) -> Result<Option<PartialInterpretation>> {
    let inst = LibraryInstance::new(lib, Arc::new(domain.clone()), cfg)?;
    find_disagreement(
        sigma,
        domain,
        |i| Ok(eval_exact(phi, &inst.apply(i)?, cfg)? == ThreeVal::T),
        |i| Ok(eval_exact(expanded, i, cfg)? == ThreeVal::T),
        cfg,
    )
}

/// `phi` holds in a structure over `sigma` iff some interpretation of the
/// new symbols satisfies the eliminated formula.
pub fn check_elimination(
    phi: &Expr,
    out: &Eliminated,
    sigma: &Vocabulary,
    domain: &Domain,
    cfg: &Config,
) -> Result<Option<PartialInterpretation>> {
    let extra = out.vocabulary();
    find_disagreement(
        sigma,
        domain,
        |i| Ok(eval_exact(phi, i, cfg)? == ThreeVal::T),
        |i| {
            for j in i.exact_expansions(&extra, cfg)? {
                if eval_exact(&out.expr, &j, cfg)? == ThreeVal::T {
                    return Ok(true);
                }
            }
            Ok(false)
        },
        cfg,
    )
}

/// Mask of an exact first-order relation value, for building
/// second-order arguments.
pub fn relation_mask(rel: &[Vec<crate::interp::Elem>], domain_size: usize) -> u64 {
    rel.iter().fold(0, |m, t| m | 1 << tuple_index(t.iter().copied(), domain_size))
}
