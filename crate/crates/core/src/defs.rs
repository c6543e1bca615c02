//! Well-founded, stable and partial stable semantics of rule sets.
//!
//! The checks here follow the definitions literally: an interpretation is
//! partial stable when it is supported (every defined atom takes the
//! maximum of its rule bodies), prudent (no nonempty set of true atoms can
//! be demoted to unknown, together with unknown atoms promoted to true, so
//! that the result is closed) and brave (the only unfounded set is empty).
//! [`Definition::partial_stable_models`] enumerates all `3^n` candidates.
//!
//! [`Definition::well_founded_model`] uses a direct refinement (make true
//! every atom with a true body, make false the greatest unfounded set,
//! repeat); [`Definition::well_founded_model_by_enumeration`] is the
//! brute-force least-element search it is tested against.

use std::collections::BTreeSet;

use crate::ast::RuleSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{body_values, eval_rule_set, wfm_relations, Semantics};
use crate::interp::{carrier, DomainAtom, PartialInterpretation, Relation, Sym, Tuple, Type, Value, Vocabulary};
use crate::par;
use crate::values::ThreeVal;

/// A rule set together with the types of the symbols it defines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    rules: RuleSet,
    defined: Vec<(Sym, Type)>,
}

/// Outcome of [`Definition::is_partial_stable`], with witnesses for every
/// failed condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableReport {
    pub interpretation: PartialInterpretation,
    pub supported: bool,
    pub prudent: bool,
    pub brave: bool,
    pub is_partial_stable: bool,
    pub is_wfm: bool,
    pub is_stable_exact: bool,
    /// Defined atoms whose value differs from the maximum of their bodies.
    pub unsupported: Vec<DomainAtom>,
    /// Sets `(T, U)` with `I[T:u][U:t]` closed.
    pub prudence_witness: Option<(Vec<DomainAtom>, Vec<DomainAtom>)>,
    /// A nonempty unfounded set.
    pub unfounded_witness: Option<Vec<DomainAtom>>,
}

fn subset<T: Clone>(items: &[T], mask: u64) -> Vec<T> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, x)| x.clone())
        .collect()
}

impl Definition {
    /// Defined symbols take their type from `vocab`; undeclared heads are
    /// first-order predicates of the arity they are used with.
    pub fn new(rules: RuleSet, vocab: &Vocabulary) -> Result<Self> {
        let mut defined = Vec::new();
        for s in rules.defined() {
            let ty = match vocab.type_of(&s) {
                Some(t) => t.clone(),
                None => {
                    let arity = rules.rules.iter().find(|r| r.head == s).map_or(0, |r| r.args.len());
                    Type::Pred(arity)
                }
            };
            if !ty.is_predicate() {
                return Err(Error::IllTyped {
                    symbol: s.to_string(),
                    reason: format!("defined symbols must be predicates, found {ty}"),
                });
            }
            defined.push((s, ty));
        }
        Ok(Definition { rules, defined })
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn defined(&self) -> &[(Sym, Type)] {
        &self.defined
    }

    fn atoms(&self, i: &PartialInterpretation, cfg: &Config) -> Result<Vec<(usize, Tuple)>> {
        let mut out = Vec::new();
        for (k, (_, ty)) in self.defined.iter().enumerate() {
            out.extend(carrier(ty, i.domain(), cfg)?.into_iter().map(|t| (k, t)));
            if out.len() > cfg.max_carrier {
                return Err(Error::Cap {
                    what: "defined atoms",
                    limit: cfg.max_carrier,
                });
            }
        }
        Ok(out)
    }

    fn domain_atom(&self, a: &(usize, Tuple)) -> DomainAtom {
        DomainAtom {
            pred: self.defined[a.0].0.clone(),
            args: a.1.clone(),
        }
    }

    /// Defined domain atoms in canonical order.
    pub fn defined_atoms(&self, i: &PartialInterpretation, cfg: &Config) -> Result<Vec<DomainAtom>> {
        Ok(self.atoms(i, cfg)?.iter().map(|a| self.domain_atom(a)).collect())
    }

    /// `o` without the defined symbols.
    pub fn context(&self, o: &PartialInterpretation) -> PartialInterpretation {
        let defined: BTreeSet<&Sym> = self.defined.iter().map(|(s, _)| s).collect();
        o.restrict_to(o.vocabulary().names().filter(|s| !defined.contains(s)))
    }

    fn assemble(&self, ctx: &PartialInterpretation, atoms: &[(usize, Tuple)], vals: &[ThreeVal]) -> Result<PartialInterpretation> {
        let size = ctx.domain().size();
        let mut rels = self
            .defined
            .iter()
            .map(|(_, ty)| Relation::uniform(ty, size, ThreeVal::F))
            .collect::<Result<Vec<_>>>()?;
        for ((k, t), v) in atoms.iter().zip(vals) {
            rels[*k].set(t, *v);
        }
        let mut out = ctx.clone();
        for ((s, ty), r) in self.defined.iter().zip(rels) {
            out.set(s.clone(), ty.clone(), Value::rel(r))?;
        }
        Ok(out)
    }

    fn values(&self, i: &PartialInterpretation, atoms: &[(usize, Tuple)]) -> Result<Vec<ThreeVal>> {
        atoms.iter().map(|a| i.atom_value(&self.domain_atom(a))).collect()
    }

    fn bodies(&self, i: &PartialInterpretation, atoms: &[(usize, Tuple)], cfg: &Config) -> Result<Vec<ThreeVal>> {
        body_values(&self.rules, &self.defined, atoms, i, cfg)
    }

    /// Every defined atom with a true body is true.
    pub fn is_closed(&self, i: &PartialInterpretation, cfg: &Config) -> Result<bool> {
        let atoms = self.atoms(i, cfg)?;
        self.closed_on(i, &atoms, cfg)
    }

    fn closed_on(&self, i: &PartialInterpretation, atoms: &[(usize, Tuple)], cfg: &Config) -> Result<bool> {
        let vals = self.values(i, atoms)?;
        let bodies = self.bodies(i, atoms, cfg)?;
        Ok(vals.iter().zip(&bodies).all(|(v, b)| *b != ThreeVal::T || *v == ThreeVal::T))
    }

    /// `u_set` consists of unknown defined atoms whose bodies are all false
    /// once the set is assumed false.
    pub fn is_unfounded(&self, i: &PartialInterpretation, u_set: &[DomainAtom], cfg: &Config) -> Result<bool> {
        let all = self.atoms(i, cfg)?;
        let mut atoms = Vec::new();
        for a in u_set {
            let found = all
                .iter()
                .find(|x| self.defined[x.0].0 == a.pred && x.1 == a.args)
                .ok_or_else(|| Error::Contract(format!("`{}` is not a defined atom", a.pred)))?;
            atoms.push(found.clone());
        }
        if self.values(i, &atoms)?.iter().any(|v| *v != ThreeVal::U) {
            return Ok(false);
        }
        let j = i.revise(u_set, ThreeVal::F)?;
        Ok(self.bodies(&j, &atoms, cfg)?.iter().all(|b| *b == ThreeVal::F))
    }

    fn subset_cap(&self, n: usize, cfg: &Config) -> Result<()> {
        if n > cfg.max_subset_atoms || n >= 63 {
            return Err(Error::Cap {
                what: "atoms in a prudence or braveness subset check",
                limit: cfg.max_subset_atoms,
            });
        }
        Ok(())
    }

    fn prudence_witness(
        &self,
        i: &PartialInterpretation,
        atoms: &[(usize, Tuple)],
        vals: &[ThreeVal],
        cfg: &Config,
    ) -> Result<Option<(Vec<DomainAtom>, Vec<DomainAtom>)>> {
        let trues: Vec<DomainAtom> = (0..atoms.len())
            .filter(|k| vals[*k] == ThreeVal::T)
            .map(|k| self.domain_atom(&atoms[k]))
            .collect();
        let unknowns: Vec<DomainAtom> = (0..atoms.len())
            .filter(|k| vals[*k] == ThreeVal::U)
            .map(|k| self.domain_atom(&atoms[k]))
            .collect();
        self.subset_cap(trues.len() + unknowns.len(), cfg)?;
        for tm in 1u64..1 << trues.len() {
            let t = subset(&trues, tm);
            let demoted = i.revise(&t, ThreeVal::U)?;
            for um in 0u64..1 << unknowns.len() {
                let u = subset(&unknowns, um);
                let j = demoted.revise(&u, ThreeVal::T)?;
                if self.closed_on(&j, atoms, cfg)? {
                    return Ok(Some((t, u)));
                }
            }
        }
        Ok(None)
    }

    fn unfounded_witness(
        &self,
        i: &PartialInterpretation,
        atoms: &[(usize, Tuple)],
        vals: &[ThreeVal],
        cfg: &Config,
    ) -> Result<Option<Vec<DomainAtom>>> {
        let unknowns: Vec<(usize, Tuple)> = (0..atoms.len())
            .filter(|k| vals[*k] == ThreeVal::U)
            .map(|k| atoms[k].clone())
            .collect();
        self.subset_cap(unknowns.len(), cfg)?;
        for m in 1u64..1 << unknowns.len() {
            let set = subset(&unknowns, m);
            let u: Vec<DomainAtom> = set.iter().map(|a| self.domain_atom(a)).collect();
            let j = i.revise(&u, ThreeVal::F)?;
            if self.bodies(&j, &set, cfg)?.iter().all(|b| *b == ThreeVal::F) {
                return Ok(Some(u));
            }
        }
        Ok(None)
    }

    /// Checks the three conditions of partial stability literally.
    pub fn is_partial_stable(&self, i: &PartialInterpretation, cfg: &Config) -> Result<StableReport> {
        let atoms = self.atoms(i, cfg)?;
        let vals = self.values(i, &atoms)?;
        let bodies = self.bodies(i, &atoms, cfg)?;
        let unsupported: Vec<DomainAtom> = atoms
            .iter()
            .zip(vals.iter().zip(&bodies))
            .filter(|(_, (v, b))| v != b)
            .map(|(a, _)| self.domain_atom(a))
            .collect();
        let prudence_witness = self.prudence_witness(i, &atoms, &vals, cfg)?;
        let unfounded_witness = self.unfounded_witness(i, &atoms, &vals, cfg)?;
        let supported = unsupported.is_empty();
        let prudent = prudence_witness.is_none();
        let brave = unfounded_witness.is_none();
        let is_partial_stable = supported && prudent && brave;
        let exact = vals.iter().all(|v| v.is_exact());
        let wfm = self.well_founded_model(&self.context(i), cfg)?;
        Ok(StableReport {
            interpretation: i.clone(),
            supported,
            prudent,
            brave,
            is_partial_stable,
            is_wfm: wfm.is_some_and(|w| self.values(&w, &atoms).ok().as_ref() == Some(&vals)),
            is_stable_exact: is_partial_stable && exact,
            unsupported,
            prudence_witness,
            unfounded_witness,
        })
    }

    /// Whether a candidate passes all three conditions; cheaper checks first.
    fn passes(&self, i: &PartialInterpretation, atoms: &[(usize, Tuple)], vals: &[ThreeVal], cfg: &Config) -> Result<bool> {
        if self.bodies(i, atoms, cfg)? != vals {
            return Ok(false);
        }
        Ok(self.unfounded_witness(i, atoms, vals, cfg)?.is_none() && self.prudence_witness(i, atoms, vals, cfg)?.is_none())
    }

    /// All partial stable expansions of the context, by enumerating every
    /// three-valued assignment to the defined atoms.
    pub fn partial_stable_models(&self, o: &PartialInterpretation, cfg: &Config) -> Result<Vec<PartialInterpretation>> {
        let ctx = self.context(o);
        let atoms = self.atoms(&ctx, cfg)?;
        if atoms.len() > cfg.max_defined_atoms {
            return Err(Error::Cap {
                what: "defined atoms for partial stable enumeration",
                limit: cfg.max_defined_atoms,
            });
        }
        let n = atoms.len() as u32;
        par::filter_map_range(cfg.parallel, 3u64.pow(n), |idx| {
            let mut rest = idx;
            let vals: Vec<ThreeVal> = (0..n)
                .map(|_| {
                    let v = ThreeVal::ALL[(rest % 3) as usize];
                    rest /= 3;
                    v
                })
                .collect();
            let i = self.assemble(&ctx, &atoms, &vals)?;
            Ok(self.passes(&i, &atoms, &vals, cfg)?.then_some(i))
        })
    }

    /// The well-founded model in the context `o`.
    pub fn well_founded_model(&self, o: &PartialInterpretation, cfg: &Config) -> Result<Option<PartialInterpretation>> {
        let ctx = self.context(o);
        let rels = wfm_relations(&self.rules, &self.defined, &ctx, cfg)?;
        let mut out = ctx;
        for ((s, ty), r) in self.defined.iter().zip(rels) {
            out.set(s.clone(), ty.clone(), Value::rel(r))?;
        }
        Ok(Some(out))
    }

    /// The `≤p`-least partial stable model, found by enumeration; `None` if
    /// there is no least element.
    pub fn well_founded_model_by_enumeration(
        &self,
        o: &PartialInterpretation,
        cfg: &Config,
    ) -> Result<Option<PartialInterpretation>> {
        let models = self.partial_stable_models(o, cfg)?;
        for m in &models {
            let mut least = true;
            for other in &models {
                if !m.leq_prec(other, cfg)? {
                    least = false;
                    break;
                }
            }
            if least {
                return Ok(Some(m.clone()));
            }
        }
        Ok(None)
    }

    /// Exact partial stable models, by the exact-case test: supported, and
    /// no nonempty set `T` of true atoms with `I[T:u]` closed.
    pub fn stable_models(&self, o: &PartialInterpretation, cfg: &Config) -> Result<Vec<PartialInterpretation>> {
        let ctx = self.context(o);
        let atoms = self.atoms(&ctx, cfg)?;
        if atoms.len() >= 63 || (1usize << atoms.len()) > cfg.max_completions {
            return Err(Error::Cap {
                what: "exact candidates for stable models",
                limit: cfg.max_completions,
            });
        }
        let cfg_seq = cfg.clone().sequential();
        par::filter_map_range(cfg.parallel, 1u64 << atoms.len(), |m| {
            let vals: Vec<ThreeVal> = (0..atoms.len()).map(|k| ThreeVal::from_bool(m >> k & 1 == 1)).collect();
            let i = self.assemble(&ctx, &atoms, &vals)?;
            let v = eval_rule_set(&self.rules, &i, Semantics::Stable, &cfg_seq)?;
            Ok((v == ThreeVal::T).then_some(i))
        })
    }

    /// The well-founded model exists and is exact.
    pub fn is_total(&self, o: &PartialInterpretation, cfg: &Config) -> Result<bool> {
        Ok(match self.well_founded_model(o, cfg)? {
            Some(w) => {
                let atoms = self.atoms(&w, cfg)?;
                self.values(&w, &atoms)?.iter().all(|v| v.is_exact())
            }
            None => false,
        })
    }

    /// The rule set as a formula: on exact `i`, `t` iff `i` is the exact
    /// well-founded (resp. a stable) model; on partial `i`, the glb over
    /// completions.
    pub fn eval(&self, i: &PartialInterpretation, sem: Semantics, cfg: &Config) -> Result<ThreeVal> {
        eval_rule_set(&self.rules, i, sem, cfg)
    }
}
