//! Three-valued truth values, their two orders, partial sets and the
//! ultimate approximation of two-valued boolean functions.
//!
//! Everything here is pure. The Kleene tables, the quantifier and the
//! aggregate approximations are direct computations; [`ultimate_approx`]
//! is the generic brute-force definition they are checked against.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A truth value in `{f, u, t}`.
///
/// The derived `Ord` is the truth order `f < u < t`, so `min`/`max` are the
/// Kleene conjunction/disjunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThreeVal {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "u")]
    U,
    #[serde(rename = "t")]
    T,
}

impl ThreeVal {
    pub const ALL: [ThreeVal; 3] = [ThreeVal::F, ThreeVal::U, ThreeVal::T];

    pub fn from_bool(b: bool) -> Self {
        if b {
            ThreeVal::T
        } else {
            ThreeVal::F
        }
    }

    /// `Some(b)` for exact values, `None` for `u`.
    pub fn to_bool(self) -> Option<bool> {
        match self {
            ThreeVal::T => Some(true),
            ThreeVal::F => Some(false),
            ThreeVal::U => None,
        }
    }

    pub fn is_exact(self) -> bool {
        self != ThreeVal::U
    }

    /// Truth order: `f <= u <= t`.
    pub fn leq_truth(self, other: ThreeVal) -> bool {
        self <= other
    }

    /// Precision order: `u` is below both `t` and `f`, which are incomparable.
    pub fn leq_prec(self, other: ThreeVal) -> bool {
        self == other || self == ThreeVal::U
    }

    /// Binary greatest lower bound in the precision order.
    pub fn glb(self, other: ThreeVal) -> ThreeVal {
        if self == other {
            self
        } else {
            ThreeVal::U
        }
    }

    pub fn negate(self) -> ThreeVal {
        match self {
            ThreeVal::T => ThreeVal::F,
            ThreeVal::F => ThreeVal::T,
            ThreeVal::U => ThreeVal::U,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            ThreeVal::T => 't',
            ThreeVal::U => 'u',
            ThreeVal::F => 'f',
        }
    }

    pub fn from_symbol(c: char) -> Option<ThreeVal> {
        match c {
            't' => Some(ThreeVal::T),
            'u' => Some(ThreeVal::U),
            'f' => Some(ThreeVal::F),
            _ => None,
        }
    }
}

impl fmt::Display for ThreeVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Greatest lower bound under the precision order of a nonempty multiset.
pub fn glb_prec<I: IntoIterator<Item = ThreeVal>>(values: I) -> Result<ThreeVal> {
    let mut iter = values.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Contract("glb of an empty set of truth values".into()))?;
    let mut acc = first;
    for v in iter {
        acc = acc.glb(v);
        if acc == ThreeVal::U {
            break;
        }
    }
    Ok(acc)
}

/// The standard propositional connectives, each a primitive Kleene table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connective {
    Not,
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub const ALL: [Connective; 5] = [
        Connective::Not,
        Connective::And,
        Connective::Or,
        Connective::Implies,
        Connective::Iff,
    ];

    /// Fixed arity, or `None` for the n-ary `And`/`Or`.
    pub fn arity(self) -> Option<usize> {
        match self {
            Connective::Not => Some(1),
            Connective::Implies | Connective::Iff => Some(2),
            Connective::And | Connective::Or => None,
        }
    }

    /// The classical two-valued table.
    pub fn classical(self, args: &[bool]) -> bool {
        match self {
            Connective::Not => !args[0],
            Connective::And => args.iter().all(|&b| b),
            Connective::Or => args.iter().any(|&b| b),
            Connective::Implies => !args[0] || args[1],
            Connective::Iff => args[0] == args[1],
        }
    }
}

fn check_arity(c: Connective, n: usize) -> Result<()> {
    match c.arity() {
        Some(k) if k != n => Err(Error::Arity {
            what: format!("{c:?}"),
            expected: k,
            found: n,
        }),
        _ => Ok(()),
    }
}

/// Kleene's strong three-valued connectives.
pub fn kleene_connective(c: Connective, args: &[ThreeVal]) -> Result<ThreeVal> {
    check_arity(c, args.len())?;
    Ok(match c {
        Connective::Not => args[0].negate(),
        Connective::And => args.iter().copied().min().unwrap_or(ThreeVal::T),
        Connective::Or => args.iter().copied().max().unwrap_or(ThreeVal::F),
        Connective::Implies => args[0].negate().max(args[1]),
        Connective::Iff => {
            let (a, b) = (args[0], args[1]);
            if a.is_exact() && b.is_exact() {
                ThreeVal::from_bool(a == b)
            } else {
                ThreeVal::U
            }
        }
    })
}

/// A two-valued boolean function on exact inputs.
pub trait BoolFn {
    fn eval(&self, exact: &[bool]) -> bool;
}

impl<F: Fn(&[bool]) -> bool> BoolFn for F {
    fn eval(&self, exact: &[bool]) -> bool {
        self(exact)
    }
}

/// Ultimate approximation: the precision-glb of `f` over every exact
/// completion of `x`. Fails with a cap error when `x` has more than
/// `max_unknowns` unknown positions.
pub fn ultimate_approx<F: BoolFn + ?Sized>(
    f: &F,
    x: &[ThreeVal],
    max_unknowns: usize,
) -> Result<ThreeVal> {
    let unknown: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_exact())
        .map(|(i, _)| i)
        .collect();
    if unknown.len() > max_unknowns {
        return Err(Error::Cap {
            what: "unknown positions in ultimate approximation",
            limit: max_unknowns,
        });
    }
    let mut exact: Vec<bool> = x.iter().map(|v| *v == ThreeVal::T).collect();
    let mut acc: Option<ThreeVal> = None;
    for mask in 0u64..(1u64 << unknown.len()) {
        for (bit, &pos) in unknown.iter().enumerate() {
            exact[pos] = mask >> bit & 1 == 1;
        }
        let v = ThreeVal::from_bool(f.eval(&exact));
        acc = Some(acc.map_or(v, |a| a.glb(v)));
        if acc == Some(ThreeVal::U) {
            break;
        }
    }
    Ok(acc.expect("at least one completion"))
}

/// A partial set: a total map from a finite ordered carrier to truth values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialSet<K: Ord> {
    entries: Vec<(K, ThreeVal)>,
}

impl<K: Ord + Clone> PartialSet<K> {
    /// Builds a partial set; duplicate keys keep the last value.
    pub fn new<I: IntoIterator<Item = (K, ThreeVal)>>(entries: I) -> Self {
        let mut entries: Vec<(K, ThreeVal)> = entries.into_iter().collect();
        entries.reverse();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        PartialSet { entries }
    }

    pub fn empty() -> Self {
        PartialSet {
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: &K) -> Option<ThreeVal> {
        self.entries
            .binary_search_by(|(key, _)| key.cmp(k))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, ThreeVal)> + '_ {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn values(&self) -> impl Iterator<Item = ThreeVal> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn carrier(&self) -> impl Iterator<Item = &K> + '_ {
        self.entries.iter().map(|(k, _)| k)
    }

    pub fn is_exact(&self) -> bool {
        self.values().all(ThreeVal::is_exact)
    }

    /// Pointwise precision order; `false` when the carriers differ.
    pub fn leq_prec(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.0 == b.0 && a.1.leq_prec(b.1))
    }

    /// Pointwise truth order; `false` when the carriers differ.
    pub fn leq_truth(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.0 == b.0 && a.1.leq_truth(b.1))
    }

    /// The exact members (keys mapped to `t`), for exact sets.
    pub fn members(&self) -> BTreeSet<K> {
        self.entries
            .iter()
            .filter(|(_, v)| *v == ThreeVal::T)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// Generalized quantifiers over a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// Kleene quantifier: Min (resp. Max) under the truth order, vacuously `t`
/// (resp. `f`) on an empty carrier.
pub fn approx_quantifier_values<I: IntoIterator<Item = ThreeVal>>(q: Quantifier, values: I) -> ThreeVal {
    match q {
        Quantifier::Forall => {
            let mut acc = ThreeVal::T;
            for v in values {
                acc = acc.min(v);
                if acc == ThreeVal::F {
                    break;
                }
            }
            acc
        }
        Quantifier::Exists => {
            let mut acc = ThreeVal::F;
            for v in values {
                acc = acc.max(v);
                if acc == ThreeVal::T {
                    break;
                }
            }
            acc
        }
    }
}

pub fn approx_quantifier<K: Ord + Clone>(q: Quantifier, s: &PartialSet<K>) -> ThreeVal {
    approx_quantifier_values(q, s.values())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggregateFn {
    Card,
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
}

impl CmpOp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }
}

/// Keys that can be summed: the weight of a tuple is its first component.
pub trait AggregateKey {
    fn sum_weight(&self) -> Option<i64>;
}

impl AggregateKey for i64 {
    fn sum_weight(&self) -> Option<i64> {
        Some(*self)
    }
}

impl AggregateKey for Vec<i64> {
    fn sum_weight(&self) -> Option<i64> {
        self.first().copied()
    }
}

impl AggregateKey for String {
    fn sum_weight(&self) -> Option<i64> {
        None
    }
}

impl AggregateKey for &str {
    fn sum_weight(&self) -> Option<i64> {
        None
    }
}

/// Ultimate approximation of `agg(S) cmp n` over the completions of `s`.
pub fn approx_aggregate<K: Ord + Clone + AggregateKey>(
    agg: AggregateFn,
    cmp: CmpOp,
    s: &PartialSet<K>,
    n: i64,
    max_unknowns: usize,
) -> Result<ThreeVal> {
    let entries: Vec<(Option<i64>, ThreeVal)> =
        s.iter().map(|(k, v)| (k.sum_weight(), v)).collect();
    approx_aggregate_entries(agg, cmp, &entries, n, max_unknowns)
}

/// As [`approx_aggregate`], over `(weight, value)` pairs. Weights are only
/// consulted for `sum`.
pub fn approx_aggregate_entries(
    agg: AggregateFn,
    cmp: CmpOp,
    entries: &[(Option<i64>, ThreeVal)],
    n: i64,
    max_unknowns: usize,
) -> Result<ThreeVal> {
    let mut weights_t = Vec::new();
    let mut weights_u = Vec::new();
    for &(w, v) in entries {
        if v == ThreeVal::F {
            continue;
        }
        let w = match agg {
            AggregateFn::Card => 1,
            AggregateFn::Sum => w.ok_or_else(|| {
                Error::Eval("sum aggregate over a tuple without an integer first component".into())
            })?,
        };
        if v == ThreeVal::T {
            weights_t.push(w);
        } else {
            weights_u.push(w);
        }
    }
    if weights_u.len() > max_unknowns {
        return Err(Error::Cap {
            what: "unknown elements in aggregate",
            limit: max_unknowns,
        });
    }
    let base: i64 = weights_t.iter().sum();
    // The set of totals reachable by completing the unknown elements.
    let reachable: BTreeSet<i64> = match agg {
        AggregateFn::Card => (0..=weights_u.len() as i64).map(|k| base + k).collect(),
        AggregateFn::Sum => {
            let mut sums = BTreeSet::from([base]);
            for w in &weights_u {
                let shifted: Vec<i64> = sums.iter().map(|s| s + w).collect();
                sums.extend(shifted);
            }
            sums
        }
    };
    let mut any_true = false;
    let mut any_false = false;
    for total in reachable {
        if cmp.holds(total, n) {
            any_true = true;
        } else {
            any_false = true;
        }
    }
    Ok(match (any_true, any_false) {
        (true, false) => ThreeVal::T,
        (false, true) => ThreeVal::F,
        _ => ThreeVal::U,
    })
}
