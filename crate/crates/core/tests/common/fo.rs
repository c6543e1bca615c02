//! Random first-order formulas over small relational vocabularies, a
//! classical evaluator and partial structures with their completions.

use idstar::values::Quantifier;
use idstar::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const VARS: [&str; 4] = ["x", "y", "z", "w"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum F {
    Atom(usize, Vec<usize>),
    Const(bool),
    Not(Box<F>),
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
    Implies(Box<F>, Box<F>),
    Iff(Box<F>, Box<F>),
    Forall(usize, Box<F>),
    Exists(usize, Box<F>),
}

/// Predicate names and arities.
#[derive(Clone, Debug)]
pub struct Sig(pub Vec<(&'static str, usize)>);

impl Sig {
    pub fn vocabulary(&self) -> Vocabulary {
        self.0.iter().fold(Vocabulary::new(), |v, (n, a)| {
            v.with(n, if *a == 0 { Type::Bool } else { Type::Pred(*a) })
        })
    }

    /// A formula of at most `depth` connective levels whose free variables
    /// are among `bound`.
    pub fn gen(&self, rng: &mut ChaCha8Rng, depth: usize, bound: &[usize], allowed: &[usize]) -> F {
        let usable: Vec<usize> = allowed
            .iter()
            .copied()
            .filter(|&k| self.0[k].1 == 0 || !bound.is_empty())
            .collect();
        if depth == 0 || rng.gen_bool(0.25) {
            if usable.is_empty() || rng.gen_bool(0.05) {
                return F::Const(rng.gen());
            }
            let k = usable[rng.gen_range(0..usable.len())];
            let args = (0..self.0[k].1).map(|_| bound[rng.gen_range(0..bound.len())]).collect();
            return F::Atom(k, args);
        }
        let sub = |rng: &mut ChaCha8Rng, b: &[usize]| Box::new(self.gen(rng, depth - 1, b, allowed));
        match rng.gen_range(0..8) {
            0 => F::Not(sub(rng, bound)),
            1 => F::And(sub(rng, bound), sub(rng, bound)),
            2 => F::Or(sub(rng, bound), sub(rng, bound)),
            3 => F::Implies(sub(rng, bound), sub(rng, bound)),
            4 => F::Iff(sub(rng, bound), sub(rng, bound)),
            q => {
                let v = (0..VARS.len()).find(|v| !bound.contains(v)).unwrap_or(0);
                let mut b = bound.to_vec();
                if !b.contains(&v) {
                    b.push(v);
                }
                if q % 2 == 0 {
                    F::Forall(v, sub(rng, &b))
                } else {
                    F::Exists(v, sub(rng, &b))
                }
            }
        }
    }

    pub fn to_expr(&self, f: &F) -> Expr {
        let b = |x: &F| Box::new(self.to_expr(x));
        match f {
            F::Atom(k, args) => Expr::Atom(
                Sym::new(self.0[*k].0),
                args.iter().map(|v| Term::name(VARS[*v])).collect(),
            ),
            F::Const(true) => Expr::truth(),
            F::Const(false) => Expr::falsity(),
            F::Not(a) => Expr::Not(b(a)),
            F::And(x, y) => Expr::And(vec![self.to_expr(x), self.to_expr(y)]),
            F::Or(x, y) => Expr::Or(vec![self.to_expr(x), self.to_expr(y)]),
            F::Implies(x, y) => Expr::Implies(b(x), b(y)),
            F::Iff(x, y) => Expr::Iff(b(x), b(y)),
            F::Forall(v, x) => Expr::Quant(Quantifier::Forall, Sym::new(VARS[*v]), Type::Dom, b(x)),
            F::Exists(v, x) => Expr::Quant(Quantifier::Exists, Sym::new(VARS[*v]), Type::Dom, b(x)),
        }
    }
}

/// Classical truth of `f` in an exact structure given as one boolean table
/// per predicate (lexicographic tuple order).
pub fn classical(f: &F, tables: &[Vec<bool>], n: usize, env: &mut [usize; 4]) -> bool {
    match f {
        F::Atom(k, args) => {
            let idx = args.iter().fold(0, |acc, v| acc * n + env[*v]);
            tables[*k][idx]
        }
        F::Const(b) => *b,
        F::Not(a) => !classical(a, tables, n, env),
        F::And(a, b) => classical(a, tables, n, env) && classical(b, tables, n, env),
        F::Or(a, b) => classical(a, tables, n, env) || classical(b, tables, n, env),
        F::Implies(a, b) => !classical(a, tables, n, env) || classical(b, tables, n, env),
        F::Iff(a, b) => classical(a, tables, n, env) == classical(b, tables, n, env),
        F::Forall(v, a) | F::Exists(v, a) => {
            let saved = env[*v];
            let mut results = (0..n).map(|e| {
                env[*v] = e;
                classical(a, tables, n, env)
            });
            let r = if matches!(f, F::Forall(..)) {
                results.all(|b| b)
            } else {
                results.any(|b| b)
            };
            env[*v] = saved;
            r
        }
    }
}

/// A partial structure: one table of truth values per predicate of `sig`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partial {
    pub n: usize,
    pub tables: Vec<Vec<ThreeVal>>,
}

impl Partial {
    pub fn random(rng: &mut ChaCha8Rng, sig: &Sig, n: usize, p_unknown: f64) -> Partial {
        let tables = sig
            .0
            .iter()
            .map(|(_, a)| {
                (0..n.pow(*a as u32))
                    .map(|_| {
                        if rng.gen_bool(p_unknown) {
                            ThreeVal::U
                        } else {
                            ThreeVal::from_bool(rng.gen())
                        }
                    })
                    .collect()
            })
            .collect();
        Partial { n, tables }
    }

    /// Replaces each unknown by a random value with probability `p`.
    pub fn refine(&self, rng: &mut ChaCha8Rng, p: f64) -> Partial {
        let mut out = self.clone();
        for t in &mut out.tables {
            for v in t.iter_mut() {
                if *v == ThreeVal::U && rng.gen_bool(p) {
                    *v = ThreeVal::from_bool(rng.gen());
                }
            }
        }
        out
    }

    pub fn unknowns(&self) -> usize {
        self.tables.iter().flatten().filter(|v| **v == ThreeVal::U).count()
    }

    /// Every exact completion, as boolean tables.
    pub fn completions(&self) -> Vec<Vec<Vec<bool>>> {
        let slots: Vec<(usize, usize)> = self
            .tables
            .iter()
            .enumerate()
            .flat_map(|(k, t)| t.iter().enumerate().filter(|(_, v)| **v == ThreeVal::U).map(move |(i, _)| (k, i)))
            .collect();
        (0..1u64 << slots.len())
            .map(|mask| {
                let mut tables: Vec<Vec<bool>> =
                    self.tables.iter().map(|t| t.iter().map(|v| *v == ThreeVal::T).collect()).collect();
                for (bit, (k, i)) in slots.iter().enumerate() {
                    tables[*k][*i] = mask >> bit & 1 == 1;
                }
                tables
            })
            .collect()
    }

    pub fn interpretation(&self, sig: &Sig) -> PartialInterpretation {
        let names: Vec<String> = (0..self.n).map(|k| format!("d{k}")).collect();
        let mut i = PartialInterpretation::empty(Domain::from_names(&names.iter().map(String::as_str).collect::<Vec<_>>()));
        for ((name, arity), vals) in sig.0.iter().zip(&self.tables) {
            let ty = if *arity == 0 { Type::Bool } else { Type::Pred(*arity) };
            let rel = Relation::Dense {
                domain_size: self.n,
                arity: *arity,
                vals: vals.clone(),
            };
            i.set(Sym::new(name), ty, Value::rel(rel)).unwrap();
        }
        i
    }
}

/// Precision-glb of the classical values over all completions.
pub fn supervaluation_oracle(f: &F, s: &Partial) -> ThreeVal {
    let mut acc: Option<ThreeVal> = None;
    for tables in s.completions() {
        let v = ThreeVal::from_bool(classical(f, &tables, s.n, &mut [0; 4]));
        acc = Some(match acc {
            None => v,
            Some(a) if a == v => a,
            Some(_) => ThreeVal::U,
        });
    }
    acc.expect("at least one completion")
}
