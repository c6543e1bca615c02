//! Test-side propositional programs, generators and independent oracles.
//!
//! The oracles work on a pair of atom sets `(x, y)` (lower and upper bound)
//! and evaluate bodies two-valuedly with positive occurrences read from one
//! set and negative occurrences from the other. The stable revisions are
//! least fixpoints of these evaluations; the well-founded fixpoint, the
//! three-valued stable fixpoints and the stable models follow from them.
//! None of this code goes through the kernel's evaluator.

#![allow(dead_code)]

pub mod fo;

use idstar::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 4] = ["p", "q", "r", "s"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PForm {
    Atom(usize),
    Const(bool),
    Not(Box<PForm>),
    And(Box<PForm>, Box<PForm>),
    Or(Box<PForm>, Box<PForm>),
    Implies(Box<PForm>, Box<PForm>),
    Iff(Box<PForm>, Box<PForm>),
}

use PForm::*;

impl PForm {
    pub fn to_expr(&self) -> Expr {
        match self {
            Atom(k) => Expr::atom(NAMES[*k], &[]),
            Const(true) => Expr::truth(),
            Const(false) => Expr::falsity(),
            Not(a) => Expr::not(a.to_expr()),
            And(a, b) => Expr::And(vec![a.to_expr(), b.to_expr()]),
            Or(a, b) => Expr::Or(vec![a.to_expr(), b.to_expr()]),
            Implies(a, b) => Expr::implies(a.to_expr(), b.to_expr()),
            Iff(a, b) => Expr::iff(a.to_expr(), b.to_expr()),
        }
    }

    /// Two-valued value with positive atoms read from `pos` and negative
    /// ones from `neg`.
    pub fn ev(&self, pos: &[bool], neg: &[bool]) -> bool {
        match self {
            Atom(k) => pos[*k],
            Const(b) => *b,
            Not(a) => !a.ev(neg, pos),
            And(a, b) => a.ev(pos, neg) && b.ev(pos, neg),
            Or(a, b) => a.ev(pos, neg) || b.ev(pos, neg),
            Implies(a, b) => !a.ev(neg, pos) || b.ev(pos, neg),
            Iff(a, b) => {
                (a.ev(pos, neg) && b.ev(pos, neg)) || (!a.ev(neg, pos) && !b.ev(neg, pos))
            }
        }
    }

    /// Kleene value in the consistent pair `(x, y)`.
    pub fn value(&self, x: &[bool], y: &[bool]) -> ThreeVal {
        if self.ev(x, y) {
            ThreeVal::T
        } else if !self.ev(y, x) {
            ThreeVal::F
        } else {
            ThreeVal::U
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            Atom(_) | Const(_) => true,
            And(a, b) | Or(a, b) => a.is_monotone() && b.is_monotone(),
            Not(_) | Implies(..) | Iff(..) => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Atom(_) | Const(_) => 1,
            Not(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// A syntactic variant with the same Kleene value everywhere:
    /// commuted conjunctions and disjunctions, De Morgan, double negation
    /// and implications as disjunctions, chosen by `rng`.
    pub fn variant(&self, rng: &mut ChaCha8Rng) -> PForm {
        let b = |f: PForm| Box::new(f);
        match self {
            Atom(_) | Const(_) => {
                if rng.gen_bool(0.3) {
                    Not(b(Not(b(self.clone()))))
                } else {
                    self.clone()
                }
            }
            Not(a) => match &**a {
                And(x, y) if rng.gen_bool(0.5) => Or(b(Not(b(x.variant(rng)))), b(Not(b(y.variant(rng))))),
                Or(x, y) if rng.gen_bool(0.5) => And(b(Not(b(x.variant(rng)))), b(Not(b(y.variant(rng))))),
                Not(x) if rng.gen_bool(0.5) => x.variant(rng),
                _ => Not(b(a.variant(rng))),
            },
            And(x, y) => {
                let (x, y) = (x.variant(rng), y.variant(rng));
                if rng.gen_bool(0.5) {
                    And(b(y), b(x))
                } else {
                    And(b(x), b(y))
                }
            }
            Or(x, y) => {
                let (x, y) = (x.variant(rng), y.variant(rng));
                if rng.gen_bool(0.5) {
                    Or(b(y), b(x))
                } else {
                    Or(b(x), b(y))
                }
            }
            Implies(x, y) => {
                let (x, y) = (x.variant(rng), y.variant(rng));
                if rng.gen_bool(0.5) {
                    Or(b(Not(b(x))), b(y))
                } else {
                    Implies(b(x), b(y))
                }
            }
            Iff(x, y) => {
                let (x, y) = (x.variant(rng), y.variant(rng));
                if rng.gen_bool(0.5) {
                    Iff(b(y), b(x))
                } else {
                    Iff(b(x), b(y))
                }
            }
        }
    }
}

pub fn gen_form(rng: &mut ChaCha8Rng, depth: usize, atoms: usize, monotone: bool) -> PForm {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.1) {
            Const(rng.gen())
        } else {
            Atom(rng.gen_range(0..atoms))
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(gen_form(rng, depth - 1, atoms, monotone));
    let pick = if monotone { rng.gen_range(1..3) } else { rng.gen_range(0..5) };
    match pick {
        0 => Not(sub(rng)),
        1 => And(sub(rng), sub(rng)),
        2 => Or(sub(rng), sub(rng)),
        3 => Implies(sub(rng), sub(rng)),
        _ => Iff(sub(rng), sub(rng)),
    }
}

/// A propositional rule set over `NAMES[..atoms]`: `(head, body)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub atoms: usize,
    pub rules: Vec<(usize, PForm)>,
}

impl Program {
    pub fn random(rng: &mut ChaCha8Rng, atoms: usize, max_rules: usize, depth: usize, monotone: bool) -> Program {
        let n = rng.gen_range(1..=max_rules);
        Program {
            atoms,
            rules: (0..n)
                .map(|_| (rng.gen_range(0..atoms), gen_form(rng, depth, atoms, monotone)))
                .collect(),
        }
    }

    pub fn vocabulary(&self) -> Vocabulary {
        NAMES[..self.atoms]
            .iter()
            .fold(Vocabulary::new(), |v, n| v.with(n, Type::Bool))
    }

    pub fn rule_set(&self) -> RuleSet {
        RuleSet::new(
            self.rules
                .iter()
                .map(|(h, b)| Rule {
                    vars: Vec::new(),
                    head: Sym::new(NAMES[*h]),
                    args: Vec::new(),
                    body: b.to_expr(),
                })
                .collect(),
        )
    }

    pub fn definition(&self) -> Definition {
        Definition::new(self.rule_set(), &self.vocabulary()).unwrap()
    }

    /// Atoms without rules are parameters; the oracles treat them as false.
    pub fn context(&self) -> PartialInterpretation {
        let mut o = empty_context();
        for k in 0..self.atoms {
            if !self.rules.iter().any(|(h, _)| *h == k) {
                o.set_pred(NAMES[k], 0, &[], &[]).unwrap();
            }
        }
        o
    }

    pub fn is_monotone(&self) -> bool {
        self.rules.iter().all(|(_, b)| b.is_monotone())
    }

    /// Least fixpoint of `x ↦ {h | some body holds with positive atoms
    /// read from x and negative ones from `other`}`.
    fn revision(&self, other: &[bool]) -> Vec<bool> {
        let mut x = vec![false; self.atoms];
        loop {
            let mut next = vec![false; self.atoms];
            for (h, b) in &self.rules {
                if b.ev(&x, other) {
                    next[*h] = true;
                }
            }
            if next == x {
                return x;
            }
            x = next;
        }
    }

    /// Lower stable revision against the upper bound `y`.
    pub fn lower(&self, y: &[bool]) -> Vec<bool> {
        self.revision(y)
    }

    /// Upper stable revision against the lower bound `x`.
    pub fn upper(&self, x: &[bool]) -> Vec<bool> {
        self.revision(x)
    }

    pub fn well_founded(&self) -> Vec<ThreeVal> {
        let mut x = vec![false; self.atoms];
        let mut y = vec![true; self.atoms];
        loop {
            let (nx, ny) = (self.lower(&y), self.upper(&x));
            if nx == x && ny == y {
                return pair_values(&x, &y);
            }
            x = nx;
            y = ny;
        }
    }

    /// All three-valued stable fixpoints, in base-3 order of the values.
    pub fn partial_stable(&self) -> Vec<Vec<ThreeVal>> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(self.atoms as u32) {
            let vals = decode3(code, self.atoms);
            let x: Vec<bool> = vals.iter().map(|v| *v == ThreeVal::T).collect();
            let y: Vec<bool> = vals.iter().map(|v| *v != ThreeVal::F).collect();
            if self.lower(&y) == x && self.upper(&x) == y {
                out.push(vals);
            }
        }
        out
    }

    pub fn stable(&self) -> Vec<Vec<bool>> {
        (0..1usize << self.atoms)
            .map(|m| (0..self.atoms).map(|k| m >> k & 1 == 1).collect::<Vec<bool>>())
            .filter(|x| self.lower(x) == *x)
            .collect()
    }

    /// Least fixpoint of the classical immediate-consequence operator.
    pub fn least_model(&self) -> Vec<bool> {
        let mut x = vec![false; self.atoms];
        loop {
            let mut next = x.clone();
            for (h, b) in &self.rules {
                if b.ev(&x, &x) {
                    next[*h] = true;
                }
            }
            if next == x {
                return x;
            }
            x = next;
        }
    }

    pub fn with_variant_bodies(&self, rng: &mut ChaCha8Rng) -> Program {
        Program {
            atoms: self.atoms,
            rules: self.rules.iter().map(|(h, b)| (*h, b.variant(rng))).collect(),
        }
    }
}

pub fn pair_values(x: &[bool], y: &[bool]) -> Vec<ThreeVal> {
    x.iter()
        .zip(y)
        .map(|(a, b)| match (a, b) {
            (true, _) => ThreeVal::T,
            (false, true) => ThreeVal::U,
            (false, false) => ThreeVal::F,
        })
        .collect()
}

pub fn decode3(mut code: usize, n: usize) -> Vec<ThreeVal> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push([ThreeVal::F, ThreeVal::U, ThreeVal::T][code % 3]);
        code /= 3;
    }
    out
}

/// The values of the program's atoms in a kernel interpretation.
pub fn atom_values(i: &PartialInterpretation, atoms: usize) -> Vec<ThreeVal> {
    NAMES[..atoms]
        .iter()
        .map(|n| match i.value(&Sym::new(n)) {
            Some(v) => v.atom(&[]).unwrap(),
            None => ThreeVal::F,
        })
        .collect()
}

pub fn empty_context() -> PartialInterpretation {
    PartialInterpretation::empty(Domain::from_names(&["a"]))
}
