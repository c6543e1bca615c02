//! Recursive-descent parser for formulas, rule sets and theory files.
//!
//! ASCII and Unicode spellings of the connectives are both accepted:
//! `<-`/`←`, `&`/`∧`, `|`/`∨`, `~`/`¬`, `=>`/`⇒`, `<=>`/`⇔`, `!`/`∀`,
//! `?`/`∃`. Second-order quantifiers are written `!! P/2:` and `?? P/2:`,
//! or as ordinary quantifiers whose variable is applied as a predicate.

use std::fmt;

use crate::ast::{Aggregate, Builtin, Expr, Rule, RuleSet, Term};
use crate::error::{Error, Result};
use crate::interp::{ArgType, Sym, SymbolFlags, Type, Vocabulary};
use crate::values::{AggregateFn, CmpOp, Quantifier};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    DotDot,
    Colon,
    Semi,
    Slash,
    Hash,
    Star,
    Arrow,
    And,
    Or,
    Not,
    Implies,
    Iff,
    Bang,
    Quest,
    BangBang,
    QuestQuest,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Sup(usize),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Eof => write!(f, "end of input"),
            other => write!(f, "`{}`", tok_text(other)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::DotDot => "..",
        Tok::Colon => ":",
        Tok::Semi => ";",
        Tok::Slash => "/",
        Tok::Hash => "#",
        Tok::Star => "*",
        Tok::Arrow => "<-",
        Tok::And => "&",
        Tok::Or => "|",
        Tok::Not => "~",
        Tok::Implies => "=>",
        Tok::Iff => "<=>",
        Tok::Bang => "!",
        Tok::Quest => "?",
        Tok::BangBang => "!!",
        Tok::QuestQuest => "??",
        Tok::Eq => "=",
        Tok::Ne => "~=",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Le => "=<",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Sup(_) => "superscript",
        Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let peek = |k: usize| chars.get(i + k).copied();
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '%' || (c == '/' && peek(1) == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok: Tok| {
            out.push(Token {
                tok,
                line: start.0,
                col: start.1,
            })
        };
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                // Superscript digits are alphanumeric but are exponents here.
                if sup_digit(chars[i]).is_some() {
                    break;
                }
                s.push(chars[i]);
                advance(1, &mut i);
            }
            push(&mut out, Tok::Ident(s));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(1, &mut i);
            }
            let v = s.parse::<i64>().map_err(|_| Error::Syntax {
                line: start.0,
                col: start.1,
                message: format!("integer literal `{s}` out of range"),
            })?;
            push(&mut out, Tok::Int(v));
            continue;
        }
        if let Some(d) = sup_digit(c) {
            push(&mut out, Tok::Sup(d));
            advance(1, &mut i);
            continue;
        }
        let (tok, len) = match (c, peek(1), peek(2)) {
            ('<', Some('='), Some('>')) => (Tok::Iff, 3),
            ('<', Some('-'), _) => (Tok::Arrow, 2),
            ('<', Some('='), _) => (Tok::Le, 2),
            ('<', _, _) => (Tok::Lt, 1),
            ('=', Some('>'), _) => (Tok::Implies, 2),
            ('=', Some('<'), _) => (Tok::Le, 2),
            ('=', _, _) => (Tok::Eq, 1),
            ('>', Some('='), _) => (Tok::Ge, 2),
            ('>', _, _) => (Tok::Gt, 1),
            ('-', Some('>'), _) => (Tok::Implies, 2),
            ('-', _, _) => (Tok::Minus, 1),
            ('~', Some('='), _) => (Tok::Ne, 2),
            ('~', _, _) => (Tok::Not, 1),
            ('!', Some('!'), _) => (Tok::BangBang, 2),
            ('!', _, _) => (Tok::Bang, 1),
            ('?', Some('?'), _) => (Tok::QuestQuest, 2),
            ('?', _, _) => (Tok::Quest, 1),
            ('.', Some('.'), _) => (Tok::DotDot, 2),
            ('.', _, _) => (Tok::Dot, 1),
            ('(', _, _) => (Tok::LParen, 1),
            (')', _, _) => (Tok::RParen, 1),
            ('{', _, _) => (Tok::LBrace, 1),
            ('}', _, _) => (Tok::RBrace, 1),
            (',', _, _) => (Tok::Comma, 1),
            (':', _, _) => (Tok::Colon, 1),
            (';', _, _) => (Tok::Semi, 1),
            ('/', _, _) => (Tok::Slash, 1),
            ('#', _, _) => (Tok::Hash, 1),
            ('*', _, _) => (Tok::Star, 1),
            ('&', _, _) | ('∧', _, _) => (Tok::And, 1),
            ('|', _, _) | ('∨', _, _) => (Tok::Or, 1),
            ('¬', _, _) => (Tok::Not, 1),
            ('←', _, _) => (Tok::Arrow, 1),
            ('⇒', _, _) | ('→', _, _) => (Tok::Implies, 1),
            ('⇔', _, _) | ('↔', _, _) => (Tok::Iff, 1),
            ('∀', _, _) => (Tok::Bang, 1),
            ('∃', _, _) => (Tok::Quest, 1),
            ('≤', _, _) => (Tok::Le, 1),
            ('≥', _, _) => (Tok::Ge, 1),
            ('≠', _, _) => (Tok::Ne, 1),
            ('+', _, _) => (Tok::Plus, 1),
            _ => {
                return Err(Error::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        push(&mut out, tok);
        advance(len, &mut i);
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn sup_digit(c: char) -> Option<usize> {
    match c {
        '⁰' => Some(0),
        '¹' => Some(1),
        '²' => Some(2),
        '³' => Some(3),
        '⁴' => Some(4),
        '⁵' => Some(5),
        '⁶' => Some(6),
        '⁷' => Some(7),
        '⁸' => Some(8),
        '⁹' => Some(9),
        _ => None,
    }
}

/// A named block of a theory or library file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    Formula(String, Expr),
    Definition(String, RuleSet),
    Template(String, RuleSet),
}

impl Block {
    pub fn name(&self) -> &str {
        match self {
            Block::Formula(n, _) | Block::Definition(n, _) | Block::Template(n, _) => n,
        }
    }
}

/// A parsed theory or library file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub vocab: Vocabulary,
    pub blocks: Vec<Block>,
}

impl Document {
    pub fn formulas(&self) -> impl Iterator<Item = (&str, &Expr)> + '_ {
        self.blocks.iter().filter_map(|b| match b {
            Block::Formula(n, e) => Some((n.as_str(), e)),
            _ => None,
        })
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &RuleSet)> + '_ {
        self.blocks.iter().filter_map(|b| match b {
            Block::Definition(n, d) => Some((n.as_str(), d)),
            _ => None,
        })
    }

    pub fn templates(&self) -> impl Iterator<Item = (&str, &RuleSet)> + '_ {
        self.blocks.iter().filter_map(|b| match b {
            Block::Template(n, d) => Some((n.as_str(), d)),
            _ => None,
        })
    }

    pub fn formula(&self, name: &str) -> Option<&Expr> {
        self.formulas().find(|(n, _)| *n == name).map(|(_, e)| e)
    }

    pub fn definition(&self, name: &str) -> Option<&RuleSet> {
        self.definitions().find(|(n, _)| *n == name).map(|(_, d)| d)
    }

    /// The conjunction of every formula and definition block.
    pub fn theory(&self) -> Expr {
        Expr::and(
            self.blocks
                .iter()
                .filter_map(|b| match b {
                    Block::Formula(_, e) => Some(e.clone()),
                    Block::Definition(_, d) => Some(Expr::Definition(d.clone())),
                    Block::Template(..) => None,
                })
                .collect(),
        )
    }
}

pub fn write_vocabulary(f: &mut fmt::Formatter<'_>, v: &Vocabulary) -> fmt::Result {
    writeln!(f, "vocab {{")?;
    for (name, info) in v.iter() {
        let ty = match &info.ty {
            Type::Dom => "const".to_string(),
            other => other.to_string(),
        };
        writeln!(f, "  {name}: {ty};")?;
    }
    writeln!(f, "}}")
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vocabulary(f, &self.vocab)?;
        for b in &self.blocks {
            match b {
                Block::Formula(n, e) => writeln!(f, "formula {n} {{ {e} }}")?,
                Block::Definition(n, d) => writeln!(f, "definition {n} {d}")?,
                Block::Template(n, d) => writeln!(f, "template {n} {d}")?,
            }
        }
        Ok(())
    }
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub vocab: Vocabulary,
    scope: Vec<Sym>,
}

impl Parser {
    pub fn new(text: &str, vocab: &Vocabulary) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            vocab: vocab.clone(),
            scope: Vec::new(),
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected an identifier, found {other}")),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn is_known(&self, s: &Sym) -> bool {
        self.scope.contains(s) || self.vocab.contains(s)
    }

    // -- formulas ----------------------------------------------------------

    pub fn formula(&mut self) -> Result<Expr> {
        let lhs = self.implication()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.formula()?;
            return Ok(Expr::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Expr> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr> {
        let first = self.conjunction()?;
        if *self.peek() != Tok::Or {
            return Ok(first);
        }
        let mut es = vec![first];
        while self.eat(&Tok::Or) {
            es.push(self.conjunction()?);
        }
        Ok(Expr::Or(es))
    }

    fn conjunction(&mut self) -> Result<Expr> {
        let first = self.unary()?;
        if *self.peek() != Tok::And {
            return Ok(first);
        }
        let mut es = vec![first];
        while self.eat(&Tok::And) {
            es.push(self.unary()?);
        }
        Ok(Expr::And(es))
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Not => {
                self.next();
                Ok(Expr::not(self.unary()?))
            }
            Tok::Bang | Tok::Quest => {
                let q = if self.next() == Tok::Bang {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                self.quantifier(q)
            }
            Tok::BangBang | Tok::QuestQuest => {
                let q = if self.next() == Tok::BangBang {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                self.so_quantifier(q)
            }
            Tok::Ident(s) if s == "let" => {
                self.next();
                let d = self.rule_set()?;
                if !self.keyword("in") {
                    return self.error(format!("expected `in`, found {}", self.peek()));
                }
                self.next();
                let locals: Vec<Sym> = d.defined().into_iter().collect();
                let n = locals.len();
                self.scope.extend(locals);
                let body = self.formula();
                self.scope.truncate(self.scope.len() - n);
                Ok(Expr::Let(d, Box::new(body?)))
            }
            _ => self.primary(),
        }
    }

    fn var_list(&mut self) -> Result<Vec<Sym>> {
        let mut vars = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(s) => {
                    self.next();
                    vars.push(Sym::new(&s));
                    self.eat(&Tok::Comma);
                }
                Tok::Colon if !vars.is_empty() => {
                    self.next();
                    return Ok(vars);
                }
                other => return self.error(format!("expected a variable or `:`, found {other}")),
            }
        }
    }

    fn infer_type(&self, x: &Sym, body: &Expr) -> Type {
        if let Some(n) = body.predicate_use(x) {
            return Type::Pred(n);
        }
        match body.argument_use(x, &self.vocab) {
            Some(ArgType::Pred(n)) => Type::Pred(n),
            _ => Type::Dom,
        }
    }

    fn quantifier(&mut self, q: Quantifier) -> Result<Expr> {
        let vars = self.var_list()?;
        let n = vars.len();
        self.scope.extend(vars.iter().cloned());
        let body = self.formula();
        self.scope.truncate(self.scope.len() - n);
        let mut body = body?;
        for x in vars.into_iter().rev() {
            let ty = self.infer_type(&x, &body);
            body = Expr::Quant(q, x, ty, Box::new(body));
        }
        Ok(body)
    }

    fn so_quantifier(&mut self, q: Quantifier) -> Result<Expr> {
        let x = Sym::new(&self.ident()?);
        let arity = if self.eat(&Tok::Slash) {
            match self.next() {
                Tok::Int(n) if n >= 0 => Some(n as usize),
                other => return self.error(format!("expected an arity, found {other}")),
            }
        } else {
            None
        };
        self.expect(&Tok::Colon)?;
        self.scope.push(x.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        let arity = match arity {
            Some(n) => n,
            None => match self.infer_type(&x, &body) {
                Type::Pred(n) => n,
                _ => return self.error(format!("cannot infer the arity of `{x}`; write `{x}/n`")),
            },
        };
        Ok(Expr::Quant(q, x, Type::Pred(arity), Box::new(body)))
    }

    fn cmp_op(&mut self) -> Option<Builtin> {
        let op = match self.peek() {
            Tok::Eq => Builtin::Eq,
            Tok::Ne => Builtin::Ne,
            Tok::Lt => Builtin::Lt,
            Tok::Gt => Builtin::Gt,
            Tok::Le => Builtin::Le,
            Tok::Ge => Builtin::Ge,
            _ => return None,
        };
        self.next();
        Some(op)
    }

    pub fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Minus => {
                self.next();
                match self.next() {
                    Tok::Int(i) => Ok(Term::Int(-i)),
                    other => self.error(format!("expected an integer after `-`, found {other}")),
                }
            }
            Tok::Int(i) => {
                self.next();
                Ok(Term::Int(i))
            }
            Tok::Ident(s) => {
                self.next();
                let sym = Sym::new(&s);
                let sign = match self.peek() {
                    Tok::Plus => 1,
                    Tok::Minus => -1,
                    _ => return Ok(Term::Name(sym)),
                };
                self.next();
                match self.next() {
                    Tok::Int(i) => Ok(Term::Offset(sym, sign * i)),
                    other => self.error(format!("expected an integer offset, found {other}")),
                }
            }
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>> {
        let mut args = Vec::new();
        self.expect(&Tok::LParen)?;
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let e = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => Ok(Expr::Definition(self.rule_set()?)),
            Tok::Hash => {
                self.next();
                self.aggregate(AggregateFn::Card)
            }
            Tok::Ident(s) if s == "sum" && *self.peek_at(1) == Tok::LBrace => {
                self.next();
                self.aggregate(AggregateFn::Sum)
            }
            Tok::Ident(s) if s == "true" => {
                self.next();
                Ok(Expr::truth())
            }
            Tok::Ident(s) if s == "false" => {
                self.next();
                Ok(Expr::falsity())
            }
            Tok::Ident(s) if *self.peek_at(1) == Tok::LParen => {
                self.next();
                let args = self.term_list()?;
                Ok(Expr::Atom(Sym::new(&s), args))
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus => {
                let lhs = self.term()?;
                match self.cmp_op() {
                    Some(op) => {
                        let rhs = self.term()?;
                        Ok(Expr::Cmp(op, lhs, rhs))
                    }
                    None => match lhs {
                        Term::Name(s) => Ok(Expr::Atom(s, Vec::new())),
                        _ => self.error(format!("expected a comparison after `{lhs}`")),
                    },
                }
            }
            other => self.error(format!("expected a formula, found {other}")),
        }
    }

    fn aggregate(&mut self, func: AggregateFn) -> Result<Expr> {
        self.expect(&Tok::LBrace)?;
        let vars = self.var_list()?;
        let n = vars.len();
        self.scope.extend(vars.iter().cloned());
        let body = self.formula();
        self.scope.truncate(self.scope.len() - n);
        let body = body?;
        self.expect(&Tok::RBrace)?;
        let cmp = match self.next() {
            Tok::Eq => CmpOp::Eq,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            other => return self.error(format!("expected `=`, `<` or `>` after an aggregate, found {other}")),
        };
        let bound = self.term()?;
        Ok(Expr::Aggregate(Aggregate {
            func,
            cmp,
            vars,
            body: Box::new(body),
            bound,
        }))
    }

    // -- rules -------------------------------------------------------------

    pub fn rule_set(&mut self) -> Result<RuleSet> {
        self.expect(&Tok::LBrace)?;
        let mut rules = Vec::new();
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(RuleSet::new(rules));
            }
            rules.push(self.rule()?);
            if !self.eat(&Tok::Dot) && *self.peek() != Tok::RBrace {
                return self.error(format!("expected `.` or `}}` after a rule, found {}", self.peek()));
            }
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let explicit = if self.eat(&Tok::Bang) {
            Some(self.var_list()?)
        } else {
            None
        };
        let head = Sym::new(&self.ident()?);
        let args = if *self.peek() == Tok::LParen {
            self.term_list()?
        } else {
            Vec::new()
        };
        let vars = match explicit {
            Some(vars) => vars,
            None => {
                let mut vars: Vec<Sym> = Vec::new();
                for t in &args {
                    if let Term::Name(s) = t {
                        if *s != head && !self.is_known(s) && !vars.contains(s) {
                            vars.push(s.clone());
                        }
                    }
                }
                vars
            }
        };
        let n = vars.len();
        self.scope.extend(vars.iter().cloned());
        let body = if self.eat(&Tok::Arrow) {
            self.formula()
        } else {
            Ok(Expr::truth())
        };
        self.scope.truncate(self.scope.len() - n);
        Ok(Rule {
            vars,
            head,
            args,
            body: body?,
        })
    }

    // -- vocabularies and documents -----------------------------------------

    fn arg_type(&mut self) -> Result<ArgType> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "δ" || s == "dom" => {
                self.next();
                Ok(ArgType::Dom)
            }
            Tok::Ident(s) if s == "pred" => {
                self.next();
                self.expect(&Tok::Slash)?;
                match self.next() {
                    Tok::Int(n) if n >= 0 => Ok(ArgType::Pred(n as usize)),
                    other => self.error(format!("expected an arity, found {other}")),
                }
            }
            Tok::LParen => {
                // (δ²→𝔹), (δ,δ→𝔹), (δ→𝔹)
                self.next();
                let mut n = 0;
                loop {
                    match self.next() {
                        Tok::Ident(s) if s == "δ" || s == "dom" => {
                            n += match self.peek() {
                                Tok::Sup(k) => {
                                    let k = *k;
                                    self.next();
                                    k
                                }
                                _ => 1,
                            };
                        }
                        other => return self.error(format!("expected `δ`, found {other}")),
                    }
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(&Tok::Implies)?;
                    match self.next() {
                        Tok::Ident(s) if s == "𝔹" || s == "bool" => {}
                        other => return self.error(format!("expected `𝔹`, found {other}")),
                    }
                    self.expect(&Tok::RParen)?;
                    return Ok(ArgType::Pred(n));
                }
            }
            other => self.error(format!("expected an argument type, found {other}")),
        }
    }

    fn decl_type(&mut self) -> Result<Type> {
        let name = self.ident()?;
        match name.as_str() {
            "const" | "dom" | "δ" => Ok(Type::Dom),
            "bool" | "𝔹" => Ok(Type::Bool),
            "pred" => {
                self.expect(&Tok::Slash)?;
                match self.next() {
                    Tok::Int(n) if n >= 0 => Ok(Type::Pred(n as usize)),
                    other => self.error(format!("expected an arity, found {other}")),
                }
            }
            "so" => {
                self.expect(&Tok::Minus)?;
                let p = self.ident()?;
                if p != "pred" {
                    return self.error("expected `so-pred`");
                }
                self.expect(&Tok::LParen)?;
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.arg_type()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(Type::SoPred(args))
            }
            other => self.error(format!("unknown type `{other}`")),
        }
    }

    fn vocab_block(&mut self) -> Result<Vocabulary> {
        self.expect(&Tok::LBrace)?;
        let mut v = Vocabulary::new();
        while !self.eat(&Tok::RBrace) {
            let name = Sym::new(&self.ident()?);
            let ty = if self.eat(&Tok::Colon) {
                self.decl_type()?
            } else if *self.peek() == Tok::LParen {
                self.next();
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.arg_type()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                if args.iter().all(|a| *a == ArgType::Dom) {
                    Type::Pred(args.len())
                } else {
                    Type::SoPred(args)
                }
            } else {
                Type::Bool
            };
            if v.contains(&name) {
                return self.error(format!("`{name}` declared twice"));
            }
            v.declare(name, ty, SymbolFlags::user())?;
            if !self.eat(&Tok::Semi) && *self.peek() != Tok::RBrace {
                return self.error(format!("expected `;`, found {}", self.peek()));
            }
        }
        Ok(v)
    }

    pub fn document(&mut self) -> Result<Document> {
        let mut doc = Document {
            vocab: Vocabulary::new(),
            blocks: Vec::new(),
        };
        while !self.at_eof() {
            let kw = self.ident()?;
            match kw.as_str() {
                "vocab" => {
                    let v = self.vocab_block()?;
                    doc.vocab = doc.vocab.union(&v)?;
                    self.vocab = self.vocab.union(&v)?;
                }
                "formula" => {
                    let name = self.ident()?;
                    self.expect(&Tok::LBrace)?;
                    let e = self.formula()?;
                    self.expect(&Tok::RBrace)?;
                    doc.blocks.push(Block::Formula(name, e));
                }
                "definition" => {
                    let name = self.ident()?;
                    let d = self.rule_set()?;
                    doc.blocks.push(Block::Definition(name, d));
                }
                "template" => {
                    let name = self.ident()?;
                    let d = self.rule_set()?;
                    for s in d.defined() {
                        doc.vocab.set_flags(&s, SymbolFlags::template());
                        self.vocab.set_flags(&s, SymbolFlags::template());
                    }
                    doc.blocks.push(Block::Template(name, d));
                }
                other => {
                    return self.error(format!(
                        "expected `vocab`, `formula`, `definition` or `template`, found `{other}`"
                    ))
                }
            }
        }
        Ok(doc)
    }
}

/// Parses a formula; `vocab` decides which head identifiers of rules are
/// constants and helps infer the types of quantified variables.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Expr> {
    let mut p = Parser::new(text, vocab)?;
    let e = p.formula()?;
    if !p.at_eof() {
        return p.error(format!("unexpected {} after formula", p.peek()));
    }
    Ok(e)
}

pub fn parse_rules(text: &str, vocab: &Vocabulary) -> Result<RuleSet> {
    let mut p = Parser::new(text, vocab)?;
    let d = p.rule_set()?;
    if !p.at_eof() {
        return p.error(format!("unexpected {} after rule set", p.peek()));
    }
    Ok(d)
}

/// Parses a theory or library file. Symbols declared in `base` (for example
/// a library's vocabulary) are known while parsing.
pub fn parse_document(text: &str, base: &Vocabulary) -> Result<Document> {
    Parser::new(text, base)?.document()
}
