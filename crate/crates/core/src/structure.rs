//! Text format for partial interpretations.
//!
//! ```text
//! domain = {a, b, c}          % or {1..3}
//! c = a
//! q = t                       % 0-ary predicate
//! p = {(a,b): t, (b,c): u, *: f}
//! tc = {({(a,b)}, {(a,b)}): t, *: f}
//! ```
//!
//! Tuples not listed take the `*` value (`f` when absent). Unary tuples may
//! be written as a bare element. The writer always emits `*`, choosing the
//! most frequent value, and lists the remaining tuples in canonical order, so
//! writing a parsed structure reproduces the text byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::interp::{
    carrier, index_tuple, so_arg_atoms, Arg, ArgType, Domain, Elem, ElemName, PartialInterpretation, Relation, Sym,
    Tuple, Type, Value, Vocabulary,
};
use crate::parser::{Parser, Tok};
use crate::values::ThreeVal;

enum RawArg {
    Elem(ElemName),
    Set(Vec<Vec<ElemName>>),
}

enum RawValue {
    Word(ElemName),
    Table(Vec<(Vec<RawArg>, ThreeVal)>, Option<ThreeVal>),
}

fn elem_name(p: &mut Parser) -> Result<ElemName> {
    match p.peek().clone() {
        Tok::Ident(s) => {
            p.next();
            Ok(ElemName::parse(&s))
        }
        Tok::Int(i) => {
            p.next();
            Ok(ElemName::Int(i))
        }
        Tok::Minus => {
            p.next();
            match p.next() {
                Tok::Int(i) => Ok(ElemName::Int(-i)),
                other => p.error(format!("expected an integer after `-`, found {other}")),
            }
        }
        other => p.error(format!("expected a domain element, found {other}")),
    }
}

fn elem_tuple(p: &mut Parser) -> Result<Vec<ElemName>> {
    if !p.eat(&Tok::LParen) {
        return Ok(vec![elem_name(p)?]);
    }
    let mut out = Vec::new();
    if !p.eat(&Tok::RParen) {
        loop {
            out.push(elem_name(p)?);
            if p.eat(&Tok::RParen) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    Ok(out)
}

fn raw_arg(p: &mut Parser) -> Result<RawArg> {
    if !p.eat(&Tok::LBrace) {
        return Ok(RawArg::Elem(elem_name(p)?));
    }
    let mut tuples = Vec::new();
    if !p.eat(&Tok::RBrace) {
        loop {
            tuples.push(elem_tuple(p)?);
            if p.eat(&Tok::RBrace) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    Ok(RawArg::Set(tuples))
}

fn raw_key(p: &mut Parser) -> Result<Vec<RawArg>> {
    if !p.eat(&Tok::LParen) {
        return Ok(vec![raw_arg(p)?]);
    }
    let mut out = Vec::new();
    if !p.eat(&Tok::RParen) {
        loop {
            out.push(raw_arg(p)?);
            if p.eat(&Tok::RParen) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    Ok(out)
}

fn truth_word(s: &str) -> Option<ThreeVal> {
    let mut cs = s.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => ThreeVal::from_symbol(c),
        _ => None,
    }
}

fn truth(p: &mut Parser) -> Result<ThreeVal> {
    match p.peek().clone() {
        Tok::Ident(s) if truth_word(&s).is_some() => {
            p.next();
            Ok(truth_word(&s).unwrap())
        }
        other => p.error(format!("expected t, u or f, found {other}")),
    }
}

fn raw_value(p: &mut Parser) -> Result<RawValue> {
    if !p.eat(&Tok::LBrace) {
        return Ok(RawValue::Word(elem_name(p)?));
    }
    let mut entries = Vec::new();
    let mut default = None;
    if !p.eat(&Tok::RBrace) {
        loop {
            if p.eat(&Tok::Star) {
                p.expect(&Tok::Colon)?;
                if default.is_some() {
                    return p.error("duplicate `*` entry");
                }
                default = Some(truth(p)?);
            } else {
                let key = raw_key(p)?;
                p.expect(&Tok::Colon)?;
                entries.push((key, truth(p)?));
            }
            if p.eat(&Tok::RBrace) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    Ok(RawValue::Table(entries, default))
}

fn infer_type(name: &str, v: &RawValue) -> Result<Type> {
    let bad = || Error::Structure(format!("cannot infer the type of `{name}`; declare it in a vocabulary"));
    match v {
        RawValue::Word(ElemName::Name(s)) if truth_word(s).is_some() => Ok(Type::Bool),
        RawValue::Word(_) => Ok(Type::Dom),
        RawValue::Table(entries, _) => {
            let (key, _) = entries.first().ok_or_else(bad)?;
            if key.iter().all(|a| matches!(a, RawArg::Elem(_))) {
                return Ok(Type::Pred(key.len()));
            }
            let mut args = Vec::new();
            for a in key {
                args.push(match a {
                    RawArg::Elem(_) => ArgType::Dom,
                    RawArg::Set(ts) => ArgType::Pred(ts.first().ok_or_else(bad)?.len()),
                });
            }
            Ok(Type::SoPred(args))
        }
    }
}

fn lookup(domain: &Domain, n: &ElemName) -> Result<Elem> {
    domain
        .lookup(n)
        .ok_or_else(|| Error::Structure(format!("`{n}` is not a domain element")))
}

fn convert_key(name: &str, key: &[RawArg], ty: &Type, domain: &Domain, cfg: &Config) -> Result<Tuple> {
    let types = ty.arg_types();
    if types.len() != key.len() {
        return Err(Error::Arity {
            what: name.to_string(),
            expected: types.len(),
            found: key.len(),
        });
    }
    let mut out = Tuple::new();
    for (a, t) in key.iter().zip(types) {
        match (a, t) {
            (RawArg::Elem(e), ArgType::Dom) => out.push(Arg::Elem(lookup(domain, e)?)),
            (RawArg::Set(ts), ArgType::Pred(n)) => {
                so_arg_atoms(n, domain, cfg)?;
                let mut mask = 0u64;
                for tup in ts {
                    if tup.len() != n {
                        return Err(Error::Arity {
                            what: format!("tuple in an argument of `{name}`"),
                            expected: n,
                            found: tup.len(),
                        });
                    }
                    let elems = tup.iter().map(|e| lookup(domain, e)).collect::<Result<Vec<_>>>()?;
                    mask |= 1 << crate::interp::tuple_index(elems, domain.size());
                }
                out.push(Arg::Rel(mask));
            }
            // A bare element where a unary relation is expected is ambiguous.
            _ => {
                return Err(Error::Structure(format!(
                    "argument of `{name}` does not match its type {ty}"
                )))
            }
        }
    }
    Ok(out)
}

fn convert(name: &str, v: &RawValue, ty: &Type, domain: &Domain, cfg: &Config) -> Result<Value> {
    match (ty, v) {
        (Type::Dom, RawValue::Word(n)) => Ok(Value::Elem(lookup(domain, n)?)),
        (Type::Bool | Type::Pred(0), RawValue::Word(ElemName::Name(s))) if truth_word(s).is_some() => {
            let v = truth_word(s).unwrap();
            Ok(Value::rel(Relation::uniform(ty, domain.size(), v)?))
        }
        (t, RawValue::Table(entries, default)) if t.is_predicate() => {
            let mut rel = Relation::uniform(ty, domain.size(), default.unwrap_or(ThreeVal::F))?;
            let mut seen = std::collections::BTreeSet::new();
            for (key, val) in entries {
                let tuple = convert_key(name, key, ty, domain, cfg)?;
                if !seen.insert(tuple.clone()) {
                    return Err(Error::Structure(format!("duplicate tuple in the value of `{name}`")));
                }
                rel.set(&tuple, *val);
            }
            Ok(Value::rel(rel))
        }
        _ => Err(Error::Structure(format!("value of `{name}` does not match its type {ty}"))),
    }
}

/// Reads a structure. Symbols declared in `vocab` take their declared type
/// and flags; others get a type inferred from their value.
pub fn parse_structure(text: &str, vocab: &Vocabulary, cfg: &Config) -> Result<PartialInterpretation> {
    let mut p = Parser::new(text, &Vocabulary::new())?;
    match p.ident()?.as_str() {
        "domain" => {}
        other => return Err(Error::Structure(format!("expected `domain` first, found `{other}`"))),
    }
    p.expect(&Tok::Eq)?;
    p.expect(&Tok::LBrace)?;
    let mut names = Vec::new();
    if !p.eat(&Tok::RBrace) {
        loop {
            let first = elem_name(&mut p)?;
            if p.eat(&Tok::DotDot) {
                let last = elem_name(&mut p)?;
                match (&first, &last) {
                    (ElemName::Int(lo), ElemName::Int(hi)) => names.extend((*lo..=*hi).map(ElemName::Int)),
                    _ => return p.error("ranges need integer bounds"),
                }
            } else {
                names.push(first);
            }
            if p.eat(&Tok::RBrace) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    let domain = Domain::new(names);
    let mut out = PartialInterpretation::empty(domain.clone());
    while !p.at_eof() {
        if p.eat(&Tok::Semi) || p.eat(&Tok::Dot) {
            continue;
        }
        let name = p.ident()?;
        p.expect(&Tok::Eq)?;
        let raw = raw_value(&mut p)?;
        let sym = Sym::new(&name);
        if out.interprets(&sym) {
            return Err(Error::Structure(format!("`{name}` is given twice")));
        }
        let ty = match vocab.type_of(&sym) {
            Some(t) => t.clone(),
            None => infer_type(&name, &raw)?,
        };
        let value = convert(&name, &raw, &ty, &domain, cfg)?;
        out.set(sym.clone(), ty, value)?;
        if let Some(info) = vocab.get(&sym) {
            out.set_flags(&sym, info.flags);
        }
    }
    Ok(out)
}

fn write_elem(out: &mut String, d: &Domain, e: Elem) {
    let _ = write!(out, "{}", d.name(e));
}

fn write_tuple(out: &mut String, d: &Domain, t: &[Arg], types: &[ArgType]) {
    out.push('(');
    for (i, (a, ty)) in t.iter().zip(types).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match (a, ty) {
            (Arg::Elem(e), _) => write_elem(out, d, *e),
            (Arg::Rel(m), ArgType::Pred(n)) => {
                out.push('{');
                let count = d.size().pow(*n as u32);
                let mut first = true;
                for idx in (0..count).filter(|i| m >> i & 1 == 1) {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    out.push('(');
                    for (j, e) in index_tuple(idx, *n, d.size()).into_iter().enumerate() {
                        if j > 0 {
                            out.push(',');
                        }
                        write_elem(out, d, e);
                    }
                    out.push(')');
                }
                out.push('}');
            }
            (Arg::Rel(m), ArgType::Dom) => {
                let _ = write!(out, "{{#{m}}}");
            }
        }
    }
    out.push(')');
}

/// A domain atom in structure-file notation, e.g. `tc({(a,b)}, {})`.
pub fn format_atom(d: &Domain, pred: &Sym, args: &[Arg], ty: &Type) -> String {
    let mut out = pred.to_string();
    if !args.is_empty() {
        write_tuple(&mut out, d, args, &ty.arg_types());
    }
    out
}

/// Most frequent value; ties prefer `f`, then `u`, then `t`.
fn majority(counts: &BTreeMap<ThreeVal, usize>) -> ThreeVal {
    let mut best = ThreeVal::F;
    for v in [ThreeVal::F, ThreeVal::U, ThreeVal::T] {
        if counts.get(&v).copied().unwrap_or(0) > counts.get(&best).copied().unwrap_or(0) {
            best = v;
        }
    }
    best
}

/// Writes a structure in the format read by [`parse_structure`]. Lazily
/// computed values are materialized.
pub fn write_structure(i: &PartialInterpretation, cfg: &Config) -> Result<String> {
    let d = i.domain();
    let mut out = String::from("domain = {");
    let ints: Option<Vec<i64>> = d.elems().map(|e| d.int_value(e)).collect();
    match ints {
        Some(v) if v.len() >= 2 && v.windows(2).all(|w| w[1] == w[0] + 1) => {
            let _ = write!(out, "{}..{}", v[0], v[v.len() - 1]);
        }
        _ => {
            for (k, e) in d.elems().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_elem(&mut out, d, e);
            }
        }
    }
    out.push_str("}\n");
    for (name, value) in i.values() {
        let ty = i.vocabulary().type_of(name).expect("interpreted symbols are typed");
        let _ = write!(out, "{name} = ");
        if let Value::Elem(e) = value {
            write_elem(&mut out, d, *e);
            out.push('\n');
            continue;
        }
        if ty.arity() == 0 {
            let _ = writeln!(out, "{}", value.atom(&[])?.symbol());
            continue;
        }
        let types = ty.arg_types();
        let entries: Vec<(Tuple, ThreeVal)> = match value {
            Value::Rel(r) if matches!(**r, Relation::Sparse { .. }) => {
                let Relation::Sparse { default, entries } = &**r else { unreachable!() };
                let mut list: Vec<(Tuple, ThreeVal)> = entries.iter().map(|(k, v)| (k.clone(), *v)).collect();
                list.push((Tuple::new(), *default));
                list
            }
            _ => {
                let all: Vec<(Tuple, ThreeVal)> = carrier(ty, d, cfg)?
                    .into_iter()
                    .map(|t| value.atom(&t).map(|v| (t, v)))
                    .collect::<Result<_>>()?;
                let mut counts = BTreeMap::new();
                for (_, v) in &all {
                    *counts.entry(*v).or_insert(0) += 1;
                }
                let default = majority(&counts);
                let mut list: Vec<(Tuple, ThreeVal)> = all.into_iter().filter(|(_, v)| *v != default).collect();
                list.push((Tuple::new(), default));
                list
            }
        };
        out.push('{');
        let n = entries.len();
        for (k, (t, v)) in entries.into_iter().enumerate() {
            if k + 1 == n {
                let _ = write!(out, "*: {}", v.symbol());
            } else {
                write_tuple(&mut out, d, &t, &types);
                let _ = write!(out, ": {}, ", v.symbol());
            }
        }
        out.push_str("}\n");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn reads_and_writes() {
        let text = "domain = {a, b, c}\nc = a\np = {(a, b): t, (b, c): u, *: f}\nq = u\n";
        let i = parse_structure(text, &Vocabulary::new(), &cfg()).unwrap();
        assert_eq!(i.vocabulary().type_of(&Sym::new("p")), Some(&Type::Pred(2)));
        assert_eq!(i.vocabulary().type_of(&Sym::new("c")), Some(&Type::Dom));
        assert_eq!(write_structure(&i, &cfg()).unwrap(), text);
    }

    #[test]
    fn majority_default_and_ranges() {
        let text = "domain = {1..3}\np = {1: t, 2: t, *: f}\n";
        let i = parse_structure(text, &Vocabulary::new(), &cfg()).unwrap();
        assert_eq!(write_structure(&i, &cfg()).unwrap(), "domain = {1..3}\np = {(3): f, *: t}\n");
        let again = write_structure(&parse_structure("domain = {1..3}\np = {(3): f, *: t}\n", &Vocabulary::new(), &cfg()).unwrap(), &cfg()).unwrap();
        assert_eq!(again, "domain = {1..3}\np = {(3): f, *: t}\n");
    }

    #[test]
    fn second_order_values() {
        let vocab = Vocabulary::new().with("tc", Type::SoPred(vec![ArgType::Pred(2), ArgType::Pred(2)]));
        let text = "domain = {a, b}\ntc = {({(a,b)}, {(a,b)}): t, ({}, {}): t, *: u}\n";
        let i = parse_structure(text, &vocab, &cfg()).unwrap();
        let out = write_structure(&i, &cfg()).unwrap();
        let back = parse_structure(&out, &vocab, &cfg()).unwrap();
        assert_eq!(back, i);
        assert_eq!(write_structure(&back, &cfg()).unwrap(), out);
    }

    #[test]
    fn errors() {
        let v = Vocabulary::new();
        assert!(parse_structure("domain = {a}\nc = z\n", &v, &cfg()).is_err());
        assert!(parse_structure("domain = {a}\np = {a: t, a: f}\n", &v, &cfg()).is_err());
        assert!(parse_structure("c = a", &v, &cfg()).is_err());
    }
}
