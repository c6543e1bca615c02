//! A composable three-valued logic kernel: Kleene connectives, partial
//! interpretations, a typed formula language with inductive definitions,
//! well-founded and stable semantics, and second-order templates.

pub mod ast;
mod config;
pub mod defs;
mod error;
pub mod eval;
pub mod interp;
mod par;
pub mod parser;
mod rewrite;
pub mod structure;
pub mod templates;
pub mod values;

pub use ast::{classify, typecheck, Builtin, Expr, Fragment, Rule, RuleSet, Term};
pub use config::Config;
pub use defs::{Definition, StableReport};
pub use error::{Diagnostic, Error, Result};
pub use eval::{eval, eval_exact, eval_rule_set, EvalMode, Semantics};
pub use interp::{
    Arg, ArgType, Domain, DomainAtom, Elem, ElemName, PartialInterpretation, Relation, RelationOracle, Sym,
    SymbolFlags, Tuple, Type, Value, Vocabulary,
};
pub use parser::{parse_document, parse_formula, parse_rules, Block, Document};
pub use structure::{format_atom, parse_structure, write_structure};
pub use templates::{
    apply_library, check_correspondence, eliminate_so, macro_expand, materialize, templify, validate_library, Eliminated,
    LibraryInstance, LibraryIssue, LibraryReport, Template, TemplateLibrary, Templified,
};
pub use values::ThreeVal;
