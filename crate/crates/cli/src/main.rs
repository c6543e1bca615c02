//! Command-line frontend: type checking, evaluation, definitions, model
//! expansion, rewriting and template libraries over text files.
//!
//! Exit codes: 0 success, 1 negative semantic result (no model, invalid
//! library, failed equivalence check), 2 input error, 3 cap exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use idstar::ast::typecheck_rules;
use idstar::templates::{check_elimination, check_expansion};
use idstar::*;
use serde_json::{json, Value as Json};

#[derive(Parser, Debug)]
#[command(name = "idstar", version, about = "Three-valued logic kernel with nested definitions and templates")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Largest number of defined domain atoms for partial stable enumeration.
    #[arg(long, global = true)]
    max_atoms: Option<usize>,
    /// Largest number of exact completions explored by one enumeration.
    #[arg(long, global = true)]
    max_completions: Option<usize>,
    /// Run every enumeration on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Kleene,
    Super,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Type-check every block of a theory.
    Typecheck {
        theory: PathBuf,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Report the fragment of every block.
    Classify {
        theory: PathBuf,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Evaluate every block of a theory in a structure.
    Eval {
        theory: PathBuf,
        structure: PathBuf,
        #[arg(short, long, value_enum, default_value = "kleene")]
        mode: Mode,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Print the well-founded model of a definition in a context.
    Wfm {
        theory: PathBuf,
        structure: PathBuf,
        /// Name of the definition block (default: the first one).
        #[arg(long = "def")]
        definition: Option<String>,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Print every stable model of a definition in a context.
    Stable {
        theory: PathBuf,
        structure: PathBuf,
        #[arg(long = "def")]
        definition: Option<String>,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Enumerate the exact expansions of a structure that satisfy a theory.
    Mx {
        theory: PathBuf,
        structure: PathBuf,
        #[arg(long)]
        lib: Option<PathBuf>,
        /// Stop after this many models.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Expand the templates of a library used in a theory.
    Expand {
        theory: PathBuf,
        #[arg(long)]
        lib: PathBuf,
        /// Check equivalence on every structure with one or two elements.
        #[arg(long)]
        check_equiv: bool,
    },
    /// Replace existential second-order quantifiers by fresh predicates.
    EliminateSo {
        theory: PathBuf,
        #[arg(long)]
        lib: Option<PathBuf>,
        #[arg(long)]
        check_equiv: bool,
    },
    /// Check the conditions on a template library.
    ValidateLib {
        lib: PathBuf,
        /// Test domain, e.g. `{a,b}` or `{1..3}`; repeatable.
        #[arg(long = "domain")]
        domains: Vec<String>,
    },
    /// Expand a structure with the values of a library's template symbols.
    ApplyLib {
        structure: PathBuf,
        #[arg(long)]
        lib: PathBuf,
    },
}

/// A negative semantic result: output was produced, exit with 1.
const NEGATIVE: u8 = 1;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_library(path: Option<&PathBuf>) -> Result<TemplateLibrary> {
    let Some(path) = path else {
        return Ok(TemplateLibrary::default());
    };
    let doc = parse_document(&read(path)?, &Vocabulary::new()).with_context(|| format!("in {}", path.display()))?;
    if doc.formulas().next().is_some() || doc.definitions().next().is_some() {
        bail!("{}: a library contains only vocabulary and template blocks", path.display());
    }
    Ok(TemplateLibrary::from_document(&doc))
}

struct Theory {
    doc: Document,
    lib: TemplateLibrary,
    /// The theory's own symbols together with the library's.
    sigma: Vocabulary,
}

fn load_theory(path: &Path, lib: Option<&PathBuf>) -> Result<Theory> {
    let lib = load_library(lib)?;
    let doc = parse_document(&read(path)?, lib.vocabulary()).with_context(|| format!("in {}", path.display()))?;
    let sigma = doc.vocab.union(lib.vocabulary())?;
    Ok(Theory { doc, lib, sigma })
}

fn load_structure(path: &Path, vocab: &Vocabulary, cfg: &Config) -> Result<PartialInterpretation> {
    parse_structure(&read(path)?, vocab, cfg).with_context(|| format!("in {}", path.display()))
}

/// The structure expanded with the library, when there is one.
fn with_library(i: &PartialInterpretation, lib: &TemplateLibrary, cfg: &Config) -> Result<PartialInterpretation> {
    if lib.is_empty() {
        Ok(i.clone())
    } else {
        Ok(apply_library(i, lib, cfg)?)
    }
}

fn blocks(doc: &Document) -> Vec<(String, Expr)> {
    doc.blocks
        .iter()
        .filter_map(|b| match b {
            Block::Formula(n, e) => Some((n.clone(), e.clone())),
            Block::Definition(n, d) => Some((n.clone(), Expr::Definition(d.clone()))),
            Block::Template(..) => None,
        })
        .collect()
}

fn pick_definition<'a>(doc: &'a Document, name: Option<&'a str>) -> Result<(&'a str, &'a RuleSet)> {
    match name {
        Some(n) => doc
            .definition(n)
            .map(|d| (n, d))
            .ok_or_else(|| anyhow!("no definition block named `{n}`")),
        None => doc.definitions().next().ok_or_else(|| anyhow!("the theory has no definition block")),
    }
}

fn parse_domain(text: &str, cfg: &Config) -> Result<Domain> {
    let text = text.trim();
    let braced = if text.starts_with('{') { text.to_string() } else { format!("{{{text}}}") };
    let i = parse_structure(&format!("domain = {braced}\n"), &Vocabulary::new(), cfg)
        .with_context(|| format!("bad domain `{text}`"))?;
    Ok(i.domain().clone())
}

fn only_symbols(i: &PartialInterpretation, names: &[Sym]) -> PartialInterpretation {
    i.restrict_to(names.iter())
}

/// Text and JSON renderings of one command's result.
struct Output {
    text: String,
    json: Json,
    code: u8,
}

impl Output {
    fn ok(text: String, json: Json) -> Self {
        Output { text, json, code: 0 }
    }
}

fn equivalence_domains() -> Vec<Domain> {
    vec![Domain::from_names(&["a"]), Domain::from_names(&["a", "b"])]
}

fn run(cli: &Cli) -> Result<Output> {
    let mut cfg = Config::default();
    if let Some(n) = cli.max_atoms {
        cfg.max_defined_atoms = n;
    }
    if let Some(n) = cli.max_completions {
        cfg.max_completions = n;
    }
    if cli.sequential {
        cfg = cfg.sequential();
    }
    match &cli.cmd {
        Command::Typecheck { theory, lib } => {
            let t = load_theory(theory, lib.as_ref())?;
            for (_, e) in t.doc.formulas() {
                typecheck(e, &t.sigma)?;
            }
            for (_, d) in t.doc.definitions() {
                typecheck_rules(d, &t.sigma)?;
            }
            Ok(Output::ok("ok\n".into(), json!({ "ok": true })))
        }
        Command::Classify { theory, lib } => {
            let t = load_theory(theory, lib.as_ref())?;
            let mut text = String::new();
            let mut out = Vec::new();
            for (name, e) in blocks(&t.doc) {
                let f = classify(&e);
                writeln!(text, "{name}: {f}")?;
                out.push(json!({ "block": name, "fragment": f.to_string() }));
            }
            Ok(Output::ok(text, json!({ "blocks": out })))
        }
        Command::Eval {
            theory,
            structure,
            mode,
            lib,
        } => {
            let t = load_theory(theory, lib.as_ref())?;
            let i = with_library(&load_structure(structure, &t.sigma, &cfg)?, &t.lib, &cfg)?;
            let mode = match mode {
                Mode::Kleene => EvalMode::Kleene,
                Mode::Super => EvalMode::Supervaluation,
            };
            let mut text = String::new();
            let mut out = Vec::new();
            for (name, e) in blocks(&t.doc) {
                let v = eval(&e, &i, mode, &cfg)?;
                writeln!(text, "{name}: {v}")?;
                out.push(json!({ "block": name, "value": v.to_string() }));
            }
            Ok(Output::ok(text, json!({ "values": out })))
        }
        Command::Wfm {
            theory,
            structure,
            definition,
            lib,
        } => {
            let t = load_theory(theory, lib.as_ref())?;
            let (name, rules) = pick_definition(&t.doc, definition.as_deref())?;
            let def = Definition::new(rules.clone(), &t.sigma)?;
            let o = with_library(&load_structure(structure, &t.sigma, &cfg)?, &t.lib, &cfg)?;
            let defined: Vec<Sym> = def.defined().iter().map(|(s, _)| s.clone()).collect();
            match def.well_founded_model(&o, &cfg)? {
                Some(w) => {
                    let exact = w.is_exact();
                    let body = write_structure(&only_symbols(&w, &defined), &cfg)?;
                    let text = format!("% well-founded model of {name} ({})\n{body}", if exact { "total" } else { "not total" });
                    Ok(Output::ok(text, json!({ "definition": name, "total": exact, "model": body })))
                }
                None => Ok(Output {
                    text: format!("% {name} has no well-founded model\n"),
                    json: json!({ "definition": name, "model": null }),
                    code: NEGATIVE,
                }),
            }
        }
        Command::Stable {
            theory,
            structure,
            definition,
            lib,
        } => {
            let t = load_theory(theory, lib.as_ref())?;
            let (name, rules) = pick_definition(&t.doc, definition.as_deref())?;
            let def = Definition::new(rules.clone(), &t.sigma)?;
            let o = with_library(&load_structure(structure, &t.sigma, &cfg)?, &t.lib, &cfg)?;
            let defined: Vec<Sym> = def.defined().iter().map(|(s, _)| s.clone()).collect();
            let mut models: Vec<String> = def
                .stable_models(&o, &cfg)?
                .iter()
                .map(|m| write_structure(&only_symbols(m, &defined), &cfg))
                .collect::<idstar::Result<_>>()?;
            models.sort();
            let mut text = String::new();
            for (k, m) in models.iter().enumerate() {
                write!(text, "% stable model {} of {name}\n{m}", k + 1)?;
            }
            writeln!(text, "% {} stable model(s)", models.len())?;
            let code = if models.is_empty() { NEGATIVE } else { 0 };
            Ok(Output {
                text,
                json: json!({ "definition": name, "models": models }),
                code,
            })
        }
        Command::Mx {
            theory,
            structure,
            lib,
            limit,
        } => {
            let t = load_theory(theory, lib.as_ref())?;
            let input = load_structure(structure, &t.sigma, &cfg)?;
            let user: Vec<Sym> = t
                .doc
                .vocab
                .iter()
                .filter(|(s, info)| !info.flags.template && !input.interprets(s))
                .map(|(s, _)| s.clone())
                .collect();
            let extra = t.doc.vocab.select(user.iter());
            let theory_expr = t.doc.theory();
            let inst = if t.lib.is_empty() {
                None
            } else {
                Some(LibraryInstance::new(&t.lib, input.domain_arc().clone(), &cfg)?)
            };
            let mut models = Vec::new();
            for j in input.exact_expansions(&extra, &cfg)? {
                let k = match &inst {
                    Some(inst) => inst.apply(&j)?,
                    None => j.clone(),
                };
                if eval_exact(&theory_expr, &k, &cfg)? == ThreeVal::T {
                    models.push(write_structure(&j, &cfg)?);
                    if limit.is_some_and(|l| models.len() >= l) {
                        break;
                    }
                }
            }
            models.sort();
            let mut text = String::new();
            for (k, m) in models.iter().enumerate() {
                write!(text, "% model {}\n{m}", k + 1)?;
            }
            writeln!(text, "% {} model(s)", models.len())?;
            let code = if models.is_empty() { NEGATIVE } else { 0 };
            Ok(Output {
                text,
                json: json!({ "models": models }),
                code,
            })
        }
        Command::Expand {
            theory,
            lib,
            check_equiv,
        } => {
            let t = load_theory(theory, Some(lib))?;
            let mut out = Document {
                vocab: t.doc.vocab.clone(),
                blocks: Vec::new(),
            };
            for b in &t.doc.blocks {
                out.blocks.push(match b {
                    Block::Formula(n, e) => Block::Formula(n.clone(), macro_expand(e, &t.lib)?),
                    Block::Definition(n, d) => match macro_expand(&Expr::Definition(d.clone()), &t.lib)? {
                        Expr::Definition(d) => Block::Definition(n.clone(), d),
                        other => Block::Formula(n.clone(), other),
                    },
                    Block::Template(..) => bail!("a theory cannot contain template blocks"),
                });
            }
            let mut text = out.to_string();
            let mut result = json!({ "theory": text.clone() });
            let mut code = 0;
            if *check_equiv {
                let (phi, expanded) = (t.doc.theory(), out.theory());
                let mut pass = true;
                for d in equivalence_domains() {
                    if let Some(cex) = check_expansion(&phi, &expanded, &t.lib, &t.doc.vocab, &d, &cfg)? {
                        pass = false;
                        write!(text, "% counterexample\n{}", write_structure(&cex, &cfg)?)?;
                        break;
                    }
                }
                writeln!(text, "equiv: {}", if pass { "pass" } else { "fail" })?;
                result["equiv"] = json!(pass);
                code = if pass { 0 } else { NEGATIVE };
            }
            Ok(Output { text, json: result, code })
        }
        Command::EliminateSo {
            theory,
            lib,
            check_equiv,
        } => {
            let t = load_theory(theory, lib.as_ref())?;
            let mut vocab = t.sigma.clone();
            let mut out = Document {
                vocab: t.doc.vocab.clone(),
                blocks: Vec::new(),
            };
            let mut pairs = Vec::new();
            for (name, e) in blocks(&t.doc) {
                let el = eliminate_so(&e, &vocab)?;
                vocab = vocab.union(&el.vocabulary())?;
                out.vocab = out.vocab.union(&el.vocabulary())?;
                out.blocks.push(Block::Formula(name, el.expr.clone()));
                pairs.push((e, el));
            }
            let mut text = out.to_string();
            let mut result = json!({ "theory": text.clone() });
            let mut code = 0;
            if *check_equiv {
                if !t.lib.is_empty() {
                    bail!("--check-equiv for eliminate-so works on theories without a library");
                }
                let mut pass = true;
                'outer: for (e, el) in &pairs {
                    for d in equivalence_domains() {
                        if let Some(cex) = check_elimination(e, el, &t.doc.vocab, &d, &cfg)? {
                            pass = false;
                            write!(text, "% counterexample\n{}", write_structure(&cex, &cfg)?)?;
                            break 'outer;
                        }
                    }
                }
                writeln!(text, "equiv: {}", if pass { "pass" } else { "fail" })?;
                result["equiv"] = json!(pass);
                code = if pass { 0 } else { NEGATIVE };
            }
            Ok(Output { text, json: result, code })
        }
        Command::ValidateLib { lib, domains } => {
            let l = load_library(Some(lib))?;
            let domains = domains.iter().map(|d| parse_domain(d, &cfg)).collect::<Result<Vec<_>>>()?;
            let report = validate_library(&l, &domains, &cfg)?;
            let mut text = format!("order: {}\n", report.order.join(", "));
            for issue in &report.issues {
                writeln!(text, "issue: {issue}")?;
            }
            writeln!(text, "{}", if report.is_valid() { "valid" } else { "invalid" })?;
            let issues: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
            Ok(Output {
                text,
                json: json!({ "order": report.order, "issues": issues, "valid": report.is_valid() }),
                code: if report.is_valid() { 0 } else { NEGATIVE },
            })
        }
        Command::ApplyLib { structure, lib } => {
            let l = load_library(Some(lib))?;
            let i = load_structure(structure, l.vocabulary(), &cfg)?;
            if let Some(s) = l.vocabulary().names().find(|s| i.interprets(s)) {
                bail!("the structure already interprets template symbol `{s}`");
            }
            let j = materialize(&apply_library(&i, &l, &cfg)?, &cfg)?;
            let text = write_structure(&j, &cfg)?;
            Ok(Output::ok(text.clone(), json!({ "structure": text })))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<idstar::Error>() {
        Some(err) if err.is_cap() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
