//! The golden-file corpus: one entry per CLI invocation over `fixtures/`.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const CASES: &[Case] = &[
    Case { name: "typecheck_eqrel", args: &["typecheck", "eqrel.fo", "--lib", "eqrel.lib"], exit: 0 },
    Case { name: "typecheck_illtyped", args: &["typecheck", "illtyped.fo"], exit: 2 },
    Case { name: "typecheck_syntax_error", args: &["typecheck", "bad.fo"], exit: 2 },
    Case { name: "classify_eqrel", args: &["classify", "eqrel.fo", "--lib", "eqrel.lib"], exit: 0 },
    Case { name: "classify_skolem", args: &["classify", "skolem.fo"], exit: 0 },
    Case { name: "eval_kleene", args: &["eval", "kleene.fo", "kleene.st", "-m", "kleene"], exit: 0 },
    Case { name: "eval_super", args: &["eval", "kleene.fo", "kleene.st", "-m", "super"], exit: 0 },
    Case { name: "eval_super_json", args: &["--json", "eval", "kleene.fo", "kleene.st", "-m", "super"], exit: 0 },
    Case { name: "eval_eqrel", args: &["eval", "eqrel.fo", "eqrel.st", "--lib", "eqrel.lib"], exit: 0 },
    Case { name: "eval_game", args: &["eval", "game.fo", "game.st", "--lib", "game.lib"], exit: 0 },
    Case { name: "wfm_choice", args: &["wfm", "choice.fo", "empty.st"], exit: 0 },
    Case { name: "wfm_reach", args: &["wfm", "reach.fo", "reach.st"], exit: 0 },
    Case { name: "wfm_reach_json", args: &["--json", "wfm", "reach.fo", "reach.st"], exit: 0 },
    Case { name: "stable_choice", args: &["stable", "choice.fo", "empty.st"], exit: 0 },
    Case { name: "stable_liar", args: &["stable", "paradox.fo", "empty.st"], exit: 1 },
    Case { name: "mx_closure", args: &["mx", "closure.fo", "closure.st", "--lib", "closure.lib"], exit: 0 },
    Case { name: "mx_range", args: &["mx", "range.fo", "range.st", "--lib", "range.lib"], exit: 0 },
    Case { name: "expand_eqrel", args: &["expand", "eqrel.fo", "--lib", "eqrel.lib", "--check-equiv"], exit: 0 },
    Case { name: "expand_eqrel_json", args: &["--json", "expand", "eqrel.fo", "--lib", "eqrel.lib"], exit: 0 },
    Case { name: "eliminate_so_skolem", args: &["eliminate-so", "skolem.fo", "--check-equiv"], exit: 0 },
    Case { name: "validate_eqrel", args: &["validate-lib", "eqrel.lib", "--domain", "{a,b}", "--domain", "{a,b,c}"], exit: 0 },
    Case { name: "validate_closure", args: &["validate-lib", "closure.lib", "--domain", "{a,b}"], exit: 0 },
    Case { name: "validate_range", args: &["validate-lib", "range.lib", "--domain", "{1..3}"], exit: 0 },
    Case { name: "validate_game", args: &["validate-lib", "game.lib", "--domain", "{1..2}"], exit: 0 },
    Case { name: "apply_closure", args: &["apply-lib", "closure_small.st", "--lib", "closure.lib"], exit: 0 },
    Case { name: "apply_range", args: &["apply-lib", "range.st", "--lib", "range.lib"], exit: 0 },
    Case { name: "apply_closure_cap", args: &["apply-lib", "closure.st", "--lib", "closure.lib"], exit: 3 },
];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn golden_path(case: &Case) -> PathBuf {
    fixtures().join("golden").join(format!("{}.out", case.name))
}

/// Runs a case; returns stdout (followed by stderr, when there is any) and
/// the exit code.
pub fn run(case: &Case) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_idstar"))
        .args(case.args)
        .current_dir(fixtures())
        .output()
        .expect("run the idstar binary");
    let mut text = out.stdout;
    if !out.stderr.is_empty() {
        text.extend_from_slice(b"--- stderr\n");
        text.extend_from_slice(&out.stderr);
    }
    (text, out.status.code().unwrap_or(-1))
}
