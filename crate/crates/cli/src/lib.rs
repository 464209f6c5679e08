//! Front end for `leftpi`: the surface parser and the `check`, `reduce`,
//! `repl` and `roundtrip` commands.

pub mod surface;

use std::io::{BufRead, Write};

use leftpi::algebra::AlgebraSet;
use leftpi::ast::{to_raw, Child, Process, ScopeError, Term};
use leftpi::checker::{check, Derivation, TypeError};
use leftpi::context::fmt_ctx;
use leftpi::metatheory::{derive_capability, subject_cong, subject_reduction, MetaError};
use leftpi::semantics::{
    apply_cong, garbage_collect, reductions, Channel, CongRule, Direction, Reduction, Rewrite,
    TraceStep,
};
use serde_json::json;
use thiserror::Error;

pub use surface::{parse, FreeDecl, ParseError, Program, RawDisplay};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("scope error: {0}")]
    Scope(#[from] ScopeError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("step does not retype: {0}")]
    Retype(#[from] MetaError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            _ => 1,
        }
    }
}

/// A parsed, resolved and checked program.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub program: Program,
    pub process: Process,
    pub derivation: Derivation,
}

impl Loaded {
    pub fn leftover(&self, algs: &AlgebraSet) -> String {
        fmt_ctx(algs, &self.derivation.idxs, &self.derivation.output)
    }
}

pub fn resolve(algs: &AlgebraSet, text: &str) -> Result<(Program, Process), CliError> {
    let program = parse(algs, text)?;
    let process = program.body.to_process(&program.names())?;
    Ok((program, process))
}

pub fn load(algs: &AlgebraSet, text: &str) -> Result<Loaded, CliError> {
    let (program, process) = resolve(algs, text)?;
    let (types, idxs, usage) = program.contexts();
    let derivation = check(algs, &types, &idxs, &usage, &process)?;
    Ok(Loaded {
        program,
        process,
        derivation,
    })
}

pub fn cmd_check(algs: &AlgebraSet, text: &str, as_json: bool) -> Result<String, CliError> {
    let l = load(algs, text)?;
    if as_json {
        let v = json!({
            "process": l.process.display(algs).to_string(),
            "input": fmt_ctx(algs, &l.derivation.idxs, &l.derivation.input),
            "leftover": l.leftover(algs),
            "derivation": l.derivation,
        });
        return Ok(format!("{v:#}\n"));
    }
    Ok(format!(
        "{}leftover: {}\n",
        l.derivation.text(algs),
        l.leftover(algs)
    ))
}

/// Retypes one step. External steps take their capability from `d`.
pub fn retype_step(
    algs: &AlgebraSet,
    d: &Derivation,
    r: &Reduction,
) -> Result<Derivation, MetaError> {
    let cap = match r.channel {
        Channel::Internal => None,
        Channel::External(i) => Some(derive_capability(algs, d, i)?),
    };
    subject_reduction(algs, d, r, cap.as_ref())
}

/// One step of a checked trace.
#[derive(Clone, Debug)]
pub struct Traced {
    pub step: TraceStep,
    pub derivation: Derivation,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub steps: Vec<Traced>,
    /// The last process after flattening and removing empty restrictions,
    /// retyped along the way.
    pub collected: Derivation,
}

/// Takes the first available step until none is left or `max` steps are
/// done, retyping after each one.
pub fn reduce(algs: &AlgebraSet, l: &Loaded, max: Option<usize>) -> Result<Trace, CliError> {
    let mut d = l.derivation.clone();
    let mut steps = Vec::new();
    while max.is_none_or(|m| steps.len() < m) {
        let Some(r) = reductions(algs, &d.subject()).into_iter().next() else {
            break;
        };
        d = retype_step(algs, &d, &r)?;
        steps.push(Traced {
            step: TraceStep {
                step: steps.len() + 1,
                channel: r.channel,
                process: r.target,
            },
            derivation: d.clone(),
        });
    }
    let (log, _) = garbage_collect(&d.subject());
    for rw in &log {
        d = subject_cong(algs, &d, rw)?;
    }
    Ok(Trace {
        steps,
        collected: d,
    })
}

pub fn cmd_reduce(
    algs: &AlgebraSet,
    text: &str,
    max: Option<usize>,
    as_json: bool,
) -> Result<String, CliError> {
    let l = load(algs, text)?;
    let t = reduce(algs, &l, max)?;
    let ctx = |d: &Derivation| fmt_ctx(algs, &d.idxs, &d.input);
    if as_json {
        let steps: Vec<_> = t
            .steps
            .iter()
            .map(|s| {
                json!({
                    "step": s.step.step,
                    "channel": s.step.channel,
                    "process": s.step.process.display(algs).to_string(),
                    "input": ctx(&s.derivation),
                    "leftover": fmt_ctx(algs, &s.derivation.idxs, &s.derivation.output),
                })
            })
            .collect();
        let v = json!({
            "start": l.process.display(algs).to_string(),
            "steps": steps,
            "collected": t.collected.subject().display(algs).to_string(),
        });
        return Ok(format!("{v:#}\n"));
    }
    let mut out = format!("start: {}\n", l.process.display(algs));
    for s in &t.steps {
        let d = &s.derivation;
        out.push_str(&format!(
            "{}\n  typed: {} => {}\n",
            s.step.line(algs),
            ctx(d),
            fmt_ctx(algs, &d.idxs, &d.output)
        ));
    }
    out.push_str(&format!(
        "collected: {}\nleftover: {}\n",
        t.collected.subject().display(algs),
        fmt_ctx(algs, &t.collected.idxs, &t.collected.output)
    ));
    Ok(out)
}

pub fn cmd_roundtrip(algs: &AlgebraSet, text: &str) -> Result<String, CliError> {
    let (program, process) = resolve(algs, text)?;
    let body = to_raw(&program.names(), &process)?;
    let back = Program {
        free: program.free,
        body,
    };
    Ok(format!("{}\n", back.display(algs)))
}

/// What the repl offers at each point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Step(Reduction),
    Rewrite(Rewrite),
}

impl Choice {
    pub fn describe(&self, algs: &AlgebraSet) -> String {
        match self {
            Choice::Step(r) => format!("comm {} => {}", r.channel, r.target.display(algs)),
            Choice::Rewrite(rw) => rw.to_string(),
        }
    }
}

fn paths(t: &Term, here: &mut Vec<Child>, out: &mut Vec<Vec<Child>>) {
    out.push(here.clone());
    let kids: &[Child] = match t {
        Term::End => &[],
        Term::Res { .. } => &[Child::ResBody],
        Term::Par(..) => &[Child::ParLeft, Child::ParRight],
        Term::Recv { .. } => &[Child::RecvBody],
        Term::Send { .. } => &[Child::SendBody],
    };
    for &c in kids {
        here.push(c);
        paths(t.child(c).expect("child exists"), here, out);
        here.pop();
    }
}

/// Every communication step, then every congruence rewrite that applies.
/// Introducing `| end` or `ν end` applies everywhere and is left out.
pub fn choices(algs: &AlgebraSet, p: &Process) -> Vec<Choice> {
    let mut out: Vec<Choice> = reductions(algs, p).into_iter().map(Choice::Step).collect();
    let mut all = Vec::new();
    paths(p.term(), &mut Vec::new(), &mut all);
    for path in all {
        for rule in CongRule::ALL {
            for dir in [Direction::Forward, Direction::Backward] {
                if dir == Direction::Backward
                    && matches!(rule, CongRule::CompId | CongRule::ScopeEnd)
                {
                    continue;
                }
                if apply_cong(rule, dir, &path, p).is_ok() {
                    out.push(Choice::Rewrite(Rewrite::new(rule, dir, path.clone())));
                }
            }
        }
    }
    out
}

pub fn apply_choice(
    algs: &AlgebraSet,
    d: &Derivation,
    c: &Choice,
) -> Result<Derivation, MetaError> {
    match c {
        Choice::Step(r) => retype_step(algs, d, r),
        Choice::Rewrite(rw) => subject_cong(algs, d, rw),
    }
}

/// Reads one command per line: a choice number, or `q` to stop. Returns the
/// final derivation.
pub fn run_repl(
    algs: &AlgebraSet,
    l: &Loaded,
    input: impl BufRead,
    mut out: impl Write,
) -> Result<Derivation, CliError> {
    let mut d = l.derivation.clone();
    let mut lines = input.lines();
    loop {
        let p = d.subject();
        let cs = choices(algs, &p);
        writeln!(out, "process: {}", p.display(algs))?;
        writeln!(
            out,
            "typed: {} => {}",
            fmt_ctx(algs, &d.idxs, &d.input),
            fmt_ctx(algs, &d.idxs, &d.output)
        )?;
        for (k, c) in cs.iter().enumerate() {
            writeln!(out, "  {}) {}", k + 1, c.describe(algs))?;
        }
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next().transpose()? else {
            writeln!(out)?;
            return Ok(d);
        };
        let cmd = line.trim();
        if cmd == "q" || cmd == "quit" {
            return Ok(d);
        }
        match cmd
            .parse::<usize>()
            .ok()
            .and_then(|k| cs.get(k.wrapping_sub(1)))
        {
            Some(c) => match apply_choice(algs, &d, c) {
                Ok(next) => d = next,
                Err(e) => writeln!(out, "cannot retype: {e}")?,
            },
            None => writeln!(out, "expected a number from 1 to {} or q", cs.len())?,
        }
    }
}
