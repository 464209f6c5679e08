//! Derivation transformers for the metatheory of the calculus, and a
//! generator of well-typed processes.
//!
//! Every transformer builds its result structurally from the input
//! derivation and then passes it through [`recheck`] before returning it.

mod congruence;
mod frame;
mod gen;
mod reduction;
mod structural;
mod subst;

use thiserror::Error;

use crate::algebra::AlgebraSet;
use crate::algebra::UsagePair;
use crate::ast::{Name, NuAnnot};
use crate::checker::{recheck, Derivation, RecheckError, Rule};
use crate::context::{ContextError, Ctx, Idxs, PreCtx};
use crate::semantics::RewriteError;

pub use congruence::subject_cong;
pub use frame::{frame, SplitEvidence};
pub use gen::{gen_well_typed, run_property, AlgMix, Counterexample, Generated, PropertyReport};
pub use reduction::{derive_capability, subject_reduction};
pub use structural::{exchange_deriv, strengthen, weaken};
pub use subst::{subst_deriv, subst_top, SubstEvidence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaError {
    #[error("frame undefined: {0}")]
    FrameUndefined(String),
    #[error("variable {0} is used")]
    UsedVariable(usize),
    #[error("index {index} is out of range for depth {depth}")]
    OutOfRange { index: usize, depth: usize },
    #[error("the inserted entry is not a valid type and usage")]
    InvalidEntry,
    #[error("evidence mismatch: {0}")]
    EvidenceMismatch(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("step not derivable: {0}")]
    StepNotDerivable(String),
    #[error("an external step on {0} needs a capability")]
    MissingCapability(usize),
    #[error("no capability for variable {0}")]
    NoCapability(usize),
    #[error("transformer produced an invalid derivation: {0}")]
    Unsound(RecheckError),
}

fn checked(algs: &AlgebraSet, d: Derivation) -> Result<Derivation, MetaError> {
    recheck(algs, &d).map_err(MetaError::Unsound)?;
    Ok(d)
}

fn tail(c: &Ctx) -> Ctx {
    c.uncons().expect("binder context is nonempty").0
}

fn end_node(types: &PreCtx, idxs: &Idxs, ctx: &Ctx) -> Derivation {
    Derivation {
        types: types.clone(),
        idxs: idxs.clone(),
        input: ctx.clone(),
        output: ctx.clone(),
        rule: Rule::End,
    }
}

fn par_node(left: Derivation, right: Derivation) -> Derivation {
    Derivation {
        types: left.types.clone(),
        idxs: left.idxs.clone(),
        input: left.input.clone(),
        output: right.output.clone(),
        rule: Rule::Par {
            left: Box::new(left),
            right: Box::new(right),
        },
    }
}

fn res_node(hint: Name, annot: NuAnnot, body: Derivation) -> Derivation {
    Derivation {
        types: body.types.uncons().expect("binder").0,
        idxs: body.idxs.uncons().expect("binder").0,
        input: tail(&body.input),
        output: tail(&body.output),
        rule: Rule::Res {
            hint,
            annot,
            body: Box::new(body),
        },
    }
}

fn context_error(e: ContextError) -> String {
    e.to_string()
}

/// `ℓ#` in the algebra at `i`.
fn both_at(algs: &AlgebraSet, idxs: &Idxs, i: usize) -> Option<UsagePair> {
    idxs.get(i).map(|&a| algs.both(a))
}
