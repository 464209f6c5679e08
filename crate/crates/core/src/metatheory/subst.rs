use serde::{Deserialize, Serialize};

use super::frame::frame_to;
use super::{checked, context_error, MetaError};
use crate::algebra::{AlgebraSet, UsagePair};
use crate::checker::{Derivation, Rule};
use crate::context::{consume_var, split_ctx, Ctx, Idxs, PreCtx, VarRef};

/// The four arrows `Γ_i ∋i m ▷ Γ`, `Γ_j ∋j m ▷ Γ`, `Ψ_i ∋i n ▷ Ψ`,
/// `Ψ_j ∋j n ▷ Ψ`. `Γ_i` and `Ψ_i` are the derivation's own contexts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstEvidence {
    pub m: UsagePair,
    pub n: UsagePair,
    pub gamma: Ctx,
    pub gamma_j: Ctx,
    pub psi: Ctx,
    pub psi_j: Ctx,
}

fn mismatch(what: &str) -> MetaError {
    MetaError::EvidenceMismatch(what.to_string())
}

#[allow(clippy::too_many_arguments)]
fn arrow(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    from: &Ctx,
    index: usize,
    x: UsagePair,
    alg_of: usize,
    to: &Ctx,
    name: &str,
) -> Result<(), MetaError> {
    let alg = *idxs.get(alg_of).ok_or_else(|| mismatch(name))?;
    match consume_var(algs, types, idxs, from, index, x, alg) {
        Ok((_, left)) if &left == to => Ok(()),
        _ => Err(mismatch(name)),
    }
}

/// Moves the usage left at `i` (beyond what `Γ` keeps there) onto `j`.
struct Transfer<'a> {
    algs: &'a AlgebraSet,
    i: usize,
    j: usize,
    base: UsagePair,
}

impl Transfer<'_> {
    fn ctx(&self, idxs: &Idxs, c: &Ctx, off: usize) -> Result<Ctx, MetaError> {
        let (i, j) = (self.i + off, self.j + off);
        let alg = *idxs.get(i).expect("aligned contexts");
        let at_i = *c.get(i).expect("aligned contexts");
        let moved = self
            .algs
            .split_pair(alg, at_i, self.base)
            .ok_or_else(|| mismatch("usage at i falls below Γ"))?;
        let at_j = self
            .algs
            .compose_pair(alg, *c.get(j).expect("aligned contexts"), moved)
            .ok_or_else(|| mismatch("usage at j cannot absorb i"))?;
        let mut out = c.clone();
        out.set(i, self.base).expect("in range");
        out.set(j, at_j).expect("in range");
        Ok(out)
    }

    fn var_ref(&self, idxs: &Idxs, r: &VarRef, off: usize) -> Result<VarRef, MetaError> {
        Ok(VarRef {
            index: if r.index == self.i + off {
                self.j + off
            } else {
                r.index
            },
            ty: r.ty.clone(),
            alg: r.alg,
            demanded: r.demanded,
            input: self.ctx(idxs, &r.input, off)?,
            output: self.ctx(idxs, &r.output, off)?,
        })
    }

    fn apply(&self, d: &Derivation, off: usize) -> Result<Derivation, MetaError> {
        let body = |b: &Derivation| self.apply(b, off + 1).map(Box::new);
        let rule = match &d.rule {
            Rule::End => Rule::End,
            Rule::Res {
                hint,
                annot,
                body: b,
            } => Rule::Res {
                hint: hint.clone(),
                annot: annot.clone(),
                body: body(b)?,
            },
            Rule::Recv {
                chan,
                hint,
                body: b,
            } => Rule::Recv {
                chan: self.var_ref(&d.idxs, chan, off)?,
                hint: hint.clone(),
                body: body(b)?,
            },
            Rule::Send {
                chan,
                payload,
                body: b,
            } => Rule::Send {
                chan: self.var_ref(&d.idxs, chan, off)?,
                payload: self.var_ref(&d.idxs, payload, off)?,
                body: Box::new(self.apply(b, off)?),
            },
            Rule::Par { left, right } => Rule::Par {
                left: Box::new(self.apply(left, off)?),
                right: Box::new(self.apply(right, off)?),
            },
        };
        Ok(Derivation {
            types: d.types.clone(),
            idxs: d.idxs.clone(),
            input: self.ctx(&d.idxs, &d.input, off)?,
            output: self.ctx(&d.idxs, &d.output, off)?,
            rule,
        })
    }
}

/// Redirects every reference to `i` onto `j`, which has the same type and
/// algebra. The result types `subst(P, j, i)` from `Γ_j` to `Ψ_j`.
pub fn subst_deriv(
    algs: &AlgebraSet,
    d: &Derivation,
    i: usize,
    j: usize,
    ev: &SubstEvidence,
) -> Result<Derivation, MetaError> {
    let depth = d.depth();
    for index in [i, j] {
        if index >= depth {
            return Err(MetaError::OutOfRange { index, depth });
        }
    }
    if d.types.get(i) != d.types.get(j) || d.idxs.get(i) != d.idxs.get(j) {
        return Err(mismatch("i and j differ in type or algebra"));
    }
    let (t, x) = (&d.types, &d.idxs);
    arrow(algs, t, x, &d.input, i, ev.m, i, &ev.gamma, "Γ_i ∋i m ▷ Γ")?;
    arrow(
        algs,
        t,
        x,
        &ev.gamma_j,
        j,
        ev.m,
        i,
        &ev.gamma,
        "Γ_j ∋j m ▷ Γ",
    )?;
    arrow(algs, t, x, &d.output, i, ev.n, i, &ev.psi, "Ψ_i ∋i n ▷ Ψ")?;
    arrow(algs, t, x, &ev.psi_j, j, ev.n, i, &ev.psi, "Ψ_j ∋j n ▷ Ψ")?;
    let delta = split_ctx(algs, &d.idxs, &ev.gamma, &ev.psi)
        .map_err(|_| mismatch("Γ does not split into Δ and Ψ"))?;
    if *delta.get(i).expect("in range") != algs.empty(d.idxs[i]) {
        return Err(mismatch("Δ is not empty at i"));
    }
    let transfer = Transfer {
        algs,
        i,
        j,
        base: ev.gamma[i],
    };
    let out = transfer.apply(d, 0)?;
    if out.input != ev.gamma_j || out.output != ev.psi_j {
        return Err(mismatch("result contexts differ from Γ_j and Ψ_j"));
    }
    checked(algs, out)
}

/// For `(Γ, m) ⊢ P ▷ (Ψ, ℓ∅)` and `Ψ ∋j m ▷ Ξ`, types `subst(P, 1+j, 0)` in
/// `(Γ, m) ▷ (Ξ, m)`.
pub fn subst_top(
    algs: &AlgebraSet,
    d: &Derivation,
    j: usize,
    xi: &Ctx,
) -> Result<Derivation, MetaError> {
    let depth = d.depth();
    if 1 + j >= depth {
        return Err(MetaError::OutOfRange {
            index: 1 + j,
            depth,
        });
    }
    let alg = d.idxs[0];
    let (gamma, &m) = d.input.uncons().expect("nonempty");
    let (psi, &top) = d.output.uncons().expect("nonempty");
    if top != algs.empty(alg) {
        return Err(mismatch("leftover at 0 is not empty"));
    }
    let outer_types = d.types.uncons().expect("nonempty").0;
    let outer_idxs = d.idxs.uncons().expect("nonempty").0;
    arrow(
        algs,
        &outer_types,
        &outer_idxs,
        &psi,
        j,
        m,
        j,
        xi,
        "Ψ ∋j m ▷ Ξ",
    )?;
    if outer_idxs[j] != alg {
        return Err(mismatch("Ψ ∋j m ▷ Ξ"));
    }
    let (_, theta) = consume_var(algs, &outer_types, &outer_idxs, &gamma, j, m, alg)
        .map_err(|e| MetaError::FrameUndefined(context_error(e)))?;
    // (Θ, m) ⊢ P ▷ (Ξ, ℓ∅)
    let framed = frame_to(algs, d, &theta.with(m))?;
    let (_, emptied) = consume_var(algs, &d.types, &d.idxs, &framed.input, 0, m, alg)
        .map_err(|e| mismatch(&context_error(e)))?;
    let ev = SubstEvidence {
        m,
        n: algs.empty(alg),
        gamma: emptied.clone(),
        gamma_j: gamma.with(emptied[0]),
        psi: framed.output.clone(),
        psi_j: framed.output.clone(),
    };
    let moved = subst_deriv(algs, &framed, 0, 1 + j, &ev)?;
    frame_to(algs, &moved, &gamma.with(m))
}
