//! Typing contexts, index contexts, usage contexts and variable references.
//!
//! All three context lists are addressed by de Bruijn index: index 0 is the
//! most recently bound variable. Storage and printing follow the written
//! convention instead, oldest binding first.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgId, AlgebraSet, UsagePair};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Type {
    Unit,
    /// A channel carrying values of type `payload`, each transmitted with
    /// usage `usage` drawn from algebra `alg`.
    Chan {
        payload: Box<Type>,
        alg: AlgId,
        usage: UsagePair,
    },
}

impl Type {
    pub fn chan(payload: Type, alg: AlgId, usage: UsagePair) -> Type {
        Type::Chan {
            payload: Box::new(payload),
            alg,
            usage,
        }
    }

    /// Payload type, algebra and usage of a channel type.
    pub fn as_chan(&self) -> Option<(&Type, AlgId, UsagePair)> {
        match self {
            Type::Chan {
                payload,
                alg,
                usage,
            } => Some((payload, *alg, *usage)),
            Type::Unit => None,
        }
    }

    /// Every usage pair belongs to the algebra it is tagged with.
    pub fn is_valid(&self, algs: &AlgebraSet) -> bool {
        match self {
            Type::Unit => true,
            Type::Chan {
                payload,
                alg,
                usage,
            } => algs
                .get(*alg)
                .is_some_and(|a| usage.belongs_to(a) && payload.is_valid(algs)),
        }
    }

    pub fn display<'a>(&'a self, algs: &'a AlgebraSet) -> TypeDisplay<'a> {
        TypeDisplay { ty: self, algs }
    }
}

/// Structural equality, including algebra ids and usage pairs.
pub fn type_equal(a: &Type, b: &Type) -> bool {
    a == b
}

pub struct TypeDisplay<'a> {
    ty: &'a Type,
    algs: &'a AlgebraSet,
}

impl fmt::Display for TypeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ty {
            Type::Unit => f.write_str("unit"),
            Type::Chan {
                payload,
                alg,
                usage,
            } => write!(
                f,
                "chan<{}>[{}]",
                payload.display(self.algs),
                self.algs.fmt_pair(*alg, *usage)
            ),
        }
    }
}

/// A list addressed by de Bruijn index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scope<T>(Vec<T>);

pub type PreCtx = Scope<Type>;
pub type Idxs = Scope<AlgId>;
pub type Ctx = Scope<UsagePair>;

impl<T> Default for Scope<T> {
    fn default() -> Self {
        Scope(Vec::new())
    }
}

/// Indexed like [`Scope::get`]: `0` is the innermost entry. Panics when out
/// of range.
impl<T> std::ops::Index<usize> for Scope<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        self.get(i).unwrap_or_else(|| {
            panic!(
                "index {i} out of range for a scope of length {}",
                self.len()
            )
        })
    }
}

impl<T> Scope<T> {
    pub fn new() -> Self {
        Scope(Vec::new())
    }

    /// Builds a scope from entries listed oldest first.
    pub fn from_oldest(items: Vec<T>) -> Self {
        Scope(items)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn pos(&self, i: usize) -> Option<usize> {
        (i < self.0.len()).then(|| self.0.len() - 1 - i)
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.pos(i).map(|p| &self.0[p])
    }

    pub fn oldest_first(&self) -> &[T] {
        &self.0
    }

    /// Iterates from index 0 outwards.
    pub fn iter_by_index(&self) -> impl Iterator<Item = &T> {
        self.0.iter().rev()
    }

    /// Binds `x` at index 0.
    pub fn push(&mut self, x: T) {
        self.0.push(x);
    }

    /// Copy with `x` bound at index 0.
    pub fn with(&self, x: T) -> Self
    where
        T: Clone,
    {
        let mut s = self.clone();
        s.push(x);
        s
    }

    pub fn head(&self) -> Option<&T> {
        self.0.last()
    }

    /// Splits off index 0, returning the remaining scope and the entry.
    pub fn uncons(&self) -> Option<(Self, &T)>
    where
        T: Clone,
    {
        let (last, rest) = self.0.split_last()?;
        Some((Scope(rest.to_vec()), last))
    }

    pub fn set(&mut self, i: usize, x: T) -> Result<(), ContextError> {
        let len = self.len();
        let p = self
            .pos(i)
            .ok_or(ContextError::IndexOutOfRange { index: i, len })?;
        self.0[p] = x;
        Ok(())
    }

    /// Inserts `x` so that it becomes index `i`; entries at `i` and above
    /// move up by one. `i` may equal the length.
    pub fn insert(&mut self, i: usize, x: T) -> Result<(), ContextError> {
        let len = self.len();
        if i > len {
            return Err(ContextError::IndexOutOfRange { index: i, len });
        }
        self.0.insert(len - i, x);
        Ok(())
    }

    pub fn remove(&mut self, i: usize) -> Result<T, ContextError> {
        let len = self.len();
        let p = self
            .pos(i)
            .ok_or(ContextError::IndexOutOfRange { index: i, len })?;
        Ok(self.0.remove(p))
    }

    /// Swaps indices `i` and `i + 1`.
    pub fn exchange(&mut self, i: usize) -> Result<(), ContextError> {
        let len = self.len();
        if i + 1 >= len {
            return Err(ContextError::IndexOutOfRange { index: i + 1, len });
        }
        let p = len - 1 - i;
        self.0.swap(p, p - 1);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("index {index} is out of range for a context of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cannot take {want:?} from {have:?} at index {index}")]
    SplitUndefined {
        index: usize,
        have: UsagePair,
        want: UsagePair,
    },
    #[error("usage at index {index} belongs to {expected:?}, not {found:?}")]
    AlgebraMismatch {
        index: usize,
        expected: AlgId,
        found: AlgId,
    },
    #[error("contexts disagree in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Pointwise split of usage contexts over the same `idxs`.
pub fn split_ctx(
    algs: &AlgebraSet,
    idxs: &Idxs,
    whole: &Ctx,
    part: &Ctx,
) -> Result<Ctx, ContextError> {
    zip_ctx(idxs, whole, part, |i, alg, x, y| {
        algs.split_pair(alg, x, y)
            .ok_or(ContextError::SplitUndefined {
                index: i,
                have: x,
                want: y,
            })
    })
}

/// Pointwise composition, the inverse of [`split_ctx`]: `x ·= y ⊹ z` at every index.
pub fn compose_ctx(
    algs: &AlgebraSet,
    idxs: &Idxs,
    left: &Ctx,
    right: &Ctx,
) -> Result<Ctx, ContextError> {
    zip_ctx(idxs, left, right, |i, alg, y, z| {
        algs.compose_pair(alg, y, z)
            .ok_or(ContextError::SplitUndefined {
                index: i,
                have: y,
                want: z,
            })
    })
}

fn zip_ctx(
    idxs: &Idxs,
    a: &Ctx,
    b: &Ctx,
    mut f: impl FnMut(usize, AlgId, UsagePair, UsagePair) -> Result<UsagePair, ContextError>,
) -> Result<Ctx, ContextError> {
    if a.len() != b.len() || a.len() != idxs.len() {
        return Err(ContextError::LengthMismatch(a.len(), b.len()));
    }
    // Walk from index 0 so the first failure reported is the innermost.
    let mut out = Vec::with_capacity(a.len());
    for (i, ((alg, x), y)) in idxs
        .iter_by_index()
        .zip(a.iter_by_index())
        .zip(b.iter_by_index())
        .enumerate()
    {
        out.push(f(i, *alg, *x, *y)?);
    }
    out.reverse();
    Ok(Scope(out))
}

/// The all-`ℓ∅` usage context over `idxs`.
pub fn empty_ctx(algs: &AlgebraSet, idxs: &Idxs) -> Ctx {
    Scope(idxs.0.iter().map(|&a| algs.empty(a)).collect())
}

/// Subtracts `demanded` at index `i`, returning the type housed there and the
/// leftover context. Other positions are untouched.
pub fn consume_var(
    algs: &AlgebraSet,
    types: &PreCtx,
    idxs: &Idxs,
    usage: &Ctx,
    i: usize,
    demanded: UsagePair,
    demanded_alg: AlgId,
) -> Result<(Type, Ctx), ContextError> {
    if types.len() != usage.len() || idxs.len() != usage.len() {
        return Err(ContextError::LengthMismatch(types.len(), usage.len()));
    }
    let len = usage.len();
    let out_of_range = ContextError::IndexOutOfRange { index: i, len };
    let ty = types.get(i).ok_or(out_of_range.clone())?;
    let alg = *idxs.get(i).ok_or(out_of_range.clone())?;
    if alg != demanded_alg {
        return Err(ContextError::AlgebraMismatch {
            index: i,
            expected: alg,
            found: demanded_alg,
        });
    }
    let have = *usage.get(i).ok_or(out_of_range)?;
    let left = algs
        .split_pair(alg, have, demanded)
        .ok_or(ContextError::SplitUndefined {
            index: i,
            have,
            want: demanded,
        })?;
    let mut out = usage.clone();
    out.set(i, left)?;
    Ok((ty.clone(), out))
}

/// A checked variable reference `γ ; Γ ∋ᵢ t ; y ▷ Δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarRef {
    pub index: usize,
    pub ty: Type,
    pub alg: AlgId,
    pub demanded: UsagePair,
    pub input: Ctx,
    pub output: Ctx,
}

impl VarRef {
    pub fn derive(
        algs: &AlgebraSet,
        types: &PreCtx,
        idxs: &Idxs,
        input: &Ctx,
        index: usize,
        demanded: UsagePair,
        alg: AlgId,
    ) -> Result<VarRef, ContextError> {
        let (ty, output) = consume_var(algs, types, idxs, input, index, demanded, alg)?;
        Ok(VarRef {
            index,
            ty,
            alg,
            demanded,
            input: input.clone(),
            output,
        })
    }

    /// Re-derives the reference from its stored input and compares.
    pub fn is_valid(&self, algs: &AlgebraSet, types: &PreCtx, idxs: &Idxs) -> bool {
        VarRef::derive(
            algs,
            types,
            idxs,
            &self.input,
            self.index,
            self.demanded,
            self.alg,
        )
        .is_ok_and(|r| &r == self)
    }
}

/// The three parallel context lists that type a process.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contexts {
    pub types: PreCtx,
    pub idxs: Idxs,
    pub usage: Ctx,
}

impl Contexts {
    pub fn new(types: PreCtx, idxs: Idxs, usage: Ctx) -> Result<Self, ContextError> {
        if types.len() != idxs.len() || idxs.len() != usage.len() {
            return Err(ContextError::LengthMismatch(types.len(), usage.len()));
        }
        Ok(Contexts { types, idxs, usage })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

pub fn ctx_insert(
    i: usize,
    ty: Type,
    alg: AlgId,
    x: UsagePair,
    c: &Contexts,
) -> Result<Contexts, ContextError> {
    let mut out = c.clone();
    out.types.insert(i, ty)?;
    out.idxs.insert(i, alg)?;
    out.usage.insert(i, x)?;
    Ok(out)
}

pub fn ctx_delete(i: usize, c: &Contexts) -> Result<Contexts, ContextError> {
    let mut out = c.clone();
    out.types.remove(i)?;
    out.idxs.remove(i)?;
    out.usage.remove(i)?;
    Ok(out)
}

pub fn ctx_exchange(i: usize, c: &Contexts) -> Result<Contexts, ContextError> {
    let mut out = c.clone();
    out.types.exchange(i)?;
    out.idxs.exchange(i)?;
    out.usage.exchange(i)?;
    Ok(out)
}

/// Renders a usage context oldest first, e.g. `[gra (1,0), lin (0,0)]`.
pub fn fmt_ctx(algs: &AlgebraSet, idxs: &Idxs, usage: &Ctx) -> String {
    let items: Vec<String> = idxs
        .oldest_first()
        .iter()
        .zip(usage.oldest_first())
        .map(|(&a, &x)| algs.fmt_pair(a, x))
        .collect();
    format!("[{}]", items.join(", "))
}
