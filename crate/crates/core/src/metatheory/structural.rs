use super::{checked, MetaError};
use crate::algebra::{AlgId, AlgebraSet, UsagePair};
use crate::checker::{Derivation, Rule};
use crate::context::{Scope, Type, VarRef};

#[derive(Clone, Copy)]
enum Kind {
    Insert,
    Delete,
    Exchange,
}

struct Edit {
    kind: Kind,
    at: usize,
    entry: Option<(Type, AlgId, UsagePair)>,
}

impl Edit {
    fn scope<T: Clone>(&self, s: &Scope<T>, pos: usize, item: impl FnOnce() -> T) -> Scope<T> {
        let mut s = s.clone();
        match self.kind {
            Kind::Insert => s.insert(pos, item()),
            Kind::Delete => s.remove(pos).map(drop),
            Kind::Exchange => s.exchange(pos),
        }
        .expect("edit position checked up front");
        s
    }

    fn var(&self, v: usize, pos: usize) -> usize {
        match self.kind {
            Kind::Insert if v >= pos => v + 1,
            Kind::Delete if v > pos => v - 1,
            Kind::Exchange if v == pos => v + 1,
            Kind::Exchange if v == pos + 1 => v - 1,
            _ => v,
        }
    }

    fn entry(&self) -> &(Type, AlgId, UsagePair) {
        self.entry.as_ref().expect("insert carries its entry")
    }

    fn var_ref(&self, r: &VarRef, pos: usize) -> VarRef {
        VarRef {
            index: self.var(r.index, pos),
            ty: r.ty.clone(),
            alg: r.alg,
            demanded: r.demanded,
            input: self.scope(&r.input, pos, || self.entry().2),
            output: self.scope(&r.output, pos, || self.entry().2),
        }
    }

    fn apply(&self, d: &Derivation, c: usize) -> Result<Derivation, MetaError> {
        let pos = self.at + c;
        if let Kind::Delete = self.kind {
            // An unused variable keeps its usage.
            if d.input.get(pos) != d.output.get(pos) {
                return Err(MetaError::UsedVariable(self.at));
            }
        }
        let body = |b: &Derivation| self.apply(b, c + 1).map(Box::new);
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
                chan: self.var_ref(chan, pos),
                hint: hint.clone(),
                body: body(b)?,
            },
            Rule::Send {
                chan,
                payload,
                body: b,
            } => Rule::Send {
                chan: self.var_ref(chan, pos),
                payload: self.var_ref(payload, pos),
                body: Box::new(self.apply(b, c)?),
            },
            Rule::Par { left, right } => Rule::Par {
                left: Box::new(self.apply(left, c)?),
                right: Box::new(self.apply(right, c)?),
            },
        };
        Ok(Derivation {
            types: self.scope(&d.types, pos, || self.entry().0.clone()),
            idxs: self.scope(&d.idxs, pos, || self.entry().1),
            input: self.scope(&d.input, pos, || self.entry().2),
            output: self.scope(&d.output, pos, || self.entry().2),
            rule,
        })
    }
}

fn in_range(index: usize, bound: usize, depth: usize) -> Result<(), MetaError> {
    if index < bound {
        Ok(())
    } else {
        Err(MetaError::OutOfRange { index, depth })
    }
}

/// Adds a variable of type `ty` and usage `x` at `i`, which the process does
/// not touch.
pub fn weaken(
    algs: &AlgebraSet,
    d: &Derivation,
    i: usize,
    ty: &Type,
    alg: AlgId,
    x: UsagePair,
) -> Result<Derivation, MetaError> {
    in_range(i, d.depth() + 1, d.depth())?;
    let valid = ty.is_valid(algs) && algs.get(alg).is_some_and(|a| x.belongs_to(a));
    if !valid {
        return Err(MetaError::InvalidEntry);
    }
    let edit = Edit {
        kind: Kind::Insert,
        at: i,
        entry: Some((ty.clone(), alg, x)),
    };
    checked(algs, edit.apply(d, 0)?)
}

/// Removes the variable `i`, which the process must not use.
pub fn strengthen(algs: &AlgebraSet, d: &Derivation, i: usize) -> Result<Derivation, MetaError> {
    in_range(i, d.depth(), d.depth())?;
    if !d.term().unused(i) {
        return Err(MetaError::UsedVariable(i));
    }
    let edit = Edit {
        kind: Kind::Delete,
        at: i,
        entry: None,
    };
    checked(algs, edit.apply(d, 0)?)
}

/// Swaps the variables `i` and `i + 1`.
pub fn exchange_deriv(
    algs: &AlgebraSet,
    d: &Derivation,
    i: usize,
) -> Result<Derivation, MetaError> {
    in_range(i + 1, d.depth(), d.depth())?;
    let edit = Edit {
        kind: Kind::Exchange,
        at: i,
        entry: None,
    };
    checked(algs, edit.apply(d, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Usage;
    use crate::ast::{exchange, lift, lower, Name, Process, Term};
    use crate::checker::check;

    fn pair(i: u32, o: u32) -> UsagePair {
        UsagePair::new(Usage(i), Usage(o))
    }

    fn lin_chan() -> Type {
        Type::chan(Type::Unit, AlgId::LIN, pair(0, 0))
    }

    // [unit@lin ∅, chan@lin ℓo] ⊢ 0!1. end
    fn send_deriv(algs: &AlgebraSet) -> Derivation {
        let p = Process::new(2, Term::send(0, 1, Term::End)).unwrap();
        check(
            algs,
            &Scope::from_oldest(vec![Type::Unit, lin_chan()]),
            &Scope::from_oldest(vec![AlgId::LIN, AlgId::LIN]),
            &Scope::from_oldest(vec![pair(0, 0), pair(0, 1)]),
            &p,
        )
        .unwrap()
    }

    fn recv_deriv(algs: &AlgebraSet) -> Derivation {
        // 1?(a). end over [lin ℓi, gra (3,3)]
        let p = Process::new(2, Term::recv(1, Name::anonymous(), Term::End)).unwrap();
        check(
            algs,
            &Scope::from_oldest(vec![lin_chan(), Type::Unit]),
            &Scope::from_oldest(vec![AlgId::LIN, AlgId::GRA]),
            &Scope::from_oldest(vec![pair(1, 0), pair(3, 3)]),
            &p,
        )
        .unwrap()
    }

    #[test]
    fn weaken_end() {
        let algs = AlgebraSet::standard();
        let d = check(
            &algs,
            &Scope::new(),
            &Scope::new(),
            &Scope::new(),
            &Process::end(0),
        )
        .unwrap();
        let w = weaken(&algs, &d, 0, &Type::Unit, AlgId::GRA, pair(2, 1)).unwrap();
        assert_eq!(w.rule, Rule::End);
        assert_eq!(w.input, Scope::from_oldest(vec![pair(2, 1)]));
        assert_eq!(w.output, w.input);
        let back = strengthen(&algs, &w, 0).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn weaken_shifts_and_rechecks() {
        let algs = AlgebraSet::standard();
        let d = send_deriv(&algs);
        for i in 0..=2 {
            let w = weaken(&algs, &d, i, &Type::Unit, AlgId::LIN, pair(0, 0)).unwrap();
            assert_eq!(w.subject(), lift(i, &d.subject()).unwrap());
            // Oracle: check the lifted process from scratch.
            let mut types = d.types.clone();
            types.insert(i, Type::Unit).unwrap();
            let mut idxs = d.idxs.clone();
            idxs.insert(i, AlgId::LIN).unwrap();
            let mut input = d.input.clone();
            input.insert(i, pair(0, 0)).unwrap();
            let fresh = check(&algs, &types, &idxs, &input, &w.subject()).unwrap();
            assert_eq!(w, fresh);
            assert_eq!(strengthen(&algs, &w, i).unwrap(), d);
        }
        let w = weaken(
            &algs,
            &recv_deriv(&algs),
            1,
            &lin_chan(),
            AlgId::SHA,
            pair(0, 0),
        )
        .unwrap();
        assert_eq!(strengthen(&algs, &w, 1).unwrap(), recv_deriv(&algs));
    }

    #[test]
    fn weaken_rejects_bad_entries() {
        let algs = AlgebraSet::standard();
        let d = send_deriv(&algs);
        assert_eq!(
            weaken(&algs, &d, 0, &Type::Unit, AlgId::LIN, pair(2, 0)),
            Err(MetaError::InvalidEntry)
        );
        assert!(matches!(
            weaken(&algs, &d, 3, &Type::Unit, AlgId::LIN, pair(0, 0)),
            Err(MetaError::OutOfRange { .. })
        ));
    }

    #[test]
    fn strengthen_used() {
        let algs = AlgebraSet::standard();
        let d = send_deriv(&algs);
        assert_eq!(strengthen(&algs, &d, 0), Err(MetaError::UsedVariable(0)));
        let e = check(
            &algs,
            &Scope::from_oldest(vec![Type::Unit]),
            &Scope::from_oldest(vec![AlgId::GRA]),
            &Scope::from_oldest(vec![pair(1, 1)]),
            &Process::end(1),
        )
        .unwrap();
        let s = strengthen(&algs, &e, 0).unwrap();
        assert_eq!(s.depth(), 0);
        assert_eq!(s.subject(), lower(0, &e.subject()).unwrap());
    }

    #[test]
    fn exchange_swaps_references() {
        let algs = AlgebraSet::standard();
        let d = send_deriv(&algs);
        let x = exchange_deriv(&algs, &d, 0).unwrap();
        assert_eq!(x.subject(), exchange(0, &d.subject()).unwrap());
        let Rule::Send { chan, payload, .. } = &x.rule else {
            panic!()
        };
        assert_eq!((chan.index, payload.index), (1, 0));
        assert_eq!(exchange_deriv(&algs, &x, 0).unwrap(), d);
        let r = recv_deriv(&algs);
        assert_eq!(
            exchange_deriv(&algs, &exchange_deriv(&algs, &r, 0).unwrap(), 0).unwrap(),
            r
        );
        assert!(exchange_deriv(&algs, &d, 1).is_err());
    }
}
