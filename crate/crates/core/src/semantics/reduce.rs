use serde::{Deserialize, Serialize};

use super::normal::{prenex, Recorder};
use super::{Channel, CongRule, Direction, Rewrite};
use crate::algebra::AlgebraSet;
use crate::ast::{Child, Process, Term};

/// One communication step `P →c Q`.
///
/// `rewrites` take `P` to `ν^prefix ((x?(a). R | x!y. S) | rest)` (or without
/// `rest` when `has_rest` is false); the communication then happens under the
/// `prefix` restrictions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub channel: Channel,
    pub rewrites: Vec<Rewrite>,
    pub prefix: usize,
    pub has_rest: bool,
    pub target: Process,
}

fn components(t: &Term) -> Vec<&Term> {
    match t {
        Term::End => Vec::new(),
        Term::Par(l, r) => {
            let mut out = vec![&**l];
            out.extend(components(r));
            out
        }
        other => vec![other],
    }
}

/// Swaps components `pos` and `pos + 1` of the spine at `base`.
fn swap(rec: &mut Recorder, base: &[Child], pos: usize, count: usize) {
    let mut path = base.to_vec();
    path.extend(std::iter::repeat_n(Child::ParRight, pos));
    if pos + 2 == count {
        rec.apply(CongRule::CompSym, Direction::Forward, &path);
    } else {
        rec.apply(CongRule::CompAssoc, Direction::Forward, &path);
        path.push(Child::ParLeft);
        rec.apply(CongRule::CompSym, Direction::Forward, &path);
        path.pop();
        rec.apply(CongRule::CompAssoc, Direction::Backward, &path);
    }
}

fn bubble(rec: &mut Recorder, base: &[Child], from: usize, to: usize, count: usize) {
    for pos in (to..from).rev() {
        swap(rec, base, pos, count);
    }
}

/// All communication steps of `p`, in a fixed order.
///
/// Top-level restrictions are first pulled outwards (scope extrusion) and
/// the composition flattened, so every input/output pair of top-level
/// components is found. A pair on a channel bound by one of those
/// restrictions is `Internal`; the restriction's multiplicity `y` then
/// becomes the leftover of `y` after one use, so the result stays typable.
pub fn reductions(algs: &AlgebraSet, p: &Process) -> Vec<Reduction> {
    let (pre_log, q) = prenex(p);
    let mut k = 0;
    let mut base = Vec::new();
    while let Some(Term::Res { .. }) = q.term().at(&base) {
        base.push(Child::ResBody);
        k += 1;
    }
    let spine = q.term().at(&base).expect("prefix path exists");
    let comps = components(spine);
    let m = comps.len();
    let mut out = Vec::new();
    for (a, ca) in comps.iter().enumerate() {
        let Term::Recv { chan: i, .. } = ca else {
            continue;
        };
        for (b, cb) in comps.iter().enumerate() {
            match cb {
                Term::Send { chan, .. } if chan == i && b != a => {}
                _ => continue,
            }
            let mut rec = Recorder::new(&q);
            rec.log = pre_log.clone();
            bubble(&mut rec, &base, a, 0, m);
            let b_now = if b < a { b + 1 } else { b };
            bubble(&mut rec, &base, b_now, 1, m);
            if m > 2 {
                rec.apply(CongRule::CompAssoc, Direction::Forward, &base);
            }
            out.push(communicate(algs, rec, &base, k, m > 2, *i));
        }
    }
    out
}

fn communicate(
    algs: &AlgebraSet,
    rec: Recorder,
    base: &[Child],
    k: usize,
    has_rest: bool,
    i: usize,
) -> Reduction {
    let mut term = rec.p.term().clone();
    let mut pair_path = base.to_vec();
    if has_rest {
        pair_path.push(Child::ParLeft);
    }
    let pair = term.at_mut(&pair_path).expect("redex path exists");
    let Term::Par(r, s) = pair else {
        unreachable!("redex is a composition")
    };
    let (
        Term::Recv { body: p, .. },
        Term::Send {
            payload: j,
            body: q,
            ..
        },
    ) = (&**r, &**s)
    else {
        unreachable!("redex is an input next to an output")
    };
    let substituted = p.subst(1 + j, 0);
    assert!(substituted.unused(0), "substitution leaves 0 unused");
    *pair = Term::par(substituted.lower(0), (**q).clone());

    let channel = if i < k {
        // The binder of the channel, counted from the outside.
        let level = k - 1 - i;
        let res_path = vec![Child::ResBody; level];
        if let Some(Term::Res { annot, .. }) = term.at_mut(&res_path) {
            let alg = algs.alg(annot.chan_alg);
            if let Some(y) = alg.split(annot.mult, alg.one()) {
                annot.mult = y;
            }
        }
        Channel::Internal
    } else {
        Channel::External(i - k)
    };
    Reduction {
        channel,
        rewrites: rec.log,
        prefix: k,
        has_rest,
        target: Process::new(rec.p.depth(), term).expect("communication preserves scope"),
    }
}

/// One line of a reduction trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub channel: Channel,
    pub process: Process,
}

impl TraceStep {
    pub fn line(&self, algs: &AlgebraSet) -> String {
        format!(
            "step {}: channel={} ; process={}",
            self.step,
            self.channel,
            self.process.display(algs)
        )
    }
}

/// Repeatedly takes the first available step, at most `max_steps` times.
pub fn run(algs: &AlgebraSet, p: &Process, max_steps: usize) -> Vec<TraceStep> {
    let mut trace = Vec::new();
    let mut cur = p.clone();
    while trace.len() < max_steps {
        let Some(r) = reductions(algs, &cur).into_iter().next() else {
            break;
        };
        cur = r.target;
        trace.push(TraceStep {
            step: trace.len() + 1,
            channel: r.channel,
            process: cur.clone(),
        });
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgId, Usage};
    use crate::ast::{Name, NuAnnot};
    use crate::semantics::apply_all;

    fn anon() -> Name {
        Name::anonymous()
    }

    fn proc(depth: usize, t: Term) -> Process {
        Process::new(depth, t).unwrap()
    }

    #[test]
    fn external_comm() {
        let algs = AlgebraSet::standard();
        let p = proc(
            2,
            Term::par(
                Term::recv(0, anon(), Term::End),
                Term::send(0, 1, Term::End),
            ),
        );
        let rs = reductions(&algs, &p);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].channel, Channel::External(0));
        assert_eq!(rs[0].target, proc(2, Term::par(Term::End, Term::End)));
    }

    #[test]
    fn nothing_to_do() {
        let algs = AlgebraSet::standard();
        assert!(reductions(&algs, &Process::end(0)).is_empty());
        // Prefixed pairs do not reduce.
        let p = proc(
            1,
            Term::send(
                0,
                0,
                Term::par(
                    Term::recv(0, anon(), Term::End),
                    Term::send(0, 0, Term::End),
                ),
            ),
        );
        assert!(reductions(&algs, &p).is_empty());
    }

    #[test]
    fn payload_is_substituted() {
        let algs = AlgebraSet::standard();
        // 0?(a). a!a. end | 0!1. end  at depth 2 → 1!1. end | end
        let p = proc(
            2,
            Term::par(
                Term::recv(0, anon(), Term::send(0, 0, Term::End)),
                Term::send(0, 1, Term::End),
            ),
        );
        let rs = reductions(&algs, &p);
        assert_eq!(
            rs[0].target,
            proc(2, Term::par(Term::send(1, 1, Term::End), Term::End))
        );
    }

    #[test]
    fn internal_comm_uses_one_of_the_multiplicity() {
        let algs = AlgebraSet::standard();
        let annot = NuAnnot {
            chan_alg: AlgId::GRA,
            mult: Usage(2),
            ..NuAnnot::placeholder()
        };
        // ν (send | recv | recv) with the channel's payload a free unit.
        let p = proc(
            1,
            Term::res(
                anon(),
                annot,
                Term::par(
                    Term::send(0, 1, Term::End),
                    Term::par(
                        Term::recv(0, anon(), Term::End),
                        Term::recv(0, anon(), Term::End),
                    ),
                ),
            ),
        );
        let rs = reductions(&algs, &p);
        assert_eq!(rs.len(), 2);
        for r in &rs {
            assert_eq!(r.channel, Channel::Internal);
            assert!(r.has_rest);
            let Term::Res { annot, .. } = r.target.term() else {
                panic!()
            };
            assert_eq!(annot.mult, Usage(1));
            let redex = apply_all(&r.rewrites, &p).unwrap();
            let Term::Res { body, .. } = redex.term() else {
                panic!()
            };
            assert!(matches!(&**body, Term::Par(l, _) if matches!(&**l, Term::Par(..))));
        }
    }

    #[test]
    fn external_tag_drops_prefix() {
        let algs = AlgebraSet::standard();
        // (ν end) | 0?(a). end | 0!0. end at depth 1: after extrusion the
        // channel is index 1 under one binder, tagged ext 0.
        let p = proc(
            1,
            Term::par(
                Term::res(anon(), NuAnnot::placeholder(), Term::End),
                Term::par(
                    Term::recv(0, anon(), Term::End),
                    Term::send(0, 0, Term::End),
                ),
            ),
        );
        let rs = reductions(&algs, &p);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].channel, Channel::External(0));
        assert_eq!(rs[0].prefix, 1);
    }

    #[test]
    fn run_stops() {
        let algs = AlgebraSet::standard();
        let p = proc(
            2,
            Term::par(
                Term::recv(0, anon(), Term::End),
                Term::send(0, 1, Term::End),
            ),
        );
        let t = run(&algs, &p, 10);
        assert_eq!(t.len(), 1);
        assert_eq!(
            t[0].line(&algs),
            "step 1: channel=ext 0 ; process=end | end"
        );
    }
}
