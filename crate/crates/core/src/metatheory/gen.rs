use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgId, AlgebraSet, Usage, UsagePair};
use crate::ast::{Name, NuAnnot, Process, Term};
use crate::checker::{check, TypeError};
use crate::context::{Ctx, Idxs, PreCtx, Scope, Type};

/// Relative weights of the three standard algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgMix {
    pub lin: u32,
    pub gra: u32,
    pub sha: u32,
}

impl Default for AlgMix {
    fn default() -> Self {
        AlgMix {
            lin: 1,
            gra: 1,
            sha: 1,
        }
    }
}

impl AlgMix {
    fn pick(&self, rng: &mut impl Rng) -> AlgId {
        let ids = [AlgId::LIN, AlgId::GRA, AlgId::SHA];
        match WeightedIndex::new([self.lin, self.gra, self.sha]) {
            Ok(w) => ids[w.sample(rng)],
            Err(_) => AlgId::LIN,
        }
    }
}

/// A process with contexts it checks under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub types: PreCtx,
    pub idxs: Idxs,
    pub usage: Ctx,
    pub process: Process,
}

struct Var {
    ty: Type,
    alg: AlgId,
    avail: UsagePair,
}

struct Gen<'a> {
    algs: &'a AlgebraSet,
    rng: ChaCha8Rng,
    mix: AlgMix,
    /// Oldest first; the last entry is index 0.
    vars: Vec<Var>,
    /// Levels of the unit variables, one per standard algebra.
    pool: [usize; 3],
    fresh: usize,
}

impl Gen<'_> {
    fn index(&self, level: usize) -> usize {
        self.vars.len() - 1 - level
    }

    fn hint(&mut self) -> Name {
        self.fresh += 1;
        Name::new(format!("v{}", self.fresh)).expect("generated names are valid")
    }

    fn usage(&mut self, alg: AlgId) -> Usage {
        match alg {
            AlgId::LIN => Usage(self.rng.gen_range(0..=1)),
            AlgId::GRA => Usage(self.rng.gen_range(0..4)),
            _ => Usage(0),
        }
    }

    fn pair(&mut self, alg: AlgId) -> UsagePair {
        UsagePair::new(self.usage(alg), self.usage(alg))
    }

    fn chan_type(&mut self, depth: usize) -> Type {
        let payload = if depth == 0 || self.rng.gen_bool(0.5) {
            Type::Unit
        } else {
            self.chan_type(depth - 1)
        };
        let alg = self.mix.pick(&mut self.rng);
        // Unit payloads are always sent at ℓ∅, so any unit variable will do.
        let x = if payload == Type::Unit {
            self.algs.empty(alg)
        } else {
            self.pair(alg)
        };
        Type::chan(payload, alg, x)
    }

    fn push(&mut self, ty: Type, alg: AlgId, avail: UsagePair) -> usize {
        self.vars.push(Var { ty, alg, avail });
        self.vars.len() - 1
    }

    fn take(&mut self, level: usize, x: UsagePair) -> bool {
        let v = &self.vars[level];
        match self.algs.split_pair(v.alg, v.avail, x) {
            Some(left) => {
                self.vars[level].avail = left;
                true
            }
            None => false,
        }
    }

    fn can_take(&self, level: usize, x: UsagePair) -> bool {
        let v = &self.vars[level];
        self.algs.split_pair(v.alg, v.avail, x).is_some()
    }

    fn channels(&self, receive: bool) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|&l| {
                let v = &self.vars[l];
                let want = if receive {
                    self.algs.input_only(v.alg)
                } else {
                    self.algs.output_only(v.alg)
                };
                v.ty.as_chan().is_some() && self.can_take(l, want)
            })
            .collect()
    }

    fn term(&mut self, budget: usize) -> Term {
        if budget == 0 {
            return Term::End;
        }
        let rest = budget - 1;
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let l = self.rng.gen_range(0..=rest);
                let left = self.term(l);
                let right = self.term(rest - l);
                Term::par(left, right)
            }
            4..=5 => {
                let ty = self.chan_type(2);
                let alg = self.mix.pick(&mut self.rng);
                let y = self.usage(alg);
                let annot = NuAnnot::new(&ty, alg, y).expect("channel type");
                let hint = self.hint();
                let level = self.push(ty, alg, UsagePair::balanced(y));
                let body = self.term(rest);
                let closers = self.close(level);
                self.vars.pop();
                Term::res(hint, annot, par_all(body, closers))
            }
            6..=7 => {
                let cands = self.channels(true);
                if cands.is_empty() {
                    return Term::End;
                }
                let c = cands[self.rng.gen_range(0..cands.len())];
                self.recv(c, |g| g.term(rest))
            }
            _ => {
                let cands = self.channels(false);
                if cands.is_empty() {
                    return Term::End;
                }
                let c = cands[self.rng.gen_range(0..cands.len())];
                self.send(c, |g| g.term(rest))
            }
        }
    }

    /// `c?(a). body`, closing `a` after `body`.
    fn recv(&mut self, c: usize, body: impl FnOnce(&mut Self) -> Term) -> Term {
        let alg = self.vars[c].alg;
        assert!(self.take(c, self.algs.input_only(alg)));
        let chan = self.index(c);
        let (t, palg, x) = {
            let (t, a, x) = self.vars[c].ty.as_chan().expect("channel");
            (t.clone(), a, x)
        };
        let hint = self.hint();
        let level = self.push(t, palg, x);
        let b = body(self);
        let closers = self.close(level);
        self.vars.pop();
        Term::recv(chan, hint, par_all(b, closers))
    }

    /// `c!m. body` for some payload `m`, restricting a fresh one if needed.
    fn send(&mut self, c: usize, body: impl FnOnce(&mut Self) -> Term) -> Term {
        let alg = self.vars[c].alg;
        assert!(self.take(c, self.algs.output_only(alg)));
        let (t, palg, x) = {
            let (t, a, x) = self.vars[c].ty.as_chan().expect("channel");
            (t.clone(), a, x)
        };
        let existing: Vec<usize> = (0..self.vars.len())
            .filter(|&l| self.vars[l].ty == t && self.vars[l].alg == palg && self.can_take(l, x))
            .collect();
        let reuse = !existing.is_empty() && (t == Type::Unit || self.rng.gen_bool(0.5));
        if reuse {
            let m = existing[self.rng.gen_range(0..existing.len())];
            assert!(self.take(m, x));
            let (ci, mi) = (self.index(c), self.index(m));
            return Term::send(ci, mi, body(self));
        }
        if t == Type::Unit {
            let m = self.pool[palg.0 as usize];
            let (ci, mi) = (self.index(c), self.index(m));
            return Term::send(ci, mi, body(self));
        }
        let y = self.least_mult(palg, x);
        let annot = NuAnnot::new(&t, palg, y).expect("channel type");
        let hint = self.hint();
        let q = self.push(t, palg, UsagePair::balanced(y));
        assert!(self.take(q, x));
        let ci = self.index(c);
        let b = body(self);
        let closers = self.close(q);
        self.vars.pop();
        Term::res(hint, annot, par_all(Term::send(ci, 0, b), closers))
    }

    fn least_mult(&self, alg: AlgId, x: UsagePair) -> Usage {
        self.algs
            .alg(alg)
            .carrier()
            .values()
            .iter()
            .copied()
            .find(|&y| {
                self.algs
                    .split_pair(alg, UsagePair::balanced(y), x)
                    .is_some()
            })
            .expect("some multiplicity covers a sampled usage")
    }

    /// Components that use up what is left of the variable at `level`.
    fn close(&mut self, level: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if self.vars[level].ty.as_chan().is_none() {
            return out;
        }
        let alg = self.vars[level].alg;
        let zero = self.algs.alg(alg).zero();
        loop {
            let avail = self.vars[level].avail;
            if avail.input != zero {
                out.push(self.recv(level, |_| Term::End));
            } else if avail.output != zero {
                out.push(self.send(level, |_| Term::End));
            } else {
                return out;
            }
        }
    }
}

fn par_all(first: Term, rest: Vec<Term>) -> Term {
    let mut all: Vec<Term> = std::iter::once(first)
        .filter(|t| *t != Term::End)
        .chain(rest)
        .collect();
    let Some(mut acc) = all.pop() else {
        return Term::End;
    };
    while let Some(t) = all.pop() {
        acc = Term::par(t, acc);
    }
    acc
}

/// Samples a well-typed process of roughly `budget` nodes, checked before it
/// is returned.
pub fn try_gen_well_typed(
    algs: &AlgebraSet,
    seed: u64,
    budget: usize,
    mix: AlgMix,
) -> Result<Generated, TypeError> {
    let mut g = Gen {
        algs,
        rng: ChaCha8Rng::seed_from_u64(seed),
        mix,
        vars: Vec::new(),
        pool: [0, 1, 2],
        fresh: 0,
    };
    for alg in [AlgId::LIN, AlgId::GRA, AlgId::SHA] {
        g.push(Type::Unit, alg, algs.empty(alg));
    }
    for _ in 0..g.rng.gen_range(0..=2) {
        let ty = g.chan_type(2);
        let alg = g.mix.pick(&mut g.rng);
        let x = g.pair(alg);
        g.push(ty, alg, x);
    }
    let types = Scope::from_oldest(g.vars.iter().map(|v| v.ty.clone()).collect());
    let idxs = Scope::from_oldest(g.vars.iter().map(|v| v.alg).collect());
    let usage = Scope::from_oldest(g.vars.iter().map(|v| v.avail).collect());
    let depth = g.vars.len();
    let term = g.term(budget);
    let process = Process::new(depth, term).expect("generated processes are well scoped");
    check(algs, &types, &idxs, &usage, &process)?;
    Ok(Generated {
        types,
        idxs,
        usage,
        process,
    })
}

/// Like [`try_gen_well_typed`] over the standard algebras, falling back to
/// `end` should the sample not check.
pub fn gen_well_typed(seed: u64, budget: usize, mix: AlgMix) -> Generated {
    let algs = AlgebraSet::standard();
    try_gen_well_typed(&algs, seed, budget, mix).unwrap_or_else(|_| {
        let fallback = try_gen_well_typed(&algs, seed, 0, mix).expect("end always checks");
        Generated {
            process: Process::end(fallback.types.len()),
            ..fallback
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: usize,
    pub seed: u64,
    pub budget: usize,
    pub process: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub samples: usize,
    pub failure: Option<Counterexample>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed={} samples={}", self.seed, self.samples)?;
        match &self.failure {
            None => write!(f, " ok"),
            Some(c) => write!(
                f,
                " FAILED at sample {} (seed {}, budget {}): {}\n  {}",
                c.sample, c.seed, c.budget, c.message, c.process
            ),
        }
    }
}

/// Runs `prop` on `samples` generated processes. A failure is shrunk to the
/// smallest budget that still fails for the same sample seed.
pub fn run_property(
    seed: u64,
    samples: usize,
    budget: usize,
    mix: AlgMix,
    prop: impl Fn(&AlgebraSet, &Generated) -> Result<(), String>,
) -> PropertyReport {
    let algs = AlgebraSet::standard();
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let attempt = |s: u64, b: usize| -> Result<(), Box<(Generated, String)>> {
        let g = gen_well_typed(s, b, mix);
        prop(&algs, &g).map_err(|m| Box::new((g, m)))
    };
    for sample in 0..samples {
        let s = seeds.next_u64();
        if attempt(s, budget).is_ok() {
            continue;
        }
        let (b, (g, message)) = (0..=budget)
            .find_map(|b| attempt(s, b).err().map(|e| (b, *e)))
            .expect("the full budget fails");
        return PropertyReport {
            seed,
            samples: sample + 1,
            failure: Some(Counterexample {
                sample,
                seed: s,
                budget: b,
                process: g.process.display(&algs).to_string(),
                message,
            }),
        };
    }
    PropertyReport {
        seed,
        samples,
        failure: None,
    }
}
