//! One pass/fail line per acceptance criterion.

use std::cell::Cell;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use leftpi::algebra::{
    check_law, check_laws, AlgId, AlgebraSet, Graded, Law, Linear, Shared, Usage, UsagePair,
};
use leftpi::ast::{alpha_eq, barendregt, to_raw, Child, Name, NuAnnot, Process, Raw, Term};
use leftpi::checker::{check, recheck, Derivation};
use leftpi::context::{compose_ctx, consume_var, empty_ctx, Scope, Type};
use leftpi::metatheory::{
    derive_capability, exchange_deriv, frame, gen_well_typed, run_property, strengthen,
    subject_reduction, subst_deriv, weaken, AlgMix, Generated, PropertyReport, SplitEvidence,
    SubstEvidence,
};
use leftpi::semantics::{garbage_collect, reductions, Channel, CongRule};
use leftpi_cli::{load, reduce};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const COURIER: &str = include_str!("../../../programs/courier.pi");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pair(i: u32, o: u32) -> UsagePair {
    UsagePair::new(Usage(i), Usage(o))
}

fn n(s: &str) -> Name {
    Name::new(s).unwrap()
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {t:?}, limit {limit:?}"));
    }
    Ok(())
}

fn report(r: PropertyReport) -> Result<(), String> {
    if r.passed() {
        Ok(())
    } else {
        Err(r.to_string())
    }
}

/// `input[k] = used · output[k]` at every entry.
fn consumes(algs: &AlgebraSet, d: &Derivation, used: &[UsagePair]) -> Result<(), String> {
    let len = d.depth();
    for k in 0..len {
        let alg = d.idxs[k];
        let expected = algs.compose_pair(alg, d.output[k], used[len - 1 - k]);
        if expected != Some(d.input[k]) {
            return Err(format!(
                "entry {k}: {} => {}, expected to use {}",
                algs.fmt_pair(alg, d.input[k]),
                algs.fmt_pair(alg, d.output[k]),
                algs.fmt_pair(alg, used[len - 1 - k])
            ));
        }
    }
    Ok(())
}

fn courier_typing() -> Outcome {
    let start = Instant::now();
    let algs = AlgebraSet::standard();
    let l = load(&algs, COURIER).map_err(|e| e.to_string())?;
    let d = &l.derivation;
    if !(d.input.is_empty() && d.output.is_empty()) {
        return Err("root contexts are not empty".into());
    }
    use Child::*;
    let at = |path: &[Child]| d.at(path).ok_or("missing node".to_string());
    let z = [ResBody, ParRight, ResBody, ParRight, ResBody];
    // Contexts oldest first: x, y, z.
    let sends_x = at(&[ResBody, ParLeft])?;
    consumes(&algs, sends_x, &[pair(0, 1)])?;
    if sends_x.input[0] != pair(1, 1) {
        return Err("x does not start at gra (1,1)".into());
    }
    let sends_y = at(&[ResBody, ParRight, ResBody, ParLeft])?;
    consumes(&algs, sends_y, &[pair(0, 0), pair(0, 1)])?;
    let recv = at(&[&z[..], &[ParLeft]].concat())?;
    consumes(&algs, recv, &[pair(0, 0), pair(0, 0), pair(2, 0)])?;
    if recv.input[0] != pair(2, 2) || recv.output[0] != pair(0, 2) {
        return Err("receiver does not take 2 inputs from gra (2,2)".into());
    }
    let carry = at(&[&z[..], &[ParRight]].concat())?;
    consumes(&algs, carry, &[pair(1, 0), pair(1, 0), pair(0, 2)])?;
    if carry.output.iter_by_index().any(|&x| x != pair(0, 0)) {
        return Err("courier leaves usage behind".into());
    }
    within(start, Duration::from_secs(1), "typing")?;
    Ok("[] ⊢ system ▷ [] with the four sub-derivations' contexts".into())
}

fn variable_reference() -> Outcome {
    let algs = AlgebraSet::standard();
    let li = algs.input_only(AlgId::LIN);
    let chan = Type::chan(Type::Unit, AlgId::LIN, li);
    let types = Scope::from_oldest(vec![chan.clone(), Type::Unit]);
    let idxs = Scope::from_oldest(vec![AlgId::LIN, AlgId::LIN]);
    let both = algs.both(AlgId::LIN);
    let usage = Scope::from_oldest(vec![both, both]);
    let (ty, left) =
        consume_var(&algs, &types, &idxs, &usage, 1, li, AlgId::LIN).map_err(|e| e.to_string())?;
    let expected = Scope::from_oldest(vec![algs.output_only(AlgId::LIN), both]);
    if ty != chan || left != expected {
        return Err(format!("got {ty:?} and {left:?}"));
    }
    Ok("leftover [ℓo, ℓ#] with type chan<unit>[lin ℓi]".into())
}

fn algebra_laws() -> Outcome {
    let start = Instant::now();
    check_laws(&Linear).map_err(|v| format!("lin: {v}"))?;
    check_laws(&Shared).map_err(|v| format!("sha: {v}"))?;
    let domain: Vec<Usage> = (0..32).map(Usage).collect();
    let gra = Graded::default();
    for law in Law::ALL {
        check_law(&gra, law, &domain).map_err(|v| format!("gra: {v}"))?;
    }
    within(start, Duration::from_secs(10), "law checks")?;
    Ok("seven laws for lin, sha and gra over 0..32".into())
}

fn conversion_example() -> Result<(), String> {
    let nu = NuAnnot::placeholder;
    let p = Raw::res(
        n("x"),
        nu(),
        Raw::par(
            Raw::recv(n("x"), n("x"), Raw::send(n("x"), n("z"), Raw::End)),
            Raw::res(
                n("y"),
                nu(),
                Raw::send(n("x"), n("y"), Raw::recv(n("y"), n("y"), Raw::End)),
            ),
        ),
    );
    let q = Process::new(
        1,
        Term::res(
            n("x"),
            nu(),
            Term::par(
                Term::recv(0, n("x"), Term::send(0, 2, Term::End)),
                Term::res(
                    n("y"),
                    nu(),
                    Term::send(1, 0, Term::recv(0, n("y"), Term::End)),
                ),
            ),
        ),
    )
    .unwrap();
    let r = Raw::res(
        n("x^0"),
        nu(),
        Raw::par(
            Raw::recv(n("x^0"), n("x^1"), Raw::send(n("x^1"), n("z^0"), Raw::End)),
            Raw::res(
                n("y^0"),
                nu(),
                Raw::send(n("x^0"), n("y^0"), Raw::recv(n("y^0"), n("y^1"), Raw::End)),
            ),
        ),
    );
    if p.to_process(&[n("z")]).map_err(|e| e.to_string())? != q {
        return Err("names to indices differs from the example".into());
    }
    if to_raw(&[n("z^0")], &q).map_err(|e| e.to_string())? != r {
        return Err("indices to names differs from the example".into());
    }
    Ok(())
}

fn raw_names() -> impl Strategy<Value = Raw> {
    let name = || prop::sample::select(vec!["x", "y", "z"]).prop_map(n);
    Just(Raw::End).prop_recursive(6, 24, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Raw::par(l, r)),
            (name(), inner.clone()).prop_map(|(x, b)| Raw::res(x, NuAnnot::placeholder(), b)),
            (name(), name(), inner.clone()).prop_map(|(c, x, b)| Raw::recv(c, x, b)),
            (name(), name(), inner).prop_map(|(c, m, b)| Raw::send(c, m, b)),
        ]
    })
}

fn round_trips() -> Outcome {
    conversion_example()?;
    for seed in 0..1000 {
        let g = gen_well_typed(seed, 8, AlgMix::default());
        let ctx: Vec<Name> = (0..g.process.depth())
            .map(|k| n(&format!("f{k}")))
            .collect();
        let r = to_raw(&ctx, &g.process).map_err(|e| e.to_string())?;
        let back = r.to_process(&ctx).map_err(|e| e.to_string())?;
        if !back.process_eq(&g.process) || !barendregt(&ctx, &r) {
            return Err(format!("seed {seed}: indices to names and back differs"));
        }
    }
    let ctx = vec![n("x"), n("y"), n("z")];
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    runner
        .run(&raw_names(), |r| {
            let p = r.to_process(&ctx).unwrap();
            let back = to_raw(&ctx, &p).unwrap();
            prop_assert!(alpha_eq(&ctx, &r, &ctx, &back));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("conversion example, 1000 + 1000 round trips".into())
}

fn derive(algs: &AlgebraSet, g: &Generated) -> Result<Derivation, String> {
    check(algs, &g.types, &g.idxs, &g.usage, &g.process).map_err(|e| e.to_string())
}

fn subject_reduction_property() -> Outcome {
    let start = Instant::now();
    let steps = Cell::new(0usize);
    report(run_property(5, 1000, 8, AlgMix::default(), |algs, g| {
        let d = derive(algs, g)?;
        for step in reductions(algs, &g.process) {
            let cap = match step.channel {
                Channel::Internal => None,
                Channel::External(i) => {
                    Some(derive_capability(algs, &d, i).map_err(|e| e.to_string())?)
                }
            };
            let e = subject_reduction(algs, &d, &step, cap.as_ref()).map_err(|e| e.to_string())?;
            recheck(algs, &e).map_err(|e| e.to_string())?;
            let expected = cap.map_or_else(|| d.input.clone(), |c| c.output);
            if e.input != expected || e.output != d.output {
                return Err(format!("root contexts wrong after {}", step.channel));
            }
            steps.set(steps.get() + 1);
        }
        Ok(())
    }))?;
    within(start, Duration::from_secs(60), "subject reduction")?;
    Ok(format!("1000 processes, {} steps retyped", steps.get()))
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn transformers() -> Outcome {
    let mix = AlgMix::default;
    let counts: [Cell<usize>; 5] = Default::default();
    let bump = |k: usize| counts[k].set(counts[k].get() + 1);

    report(run_property(21, 1000, 8, mix(), |algs, g| {
        let d = derive(algs, g)?;
        let mut extra = empty_ctx(algs, &d.idxs);
        for i in 0..d.depth() {
            if d.idxs[i] == AlgId::GRA {
                extra.set(i, pair(1, 2)).unwrap();
            }
        }
        let gamma = ok(compose_ctx(algs, &d.idxs, &d.input, &extra))?;
        let ev = ok(SplitEvidence::of(algs, &d))?;
        let f = ok(frame(algs, &d, &ev, &gamma))?;
        ok(recheck(algs, &f))?;
        let back = ok(frame(algs, &f, &ok(SplitEvidence::of(algs, &f))?, &d.input))?;
        if back != d {
            return Err("framing back does not restore".into());
        }
        bump(0);
        Ok(())
    }))?;

    report(run_property(22, 1000, 8, mix(), |algs, g| {
        let d = derive(algs, g)?;
        for i in 0..=d.depth() {
            let w = ok(weaken(algs, &d, i, &Type::Unit, AlgId::GRA, pair(2, 1)))?;
            ok(recheck(algs, &w))?;
            bump(1);
            let s = ok(strengthen(algs, &w, i))?;
            ok(recheck(algs, &s))?;
            bump(2);
            if s != d {
                return Err(format!("strengthen after weaken at {i}"));
            }
        }
        Ok(())
    }))?;

    report(run_property(23, 1000, 8, mix(), |algs, g| {
        let d = derive(algs, g)?;
        for i in 0..d.depth().saturating_sub(1) {
            let x = ok(exchange_deriv(algs, &d, i))?;
            ok(recheck(algs, &x))?;
            if ok(exchange_deriv(algs, &x, i))? != d {
                return Err(format!("exchange twice at {i}"));
            }
            bump(3);
        }
        Ok(())
    }))?;

    report(run_property(24, 1000, 8, mix(), |algs, g| {
        let d0 = derive(algs, g)?;
        for i in 0..d0.depth() {
            // A fresh copy of variable i at 0 receives i's usage.
            let (ty, alg) = (d0.types[i].clone(), d0.idxs[i]);
            let d = ok(weaken(algs, &d0, 0, &ty, alg, algs.empty(alg)))?;
            let (i, j) = (i + 1, 0);
            let (x, y) = (d.input[i], d.output[i]);
            let whole = i % 2 == 0;
            let (m, nn) = if whole {
                (x, y)
            } else {
                (
                    algs.split_pair(alg, x, y).ok_or("no consumption")?,
                    algs.empty(alg),
                )
            };
            let mut gamma = d.input.clone();
            gamma
                .set(i, algs.split_pair(alg, x, m).ok_or("m too large")?)
                .unwrap();
            let mut gamma_j = gamma.clone();
            gamma_j.set(j, m).unwrap();
            let mut psi = d.output.clone();
            psi.set(i, algs.split_pair(alg, y, nn).ok_or("n too large")?)
                .unwrap();
            let mut psi_j = psi.clone();
            psi_j.set(j, nn).unwrap();
            let ev = SubstEvidence {
                m,
                n: nn,
                gamma,
                gamma_j: gamma_j.clone(),
                psi,
                psi_j,
            };
            let s = ok(subst_deriv(algs, &d, i, j, &ev))?;
            ok(recheck(algs, &s))?;
            // Oracle: the checker on the substituted process from Γ_j.
            let fresh = ok(check(algs, &s.types, &s.idxs, &gamma_j, &s.subject()))?;
            if fresh != s {
                return Err(format!("substitution of {i} differs from the checker"));
            }
            bump(4);
        }
        Ok(())
    }))?;

    Ok(format!(
        "frame {}, weaken {}, strengthen {}, exchange {}, subst {}",
        counts[0].get(),
        counts[1].get(),
        counts[2].get(),
        counts[3].get(),
        counts[4].get()
    ))
}

fn courier_execution() -> Outcome {
    let algs = AlgebraSet::standard();
    let l = load(&algs, COURIER).map_err(|e| e.to_string())?;
    let t = reduce(&algs, &l, None).map_err(|e| e.to_string())?;
    if t.steps.len() != 4 {
        return Err(format!("{} steps", t.steps.len()));
    }
    for s in &t.steps {
        if s.step.channel != Channel::Internal {
            return Err(format!("step {} is {}", s.step.step, s.step.channel));
        }
        let d = &s.derivation;
        if !(d.input.is_empty() && d.output.is_empty()) {
            return Err(format!("step {} changes the root contexts", s.step.step));
        }
        ok(recheck(&algs, d))?;
    }
    let last = &t.steps[3].step.process;
    let (log, collected) = garbage_collect(last);
    if collected != Process::end(0) || t.collected.subject() != collected {
        return Err(format!("ends in {}", collected.display(&algs)));
    }
    if let Some(rw) = log
        .iter()
        .find(|rw| !matches!(rw.rule, CongRule::ScopeEnd | CongRule::CompId))
    {
        return Err(format!("collection uses {rw}"));
    }
    Ok(format!(
        "4 internal steps, collected to end with {} rewrites",
        log.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("courier typing", courier_typing),
        ("variable reference", variable_reference),
        ("algebra laws", algebra_laws),
        ("round trips", round_trips),
        ("subject reduction", subject_reduction_property),
        ("transformers", transformers),
        ("courier execution", courier_execution),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!(
                "criterion {} {name}: PASS ({detail}; {:.2?})",
                k + 1,
                start.elapsed()
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
