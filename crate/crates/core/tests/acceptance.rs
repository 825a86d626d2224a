//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::Rng;
use ratfix::behaviors::{Alphabet, FunctorKind, Monoid, Observation};
use ratfix::bisim::{bisimilar, minimize};
use ratfix::langops::{enumerate_words, language_equiv, nda_to_dfa};
use ratfix::sosdsl::{parse_spec, parse_term, Term};
use ratfix::streams::{detect_lasso, gsos_unfold, gsos_unfold_with_budget, lasso_of, lasso_to_system, parse_gsos, unfold_system, GsosStreamSpec, Lasso};
use ratfix::synthesis::{eval_term, synthesize, FlatState};
use ratfix::{Pointed, Rational as Q, Spec};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:.2?}, limit {limit:?}", start.elapsed()))
}

fn words_of(p: &Pointed, max: usize) -> Result<BTreeSet<Vec<usize>>, String> {
    let dfa = nda_to_dfa(p).map_err(|e| e.to_string())?;
    Ok(enumerate_words(&dfa, max).map_err(|e| e.to_string())?.words().iter().cloned().collect())
}

/// An automaton over `alpha` accepting exactly `word`.
fn single_word(alpha: &Alphabet, word: &str) -> Pointed {
    let n = word.len();
    let obs = (0..=n)
        .map(|i| match word[i..].chars().next() {
            Some(c) => Observation::Nda {
                accept: false,
                succ: BTreeMap::from([(alpha.index_of(&c.to_string()).unwrap(), BTreeSet::from([i + 1]))]),
            },
            None => Observation::Nda { accept: true, succ: BTreeMap::new() },
        })
        .collect();
    let states = (0..=n).map(|i| format!("w{i}")).collect();
    common::point(ratfix::Coalgebra::new(FunctorKind::Nda(alpha.clone()), states, obs), 0)
}

fn shuffle_closure() -> Check {
    let start = Instant::now();
    let spec: Spec = parse_spec(include_str!("../../../specs/shuffle.sos")).map_err(|d| format!("{d:?}"))?;
    let abc = spec.kind.alphabet().unwrap().clone();
    let env = BTreeMap::from([("x".to_string(), single_word(&abc, "ab")), ("y".to_string(), single_word(&abc, "c"))]);
    let sh = eval_term(&spec, &env, &parse_term("shuffle(x,y)").unwrap(), false).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = words_of(&sh, 3)?
        .iter()
        .map(|w| w.iter().map(|&a| abc.name(a)).collect::<String>())
        .collect();
    let want: BTreeSet<String> = ["abc", "acb", "cab"].map(String::from).into();
    ensure(got == want, || format!("ab shuffle c = {got:?}"))?;

    let spec = common::shuffle_spec_ab();
    let term = parse_term("shuffle(x,y)").unwrap();
    let mut r = common::rng(1001);
    for trial in 0..50 {
        let (n1, n2) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let x = common::random_nda(&mut r, &common::ab(), n1);
        let y = common::random_nda(&mut r, &common::ab(), n2);
        let env = BTreeMap::from([("x".to_string(), common::point(x.clone(), 0)), ("y".to_string(), common::point(y.clone(), 0))]);
        let sh = eval_term(&spec, &env, &term, false).map_err(|e| e.to_string())?;
        let expected = common::shuffle_oracle(&common::nda_language(&x, 0, 6), &common::nda_language(&y, 0, 6), 2, 6);
        ensure(words_of(&sh, 6)? == expected, || format!("random pair {trial} differs from the set shuffle"))?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{{abc, acb, cab}}; 50 random pairs agree up to length 6 ({:.2?})", start.elapsed()))
}

fn state_bound() -> Check {
    let start = Instant::now();
    let mut r = common::rng(1002);
    let mut largest = 0;
    for i in 0..200 {
        let f = common::FORMATS[i % common::FORMATS.len()];
        let inst = common::random_instance(&mut r, f, 4);
        let bound = common::flat_bound(&inst.spec, inst.base.len());
        let sys = synthesize(&inst.spec, &inst.base, FlatState::OpApp(inst.op.clone(), inst.args.clone()))
            .map_err(|e| format!("{f} instance {i}: {e}"))?;
        ensure(sys.len() <= bound, || format!("{f} instance {i}: {} states, bound {bound}", sys.len()))?;
        largest = largest.max(sys.len());
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("200 instances over 5 formats, largest {largest} states ({:.2?})", start.elapsed()))
}

fn stream_closure() -> Check {
    let spec: Spec = parse_spec(include_str!("../../../specs/zip.sos")).map_err(|d| format!("{d:?}"))?;
    let x: Lasso<Q> = "| 1,2".parse().unwrap();
    let y: Lasso<Q> = "| 3".parse().unwrap();
    let env = BTreeMap::from([("x".to_string(), lasso_to_system(&x)), ("y".to_string(), lasso_to_system(&y))]);
    let z = eval_term(&spec, &env, &parse_term("zip(x,y)").unwrap(), false).map_err(|e| e.to_string())?;
    let bound = common::flat_bound(&spec, 3);
    // every state repeats within `bound` steps, so 3 * bound values expose the cycle twice
    let values = unfold_system(&z, 3 * bound).map_err(|e| e.to_string())?;
    let pointwise: Vec<Q> = (0..3 * bound).map(|i| if i % 2 == 0 { x.nth(i / 2).clone() } else { y.nth(i / 2).clone() }).collect();
    ensure(values == pointwise, || "unfolding differs from pointwise interleaving".into())?;
    let detected = detect_lasso(&values).ok_or("no lasso detected")?;
    let want = Lasso::new(vec![], common::ints(&[1, 3, 2, 3])).unwrap();
    ensure(detected == want, || format!("detected {detected}"))?;
    ensure(lasso_of(&z).map_err(|e| e.to_string())? == want, || "lasso of the system differs".into())?;
    ensure(bisimilar(&z, &lasso_to_system(&detected)).map_err(|e| e.to_string())?, || "not bisimilar to the lasso".into())?;
    Ok(format!("zip((1,2)^w, 3^w) = {detected}, {} states", z.reachable().system.len()))
}

fn counterexamples() -> Check {
    let start = Instant::now();
    let p = parse_gsos::<Q>(include_str!("../../../specs/p.gsos")).map_err(|d| format!("{d:?}"))?;
    let env = BTreeMap::from([("z".to_string(), Lasso::constant(common::ints(&[0])[0].clone()))]);
    let term = parse_term("p(z)").unwrap();
    // the configuration after n steps has 2^n + 1 nodes
    let values = gsos_unfold_with_budget(&p, &env, &term, 21, 1 << 21).map_err(|e| e.to_string())?;
    let powers: Vec<Q> = (0..64u32).map(|n| Q::from_integer(num_bigint::BigInt::from(2u8).pow(n))).collect();
    ensure(values == powers[..21], || format!("p(0^w) = {values:?}"))?;
    ensure(detect_lasso(&values).is_none(), || "lasso found in 21 unfolded values".into())?;
    ensure(detect_lasso(&powers).is_none(), || "lasso found in 64 powers of two".into())?;
    let cut = gsos_unfold_with_budget(&p, &env, &term, 21, 1 << 10);
    ensure(matches!(cut, Err(ratfix::Error::Budget { step: 10, .. })), || format!("budget 2^10 gave {cut:?}"))?;

    let u = parse_gsos::<Q>(include_str!("../../../specs/un.gsos")).map_err(|d| format!("{d:?}"))?;
    let seq = gsos_unfold(&u, &env, &parse_term("u[5](z)").unwrap(), 64).map_err(|e| e.to_string())?;
    ensure(seq[..4] == common::ints(&[5, 6, 7, 8])[..], || format!("u[5] prefix {:?}", &seq[..4]))?;
    ensure(detect_lasso(&seq).is_none(), || "lasso found in u[5]".into())?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("p(0^w) = 2^n for n <= 20, u[5] = 5,6,7,8,..., no lasso in 64 values ({:.2?})", start.elapsed()))
}

fn congruence() -> Check {
    let mut r = common::rng(1005);
    for f in common::FORMATS {
        for trial in 0..100 {
            let inst = common::random_instance(&mut r, f, 4);
            let copy = common::split(&mut r, &inst.base);
            let copy_args: Vec<usize> = inst.args.iter().map(|&a| 2 * a + r.gen_range(0..2)).collect();
            let run = |base, args| {
                synthesize(&inst.spec, base, FlatState::OpApp(inst.op.clone(), args)).map(|s| s.to_pointed()).map_err(|e| e.to_string())
            };
            let (lhs, rhs) = (run(&inst.base, inst.args.clone())?, run(&copy, copy_args)?);
            ensure(bisimilar(&lhs, &rhs).map_err(|e| e.to_string())?, || format!("{f} trial {trial}: results differ"))?;
        }
    }
    Ok("100 trials per format".into())
}

fn oracle_agreement() -> Check {
    let mut r = common::rng(1006);
    let mut compared = 0;
    for trial in 0..100 {
        let spec = common::random_stream_spec(&mut r);
        let gsos = GsosStreamSpec::from_spec(&spec).map_err(|e| e.to_string())?;
        let ops: Vec<(&String, &usize)> = spec.signature.ops.iter().collect();
        let (op, &arity) = ops[r.gen_range(0..ops.len())];
        let vars: Vec<String> = (0..arity).map(|i| format!("x{i}")).collect();
        let term = Term::App { op: op.clone(), index: None, args: vars.iter().cloned().map(Term::Var).collect() };
        let lassos: BTreeMap<String, Lasso<Q>> = vars.iter().map(|v| (v.clone(), common::random_lasso(&mut r))).collect();
        let env = lassos.iter().map(|(k, l)| (k.clone(), lasso_to_system(l))).collect();
        let sys = eval_term(&spec, &env, &term, false).map_err(|e| format!("trial {trial}: {e}"))?;
        let got = unfold_system(&sys, 50).map_err(|e| e.to_string())?;
        let want = gsos_unfold(&gsos, &lassos, &term, 50).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("trial {trial}: {spec}"))?;
        compared += got.len();
    }
    Ok(format!("100 specs, {compared} values compared"))
}

fn ccs() -> Check {
    let spec: Spec = parse_spec(include_str!("../../../specs/ccs.sos")).map_err(|d| format!("{d:?}"))?;
    let env = BTreeMap::from([("P".to_string(), common::fixture("ccs_p.json")), ("Q".to_string(), common::fixture("ccs_q.json"))]);
    let eval = |t: &str| eval_term(&spec, &env, &parse_term(t).unwrap(), false).map_err(|e| e.to_string());
    let (pq, qp, rs) = (eval("par(P,Q)")?, eval("par(Q,P)")?, eval("restrict_a(par(P,Q))")?);
    let alpha = spec.kind.alphabet().unwrap();
    let label = |l: &str| alpha.index_of(l).unwrap();
    let Observation::Lts(edges) = pq.root_obs() else { return Err("not an lts".into()) };
    let tau_to_stuck = edges
        .iter()
        .any(|(a, t)| *a == label("tau") && matches!(&pq.system.obs[*t], Observation::Lts(e) if e.is_empty()));
    ensure(tau_to_stuck, || "no tau move to par(0,0)".into())?;
    ensure(bisimilar(&pq, &common::fixture("ccs_par.json")).unwrap(), || "par(P,Q) differs from the fixture".into())?;
    ensure(bisimilar(&pq, &qp).unwrap(), || "par(P,Q) and par(Q,P) differ".into())?;
    ensure(bisimilar(&rs, &common::fixture("ccs_restrict.json")).unwrap(), || "restriction differs from the fixture".into())?;
    let visible = rs.system.obs.iter().any(|o| matches!(o, Observation::Lts(e) if e.iter().any(|(a, _)| *a == label("a") || *a == label("abar"))));
    ensure(!visible, || "restriction left an a or abar move".into())?;
    Ok(format!("par(P,Q) has {} states, tau to par(0,0), symmetric, restriction hides a", pq.reachable().system.len()))
}

fn priority() -> Check {
    let spec: Spec = parse_spec(include_str!("../../../specs/priority.sos")).map_err(|d| format!("{d:?}"))?;
    ensure(spec.kind.monoid() == Some(Monoid::MinInf), || "priority spec is not over min-inf".into())?;
    let base = common::fixture("priority_base.json");
    let env = BTreeMap::from([("x".to_string(), base.clone())]);
    let got = eval_term(&spec, &env, &parse_term("dab(x)").unwrap(), false).map_err(|e| e.to_string())?;
    let (Observation::Wts(root), Observation::Wts(orig)) = (got.root_obs(), base.root_obs()) else { return Err("not a wts".into()) };
    let a = 0;
    let weights = |row: Option<&BTreeMap<usize, _>>| row.map(|m: &BTreeMap<usize, ratfix::behaviors::Weight<Q>>| m.values().cloned().collect::<BTreeSet<_>>());
    ensure(weights(root.get(&a)) == weights(orig.get(&a)), || "root does not keep all a-transitions".into())?;
    ensure(root.keys().all(|&l| l == a), || "root kept a b-transition".into())?;
    ensure(bisimilar(&got, &common::fixture("priority_expected.json")).unwrap(), || "result differs from the fixture".into())?;
    let m = minimize(&got);
    ensure(minimize(&m) == m, || "minimize is not idempotent".into())?;
    Ok(format!("root keeps a-weights {{1, 3}}, no b; {} states", got.reachable().system.len()))
}

fn bisim_engine() -> Check {
    let start = Instant::now();
    let mut r = common::rng(1009);
    let ab = common::ab();
    let mut kinds = vec![FunctorKind::Stream, FunctorKind::Dfa(ab.clone()), FunctorKind::Lts(ab.clone()), FunctorKind::Nda(ab.clone())];
    kinds.extend(Monoid::ALL.map(|m| FunctorKind::Wts(ab.clone(), m)));
    for kind in &kinds {
        for trial in 0..200 {
            let c = common::random_system(&mut r, kind, 8);
            let m = minimize(&common::point(c, 0));
            ensure(minimize(&m) == m, || format!("{kind} trial {trial}: minimize not idempotent"))?;
        }
    }
    let mut equal = 0;
    for trial in 0..50 {
        let d1 = common::point(common::random_dfa(&mut r, &ab, 4), 0);
        let d2 = if trial % 2 == 0 {
            common::point(common::split(&mut r, &d1.system), 1)
        } else {
            common::point(common::random_dfa(&mut r, &ab, 4), 0)
        };
        let eq = language_equiv(&d1, &d2).map_err(|e| e.to_string())?;
        let words = |d| enumerate_words(d, 8).map_err(|e| e.to_string());
        ensure(eq == (words(&d1)? == words(&d2)?), || format!("dfa pair {trial}: bisimilarity {eq} disagrees with words"))?;
        equal += usize::from(eq);
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("200 systems per kind over {} kinds; 50 dfa pairs, {equal} equivalent ({:.2?})", kinds.len(), start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("shuffle of regular languages", shuffle_closure),
        ("synthesized state bound", state_bound),
        ("stream closure via zip", stream_closure),
        ("non-closure counterexamples", counterexamples),
        ("bisimilarity is a congruence", congruence),
        ("synthesis agrees with term unfolding", oracle_agreement),
        ("ccs parallel and restriction", ccs),
        ("priority operator", priority),
        ("bisimulation engine", bisim_engine),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
