//! Shipped scenarios. Each prints what it computed, one `PASS`/`FAIL` line per
//! checked property, and a final verdict; any failed check exits 1.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_bigint::BigInt;
use ratfix::behaviors::{from_json, Alphabet, FunctorKind, Observation};
use ratfix::bisim::{bisimilar, minimize};
use ratfix::langops::{enumerate_words, nda_to_dfa};
use ratfix::sosdsl::{is_bipointed, parse_spec, parse_term, validate_spec};
use ratfix::streams::{detect_lasso, gsos_unfold, gsos_unfold_with_budget, lasso_of, lasso_to_system, parse_gsos};
use ratfix::synthesis::eval_term;
use ratfix::{Coalgebra, Error, Pointed, Rational, RationalLasso, Spec};

use crate::{describe, Failure, Outcome};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Demo {
    Zip,
    Ccs,
    Shuffle,
    Priority,
    PCounterexample,
    UnCounterexample,
}

const ZIP: &str = include_str!("../../../specs/zip.sos");
const CCS: &str = include_str!("../../../specs/ccs.sos");
const SHUFFLE: &str = include_str!("../../../specs/shuffle.sos");
const PRIORITY: &str = include_str!("../../../specs/priority.sos");
const P: &str = include_str!("../../../specs/p.gsos");
const UN: &str = include_str!("../../../specs/un.gsos");

const CCS_P: &str = include_str!("../../../fixtures/ccs_p.json");
const CCS_Q: &str = include_str!("../../../fixtures/ccs_q.json");
const CCS_PAR: &str = include_str!("../../../fixtures/ccs_par.json");
const CCS_RESTRICT: &str = include_str!("../../../fixtures/ccs_restrict.json");
const PRIORITY_BASE: &str = include_str!("../../../fixtures/priority_base.json");
const PRIORITY_EXPECTED: &str = include_str!("../../../fixtures/priority_expected.json");

/// Collects check results so a demo reports every check, not just the first failure.
struct Report<'a> {
    out: &'a mut dyn Write,
    failed: usize,
}

impl Report<'_> {
    fn line(&mut self, text: impl AsRef<str>) -> Outcome {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    fn check(&mut self, ok: bool, what: &str) -> Outcome {
        if !ok {
            self.failed += 1;
        }
        writeln!(self.out, "{} {what}", if ok { "PASS" } else { "FAIL" })?;
        Ok(())
    }

    fn system(&mut self, title: &str, p: &Pointed) -> Outcome {
        self.line(format!("{title}:"))?;
        for l in describe(p) {
            self.line(format!("  {l}"))?;
        }
        Ok(())
    }

    fn verdict(self, name: &str) -> Outcome {
        if self.failed == 0 {
            writeln!(self.out, "verdict: PASS")?;
            Ok(())
        } else {
            writeln!(self.out, "verdict: FAIL")?;
            Err(Failure::negative(format!("demo {name}: {} check(s) failed", self.failed)))
        }
    }
}

fn spec(text: &str) -> Result<Spec, Failure> {
    let doc = parse_spec(text).map_err(|ds| Failure::input(format!("shipped spec: {}", ds[0])))?;
    if !is_bipointed(&validate_spec(&doc)) {
        return Err(Failure::input("shipped spec is not bipointed"));
    }
    Ok(doc)
}

fn fixture(text: &str) -> Result<Pointed, Failure> {
    let (c, root) = from_json(text)?;
    Ok(Pointed::new(c, root.unwrap_or(0))?)
}

fn eval(doc: &Spec, env: &BTreeMap<String, Pointed>, t: &str) -> Result<Pointed, Failure> {
    let t = parse_term(t).map_err(|ds| Failure::input(format!("term: {}", ds[0])))?;
    Ok(eval_term(doc, env, &t, false)?)
}

fn lasso(text: &str) -> Result<RationalLasso, Failure> {
    Ok(text.parse()?)
}

fn join(values: &[Rational]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub(crate) fn run(demo: Demo, out: &mut dyn Write) -> Outcome {
    let mut r = Report { out, failed: 0 };
    let name = match demo {
        Demo::Zip => {
            zip(&mut r)?;
            "zip"
        }
        Demo::Ccs => {
            ccs(&mut r)?;
            "ccs"
        }
        Demo::Shuffle => {
            shuffle(&mut r)?;
            "shuffle"
        }
        Demo::Priority => {
            priority(&mut r)?;
            "priority"
        }
        Demo::PCounterexample => {
            p_counterexample(&mut r)?;
            "p-counterexample"
        }
        Demo::UnCounterexample => {
            un_counterexample(&mut r)?;
            "un-counterexample"
        }
    };
    r.verdict(name)
}

fn zip(r: &mut Report) -> Outcome {
    let doc = spec(ZIP)?;
    let (x, y) = (lasso("| 1,2")?, lasso("| 3")?);
    let env = BTreeMap::from([("x".to_string(), lasso_to_system(&x)), ("y".to_string(), lasso_to_system(&y))]);
    let z = eval(&doc, &env, "zip(x,y)")?;
    r.line(format!("x = {x}, y = {y}"))?;
    r.system("zip(x,y)", &z)?;
    let l = lasso_of(&z)?;
    r.line(format!("lasso: {l}"))?;
    r.check(l.to_string() == "| 1,3,2,3", "zip(x,y) denotes | 1,3,2,3")?;
    r.check(bisimilar(&z, &lasso_to_system(&l))?, "zip(x,y) is bisimilar to its lasso system")?;
    r.check(minimize(&z).system.len() == l.size(), "the minimal system has one state per lasso position")
}

fn ccs(r: &mut Report) -> Outcome {
    let doc = spec(CCS)?;
    let env = BTreeMap::from([("P".to_string(), fixture(CCS_P)?), ("Q".to_string(), fixture(CCS_Q)?)]);
    let pq = eval(&doc, &env, "par(P,Q)")?;
    let qp = eval(&doc, &env, "par(Q,P)")?;
    let rs = eval(&doc, &env, "restrict_a(par(P,Q))")?;
    let closed = eval(&doc, &env, "par(pre_a(nil),pre_abar(nil))")?;
    r.system("par(P,Q)", &pq)?;
    r.system("restrict_a(par(P,Q))", &rs)?;
    let alpha = doc.kind.alphabet().expect("ccs is labelled");
    let id = |l: &str| alpha.index_of(l);
    let Observation::Lts(edges) = pq.root_obs() else {
        return Err(Failure::input("ccs spec does not produce an lts"));
    };
    let tau_stuck = edges
        .iter()
        .any(|(a, t)| Some(*a) == id("tau") && matches!(&pq.system.obs[*t], Observation::Lts(e) if e.is_empty()));
    r.check(tau_stuck, "par(P,Q) has a tau move to a stuck state")?;
    r.check(bisimilar(&pq, &fixture(CCS_PAR)?)?, "par(P,Q) matches the expected system")?;
    r.check(bisimilar(&pq, &qp)?, "par(P,Q) is bisimilar to par(Q,P)")?;
    r.check(bisimilar(&rs, &fixture(CCS_RESTRICT)?)?, "restriction matches the expected system")?;
    let hidden = rs.system.obs.iter().all(|o| match o {
        Observation::Lts(e) => e.iter().all(|(a, _)| Some(*a) != id("a") && Some(*a) != id("abar")),
        _ => false,
    });
    r.check(hidden, "restriction leaves no a or abar move")?;
    let Observation::Lts(ce) = closed.root_obs() else { unreachable!("lts spec") };
    r.check(ce.iter().any(|(a, _)| Some(*a) == id("tau")), "closed term par(pre_a(nil),pre_abar(nil)) synchronizes")
}

fn single_word(alpha: &Alphabet, word: &str) -> Pointed {
    let letters: Vec<usize> = word.chars().map(|c| alpha.index_of(&c.to_string()).expect("letter in alphabet")).collect();
    let n = letters.len();
    let obs = (0..=n)
        .map(|i| match letters.get(i) {
            Some(&a) => Observation::Nda { accept: false, succ: BTreeMap::from([(a, BTreeSet::from([i + 1]))]) },
            None => Observation::Nda { accept: true, succ: BTreeMap::new() },
        })
        .collect();
    let states = (0..=n).map(|i| format!("{}.{}", &word[..i], &word[i..])).collect();
    Pointed::new(Coalgebra::new(FunctorKind::Nda(alpha.clone()), states, obs), 0).expect("root exists")
}

fn shuffle(r: &mut Report) -> Outcome {
    let doc = spec(SHUFFLE)?;
    let alpha = doc.kind.alphabet().expect("shuffle is over an alphabet").clone();
    let env = BTreeMap::from([("x".to_string(), single_word(&alpha, "ab")), ("y".to_string(), single_word(&alpha, "c"))]);
    let sh = eval(&doc, &env, "shuffle(x,y)")?;
    r.line(format!("x accepts ab, y accepts c; shuffle(x,y) has {} states", sh.reachable().system.len()))?;
    let dfa = minimize(&nda_to_dfa(&sh)?);
    r.system("determinized and minimized", &dfa)?;
    let words = enumerate_words(&dfa, 3)?.render(&alpha);
    r.line(format!("words <= 3 = [{}]", words.join(", ")))?;
    r.check(words == ["abc", "acb", "cab"], "shuffle(ab, c) accepts exactly abc, acb, cab")
}

fn priority(r: &mut Report) -> Outcome {
    let doc = spec(PRIORITY)?;
    let base = fixture(PRIORITY_BASE)?;
    let env = BTreeMap::from([("x".to_string(), base.clone())]);
    let got = eval(&doc, &env, "dab(x)")?;
    r.system("x", &base)?;
    r.system("dab(x)", &got)?;
    let (Observation::Wts(root), Observation::Wts(orig)) = (got.root_obs(), base.root_obs()) else {
        return Err(Failure::input("priority spec does not produce a wts"));
    };
    let alpha = doc.kind.alphabet().expect("wts is labelled");
    let a = alpha.index_of("a").expect("label a");
    let weights = |row: &BTreeMap<usize, BTreeMap<usize, _>>| row.get(&a).map(|m| m.values().cloned().collect::<BTreeSet<_>>());
    r.check(weights(root) == weights(orig), "the root keeps every a-transition with its weight")?;
    r.check(root.keys().all(|&l| l == a), "the root drops its b-transition")?;
    r.check(bisimilar(&got, &fixture(PRIORITY_EXPECTED)?)?, "dab(x) matches the expected system")?;
    let m = minimize(&got);
    r.check(minimize(&m) == m, "minimization is idempotent on dab(x)")
}

fn zero_stream() -> BTreeMap<String, RationalLasso> {
    BTreeMap::from([("z".to_string(), RationalLasso::constant(Rational::from_integer(BigInt::from(0))))])
}

fn p_counterexample(r: &mut Report) -> Outcome {
    let g = parse_gsos::<Rational>(P).map_err(|ds| Failure::input(format!("p.gsos: {}", ds[0])))?;
    let env = zero_stream();
    let t = parse_term("p(z)").map_err(|ds| Failure::input(ds[0].to_string()))?;
    // after n steps the configuration has 2^n + 1 nodes
    let values = gsos_unfold_with_budget(&g, &env, &t, 21, 1 << 21)?;
    r.line(format!("p(0^w) = {}, ...", join(&values)))?;
    let powers: Vec<Rational> = (0..21u32).map(|n| Rational::from_integer(BigInt::from(2).pow(n))).collect();
    r.check(values == powers, "the n-th value is 2^n")?;
    r.check(detect_lasso(&values).is_none(), "no lasso fits the unfolded values")?;
    let cut = gsos_unfold_with_budget(&g, &env, &t, 21, 1 << 10);
    if let Err(e) = &cut {
        r.line(format!("with a budget of 1024 nodes: {e}"))?;
    }
    r.check(matches!(cut, Err(Error::Budget { step: 10, .. })), "a budget of 1024 nodes is exceeded at step 10")?;
    let findings = parse_spec::<Rational>(P).map(|d| is_bipointed(&validate_spec(&d)));
    r.check(!matches!(findings, Ok(true)), "the specification is not bipointed")
}

fn un_counterexample(r: &mut Report) -> Outcome {
    let g = parse_gsos::<Rational>(UN).map_err(|ds| Failure::input(format!("un.gsos: {}", ds[0])))?;
    let t = parse_term("u[5](z)").map_err(|ds| Failure::input(ds[0].to_string()))?;
    let values = gsos_unfold(&g, &zero_stream(), &t, 64)?;
    r.line(format!("u[5](0^w) = {}, ...", join(&values[..12])))?;
    let expected: Vec<Rational> = (5..69).map(|n| Rational::from_integer(BigInt::from(n))).collect();
    r.check(values == expected, "the n-th value is 5 + n")?;
    r.check(detect_lasso(&values).is_none(), "no lasso fits 64 values")?;
    r.check(g.ops.values().any(|op| op.family), "u is an infinite family of operators")?;
    r.check(parse_spec::<Rational>(UN).is_err(), "the specification is rejected as not bipointed")
}
