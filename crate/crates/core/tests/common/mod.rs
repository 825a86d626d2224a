//! Seeded generators for random systems and random valid specifications.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratfix::behaviors::{Alphabet, FiniteCoalgebra, FunctorKind, Monoid, Observation, PointedCoalgebra, Weight};
use ratfix::scalar::{int, ratio};
use ratfix::sosdsl::{parse_spec, validate_spec, SpecDoc};
use ratfix::streams::Lasso;
use ratfix::Rational as Q;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

pub fn point(c: FiniteCoalgebra<Q>, root: usize) -> PointedCoalgebra<Q> {
    PointedCoalgebra::new(c, root).unwrap()
}

pub fn ints(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| int(x)).collect()
}

pub fn random_stream(r: &mut ChaCha8Rng, n: usize) -> FiniteCoalgebra<Q> {
    let obs = (0..n)
        .map(|_| Observation::Stream { out: int(r.gen_range(0..3)), next: r.gen_range(0..n) })
        .collect();
    FiniteCoalgebra::new(FunctorKind::Stream, names(n), obs)
}

pub fn random_dfa(r: &mut ChaCha8Rng, alpha: &Alphabet, n: usize) -> FiniteCoalgebra<Q> {
    let obs = (0..n)
        .map(|_| Observation::Dfa {
            accept: r.gen_bool(0.4),
            next: alpha.ids().map(|a| (a, r.gen_range(0..n))).collect(),
        })
        .collect();
    FiniteCoalgebra::new(FunctorKind::Dfa(alpha.clone()), names(n), obs)
}

pub fn random_lts(r: &mut ChaCha8Rng, alpha: &Alphabet, n: usize) -> FiniteCoalgebra<Q> {
    let obs = (0..n)
        .map(|_| {
            let mut edges = BTreeSet::new();
            for a in alpha.ids() {
                for t in 0..n {
                    if r.gen_bool(0.3) {
                        edges.insert((a, t));
                    }
                }
            }
            Observation::Lts(edges)
        })
        .collect();
    FiniteCoalgebra::new(FunctorKind::Lts(alpha.clone()), names(n), obs)
}

pub fn random_nda(r: &mut ChaCha8Rng, alpha: &Alphabet, n: usize) -> FiniteCoalgebra<Q> {
    let obs = (0..n)
        .map(|_| {
            let mut succ = BTreeMap::new();
            for a in alpha.ids() {
                let ts: BTreeSet<usize> = (0..n).filter(|_| r.gen_bool(0.3)).collect();
                if !ts.is_empty() {
                    succ.insert(a, ts);
                }
            }
            Observation::Nda { accept: r.gen_bool(0.4), succ }
        })
        .collect();
    FiniteCoalgebra::new(FunctorKind::Nda(alpha.clone()), names(n), obs)
}

pub fn random_weight(r: &mut ChaCha8Rng, m: Monoid) -> Weight<Q> {
    let v: Q = match m {
        Monoid::NatPlus => int(r.gen_range(1i64..4)),
        Monoid::RatPlus => [ratio::<Q>(1, 2), int(1), int(-1), ratio(-3, 2), int(2)].choose(r).unwrap().clone(),
        Monoid::MinInf => [int::<Q>(0), ratio(1, 2), int(1), int(2), int(3)].choose(r).unwrap().clone(),
    };
    Weight::Finite(v)
}

pub fn random_wts(r: &mut ChaCha8Rng, alpha: &Alphabet, m: Monoid, n: usize) -> FiniteCoalgebra<Q> {
    let obs = (0..n)
        .map(|_| {
            let mut edges = BTreeMap::new();
            for a in alpha.ids() {
                let mut row: BTreeMap<usize, Weight<Q>> = BTreeMap::new();
                for t in 0..n {
                    if r.gen_bool(0.35) {
                        row.insert(t, random_weight(r, m));
                    }
                }
                if !row.is_empty() {
                    edges.insert(a, row);
                }
            }
            Observation::Wts(edges)
        })
        .collect();
    FiniteCoalgebra::new(FunctorKind::Wts(alpha.clone(), m), names(n), obs)
}

/// A random system of the given kind with `1..=max` states.
pub fn random_system(r: &mut ChaCha8Rng, kind: &FunctorKind, max: usize) -> FiniteCoalgebra<Q> {
    let n = r.gen_range(1..=max);
    match kind {
        FunctorKind::Stream => random_stream(r, n),
        FunctorKind::Dfa(a) => random_dfa(r, a, n),
        FunctorKind::Lts(a) => random_lts(r, a, n),
        FunctorKind::Nda(a) => random_nda(r, a, n),
        FunctorKind::Wts(a, m) => random_wts(r, a, *m, n),
    }
}

pub fn random_lasso(r: &mut ChaCha8Rng) -> Lasso<Q> {
    let p = (0..r.gen_range(0..3)).map(|_| int(r.gen_range(-2..4))).collect();
    let c = (0..r.gen_range(1..4)).map(|_| int(r.gen_range(-2..4))).collect();
    Lasso::new(p, c).unwrap()
}

/// A bisimilar copy of `c` in which every state is split in two and each
/// transition goes to one of the two copies of its target, chosen at random.
/// State `i` of `c` corresponds to states `2i` and `2i+1` of the result.
pub fn split(r: &mut ChaCha8Rng, c: &FiniteCoalgebra<Q>) -> FiniteCoalgebra<Q> {
    let mut obs = Vec::with_capacity(2 * c.len());
    for ob in &c.obs {
        for _ in 0..2 {
            let copy = match ob {
                Observation::Stream { out, next } => Observation::Stream { out: out.clone(), next: 2 * next + r.gen_range(0..2) },
                Observation::Dfa { accept, next } => Observation::Dfa {
                    accept: *accept,
                    next: next.iter().map(|(a, t)| (*a, 2 * t + r.gen_range(0..2))).collect(),
                },
                Observation::Lts(edges) => {
                    let mut out = BTreeSet::new();
                    for (a, t) in edges {
                        match r.gen_range(0..3) {
                            0 => {
                                out.insert((*a, 2 * t));
                            }
                            1 => {
                                out.insert((*a, 2 * t + 1));
                            }
                            _ => {
                                out.insert((*a, 2 * t));
                                out.insert((*a, 2 * t + 1));
                            }
                        }
                    }
                    Observation::Lts(out)
                }
                Observation::Nda { accept, succ } => Observation::Nda {
                    accept: *accept,
                    succ: succ
                        .iter()
                        .map(|(a, ts)| {
                            let mut out = BTreeSet::new();
                            for t in ts {
                                out.insert(2 * t + r.gen_range(0..2));
                                if r.gen_bool(0.3) {
                                    out.insert(2 * t + 1);
                                }
                            }
                            (*a, out)
                        })
                        .collect(),
                },
                Observation::Wts(edges) => Observation::Wts(
                    edges
                        .iter()
                        .map(|(a, row)| (*a, row.iter().map(|(t, w)| (2 * t + r.gen_range(0..2), w.clone())).collect()))
                        .collect(),
                ),
            };
            obs.push(copy);
        }
    }
    let states = (0..2 * c.len()).map(|i| format!("c{i}")).collect();
    FiniteCoalgebra::new(c.kind.clone(), states, obs)
}

struct Ops {
    names: Vec<String>,
    arities: Vec<usize>,
}

fn random_ops(r: &mut ChaCha8Rng) -> Ops {
    let n = r.gen_range(1..=3);
    let arities: Vec<usize> = (0..n).map(|_| *[0, 1, 1, 2, 2].choose(r).unwrap()).collect();
    Ops { names: (0..n).map(|i| format!("f{i}")).collect(), arities }
}

impl Ops {
    fn decls(&self) -> String {
        self.names.iter().zip(&self.arities).map(|(n, a)| format!("op {n}/{a}\n")).collect()
    }

    /// A flat target over `vars`: a variable, or an operator applied to
    /// variables. With no variables only constants can be used.
    fn target(&self, r: &mut ChaCha8Rng, vars: &[String]) -> String {
        let consts: Vec<usize> = (0..self.names.len()).filter(|&i| self.arities[i] == 0).collect();
        if vars.is_empty() {
            // only reached from a constant's own rules, so `consts` is nonempty
            return self.names[*consts.choose(r).unwrap()].clone();
        }
        if r.gen_bool(0.35) {
            return vars.choose(r).unwrap().clone();
        }
        let i = r.gen_range(0..self.names.len());
        let args: Vec<String> = (0..self.arities[i]).map(|_| vars.choose(r).unwrap().clone()).collect();
        format!("{}({})", self.names[i], args.join(","))
    }

    fn head(&self, i: usize) -> (String, Vec<String>) {
        let xs: Vec<String> = (0..self.arities[i]).map(|k| format!("x{k}")).collect();
        (format!("{}({})", self.names[i], xs.join(",")), xs)
    }
}

fn finish(text: String) -> SpecDoc<Q> {
    let doc = parse_spec::<Q>(&text).unwrap_or_else(|d| panic!("generated spec does not parse: {d:?}\n{text}"));
    let v = validate_spec(&doc);
    assert!(ratfix::sosdsl::is_bipointed(&v), "generated spec is invalid: {v:?}\n{text}");
    doc
}

fn stream_value(r: &mut ChaCha8Rng, values: &[String]) -> String {
    let c: i64 = r.gen_range(-2..4);
    if values.is_empty() {
        return c.to_string();
    }
    let v = values.choose(r).unwrap();
    let w = values.choose(r).unwrap();
    match r.gen_range(0..5) {
        0 => c.to_string(),
        1 => v.clone(),
        2 => format!("{v} + {}", c.abs()),
        3 => format!("{v} * {w}"),
        _ => format!("{v} - {w} + 1/2"),
    }
}

pub fn random_stream_spec(r: &mut ChaCha8Rng) -> SpecDoc<Q> {
    let ops = random_ops(r);
    let mut text = format!("behavior stream\n{}", ops.decls());
    for i in 0..ops.names.len() {
        let (head, xs) = ops.head(i);
        let ys: Vec<String> = (0..xs.len()).map(|k| format!("y{k}")).collect();
        let rs: Vec<String> = (0..xs.len()).map(|k| format!("r{k}")).collect();
        let premises: String = (0..xs.len()).map(|k| format!("{} ={}-> {}  ", xs[k], rs[k], ys[k])).collect();
        let vars: Vec<String> = xs.iter().chain(&ys).cloned().collect();
        let n_rules = if xs.is_empty() { 1 } else { r.gen_range(1..=3) };
        for k in 0..n_rules {
            let guard = if k + 1 < n_rules {
                let v = rs.choose(r).unwrap();
                format!(" when {v} {} {}", ["<", "<=", "=", "!="].choose(r).unwrap(), r.gen_range(0..3))
            } else if n_rules > 1 && r.gen_bool(0.5) {
                " otherwise".to_string()
            } else {
                String::new()
            };
            let target = ops.target(r, &vars);
            let out = stream_value(r, &rs);
            text.push_str(&format!("{premises}{guard} --- {head} ={out}-> {target}\n"));
        }
    }
    finish(text)
}

/// `lts`, `nda` or `dfa` specification over {a, b}.
pub fn random_transition_spec(r: &mut ChaCha8Rng, kind: &str) -> SpecDoc<Q> {
    let ops = random_ops(r);
    let labels = ["a", "b"];
    let mut text = format!("behavior {kind} labels {{a, b}}\n{}", ops.decls());
    for i in 0..ops.names.len() {
        let (head, xs) = ops.head(i);
        let rule = |r: &mut ChaCha8Rng, label: &str, allow_negative: bool| {
            let mut premises = String::new();
            let mut vars = xs.clone();
            if !xs.is_empty() {
                for k in 0..r.gen_range(0..=2) {
                    let x = xs.choose(r).unwrap();
                    let l = labels.choose(r).unwrap();
                    if allow_negative && r.gen_bool(0.3) {
                        premises.push_str(&format!("{x} -{l}-/->  "));
                    } else {
                        let y = format!("y{k}");
                        premises.push_str(&format!("{x} -{l}-> {y}  "));
                        vars.push(y);
                    }
                }
            }
            let target = ops.target(r, &vars);
            format!("{premises}--- {head} -{label}-> {target}\n")
        };
        if kind == "dfa" {
            for l in labels {
                let line = rule(r, l, false);
                text.push_str(&line);
            }
        } else {
            for _ in 0..r.gen_range(1..=3) {
                let l = labels.choose(r).unwrap();
                let line = rule(r, l, true);
                text.push_str(&line);
            }
        }
        if kind != "lts" {
            let mut subsets: Vec<Vec<String>> = Vec::new();
            for _ in 0..r.gen_range(0..=2) {
                let s: Vec<String> = xs.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
                if !subsets.contains(&s) {
                    subsets.push(s);
                }
            }
            for s in subsets {
                text.push_str(&format!("output {head} final when final {{{}}}\n", s.join(",")));
            }
        }
    }
    finish(text)
}

pub fn random_wts_spec(r: &mut ChaCha8Rng, m: Monoid) -> SpecDoc<Q> {
    let ops = random_ops(r);
    let labels = ["a", "b"];
    let mut text = format!("behavior wts labels {{a, b}} {}\n", m.name());
    text.push_str(&ops.decls());
    let constant = |r: &mut ChaCha8Rng| -> String {
        match m {
            Monoid::NatPlus => r.gen_range(1..3).to_string(),
            Monoid::RatPlus => ["1/2", "2", "3/4"].choose(r).unwrap().to_string(),
            Monoid::MinInf => ["0", "1", "5/2", "inf"].choose(r).unwrap().to_string(),
        }
    };
    for i in 0..ops.names.len() {
        let (head, xs) = ops.head(i);
        for _ in 0..r.gen_range(1..=3) {
            let mut premises = String::new();
            let mut vars = xs.clone();
            let mut us = Vec::new();
            let mut totals = Vec::new();
            if !xs.is_empty() {
                let max_weighted = if m.is_idempotent() { 2 } else { 1 };
                for k in 0..r.gen_range(0..=max_weighted) {
                    let x = xs.choose(r).unwrap();
                    let (y, u) = (format!("y{k}"), format!("u{k}"));
                    premises.push_str(&format!("{x} -{},{u}-> {y}  ", labels.choose(r).unwrap()));
                    vars.push(y);
                    us.push(u);
                }
                for k in 0..r.gen_range(0..=2) {
                    let x = xs.choose(r).unwrap();
                    let w = format!("w{k}");
                    premises.push_str(&format!("{x} ={}=> {w}  ", labels.choose(r).unwrap()));
                    totals.push(w);
                }
            }
            let guard = if m.is_ordered() && !totals.is_empty() && r.gen_bool(0.6) {
                let lhs = totals.choose(r).unwrap().clone();
                let rhs = if r.gen_bool(0.5) { totals.choose(r).unwrap().clone() } else { constant(r) };
                format!("when {lhs} {} {rhs} ", ["<=", "<", "=", "!="].choose(r).unwrap())
            } else {
                String::new()
            };
            let weight = if !us.is_empty() && !m.is_idempotent() {
                vec![us[0].clone(); r.gen_range(1..=2)].join(" + ")
            } else {
                let mut parts: Vec<String> = us.clone();
                for t in &totals {
                    if r.gen_bool(0.5) {
                        parts.push(t.clone());
                    }
                }
                if parts.is_empty() || r.gen_bool(0.3) {
                    parts.push(constant(r));
                }
                parts.join(" + ")
            };
            let target = ops.target(r, &vars);
            let label = labels.choose(r).unwrap();
            text.push_str(&format!("{premises}{guard}--- {head} -{label},{weight}-> {target}\n"));
        }
    }
    finish(text)
}

/// One random valid specification per format, with a matching system kind.
pub fn random_spec_for(r: &mut ChaCha8Rng, format: &str) -> SpecDoc<Q> {
    match format {
        "stream" => random_stream_spec(r),
        "lts" | "nda" | "dfa" => random_transition_spec(r, format),
        "wts" => {
            let m = *Monoid::ALL.choose(r).unwrap();
            random_wts_spec(r, m)
        }
        other => panic!("unknown format {other}"),
    }
}

pub const FORMATS: [&str; 5] = ["stream", "dfa", "lts", "nda", "wts"];

/// A random spec with a base system of the matching kind and a random
/// operator application over its states.
pub struct Instance {
    pub spec: SpecDoc<Q>,
    pub base: FiniteCoalgebra<Q>,
    pub op: String,
    pub args: Vec<usize>,
}

pub fn random_instance(r: &mut ChaCha8Rng, format: &str, max_states: usize) -> Instance {
    let spec = random_spec_for(r, format);
    let base = random_system(r, &spec.kind, max_states);
    let ops: Vec<(&String, &usize)> = spec.signature.ops.iter().collect();
    let (op, arity) = ops[r.gen_range(0..ops.len())];
    let args = (0..*arity).map(|_| r.gen_range(0..base.len())).collect();
    Instance { op: op.clone(), args, base, spec }
}

/// `Σ_g n^arity(g) + n`, computed from the declarations.
pub fn flat_bound(spec: &SpecDoc<Q>, n: usize) -> usize {
    spec.signature.ops.values().map(|&a| n.pow(a as u32)).sum::<usize>() + n
}

/// Whether some path from `s` reading `w` ends in an accepting state.
pub fn nda_accepts(c: &FiniteCoalgebra<Q>, s: usize, w: &[usize]) -> bool {
    let Observation::Nda { accept, succ } = &c.obs[s] else { panic!("not an nda") };
    match w.split_first() {
        None => *accept,
        Some((a, rest)) => succ.get(a).into_iter().flatten().any(|&t| nda_accepts(c, t, rest)),
    }
}

/// Every word over `k` labels of length at most `max`.
pub fn all_words(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (0..k).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Words of length at most `max` accepted from `s`, by exhaustive path search.
pub fn nda_language(c: &FiniteCoalgebra<Q>, s: usize, max: usize) -> BTreeSet<Vec<usize>> {
    let k = c.kind.alphabet().unwrap().len();
    all_words(k, max).into_iter().filter(|w| nda_accepts(c, s, w)).collect()
}

/// Whether `w` is an interleaving of `u` and `v`.
pub fn interleaves(w: &[usize], u: &[usize], v: &[usize]) -> bool {
    match w.split_first() {
        None => u.is_empty() && v.is_empty(),
        Some((x, rest)) => {
            (u.first() == Some(x) && interleaves(rest, &u[1..], v)) || (v.first() == Some(x) && interleaves(rest, u, &v[1..]))
        }
    }
}

/// The shuffle of two languages restricted to words of length at most `max`.
pub fn shuffle_oracle(l1: &BTreeSet<Vec<usize>>, l2: &BTreeSet<Vec<usize>>, k: usize, max: usize) -> BTreeSet<Vec<usize>> {
    all_words(k, max)
        .into_iter()
        .filter(|w| l1.iter().any(|u| u.len() <= w.len() && l2.iter().any(|v| u.len() + v.len() == w.len() && interleaves(w, u, v))))
        .collect()
}

/// The shuffle specification over {a, b}.
pub fn shuffle_spec_ab() -> SpecDoc<Q> {
    let text = include_str!("../../../../specs/shuffle.sos").replace("{a, b, c}", "{a, b}");
    parse_spec(&text).unwrap()
}

pub fn fixture(name: &str) -> PointedCoalgebra<Q> {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let (c, root) = ratfix::behaviors::from_json(&text).unwrap();
    assert!(c.validate().is_empty(), "{name}: {:?}", c.validate());
    point(c, root.expect("fixture has a root"))
}
