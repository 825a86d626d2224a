//! Applying a bipointed specification to finite systems.
//!
//! Given a finite system `S`, every rule conclusion lands in `ΣS + S`: a state
//! of `S` itself or one operator applied to states of `S`. [`lambda_step`]
//! computes the one-step behaviour of such a flat state, and [`synthesize`]
//! closes a root under it. The result can never have more states than
//! `Σ_g |S|^arity(g) + |S|`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::behaviors::{unique_names, FiniteCoalgebra, FunctorKind, Label, Observation, PointedCoalgebra, StateId, Weight};
use crate::bisim;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sosdsl::{FlatTerm, Guard, SpecDoc, Term, WeightAtom};

/// A state of `ΣS + S`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlatState {
    Plain(StateId),
    OpApp(String, Vec<StateId>),
}

impl FlatState {
    fn describe(&self, names: &[String]) -> String {
        match self {
            FlatState::Plain(x) => names[*x].clone(),
            FlatState::OpApp(op, args) if args.is_empty() => op.clone(),
            FlatState::OpApp(op, args) => {
                let args: Vec<&str> = args.iter().map(|&a| names[a].as_str()).collect();
                format!("{op}({})", args.join(","))
            }
        }
    }
}

impl fmt::Display for FlatState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlatState::Plain(x) => write!(f, "{x}"),
            FlatState::OpApp(op, args) => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "{op}({})", args.join(","))
            }
        }
    }
}

/// `Σ_g n^arity(g) + n` for the signature of `spec`.
pub fn carrier_bound<S: Scalar>(spec: &SpecDoc<S>, n: usize) -> u128 {
    spec.signature.flat_carrier_size(n)
}

fn check_flat<S: Scalar>(spec: &SpecDoc<S>, base: &FiniteCoalgebra<S>, s: &FlatState) -> Result<()> {
    let in_range = |x: &StateId| {
        if *x < base.len() {
            Ok(())
        } else {
            Err(Error::input(format!("state {x} out of range ({} states)", base.len())))
        }
    };
    match s {
        FlatState::Plain(x) => in_range(x),
        FlatState::OpApp(op, args) => {
            let arity = spec
                .signature
                .arity(op)
                .ok_or_else(|| Error::input(format!("operator `{op}` is not in the signature")))?;
            if arity != args.len() {
                return Err(Error::input(format!("`{op}` has arity {arity}, applied to {} states", args.len())));
            }
            args.iter().try_for_each(in_range)
        }
    }
}

fn instantiate(target: &FlatTerm, env: &HashMap<&str, StateId>) -> Result<FlatState> {
    let lookup = |v: &String| {
        env.get(v.as_str())
            .copied()
            .ok_or_else(|| Error::internal(format!("target variable `{v}` is unbound")))
    };
    Ok(match target {
        FlatTerm::Var(v) => FlatState::Plain(lookup(v)?),
        FlatTerm::App(op, vars) => FlatState::OpApp(op.clone(), vars.iter().map(lookup).collect::<Result<_>>()?),
    })
}

fn label_id(kind: &FunctorKind, label: &str) -> Result<Label> {
    kind.alphabet()
        .and_then(|a| a.index_of(label))
        .ok_or_else(|| Error::internal(format!("label `{label}` not in the alphabet")))
}

/// All ways of picking one element from each list.
fn choices<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect()
    })
}

/// Successors of `x` under label `a` in a transition-style system.
fn label_successors<S: Scalar>(ob: &Observation<S>, a: Label) -> Vec<StateId> {
    match ob {
        Observation::Lts(edges) => edges.iter().filter(|(l, _)| *l == a).map(|(_, t)| *t).collect(),
        Observation::Nda { succ, .. } => succ.get(&a).map(|ts| ts.iter().copied().collect()).unwrap_or_default(),
        Observation::Dfa { next, .. } => next.get(&a).into_iter().copied().collect(),
        _ => Vec::new(),
    }
}

fn weighted_successors<S: Scalar>(ob: &Observation<S>, a: Label) -> Vec<(StateId, Weight<S>)> {
    match ob {
        Observation::Wts(edges) => edges
            .get(&a)
            .map(|m| m.iter().map(|(t, w)| (*t, w.clone())).collect())
            .unwrap_or_default(),
        _ => Vec::new(),
    }
}

/// The transitions an operator application derives, as `(label, target)`.
fn derive_transitions<S: Scalar>(
    spec: &SpecDoc<S>,
    base: &FiniteCoalgebra<S>,
    op: &str,
    args: &[StateId],
) -> Result<Vec<(Label, FlatState)>> {
    let mut out = Vec::new();
    for rule in spec.transition_rules(op) {
        if rule.is_vacuous() {
            continue;
        }
        let arg = |v: &str| {
            rule.head
                .position(v)
                .map(|i| args[i])
                .ok_or_else(|| Error::internal(format!("premise on unknown argument `{v}`")))
        };
        let mut blocked = false;
        for n in &rule.negative {
            let x = arg(&n.var)?;
            if !label_successors(&base.obs[x], label_id(&spec.kind, &n.label)?).is_empty() {
                blocked = true;
                break;
            }
        }
        if blocked {
            continue;
        }
        let options = rule
            .positive
            .iter()
            .map(|p| Ok(label_successors(&base.obs[arg(&p.var)?], label_id(&spec.kind, &p.label)?)))
            .collect::<Result<Vec<_>>>()?;
        let label = label_id(&spec.kind, &rule.label)?;
        for pick in choices(&options) {
            let mut env: HashMap<&str, StateId> = rule.head.vars.iter().map(String::as_str).zip(args.iter().copied()).collect();
            env.extend(rule.positive.iter().map(|p| p.target.as_str()).zip(pick));
            out.push((label, instantiate(&rule.target, &env)?));
        }
    }
    Ok(out)
}

fn derive_accept<S: Scalar>(spec: &SpecDoc<S>, base: &FiniteCoalgebra<S>, op: &str, args: &[StateId]) -> bool {
    let finality: Vec<bool> = args.iter().map(|&x| base.obs[x].accepts().unwrap_or(false)).collect();
    spec.output_rules(op).any(|r| r.triggers(spec.output_semantics, &finality))
}

fn derive_weighted<S: Scalar>(
    spec: &SpecDoc<S>,
    base: &FiniteCoalgebra<S>,
    op: &str,
    args: &[StateId],
) -> Result<BTreeMap<Label, BTreeMap<FlatState, Weight<S>>>> {
    let monoid = spec.kind.monoid().ok_or_else(|| Error::internal("weighted rules outside a wts specification"))?;
    let mut out: BTreeMap<Label, BTreeMap<FlatState, Weight<S>>> = BTreeMap::new();
    for rule in spec.weighted_rules(op) {
        let arg = |v: &str| {
            rule.head
                .position(v)
                .map(|i| args[i])
                .ok_or_else(|| Error::internal(format!("premise on unknown argument `{v}`")))
        };
        let mut totals: HashMap<&str, Weight<S>> = HashMap::new();
        let mut holds = true;
        for t in &rule.totals {
            let edges = weighted_successors(&base.obs[arg(&t.var)?], label_id(&spec.kind, &t.label)?);
            let total = monoid.sum(edges.iter().map(|(_, w)| w));
            match &t.pattern {
                WeightAtom::Const(c) => holds &= *c == total,
                WeightAtom::Var(v) => {
                    totals.insert(v, total);
                }
            }
        }
        if !holds {
            continue;
        }
        if let Guard::When(cmps) = &rule.guard {
            if !monoid.is_ordered() {
                return Err(Error::internal(format!("guard over the unordered monoid {monoid}")));
            }
            let lookup = |v: &str| totals.get(v).cloned();
            for c in cmps {
                if !c.op.holds(&c.lhs.eval(monoid, &lookup)?, &c.rhs.eval(monoid, &lookup)?) {
                    holds = false;
                }
            }
        }
        if !holds {
            continue;
        }
        let options = rule
            .weighted
            .iter()
            .map(|p| Ok(weighted_successors(&base.obs[arg(&p.var)?], label_id(&spec.kind, &p.label)?)))
            .collect::<Result<Vec<_>>>()?;
        let label = label_id(&spec.kind, &rule.label)?;
        for pick in choices(&options) {
            let mut env: HashMap<&str, StateId> = rule.head.vars.iter().map(String::as_str).zip(args.iter().copied()).collect();
            let mut weights = totals.clone();
            for (p, (t, w)) in rule.weighted.iter().zip(&pick) {
                env.insert(&p.target, *t);
                weights.insert(&p.weight, w.clone());
            }
            let w = rule.weight.eval(monoid, &|v| weights.get(v).cloned())?;
            let row = out.entry(label).or_default();
            let target = instantiate(&rule.target, &env)?;
            let acc = row.remove(&target).unwrap_or_else(|| monoid.unit());
            row.insert(target, monoid.combine(&acc, &w));
        }
    }
    for row in out.values_mut() {
        row.retain(|_, w| !monoid.is_unit(w));
    }
    out.retain(|_, row| !row.is_empty());
    Ok(out)
}

/// One-step behaviour of a flat state: the base observation for `Plain`, the
/// rules' verdict for `OpApp`.
pub fn lambda_step<S: Scalar>(
    spec: &SpecDoc<S>,
    base: &FiniteCoalgebra<S>,
    s: &FlatState,
) -> Result<Observation<S, FlatState>> {
    spec.kind.ensure_same(&base.kind)?;
    check_flat(spec, base, s)?;
    let (op, args) = match s {
        FlatState::Plain(x) => return Ok(base.obs[*x].map_targets(&base.kind, |t| FlatState::Plain(*t))),
        FlatState::OpApp(op, args) => (op.as_str(), args.as_slice()),
    };
    Ok(match &spec.kind {
        FunctorKind::Stream => {
            let mut values = Vec::with_capacity(args.len());
            let mut nexts = Vec::with_capacity(args.len());
            for &x in args {
                match &base.obs[x] {
                    Observation::Stream { out, next } => {
                        values.push(out.clone());
                        nexts.push(*next);
                    }
                    other => return Err(Error::internal(format!("{} observation in a stream system", other.kind_name()))),
                }
            }
            let sel = spec.stream_rule_select(op, &values)?;
            let mut env: HashMap<&str, StateId> = sel.rule.head.vars.iter().map(String::as_str).zip(args.iter().copied()).collect();
            for p in &sel.rule.premises {
                if let Some(i) = sel.rule.head.position(&p.var) {
                    env.insert(&p.tail, nexts[i]);
                }
            }
            Observation::Stream { out: sel.out, next: instantiate(&sel.rule.target, &env)? }
        }
        FunctorKind::Lts(_) => Observation::Lts(derive_transitions(spec, base, op, args)?.into_iter().collect()),
        FunctorKind::Nda(_) => {
            let mut succ: BTreeMap<Label, BTreeSet<FlatState>> = BTreeMap::new();
            for (a, t) in derive_transitions(spec, base, op, args)? {
                succ.entry(a).or_default().insert(t);
            }
            Observation::Nda { accept: derive_accept(spec, base, op, args), succ }
        }
        FunctorKind::Dfa(alphabet) => {
            let mut next = BTreeMap::new();
            for (a, t) in derive_transitions(spec, base, op, args)? {
                if let Some(prev) = next.insert(a, t.clone()) {
                    if prev != t {
                        return Err(Error::internal(format!(
                            "`{op}` derives two `{}`-successors in a deterministic system",
                            alphabet.name(a)
                        )));
                    }
                }
            }
            if let Some(a) = alphabet.ids().find(|a| !next.contains_key(a)) {
                return Err(Error::internal(format!("`{op}` derives no `{}`-successor", alphabet.name(a))));
            }
            Observation::Dfa { accept: derive_accept(spec, base, op, args), next }
        }
        FunctorKind::Wts(..) => Observation::Wts(derive_weighted(spec, base, op, args)?),
    })
}

/// The reachable part of the lifted system over `ΣS + S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesizedSystem<S> {
    pub base: FiniteCoalgebra<S>,
    /// Flat states in breadth-first discovery order.
    pub states: Vec<FlatState>,
    pub obs: Vec<Observation<S>>,
    pub root: StateId,
}

impl<S: Scalar> SynthesizedSystem<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &FlatState) -> Option<StateId> {
        self.states.iter().position(|x| x == s)
    }

    /// Forgets the flat-term structure. States are named after the base
    /// states they are built from, e.g. `zip(s0,s1)`.
    pub fn to_pointed(&self) -> PointedCoalgebra<S> {
        let names = unique_names(self.states.iter().map(|s| s.describe(&self.base.states)).collect());
        PointedCoalgebra {
            system: FiniteCoalgebra::new(self.base.kind.clone(), names, self.obs.clone()),
            root: self.root,
        }
    }
}

/// Breadth-first closure of `root` under [`lambda_step`].
pub fn synthesize<S: Scalar>(
    spec: &SpecDoc<S>,
    base: &FiniteCoalgebra<S>,
    root: FlatState,
) -> Result<SynthesizedSystem<S>> {
    spec.kind.ensure_same(&base.kind)?;
    check_flat(spec, base, &root)?;
    let mut index: HashMap<FlatState, StateId> = HashMap::from([(root.clone(), 0)]);
    let mut states = vec![root];
    let mut obs = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let step = lambda_step(spec, base, &states[i])?;
        let ob = step.map_targets(&spec.kind, |t| {
            *index.entry(t.clone()).or_insert_with(|| {
                states.push(t.clone());
                queue.push_back(states.len() - 1);
                states.len() - 1
            })
        });
        obs.push(ob);
    }
    let bound = carrier_bound(spec, base.len());
    if states.len() as u128 > bound {
        return Err(Error::internal(format!("{} synthesized states exceed the carrier bound {bound}", states.len())));
    }
    Ok(SynthesizedSystem { base: base.clone(), states, obs, root: 0 })
}

/// Evaluates a term over the signature whose variables denote pointed
/// systems, innermost operator first. A bare name that is not bound in `env`
/// but is a constant of the signature is applied as that constant.
///
/// With `minimize_levels`, every intermediate result is reduced to its
/// bisimulation quotient before the next operator is applied.
pub fn eval_term<S: Scalar>(
    spec: &SpecDoc<S>,
    env: &BTreeMap<String, PointedCoalgebra<S>>,
    term: &Term,
    minimize_levels: bool,
) -> Result<PointedCoalgebra<S>> {
    match term {
        Term::Var(v) => match env.get(v) {
            Some(p) => {
                spec.kind.ensure_same(p.kind())?;
                Ok(p.clone())
            }
            None if spec.signature.arity(v) == Some(0) => {
                eval_term(spec, env, &Term::App { op: v.clone(), index: None, args: Vec::new() }, minimize_levels)
            }
            None => Err(Error::input(format!("unbound variable `{v}`"))),
        },
        Term::App { op, index: Some(_), .. } => {
            Err(Error::input(format!("indexed operator `{op}[..]` only exists in the gsos dialect")))
        }
        Term::App { op, index: None, args } => {
            let arity = spec
                .signature
                .arity(op)
                .ok_or_else(|| Error::input(format!("operator `{op}` is not in the signature")))?;
            if arity != args.len() {
                return Err(Error::input(format!("`{op}` has arity {arity}, applied to {} arguments", args.len())));
            }
            let parts = args
                .iter()
                .map(|a| eval_term(spec, env, a, minimize_levels))
                .collect::<Result<Vec<_>>>()?;
            let systems: Vec<&FiniteCoalgebra<S>> = parts.iter().map(|p| &p.system).collect();
            let (base, offsets) = FiniteCoalgebra::disjoint_union(&spec.kind, &systems)?;
            let roots = parts.iter().zip(&offsets).map(|(p, off)| p.root + off).collect();
            let result = synthesize(spec, &base, FlatState::OpApp(op.clone(), roots))?.to_pointed();
            Ok(if minimize_levels { bisim::minimize(&result) } else { result })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::Alphabet;
    use crate::scalar::int;
    use crate::sosdsl::parse_spec;
    use num_rational::BigRational;

    type Q = BigRational;

    const ZIP: &str = "behavior stream\nop zip/2\nx1 =r1-> x1'  x2 =r2-> x2'\n---\nzip(x1,x2) =r1-> zip(x2,x1')\n";
    const PAR: &str = "behavior lts labels {a, b}\nop par/2\n\
        for l in {a, b} x -l-> x1 --- par(x,y) -l-> par(x1,y)\n\
        for l in {a, b} y -l-> y1 --- par(x,y) -l-> par(x,y1)\n";

    fn stream(outs: &[(i64, usize)]) -> FiniteCoalgebra<Q> {
        FiniteCoalgebra::new(
            FunctorKind::Stream,
            (0..outs.len()).map(|i| format!("s{i}")).collect(),
            outs.iter().map(|&(o, n)| Observation::Stream { out: int(o), next: n }).collect(),
        )
    }

    fn two_lts() -> FiniteCoalgebra<Q> {
        // p -a-> p', q -b-> q'
        FiniteCoalgebra::new(
            FunctorKind::Lts(Alphabet::new(["a", "b"]).unwrap()),
            vec!["p".into(), "p'".into(), "q".into(), "q'".into()],
            vec![
                Observation::Lts(BTreeSet::from([(0, 1)])),
                Observation::Lts(BTreeSet::new()),
                Observation::Lts(BTreeSet::from([(1, 3)])),
                Observation::Lts(BTreeSet::new()),
            ],
        )
    }

    #[test]
    fn par_step() {
        let spec = parse_spec::<Q>(PAR).unwrap();
        let ob = lambda_step(&spec, &two_lts(), &FlatState::OpApp("par".into(), vec![0, 2])).unwrap();
        assert_eq!(
            ob,
            Observation::Lts(BTreeSet::from([
                (0, FlatState::OpApp("par".into(), vec![1, 2])),
                (1, FlatState::OpApp("par".into(), vec![0, 3])),
            ]))
        );
    }

    #[test]
    fn par_grid_has_four_states() {
        let spec = parse_spec::<Q>(PAR).unwrap();
        let sys = synthesize(&spec, &two_lts(), FlatState::OpApp("par".into(), vec![0, 2])).unwrap();
        assert_eq!(sys.len(), 4);
        assert!(sys.states.iter().all(|s| matches!(s, FlatState::OpApp(..))));
        assert_eq!(sys.to_pointed().system.states, vec!["par(p,q)", "par(p',q)", "par(p,q')", "par(p',q')"]);
    }

    #[test]
    fn zip_step_binds_first_output() {
        let spec = parse_spec::<Q>(ZIP).unwrap();
        // σ = s0 (out 1 -> s1), σ₂ = s1, τ = s2 (out 3, self-loop)
        let base = stream(&[(1, 1), (2, 0), (3, 2)]);
        let ob = lambda_step(&spec, &base, &FlatState::OpApp("zip".into(), vec![0, 2])).unwrap();
        assert_eq!(ob, Observation::Stream { out: int(1), next: FlatState::OpApp("zip".into(), vec![2, 1]) });
    }

    #[test]
    fn plain_root_copies_the_base() {
        let spec = parse_spec::<Q>(PAR).unwrap();
        let sys = synthesize(&spec, &two_lts(), FlatState::Plain(0)).unwrap();
        assert_eq!(sys.states, vec![FlatState::Plain(0), FlatState::Plain(1)]);
        assert_eq!(sys.to_pointed(), two_lts().reachable(0).unwrap());
    }

    #[test]
    fn bad_roots_are_rejected() {
        let spec = parse_spec::<Q>(PAR).unwrap();
        assert!(synthesize(&spec, &two_lts(), FlatState::OpApp("par".into(), vec![0])).is_err());
        assert!(synthesize(&spec, &two_lts(), FlatState::Plain(9)).is_err());
        assert!(matches!(
            synthesize(&spec, &stream(&[(0, 0)]), FlatState::Plain(0)),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn weighted_aggregation() {
        let spec = parse_spec::<Q>(
            "behavior wts labels {a} nat-plus\nop f/1\nx -a,u-> y --- f(x) -a,u-> f(y)\nx -a,u-> y --- f(x) -a,u + u-> y\n",
        )
        .unwrap();
        let alpha = Alphabet::new(["a"]).unwrap();
        let w = |n: i64| Weight::Finite(int(n));
        let base = FiniteCoalgebra::<Q>::new(
            FunctorKind::Wts(alpha, crate::behaviors::Monoid::NatPlus),
            vec!["s".into(), "t".into()],
            vec![
                Observation::Wts(BTreeMap::from([(0, BTreeMap::from([(1, w(2))]))])),
                Observation::Wts(BTreeMap::new()),
            ],
        );
        let ob = lambda_step(&spec, &base, &FlatState::OpApp("f".into(), vec![0])).unwrap();
        let expected = BTreeMap::from([(
            0,
            BTreeMap::from([(FlatState::Plain(1), w(4)), (FlatState::OpApp("f".into(), vec![1]), w(2))]),
        )]);
        assert_eq!(ob, Observation::Wts(expected));
    }

    #[test]
    fn eval_term_leaf_and_constants() {
        let spec = parse_spec::<Q>("behavior lts labels {a}\nop nil/0\nop pre/1\n--- pre(x) -a-> x\n").unwrap();
        let t = crate::sosdsl::parse_term("pre(pre(nil))").unwrap();
        let p = eval_term(&spec, &BTreeMap::new(), &t, false).unwrap();
        assert_eq!(p.system.len(), 3);
        assert!(eval_term(&spec, &BTreeMap::new(), &Term::Var("zz".into()), false).is_err());
    }
}
