//! Finite coalgebras for the five behaviour functors.
//!
//! | kind     | one-step observation of a state                         |
//! |----------|---------------------------------------------------------|
//! | `stream` | an output value and a single successor                  |
//! | `dfa`    | an accept bit and exactly one successor per label       |
//! | `lts`    | a finite set of `(label, successor)` pairs              |
//! | `nda`    | an accept bit and a finite successor set per label      |
//! | `wts`    | per label, a finitely supported map successor → weight  |
//!
//! States are dense indices into the coalgebra; names exist only for I/O.

mod dot;
mod json;
mod monoid;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

pub use dot::to_dot;
pub use json::{from_json, from_json_value, to_json, to_json_value, SystemFile};
pub use monoid::{Monoid, Weight};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type StateId = usize;
pub type Label = usize;

/// A finite, duplicate-free, nonempty set of labels.
#[derive(Clone, Debug)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, Label>,
}

impl Alphabet {
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::input("alphabet must be nonempty"));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate label `{l}` in alphabet")));
            }
        }
        Ok(Alphabet { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<Label> {
        self.index.get(label).copied()
    }

    pub fn name(&self, label: Label) -> &str {
        &self.labels[label]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ids(&self) -> std::ops::Range<Label> {
        0..self.labels.len()
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for Alphabet {}

/// The behaviour functor a coalgebra is structured by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctorKind {
    Stream,
    Dfa(Alphabet),
    Lts(Alphabet),
    Nda(Alphabet),
    Wts(Alphabet, Monoid),
}

impl FunctorKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunctorKind::Stream => "stream",
            FunctorKind::Dfa(_) => "dfa",
            FunctorKind::Lts(_) => "lts",
            FunctorKind::Nda(_) => "nda",
            FunctorKind::Wts(..) => "wts",
        }
    }

    pub fn alphabet(&self) -> Option<&Alphabet> {
        match self {
            FunctorKind::Stream => None,
            FunctorKind::Dfa(a) | FunctorKind::Lts(a) | FunctorKind::Nda(a) | FunctorKind::Wts(a, _) => Some(a),
        }
    }

    pub fn monoid(&self) -> Option<Monoid> {
        match self {
            FunctorKind::Wts(_, m) => Some(*m),
            _ => None,
        }
    }

    pub(crate) fn ensure_same(&self, other: &FunctorKind) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: self.to_string(), found: other.to_string() })
        }
    }
}

impl fmt::Display for FunctorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        if let Some(a) = self.alphabet() {
            write!(f, " {{{}}}", a.labels().join(","))?;
        }
        if let Some(m) = self.monoid() {
            write!(f, " {m}")?;
        }
        Ok(())
    }
}

/// One-step behaviour of a state, with successors of type `T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Observation<S, T = StateId> {
    Stream { out: S, next: T },
    Dfa { accept: bool, next: BTreeMap<Label, T> },
    Lts(BTreeSet<(Label, T)>),
    Nda { accept: bool, succ: BTreeMap<Label, BTreeSet<T>> },
    Wts(BTreeMap<Label, BTreeMap<T, Weight<S>>>),
}

impl<S: Scalar, T: Ord + Clone> Observation<S, T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Observation::Stream { .. } => "stream",
            Observation::Dfa { .. } => "dfa",
            Observation::Lts(_) => "lts",
            Observation::Nda { .. } => "nda",
            Observation::Wts(_) => "wts",
        }
    }

    /// Successors in a fixed order: by label, then by target.
    pub fn successors(&self) -> Vec<&T> {
        match self {
            Observation::Stream { next, .. } => vec![next],
            Observation::Dfa { next, .. } => next.values().collect(),
            Observation::Lts(edges) => edges.iter().map(|(_, t)| t).collect(),
            Observation::Nda { succ, .. } => succ.values().flat_map(|s| s.iter()).collect(),
            Observation::Wts(edges) => edges.values().flat_map(|m| m.keys()).collect(),
        }
    }

    /// Re-targets every successor through `f`.
    ///
    /// Targets that `f` identifies are merged the way the functor acts on maps:
    /// sets collapse and weights into a common target are summed in the
    /// monoid of `kind` (unit sums are dropped).
    pub fn map_targets<U: Ord + Clone>(&self, kind: &FunctorKind, mut f: impl FnMut(&T) -> U) -> Observation<S, U> {
        match self {
            Observation::Stream { out, next } => Observation::Stream { out: out.clone(), next: f(next) },
            Observation::Dfa { accept, next } => Observation::Dfa {
                accept: *accept,
                next: next.iter().map(|(a, t)| (*a, f(t))).collect(),
            },
            Observation::Lts(edges) => Observation::Lts(edges.iter().map(|(a, t)| (*a, f(t))).collect()),
            Observation::Nda { accept, succ } => Observation::Nda {
                accept: *accept,
                succ: succ.iter().map(|(a, ts)| (*a, ts.iter().map(&mut f).collect())).collect(),
            },
            Observation::Wts(edges) => {
                let monoid = kind.monoid().unwrap_or(Monoid::RatPlus);
                let mut out = BTreeMap::new();
                for (a, ts) in edges {
                    let mut row: BTreeMap<U, Weight<S>> = BTreeMap::new();
                    for (t, w) in ts {
                        let key = f(t);
                        let acc = row.remove(&key).unwrap_or_else(|| monoid.unit());
                        row.insert(key, monoid.combine(&acc, w));
                    }
                    row.retain(|_, w| !monoid.is_unit(w));
                    if !row.is_empty() {
                        out.insert(*a, row);
                    }
                }
                Observation::Wts(out)
            }
        }
    }

    pub fn accepts(&self) -> Option<bool> {
        match self {
            Observation::Dfa { accept, .. } | Observation::Nda { accept, .. } => Some(*accept),
            _ => None,
        }
    }

    pub fn output(&self) -> Option<&S> {
        match self {
            Observation::Stream { out, .. } => Some(out),
            _ => None,
        }
    }
}

/// What is wrong with a coalgebra, located at a state and field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: Option<StateId>,
    pub field: String,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    ShapeMismatch { expected: &'static str, found: &'static str },
    DanglingState(StateId),
    UnknownLabel(Label),
    PartialSuccessor { missing: String },
    UnitWeightStored,
    WeightOutsideDomain(String),
    CountMismatch { states: usize, observations: usize },
    DuplicateName(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.state {
            Some(s) => write!(f, "state {s}, {}: ", self.field)?,
            None => write!(f, "{}: ", self.field)?,
        }
        match &self.kind {
            ViolationKind::ShapeMismatch { expected, found } => {
                write!(f, "observation shape {found} does not match kind {expected}")
            }
            ViolationKind::DanglingState(t) => write!(f, "dangling state id {t}"),
            ViolationKind::UnknownLabel(l) => write!(f, "unknown label id {l}"),
            ViolationKind::PartialSuccessor { missing } => {
                write!(f, "partial successor function (no successor for `{missing}`)")
            }
            ViolationKind::UnitWeightStored => f.write_str("unit weight stored"),
            ViolationKind::WeightOutsideDomain(w) => write!(f, "weight {w} outside the monoid domain"),
            ViolationKind::CountMismatch { states, observations } => {
                write!(f, "{states} states but {observations} observations")
            }
            ViolationKind::DuplicateName(n) => write!(f, "duplicate state name `{n}`"),
        }
    }
}

/// A finite state set with one observation per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCoalgebra<S> {
    pub kind: FunctorKind,
    pub states: Vec<String>,
    pub obs: Vec<Observation<S>>,
}

impl<S: Scalar> FiniteCoalgebra<S> {
    pub fn new(kind: FunctorKind, states: Vec<String>, obs: Vec<Observation<S>>) -> Self {
        FiniteCoalgebra { kind, states, obs }
    }

    /// Like [`FiniteCoalgebra::new`] but rejects invalid input.
    pub fn try_new(kind: FunctorKind, states: Vec<String>, obs: Vec<Observation<S>>) -> Result<Self> {
        let c = Self::new(kind, states, obs);
        let violations = c.validate();
        if let Some(v) = violations.first() {
            return Err(Error::input(format!("invalid {} system: {v}", c.kind.name())));
        }
        Ok(c)
    }

    pub fn empty(kind: FunctorKind) -> Self {
        Self::new(kind, Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    /// Every invariant violation; an empty list means the system is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.obs.len();
        if self.states.len() != n {
            out.push(Violation {
                state: None,
                field: "states".into(),
                kind: ViolationKind::CountMismatch { states: self.states.len(), observations: n },
            });
        }
        let mut seen = HashSet::new();
        for (i, name) in self.states.iter().enumerate() {
            if !seen.insert(name) {
                out.push(Violation {
                    state: Some(i),
                    field: "name".into(),
                    kind: ViolationKind::DuplicateName(name.clone()),
                });
            }
        }
        let labels = self.kind.alphabet().map_or(0, Alphabet::len);
        for (s, ob) in self.obs.iter().enumerate() {
            let mut push = |field: String, kind: ViolationKind| {
                out.push(Violation { state: Some(s), field, kind })
            };
            let check_target = |field: String, t: StateId, push: &mut dyn FnMut(String, ViolationKind)| {
                if t >= n {
                    push(field, ViolationKind::DanglingState(t));
                }
            };
            let label_field = |a: Label| match self.kind.alphabet() {
                Some(al) if a < al.len() => al.name(a).to_string(),
                _ => format!("#{a}"),
            };
            match (&self.kind, ob) {
                (FunctorKind::Stream, Observation::Stream { next, .. }) => {
                    check_target("next".into(), *next, &mut push);
                }
                (FunctorKind::Dfa(alpha), Observation::Dfa { next, .. }) => {
                    for a in alpha.ids() {
                        if !next.contains_key(&a) {
                            push(
                                "next".into(),
                                ViolationKind::PartialSuccessor { missing: alpha.name(a).to_string() },
                            );
                        }
                    }
                    for (a, t) in next {
                        if *a >= labels {
                            push("next".into(), ViolationKind::UnknownLabel(*a));
                        }
                        check_target(format!("next.{}", label_field(*a)), *t, &mut push);
                    }
                }
                (FunctorKind::Lts(_), Observation::Lts(edges)) => {
                    for (a, t) in edges {
                        if *a >= labels {
                            push("edges".into(), ViolationKind::UnknownLabel(*a));
                        }
                        check_target(format!("edges.{}", label_field(*a)), *t, &mut push);
                    }
                }
                (FunctorKind::Nda(_), Observation::Nda { succ, .. }) => {
                    for (a, ts) in succ {
                        if *a >= labels {
                            push("succ".into(), ViolationKind::UnknownLabel(*a));
                        }
                        for t in ts {
                            check_target(format!("succ.{}", label_field(*a)), *t, &mut push);
                        }
                    }
                }
                (FunctorKind::Wts(_, monoid), Observation::Wts(edges)) => {
                    for (a, ts) in edges {
                        if *a >= labels {
                            push("succ".into(), ViolationKind::UnknownLabel(*a));
                        }
                        for (t, w) in ts {
                            let field = format!("succ.{}.{t}", label_field(*a));
                            check_target(field.clone(), *t, &mut push);
                            if monoid.is_unit(w) {
                                push(field.clone(), ViolationKind::UnitWeightStored);
                            } else if !monoid.contains(w) {
                                push(field, ViolationKind::WeightOutsideDomain(w.to_string()));
                            }
                        }
                    }
                }
                (kind, ob) => push(
                    "obs".into(),
                    ViolationKind::ShapeMismatch { expected: kind.name(), found: ob.kind_name() },
                ),
            }
        }
        out
    }

    /// The subsystem reachable from `s`, in breadth-first discovery order.
    pub fn reachable(&self, s: StateId) -> Result<PointedCoalgebra<S>> {
        if s >= self.len() {
            return Err(Error::input(format!("state {s} out of range (system has {} states)", self.len())));
        }
        let mut order = vec![s];
        let mut new_id: HashMap<StateId, StateId> = HashMap::from([(s, 0)]);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &t in self.obs[x].successors() {
                if !new_id.contains_key(&t) {
                    new_id.insert(t, order.len());
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let states = order.iter().map(|&x| self.states[x].clone()).collect();
        let obs = order
            .iter()
            .map(|&x| self.obs[x].map_targets(&self.kind, |t| new_id[t]))
            .collect();
        Ok(PointedCoalgebra { system: FiniteCoalgebra::new(self.kind.clone(), states, obs), root: 0 })
    }

    /// Places the systems side by side. Returns the union and each system's
    /// state-id offset. Clashing names get a `'` suffix.
    pub fn disjoint_union(kind: &FunctorKind, systems: &[&FiniteCoalgebra<S>]) -> Result<(Self, Vec<usize>)> {
        let mut offsets = Vec::with_capacity(systems.len());
        let mut states = Vec::new();
        let mut obs = Vec::new();
        for c in systems {
            kind.ensure_same(&c.kind)?;
            let offset = obs.len();
            offsets.push(offset);
            states.extend(c.states.iter().cloned());
            obs.extend(c.obs.iter().map(|o| o.map_targets(kind, |t| t + offset)));
        }
        Ok((FiniteCoalgebra::new(kind.clone(), unique_names(states), obs), offsets))
    }
}

/// Makes names unique by appending `'` to later duplicates.
pub(crate) fn unique_names(names: Vec<String>) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::with_capacity(names.len());
    let originals: HashSet<String> = names.iter().cloned().collect();
    names
        .into_iter()
        .map(|n| {
            let mut candidate = n;
            if seen.contains(&candidate) {
                loop {
                    candidate.push('\'');
                    if !seen.contains(&candidate) && !originals.contains(&candidate) {
                        break;
                    }
                }
            }
            seen.insert(candidate.clone());
            candidate
        })
        .collect()
}

/// A finite system with a distinguished root: one element of the rational
/// fixpoint, up to bisimilarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedCoalgebra<S> {
    pub system: FiniteCoalgebra<S>,
    pub root: StateId,
}

impl<S: Scalar> PointedCoalgebra<S> {
    pub fn new(system: FiniteCoalgebra<S>, root: StateId) -> Result<Self> {
        if root >= system.len() {
            return Err(Error::input(format!("root {root} out of range ({} states)", system.len())));
        }
        Ok(PointedCoalgebra { system, root })
    }

    pub fn kind(&self) -> &FunctorKind {
        &self.system.kind
    }

    pub fn reachable(&self) -> PointedCoalgebra<S> {
        self.system.reachable(self.root).expect("root is in range")
    }

    pub fn root_obs(&self) -> &Observation<S> {
        &self.system.obs[self.root]
    }
}
