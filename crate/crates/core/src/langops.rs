//! Languages of automata.
//!
//! Bisimilarity of nondeterministic automata is finer than language
//! equivalence; this module works on languages. [`nda_to_dfa`] maps an
//! automaton to the deterministic automaton of its language, on which
//! bisimilarity and language equality coincide ([`language_equiv`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::behaviors::{Alphabet, FiniteCoalgebra, FunctorKind, Label, Observation, PointedCoalgebra, StateId};
use crate::bisim::bisimilar;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A word as a sequence of label ids.
pub type Word = Vec<Label>;

/// Finite set of words in length-lexicographic order (shorter first, then by
/// label order of the alphabet).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WordSet {
    words: Vec<Word>,
}

impl WordSet {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &[Label]) -> bool {
        self.words.binary_search_by(|x| length_lex(x, w)).is_ok()
    }

    /// Words of length at most `n`.
    pub fn truncate(&self, n: usize) -> WordSet {
        WordSet { words: self.words.iter().filter(|w| w.len() <= n).cloned().collect() }
    }

    pub fn union(&self, other: &WordSet) -> WordSet {
        self.words.iter().chain(&other.words).cloned().collect()
    }

    /// Words spelled with label names. Names are concatenated when every
    /// label is a single character and joined with `.` otherwise; the empty
    /// word is `""`.
    pub fn render(&self, alphabet: &Alphabet) -> Vec<String> {
        self.words.iter().map(|w| render_word(w, alphabet)).collect()
    }
}

impl FromIterator<Word> for WordSet {
    fn from_iter<I: IntoIterator<Item = Word>>(iter: I) -> Self {
        let mut words: Vec<Word> = iter.into_iter().collect();
        words.sort_by(|a, b| length_lex(a, b));
        words.dedup();
        WordSet { words }
    }
}

fn length_lex(a: &[Label], b: &[Label]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn render_word(w: &[Label], alphabet: &Alphabet) -> String {
    let sep = if alphabet.labels().iter().all(|l| l.chars().count() == 1) { "" } else { "." };
    w.iter().map(|&a| alphabet.name(a)).collect::<Vec<_>>().join(sep)
}

/// Parses a word written as by [`render_word`].
pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word> {
    let single = alphabet.labels().iter().all(|l| l.chars().count() == 1);
    let parts: Vec<String> = if text.is_empty() {
        Vec::new()
    } else if single {
        text.chars().map(String::from).collect()
    } else {
        text.split('.').map(str::to_string).collect()
    };
    parts
        .iter()
        .map(|p| alphabet.index_of(p).ok_or_else(|| Error::input(format!("`{p}` is not a label"))))
        .collect()
}

fn alphabet_of<S: Scalar>(p: &PointedCoalgebra<S>, want: &'static str) -> Result<Alphabet> {
    match (want, p.kind()) {
        ("dfa", FunctorKind::Dfa(a)) | ("nda", FunctorKind::Nda(a)) => Ok(a.clone()),
        (_, k) => Err(Error::KindMismatch { expected: want.into(), found: k.to_string() }),
    }
}

/// Subset construction from the root. Subsets are numbered in discovery
/// order; the empty subset, when reached, is the rejecting sink.
pub fn nda_to_dfa<S: Scalar>(p: &PointedCoalgebra<S>) -> Result<PointedCoalgebra<S>> {
    let alphabet = alphabet_of(p, "nda")?;
    let c = &p.system;
    let start: BTreeSet<StateId> = BTreeSet::from([p.root]);
    let mut ids: HashMap<BTreeSet<StateId>, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut obs = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let set = subsets[i].clone();
        let mut accept = false;
        let mut next = BTreeMap::new();
        for &x in &set {
            if let Observation::Nda { accept: a, .. } = &c.obs[x] {
                accept |= *a;
            }
        }
        for a in alphabet.ids() {
            let target: BTreeSet<StateId> = set
                .iter()
                .flat_map(|&x| match &c.obs[x] {
                    Observation::Nda { succ, .. } => succ.get(&a).into_iter().flatten().copied().collect::<Vec<_>>(),
                    _ => Vec::new(),
                })
                .collect();
            let id = *ids.entry(target.clone()).or_insert_with(|| {
                subsets.push(target);
                queue.push_back(subsets.len() - 1);
                subsets.len() - 1
            });
            next.insert(a, id);
        }
        obs.push(Observation::Dfa { accept, next });
    }
    let states = subsets
        .iter()
        .map(|s| format!("{{{}}}", s.iter().map(|&x| c.states[x].as_str()).collect::<Vec<_>>().join(",")))
        .collect();
    Ok(PointedCoalgebra { system: FiniteCoalgebra::new(FunctorKind::Dfa(alphabet), states, obs), root: 0 })
}

/// Reads a deterministic automaton as a nondeterministic one with singleton
/// successor sets.
pub fn dfa_as_nda<S: Scalar>(p: &PointedCoalgebra<S>) -> Result<PointedCoalgebra<S>> {
    let alphabet = alphabet_of(p, "dfa")?;
    let obs = p
        .system
        .obs
        .iter()
        .map(|o| match o {
            Observation::Dfa { accept, next } => Observation::Nda {
                accept: *accept,
                succ: next.iter().map(|(a, t)| (*a, BTreeSet::from([*t]))).collect(),
            },
            other => other.clone(),
        })
        .collect();
    Ok(PointedCoalgebra {
        system: FiniteCoalgebra::new(FunctorKind::Nda(alphabet), p.system.states.clone(), obs),
        root: p.root,
    })
}

/// Language equality of two deterministic automata over the same alphabet.
pub fn language_equiv<S: Scalar>(p: &PointedCoalgebra<S>, q: &PointedCoalgebra<S>) -> Result<bool> {
    let (a, b) = (alphabet_of(p, "dfa")?, alphabet_of(q, "dfa")?);
    if a != b {
        return Err(Error::input(format!(
            "alphabets differ: {{{}}} vs {{{}}}",
            a.labels().join(","),
            b.labels().join(",")
        )));
    }
    bisimilar(p, q)
}

/// Accepted words of length at most `max_len`.
pub fn enumerate_words<S: Scalar>(p: &PointedCoalgebra<S>, max_len: usize) -> Result<WordSet> {
    let alphabet = alphabet_of(p, "dfa")?;
    let mut out = Vec::new();
    let mut layer: Vec<(Word, StateId)> = vec![(Vec::new(), p.root)];
    for len in 0..=max_len {
        let mut next_layer = Vec::new();
        for (w, s) in &layer {
            let Observation::Dfa { accept, next } = &p.system.obs[*s] else {
                return Err(Error::internal("non-deterministic observation in a dfa"));
            };
            if *accept {
                out.push(w.clone());
            }
            if len < max_len {
                for a in alphabet.ids() {
                    let mut v = w.clone();
                    v.push(a);
                    next_layer.push((v, next[&a]));
                }
            }
        }
        layer = next_layer;
    }
    Ok(out.into_iter().collect())
}

/// All interleavings of `w` and `v`.
pub fn word_shuffle(w: &[Label], v: &[Label]) -> WordSet {
    fn go(w: &[Label], v: &[Label], acc: &mut Word, out: &mut Vec<Word>) {
        match (w.split_first(), v.split_first()) {
            (None, None) => out.push(acc.clone()),
            (a, b) => {
                if let Some((x, rest)) = a {
                    acc.push(*x);
                    go(rest, v, acc, out);
                    acc.pop();
                }
                if let Some((y, rest)) = b {
                    acc.push(*y);
                    go(w, rest, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(w, v, &mut Vec::with_capacity(w.len() + v.len()), &mut out);
    out.into_iter().collect()
}
