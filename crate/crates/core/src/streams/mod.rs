//! Eventually periodic streams and the general GSOS unfolder.
//!
//! A [`Lasso`] `v | w` denotes the stream `v w w w ...`. Finite stream systems
//! denote exactly these streams, so [`lasso_of`] and [`lasso_to_system`]
//! translate between the two. The [`gsos`] submodule runs specifications whose
//! targets may be arbitrary terms; those can leave the lassos, which is what the
//! counterexample demos show.

pub mod gsos;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use gsos::{gsos_unfold, gsos_unfold_with_budget, parse_gsos, GsosStreamSpec, DEFAULT_BUDGET};

use crate::behaviors::{FiniteCoalgebra, FunctorKind, Observation, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Prefix and nonempty cycle of an eventually periodic stream, in canonical
/// form: the cycle is primitive and the prefix as short as possible. Two
/// canonical lassos are equal iff they denote the same stream.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso<S> {
    prefix: Vec<S>,
    cycle: Vec<S>,
}

impl<S: Scalar> Lasso<S> {
    pub fn new(mut prefix: Vec<S>, mut cycle: Vec<S>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::input("a lasso needs a nonempty cycle"));
        }
        let n = cycle.len();
        let period = (1..=n).find(|&d| n % d == 0 && (d..n).all(|i| cycle[i] == cycle[i - d])).unwrap_or(n);
        cycle.truncate(period);
        while prefix.last().is_some_and(|v| v == cycle.last().expect("nonempty")) {
            prefix.pop();
            cycle.rotate_right(1);
        }
        Ok(Lasso { prefix, cycle })
    }

    /// The constant stream `v v v ...`.
    pub fn constant(v: S) -> Self {
        Lasso { prefix: Vec::new(), cycle: vec![v] }
    }

    pub fn prefix(&self) -> &[S] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[S] {
        &self.cycle
    }

    /// `|prefix| + |cycle|`, the number of states of the smallest system.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub(crate) fn normalize(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            i
        } else {
            self.prefix.len() + (i - self.prefix.len()) % self.cycle.len()
        }
    }

    pub fn nth(&self, i: usize) -> &S {
        let i = self.normalize(i);
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<S> {
        (0..n).map(|i| self.nth(i).clone()).collect()
    }
}

impl<S: Scalar> fmt::Display for Lasso<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[S]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        if self.prefix.is_empty() {
            write!(f, "| {}", join(&self.cycle))
        } else {
            write!(f, "{} | {}", join(&self.prefix), join(&self.cycle))
        }
    }
}

impl<S: Scalar> FromStr for Lasso<S> {
    type Err = Error;

    /// Parses `v1,v2 | w1,w2`; the prefix may be empty (`| 0`).
    fn from_str(text: &str) -> Result<Self> {
        let (prefix, cycle) = text
            .split_once('|')
            .ok_or_else(|| Error::input(format!("lasso `{text}` has no `|` between prefix and cycle")))?;
        let values = |part: &str| -> Result<Vec<S>> {
            let part = part.trim();
            if part.is_empty() {
                return Ok(Vec::new());
            }
            part.split(',')
                .map(|v| S::parse_scalar(v).ok_or_else(|| Error::input(format!("invalid rational `{}`", v.trim()))))
                .collect()
        };
        Lasso::new(values(prefix)?, values(cycle)?)
    }
}

/// The stream the root of a stream system produces.
pub fn lasso_of<S: Scalar>(p: &PointedCoalgebra<S>) -> Result<Lasso<S>> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut outs = Vec::new();
    let mut s = p.root;
    loop {
        if let Some(&k) = seen.get(&s) {
            let cycle = outs.split_off(k);
            return Lasso::new(outs, cycle);
        }
        seen.insert(s, outs.len());
        match &p.system.obs[s] {
            Observation::Stream { out, next } => {
                outs.push(out.clone());
                s = *next;
            }
            other => {
                return Err(Error::KindMismatch { expected: "stream".into(), found: other.kind_name().into() })
            }
        }
    }
}

/// The ρ-shaped system with one state per lasso position.
pub fn lasso_to_system<S: Scalar>(l: &Lasso<S>) -> PointedCoalgebra<S> {
    let n = l.size();
    let states = (0..n).map(|i| format!("q{i}")).collect();
    let obs = (0..n)
        .map(|i| Observation::Stream { out: l.nth(i).clone(), next: l.normalize(i + 1) })
        .collect();
    PointedCoalgebra { system: FiniteCoalgebra::new(FunctorKind::Stream, states, obs), root: 0 }
}

/// The first `n` outputs of a stream system from its root.
pub fn unfold_system<S: Scalar>(p: &PointedCoalgebra<S>, n: usize) -> Result<Vec<S>> {
    let mut out = Vec::with_capacity(n);
    let mut s = p.root;
    for _ in 0..n {
        match &p.system.obs[s] {
            Observation::Stream { out: v, next } => {
                out.push(v.clone());
                s = *next;
            }
            other => {
                return Err(Error::KindMismatch { expected: "stream".into(), found: other.kind_name().into() })
            }
        }
    }
    Ok(out)
}

/// The least `(prefix, period)` pair, prefix length first, such that the sample
/// repeats with that period after the prefix and shows the cycle at least
/// twice. Consistency with a finite sample is all this establishes.
pub fn detect_lasso<S: Scalar>(values: &[S]) -> Option<Lasso<S>> {
    let n = values.len();
    for p in 0..n {
        for c in (1..).take_while(|c| p + 2 * c <= n) {
            if (p..n - c).all(|i| values[i] == values[i + c]) {
                return Lasso::new(values[..p].to_vec(), values[p..p + c].to_vec()).ok();
            }
        }
    }
    None
}
