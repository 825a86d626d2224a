use std::fmt::Write;

use super::{FiniteCoalgebra, Observation, StateId};
use crate::scalar::Scalar;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering. Nodes read `name:out` for streams and `name:accept`
/// bits for automata; edges read `label` or `label,weight`.
pub fn to_dot<S: Scalar>(c: &FiniteCoalgebra<S>, root: Option<StateId>) -> String {
    let mut out = String::from("digraph system {\n");
    let label = |a: &usize| c.kind.alphabet().map(|al| al.name(*a).to_string()).unwrap_or_default();
    for (i, (name, ob)) in c.states.iter().zip(&c.obs).enumerate() {
        let text = match ob {
            Observation::Stream { out, .. } => format!("{name}:{out}"),
            Observation::Dfa { accept, .. } | Observation::Nda { accept, .. } => {
                format!("{name}:{}", u8::from(*accept))
            }
            _ => name.clone(),
        };
        let shape = if root == Some(i) { ", shape=doublecircle" } else { "" };
        writeln!(out, "  n{i} [label={}{shape}];", quote(&text)).unwrap();
    }
    for (i, ob) in c.obs.iter().enumerate() {
        match ob {
            Observation::Stream { next, .. } => writeln!(out, "  n{i} -> n{next};").unwrap(),
            Observation::Dfa { next, .. } => {
                for (a, t) in next {
                    writeln!(out, "  n{i} -> n{t} [label={}];", quote(&label(a))).unwrap();
                }
            }
            Observation::Lts(edges) => {
                for (a, t) in edges {
                    writeln!(out, "  n{i} -> n{t} [label={}];", quote(&label(a))).unwrap();
                }
            }
            Observation::Nda { succ, .. } => {
                for (a, ts) in succ {
                    for t in ts {
                        writeln!(out, "  n{i} -> n{t} [label={}];", quote(&label(a))).unwrap();
                    }
                }
            }
            Observation::Wts(edges) => {
                for (a, row) in edges {
                    for (t, w) in row {
                        writeln!(out, "  n{i} -> n{t} [label={}];", quote(&format!("{},{w}", label(a)))).unwrap();
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{Alphabet, FunctorKind, Monoid, Weight};
    use crate::scalar::int;
    use num_rational::BigRational;
    use std::collections::BTreeMap;

    #[test]
    fn renders_weights_and_root() {
        let c = FiniteCoalgebra::<BigRational>::new(
            FunctorKind::Wts(Alphabet::new(["a"]).unwrap(), Monoid::NatPlus),
            vec!["x".into()],
            vec![Observation::Wts(BTreeMap::from([(0, BTreeMap::from([(0, Weight::Finite(int(2)))]))]))],
        );
        let dot = to_dot(&c, Some(0));
        assert!(dot.contains("n0 [label=\"x\", shape=doublecircle];"));
        assert!(dot.contains("n0 -> n0 [label=\"a,2\"];"));
    }
}
