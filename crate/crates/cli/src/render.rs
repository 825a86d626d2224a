use ratfix::behaviors::Observation;
use ratfix::Pointed;

/// One line per transition of the part reachable from the root, root first.
///
/// `s =v-> t` for streams, `s -a-> t` for labelled steps, `s -a,w-> t` for
/// weighted ones. Accepting automaton states get a trailing `(final)` line.
pub fn describe(p: &Pointed) -> Vec<String> {
    let r = p.reachable();
    let c = &r.system;
    let name = |s: usize| c.states[s].as_str();
    let label = |l| c.kind.alphabet().map_or("?", |a| a.name(l));
    let mut lines = Vec::new();
    for (s, obs) in c.obs.iter().enumerate() {
        match obs {
            Observation::Stream { out, next } => lines.push(format!("{} ={out}-> {}", name(s), name(*next))),
            Observation::Dfa { accept, next } => {
                if *accept {
                    lines.push(format!("{} (final)", name(s)));
                }
                lines.extend(next.iter().map(|(l, t)| format!("{} -{}-> {}", name(s), label(*l), name(*t))));
            }
            Observation::Lts(edges) => {
                lines.extend(edges.iter().map(|(l, t)| format!("{} -{}-> {}", name(s), label(*l), name(*t))));
            }
            Observation::Nda { accept, succ } => {
                if *accept {
                    lines.push(format!("{} (final)", name(s)));
                }
                for (l, ts) in succ {
                    lines.extend(ts.iter().map(|t| format!("{} -{}-> {}", name(s), label(*l), name(*t))));
                }
            }
            Observation::Wts(edges) => {
                for (l, ts) in edges {
                    lines.extend(ts.iter().map(|(t, w)| format!("{} -{},{w}-> {}", name(s), label(*l), name(*t))));
                }
            }
        }
    }
    lines
}
