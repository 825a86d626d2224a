//! JSON system files.
//!
//! ```json
//! { "kind": "nda", "alphabet": ["a","b"], "states": ["s0","s1"],
//!   "obs": [ {"accept": false, "succ": {"a": ["s0","s1"]}}, {"accept": true, "succ": {}} ],
//!   "root": "s0" }
//! ```
//!
//! Successors are referenced by state name; rationals are strings `"p/q"` or `"p"`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{Alphabet, FiniteCoalgebra, FunctorKind, Label, Monoid, Observation, StateId, Weight};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monoid: Option<String>,
    pub states: Vec<String>,
    pub obs: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

pub fn from_json<S: Scalar>(text: &str) -> Result<(FiniteCoalgebra<S>, Option<StateId>)> {
    from_json_value(serde_json::from_str(text)?)
}

/// Decodes a system file. The result is not validated.
pub fn from_json_value<S: Scalar>(value: Value) -> Result<(FiniteCoalgebra<S>, Option<StateId>)> {
    let file: SystemFile = serde_json::from_value(value)?;
    let alphabet = || -> Result<Alphabet> {
        Alphabet::new(
            file.alphabet
                .clone()
                .ok_or_else(|| Error::input(format!("kind {} requires an alphabet", file.kind)))?,
        )
    };
    let kind = match file.kind.as_str() {
        "stream" => FunctorKind::Stream,
        "dfa" => FunctorKind::Dfa(alphabet()?),
        "lts" => FunctorKind::Lts(alphabet()?),
        "nda" => FunctorKind::Nda(alphabet()?),
        "wts" => {
            let name = file.monoid.as_deref().ok_or_else(|| Error::input("wts system requires a monoid"))?;
            let m = Monoid::from_name(name).ok_or_else(|| Error::input(format!("unknown monoid `{name}`")))?;
            FunctorKind::Wts(alphabet()?, m)
        }
        other => return Err(Error::input(format!("unknown kind `{other}`"))),
    };
    if file.obs.len() != file.states.len() {
        return Err(Error::input(format!(
            "{} states but {} observations",
            file.states.len(),
            file.obs.len()
        )));
    }
    let index: BTreeMap<&str, StateId> = file.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let ctx = Decoder { kind: &kind, index: &index };
    let obs = file
        .obs
        .iter()
        .enumerate()
        .map(|(i, v)| ctx.observation(v).map_err(|e| Error::input(format!("state `{}`: {e}", file.states[i]))))
        .collect::<Result<Vec<_>>>()?;
    let root = match &file.root {
        Some(r) => Some(ctx.state(&Value::String(r.clone()))?),
        None => None,
    };
    Ok((FiniteCoalgebra::new(kind, file.states, obs), root))
}

struct Decoder<'a> {
    kind: &'a FunctorKind,
    index: &'a BTreeMap<&'a str, StateId>,
}

impl Decoder<'_> {
    fn state(&self, v: &Value) -> Result<StateId> {
        let name = v.as_str().ok_or_else(|| Error::input(format!("expected state name, found {v}")))?;
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown state `{name}`")))
    }

    fn label(&self, name: &str) -> Result<Label> {
        self.kind
            .alphabet()
            .and_then(|a| a.index_of(name))
            .ok_or_else(|| Error::input(format!("unknown label `{name}`")))
    }

    fn scalar<S: Scalar>(v: &Value) -> Result<S> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
            _ => return Err(Error::input(format!("expected rational, found {v}"))),
        };
        S::parse_scalar(&text).ok_or_else(|| Error::input(format!("malformed rational `{text}`")))
    }

    fn weight<S: Scalar>(v: &Value) -> Result<Weight<S>> {
        match v {
            Value::String(s) => Weight::parse(s).ok_or_else(|| Error::input(format!("malformed weight `{s}`"))),
            _ => Self::scalar(v).map(Weight::Finite),
        }
    }

    fn object<'v>(v: &'v Value, what: &str) -> Result<&'v Map<String, Value>> {
        v.as_object().ok_or_else(|| Error::input(format!("expected object for {what}, found {v}")))
    }

    fn field<'v>(obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value> {
        obj.get(key).ok_or_else(|| Error::input(format!("missing field `{key}`")))
    }

    fn observation<S: Scalar>(&self, v: &Value) -> Result<Observation<S>> {
        Ok(match self.kind {
            FunctorKind::Stream => {
                let o = Self::object(v, "stream observation")?;
                Observation::Stream { out: Self::scalar(Self::field(o, "out")?)?, next: self.state(Self::field(o, "next")?)? }
            }
            FunctorKind::Dfa(_) => {
                let o = Self::object(v, "dfa observation")?;
                let accept = Self::field(o, "accept")?.as_bool().ok_or_else(|| Error::input("accept must be a boolean"))?;
                let mut next = BTreeMap::new();
                for (l, t) in Self::object(Self::field(o, "next")?, "next")? {
                    next.insert(self.label(l)?, self.state(t)?);
                }
                Observation::Dfa { accept, next }
            }
            FunctorKind::Lts(_) => {
                let arr = v.as_array().ok_or_else(|| Error::input("lts observation must be an array of [label, state]"))?;
                let mut edges = BTreeSet::new();
                for e in arr {
                    match e.as_array().map(Vec::as_slice) {
                        Some([Value::String(l), t]) => {
                            edges.insert((self.label(l)?, self.state(t)?));
                        }
                        _ => return Err(Error::input(format!("malformed lts edge {e}"))),
                    }
                }
                Observation::Lts(edges)
            }
            FunctorKind::Nda(_) => {
                let o = Self::object(v, "nda observation")?;
                let accept = Self::field(o, "accept")?.as_bool().ok_or_else(|| Error::input("accept must be a boolean"))?;
                let mut succ = BTreeMap::new();
                for (l, ts) in Self::object(Self::field(o, "succ")?, "succ")? {
                    let ts = ts.as_array().ok_or_else(|| Error::input("successor set must be an array"))?;
                    let set = ts.iter().map(|t| self.state(t)).collect::<Result<BTreeSet<_>>>()?;
                    if !set.is_empty() {
                        succ.insert(self.label(l)?, set);
                    }
                }
                Observation::Nda { accept, succ }
            }
            FunctorKind::Wts(..) => {
                let o = Self::object(v, "wts observation")?;
                let mut edges = BTreeMap::new();
                for (l, row) in o {
                    let mut m = BTreeMap::new();
                    for (t, w) in Self::object(row, "weight row")? {
                        m.insert(self.state(&Value::String(t.clone()))?, Self::weight(w)?);
                    }
                    edges.insert(self.label(l)?, m);
                }
                Observation::Wts(edges)
            }
        })
    }
}

pub fn to_json_value<S: Scalar>(c: &FiniteCoalgebra<S>, root: Option<StateId>) -> Value {
    let name = |t: &StateId| c.states[*t].clone();
    let label = |a: &Label| c.kind.alphabet().map(|al| al.name(*a).to_string()).unwrap_or_default();
    let obs = c
        .obs
        .iter()
        .map(|ob| match ob {
            Observation::Stream { out, next } => json!({ "out": out.to_string(), "next": name(next) }),
            Observation::Dfa { accept, next } => {
                let next: Map<String, Value> = next.iter().map(|(a, t)| (label(a), Value::String(name(t)))).collect();
                json!({ "accept": accept, "next": next })
            }
            Observation::Lts(edges) => Value::Array(edges.iter().map(|(a, t)| json!([label(a), name(t)])).collect()),
            Observation::Nda { accept, succ } => {
                let succ: Map<String, Value> = succ
                    .iter()
                    .map(|(a, ts)| (label(a), Value::Array(ts.iter().map(|t| Value::String(name(t))).collect())))
                    .collect();
                json!({ "accept": accept, "succ": succ })
            }
            Observation::Wts(edges) => {
                let rows: Map<String, Value> = edges
                    .iter()
                    .map(|(a, row)| {
                        let row: Map<String, Value> =
                            row.iter().map(|(t, w)| (name(t), Value::String(w.to_string()))).collect();
                        (label(a), Value::Object(row))
                    })
                    .collect();
                Value::Object(rows)
            }
        })
        .collect();
    let file = SystemFile {
        kind: c.kind.name().to_string(),
        alphabet: c.kind.alphabet().map(|a| a.labels().to_vec()),
        monoid: c.kind.monoid().map(|m| m.name().to_string()),
        states: c.states.clone(),
        obs,
        root: root.map(|r| c.states[r].clone()),
    };
    serde_json::to_value(file).expect("system file serializes")
}

/// Pretty-printed JSON; output is deterministic for equal inputs.
pub fn to_json<S: Scalar>(c: &FiniteCoalgebra<S>, root: Option<StateId>) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(c, root)).expect("system file serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn decodes_every_kind() {
        let stream = r#"{"kind":"stream","states":["s0","s1"],
            "obs":[{"out":"3/2","next":"s1"},{"out":2,"next":"s0"}],"root":"s1"}"#;
        let (c, root) = from_json::<Q>(stream).unwrap();
        assert_eq!(root, Some(1));
        assert_eq!(c.obs[0], Observation::Stream { out: ratio(3, 2), next: 1 });

        let dfa = r#"{"kind":"dfa","alphabet":["a"],"states":["s0"],"obs":[{"accept":true,"next":{"a":"s0"}}]}"#;
        assert!(from_json::<Q>(dfa).unwrap().0.validate().is_empty());

        let lts = r#"{"kind":"lts","alphabet":["a","b"],"states":["p","q"],"obs":[[["a","q"]],[]]}"#;
        let (c, _) = from_json::<Q>(lts).unwrap();
        assert_eq!(c.obs[0], Observation::Lts(BTreeSet::from([(0, 1)])));

        let nda = r#"{"kind":"nda","alphabet":["a"],"states":["s0","s1"],
            "obs":[{"accept":false,"succ":{"a":["s0","s1"]}},{"accept":true,"succ":{}}]}"#;
        assert!(from_json::<Q>(nda).unwrap().0.validate().is_empty());

        let wts = r#"{"kind":"wts","alphabet":["a"],"monoid":"min-inf","states":["s0","s1"],
            "obs":[{"a":{"s1":"2"}},{}]}"#;
        let (c, _) = from_json::<Q>(wts).unwrap();
        assert_eq!(c.kind.monoid(), Some(Monoid::MinInf));
        let back = to_json(&c, None);
        assert_eq!(from_json::<Q>(&back).unwrap().0, c);
    }

    #[test]
    fn rejects_bad_references() {
        let bad = r#"{"kind":"stream","states":["s0"],"obs":[{"out":"1","next":"nope"}]}"#;
        assert!(matches!(from_json::<Q>(bad), Err(Error::Input(m)) if m.contains("unknown state")));
        let bad = r#"{"kind":"lts","alphabet":["a"],"states":["s0"],"obs":[[["z","s0"]]]}"#;
        assert!(from_json::<Q>(bad).is_err());
        let bad = r#"{"kind":"wts","alphabet":["a"],"states":[],"obs":[]}"#;
        assert!(from_json::<Q>(bad).is_err());
    }
}
