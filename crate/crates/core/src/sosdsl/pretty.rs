//! Pretty-printing back to the rule notation. Output re-parses to the same
//! document (up to source locations); `for` binders are printed expanded.

use std::fmt::{self, Display, Formatter};

use super::*;
use crate::behaviors::FunctorKind;
use crate::scalar::Scalar;

fn list(items: &[String]) -> String {
    items.join(",")
}

impl Display for Head {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.op, list(&self.vars))
    }
}

impl Display for FlatTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            FlatTerm::Var(v) => f.write_str(v),
            FlatTerm::App(op, vs) => write!(f, "{op}({})", list(vs)),
        }
    }
}

impl<S: Scalar> Display for ValueExpr<S> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Const(c) => write!(f, "{c}"),
            ValueExpr::Var(v) => f.write_str(v),
            ValueExpr::Index => f.write_str("n"),
            ValueExpr::Neg(e) => write!(f, "-({e})"),
            ValueExpr::Add(a, b) => write!(f, "({a} + {b})"),
            ValueExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            ValueExpr::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl<S: Scalar> Display for WeightAtom<S> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            WeightAtom::Var(v) => f.write_str(v),
            WeightAtom::Const(w) => write!(f, "{w}"),
        }
    }
}

impl<S: Scalar> Display for WeightExpr<S> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<E: Display> Display for Guard<E> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Always => Ok(()),
            Guard::Otherwise => f.write_str(" otherwise"),
            Guard::When(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| format!("{} {} {}", c.lhs, c.op.symbol(), c.rhs)).collect();
                write!(f, " when {}", parts.join(", "))
            }
        }
    }
}

impl<S: Scalar> Display for Rule<S> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Stream(r) => {
                for p in &r.premises {
                    write!(f, "{} ={}-> {}  ", p.var, p.value, p.tail)?;
                }
                write!(f, "{} --- {} ={}-> {}", r.guard.to_string().trim_start(), r.head, r.out, r.target)
            }
            Rule::Transition(r) => {
                for p in &r.positive {
                    write!(f, "{} -{}-> {}  ", p.var, p.label, p.target)?;
                }
                for n in &r.negative {
                    write!(f, "{} -{}-/->  ", n.var, n.label)?;
                }
                write!(f, "--- {} -{}-> {}", r.head, r.label, r.target)
            }
            Rule::Output(r) => write!(f, "output {} final when final {{{}}}", r.head, list(&r.finals)),
            Rule::Weighted(r) => {
                for p in &r.weighted {
                    write!(f, "{} -{},{}-> {}  ", p.var, p.label, p.weight, p.target)?;
                }
                for t in &r.totals {
                    write!(f, "{} ={}=> {}  ", t.var, t.label, t.pattern)?;
                }
                write!(f, "{} --- {} -{},{}-> {}", r.guard.to_string().trim_start(), r.head, r.label, r.weight, r.target)
            }
        }
    }
}

impl<S: Scalar> Display for SpecDoc<S> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "behavior {}", self.kind.name())?;
        if let Some(a) = self.kind.alphabet() {
            write!(f, " labels {{{}}}", a.labels().join(", "))?;
        }
        if let Some(m) = self.kind.monoid() {
            write!(f, " monoid {m}")?;
        }
        if matches!(self.kind, FunctorKind::Nda(_) | FunctorKind::Dfa(_)) {
            write!(f, " output_semantics {}", self.output_semantics.name())?;
        }
        writeln!(f)?;
        for (op, arity) in &self.signature.ops {
            writeln!(f, "op {op}/{arity}")?;
        }
        for r in self.rules() {
            writeln!(f, "{}", r.to_string().trim_start())?;
        }
        Ok(())
    }
}
