use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::*;
use crate::behaviors::{Alphabet, FunctorKind, Monoid};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// A format side condition that a specification breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecViolation {
    pub span: Option<Span>,
    pub severity: Severity,
    /// Stable short identifier, e.g. `non-exhaustive-trigger`.
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.span {
            Some(s) => write!(f, "{s}: {sev}[{}]: {}", self.code, self.message),
            None => write!(f, "{sev}[{}]: {}", self.code, self.message),
        }
    }
}

struct Checker<'a, S> {
    doc: &'a SpecDoc<S>,
    out: Vec<SpecViolation>,
}

impl<S: Scalar> Checker<'_, S> {
    fn error(&mut self, span: Span, code: &'static str, message: String) {
        self.out.push(SpecViolation { span: Some(span), severity: Severity::Error, code, message });
    }

    fn warn(&mut self, span: Span, code: &'static str, message: String) {
        self.out.push(SpecViolation { span: Some(span), severity: Severity::Warning, code, message });
    }

    fn alphabet(&self) -> Option<&Alphabet> {
        self.doc.kind.alphabet()
    }

    fn head(&mut self, head: &Head, span: Span) {
        match self.doc.signature.arity(&head.op) {
            None => self.error(span, "unknown-operator", format!("rule for undeclared operator `{}`", head.op)),
            Some(n) if n != head.vars.len() => self.error(
                span,
                "arity-mismatch",
                format!("`{}` has arity {n} but the rule binds {} arguments", head.op, head.vars.len()),
            ),
            _ => {}
        }
    }

    /// Checks that `vars` are pairwise distinct.
    fn distinct<'v>(&mut self, span: Span, vars: impl IntoIterator<Item = &'v str>) {
        let mut seen = BTreeSet::new();
        for v in vars {
            if !seen.insert(v) {
                self.error(span, "duplicate-variable", format!("variable `{v}` is bound twice"));
            }
        }
    }

    fn argument(&mut self, head: &Head, var: &str, span: Span) {
        if head.position(var).is_none() {
            self.error(
                span,
                "unknown-argument",
                format!("premise on `{var}`, which is not an argument of `{}`", head),
            );
        }
    }

    fn label(&mut self, label: &str, span: Span) {
        if let Some(a) = self.alphabet() {
            if a.index_of(label).is_none() {
                self.error(span, "unknown-label", format!("label `{label}` is not in the alphabet"));
            }
        }
    }

    fn target(&mut self, target: &FlatTerm, scope: &BTreeSet<&str>, span: Span) {
        for v in target.vars() {
            if !scope.contains(v) {
                self.error(span, "unbound-variable", format!("target uses unbound variable `{v}`"));
            }
        }
        if let FlatTerm::App(op, vars) = target {
            match self.doc.signature.arity(op) {
                None => self.error(span, "unknown-operator", format!("target uses undeclared operator `{op}`")),
                Some(n) if n != vars.len() => self.error(
                    span,
                    "arity-mismatch",
                    format!("target applies `{op}` (arity {n}) to {} arguments", vars.len()),
                ),
                _ => {}
            }
        }
    }

    fn stream_rule(&mut self, r: &StreamRule<S>) {
        self.head(&r.head, r.span);
        let mut seen_args = BTreeSet::new();
        for p in &r.premises {
            self.argument(&r.head, &p.var, r.span);
            if !seen_args.insert(p.var.as_str()) {
                self.error(r.span, "duplicate-premise", format!("two premises on `{}`", p.var));
            }
        }
        self.distinct(
            r.span,
            r.head
                .vars
                .iter()
                .map(String::as_str)
                .chain(r.premises.iter().map(|p| p.tail.as_str())),
        );
        self.distinct(r.span, r.premises.iter().map(|p| p.value.as_str()));
        let values: BTreeSet<&str> = r.premises.iter().map(|p| p.value.as_str()).collect();
        let mut exprs: Vec<&ValueExpr<S>> = vec![&r.out];
        for c in r.guard.comparisons() {
            exprs.push(&c.lhs);
            exprs.push(&c.rhs);
        }
        for e in exprs {
            for v in e.vars() {
                if !values.contains(v) {
                    self.error(r.span, "unbound-value", format!("value variable `{v}` is not bound by a premise"));
                }
            }
            if e.uses_index() {
                self.error(r.span, "indexed-family", "family index outside the gsos dialect".into());
            }
        }
        let scope: BTreeSet<&str> = r
            .head
            .vars
            .iter()
            .map(String::as_str)
            .chain(r.premises.iter().map(|p| p.tail.as_str()))
            .collect();
        self.target(&r.target, &scope, r.span);
    }

    fn transition_rule(&mut self, r: &TransitionRule) {
        self.head(&r.head, r.span);
        for p in &r.positive {
            self.argument(&r.head, &p.var, r.span);
            self.label(&p.label, r.span);
        }
        for n in &r.negative {
            self.argument(&r.head, &n.var, r.span);
            self.label(&n.label, r.span);
        }
        self.label(&r.label, r.span);
        self.distinct(
            r.span,
            r.head.vars.iter().chain(r.positive.iter().map(|p| &p.target)).map(String::as_str),
        );
        let scope: BTreeSet<&str> =
            r.head.vars.iter().chain(r.positive.iter().map(|p| &p.target)).map(String::as_str).collect();
        self.target(&r.target, &scope, r.span);
        if r.is_vacuous() {
            self.warn(
                r.span,
                "vacuous-rule",
                "rule has a positive and a negative premise on the same argument and label (never triggered)".into(),
            );
        }
        if matches!(self.doc.kind, FunctorKind::Dfa(_)) && !r.negative.is_empty() {
            self.error(
                r.span,
                "negative-premise",
                "negative premises never hold in a deterministic automaton".into(),
            );
        }
    }

    fn output_rule(&mut self, r: &OutputRule) {
        self.head(&r.head, r.span);
        self.distinct(r.span, r.head.vars.iter().map(String::as_str));
        let mut seen = BTreeSet::new();
        for v in &r.finals {
            self.argument(&r.head, v, r.span);
            if !seen.insert(v) {
                self.error(r.span, "duplicate-variable", format!("`{v}` listed twice in the final set"));
            }
        }
    }

    fn weight_atom(&mut self, monoid: Monoid, atom: &WeightAtom<S>, scope: &BTreeSet<&str>, span: Span) {
        match atom {
            WeightAtom::Var(v) if !scope.contains(v.as_str()) => {
                self.error(span, "unbound-weight", format!("weight variable `{v}` is not bound"))
            }
            WeightAtom::Const(w) if !monoid.contains(w) => {
                self.error(span, "weight-domain", format!("constant {w} is outside {monoid}"))
            }
            _ => {}
        }
    }

    fn weighted_rule(&mut self, r: &WtsRule<S>, monoid: Monoid) {
        self.head(&r.head, r.span);
        for p in &r.weighted {
            self.argument(&r.head, &p.var, r.span);
            self.label(&p.label, r.span);
        }
        for t in &r.totals {
            self.argument(&r.head, &t.var, r.span);
            self.label(&t.label, r.span);
        }
        self.label(&r.label, r.span);
        let total_vars: Vec<&str> = r
            .totals
            .iter()
            .filter_map(|t| match &t.pattern {
                WeightAtom::Var(v) => Some(v.as_str()),
                WeightAtom::Const(_) => None,
            })
            .collect();
        self.distinct(
            r.span,
            r.head
                .vars
                .iter()
                .chain(r.weighted.iter().map(|p| &p.target))
                .chain(r.weighted.iter().map(|p| &p.weight))
                .map(String::as_str)
                .chain(total_vars.iter().copied()),
        );
        let totals: BTreeSet<&str> = total_vars.iter().copied().collect();
        for t in &r.totals {
            self.weight_atom(monoid, &t.pattern, &totals, r.span);
        }
        if !r.guard.comparisons().is_empty() && !monoid.is_ordered() {
            self.error(r.span, "unordered-guard", format!("guards need an ordered monoid; {monoid} is unordered"));
        }
        for c in r.guard.comparisons() {
            for atom in c.lhs.terms.iter().chain(&c.rhs.terms) {
                self.weight_atom(monoid, atom, &totals, r.span);
            }
        }
        let weights: BTreeSet<&str> = r.weighted.iter().map(|p| p.weight.as_str()).chain(totals.iter().copied()).collect();
        for atom in &r.weight.terms {
            self.weight_atom(monoid, atom, &weights, r.span);
        }
        if !monoid.is_idempotent() && !self.multi_additive(r) {
            self.error(
                r.span,
                "not-multi-additive",
                format!(
                    "weight expression `{}` is not multi-additive over {monoid}: with weighted premises it must be \
                     k·u for the single premise weight u; without them it may combine constants and total weights",
                    r.weight
                ),
            );
        }
        let scope: BTreeSet<&str> =
            r.head.vars.iter().chain(r.weighted.iter().map(|p| &p.target)).map(String::as_str).collect();
        self.target(&r.target, &scope, r.span);
    }

    /// Over a non-idempotent monoid a derivation-wise sum only agrees with the
    /// block-wise sum if the conclusion weight is additive in the single
    /// transition it reads.
    fn multi_additive(&self, r: &WtsRule<S>) -> bool {
        match r.weighted.as_slice() {
            [] => true,
            [p] => r.weight.terms.iter().all(|t| matches!(t, WeightAtom::Var(v) if *v == p.weight)),
            _ => false,
        }
    }

    fn per_operator(&mut self) {
        let doc = self.doc;
        for (op, &arity) in &doc.signature.ops {
            match &doc.kind {
                FunctorKind::Stream => {
                    let rules: Vec<&StreamRule<S>> = doc.stream_rules(op).collect();
                    match rules.last() {
                        None => self.out.push(SpecViolation {
                            span: None,
                            severity: Severity::Error,
                            code: "non-exhaustive-trigger",
                            message: format!("operator `{op}` has no rules"),
                        }),
                        Some(last) if !last.guard.is_catch_all() => self.error(
                            last.span,
                            "non-exhaustive-trigger",
                            format!("the last rule of `{op}` is guarded; end the list with `otherwise` or an unguarded rule"),
                        ),
                        _ => {}
                    }
                    for (i, r) in rules.iter().enumerate().take(rules.len().saturating_sub(1)) {
                        match r.guard {
                            Guard::Otherwise => self.error(
                                r.span,
                                "misplaced-otherwise",
                                format!("`otherwise` must be the last rule of `{op}`"),
                            ),
                            Guard::Always => self.warn(
                                rules[i + 1].span,
                                "unreachable-rule",
                                format!("rules of `{op}` after an unguarded rule are never selected"),
                            ),
                            Guard::When(_) => {}
                        }
                    }
                }
                FunctorKind::Dfa(alphabet) => {
                    for label in alphabet.labels() {
                        let n = doc.transition_rules_with(op, label).count();
                        if n != 1 {
                            self.out.push(SpecViolation {
                                span: doc.transition_rules_with(op, label).nth(1).map(|r| r.span),
                                severity: Severity::Error,
                                code: if n == 0 { "non-exhaustive-trigger" } else { "non-deterministic" },
                                message: format!(
                                    "a deterministic operator needs exactly one rule per label; `{op}` has {n} for `{label}`"
                                ),
                            });
                        }
                    }
                    self.output_overlap(op, arity);
                }
                FunctorKind::Nda(_) => self.output_overlap(op, arity),
                _ => {}
            }
        }
    }

    /// At most one output rule may fire on any finality tuple.
    fn output_overlap(&mut self, op: &str, _arity: usize) {
        let doc = self.doc;
        let rules: Vec<&OutputRule> = doc.output_rules(op).collect();
        for (i, a) in rules.iter().enumerate() {
            for b in &rules[i + 1..] {
                let overlap = match doc.output_semantics {
                    OutputSemantics::MentionedOnly => true,
                    OutputSemantics::Exact => {
                        let fa: BTreeSet<&String> = a.finals.iter().collect();
                        let fb: BTreeSet<&String> = b.finals.iter().collect();
                        let pa: BTreeSet<Option<usize>> = fa.iter().map(|v| a.head.position(v)).collect();
                        let pb: BTreeSet<Option<usize>> = fb.iter().map(|v| b.head.position(v)).collect();
                        pa == pb
                    }
                };
                if overlap {
                    self.error(
                        b.span,
                        "overlapping-output",
                        format!(
                            "output rules of `{op}` at {} and {} trigger on the same finality tuple ({} semantics)",
                            a.span,
                            b.span,
                            doc.output_semantics.name()
                        ),
                    );
                }
            }
        }
    }
}

/// Checks the format side conditions. An empty result, or warnings only,
/// means the specification is bipointed.
pub fn validate_spec<S: Scalar>(doc: &SpecDoc<S>) -> Vec<SpecViolation> {
    let mut c = Checker { doc, out: Vec::new() };
    for r in doc.rules() {
        match (r, &doc.kind) {
            (Rule::Stream(r), FunctorKind::Stream) => c.stream_rule(r),
            (Rule::Transition(r), FunctorKind::Lts(_) | FunctorKind::Nda(_) | FunctorKind::Dfa(_)) => {
                c.transition_rule(r)
            }
            (Rule::Output(r), FunctorKind::Nda(_) | FunctorKind::Dfa(_)) => c.output_rule(r),
            (Rule::Weighted(r), FunctorKind::Wts(_, m)) => c.weighted_rule(r, *m),
            (r, kind) => c.error(r.span(), "format-mismatch", format!("rule does not belong to a {} specification", kind.name())),
        }
    }
    c.per_operator();
    c.out.sort_by_key(|v| (v.span, std::cmp::Reverse(v.severity)));
    c.out
}

/// True when only warnings were reported.
pub fn is_bipointed(violations: &[SpecViolation]) -> bool {
    violations.iter().all(|v| v.severity == Severity::Warning)
}

#[allow(dead_code)]
fn codes(v: &[SpecViolation]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for x in v {
        *m.entry(x.code).or_insert(0) += 1;
    }
    m
}
