//! Rule specifications in a small SOS notation.
//!
//! A specification starts with a `behavior` header naming the functor, declares
//! its operators with `op name/arity`, and lists rules of the form
//! `premises [guard] --- conclusion`. Conclusions must target a variable or one
//! operator applied to variables (a *flat* term); that restriction is what keeps
//! the semantics of every operator inside the finite systems.
//!
//! ```text
//! behavior stream
//! op zip/2
//! x1 =r1-> x1'   x2 =r2-> x2'
//! ---
//! zip(x1,x2) =r1-> zip(x2,x1')
//! ```
//!
//! Transition formats (`lts`, `nda`, `dfa`) use `x -a-> y` and `x -a-/->`
//! premises; `wts` uses `x -a,u-> y` for a weighted transition and `x =a=> w`
//! for the total `a`-weight out of `x`. `nda`/`dfa` add output rules
//! `output f(x,y) final when final {x,y}`. A rule may be prefixed with
//! `for a in {l1, l2}` or `for (a, b) in {(l1, l2), ...}`, which instantiates
//! it once per tuple of labels.
//!
//! ## Output-rule triggering
//!
//! An output rule with final set `F` fires on the argument finality bits `o`
//! under one of two readings, chosen with `output_semantics` in the header:
//!
//! * `exact` (default): `o_i = 1` exactly for `i ∈ F`; unmentioned arguments
//!   must be non-final.
//! * `mentioned-only`: `o_i = 1` for `i ∈ F`; unmentioned arguments are
//!   unconstrained. Under this reading any two rules of one operator fire
//!   together on the all-final tuple, so at most one output rule per operator
//!   is allowed.

pub(crate) mod lexer;
mod parser;
mod pretty;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

pub use parser::{parse_spec, parse_term};
pub(crate) use parser::{Parser, RawTerm};
pub use validate::{is_bipointed, validate_spec, Severity, SpecViolation};

use crate::behaviors::{FunctorKind, Monoid, Weight};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parse error with its location and, when known, the tokens that would
/// have been accepted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into(), expected: Vec::new() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Operator symbols with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub ops: BTreeMap<String, usize>,
}

impl Signature {
    pub fn arity(&self, op: &str) -> Option<usize> {
        self.ops.get(op).copied()
    }

    /// `Σ_g n^{arity(g)} + n`: the size of the flat-term carrier over `n` states.
    pub fn flat_carrier_size(&self, n: usize) -> u128 {
        let n = n as u128;
        self.ops
            .values()
            .fold(n, |acc, &k| acc.saturating_add(n.saturating_pow(k.min(u32::MAX as usize) as u32)))
    }
}

/// How output rules read argument finality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OutputSemantics {
    #[default]
    Exact,
    MentionedOnly,
}

impl OutputSemantics {
    pub fn name(self) -> &'static str {
        match self {
            OutputSemantics::Exact => "exact",
            OutputSemantics::MentionedOnly => "mentioned-only",
        }
    }
}

/// `f(x1, ..., xn)` on the left of a conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Head {
    pub op: String,
    pub vars: Vec<String>,
}

impl Head {
    pub fn position(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }
}

/// A conclusion target: a variable or one operator over variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatTerm {
    Var(String),
    App(String, Vec<String>),
}

impl FlatTerm {
    pub fn vars(&self) -> Vec<&str> {
        match self {
            FlatTerm::Var(v) => vec![v],
            FlatTerm::App(_, vs) => vs.iter().map(String::as_str).collect(),
        }
    }
}

/// Arithmetic over rational constants and bound value variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueExpr<S> {
    Const(S),
    Var(String),
    /// The integer parameter of an indexed operator family.
    Index,
    Neg(Box<ValueExpr<S>>),
    Add(Box<ValueExpr<S>>, Box<ValueExpr<S>>),
    Sub(Box<ValueExpr<S>>, Box<ValueExpr<S>>),
    Mul(Box<ValueExpr<S>>, Box<ValueExpr<S>>),
}

impl<S: Scalar> ValueExpr<S> {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<S>, index: Option<u64>) -> Result<S> {
        Ok(match self {
            ValueExpr::Const(c) => c.clone(),
            ValueExpr::Var(v) => lookup(v).ok_or_else(|| Error::internal(format!("unbound value variable `{v}`")))?,
            ValueExpr::Index => S::from_index(index.ok_or_else(|| Error::internal("family index used outside a family"))?),
            ValueExpr::Neg(e) => -e.eval(lookup, index)?,
            ValueExpr::Add(a, b) => a.eval(lookup, index)?.add_ref(&b.eval(lookup, index)?),
            ValueExpr::Sub(a, b) => a.eval(lookup, index)?.sub_ref(&b.eval(lookup, index)?),
            ValueExpr::Mul(a, b) => a.eval(lookup, index)?.mul_ref(&b.eval(lookup, index)?),
        })
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ValueExpr::Var(v) => out.push(v),
            ValueExpr::Const(_) | ValueExpr::Index => {}
            ValueExpr::Neg(e) => e.collect_vars(out),
            ValueExpr::Add(a, b) | ValueExpr::Sub(a, b) | ValueExpr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn uses_index(&self) -> bool {
        match self {
            ValueExpr::Index => true,
            ValueExpr::Const(_) | ValueExpr::Var(_) => false,
            ValueExpr::Neg(e) => e.uses_index(),
            ValueExpr::Add(a, b) | ValueExpr::Sub(a, b) | ValueExpr::Mul(a, b) => a.uses_index() || b.uses_index(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison<E> {
    pub lhs: E,
    pub op: CmpOp,
    pub rhs: E,
}

/// Rule applicability condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard<E> {
    /// No guard written: the rule always applies.
    Always,
    /// Conjunction of comparisons.
    When(Vec<Comparison<E>>),
    /// Applies when no earlier rule of the operator did.
    Otherwise,
}

impl<E> Guard<E> {
    pub fn is_catch_all(&self) -> bool {
        matches!(self, Guard::Always | Guard::Otherwise)
    }

    pub fn comparisons(&self) -> &[Comparison<E>] {
        match self {
            Guard::When(cs) => cs,
            _ => &[],
        }
    }
}

/// `x =r-> x'`: argument `x` outputs `r` and continues as `x'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamPremise {
    pub var: String,
    pub value: String,
    pub tail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamRule<S> {
    pub head: Head,
    pub premises: Vec<StreamPremise>,
    pub guard: Guard<ValueExpr<S>>,
    pub out: ValueExpr<S>,
    pub target: FlatTerm,
    pub span: Span,
}

/// `x -a-> y`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivePremise {
    pub var: String,
    pub label: String,
    pub target: String,
}

/// `x -a-/->`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativePremise {
    pub var: String,
    pub label: String,
}

/// A transition rule for `lts`, `nda` and `dfa` specifications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionRule {
    pub head: Head,
    pub positive: Vec<PositivePremise>,
    pub negative: Vec<NegativePremise>,
    pub label: String,
    pub target: FlatTerm,
    pub span: Span,
}

impl TransitionRule {
    /// A positive and a negative premise on the same argument and label.
    pub fn is_vacuous(&self) -> bool {
        self.negative
            .iter()
            .any(|n| self.positive.iter().any(|p| p.var == n.var && p.label == n.label))
    }
}

/// `output f(x1..xn) final when final {xi, ...}`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputRule {
    pub head: Head,
    pub finals: Vec<String>,
    pub span: Span,
}

impl OutputRule {
    /// Whether the rule fires on the given argument finality bits.
    pub fn triggers(&self, semantics: OutputSemantics, finality: &[bool]) -> bool {
        let mentioned: Vec<usize> = self.finals.iter().filter_map(|v| self.head.position(v)).collect();
        match semantics {
            OutputSemantics::MentionedOnly => mentioned.iter().all(|&i| finality[i]),
            OutputSemantics::Exact => {
                (0..finality.len()).all(|i| finality[i] == mentioned.contains(&i))
            }
        }
    }
}

/// `x -a,u-> y`: one `a`-transition of `x` with weight `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPremise {
    pub var: String,
    pub label: String,
    pub weight: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightAtom<S> {
    Var(String),
    Const(Weight<S>),
}

/// `x =a=> w`: the monoid sum of all `a`-weights out of `x` matches `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalPremise<S> {
    pub var: String,
    pub label: String,
    pub pattern: WeightAtom<S>,
}

/// A monoid sum of weight variables and constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightExpr<S> {
    pub terms: Vec<WeightAtom<S>>,
}

impl<S: Scalar> WeightExpr<S> {
    pub fn eval(&self, monoid: Monoid, lookup: &dyn Fn(&str) -> Option<Weight<S>>) -> Result<Weight<S>> {
        let mut acc = monoid.unit();
        for t in &self.terms {
            let w = match t {
                WeightAtom::Const(c) => c.clone(),
                WeightAtom::Var(v) => lookup(v).ok_or_else(|| Error::internal(format!("unbound weight variable `{v}`")))?,
            };
            acc = monoid.combine(&acc, &w);
        }
        Ok(acc)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter_map(|t| match t {
            WeightAtom::Var(v) => Some(v.as_str()),
            WeightAtom::Const(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WtsRule<S> {
    pub head: Head,
    pub weighted: Vec<WeightedPremise>,
    pub totals: Vec<TotalPremise<S>>,
    pub guard: Guard<WeightExpr<S>>,
    pub label: String,
    pub weight: WeightExpr<S>,
    pub target: FlatTerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule<S> {
    Stream(StreamRule<S>),
    Transition(TransitionRule),
    Output(OutputRule),
    Weighted(WtsRule<S>),
}

impl<S> Rule<S> {
    pub fn head(&self) -> &Head {
        match self {
            Rule::Stream(r) => &r.head,
            Rule::Transition(r) => &r.head,
            Rule::Output(r) => &r.head,
            Rule::Weighted(r) => &r.head,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Rule::Stream(r) => r.span,
            Rule::Transition(r) => r.span,
            Rule::Output(r) => r.span,
            Rule::Weighted(r) => r.span,
        }
    }

    fn span_mut(&mut self) -> &mut Span {
        match self {
            Rule::Stream(r) => &mut r.span,
            Rule::Transition(r) => &mut r.span,
            Rule::Output(r) => &mut r.span,
            Rule::Weighted(r) => &mut r.span,
        }
    }
}

/// A parsed specification with its rules indexed by trigger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecDoc<S> {
    pub kind: FunctorKind,
    pub signature: Signature,
    pub output_semantics: OutputSemantics,
    rules: Vec<Rule<S>>,
    by_op: BTreeMap<String, Vec<usize>>,
}

impl<S: Scalar> SpecDoc<S> {
    pub fn new(kind: FunctorKind, signature: Signature, output_semantics: OutputSemantics, rules: Vec<Rule<S>>) -> Self {
        let mut by_op: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_op.entry(r.head().op.clone()).or_default().push(i);
        }
        SpecDoc { kind, signature, output_semantics, rules, by_op }
    }

    pub fn rules(&self) -> &[Rule<S>] {
        &self.rules
    }

    fn for_op<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a Rule<S>> + 'a {
        self.by_op.get(op).into_iter().flatten().map(move |&i| &self.rules[i])
    }

    /// Stream rules of `op` in source order (the order guards are tried in).
    pub fn stream_rules<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a StreamRule<S>> + 'a {
        self.for_op(op).filter_map(|r| match r {
            Rule::Stream(r) => Some(r),
            _ => None,
        })
    }

    pub fn transition_rules<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a TransitionRule> + 'a {
        self.for_op(op).filter_map(|r| match r {
            Rule::Transition(r) => Some(r),
            _ => None,
        })
    }

    /// Transition rules of `op` whose conclusion carries `label`.
    pub fn transition_rules_with<'a>(&'a self, op: &str, label: &'a str) -> impl Iterator<Item = &'a TransitionRule> + 'a {
        self.transition_rules(op).filter(move |r| r.label == label)
    }

    pub fn output_rules<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a OutputRule> + 'a {
        self.for_op(op).filter_map(|r| match r {
            Rule::Output(r) => Some(r),
            _ => None,
        })
    }

    pub fn weighted_rules<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a WtsRule<S>> + 'a {
        self.for_op(op).filter_map(|r| match r {
            Rule::Weighted(r) => Some(r),
            _ => None,
        })
    }

    /// The same document with every source location reset.
    pub fn without_spans(&self) -> Self {
        let mut rules = self.rules.clone();
        for r in &mut rules {
            *r.span_mut() = Span::default();
        }
        SpecDoc::new(self.kind.clone(), self.signature.clone(), self.output_semantics, rules)
    }

    /// Picks the first stream rule of `op` whose guard holds on `values`.
    pub fn stream_rule_select(&self, op: &str, values: &[S]) -> Result<StreamSelection<'_, S>> {
        let arity = self
            .signature
            .arity(op)
            .ok_or_else(|| Error::internal(format!("unknown operator `{op}`")))?;
        if values.len() != arity {
            return Err(Error::internal(format!("{op} has arity {arity}, got {} values", values.len())));
        }
        for (index, rule) in self.stream_rules(op).enumerate() {
            let bindings = value_bindings(rule, values);
            let lookup = |v: &str| bindings.get(v).cloned();
            if guard_holds(&rule.guard, &lookup, None)? {
                let out = rule.out.eval(&lookup, None)?;
                return Ok(StreamSelection { index, rule, out, bindings });
            }
        }
        Err(Error::internal(format!("no rule of `{op}` triggered (specification not total)")))
    }
}

/// The rule chosen for a tuple of argument outputs.
#[derive(Clone, Debug)]
pub struct StreamSelection<'a, S> {
    /// Position among the operator's rules.
    pub index: usize,
    pub rule: &'a StreamRule<S>,
    /// The conclusion's output value.
    pub out: S,
    /// Value variable bindings.
    pub bindings: BTreeMap<String, S>,
}

pub(crate) fn value_bindings<S: Scalar>(rule: &StreamRule<S>, values: &[S]) -> BTreeMap<String, S> {
    rule.premises
        .iter()
        .filter_map(|p| rule.head.position(&p.var).map(|i| (p.value.clone(), values[i].clone())))
        .collect()
}

pub(crate) fn guard_holds<S: Scalar>(
    guard: &Guard<ValueExpr<S>>,
    lookup: &dyn Fn(&str) -> Option<S>,
    index: Option<u64>,
) -> Result<bool> {
    for c in guard.comparisons() {
        let (a, b) = (c.lhs.eval(lookup, index)?, c.rhs.eval(lookup, index)?);
        if !c.op.holds(&a, &b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A closed term over operators and variables, e.g. `par(plus(p, q), r)` or
/// `u[5](z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App { op: String, index: Option<u64>, args: Vec<Term> },
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App { op, index, args } => {
                f.write_str(op)?;
                if let Some(n) = index {
                    write!(f, "[{n}]")?;
                }
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
