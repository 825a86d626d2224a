//! Stream rules in the general GSOS shape: conclusions may target arbitrary
//! terms, and an operator may be an integer-indexed family `u[n]`.
//!
//! ```text
//! behavior stream gsos
//! op p/1
//! x =r-> x' --- p(x) =r + 1-> p(p(x'))
//! ```
//!
//! Such specifications are not bipointed and are never accepted by
//! [`validate_spec`](crate::sosdsl::validate_spec). They are evaluated by term
//! rewriting: a configuration is a term whose leaves are positions in lassos,
//! its head is computed bottom-up and its tail is the instantiated target.
//! Configurations can grow without bound, so unfolding runs under a node budget.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::Lasso;
use crate::behaviors::FunctorKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sosdsl::{
    guard_holds, Diagnostic, FlatTerm, Guard, Head, Parser, SpecDoc, Span, StreamPremise, Term, ValueExpr,
};

/// Default limit on the number of nodes in one configuration.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A rule target: any term over operators and the rule's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GsosTerm<S> {
    Var(String),
    App { op: String, index: Option<ValueExpr<S>>, args: Vec<GsosTerm<S>> },
}

impl<S> GsosTerm<S> {
    /// Nesting depth of operators; flat targets have depth at most 1.
    pub fn depth(&self) -> usize {
        match self {
            GsosTerm::Var(_) => 0,
            GsosTerm::App { args, .. } => 1 + args.iter().map(GsosTerm::depth).max().unwrap_or(0),
        }
    }

    fn has_index_exprs(&self) -> bool {
        match self {
            GsosTerm::Var(_) => false,
            GsosTerm::App { index, args, .. } => index.is_some() || args.iter().any(GsosTerm::has_index_exprs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsosRule<S> {
    pub head: Head,
    /// Name of the family parameter bound by the head, as in `u[n](x)`.
    pub family: Option<String>,
    pub premises: Vec<StreamPremise>,
    pub guard: Guard<ValueExpr<S>>,
    pub out: ValueExpr<S>,
    pub target: GsosTerm<S>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsosOp<S> {
    pub arity: usize,
    /// Whether this is an indexed family `op[n]`.
    pub family: bool,
    /// Rules in the order their guards are tried.
    pub rules: Vec<GsosRule<S>>,
}

/// A stream specification in the general GSOS dialect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsosStreamSpec<S> {
    pub ops: BTreeMap<String, GsosOp<S>>,
}

impl<S: Scalar> GsosStreamSpec<S> {
    /// Whether the rules happen to stay inside the bipointed shape: no
    /// families and every target flat.
    pub fn is_flat(&self) -> bool {
        self.ops.values().all(|o| !o.family && o.rules.iter().all(|r| r.target.depth() <= 1))
    }

    /// Reads a bipointed stream specification as a GSOS one.
    pub fn from_spec(doc: &SpecDoc<S>) -> Result<Self> {
        if doc.kind != FunctorKind::Stream {
            return Err(Error::KindMismatch { expected: "stream".into(), found: doc.kind.to_string() });
        }
        let mut ops = BTreeMap::new();
        for (name, &arity) in &doc.signature.ops {
            let rules = doc
                .stream_rules(name)
                .map(|r| GsosRule {
                    head: r.head.clone(),
                    family: None,
                    premises: r.premises.clone(),
                    guard: r.guard.clone(),
                    out: r.out.clone(),
                    target: match &r.target {
                        FlatTerm::Var(v) => GsosTerm::Var(v.clone()),
                        FlatTerm::App(op, vs) => GsosTerm::App {
                            op: op.clone(),
                            index: None,
                            args: vs.iter().map(|v| GsosTerm::Var(v.clone())).collect(),
                        },
                    },
                    span: r.span,
                })
                .collect();
            ops.insert(name.clone(), GsosOp { arity, family: false, rules });
        }
        Ok(GsosStreamSpec { ops })
    }
}

fn bind_index<S: Clone>(e: &ValueExpr<S>, param: &str) -> ValueExpr<S> {
    let go = |x: &ValueExpr<S>| Box::new(bind_index(x, param));
    match e {
        ValueExpr::Var(v) if v == param => ValueExpr::Index,
        ValueExpr::Neg(a) => ValueExpr::Neg(go(a)),
        ValueExpr::Add(a, b) => ValueExpr::Add(go(a), go(b)),
        ValueExpr::Sub(a, b) => ValueExpr::Sub(go(a), go(b)),
        ValueExpr::Mul(a, b) => ValueExpr::Mul(go(a), go(b)),
        other => other.clone(),
    }
}

struct Checker<'a, S> {
    ops: &'a BTreeMap<String, GsosOp<S>>,
    diags: Vec<Diagnostic>,
}

impl<S: Scalar> Checker<'_, S> {
    fn term(&mut self, t: &crate::sosdsl::RawTerm<S>, bound: &BTreeSet<String>) -> GsosTerm<S> {
        let is_op = self.ops.contains_key(&t.name);
        match (&t.args, &t.index) {
            (None, None) if bound.contains(&t.name) || !is_op => {
                if !bound.contains(&t.name) {
                    self.diags.push(Diagnostic::new(t.span, format!("unbound variable `{}` in target", t.name)));
                }
                GsosTerm::Var(t.name.clone())
            }
            _ => {
                let args: Vec<GsosTerm<S>> =
                    t.args.iter().flatten().map(|a| self.term(a, bound)).collect();
                match self.ops.get(&t.name) {
                    None => self.diags.push(Diagnostic::new(t.span, format!("undeclared operator `{}`", t.name))),
                    Some(op) => {
                        if op.arity != args.len() {
                            self.diags.push(Diagnostic::new(
                                t.span,
                                format!("`{}` has arity {}, applied to {} arguments", t.name, op.arity, args.len()),
                            ));
                        }
                        if op.family != t.index.is_some() {
                            let msg = if op.family {
                                format!("family `{}` needs an index, as in `{}[n+1](...)`", t.name, t.name)
                            } else {
                                format!("`{}` is not an indexed family", t.name)
                            };
                            self.diags.push(Diagnostic::new(t.span, msg));
                        }
                    }
                }
                GsosTerm::App { op: t.name.clone(), index: t.index.clone(), args }
            }
        }
    }
}

/// Parses the `behavior stream gsos` dialect. A plain `behavior stream`
/// header is accepted as well, since every bipointed stream rule is a GSOS rule.
pub fn parse_gsos<S: Scalar>(text: &str) -> std::result::Result<GsosStreamSpec<S>, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let header = p.header().map_err(|d| vec![d])?;
    if header.kind != "stream" {
        return Err(vec![Diagnostic::new(header.span, "the gsos dialect only exists for `stream` specifications")]);
    }
    let mut ops: BTreeMap<String, GsosOp<S>> = BTreeMap::new();
    let mut diags = Vec::new();
    if !p.is_kw("op") {
        return Err(vec![p.unexpected(&["`op` declaration"])]);
    }
    while p.is_kw("op") {
        let (span, name, family, arity) = p.op_decl(true).map_err(|d| vec![d])?;
        let op = GsosOp { arity, family: family.is_some(), rules: Vec::new() };
        if ops.insert(name.clone(), op).is_some() {
            diags.push(Diagnostic::new(span, format!("operator `{name}` declared twice")));
        }
    }

    let mut rules = Vec::new();
    while !p.at_eof() {
        let parsed = (|| {
            let span = p.span();
            let mut premises = Vec::new();
            while !p.at_rule_body_end() {
                premises.push(p.stream_premise()?);
            }
            let guard = p.guard(|p| p.value_expr::<S>(None))?;
            p.expect(crate::sosdsl::lexer::Tok::Rule)?;
            let head_span = p.span();
            let (head, family) = p.head(true)?;
            p.expect(crate::sosdsl::lexer::Tok::Eq)?;
            let out = p.value_expr(family.as_deref())?;
            p.expect(crate::sosdsl::lexer::Tok::Arrow)?;
            let target = p.raw_term::<S>(family.as_deref())?;
            Ok((span, head_span, premises, guard, head, family, out, target))
        })();
        match parsed {
            Ok(r) => rules.push(r),
            Err(d) => {
                diags.push(d);
                return Err(diags);
            }
        }
    }

    let mut checked = Vec::new();
    {
        let mut c = Checker { ops: &ops, diags: Vec::new() };
        for (span, head_span, premises, guard, head, family, out, target) in rules {
            match ops.get(&head.op) {
                None => c.diags.push(Diagnostic::new(head_span, format!("rule for undeclared operator `{}`", head.op))),
                Some(op) => {
                    if op.arity != head.vars.len() {
                        c.diags.push(Diagnostic::new(
                            head_span,
                            format!("`{}` has arity {}, the rule binds {} arguments", head.op, op.arity, head.vars.len()),
                        ));
                    }
                    if op.family != family.is_some() {
                        c.diags.push(Diagnostic::new(head_span, format!("family parameter mismatch for `{}`", head.op)));
                    }
                }
            }
            for q in &premises {
                if head.position(&q.var).is_none() {
                    c.diags.push(Diagnostic::new(span, format!("premise on `{}`, which is not an argument", q.var)));
                }
            }
            let guard = match (guard, &family) {
                (Guard::When(cs), Some(param)) => Guard::When(
                    cs.into_iter()
                        .map(|cmp| crate::sosdsl::Comparison {
                            lhs: bind_index(&cmp.lhs, param),
                            op: cmp.op,
                            rhs: bind_index(&cmp.rhs, param),
                        })
                        .collect(),
                ),
                (g, _) => g,
            };
            let values: BTreeSet<&str> = premises.iter().map(|q| q.value.as_str()).collect();
            let mut used: Vec<&str> = out.vars();
            for cmp in guard.comparisons() {
                used.extend(cmp.lhs.vars());
                used.extend(cmp.rhs.vars());
            }
            for v in used {
                if !values.contains(v) {
                    c.diags.push(Diagnostic::new(span, format!("value variable `{v}` is not bound by a premise")));
                }
            }
            let bound: BTreeSet<String> =
                head.vars.iter().cloned().chain(premises.iter().map(|q| q.tail.clone())).collect();
            let target = c.term(&target, &bound);
            checked.push(GsosRule { head, family, premises, guard, out, target, span });
        }
        diags.extend(c.diags);
    }
    for r in checked {
        if let Some(op) = ops.get_mut(&r.head.op) {
            op.rules.push(r);
        }
    }
    for (name, op) in &ops {
        match op.rules.last() {
            None => diags.push(Diagnostic::new(Span::default(), format!("operator `{name}` has no rules"))),
            Some(last) if !last.guard.is_catch_all() => diags.push(Diagnostic::new(
                last.span,
                format!("the last rule of `{name}` is guarded; end with `otherwise` or an unguarded rule"),
            )),
            _ => {}
        }
        for r in op.rules.iter().rev().skip(1) {
            if matches!(r.guard, Guard::Otherwise) {
                diags.push(Diagnostic::new(r.span, format!("`otherwise` must be the last rule of `{name}`")));
            }
        }
    }
    if diags.is_empty() {
        Ok(GsosStreamSpec { ops })
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

type NodeId = usize;
type Args = SmallVec<[NodeId; 3]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf { lasso: usize, pos: usize },
    App { op: usize, index: Option<u64>, args: Args },
}

/// Term graph of the current configuration. Nodes only ever refer to older
/// nodes, so ascending id order is a bottom-up order.
struct Unfolder<'a, S> {
    ops: Vec<(&'a str, &'a GsosOp<S>)>,
    lassos: Vec<&'a Lasso<S>>,
    nodes: Vec<Node>,
    interned: FxHashMap<Node, NodeId>,
    heads: Vec<Option<S>>,
    tails: Vec<Option<NodeId>>,
}

impl<'a, S: Scalar> Unfolder<'a, S> {
    fn intern(&mut self, node: Node) -> NodeId {
        match self.interned.entry(node) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let id = self.nodes.len();
                self.nodes.push(e.key().clone());
                e.insert(id);
                self.heads.push(None);
                self.tails.push(None);
                id
            }
        }
    }

    fn op_id(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|(n, _)| *n == name)
    }

    fn build(&mut self, term: &Term, env: &BTreeMap<String, usize>) -> Result<NodeId> {
        match term {
            Term::Var(v) => match env.get(v) {
                Some(&l) => Ok(self.intern(Node::Leaf { lasso: l, pos: 0 })),
                None => match self.op_id(v) {
                    Some(_) => self.build(&Term::App { op: v.clone(), index: None, args: Vec::new() }, env),
                    None => Err(Error::input(format!("unbound variable `{v}`"))),
                },
            },
            Term::App { op, index, args } => {
                let id = self.op_id(op).ok_or_else(|| Error::input(format!("undeclared operator `{op}`")))?;
                let decl = self.ops[id].1;
                if decl.arity != args.len() {
                    return Err(Error::input(format!("`{op}` has arity {}, applied to {} arguments", decl.arity, args.len())));
                }
                if decl.family != index.is_some() {
                    return Err(Error::input(if decl.family {
                        format!("family `{op}` needs an index, as in `{op}[0](...)`")
                    } else {
                        format!("`{op}` is not an indexed family")
                    }));
                }
                let args = args.iter().map(|a| self.build(a, env)).collect::<Result<Args>>()?;
                Ok(self.intern(Node::App { op: id, index: *index, args }))
            }
        }
    }

    /// Drops every node not reachable from `root`, renumbering the rest in
    /// the same relative order. Returns the new id of `root`.
    fn compact(&mut self, root: NodeId) -> NodeId {
        let live = self.reachable(root);
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(live.len());
        let mut heads = Vec::with_capacity(live.len());
        self.interned.clear();
        for (id, &old) in live.iter().enumerate() {
            remap[old] = id;
            let node = match std::mem::replace(&mut self.nodes[old], Node::Leaf { lasso: 0, pos: 0 }) {
                Node::App { op, index, args } => Node::App { op, index, args: args.iter().map(|&a| remap[a]).collect() },
                leaf => leaf,
            };
            self.interned.insert(node.clone(), id);
            nodes.push(node);
            heads.push(self.heads[old].take());
        }
        self.tails = vec![None; nodes.len()];
        self.nodes = nodes;
        self.heads = heads;
        remap[root]
    }

    fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        seen[root] = true;
        while let Some(x) = stack.pop() {
            out.push(x);
            if let Node::App { args, .. } = &self.nodes[x] {
                for &a in args {
                    if !seen[a] {
                        seen[a] = true;
                        stack.push(a);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Head and, if asked, tail of `x`, assuming its arguments are done.
    fn step(&mut self, x: NodeId, want_tail: bool) -> Result<()> {
        if self.heads[x].is_some() && (!want_tail || self.tails[x].is_some()) {
            return Ok(());
        }
        let (op, index, args) = match &self.nodes[x] {
            &Node::Leaf { lasso, pos } => {
                let l = self.lassos[lasso];
                self.heads[x] = Some(l.nth(pos).clone());
                if want_tail {
                    let t = self.intern(Node::Leaf { lasso, pos: l.normalize(pos + 1) });
                    self.tails[x] = Some(t);
                }
                return Ok(());
            }
            Node::App { op, index, args } => (*op, *index, args.clone()),
        };
        let decl = self.ops[op].1;
        let mut chosen = None;
        for rule in &decl.rules {
            let bindings: Vec<(&str, &S)> = rule
                .premises
                .iter()
                .filter_map(|q| {
                    let i = rule.head.position(&q.var)?;
                    Some((q.value.as_str(), self.heads[args[i]].as_ref().expect("argument heads first")))
                })
                .collect();
            let lookup = |v: &str| bindings.iter().find(|(k, _)| *k == v).map(|(_, s)| (*s).clone());
            if guard_holds(&rule.guard, &lookup, index)? {
                chosen = Some((rule, rule.out.eval(&lookup, index)?));
                break;
            }
        }
        let (rule, head) = chosen.ok_or_else(|| Error::internal(format!("no rule of `{}` triggered", self.ops[op].0)))?;
        self.heads[x] = Some(head);
        if want_tail {
            let mut vars: Vec<(&str, NodeId)> = rule.head.vars.iter().map(String::as_str).zip(args.iter().copied()).collect();
            let mut values: Vec<(&str, S)> = Vec::new();
            let indexed = rule.target.has_index_exprs();
            for q in &rule.premises {
                if let Some(i) = rule.head.position(&q.var) {
                    vars.push((&q.tail, self.tails[args[i]].expect("argument tails first")));
                    if indexed {
                        values.push((&q.value, self.heads[args[i]].clone().expect("argument heads first")));
                    }
                }
            }
            let lookup = |v: &str| values.iter().find(|(k, _)| *k == v).map(|(_, s)| s.clone());
            let t = self.instantiate(&rule.target, &vars, &lookup, index)?;
            self.tails[x] = Some(t);
        }
        Ok(())
    }

    fn instantiate(
        &mut self,
        t: &GsosTerm<S>,
        vars: &[(&str, NodeId)],
        lookup: &dyn Fn(&str) -> Option<S>,
        index: Option<u64>,
    ) -> Result<NodeId> {
        match t {
            GsosTerm::Var(v) => vars
                .iter()
                .find(|(k, _)| *k == v)
                .map(|(_, n)| *n)
                .ok_or_else(|| Error::internal(format!("unbound `{v}`"))),
            GsosTerm::App { op, index: idx, args } => {
                let op_id = self.op_id(op).ok_or_else(|| Error::internal(format!("undeclared `{op}`")))?;
                let idx = match idx {
                    None => None,
                    Some(e) => {
                        let v = e.eval(lookup, index)?;
                        Some(v.to_index().ok_or_else(|| {
                            Error::input(format!("family index {v} of `{op}` is not a natural number"))
                        })?)
                    }
                };
                let args = args.iter().map(|a| self.instantiate(a, vars, lookup, index)).collect::<Result<Args>>()?;
                Ok(self.intern(Node::App { op: op_id, index: idx, args }))
            }
        }
    }
}

/// The first `n` values of `term`, with the default node budget.
pub fn gsos_unfold<S: Scalar>(
    spec: &GsosStreamSpec<S>,
    env: &BTreeMap<String, Lasso<S>>,
    term: &Term,
    n: usize,
) -> Result<Vec<S>> {
    gsos_unfold_with_budget(spec, env, term, n, DEFAULT_BUDGET)
}

/// The first `n` values of `term`. Fails with [`Error::Budget`] once a
/// configuration needs more than `budget` distinct nodes.
pub fn gsos_unfold_with_budget<S: Scalar>(
    spec: &GsosStreamSpec<S>,
    env: &BTreeMap<String, Lasso<S>>,
    term: &Term,
    n: usize,
    budget: usize,
) -> Result<Vec<S>> {
    let names: Vec<&String> = env.keys().collect();
    let mut u = Unfolder {
        ops: spec.ops.iter().map(|(k, v)| (k.as_str(), v)).collect(),
        lassos: env.values().collect(),
        nodes: Vec::new(),
        interned: FxHashMap::default(),
        heads: Vec::new(),
        tails: Vec::new(),
    };
    let index: BTreeMap<String, usize> = names.iter().enumerate().map(|(i, k)| ((*k).clone(), i)).collect();
    let built = u.build(term, &index)?;
    let mut root = u.compact(built);
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        let live = u.nodes.len();
        if live > budget {
            return Err(Error::Budget { step, what: format!("configuration has {live} nodes"), limit: budget });
        }
        let want_tail = step + 1 < n;
        for x in 0..live {
            u.step(x, want_tail)?;
        }
        out.push(u.heads[root].clone().expect("root head computed"));
        if want_tail {
            let next = u.tails[root].expect("root tail computed");
            root = u.compact(next);
        }
    }
    Ok(out)
}
