use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Tok, Token};
use super::*;
use crate::behaviors::{Alphabet, FunctorKind, Monoid, Weight};
use crate::scalar::Scalar;

pub(crate) type PResult<T> = std::result::Result<T, Diagnostic>;

const RESERVED: &[&str] = &[
    "behavior", "labels", "op", "output", "final", "when", "otherwise", "for", "in", "monoid", "output_semantics",
];

/// Header line contents before interpretation.
pub(crate) struct Header {
    pub span: Span,
    pub kind: String,
    pub gsos: bool,
    pub alphabet: Option<Vec<String>>,
    pub monoid: Option<(Span, String)>,
    pub semantics: Option<(Span, String)>,
}

impl Header {
    fn functor_kind(&self) -> PResult<FunctorKind> {
        let alphabet = || {
            let labels = self.alphabet.clone().unwrap_or_default();
            Alphabet::new(labels).map_err(|e| Diagnostic::new(self.span, e.to_string()))
        };
        Ok(match self.kind.as_str() {
            "stream" => FunctorKind::Stream,
            "dfa" => FunctorKind::Dfa(alphabet()?),
            "lts" => FunctorKind::Lts(alphabet()?),
            "nda" => FunctorKind::Nda(alphabet()?),
            "wts" => {
                let (span, name) = self.monoid.clone().unwrap_or((self.span, String::new()));
                let m = Monoid::from_name(&name).ok_or_else(|| Diagnostic {
                    span,
                    message: format!("unknown monoid `{name}`"),
                    expected: Monoid::ALL.iter().map(|m| format!("`{}`", m.name())).collect(),
                })?;
                FunctorKind::Wts(alphabet()?, m)
            }
            _ => unreachable!("kind checked while parsing the header"),
        })
    }
}

/// A term as written, before it is checked for flatness.
#[derive(Clone, Debug)]
pub(crate) struct RawTerm<S> {
    pub span: Span,
    pub name: String,
    pub index: Option<ValueExpr<S>>,
    pub args: Option<Vec<RawTerm<S>>>,
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn is(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        Diagnostic {
            span: self.span(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    /// A non-reserved identifier.
    pub fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    pub fn int(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Int(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    /// `name` or `name-with-dashes`.
    fn dashed_name(&mut self, what: &str) -> PResult<(Span, String)> {
        let span = self.span();
        let mut name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return Err(self.unexpected(&[what])),
        };
        while *self.peek() == Tok::Minus && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            if let Tok::Ident(s) = self.bump().tok {
                name.push('-');
                name.push_str(&s);
            }
        }
        Ok((span, name))
    }

    pub fn header(&mut self) -> PResult<Header> {
        if !self.is_kw("behavior") {
            let mut d = self.unexpected(&["`behavior`"]);
            d.message = format!("missing 'behavior' header ({})", d.message);
            return Err(d);
        }
        let span = self.span();
        self.bump();
        let kinds = ["`stream`", "`dfa`", "`lts`", "`nda`", "`wts`"];
        let kind = match self.peek().clone() {
            Tok::Ident(k) if ["stream", "dfa", "lts", "nda", "wts"].contains(&k.as_str()) => {
                self.bump();
                k
            }
            Tok::Ident(k) => {
                let mut d = self.unexpected(&kinds);
                d.message = format!("unknown kind header `{k}`");
                return Err(d);
            }
            _ => return Err(self.unexpected(&kinds)),
        };
        let mut header = Header { span, kind, gsos: false, alphabet: None, monoid: None, semantics: None };
        if header.kind == "stream" {
            if self.is_kw("gsos") {
                self.bump();
                header.gsos = true;
            }
            return Ok(header);
        }
        self.expect_kw("labels")?;
        self.expect(Tok::LBrace)?;
        let mut labels = vec![self.ident("label")?];
        while self.eat(&Tok::Comma) {
            labels.push(self.ident("label")?);
        }
        self.expect(Tok::RBrace)?;
        header.alphabet = Some(labels);
        if header.kind == "wts" {
            if self.is_kw("monoid") {
                self.bump();
            }
            header.monoid = Some(self.dashed_name("monoid name")?);
        }
        if matches!(header.kind.as_str(), "nda" | "dfa") && self.is_kw("output_semantics") {
            self.bump();
            header.semantics = Some(self.dashed_name("`exact` or `mentioned-only`")?);
        }
        Ok(header)
    }

    /// `op name/arity`, or `op name[n]/arity` for an indexed family when allowed.
    pub fn op_decl(&mut self, allow_family: bool) -> PResult<(Span, String, Option<String>, usize)> {
        self.expect_kw("op")?;
        let span = self.span();
        let name = self.ident("operator name")?;
        let family = if allow_family && self.eat(&Tok::LBracket) {
            let p = self.ident("family parameter")?;
            self.expect(Tok::RBracket)?;
            Some(p)
        } else {
            None
        };
        self.expect(Tok::Slash)?;
        let arity_span = self.span();
        let arity = self
            .int()?
            .parse::<usize>()
            .map_err(|_| Diagnostic::new(arity_span, "arity out of range"))?;
        Ok((span, name, family, arity))
    }

    /// `f(x1, ..., xn)`, `f`, or `f[n](...)` when families are allowed.
    pub fn head(&mut self, allow_family: bool) -> PResult<(Head, Option<String>)> {
        let op = self.ident("operator name")?;
        let family = if allow_family && self.eat(&Tok::LBracket) {
            let p = self.ident("family parameter")?;
            self.expect(Tok::RBracket)?;
            Some(p)
        } else {
            None
        };
        let mut vars = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.is(&Tok::RParen) {
                vars.push(self.ident("variable")?);
                while self.eat(&Tok::Comma) {
                    vars.push(self.ident("variable")?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok((Head { op, vars }, family))
    }

    fn literal<S: Scalar>(&mut self, negative: bool) -> PResult<S> {
        let span = self.span();
        let n = self.int()?;
        let text = if self.is(&Tok::Slash) && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let d = self.int()?;
            format!("{n}/{d}")
        } else {
            n
        };
        let text = if negative { format!("-{text}") } else { text };
        S::parse_scalar(&text).ok_or_else(|| Diagnostic::new(span, format!("invalid number `{text}`")))
    }

    pub fn value_expr<S: Scalar>(&mut self, family: Option<&str>) -> PResult<ValueExpr<S>> {
        let mut lhs = self.value_product(family)?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = ValueExpr::Add(Box::new(lhs), Box::new(self.value_product(family)?));
            } else if self.eat(&Tok::Minus) {
                lhs = ValueExpr::Sub(Box::new(lhs), Box::new(self.value_product(family)?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn value_product<S: Scalar>(&mut self, family: Option<&str>) -> PResult<ValueExpr<S>> {
        let mut lhs = self.value_unary(family)?;
        while self.eat(&Tok::Star) {
            lhs = ValueExpr::Mul(Box::new(lhs), Box::new(self.value_unary(family)?));
        }
        Ok(lhs)
    }

    fn value_unary<S: Scalar>(&mut self, family: Option<&str>) -> PResult<ValueExpr<S>> {
        if self.eat(&Tok::Minus) {
            if matches!(self.peek(), Tok::Int(_)) {
                return self.literal(true).map(ValueExpr::Const);
            }
            return Ok(ValueExpr::Neg(Box::new(self.value_unary(family)?)));
        }
        match self.peek().clone() {
            Tok::Int(_) => self.literal(false).map(ValueExpr::Const),
            Tok::LParen => {
                self.bump();
                let e = self.value_expr(family)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let name = self.ident("value variable")?;
                if family == Some(name.as_str()) {
                    Ok(ValueExpr::Index)
                } else {
                    Ok(ValueExpr::Var(name))
                }
            }
            _ => Err(self.unexpected(&["number", "value variable", "`(`", "`-`"])),
        }
    }

    fn weight_atom<S: Scalar>(&mut self) -> PResult<WeightAtom<S>> {
        match self.peek().clone() {
            Tok::Int(_) => self.literal(false).map(|v| WeightAtom::Const(Weight::Finite(v))),
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                self.literal(true).map(|v| WeightAtom::Const(Weight::Finite(v)))
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(WeightAtom::Const(Weight::Infinity))
            }
            Tok::Ident(_) => self.ident("weight variable").map(WeightAtom::Var),
            _ => Err(self.unexpected(&["weight", "weight variable", "`inf`"])),
        }
    }

    fn weight_expr<S: Scalar>(&mut self) -> PResult<WeightExpr<S>> {
        let mut terms = vec![self.weight_atom()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.weight_atom()?);
        }
        Ok(WeightExpr { terms })
    }

    fn cmp_op(&mut self) -> PResult<(CmpOp, bool)> {
        let r = match self.peek() {
            Tok::Eq => (CmpOp::Eq, false),
            Tok::Ne => (CmpOp::Ne, false),
            Tok::Lt => (CmpOp::Lt, false),
            Tok::Le => (CmpOp::Le, false),
            Tok::Gt => (CmpOp::Lt, true),
            Tok::Ge => (CmpOp::Le, true),
            _ => return Err(self.unexpected(&["`=`", "`!=`", "`<`", "`<=`", "`>`", "`>=`"])),
        };
        self.bump();
        Ok(r)
    }

    /// `when c1, c2, ...` | `otherwise` | nothing.
    pub fn guard<E>(&mut self, mut operand: impl FnMut(&mut Self) -> PResult<E>) -> PResult<Guard<E>> {
        if self.is_kw("otherwise") {
            self.bump();
            return Ok(Guard::Otherwise);
        }
        if !self.is_kw("when") {
            return Ok(Guard::Always);
        }
        self.bump();
        let mut cmps = Vec::new();
        loop {
            let lhs = operand(self)?;
            let (op, swap) = self.cmp_op()?;
            let rhs = operand(self)?;
            cmps.push(if swap { Comparison { lhs: rhs, op, rhs: lhs } } else { Comparison { lhs, op, rhs } });
            if !self.eat(&Tok::Comma) {
                return Ok(Guard::When(cmps));
            }
        }
    }

    /// A possibly nested term `g[idx](t1, ..., tm)`.
    pub fn raw_term<S: Scalar>(&mut self, family: Option<&str>) -> PResult<RawTerm<S>> {
        let span = self.span();
        let name = self.ident("variable or operator")?;
        let index = if self.eat(&Tok::LBracket) {
            let e = self.value_expr(family)?;
            self.expect(Tok::RBracket)?;
            Some(e)
        } else {
            None
        };
        let args = if self.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if !self.is(&Tok::RParen) {
                args.push(self.raw_term(family)?);
                while self.eat(&Tok::Comma) {
                    args.push(self.raw_term(family)?);
                }
            }
            self.expect(Tok::RParen)?;
            Some(args)
        } else {
            None
        };
        Ok(RawTerm { span, name, index, args })
    }

    /// `x =r-> x'`
    pub fn stream_premise(&mut self) -> PResult<StreamPremise> {
        let var = self.ident("argument variable")?;
        self.expect(Tok::Eq)?;
        let value = self.ident("value variable")?;
        self.expect(Tok::Arrow)?;
        let tail = self.ident("successor variable")?;
        Ok(StreamPremise { var, value, tail })
    }

    pub fn at_rule_body_end(&self) -> bool {
        self.is(&Tok::Rule) || self.is_kw("when") || self.is_kw("otherwise") || self.at_eof()
    }

    /// `for a in {l1, l2}` / `for (a, b) in {(l1, l2), ...}`.
    fn binder(&mut self) -> PResult<Option<(Vec<String>, Vec<Vec<String>>)>> {
        if !self.is_kw("for") {
            return Ok(None);
        }
        self.bump();
        let tuple = |p: &mut Self| -> PResult<Vec<String>> {
            if p.eat(&Tok::LParen) {
                let mut xs = vec![p.ident("label")?];
                while p.eat(&Tok::Comma) {
                    xs.push(p.ident("label")?);
                }
                p.expect(Tok::RParen)?;
                Ok(xs)
            } else {
                Ok(vec![p.ident("label")?])
            }
        };
        let names = tuple(self)?;
        self.expect_kw("in")?;
        self.expect(Tok::LBrace)?;
        let mut rows = Vec::new();
        if !self.is(&Tok::RBrace) {
            loop {
                let span = self.span();
                let row = tuple(self)?;
                if row.len() != names.len() {
                    return Err(Diagnostic::new(
                        span,
                        format!("tuple has {} labels, binder has {}", row.len(), names.len()),
                    ));
                }
                rows.push(row);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Some((names, rows)))
    }
}

fn flat_target<S>(t: RawTerm<S>, bound: &BTreeSet<String>, signature: &Signature) -> PResult<FlatTerm> {
    if t.index.is_some() {
        return Err(Diagnostic::new(t.span, "indexed operator families belong to the gsos dialect"));
    }
    match t.args {
        None if bound.contains(&t.name) => Ok(FlatTerm::Var(t.name)),
        None if signature.arity(&t.name) == Some(0) => Ok(FlatTerm::App(t.name, Vec::new())),
        None => Ok(FlatTerm::Var(t.name)),
        Some(args) => {
            let mut vars = Vec::with_capacity(args.len());
            for a in args {
                if a.args.is_some() || a.index.is_some() {
                    return Err(Diagnostic::new(
                        a.span,
                        format!(
                            "target of `{}` is not flat: `{}` is applied to arguments; only variables may appear \
                             under the conclusion's operator (nested targets belong to the gsos dialect)",
                            t.name, a.name
                        ),
                    ));
                }
                vars.push(a.name);
            }
            Ok(FlatTerm::App(t.name, vars))
        }
    }
}

fn rename_label(label: &mut String, subst: &BTreeMap<&str, &str>) {
    if let Some(to) = subst.get(label.as_str()) {
        *label = to.to_string();
    }
}

fn instantiate<S: Clone>(rule: &Rule<S>, subst: &BTreeMap<&str, &str>) -> Rule<S> {
    let mut r = rule.clone();
    match &mut r {
        Rule::Transition(t) => {
            t.positive.iter_mut().for_each(|p| rename_label(&mut p.label, subst));
            t.negative.iter_mut().for_each(|n| rename_label(&mut n.label, subst));
            rename_label(&mut t.label, subst);
        }
        Rule::Weighted(w) => {
            w.weighted.iter_mut().for_each(|p| rename_label(&mut p.label, subst));
            w.totals.iter_mut().for_each(|p| rename_label(&mut p.label, subst));
            rename_label(&mut w.label, subst);
        }
        Rule::Stream(_) | Rule::Output(_) => {}
    }
    r
}

/// Parses a bipointed specification. Arity and scoping checks are left to
/// [`validate_spec`].
pub fn parse_spec<S: Scalar>(text: &str) -> std::result::Result<SpecDoc<S>, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let header = p.header().map_err(|d| vec![d])?;
    if header.gsos {
        return Err(vec![Diagnostic::new(
            header.span,
            "`behavior stream gsos` declares the general GSOS dialect, which is not a bipointed format",
        )]);
    }
    let kind = header.functor_kind().map_err(|d| vec![d])?;
    let output_semantics = match &header.semantics {
        None => OutputSemantics::Exact,
        Some((_, s)) if s == "exact" => OutputSemantics::Exact,
        Some((_, s)) if s == "mentioned-only" => OutputSemantics::MentionedOnly,
        Some((span, s)) => {
            return Err(vec![Diagnostic {
                span: *span,
                message: format!("unknown output semantics `{s}`"),
                expected: vec!["`exact`".into(), "`mentioned-only`".into()],
            }])
        }
    };
    let mut diags = Vec::new();
    let mut signature = Signature::default();
    if !p.is_kw("op") {
        return Err(vec![p.unexpected(&["`op` declaration"])]);
    }
    while p.is_kw("op") {
        match p.op_decl(false) {
            Ok((span, name, _, arity)) => {
                if signature.ops.insert(name.clone(), arity).is_some() {
                    diags.push(Diagnostic::new(span, format!("operator `{name}` declared twice")));
                }
            }
            Err(d) => return Err(vec![d]),
        }
    }
    let mut rules = Vec::new();
    while !p.at_eof() {
        match rule(&mut p, &kind, &signature) {
            Ok(rs) => rules.extend(rs),
            Err(d) => {
                diags.push(d);
                break;
            }
        }
    }
    if diags.is_empty() {
        Ok(SpecDoc::new(kind, signature, output_semantics, rules))
    } else {
        Err(diags)
    }
}

fn rule<S: Scalar>(p: &mut Parser, kind: &FunctorKind, signature: &Signature) -> PResult<Vec<Rule<S>>> {
    let span = p.span();
    if p.is_kw("output") {
        if !matches!(kind, FunctorKind::Nda(_) | FunctorKind::Dfa(_)) {
            return Err(Diagnostic::new(span, format!("output rules are not allowed in a {} specification", kind.name())));
        }
        p.bump();
        let (head, _) = p.head(false)?;
        p.expect_kw("final")?;
        p.expect_kw("when")?;
        p.expect_kw("final")?;
        p.expect(Tok::LBrace)?;
        let mut finals = Vec::new();
        if !p.is(&Tok::RBrace) {
            finals.push(p.ident("argument variable")?);
            while p.eat(&Tok::Comma) {
                finals.push(p.ident("argument variable")?);
            }
        }
        p.expect(Tok::RBrace)?;
        return Ok(vec![Rule::Output(OutputRule { head, finals, span })]);
    }

    let binder = p.binder()?;
    let rule = match kind {
        FunctorKind::Stream => {
            let mut premises = Vec::new();
            while !p.at_rule_body_end() {
                premises.push(p.stream_premise()?);
            }
            let guard = p.guard(|p| p.value_expr(None))?;
            p.expect(Tok::Rule)?;
            let (head, _) = p.head(false)?;
            p.expect(Tok::Eq)?;
            let out = p.value_expr(None)?;
            p.expect(Tok::Arrow)?;
            let bound: BTreeSet<String> =
                head.vars.iter().cloned().chain(premises.iter().map(|q| q.tail.clone())).collect();
            let target = flat_target(p.raw_term::<S>(None)?, &bound, signature)?;
            Rule::Stream(StreamRule { head, premises, guard, out, target, span })
        }
        FunctorKind::Lts(_) | FunctorKind::Nda(_) | FunctorKind::Dfa(_) => {
            let (mut positive, mut negative) = (Vec::new(), Vec::new());
            while !p.at_rule_body_end() {
                let var = p.ident("argument variable")?;
                p.expect(Tok::Minus)?;
                let label = p.ident("label")?;
                if p.eat(&Tok::NoArrow) {
                    negative.push(NegativePremise { var, label });
                } else {
                    p.expect(Tok::Arrow).map_err(|_| p.unexpected(&["`->`", "`-/->`"]))?;
                    let target = p.ident("successor variable")?;
                    positive.push(PositivePremise { var, label, target });
                }
            }
            if !p.is(&Tok::Rule) {
                return Err(p.unexpected(&["`---`"]));
            }
            p.expect(Tok::Rule)?;
            let (head, _) = p.head(false)?;
            p.expect(Tok::Minus)?;
            let label = p.ident("label")?;
            p.expect(Tok::Arrow)?;
            let bound: BTreeSet<String> =
                head.vars.iter().cloned().chain(positive.iter().map(|q| q.target.clone())).collect();
            let target = flat_target(p.raw_term::<S>(None)?, &bound, signature)?;
            Rule::Transition(TransitionRule { head, positive, negative, label, target, span })
        }
        FunctorKind::Wts(..) => {
            let (mut weighted, mut totals) = (Vec::new(), Vec::new());
            while !p.at_rule_body_end() {
                let var = p.ident("argument variable")?;
                if p.eat(&Tok::Minus) {
                    let label = p.ident("label")?;
                    p.expect(Tok::Comma)?;
                    let weight = p.ident("weight variable")?;
                    p.expect(Tok::Arrow)?;
                    let target = p.ident("successor variable")?;
                    weighted.push(WeightedPremise { var, label, weight, target });
                } else if p.eat(&Tok::Eq) {
                    let label = p.ident("label")?;
                    p.expect(Tok::FatArrow)?;
                    let pattern = p.weight_atom()?;
                    totals.push(TotalPremise { var, label, pattern });
                } else {
                    return Err(p.unexpected(&["`-`", "`=`"]));
                }
            }
            let guard = p.guard(|p| p.weight_expr())?;
            p.expect(Tok::Rule)?;
            let (head, _) = p.head(false)?;
            p.expect(Tok::Minus)?;
            let label = p.ident("label")?;
            p.expect(Tok::Comma)?;
            let weight = p.weight_expr()?;
            p.expect(Tok::Arrow)?;
            let bound: BTreeSet<String> =
                head.vars.iter().cloned().chain(weighted.iter().map(|q| q.target.clone())).collect();
            let target = flat_target(p.raw_term::<S>(None)?, &bound, signature)?;
            Rule::Weighted(WtsRule { head, weighted, totals, guard, label, weight, target, span })
        }
    };
    match binder {
        None => Ok(vec![rule]),
        Some((names, rows)) => Ok(rows
            .iter()
            .map(|row| {
                let subst: BTreeMap<&str, &str> =
                    names.iter().map(String::as_str).zip(row.iter().map(String::as_str)).collect();
                instantiate(&rule, &subst)
            })
            .collect()),
    }
}

/// Parses a closed term such as `par(plus(p,q), r)`, `nil`, or `u[5](z)`.
pub fn parse_term(text: &str) -> std::result::Result<Term, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let t = closed_term(&mut p).map_err(|d| vec![d])?;
    if !p.at_eof() {
        return Err(vec![p.unexpected(&["end of term"])]);
    }
    Ok(t)
}

fn closed_term(p: &mut Parser) -> PResult<Term> {
    let name = p.ident("variable or operator")?;
    let index = if p.eat(&Tok::LBracket) {
        let span = p.span();
        let n = p.int()?.parse::<u64>().map_err(|_| Diagnostic::new(span, "family index out of range"))?;
        p.expect(Tok::RBracket)?;
        Some(n)
    } else {
        None
    };
    if p.eat(&Tok::LParen) {
        let mut args = Vec::new();
        if !p.is(&Tok::RParen) {
            args.push(closed_term(p)?);
            while p.eat(&Tok::Comma) {
                args.push(closed_term(p)?);
            }
        }
        p.expect(Tok::RParen)?;
        Ok(Term::App { op: name, index, args })
    } else if index.is_some() {
        Ok(Term::App { op: name, index, args: Vec::new() })
    } else {
        Ok(Term::Var(name))
    }
}
