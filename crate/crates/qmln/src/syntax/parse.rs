//! Recursive-descent parser for model files, sentences, constraint files,
//! and ground-atom lists.
//!
//! Names in argument position are resolved by context: a name bound by the
//! prefix or an inner quantifier is a variable; a declared domain constant is
//! a constant; anything else is reported as an unbound free variable.

use std::collections::HashSet;

use thiserror::Error;

use super::ast::{
    Atom, Formula, ModelError, Qmln, QuantifiedSentence, Quantifier, QuantifierKind, Term,
    Vocabulary, Weight, WeightedSentence, RESERVED_PREFIX,
};
use crate::worlds::{Domain, GroundAtom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Slash,
    Minus,
    Eq,
    Neq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Iff,
    ColonColon,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Iff => "`<=>`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
            }
            '#' => break,
            '{' => {
                toks.push((Tok::LBrace, col));
                i += 1;
            }
            '}' => {
                toks.push((Tok::RBrace, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, col));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, col));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, col));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, col));
                i += 1;
            }
            '<' => {
                if line[i..].starts_with("<=>") {
                    toks.push((Tok::Iff, col));
                    i += 3;
                } else {
                    return Err(ParseError::new(line_no, col, "unexpected `<`"));
                }
            }
            '=' => {
                if line[i..].starts_with("=>") {
                    toks.push((Tok::Arrow, col));
                    i += 2;
                } else {
                    toks.push((Tok::Eq, col));
                    i += 1;
                }
            }
            '!' => {
                if line[i..].starts_with("!=") {
                    toks.push((Tok::Neq, col));
                    i += 2;
                } else {
                    toks.push((Tok::Bang, col));
                    i += 1;
                }
            }
            ':' => {
                if line[i..].starts_with("::") {
                    toks.push((Tok::ColonColon, col));
                    i += 2;
                } else {
                    toks.push((Tok::Colon, col));
                    i += 1;
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Name(line[start..i].to_string()), col));
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                toks.push((Tok::Number(line[start..i].to_string()), col));
            }
            _ => {
                return Err(ParseError::new(
                    line_no,
                    col,
                    format!("unexpected character `{c}`"),
                ));
            }
        }
    }
    Ok(toks)
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(toks: Vec<(Tok, usize)>, line: usize) -> Cursor {
        Cursor { toks, pos: 0, line }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(_, c)| c)
            .unwrap_or_else(|| self.toks.last().map(|&(_, c)| c + 1).unwrap_or(1))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.describe_here()
            )))
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Name(_)) => match self.next() {
                Some(Tok::Name(n)) => Ok(n),
                _ => unreachable!(),
            },
            _ => Err(self.error(format!("expected {what}, found {}", self.describe_here()))),
        }
    }

    fn describe_here(&self) -> String {
        match self.peek() {
            Some(t) => t.describe(),
            None => "end of line".into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), message)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.describe_here())))
        }
    }
}

/// Context for resolving argument names while parsing a formula.
struct Scope<'a> {
    vocabulary: &'a Vocabulary,
    domain: &'a Domain,
    bound: Vec<String>,
}

impl<'a> Scope<'a> {
    fn is_bound(&self, name: &str) -> bool {
        self.bound.iter().any(|b| b == name)
    }

    fn resolve(&self, name: &str, line: usize, col: usize) -> Result<Term, ParseError> {
        if self.is_bound(name) {
            Ok(Term::Var(name.to_string()))
        } else if self.domain.contains(name) {
            Ok(Term::Const(name.to_string()))
        } else {
            Err(ParseError::new(
                line,
                col,
                format!("free variable `{name}` is not bound by any quantifier"),
            ))
        }
    }

    fn bind(&mut self, name: &str, line: usize, col: usize) -> Result<(), ParseError> {
        if self.is_bound(name) {
            return Err(ParseError::new(
                line,
                col,
                format!("variable `{name}` shadows an enclosing binding"),
            ));
        }
        if self.domain.contains(name) {
            return Err(ParseError::new(
                line,
                col,
                format!("variable `{name}` collides with a domain constant"),
            ));
        }
        self.bound.push(name.to_string());
        Ok(())
    }

    fn unbind(&mut self) {
        self.bound.pop();
    }
}

fn parse_term(cur: &mut Cursor, scope: &Scope) -> Result<Term, ParseError> {
    let col = cur.col();
    let name = cur.expect_name("a term")?;
    scope.resolve(&name, cur.line, col)
}

fn parse_formula(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    parse_iff(cur, scope)
}

fn parse_iff(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    let mut left = parse_implies(cur, scope)?;
    while cur.eat(&Tok::Iff) {
        let right = parse_implies(cur, scope)?;
        // a <=> b desugars to (a => b) & (b => a)
        left = Formula::and(
            Formula::implies(left.clone(), right.clone()),
            Formula::implies(right, left),
        );
    }
    Ok(left)
}

fn parse_implies(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    let left = parse_or(cur, scope)?;
    if cur.eat(&Tok::Arrow) {
        let right = parse_implies(cur, scope)?;
        Ok(Formula::implies(left, right))
    } else {
        Ok(left)
    }
}

fn parse_or(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    let mut left = parse_and(cur, scope)?;
    while cur.eat(&Tok::Pipe) {
        let right = parse_and(cur, scope)?;
        left = Formula::or(left, right);
    }
    Ok(left)
}

fn parse_and(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    let mut left = parse_unary(cur, scope)?;
    while cur.eat(&Tok::Amp) {
        let right = parse_unary(cur, scope)?;
        left = Formula::and(left, right);
    }
    Ok(left)
}

fn parse_unary(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::Bang) {
        let inner = parse_unary(cur, scope)?;
        Ok(Formula::Not(Box::new(inner)))
    } else {
        parse_primary(cur, scope)
    }
}

fn parse_primary(cur: &mut Cursor, scope: &mut Scope) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::LParen) {
        // Inner quantifiers are only admitted immediately inside parentheses.
        let f = match cur.peek() {
            Some(Tok::Name(n)) if n == "forall" || n == "exists" => {
                let kind = n.clone();
                cur.next();
                let var_col = cur.col();
                let var = cur.expect_name("a variable")?;
                scope.bind(&var, cur.line, var_col)?;
                cur.expect(&Tok::Colon)?;
                let body = parse_formula(cur, scope)?;
                scope.unbind();
                if kind == "forall" {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                }
            }
            Some(Tok::Name(n)) if n == "avg" => {
                return Err(
                    cur.error("`avg` may only appear in a sentence prefix, not inside a formula")
                );
            }
            _ => parse_formula(cur, scope)?,
        };
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    match cur.peek() {
        Some(Tok::Name(n)) if n == "forall" || n == "exists" => {
            Err(cur.error("inner quantifiers must be parenthesized, e.g. `(forall x : ...)`"))
        }
        Some(Tok::Name(_)) => {
            let name_col = cur.col();
            let name = cur.expect_name("a name")?;
            if cur.eat(&Tok::LParen) {
                // Predicate atom; zero arguments written as `p()`.
                let mut args = Vec::new();
                if !cur.eat(&Tok::RParen) {
                    loop {
                        args.push(parse_term(cur, scope)?);
                        if cur.eat(&Tok::RParen) {
                            break;
                        }
                        cur.expect(&Tok::Comma)?;
                    }
                }
                match scope.vocabulary.arity(&name) {
                    None => Err(ParseError::new(
                        cur.line,
                        name_col,
                        format!("predicate `{name}` is not declared"),
                    )),
                    Some(a) if a != args.len() => Err(ParseError::new(
                        cur.line,
                        name_col,
                        format!(
                            "predicate `{name}` expects {a} arguments, got {}",
                            args.len()
                        ),
                    )),
                    Some(_) => Ok(Formula::Atom(Atom::Pred { name, args })),
                }
            } else {
                // Equality or inequality between terms.
                let left = scope.resolve(&name, cur.line, name_col)?;
                if cur.eat(&Tok::Eq) {
                    let right = parse_term(cur, scope)?;
                    Ok(Formula::Atom(Atom::Equal(left, right)))
                } else if cur.eat(&Tok::Neq) {
                    let right = parse_term(cur, scope)?;
                    Ok(Formula::Not(Box::new(Formula::Atom(Atom::Equal(
                        left, right,
                    )))))
                } else {
                    Err(cur.error(format!(
                        "expected `(`, `=`, or `!=` after `{}`",
                        left.name()
                    )))
                }
            }
        }
        _ => Err(cur.error(format!("expected a formula, found {}", cur.describe_here()))),
    }
}

fn parse_prefix(cur: &mut Cursor, scope: &mut Scope) -> Result<Vec<Quantifier>, ParseError> {
    let mut prefix = Vec::new();
    loop {
        let kind = match cur.peek() {
            Some(Tok::Name(n)) if n == "forall" => QuantifierKind::Forall,
            Some(Tok::Name(n)) if n == "exists" => QuantifierKind::Exists,
            Some(Tok::Name(n)) if n == "avg" => QuantifierKind::Avg,
            _ => break,
        };
        cur.next();
        loop {
            let var_col = cur.col();
            let var = cur.expect_name("a variable")?;
            scope.bind(&var, cur.line, var_col)?;
            prefix.push(Quantifier::new(kind, var));
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    Ok(prefix)
}

fn parse_weight(cur: &mut Cursor) -> Result<Weight, ParseError> {
    let negative = cur.eat(&Tok::Minus);
    match cur.next() {
        Some(Tok::Name(n)) if n == "inf" => Ok(if negative {
            Weight::MinusInfinity
        } else {
            Weight::PlusInfinity
        }),
        Some(Tok::Number(raw)) => {
            let v: f64 = raw.parse().map_err(|_| {
                ParseError::new(cur.line, cur.col(), format!("invalid number `{raw}`"))
            })?;
            Ok(Weight::Finite(if negative { -v } else { v }))
        }
        _ => {
            cur.pos = cur.pos.saturating_sub(1);
            Err(cur.error(format!(
                "expected a weight (number, `inf`, or `-inf`), found {}",
                cur.describe_here()
            )))
        }
    }
}

fn build_sentence(
    prefix: Vec<Quantifier>,
    matrix: Formula,
    line: usize,
) -> Result<QuantifiedSentence, ParseError> {
    QuantifiedSentence::new(prefix, matrix).map_err(|e| ParseError::new(line, 1, e.to_string()))
}

/// Parses a sentence of the form `prefix : formula`. The prefix may be empty,
/// in which case the leading `:` is optional.
pub fn parse_sentence(
    text: &str,
    vocabulary: &Vocabulary,
    domain: &Domain,
) -> Result<QuantifiedSentence, ParseError> {
    let toks = lex_line(text, 1)?;
    let mut cur = Cursor::new(toks, 1);
    let mut scope = Scope {
        vocabulary,
        domain,
        bound: Vec::new(),
    };
    let prefix = parse_prefix(&mut cur, &mut scope)?;
    if !prefix.is_empty() {
        cur.expect(&Tok::Colon)?;
    } else {
        cur.eat(&Tok::Colon);
    }
    let matrix = parse_formula(&mut cur, &mut scope)?;
    cur.expect_end()?;
    build_sentence(prefix, matrix, 1)
}

type SpannedToks = Vec<(Tok, usize)>;

enum Line {
    DomainSet(Vec<String>),
    DomainSize(usize),
    Predicate(String, usize, usize),
    Sentence(Weight, SpannedToks, usize),
}

fn classify_line(toks: Vec<(Tok, usize)>, line_no: usize) -> Result<Line, ParseError> {
    let mut cur = Cursor::new(toks, line_no);
    match cur.peek() {
        Some(Tok::Name(n)) if n == "domain" => {
            cur.next();
            match cur.peek() {
                Some(Tok::Name(n)) if n == "size" => {
                    cur.next();
                    cur.expect(&Tok::Eq)?;
                    let raw = match cur.next() {
                        Some(Tok::Number(raw)) => raw,
                        _ => {
                            cur.pos = cur.pos.saturating_sub(1);
                            return Err(cur.error("expected an integer domain size"));
                        }
                    };
                    let n: usize = raw.parse().map_err(|_| {
                        ParseError::new(line_no, cur.col(), format!("invalid integer `{raw}`"))
                    })?;
                    cur.expect_end()?;
                    Ok(Line::DomainSize(n))
                }
                _ => {
                    cur.expect(&Tok::Eq)?;
                    cur.expect(&Tok::LBrace)?;
                    let mut names = Vec::new();
                    loop {
                        names.push(cur.expect_name("a constant name")?);
                        if cur.eat(&Tok::RBrace) {
                            break;
                        }
                        cur.expect(&Tok::Comma)?;
                    }
                    cur.expect_end()?;
                    Ok(Line::DomainSet(names))
                }
            }
        }
        Some(Tok::Name(n)) if n == "predicate" => {
            cur.next();
            let name_col = cur.col();
            let name = cur.expect_name("a predicate name")?;
            cur.expect(&Tok::Slash)?;
            let raw = match cur.next() {
                Some(Tok::Number(raw)) => raw,
                _ => {
                    cur.pos = cur.pos.saturating_sub(1);
                    return Err(cur.error("expected an integer arity"));
                }
            };
            let arity: usize = raw.parse().map_err(|_| {
                ParseError::new(line_no, cur.col(), format!("invalid integer `{raw}`"))
            })?;
            cur.expect_end()?;
            Ok(Line::Predicate(name, arity, name_col))
        }
        _ => {
            let weight = parse_weight(&mut cur)?;
            cur.expect(&Tok::ColonColon)?;
            let rest = cur.toks.split_off(cur.pos);
            Ok(Line::Sentence(weight, rest, line_no))
        }
    }
}

/// Parses a model file: a domain declaration, predicate declarations, and
/// weighted sentences, one per line. `#` starts a comment.
pub fn parse_model(text: &str) -> Result<(Qmln, Domain), ParseError> {
    let mut vocabulary = Vocabulary::new();
    let mut domain: Option<Domain> = None;
    let mut pending: Vec<(Weight, SpannedToks, usize)> = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks = lex_line(raw_line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        match classify_line(toks, line_no)? {
            Line::DomainSet(names) => {
                if domain.is_some() {
                    return Err(ParseError::new(line_no, 1, "duplicate domain declaration"));
                }
                domain = Some(
                    Domain::new(names).map_err(|e| ParseError::new(line_no, 1, e.to_string()))?,
                );
            }
            Line::DomainSize(n) => {
                if domain.is_some() {
                    return Err(ParseError::new(line_no, 1, "duplicate domain declaration"));
                }
                domain = Some(
                    Domain::generated(n).map_err(|e| ParseError::new(line_no, 1, e.to_string()))?,
                );
            }
            Line::Predicate(name, arity, col) => {
                if name.starts_with(RESERVED_PREFIX) {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("predicate name `{name}` uses the reserved `__` prefix"),
                    ));
                }
                vocabulary
                    .declare(name, arity)
                    .map_err(|e| ParseError::new(line_no, col, e.to_string()))?;
            }
            Line::Sentence(weight, rest, line) => {
                if let Weight::Finite(v) = weight {
                    if v.is_nan() {
                        return Err(ParseError::new(line, 1, "weight is NaN"));
                    }
                }
                pending.push((weight, rest, line));
            }
        }
    }

    let domain = domain.ok_or_else(|| {
        ParseError::new(
            text.lines().count() + 1,
            1,
            "missing domain declaration".to_string(),
        )
    })?;

    let mut sentences = Vec::new();
    let mut seen: HashSet<WeightedSentence> = HashSet::new();
    for (weight, toks, line) in pending {
        let mut cur = Cursor::new(toks, line);
        let mut scope = Scope {
            vocabulary: &vocabulary,
            domain: &domain,
            bound: Vec::new(),
        };
        let prefix = parse_prefix(&mut cur, &mut scope)?;
        cur.expect(&Tok::Colon)?;
        let matrix = parse_formula(&mut cur, &mut scope)?;
        cur.expect_end()?;
        let sentence = build_sentence(prefix, matrix, line)?;
        let ws = WeightedSentence::new(sentence, weight);
        if !seen.insert(ws.clone()) {
            return Err(ParseError::new(line, 1, "duplicate weighted sentence"));
        }
        sentences.push(ws);
    }

    let model = Qmln::new(vocabulary, sentences).map_err(|e| match e {
        ModelError::ConflictingHardWeights => ParseError::new(
            1,
            1,
            "model contains a sentence with both weight inf and weight -inf",
        ),
        other => ParseError::new(1, 1, other.to_string()),
    })?;
    Ok((model, domain))
}

/// Parses a constraint file for the max-entropy solver: lines of the form
/// `q :: prefix : formula` with `q` a probability in [0, 1].
pub fn parse_constraints(
    text: &str,
    vocabulary: &Vocabulary,
    domain: &Domain,
) -> Result<Vec<(QuantifiedSentence, f64)>, ParseError> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks = lex_line(raw_line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(toks, line_no);
        let q = match parse_weight(&mut cur)? {
            Weight::Finite(v) if (0.0..=1.0).contains(&v) => v,
            _ => {
                return Err(ParseError::new(
                    line_no,
                    1,
                    "constraint target must be a probability in [0, 1]",
                ))
            }
        };
        cur.expect(&Tok::ColonColon)?;
        let mut scope = Scope {
            vocabulary,
            domain,
            bound: Vec::new(),
        };
        let prefix = parse_prefix(&mut cur, &mut scope)?;
        cur.expect(&Tok::Colon)?;
        let matrix = parse_formula(&mut cur, &mut scope)?;
        cur.expect_end()?;
        out.push((build_sentence(prefix, matrix, line_no)?, q));
    }
    Ok(out)
}

/// Parses `{atom, atom, ...}` into raw ground atoms, without vocabulary or
/// domain checks. Errors carry a byte offset into the text.
pub fn parse_ground_atoms(text: &str) -> Result<Vec<GroundAtom>, (usize, String)> {
    let toks = lex_line(text, 1).map_err(|e| (e.col.saturating_sub(1), e.message))?;
    let mut cur = Cursor::new(toks, 1);
    let err = |cur: &Cursor, msg: &str| (cur.col().saturating_sub(1), msg.to_string());
    if !cur.eat(&Tok::LBrace) {
        return Err(err(&cur, "expected `{`"));
    }
    let mut atoms = Vec::new();
    if cur.eat(&Tok::RBrace) {
        if !cur.at_end() {
            return Err(err(&cur, "unexpected trailing input"));
        }
        return Ok(atoms);
    }
    loop {
        let name = match cur.next() {
            Some(Tok::Name(n)) => n,
            _ => {
                cur.pos = cur.pos.saturating_sub(1);
                return Err(err(&cur, "expected a predicate name"));
            }
        };
        if !cur.eat(&Tok::LParen) {
            return Err(err(&cur, "expected `(`"));
        }
        let mut args = Vec::new();
        if !cur.eat(&Tok::RParen) {
            loop {
                match cur.next() {
                    Some(Tok::Name(a)) => args.push(a),
                    _ => {
                        cur.pos = cur.pos.saturating_sub(1);
                        return Err(err(&cur, "expected a constant name"));
                    }
                }
                if cur.eat(&Tok::RParen) {
                    break;
                }
                if !cur.eat(&Tok::Comma) {
                    return Err(err(&cur, "expected `,` or `)`"));
                }
            }
        }
        atoms.push(GroundAtom {
            predicate: name,
            args,
        });
        if cur.eat(&Tok::RBrace) {
            break;
        }
        if !cur.eat(&Tok::Comma) {
            return Err(err(&cur, "expected `,` or `}`"));
        }
    }
    if !cur.at_end() {
        return Err(err(&cur, "unexpected trailing input"));
    }
    Ok(atoms)
}
