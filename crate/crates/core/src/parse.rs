//! Concrete syntax for messages, processes, extended processes and `.pi`
//! definition files.
//!
//! ```text
//! P ::= 0 | new x,y.P | P | P | G + G | !P | (P) | NAME
//! G ::= in(M,x)[.P] | out(M,N)[.P] | [M = N] G | [M != N] G
//! ```
//!
//! `|` is right-associative and binds loosest, `+` is right-associative, and
//! `new`, `!` and prefixes take a single unary operand. A match or mismatch
//! used as the left operand of `+` must be parenthesised.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::ParseError;
use crate::syntax::{ExtendedProcess, Guard, Process};
use crate::term::{Alias, Atom, Message, Substitution, Symbol};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    AliasLit(String),
    Zero,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Bar,
    Plus,
    Bang,
    Eq,
    Neq,
    Assign,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::AliasLit(s) => format!("alias `{s}`"),
            Tok::Zero => "`0`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: sl, col: sc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'=') => push(Tok::Assign, 2, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == 'l' {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().collect();
                    if Alias::parse(&s).is_none() {
                        return Err(err(sl, sc, format!("malformed alias `{s}`")));
                    }
                    push(Tok::AliasLit(s), j - i, &mut i, &mut col);
                } else {
                    let s: String = chars[i..j].iter().collect();
                    if s != "0" {
                        return Err(err(sl, sc, format!("unexpected number `{s}`")));
                    }
                    push(Tok::Zero, 1, &mut i, &mut col);
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                if s.starts_with('_') {
                    return Err(err(
                        sl,
                        sc,
                        format!("identifiers starting with `_` are reserved: `{s}`"),
                    ));
                }
                push(Tok::Ident(s), j - i, &mut i, &mut col);
            }
            other => return Err(err(sl, sc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["new", "in", "out", "let"];

struct Parser<'d> {
    toks: Vec<Spanned>,
    pos: usize,
    arities: BTreeMap<String, usize>,
    defs: &'d BTreeMap<String, Process>,
    allow_aliases: bool,
}

type PResult<T> = Result<T, ParseError>;

impl<'d> Parser<'d> {
    fn new(text: &str, defs: &'d BTreeMap<String, Process>) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            arities: BTreeMap::new(),
            defs,
            allow_aliases: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {}, found {}", t.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn message(&mut self) -> PResult<Message> {
        match self.peek().clone() {
            Tok::AliasLit(s) => {
                if !self.allow_aliases {
                    return Err(self.error_here(format!("aliases may not appear in process text: `{s}`")));
                }
                self.bump();
                Ok(Message::Alias(Alias::parse(&s).expect("lexer checked alias")))
            }
            Tok::Ident(_) => {
                let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
                let name = self.ident()?;
                if *self.peek() != Tok::LParen {
                    return Ok(Message::var(&name));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.message()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                match self.arities.get(&name) {
                    Some(&a) if a != args.len() => {
                        return Err(ParseError {
                            line,
                            col,
                            msg: format!("`{name}` applied to {} arguments, expected {a}", args.len()),
                        })
                    }
                    _ => {
                        self.arities.insert(name.clone(), args.len());
                    }
                }
                Ok(Message::App(Symbol::new(&name, args.len()), args))
            }
            other => Err(self.error_here(format!("expected message, found {}", other.describe()))),
        }
    }

    fn process(&mut self) -> PResult<Process> {
        let left = self.sum()?;
        if *self.peek() == Tok::Bar {
            self.bump();
            let right = self.process()?;
            return Ok(Process::par(left, right));
        }
        Ok(left)
    }

    fn sum(&mut self) -> PResult<Process> {
        let start = self.pos;
        let (left, parenthesised) = self.unary()?;
        if *self.peek() != Tok::Plus {
            return Ok(left);
        }
        let g = match left {
            Process::Guarded(g) => g,
            _ => {
                self.pos = start;
                return Err(self.error_here("unguarded sum operand"));
            }
        };
        if !parenthesised && matches!(*g, Guard::Match(..) | Guard::Mismatch(..)) {
            return Err(self.error_here(
                "a match or mismatch before `+` must be parenthesised, e.g. `([x = y] out(a,x)) + in(b,z)`",
            ));
        }
        self.bump();
        let rstart = self.pos;
        let right = self.sum()?;
        match right {
            Process::Guarded(h) => Ok(Process::Guarded(Arc::new(Guard::Sum(g, h)))),
            _ => {
                self.pos = rstart;
                Err(self.error_here("unguarded sum operand"))
            }
        }
    }

    /// Returns the parsed process and whether it was a parenthesised group.
    fn unary(&mut self) -> PResult<(Process, bool)> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok((Process::Nil, false))
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok((p, true))
            }
            Tok::Bang => {
                self.bump();
                let (p, _) = self.unary()?;
                Ok((Process::bang(p), false))
            }
            Tok::LBracket => {
                self.bump();
                let m = self.message()?;
                let negated = match self.bump() {
                    Tok::Eq => false,
                    Tok::Neq => true,
                    other => {
                        self.pos -= 1;
                        return Err(self.error_here(format!("expected `=` or `!=`, found {}", other.describe())));
                    }
                };
                let n = self.message()?;
                self.expect(Tok::RBracket)?;
                let start = self.pos;
                let (body, _) = self.unary()?;
                let g = match body {
                    Process::Guarded(g) => g,
                    _ => {
                        self.pos = start;
                        return Err(self.error_here("the body of a match must be a guarded process"));
                    }
                };
                let guard = if negated {
                    Guard::Mismatch(m, n, g)
                } else {
                    Guard::Match(m, n, g)
                };
                Ok((Process::guard(guard), false))
            }
            Tok::Ident(kw) if kw == "new" => {
                self.bump();
                let mut names = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    names.push(self.ident()?);
                }
                self.expect(Tok::Dot)?;
                let (mut body, _) = self.unary()?;
                for x in names.iter().rev() {
                    body = Process::new_name(x, body);
                }
                Ok((body, false))
            }
            Tok::Ident(kw) if kw == "in" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.message()?;
                self.expect(Tok::Comma)?;
                let x = self.ident()?;
                self.expect(Tok::RParen)?;
                let cont = self.continuation()?;
                Ok((Process::input(c, &x, cont), false))
            }
            Tok::Ident(kw) if kw == "out" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.message()?;
                self.expect(Tok::Comma)?;
                let n = self.message()?;
                self.expect(Tok::RParen)?;
                let cont = self.continuation()?;
                Ok((Process::output(c, n, cont), false))
            }
            Tok::Ident(name) if name.starts_with(|c: char| c.is_uppercase()) => match self.defs.get(&name) {
                Some(p) => {
                    self.bump();
                    Ok((p.clone(), true))
                }
                None => Err(self.error_here(format!("undefined process `{name}`"))),
            },
            other => Err(self.error_here(format!("expected process, found {}", other.describe()))),
        }
    }

    fn continuation(&mut self) -> PResult<Process> {
        if *self.peek() == Tok::Dot {
            self.bump();
            Ok(self.unary()?.0)
        } else {
            Ok(Process::Nil)
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {}", self.peek().describe())))
        }
    }

    fn frame_alias(&mut self) -> PResult<Alias> {
        let t = self.bump();
        let s = match &t {
            Tok::AliasLit(s) | Tok::Ident(s) => s.clone(),
            _ => String::new(),
        };
        Alias::parse(&s).ok_or_else(|| {
            self.pos -= 1;
            self.error_here(format!("expected alias, found {}", t.describe()))
        })
    }

    fn extended(&mut self) -> PResult<ExtendedProcess> {
        let start = self.pos;
        let mut binders = Vec::new();
        while matches!(self.peek(), Tok::Ident(k) if k == "new") {
            self.bump();
            binders.push(self.ident()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                binders.push(self.ident()?);
            }
            self.expect(Tok::Dot)?;
        }
        if *self.peek() != Tok::LBrace {
            self.pos = start;
            let p = self.process()?;
            return Ok(ExtendedProcess::from_process(p));
        }
        self.bump();
        let mut frame = Substitution::id();
        if *self.peek() != Tok::RBrace {
            loop {
                let a = self.frame_alias()?;
                self.expect(Tok::Assign)?;
                let m = self.message()?;
                frame.insert(Atom::Alias(a), m);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let body = if *self.peek() == Tok::Bar {
            self.bump();
            self.process()?
        } else {
            Process::Nil
        };
        Ok(ExtendedProcess {
            binders: binders.iter().map(|b| Arc::from(b.as_str())).collect(),
            frame,
            body,
        })
    }
}

fn seed_arities(p: &mut Parser<'_>, signature: &[Symbol]) {
    for s in signature {
        p.arities.insert(s.name.to_string(), s.arity);
    }
}

/// Parses a message; aliases are accepted.
pub fn parse_message(text: &str) -> Result<Message, ParseError> {
    let defs = BTreeMap::new();
    let mut p = Parser::new(text, &defs)?;
    p.allow_aliases = true;
    let m = p.message()?;
    p.expect_eof()?;
    Ok(m)
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    parse_process_with(text, &[])
}

/// Parses a process, checking applications against the given signature.
pub fn parse_process_with(text: &str, signature: &[Symbol]) -> Result<Process, ParseError> {
    let defs = BTreeMap::new();
    let mut p = Parser::new(text, &defs)?;
    seed_arities(&mut p, signature);
    let proc = p.process()?;
    p.expect_eof()?;
    Ok(proc)
}

/// Parses `new x,y.{0l := M, ...} | P`, or a plain process.
pub fn parse_extended(text: &str) -> Result<ExtendedProcess, ParseError> {
    let defs = BTreeMap::new();
    let mut p = Parser::new(text, &defs)?;
    let e = p.extended()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a `.pi` file: either a single process or a sequence of
/// `let NAME = P` definitions. Later definitions may refer to earlier ones
/// by name when the name starts with an uppercase letter.
pub fn parse_definitions(text: &str, signature: &[Symbol]) -> Result<Vec<(String, Process)>, ParseError> {
    let toks = lex(text)?;
    let starts_with_let = matches!(&toks[0].tok, Tok::Ident(k) if k == "let");
    if !starts_with_let {
        return Ok(vec![("main".to_string(), parse_process_with(text, signature)?)]);
    }
    let mut defs: BTreeMap<String, Process> = BTreeMap::new();
    let mut order = Vec::new();
    let mut arities = BTreeMap::new();
    for s in signature {
        arities.insert(s.name.to_string(), s.arity);
    }
    let mut pos = 0usize;
    loop {
        let mut p = Parser {
            toks: toks.clone(),
            pos,
            arities: arities.clone(),
            defs: &defs,
            allow_aliases: false,
        };
        if *p.peek() == Tok::Eof {
            break;
        }
        match p.peek() {
            Tok::Ident(k) if k == "let" => {
                p.bump();
            }
            other => return Err(p.error_here(format!("expected `let`, found {}", other.describe()))),
        }
        let name = p.ident()?;
        p.expect(Tok::Eq)?;
        let body = p.process()?;
        if !matches!(p.peek(), Tok::Eof) && !matches!(p.peek(), Tok::Ident(k) if k == "let") {
            return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
        }
        pos = p.pos;
        arities = p.arities;
        if defs.insert(name.clone(), body).is_some() {
            let t = &toks[pos.saturating_sub(1)];
            return Err(ParseError {
                line: t.line,
                col: t.col,
                msg: format!("`{name}` defined twice"),
            });
        }
        order.retain(|n| n != &name);
        order.push(name);
    }
    Ok(order
        .into_iter()
        .map(|n| {
            let p = defs[&n].clone();
            (n, p)
        })
        .collect())
}

/// Picks a process from a definition file: the named one, else `main`, else
/// the last definition.
pub fn select_definition(defs: &[(String, Process)], name: Option<&str>) -> Option<Process> {
    match name {
        Some(n) => defs.iter().find(|(k, _)| k == n).map(|(_, p)| p.clone()),
        None => defs
            .iter()
            .find(|(k, _)| k == "main")
            .or_else(|| defs.last())
            .map(|(_, p)| p.clone()),
    }
}
