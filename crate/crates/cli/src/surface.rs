//! The named surface syntax: free-name declarations followed by a process.
//!
//! ```text
//! program  := ("free" NAME ":" type ("@" ALG "(" usage "," usage ")")? ";")* proc
//! proc     := prefix ("|" proc)?
//! prefix   := "end"
//!           | "new" NAME ":" type "@" ALG usage "." prefix
//!           | NAME "?" "(" NAME ")" "." prefix
//!           | NAME "!" NAME "." prefix
//!           | "(" proc ")"
//! type     := "unit" | "chan" "<" type ">" "[" ALG "(" usage "," usage ")" "]"
//! usage    := DIGITS | "w"
//! ```
//!
//! A free name without a usage is `lin (0,0)`.

use std::fmt;

use leftpi::algebra::{AlgId, AlgebraSet, Usage, UsagePair};
use leftpi::ast::{Name, NuAnnot, Raw};
use leftpi::context::{Ctx, Idxs, PreCtx, Scope, Type};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeDecl {
    pub name: Name,
    pub ty: Type,
    pub alg: AlgId,
    pub usage: UsagePair,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub free: Vec<FreeDecl>,
    pub body: Raw,
}

impl Program {
    /// Free names, oldest first: the last declaration is index 0.
    pub fn names(&self) -> Vec<Name> {
        self.free.iter().map(|d| d.name.clone()).collect()
    }

    pub fn contexts(&self) -> (PreCtx, Idxs, Ctx) {
        (
            Scope::from_oldest(self.free.iter().map(|d| d.ty.clone()).collect()),
            Scope::from_oldest(self.free.iter().map(|d| d.alg).collect()),
            Scope::from_oldest(self.free.iter().map(|d| d.usage).collect()),
        )
    }

    pub fn display<'a>(&'a self, algs: &'a AlgebraSet) -> ProgramDisplay<'a> {
        ProgramDisplay { prog: self, algs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Num(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &str = ":;@.?!()|<>[],";

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if SYMBOLS.contains(c) {
            bump(&mut chars);
            out.push(Lexed {
                tok: Tok::Sym(c),
                line: l,
                col: k,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars));
            }
            out.push(Lexed {
                tok: Tok::Num(s),
                line: l,
                col: k,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '^'))
            {
                s.push(bump(&mut chars));
            }
            out.push(Lexed {
                tok: Tok::Ident(s),
                line: l,
                col: k,
            });
        } else {
            return Err(ParseError {
                line: l,
                col: k,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Lexed {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    algs: &'a AlgebraSet,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        self.error_here(format!("expected {what}, found {}", self.peek()))
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn sym(&mut self, c: char) -> PResult<()> {
        if *self.peek() == Tok::Sym(c) {
            self.advance();
            Ok(())
        } else {
            Err(self.expected(&format!("`{c}`")))
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn keyword(&mut self, k: &str) -> PResult<()> {
        if self.is_keyword(k) {
            self.advance();
            Ok(())
        } else {
            Err(self.expected(&format!("`{k}`")))
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => match Name::new(s.as_str()) {
                Ok(n) => {
                    self.advance();
                    Ok(n)
                }
                Err(_) => Err(self.error_here(format!("`{s}` is reserved"))),
            },
            _ => Err(self.expected("a name")),
        }
    }

    fn alg(&mut self) -> PResult<AlgId> {
        match self.peek().clone() {
            Tok::Ident(s) => match self.algs.by_name(&s) {
                Some(id) => {
                    self.advance();
                    Ok(id)
                }
                None => Err(self.error_here(format!("unknown algebra `{s}`"))),
            },
            _ => Err(self.expected("an algebra name")),
        }
    }

    fn usage(&mut self, alg: AlgId) -> PResult<Usage> {
        let text = match self.peek().clone() {
            Tok::Num(s) | Tok::Ident(s) => s,
            _ => return Err(self.expected("a usage")),
        };
        let a = self.algs.alg(alg);
        match a.parse(&text) {
            Some(u) => {
                self.advance();
                Ok(u)
            }
            None => Err(self.error_here(format!("`{text}` is not a {} usage", a.name()))),
        }
    }

    fn pair(&mut self, alg: AlgId) -> PResult<UsagePair> {
        self.sym('(')?;
        let i = self.usage(alg)?;
        self.sym(',')?;
        let o = self.usage(alg)?;
        self.sym(')')?;
        Ok(UsagePair::new(i, o))
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.is_keyword("unit") {
            self.advance();
            return Ok(Type::Unit);
        }
        self.keyword("chan")?;
        self.sym('<')?;
        let payload = self.ty()?;
        self.sym('>')?;
        self.sym('[')?;
        let alg = self.alg()?;
        let x = self.pair(alg)?;
        self.sym(']')?;
        Ok(Type::chan(payload, alg, x))
    }

    fn free(&mut self) -> PResult<FreeDecl> {
        self.keyword("free")?;
        let name = self.name()?;
        self.sym(':')?;
        let ty = self.ty()?;
        let (alg, usage) = if *self.peek() == Tok::Sym('@') {
            self.advance();
            let alg = self.alg()?;
            (alg, self.pair(alg)?)
        } else {
            (AlgId::LIN, self.algs.empty(AlgId::LIN))
        };
        self.sym(';')?;
        Ok(FreeDecl {
            name,
            ty,
            alg,
            usage,
        })
    }

    fn proc(&mut self) -> PResult<Raw> {
        let left = self.prefix()?;
        if *self.peek() == Tok::Sym('|') {
            self.advance();
            Ok(Raw::par(left, self.proc()?))
        } else {
            Ok(left)
        }
    }

    fn prefix(&mut self) -> PResult<Raw> {
        if *self.peek() == Tok::Sym('(') {
            self.advance();
            let p = self.proc()?;
            self.sym(')')?;
            return Ok(p);
        }
        if self.is_keyword("end") {
            self.advance();
            return Ok(Raw::End);
        }
        if self.is_keyword("new") {
            self.advance();
            let binder = self.name()?;
            self.sym(':')?;
            let at = self.pos;
            let ty = self.ty()?;
            self.sym('@')?;
            let alg = self.alg()?;
            let y = self.usage(alg)?;
            self.sym('.')?;
            let annot = NuAnnot::new(&ty, alg, y).ok_or_else(|| {
                let t = &self.toks[at];
                ParseError {
                    line: t.line,
                    col: t.col,
                    message: "a restricted name needs a channel type".into(),
                }
            })?;
            return Ok(Raw::res(binder, annot, self.prefix()?));
        }
        let chan = self.name()?;
        match self.advance() {
            Tok::Sym('?') => {
                self.sym('(')?;
                let binder = self.name()?;
                self.sym(')')?;
                self.sym('.')?;
                Ok(Raw::recv(chan, binder, self.prefix()?))
            }
            Tok::Sym('!') => {
                let payload = self.name()?;
                self.sym('.')?;
                Ok(Raw::send(chan, payload, self.prefix()?))
            }
            _ => {
                self.pos -= 1;
                Err(self.expected("`?` or `!`"))
            }
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut free = Vec::new();
        while self.is_keyword("free") {
            free.push(self.free()?);
        }
        let body = self.proc()?;
        if *self.peek() != Tok::Eof {
            return Err(self.expected("end of input"));
        }
        Ok(Program { free, body })
    }
}

pub fn parse(algs: &AlgebraSet, text: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        algs,
    };
    p.program()
}

/// Canonical text; [`parse`] reads it back to the same program.
pub struct ProgramDisplay<'a> {
    prog: &'a Program,
    algs: &'a AlgebraSet,
}

impl fmt::Display for ProgramDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prog.free {
            writeln!(
                f,
                "free {} : {} @ {};",
                d.name,
                d.ty.display(self.algs),
                self.algs.fmt_pair(d.alg, d.usage)
            )?;
        }
        write!(f, "{}", RawDisplay::new(&self.prog.body, self.algs))
    }
}

pub struct RawDisplay<'a> {
    raw: &'a Raw,
    algs: &'a AlgebraSet,
}

impl<'a> RawDisplay<'a> {
    pub fn new(raw: &'a Raw, algs: &'a AlgebraSet) -> Self {
        RawDisplay { raw, algs }
    }
}

fn write_raw(f: &mut fmt::Formatter<'_>, p: &Raw, algs: &AlgebraSet) -> fmt::Result {
    match p {
        Raw::End => f.write_str("end"),
        Raw::Res {
            binder,
            annot,
            body,
        } => {
            write!(f, "new {binder} : {}. ", annot.display(algs))?;
            write_body(f, body, algs)
        }
        Raw::Par(l, r) => {
            write_body(f, l, algs)?;
            f.write_str(" | ")?;
            write_raw(f, r, algs)
        }
        Raw::Recv { chan, binder, body } => {
            write!(f, "{chan}?({binder}). ")?;
            write_body(f, body, algs)
        }
        Raw::Send {
            chan,
            payload,
            body,
        } => {
            write!(f, "{chan}!{payload}. ")?;
            write_body(f, body, algs)
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, p: &Raw, algs: &AlgebraSet) -> fmt::Result {
    if let Raw::Par(..) = p {
        f.write_str("(")?;
        write_raw(f, p, algs)?;
        f.write_str(")")
    } else {
        write_raw(f, p, algs)
    }
}

impl fmt::Display for RawDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_raw(f, self.raw, self.algs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    #[test]
    fn end_parses() {
        let algs = AlgebraSet::standard();
        let p = parse(&algs, "end").unwrap();
        assert_eq!(p.body, Raw::End);
        assert!(p.free.is_empty());
    }

    #[test]
    fn bar_is_right_associative_and_prefixes_bind_tighter() {
        let algs = AlgebraSet::standard();
        let p = parse(&algs, "x!y. end | x?(a). end | end").unwrap();
        let expected = Raw::par(
            Raw::send(n("x"), n("y"), Raw::End),
            Raw::par(Raw::recv(n("x"), n("a"), Raw::End), Raw::End),
        );
        assert_eq!(p.body, expected);
        let q = parse(&algs, "(end | end) | end").unwrap();
        assert_eq!(q.body, Raw::par(Raw::par(Raw::End, Raw::End), Raw::End));
    }

    #[test]
    fn declarations_and_annotations() {
        let algs = AlgebraSet::standard();
        let src = "free c : chan<unit>[lin (0,0)] @ gra (2,1);\nfree u : unit;\nnew p : chan<unit>[sha (w,w)] @ gra 0. c!p. end";
        let p = parse(&algs, src).unwrap();
        assert_eq!(p.free.len(), 2);
        assert_eq!(p.free[0].usage, UsagePair::new(Usage(2), Usage(1)));
        assert_eq!(p.free[1].alg, AlgId::LIN);
        let Raw::Res { annot, .. } = &p.body else {
            panic!()
        };
        assert_eq!(annot.chan_alg, AlgId::GRA);
        assert_eq!(annot.payload_alg, AlgId::SHA);
    }

    #[test]
    fn errors_carry_positions() {
        let algs = AlgebraSet::standard();
        let e = parse(&algs, "end |\n  x?y. end").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        let e = parse(&algs, "new p : unit @ lin 0. end").unwrap_err();
        assert_eq!((e.line, e.col), (1, 9));
        let e = parse(&algs, "new p : chan<unit>[lin (2,0)] @ lin 0. end").unwrap_err();
        assert_eq!((e.line, e.col), (1, 25));
        assert!(e.message.contains("lin usage"));
        let e = parse(&algs, "end $").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        let e = parse(&algs, "new end : unit @ lin 0. end").unwrap_err();
        assert!(e.message.contains("reserved"));
    }

    #[test]
    fn print_then_parse() {
        let algs = AlgebraSet::standard();
        let src = "free c : chan<chan<unit>[sha (w,w)]>[gra (1,0)] @ gra (3,3);\n\
                   (c?(a). (end | c!a. end) | end) | new q : chan<unit>[lin (1,0)] @ lin 1. q!q. end";
        let p = parse(&algs, src).unwrap();
        let text = p.display(&algs).to_string();
        assert_eq!(parse(&algs, &text).unwrap(), p);
        assert_eq!(
            p.display(&algs).to_string(),
            parse(&algs, &text).unwrap().display(&algs).to_string()
        );
    }
}
