//! Textual specification files: a concrete syntax for formulas, parsing
//! into the core AST, and generators for the robustness and fairness
//! property templates.
//!
//! A spec file is a sequence of declarations followed by one formula
//! section. The grammar, with `{}` repetition and `[]` option:
//!
//! ```text
//! spec        = { declaration } "formula" ":" formula
//! declaration = "const" ident ":" number "=" bits ";"
//!             | "var" ident ":" number ";"
//!             | "fn" ident ":" number "->" number "=" fn-body ";"
//!             | "option" ident "=" ident ";"
//! fn-body     = "identity" | "extract" number
//!             | "[" bits "->" bits { "," bits "->" bits } "]"
//! formula     = implies
//! implies     = or [ "->" implies ]
//! or          = and { "|" and }
//! and         = until { "&" until }
//! until       = unary [ ("U" | "R") until ]
//! unary       = "!" unary | "X" unary | "WX" unary | "F" unary | "G" unary
//!             | ("forall" | "exists") ident ":" number "." formula
//!             | "true" | "false" | "(" formula ")" | atom
//! atom        = term rel term
//! rel         = "=" | "!=" | "<=" | ">=" | "<" | ">"
//! term        = { ">>" [ "^" number ] } app
//! app         = ident "(" term ")" | ident | bits
//! bits        = "0b" /[01]+/ | /[01]+/
//! number      = /[0-9]+/
//! ident       = /[A-Za-z_][A-Za-z0-9_]*/
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Negation binds
//! tightest, then the unary temporal operators, then `U`/`R`, `&`, `|`,
//! and `->` (right associative); quantifier bodies extend as far right as
//! possible. `>>` with no exponent defers one block. Recognized options
//! are `order = integer | elementwise` and `quantifiers = full |
//! declared`.
//!
//! Parsing accepts exactly what the `Display` implementations print, so
//! parsing a printed formula gives the formula back. Two caveats keep
//! that round trip structural rather than merely textual: a negated atom
//! prints as `!(...)` and parses back as negation applied to a positive
//! atom (the two are equal after negation normal form), and nested fixed
//! functions with no placeholder between them normalize into a composed
//! function whose dotted display name is not a declarable identifier.
//! Generated formulas contain neither construct.
//!
//! Identifiers used in the formula without a declaration become 1-bit
//! free variables and are recorded in the returned signature; widths of
//! anything else must be declared. The generators build the two spec
//! templates: [`gen_robustness`] compares a center vector against its
//! Hamming ball after `n` blocks, and [`gen_fairness`] compares proper
//! pairs either at a fixed depth or under the flexible two-depth
//! template.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::bits::{hamming_ball, BitVec, BitsError, BoolFn, Relation, VectorOrder, MAX_WIDTH};
use crate::formula::{ExpansionConfig, Formula, QuantifierDomain, Signature};
use crate::term::{FixedFn, FnRef, Term};

#[derive(Debug, Error, PartialEq)]
pub enum FrontendError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared identifier '{name}'")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: width mismatch: {msg}")]
    Width { line: usize, col: usize, msg: String },
    #[error("ball radius {eps} exceeds the vector width {width}")]
    EpsTooLarge { eps: usize, width: usize },
    #[error("fairness specifications need at least one pair")]
    NoPairs,
    #[error("pair widths differ: {0} vs {1}")]
    PairWidths(usize, usize),
    #[error("bad attribute layout: {0}")]
    Layout(String),
    #[error("pair differs at position {position}, outside the sensitive attribute")]
    DiffersOutside { position: usize },
    #[error("pair does not differ in the sensitive attribute")]
    NoSensitiveDifference,
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Bits(#[from] BitsError),
}

/// A parsed specification file.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub sig: Signature,
    /// Declared fixed functions, in declaration order.
    pub funcs: Vec<(Arc<str>, Arc<BoolFn>)>,
    pub options: SpecOptions,
    pub formula: Arc<Formula>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecOptions {
    pub order: VectorOrder,
    pub expansion: ExpansionConfig,
}

// ---------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    BitLit(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Dot,
    Caret,
    Arrow,
    Defer,
    Bang,
    Amp,
    Pipe,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(s) | Tok::BitLit(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Defer => "'>>'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Eq => "'='".into(),
            Tok::Ne => "'!='".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer {
    src: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.src.get(self.i).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.src.get(self.i + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }
}

fn lex(text: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        src: text.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();
    loop {
        while let Some(c) = lx.peek() {
            if c.is_whitespace() {
                lx.bump();
            } else if c == '#' {
                while let Some(c) = lx.peek() {
                    if c == '\n' {
                        break;
                    }
                    lx.bump();
                }
            } else {
                break;
            }
        }
        let (line, col) = (lx.line, lx.col);
        let Some(c) = lx.peek() else {
            // Anchor end-of-input errors at the last real token.
            let (line, col) = toks
                .last()
                .map(|t: &Token| (t.line, t.col))
                .unwrap_or((1, 1));
            toks.push(Token {
                tok: Tok::Eof,
                line,
                col,
            });
            return Ok(toks);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let s = lx.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let digits = lx.take_while(|c| c.is_ascii_digit());
            if digits == "0" && lx.peek() == Some('b') {
                lx.bump();
                let bits = lx.take_while(|c| c == '0' || c == '1');
                if bits.is_empty() {
                    return Err(FrontendError::Syntax {
                        line,
                        col,
                        msg: "expected 0 or 1 digits after '0b'".into(),
                    });
                }
                Tok::BitLit(bits)
            } else {
                Tok::Number(digits)
            }
        } else {
            match c {
                '(' => {
                    lx.bump();
                    Tok::LParen
                }
                ')' => {
                    lx.bump();
                    Tok::RParen
                }
                '[' => {
                    lx.bump();
                    Tok::LBracket
                }
                ']' => {
                    lx.bump();
                    Tok::RBracket
                }
                ':' => {
                    lx.bump();
                    Tok::Colon
                }
                ';' => {
                    lx.bump();
                    Tok::Semi
                }
                ',' => {
                    lx.bump();
                    Tok::Comma
                }
                '.' => {
                    lx.bump();
                    Tok::Dot
                }
                '^' => {
                    lx.bump();
                    Tok::Caret
                }
                '&' => {
                    lx.bump();
                    Tok::Amp
                }
                '|' => {
                    lx.bump();
                    Tok::Pipe
                }
                '=' => {
                    lx.bump();
                    Tok::Eq
                }
                '!' => {
                    lx.bump();
                    if lx.peek() == Some('=') {
                        lx.bump();
                        Tok::Ne
                    } else {
                        Tok::Bang
                    }
                }
                '<' => {
                    lx.bump();
                    if lx.peek() == Some('=') {
                        lx.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                '>' => {
                    lx.bump();
                    match lx.peek() {
                        Some('>') => {
                            lx.bump();
                            Tok::Defer
                        }
                        Some('=') => {
                            lx.bump();
                            Tok::Ge
                        }
                        _ => Tok::Gt,
                    }
                }
                '-' => {
                    if lx.peek2() == Some('>') {
                        lx.bump();
                        lx.bump();
                        Tok::Arrow
                    } else {
                        return Err(FrontendError::Syntax {
                            line,
                            col,
                            msg: "expected '->' after '-'".into(),
                        });
                    }
                }
                other => {
                    return Err(FrontendError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character '{other}'"),
                    });
                }
            }
        };
        toks.push(Token { tok, line, col });
    }
}

// ---------------------------------------------------------------------
// Parsing

const RESERVED: &[&str] = &[
    "const", "var", "fn", "option", "formula", "true", "false", "forall", "exists", "X", "WX",
    "U", "R", "F", "G",
];

enum DeclKind {
    Const,
    Var,
    Func,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    consts: Vec<(Arc<str>, BitVec)>,
    vars: Vec<(Arc<str>, usize)>,
    funcs: Vec<(Arc<str>, Arc<BoolFn>)>,
    bound: Vec<(String, usize)>,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Parser {
        Parser {
            toks,
            pos: 0,
            consts: Vec::new(),
            vars: Vec::new(),
            funcs: Vec::new(),
            bound: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, FrontendError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.syntax(format!("expected {what}, found {}", self.peek().tok.describe())))
        }
    }

    fn syntax(&self, msg: String) -> FrontendError {
        let t = self.peek();
        FrontendError::Syntax {
            line: t.line,
            col: t.col,
            msg,
        }
    }

    fn width_at(&self, t: &Token, msg: String) -> FrontendError {
        FrontendError::Width {
            line: t.line,
            col: t.col,
            msg,
        }
    }

    fn kind_of(&self, name: &str) -> Option<DeclKind> {
        if self.consts.iter().any(|(n, _)| **n == *name) {
            Some(DeclKind::Const)
        } else if self.vars.iter().any(|(n, _)| **n == *name) {
            Some(DeclKind::Var)
        } else if self.funcs.iter().any(|(n, _)| **n == *name) {
            Some(DeclKind::Func)
        } else {
            None
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), FrontendError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            other => Err(self.syntax(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn declared_name(&mut self) -> Result<(String, Token), FrontendError> {
        let (name, tok) = self.ident("a name")?;
        if RESERVED.contains(&name.as_str()) {
            return Err(FrontendError::Syntax {
                line: tok.line,
                col: tok.col,
                msg: format!("'{name}' is a reserved word"),
            });
        }
        if self.kind_of(&name).is_some() {
            return Err(FrontendError::Syntax {
                line: tok.line,
                col: tok.col,
                msg: format!("'{name}' is already declared"),
            });
        }
        Ok((name, tok))
    }

    fn number(&mut self, what: &str) -> Result<(usize, Token), FrontendError> {
        match &self.peek().tok {
            Tok::Number(s) => {
                let s = s.clone();
                let tok = self.bump();
                let n = s.parse::<usize>().map_err(|_| FrontendError::Syntax {
                    line: tok.line,
                    col: tok.col,
                    msg: format!("number '{s}' is too large"),
                })?;
                Ok((n, tok))
            }
            other => Err(self.syntax(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn width(&mut self) -> Result<(usize, Token), FrontendError> {
        let (n, tok) = self.number("a width")?;
        if n == 0 || n > MAX_WIDTH {
            return Err(self.width_at(&tok, format!("width must be between 1 and {MAX_WIDTH}, got {n}")));
        }
        Ok((n, tok))
    }

    /// A 0-1 literal of exactly `width` bits: either `0b`-prefixed or a
    /// bare digit run.
    fn bits(&mut self, width: usize) -> Result<BitVec, FrontendError> {
        let s = match &self.peek().tok {
            Tok::BitLit(s) => s.clone(),
            Tok::Number(s) if s.chars().all(|c| c == '0' || c == '1') => s.clone(),
            other => {
                return Err(self.syntax(format!(
                    "expected a 0-1 vector literal, found {}",
                    other.describe()
                )))
            }
        };
        let tok = self.bump();
        if s.len() != width {
            return Err(self.width_at(
                &tok,
                format!("literal '{s}' has {} bits, expected {width}", s.len()),
            ));
        }
        BitVec::parse_bits(&s).map_err(|e| self.width_at(&tok, e.to_string()))
    }

    // -- declarations --

    fn const_decl(&mut self) -> Result<(), FrontendError> {
        self.bump();
        let (name, _) = self.declared_name()?;
        self.expect(Tok::Colon, "':'")?;
        let (width, _) = self.width()?;
        self.expect(Tok::Eq, "'='")?;
        let value = self.bits(width)?;
        self.expect(Tok::Semi, "';'")?;
        self.consts.push((name.into(), value));
        Ok(())
    }

    fn var_decl(&mut self) -> Result<(), FrontendError> {
        self.bump();
        let (name, _) = self.declared_name()?;
        self.expect(Tok::Colon, "':'")?;
        let (width, _) = self.width()?;
        self.expect(Tok::Semi, "';'")?;
        self.vars.push((name.into(), width));
        Ok(())
    }

    fn fn_decl(&mut self) -> Result<(), FrontendError> {
        self.bump();
        let (name, _) = self.declared_name()?;
        self.expect(Tok::Colon, "':'")?;
        let (in_width, _) = self.width()?;
        self.expect(Tok::Arrow, "'->'")?;
        let (out_width, out_tok) = self.width()?;
        self.expect(Tok::Eq, "'='")?;
        let func = match &self.peek().tok {
            Tok::Ident(s) if s == "identity" => {
                let tok = self.bump();
                if in_width != out_width {
                    return Err(self.width_at(
                        &tok,
                        format!("identity needs equal widths, got {in_width} and {out_width}"),
                    ));
                }
                BoolFn::identity(in_width).map_err(|e| self.width_at(&tok, e.to_string()))?
            }
            Tok::Ident(s) if s == "extract" => {
                self.bump();
                let (bit, bit_tok) = self.number("a bit position")?;
                if bit >= in_width {
                    return Err(self.width_at(
                        &bit_tok,
                        format!("bit position {bit} is out of range for {in_width} input bits"),
                    ));
                }
                if out_width != 1 {
                    return Err(
                        self.width_at(&out_tok, "extract produces a 1-bit output".to_string())
                    );
                }
                let table = (0..1u64 << in_width)
                    .map(|d| {
                        BitVec::bin(d, in_width).expect("in range").bit(bit) as u64
                    })
                    .collect();
                BoolFn::new(in_width, 1, table).expect("extraction table is total")
            }
            Tok::LBracket => {
                self.bump();
                let mut table: Vec<Option<u64>> = vec![None; 1usize << in_width];
                loop {
                    let in_tok = self.peek().clone();
                    let input = self.bits(in_width)?;
                    self.expect(Tok::Arrow, "'->'")?;
                    let output = self.bits(out_width)?;
                    let slot = &mut table[input.dec() as usize];
                    if slot.is_some() {
                        return Err(FrontendError::Syntax {
                            line: in_tok.line,
                            col: in_tok.col,
                            msg: format!("duplicate table entry for input {input}"),
                        });
                    }
                    *slot = Some(output.dec());
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                let close = self.expect(Tok::RBracket, "']'")?;
                let mut entries = Vec::with_capacity(table.len());
                for (d, slot) in table.iter().enumerate() {
                    match slot {
                        Some(v) => entries.push(*v),
                        None => {
                            let missing = BitVec::bin(d as u64, in_width).expect("in range");
                            return Err(FrontendError::Syntax {
                                line: close.line,
                                col: close.col,
                                msg: format!("table is missing input {missing}"),
                            });
                        }
                    }
                }
                BoolFn::new(in_width, out_width, entries).expect("entry widths were checked")
            }
            other => {
                return Err(self.syntax(format!(
                    "expected 'identity', 'extract', or a table, found {}",
                    other.describe()
                )))
            }
        };
        self.expect(Tok::Semi, "';'")?;
        self.funcs.push((name.into(), Arc::new(func)));
        Ok(())
    }

    fn option_decl(&mut self, options: &mut SpecOptions) -> Result<(), FrontendError> {
        self.bump();
        let (key, key_tok) = self.ident("an option name")?;
        self.expect(Tok::Eq, "'='")?;
        let (value, value_tok) = self.ident("an option value")?;
        match (key.as_str(), value.as_str()) {
            ("order", "integer") => options.order = VectorOrder::Integer,
            ("order", "elementwise") => options.order = VectorOrder::Elementwise,
            ("quantifiers", "full") => options.expansion.domain = QuantifierDomain::Full,
            ("quantifiers", "declared") => options.expansion.domain = QuantifierDomain::Declared,
            ("order", _) | ("quantifiers", _) => {
                return Err(FrontendError::Syntax {
                    line: value_tok.line,
                    col: value_tok.col,
                    msg: format!("unknown value '{value}' for option '{key}'"),
                });
            }
            _ => {
                return Err(FrontendError::Syntax {
                    line: key_tok.line,
                    col: key_tok.col,
                    msg: format!("unknown option '{key}'"),
                });
            }
        }
        self.expect(Tok::Semi, "';'")?;
        Ok(())
    }

    // -- formulas --

    fn formula(&mut self) -> Result<Arc<Formula>, FrontendError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            Ok(Formula::implies(lhs, self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let mut f = self.and()?;
        while self.eat(&Tok::Pipe) {
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let mut f = self.until()?;
        while self.eat(&Tok::Amp) {
            f = Formula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let lhs = self.unary()?;
        let op = match &self.peek().tok {
            Tok::Ident(s) if s == "U" => Formula::until as fn(_, _) -> _,
            Tok::Ident(s) if s == "R" => Formula::release,
            _ => return Ok(lhs),
        };
        self.bump();
        Ok(op(lhs, self.until()?))
    }

    fn unary(&mut self) -> Result<Arc<Formula>, FrontendError> {
        match &self.peek().tok {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "X" => {
                    self.bump();
                    Ok(Formula::next(self.unary()?))
                }
                "WX" => {
                    self.bump();
                    Ok(Formula::weak_next(self.unary()?))
                }
                "F" => {
                    self.bump();
                    Ok(Formula::finally(self.unary()?))
                }
                "G" => {
                    self.bump();
                    Ok(Formula::globally(self.unary()?))
                }
                "true" => {
                    self.bump();
                    Ok(Formula::tt())
                }
                "false" => {
                    self.bump();
                    Ok(Formula::ff())
                }
                "forall" | "exists" => self.quantifier(),
                _ => self.atom(),
            },
            Tok::Eof => Err(self.syntax("expected a formula, found end of input".into())),
            _ => self.atom(),
        }
    }

    fn quantifier(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let kw = self.bump();
        let universal = matches!(&kw.tok, Tok::Ident(s) if s == "forall");
        let (name, _) = self.ident("a variable name")?;
        self.expect(Tok::Colon, "':'")?;
        let (width, _) = self.width()?;
        self.expect(Tok::Dot, "'.'")?;
        self.bound.push((name.clone(), width));
        let body = self.formula();
        self.bound.pop();
        let body = body?;
        let var: Arc<str> = name.into();
        Ok(Arc::new(if universal {
            Formula::Forall { var, width, body }
        } else {
            Formula::Exists { var, width, body }
        }))
    }

    fn atom(&mut self) -> Result<Arc<Formula>, FrontendError> {
        let lhs = self.term()?;
        let rel_tok = self.peek().clone();
        let rel = match rel_tok.tok {
            Tok::Eq => Relation::Eq,
            Tok::Ne => Relation::Ne,
            Tok::Le => Relation::Le,
            Tok::Ge => Relation::Ge,
            Tok::Lt => Relation::Lt,
            Tok::Gt => Relation::Gt,
            ref other => {
                return Err(self.syntax(format!(
                    "expected a comparison operator, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        let rhs = self.term()?;
        if let (Some(l), Some(r)) = (lhs.top_width(), rhs.top_width()) {
            if l != r {
                return Err(self.width_at(
                    &rel_tok,
                    format!("comparison of a {l}-bit term with a {r}-bit term"),
                ));
            }
        }
        Ok(Formula::atom(lhs, rel, rhs))
    }

    fn term(&mut self) -> Result<Term, FrontendError> {
        let mut defers = 0usize;
        while self.eat(&Tok::Defer) {
            if self.eat(&Tok::Caret) {
                defers += self.number("a defer count")?.0;
            } else {
                defers += 1;
            }
        }
        let base = self.application()?;
        Ok(base.defer(defers))
    }

    fn application(&mut self) -> Result<Term, FrontendError> {
        match self.peek().tok.clone() {
            Tok::BitLit(s) => {
                let tok = self.bump();
                BitVec::parse_bits(&s)
                    .map(Term::constant)
                    .map_err(|e| self.width_at(&tok, e.to_string()))
            }
            Tok::Number(s) if s.chars().all(|c| c == '0' || c == '1') => {
                let tok = self.bump();
                BitVec::parse_bits(&s)
                    .map(Term::constant)
                    .map_err(|e| self.width_at(&tok, e.to_string()))
            }
            Tok::Ident(name) => {
                let tok = self.bump();
                if self.peek().tok == Tok::LParen {
                    let func = match self.funcs.iter().find(|(n, _)| **n == name) {
                        Some((n, f)) => FixedFn::new(n.clone(), f.clone()),
                        None => {
                            return Err(match self.kind_of(&name) {
                                Some(_) => FrontendError::Syntax {
                                    line: tok.line,
                                    col: tok.col,
                                    msg: format!("'{name}' is not a function"),
                                },
                                None => FrontendError::Undeclared {
                                    line: tok.line,
                                    col: tok.col,
                                    name,
                                },
                            })
                        }
                    };
                    self.bump();
                    let inner = self.term()?;
                    self.expect(Tok::RParen, "')'")?;
                    inner
                        .wrap(FnRef::Fixed(func))
                        .map_err(|e| self.width_at(&tok, e.to_string()))
                } else if let Some((_, w)) = self.bound.iter().rev().find(|(n, _)| *n == name) {
                    Ok(Term::var(name, *w))
                } else {
                    match self.kind_of(&name) {
                        Some(DeclKind::Var) => {
                            let w = self
                                .vars
                                .iter()
                                .find(|(n, _)| **n == name)
                                .map(|(_, w)| *w)
                                .expect("kind said var");
                            Ok(Term::var(name, w))
                        }
                        Some(DeclKind::Const) => {
                            let v = self
                                .consts
                                .iter()
                                .find(|(n, _)| **n == name)
                                .map(|(_, v)| *v)
                                .expect("kind said const");
                            Ok(Term::constant(v))
                        }
                        Some(DeclKind::Func) => Err(FrontendError::Syntax {
                            line: tok.line,
                            col: tok.col,
                            msg: format!("function '{name}' needs an argument"),
                        }),
                        None => {
                            // Undeclared identifiers become 1-bit free
                            // variables and join the signature.
                            self.vars.push((name.clone().into(), 1));
                            Ok(Term::var(name, 1))
                        }
                    }
                }
            }
            ref other => Err(self.syntax(format!("expected a term, found {}", other.describe()))),
        }
    }
}

/// Parse a complete specification file.
pub fn parse_spec(text: &str) -> Result<SpecFile, FrontendError> {
    let mut p = Parser::new(lex(text)?);
    let mut options = SpecOptions::default();
    loop {
        match &p.peek().tok {
            Tok::Ident(s) => match s.as_str() {
                "const" => p.const_decl()?,
                "var" => p.var_decl()?,
                "fn" => p.fn_decl()?,
                "option" => p.option_decl(&mut options)?,
                "formula" => break,
                _ => {
                    return Err(
                        p.syntax(format!("expected a declaration or 'formula', found '{s}'"))
                    )
                }
            },
            Tok::Eof => return Err(p.syntax("the spec has no formula section".into())),
            other => {
                return Err(p.syntax(format!(
                    "expected a declaration or 'formula', found {}",
                    other.describe()
                )))
            }
        }
    }
    p.bump();
    p.expect(Tok::Colon, "':'")?;
    let formula = p.formula()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.syntax(format!(
            "expected end of input, found {}",
            p.peek().tok.describe()
        )));
    }
    Ok(SpecFile {
        sig: Signature {
            constants: p.consts,
            variables: p.vars,
        },
        funcs: p.funcs,
        options,
        formula,
    })
}

/// Parse a bare formula against an existing signature and function list.
/// Identifiers not found there become 1-bit free variables.
pub fn parse_formula(
    text: &str,
    sig: &Signature,
    funcs: &[(Arc<str>, Arc<BoolFn>)],
) -> Result<Arc<Formula>, FrontendError> {
    let mut p = Parser::new(lex(text)?);
    p.consts = sig.constants.clone();
    p.vars = sig.variables.clone();
    p.funcs = funcs.to_vec();
    let formula = p.formula()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.syntax(format!(
            "expected end of input, found {}",
            p.peek().tok.describe()
        )));
    }
    Ok(formula)
}

/// Render a spec file in the concrete syntax. The result parses back to
/// an equal [`SpecFile`].
pub fn print_spec(spec: &SpecFile) -> String {
    let mut out = String::new();
    for (name, value) in &spec.sig.constants {
        let _ = writeln!(out, "const {name}:{} = {value};", value.width());
    }
    for (name, width) in &spec.sig.variables {
        let _ = writeln!(out, "var {name}:{width};");
    }
    for (name, func) in &spec.funcs {
        let entries: Vec<String> = func
            .table()
            .iter()
            .enumerate()
            .map(|(d, &v)| {
                let input = BitVec::bin(d as u64, func.in_width()).expect("table index fits");
                let output = BitVec::bin(v, func.out_width()).expect("table entry fits");
                format!("{input} -> {output}")
            })
            .collect();
        let _ = writeln!(
            out,
            "fn {name}:{}->{} = [{}];",
            func.in_width(),
            func.out_width(),
            entries.join(", ")
        );
    }
    let order = match spec.options.order {
        VectorOrder::Integer => "integer",
        VectorOrder::Elementwise => "elementwise",
    };
    let _ = writeln!(out, "option order = {order};");
    let domain = match spec.options.expansion.domain {
        QuantifierDomain::Full => "full",
        QuantifierDomain::Declared => "declared",
    };
    let _ = writeln!(out, "option quantifiers = {domain};");
    let _ = write!(out, "formula: {}", spec.formula);
    out
}

// ---------------------------------------------------------------------
// Spec generators

/// How [`gen_robustness`] picks perturbations from the Hamming ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallSampling {
    /// Every point of the punctured ball.
    Enumerate,
    /// `count` distinct points, deterministic under `seed`.
    Sample { count: usize, seed: u64 },
}

/// Robustness template: after `n_blocks` blocks, every perturbation of
/// `center` within Hamming distance `eps` maps to the same output as the
/// center itself. The trivial `center = center` conjunct never appears
/// because the ball excludes its center; `eps = 0` therefore yields
/// `true`.
pub fn gen_robustness(
    center: &BitVec,
    eps: usize,
    n_blocks: usize,
    sampling: BallSampling,
) -> Result<Arc<Formula>, FrontendError> {
    if eps > center.width() {
        return Err(FrontendError::EpsTooLarge {
            eps,
            width: center.width(),
        });
    }
    let points = match sampling {
        BallSampling::Enumerate => hamming_ball(center, eps),
        BallSampling::Sample { count, seed } => sample_ball(center, eps, count, seed),
    };
    let lhs = Term::constant(*center).defer(n_blocks);
    Ok(Formula::conj(points.iter().map(|b| {
        Formula::atom(
            lhs.clone(),
            Relation::Eq,
            Term::constant(*b).defer(n_blocks),
        )
    })))
}

/// `count` distinct ball points, deterministic under `seed`: rejection
/// sampling against the already-chosen set, falling back to a sorted
/// sweep of the full ball if collisions exhaust the attempt budget
/// (which implies the ball is small). Asking for at least the whole
/// ball returns exactly the whole ball.
fn sample_ball(center: &BitVec, eps: usize, count: usize, seed: u64) -> Vec<BitVec> {
    if eps == 0 || count == 0 {
        return Vec::new();
    }
    if count as u64 >= ball_size(center.width(), eps) {
        return hamming_ball(center, eps);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut picked = Vec::new();
    let mut attempts = 0u64;
    let budget = 64 * count as u64 + 1024;
    while picked.len() < count && attempts < budget {
        attempts += 1;
        let j = rng.random_range(1..=eps);
        let mut flips = BTreeSet::new();
        while flips.len() < j {
            flips.insert(rng.random_range(0..center.width()));
        }
        let point = center.flip_bits(flips.iter().copied());
        if seen.insert(point) {
            picked.push(point);
        }
    }
    for point in hamming_ball(center, eps) {
        if picked.len() == count {
            break;
        }
        if seen.insert(point) {
            picked.push(point);
        }
    }
    picked
}

/// Number of vectors within distance 1..=eps of a `width`-bit center.
fn ball_size(width: usize, eps: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for j in 1..=eps.min(width) {
        // C(width, j) from C(width, j-1).
        c = c * (width - j + 1) as u64 / j as u64;
        total = total.saturating_add(c);
    }
    total
}

/// Network depths at which [`gen_fairness`] compares the two runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessShape {
    /// Compare outputs after exactly `n` blocks.
    Fixed(usize),
    /// The two runs must meet somewhere, and both end after one of the
    /// two given depths.
    Flexible(usize, usize),
}

/// Fairness template over proper pairs. The fixed shape conjoins
/// `▷ⁿa_i = ▷ⁿb_i` over all pairs; the flexible shape introduces fresh
/// variables `x_i`, `y_i` holding the two runs' outputs and requires
/// them to meet, with the depth chosen uniformly across pairs from the
/// two candidates.
pub fn gen_fairness(
    pairs: &[ProperPair],
    shape: FairnessShape,
) -> Result<Arc<Formula>, FrontendError> {
    let Some(first) = pairs.first() else {
        return Err(FrontendError::NoPairs);
    };
    let width = first.a().width();
    for p in pairs {
        if p.a().width() != width {
            return Err(FrontendError::PairWidths(width, p.a().width()));
        }
    }
    match shape {
        FairnessShape::Fixed(n) => Ok(Formula::conj(pairs.iter().map(|p| {
            Formula::atom(
                Term::constant(*p.a()).defer(n),
                Relation::Eq,
                Term::constant(*p.b()).defer(n),
            )
        }))),
        FairnessShape::Flexible(n1, n2) => {
            let xs: Vec<Term> = (0..pairs.len())
                .map(|i| Term::var(format!("x{i}"), width))
                .collect();
            let ys: Vec<Term> = (0..pairs.len())
                .map(|i| Term::var(format!("y{i}"), width))
                .collect();
            let meet = Formula::finally(Formula::conj(
                xs.iter()
                    .zip(&ys)
                    .map(|(x, y)| Formula::atom(x.clone(), Relation::Eq, y.clone())),
            ));
            let branch = |n: usize| {
                Formula::conj(pairs.iter().enumerate().map(|(i, p)| {
                    Formula::and(
                        Formula::atom(
                            xs[i].clone(),
                            Relation::Eq,
                            Term::constant(*p.a()).defer(n),
                        ),
                        Formula::atom(
                            ys[i].clone(),
                            Relation::Eq,
                            Term::constant(*p.b()).defer(n),
                        ),
                    )
                }))
            };
            Ok(Formula::and(meet, Formula::or(branch(n1), branch(n2))))
        }
    }
}

// ---------------------------------------------------------------------
// Proper pairs and dataset rows

/// How a row's bits split into attributes: attribute `i` spans
/// `widths[i]` consecutive positions, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeLayout {
    widths: Vec<usize>,
}

impl AttributeLayout {
    pub fn new(widths: Vec<usize>) -> Result<AttributeLayout, FrontendError> {
        if widths.is_empty() {
            return Err(FrontendError::Layout("no attributes".into()));
        }
        if let Some(&w) = widths.iter().find(|&&w| w == 0) {
            return Err(FrontendError::Layout(format!("attribute width {w}")));
        }
        let total: usize = widths.iter().sum();
        if total > MAX_WIDTH {
            return Err(FrontendError::Layout(format!(
                "total width {total} exceeds {MAX_WIDTH}"
            )));
        }
        Ok(AttributeLayout { widths })
    }

    pub fn count(&self) -> usize {
        self.widths.len()
    }

    pub fn total(&self) -> usize {
        self.widths.iter().sum()
    }

    /// Bit positions of attribute `s`.
    pub fn span(&self, s: usize) -> Range<usize> {
        assert!(s < self.widths.len(), "attribute {s} out of range");
        let start: usize = self.widths[..s].iter().sum();
        start..start + self.widths[s]
    }
}

/// Two equal-width vectors that agree everywhere except inside one
/// sensitive attribute, where they differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProperPair {
    a: BitVec,
    b: BitVec,
    sensitive: usize,
}

impl ProperPair {
    pub fn new(
        a: BitVec,
        b: BitVec,
        layout: &AttributeLayout,
        sensitive: usize,
    ) -> Result<ProperPair, FrontendError> {
        if a.width() != b.width() {
            return Err(FrontendError::PairWidths(a.width(), b.width()));
        }
        if a.width() != layout.total() {
            return Err(FrontendError::Layout(format!(
                "vector width {} does not match layout width {}",
                a.width(),
                layout.total()
            )));
        }
        if sensitive >= layout.count() {
            return Err(FrontendError::Layout(format!(
                "sensitive attribute {sensitive} out of range for {} attributes",
                layout.count()
            )));
        }
        let span = layout.span(sensitive);
        for p in 0..a.width() {
            if !span.contains(&p) && a.bit(p) != b.bit(p) {
                return Err(FrontendError::DiffersOutside { position: p });
            }
        }
        if a == b {
            return Err(FrontendError::NoSensitiveDifference);
        }
        Ok(ProperPair { a, b, sensitive })
    }

    /// The pair obtained by flipping every bit of the sensitive
    /// attribute; always proper.
    pub fn toggled(
        a: &BitVec,
        layout: &AttributeLayout,
        sensitive: usize,
    ) -> Result<ProperPair, FrontendError> {
        if a.width() != layout.total() {
            return Err(FrontendError::Layout(format!(
                "vector width {} does not match layout width {}",
                a.width(),
                layout.total()
            )));
        }
        if sensitive >= layout.count() {
            return Err(FrontendError::Layout(format!(
                "sensitive attribute {sensitive} out of range for {} attributes",
                layout.count()
            )));
        }
        let b = a.flip_bits(layout.span(sensitive));
        ProperPair::new(*a, b, layout, sensitive)
    }

    pub fn a(&self) -> &BitVec {
        &self.a
    }

    pub fn b(&self) -> &BitVec {
        &self.b
    }

    pub fn sensitive(&self) -> usize {
        self.sensitive
    }
}

/// All proper pairs among the given rows: every unordered pair of rows
/// that agree outside the sensitive attribute and differ inside it.
pub fn pairs_from_rows(
    rows: &[BitVec],
    layout: &AttributeLayout,
    sensitive: usize,
) -> Vec<ProperPair> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if let Ok(pair) = ProperPair::new(*a, *b, layout, sensitive) {
                out.push(pair);
            }
        }
    }
    out
}

/// Parse comma-separated 0/1 rows into bit vectors, one per line. A
/// first line that is not all 0/1 cells is taken as a header and
/// skipped; blank lines are ignored; all rows must have the same number
/// of columns.
pub fn parse_csv_rows(text: &str) -> Result<Vec<BitVec>, FrontendError> {
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    let mut header_allowed = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if let Some(bad) = cells.iter().position(|c| *c != "0" && *c != "1") {
            if header_allowed {
                header_allowed = false;
                continue;
            }
            return Err(FrontendError::Csv {
                line,
                msg: format!("cell {} is '{}', expected 0 or 1", bad + 1, cells[bad]),
            });
        }
        header_allowed = false;
        let bits: String = cells.concat();
        let row = BitVec::parse_bits(&bits).map_err(|e| FrontendError::Csv {
            line,
            msg: e.to_string(),
        })?;
        if let Some(w) = width {
            if row.width() != w {
                return Err(FrontendError::Csv {
                    line,
                    msg: format!("row has {} columns, previous rows have {w}", row.width()),
                });
            }
        } else {
            width = Some(row.width());
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::VectorOrder;

    fn bv(s: &str) -> BitVec {
        BitVec::parse_bits(s).unwrap()
    }

    fn eq(l: Term, r: Term) -> Arc<Formula> {
        Formula::atom(l, Relation::Eq, r)
    }

    #[test]
    fn const_decl_and_deferred_formula() {
        let spec = parse_spec("const a:2 = 01; formula: F(>>^1 a = a)").unwrap();
        let a = Term::constant(bv("01"));
        let expected = Formula::finally(eq(a.clone().defer(1), a));
        assert_eq!(spec.formula, expected);
        assert_eq!(spec.sig.constants, vec![("a".into(), bv("01"))]);
        assert!(spec.sig.variables.is_empty());
    }

    #[test]
    fn undeclared_identifiers_become_unit_variables() {
        let spec = parse_spec("formula: X (a = b) | >>^1 a <= b").unwrap();
        let a = Term::var("a", 1);
        let b = Term::var("b", 1);
        let expected = Formula::or(
            Formula::next(eq(a.clone(), b.clone())),
            Formula::atom(a.defer(1), Relation::Le, b),
        );
        assert_eq!(spec.formula, expected);
        assert_eq!(
            spec.sig.variables,
            vec![("a".into(), 1), ("b".into(), 1)]
        );
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_spec("formula: X (").unwrap_err();
        match err {
            FrontendError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 12);
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
        let err = parse_spec("const a:2 = 01;\nformula: a = ;").unwrap_err();
        match err {
            FrontendError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 14);
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_function_is_reported() {
        let err = parse_spec("formula: g(0b01) = 0b01").unwrap_err();
        assert_eq!(
            err,
            FrontendError::Undeclared {
                line: 1,
                col: 10,
                name: "g".into()
            }
        );
    }

    #[test]
    fn saturated_width_mismatch_is_reported() {
        let err = parse_spec("const a:2 = 01; const c:3 = 010; formula: a = c").unwrap_err();
        assert!(matches!(err, FrontendError::Width { .. }), "{err:?}");
        // Widths hidden behind placeholders are not checked at parse time.
        parse_spec("const a:2 = 01; const c:3 = 010; formula: >> a = c").unwrap();
    }

    #[test]
    fn fn_decl_forms_fold_through_constants() {
        let spec = parse_spec(
            "fn id:2->2 = identity; fn e0:2->1 = extract 0; \
             formula: e0(id(10)) = 0b1",
        )
        .unwrap();
        // id folds away, e0 extracts the most significant bit of 10.
        let expected = eq(Term::constant(bv("1")), Term::constant(bv("1")));
        assert_eq!(spec.formula, expected);

        let table = parse_spec(
            "fn inv:1->1 = [0 -> 1, 1 -> 0]; formula: inv(0) = 1",
        )
        .unwrap();
        assert_eq!(table.funcs[0].1.table(), &[1, 0]);
    }

    #[test]
    fn fn_tables_must_be_total_and_unique() {
        let err = parse_spec("fn f:2->1 = [00 -> 1]; formula: true").unwrap_err();
        match err {
            FrontendError::Syntax { msg, .. } => assert!(msg.contains("missing input 01"), "{msg}"),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        let err =
            parse_spec("fn f:1->1 = [0 -> 1, 0 -> 0]; formula: true").unwrap_err();
        match err {
            FrontendError::Syntax { msg, .. } => assert!(msg.contains("duplicate"), "{msg}"),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn options_set_order_and_quantifier_domain() {
        let spec = parse_spec(
            "option order = elementwise; option quantifiers = declared; formula: true",
        )
        .unwrap();
        assert_eq!(spec.options.order, VectorOrder::Elementwise);
        assert_eq!(spec.options.expansion.domain, QuantifierDomain::Declared);
        let err = parse_spec("option order = upward; formula: true").unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { .. }));
    }

    #[test]
    fn quantifiers_bind_and_shadow() {
        let spec = parse_spec("var x:2; formula: forall x:3 . x = x").unwrap();
        let x = Term::var("x", 3);
        let expected = Arc::new(Formula::Forall {
            var: "x".into(),
            width: 3,
            body: eq(x.clone(), x),
        });
        assert_eq!(spec.formula, expected);
    }

    #[test]
    fn reserved_and_duplicate_names_are_rejected() {
        assert!(matches!(
            parse_spec("var X:1; formula: true").unwrap_err(),
            FrontendError::Syntax { .. }
        ));
        assert!(matches!(
            parse_spec("var a:1; const a:1 = 0; formula: true").unwrap_err(),
            FrontendError::Syntax { .. }
        ));
    }

    #[test]
    fn precedence_matches_the_printer() {
        let sig = Signature::default();
        let cases = [
            "0b1 = 0b1 & 0b0 = 0b0 | 0b1 = 0b0",
            "0b1 = 0b1 -> 0b0 = 0b0 -> 0b1 = 0b1",
            "X 0b1 = 0b1 U 0b0 = 0b0",
            "!0b1 = 0b0 & WX false",
            "(0b1 = 0b1 U 0b0 = 0b0) U 0b1 = 0b1",
            "F (0b1 = 0b1 & G 0b0 = 0b0)",
            "forall v:2 . v = v -> exists u:1 . u < 0b1",
            ">>^3 0b101 != >> 0b000",
        ];
        for text in cases {
            let f = parse_formula(text, &sig, &[]).unwrap();
            let printed = f.to_string();
            let again = parse_formula(&printed, &sig, &[]).unwrap();
            assert_eq!(f, again, "round trip through {printed:?}");
        }
    }

    #[test]
    fn spec_files_round_trip_through_print() {
        let text = "const a:2 = 01; var v:3; fn inv:1->1 = [0 -> 1, 1 -> 0]; \
                    option order = elementwise; \
                    formula: G (inv(>> 1) = 0b0 -> >>^2 a = a & v >= v)";
        let spec = parse_spec(text).unwrap();
        let printed = print_spec(&spec);
        let again = parse_spec(&printed).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn robustness_enumerates_the_punctured_ball() {
        let f = gen_robustness(&bv("10"), 1, 1, BallSampling::Enumerate).unwrap();
        let lhs = Term::constant(bv("10")).defer(1);
        let expected = Formula::and(
            eq(lhs.clone(), Term::constant(bv("00")).defer(1)),
            eq(lhs, Term::constant(bv("11")).defer(1)),
        );
        assert_eq!(f, expected);
        // Radius zero leaves only the dropped identity conjunct.
        let trivial = gen_robustness(&bv("1010"), 0, 1, BallSampling::Enumerate).unwrap();
        assert_eq!(trivial, Formula::tt());
    }

    #[test]
    fn robustness_atom_count_matches_ball_size() {
        fn atoms(f: &Arc<Formula>) -> usize {
            match &**f {
                Formula::And(a, b) => atoms(a) + atoms(b),
                Formula::Atom(_) => 1,
                Formula::True => 0,
                other => panic!("unexpected connective {other:?}"),
            }
        }
        for (width, eps) in [(4usize, 2usize), (5, 1), (3, 3), (4, 0)] {
            let u = BitVec::bin(0, width).unwrap();
            let f = gen_robustness(&u, eps, 2, BallSampling::Enumerate).unwrap();
            assert_eq!(atoms(&f) as u64, ball_size(width, eps), "({width},{eps})");
        }
        assert_eq!(ball_size(4, 2), 10);
    }

    #[test]
    fn robustness_rejects_oversized_radius() {
        assert_eq!(
            gen_robustness(&bv("10"), 3, 1, BallSampling::Enumerate).unwrap_err(),
            FrontendError::EpsTooLarge { eps: 3, width: 2 }
        );
    }

    #[test]
    fn sampled_robustness_is_deterministic_and_stays_in_the_ball() {
        let u = bv("1010");
        let sampling = BallSampling::Sample { count: 2, seed: 7 };
        let f1 = gen_robustness(&u, 1, 1, sampling).unwrap();
        let f2 = gen_robustness(&u, 1, 1, sampling).unwrap();
        assert_eq!(f1, f2);
        fn rhs_consts(f: &Arc<Formula>, out: &mut Vec<BitVec>) {
            match &**f {
                Formula::And(a, b) => {
                    rhs_consts(a, out);
                    rhs_consts(b, out);
                }
                Formula::Atom(atom) => {
                    let t = atom.rhs.collapse_value().unwrap();
                    out.push(t);
                }
                other => panic!("unexpected connective {other:?}"),
            }
        }
        let mut points = Vec::new();
        rhs_consts(&f1, &mut points);
        assert_eq!(points.len(), 2);
        for p in &points {
            assert_eq!(u.hamming(p).unwrap(), 1);
        }
        // Oversampling returns the whole ball exactly once.
        let all = gen_robustness(&u, 1, 0, BallSampling::Sample { count: 99, seed: 0 }).unwrap();
        let mut everything = Vec::new();
        rhs_consts(&all, &mut everything);
        let dedup: BTreeSet<_> = everything.iter().copied().collect();
        assert_eq!(dedup.len(), 4);
    }

    #[test]
    fn fairness_fixed_conjoins_pair_atoms() {
        let layout = AttributeLayout::new(vec![1, 1]).unwrap();
        let p1 = ProperPair::toggled(&bv("00"), &layout, 0).unwrap();
        let f = gen_fairness(&[p1], FairnessShape::Fixed(2)).unwrap();
        let expected = eq(
            Term::constant(bv("00")).defer(2),
            Term::constant(bv("10")).defer(2),
        );
        assert_eq!(f, expected);
        let p2 = ProperPair::toggled(&bv("01"), &layout, 0).unwrap();
        let two = gen_fairness(&[p1, p2], FairnessShape::Fixed(3)).unwrap();
        assert!(matches!(&*two, Formula::And(..)));
    }

    #[test]
    fn fairness_flexible_builds_the_two_depth_template() {
        let layout = AttributeLayout::new(vec![1, 1]).unwrap();
        let p = ProperPair::toggled(&bv("01"), &layout, 0).unwrap();
        let f = gen_fairness(&[p], FairnessShape::Flexible(2, 3)).unwrap();
        let x = Term::var("x0", 2);
        let y = Term::var("y0", 2);
        let branch = |n: usize| {
            Formula::and(
                eq(x.clone(), Term::constant(bv("01")).defer(n)),
                eq(y.clone(), Term::constant(bv("11")).defer(n)),
            )
        };
        let expected = Formula::and(
            Formula::finally(eq(x.clone(), y.clone())),
            Formula::or(branch(2), branch(3)),
        );
        assert_eq!(f, expected);
        // The printed template parses back against a signature that
        // declares the meet variables.
        let sig = Signature {
            constants: vec![],
            variables: vec![("x0".into(), 2), ("y0".into(), 2)],
        };
        let again = parse_formula(&f.to_string(), &sig, &[]).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn fairness_rejects_empty_and_uneven_input() {
        assert_eq!(
            gen_fairness(&[], FairnessShape::Fixed(1)).unwrap_err(),
            FrontendError::NoPairs
        );
        let narrow = AttributeLayout::new(vec![1, 1]).unwrap();
        let wide = AttributeLayout::new(vec![1, 2]).unwrap();
        let p1 = ProperPair::toggled(&bv("00"), &narrow, 0).unwrap();
        let p2 = ProperPair::toggled(&bv("000"), &wide, 0).unwrap();
        assert_eq!(
            gen_fairness(&[p1, p2], FairnessShape::Fixed(1)).unwrap_err(),
            FrontendError::PairWidths(2, 3)
        );
    }

    #[test]
    fn proper_pairs_differ_exactly_in_the_sensitive_attribute() {
        let layout = AttributeLayout::new(vec![1, 2, 1]).unwrap();
        // Differ inside attribute 1 only.
        let ok = ProperPair::new(bv("0011"), bv("0101"), &layout, 1).unwrap();
        for p in 0..4 {
            let inside = layout.span(1).contains(&p);
            let differs = ok.a().bit(p) != ok.b().bit(p);
            assert!(inside || !differs, "position {p}");
        }
        assert_eq!(
            ProperPair::new(bv("0011"), bv("0010"), &layout, 1).unwrap_err(),
            FrontendError::DiffersOutside { position: 3 }
        );
        assert_eq!(
            ProperPair::new(bv("0011"), bv("0011"), &layout, 1).unwrap_err(),
            FrontendError::NoSensitiveDifference
        );
        // The toggle builder flips the full span.
        let t = ProperPair::toggled(&bv("0011"), &layout, 1).unwrap();
        assert_eq!(*t.b(), bv("0101"));
        assert_eq!(t.sensitive(), 1);
    }

    #[test]
    fn row_pairing_keeps_only_proper_combinations() {
        let layout = AttributeLayout::new(vec![1, 1]).unwrap();
        let rows = vec![bv("00"), bv("10"), bv("01"), bv("11")];
        let pairs = pairs_from_rows(&rows, &layout, 0);
        // 00-10 and 01-11 differ in attribute 0 only.
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert_eq!(p.a().bit(1), p.b().bit(1));
            assert_ne!(p.a().bit(0), p.b().bit(0));
        }
    }

    #[test]
    fn csv_rows_parse_with_optional_header() {
        let rows = parse_csv_rows("age,credit,label\n0,1,1\n1,0,1\n\n0,0,0\n").unwrap();
        assert_eq!(rows, vec![bv("011"), bv("101"), bv("000")]);
        let err = parse_csv_rows("0,1\n0,2\n").unwrap_err();
        assert_eq!(
            err,
            FrontendError::Csv {
                line: 2,
                msg: "cell 2 is '2', expected 0 or 1".into()
            }
        );
        let err = parse_csv_rows("0,1\n0,1,1\n").unwrap_err();
        assert!(matches!(err, FrontendError::Csv { line: 2, .. }));
    }
}
