//! Concrete syntax: lexing, parsing, printing, and the command-line interface.

use crate::gen::{self, GenConfig};
use crate::laws;
use crate::opsem;
use crate::semantics::{self, CanonicityOutcome, CheckConfig, CheckReport, TypeValue, Verdict};
use crate::syntax::{
    arr, coe, expand_not, fresh_dim, hcom, ifb, lam, loop_, notb, notel, pair, prd, s1elim, var,
    Dim, DimCtx, DimName, Term, TermVar,
};
use clap::{Parser as ClapParser, Subcommand};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use thiserror::Error;

/// A region of source text. Lines and columns are 1-based; ends are inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
    }
}

/// A parse failure, pointing at the first offending source region.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

fn diag(span: SourceSpan, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        span,
        message: message.into(),
    }
}

const KEYWORDS: &[&str] = &[
    "arr", "prd", "bool", "S1", "not", "notb", "notel", "lam", "app", "pair", "fst", "snd",
    "true", "false", "if", "base", "loop", "S1-elim", "coe", "hcom", "dim", "eq",
];

fn is_keyword(text: &str) -> bool {
    KEYWORDS.contains(&text)
}

fn is_ident(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '\'' || c == '_' || c == '-')
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum TokenKind {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Atom(String),
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    span: SourceSpan,
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '\'' || c == '_' || c == '-'
}

fn lex(text: &str, file: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span_here = |line: u32, col: u32| SourceSpan {
            file: file.to_string(),
            line_start: line,
            col_start: col,
            line_end: line,
            col_end: col,
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            _ if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' | ')' | '[' | ']' => {
                chars.next();
                let kind = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    _ => TokenKind::RBracket,
                };
                tokens.push(Token {
                    kind,
                    span: span_here(line, col),
                });
                col += 1;
            }
            _ if is_atom_char(c) => {
                let start_col = col;
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if is_atom_char(c) {
                        atom.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Atom(atom),
                    span: SourceSpan {
                        file: file.to_string(),
                        line_start: line,
                        col_start: start_col,
                        line_end: line,
                        col_end: col - 1,
                    },
                });
            }
            _ => {
                return Err(diag(
                    span_here(line, col),
                    format!("unexpected character '{c}'"),
                ));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof_span: SourceSpan,
}

impl Parser {
    fn new(text: &str, file: &str) -> Result<Self, Diagnostic> {
        let tokens = lex(text, file)?;
        let eof_span = tokens.last().map(|t| t.span.clone()).unwrap_or(SourceSpan {
            file: file.to_string(),
            line_start: 1,
            col_start: 1,
            line_end: 1,
            col_end: 1,
        });
        Ok(Parser {
            tokens,
            pos: 0,
            eof_span,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &str) -> Result<Token, Diagnostic> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(diag(
                self.eof_span.clone(),
                format!("unexpected end of input, expected {expected}"),
            )),
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, Diagnostic> {
        let tok = self.next(expected)?;
        if tok.kind == kind {
            Ok(tok)
        } else {
            Err(diag(
                tok.span,
                format!("expected {expected}, found {}", describe(&tok.kind)),
            ))
        }
    }

    fn atom(&mut self, expected: &str) -> Result<(String, SourceSpan), Diagnostic> {
        let tok = self.next(expected)?;
        match tok.kind {
            TokenKind::Atom(text) => Ok((text, tok.span)),
            other => Err(diag(
                tok.span,
                format!("expected {expected}, found {}", describe(&other)),
            )),
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, SourceSpan), Diagnostic> {
        let (text, span) = self.atom(expected)?;
        if is_keyword(&text) {
            return Err(diag(
                span,
                format!("expected {expected}, found keyword '{text}'"),
            ));
        }
        if !is_ident(&text) {
            return Err(diag(span, format!("'{text}' is not a valid name")));
        }
        Ok((text, span))
    }

    fn dim(&mut self) -> Result<Dim, Diagnostic> {
        let (text, span) = self.atom("a dimension")?;
        match text.as_str() {
            "0" => Ok(Dim::Zero),
            "1" => Ok(Dim::One),
            _ if is_keyword(&text) => Err(diag(
                span,
                format!("expected a dimension, found keyword '{text}'"),
            )),
            _ if is_ident(&text) => Ok(Dim::name(&text)),
            _ => Err(diag(span, format!("'{text}' is not a dimension"))),
        }
    }

    /// Parses `[x BODY]` and hands the body to `inner` with the binder in hand.
    fn binder<T>(
        &mut self,
        what: &str,
        inner: impl FnOnce(&mut Self) -> Result<T, Diagnostic>,
    ) -> Result<(String, T), Diagnostic> {
        self.expect(TokenKind::LBracket, what)?;
        let (name, _) = self.ident("a binder name")?;
        let body = inner(self)?;
        self.expect(TokenKind::RBracket, "']'")?;
        Ok((name, body))
    }

    fn term(&mut self) -> Result<Term, Diagnostic> {
        let tok = self.next("a term")?;
        match tok.kind {
            TokenKind::Atom(text) => match text.as_str() {
                "bool" => Ok(Term::Bool),
                "S1" => Ok(Term::Circle),
                "true" => Ok(Term::True),
                "false" => Ok(Term::False),
                "base" => Ok(Term::Base),
                _ if is_keyword(&text) => Err(diag(
                    tok.span,
                    format!("keyword '{text}' cannot stand alone"),
                )),
                _ if is_ident(&text) => Ok(var(&text)),
                _ => Err(diag(tok.span, format!("'{text}' is not a term"))),
            },
            TokenKind::LParen => {
                let (head, head_span) = self.atom("a form keyword")?;
                let term = self.form(&head, &head_span)?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(term)
            }
            TokenKind::LBracket => Err(diag(
                tok.span,
                "a binder bracket is not a term".to_string(),
            )),
            other => Err(diag(
                tok.span,
                format!("expected a term, found {}", describe(&other)),
            )),
        }
    }

    fn form(&mut self, head: &str, head_span: &SourceSpan) -> Result<Term, Diagnostic> {
        match head {
            "arr" => Ok(arr(self.term()?, self.term()?)),
            "prd" => Ok(prd(self.term()?, self.term()?)),
            "notb" => Ok(notb(self.dim()?)),
            "not" => Ok(expand_not(self.term()?)),
            "lam" => {
                let (param, body) = self.binder("a '[name body]' binder", Self::term)?;
                Ok(lam(TermVar::new(&param), body))
            }
            "app" => Ok(app2(self.term()?, self.term()?)),
            "pair" => Ok(pair(self.term()?, self.term()?)),
            "fst" => Ok(crate::syntax::fst(self.term()?)),
            "snd" => Ok(crate::syntax::snd(self.term()?)),
            "if" => Ok(ifb(self.term()?, self.term()?, self.term()?, self.term()?)),
            "notel" => Ok(notel(self.dim()?, self.term()?)),
            "loop" => Ok(loop_(self.dim()?)),
            "S1-elim" => {
                let motive = self.term()?;
                let scrut = self.term()?;
                let base_case = self.term()?;
                let (name, loop_case) = self.binder("a '[name body]' loop case", Self::term)?;
                Ok(s1elim(
                    motive,
                    scrut,
                    base_case,
                    DimName::new(&name),
                    loop_case,
                ))
            }
            "coe" => {
                let (name, line) = self.binder("a '[name type]' line", Self::term)?;
                let from = self.dim()?;
                let to = self.dim()?;
                let arg = self.term()?;
                Ok(coe(DimName::new(&name), line, from, to, arg))
            }
            "hcom" => {
                let extent = self.dim()?;
                let ty = self.term()?;
                let from = self.dim()?;
                let to = self.dim()?;
                let cap = self.term()?;
                let (bind0, body0) = self.binder("a '[name term]' tube", Self::term)?;
                let (bind1, body1) = self.binder("a '[name term]' tube", Self::term)?;
                let (tube_dim, tube0, tube1) =
                    unify_tube_binders(&bind0, body0, &bind1, body1);
                Ok(hcom(extent, ty, from, to, cap, tube_dim, tube0, tube1))
            }
            "dim" => Err(diag(
                head_span.clone(),
                "a dimension header is only allowed at the start of a file".to_string(),
            )),
            "eq" => Err(diag(
                head_span.clone(),
                "an equality form is only allowed at the top level of a file".to_string(),
            )),
            _ => Err(diag(head_span.clone(), format!("unknown form '{head}'"))),
        }
    }
}

fn app2(func: Term, arg: Term) -> Term {
    crate::syntax::app(func, arg)
}

/// Renames both tube bodies to share one binder without capturing free names.
fn unify_tube_binders(bind0: &str, body0: Term, bind1: &str, body1: Term) -> (DimName, Term, Term) {
    let b0 = DimName::new(bind0);
    let b1 = DimName::new(bind1);
    if b0 == b1 {
        return (b0, body0, body1);
    }
    let mut avoid = body0.free_dims();
    avoid.remove(&b0);
    let mut frees1 = body1.free_dims();
    frees1.remove(&b1);
    avoid.extend(frees1);
    let shared = if avoid.contains(&b0) {
        fresh_dim(b0, &avoid)
    } else {
        b0
    };
    let tube0 = if shared == b0 {
        body0
    } else {
        body0.subst_dim(b0, Dim::Name(shared))
    };
    let tube1 = body1.subst_dim(b1, Dim::Name(shared));
    (shared, tube0, tube1)
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::LParen => "'('".to_string(),
        TokenKind::RParen => "')'".to_string(),
        TokenKind::LBracket => "'['".to_string(),
        TokenKind::RBracket => "']'".to_string(),
        TokenKind::Atom(text) => format!("'{text}'"),
    }
}

/// Parses a single term. Free dimension names are allowed.
pub fn parse(text: &str) -> Result<Term, Diagnostic> {
    let mut parser = Parser::new(text, "<input>")?;
    let term = parser.term()?;
    if let Some(tok) = parser.peek() {
        return Err(diag(tok.span.clone(), "unexpected trailing input".to_string()));
    }
    Ok(term)
}

/// One entry of an input file.
#[derive(Clone, Debug, PartialEq)]
pub enum FileItem {
    Term(Term),
    Eq { ty: Term, lhs: Term, rhs: Term },
}

/// A parsed input file: the declared dimension context and its entries.
#[derive(Clone, Debug, PartialEq)]
pub struct InputFile {
    pub ctx: DimCtx,
    pub items: Vec<FileItem>,
}

/// Parses a file: an optional `(dim ...)` header followed by terms or
/// `(eq TYPE LHS RHS)` entries. Every free dimension name must be declared.
pub fn parse_file(text: &str, file: &str) -> Result<InputFile, Diagnostic> {
    let mut parser = Parser::new(text, file)?;
    let mut ctx = DimCtx::new();

    let mut header = false;
    if let Some(tok) = parser.peek() {
        if tok.kind == TokenKind::LParen {
            if let Some(Token {
                kind: TokenKind::Atom(head),
                ..
            }) = parser.tokens.get(parser.pos + 1)
            {
                header = head == "dim";
            }
        }
    }
    if header {
        parser.next("'('")?;
        parser.next("'dim'")?;
        loop {
            let tok = parser.next("a dimension name or ')'")?;
            match tok.kind {
                TokenKind::RParen => break,
                TokenKind::Atom(text) if !is_keyword(&text) && is_ident(&text) => {
                    let name = DimName::new(&text);
                    if ctx.contains(name) {
                        return Err(diag(
                            tok.span,
                            format!("dimension name '{text}' is declared twice"),
                        ));
                    }
                    ctx = ctx.extended(name);
                }
                other => {
                    return Err(diag(
                        tok.span,
                        format!("expected a dimension name, found {}", describe(&other)),
                    ));
                }
            }
        }
    }

    let mut items = Vec::new();
    while let Some(tok) = parser.peek() {
        let item_span = tok.span.clone();
        let item = if is_eq_form(&parser) {
            parser.next("'('")?;
            parser.next("'eq'")?;
            let ty = parser.term()?;
            let lhs = parser.term()?;
            let rhs = parser.term()?;
            parser.expect(TokenKind::RParen, "')'")?;
            FileItem::Eq { ty, lhs, rhs }
        } else {
            FileItem::Term(parser.term()?)
        };
        check_scope(&item, &ctx, &item_span)?;
        items.push(item);
    }
    if items.is_empty() {
        return Err(diag(parser.eof_span.clone(), "empty input".to_string()));
    }
    Ok(InputFile { ctx, items })
}

fn is_eq_form(parser: &Parser) -> bool {
    match (parser.tokens.get(parser.pos), parser.tokens.get(parser.pos + 1)) {
        (
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }),
            Some(Token {
                kind: TokenKind::Atom(head),
                ..
            }),
        ) => head == "eq",
        _ => false,
    }
}

fn check_scope(item: &FileItem, ctx: &DimCtx, span: &SourceSpan) -> Result<(), Diagnostic> {
    let terms: Vec<&Term> = match item {
        FileItem::Term(t) => vec![t],
        FileItem::Eq { ty, lhs, rhs } => vec![ty, lhs, rhs],
    };
    for term in terms {
        for name in term.free_dims() {
            if !ctx.contains(name) {
                return Err(diag(
                    span.clone(),
                    format!(
                        "dimension name '{}' is not declared in the header",
                        name.text()
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Renders a term in the concrete syntax. Parsing the result yields the
/// same term back.
pub fn print(term: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, term);
    out
}

fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Var(a) => out.push_str(a.text()),
        Term::Arr(dom, cod) => write_form(out, "arr", |out| {
            write_term(out, dom);
            out.push(' ');
            write_term(out, cod);
        }),
        Term::Prd(left, right) => write_form(out, "prd", |out| {
            write_term(out, left);
            out.push(' ');
            write_term(out, right);
        }),
        Term::Bool => out.push_str("bool"),
        Term::Notb(r) => write_form(out, "notb", |out| {
            out.push_str(&r.to_string());
        }),
        Term::Circle => out.push_str("S1"),
        Term::Lam(param, body) => write_form(out, "lam", |out| {
            write_binder(out, param.text(), body);
        }),
        Term::App(func, arg) => write_form(out, "app", |out| {
            write_term(out, func);
            out.push(' ');
            write_term(out, arg);
        }),
        Term::Pair(left, right) => write_form(out, "pair", |out| {
            write_term(out, left);
            out.push(' ');
            write_term(out, right);
        }),
        Term::Fst(p) => write_form(out, "fst", |out| write_term(out, p)),
        Term::Snd(p) => write_form(out, "snd", |out| write_term(out, p)),
        Term::True => out.push_str("true"),
        Term::False => out.push_str("false"),
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => write_form(out, "if", |out| {
            write_term(out, motive);
            out.push(' ');
            write_term(out, scrut);
            out.push(' ');
            write_term(out, tt);
            out.push(' ');
            write_term(out, ff);
        }),
        Term::Notel(r, body) => write_form(out, "notel", |out| {
            out.push_str(&r.to_string());
            out.push(' ');
            write_term(out, body);
        }),
        Term::Base => out.push_str("base"),
        Term::Loop(r) => write_form(out, "loop", |out| {
            out.push_str(&r.to_string());
        }),
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_dim,
            loop_case,
        } => write_form(out, "S1-elim", |out| {
            write_term(out, motive);
            out.push(' ');
            write_term(out, scrut);
            out.push(' ');
            write_term(out, base_case);
            out.push(' ');
            write_binder(out, loop_dim.text(), loop_case);
        }),
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => write_form(out, "coe", |out| {
            write_binder(out, dim.text(), line);
            out.push(' ');
            out.push_str(&from.to_string());
            out.push(' ');
            out.push_str(&to.to_string());
            out.push(' ');
            write_term(out, arg);
        }),
        Term::Hcom {
            extent,
            ty,
            from,
            to,
            cap,
            tube_dim,
            tube0,
            tube1,
        } => write_form(out, "hcom", |out| {
            out.push_str(&extent.to_string());
            out.push(' ');
            write_term(out, ty);
            out.push(' ');
            out.push_str(&from.to_string());
            out.push(' ');
            out.push_str(&to.to_string());
            out.push(' ');
            write_term(out, cap);
            out.push(' ');
            write_binder(out, tube_dim.text(), tube0);
            out.push(' ');
            write_binder(out, tube_dim.text(), tube1);
        }),
    }
}

fn write_form(out: &mut String, head: &str, body: impl FnOnce(&mut String)) {
    out.push('(');
    out.push_str(head);
    out.push(' ');
    body(out);
    out.push(')');
}

fn write_binder(out: &mut String, name: &str, body: &Term) {
    out.push('[');
    out.push_str(name);
    out.push(' ');
    write_term(out, body);
    out.push(']');
}

const EXIT_OK: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(ClapParser)]
#[command(
    name = "cubecheck",
    version,
    about = "Evaluator and exact-equality checker for a small cubical language"
)]
struct Cli {
    /// Step budget per evaluation
    #[arg(long, global = true, default_value_t = opsem::DEFAULT_FUEL)]
    fuel: usize,
    /// Recursion budget through composition value clauses
    #[arg(long, global = true, default_value_t = CheckConfig::default().depth)]
    depth: usize,
    /// Extra fresh names carried by each enumerated substitution
    #[arg(long, global = true, default_value_t = CheckConfig::default().fresh_budget)]
    fresh_budget: usize,
    /// Number of arguments used when probing function values
    #[arg(long, global = true, default_value_t = CheckConfig::default().probe_count)]
    probe_count: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate each term in FILE and print the value reached
    Eval { file: PathBuf },
    /// Print the full reduction sequence of each term in FILE
    Trace { file: PathBuf },
    /// Check each (eq TYPE LHS RHS) entry in FILE
    CheckEq { file: PathBuf },
    /// Check that each term in FILE is a pretype
    CheckPretype { file: PathBuf },
    /// Run each boolean term in FILE and require it to reach true or false
    Canonicity { file: PathBuf },
    /// Generate closed boolean terms and flag any that miss true and false
    Fuzz {
        /// Base seed; term i is generated from seed + i
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of terms to generate
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Node budget per term
        #[arg(long, default_value_t = 20)]
        size: usize,
    },
    /// Run the curated law suite, or one case by id
    Laws {
        /// Run only the case with this id
        #[arg(long)]
        case: Option<String>,
    },
    /// Print each term's value under every enumerated dimension substitution
    Aspects { file: PathBuf },
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 when a check fails, 2 on usage or parse errors.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(String::as_str)) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    if [cli.fuel, cli.depth, cli.fresh_budget, cli.probe_count].contains(&0) {
        let _ = writeln!(err, "error: budgets must be positive");
        return EXIT_USAGE;
    }
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(_) => EXIT_CHECK_FAILED,
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let cfg = CheckConfig {
        fuel: cli.fuel,
        fresh_budget: cli.fresh_budget,
        depth: cli.depth,
        probe_count: cli.probe_count,
    };
    match &cli.command {
        Command::Eval { file } => cmd_eval(file, cli.fuel, out, err),
        Command::Trace { file } => cmd_trace(file, cli.fuel, out, err),
        Command::CheckEq { file } => cmd_check_eq(file, &cfg, out, err),
        Command::CheckPretype { file } => cmd_check_pretype(file, &cfg, out, err),
        Command::Canonicity { file } => cmd_canonicity(file, cli.fuel, out, err),
        Command::Fuzz { seed, count, size } => cmd_fuzz(*seed, *count, *size, cli.fuel, out),
        Command::Laws { case } => cmd_laws(case.as_deref(), &cfg, out, err),
        Command::Aspects { file } => cmd_aspects(file, &cfg, out, err),
    }
}

/// Reads and parses an input file, reporting problems as usage errors.
fn load(path: &PathBuf, err: &mut dyn Write) -> io::Result<Result<InputFile, i32>> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            writeln!(err, "error: {}: {e}", path.display())?;
            return Ok(Err(EXIT_USAGE));
        }
    };
    match parse_file(&text, &path.to_string_lossy()) {
        Ok(input) => Ok(Ok(input)),
        Err(diagnostic) => {
            writeln!(err, "error: {diagnostic}")?;
            Ok(Err(EXIT_USAGE))
        }
    }
}

/// Splits a parsed file into plain terms, rejecting equation entries.
fn term_items(input: &InputFile, err: &mut dyn Write) -> io::Result<Result<Vec<Term>, i32>> {
    let mut terms = Vec::new();
    for item in &input.items {
        match item {
            FileItem::Term(t) => terms.push(t.clone()),
            FileItem::Eq { .. } => {
                writeln!(err, "error: expected terms, found an (eq ...) entry")?;
                return Ok(Err(EXIT_USAGE));
            }
        }
    }
    Ok(Ok(terms))
}

fn report_line(report: &CheckReport) -> String {
    match report.verdict {
        Verdict::Holds {
            modulo_probes: false,
        } => "holds".to_string(),
        Verdict::Holds {
            modulo_probes: true,
        } => "holds (function values compared on probe arguments)".to_string(),
        Verdict::Inconclusive => "inconclusive (budget exceeded)".to_string(),
        Verdict::Fails => match &report.witness {
            Some(w) => format!("fails at {} / {}: {}", w.subst1, w.subst2, w.clause),
            None => "fails".to_string(),
        },
    }
}

fn cmd_eval(
    path: &PathBuf,
    fuel: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    let terms = match term_items(&input, err)? {
        Ok(terms) => terms,
        Err(code) => return Ok(code),
    };
    let mut code = EXIT_OK;
    for term in &terms {
        match opsem::eval(term, fuel) {
            Ok(value) => writeln!(out, "{}", print(&value))?,
            Err(e) => {
                writeln!(err, "error: {e}")?;
                code = EXIT_CHECK_FAILED;
            }
        }
    }
    Ok(code)
}

fn cmd_trace(
    path: &PathBuf,
    fuel: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    let terms = match term_items(&input, err)? {
        Ok(terms) => terms,
        Err(code) => return Ok(code),
    };
    let mut code = EXIT_OK;
    for (index, term) in terms.iter().enumerate() {
        if index > 0 {
            writeln!(out)?;
        }
        let trace = opsem::trace(term, fuel);
        for step in &trace.steps {
            writeln!(out, "{}", print(step))?;
        }
        writeln!(out, "-- {}", trace.verdict)?;
        if trace.verdict != opsem::TraceVerdict::Value {
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}

fn cmd_check_eq(
    path: &PathBuf,
    cfg: &CheckConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    let mut code = EXIT_OK;
    let mut checked = 0;
    for item in &input.items {
        let FileItem::Eq { ty, lhs, rhs } = item else {
            writeln!(err, "error: expected (eq TYPE LHS RHS) entries")?;
            return Ok(EXIT_USAGE);
        };
        checked += 1;
        let report = semantics::ceqtm(ty, lhs, rhs, &input.ctx, cfg);
        writeln!(out, "eq {checked}: {}", report_line(&report))?;
        if !matches!(report.verdict, Verdict::Holds { .. }) {
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}

fn cmd_check_pretype(
    path: &PathBuf,
    cfg: &CheckConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    let terms = match term_items(&input, err)? {
        Ok(terms) => terms,
        Err(code) => return Ok(code),
    };
    let mut code = EXIT_OK;
    for (index, term) in terms.iter().enumerate() {
        let report = semantics::ceqpretype(term, term, &input.ctx, cfg);
        writeln!(out, "pretype {}: {}", index + 1, report_line(&report))?;
        if !matches!(report.verdict, Verdict::Holds { .. }) {
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}

fn cmd_canonicity(
    path: &PathBuf,
    fuel: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    if !input.ctx.names().is_empty() {
        writeln!(err, "error: canonicity takes dimensionless terms; drop the (dim ...) header")?;
        return Ok(EXIT_USAGE);
    }
    let terms = match term_items(&input, err)? {
        Ok(terms) => terms,
        Err(code) => return Ok(code),
    };
    let mut non_boolean = false;
    let mut suspect = false;
    for term in &terms {
        let outcome = semantics::canonicity_check(term, fuel);
        match outcome {
            CanonicityOutcome::True | CanonicityOutcome::False => {
                writeln!(out, "{outcome}")?;
            }
            CanonicityOutcome::NonBoolean(_) => {
                writeln!(err, "error: {outcome}")?;
                non_boolean = true;
            }
            CanonicityOutcome::Suspect(_) => {
                writeln!(err, "error: {outcome}")?;
                suspect = true;
            }
        }
    }
    Ok(if non_boolean {
        EXIT_USAGE
    } else if suspect {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    })
}

fn cmd_fuzz(seed: u64, count: u64, size: usize, fuel: usize, out: &mut dyn Write) -> io::Result<i32> {
    let psi = DimCtx::new();
    let canonical = |term: &Term| {
        matches!(
            semantics::canonicity_check(term, fuel),
            CanonicityOutcome::True | CanonicityOutcome::False
        )
    };
    let mut failures = 0u64;
    for offset in 0..count {
        let term_seed = seed.wrapping_add(offset);
        let gen_cfg = GenConfig {
            seed: term_seed,
            size,
            ..GenConfig::default()
        };
        let term = gen::gen_term(&TypeValue::Bool, &psi, &gen_cfg);
        if canonical(&term) {
            continue;
        }
        failures += 1;
        let small = gen::shrink(&term, |t| !canonical(t));
        let file = format!("fuzz-failure-{term_seed}.cube");
        fs::write(&file, format!("{}\n", print(&small)))?;
        writeln!(
            out,
            "seed {term_seed}: {} (wrote {file})",
            semantics::canonicity_check(&small, fuel)
        )?;
    }
    writeln!(out, "{count} terms checked, {failures} failures")?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_laws(
    case: Option<&str>,
    cfg: &CheckConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let summary = match case {
        None => laws::run_suite(cfg),
        Some(id) => {
            let Some(case) = laws::suite().into_iter().find(|c| c.case_id() == id) else {
                writeln!(err, "error: unknown case id '{id}'")?;
                return Ok(EXIT_USAGE);
            };
            laws::run_cases(&[case], cfg)
        }
    };
    writeln!(out, "{summary}")?;
    Ok(if summary.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_aspects(
    path: &PathBuf,
    cfg: &CheckConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let input = match load(path, err)? {
        Ok(input) => input,
        Err(code) => return Ok(code),
    };
    let terms = match term_items(&input, err)? {
        Ok(terms) => terms,
        Err(code) => return Ok(code),
    };
    let mut code = EXIT_OK;
    for (index, term) in terms.iter().enumerate() {
        if index > 0 {
            writeln!(out)?;
        }
        for subst in semantics::enumerate_substs(&input.ctx, cfg) {
            let aspect = match term.apply_subst(&subst) {
                Ok(aspect) => aspect,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    code = EXIT_CHECK_FAILED;
                    continue;
                }
            };
            match opsem::eval(&aspect, cfg.fuel) {
                Ok(value) => writeln!(out, "{subst} |- {}", print(&value))?,
                Err(e) => {
                    writeln!(err, "error: under {subst}: {e}")?;
                    code = EXIT_CHECK_FAILED;
                }
            }
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{app, fst, snd, testgen, Term};
    use proptest::prelude::*;

    fn x() -> DimName {
        DimName::new("x")
    }

    #[test]
    fn parses_a_coercion() {
        let got = parse("(coe [x bool] 0 1 true)").unwrap();
        let want = coe(x(), Term::Bool, Dim::Zero, Dim::One, Term::True);
        assert_eq!(got, want);
    }

    #[test]
    fn parses_a_composition() {
        let got = parse("(hcom x bool 0 1 true [y true] [y true])").unwrap();
        let want = hcom(
            Dim::name("x"),
            Term::Bool,
            Dim::Zero,
            Dim::One,
            Term::True,
            DimName::new("y"),
            Term::True,
            Term::True,
        );
        assert_eq!(got, want);
    }

    #[test]
    fn negation_desugars_to_a_conditional() {
        let got = parse("(not true)").unwrap();
        assert_eq!(got, expand_not(Term::True));
        assert_eq!(print(&got), "(if bool true false true)");
    }

    #[test]
    fn mismatched_tube_binders_are_unified() {
        let got = parse("(hcom x bool 0 1 true [y true] [z (loop z)])").unwrap();
        let want = parse("(hcom x bool 0 1 true [y true] [y (loop y)])").unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn tube_binder_unification_avoids_capture() {
        let got = parse_file("(dim y) (hcom y S1 0 1 base [y base] [z (loop y)])", "t.cube");
        let file = got.unwrap();
        match &file.items[0] {
            FileItem::Term(Term::Hcom {
                tube_dim, tube1, ..
            }) => {
                assert_ne!(*tube_dim, DimName::new("y"));
                assert_eq!(**tube1, loop_(Dim::name("y")));
            }
            other => panic!("expected a composition, got {other:?}"),
        }
    }

    #[test]
    fn reports_the_first_error_with_its_position() {
        let err = parse("(coe [x bool] 0 2true true)").unwrap_err();
        assert_eq!(err.span.line_start, 1);
        assert_eq!(err.span.col_start, 17);
        assert!(err.message.contains("2true"), "message: {}", err.message);

        let err = parse("(pair true\n  (fst _oops))").unwrap_err();
        assert_eq!(err.span.line_start, 2);
        assert_eq!(err.span.col_start, 8);
    }

    #[test]
    fn rejects_trailing_input() {
        let err = parse("true false").unwrap_err();
        assert!(err.message.contains("trailing"));
    }

    #[test]
    fn file_header_declares_dimensions() {
        let file = parse_file("(dim x y)\n(loop x)\n(eq bool true true)", "t.cube").unwrap();
        assert_eq!(file.ctx.names(), &[DimName::new("x"), DimName::new("y")]);
        assert_eq!(file.items.len(), 2);
        assert_eq!(file.items[0], FileItem::Term(loop_(Dim::name("x"))));
        assert_eq!(
            file.items[1],
            FileItem::Eq {
                ty: Term::Bool,
                lhs: Term::True,
                rhs: Term::True,
            }
        );
    }

    #[test]
    fn undeclared_dimension_names_are_rejected() {
        let err = parse_file("(loop x)", "t.cube").unwrap_err();
        assert!(err.message.contains("'x'"), "message: {}", err.message);
        assert_eq!(err.span.file, "t.cube");

        let err = parse_file("(dim x) (notb y)", "t.cube").unwrap_err();
        assert!(err.message.contains("'y'"), "message: {}", err.message);
    }

    #[test]
    fn duplicate_header_names_are_rejected() {
        let err = parse_file("(dim x x) true", "t.cube").unwrap_err();
        assert!(err.message.contains("twice"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(parse_file("", "t.cube").is_err());
        assert!(parse_file("(dim x)", "t.cube").is_err());
    }

    #[test]
    fn printing_is_parseable_on_a_nested_term() {
        let term = s1elim(
            arr(Term::Bool, Term::Bool),
            loop_(Dim::name("x")),
            lam(TermVar::new("a"), var("a")),
            DimName::new("z"),
            lam(TermVar::new("a"), app(fst(pair(var("a"), snd(var("b")))), var("a"))),
        );
        let printed = print(&term);
        assert_eq!(parse(&printed).unwrap(), term);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(192))]

        #[test]
        fn parsing_inverts_printing(term in testgen::arb_term()) {
            let printed = print(&term);
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &term);
        }

        #[test]
        fn printing_salted_binders_stays_parseable(
            term in testgen::arb_term(),
            salt in "[a-z]{1,2}",
        ) {
            let salted = testgen::salt_binders(&term, &salt);
            let reparsed = parse(&print(&salted)).unwrap();
            prop_assert!(reparsed.alpha_eq(&term), "salted {:?}", salted);
        }
    }
}
