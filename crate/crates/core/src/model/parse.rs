//! Recursive-descent parser for the `.fd` model language.

use std::collections::HashMap;
use std::fmt;

use crate::constraint::ConstraintForm;
use crate::domain::{Domain, VarRef};
use crate::search::{ValStrategy, VarStrategy};

use super::{Labelling, Model, ModelConstraint};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    DuplicateVariable(String),
    ReservedWord(String),
    EmptyRange { lo: i64, hi: i64 },
    NonPrimitiveForm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ModelParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ModelParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
            ParseErrorKind::UndeclaredVariable(name) => write!(f, "undeclared variable {name}"),
            ParseErrorKind::DuplicateVariable(name) => write!(f, "variable {name} declared twice"),
            ParseErrorKind::ReservedWord(word) => write!(f, "{word} is a reserved word"),
            ParseErrorKind::EmptyRange { lo, hi } => write!(f, "empty range {lo}..{hi}"),
            ParseErrorKind::NonPrimitiveForm(msg) => {
                write!(f, "not a primitive constraint form: {msg}")
            }
        }
    }
}

const RESERVED: [&str; 4] = ["var", "in", "label", "val"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    DotDot,
    ColonColon,
    Plus,
    OpEq,    // #=
    OpNeq,   // ## or #\=
    OpGt,    // #>
    OpGeq,   // #>=
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::Comma => write!(f, "','"),
            Tok::Semi => write!(f, "';'"),
            Tok::DotDot => write!(f, "'..'"),
            Tok::ColonColon => write!(f, "'::'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::OpEq => write!(f, "'#='"),
            Tok::OpNeq => write!(f, "'##'"),
            Tok::OpGt => write!(f, "'#>'"),
            Tok::OpGeq => write!(f, "'#>='"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: String) -> ModelParseError {
        ModelParseError { line: self.line, col: self.col, kind: ParseErrorKind::Syntax(msg) }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ModelParseError> {
        let mut out = Vec::new();
        loop {
            match self.chars.peek().copied() {
                None => break,
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some(c) => {
                    let (line, col) = (self.line, self.col);
                    let tok = self.next_token(c)?;
                    out.push((tok, line, col));
                }
            }
        }
        Ok(out)
    }

    fn next_token(&mut self, c: char) -> Result<Tok, ModelParseError> {
        match c {
            '[' => {
                self.bump();
                Ok(Tok::LBracket)
            }
            ']' => {
                self.bump();
                Ok(Tok::RBracket)
            }
            '{' => {
                self.bump();
                Ok(Tok::LBrace)
            }
            '}' => {
                self.bump();
                Ok(Tok::RBrace)
            }
            ',' => {
                self.bump();
                Ok(Tok::Comma)
            }
            ';' => {
                self.bump();
                Ok(Tok::Semi)
            }
            '+' => {
                self.bump();
                Ok(Tok::Plus)
            }
            '.' => {
                self.bump();
                if self.chars.peek() == Some(&'.') {
                    self.bump();
                    Ok(Tok::DotDot)
                } else {
                    Err(self.error("expected '..'".into()))
                }
            }
            ':' => {
                self.bump();
                if self.chars.peek() == Some(&':') {
                    self.bump();
                    Ok(Tok::ColonColon)
                } else {
                    Err(self.error("expected '::'".into()))
                }
            }
            '#' => {
                self.bump();
                match self.chars.peek().copied() {
                    Some('=') => {
                        self.bump();
                        Ok(Tok::OpEq)
                    }
                    Some('#') => {
                        self.bump();
                        Ok(Tok::OpNeq)
                    }
                    Some('\\') => {
                        self.bump();
                        if self.chars.peek() == Some(&'=') {
                            self.bump();
                            Ok(Tok::OpNeq)
                        } else {
                            Err(self.error("expected '#\\='".into()))
                        }
                    }
                    Some('>') => {
                        self.bump();
                        if self.chars.peek() == Some(&'=') {
                            self.bump();
                            Ok(Tok::OpGeq)
                        } else {
                            Ok(Tok::OpGt)
                        }
                    }
                    _ => Err(self.error("expected one of '#=', '##', '#\\=', '#>', '#>='".into())),
                }
            }
            '-' => {
                self.bump();
                match self.chars.peek() {
                    Some(d) if d.is_ascii_digit() => self.lex_int(true),
                    _ => Err(self.error("expected a digit after '-'".into())),
                }
            }
            d if d.is_ascii_digit() => self.lex_int(false),
            a if a.is_alphabetic() || a == '_' => {
                let mut ident = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        ident.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Tok::Ident(ident))
            }
            other => Err(self.error(format!("unexpected character '{other}'"))),
        }
    }

    fn lex_int(&mut self, negative: bool) -> Result<Tok, ModelParseError> {
        let mut digits = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let value: i64 = digits
            .parse()
            .map_err(|_| self.error(format!("integer '{digits}' out of range")))?;
        Ok(Tok::Int(if negative { -value } else { value }))
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    vars: Vec<(VarRef, Domain)>,
    by_name: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> Result<T, ModelParseError> {
        let (line, col) = self.here();
        Err(ModelParseError { line, col, kind })
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ModelParseError> {
        self.fail(ParseErrorKind::Syntax(msg.into()))
    }

    fn expect(&mut self, want: Tok) -> Result<(), ModelParseError> {
        match self.next() {
            Some((tok, ..)) if tok == want => Ok(()),
            Some((tok, line, col)) => Err(ModelParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("expected {want}, found {tok}")),
            }),
            None => self.syntax(format!("expected {want}, found end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ModelParseError> {
        match self.next() {
            Some((Tok::Ident(name), ..)) => Ok(name),
            Some((tok, line, col)) => Err(ModelParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("expected an identifier, found {tok}")),
            }),
            None => self.syntax("expected an identifier, found end of input"),
        }
    }

    fn expect_int(&mut self) -> Result<i64, ModelParseError> {
        match self.next() {
            Some((Tok::Int(n), ..)) => Ok(n),
            Some((tok, line, col)) => Err(ModelParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("expected an integer, found {tok}")),
            }),
            None => self.syntax("expected an integer, found end of input"),
        }
    }

    fn declare(&mut self, name: String, dom: Domain) -> Result<(), ModelParseError> {
        if RESERVED.contains(&name.as_str()) {
            return self.fail(ParseErrorKind::ReservedWord(name));
        }
        if self.by_name.contains_key(&name) {
            return self.fail(ParseErrorKind::DuplicateVariable(name));
        }
        let var = VarRef::new(self.vars.len() as u32 + 1, name.as_str());
        self.by_name.insert(name, self.vars.len());
        self.vars.push((var, dom));
        Ok(())
    }

    fn lookup(&self, name: &str) -> Result<VarRef, ModelParseError> {
        match self.by_name.get(name) {
            Some(&idx) => Ok(self.vars[idx].0.clone()),
            None => {
                let (line, col) = self.here();
                Err(ModelParseError {
                    line,
                    col,
                    kind: ParseErrorKind::UndeclaredVariable(name.to_string()),
                })
            }
        }
    }

    fn parse_domain_spec(&mut self) -> Result<Domain, ModelParseError> {
        if matches!(self.peek(), Some((Tok::LBrace, ..))) {
            self.next();
            let mut values = vec![self.expect_int()?];
            while matches!(self.peek(), Some((Tok::Comma, ..))) {
                self.next();
                values.push(self.expect_int()?);
            }
            self.expect(Tok::RBrace)?;
            Ok(Domain::new(values))
        } else {
            let lo = self.expect_int()?;
            self.expect(Tok::DotDot)?;
            let hi = self.expect_int()?;
            if lo > hi {
                return self.fail(ParseErrorKind::EmptyRange { lo, hi });
            }
            Ok(Domain::from_range(lo, hi))
        }
    }

    fn parse_name_list(&mut self) -> Result<Vec<String>, ModelParseError> {
        self.expect(Tok::LBracket)?;
        let mut names = vec![self.expect_ident()?];
        while matches!(self.peek(), Some((Tok::Comma, ..))) {
            self.next();
            names.push(self.expect_ident()?);
        }
        self.expect(Tok::RBracket)?;
        Ok(names)
    }

    /// Right-hand side of a constraint operator: a variable with optional
    /// `+ n` offset, or a bare integer.
    fn parse_rhs(&mut self) -> Result<Rhs, ModelParseError> {
        match self.peek().cloned() {
            Some((Tok::Ident(name), ..)) => {
                self.next();
                let var = self.lookup(&name)?;
                if matches!(self.peek(), Some((Tok::Plus, ..))) {
                    self.next();
                    let n = self.expect_int()?;
                    Ok(Rhs::VarOffset(var, n))
                } else {
                    Ok(Rhs::Var(var))
                }
            }
            Some((Tok::Int(n), ..)) => {
                self.next();
                Ok(Rhs::Const(n))
            }
            Some((tok, line, col)) => Err(ModelParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("expected a variable or integer, found {tok}")),
            }),
            None => self.syntax("expected a variable or integer, found end of input"),
        }
    }

    fn parse_strategy<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ModelParseError> {
        let (line, col) = self.here();
        let word = self.expect_ident()?;
        word.parse().map_err(|_| ModelParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax(format!("unknown {what} strategy '{word}'")),
        })
    }
}

enum Rhs {
    Var(VarRef),
    VarOffset(VarRef, i64),
    Const(i64),
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    Eq,
    Neq,
    Gt,
    Geq,
}

/// Builds the primitive form from parsed pieces, normalizing offsets:
/// zero offsets collapse to the plain two-variable form, negative offsets
/// swap sides. Forms outside Table-style primitives are rejected.
fn build_form(op: Op, lhs: VarRef, rhs: Rhs) -> Result<ConstraintForm, ParseErrorKind> {
    let check_distinct = |x: &VarRef, y: &VarRef| {
        if x == y {
            Err(ParseErrorKind::NonPrimitiveForm(format!(
                "both sides are the same variable {}",
                x.name()
            )))
        } else {
            Ok(())
        }
    };
    match (op, rhs) {
        (Op::Eq, Rhs::Var(y)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Eq(lhs, y))
        }
        (Op::Eq, Rhs::VarOffset(y, 0)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Eq(lhs, y))
        }
        (Op::Eq, Rhs::VarOffset(y, n)) => {
            check_distinct(&lhs, &y)?;
            if n > 0 {
                Ok(ConstraintForm::EqOffset(lhs, y, n))
            } else {
                Ok(ConstraintForm::EqOffset(y, lhs, -n))
            }
        }
        (Op::Eq, Rhs::Const(n)) => Ok(ConstraintForm::EqConst(lhs, n)),
        (Op::Neq, Rhs::Var(y)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Neq(lhs, y))
        }
        (Op::Neq, Rhs::VarOffset(y, 0)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Neq(lhs, y))
        }
        (Op::Neq, Rhs::VarOffset(y, n)) => {
            check_distinct(&lhs, &y)?;
            if n > 0 {
                Ok(ConstraintForm::NeqOffset(lhs, y, n))
            } else {
                Ok(ConstraintForm::NeqOffset(y, lhs, -n))
            }
        }
        (Op::Neq, Rhs::Const(n)) => Ok(ConstraintForm::NeqConst(lhs, n)),
        (Op::Gt, Rhs::Var(y)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Gt(lhs, y))
        }
        (Op::Geq, Rhs::Var(y)) => {
            check_distinct(&lhs, &y)?;
            Ok(ConstraintForm::Geq(lhs, y))
        }
        (Op::Gt | Op::Geq, Rhs::VarOffset(..)) => Err(ParseErrorKind::NonPrimitiveForm(
            "offsets are only allowed with #= and ##".into(),
        )),
        (Op::Gt | Op::Geq, Rhs::Const(_)) => Err(ParseErrorKind::NonPrimitiveForm(
            "#> and #>= need a variable on the right".into(),
        )),
    }
}

/// Parses a model. `source_name` becomes the model name and the default
/// invocation context of its constraints.
pub fn parse_model(text: &str, source_name: &str) -> Result<Model, ModelParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0, vars: Vec::new(), by_name: HashMap::new() };
    let mut constraints: Vec<ModelConstraint> = Vec::new();
    let mut labelling: Option<Labelling> = None;

    while let Some((tok, ..)) = parser.peek().cloned() {
        match tok {
            Tok::Ident(word) if word == "var" => {
                parser.next();
                let name = parser.expect_ident()?;
                let (line, col) = parser.here();
                match parser.next() {
                    Some((Tok::Ident(kw), ..)) if kw == "in" => {}
                    _ => {
                        return Err(ModelParseError {
                            line,
                            col,
                            kind: ParseErrorKind::Syntax("expected 'in'".into()),
                        })
                    }
                }
                let dom = parser.parse_domain_spec()?;
                parser.declare(name, dom)?;
                parser.expect(Tok::Semi)?;
            }
            Tok::LBracket => {
                // Bulk declaration: [X, Y, Z] :: 1..3;
                let names = parser.parse_name_list()?;
                parser.expect(Tok::ColonColon)?;
                let dom = parser.parse_domain_spec()?;
                for name in names {
                    parser.declare(name, dom.clone())?;
                }
                parser.expect(Tok::Semi)?;
            }
            Tok::Ident(word) if word == "label" => {
                parser.next();
                let names = parser.parse_name_list()?;
                let mut vars = Vec::with_capacity(names.len());
                for name in names {
                    vars.push(parser.lookup(&name)?);
                }
                let mut var_strategy = VarStrategy::FirstFail;
                let mut val_strategy = ValStrategy::Min;
                while let Some((Tok::Ident(kw), ..)) = parser.peek() {
                    match kw.as_str() {
                        "var" => {
                            parser.next();
                            var_strategy = parser.parse_strategy("variable")?;
                        }
                        "val" => {
                            parser.next();
                            val_strategy = parser.parse_strategy("value")?;
                        }
                        other => {
                            let msg = format!("expected 'var', 'val' or ';', found '{other}'");
                            return parser.syntax(msg);
                        }
                    }
                }
                parser.expect(Tok::Semi)?;
                labelling = Some(Labelling { vars, var_strategy, val_strategy });
            }
            Tok::Ident(name) => {
                parser.next();
                if RESERVED.contains(&name.as_str()) {
                    return parser.fail(ParseErrorKind::ReservedWord(name));
                }
                let lhs = parser.lookup(&name)?;
                let (line, col) = parser.here();
                let op = match parser.next() {
                    Some((Tok::OpEq, ..)) => Op::Eq,
                    Some((Tok::OpNeq, ..)) => Op::Neq,
                    Some((Tok::OpGt, ..)) => Op::Gt,
                    Some((Tok::OpGeq, ..)) => Op::Geq,
                    Some((tok, line, col)) => {
                        return Err(ModelParseError {
                            line,
                            col,
                            kind: ParseErrorKind::Syntax(format!(
                                "expected a constraint operator, found {tok}"
                            )),
                        })
                    }
                    None => {
                        return parser.syntax("expected a constraint operator, found end of input")
                    }
                };
                let rhs = parser.parse_rhs()?;
                let form = build_form(op, lhs, rhs)
                    .map_err(|kind| ModelParseError { line, col, kind })?;
                parser.expect(Tok::Semi)?;
                constraints.push(ModelConstraint {
                    abstract_text: form.render_abstract(),
                    form,
                    context: source_name.to_string(),
                });
            }
            other => {
                let msg = format!("expected a declaration, constraint or label, found {other}");
                return parser.syntax(msg);
            }
        }
    }

    Ok(Model {
        name: source_name.to_string(),
        variables: parser.vars,
        constraints,
        labelling,
    })
}

/// Parses a single constraint expression such as `X#>=Y` or `X#=2`,
/// minting variables on first use. Trace analyzers use this to recover a
/// constraint's form (and with it its awakening condition) from the
/// abstract text carried by an event.
pub fn parse_constraint_text(text: &str) -> Result<ConstraintForm, ModelParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0, vars: Vec::new(), by_name: HashMap::new() };

    // Pre-declare every identifier in appearance order over a dummy domain.
    let names: Vec<String> = parser
        .tokens
        .iter()
        .filter_map(|(tok, ..)| match tok {
            Tok::Ident(name) => Some(name.clone()),
            _ => None,
        })
        .collect();
    for name in names {
        if !parser.by_name.contains_key(&name) {
            parser.declare(name, Domain::empty())?;
        }
    }

    let name = parser.expect_ident()?;
    let lhs = parser.lookup(&name)?;
    let (line, col) = parser.here();
    let op = match parser.next() {
        Some((Tok::OpEq, ..)) => Op::Eq,
        Some((Tok::OpNeq, ..)) => Op::Neq,
        Some((Tok::OpGt, ..)) => Op::Gt,
        Some((Tok::OpGeq, ..)) => Op::Geq,
        _ => {
            return Err(ModelParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax("expected a constraint operator".into()),
            })
        }
    };
    let rhs = parser.parse_rhs()?;
    if parser.peek().is_some() {
        return parser.syntax("unexpected trailing input after constraint");
    }
    build_form(op, lhs, rhs).map_err(|kind| ModelParseError { line, col, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_sorted;

    #[test]
    fn parses_a_minimal_model() {
        let m = parse_model("var X in 1..3; var Y in 1..3; X ## Y;", "m.fd").unwrap();
        assert_eq!(m.variables.len(), 2);
        assert_eq!(m.constraints.len(), 1);
        let (x, y) = (m.var_by_name("X").unwrap(), m.var_by_name("Y").unwrap());
        assert_eq!(m.constraints[0].form, ConstraintForm::Neq(x.clone(), y.clone()));
        assert_eq!(m.constraints[0].abstract_text, "X##Y");
        assert!(m.labelling.is_none());
    }

    #[test]
    fn the_sorted_source_program_equals_the_generator() {
        let text = "\
% sort three numbers the naive way
[X, Y, Z] :: 1..3;
X ## Y; X #>= Y; Y #> Z;
label [X, Y, Z] var first_fail val min;
";
        let mut m = parse_model(text, "sorted").unwrap();
        // Contexts differ between a file and the builtin; align them first.
        for c in &mut m.constraints {
            c.context = "sorted([X, Y, Z])".into();
        }
        assert_eq!(m, generate_sorted());
    }

    #[test]
    fn gt_with_constant_is_not_primitive() {
        let err = parse_model("var X in 1..3; X #> 3;", "m").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonPrimitiveForm(_)));
    }

    #[test]
    fn offset_forms_normalize() {
        let m = parse_model(
            "var X in 1..9; var Y in 1..9; X #= Y + 0; X #= Y + -2; X ## Y + 3;",
            "m",
        )
        .unwrap();
        let (x, y) = (
            m.var_by_name("X").unwrap().clone(),
            m.var_by_name("Y").unwrap().clone(),
        );
        assert_eq!(m.constraints[0].form, ConstraintForm::Eq(x.clone(), y.clone()));
        assert_eq!(m.constraints[0].abstract_text, "X#=Y");
        assert_eq!(m.constraints[1].form, ConstraintForm::EqOffset(y.clone(), x.clone(), 2));
        assert_eq!(m.constraints[1].abstract_text, "Y#=X+2");
        assert_eq!(m.constraints[2].form, ConstraintForm::NeqOffset(x, y, 3));
    }

    #[test]
    fn neq_alias_is_accepted() {
        let m = parse_model("var X in 1..2; var Y in 1..2; X #\\= Y;", "m").unwrap();
        assert!(matches!(m.constraints[0].form, ConstraintForm::Neq(..)));
    }

    #[test]
    fn undeclared_variable_is_reported() {
        let err = parse_model("var X in 1..3; X ## Y;", "m").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredVariable("Y".into()));
    }

    #[test]
    fn empty_range_is_reported() {
        let err = parse_model("var X in 3..1;", "m").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyRange { lo: 3, hi: 1 });
    }

    #[test]
    fn duplicate_declaration_is_reported() {
        let err = parse_model("var X in 1..2; var X in 1..2;", "m").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateVariable("X".into()));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_model("var X in 1..3;\nX $$ 3;", "m").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn set_domains_parse_and_render() {
        let m = parse_model("var X in {1,3,5};", "m").unwrap();
        assert_eq!(m.variables[0].1, Domain::new(vec![1, 3, 5]));
        let again = parse_model(&m.render(), "m").unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn same_variable_twice_is_rejected() {
        let err = parse_model("var X in 1..3; X ## X;", "m").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonPrimitiveForm(_)));
    }

    #[test]
    fn parse_constraint_text_recovers_forms() {
        assert!(matches!(parse_constraint_text("X#>=Y"), Ok(ConstraintForm::Geq(..))));
        assert!(matches!(parse_constraint_text("X#=2"), Ok(ConstraintForm::EqConst(_, 2))));
        assert!(matches!(parse_constraint_text("Q1##Q2+1"), Ok(ConstraintForm::NeqOffset(_, _, 1))));
        assert!(parse_constraint_text("nonsense here").is_err());
    }
}
