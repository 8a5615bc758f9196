//! Hand-written lexer and recursive-descent parser for `.ig` programs.
//!
//! ```text
//! program    := statement*
//! statement  := [FLOAT "::"] (rule | constraint | choice | domaindecl) "."
//! rule       := head ":-" body | head
//! constraint := ":-" body
//! head       := lit (("," | ";" | "^") lit)*
//! body       := lit (("," | ";") lit)*
//! lit        := ["-"] IDENT ["(" term ("," term)* ")"]
//! choice     := "1{" lit (";" lit)+ "}1"
//! domaindecl := "#entity" IDENT ("," IDENT)*
//! ```
//!
//! `%` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;

use super::ast::{Connective, Literal, Program, Rule, Sign, Statement, Term};
use crate::error::ParseError;

const MAX_ARITY: usize = 2;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Directive(String),
    If,          // :-
    Annotate,    // ::
    Comma,
    Semi,
    Caret,
    Dot,
    Minus,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Directive(d) => format!("directive `#{d}`"),
            Tok::If => "`:-`".into(),
            Tok::Annotate => "`::`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Minus => "`-`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let next = chars.get(i + 1).copied();
        let single = match c {
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '^' => Some(Tok::Caret),
            '.' => Some(Tok::Dot),
            '-' => Some(Tok::Minus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            _ => None,
        };
        if let Some(tok) = single {
            push(&mut out, tok);
            i += 1;
            col += 1;
            continue;
        }

        if c == ':' {
            let tok = match next {
                Some('-') => Tok::If,
                Some(':') => Tok::Annotate,
                _ => return Err(ParseError::new(line, col, "expected `:-` or `::` after `:`")),
            };
            push(&mut out, tok);
            i += 2;
            col += 2;
            continue;
        }

        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            // A `.` is a decimal point only when a digit follows; otherwise it
            // terminates the statement.
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lexeme: String = chars[start..i].iter().collect();
            let value = lexeme
                .parse::<f64>()
                .map_err(|_| ParseError::new(line, col, format!("malformed number `{lexeme}`")))?;
            push(&mut out, Tok::Number(value));
            col += i - start;
            continue;
        }

        if c.is_alphabetic() || c == '_' || c == '#' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let lexeme: String = chars[start..i].iter().collect();
            col += i - start;
            if let Some(name) = lexeme.strip_prefix('#') {
                if name.is_empty() {
                    return Err(ParseError::new(start_line, start_col, "expected a directive name after `#`"));
                }
                push(&mut out, Tok::Directive(name.to_string()));
            } else {
                push(&mut out, Tok::Ident(lexeme));
            }
            continue;
        }

        return Err(ParseError::new(line, col, format!("unexpected character `{c}`")));
    }

    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.peek().tok.describe())))
        }
    }

    fn program(&mut self) -> Result<(Program, Vec<(usize, usize)>), ParseError> {
        let mut statements = Vec::new();
        let mut positions = Vec::new();
        while self.peek().tok != Tok::Eof {
            positions.push((self.peek().line, self.peek().column));
            statements.push(self.statement()?);
        }
        Ok((Program::new(statements), positions))
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.peek().clone();

        // A leading number is either a probability annotation or the lower
        // bound of a choice.
        if let Tok::Number(n) = start.tok {
            if *self.peek_at(1) == Tok::Annotate {
                self.bump();
                self.bump();
                if !(0.0..=1.0).contains(&n) {
                    return Err(ParseError::new(
                        start.line,
                        start.column,
                        format!("probability {n} is outside [0, 1]"),
                    ));
                }
                let after = self.peek().clone();
                let stmt = self.unannotated()?;
                return match stmt {
                    Statement::Rule(r) => Ok(Statement::Rule(r.with_probability(n))),
                    _ => Err(ParseError::new(
                        after.line,
                        after.column,
                        "probability annotations apply only to rules and facts",
                    )),
                };
            }
        }
        self.unannotated()
    }

    fn unannotated(&mut self) -> Result<Statement, ParseError> {
        let stmt = match self.peek().tok.clone() {
            Tok::Directive(name) => self.domain_decl(&name)?,
            Tok::Number(_) => self.choice()?,
            Tok::If => {
                self.bump();
                let (body, connective) = self.literal_list(false)?;
                if connective != Connective::Single && connective != Connective::And {
                    return Err(self.error_here("constraint bodies must be conjunctions"));
                }
                Statement::Constraint { body }
            }
            _ => Statement::Rule(self.rule()?),
        };
        self.expect(Tok::Dot, "`.` at end of statement")?;
        Ok(stmt)
    }

    fn domain_decl(&mut self, name: &str) -> Result<Statement, ParseError> {
        if name != "entity" {
            return Err(self.error_here(format!("unknown directive `#{name}`")));
        }
        self.bump();
        let mut constants = Vec::new();
        loop {
            let t = self.bump();
            match t.tok {
                Tok::Ident(s) if Term::from_name(&s).is_some_and(|t| !t.is_variable()) => constants.push(s),
                other => {
                    return Err(ParseError::new(
                        t.line,
                        t.column,
                        format!("expected a constant in `#entity`, found {}", other.describe()),
                    ))
                }
            }
            if self.peek().tok != Tok::Comma {
                break;
            }
            self.bump();
        }
        Ok(Statement::DomainDecl { constants })
    }

    fn choice(&mut self) -> Result<Statement, ParseError> {
        let lower = self.bump();
        if lower.tok != Tok::Number(1.0) {
            return Err(ParseError::new(
                lower.line,
                lower.column,
                format!("expected `1{{` to open a choice or `::` after a probability, found {}", lower.tok.describe()),
            ));
        }
        self.expect(Tok::LBrace, "`{` after choice bound")?;
        let mut alternatives = vec![self.literal()?];
        while self.peek().tok == Tok::Semi {
            self.bump();
            alternatives.push(self.literal()?);
        }
        if self.peek().tok != Tok::RBrace {
            return Err(self.error_here(format!(
                "choice alternatives are separated by `;`, found {}",
                self.peek().tok.describe()
            )));
        }
        self.bump();
        let upper = self.bump();
        if upper.tok != Tok::Number(1.0) {
            return Err(ParseError::new(
                upper.line,
                upper.column,
                "only exactly-one choices `1{ ... }1` are supported",
            ));
        }
        if alternatives.len() < 2 {
            return Err(ParseError::new(lower.line, lower.column, "a choice needs at least two alternatives"));
        }
        Ok(Statement::Choice { alternatives })
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let (head, head_connective) = self.literal_list(true)?;
        if self.peek().tok != Tok::If {
            return Ok(Rule::new(head, head_connective, Vec::new(), Connective::Single));
        }
        self.bump();
        let (body, body_connective) = self.literal_list(false)?;
        Ok(Rule::new(head, head_connective, body, body_connective))
    }

    /// Parses `lit (sep lit)*` with a homogeneous separator.
    fn literal_list(&mut self, allow_xor: bool) -> Result<(Vec<Literal>, Connective), ParseError> {
        let mut lits = vec![self.literal()?];
        let mut connective = Connective::Single;
        loop {
            let sep = match self.peek().tok {
                Tok::Comma => Connective::And,
                Tok::Semi => Connective::Or,
                Tok::Caret if allow_xor => Connective::Xor,
                Tok::Caret => return Err(self.error_here("`^` (exclusive or) is only allowed in rule heads")),
                _ => break,
            };
            if connective != Connective::Single && connective != sep {
                return Err(self.error_here(format!(
                    "mixed connectives `{}` and `{}` in one {}; split the rule",
                    connective.separator().trim(),
                    sep.separator().trim(),
                    if allow_xor { "head" } else { "body" }
                )));
            }
            connective = sep;
            self.bump();
            lits.push(self.literal()?);
        }
        Ok((lits, connective))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let mut sign = Sign::Positive;
        if self.peek().tok == Tok::Minus {
            self.bump();
            sign = Sign::Negative;
        }
        let t = self.bump();
        let name = match t.tok {
            Tok::Ident(name) => name,
            other => {
                return Err(ParseError::new(
                    t.line,
                    t.column,
                    format!("expected a literal, found {}", other.describe()),
                ))
            }
        };
        if name == "not" {
            return Err(ParseError::new(
                t.line,
                t.column,
                "negation as failure (`not`) is unsupported: it cannot be realized as a gate; use strong negation `-`",
            ));
        }
        if !name.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(ParseError::new(
                t.line,
                t.column,
                format!("predicate names must start with a lowercase letter, found `{name}`"),
            ));
        }

        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            let open = self.bump();
            loop {
                let a = self.bump();
                match a.tok {
                    Tok::Ident(s) => args.push(Term::from_name(&s).expect("identifiers are non-empty")),
                    other => {
                        return Err(ParseError::new(
                            a.line,
                            a.column,
                            format!("expected a term, found {}", other.describe()),
                        ))
                    }
                }
                match self.peek().tok {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error_here(format!("expected `,` or `)`, found {}", self.peek().tok.describe()))),
                }
            }
            if args.len() > MAX_ARITY {
                return Err(ParseError::new(
                    open.line,
                    open.column,
                    format!("predicate `{name}` has arity {}; at most {MAX_ARITY} arguments are supported", args.len()),
                ));
            }
        }
        Ok(Literal::new(sign, name, args))
    }
}

/// Parses program text into a validated AST.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let (program, positions) = parser.program()?;
    validate_constants(&program, &positions)?;
    Ok(program)
}

/// Parses a single literal such as `-p(a,b)`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let lit = parser.literal()?;
    if parser.peek().tok != Tok::Eof {
        return Err(parser.error_here(format!("unexpected {} after literal", parser.peek().tok.describe())));
    }
    Ok(lit)
}

// Constants in rules must be declared or appear in some ground fact.
fn validate_constants(program: &Program, positions: &[(usize, usize)]) -> Result<(), ParseError> {
    let known: BTreeSet<String> = program.universe();
    for (s, &(line, column)) in program.statements.iter().zip(positions) {
        for lit in s.literals() {
            if let Some(c) = lit.constants().find(|c| !known.contains(*c)) {
                return Err(ParseError::new(
                    line,
                    column,
                    format!("constant `{c}` in `{lit}` is neither declared with #entity nor used in a ground fact"),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(text: &str) -> Rule {
        match parse_program(text).unwrap().statements.remove(0) {
            Statement::Rule(r) => r,
            other => panic!("expected a rule, got {other:?}"),
        }
    }

    #[test]
    fn conjunctive_rule() {
        let r = rule("p :- a, b.");
        assert_eq!(r.head, vec![Literal::pos("p")]);
        assert_eq!(r.head_connective, Connective::Single);
        assert_eq!(r.body, vec![Literal::pos("a"), Literal::pos("b")]);
        assert_eq!(r.body_connective, Connective::And);
        assert_eq!(r.probability, None);
    }

    #[test]
    fn empty_input() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("  % only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn probability_annotation() {
        let r = rule("0.3 :: b :- a.");
        assert_eq!(r.head, vec![Literal::pos("b")]);
        assert_eq!(r.body, vec![Literal::pos("a")]);
        assert_eq!(r.probability, Some(0.3));
        assert_eq!(rule("1 :: c.").probability, Some(1.0));
    }

    #[test]
    fn negation_as_failure_rejected() {
        let err = parse_program("p :- not q.").unwrap_err();
        assert!(err.message.contains("negation as failure"), "{err}");
        assert_eq!((err.line, err.column), (1, 6));
    }

    #[test]
    fn mixed_connectives_rejected() {
        let err = parse_program("p :- a, b; c.").unwrap_err();
        assert!(err.message.contains("mixed connectives"), "{err}");
        assert!(parse_program("p, q; r :- a.").is_err());
        assert!(parse_program("p ^ q, r :- a.").is_err());
    }

    #[test]
    fn arity_cap() {
        assert!(parse_program("#entity a, b, c. p(a,b).").is_ok());
        let err = parse_program("#entity a, b, c. p(a,b,c).").unwrap_err();
        assert!(err.message.contains("arity 3"), "{err}");
    }

    #[test]
    fn heads_and_bodies() {
        let r = rule("p ^ q :- a.");
        assert_eq!(r.head_connective, Connective::Xor);
        let r = rule("p ; q :- a ; b.");
        assert_eq!(r.head_connective, Connective::Or);
        assert_eq!(r.body_connective, Connective::Or);
        assert!(parse_program("p :- a ^ b.").is_err());
    }

    #[test]
    fn constraint_choice_and_domain() {
        let p = parse_program(":- a, b, -p.\n1{a; -a}1.\n#entity rex, fido.").unwrap();
        assert_eq!(
            p.statements[0],
            Statement::Constraint {
                body: vec![Literal::pos("a"), Literal::pos("b"), Literal::neg("p")]
            }
        );
        assert_eq!(
            p.statements[1],
            Statement::Choice {
                alternatives: vec![Literal::pos("a"), Literal::neg("a")]
            }
        );
        assert_eq!(p.domain.len(), 2);
        assert!(parse_program("1{a}1.").is_err());
        assert!(parse_program("1{a; b}2.").is_err());
        assert!(parse_program("0.5 :: :- a.").is_err());
    }

    #[test]
    fn variables_and_constants() {
        let p = parse_program("#entity rex. mammal(X) :- dog(X); cat(rex).").unwrap();
        let Statement::Rule(r) = &p.statements[1] else { panic!() };
        assert_eq!(r.head[0].args, vec![Term::Variable("X".into())]);
        assert_eq!(r.body[1].args, vec![Term::Constant("rex".into())]);
    }

    #[test]
    fn undeclared_constants_rejected() {
        assert!(parse_program("p(a) :- q(a).").is_err());
        assert!(parse_program("q(a). p(a) :- q(a).").is_ok());
    }

    #[test]
    fn positioned_errors() {
        let err = parse_program("p :- a.\nq :- b\nr.").unwrap_err();
        assert_eq!((err.line, err.column), (3, 1));
        let err = parse_program("p :- a.\n  q ? r.").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert!(parse_program("0.3 :: b :- a").is_err());
        assert!(parse_program("1.5 :: b.").is_err());
        assert!(parse_program("P :- a.").is_err());
        assert!(parse_program("p() :- a.").is_err());
    }

    #[test]
    fn literal_parsing() {
        let l = parse_literal("-has(x, Y)").unwrap();
        assert_eq!(l.sign, Sign::Negative);
        assert_eq!(l.args.len(), 2);
        assert!(parse_literal("a b").is_err());
    }
}
