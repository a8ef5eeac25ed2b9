use std::fmt;

use super::macros::{Interval, MacroAction, MacroCall, MacroName};
use super::Formula;
use crate::action::{translate, ActionType, AgentBoundAction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    Comma,
    At,
    Caret,
    Tilde,
    Arrow,
    DoubleArrow,
    Amp,
    Bar,
    Box,
    Diamond,
    ABox,
    ADiamond,
    PBox,
    PDiamond,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", symbol(other)),
        }
    }
}

fn symbol(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Comma => ",",
        Tok::At => "@",
        Tok::Caret => "^",
        Tok::Tilde => "~",
        Tok::Arrow => "->",
        Tok::DoubleArrow => "<->",
        Tok::Amp => "&",
        Tok::Bar => "|",
        Tok::Box => "[]",
        Tok::Diamond => "<>",
        Tok::ABox => "[A]",
        Tok::ADiamond => "<A>",
        Tok::PBox => "[P]",
        Tok::PDiamond => "<P>",
        _ => "",
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
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| ParseError { line, column, message, expected: vec![] };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
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
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let fixed = [
            ("<->", Tok::DoubleArrow),
            ("[A]", Tok::ABox),
            ("<A>", Tok::ADiamond),
            ("[P]", Tok::PBox),
            ("<P>", Tok::PDiamond),
            ("->", Tok::Arrow),
            ("[]", Tok::Box),
            ("<>", Tok::Diamond),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            (",", Tok::Comma),
            ("@", Tok::At),
            ("^", Tok::Caret),
            ("~", Tok::Tilde),
            ("&", Tok::Amp),
            ("|", Tok::Bar),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push(Token { tok: t.clone(), line: l0, column: c0 });
            i += s.len();
            col += s.len();
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(l0, c0, format!("number `{s}` too large")))?;
            col += i - start;
            out.push(Token { tok: Tok::Num(n), line: l0, column: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() {
                let ch = chars[i];
                let hyphen = ch == '-' && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphabetic());
                if ch.is_ascii_alphanumeric() || ch == '_' || hyphen {
                    i += 1;
                } else {
                    break;
                }
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const FORMULA_START: &[&str] = &[
    "true", "false", "p<k>", "dw<j>@a<i>", "e@a<i>", "t(...)", "macro(...)", "(", "~", "[]", "<>", "[A]", "<A>",
    "[P]", "<P>", "H", "P",
];

fn indexed(s: &str, prefix: &str) -> Option<u32> {
    let rest = s.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[symbol(&t)]))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.implication()?;
            return Ok(Formula::imp(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            left = Formula::or(left, self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            left = Formula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn repeat(&mut self) -> Result<usize, ParseError> {
        if *self.peek() != Tok::Caret {
            return Ok(1);
        }
        self.bump();
        match self.bump() {
            Tok::Num(k) => Ok(k as usize),
            _ => {
                self.pos -= 1;
                Err(self.unexpected(&["<k>"]))
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let op: Option<fn(Formula) -> Formula> = match self.peek() {
            Tok::Tilde => Some(Formula::not),
            Tok::Box => Some(Formula::nec),
            Tok::Diamond => Some(Formula::poss),
            Tok::ABox => Some(Formula::actual),
            Tok::ADiamond => Some(Formula::actual_poss),
            Tok::PBox => Some(Formula::prev),
            Tok::PDiamond => Some(Formula::prev_poss),
            Tok::Ident(s) if s == "H" => Some(Formula::hist),
            Tok::Ident(s) if s == "P" => Some(Formula::past),
            _ => None,
        };
        let Some(op) = op else { return self.primary() };
        let iterable = !matches!(self.peek(), Tok::Tilde);
        self.bump();
        let k = if iterable { self.repeat()? } else { 1 };
        let mut f = self.unary()?;
        for _ in 0..k {
            f = op(f);
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => {
                if s == "true" {
                    self.bump();
                    return Ok(Formula::top());
                }
                if s == "false" {
                    self.bump();
                    return Ok(Formula::Bot);
                }
                if let Some(k) = indexed(&s, "p") {
                    self.bump();
                    return Ok(Formula::Var(k));
                }
                if s == "e" && *self.peek_at(1) == Tok::At {
                    self.bump();
                    self.bump();
                    return Ok(Formula::exp(self.agent()?));
                }
                if let Some(j) = indexed(&s, "dw").or_else(|| indexed(&s, "d")) {
                    if *self.peek_at(1) == Tok::At {
                        if j == 0 {
                            return Err(self.error("action indices start at 1", &["d1"]));
                        }
                        self.bump();
                        self.bump();
                        return Ok(Formula::act(j as usize - 1, self.agent()?));
                    }
                }
                if s == "t" && *self.peek_at(1) == Tok::LParen {
                    self.bump();
                    self.bump();
                    let a = self.bound_action()?;
                    self.expect(Tok::RParen)?;
                    return Ok(translate(&a));
                }
                if let Some(name) = MacroName::from_name(&s) {
                    if *self.peek_at(1) == Tok::LParen {
                        self.bump();
                        self.bump();
                        return self.macro_args(name).map(Formula::call);
                    }
                }
                Err(self.error(format!("unknown identifier `{s}`"), FORMULA_START))
            }
            _ => Err(self.unexpected(FORMULA_START)),
        }
    }

    fn agent(&mut self) -> Result<usize, ParseError> {
        if let Tok::Ident(s) = self.peek().clone() {
            if let Some(i) = indexed(&s, "a") {
                if i == 0 {
                    return Err(self.error("agent indices start at 1", &["a1"]));
                }
                self.bump();
                return Ok(i as usize - 1);
            }
        }
        Err(self.unexpected(&["a<i>"]))
    }

    fn macro_args(&mut self, name: MacroName) -> Result<MacroCall, ParseError> {
        let action = if name.any_agent() {
            MacroAction::Any(self.action()?)
        } else {
            MacroAction::Bound(self.bound_action()?)
        };
        let goal = if name.takes_goal() {
            self.expect(Tok::Comma)?;
            Some(self.formula()?)
        } else {
            None
        };
        let interval = if name.takes_interval() {
            self.expect(Tok::Comma)?;
            Some(match self.bump() {
                Tok::Num(n) => Interval::Finite(n),
                Tok::Ident(s) if s == "inf" || s == "infinity" => Interval::Infinite,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["<n>", "inf"]));
                }
            })
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        Ok(MacroCall { name, action, goal, interval })
    }

    fn bound_action(&mut self) -> Result<AgentBoundAction, ParseError> {
        let action = self.action()?;
        self.expect(Tok::At)?;
        Ok(AgentBoundAction { action, agent: self.agent()? })
    }

    fn action(&mut self) -> Result<ActionType, ParseError> {
        let mut left = self.action_and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            left = ActionType::union(left, self.action_and()?);
        }
        Ok(left)
    }

    fn action_and(&mut self) -> Result<ActionType, ParseError> {
        let mut left = self.action_unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            left = ActionType::intersection(left, self.action_unary()?);
        }
        Ok(left)
    }

    fn action_unary(&mut self) -> Result<ActionType, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(ActionType::complement(self.action_unary()?))
            }
            Tok::LParen => {
                self.bump();
                let a = self.action()?;
                self.expect(Tok::RParen)?;
                Ok(a)
            }
            Tok::Ident(s) => match indexed(&s, "d") {
                Some(j) if j >= 1 => {
                    self.bump();
                    Ok(ActionType::atomic(j as usize - 1))
                }
                _ => Err(self.unexpected(&["d<j>", "~", "("])),
            },
            _ => Err(self.unexpected(&["d<j>", "~", "("])),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input", "->", "<->", "&", "|"]))
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_action(text: &str) -> Result<ActionType, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let a = p.action()?;
    p.finish()?;
    Ok(a)
}

pub fn parse_bound_action(text: &str) -> Result<AgentBoundAction, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let a = p.bound_action()?;
    p.finish()?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let f = parse("[]( t((d1)@a1) -> p1 )").unwrap();
        assert_eq!(f, Formula::nec(Formula::imp(Formula::act(0, 0), Formula::var(1))));
        let m = parse("would((d1)@a1, p1)").unwrap();
        assert_eq!(
            m,
            Formula::call(MacroCall::bound(MacroName::Would, ActionType::atomic(0).bind(0), Formula::var(1)))
        );
        assert_eq!(parse("H false").unwrap(), Formula::hist(Formula::Bot));
    }

    #[test]
    fn operators_and_sugar() {
        let p = Formula::var(1);
        assert_eq!(parse("[]^3 p1").unwrap(), Formula::nec_n(3, p.clone()));
        assert_eq!(parse("<P>^2 p1").unwrap(), Formula::prev_poss_n(2, p.clone()));
        assert_eq!(parse("P p1").unwrap(), Formula::past(p.clone()));
        assert_eq!(parse("dw2@a1").unwrap(), Formula::act(1, 0));
        assert_eq!(parse("d2@a1").unwrap(), Formula::act(1, 0));
        assert_eq!(parse("e@a2").unwrap(), Formula::exp(1));
        assert_eq!(parse("p1 -> p2 -> p3").unwrap(), parse("p1 -> (p2 -> p3)").unwrap());
        assert_eq!(parse("~p1 & p2").unwrap(), Formula::and(Formula::not(p), Formula::var(2)));
    }

    #[test]
    fn macro_arguments() {
        let f = parse("instr((d1 & ~d2)@a1, p1, inf)").unwrap();
        let Formula::Macro(m) = f else { panic!() };
        assert_eq!(m.interval, Some(Interval::Infinite));
        let g = parse("c-instr-any-agent(d1 | d2, p1, 2)").unwrap();
        let Formula::Macro(m) = g else { panic!() };
        assert_eq!(m.action, MacroAction::Any(ActionType::union(ActionType::atomic(0), ActionType::atomic(1))));
        assert!(parse("forbear(d1@a1)").is_ok());
        assert!(parse("instr(d1@a1, p1)").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("p1 &\n  ) ").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(e.expected.contains(&"p<k>".to_string()));
        let e = parse("p1 p2").unwrap_err();
        assert_eq!(e.column, 4);
        assert!(parse("q1").is_err());
        assert!(parse("d0@a1").is_err());
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            (0u32..4).prop_map(Formula::Var),
            (0usize..3, 0usize..2).prop_map(|(j, i)| Formula::act(j, i)),
            (0usize..2).prop_map(Formula::Exp),
            Just(Formula::Bot),
        ];
        leaf.prop_recursive(8, 128, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
                inner.clone().prop_map(Formula::nec),
                inner.clone().prop_map(Formula::actual),
                inner.clone().prop_map(Formula::prev),
                inner.prop_map(Formula::hist),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn print_then_parse(f in arb_formula()) {
            prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }
}
