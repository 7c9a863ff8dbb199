use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Formula;
use crate::cgs::{AgentId, AgentSet, OpenCgs, PropId};
use crate::error::FormulaError;

/// Names against which coalitions and propositions are resolved.
#[derive(Debug, Clone, Copy)]
pub struct FormulaContext<'a> {
    pub agents: &'a [String],
    pub props: &'a [String],
}

impl<'a> From<&'a OpenCgs> for FormulaContext<'a> {
    fn from(g: &'a OpenCgs) -> Self {
        FormulaContext {
            agents: g.agents(),
            props: g.props(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'s> {
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Ident(&'s str),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok<'_>)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = bytes.get(i..i + 2);
        let (tok, len) = match (c, two) {
            (_, Some(b"<<")) => (Tok::LAngle, 2),
            (_, Some(b">>")) => (Tok::RAngle, 2),
            (_, Some(b"[[")) => (Tok::LBracket, 2),
            (_, Some(b"]]")) => (Tok::RBracket, 2),
            (_, Some(b"->")) => (Tok::Arrow, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'!', _) => (Tok::Bang, 1),
            (b'&', _) => (Tok::Amp, 1),
            (b'|', _) => (Tok::Pipe, 1),
            _ if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(&text[start..i])));
                continue;
            }
            _ => {
                return Err(FormulaError::Syntax {
                    position: i,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        out.push((i, tok));
        i += len;
    }
    Ok(out)
}

struct Parser<'s, 'c> {
    toks: Vec<(usize, Tok<'s>)>,
    pos: usize,
    end: usize,
    ctx: FormulaContext<'c>,
}

impl<'s> Parser<'s, '_> {
    fn peek(&self) -> Option<&Tok<'s>> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err(&self, message: &str) -> FormulaError {
        FormulaError::Syntax {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn eat(&mut self, tok: &Tok<'_>) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.eat(&Tok::Ident(kw))
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            Ok(Formula::or(Formula::not(lhs), rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.binary_temporal()?;
        while self.eat(&Tok::Amp) {
            lhs = Formula::and(lhs, self.binary_temporal()?);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.unary()?;
        if self.eat_keyword("U") {
            Ok(Formula::until(lhs, self.binary_temporal()?))
        } else if self.eat_keyword("R") {
            Ok(Formula::release(lhs, self.binary_temporal()?))
        } else {
            Ok(lhs)
        }
    }

    fn coalition(&mut self, close: Tok<'static>) -> Result<AgentSet, FormulaError> {
        let mut set = AgentSet::EMPTY;
        if self.eat(&close) {
            return Ok(set);
        }
        loop {
            match self.peek() {
                Some(Tok::Ident(name)) => {
                    let name = *name;
                    let idx = self
                        .ctx
                        .agents
                        .iter()
                        .position(|a| a == name)
                        .ok_or_else(|| FormulaError::UnknownAgent(name.into()))?;
                    set = set.with(AgentId(idx as u8));
                    self.pos += 1;
                }
                _ => return Err(self.err("expected agent name")),
            }
            if self.eat(&close) {
                return Ok(set);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.err("expected `,` or end of coalition"));
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(&Tok::LAngle) {
            let agents = self.coalition(Tok::RAngle)?;
            return Ok(Formula::exists(agents, self.binary_temporal()?));
        }
        if self.eat(&Tok::LBracket) {
            let agents = self.coalition(Tok::RBracket)?;
            return Ok(Formula::forall(agents, self.binary_temporal()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.implies()?;
            if !self.eat(&Tok::RParen) {
                return Err(self.err("expected `)`"));
            }
            return Ok(f);
        }
        match self.peek() {
            Some(Tok::Ident(word)) => {
                let word = *word;
                self.pos += 1;
                match word {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    "X" => Ok(Formula::next(self.unary()?)),
                    "F" => Ok(Formula::eventually(self.unary()?)),
                    "G" => Ok(Formula::always(self.unary()?)),
                    "U" | "R" => {
                        self.pos -= 1;
                        Err(self.err("binary operator without left operand"))
                    }
                    name => {
                        let idx = self
                            .ctx
                            .props
                            .iter()
                            .position(|p| p == name)
                            .ok_or_else(|| FormulaError::UnknownProp(name.into()))?;
                        Ok(Formula::Prop(PropId(idx as u8)))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected token")),
            None => Err(self.err("unexpected end of formula")),
        }
    }
}

/// Parses a state formula, resolving names against `ctx`.
pub fn parse_formula<'c>(text: &str, ctx: impl Into<FormulaContext<'c>>) -> Result<Formula, FormulaError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        ctx: ctx.into(),
    };
    let f = parser.implies()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    if !f.is_state_formula() {
        return Err(FormulaError::NotStateFormula);
    }
    Ok(f)
}
