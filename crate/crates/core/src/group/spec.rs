//! Group-spec mini-language.
//!
//! ```text
//! spec    := "1" | factor ("x" factor)*
//! factor  := ( "Z" <n> | "Zlat" ["[" <N> "]"] | "T" ["[" <res> "]"]
//!            | "R[delta=" <d> ",M=" <m> "]" ) ["'"]
//! ```
//!
//! A trailing `'` selects the dual side: `Z4'` is `Z_4` with counting/4 measure,
//! `R[delta=0.5,M=3]'` is the frequency axis dual to that grid.

use super::{Factor, GroupModel, Side};
use crate::error::{Error, ParseError, Result};

const DEFAULT_LATTICE_WINDOW: u32 = 8;
const DEFAULT_TORUS_RESOLUTION: u32 = 64;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse(ParseError {
            input: self.src.to_string(),
            position: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{token}`")))
        }
    }

    fn number_text(&mut self) -> &'a str {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn uint(&mut self) -> Result<u32> {
        let start = self.pos;
        let text = self.number_text();
        text.parse().map_err(|_| {
            self.pos = start;
            self.err("expected a non-negative integer")
        })
    }

    fn real(&mut self) -> Result<f64> {
        let start = self.pos;
        let text = self.number_text();
        text.parse().map_err(|_| {
            self.pos = start;
            self.err("expected a number")
        })
    }

    fn bracketed_uint(&mut self, default: u32) -> Result<u32> {
        if self.eat("[") {
            let v = self.uint()?;
            self.expect("]")?;
            Ok(v)
        } else {
            Ok(default)
        }
    }
}

pub(super) fn parse(src: &str) -> Result<GroupModel> {
    let mut cur = Cursor { src, pos: 0 };
    cur.skip_ws();
    if cur.rest().trim() == "1" {
        return Ok(GroupModel::trivial());
    }
    let mut factors = Vec::new();
    loop {
        cur.skip_ws();
        let start = cur.pos;
        let factor = if cur.eat("Zlat") {
            Factor::Lattice { window: cur.bracketed_uint(DEFAULT_LATTICE_WINDOW)? }
        } else if cur.eat("Z") {
            Factor::Cyclic { order: cur.uint()?, side: Side::Primal }
        } else if cur.eat("T") {
            Factor::Torus { resolution: cur.bracketed_uint(DEFAULT_TORUS_RESOLUTION)? }
        } else if cur.eat("R") {
            cur.expect("[")?;
            cur.expect("delta=")?;
            let delta = cur.real()?;
            cur.expect(",")?;
            cur.skip_ws();
            cur.expect("M=")?;
            let window = cur.uint()?;
            cur.expect("]")?;
            Factor::RealGrid { delta, window }
        } else {
            return Err(cur.err("expected a factor (Z<n>, Zlat[<N>], T[<res>], R[delta=<d>,M=<m>])"));
        };
        let factor = if cur.eat("'") { factor.dual() } else { factor };
        if let Err(e) = factor.validate() {
            cur.pos = start;
            return Err(cur.err(e.to_string()));
        }
        factors.push(factor);
        cur.skip_ws();
        if cur.rest().is_empty() {
            break;
        }
        if !cur.eat("x") {
            return Err(cur.err("expected `x` between factors"));
        }
    }
    GroupModel::from_factors(factors)
}

pub(super) fn render(g: &GroupModel) -> String {
    if g.factors().is_empty() {
        return "1".to_string();
    }
    g.factors()
        .iter()
        .map(|f| match *f {
            Factor::Cyclic { order, side: Side::Primal } => format!("Z{order}"),
            Factor::Cyclic { order, side: Side::Dual } => format!("Z{order}'"),
            Factor::Lattice { window } => format!("Zlat[{window}]"),
            Factor::Torus { resolution } => format!("T[{resolution}]"),
            Factor::RealGrid { delta, window } => format!("R[delta={delta},M={window}]"),
            Factor::RealFreq { delta, window } => format!("R[delta={delta},M={window}]'"),
        })
        .collect::<Vec<_>>()
        .join(" x ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let g = parse("Z4 x Z2 x R[delta=0.25,M=32]").unwrap();
        assert_eq!(
            g.factors(),
            &[
                Factor::Cyclic { order: 4, side: Side::Primal },
                Factor::Cyclic { order: 2, side: Side::Primal },
                Factor::RealGrid { delta: 0.25, window: 32 },
            ]
        );
    }

    #[test]
    fn render_round_trips() {
        for s in ["Z4", "Z2 x Z3'", "Zlat[5] x T[16]", "R[delta=0.1,M=7]'", "1", "Zlat[3] x Zlat[3] x Z2"] {
            let g = parse(s).unwrap();
            assert_eq!(render(&g), s);
            assert_eq!(parse(&render(&g)).unwrap(), g);
        }
    }

    #[test]
    fn errors_point_at_the_offending_character() {
        let Error::Parse(e) = parse("Z4 x Q3").unwrap_err() else { panic!() };
        assert_eq!(e.position, 5);
        let shown = e.to_string();
        assert!(shown.lines().last().unwrap().ends_with("     ^"), "{shown}");

        let Error::Parse(e) = parse("Z4 Z2").unwrap_err() else { panic!() };
        assert_eq!(e.position, 3);
        let Error::Parse(e) = parse("Z1").unwrap_err() else { panic!() };
        assert!(e.message.contains("order must be ≥ 2"));
        assert!(parse("R[delta=-1,M=2]").is_err());
    }
}
