//! Prefix-notation grammar for sets, maps, partitions and weights.
//!
//! ```text
//! set       := '(' set ')' | 'fin' '{' n* '}' | 'empty' | 'ap' n n | 'omega' | 'ω'
//!            | 'evens' | 'odds' | 'squares' | 'factorials' | 'powers' n | 'col' n
//!            | 'diag' | 'branch' bits | 'rado-hom' ('clique'|'independent') n
//!            | ('union'|'inter'|'diff') set set | 'blowup' set partition
//!            | ('image'|'preimage') fn set | 'pred-file' path
//! fn        := '(' fn ')' | 'affine' n n | 'div' n | 'enum' set | '+'n
//! partition := '(' partition ')' | 'dyadic' | 'geometric' n n | 'triangular'
//!            | 'singletons' | 'width' n | 'intervals' '[' n* ']' ('tail' n)?
//!            | 'explicit' '[' ('{' n* '}')* ']' 'tail' n | 'columns'
//!            | 'weighted' weight | 'harmonic' | 'dominate' '[' partition* ']'
//!            | 'on' set partition
//! weight    := 'harmonic' | 'const' p/q | 'file' path
//! ```
//! Commas between numbers are optional.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::natset::{FnExpr, PredFile, SetExpr};
use crate::partition::Partition;
use crate::rado::HomKind;
use crate::weight::{parse_rational, WeightFn};

#[derive(Debug, Clone, PartialEq)]
struct Token<'a> {
    text: &'a str,
    pos: usize,
}

fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in src.char_indices() {
        let punct = matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ',' | ';');
        if c.is_whitespace() || punct {
            if let Some(s) = start.take() {
                out.push(Token { text: &src[s..i], pos: s });
            }
            if punct && c != ',' {
                out.push(Token { text: &src[i..i + c.len_utf8()], pos: i });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &src[s..], pos: s });
    }
    out
}

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    at: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { toks: tokenize(src), at: 0, end: src.len() }
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.at).map(|t| t.text)
    }

    fn bump(&mut self) -> Result<&'a str> {
        let t = self.peek().ok_or_else(|| Error::parse(self.end, "unexpected end of input"))?;
        self.at += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let pos = self.pos();
        let t = self.bump()?;
        if t == want {
            Ok(())
        } else {
            Err(Error::parse(pos, format!("expected '{want}', found '{t}'")))
        }
    }

    fn eat(&mut self, want: &str) -> bool {
        if self.peek() == Some(want) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn num(&mut self) -> Result<u64> {
        let pos = self.pos();
        let t = self.bump()?;
        t.parse().map_err(|_| Error::parse(pos, format!("expected a natural number, found '{t}'")))
    }

    fn nums_until(&mut self, close: &str) -> Result<Vec<u64>> {
        let mut v = Vec::new();
        while !self.eat(close) {
            v.push(self.num()?);
        }
        Ok(v)
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(Error::parse(self.pos(), format!("unexpected trailing '{t}'"))),
        }
    }

    fn set(&mut self) -> Result<SetExpr> {
        let pos = self.pos();
        let head = self.bump()?;
        let e = match head {
            "(" => {
                let e = self.set()?;
                self.expect(")")?;
                e
            }
            "fin" => {
                let open = self.bump()?;
                let close = match open {
                    "{" => "}",
                    "[" => "]",
                    other => return Err(Error::parse(pos, format!("fin expects '{{', found '{other}'"))),
                };
                SetExpr::fin(self.nums_until(close)?)
            }
            "empty" | "∅" => SetExpr::empty(),
            "ap" => {
                let a = self.num()?;
                let d = self.num()?;
                SetExpr::ap(a, d)
            }
            "omega" | "ω" => SetExpr::omega(),
            "evens" => SetExpr::ap(0, 2),
            "odds" => SetExpr::ap(1, 2),
            "squares" => SetExpr::Squares,
            "factorials" => SetExpr::Factorials,
            "powers" => SetExpr::Powers(self.num()?),
            "col" => SetExpr::Col(self.num()?),
            "diag" | "Δ" => SetExpr::Diag,
            "branch" => {
                let w = self.bump()?.trim_matches('"');
                SetExpr::Branch(w.to_string())
            }
            "rado-hom" => {
                let kpos = self.pos();
                let kind = match self.bump()? {
                    "clique" => HomKind::Clique,
                    "independent" => HomKind::Independent,
                    other => return Err(Error::parse(kpos, format!("unknown homogeneity kind '{other}'"))),
                };
                let n = self.num()? as usize;
                SetExpr::RadoHom { kind, n }
            }
            "union" | "inter" | "diff" => {
                let a = self.set()?;
                let b = self.set()?;
                match head {
                    "union" => SetExpr::union(a, b),
                    "inter" => SetExpr::inter(a, b),
                    _ => SetExpr::diff(a, b),
                }
            }
            "blowup" => {
                let s = self.set()?;
                let p = self.partition()?;
                SetExpr::blowup(s, p)
            }
            "image" | "preimage" => {
                let f = self.func()?;
                let s = self.set()?;
                if head == "image" {
                    SetExpr::image(f, s)
                } else {
                    SetExpr::preimage(f, s)
                }
            }
            "pred-file" => {
                let path = self.bump()?;
                SetExpr::PredFile(Arc::new(PredFile::load(path)?))
            }
            other => return Err(Error::parse(pos, format!("unknown set form '{other}'"))),
        };
        e.validate().map_err(|err| match err {
            Error::Malformed(m) => Error::parse(pos, m),
            other => other,
        })?;
        Ok(e)
    }

    fn func(&mut self) -> Result<FnExpr> {
        let pos = self.pos();
        let head = self.bump()?;
        let f = match head {
            "(" => {
                let f = self.func()?;
                self.expect(")")?;
                f
            }
            "affine" => {
                let a = self.num()?;
                let b = self.num()?;
                FnExpr::Affine { a, b }
            }
            "div" => FnExpr::Div(self.num()?),
            "enum" => FnExpr::Enumerate(Arc::new(self.set()?)),
            t if t.starts_with('+') => {
                let b = t[1..].parse().map_err(|_| Error::parse(pos, format!("bad shift '{t}'")))?;
                FnExpr::Affine { a: 1, b }
            }
            other => return Err(Error::parse(pos, format!("unknown map form '{other}'"))),
        };
        f.validate().map_err(|err| match err {
            Error::Malformed(m) => Error::parse(pos, m),
            other => other,
        })?;
        Ok(f)
    }

    fn weight(&mut self) -> Result<WeightFn> {
        let pos = self.pos();
        match self.bump()? {
            "harmonic" => Ok(WeightFn::Harmonic),
            "const" => {
                let rpos = self.pos();
                let r = parse_rational(self.bump()?).map_err(|e| Error::parse(rpos, e.to_string()))?;
                let w = WeightFn::Const(r);
                w.validate().map_err(|e| Error::parse(rpos, e.to_string()))?;
                Ok(w)
            }
            "file" => WeightFn::load_file(self.bump()?),
            other => Err(Error::parse(pos, format!("unknown weight '{other}'"))),
        }
    }

    fn partition(&mut self) -> Result<Partition> {
        let pos = self.pos();
        let head = self.bump()?;
        let p = match head {
            "(" => {
                let p = self.partition()?;
                self.expect(")")?;
                p
            }
            "dyadic" => Partition::dyadic(),
            "geometric" => {
                let first = self.num()?;
                let ratio = self.num()?;
                Partition::geometric(first, ratio)
            }
            "triangular" => Partition::triangular(),
            "singletons" => Partition::singletons(),
            "width" => Partition::width(self.num()?),
            "intervals" => {
                self.expect("[")?;
                let bounds = self.nums_until("]")?;
                if self.eat("tail") {
                    let w = self.num()?;
                    Partition::new(crate::partition::PartitionKind::Intervals {
                        carrier: None,
                        rule: crate::partition::BoundaryRule::Explicit { bounds, tail_width: w },
                    })
                } else {
                    Partition::bounds(bounds)
                }
            }
            "explicit" => {
                self.expect("[")?;
                let mut blocks = Vec::new();
                while !self.eat("]") {
                    self.expect("{")?;
                    blocks.push(self.nums_until("}")?);
                }
                self.expect("tail")?;
                let w = self.num()?;
                Partition::explicit(blocks, w)
            }
            "columns" => Partition::delta_columns(),
            "weighted" => Partition::weighted(self.weight()?),
            "harmonic" => Partition::weighted(WeightFn::Harmonic),
            "dominate" => {
                self.expect("[")?;
                let mut ps = Vec::new();
                while !self.eat("]") {
                    ps.push(self.partition()?);
                }
                Partition::dominating(ps)
            }
            "on" => {
                let c = self.set()?;
                let p = self.partition()?;
                p.on(c).map_err(|e| Error::parse(pos, e.to_string()))?
            }
            other => return Err(Error::parse(pos, format!("unknown partition form '{other}'"))),
        };
        p.validate().map_err(|err| match err {
            Error::Malformed(m) | Error::Precondition(m) => Error::parse(pos, m),
            other => other,
        })?;
        Ok(p)
    }
}

pub fn parse_set(src: &str) -> Result<SetExpr> {
    let mut p = Parser::new(src);
    let e = p.set()?;
    p.finish()?;
    Ok(e)
}

/// Sets separated by `;`.
pub fn parse_set_list(src: &str) -> Result<Vec<SetExpr>> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    if p.peek().is_none() {
        return Ok(out);
    }
    loop {
        out.push(p.set()?);
        if !p.eat(";") {
            break;
        }
    }
    p.finish()?;
    Ok(out)
}

pub fn parse_partition(src: &str) -> Result<Partition> {
    let mut p = Parser::new(src);
    let e = p.partition()?;
    p.finish()?;
    Ok(e)
}

/// Partitions separated by `;`.
pub fn parse_partition_list(src: &str) -> Result<Vec<Partition>> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    loop {
        out.push(p.partition()?);
        if !p.eat(";") {
            break;
        }
    }
    p.finish()?;
    Ok(out)
}

pub fn parse_fn(src: &str) -> Result<FnExpr> {
    let mut p = Parser::new(src);
    let e = p.func()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_weight(src: &str) -> Result<WeightFn> {
    let mut p = Parser::new(src);
    let e = p.weight()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_forms() {
        assert_eq!(parse_set("ap 1 2").unwrap(), SetExpr::ap(1, 2));
        assert_eq!(
            parse_set("diff (ap 0 1) (ap 0 2)").unwrap(),
            SetExpr::diff(SetExpr::omega(), SetExpr::ap(0, 2))
        );
        assert_eq!(
            parse_set("union (ap 0 2) (fin {1})").unwrap(),
            SetExpr::union(SetExpr::ap(0, 2), SetExpr::fin([1]))
        );
        assert_eq!(parse_set("fin {0,2}").unwrap(), SetExpr::fin([0, 2]));
        assert_eq!(
            parse_set("image +1 factorials").unwrap(),
            SetExpr::image(FnExpr::Affine { a: 1, b: 1 }, SetExpr::Factorials)
        );
        assert_eq!(parse_set_list("ω;evens").unwrap(), vec![SetExpr::omega(), SetExpr::ap(0, 2)]);
    }

    #[test]
    fn display_reparses() {
        let srcs = [
            "blowup (fin {0,2}) dyadic",
            "inter (union squares (col 3)) (diff (ap 2 5) (branch 10))",
            "image (enum (ap 0 2)) (preimage (div 3) (powers 2))",
            "blowup (rado-hom clique 3) (on (ap 0 3) (weighted harmonic))",
            "blowup evens (explicit [{0},{1,2}] tail 3)",
            "blowup evens (dominate [(width 2) (intervals [0,2,5] tail 4) columns])",
            "blowup evens (weighted const 1/3)",
        ];
        for s in srcs {
            let e = parse_set(s).unwrap();
            let again = parse_set(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s} -> {e}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_set("union (ap 0 2) (bogus 3)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 16),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_set("ap 0 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_set("squares squares"), Err(Error::Parse { .. })));
        assert!(matches!(parse_partition("intervals [1,2]"), Err(Error::Parse { .. })));
    }
}
