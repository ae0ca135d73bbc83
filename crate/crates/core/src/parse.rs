//! Text formats for command-line inputs: rational functions such as `(x^2+1)/x^3`,
//! vectors of them, approximation pairs `(a_1,…,a_d,b)` and `ε` grids such as
//! `2^-1..2^-12`.
//!
//! Integer literals name field elements by index (`0..q`), so over `F_4` the elements
//! are `0, 1, 2, 3` in the table order of [`Field`].

use num_rational::BigRational;

use crate::diophantine::ApproxPair;
use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::laurent::RatFn;
use crate::qexp::{parse_rational, qpow_rat};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    f: &'a Field,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at offset {} in '{}'",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))
    }

    // expr := ['-'] term (('+' | '-') term)*
    fn expr(&mut self) -> Result<RatFn> {
        let neg = self.eat(b'-');
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg(self.f);
        }
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?, self.f);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?, self.f);
            } else {
                return Ok(acc);
            }
        }
    }

    // term := power (('*' | '/' | implicit) power)*
    fn term(&mut self) -> Result<RatFn> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.power()?, self.f);
            } else if self.eat(b'/') {
                acc = acc.div(&self.power()?, self.f)?;
            } else if matches!(self.peek(), Some(b'x' | b'(')) || self.peek().is_some_and(|c| c.is_ascii_digit()) {
                acc = acc.mul(&self.power()?, self.f);
            } else {
                return Ok(acc);
            }
        }
    }

    // power := atom ['^' ['-'] number]
    fn power(&mut self) -> Result<RatFn> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let neg = self.eat(b'-');
        let e = self.number()?;
        let e = u32::try_from(e).map_err(|_| self.err("exponent too large"))?;
        let mut r = RatFn::one();
        for _ in 0..e {
            r = r.mul(&base, self.f);
        }
        if neg {
            r = r.inv(self.f)?;
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<RatFn> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(RatFn::from_poly(Poly::x()))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                let n = u32::try_from(n).map_err(|_| self.err("literal too large"))?;
                Ok(RatFn::from_poly(Poly::constant(self.f.element(n)?)))
            }
            _ => Err(self.err("expected 'x', a field element or '('")),
        }
    }
}

/// Parses a rational function in `x` over `f`.
pub fn parse_ratfn(s: &str, f: &Field) -> Result<RatFn> {
    let mut p = Parser { src: s.as_bytes(), pos: 0, f };
    let r = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(r)
}

/// Parses a polynomial in `x` over `f`.
pub fn parse_poly(s: &str, f: &Field) -> Result<Poly> {
    let r = parse_ratfn(s, f)?;
    if !r.is_poly() {
        return Err(Error::Parse(format!("'{s}' is not a polynomial")));
    }
    Ok(r.num().clone())
}

/// Splits at top-level commas, dropping one optional pair of enclosing parentheses.
fn split_list(s: &str) -> Result<Vec<&str>> {
    let mut s = s.trim();
    if s.starts_with('(') && s.ends_with(')') && encloses(s) {
        s = &s[1..s.len() - 1];
    }
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
        }
    }
    out.push(s[start..].trim());
    if out.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("empty list entry in '{s}'")));
    }
    Ok(out)
}

/// The first `(` is closed by the final `)`.
fn encloses(s: &str) -> bool {
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return i == s.len() - 1;
                }
            }
            _ => {}
        }
    }
    false
}

/// Parses `θ` as a comma-separated list of rational functions.
pub fn parse_ratfn_vec(s: &str, f: &Field) -> Result<Vec<RatFn>> {
    split_list(s)?.into_iter().map(|p| parse_ratfn(p, f)).collect()
}

/// Parses `(a_1,…,a_d,b)` into a primitive pair.
pub fn parse_pair(s: &str, f: &Field) -> Result<ApproxPair> {
    let mut polys: Vec<Poly> = split_list(s)?.into_iter().map(|p| parse_poly(p, f)).collect::<Result<_>>()?;
    if polys.len() < 2 {
        return Err(Error::Parse(format!("'{s}' needs at least one a_i and b")));
    }
    let b = polys.pop().unwrap();
    ApproxPair::new(polys, b, f)
}

/// Parses an `ε` grid: either `p^-a..p^-b` (all powers in between, in the written order)
/// or a comma-separated list of rationals.
pub fn parse_eps_grid(s: &str) -> Result<Vec<BigRational>> {
    if let Some((a, b)) = s.split_once("..") {
        let bad = || Error::Parse(format!("cannot parse grid '{s}'"));
        let (ba, ea) = a.trim().split_once('^').ok_or_else(bad)?;
        let (bb, eb) = b.trim().split_once('^').ok_or_else(bad)?;
        let base: u32 = ba.trim().parse().map_err(|_| bad())?;
        if bb.trim().parse::<u32>().ok() != Some(base) || base < 2 {
            return Err(bad());
        }
        let ea: i64 = ea.trim().parse().map_err(|_| bad())?;
        let eb: i64 = eb.trim().parse().map_err(|_| bad())?;
        let exps: Vec<i64> = if ea <= eb { (ea..=eb).collect() } else { (eb..=ea).rev().collect() };
        return Ok(exps.into_iter().map(|e| qpow_rat(base, e)).collect());
    }
    s.split(',').map(parse_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexp::rat;

    #[test]
    fn expressions() {
        let f = Field::of_order(2).unwrap();
        let t = parse_ratfn("(x^2+1)/x^3", &f).unwrap();
        assert_eq!(t, RatFn::new(Poly::from_coeffs([1, 0, 1]), Poly::monomial(1, 3), &f).unwrap());
        assert_eq!(parse_ratfn("x^-2", &f).unwrap(), RatFn::new(Poly::one(), Poly::monomial(1, 2), &f).unwrap());
        assert_eq!(parse_poly("x(x+1)", &f).unwrap(), Poly::from_coeffs([0, 1, 1]));
        assert!(parse_ratfn("2", &f).is_err());
        assert!(parse_ratfn("1/0", &f).is_err());
        assert!(parse_ratfn("x+", &f).is_err());
        let f3 = Field::of_order(3).unwrap();
        assert_eq!(parse_poly("-x", &f3).unwrap(), Poly::monomial(2, 1));
    }

    #[test]
    fn lists_and_pairs() {
        let f = Field::of_order(2).unwrap();
        let u = parse_pair("(0,0,1)", &f).unwrap();
        assert_eq!(u, ApproxPair::root(2));
        let v = parse_ratfn_vec("1/(x^2+x+1), x/(x^2+x+1)", &f).unwrap();
        assert_eq!(v.len(), 2);
        assert!(parse_pair("(x,x)", &f).is_err());
    }

    #[test]
    fn grids() {
        let g = parse_eps_grid("2^-1..2^-3").unwrap();
        assert_eq!(g, vec![rat(1, 2), rat(1, 4), rat(1, 8)]);
        assert_eq!(parse_eps_grid("1/4,2^-4").unwrap(), vec![rat(1, 4), rat(1, 16)]);
        assert_eq!(parse_eps_grid("2^-1..2^-10").unwrap().len(), 10);
    }
}
