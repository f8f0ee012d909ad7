//! Ordinal notations in Cantor normal form below `ε₀`, and ℕ-coded
//! well-order presentations of the ordinals below `ω²`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// `ω^{e₁}·c₁ + … + ω^{e_k}·c_k` with `e₁ > … > e_k` and every `cᵢ ≥ 1`.
/// Zero is the empty sum.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(Self::zero(), n)] }
        }
    }

    pub fn one() -> Self {
        Self::finite(1)
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::one())
    }

    /// `ω^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    /// `ω·c + k`.
    pub fn omega_times(c: u64, k: u64) -> Self {
        let mut terms = Vec::new();
        if c > 0 {
            terms.push((Self::one(), c));
        }
        if k > 0 {
            terms.push((Self::zero(), k));
        }
        Ordinal { terms }
    }

    /// Builds from terms, which must already be in normal form.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Option<Self> {
        let ok = terms.iter().all(|(_, c)| *c >= 1) && terms.windows(2).all(|w| w[0].0 > w[1].0);
        ok.then_some(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| !e.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| e.is_zero())
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn succ(&self) -> Ordinal {
        add(self, &Ordinal::one())
    }

    /// The predecessor of a successor.
    pub fn pred(&self) -> Option<Ordinal> {
        let (e, c) = self.terms.last()?;
        if !e.is_zero() {
            return None;
        }
        let mut terms = self.terms.clone();
        if *c == 1 {
            terms.pop();
        } else {
            terms.last_mut().unwrap().1 -= 1;
        }
        Some(Ordinal { terms })
    }

    /// The finite part: the coefficient of `ω⁰`.
    pub fn finite_part(&self) -> u64 {
        match self.terms.last() {
            Some((e, c)) if e.is_zero() => *c,
            _ => 0,
        }
    }

    /// The exponent, if finite, of every term; `None` at or above `ω^ω`.
    pub fn finite_exponents(&self) -> Option<Vec<(u64, u64)>> {
        self.terms.iter().map(|(e, c)| e.as_finite().map(|e| (e, *c))).collect()
    }

    /// `self · n` for a natural `n`.
    pub fn mul_nat(&self, n: u64) -> Ordinal {
        if n == 0 || self.is_zero() {
            return Ordinal::zero();
        }
        let mut terms = self.terms.clone();
        terms[0].1 *= n;
        // α·n = ω^{e₁}·c₁n + (rest of α), for n ≥ 1
        Ordinal { terms }
    }

    /// The `δ` with `a + δ = self`, when `a ≤ self`.
    pub fn sub_left(&self, a: &Ordinal) -> Option<Ordinal> {
        if a > self {
            return None;
        }
        let i = self.terms.iter().zip(&a.terms).take_while(|(x, y)| x == y).count();
        if i == a.terms.len() || i == self.terms.len() {
            return Some(Ordinal { terms: self.terms[i..].to_vec() });
        }
        let (e, c) = &self.terms[i];
        let (ea, ca) = &a.terms[i];
        let mut terms = Vec::new();
        if e == ea {
            terms.push((e.clone(), c - ca));
        } else {
            terms.push((e.clone(), *c));
        }
        terms.extend(self.terms[i + 1..].iter().cloned());
        Some(Ordinal { terms })
    }

    /// Whether this notation is below `ω²`, returning `(c, k)` for `ω·c + k`.
    pub fn below_omega_squared(&self) -> Option<(u64, u64)> {
        let mut c = 0;
        let mut k = 0;
        for (e, coeff) in &self.terms {
            match e.as_finite() {
                Some(1) => c = *coeff,
                Some(0) => k = *coeff,
                _ => return None,
            }
        }
        Some((c, k))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    for (x, y) in a.terms.iter().zip(&b.terms) {
        let ord = compare(&x.0, &y.0).then(x.1.cmp(&y.1));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.terms.len().cmp(&b.terms.len())
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let Some((lead, coeff)) = b.terms.first() else {
        return a.clone();
    };
    let mut terms: Vec<(Ordinal, u64)> = a.terms.iter().take_while(|(e, _)| e >= lead).cloned().collect();
    match terms.last_mut() {
        Some((e, c)) if e == lead => {
            *c += coeff;
            terms.extend(b.terms[1..].iter().cloned());
        }
        _ => terms.extend(b.terms.iter().cloned()),
    }
    Ordinal { terms }
}

pub fn succ(a: &Ordinal) -> Ordinal {
    a.succ()
}

pub fn is_limit(a: &Ordinal) -> bool {
    a.is_limit()
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;

    fn add(self, rhs: &Ordinal) -> Ordinal {
        add(self, rhs)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match e.as_finite() {
                Some(0) => write!(f, "{c}")?,
                Some(1) => write!(f, "w*{c}")?,
                Some(n) => write!(f, "w^{n}*{c}")?,
                None => write!(f, "w^({e})*{c}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad ordinal notation at byte {at}: {msg}")]
pub struct ParseOrdinalError {
    pub at: usize,
    pub msg: String,
}

struct Parser<'s> {
    s: &'s [u8],
    i: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T, ParseOrdinalError> {
        Err(ParseOrdinalError { at: self.i, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn eat_omega(&mut self) -> bool {
        self.skip_ws();
        if self.eat(b'w') {
            return true;
        }
        let omega = "ω".as_bytes();
        if self.s[self.i..].starts_with(omega) {
            self.i += omega.len();
            return true;
        }
        false
    }

    fn nat(&mut self) -> Result<Option<u64>, ParseOrdinalError> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Ok(None);
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        match text.parse() {
            Ok(n) => Ok(Some(n)),
            Err(_) => self.err("number out of range"),
        }
    }

    fn sum(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = add(&acc, &t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        if let Some(n) = self.nat()? {
            return Ok(Ordinal::finite(n));
        }
        if !self.eat_omega() {
            return self.err("expected a number or w");
        }
        let exp = if self.eat(b'^') { self.exponent()? } else { Ordinal::one() };
        let coeff = if self.eat(b'*') {
            match self.nat()? {
                Some(c) => c,
                None => return self.err("expected a coefficient"),
            }
        } else {
            1
        };
        Ok(Ordinal::omega_pow(exp).mul_nat(coeff))
    }

    fn exponent(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        if self.eat(b'(') {
            let e = self.sum()?;
            if !self.eat(b')') {
                return self.err("expected )");
            }
            return Ok(e);
        }
        if let Some(n) = self.nat()? {
            return Ok(Ordinal::finite(n));
        }
        if self.eat_omega() {
            return Ok(Ordinal::omega());
        }
        self.err("expected an exponent")
    }
}

impl FromStr for Ordinal {
    type Err = ParseOrdinalError;

    /// Accepts sums like `w^2*3 + w*1 + 5`, also `ω`, `w^(w+1)`, and
    /// non-normal sums, which are added up.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { s: s.as_bytes(), i: 0 };
        let o = p.sum()?;
        p.skip_ws();
        if p.i != p.s.len() {
            return p.err("trailing input");
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("no presentation scheme for {0}: only notations below w^2 are supported")]
    UnsupportedRange(Ordinal),
}

/// A well-order on a subset of ℕ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WellOrderPresentation {
    /// `order[i]` is the element of rank `i`.
    Finite(Vec<u64>),
    /// Type `ω·c + k`, domain ℕ. The naturals below `k` sit on top in their
    /// usual order; `x ≥ k` lies in copy `(x−k) mod c` of `ω` at position
    /// `(x−k) div c`, copies ordered first.
    Scheme { c: u64, k: u64 },
}

impl WellOrderPresentation {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            WellOrderPresentation::Finite(order) => order.contains(&n),
            WellOrderPresentation::Scheme { .. } => true,
        }
    }

    /// The rank of `n` in the order.
    pub fn rank_of(&self, n: u64) -> Option<Ordinal> {
        match self {
            WellOrderPresentation::Finite(order) => order.iter().position(|&x| x == n).map(|i| Ordinal::finite(i as u64)),
            WellOrderPresentation::Scheme { c, k } => {
                if n < *k {
                    Some(Ordinal::omega_times(*c, n))
                } else {
                    let y = n - k;
                    Some(Ordinal::omega_times(y % c, y / c))
                }
            }
        }
    }

    /// `a ⊲ b`; false unless both are in the domain.
    pub fn lt(&self, a: u64, b: u64) -> bool {
        match (self.rank_of(a), self.rank_of(b)) {
            (Some(x), Some(y)) => x < y,
            _ => false,
        }
    }

    /// The order type of the whole presentation.
    pub fn order_type(&self) -> Ordinal {
        match self {
            WellOrderPresentation::Finite(order) => Ordinal::finite(order.len() as u64),
            WellOrderPresentation::Scheme { c, k } => Ordinal::omega_times(*c, *k),
        }
    }
}

pub fn to_presentation(a: &Ordinal) -> Result<WellOrderPresentation, PresentationError> {
    if let Some(n) = a.as_finite() {
        return Ok(WellOrderPresentation::Finite((0..n).collect()));
    }
    match a.below_omega_squared() {
        Some((c, k)) => Ok(WellOrderPresentation::Scheme { c, k }),
        None => Err(PresentationError::UnsupportedRange(a.clone())),
    }
}

/// The order type of a finite restriction: its size.
pub fn order_type(p: &WellOrderPresentation, subset: &[u64]) -> Ordinal {
    let mut seen: Vec<u64> = subset.iter().copied().filter(|&x| p.contains(x)).collect();
    seen.sort_unstable();
    seen.dedup();
    Ordinal::finite(seen.len() as u64)
}

/// The elements of `window` below `n` in `p`.
pub fn initial_segment(p: &WellOrderPresentation, n: u64, window: std::ops::Range<u64>) -> Vec<u64> {
    window.filter(|&x| p.lt(x, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("3"), &o("w")), Ordering::Less);
        assert_eq!(compare(&o("w*2+1"), &o("w*2 + 1")), Ordering::Equal);
        assert_eq!(compare(&o("w^2"), &o("w*5+9")), Ordering::Greater);
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(add(&o("1"), &o("w")), o("w"));
        assert_eq!(o("w").succ(), o("w+1"));
        assert!(o("w*2").is_limit());
        assert!(!o("w+3").is_limit());
        assert!(!Ordinal::zero().is_limit());
        assert_eq!(add(&o("w^2*3 + w + 5"), &o("w*2 + 1")), o("w^2*3 + w*3 + 1"));
        assert_eq!(o("w+3").pred(), Some(o("w+2")));
        assert_eq!(o("w").pred(), None);
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "5", "w*1", "w^2*3 + w*1 + 5", "w^(w*1)*2 + 7", "w^(w^2*1 + 1)*1"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("ω·2".replace('·', "*").as_str()), o("w*2"));
        assert_eq!(o("w^w"), Ordinal::omega_pow(Ordinal::omega()));
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("3 +".parse::<Ordinal>().is_err());
        assert!("x".parse::<Ordinal>().is_err());
    }

    #[test]
    fn presentation_examples() {
        assert_eq!(to_presentation(&o("3")).unwrap(), WellOrderPresentation::Finite(vec![0, 1, 2]));
        let w = to_presentation(&o("w")).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                assert_eq!(w.lt(a, b), a < b);
            }
        }
        let w1 = to_presentation(&o("w+1")).unwrap();
        for n in 0..20 {
            for m in 0..20 {
                let expected = (n != 0 && m != 0 && n < m) || (n != 0 && m == 0);
                assert_eq!(w1.lt(n, m), expected, "{n} {m}");
            }
        }
        assert!(to_presentation(&o("w^2")).is_err());
    }

    #[test]
    fn order_type_examples() {
        let p = WellOrderPresentation::Finite(vec![5, 2, 9]);
        assert_eq!(order_type(&p, &[5, 2, 9]), o("3"));
        assert_eq!(order_type(&p, &[]), o("0"));
        let w = to_presentation(&o("w")).unwrap();
        for n in 0..30 {
            assert_eq!(order_type(&w, &initial_segment(&w, n, 0..100)), Ordinal::finite(n));
        }
    }
}
