//! Borel codes for subsets of `2^ω`.
//!
//! A [`BorelCode`] is a finite tree with shared subtrees. Its flat form is the
//! map `f: ℕ → ℕ` with tags `f(0) ≥ 2` (cylinder of `str_index(f(0) − 2)`),
//! `f(0) = 0` (complement of `f₊`, where `f₊(n) = f(n+1)`) and `f(0) = 1`
//! (union of the `f_m`, where `f_m(n) = f(pair(m, n) + 1)`). A [`FlatCode`]
//! is such a map given lazily, either derived from a tree or computed by a
//! feedback program.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::coding::{extends_oracle, pair, str_index, unpair, BitOracle, BitString, InfiniteBitSeq};
use crate::feedback::{eval, Budget, Verdict};
use crate::machine::Library;
use crate::ordinal::Ordinal;

/// What a finite union denotes at indices past its listed children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Padding {
    RepeatLast,
    Empty,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Node {
    Basic(BitString),
    Compl(BorelCode),
    Union(Vec<BorelCode>, Padding),
}

#[derive(Clone, PartialEq, Eq)]
pub struct BorelCode(Arc<Node>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BorelError {
    #[error("a union needs at least one child")]
    EmptyUnion,
    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
}

impl BorelCode {
    pub fn basic(sigma: BitString) -> Self {
        BorelCode(Arc::new(Node::Basic(sigma)))
    }

    pub fn compl(child: BorelCode) -> Self {
        BorelCode(Arc::new(Node::Compl(child)))
    }

    pub fn union(children: Vec<BorelCode>, padding: Padding) -> Result<Self, BorelError> {
        if children.is_empty() {
            return Err(BorelError::EmptyUnion);
        }
        Ok(BorelCode(Arc::new(Node::Union(children, padding))))
    }

    /// `cap(Basic("0"), Basic("1"))`, the code used for ∅.
    pub fn empty() -> Self {
        static EMPTY: OnceLock<BorelCode> = OnceLock::new();
        EMPTY
            .get_or_init(|| {
                cap(&[BorelCode::basic(BitString::from_bits([false])), BorelCode::basic(BitString::from_bits([true]))])
            })
            .clone()
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &BorelCode) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Child `m` of a union, padding applied.
    pub fn union_child(children: &[BorelCode], padding: Padding, m: u64) -> BorelCode {
        match children.get(m as usize) {
            Some(c) => c.clone(),
            None => match padding {
                Padding::RepeatLast => children.last().unwrap().clone(),
                Padding::Empty => BorelCode::empty(),
            },
        }
    }

    /// Distinct nodes, counting shared subtrees once.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.key()) {
                continue;
            }
            match c.node() {
                Node::Basic(_) => {}
                Node::Compl(ch) => stack.push(ch.clone()),
                Node::Union(cs, _) => stack.extend(cs.iter().cloned()),
            }
        }
        seen.len()
    }

    /// Height of the tree, a basic code being 0.
    pub fn depth(&self) -> usize {
        fn go(c: &BorelCode, memo: &mut HashMap<usize, usize>) -> usize {
            if let Some(&d) = memo.get(&c.key()) {
                return d;
            }
            let d = match c.node() {
                Node::Basic(_) => 0,
                Node::Compl(ch) => 1 + go(ch, memo),
                Node::Union(cs, _) => 1 + cs.iter().map(|ch| go(ch, memo)).max().unwrap(),
            };
            memo.insert(c.key(), d);
            d
        }
        go(self, &mut HashMap::new())
    }
}

pub fn neg(c: &BorelCode) -> BorelCode {
    BorelCode::compl(c.clone())
}

/// Union of a nonempty list, padded by repeating the last child.
///
/// # Panics
/// On an empty list.
pub fn cup(cs: &[BorelCode]) -> BorelCode {
    BorelCode::union(cs.to_vec(), Padding::RepeatLast).expect("cup of an empty list")
}

/// Intersection, as the complement of the union of complements.
///
/// # Panics
/// On an empty list.
pub fn cap(cs: &[BorelCode]) -> BorelCode {
    neg(&cup(&cs.iter().map(neg).collect::<Vec<_>>()))
}

/// Whether `y` lies in the realization of `c`.
pub fn member(c: &BorelCode, y: &impl BitOracle) -> bool {
    Member { y, memo: HashMap::new() }.go(c)
}

struct Member<'y, Y> {
    y: &'y Y,
    memo: HashMap<usize, bool>,
}

impl<Y: BitOracle> Member<'_, Y> {
    fn go(&mut self, c: &BorelCode) -> bool {
        match c.node() {
            Node::Basic(sigma) => extends_oracle(self.y, sigma),
            Node::Compl(ch) => {
                if let Some(&v) = self.memo.get(&c.key()) {
                    return v;
                }
                let v = !self.go(ch);
                self.memo.insert(c.key(), v);
                v
            }
            Node::Union(cs, _) => {
                if let Some(&v) = self.memo.get(&c.key()) {
                    return v;
                }
                let v = cs.iter().any(|ch| self.go(ch));
                self.memo.insert(c.key(), v);
                v
            }
        }
    }
}

/// Least `β` with the code in `BC_β`. Always finite for trees.
pub fn rank(c: &BorelCode) -> Ordinal {
    Ordinal::finite(rank_nat(c))
}

pub fn rank_nat(c: &BorelCode) -> u64 {
    fn go(c: &BorelCode, memo: &mut HashMap<usize, u64>) -> u64 {
        if let Some(&r) = memo.get(&c.key()) {
            return r;
        }
        let r = match c.node() {
            Node::Basic(_) => 0,
            Node::Compl(ch) => go(ch, memo) + 1,
            Node::Union(cs, pad) => {
                let mut top = cs.iter().map(|ch| go(ch, memo)).max().unwrap();
                if *pad == Padding::Empty {
                    top = top.max(go(&BorelCode::empty(), memo));
                }
                top + 1
            }
        };
        memo.insert(c.key(), r);
        r
    }
    go(c, &mut HashMap::new())
}

/// Three-valued answer for questions decided under a budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl Decision {
    fn from_bool(b: bool) -> Self {
        if b {
            Decision::Yes
        } else {
            Decision::No
        }
    }

    fn not(self) -> Self {
        match self {
            Decision::Yes => Decision::No,
            Decision::No => Decision::Yes,
            Decision::Unknown => Decision::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatBudget {
    /// Nesting of sub-codes explored.
    pub depth: u32,
    /// Union components searched when the width is not known.
    pub width: u64,
    /// Budget for each machine-backed accessor call.
    pub eval: Budget,
}

impl Default for FlatBudget {
    fn default() -> Self {
        FlatBudget { depth: 64, width: 64, eval: Budget::new(8, 100_000, 1_000_000) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatError {
    #[error("depth budget exhausted")]
    Depth,
    #[error("width budget exhausted")]
    Width,
    #[error("accessor undecided at index {index}: {reason}")]
    Accessor { index: u64, reason: String },
}

/// A machine-backed accessor: `f(n) = ⟨prog⟩^X(n)`.
#[derive(Clone, Debug)]
pub struct MachineCode {
    pub lib: Arc<Library>,
    pub prog: u64,
    pub x: InfiniteBitSeq,
}

#[derive(Clone)]
enum Source {
    Tree(BorelCode),
    Shift(FlatCode),
    Component(FlatCode, u64),
    Neg(FlatCode),
    Cup(Vec<FlatCode>),
    Machine(MachineCode),
    Func(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
}

/// A lazily evaluated flat code.
#[derive(Clone)]
pub struct FlatCode(Arc<Source>);

impl fmt::Debug for FlatCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Source::Tree(c) => write!(f, "Tree({c})"),
            Source::Shift(g) => write!(f, "Shift({g:?})"),
            Source::Component(g, m) => write!(f, "Component({g:?}, {m})"),
            Source::Neg(g) => write!(f, "Neg({g:?})"),
            Source::Cup(gs) => write!(f, "Cup({gs:?})"),
            Source::Machine(m) => write!(f, "Machine(prog {}, X = {})", m.prog, m.x),
            Source::Func(_) => f.write_str("Func"),
        }
    }
}

impl FlatCode {
    pub fn machine(m: MachineCode) -> Self {
        FlatCode(Arc::new(Source::Machine(m)))
    }

    pub fn from_fn(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        FlatCode(Arc::new(Source::Func(Arc::new(f))))
    }

    pub fn is_tree_backed(&self) -> bool {
        match &*self.0 {
            Source::Tree(_) => true,
            Source::Shift(g) | Source::Component(g, _) | Source::Neg(g) => g.is_tree_backed(),
            Source::Cup(gs) => gs.iter().all(FlatCode::is_tree_backed),
            Source::Machine(_) | Source::Func(_) => false,
        }
    }

    /// `f(n)`.
    pub fn at(&self, n: u64, b: &Budget) -> Result<u64, FlatError> {
        match &*self.0 {
            Source::Tree(c) => Ok(tree_at(c, n)),
            Source::Shift(g) => g.at(n + 1, b),
            Source::Component(g, m) => g.at(pair(*m, n) + 1, b),
            Source::Neg(g) => {
                if n == 0 {
                    Ok(0)
                } else {
                    g.at(n - 1, b)
                }
            }
            Source::Cup(gs) => {
                if n == 0 {
                    return Ok(1);
                }
                let (m, k) = unpair(n - 1);
                gs[(m as usize).min(gs.len() - 1)].at(k, b)
            }
            Source::Machine(mc) => match eval(&mc.lib, mc.prog, &mc.x, &InfiniteBitSeq::zeros(), n, *b).0 {
                Verdict::Converges { value, .. } => Ok(value),
                other => Err(FlatError::Accessor { index: n, reason: other.kind().to_string() }),
            },
            Source::Func(f) => Ok(f(n)),
        }
    }

    /// `f₊`.
    pub fn plus(&self) -> FlatCode {
        match &*self.0 {
            Source::Tree(c) => match c.node() {
                Node::Compl(ch) => tree_to_flat(ch),
                _ => FlatCode(Arc::new(Source::Shift(self.clone()))),
            },
            Source::Neg(g) => g.clone(),
            _ => FlatCode(Arc::new(Source::Shift(self.clone()))),
        }
    }

    /// `f_m`.
    pub fn component(&self, m: u64) -> FlatCode {
        match &*self.0 {
            Source::Tree(c) => match c.node() {
                Node::Union(cs, pad) => tree_to_flat(&BorelCode::union_child(cs, *pad, m)),
                _ => FlatCode(Arc::new(Source::Component(self.clone(), m))),
            },
            Source::Cup(gs) => gs[(m as usize).min(gs.len() - 1)].clone(),
            _ => FlatCode(Arc::new(Source::Component(self.clone(), m))),
        }
    }

    /// Number of union components that can differ from ∅ or from the last
    /// listed one, when the source certifies it.
    pub fn certified_width(&self) -> Option<u64> {
        match &*self.0 {
            Source::Tree(c) => match c.node() {
                Node::Union(cs, _) => Some(cs.len() as u64),
                _ => None,
            },
            Source::Cup(gs) => Some(gs.len() as u64),
            _ => None,
        }
    }

    fn padding(&self) -> Padding {
        match &*self.0 {
            Source::Tree(c) => match c.node() {
                Node::Union(_, p) => *p,
                _ => Padding::RepeatLast,
            },
            _ => Padding::RepeatLast,
        }
    }
}

fn tree_at(c: &BorelCode, n: u64) -> u64 {
    match c.node() {
        Node::Basic(sigma) => {
            if n == 0 {
                2 + sigma.index()
            } else {
                0
            }
        }
        Node::Compl(ch) => {
            if n == 0 {
                0
            } else {
                tree_at(ch, n - 1)
            }
        }
        Node::Union(cs, pad) => {
            if n == 0 {
                1
            } else {
                let (m, k) = unpair(n - 1);
                tree_at(&BorelCode::union_child(cs, *pad, m), k)
            }
        }
    }
}

pub fn tree_to_flat(c: &BorelCode) -> FlatCode {
    FlatCode(Arc::new(Source::Tree(c.clone())))
}

/// The flat complement: `g(0) = 0`, `g(m+1) = f(m)`.
pub fn neg_flat(f: &FlatCode) -> FlatCode {
    FlatCode(Arc::new(Source::Neg(f.clone())))
}

/// The flat union: `g(0) = 1`, `g(pair(m, k) + 1) = fs[m](k)`, repeating the
/// last code past the end of the list.
///
/// # Panics
/// On an empty list.
pub fn cup_flat(fs: &[FlatCode]) -> FlatCode {
    assert!(!fs.is_empty(), "cup of an empty list");
    FlatCode(Arc::new(Source::Cup(fs.to_vec())))
}

/// Membership for a flat code, unravelling it by its tags.
pub fn member_flat(f: &FlatCode, y: &impl BitOracle, b: &FlatBudget) -> Decision {
    match member_flat_at(f, y, b, b.depth) {
        Ok(d) => d,
        Err(_) => Decision::Unknown,
    }
}

fn member_flat_at(f: &FlatCode, y: &impl BitOracle, b: &FlatBudget, depth: u32) -> Result<Decision, FlatError> {
    if let Source::Tree(c) = &*f.0 {
        return Ok(Decision::from_bool(member(c, y)));
    }
    let tag = f.at(0, &b.eval)?;
    if tag >= 2 {
        return Ok(Decision::from_bool(extends_oracle(y, &str_index(tag - 2))));
    }
    if depth == 0 {
        return Err(FlatError::Depth);
    }
    if tag == 0 {
        return Ok(member_flat_at(&f.plus(), y, b, depth - 1)?.not());
    }
    let width = f.certified_width();
    let limit = width.unwrap_or(b.width);
    let mut unknown = false;
    for m in 0..limit {
        match member_flat_at(&f.component(m), y, b, depth - 1) {
            Ok(Decision::Yes) => return Ok(Decision::Yes),
            Ok(Decision::No) => {}
            Ok(Decision::Unknown) | Err(_) => unknown = true,
        }
    }
    Ok(if unknown || width.is_none() { Decision::Unknown } else { Decision::No })
}

/// Whether `f ∈ BC_α`, by the search: a basic tag is in every level; a
/// complement needs `f₊` in some lower level; a union needs every component
/// in some lower level.
pub fn check_rank_le(f: &FlatCode, alpha: &Ordinal, b: &FlatBudget) -> Decision {
    in_level(f, alpha, b, b.depth).unwrap_or(Decision::Unknown)
}

fn in_level(f: &FlatCode, alpha: &Ordinal, b: &FlatBudget, depth: u32) -> Result<Decision, FlatError> {
    let tag = f.at(0, &b.eval)?;
    if tag >= 2 {
        return Ok(Decision::Yes);
    }
    if alpha.is_zero() {
        return Ok(Decision::No);
    }
    if depth == 0 {
        return Err(FlatError::Depth);
    }
    if tag == 0 {
        return below_level(&f.plus(), alpha, b, depth - 1);
    }
    let width = f.certified_width();
    let limit = width.unwrap_or(b.width);
    let mut unknown = width.is_none();
    for m in 0..limit {
        match below_level(&f.component(m), alpha, b, depth - 1) {
            Ok(Decision::No) => return Ok(Decision::No),
            Ok(Decision::Yes) => {}
            Ok(Decision::Unknown) | Err(_) => unknown = true,
        }
    }
    if width.is_some() && f.padding() == Padding::Empty {
        match below_level(&tree_to_flat(&BorelCode::empty()), alpha, b, depth - 1)? {
            Decision::No => return Ok(Decision::No),
            Decision::Unknown => unknown = true,
            Decision::Yes => {}
        }
    }
    Ok(if unknown { Decision::Unknown } else { Decision::Yes })
}

/// Whether `f ∈ BC_β` for some `β < α`.
fn below_level(f: &FlatCode, alpha: &Ordinal, b: &FlatBudget, depth: u32) -> Result<Decision, FlatError> {
    if alpha.is_zero() {
        return Ok(Decision::No);
    }
    if let Some(p) = alpha.pred() {
        return in_level(f, &p, b, depth);
    }
    // a limit: every finite level lies below it, and trees have finite rank
    if f.is_tree_backed() {
        return Ok(Decision::Yes);
    }
    for n in 0..=depth as u64 {
        if let Ok(Decision::Yes) = in_level(f, &Ordinal::finite(n), b, depth) {
            return Ok(Decision::Yes);
        }
    }
    Ok(Decision::Unknown)
}

/// Rebuild a tree from a flat code, exploring at most `depth` nested
/// sub-codes and `width` union components.
pub fn flat_to_tree(f: &FlatCode, depth: u32, width: u64, b: &Budget) -> Result<BorelCode, FlatError> {
    if let Source::Tree(c) = &*f.0 {
        if c.depth() <= depth as usize {
            return Ok(c.clone());
        }
    }
    let tag = f.at(0, b)?;
    if tag >= 2 {
        return Ok(BorelCode::basic(str_index(tag - 2)));
    }
    if depth == 0 {
        return Err(FlatError::Depth);
    }
    if tag == 0 {
        return Ok(BorelCode::compl(flat_to_tree(&f.plus(), depth - 1, width, b)?));
    }
    match f.certified_width() {
        Some(w) if w <= width => {
            let children = (0..w).map(|m| flat_to_tree(&f.component(m), depth - 1, width, b)).collect::<Result<Vec<_>, _>>()?;
            Ok(BorelCode::union(children, f.padding()).expect("width is positive"))
        }
        _ => Err(FlatError::Width),
    }
}

impl fmt::Display for BorelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Basic(sigma) => write!(f, "(basic \"{sigma}\")"),
            Node::Compl(ch) => write!(f, "(compl {ch})"),
            Node::Union(cs, pad) => {
                let pad = match pad {
                    Padding::RepeatLast => "last",
                    Padding::Empty => "empty",
                };
                write!(f, "(union pad={pad}")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for BorelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

struct Parser<'s> {
    s: &'s str,
    i: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, BorelError> {
        Err(BorelError::Parse { at: self.i, msg: msg.into() })
    }

    fn ws(&mut self) {
        let rest = &self.s[self.i..];
        self.i += rest.len() - rest.trim_start().len();
    }

    fn expect(&mut self, tok: &str) -> Result<(), BorelError> {
        self.ws();
        if self.s[self.i..].starts_with(tok) {
            self.i += tok.len();
            Ok(())
        } else {
            self.err(format!("expected {tok:?}"))
        }
    }

    fn word(&mut self) -> String {
        self.ws();
        let start = self.i;
        let rest = &self.s[start..];
        let len = rest.find(|c: char| !(c.is_alphanumeric() || c == '=' || c == '_')).unwrap_or(rest.len());
        self.i += len;
        self.s[start..start + len].to_string()
    }

    fn code(&mut self) -> Result<BorelCode, BorelError> {
        self.expect("(")?;
        let code = match self.word().as_str() {
            "basic" => {
                self.expect("\"")?;
                let start = self.i;
                let Some(len) = self.s[start..].find('"') else {
                    return self.err("unterminated string");
                };
                self.i += len + 1;
                match self.s[start..start + len].parse::<BitString>() {
                    Ok(sigma) => BorelCode::basic(sigma),
                    Err(e) => return self.err(e.to_string()),
                }
            }
            "compl" => BorelCode::compl(self.code()?),
            "union" => {
                let pad = match self.word().as_str() {
                    "pad=empty" => Padding::Empty,
                    "pad=last" => Padding::RepeatLast,
                    _ => return self.err("expected pad=empty or pad=last"),
                };
                let mut children = Vec::new();
                loop {
                    self.ws();
                    if self.s[self.i..].starts_with(')') {
                        break;
                    }
                    children.push(self.code()?);
                }
                match BorelCode::union(children, pad) {
                    Ok(c) => c,
                    Err(e) => return self.err(e.to_string()),
                }
            }
            other => return self.err(format!("unknown form {other:?}")),
        };
        self.expect(")")?;
        Ok(code)
    }
}

impl FromStr for BorelCode {
    type Err = BorelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { s, i: 0 };
        let c = p.code()?;
        p.ws();
        if p.i != s.len() {
            return p.err("trailing input");
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::Asm;

    fn code(s: &str) -> BorelCode {
        s.parse().unwrap()
    }

    fn seq(s: &str) -> InfiniteBitSeq {
        s.parse().unwrap()
    }

    fn basic(s: &str) -> BorelCode {
        BorelCode::basic(s.parse().unwrap())
    }

    #[test]
    fn member_examples() {
        assert!(member(&basic("0"), &seq("|c:0")));
        assert!(!member(&neg(&basic("0")), &seq("|c:0")));
        let u = code(r#"(union pad=empty (basic "11") (basic "00"))"#);
        assert!(!member(&u, &seq("|p:01")));
        assert!(member(&neg(&basic("0")), &seq("|c:1")));
        assert!(member(&cup(&[basic("0"), basic("1")]), &seq("10|c:0")));
        assert!(member(&cap(&[basic("0"), basic("01")]), &seq("|p:01")));
    }

    #[test]
    fn empty_code() {
        let e = BorelCode::empty();
        for sigma in BitString::all_up_to(4) {
            assert!(!member(&e, &InfiniteBitSeq::constant(sigma, false)));
        }
        assert_eq!(rank_nat(&e), 3);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&basic("0110")), Ordinal::zero());
        assert_eq!(rank(&neg(&basic("1"))), Ordinal::one());
        assert_eq!(rank(&cup(&[basic("0"), neg(&basic("1"))])), Ordinal::finite(2));
        assert_eq!(rank_nat(&code(r#"(union pad=empty (basic "1"))"#)), 4);
    }

    #[test]
    fn flat_layout() {
        let b0 = tree_to_flat(&basic("0"));
        let budget = Budget::default();
        assert_eq!(b0.at(0, &budget).unwrap(), 2 + 1);
        assert_eq!(b0.at(3, &budget).unwrap(), 0);
        let f = tree_to_flat(&code(r#"(union pad=last (basic "1") (compl (basic "01")))"#));
        assert_eq!(f.at(0, &budget).unwrap(), 1);
        // f(pair(1, 0) + 1) is the complement tag of child 1
        assert_eq!(f.at(pair(1, 0) + 1, &budget).unwrap(), 0);
        assert_eq!(f.at(pair(1, 1) + 1, &budget).unwrap(), 2 + 4);
        // past the list, the last child repeats
        assert_eq!(f.at(pair(5, 1) + 1, &budget).unwrap(), 2 + 4);
        let g = neg_flat(&f);
        assert_eq!(g.at(0, &budget).unwrap(), 0);
        assert_eq!(g.at(5, &budget).unwrap(), f.at(4, &budget).unwrap());
        let h = cup_flat(&[b0.clone(), g.clone()]);
        assert_eq!(h.at(0, &budget).unwrap(), 1);
        assert_eq!(h.at(pair(1, 4) + 1, &budget).unwrap(), g.at(4, &budget).unwrap());
    }

    #[test]
    fn member_flat_on_trees_and_derived_codes() {
        let b = FlatBudget::default();
        assert_eq!(member_flat(&tree_to_flat(&basic("1")), &seq("|c:1"), &b), Decision::Yes);
        // wrap in Func so the tag-driven path is taken
        let c = code(r#"(compl (union pad=empty (basic "11") (compl (basic "0"))))"#);
        let flat = tree_to_flat(&c);
        let opaque = FlatCode::from_fn(move |n| flat.at(n, &Budget::default()).unwrap());
        for sigma in BitString::all_up_to(3) {
            let y = InfiniteBitSeq::constant(sigma, true);
            let expected = Decision::from_bool(member(&c, &y));
            assert_eq!(member_flat(&tree_to_flat(&c), &y, &b), expected);
            assert_eq!(member_flat(&neg_flat(&neg_flat(&tree_to_flat(&c))), &y, &b), expected);
            // an opaque union cannot certify Out
            let got = member_flat(&opaque, &y, &b);
            assert!(got == expected || (got == Decision::Unknown && expected == Decision::Yes));
        }
    }

    /// f(0) = 1; component m is the cylinder of str_index(m).
    fn all_cylinders_program() -> Library {
        let mut a = Asm::new();
        let (m, k, t, one) = (a.reg(), a.reg(), a.reg(), a.reg());
        let tagged = a.label();
        a.jnz(Asm::INPUT, tagged);
        a.ret_const(1);
        a.bind(tagged);
        a.copy(t, Asm::INPUT);
        a.dec(t);
        a.unpair(m, k, t);
        let first = a.label();
        a.jz(k, first);
        a.ret_const(0);
        a.bind(first);
        a.set(one, 2);
        a.add(m, one);
        a.ret(m);
        let mut lib = Library::new();
        lib.push("cylinders", a.finish_with_bound(None).unwrap());
        lib
    }

    #[test]
    fn machine_backed_code() {
        let mc = MachineCode { lib: Arc::new(all_cylinders_program()), prog: 0, x: InfiniteBitSeq::zeros() };
        let f = FlatCode::machine(mc);
        let b = FlatBudget { width: 4, ..FlatBudget::default() };
        // str_index(3) = "00"
        assert_eq!(member_flat(&f, &seq("|c:0"), &b), Decision::Yes);
        assert_eq!(str_index(3).to_string(), "00");
        assert_eq!(f.component(3).at(0, &b.eval).unwrap(), 2 + 3);
        assert_eq!(flat_to_tree(&f, 4, 8, &b.eval), Err(FlatError::Width));
        // no finite search refutes membership in an opaque union
        let elevens = FlatCode::from_fn(|n| if n == 0 { 1 } else if unpair(n - 1).1 == 0 { 2 + 6 } else { 0 });
        assert_eq!(member_flat(&elevens, &seq("|c:1"), &b), Decision::Yes);
        assert_eq!(member_flat(&elevens, &seq("|c:0"), &b), Decision::Unknown);
    }

    #[test]
    fn check_rank_examples() {
        let b = FlatBudget::default();
        let nb = tree_to_flat(&neg(&basic("01")));
        assert_eq!(check_rank_le(&tree_to_flat(&basic("0")), &Ordinal::zero(), &b), Decision::Yes);
        assert_eq!(check_rank_le(&nb, &Ordinal::zero(), &b), Decision::No);
        assert_eq!(check_rank_le(&nb, &Ordinal::one(), &b), Decision::Yes);
        assert_eq!(check_rank_le(&nb, &Ordinal::omega(), &b), Decision::Yes);
        let deep = tree_to_flat(&neg(&cup(&[basic("1"), BorelCode::empty()])));
        assert_eq!(check_rank_le(&deep, &Ordinal::finite(4), &b), Decision::No);
        assert_eq!(check_rank_le(&deep, &Ordinal::finite(5), &b), Decision::Yes);
    }

    #[test]
    fn flat_round_trip() {
        let b = Budget::default();
        for text in [r#"(basic "01")"#, r#"(compl (union pad=last (basic "0") (basic "10")))"#] {
            let c = code(text);
            let back = flat_to_tree(&cup_flat(&[tree_to_flat(&c)]).component(0), 4, 4, &b).unwrap();
            assert_eq!(back, c);
            let opaque_src = tree_to_flat(&c);
            let opaque = neg_flat(&neg_flat(&opaque_src));
            let rebuilt = flat_to_tree(&opaque, 6, 4, &b).unwrap();
            for sigma in BitString::all_up_to(3) {
                let y = InfiniteBitSeq::constant(sigma, false);
                assert_eq!(member(&rebuilt, &y), member(&c, &y));
            }
        }
    }

    #[test]
    fn text_round_trip() {
        for s in [
            r#"(basic "")"#,
            r#"(basic "0110")"#,
            r#"(union pad=empty (basic "11") (compl (basic "0")))"#,
            r#"(union pad=last (basic "1"))"#,
        ] {
            assert_eq!(code(s).to_string(), s);
        }
        assert!(r#"(union pad=last)"#.parse::<BorelCode>().is_err());
        assert!(r#"(basic "012")"#.parse::<BorelCode>().is_err());
        assert!(r#"(basic "01""#.parse::<BorelCode>().is_err());
        assert!(r#"(frob)"#.parse::<BorelCode>().is_err());
    }
}
