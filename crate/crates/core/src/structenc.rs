//! Encodings of countable structures as oracles, isomorphic copies by
//! permutation, and sampling harnesses for computing one structure from
//! every presentation of another.
//!
//! Elements are naturals; symbol 0 of every language is the domain
//! predicate, so a finite structure sits inside ℕ. A function symbol is
//! encoded by its graph, a constant being a 0-ary function. The atom
//! `(sym, ā)` of a language with `S` slots (domain predicate included) sits
//! at bit `S·⟨ā⟩ + sym`, where `⟨ā⟩` is the iterated Cantor pairing
//! `⟨a⟩ = a`, `⟨a, b̄⟩ = pair(a, ⟨b̄⟩)`; every 0-ary atom has code 0.
//!
//! The harnesses quantify over finitely many sampled presentations, so a
//! clean report is evidence, not proof.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::coding::{pair, unpair, BitOracle, BitString, InfiniteBitSeq};
use crate::exec::Exec;
use crate::feedback::{Budget, Evaluator, Verdict};
use crate::machine::Library;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Relation,
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
}

impl Symbol {
    pub fn relation(name: &str, arity: usize) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Relation, arity }
    }

    pub fn function(name: &str, arity: usize) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Function, arity }
    }

    pub fn constant(name: &str) -> Self {
        Self::function(name, 0)
    }

    /// Arity of the encoded relation: functions add the value place.
    pub fn graph_arity(&self) -> usize {
        match self.kind {
            SymbolKind::Relation => self.arity,
            SymbolKind::Function => self.arity + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("duplicate symbol {0}")]
    Duplicate(String),
    #[error("relation {0} must have positive arity")]
    NullaryRelation(String),
}

/// Symbols in slot order; slot 0 is the domain predicate and symbol `i`
/// occupies slot `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Language {
    symbols: Vec<Symbol>,
}

impl Language {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, LanguageError> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s.name.as_str()) || s.name == "dom" {
                return Err(LanguageError::Duplicate(s.name.clone()));
            }
            if s.kind == SymbolKind::Relation && s.arity == 0 {
                return Err(LanguageError::NullaryRelation(s.name.clone()));
            }
        }
        Ok(Language { symbols })
    }

    /// A binary order relation followed by one constant.
    pub fn order_constant() -> Self {
        Language::new(vec![Symbol::relation("lt", 2), Symbol::constant("c")]).unwrap()
    }

    /// `mul` and the identity `e`.
    pub fn group() -> Self {
        Language::new(vec![Symbol::function("mul", 2), Symbol::constant("e")]).unwrap()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Slots per tuple code.
    pub fn width(&self) -> u64 {
        self.symbols.len() as u64 + 1
    }

    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name).map(|i| i + 1)
    }

    /// Arity of the encoded relation in `slot`.
    pub fn slot_arity(&self, slot: usize) -> usize {
        if slot == 0 {
            1
        } else {
            self.symbols[slot - 1].graph_arity()
        }
    }

    pub fn slot_name(&self, slot: usize) -> &str {
        if slot == 0 {
            "dom"
        } else {
            &self.symbols[slot - 1].name
        }
    }

    /// Every symbol of `self` occurs in `other` with the same kind and arity.
    pub fn is_sublanguage_of(&self, other: &Language) -> bool {
        self.symbols.iter().all(|s| other.symbols.contains(s))
    }

    pub fn with(&self, extra: Symbol) -> Result<Self, LanguageError> {
        let mut symbols = self.symbols.clone();
        symbols.push(extra);
        Language::new(symbols)
    }
}

pub fn tuple_code(args: &[u64]) -> u64 {
    match args {
        [] => 0,
        [a] => *a,
        [a, rest @ ..] => pair(*a, tuple_code(rest)),
    }
}

/// The `k`-tuple with code `code`; only code 0 names the empty tuple.
pub fn tuple_decode(code: u64, k: usize) -> Option<Vec<u64>> {
    match k {
        0 => (code == 0).then(Vec::new),
        1 => Some(vec![code]),
        _ => {
            let (a, rest) = unpair(code);
            let mut out = vec![a];
            out.extend(tuple_decode(rest, k - 1)?);
            Some(out)
        }
    }
}

pub fn atom_index(lang: &Language, slot: usize, args: &[u64]) -> u64 {
    debug_assert_eq!(args.len(), lang.slot_arity(slot));
    lang.width() * tuple_code(args) + slot as u64
}

/// The slot and tuple at `index`, or `None` for codes naming no tuple.
pub fn atom_at(lang: &Language, index: u64) -> (usize, Option<Vec<u64>>) {
    let slot = (index % lang.width()) as usize;
    (slot, tuple_decode(index / lang.width(), lang.slot_arity(slot)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("not a bijection on its support: {0}")]
    NotBijective(String),
    #[error("bad cycle notation at {at}: {msg}")]
    Parse { at: usize, msg: String },
}

/// A permutation of ℕ moving finitely many points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Permutation {
    fwd: BTreeMap<u64, u64>,
}

impl Permutation {
    pub fn identity() -> Self {
        Permutation::default()
    }

    pub fn from_map(map: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, PermutationError> {
        let fwd: BTreeMap<u64, u64> = map.into_iter().filter(|(a, b)| a != b).collect();
        let image: BTreeSet<u64> = fwd.values().copied().collect();
        let domain: BTreeSet<u64> = fwd.keys().copied().collect();
        if image != domain || image.len() != fwd.len() {
            return Err(PermutationError::NotBijective(format!("{fwd:?}")));
        }
        Ok(Permutation { fwd })
    }

    pub fn swap(a: u64, b: u64) -> Self {
        Self::from_map([(a, b), (b, a)]).unwrap()
    }

    pub fn from_cycles(cycles: &[Vec<u64>]) -> Result<Self, PermutationError> {
        let mut map = BTreeMap::new();
        for c in cycles {
            for (i, &a) in c.iter().enumerate() {
                if map.insert(a, c[(i + 1) % c.len()]).is_some() {
                    return Err(PermutationError::NotBijective(format!("{a} occurs twice")));
                }
            }
        }
        Self::from_map(map)
    }

    /// The permutation of `0..n` sending `i` to `image[i]`.
    pub fn from_images(image: &[u64]) -> Result<Self, PermutationError> {
        Self::from_map(image.iter().enumerate().map(|(i, &b)| (i as u64, b)))
    }

    pub fn apply(&self, a: u64) -> u64 {
        self.fwd.get(&a).copied().unwrap_or(a)
    }

    pub fn inverse(&self) -> Self {
        Permutation { fwd: self.fwd.iter().map(|(&a, &b)| (b, a)).collect() }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Permutation) -> Self {
        let points: BTreeSet<u64> = self.fwd.keys().chain(other.fwd.keys()).copied().collect();
        Self::from_map(points.into_iter().map(|a| (a, self.apply(other.apply(a))))).unwrap()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.fwd.keys().copied()
    }

    pub fn is_identity(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn cycles(&self) -> Vec<Vec<u64>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &a in self.fwd.keys() {
            if seen.contains(&a) {
                continue;
            }
            let mut c = vec![a];
            seen.insert(a);
            let mut b = self.apply(a);
            while b != a {
                seen.insert(b);
                c.push(b);
                b = self.apply(b);
            }
            out.push(c);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("()");
        }
        for c in self.cycles() {
            let parts: Vec<String> = c.iter().map(u64::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermutationError;

    /// Cycle notation such as `(0 9)(1 2 3)`; `()` and `id` are the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "id" {
            return Ok(Self::identity());
        }
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let at = s.len() - rest.len();
            let err = |msg: &str| PermutationError::Parse { at, msg: msg.into() };
            let body = rest.strip_prefix('(').ok_or_else(|| err("expected ("))?;
            let close = body.find(')').ok_or_else(|| err("unclosed cycle"))?;
            let c = body[..close]
                .split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u64>().map_err(|_| err("expected a natural")))
                .collect::<Result<Vec<_>, _>>()?;
            if !c.is_empty() {
                cycles.push(c);
            }
            rest = body[close + 1..].trim_start();
        }
        Self::from_cycles(&cycles)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interp {
    Relation(BTreeSet<Vec<u64>>),
    Function(BTreeMap<Vec<u64>, u64>),
}

#[derive(Debug)]
enum Source {
    Table { domain: BTreeSet<u64>, interps: Vec<Interp> },
    /// `(ℕ, <)` with the listed constants.
    Order { constants: Vec<u64> },
    Permuted { base: Presentation, perm: Permutation },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("symbol {symbol}: {msg}")]
    Symbol { symbol: String, msg: String },
    #[error("element {0} is outside the domain")]
    OutsideDomain(u64),
    #[error("{0} interpretations for {1} symbols")]
    Count(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    Permutation(#[from] PermutationError),
}

/// A structure with universe inside ℕ and a decidable atomic diagram.
#[derive(Clone, Debug)]
pub struct Presentation {
    lang: Language,
    src: Arc<Source>,
}

impl Presentation {
    /// A finite structure from tables. Functions may be partial here;
    /// [`encode`] reports the first missing value.
    pub fn table(lang: Language, domain: BTreeSet<u64>, interps: Vec<Interp>) -> Result<Self, PresentationError> {
        if interps.len() != lang.symbols.len() {
            return Err(PresentationError::Count(interps.len(), lang.symbols.len()));
        }
        for (s, i) in lang.symbols.iter().zip(&interps) {
            let bad = |msg: &str| PresentationError::Symbol { symbol: s.name.clone(), msg: msg.into() };
            let check = |args: &Vec<u64>| -> Result<(), PresentationError> {
                if args.len() != s.arity {
                    return Err(bad("wrong arity"));
                }
                match args.iter().find(|a| !domain.contains(a)) {
                    Some(&a) => Err(PresentationError::OutsideDomain(a)),
                    None => Ok(()),
                }
            };
            match (s.kind, i) {
                (SymbolKind::Relation, Interp::Relation(tuples)) => tuples.iter().try_for_each(check)?,
                (SymbolKind::Function, Interp::Function(map)) => {
                    for (args, v) in map {
                        check(args)?;
                        if !domain.contains(v) {
                            return Err(PresentationError::OutsideDomain(*v));
                        }
                    }
                }
                _ => return Err(bad("interpretation does not match the symbol kind")),
            }
        }
        Ok(Presentation { lang, src: Arc::new(Source::Table { domain, interps }) })
    }

    /// `(ℕ, <, c₁, …)` in the language `lt` followed by the named constants.
    pub fn nat_order(constants: &[(&str, u64)]) -> Self {
        let mut symbols = vec![Symbol::relation("lt", 2)];
        symbols.extend(constants.iter().map(|(n, _)| Symbol::constant(n)));
        Presentation {
            lang: Language::new(symbols).expect("distinct constant names"),
            src: Arc::new(Source::Order { constants: constants.iter().map(|c| c.1).collect() }),
        }
    }

    /// `(ℕ, <, n)` in [`Language::order_constant`].
    pub fn omega_with(n: u64) -> Self {
        Self::nat_order(&[("c", n)])
    }

    pub fn language(&self) -> &Language {
        &self.lang
    }

    /// The copy moved along `π`: `a ↦ π(a)` is an isomorphism onto it.
    pub fn permute(&self, perm: &Permutation) -> Presentation {
        if perm.is_identity() {
            return self.clone();
        }
        if let Source::Permuted { base, perm: inner } = &*self.src {
            return base.permute(&perm.compose(inner));
        }
        Presentation { lang: self.lang.clone(), src: Arc::new(Source::Permuted { base: self.clone(), perm: perm.clone() }) }
    }

    pub fn in_domain(&self, a: u64) -> bool {
        match &*self.src {
            Source::Table { domain, .. } => domain.contains(&a),
            Source::Order { .. } => true,
            Source::Permuted { base, perm } => base.in_domain(perm.inverse().apply(a)),
        }
    }

    /// The finite domain, when it is finite.
    pub fn finite_domain(&self) -> Option<BTreeSet<u64>> {
        match &*self.src {
            Source::Table { domain, .. } => Some(domain.clone()),
            Source::Order { .. } => None,
            Source::Permuted { base, perm } => Some(base.finite_domain()?.into_iter().map(|a| perm.apply(a)).collect()),
        }
    }

    /// Truth of relation symbol `i` (0-based) on domain elements.
    pub fn holds(&self, i: usize, args: &[u64]) -> bool {
        match &*self.src {
            Source::Table { interps, .. } => match &interps[i] {
                Interp::Relation(t) => t.contains(args),
                Interp::Function(_) => panic!("{} is a function", self.lang.symbols[i].name),
            },
            Source::Order { .. } => {
                assert_eq!(i, 0, "only lt is a relation");
                args[0] < args[1]
            }
            Source::Permuted { base, perm } => {
                let inv = perm.inverse();
                base.holds(i, &args.iter().map(|&a| inv.apply(a)).collect::<Vec<_>>())
            }
        }
    }

    /// Value of function symbol `i` (0-based), `None` where undefined.
    pub fn value(&self, i: usize, args: &[u64]) -> Option<u64> {
        match &*self.src {
            Source::Table { interps, .. } => match &interps[i] {
                Interp::Function(m) => m.get(args).copied(),
                Interp::Relation(_) => panic!("{} is a relation", self.lang.symbols[i].name),
            },
            Source::Order { constants } => Some(constants[i - 1]),
            Source::Permuted { base, perm } => {
                let inv = perm.inverse();
                base.value(i, &args.iter().map(|&a| inv.apply(a)).collect::<Vec<_>>()).map(|v| perm.apply(v))
            }
        }
    }

    /// The atom `(slot, args)`; `Err` when a function value is missing.
    pub fn atom(&self, slot: usize, args: &[u64]) -> Result<bool, EncodeError> {
        if slot == 0 {
            return Ok(self.in_domain(args[0]));
        }
        if !args.iter().all(|&a| self.in_domain(a)) {
            return Ok(false);
        }
        let i = slot - 1;
        let s = &self.lang.symbols[i];
        match s.kind {
            SymbolKind::Relation => Ok(self.holds(i, args)),
            SymbolKind::Function => {
                let (ins, out) = args.split_at(s.arity);
                match self.value(i, ins) {
                    Some(v) => Ok(v == out[0]),
                    None => Err(EncodeError::Partial {
                        symbol: s.name.clone(),
                        args: ins.to_vec(),
                        index: atom_index(&self.lang, slot, &[ins, &[0]].concat()),
                    }),
                }
            }
        }
    }

    /// Two presentations agree on every atom over `elements` in the
    /// symbols of `lang`.
    pub fn agrees_on(&self, other: &Presentation, lang: &Language, elements: &[u64]) -> Result<bool, EncodeError> {
        for slot in 0..lang.width() as usize {
            let name = lang.slot_name(slot);
            let (a, b) = (self.lang.slot_of(name).unwrap_or(0), other.lang.slot_of(name).unwrap_or(0));
            for args in tuples(elements, lang.slot_arity(slot)) {
                if self.atom(a, &args)? != other.atom(b, &args)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &*self.src {
            Source::Order { constants } => {
                out.push_str("scheme order\n");
                for (s, c) in self.lang.symbols[1..].iter().zip(constants) {
                    out.push_str(&format!("constant {}\n{} = {}\n", s.name, s.name, c));
                }
            }
            Source::Permuted { base, perm } => {
                out.push_str(&base.to_text());
                out.push_str(&format!("permute {perm}\n"));
            }
            Source::Table { domain, interps } => {
                for s in &self.lang.symbols {
                    match (s.kind, s.arity) {
                        (SymbolKind::Function, 0) => out.push_str(&format!("constant {}\n", s.name)),
                        (SymbolKind::Function, k) => out.push_str(&format!("function {} {}\n", s.name, k)),
                        (SymbolKind::Relation, k) => out.push_str(&format!("relation {} {}\n", s.name, k)),
                    }
                }
                let d: Vec<String> = domain.iter().map(u64::to_string).collect();
                out.push_str(&format!("domain {}\n", d.join(" ")));
                let join = |args: &[u64]| args.iter().map(|a| format!(" {a}")).collect::<String>();
                for (s, i) in self.lang.symbols.iter().zip(interps) {
                    match i {
                        Interp::Relation(t) => t.iter().for_each(|args| out.push_str(&format!("{}{}\n", s.name, join(args)))),
                        Interp::Function(m) => m.iter().for_each(|(args, v)| out.push_str(&format!("{}{} = {}\n", s.name, join(args), v))),
                    }
                }
            }
        }
        out
    }
}

impl FromStr for Presentation {
    type Err = PresentationError;

    /// Declarations `relation R k`, `function f k`, `constant c`, a
    /// `domain …` line and facts `R a b`, `f a b = v`, `c = v`; or
    /// `scheme order` with constants. A final `permute CYCLES` moves the
    /// result. `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut symbols: Vec<Symbol> = Vec::new();
        let mut domain: Option<BTreeSet<u64>> = None;
        let mut scheme = false;
        let mut facts: Vec<(usize, String, Vec<u64>, Option<u64>)> = Vec::new();
        let mut perm = Permutation::identity();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| PresentationError::Parse { line, msg: msg.into() };
            let l = raw.split('#').next().unwrap().trim();
            if l.is_empty() {
                continue;
            }
            let words: Vec<&str> = l.split_whitespace().collect();
            let nat = |w: &str| w.parse::<u64>().map_err(|_| err(&format!("expected a natural, got {w:?}")));
            match words[0] {
                "scheme" if words.get(1) == Some(&"order") => scheme = true,
                "scheme" => return Err(err("the only scheme is order")),
                "permute" => perm = l["permute".len()..].parse()?,
                "relation" | "function" if words.len() == 3 => {
                    let k = nat(words[2])? as usize;
                    symbols.push(if words[0] == "relation" { Symbol::relation(words[1], k) } else { Symbol::function(words[1], k) });
                }
                "constant" if words.len() == 2 => symbols.push(Symbol::constant(words[1])),
                "domain" => domain = Some(words[1..].iter().map(|w| nat(w)).collect::<Result<_, _>>()?),
                name => {
                    let (args, value) = match words.iter().position(|w| *w == "=") {
                        Some(p) if p + 2 == words.len() => (&words[1..p], Some(nat(words[p + 1])?)),
                        Some(_) => return Err(err("expected one value after =")),
                        None => (&words[1..], None),
                    };
                    let args = args.iter().map(|w| nat(w)).collect::<Result<Vec<_>, _>>()?;
                    facts.push((line, name.to_string(), args, value));
                }
            }
        }
        let base = if scheme {
            let mut constants = Vec::new();
            for s in &symbols {
                if s.kind != SymbolKind::Function || s.arity != 0 {
                    return Err(PresentationError::Symbol { symbol: s.name.clone(), msg: "the order scheme takes constants only".into() });
                }
                let v = facts.iter().find(|f| f.1 == s.name).and_then(|f| f.3);
                let v = v.ok_or_else(|| PresentationError::Symbol { symbol: s.name.clone(), msg: "no value".into() })?;
                constants.push((s.name.as_str(), v));
            }
            Presentation::nat_order(&constants)
        } else {
            let lang = Language::new(symbols)?;
            let mut interps: Vec<Interp> = lang
                .symbols
                .iter()
                .map(|s| match s.kind {
                    SymbolKind::Relation => Interp::Relation(BTreeSet::new()),
                    SymbolKind::Function => Interp::Function(BTreeMap::new()),
                })
                .collect();
            for (line, name, args, value) in facts {
                let err = |msg: &str| PresentationError::Parse { line, msg: msg.into() };
                let i = lang.slot_of(&name).ok_or_else(|| err(&format!("unknown symbol {name}")))? - 1;
                match (&mut interps[i], value) {
                    (Interp::Relation(t), None) => {
                        t.insert(args);
                    }
                    (Interp::Function(m), Some(v)) => {
                        if m.insert(args, v).is_some_and(|old| old != v) {
                            return Err(err("two values for one argument tuple"));
                        }
                    }
                    _ => return Err(err("fact does not match the symbol kind")),
                }
            }
            Presentation::table(lang, domain.unwrap_or_default(), interps)?
        };
        Ok(base.permute(&perm))
    }
}

/// All `k`-tuples over `elements` in lexicographic order.
pub fn tuples(elements: &[u64], k: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.iter().flat_map(|t| elements.iter().map(move |&a| [t.as_slice(), &[a]].concat())).collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("{symbol} is undefined at {args:?} (bit {index})")]
    Partial { symbol: String, args: Vec<u64>, index: u64 },
}

/// The atomic diagram of a presentation as a bit stream.
#[derive(Clone, Debug)]
pub struct EncodedOracle {
    p: Presentation,
}

/// The encoding of `p`, after checking that its functions are total.
pub fn encode(p: &Presentation) -> Result<EncodedOracle, EncodeError> {
    if let Some(domain) = p.finite_domain() {
        let elements: Vec<u64> = domain.into_iter().collect();
        for (i, s) in p.lang.symbols.iter().enumerate() {
            if s.kind == SymbolKind::Function {
                for args in tuples(&elements, s.arity) {
                    p.atom(i + 1, &[args.as_slice(), &[0]].concat())?;
                }
            }
        }
    }
    Ok(EncodedOracle { p: p.clone() })
}

impl EncodedOracle {
    pub fn presentation(&self) -> &Presentation {
        &self.p
    }

    pub fn prefix(&self, len: u64) -> BitString {
        BitString::from_bits((0..len).map(|k| self.bit(k)))
    }
}

impl BitOracle for EncodedOracle {
    fn bit(&self, k: u64) -> bool {
        match atom_at(&self.p.lang, k) {
            (slot, Some(args)) => self.p.atom(slot, &args).expect("functions checked total by encode"),
            (_, None) => false,
        }
    }
}

/// The two-sorted product with `(ω, <, n)`: even bits carry the structure,
/// odd bits the encoding of [`Presentation::omega_with`]`(n)`.
#[derive(Clone, Debug)]
pub struct ProductOracle {
    left: EncodedOracle,
    right: EncodedOracle,
}

pub fn product_with_nat(p: &Presentation, n: u64) -> Result<ProductOracle, EncodeError> {
    Ok(ProductOracle { left: encode(p)?, right: encode(&Presentation::omega_with(n))? })
}

impl BitOracle for ProductOracle {
    fn bit(&self, k: u64) -> bool {
        if k.is_multiple_of(2) {
            self.left.bit(k / 2)
        } else {
            self.right.bit(k / 2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("expected a binary relation followed by a constant")]
    WrongLanguage,
    #[error("no constant below {0}")]
    MissingConstant(u64),
    #[error("constant has two values, {0} and {1}")]
    AmbiguousConstant(u64, u64),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// The number of predecessors of `c` in `(W, ⊲, c)`, reading atoms through
/// `bit` in [`Language::order_constant`] layout and looking at elements
/// below `window`.
pub fn decode_omega_bits<E>(window: u64, mut bit: impl FnMut(u64) -> Result<bool, E>) -> Result<Result<u64, DecodeError>, E> {
    let lang = Language::order_constant();
    let mut c = None;
    for a in 0..window {
        if bit(atom_index(&lang, 2, &[a]))? && bit(atom_index(&lang, 0, &[a]))? {
            if let Some(old) = c {
                return Ok(Err(DecodeError::AmbiguousConstant(old, a)));
            }
            c = Some(a);
        }
    }
    let Some(c) = c else { return Ok(Err(DecodeError::MissingConstant(window))) };
    let mut n = 0;
    for b in 0..window {
        if bit(atom_index(&lang, 0, &[b]))? && bit(atom_index(&lang, 1, &[b, c]))? {
            n += 1;
        }
    }
    Ok(Ok(n))
}

/// Which natural number the constant of `(W, ⊲, c)` represents.
pub fn decode_omega_constant(p: &Presentation, window: u64) -> Result<u64, DecodeError> {
    let shape = p.lang.symbols.iter().map(|s| (s.kind, s.arity)).collect::<Vec<_>>();
    if shape != [(SymbolKind::Relation, 2), (SymbolKind::Function, 0)] {
        return Err(DecodeError::WrongLanguage);
    }
    let x = encode(p)?;
    decode_omega_bits(window, |k| Ok::<_, DecodeError>(x.bit(k)))?
}

/// A program's output point rejected by the harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OutputError {
    #[error("output bit {index} is undetermined at budget ({kind})")]
    Unknown { index: u64, kind: String },
    #[error("output bit {index} is undefined ({kind})")]
    Undefined { index: u64, kind: String },
    #[error("output bit {index} has value {value}")]
    NotBit { index: u64, value: u64 },
}

impl OutputError {
    pub fn is_unknown(&self) -> bool {
        matches!(self, OutputError::Unknown { .. })
    }
}

/// The output stream `n ↦ ⟨e⟩^X(n)`, evaluated on demand with one shared
/// memo.
pub struct OutputStream<'a, X: BitOracle> {
    ev: Evaluator<'a, X, InfiniteBitSeq>,
    e: u64,
    cache: HashMap<u64, Result<bool, OutputError>>,
}

impl<'a, X: BitOracle> OutputStream<'a, X> {
    pub fn new(lib: &'a Library, e: u64, x: &'a X, zeros: &'a InfiniteBitSeq, budget: Budget) -> Self {
        OutputStream { ev: Evaluator::new(lib, x, zeros, budget).with_memo(), e, cache: HashMap::new() }
    }

    pub fn bit(&mut self, index: u64) -> Result<bool, OutputError> {
        if let Some(r) = self.cache.get(&index) {
            return r.clone();
        }
        let r = match self.ev.eval(self.e, index).0 {
            Verdict::Converges { value: v @ (0 | 1), .. } => Ok(v == 1),
            Verdict::Converges { value, .. } => Err(OutputError::NotBit { index, value }),
            Verdict::Unknown(k) => Err(OutputError::Unknown { index, kind: k.to_string() }),
            v => Err(OutputError::Undefined { index, kind: v.kind().to_string() }),
        };
        self.cache.insert(index, r.clone());
        r
    }
}

fn zeros() -> InfiniteBitSeq {
    InfiniteBitSeq::zeros()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NatError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Output(OutputError),
    #[error("output is not an encoded (W, <, c): {0}")]
    Protocol(DecodeError),
}

/// `⟨e⟩^M(n)`: run `e` on the product of `p` with `(ω, <, n)` and read its
/// output as an encoded `(W, ⊲, c)`, looking at elements below `window`.
pub fn feedback_nat(lib: &Library, e: u64, p: &Presentation, n: u64, window: u64, budget: Budget) -> Result<u64, NatError> {
    let x = product_with_nat(p, n)?;
    let z = zeros();
    let mut out = OutputStream::new(lib, e, &x, &z, budget);
    decode_omega_bits(window, |k| out.bit(k)).map_err(NatError::Output)?.map_err(NatError::Protocol)
}

/// A graph of the source and the matching graph of the target.
type GraphPair<'a> = (&'a BTreeSet<Vec<u64>>, &'a BTreeSet<Vec<u64>>);

/// A finite structure read off a bit stream: its domain below a window and
/// every encoded relation over that domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    pub lang: Language,
    pub domain: Vec<u64>,
    /// Per symbol, the tuples of its graph.
    pub graphs: Vec<BTreeSet<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("{symbol} at {args:?} has {count} values in the domain")]
    NotAFunction { symbol: String, args: Vec<u64>, count: usize },
}

pub fn read_finite<E: Into<ReadError>>(lang: &Language, window: u64, mut bit: impl FnMut(u64) -> Result<bool, E>) -> Result<FiniteStructure, ReadError> {
    let mut domain = Vec::new();
    for a in 0..window {
        if bit(atom_index(lang, 0, &[a])).map_err(Into::into)? {
            domain.push(a);
        }
    }
    let mut graphs = Vec::new();
    for (i, s) in lang.symbols.iter().enumerate() {
        let mut g = BTreeSet::new();
        for args in tuples(&domain, s.arity) {
            let mut count = 0;
            let outs: Vec<Vec<u64>> = match s.kind {
                SymbolKind::Relation => vec![args.clone()],
                SymbolKind::Function => domain.iter().map(|&v| [args.as_slice(), &[v]].concat()).collect(),
            };
            for t in outs {
                if bit(atom_index(lang, i + 1, &t)).map_err(Into::into)? {
                    count += 1;
                    g.insert(t);
                }
            }
            if s.kind == SymbolKind::Function && count != 1 {
                return Err(ReadError::NotAFunction { symbol: s.name.clone(), args, count });
            }
        }
        graphs.push(g);
    }
    Ok(FiniteStructure { lang: lang.clone(), domain, graphs })
}

impl FiniteStructure {
    pub fn of(p: &Presentation, window: u64) -> Result<Self, ReadError> {
        let x = encode(p)?;
        read_finite(&p.lang, window, |k| Ok::<_, ReadError>(x.bit(k)))
    }

    /// Search for an isomorphism onto `other`, matching symbols by name.
    pub fn isomorphism_to(&self, other: &FiniteStructure) -> Option<BTreeMap<u64, u64>> {
        if self.domain.len() != other.domain.len() || self.lang.symbols.len() != other.lang.symbols.len() {
            return None;
        }
        let mut pairs = Vec::new();
        for (s, g) in self.lang.symbols.iter().zip(&self.graphs) {
            let j = other.lang.slot_of(&s.name)? - 1;
            if other.lang.symbols[j] != *s || other.graphs[j].len() != g.len() {
                return None;
            }
            pairs.push((g, &other.graphs[j]));
        }
        let mut map = BTreeMap::new();
        let mut used = BTreeSet::new();
        self.extend(other, &pairs, &mut map, &mut used).then_some(map)
    }

    fn extend(&self, other: &FiniteStructure, pairs: &[GraphPair<'_>], map: &mut BTreeMap<u64, u64>, used: &mut BTreeSet<u64>) -> bool {
        let consistent = pairs.iter().all(|(g, h)| {
            g.iter().filter_map(|t| t.iter().map(|a| map.get(a).copied()).collect::<Option<Vec<_>>>()).all(|img| h.contains(&img))
        });
        if !consistent {
            return false;
        }
        let Some(&a) = self.domain.iter().find(|a| !map.contains_key(a)) else { return true };
        for &b in &other.domain {
            if used.insert(b) {
                map.insert(a, b);
                if self.extend(other, pairs, map, used) {
                    return true;
                }
                map.remove(&a);
                used.remove(&b);
            }
        }
        false
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HarnessConfig {
    /// Elements below this bound are inspected.
    pub window: u64,
    pub budget: Budget,
    pub exec: Exec,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig { window: 8, budget: Budget::new(8, 5_000_000, 500_000_000), exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleFailure {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{symbol}{args:?} differs from the input")]
    ReductMismatch { symbol: String, args: Vec<u64> },
    #[error("output is not isomorphic to the target")]
    NotIsomorphic,
}

impl SampleFailure {
    pub fn is_unknown(&self) -> bool {
        matches!(self, SampleFailure::Read(ReadError::Output(o)) if o.is_unknown())
    }
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub perm: Permutation,
    pub result: Result<(), SampleFailure>,
}

/// Per-permutation results, in the order the permutations were given.
#[derive(Clone, Debug)]
pub struct HarnessReport {
    pub samples: Vec<SampleOutcome>,
}

impl HarnessReport {
    /// No sample failed; evidence, not proof.
    pub fn passed(&self) -> bool {
        self.samples.iter().all(|s| s.result.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SampleOutcome> {
        self.samples.iter().filter(|s| s.result.is_err())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("permutation\tresult\n");
        for s in &self.samples {
            let r = match &s.result {
                Ok(()) => "pass".to_string(),
                Err(e) => format!("FAIL {e}"),
            };
            out.push_str(&format!("{}\t{}\n", s.perm, r));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("the target language does not contain the source language")]
    NotAnExpansion,
    #[error("the target's reduct differs from the source")]
    ReductDiffers,
}

fn run_sample(lib: &Library, e: u64, source: &Presentation, target: &FiniteStructure, reduct: bool, cfg: &HarnessConfig) -> Result<(), SampleFailure> {
    let x = encode(source).map_err(ReadError::from)?;
    let z = zeros();
    let mut out = OutputStream::new(lib, e, &x, &z, cfg.budget);
    let lang = &target.lang;
    if reduct {
        let elements: Vec<u64> = match source.finite_domain() {
            Some(d) => d.into_iter().filter(|&a| a < cfg.window).collect(),
            None => (0..cfg.window).collect(),
        };
        for slot in 0..source.lang.width() as usize {
            let name = source.lang.slot_name(slot);
            let out_slot = if slot == 0 { 0 } else { lang.slot_of(name).expect("checked sublanguage") };
            let args_list: Vec<Vec<u64>> = if slot == 0 { (0..cfg.window).map(|a| vec![a]).collect() } else { tuples(&elements, source.lang.slot_arity(slot)) };
            for args in args_list {
                let want = x.bit(atom_index(&source.lang, slot, &args));
                let got = out.bit(atom_index(lang, out_slot, &args)).map_err(ReadError::from)?;
                if want != got {
                    return Err(SampleFailure::ReductMismatch { symbol: name.to_string(), args });
                }
            }
        }
    }
    let got = read_finite(lang, cfg.window, |k| out.bit(k))?;
    match got.isomorphism_to(target) {
        Some(_) => Ok(()),
        None => Err(SampleFailure::NotIsomorphic),
    }
}

fn harness(lib: &Library, e: u64, p0: &Presentation, p1: &Presentation, perms: &[Permutation], reduct: bool, cfg: &HarnessConfig) -> Result<HarnessReport, HarnessError> {
    let target = FiniteStructure::of(p1, cfg.window)?;
    encode(p0)?;
    let samples = cfg.exec.map(perms, |perm| SampleOutcome {
        perm: perm.clone(),
        result: run_sample(lib, e, &p0.permute(perm), &target, reduct, cfg),
    });
    Ok(HarnessReport { samples })
}

/// Sampled check that `e` computes the expansion `p1` of `p0`: on each
/// permuted copy of `p0` the output must agree with the input on the
/// symbols of `p0` and be isomorphic to `p1`.
pub fn check_expansion_sample(lib: &Library, e: u64, p0: &Presentation, p1: &Presentation, perms: &[Permutation], cfg: &HarnessConfig) -> Result<HarnessReport, HarnessError> {
    if !p0.lang.is_sublanguage_of(&p1.lang) {
        return Err(HarnessError::NotAnExpansion);
    }
    let elements: Vec<u64> = (0..cfg.window).collect();
    if !p0.agrees_on(p1, &p0.lang, &elements)? {
        return Err(HarnessError::ReductDiffers);
    }
    harness(lib, e, p0, p1, perms, true, cfg)
}

/// Sampled check that `e` computes a copy of `p1` from every permuted copy
/// of `p0`.
pub fn check_reduction_sample(lib: &Library, e: u64, p0: &Presentation, p1: &Presentation, perms: &[Permutation], cfg: &HarnessConfig) -> Result<HarnessReport, HarnessError> {
    harness(lib, e, p0, p1, perms, false, cfg)
}

/// Structures and programs used by the harness tests and the command line.
pub mod fixtures {
    use super::*;
    use crate::asm::Asm;
    use crate::machine::Reg;

    /// Elements of the finite fixture structures are moved within `0..PLACES`.
    pub const PLACES: u64 = 6;
    /// Bound for the element searches done by the group programs.
    pub const SEARCH: u64 = 6;
    /// Bound for the domain count of [`torsion`].
    pub const COUNT_WINDOW: u64 = 16;

    /// `Z_n` in [`Language::group`].
    pub fn cyclic(n: u64) -> Presentation {
        let domain: BTreeSet<u64> = (0..n).collect();
        let mul = tuples(&(0..n).collect::<Vec<_>>(), 2).into_iter().map(|t| (t.clone(), (t[0] + t[1]) % n)).collect();
        Presentation::table(Language::group(), domain, vec![Interp::Function(mul), Interp::Function([(vec![], 0)].into())]).unwrap()
    }

    /// `Z_n` with its inverse function.
    pub fn cyclic_with_inverse(n: u64) -> Presentation {
        let lang = Language::group().with(Symbol::function("inv", 1)).unwrap();
        let base = cyclic(n);
        let (mul, e) = table_interps(&base);
        let inv = (0..n).map(|a| (vec![a], (n - a) % n)).collect();
        Presentation::table(lang, (0..n).collect(), vec![mul, e, Interp::Function(inv)]).unwrap()
    }

    /// `Z_n` with a distinguished subgroup, given by its elements.
    pub fn cyclic_with_subgroup(n: u64, subgroup: &[u64]) -> Presentation {
        let lang = Language::group().with(Symbol::relation("N", 1)).unwrap();
        let (mul, e) = table_interps(&cyclic(n));
        let sub = subgroup.iter().map(|&a| vec![a]).collect();
        Presentation::table(lang, (0..n).collect(), vec![mul, e, Interp::Relation(sub)]).unwrap()
    }

    fn table_interps(p: &Presentation) -> (Interp, Interp) {
        match &*p.src {
            Source::Table { interps, .. } => (interps[0].clone(), interps[1].clone()),
            _ => unreachable!("fixture tables"),
        }
    }

    fn single(name: &str, asm: Asm) -> Library {
        let mut lib = Library::new();
        lib.push(name, asm.finish_with_bound(None).expect("fixture assembles"));
        lib
    }

    fn read(a: &mut Asm, idx: Reg) -> Reg {
        let v = a.reg();
        a.oracle1(idx, v);
        v
    }

    /// `dst = width * code + slot`.
    fn index(a: &mut Asm, dst: Reg, width: u64, slot: u64, code: Reg) {
        a.mul_const(dst, code, width);
        for _ in 0..slot {
            a.inc(dst);
        }
    }

    /// Copies its oracle: bit `n` of the output is bit `n` of the input.
    pub fn copy() -> Library {
        let mut a = Asm::new();
        let v = read(&mut a, Asm::INPUT);
        a.ret(v);
        single("copy", a)
    }

    /// Returns the `(ω, <, n)` half of a product unchanged.
    pub fn echo_nat() -> Library {
        let mut a = Asm::new();
        let t = a.reg();
        a.copy(t, Asm::INPUT);
        a.add(t, Asm::INPUT);
        a.inc(t);
        let v = read(&mut a, t);
        a.ret(v);
        single("echo", a)
    }

    /// Moves the constant of the `(ω, <, n)` half one place up.
    pub fn successor_nat() -> Library {
        let mut a = Asm::new();
        let (q, r, t) = (a.reg(), a.reg(), a.reg());
        let (is_c, zero) = (a.label(), a.label());
        a.divmod_const(q, r, Asm::INPUT, 3);
        a.jeq_const(r, 2, is_c);
        a.copy(t, Asm::INPUT);
        a.add(t, Asm::INPUT);
        a.inc(t);
        let v = read(&mut a, t);
        a.ret(v);
        a.bind(is_c);
        a.jz(q, zero);
        // the constant holds at q iff the input constant holds at q - 1,
        // whose atom is 3 places lower
        let j = a.reg();
        a.copy(j, Asm::INPUT);
        for _ in 0..3 {
            a.dec(j);
        }
        a.copy(t, j);
        a.add(t, j);
        a.inc(t);
        let v = read(&mut a, t);
        a.ret(v);
        a.bind(zero);
        a.ret_const(0);
        single("successor", a)
    }

    /// On a finite group `G` returns `(ω, <, m)` for the 2-adic valuation
    /// `m` of `|G|`, the order of a largest subgroup of 2-power size.
    /// Elements are counted below [`COUNT_WINDOW`].
    pub fn torsion() -> Library {
        let mut a = Asm::new();
        let (q, r) = (a.reg(), a.reg());
        let (dom, lt, yes) = (a.label(), a.label(), a.label());
        a.divmod_const(q, r, Asm::INPUT, 3);
        a.jeq_const(r, 0, dom);
        a.jeq_const(r, 1, lt);
        let (count, k, idx) = (a.reg(), a.reg(), a.reg());
        a.clear(count);
        a.clear(idx);
        a.set(k, COUNT_WINDOW);
        let top = a.here();
        let counted = a.label();
        a.jz(k, counted);
        // the domain atom of element i of the group half is bit 2·3i
        let v = read(&mut a, idx);
        a.add(count, v);
        for _ in 0..6 {
            a.inc(idx);
        }
        a.dec(k);
        a.jmp(top);
        a.bind(counted);
        let (m, h, rem) = (a.reg(), a.reg(), a.reg());
        a.clear(m);
        let halve = a.here();
        let done = a.label();
        a.jz(count, done);
        a.divmod_const(h, rem, count, 2);
        a.jnz(rem, done);
        a.copy(count, h);
        a.inc(m);
        a.jmp(halve);
        a.bind(done);
        a.jeq(q, m, yes);
        a.ret_const(0);
        a.bind(dom);
        a.ret_const(1);
        a.bind(lt);
        let (x, y) = (a.reg(), a.reg());
        a.unpair(x, y, q);
        a.jlt(x, y, yes);
        a.ret_const(0);
        a.bind(yes);
        a.ret_const(1);
        single("torsion", a)
    }

    /// Search upward from 0 for the identity of a group encoded with
    /// `width` slots, leaving it in `c`.
    fn find_identity(a: &mut Asm, c: Reg, width: u64) {
        let t = a.reg();
        a.clear(c);
        let top = a.here();
        let found = a.label();
        index(a, t, width, 2, c);
        let v = read(a, t);
        a.jnz(v, found);
        a.inc(c);
        a.jmp(top);
        a.bind(found);
    }

    /// The `inv` graph bit of `(x, y)` for a group in [`Language::group`]
    /// layout: both in the domain and `x·y` is the identity.
    fn inverse_bit(a: &mut Asm, x: Reg, y: Reg, no: crate::asm::Label) {
        let t = a.reg();
        a.mul_const(t, x, 3);
        let v = read(a, t);
        a.jz(v, no);
        a.mul_const(t, y, 3);
        let v = read(a, t);
        a.jz(v, no);
        let c = a.reg();
        find_identity(a, c, 3);
        let tr = a.reg();
        a.triple(tr, x, y, c);
        index(a, t, 3, 1, tr);
        let v = read(a, t);
        a.ret(v);
    }

    /// Expands a group by its inverse function, copying `mul` and `e`.
    pub fn group_inverse() -> Library {
        let mut a = Asm::new();
        let (q, r, t) = (a.reg(), a.reg(), a.reg());
        let (inv, no) = (a.label(), a.label());
        a.divmod_const(q, r, Asm::INPUT, 4);
        a.jeq_const(r, 3, inv);
        a.mul_const(t, q, 3);
        a.add(t, r);
        let v = read(&mut a, t);
        a.ret(v);
        a.bind(inv);
        let (x, y) = (a.reg(), a.reg());
        a.unpair(x, y, q);
        inverse_bit(&mut a, x, y, no);
        a.bind(no);
        a.ret_const(0);
        single("inverse", a)
    }

    /// Like [`group_inverse`] but on the copy moved along `a ↦ a + 1`: an
    /// isomorphic expansion that does not keep the input's symbols.
    pub fn group_inverse_shifted() -> Library {
        let mut a = Asm::new();
        let (q, r, t) = (a.reg(), a.reg(), a.reg());
        let (dom, mul, e, inv, no) = (a.label(), a.label(), a.label(), a.label(), a.label());
        a.divmod_const(q, r, Asm::INPUT, 4);
        a.jeq_const(r, 0, dom);
        a.jeq_const(r, 1, mul);
        a.jeq_const(r, 2, e);
        a.jmp(inv);
        for (label, slot) in [(dom, 0), (e, 2)] {
            a.bind(label);
            a.jz(q, no);
            a.dec(q);
            index(&mut a, t, 3, slot, q);
            let v = read(&mut a, t);
            a.ret(v);
        }
        a.bind(mul);
        let (x, y, z, rest) = (a.reg(), a.reg(), a.reg(), a.reg());
        a.unpair(x, rest, q);
        a.unpair(y, z, rest);
        for reg in [x, y, z] {
            a.jz(reg, no);
            a.dec(reg);
        }
        let tr = a.reg();
        a.triple(tr, x, y, z);
        index(&mut a, t, 3, 1, tr);
        let v = read(&mut a, t);
        a.ret(v);
        a.bind(inv);
        a.unpair(x, y, q);
        for reg in [x, y] {
            a.jz(reg, no);
            a.dec(reg);
        }
        inverse_bit(&mut a, x, y, no);
        a.bind(no);
        a.ret_const(0);
        single("inverse-shifted", a)
    }

    /// The quotient of a group by its subgroup `N`, on the least element of
    /// each coset. Input layout: `dom, mul, e, N`; output: `dom, mul, e`.
    ///
    /// Entry 1 halts on `a` iff `a` is least in its coset; entry 2 halts on
    /// `pair(a, b)` iff `a ∈ bN`. Both are asked through halting queries.
    pub fn quotient() -> Library {
        // slots of the input language
        const W: u64 = 4;
        let mut lib = Library::new();

        let mut a = Asm::new();
        let (q, r, h, p, prog) = (a.reg(), a.reg(), a.reg(), a.reg(), a.reg());
        let (mul, e, yes, no) = (a.label(), a.label(), a.label(), a.label());
        a.divmod_const(q, r, Asm::INPUT, 3);
        a.jeq_const(r, 1, mul);
        a.jeq_const(r, 2, e);
        a.set(prog, 1);
        a.haltq(prog, q, h);
        a.jz(h, yes);
        a.jmp(no);
        a.bind(mul);
        let (x, y, z, rest, d, k, t) = (a.reg(), a.reg(), a.reg(), a.reg(), a.reg(), a.reg(), a.reg());
        a.unpair(x, rest, q);
        a.unpair(y, z, rest);
        a.set(prog, 1);
        for reg in [x, y, z] {
            a.haltq(prog, reg, h);
            a.jnz(h, no);
        }
        a.clear(d);
        a.set(k, SEARCH);
        let top = a.here();
        let found = a.label();
        a.jz(k, no);
        let tr = a.reg();
        a.triple(tr, x, y, d);
        index(&mut a, t, W, 1, tr);
        let v = read(&mut a, t);
        a.jnz(v, found);
        a.inc(d);
        a.dec(k);
        a.jmp(top);
        a.bind(found);
        a.pair(p, d, z);
        a.set(prog, 2);
        a.haltq(prog, p, h);
        a.jz(h, yes);
        a.jmp(no);
        a.bind(e);
        a.set(prog, 1);
        a.haltq(prog, q, h);
        a.jnz(h, no);
        let c = a.reg();
        find_identity(&mut a, c, W);
        a.pair(p, c, q);
        a.set(prog, 2);
        a.haltq(prog, p, h);
        a.jz(h, yes);
        a.bind(no);
        a.ret_const(0);
        a.bind(yes);
        a.ret_const(1);
        lib.push("quotient", a.finish_with_bound(None).expect("fixture assembles"));

        // least in its coset
        let mut a = Asm::new();
        let (t, b, h, p, prog) = (a.reg(), a.reg(), a.reg(), a.reg(), a.reg());
        let (fail, ok, next) = (a.label(), a.label(), a.label());
        a.mul_const(t, Asm::INPUT, W);
        let v = read(&mut a, t);
        a.jz(v, fail);
        a.clear(b);
        a.set(prog, 2);
        let top = a.here();
        a.jeq(b, Asm::INPUT, ok);
        a.mul_const(t, b, W);
        let v = read(&mut a, t);
        a.jz(v, next);
        a.pair(p, Asm::INPUT, b);
        a.haltq(prog, p, h);
        a.jz(h, fail);
        a.bind(next);
        a.inc(b);
        a.jmp(top);
        a.bind(ok);
        a.ret_const(0);
        a.bind(fail);
        a.spin();
        lib.push("least", a.finish_with_bound(None).expect("fixture assembles"));

        // same coset: some n in N with b·n = a
        let mut a = Asm::new();
        let (x, y, n, k, t) = (a.reg(), a.reg(), a.reg(), a.reg(), a.reg());
        let (fail, ok, next) = (a.label(), a.label(), a.label());
        a.unpair(x, y, Asm::INPUT);
        a.clear(n);
        a.set(k, SEARCH);
        let top = a.here();
        a.jz(k, fail);
        index(&mut a, t, W, 3, n);
        let v = read(&mut a, t);
        a.jz(v, next);
        let tr = a.reg();
        a.triple(tr, y, n, x);
        index(&mut a, t, W, 1, tr);
        let v = read(&mut a, t);
        a.jnz(v, ok);
        a.bind(next);
        a.inc(n);
        a.dec(k);
        a.jmp(top);
        a.bind(ok);
        a.ret_const(0);
        a.bind(fail);
        a.spin();
        lib.push("coset", a.finish_with_bound(None).expect("fixture assembles"));
        lib
    }

    /// Fixture programs by name.
    pub fn program(name: &str) -> Option<Library> {
        Some(match name {
            "copy" => copy(),
            "echo" => echo_nat(),
            "successor" => successor_nat(),
            "torsion" => torsion(),
            "inverse" => group_inverse(),
            "inverse-shifted" => group_inverse_shifted(),
            "quotient" => quotient(),
            _ => return None,
        })
    }

    pub const PROGRAMS: [&str; 7] = ["copy", "echo", "successor", "torsion", "inverse", "inverse-shifted", "quotient"];
}
