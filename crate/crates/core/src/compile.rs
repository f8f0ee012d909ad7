//! Compiling a feedback computation into Borel codes for the oracles `Y` on
//! which it halts (with each output) or diverges, with subcomputation trees
//! of height at most `α`.
//!
//! The construction unions, over the finitely many minimal behaviours
//! `(η, ν, k)` of the run, a code `C` for the oracles that extend `η` and
//! answer the run's halting queries as `ν` does with children of height
//! below `α`. Children are compiled recursively at every smaller height.
//! Only computations whose behaviour is settled within the bounds (reads of
//! `Y` below `L`, halting-query indices below `V`, halted or cycling within
//! `K` steps) are compiled; anything else is reported as a bound violation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::borel::{cap, cup, member, BorelCode};
use crate::coding::{pair, BitOracle, BitString, InfiniteBitSeq};
use crate::exec::Exec;
use crate::feedback::{eval, tree_height, Budget, Verdict};
use crate::machine::{
    halting_queries_of, pending_query, run_finite, step_mut, AnswerProvider, FiniteAnswers, FiniteOutcome, HaltAnswer,
    Library, MachineState, Query, StepStatus,
};
use crate::ordinal::Ordinal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    /// Reads of `Y` must stay below this index.
    pub l: usize,
    /// Every run halts or repeats a state within this many steps.
    pub k: u64,
    /// Halting-query indices `pair(e, n)` must stay below this.
    pub v: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { l: 6, k: 64, v: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("computation ({prog},{input}) reads Y({index}), beyond L = {l}")]
    ReadBeyondL { prog: u64, input: u64, index: u64, l: usize },
    #[error("computation ({prog},{input}) queries ({qprog},{qinput}) with index {index}, beyond V = {v}")]
    QueryBeyondV { prog: u64, input: u64, qprog: u64, qinput: u64, index: u64, v: u64 },
    #[error("computation ({prog},{input}) neither halts nor repeats a state within K = {k} steps")]
    Undetermined { prog: u64, input: u64, k: u64 },
    #[error("only finite heights are compiled, got {0}")]
    InfiniteAlpha(Ordinal),
}

/// A member of `B`: the first `k` steps make no query outside `η` or `ν`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub eta: BitString,
    pub nu: BitString,
    pub k: u64,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &BitString| if s.is_empty() { "ε".to_string() } else { s.to_string() };
        write!(f, "({}, {}, {})", show(&self.eta), show(&self.nu), self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TripleClass {
    /// In `B↓` and `B↓j` for `j = output`.
    Halts { output: u64 },
    /// In `B↑j` for `j = k`.
    Running { k: u64 },
}

/// Every member of `B` with `|η| ≤ L`, `|ν| ≤ V`, `k ≤ K`, by brute force:
/// length-lexicographic in `η`, then `ν`, then increasing `k`.
pub fn enumerate_triples(lib: &Library, f: u64, n: u64, x: &impl BitOracle, l: usize, k: u64, v: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for eta in BitString::all_up_to(l) {
        for nu in BitString::all_up_to(v) {
            let ans = FiniteAnswers::new(eta.clone(), nu.clone());
            for steps in 0..=k {
                let run = run_finite(lib.get(f), n, x, &ans, steps);
                if !matches!(run.outcome, FiniteOutcome::InvalidCall { .. }) {
                    out.push(Triple { eta: eta.clone(), nu: nu.clone(), k: steps });
                }
            }
        }
    }
    out
}

pub fn classify(lib: &Library, t: &Triple, f: u64, n: u64, x: &impl BitOracle) -> TripleClass {
    let run = run_finite(lib.get(f), n, x, &FiniteAnswers::new(t.eta.clone(), t.nu.clone()), t.k);
    match run.outcome {
        FiniteOutcome::HaltedWithin { output, .. } => TripleClass::Halts { output },
        _ => TripleClass::Running { k: t.k },
    }
}

/// The part of a triple a code depends on: `η` and the answers `ν` gives to
/// the halting queries actually made, in query order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Behavior {
    eta: BitString,
    answers: Vec<((u64, u64), HaltAnswer)>,
}

#[derive(Debug, Default)]
struct Exploration {
    halts: Vec<(Behavior, u64)>,
    /// `running[k]`: behaviours of the first `k` steps of runs still going.
    running: Vec<Vec<Behavior>>,
}

#[derive(Clone, Debug)]
struct RawCodes {
    down: BorelCode,
    down_j: BTreeMap<u64, BorelCode>,
    up: BorelCode,
    up_j: Vec<BorelCode>,
}

/// The four codes for one computation, each refined by the cylinder of `σ`.
#[derive(Clone, Debug)]
pub struct CompiledCodes {
    pub sigma: BitString,
    pub alpha: u64,
    pub down: BorelCode,
    /// Outputs that occur; any other `j` gets a code for ∅.
    pub down_j: BTreeMap<u64, BorelCode>,
    pub up: BorelCode,
    /// `up_j[j]` for `j ≤ K`; past `K` the last entry applies.
    pub up_j: Vec<BorelCode>,
}

impl CompiledCodes {
    pub fn down_at(&self, j: u64) -> BorelCode {
        self.down_j.get(&j).cloned().unwrap_or_else(|| cap(&[BorelCode::basic(self.sigma.clone()), BorelCode::empty()]))
    }

    pub fn up_at(&self, j: u64) -> BorelCode {
        self.up_j[(j as usize).min(self.up_j.len() - 1)].clone()
    }

    /// Every code, labelled.
    pub fn all(&self) -> Vec<(String, BorelCode)> {
        let mut out = vec![("down".to_string(), self.down.clone()), ("up".to_string(), self.up.clone())];
        out.extend(self.down_j.iter().map(|(j, c)| (format!("down{j}"), c.clone())));
        out.extend(self.up_j.iter().enumerate().map(|(j, c)| (format!("up{j}"), c.clone())));
        out
    }
}

/// A compiler for one library and first oracle, memoizing explorations and
/// codes across calls.
pub struct Compiler<'a, X: BitOracle> {
    lib: &'a Library,
    x: &'a X,
    bounds: Bounds,
    explored: HashMap<(u64, u64), std::sync::Arc<Exploration>>,
    raw: HashMap<(u64, u64, u64), RawCodes>,
    c_memo: HashMap<(Behavior, u64), BorelCode>,
}

struct PartialAnswers<'r, X> {
    x: &'r X,
    eta: &'r BitString,
    answers: &'r [((u64, u64), HaltAnswer)],
}

impl<X: BitOracle> AnswerProvider for PartialAnswers<'_, X> {
    fn oracle1(&self, k: u64) -> Option<bool> {
        Some(self.x.bit(k))
    }

    fn oracle2(&self, k: u64) -> Option<bool> {
        usize::try_from(k).ok().and_then(|k| self.eta.get(k))
    }

    fn halting(&self, prog: u64, input: u64) -> Option<HaltAnswer> {
        self.answers.iter().find(|(q, _)| *q == (prog, input)).map(|(_, a)| *a)
    }
}

impl<'a, X: BitOracle> Compiler<'a, X> {
    pub fn new(lib: &'a Library, x: &'a X, bounds: Bounds) -> Self {
        Compiler { lib, x, bounds, explored: HashMap::new(), raw: HashMap::new(), c_memo: HashMap::new() }
    }

    pub fn compile(&mut self, f: u64, n: u64, sigma: &BitString, alpha: &Ordinal) -> Result<CompiledCodes, CompileError> {
        let a = alpha.as_finite().ok_or_else(|| CompileError::InfiniteAlpha(alpha.clone()))?;
        let raw = self.raw_codes(f, n, a)?;
        let guard = BorelCode::basic(sigma.clone());
        let refine = |c: &BorelCode| cap(&[guard.clone(), c.clone()]);
        Ok(CompiledCodes {
            sigma: sigma.clone(),
            alpha: a,
            down: refine(&raw.down),
            down_j: raw.down_j.iter().map(|(j, c)| (*j, refine(c))).collect(),
            up: refine(&raw.up),
            up_j: raw.up_j.iter().map(refine).collect(),
        })
    }

    /// The code `C` for a triple in `B`.
    pub fn build_c(&mut self, t: &Triple, alpha: u64, f: u64, n: u64) -> Result<BorelCode, CompileError> {
        let run = run_finite(self.lib.get(f), n, self.x, &FiniteAnswers::new(t.eta.clone(), t.nu.clone()), t.k);
        let mut answers: Vec<((u64, u64), HaltAnswer)> = Vec::new();
        for q in halting_queries_of(&run) {
            if answers.iter().all(|(p, _)| *p != q) {
                let bit = t.nu.get(pair(q.0, q.1) as usize).expect("triple answers its own queries");
                answers.push((q, HaltAnswer::from_bit(bit)));
            }
        }
        self.c_code(&Behavior { eta: t.eta.clone(), answers }, alpha)
    }

    fn c_code(&mut self, b: &Behavior, alpha: u64) -> Result<BorelCode, CompileError> {
        if b.answers.is_empty() {
            return Ok(BorelCode::basic(b.eta.clone()));
        }
        if alpha == 0 {
            return Ok(BorelCode::empty());
        }
        let key = (b.clone(), alpha);
        if let Some(c) = self.c_memo.get(&key) {
            return Ok(c.clone());
        }
        let guard = BorelCode::basic(b.eta.clone());
        let mut parts = vec![guard.clone()];
        for &((r, m), answer) in &b.answers {
            // D: the child gives this answer with a tree of height below α
            let mut below = Vec::new();
            for beta in 0..alpha {
                let raw = self.raw_codes(r, m, beta)?;
                let child = match answer {
                    HaltAnswer::Halts => raw.down,
                    HaltAnswer::Diverges => raw.up,
                };
                below.push(cap(&[guard.clone(), child]));
            }
            parts.push(cup(&below));
        }
        let c = cap(&parts);
        self.c_memo.insert(key, c.clone());
        Ok(c)
    }

    fn union_of(&mut self, behaviors: &[Behavior], alpha: u64) -> Result<BorelCode, CompileError> {
        if behaviors.is_empty() {
            return Ok(BorelCode::empty());
        }
        let cs = behaviors.iter().map(|b| self.c_code(b, alpha)).collect::<Result<Vec<_>, _>>()?;
        Ok(cup(&cs))
    }

    fn raw_codes(&mut self, f: u64, n: u64, alpha: u64) -> Result<RawCodes, CompileError> {
        if let Some(r) = self.raw.get(&(f, n, alpha)) {
            return Ok(r.clone());
        }
        let ex = self.explore(f, n)?;
        let halting: Vec<Behavior> = ex.halts.iter().map(|(b, _)| b.clone()).collect();
        let down = self.union_of(&halting, alpha)?;
        let mut by_output: BTreeMap<u64, Vec<Behavior>> = BTreeMap::new();
        for (b, j) in &ex.halts {
            by_output.entry(*j).or_default().push(b.clone());
        }
        let mut down_j = BTreeMap::new();
        for (j, bs) in by_output {
            down_j.insert(j, self.union_of(&bs, alpha)?);
        }
        let up_j = ex.running.iter().map(|bs| self.union_of(bs, alpha)).collect::<Result<Vec<_>, _>>()?;
        let up = cap(&up_j);
        let r = RawCodes { down, down_j, up, up_j };
        self.raw.insert((f, n, alpha), r.clone());
        Ok(r)
    }

    fn explore(&mut self, f: u64, n: u64) -> Result<std::sync::Arc<Exploration>, CompileError> {
        if let Some(e) = self.explored.get(&(f, n)) {
            return Ok(e.clone());
        }
        let mut ex = Exploration { halts: Vec::new(), running: vec![Vec::new(); self.bounds.k as usize + 1] };
        let mut seen_running: Vec<HashSet<Behavior>> = vec![HashSet::new(); self.bounds.k as usize + 1];
        let mut seen_halts = HashSet::new();
        let start = self.lib.get(f).initial(n);
        let b = Behavior { eta: BitString::new(), answers: Vec::new() };
        seen_running[0].insert(b.clone());
        ex.running[0].push(b.clone());
        let mut walk = Walk { f, n, ex: &mut ex, seen_running: &mut seen_running, seen_halts: &mut seen_halts };
        self.branch(&mut walk, start, b, vec![])?;
        let ex = std::sync::Arc::new(ex);
        self.explored.insert((f, n), ex.clone());
        Ok(ex)
    }

    /// Runs from `state` (after `history.len()` steps) until the run halts,
    /// needs an unknown answer (then branches), or reaches `K` steps.
    fn branch(&self, w: &mut Walk<'_>, mut state: MachineState, b: Behavior, mut history: Vec<MachineState>) -> Result<(), CompileError> {
        let program = self.lib.get(w.f);
        loop {
            let steps = history.len() as u64;
            if steps == self.bounds.k {
                history.push(state.clone());
                let distinct: HashSet<&MachineState> = history.iter().collect();
                if distinct.len() == history.len() {
                    return Err(CompileError::Undetermined { prog: w.f, input: w.n, k: self.bounds.k });
                }
                return Ok(());
            }
            match pending_query(program, &state) {
                Some(Query::Oracle2(index)) if index >= b.eta.len() as u64 => {
                    if index >= self.bounds.l as u64 {
                        return Err(CompileError::ReadBeyondL { prog: w.f, input: w.n, index, l: self.bounds.l });
                    }
                    let extra = index as usize + 1 - b.eta.len();
                    for tail in BitString::all_of_len(extra) {
                        let eta = BitString::from_bits(b.eta.bits().iter().chain(tail.bits()).copied());
                        self.branch(w, state.clone(), Behavior { eta, answers: b.answers.clone() }, history.clone())?;
                    }
                    return Ok(());
                }
                Some(Query::Halting { prog, input }) if b.answers.iter().all(|(q, _)| *q != (prog, input)) => {
                    let index = pair(prog, input);
                    if index >= self.bounds.v {
                        return Err(CompileError::QueryBeyondV {
                            prog: w.f,
                            input: w.n,
                            qprog: prog,
                            qinput: input,
                            index,
                            v: self.bounds.v,
                        });
                    }
                    for answer in [HaltAnswer::Halts, HaltAnswer::Diverges] {
                        let mut answers = b.answers.clone();
                        answers.push(((prog, input), answer));
                        self.branch(w, state.clone(), Behavior { eta: b.eta.clone(), answers }, history.clone())?;
                    }
                    return Ok(());
                }
                _ => {}
            }
            let before = state.clone();
            let provider = PartialAnswers { x: self.x, eta: &b.eta, answers: &b.answers };
            match step_mut(program, &mut state, &provider) {
                StepStatus::Continue => {
                    history.push(before);
                    let k = history.len();
                    if w.seen_running[k].insert(b.clone()) {
                        w.ex.running[k].push(b.clone());
                    }
                }
                StepStatus::Halted(output) => {
                    if w.seen_halts.insert((b.clone(), output)) {
                        w.ex.halts.push((b, output));
                    }
                    return Ok(());
                }
                StepStatus::Pending(q) => unreachable!("query {q:?} was resolved above"),
            }
        }
    }
}

struct Walk<'w> {
    f: u64,
    n: u64,
    ex: &'w mut Exploration,
    seen_running: &'w mut Vec<HashSet<Behavior>>,
    seen_halts: &'w mut HashSet<(Behavior, u64)>,
}

pub fn compile_codes(
    lib: &Library,
    f: u64,
    n: u64,
    sigma: &BitString,
    alpha: &Ordinal,
    x: &impl BitOracle,
    bounds: Bounds,
) -> Result<CompiledCodes, CompileError> {
    Compiler::new(lib, x, bounds).compile(f, n, sigma, alpha)
}

#[allow(clippy::too_many_arguments)]
pub fn build_c(
    lib: &Library,
    t: &Triple,
    alpha: &Ordinal,
    f: u64,
    n: u64,
    x: &impl BitOracle,
    bounds: Bounds,
) -> Result<BorelCode, CompileError> {
    let a = alpha.as_finite().ok_or_else(|| CompileError::InfiniteAlpha(alpha.clone()))?;
    Compiler::new(lib, x, bounds).build_c(t, a, f, n)
}

/// Every `Y` of the sweep: each prefix of length `L` followed by all zeros
/// and by all ones.
pub fn sweep_sequences(l: usize) -> Vec<InfiniteBitSeq> {
    BitString::all_of_len(l)
        .flat_map(|p| [InfiniteBitSeq::constant(p.clone(), false), InfiniteBitSeq::constant(p, true)])
        .collect()
}

/// One sweep point: what the evaluator says and what the codes say.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub y: InfiniteBitSeq,
    pub verdict: Verdict,
    pub height: u64,
    pub in_down: bool,
    /// Outputs `j` whose code contains `Y`.
    pub in_down_j: Vec<u64>,
    pub in_up: bool,
}

impl SweepRow {
    pub fn expected_down_j(&self, sigma: &BitString, alpha: u64) -> Option<u64> {
        match self.verdict {
            Verdict::Converges { value, height, .. } if height <= alpha && sigma.is_prefix_of(&self.y.take(sigma.len())) => {
                Some(value)
            }
            _ => None,
        }
    }

    pub fn expected_up(&self, sigma: &BitString, alpha: u64) -> bool {
        matches!(self.verdict, Verdict::Diverges(_)) && self.height <= alpha && sigma.is_prefix_of(&self.y.take(sigma.len()))
    }

    /// Codes and evaluator agree on this point.
    pub fn agrees(&self, sigma: &BitString, alpha: u64) -> bool {
        let want = self.expected_down_j(sigma, alpha);
        self.verdict.is_definite()
            && self.in_down == want.is_some()
            && self.in_down_j == want.into_iter().collect::<Vec<_>>()
            && self.in_up == self.expected_up(sigma, alpha)
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub sigma: BitString,
    pub alpha: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn mismatches(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| !r.agrees(&self.sigma, self.alpha)).collect()
    }

    /// Tab-separated table: prefix, verdict, height, and each membership.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("y\tverdict\theight\tdown\tdown_j\tup\tagrees\n");
        for r in &self.rows {
            let value = r.verdict.value().map(|v| format!("({v})")).unwrap_or_default();
            let js: Vec<String> = r.in_down_j.iter().map(u64::to_string).collect();
            out.push_str(&format!(
                "{}\t{}{}\t{}\t{}\t{}\t{}\t{}\n",
                r.y,
                r.verdict.kind(),
                value,
                r.height,
                r.in_down as u8,
                if js.is_empty() { "-".to_string() } else { js.join(",") },
                r.in_up as u8,
                r.agrees(&self.sigma, self.alpha) as u8
            ));
        }
        out
    }
}

/// Compare compiled membership with the evaluator on every sweep sequence.
#[allow(clippy::too_many_arguments)]
pub fn verify_sweep(
    lib: &Library,
    f: u64,
    n: u64,
    x: &impl BitOracle,
    codes: &CompiledCodes,
    l: usize,
    budget: Budget,
    exec: Exec,
) -> SweepReport {
    let ys = sweep_sequences(l);
    let rows = exec.map(&ys, |y| {
        let (verdict, tree) = eval(lib, f, x, y, n, budget);
        SweepRow {
            y: y.clone(),
            height: tree_height(&tree),
            verdict,
            in_down: member(&codes.down, y),
            in_down_j: codes.down_j.iter().filter(|(_, c)| member(c, y)).map(|(j, _)| *j).collect(),
            in_up: member(&codes.up, y),
        }
    });
    SweepReport { sigma: codes.sigma.clone(), alpha: codes.alpha, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_program;

    fn lib(progs: &[&str]) -> Library {
        let mut lib = Library::new();
        for (i, text) in progs.iter().enumerate() {
            lib.push(format!("p{i}"), parse_program(text).unwrap());
        }
        lib
    }

    fn zeros() -> InfiniteBitSeq {
        InfiniteBitSeq::zeros()
    }

    fn bounds(l: usize) -> Bounds {
        Bounds { l, k: 64, v: 64 }
    }

    fn assert_sweep(lib: &Library, f: u64, sigma: &str, alpha: u64, l: usize) -> CompiledCodes {
        let sigma: BitString = sigma.parse().unwrap();
        let codes = compile_codes(lib, f, 0, &sigma, &Ordinal::finite(alpha), &zeros(), bounds(l)).unwrap();
        let report = verify_sweep(lib, f, 0, &zeros(), &codes, l, Budget::default(), Exec::Sequential);
        assert!(report.mismatches().is_empty(), "{}", report.to_tsv());
        codes
    }

    const READ0: &str = "ORACLE2 r1 -> r2\nJZ r2 3\nHALT\nJZ r1 3";
    const OUT_Y0: &str = "ORACLE2 r1 -> r2\nOUTPUT r2\nHALT";
    const LOOP: &str = "JZ r1 0";
    /// Asks about program 1 on input 0, then halts either way.
    const ASK1: &str = "INC r1\nHALTQ r1 r2 -> r3\nHALT";

    #[test]
    fn halts_iff_first_bit_is_one() {
        let l = lib(&[READ0]);
        let codes = assert_sweep(&l, 0, "", 0, 4);
        for sigma in BitString::all_of_len(4) {
            let y = InfiniteBitSeq::constant(sigma.clone(), false);
            assert_eq!(member(&codes.down, &y), sigma.get(0) == Some(true));
        }
    }

    #[test]
    fn output_first_bit_partitions_the_cylinder() {
        let l = lib(&[OUT_Y0]);
        let codes = assert_sweep(&l, 0, "1", 0, 3);
        for y in sweep_sequences(3) {
            let a = member(&codes.down_at(0), &y);
            let b = member(&codes.down_at(1), &y);
            assert!(!(a && b));
            assert_eq!(a || b, y.get(0));
        }
        assert_sweep(&l, 0, "", 2, 3);
    }

    #[test]
    fn one_query_is_height_sensitive() {
        let l = lib(&[ASK1, LOOP]);
        let at0 = assert_sweep(&l, 0, "", 0, 2);
        let at1 = assert_sweep(&l, 0, "", 1, 2);
        for y in sweep_sequences(2) {
            assert!(!member(&at0.down, &y));
            assert!(member(&at1.down, &y));
        }
    }

    #[test]
    fn triple_examples() {
        let halt = lib(&["HALT"]);
        let ts = enumerate_triples(&halt, 0, 0, &zeros(), 1, 2, 1);
        for t in &ts {
            if t.k >= 1 {
                assert_eq!(classify(&halt, t, 0, 0, &zeros()), TripleClass::Halts { output: 0 });
            }
        }
        assert_eq!(ts.len(), 3 * 3 * 3);

        let out = lib(&["OUTPUT r0\nHALT"]);
        let t = Triple { eta: BitString::new(), nu: BitString::new(), k: 2 };
        assert_eq!(classify(&out, &t, 0, 0, &zeros()), TripleClass::Halts { output: 0 });

        let looping = lib(&[LOOP]);
        let t = Triple { eta: BitString::new(), nu: BitString::new(), k: 5 };
        assert_eq!(classify(&looping, &t, 0, 0, &zeros()), TripleClass::Running { k: 5 });

        // halts on step 3
        let three = lib(&["INC r0\nINC r0\nHALT"]);
        let t2 = Triple { eta: BitString::new(), nu: BitString::new(), k: 2 };
        let t3 = Triple { k: 3, ..t2.clone() };
        assert_eq!(classify(&three, &t2, 0, 0, &zeros()), TripleClass::Running { k: 2 });
        assert_eq!(classify(&three, &t3, 0, 0, &zeros()), TripleClass::Halts { output: 0 });

        // reads Y(1) on step 2: η of length ≤ 1 is only valid for k ≤ 1
        let reads = lib(&["INC r1\nORACLE2 r1 -> r2\nHALT"]);
        for t in enumerate_triples(&reads, 0, 0, &zeros(), 2, 4, 0) {
            assert!(t.eta.len() == 2 || t.k <= 1, "{t}");
        }
    }

    #[test]
    fn c_codes_for_the_simple_cases() {
        let none = lib(&["ORACLE2 r1 -> r2\nHALT"]);
        let t = Triple { eta: "0".parse().unwrap(), nu: BitString::new(), k: 2 };
        let c = build_c(&none, &t, &Ordinal::finite(3), 0, 0, &zeros(), bounds(2)).unwrap();
        assert_eq!(c, BorelCode::basic("0".parse().unwrap()));

        let l = lib(&[ASK1, LOOP]);
        // pair(1, 0) = 1; ν says the child halts
        let t = Triple { eta: BitString::new(), nu: "00".parse().unwrap(), k: 3 };
        let c0 = build_c(&l, &t, &Ordinal::zero(), 0, 0, &zeros(), bounds(2)).unwrap();
        assert!(c0.ptr_eq(&BorelCode::empty()));
        // the child diverges, so believing it halts admits no Y
        let c1 = build_c(&l, &t, &Ordinal::finite(2), 0, 0, &zeros(), bounds(2)).unwrap();
        for y in sweep_sequences(2) {
            assert!(!member(&c1, &y));
        }
    }

    #[test]
    fn bound_violations() {
        let far = lib(&["INC r1\nINC r1\nINC r1\nORACLE2 r1 -> r2\nHALT"]);
        let e = compile_codes(&far, 0, 0, &BitString::new(), &Ordinal::zero(), &zeros(), bounds(2)).unwrap_err();
        assert!(matches!(e, CompileError::ReadBeyondL { index: 3, .. }));
        let slow = lib(&["INC r1\nINC r1\nINC r1\nHALT"]);
        let e = compile_codes(&slow, 0, 0, &BitString::new(), &Ordinal::zero(), &zeros(), Bounds { l: 1, k: 3, v: 4 });
        assert!(matches!(e, Err(CompileError::Undetermined { k: 3, .. })));
        assert!(compile_codes(&slow, 0, 0, &BitString::new(), &Ordinal::zero(), &zeros(), Bounds { l: 1, k: 4, v: 4 }).is_ok());
        let counting = lib(&[".bound none\nINC r1\nJZ r2 0"]);
        let e = compile_codes(&counting, 0, 0, &BitString::new(), &Ordinal::zero(), &zeros(), bounds(1)).unwrap_err();
        assert!(matches!(e, CompileError::Undetermined { .. }));
        let wide = lib(&["INC r1\nINC r1\nINC r1\nINC r1\nHALTQ r1 r1 -> r2\nHALT"]);
        let e = compile_codes(&wide, 0, 0, &BitString::new(), &Ordinal::one(), &zeros(), Bounds { l: 1, k: 16, v: 8 }).unwrap_err();
        assert!(matches!(e, CompileError::QueryBeyondV { index: 40, .. }));
        assert!(matches!(
            compile_codes(&wide, 0, 0, &BitString::new(), &Ordinal::omega(), &zeros(), bounds(1)),
            Err(CompileError::InfiniteAlpha(_))
        ));
    }
}
