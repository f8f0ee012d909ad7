//! `(α, β)`-infinite time Turing machines for clocks `α < ω^ω`.
//!
//! A run is simulated as nested blocks: a level-1 block is the `ω` successor
//! steps after some time, a level-`d` block the `ω` level-`(d−1)` blocks after
//! it. A block ends once its starting configurations repeat; the run is then
//! periodic and the configuration at the block's limit is the liminf over the
//! repeating unit: a cell is 1 only if it is 1 throughout, head and state
//! take their least values. Heads start at 0 and move by one, so they stay
//! finite; cells at infinite positions keep their initial values.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ordinal::{add, Ordinal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Right, Move::Stay];
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Left => "LEFT",
            Move::Right => "RIGHT",
            Move::Stay => "STAY",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub state: usize,
    pub write: bool,
    pub mv: Move,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("the state set must contain s and h")]
    MissingStartOrHalt,
    #[error("no rule for ({state},{symbol})")]
    Missing { state: String, symbol: u8 },
    #[error("the halting state must keep its symbol and stay")]
    HaltRule,
}

/// A finite linearly ordered state set containing `s` and `h`, and a total
/// transition map. States are ordered as declared.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LookupTable {
    states: Vec<String>,
    start: usize,
    halt: usize,
    rules: Vec<[Action; 2]>,
}

impl LookupTable {
    /// `rules[q][z]` is the action in state `q` reading `z`; the rules of
    /// `h` are forced to `(h, z, STAY)`.
    pub fn new(states: Vec<String>, rules: Vec<[Action; 2]>) -> Result<Self, TableError> {
        let start = states.iter().position(|s| s == "s").ok_or(TableError::MissingStartOrHalt)?;
        let halt = states.iter().position(|s| s == "h").ok_or(TableError::MissingStartOrHalt)?;
        assert_eq!(rules.len(), states.len(), "one rule pair per state");
        for (z, a) in rules[halt].iter().enumerate() {
            if *a != (Action { state: halt, write: z == 1, mv: Move::Stay }) {
                return Err(TableError::HaltRule);
            }
        }
        Ok(LookupTable { states, start, halt, rules })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn halt(&self) -> usize {
        self.halt
    }

    pub fn rule(&self, state: usize, symbol: bool) -> Action {
        self.rules[state][symbol as usize]
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    /// Every table over the given state names, in a fixed order.
    pub fn all_over(states: &[&str]) -> Vec<LookupTable> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let halt = names.iter().position(|s| s == "h").expect("h is a state");
        let choices: Vec<Action> = (0..names.len())
            .flat_map(|q| [false, true].into_iter().flat_map(move |w| Move::ALL.into_iter().map(move |mv| Action { state: q, write: w, mv })))
            .collect();
        let free = (names.len() - 1) * 2;
        let total = choices.len().pow(free as u32);
        (0..total)
            .map(|mut code| {
                let rules = (0..names.len())
                    .map(|q| {
                        if q == halt {
                            return Self::halt_rules(halt);
                        }
                        let mut pick = || {
                            let a = choices[code % choices.len()];
                            code /= choices.len();
                            a
                        };
                        [pick(), pick()]
                    })
                    .collect();
                LookupTable::new(names.clone(), rules).unwrap()
            })
            .collect()
    }

    fn halt_rules(halt: usize) -> [Action; 2] {
        [Action { state: halt, write: false, mv: Move::Stay }, Action { state: halt, write: true, mv: Move::Stay }]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("states: {}\n", self.states.join(" "));
        for (q, pair) in self.rules.iter().enumerate() {
            if q == self.halt {
                continue;
            }
            for (z, a) in pair.iter().enumerate() {
                out.push_str(&format!("{},{} -> {},{},{}\n", self.states[q], z, self.states[a.state], a.write as u8, a.mv));
            }
        }
        out
    }
}

impl FromStr for LookupTable {
    type Err = TableError;

    /// Lines `state,symbol -> state',symbol',move`; `#` starts a comment. An
    /// optional `states: …` line fixes the order, otherwise states are
    /// ordered by first appearance.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut states: Vec<String> = Vec::new();
        let mut raw: Vec<(usize, String, bool, String, bool, Move)> = Vec::new();
        let intern = |states: &mut Vec<String>, s: &str| {
            if !states.iter().any(|x| x == s) {
                states.push(s.to_string());
            }
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| TableError::Parse { line: line_no, msg: msg.to_string() };
            if let Some(rest) = line.strip_prefix("states:") {
                for s in rest.split_whitespace() {
                    intern(&mut states, s);
                }
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("expected ->"))?;
            let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
            let rhs: Vec<&str> = rhs.split(',').map(str::trim).collect();
            if lhs.len() != 2 || rhs.len() != 3 {
                return Err(err("expected state,symbol -> state,symbol,move"));
            }
            let bit = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(err("symbols are 0 or 1")),
            };
            let mv = match rhs[2] {
                "LEFT" | "L" => Move::Left,
                "RIGHT" | "R" => Move::Right,
                "STAY" | "S" => Move::Stay,
                _ => return Err(err("move is LEFT, RIGHT or STAY")),
            };
            intern(&mut states, lhs[0]);
            intern(&mut states, rhs[0]);
            raw.push((line_no, lhs[0].to_string(), bit(lhs[1])?, rhs[0].to_string(), bit(rhs[1])?, mv));
        }
        intern(&mut states, "h");
        let idx = |s: &str| states.iter().position(|x| x == s).unwrap();
        let halt = idx("h");
        let mut rules: Vec<[Option<Action>; 2]> = vec![[None, None]; states.len()];
        rules[halt] = Self::halt_rules(halt).map(Some);
        for (line, q, z, e, w, mv) in raw {
            let (q, a) = (idx(&q), Action { state: idx(&e), write: w, mv });
            if q == halt {
                if rules[q][z as usize] != Some(a) {
                    return Err(TableError::HaltRule);
                }
                continue;
            }
            if rules[q][z as usize].is_some_and(|old| old != a) {
                return Err(TableError::Parse { line, msg: "conflicting rule".into() });
            }
            rules[q][z as usize] = Some(a);
        }
        let mut full = Vec::new();
        for (q, pair) in rules.iter().enumerate() {
            let get = |z: usize| pair[z].ok_or_else(|| TableError::Missing { state: states[q].clone(), symbol: z as u8 });
            full.push([get(0)?, get(1)?]);
        }
        LookupTable::new(states, full)
    }
}

/// A configuration with ordinal-indexed tape and head.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ItTmConfig {
    pub time: Ordinal,
    /// Cells holding 1; every other cell holds 0.
    pub tape: BTreeSet<Ordinal>,
    pub head: Ordinal,
    pub state: usize,
}

impl ItTmConfig {
    pub fn cell(&self, i: &Ordinal) -> bool {
        self.tape.contains(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("space bound violated at time {time}: head {head} moved right with β = {beta}")]
pub struct SpaceViolation {
    pub time: Ordinal,
    pub head: Ordinal,
    pub beta: Ordinal,
}

/// One successor step. The head moves left from a limit position to 0, from
/// `p + 1` to `p`, and stays put at 0.
pub fn ittm_step(c: &ItTmConfig, t: &LookupTable, beta: &Ordinal) -> Result<ItTmConfig, SpaceViolation> {
    let read = c.cell(&c.head);
    let a = t.rule(c.state, read);
    let mut tape = c.tape.clone();
    if a.write {
        tape.insert(c.head.clone());
    } else {
        tape.remove(&c.head);
    }
    let head = match a.mv {
        Move::Stay => c.head.clone(),
        Move::Right => {
            let next = c.head.succ();
            if &next >= beta {
                return Err(SpaceViolation { time: c.time.clone(), head: c.head.clone(), beta: beta.clone() });
            }
            next
        }
        Move::Left => c.head.pred().unwrap_or_else(Ordinal::zero),
    };
    Ok(ItTmConfig { time: c.time.succ(), tape, head, state: a.state })
}

/// The configuration at a limit, from the configurations of one repeating
/// unit before it.
///
/// # Panics
/// On an empty unit.
pub fn ittm_limit(unit: &[ItTmConfig], time: Ordinal) -> ItTmConfig {
    let first = unit.first().expect("a nonempty unit");
    let tape = first.tape.iter().filter(|i| unit.iter().all(|c| c.tape.contains(*i))).cloned().collect();
    let head = unit.iter().map(|c| c.head.clone()).min().unwrap();
    let state = unit.iter().map(|c| c.state).min().unwrap();
    ItTmConfig { time, tape, head, state }
}

/// Compact configuration with a finite head; the tape holds the finite cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Conf {
    state: usize,
    head: u64,
    /// Bits of the finite cells, trailing zero words trimmed.
    tape: Vec<u64>,
}

impl Conf {
    fn get(&self, i: u64) -> bool {
        self.tape.get((i / 64) as usize).is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    fn set(&mut self, i: u64, b: bool) {
        let w = (i / 64) as usize;
        if b {
            if self.tape.len() <= w {
                self.tape.resize(w + 1, 0);
            }
            self.tape[w] |= 1 << (i % 64);
        } else if w < self.tape.len() {
            self.tape[w] &= !(1 << (i % 64));
            while self.tape.last() == Some(&0) {
                self.tape.pop();
            }
        }
    }

    fn meet(&self, other: &Conf) -> Conf {
        let mut tape: Vec<u64> = self.tape.iter().zip(&other.tape).map(|(a, b)| a & b).collect();
        while tape.last() == Some(&0) {
            tape.pop();
        }
        Conf { state: self.state.min(other.state), head: self.head.min(other.head), tape }
    }

    fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.tape.iter().enumerate().flat_map(|(w, bits)| (0..64).filter(move |b| (bits >> b) & 1 == 1).map(move |b| w as u64 * 64 + b))
    }
}

fn meet_all<'c>(mut confs: impl Iterator<Item = &'c Conf>) -> Conf {
    let first = confs.next().expect("a nonempty unit").clone();
    confs.fold(first, |acc, c| acc.meet(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IttmBudget {
    /// Successor steps, or sub-blocks, allowed before a block must repeat.
    pub max_block_len: u64,
    /// Successor steps across the whole run.
    pub max_total_steps: u64,
}

impl Default for IttmBudget {
    fn default() -> Self {
        IttmBudget { max_block_len: 100_000, max_total_steps: 20_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Halted { time: Ordinal, output: BTreeSet<Ordinal> },
    TimeExhausted,
    SpaceViolation(SpaceViolation),
    SimulationUnknown { at: Ordinal, reason: String },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Halted { .. } => "halted",
            Outcome::TimeExhausted => "time-exhausted",
            Outcome::SpaceViolation(_) => "space-violation",
            Outcome::SimulationUnknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IttmError {
    #[error("clocks at or above w^w are not supported: {0}")]
    AlphaUnsupported(Ordinal),
    #[error("initial cell {0} lies outside the space bound")]
    InputOutsideBeta(Ordinal),
    #[error("tape cell {0} is not finite")]
    InfiniteCell(Ordinal),
}

/// Evidence for a limit configuration: trace entries `unit_start..unit_end`
/// form one repeating unit, and entry `unit_end` repeats entry `unit_start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitCertificate {
    pub unit_start: usize,
    pub unit_end: usize,
    pub head: u64,
    pub state: usize,
    /// Liminf of each finite cell up to the longest tape in the unit.
    pub cells: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub config: ItTmConfig,
    /// Present when the time is a limit.
    pub limit: Option<LimitCertificate>,
}

#[derive(Clone, Debug)]
enum Items {
    Confs(Vec<Conf>),
    Subs(Vec<Block>),
}

#[derive(Clone, Debug)]
struct Block {
    level: u32,
    start_time: Ordinal,
    items: Items,
    /// Unit `[i, j)` of items, when the block completed.
    cycle: Option<(usize, usize)>,
    /// Limit configuration, when completed.
    end: Option<Conf>,
}

#[derive(Clone, Debug)]
enum Segment {
    Step(Ordinal, Conf),
    Block(Block),
}

enum BlockEnd {
    Completed { end: Conf, meet: Conf },
    Stopped(Outcome),
}

/// A run: its recorded history and outcome.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub alpha: Ordinal,
    pub beta: Ordinal,
    pub table: LookupTable,
    pub outcome: Outcome,
    /// Cells at infinite positions that hold 1; they never change.
    high: BTreeSet<Ordinal>,
    segments: Vec<Segment>,
    recorded: bool,
    /// Successor steps simulated.
    pub steps: u64,
}

struct Engine<'a> {
    table: &'a LookupTable,
    beta: Option<u64>,
    beta_ord: Ordinal,
    budget: IttmBudget,
    record: bool,
    steps: u64,
}

impl Engine<'_> {
    fn step(&mut self, c: &Conf, time: &Ordinal) -> Result<Conf, Outcome> {
        self.steps += 1;
        let a = self.table.rule(c.state, c.get(c.head));
        let mut next = c.clone();
        next.set(c.head, a.write);
        next.state = a.state;
        match a.mv {
            Move::Stay => {}
            Move::Left => next.head = c.head.saturating_sub(1),
            Move::Right => {
                if self.beta.is_some_and(|b| c.head + 1 >= b) {
                    return Err(Outcome::SpaceViolation(SpaceViolation {
                        time: time.clone(),
                        head: Ordinal::finite(c.head),
                        beta: self.beta_ord.clone(),
                    }));
                }
                next.head += 1;
            }
        }
        Ok(next)
    }

    fn halted(&self, c: &Conf, time: Ordinal, high: &BTreeSet<Ordinal>) -> Outcome {
        let mut output: BTreeSet<Ordinal> = c.ones().map(Ordinal::finite).collect();
        output.extend(high.iter().cloned());
        Outcome::Halted { time, output }
    }

    fn over_budget(&self, at: &Ordinal, what: &str) -> Outcome {
        Outcome::SimulationUnknown { at: at.clone(), reason: format!("no repetition within the {what} budget") }
    }

    fn run_block(&mut self, start: Conf, start_time: Ordinal, level: u32, high: &BTreeSet<Ordinal>) -> (Block, BlockEnd) {
        let mut block = Block { level, start_time: start_time.clone(), items: Items::Confs(Vec::new()), cycle: None, end: None };
        let mut seen: HashMap<Conf, usize> = HashMap::new();
        if level == 1 {
            let mut confs: Vec<Conf> = Vec::new();
            let mut c = start;
            loop {
                let n = confs.len();
                if let Some(&i) = seen.get(&c) {
                    let end = meet_all(confs[i..].iter());
                    let meet = meet_all(confs.iter());
                    block.cycle = Some((i, n));
                    block.end = Some(end.clone());
                    if self.record {
                        block.items = Items::Confs(confs);
                    }
                    return (block, BlockEnd::Completed { end, meet });
                }
                let time = add(&start_time, &Ordinal::finite(n as u64));
                if c.state == self.table.halt() {
                    let out = self.halted(&c, time, high);
                    confs.push(c);
                    if self.record {
                        block.items = Items::Confs(confs);
                    }
                    return (block, BlockEnd::Stopped(out));
                }
                if n as u64 >= self.budget.max_block_len || self.steps >= self.budget.max_total_steps {
                    if self.record {
                        block.items = Items::Confs(confs);
                    }
                    return (block, BlockEnd::Stopped(self.over_budget(&start_time, "step")));
                }
                let next = match self.step(&c, &time) {
                    Ok(next) => next,
                    Err(out) => {
                        confs.push(c);
                        if self.record {
                            block.items = Items::Confs(confs);
                        }
                        return (block, BlockEnd::Stopped(out));
                    }
                };
                seen.insert(c.clone(), n);
                confs.push(c);
                c = next;
            }
        }
        let unit = Ordinal::omega_pow(Ordinal::finite(level as u64 - 1));
        let mut subs: Vec<Block> = Vec::new();
        let mut meets: Vec<Conf> = Vec::new();
        let mut b = start;
        loop {
            let m = meets.len();
            if let Some(&i) = seen.get(&b) {
                let end = meet_all(meets[i..].iter());
                let meet = meet_all(meets.iter());
                block.cycle = Some((i, m));
                block.end = Some(end.clone());
                block.items = Items::Subs(subs);
                return (block, BlockEnd::Completed { end, meet });
            }
            if m as u64 >= self.budget.max_block_len {
                block.items = Items::Subs(subs);
                return (block, BlockEnd::Stopped(self.over_budget(&start_time, "block")));
            }
            seen.insert(b.clone(), m);
            let time = add(&start_time, &unit.mul_nat(m as u64));
            let (sub, result) = self.run_block(b.clone(), time, level - 1, high);
            if self.record {
                subs.push(sub);
            }
            match result {
                BlockEnd::Completed { end, meet } => {
                    meets.push(meet);
                    b = end;
                }
                BlockEnd::Stopped(out) => {
                    block.items = Items::Subs(subs);
                    return (block, BlockEnd::Stopped(out));
                }
            }
        }
    }
}

/// Run `t` for time `α` in space `β` from the tape whose 1-cells are `x`.
/// With `record` off only the outcome is kept.
pub fn ittm_run(
    alpha: &Ordinal,
    beta: &Ordinal,
    x: &BTreeSet<Ordinal>,
    t: &LookupTable,
    budget: IttmBudget,
    record: bool,
) -> Result<RunRecord, IttmError> {
    let terms = alpha.finite_exponents().ok_or_else(|| IttmError::AlphaUnsupported(alpha.clone()))?;
    let mut start = Conf { state: t.start(), head: 0, tape: Vec::new() };
    let mut high = BTreeSet::new();
    for cell in x {
        if cell >= beta {
            return Err(IttmError::InputOutsideBeta(cell.clone()));
        }
        match cell.as_finite() {
            Some(i) => start.set(i, true),
            None => {
                high.insert(cell.clone());
            }
        }
    }
    let mut engine = Engine { table: t, beta: beta.as_finite(), beta_ord: beta.clone(), budget, record, steps: 0 };
    let mut segments = Vec::new();
    let mut time = Ordinal::zero();
    let mut c = start;
    let mut outcome = Outcome::TimeExhausted;
    'terms: for (d, count) in terms {
        for _ in 0..count {
            if d == 0 {
                if c.state == t.halt() {
                    outcome = engine.halted(&c, time.clone(), &high);
                    segments.push(Segment::Step(time.clone(), c.clone()));
                    break 'terms;
                }
                if engine.steps >= budget.max_total_steps {
                    outcome = engine.over_budget(&time, "step");
                    break 'terms;
                }
                let next = engine.step(&c, &time);
                if record {
                    segments.push(Segment::Step(time.clone(), c.clone()));
                }
                match next {
                    Ok(n) => c = n,
                    Err(out) => {
                        outcome = out;
                        break 'terms;
                    }
                }
                time = time.succ();
            } else {
                let (block, end) = engine.run_block(c.clone(), time.clone(), d as u32, &high);
                if record {
                    segments.push(Segment::Block(block));
                }
                match end {
                    BlockEnd::Completed { end, .. } => c = end,
                    BlockEnd::Stopped(out) => {
                        outcome = out;
                        break 'terms;
                    }
                }
                time = add(&time, &Ordinal::omega_pow(Ordinal::finite(d)));
            }
        }
    }
    Ok(RunRecord {
        alpha: alpha.clone(),
        beta: beta.clone(),
        table: t.clone(),
        outcome,
        high,
        segments,
        recorded: record,
        steps: engine.steps,
    })
}

impl RunRecord {
    fn public(&self, c: &Conf, time: Ordinal) -> ItTmConfig {
        let mut tape: BTreeSet<Ordinal> = c.ones().map(Ordinal::finite).collect();
        tape.extend(self.high.iter().cloned());
        ItTmConfig { time, tape, head: Ordinal::finite(c.head), state: c.state }
    }

    fn certificate(&self, start: usize, end: usize, limit: &Conf, trace: &[TraceEntry]) -> LimitCertificate {
        let width = trace[start..end].iter().map(|e| e.config.tape.iter().filter_map(Ordinal::as_finite).max().map_or(0, |m| m + 1)).max().unwrap_or(0);
        LimitCertificate {
            unit_start: start,
            unit_end: end,
            head: limit.head,
            state: limit.state,
            cells: (0..width).map(|i| limit.get(i)).collect(),
        }
    }

    /// Every recorded configuration in time order. A limit entry carries the
    /// certificate for the unit it was computed from; each completed block
    /// ends with an entry repeating the start of its unit.
    ///
    /// # Panics
    /// If the run was not recorded.
    pub fn trace(&self) -> Vec<TraceEntry> {
        assert!(self.recorded, "run was not recorded");
        let mut out = Vec::new();
        let mut pending: Option<(usize, usize, Conf)> = None;
        for seg in &self.segments {
            match seg {
                Segment::Step(time, c) => {
                    self.emit(&mut out, &mut pending, time.clone(), c);
                }
                Segment::Block(b) => self.flatten(b, &mut out, &mut pending),
            }
        }
        out
    }

    fn emit(&self, out: &mut Vec<TraceEntry>, pending: &mut Option<(usize, usize, Conf)>, time: Ordinal, c: &Conf) {
        let limit = pending.take().map(|(s, e, l)| {
            debug_assert_eq!(&l, c);
            self.certificate(s, e, &l, out)
        });
        out.push(TraceEntry { config: self.public(c, time), limit });
    }

    fn flatten(&self, b: &Block, out: &mut Vec<TraceEntry>, pending: &mut Option<(usize, usize, Conf)>) {
        let first = out.len();
        match &b.items {
            Items::Confs(confs) => {
                for (n, c) in confs.iter().enumerate() {
                    let time = add(&b.start_time, &Ordinal::finite(n as u64));
                    self.emit(out, pending, time, c);
                }
                if let Some((i, j)) = b.cycle {
                    // the configuration that closes the cycle
                    let time = add(&b.start_time, &Ordinal::finite(j as u64));
                    let c = confs[i].clone();
                    self.emit(out, pending, time, &c);
                    *pending = Some((first + i, out.len() - 1, b.end.clone().unwrap()));
                }
            }
            Items::Subs(subs) => {
                let mut starts = Vec::new();
                for s in subs {
                    starts.push(out.len());
                    self.flatten(s, out, pending);
                }
                if let Some((i, j)) = b.cycle {
                    let unit = Ordinal::omega_pow(Ordinal::finite(b.level as u64 - 1));
                    let time = add(&b.start_time, &unit.mul_nat(j as u64));
                    let closing = subs[j - 1].end.clone().unwrap();
                    self.emit(out, pending, time, &closing);
                    *pending = Some((starts[i], out.len() - 1, b.end.clone().unwrap()));
                }
            }
        }
    }

    /// The configuration at any time `γ < α` that the run reached, unrolling
    /// repeating units and holding the halting configuration after a halt.
    pub fn config_at(&self, gamma: &Ordinal) -> Option<ItTmConfig> {
        assert!(self.recorded, "run was not recorded");
        if gamma >= &self.alpha {
            return None;
        }
        let halted_at = match &self.outcome {
            Outcome::Halted { time, .. } => Some(time.clone()),
            _ => None,
        };
        if let Some(h) = &halted_at {
            if gamma > h {
                let c = self.config_at(h)?;
                return Some(ItTmConfig { time: gamma.clone(), ..c });
            }
        }
        let seg = self.segments.iter().rev().find(|s| match s {
            Segment::Step(t, _) => t <= gamma,
            Segment::Block(b) => &b.start_time <= gamma,
        })?;
        match seg {
            Segment::Step(t, c) => (t == gamma).then(|| self.public(c, gamma.clone())),
            Segment::Block(b) => {
                let delta = gamma.sub_left(&b.start_time)?;
                block_conf(b, &delta).map(|c| self.public(&c, gamma.clone()))
            }
        }
    }

    /// One line per trace entry: time, state, head, finite tape cells up to
    /// the widest tape, and the unit of a limit entry.
    pub fn dump(&self) -> String {
        let trace = self.trace();
        let width = trace.iter().filter_map(|e| e.config.tape.iter().filter_map(Ordinal::as_finite).max()).max().map_or(1, |m| m + 1);
        let width = match self.beta.as_finite() {
            Some(b) => width.max(b),
            None => width,
        };
        let mut out = String::from("time\tstate\thead\ttape\tlimit\n");
        for e in &trace {
            let tape: String = (0..width).map(|i| if e.config.cell(&Ordinal::finite(i)) { '1' } else { '0' }).collect();
            let limit = e.limit.as_ref().map(|l| format!("unit {}..{}", l.unit_start, l.unit_end)).unwrap_or_default();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.config.time,
                self.table.state_name(e.config.state),
                e.config.head,
                tape,
                limit
            ));
        }
        out.push_str(&format!("outcome\t{}\n", self.outcome.kind()));
        out
    }
}

fn block_conf(b: &Block, delta: &Ordinal) -> Option<Conf> {
    let unroll = |m: usize, len: usize| -> Option<usize> {
        match b.cycle {
            Some((i, j)) if m >= j => Some(i + (m - i) % (j - i)),
            _ if m < len => Some(m),
            _ => None,
        }
    };
    match &b.items {
        Items::Confs(confs) => {
            let n = delta.as_finite()? as usize;
            if b.cycle.is_none() && n >= confs.len() {
                // halted inside this block: the last configuration persists
                return confs.last().cloned();
            }
            confs.get(unroll(n, confs.len())?).cloned()
        }
        Items::Subs(subs) => {
            let d = b.level as u64 - 1;
            let (m, rest) = match delta.terms().first() {
                Some((e, c)) if e.as_finite() == Some(d) => (*c as usize, Ordinal::from_terms(delta.terms()[1..].to_vec())?),
                _ => (0, delta.clone()),
            };
            if b.cycle.is_none() && m >= subs.len() {
                let last = subs.last()?;
                return block_conf(last, &Ordinal::omega_pow(Ordinal::finite(d)));
            }
            block_conf(&subs[unroll(m, subs.len())?], &rest)
        }
    }
}

/// The run packaged as the structure of clock, space, tape, head, state and
/// table.
#[derive(Clone, Debug)]
pub struct NStructure {
    pub record: RunRecord,
}

impl NStructure {
    pub fn t(&self, gamma: &Ordinal, cell: &Ordinal) -> Option<bool> {
        self.record.config_at(gamma).map(|c| c.cell(cell))
    }

    pub fn h(&self, gamma: &Ordinal) -> Option<Ordinal> {
        self.record.config_at(gamma).map(|c| c.head)
    }

    pub fn s(&self, gamma: &Ordinal) -> Option<usize> {
        self.record.config_at(gamma).map(|c| c.state)
    }

    pub fn c(&self, state: usize, symbol: bool) -> Action {
        self.record.table.rule(state, symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Run(#[from] IttmError),
    #[error("run did not complete: {0}")]
    Incomplete(String),
}

pub fn build_n_structure(
    alpha: &Ordinal,
    beta: &Ordinal,
    x: &BTreeSet<Ordinal>,
    t: &LookupTable,
    budget: IttmBudget,
) -> Result<NStructure, BuildError> {
    let record = ittm_run(alpha, beta, x, t, budget, true)?;
    match &record.outcome {
        Outcome::SimulationUnknown { reason, .. } => Err(BuildError::Incomplete(reason.clone())),
        Outcome::SpaceViolation(v) => Err(BuildError::Incomplete(v.to_string())),
        _ => Ok(NStructure { record }),
    }
}

/// Track `t` (0 input, 1 output, 2 parameters) of logical cell `i` lives at
/// physical cell `3i + t`.
pub fn track_cell(track: u64, i: u64) -> u64 {
    3 * i + track
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComputeError {
    #[error(transparent)]
    Run(#[from] IttmError),
    #[error("the machine did not halt: {0}")]
    NoHalt(String),
    #[error("element {0} lies outside the space bound")]
    OutOfRange(u64),
}

/// Run an `α`-ITTM on the interleaved input, output and parameter tracks and
/// read the output track on halting.
pub fn ittm_compute(
    t: &LookupTable,
    input: &BTreeSet<u64>,
    params: &BTreeSet<u64>,
    alpha: &Ordinal,
    beta: &Ordinal,
    budget: IttmBudget,
) -> Result<BTreeSet<u64>, ComputeError> {
    let phys = match beta.as_finite() {
        Some(b) => Ordinal::finite(3 * b),
        None => beta.clone(),
    };
    let mut tape = BTreeSet::new();
    for (track, set) in [(0, input), (2, params)] {
        for &i in set {
            if &Ordinal::finite(i) >= beta {
                return Err(ComputeError::OutOfRange(i));
            }
            tape.insert(Ordinal::finite(track_cell(track, i)));
        }
    }
    let rec = ittm_run(alpha, &phys, &tape, t, budget, false)?;
    match rec.outcome {
        Outcome::Halted { output, .. } => Ok(output.iter().filter_map(Ordinal::as_finite).filter(|c| c % 3 == 1).map(|c| c / 3).collect()),
        other => Err(ComputeError::NoHalt(other.kind().to_string())),
    }
}

/// Copies the input track to the output track, stopping at the cell whose
/// parameter bit is set.
pub fn copy_machine() -> LookupTable {
    "states: s w z k n h
     s,0 -> z,0,RIGHT
     s,1 -> w,1,RIGHT
     z,0 -> k,0,RIGHT
     z,1 -> k,1,RIGHT
     w,0 -> k,1,RIGHT
     w,1 -> k,1,RIGHT
     k,0 -> n,0,RIGHT
     k,1 -> h,1,STAY
     n,0 -> s,0,STAY
     n,1 -> s,1,STAY"
        .parse()
        .unwrap()
}

/// Writes output cell 0 and halts.
pub fn constant_machine() -> LookupTable {
    "states: s a h
     s,0 -> a,0,RIGHT
     s,1 -> a,1,RIGHT
     a,0 -> h,1,STAY
     a,1 -> h,1,STAY"
        .parse()
        .unwrap()
}

/// Flips cell 0 between `b` and `c` forever; at the limit the state is `b`
/// reading 0, which halts.
pub fn blinker() -> LookupTable {
    "states: s b c h
     s,0 -> b,1,STAY
     s,1 -> s,1,STAY
     b,1 -> c,0,STAY
     b,0 -> h,0,STAY
     c,0 -> b,1,STAY
     c,1 -> c,1,STAY"
        .parse()
        .unwrap()
}
