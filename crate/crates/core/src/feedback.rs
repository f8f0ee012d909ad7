//! The feedback evaluator.
//!
//! Halting queries are resolved by evaluating the queried computation
//! depth-first at the moment the query is made, which materializes the tree
//! of subcomputations. Every definite verdict carries a checkable
//! certificate:
//!
//! * `Converges`: the run halted; the tree records every query answer.
//! * `Diverges`: two step indices with identical machine state. The machine
//!   is deterministic and answers to repeated queries are fixed, so the run
//!   repeats forever.
//! * `Freezes`: a query path on which some pair repeats. Membership in the
//!   least fixed point is well-founded, so such a pair cannot be in it.
//!
//! Anything else is `Unknown`, naming the budget that ran out. A query about
//! a computation whose verdict is `Unknown` makes the querier `Unknown` too.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::coding::{pair, BitOracle, BitString, InfiniteBitSeq};
use crate::exec::Exec;
use crate::machine::{
    step_mut, AnswerProvider, FeedbackProgram, FiniteAnswers, HaltAnswer, Library, MachineState, Query, StepStatus,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Budget {
    /// Deepest allowed subcomputation, the root being at depth 0.
    pub max_depth: u32,
    /// Steps allowed to each individual run.
    pub max_steps: u64,
    /// Configurations visited across the whole tree.
    pub max_configs: u64,
}

impl Budget {
    pub fn new(max_depth: u32, max_steps: u64, max_configs: u64) -> Self {
        assert!(max_depth > 0 && max_steps > 0 && max_configs > 0, "budgets must be positive");
        Budget { max_depth, max_steps, max_configs }
    }

    /// Pointwise comparison.
    pub fn le(&self, other: &Budget) -> bool {
        self.max_depth <= other.max_depth && self.max_steps <= other.max_steps && self.max_configs <= other.max_configs
    }

    pub fn scaled(&self, factor: u64) -> Budget {
        Budget {
            max_depth: self.max_depth.saturating_mul(factor as u32),
            max_steps: self.max_steps.saturating_mul(factor),
            max_configs: self.max_configs.saturating_mul(factor),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 16, max_steps: 200_000, max_configs: 20_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BudgetKind {
    Depth,
    Steps,
    Configs,
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetKind::Depth => "depth",
            BudgetKind::Steps => "steps",
            BudgetKind::Configs => "configs",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCertificate {
    /// Steps completed when the state was first seen.
    pub first: u64,
    /// Steps completed when it was seen again.
    pub second: u64,
    pub state: MachineState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreezeCertificate {
    /// `(program, input)` pairs from the root down; the last one repeats an
    /// earlier entry.
    pub path: Vec<(u64, u64)>,
}

impl FreezeCertificate {
    pub fn repeat_index(&self) -> Option<usize> {
        let last = self.path.last()?;
        self.path[..self.path.len() - 1].iter().position(|p| p == last)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converges { value: u64, steps: u64, height: u64 },
    Diverges(CycleCertificate),
    Freezes(FreezeCertificate),
    Unknown(BudgetKind),
}

impl Verdict {
    pub fn is_definite(&self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }

    pub fn value(&self) -> Option<u64> {
        match self {
            Verdict::Converges { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Same outcome, ignoring certificates' incidental detail.
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Converges { .. } => "converges",
            Verdict::Diverges(_) => "diverges",
            Verdict::Freezes(_) => "freezes",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Halted { value: u64, steps: u64 },
    Diverged,
    Frozen,
    Unknown(BudgetKind),
}

impl NodeStatus {
    pub fn answer(&self) -> Option<HaltAnswer> {
        match self {
            NodeStatus::Halted { .. } => Some(HaltAnswer::Halts),
            NodeStatus::Diverged => Some(HaltAnswer::Diverges),
            _ => None,
        }
    }
}

/// The tree of subcomputations: the root computation and, in query order,
/// the distinct computations its run asked about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubcomputationTree {
    pub root: (u64, u64),
    pub status: NodeStatus,
    pub children: Vec<Arc<SubcomputationTree>>,
}

impl SubcomputationTree {
    pub fn height(&self) -> u64 {
        tree_height(self)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// The answers this node's run received, as a halting-answer string long
    /// enough to cover every query.
    pub fn answer_string(&self) -> BitString {
        let mut bits: Vec<bool> = Vec::new();
        for c in &self.children {
            if let Some(a) = c.status.answer() {
                let k = pair(c.root.0, c.root.1) as usize;
                if bits.len() <= k {
                    bits.resize(k + 1, false);
                }
                bits[k] = a.bit();
            }
        }
        BitString::from_bits(bits)
    }

    /// Indented dump, one node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(0, &mut out);
        out
    }

    fn dump_into(&self, indent: usize, out: &mut String) {
        let (e, n) = self.root;
        let tag = match self.status {
            NodeStatus::Halted { value, steps } => format!("↓{value}@{steps}"),
            NodeStatus::Diverged => "↑".to_string(),
            NodeStatus::Frozen => "FREEZE".to_string(),
            NodeStatus::Unknown(k) => format!("UNKNOWN({k})"),
        };
        out.push_str(&format!("{}({e},{n}) {tag}\n", "  ".repeat(indent)));
        for c in &self.children {
            c.dump_into(indent + 1, out);
        }
    }
}

/// 0 for a leaf, otherwise one more than the tallest child.
pub fn tree_height(t: &SubcomputationTree) -> u64 {
    t.children.iter().map(|c| tree_height(c) + 1).max().unwrap_or(0)
}

#[derive(Clone, Debug)]
struct Evaluated {
    verdict: Verdict,
    tree: Arc<SubcomputationTree>,
    /// Configurations visited in this subtree.
    configs: u64,
}

/// Evaluates feedback computations over a fixed library and oracle pair.
///
/// The optional memo caches definite converge/diverge results per
/// `(program, input)`; a cached result is reused only when a fresh evaluation
/// at the current position would fit the same budgets, so results are
/// identical with and without it.
pub struct Evaluator<'a, X: BitOracle, Y: BitOracle> {
    lib: &'a Library,
    x: &'a X,
    y: &'a Y,
    budget: Budget,
    memo: Option<HashMap<(u64, u64), Evaluated>>,
}

impl<'a, X: BitOracle, Y: BitOracle> Evaluator<'a, X, Y> {
    pub fn new(lib: &'a Library, x: &'a X, y: &'a Y, budget: Budget) -> Self {
        Evaluator { lib, x, y, budget, memo: None }
    }

    pub fn with_memo(mut self) -> Self {
        self.memo = Some(HashMap::new());
        self
    }

    pub fn eval(&mut self, e: u64, n: u64) -> (Verdict, SubcomputationTree) {
        let mut path = vec![(e, n)];
        let mut used = 0;
        let r = self.eval_node(e, n, &mut path, &mut used);
        (r.verdict, Arc::unwrap_or_clone(r.tree))
    }

    fn eval_node(&mut self, e: u64, n: u64, path: &mut Vec<(u64, u64)>, used: &mut u64) -> Evaluated {
        let depth = (path.len() - 1) as u64;
        if let Some(hit) = self.memo.as_ref().and_then(|m| m.get(&(e, n))) {
            if depth + hit.tree.height() <= self.budget.max_depth as u64 && *used + hit.configs <= self.budget.max_configs {
                *used += hit.configs;
                return hit.clone();
            }
        }
        let start_used = *used;
        let result = self.run_node(e, n, path, used);
        if let Some(memo) = self.memo.as_mut() {
            if matches!(result.verdict, Verdict::Converges { .. } | Verdict::Diverges(_)) {
                let mut stored = result.clone();
                stored.configs = *used - start_used;
                memo.insert((e, n), stored);
            }
        }
        Evaluated { configs: *used - start_used, ..result }
    }

    fn run_node(&mut self, e: u64, n: u64, path: &mut Vec<(u64, u64)>, used: &mut u64) -> Evaluated {
        let program: &FeedbackProgram = self.lib.get(e);
        let mut state = program.initial(n);
        let mut answers: HashMap<(u64, u64), HaltAnswer> = HashMap::new();
        let mut children: Vec<Arc<SubcomputationTree>> = Vec::new();

        // Brent's cycle detection against a snapshot moved at powers of two.
        let mut snapshot = state.clone();
        let mut snapshot_step = 0u64;
        let mut power = 1u64;
        let mut lam = 0u64;
        let mut steps = 0u64;

        let finish = |status: NodeStatus, verdict: Verdict, children: Vec<Arc<SubcomputationTree>>| Evaluated {
            verdict,
            tree: Arc::new(SubcomputationTree { root: (e, n), status, children }),
            configs: 0,
        };

        loop {
            if steps >= self.budget.max_steps {
                return finish(NodeStatus::Unknown(BudgetKind::Steps), Verdict::Unknown(BudgetKind::Steps), children);
            }
            if *used >= self.budget.max_configs {
                return finish(NodeStatus::Unknown(BudgetKind::Configs), Verdict::Unknown(BudgetKind::Configs), children);
            }
            let provider = RunAnswers { x: self.x, y: self.y, answers: &answers };
            match step_mut(program, &mut state, &provider) {
                StepStatus::Continue => {}
                StepStatus::Halted(value) => {
                    steps += 1;
                    *used += 1;
                    let tree = SubcomputationTree { root: (e, n), status: NodeStatus::Halted { value, steps }, children };
                    let height = tree_height(&tree);
                    return Evaluated { verdict: Verdict::Converges { value, steps, height }, tree: Arc::new(tree), configs: 0 };
                }
                StepStatus::Pending(Query::Halting { prog, input }) => {
                    if path.contains(&(prog, input)) {
                        let mut cert = path.clone();
                        cert.push((prog, input));
                        children.push(Arc::new(SubcomputationTree {
                            root: (prog, input),
                            status: NodeStatus::Frozen,
                            children: Vec::new(),
                        }));
                        return finish(NodeStatus::Frozen, Verdict::Freezes(FreezeCertificate { path: cert }), children);
                    }
                    if path.len() as u64 > self.budget.max_depth as u64 {
                        return finish(NodeStatus::Unknown(BudgetKind::Depth), Verdict::Unknown(BudgetKind::Depth), children);
                    }
                    path.push((prog, input));
                    let child = self.eval_node(prog, input, path, used);
                    path.pop();
                    children.push(child.tree.clone());
                    match child.verdict {
                        Verdict::Converges { .. } => {
                            answers.insert((prog, input), HaltAnswer::Halts);
                        }
                        Verdict::Diverges(_) => {
                            answers.insert((prog, input), HaltAnswer::Diverges);
                        }
                        Verdict::Freezes(cert) => return finish(NodeStatus::Frozen, Verdict::Freezes(cert), children),
                        Verdict::Unknown(k) => return finish(NodeStatus::Unknown(k), Verdict::Unknown(k), children),
                    }
                    continue;
                }
                StepStatus::Pending(q) => unreachable!("oracle query {q:?} left unanswered"),
            }
            steps += 1;
            *used += 1;
            if state == snapshot {
                let cert = CycleCertificate { first: snapshot_step, second: steps, state: state.clone() };
                let tree = SubcomputationTree { root: (e, n), status: NodeStatus::Diverged, children };
                return Evaluated { verdict: Verdict::Diverges(cert), tree: Arc::new(tree), configs: 0 };
            }
            lam += 1;
            if lam == power {
                snapshot.clone_from(&state);
                snapshot_step = steps;
                power *= 2;
                lam = 0;
            }
        }
    }
}

struct RunAnswers<'r, X, Y> {
    x: &'r X,
    y: &'r Y,
    answers: &'r HashMap<(u64, u64), HaltAnswer>,
}

impl<X: BitOracle, Y: BitOracle> AnswerProvider for RunAnswers<'_, X, Y> {
    fn oracle1(&self, k: u64) -> Option<bool> {
        Some(self.x.bit(k))
    }

    fn oracle2(&self, k: u64) -> Option<bool> {
        Some(self.y.bit(k))
    }

    fn halting(&self, prog: u64, input: u64) -> Option<HaltAnswer> {
        self.answers.get(&(prog, input)).copied()
    }
}

/// Evaluate `⟨e⟩^{X,Y}(n)` within budget `b`.
pub fn eval(lib: &Library, e: u64, x: &impl BitOracle, y: &impl BitOracle, n: u64, b: Budget) -> (Verdict, SubcomputationTree) {
    Evaluator::new(lib, x, y, b).eval(e, n)
}

/// Answers recorded in a tree, packaged for [`crate::machine::run_finite`]
/// together with the first `eta_len` bits of `y`.
pub fn replay_answers(tree: &SubcomputationTree, y: &InfiniteBitSeq, eta_len: usize) -> FiniteAnswers {
    FiniteAnswers::new(y.take(eta_len), tree.answer_string())
}

/// Re-run the root computation up to the certificate's second index using
/// the tree's answers and check the two states agree.
pub fn check_cycle_certificate(
    lib: &Library,
    tree: &SubcomputationTree,
    x: &impl BitOracle,
    y: &impl BitOracle,
    cert: &CycleCertificate,
) -> bool {
    let (e, n) = tree.root;
    let program = lib.get(e);
    let mut answers = HashMap::new();
    for c in &tree.children {
        match c.status.answer() {
            Some(a) => {
                answers.insert(c.root, a);
            }
            None => return false,
        }
    }
    let provider = RunAnswers { x, y, answers: &answers };
    let mut state = program.initial(n);
    let mut first = None;
    for t in 0..=cert.second {
        if t == cert.first {
            first = Some(state.clone());
        }
        if t == cert.second {
            break;
        }
        if step_mut(program, &mut state, &provider) != StepStatus::Continue {
            return false;
        }
    }
    cert.first < cert.second && first.as_ref() == Some(&state) && state == cert.state
}

/// Check that a freeze certificate is a root-to-node path in `tree` whose last
/// pair repeats an earlier one on the path.
pub fn check_freeze_certificate(tree: &SubcomputationTree, cert: &FreezeCertificate) -> bool {
    if cert.repeat_index().is_none() || cert.path.first() != Some(&tree.root) {
        return false;
    }
    let mut node = tree;
    for &pair in &cert.path[1..] {
        match node.children.iter().find(|c| c.root == pair) {
            Some(c) => node = c,
            None => return false,
        }
    }
    node.status == NodeStatus::Frozen
}

/// Per-point results of running `e` as a transducer `Y ↦ f(Y)`.
#[derive(Clone, Debug)]
pub struct FunSample {
    pub y: InfiniteBitSeq,
    pub points: Vec<(u64, Verdict)>,
}

impl FunSample {
    /// Every sampled point converged to a bit.
    pub fn total_boolean(&self) -> bool {
        self.points.iter().all(|(_, v)| matches!(v.value(), Some(0 | 1)))
    }

    pub fn bits(&self) -> Option<BitString> {
        self.points.iter().map(|(_, v)| v.value().filter(|&b| b <= 1).map(|b| b == 1)).collect::<Option<Vec<_>>>().map(BitString::from_bits)
    }
}

/// `n ↦ ⟨e⟩^{X,Y}(n)` for each requested `n`, sharing one memo.
pub fn eval_fun(lib: &Library, e: u64, x: &impl BitOracle, y: &InfiniteBitSeq, ns: &[u64], b: Budget) -> FunSample {
    let mut ev = Evaluator::new(lib, x, y, b).with_memo();
    let points = ns.iter().map(|&n| (n, ev.eval(e, n).0)).collect();
    FunSample { y: y.clone(), points }
}

#[derive(Clone, Debug)]
pub struct FunReport {
    pub samples: Vec<FunSample>,
}

impl FunReport {
    /// The program is total with `{0,1}` values on every sampled `(Y, n)`.
    pub fn total_on_sample(&self) -> bool {
        self.samples.iter().all(FunSample::total_boolean)
    }
}

pub fn eval_fun_sample(
    lib: &Library,
    e: u64,
    x: &impl BitOracle,
    ys: &[InfiniteBitSeq],
    ns: &[u64],
    b: Budget,
    exec: Exec,
) -> FunReport {
    FunReport { samples: exec.map(ys, |y| eval_fun(lib, e, x, y, ns, b)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::Asm;
    use crate::machine::{parse_program, run_finite, FiniteOutcome};

    fn lib(progs: &[(&str, &str)]) -> Library {
        let mut lib = Library::new();
        for (name, text) in progs {
            lib.push(*name, parse_program(text).unwrap());
        }
        lib
    }

    const LOOP: &str = "INC r0\nJZ r1 0";

    /// HALTQ about (e_loop = 1, 0); output the answer bit (1 = ↑).
    const ASK: &str = "INC r1\nHALTQ r1 r2 -> r3\nOUTPUT r3\nHALT";

    /// First instruction queries (0, n): itself when stored at index 0.
    const SELF: &str = "HALTQ r1 r0 -> r2\nHALT";

    fn zeros() -> InfiniteBitSeq {
        InfiniteBitSeq::zeros()
    }

    #[test]
    fn loop_diverges_with_cycle() {
        let l = lib(&[("loop", LOOP)]);
        let (v, t) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::default());
        let Verdict::Diverges(cert) = &v else { panic!("{v:?}") };
        assert!(check_cycle_certificate(&l, &t, &zeros(), &zeros(), cert));
        assert_eq!(tree_height(&t), 0);
    }

    #[test]
    fn ask_converges_with_height_one() {
        let l = lib(&[("ask", ASK), ("loop", LOOP)]);
        let (v, t) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::default());
        assert!(matches!(v, Verdict::Converges { value: 1, height: 1, .. }), "{v:?}");
        assert_eq!(t.children.len(), 1);
        assert_eq!(t.children[0].status, NodeStatus::Diverged);
        assert_eq!(tree_height(&t), 1);
        assert_eq!(t.dump(), "(0,0) ↓1@4\n  (1,0) ↑\n");
    }

    #[test]
    fn self_query_freezes() {
        let l = lib(&[("self", SELF)]);
        for n in 0..3 {
            let (v, t) = eval(&l, 0, &zeros(), &zeros(), n, Budget::default());
            let Verdict::Freezes(cert) = &v else { panic!("{v:?}") };
            assert_eq!(cert.path, vec![(0, n), (0, n)]);
            assert!(check_freeze_certificate(&t, cert));
        }
    }

    #[test]
    fn mutual_freeze_through_two_programs() {
        // 0 asks about (1, n); 1 asks about (0, n).
        let l = lib(&[("a", "INC r1\nHALTQ r1 r0 -> r2\nHALT"), ("b", "HALTQ r1 r0 -> r2\nHALT")]);
        let (v, t) = eval(&l, 0, &zeros(), &zeros(), 2, Budget::default());
        let Verdict::Freezes(cert) = &v else { panic!("{v:?}") };
        assert_eq!(cert.path, vec![(0, 2), (1, 2), (0, 2)]);
        assert!(check_freeze_certificate(&t, cert));
        assert!(t.dump().contains("FREEZE"));
    }

    /// chain[i] queries chain[i+1] on the same input; the last one halts.
    fn chain(k: usize) -> Library {
        let mut l = Library::new();
        for i in 0..k {
            let mut a = Asm::new();
            let (p, d) = (a.reg(), a.reg());
            a.set(p, i as u64 + 1);
            a.haltq(p, Asm::INPUT, d);
            a.halt();
            l.push(format!("c{i}"), a.finish().unwrap());
        }
        l.push("leaf", parse_program("HALT").unwrap());
        l
    }

    #[test]
    fn chain_height() {
        for k in 0..5 {
            let l = chain(k);
            let (v, t) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::default());
            assert!(matches!(v, Verdict::Converges { height, .. } if height == k as u64), "{v:?}");
            assert_eq!(tree_height(&t), k as u64);
        }
        let leaf = SubcomputationTree { root: (0, 0), status: NodeStatus::Frozen, children: vec![] };
        assert_eq!(tree_height(&leaf), 0);
    }

    #[test]
    fn depth_budget_gives_unknown_not_freeze() {
        let l = chain(6);
        let (v, _) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::new(3, 1000, 100_000));
        assert_eq!(v, Verdict::Unknown(BudgetKind::Depth));
        let (v, _) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::new(6, 1000, 100_000));
        assert!(matches!(v, Verdict::Converges { height: 6, .. }));
    }

    #[test]
    fn step_and_config_budgets() {
        let l = lib(&[("loop", LOOP)]);
        assert_eq!(eval(&l, 0, &zeros(), &zeros(), 0, Budget::new(4, 10, 1000)).0, Verdict::Unknown(BudgetKind::Steps));
        assert_eq!(eval(&l, 0, &zeros(), &zeros(), 0, Budget::new(4, 10_000, 10)).0, Verdict::Unknown(BudgetKind::Configs));
    }

    #[test]
    fn replaying_tree_answers_reproduces_output() {
        let l = lib(&[("ask", ASK), ("loop", LOOP)]);
        let (v, t) = eval(&l, 0, &zeros(), &zeros(), 0, Budget::default());
        let Verdict::Converges { value, steps, .. } = v else { panic!() };
        let r = run_finite(l.get(0), 0, &zeros(), &replay_answers(&t, &zeros(), 8), steps);
        assert_eq!(r.outcome, FiniteOutcome::HaltedWithin { steps, output: value });
    }

    #[test]
    fn memo_is_transparent() {
        // asks about the loop twice via different inputs, and a chain
        let mut l = chain(3);
        let mut a = Asm::new();
        let (p, i, d) = (a.reg(), a.reg(), a.reg());
        a.set(p, 0);
        a.haltq(p, i, d);
        a.inc(i);
        a.haltq(p, i, d);
        a.clear(i);
        a.haltq(p, i, d);
        a.ret(d);
        let top = l.push("top", a.finish().unwrap());
        for b in [Budget::new(2, 1000, 100_000), Budget::new(4, 1000, 100_000), Budget::new(4, 1000, 40)] {
            let plain = Evaluator::new(&l, &zeros(), &zeros(), b).eval(top, 0);
            let memo = Evaluator::new(&l, &zeros(), &zeros(), b).with_memo().eval(top, 0);
            assert_eq!(plain, memo);
        }
    }

    #[test]
    fn transducers() {
        let l = lib(&[
            ("id", "ORACLE2 r0 -> r1\nOUTPUT r1\nHALT"),
            ("zero", "HALT"),
            ("flip", "ORACLE2 r0 -> r1\nJZ r1 3\nHALT\nINC r2\nOUTPUT r2\nHALT"),
        ]);
        let ys: Vec<InfiniteBitSeq> = ["|c:0", "|c:1", "10|p:01", "0110|c:1"].iter().map(|s| s.parse().unwrap()).collect();
        let ns: Vec<u64> = (0..4).collect();
        let b = Budget::default();
        let id = eval_fun_sample(&l, 0, &zeros(), &ys, &ns, b, Exec::Sequential);
        assert!(id.total_on_sample());
        for s in &id.samples {
            assert_eq!(s.bits().unwrap(), s.y.take(4));
        }
        let zero = eval_fun_sample(&l, 1, &zeros(), &ys, &ns, b, Exec::Parallel);
        for s in &zero.samples {
            assert_eq!(s.bits().unwrap().to_string(), "0000");
        }
        // 4 sequences × 4 positions = 16 sampled (Y, n)
        let flip = eval_fun_sample(&l, 2, &zeros(), &ys, &ns, b, Exec::Parallel);
        for s in &flip.samples {
            for (n, v) in &s.points {
                assert_eq!(v.value(), Some(1 - s.y.get(*n) as u64));
            }
        }
        let looping = lib(&[("loop", LOOP)]);
        assert!(!eval_fun_sample(&looping, 0, &zeros(), &ys, &ns, b, Exec::Sequential).total_on_sample());
    }
}
