//! A small macro assembler for machine programs.
//!
//! Every macro expands to the base instruction set; nothing here extends what
//! a program can do, it only saves writing unary arithmetic by hand. Fixture
//! programs for the structure harnesses are built with it.

use crate::machine::{FeedbackProgram, Instr, ProgramError, Reg};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Label(usize);

#[derive(Clone, Copy, Debug)]
enum Op {
    Plain(Instr),
    Jz(Reg, Label),
}

/// Program builder with symbolic labels and register allocation.
///
/// Register `r0` holds the input. A dedicated register that is never written
/// backs unconditional jumps.
#[derive(Debug)]
pub struct Asm {
    ops: Vec<Op>,
    labels: Vec<Option<usize>>,
    next_reg: Reg,
    zero: Reg,
}

impl Default for Asm {
    fn default() -> Self {
        Self::new()
    }
}

impl Asm {
    pub fn new() -> Self {
        Asm { ops: Vec::new(), labels: Vec::new(), next_reg: 2, zero: 1 }
    }

    pub const INPUT: Reg = 0;

    pub fn reg(&mut self) -> Reg {
        let r = self.next_reg;
        self.next_reg += 1;
        r
    }

    pub fn label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, l: Label) {
        assert!(self.labels[l.0].is_none(), "label bound twice");
        self.labels[l.0] = Some(self.ops.len());
    }

    pub fn here(&mut self) -> Label {
        let l = self.label();
        self.bind(l);
        l
    }

    fn push(&mut self, i: Instr) {
        self.ops.push(Op::Plain(i));
    }

    pub fn inc(&mut self, r: Reg) {
        self.push(Instr::Inc(r));
    }

    pub fn dec(&mut self, r: Reg) {
        self.push(Instr::Dec(r));
    }

    pub fn jz(&mut self, r: Reg, l: Label) {
        self.ops.push(Op::Jz(r, l));
    }

    pub fn jmp(&mut self, l: Label) {
        let z = self.zero;
        self.jz(z, l);
    }

    pub fn oracle1(&mut self, addr: Reg, dst: Reg) {
        self.push(Instr::Oracle1 { addr, dst });
    }

    pub fn oracle2(&mut self, addr: Reg, dst: Reg) {
        self.push(Instr::Oracle2 { addr, dst });
    }

    pub fn haltq(&mut self, prog: Reg, input: Reg, dst: Reg) {
        self.push(Instr::HaltQ { prog, input, dst });
    }

    pub fn output(&mut self, r: Reg) {
        self.push(Instr::Output(r));
    }

    pub fn halt(&mut self) {
        self.push(Instr::Halt);
    }

    /// Output `r` and halt.
    pub fn ret(&mut self, r: Reg) {
        self.output(r);
        self.halt();
    }

    /// Output the constant `k` and halt.
    pub fn ret_const(&mut self, k: u64) {
        let r = self.reg();
        self.set(r, k);
        self.ret(r);
    }

    /// Jump to `l` when `r` is nonzero.
    pub fn jnz(&mut self, r: Reg, l: Label) {
        let skip = self.label();
        self.jz(r, skip);
        self.jmp(l);
        self.bind(skip);
    }

    pub fn clear(&mut self, r: Reg) {
        let top = self.here();
        let done = self.label();
        self.jz(r, done);
        self.dec(r);
        self.jmp(top);
        self.bind(done);
    }

    pub fn set(&mut self, r: Reg, k: u64) {
        self.clear(r);
        for _ in 0..k {
            self.inc(r);
        }
    }

    /// `dst += src`, emptying `src`.
    fn drain_into(&mut self, src: Reg, dsts: &[Reg]) {
        let top = self.here();
        let done = self.label();
        self.jz(src, done);
        self.dec(src);
        for &d in dsts {
            self.inc(d);
        }
        self.jmp(top);
        self.bind(done);
    }

    /// `dst += src`, preserving `src`.
    pub fn add(&mut self, dst: Reg, src: Reg) {
        assert_ne!(dst, src);
        let t = self.reg();
        self.clear(t);
        self.drain_into(src, &[dst, t]);
        self.drain_into(t, &[src]);
    }

    pub fn copy(&mut self, dst: Reg, src: Reg) {
        if dst == src {
            return;
        }
        self.clear(dst);
        self.add(dst, src);
    }

    /// `dst -= src` (saturating), preserving `src`.
    pub fn sub(&mut self, dst: Reg, src: Reg) {
        assert_ne!(dst, src);
        let t = self.reg();
        self.copy(t, src);
        let top = self.here();
        let done = self.label();
        self.jz(t, done);
        self.dec(t);
        self.dec(dst);
        self.jmp(top);
        self.bind(done);
    }

    /// `dst = a * b`, preserving both.
    pub fn mul(&mut self, dst: Reg, a: Reg, b: Reg) {
        assert!(dst != a && dst != b);
        let t = self.reg();
        self.clear(dst);
        self.copy(t, b);
        let top = self.here();
        let done = self.label();
        self.jz(t, done);
        self.dec(t);
        self.add(dst, a);
        self.jmp(top);
        self.bind(done);
    }

    /// Jump to `l` when `a == b`.
    pub fn jeq(&mut self, a: Reg, b: Reg, l: Label) {
        let (x, y) = (self.reg(), self.reg());
        self.copy(x, a);
        self.copy(y, b);
        let top = self.here();
        let x_zero = self.label();
        let ne = self.label();
        self.jz(x, x_zero);
        self.jz(y, ne);
        self.dec(x);
        self.dec(y);
        self.jmp(top);
        self.bind(x_zero);
        self.jz(y, l);
        self.bind(ne);
    }

    /// Jump to `l` when `a == k`.
    pub fn jeq_const(&mut self, a: Reg, k: u64, l: Label) {
        let c = self.reg();
        self.set(c, k);
        self.jeq(a, c, l);
    }

    /// Jump to `l` when `a < b`.
    pub fn jlt(&mut self, a: Reg, b: Reg, l: Label) {
        let (x, y) = (self.reg(), self.reg());
        self.copy(x, a);
        self.copy(y, b);
        let top = self.here();
        let x_zero = self.label();
        let ge = self.label();
        self.jz(y, ge);
        self.jz(x, x_zero);
        self.dec(x);
        self.dec(y);
        self.jmp(top);
        self.bind(x_zero);
        // x == 0 < y
        self.jmp(l);
        self.bind(ge);
    }

    /// `dst = pair(m, n)` (Cantor pairing).
    pub fn pair(&mut self, dst: Reg, m: Reg, n: Reg) {
        let s = self.reg();
        let k = self.reg();
        self.copy(s, m);
        self.add(s, n);
        // dst = 1 + 2 + … + s
        self.clear(dst);
        self.copy(k, s);
        let top = self.here();
        let done = self.label();
        self.jz(k, done);
        self.add(dst, k);
        self.dec(k);
        self.jmp(top);
        self.bind(done);
        self.add(dst, n);
    }

    /// `(a, b) = unpair(k)`.
    pub fn unpair(&mut self, a: Reg, b: Reg, k: Reg) {
        // step through the pairs in code order: (m, n) is followed by
        // (m - 1, n + 1), and (0, n) by (n + 1, 0)
        assert!(a != b && a != k && b != k);
        let t = self.reg();
        self.copy(t, k);
        self.clear(a);
        self.clear(b);
        let top = self.here();
        let done = self.label();
        let wrap = self.label();
        self.jz(t, done);
        self.dec(t);
        self.jz(a, wrap);
        self.dec(a);
        self.inc(b);
        self.jmp(top);
        self.bind(wrap);
        self.drain_into(b, &[a]);
        self.inc(a);
        self.jmp(top);
        self.bind(done);
    }

    /// `dst = k * src`.
    pub fn mul_const(&mut self, dst: Reg, src: Reg, k: u64) {
        assert_ne!(dst, src);
        self.clear(dst);
        for _ in 0..k {
            self.add(dst, src);
        }
    }

    /// `q = n div k`, `r = n mod k` for a constant `k > 0`.
    pub fn divmod_const(&mut self, q: Reg, r: Reg, n: Reg, k: u64) {
        assert!(k > 0);
        let t = self.reg();
        self.copy(t, n);
        self.clear(q);
        self.clear(r);
        let top = self.here();
        let done = self.label();
        let wrap = self.label();
        self.jz(t, done);
        self.dec(t);
        self.inc(r);
        self.jeq_const(r, k, wrap);
        self.jmp(top);
        self.bind(wrap);
        self.clear(r);
        self.inc(q);
        self.jmp(top);
        self.bind(done);
    }

    /// Loop forever in place.
    pub fn spin(&mut self) {
        let l = self.here();
        self.jmp(l);
    }

    /// `dst = pair(a, pair(b, c))`, the triple code.
    pub fn triple(&mut self, dst: Reg, a: Reg, b: Reg, c: Reg) {
        let t = self.reg();
        self.pair(t, b, c);
        self.pair(dst, a, t);
    }

    pub fn finish(self) -> Result<FeedbackProgram, ProgramError> {
        self.finish_with_bound(Some(crate::machine::DEFAULT_REGISTER_BOUND))
    }

    pub fn finish_with_bound(self, bound: Option<u64>) -> Result<FeedbackProgram, ProgramError> {
        let end = self.ops.len();
        let mut instrs: Vec<Instr> = self
            .ops
            .iter()
            .map(|op| match *op {
                Op::Plain(i) => i,
                Op::Jz(r, l) => Instr::Jz(r, self.labels[l.0].expect("unbound label")),
            })
            .collect();
        // a label bound at the very end points at a trailing HALT
        if instrs.iter().any(|i| matches!(i, Instr::Jz(_, t) if *t == end)) {
            instrs.push(Instr::Halt);
        }
        FeedbackProgram::with_bound(instrs, bound)
    }
}
