use std::collections::BTreeSet;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use feedback_cantor::coding::{BitString, InfiniteBitSeq};
use feedback_cantor::compile::{compile_codes, verify_sweep, Bounds};
use feedback_cantor::feedback::Budget;
use feedback_cantor::ittm::{ittm_run, IttmBudget, LookupTable};
use feedback_cantor::machine::parse_library;
use feedback_cantor::ordinal::Ordinal;
use feedback_cantor::structenc::{check_reduction_sample, fixtures, HarnessConfig, Permutation};
use feedback_cantor::Exec;

const CHAIN: &str = "=== main
INC r1
HALTQ r1 r2 -> r3
OUTPUT r3
HALT
=== mid
INC r1
INC r1
HALTQ r1 r2 -> r3
JZ r3 spin
HALT
spin: JZ r9 spin
=== leaf
INC r1
ORACLE2 r1 -> r2
JZ r2 spin
HALT
spin: JZ r9 spin";

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sweep(c: &mut Criterion) {
    let lib = parse_library(CHAIN).unwrap();
    let x = InfiniteBitSeq::zeros();
    let codes = compile_codes(&lib, 0, 0, &BitString::new(), &Ordinal::finite(3), &x, Bounds { l: 6, k: 64, v: 64 }).unwrap();
    let mut g = c.benchmark_group("verify_sweep");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "L=6"), |b| {
            b.iter(|| verify_sweep(&lib, 0, 0, &x, &codes, 6, Budget::default(), exec))
        });
    }
    g.finish();
}

fn harness(c: &mut Criterion) {
    let lib = fixtures::quotient();
    let p0 = fixtures::cyclic_with_subgroup(4, &[0, 2]);
    let p1 = fixtures::cyclic(2);
    let perms: Vec<Permutation> = ["()", "(0 1)", "(0 3)(1 5)", "(2 4)", "(0 1 2 3 4 5)"].iter().map(|s| s.parse().unwrap()).collect();
    let mut g = c.benchmark_group("harness");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = HarnessConfig { exec, ..Default::default() };
        g.bench_function(BenchmarkId::new(name, "quotient"), |b| {
            b.iter(|| check_reduction_sample(&lib, 0, &p0, &p1, &perms, &cfg).unwrap())
        });
    }
    g.finish();
}

fn ittm_totality(c: &mut Criterion) {
    let tables = LookupTable::all_over(&["s", "h"]);
    let alpha: Ordinal = "w^2*2+w*3+4".parse().unwrap();
    let beta = Ordinal::finite(8);
    let mut g = c.benchmark_group("ittm_totality");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "144 tables"), |b| {
            b.iter(|| exec.map(&tables, |t| ittm_run(&alpha, &beta, &BTreeSet::new(), t, IttmBudget::default(), false).unwrap().outcome))
        });
    }
    g.finish();
}

criterion_group!(benches, sweep, harness, ittm_totality);
criterion_main!(benches);
