use std::collections::BTreeSet;

use feedback_cantor::borel::{cup_flat, member, neg_flat, tree_to_flat, BorelCode, Padding};
use feedback_cantor::coding::{pair, str_index, unpair, BitOracle, BitString, InfiniteBitSeq};
use feedback_cantor::compile::{classify, compile_codes, enumerate_triples, sweep_sequences, verify_sweep, Bounds, TripleClass};
use feedback_cantor::feedback::{eval, Budget, NodeStatus, SubcomputationTree, Verdict};
use feedback_cantor::ittm::{ittm_run, IttmBudget, LookupTable, Move, Outcome};
use feedback_cantor::machine::{parse_program, run_finite, FeedbackProgram, FiniteAnswers, FiniteOutcome, Instr, Library};
use feedback_cantor::ordinal::{add, compare, Ordinal};
use feedback_cantor::structenc::{atom_at, atom_index, encode, fixtures, tuple_code, tuple_decode, Presentation};
use feedback_cantor::Exec;
use proptest::prelude::*;

fn bits(max: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bits)
}

fn seq() -> impl Strategy<Value = InfiniteBitSeq> {
    (bits(5), any::<bool>(), bits(3)).prop_map(|(p, b, pat)| {
        if pat.is_empty() {
            InfiniteBitSeq::constant(p, b)
        } else {
            InfiniteBitSeq::periodic(p, pat).unwrap()
        }
    })
}

fn code() -> impl Strategy<Value = BorelCode> {
    let leaf = bits(3).prop_map(BorelCode::basic);
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(BorelCode::compl),
            (prop::collection::vec(inner, 1..=3), any::<bool>()).prop_map(|(cs, last)| {
                BorelCode::union(cs, if last { Padding::RepeatLast } else { Padding::Empty }).unwrap()
            }),
        ]
    })
}

fn instr(len: usize) -> impl Strategy<Value = Instr> {
    let r = 0..4usize;
    prop_oneof![
        r.clone().prop_map(Instr::Inc),
        r.clone().prop_map(Instr::Dec),
        (r.clone(), 0..len).prop_map(|(a, t)| Instr::Jz(a, t)),
        (r.clone(), r.clone()).prop_map(|(addr, dst)| Instr::Oracle1 { addr, dst }),
        (r.clone(), r.clone()).prop_map(|(addr, dst)| Instr::Oracle2 { addr, dst }),
        (r.clone(), r.clone(), r.clone()).prop_map(|(prog, input, dst)| Instr::HaltQ { prog, input, dst }),
        r.prop_map(Instr::Output),
        Just(Instr::Halt),
    ]
}

fn program() -> impl Strategy<Value = FeedbackProgram> {
    (1usize..8).prop_flat_map(|len| prop::collection::vec(instr(len), len)).prop_map(|v| FeedbackProgram::with_bound(v, Some(6)).unwrap())
}

fn library() -> impl Strategy<Value = Library> {
    prop::collection::vec(program(), 1..=3).prop_map(|ps| {
        let mut lib = Library::new();
        for (i, p) in ps.into_iter().enumerate() {
            lib.push(format!("p{i}"), p);
        }
        lib
    })
}

fn ordinal() -> impl Strategy<Value = Ordinal> {
    prop::collection::vec((0u64..4, 1u64..4), 0..4).prop_map(|mut ts| {
        ts.sort_by_key(|t| std::cmp::Reverse(t.0));
        ts.dedup_by_key(|t| t.0);
        Ordinal::from_terms(ts.into_iter().map(|(e, c)| (Ordinal::finite(e), c)).collect()).unwrap()
    })
}

fn answers_agree(t: &SubcomputationTree) -> bool {
    t.children.iter().all(|c| {
        let ok = match c.status {
            NodeStatus::Halted { .. } => c.status.answer().is_some_and(|a| !a.bit()),
            NodeStatus::Diverged => c.status.answer().is_some_and(|a| a.bit()),
            _ => c.status.answer().is_none(),
        };
        ok && answers_agree(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pairing_is_a_bijection(m in 0u64..1 << 20, n in 0u64..1 << 20, k in 0u64..1 << 40) {
        prop_assert_eq!(unpair(pair(m, n)), (m, n));
        let (a, b) = unpair(k);
        prop_assert_eq!(pair(a, b), k);
    }

    #[test]
    fn string_index_round_trip(s in bits(20)) {
        prop_assert_eq!(str_index(s.index()), s.clone());
        prop_assert_eq!(s.to_string().parse::<BitString>().unwrap(), s);
    }

    #[test]
    fn sequences_follow_their_tail(y in seq(), k in 0u64..64) {
        let plen = y.prefix().len() as u64;
        let text: InfiniteBitSeq = y.to_string().parse().unwrap();
        prop_assert_eq!(text.take(80), y.take(80));
        if k < plen {
            prop_assert_eq!(y.get(k), y.prefix().get(k as usize).unwrap());
        } else {
            let period = (1..=4).find(|&p| (0..12).all(|i| y.get(plen + i) == y.get(plen + i + p)));
            prop_assert!(period.is_some());
        }
        prop_assert_eq!(y.bit(k), y.get(k));
    }

    #[test]
    fn program_text_round_trip(p in program()) {
        prop_assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn evaluation_is_deterministic_and_coherent(lib in library(), y in seq(), n in 0u64..3) {
        let x = InfiniteBitSeq::zeros();
        let b = Budget::new(6, 2_000, 50_000);
        let (v1, t1) = eval(&lib, 0, &x, &y, n, b);
        let (v2, t2) = eval(&lib, 0, &x, &y, n, b);
        prop_assert_eq!(&v1, &v2);
        prop_assert_eq!(&t1, &t2);
        prop_assert!(answers_agree(&t1));
        if let Verdict::Converges { height, .. } = v1 {
            prop_assert_eq!(height, t1.height());
        }
    }

    #[test]
    fn flat_sub_code_equations(c in code(), n in 0u64..64, m in 0u64..4) {
        let f = tree_to_flat(&c);
        let b = Budget::default();
        prop_assert_eq!(f.plus().at(n, &b).unwrap(), f.at(n + 1, &b).unwrap());
        if f.at(0, &b).unwrap() == 1 {
            prop_assert_eq!(f.component(m).at(n, &b).unwrap(), f.at(pair(m, n) + 1, &b).unwrap());
        }
        let g = cup_flat(&[neg_flat(&f)]);
        prop_assert_eq!(g.component(0).plus().at(n, &b).unwrap(), f.at(n, &b).unwrap());
    }

    #[test]
    fn code_text_round_trip(c in code(), y in seq()) {
        let back: BorelCode = c.to_string().parse().unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(member(&back, &y), member(&c, &y));
    }

    #[test]
    fn ordinal_normal_form(a in ordinal(), b in ordinal()) {
        let s = add(&a, &b);
        prop_assert!(Ordinal::from_terms(s.terms().to_vec()).is_some());
        prop_assert_eq!(compare(&a, &b), compare(&b, &a).reverse());
        prop_assert_eq!(s.to_string().parse::<Ordinal>().unwrap(), s.clone());
        prop_assert_eq!(s.sub_left(&a), Some(b.clone()));
        prop_assert_eq!(a.is_limit(), !a.is_zero() && a.pred().is_none());
    }

    #[test]
    fn tuple_codes_round_trip(args in prop::collection::vec(0u64..40, 0..4)) {
        prop_assert_eq!(tuple_decode(tuple_code(&args), args.len()), Some(args.clone()));
        let lang = fixtures::cyclic(4).language().clone();
        if args.len() == 3 {
            let k = atom_index(&lang, 1, &args);
            prop_assert_eq!(atom_at(&lang, k), (1, Some(args)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn triples_are_valid_and_classified(p in program()) {
        let lib = Library::single(p);
        let x = InfiniteBitSeq::zeros();
        for t in enumerate_triples(&lib, 0, 0, &x, 2, 6, 2) {
            let run = run_finite(lib.get(0), 0, &x, &FiniteAnswers::new(t.eta.clone(), t.nu.clone()), t.k);
            let invalid = matches!(run.outcome, FiniteOutcome::InvalidCall { .. });
            prop_assert!(!invalid);
            let halts = matches!(run.outcome, FiniteOutcome::HaltedWithin { .. });
            prop_assert_eq!(matches!(classify(&lib, &t, 0, 0, &x), TripleClass::Halts { .. }), halts);
        }
    }

    #[test]
    fn sequential_and_parallel_sweeps_agree(lib in library()) {
        let x = InfiniteBitSeq::zeros();
        let bounds = Bounds { l: 3, k: 24, v: 16 };
        if let Ok(codes) = compile_codes(&lib, 0, 0, &BitString::new(), &Ordinal::finite(2), &x, bounds) {
            let a = verify_sweep(&lib, 0, 0, &x, &codes, 3, Budget::default(), Exec::Sequential);
            let b = verify_sweep(&lib, 0, 0, &x, &codes, 3, Budget::default(), Exec::Parallel);
            prop_assert_eq!(a.to_tsv(), b.to_tsv());
            prop_assert!(a.mismatches().is_empty(), "{}", a.to_tsv());
        }
    }

    #[test]
    fn compiled_codes_grow_with_alpha_and_outputs_are_disjoint(lib in library()) {
        let x = InfiniteBitSeq::zeros();
        let bounds = Bounds { l: 3, k: 24, v: 16 };
        let codes: Vec<_> = (0..3)
            .filter_map(|a| compile_codes(&lib, 0, 0, &BitString::new(), &Ordinal::finite(a), &x, bounds).ok())
            .collect();
        for y in sweep_sequences(3) {
            for w in codes.windows(2) {
                prop_assert!(!member(&w[0].down, &y) || member(&w[1].down, &y));
                prop_assert!(!member(&w[0].up, &y) || member(&w[1].up, &y));
            }
            for c in &codes {
                let hits = (0..8).filter(|&j| member(&c.down_at(j), &y)).count();
                prop_assert!(hits <= 1);
                prop_assert_eq!(hits == 1, member(&c.down, &y));
                prop_assert!(!(member(&c.down, &y) && member(&c.up, &y)));
            }
        }
    }

    #[test]
    fn halt_rules_are_forced(i in 0usize..144, cells in prop::collection::btree_set(0u64..8, 0..4)) {
        let t = &LookupTable::all_over(&["s", "h"])[i];
        for z in [false, true] {
            let a = t.rule(t.halt(), z);
            prop_assert_eq!((a.state, a.write, a.mv), (t.halt(), z, Move::Stay));
        }
        prop_assert_eq!(t.to_text().parse::<LookupTable>().unwrap(), t.clone());
        let x: BTreeSet<Ordinal> = cells.iter().map(|&c| Ordinal::finite(c)).collect();
        let r = ittm_run(&"w*3+1".parse().unwrap(), &Ordinal::finite(8), &x, t, IttmBudget::default(), false).unwrap();
        let unknown = matches!(r.outcome, Outcome::SimulationUnknown { .. });
        prop_assert!(!unknown);
    }

    #[test]
    fn encoding_bits_match_the_accessor(k in 0u64..4000, n in 2u64..6) {
        let p: Presentation = fixtures::cyclic_with_inverse(n);
        let lang = p.language().clone();
        let bit = encode(&p).unwrap().bit(k);
        match atom_at(&lang, k) {
            (slot, Some(args)) => prop_assert_eq!(bit, p.atom(slot, &args).unwrap()),
            (_, None) => prop_assert!(!bit),
        }
    }
}
