use permqubo::bench::permutation_cost;
use permqubo::instances::{
    parse_qaplib, parse_tsplib, random_instance, write_qaplib, write_tsplib, EdgeWeightSource,
    ProblemInstance, ProblemKind,
};
use permqubo::oracle::{brute_force_permutation, brute_force_qubo};
use permqubo::penalty::{all_weights, flip_bounds, gamma, mqc, ub, vlm, BoundConvention, Method};
use permqubo::qubo::{
    apply_flip, build_constraint, build_pair, combine, decode, encode, evaluate, init_fields,
    LayoutKind, QuboModel, VariableLayout,
};
use proptest::prelude::*;

const CONVENTIONS: [BoundConvention; 2] = [BoundConvention::UpperRow, BoundConvention::Incident];

fn instance() -> impl Strategy<Value = ProblemInstance> {
    (any::<bool>(), 0u64..10_000, 1i64..100).prop_flat_map(|(tsp, seed, max)| {
        let (kind, lo) = if tsp {
            (ProblemKind::Tsp, 3usize)
        } else {
            (ProblemKind::Qap, 2usize)
        };
        (lo..=6).prop_map(move |n| random_instance(kind, n, seed, max).unwrap())
    })
}

fn small_instance() -> impl Strategy<Value = ProblemInstance> {
    (any::<bool>(), 0u64..10_000, 1i64..30).prop_flat_map(|(tsp, seed, max)| {
        let (kind, lo, hi) = if tsp {
            (ProblemKind::Tsp, 3usize, 5usize)
        } else {
            (ProblemKind::Qap, 2, 4)
        };
        (lo..=hi).prop_map(move |n| random_instance(kind, n, seed, max).unwrap())
    })
}

/// Dense reference: `sum_{r,c} Q[r][c] x_r x_c + k` over the stored triangle.
fn dense_energy(q: &QuboModel, x: &[bool]) -> i64 {
    let m = q.m();
    let mut e = q.constant();
    for r in 0..m {
        for c in 0..m {
            if x[r] && x[c] {
                e += q.entry(r, c);
            }
        }
    }
    e
}

fn random_model(m_rows: usize, vals: &[i64]) -> QuboModel {
    let layout = VariableLayout::qap(m_rows);
    let mut q = QuboModel::zeros(layout);
    let m = layout.m();
    let mut k = 0;
    for r in 0..m {
        for c in r..m {
            q.add_term(r, c, vals[k % vals.len()]).unwrap();
            k += 1;
        }
    }
    q
}

fn shuffled(n: usize, keys: &[u32], fix_first: bool) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    let start = fix_first as usize;
    p[start..].sort_by_key(|&i| keys[i % keys.len()].wrapping_mul(i as u32 + 7));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constraint_is_nonnegative_even_and_zero_iff_feasible(
        n in 2usize..5,
        tsp in any::<bool>(),
        bits in proptest::collection::vec(any::<bool>(), 16),
    ) {
        let layout = if tsp { VariableLayout::tsp(n + 1) } else { VariableLayout::qap(n) };
        let g = build_constraint(layout).unwrap();
        let x = &bits[..layout.m()];
        let e = evaluate(&g, x).unwrap();
        prop_assert!(e >= 0 && e % 2 == 0);
        prop_assert_eq!(e == 0, decode(&layout, x).is_some());
    }

    #[test]
    fn feasible_energy_is_permutation_cost(
        inst in instance(),
        keys in proptest::collection::vec(any::<u32>(), 8),
        alpha in 1i64..1000,
    ) {
        let (c, g) = build_pair(&inst).unwrap();
        let perm = shuffled(inst.n(), &keys, inst.kind() == ProblemKind::Tsp);
        let x = encode(c.layout(), &perm).unwrap();
        let cost = permutation_cost(&inst, &perm).unwrap();
        prop_assert_eq!(evaluate(&c, &x).unwrap(), cost);
        prop_assert_eq!(evaluate(&combine(&c, &g, alpha).unwrap(), &x).unwrap(), cost);
        prop_assert_eq!(decode(c.layout(), &x), Some(perm));
    }

    #[test]
    fn combine_is_linear(
        inst in instance(),
        alpha in 1i64..10_000,
        seed in any::<u64>(),
    ) {
        let (c, g) = build_pair(&inst).unwrap();
        let q = combine(&c, &g, alpha).unwrap();
        let m = c.m();
        let x: Vec<bool> = (0..m).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
        prop_assert_eq!(
            evaluate(&q, &x).unwrap(),
            evaluate(&c, &x).unwrap() + alpha * evaluate(&g, &x).unwrap()
        );
    }

    #[test]
    fn evaluate_matches_dense_reference(
        n in 1usize..4,
        vals in proptest::collection::vec(-50i64..50, 1..40),
        bits in proptest::collection::vec(any::<bool>(), 9),
        k in -100i64..100,
    ) {
        let mut q = random_model(n, &vals);
        q.add_constant(k).unwrap();
        let x = &bits[..q.m()];
        prop_assert_eq!(evaluate(&q, x).unwrap(), dense_energy(&q, x));
    }

    #[test]
    fn incremental_flips_track_full_evaluation(
        n in 1usize..5,
        vals in proptest::collection::vec(-100i64..100, 1..60),
        start in proptest::collection::vec(any::<bool>(), 16),
        flips in proptest::collection::vec(0usize..16, 1..200),
    ) {
        let q = random_model(n, &vals);
        let m = q.m();
        let x = &start[..m];
        let mut f = init_fields(&q, x).unwrap();
        let mut e = evaluate(&q, x).unwrap();
        for j in flips.into_iter().map(|j| j % m) {
            let before = f.x()[j];
            let delta = apply_flip(&q, &mut f, j).unwrap();
            prop_assert_eq!(f.x()[j], !before);
            e += delta;
            prop_assert_eq!(e, evaluate(&q, f.x()).unwrap());
        }
    }

    #[test]
    fn text_and_json_round_trips(inst in instance()) {
        let (c, _) = build_pair(&inst).unwrap();
        prop_assert_eq!(&QuboModel::from_text(&c.to_text(), *c.layout()).unwrap(), &c);
        let env = c.to_envelope();
        let back: permqubo::qubo::QuboEnvelope =
            serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
        prop_assert_eq!(QuboModel::from_envelope(&back).unwrap(), c);
    }

    #[test]
    fn instance_files_round_trip(inst in instance()) {
        match &inst {
            ProblemInstance::Tsp(t) => {
                for layout in [
                    EdgeWeightSource::ExplicitFull,
                    EdgeWeightSource::ExplicitUpperRow,
                    EdgeWeightSource::ExplicitLowerDiagRow,
                    EdgeWeightSource::ExplicitUpperDiagRow,
                ] {
                    let back = parse_tsplib(&write_tsplib(t, layout).unwrap()).unwrap();
                    prop_assert_eq!(&back.dist, &t.dist);
                }
            }
            ProblemInstance::Qap(q) => {
                let back = parse_qaplib(&write_qaplib(q)).unwrap();
                prop_assert_eq!(&back.flow, &q.flow);
                prop_assert_eq!(&back.dist, &q.dist);
            }
        }
    }

    #[test]
    fn weights_are_clamped_ordered_and_consistent(inst in instance()) {
        let (c, g) = build_pair(&inst).unwrap();
        for conv in CONVENTIONS {
            let r = all_weights(&c, &g, conv).unwrap();
            for m in Method::ALL {
                prop_assert!(r.get(m) >= 1);
            }
            prop_assert_eq!(r.gamma, 2);
            prop_assert_eq!(r.momc, (r.vlm + 1) / 2);
            prop_assert!(r.moc <= r.momc && r.momc <= r.vlm && r.vlm <= r.ub);
            prop_assert!(r.mqc <= r.vlm);
            prop_assert!(r.bounds_g.down.iter().all(|&d| d == 2));
        }
    }

    #[test]
    fn bounds_scale_linearly(inst in instance(), s in 1i64..50) {
        let (c, g) = build_pair(&inst).unwrap();
        let cs = c.scaled(s).unwrap();
        for conv in CONVENTIONS {
            let (b, bs) = (flip_bounds(&c, conv).unwrap(), flip_bounds(&cs, conv).unwrap());
            prop_assert!(b.iter_all().zip(bs.iter_all()).all(|(v, w)| w == s * v));
            let raw_vlm = b.iter_all().max().unwrap();
            if raw_vlm >= 1 {
                prop_assert_eq!(vlm(&cs, conv).unwrap(), s * raw_vlm);
            }
            let r = all_weights(&c, &g, conv).unwrap();
            let rs = all_weights(&cs, &g, conv).unwrap();
            // ceilings: |ceil(s*a/b) - s*ceil(a/b)| < s
            prop_assert!((rs.momc - s * r.momc).abs() < s);
            prop_assert!((rs.moc - s * r.moc).abs() < s.max(1));
        }
        let total: i64 = c.coefficients().iter().sum();
        if total >= 1 {
            prop_assert_eq!(ub(&cs).unwrap(), s * total);
        }
        let top = *c.coefficients().iter().max().unwrap();
        if top >= 1 {
            prop_assert_eq!(mqc(&cs), s * top);
        }
        prop_assert_eq!(gamma(&g.scaled(s).unwrap(), BoundConvention::UpperRow).unwrap(), 2 * s);
    }

    #[test]
    fn valid_weights_make_the_qubo_optimum_feasible(inst in small_instance()) {
        let (c, g) = build_pair(&inst).unwrap();
        let (_, best) = brute_force_permutation(&inst).unwrap();
        let r = all_weights(&c, &g, BoundConvention::UpperRow).unwrap();
        for alpha in [r.ub, r.vlm] {
            let q = combine(&c, &g, alpha).unwrap();
            let (x, e) = brute_force_qubo(&q).unwrap();
            prop_assert_eq!(e, best);
            // a tie may pick an infeasible vector; the feasible minimizer
            // exists at the same energy
            if let Some(p) = decode(c.layout(), &x) {
                prop_assert_eq!(permutation_cost(&inst, &p).unwrap(), best);
            }
        }
    }
}

#[test]
fn constraint_matches_definition_on_every_small_vector() {
    for layout in [
        VariableLayout::qap(2),
        VariableLayout::qap(3),
        VariableLayout::tsp(4),
        VariableLayout {
            rows: 2,
            cols: 3,
            kind: LayoutKind::QapFull,
        },
    ] {
        let g = build_constraint(layout).unwrap();
        let m = layout.m();
        for bits in 0u32..(1 << m) {
            let x: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
            let mut direct = 0i64;
            for r in 0..layout.rows {
                let s: i64 = (0..layout.cols).map(|c| x[layout.index(r, c)] as i64).sum();
                direct += (1 - s).pow(2);
            }
            for c in 0..layout.cols {
                let s: i64 = (0..layout.rows).map(|r| x[layout.index(r, c)] as i64).sum();
                direct += (1 - s).pow(2);
            }
            assert_eq!(evaluate(&g, &x).unwrap(), direct);
        }
    }
}

#[test]
fn one_flip_from_feasible_costs_two() {
    let layout = VariableLayout::qap(4);
    let g = build_constraint(layout).unwrap();
    let x = encode(&layout, &[2, 0, 3, 1]).unwrap();
    for j in 0..layout.m() {
        let mut y = x.clone();
        y[j] = !y[j];
        assert_eq!(evaluate(&g, &y).unwrap(), 2);
    }
}

#[test]
fn exhaustive_decode_agrees_with_constraint_on_2x2() {
    let layout = VariableLayout::qap(2);
    let g = build_constraint(layout).unwrap();
    for bits in 0u32..16 {
        let x: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
        assert_eq!(
            evaluate(&g, &x).unwrap() == 0,
            decode(&layout, &x).is_some()
        );
    }
}

#[test]
fn brute_force_energy_equals_permutation_optimum() {
    for seed in 0..10 {
        for (kind, n) in [
            (ProblemKind::Tsp, 4),
            (ProblemKind::Qap, 3),
            (ProblemKind::Tsp, 5),
        ] {
            let inst = random_instance(kind, n, seed, 40).unwrap();
            let (c, g) = build_pair(&inst).unwrap();
            let r = all_weights(&c, &g, BoundConvention::UpperRow).unwrap();
            let (_, best) = brute_force_permutation(&inst).unwrap();
            let (_, e) = brute_force_qubo(&combine(&c, &g, r.momc).unwrap()).unwrap();
            assert_eq!(e, best, "{kind} n={n} seed={seed}");
        }
    }
}
