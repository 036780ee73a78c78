use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strategia::dynamics::{divergence, path_or_start, perturbations};
use strategia::encoding::{decode, delta, encode, expected_delta_entries, reconstructable, EncodingMode};
use strategia::evalprobe::{fit_evaluator, Dataset, FeatureSet};
use strategia::rules::random::{random_placement, random_playout};
use strategia::rules::{apply_move, legal_moves, BoardSpec, Position};
use strategia::strategy::{g_control, generate_path};
use strategia::tablebase::{index, solve_with, unindex, MaterialClass, SolveOptions, Tablebase};

fn kqk() -> &'static Tablebase {
    static TB: OnceLock<Tablebase> = OnceLock::new();
    TB.get_or_init(|| {
        let mc = MaterialClass::parse("KQvK", BoardSpec::sized(5, 5).unwrap()).unwrap();
        solve_with(&mc, &SolveOptions { workers: 1, mem_budget_mb: 512 }).unwrap()
    })
}

fn position(seed: u64, kind: u8) -> Position {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind % 3 {
        0 => {
            let start = strategia::rules::parse_fen(
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
                &BoardSpec::standard(),
            )
            .unwrap();
            random_playout(&mut rng, &start, (seed % 90) as usize)
        }
        1 => {
            let (w, h) = (3 + (seed % 6) as u8, 3 + ((seed / 7) % 6) as u8);
            random_placement(&mut rng, &BoardSpec::sized(w, h).unwrap(), 6)
        }
        _ => random_placement(&mut rng, &BoardSpec::standard(), 10),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn encode_decode_round_trip(seed in any::<u64>(), kind in 0u8..3, augmented in any::<bool>()) {
        let p = position(seed, kind);
        let mode = if augmented { EncodingMode::Augmented } else { EncodingMode::Strict };
        let v = encode(&p, mode);
        let side = (!augmented).then(|| p.side_to_move());
        let back = decode(&v, side).unwrap();
        prop_assert!(back.same_state(&reconstructable(&p)), "{:?} vs {:?}", back, p);
        prop_assert_eq!(back.pieces().collect::<Vec<_>>(), p.pieces().collect::<Vec<_>>());
        prop_assert_eq!((back.side_to_move(), back.ep_square()), (p.side_to_move(), p.ep_square()));
    }

    #[test]
    fn deltas_are_sparse_and_antisymmetric(seed in any::<u64>(), kind in 0u8..3) {
        let p = position(seed, kind);
        let a = encode(&p, EncodingMode::Augmented);
        for m in legal_moves(&p).unwrap() {
            let q = apply_move(&p, m).unwrap();
            let b = encode(&q, EncodingMode::Augmented);
            let d = delta(&a, &b).unwrap();
            prop_assert!((2..=5).contains(&d.entries.len()));
            prop_assert_eq!(d.entries.len(), expected_delta_entries(&p, m, &q));
            prop_assert_eq!(d.side.map(i8::abs), Some(2));
            prop_assert!(d.entries.iter().all(|&(_, x)| x != 0));
            prop_assert_eq!(delta(&b, &a).unwrap(), d.negated());
            prop_assert_eq!(a.apply(&d), b);
        }
    }

    #[test]
    fn index_is_a_bijection(i in 0u64..(2 * 25 * 25 * 25)) {
        let tb = kqk();
        let mc = tb.material();
        match unindex(i, mc) {
            Some(p) => prop_assert_eq!(index(&p, mc).unwrap(), i),
            None => prop_assert_eq!(tb.entry(i), strategia::tablebase::Entry::Invalid),
        }
    }

    #[test]
    fn paths_descend_and_satisfy_the_control_identity(pick in any::<prop::sample::Index>()) {
        let tb = kqk();
        let decisive = tb.decisive_indices();
        let p = tb.position(decisive[pick.index(decisive.len())]).unwrap();
        let path = generate_path(&p, tb, EncodingMode::Augmented).unwrap();
        prop_assert_eq!(path.plies() as u16, tb.probe(&p).unwrap().dtm.unwrap());
        for n in 0..path.plies() {
            let x = path.vector(n);
            let g = g_control(x, tb, None).unwrap();
            prop_assert_eq!(&x.apply(&g), path.vector(n + 1));
            // same vector, same displacement: g depends on x alone
            let again = encode(&strategia::encoding::decode(x, None).unwrap(), EncodingMode::Augmented);
            prop_assert_eq!(g_control(&again, tb, None).unwrap(), g);
            prop_assert_eq!(tb.probe(path.position(n + 1)).unwrap().dtm.unwrap() + 1, path.dtm(n).unwrap());
        }
    }

    #[test]
    fn divergence_is_symmetric(pick in any::<prop::sample::Index>()) {
        let tb = kqk();
        let decisive = tb.decisive_indices();
        let base = tb.position(decisive[pick.index(decisive.len())]).unwrap();
        let a = generate_path(&base, tb, EncodingMode::Strict).unwrap();
        for q in perturbations(&base) {
            prop_assert!(q.perturbed.validate().is_ok());
            let b = path_or_start(&q.perturbed, tb, EncodingMode::Strict).unwrap();
            let ab = divergence(&a, &b).unwrap();
            let ba = divergence(&b, &a).unwrap();
            prop_assert_eq!(&ab.d_series, &ba.d_series);
            prop_assert_eq!(&ab.hamming_series, &ba.hamming_series);
            prop_assert!(ab.d_series[0] > 0.0);
            prop_assert!(ab.check(&a, &b).is_ok());
        }
    }

    #[test]
    fn nested_least_squares_never_raises_squared_error(seed in any::<u64>()) {
        let tb = kqk();
        let idx = strategia::dynamics::sample_decisive(tb, 400, seed).unwrap();
        let ds = Dataset::from_indices(tb, &idx, &FeatureSet::chain()).unwrap();
        let mut last = f64::INFINITY;
        for c in 0..=16 {
            let m = fit_evaluator(&ds, c).unwrap();
            let sse: f64 = ds.rows.iter().zip(&ds.dtm).map(|(x, d)| (m.predict_dtm(x) - d).powi(2)).sum();
            prop_assert!(sse <= last * (1.0 + 1e-9) + 1e-9, "capacity {}: {} > {}", c, sse, last);
            last = sse;
        }
    }
}
