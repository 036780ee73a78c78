use strategia_testkit::{ctb, fen, movegen, oracle, Variant};

#[test]
fn startpos_counts() {
    let s = fen::parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -", 8).unwrap();
    let v = Variant::standard();
    let got: Vec<u64> = (1..=3).map(|d| movegen::perft(&s, &v, d)).collect();
    assert_eq!(got, [20, 400, 8902]);
}

#[test]
fn kiwipete_shallow() {
    let s = fen::parse("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq -", 8).unwrap();
    let v = Variant::standard();
    assert_eq!(movegen::perft(&s, &v, 1), 48);
    assert_eq!(movegen::perft(&s, &v, 2), 2039);
}

#[test]
fn fen_round_trip() {
    for t in ["k3/1p2/2P1/K3 w - -", "r3k2r/8/8/8/4Pp2/8/8/R3K2R b KQk e3"] {
        let w = t.split('/').next().unwrap().chars().map(|c| c.to_digit(10).unwrap_or(1) as usize).sum();
        assert_eq!(fen::format(&fen::parse(t, w).unwrap()), t);
    }
}

#[test]
fn crc_check_value() {
    assert_eq!(ctb::crc32(b"123456789"), 0xCBF4_3926);
}

#[test]
fn oracle_small_facts() {
    let v = Variant::reduced(4, 4);
    let mut o = oracle::Oracle::new(v);
    let values = o.solve_class(&oracle::parse_material("KQvK"));
    assert_eq!(values["k3/1Q2/1K2/4 b - -"], oracle::Value::Loss(0));
    assert_eq!(values["k3/4/1K2/2Q1 w - -"], oracle::Value::Win(1));
    assert_eq!(values["k3/2Q1/1K2/4 b - -"], oracle::Value::Draw);
    assert!(oracle::enumerate(&v, &['K', 'k']).iter().all(|s| s.count_pieces() == 2));
}
