//! Shared perft positions.

pub struct PerftCase {
    pub name: &'static str,
    pub fen: &'static str,
    pub width: usize,
    pub height: usize,
    /// Published counts for depths 1..=4 where they exist.
    pub reference: Option<[u64; 4]>,
}

pub const PERFT_SUITE: [PerftCase; 10] = [
    PerftCase {
        name: "start",
        fen: "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
        width: 8,
        height: 8,
        reference: Some([20, 400, 8902, 197281]),
    },
    PerftCase {
        name: "kiwipete",
        fen: "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
        width: 8,
        height: 8,
        reference: Some([48, 2039, 97862, 4085603]),
    },
    PerftCase {
        name: "rook-pawn",
        fen: "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
        width: 8,
        height: 8,
        reference: Some([14, 191, 2812, 43238]),
    },
    PerftCase {
        name: "promotions",
        fen: "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
        width: 8,
        height: 8,
        reference: Some([6, 264, 9467, 422333]),
    },
    PerftCase {
        name: "discovered",
        fen: "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
        width: 8,
        height: 8,
        reference: Some([44, 1486, 62379, 2103487]),
    },
    PerftCase {
        name: "middlegame",
        fen: "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
        width: 8,
        height: 8,
        reference: Some([46, 2079, 89890, 3894594]),
    },
    PerftCase { name: "gardner", fen: "rnbqk/ppppp/5/PPPPP/RNBQK w - - 0 1", width: 5, height: 5, reference: None },
    PerftCase { name: "six", fen: "r1k2r/pppppp/6/6/PPPPPP/R1K2R w - - 0 1", width: 6, height: 6, reference: None },
    PerftCase { name: "tiny", fen: "k3/1p2/2P1/K3 w - - 0 1", width: 4, height: 4, reference: None },
    PerftCase { name: "narrow", fen: "4k/1p3/5/2P2/5/K2R1 w - - 0 1", width: 5, height: 6, reference: None },
];
