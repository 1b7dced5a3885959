//! Shared test support: a deterministic RNG, a brute-force evaluator for
//! formulas (the oracle the solver is checked against), generators for the
//! oracle formula family, and independent reference implementations of
//! projection and typing used by the erasure-commutation suites.
//!
//! Everything here is deliberately written as directly as possible and
//! never calls into the code paths it is checking.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod plain;
pub mod schema;

/// Splitmix64: small, deterministic, good enough for generating test data.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.next_u64() % 100 < percent
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[(self.next_u64() % items.len() as u64) as usize]
    }
}

pub fn buyer_seller_text() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/protocols/buyer_seller.gp"))
        .unwrap()
}

pub fn guessing_game_text() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/protocols/guessing_game.gp"))
        .unwrap()
}
