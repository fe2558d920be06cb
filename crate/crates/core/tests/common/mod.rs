//! Instance generators shared by the integration tests.
#![allow(dead_code)]

use ncpick::linalg::{self, c};
use ncpick::realization::{Colligation, ColligationDims, RealizedFunction};
use ncpick::{CMat, NcPoly, Word, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar(x: C64) -> CMat {
    CMat::from_element(1, 1, x)
}

/// A one-row Q0 with no constant term: each column is a random combination
/// of one or two words of length at most two.
pub fn random_q0(rng: &mut ChaCha8Rng, d: usize, r: usize) -> NcPoly {
    let mut terms = Vec::new();
    for col in 0..r {
        for _ in 0..rng.random_range(1..=2) {
            let len = rng.random_range(1..=2);
            let word = Word::new((0..len).map(|_| rng.random_range(1..=d)).collect());
            let mut coef = linalg::zeros(1, r);
            coef[(0, col)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            terms.push((word, coef));
        }
    }
    NcPoly::new(d, 1, r, terms).expect("valid polynomial")
}

/// Row pencil or a random Q0, roughly half each.
pub fn some_q0(rng: &mut ChaCha8Rng, max_d: usize, max_r: usize) -> NcPoly {
    let d = rng.random_range(1..=max_d);
    if rng.random_bool(0.5) {
        NcPoly::row_pencil(d)
    } else {
        let r = rng.random_range(1..=max_r);
        random_q0(rng, d, r)
    }
}

pub fn random_function(rng: &mut ChaCha8Rng, q0: &NcPoly, max_x: usize, max_io: usize) -> RealizedFunction {
    let dims = ColligationDims::new(
        rng.random_range(1..=max_x),
        rng.random_range(1..=max_io),
        rng.random_range(1..=max_io),
        q0.r(),
    );
    let col = Colligation::random(rng, dims, false).expect("colligation");
    RealizedFunction::new(col, q0.clone()).expect("realized function")
}

pub fn jordan(lambda: C64, k: usize) -> CMat {
    CMat::from_fn(k, k, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = linalg::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), b.shape()).copy_from(b);
        off += b.nrows();
    }
    out
}

/// One line per criterion, written past the test harness's output capture.
pub fn report(id: usize, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{verdict} criterion {id:>2} ({name}): {detail}").unwrap();
}
