//! Deterministic compensated summation.
//!
//! Trace synthesis adds ~1e5 oscillating terms per sample; plain left-to-right
//! accumulation loses digits and, worse, changes under re-chunking. The block
//! pairwise tree below is fixed by index order only, so results are identical
//! across thread counts and reruns.

/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const BLOCK: usize = 256;

/// Sum `f(i)` for `i in 0..n` with compensated block sums combined by a
/// fixed pairwise tree. Deterministic for fixed `n` and `f`.
pub fn pairwise_sum_by<F: FnMut(usize) -> f64>(n: usize, mut f: F) -> f64 {
    let mut blocks = Vec::with_capacity(n / BLOCK + 1);
    let mut i = 0;
    while i < n {
        let end = (i + BLOCK).min(n);
        let mut acc = Compensated::new();
        for j in i..end {
            acc.add(f(j));
        }
        blocks.push(acc.value());
        i = end;
    }
    pairwise_combine(&blocks)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

fn pairwise_combine(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_combine(&xs[..mid]) + pairwise_combine(&xs[mid..])
        }
    }
}
