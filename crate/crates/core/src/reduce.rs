//! Fixed-order pairwise summation.
//!
//! The reduction tree depends only on the slice length, so the result is
//! bit-identical whether or not the halves run on different threads.

const LEAF: usize = 64;
const PAR_THRESHOLD: usize = 1 << 15;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    let (a, b) = values.split_at(mid);
    if values.len() >= PAR_THRESHOLD {
        let (x, y) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        x + y
    } else {
        pairwise_sum(a) + pairwise_sum(b)
    }
}
