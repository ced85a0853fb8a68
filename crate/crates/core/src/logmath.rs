//! Base-2 log-domain helpers.

/// log₂(2^a + 2^b) without leaving the log domain.
#[inline]
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// log₂ Σ 2^xᵢ over a slice; −∞ for an empty slice.
pub fn log2_sum(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp2()).sum();
    max + s.log2()
}

/// Logistic function in base 2: 1 / (1 + 2^−x).
#[inline]
pub fn sigmoid2(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp2())
    } else {
        let e = x.exp2();
        e / (1.0 + e)
    }
}
