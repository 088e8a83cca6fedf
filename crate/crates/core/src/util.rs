/// `(1 - p)^x` evaluated as `exp(x·ln(1 - p))`; `x = 0` gives 1 even at `p = 1`.
#[inline]
pub(crate) fn pow_complement(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (x * (-p).ln_1p()).exp()
    }
}

/// `s^x` with `0^0 = 1`.
#[inline]
pub(crate) fn pow_base(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        (x * s.ln()).exp()
    }
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}
