//! Small numeric utilities shared across the crate.

pub mod geom {
    //! Dense d-dimensional vector helpers over `&[f64]` slices.

    #[inline]
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let mut s = 0.0;
        for k in 0..a.len() {
            s += a[k] * b[k];
        }
        s
    }

    #[inline]
    pub fn norm2(a: &[f64]) -> f64 {
        dot(a, a)
    }

    #[inline]
    pub fn norm(a: &[f64]) -> f64 {
        norm2(a).sqrt()
    }

    #[inline]
    pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let mut s = 0.0;
        for k in 0..a.len() {
            let d = a[k] - b[k];
            s += d * d;
        }
        s
    }

    #[inline]
    pub fn dist(a: &[f64], b: &[f64]) -> f64 {
        dist2(a, b).sqrt()
    }

    /// Sign with an exact zero at ties, unlike `f64::signum`.
    #[inline]
    pub fn sign0(x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

/// Visits every multi-index of `shape` in row-major order (last axis fastest).
pub fn for_each_multi_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.is_empty() || shape.iter().any(|&s| s == 0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut k = shape.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// 4-point Gauss-Legendre rule on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.34785484513745385,
    0.6521451548625461,
    0.6521451548625461,
    0.34785484513745385,
];

/// Deterministic stream-splitting for seeded experiments: mixes a base seed
/// with up to two indices so each (n, trial) pair gets an independent stream.
#[inline]
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const CHUNK_BITS: u32 = 32;
const CHUNK_MASK: u64 = (1 << CHUNK_BITS) - 1;
/// Bit offset added to the lsb exponent so every finite f64 lands at a
/// non-negative bit position (smallest denormal lsb is 2^-1074).
const EXP_OFFSET: i64 = 1088;
/// Bit positions run up to 971 (largest lsb exponent) + 1088 + 84 carry
/// head-room; 70 * 32 = 2240 bits covers that with margin.
const N_BUCKETS: usize = 70;
/// Each add deposits chunks below 2^32; i64 buckets therefore tolerate 2^30
/// additions before a carry pass is required.
const NORMALIZE_EVERY: u32 = 1 << 30;

/// Exact accumulator for f64 sums.
///
/// Terms are split into 32-bit chunks of a fixed-point representation wide
/// enough for the whole double range, so the accumulated value is exact and
/// `value()` returns the correctly rounded sum. Crucially the result is
/// independent of insertion order, which makes energy totals reproducible to
/// the last bit under node relabeling and under any parallel partitioning of
/// the terms (partial accumulators are merged exactly).
#[derive(Clone)]
pub struct ExactSum {
    buckets: Vec<i64>,
    pending: u32,
    nan: bool,
    pos_inf: bool,
    neg_inf: bool,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            buckets: vec![0i64; N_BUCKETS],
            pending: 0,
            nan: false,
            pos_inf: false,
            neg_inf: false,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        if !x.is_finite() {
            if x.is_nan() {
                self.nan = true;
            } else if x > 0.0 {
                self.pos_inf = true;
            } else {
                self.neg_inf = true;
            }
            return;
        }
        let bits = x.to_bits();
        let neg = (bits >> 63) != 0;
        let exp_biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e_lsb) = if exp_biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp_biased - 1075)
        };
        let pos = (e_lsb + EXP_OFFSET) as u64;
        let b = (pos / CHUNK_BITS as u64) as usize;
        let off = (pos % CHUNK_BITS as u64) as u32;
        let v = (m as u128) << off;
        let c0 = (v as u64 & CHUNK_MASK) as i64;
        let c1 = ((v >> 32) as u64 & CHUNK_MASK) as i64;
        let c2 = ((v >> 64) as u64 & CHUNK_MASK) as i64;
        if neg {
            self.buckets[b] -= c0;
            self.buckets[b + 1] -= c1;
            self.buckets[b + 2] -= c2;
        } else {
            self.buckets[b] += c0;
            self.buckets[b + 1] += c1;
            self.buckets[b + 2] += c2;
        }
        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.normalize();
        }
    }

    /// Exactly folds another accumulator into this one.
    pub fn merge(&mut self, other: &ExactSum) {
        self.normalize();
        let mut o = other.clone();
        o.normalize();
        for b in 0..N_BUCKETS {
            self.buckets[b] += o.buckets[b];
        }
        self.pending = 2;
        self.nan |= o.nan;
        self.pos_inf |= o.pos_inf;
        self.neg_inf |= o.neg_inf;
    }

    /// Carry pass: leaves every bucket except the top in [0, 2^32).
    fn normalize(&mut self) {
        let base = 1i64 << CHUNK_BITS;
        for b in 0..N_BUCKETS - 1 {
            let q = self.buckets[b].div_euclid(base);
            let r = self.buckets[b] - q * base;
            self.buckets[b] = r;
            self.buckets[b + 1] += q;
        }
        self.pending = 0;
    }

    /// The correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        if self.nan || (self.pos_inf && self.neg_inf) {
            return f64::NAN;
        }
        if self.pos_inf {
            return f64::INFINITY;
        }
        if self.neg_inf {
            return f64::NEG_INFINITY;
        }
        let mut acc = self.clone();
        acc.normalize();
        let mut top = match (0..N_BUCKETS).rev().find(|&b| acc.buckets[b] != 0) {
            Some(b) => b,
            None => return 0.0,
        };
        let mut sign = 1.0;
        if acc.buckets[top] < 0 {
            for b in 0..N_BUCKETS {
                acc.buckets[b] = -acc.buckets[b];
            }
            acc.normalize();
            sign = -1.0;
            top = (0..N_BUCKETS)
                .rev()
                .find(|&b| acc.buckets[b] != 0)
                .expect("nonzero accumulator");
        }
        let get = |b: isize| -> u128 {
            if b < 0 {
                0
            } else {
                acc.buckets[b as usize] as u128
            }
        };
        let w = (get(top as isize) << 64) | (get(top as isize - 1) << 32) | get(top as isize - 2);
        debug_assert!(w > 0);
        let msb = 127 - w.leading_zeros() as i64;
        let shift = msb - 52;
        debug_assert!(shift > 0, "top bucket always leaves the window above 53 bits");
        let mut mant = (w >> shift) as u64;
        let round_bit = (w >> (shift - 1)) & 1;
        let mut sticky = (w & ((1u128 << (shift - 1)) - 1)) != 0;
        if !sticky {
            for b in 0..top.saturating_sub(2) {
                if acc.buckets[b] != 0 {
                    sticky = true;
                    break;
                }
            }
        }
        let mut e_lsb = 32 * (top as i64 - 2) + shift - EXP_OFFSET;
        if round_bit == 1 && (sticky || mant & 1 == 1) {
            mant += 1;
            if mant == 1u64 << 53 {
                mant >>= 1;
                e_lsb += 1;
            }
        }
        sign * compose(mant, e_lsb)
    }
}

/// 2^e as f64, exact over the representable range.
fn pow2(e: i64) -> f64 {
    if e >= -1022 && e <= 1023 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else if e < 0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// mant * 2^e with mant < 2^53.
fn compose(mant: u64, e: i64) -> f64 {
    if mant == 0 {
        return 0.0;
    }
    let msb = 63 - mant.leading_zeros() as i64;
    if msb + e > 1023 {
        return f64::INFINITY;
    }
    let m = mant as f64;
    if e >= -1022 {
        m * pow2(e)
    } else {
        // Split so the intermediate stays normal; the final step may round
        // into the denormal range, which is the best representable answer.
        m * pow2(-1022) * pow2(e + 1022)
    }
}

/// Correctly rounded sum of a slice, independent of element order.
pub fn exact_sum(xs: &[f64]) -> f64 {
    let mut acc = ExactSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}
