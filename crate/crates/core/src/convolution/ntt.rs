//! Number-theoretic transform over the prime `P = 2^64 - 2^32 + 1`.
//!
//! The multiplicative group has order divisible by `2^32`, so power-of-two
//! transforms up to that length exist. Products are reduced from 128 bits
//! using `2^64 ≡ 2^32 - 1` and `2^96 ≡ -1 (mod P)`.

pub const MODULUS: u64 = 0xffff_ffff_0000_0001;
const EPSILON: u64 = (1 << 32) - 1;
const GENERATOR: u64 = 7;
const TWO_ADICITY: u32 = 32;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    if carry {
        s.wrapping_add(EPSILON)
    } else if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a.wrapping_sub(b).wrapping_sub(EPSILON)
    }
}

#[inline]
fn reduce128(x: u128) -> u64 {
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPSILON;
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPSILON);
    }
    let t1 = hi_lo * EPSILON;
    let (s, carry) = t0.overflowing_add(t1);
    let r = s.wrapping_add(EPSILON * carry as u64);
    if r >= MODULUS {
        r - MODULUS
    } else {
        r
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    reduce128(a as u128 * b as u128)
}

pub fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

pub fn inverse(a: u64) -> u64 {
    pow(a, MODULUS - 2)
}

/// Maps a signed value of magnitude below `P/2` into the field.
#[inline]
pub fn from_i64(v: i64) -> u64 {
    if v >= 0 {
        v as u64
    } else {
        MODULUS - v.unsigned_abs()
    }
}

/// Inverse of [`from_i64`] for residues that represent values in `(-P/2, P/2)`.
#[inline]
pub fn to_i64(r: u64) -> i64 {
    if r > MODULUS / 2 {
        -((MODULUS - r) as i64)
    } else {
        r as i64
    }
}

/// Precomputed twiddles for one power-of-two length.
#[derive(Clone, Debug)]
pub struct Plan {
    len: usize,
    twiddles: Vec<u64>,
    inv_twiddles: Vec<u64>,
    len_inv: u64,
}

impl Plan {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two() && len >= 2);
        assert!(len.trailing_zeros() <= TWO_ADICITY);
        let root = pow(GENERATOR, (MODULUS - 1) / len as u64);
        let inv_root = inverse(root);
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut inv_twiddles = Vec::with_capacity(half);
        let (mut w, mut iw) = (1, 1);
        for _ in 0..half {
            twiddles.push(w);
            inv_twiddles.push(iw);
            w = mul(w, root);
            iw = mul(iw, inv_root);
        }
        Self {
            len,
            twiddles,
            inv_twiddles,
            len_inv: inverse(len as u64),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Decimation-in-frequency transform: natural order in, bit-reversed order out.
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.len);
        let n = self.len;
        let mut span = n;
        while span >= 2 {
            let half = span / 2;
            let stride = n / span;
            for block in a.chunks_exact_mut(span) {
                let (lo, hi) = block.split_at_mut(half);
                for j in 0..half {
                    let u = lo[j];
                    let v = hi[j];
                    lo[j] = add(u, v);
                    hi[j] = mul(sub(u, v), self.twiddles[j * stride]);
                }
            }
            span = half;
        }
    }

    /// Decimation-in-time inverse: bit-reversed order in, natural order out, scaled by `1/len`.
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.len);
        let n = self.len;
        let mut span = 2;
        while span <= n {
            let half = span / 2;
            let stride = n / span;
            for block in a.chunks_exact_mut(span) {
                let (lo, hi) = block.split_at_mut(half);
                for j in 0..half {
                    let u = lo[j];
                    let v = mul(hi[j], self.inv_twiddles[j * stride]);
                    lo[j] = add(u, v);
                    hi[j] = sub(u, v);
                }
            }
            span *= 2;
        }
        for x in a.iter_mut() {
            *x = mul(*x, self.len_inv);
        }
    }
}
