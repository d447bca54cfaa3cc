//! Word-level arithmetic for GF(2)[x] modulo a fixed monic polynomial.

/// Carry-less product of two 64-bit words as (low, high).
#[inline]
fn clmul_portable(a: u64, b: u64) -> (u64, u64) {
    let mut table = [0u128; 16];
    table[1] = a as u128;
    for i in 2..16 {
        table[i] = if i & 1 == 0 {
            table[i / 2] << 1
        } else {
            table[i - 1] ^ a as u128
        };
    }
    let mut r = 0u128;
    for i in (0..16).rev() {
        r <<= 4;
        r ^= table[((b >> (4 * i)) & 15) as usize];
    }
    (r as u64, (r >> 64) as u64)
}

fn mul_words_portable(a: &[u64], b: &[u64], out: &mut [u64]) {
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let (lo, hi) = clmul_portable(x, y);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq,sse2")]
unsafe fn mul_words_pclmul(a: &[u64], b: &[u64], out: &mut [u64]) {
    use std::arch::x86_64::*;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let xa = _mm_set_epi64x(0, x as i64);
        for (j, &y) in b.iter().enumerate() {
            let prod = _mm_clmulepi64_si128(xa, _mm_set_epi64x(0, y as i64), 0x00);
            let lo = _mm_cvtsi128_si64(prod) as u64;
            let hi = _mm_cvtsi128_si64(_mm_unpackhi_epi64(prod, prod)) as u64;
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

/// out ^= a * b (carry-less). `out` must hold a.len() + b.len() words.
pub(crate) fn mul_words(a: &[u64], b: &[u64], out: &mut [u64]) {
    debug_assert!(out.len() >= a.len() + b.len());
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("pclmulqdq") {
            // SAFETY: the feature was detected at runtime.
            unsafe { mul_words_pclmul(a, b, out) };
            return;
        }
    }
    mul_words_portable(a, b, out)
}

#[inline]
fn spread32(x: u32) -> u64 {
    let mut x = x as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

pub(crate) fn square_words(a: &[u64], out: &mut [u64]) {
    for (i, &x) in a.iter().enumerate() {
        out[2 * i] = spread32(x as u32);
        out[2 * i + 1] = spread32((x >> 32) as u32);
    }
}

/// XOR `w` into `t` so that bit b of `w` lands at position `pos + b`.
/// Negative `pos` is allowed as long as the set bits of `w` stay in range.
#[inline]
fn xor_at(t: &mut [u64], w: u64, pos: isize) {
    if pos < 0 {
        t[0] ^= w >> (-pos) as u32;
        return;
    }
    let pos = pos as usize;
    let (word, sh) = (pos / 64, pos % 64);
    t[word] ^= w << sh;
    if sh > 0 && word + 1 < t.len() {
        t[word + 1] ^= w >> (64 - sh);
    }
}

/// Reduction context for a monic modulus x^n + r(x).
#[derive(Debug, Clone)]
pub(crate) struct Reducer {
    pub degree: usize,
    pub words: usize,
    /// Exponents of r(x), descending.
    pub terms: Vec<usize>,
}

impl Reducer {
    pub fn new(degree: usize, terms: Vec<usize>) -> Self {
        let mut terms = terms;
        terms.sort_unstable_by(|a, b| b.cmp(a));
        Reducer {
            degree,
            words: degree.div_ceil(64),
            terms,
        }
    }

    pub fn top_mask(&self) -> u64 {
        let r = self.degree % 64;
        if r == 0 {
            !0
        } else {
            (1u64 << r) - 1
        }
    }

    /// Reduces `t` (any length) in place; the low `words` words hold the result.
    pub fn reduce(&self, t: &mut [u64]) {
        let n = self.degree;
        for i in (0..t.len()).rev() {
            let lo_bit = i * 64;
            if lo_bit + 64 <= n {
                break;
            }
            let mask = if lo_bit >= n { !0u64 } else { !0u64 << (n - lo_bit) };
            loop {
                let w = t[i] & mask;
                if w == 0 {
                    break;
                }
                t[i] ^= w;
                for &e in &self.terms {
                    xor_at(t, w, lo_bit as isize + e as isize - n as isize);
                }
            }
        }
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut t = vec![0u64; 2 * self.words];
        mul_words(a, b, &mut t);
        self.reduce(&mut t);
        t.truncate(self.words);
        t
    }

    pub fn square(&self, a: &[u64]) -> Vec<u64> {
        let mut t = vec![0u64; 2 * self.words];
        square_words(a, &mut t);
        self.reduce(&mut t);
        t.truncate(self.words);
        t
    }

    pub fn square_in_place(&self, a: &mut Vec<u64>, scratch: &mut Vec<u64>) {
        scratch.clear();
        scratch.resize(2 * self.words, 0);
        square_words(a, scratch);
        self.reduce(scratch);
        a.copy_from_slice(&scratch[..self.words]);
    }
}

pub(crate) fn degree_of(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .rposition(|&w| w != 0)
        .map(|i| i * 64 + 63 - words[i].leading_zeros() as usize)
}

/// dst ^= src << shift, truncating at dst's length.
pub(crate) fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (ws, bs) = (shift / 64, shift % 64);
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let k = i + ws;
        if k >= dst.len() {
            break;
        }
        dst[k] ^= w << bs;
        if bs > 0 && k + 1 < dst.len() {
            dst[k + 1] ^= w >> (64 - bs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portable_clmul_matches_bitwise() {
        let cases = [(0u64, 5u64), (1, 1), (3, 3), (u64::MAX, u64::MAX), (0xdead_beef, 0x1234_5678_9abc)];
        for (a, b) in cases {
            let mut r = 0u128;
            for i in 0..64 {
                if (b >> i) & 1 == 1 {
                    r ^= (a as u128) << i;
                }
            }
            assert_eq!(clmul_portable(a, b), (r as u64, (r >> 64) as u64));
        }
    }

    #[test]
    fn dispatch_matches_portable() {
        let a = [0x0123_4567_89ab_cdefu64, 0xfedc_ba98_7654_3210, 7];
        let b = [0xaaaa_5555_aaaa_5555u64, 3];
        let mut x = vec![0; 5];
        let mut y = vec![0; 5];
        mul_words(&a, &b, &mut x);
        mul_words_portable(&a, &b, &mut y);
        assert_eq!(x, y);
    }

    #[test]
    fn squaring_is_self_product() {
        let a = [0x0123_4567_89ab_cdefu64, 0xfedc_ba98_7654_3210];
        let mut x = vec![0; 4];
        let mut y = vec![0; 4];
        square_words(&a, &mut x);
        mul_words(&a, &a, &mut y);
        assert_eq!(x, y);
    }
}
