//! Counter-based random numbers (Philox4x32-10).
//!
//! Every draw is a pure function of `(seed, stream, index)`, so results never
//! depend on thread scheduling or on the order in which samples are visited.
//! The generator is the Random123 Philox4x32 bijection with 10 rounds:
//!
//! * multipliers `0xD2511F53`, `0xCD9E8D57`
//! * Weyl key increments `0x9E3779B9`, `0xBB67AE85`
//! * key = `(seed_lo32, seed_hi32)`
//! * counter = `(index_lo32, index_hi32, stream_lo32, stream_hi32)`
//!
//! Uniform doubles take the top 53 bits of `(word1 << 32) | word0`.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;
const ROUNDS: usize = 10;

/// Stream identifiers reserved by this crate.
pub mod streams {
    pub const SETPOINTS: u64 = 1;
    pub const GAINS: u64 = 2;
    pub const RANDOM_WALK: u64 = 3;
    pub const FALSIFIER: u64 = 4;
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// The raw Philox4x32-10 bijection.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..ROUNDS {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// A keyed counter-based generator bound to one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
    stream: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
            stream,
        }
    }

    /// The four 32-bit words of block `index`.
    pub fn block(&self, index: u64) -> [u32; 4] {
        philox4x32(
            [
                index as u32,
                (index >> 32) as u32,
                self.stream as u32,
                (self.stream >> 32) as u32,
            ],
            self.key,
        )
    }

    /// Two uniforms in `[0, 1)` from block `index`.
    pub fn uniform2(&self, index: u64) -> [f64; 2] {
        let w = self.block(index);
        [to_unit(w[0], w[1]), to_unit(w[2], w[3])]
    }
}

#[inline]
fn to_unit(lo: u32, hi: u32) -> f64 {
    let bits = (u64::from(hi) << 32) | u64::from(lo);
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps a unit uniform onto `[lo, hi]`.
#[inline]
pub fn scale(u: f64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u
}
