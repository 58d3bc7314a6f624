//! Philox4x64-10 counter-based generator and per-sample streams.
//!
//! Every word is a pure function of `(seed, sample, draw)`, so samples can be
//! simulated in any order on any number of workers.

use rand::rand_core::impls::fill_bytes_via_next;
use rand::RngCore;

const M0: u64 = 0xD2E7_470E_E14C_6C93;
const M1: u64 = 0xCA5A_8263_9512_1157;
const W0: u64 = 0x9E37_79B9_7F4A_7C15;
const W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline(always)]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = a as u128 * b as u128;
    ((p >> 64) as u64, p as u64)
}

#[inline(always)]
fn round(c: [u64; 4], k: [u64; 2]) -> [u64; 4] {
    let (hi0, lo0) = mulhilo(M0, c[0]);
    let (hi1, lo1) = mulhilo(M1, c[2]);
    [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0]
}

/// One Philox4x64 block with ten rounds.
#[inline]
pub fn philox4x64(counter: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let mut c = round(counter, key);
    let mut k = key;
    for _ in 1..10 {
        k = [k[0].wrapping_add(W0), k[1].wrapping_add(W1)];
        c = round(c, k);
    }
    c
}

/// Blocks computed per refill; independent blocks let the rounds overlap.
const LANES: usize = 4;
const BUF: usize = 4 * LANES;

/// `LANES` consecutive blocks with counters `[block + l, sample, 0, 0]`.
#[inline]
fn philox_lanes(block: u64, sample: u64, key: [u64; 2]) -> [u64; BUF] {
    let mut c = [[0u64; LANES]; 4];
    for (l, w) in c[0].iter_mut().enumerate() {
        *w = block.wrapping_add(l as u64);
    }
    c[1] = [sample; LANES];
    let mut k = key;
    for r in 0..10 {
        if r > 0 {
            k = [k[0].wrapping_add(W0), k[1].wrapping_add(W1)];
        }
        let mut n = [[0u64; LANES]; 4];
        for l in 0..LANES {
            let (hi0, lo0) = mulhilo(M0, c[0][l]);
            let (hi1, lo1) = mulhilo(M1, c[2][l]);
            n[0][l] = hi1 ^ c[1][l] ^ k[0];
            n[1][l] = lo1;
            n[2][l] = hi0 ^ c[3][l] ^ k[1];
            n[3][l] = lo0;
        }
        c = n;
    }
    let mut out = [0u64; BUF];
    for l in 0..LANES {
        for w in 0..4 {
            out[4 * l + w] = c[w][l];
        }
    }
    out
}

/// Random words for one sample. The key is `[seed, 0]`; block `b` of sample
/// `i` uses the counter `[b, i, 0, 0]`, and draw `d` is word `d mod 4` of
/// block `d / 4`.
#[derive(Debug, Clone)]
pub struct SampleStream {
    key: [u64; 2],
    sample: u64,
    block: u64,
    buf: [u64; BUF],
    pos: usize,
}

impl SampleStream {
    pub fn new(seed: u64, sample: u64) -> Self {
        Self { key: [seed, 0], sample, block: 0, buf: [0; BUF], pos: BUF }
    }

    pub fn sample(&self) -> u64 {
        self.sample
    }

    /// Number of 64-bit words consumed so far.
    pub fn draws(&self) -> u64 {
        self.block * 4 - (BUF - self.pos) as u64
    }

    #[inline(never)]
    fn refill(&mut self) {
        self.buf = philox_lanes(self.block, self.sample, self.key);
        self.block += LANES as u64;
        self.pos = 0;
    }
}

impl RngCore for SampleStream {
    /// Low half of the next 64-bit word.
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        if self.pos == BUF {
            self.refill();
        }
        let w = self.buf[self.pos];
        self.pos += 1;
        w
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        fill_bytes_via_next(self, dest)
    }
}
