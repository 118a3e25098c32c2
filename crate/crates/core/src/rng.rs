//! Seeded counter-based random numbers.
//!
//! Every draw is a pure function of (seed, index), so sequences are
//! reproducible across runs and independent of how callers interleave
//! draws. Based on the splitmix64 finalizer.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Raw 64-bit output for draw `index` of stream `seed`.
#[inline]
pub fn u64_at(seed: u64, index: u64) -> u64 {
    mix(seed.wrapping_add(GOLDEN).wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Uniform f64 in [0, 1) for draw `index`.
#[inline]
pub fn uniform_at(seed: u64, index: u64) -> f64 {
    (u64_at(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via Box-Muller on draws (2*index, 2*index+1).
#[inline]
pub fn gaussian_at(seed: u64, index: u64) -> f64 {
    // Shift into (0, 1] so the log is finite.
    let u1 = ((u64_at(seed, 2 * index) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = uniform_at(seed, 2 * index + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Sequential view over a counter-based stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    next: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed, next: 0 }
    }

    /// Derive an independent stream, e.g. one per optimization step.
    pub fn substream(seed: u64, label: u64) -> Self {
        CounterRng::new(mix(seed ^ label.wrapping_mul(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = u64_at(self.seed, self.next);
        self.next += 1;
        v
    }

    pub fn uniform(&mut self) -> f64 {
        let v = uniform_at(self.seed, self.next);
        self.next += 1;
        v
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        let v = gaussian_at(self.seed, self.next);
        self.next += 1;
        v
    }

    /// Uniform integer in [0, n).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }
}
