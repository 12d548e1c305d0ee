//! Deterministic seeded random numbers.
//!
//! Everything random in this crate flows through [`Rng`], a SplitMix64
//! generator with Box–Muller normals on top. The algorithm is pinned so that
//! fixtures stay byte-identical across platforms and so that alternate
//! implementations can reproduce every stream exactly.

/// SplitMix64 pseudo-random generator with a Gaussian spare slot.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, spare: None }
    }

    /// Derive a named substream: `master_seed XOR FNV-1a(id)`. Entities draw
    /// from their own stream, so parallel evaluation order cannot change
    /// results.
    pub fn stream(master_seed: u64, id: &str) -> Self {
        Self::new(derive_seed(master_seed, id))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_uniform() * (hi - lo)
    }

    /// Uniform integer in `[lo, hi]` inclusive.
    pub fn next_int(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        lo + (self.next_uniform() * span).floor() as i64
    }

    /// Gaussian draw via Box–Muller. One uniform pair yields two normals: the
    /// cosine branch is returned first and the sine branch is cached for the
    /// next call. `sigma = 0` returns `mean` exactly.
    pub fn next_gaussian(&mut self, mean: f64, sigma: f64) -> f64 {
        let z = match self.spare.take() {
            Some(z) => z,
            None => {
                let u1 = self.next_uniform();
                let u2 = self.next_uniform();
                // 1 - u1 lies in (0, 1], keeping the log finite.
                let r = (-2.0 * (1.0 - u1).ln()).sqrt();
                let theta = std::f64::consts::TAU * u2;
                self.spare = Some(r * theta.sin());
                r * theta.cos()
            }
        };
        mean + sigma * z
    }
}

/// Seed of the named substream: `master_seed XOR FNV-1a(id)`.
pub fn derive_seed(master_seed: u64, id: &str) -> u64 {
    master_seed ^ fnv1a(id.as_bytes())
}

/// 64-bit FNV-1a hash, used to derive per-entity seed offsets.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}
