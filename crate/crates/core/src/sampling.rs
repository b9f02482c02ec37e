//! Seeded low-discrepancy point sets: shifted Halton sequences in boxes and,
//! through a Box–Muller transform, on spheres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default master seed used whenever the caller does not choose one.
pub const DEFAULT_SEED: u64 = 0x0F1B_E7A0_D17E_5EED;

const SMALL_PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// Mixes a master seed with a stream index (splitmix64 finaliser).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// A Halton sequence in `[0,1)^d` with a seeded Cranley–Patterson shift.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dims: usize, seed: u64) -> Result<Self> {
        if dims == 0 || dims > SMALL_PRIMES.len() {
            return Err(Error::input(format!(
                "quasi-random sequences support 1..={} dimensions, got {dims}",
                SMALL_PRIMES.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dims).map(|_| rng.random::<f64>()).collect();
        Ok(Halton { shift })
    }

    pub fn dims(&self) -> usize {
        self.shift.len()
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        self.shift
            .iter()
            .zip(SMALL_PRIMES)
            .map(|(s, p)| {
                let v = radical_inverse(index + 1, p) + s;
                if v >= 1.0 {
                    v - 1.0
                } else {
                    v
                }
            })
            .collect()
    }
}

/// Quasi-random points of the unit sphere in ℝ^d.
#[derive(Debug, Clone)]
pub struct SpherePoints {
    dim: usize,
    halton: Halton,
}

impl SpherePoints {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("sphere sampling needs dimension ≥ 1"));
        }
        let pairs = dim.div_ceil(2);
        Ok(SpherePoints {
            dim,
            halton: Halton::new(2 * pairs, seed)?,
        })
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        let h = self.halton.point(index);
        let mut g = Vec::with_capacity(h.len());
        for pair in h.chunks(2) {
            let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * pair[1]).sin_cos();
            g.push(r * c);
            g.push(r * s);
        }
        g.truncate(self.dim);
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            return e;
        }
        g.iter().map(|v| v / len).collect()
    }
}

/// An axis-aligned box `∏ [loᵢ, hiᵢ]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::input(
                "box bounds must be nonempty and of equal length",
            ));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::input(format!(
                    "box side {i} is degenerate: [{l}, {h}]"
                )));
            }
        }
        Ok(BoxBounds { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Maps a point of the unit cube into the box.
    pub fn scale(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(u, (l, h))| l + u * (h - l))
            .collect()
    }
}
