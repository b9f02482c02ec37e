//! A discontinuous grid map ℝⁿ → ℝᵐ with bounded fibers.
//!
//! Every point is sent to its half-open grid cell `∏ [kᵢε, (kᵢ+1)ε)`, and
//! the cell is encoded exactly as a product of negative prime powers per
//! output slot. Distinct cells give distinct codes by unique factorisation,
//! so every nonempty fiber is a single cell of diameter `ε√n` and decoding
//! to the cell center is accurate to `(ε/2)√n`.
//!
//! Two prime assignments are available:
//!
//! * [`PrimeScheme::Quadrant`], for `n = 2, m = 1`: one pair of primes per
//!   quadrant (2,3 / 5,7 / 11,13 / 17,19), exponents `|⌊x⌋|`, `|⌊y⌋|`.
//! * [`PrimeScheme::PerCoordinate`]: each coordinate owns a
//!   (nonnegative-side, negative-side) prime pair and contributes the prime
//!   selected by the sign of its cell index.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

const QUADRANT_PRIMES: [[u64; 2]; 4] = [[2, 3], [5, 7], [11, 13], [17, 19]];

/// Largest cell index magnitude accepted by the encoder (2⁵³).
pub const MAX_CELL_INDEX: i64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeScheme {
    Quadrant,
    PerCoordinate { primes: Vec<(u64, u64)> },
}

/// Parameters of the grid codec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodecConfigDoc", into = "CodecConfigDoc")]
pub struct CodecConfig {
    n: usize,
    m: usize,
    eps: f64,
    partition: Vec<Vec<usize>>,
    scheme: PrimeScheme,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodecConfigDoc {
    n: usize,
    m: usize,
    eps: f64,
    scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    primes: Option<Vec<(u64, u64)>>,
}

impl TryFrom<CodecConfigDoc> for CodecConfig {
    type Error = Error;

    fn try_from(doc: CodecConfigDoc) -> Result<Self> {
        let partition = match doc.partition {
            Some(p) => p,
            None => contiguous_partition(doc.n, doc.m)?,
        };
        let scheme = match doc.scheme.as_str() {
            "quadrant" => {
                if doc.primes.is_some() {
                    return Err(Error::validation(
                        "primes",
                        "the quadrant scheme uses a fixed prime table",
                    ));
                }
                PrimeScheme::Quadrant
            }
            "per_coordinate" => PrimeScheme::PerCoordinate {
                primes: match doc.primes {
                    Some(p) => p,
                    None => prime_pairs(doc.n),
                },
            },
            other => {
                return Err(Error::validation(
                    "scheme",
                    format!("unknown scheme `{other}` (expected `quadrant` or `per_coordinate`)"),
                ))
            }
        };
        CodecConfig::new(doc.n, doc.m, doc.eps, partition, scheme)
    }
}

impl From<CodecConfig> for CodecConfigDoc {
    fn from(c: CodecConfig) -> Self {
        let (scheme, primes) = match c.scheme {
            PrimeScheme::Quadrant => ("quadrant".to_string(), None),
            PrimeScheme::PerCoordinate { primes } => ("per_coordinate".to_string(), Some(primes)),
        };
        CodecConfigDoc {
            n: c.n,
            m: c.m,
            eps: c.eps,
            scheme,
            partition: Some(c.partition),
            primes,
        }
    }
}

fn contiguous_partition(n: usize, m: usize) -> Result<Vec<Vec<usize>>> {
    if m == 0 || m >= n {
        return Err(Error::validation(
            "m",
            format!("need 1 ≤ m < n, got n={n}, m={m}"),
        ));
    }
    let (base, extra) = (n / m, n % m);
    let mut next = 0;
    Ok((0..m)
        .map(|slot| {
            let size = base + usize::from(slot < extra);
            let coords = (next..next + size).collect();
            next += size;
            coords
        })
        .collect())
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The first `2n` primes, paired in order.
fn prime_pairs(n: usize) -> Vec<(u64, u64)> {
    let primes: Vec<u64> = (2u64..).filter(|&p| is_prime(p)).take(2 * n).collect();
    primes.chunks(2).map(|c| (c[0], c[1])).collect()
}

impl CodecConfig {
    pub fn new(
        n: usize,
        m: usize,
        eps: f64,
        partition: Vec<Vec<usize>>,
        scheme: PrimeScheme,
    ) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::validation(
                "m",
                format!("need 1 ≤ m < n, got n={n}, m={m}"),
            ));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::validation(
                "eps",
                format!("cell edge must be positive, got {eps}"),
            ));
        }
        if partition.len() != m {
            return Err(Error::validation(
                "partition",
                format!("expected {m} slots, got {}", partition.len()),
            ));
        }
        let mut seen = vec![false; n];
        for (slot, coords) in partition.iter().enumerate() {
            if coords.is_empty() {
                return Err(Error::validation(
                    "partition",
                    format!("slot {slot} is empty"),
                ));
            }
            for &c in coords {
                if c >= n || seen[c] {
                    return Err(Error::validation(
                        "partition",
                        format!("coordinate {c} is out of range or assigned twice"),
                    ));
                }
                seen[c] = true;
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::validation(
                "partition",
                format!("coordinate {c} is unassigned"),
            ));
        }
        match &scheme {
            PrimeScheme::Quadrant => {
                if n != 2 || m != 1 {
                    return Err(Error::validation(
                        "scheme",
                        "the quadrant scheme is defined for n = 2, m = 1 only",
                    ));
                }
            }
            PrimeScheme::PerCoordinate { primes } => {
                if primes.len() != n {
                    return Err(Error::validation(
                        "primes",
                        format!("expected {n} prime pairs, got {}", primes.len()),
                    ));
                }
                let mut all: Vec<u64> = primes.iter().flat_map(|&(p, q)| [p, q]).collect();
                if let Some(bad) = all.iter().find(|&&p| !is_prime(p)) {
                    return Err(Error::validation("primes", format!("{bad} is not prime")));
                }
                all.sort_unstable();
                if all.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::validation(
                        "primes",
                        "primes must be pairwise distinct",
                    ));
                }
            }
        }
        Ok(CodecConfig {
            n,
            m,
            eps,
            partition,
            scheme,
        })
    }

    /// The two-dimensional, unit-cell, four-quadrant configuration.
    pub fn quadrant() -> Self {
        Self::new(2, 1, 1.0, vec![vec![0, 1]], PrimeScheme::Quadrant)
            .expect("the quadrant configuration is valid")
    }

    /// Contiguous, balanced partition and consecutive prime pairs.
    pub fn generic(n: usize, m: usize, eps: f64) -> Result<Self> {
        let partition = contiguous_partition(n, m)?;
        Self::new(
            n,
            m,
            eps,
            partition,
            PrimeScheme::PerCoordinate {
                primes: prime_pairs(n),
            },
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    pub fn scheme(&self) -> &PrimeScheme {
        &self.scheme
    }

    pub fn is_quadrant_config(&self) -> bool {
        self.scheme == PrimeScheme::Quadrant && self.eps == 1.0
    }

    /// Floating view of the encoded value, one number per output slot.
    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let cell = CellIndex(
            x.iter()
                .map(|v| {
                    (v / self.eps)
                        .floor()
                        .clamp(-(MAX_CELL_INDEX as f64), MAX_CELL_INDEX as f64)
                        as i64
                })
                .collect(),
        );
        code_value_f64(&encode_cell(self, &cell))
    }
}

/// Per-coordinate grid index `kᵢ = ⌊xᵢ/ε⌋`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellIndex(pub Vec<i64>);

/// Exact code of a cell: per output slot, `(prime, exponent)` pairs sorted
/// by prime, representing `∏ prime^(−exponent)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeCode {
    pub slots: Vec<Vec<(u64, u64)>>,
}

pub fn cell_index(config: &CodecConfig, x: &Point) -> Result<CellIndex> {
    if x.dim() != config.n {
        return Err(Error::input(format!(
            "codec expects dimension {}, got {}",
            config.n,
            x.dim()
        )));
    }
    x.coords()
        .iter()
        .map(|v| {
            let k = (v / config.eps).floor();
            if !(k.abs() <= MAX_CELL_INDEX as f64) {
                return Err(Error::input(format!(
                    "coordinate {v} is outside the codec range"
                )));
            }
            Ok(k as i64)
        })
        .collect::<Result<Vec<_>>>()
        .map(CellIndex)
}

pub fn encode_cell(config: &CodecConfig, cell: &CellIndex) -> PrimeCode {
    let k = &cell.0;
    let mut slots: Vec<Vec<(u64, u64)>> = vec![Vec::new(); config.m];
    match &config.scheme {
        PrimeScheme::Quadrant => {
            let quadrant = usize::from(k[0] < 0) + 2 * usize::from(k[1] < 0);
            let [px, py] = QUADRANT_PRIMES[quadrant];
            slots[0].push((px, k[0].unsigned_abs()));
            slots[0].push((py, k[1].unsigned_abs()));
        }
        PrimeScheme::PerCoordinate { primes } => {
            for (slot, coords) in config.partition.iter().enumerate() {
                for &c in coords {
                    let (pos, neg) = primes[c];
                    let p = if k[c] >= 0 { pos } else { neg };
                    slots[slot].push((p, k[c].unsigned_abs()));
                }
            }
        }
    }
    for s in &mut slots {
        s.retain(|&(_, e)| e > 0);
        s.sort_unstable();
    }
    PrimeCode { slots }
}

pub fn encode(config: &CodecConfig, x: &Point) -> Result<PrimeCode> {
    Ok(encode_cell(config, &cell_index(config, x)?))
}

fn check_slot(slot: usize, factors: &[(u64, u64)]) -> Result<()> {
    if factors.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Format(format!(
            "slot {slot}: primes must be strictly ascending"
        )));
    }
    if let Some(&(p, _)) = factors.iter().find(|&&(_, e)| e == 0) {
        return Err(Error::Format(format!(
            "slot {slot}: prime {p} has exponent 0"
        )));
    }
    if let Some(&(p, e)) = factors.iter().find(|&&(_, e)| e > MAX_CELL_INDEX as u64) {
        return Err(Error::Format(format!(
            "slot {slot}: exponent {e} of {p} is out of range"
        )));
    }
    Ok(())
}

pub fn decode_cell(config: &CodecConfig, code: &PrimeCode) -> Result<CellIndex> {
    if code.slots.len() != config.m {
        return Err(Error::Format(format!(
            "code has {} slots, codec has {}",
            code.slots.len(),
            config.m
        )));
    }
    for (slot, factors) in code.slots.iter().enumerate() {
        check_slot(slot, factors)?;
    }
    let mut k = vec![0i64; config.n];
    match &config.scheme {
        PrimeScheme::Quadrant => {
            let factors = &code.slots[0];
            let quadrant = match factors.first() {
                None => 0,
                Some(&(p, _)) => QUADRANT_PRIMES
                    .iter()
                    .position(|pair| pair.contains(&p))
                    .ok_or_else(|| {
                        Error::Format(format!("prime {p} is not in the quadrant table"))
                    })?,
            };
            let [px, py] = QUADRANT_PRIMES[quadrant];
            let (neg_x, neg_y) = (quadrant & 1 == 1, quadrant & 2 == 2);
            let mut ex = 0u64;
            let mut ey = 0u64;
            for &(p, e) in factors {
                if p == px {
                    ex = e;
                } else if p == py {
                    ey = e;
                } else {
                    return Err(Error::Format(format!(
                        "prime {p} cannot appear together with {}",
                        factors[0].0
                    )));
                }
            }
            if (neg_x && ex == 0) || (neg_y && ey == 0) {
                return Err(Error::Format(format!(
                    "quadrant primes {px},{py} require a positive exponent on each negative side"
                )));
            }
            k[0] = if neg_x { -(ex as i64) } else { ex as i64 };
            k[1] = if neg_y { -(ey as i64) } else { ey as i64 };
        }
        PrimeScheme::PerCoordinate { primes } => {
            let owner: HashMap<u64, (usize, bool)> = primes
                .iter()
                .enumerate()
                .flat_map(|(c, &(pos, neg))| [(pos, (c, false)), (neg, (c, true))])
                .collect();
            let mut set = vec![false; config.n];
            for (slot, factors) in code.slots.iter().enumerate() {
                for &(p, e) in factors {
                    let &(c, negative) = owner
                        .get(&p)
                        .ok_or_else(|| Error::Format(format!("unknown prime {p}")))?;
                    if !config.partition[slot].contains(&c) {
                        return Err(Error::Format(format!(
                            "prime {p} belongs to coordinate {c}, not to slot {slot}"
                        )));
                    }
                    if set[c] {
                        return Err(Error::Format(format!(
                            "both primes of coordinate {c} are present"
                        )));
                    }
                    set[c] = true;
                    k[c] = if negative { -(e as i64) } else { e as i64 };
                }
            }
        }
    }
    Ok(CellIndex(k))
}

/// Decodes to the center of the encoded cell.
pub fn decode(config: &CodecConfig, code: &PrimeCode) -> Result<Point> {
    let cell = decode_cell(config, code)?;
    Ok(cell_center(config, &cell))
}

pub fn cell_center(config: &CodecConfig, cell: &CellIndex) -> Point {
    Point::from_raw(
        cell.0
            .iter()
            .map(|&k| (k as f64 + 0.5) * config.eps)
            .collect(),
    )
}

/// Exact value of each slot, `1 / ∏ p^e`.
pub fn code_to_rational(code: &PrimeCode) -> Vec<BigRational> {
    code.slots
        .iter()
        .map(|factors| {
            let denom = factors.iter().fold(BigUint::one(), |acc, &(p, e)| {
                acc * Pow::pow(BigUint::from(p), e)
            });
            BigRational::new(One::one(), denom.into())
        })
        .collect()
}

/// Floating view of a code; underflows to 0 for very deep cells.
pub fn code_value_f64(code: &PrimeCode) -> Vec<f64> {
    code.slots
        .iter()
        .map(|factors| {
            factors
                .iter()
                .map(|&(p, e)| (p as f64).powf(-(e as f64)))
                .product()
        })
        .collect()
}

/// Supremum of distances within one cell, `ε√n`. Not attained, since cells
/// are half-open.
pub fn fiber_diameter(config: &CodecConfig) -> f64 {
    config.eps * (config.n as f64).sqrt()
}

/// Worst-case distance between a point and the decoded cell center.
pub fn max_reconstruction_error(config: &CodecConfig) -> f64 {
    0.5 * fiber_diameter(config)
}

fn geometric_tail(p: u64, from_one: bool) -> BigRational {
    // Σ_{i≥0} p^{-i} = p/(p−1);  Σ_{i≥1} p^{-i} = 1/(p−1)
    let num = if from_one { 1 } else { p };
    BigRational::new(num.into(), (p - 1).into())
}

/// Exact L¹ norm of the unit-cell quadrant map: every cell has area one, so
/// the integral is a sum of four products of geometric series.
pub fn l1_norm_closed_form(config: &CodecConfig) -> Result<BigRational> {
    if !config.is_quadrant_config() {
        return Err(Error::NotApplicable(
            "the closed-form L¹ norm is defined for the unit-cell quadrant codec only".into(),
        ));
    }
    let mut total = BigRational::from_integer(0.into());
    for (quadrant, [px, py]) in QUADRANT_PRIMES.iter().enumerate() {
        let (neg_x, neg_y) = (quadrant & 1 == 1, quadrant & 2 == 2);
        total += geometric_tail(*px, neg_x) * geometric_tail(*py, neg_y);
    }
    Ok(total)
}

/// L^∞ norm: every slot value is at most 1 and the cell at the origin
/// attains it.
pub fn linf_norm(_config: &CodecConfig) -> BigRational {
    BigRational::one()
}
