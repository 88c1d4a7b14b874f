//! The leveled space of candidate input segments.
//!
//! Level `l` offers segments of duration `T / k_l` whose values lie on dyadic
//! grids. The level is a granularity budget shared by the input dimensions:
//! a dimension that receives budget `b` may take the values
//! `lo + p * (hi - lo)` for proportions `p` in
//!
//! ```text
//! p_0 = {0, 1},   p_b = {(2j + 1) / 2^b | 0 <= j < 2^(b-1)}  (b >= 1)
//! ```
//!
//! The segments of a level are addressed by a stable index so that search
//! nodes can draw from them without materializing the set.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::signal::Segment;

/// Dyadic levels beyond this would overflow the `u64` numerators.
pub const MAX_LEVEL: usize = 62;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("level {level} exceeds maximum level {max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("index {index} out of range for level {level} of size {size}")]
    IndexOutOfRange { level: usize, index: u64, size: u64 },
    #[error("input space needs at least one dimension")]
    NoDimensions,
    #[error("input space needs at least one level")]
    NoLevels,
    #[error("at most {MAX_LEVEL} levels are supported")]
    TooManyLevels,
    #[error("control points must be positive")]
    ZeroControlPoints,
    #[error("dimension '{0}' has lower bound above upper bound")]
    EmptyDomain(String),
    #[error("time horizon must be positive and finite")]
    BadHorizon,
    #[error("level {0} is too large to index")]
    TooLarge(usize),
}

/// An exact dyadic rational `numerator / 2^exponent`.
#[derive(Debug, Clone, Copy, Eq)]
pub struct Proportion {
    numerator: u64,
    exponent: u32,
}

impl Proportion {
    pub fn new(numerator: u64, exponent: u32) -> Self {
        Proportion {
            numerator,
            exponent,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        1u64 << self.exponent
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }

    fn cross(&self, other: &Proportion) -> (u128, u128) {
        (
            self.numerator as u128 * other.denominator() as u128,
            other.numerator as u128 * self.denominator() as u128,
        )
    }
}

impl PartialEq for Proportion {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.cross(other);
        a == b
    }
}

impl PartialOrd for Proportion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Proportion {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.cross(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator())
    }
}

/// Number of proportions with budget `b`.
pub fn proportion_count(b: u32) -> u64 {
    if b == 0 {
        2
    } else {
        1u64 << (b - 1)
    }
}

/// The `j`-th proportion with budget `b`, in increasing order.
pub fn proportion(b: u32, j: u64) -> Proportion {
    if b == 0 {
        Proportion::new(j, 0)
    } else {
        Proportion::new(2 * j + 1, b)
    }
}

/// The proportion set `p_l`.
pub fn proportions(level: u32) -> Vec<Proportion> {
    (0..proportion_count(level))
        .map(|j| proportion(level, j))
        .collect()
}

/// All ordered splits of `level` into `n` non-negative parts, in
/// lexicographic order.
pub fn budgets(n: usize, level: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() + 1 == n {
            current.push(left);
            out.push(current.clone());
            current.pop();
            return;
        }
        for b in 0..=left {
            current.push(b);
            go(n, left - b, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, level, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// `|A_l|` for a single duration per level, without enumerating segments.
///
/// This is the coefficient of `x^l` in `(2 + sum_{b>=1} 2^(b-1) x^b)^n`.
pub fn level_size(n: usize, level: u32) -> u128 {
    let l = level as usize;
    let mut ways = vec![0u128; l + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; l + 1];
        for (used, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for b in 0..=(l - used) {
                next[used + b] += w * proportion_count(b as u32) as u128;
            }
        }
        ways = next;
    }
    ways[l]
}

/// Value range of one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDomain {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl InputDomain {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        InputDomain {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn at(&self, p: Proportion) -> f64 {
        self.lo + p.to_f64() * (self.hi - self.lo)
    }
}

/// Address of a segment: its level and its index within `A_level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId {
    pub level: usize,
    pub index: u64,
}

#[derive(Debug, Clone)]
struct LevelTable {
    budgets: Vec<Vec<u32>>,
    /// First index of each budget block; one extra trailing entry holds the size.
    offsets: Vec<u64>,
}

impl LevelTable {
    fn size(&self) -> u64 {
        *self.offsets.last().unwrap_or(&0)
    }
}

/// The sets `A_0 ... A_lmax`.
#[derive(Debug, Clone)]
pub struct SegmentSpace {
    domains: Vec<InputDomain>,
    control_points: Vec<u32>,
    horizon: f64,
    levels: Vec<LevelTable>,
}

impl SegmentSpace {
    /// `control_points[l]` is `k_l`; the maximum level is `control_points.len() - 1`.
    pub fn new(
        domains: Vec<InputDomain>,
        control_points: Vec<u32>,
        horizon: f64,
    ) -> Result<Self, SpaceError> {
        if domains.is_empty() {
            return Err(SpaceError::NoDimensions);
        }
        if control_points.is_empty() {
            return Err(SpaceError::NoLevels);
        }
        if control_points.len() > MAX_LEVEL + 1 {
            return Err(SpaceError::TooManyLevels);
        }
        if control_points.contains(&0) {
            return Err(SpaceError::ZeroControlPoints);
        }
        if let Some(d) = domains.iter().find(|d| !(d.lo <= d.hi)) {
            return Err(SpaceError::EmptyDomain(d.name.clone()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(SpaceError::BadHorizon);
        }
        let n = domains.len();
        let levels = (0..control_points.len())
            .map(|l| {
                let budgets = budgets(n, l as u32);
                let mut offsets = Vec::with_capacity(budgets.len() + 1);
                let mut total: u64 = 0;
                offsets.push(0);
                for b in &budgets {
                    let block = b
                        .iter()
                        .try_fold(1u64, |acc, &bi| acc.checked_mul(proportion_count(bi)))
                        .ok_or(SpaceError::TooLarge(l))?;
                    total = total.checked_add(block).ok_or(SpaceError::TooLarge(l))?;
                    offsets.push(total);
                }
                Ok(LevelTable { budgets, offsets })
            })
            .collect::<Result<Vec<_>, SpaceError>>()?;
        Ok(SegmentSpace {
            domains,
            control_points,
            horizon,
            levels,
        })
    }

    /// The same levels over additional dimensions appended after the
    /// existing ones.
    pub fn augmented(&self, extra: &[InputDomain]) -> Result<Self, SpaceError> {
        let mut domains = self.domains.clone();
        domains.extend_from_slice(extra);
        SegmentSpace::new(domains, self.control_points.clone(), self.horizon)
    }

    pub fn dimension(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[InputDomain] {
        &self.domains
    }

    pub fn max_level(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn level_count(&self) -> usize {
        self.control_points.len()
    }

    pub fn control_points(&self) -> &[u32] {
        &self.control_points
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Segment duration `T / k_l`.
    pub fn duration(&self, level: usize) -> f64 {
        self.horizon / self.control_points[level] as f64
    }

    pub fn level_size(&self, level: usize) -> u64 {
        self.levels.get(level).map_or(0, LevelTable::size)
    }

    fn table(&self, level: usize) -> Result<&LevelTable, SpaceError> {
        self.levels.get(level).ok_or(SpaceError::LevelOutOfRange {
            level,
            max: self.max_level(),
        })
    }

    /// Budget allocation and per-dimension proportions of a segment.
    pub fn decompose(&self, id: SegmentId) -> Result<(Vec<u32>, Vec<Proportion>), SpaceError> {
        let table = self.table(id.level)?;
        let size = table.size();
        if id.index >= size {
            return Err(SpaceError::IndexOutOfRange {
                level: id.level,
                index: id.index,
                size,
            });
        }
        // offsets[0] == 0 <= index < size, so a containing block exists
        let block = table.offsets.partition_point(|&o| o <= id.index) - 1;
        let budget = &table.budgets[block];
        let mut rest = id.index - table.offsets[block];
        let mut props = vec![Proportion::new(0, 0); budget.len()];
        for (d, &b) in budget.iter().enumerate().rev() {
            let radix = proportion_count(b);
            props[d] = proportion(b, rest % radix);
            rest /= radix;
        }
        Ok((budget.clone(), props))
    }

    pub fn values(&self, id: SegmentId) -> Result<Vec<f64>, SpaceError> {
        let (_, props) = self.decompose(id)?;
        Ok(self
            .domains
            .iter()
            .zip(props)
            .map(|(d, p)| d.at(p))
            .collect())
    }

    pub fn segment(&self, id: SegmentId) -> Result<Segment, SpaceError> {
        let values = self.values(id)?;
        // horizon > 0 and k_l >= 1, so the duration is positive
        Ok(Segment::new(self.duration(id.level), values).expect("positive duration"))
    }

    /// All segments of a level in index order.
    pub fn level_segments(&self, level: usize) -> Result<Vec<Segment>, SpaceError> {
        let size = self.table(level)?.size();
        (0..size)
            .map(|index| self.segment(SegmentId { level, index }))
            .collect()
    }
}
