//! Permutons: tiered, grid (step-function) and V-shaped limit objects.
//!
//! Every permuton here supports point sampling, Γ-random permutations and
//! exact evaluation of `Γ([0,x]×[0,y])`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{check_confidence, DensityEstimate, PatternHistogram};
use crate::numeric::bisect_monotone;
use crate::pattern;
use crate::perm::Permutation;
use crate::seed::{chunked_histogram, SeedStream};

const HEIGHT_TOLERANCE: f64 = 1e-12;
const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TierKind {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "inc")]
    Increasing,
    #[serde(rename = "dec")]
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub height: f64,
    pub kind: TierKind,
}

impl Tier {
    pub fn new(height: f64, kind: TierKind) -> Self {
        Tier { height, kind }
    }

    // mass of [0,x]×[0,y] carried by this tier when it spans [bottom, bottom+height]
    fn box_mass(&self, bottom: f64, x: f64, y: f64) -> f64 {
        let h = self.height;
        let t = ((y - bottom) / h).clamp(0.0, 1.0);
        match self.kind {
            TierKind::Uniform => x * t * h,
            TierKind::Increasing => h * x.min(t),
            TierKind::Decreasing => h * (x - (1.0 - t)).max(0.0),
        }
    }
}

/// A permuton made of horizontal tiers, listed bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct TieredPermuton {
    tiers: Vec<Tier>,
    bottoms: Vec<f64>,
}

impl TieredPermuton {
    pub fn new(tiers: Vec<Tier>) -> Result<Self> {
        if tiers.is_empty() {
            return Err(Error::invalid_argument(
                "a tiered permuton needs at least one tier",
            ));
        }
        if let Some(t) = tiers
            .iter()
            .find(|t| !(t.height > 0.0 && t.height.is_finite()))
        {
            return Err(Error::invalid_argument(format!(
                "tier height {} must be positive",
                t.height
            )));
        }
        let total: f64 = tiers.iter().map(|t| t.height).sum();
        if (total - 1.0).abs() > HEIGHT_TOLERANCE {
            return Err(Error::invalid_argument(format!(
                "tier heights sum to {total}, not 1"
            )));
        }
        let mut bottoms = Vec::with_capacity(tiers.len());
        let mut acc = 0.0;
        for t in &tiers {
            bottoms.push(acc);
            acc += t.height;
        }
        Ok(TieredPermuton { tiers, bottoms })
    }

    pub fn single(kind: TierKind) -> Self {
        TieredPermuton::new(vec![Tier::new(1.0, kind)]).expect("one full tier")
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }

    /// `[bottom, top]` of each tier.
    pub fn tier_bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.bottoms
            .iter()
            .zip(&self.tiers)
            .map(|(&b, t)| (b, b + t.height))
    }

    fn top(&self, i: usize) -> f64 {
        if i + 1 == self.tiers.len() {
            1.0
        } else {
            self.bottoms[i + 1]
        }
    }

    pub fn measure_box(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        self.tiers
            .iter()
            .zip(&self.bottoms)
            .map(|(t, &b)| t.box_mass(b, x, y))
            .sum()
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.gen();
        let i = self.bottoms.partition_point(|&b| b <= u).saturating_sub(1);
        let (a, b) = (self.bottoms[i], self.top(i));
        let x: f64 = rng.gen();
        let y = match self.tiers[i].kind {
            TierKind::Increasing => a + x * (b - a),
            TierKind::Decreasing => a + (1.0 - x) * (b - a),
            TierKind::Uniform => a + rng.gen::<f64>() * (b - a),
        };
        (x, y)
    }

    /// Mass of `[x0,x1]×[0,y]`.
    fn strip_mass(&self, x0: f64, x1: f64, y: f64) -> f64 {
        self.measure_box(x1, y) - self.measure_box(x0, y)
    }

    /// `Γ_{[a,b]}([0,x]×[0,y]) = Γ([a, a+x(b−a)]×[0,h]) / (b−a)`, where `h` is
    /// the least solution of `Γ([a,b]×[0,h]) = (b−a)y`.
    pub fn strip_measure(&self, a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
        check_strip(a, b)?;
        let width = b - a;
        let target = (width * y.clamp(0.0, 1.0)).min(self.strip_mass(a, b, 1.0));
        let h = bisect_monotone(|h| self.strip_mass(a, b, h), 0.0, 1.0, target, true, 1e-15)?;
        Ok(self.strip_mass(a, a + x.clamp(0.0, 1.0) * width, h) / width)
    }

    /// `Γ_{[a,b]}`: the vertical strip `[a,b]×[0,1]` rescaled to a permuton.
    ///
    /// Tier kinds are read off the rescaled measure, and the result is
    /// checked against it on a grid before being returned.
    pub fn restrict_strip(&self, a: f64, b: f64) -> Result<TieredPermuton> {
        check_strip(a, b)?;
        let mut tiers = Vec::with_capacity(self.tiers.len());
        for ((lo, hi), t) in self.tier_bounds().zip(&self.tiers) {
            let mid = 0.5 * (lo + hi);
            let inside = (self.strip_measure(a, b, 0.5, mid)?
                - self.strip_measure(a, b, 0.5, lo)?)
                / t.height;
            // half-width column up to mid-tier: 1/2 for inc, 1/4 for uniform, 0 for dec
            let kind = if inside > 0.375 {
                TierKind::Increasing
            } else if inside > 0.125 {
                TierKind::Uniform
            } else {
                TierKind::Decreasing
            };
            tiers.push(Tier::new(t.height, kind));
        }
        let candidate = TieredPermuton::new(tiers)?;
        let probes: Vec<f64> = (0..=8)
            .map(|i| i as f64 / 8.0)
            .chain(self.bottoms.iter().copied())
            .collect();
        for &x in &probes {
            for &y in &probes {
                let expect = self.strip_measure(a, b, x, y)?;
                let got = candidate.measure_box(x, y);
                if (expect - got).abs() > 1e-9 {
                    return Err(Error::invalid_argument(format!(
                        "strip restriction is not tiered at ({x}, {y}): {expect} vs {got}"
                    )));
                }
            }
        }
        Ok(candidate)
    }

    /// Tier-by-tier equality within `tol` on heights.
    pub fn approx_eq(&self, other: &TieredPermuton, tol: f64) -> bool {
        self.tiers.len() == other.tiers.len()
            && self
                .tiers
                .iter()
                .zip(&other.tiers)
                .all(|(s, o)| s.kind == o.kind && (s.height - o.height).abs() <= tol)
    }
}

fn check_strip(a: f64, b: f64) -> Result<()> {
    if (0.0..1.0).contains(&a) && a < b && b <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid_argument(format!(
            "strip [{a}, {b}] is not a proper subinterval of [0, 1]"
        )))
    }
}

/// A step-function permuton on a `d×d` grid; `cells[i][j]` is the mass of
/// x-bin `i` and y-bin `j`, spread uniformly over the cell.
#[derive(Debug, Clone)]
pub struct GridPermuton {
    cells: Vec<Vec<f64>>,
    picker: WeightedIndex<f64>,
}

impl PartialEq for GridPermuton {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
    }
}

impl GridPermuton {
    pub fn new(cells: Vec<Vec<f64>>) -> Result<Self> {
        let d = cells.len();
        if d == 0 || cells.iter().any(|row| row.len() != d) {
            return Err(Error::invalid_argument(
                "grid permuton cells must form a non-empty square matrix",
            ));
        }
        if cells
            .iter()
            .flatten()
            .any(|&c| !(c >= 0.0 && c.is_finite()))
        {
            return Err(Error::invalid_argument(
                "grid cell masses must be non-negative",
            ));
        }
        let target = 1.0 / d as f64;
        for (i, column) in cells.iter().enumerate() {
            let col: f64 = column.iter().sum();
            let row: f64 = cells.iter().map(|c| c[i]).sum();
            if (col - target).abs() > GRID_TOLERANCE || (row - target).abs() > GRID_TOLERANCE {
                return Err(Error::invalid_argument(format!(
                    "grid marginals must all be 1/{d}; bin {i} has {col} and {row}"
                )));
            }
        }
        let picker = WeightedIndex::new(cells.iter().flatten().copied())
            .map_err(|e| Error::invalid_argument(format!("grid weights: {e}")))?;
        Ok(GridPermuton { cells, picker })
    }

    /// All `d²` cells with mass `1/d²`: the uniform permuton.
    pub fn uniform(d: usize) -> Self {
        let m = 1.0 / (d * d) as f64;
        GridPermuton::new(vec![vec![m; d]; d]).expect("uniform grid")
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn measure_box(&self, x: f64, y: f64) -> f64 {
        let d = self.dim() as f64;
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        let overlap = |bin: usize, t: f64| (t * d - bin as f64).clamp(0.0, 1.0);
        let mut total = 0.0;
        for (i, col) in self.cells.iter().enumerate() {
            let fx = overlap(i, x);
            if fx == 0.0 {
                continue;
            }
            for (j, &m) in col.iter().enumerate() {
                total += m * fx * overlap(j, y);
            }
        }
        total
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let d = self.dim();
        let cell = self.picker.sample(rng);
        let (i, j) = (cell / d, cell % d);
        let x = (i as f64 + rng.gen::<f64>()) / d as f64;
        let y = (j as f64 + rng.gen::<f64>()) / d as f64;
        (x, y)
    }
}

/// A `±1` vector defining a skinny monotone grid class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct GridVector(Vec<i8>);

impl GridVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid_argument("grid vector must be non-empty"));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::invalid_argument(
                "grid vector entries must be +1 or -1",
            ));
        }
        Ok(GridVector(entries))
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    /// `α(v) = ½(1 + Σ v_i / 2^i)`, a distinct value in `(0, 1)` for each vector.
    pub fn alpha(&self) -> f64 {
        let s: f64 = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &v)| v as f64 / 2f64.powi(i as i32 + 1))
            .sum();
        0.5 * (1.0 + s)
    }

    /// `Γ_v`: `d` equal tiers numbered from the top, tier `i` increasing when
    /// `v_i = +1` and decreasing when `v_i = −1`.
    pub fn tiered(&self) -> TieredPermuton {
        let h = 1.0 / self.0.len() as f64;
        let tiers = self
            .0
            .iter()
            .rev()
            .map(|&v| {
                Tier::new(
                    h,
                    if v == 1 {
                        TierKind::Increasing
                    } else {
                        TierKind::Decreasing
                    },
                )
            })
            .collect();
        TieredPermuton::new(tiers).expect("equal tiers sum to one")
    }
}

impl TryFrom<Vec<i8>> for GridVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        GridVector::new(v)
    }
}

impl From<GridVector> for Vec<i8> {
    fn from(v: GridVector) -> Self {
        v.0
    }
}

pub fn tiered_from_vector(v: &GridVector) -> TieredPermuton {
    v.tiered()
}

pub fn alpha_of_vector(v: &GridVector) -> f64 {
    v.alpha()
}

/// JSON form of a permuton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PermutonDescriptor {
    Tiered { tiers: Vec<Tier> },
    Grid { cells: Vec<Vec<f64>> },
    V,
    Vector { v: GridVector },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PermutonDescriptor", into = "PermutonDescriptor")]
pub enum Permuton {
    Tiered(TieredPermuton),
    Grid(GridPermuton),
    /// Mass uniform on the decreasing diagonal of the left half and the
    /// increasing diagonal of the right half.
    V,
}

impl TryFrom<PermutonDescriptor> for Permuton {
    type Error = Error;
    fn try_from(d: PermutonDescriptor) -> Result<Self> {
        Ok(match d {
            PermutonDescriptor::Tiered { tiers } => Permuton::Tiered(TieredPermuton::new(tiers)?),
            PermutonDescriptor::Grid { cells } => Permuton::Grid(GridPermuton::new(cells)?),
            PermutonDescriptor::V => Permuton::V,
            PermutonDescriptor::Vector { v } => Permuton::Tiered(v.tiered()),
        })
    }
}

impl From<Permuton> for PermutonDescriptor {
    fn from(p: Permuton) -> Self {
        match p {
            Permuton::Tiered(t) => PermutonDescriptor::Tiered { tiers: t.tiers },
            Permuton::Grid(g) => PermutonDescriptor::Grid { cells: g.cells },
            Permuton::V => PermutonDescriptor::V,
        }
    }
}

impl Permuton {
    pub fn increasing() -> Self {
        Permuton::Tiered(TieredPermuton::single(TierKind::Increasing))
    }

    pub fn decreasing() -> Self {
        Permuton::Tiered(TieredPermuton::single(TierKind::Decreasing))
    }

    pub fn uniform() -> Self {
        Permuton::Tiered(TieredPermuton::single(TierKind::Uniform))
    }

    pub fn as_tiered(&self) -> Option<&TieredPermuton> {
        match self {
            Permuton::Tiered(t) => Some(t),
            _ => None,
        }
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Permuton::Tiered(t) => t.sample_point(rng),
            Permuton::Grid(g) => g.sample_point(rng),
            Permuton::V => {
                let x: f64 = rng.gen();
                (x, (2.0 * x - 1.0).abs())
            }
        }
    }

    /// `Γ([0,x]×[0,y])`.
    pub fn measure_box(&self, x: f64, y: f64) -> f64 {
        match self {
            Permuton::Tiered(t) => t.measure_box(x, y),
            Permuton::Grid(g) => g.measure_box(x, y),
            Permuton::V => {
                let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
                (x.min(0.5 * (1.0 + y)) - 0.5 * (1.0 - y)).max(0.0)
            }
        }
    }

    /// `Γ_{[a,b]}`; only tiered permutons are supported.
    pub fn restrict_strip(&self, a: f64, b: f64) -> Result<TieredPermuton> {
        match self {
            Permuton::Tiered(t) => t.restrict_strip(a, b),
            _ => Err(Error::invalid_argument(
                "strip restriction is only defined here for tiered permutons",
            )),
        }
    }

    /// `k` points sorted by x, with every x and every y distinct.
    fn sample_points<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = (0..k).map(|_| self.sample_point(rng)).collect();
        loop {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut colliding: Vec<usize> = (1..k).filter(|&i| pts[i].0 == pts[i - 1].0).collect();
            let mut by_y: Vec<usize> = (0..k).collect();
            by_y.sort_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1));
            colliding.extend(
                by_y.windows(2)
                    .filter(|w| pts[w[0]].1 == pts[w[1]].1)
                    .map(|w| w[1]),
            );
            if colliding.is_empty() {
                return pts;
            }
            colliding.sort_unstable();
            colliding.dedup();
            for i in colliding {
                pts[i] = self.sample_point(rng);
            }
        }
    }

    /// A Γ-random permutation of length `k`.
    pub fn sample_permutation<R: Rng + ?Sized>(
        &self,
        k: usize,
        rng: &mut R,
    ) -> Result<Permutation> {
        if k == 0 {
            return Err(Error::invalid_argument(
                "permutation length must be positive",
            ));
        }
        let pts = self.sample_points(k, rng);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1));
        let mut values = vec![0u64; k];
        for (rank, idx) in order.into_iter().enumerate() {
            values[idx] = rank as u64 + 1;
        }
        Ok(Permutation::from_values_unchecked(values))
    }

    fn sample_pattern_rank<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> usize {
        let pts = self.sample_points(k, rng);
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        pattern::rank_of_values(&ys)
    }

    /// Shared-sample estimate of `ρ(π, Γ)` for every `π ∈ S_k`.
    pub fn estimate_histogram(
        &self,
        k: usize,
        samples: u64,
        confidence: f64,
        stream: SeedStream,
    ) -> Result<PatternHistogram> {
        if k == 0 || k > pattern::MAX_INDEXED_LEN {
            return Err(Error::invalid_argument(format!(
                "unsupported pattern length {k}"
            )));
        }
        if samples == 0 {
            return Err(Error::invalid_argument("samples must be positive"));
        }
        check_confidence(confidence)?;
        let counts = chunked_histogram(samples, stream, pattern::factorial(k), |rng| {
            self.sample_pattern_rank(k, rng)
        });
        Ok(PatternHistogram {
            k,
            counts,
            samples,
            confidence,
        })
    }

    /// Monte Carlo estimate of `ρ(π, Γ)`, the probability that a Γ-random
    /// permutation of length `|π|` equals `π`.
    pub fn estimate_pattern_density(
        &self,
        pattern: &Permutation,
        samples: u64,
        confidence: f64,
        stream: SeedStream,
    ) -> Result<DensityEstimate> {
        Ok(self
            .estimate_histogram(pattern.len(), samples, confidence, stream)?
            .estimate(pattern))
    }
}
