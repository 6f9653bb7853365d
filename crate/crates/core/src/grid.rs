//! Random subcube grids over [0,1]^d: stage constants, Bernoulli sampling,
//! exact measures, and set algebra.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rat, rat_floor, Rat};
use crate::geometry::{Point, PointSet};

/// Default cap on the number of cells of a single grid.
pub const DEFAULT_CELL_CAP: u64 = 1 << 30;

/// All stage constants derived from one finite point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub n: u32,
    pub dim: usize,
    pub alpha: f64,
    pub k_n: usize,
    pub delta_n: f64,
    pub m_n: f64,
    pub l_n: u64,
    pub p_n: f64,
    pub slack: f64,
}

/// Compute the stage constants for a point set: the subcube resolution
/// `L = ceil(d / (alpha * M * delta))` and the selection probability from
/// `log p = d^2 log(delta)/k - (d^2 + 1 + slack) log(k)/k`.
pub fn stage_params(a_n: &PointSet, n: u32, alpha: f64, slack: f64) -> Result<StageParams> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    if slack < 0.0 {
        return Err(Error::domain("slack must be >= 0"));
    }
    if a_n.contains_origin() {
        return Err(Error::domain("point set must exclude the origin"));
    }
    let k_n = a_n.len();
    let delta_n = crate::geometry::delta(a_n)?;
    let m_n = a_n.max_norm();
    let dim = a_n.dim();
    // exact ceiling: f64 rounding must not shift L across an integer
    let ratio = rat(dim as f64) / (rat(alpha) * rat(m_n) * rat(delta_n));
    let l_n = ratio
        .ceil()
        .to_integer()
        .try_into()
        .map_err(|_| Error::domain("resolution L does not fit in u64"))?;
    let d2 = (dim * dim) as f64;
    let k = k_n as f64;
    let log_p = d2 * delta_n.ln() / k - (d2 + 1.0 + slack) * k.ln() / k;
    let p_n = log_p.exp();
    Ok(StageParams {
        n,
        dim,
        alpha,
        k_n,
        delta_n,
        m_n,
        l_n,
        p_n,
        slack,
    })
}

/// Index of one open subcube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellIndex {
    pub coords: Vec<u64>,
}

/// Where a point sits relative to the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Cell(CellIndex),
    OnBoundary,
    Outside,
}

/// A selected union of open subcubes of [0,1]^d at resolution L, bit-indexed
/// with linear index `j_1 L^{d-1} + ... + j_d` (last coordinate fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    dim: usize,
    l: u64,
    words: Vec<u64>,
    seed: Option<u64>,
}

fn cell_count(dim: usize, l: u64, cap: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..dim {
        total = total
            .checked_mul(l)
            .filter(|&t| t <= cap)
            .ok_or_else(|| {
                Error::Resource(format!("grid of {l}^{dim} cells exceeds cap {cap}"))
            })?;
    }
    Ok(total)
}

/// The fixed per-cell mixing function: three rounds of the splitmix64
/// finalizer over seed, stage index, and cell index. A cell is selected iff
/// the top 53 bits of the hash, read as an integer, fall below
/// `floor(p * 2^53)`.
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn cell_hash(seed: u64, stage: u64, cell: u64) -> u64 {
    let a = splitmix(seed ^ 0x9E3779B97F4A7C15);
    let b = splitmix(a ^ stage);
    splitmix(b ^ cell)
}

impl GridSet {
    pub fn empty(dim: usize, l: u64) -> Result<Self> {
        Self::empty_capped(dim, l, DEFAULT_CELL_CAP)
    }

    pub fn empty_capped(dim: usize, l: u64, cap: u64) -> Result<Self> {
        if dim == 0 || l == 0 {
            return Err(Error::domain("grid needs dim >= 1 and L >= 1"));
        }
        let cells = cell_count(dim, l, cap)?;
        let words = vec![0u64; cells.div_ceil(64) as usize];
        Ok(GridSet {
            dim,
            l,
            words,
            seed: None,
        })
    }

    pub fn full(dim: usize, l: u64) -> Result<Self> {
        let mut g = Self::empty(dim, l)?;
        let cells = g.cells();
        for i in 0..cells {
            g.set_bit(i, true);
        }
        Ok(g)
    }

    pub fn from_cells(dim: usize, l: u64, selected: &[u64]) -> Result<Self> {
        let mut g = Self::empty(dim, l)?;
        for &i in selected {
            if i >= g.cells() {
                return Err(Error::domain("cell index out of range"));
            }
            g.set_bit(i, true);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u64 {
        self.l
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn cells(&self) -> u64 {
        self.l.pow(self.dim as u32)
    }

    pub fn bit(&self, linear: u64) -> bool {
        (self.words[(linear / 64) as usize] >> (linear % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, linear: u64, value: bool) {
        let w = &mut self.words[(linear / 64) as usize];
        if value {
            *w |= 1 << (linear % 64);
        } else {
            *w &= !(1 << (linear % 64));
        }
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn linear_index(&self, coords: &[u64]) -> u64 {
        debug_assert_eq!(coords.len(), self.dim);
        let mut idx = 0;
        for &c in coords {
            debug_assert!(c < self.l);
            idx = idx * self.l + c;
        }
        idx
    }

    pub fn cell_coords(&self, mut linear: u64) -> Vec<u64> {
        let mut coords = vec![0u64; self.dim];
        for i in (0..self.dim).rev() {
            coords[i] = linear % self.l;
            linear /= self.l;
        }
        coords
    }

    pub fn cell_selected(&self, cell: &CellIndex) -> bool {
        self.bit(self.linear_index(&cell.coords))
    }

    /// True iff the point lies strictly inside a selected open cell.
    pub fn contains_open(&self, p: &Point) -> bool {
        match self.locate(p) {
            Location::Cell(c) => self.cell_selected(&c),
            _ => false,
        }
    }

    /// Exact classification of a point against the open cell decomposition.
    pub fn locate(&self, p: &Point) -> Location {
        locate(p, self.l)
    }

    /// Exact measure popcount / L^d.
    pub fn measure(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.popcount()),
            BigInt::from(self.cells()),
        )
    }

    pub fn measure_f64(&self) -> f64 {
        self.popcount() as f64 / self.cells() as f64
    }

    /// Refine by an integer factor, keeping only subcells strictly interior
    /// to selected parent cells.
    pub fn refine(&self, factor: u64) -> Result<GridSet> {
        self.refine_capped(factor, DEFAULT_CELL_CAP)
    }

    pub fn refine_capped(&self, factor: u64, cap: u64) -> Result<GridSet> {
        if factor == 0 {
            return Err(Error::domain("refinement factor must be >= 1"));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let new_l = self
            .l
            .checked_mul(factor)
            .ok_or_else(|| Error::Resource("refined resolution overflows".into()))?;
        let mut out = GridSet::empty_capped(self.dim, new_l, cap)?;
        out.seed = self.seed;
        let interior: Vec<u64> = (1..=factor.saturating_sub(2)).collect();
        if interior.is_empty() {
            return Ok(out); // factor 2 leaves no interior subcells
        }
        for linear in 0..self.cells() {
            if !self.bit(linear) {
                continue;
            }
            let parent = self.cell_coords(linear);
            // odometer over the d-fold product of interior offsets
            let mut offsets = vec![0usize; self.dim];
            'cells: loop {
                let coords: Vec<u64> = parent
                    .iter()
                    .zip(&offsets)
                    .map(|(&p, &o)| p * factor + interior[o])
                    .collect();
                let idx = out.linear_index(&coords);
                out.set_bit(idx, true);
                for axis in (0..self.dim).rev() {
                    offsets[axis] += 1;
                    if offsets[axis] < interior.len() {
                        continue 'cells;
                    }
                    offsets[axis] = 0;
                }
                break;
            }
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &GridSet) -> Result<()> {
        if self.dim != other.dim || self.l != other.l {
            return Err(Error::domain("grid resolutions differ"));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &GridSet) -> Result<GridSet> {
        self.check_compatible(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Ok(GridSet {
            dim: self.dim,
            l: self.l,
            words,
            seed: None,
        })
    }

    pub fn subtract(&self, other: &GridSet) -> Result<GridSet> {
        self.check_compatible(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & !b)
            .collect();
        Ok(GridSet {
            dim: self.dim,
            l: self.l,
            words,
            seed: None,
        })
    }

    /// Bitwise subset test.
    pub fn is_subset_of(&self, other: &GridSet) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    /// Text format, line 1 header, line 2 one char per cell in linear order.
    pub fn to_text(&self) -> String {
        let seed = match self.seed {
            Some(s) => s.to_string(),
            None => "none".into(),
        };
        let mut out = format!("ERDGRID v1 d={} L={} seed={}\n", self.dim, self.l, seed);
        out.reserve(self.cells() as usize + 1);
        for i in 0..self.cells() {
            out.push(if self.bit(i) { '1' } else { '0' });
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("ERDGRID") || parts.next() != Some("v1") {
            return Err(Error::Parse("bad grid header magic".into()));
        }
        let mut dim = None;
        let mut l = None;
        let mut seed = None;
        for tok in parts {
            if let Some(v) = tok.strip_prefix("d=") {
                dim = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = tok.strip_prefix("L=") {
                l = Some(v.parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = tok.strip_prefix("seed=") {
                seed = if v == "none" {
                    Some(None)
                } else {
                    Some(Some(v.parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?))
                };
            } else {
                return Err(Error::Parse(format!("unexpected header token {tok:?}")));
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing d=".into()))?;
        let l = l.ok_or_else(|| Error::Parse("missing L=".into()))?;
        let seed = seed.ok_or_else(|| Error::Parse("missing seed=".into()))?;
        let body = lines
            .next()
            .ok_or_else(|| Error::Parse("missing grid body".into()))?;
        let mut g = GridSet::empty(dim, l)?;
        g.seed = seed;
        let expected = g.cells() as usize;
        if body.len() != expected {
            return Err(Error::Parse(format!(
                "grid body has {} cells, expected {expected}",
                body.len()
            )));
        }
        for (i, ch) in body.bytes().enumerate() {
            match ch {
                b'1' => g.set_bit(i as u64, true),
                b'0' => {}
                _ => return Err(Error::Parse(format!("bad cell character {:?}", ch as char))),
            }
        }
        Ok(g)
    }

    /// Plain PBM bitmap for d = 2 grids: selected cells are white, the y axis
    /// points upward.
    pub fn to_pbm(&self) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::domain("PBM export requires d = 2"));
        }
        let l = self.l;
        let mut out = format!("P1\n{l} {l}\n");
        for r in 0..l {
            let mut row = String::with_capacity(2 * l as usize);
            for c in 0..l {
                let j = [c, l - 1 - r];
                let bit = self.bit(self.linear_index(&j));
                row.push(if bit { '0' } else { '1' });
                if c + 1 < l {
                    row.push(' ');
                }
            }
            out.push_str(&row);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Exact open-cell location of a point at resolution L.
pub fn locate(p: &Point, l: u64) -> Location {
    let mut coords = Vec::with_capacity(p.dim());
    let l_rat = Rat::from_integer(BigInt::from(l));
    for &c in p.coords() {
        if !(0.0..=1.0).contains(&c) {
            return Location::Outside;
        }
        let scaled = rat(c) * &l_rat;
        if scaled.is_integer() {
            return Location::OnBoundary;
        }
        let j: u64 = rat_floor(&scaled).try_into().unwrap_or(u64::MAX);
        if j >= l {
            return Location::Outside;
        }
        coords.push(j);
    }
    Location::Cell(CellIndex { coords })
}

/// Sample a Bernoulli grid: each cell selected independently with
/// probability `p_n` from the deterministic counter-based stream.
pub fn sample_grid(params: &StageParams, seed: u64) -> Result<GridSet> {
    sample_grid_capped(params, seed, DEFAULT_CELL_CAP)
}

pub fn sample_grid_capped(params: &StageParams, seed: u64, cap: u64) -> Result<GridSet> {
    let mut g = GridSet::empty_capped(params.dim, params.l_n, cap)?;
    g.seed = Some(seed);
    let cells = g.cells();
    // floor(p * 2^53) compared against the top 53 hash bits
    let threshold = (params.p_n.clamp(0.0, 1.0) * 9007199254740992.0) as u64;
    let stage = params.n as u64;
    g.words
        .par_iter_mut()
        .enumerate()
        .for_each(|(wi, word)| {
            let base = wi as u64 * 64;
            let mut w = 0u64;
            for b in 0..64u64 {
                let cell = base + b;
                if cell >= cells {
                    break;
                }
                if (cell_hash(seed, stage, cell) >> 11) < threshold {
                    w |= 1 << b;
                }
            }
            *word = w;
        });
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn params_1d(l_target: u64, p: f64) -> StageParams {
        StageParams {
            n: 1,
            dim: 1,
            alpha: 0.5,
            k_n: 2,
            delta_n: 1.0,
            m_n: 1.0,
            l_n: l_target,
            p_n: p,
            slack: 1.0,
        }
    }

    #[test]
    fn stage_params_formula() {
        // d=2, alpha=0.5, M=1, delta=0.1 -> L = 40
        let pts: Vec<Point> = vec![
            Point::new(vec![1.0, 0.0]).unwrap(),
            Point::new(vec![0.9, 0.0]).unwrap(),
        ];
        let a = PointSet::new(pts).unwrap();
        let sp = stage_params(&a, 1, 0.5, 1.0).unwrap();
        assert_eq!(sp.dim, 2);
        assert!((sp.delta_n - 0.1).abs() < 1e-15);
        assert_eq!(sp.l_n, 40);
    }

    #[test]
    fn stage_params_log_p() {
        // d=1, delta=0.1, k=10 -> log p = (log 0.1 - 3 log 10)/10
        let values: Vec<f64> = (0..10).map(|i| 0.9 + 0.01 * i as f64).collect();
        let a = PointSet::scalars(&values).unwrap();
        let sp = stage_params(&a, 1, 0.5, 1.0).unwrap();
        assert!((sp.delta_n - 0.01 / 0.99).abs() < 1e-15);
        let expected = ((sp.delta_n.ln()) / 10.0 - 3.0 * 10.0_f64.ln() / 10.0).exp();
        assert!((sp.p_n - expected).abs() < 1e-15);
    }

    #[test]
    fn stage_params_boundary_delta() {
        let a = PointSet::scalars(&[1.0, -1.0]).unwrap();
        let sp = stage_params(&a, 1, 0.5, 1.0).unwrap();
        assert_eq!(sp.delta_n, 2.0);
        assert_eq!(sp.l_n, 1);
    }

    #[test]
    fn stage_params_rejects_origin() {
        let a = PointSet::scalars(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            stage_params(&a, 1, 0.5, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sample_extremes() {
        let g1 = sample_grid(&params_1d(64, 1.0), 7).unwrap();
        assert!(g1.measure().is_one());
        let g0 = sample_grid(&params_1d(64, 0.0), 7).unwrap();
        assert!(g0.measure().is_zero());
    }

    #[test]
    fn sample_deterministic() {
        let p = params_1d(128, 0.5);
        let a = sample_grid(&p, 42).unwrap();
        let b = sample_grid(&p, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_grid(&p, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn measure_counts_cells() {
        let g = GridSet::from_cells(1, 16, &[1, 5, 9]).unwrap();
        assert_eq!(
            g.measure(),
            BigRational::new(BigInt::from(3), BigInt::from(16))
        );
    }

    #[test]
    fn locate_cases() {
        let p = Point::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(
            locate(&p, 2),
            Location::Cell(CellIndex { coords: vec![0, 1] })
        );
        let q = Point::new(vec![0.5, 0.1]).unwrap();
        assert_eq!(locate(&q, 2), Location::OnBoundary);
        let r = Point::new(vec![1.2, 0.0]).unwrap();
        assert_eq!(locate(&r, 2), Location::Outside);
    }

    #[test]
    fn contains_open_respects_openness() {
        let g = GridSet::full(1, 4).unwrap();
        assert!(g.contains_open(&Point::scalar(0.1)));
        assert!(!g.contains_open(&Point::scalar(0.25)));
        let e = GridSet::empty(1, 4).unwrap();
        assert!(!e.contains_open(&Point::scalar(0.1)));
    }

    #[test]
    fn refine_identity_and_interior() {
        let g = GridSet::full(1, 1).unwrap();
        assert_eq!(g.refine(1).unwrap(), g);
        let r = g.refine(4).unwrap();
        assert_eq!(r.resolution(), 4);
        assert!(r.bit(1) && r.bit(2));
        assert!(!r.bit(0) && !r.bit(3));
        assert_eq!(
            r.measure(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn refine_measure_formula() {
        let g = GridSet::from_cells(2, 3, &[0, 4, 8]).unwrap();
        let f = 5u64;
        let r = g.refine(f).unwrap();
        let per_cell = BigRational::new(BigInt::from((f - 2).pow(2)), BigInt::from(f.pow(2)));
        let expected = g.measure() * per_cell;
        assert_eq!(r.measure(), expected);
    }

    #[test]
    fn refine_empty() {
        let e = GridSet::empty(2, 3).unwrap();
        assert!(e.refine(7).unwrap().measure().is_zero());
    }

    #[test]
    fn set_algebra() {
        let full = GridSet::full(1, 2).unwrap();
        let left = GridSet::from_cells(1, 2, &[0]).unwrap();
        let right = GridSet::from_cells(1, 2, &[1]).unwrap();
        assert_eq!(left.intersect(&full).unwrap(), left);
        assert!(left.subtract(&left).unwrap().measure().is_zero());
        assert!(left.intersect(&right).unwrap().measure().is_zero());
        let mismatched = GridSet::full(1, 4).unwrap();
        assert!(left.intersect(&mismatched).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = params_1d(96, 0.4);
        let g = sample_grid(&p, 11).unwrap();
        let back = GridSet::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn pbm_orientation() {
        // single selected cell at j1=0, j2=0 -> bottom-left pixel white ('0')
        let g = GridSet::from_cells(2, 2, &[0]).unwrap();
        let pbm = g.to_pbm().unwrap();
        let lines: Vec<&str> = pbm.lines().collect();
        assert_eq!(lines[0], "P1");
        assert_eq!(lines[1], "2 2");
        assert_eq!(lines[2], "1 1"); // top row: nothing selected
        assert_eq!(lines[3], "0 1"); // bottom row: left pixel white
    }

    #[test]
    fn resource_cap() {
        let p = StageParams {
            l_n: 1 << 21,
            dim: 2,
            ..params_1d(0, 0.5)
        };
        assert!(matches!(
            sample_grid(&p, 0),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn corners_never_contained() {
        let g = GridSet::full(2, 4).unwrap();
        let corner = Point::new(vec![0.25, 0.5]).unwrap();
        assert!(!g.contains_open(&corner));
        let center = Point::new(vec![0.125, 0.125]).unwrap();
        assert!(g.contains_open(&center));
    }
}
