//! Hyperplane-arrangement machinery: region counts and enumeration in low
//! ambient dimension, grid-line windows, and the representative-scalar
//! reduction in dimension one.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};
use crate::grid::GridSet;

/// Affine hyperplane `{ y : normal . y + offset = 0 }` with unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "hyperplane normal must be unit length (norm {})",
                normal.norm()
            )));
        }
        if !offset.is_finite() {
            return Err(Error::domain("hyperplane offset must be finite"));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// Signed value of the defining form at p.
    pub fn eval(&self, p: &Point) -> f64 {
        self.normal
            .coords()
            .iter()
            .zip(p.coords())
            .map(|(n, c)| n * c)
            .sum::<f64>()
            + self.offset
    }
}

/// One open region of an arrangement, identified by its side of every
/// hyperplane and carrying an interior representative.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// +1 / -1 per hyperplane, in input order
    pub sign_vector: Vec<i8>,
    pub representative: Point,
}

/// The grid lines near coordinate `ell` of a base point that an admissible
/// image of the i-th set element can cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaWindow {
    /// axis index, 0-based
    pub ell: usize,
    /// point index, 0-based
    pub i: usize,
    pub js: Vec<u64>,
}

/// Maximum number of open regions cut from R^dim by n hyperplanes:
/// sum of C(n, k) for k = 0..=dim.
pub fn buck_bound(num_hyperplanes: u64, ambient_dim: u64) -> BigUint {
    let n = num_hyperplanes;
    let mut total = BigUint::zero();
    let mut binom = BigUint::one();
    for k in 0..=ambient_dim {
        if k > 0 {
            if k > n {
                break;
            }
            binom = binom * BigUint::from(n - k + 1) / BigUint::from(k);
        }
        total += &binom;
    }
    total
}

/// Regions of the real line cut at the given breakpoints: representatives
/// are interval midpoints plus one point past each unbounded end.
pub fn enumerate_regions_1d(breakpoints: &[f64]) -> Vec<Region> {
    let mut bs: Vec<f64> = breakpoints.iter().copied().filter(|b| b.is_finite()).collect();
    bs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bs.dedup();
    if bs.is_empty() {
        return vec![Region {
            sign_vector: Vec::new(),
            representative: Point::scalar(0.0),
        }];
    }
    let mut reps = Vec::with_capacity(bs.len() + 1);
    reps.push(bs[0] - 1.0);
    for w in bs.windows(2) {
        reps.push(0.5 * (w[0] + w[1]));
    }
    reps.push(bs[bs.len() - 1] + 1.0);
    reps.into_iter()
        .map(|r| Region {
            sign_vector: bs.iter().map(|&b| if r > b { 1 } else { -1 }).collect(),
            representative: Point::scalar(r),
        })
        .collect()
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max)
            || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
        {
            return Err(Error::domain("degenerate bounding box"));
        }
        Ok(Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }
}

/// Convex polygon with counterclockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            twice += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        0.5 * twice
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        let (mut x, mut y) = (0.0, 0.0);
        for v in &self.vertices {
            x += v[0];
            y += v[1];
        }
        [x / n, y / n]
    }

    /// Part of the polygon with `a*x + b*y + c >= 0`.
    pub fn clip_halfplane(&self, a: f64, b: f64, c: f64) -> Polygon {
        let v = &self.vertices;
        let n = v.len();
        let mut out = Vec::new();
        for i in 0..n {
            let p = v[i];
            let q = v[(i + 1) % n];
            let vp = a * p[0] + b * p[1] + c;
            let vq = a * q[0] + b * q[1] + c;
            if vp >= 0.0 {
                out.push(p);
            }
            if (vp > 0.0 && vq < 0.0) || (vp < 0.0 && vq > 0.0) {
                let t = vp / (vp - vq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        Polygon { vertices: out }
    }
}

const AREA_EPS: f64 = 1e-15;

/// Exact-by-enumeration count of the open regions of `bbox \ union(lines)`,
/// computed by incremental convex-polygon splitting; concurrent or
/// coincident lines only lower the count.
pub fn enumerate_regions_2d(lines: &[Hyperplane], bbox: Rect) -> Result<(u64, Vec<Region>)> {
    for l in lines {
        if l.normal.dim() != 2 {
            return Err(Error::domain("enumerate_regions_2d needs 2-d hyperplanes"));
        }
    }
    let mut polys = vec![Polygon {
        vertices: vec![
            [bbox.x_min, bbox.y_min],
            [bbox.x_max, bbox.y_min],
            [bbox.x_max, bbox.y_max],
            [bbox.x_min, bbox.y_max],
        ],
    }];
    for line in lines {
        let (a, b) = (line.normal.coords()[0], line.normal.coords()[1]);
        let c = line.offset;
        let mut next = Vec::with_capacity(polys.len());
        for poly in polys {
            let pos = poly.clip_halfplane(a, b, c);
            let neg = poly.clip_halfplane(-a, -b, -c);
            let mut kept = false;
            for part in [pos, neg] {
                if part.area() > AREA_EPS {
                    next.push(part);
                    kept = true;
                }
            }
            if !kept {
                next.push(poly);
            }
        }
        polys = next;
    }
    let regions: Vec<Region> = polys
        .iter()
        .map(|poly| {
            let c = poly.centroid();
            let rep = Point::new(vec![c[0], c[1]]).expect("finite centroid");
            Region {
                sign_vector: lines
                    .iter()
                    .map(|l| if l.eval(&rep) > 0.0 { 1 } else { -1 })
                    .collect(),
                representative: rep,
            }
        })
        .collect();
    Ok((regions.len() as u64, regions))
}

/// For every axis ell and set element i, the grid levels j/L within
/// distance `||a_i||/alpha + 1/L` of the base point's ell-th coordinate.
pub fn lambda_windows(x: &Point, a: &PointSet, l: u64, alpha: f64) -> Result<Vec<LambdaWindow>> {
    if x.dim() != a.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    let d = a.dim();
    let lf = l as f64;
    let mut windows = Vec::with_capacity(d * a.len());
    let mut total = 0u64;
    for ell in 0..d {
        let xe = x.coords()[ell];
        for (i, p) in a.points().iter().enumerate() {
            let radius = p.norm() / alpha + 1.0 / lf;
            let js: Vec<u64> = (0..=l)
                .filter(|&j| (xe - j as f64 / lf).abs() < radius)
                .collect();
            total += js.len() as u64;
            windows.push(LambdaWindow { ell, i, js });
        }
    }
    let bound = 8.0 * d as f64 * a.max_norm() * lf * a.len() as f64 / alpha;
    assert!(
        (total as f64) <= bound,
        "window total {total} exceeds 8dMLk/alpha = {bound}"
    );
    Ok(windows)
}

/// One scalar per region of the breakpoint arrangement
/// `lambda = (j/L - x)/a_i`, restricted to the admissible band
/// `(-1/alpha, -alpha) U (alpha, 1/alpha)`.
pub fn representative_scalars_1d(x: f64, a: &PointSet, l: u64, alpha: f64) -> Result<Vec<f64>> {
    if a.dim() != 1 {
        return Err(Error::domain("representative_scalars_1d needs d = 1"));
    }
    let windows = lambda_windows(&Point::scalar(x), a, l, alpha)?;
    let lf = l as f64;
    let mut cuts: Vec<f64> = Vec::new();
    for w in &windows {
        let ai = a.points()[w.i].coords()[0];
        for &j in &w.js {
            cuts.push((j as f64 / lf - x) / ai);
        }
    }
    let inv = 1.0 / alpha;
    let mut reps = Vec::new();
    for (lo, hi) in [(alpha, inv), (-inv, -alpha)] {
        let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| lo < c && c < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        pts.dedup();
        for w in pts.windows(2) {
            reps.push(0.5 * (w[0] + w[1]));
        }
    }
    // Lemma-derived caps: 2*(8 M L k / alpha) + 4 and C (L M k)^{d^2} with
    // C = 2 * 8/alpha in d = 1.
    let k = a.len() as f64;
    let m = a.max_norm();
    let cap1 = 2.0 * (8.0 * m * lf * k / alpha) + 4.0;
    let cap2 = 2.0 * (8.0 / alpha) * (lf * m * k);
    assert!(
        (reps.len() as f64) <= cap1 && (reps.len() as f64) <= cap2,
        "representative count {} exceeds bounds {cap1} / {cap2}",
        reps.len()
    );
    Ok(reps)
}

/// Feasible parameter set `{(lambda, x) : lambda A + x subset E}` over the
/// admissible band, as a union of open convex polygons in the
/// (lambda, x) plane.
///
/// Computed by chopping the two band rectangles with the slab families
/// `lambda a_i + x in (j/L, (j+1)/L)` over selected cells, largest |a_i|
/// first so infeasible parts are discarded early.
pub fn copy_regions_1d(a: &PointSet, e: &GridSet, alpha: f64) -> Result<Vec<Polygon>> {
    if a.dim() != 1 || e.dim() != 1 {
        return Err(Error::domain("copy_regions_1d needs d = 1"));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    let l = e.resolution();
    let lf = l as f64;
    if e.popcount() == 0 {
        return Ok(Vec::new());
    }
    let inv = 1.0 / alpha;
    let mut order: Vec<f64> = a.points().iter().map(|p| p.coords()[0]).collect();
    order.sort_by(|p, q| q.abs().partial_cmp(&p.abs()).unwrap());

    let mut out = Vec::new();
    for (lo, hi) in [(alpha, inv), (-inv, -alpha)] {
        let mut polys = vec![Polygon {
            vertices: vec![[lo, 0.0], [hi, 0.0], [hi, 1.0], [lo, 1.0]],
        }];
        for &ai in &order {
            let mut next = Vec::new();
            for poly in &polys {
                // image value s = ai * lambda + x; range over the polygon
                let (mut s_min, mut s_max) = (f64::INFINITY, f64::NEG_INFINITY);
                for v in &poly.vertices {
                    let s = ai * v[0] + v[1];
                    s_min = s_min.min(s);
                    s_max = s_max.max(s);
                }
                let j_lo = (s_min * lf).floor().max(0.0) as u64;
                let j_hi = ((s_max * lf).ceil() as i64).clamp(0, l as i64) as u64;
                for j in j_lo..j_hi.min(l.saturating_sub(1) + 1) {
                    if j >= l || !e.bit(j) {
                        continue;
                    }
                    // ai*lambda + x > j/L  and  < (j+1)/L
                    let piece = poly
                        .clip_halfplane(ai, 1.0, -(j as f64) / lf)
                        .clip_halfplane(-ai, -1.0, (j as f64 + 1.0) / lf);
                    if piece.area() > AREA_EPS {
                        next.push(piece);
                    }
                }
            }
            polys = next;
            if polys.is_empty() {
                break;
            }
        }
        out.extend(polys);
    }
    Ok(out)
}
