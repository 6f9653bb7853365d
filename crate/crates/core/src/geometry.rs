//! Points, point sets, affine maps, and the norm-band predicates.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, rat, Rat};

/// Row-major d x d matrix.
pub type Matrix = Vec<Vec<f64>>;

/// A point of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("point must have dimension >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    pub fn scalar(x: f64) -> Self {
        Point::new(vec![x]).expect("finite scalar")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Exact bitwise equality of coordinates.
    pub fn bit_eq(&self, other: &Point) -> bool {
        self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A finite ordered set of pairwise-distinct points sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.dim(),
            None => return Err(Error::domain("point set must be nonempty")),
        };
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::domain("all points must share one dimension"));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i].bit_eq(&points[j]) {
                    return Err(Error::domain(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn scalars(values: &[f64]) -> Result<Self> {
        PointSet::new(values.iter().map(|&v| Point::scalar(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.norm())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_origin(&self) -> bool {
        self.points
            .iter()
            .any(|p| p.coords().iter().all(|&c| c == 0.0))
    }

    /// Text form: `d=<d> k=<k>` then one point per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("d={} k={}\n", self.dim, self.points.len());
        for p in &self.points {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty point set file".into()))?;
        let mut d = None;
        let mut k = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("d=") {
                d = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = tok.strip_prefix("k=") {
                k = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else {
                return Err(Error::Parse(format!("unexpected header token {tok:?}")));
            }
        }
        let d = d.ok_or_else(|| Error::Parse("missing d= in header".into()))?;
        let k = k.ok_or_else(|| Error::Parse("missing k= in header".into()))?;
        let mut points = Vec::with_capacity(k);
        for line in lines.take(k) {
            let coords: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if coords.len() != d {
                return Err(Error::Parse(format!(
                    "expected {d} coordinates, got {}",
                    coords.len()
                )));
            }
            points.push(Point::new(coords)?);
        }
        if points.len() != k {
            return Err(Error::Parse(format!(
                "expected {k} points, got {}",
                points.len()
            )));
        }
        PointSet::new(points)
    }
}

/// Relative separation: min pairwise distance over max norm, in (0, 2].
pub fn delta(a: &PointSet) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::domain("delta needs at least 2 points"));
    }
    let max_norm = a.max_norm();
    if max_norm == 0.0 {
        return Err(Error::domain("delta undefined: all points at the origin"));
    }
    let mut min_dist = f64::INFINITY;
    let pts = a.points();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            min_dist = min_dist.min(pts[i].dist(&pts[j]));
        }
    }
    Ok(min_dist / max_norm)
}

/// Certified enclosures of the extreme singular values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBounds {
    pub sigma_min_lo: f64,
    pub sigma_min_hi: f64,
    pub sigma_max_lo: f64,
    pub sigma_max_hi: f64,
}

fn check_square(t: &Matrix) -> Result<usize> {
    let d = t.len();
    if d == 0 {
        return Err(Error::domain("matrix must be at least 1x1"));
    }
    for row in t {
        if row.len() != d {
            return Err(Error::domain("matrix must be square"));
        }
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
    }
    Ok(d)
}

/// Enclose the extreme singular values of `t` by exact bisection on the
/// characteristic polynomial of `t^t t`.
pub fn op_norm_bounds(t: &Matrix) -> Result<SigmaBounds> {
    check_square(t)?;
    let b = exact::gram(t);
    // eigenvalue tolerance small enough that sqrt keeps the sigma enclosure
    // width under 1e-10 * (1 + sigma_max)
    let scale: f64 = b
        .iter()
        .map(|row| row.iter().map(|c| exact::rat_to_f64(&c.abs())).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = rat(1e-24) * rat(1.0 + scale);
    let enc = exact::eigen_enclosure_psd(&b, &tol);
    Ok(SigmaBounds {
        sigma_min_lo: exact::sqrt_lower(&enc.min.0),
        sigma_min_hi: exact::sqrt_upper(&enc.min.1),
        sigma_max_lo: exact::sqrt_lower(&enc.max.0),
        sigma_max_hi: exact::sqrt_upper(&enc.max.1),
    })
}

/// Strict band test: sigma_min > alpha and sigma_max < 1/alpha.
///
/// Decisions are exact; `BoundaryUndecidable` is returned only when a
/// singular value coincides with a threshold exactly and neither condition
/// already fails.
pub fn in_operator_band(t: &Matrix, alpha: f64) -> Result<bool> {
    check_square(t)?;
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    let b = exact::gram(t);
    let a2 = rat(alpha) * rat(alpha);
    let b2 = Rat::new(
        a2.denom().clone(),
        a2.numer().clone(),
    );

    let (below_min, min_is_root, total) = exact::root_position(&b, &a2);
    let min_ok = if below_min >= 1 {
        Some(false)
    } else if min_is_root {
        None
    } else {
        Some(true)
    };

    let (below_max, max_is_root, _) = exact::root_position(&b, &b2);
    let max_ok = if below_max == total {
        Some(true)
    } else if max_is_root && below_max == total - 1 {
        None
    } else {
        Some(false)
    };

    match (min_ok, max_ok) {
        (Some(false), _) | (_, Some(false)) => Ok(false),
        (None, _) | (_, None) => Err(Error::BoundaryUndecidable),
        _ => Ok(true),
    }
}

/// A linear map plus translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub shift: Point,
}

impl AffineMap {
    pub fn new(matrix: Matrix, shift: Point) -> Result<Self> {
        let d = check_square(&matrix)?;
        if shift.dim() != d {
            return Err(Error::domain("matrix and shift dimensions differ"));
        }
        Ok(AffineMap { matrix, shift })
    }

    pub fn scalar(lambda: f64, x: f64) -> Self {
        AffineMap {
            matrix: vec![vec![lambda]],
            shift: Point::scalar(x),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        let coords: Vec<f64> = self
            .matrix
            .iter()
            .zip(self.shift.coords())
            .map(|(row, &s)| {
                row.iter().zip(p.coords()).map(|(m, c)| m * c).sum::<f64>() + s
            })
            .collect();
        Point { coords }
    }

    /// Exact rational image of a point, coordinate by coordinate.
    pub fn apply_point_exact(&self, p: &Point) -> Vec<Rat> {
        self.matrix
            .iter()
            .zip(self.shift.coords())
            .map(|(row, &s)| {
                let mut acc = rat(s);
                for (m, c) in row.iter().zip(p.coords()) {
                    acc += rat(*m) * rat(*c);
                }
                acc
            })
            .collect()
    }
}

/// Image set {T a + x : a in A}, order-preserving.
pub fn apply_affine(map: &AffineMap, a: &PointSet) -> Result<PointSet> {
    if map.dim() != a.dim() {
        return Err(Error::domain("map and point set dimensions differ"));
    }
    PointSet::new(a.points().iter().map(|p| map.apply_point(p)).collect())
}

/// Translate so the pivot lands on the origin; returns the translated set and
/// the separation constant C / (C + |a0|) with C the minimal norm over A.
///
/// A zero minimal norm (pivot already at the origin) degenerates the constant
/// to 0.
pub fn normalize_origin(a: &PointSet, pivot_index: usize) -> Result<(PointSet, f64)> {
    let pts = a.points();
    let pivot = pts
        .get(pivot_index)
        .ok_or_else(|| Error::domain("pivot index out of bounds"))?
        .clone();
    let translated = PointSet::new(pts.iter().map(|p| p.sub(&pivot)).collect())?;
    let c = a.min_norm();
    let c_tilde = if c == 0.0 {
        0.0
    } else {
        c / (c + pivot.norm())
    };
    Ok((translated, c_tilde))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps2(pts: &[(f64, f64)]) -> PointSet {
        PointSet::new(
            pts.iter()
                .map(|&(x, y)| Point::new(vec![x, y]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn delta_unit_axes() {
        let a = ps2(&[(1.0, 0.0), (0.0, 1.0)]);
        assert!((delta(&a).unwrap() - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn delta_scalar_set() {
        let a = PointSet::scalars(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(delta(&a).unwrap(), 0.25);
    }

    #[test]
    fn delta_square_vertices() {
        let a = ps2(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]);
        let expected = 2.0 * (std::f64::consts::PI / 4.0).sin();
        assert!((delta(&a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn delta_rejects_singletons() {
        let a = PointSet::scalars(&[1.0]).unwrap();
        assert!(matches!(delta(&a), Err(Error::Domain(_))));
    }

    #[test]
    fn op_norm_diag() {
        let sb = op_norm_bounds(&vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert!(sb.sigma_min_lo <= 2.0 && 2.0 <= sb.sigma_min_hi);
        assert!(sb.sigma_max_lo <= 3.0 && 3.0 <= sb.sigma_max_hi);
        assert!(sb.sigma_max_hi - sb.sigma_max_lo <= 1e-10 * 4.0);
    }

    #[test]
    fn op_norm_rotation() {
        let th = 30.0_f64.to_radians();
        let r = vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]];
        let sb = op_norm_bounds(&r).unwrap();
        assert!(sb.sigma_min_lo <= 1.0 && 1.0 <= sb.sigma_min_hi);
        assert!(sb.sigma_max_lo <= 1.0 && 1.0 <= sb.sigma_max_hi);
        assert!(sb.sigma_min_lo <= sb.sigma_max_hi);
    }

    #[test]
    fn op_norm_shear() {
        let t = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
        let sb = op_norm_bounds(&t).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((sb.sigma_max_lo - phi).abs() < 1e-9);
        assert!((sb.sigma_min_hi - 1.0 / phi).abs() < 1e-9);
    }

    #[test]
    fn band_rotation_inside() {
        let th = 1.0_f64;
        let r = vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]];
        assert!(in_operator_band(&r, 0.5).unwrap());
    }

    #[test]
    fn band_diag_outside() {
        let t = vec![vec![3.0, 0.0], vec![0.0, 1.0]];
        assert!(!in_operator_band(&t, 0.5).unwrap());
    }

    #[test]
    fn band_scalar() {
        assert!(in_operator_band(&vec![vec![-0.7]], 0.5).unwrap());
        assert!(!in_operator_band(&vec![vec![0.3]], 0.5).unwrap());
    }

    #[test]
    fn band_boundary_undecidable() {
        // sigma = 0.5 exactly equals alpha = 0.5
        let t = vec![vec![0.5]];
        assert!(matches!(
            in_operator_band(&t, 0.5),
            Err(Error::BoundaryUndecidable)
        ));
    }

    #[test]
    fn apply_affine_identity_and_scale() {
        let a = PointSet::scalars(&[1.0, 2.0]).unwrap();
        let id = AffineMap::scalar(1.0, 0.0);
        assert_eq!(apply_affine(&id, &a).unwrap(), a);
        let m = AffineMap::scalar(2.0, 1.0);
        let img = apply_affine(&m, &a).unwrap();
        assert_eq!(
            img.points().iter().map(|p| p.coords()[0]).collect::<Vec<_>>(),
            vec![3.0, 5.0]
        );
    }

    #[test]
    fn apply_affine_rotation() {
        let rot = AffineMap::new(
            vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            Point::new(vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let a = ps2(&[(1.0, 0.0)]);
        let img = apply_affine(&rot, &a).unwrap();
        assert_eq!(img.points()[0].coords(), &[0.0, 1.0]);
    }

    #[test]
    fn normalize_origin_scalars() {
        let a = PointSet::scalars(&[1.0, 2.0]).unwrap();
        let (tilde, c) = normalize_origin(&a, 0).unwrap();
        assert_eq!(
            tilde.points().iter().map(|p| p.coords()[0]).collect::<Vec<_>>(),
            vec![0.0, 1.0]
        );
        assert_eq!(c, 0.5);
    }

    #[test]
    fn normalize_origin_degenerate_pivot() {
        let a = PointSet::scalars(&[0.0, 1.0]).unwrap();
        let (tilde, c) = normalize_origin(&a, 0).unwrap();
        assert_eq!(tilde, a);
        assert_eq!(c, 0.0);
    }

    #[test]
    fn normalize_origin_2d() {
        let a = ps2(&[(3.0, 0.0), (0.0, 4.0)]);
        let (tilde, c) = normalize_origin(&a, 0).unwrap();
        assert_eq!(tilde.points()[1].coords(), &[-3.0, 4.0]);
        assert_eq!(c, 0.5);
    }

    #[test]
    fn pointset_text_round_trip() {
        let a = ps2(&[(0.1, 0.2), (1.0 / 3.0, -0.75)]);
        let text = a.to_text();
        let back = PointSet::from_text(&text).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn normalize_inequality_holds() {
        let a = PointSet::scalars(&[0.5, 0.9, 1.3]).unwrap();
        let (tilde, c) = normalize_origin(&a, 0).unwrap();
        // the translated set gains the origin, so delta uses the other points
        assert!(delta(&tilde).unwrap() >= c * delta(&a).unwrap() - 1e-15);
    }
}
