//! Affine-copy detection: exact witness verification, certified
//! branch-and-bound over the parameter box, and the exact d = 1 oracle.

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arrangement::{copy_regions_1d, representative_scalars_1d};
use crate::error::{Error, Result};
use crate::exact::rat;
use crate::geometry::{in_operator_band, AffineMap, Point, PointSet};
use crate::grid::GridSet;
use crate::interval::Interval;

/// Verdict of a copy search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum DetectionResult {
    /// A rigorously verified witness exists.
    Found { map: AffineMap },
    /// No epsilon-robust copy exists: every image point of any copy would
    /// have to come within epsilon of a cell boundary, or the singular
    /// values within epsilon of the band edge.
    NotFoundCertified { epsilon: f64 },
    /// Budget exhausted with boxes still open.
    Inconclusive { boxes_remaining: u64 },
}

/// Search box: one interval per matrix entry (row-major) and per shift
/// coordinate.
#[derive(Debug, Clone)]
pub struct ParamBox {
    pub entries: Vec<Interval>,
    pub shifts: Vec<Interval>,
}

impl ParamBox {
    pub fn root(dim: usize, alpha: f64) -> ParamBox {
        let inv = 1.0 / alpha;
        ParamBox {
            entries: vec![Interval::new(-inv, inv); dim * dim],
            shifts: vec![Interval::new(0.0, 1.0); dim],
        }
    }

    fn center(&self, dim: usize) -> AffineMap {
        let matrix: Vec<Vec<f64>> = (0..dim)
            .map(|r| (0..dim).map(|c| self.entries[r * dim + c].mid()).collect())
            .collect();
        let shift = Point::new(self.shifts.iter().map(|s| s.mid()).collect())
            .expect("finite box center");
        AffineMap { matrix, shift }
    }
}

/// True iff the matrix is in the band and every image point `T a + x` lies
/// strictly inside a selected open cell; decided in exact arithmetic.
pub fn verify_witness(map: &AffineMap, a: &PointSet, e: &GridSet, alpha: f64) -> Result<bool> {
    if map.dim() != a.dim() || a.dim() != e.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    if !in_operator_band(&map.matrix, alpha)? {
        return Ok(false);
    }
    let l_rat = rat(e.resolution() as f64);
    for p in a.points() {
        let img = map.apply_point_exact(p);
        let mut coords = Vec::with_capacity(img.len());
        for c in &img {
            let scaled = c * &l_rat;
            if scaled.is_negative() || scaled > l_rat || scaled.is_integer() {
                return Ok(false);
            }
            let j = scaled
                .floor()
                .to_integer()
                .to_u64()
                .expect("cell index fits u64");
            coords.push(j);
        }
        if !e.bit(e.linear_index(&coords)) {
            return Ok(false);
        }
    }
    Ok(true)
}

// Enclosure of T a + x over a parameter box, one interval per coordinate.
fn image_enclosure(bx: &ParamBox, a: &Point, dim: usize) -> Vec<Interval> {
    (0..dim)
        .map(|r| {
            let mut acc = bx.shifts[r];
            for c in 0..dim {
                acc = acc + bx.entries[r * dim + c] * a.coords()[c];
            }
            acc
        })
        .collect()
}

// Certified range [sigma_lo, sigma_hi] covering every singular value of
// every matrix in the box, plus column-norm bounds:
// returns (sigma_lo, sigma_hi, min-over-box upper bound on sigma_min,
// min-over-box lower bound on sigma_max).
fn sigma_range(bx: &ParamBox, dim: usize) -> (f64, f64, f64, f64) {
    // Frobenius upper bound
    let mut frob_sq = 0.0f64;
    for e in &bx.entries {
        frob_sq += e.square().hi;
    }
    let sigma_hi = frob_sq.sqrt().next_up();

    // Gershgorin lower bound on eigenvalues of T^t T
    let mut gersh = f64::INFINITY;
    for i in 0..dim {
        let mut diag = Interval::point(0.0);
        for k in 0..dim {
            diag = diag + bx.entries[k * dim + i].square();
        }
        let mut radius = 0.0;
        for j in 0..dim {
            if j == i {
                continue;
            }
            let mut off = Interval::point(0.0);
            for k in 0..dim {
                off = off + bx.entries[k * dim + i] * bx.entries[k * dim + j];
            }
            radius += off.abs().hi;
        }
        gersh = gersh.min(diag.lo - radius);
    }
    let sigma_lo = if gersh > 0.0 {
        gersh.sqrt().next_down().max(0.0)
    } else {
        0.0
    };

    // per-column norms: sigma_min <= ||col_j|| <= sigma_max for every T
    let mut min_col_sup = f64::INFINITY;
    let mut max_col_inf = 0.0f64;
    for j in 0..dim {
        let (mut sup_sq, mut inf_sq) = (0.0f64, 0.0f64);
        for i in 0..dim {
            let e = bx.entries[i * dim + j];
            sup_sq += e.mag() * e.mag();
            let m = e.mig();
            inf_sq += m * m;
        }
        min_col_sup = min_col_sup.min(sup_sq.sqrt().next_up());
        max_col_inf = max_col_inf.max(inf_sq.sqrt().next_down());
    }
    (sigma_lo, sigma_hi, min_col_sup, max_col_inf)
}

// Open cells of E that meet the closed coordinate box, capped at `limit`
// candidates; None means the check was skipped (too many candidates).
fn any_selected_cell_meets(e: &GridSet, enclosure: &[Interval], limit: u64) -> Option<bool> {
    let l = e.resolution();
    let lf = l as f64;
    let dim = e.dim();
    let mut ranges: Vec<(u64, u64)> = Vec::with_capacity(dim);
    let mut count: u64 = 1;
    for iv in enclosure {
        if iv.hi <= 0.0 || iv.lo >= 1.0 {
            return Some(false);
        }
        // cell j meets [lo, hi] iff lo < (j+1)/L and hi > j/L; widen by one
        // cell to absorb rounding of j/L
        let lo = ((iv.lo * lf).floor() as i64 - 1).max(0) as u64;
        let hi = (((iv.hi * lf).ceil() as i64) + 1).clamp(0, l as i64) as u64;
        if lo >= hi {
            return Some(false);
        }
        count = count.saturating_mul(hi - lo);
        ranges.push((lo, hi));
    }
    if count > limit {
        return None;
    }
    let mut coords: Vec<u64> = ranges.iter().map(|r| r.0).collect();
    'cells: loop {
        if e.bit(e.linear_index(&coords)) {
            // confirm genuine overlap with the open cell
            let overlaps = coords.iter().zip(enclosure).all(|(&j, iv)| {
                iv.lo < (j as f64 + 1.0) / lf && iv.hi > j as f64 / lf
            });
            if overlaps {
                return Some(true);
            }
        }
        for axis in (0..dim).rev() {
            coords[axis] += 1;
            if coords[axis] < ranges[axis].1 {
                continue 'cells;
            }
            coords[axis] = ranges[axis].0;
        }
        return Some(false);
    }
}

// True when the enclosure lies strictly inside one selected open cell.
fn strictly_inside_selected(e: &GridSet, enclosure: &[Interval]) -> bool {
    let l = e.resolution();
    let lf = l as f64;
    let mut coords = Vec::with_capacity(e.dim());
    for iv in enclosure {
        if !(iv.lo > 0.0 && iv.hi < 1.0) {
            return false;
        }
        let j = (iv.lo * lf).floor() as u64;
        if j >= l || !(iv.lo > j as f64 / lf && iv.hi < (j as f64 + 1.0) / lf) {
            return false;
        }
        coords.push(j);
    }
    e.bit(e.linear_index(&coords))
}

const CANDIDATE_LIMIT: u64 = 1 << 16;

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Branch-and-bound copy search; see `DetectionResult` for the meaning of
/// each verdict.
pub fn detect_bb(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    epsilon: f64,
    budget: u64,
) -> Result<DetectionResult> {
    Ok(detect_bb_counted(a, e, alpha, epsilon, budget)?.0)
}

/// As `detect_bb`, also reporting the number of boxes explored.
pub fn detect_bb_counted(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    epsilon: f64,
    budget: u64,
) -> Result<(DetectionResult, u64)> {
    let root = ParamBox::root(a.dim(), alpha);
    bb_search(a, e, alpha, epsilon, budget, root)
}

/// Copy search with the translation pinned to `x` (decides membership of
/// one translate in V).
pub fn detect_bb_fixed_shift(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    x: &Point,
    epsilon: f64,
    budget: u64,
) -> Result<(DetectionResult, u64)> {
    if x.dim() != a.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    let mut root = ParamBox::root(a.dim(), alpha);
    root.shifts = x.coords().iter().map(|&c| Interval::point(c)).collect();
    bb_search(a, e, alpha, epsilon, budget, root)
}

fn bb_search(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    epsilon: f64,
    budget: u64,
    root: ParamBox,
) -> Result<(DetectionResult, u64)> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    if a.dim() != e.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    let dim = a.dim();
    if e.popcount() == 0 {
        return Ok((DetectionResult::NotFoundCertified { epsilon }, 1));
    }
    let col_max: Vec<f64> = (0..dim)
        .map(|c| {
            a.points()
                .iter()
                .map(|p| p.coords()[c].abs())
                .fold(0.0, f64::max)
        })
        .collect();

    let mut stack = vec![root];
    let mut explored: u64 = 0;
    while let Some(bx) = stack.pop() {
        explored += 1;
        if explored > budget {
            return Ok((
                DetectionResult::Inconclusive {
                    boxes_remaining: stack.len() as u64 + 1,
                },
                explored,
            ));
        }

        let (sig_lo, sig_hi, min_col_sup, max_col_inf) = sigma_range(&bx, dim);
        let inv = 1.0 / alpha;
        // whole box outside the band
        if sig_hi <= alpha || sig_lo >= inv || min_col_sup <= alpha || max_col_inf >= inv {
            continue;
        }

        let enclosures: Vec<Vec<Interval>> = a
            .points()
            .iter()
            .map(|p| image_enclosure(&bx, p, dim))
            .collect();
        let mut pruned = false;
        for enc in &enclosures {
            if any_selected_cell_meets(e, enc, CANDIDATE_LIMIT) == Some(false) {
                pruned = true;
                break;
            }
        }
        if pruned {
            continue;
        }

        if enclosures.iter().all(|enc| strictly_inside_selected(e, enc)) {
            let center = bx.center(dim);
            if verify_witness(&center, a, e, alpha).unwrap_or(false) {
                return Ok((DetectionResult::Found { map: center }, explored));
            }
        }

        let images_small = enclosures
            .iter()
            .all(|enc| enc.iter().all(|iv| iv.width() < epsilon));
        let params_small = bx.entries.iter().all(|iv| iv.width() < epsilon / dim as f64)
            && bx.shifts.iter().all(|iv| iv.width() < epsilon);
        if images_small && params_small {
            let center = bx.center(dim);
            if !verify_witness(&center, a, e, alpha).unwrap_or(false) {
                // no epsilon-robust copy fits in a box this small around a
                // failing center
                continue;
            }
            return Ok((DetectionResult::Found { map: bx.center(dim) }, explored));
        }

        // split the interval with the largest image-space effect
        let mut best = (0usize, f64::NEG_INFINITY);
        for (idx, iv) in bx.entries.iter().enumerate() {
            let effect = iv.width() * col_max[idx % dim].max(f64::MIN_POSITIVE);
            if effect > best.1 {
                best = (idx, effect);
            }
        }
        for (r, iv) in bx.shifts.iter().enumerate() {
            if iv.width() > best.1 {
                best = (dim * dim + r, iv.width());
            }
        }
        let idx = best.0;
        let (left, right) = if idx < dim * dim {
            let (lo, hi) = bx.entries[idx].bisect();
            let mut a_box = bx.clone();
            let mut b_box = bx;
            a_box.entries[idx] = lo;
            b_box.entries[idx] = hi;
            (a_box, b_box)
        } else {
            let r = idx - dim * dim;
            let (lo, hi) = bx.shifts[r].bisect();
            let mut a_box = bx.clone();
            let mut b_box = bx;
            a_box.shifts[r] = lo;
            b_box.shifts[r] = hi;
            (a_box, b_box)
        };
        stack.push(left);
        stack.push(right);
    }
    Ok((DetectionResult::NotFoundCertified { epsilon }, explored))
}

/// Exact fixed-translation decision in d = 1 via the representative
/// reduction: some scalar in the band maps A into E iff one of the region
/// representatives does.
pub fn detect_1d_at_x(a: &PointSet, e: &GridSet, alpha: f64, x: f64) -> Result<DetectionResult> {
    if a.dim() != 1 || e.dim() != 1 {
        return Err(Error::domain("detect_1d_at_x needs d = 1"));
    }
    for lambda in representative_scalars_1d(x, a, e.resolution(), alpha)? {
        let map = AffineMap::scalar(lambda, x);
        if verify_witness(&map, a, e, alpha).unwrap_or(false) {
            return Ok(DetectionResult::Found { map });
        }
    }
    Ok(DetectionResult::NotFoundCertified { epsilon: 0.0 })
}

/// Exact x-set admitting a copy in d = 1: the projection of the feasible
/// parameter polygons, merged to disjoint open intervals, with its total
/// length.
pub fn exact_v_1d(a: &PointSet, e: &GridSet, alpha: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let polys = copy_regions_1d(a, e, alpha)?;
    let mut spans: Vec<(f64, f64)> = polys
        .iter()
        .map(|p| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in &p.vertices {
                lo = lo.min(v[1]);
                hi = hi.max(v[1]);
            }
            (lo, hi)
        })
        .filter(|(lo, hi)| hi - lo > 1e-12)
        .collect();
    spans.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let measure = merged.iter().map(|(lo, hi)| hi - lo).sum();
    Ok((merged, measure))
}

/// Cheap randomized Found-side heuristic: draws (T, x) and keeps the first
/// draw that verifies. Absence of a result proves nothing.
pub fn sample_witness_search(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<Option<AffineMap>> {
    if a.dim() != e.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    let dim = a.dim();
    let inv = 1.0 / alpha;
    let unit = |h: u64| (h >> 11) as f64 / (1u64 << 53) as f64;
    for t in 0..trials {
        let mut ctr = 0u64;
        let mut draw = || {
            ctr += 1;
            unit(crate::grid::cell_hash(seed, t, ctr))
        };
        let matrix: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| (2.0 * draw() - 1.0) * inv).collect())
            .collect();
        let shift = Point::new((0..dim).map(|_| draw()).collect())?;
        let map = AffineMap { matrix, shift };
        if verify_witness(&map, a, e, alpha).unwrap_or(false) {
            return Ok(Some(map));
        }
    }
    Ok(None)
}

/// JSON-serializable record of one detection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AffineMap>,
    pub epsilon: f64,
    pub boxes_explored: u64,
    pub wall_time_ms: u128,
}

/// Run `detect_bb` and wrap the outcome with timing and box counts.
pub fn detection_report(
    a: &PointSet,
    e: &GridSet,
    alpha: f64,
    epsilon: f64,
    budget: u64,
) -> Result<DetectionReport> {
    let start = std::time::Instant::now();
    let (result, boxes_explored) = detect_bb_counted(a, e, alpha, epsilon, budget)?;
    let wall_time_ms = start.elapsed().as_millis();
    let (verdict, witness) = match result {
        DetectionResult::Found { map } => ("found".to_string(), Some(map)),
        DetectionResult::NotFoundCertified { .. } => ("not_found_certified".to_string(), None),
        DetectionResult::Inconclusive { .. } => ("inconclusive".to_string(), None),
    };
    Ok(DetectionReport {
        verdict,
        witness,
        epsilon,
        boxes_explored,
        wall_time_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn verify_examples() {
        let a = PointSet::scalars(&[0.1, 0.2]).unwrap();
        let full = GridSet::full(1, 2).unwrap();
        let empty = GridSet::empty(1, 2).unwrap();
        let id = AffineMap::scalar(1.0, 0.0);
        assert!(verify_witness(&id, &a, &full, 0.5).unwrap());
        assert!(!verify_witness(&id, &a, &empty, 0.5).unwrap());

        let a2 = PointSet::scalars(&[0.5, 1.0]).unwrap();
        let e = GridSet::from_cells(1, 4, &[0, 2]).unwrap();
        let map = AffineMap::scalar(0.45, 0.29);
        assert!(verify_witness(&map, &a2, &e, 0.4).unwrap());
    }

    #[test]
    fn verify_rejects_boundary_image() {
        // image exactly on a grid line
        let a = PointSet::scalars(&[0.5]).unwrap();
        let map = AffineMap::scalar(1.0, 0.0);
        let e = GridSet::full(1, 2).unwrap();
        assert!(!verify_witness(&map, &a, &e, 0.5).unwrap());
    }

    #[test]
    fn bb_empty_grid() {
        let a = PointSet::scalars(&[0.3]).unwrap();
        let e = GridSet::empty(1, 4).unwrap();
        assert!(matches!(
            detect_bb(&a, &e, 0.5, 1e-4, 1000).unwrap(),
            DetectionResult::NotFoundCertified { .. }
        ));
    }

    #[test]
    fn bb_full_grid_tiny_point() {
        let a = PointSet::scalars(&[0.01]).unwrap();
        let e = GridSet::full(1, 2).unwrap();
        match detect_bb(&a, &e, 0.5, 1e-4, 1_000_000).unwrap() {
            DetectionResult::Found { map } => {
                assert!(verify_witness(&map, &a, &e, 0.5).unwrap());
            }
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn bb_two_cell_instance() {
        let a = PointSet::scalars(&[0.5, 1.0]).unwrap();
        let e = GridSet::from_cells(1, 4, &[0, 2]).unwrap();
        match detect_bb(&a, &e, 0.4, 1e-4, 5_000_000).unwrap() {
            DetectionResult::Found { map } => {
                assert!(verify_witness(&map, &a, &e, 0.4).unwrap());
            }
            other => panic!("expected Found, got {other:?}"),
        }
        let (_, mu) = exact_v_1d(&a, &e, 0.4).unwrap();
        assert!(mu > 0.0);
    }

    #[test]
    fn bb_budget_zero_is_inconclusive() {
        let a = PointSet::scalars(&[0.3]).unwrap();
        let e = GridSet::full(1, 2).unwrap();
        assert!(matches!(
            detect_bb(&a, &e, 0.5, 1e-4, 0).unwrap(),
            DetectionResult::Inconclusive { .. }
        ));
    }

    #[test]
    fn bb_2d_found_and_certified() {
        let a = PointSet::new(vec![
            Point::new(vec![0.05, 0.0]).unwrap(),
            Point::new(vec![0.0, 0.05]).unwrap(),
        ])
        .unwrap();
        let full = GridSet::full(2, 2).unwrap();
        match detect_bb(&a, &full, 0.5, 1e-3, 2_000_000).unwrap() {
            DetectionResult::Found { map } => {
                assert!(verify_witness(&map, &a, &full, 0.5).unwrap());
            }
            other => panic!("expected Found, got {other:?}"),
        }
        let empty = GridSet::empty(2, 2).unwrap();
        assert!(matches!(
            detect_bb(&a, &empty, 0.5, 1e-3, 1000).unwrap(),
            DetectionResult::NotFoundCertified { .. }
        ));
    }

    #[test]
    fn at_x_examples() {
        let a = PointSet::scalars(&[0.1]).unwrap();
        let full = GridSet::full(1, 2).unwrap();
        assert!(matches!(
            detect_1d_at_x(&a, &full, 0.5, 0.0).unwrap(),
            DetectionResult::Found { .. }
        ));
        let empty = GridSet::empty(1, 2).unwrap();
        assert!(matches!(
            detect_1d_at_x(&a, &empty, 0.5, 0.0).unwrap(),
            DetectionResult::NotFoundCertified { .. }
        ));
    }

    #[test]
    fn exact_v_full_grid() {
        let a = PointSet::scalars(&[0.1]).unwrap();
        let e = GridSet::full(1, 2).unwrap();
        let (ivs, mu) = exact_v_1d(&a, &e, 0.5).unwrap();
        assert!((mu - 1.0).abs() < 1e-9, "mu = {mu}, intervals {ivs:?}");
    }

    #[test]
    fn exact_v_empty() {
        let a = PointSet::scalars(&[0.1]).unwrap();
        let e = GridSet::empty(1, 2).unwrap();
        let (ivs, mu) = exact_v_1d(&a, &e, 0.5).unwrap();
        assert!(ivs.is_empty() && mu == 0.0);
    }

    #[test]
    fn exact_v_agrees_with_at_x_sweep() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let k = rng.gen_range(1..=3);
            let vals: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.9)).collect();
            let a = match PointSet::scalars(&vals) {
                Ok(a) => a,
                Err(_) => continue,
            };
            let l = rng.gen_range(2..=8u64);
            let cells: Vec<u64> = (0..l).filter(|_| rng.gen_bool(0.5)).collect();
            let e = if cells.is_empty() {
                GridSet::empty(1, l).unwrap()
            } else {
                GridSet::from_cells(1, l, &cells).unwrap()
            };
            let (ivs, _) = exact_v_1d(&a, &e, 0.4).unwrap();
            for _ in 0..20 {
                let x: f64 = rng.gen_range(0.0..1.0);
                let inside = ivs.iter().any(|&(lo, hi)| lo + 1e-9 < x && x < hi - 1e-9);
                let near_edge = ivs
                    .iter()
                    .any(|&(lo, hi)| (x - lo).abs() < 1e-9 || (x - hi).abs() < 1e-9);
                if near_edge {
                    continue;
                }
                let found = matches!(
                    detect_1d_at_x(&a, &e, 0.4, x).unwrap(),
                    DetectionResult::Found { .. }
                );
                assert_eq!(found, inside, "x = {x}, intervals {ivs:?}");
            }
        }
    }

    #[test]
    fn sampler_contract() {
        let a = PointSet::scalars(&[0.05]).unwrap();
        let full = GridSet::full(1, 2).unwrap();
        let w = sample_witness_search(&a, &full, 0.5, 2000, 42).unwrap();
        let map = w.expect("witness should be easy to hit");
        assert!(verify_witness(&map, &a, &full, 0.5).unwrap());

        let empty = GridSet::empty(1, 2).unwrap();
        assert!(sample_witness_search(&a, &empty, 0.5, 200, 42)
            .unwrap()
            .is_none());
    }

    #[test]
    fn monotone_in_grid_and_alpha() {
        let a = PointSet::scalars(&[0.5, 1.0]).unwrap();
        let e_small = GridSet::from_cells(1, 4, &[0, 2]).unwrap();
        let e_big = GridSet::full(1, 4).unwrap();
        let w = match detect_bb(&a, &e_small, 0.4, 1e-4, 5_000_000).unwrap() {
            DetectionResult::Found { map } => map,
            other => panic!("expected Found, got {other:?}"),
        };
        assert!(verify_witness(&w, &a, &e_big, 0.4).unwrap());
        // shrinking alpha widens the band, same witness stays valid
        assert!(verify_witness(&w, &a, &e_small, 0.3).unwrap());
    }

    #[test]
    fn report_serializes() {
        let a = PointSet::scalars(&[0.3]).unwrap();
        let e = GridSet::empty(1, 4).unwrap();
        let rep = detection_report(&a, &e, 0.5, 1e-4, 1000).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("not_found_certified"));
        assert!(!json.contains("witness"));
    }
}
