//! Generators for the example families and the separation-condition report.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delta, Point, PointSet};

/// Rule producing the n-th value of a real sequence (1-based index).
pub type RealSeq = Arc<dyn Fn(u32) -> f64 + Send + Sync>;
/// Rule producing the k-th direction vector (1-based index).
pub type DirSeq = Arc<dyn Fn(u32) -> Point + Send + Sync>;

/// A rule producing the finite set A_n for each stage n.
#[derive(Clone)]
pub struct SequenceFamily {
    label: String,
    dim: usize,
    n_min: u32,
    gen: Arc<dyn Fn(u32) -> Result<PointSet> + Send + Sync>,
}

impl std::fmt::Debug for SequenceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SequenceFamily")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("n_min", &self.n_min)
            .finish()
    }
}

impl SequenceFamily {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        n_min: u32,
        gen: impl Fn(u32) -> Result<PointSet> + Send + Sync + 'static,
    ) -> Self {
        SequenceFamily {
            label: label.into(),
            dim,
            n_min,
            gen: Arc::new(gen),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Smallest stage index with a valid (>= 2 point, origin-free) set.
    pub fn n_min(&self) -> u32 {
        self.n_min
    }

    pub fn set(&self, n: u32) -> Result<PointSet> {
        if n < self.n_min {
            return Err(Error::domain(format!(
                "family {} starts at n = {}",
                self.label, self.n_min
            )));
        }
        let a = (self.gen)(n)?;
        if a.contains_origin() {
            return Err(Error::domain("generated set contains the origin"));
        }
        Ok(a)
    }
}

/// One row of the separation-condition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub n: u32,
    pub k_n: usize,
    pub delta_n: f64,
    /// -log(delta_n) / k_n
    pub score: f64,
}

/// Descriptive table of delta(A_n) and the normalized log-separation score.
pub fn condition_report(family: &SequenceFamily, n_max: u32) -> Result<Vec<ConditionRow>> {
    if n_max < 1 {
        return Err(Error::domain("n_max must be >= 1"));
    }
    let mut rows = Vec::new();
    for n in family.n_min()..=n_max {
        let a = family.set(n)?;
        let d = delta(&a)?;
        rows.push(ConditionRow {
            n,
            k_n: a.len(),
            delta_n: d,
            score: -d.ln() / a.len() as f64,
        });
    }
    Ok(rows)
}

/// Vertices of the regular (n+1)-gon inscribed in the circle of radius
/// `radii(n)`.
pub fn gen_polygon_family(radii: RealSeq) -> SequenceFamily {
    gen_polygon_family_perturbed(radii, 0.0)
}

/// Polygon family with a deterministic radial jitter of relative magnitude
/// `eta` that makes all vertex norms distinct across one stage.
pub fn gen_polygon_family_perturbed(radii: RealSeq, eta: f64) -> SequenceFamily {
    SequenceFamily::new("polygon", 2, 1, move |n| {
        let a_n = radii(n);
        if !(a_n > 0.0) {
            return Err(Error::domain(format!("radius a_{n} = {a_n} must be positive")));
        }
        let verts = n as usize + 1;
        let mut pts = Vec::with_capacity(verts);
        for j in 0..verts {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / verts as f64;
            let r = a_n * (1.0 + eta * j as f64 / verts as f64);
            pts.push(Point::new(vec![r * theta.cos(), r * theta.sin()])?);
        }
        PointSet::new(pts)
    })
}

/// The geometric-block family
/// `A_n = { r_1...r_n * rho_1 rho_2^2 ... rho_{n-1}^{n-1} * rho_n^k }` for
/// `k = 0..n`; the generator re-derives delta and checks it against the
/// closed form `rho_n^{n-1} - rho_n^n`.
pub fn gen_product_family(r_seq: RealSeq, rho_seq: RealSeq) -> SequenceFamily {
    SequenceFamily::new("product", 1, 1, move |n| {
        let rho_n = rho_seq(n);
        if !(0.0 < rho_n && rho_n < 1.0) {
            return Err(Error::domain(format!("rho_{n} = {rho_n} outside (0,1)")));
        }
        let mut scale = 1.0;
        for i in 1..=n {
            let r_i = r_seq(i);
            if !(0.0 < r_i && r_i < 1.0) {
                return Err(Error::domain(format!("r_{i} = {r_i} outside (0,1)")));
            }
            scale *= r_i;
        }
        for i in 1..n {
            let rho_i = rho_seq(i);
            if !(0.0 < rho_i && rho_i < 1.0) {
                return Err(Error::domain(format!("rho_{i} = {rho_i} outside (0,1)")));
            }
            scale *= rho_i.powi(i as i32);
        }
        let values: Vec<f64> = (0..=n).map(|k| scale * rho_n.powi(k as i32)).collect();
        let a = PointSet::scalars(&values)?;
        let formula = rho_n.powi(n as i32 - 1) - rho_n.powi(n as i32);
        let measured = delta(&a)?;
        if (measured - formula).abs() > 1e-12 * formula.max(f64::MIN_POSITIVE) {
            return Err(Error::domain(format!(
                "product family self-check failed at n = {n}: delta {measured} vs formula {formula}"
            )));
        }
        Ok(a)
    })
}

/// Diagnostic warnings for product-family parameters over a stage range:
/// the checks are numeric trends, not proofs.
pub fn product_family_warnings(r_seq: &RealSeq, rho_seq: &RealSeq, n_max: u32) -> Vec<String> {
    let mut warnings = Vec::new();
    for i in 1..n_max {
        if r_seq(i + 1) >= r_seq(i) {
            warnings.push(format!("r is not strictly decreasing at n = {i}"));
            break;
        }
    }
    for i in 1..n_max {
        if rho_seq(i + 1) < rho_seq(i) {
            warnings.push(format!("rho is not nondecreasing at n = {i}"));
            break;
        }
    }
    if n_max >= 8 {
        let early = (1.0 - rho_seq(n_max / 4)).ln() / (n_max / 4) as f64;
        let late = (1.0 - rho_seq(n_max)).ln() / n_max as f64;
        if late.abs() > 0.75 * early.abs() {
            warnings.push(format!(
                "log(1 - rho_n)/n shows no decay over 1..{n_max} ({early:.4} -> {late:.4})"
            ));
        }
    }
    warnings
}

/// Prefix family: the n-th stage keeps the first n+1 points `norms(k) * dirs(k)`.
pub fn gen_sphere_family(dim: usize, norms: RealSeq, dirs: DirSeq) -> SequenceFamily {
    SequenceFamily::new("sphere", dim, 1, move |n| {
        let mut pts = Vec::with_capacity(n as usize + 1);
        for k in 1..=(n + 1) {
            let a_k = norms(k);
            if !(a_k > 0.0) {
                return Err(Error::domain(format!("norm a_{k} = {a_k} must be positive")));
            }
            let u = dirs(k);
            if u.dim() != dim {
                return Err(Error::domain("direction dimension mismatch"));
            }
            if (u.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "direction {k} is not unit length (norm {})",
                    u.norm()
                )));
            }
            pts.push(Point::new(u.coords().iter().map(|&c| a_k * c).collect())?);
        }
        PointSet::new(pts)
    })
}

/// Geometric prefix family `A_n = { r, r^2, ..., r^n }` in dimension one.
pub fn gen_geometric_prefix(ratio: f64) -> SequenceFamily {
    SequenceFamily::new("geometric", 1, 2, move |n| {
        if !(0.0 < ratio && ratio < 1.0) {
            return Err(Error::domain("ratio must lie in (0, 1)"));
        }
        let values: Vec<f64> = (1..=n).map(|k| ratio.powi(k as i32)).collect();
        PointSet::scalars(&values)
    })
}

/// Outcome of the annulus subsequence selection at stage n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSelection {
    /// 1-based indices of the chosen vectors a_1, a_3, ..., a_{2n+1}.
    pub indices: Vec<u64>,
    pub rho_n: f64,
    pub m: u32,
    pub k0: u64,
}

/// Tuning for the annulus scans.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusConfig {
    /// consecutive indices whose ratio must exceed rho_n at k0
    pub ratio_window: u64,
    /// maximum index scanned in any search
    pub scan_budget: u64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig {
            ratio_window: 64,
            scan_budget: 1_000_000,
        }
    }
}

/// Pick, for stage n with `rho_n = 1 - exp(-sqrt(n))`, one index per odd
/// annulus `[rho^{m+j}, rho^{m+j-1})`, smallest index first.
pub fn select_annulus_subsequence(
    norms: &RealSeq,
    n: u32,
    config: AnnulusConfig,
) -> Result<AnnulusSelection> {
    if n < 1 {
        return Err(Error::domain("n must be >= 1"));
    }
    let rho_n = 1.0 - (-(n as f64).sqrt()).exp();

    // k0: smallest k whose ratio stays above rho_n for a whole window
    let mut k0 = None;
    'outer: for k in 1..=config.scan_budget {
        for w in 0..config.ratio_window {
            let a = norms(u32::try_from(k + w).map_err(|_| {
                Error::SearchExhausted("norm index exceeds u32".into())
            })?);
            let b = norms(u32::try_from(k + w + 1).unwrap_or(u32::MAX));
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::domain("norms must be positive"));
            }
            if b / a <= rho_n {
                continue 'outer;
            }
        }
        k0 = Some(k);
        break;
    }
    let k0 = k0.ok_or_else(|| {
        Error::SearchExhausted(format!(
            "no index with norm ratio > rho_{n} = {rho_n:.6} over a window of {}",
            config.ratio_window
        ))
    })?;

    // m: smallest positive integer with rho^m <= ||x_{k0}||
    let norm_k0 = norms(k0 as u32);
    let mut m = 1u32;
    while rho_n.powi(m as i32) > norm_k0 {
        m += 1;
        if m > 10_000 {
            return Err(Error::SearchExhausted("annulus exponent m not found".into()));
        }
    }

    let mut indices = Vec::with_capacity(n as usize + 1);
    for j in (1..=(2 * n + 1)).step_by(2) {
        let lo = rho_n.powi((m + j) as i32);
        let hi = rho_n.powi((m + j - 1) as i32);
        let mut found = None;
        for k in 1..=config.scan_budget {
            let v = norms(u32::try_from(k).unwrap_or(u32::MAX));
            if v >= lo && v < hi {
                found = Some(k);
                break;
            }
        }
        indices.push(found.ok_or_else(|| {
            Error::SearchExhausted(format!(
                "no norm found in annulus [{lo:.6}, {hi:.6}) for j = {j}"
            ))
        })?);
    }
    Ok(AnnulusSelection {
        indices,
        rho_n,
        m,
        k0,
    })
}

/// One-dimensional family built from the annulus selection over a positive
/// scalar sequence; the selected values become the stage set.
pub fn gen_annulus_family(norms: RealSeq, config: AnnulusConfig) -> SequenceFamily {
    SequenceFamily::new("annulus", 1, 1, move |n| {
        let sel = select_annulus_subsequence(&norms, n, config)?;
        let values: Vec<f64> = sel
            .indices
            .iter()
            .map(|&k| norms(u32::try_from(k).unwrap_or(u32::MAX)))
            .collect();
        let a = PointSet::scalars(&values)?;
        let bound = sel.rho_n.powi(2 * n as i32 - 1) * (1.0 - sel.rho_n);
        let d = delta(&a)?;
        if d < bound * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "annulus family separation bound violated at n = {n}: {d} < {bound}"
            )));
        }
        Ok(a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_seq(v: f64) -> RealSeq {
        Arc::new(move |_| v)
    }

    #[test]
    fn polygon_two_gon() {
        let fam = gen_polygon_family(const_seq(1.0));
        let a = fam.set(1).unwrap();
        assert_eq!(a.len(), 2);
        assert!((a.points()[0].coords()[0] - 1.0).abs() < 1e-15);
        assert!((a.points()[1].coords()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_delta_formula() {
        let fam = gen_polygon_family(const_seq(1.0));
        for (n, radius) in [(3u32, 1.0), (5, 0.5)] {
            let fam = gen_polygon_family(const_seq(radius));
            let a = fam.set(n).unwrap();
            let expected = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).sin();
            assert!(
                (delta(&a).unwrap() - expected).abs() < 1e-12,
                "n = {n}"
            );
        }
        let _ = fam;
    }

    #[test]
    fn product_small_cases() {
        let fam = gen_product_family(const_seq(0.5), Arc::new(|n| 1.0 - ((n + 1) as f64).powi(-2)));
        let a1 = fam.set(1).unwrap();
        assert_eq!(a1.len(), 2);
        assert!((a1.points()[0].coords()[0] - 0.5).abs() < 1e-15);
        assert!((a1.points()[1].coords()[0] - 0.375).abs() < 1e-15);
        assert!((delta(&a1).unwrap() - 0.25).abs() < 1e-15);

        let a3 = fam.set(3).unwrap();
        let rho3: f64 = 1.0 - 1.0 / 16.0;
        let expected = rho3.powi(2) - rho3.powi(3);
        assert!((delta(&a3).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.0549316).abs() < 1e-6);
    }

    #[test]
    fn product_rejects_bad_params() {
        let fam = gen_product_family(const_seq(1.5), const_seq(0.5));
        assert!(matches!(fam.set(1), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_norms_exact() {
        let fam = gen_sphere_family(
            2,
            Arc::new(|k| 1.0 / k as f64),
            Arc::new(|_| Point::new(vec![1.0, 0.0]).unwrap()),
        );
        let a = fam.set(3).unwrap();
        assert_eq!(a.len(), 4);
        for (k, p) in a.points().iter().enumerate() {
            assert!((p.norm() - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_rejects_non_unit_direction() {
        let fam = gen_sphere_family(
            2,
            Arc::new(|k| 1.0 / k as f64),
            Arc::new(|_| Point::new(vec![1.0, 0.5]).unwrap()),
        );
        assert!(matches!(fam.set(1), Err(Error::Domain(_))));
    }

    #[test]
    fn annulus_hand_derived_stage_one() {
        let norms: RealSeq = Arc::new(|k| 1.0 / k as f64);
        let sel = select_annulus_subsequence(&norms, 1, AnnulusConfig::default()).unwrap();
        assert!((sel.rho_n - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(sel.k0, 2);
        assert_eq!(sel.m, 2);
        assert_eq!(sel.indices, vec![3, 7]);
    }

    #[test]
    fn annulus_membership_holds() {
        let norms: RealSeq = Arc::new(|k| 1.0 / k as f64);
        for n in 1..=8 {
            let sel = select_annulus_subsequence(&norms, n, AnnulusConfig::default()).unwrap();
            for (slot, &idx) in sel.indices.iter().enumerate() {
                let j = 2 * slot as u32 + 1;
                let v = 1.0 / idx as f64;
                let lo = sel.rho_n.powi((sel.m + j) as i32);
                let hi = sel.rho_n.powi((sel.m + j - 1) as i32);
                assert!(v >= lo && v < hi, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn annulus_rejects_geometric_norms() {
        let norms: RealSeq = Arc::new(|k| 0.5f64.powi(k as i32));
        let cfg = AnnulusConfig {
            scan_budget: 10_000,
            ..AnnulusConfig::default()
        };
        assert!(matches!(
            select_annulus_subsequence(&norms, 5, cfg),
            Err(Error::SearchExhausted(_))
        ));
    }

    #[test]
    fn condition_report_scores() {
        let fam = gen_product_family(const_seq(0.5), Arc::new(|n| 1.0 - ((n + 1) as f64).powi(-2)));
        let rows = condition_report(&fam, 3).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.n, 3);
        assert_eq!(last.k_n, 4);
        assert!((last.score - 0.7252).abs() < 1e-3);

        let poly = gen_polygon_family(const_seq(1.0));
        let rows = condition_report(&poly, 9).unwrap();
        let last = rows.last().unwrap();
        let expected = -(2.0 * (std::f64::consts::PI / 10.0).sin()).ln() / 10.0;
        assert!((last.score - expected).abs() < 1e-12);
        assert!((expected - 0.0481).abs() < 1e-3);
    }

    #[test]
    fn geometric_prefix_plateaus() {
        let fam = gen_geometric_prefix(0.5);
        let rows = condition_report(&fam, 100).unwrap();
        let last = rows.last().unwrap();
        // delta(A_n) = 2^{-(n-1)}, score = (n-1) log 2 / n
        assert!((last.delta_n - 0.5f64.powi(99)).abs() < 1e-40);
        assert!((last.score - 99.0 * 2.0f64.ln() / 100.0).abs() < 1e-12);
        assert!((last.score - 2.0f64.ln()).abs() < 0.01);
    }

    #[test]
    fn generated_sets_exclude_origin() {
        let fams = [
            gen_polygon_family(const_seq(1.0)),
            gen_product_family(const_seq(0.5), const_seq(0.75)),
            gen_geometric_prefix(0.5),
        ];
        for fam in &fams {
            for n in fam.n_min()..=(fam.n_min() + 5) {
                let a = fam.set(n).unwrap();
                assert!(!a.contains_origin(), "{} n={n}", fam.label());
            }
        }
    }
}
