//! Monte Carlo estimators, the analytic bound, the Markov extraction of a
//! good stage sample, and finite-stage assembly of the avoiding set.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    detect_bb_fixed_shift, detection_report, exact_v_1d, DetectionReport, DetectionResult,
};
use crate::error::{Error, Result};
use crate::geometry::{normalize_origin, Point, PointSet};
use crate::grid::{cell_hash, sample_grid_capped, stage_params, GridSet, StageParams,
    DEFAULT_CELL_CAP};
use crate::sequences::SequenceFamily;

/// Certified or statistical enclosure of a measure in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: MeasureMethod,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Exact,
    Sampled,
}

impl MeasureInterval {
    pub fn exact(value: f64) -> Self {
        MeasureInterval {
            lower: value,
            upper: value,
            method: MeasureMethod::Exact,
            samples: 0,
        }
    }
}

/// One accepted (or candidate) stage: parameters, measures, bound, and the
/// grid seed that reproduces it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub params: StageParams,
    /// exact grid measure as a reduced fraction
    pub mu_e_exact: String,
    pub mu_e: f64,
    pub mu_v: MeasureInterval,
    pub bound: f64,
    pub seed: u64,
    pub omega_accepted: bool,
}

/// Per-stage record inside an assembly report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyStage {
    pub alpha_k: f64,
    pub report: StageReport,
    /// serialized trimmed stage grid (post V-cover subtraction)
    pub grid_text: String,
    /// losses charged against the final measure at this stage
    pub loss: f64,
}

/// Outcome of the finite-stage assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvoidingSetReport {
    pub stages: Vec<AssemblyStage>,
    pub final_measure_lower: f64,
    /// exact measure of the final grid as a reduced fraction
    pub final_measure_exact: String,
    pub final_measure: f64,
    pub final_grid_text: String,
    pub verification: Vec<DetectionReport>,
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Sample mean and standard error of the grid measure over derived seeds.
pub fn estimate_mean_measure(
    params: &StageParams,
    num_samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if num_samples < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    let measures: Vec<f64> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let grid = sample_grid_capped(params, cell_hash(seed, 0x4D45414E, i), DEFAULT_CELL_CAP)?;
            Ok(grid.measure_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = num_samples as f64;
    let mean = measures.iter().sum::<f64>() / n;
    let var = measures.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// How to estimate the measure of V.
#[derive(Debug, Clone, Copy)]
pub enum MuVMode {
    /// exact polygon projection, d = 1 only
    Exact1d,
    /// uniform x-samples decided by the fixed-shift detector
    Sampled {
        x_samples: u64,
        epsilon: f64,
        budget: u64,
    },
}

/// Measure of the translate set V = {x : some band copy of A at x fits in E}.
pub fn estimate_mu_v(
    a: &PointSet,
    params: &StageParams,
    e: &GridSet,
    mode: MuVMode,
    seed: u64,
) -> Result<MeasureInterval> {
    match mode {
        MuVMode::Exact1d => {
            if a.dim() != 1 {
                return Err(Error::domain("exact mode needs d = 1"));
            }
            let (_, mu) = exact_v_1d(a, e, params.alpha)?;
            Ok(MeasureInterval::exact(mu))
        }
        MuVMode::Sampled {
            x_samples,
            epsilon,
            budget,
        } => {
            if x_samples == 0 {
                return Err(Error::domain("need at least 1 x-sample"));
            }
            let dim = a.dim();
            let unit = |h: u64| (h >> 11) as f64 / (1u64 << 53) as f64;
            let outcomes: Vec<(u64, u64)> = (0..x_samples)
                .into_par_iter()
                .map(|i| {
                    let coords: Vec<f64> = (0..dim)
                        .map(|c| unit(cell_hash(seed, 0x58534D50 + c as u64, i)))
                        .collect();
                    let x = Point::new(coords)?;
                    let (res, _) = detect_bb_fixed_shift(a, e, params.alpha, &x, epsilon, budget)?;
                    Ok(match res {
                        DetectionResult::Found { .. } => (1, 0),
                        DetectionResult::NotFoundCertified { .. } => (0, 1),
                        DetectionResult::Inconclusive { .. } => (0, 0),
                    })
                })
                .collect::<Result<Vec<(u64, u64)>>>()?;
            let found: u64 = outcomes.iter().map(|o| o.0).sum();
            let not_found: u64 = outcomes.iter().map(|o| o.1).sum();
            let n = x_samples as f64;
            let p_lo = found as f64 / n;
            let p_hi = 1.0 - not_found as f64 / n;
            // widen by a 3-sigma binomial margin so the interval is a
            // confidence enclosure, not just the point estimates
            let margin = |p: f64| 3.0 * (p.max(1e-12) * (1.0 - p).max(1e-12) / n).sqrt();
            Ok(MeasureInterval {
                lower: (p_lo - margin(p_lo)).max(0.0),
                upper: (p_hi + margin(p_hi)).min(1.0),
                method: MeasureMethod::Sampled,
                samples: x_samples,
            })
        }
    }
}

/// The stage bound `C (L M k)^{d^2} p^k` with `C = (d^2+1)(8d/alpha)^{d^2}`,
/// evaluated in log space; values above 1 are returned as-is.
pub fn analytic_bound(params: &StageParams) -> f64 {
    let d2 = (params.dim * params.dim) as f64;
    let log_c = (d2 + 1.0).ln() + d2 * (8.0 * params.dim as f64 / params.alpha).ln();
    let log_bound = log_c
        + d2 * (params.l_n as f64 * params.m_n * params.k_n as f64).ln()
        + params.k_n as f64 * params.p_n.ln();
    log_bound.exp()
}

fn quality_threshold(quality_k: u32) -> BigRational {
    BigRational::one()
        - BigRational::new(BigInt::one(), BigInt::from(quality_k))
}

/// Scan stages in ascending n, drawing up to `omega_trials` grids per
/// stage, and accept the first sample with `mu(E) > 1 - 1/quality_k` and
/// `mu(V) < 1/quality_k`.
pub fn extract_good_omega(
    family: &SequenceFamily,
    alpha: f64,
    quality_k: u32,
    n_range: std::ops::RangeInclusive<u32>,
    omega_trials: u64,
    seed: u64,
    mu_v_mode: MuVMode,
) -> Result<StageReport> {
    if quality_k < 2 {
        return Err(Error::domain("quality_k must be >= 2"));
    }
    let e_threshold = quality_threshold(quality_k);
    let v_threshold = 1.0 / quality_k as f64;
    let mut rejections: Vec<String> = Vec::new();
    for n in n_range.clone() {
        if n < family.n_min() {
            continue;
        }
        let a_n = family.set(n)?;
        let params = stage_params(&a_n, n, alpha, 1.0)?;
        let (mut low_e, mut high_v) = (0u64, 0u64);
        for t in 0..omega_trials {
            let grid_seed = cell_hash(seed, n as u64, t);
            let e = sample_grid_capped(&params, grid_seed, DEFAULT_CELL_CAP)?;
            let mu_e = e.measure();
            if mu_e <= e_threshold {
                low_e += 1;
                continue;
            }
            let mu_v = estimate_mu_v(&a_n, &params, &e, mu_v_mode, cell_hash(seed, n as u64 | 1 << 40, t))?;
            if mu_v.upper >= v_threshold {
                high_v += 1;
                continue;
            }
            return Ok(StageReport {
                bound: analytic_bound(&params),
                params,
                mu_e_exact: rational_string(&mu_e),
                mu_e: mu_e.to_f64().unwrap_or(f64::NAN),
                mu_v,
                seed: grid_seed,
                omega_accepted: true,
            });
        }
        rejections.push(format!(
            "n={n}: {omega_trials} trials, {low_e} failed mu(E) > {:.4}, {high_v} failed mu(V) < {v_threshold:.4}",
            1.0 - v_threshold
        ));
    }
    Err(Error::SearchFailed(format!(
        "no accepted omega in n range {:?}; rejection statistics: [{}]",
        n_range,
        rejections.join("; ")
    )))
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    a / gcd(a, b) * b
}

// Grid cover of the intervals, inflated one cell width outward.
fn interval_cover(intervals: &[(f64, f64)], l: u64) -> Result<GridSet> {
    let lf = l as f64;
    let mut cover = GridSet::empty(1, l)?;
    for &(lo, hi) in intervals {
        let lo = lo - 1.0 / lf;
        let hi = hi + 1.0 / lf;
        let j_lo = (lo * lf).floor().max(0.0) as u64;
        let j_hi = ((hi * lf).ceil() as i64).clamp(0, l as i64) as u64;
        for j in j_lo..j_hi {
            cover.set_bit(j, true);
        }
    }
    Ok(cover)
}

/// Tuning for `assemble_avoiding_set`.
#[derive(Debug, Clone)]
pub struct AssemblyConfig {
    pub n_range: std::ops::RangeInclusive<u32>,
    pub omega_trials: u64,
    pub quality_k: u32,
    pub detect_epsilon: f64,
    pub detect_budget: u64,
    pub cell_cap: u64,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            n_range: 1..=40,
            omega_trials: 32,
            quality_k: 2,
            detect_epsilon: 1e-4,
            detect_budget: crate::detector::DEFAULT_BUDGET,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

/// Finite-stage assembly: for each band `alpha_k = 4^{-k}` extract a good
/// stage over the origin-normalized family, subtract a grid cover of the
/// translate set V, intersect all stages at a common resolution, and
/// re-probe the result with the detector. Requires d = 1.
pub fn assemble_avoiding_set(
    family: &SequenceFamily,
    k_stages: u32,
    config: &AssemblyConfig,
    seed: u64,
) -> Result<AvoidingSetReport> {
    if k_stages < 1 {
        return Err(Error::domain("need at least one stage"));
    }
    if family.dim() != 1 {
        return Err(Error::domain("assembly's exact V step needs d = 1"));
    }

    struct StageWork {
        alpha_k: f64,
        report: StageReport,
        trimmed: GridSet,
        probe: PointSet,
        construct: PointSet,
        loss: f64,
    }

    let mut work: Vec<StageWork> = Vec::with_capacity(k_stages as usize);
    for k in 1..=k_stages {
        let alpha_k = 0.25f64.powi(k as i32);
        // probe sets must contain the origin; build from the min-norm pivot
        let normalized = normalize_family(family);
        let report = extract_good_omega(
            &normalized,
            alpha_k,
            config.quality_k,
            config.n_range.clone(),
            config.omega_trials,
            cell_hash(seed, 0xA55E, k as u64),
            MuVMode::Exact1d,
        )?;
        let construct = normalized.set(report.params.n)?;
        let base = family.set(report.params.n)?;
        let pivot = min_norm_index(&base);
        let (probe_set, _) = normalize_origin(&base, pivot)?;

        let e = sample_grid_capped(&report.params, report.seed, config.cell_cap)?;
        let (intervals, mu_v) = exact_v_1d(&construct, &e, alpha_k)?;
        let cover = interval_cover(&intervals, e.resolution())?;
        let trimmed = e.subtract(&cover)?;
        let loss = 1.0 - e.measure_f64() + cover.measure_f64();
        let _ = mu_v;
        work.push(StageWork {
            alpha_k,
            report,
            trimmed,
            probe: probe_set,
            construct,
            loss,
        });
    }

    let l_common = work
        .iter()
        .map(|w| w.trimmed.resolution())
        .fold(1u64, lcm_u64);
    let mut final_grid: Option<GridSet> = None;
    let mut stages = Vec::with_capacity(work.len());
    for w in &mut work {
        let factor = l_common / w.trimmed.resolution();
        let refined = w.trimmed.refine_capped(factor, config.cell_cap)?;
        // refine drops a boundary shell of each selected cell
        let refine_loss = if factor >= 2 {
            w.trimmed.measure_f64() * (1.0 - ((factor - 2) as f64 / factor as f64))
        } else {
            0.0
        };
        w.loss += refine_loss;
        final_grid = Some(match final_grid {
            None => refined,
            Some(g) => g.intersect(&refined)?,
        });
    }
    let final_grid = final_grid.expect("at least one stage");

    let mut verification = Vec::new();
    for w in &work {
        for probe in [&w.probe, &w.construct] {
            verification.push(detection_report(
                probe,
                &final_grid,
                w.alpha_k,
                config.detect_epsilon,
                config.detect_budget,
            )?);
        }
    }

    let final_measure_lower = 1.0 - work.iter().map(|w| w.loss).sum::<f64>();
    let exact = final_grid.measure();
    for w in &mut work {
        stages.push(AssemblyStage {
            alpha_k: w.alpha_k,
            report: w.report.clone(),
            grid_text: w.trimmed.to_text(),
            loss: w.loss,
        });
    }
    Ok(AvoidingSetReport {
        stages,
        final_measure_lower,
        final_measure_exact: rational_string(&exact),
        final_measure: exact.to_f64().unwrap_or(f64::NAN),
        final_grid_text: final_grid.to_text(),
        verification,
    })
}

fn min_norm_index(a: &PointSet) -> usize {
    a.points()
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| p.norm().partial_cmp(&q.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Wrap a family so each stage set is translated by its min-norm point and
/// the resulting origin removed (the construction set of the assembly).
pub fn normalize_family(family: &SequenceFamily) -> SequenceFamily {
    let base = family.clone();
    SequenceFamily::new(
        format!("{}-normalized", family.label()),
        family.dim(),
        family.n_min(),
        move |n| {
            let a = base.set(n)?;
            let pivot = min_norm_index(&a);
            let (shifted, _) = normalize_origin(&a, pivot)?;
            let kept: Vec<Point> = shifted
                .points()
                .iter()
                .filter(|p| p.norm() != 0.0)
                .cloned()
                .collect();
            PointSet::new(kept)
        },
    )
}

/// One row of the convergence table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub k_n: usize,
    pub delta_n: f64,
    pub score: f64,
    pub l_n: u64,
    pub p_n: f64,
    pub bound: f64,
    pub mu_e: f64,
    pub mu_v_lo: f64,
    pub mu_v_hi: f64,
}

pub const CONVERGENCE_HEADER: &str = "n,k_n,delta_n,score,L_n,p_n,bound,mu_E,mu_V_lo,mu_V_hi";

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n, r.k_n, r.delta_n, r.score, r.l_n, r.p_n, r.bound, r.mu_e, r.mu_v_lo, r.mu_v_hi
        ));
    }
    out
}

/// Stage constants, bound, and measured mu values for a range of stages;
/// grids above the cell cap get NaN measure columns instead of failing.
pub fn convergence_rows(
    family: &SequenceFamily,
    alpha: f64,
    slack: f64,
    n_range: std::ops::RangeInclusive<u32>,
    mu_samples: u64,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        if n < family.n_min() {
            continue;
        }
        let a_n = family.set(n)?;
        let params = stage_params(&a_n, n, alpha, slack)?;
        let bound = analytic_bound(&params);
        let score = -params.delta_n.ln() / params.k_n as f64;
        let mut row = ConvergenceRow {
            n,
            k_n: params.k_n,
            delta_n: params.delta_n,
            score,
            l_n: params.l_n,
            p_n: params.p_n,
            bound,
            mu_e: f64::NAN,
            mu_v_lo: f64::NAN,
            mu_v_hi: f64::NAN,
        };
        let cells_ok = (params.l_n as f64).powi(params.dim as i32) <= DEFAULT_CELL_CAP as f64;
        if mu_samples >= 2 && cells_ok {
            let (mean, _) = estimate_mean_measure(&params, mu_samples, cell_hash(seed, 0xC5, n as u64))?;
            row.mu_e = mean;
            let grid_seed = cell_hash(seed, 0xE0, n as u64);
            let e = sample_grid_capped(&params, grid_seed, DEFAULT_CELL_CAP)?;
            let mode = if params.dim == 1 {
                MuVMode::Exact1d
            } else {
                MuVMode::Sampled {
                    x_samples: 64,
                    epsilon: 1e-3,
                    budget: 200_000,
                }
            };
            let mu_v = estimate_mu_v(&a_n, &params, &e, mode, cell_hash(seed, 0xF0, n as u64))?;
            row.mu_v_lo = mu_v.lower;
            row.mu_v_hi = mu_v.upper;
        }
        rows.push(row);
    }
    Ok(rows)
}
