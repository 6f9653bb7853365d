//! `erdos` command-line front end: family tables, stage construction,
//! copy detection, and the extraction / assembly experiments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use erdos_core::detector::detection_report;
use erdos_core::experiment::{
    assemble_avoiding_set, estimate_mu_v, extract_good_omega, AssemblyConfig, MuVMode,
    StageReport,
};
use erdos_core::grid::{sample_grid_capped, stage_params, GridSet, DEFAULT_CELL_CAP};
use erdos_core::sequences::{
    condition_report, gen_annulus_family, gen_geometric_prefix, gen_polygon_family_perturbed,
    gen_product_family, gen_sphere_family, AnnulusConfig, RealSeq, SequenceFamily,
};
use erdos_core::{Error, Point};

const USAGE: &str = "usage: erdos <command> key=value ...

commands:
  seq        family=<name> n_max=<int> [family params] [out=DIR]
             condition table (CSV) for a point-set family
  construct  family=<name> n=<int> alpha=<real> [seed=<u64>] [slack=<real>]
             sample one stage grid; writes grid.txt, report.json, grid.pbm (d=2)
  detect     grid=<file> points=<file> alpha=<real> [epsilon=<real>] [budget=<int>]
             branch-and-bound copy search; writes detect.json
  prop23     family=<name> alpha=<real> quality_k=<int> n_lo= n_hi= trials= [seed=]
             Markov extraction of a good stage sample; writes prop23.json
  theorem21  family=<name> stages=<K> quality_k=<int> n_lo= n_hi= trials= [seed=]
             finite-stage assembly; writes theorem21.json

family params:
  polygon    radius=<real> [eta=<real>]
  product    r0=<real> [rho=<real>|auto]
  sphere     [norms=reciprocal|linear] [scale=<real>]
  annulus    (norms 1/k)
  geometric  ratio=<real>

common keys: out=<dir> (default .), seed=<u64> (default 0), threads=<int>";

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn error_exit(err: &Error) -> ExitCode {
    let code = match err {
        Error::Domain(_) | Error::Parse(_) | Error::BoundaryUndecidable => 3,
        Error::Resource(_) | Error::Io(_) => 4,
        Error::SearchFailed(_) | Error::SearchExhausted(_) => 5,
    };
    fail(code, &err.to_string())
}

struct Config {
    command: String,
    params: BTreeMap<String, String>,
}

impl Config {
    fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("invalid value for {key}: {v}")),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        let v = self
            .get(key)
            .ok_or_else(|| format!("missing required key {key}"))?;
        v.parse().map_err(|_| format!("invalid value for {key}: {v}"))
    }

    fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or("."))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(format!("unknown key: {k}"));
            }
        }
        Ok(())
    }

    fn write_manifest(&self) -> std::io::Result<()> {
        let dir = self.out_dir();
        std::fs::create_dir_all(&dir)?;
        let manifest = serde_json::json!({
            "command": self.command,
            "params": self.params,
        });
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )
    }
}

const FAMILY_KEYS: &[&str] = &["family", "radius", "eta", "r0", "rho", "norms", "scale", "ratio"];

fn build_family(cfg: &Config) -> Result<SequenceFamily, String> {
    let name = cfg.get("family").ok_or("missing required key family")?;
    match name {
        "polygon" => {
            let radius: f64 = cfg.parse("radius", 1.0)?;
            let eta: f64 = cfg.parse("eta", 0.0)?;
            Ok(gen_polygon_family_perturbed(Arc::new(move |_| radius), eta))
        }
        "product" => {
            let r0: f64 = cfg.parse("r0", 0.5)?;
            let rho_rule: RealSeq = match cfg.get("rho") {
                None | Some("auto") => Arc::new(|n| 1.0 - ((n + 1) as f64).powi(-2)),
                Some(v) => {
                    let rho: f64 = v.parse().map_err(|_| format!("invalid value for rho: {v}"))?;
                    Arc::new(move |_| rho)
                }
            };
            Ok(gen_product_family(
                Arc::new(move |n| r0.powi(n as i32)),
                rho_rule,
            ))
        }
        "sphere" => {
            let scale: f64 = cfg.parse("scale", 1.0)?;
            let norms: RealSeq = match cfg.get("norms").unwrap_or("reciprocal") {
                "reciprocal" => Arc::new(move |k| scale / k as f64),
                "linear" => Arc::new(move |k| k as f64 / scale),
                other => return Err(format!("unknown norms rule: {other}")),
            };
            Ok(gen_sphere_family(1, norms, Arc::new(|_| Point::scalar(1.0))))
        }
        "annulus" => Ok(gen_annulus_family(
            Arc::new(|k| 1.0 / k as f64),
            AnnulusConfig::default(),
        )),
        "geometric" => {
            let ratio: f64 = cfg.parse("ratio", 0.5)?;
            Ok(gen_geometric_prefix(ratio))
        }
        other => Err(format!("unknown family: {other}")),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(Error::from)
}

fn cmd_seq(cfg: &Config) -> Result<ExitCode, ExitCode> {
    let allowed: Vec<&str> = ["n_max", "out"].iter().chain(FAMILY_KEYS).copied().collect();
    cfg.check_keys(&allowed).map_err(|m| fail(2, &m))?;
    let family = build_family(cfg).map_err(|m| fail(2, &m))?;
    let n_max: u32 = cfg.require("n_max").map_err(|m| fail(2, &m))?;
    cfg.write_manifest().map_err(|e| fail(4, &e.to_string()))?;

    let rows = condition_report(&family, n_max).map_err(|e| error_exit(&e))?;
    let mut csv = String::from("n,k_n,delta_n,score\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.n, r.k_n, r.delta_n, r.score));
    }
    let path = cfg.out_dir().join("condition.csv");
    write_file(&path, &csv).map_err(|e| error_exit(&e))?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_construct(cfg: &Config) -> Result<ExitCode, ExitCode> {
    let allowed: Vec<&str> = ["n", "alpha", "seed", "slack", "out"]
        .iter()
        .chain(FAMILY_KEYS)
        .copied()
        .collect();
    cfg.check_keys(&allowed).map_err(|m| fail(2, &m))?;
    let family = build_family(cfg).map_err(|m| fail(2, &m))?;
    let n: u32 = cfg.require("n").map_err(|m| fail(2, &m))?;
    let alpha: f64 = cfg.require("alpha").map_err(|m| fail(2, &m))?;
    let seed: u64 = cfg.parse("seed", 0).map_err(|m| fail(2, &m))?;
    let slack: f64 = cfg.parse("slack", 1.0).map_err(|m| fail(2, &m))?;
    cfg.write_manifest().map_err(|e| fail(4, &e.to_string()))?;

    let run = || -> Result<(), Error> {
        let a_n = family.set(n)?;
        let params = stage_params(&a_n, n, alpha, slack)?;
        let grid = sample_grid_capped(&params, seed, DEFAULT_CELL_CAP)?;
        let dir = cfg.out_dir();
        write_file(&dir.join("grid.txt"), &grid.to_text())?;
        if params.dim == 2 {
            write_file(&dir.join("grid.pbm"), &grid.to_pbm()?)?;
        }
        let mu_e = grid.measure();
        let mu_v = if params.dim == 1 {
            estimate_mu_v(&a_n, &params, &grid, MuVMode::Exact1d, seed)?
        } else {
            estimate_mu_v(
                &a_n,
                &params,
                &grid,
                MuVMode::Sampled {
                    x_samples: 64,
                    epsilon: 1e-3,
                    budget: 200_000,
                },
                seed,
            )?
        };
        let report = StageReport {
            bound: erdos_core::experiment::analytic_bound(&params),
            mu_e_exact: format!("{}/{}", mu_e.numer(), mu_e.denom()),
            mu_e: grid.measure_f64(),
            mu_v,
            params,
            seed,
            omega_accepted: false,
        };
        write_file(
            &dir.join("report.json"),
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        println!(
            "stage n={n}: L={}, p={:.6}, mu(E)={}",
            report.params.l_n, report.params.p_n, report.mu_e_exact
        );
        Ok(())
    };
    run().map_err(|e| error_exit(&e))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_detect(cfg: &Config) -> Result<ExitCode, ExitCode> {
    cfg.check_keys(&["grid", "points", "alpha", "epsilon", "budget", "out"])
        .map_err(|m| fail(2, &m))?;
    let grid_path: String = cfg.require("grid").map_err(|m| fail(2, &m))?;
    let points_path: String = cfg.require("points").map_err(|m| fail(2, &m))?;
    let alpha: f64 = cfg.require("alpha").map_err(|m| fail(2, &m))?;
    let epsilon: f64 = cfg
        .parse("epsilon", erdos_core::detector::DEFAULT_EPSILON)
        .map_err(|m| fail(2, &m))?;
    let budget: u64 = cfg
        .parse("budget", erdos_core::detector::DEFAULT_BUDGET)
        .map_err(|m| fail(2, &m))?;
    cfg.write_manifest().map_err(|e| fail(4, &e.to_string()))?;

    let run = || -> Result<String, Error> {
        let grid_text = std::fs::read_to_string(&grid_path)?;
        let grid = GridSet::from_text(&grid_text)?;
        let points_text = std::fs::read_to_string(&points_path)?;
        let a = erdos_core::PointSet::from_text(&points_text)?;
        let report = detection_report(&a, &grid, alpha, epsilon, budget)?;
        write_file(
            &cfg.out_dir().join("detect.json"),
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        Ok(report.verdict)
    };
    let verdict = run().map_err(|e| error_exit(&e))?;
    println!("{verdict}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_prop23(cfg: &Config) -> Result<ExitCode, ExitCode> {
    let allowed: Vec<&str> = ["alpha", "quality_k", "n_lo", "n_hi", "trials", "seed", "out"]
        .iter()
        .chain(FAMILY_KEYS)
        .copied()
        .collect();
    cfg.check_keys(&allowed).map_err(|m| fail(2, &m))?;
    let family = build_family(cfg).map_err(|m| fail(2, &m))?;
    let alpha: f64 = cfg.require("alpha").map_err(|m| fail(2, &m))?;
    let quality_k: u32 = cfg.require("quality_k").map_err(|m| fail(2, &m))?;
    let n_lo: u32 = cfg.require("n_lo").map_err(|m| fail(2, &m))?;
    let n_hi: u32 = cfg.require("n_hi").map_err(|m| fail(2, &m))?;
    let trials: u64 = cfg.parse("trials", 32).map_err(|m| fail(2, &m))?;
    let seed: u64 = cfg.parse("seed", 0).map_err(|m| fail(2, &m))?;
    cfg.write_manifest().map_err(|e| fail(4, &e.to_string()))?;

    let mode = if family.dim() == 1 {
        MuVMode::Exact1d
    } else {
        MuVMode::Sampled {
            x_samples: 128,
            epsilon: 1e-3,
            budget: 500_000,
        }
    };
    let report = extract_good_omega(&family, alpha, quality_k, n_lo..=n_hi, trials, seed, mode)
        .map_err(|e| error_exit(&e))?;
    write_file(
        &cfg.out_dir().join("prop23.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )
    .map_err(|e| error_exit(&e))?;
    println!(
        "accepted n={} seed={} mu(E)={} mu(V) in [{}, {}]",
        report.params.n, report.seed, report.mu_e_exact, report.mu_v.lower, report.mu_v.upper
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_theorem21(cfg: &Config) -> Result<ExitCode, ExitCode> {
    let allowed: Vec<&str> = [
        "stages", "quality_k", "n_lo", "n_hi", "trials", "seed", "epsilon", "budget", "out",
    ]
    .iter()
    .chain(FAMILY_KEYS)
    .copied()
    .collect();
    cfg.check_keys(&allowed).map_err(|m| fail(2, &m))?;
    let family = build_family(cfg).map_err(|m| fail(2, &m))?;
    let stages: u32 = cfg.require("stages").map_err(|m| fail(2, &m))?;
    let quality_k: u32 = cfg.require("quality_k").map_err(|m| fail(2, &m))?;
    let n_lo: u32 = cfg.require("n_lo").map_err(|m| fail(2, &m))?;
    let n_hi: u32 = cfg.require("n_hi").map_err(|m| fail(2, &m))?;
    let trials: u64 = cfg.parse("trials", 32).map_err(|m| fail(2, &m))?;
    let seed: u64 = cfg.parse("seed", 0).map_err(|m| fail(2, &m))?;
    let epsilon: f64 = cfg
        .parse("epsilon", erdos_core::detector::DEFAULT_EPSILON)
        .map_err(|m| fail(2, &m))?;
    let budget: u64 = cfg
        .parse("budget", erdos_core::detector::DEFAULT_BUDGET)
        .map_err(|m| fail(2, &m))?;
    cfg.write_manifest().map_err(|e| fail(4, &e.to_string()))?;

    let config = AssemblyConfig {
        n_range: n_lo..=n_hi,
        omega_trials: trials,
        quality_k,
        detect_epsilon: epsilon,
        detect_budget: budget,
        cell_cap: DEFAULT_CELL_CAP,
    };
    let report = assemble_avoiding_set(&family, stages, &config, seed).map_err(|e| error_exit(&e))?;
    write_file(
        &cfg.out_dir().join("theorem21.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )
    .map_err(|e| error_exit(&e))?;
    let found = report
        .verification
        .iter()
        .filter(|v| v.verdict == "found")
        .count();
    println!(
        "final measure {} ({} found verdicts of {})",
        report.final_measure_exact,
        found,
        report.verification.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    };
    let mut params = BTreeMap::new();
    for arg in &args[1..] {
        let Some((k, v)) = arg.split_once('=') else {
            return fail(2, &format!("expected key=value, got {arg}"));
        };
        if params.insert(k.to_string(), v.to_string()).is_some() {
            return fail(2, &format!("duplicate key: {k}"));
        }
    }
    let cfg = Config {
        command: command.clone(),
        params,
    };
    if let Some(threads) = cfg.get("threads") {
        let n: usize = match threads.parse() {
            Ok(n) => n,
            Err(_) => return fail(2, "invalid value for threads"),
        };
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            return fail(2, "thread pool already initialized");
        }
    }
    let mut cfg = cfg;
    cfg.params.remove("threads");

    let result = match cfg.command.as_str() {
        "seq" => cmd_seq(&cfg),
        "construct" => cmd_construct(&cfg),
        "detect" => cmd_detect(&cfg),
        "prop23" => cmd_prop23(&cfg),
        "theorem21" => cmd_theorem21(&cfg),
        other => {
            eprintln!("unknown command: {other}\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(code) => code,
        Err(code) => code,
    }
}
