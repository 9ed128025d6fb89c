//! Experiment drivers producing CSV tables and a JSON-lines manifest.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use harmonicity::approximant::{build_approximant, corollary_bounds, ApproximantConfig, ApproximantResult, CorollaryBounds};
use harmonicity::field_domain::sup_norm;
use harmonicity::jackson_kernels::{polyharmonic_kernel, polyharmonic_order_check, KernelParams};
use harmonicity::modulus::{classical_moduli_with_rule, equivalence_report, harmonicity_modulus_refined, CandidateFamily};
use harmonicity::pizzetti::{pizzetti_residual, J0Rule, PizzettiConstants, DEFAULT_J0_POINTS};
use harmonicity::sphere_mean::{make_rule, spherical_mean, SphereRule};
use harmonicity::Domain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::catalog::{lookup, TestField};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::ExperimentError;
use crate::fit::{fit_rate, RateFit};

/// Points with `err < FLOOR_FACTOR · error_floor` are left out of rate fits.
pub const FLOOR_FACTOR: f64 = 10.0;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Per-run diagnostics recorded in the manifest.
    pub records: Vec<Value>,
    pub seconds: f64,
}

/// CSV columns for each experiment, as written after the header comments.
pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Modulus => &["u", "omega_h", "omega1", "omega2", "laplacian_bound", "beyond_inradius"],
        Experiment::Kfunc => &[
            "t",
            "omega_inner",
            "omega_outer",
            "k_upper",
            "best_candidate",
            "ratio_lower",
            "ratio_upper",
            "degenerate",
            "lower_holds",
            "upper_holds",
        ],
        Experiment::Pizzetti => &["x", "radius", "mean", "residual_second_order", "residual"],
        Experiment::Kernel => &["j", "coeff", "order"],
        Experiment::Approx => APPROX_COLUMNS,
        Experiment::Rates => RATES_COLUMNS,
    }
}

const APPROX_COLUMNS: &[&str] = &[
    "p",
    "r",
    "k",
    "nu",
    "order",
    "sup_error",
    "error_floor",
    "modulus_factor",
    "rate_budget",
    "implied_constant",
    "omega1",
    "omega2",
    "constant_omega1",
    "constant_omega2",
    "weight_sum",
    "boundary_mismatch",
    "eval_points",
    "stage_errors",
];

const RATES_COLUMNS: &[&str] = &[
    "p",
    "r",
    "k",
    "nu",
    "order",
    "sup_error",
    "error_floor",
    "modulus_factor",
    "rate_budget",
    "implied_constant",
    "omega1",
    "omega2",
    "constant_omega1",
    "constant_omega2",
    "weight_sum",
    "boundary_mismatch",
    "eval_points",
    "stage_errors",
    "in_fit",
    "slope",
    "intercept",
    "fit_residual",
];

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    out: String,
    width: usize,
}

impl Table {
    fn new(cfg: &ExperimentConfig) -> Self {
        let cols = columns(cfg.experiment);
        let mut t = Table {
            out: manifest_line(cfg),
            width: cols.len(),
        };
        t.row(cols.iter().map(|c| c.to_string()).collect());
        t
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.width);
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| if c.contains(',') || c.contains('"') { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
            .collect();
        self.out.push_str(&line.join(","));
        self.out.push('\n');
    }
}

fn manifest_line(cfg: &ExperimentConfig) -> String {
    format!(
        "# manifest: config_hash={} experiment={} field={} dim={}\n",
        cfg.hash(),
        cfg.experiment,
        cfg.field,
        cfg.dim
    )
}

fn rule(cfg: &ExperimentConfig) -> Result<SphereRule, ExperimentError> {
    Ok(make_rule(cfg.dim, cfg.sphere_budget, Some(cfg.seed))?)
}

/// Runs the experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let field = lookup(&cfg.field, cfg.dim)?;
    let domain = cfg.domain.build()?;
    let (artifacts, records) = match cfg.experiment {
        Experiment::Modulus => (vec![modulus_table(cfg, &field, &domain)?], vec![]),
        Experiment::Kfunc => (vec![kfunc_table(cfg, &field, &domain)?], vec![]),
        Experiment::Pizzetti => (vec![pizzetti_table(cfg, &field, &domain)?], vec![]),
        Experiment::Kernel => (kernel_tables(cfg)?, vec![]),
        Experiment::Approx => approx_tables(cfg, &field, &domain, &[cfg.p], false)?,
        Experiment::Rates => approx_tables(cfg, &field, &domain, &cfg.p_list, true)?,
    };
    Ok(RunOutput {
        artifacts,
        records,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the experiment, writes its CSV files to `out_dir` and appends a
/// record to the manifest there.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput, ExperimentError> {
    let out = execute(cfg)?;
    fs::create_dir_all(out_dir)?;
    for a in &out.artifacts {
        fs::write(out_dir.join(&a.name), &a.contents)?;
    }
    let record = json!({
        "experiment": cfg.experiment,
        "config_hash": cfg.hash(),
        "config": cfg,
        "versions": {
            "harmonicity": harmonicity::VERSION,
            "harmonicity-experiments": env!("CARGO_PKG_VERSION"),
        },
        "seconds": out.seconds,
        "artifacts": out.artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
        "records": out.records,
    });
    let mut f = fs::OpenOptions::new().create(true).append(true).open(out_dir.join(MANIFEST_FILE))?;
    writeln!(f, "{record}")?;
    Ok(out)
}

fn modulus_table(cfg: &ExperimentConfig, field: &TestField, domain: &Domain) -> Result<Artifact, ExperimentError> {
    let rule = rule(cfg)?;
    let f = field.field();
    let curve = harmonicity_modulus_refined(f, domain, &cfg.u_grid, cfg.x_density, &rule, cfg.t_refine)?;
    let lap_sup = match field.laplacian() {
        Some(l) => Some(sup_norm(l, domain, cfg.x_density)?),
        None => None,
    };
    let d_n = PizzettiConstants::new(cfg.dim)?.d_n;
    let mut t = Table::new(cfg);
    for (i, &u) in cfg.u_grid.iter().enumerate() {
        let (w1, w2) = classical_moduli_with_rule(f, domain, u, cfg.x_density, &rule, cfg.t_refine)?;
        t.row(vec![
            num(u),
            num(curve.values[i]),
            num(w1),
            num(w2),
            opt(lap_sup.map(|m| d_n * u * u * m)),
            curve.beyond_inradius[i].to_string(),
        ]);
    }
    Ok(Artifact {
        name: "modulus.csv".into(),
        contents: t.out,
    })
}

fn kfunc_table(cfg: &ExperimentConfig, field: &TestField, domain: &Domain) -> Result<Artifact, ExperimentError> {
    let rule = rule(cfg)?;
    let inner = domain.shrink(cfg.inner_margin)?;
    let family = CandidateFamily::new(cfg.candidate_radii.clone(), cfg.inner_t.clone(), cfg.x_density);
    let report = equivalence_report(field.field(), field.laplacian(), domain, &inner, &cfg.t_grid, &family, &rule)?;
    let mut t = Table::new(cfg);
    for row in &report.rows {
        t.row(vec![
            num(row.t),
            num(row.omega_inner),
            num(row.omega_outer),
            num(row.k_upper),
            row.best_candidate.to_string(),
            opt(row.ratio_lower),
            opt(row.ratio_upper),
            row.degenerate.to_string(),
            row.lower_holds.to_string(),
            row.upper_holds.to_string(),
        ]);
    }
    Ok(Artifact {
        name: "kfunc.csv".into(),
        contents: t.out,
    })
}

/// Seeded points of the domain, drawn uniformly from its bounding box.
pub fn sample_points(domain: &Domain, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let (lo, hi) = domain.bounding_box();
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
        if domain.contains(&x) {
            pts.push(x);
        }
    }
    pts
}

fn pizzetti_table(cfg: &ExperimentConfig, field: &TestField, domain: &Domain) -> Result<Artifact, ExperimentError> {
    let rule = rule(cfg)?;
    let j0 = J0Rule::new(cfg.dim, DEFAULT_J0_POINTS)?;
    let d_n = PizzettiConstants::new(cfg.dim)?.d_n;
    let (f, lap) = (field.field(), field.laplacian().expect("validated"));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(cfg);
    for x in sample_points(domain, cfg.pairs, &mut rng) {
        let r = rng.gen_range(0.0..cfg.radius_max).max(f64::MIN_POSITIVE);
        let mean = spherical_mean(f, &x, r, &rule)?;
        let second = mean - f.eval(&x) - d_n * r * r * lap.eval(&x);
        let full = pizzetti_residual(f, lap, &x, r, &rule, &j0)?;
        let coords: Vec<String> = x.iter().map(|v| num(*v)).collect();
        t.row(vec![coords.join(" "), num(r), num(mean), num(second), num(full)]);
    }
    Ok(Artifact {
        name: "pizzetti.csv".into(),
        contents: t.out,
    })
}

fn kernel_tables(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, ExperimentError> {
    let params = KernelParams::new(cfg.k, cfg.nu, cfg.dim)?;
    let kernel = polyharmonic_kernel(params)?;
    let mut coeffs = manifest_line(cfg).into_bytes();
    kernel.write_csv(&mut coeffs)?;
    let mut moments = manifest_line(cfg);
    moments.push_str("i,moment\n");
    for i in 0..=4 {
        moments.push_str(&format!("{i},{}\n", num(kernel.moment(i))));
    }
    debug_assert_eq!(polyharmonic_order_check(&kernel), params.order());
    Ok(vec![
        Artifact {
            name: "kernel.csv".into(),
            contents: String::from_utf8(coeffs).expect("ascii csv"),
        },
        Artifact {
            name: "kernel_moments.csv".into(),
            contents: moments,
        },
    ])
}

/// Approximant settings derived from an experiment config.
pub fn approximant_config(cfg: &ExperimentConfig, p: usize) -> ApproximantConfig {
    let mut a = ApproximantConfig::new(p, cfg.r, cfg.k);
    a.conv_grid = cfg.conv_grid;
    a.eval_grid = cfg.eval_grid;
    a.bvp_spacing = cfg.bvp_spacing;
    a.bvp_tol = cfg.bvp_tol;
    a.modulus_density = cfg.modulus_density;
    a.sphere_budget = cfg.sphere_budget;
    a.seed = cfg.seed;
    a
}

/// One approximant run and its classical-modulus constants.
pub fn approximate(
    cfg: &ExperimentConfig,
    field: &TestField,
    domain: &Domain,
    p: usize,
) -> Result<(ApproximantResult, CorollaryBounds), ExperimentError> {
    let acfg = approximant_config(cfg, p);
    let res = build_approximant(&field.laplacians[..=cfg.r], domain, &acfg)?;
    let bounds = corollary_bounds(&res, p)?;
    Ok((res, bounds))
}

/// Fit of `sup_error` against `p` over runs well above their error floors.
pub fn fit_runs(runs: &[(usize, f64, f64)]) -> (Vec<bool>, Option<RateFit>) {
    let in_fit: Vec<bool> = runs.iter().map(|&(_, e, floor)| e > 0.0 && e >= FLOOR_FACTOR * floor).collect();
    let pairs: Vec<(f64, f64)> = runs
        .iter()
        .zip(&in_fit)
        .filter(|(_, &k)| k)
        .map(|(&(p, e, _), _)| (p as f64, e))
        .collect();
    (in_fit, fit_rate(&pairs).ok())
}

type Tables = (Vec<Artifact>, Vec<Value>);

fn approx_tables(
    cfg: &ExperimentConfig,
    field: &TestField,
    domain: &Domain,
    ps: &[usize],
    fit: bool,
) -> Result<Tables, ExperimentError> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut grids = Vec::new();
    let mut runs = Vec::new();
    for &p in ps {
        let (res, b) = approximate(cfg, field, domain, p)?;
        let stages: Vec<String> = res.per_stage_errors.iter().map(|e| num(*e)).collect();
        rows.push(vec![
            p.to_string(),
            cfg.r.to_string(),
            res.kernel.k.to_string(),
            res.kernel.nu.to_string(),
            res.kernel.order().to_string(),
            num(res.sup_error),
            num(res.error_floor),
            num(res.modulus_factor),
            num(res.rate_budget),
            opt(res.implied_constant),
            num(b.omega1),
            num(b.omega2),
            opt(b.constant_omega1),
            opt(b.constant_omega2),
            num(res.weight_sum),
            num(res.boundary_mismatch),
            res.eval_points.to_string(),
            stages.join(" "),
        ]);
        records.push(json!({
            "p": p,
            "r": cfg.r,
            "k": res.kernel.k,
            "nu": res.kernel.nu,
            "sup_error": res.sup_error,
            "error_floor": res.error_floor,
            "per_stage_errors": res.per_stage_errors,
            "modulus_factor": res.modulus_factor,
            "omega1": b.omega1,
            "omega2": b.omega2,
        }));
        if cfg.dump_grid {
            let mut buf = manifest_line(cfg).into_bytes();
            res.grid.write_csv(&mut buf)?;
            grids.push(Artifact {
                name: format!("approx_grid_p{p}.csv"),
                contents: String::from_utf8(buf).expect("ascii csv"),
            });
        }
        runs.push((p, res.sup_error, res.error_floor));
    }
    let mut t = Table::new(cfg);
    if fit {
        let (in_fit, rate) = fit_runs(&runs);
        if rate.is_none() {
            eprintln!("warning: fewer than 3 runs above {FLOOR_FACTOR}x their error floor; no rate fitted");
        }
        for (mut row, k) in rows.into_iter().zip(in_fit) {
            row.push(k.to_string());
            row.push(opt(rate.as_ref().map(|f| f.slope)));
            row.push(opt(rate.as_ref().map(|f| f.intercept)));
            row.push(opt(rate.as_ref().map(|f| f.residual)));
            t.row(row);
        }
        records.push(json!({ "fit": rate }));
    } else {
        for row in rows {
            t.row(row);
        }
    }
    let name = if fit { "rates.csv" } else { "approx.csv" };
    let mut artifacts = vec![Artifact {
        name: name.into(),
        contents: t.out,
    }];
    artifacts.extend(grids);
    Ok((artifacts, records))
}
