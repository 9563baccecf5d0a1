//! Experiment harness: versioned JSON configuration, reconstruction tables,
//! surfaces for plotting, Monte Carlo probability sweeps and constant
//! reports. Every output carries the SHA-256 hash of the configuration and
//! the seed it was produced with.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{self, BoundReport, SpaceParams, Theorem};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mixed_space::{
    bspline_riesz_bounds, decay_constant, l1_norm, mixed_norm, sup_norm, synthesize, BoxRegion, CoefficientGrid,
    Cuboid, Decay, GeneratorSet, TensorFunction, Term,
};
use crate::piecewise::bspline;
use crate::quadrature::QuadratureSpec;
use crate::reconstruction::{
    beta_tilde, build_sample_matrix, dual_family, empirical_success, sample_values, BetaKind, TrialRecord, TrialSpec,
    TrialTest,
};
use crate::rng;
use crate::sampling::{draw_samples, AveragingKernel, Density, SampleMode, SampleSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub p: f64,
    pub q: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_shift: usize,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    /// Decay exponents used for `c̃` and the series constants.
    pub s1: f64,
    pub s2: f64,
}

/// `B_degree(t − shift)` along one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorRecipe {
    pub degree: usize,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecipe {
    pub weight: f64,
    pub factors: Vec<FactorRecipe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRecipe {
    pub terms: Vec<TermRecipe>,
}

/// Coefficient `c_generator(shift)` of the test signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalTerm {
    #[serde(default)]
    pub generator: usize,
    pub shift: Vec<i64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRecipe {
    /// Per-axis bounds of the box indicator.
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityRecipe {
    #[default]
    Uniform,
    PiecewiseConstant { cells: Vec<usize>, masses: Vec<f64> },
}

/// Certified constants supplied by the user; missing values are derived.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityOverrides {
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub decay_c: Option<f64>,
}

/// Default theorem parameters for sweeps and constant reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoremDefaults {
    pub gamma: f64,
    /// Defaults to `‖ψ‖_{L^{1,1}(C_K)}`.
    pub omega: Option<f64>,
    pub mu: f64,
    /// Defaults to half of `μ𝒞_{ρ,1}`.
    pub eta: Option<f64>,
    pub delta: f64,
    pub eps: f64,
    /// `γ` of the `δ`-class theorem.
    pub delta_gamma: f64,
}

impl Default for TheoremDefaults {
    fn default() -> Self {
        TheoremDefaults { gamma: 0.5, omega: None, mu: 1.0, eta: None, delta: 0.1, eps: 0.05, delta_gamma: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub nm: Vec<usize>,
    pub trials: usize,
    /// Max-norm coefficient tolerance for a successful recovery.
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { nm: vec![9, 16, 25, 36, 49, 100, 400], trials: 200, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    pub resolution: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig { resolution: 101 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

fn default_rank_tol() -> f64 {
    crate::reconstruction::DEFAULT_RANK_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub space: SpaceConfig,
    pub generators: Vec<GeneratorRecipe>,
    pub signal: Vec<SignalTerm>,
    pub kernel: KernelRecipe,
    #[serde(default)]
    pub density: DensityRecipe,
    pub sample_sizes: Vec<(usize, usize)>,
    pub seed: u64,
    #[serde(default)]
    pub mode: SampleMode,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default)]
    pub stability: StabilityOverrides,
    #[serde(default)]
    pub theorem: TheoremDefaults,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Hex SHA-256 of the canonical (re-serialized) configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("configuration serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// A configuration with every object constructed.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub region: Cuboid,
    pub phi: GeneratorSet,
    pub psi: AveragingKernel,
    pub rho: Density,
    pub truth: CoefficientGrid,
    pub f: TensorFunction,
    pub params: SpaceParams,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let s = &config.space;
        let dim = s.d + 1;
        let region = Cuboid::new(s.k1, s.k2, s.d)?;
        if config.generators.is_empty() {
            return Err(Error::Config("at least one generator is required".into()));
        }
        if config.sample_sizes.is_empty() || config.sample_sizes.iter().any(|&(n, m)| n == 0 || m == 0) {
            return Err(Error::Config("sample_sizes must be a nonempty list of positive (n, m)".into()));
        }
        if !config.quadrature.is_valid() {
            return Err(Error::Config("quadrature order and refine must be positive".into()));
        }
        let generators = config
            .generators
            .iter()
            .map(|g| build_generator(g, dim))
            .collect::<Result<Vec<_>>>()?;
        let decay_c = match config.stability.decay_c {
            Some(c) => c,
            None => generators.iter().map(|g| decay_constant(g, s.s1, s.s2)).fold(0.0, f64::max),
        };
        let (alpha1, alpha2) = match (config.stability.alpha1, config.stability.alpha2) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let (da, db) = default_alphas(&config)?;
                (a.unwrap_or(da), b.unwrap_or(db))
            }
        };
        let phi = GeneratorSet::new(generators, Decay { c: decay_c, s1: s.s1, s2: s.s2 }, alpha1, alpha2)?;
        let psi = AveragingKernel::box_indicator(&config.kernel.bounds, region)?;
        let rho = match &config.density {
            DensityRecipe::Uniform => Density::uniform(region),
            DensityRecipe::PiecewiseConstant { cells, masses } => {
                Density::piecewise_constant(region, cells.clone(), masses)?
            }
        };
        let mut truth = CoefficientGrid::zeros(phi.r(), s.n_shift, s.d);
        for t in &config.signal {
            if t.generator >= phi.r() || t.shift.len() != dim || t.shift.iter().any(|k| k.unsigned_abs() as usize > s.n_shift)
            {
                return Err(Error::Config(format!("signal term {t:?} lies outside V_N")));
            }
            let v = truth.get(t.generator, &t.shift) + t.weight;
            truth.set(t.generator, &t.shift, v);
        }
        let f = synthesize(&phi, &truth);
        let params = SpaceParams {
            p: s.p,
            q: s.q,
            d: s.d,
            r: phi.r(),
            n_shift: s.n_shift,
            k1: s.k1,
            k2: s.k2,
            alpha1,
            alpha2,
            decay_c,
            s1: s.s1,
            s2: s.s2,
            rho_lower: rho.lower(),
            rho_upper: rho.upper(),
            psi_l11: psi.l11_norm(),
        };
        params.validate()?;
        let config_hash = config.hash();
        Ok(Experiment { config, config_hash, region, phi, psi, rho, truth, f, params })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::new(ExperimentConfig::load(path)?)
    }
}

fn build_generator(g: &GeneratorRecipe, dim: usize) -> Result<TensorFunction> {
    let terms = g
        .terms
        .iter()
        .map(|t| {
            if t.factors.len() != dim {
                return Err(Error::Config(format!("generator term needs {dim} factors, got {}", t.factors.len())));
            }
            let factors = t.factors.iter().map(|f| bspline(f.degree).shifted(f.shift)).collect();
            Ok(Term { weight: t.weight, factors })
        })
        .collect::<Result<Vec<_>>>()?;
    TensorFunction::new(dim, terms)
}

/// Riesz bounds of a single product of B-splines in `L²`.
fn default_alphas(config: &ExperimentConfig) -> Result<(f64, f64)> {
    let single = match config.generators.as_slice() {
        [g] if g.terms.len() == 1 => Some(&g.terms[0]),
        _ => None,
    };
    match single {
        Some(t) if config.space.p == 2.0 && config.space.q == 2.0 => {
            let (lo, hi) = t.factors.iter().fold((t.weight.abs(), t.weight.abs()), |(lo, hi), f| {
                let (a, b) = bspline_riesz_bounds(f.degree);
                (lo * a, hi * b)
            });
            Ok((lo, hi))
        }
        _ => Err(Error::Config(
            "stability.alpha1 and stability.alpha2 are required unless p = q = 2 with one product generator".into(),
        )),
    }
}

/// `n·m` split as `n` = largest divisor not above `√(nm)`.
pub fn split_nm(nm: usize) -> (usize, usize) {
    let root = (nm as f64).sqrt().floor() as usize;
    let n = (1..=root.max(1)).rev().find(|d| nm.is_multiple_of(*d)).unwrap_or(1);
    (n, nm / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub m: usize,
    pub row_seed: u64,
    pub rank: usize,
    pub full_rank: bool,
    pub linf_error: Option<f64>,
    pub l1_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<TableRow>,
}

/// Column order of the table CSV.
pub const TABLE_COLUMNS: [&str; 11] = [
    "n",
    "m",
    "rank",
    "full_rank",
    "linf_error",
    "l1_error",
    "l2_error",
    "residual",
    "row_seed",
    "config_hash",
    "seed",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

impl ResultTable {
    pub fn all_full_rank(&self) -> bool {
        self.rows.iter().all(|r| r.full_rank)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TABLE_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.m.to_string(),
                r.rank.to_string(),
                r.full_rank.to_string(),
                fmt_opt(r.linf_error),
                fmt_opt(r.l1_error),
                fmt_opt(r.l2_error),
                fmt_opt(r.residual),
                r.row_seed.to_string(),
                self.config_hash.clone(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A drawn sample set and, when the sample matrix has full rank, the
/// reconstructed function.
pub struct Reconstruction {
    pub samples: SampleSet,
    pub rank: usize,
    pub f_tilde: Option<TensorFunction>,
    pub residual: Option<f64>,
}

/// Draw, sample `f∗ψ`, and reconstruct with the dual family.
pub fn reconstruct_once(exp: &Experiment, n: usize, m: usize, seed: u64) -> Result<Reconstruction> {
    let samples = draw_samples(&exp.rho, n, m, seed, exp.config.mode)?;
    let s = build_sample_matrix(&exp.phi, &exp.psi, &samples, exp.config.space.n_shift)?;
    let values = sample_values(&exp.f, &exp.psi, &samples)?;
    match dual_family(&s, &exp.phi, exp.config.rank_tol) {
        Ok(dual) => {
            let coeffs = dual.apply(&values)?;
            let fitted = s.apply(&coeffs);
            let residual = fitted.iter().zip(&values).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok(Reconstruction {
                samples,
                rank: s.cols(),
                f_tilde: Some(synthesize(&exp.phi, &coeffs)),
                residual: Some(residual),
            })
        }
        Err(Error::RankDeficient { rank, .. }) => Ok(Reconstruction { samples, rank, f_tilde: None, residual: None }),
        Err(e) => Err(e),
    }
}

/// Reconstruction errors of `f` over `C_K` for every configured `(n, m)`.
pub fn run_table(exp: &Experiment, seed: u64) -> Result<ResultTable> {
    let sizes = &exp.config.sample_sizes;
    let region = exp.region.region();
    let quad = exp.config.quadrature;
    let rows = Exec::default().map(sizes.len(), |i| -> Result<TableRow> {
        let (n, m) = sizes[i];
        let row_seed = rng::derive_seed(seed, i as u64);
        let rec = reconstruct_once(exp, n, m, row_seed)?;
        let errors = match &rec.f_tilde {
            Some(ft) => {
                let diff = exp.f.sub(ft);
                Some((sup_norm(&diff, &region), l1_norm(&diff, &region, quad), mixed_norm(&diff, 2.0, 2.0, &region, quad)?))
            }
            None => None,
        };
        Ok(TableRow {
            n,
            m,
            row_seed,
            rank: rec.rank,
            full_rank: rec.f_tilde.is_some(),
            linf_error: errors.map(|e| e.0),
            l1_error: errors.map(|e| e.1),
            l2_error: errors.map(|e| e.2),
            residual: rec.residual,
        })
    });
    Ok(ResultTable { config_hash: exp.config_hash.clone(), seed, rows: rows.into_iter().collect::<Result<_>>()? })
}

/// Function values on a uniform tensor grid over a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Evaluates every named function on the same `resolution^(d+1)` grid.
pub fn emit_surface(funcs: &[(&str, &TensorFunction)], region: &BoxRegion, resolution: usize) -> Result<Surface> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("surface resolution must be at least 2".into()));
    }
    let dim = region.dim();
    let mut columns = vec!["x".to_string()];
    columns.extend((1..dim).map(|a| format!("y{a}")));
    columns.extend(funcs.iter().map(|(name, _)| name.to_string()));
    let axes: Vec<Vec<f64>> = region
        .bounds
        .iter()
        .map(|&(lo, hi)| (0..resolution).map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64).collect())
        .collect();
    let mut rows = Vec::with_capacity(resolution.pow(dim as u32));
    crate::mixed_space::for_each_index(&vec![resolution; dim], |idx| {
        let point: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
        let mut row = point.clone();
        row.extend(funcs.iter().map(|(_, f)| f.eval(&point)));
        rows.push(row);
    });
    Ok(Surface { columns, rows })
}

impl Surface {
    pub fn write_csv<W: Write>(&self, out: W, config_hash: &str, seed: u64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.columns.clone();
        header.push("config_hash".into());
        header.push("seed".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.iter().map(|v| format!("{v:.17e}")).collect();
            rec.push(config_hash.to_string());
            rec.push(seed.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `f`, `f̃` and `f̃ − f` on a common grid over `C_K`.
pub fn surface_for(exp: &Experiment, n: usize, m: usize, seed: u64, resolution: usize) -> Result<Surface> {
    let rec = reconstruct_once(exp, n, m, seed)?;
    let ft = rec.f_tilde.ok_or_else(|| Error::RankDeficient { rank: rec.rank, cols: exp.truth.len() })?;
    let diff = ft.sub(&exp.f);
    emit_surface(&[("f", &exp.f), ("f_tilde", &ft), ("diff", &diff)], &exp.region.region(), resolution)
}

/// Theoretical probability of one theorem at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryProbability {
    pub raw: Option<f64>,
    pub clamped: Option<f64>,
    pub ln_failure_bound: Option<f64>,
    pub error: Option<String>,
}

impl From<Result<BoundReport>> for TheoryProbability {
    fn from(r: Result<BoundReport>) -> Self {
        match r {
            Ok(rep) => TheoryProbability {
                raw: Some(rep.probability_raw),
                clamped: Some(rep.probability),
                ln_failure_bound: Some(rep.ln_failure_bound),
                error: None,
            },
            Err(e) => TheoryProbability { raw: None, clamped: None, ln_failure_bound: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub nm: usize,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub rank_deficient: usize,
    pub fraction: f64,
    pub wilson_lower: f64,
    pub wilson_upper: f64,
    pub theory: BTreeMap<String, TheoryProbability>,
    pub beta_tilde: f64,
    pub beta_tilde_kind: BetaKind,
    pub config_hash: String,
    pub seed: u64,
}

/// A trial record tagged with its sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTrial {
    pub nm: usize,
    #[serde(flatten)]
    pub record: TrialRecord,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    pub trials: Vec<SweepTrial>,
}

/// Writes one JSON document per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<()> {
    for it in items {
        serde_json::to_writer(&mut out, it)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Empirical recovery rate against the theoretical probabilities.
pub fn probability_sweep(exp: &Experiment, nm_list: &[usize], trials: usize, seed: u64) -> Result<Sweep> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let p = &exp.params;
    let th = &exp.config.theorem;
    let bt = beta_tilde(&exp.phi, &exp.psi, p.n_shift, p.p, p.q, &exp.region, 64, seed)?;
    let mut records = Vec::with_capacity(nm_list.len());
    let mut all_trials = Vec::new();
    for (i, &nm) in nm_list.iter().enumerate() {
        if nm == 0 {
            return Err(Error::InvalidArgument("nm must be positive".into()));
        }
        let (n, m) = split_nm(nm);
        let spec = TrialSpec {
            phi: exp.phi.clone(),
            psi: exp.psi.clone(),
            rho: exp.rho.clone(),
            truth: exp.truth.clone(),
            n,
            m,
            mode: exp.config.mode,
            rank_tol: exp.config.rank_tol,
            test: TrialTest::Recovery { tol: exp.config.sweep.tol },
        };
        let summary = empirical_success(&spec, trials, rng::derive_seed(seed ^ 0x5EE9, i as u64))?;
        let mut theory = BTreeMap::new();
        let omega = th.omega.unwrap_or(p.psi_l11);
        let eta = th.eta.unwrap_or(0.5 * th.mu * p.rho_lower);
        theory.insert("thm1".to_string(), bounds::thm1_report(p, th.gamma, omega, n, m).into());
        theory.insert("thm2".to_string(), bounds::thm2_report(p, th.mu, eta, n, m).into());
        theory.insert("thm3".to_string(), bounds::thm3_report(p, th.delta, th.eps, th.delta_gamma, n, m).into());
        let thm4 = if bt.value > 0.0 {
            bounds::thm4_report(p, th.gamma, bt.value, n, m)
        } else {
            Err(Error::OutOfRange("beta_tilde is zero".into()))
        };
        theory.insert("thm4".to_string(), thm4.into());
        all_trials.extend(summary.records.iter().map(|r| SweepTrial {
            nm,
            record: r.clone(),
            config_hash: exp.config_hash.clone(),
            seed,
        }));
        records.push(SweepRecord {
            nm,
            n,
            m,
            trials,
            successes: summary.successes,
            rank_deficient: summary.rank_deficient,
            fraction: summary.fraction,
            wilson_lower: summary.wilson_lower,
            wilson_upper: summary.wilson_upper,
            theory,
            beta_tilde: bt.value,
            beta_tilde_kind: bt.kind,
            config_hash: exp.config_hash.clone(),
            seed,
        });
    }
    Ok(Sweep { records, trials: all_trials })
}

/// Optional theorem arguments; missing values come from the configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoremArgs {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub gamma: Option<f64>,
    pub omega: Option<f64>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub beta_tilde: Option<f64>,
}

pub fn constants_report(exp: &Experiment, theorem: Theorem, args: &TheoremArgs, seed: u64) -> Result<BoundReport> {
    let p = &exp.params;
    let th = &exp.config.theorem;
    let (n0, m0) = exp.config.sample_sizes[0];
    let (n, m) = (args.n.unwrap_or(n0), args.m.unwrap_or(m0));
    match theorem {
        Theorem::SamplingOmega => {
            bounds::thm1_report(p, args.gamma.unwrap_or(th.gamma), args.omega.or(th.omega).unwrap_or(p.psi_l11), n, m)
        }
        Theorem::SamplingMu => {
            let mu = args.mu.unwrap_or(th.mu);
            bounds::thm2_report(p, mu, args.eta.or(th.eta).unwrap_or(0.5 * mu * p.rho_lower), n, m)
        }
        Theorem::SamplingDelta => bounds::thm3_report(
            p,
            args.delta.unwrap_or(th.delta),
            args.eps.unwrap_or(th.eps),
            args.gamma.unwrap_or(th.delta_gamma),
            n,
            m,
        ),
        Theorem::Reconstruction => {
            let bt = match args.beta_tilde {
                Some(v) => v,
                None => beta_tilde(&exp.phi, &exp.psi, p.n_shift, p.p, p.q, &exp.region, 64, seed)?.value,
            };
            bounds::thm4_report(p, args.gamma.unwrap_or(th.gamma), bt, n, m)
        }
    }
}

/// Human-readable symbol for a report key.
pub fn symbol(key: &str) -> &str {
    match key {
        "c_star" => "c*",
        "A_gamma_omega" => "𝒜_{γ,ω}",
        "B_gamma_omega" => "ℬ_{γ,ω}",
        "A1" => "𝒜₁",
        "ln_A1" => "ln 𝒜₁",
        "A2" => "𝒜₂",
        "ln_A2" => "ln 𝒜₂",
        "beta1" => "β₁",
        "beta2" => "β₂",
        "nm_min" => "nm threshold",
        "gamma" => "γ",
        "omega" => "ω",
        "mu" => "μ",
        "eta" => "η",
        "delta" => "δ",
        "eps" => "ε",
        "beta_tilde" => "β̃",
        "lower" => "lower frame constant",
        "upper" => "upper frame constant",
        "N1" => "N₁",
        "N2" => "N₂",
        other => other,
    }
}

/// Aligned `symbol = value` lines for every constant of a report.
pub fn pretty_report(rep: &BoundReport) -> String {
    let mut out = String::new();
    for (k, v) in &rep.constants {
        out.push_str(&format!("{:<22} {:<14} {v:.10e}\n", symbol(k), k));
    }
    out.push_str(&format!("{:<22} {:<14} {:.10e}\n", "P (raw)", "probability_raw", rep.probability_raw));
    out.push_str(&format!("{:<22} {:<14} {:.10e}\n", "P (clamped)", "probability", rep.probability));
    out.push_str(&format!("{:<22} {:<14} {}\n", "nm > threshold", "meets_threshold", rep.meets_threshold));
    out
}

/// A JSON document stamped with the configuration hash and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub config_hash: String,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Builder for sample sets at the configured first size or overrides.
pub fn samples_for(exp: &Experiment, n: Option<usize>, m: Option<usize>, seed: u64) -> Result<SampleSet> {
    let (n0, m0) = exp.config.sample_sizes[0];
    draw_samples(&exp.rho, n.unwrap_or(n0), m.unwrap_or(m0), seed, exp.config.mode)
}
