//! Sample matrices, least-squares recovery of coefficient grids, the dual
//! functions `G_{j,k}`, the `β̃` stability constant and Monte Carlo trials.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mixed_space::{
    for_each_index, lpq_norm, mixed_norm, seq_mixed_norm, synthesize, BoxRegion, CoefficientGrid, Cuboid,
    GeneratorSet, TensorFunction,
};
use crate::piecewise::merge_breaks;
use crate::quadrature::{QuadratureSpec, Rule1D};
use crate::rng;
use crate::sampling::{convolve, draw_samples, AveragingKernel, Density, SampleMode, SampleSet};

/// Relative singular-value cutoff used for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Translates of `φ_i ∗ ψ` indexed like a [`CoefficientGrid`].
#[derive(Clone, Debug)]
pub struct ConvolvedBasis {
    convolved: Vec<TensorFunction>,
    template: CoefficientGrid,
}

impl ConvolvedBasis {
    pub fn new(phi: &GeneratorSet, psi: &AveragingKernel, n_shift: usize) -> Result<Self> {
        let convolved = phi.generators().iter().map(|g| convolve(g, psi)).collect::<Result<Vec<_>>>()?;
        Ok(ConvolvedBasis { convolved, template: CoefficientGrid::zeros(phi.r(), n_shift, phi.d()) })
    }

    pub fn len(&self) -> usize {
        self.template.len()
    }

    pub fn is_empty(&self) -> bool {
        self.template.is_empty()
    }

    pub fn grid_template(&self) -> &CoefficientGrid {
        &self.template
    }

    /// Value of column `col` at `point`.
    pub fn eval(&self, col: usize, point: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let (i, shift) = self.template.locate(col);
        scratch.clear();
        scratch.extend(point.iter().zip(&shift).map(|(x, &k)| x - k as f64));
        self.convolved[i].eval(scratch)
    }

    /// Column `col` as an explicit function.
    pub fn function(&self, col: usize) -> TensorFunction {
        let (i, shift) = self.template.locate(col);
        let s: Vec<f64> = shift.iter().map(|&k| k as f64).collect();
        self.convolved[i].translated(&s)
    }
}

/// `S[(j,k), (i,k₁,k₂)] = (φ_i∗ψ)(x_j − k₁, y_k − k₂)`.
#[derive(Clone, Debug)]
pub struct SampleMatrix {
    entries: DMatrix<f64>,
    r: usize,
    n_shift: usize,
    d: usize,
}

impl SampleMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn n_shift(&self) -> usize {
        self.n_shift
    }

    /// `S · c`.
    pub fn apply(&self, c: &CoefficientGrid) -> Vec<f64> {
        let v = DVector::from_column_slice(c.as_slice());
        (&self.entries * v).iter().copied().collect()
    }

    fn empty_grid(&self) -> CoefficientGrid {
        CoefficientGrid::zeros(self.r, self.n_shift, self.d)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.entries.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_sample_matrix(
    phi: &GeneratorSet,
    psi: &AveragingKernel,
    samples: &SampleSet,
    n_shift: usize,
) -> Result<SampleMatrix> {
    build_sample_matrix_with(Exec::default(), phi, psi, samples, n_shift)
}

/// [`build_sample_matrix`] with an explicit execution strategy; rows are
/// independent.
pub fn build_sample_matrix_with(
    exec: Exec,
    phi: &GeneratorSet,
    psi: &AveragingKernel,
    samples: &SampleSet,
    n_shift: usize,
) -> Result<SampleMatrix> {
    if samples.dim() != phi.dim() {
        return Err(Error::InvalidArgument("sample and generator dimensions differ".into()));
    }
    let basis = ConvolvedBasis::new(phi, psi, n_shift)?;
    Ok(matrix_from_basis(exec, &basis, samples, phi))
}

fn matrix_from_basis(exec: Exec, basis: &ConvolvedBasis, samples: &SampleSet, phi: &GeneratorSet) -> SampleMatrix {
    let cols = basis.len();
    let rows: Vec<Vec<f64>> = exec.map(samples.len(), |row| {
        let mut scratch = Vec::with_capacity(phi.dim());
        (0..cols).map(|c| basis.eval(c, samples.row(row), &mut scratch)).collect()
    });
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    SampleMatrix {
        entries: DMatrix::from_row_slice(samples.len(), cols, &flat),
        r: phi.r(),
        n_shift: basis.template.n(),
        d: phi.d(),
    }
}

/// Pseudo-inverse of a column-equilibrated matrix.
struct Factorization {
    pinv: DMatrix<f64>,
    rank: usize,
}

fn factorize(s: &SampleMatrix, rank_tol: f64) -> Result<Factorization> {
    let cols = s.cols();
    let scales: Vec<f64> = s.entries.column_iter().map(|c| c.norm()).collect();
    let mut scaled = s.entries.clone();
    for (j, &sc) in scales.iter().enumerate() {
        if sc > 0.0 {
            scaled.column_mut(j).scale_mut(1.0 / sc);
        }
    }
    let svd = scaled.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&v| v > cutoff && v > 0.0).count();
    if rank < cols || scales.contains(&0.0) {
        return Err(Error::RankDeficient { rank, cols });
    }
    let pinv_scaled = svd.pseudo_inverse(cutoff).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut pinv = pinv_scaled;
    for (j, &sc) in scales.iter().enumerate() {
        pinv.row_mut(j).scale_mut(1.0 / sc);
    }
    Ok(Factorization { pinv, rank })
}

/// Outcome of a least-squares recovery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub grid: CoefficientGrid,
    /// `‖S c − s‖₂`.
    pub residual: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares coefficients from sampled values.
pub fn solve(s: &SampleMatrix, samples_vec: &[f64], rank_tol: f64) -> Result<Recovery> {
    if samples_vec.len() != s.rows() {
        return Err(Error::InvalidArgument(format!(
            "expected {} samples, got {}",
            s.rows(),
            samples_vec.len()
        )));
    }
    let f = factorize(s, rank_tol)?;
    let b = DVector::from_column_slice(samples_vec);
    let x = &f.pinv * &b;
    let residual = (&s.entries * &x - &b).norm();
    let grid = CoefficientGrid::from_vec(s.r, s.n_shift, s.d, x.iter().copied().collect())?;
    Ok(Recovery { grid, residual, rank: f.rank })
}

/// The dual functions `G_{j,k}` realised by the minimum-norm left inverse.
#[derive(Clone, Debug)]
pub struct DualFamily {
    pinv: DMatrix<f64>,
    phi: GeneratorSet,
    template: CoefficientGrid,
    m: Option<usize>,
}

pub fn dual_family(s: &SampleMatrix, phi: &GeneratorSet, rank_tol: f64) -> Result<DualFamily> {
    let f = factorize(s, rank_tol)?;
    Ok(DualFamily { pinv: f.pinv, phi: phi.clone(), template: s.empty_grid(), m: None })
}

impl DualFamily {
    /// Records the `m` of the sample set so `G_{j,k}` can be addressed by pair.
    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn len(&self) -> usize {
        self.pinv.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.pinv.ncols() == 0
    }

    /// Coefficients of `G` for flat sample index `row`.
    pub fn coefficients(&self, row: usize) -> CoefficientGrid {
        let col: Vec<f64> = self.pinv.column(row).iter().copied().collect();
        CoefficientGrid::from_vec(self.template.r(), self.template.n(), self.template.d(), col)
            .expect("pseudo-inverse rows match the grid layout")
    }

    /// `G_{j,k}` with zero-based indices; requires [`with_m`](Self::with_m).
    pub fn g(&self, j: usize, k: usize) -> Result<TensorFunction> {
        let m = self.m.ok_or_else(|| Error::InvalidArgument("sample layout unknown; call with_m".into()))?;
        Ok(synthesize(&self.phi, &self.coefficients(j * m + k)))
    }

    /// Coefficients of `Σ_{j,k} s_{j,k} G_{j,k}`.
    pub fn apply(&self, samples_vec: &[f64]) -> Result<CoefficientGrid> {
        if samples_vec.len() != self.len() {
            return Err(Error::InvalidArgument(format!("expected {} samples", self.len())));
        }
        let x = &self.pinv * DVector::from_column_slice(samples_vec);
        CoefficientGrid::from_vec(self.template.r(), self.template.n(), self.template.d(), x.iter().copied().collect())
    }

    /// `Σ_{j,k} s_{j,k} G_{j,k}` as an explicit function.
    pub fn reconstruct(&self, samples_vec: &[f64]) -> Result<TensorFunction> {
        Ok(synthesize(&self.phi, &self.apply(samples_vec)?))
    }
}

/// `(f∗ψ)` at every sample location, in row order.
pub fn sample_values(f: &TensorFunction, psi: &AveragingKernel, samples: &SampleSet) -> Result<Vec<f64>> {
    let g = convolve(f, psi)?;
    Ok(samples.points().map(|p| g.eval(p)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaKind {
    /// From the Gram matrix; exact up to quadrature.
    Certified,
    /// Minimum over random unit grids; only an upper estimate of `β̃`.
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaTilde {
    pub value: f64,
    pub kind: BetaKind,
    /// Smallest Gram eigenvalue (certified case only).
    pub lambda_min: Option<f64>,
}

/// Gram matrix `∫_{C_K} g_a g_b` of the convolved basis.
pub fn gram_matrix(basis: &ConvolvedBasis, region: &Cuboid, quad: QuadratureSpec) -> DMatrix<f64> {
    let domain = region.region();
    let dim = domain.dim();
    let cols = basis.len();
    let funcs: Vec<TensorFunction> = (0..cols).map(|c| basis.function(c)).collect();
    let rules: Vec<Rule1D> = (0..dim)
        .map(|a| {
            let breaks = funcs.iter().fold(Vec::new(), |acc, f| merge_breaks(&acc, &f.axis_breakpoints(a)));
            Rule1D::aligned(&breaks, domain.bounds[a].0, domain.bounds[a].1, quad)
        })
        .collect();
    // values[col][term][axis][node]
    let values: Vec<Vec<Vec<Vec<f64>>>> = funcs
        .iter()
        .map(|f| {
            f.terms()
                .iter()
                .map(|t| t.factors.iter().zip(&rules).map(|(g, r)| r.nodes.iter().map(|&x| g.eval(x)).collect()).collect())
                .collect()
        })
        .collect();
    let dims: Vec<usize> = rules.iter().map(Rule1D::len).collect();
    let mut gram = DMatrix::<f64>::zeros(cols, cols);
    let mut b = vec![0.0; cols];
    for_each_index(&dims, |idx| {
        let mut w = 1.0;
        for (a, &j) in idx.iter().enumerate() {
            w *= rules[a].weights[j];
        }
        for (c, slot) in b.iter_mut().enumerate() {
            *slot = funcs[c]
                .terms()
                .iter()
                .enumerate()
                .map(|(t, term)| term.weight * idx.iter().enumerate().map(|(a, &j)| values[c][t][a][j]).product::<f64>())
                .sum();
        }
        for i in 0..cols {
            if b[i] == 0.0 {
                continue;
            }
            for j in i..cols {
                gram[(i, j)] += w * b[i] * b[j];
            }
        }
    });
    gram.fill_lower_triangle_with_upper_triangle();
    gram
}

/// Lower stability constant `β̃` of the convolved basis on `C_K`.
///
/// For `p = q = 2` this is `√(λ_min / r)` of the Gram matrix, which bounds
/// the block-summed `ℓ^{2,2}` norm from below and is exact for `r = 1`.
/// Otherwise the smallest ratio over `trials` random unit grids is
/// returned as an [`BetaKind::Estimate`].
#[allow(clippy::too_many_arguments)]
pub fn beta_tilde(
    phi: &GeneratorSet,
    psi: &AveragingKernel,
    n_shift: usize,
    p: f64,
    q: f64,
    region: &Cuboid,
    trials: usize,
    seed: u64,
) -> Result<BetaTilde> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let basis = ConvolvedBasis::new(phi, psi, n_shift)?;
    let quad = QuadratureSpec::default();
    if p == 2.0 && q == 2.0 {
        let gram = gram_matrix(&basis, region, quad);
        let lambda = SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda = lambda.max(0.0);
        return Ok(BetaTilde {
            value: (lambda / phi.r() as f64).sqrt(),
            kind: BetaKind::Certified,
            lambda_min: Some(lambda),
        });
    }
    if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite()) {
        return Err(Error::InvalidExponent { p, q, reason: "β̃ estimation needs finite p, q ≥ 1".into() });
    }
    let domain = region.region();
    let funcs: Vec<TensorFunction> = (0..basis.len()).map(|c| basis.function(c)).collect();
    let template = basis.grid_template().clone();
    let ratios = Exec::default().map(trials, |t| {
        let mut rng = rng::stream(seed, t as u64);
        let c = CoefficientGrid::random(template.r(), template.n(), template.d(), &mut rng);
        let norm = seq_mixed_norm(&c, p, q);
        if norm == 0.0 {
            return f64::INFINITY;
        }
        let f = combine(&funcs, c.as_slice());
        lpq_norm(&f, p, q, &domain, quad) / norm
    });
    Ok(BetaTilde { value: ratios.into_iter().fold(f64::INFINITY, f64::min), kind: BetaKind::Estimate, lambda_min: None })
}

fn combine(funcs: &[TensorFunction], coeffs: &[f64]) -> TensorFunction {
    funcs
        .iter()
        .zip(coeffs)
        .filter(|(_, &c)| c != 0.0)
        .fold(TensorFunction::zero(funcs[0].dim()), |acc, (f, &c)| acc.add(&f.scaled(c)))
}

/// The signal classes of the sampling theorems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SignalClass {
    /// `‖f∗ψ‖_{L^{p,q}(C_K)} ≥ ω`.
    VNOmegaPsi { omega: f64 },
    /// `μ‖ψ‖_{L¹}‖f‖_{L^{p,q}} ≤ ∫_{C_K}|f∗ψ|`.
    VNMu { mu: f64 },
    /// `‖f‖_{L^{p,q}(C_K)} ≥ (1−δ)‖f‖_{L^{p,q}}` and
    /// `‖f∗ψ‖_{L^{p,q}(C_K)} ≥ (1−δ)‖ψ‖_{L^{1,1}(C_K)}‖f‖_{L^{p,q}}`.
    VDeltaPsi { delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// `(inequality, right side − left side)`; membership iff all are ≥ 0.
    pub slacks: Vec<(String, f64)>,
}

#[allow(clippy::too_many_arguments)]
pub fn membership(
    phi: &GeneratorSet,
    c: &CoefficientGrid,
    class: SignalClass,
    psi: &AveragingKernel,
    p: f64,
    q: f64,
    region: &Cuboid,
    quad: QuadratureSpec,
) -> Result<Membership> {
    let f = synthesize(phi, c);
    let g = convolve(&f, psi)?;
    let ck = region.region();
    let global = |h: &TensorFunction| -> Result<f64> {
        match h.support_box() {
            Some(b) => mixed_norm(h, p, q, &b, quad),
            None => Ok(0.0),
        }
    };
    let slacks = match class {
        SignalClass::VNOmegaPsi { omega } => {
            vec![("conv_norm >= omega".to_string(), mixed_norm(&g, p, q, &ck, quad)? - omega)]
        }
        SignalClass::VNMu { mu } => {
            let psi_l1 = lpq_norm(psi.psi(), 1.0, 1.0, psi.support(), quad);
            let lhs = mu * psi_l1 * global(&f)?;
            let rhs = lpq_norm(&g, 1.0, 1.0, &ck, quad.with_refine(quad.refine.max(4)));
            vec![("mu·‖ψ‖₁·‖f‖ <= ∫_CK |f∗ψ|".to_string(), rhs - lhs)]
        }
        SignalClass::VDeltaPsi { delta } => {
            let norm = global(&f)?;
            vec![
                ("‖f‖_CK >= (1−δ)‖f‖".to_string(), mixed_norm(&f, p, q, &ck, quad)? - (1.0 - delta) * norm),
                (
                    "‖f∗ψ‖_CK >= (1−δ)‖ψ‖₁‖f‖".to_string(),
                    mixed_norm(&g, p, q, &ck, quad)? - (1.0 - delta) * psi.l11_norm() * norm,
                ),
            ]
        }
    };
    Ok(Membership { member: slacks.iter().all(|(_, s)| *s >= 0.0), slacks })
}

/// `ℓ^{p,q}` norm of an `n × m` sample array (`j` outer with exponent `p`).
pub fn sample_lpq(values: &[f64], n: usize, m: usize, p: f64, q: f64) -> f64 {
    assert_eq!(values.len(), n * m);
    let lp = |it: &mut dyn Iterator<Item = f64>, e: f64| -> f64 {
        if e.is_infinite() {
            it.fold(0.0, |a, v| a.max(v.abs()))
        } else {
            it.map(|v| v.abs().powf(e)).sum::<f64>().powf(1.0 / e)
        }
    };
    let rows: Vec<f64> = values.chunks(m).map(|r| lp(&mut r.iter().copied(), q)).collect();
    lp(&mut rows.into_iter(), p)
}

/// What a trial checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialTest {
    /// Coefficients recovered to within `tol` in max norm.
    Recovery { tol: f64 },
    /// `lower‖f‖ ≤ ‖samples‖_{ℓ^{p,q}} ≤ upper‖f‖`.
    Inequality { lower: f64, upper: f64, p: f64, q: f64 },
}

/// Everything needed to repeat one randomized experiment.
#[derive(Clone, Debug)]
pub struct TrialSpec {
    pub phi: GeneratorSet,
    pub psi: AveragingKernel,
    pub rho: Density,
    pub truth: CoefficientGrid,
    pub n: usize,
    pub m: usize,
    pub mode: SampleMode,
    pub rank_tol: f64,
    pub test: TrialTest,
}

/// One JSON-lines record per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub rank: Option<usize>,
    pub full_rank: bool,
    pub success: bool,
    pub coef_error: Option<f64>,
    pub residual: Option<f64>,
    pub sample_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessSummary {
    pub trials: usize,
    pub successes: usize,
    pub rank_deficient: usize,
    pub fraction: f64,
    pub wilson_lower: f64,
    pub wilson_upper: f64,
    pub records: Vec<TrialRecord>,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub fn empirical_success(spec: &TrialSpec, trials: usize, seed: u64) -> Result<SuccessSummary> {
    empirical_success_with(Exec::default(), spec, trials, seed)
}

/// Runs `trials` independent draws. Rank-deficient draws count as failures.
pub fn empirical_success_with(exec: Exec, spec: &TrialSpec, trials: usize, seed: u64) -> Result<SuccessSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let basis = ConvolvedBasis::new(&spec.phi, &spec.psi, spec.truth.n())?;
    let f = synthesize(&spec.phi, &spec.truth);
    let conv = convolve(&f, &spec.psi)?;
    let f_norm = match (&spec.test, f.support_box()) {
        (TrialTest::Inequality { p, q, .. }, Some(b)) => lpq_norm(&f, *p, *q, &b, QuadratureSpec::default()),
        _ => 0.0,
    };
    let records: Vec<Result<TrialRecord>> = exec.map(trials, |t| {
        let tseed = rng::derive_seed(seed, t as u64);
        let samples = draw_samples(&spec.rho, spec.n, spec.m, tseed, spec.mode)?;
        let values: Vec<f64> = samples.points().map(|p| conv.eval(p)).collect();
        let mut rec = TrialRecord {
            trial: t,
            seed: tseed,
            n: spec.n,
            m: spec.m,
            rank: None,
            full_rank: false,
            success: false,
            coef_error: None,
            residual: None,
            sample_norm: None,
            error: None,
        };
        match spec.test {
            TrialTest::Recovery { tol } => {
                let s = matrix_from_basis(Exec::Sequential, &basis, &samples, &spec.phi);
                match solve(&s, &values, spec.rank_tol) {
                    Ok(rv) => {
                        let err = rv.grid.max_abs_diff(&spec.truth);
                        rec.rank = Some(rv.rank);
                        rec.full_rank = true;
                        rec.coef_error = Some(err);
                        rec.residual = Some(rv.residual);
                        rec.success = err <= tol;
                    }
                    Err(Error::RankDeficient { rank, .. }) => {
                        rec.rank = Some(rank);
                        rec.error = Some("rank deficient".into());
                    }
                    Err(e) => return Err(e),
                }
            }
            TrialTest::Inequality { lower, upper, p, q } => {
                let norm = sample_lpq(&values, spec.n, spec.m, p, q);
                rec.sample_norm = Some(norm);
                rec.full_rank = true;
                rec.success = lower * f_norm <= norm && norm <= upper * f_norm;
            }
        }
        Ok(rec)
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    let rank_deficient = records.iter().filter(|r| !r.full_rank).count();
    let (lo, hi) = wilson_interval(successes, trials);
    Ok(SuccessSummary {
        trials,
        successes,
        rank_deficient,
        fraction: successes as f64 / trials as f64,
        wilson_lower: lo,
        wilson_upper: hi,
        records,
    })
}

/// Random shift-bounded sample points for tests and benches, uniform on
/// `region`.
pub fn uniform_points<R: Rng + ?Sized>(region: &BoxRegion, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| region.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect()
}
