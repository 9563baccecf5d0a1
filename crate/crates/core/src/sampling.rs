//! Sampling densities on `C_K`, random sample sets, averaging kernels and the
//! centred statistic `Y(f) = |(f∗ψ)(x, y)| - ∫ ρ |f∗ψ|`.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mixed_space::{integrate_aligned, l1_norm, BoxRegion, Cuboid, TensorFunction, Term};
use crate::piecewise::{merge_breaks, PiecewisePoly1D};
use crate::quadrature::QuadratureSpec;
use crate::rng;

/// Tolerance on `∫ ρ = 1`.
pub const DENSITY_MASS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    /// Constant on the cells of a regular grid over `C_K`; `values` are
    /// density values in row-major cell order (axis 0 slowest).
    PiecewiseConstant { cells: Vec<usize>, values: Vec<f64> },
}

/// A probability density on `C_K` bounded by `0 < lower ≤ ρ ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density {
    kind: DensityKind,
    region: Cuboid,
    lower: f64,
    upper: f64,
}

impl Density {
    pub fn uniform(region: Cuboid) -> Self {
        let v = 1.0 / region.volume();
        Density { kind: DensityKind::Uniform, region, lower: v, upper: v }
    }

    /// Piecewise-constant density from per-cell probability masses.
    pub fn piecewise_constant(region: Cuboid, cells: Vec<usize>, masses: &[f64]) -> Result<Self> {
        if cells.len() != region.dim() || cells.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "need a positive cell count for each of the {} axes",
                region.dim()
            )));
        }
        let count: usize = cells.iter().product();
        if masses.len() != count {
            return Err(Error::InvalidArgument(format!("expected {count} cell masses, got {}", masses.len())));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidArgument("cell masses must be positive (density bounded below)".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > DENSITY_MASS_TOL {
            return Err(Error::InvalidArgument(format!("cell masses sum to {total}, not 1")));
        }
        let cell_volume = region.volume() / count as f64;
        let values: Vec<f64> = masses.iter().map(|m| m / cell_volume).collect();
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(0.0, f64::max);
        Ok(Density { kind: DensityKind::PiecewiseConstant { cells, values }, region, lower, upper })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn region(&self) -> Cuboid {
        self.region
    }

    /// `𝒞_{ρ,1}`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// `𝒞_{ρ,2}`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        if !self.region.contains(point) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Uniform => self.lower,
            DensityKind::PiecewiseConstant { cells, values } => values[self.cell_of(cells, point)],
        }
    }

    fn cell_of(&self, cells: &[usize], point: &[f64]) -> usize {
        let bounds = self.region.region().bounds;
        let mut idx = 0;
        for ((&x, &(lo, hi)), &n) in point.iter().zip(&bounds).zip(cells) {
            let c = (((x - lo) / (hi - lo)) * n as f64).floor() as isize;
            idx = idx * n + c.clamp(0, n as isize - 1) as usize;
        }
        idx
    }

    /// Cell boundaries along `axis` (empty for the uniform density).
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match &self.kind {
            DensityKind::Uniform => Vec::new(),
            DensityKind::PiecewiseConstant { cells, .. } => {
                let (lo, hi) = self.region.region().bounds[axis];
                let n = cells[axis];
                (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
            }
        }
    }

    /// One draw by rejection against the uniform envelope scaled by `upper`.
    /// Returns the point and the number of proposals used.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, u64) {
        let bounds = self.region.region().bounds;
        let mut proposals = 0;
        loop {
            proposals += 1;
            let p: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
            if self.is_uniform() || rng.random::<f64>() * self.upper < self.eval(&p) {
                return (p, proposals);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `nm` independent draws from ρ, indexed by pairs `(j, k)`.
    #[default]
    Joint,
    /// `x_j` and `y_k` drawn independently and combined as a grid.
    Separable,
}

/// Sample locations `(x_j, y_k)`, `j = 1..n`, `k = 1..m`, stored `j`-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    n: usize,
    m: usize,
    dim: usize,
    coords: Vec<f64>,
    pub mode: SampleMode,
    pub seed: u64,
    /// Accepted draws / proposals of the rejection sampler.
    pub acceptance_rate: f64,
    pub density: Density,
}

impl SampleSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Location with zero-based indices.
    pub fn point(&self, j: usize, k: usize) -> &[f64] {
        self.row(j * self.m + k)
    }

    /// Location of flat row `j·m + k`.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.coords[row * self.dim..(row + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    /// CSV with header `j,k,x,y1,…,yd`; indices are one-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["j".to_string(), "k".to_string(), "x".to_string()];
        header.extend((1..self.dim).map(|a| format!("y{a}")));
        w.write_record(&header)?;
        for j in 0..self.n {
            for k in 0..self.m {
                let mut rec = vec![(j + 1).to_string(), (k + 1).to_string()];
                rec.extend(self.point(j, k).iter().map(|v| format!("{v:.17e}")));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws an `n × m` sample set. Each draw has its own RNG stream derived
/// from `seed`, so the result is identical for every execution strategy.
pub fn draw_samples(rho: &Density, n: usize, m: usize, seed: u64, mode: SampleMode) -> Result<SampleSet> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("sample counts n and m must be at least 1".into()));
    }
    let region = rho.region();
    let dim = region.dim();
    let (coords, proposals) = match mode {
        SampleMode::Joint => {
            let draws = Exec::default().map(n * m, |i| rho.draw(&mut rng::stream(seed, i as u64)));
            let proposals: u64 = draws.iter().map(|d| d.1).sum();
            (draws.into_iter().flat_map(|d| d.0).collect::<Vec<f64>>(), proposals)
        }
        SampleMode::Separable => {
            if !rho.is_uniform() {
                return Err(Error::SeparableNonUniform);
            }
            let xs: Vec<f64> = (0..n)
                .map(|j| rng::stream(seed, j as u64).random_range(-region.k1..=region.k1))
                .collect();
            let ys: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let mut r = rng::stream(seed, (n + k) as u64);
                    (0..region.d).map(|_| r.random_range(-region.k2..=region.k2)).collect()
                })
                .collect();
            let mut coords = Vec::with_capacity(n * m * dim);
            for x in &xs {
                for y in &ys {
                    coords.push(*x);
                    coords.extend(y);
                }
            }
            (coords, (n * m) as u64)
        }
    };
    Ok(SampleSet {
        n,
        m,
        dim,
        coords,
        mode,
        seed,
        acceptance_rate: (n * m) as f64 / proposals as f64,
        density: rho.clone(),
    })
}

/// An averaging function ψ supported in `C_K`, with its cached
/// `‖ψ‖_{L^{1,1}(C_K)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingKernel {
    psi: TensorFunction,
    l11_norm: f64,
    support: BoxRegion,
    region: Cuboid,
}

impl AveragingKernel {
    pub fn new(psi: TensorFunction, region: Cuboid) -> Result<Self> {
        if psi.dim() != region.dim() {
            return Err(Error::InvalidArgument("kernel and cuboid dimensions differ".into()));
        }
        let Some(support) = psi.support_box() else {
            return Err(Error::InvalidArgument("averaging kernel must be nonzero".into()));
        };
        if !region.region().contains_box(&support, 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "kernel support {:?} is not contained in C_K",
                support.bounds
            )));
        }
        let l11_norm = l1_norm(&psi, &support, QuadratureSpec::default().with_refine(2));
        if !(l11_norm > 0.0) {
            return Err(Error::InvalidArgument("averaging kernel has zero L^{1,1} norm".into()));
        }
        Ok(AveragingKernel { psi, l11_norm, support, region })
    }

    /// Indicator of the box with the given per-axis bounds.
    pub fn box_indicator(bounds: &[(f64, f64)], region: Cuboid) -> Result<Self> {
        let factors = bounds
            .iter()
            .map(|&(a, b)| PiecewisePoly1D::indicator(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(TensorFunction::product(1.0, factors)?, region)
    }

    pub fn psi(&self) -> &TensorFunction {
        &self.psi
    }

    pub fn l11_norm(&self) -> f64 {
        self.l11_norm
    }

    pub fn support(&self) -> &BoxRegion {
        &self.support
    }

    pub fn region(&self) -> Cuboid {
        self.region
    }
}

/// Closed form of `f ∗ ψ`. Every kernel factor must be piecewise constant.
pub fn convolve(f: &TensorFunction, psi: &AveragingKernel) -> Result<TensorFunction> {
    if f.dim() != psi.psi().dim() {
        return Err(Error::InvalidArgument("function and kernel dimensions differ".into()));
    }
    let mut terms = Vec::with_capacity(f.terms().len() * psi.psi().terms().len());
    for ft in f.terms() {
        for kt in psi.psi().terms() {
            let factors = ft
                .factors
                .iter()
                .zip(&kt.factors)
                .map(|(a, k)| a.convolve_step(k))
                .collect::<Result<Vec<_>>>()?;
            terms.push(Term { weight: ft.weight * kt.weight, factors });
        }
    }
    TensorFunction::new(f.dim(), terms)
}

/// `(f ∗ ψ)(point)`.
pub fn average_sample(f: &TensorFunction, psi: &AveragingKernel, point: &[f64]) -> Result<f64> {
    Ok(convolve(f, psi)?.eval(point))
}

/// Quadrature used for `∫ ρ |f∗ψ|`: panels refined 4× past the breakpoint
/// grid to contain the error from sign changes of `f∗ψ`.
pub fn abs_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(8, 4)
}

/// `Y(f)` with `f∗ψ` and its ρ-weighted mean precomputed.
#[derive(Clone, Debug)]
pub struct YStatistic {
    conv: TensorFunction,
    mean: f64,
}

impl YStatistic {
    pub fn new(f: &TensorFunction, psi: &AveragingKernel, rho: &Density, quad: QuadratureSpec) -> Result<Self> {
        let conv = convolve(f, psi)?;
        let region = rho.region().region();
        let breaks: Vec<Vec<f64>> =
            (0..conv.dim()).map(|a| merge_breaks(&conv.axis_breakpoints(a), &rho.breakpoints(a))).collect();
        let mean = if conv.is_zero() {
            0.0
        } else {
            integrate_aligned(&breaks, &region, quad, |p| rho.eval(p) * conv.eval(p).abs())
        };
        Ok(YStatistic { conv, mean })
    }

    /// `∫_{C_K} ρ |f∗ψ|`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn convolved(&self) -> &TensorFunction {
        &self.conv
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.conv.eval(point).abs() - self.mean
    }
}

pub fn y_statistic(f: &TensorFunction, psi: &AveragingKernel, rho: &Density, point: &[f64]) -> Result<f64> {
    Ok(YStatistic::new(f, psi, rho, abs_quadrature())?.eval(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::bspline;

    fn square(k: f64) -> Cuboid {
        Cuboid::new(k, k, 1).unwrap()
    }

    fn table1_f() -> TensorFunction {
        TensorFunction::new(
            2,
            vec![
                Term { weight: 3.0, factors: vec![bspline(2), bspline(2).shifted(1.0)] },
                Term { weight: -5.0, factors: vec![bspline(2).shifted(-1.0), bspline(2)] },
            ],
        )
        .unwrap()
    }

    /// 2-D tensor Gauss–Legendre (composite, many panels) over a box.
    fn box_average_oracle(f: &TensorFunction, center: [f64; 2], h: f64) -> f64 {
        let (gx, gw) = crate::quadrature::gauss_legendre(6);
        let panels = 64;
        let step = 2.0 * h / panels as f64;
        let mut s = 0.0;
        for i in 0..panels {
            for (x, wx) in gx.iter().zip(&gw) {
                let t = -h + step * (i as f64 + 0.5 + 0.5 * x);
                for j in 0..panels {
                    for (y, wy) in gx.iter().zip(&gw) {
                        let u = -h + step * (j as f64 + 0.5 + 0.5 * y);
                        s += 0.25 * step * step * wx * wy * f.eval(&[center[0] - t, center[1] - u]);
                    }
                }
            }
        }
        s
    }

    #[test]
    fn uniform_draws_stay_inside() {
        let rho = Density::uniform(square(2.5));
        let s = draw_samples(&rho, 5, 5, 42, SampleMode::Joint).unwrap();
        assert_eq!(s.len(), 25);
        assert!(s.points().all(|p| rho.region().contains(p)));
        assert_eq!(s.acceptance_rate, 1.0);
        assert!(draw_samples(&rho, 0, 5, 42, SampleMode::Joint).is_err());
    }

    #[test]
    fn draws_are_deterministic() {
        let rho = Density::piecewise_constant(square(1.0), vec![2, 1], &[0.25, 0.75]).unwrap();
        let a = draw_samples(&rho, 7, 3, 9, SampleMode::Joint).unwrap();
        let b = draw_samples(&rho, 7, 3, 9, SampleMode::Joint).unwrap();
        assert_eq!(a, b);
        let c = draw_samples(&rho, 7, 3, 10, SampleMode::Joint).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn separable_mode() {
        let rho = Density::uniform(square(3.0));
        let s = draw_samples(&rho, 4, 3, 1, SampleMode::Separable).unwrap();
        for j in 0..4 {
            for k in 0..3 {
                assert_eq!(s.point(j, k)[0], s.point(j, 0)[0]);
                assert_eq!(s.point(j, k)[1], s.point(0, k)[1]);
            }
        }
        let pc = Density::piecewise_constant(square(1.0), vec![2, 1], &[0.5, 0.5]).unwrap();
        assert!(matches!(draw_samples(&pc, 2, 2, 0, SampleMode::Separable), Err(Error::SeparableNonUniform)));
    }

    #[test]
    fn density_validation_and_bounds() {
        assert!(Density::piecewise_constant(square(1.0), vec![2, 1], &[0.5, 0.4]).is_err());
        assert!(Density::piecewise_constant(square(1.0), vec![2, 1], &[1.0, 0.0]).is_err());
        let rho = Density::piecewise_constant(square(1.0), vec![2, 1], &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((rho.lower() - 1.0 / 6.0).abs() < 1e-15);
        assert!((rho.upper() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rho.eval(&[-0.5, 0.0]), rho.upper());
        assert_eq!(rho.eval(&[0.5, 0.0]), rho.lower());
        assert_eq!(rho.eval(&[2.0, 0.0]), 0.0);
        let mass = integrate_aligned(
            &[rho.breakpoints(0), rho.breakpoints(1)],
            &rho.region().region(),
            QuadratureSpec::default(),
            |p| rho.eval(p),
        );
        assert!((mass - 1.0).abs() < DENSITY_MASS_TOL);
    }

    #[test]
    fn uniform_mean_is_centred() {
        let rho = Density::uniform(square(2.5));
        let s = draw_samples(&rho, 1000, 100, 5, SampleMode::Joint).unwrap();
        let n = s.len() as f64;
        // Uniform on [-2.5, 2.5]: σ = 5/√12.
        let band = 3.0 * (5.0 / 12f64.sqrt()) / n.sqrt();
        for a in 0..2 {
            let mean: f64 = s.points().map(|p| p[a]).sum::<f64>() / n;
            assert!(mean.abs() < band, "axis {a}: {mean} vs {band}");
        }
    }

    #[test]
    fn rejection_sampler_cell_frequencies() {
        let rho = Density::piecewise_constant(square(1.0), vec![2, 1], &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let s = draw_samples(&rho, 300, 100, 77, SampleMode::Joint).unwrap();
        let n = s.len() as f64;
        let left = s.points().filter(|p| p[0] < 0.0).count() as f64 / n;
        let sigma = ((2.0 / 3.0) * (1.0 / 3.0) / n).sqrt();
        assert!((left - 2.0 / 3.0).abs() < 3.0 * sigma, "{left}");
        // Envelope at 𝒞_{ρ,2} = 1/3 over area 4: acceptance 3/4.
        assert!((s.acceptance_rate - 0.75).abs() < 0.02);
    }

    #[test]
    fn kernel_validation() {
        let region = square(2.5);
        let psi = AveragingKernel::box_indicator(&[(-0.125, 0.125), (-0.125, 0.125)], region).unwrap();
        assert!((psi.l11_norm() - 0.0625).abs() < 1e-15);
        assert!(AveragingKernel::box_indicator(&[(-3.0, 0.0), (0.0, 1.0)], region).is_err());
        assert!(AveragingKernel::new(TensorFunction::zero(2), region).is_err());
    }

    #[test]
    fn average_sample_examples() {
        let region = square(2.5);
        let psi = AveragingKernel::box_indicator(&[(-0.125, 0.125), (-0.125, 0.125)], region).unwrap();
        let b00 = TensorFunction::product(1.0, vec![bspline(0), bspline(0)]).unwrap();
        let v = average_sample(&b00, &psi, &[0.0, 0.0]).unwrap();
        assert!((v - box_average_oracle(&b00, [0.0, 0.0], 0.125)).abs() < 1e-12);
        assert!((v - 0.0625).abs() < 1e-15);
        assert_eq!(average_sample(&TensorFunction::zero(2), &psi, &[0.3, 0.1]).unwrap(), 0.0);

        let f = table1_f();
        let v = average_sample(&f, &psi, &[0.0, 1.0]).unwrap();
        assert!((v - box_average_oracle(&f, [0.0, 1.0], 0.125)).abs() < 1e-10);
    }

    #[test]
    fn convolution_examples() {
        let region = square(2.0);
        let psi = AveragingKernel::box_indicator(&[(-0.5, 0.5), (-0.5, 0.5)], region).unwrap();
        let b00 = TensorFunction::product(1.0, vec![bspline(0), bspline(0)]).unwrap();
        let g = convolve(&b00, &psi).unwrap();
        for p in [[0.0, 0.0], [0.3, -0.7], [0.9, 0.1], [1.2, 0.0]] {
            assert!((g.eval(&p) - bspline(1).eval(p[0]) * bspline(1).eval(p[1])).abs() < 1e-15);
        }
        assert!(convolve(&TensorFunction::zero(2), &psi).unwrap().is_zero());

        let smooth = TensorFunction::product(1.0, vec![bspline(1), bspline(0)]).unwrap();
        let bad = AveragingKernel::new(smooth, region).unwrap();
        assert!(matches!(convolve(&b00, &bad), Err(Error::UnsupportedKernel(_))));
    }

    #[test]
    fn convolution_support_is_minkowski_sum() {
        let region = square(3.0);
        let mut r = rng::stream(99, 0);
        for _ in 0..20 {
            let n1 = r.random_range(0..4usize);
            let n2 = r.random_range(0..4usize);
            let s1 = r.random_range(-1.0..1.0);
            let s2 = r.random_range(-1.0..1.0);
            let f = TensorFunction::product(1.0, vec![bspline(n1).shifted(s1), bspline(n2).shifted(s2)]).unwrap();
            let a = r.random_range(-1.0..0.5);
            let b = r.random_range(-1.0..0.5);
            let psi = AveragingKernel::box_indicator(&[(a, a + 0.4), (b, b + 0.7)], region).unwrap();
            let g = convolve(&f, &psi).unwrap();
            let want = f.support_box().unwrap().sum(psi.support());
            let got = g.support_box().unwrap();
            for (x, y) in got.bounds.iter().zip(&want.bounds) {
                assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn y_statistic_of_zero() {
        let region = square(2.5);
        let psi = AveragingKernel::box_indicator(&[(-0.125, 0.125), (-0.125, 0.125)], region).unwrap();
        let rho = Density::uniform(region);
        assert_eq!(y_statistic(&TensorFunction::zero(2), &psi, &rho, &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let rho = Density::uniform(square(1.0));
        let s = draw_samples(&rho, 2, 2, 3, SampleMode::Joint).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,k,x,y1");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("2,2,"));
    }
}
