#![allow(dead_code)]

use avgsample::mixed_space::{synthesize, Cuboid, Decay, GeneratorSet, Term, TensorFunction};
use avgsample::piecewise::{bspline, PiecewisePoly1D};
use avgsample::sampling::{AveragingKernel, Density};
use avgsample::mixed_space::CoefficientGrid;
use rand::Rng;

pub fn bspline_product(dx: usize, dy: usize) -> TensorFunction {
    TensorFunction::product(1.0, vec![bspline(dx), bspline(dy)]).unwrap()
}

/// Product B-spline generators of the given degrees with placeholder
/// stability constants.
pub fn generators(degrees: &[usize]) -> GeneratorSet {
    let gens = degrees.iter().map(|&n| bspline_product(n, n)).collect();
    GeneratorSet::new(gens, Decay { c: 1.0, s1: 2.0, s2: 2.0 }, 0.5, 1.0).unwrap()
}

/// A random element of `V_N` together with its coefficients.
pub fn random_member<R: Rng>(phi: &GeneratorSet, n_shift: usize, rng: &mut R) -> (CoefficientGrid, TensorFunction) {
    let c = CoefficientGrid::random(phi.r(), n_shift, phi.d(), rng);
    let f = synthesize(phi, &c);
    (c, f)
}

fn random_interval<R: Rng>(k: f64, rng: &mut R) -> (f64, f64) {
    let w = rng.random_range(0.1..k.min(1.0));
    let a = rng.random_range(-k..k - w);
    (a, a + w)
}

/// One or two weighted boxes inside `C_K`.
pub fn random_kernel<R: Rng>(region: Cuboid, rng: &mut R) -> AveragingKernel {
    let bounds = region.region().bounds;
    let terms = rng.random_range(1..=2);
    let terms = (0..terms)
        .map(|t| {
            let factors = bounds
                .iter()
                .map(|&(_, k)| {
                    let (a, b) = random_interval(k, rng);
                    PiecewisePoly1D::indicator(a, b).unwrap()
                })
                .collect();
            let weight = if t == 0 { rng.random_range(0.5..2.0) } else { rng.random_range(-1.0..1.0) };
            Term { weight, factors }
        })
        .collect();
    AveragingKernel::new(TensorFunction::new(region.dim(), terms).unwrap(), region).unwrap()
}

/// Uniform or a random 2×2 piecewise-constant density.
pub fn random_density<R: Rng>(region: Cuboid, rng: &mut R) -> Density {
    if rng.random_bool(0.3) {
        return Density::uniform(region);
    }
    let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
    Density::piecewise_constant(region, vec![2, 2], &masses).unwrap()
}

pub fn manifest_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}
