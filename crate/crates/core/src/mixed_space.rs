//! Tensor-product functions on ℝ × ℝ^d, coefficient grids of `V_N`, and the
//! mixed Lebesgue norms `L^{p,q}` and `ℓ^{p,q}`.
//!
//! Axis 0 is the `x` coordinate (outer exponent `p`); axes `1..=d` are the
//! `y` coordinates (inner exponent `q`).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::piecewise::{merge_breaks, PiecewisePoly1D};
use crate::quadrature::{QuadratureSpec, Rule1D};
use crate::rng;

/// The cuboid `C_K = [-K₁, K₁] × [-K₂, K₂]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    pub k1: f64,
    pub k2: f64,
    pub d: usize,
}

impl Cuboid {
    pub fn new(k1: f64, k2: f64, d: usize) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
            return Err(Error::InvalidArgument(format!("cuboid half-widths must be positive, got K1 = {k1}, K2 = {k2}")));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("cuboid dimension d must be at least 1".into()));
        }
        Ok(Cuboid { k1, k2, d })
    }

    /// `C_{sK}`.
    pub fn scaled(&self, s: f64) -> Cuboid {
        Cuboid { k1: self.k1 * s, k2: self.k2 * s, d: self.d }
    }

    pub fn dim(&self) -> usize {
        self.d + 1
    }

    pub fn region(&self) -> BoxRegion {
        let mut bounds = vec![(-self.k1, self.k1)];
        bounds.extend(std::iter::repeat_n((-self.k2, self.k2), self.d));
        BoxRegion { bounds }
    }

    pub fn volume(&self) -> f64 {
        2.0 * self.k1 * (2.0 * self.k2).powi(self.d as i32)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.region().contains(point)
    }
}

/// An axis-aligned closed box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub bounds: Vec<(f64, f64)>,
}

impl BoxRegion {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        BoxRegion { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && point.iter().zip(&self.bounds).all(|(x, (lo, hi))| x >= lo && x <= hi)
    }

    pub fn contains_box(&self, other: &BoxRegion, tol: f64) -> bool {
        self.bounds
            .iter()
            .zip(&other.bounds)
            .all(|((a, b), (c, d))| *c >= a - tol && *d <= b + tol)
    }

    pub fn intersect(&self, other: &BoxRegion) -> Option<BoxRegion> {
        let bounds: Vec<(f64, f64)> = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|((a, b), (c, d))| (a.max(*c), b.min(*d)))
            .collect();
        if bounds.iter().any(|(lo, hi)| hi <= lo) {
            None
        } else {
            Some(BoxRegion { bounds })
        }
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &BoxRegion) -> BoxRegion {
        BoxRegion {
            bounds: self.bounds.iter().zip(&other.bounds).map(|((a, b), (c, d))| (a + c, b + d)).collect(),
        }
    }

    pub fn hull(&self, other: &BoxRegion) -> BoxRegion {
        BoxRegion {
            bounds: self.bounds.iter().zip(&other.bounds).map(|((a, b), (c, d))| (a.min(*c), b.max(*d))).collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }
}

/// `weight · ∏_a factors[a](coordinate_a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub factors: Vec<PiecewisePoly1D>,
}

impl Term {
    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut v = self.weight;
        for (f, &x) in self.factors.iter().zip(point) {
            if v == 0.0 {
                return 0.0;
            }
            v *= f.eval(x);
        }
        v
    }

    pub fn support_box(&self) -> Option<BoxRegion> {
        let bounds = self.factors.iter().map(|f| f.support()).collect::<Option<Vec<_>>>()?;
        Some(BoxRegion { bounds })
    }

    fn is_zero(&self) -> bool {
        self.weight == 0.0 || self.factors.iter().any(PiecewisePoly1D::is_zero)
    }
}

/// Finite sum of separable terms on ℝ^{d+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFunction {
    dim: usize,
    terms: Vec<Term>,
}

impl TensorFunction {
    pub fn zero(dim: usize) -> Self {
        TensorFunction { dim, terms: Vec::new() }
    }

    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("tensor functions live on ℝ × ℝ^d with d ≥ 1".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.factors.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "term has {} axis factors, expected {dim}",
                t.factors.len()
            )));
        }
        Ok(TensorFunction { dim, terms: terms.into_iter().filter(|t| !t.is_zero()).collect() })
    }

    /// A single product term.
    pub fn product(weight: f64, factors: Vec<PiecewisePoly1D>) -> Result<Self> {
        let dim = factors.len();
        Self::new(dim, vec![Term { weight, factors }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.dim - 1
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.dim);
        self.terms.iter().map(|t| t.eval(point)).sum()
    }

    /// Bounding box of the union of term supports.
    pub fn support_box(&self) -> Option<BoxRegion> {
        self.terms
            .iter()
            .filter_map(Term::support_box)
            .reduce(|a, b| a.hull(&b))
    }

    /// All breakpoints of all factors along `axis`.
    pub fn axis_breakpoints(&self, axis: usize) -> Vec<f64> {
        self.terms
            .iter()
            .fold(Vec::new(), |acc, t| merge_breaks(&acc, t.factors[axis].breakpoints()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.dim);
        }
        TensorFunction {
            dim: self.dim,
            terms: self.terms.iter().map(|t| Term { weight: t.weight * s, factors: t.factors.clone() }).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TensorFunction { dim: self.dim, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `x ↦ f(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim, "shift dimension mismatch");
        TensorFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    weight: t.weight,
                    factors: t.factors.iter().zip(shift).map(|(f, &s)| f.shifted(s)).collect(),
                })
                .collect(),
        }
    }

    /// The one-dimensional function `t ↦ f(point with coordinate axis := t)`.
    pub fn slice(&self, axis: usize, point: &[f64]) -> PiecewisePoly1D {
        let weights: Vec<f64> = self
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| *a != axis)
                    .fold(t.weight, |acc, (a, f)| if acc == 0.0 { 0.0 } else { acc * f.eval(point[a]) })
            })
            .collect();
        let parts: Vec<(f64, &PiecewisePoly1D)> =
            weights.iter().zip(&self.terms).map(|(w, t)| (*w, &t.factors[axis])).collect();
        PiecewisePoly1D::linear_combination(&parts)
    }
}

/// Polynomial decay bound `|φ(x, y)| ≤ c̃ (1 + |x|)^{-s₁} (1 + |y|)^{-s₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub c: f64,
    pub s1: f64,
    pub s2: f64,
}

/// The generator vector `Φ = (φ₁, …, φ_r)` with its decay and stability
/// constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    generators: Vec<TensorFunction>,
    pub decay: Decay,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl GeneratorSet {
    pub fn new(generators: Vec<TensorFunction>, decay: Decay, alpha1: f64, alpha2: f64) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidArgument("a generator set needs at least one generator".into()));
        };
        if generators.iter().any(|g| g.dim() != first.dim()) {
            return Err(Error::InvalidArgument("generators must share one dimension".into()));
        }
        if !(decay.c > 0.0 && decay.s1 > 0.0 && decay.s2 > 0.0) {
            return Err(Error::InvalidArgument("decay constants must be positive".into()));
        }
        if !(alpha1 > 0.0 && alpha1 <= alpha2) {
            return Err(Error::InvalidArgument(format!(
                "stability constants need 0 < alpha1 <= alpha2, got {alpha1}, {alpha2}"
            )));
        }
        Ok(GeneratorSet { generators, decay, alpha1, alpha2 })
    }

    pub fn generators(&self) -> &[TensorFunction] {
        &self.generators
    }

    pub fn r(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn d(&self) -> usize {
        self.dim() - 1
    }

    /// Decay exponents must exceed `d + 1 - 1/p - d/q`.
    pub fn check_exponents(&self, p: f64, q: f64) -> Result<()> {
        let d = self.d() as f64;
        let need = d + 1.0 - 1.0 / p - d / q;
        if self.decay.s1 > need && self.decay.s2 > need {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "decay exponents s1 = {}, s2 = {} must exceed d + 1 - 1/p - d/q = {need}",
                self.decay.s1, self.decay.s2
            )))
        }
    }
}

/// Coefficients `c_i(k₁, k₂)` for `|k₁| ≤ N`, `|k₂|_∞ ≤ N`, one block per
/// generator. Within a block the layout is row-major in `(k₁, k₂[0], …)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientGrid {
    r: usize,
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl CoefficientGrid {
    pub fn zeros(r: usize, n: usize, d: usize) -> Self {
        let len = r * (2 * n + 1).pow(d as u32 + 1);
        CoefficientGrid { r, n, d, data: vec![0.0; len] }
    }

    pub fn from_vec(r: usize, n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        let grid = Self::zeros(r, n, d);
        if data.len() != grid.data.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, expected r(2N+1)^(d+1) = {}",
                data.len(),
                grid.data.len()
            )));
        }
        Ok(CoefficientGrid { data, ..grid })
    }

    /// Standard normal entries.
    pub fn random<R: Rng + ?Sized>(r: usize, n: usize, d: usize, rng: &mut R) -> Self {
        let mut g = Self::zeros(r, n, d);
        for v in &mut g.data {
            *v = rng.sample(StandardNormal);
        }
        g
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The shift bound `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn block_len(&self) -> usize {
        self.side().pow(self.d as u32 + 1)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, i: usize) -> &[f64] {
        let b = self.block_len();
        &self.data[i * b..(i + 1) * b]
    }

    /// Flat index of `c_i(shift[0], shift[1..])`.
    pub fn index(&self, i: usize, shift: &[i64]) -> usize {
        assert_eq!(shift.len(), self.d + 1);
        let n = self.n as i64;
        let mut idx = i;
        for &k in shift {
            assert!(k.abs() <= n, "shift {k} outside [-N, N]");
            idx = idx * self.side() + (k + n) as usize;
        }
        idx
    }

    /// Inverse of [`index`](Self::index).
    pub fn locate(&self, flat: usize) -> (usize, Vec<i64>) {
        let side = self.side();
        let mut rest = flat % self.block_len();
        let mut shift = vec![0i64; self.d + 1];
        for a in (0..=self.d).rev() {
            shift[a] = (rest % side) as i64 - self.n as i64;
            rest /= side;
        }
        (flat / self.block_len(), shift)
    }

    pub fn get(&self, i: usize, shift: &[i64]) -> f64 {
        self.data[self.index(i, shift)]
    }

    pub fn set(&mut self, i: usize, shift: &[i64], value: f64) {
        let idx = self.index(i, shift);
        self.data[idx] = value;
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoefficientGrid { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.r, self.n, self.d), (other.r, other.n, other.d), "grid shape mismatch");
        CoefficientGrid { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `Σ_i Σ_{k₁} Σ_{k₂} c_i(k₁, k₂) φ_i(· - k₁, · - k₂)` as an explicit tensor function.
pub fn synthesize(phi: &GeneratorSet, c: &CoefficientGrid) -> TensorFunction {
    assert_eq!(phi.r(), c.r(), "generator count differs from coefficient blocks");
    assert_eq!(phi.d(), c.d(), "dimension mismatch");
    let mut terms = Vec::new();
    for (flat, &v) in c.as_slice().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (i, shift) = c.locate(flat);
        let shift: Vec<f64> = shift.iter().map(|&k| k as f64).collect();
        for t in phi.generators()[i].translated(&shift).terms {
            terms.push(Term { weight: t.weight * v, factors: t.factors });
        }
    }
    TensorFunction { dim: phi.dim(), terms }
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent { p, q, reason: "mixed norms need 1 < p, q < ∞".into() })
    }
}

/// `‖f‖_{L^{p,q}(region)}` for `1 < p, q < ∞`.
pub fn mixed_norm(f: &TensorFunction, p: f64, q: f64, region: &BoxRegion, quad: QuadratureSpec) -> Result<f64> {
    check_exponents(p, q)?;
    if !quad.is_valid() {
        return Err(Error::InvalidArgument("quadrature order and refinement must be positive".into()));
    }
    Ok(lpq_norm(f, p, q, region, quad))
}

/// `‖f‖_{L^{1}(region)}`.
pub fn l1_norm(f: &TensorFunction, region: &BoxRegion, quad: QuadratureSpec) -> f64 {
    lpq_norm(f, 1.0, 1.0, region, quad)
}

/// Mixed norm for any finite `p, q ≥ 1`. Quadrature panels follow every
/// breakpoint of `f`, so the rule is exact for polynomial `|f|^q` pieces up
/// to degree `2·order - 1`.
pub(crate) fn lpq_norm(f: &TensorFunction, p: f64, q: f64, region: &BoxRegion, quad: QuadratureSpec) -> f64 {
    let Some(support) = f.support_box() else {
        return 0.0;
    };
    let Some(domain) = region.intersect(&support) else {
        return 0.0;
    };
    let rules: Vec<Rule1D> = (0..f.dim())
        .map(|a| Rule1D::aligned(&f.axis_breakpoints(a), domain.bounds[a].0, domain.bounds[a].1, quad))
        .collect();
    let table = FactorTable::new(f, &rules);

    let inner_dims: Vec<usize> = rules[1..].iter().map(Rule1D::len).collect();
    let mut outer = 0.0;
    let mut coef = vec![0.0; f.terms.len()];
    for (i, &wx) in rules[0].weights.iter().enumerate() {
        let mut any = false;
        for (t, c) in coef.iter_mut().enumerate() {
            *c = f.terms[t].weight * table.value(t, 0, i);
            any |= *c != 0.0;
        }
        if !any {
            continue;
        }
        let mut inner = 0.0;
        for_each_index(&inner_dims, |idx| {
            let mut w = 1.0;
            for (a, &j) in idx.iter().enumerate() {
                w *= rules[a + 1].weights[j];
            }
            let mut v = 0.0;
            for (t, &c) in coef.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let mut prod = c;
                for (a, &j) in idx.iter().enumerate() {
                    prod *= table.value(t, a + 1, j);
                }
                v += prod;
            }
            inner += w * v.abs().powf(q);
        });
        outer += wx * inner.powf(p / q);
    }
    outer.powf(1.0 / p)
}

/// Factor values at the quadrature nodes: `[term][axis][node]`.
struct FactorTable {
    values: Vec<Vec<Vec<f64>>>,
}

impl FactorTable {
    fn new(f: &TensorFunction, rules: &[Rule1D]) -> Self {
        let values = f
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .zip(rules)
                    .map(|(g, rule)| rule.nodes.iter().map(|&x| g.eval(x)).collect())
                    .collect()
            })
            .collect();
        FactorTable { values }
    }

    #[inline]
    fn value(&self, term: usize, axis: usize, node: usize) -> f64 {
        self.values[term][axis][node]
    }
}

/// Visits every multi-index of a tensor grid with the given extents.
pub(crate) fn for_each_index<F: FnMut(&[usize])>(dims: &[usize], mut f: F) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut a = dims.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Integral over `region` of `integrand(point)` with panels aligned to the
/// given per-axis breakpoints.
pub fn integrate_aligned<F: Fn(&[f64]) -> f64>(
    breaks: &[Vec<f64>],
    region: &BoxRegion,
    quad: QuadratureSpec,
    integrand: F,
) -> f64 {
    let rules: Vec<Rule1D> = region
        .bounds
        .iter()
        .zip(breaks)
        .map(|(&(lo, hi), b)| Rule1D::aligned(b, lo, hi, quad))
        .collect();
    let dims: Vec<usize> = rules.iter().map(Rule1D::len).collect();
    let mut point = vec![0.0; rules.len()];
    let mut total = 0.0;
    for_each_index(&dims, |idx| {
        let mut w = 1.0;
        for (a, &j) in idx.iter().enumerate() {
            point[a] = rules[a].nodes[j];
            w *= rules[a].weights[j];
        }
        total += w * integrand(&point);
    });
    total
}

/// `ess sup |f|` over `region`.
///
/// A tensor grid built from every factor breakpoint, every per-factor
/// critical point and an 8-fold uniform refinement is searched first; the
/// best candidates are then polished by exact one-dimensional maximisation
/// along each axis until no coordinate move improves the value.
pub fn sup_norm(f: &TensorFunction, region: &BoxRegion) -> f64 {
    let Some(support) = f.support_box() else {
        return 0.0;
    };
    let Some(domain) = region.intersect(&support) else {
        return 0.0;
    };
    let axes: Vec<Vec<f64>> = (0..f.dim()).map(|a| candidate_coordinates(f, a, domain.bounds[a])).collect();
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();

    const KEEP: usize = 6;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
    let mut point = vec![0.0; f.dim()];
    for_each_index(&dims, |idx| {
        for (a, &j) in idx.iter().enumerate() {
            point[a] = axes[a][j];
        }
        let v = f.eval(&point).abs();
        if best.len() < KEEP || v > best[best.len() - 1].0 {
            let pos = best.partition_point(|(b, _)| *b >= v);
            best.insert(pos, (v, point.clone()));
            best.truncate(KEEP);
        }
    });

    let mut sup = best.first().map_or(0.0, |b| b.0);
    for (mut value, mut p) in best {
        for _ in 0..25 {
            let mut improved = false;
            for a in 0..f.dim() {
                let line = f.slice(a, &p);
                let (x, v) = line.max_abs_on(domain.bounds[a].0, domain.bounds[a].1);
                if v > value * (1.0 + 1e-15) {
                    value = v;
                    p[a] = x;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        sup = sup.max(value);
    }
    sup
}

fn candidate_coordinates(f: &TensorFunction, axis: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let breaks: Vec<f64> = f.axis_breakpoints(axis).into_iter().filter(|&t| t > lo && t < hi).collect();
    let grid = merge_breaks(&[lo, hi], &breaks);
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / 8.0;
        pts.extend((0..8).map(|s| w[0] + h * s as f64));
        // Left limit at the end of the cell.
        pts.push(w[1] - 1e-12 * (1.0 + w[1].abs()));
    }
    for t in &f.terms {
        let g = &t.factors[axis];
        for (i, piece) in g.pieces().iter().enumerate() {
            let t0 = g.breakpoints()[i];
            let t1 = g.breakpoints()[i + 1];
            let (a, b) = (t0.max(lo), t1.min(hi));
            if a < b {
                pts.extend(piece.derivative().roots_in(a - t0, b - t0).into_iter().map(|s| s + t0));
            }
        }
    }
    pts.retain(|&x| x >= lo && x <= hi);
    merge_breaks(&pts, &[])
}

/// `‖c‖_{ℓ^{p,q}} = Σ_i ‖c_i‖_{ℓ^{p,q}}`. Either exponent may be infinite.
pub fn seq_mixed_norm(c: &CoefficientGrid, p: f64, q: f64) -> f64 {
    let row = c.side().pow(c.d() as u32);
    (0..c.r())
        .map(|i| {
            let rows = c.block(i).chunks(row).map(|r| lp(r.iter().copied(), q));
            lp(rows, p)
        })
        .sum()
}

fn lp<I: Iterator<Item = f64>>(values: I, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Empirical bracket for the stability constants α₁, α₂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBracket {
    /// Smallest observed `‖Σ c Φ(· - k)‖ / ‖c‖`; an upper estimate of α₁.
    pub min: f64,
    /// Largest observed ratio; a lower estimate of α₂.
    pub max: f64,
    pub trials: usize,
}

/// Ratios `‖synthesize(c)‖_{L^{p,q}} / ‖c‖_{ℓ^{p,q}}` over random grids.
/// The global norm is taken over the support box of each synthesized function.
pub fn estimate_stability(
    phi: &GeneratorSet,
    p: f64,
    q: f64,
    n: usize,
    trials: usize,
    seed: u64,
    quad: QuadratureSpec,
) -> Result<StabilityBracket> {
    check_exponents(p, q)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let ratios: Vec<f64> = Exec::default().map(trials, |t| {
        let mut rng = rng::stream(seed, t as u64);
        let c = loop {
            let c = CoefficientGrid::random(phi.r(), n, phi.d(), &mut rng);
            let norm = seq_mixed_norm(&c, p, q);
            if norm > 0.0 {
                break c.scaled(1.0 / norm);
            }
        };
        let f = synthesize(phi, &c);
        match f.support_box() {
            Some(b) => lpq_norm(&f, p, q, &b, quad),
            None => 0.0,
        }
    });
    Ok(StabilityBracket {
        min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max: ratios.iter().copied().fold(0.0, f64::max),
        trials,
    })
}

/// Riesz bounds `(α₁, α₂)` of the integer shifts of the B-spline of degree
/// `n` in `L²(ℝ)`: square roots of the extrema of the symbol
/// `Σ_k B_{2n+1}(k) cos(kξ)`.
pub fn bspline_riesz_bounds(n: usize) -> (f64, f64) {
    let auto = crate::piecewise::bspline(2 * n + 1);
    let kmax = n as i64 + 1;
    let symbol = |xi: f64| -> f64 { (-kmax..=kmax).map(|k| auto.eval(k as f64) * (k as f64 * xi).cos()).sum() };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=2048 {
        let v = symbol(std::f64::consts::PI * i as f64 / 2048.0);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo.sqrt(), hi.sqrt())
}

/// Smallest `c̃` with `|f(x, y)| ≤ c̃ (1 + |x|)^{-s₁} ∏_a (1 + |y_a|)^{-s₂}`,
/// bounded term by term. Because `1 + |y| ≤ ∏_a (1 + |y_a|)`, the result is
/// also a valid decay constant for the Euclidean `|y|`.
pub fn decay_constant(f: &TensorFunction, s1: f64, s2: f64) -> f64 {
    f.terms()
        .iter()
        .map(|t| {
            t.weight.abs()
                * t.factors
                    .iter()
                    .enumerate()
                    .map(|(a, g)| weighted_sup(g, if a == 0 { s1 } else { s2 }))
                    .product::<f64>()
        })
        .sum()
}

/// `sup_x |g(x)| (1 + |x|)^s`: dense sampling per piece, then golden-section
/// refinement around the best sample.
fn weighted_sup(g: &PiecewisePoly1D, s: f64) -> f64 {
    let h = |x: f64| g.eval(x).abs().max(g.eval_left(x).abs()) * (1.0 + x.abs()).powf(s);
    let mut best = 0.0f64;
    for w in g.breakpoints().windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 64;
        let step = (b - a) / m as f64;
        let mut arg = a;
        for i in 0..=m {
            let x = a + step * i as f64;
            let v = h(x);
            if v > best {
                best = v;
                arg = x;
            }
        }
        let (mut lo, mut hi) = ((arg - step).max(a), (arg + step).min(b));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = hi - phi * (hi - lo);
            let x2 = lo + phi * (hi - lo);
            if h(x1) < h(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        best = best.max(h(0.5 * (lo + hi)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::bspline;
    use proptest::prelude::*;

    fn b(n: usize, shift: f64) -> PiecewisePoly1D {
        bspline(n).shifted(shift)
    }

    fn tensor_bspline(n: usize) -> TensorFunction {
        TensorFunction::product(1.0, vec![bspline(n), bspline(n)]).unwrap()
    }

    fn single(n: usize) -> GeneratorSet {
        GeneratorSet::new(vec![tensor_bspline(n)], Decay { c: 1.0, s1: 2.0, s2: 2.0 }, 0.5, 1.0).unwrap()
    }

    #[test]
    fn cuboid_validation() {
        assert!(Cuboid::new(0.0, 1.0, 1).is_err());
        assert!(Cuboid::new(1.0, 1.0, 0).is_err());
        let c = Cuboid::new(2.5, 1.0, 2).unwrap();
        assert_eq!(c.region().bounds, vec![(-2.5, 2.5), (-1.0, 1.0), (-1.0, 1.0)]);
        assert!((c.volume() - 20.0).abs() < 1e-15);
        assert_eq!(c.scaled(2.0).k1, 5.0);
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = CoefficientGrid::zeros(2, 2, 2);
        assert_eq!(g.len(), 2 * 125);
        for flat in [0, 1, 37, 124, 125, 249] {
            let (i, s) = g.locate(flat);
            assert_eq!(g.index(i, &s), flat);
        }
        assert_eq!(g.locate(0), (0, vec![-2, -2, -2]));
        assert!(CoefficientGrid::from_vec(1, 1, 1, vec![0.0; 8]).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let phi = single(2);
        assert!(synthesize(&phi, &CoefficientGrid::zeros(1, 1, 1)).is_zero());

        let mut c = CoefficientGrid::zeros(1, 1, 1);
        c.set(0, &[0, 0], 1.0);
        let f = synthesize(&phi, &c);
        for p in [[0.0, 0.0], [0.3, -1.1], [1.4, 0.2]] {
            assert_eq!(f.eval(&p), tensor_bspline(2).eval(&p));
        }

        let mut c = CoefficientGrid::zeros(1, 1, 1);
        c.set(0, &[0, 1], 3.0);
        c.set(0, &[-1, 0], -5.0);
        let f = synthesize(&phi, &c);
        // 3·B₂(0)·B₂(0) − 5·B₂(1)·B₂(1), with B₂(0) = 3/4 and B₂(1) = 1/8.
        assert!((f.eval(&[0.0, 1.0]) - 1.609375).abs() < 1e-15);
    }

    #[test]
    fn norms_of_indicators() {
        let unit = TensorFunction::product(
            1.0,
            vec![PiecewisePoly1D::indicator(0.0, 1.0).unwrap(), PiecewisePoly1D::indicator(0.0, 1.0).unwrap()],
        )
        .unwrap();
        let big = BoxRegion::new(vec![(-3.0, 3.0), (-3.0, 3.0)]);
        for (p, q) in [(2.0, 2.0), (1.5, 4.0), (3.0, 1.2)] {
            let v = mixed_norm(&unit, p, q, &big, QuadratureSpec::default()).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let f = tensor_bspline(0);
        let v = mixed_norm(&f, 2.0, 2.0, &BoxRegion::new(vec![(-1.0, 1.0), (-1.0, 1.0)]), QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(mixed_norm(&f, 1.0, 2.0, &big, QuadratureSpec::default()).is_err());
        assert!(mixed_norm(&f, 2.0, f64::INFINITY, &big, QuadratureSpec::default()).is_err());
    }

    #[test]
    fn mixed_norm_orders_exponents_correctly() {
        // f = 1 on [0,1]×[0,1] and 2 on [0,1]×[1,2] ∪ … : use a separable
        // but anisotropic function to distinguish (p,q) from (q,p).
        let fx = PiecewisePoly1D::new(
            vec![0.0, 1.0, 2.0],
            vec![crate::piecewise::Poly1D::constant(1.0), crate::piecewise::Poly1D::constant(3.0)],
            -1,
        )
        .unwrap();
        let fy = PiecewisePoly1D::indicator(0.0, 2.0).unwrap();
        let f = TensorFunction::product(1.0, vec![fx, fy]).unwrap();
        let region = BoxRegion::new(vec![(-5.0, 5.0), (-5.0, 5.0)]);
        let (p, q) = (3.0, 1.5);
        // inner: (∫|f|^q dy)^{1/q} = v·2^{1/q}; outer: (Σ (v·2^{1/q})^p)^{1/p}.
        let expect = ((1.0f64 + 3.0f64.powf(p)) * 2f64.powf(p / q)).powf(1.0 / p);
        let got = mixed_norm(&f, p, q, &region, QuadratureSpec::default()).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn sup_norm_examples() {
        let r = BoxRegion::new(vec![(-1.0, 1.0), (-1.0, 1.0)]);
        assert_eq!(sup_norm(&TensorFunction::zero(2), &r), 0.0);
        assert!((sup_norm(&tensor_bspline(1), &r) - 1.0).abs() < 1e-15);

        let f = TensorFunction::new(
            2,
            vec![
                Term { weight: 3.0, factors: vec![b(2, 0.0), b(2, 1.0)] },
                Term { weight: -5.0, factors: vec![b(2, -1.0), b(2, 0.0)] },
            ],
        )
        .unwrap();
        let region = BoxRegion::new(vec![(-2.5, 2.5), (-2.5, 2.5)]);
        let s = sup_norm(&f, &region);
        // Dense-grid oracle at spacing 1/400.
        let mut dense = 0.0f64;
        for i in 0..=2000 {
            for j in 0..=2000 {
                let p = [-2.5 + i as f64 / 400.0, -2.5 + j as f64 / 400.0];
                dense = dense.max(f.eval(&p).abs());
            }
        }
        assert!(s >= dense - 1e-15, "{s} < {dense}");
        assert!(s <= dense + 1e-4);
        assert!(s >= 5.0 * 0.75 * 0.75 - 3.0 * 0.75 * 0.125 - 1e-12);
    }

    #[test]
    fn sequence_norms() {
        let mut c = CoefficientGrid::zeros(1, 1, 1);
        c.set(0, &[1, -1], 5.0);
        for (p, q) in [(2.0, 2.0), (1.5, 3.0), (f64::INFINITY, f64::INFINITY)] {
            assert!((seq_mixed_norm(&c, p, q) - 5.0).abs() < 1e-14);
        }
        let mut c = CoefficientGrid::zeros(1, 1, 1);
        c.set(0, &[0, -1], 3.0);
        c.set(0, &[0, 1], 4.0);
        assert!((seq_mixed_norm(&c, 2.0, 2.0) - 5.0).abs() < 1e-14);
        // Same row: inner ℓ^q first.
        assert!((seq_mixed_norm(&c, 1.5, 1.0) - 7.0).abs() < 1e-14);
        let mut c2 = CoefficientGrid::zeros(1, 1, 1);
        c2.set(0, &[-1, 0], 3.0);
        c2.set(0, &[1, 0], 4.0);
        assert!((seq_mixed_norm(&c2, 1.0, 1.5) - 7.0).abs() < 1e-14);
        // Blocks add.
        let mut two = CoefficientGrid::zeros(2, 0, 1);
        two.set(0, &[0, 0], 3.0);
        two.set(1, &[0, 0], 4.0);
        assert!((seq_mixed_norm(&two, 2.0, 2.0) - 7.0).abs() < 1e-14);
    }

    #[test]
    fn haar_generator_is_orthonormal() {
        let phi = GeneratorSet::new(vec![tensor_bspline(0)], Decay { c: 1.0, s1: 2.0, s2: 2.0 }, 1.0, 1.0).unwrap();
        let s = estimate_stability(&phi, 2.0, 2.0, 2, 16, 3, QuadratureSpec::default()).unwrap();
        assert!((s.min - 1.0).abs() < 1e-9 && (s.max - 1.0).abs() < 1e-9);
        let s = estimate_stability(&phi, 3.0, 1.5, 2, 8, 3, QuadratureSpec::default()).unwrap();
        assert!((s.min - 1.0).abs() < 1e-9 && (s.max - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stability_bracket_for_quadratic_spline() {
        let s = estimate_stability(&single(2), 2.0, 2.0, 1, 12, 11, QuadratureSpec::default()).unwrap();
        assert!(s.min > 0.0 && s.min <= s.max && s.max <= 1.0 + 1e-12);
        let (lo, hi) = bspline_riesz_bounds(2);
        assert!(s.min >= lo * lo - 1e-9, "tensor lower Riesz bound is (α₁ of B₂)²");
        assert!(s.max <= hi * hi + 1e-9);
        assert!(estimate_stability(&single(2), 2.0, 2.0, 1, 0, 0, QuadratureSpec::default()).is_err());
    }

    #[test]
    fn riesz_bounds_known_values() {
        let (lo, hi) = bspline_riesz_bounds(0);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        let (lo, hi) = bspline_riesz_bounds(1);
        assert!((lo - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decay_constant_of_bspline() {
        let f = tensor_bspline(0);
        // sup_{|x| ≤ 1/2} (1 + |x|)^2 = 2.25 per axis.
        assert!((decay_constant(&f, 2.0, 2.0) - 2.25 * 2.25).abs() < 1e-9);
    }

    fn arb_tensor() -> impl Strategy<Value = TensorFunction> {
        prop::collection::vec((-3.0f64..3.0, 0usize..4, -1.5f64..1.5, 0usize..4, -1.5f64..1.5), 1..4).prop_map(|ts| {
            let terms = ts
                .into_iter()
                .map(|(w, n1, s1, n2, s2)| Term { weight: w, factors: vec![b(n1, s1), b(n2, s2)] })
                .collect();
            TensorFunction::new(2, terms).unwrap()
        })
    }

    /// Flat two-dimensional quadrature: 3-point Gauss on an 8-fold refined
    /// grid aligned with every breakpoint; independent of `lpq_norm`.
    fn flat_lp_oracle(f: &TensorFunction, p: f64, region: &BoxRegion) -> f64 {
        let g3 = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
        let axis_nodes = |a: usize| -> Vec<(f64, f64)> {
            let (lo, hi) = region.bounds[a];
            let mut br: Vec<f64> = f.axis_breakpoints(a).into_iter().filter(|&t| t > lo && t < hi).collect();
            br.insert(0, lo);
            br.push(hi);
            let mut out = Vec::new();
            for w in br.windows(2) {
                let h = (w[1] - w[0]) / 8.0;
                for s in 0..8 {
                    let m = w[0] + h * (s as f64 + 0.5);
                    for (x, wt) in g3 {
                        out.push((m + 0.5 * h * x, 0.5 * h * wt));
                    }
                }
            }
            out
        };
        let xs = axis_nodes(0);
        let ys = axis_nodes(1);
        let mut s = 0.0;
        for (x, wx) in &xs {
            for (y, wy) in &ys {
                s += wx * wy * f.eval(&[*x, *y]).abs().powf(p);
            }
        }
        s.powf(1.0 / p)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn equal_exponents_match_flat_oracle(f in arb_tensor(), p in prop::sample::select(vec![2.0f64, 4.0])) {
            let region = BoxRegion::new(vec![(-3.0, 3.0), (-3.0, 3.0)]);
            let got = mixed_norm(&f, p, p, &region, QuadratureSpec::default()).unwrap();
            let want = flat_lp_oracle(&f, p, &region);
            prop_assert!((got - want).abs() <= 1e-8 * want.max(1e-300), "{got} vs {want}");
        }

        #[test]
        fn homogeneity_and_triangle(f in arb_tensor(), g in arb_tensor(), lambda in -4.0f64..4.0, p in 1.2f64..4.0, q in 1.2f64..4.0) {
            let region = BoxRegion::new(vec![(-2.0, 2.5), (-3.0, 1.0)]);
            let quad = QuadratureSpec::default();
            let nf = mixed_norm(&f, p, q, &region, quad).unwrap();
            let nl = mixed_norm(&f.scaled(lambda), p, q, &region, quad).unwrap();
            prop_assert!((nl - lambda.abs() * nf).abs() <= 1e-12 * nf.max(1e-300) * (1.0 + lambda.abs()));
            let ng = mixed_norm(&g, p, q, &region, quad).unwrap();
            let nfg = mixed_norm(&f.add(&g), p, q, &region, quad).unwrap();
            prop_assert!(nfg <= nf + ng + 1e-9 * (nf + ng));
        }

        #[test]
        fn synthesize_is_linear(seed in 0u64..1000, pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 100)) {
            let phi = single(2);
            let mut rng = rng::stream(seed, 0);
            let c1 = CoefficientGrid::random(1, 2, 1, &mut rng);
            let c2 = CoefficientGrid::random(1, 2, 1, &mut rng);
            let lhs = synthesize(&phi, &c1.add(&c2));
            let f1 = synthesize(&phi, &c1);
            let f2 = synthesize(&phi, &c2);
            for (x, y) in pts {
                let p = [x, y];
                prop_assert!((lhs.eval(&p) - f1.eval(&p) - f2.eval(&p)).abs() <= 1e-12);
            }
        }

        #[test]
        fn equal_exponent_sequence_norm_is_flat(seed in 0u64..1000, p in 1.1f64..5.0) {
            let mut rng = rng::stream(seed, 1);
            let c = CoefficientGrid::random(1, 2, 1, &mut rng);
            let flat: f64 = c.as_slice().iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            prop_assert!((seq_mixed_norm(&c, p, p) - flat).abs() <= 1e-12 * flat);
        }
    }
}
