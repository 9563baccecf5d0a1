//! Exact algebra of compactly supported piecewise polynomials on ℝ.
//!
//! Every piece is stored in the local coordinate `x - t_i` of its left
//! breakpoint. Translating a function then only moves breakpoints, and the
//! coefficients of high-degree B-spline pieces stay well scaled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoints closer than this are treated as one.
pub const BREAK_TOL: f64 = 1e-12;

/// Dense polynomial with coefficients in ascending degree.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly1D {
    coeffs: Vec<f64>,
}

impl Poly1D {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly1D { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly1D { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly1D::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly1D {
        Poly1D::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly1D {
        if self.is_zero() {
            return Poly1D::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / (k as f64 + 1.0)));
        Poly1D::new(c)
    }

    pub fn scale(&self, s: f64) -> Poly1D {
        Poly1D::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly1D) -> Poly1D {
        self.axpy(1.0, other)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Poly1D) -> Poly1D {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; n];
        for (k, v) in self.coeffs.iter().enumerate() {
            c[k] += v;
        }
        for (k, v) in other.coeffs.iter().enumerate() {
            c[k] += a * v;
        }
        Poly1D::new(c)
    }

    /// Coefficients of `t ↦ p(t + h)`.
    pub fn taylor_shift(&self, h: f64) -> Poly1D {
        if h == 0.0 || self.coeffs.len() < 2 {
            return self.clone();
        }
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n - 1 {
            for k in (i..n - 1).rev() {
                c[k] += h * c[k + 1];
            }
        }
        Poly1D::new(c)
    }

    /// Real roots of odd multiplicity in `[lo, hi]`, ascending.
    ///
    /// Roots are isolated recursively: between consecutive critical points
    /// the polynomial is monotone, so each such segment holds at most one
    /// sign change, which is then bisected.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            Some(_) => {
                let mut marks = vec![lo];
                marks.extend(self.derivative().roots_in(lo, hi));
                marks.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for w in marks.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (self.eval(a), self.eval(b));
                    if fa == 0.0 {
                        roots.push(a);
                    } else if fa.signum() != fb.signum() && fb != 0.0 {
                        roots.push(bisect(|t| self.eval(t), a, b, fa));
                    }
                }
                if self.eval(hi) == 0.0 {
                    roots.push(hi);
                }
                roots.dedup_by(|a, b| (*a - *b).abs() <= BREAK_TOL);
                roots
            }
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Union of two sorted breakpoint lists, merging points within [`BREAK_TOL`].
pub fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("breakpoints must not be NaN"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&last) if (t - last).abs() <= BREAK_TOL * (1.0 + last.abs()) => {}
            _ => out.push(t),
        }
    }
    out
}

/// A compactly supported piecewise polynomial.
///
/// Piece `i` is valid on `[t_i, t_{i+1})` and is expressed in `x - t_i`.
/// The function vanishes outside `[t_0, t_M)`; evaluation is
/// right-continuous at every breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly1D {
    breaks: Vec<f64>,
    pieces: Vec<Poly1D>,
    /// Guaranteed smoothness class: `-1` for possibly discontinuous,
    /// `k >= 0` for `C^k`.
    smoothness: i32,
}

impl PiecewisePoly1D {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly1D>, smoothness: i32) -> Result<Self> {
        if breaks.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if pieces.len() + 1 != breaks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len().saturating_sub(1),
                pieces.len()
            )));
        }
        if breaks.iter().any(|t| !t.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        let mut f = PiecewisePoly1D { breaks, pieces, smoothness: smoothness.max(-1) };
        f.trim();
        Ok(f)
    }

    pub fn zero() -> Self {
        PiecewisePoly1D { breaks: Vec::new(), pieces: Vec::new(), smoothness: i32::MAX }
    }

    /// `value · χ_[a, b)`.
    pub fn box_function(a: f64, b: f64, value: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::DegenerateInterval { a, b });
        }
        Self::new(vec![a, b], vec![Poly1D::constant(value)], -1)
    }

    /// Indicator of `[a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::box_function(a, b, 1.0)
    }

    fn trim(&mut self) {
        let first = self.pieces.iter().position(|p| !p.is_zero());
        match first {
            None => *self = Self::zero(),
            Some(lo) => {
                let hi = self.pieces.iter().rposition(|p| !p.is_zero()).unwrap();
                if lo > 0 || hi + 1 < self.pieces.len() {
                    self.pieces = self.pieces[lo..=hi].to_vec();
                    self.breaks = self.breaks[lo..=hi + 1].to_vec();
                }
            }
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly1D] {
        &self.pieces
    }

    pub fn smoothness(&self) -> i32 {
        self.smoothness
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().filter_map(Poly1D::degree).max().unwrap_or(0)
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breaks.first()?, *self.breaks.last()?))
    }

    /// Index of the piece whose half-open interval contains `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support()?;
        if !(x >= lo && x < hi) {
            return None;
        }
        Some(self.breaks.partition_point(|&t| t <= x) - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(i) => self.pieces[i].eval(x - self.breaks[i]),
            None => 0.0,
        }
    }

    /// Limit from the left at `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.support() else {
            return 0.0;
        };
        if !(x > lo && x <= hi) {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&t| t < x) - 1;
        self.pieces[i].eval(x - self.breaks[i])
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(p, w)| p.integral().eval(w[1] - w[0]))
            .sum()
    }

    pub fn antiderivative(&self) -> Antiderivative {
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (p, w) in self.pieces.iter().zip(self.breaks.windows(2)) {
            let int = p.integral();
            pieces.push(int.add(&Poly1D::constant(acc)));
            acc += int.eval(w[1] - w[0]);
        }
        Antiderivative {
            breaks: self.breaks.clone(),
            pieces,
            total: acc,
            smoothness: self.smoothness.saturating_add(1),
        }
    }

    /// `x ↦ scale · f(x - shift)`.
    pub fn shift_scale(&self, shift: f64, scale: f64) -> Result<Self> {
        if scale == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok(PiecewisePoly1D {
            breaks: self.breaks.iter().map(|t| t + shift).collect(),
            pieces: self.pieces.iter().map(|p| p.scale(scale)).collect(),
            smoothness: self.smoothness,
        })
    }

    pub fn shifted(&self, shift: f64) -> Self {
        self.shift_scale(shift, 1.0).expect("unit scale")
    }

    /// `s · f`, including `s = 0`.
    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        self.shift_scale(0.0, s).expect("nonzero scale")
    }

    /// The local polynomial representing `f` on `[u, v)` expressed in `x - u`.
    fn local_on(&self, u: f64, v: f64) -> Poly1D {
        match self.locate(0.5 * (u + v)) {
            Some(i) => self.pieces[i].taylor_shift(u - self.breaks[i]),
            None => Poly1D::zero(),
        }
    }

    /// `Σ a_k f_k` on the merged breakpoint grid.
    pub fn linear_combination(terms: &[(f64, &PiecewisePoly1D)]) -> Self {
        let mut grid: Vec<f64> = Vec::new();
        let mut smooth = i32::MAX;
        for (a, f) in terms {
            if *a != 0.0 && !f.is_zero() {
                grid = merge_breaks(&grid, &f.breaks);
                smooth = smooth.min(f.smoothness);
            }
        }
        if grid.len() < 2 {
            return Self::zero();
        }
        let pieces = grid
            .windows(2)
            .map(|w| {
                terms.iter().fold(Poly1D::zero(), |acc, (a, f)| {
                    if *a == 0.0 {
                        acc
                    } else {
                        acc.axpy(*a, &f.local_on(w[0], w[1]))
                    }
                })
            })
            .collect();
        let mut out = PiecewisePoly1D { breaks: grid, pieces, smoothness: smooth };
        out.trim();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    /// `x ↦ ∫_{x-b}^{x-a} f(t) dt`, i.e. the convolution of `f` with `χ_[a,b]`.
    pub fn convolve_box(&self, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::DegenerateInterval { a, b });
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let anti = self.antiderivative();
        let lead: Vec<f64> = self.breaks.iter().map(|t| t + a).collect();
        let lag: Vec<f64> = self.breaks.iter().map(|t| t + b).collect();
        let grid = merge_breaks(&lead, &lag);
        let pieces = grid
            .windows(2)
            .map(|w| {
                let (u, v) = (w[0], w[1]);
                let mid = 0.5 * (u + v);
                let hi = anti.local_poly(mid - a, u - a);
                let lo = anti.local_poly(mid - b, u - b);
                hi.axpy(-1.0, &lo)
            })
            .collect();
        let mut out = PiecewisePoly1D {
            breaks: grid,
            pieces,
            smoothness: self.smoothness.saturating_add(1),
        };
        out.trim();
        Ok(out)
    }

    /// Convolution with a piecewise-constant kernel, as a weighted sum of
    /// [`convolve_box`](Self::convolve_box) terms.
    pub fn convolve_step(&self, kernel: &PiecewisePoly1D) -> Result<Self> {
        if kernel.max_degree() > 0 {
            return Err(Error::UnsupportedKernel(format!(
                "kernel factor has a piece of degree {}; only piecewise-constant factors are supported",
                kernel.max_degree()
            )));
        }
        let parts: Vec<(f64, PiecewisePoly1D)> = kernel
            .pieces
            .iter()
            .zip(kernel.breaks.windows(2))
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, w)| Ok((p.coeffs()[0], self.convolve_box(w[0], w[1])?)))
            .collect::<Result<_>>()?;
        let refs: Vec<(f64, &PiecewisePoly1D)> = parts.iter().map(|(c, f)| (*c, f)).collect();
        let mut out = Self::linear_combination(&refs);
        out.smoothness = self.smoothness.saturating_add(kernel.smoothness.max(-1) + 1);
        Ok(out)
    }

    /// Supremum of `|f|` over `[lo, hi]` together with a point where it is
    /// attained (as a value or as a one-sided limit).
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, 0.0);
        if hi < lo {
            return best;
        }
        for (i, p) in self.pieces.iter().enumerate() {
            let (t0, t1) = (self.breaks[i], self.breaks[i + 1]);
            let a = t0.max(lo);
            let b = t1.min(hi);
            if a > b {
                continue;
            }
            let mut cands = vec![a, b];
            cands.extend(p.derivative().roots_in(a - t0, b - t0).into_iter().map(|s| s + t0));
            for x in cands {
                let v = p.eval(x - t0).abs();
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
        best
    }
}

/// Antiderivative `F(x) = ∫_{-∞}^x f`, constant (equal to `total`) to the
/// right of the support of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Antiderivative {
    breaks: Vec<f64>,
    pieces: Vec<Poly1D>,
    total: f64,
    smoothness: i32,
}

impl Antiderivative {
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly1D] {
        &self.pieces
    }

    pub fn smoothness(&self) -> i32 {
        self.smoothness
    }

    pub fn eval(&self, x: f64) -> f64 {
        match (self.breaks.first(), self.breaks.last()) {
            (Some(&lo), Some(&hi)) => {
                if x < lo {
                    0.0
                } else if x >= hi {
                    self.total
                } else {
                    let i = self.breaks.partition_point(|&t| t <= x) - 1;
                    self.pieces[i].eval(x - self.breaks[i])
                }
            }
            _ => 0.0,
        }
    }

    /// The polynomial that agrees with `F` near `probe`, re-expanded about
    /// `origin`.
    fn local_poly(&self, probe: f64, origin: f64) -> Poly1D {
        let (Some(&lo), Some(&hi)) = (self.breaks.first(), self.breaks.last()) else {
            return Poly1D::zero();
        };
        if probe < lo {
            Poly1D::zero()
        } else if probe >= hi {
            Poly1D::constant(self.total)
        } else {
            let i = self.breaks.partition_point(|&t| t <= probe) - 1;
            self.pieces[i].taylor_shift(origin - self.breaks[i])
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Centred cardinal B-spline of degree `n`, supported on
/// `[-(n+1)/2, (n+1)/2]`, built from the truncated-power representation
/// `B_n(x) = (1/n!) Σ_k (-1)^k C(n+1, k) (x + (n+1)/2 - k)_+^n`.
pub fn bspline(n: usize) -> PiecewisePoly1D {
    let half = (n as f64 + 1.0) / 2.0;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let breaks: Vec<f64> = (0..=n + 1).map(|j| j as f64 - half).collect();
    let pieces = (0..=n)
        .map(|j| {
            // On piece j, (x - t_k)^n = (s + (j - k))^n with s = x - t_j.
            let mut c = vec![0.0; n + 1];
            for k in 0..=j {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let w = sign * binomial(n + 1, k) / factorial;
                let off = (j - k) as f64;
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci += w * binomial(n, i) * off.powi((n - i) as i32);
                }
            }
            Poly1D::new(c)
        })
        .collect();
    PiecewisePoly1D { breaks, pieces, smoothness: n as i32 - 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson on a fine grid, used as an independent check of
    /// exact integrals.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn poly_basics() {
        let p = Poly1D::new(vec![1.0, -2.0, 3.0, 0.0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        assert_eq!(p.integral().eval(1.0), 1.0 - 1.0 + 1.0);
        let q = p.taylor_shift(0.5);
        for t in [-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(t) - p.eval(t + 0.5)).abs() < 1e-14);
        }
        assert!(Poly1D::zero().is_zero());
        assert_eq!(Poly1D::zero().degree(), None);
    }

    #[test]
    fn roots_are_found_between_critical_points() {
        // (t - 0.1)(t - 0.2)(t - 0.9)
        let p = Poly1D::new(vec![-0.018, 0.29, -1.2, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.1, 0.2, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(Poly1D::constant(2.0).roots_in(0.0, 1.0).is_empty());
    }

    #[test]
    fn bspline_zero_is_box() {
        let b0 = bspline(0);
        assert_eq!(b0.support(), Some((-0.5, 0.5)));
        assert_eq!(b0.eval(0.0), 1.0);
        assert_eq!(b0.eval(-0.5), 1.0);
        assert_eq!(b0.eval(0.49), 1.0);
        assert_eq!(b0.eval(0.5), 0.0);
        assert_eq!(b0.eval(2.0), 0.0);
        assert_eq!(b0.smoothness(), -1);
    }

    /// ∫ B₀(t) B₀(x − t) dt on a fine grid.
    fn conv_b0_oracle(g: impl Fn(f64) -> f64, x: f64) -> f64 {
        simpson(|t| g(t) * if (x - t).abs() <= 0.5 { 1.0 } else { 0.0 }, x - 0.5, x + 0.5, 20_000)
    }

    #[test]
    fn bspline_values_match_convolution_oracle() {
        let b0 = |t: f64| if (-0.5..0.5).contains(&t) { 1.0 } else { 0.0 };
        let b1 = |x: f64| conv_b0_oracle(b0, x);
        let b2_at_0 = conv_b0_oracle(b1, 0.0);
        assert!((b1(0.0) - 1.0).abs() < 1e-3);
        assert!((b2_at_0 - 0.75).abs() < 1e-3);
        assert_eq!(bspline(1).eval(0.0), 1.0);
        assert!((bspline(2).eval(0.0) - 0.75).abs() < 1e-15);
        assert!((bspline(1).eval(0.5) - 0.5).abs() < 1e-15);
        assert!((bspline(2).eval(1.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn eval_conventions() {
        assert_eq!(PiecewisePoly1D::zero().eval(0.3), 0.0);
        let f = PiecewisePoly1D::new(
            vec![0.0, 1.0, 2.0],
            vec![Poly1D::constant(1.0), Poly1D::constant(3.0)],
            -1,
        )
        .unwrap();
        assert_eq!(f.eval(1.0), 3.0, "right-continuous");
        assert_eq!(f.eval_left(1.0), 1.0);
        assert_eq!(f.eval(2.0), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(PiecewisePoly1D::new(vec![0.0, 0.0], vec![Poly1D::constant(1.0)], 0).is_err());
        assert!(PiecewisePoly1D::new(vec![0.0, 1.0], vec![], 0).is_err());
        assert!(matches!(
            PiecewisePoly1D::indicator(1.0, 1.0),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    fn assert_same(a: &PiecewisePoly1D, b: &PiecewisePoly1D, tol: f64) {
        assert_eq!(a.breakpoints().len(), b.breakpoints().len());
        for (x, y) in a.breakpoints().iter().zip(b.breakpoints()) {
            assert!((x - y).abs() <= tol);
        }
        for (p, q) in a.pieces().iter().zip(b.pieces()) {
            let n = p.coeffs().len().max(q.coeffs().len());
            for k in 0..n {
                let x = p.coeffs().get(k).copied().unwrap_or(0.0);
                let y = q.coeffs().get(k).copied().unwrap_or(0.0);
                assert!((x - y).abs() <= tol, "coefficient {k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn box_convolution_raises_bspline_degree() {
        for n in 0..=6 {
            let next = bspline(n).convolve_box(-0.5, 0.5).unwrap();
            assert_same(&next, &bspline(n + 1), 1e-12);
            assert_eq!(next.smoothness(), n as i32);
        }
    }

    #[test]
    fn narrow_box_convolution_of_b0() {
        let g = bspline(0).convolve_box(-0.125, 0.125).unwrap();
        let oracle = simpson(|t| bspline(0).eval(t), -0.125, 0.125, 1000);
        assert!((g.eval(0.0) - oracle).abs() < 1e-12);
        assert!((g.eval(0.0) - 0.25).abs() < 1e-15);
        assert_eq!(g.support(), Some((-0.625, 0.625)));
        assert!(PiecewisePoly1D::zero().convolve_box(-1.0, 1.0).unwrap().is_zero());
        assert!(bspline(1).convolve_box(0.5, 0.5).is_err());
    }

    #[test]
    fn antiderivative_values() {
        let a0 = bspline(0).antiderivative();
        assert_eq!(a0.eval(0.5), 1.0);
        assert_eq!(a0.eval(-3.0), 0.0);
        assert_eq!(a0.eval(10.0), 1.0);
        assert_eq!(bspline(1).antiderivative().eval(0.0), 0.5);
        assert_eq!(PiecewisePoly1D::zero().antiderivative().total(), 0.0);
        for n in 0..=8 {
            assert!((bspline(n).antiderivative().total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_scale_behaviour() {
        let b2 = bspline(2);
        assert!((b2.shift_scale(1.0, 1.0).unwrap().eval(1.0) - 0.75).abs() < 1e-15);
        assert_eq!(b2.shift_scale(0.0, 1.0).unwrap(), b2);
        let neg = b2.shift_scale(0.0, -1.0).unwrap();
        assert!(neg.add(&b2).is_zero());
        assert!(matches!(b2.shift_scale(0.0, 0.0), Err(Error::ZeroScale)));
    }

    #[test]
    fn step_kernel_convolution() {
        let k = PiecewisePoly1D::new(
            vec![-0.5, 0.0, 0.5],
            vec![Poly1D::constant(1.0), Poly1D::constant(1.0)],
            -1,
        )
        .unwrap();
        let g = bspline(1).convolve_step(&k).unwrap();
        // Same function as B₂, on a grid with the extra half-integer breakpoints.
        assert_eq!(g.support(), bspline(2).support());
        for i in 0..=300 {
            let x = -1.6 + 0.01 * i as f64;
            assert!((g.eval(x) - bspline(2).eval(x)).abs() < 1e-14);
        }
        assert!(bspline(1).convolve_step(&bspline(1)).is_err());
    }

    #[test]
    fn max_abs_of_bspline() {
        let (x, v) = bspline(2).max_abs_on(-5.0, 5.0);
        assert!((v - 0.75).abs() < 1e-14 && x.abs() < 1e-9);
        let (_, v) = bspline(3).max_abs_on(1.0, 3.0);
        assert!((v - bspline(3).eval(1.0)).abs() < 1e-15);
    }

    fn arb_pp() -> impl Strategy<Value = PiecewisePoly1D> {
        (
            -2.0f64..2.0,
            prop::collection::vec(0.1f64..1.0, 1..5),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 1..4), 4),
        )
            .prop_map(|(start, widths, coeffs)| {
                let mut breaks = vec![start];
                for w in &widths {
                    breaks.push(breaks.last().unwrap() + w);
                }
                let pieces = (0..widths.len()).map(|i| Poly1D::new(coeffs[i].clone())).collect();
                PiecewisePoly1D::new(breaks, pieces, -1).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn convolve_box_matches_quadrature(
            f in arb_pp(),
            a in -1.0f64..0.5,
            w in 0.05f64..1.5,
            xs in prop::collection::vec(-5.0f64..5.0, 160),
        ) {
            let b = a + w;
            let g = f.convolve_box(a, b).unwrap();
            let rule_breaks = f.breakpoints().to_vec();
            for x in xs {
                let lo = x - b;
                let hi = x - a;
                let rule = crate::quadrature::Rule1D::aligned(
                    &rule_breaks, lo, hi, crate::quadrature::QuadratureSpec::new(6, 1));
                let oracle = rule.integrate(|t| f.eval(t));
                prop_assert!((g.eval(x) - oracle).abs() <= 1e-9, "x={x}: {} vs {oracle}", g.eval(x));
            }
        }

        #[test]
        fn bspline_is_symmetric(n in 0usize..8, x in 0.0f64..5.0) {
            let b = bspline(n);
            // Right-continuity breaks symmetry only on the breakpoints themselves.
            prop_assume!(b.breakpoints().iter().all(|t| (t.abs() - x).abs() > 1e-9));
            prop_assert!((b.eval(x) - b.eval(-x)).abs() <= 1e-13);
        }

        #[test]
        fn linear_combination_is_pointwise(f in arb_pp(), g in arb_pp(), a in -3.0f64..3.0, x in -4.0f64..4.0) {
            let h = PiecewisePoly1D::linear_combination(&[(a, &f), (1.0, &g)]);
            prop_assert!((h.eval(x) - (a * f.eval(x) + g.eval(x))).abs() <= 1e-10);
        }
    }
}
