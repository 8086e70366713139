//! Laurent (trigonometric) polynomials on the unit circle.
//!
//! A [`LaurentPoly`] is a finite map from integer degree to complex
//! coefficient, `p(z) = sum_k c_k z^k`. On the circle `z = e^{it}` this is a
//! trigonometric polynomial, which is the representation used for filters,
//! eigenfunctions and correlation sequences throughout the crate.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus at or below this are dropped.
pub const SUPPORT_EPS: f64 = 1e-14;

/// Default number of uniform grid points for sup-norm and positivity checks.
pub const DEFAULT_GRID: usize = 1024;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(degree: i64, c: impl Into<Complex64>) -> Self {
        Self::from_pairs([(degree, c.into())])
    }

    /// Builds `sum_j coeffs[j] z^{offset + j}`.
    pub fn from_coeffs(offset: i64, coeffs: &[Complex64]) -> Self {
        Self::from_pairs(
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (offset + j as i64, c)),
        )
    }

    pub fn from_real(offset: i64, coeffs: &[f64]) -> Self {
        Self::from_pairs(
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (offset + j as i64, Complex64::new(c, 0.0))),
        )
    }

    /// Accumulates `(degree, coefficient)` pairs; repeated degrees are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, c| c.norm() > SUPPORT_EPS);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs
            .get(&k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn degree_min(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree_max(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `(degree_min, degree_max)`, or `None` for the zero polynomial.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((self.degree_min()?, self.degree_max()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Dense coefficients from `lo` to `hi` inclusive.
    pub fn dense(&self, lo: i64, hi: i64) -> Vec<Complex64> {
        (lo..=hi).map(|k| self.coeff(k)).collect()
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self::from_pairs(self.iter().map(|(k, c)| (k, c * s)))
    }

    /// Maps `sum c_k z^k` to `sum conj(c_k) z^{-k}`; on the circle this is
    /// pointwise conjugation.
    pub fn conj_reflect(&self) -> Self {
        Self::from_pairs(self.iter().map(|(k, c)| (-k, c.conj())))
    }

    /// `p(z^n)`.
    pub fn dilate(&self, n: i64) -> Self {
        Self::from_pairs(self.iter().map(|(k, c)| (k * n, c)))
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference against `other`.
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        (self - other).max_abs_coeff()
    }

    /// Lipschitz constant of `t -> p(e^{it})` bounded by `sum |k| |c_k|`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.iter().map(|(k, c)| k.unsigned_abs() as f64 * c.norm()).sum()
    }

    pub fn eval(&self, z: &CirclePoint) -> Complex64 {
        self.eval_at(z.value)
    }

    pub fn eval_angle(&self, t: f64) -> Complex64 {
        self.eval_at(Complex64::from_polar(1.0, t))
    }

    /// Sparse Horner evaluation, split at degree zero: the nonnegative part
    /// runs in `z`, the negative part in `1/z`.
    pub fn eval_at(&self, z: Complex64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let mut pos = zero;
        let mut prev: Option<i64> = None;
        for (&k, &c) in self.coeffs.range(0..).rev() {
            if let Some(p) = prev {
                pos *= z.powi((p - k) as i32);
            }
            pos += c;
            prev = Some(k);
        }
        if let Some(p) = prev {
            pos *= z.powi(p as i32);
        }

        let w = z.inv();
        let mut neg = zero;
        let mut prev: Option<i64> = None;
        for (&k, &c) in self.coeffs.range(..0) {
            if let Some(p) = prev {
                neg *= w.powi((k - p) as i32);
            }
            neg += c;
            prev = Some(k);
        }
        if let Some(p) = prev {
            neg *= w.powi((-p) as i32);
        }
        pos + neg
    }

    /// Values at `t_j = 2 pi j / n`, `j = 0..n`.
    pub fn sample_grid(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| self.eval_angle(TAU * j as f64 / n as f64))
            .collect()
    }

    pub fn sup_norm(&self, grid: usize) -> f64 {
        self.sample_grid(grid)
            .into_iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Self, grid: usize) -> f64 {
        (self - other).sup_norm(grid)
    }

    /// Minimum of the real part over the grid.
    pub fn min_real_on_grid(&self, grid: usize) -> f64 {
        self.sample_grid(grid)
            .into_iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_pairs(self.iter().chain(rhs.iter()))
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_pairs(self.iter().chain(rhs.iter().map(|(k, c)| (k, -c))))
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(-1.0)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (i, a) in self.iter() {
            for (j, b) in rhs.iter() {
                *out.entry(i + j).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        LaurentPoly::from_pairs(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Serialized as `{"offset": k0, "coeffs": [[re, im], ...]}` covering the
/// tight support.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoeffTable {
    pub offset: i64,
    pub coeffs: Vec<Complex64>,
}

impl From<&LaurentPoly> for CoeffTable {
    fn from(p: &LaurentPoly) -> Self {
        match p.support() {
            Some((lo, hi)) => CoeffTable {
                offset: lo,
                coeffs: p.dense(lo, hi),
            },
            None => CoeffTable {
                offset: 0,
                coeffs: Vec::new(),
            },
        }
    }
}

impl From<&CoeffTable> for LaurentPoly {
    fn from(t: &CoeffTable) -> Self {
        LaurentPoly::from_coeffs(t.offset, &t.coeffs)
    }
}

/// `c_j = sum_k conj(p_k) q_{k+j}`: the coefficients of `conj(p) q` on the circle.
pub fn cross_correlation(p: &LaurentPoly, q: &LaurentPoly) -> LaurentPoly {
    &p.conj_reflect() * q
}

/// `f(rho z)`: coefficient `k` is multiplied by `rho^k`.
pub fn rotate(p: &LaurentPoly, rho: &CirclePoint) -> LaurentPoly {
    LaurentPoly::from_pairs(p.iter().map(|(k, c)| (k, c * rho.pow(k).value)))
}

/// Integral against normalized Haar measure on the circle.
pub fn haar_integral(p: &LaurentPoly) -> Complex64 {
    p.coeff(0)
}

/// A point on the unit circle, optionally carrying an exact rational angle
/// `2 pi a / b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub value: Complex64,
    /// Radians in `[0, 2 pi)`.
    pub angle: f64,
    pub rational_angle: Option<(i64, i64)>,
}

impl CirclePoint {
    pub fn one() -> Self {
        Self::from_rational(0, 1)
    }

    pub fn from_angle(t: f64) -> Self {
        let angle = t.rem_euclid(TAU);
        let angle = if angle >= TAU { 0.0 } else { angle };
        Self {
            value: Complex64::from_polar(1.0, angle),
            angle,
            rational_angle: None,
        }
    }

    /// Projects a nonzero complex number radially onto the circle.
    pub fn from_complex(z: Complex64) -> Self {
        Self::from_angle(z.arg())
    }

    /// `e^{2 pi i a / b}` with the fraction reduced to lowest terms and
    /// `a` in `[0, b)`.
    pub fn from_rational(a: i64, b: i64) -> Self {
        assert!(b > 0, "denominator must be positive");
        let a = a.rem_euclid(b);
        let g = gcd(a, b).max(1);
        let (a, b) = (a / g, b / g);
        let angle = TAU * a as f64 / b as f64;
        let value = match (a, b) {
            (0, _) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, angle),
        };
        Self {
            value,
            angle,
            rational_angle: Some((a, b)),
        }
    }

    pub fn conj(&self) -> Self {
        match self.rational_angle {
            Some((a, b)) => Self::from_rational(-a, b),
            None => Self::from_angle(-self.angle),
        }
    }

    /// `z^n`, exact in the rational representation when available.
    pub fn pow(&self, n: i64) -> Self {
        match self.rational_angle {
            Some((a, b)) => {
                let a = ((a as i128 * n as i128).rem_euclid(b as i128)) as i64;
                Self::from_rational(a, b)
            }
            None => {
                if n == 0 {
                    return Self::one();
                }
                Self::from_angle(self.angle * n as f64)
            }
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.value - other.value).norm()
    }
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Options for [`unit_circle_roots`].
#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    /// Accept roots with `| |r| - 1 | <= tol`; also the snapping tolerance in radians.
    pub tol: f64,
    /// Largest denominator considered when snapping to a rational angle.
    pub snap_den_max: i64,
    /// Roots closer than this are treated as one root with multiplicity.
    pub cluster_radius: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            snap_den_max: (1 << 20) - 1,
            cluster_radius: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitRoot {
    pub point: CirclePoint,
    pub multiplicity: usize,
}

/// Roots of `p` lying on the unit circle, sorted by angle.
///
/// `z^{-degree_min} p` is turned into an ordinary polynomial whose companion
/// matrix eigenvalues are the candidate roots. Eigenvalues within
/// `cluster_radius` are merged into one root of that multiplicity and the
/// centroid is polished by Newton's method on the `(m-1)`-th derivative,
/// where the root is simple.
pub fn unit_circle_roots(p: &LaurentPoly, opts: &RootOptions) -> Result<Vec<UnitRoot>> {
    let (lo, hi) = p
        .support()
        .ok_or_else(|| Error::DegenerateInput("zero polynomial has no isolated roots".into()))?;
    // ascending ordinary coefficients a_0..a_n
    let poly: Vec<Complex64> = p.dense(lo, hi);
    let n = poly.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[n];
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -poly[i] / lead;
    }
    let eig = nalgebra::linalg::Schur::new(companion)
        .eigenvalues()
        .ok_or_else(|| Error::DegenerateInput("companion matrix Schur form did not converge".into()))?;
    let eig: Vec<Complex64> = eig.iter().copied().collect();

    let clusters = cluster(&eig, opts.cluster_radius);
    let mut roots = Vec::new();
    for members in clusters {
        let m = members.len();
        let centroid = members.iter().map(|&i| eig[i]).sum::<Complex64>() / m as f64;
        let r = polish(&poly, m - 1, centroid);
        if (r.norm() - 1.0).abs() > opts.tol {
            continue;
        }
        let mut point = CirclePoint::from_complex(r);
        if let Some((a, b)) = snap_angle(point.angle, opts.tol, opts.snap_den_max) {
            point = CirclePoint::from_rational(a, b);
        }
        roots.push(UnitRoot {
            point,
            multiplicity: m,
        });
    }
    roots.sort_by(|a, b| a.point.angle.total_cmp(&b.point.angle));
    Ok(roots)
}

fn cluster(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn derivative(poly: &[Complex64]) -> Vec<Complex64> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

fn horner(poly: &[Complex64], z: Complex64) -> Complex64 {
    poly.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn polish(poly: &[Complex64], order: usize, start: Complex64) -> Complex64 {
    let mut f = poly.to_vec();
    for _ in 0..order {
        f = derivative(&f);
    }
    let df = derivative(&f);
    if df.is_empty() {
        return start;
    }
    let mut z = start;
    let mut last_step = f64::INFINITY;
    for _ in 0..50 {
        let d = horner(&df, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = horner(&f, z) / d;
        // stop once Newton stops contracting
        if !(step.norm() < last_step) {
            break;
        }
        z -= step;
        last_step = step.norm();
        if last_step <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Smallest-denominator fraction `a/b` with `|2 pi a / b - angle| <= tol`
/// and `b <= den_max`.
pub fn snap_angle(angle: f64, tol: f64, den_max: i64) -> Option<(i64, i64)> {
    let x = angle.rem_euclid(TAU) / TAU;
    let eps = tol / TAU;
    let (lo, hi) = (x - eps, x + eps);
    if lo <= 0.0 || hi >= 1.0 {
        return Some((0, 1));
    }
    let (a, b) = simplest_between(lo, hi, 0)?;
    (b <= den_max).then_some((a, b))
}

/// Simplest rational in `[lo, hi]` for `0 < lo <= hi`, by continued fractions.
fn simplest_between(lo: f64, hi: f64, depth: u32) -> Option<(i64, i64)> {
    if depth > 64 || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    let fl = lo.floor();
    if fl == lo {
        return Some((fl as i64, 1));
    }
    if fl + 1.0 <= hi {
        return Some((fl as i64 + 1, 1));
    }
    let (p, q) = simplest_between(1.0 / (hi - fl), 1.0 / (lo - fl), depth + 1)?;
    let num = (fl as i64).checked_mul(p)?.checked_add(q)?;
    Some((num, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn haar() -> LaurentPoly {
        LaurentPoly::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
    }

    fn stretched() -> LaurentPoly {
        LaurentPoly::from_real(0, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
    }

    #[test]
    fn eval_examples() {
        assert!((haar().eval(&CirclePoint::one()) - c(SQRT_2)).norm() < 1e-15);
        assert!(haar().eval(&CirclePoint::from_rational(1, 2)).norm() < 1e-15);
        let z = CirclePoint::from_rational(1, 3);
        assert!((stretched().eval(&z) - c(SQRT_2)).norm() < 1e-14);
    }

    #[test]
    fn eval_negative_degrees() {
        let p = LaurentPoly::from_pairs([(-3, c(2.0)), (-1, c(1.0)), (2, c(0.5))]);
        let z = Complex64::from_polar(1.0, 0.7);
        let direct = 2.0 * z.powi(-3) + z.powi(-1) + 0.5 * z.powi(2);
        assert!((p.eval_at(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn zero_support_is_empty() {
        let p = LaurentPoly::from_pairs([(3, c(1e-16)), (-2, c(0.0))]);
        assert!(p.is_zero());
        assert_eq!(p.support(), None);
    }

    #[test]
    fn cross_correlation_examples() {
        let cc = cross_correlation(&haar(), &haar());
        assert_eq!(cc.support(), Some((-1, 1)));
        assert!((cc.coeff(-1) - c(0.5)).norm() < 1e-15);
        assert!((cc.coeff(0) - c(1.0)).norm() < 1e-15);
        assert!((cc.coeff(1) - c(0.5)).norm() < 1e-15);

        let cc = cross_correlation(&stretched(), &stretched());
        assert_eq!(cc.len(), 3);
        assert!((cc.coeff(-3) - c(0.5)).norm() < 1e-15);
        assert!((cc.coeff(3) - c(0.5)).norm() < 1e-15);

        let k = LaurentPoly::constant(3f64.sqrt());
        let cc = cross_correlation(&k, &k);
        assert_eq!(cc.len(), 1);
        assert!((cc.coeff(0) - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn rotate_examples() {
        let rho = CirclePoint::from_angle(0.3);
        let z = LaurentPoly::monomial(1, 1.0);
        assert!((rotate(&z, &rho).coeff(1) - rho.value).norm() < 1e-15);
        assert_eq!(rotate(&LaurentPoly::constant(1.0), &rho), LaurentPoly::constant(1.0));
        let r = rotate(&stretched(), &CirclePoint::from_rational(1, 3));
        assert!(r.coeff_distance(&stretched()) < 1e-15);
    }

    #[test]
    fn haar_integral_examples() {
        assert_eq!(haar_integral(&LaurentPoly::constant(1.0)), c(1.0));
        let p = LaurentPoly::from_real(-1, &[1.0, 0.0, 1.0]);
        assert_eq!(haar_integral(&p), c(0.0));
        let h = LaurentPoly::from_real(-2, &[1.0, 2.0, 3.0, 2.0, 1.0]).scale(1.0 / 9.0);
        assert!((haar_integral(&h) - c(1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn roots_of_haar_defect() {
        // |m0|^2 - 2 = (z + 1/z - 2)/2 = (z-1)^2 / (2z)
        let p = &cross_correlation(&haar(), &haar()) - &LaurentPoly::constant(2.0);
        let roots = unit_circle_roots(&p, &RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert_eq!(roots[0].point.rational_angle, Some((0, 1)));
    }

    #[test]
    fn roots_of_linear() {
        let p = LaurentPoly::from_real(0, &[-1.0, 1.0]);
        let roots = unit_circle_roots(&p, &RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 1);
        assert!((roots[0].point.value - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_stretched_defect() {
        let p = &cross_correlation(&stretched(), &stretched()) - &LaurentPoly::constant(2.0);
        let roots = unit_circle_roots(&p, &RootOptions::default()).unwrap();
        let angles: Vec<_> = roots.iter().map(|r| r.point.rational_angle).collect();
        assert_eq!(angles, vec![Some((0, 1)), Some((1, 3)), Some((2, 3))]);
        assert!(roots.iter().all(|r| r.multiplicity == 2));
    }

    #[test]
    fn roots_reject_zero_polynomial() {
        let err = unit_circle_roots(&LaurentPoly::zero(), &RootOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
    }

    #[test]
    fn roots_skip_off_circle() {
        // (z - 2)(z - 1/2) has no roots on the circle
        let p = LaurentPoly::from_real(0, &[1.0, -2.5, 1.0]);
        assert!(unit_circle_roots(&p, &RootOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_angle(TAU / 3.0, 1e-10, 100), Some((1, 3)));
        assert_eq!(snap_angle(TAU * 5.0 / 7.0 + 1e-12, 1e-10, 100), Some((5, 7)));
        assert_eq!(snap_angle(1.0, 1e-12, 1000), None);
        assert_eq!(snap_angle(TAU - 1e-12, 1e-10, 10), Some((0, 1)));
    }

    #[test]
    fn circle_point_pow_is_exact_for_rationals() {
        let z = CirclePoint::from_rational(1, 3);
        assert_eq!(z.pow(2).rational_angle, Some((2, 3)));
        assert_eq!(z.pow(4).rational_angle, Some((1, 3)));
        assert_eq!(z.pow(3).rational_angle, Some((0, 1)));
        assert_eq!(z.conj().rational_angle, Some((2, 3)));
    }
}
