//! The transfer (Ruelle, wavelet-Galerkin) operator
//!
//! ```text
//! R f(z) = (1/N) sum_{w^N = z} conj(m0(w)) m0'(w) f(w)
//! ```
//!
//! acting on Laurent polynomials. Writing `c_j` for the coefficients of
//! `conj(m0) m0'`, averaging `w^l` over the `N` preimages of `z` gives
//! `z^{l/N}` when `N | l` and zero otherwise, so
//!
//! ```text
//! (R f)_m = sum_k c_{N m - k} f_k
//! ```
//!
//! exactly. With `G = max(|deg_min c|, deg_max c)` and `d >= ceil(G / (N-1))`
//! the degree window `[-d, d]` is invariant, and `R` restricted to it is the
//! finite matrix `A[m, k] = c_{N m - k}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filterlib::FilterSpec;
use crate::lpoly::{cross_correlation, LaurentPoly, DEFAULT_GRID};
use crate::peripheral::PeripheralSpectrum;

#[derive(Clone, Debug)]
pub struct TransferOperator {
    scale: u32,
    m0: LaurentPoly,
    m0prime: LaurentPoly,
    corr: LaurentPoly,
    d_star: i64,
    d: i64,
    matrix: DMatrix<Complex64>,
    unit_preserving: bool,
}

impl TransferOperator {
    pub fn build(m0: &FilterSpec, m0prime: &FilterSpec, d: Option<i64>) -> Result<Self> {
        if m0.scale != m0prime.scale {
            return Err(Error::ScaleMismatch(m0.scale, m0prime.scale));
        }
        Self::from_polys(m0.scale, &m0.m0, &m0prime.m0, d)
    }

    /// `R_{m0,m0}` for a single filter on the default window.
    pub fn for_filter(filter: &FilterSpec) -> Result<Self> {
        Self::build(filter, filter, None)
    }

    pub fn from_polys(
        scale: u32,
        m0: &LaurentPoly,
        m0prime: &LaurentPoly,
        d: Option<i64>,
    ) -> Result<Self> {
        if scale < 2 {
            return Err(Error::InvalidParam(format!("scale must be >= 2, got {scale}")));
        }
        let corr = cross_correlation(m0, m0prime);
        let g = corr
            .support()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .unwrap_or(0);
        let n1 = scale as i64 - 1;
        let d_star = (g + n1 - 1) / n1;
        let d = match d {
            Some(d) if d < d_star => return Err(Error::WindowTooSmall { d, d_star }),
            Some(d) => d,
            None => d_star,
        };
        let matrix = window_matrix(&corr, scale as i64, d);
        let unit_preserving = {
            let n = scale as i64;
            let (lo, hi) = corr.support().unwrap_or((0, 0));
            (lo.div_euclid(n)..=hi.div_euclid(n) + 1).all(|m| {
                let target = if m == 0 { 1.0 } else { 0.0 };
                (corr.coeff(n * m) - Complex64::new(target, 0.0)).norm() <= 1e-10
            })
        };
        Ok(Self {
            scale,
            m0: m0.clone(),
            m0prime: m0prime.clone(),
            corr,
            d_star,
            d,
            matrix,
            unit_preserving,
        })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn m0(&self) -> &LaurentPoly {
        &self.m0
    }

    pub fn m0prime(&self) -> &LaurentPoly {
        &self.m0prime
    }

    pub fn corr(&self) -> &LaurentPoly {
        &self.corr
    }

    pub fn d_star(&self) -> i64 {
        self.d_star
    }

    pub fn window(&self) -> i64 {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Whether `R 1 = 1`, i.e. `c_{N m} = delta_{m,0}`.
    pub fn is_unit_preserving(&self) -> bool {
        self.unit_preserving
    }

    pub(crate) fn require_unit_preserving(&self) -> Result<()> {
        if self.unit_preserving {
            Ok(())
        } else {
            Err(Error::PreconditionFailed(
                "operator does not satisfy R1 = 1 (filter is not a QMF)".into(),
            ))
        }
    }

    pub fn apply(&self, f: &LaurentPoly) -> LaurentPoly {
        let n = self.scale as i64;
        let mut out = Vec::with_capacity(f.len() * self.corr.len() / n as usize + 1);
        for (k, fk) in f.iter() {
            for (j, cj) in self.corr.iter() {
                let l = j + k;
                if l.rem_euclid(n) == 0 {
                    out.push((l / n, cj * fk));
                }
            }
        }
        LaurentPoly::from_pairs(out)
    }

    pub fn iterate(&self, f: &LaurentPoly, n: usize) -> LaurentPoly {
        let mut g = f.clone();
        for _ in 0..n {
            g = self.apply(&g);
        }
        g
    }

    /// Half-width of a window that is invariant and contains `f`.
    pub(crate) fn window_for(&self, f: &LaurentPoly) -> i64 {
        match f.support() {
            Some((lo, hi)) => self.d.max(lo.abs()).max(hi.abs()),
            None => self.d,
        }
    }

    pub(crate) fn matrix_for(&self, d: i64) -> DMatrix<Complex64> {
        if d == self.d {
            self.matrix.clone()
        } else {
            window_matrix(&self.corr, self.scale as i64, d)
        }
    }

    /// Coefficient vector over degrees `-d..=d`; `f` must fit.
    pub fn to_window(&self, f: &LaurentPoly, d: i64) -> DVector<Complex64> {
        debug_assert!(f.support().is_none_or(|(lo, hi)| lo >= -d && hi <= d));
        DVector::from_iterator((2 * d + 1) as usize, (-d..=d).map(|k| f.coeff(k)))
    }

    pub fn from_window(&self, v: &DVector<Complex64>) -> LaurentPoly {
        let d = (v.len() as i64 - 1) / 2;
        LaurentPoly::from_coeffs(-d, v.as_slice())
    }

    /// Cesàro projection onto the `lambda`-eigenspace,
    /// `T_lambda f = lim (1/n) sum_{k=1..n} lambda^{-k} R^k f`.
    ///
    /// Averages are taken at `n = period * 2^j`. With `period` a multiple of
    /// every peripheral period, `A_n = T f + Q / n + O(rho^n)`, so by default
    /// the Richardson combination `2 A_{2n} - A_n` is used as the estimate;
    /// convergence is declared when two successive estimates agree to `tol`
    /// in sup norm on the grid.
    pub fn cesaro_project(
        &self,
        f: &LaurentPoly,
        lambda: Complex64,
        opts: &CesaroOptions,
    ) -> Result<CesaroProjection> {
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!("|lambda| = {} is not 1", lambda.norm())));
        }
        self.require_unit_preserving()?;
        if f.is_zero() {
            return Ok(CesaroProjection {
                projection: LaurentPoly::zero(),
                iterations: 0,
                converged: true,
                distance: 0.0,
                eigen_residual: 0.0,
            });
        }
        let d = self.window_for(f);
        let a = self.matrix_for(d);
        let grid = GridEvaluator::new(d, opts.grid);
        let inv = lambda.inv();

        let mut power = self.to_window(f, d);
        let mut weight = Complex64::new(1.0, 0.0);
        let mut sum = DVector::<Complex64>::zeros(power.len());
        let mut k = 0usize;
        let mut advance = |target: usize, sum: &mut DVector<Complex64>| {
            while k < target {
                power = &a * &power;
                weight *= inv;
                sum.axpy(weight, &power, Complex64::new(1.0, 0.0));
                k += 1;
            }
        };

        let mut n = opts.period.max(1);
        advance(n, &mut sum);
        let mut prev_avg = sum.unscale(n as f64);
        let mut prev_est: Option<DVector<Complex64>> = if opts.extrapolate {
            None
        } else {
            Some(prev_avg.clone())
        };
        let mut distance = f64::INFINITY;
        let mut converged = false;
        while 2 * n <= opts.n_max {
            n *= 2;
            advance(n, &mut sum);
            let avg = sum.unscale(n as f64);
            let est = if opts.extrapolate {
                avg.scale(2.0) - &prev_avg
            } else {
                avg.clone()
            };
            if let Some(prev) = &prev_est {
                distance = grid.sup(&(&est - prev));
                if distance <= opts.tol {
                    prev_est = Some(est);
                    converged = true;
                    break;
                }
            }
            prev_avg = avg;
            prev_est = Some(est);
        }
        let est = prev_est.unwrap_or(prev_avg);
        let eigen_residual = grid.sup(&(&a * &est - est.scale(1.0) * lambda));
        Ok(CesaroProjection {
            projection: self.from_window(&est),
            iterations: n,
            converged,
            distance,
            eigen_residual,
        })
    }

    /// Smallest value of `R^n(|xi|^2 h) h - |R^n(xi h)|^2` on a uniform grid.
    pub fn schwarz_slack(
        &self,
        xi: &LaurentPoly,
        h: &LaurentPoly,
        n: usize,
        grid: usize,
    ) -> Result<f64> {
        self.require_unit_preserving()?;
        let hmin = h.min_real_on_grid(grid);
        if hmin < -1e-10 {
            return Err(Error::NegativeWeight { min: hmin });
        }
        let lhs = self.iterate(&(xi * h), n);
        let rhs = &self.iterate(&(&cross_correlation(xi, xi) * h), n) * h;
        let l = lhs.sample_grid(grid);
        let r = rhs.sample_grid(grid);
        Ok(l.iter()
            .zip(&r)
            .map(|(l, r)| r.re - l.norm_sqr())
            .fold(f64::INFINITY, f64::min))
    }

    /// `|R^n(xi h)|^2 <= R^n(|xi|^2 h) h` everywhere on the grid, up to `1e-9`.
    pub fn schwarz_check(
        &self,
        xi: &LaurentPoly,
        h: &LaurentPoly,
        n: usize,
        grid: usize,
    ) -> Result<bool> {
        Ok(self.schwarz_slack(xi, h, n, grid)? >= -1e-9)
    }

    /// Largest tail ratio `|r_n| / |r_{n-1}|` of the non-peripheral remainder
    /// `r_n = R^n f - sum_lambda lambda^n T_lambda f` over seeded random window
    /// polynomials. A value below one means the peripheral part accounts for
    /// all modulus-one spectrum.
    pub fn estimate_residual_decay(
        &self,
        spectrum: &PeripheralSpectrum,
        trials: usize,
        n: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.d;
        let tail_start = n / 2;
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let f = random_poly(&mut rng, -d, d);
            let scale = f.max_abs_coeff();
            let parts: Vec<(Complex64, LaurentPoly)> = spectrum
                .eigenvalues
                .iter()
                .map(|ev| (ev.value(), spectrum.project(ev, &f)))
                .collect();
            let mut power = self.to_window(&f, d);
            let mut prev_norm = f64::NAN;
            for k in 0..=n {
                if k > 0 {
                    power = &self.matrix * &power;
                }
                let mut resid = self.from_window(&power);
                for (lambda, t) in &parts {
                    resid = &resid - &t.scale(lambda.powi(k as i32));
                }
                let norm = resid.max_abs_coeff();
                if k > tail_start && prev_norm > 1e-11 * scale {
                    worst = worst.max(norm / prev_norm);
                }
                prev_norm = norm;
            }
        }
        worst
    }
}

fn window_matrix(corr: &LaurentPoly, n: i64, d: i64) -> DMatrix<Complex64> {
    let size = (2 * d + 1) as usize;
    DMatrix::from_fn(size, size, |r, c| {
        let m = r as i64 - d;
        let k = c as i64 - d;
        corr.coeff(n * m - k)
    })
}

/// Uniformly random complex coefficients in `[-1, 1]^2` on degrees `lo..=hi`.
pub fn random_poly(rng: &mut impl Rng, lo: i64, hi: i64) -> LaurentPoly {
    LaurentPoly::from_pairs((lo..=hi).map(|k| {
        (
            k,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
    }))
}

/// Evaluates window vectors on a uniform grid.
pub(crate) struct GridEvaluator {
    basis: DMatrix<Complex64>,
}

impl GridEvaluator {
    pub(crate) fn new(d: i64, grid: usize) -> Self {
        let width = (2 * d + 1) as usize;
        let basis = DMatrix::from_fn(grid, width, |j, c| {
            let t = std::f64::consts::TAU * j as f64 / grid as f64;
            Complex64::from_polar(1.0, t * (c as i64 - d) as f64)
        });
        Self { basis }
    }

    pub(crate) fn sup(&self, v: &DVector<Complex64>) -> f64 {
        (&self.basis * v).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CesaroOptions {
    pub n_max: usize,
    pub tol: f64,
    pub grid: usize,
    /// A common multiple of the peripheral periods; averages are taken at
    /// multiples of it.
    pub period: usize,
    /// Richardson-extrapolate the `1/n` term away.
    pub extrapolate: bool,
}

impl Default for CesaroOptions {
    fn default() -> Self {
        Self {
            n_max: 4096,
            tol: 1e-8,
            grid: DEFAULT_GRID,
            period: 1,
            extrapolate: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CesaroProjection {
    pub projection: LaurentPoly,
    /// Largest `n` used.
    pub iterations: usize,
    pub converged: bool,
    /// Sup-grid distance between the last two estimates.
    pub distance: f64,
    /// Sup-grid `|R P - lambda P|` of the returned projection.
    pub eigen_residual: f64,
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::filterlib::builtin;
    use proptest::prelude::*;

    fn ops() -> Vec<TransferOperator> {
        ["haar", "daubechies4"]
            .iter()
            .map(|n| builtin(n, None).unwrap())
            .chain([builtin("stretched_haar", Some(3)).unwrap()])
            .map(|f| TransferOperator::for_filter(&f).unwrap())
            .collect()
    }

    proptest! {
        #[test]
        fn matrix_matches_apply(seed in any::<u64>(), which in 0usize..3) {
            let op = &ops()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = op.window();
            let f = random_poly(&mut rng, -d, d);
            let via_matrix = op.from_window(&(op.matrix() * op.to_window(&f, d)));
            prop_assert!(via_matrix.coeff_distance(&op.apply(&f)) < 1e-14);
        }

        #[test]
        fn positivity_preserving(seed in any::<u64>(), which in 0usize..3) {
            let op = &ops()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = random_poly(&mut rng, -2, 2);
            // |xi|^2 >= 0 everywhere
            let f = cross_correlation(&xi, &xi);
            prop_assert!(op.apply(&f).min_real_on_grid(1024) >= -1e-10);
        }

        #[test]
        fn unit_is_fixed(which in 0usize..3) {
            let op = &ops()[which];
            let one = LaurentPoly::constant(1.0);
            prop_assert!(op.apply(&one).coeff_distance(&one) < 1e-15);
        }

        #[test]
        fn schwarz_holds_for_stretched_haar(seed in any::<u64>(), n in 1usize..=5) {
            let op = &ops()[2];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xi = random_poly(&mut rng, 0, 3);
            prop_assert!(op.schwarz_check(&xi, &LaurentPoly::constant(1.0), n, 1024).unwrap());
        }
    }
}
