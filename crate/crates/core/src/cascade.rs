//! Wavelet-side oracles for the cycle functions.
//!
//! The cascade operator `M_a psi = sqrt(N) sum_n a_n psi(N x - n)` acts
//! exactly on functions that are piecewise constant on an `N`-adic grid, and
//! on such functions the Riemann sums for the correlation coefficients are
//! exact. Hence `autocorrelation_h(M_a psi) = R(autocorrelation_h(psi))` with
//! no discretisation error, and the cascade limit reproduces `h_{C_1}` to the
//! accuracy of `R^L` convergence alone.
//!
//! The frequency side evaluates the infinite products
//! `prod_j e^{-i theta_C} m0^{(p)}(z_k e^{-i x / N^{jp}}) / sqrt(N^p)`,
//! whose periodised squared moduli are the `g_{k,C}` up to rotation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::cycles::{cycle_phase, find_cycles, iterated_filter, Cycle, CycleOptions};
use crate::error::{Error, Result};
use crate::filterlib::{FilterSpec, DEFAULT_QMF_TOL};
use crate::lpoly::{rotate, LaurentPoly};
use crate::peripheral::PeripheralSpectrum;

/// Uniformly sampled function on the line. Sample `i` is the value on
/// `[origin + i step, origin + (i + 1) step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub samples: Vec<Complex64>,
    pub origin: f64,
    pub step: f64,
    pub support_hint: (f64, f64),
}

impl GridFunction {
    pub fn new(samples: Vec<Complex64>, origin: f64, step: f64) -> Result<Self> {
        if samples.is_empty() || !(step > 0.0) || !origin.is_finite() {
            return Err(Error::GridMismatch(format!(
                "need at least one sample and a positive step (len {}, step {step})",
                samples.len()
            )));
        }
        let hi = origin + samples.len() as f64 * step;
        Ok(Self {
            samples,
            origin,
            step,
            support_hint: (origin, hi),
        })
    }

    /// `sum_n c_n chi_[n, n+1)` for `c = coeffs` starting at `n = offset`.
    pub fn unit_boxes(offset: i64, coeffs: &[Complex64]) -> Result<Self> {
        Self::new(coeffs.to_vec(), offset as f64, 1.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    /// Integral of the piecewise constant function.
    pub fn integral(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() * self.step
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.step).sqrt()
    }

    /// Value at `x`, zero off the sampled range.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let pos = ((x - self.origin) / self.step).floor();
        if pos < 0.0 || pos >= self.samples.len() as f64 {
            return Complex64::new(0.0, 0.0);
        }
        self.samples[pos as usize]
    }

    /// Rows `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (i, z) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.x(i), z.re, z.im);
        }
        out
    }

    /// `(level, first_index)` with `step = N^{-level}` and
    /// `origin = first_index * step`.
    fn lattice(&self, scale: u32) -> Result<(u32, i64)> {
        let n = scale as f64;
        let level = (-self.step.ln() / n.ln()).round();
        if !(0.0..=60.0).contains(&level) {
            return Err(Error::GridMismatch(format!(
                "step {} is not a nonpositive power of {scale}",
                self.step
            )));
        }
        let level = level as u32;
        let exact = n.powi(-(level as i32));
        if (self.step - exact).abs() > 1e-12 * exact {
            return Err(Error::GridMismatch(format!(
                "step {} is not a power of 1/{scale}",
                self.step
            )));
        }
        let first = self.origin / exact;
        if (first - first.round()).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "origin {} is not on the {scale}-adic lattice of step {exact}",
                self.origin
            )));
        }
        Ok((level, first.round() as i64))
    }

    /// Each sample repeated `factor` times on a grid `factor` times finer.
    fn refine(&self, factor: usize) -> Vec<Complex64> {
        self.samples
            .iter()
            .flat_map(|&z| std::iter::repeat_n(z, factor))
            .collect()
    }

    /// L2 distance to `other` when `other` lives on a grid `factor` times
    /// finer with the same lattice.
    fn l2_distance_to_refined(&self, other: &GridFunction, factor: usize) -> f64 {
        let fine = self.refine(factor);
        let shift = ((self.origin - other.origin) / other.step).round() as i64;
        let lo = shift.min(0);
        let hi = (shift + fine.len() as i64).max(other.len() as i64);
        let mut acc = 0.0;
        for i in lo..hi {
            let a = usize::try_from(i - shift)
                .ok()
                .and_then(|j| fine.get(j))
                .copied()
                .unwrap_or_default();
            let b = usize::try_from(i)
                .ok()
                .and_then(|j| other.samples.get(j))
                .copied()
                .unwrap_or_default();
            acc += (a - b).norm_sqr();
        }
        (acc * other.step).sqrt()
    }
}

/// One application of `M_a`; the output grid is `N` times finer.
pub fn cascade_step(a: &FilterSpec, psi: &GridFunction) -> Result<GridFunction> {
    let (level, first) = psi.lattice(a.scale)?;
    let Some((amin, amax)) = a.m0.support() else {
        return Err(Error::DegenerateInput("zero filter".into()));
    };
    let stride = (a.scale as i64)
        .checked_pow(level)
        .ok_or_else(|| Error::GridMismatch(format!("level {level} overflows")))?;
    let len = psi.len() as i64;
    let new_first = first + amin * stride;
    let new_last = first + len - 1 + amax * stride;
    let root_n = a.sqrt_n();
    let taps: Vec<(i64, Complex64)> = a.m0.iter().map(|(n, c)| (n * stride, c * root_n)).collect();
    let samples = (new_first..=new_last)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(shift, c) in &taps {
                let j = i - shift - first;
                if (0..len).contains(&j) {
                    acc += c * psi.samples[j as usize];
                }
            }
            acc
        })
        .collect();
    let step = psi.step / a.scale as f64;
    GridFunction::new(samples, new_first as f64 * step, step)
}

#[derive(Clone, Debug)]
pub struct CascadeResult {
    pub phi: GridFunction,
    /// L2 distance between successive iterates, one per step.
    pub distances: Vec<f64>,
}

impl CascadeResult {
    pub fn final_distance(&self) -> f64 {
        self.distances.last().copied().unwrap_or(f64::NAN)
    }

    /// Whether the last four recorded distances strictly decrease.
    pub fn tail_monotone(&self) -> bool {
        let n = self.distances.len();
        n >= 4 && self.distances[n - 4..].windows(2).all(|w| w[1] < w[0])
    }
}

/// Unit-integral start whose autocorrelation vanishes on every nontrivial
/// cycle of `a`: `sum_n c_n chi_[n,n+1)` with
/// `c(z) = prod_w (z - w) / (1 - w)` over the nontrivial cycle points. With
/// no nontrivial cycles this is the unit box `chi_[0,1)`.
pub fn default_start(a: &FilterSpec) -> GridFunction {
    let mut c = LaurentPoly::constant(1.0);
    if a.require_valid().is_ok() {
        if let Ok(cycles) = find_cycles(a, &CycleOptions::default()) {
            for z in cycles.iter().filter(|c| !c.is_trivial).flat_map(|c| &c.points) {
                let w = z.value;
                let factor = &LaurentPoly::monomial(1, 1.0) - &LaurentPoly::constant(w);
                c = (&c * &factor).scale(1.0 / (1.0 - w));
            }
        }
    }
    let (lo, hi) = c.support().unwrap_or((0, 0));
    GridFunction::unit_boxes(lo, &c.dense(lo, hi)).expect("nonempty")
}

/// Runs `n_iter` cascade steps from `start`, or from [`default_start`].
pub fn cascade_fixed_point(
    a: &FilterSpec,
    n_iter: usize,
    start: Option<GridFunction>,
) -> Result<CascadeResult> {
    let mut psi = match start {
        Some(s) => s,
        None => default_start(a),
    };
    let mut distances = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let next = cascade_step(a, &psi)?;
        distances.push(psi.l2_distance_to_refined(&next, a.scale as usize));
        psi = next;
    }
    if let Some((amin, amax)) = a.m0.support() {
        let n1 = (a.scale - 1) as f64;
        psi.support_hint = (amin as f64 / n1, amax as f64 / n1);
    }
    Ok(CascadeResult { phi: psi, distances })
}

/// Grid level giving a step of at most `2^-12`: 12 levels for `N = 2`,
/// `N^-8` for `N = 3`.
pub fn default_levels(scale: u32) -> usize {
    let mut level = 0;
    let mut width = 1u64;
    while width < 4096 {
        width = width.saturating_mul(scale as u64);
        level += 1;
    }
    level
}

/// `sum_n A_n z^n` with `A_n = integral conj(phi(x)) phi(x + n) dx`.
///
/// Requires an integer number of grid cells per unit length.
pub fn autocorrelation_h(phi: &GridFunction) -> Result<LaurentPoly> {
    let cells = (1.0 / phi.step).round();
    if cells < 1.0 || (cells * phi.step - 1.0).abs() > 1e-9 {
        return Err(Error::GridMismatch(format!(
            "step {} does not divide the integers",
            phi.step
        )));
    }
    let cells = cells as usize;
    let len = phi.len();
    let width = len.div_ceil(cells) as i64;
    let mut pairs = Vec::new();
    for n in -width..=width {
        let shift = n * cells as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..len as i64 {
            let j = i + shift;
            if (0..len as i64).contains(&j) {
                acc += phi.samples[i as usize].conj() * phi.samples[j as usize];
            }
        }
        pairs.push((n, acc * phi.step));
    }
    Ok(LaurentPoly::from_pairs(pairs))
}

/// The normalised, rotated filter
/// `e^{-i theta_C} m0^{(p)}(z_k w) / sqrt(N^p)` (unnormalised, as a
/// `FilterSpec` at scale `N^p`) whose trivial-cycle theory yields `g_{k,C}`.
pub fn cycle_filter(m0: &FilterSpec, cycle: &Cycle, k: usize) -> Result<FilterSpec> {
    let p = cycle.period;
    let big = (m0.scale as u64)
        .checked_pow(p as u32)
        .filter(|&b| b <= u32::MAX as u64)
        .ok_or_else(|| Error::InvalidParam(format!("N^p too large for period {p}")))?;
    let mp = iterated_filter(&m0.m0, m0.scale, p);
    let rotated = rotate(&mp, &cycle.points[k]).scale(cycle_phase(cycle));
    FilterSpec::new(format!("{}_cycle_p{}_k{}", m0.name, p, k), big as u32, rotated)?
        .validate(DEFAULT_QMF_TOL)
}

/// Truncated infinite product with its tail bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhiValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Reusable evaluator of `phi_{k, m0, C}`.
#[derive(Clone, Debug)]
pub struct PhiProduct {
    factor: LaurentPoly,
    big: f64,
    lipschitz: f64,
}

impl PhiProduct {
    pub fn new(m0: &FilterSpec, cycle: &Cycle, k: usize) -> Self {
        let p = cycle.period;
        let big = (m0.scale as f64).powi(p as i32);
        let mp = iterated_filter(&m0.m0, m0.scale, p);
        let factor = rotate(&mp, &cycle.points[k]).scale(cycle_phase(cycle) / big.sqrt());
        let lipschitz = factor.lipschitz_bound();
        Self { factor, big, lipschitz }
    }

    /// `prod_{j=1}^{terms} factor(e^{-i x / big^j})`. Each factor differs
    /// from 1 by at most `L |x| / big^j`, which bounds the remaining tail.
    pub fn eval(&self, x: f64, terms: usize) -> PhiValue {
        let mut value = Complex64::new(1.0, 0.0);
        let mut y = x;
        for _ in 0..terms {
            y /= self.big;
            value *= self.factor.eval_angle(-y);
        }
        let eps = self.lipschitz * x.abs() * self.big.powi(-(terms as i32)) / (self.big - 1.0);
        PhiValue {
            value,
            tail_bound: value.norm() * eps.exp_m1(),
        }
    }
}

/// `phi_{k,m0,C}(x)` truncated after `terms` factors. `k` indexes
/// `cycle.points` from zero.
pub fn phi_product(m0: &FilterSpec, cycle: &Cycle, k: usize, x: f64, terms: usize) -> PhiValue {
    PhiProduct::new(m0, cycle, k).eval(x, terms)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub cycle: usize,
    pub k: usize,
    pub angle: f64,
    pub periodized: Complex64,
    pub expected: Complex64,
    pub discrepancy: f64,
    pub tail_bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeDomainResult {
    pub cycle: usize,
    pub k: usize,
    pub levels: usize,
    pub cascade_distance: f64,
    pub max_coeff_discrepancy: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CrosscheckReport {
    pub probes: Vec<ProbeResult>,
    pub time_domain: Vec<TimeDomainResult>,
}

impl CrosscheckReport {
    pub fn all_within_bounds(&self) -> bool {
        self.probes.iter().all(|p| p.within_bound)
    }

    pub fn max_time_domain_discrepancy(&self) -> f64 {
        self.time_domain
            .iter()
            .map(|t| t.max_coeff_discrepancy)
            .fold(0.0, f64::max)
    }
}

/// Compares `sum_{|j| <= k_per} |phi_k(t_k - t + 2 pi j)|^2` with
/// `g_{k,i}(e^{it})` at every probe angle and every point of cycle `i`.
///
/// The periodisation tail is estimated as
/// `2 C / (2 pi (2 pi k_per - |x_0|))` with `C = max |phi|^2 x^2` over the
/// outer half of the summed range; the product truncation adds
/// `2 |phi| b + b^2` per term.
pub fn crosscheck_h(
    m0: &FilterSpec,
    cycle_index: usize,
    spectrum: &PeripheralSpectrum,
    terms: usize,
    k_per: usize,
    probe_angles: &[f64],
) -> Vec<ProbeResult> {
    let cycle = &spectrum.cycles[cycle_index];
    let mut out = Vec::new();
    for k in 0..cycle.period {
        let phi = PhiProduct::new(m0, cycle, k);
        let g = &spectrum.g_funcs[cycle_index][k];
        for &t in probe_angles {
            let x0 = (cycle.points[k].angle - t).rem_euclid(2.0 * PI);
            let x0 = if x0 > PI { x0 - 2.0 * PI } else { x0 };
            let mut sum = 0.0;
            let mut truncation = 0.0;
            let mut c_est: f64 = 0.0;
            for j in -(k_per as i64)..=k_per as i64 {
                let x = x0 + 2.0 * PI * j as f64;
                let v = phi.eval(x, terms);
                let m2 = v.value.norm_sqr();
                sum += m2;
                truncation += 2.0 * v.value.norm() * v.tail_bound + v.tail_bound * v.tail_bound;
                if 2 * j.unsigned_abs() as usize > k_per {
                    c_est = c_est.max(m2 * x * x);
                }
            }
            let per_tail = 2.0 * c_est / (2.0 * PI * (2.0 * PI * k_per as f64 - x0.abs()));
            let expected = g.eval_angle(t);
            let periodized = Complex64::new(sum, 0.0);
            let discrepancy = (periodized - expected).norm();
            let tail_bound = per_tail + truncation;
            out.push(ProbeResult {
                cycle: cycle_index,
                k,
                angle: t,
                periodized,
                expected,
                discrepancy,
                tail_bound,
                within_bound: discrepancy <= tail_bound + 1e-12,
            });
        }
    }
    out
}

/// `g_{k,i}` recovered from the cascade of the rotated cycle filter,
/// compared coefficientwise with the spectrum. For the trivial cycle this
/// is the autocorrelation of the scaling function against `h_{C_1}`'s
/// partner `g_{1,1}`.
pub fn time_domain_crosscheck(
    m0: &FilterSpec,
    cycle_index: usize,
    spectrum: &PeripheralSpectrum,
) -> Result<Vec<TimeDomainResult>> {
    let cycle = &spectrum.cycles[cycle_index];
    let mut out = Vec::new();
    for k in 0..cycle.period {
        let filter = if cycle.is_trivial {
            m0.clone()
        } else {
            cycle_filter(m0, cycle, k)?
        };
        let levels = default_levels(filter.scale);
        let cascade = cascade_fixed_point(&filter, levels, None)?;
        let h = autocorrelation_h(&cascade.phi)?;
        let g = rotate(&h, &cycle.points[k].conj());
        out.push(TimeDomainResult {
            cycle: cycle_index,
            k,
            levels,
            cascade_distance: cascade.final_distance(),
            max_coeff_discrepancy: g.coeff_distance(&spectrum.g_funcs[cycle_index][k]),
        });
    }
    Ok(out)
}

/// Frequency and time-domain checks for every cycle.
pub fn crosscheck_all(
    m0: &FilterSpec,
    spectrum: &PeripheralSpectrum,
    terms: usize,
    k_per: usize,
    probe_angles: &[f64],
) -> Result<CrosscheckReport> {
    let mut report = CrosscheckReport::default();
    for i in 0..spectrum.cycles.len() {
        report
            .probes
            .extend(crosscheck_h(m0, i, spectrum, terms, k_per, probe_angles));
        report.time_domain.extend(time_domain_crosscheck(m0, i, spectrum)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterlib::builtin;
    use crate::peripheral::{build_spectrum, SpectrumOptions};
    use crate::transfer::TransferOperator;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spectrum_for(f: &FilterSpec) -> PeripheralSpectrum {
        let cycles = find_cycles(f, &CycleOptions::default()).unwrap();
        let op = TransferOperator::for_filter(f).unwrap();
        build_spectrum(&op, &cycles, &SpectrumOptions::default()).unwrap()
    }

    fn box_fn(width: i64) -> GridFunction {
        GridFunction::unit_boxes(0, &vec![c(1.0 / width as f64); width as usize]).unwrap()
    }

    fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
        // compare on the finer of the two grids by point sampling
        let (fine, coarse) = if a.step <= b.step { (a, b) } else { (b, a) };
        let mut worst: f64 = 0.0;
        for i in 0..fine.len() {
            let x = fine.x(i) + 0.5 * fine.step;
            worst = worst.max((fine.samples[i] - coarse.value_at(x)).norm());
        }
        worst
    }

    #[test]
    fn haar_box_is_fixed() {
        let haar = builtin("haar", None).unwrap();
        let b = box_fn(1);
        let next = cascade_step(&haar, &b).unwrap();
        assert_eq!(next.step, 0.5);
        assert!(max_diff(&next, &b) < 1e-15);
        let r = cascade_fixed_point(&haar, 12, None).unwrap();
        assert!(max_diff(&r.phi, &b) < 1e-12);
        assert!(r.distances.iter().all(|&d| d < 1e-12));
        assert_eq!(r.phi.support_hint, (0.0, 1.0));
    }

    #[test]
    fn stretched_box_is_fixed() {
        let s = builtin("stretched_haar", Some(3)).unwrap();
        let b = box_fn(3);
        assert!(max_diff(&cascade_step(&s, &b).unwrap(), &b) < 1e-15);
        let r = cascade_fixed_point(&s, 12, None).unwrap();
        assert!(max_diff(&r.phi, &b) < 1e-12, "default start is the width-3 box");
        assert_eq!(r.phi.support_hint, (0.0, 3.0));
    }

    #[test]
    fn unnormalised_filter_scales_the_integral() {
        let a = FilterSpec::new("x", 2, LaurentPoly::from_real(0, &[1.0, 2.0])).unwrap();
        let b = box_fn(1);
        let next = cascade_step(&a, &b).unwrap();
        let ratio = next.integral() / b.integral();
        assert!((ratio - c(3.0 / 2f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn grid_mismatch() {
        let haar = builtin("haar", None).unwrap();
        let g = GridFunction::new(vec![c(1.0)], 0.0, 1.0 / 3.0).unwrap();
        assert!(matches!(cascade_step(&haar, &g), Err(Error::GridMismatch(_))));
        let g = GridFunction::new(vec![c(1.0)], 0.3, 0.5).unwrap();
        assert!(matches!(cascade_step(&haar, &g), Err(Error::GridMismatch(_))));
        assert!(GridFunction::new(vec![], 0.0, 1.0).is_err());
    }

    #[test]
    fn daubechies_cascade_converges() {
        let d4 = builtin("daubechies4", None).unwrap();
        let r = cascade_fixed_point(&d4, 16, None).unwrap();
        assert!(r.final_distance() < 1e-4, "{:?}", r.distances);
        assert!(r.tail_monotone(), "{:?}", r.distances);
        assert!((r.phi.integral() - c(1.0)).norm() < 1e-10);
        // support [0, 3]
        let outside = r
            .phi
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = r.phi.x(*i);
                x < 0.0 || x >= 3.0
            })
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(outside < 1e-12);
    }

    #[test]
    fn autocorrelation_examples() {
        let h = autocorrelation_h(&box_fn(1)).unwrap();
        assert!(h.coeff_distance(&LaurentPoly::constant(1.0)) < 1e-15);
        let h = autocorrelation_h(&box_fn(3)).unwrap();
        let tri = LaurentPoly::from_real(-2, &[1.0, 2.0, 3.0, 2.0, 1.0]).scale(1.0 / 9.0);
        assert!(h.coeff_distance(&tri) < 1e-15);
        let zero = GridFunction::new(vec![c(0.0); 8], 0.0, 0.125).unwrap();
        assert!(autocorrelation_h(&zero).unwrap().is_zero());
    }

    #[test]
    fn phi_product_examples() {
        let haar = builtin("haar", None).unwrap();
        let s = spectrum_for(&haar);
        let triv = &s.cycles[0];
        for terms in [1, 5, 30] {
            assert!((phi_product(&haar, triv, 0, 0.0, terms).value - c(1.0)).norm() < 1e-15);
        }
        let v = phi_product(&haar, triv, 0, PI, 30);
        assert!((v.value - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-8);

        let sh = builtin("stretched_haar", Some(3)).unwrap();
        let s = spectrum_for(&sh);
        for cyc in &s.cycles {
            for k in 0..cyc.period {
                for terms in [1, 7] {
                    let v = phi_product(&sh, cyc, k, 0.0, terms);
                    assert!((v.value.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn truncation_consistency() {
        let d4 = builtin("daubechies4", None).unwrap();
        let s = spectrum_for(&d4);
        let phi = PhiProduct::new(&d4, &s.cycles[0], 0);
        for &x in &[0.3, 2.0, 17.0, 400.0] {
            for terms in [3, 8, 20] {
                let a = phi.eval(x, terms);
                let b = phi.eval(x, terms + 1);
                assert!((a.value - b.value).norm() <= a.tail_bound + 1e-15);
            }
        }
    }

    #[test]
    fn haar_periodization() {
        let haar = builtin("haar", None).unwrap();
        let s = spectrum_for(&haar);
        let probes = crosscheck_h(&haar, 0, &s, 30, 2000, &[0.1, 1.0, 2.5]);
        for p in &probes {
            assert!(p.discrepancy < 2e-3, "{p:?}");
            assert!(p.within_bound, "{p:?}");
        }
    }

    #[test]
    fn stretched_haar_crosschecks() {
        let sh = builtin("stretched_haar", Some(3)).unwrap();
        let s = spectrum_for(&sh);
        let report = crosscheck_all(&sh, &s, 30, 2000, &[0.1, 1.0, 2.5]).unwrap();
        assert!(report.all_within_bounds(), "{:?}", report.probes);
        assert_eq!(report.time_domain.len(), 3);
        assert!(report.max_time_domain_discrepancy() < 1e-4, "{:?}", report.time_domain);
    }

    #[test]
    fn cascade_bridge_intertwines_with_r() {
        // p(M psi, M psi) = R p(psi, psi) exactly on N-adic grids
        let d4 = builtin("daubechies4", None).unwrap();
        let op = TransferOperator::for_filter(&d4).unwrap();
        let psi = GridFunction::unit_boxes(0, &[c(0.2), c(-0.7), c(1.1)]).unwrap();
        let mut cur = psi;
        for _ in 0..3 {
            let next = cascade_step(&d4, &cur).unwrap();
            let lhs = autocorrelation_h(&next).unwrap();
            let rhs = op.apply(&autocorrelation_h(&cur).unwrap());
            assert!(lhs.coeff_distance(&rhs) < 1e-12);
            cur = next;
        }
    }

    #[test]
    fn csv_rows() {
        let csv = box_fn(2).to_csv();
        assert_eq!(csv, "x,re,im\n0,0.5,0\n1,0.5,0\n");
    }

    #[test]
    fn levels() {
        assert_eq!(default_levels(2), 12);
        assert_eq!(default_levels(3), 8);
        assert_eq!(default_levels(4), 6);
    }
}
