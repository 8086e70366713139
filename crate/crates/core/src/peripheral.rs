//! Peripheral spectrum of `R = R_{m0,m0}`.
//!
//! Every modulus-one eigenvalue is a `p_i`-th root of unity for the period
//! `p_i` of some `m0`-cycle `C_i`, so the candidate list comes straight from
//! the cycles. For each candidate `lambda` the eigenspace is the null space
//! of the window matrix minus `lambda`, and its distinguished basis
//! `h^lambda_{C_i}` (one per cycle with `lambda^{p_i} = 1`) is fixed by the
//! duality `nu_j^lambda(h^lambda_{C_i}) = delta_ij` against the point-mass
//! functionals
//!
//! ```text
//! nu_i^lambda(f) = (1/p_i) sum_k lambda^{k-1} f(z_{k,i}).
//! ```
//!
//! Since `h^lambda_{C_i} = sum_k lambda^{1-k} g_{k,i}`, the cycle functions
//! come back by an inverse DFT over the `p_i`-th roots of unity, and
//! `h_{C_i} = sum_k g_{k,i}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::lpoly::{gcd, CirclePoint, LaurentPoly, DEFAULT_GRID};
use crate::transfer::{random_poly, CesaroOptions, TransferOperator};

/// `e^{2 pi i num / den}` with `0 <= num < den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    pub num: i64,
    pub den: i64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: i64) -> Self {
        let p = CirclePoint::from_rational(num, den);
        let (num, den) = p.rational_angle.expect("rational");
        Self { num, den }
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn value(&self) -> Complex64 {
        CirclePoint::from_rational(self.num, self.den).value
    }

    /// Whether `self^p = 1`.
    pub fn divides_period(&self, p: usize) -> bool {
        (p as i64 * self.num) % self.den == 0
    }

    fn fraction(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e^(2 pi i {}/{})", self.num, self.den)
    }
}

impl Serialize for RootOfUnity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.num, self.den].serialize(s)
    }
}

/// The union over cycles of the `p_i`-th roots of unity, sorted by angle.
pub fn candidate_eigenvalues(cycles: &[Cycle]) -> Vec<RootOfUnity> {
    let mut out: Vec<RootOfUnity> = cycles
        .iter()
        .flat_map(|c| (0..c.period as i64).map(move |a| RootOfUnity::new(a, c.period as i64)))
        .collect();
    out.sort_by(|a, b| a.fraction().total_cmp(&b.fraction()));
    out.dedup();
    out
}

/// `nu^lambda(f) = (1/p) sum_k lambda^{k-1} f(z_k)` over the cycle.
pub fn nu_apply(cycle: &Cycle, lambda: Complex64, f: &LaurentPoly) -> Result<Complex64> {
    let p = cycle.period;
    if (lambda.powi(p as i32) - 1.0).norm() > 1e-10 {
        return Err(Error::EigenvalueMismatch {
            lambda: format!("{lambda}"),
            period: p,
        });
    }
    let mut weight = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for z in &cycle.points {
        acc += weight * f.eval(z);
        weight *= lambda;
    }
    Ok(acc / p as f64)
}

/// Basis of the null space of `window matrix - lambda I` as Laurent
/// polynomials on the window, orthonormal in coefficient space.
pub fn eigenspace(op: &TransferOperator, lambda: Complex64, rank_tol: f64) -> Vec<LaurentPoly> {
    let a = op.matrix();
    let shifted = a - DMatrix::<Complex64>::identity(a.nrows(), a.ncols()) * lambda;
    let scale = shifted.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    null_space(&shifted, rank_tol)
        .into_iter()
        .filter(|v| (&shifted * v).norm() <= rank_tol * scale * v.norm())
        .map(|v| op.from_window(&v))
        .collect()
}

/// Row reduction with complete pivoting; pivots below `rel_tol * max|entry|`
/// count as zero.
fn null_space(m: &DMatrix<Complex64>, rel_tol: f64) -> Vec<DVector<Complex64>> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    if scale > 0.0 {
        while rank < rows.min(cols) {
            let (mut pi, mut pj, mut best) = (rank, rank, 0.0);
            for i in rank..rows {
                for j in rank..cols {
                    let v = a[(i, j)].norm();
                    if v > best {
                        (pi, pj, best) = (i, j, v);
                    }
                }
            }
            if best <= rel_tol * scale {
                break;
            }
            a.swap_rows(rank, pi);
            a.swap_columns(rank, pj);
            perm.swap(rank, pj);
            let pivot = a[(rank, rank)];
            for i in rank + 1..rows {
                let factor = a[(i, rank)] / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in rank..cols {
                    let t = a[(rank, j)];
                    a[(i, j)] -= factor * t;
                }
            }
            rank += 1;
        }
    }

    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for free in rank..cols {
        // permuted unknowns y: y_free = 1, other free vars 0, back-substitute pivots
        let mut y = DVector::<Complex64>::zeros(cols);
        y[free] = Complex64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut s = a[(i, free)];
            for j in i + 1..rank {
                s += a[(i, j)] * y[j];
            }
            y[i] = -s / a[(i, i)];
        }
        let mut x = DVector::<Complex64>::zeros(cols);
        for (slot, &orig) in perm.iter().enumerate() {
            x[orig] = y[slot];
        }
        // modified Gram-Schmidt
        for b in &basis {
            let proj = b.dotc(&x);
            x.axpy(-proj, b, Complex64::new(1.0, 0.0));
        }
        let norm = x.norm();
        if norm > 0.0 {
            basis.push(x.unscale(norm));
        }
    }
    basis
}

/// Eigenfunctions for one peripheral eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenBlock {
    pub eigenvalue: RootOfUnity,
    /// Indices `i` with `lambda^{p_i} = 1`.
    pub cycle_indices: Vec<usize>,
    /// `h^lambda_{C_i}`, aligned with `cycle_indices`.
    pub functions: Vec<LaurentPoly>,
    pub eigenspace_dim: usize,
    /// Condition number of the `nu`-evaluation matrix on the orthonormal
    /// eigenspace basis.
    pub gram_condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumDiagnostics {
    pub nu_gram_condition: f64,
    pub residual_decay: f64,
    pub eigenspace_dims: Vec<(RootOfUnity, usize)>,
}

#[derive(Clone, Debug)]
pub struct PeripheralSpectrum {
    pub cycles: Vec<Cycle>,
    pub eigenvalues: Vec<RootOfUnity>,
    pub blocks: Vec<EigenBlock>,
    /// `g_funcs[i][k]` is `g_{k+1, C_{i+1}}`.
    pub g_funcs: Vec<Vec<LaurentPoly>>,
    pub h_funcs: Vec<LaurentPoly>,
    pub diagnostics: SpectrumDiagnostics,
}

impl PeripheralSpectrum {
    pub fn block(&self, lambda: &RootOfUnity) -> Option<&EigenBlock> {
        self.blocks.iter().find(|b| &b.eigenvalue == lambda)
    }

    /// `h^lambda_{C_i}`.
    pub fn h_lambda(&self, lambda: &RootOfUnity, cycle: usize) -> Option<&LaurentPoly> {
        let b = self.block(lambda)?;
        let pos = b.cycle_indices.iter().position(|&i| i == cycle)?;
        Some(&b.functions[pos])
    }

    /// `T_lambda f = sum_i nu_i^lambda(f) h^lambda_{C_i}`; zero when
    /// `lambda` is not peripheral.
    pub fn project(&self, lambda: &RootOfUnity, f: &LaurentPoly) -> LaurentPoly {
        let Some(b) = self.block(lambda) else {
            return LaurentPoly::zero();
        };
        let mut out = LaurentPoly::zero();
        for (&i, h) in b.cycle_indices.iter().zip(&b.functions) {
            let nu = nu_apply(&self.cycles[i], lambda.value(), f).expect("lambda^p_i = 1 in block");
            out = &out + &h.scale(nu);
        }
        out
    }

    /// Least common multiple of the cycle periods.
    pub fn period_lcm(&self) -> usize {
        self.cycles
            .iter()
            .fold(1i64, |acc, c| acc / gcd(acc, c.period as i64) * c.period as i64) as usize
    }

    pub fn eigenspace_dim(&self, lambda: &RootOfUnity) -> usize {
        self.block(lambda).map_or(0, |b| b.eigenspace_dim)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub rank_tol: f64,
    pub max_gram_condition: f64,
    pub decay_trials: usize,
    pub decay_iterations: usize,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            max_gram_condition: 1e8,
            decay_trials: 16,
            decay_iterations: 40,
            seed: 42,
        }
    }
}

pub fn build_spectrum(
    op: &TransferOperator,
    cycles: &[Cycle],
    opts: &SpectrumOptions,
) -> Result<PeripheralSpectrum> {
    op.require_unit_preserving()?;
    if cycles.is_empty() {
        return Err(Error::PreconditionFailed(
            "no cycles: m0(1) = sqrt(N) guarantees the trivial cycle".into(),
        ));
    }
    let eigenvalues = candidate_eigenvalues(cycles);
    let mut blocks = Vec::with_capacity(eigenvalues.len());
    for ev in &eigenvalues {
        let lambda = ev.value();
        let basis = eigenspace(op, lambda, opts.rank_tol);
        let members: Vec<usize> = cycles
            .iter()
            .enumerate()
            .filter(|(_, c)| ev.divides_period(c.period))
            .map(|(i, _)| i)
            .collect();
        if basis.len() != members.len() {
            return Err(Error::DimensionMismatch {
                lambda: ev.to_string(),
                found: basis.len(),
                expected: members.len(),
            });
        }
        let r = basis.len();
        let gram = DMatrix::from_fn(r, r, |j, l| {
            nu_apply(&cycles[members[j]], lambda, &basis[l]).expect("member cycle")
        });
        let sv = gram.clone().svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if cond > opts.max_gram_condition {
            return Err(Error::IllConditioned {
                lambda: ev.to_string(),
                cond,
            });
        }
        let inv = gram.try_inverse().ok_or_else(|| Error::IllConditioned {
            lambda: ev.to_string(),
            cond,
        })?;
        let functions = (0..r)
            .map(|i| {
                basis
                    .iter()
                    .enumerate()
                    .fold(LaurentPoly::zero(), |acc, (l, v)| &acc + &v.scale(inv[(l, i)]))
            })
            .collect();
        blocks.push(EigenBlock {
            eigenvalue: *ev,
            cycle_indices: members,
            functions,
            eigenspace_dim: r,
            gram_condition: cond,
        });
    }

    let mut spectrum = PeripheralSpectrum {
        cycles: cycles.to_vec(),
        diagnostics: SpectrumDiagnostics {
            nu_gram_condition: blocks.iter().map(|b| b.gram_condition).fold(1.0, f64::max),
            residual_decay: f64::NAN,
            eigenspace_dims: blocks.iter().map(|b| (b.eigenvalue, b.eigenspace_dim)).collect(),
        },
        eigenvalues,
        blocks,
        g_funcs: Vec::new(),
        h_funcs: Vec::new(),
    };

    // g_{k,i} = (1/p_i) sum_{lambda^{p_i} = 1} lambda^{k-1} h^lambda_{C_i}
    for (i, cycle) in cycles.iter().enumerate() {
        let p = cycle.period;
        let mut gs = Vec::with_capacity(p);
        for k in 0..p {
            let mut g = LaurentPoly::zero();
            for a in 0..p as i64 {
                let ev = RootOfUnity::new(a, p as i64);
                let h = spectrum
                    .h_lambda(&ev, i)
                    .expect("every p_i-th root of unity is a candidate");
                g = &g + &h.scale(ev.value().powi(k as i32));
            }
            gs.push(g.scale(1.0 / p as f64));
        }
        let h = gs.iter().fold(LaurentPoly::zero(), |acc, g| &acc + g);
        spectrum.g_funcs.push(gs);
        spectrum.h_funcs.push(h);
    }

    spectrum.diagnostics.residual_decay =
        op.estimate_residual_decay(&spectrum, opts.decay_trials, opts.decay_iterations, opts.seed);
    Ok(spectrum)
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// `alpha_i = h(z_{1,i})`.
    pub alphas: Vec<Complex64>,
    /// Largest deviation of `h` from `alpha_i` along each cycle.
    pub cycle_spread: f64,
    /// Sup-grid `|h - sum_i alpha_i h_{C_i}|`.
    pub residual: f64,
}

const FIXED_POINT_TOL: f64 = 1e-8;

fn require_fixed(op: &TransferOperator, h: &LaurentPoly) -> Result<()> {
    let residual = op.apply(h).sup_distance(h, DEFAULT_GRID);
    if residual > FIXED_POINT_TOL {
        return Err(Error::NotAFixedPoint { residual });
    }
    Ok(())
}

/// Writes a fixed point as `h = sum_i alpha_i h_{C_i}` with `alpha_i` the
/// value of `h` on the cycle `C_i`.
pub fn decompose_fixed_point(
    op: &TransferOperator,
    spectrum: &PeripheralSpectrum,
    h: &LaurentPoly,
) -> Result<Decomposition> {
    require_fixed(op, h)?;
    let mut alphas = Vec::with_capacity(spectrum.cycles.len());
    let mut spread: f64 = 0.0;
    for (i, cycle) in spectrum.cycles.iter().enumerate() {
        let alpha = h.eval(&cycle.points[0]);
        let s = cycle
            .points
            .iter()
            .map(|z| (h.eval(z) - alpha).norm())
            .fold(0.0, f64::max);
        if s > FIXED_POINT_TOL {
            return Err(Error::NotCycleConstant { cycle: i, spread: s });
        }
        spread = spread.max(s);
        alphas.push(alpha);
    }
    let recon = spectrum
        .h_funcs
        .iter()
        .zip(&alphas)
        .fold(LaurentPoly::zero(), |acc, (hc, &a)| &acc + &hc.scale(a));
    Ok(Decomposition {
        residual: h.sup_distance(&recon, DEFAULT_GRID),
        alphas,
        cycle_spread: spread,
    })
}

pub const PRODUCT_MAX_ITER: usize = 8192;

/// The product `h1 * h2 = lim_n R^n(h1 h2)` on fixed points of `R`.
pub fn transfer_product(op: &TransferOperator, h1: &LaurentPoly, h2: &LaurentPoly) -> Result<LaurentPoly> {
    op.require_unit_preserving()?;
    require_fixed(op, h1)?;
    require_fixed(op, h2)?;
    let mut f = h1 * h2;
    let mut residual = f64::INFINITY;
    for _ in 0..PRODUCT_MAX_ITER {
        let next = op.apply(&f);
        residual = next.sup_distance(&f, DEFAULT_GRID);
        f = next;
        if residual <= 1e-9 {
            return Ok(f);
        }
    }
    Err(Error::NotConverged {
        iterations: PRODUCT_MAX_ITER,
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleSummary {
    pub period: usize,
    pub points: Vec<CirclePoint>,
    pub phases: Vec<f64>,
    pub theta_c: f64,
    pub is_trivial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawtonCohenReport {
    pub cohen_holds: bool,
    pub lawton_holds: bool,
    pub equivalent: bool,
    pub peripheral_eigenvalues: Vec<RootOfUnity>,
    pub cycles: Vec<CycleSummary>,
}

pub fn lawton_cohen_report(spectrum: &PeripheralSpectrum) -> LawtonCohenReport {
    let cohen_holds = crate::cycles::cohen_holds(&spectrum.cycles);
    let lawton_holds = spectrum.eigenspace_dim(&RootOfUnity::one()) == 1;
    LawtonCohenReport {
        cohen_holds,
        lawton_holds,
        equivalent: cohen_holds == lawton_holds,
        peripheral_eigenvalues: spectrum.eigenvalues.clone(),
        cycles: spectrum
            .cycles
            .iter()
            .map(|c| CycleSummary {
                period: c.period,
                points: c.points.clone(),
                phases: c.phases.clone(),
                theta_c: c.theta_c,
                is_trivial: c.is_trivial,
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, max_residual: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            threshold,
            passed: max_residual.is_finite() && max_residual <= threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub grid: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            trials: 16,
            seed: 42,
        }
    }
}

pub const CHECK_CYCLE_SHIFT: &str = "R g_k = g_(k+1)";
pub const CHECK_POINT_VALUES: &str = "g_k,i(z_l,j) = delta";
pub const CHECK_H_SUPPORT: &str = "h_C nonnegative and zero off its cycle";
pub const CHECK_PROJECTION: &str = "T_lambda f = sum nu(f) h^lambda";
pub const CHECK_NU_EQUIVARIANCE: &str = "nu(R f) = lambda nu(f)";
pub const CHECK_PARTITION: &str = "sum_i h_C_i = 1";

pub fn verify_spectrum(
    op: &TransferOperator,
    spectrum: &PeripheralSpectrum,
    opts: &VerifyOptions,
) -> VerificationReport {
    let cycles = &spectrum.cycles;
    let mut checks = Vec::new();

    // (a) R g_{k,i} = g_{k+1,i}
    let mut shift: f64 = 0.0;
    for gs in &spectrum.g_funcs {
        let p = gs.len();
        for k in 0..p {
            shift = shift.max(op.apply(&gs[k]).coeff_distance(&gs[(k + 1) % p]));
        }
    }
    checks.push(Check::new(CHECK_CYCLE_SHIFT, shift, 1e-10));

    // (b) g_{k,i}(z_{l,j}) = delta_ij delta_kl
    let mut point: f64 = 0.0;
    for (i, gs) in spectrum.g_funcs.iter().enumerate() {
        for (k, g) in gs.iter().enumerate() {
            for (j, cj) in cycles.iter().enumerate() {
                for (l, z) in cj.points.iter().enumerate() {
                    let target = if i == j && k == l { 1.0 } else { 0.0 };
                    point = point.max((g.eval(z) - Complex64::new(target, 0.0)).norm());
                }
            }
        }
    }
    checks.push(Check::new(CHECK_POINT_VALUES, point, 1e-9));

    // (c) h_{C_i} >= 0 on the grid, 0 on other cycles
    let mut support: f64 = 0.0;
    for (i, h) in spectrum.h_funcs.iter().enumerate() {
        support = support.max(-h.min_real_on_grid(opts.grid));
        for (j, cj) in cycles.iter().enumerate() {
            if i != j {
                for z in &cj.points {
                    support = support.max(h.eval(z).norm());
                }
            }
        }
    }
    checks.push(Check::new(CHECK_H_SUPPORT, support.max(0.0), 1e-8));

    // (d), (e) on seeded random window polynomials
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = op.window();
    let copts = CesaroOptions {
        grid: opts.grid,
        period: spectrum.period_lcm(),
        ..CesaroOptions::default()
    };
    let mut projection: f64 = 0.0;
    let mut equivariance: f64 = 0.0;
    for _ in 0..opts.trials {
        let f = random_poly(&mut rng, -d, d);
        let rf = op.apply(&f);
        for ev in &spectrum.eigenvalues {
            let lambda = ev.value();
            let formula = spectrum.project(ev, &f);
            projection = match op.cesaro_project(&f, lambda, &copts) {
                Ok(t) => projection.max(t.projection.sup_distance(&formula, opts.grid)),
                Err(_) => f64::INFINITY,
            };
            for (i, c) in cycles.iter().enumerate() {
                if !ev.divides_period(c.period) {
                    continue;
                }
                let lhs = nu_apply(&cycles[i], lambda, &rf).expect("member");
                let rhs = lambda * nu_apply(&cycles[i], lambda, &f).expect("member");
                equivariance = equivariance.max((lhs - rhs).norm());
            }
        }
    }
    checks.push(Check::new(CHECK_PROJECTION, projection, 1e-6));
    checks.push(Check::new(CHECK_NU_EQUIVARIANCE, equivariance, 1e-10));

    // (f) partition of unity
    let total = spectrum
        .h_funcs
        .iter()
        .fold(LaurentPoly::zero(), |acc, h| &acc + h);
    let partition = total.sup_distance(&LaurentPoly::constant(1.0), opts.grid);
    checks.push(Check::new(CHECK_PARTITION, partition, 1e-8));

    let all_passed = checks.iter().all(|c| c.passed);
    VerificationReport { checks, all_passed }
}

/// `{lambda -> [h^lambda_{C_i}]}` keyed for reporting, e.g. `h^1/2_C2`.
pub fn named_eigenfunctions(spectrum: &PeripheralSpectrum) -> BTreeMap<String, LaurentPoly> {
    let mut out = BTreeMap::new();
    for (i, h) in spectrum.h_funcs.iter().enumerate() {
        out.insert(format!("h_C{}", i + 1), h.clone());
    }
    for (i, gs) in spectrum.g_funcs.iter().enumerate() {
        for (k, g) in gs.iter().enumerate() {
            out.insert(format!("g_{}_C{}", k + 1, i + 1), g.clone());
        }
    }
    for b in &spectrum.blocks {
        for (&i, h) in b.cycle_indices.iter().zip(&b.functions) {
            out.insert(
                format!("h^{}/{}_C{}", b.eigenvalue.num, b.eigenvalue.den, i + 1),
                h.clone(),
            );
        }
    }
    out
}
