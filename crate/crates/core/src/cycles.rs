//! Detection of `m0`-cycles: finite orbits `z_1 -> z_1^N -> ... -> z_1` on
//! the circle along which `|m0(z_k)| = sqrt(N)`.
//!
//! For a quadrature-mirror filter `|m0|^2 <= N` on the circle, so cycle
//! points are double roots of the Laurent polynomial `|m0|^2 - N`. Roots are
//! found first and then grouped into orbits of `z -> z^N`. A periodic point
//! of period `p` is a root of unity `e^{2 pi i a / (N^p - 1)}`, so orbits are
//! followed in exact rational arithmetic after snapping.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filterlib::FilterSpec;
use crate::lpoly::{cross_correlation, gcd, unit_circle_roots, CirclePoint, LaurentPoly, RootOptions};

/// Snapping tolerance (radians) for candidate periodic points.
const SNAP_TOL: f64 = 1e-10;
/// Periodic points with `N^p` up to this are scanned for near-cycles.
const NEAR_SCAN_LIMIT: u128 = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    /// `z_1, ..., z_p` with `z_k^N = z_{k+1}` and `z_p^N = z_1`.
    pub points: Vec<CirclePoint>,
    pub period: usize,
    /// `theta_k` with `m0(z_k) = sqrt(N) e^{i theta_k}`.
    pub phases: Vec<f64>,
    pub theta_c: f64,
    pub is_trivial: bool,
}

impl Cycle {
    fn from_orbit(filter: &FilterSpec, orbit: Vec<CirclePoint>) -> Self {
        let sqrt_n = filter.sqrt_n();
        let phases: Vec<f64> = orbit
            .iter()
            .map(|z| (filter.m0.eval(z) / sqrt_n).arg())
            .collect();
        let is_trivial = orbit.len() == 1 && orbit[0].rational_angle == Some((0, 1));
        Cycle {
            period: orbit.len(),
            theta_c: phases.iter().sum(),
            phases,
            points: orbit,
            is_trivial,
        }
    }

    pub fn contains(&self, z: &CirclePoint) -> bool {
        self.points.iter().any(|p| p.distance(z) <= 1e-10)
    }

    /// Largest `| |m0(z_k)| - sqrt(N) |` along the cycle.
    pub fn modulus_defect(&self, filter: &FilterSpec) -> f64 {
        self.points
            .iter()
            .map(|z| (filter.m0.eval(z).norm() - filter.sqrt_n()).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|z_k^N - z_{k+1}|`.
    pub fn closure_defect(&self, scale: u32) -> f64 {
        let p = self.points.len();
        (0..p)
            .map(|k| {
                let next = &self.points[(k + 1) % p];
                (self.points[k].value.powu(scale) - next.value).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Orbit of `z` under `z -> z^N` if it returns to `z` within `p_max` steps;
/// returns the minimal period and the orbit starting at `z`.
pub fn orbit_closure(z: &CirclePoint, scale: u32, p_max: usize) -> Option<(usize, Vec<CirclePoint>)> {
    let mut orbit = vec![*z];
    match z.rational_angle {
        Some((a0, b)) => {
            let (a0, b, n) = (a0 as u128, b as u128, scale as u128);
            let mut a = a0;
            for p in 1..=p_max {
                a = (a * n) % b;
                if a == a0 {
                    return Some((p, orbit));
                }
                orbit.push(CirclePoint::from_rational(a as i64, b as i64));
            }
            None
        }
        None => {
            let mut w = *z;
            for p in 1..=p_max {
                w = CirclePoint::from_angle(w.angle * scale as f64);
                if w.distance(z) <= 1e-10 {
                    return Some((p, orbit));
                }
                orbit.push(w);
            }
            None
        }
    }
}

/// Largest `p` with `N^p <= 2^20`.
pub fn default_p_max(scale: u32) -> usize {
    let mut p = 0;
    let mut acc: u128 = 1;
    while acc * scale as u128 <= 1 << 20 {
        acc *= scale as u128;
        p += 1;
    }
    p.max(1)
}

#[derive(Clone, Copy, Debug)]
pub struct CycleOptions {
    /// Tolerance on `| |m0(z_k)| - sqrt(N) |`.
    pub cycle_tol: f64,
    pub p_max: Option<usize>,
    /// Unit-circle tolerance for the root finder.
    pub root_tol: f64,
    /// Threshold for the near-cycle report.
    pub near_tol: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            cycle_tol: 1e-8,
            p_max: None,
            root_tol: 1e-8,
            near_tol: 1e-3,
        }
    }
}

/// A periodic orbit along which `|m0|` comes within `near_tol` of `sqrt(N)`
/// without being a cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearCycle {
    pub points: Vec<CirclePoint>,
    pub period: usize,
    pub max_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleSearch {
    pub cycles: Vec<Cycle>,
    pub near_cycles: Vec<NearCycle>,
    /// Roots of `|m0|^2 - N` on the circle that belong to no cycle.
    pub non_cycle_roots: Vec<CirclePoint>,
    pub p_max: usize,
}

pub fn find_cycles(filter: &FilterSpec, opts: &CycleOptions) -> Result<Vec<Cycle>> {
    Ok(search_cycles(filter, opts)?.cycles)
}

pub fn search_cycles(filter: &FilterSpec, opts: &CycleOptions) -> Result<CycleSearch> {
    filter.require_valid()?;
    let scale = filter.scale;
    let p_max = opts.p_max.unwrap_or_else(|| default_p_max(scale));
    let defect = |z: &CirclePoint| (filter.m0.eval(z).norm() - filter.sqrt_n()).abs();

    let poly = &cross_correlation(&filter.m0, &filter.m0) - &LaurentPoly::constant(scale as f64);
    let root_opts = RootOptions {
        tol: opts.root_tol,
        snap_den_max: (scale as i64).saturating_pow(p_max as u32).saturating_sub(1),
        ..RootOptions::default()
    };
    let roots = if poly.is_zero() {
        Vec::new()
    } else {
        unit_circle_roots(&poly, &root_opts)?
    };

    let mut cycles: Vec<Cycle> = Vec::new();
    let mut seen: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut non_cycle_roots = Vec::new();

    for root in &roots {
        let candidates = periodic_candidates(root.point.angle, scale, p_max);
        let mut found = false;
        for cand in candidates {
            let key = cand.rational_angle.expect("snapped");
            if seen.contains(&key) {
                found = true;
                break;
            }
            let Some((_, orbit)) = orbit_closure(&cand, scale, p_max) else {
                continue;
            };
            if orbit.iter().all(|z| defect(z) <= opts.cycle_tol) {
                for z in &orbit {
                    seen.insert(z.rational_angle.expect("rational orbit"));
                }
                cycles.push(Cycle::from_orbit(filter, canonical_order(orbit)));
                found = true;
                break;
            }
        }
        if found {
            continue;
        }
        // Not periodic through roots. If the image is nearly a root the
        // tolerances are inconsistent with the filter.
        let image = root.point.pow(scale as i64);
        let img_defect = defect(&image);
        if img_defect > opts.cycle_tol && img_defect <= opts.near_tol {
            let orbit: Vec<f64> = (0..p_max.min(8))
                .scan(root.point, |z, _| {
                    let cur = *z;
                    *z = z.pow(scale as i64);
                    Some(cur.angle)
                })
                .collect();
            return Err(Error::OrbitEscape {
                angle: root.point.angle,
                orbit,
            });
        }
        non_cycle_roots.push(root.point);
    }

    // 1 is a root whenever m0(1) = sqrt(N); make sure float noise in the root
    // finder cannot drop it.
    if !seen.contains(&(0, 1)) && defect(&CirclePoint::one()) <= opts.cycle_tol {
        seen.insert((0, 1));
        cycles.push(Cycle::from_orbit(filter, vec![CirclePoint::one()]));
    }

    cycles.sort_by(|a, b| {
        (!a.is_trivial, a.period, frac_key(&a.points[0]))
            .partial_cmp(&(!b.is_trivial, b.period, frac_key(&b.points[0])))
            .expect("finite angles")
    });

    let near_cycles = scan_near_cycles(filter, opts, p_max, &seen);
    Ok(CycleSearch {
        cycles,
        near_cycles,
        non_cycle_roots,
        p_max,
    })
}

fn frac_key(z: &CirclePoint) -> f64 {
    match z.rational_angle {
        Some((a, b)) => a as f64 / b as f64,
        None => z.angle / TAU,
    }
}

/// Rotates an orbit so that the point of smallest angle comes first.
fn canonical_order(orbit: Vec<CirclePoint>) -> Vec<CirclePoint> {
    let start = orbit
        .iter()
        .enumerate()
        .min_by(|a, b| frac_key(a.1).total_cmp(&frac_key(b.1)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut v = orbit;
    v.rotate_left(start);
    v
}

/// Points `e^{2 pi i a/(N^p - 1)}` within [`SNAP_TOL`] of `angle`, in order of
/// increasing `p`, deduplicated after reduction.
fn periodic_candidates(angle: f64, scale: u32, p_max: usize) -> Vec<CirclePoint> {
    let x = angle.rem_euclid(TAU) / TAU;
    let mut out: Vec<CirclePoint> = Vec::new();
    let mut np: u128 = 1;
    for _ in 1..=p_max {
        np *= scale as u128;
        let b = (np - 1) as i64;
        let a = (x * b as f64).round() as i64;
        let diff = (x - a as f64 / b as f64).abs() * TAU;
        if diff <= SNAP_TOL {
            let g = gcd(a, b).max(1);
            let cand = CirclePoint::from_rational(a / g, b / g);
            if !out.iter().any(|c| c.rational_angle == cand.rational_angle) {
                out.push(cand);
            }
        }
    }
    out
}

fn scan_near_cycles(
    filter: &FilterSpec,
    opts: &CycleOptions,
    p_max: usize,
    exact: &BTreeSet<(i64, i64)>,
) -> Vec<NearCycle> {
    let scale = filter.scale as u128;
    let sqrt_n = filter.sqrt_n();
    let mut seen: BTreeSet<(i64, i64)> = exact.clone();
    let mut out = Vec::new();
    let mut np: u128 = 1;
    for p in 1..=p_max {
        np *= scale;
        if np > NEAR_SCAN_LIMIT {
            break;
        }
        let b = (np - 1) as i64;
        for a in 0..b {
            let z = CirclePoint::from_rational(a, b);
            let key = z.rational_angle.unwrap();
            if seen.contains(&key) {
                continue;
            }
            let Some((period, orbit)) = orbit_closure(&z, filter.scale, p) else {
                continue;
            };
            for w in &orbit {
                seen.insert(w.rational_angle.unwrap());
            }
            let max_defect = orbit
                .iter()
                .map(|w| sqrt_n - filter.m0.eval(w).norm())
                .fold(0.0, f64::max);
            if max_defect <= opts.near_tol && max_defect > opts.cycle_tol {
                out.push(NearCycle {
                    points: canonical_order(orbit),
                    period,
                    max_defect,
                });
            }
        }
    }
    out
}

/// `m0^{(p)}(z) = m0(z) m0(z^N) ... m0(z^{N^{p-1}})`.
pub fn iterated_filter(m0: &LaurentPoly, scale: u32, p: usize) -> LaurentPoly {
    let mut out = LaurentPoly::constant(1.0);
    let mut dil: i64 = 1;
    for _ in 0..p {
        out = &out * &m0.dilate(dil);
        dil *= scale as i64;
    }
    out
}

/// Cohen's criterion: the only cycle is the trivial one.
pub fn cohen_holds(cycles: &[Cycle]) -> bool {
    cycles.len() == 1 && cycles[0].is_trivial
}

/// `e^{-i theta_C}` for a cycle.
pub fn cycle_phase(cycle: &Cycle) -> Complex64 {
    Complex64::from_polar(1.0, -cycle.theta_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterlib::{builtin, DEFAULT_QMF_TOL};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn haar_has_only_the_trivial_cycle() {
        let cycles = find_cycles(&builtin("haar", None).unwrap(), &CycleOptions::default()).unwrap();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].is_trivial);
        assert_eq!(cycles[0].period, 1);
        assert!(cohen_holds(&cycles));
    }

    #[test]
    fn stretched_haar_cycles() {
        let f = builtin("stretched_haar", Some(3)).unwrap();
        let cycles = find_cycles(&f, &CycleOptions::default()).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles[0].is_trivial);
        let c = &cycles[1];
        assert_eq!(c.period, 2);
        assert_eq!(c.points[0].rational_angle, Some((1, 3)));
        assert_eq!(c.points[1].rational_angle, Some((2, 3)));
        assert!(c.phases.iter().all(|t| t.abs() < 1e-12));
        assert!(c.closure_defect(2) < 1e-10);
        assert!(c.modulus_defect(&f) < 1e-8);
        assert!(!cohen_holds(&cycles));
    }

    #[test]
    fn daubechies4_has_only_the_trivial_cycle() {
        let cycles =
            find_cycles(&builtin("daubechies4", None).unwrap(), &CycleOptions::default()).unwrap();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].is_trivial);
    }

    #[test]
    fn longer_stretch_has_period_four_and_two_cycles() {
        // (1 + z^5)/sqrt 2: fifths under doubling form one 4-cycle
        let f = builtin("stretched_haar", Some(5)).unwrap();
        let cycles = find_cycles(&f, &CycleOptions::default()).unwrap();
        let periods: Vec<_> = cycles.iter().map(|c| c.period).collect();
        assert_eq!(periods, vec![1, 4]);
        // (1 + z^7)/sqrt 2: sevenths split into two 3-cycles
        let f = builtin("stretched_haar", Some(7)).unwrap();
        let cycles = find_cycles(&f, &CycleOptions::default()).unwrap();
        let periods: Vec<_> = cycles.iter().map(|c| c.period).collect();
        assert_eq!(periods, vec![1, 3, 3]);
    }

    #[test]
    fn shifted_filter_has_nonzero_phases() {
        // z (1 + z^3)/sqrt 2 keeps the cycles but picks up phases z_k
        let m0 = LaurentPoly::from_real(1, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let f = FilterSpec::new("shifted", 2, m0).unwrap().validate(DEFAULT_QMF_TOL).unwrap();
        let cycles = find_cycles(&f, &CycleOptions::default()).unwrap();
        let c = &cycles[1];
        assert!((c.phases[0] - TAU / 3.0).abs() < 1e-12);
        assert!((c.phases[1] + TAU / 3.0).abs() < 1e-12);
        assert!(c.theta_c.abs() < 1e-12);
    }

    #[test]
    fn cycles_are_disjoint_roots_of_unity() {
        let f = builtin("stretched_haar", Some(7)).unwrap();
        let cycles = find_cycles(&f, &CycleOptions::default()).unwrap();
        let mut all = BTreeSet::new();
        for c in &cycles {
            let np1 = 2i64.pow(c.period as u32) - 1;
            for z in &c.points {
                let (_, b) = z.rational_angle.unwrap();
                assert_eq!(np1 % b, 0);
                assert!(all.insert(z.rational_angle.unwrap()));
            }
        }
    }

    #[test]
    fn orbit_closure_examples() {
        assert_eq!(orbit_closure(&CirclePoint::one(), 3, 5).unwrap().0, 1);
        let (p, orbit) = orbit_closure(&CirclePoint::from_rational(1, 3), 2, 20).unwrap();
        assert_eq!(p, 2);
        assert_eq!(orbit[1].rational_angle, Some((2, 3)));
        assert!(orbit_closure(&CirclePoint::from_angle(1.0), 2, 12).is_none());
        // 1/6 is preperiodic under doubling
        assert!(orbit_closure(&CirclePoint::from_rational(1, 6), 2, 20).is_none());
    }

    #[test]
    fn non_qmf_filter_is_refused() {
        let m0 = LaurentPoly::from_real(0, &[1.0, 1.0, 1.0]).scale(1.0 / 3f64.sqrt());
        let f = FilterSpec::new("box3", 2, m0).unwrap().validate(DEFAULT_QMF_TOL).unwrap();
        assert!(matches!(
            find_cycles(&f, &CycleOptions::default()),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn default_p_max_bounds() {
        assert_eq!(default_p_max(2), 20);
        assert_eq!(default_p_max(3), 12);
        assert_eq!(default_p_max(4), 10);
    }

    #[test]
    fn iterated_filter_matches_product() {
        let m0 = builtin("daubechies4", None).unwrap().m0;
        let m2 = iterated_filter(&m0, 2, 2);
        let t = 0.37;
        let direct = m0.eval_angle(t) * m0.eval_angle(2.0 * t);
        assert!((m2.eval_angle(t) - direct).norm() < 1e-14);
    }
}
