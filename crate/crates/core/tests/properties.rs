use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use ruelle_lab::cascade::{autocorrelation_h, cascade_step, GridFunction};
use ruelle_lab::cycles::{find_cycles, CycleOptions};
use ruelle_lab::filterlib::{builtin, FilterSpec};
use ruelle_lab::lpoly::{LaurentPoly, DEFAULT_GRID};
use ruelle_lab::peripheral::{
    build_spectrum, decompose_fixed_point, transfer_product, PeripheralSpectrum, SpectrumOptions,
};
use ruelle_lab::transfer::TransferOperator;

struct Case {
    filter: FilterSpec,
    op: TransferOperator,
    spectrum: PeripheralSpectrum,
}

fn cases() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        [
            ("haar", None),
            ("stretched_haar", Some(3)),
            ("stretched_haar", Some(5)),
            ("stretched_haar", Some(7)),
            ("daubechies4", None),
        ]
        .into_iter()
        .map(|(name, param)| {
            let filter = builtin(name, param).unwrap();
            let cycles = find_cycles(&filter, &CycleOptions::default()).unwrap();
            let op = TransferOperator::for_filter(&filter).unwrap();
            let spectrum = build_spectrum(&op, &cycles, &SpectrumOptions::default()).unwrap();
            Case { filter, op, spectrum }
        })
        .collect()
    })
}

fn stretched() -> &'static Case {
    &cases()[1]
}

fn combine(spectrum: &PeripheralSpectrum, alphas: &[f64]) -> LaurentPoly {
    spectrum
        .h_funcs
        .iter()
        .zip(alphas)
        .fold(LaurentPoly::zero(), |acc, (h, &a)| &acc + &h.scale(a))
}

#[test]
fn peripheral_closure_for_builtins() {
    for case in cases() {
        let decay = case.spectrum.diagnostics.residual_decay;
        assert!(decay < 1.0, "{}: {decay}", case.filter.name);
    }
}

#[test]
fn partition_of_unity_for_builtins() {
    for case in cases() {
        let total = combine(&case.spectrum, &vec![1.0; case.spectrum.h_funcs.len()]);
        let err = total.sup_distance(&LaurentPoly::constant(1.0), DEFAULT_GRID);
        assert!(err <= 1e-8, "{}: {err}", case.filter.name);
    }
}

#[test]
fn basis_is_well_conditioned() {
    for case in cases() {
        let cond = case.spectrum.diagnostics.nu_gram_condition;
        assert!(cond.is_finite() && cond < 1e8, "{}: {cond}", case.filter.name);
        for b in &case.spectrum.blocks {
            assert_eq!(b.eigenspace_dim, b.cycle_indices.len());
        }
    }
}

#[test]
fn minimality_probe() {
    for case in cases() {
        for (i, h) in case.spectrum.h_funcs.iter().enumerate() {
            let d = decompose_fixed_point(&case.op, &case.spectrum, &h.scale(0.7)).unwrap();
            for (j, a) in d.alphas.iter().enumerate() {
                let target = if i == j { 0.7 } else { 0.0 };
                assert!((a - Complex64::new(target, 0.0)).norm() < 1e-9, "{} {i} {j}", case.filter.name);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn domination_probe(which in 0usize..5, raw in prop::collection::vec(0.0f64..3.0, 4)) {
        let case = &cases()[which];
        let n = case.spectrum.h_funcs.len();
        for i in 0..n {
            let mut alphas: Vec<f64> = raw.iter().copied().cycle().take(n).collect();
            alphas[i] = 1.0;
            let h = combine(&case.spectrum, &alphas);
            let gap = &h - &case.spectrum.h_funcs[i];
            prop_assert!(gap.min_real_on_grid(DEFAULT_GRID) >= -1e-8);
            prop_assert!(h.min_real_on_grid(DEFAULT_GRID) >= -1e-8);
        }
    }

    #[test]
    fn product_is_commutative_and_associative(
        a in prop::collection::vec(-2.0f64..2.0, 2),
        b in prop::collection::vec(-2.0f64..2.0, 2),
        c in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let case = stretched();
        let (op, s) = (&case.op, &case.spectrum);
        let (ha, hb, hc) = (combine(s, &a), combine(s, &b), combine(s, &c));
        let ab = transfer_product(op, &ha, &hb).unwrap();
        let ba = transfer_product(op, &hb, &ha).unwrap();
        prop_assert!(ab.sup_distance(&ba, DEFAULT_GRID) <= 1e-6);
        let left = transfer_product(op, &ab, &hc).unwrap();
        let bc = transfer_product(op, &hb, &hc).unwrap();
        let right = transfer_product(op, &ha, &bc).unwrap();
        prop_assert!(left.sup_distance(&right, DEFAULT_GRID) <= 1e-6);
        // pointwise on the two cycles
        let expected: Vec<f64> = (0..2).map(|i| a[i] * b[i]).collect();
        prop_assert!(ab.sup_distance(&combine(s, &expected), DEFAULT_GRID) <= 1e-6);
    }

    #[test]
    fn cascade_intertwines_with_transfer(
        which in 0usize..5,
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        offset in -2i64..3,
    ) {
        let case = &cases()[which];
        let start: Vec<Complex64> = coeffs.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let mut psi = GridFunction::unit_boxes(offset, &start).unwrap();
        for _ in 0..3 {
            let next = cascade_step(&case.filter, &psi).unwrap();
            let lhs = autocorrelation_h(&next).unwrap();
            let rhs = case.op.apply(&autocorrelation_h(&psi).unwrap());
            prop_assert!(lhs.coeff_distance(&rhs) <= 1e-12);
            psi = next;
        }
    }
}
