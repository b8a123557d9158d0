use iscat_core::energies::{
    binom, energy_es, kdv_cubic_term, momentum_ps, momentum_quadratic, quartic_term,
    trace_line_side, xi_s, xi_s_kdv, EnergySpec, QuadConfig,
};
use iscat_core::grid::sobolev_norm_sq;
use iscat_core::hierarchy::{h_exact_mode, kdv_poly_energy};
use iscat_core::scattering::{find_poles, PoleSearch, Rect, ScatteringProblem, System};
use iscat_core::{Complex64 as C, EnergyError, Grid, GridFunction, Mode};
use proptest::prelude::*;

fn gaussian(a: f64) -> GridFunction {
    Grid::default().sample_real(|x| a * (-x * x).exp())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn e(u: &GridFunction, s: f64, mode: Mode) -> f64 {
    energy_es(u, &EnergySpec::new(s, mode)).unwrap().value
}

/// `Im ∫₀^z (1+ζ²)^s dζ` along the straight segment, composite Simpson.
fn xi_segment(z: C, s: f64) -> f64 {
    let n = 20_000;
    let f = |t: f64| ((C::new(1.0, 0.0) + (z * t) * (z * t)).powf(s) * z).im;
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn binomials_match_products() {
    assert_eq!(binom(0.5, 0), 1.0);
    assert!((binom(0.5, 2) + 0.125).abs() < 1e-15);
    assert!((binom(3.0, 2) - 3.0).abs() < 1e-15);
    assert_eq!(binom(2.0, 3), 0.0);
}

#[test]
fn xi_reduces_to_polynomials_at_integer_s() {
    for &(x, y) in &[(0.0, 0.3), (0.0, 2.5), (0.7, 1.4), (-1.2, 0.2)] {
        let z = C::new(x, y);
        assert!((xi_s(z, 0.0).unwrap() - y).abs() < 1e-12);
        let cubic = (z + z * z * z / 3.0).im;
        assert!((xi_s(z, 1.0).unwrap() - cubic).abs() < 1e-11, "{z}");
    }
    for &t in &[0.4, 1.0, 1.7, 3.0] {
        assert!((xi_s_kdv(t, 0.0).unwrap() - t.powi(3) / 3.0).abs() < 1e-12);
        let p = t.powi(3) / 3.0 - t.powi(5) / 5.0;
        assert!((xi_s_kdv(t, 1.0).unwrap() - p).abs() < 1e-11, "{t}");
    }
}

#[test]
fn xi_matches_segment_quadrature_off_the_axis() {
    for &(x, y, s) in &[(0.5, 1.5, 0.5), (-0.3, 0.8, -0.25), (1.0, 3.0, 1.5), (0.2, 2.0, 0.75)] {
        let z = C::new(x, y);
        let got = xi_s(z, s).unwrap();
        let want = xi_segment(z, s);
        assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{z} {s}: {got} vs {want}");
    }
}

#[test]
fn xi_is_continuous_onto_the_cut() {
    for &s in &[0.25, 0.5, 1.3] {
        let on = xi_s(C::new(0.0, 2.0), s).unwrap();
        let right = xi_s(C::new(1e-7, 2.0), s).unwrap();
        let left = xi_s(C::new(-1e-7, 2.0), s).unwrap();
        assert!((on - right).abs() < 1e-5 && (on - left).abs() < 1e-5, "{s}: {left} {on} {right}");
    }
    assert!(matches!(xi_s(C::new(0.0, -1.0), 0.5), Err(EnergyError::BranchCut(_))));
}

#[test]
fn zero_data_has_zero_energy() {
    let u = gaussian(0.0);
    for mode in [Mode::Defocusing, Mode::Focusing, Mode::Kdv] {
        assert_eq!(e(&u, 0.5, mode), 0.0);
    }
    let p = momentum_ps(&u, &EnergySpec::new(0.75, Mode::Defocusing)).unwrap();
    assert_eq!(p.value, 0.0);
}

#[test]
fn integer_orders_are_binomial_sums() {
    let u = gaussian(0.2);
    for mode in [Mode::Defocusing, Mode::Focusing] {
        let h = |j| h_exact_mode(j, mode, &u).unwrap();
        assert!(rel(e(&u, 0.0, mode), h(0)) < 1e-14);
        assert!(rel(e(&u, 1.0, mode), h(0) + h(2)) < 1e-12);
        assert!(rel(e(&u, 2.0, mode), h(0) + 2.0 * h(2) + h(4)) < 1e-12);
    }
    let k = |j| kdv_poly_energy(j, &u).unwrap();
    assert!(rel(e(&u, 1.0, Mode::Kdv), k(0) + k(1)) < 1e-12);
}

#[test]
fn energy_is_smooth_across_integer_order() {
    let u = gaussian(0.3);
    let d = 1e-2;
    let (a, b, c) = (
        e(&u, 1.0 - d, Mode::Defocusing),
        e(&u, 1.0, Mode::Defocusing),
        e(&u, 1.0 + d, Mode::Defocusing),
    );
    let second = (a - 2.0 * b + c).abs() / b;
    assert!(second < 1e-3, "{a} {b} {c}");
    assert!(a < b && b < c);
}

#[test]
fn expansion_order_does_not_change_the_energy() {
    let u = gaussian(0.4);
    let base = e(&u, 0.5, Mode::Defocusing);
    for n in [1, 2] {
        let v = energy_es(&u, &EnergySpec::new(0.5, Mode::Defocusing).with_n(n))
            .unwrap()
            .value;
        assert!(rel(v, base) < 1e-9, "N = {n}: {v} vs {base}");
    }
}

#[test]
fn quadratic_subtraction_is_only_a_rearrangement() {
    let u = gaussian(0.4);
    let quad = QuadConfig {
        quadratic_subtraction: false,
        tol: 1e-2,
        ..QuadConfig::default()
    };
    for s in [0.25, 0.75] {
        let a = e(&u, s, Mode::Defocusing);
        let b = energy_es(&u, &EnergySpec::new(s, Mode::Defocusing).with_quad(quad.clone()))
            .unwrap()
            .value;
        assert!(rel(b, a) < 1e-8, "{s}: {a} {b}");
    }
}

#[test]
fn small_data_energy_is_the_sobolev_norm() {
    for s in [-0.25, 0.25, 0.75, 1.5] {
        let dev = |eps: f64| {
            let u = gaussian(eps);
            let q = sobolev_norm_sq(&u, s);
            (e(&u, s, Mode::Defocusing) - q) / q
        };
        let (a, b) = (dev(0.05), dev(0.025));
        assert!(a.abs() <= 5e-3, "s = {s}: {a:e}");
        let p = (a / b).abs().log2();
        assert!((p - 2.0).abs() <= 0.3, "s = {s}: exponent {p}");
    }
}

#[test]
fn momentum_at_one_half_is_h1() {
    let g = Grid::default();
    let u = g.sample(|x| C::from_polar(0.4 * (-x * x).exp(), 0.7 * x));
    let p = momentum_ps(&u, &EnergySpec::new(0.5, Mode::Defocusing)).unwrap();
    let h1 = h_exact_mode(1, Mode::Defocusing, &u).unwrap();
    assert!(rel(p.value, h1) < 1e-12);
    assert!(momentum_quadratic(&gaussian(0.4), 0.75).abs() < 1e-15);
}

#[test]
fn small_data_momentum_is_its_quadratic_part() {
    let g = Grid::default();
    let u = g.sample(|x| C::from_polar(0.05 * (-x * x).exp(), 0.5 * x));
    for s in [0.25, 0.75, 1.25] {
        let p = momentum_ps(&u, &EnergySpec::new(s, Mode::Defocusing)).unwrap().value;
        let q = momentum_quadratic(&u, s);
        assert!(rel(p, q) < 5e-3, "{s}: {p} vs {q}");
    }
}

#[test]
fn quartic_kernel_at_one_is_the_l4_norm() {
    let g = Grid::default();
    let u = g.sample_real(|x| 0.5 * (-x * x / 4.0).exp());
    let l4: f64 = u.values().iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * g.h();
    assert!(rel(quartic_term(&u, 1.0), l4) < 1e-8);
}

#[test]
fn quartic_kernel_predicts_the_fourth_order_energy() {
    let g = Grid::default();
    let u = g.sample_real(|x| 0.5 * (-x * x / 4.0).exp());
    let s = 0.5;
    let eps = 0.05;
    let ue = u.scale(eps);
    let r = (e(&ue, s, Mode::Defocusing) - sobolev_norm_sq(&ue, s)) / eps.powi(4);
    let q = quartic_term(&u, s);
    assert!(rel(r, q) < 0.1, "{r} vs {q}");
}

#[test]
fn kdv_cubic_kernel_at_one_is_twice_the_cubic_integral() {
    let g = Grid::default();
    let u = g.sample_real(|x| 0.3 * (-x * x / 4.0).exp());
    let cube: f64 = u.values().iter().map(|v| v.re.powi(3)).sum::<f64>() * g.h();
    assert!(rel(kdv_cubic_term(&u, 1.0), 2.0 * cube) < 1e-10);
}

#[test]
fn kdv_cubic_kernel_predicts_the_third_order_energy() {
    let u = gaussian(1.0);
    let s = 0.5;
    let eps = 0.05;
    let ue = u.scale(eps);
    let r = (e(&ue, s, Mode::Kdv) - sobolev_norm_sq(&ue, s)) / eps.powi(3);
    let c = kdv_cubic_term(&u, s);
    assert!(rel(r, c) < 5e-2, "{r} vs {c}");
}

#[test]
fn defocusing_trace_formula_holds() {
    let u = gaussian(0.5);
    for s in [0.0, 0.5] {
        let spec = EnergySpec::new(s, Mode::Defocusing);
        let line = trace_line_side(&u, &spec, None).unwrap();
        let contour = energy_es(&u, &spec).unwrap().value;
        assert!(rel(line.value, contour) < 1e-6, "{s}: {} vs {contour}", line.value);
    }
}

#[test]
fn focusing_trace_formula_counts_the_pole() {
    let g = Grid::default();
    let u = g.sample_real(|x| 1.2 / x.cosh());
    let prob = ScatteringProblem::new(u.clone(), System::Focusing).unwrap();
    let rect = Rect { re_min: -4.0, re_max: 4.0, im_min: 0.05, im_max: 4.0 };
    let poles = find_poles(&prob, rect, &PoleSearch::default()).unwrap();
    assert_eq!(poles.poles.len(), 1);
    assert!((poles.poles[0].z - C::new(0.0, 0.7)).norm() < 1e-8);
    let spec = EnergySpec::new(0.0, Mode::Focusing);
    let line = trace_line_side(&u, &spec, Some(&poles)).unwrap();
    let contour = energy_es(&u, &spec).unwrap().value;
    assert!((contour - 2.88).abs() < 1e-12);
    assert!(rel(line.value, contour) < 1e-5, "{} vs {contour}", line.value);
    assert!((line.poles - 2.8).abs() < 1e-8);
}

#[test]
fn pole_on_the_ray_is_reported() {
    let g = Grid::default();
    let u = g.sample_real(|x| 1.2 / x.cosh());
    match energy_es(&u, &EnergySpec::new(0.5, Mode::Focusing)) {
        Err(EnergyError::PoleOnRay { tau }) => assert!((tau - 1.4).abs() < 1e-3),
        other => panic!("expected PoleOnRay, got {other:?}"),
    }
}

#[test]
fn unsupported_orders_are_rejected() {
    let u = gaussian(0.1);
    let unsupported = |r: Result<_, EnergyError>| matches!(r, Err(EnergyError::UnsupportedRange { .. }));
    assert!(unsupported(energy_es(&u, &EnergySpec::new(-0.5, Mode::Defocusing))));
    assert!(unsupported(energy_es(&u, &EnergySpec::new(-1.0, Mode::Kdv))));
    assert!(unsupported(energy_es(&u, &EnergySpec::new(3.5, Mode::Kdv))));
    assert!(unsupported(energy_es(&u, &EnergySpec::new(f64::NAN, Mode::Focusing))));
    assert!(unsupported(momentum_ps(&u, &EnergySpec::new(2.5, Mode::Defocusing))));
    assert!(unsupported(momentum_ps(&u, &EnergySpec::new(-0.5, Mode::Defocusing))));
}

#[test]
fn kdv_energies_at_low_order_are_polynomial() {
    let u = gaussian(0.3);
    let l2 = u.l2_norm_sq();
    assert!(rel(e(&u, 0.0, Mode::Kdv), l2) < 1e-14);
    let x = e(&u, 0.5, Mode::Kdv);
    let q = sobolev_norm_sq(&u, 0.5);
    assert!(rel(x - q, kdv_cubic_term(&u, 0.5)) < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn small_defocusing_energy_stays_near_the_norm(
        a in 0.02f64..0.1,
        w in 0.5f64..2.0,
        s in -0.4f64..1.4,
    ) {
        let u = Grid::default().sample_real(|x| a * (-w * x * x).exp());
        let q = sobolev_norm_sq(&u, s);
        let v = e(&u, s, Mode::Defocusing);
        prop_assert!(v > 0.0);
        prop_assert!(((v - q) / q).abs() < 0.05);
    }
}

#[test]
fn kdv_trace_formula_counts_the_bound_state() {
    let g = Grid::default();
    let k = 0.4;
    let u = g.sample_real(|x| -2.0 * k * k / (k * x).cosh().powi(2));
    let prob = ScatteringProblem::new(u.clone(), System::Kdv).unwrap();
    let rect = Rect { re_min: -2.0, re_max: 2.0, im_min: 0.05, im_max: 3.0 };
    let poles = find_poles(&prob, rect, &PoleSearch::default()).unwrap();
    assert_eq!(poles.poles.len(), 1);
    assert!((poles.poles[0].z - C::new(0.0, k)).norm() < 1e-8);
    for s in [0.0, 0.5] {
        let spec = EnergySpec::new(s, Mode::Kdv);
        let line = trace_line_side(&u, &spec, Some(&poles)).unwrap();
        let contour = energy_es(&u, &spec).unwrap().value;
        assert!(rel(line.value, contour) < 1e-6, "{s}: {} vs {contour}", line.value);
        assert!(line.line.abs() < 1e-9);
    }
    // E_0 of the soliton is 16κ³/3
    assert!(rel(e(&u, 0.0, Mode::Kdv), 16.0 * k.powi(3) / 3.0) < 1e-12);
}

#[test]
fn kdv_trace_formula_holds_without_bound_states() {
    let u = gaussian(0.3);
    for s in [-0.5, 0.5] {
        let spec = EnergySpec::new(s, Mode::Kdv);
        let line = trace_line_side(&u, &spec, None).unwrap();
        let contour = energy_es(&u, &spec).unwrap().value;
        assert!(rel(line.value, contour) < 1e-6, "{s}: {} vs {contour}", line.value);
    }
}
