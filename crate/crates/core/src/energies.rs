//! Conserved energies `E_s`, momenta `P_s`, the function `Ξ_s`, real-line
//! trace formulas and the explicit quartic (NLS) and cubic (KdV) kernels.
//!
//! The ray integrals run over `τ ∈ [1, τ_max]` with a Gauss–Jacobi panel on
//! `[1, 2]` for the `(τ−1)^β` endpoint and doubling Gauss–Legendre panels up
//! to `τ_max`. Beyond `τ_max` the bracket is replaced by its asymptotic series
//! and integrated termwise.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EnergyError, ScatteringError};
use crate::grid::{sobolev_norm_sq, to_spectral, GridFunction};
use crate::hierarchy::{h_component, h_exact_mode, kdv_poly_energy};
use crate::mode::Mode;
use crate::scattering::{
    find_poles, t2_quadratic, PoleSearch, PoleSet, Rect, ScatteringProblem, ScatteringSample,
    SolverConfig,
};

type C = Complex64;

/// Largest frequency count per axis in the kernel sums.
pub const DEFAULT_KERNEL_MODES: usize = 128;

/// Half-width of the rectangle around the ray used for the pole check.
const RAY_MARGIN: f64 = 1e-3;

/// Generalized binomial coefficient `C(s, j)`.
pub fn binom(s: f64, j: usize) -> f64 {
    (1..=j).fold(1.0, |c, i| c * (s - i as f64 + 1.0) / i as f64)
}

/// Numerical settings of the ray and line quadratures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Upper end of the numerical `τ` range; the rest is the asymptotic tail.
    /// `None` picks 64 when the ray weight grows at most like `τ²` and 16
    /// otherwise, which keeps round-off in `T⁻¹` below the tail error.
    pub tau_max: Option<f64>,
    /// Gauss nodes per panel; the error estimate uses half as many.
    pub nodes: usize,
    /// Relative tolerance on the quadrature error estimate.
    pub tol: f64,
    /// Integrate only the non-quadratic remainder and add the quadratic part
    /// in closed form (NLS/mKdV).
    pub quadratic_subtraction: bool,
    /// Search the ray for poles of `T` before integrating (focusing, KdV).
    pub pole_check: bool,
    /// ODE solver settings.
    pub solver: SolverConfig,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            tau_max: None,
            nodes: 32,
            tol: 1e-6,
            quadratic_subtraction: true,
            pole_check: true,
            solver: SolverConfig {
                tol: 1e-13,
                ..SolverConfig::default()
            },
        }
    }
}

/// Order, equation and quadrature settings of an energy or momentum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    /// Sobolev order.
    pub s: f64,
    /// Equation family.
    pub mode: Mode,
    /// Number of subtracted expansion terms; `None` picks the minimal one.
    pub n: Option<i64>,
    /// Quadrature settings.
    pub quad: QuadConfig,
}

impl EnergySpec {
    /// Default quadrature with the minimal `N`.
    pub fn new(s: f64, mode: Mode) -> Self {
        Self {
            s,
            mode,
            n: None,
            quad: QuadConfig::default(),
        }
    }

    /// Overrides `N`.
    pub fn with_n(mut self, n: i64) -> Self {
        self.n = Some(n);
        self
    }

    /// Replaces the quadrature settings.
    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }
}

/// Additive pieces of an [`EnergyResult`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    /// Ray integral over `[1, τ_max]` including its prefactor.
    pub contour: f64,
    /// Asymptotic tail beyond `τ_max` including its prefactor.
    pub tail: f64,
    /// Binomial sum of polynomial conserved quantities.
    pub correction: f64,
    /// Closed-form quadratic part when the subtraction is active.
    pub quadratic: f64,
    /// Pole contributions.
    pub poles: f64,
}

impl EnergyParts {
    fn total(&self) -> f64 {
        self.contour + self.tail + self.correction + self.quadratic + self.poles
    }
}

/// A polynomial conserved quantity used by an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    /// Index `k` of `H_k` or `E_k`.
    pub index: i64,
    /// Value.
    pub value: f64,
}

/// Value of `E_s` or `P_s` with its parts and error estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    /// Sobolev order.
    pub s: f64,
    /// Equation family.
    pub mode: Mode,
    /// Number of subtracted expansion terms.
    pub n: i64,
    /// Sum of the parts.
    pub value: f64,
    /// Breakdown.
    pub parts: EnergyParts,
    /// Combined quadrature, tail and solver error estimate.
    pub err: f64,
    /// Polynomial quantities entering the corrections.
    pub h_values: Vec<HValue>,
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"))
        .as_node_weight_pairs()
        .to_vec()
}

fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    let a = FiniteAboveNegOneF64::new(alpha).expect("exponent above −1");
    let b = FiniteAboveNegOneF64::new(beta).expect("exponent above −1");
    GaussJacobi::new(NonZeroUsize::new(n.max(1)).expect("nonzero"), a, b)
        .as_node_weight_pairs()
        .to_vec()
}

/// `∫_a^1 (1−t)^s h(t) dt`.
fn jacobi_right(a: f64, s: f64, h: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (1.0 - a);
    gauss_jacobi(40, s, 0.0)
        .iter()
        .map(|&(x, w)| w * h(0.5 * (1.0 + a) + half * x))
        .sum::<f64>()
        * half.powf(s + 1.0)
}

/// `∫_1^b (t−1)^s h(t) dt` with `b ≤ 2`.
fn jacobi_left(b: f64, s: f64, h: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - 1.0);
    gauss_jacobi(40, 0.0, s)
        .iter()
        .map(|&(x, w)| w * h(0.5 * (b + 1.0) + half * x))
        .sum::<f64>()
        * half.powf(s + 1.0)
}

/// Composite Gauss–Legendre over doubling panels of `[a, b]`, `a ≥ 1`.
fn doubling_panels(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(40);
    let mut lo = a;
    let mut acc = 0.0;
    while lo < b {
        let hi = (2.0 * lo).min(b);
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        acc += rule.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r;
        lo = hi;
    }
    acc
}

/// Adaptive Gauss–Legendre: 10 against 20 nodes with bisection.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    type Rules = (Vec<(f64, f64)>, Vec<(f64, f64)>);
    thread_local! {
        static RULES: Rules = (gauss_legendre(10), gauss_legendre(20));
    }
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let (lo, hi) = RULES.with(|(r10, r20)| {
        let q = |rule: &[(f64, f64)]| rule.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r;
        (q(r10), q(r20))
    });
    if (hi - lo).abs() <= tol || depth == 0 {
        hi
    } else {
        adaptive(f, a, c, 0.5 * tol, depth - 1) + adaptive(f, c, b, 0.5 * tol, depth - 1)
    }
}

/// `Ξ_s(z) = Im ∫₀^z (1+ζ²)^s dζ` on the closed upper half-plane.
///
/// The path runs along the real axis and then vertically. On the imaginary
/// axis above `i` the value is the common limit from both sides of the cut,
/// `∫₀¹(1−t²)^s dt + cos(πs) ∫₁^y (t²−1)^s dt`.
pub fn xi_s(z: C, s: f64) -> Result<f64, EnergyError> {
    if !(z.re.is_finite() && z.im.is_finite() && s.is_finite()) || z.im < 0.0 {
        return Err(EnergyError::BranchCut(format!("{z}")));
    }
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        if s <= -1.0 && y >= 1.0 {
            return Err(EnergyError::BranchCut(format!("{z}")));
        }
        let h = |t: f64| (1.0 + t).powf(s);
        let full = jacobi_right(0.0, s, h);
        let a = y.min(1.0);
        let mut v = if a < 1.0 { full - jacobi_right(a, s, h) } else { full };
        if y > 1.0 {
            let b = y.min(2.0);
            let mut out = jacobi_left(b, s, h);
            if y > 2.0 {
                out += doubling_panels(2.0, y, |t| (t * t - 1.0).powf(s));
            }
            v += (PI * s).cos() * out;
        }
        return Ok(v);
    }
    let f = |t: f64| {
        let zeta = C::new(x, t);
        (C::new(1.0, 0.0) + zeta * zeta).powf(s).re
    };
    let depth = 48;
    Ok(if y > 1.0 {
        adaptive(&f, 0.0, 1.0, 1e-14, depth) + adaptive(&f, 1.0, y, 1e-14 * y, depth)
    } else {
        adaptive(&f, 0.0, y, 1e-14, depth)
    })
}

/// `Ξ_s(t) = ∫₀^t ζ²(1−ζ²)^s dζ` for the KdV trace formula, continued past
/// `ζ = 1` by `cos(πs) (ζ²−1)^s`.
pub fn xi_s_kdv(t: f64, s: f64) -> Result<f64, EnergyError> {
    if !(t.is_finite() && s.is_finite()) || t < 0.0 || (s <= -1.0 && t >= 1.0) {
        return Err(EnergyError::BranchCut(format!("{t}")));
    }
    let h = |z: f64| z * z * (1.0 + z).powf(s);
    let full = jacobi_right(0.0, s, h);
    let a = t.min(1.0);
    let mut v = if a < 1.0 { full - jacobi_right(a, s, h) } else { full };
    if t > 1.0 {
        let mut out = jacobi_left(t.min(2.0), s, h);
        if t > 2.0 {
            out += doubling_panels(2.0, t, |z| z * z * (z * z - 1.0).powf(s));
        }
        v += (PI * s).cos() * out;
    }
    Ok(v)
}

/// Ray weight `τ^{e0} (1−τ^{−2})^b = (τ−1)^b · smooth(τ)`.
#[derive(Clone, Copy)]
struct RayWeight {
    /// Exponent of `(τ²−1)`.
    b: f64,
    /// Extra power of `τ`.
    p: f64,
}

impl RayWeight {
    fn smooth(&self, tau: f64) -> f64 {
        tau.powf(self.p) * (tau + 1.0).powf(self.b)
    }

    fn full(&self, tau: f64) -> f64 {
        tau.powf(self.p) * (tau * tau - 1.0).powf(self.b)
    }

    /// `∫_T^∞ weight(τ) τ^{−q} dτ` from the binomial series.
    fn tail(&self, t: f64, q: f64) -> f64 {
        let e0 = self.p + 2.0 * self.b;
        let mut acc = 0.0;
        for m in 0..200 {
            let e = e0 - 2.0 * m as f64 - q + 1.0;
            let term = binom(self.b, m) * if m % 2 == 0 { 1.0 } else { -1.0 } * t.powf(e) / -e;
            acc += term;
            if m > 2 && term.abs() <= 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    }
}

/// Quadrature nodes `(τ, weight)` for the primary and the halved rule.
fn ray_rules(w: RayWeight, tau_max: f64, n: usize) -> [Vec<(f64, f64)>; 2] {
    let build = |n: usize| {
        let mut out: Vec<(f64, f64)> = gauss_jacobi(n, 0.0, w.b)
            .into_iter()
            .map(|(x, wt)| {
                let tau = 1.5 + 0.5 * x;
                (tau, wt * 0.5f64.powf(w.b + 1.0) * w.smooth(tau))
            })
            .collect();
        let rule = gauss_legendre(n);
        let mut lo = 2.0;
        while lo < tau_max {
            let hi = (2.0 * lo).min(tau_max);
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            out.extend(rule.iter().map(|&(x, wt)| {
                let tau = c + r * x;
                (tau, wt * r * w.full(tau))
            }));
            lo = hi;
        }
        out
    };
    [build(n), build((n / 2).max(2))]
}

/// A ray integral `pref ∫₁^∞ weight(τ) bracket(τ) dτ`.
struct RayProblem<'a> {
    weight: RayWeight,
    pref: f64,
    /// `bracket(τ, sample)`.
    bracket: &'a (dyn Fn(f64, &ScatteringSample) -> f64 + Sync),
    /// Asymptotic terms `(a, q)` with `bracket ≈ Σ a τ^{−q}` beyond `τ_max`.
    tail: Vec<(f64, f64)>,
    /// Estimated first omitted term `(|a|, q)`.
    omitted: (f64, f64),
}

struct RayValue {
    contour: f64,
    tail: f64,
    err: f64,
}

fn integrate_ray(
    prob: &ScatteringProblem,
    ray: &RayProblem<'_>,
    quad: &QuadConfig,
) -> Result<RayValue, EnergyError> {
    let growth = ray.weight.p + 2.0 * ray.weight.b;
    let tau_max = quad.tau_max.unwrap_or(if growth <= 2.0 {
        64.0
    } else if growth <= 3.0 {
        32.0
    } else {
        16.0
    });
    if !(tau_max >= 2.0 && tau_max.is_finite()) || quad.nodes < 4 {
        return Err(ScatteringError::InvalidArgument(
            "τ_max must be finite and ≥ 2, nodes ≥ 4".into(),
        )
        .into());
    }
    let [full, half] = ray_rules(ray.weight, tau_max, quad.nodes);
    let zs: Vec<C> = full
        .iter()
        .chain(half.iter())
        .map(|&(tau, _)| C::new(0.0, 0.5 * tau))
        .collect();
    let samples = prob.transmission_batch(&zs)?;
    let (mut i_full, mut i_half, mut solver_err) = (0.0, 0.0, 0.0);
    for (k, ((tau, w), smp)) in full.iter().chain(half.iter()).zip(&samples).enumerate() {
        let v = w * (ray.bracket)(*tau, smp);
        if k < full.len() {
            i_full += v;
            solver_err += w.abs() * smp.err / smp.tinv.norm();
        } else {
            i_half += v;
        }
    }
    let tail_terms: Vec<f64> = ray
        .tail
        .iter()
        .map(|&(a, q)| a * ray.weight.tail(tau_max, q))
        .collect();
    let tail: f64 = tail_terms.iter().sum();
    let tail_err = (ray.omitted.0 * ray.weight.tail(tau_max, ray.omitted.1)).abs();
    let pref = ray.pref.abs();
    Ok(RayValue {
        contour: ray.pref * i_full,
        tail: ray.pref * tail,
        err: pref * ((i_full - i_half).abs() + solver_err + tail_err),
    })
}

fn ensure_no_pole_on_ray(prob: &ScatteringProblem, quad: &QuadConfig) -> Result<(), EnergyError> {
    let rect = Rect {
        re_min: -RAY_MARGIN,
        re_max: RAY_MARGIN,
        im_min: 0.5 - RAY_MARGIN,
        im_max: 0.5 * quad.tau_max.unwrap_or(64.0) + RAY_MARGIN,
    };
    match find_poles(prob, rect, &PoleSearch::default()) {
        Ok(set) if set.winding == 0 => Ok(()),
        Ok(set) => Err(EnergyError::PoleOnRay {
            tau: set.poles.first().map_or(f64::NAN, |p| 2.0 * p.z.im),
        }),
        Err(ScatteringError::ContourZero { .. }) => Err(EnergyError::PoleOnRay { tau: f64::NAN }),
        Err(e) => Err(e.into()),
    }
}

/// `H_k` without its degree-8 and higher parts, used only in the asymptotic
/// tail where `k` exceeds the exactly available range.
fn h_truncated(k: i64, mode: Mode, u: &GridFunction, quadratic: bool) -> Result<f64, EnergyError> {
    let mut v = mode.sigma() * h_component(k, 4, u)? + h_component(k, 6, u)?;
    if quadratic {
        v += h_component(k, 2, u)?;
    }
    Ok(v)
}

/// Magnitude of the coefficient after `c`, extrapolated from the largest
/// ratio of consecutive known coefficients.
fn next_coefficient(c: &[f64]) -> f64 {
    let last = c.last().map_or(0.0, |v| v.abs());
    let ratio = c
        .windows(2)
        .filter(|w| w[0] != 0.0)
        .map(|w| (w[1] / w[0]).abs())
        .fold(1.0, f64::max);
    last * ratio
}

fn unsupported(s: f64, range: &'static str) -> EnergyError {
    EnergyError::UnsupportedRange { s, range }
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

fn zero_result(spec: &EnergySpec, n: i64) -> EnergyResult {
    EnergyResult {
        s: spec.s,
        mode: spec.mode,
        n,
        value: 0.0,
        parts: EnergyParts::default(),
        err: 0.0,
        h_values: Vec::new(),
    }
}

fn check_converged(mut r: EnergyResult, scale: f64, tol: f64) -> Result<EnergyResult, EnergyError> {
    r.value = r.parts.total();
    let bound = tol * (r.value.abs() + scale.abs()).max(f64::MIN_POSITIVE);
    if !(r.err <= bound) {
        return Err(EnergyError::QuadratureNotConverged {
            estimate: r.err,
            tolerance: bound,
        });
    }
    Ok(r)
}

fn resolve_n(spec: &EnergySpec, minimal: i64, max: i64, range: &'static str) -> Result<i64, EnergyError> {
    let n = spec.n.unwrap_or(minimal);
    if n < minimal || n > max {
        return Err(unsupported(spec.s, range));
    }
    Ok(n)
}

/// `E_s` for NLS/mKdV (either sign) or KdV.
///
/// NLS/mKdV with `σ = +1` (defocusing) or `−1` (focusing):
/// `(2 sin πs/π) ∫₁^∞ (τ²−1)^s [σ Re ln T(iτ/2) + Σ_{j≤N} (−1)^j H_{2j} τ^{−2j−1}] dτ
/// + Σ_{j≤N} C(s,j) H_{2j}`.
/// KdV:
/// `−(2 sin πs/π) ∫₁^∞ τ²(τ²−1)^s [Re ln T(iτ/2) − Σ_{j=−1}^N (−1)^j E_j τ^{−2j−3}] dτ
/// + Σ_{j=0}^N C(s,j) E_j`.
/// At integer `s` the ray term vanishes identically and is not evaluated.
pub fn energy_es(u: &GridFunction, spec: &EnergySpec) -> Result<EnergyResult, EnergyError> {
    match spec.mode {
        Mode::Kdv => kdv_energy(u, spec),
        _ => nls_energy(u, spec),
    }
}

fn nls_energy(u: &GridFunction, spec: &EnergySpec) -> Result<EnergyResult, EnergyError> {
    const RANGE: &str = "−1/2 < s < 3 with floor(s) ≤ N ≤ 2";
    let s = spec.s;
    if !(s > -0.5 && s < 3.0) {
        return Err(unsupported(s, RANGE));
    }
    let n = resolve_n(spec, s.floor().max(-1.0) as i64, 2, RANGE)?;
    if u.sup_norm() == 0.0 {
        return Ok(zero_result(spec, n));
    }
    let mode = spec.mode;
    let sigma = mode.sigma();
    let subtract = spec.quad.quadratic_subtraction;
    // H_{2j} for j ≤ 2, minus the quadratic part when it is added separately
    let mut h = Vec::new();
    let mut h_values = Vec::new();
    for j in 0..=2i64 {
        let full = h_exact_mode(2 * j, mode, u)?;
        h_values.push(HValue {
            index: 2 * j,
            value: full,
        });
        h.push(if subtract {
            full - h_component(2 * j, 2, u)?
        } else {
            full
        });
    }
    h.push(h_truncated(6, mode, u, !subtract)?);
    let sign = |j: i64| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut parts = EnergyParts {
        correction: (0..=n).map(|j| binom(s, j as usize) * h[j as usize]).sum(),
        quadratic: if subtract { sobolev_norm_sq(u, s) } else { 0.0 },
        ..Default::default()
    };
    let mut err = 0.0;
    if !is_integer(s) {
        let prob = ScatteringProblem::with_config(u.clone(), mode.into(), spec.quad.solver.clone())?;
        if mode == Mode::Focusing && spec.quad.pole_check {
            ensure_no_pole_on_ray(&prob, &spec.quad)?;
        }
        let hs = h.clone();
        let bracket = move |tau: f64, smp: &ScatteringSample| -> f64 {
            let mut v = -sigma * smp.tinv.norm().ln();
            if subtract {
                v += t2_quadratic(u, u, C::new(0.0, 0.5 * tau)).re;
            }
            for j in 0..=n {
                v += sign(j) * hs[j as usize] * tau.powi(-(2 * j as i32) - 1);
            }
            v
        };
        let ray = RayProblem {
            weight: RayWeight { b: s, p: 0.0 },
            pref: 2.0 * (PI * s).sin() / PI,
            bracket: &bracket,
            tail: ((n + 1)..=3)
                .map(|j| (-sign(j) * h[j as usize], (2 * j + 1) as f64))
                .collect(),
            omitted: (next_coefficient(&h), 9.0),
        };
        let rv = integrate_ray(&prob, &ray, &spec.quad)?;
        parts.contour = rv.contour;
        parts.tail = rv.tail;
        err = rv.err;
    }
    let scale = sobolev_norm_sq(u, s);
    check_converged(
        EnergyResult {
            s,
            mode,
            n,
            value: 0.0,
            parts,
            err,
            h_values,
        },
        scale,
        spec.quad.tol,
    )
}

fn kdv_energy(u: &GridFunction, spec: &EnergySpec) -> Result<EnergyResult, EnergyError> {
    const RANGE: &str = "−1 < s < 3 with floor(s) ≤ N ≤ 3";
    let s = spec.s;
    if !(s > -1.0 && s < 3.0) {
        return Err(unsupported(s, RANGE));
    }
    let n = resolve_n(spec, s.floor() as i64, 3, RANGE)?;
    let e: Vec<f64> = (-1..=3)
        .map(|k| kdv_poly_energy(k, u))
        .collect::<Result<_, _>>()?;
    let ek = |k: i64| e[(k + 1) as usize];
    if u.sup_norm() == 0.0 {
        return Ok(zero_result(spec, n));
    }
    let h_values = (-1..=3)
        .map(|k| HValue {
            index: k,
            value: ek(k),
        })
        .collect();
    let sign = |j: i64| if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut parts = EnergyParts {
        correction: (0..=n).map(|j| binom(s, j as usize) * ek(j)).sum(),
        ..Default::default()
    };
    let mut err = 0.0;
    if !is_integer(s) {
        let prob = ScatteringProblem::with_config(u.clone(), Mode::Kdv.into(), spec.quad.solver.clone())?;
        if spec.quad.pole_check {
            ensure_no_pole_on_ray(&prob, &spec.quad)?;
        }
        let bracket = move |tau: f64, smp: &ScatteringSample| -> f64 {
            let mut v = -smp.tinv.norm().ln();
            for j in -1..=n {
                v -= sign(j) * ek(j) * tau.powi(-(2 * j as i32) - 3);
            }
            v
        };
        let ray = RayProblem {
            weight: RayWeight { b: s, p: 2.0 },
            pref: -2.0 * (PI * s).sin() / PI,
            bracket: &bracket,
            tail: ((n + 1)..=3)
                .map(|j| (sign(j) * ek(j), (2 * j + 3) as f64))
                .collect(),
            omitted: (next_coefficient(&e), 11.0),
        };
        let rv = integrate_ray(&prob, &ray, &spec.quad)?;
        parts.contour = rv.contour;
        parts.tail = rv.tail;
        err = rv.err;
    }
    let scale = sobolev_norm_sq(u, s);
    check_converged(
        EnergyResult {
            s,
            mode: Mode::Kdv,
            n,
            value: 0.0,
            parts,
            err,
            h_values,
        },
        scale,
        spec.quad.tol,
    )
}

/// `−∫ ξ(1+ξ²)^{s−1/2} |û|² dξ`, the quadratic part of `P_s`.
pub fn momentum_quadratic(u: &GridFunction, s: f64) -> f64 {
    let sp = to_spectral(u);
    let g = *u.grid();
    -(0..g.len())
        .map(|m| {
            let xi = g.freq(m);
            xi * (1.0 + xi * xi).powf(s - 0.5) * sp.coeffs()[m].norm_sqr()
        })
        .sum::<f64>()
        * g.dxi()
}

/// Generalized momentum `P_s` for NLS/mKdV:
/// `(2 cos πs/π) ∫₁^∞ τ(τ²−1)^{s−1/2} [σ Im ln T(iτ/2) − Σ_{j≤N} (−1)^j H_{2j+1} τ^{−2j−2}] dτ
/// + Σ_{j≤N} C(s−1/2, j) H_{2j+1}` with `N = floor(s − 1/2)`.
pub fn momentum_ps(u: &GridFunction, spec: &EnergySpec) -> Result<EnergyResult, EnergyError> {
    const RANGE: &str = "−1/2 < s < 5/2 with floor(s−1/2) ≤ N ≤ 2, NLS/mKdV only";
    let s = spec.s;
    if spec.mode == Mode::Kdv || !(s > -0.5 && s < 2.5) {
        return Err(unsupported(s, RANGE));
    }
    let n = resolve_n(spec, (s - 0.5).floor() as i64, 2, RANGE)?;
    if u.sup_norm() == 0.0 {
        return Ok(zero_result(spec, n));
    }
    let mode = spec.mode;
    let sigma = mode.sigma();
    let subtract = spec.quad.quadratic_subtraction;
    let mut h = Vec::new();
    let mut h_values = Vec::new();
    for j in 0..=2i64 {
        let full = h_exact_mode(2 * j + 1, mode, u)?;
        h_values.push(HValue {
            index: 2 * j + 1,
            value: full,
        });
        h.push(if subtract {
            full - h_component(2 * j + 1, 2, u)?
        } else {
            full
        });
    }
    h.push(h_truncated(7, mode, u, !subtract)?);
    let sign = |j: i64| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut parts = EnergyParts {
        correction: (0..=n).map(|j| binom(s - 0.5, j as usize) * h[j as usize]).sum(),
        quadratic: if subtract { momentum_quadratic(u, s) } else { 0.0 },
        ..Default::default()
    };
    let mut err = 0.0;
    if !is_integer(s - 0.5) {
        let prob = ScatteringProblem::with_config(u.clone(), mode.into(), spec.quad.solver.clone())?;
        if mode == Mode::Focusing && spec.quad.pole_check {
            ensure_no_pole_on_ray(&prob, &spec.quad)?;
        }
        let hs = h.clone();
        let bracket = move |tau: f64, smp: &ScatteringSample| -> f64 {
            let mut v = -sigma * smp.tinv.arg();
            if subtract {
                v += t2_quadratic(u, u, C::new(0.0, 0.5 * tau)).im;
            }
            for j in 0..=n {
                v -= sign(j) * hs[j as usize] * tau.powi(-(2 * j as i32) - 2);
            }
            v
        };
        let ray = RayProblem {
            weight: RayWeight { b: s - 0.5, p: 1.0 },
            pref: 2.0 * (PI * s).cos() / PI,
            bracket: &bracket,
            tail: ((n + 1)..=3)
                .map(|j| (sign(j) * h[j as usize], (2 * j + 2) as f64))
                .collect(),
            omitted: (next_coefficient(&h), 10.0),
        };
        let rv = integrate_ray(&prob, &ray, &spec.quad)?;
        parts.contour = rv.contour;
        parts.tail = rv.tail;
        err = rv.err;
    }
    let scale = {
        let sp = to_spectral(u);
        let g = *u.grid();
        (0..g.len())
            .map(|m| {
                let xi = g.freq(m);
                xi.abs() * (1.0 + xi * xi).powf(s - 0.5) * sp.coeffs()[m].norm_sqr()
            })
            .sum::<f64>()
            * g.dxi()
    };
    check_converged(
        EnergyResult {
            s,
            mode,
            n,
            value: 0.0,
            parts,
            err,
            h_values,
        },
        scale,
        spec.quad.tol,
    )
}

/// Real-line side of a trace formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    /// Line integral.
    pub line: f64,
    /// Pole sum.
    pub poles: f64,
    /// `line + poles`.
    pub value: f64,
    /// Quadrature and solver error estimate of the line integral.
    pub err: f64,
    /// Largest `|ξ|` reached by the sweep.
    pub xi_max: f64,
}

/// `(1/π)∫(1+ξ²)^s (−σ Re ln T(ξ/2)) dξ + 2 Σ m_k Ξ_s(2z_k)` for NLS/mKdV and
/// `−(1/π)∫ξ²(1+ξ²)^s Re ln T(ξ/2) dξ + 2 Σ m_k Ξ_s(2κ_k)` for KdV with
/// poles `iκ_k`.
pub fn trace_line_side(
    u: &GridFunction,
    spec: &EnergySpec,
    poles: Option<&PoleSet>,
) -> Result<TraceResult, EnergyError> {
    let s = spec.s;
    let mode = spec.mode;
    let kdv = mode == Mode::Kdv;
    if !(s > if kdv { -1.0 } else { -0.5 }) || !s.is_finite() {
        return Err(unsupported(s, "s > −1/2 (NLS/mKdV) or s > −1 (KdV)"));
    }
    let mut pole_sum = 0.0;
    for p in poles.map(|p| p.poles.as_slice()).unwrap_or(&[]) {
        let m = f64::from(p.multiplicity);
        pole_sum += 2.0
            * m
            * if kdv {
                xi_s_kdv(2.0 * p.z.im, s)?
            } else {
                xi_s(2.0 * p.z, s)?
            };
    }
    if u.sup_norm() == 0.0 {
        return Ok(TraceResult {
            line: 0.0,
            poles: pole_sum,
            value: pole_sum,
            err: 0.0,
            xi_max: 0.0,
        });
    }
    let prob = ScatteringProblem::with_config(u.clone(), mode.into(), spec.quad.solver.clone())?;
    let sigma = mode.sigma();
    let weight = move |xi: f64| -> f64 {
        let w = (1.0 + xi * xi).powf(s) / PI;
        if kdv {
            xi * xi * w
        } else {
            sigma * w
        }
    };
    let (line, err, xi_max) = line_integral(&prob, &weight, spec.quad.tol, pole_sum.abs())?;
    Ok(TraceResult {
        line,
        poles: pole_sum,
        value: line + pole_sum,
        err,
        xi_max,
    })
}

/// `∫ weight(ξ) ln|T⁻¹(ξ/2)| dξ` by adaptive panels that grow outward until
/// the outermost panels are negligible. The tolerance is relative to the
/// larger of the integral and `scale`.
fn line_integral(
    prob: &ScatteringProblem,
    weight: &(dyn Fn(f64) -> f64 + Sync),
    tol: f64,
    scale: f64,
) -> Result<(f64, f64, f64), EnergyError> {
    const XI_CAP: f64 = 512.0;
    let hi_rule = gauss_legendre(16);
    let lo_rule = gauss_legendre(8);
    // per panel: (value, quadrature error, solver error)
    let eval_panels = |panels: &[(f64, f64)]| -> Result<Vec<(f64, f64, f64)>, EnergyError> {
        let mut zs = Vec::new();
        for &(a, b) in panels {
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, _) in hi_rule.iter().chain(lo_rule.iter()) {
                zs.push(C::new(0.5 * (c + r * x), 0.0));
            }
        }
        let smp = prob.transmission_batch(&zs)?;
        let k = hi_rule.len() + lo_rule.len();
        Ok(panels
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
                let mut hi = 0.0;
                let mut lo = 0.0;
                let mut serr = 0.0;
                for (j, &(x, w)) in hi_rule.iter().chain(lo_rule.iter()).enumerate() {
                    let xi = c + r * x;
                    let sm = &smp[i * k + j];
                    let v = w * r * weight(xi) * sm.tinv.norm().ln();
                    if j < hi_rule.len() {
                        hi += v;
                        // round-off in ln|T⁻¹| is at least a few ulps
                        serr += (w * r * weight(xi)).abs() * (sm.err / sm.tinv.norm()).max(1e-14);
                    } else {
                        lo += v;
                    }
                }
                (hi, (hi - lo).abs(), serr)
            })
            .collect())
    };
    // bisect panels until the quadrature error meets its share of the
    // tolerance or falls to the solver noise level; solver error is
    // accumulated but does not drive refinement
    let refine = |panels: Vec<(f64, f64)>, abs_tol: f64| -> Result<(f64, f64), EnergyError> {
        let mut total = 0.0;
        let mut err = 0.0;
        let mut todo: Vec<(f64, f64, u32)> = panels.into_iter().map(|(a, b)| (a, b, 0)).collect();
        while !todo.is_empty() {
            let spans: Vec<(f64, f64)> = todo.iter().map(|&(a, b, _)| (a, b)).collect();
            let vals = eval_panels(&spans)?;
            let mut next = Vec::new();
            for (&(a, b, depth), (v, qe, se)) in todo.iter().zip(vals) {
                let share = abs_tol * (b - a) / 8.0;
                if qe <= share.max(1e-17) || qe <= 4.0 * se || depth >= 12 {
                    total += v;
                    err += qe + se;
                } else {
                    let m = 0.5 * (a + b);
                    next.push((a, m, depth + 1));
                    next.push((m, b, depth + 1));
                }
            }
            todo = next;
        }
        Ok((total, err))
    };
    let initial: Vec<(f64, f64)> = (-8..8).map(|k| (k as f64, k as f64 + 1.0)).collect();
    let first = eval_panels(&initial)?;
    let mut total: f64 = first.iter().map(|v| v.0).sum();
    let abs_tol = 0.1 * tol * total.abs().max(scale).max(1e-300);
    let mut err = 0.0;
    let mut retry = Vec::new();
    total = 0.0;
    for (&(a, b), (v, qe, se)) in initial.iter().zip(first) {
        if qe <= abs_tol * (b - a) / 8.0 || qe <= 4.0 * se {
            total += v;
            err += qe + se;
        } else {
            let m = 0.5 * (a + b);
            retry.push((a, m));
            retry.push((m, b));
        }
    }
    let (v, e) = refine(retry, abs_tol)?;
    total += v;
    err += e;
    let mut reach: f64 = 8.0;
    loop {
        let width = (reach / 4.0).max(1.0);
        let outer = vec![(-reach - width, -reach), (reach, reach + width)];
        let (v, e) = refine(outer, abs_tol)?;
        total += v;
        err += e;
        reach += width;
        if v.abs() <= 1e-3 * abs_tol || (v.abs() <= e && e <= 1e-2 * abs_tol) || reach >= XI_CAP {
            break;
        }
    }
    Ok((total, err, reach))
}

/// Spectral coefficients inside the effective band `|k| ≤ B`, indexed by
/// `k + B`, with `2B + 1 ≤ max_modes`.
fn band(u: &GridFunction, max_modes: usize) -> (Vec<C>, Vec<f64>, i64) {
    let sp = to_spectral(u);
    let g = *u.grid();
    let amax = sp.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cap = ((max_modes.max(1) - 1) / 2) as i64;
    let mut b = 0i64;
    for m in 0..g.len() {
        let k = g.wavenumber(m);
        if sp.coeffs()[m].norm() > 1e-15 * amax {
            b = b.max(k.abs());
        }
    }
    let b = b.min(cap).min(g.len() as i64 / 2 - 1);
    let n = g.len() as i64;
    let coeffs = (-b..=b).map(|k| sp.coeffs()[k.rem_euclid(n) as usize]).collect();
    let xis = (-b..=b).map(|k| k as f64 * g.dxi()).collect();
    (coeffs, xis, b)
}

/// Quartic part of the defocusing `E_s`:
/// `(1/4π) ∫_{ξ₁+ξ₂=η₁+η₂} [f(ξ₁)+f(ξ₂)−f(η₁)−f(η₂)] / [(ξ₁−η₁)(ξ₁−η₂)]
/// conj(û(ξ₁)û(ξ₂)) û(η₁)û(η₂)` with `f(ξ) = (1+ξ²)^s`, summed over the grid
/// frequencies inside the effective bandwidth.
pub fn quartic_term(u: &GridFunction, s: f64) -> f64 {
    quartic_term_with_bandwidth(u, s, DEFAULT_KERNEL_MODES)
}

/// [`quartic_term`] with an explicit cap on the number of modes.
pub fn quartic_term_with_bandwidth(u: &GridFunction, s: f64, max_modes: usize) -> f64 {
    if u.sup_norm() == 0.0 {
        return 0.0;
    }
    let (c, xi, b) = band(u, max_modes);
    let f: Vec<f64> = xi.iter().map(|x| (1.0 + x * x).powf(s)).collect();
    let f1: Vec<f64> = xi
        .iter()
        .map(|x| 2.0 * s * x * (1.0 + x * x).powf(s - 1.0))
        .collect();
    let f2: Vec<f64> = xi
        .iter()
        .map(|x| {
            let q = 1.0 + x * x;
            2.0 * s * q.powf(s - 1.0) + 4.0 * s * (s - 1.0) * x * x * q.powf(s - 2.0)
        })
        .collect();
    let w = (2 * b + 1) as usize;
    let dxi = if w > 1 { xi[1] - xi[0] } else { u.grid().dxi() };
    use rayon::prelude::*;
    let acc: C = (0..w)
        .into_par_iter()
        .map(|k1| {
            let mut acc = C::new(0.0, 0.0);
            for k2 in 0..w {
                let lhs = (c[k1] * c[k2]).conj();
                for l1 in 0..w {
                    let l2 = k1 as i64 + k2 as i64 - l1 as i64;
                    if l2 < 0 || l2 >= w as i64 {
                        continue;
                    }
                    let l2 = l2 as usize;
                    let kern = if k1 != l1 && k1 != l2 {
                        (f[k1] + f[k2] - f[l1] - f[l2]) / ((xi[k1] - xi[l1]) * (xi[k1] - xi[l2]))
                    } else if k1 == l1 && k1 == l2 {
                        f2[k1]
                    } else {
                        (f1[k1] - f1[k2]) / (xi[k1] - xi[k2])
                    };
                    acc += lhs * c[l1] * c[l2] * kern;
                }
            }
            acc
        })
        .collect::<Vec<C>>()
        .into_iter()
        .sum();
    acc.re * dxi.powi(3) / (4.0 * PI)
}

/// Cubic part of the KdV `E_s`:
/// `(2/(3√(2π))) ∫_{ξ₁+ξ₂+ξ₃=0} [Σ (1+ξ_i²)^s ξ_i] / (ξ₁ξ₂ξ₃) û(ξ₁)û(ξ₂)û(ξ₃)`
/// over the grid frequencies inside the effective bandwidth.
pub fn kdv_cubic_term(u: &GridFunction, s: f64) -> f64 {
    kdv_cubic_term_with_bandwidth(u, s, DEFAULT_KERNEL_MODES)
}

/// [`kdv_cubic_term`] with an explicit cap on the number of modes.
pub fn kdv_cubic_term_with_bandwidth(u: &GridFunction, s: f64, max_modes: usize) -> f64 {
    if u.sup_norm() == 0.0 {
        return 0.0;
    }
    let (c, xi, b) = band(u, max_modes);
    let g: Vec<f64> = xi.iter().map(|x| (1.0 + x * x).powf(s) * x).collect();
    let g1: Vec<f64> = xi
        .iter()
        .map(|x| (1.0 + x * x).powf(s - 1.0) * (1.0 + (2.0 * s + 1.0) * x * x))
        .collect();
    let w = 2 * b + 1;
    let zero = b as usize;
    let dxi = if w > 1 { xi[1] - xi[0] } else { u.grid().dxi() };
    let mut acc = C::new(0.0, 0.0);
    for k1 in 0..w {
        for k2 in 0..w {
            // index of −ξ₁−ξ₂
            let k3 = 3 * b - k1 - k2;
            if k3 < 0 || k3 >= w {
                continue;
            }
            let (i1, i2, i3) = (k1 as usize, k2 as usize, k3 as usize);
            let zeros = [i1, i2, i3].iter().filter(|&&i| i == zero).count();
            let kern = match zeros {
                0 => (g[i1] + g[i2] + g[i3]) / (xi[i1] * xi[i2] * xi[i3]),
                3 => 3.0 * s,
                _ => {
                    let a = if i1 != zero { i1 } else { i2 };
                    (g1[a] - 1.0) / (xi[a] * xi[a])
                }
            };
            acc += c[i1] * c[i2] * c[i3] * kern;
        }
    }
    2.0 / (3.0 * (2.0 * PI).sqrt()) * acc.re * dxi * dxi
}
