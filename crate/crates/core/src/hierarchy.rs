//! NLS hierarchy: the `(p_k, r_k)` recursion on differential polynomials,
//! calibrated Hamiltonian densities, and explicit formulas for the
//! quadratic, quartic and sextic parts of `H_j`.
//!
//! The recursion runs in the focusing form
//! `p_{k+1} = (i/2) p_k′ + r_k u`, `r_{k+1}′ = i(p_{k+1} ū − p̄_{k+1} u)`
//! with `(p_0, r_0) = (0, 1)`. Defocusing densities substitute `ū → −ū`
//! and KdV densities substitute `ū → 1`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::diffpoly::{DiffPolynomial, Factor, GaussRational, Monomial};
use crate::error::HierarchyError;
use crate::grid::{spectral_derivative, to_spectral, GridFunction};
use crate::mode::Mode;

/// Default cap on the Hamiltonian index `k`.
pub const DEFAULT_K_CAP: usize = 8;

/// Largest `j` for which `h_exact` is complete.
pub const H_EXACT_MAX: i64 = 5;

/// `(p_k, r_k)` in focusing form together with the reporting mode.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyState {
    k: usize,
    p: DiffPolynomial,
    r: DiffPolynomial,
    mode: Mode,
}

impl HierarchyState {
    /// `(p_0, r_0) = (0, 1)`.
    pub fn initial(mode: Mode) -> Self {
        Self {
            k: 0,
            p: DiffPolynomial::zero(),
            r: DiffPolynomial::constant(GaussRational::one()),
            mode,
        }
    }

    /// Index `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Mode used by [`p`](Self::p) and [`r`](Self::r).
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `p_k` with the mode substitution applied.
    pub fn p(&self) -> DiffPolynomial {
        substitute(&self.p, self.mode)
    }

    /// `r_k` with the mode substitution applied.
    pub fn r(&self) -> DiffPolynomial {
        substitute(&self.r, self.mode)
    }

    /// `p_k` in focusing form.
    pub fn p_focusing(&self) -> &DiffPolynomial {
        &self.p
    }

    /// `r_k` in focusing form.
    pub fn r_focusing(&self) -> &DiffPolynomial {
        &self.r
    }
}

fn substitute(p: &DiffPolynomial, mode: Mode) -> DiffPolynomial {
    match mode {
        Mode::Focusing => p.clone(),
        Mode::Defocusing => p.negate_ubar(),
        Mode::Kdv => p.ubar_to_one(),
    }
}

/// One step of the recursion.
pub fn recursion_step(state: &HierarchyState) -> Result<HierarchyState, HierarchyError> {
    let half_i = GaussRational::ratio(1, 2);
    let half_i = &half_i * &GaussRational::i();
    let p = &state.p.derivative().scale(&half_i) + &(&state.r * &DiffPolynomial::u(0));
    let pbar = p.conj();
    let rhs = (&(&p * &DiffPolynomial::ubar(0)) - &(&pbar * &DiffPolynomial::u(0)))
        .scale(&GaussRational::i());
    let r = rhs
        .antiderivative()
        .ok_or(HierarchyError::NonIntegrableRhs { step: state.k + 1 })?;
    Ok(HierarchyState {
        k: state.k + 1,
        p,
        r,
        mode: state.mode,
    })
}

fn cache() -> &'static Mutex<Vec<HierarchyState>> {
    static CACHE: OnceLock<Mutex<Vec<HierarchyState>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![HierarchyState::initial(Mode::Focusing)]))
}

/// `(p_k, r_k)` for the given mode, memoized in focusing form.
pub fn state(k: usize, mode: Mode) -> Result<HierarchyState, HierarchyError> {
    let mut c = cache().lock().unwrap_or_else(|e| e.into_inner());
    while c.len() <= k {
        let next = recursion_step(c.last().expect("cache is seeded"))?;
        c.push(next);
    }
    let mut s = c[k].clone();
    s.mode = mode;
    Ok(s)
}

/// A Hamiltonian density and its calibration constant.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedDensity {
    /// Index `k`.
    pub k: usize,
    /// Mode of the substitution.
    pub mode: Mode,
    /// `−(k+1)^{-1} tr(Q_{k+2} diag(−i, i)) = 2 r_{k+2}/(k+1)` after substitution.
    pub raw: DiffPolynomial,
    /// Rational factor applied to `raw` (one for KdV).
    pub constant: BigRational,
    /// `constant · raw`.
    pub density: DiffPolynomial,
}

fn calibration_cache() -> &'static Mutex<HashMap<(usize, Mode), CalibratedDensity>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Mode), CalibratedDensity>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Hamiltonian density for `H_k` with `k ≤ DEFAULT_K_CAP`.
///
/// NLS modes are calibrated so the quadratic part equals `i^k ∫ u^{(k)} ū`
/// modulo total derivatives. KdV densities are returned uncalibrated.
pub fn hamiltonian_density(k: usize, mode: Mode) -> Result<CalibratedDensity, HierarchyError> {
    hamiltonian_density_capped(k, mode, DEFAULT_K_CAP)
}

/// As [`hamiltonian_density`] with an explicit cap.
pub fn hamiltonian_density_capped(
    k: usize,
    mode: Mode,
    cap: usize,
) -> Result<CalibratedDensity, HierarchyError> {
    if k > cap {
        return Err(HierarchyError::IndexTooLarge { k, cap });
    }
    if let Some(d) = calibration_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(k, mode))
    {
        return Ok(d.clone());
    }
    let s = state(k + 2, mode)?;
    let raw = s.r().scale(&GaussRational::ratio(2, k as i64 + 1));
    let constant = match mode {
        Mode::Kdv => BigRational::from_integer(1.into()),
        _ => calibration_constant(k, &raw)?,
    };
    let density = raw.scale(&GaussRational::real(constant.clone()));
    let out = CalibratedDensity {
        k,
        mode,
        raw,
        constant,
        density,
    };
    calibration_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert((k, mode), out.clone());
    Ok(out)
}

fn calibration_constant(k: usize, raw: &DiffPolynomial) -> Result<BigRational, HierarchyError> {
    let quad = raw.homogeneous(2).ibp_normal_form();
    let target = Monomial::new(vec![Factor::u(k as u32), Factor::ubar(0)]);
    if quad.len() != 1 {
        return Err(HierarchyError::Calibration { k });
    }
    let c = quad.coeff(&target);
    let inv = c.inv().ok_or(HierarchyError::Calibration { k })?;
    let ratio = &GaussRational::i_pow(k as i64) * &inv;
    if !ratio.is_real() || ratio.re.is_zero() {
        return Err(HierarchyError::Calibration { k });
    }
    Ok(ratio.re)
}

/// Spectral derivatives of `u` and `ū` up to a fixed order.
struct Jet {
    u: Vec<GridFunction>,
    ubar: Vec<GridFunction>,
}

impl Jet {
    fn new(u: &GridFunction, order: u32) -> Self {
        let d: Vec<GridFunction> = (0..=order)
            .map(|k| if k == 0 { u.clone() } else { spectral_derivative(u, k) })
            .collect();
        let ubar = d.iter().map(|f| f.conj()).collect();
        Self { u: d, ubar }
    }

    fn get(&self, f: Factor) -> &GridFunction {
        if f.conj {
            &self.ubar[f.order as usize]
        } else {
            &self.u[f.order as usize]
        }
    }
}

/// `∫ p(u) dx` with spectral derivatives.
pub fn eval_density(p: &DiffPolynomial, u: &GridFunction) -> Complex64 {
    let jet = Jet::new(u, p.max_order());
    let n = u.grid().len();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (m, c) in p.iter() {
        let c = c.to_complex();
        let mut term = vec![c; n];
        for &f in m.factors() {
            for (t, v) in term.iter_mut().zip(jet.get(f).values()) {
                *t *= v;
            }
        }
        for (a, t) in acc.iter_mut().zip(term) {
            *a += t;
        }
    }
    acc.iter().sum::<Complex64>() * u.grid().h()
}

fn i_pow(j: i64) -> Complex64 {
    match j.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// All compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product_integral(fs: &[&GridFunction]) -> Complex64 {
    let n = fs[0].grid().len();
    (0..n)
        .map(|i| fs.iter().map(|f| f.values()[i]).product::<Complex64>())
        .sum::<Complex64>()
        * fs[0].grid().h()
}

/// `H_{j,2}`, `H_{j,4}` or `H_{j,6}` of `u`.
///
/// The sextic sum carries the sign `(−1)^{α_3+α_4+α_5}`, the parity of the
/// derivatives falling on conjugated factors.
pub fn h_component(j: i64, degree: u32, u: &GridFunction) -> Result<f64, HierarchyError> {
    let min = match degree {
        2 => 0,
        4 => 2,
        6 => 4,
        _ => {
            return Err(HierarchyError::Domain {
                j,
                reason: "degree must be 2, 4 or 6",
            })
        }
    };
    if j < min {
        return Err(HierarchyError::Domain {
            j,
            reason: "index below the minimum for this degree",
        });
    }
    Ok(match degree {
        2 => h2(j, u),
        4 => h4(j, u),
        _ => h6(j, u),
    })
}

fn h2(j: i64, u: &GridFunction) -> f64 {
    let g = *u.grid();
    let s = to_spectral(u);
    let mut acc = 0.0;
    for (m, c) in s.coeffs().iter().enumerate() {
        if j > 0 && m == g.nyquist() {
            continue;
        }
        acc += (-g.freq(m)).powi(j as i32) * c.norm_sqr();
    }
    acc * g.dxi()
}

fn h4(j: i64, u: &GridFunction) -> f64 {
    let n = (j - 2) as usize;
    let jet = Jet::new(u, n as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in compositions(n, 3) {
        let v = product_integral(&[
            &jet.u[a[1]],
            &jet.u[a[2]],
            &jet.ubar[a[0]],
            &jet.ubar[0],
        ]);
        acc += v * sign(a[0]);
    }
    -(i_pow(j) * acc).re
}

fn h6(j: i64, u: &GridFunction) -> f64 {
    let n = (j - 4) as usize;
    let jet = Jet::new(u, n as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in compositions(n, 5) {
        let s = sign(a[2] + a[3] + a[4]);
        let first = product_integral(&[
            &jet.u[a[0]],
            &jet.u[a[1]],
            &jet.u[0],
            &jet.ubar[a[2]],
            &jet.ubar[a[3]],
            &jet.ubar[a[4]],
        ]);
        let inner = jet.u[0]
            .zip_map(&jet.ubar[a[3]], |x, y| x * y)
            .zip_map(&jet.ubar[a[4]], |x, y| x * y);
        let inner = if a[2] == 0 {
            inner
        } else {
            spectral_derivative(&inner, a[2] as u32)
        };
        let second = product_integral(&[&jet.u[a[0]], &jet.u[a[1]], &jet.ubar[0], &inner]);
        acc += (first + second) * s;
    }
    (i_pow(j) * acc).re
}

/// `H_j = H_{j,2} + H_{j,4} + H_{j,6}` for `j ≤ 5`, in the defocusing sign
/// convention.
pub fn h_exact(j: i64, u: &GridFunction) -> Result<f64, HierarchyError> {
    h_exact_mode(j, Mode::Defocusing, u)
}

/// [`h_exact`] with the focusing convention `H_{j,2} − H_{j,4} + H_{j,6}`
/// available through `mode`.
pub fn h_exact_mode(j: i64, mode: Mode, u: &GridFunction) -> Result<f64, HierarchyError> {
    if !(0..=H_EXACT_MAX).contains(&j) {
        return Err(HierarchyError::Domain {
            j,
            reason: "h_exact is complete only for 0 ≤ j ≤ 5",
        });
    }
    if mode == Mode::Kdv {
        return Err(HierarchyError::Domain {
            j,
            reason: "use kdv_poly_energy for KdV",
        });
    }
    let mut v = h2(j, u);
    if j >= 2 {
        v += mode.sigma() * h4(j, u);
    }
    if j >= 4 {
        v += h6(j, u);
    }
    Ok(v)
}

/// KdV polynomial energies `E_{−1}, …, E_3` of a real potential.
pub fn kdv_poly_energy(k: i64, u: &GridFunction) -> Result<f64, HierarchyError> {
    if !u.is_real() {
        return Err(HierarchyError::ComplexInput);
    }
    let re = |f: &GridFunction| -> Vec<f64> { f.values().iter().map(|v| v.re).collect() };
    let h = u.grid().h();
    let u0 = re(u);
    let integrate = |f: &dyn Fn(usize) -> f64| (0..u0.len()).map(f).sum::<f64>() * h;
    match k {
        -1 => Ok(integrate(&|i| u0[i])),
        0 => Ok(integrate(&|i| u0[i] * u0[i])),
        1 => {
            let u1 = re(&spectral_derivative(u, 1));
            Ok(integrate(&|i| u1[i] * u1[i] + 2.0 * u0[i].powi(3)))
        }
        2 => {
            let u1 = re(&spectral_derivative(u, 1));
            let u2 = re(&spectral_derivative(u, 2));
            Ok(integrate(&|i| {
                u2[i] * u2[i] + 10.0 * u0[i] * u1[i] * u1[i] + 5.0 * u0[i].powi(4)
            }))
        }
        3 => {
            let u1 = re(&spectral_derivative(u, 1));
            let u2 = re(&spectral_derivative(u, 2));
            let u3 = re(&spectral_derivative(u, 3));
            Ok(integrate(&|i| {
                u3[i] * u3[i]
                    + 14.0 * u0[i] * u2[i] * u2[i]
                    + 70.0 * u0[i] * u0[i] * u1[i] * u1[i]
                    + 14.0 * u0[i].powi(5)
            }))
        }
        _ => Err(HierarchyError::Domain {
            j: k,
            reason: "KdV polynomial energies are available for −1 ≤ k ≤ 3",
        }),
    }
}
