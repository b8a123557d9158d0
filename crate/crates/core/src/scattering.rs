//! Direct scattering: `T⁻¹(z)` for the NLS/mKdV and KdV systems, the
//! renormalized KdV transmission, homogeneous components and zeros of `T⁻¹`.
//!
//! The NLS system is integrated in the gauge `a′ = u c`, `c′ = 2iz c + v̄ a`
//! from `(a, c) = (1, 0)`, so `T⁻¹(z) = a(+∞)`. KdV uses `a′ = c`,
//! `c′ = 2iz c + u a` and reads `T⁻¹ = a − c/(2iz)` at the right end.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ScatteringError;
use crate::grid::{to_physical, to_spectral, GridFunction};
use crate::mode::Mode;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

/// One-step propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Exponential midpoint rule, order 2.
    Midpoint,
    /// Two-point Gauss Magnus expansion, order 4.
    Magnus4,
}

impl Integrator {
    fn order(self) -> i32 {
        match self {
            Integrator::Midpoint => 2,
            Integrator::Magnus4 => 4,
        }
    }

    fn nodes(self) -> &'static [f64] {
        const MID: [f64; 1] = [0.5];
        const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
        match self {
            Integrator::Midpoint => &MID,
            Integrator::Magnus4 => &GAUSS,
        }
    }
}

/// Numerical settings for the ODE solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Minimum substeps per grid cell.
    pub min_substeps: usize,
    /// Maximum substeps per grid cell.
    pub max_substeps: usize,
    /// Relative tolerance for the step-halving estimate.
    pub tol: f64,
    /// Upper bound on `h |z|` per substep.
    pub step_bound: f64,
    /// Magnitude that trips the overflow guard.
    pub overflow_bound: f64,
    /// Samples below `support_cutoff · sup|u|` count as outside the support.
    pub support_cutoff: f64,
    /// Propagator.
    pub integrator: Integrator,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            min_substeps: 1,
            max_substeps: 512,
            tol: 1e-12,
            step_bound: 0.2,
            overflow_bound: 1e100,
            support_cutoff: 1e-17,
            integrator: Integrator::Magnus4,
        }
    }
}

/// Coupling of the scattering system.
#[derive(Clone, Debug, PartialEq)]
pub enum System {
    /// `v = u`.
    Defocusing,
    /// `v = −u`.
    Focusing,
    /// First-row coupling 1, second-row coupling `u`.
    Kdv,
    /// Explicit `v`.
    General(GridFunction),
}

impl From<Mode> for System {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Defocusing => System::Defocusing,
            Mode::Focusing => System::Focusing,
            Mode::Kdv => System::Kdv,
        }
    }
}

/// Node samples of the two couplings for a given substep count.
struct Samples {
    /// `p[node][cell]` and `q[node][cell]`, node index `k · n_gauss + g`.
    p: Vec<Vec<C>>,
    q: Vec<Vec<C>>,
}

/// A potential, its coupling and solver settings.
pub struct ScatteringProblem {
    u: GridFunction,
    p: GridFunction,
    q: GridFunction,
    kdv: bool,
    config: SolverConfig,
    window: (usize, usize),
    end_ratio: f64,
    cache: Mutex<HashMap<usize, Arc<Samples>>>,
}

/// `T⁻¹(z)` with an error estimate and the final Jost state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSample {
    /// Spectral parameter.
    pub z: C,
    /// `T⁻¹(z)`.
    pub tinv: C,
    /// Step-halving error estimate.
    pub err: f64,
    /// `a` at the right end.
    pub a_end: C,
    /// `c` at the right end.
    pub c_end: C,
    /// Substeps per cell used for `tinv`.
    pub substeps: usize,
}

impl ScatteringSample {
    /// `ln T(z) = −ln T⁻¹(z)`, principal branch.
    pub fn ln_t(&self) -> C {
        -self.tinv.ln()
    }
}

impl ScatteringProblem {
    /// Builds a problem with default solver settings.
    pub fn new(u: GridFunction, system: System) -> Result<Self, ScatteringError> {
        Self::with_config(u, system, SolverConfig::default())
    }

    /// Builds a problem with explicit solver settings.
    pub fn with_config(
        u: GridFunction,
        system: System,
        config: SolverConfig,
    ) -> Result<Self, ScatteringError> {
        let g = *u.grid();
        let (p, q, kdv) = match system {
            System::Defocusing => (u.clone(), u.conj(), false),
            System::Focusing => (u.clone(), u.conj().scale(-1.0), false),
            System::Kdv => {
                if !u.is_real() {
                    return Err(ScatteringError::InvalidArgument(
                        "KdV scattering needs a real potential".into(),
                    ));
                }
                (g.sample_real(|_| 1.0), u.clone(), true)
            }
            System::General(v) => {
                if v.grid() != &g {
                    return Err(ScatteringError::InvalidArgument(
                        "u and v live on different grids".into(),
                    ));
                }
                let q = v.conj();
                (u.clone(), q, false)
            }
        };
        if config.min_substeps == 0 || config.max_substeps < config.min_substeps {
            return Err(ScatteringError::InvalidArgument("bad substep range".into()));
        }
        let coupling = if kdv { &q } else { &p };
        let window = support_window(coupling, &q, config.support_cutoff);
        let sup = u.sup_norm();
        let n = g.len();
        let end_ratio = if sup > 0.0 {
            u.values()[0].norm().max(u.values()[n - 1].norm()) / sup
        } else {
            0.0
        };
        Ok(Self {
            u,
            p,
            q,
            kdv,
            config,
            window,
            end_ratio,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// The potential.
    pub fn potential(&self) -> &GridFunction {
        &self.u
    }

    /// Solver settings.
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// True for the KdV system.
    pub fn is_kdv(&self) -> bool {
        self.kdv
    }

    /// `max(|u(x_0)|, |u(x_{N−1})|) / sup|u|`, a decay diagnostic.
    pub fn end_ratio(&self) -> f64 {
        self.end_ratio
    }

    /// Grid cells `[first, last)` integrated explicitly.
    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    fn samples(&self, m: usize) -> Arc<Samples> {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = cache.get(&m) {
            return s.clone();
        }
        let s = Arc::new(node_samples(
            &self.p,
            &self.q,
            m,
            self.config.integrator,
            self.kdv,
        ));
        cache.insert(m, s.clone());
        s
    }

    fn base_substeps(&self, z: C) -> usize {
        let h = self.u.grid().h();
        let need = (h * z.norm() / self.config.step_bound).ceil() as usize;
        need.max(self.config.min_substeps).max(1)
    }

    /// Integrates with `m` substeps per cell and returns `(T⁻¹, a, c)`.
    pub fn solve_fixed(&self, z: C, m: usize) -> Result<(C, C, C), ScatteringError> {
        let s = self.samples(m);
        let h = self.u.grid().h() / m as f64;
        let d = C::new(0.0, 2.0) * z;
        let build = |p: C, q: C| -> Mat2 { [[ZERO, p], [q, d]] };
        let y = propagate(
            &s,
            &build,
            self.window,
            m,
            h,
            self.config.integrator,
            [ONE, ZERO],
            self.config.overflow_bound,
        )?;
        let tinv = if self.kdv { y[0] - y[1] / d } else { y[0] };
        Ok((tinv, y[0], y[1]))
    }

    /// `T⁻¹(z)` with adaptive substep doubling.
    pub fn transmission(&self, z: C) -> Result<ScatteringSample, ScatteringError> {
        if z.im < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(ScatteringError::InvalidArgument(format!(
                "z must lie in the closed upper half-plane, got {z}"
            )));
        }
        if self.kdv && z.norm() == 0.0 {
            return Err(ScatteringError::InvalidArgument(
                "KdV transmission is singular at z = 0".into(),
            ));
        }
        let factor = 2f64.powi(self.config.integrator.order()) - 1.0;
        let mut m = self.base_substeps(z).min(self.config.max_substeps);
        let mut coarse = self.solve_fixed(z, m)?;
        loop {
            let fine = self.solve_fixed(z, 2 * m)?;
            let err = (fine.0 - coarse.0).norm() / factor;
            let done = err <= self.config.tol * fine.0.norm().max(1.0)
                || 4 * m > self.config.max_substeps;
            if done {
                return Ok(ScatteringSample {
                    z,
                    tinv: fine.0,
                    err,
                    a_end: fine.1,
                    c_end: fine.2,
                    substeps: 2 * m,
                });
            }
            m *= 2;
            coarse = fine;
        }
    }

    /// `T⁻¹` on a batch of points, evaluated in parallel, in input order.
    pub fn transmission_batch(&self, zs: &[C]) -> Result<Vec<ScatteringSample>, ScatteringError> {
        zs.par_iter().map(|&z| self.transmission(z)).collect()
    }
}

fn support_window(a: &GridFunction, b: &GridFunction, cutoff: f64) -> (usize, usize) {
    let n = a.grid().len();
    let mag: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.norm().max(y.norm()))
        .collect();
    let sup = mag.iter().cloned().fold(0.0, f64::max);
    if sup == 0.0 {
        return (0, 0);
    }
    let first = mag.iter().position(|&v| v > cutoff * sup).unwrap_or(0);
    let last = mag.iter().rposition(|&v| v > cutoff * sup).unwrap_or(n - 1);
    (first.saturating_sub(1), (last + 1).min(n))
}

fn node_samples(p: &GridFunction, q: &GridFunction, m: usize, integ: Integrator, kdv: bool) -> Samples {
    let h = p.grid().h();
    let nodes = integ.nodes();
    let mut ps = Vec::with_capacity(m * nodes.len());
    let mut qs = Vec::with_capacity(m * nodes.len());
    for k in 0..m {
        for &c in nodes {
            let delta = (k as f64 + c) * h / m as f64;
            ps.push(if kdv {
                p.values().to_vec()
            } else {
                p.translate(-delta).into_values()
            });
            qs.push(q.translate(-delta).into_values());
        }
    }
    Samples { p: ps, q: qs }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// `exp(Ω)` for a 2×2 matrix via `e^μ (cosh δ I + sinh δ / δ · B)`.
fn expm2(o: &Mat2) -> Mat2 {
    let mu = (o[0][0] + o[1][1]) * 0.5;
    let b00 = o[0][0] - mu;
    let delta2 = b00 * b00 + o[0][1] * o[1][0];
    let mut delta = delta2.sqrt();
    if delta.re < 0.0 {
        delta = -delta;
    }
    let ep = (mu + delta).exp();
    let em = (mu - delta).exp();
    let ch = (ep + em) * 0.5;
    let sh = if delta.norm() < 1e-4 {
        mu.exp() * (ONE + delta2 / 6.0 + delta2 * delta2 / 120.0)
    } else {
        (ep - em) / (delta * 2.0)
    };
    [
        [ch + sh * b00, sh * o[0][1]],
        [sh * o[1][0], ch - sh * b00],
    ]
}

#[allow(clippy::too_many_arguments)]
fn propagate(
    s: &Samples,
    build: &dyn Fn(C, C) -> Mat2,
    window: (usize, usize),
    m: usize,
    h: f64,
    integ: Integrator,
    y0: [C; 2],
    bound: f64,
) -> Result<[C; 2], ScatteringError> {
    let mut y = y0;
    let k3 = 3f64.sqrt() / 12.0 * h * h;
    for cell in window.0..window.1 {
        for k in 0..m {
            let e = match integ {
                Integrator::Midpoint => {
                    let a = build(s.p[k][cell], s.q[k][cell]);
                    expm2(&[
                        [a[0][0] * h, a[0][1] * h],
                        [a[1][0] * h, a[1][1] * h],
                    ])
                }
                Integrator::Magnus4 => {
                    let a1 = build(s.p[2 * k][cell], s.q[2 * k][cell]);
                    let a2 = build(s.p[2 * k + 1][cell], s.q[2 * k + 1][cell]);
                    let c21 = mat_mul(&a2, &a1);
                    let c12 = mat_mul(&a1, &a2);
                    let mut o = [[ZERO; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            o[i][j] = (a1[i][j] + a2[i][j]) * (0.5 * h) + (c21[i][j] - c12[i][j]) * k3;
                        }
                    }
                    expm2(&o)
                }
            };
            y = [
                e[0][0] * y[0] + e[0][1] * y[1],
                e[1][0] * y[0] + e[1][1] * y[1],
            ];
        }
        let mag = y[0].norm().max(y[1].norm());
        if !(mag <= bound) {
            return Err(ScatteringError::OverflowGuard {
                magnitude: mag,
                bound,
            });
        }
    }
    Ok(y)
}

/// `T_2(z) = i ∫ (2z + ξ)^{-1} û(ξ) conj(v̂(ξ)) dξ` on the grid frequencies.
pub fn t2_quadratic(u: &GridFunction, v: &GridFunction, z: C) -> C {
    let g = *u.grid();
    let su = to_spectral(u);
    let sv = to_spectral(v);
    let mut acc = ZERO;
    for m in 0..g.len() {
        let xi = g.freq(m);
        acc += su.coeffs()[m] * sv.coeffs()[m].conj() / (z * 2.0 + xi);
    }
    C::new(0.0, 1.0) * acc * g.dxi()
}

/// Homogeneous components of `T⁻¹` and of `ln T⁻¹ = −ln T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousComponents {
    /// Spectral parameter.
    pub z: C,
    /// `T_{2j}(z)` for `j = 1..=max_j`.
    pub t: Vec<C>,
    /// `T̃_{2j}(z)` for `j = 1..=max_j`.
    pub t_tilde: Vec<C>,
    /// Circle radius in the coupling parameter.
    pub radius: f64,
    /// Difference between fits with `K` and `2K` circle points.
    pub residual: f64,
}

/// Largest supported `max_j` for [`homogeneous_components`].
pub const MAX_COMPONENT: usize = 6;

/// Extracts `T_{2j}` and `T̃_{2j}` by scaling the second-row coupling by a
/// complex parameter `w` on a circle and taking discrete Fourier
/// coefficients in `w`. `T_{2j}` is the coefficient of `w^j`.
pub fn homogeneous_components(
    prob: &ScatteringProblem,
    z: C,
    max_j: usize,
) -> Result<HomogeneousComponents, ScatteringError> {
    if max_j == 0 || max_j > MAX_COMPONENT {
        return Err(ScatteringError::InvalidArgument(format!(
            "max_j must be in 1..={MAX_COMPONENT}, got {max_j}"
        )));
    }
    let k = 4 * max_j + 8;
    let mut r = 1.0;
    let mut vals;
    let mut guard = 0;
    loop {
        vals = circle_values(prob, z, r, 2 * k)?;
        let dev = vals.iter().map(|v| (v - ONE).norm()).fold(0.0, f64::max);
        guard += 1;
        if guard > 60 {
            break;
        }
        if dev > 0.5 {
            r *= 0.5;
        } else if dev < 0.05 && r < 1e6 {
            r *= 2.0;
        } else {
            break;
        }
    }
    let logs: Vec<C> = vals.iter().map(|v| v.ln()).collect();
    let coeffs = |v: &[C], kk: usize, stride: usize| -> Vec<C> {
        (1..=max_j)
            .map(|j| {
                let mut acc = ZERO;
                for (i, f) in v.iter().step_by(stride).enumerate() {
                    let ang = -2.0 * PI * (j * i) as f64 / kk as f64;
                    acc += f * C::from_polar(1.0, ang);
                }
                acc / (kk as f64 * r.powi(j as i32))
            })
            .collect()
    };
    let t = coeffs(&vals, 2 * k, 1);
    let t_tilde = coeffs(&logs, 2 * k, 1);
    let t_half = coeffs(&vals, k, 2);
    let scale = t.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = t
        .iter()
        .zip(&t_half)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    let tolerance = 1e-6;
    if residual > tolerance {
        return Err(ScatteringError::IllConditionedFit {
            residual,
            tolerance,
        });
    }
    Ok(HomogeneousComponents {
        z,
        t,
        t_tilde,
        radius: r,
        residual,
    })
}

fn circle_values(prob: &ScatteringProblem, z: C, r: f64, k: usize) -> Result<Vec<C>, ScatteringError> {
    (0..k)
        .into_par_iter()
        .map(|i| {
            let w = C::from_polar(r, 2.0 * PI * i as f64 / k as f64);
            let scaled = ScatteringProblem {
                u: prob.u.clone(),
                p: prob.p.clone(),
                q: prob.q.map(|v| v * w),
                kdv: prob.kdv,
                config: prob.config.clone(),
                window: prob.window,
                end_ratio: prob.end_ratio,
                cache: Mutex::new(HashMap::new()),
            };
            Ok(scaled.transmission(z)?.tinv)
        })
        .collect()
}

/// `S(iτ) = T(iτ) e^{∫u/(2τ)}` for real `u`, from the renormalized system
/// `w₁′ = w₂`, `w₂′ = −(2τ + 2U) w₂ − U² w₁` with `U′ + 2τU = u`, so that
/// `S⁻¹ = w₁ + w₂/(2τ)` at the right end.
pub fn transmission_kdv_renormalized(
    u: &GridFunction,
    tau: f64,
    config: &SolverConfig,
) -> Result<(C, f64), ScatteringError> {
    if !u.is_real() {
        return Err(ScatteringError::InvalidArgument(
            "KdV scattering needs a real potential".into(),
        ));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ScatteringError::InvalidArgument(format!(
            "τ must be positive, got {tau}"
        )));
    }
    let g = *u.grid();
    let mut s = to_spectral(u);
    for m in 0..g.len() {
        let xi = g.freq(m);
        s.coeffs_mut()[m] /= C::new(2.0 * tau, xi);
    }
    let big_u = to_physical(&s).map(|v| C::new(v.re, 0.0));
    let window = support_window(&big_u, &big_u, config.support_cutoff);
    let zero = GridFunction::zeros(g);
    let two_tau = C::new(2.0 * tau, 0.0);
    let build = |uu: C, _: C| -> Mat2 { [[ZERO, ONE], [-uu * uu, -(two_tau + uu * 2.0)]] };
    let factor = 2f64.powi(config.integrator.order()) - 1.0;
    let need = (g.h() * 2.0 * tau / config.step_bound).ceil() as usize;
    let mut m = need.max(config.min_substeps).max(1).min(config.max_substeps);
    let solve = |m: usize| -> Result<C, ScatteringError> {
        let smp = node_samples(&big_u, &zero, m, config.integrator, false);
        let y = propagate(
            &smp,
            &build,
            window,
            m,
            g.h() / m as f64,
            config.integrator,
            [ONE, ZERO],
            config.overflow_bound,
        )?;
        Ok(ONE / (y[0] + y[1] / two_tau))
    };
    let mut coarse = solve(m)?;
    loop {
        let fine = solve(2 * m)?;
        let err = (fine - coarse).norm() / factor;
        if err <= config.tol * fine.norm().max(1.0) || 4 * m > config.max_substeps {
            return Ok((fine, err));
        }
        m *= 2;
        coarse = fine;
    }
}

/// Axis-aligned rectangle in the spectral plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    /// Left edge.
    pub re_min: f64,
    /// Right edge.
    pub re_max: f64,
    /// Bottom edge.
    pub im_min: f64,
    /// Top edge.
    pub im_max: f64,
}

impl Rect {
    fn corners(&self) -> [C; 4] {
        [
            C::new(self.re_min, self.im_min),
            C::new(self.re_max, self.im_min),
            C::new(self.re_max, self.im_max),
            C::new(self.re_min, self.im_max),
        ]
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn contains(&self, z: C) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn quarters(&self) -> [Rect; 4] {
        // off-centre split avoids symmetric zeros on the cut lines
        let xm = self.re_min + 0.5137 * (self.re_max - self.re_min);
        let ym = self.im_min + 0.4871 * (self.im_max - self.im_min);
        [
            Rect { re_max: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_min: ym, ..*self },
            Rect { re_max: xm, im_min: ym, ..*self },
        ]
    }
}

/// A zero of `T⁻¹` (pole of `T`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Location.
    pub z: C,
    /// Winding multiplicity.
    pub multiplicity: u32,
}

/// Zeros of `T⁻¹` inside a rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    /// Located zeros.
    pub poles: Vec<Pole>,
    /// Search rectangle.
    pub rect: Rect,
    /// Argument-principle count on the boundary.
    pub winding: i64,
}

/// Settings for [`find_poles`].
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSearch {
    /// Minimum `|T⁻¹|` accepted on a contour.
    pub contour_floor: f64,
    /// Stop subdividing below this diameter.
    pub min_diameter: f64,
    /// Newton step tolerance.
    pub newton_tol: f64,
    /// Newton iteration cap.
    pub newton_max: usize,
}

impl Default for PoleSearch {
    fn default() -> Self {
        Self {
            contour_floor: 1e-8,
            min_diameter: 1e-3,
            newton_tol: 1e-11,
            newton_max: 60,
        }
    }
}

fn fmt_z(z: C) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn tinv(prob: &ScatteringProblem, z: C, floor: f64) -> Result<C, ScatteringError> {
    let v = prob.transmission(z)?.tinv;
    if v.norm() < floor {
        return Err(ScatteringError::ContourZero {
            value: v.norm(),
            at: fmt_z(z),
        });
    }
    Ok(v)
}

/// Phase increment along the segment `[a, b]`, refined until consecutive
/// samples differ in argument by less than `π/4`.
fn segment_phase(
    prob: &ScatteringProblem,
    a: C,
    b: C,
    fa: C,
    fb: C,
    floor: f64,
    depth: u32,
) -> Result<f64, ScatteringError> {
    let d = (fb / fa).arg();
    if d.abs() < PI / 4.0 || depth > 30 {
        return Ok(d);
    }
    let mid = (a + b) * 0.5;
    let fm = tinv(prob, mid, floor)?;
    Ok(segment_phase(prob, a, mid, fa, fm, floor, depth + 1)?
        + segment_phase(prob, mid, b, fm, fb, floor, depth + 1)?)
}

fn winding(prob: &ScatteringProblem, r: &Rect, floor: f64) -> Result<i64, ScatteringError> {
    let cs = r.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let a = cs[i];
        let b = cs[(i + 1) % 4];
        // at least eight initial pieces per edge
        let pieces = 8;
        let mut prev = a;
        let mut fprev = tinv(prob, a, floor)?;
        for k in 1..=pieces {
            let next = a + (b - a) * (k as f64 / pieces as f64);
            let fnext = tinv(prob, next, floor)?;
            total += segment_phase(prob, prev, next, fprev, fnext, floor, 0)?;
            prev = next;
            fprev = fnext;
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn newton(
    prob: &ScatteringProblem,
    start: C,
    mult: u32,
    cfg: &PoleSearch,
) -> Result<C, ScatteringError> {
    let mut z = start;
    for _ in 0..cfg.newton_max {
        let h = 1e-5 * (1.0 + z.norm());
        let f = prob.transmission(z)?.tinv;
        let fp = (prob.transmission(z + h)?.tinv - prob.transmission(z - h)?.tinv) / (2.0 * h);
        if fp.norm() == 0.0 {
            break;
        }
        let step = f / fp * mult as f64;
        z -= step;
        if z.im <= 0.0 {
            break;
        }
        if step.norm() < cfg.newton_tol * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    Err(ScatteringError::NonConvergedNewton {
        start: fmt_z(start),
    })
}

fn search(
    prob: &ScatteringProblem,
    r: Rect,
    count: i64,
    cfg: &PoleSearch,
    out: &mut Vec<Pole>,
) -> Result<(), ScatteringError> {
    if count <= 0 {
        return Ok(());
    }
    let centre = C::new(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
    if count == 1 || r.diameter() < cfg.min_diameter {
        let mult = count as u32;
        match newton(prob, centre, mult, cfg) {
            Ok(z) if r.contains(z) => {
                out.push(Pole { z, multiplicity: mult });
                return Ok(());
            }
            Ok(_) | Err(_) if r.diameter() >= cfg.min_diameter => {}
            Ok(_) | Err(_) => {
                return Err(ScatteringError::NonConvergedNewton {
                    start: fmt_z(centre),
                })
            }
        }
    }
    for q in r.quarters() {
        let c = winding(prob, &q, cfg.contour_floor)?;
        search(prob, q, c, cfg, out)?;
    }
    Ok(())
}

/// Zeros of `T⁻¹` inside `rect` with winding multiplicities.
pub fn find_poles(
    prob: &ScatteringProblem,
    rect: Rect,
    cfg: &PoleSearch,
) -> Result<PoleSet, ScatteringError> {
    if !(rect.im_min > 0.0 && rect.re_max > rect.re_min && rect.im_max > rect.im_min) {
        return Err(ScatteringError::InvalidArgument(
            "rectangle must lie in the open upper half-plane".into(),
        ));
    }
    let total = winding(prob, &rect, cfg.contour_floor)?;
    let mut poles = Vec::new();
    search(prob, rect, total, cfg, &mut poles)?;
    poles.sort_by(|a, b| {
        a.z.im
            .partial_cmp(&b.z.im)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.z.re.partial_cmp(&b.z.re).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(PoleSet {
        poles,
        rect,
        winding: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn zero_potential_is_transparent() {
        let g = Grid::default();
        let p = ScatteringProblem::new(GridFunction::zeros(g), System::Defocusing).unwrap();
        for z in [C::new(0.0, 1.0), C::new(1.5, 0.0), C::new(-0.3, 2.0)] {
            assert_eq!(p.transmission(z).unwrap().tinv, ONE);
        }
    }

    #[test]
    fn expm2_matches_series() {
        let o = [[C::new(0.1, 0.2), C::new(-0.3, 0.05)], [C::new(0.2, -0.1), C::new(-0.4, 0.3)]];
        let mut term = [[ONE, ZERO], [ZERO, ONE]];
        let mut sum = term;
        for k in 1..30 {
            term = mat_mul(&term, &o);
            for row in term.iter_mut() {
                for v in row.iter_mut() {
                    *v /= k as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        let e = expm2(&o);
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[i][j] - sum[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_lower_half_plane_and_complex_kdv() {
        let g = Grid::default();
        let f = g.sample_real(|x| (-x * x).exp());
        let p = ScatteringProblem::new(f.clone(), System::Focusing).unwrap();
        assert!(p.transmission(C::new(0.0, -1.0)).is_err());
        let c = f.map(|v| v * C::new(0.0, 1.0));
        assert!(ScatteringProblem::new(c, System::Kdv).is_err());
    }
}
