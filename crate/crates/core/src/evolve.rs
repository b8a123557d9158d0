//! Strang split-step spectral flows for NLS, mKdV and KdV, and drift tables
//! of conserved quantities along a trajectory.
//!
//! * NLS `i u_t + u_xx ± 2u|u|² = 0`: linear factor `e^{−iξ²dt}`, exact
//!   pointwise phase `e^{±2i|u|²dt}`.
//! * mKdV `u_t + u_xxx ± 2(|u|²u)_x = 0` and KdV `u_t + u_xxx − 6uu_x = 0`:
//!   linear factor `e^{iξ³dt}`, RK4 for the nonlinear part.
//!
//! The upper sign is the focusing case. Every nonlinear substep is followed by
//! the 2/3 dealiasing projection.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energies::{energy_es, momentum_ps, EnergySpec, QuadConfig};
use crate::error::EvolveError;
use crate::grid::{to_physical, to_spectral, Grid, GridFunction, SpectralFunction};
use crate::hierarchy::{h_exact_mode, kdv_poly_energy};
use crate::mode::Mode;

type C = Complex64;

/// Evolution equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    /// `i u_t + u_xx + 2u|u|² = 0`.
    NlsFocusing,
    /// `i u_t + u_xx − 2u|u|² = 0`.
    NlsDefocusing,
    /// `u_t + u_xxx + 2(|u|²u)_x = 0`.
    MkdvFocusing,
    /// `u_t + u_xxx − 2(|u|²u)_x = 0`.
    MkdvDefocusing,
    /// `u_t + u_xxx − 6uu_x = 0`.
    Kdv,
}

impl Equation {
    /// Scattering and energy convention conserved by the flow.
    pub fn mode(self) -> Mode {
        match self {
            Equation::NlsFocusing | Equation::MkdvFocusing => Mode::Focusing,
            Equation::NlsDefocusing | Equation::MkdvDefocusing => Mode::Defocusing,
            Equation::Kdv => Mode::Kdv,
        }
    }

    fn is_nls(self) -> bool {
        matches!(self, Equation::NlsFocusing | Equation::NlsDefocusing)
    }

    /// `+1` focusing, `−1` defocusing.
    fn sign(self) -> f64 {
        match self.mode() {
            Mode::Focusing => 1.0,
            _ => -1.0,
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equation::NlsFocusing => "nls-focusing",
            Equation::NlsDefocusing => "nls-defocusing",
            Equation::MkdvFocusing => "mkdv-focusing",
            Equation::MkdvDefocusing => "mkdv-defocusing",
            Equation::Kdv => "kdv",
        })
    }
}

impl FromStr for Equation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nls-focusing" => Ok(Equation::NlsFocusing),
            "nls-defocusing" => Ok(Equation::NlsDefocusing),
            "mkdv-focusing" => Ok(Equation::MkdvFocusing),
            "mkdv-defocusing" => Ok(Equation::MkdvDefocusing),
            "kdv" => Ok(Equation::Kdv),
            other => Err(format!("unknown equation `{other}`")),
        }
    }
}

/// Time-stepping settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Equation.
    pub equation: Equation,
    /// Nominal step; the actual step divides `t_end` evenly.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Snapshot every this many steps; the final state is always recorded.
    pub snapshot_every: Option<usize>,
    /// `sup|u|` above which the run aborts.
    pub blowup_bound: f64,
    /// Apply the 2/3 projection after nonlinear substeps.
    pub dealias: bool,
}

impl FlowConfig {
    /// Snapshots at `t = 0` and `t_end` only.
    pub fn new(equation: Equation, dt: f64, t_end: f64) -> Self {
        Self {
            equation,
            dt,
            t_end,
            snapshot_every: None,
            blowup_bound: 1e3,
            dealias: true,
        }
    }

    /// Sets the snapshot stride in steps.
    pub fn with_snapshot_every(mut self, steps: usize) -> Self {
        self.snapshot_every = Some(steps);
        self
    }

    /// Number of steps and the exact step size.
    pub fn steps(&self) -> Result<(usize, f64), EvolveError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EvolveError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(EvolveError::InvalidConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize;
        Ok((n, if n == 0 { 0.0 } else { self.t_end / n as f64 }))
    }
}

/// A recorded state.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// Time.
    pub t: f64,
    /// State.
    pub u: GridFunction,
}

/// Snapshots of a run plus the mass after every step.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Equation that produced the run.
    pub equation: Equation,
    /// Step size used.
    pub dt: f64,
    /// Recorded states in increasing time.
    pub snapshots: Vec<Snapshot>,
    /// `∫|u|²` after each step, starting with the initial state.
    pub mass: Vec<f64>,
}

impl Trajectory {
    /// Last recorded state.
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has the initial snapshot")
    }
}

/// One Strang step of a fixed equation on a fixed grid. Negative `dt`
/// steps backward.
pub struct Stepper {
    equation: Equation,
    grid: Grid,
    dealias: bool,
}

impl Stepper {
    /// Stepper for `equation` on `grid`.
    pub fn new(equation: Equation, grid: Grid, dealias: bool) -> Self {
        Self {
            equation,
            grid,
            dealias,
        }
    }

    fn linear(&self, s: &mut SpectralFunction, dt: f64) {
        let g = self.grid;
        for m in 0..g.len() {
            let xi = g.freq(m);
            let phase = if self.equation.is_nls() {
                -xi * xi * dt
            } else {
                xi * xi * xi * dt
            };
            s.coeffs_mut()[m] *= C::from_polar(1.0, phase);
        }
    }

    fn project(&self, s: &mut SpectralFunction) {
        if !self.dealias {
            return;
        }
        let g = self.grid;
        let cut = g.len() as i64 / 3;
        for m in 0..g.len() {
            if g.wavenumber(m).abs() > cut {
                s.coeffs_mut()[m] = C::new(0.0, 0.0);
            }
        }
    }

    /// `∂_x` of the nonlinear flux for mKdV/KdV: `u_t = N(u)`.
    fn rhs(&self, u: &[C]) -> Vec<C> {
        let flux: Vec<C> = match self.equation {
            // u_t = ∓2(|u|²u)_x
            Equation::MkdvFocusing | Equation::MkdvDefocusing => {
                let c = -2.0 * self.equation.sign();
                u.iter().map(|v| v * v.norm_sqr() * c).collect()
            }
            // u_t = 3(u²)_x
            _ => u.iter().map(|v| v * v * 3.0).collect(),
        };
        let f = GridFunction::new(self.grid, flux).expect("same grid");
        let mut s = to_spectral(&f);
        let g = self.grid;
        for m in 0..g.len() {
            let k = if m == g.nyquist() { 0.0 } else { g.freq(m) };
            s.coeffs_mut()[m] *= C::new(0.0, k);
        }
        self.project(&mut s);
        to_physical(&s).into_values()
    }

    fn nonlinear(&self, u: GridFunction, dt: f64) -> GridFunction {
        let out = if self.equation.is_nls() {
            let c = 2.0 * self.equation.sign() * dt;
            u.map(|v| v * C::from_polar(1.0, c * v.norm_sqr()))
        } else {
            let y0 = u.into_values();
            let axpy = |a: &[C], b: &[C], h: f64| -> Vec<C> {
                a.iter().zip(b).map(|(x, y)| x + y * h).collect()
            };
            let k1 = self.rhs(&y0);
            let k2 = self.rhs(&axpy(&y0, &k1, 0.5 * dt));
            let k3 = self.rhs(&axpy(&y0, &k2, 0.5 * dt));
            let k4 = self.rhs(&axpy(&y0, &k3, dt));
            let y: Vec<C> = (0..y0.len())
                .map(|i| y0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
                .collect();
            GridFunction::new(self.grid, y).expect("same grid")
        };
        if self.dealias {
            let mut s = to_spectral(&out);
            self.project(&mut s);
            to_physical(&s)
        } else {
            out
        }
    }

    /// `L(dt/2) N(dt) L(dt/2)`.
    pub fn step(&self, u: &GridFunction, dt: f64) -> GridFunction {
        let mut s = to_spectral(u);
        self.linear(&mut s, 0.5 * dt);
        let mid = self.nonlinear(to_physical(&s), dt);
        let mut s = to_spectral(&mid);
        self.linear(&mut s, 0.5 * dt);
        let out = to_physical(&s);
        if self.equation.is_nls() {
            out
        } else if u.is_real() {
            out.map(|v| C::new(v.re, 0.0))
        } else {
            out
        }
    }
}

/// Runs the flow and records snapshots.
pub fn evolve(u0: &GridFunction, cfg: &FlowConfig) -> Result<Trajectory, EvolveError> {
    let (n, dt) = cfg.steps()?;
    if cfg.equation == Equation::Kdv && !u0.is_real() {
        return Err(EvolveError::InvalidConfig("KdV needs real data".into()));
    }
    if !(cfg.blowup_bound > 0.0) {
        return Err(EvolveError::InvalidConfig("blowup_bound must be positive".into()));
    }
    let stride = cfg.snapshot_every.unwrap_or(n.max(1)).max(1);
    let stepper = Stepper::new(cfg.equation, *u0.grid(), cfg.dealias);
    let mut u = u0.clone();
    let mut snapshots = vec![Snapshot { t: 0.0, u: u.clone() }];
    let mut mass = vec![u.l2_norm_sq()];
    for k in 1..=n {
        u = stepper.step(&u, dt);
        let sup = u.sup_norm();
        let t = k as f64 * dt;
        if !(sup <= cfg.blowup_bound) {
            return Err(EvolveError::BlowupDetected { t, sup });
        }
        mass.push(u.l2_norm_sq());
        if k % stride == 0 || k == n {
            snapshots.push(Snapshot {
                t: if k == n { cfg.t_end } else { t },
                u: u.clone(),
            });
        }
    }
    Ok(Trajectory {
        equation: cfg.equation,
        dt,
        snapshots,
        mass,
    })
}

/// Quantity tracked by [`conservation_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Quantity {
    /// Polynomial `H_k` (NLS/mKdV) or `E_k` (KdV).
    H(i64),
    /// Energy `E_s`.
    E(f64),
    /// Momentum `P_s`.
    P(f64),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::H(k) => write!(f, "H{k}"),
            Quantity::E(s) => write!(f, "E{s}"),
            Quantity::P(s) => write!(f, "P{s}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("cannot parse quantity `{s}`; expected Hk, Es or Ps");
        let (head, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        match head {
            "H" => rest.parse().map(Quantity::H).map_err(|_| bad()),
            "E" => rest.parse().map(Quantity::E).map_err(|_| bad()),
            "P" => rest.parse().map(Quantity::P).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Evaluates a quantity on one state.
pub fn evaluate_quantity(
    u: &GridFunction,
    q: Quantity,
    mode: Mode,
    quad: &QuadConfig,
) -> Result<f64, String> {
    match q {
        Quantity::H(k) if mode == Mode::Kdv => kdv_poly_energy(k, u).map_err(|e| e.to_string()),
        Quantity::H(k) => h_exact_mode(k, mode, u).map_err(|e| e.to_string()),
        Quantity::E(s) => energy_es(u, &EnergySpec::new(s, mode).with_quad(quad.clone()))
            .map(|r| r.value)
            .map_err(|e| e.to_string()),
        Quantity::P(s) => momentum_ps(u, &EnergySpec::new(s, mode).with_quad(quad.clone()))
            .map(|r| r.value)
            .map_err(|e| e.to_string()),
    }
}

/// One cell of a drift table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    /// Snapshot time.
    pub t: f64,
    /// Quantity label such as `E0.25`.
    pub quantity: String,
    /// Value, or the evaluation error.
    pub value: Result<f64, String>,
    /// `value − value(t = 0)`.
    pub abs_drift: Option<f64>,
    /// `|abs_drift| / max(|value(t = 0)|, ∫|u₀|²)`.
    pub rel_drift: Option<f64>,
}

/// Drift of each quantity at each snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// Rows ordered by snapshot, then by quantity.
    pub rows: Vec<DriftRow>,
}

impl ConservationReport {
    /// Largest relative drift of `quantity`, `None` if any cell failed.
    pub fn max_rel_drift(&self, quantity: &str) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for r in self.rows.iter().filter(|r| r.quantity == quantity) {
            worst = worst.max(r.rel_drift?);
        }
        Some(worst)
    }

    /// CSV with columns `t, quantity, value, abs_drift, rel_drift`; failed
    /// cells carry `error: …` in the value column and empty drifts.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "quantity", "value", "abs_drift", "rel_drift"])
            .expect("in-memory write");
        let num = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
        for r in &self.rows {
            let value = match &r.value {
                Ok(v) => format!("{v:.16e}"),
                Err(e) => format!("error: {e}"),
            };
            w.write_record([
                format!("{:.16e}", r.t),
                r.quantity.clone(),
                value,
                num(r.abs_drift),
                num(r.rel_drift),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Evaluates `quantities` on every snapshot and reports drift from `t = 0`.
pub fn conservation_report(
    traj: &Trajectory,
    quantities: &[Quantity],
    quad: &QuadConfig,
) -> ConservationReport {
    let mode = traj.equation.mode();
    // Quantities that vanish at t = 0 (P_s of real data) are measured against the mass.
    let floor = traj.snapshots[0].u.l2_norm_sq();
    let mut base: Vec<Option<f64>> = Vec::new();
    let mut rows = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        for (j, q) in quantities.iter().enumerate() {
            let value = evaluate_quantity(&snap.u, *q, mode, quad);
            if i == 0 {
                base.push(value.as_ref().ok().copied());
            }
            let (abs_drift, rel_drift) = match (&value, base[j]) {
                (Ok(v), Some(b)) => {
                    let d = v - b;
                    let scale = b.abs().max(floor);
                    (Some(d), Some(if scale == 0.0 { d.abs() } else { d.abs() / scale }))
                }
                _ => (None, None),
            };
            rows.push(DriftRow {
                t: snap.t,
                quantity: q.to_string(),
                value,
                abs_drift,
                rel_drift,
            });
        }
    }
    ConservationReport { rows }
}
