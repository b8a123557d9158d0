//! Acceptance suite. Prints one `PASS`/`FAIL` line per check and asserts
//! every check that is not listed as a known infeasible sub-check.
//!
//! Run with `cargo test -p iscat-cli --test acceptance -- --nocapture`.

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use iscat_core::diffpoly::{DiffPolynomial, GaussRational};
use iscat_core::energies::{
    energy_es, quartic_term, trace_line_side, EnergySpec, QuadConfig,
};
use iscat_core::evolve::{conservation_report, evolve, Equation, FlowConfig, Quantity};
use iscat_core::grid::sobolev_norm_sq;
use iscat_core::hierarchy::{eval_density, h_exact, hamiltonian_density, state};
use iscat_core::scattering::{
    find_poles, transmission_kdv_renormalized, PoleSearch, Rect, ScatteringProblem,
    SolverConfig, System,
};
use iscat_core::{Complex64 as C, Grid, GridFunction, Mode};
use iscat_hopf::{check_primitive, logt_expansion};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

// Tolerances.
const HIER_CROSS_REL: f64 = 1e-7;
const QUAD_IDENTITY_REL: f64 = 5e-3;
const EXPONENT_TOL: f64 = 0.3;
const INTEGER_S_REL: f64 = 1e-7;
const TRACE_DEFOC_REL: f64 = 1e-6;
const TRACE_FOC_REL: f64 = 1e-5;
const QUARTIC_L4_REL: f64 = 1e-8;
const QUARTIC_RICHARDSON_REL: f64 = 0.1;
const DRIFT_H0: f64 = 1e-12;
const DRIFT_H2: f64 = 1e-6;
const DRIFT_ES: f64 = 1e-5;
/// Accepted range of the drift ratio under dt halving.
const HALVING_RATIO: (f64, f64) = (3.0, 5.5);
/// Evaluation floor of polynomial quantities (relative).
const FLOOR_POLY: f64 = 1e-11;
/// Evaluation floor of contour quantities (relative).
const FLOOR_CONTOUR: f64 = 5e-7;
const RENORM_ABS: f64 = 1e-8;
const REFLECTIONLESS_ABS: f64 = 1e-5;
const POLE_NEAR_I: f64 = 1e-6;
const FLOW_INVARIANCE_ABS: f64 = 1e-6;

struct Check {
    criterion: u32,
    name: String,
    pass: bool,
    detail: String,
    /// Printed but not asserted.
    known_infeasible: Option<&'static str>,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn check(&mut self, criterion: u32, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.push(criterion, name.into(), pass, detail.into(), None);
    }

    fn infeasible(
        &mut self,
        criterion: u32,
        name: impl Into<String>,
        pass: bool,
        detail: impl Into<String>,
        reason: &'static str,
    ) {
        self.push(criterion, name.into(), pass, detail.into(), Some(reason));
    }

    fn runtime(&mut self, criterion: u32, start: Instant, limit_s: f64) {
        let t = start.elapsed().as_secs_f64();
        self.check(criterion, "runtime", t < limit_s, format!("{t:.1} s (limit {limit_s} s)"));
    }

    fn push(&mut self, criterion: u32, name: String, pass: bool, detail: String, known: Option<&'static str>) {
        let tag = if pass { "PASS" } else { "FAIL" };
        match known {
            Some(reason) if !pass => {
                println!("{tag} [{criterion}] {name}: {detail} (known infeasible: {reason})")
            }
            _ => println!("{tag} [{criterion}] {name}: {detail}"),
        }
        self.checks.push(Check {
            criterion,
            name,
            pass,
            detail,
            known_infeasible: known,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian(g: Grid, a: f64) -> GridFunction {
    g.sample_real(|x| a * (-x * x).exp())
}

fn iscat(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_iscat"))
        .args(args)
        .output()
        .expect("running iscat");
    assert!(out.status.success(), "iscat {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("UTF-8 output")
}

/// Coefficients emitted by `hopf expand-logT`.
fn cli_logt(max_degree: usize) -> HashMap<String, BigRational> {
    let text = iscat(&["hopf", "expand-logT", "--max-degree", &max_degree.to_string()]);
    let records: Vec<serde_json::Value> = serde_json::from_str(&text).expect("JSON records");
    records
        .iter()
        .map(|r| {
            let w = r["word"].as_str().unwrap().to_string();
            let c: BigRational = r["coefficient"].as_str().unwrap().parse().unwrap();
            (w, c)
        })
        .collect()
}

// Independent logarithm oracle on string words: subset-enumeration shuffle,
// exp(L) = 1 + XY + XYXY + … solved degree by degree.

type Oracle = HashMap<String, BigRational>;

fn add_into(acc: &mut Oracle, w: String, c: BigRational) {
    *acc.entry(w).or_insert_with(BigRational::zero) += c;
}

fn oracle_shuffle(a: &Oracle, b: &Oracle, max_len: usize) -> Oracle {
    let mut out = Oracle::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let (p, q) = (wa.len(), wb.len());
            if p + q > max_len {
                continue;
            }
            let (la, lb) = (wa.as_bytes(), wb.as_bytes());
            for mask in 0u32..(1u32 << (p + q)) {
                if mask.count_ones() as usize != p {
                    continue;
                }
                let (mut i, mut j) = (0, 0);
                let mut s = String::with_capacity(p + q);
                for pos in 0..p + q {
                    if mask >> pos & 1 == 1 {
                        s.push(la[i] as char);
                        i += 1;
                    } else {
                        s.push(lb[j] as char);
                        j += 1;
                    }
                }
                add_into(&mut out, s, ca * cb);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn oracle_exp(l: &Oracle, max_degree: usize) -> Oracle {
    let mut out = Oracle::new();
    out.insert(String::new(), BigRational::one());
    let mut power = out.clone();
    let mut fact = BigInt::one();
    for n in 1..=max_degree {
        power = oracle_shuffle(&power, l, 2 * max_degree);
        fact *= BigInt::from(n as u64);
        for (w, c) in &power {
            add_into(&mut out, w.clone(), c / BigRational::from_integer(fact.clone()));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn oracle_log_t(max_degree: usize) -> Oracle {
    let mut l = Oracle::new();
    for k in 1..=max_degree {
        let mut lk = Oracle::new();
        add_into(&mut lk, "XY".repeat(k), BigRational::one());
        for (w, c) in oracle_exp(&l, k).into_iter().filter(|(w, _)| w.len() == 2 * k) {
            add_into(&mut lk, w, -c);
        }
        l.extend(lk.into_iter().filter(|(_, c)| !c.is_zero()));
    }
    l
}

fn criterion_1(r: &mut Report) {
    let start = Instant::now();
    let lib = cli_logt(5);
    r.runtime(1, start, 5.0);
    let table: [(i64, &str); 22] = [
        (1, "XY"),
        (-2, "XXYY"),
        (12, "XXXYYY"),
        (4, "XXYXYY"),
        (-144, "XXXXYYYY"),
        (-72, "XXXYXYYY"),
        (-24, "XXXYYXYY"),
        (-24, "XXYXXYYY"),
        (-8, "XXYXYXYY"),
        (2880, "XXXXXYYYYY"),
        (1728, "XXXXYXYYYY"),
        (864, "XXXXYYXYYY"),
        (864, "XXXYXXYYYY"),
        (432, "XXXYXYXYYY"),
        (288, "XXXXYYYXYY"),
        (288, "XXYXXXYYYY"),
        (144, "XXXYXYYXYY"),
        (144, "XXYXXYXYYY"),
        (48, "XXXYYXYXYY"),
        (48, "XXYXXYYXYY"),
        (48, "XXYXYXXYYY"),
        (16, "XXYXYXYXYY"),
    ];
    let wrong: Vec<&str> = table
        .iter()
        .filter(|(c, w)| lib.get(*w) != Some(&BigRational::from_integer((*c).into())))
        .map(|(_, w)| *w)
        .collect();
    r.check(1, "reference degree ≤ 5 coefficients", wrong.is_empty(), format!("{} listed, mismatches {wrong:?}", table.len()));
    let extra: Vec<String> = lib
        .iter()
        .filter(|(w, _)| !table.iter().any(|(_, t)| t == w))
        .map(|(w, c)| format!("{c}·{w}"))
        .collect();
    r.check(
        1,
        "words beyond the reference table",
        extra == ["144·XXXYYXXYYY"],
        format!("{extra:?} (confirmed by the oracle below)"),
    );
    let oracle5 = oracle_log_t(5);
    r.check(1, "degree 5 against oracle", lib == oracle5, format!("{} words", lib.len()));
    let lib6 = cli_logt(6);
    let oracle6 = oracle_log_t(6);
    r.check(1, "degree 6 against oracle", lib6 == oracle6, format!("{} words", lib6.len()));
}

fn criterion_2(r: &mut Report) {
    let start = Instant::now();
    let l = logt_expansion(8).unwrap();
    let disconnected = l.iter().filter(|(w, _)| !w.is_connected()).count();
    r.check(2, "every word connected", disconnected == 0, format!("{} words, {disconnected} not connected", l.len()));
    let bad: Vec<usize> = (1..=8).filter(|&k| !check_primitive(&l.homogeneous(k), k)).collect();
    r.check(2, "homogeneous parts primitive", bad.is_empty(), format!("failing degrees {bad:?}"));
    r.runtime(2, start, 60.0);
}

fn u(k: u32) -> DiffPolynomial {
    DiffPolynomial::u(k)
}
fn ub(k: u32) -> DiffPolynomial {
    DiffPolynomial::ubar(k)
}
fn q(re: i64, im: i64, den: i64) -> GaussRational {
    &GaussRational::from_ints(re, im) * &GaussRational::ratio(1, den)
}
fn prod(fs: &[DiffPolynomial]) -> DiffPolynomial {
    fs.iter().fold(DiffPolynomial::constant(GaussRational::one()), |a, b| &a * b)
}

fn criterion_3(r: &mut Report) {
    let start = Instant::now();
    let s1 = state(1, Mode::Focusing).unwrap();
    let s2 = state(2, Mode::Focusing).unwrap();
    let s3 = state(3, Mode::Focusing).unwrap();
    r.check(3, "(p1, r1) = (u, 0)", s1.p() == u(0) && s1.r().is_zero(), format!("p1 = {}", s1.p()));
    let p2 = u(1).scale(&q(0, 1, 2));
    let r2 = prod(&[u(0), ub(0)]).scale(&q(-1, 0, 2));
    r.check(3, "(p2, r2) = (iu'/2, -|u|²/2)", s2.p() == p2 && s2.r() == r2, format!("r2 = {}", s2.r()));
    let p3 = (&u(2) + &prod(&[u(0), u(0), ub(0)]).scale(&q(2, 0, 1))).scale(&q(-1, 0, 4));
    r.check(3, "p3 = -(u'' + 2|u|²u)/4", s3.p() == p3, format!("p3 = {}", s3.p()));
    let stated_r3 = (&prod(&[u(1), ub(0)]) - &prod(&[u(0), ub(1)])).scale(&q(0, 1, 4));
    r.infeasible(
        3,
        "r3 = (i/4)(u'ū - uū') (stated form)",
        s3.r() == stated_r3,
        format!("recursion gives r3 = {}", s3.r()),
        "stated r3 has the opposite sign of the recursion it is derived from",
    );
    r.check(
        3,
        "r3 = -(i/4)(u'ū - uū') from the recursion",
        s3.r() == stated_r3.scale(&q(-1, 0, 1)),
        "sign-corrected form",
    );

    let h0 = prod(&[u(0), ub(0)]);
    let h2 = &prod(&[u(1), ub(1)]) + &prod(&[u(0), u(0), ub(0), ub(0)]);
    let h4 = &(&(&(&prod(&[u(2), ub(2)])
        + &prod(&[u(0), u(1), ub(0), ub(1)]).scale(&q(8, 0, 1)))
        + &prod(&[u(1), u(1), ub(0), ub(0)]))
        + &prod(&[u(0), u(0), ub(1), ub(1)]))
        + &prod(&[u(0), u(0), u(0), ub(0), ub(0), ub(0)]).scale(&q(2, 0, 1));
    for (k, expect) in [(0, h0), (2, h2), (4, h4)] {
        let d = hamiltonian_density(k, Mode::Defocusing).unwrap();
        r.check(
            3,
            format!("calibrated H{k} closed form"),
            d.density.equivalent_mod_derivatives(&expect),
            format!("constant {}", d.constant),
        );
    }

    let f = gaussian(Grid::default(), 0.5);
    // odd H_j vanish on real data, so the scale has the mass as a floor
    let mass = h_exact(0, &f).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..=5i64 {
        let d = hamiltonian_density(j as usize, Mode::Defocusing).unwrap();
        let a = eval_density(&d.density, &f).re;
        let b = h_exact(j, &f).unwrap();
        worst = worst.max((a - b).abs() / b.abs().max(mass));
    }
    r.check(3, "cross-path j ≤ 5 on 0.5e^{-x²}", worst <= HIER_CROSS_REL, format!("max rel {worst:.2e}"));
    r.runtime(3, start, 10.0);
}

fn e(u: &GridFunction, s: f64, mode: Mode) -> f64 {
    energy_es(u, &EnergySpec::new(s, mode)).unwrap().value
}

fn criterion_4(r: &mut Report) {
    let start = Instant::now();
    let g = Grid::default();
    for s in [-0.25, 0.25, 0.75, 1.5] {
        let dev = |eps: f64| {
            let u = gaussian(g, eps);
            let q = sobolev_norm_sq(&u, s);
            (e(&u, s, Mode::Defocusing) - q) / q
        };
        let (a, b) = (dev(0.05), dev(0.025));
        let p = (a / b).abs().log2();
        r.check(
            4,
            format!("s = {s}"),
            a.abs() <= QUAD_IDENTITY_REL && (p - 2.0).abs() <= EXPONENT_TOL,
            format!("rel dev {a:.3e}, exponent {p:.3}"),
        );
    }
    r.runtime(4, start, 120.0);
}

fn criterion_5(r: &mut Report) {
    let start = Instant::now();
    let u = gaussian(Grid::default(), 0.1);
    let e1 = e(&u, 1.0, Mode::Defocusing);
    let (h0, h2) = (h_exact(0, &u).unwrap(), h_exact(2, &u).unwrap());
    let d = rel(e1, h0 + h2);
    r.check(5, "E1 = H0 + H2 (j = 0 term included)", d <= INTEGER_S_REL, format!("rel {d:.2e}"));
    // the non-integer path approaches the same value from both sides
    let (lo, hi) = (e(&u, 1.0 - 1e-3, Mode::Defocusing), e(&u, 1.0 + 1e-3, Mode::Defocusing));
    let mid = 0.5 * (lo + hi);
    r.check(5, "continuity of E_s at s = 1", rel(mid, e1) < 1e-5, format!("rel {:.2e}", rel(mid, e1)));
    r.runtime(5, start, 60.0);
}

fn criterion_6(r: &mut Report) {
    let start = Instant::now();
    let u = gaussian(Grid::default(), 0.5);
    for s in [0.0, 0.5] {
        let spec = EnergySpec::new(s, Mode::Defocusing);
        let line = trace_line_side(&u, &spec, None).unwrap().value;
        let contour = energy_es(&u, &spec).unwrap().value;
        let d = rel(line, contour);
        r.check(6, format!("s = {s}"), d <= TRACE_DEFOC_REL, format!("line {line:.12} contour {contour:.12} rel {d:.2e}"));
    }
    r.runtime(6, start, 180.0);
}

fn criterion_7(r: &mut Report) {
    let start = Instant::now();
    let u = Grid::default().sample_real(|x| 1.2 / x.cosh());
    let prob = ScatteringProblem::new(u.clone(), System::Focusing).unwrap();
    let rect = Rect { re_min: -4.0, re_max: 4.0, im_min: 0.05, im_max: 4.0 };
    let poles = find_poles(&prob, rect, &PoleSearch::default()).unwrap();
    let simple = poles.poles.len() == 1 && poles.poles[0].multiplicity == 1;
    r.check(
        7,
        "one simple pole",
        simple,
        format!("{:?}", poles.poles.iter().map(|p| (p.z, p.multiplicity)).collect::<Vec<_>>()),
    );
    let spec = EnergySpec::new(0.0, Mode::Focusing);
    let line = trace_line_side(&u, &spec, Some(&poles)).unwrap();
    let contour = energy_es(&u, &spec).unwrap().value;
    let d = rel(line.value, contour);
    r.check(
        7,
        "line + pole term = contour (s = 0)",
        d <= TRACE_FOC_REL,
        format!("line {:.10} + poles {:.10} vs {contour:.10}, rel {d:.2e}", line.line, line.poles),
    );
    r.runtime(7, start, 180.0);
}

fn criterion_8(r: &mut Report) {
    let start = Instant::now();
    let g = Grid::default();
    let u = g.sample_real(|x| 0.5 * (-x * x / 4.0).exp());
    let l4: f64 = u.values().iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * g.h();
    let d = rel(quartic_term(&u, 1.0), l4);
    r.check(8, "quartic_term(u, 1) = ∫|u|⁴", d <= QUARTIC_L4_REL, format!("rel {d:.2e}"));
    let (s, eps) = (0.5, 0.05);
    let ue = u.scale(eps);
    let rich = (e(&ue, s, Mode::Defocusing) - sobolev_norm_sq(&ue, s)) / eps.powi(4);
    let k = quartic_term(&u, s);
    let d = rel(rich, k);
    r.check(8, "Richardson at s = 0.5", d <= QUARTIC_RICHARDSON_REL, format!("{rich:.6} vs {k:.6}, rel {d:.2e}"));
    r.runtime(8, start, 120.0);
}

fn drift_gate(name: &str) -> f64 {
    match name {
        "H0" => DRIFT_H0,
        "H2" => DRIFT_H2,
        _ => DRIFT_ES,
    }
}

/// Quantities evaluated by a polynomial formula rather than a contour integral.
fn is_polynomial(q: &Quantity) -> bool {
    match q {
        Quantity::H(_) => true,
        Quantity::E(s) => s.fract() == 0.0,
        Quantity::P(_) => false,
    }
}

fn criterion_9(r: &mut Report) {
    let start = Instant::now();
    let nls = ["H0", "H2", "E0.25", "E0.75", "P0.5"];
    let wide = Grid::new(128.0, 2048).unwrap();
    let cases: [(Equation, GridFunction, &[&str]); 3] = [
        (Equation::NlsDefocusing, gaussian(Grid::default(), 0.1), &nls),
        (Equation::MkdvDefocusing, wide.sample_real(|x| 0.1 / x.cosh()), &nls),
        (Equation::Kdv, gaussian(wide, 0.1), &["E0", "E1", "E-0.5", "E0.5"]),
    ];
    for (eq, u0, names) in cases {
        let qs: Vec<Quantity> = names.iter().map(|s| s.parse().unwrap()).collect();
        let drifts = |dt: f64| {
            let traj = evolve(&u0, &FlowConfig::new(eq, dt, 1.0)).unwrap();
            conservation_report(&traj, &qs, &QuadConfig::default())
        };
        let (a, b) = (drifts(1e-3), drifts(5e-4));
        for (name, q) in names.iter().zip(&qs) {
            let (da, db) = (a.max_rel_drift(name), b.max_rel_drift(name));
            let (Some(da), Some(db)) = (da, db) else {
                r.check(9, format!("{eq} {name}"), false, "evaluation failed");
                continue;
            };
            let gate = drift_gate(name);
            let floor = if is_polynomial(q) { FLOOR_POLY } else { FLOOR_CONTOUR };
            let ratio = da / db;
            let order = if da <= floor {
                "at floor".to_string()
            } else {
                format!("ratio {ratio:.2}")
            };
            // absolute gates apply to the dt = 1e-3 run; the halved run sets the order
            let order_ok = da <= floor || (HALVING_RATIO.0..=HALVING_RATIO.1).contains(&ratio);
            r.check(
                9,
                format!("{eq} {name}"),
                da <= gate && order_ok,
                format!("drift {da:.2e} -> {db:.2e} (gate {gate:.0e}), {order}"),
            );
        }
    }
    r.runtime(9, start, 600.0);
}

fn criterion_10(r: &mut Report) {
    let start = Instant::now();
    let u = gaussian(Grid::default(), 0.3);
    let p = ScatteringProblem::new(u.clone(), System::Kdv).unwrap();
    let int = u.integral().re;
    let cfg = SolverConfig::default();
    let (mut derived, mut stated): (f64, f64) = (0.0, 0.0);
    for tau in [1.0, 2.0, 4.0] {
        let (s, _) = transmission_kdv_renormalized(&u, tau, &cfg).unwrap();
        let t = 1.0 / p.transmission(C::new(0.0, tau)).unwrap().tinv;
        derived = derived.max((s - t * (int / (2.0 * tau)).exp()).norm());
        stated = stated.max((s - t * (-int / tau).exp()).norm());
    }
    r.check(10, "renormalized = T·e^{∫u/(2τ)}, τ = 1, 2, 4", derived <= RENORM_ABS, format!("max abs {derived:.2e}"));
    r.infeasible(
        10,
        "renormalized = T·e^{-∫u/τ} (stated form)",
        stated <= RENORM_ABS,
        format!("max abs {stated:.2e}"),
        "the stated factor contradicts the leading term ln T = -∫u/(2τ) + O(u²)",
    );

    let sol = Grid::default().sample_real(|x| -2.0 / x.cosh().powi(2));
    let ps = ScatteringProblem::new(sol, System::Kdv).unwrap();
    let worst = [0.1, 0.6, 1.5, 3.0]
        .iter()
        .map(|&xi| (1.0 / ps.transmission(C::new(xi, 0.0)).unwrap().tinv.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    r.check(10, "soliton |T(ξ)| = 1", worst <= REFLECTIONLESS_ABS, format!("max ||T| - 1| {worst:.2e}"));
    let rect = Rect { re_min: -0.5, re_max: 0.5, im_min: 0.2, im_max: 2.0 };
    let found = find_poles(&ps, rect, &PoleSearch::default()).unwrap();
    let ok = found.poles.len() == 1 && (found.poles[0].z - C::new(0.0, 1.0)).norm() < POLE_NEAR_I;
    r.check(
        10,
        "soliton has one pole near i",
        ok,
        format!("{:?}", found.poles.iter().map(|p| p.z).collect::<Vec<_>>()),
    );
    r.runtime(10, start, 120.0);
}

fn criterion_11(r: &mut Report) {
    let start = Instant::now();
    let g = Grid::new(128.0, 2048).unwrap();
    let cases = [
        (Equation::NlsDefocusing, gaussian(g, 0.3), System::Defocusing),
        (Equation::MkdvDefocusing, g.sample_real(|x| 0.3 / x.cosh()), System::Defocusing),
        (Equation::Kdv, gaussian(g, 0.3), System::Kdv),
    ];
    for (eq, u0, sys) in cases {
        let traj = evolve(&u0, &FlowConfig::new(eq, 1e-3, 1.0)).unwrap();
        let p0 = ScatteringProblem::new(u0, sys.clone()).unwrap();
        let p1 = ScatteringProblem::new(traj.last().u.clone(), sys).unwrap();
        let mut worst: f64 = 0.0;
        for tau in [1.0, 2.0] {
            let z = C::new(0.0, tau);
            let a = 1.0 / p0.transmission(z).unwrap().tinv;
            let b = 1.0 / p1.transmission(z).unwrap().tinv;
            worst = worst.max((a - b).norm());
        }
        r.check(11, format!("{eq} τ = 1, 2"), worst <= FLOW_INVARIANCE_ABS, format!("max |ΔT| {worst:.2e}"));
    }
    r.runtime(11, start, 300.0);
}

#[test]
fn acceptance() {
    let mut r = Report::default();
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);
    criterion_11(&mut r);

    let known = r.checks.iter().filter(|c| !c.pass && c.known_infeasible.is_some()).count();
    let failed: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.pass && c.known_infeasible.is_none())
        .map(|c| format!("[{}] {}: {}", c.criterion, c.name, c.detail))
        .collect();
    println!(
        "SUMMARY {} checks, {} failed, {known} known infeasible",
        r.checks.len(),
        failed.len() + known
    );
    assert!(failed.is_empty(), "failed checks:\n{}", failed.join("\n"));
}
