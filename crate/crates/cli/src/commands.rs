//! Subcommand implementations. Each returns the text written to stdout.

use std::fs;
use std::path::Path;

use iscat_core::energies::{
    energy_es, kdv_cubic_term, momentum_ps, quartic_term, trace_line_side, EnergySpec,
    QuadConfig, DEFAULT_KERNEL_MODES,
};
use iscat_core::evolve::{conservation_report, evolve, FlowConfig, Quantity};
use iscat_core::hierarchy::hamiltonian_density;
use iscat_core::scattering::{find_poles, PoleSearch, Rect, ScatteringProblem, SolverConfig};
use iscat_core::{Complex64, Grid, GridFunction, Mode};
use serde::Serialize;

use crate::args::{
    EnergyArgs, EvolveArgs, Format, GenArgs, GridFormat, Kind, PolesArgs, ScatterArgs,
};
use crate::output::{to_json, Failure};

type Result<T> = std::result::Result<T, Failure>;

/// Reads a GridFunction from JSON, or CSV when the extension is `.csv`.
pub fn read_potential(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::from(e).with_context(&format!("reading {}", path.display())))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv {
        GridFunction::from_csv(&text)?
    } else {
        GridFunction::from_json(&text)?
    })
}

fn write_or_return(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(p) => {
            fs::write(p, &text)
                .map_err(|e| Failure::from(e).with_context(&format!("writing {}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn parse_rect(s: &str) -> Result<Rect> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::invalid(format!("bad rectangle `{s}`: {e}")))?;
    match v[..] {
        [re_min, re_max, im_min, im_max] => Ok(Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        }),
        _ => Err(Failure::invalid(format!(
            "rectangle `{s}` needs four numbers re_min,re_max,im_min,im_max"
        ))),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|e| Failure::invalid(format!("bad complex number `{s}`: {e}")))
}

pub fn scatter(args: &ScatterArgs) -> Result<String> {
    let input = args
        .input
        .as_deref()
        .ok_or_else(|| Failure::invalid("scatter needs --input"))?;
    let u = read_potential(input)?;
    let mut cfg = SolverConfig::default();
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    let prob = ScatteringProblem::with_config(u, Mode::from(args.mode).into(), cfg)?;
    let zs: Vec<Complex64> = match (&args.z, &args.sweep) {
        (Some(z), None) => vec![parse_complex(z)?],
        (None, Some(sw)) => {
            let parts: Vec<&str> = sw.split(':').collect();
            let bad = || Failure::invalid(format!("sweep `{sw}` must be re0:re1:n"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            (0..n)
                .map(|k| {
                    let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                    Complex64::new(a + (b - a) * t, args.im)
                })
                .collect()
        }
        _ => return Err(Failure::invalid("give exactly one of --z or --sweep")),
    };
    let samples = prob.transmission_batch(&zs)?;
    Ok(to_json(&samples))
}

pub fn poles(args: &PolesArgs) -> Result<String> {
    let u = read_potential(&args.input)?;
    let prob = ScatteringProblem::new(u, Mode::from(args.mode).into())?;
    let set = find_poles(&prob, parse_rect(&args.rect)?, &PoleSearch::default())?;
    Ok(to_json(&set))
}

#[derive(Serialize)]
struct TraceCheck {
    line: f64,
    poles: f64,
    value: f64,
    err: f64,
    xi_max: f64,
    pole_count: usize,
    rel_diff: f64,
}

#[derive(Serialize)]
struct KernelTerm {
    name: &'static str,
    value: f64,
    max_modes: usize,
}

#[derive(Serialize)]
struct EnergyOutput {
    quantity: &'static str,
    result: iscat_core::energies::EnergyResult,
    trace: Option<TraceCheck>,
    kernel: Option<KernelTerm>,
}

pub fn energy(args: &EnergyArgs) -> Result<String> {
    let u = read_potential(&args.input)?;
    let mode = Mode::from(args.mode);
    let mut quad = QuadConfig::default();
    if let Some(tol) = args.tol {
        quad.tol = tol;
    }
    quad.tau_max = args.tau_max;
    quad.quadratic_subtraction = !args.no_subtraction;
    let mut spec = EnergySpec::new(args.s, mode).with_quad(quad);
    if let Some(n) = args.n {
        spec = spec.with_n(n);
    }
    let result = if args.momentum {
        momentum_ps(&u, &spec)?
    } else {
        energy_es(&u, &spec)?
    };
    let trace = if args.trace_check {
        if args.momentum {
            return Err(Failure::invalid("--trace-check applies to E_s only"));
        }
        let poles = if mode == Mode::Defocusing {
            None
        } else {
            let prob = ScatteringProblem::new(u.clone(), mode.into())?;
            Some(find_poles(&prob, parse_rect(&args.rect)?, &PoleSearch::default())?)
        };
        let tr = trace_line_side(&u, &spec, poles.as_ref())?;
        Some(TraceCheck {
            line: tr.line,
            poles: tr.poles,
            value: tr.value,
            err: tr.err,
            xi_max: tr.xi_max,
            pole_count: poles.map_or(0, |p| p.poles.len()),
            rel_diff: (tr.value - result.value).abs() / result.value.abs().max(f64::MIN_POSITIVE),
        })
    } else {
        None
    };
    let kernel = args.quartic.then(|| {
        if mode == Mode::Kdv {
            KernelTerm {
                name: "cubic",
                value: kdv_cubic_term(&u, args.s),
                max_modes: DEFAULT_KERNEL_MODES,
            }
        } else {
            KernelTerm {
                name: "quartic",
                value: quartic_term(&u, args.s),
                max_modes: DEFAULT_KERNEL_MODES,
            }
        }
    });
    Ok(to_json(&EnergyOutput {
        quantity: if args.momentum { "P_s" } else { "E_s" },
        result,
        trace,
        kernel,
    }))
}

#[derive(Serialize)]
struct DriftSummary {
    quantity: String,
    max_rel_drift: Option<f64>,
}

#[derive(Serialize)]
struct EvolveOutput {
    equation: String,
    dt: f64,
    steps: usize,
    snapshots: usize,
    max_mass_rel_drift: f64,
    drift: Vec<DriftSummary>,
}

pub fn evolve_cmd(args: &EvolveArgs) -> Result<String> {
    let u0 = read_potential(&args.input)?;
    let quantities: Vec<Quantity> = args
        .check
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Quantity>().map_err(Failure::invalid))
        .collect::<Result<_>>()?;
    let mut cfg = FlowConfig::new(args.eq.into(), args.dt, args.t_end);
    cfg.snapshot_every = args.snapshot_every;
    cfg.blowup_bound = args.blowup_bound;
    let traj = evolve(&u0, &cfg)?;
    let report = conservation_report(&traj, &quantities, &QuadConfig::default());
    if let Some(p) = &args.final_state {
        write_or_return(Some(p), traj.last().u.to_json())?;
    }
    let m0 = traj.mass[0];
    let summary = EvolveOutput {
        equation: cfg.equation.to_string(),
        dt: traj.dt,
        steps: traj.mass.len() - 1,
        snapshots: traj.snapshots.len(),
        max_mass_rel_drift: traj
            .mass
            .iter()
            .map(|m| if m0 == 0.0 { (m - m0).abs() } else { ((m - m0) / m0).abs() })
            .fold(0.0, f64::max),
        drift: quantities
            .iter()
            .map(|q| {
                let name = q.to_string();
                DriftSummary {
                    max_rel_drift: report.max_rel_drift(&name),
                    quantity: name,
                }
            })
            .collect(),
    };
    match &args.out {
        Some(p) => {
            write_or_return(Some(p), report.to_csv())?;
            Ok(to_json(&summary))
        }
        None => Ok(report.to_csv()),
    }
}

#[derive(Serialize)]
struct WordRecord {
    word: String,
    degree: usize,
    coefficient: String,
}

pub fn hopf_expand(max_degree: usize, format: Format) -> Result<String> {
    let series = iscat_hopf::logt_expansion(max_degree)?;
    Ok(match format {
        Format::Json => {
            let records: Vec<WordRecord> = series
                .iter()
                .map(|(w, c)| WordRecord {
                    word: w.to_string(),
                    degree: w.degree(),
                    coefficient: c.to_string(),
                })
                .collect();
            to_json(&records)
        }
        Format::Text => series.to_string(),
    })
}

#[derive(Serialize)]
struct DensityOutput {
    k: usize,
    mode: String,
    constant: String,
    text: String,
    monomials: Vec<iscat_core::diffpoly::MonomialRecord>,
}

pub fn hierarchy_print(k: usize, mode: Mode, format: Format) -> Result<String> {
    let d = hamiltonian_density(k, mode)?;
    Ok(match format {
        Format::Json => to_json(&DensityOutput {
            k,
            mode: mode.to_string(),
            constant: d.constant.to_string(),
            text: d.density.to_string(),
            monomials: d.density.records(),
        }),
        Format::Text => d.density.to_string(),
    })
}

/// Samples the requested profile on the requested grid.
pub fn generate_potential(args: &GenArgs) -> Result<GridFunction> {
    if !(args.width > 0.0 && args.width.is_finite()) {
        return Err(Failure::invalid(format!("width must be positive, got {}", args.width)));
    }
    if !(args.amplitude.is_finite() && args.center.is_finite() && args.carrier.is_finite()) {
        return Err(Failure::invalid("amplitude, center and carrier must be finite"));
    }
    let g = Grid::new(args.length, args.points)?;
    let (a, w, c, k) = (args.amplitude, args.width, args.center, args.carrier);
    let y = move |x: f64| (x - c) / w;
    Ok(match args.kind {
        Kind::Gaussian => g.sample_real(|x| a * (-y(x) * y(x)).exp()),
        Kind::Sech => g.sample_real(|x| a / y(x).cosh()),
        Kind::Sech2 => g.sample_real(|x| a / y(x).cosh().powi(2)),
        Kind::Modulated => {
            g.sample(|x| Complex64::from_polar(a * (-y(x) * y(x)).exp(), k * x))
        }
    })
}

pub fn gen(args: &GenArgs) -> Result<String> {
    let u = generate_potential(args)?;
    let text = match args.format {
        GridFormat::Json => u.to_json(),
        GridFormat::Csv => u.to_csv(),
    };
    write_or_return(args.out.as_deref(), text)
}
