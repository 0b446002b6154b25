//! The five subcommands. Each one writes its artifacts into the output
//! directory and returns what it wrote.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use qsr::gkls::{build_generator, verify_cp, GklsGenerator};
use qsr::kernel::{KernelSettings, DCoefficients};
use qsr::oracle::{
    build_hamiltonian, discretize_bath, error_curve, working_window, BathDiscretization, CurveStatus, ErrorCurve,
    ErrorCurveSettings, EvolveSettings, TruncatedSpace,
};
use qsr::propagator::{relaxation_rates, ApproxPropagator};
use qsr::quad::QuadConfig;
use qsr::spin::SpinObservable;
use qsr::{BathKernel, C64};

use crate::config::{ConfigError, RunConfig, SweepAxis, SweepWatch};
use crate::output::{num, to_json, write_atomic, Plot, Scale, Table, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] qsr::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for numerical or i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Numerical(qsr::Error::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            _ => match self {
                Self::Io(_) => "io",
                _ => "numerical",
            },
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind(), "message": self.to_string() },
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Spectrum,
    Evolve,
    OracleCompare,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Coeffs => "coeffs",
            Self::Spectrum => "spectrum",
            Self::Evolve => "evolve",
            Self::OracleCompare => "oracle-compare",
            Self::Sweep => "sweep",
        }
    }
}

/// Extra knobs that are not part of the physical configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    /// Replace the computed `d_m` (testing aid).
    pub injected_d: Option<DCoefficients>,
}

/// `re1,im1,re0,im0,re-1,im-1`.
pub fn parse_injected_d(text: &str) -> std::result::Result<DCoefficients, ConfigError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| ConfigError::Invalid(format!("injected d must be six numbers, got '{text}'")))?;
    if v.len() != 6 || v.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::Invalid(format!("injected d must be six finite numbers, got '{text}'")));
    }
    Ok(DCoefficients::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5])))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub status: String,
    pub files: Vec<PathBuf>,
}

pub fn execute(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Summary> {
    let mut run = Run {
        cfg,
        files: Vec::new(),
    };
    let status = match cmd {
        Command::Coeffs => coeffs(&mut run)?,
        Command::Spectrum => spectrum(&mut run, opts)?,
        Command::Evolve => evolve(&mut run, opts)?,
        Command::OracleCompare => oracle_compare(&mut run, opts)?,
        Command::Sweep => sweep(&mut run)?,
    };
    Ok(Summary { status, files: run.files })
}

struct Run<'a> {
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
}

impl Run<'_> {
    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        if self.cfg.formats.csv {
            self.files.push(write_atomic(&self.cfg.output_directory, name, &table.to_csv())?);
        }
        Ok(())
    }

    fn svg(&mut self, name: &str, plot: &Plot) -> Result<()> {
        if self.cfg.formats.svg {
            self.files.push(write_atomic(&self.cfg.output_directory, name, &plot.to_svg())?);
        }
        Ok(())
    }

    fn json(&mut self, name: &str, command: Command, status: &str, results: Value) -> Result<()> {
        if self.cfg.formats.json {
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "command": command.name(),
                "status": status,
                "config": self.cfg.raw().pairs(),
                "tolerances": tolerances(self.cfg),
                "results": results,
            });
            self.files.push(write_atomic(&self.cfg.output_directory, name, &to_json(&report))?);
        }
        Ok(())
    }
}

fn tolerances(cfg: &RunConfig) -> Value {
    let t = &cfg.tolerances;
    json!({
        "quad_abs": t.quad_abs,
        "principal_value": t.principal_value,
        "tail": t.tail,
        "kernel": t.kernel,
        "krylov": t.krylov,
        "cp": qsr::gkls::CpReport::TOLERANCE,
    })
}

fn kernel(cfg: &RunConfig) -> Result<BathKernel> {
    let settings = KernelSettings {
        quad: QuadConfig::with_abs_tol(cfg.tolerances.quad_abs),
        pv_tol: cfg.tolerances.principal_value,
        ..Default::default()
    };
    Ok(BathKernel::with_settings(cfg.cutoff, cfg.beta, settings)?)
}

fn coefficients(cfg: &RunConfig, opts: &Options) -> Result<DCoefficients> {
    match &opts.injected_d {
        Some(d) => Ok(d.clone()),
        None => Ok(kernel(cfg)?.d_coefficients()?),
    }
}

fn complex(z: C64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

fn observable(s: &SpinObservable) -> Value {
    let c = s.decompose();
    json!({
        "identity": complex(c.identity),
        "plus": complex(c.plus),
        "zero": complex(c.zero),
        "minus": complex(c.minus),
    })
}

fn evolve_settings(cfg: &RunConfig) -> EvolveSettings {
    EvolveSettings {
        kind: cfg.oracle.propagator,
        tolerance: cfg.tolerances.krylov,
        ..Default::default()
    }
}

// ---------------------------------------------------------------------------

fn coeffs(run: &mut Run) -> Result<String> {
    let cfg = run.cfg;
    let k = kernel(cfg)?;
    let d = k.d_coefficients()?;
    let samples = k.sample_u(&k.settings().abel)?;
    let mut entries = Vec::new();
    for m in [1, 0, -1] {
        let freq = d.get(m)?;
        let time = k.d_time_side_from_samples(m, &samples)?;
        entries.push(json!({
            "m": m,
            "frequency_side": complex(freq),
            "time_side": complex(time.value),
            "time_side_residual": num(time.residual),
            "time_side_tail_bound": num(time.tail_bound),
            "difference": num((freq - time.value).norm()),
        }));
    }
    let grid = cfg.time_grid();
    let mut table = Table::new(["t", "re_u", "im_u", "abs_u"]);
    let mut decay = 0.0f64;
    for &t in &grid {
        let u = k.u_of_t(t)?;
        decay = decay.max(u.norm() * (1.0 + t.powi(3)));
        table.push(vec![t, u.re, u.im, u.norm()]);
    }
    let results = json!({
        "d": entries,
        "re_d1": num(d.re_d1()),
        "re_d0": num(d.get(0)?.re),
        "re_dm1": num(d.get(-1)?.re),
        "lamb_shift": num(d.lamb_shift()),
        "golden_rule_surface_integral": num(k.surface_integral()),
        "u0": num(k.total_weight()?),
        "decay_constant": num(decay),
        "decay_grid": { "t_max": num(cfg.t_max), "n_points": cfg.n_points },
    });
    run.json("coeffs.json", Command::Coeffs, "ok", results)?;
    run.csv("u.csv", &table)?;
    run.svg(
        "u.svg",
        &Plot {
            title: "bath correlation u(t)".into(),
            x_label: "t".into(),
            y_label: "u".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: vec![
                ("Re u".into(), grid.iter().copied().zip(table.column(1)).collect()),
                ("Im u".into(), grid.iter().copied().zip(table.column(2)).collect()),
            ],
        },
    )?;
    Ok("ok".into())
}

fn spectrum_report(l: &GklsGenerator) -> Result<(Value, Table)> {
    let sys = l.eigensystem()?;
    let closed = l.closed_form_eigenpairs();
    let mut residual = 0.0f64;
    for cf in &closed {
        let nearest = sys.pairs.iter().map(|p| (p.value - cf.value).norm()).fold(f64::INFINITY, f64::min);
        let vec_res = (l.apply(&cf.vector) - cf.vector.scale(cf.value)).max_abs();
        residual = residual.max(nearest).max(vec_res);
    }
    let mut table = Table::new(["index", "re", "im"]);
    for (i, p) in sys.pairs.iter().enumerate() {
        table.push(vec![i as f64, p.value.re, p.value.im]);
    }
    let zero_multiplicity = sys.pairs.iter().filter(|p| p.value.norm() <= 1e-12).count();
    let cp: Vec<Value> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&tau| -> Result<Value> {
            let r = verify_cp(&l.semigroup(tau)?);
            Ok(json!({
                "tau": tau,
                "min_choi_eigenvalue": num(r.min_choi_eigenvalue),
                "trace_defect": num(r.trace_defect),
                "unitality_defect": num(r.unitality_defect),
                "hermiticity_defect": num(r.hermiticity_defect),
                "passed": r.passed(),
            }))
        })
        .collect::<Result<_>>()?;
    let report = json!({
        "eigenvalues": sys.pairs.iter().map(|p| complex(p.value)).collect::<Vec<_>>(),
        "real_parts": sys.pairs.iter().map(|p| num(p.value.re)).collect::<Vec<_>>(),
        "eigenpairs": sys.pairs.iter().map(|p| json!({ "value": complex(p.value), "vector": observable(&p.vector) })).collect::<Vec<_>>(),
        "closed_form": closed.iter().map(|p| json!({ "value": complex(p.value), "vector": observable(&p.vector) })).collect::<Vec<_>>(),
        "closed_form_residual": num(residual),
        "zero_multiplicity": zero_multiplicity,
        "condition": num(sys.condition),
        "cp_certification": cp,
        "coefficients": l.coefficients().as_array().iter().map(|&z| complex(z)).collect::<Vec<_>>(),
    });
    Ok((report, table))
}

fn spectrum(run: &mut Run, opts: &Options) -> Result<String> {
    let d = coefficients(run.cfg, opts)?;
    let l = build_generator(&d)?;
    let (mut report, table) = spectrum_report(&l)?;
    report["injected"] = Value::Bool(opts.injected_d.is_some());
    run.json("spectrum.json", Command::Spectrum, "ok", report)?;
    run.csv("spectrum.csv", &table)?;
    Ok("ok".into())
}

fn evolve(run: &mut Run, opts: &Options) -> Result<String> {
    let cfg = run.cfg;
    let d = coefficients(cfg, opts)?;
    let p = ApproxPropagator::new(&build_generator(&d)?, cfg.beta)?;
    let grid = cfg.time_grid();
    let (table, summary) = match &cfg.evolve.observable {
        None => {
            let traj = p.bloch_trajectory(cfg.evolve.initial.1, &grid, cfg.g)?;
            let mut t = Table::new(["t", "sx", "sy", "sz"]);
            for (&time, v) in grid.iter().zip(traj.bloch().unwrap_or(&[])) {
                t.push(vec![time, v[0], v[1], v[2]]);
            }
            let last = t.rows.last().cloned().unwrap_or_default();
            (t, json!({ "mode": "bloch", "initial": cfg.evolve.initial.0, "final": last[1..].to_vec() }))
        }
        Some((name, sigma)) => {
            let traj = p.observable_trajectory(sigma, &grid, cfg.g)?;
            let mut t = Table::new(["t", "re_ci", "im_ci", "re_cp", "im_cp", "re_c0", "im_c0", "re_cm", "im_cm"]);
            for (&time, s) in grid.iter().zip(traj.observables().unwrap_or(&[])) {
                let c = s.decompose();
                t.push(vec![
                    time,
                    c.identity.re,
                    c.identity.im,
                    c.plus.re,
                    c.plus.im,
                    c.zero.re,
                    c.zero.im,
                    c.minus.re,
                    c.minus.im,
                ]);
            }
            (t, json!({ "mode": "observable", "observable": name }))
        }
    };
    let rates = relaxation_rates(cfg.g, &d);
    let results = json!({
        "trajectory": summary,
        "g": cfg.g,
        "points": grid.len(),
        "longitudinal_rate": num(rates.longitudinal_rate),
        "transverse_rate": num(rates.transverse_rate),
        "frequency_shift": num(rates.frequency_shift),
    });
    run.json("evolve.json", Command::Evolve, "ok", results)?;
    run.csv("evolve.csv", &table)?;
    let series = (1..table.header.len())
        .map(|j| (table.header[j].clone(), grid.iter().copied().zip(table.column(j)).collect()))
        .collect();
    run.svg(
        "evolve.svg",
        &Plot {
            title: "approximate reduced dynamics".into(),
            x_label: "t".into(),
            y_label: "value".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series,
        },
    )?;
    Ok("ok".into())
}

struct Comparison {
    window: f64,
    target: f64,
    recurrence_time: f64,
    kernel_error: f64,
    tail_mass: f64,
    dimension: usize,
    nnz: usize,
    curve: ErrorCurve,
}

/// Full-vs-approximate comparison for `bath`, `cap` and `g_list`.
fn compare(cfg: &RunConfig, d: &DCoefficients, bath: &BathDiscretization, cap: usize, g_list: &[f64], window: Option<f64>) -> Result<Comparison> {
    let k = kernel(cfg)?;
    let approx = ApproxPropagator::new(&build_generator(d)?, cfg.beta)?;
    let g_min = g_list.iter().copied().filter(|&g| g > 0.0).fold(f64::INFINITY, f64::min);
    let target = match window {
        Some(w) => w,
        None if g_min.is_finite() => 3.0 / (2.0 * g_min * g_min * d.re_d1()),
        None => cfg.t_max,
    };
    let window = match window {
        Some(w) => w,
        None => {
            let (modes, _) = discretize_bath(&k, bath, 0.0)?;
            working_window(&k, &modes, target, cfg.tolerances.kernel, 0.05)?
        }
    };
    let (modes, rep) = discretize_bath(&k, bath, window)?;
    let moment = modes.kernel_mismatch_moment(&k, window, 0.05)?;
    let space = TruncatedSpace::new(modes.total_modes(), cap, cfg.oracle.dim_budget)?;
    let h = build_hamiltonian(&modes, cfg.beta, 0.0, &space)?;
    let step = cfg.oracle.grid_step;
    let n = (window / step + 1e-9).floor() as usize;
    let settings = ErrorCurveSettings {
        times: (0..=n).map(|i| i as f64 * step).collect(),
        evolve: evolve_settings(cfg),
        kernel_moment: moment,
    };
    let curve = error_curve(&h, &approx, &cfg.oracle.observable.1, g_list, &settings)?;
    Ok(Comparison {
        window,
        target,
        recurrence_time: rep.recurrence_time,
        kernel_error: rep.max_error,
        tail_mass: rep.tail_mass,
        dimension: h.dimension(),
        nnz: h.nnz(),
        curve,
    })
}

fn oracle_compare(run: &mut Run, opts: &Options) -> Result<String> {
    let cfg = run.cfg;
    let d = coefficients(cfg, opts)?;
    let c = compare(cfg, &d, &cfg.bath, cfg.oracle.excitation_cap, &cfg.g_list, cfg.oracle.window)?;
    let curve = &c.curve;
    let (status, reason) = match &curve.status {
        CurveStatus::Conclusive => ("conclusive", Value::Null),
        CurveStatus::Inconclusive(why) => ("inconclusive", Value::String(why.clone())),
    };
    let table: Vec<Value> = curve
        .rows
        .iter()
        .map(|r| {
            json!({
                "g": r.g,
                "sup_error": num(r.sup_error),
                "argmax_t": num(r.argmax_t),
                "scaled": num(r.scaled),
                "growth": num(r.growth),
                "below_floor": r.sup_error <= curve.floor,
            })
        })
        .collect();
    let results = json!({
        "observable": cfg.oracle.observable.0,
        "window": num(c.window),
        "window_target": num(c.target),
        "recurrence_time": num(c.recurrence_time),
        "kernel_max_error": num(c.kernel_error),
        "tail_mass": num(c.tail_mass),
        "dimension": c.dimension,
        "nnz": c.nnz,
        "excitation_cap": cfg.oracle.excitation_cap,
        "table": table,
        "propagation_floor": num(curve.propagation_floor),
        "kernel_floor": num(curve.kernel_floor),
        "floor": num(curve.floor),
        "reason": reason,
        "ratio_consistency": curve.ratio_consistency.map_or(Value::Null, num),
        "scaled_spread": curve.scaled_spread.map_or(Value::Null, num),
        "sred_defect": num(curve.sred_defect),
    });
    run.json("oracle.json", Command::OracleCompare, status, results)?;

    let mut header = vec!["t".to_string()];
    header.extend(curve.rows.iter().map(|r| format!("e_g{}", r.g)));
    let mut traces = Table::new(header);
    for (i, &t) in curve.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(curve.rows.iter().map(|r| r.trace[i]));
        traces.push(row);
    }
    run.csv("oracle_traces.csv", &traces)?;
    let mut points: Vec<(f64, f64)> = curve.rows.iter().map(|r| (r.g, r.sup_error)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let reference: Vec<(f64, f64)> = match curve.rows.iter().filter(|r| r.g > 0.0).max_by(|a, b| a.g.total_cmp(&b.g)) {
        Some(top) => points.iter().map(|&(g, _)| (g, top.scaled * g * g)).collect(),
        None => Vec::new(),
    };
    run.svg(
        "oracle.svg",
        &Plot {
            title: format!("sup-norm error vs coupling ({status})"),
            x_label: "g".into(),
            y_label: "E(g)".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![("E(g)".into(), points), ("g^2 reference".into(), reference)],
        },
    )?;
    Ok(status.into())
}

fn sweep(run: &mut Run) -> Result<String> {
    let cfg = run.cfg;
    let sw = &cfg.sweep;
    let d = match sw.watch {
        SweepWatch::Error => Some(kernel(cfg)?.d_coefficients()?),
        SweepWatch::Kernel => None,
    };
    let window = cfg.t_max;
    let points: Vec<Result<Vec<f64>>> = sw
        .values
        .par_iter()
        .map(|&v| -> Result<Vec<f64>> {
            let mut bath = cfg.bath;
            let mut cap = cfg.oracle.excitation_cap;
            match sw.axis {
                SweepAxis::NModes => bath.n_modes = v as usize,
                SweepAxis::ExcitationCap => cap = v as usize,
                SweepAxis::OmegaMax => bath.omega_max = v,
            }
            let k = kernel(cfg)?;
            let (_, rep) = discretize_bath(&k, &bath, window)?;
            let mut row = vec![v, rep.max_error];
            if let Some(d) = &d {
                let c = compare(cfg, d, &bath, cap, &[cfg.g], Some(window))?;
                row.push(c.curve.rows[0].sup_error);
            }
            Ok(row)
        })
        .collect();
    let mut header = vec![sw.axis.name().to_string(), "kernel_error".to_string()];
    if d.is_some() {
        header.push(format!("e_g{}", cfg.g));
    }
    let mut table = Table::new(header);
    for p in points {
        table.push(p?);
    }
    let mut rows = Vec::new();
    for r in &table.rows {
        let mut m = Map::new();
        for (h, v) in table.header.iter().zip(r) {
            m.insert(h.clone(), num(*v));
        }
        rows.push(Value::Object(m));
    }
    let results = json!({
        "axis": sw.axis.name(),
        "window": num(window),
        "watch": match sw.watch { SweepWatch::Kernel => "kernel", SweepWatch::Error => "error" },
        "rows": rows,
    });
    run.json("sweep.json", Command::Sweep, "ok", results)?;
    run.csv("sweep.csv", &table)?;
    Ok("ok".into())
}
