use std::str::FromStr;

use num_complex::Complex64;
use rmt_lab::equilibrium::{mass, verify_variational, DensityTable, Equilibrium, Measure, VariationalReport};
use rmt_lab::kernels::{
    check_global_limit, check_hard_edge, finite_n_kernel, gram_matrix, hard_edge_kernel, hard_edge_kernel_tanh_sinh,
    KernelEval, KernelRoute,
};
use rmt_lab::simulator::{run_ensemble, run_tau_ensemble, EnsembleStats};
use rmt_lab::special::{
    bessel_i, bessel_k, log_gamma_complex, meijer_g03, meijer_g03_at, meijer_g1_series, MeijerSpec,
};
use rmt_lab::spectral_curve::{boundary_values, endpoints, solve_branches, BranchSet, Side};
use rmt_lab::uniformization::{default_grid, trace_gamma, Contour};
use rmt_lab::{ModelParams, RawParams};
use serde::Serialize;

use crate::config::Config;
use crate::output::{Csv, Outputs};
use crate::{CliError, Command, ParamArgs};

pub struct Run {
    pub outputs: Outputs,
    pub params: Option<ModelParams>,
    pub seed: Option<u64>,
}

fn params(args: &ParamArgs, cfg: &Config) -> Result<ModelParams, CliError> {
    let raw = RawParams {
        alpha: cfg.require(args.alpha, "alpha")?,
        beta: cfg.require(args.beta, "beta")?,
        kappa: cfg.or(args.kappa, "kappa", 0)?,
        nu: cfg.or(args.nu, "nu", 0)?,
        n: cfg.or(args.n, "n", 2)?,
    };
    Ok(rmt_lab::model::validate(raw)?)
}

fn list<T: FromStr>(text: &str, key: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("`--{key}`: cannot parse `{s}`")))
        })
        .collect()
}

fn contour(name: &str) -> Result<Contour, CliError> {
    Contour::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| CliError::Usage(format!("unknown contour `{name}`")))
}

#[derive(Serialize)]
struct CurveReport {
    branches: BranchSet,
    max_quartic_residual: f64,
    vieta: [f64; 3],
}

#[derive(Serialize)]
struct DensityReport<'a> {
    measure: Measure,
    npoints: usize,
    exponent_fits: &'a std::collections::BTreeMap<String, f64>,
}

#[derive(Serialize, Default)]
struct VerifyReport {
    variational: Option<VariationalReport>,
    masses: Option<Vec<(Measure, f64)>>,
    balayage_max_relative_gap: Option<f64>,
}

#[derive(Serialize)]
struct SpecialReport {
    function: String,
    value: f64,
    /// Imaginary part, for complex-valued functions.
    value_im: Option<f64>,
    error: Option<f64>,
}

#[derive(Serialize)]
struct FiniteNReport {
    eval: KernelEval,
    gram_condition_estimate: f64,
}

/// EnsembleStats without the value list, which goes to CSV.
#[derive(Serialize)]
struct EnsembleSummary<'a> {
    params: &'a ModelParams,
    trials: usize,
    seed: u64,
    count: usize,
    ks_distance: f64,
    moment_summary: [f64; 3],
    moment_standard_errors: [f64; 3],
    tau: Option<f64>,
}

pub fn execute(command: &Command, cfg: &Config) -> Result<Run, CliError> {
    let mut out = Outputs::new();
    let mut used_params = None;
    let mut seed = None;
    match command {
        Command::Endpoints { params: a } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            out.json("endpoints.json", &endpoints(&p)?)?;
        }
        Command::Curve {
            params: a,
            z_re,
            z_im,
            side,
        } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            let re: f64 = cfg.require(*z_re, "z-re")?;
            let im: f64 = cfg.or(*z_im, "z-im", 0.0)?;
            let side: Option<String> = cfg.pick(side.clone(), "side")?;
            let branches = match side.as_deref() {
                None => solve_branches(&p, Complex64::new(re, im))?,
                Some(s) => {
                    if im != 0.0 {
                        return Err(CliError::Usage("`--side` applies to real z only".into()));
                    }
                    let side = match s {
                        "plus" => Side::Plus,
                        "minus" => Side::Minus,
                        _ => return Err(CliError::Usage(format!("unknown side `{s}`"))),
                    };
                    boundary_values(&p, re, side)?
                }
            };
            out.json(
                "curve.json",
                &CurveReport {
                    max_quartic_residual: branches.max_residual(&p),
                    vieta: branches.vieta(&p),
                    branches,
                },
            )?;
        }
        Command::Contours {
            params: a,
            which,
            npoints,
            ratio,
        } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            let which: String = cfg.or(which.clone(), "which", "g2minus".into())?;
            let npoints: usize = cfg.or(*npoints, "npoints", 200)?;
            let ratio: f64 = cfg.or(*ratio, "ratio", 1.2)?;
            let c = contour(&which)?;
            let trace = trace_gamma(&p, c, &default_grid(&p, c, npoints, ratio))?;
            let mut csv = Csv::new(&["x", "t_re", "t_im", "z_residual"]);
            for pt in &trace.points {
                csv.nums(&[pt.x, pt.t.re, pt.t.im, pt.z_residual]);
            }
            out.csv(&format!("contour_{}.csv", c.name()), csv);
        }
        Command::Density {
            params: a,
            measure,
            npoints,
        } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            let name: String = cfg.or(measure.clone(), "measure", "mu2".into())?;
            let m = Measure::from_str(&name).map_err(|e| CliError::Usage(e.to_string()))?;
            let npoints: usize = cfg.or(*npoints, "npoints", 400)?;
            let eq = Equilibrium::new(&p)?;
            let table = DensityTable::build(&eq, m, npoints)?;
            let column = format!("d{}_dx", m.name());
            let mut csv = Csv::new(&["x", &column]);
            for &(x, d) in &table.rows {
                csv.nums(&[x, d]);
            }
            out.json(
                &format!("density_{}.json", m.name()),
                &DensityReport {
                    measure: m,
                    npoints: table.rows.len(),
                    exponent_fits: &table.exponent_fits,
                },
            )?;
            out.csv(&format!("density_{}.csv", m.name()), csv);
        }
        Command::Verify {
            params: a,
            variational,
            masses,
            balayage,
        } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            let mut sel = [
                cfg.switch(*variational, "variational")?,
                cfg.switch(*masses, "masses")?,
                cfg.switch(*balayage, "balayage")?,
            ];
            if !sel.iter().any(|&s| s) {
                sel = [true; 3];
            }
            let mut report = VerifyReport::default();
            if sel[0] {
                report.variational = Some(verify_variational(&p)?);
            }
            if sel[1] {
                let mut rows = Vec::new();
                for (m, want, tol) in [(Measure::Mu1, 0.5, 5e-5), (Measure::Mu2, 1.0, 1e-8), (Measure::Mu3, 0.5, 5e-7)] {
                    let v = mass(&p, m)?;
                    if !((v - want).abs() <= tol) {
                        return Err(CliError::Compute(rmt_lab::Error::ConsistencyFailure {
                            check: "mass",
                            residual: (v - want).abs(),
                            bound: tol,
                        }));
                    }
                    rows.push((m, v));
                }
                report.masses = Some(rows);
            }
            if sel[2] {
                let eq = Equilibrium::new(&p)?;
                let mut worst: f64 = 0.0;
                for k in 0..40 {
                    let x = -eq.q * 10f64.powf(-3.0 + 6.0 * k as f64 / 39.0);
                    let a = eq.density_mu3_balayage(x)?;
                    let b = eq.density_plemelj(Measure::Mu3, x)?;
                    worst = worst.max((a - b).abs() / b.abs());
                }
                if !(worst < 1e-6) {
                    return Err(CliError::Compute(rmt_lab::Error::ConsistencyFailure {
                        check: "balayage_equivalence",
                        residual: worst,
                        bound: 1e-6,
                    }));
                }
                report.balayage_max_relative_gap = Some(worst);
            }
            out.json("verify.json", &report)?;
        }
        Command::Special {
            function,
            m,
            b,
            zeta,
            abscissa,
            order,
            x,
            re,
            im,
        } => {
            let f: String = cfg.require(function.clone(), "fn")?;
            let report = match f.as_str() {
                "meijer" | "meijer-series" => {
                    let m: u32 = cfg.or(*m, "m", 1)?;
                    let b: String = cfg.require(b.clone(), "b")?;
                    let b: Vec<f64> = list(&b, "b")?;
                    let b: [f64; 3] = b
                        .try_into()
                        .map_err(|_| CliError::Usage("`--b` needs three values".into()))?;
                    let spec = MeijerSpec::new(m, b).map_err(|e| CliError::Usage(e.to_string()))?;
                    let zeta: f64 = cfg.require(*zeta, "zeta")?;
                    if f == "meijer-series" {
                        SpecialReport {
                            function: f,
                            value: meijer_g1_series(&spec, zeta)?,
                            value_im: None,
                            error: None,
                        }
                    } else {
                        let v = match cfg.pick(*abscissa, "abscissa")? {
                            Some(c) => meijer_g03_at(&spec, zeta, c)?,
                            None => meijer_g03(&spec, zeta)?,
                        };
                        SpecialReport {
                            function: f,
                            value: v.value,
                            value_im: None,
                            error: Some(v.error),
                        }
                    }
                }
                "bessel-i" | "bessel-k" => {
                    let order: u32 = cfg.or(*order, "order", 0)?;
                    let x: f64 = cfg.require(*x, "x")?;
                    let value = if f == "bessel-i" { bessel_i(order, x)? } else { bessel_k(order, x)? };
                    SpecialReport {
                        function: f,
                        value,
                        value_im: None,
                        error: None,
                    }
                }
                "log-gamma" => {
                    let s = Complex64::new(cfg.require(*re, "re")?, cfg.or(*im, "im", 0.0)?);
                    let v = log_gamma_complex(s)?;
                    SpecialReport {
                        function: f,
                        value: v.re,
                        value_im: Some(v.im),
                        error: None,
                    }
                }
                other => return Err(CliError::Usage(format!("unknown function `{other}`"))),
            };
            out.json("special.json", &report)?;
        }
        Command::Kernel {
            params: a,
            mode,
            nu1,
            nu2,
            x,
            y,
            route,
        } => {
            let mode: String = cfg.or(mode.clone(), "mode", "hard-edge".into())?;
            let x: f64 = cfg.require(*x, "x")?;
            let y: f64 = cfg.require(*y, "y")?;
            match mode.as_str() {
                "hard-edge" => {
                    let nu1: u32 = cfg.or(*nu1, "nu1", 0)?;
                    let nu2: u32 = cfg.or(*nu2, "nu2", 0)?;
                    let route: String = cfg.or(route.clone(), "route", "gauss".into())?;
                    let value = match route.as_str() {
                        "gauss" => hard_edge_kernel(nu1, nu2, x, y)?,
                        "tanh-sinh" => hard_edge_kernel_tanh_sinh(nu1, nu2, x, y)?,
                        r => return Err(CliError::Usage(format!("unknown route `{r}`"))),
                    };
                    out.json(
                        "kernel.json",
                        &KernelEval {
                            x,
                            y,
                            value,
                            route: KernelRoute::HardEdgeLimit,
                        },
                    )?;
                }
                "finite-n" => {
                    let p = params(a, cfg)?.require_even_n()?;
                    used_params = Some(p);
                    let gram = gram_matrix(&p)?;
                    let eval = finite_n_kernel(&p, &gram, x, y)?;
                    out.json(
                        "kernel.json",
                        &FiniteNReport {
                            eval,
                            gram_condition_estimate: gram.condition_estimate,
                        },
                    )?;
                }
                m => return Err(CliError::Usage(format!("unknown kernel mode `{m}`"))),
            }
        }
        Command::Simulate {
            params: a,
            trials,
            seed: s,
            tau,
        } => {
            let trials: usize = cfg.or(*trials, "trials", 40)?;
            let s: u64 = cfg.or(*s, "seed", 0)?;
            seed = Some(s);
            let tau: Option<f64> = cfg.pick(*tau, "tau")?;
            let stats: EnsembleStats = match tau {
                Some(t) => {
                    let n: i64 = cfg.or(a.n, "n", 2)?;
                    let nu: i64 = cfg.or(a.nu, "nu", 0)?;
                    if n <= 0 || nu < 0 || !(t > 0.0 && t < 1.0) {
                        return Err(CliError::Usage("τ run needs n > 0, nu ≥ 0 and 0 < τ < 1".into()));
                    }
                    run_tau_ensemble(n as usize, (n + nu) as usize, t, trials, s)?
                }
                None => {
                    let p = params(a, cfg)?.require_even_n()?;
                    run_ensemble(&p, trials, s)?
                }
            };
            used_params = Some(stats.params);
            out.json(
                "simulate.json",
                &EnsembleSummary {
                    params: &stats.params,
                    trials: stats.trials,
                    seed: stats.seed,
                    count: stats.values.len(),
                    ks_distance: stats.ks_distance,
                    moment_summary: stats.moment_summary,
                    moment_standard_errors: stats.moment_standard_errors,
                    tau,
                },
            )?;
            let mut csv = Csv::new(&["squared_singular_value_over_n2"]);
            for &v in &stats.values {
                csv.nums(&[v]);
            }
            out.csv("simulate_values.csv", csv);
        }
        Command::Compare {
            params: a,
            what,
            ns,
            xs,
            pairs,
        } => {
            let p = params(a, cfg)?;
            used_params = Some(p);
            let what: String = cfg.or(what.clone(), "what", "global".into())?;
            let ns: String = cfg.or(ns.clone(), "ns", "4,6,8".into())?;
            let ns: Vec<u32> = list(&ns, "ns")?;
            match what.as_str() {
                "global" => {
                    let pe = rmt_lab::spectral_curve::closed_form_endpoints(&p).0;
                    let xs: Vec<f64> = match cfg.pick(xs.clone(), "xs")? {
                        Some(s) => list(&s, "xs")?,
                        None => vec![0.25 * pe, 0.5 * pe, 0.75 * pe],
                    };
                    let mut csv = Csv::new(&["n", "x", "n_kn_scaled", "dmu2_dx", "deviation"]);
                    for &n in &ns {
                        let pn = p.with_n(n)?.require_even_n()?;
                        for r in check_global_limit(&pn, &xs)? {
                            csv.row(&[
                                r.n.to_string(),
                                crate::output::num(r.x),
                                crate::output::num(r.scaled_kernel),
                                crate::output::num(r.dmu2_dx),
                                crate::output::num(r.deviation),
                            ]);
                        }
                    }
                    out.csv("compare_global.csv", csv);
                }
                "hard-edge" => {
                    let text: String = cfg.or(pairs.clone(), "pairs", "0.5,0.5;1,1;1,2".into())?;
                    let mut pts = Vec::new();
                    for item in text.split(';') {
                        let v: Vec<f64> = list(item, "pairs")?;
                        match v[..] {
                            [x, y] => pts.push((x, y)),
                            _ => return Err(CliError::Usage(format!("`--pairs`: `{item}` is not x,y"))),
                        }
                    }
                    let mut csv = Csv::new(&[
                        "n",
                        "x",
                        "y",
                        "kn_scaled",
                        "meijer_kernel_limit",
                        "deviation",
                        "gauge_matched_limit",
                        "gauge_matched_deviation",
                    ]);
                    for &n in &ns {
                        let pn = p.with_n(n)?.require_even_n()?;
                        for r in check_hard_edge(&pn, &pts)? {
                            let mut cells = vec![r.n.to_string()];
                            cells.extend(
                                [
                                    r.x,
                                    r.y,
                                    r.scaled_finite_n,
                                    r.limit_value,
                                    r.deviation,
                                    r.gauge_matched_limit,
                                    r.gauge_matched_deviation,
                                ]
                                .map(crate::output::num),
                            );
                            csv.row(&cells);
                        }
                    }
                    out.csv("compare_hard_edge.csv", csv);
                }
                w => return Err(CliError::Usage(format!("unknown comparison `{w}`"))),
            }
        }
    }
    Ok(Run {
        outputs: out,
        params: used_params,
        seed,
    })
}
