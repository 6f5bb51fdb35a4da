use std::fmt::Write as _;

use anyhow::{bail, Context};
use kdvist::hankel::{self, kernel_at, singular_spectrum, solve_grid, truncation_length, NystromDiscretization, Route};
use kdvist::oracle::{evolve_pde, mollified_step};
use kdvist::potential::Potential;
use kdvist::scattering::{self, ScatteringData};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, Outputs};

/// Result of a command: `false` means a check inside it failed (exit code 1).
pub type Outcome = anyhow::Result<bool>;

fn data_for(cfg: &RunConfig) -> anyhow::Result<ScatteringData> {
    if let Some(path) = &cfg.scattering_file {
        return ScatteringData::read(path).with_context(|| format!("reading scattering data {}", path.display()));
    }
    let p = cfg.build_potential()?;
    Ok(scattering::scatter(&p, &cfg.scatter)?)
}

fn summary(p: Option<&Potential>, data: &ScatteringData) -> String {
    let mut out = String::new();
    if let Some(p) = p {
        writeln!(out, "potential      {}", p.tag()).unwrap();
    }
    writeln!(out, "time           {}", data.time).unwrap();
    writeln!(out, "step height    {}", data.step_height).unwrap();
    writeln!(out, "split point    {}", data.split_point).unwrap();
    if let Some(b) = data.truncation {
        writeln!(out, "truncated at   {b}").unwrap();
    }
    writeln!(out, "k points       {}", data.reflection.len()).unwrap();
    let sup_r = data.reflection.iter().map(|s| s.r.norm()).fold(0.0, f64::max);
    writeln!(out, "sup |R|        {sup_r:e}").unwrap();
    writeln!(out, "unitarity      {:e} (worst on 0.05 <= |k| <= 20)", data.max_unitarity_residual(0.05, 20.0)).unwrap();
    if !data.flagged.is_empty() {
        writeln!(out, "flagged k      {:?}", data.flagged).unwrap();
    }
    writeln!(out, "bound states   {}", data.atoms.len()).unwrap();
    for a in &data.atoms {
        writeln!(out, "  kappa {:<22} c {}", num(a.kappa), num(a.mass)).unwrap();
    }
    if !data.density.is_empty() {
        writeln!(out, "density nodes  {}", data.density.len()).unwrap();
        writeln!(out, "rho mass       {}", num(data.rho_total_mass())).unwrap();
    }
    out
}

pub fn scatter(cfg: &RunConfig) -> Outcome {
    let p = match &cfg.scattering_file {
        Some(_) => None,
        None => Some(cfg.build_potential()?),
    };
    let data = data_for(cfg)?;
    let mut out = Outputs::create(&cfg.output)?;
    out.write("scattering.dat", &data.to_file_string())?;
    let text = summary(p.as_ref(), &data);
    print!("{text}");
    out.write("summary.txt", &text)?;
    let atoms: Vec<_> = data.atoms.iter().map(|a| json!({"kappa": a.kappa, "c": a.mass})).collect();
    out.finish(
        "scatter",
        cfg,
        json!({
            "atoms": atoms,
            "unitarity_worst": data.max_unitarity_residual(0.05, 20.0),
            "sup_abs_r": data.reflection.iter().map(|s| s.r.norm()).fold(0.0, f64::max),
            "flagged": data.flagged,
        }),
    )?;
    Ok(true)
}

pub fn rho(cfg: &RunConfig) -> Outcome {
    let p = cfg.build_potential()?;
    let a = cfg.scatter.split_point.unwrap_or_else(|| p.natural_split_point());
    let h = scattering::step_height(&p)?;
    let s: Vec<f64> = cfg.grid.s.values().into_iter().filter(|&s| s > 0.0 && s < h).collect();
    let m = scattering::rho_measure(&p, a, &s)?;
    let mut out = Outputs::create(&cfg.output)?;
    let mut atoms = String::from("kappa,mass\n");
    for at in &m.atoms {
        writeln!(atoms, "{},{}", num(at.kappa), num(at.mass)).unwrap();
    }
    let mut density = String::from("s,density\n");
    for &(s, d) in &m.density {
        writeln!(density, "{},{}", num(s), num(d)).unwrap();
    }
    out.write("rho_atoms.csv", &atoms)?;
    out.write("rho_density.csv", &density)?;
    println!("split point {a}, step height {h}, {} atoms, {} density samples", m.atoms.len(), m.density.len());
    out.finish("rho", cfg, json!({ "split_point": a, "step_height": h, "atoms": m.atoms.len() }))?;
    Ok(true)
}

pub fn evolve(cfg: &RunConfig) -> Outcome {
    let data = data_for(cfg)?;
    let mut out = Outputs::create(&cfg.output)?;
    let mut files = Vec::new();
    for (i, t) in cfg.grid.t.values().into_iter().enumerate() {
        let name = format!("scattering_t{i:03}.dat");
        out.write(&name, &scattering::evolve_data(&data, t - data.time).to_file_string())?;
        files.push(json!({ "file": name, "t": t }));
    }
    println!("wrote {} evolved data sets", files.len());
    out.finish("evolve", cfg, json!({ "times": files }))?;
    Ok(true)
}

pub fn solve(cfg: &RunConfig) -> Outcome {
    let data = data_for(cfg)?;
    let grid = solve_grid(&data, &cfg.grid.x.values(), &cfg.grid.t.values(), cfg.route, &cfg.hankel)?;
    let mut out = Outputs::create(&cfg.output)?;
    out.write("solution.csv", &grid.to_csv())?;
    let failed = grid.failures().count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed (see the status column)", grid.points.len());
    }
    let worst_residual = grid.points.iter().map(|p| p.residual).filter(|r| r.is_finite()).fold(0.0, f64::max);
    let min_lambda = grid.points.iter().map(|p| p.lambda_min).filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
    println!("{} points, {failed} failed, worst route residual {worst_residual:e}, min lambda_min {min_lambda}", grid.points.len());
    let fourier: Vec<_> = grid.fourier.iter().map(|(t, c)| json!({ "t": t, "certificate": c })).collect();
    out.finish(
        "solve",
        cfg,
        json!({
            "route": cfg.route,
            "route_tol": cfg.hankel.route_tol,
            "route_tol_step": cfg.hankel.route_tol_step,
            "points": grid.points.len(),
            "failed": failed,
            "worst_route_residual": worst_residual,
            "min_lambda_min": min_lambda,
            "fourier": fourier,
        }),
    )?;
    Ok(true)
}

pub fn glm_check(cfg: &RunConfig) -> Outcome {
    let data = data_for(cfg)?;
    let mut opts = cfg.hankel.clone();
    opts.check_routes = true;
    let grid = solve_grid(&data, &cfg.grid.x.values(), &cfg.grid.t.values(), Route::Glm, &opts)?;
    let tol = if data.step_height > 0.0 { opts.route_tol_step } else { opts.route_tol };
    let mut csv = String::from("x,t,q_trace,q_finite_diff,q_glm,residual\n");
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for p in &grid.points {
        let res = p.residual;
        if !(res <= tol) {
            bad += 1;
        }
        if res.is_finite() {
            worst = worst.max(res);
        }
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(p.x),
            num(p.t),
            num(p.q_trace),
            num(p.q_finite_diff.unwrap_or(f64::NAN)),
            num(p.q_glm.unwrap_or(f64::NAN)),
            num(res)
        )
        .unwrap();
    }
    let mut out = Outputs::create(&cfg.output)?;
    out.write("glm_check.csv", &csv)?;
    println!("{} points, worst route residual {worst:e} (tolerance {tol:e}), {bad} above tolerance or failed", grid.points.len());
    out.finish("glm-check", cfg, json!({ "tolerance": tol, "worst": worst, "above_tolerance": bad }))?;
    Ok(bad == 0)
}

/// Initial profile on the oracle grid: the potential itself, or a smoothed step for data with
/// a left step.
pub fn oracle_initial(p: &Potential, cfg: &RunConfig) -> anyhow::Result<Vec<f64>> {
    let solver = &cfg.oracle.solver;
    let h = scattering::step_height(p).unwrap_or(0.0);
    Ok(if scattering::is_step(p) {
        let step = mollified_step(h, cfg.oracle.mollifier, solver.domain_half_length);
        solver.grid().iter().map(|&x| step(x)).collect()
    } else if p.is_short_range() {
        solver.grid().iter().map(|&x| p.eval(x)).collect()
    } else {
        bail!("the oracle handles decaying data and constant left steps only");
    })
}

pub fn oracle(cfg: &RunConfig) -> Outcome {
    let p = cfg.build_potential()?;
    let q0 = oracle_initial(&p, cfg)?;
    let ts = cfg.grid.t.values();
    let mut solver = cfg.oracle.solver.clone();
    solver.t_end = ts.iter().copied().fold(0.0, f64::max);
    let run = evolve_pde(&q0, &ts, &solver)?;
    let xs = cfg.grid.x.values();
    let mut csv = String::from(hankel::SOLUTION_HEADER);
    csv.push('\n');
    let length = 2.0 * solver.domain_half_length;
    for s in 0..run.snapshots.len() {
        for (&x, q) in xs.iter().zip(run.sample_many(s, &xs)) {
            writeln!(csv, "{},{},{},nan,nan,nan,{},{},true,ok", num(x), num(run.snapshots[s].t), num(q), solver.modes, num(length)).unwrap();
        }
    }
    let mut out = Outputs::create(&cfg.output)?;
    out.write("oracle.csv", &csv)?;
    let (mass, energy) = run.conservation_drift();
    println!("{} snapshots, drift of int q {mass:e}, of int q^2 {energy:e}", run.snapshots.len());
    out.finish("oracle", cfg, json!({ "mass_drift": mass, "energy_drift": energy, "modes": solver.modes, "dt": solver.dt }))?;
    Ok(true)
}

pub fn svd_report(cfg: &RunConfig) -> Outcome {
    let data = data_for(cfg)?;
    let xs = cfg.grid.x.values();
    let mut values = String::from("x,t,index,value\n");
    let mut fits = String::from("x,t,n,length,noise_floor,used,log_c,omega,r_squared,notice\n");
    let mut fitted = 0;
    for t in cfg.grid.t.values() {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let kernel = kernel_at(&data, t, lo, hi, &cfg.hankel)?;
        for &x in &xs {
            let length = truncation_length(&kernel, x, &cfg.hankel)?;
            let disc = NystromDiscretization::assemble(&kernel, x, length, cfg.hankel.nodes, false)?;
            let s = singular_spectrum(&disc, hankel::DATA_RELATIVE_ACCURACY);
            for (i, v) in s.values.iter().enumerate() {
                writeln!(values, "{},{},{},{}", num(x), num(t), i + 1, num(*v)).unwrap();
            }
            let (used, log_c, omega, r2) = match &s.fit {
                Some(f) => {
                    fitted += 1;
                    (f.used, f.log_c, f.omega, f.r_squared)
                }
                None => (0, f64::NAN, f64::NAN, f64::NAN),
            };
            writeln!(
                fits,
                "{},{},{},{},{},{used},{},{},{},{}",
                num(x),
                num(t),
                disc.n(),
                num(length),
                num(s.noise_floor),
                num(log_c),
                num(omega),
                num(r2),
                s.notice.as_deref().unwrap_or("")
            )
            .unwrap();
        }
    }
    let mut out = Outputs::create(&cfg.output)?;
    out.write("svd_values.csv", &values)?;
    out.write("svd_fit.csv", &fits)?;
    println!("{fitted} of {} points fitted", xs.len() * cfg.grid.t.values().len());
    out.finish("svd-report", cfg, json!({ "fitted": fitted, "relative_floor": hankel::DATA_RELATIVE_ACCURACY }))?;
    Ok(true)
}
