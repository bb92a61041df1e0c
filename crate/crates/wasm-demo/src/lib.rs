//! Browser demo: three interactive views into the laboratory, exported
//! through wasm-bindgen as JSON-returning calls so the page needs no
//! framework, just sliders and a canvas.

use heatlab::besov::{besov_value, BesovIndex};
use heatlab::cutoffs::{
    build_cutoffs, heat_multiply, lp_block, verify_partition_of_unity, TransitionProfile,
};
use heatlab::families::Family;
use heatlab::fd::{build_mask, exp_decay_fit, fd_solve, FdSolverConfig, Lattice, MaskKind};
use heatlab::grid::{Field, Grid};
use heatlab::heat::TimeGrid;
use heatlab::nonlinear::{solve_semilinear, NonlinearSpec, Outcome, Transport};
use std::f64::consts::PI;
use wasm_bindgen::prelude::wasm_bindgen;

fn err_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// Littlewood-Paley band explorer: the chi/phi profiles, the partition
/// of unity sum over the covered annulus, and the band decomposition of
/// a two-mode demo field.
///
/// `phi_scale` = 1 is the honest apparatus; other values break the
/// telescoping identity on purpose so the deviation readout reacts.
#[wasm_bindgen]
pub fn lp_explorer(points: usize, smoothstep_order: usize, phi_scale: f64) -> String {
    let Ok(grid) = Grid::new(1, points, 2.0 * PI) else {
        return err_json("points must be a power of two >= 8");
    };
    let profile = TransitionProfile {
        order: smoothstep_order.clamp(0, 6),
    };
    let cutoffs = match build_cutoffs(profile, &grid) {
        Ok(c) => c.with_phi_scale(phi_scale),
        Err(e) => return err_json(&e.to_string()),
    };
    let deviation = verify_partition_of_unity(&cutoffs, &grid);

    // Profile curves on a log-frequency axis.
    let mut rho = Vec::new();
    let mut chi = Vec::new();
    let mut phi = Vec::new();
    let mut sum = Vec::new();
    let lo = ((cutoffs.j_min() - 2) as f64).exp2();
    let hi = ((cutoffs.j_max() + 1) as f64).exp2();
    for i in 0..400 {
        let r = lo * (hi / lo).powf(i as f64 / 399.0);
        rho.push(r);
        chi.push(cutoffs.chi(r));
        phi.push(cutoffs.phi(r));
        let s: f64 = ((cutoffs.j_min() - 2)..=(cutoffs.j_max() + 2))
            .map(|j| cutoffs.phi((-j as f64).exp2() * r))
            .sum();
        sum.push(s);
    }

    // Band energies of a two-mode field.
    let k_lo = (cutoffs.j_min() as f64 + 0.5).exp2().round();
    let k_hi = (cutoffs.j_max() as f64 - 0.5).exp2().round();
    let u = Field::from_fn(grid, |x| (k_lo * x[0]).sin() + 0.5 * (k_hi * x[0]).cos());
    let bands: Vec<serde_json::Value> = cutoffs
        .bands()
        .map(|j| {
            let energy = lp_block(&u, j, &cutoffs)
                .map(|b| b.lp_norm(2.0))
                .unwrap_or(0.0);
            serde_json::json!({ "j": j, "energy": energy })
        })
        .collect();

    serde_json::json!({
        "j_min": cutoffs.j_min(),
        "j_max": cutoffs.j_max(),
        "deviation": deviation,
        "rho": rho,
        "chi": chi,
        "phi": phi,
        "sum": sum,
        "bands": bands,
        "field_modes": [k_lo, k_hi],
    })
    .to_string()
}

/// Heat decay explorer: norm-decay curves with their fitted and
/// theoretical rates for three geometries.
///
/// `geometry`: 0 = Dirichlet interval (exponential rate vs nu pi^2),
/// 1 = torus spike (algebraic L1 -> Linf kernel decay), 2 = slab
/// eigenfunction (exponential, rate nu (2 pi / L)^2).
#[wasm_bindgen]
pub fn heat_decay(geometry: usize, nu: f64, resolution: usize) -> String {
    if !(nu > 0.0) {
        return err_json("viscosity must be positive");
    }
    match geometry {
        0 => {
            let points = resolution.clamp(50, 400);
            let lattice = match Lattice::new(1, points, 1.0 / (points - 1) as f64) {
                Ok(l) => l,
                Err(e) => return err_json(&e.to_string()),
            };
            let mask = match build_mask(MaskKind::Box, lattice) {
                Ok(m) => m,
                Err(e) => return err_json(&e.to_string()),
            };
            let u0: Vec<f64> = (0..lattice.total_points())
                .map(|flat| {
                    let x = lattice.coords(flat)[0];
                    if flat == 0 || flat == lattice.total_points() - 1 {
                        0.0
                    } else {
                        (PI * x).sin() + 0.3 * (3.0 * PI * x).sin()
                    }
                })
                .collect();
            let t_end = 0.5 / nu;
            let config = FdSolverConfig::new(t_end / 4000.0, nu);
            let samples: Vec<f64> = (1..=24).map(|i| t_end * i as f64 / 24.0).collect();
            let sol = match fd_solve(&mask, &config, &u0, None, t_end, &samples) {
                Ok(s) => s,
                Err(e) => return err_json(&e.to_string()),
            };
            let norms: Vec<f64> = sol
                .snapshots
                .iter()
                .map(|s| mask.domain_lp(s, 2.0))
                .collect();
            let fit = match exp_decay_fit(&mask, &sol, 2.0, nu * PI * PI) {
                Ok(f) => f,
                Err(e) => return err_json(&e.to_string()),
            };
            serde_json::json!({
                "kind": "exponential",
                "label": "Dirichlet interval, L2 norm",
                "t": sol.sample_times,
                "norm": norms,
                "fitted_rate": fit.slope,
                "target_rate": fit.target,
                "r_squared": fit.r_squared,
            })
            .to_string()
        }
        1 => {
            let points = resolution.clamp(64, 512).next_power_of_two();
            let grid = match Grid::new(1, points, 40.0) {
                Ok(g) => g,
                Err(e) => return err_json(&e.to_string()),
            };
            let mut samples = vec![0.0; grid.total_points()];
            samples[grid.total_points() / 2] = 1.0 / grid.spacing();
            let u0 = match Field::from_samples(grid, samples) {
                Ok(u) => u,
                Err(e) => return err_json(&e.to_string()),
            };
            let l1 = u0.lp_norm(1.0);
            let t_far = (grid.period() / 4.0).powi(2) / (4.0 * nu);
            let mut ts = Vec::new();
            let mut sups = Vec::new();
            for i in 0..24 {
                let t = 0.05 * (t_far / 0.05f64).powf(i as f64 / 23.0);
                let sup = match heat_multiply(&u0, t, nu) {
                    Ok(v) => v.sup_norm() / l1,
                    Err(e) => return err_json(&e.to_string()),
                };
                ts.push(t);
                sups.push(sup);
            }
            let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let ys: Vec<f64> = sups.iter().map(|v| v.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let slope = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum::<f64>()
                / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
            serde_json::json!({
                "kind": "algebraic",
                "label": "torus spike, Linf/L1",
                "t": ts,
                "norm": sups,
                "fitted_rate": slope,
                "target_rate": -0.5,
                "r_squared": 1.0,
            })
            .to_string()
        }
        2 => {
            let points = resolution.clamp(32, 256).next_power_of_two();
            let grid = match Grid::new(1, points, 2.0 * PI) {
                Ok(g) => g,
                Err(e) => return err_json(&e.to_string()),
            };
            let u0 = Field::from_fn(grid, |x| x[0].sin());
            let t_end = 1.5 / nu;
            let mut ts = Vec::new();
            let mut norms = Vec::new();
            for i in 0..=24 {
                let t = t_end * i as f64 / 24.0;
                let v = match heat_multiply(&u0, t, nu) {
                    Ok(v) => v,
                    Err(e) => return err_json(&e.to_string()),
                };
                ts.push(t);
                norms.push(v.sup_norm());
            }
            serde_json::json!({
                "kind": "exponential",
                "label": "slab eigenfunction sin(x_n), sup norm",
                "t": ts,
                "norm": norms,
                "fitted_rate": -(norms[24] / norms[12]).ln() / (ts[24] - ts[12]),
                "target_rate": nu,
                "r_squared": 1.0,
            })
            .to_string()
        }
        _ => err_json("geometry must be 0, 1 or 2"),
    }
}

/// Semilinear run explorer: evolve one of the named nonlinearities from
/// `amplitude x` shape and report the verdict with trajectories.
///
/// `family`: 0 = viscous Burgers (zero-mean sine shape), 1 = quadratic
/// reaction (constant shape: the Riccati control, blows up at 1/a),
/// 2 = damped cubic (never blows up).
#[wasm_bindgen]
pub fn semilinear_run(family: usize, amplitude: f64, nu: f64, horizon: f64) -> String {
    if !(nu > 0.0) || !(horizon > 0.0) || !(amplitude >= 0.0) {
        return err_json("need nu > 0, horizon > 0, amplitude >= 0");
    }
    let grid = match Grid::new(1, 128, 2.0 * PI) {
        Ok(g) => g,
        Err(e) => return err_json(&e.to_string()),
    };
    let cutoffs = match build_cutoffs(TransitionProfile::default(), &grid) {
        Ok(c) => c,
        Err(e) => return err_json(&e.to_string()),
    };
    let (spec, u0, label) = match family {
        0 => (
            NonlinearSpec {
                f1: Transport::Burgers,
                ..NonlinearSpec::diffusion(nu)
            },
            Field::from_fn(grid, |x| amplitude * (4.0 * x[0]).sin()),
            "viscous Burgers",
        ),
        1 => (
            NonlinearSpec {
                f0: Some(Family::Quadratic { coeff: 1.0 }),
                ..NonlinearSpec::diffusion(nu)
            },
            Field::from_fn(grid, |_| amplitude),
            "quadratic reaction (Riccati control)",
        ),
        2 => (
            NonlinearSpec {
                f0: Some(Family::Power { m: 3, coeff: -1.0 }),
                ..NonlinearSpec::diffusion(nu)
            },
            Field::from_fn(grid, |x| amplitude * ((4.0 * x[0]).sin() + 0.5)),
            "damped cubic",
        ),
        _ => return err_json("family must be 0, 1 or 2"),
    };
    let instants = 1024.max((horizon * 40.0) as usize).min(8192);
    let times = TimeGrid::hybrid(horizon, instants);
    let (solution, verdict) = match solve_semilinear(&spec, &[u0], &times) {
        Ok(pair) => pair,
        Err(e) => return err_json(&e.to_string()),
    };
    // Thin the trajectory for the canvas.
    let stride = (solution.times.len() / 256).max(1);
    let mut ts = Vec::new();
    let mut sups = Vec::new();
    for (i, &t) in solution.times.iter().enumerate() {
        if i % stride == 0 || i + 1 == solution.times.len() {
            ts.push(t);
            sups.push(verdict.sup_trajectory[i]);
        }
    }
    let idx = BesovIndex::homogeneous(0.0, 1.0, 1.0);
    let final_profile = solution.fields.last().unwrap()[0].samples().to_vec();
    let entry_norm = besov_value(&solution.fields[0][0], &idx, &cutoffs);
    let (outcome, t_star) = match verdict.outcome {
        Outcome::Blowup { t_star, .. } => ("blowup", Some(t_star)),
        Outcome::Global => ("global", None),
        Outcome::HorizonReached => ("horizon_reached", None),
    };
    serde_json::json!({
        "label": label,
        "outcome": outcome,
        "t_star": t_star,
        "riccati_prediction": if family == 1 && amplitude > 0.0 { Some(1.0 / amplitude) } else { None },
        "t": ts,
        "sup": sups,
        "peak_ratio": verdict.peak_ratio,
        "entry_norm": entry_norm,
        "final_profile": final_profile,
    })
    .to_string()
}
