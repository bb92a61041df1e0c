use heatlab::fd::{algebraic_decay_fit, build_mask, fd_solve, localized_norm_series, CellFlag, FdSolverConfig, Lattice, MaskKind};

fn main() {
    for (radius_cells, bump_dist_r, width_fac, s_reg) in
        [(2.0f64, 1.7f64, 2.0f64, 0.15f64), (2.0, 1.7, 1.0, 0.15), (2.0, 1.7, 2.0, 0.1)] {
        let nu = 0.25;
        let points = 48usize;
        let side = 12.0;
        let h = side / (points - 1) as f64;
        let lattice = Lattice::new(3, points, h).unwrap();
        let radius = radius_cells * h;
        let mask = build_mask(MaskKind::BoxMinusBall { radius }, lattice).unwrap();
        let config = FdSolverConfig::new(5e-3, nu);
        let t_far = mask.pre_reflection_horizon(nu);
        let (c, _) = mask.obstacle.unwrap();
        let raw: Vec<f64> = (0..lattice.total_points())
            .map(|flat| {
                if mask.flag(flat) != CellFlag::Interior { return 0.0; }
                let x = lattice.coords(flat);
                let d2 = (x[0] - c[0] - bump_dist_r * radius).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
                (-d2 / (width_fac * radius * radius)).exp()
            })
            .collect();
        let l1: f64 = raw.iter().sum::<f64>() * lattice.cell_volume();
        let u0: Vec<f64> = raw.iter().map(|v| v / l1).collect();
        let mut samples: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        samples.extend((0..30).map(|i| 0.5 + (t_far - 0.5) * i as f64 / 29.0));
        let sol = fd_solve(&mask, &config, &u0, None, t_far, &samples).unwrap();
        let fit = algebraic_decay_fit(&mask, &sol, 1.0, f64::INFINITY, 1.0).unwrap();
        let series = localized_norm_series(&mask, &sol, s_reg, 1.2, 64).unwrap();
        let t_half = t_far / 2.0;
        let sat = series.saturation_ratio(t_half);
        let mut boxm = build_mask(MaskKind::Box, lattice).unwrap();
        boxm.k_box = mask.k_box;
        let solf = fd_solve(&boxm, &config, &u0, None, t_far, &samples).unwrap();
        let serf = localized_norm_series(&boxm, &solf, s_reg, 1.2, 64).unwrap();
        let satf = serf.saturation_ratio(t_half);
        println!("r={radius_cells}h bump@{bump_dist_r}r w={width_fac} s={s_reg}: T_far={t_far:.2} slope={:.3} (R2={:.4}) | sat masked={sat:.4} control={satf:.4}",
            fit.slope, fit.r_squared);
    }
}
