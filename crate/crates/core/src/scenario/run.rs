//! Pipelines behind each scenario kind.

use super::config::{Kind, ScenarioConfig};
use super::report::RunReport;
use crate::distance::{
    ball_comparison, flow_reference_error, riemannian_distance_field, subriemannian_distance,
    ConeSpec, DistanceField, RegularizationSchedule, ShellOptions,
};
use crate::error::{Error, Result};
use crate::extension::{
    constant_c, constant_d, constant_d_closed, extension_heat_route, extension_solution,
    fuchs_roots, fuchsian_residual, pde_residual, trace_derivative_limit, ExtensionKernel,
};
use crate::geometry::{
    assemble_sum_of_squares, build_grid, AssembledOperator, Grid, VectorFieldSet,
};
use crate::io::{encode_spectral, encode_swdf, encode_trajectory, kernel_table_csv};
use crate::spectral::{
    eigendecomposition, from_pairs, masuda_residual, SpectralDecomposition, DENSE_LIMIT,
};
use crate::wave::{
    cfl_max_step, cone_leakage, cutoff_data, solve_wave, LeakageReport, WaveOptions, WaveState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

fn node(grid: &Grid, x: &[f64], what: &str) -> Result<usize> {
    grid.nearest_node(x)
        .ok_or_else(|| Error::InvalidArgument(format!("{what} {x:?} lies outside the grid")))
}

/// `exp(-1 / (1 - |x - c|^2 / r^2))` inside the ball, 0 outside.
pub fn smooth_bump(x: &[f64], c: &[f64], r: f64) -> f64 {
    let q: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (r * r);
    if q < 1.0 {
        (-1.0 / (1.0 - q)).exp()
    } else {
        0.0
    }
}

/// Runs the configured pipeline. Timing is measured but kept out of the
/// serialized report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(Some(config.clone()));
    let r = match config.kind {
        Kind::Distance => run_distance(config, &mut report),
        Kind::WaveCone => run_wave_cone(config, &mut report),
        Kind::Fractional => run_fractional(config, &mut report),
        Kind::Kernels => run_kernels(config, &mut report),
        Kind::Masuda => run_masuda(config, &mut report),
    };
    r?;
    report.wall_clock = start.elapsed().as_secs_f64();
    Ok(report)
}

fn setup(config: &ScenarioConfig, resolution: &[usize]) -> Result<(Grid, VectorFieldSet)> {
    let grid = build_grid(&config.bounds(), resolution)?;
    Ok((grid, config.field_set()?))
}

fn source_point(config: &ScenarioConfig, d: usize) -> Vec<f64> {
    config
        .distance
        .source
        .clone()
        .unwrap_or_else(|| vec![0.0; d])
}

#[derive(Serialize)]
struct EuclideanError {
    max_relative: f64,
    l2_relative: f64,
}

fn euclidean_error(dist: &DistanceField) -> EuclideanError {
    let g = &dist.grid;
    let x0 = g.coords(dist.source);
    let mut max_rel = 0.0f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..g.len() {
        let r = g
            .coords(i)
            .iter()
            .zip(&x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if i == dist.source || !dist.values[i].is_finite() {
            continue;
        }
        max_rel = max_rel.max((dist.values[i] - r).abs() / r);
        num += (dist.values[i] - r).powi(2);
        den += r * r;
    }
    EuclideanError {
        max_relative: max_rel,
        l2_relative: (num / den).sqrt(),
    }
}

fn run_distance(config: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let p = &config.distance;
    let (grid, fields) = setup(config, &config.resolution())?;
    let src = node(&grid, &source_point(config, grid.dim()), "distance.source")?;
    let schedule = RegularizationSchedule::geometric(p.eps0, p.levels)?;
    let (levels, conv) = subriemannian_distance(&grid, &fields, src, &schedule, p.stencil)?;
    let last = levels.last().expect("at least one level");
    for (k, f) in levels.iter().enumerate() {
        rep.file(format!("distance_eps_{k:02}.swdf"), encode_swdf(f));
    }
    let worst_fraction = conv
        .violations
        .iter()
        .map(|&v| v as f64 / conv.node_count as f64)
        .fold(0.0, f64::max);
    rep.metric("convergence", &conv)?;
    rep.json_file("convergence.json", &conv)?;
    rep.at_most(
        "violation_fraction",
        worst_fraction,
        config.thresholds.violation_fraction,
    );
    rep.holds("violations_below_tau_mono", conv.within_tolerance());

    let mut values = Vec::new();
    for (k, t) in p.targets.iter().enumerate() {
        let d = last.values[node(&grid, t, "distance.targets")?];
        values.push(d);
        if let Some(&exact) = p.exact.get(k) {
            rep.below(
                &format!("target_{k}_relative_error"),
                (d - exact).abs() / exact,
                config.thresholds.distance_rel,
            );
        }
    }
    rep.metric("target_distances", &values)?;

    if fields.preset_kind() == crate::geometry::Preset::Euclidean {
        let e = euclidean_error(last);
        rep.below(
            "euclidean_l2_relative_error",
            e.l2_relative,
            config.thresholds.distance_rel,
        );
        rep.metric("euclidean_error", &e)?;
    }
    let axis = p.ball_axis.unwrap_or(grid.dim() - 1);
    match ball_comparison(
        last,
        ShellOptions {
            axis: Some(axis),
            ..Default::default()
        },
    ) {
        Ok(b) => {
            if fields.preset_kind() == crate::geometry::Preset::Heisenberg && axis == 2 {
                rep.within(
                    "ball_exponent_vertical",
                    b.delta,
                    config.thresholds.ball_exponent,
                );
            }
            rep.metric("ball_comparison", &b)?;
        }
        Err(e) => rep.metric("ball_comparison", e.to_string())?,
    }
    Ok(())
}

/// One cone audit at a given resolution.
#[derive(Serialize)]
pub struct ConeRun {
    pub resolution: Vec<usize>,
    pub h_max: f64,
    pub dt: f64,
    pub steps: usize,
    pub dt_max: f64,
    pub distance_error: f64,
    pub margin: f64,
    pub energy_drift: f64,
    pub leakage: LeakageReport,
    #[serde(skip)]
    pub trajectory: Option<Vec<u8>>,
}

pub fn cone_run(
    config: &ScenarioConfig,
    resolution: &[usize],
    keep_trajectory: bool,
) -> Result<ConeRun> {
    let w = &config.wave;
    let (grid, fields) = setup(config, resolution)?;
    let op = assemble_sum_of_squares(&fields, &grid, w.epsilon)?;
    let x0 = source_point(config, grid.dim());
    let src = node(&grid, &x0, "distance.source")?;
    let dist = riemannian_distance_field(
        &grid,
        &fields,
        w.distance_epsilon,
        src,
        config.distance.stencil,
    )?;
    let distance_error = flow_reference_error(&dist, &fields, w.t0)?;
    let margin = w.margin.unwrap_or(2.0 * distance_error);
    let center = w.bump_center.clone().unwrap_or_else(|| {
        let mut c = x0.clone();
        c[0] += w.t0 + w.bump_radius;
        c
    });
    let u0 = grid.sample(|x| smooth_bump(x, &center, w.bump_radius));
    let (a, b, cut) = cutoff_data(&u0, &vec![0.0; grid.len()], &dist, w.t0, w.delta)?;
    let apex = cut.inner;
    let cfl = cfl_max_step(&op);
    let opts = WaveOptions {
        dt: Some(w.dt_factor * cfl.dt_max),
        snapshot_stride: w.snapshot_stride,
    };
    let traj = solve_wave(&op, &WaveState::new(a, b, 0.0), apex, opts)?;
    let cone = ConeSpec::new(apex, src, margin)?;
    let leakage = cone_leakage(&traj, &dist, &cone);
    Ok(ConeRun {
        resolution: resolution.to_vec(),
        h_max: grid.spacing().iter().copied().fold(0.0, f64::max),
        dt: traj.dt,
        steps: traj.steps,
        dt_max: cfl.dt_max,
        distance_error,
        margin,
        energy_drift: traj.energy.max_drift_rel,
        leakage,
        trajectory: keep_trajectory.then(|| encode_trajectory(&grid, w.epsilon, &traj)),
    })
}

fn run_wave_cone(config: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let w = &config.wave;
    let th = &config.thresholds;
    let res = config.resolution();
    let mut coarse = cone_run(config, &res, w.dump_trajectory)?;
    if let Some(t) = coarse.trajectory.take() {
        rep.file("trajectory.swdf", t);
    }
    rep.holds("initial_data_vanish_on_ball", coarse.leakage.valid);
    rep.below("leakage_ratio", coarse.leakage.ratio, th.leakage);
    rep.below("energy_drift", coarse.energy_drift, th.energy_drift);
    rep.json_file("leakage.json", &coarse.leakage.entries)?;
    if w.refine {
        let fine_res = w
            .refined_resolution
            .clone()
            .unwrap_or_else(|| res.iter().map(|n| 2 * n - 1).collect());
        let fine = cone_run(config, &fine_res, false)?;
        rep.holds("refined_initial_data_vanish_on_ball", fine.leakage.valid);
        rep.below("refined_leakage_ratio", fine.leakage.ratio, th.leakage);
        rep.holds(
            "leakage_decreases_under_refinement",
            fine.leakage.ratio < coarse.leakage.ratio || fine.leakage.ratio == 0.0,
        );
        rep.json_file("leakage_refined.json", &fine.leakage.entries)?;
        rep.metric("refined", &fine)?;
    }
    rep.metric("coarse", &coarse)?;
    Ok(())
}

fn spectral_setup(
    config: &ScenarioConfig,
    modes: Option<usize>,
) -> Result<(AssembledOperator, SpectralDecomposition)> {
    let (grid, fields) = setup(config, &config.resolution())?;
    let op = assemble_sum_of_squares(&fields, &grid, config.wave.epsilon)?;
    let m = modes
        .unwrap_or(if grid.len() <= DENSE_LIMIT {
            grid.len()
        } else {
            40
        })
        .min(grid.len());
    let spec = eigendecomposition(&op, m)?;
    Ok((op, spec))
}

fn default_bump(grid: &Grid, center: &Option<Vec<f64>>, radius: Option<f64>) -> Vec<f64> {
    let up = grid.upper();
    let c: Vec<f64> = center.clone().unwrap_or_else(|| {
        grid.origin()
            .iter()
            .zip(&up)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    });
    let side = grid
        .origin()
        .iter()
        .zip(&up)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    let r = radius.unwrap_or(0.3 * side);
    grid.sample(|x| smooth_bump(x, &c, r))
}

fn truncated(spec: &SpectralDecomposition, m: usize) -> SpectralDecomposition {
    let m = m.min(spec.len());
    from_pairs(
        spec.grid(),
        spec.eigenvalues()[..m].to_vec(),
        spec.eigenvectors()[..m].to_vec(),
    )
}

fn run_fractional(config: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let f = &config.fractional;
    let th = &config.thresholds;
    let (op, spec) = spectral_setup(config, f.modes)?;
    let phi = default_bump(spec.grid(), &f.bump_center, f.bump_radius);
    let (json, bin) = encode_spectral(&spec)?;
    rep.file("spectral.json", json.into_bytes());
    rep.file("spectral.bin", bin);
    rep.metric("modes", spec.len())?;
    let low = truncated(&spec, 5);
    for &s in &f.s {
        let tag = format!("s{s}");
        let tl = trace_derivative_limit(&spec, &phi, s, f.t0, f.t_levels)?;
        rep.below(&format!("trace_limit_{tag}"), tl.rel_error, th.trace_rel);
        rep.json_file(format!("trace_limit_{tag}.json"), &tl)?;
        rep.metric(&format!("trace_limit_{tag}"), &tl)?;

        let a = extension_solution(&low, &phi, s, &[f.two_route_t])?
            .u
            .remove(0);
        let b = extension_heat_route(&low, &phi, s, f.two_route_t)?;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let g = spec.grid();
        let two = g.norm_w(&diff) / g.norm_w(&a).max(f64::MIN_POSITIVE);
        rep.below(&format!("two_route_{tag}"), two, th.two_route);

        let roots = fuchs_roots(2.0 * s - 1.0, 1.0 - 2.0 * s);
        let mut got = roots.real().map(|r| r.to_vec()).unwrap_or_default();
        got.sort_by(f64::total_cmp);
        let mut want = vec![1.0 - 2.0 * s, 1.0];
        want.sort_by(f64::total_cmp);
        rep.holds(&format!("fuchs_roots_{tag}"), got == want && roots.h == 2);
        let fd = fuchsian_residual(&low, &phi, s, &f.fuchs_t)?;
        rep.below(
            &format!("fuchs_physical_residual_{tag}"),
            fd.max_physical,
            1e-8,
        );
        rep.holds(&format!("indicial_fit_{tag}"), fd.indicial.within_tolerance);
        rep.metric(&format!("fuchs_{tag}"), &fd)?;
        if f.fuchs_t.len() >= 3 {
            let mut ts = f.fuchs_t.clone();
            ts.sort_by(f64::total_cmp);
            let sol = extension_solution(&low, &phi, s, &ts)?;
            rep.metric(&format!("pde_residual_{tag}"), pde_residual(&sol, &op)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct KernelSummary {
    s: f64,
    d_quadrature: f64,
    d_closed: f64,
    c: f64,
    theta_at_zero_error: f64,
}

fn run_kernels(config: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let k = &config.kernels;
    let th = &config.thresholds;
    let mut csv = String::new();
    let mut summary = Vec::new();
    for &s in &k.s {
        let kernel = ExtensionKernel::new(s)?;
        let d = constant_d(s)?;
        let dc = constant_d_closed(s);
        rep.below(
            &format!("d_closed_form_s{s}"),
            (d.value - dc).abs(),
            th.constant_abs,
        );
        let c = constant_c(s)?;
        if s == 0.5 {
            rep.below("c_half_is_minus_one", (c.value + 1.0).abs(), 1e-8);
            let mut worst = 0.0f64;
            for &l in &k.lambdas {
                for &t in &k.t {
                    let v = kernel.theta(l, t)?.value;
                    worst = worst.max((v - (-(l.sqrt()) * t).exp()).abs());
                }
            }
            rep.below("theta_half_vs_poisson", worst, th.kernel_abs);
        }
        let mut at_zero = 0.0f64;
        for &l in &k.lambdas {
            at_zero = at_zero.max((kernel.theta(l, 0.0)?.value - 1.0).abs());
        }
        rep.below(&format!("theta_at_zero_s{s}"), at_zero, 1e-10);
        let table = kernel_table_csv(&kernel, &k.lambdas, &k.t)?;
        if csv.is_empty() {
            csv = table;
        } else {
            csv.push_str(table.split_once('\n').map(|x| x.1).unwrap_or(""));
        }
        summary.push(KernelSummary {
            s,
            d_quadrature: d.value,
            d_closed: dc,
            c: c.value,
            theta_at_zero_error: at_zero,
        });
    }
    rep.file("kernel_table.csv", csv.into_bytes());
    rep.metric("constants", &summary)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut bad = 0usize;
    for _ in 0..k.random_triples {
        let s = rng.gen_range(0.05..0.95);
        let l = rng.gen_range(0.01..10.0);
        let t1 = rng.gen_range(0.0..3.0);
        let t2 = t1 + rng.gen_range(0.01..1.0);
        let kern = ExtensionKernel::new(s)?;
        let (a, b) = (kern.theta(l, t1)?.value, kern.theta(l, t2)?.value);
        if !(b < a && a <= 1.0 && b >= 0.0) {
            bad += 1;
        }
    }
    rep.metric("monotonicity_samples", k.random_triples)?;
    rep.equal("theta_monotone_failures", bad as f64, 0.0);
    Ok(())
}

fn run_masuda(config: &ScenarioConfig, rep: &mut RunReport) -> Result<()> {
    let m = &config.masuda;
    let th = &config.thresholds;
    let (op, spec) = spectral_setup(config, Some(m.modes))?;
    let g = spec.grid();
    let center = m.data_center.clone().unwrap_or_else(|| vec![0.0; g.dim()]);
    let u0 = g.sample(|x| {
        (-x.iter()
            .zip(&center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (m.data_width * m.data_width))
            .exp()
    });
    let probe = |h: f64| -> Result<(f64, f64, bool, f64)> {
        let (mut r, mut hr, mut flag, mut tail) = (0.0f64, 0.0f64, false, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let xi = m.xi[0] + 0.5 * i as f64 * (m.xi[1] - m.xi[0]);
                let eta = m.eta[0] + 0.5 * j as f64 * (m.eta[1] - m.eta[0]);
                let rep = masuda_residual(
                    &spec,
                    &op,
                    &u0,
                    &[xi - h, xi, xi + h],
                    &[eta - h, eta, eta + h],
                )?;
                r = r.max(rep.max_residual);
                hr = hr.max(rep.max_harmonic_residual);
                flag |= rep.eta_too_small;
                tail = rep.tail;
            }
        }
        Ok((r, hr, flag, tail))
    };
    let (r1, h1, flag, tail) = probe(m.step)?;
    let (r2, h2, _, _) = probe(0.5 * m.step)?;
    rep.below("masuda_residual", r1, th.masuda);
    rep.below("harmonic_residual", h1, th.masuda);
    rep.within("masuda_order_ratio", r1 / r2, th.masuda_order);
    rep.within("harmonic_order_ratio", h1 / h2, th.masuda_order);
    rep.holds("eta_resolves_kept_modes", !flag);
    rep.metric(
        "masuda",
        serde_json::json!({
            "residual": r1, "residual_half_step": r2,
            "harmonic": h1, "harmonic_half_step": h2,
            "modes": spec.len(), "tail": tail,
        }),
    )?;
    Ok(())
}
