//! Drivers for the three benchmark problems: manufactured-solution temporal
//! convergence, energy decay, and stirring of a passive scalar.

use std::f64::consts::PI;
use std::sync::Arc;

use log::info;

use crate::error::Result;
use crate::fem::{field_norms, interpolate_scalar, interpolate_vector, Field};
use crate::mesh::{build_rect_mesh, Mesh, Point, Rect};
use crate::stepper::{
    advance, discrete_energy, energy_dissipation_residual, init_stepper, physical_energy, Config,
    PreparedSystems, Spaces, State,
};
use crate::transport::{advect, ScalarField};

pub const CONVERGENCE_TAUS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const STIRRING_SNAPSHOTS: [f64; 9] = [1.0, 5.0, 7.0, 10.0, 15.0, 18.0, 20.0, 23.0, 25.0];

/// Pointwise values of the manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact {
    pub u: [f64; 2],
    /// Shifted to zero mean over the unit square.
    pub p: f64,
    pub w: f64,
}

pub fn exact_solution(t: f64, x: Point) -> Exact {
    let s = t.sin();
    let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
    let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
    Exact {
        u: [s * sx * sx * s2y, -s * s2x * sy * sy],
        p: s * (sx * sy - 4.0 / (PI * PI)),
        w: s * sx * sx * sy * sy,
    }
}

/// Body forces `(f, g)` for which [`exact_solution`] solves the system.
pub fn manufactured_forcing(t: f64, x: Point, config: &Config) -> ([f64; 2], f64) {
    let (s, c) = (t.sin(), t.cos());
    let pi2 = PI * PI;
    let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
    let (cx, cy) = ((PI * x[0]).cos(), (PI * x[1]).cos());
    let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
    let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());

    let u1 = s * sx * sx * s2y;
    let u2 = -s * s2x * sy * sy;
    let w = s * sx * sx * sy * sy;

    let u1_x = s * PI * s2x * s2y;
    let u1_y = s * 2.0 * PI * sx * sx * c2y;
    let u2_x = -s * 2.0 * PI * c2x * sy * sy;
    let u2_y = -s * PI * s2x * s2y;
    let lap_u1 = s * (2.0 * pi2 * c2x * s2y - 4.0 * pi2 * sx * sx * s2y);
    let lap_u2 = -s * (-4.0 * pi2 * s2x * sy * sy + 2.0 * pi2 * s2x * c2y);

    let w_x = s * PI * s2x * sy * sy;
    let w_y = s * PI * sx * sx * s2y;
    let lap_w = s * 2.0 * pi2 * (c2x * sy * sy + sx * sx * c2y);

    let p_x = s * PI * cx * sy;
    let p_y = s * PI * sx * cy;

    let nu0 = config.nu0();
    let nr = config.nu_r;
    let f = [
        c * sx * sx * s2y + u1 * u1_x + u2 * u1_y - nu0 * lap_u1 + p_x - 2.0 * nr * w_y,
        -c * s2x * sy * sy + u1 * u2_x + u2 * u2_y - nu0 * lap_u2 + p_y + 2.0 * nr * w_x,
    ];
    let j = config.inertia;
    let curl_u = u2_x - u1_y;
    let g = j * c * sx * sx * sy * sy + j * (u1 * w_x + u2 * w_y) - config.c1 * lap_w
        + 4.0 * nr * w
        - 2.0 * nr * curl_u;
    (f, g)
}

/// Config with the manufactured forcing attached.
pub fn with_manufactured_forcing(config: &Config) -> Config {
    let mut cfg = config.clone();
    let (c1, c2) = (config.clone().without_forcing(), config.clone().without_forcing());
    cfg.momentum_forcing = Some(Arc::new(move |x, t| manufactured_forcing(t, x, &c1).0));
    cfg.angular_forcing = Some(Arc::new(move |x, t| manufactured_forcing(t, x, &c2).1));
    cfg
}

/// Cells per side for a rectangle at mesh size `h`.
pub fn mesh_for(bounds: Rect, h: f64) -> Result<Arc<Mesh>> {
    let nx = ((bounds.width() / h).round() as usize).max(1);
    let ny = ((bounds.height() / h).round() as usize).max(1);
    Ok(Arc::new(build_rect_mesh(nx, ny, bounds)?))
}

/// Final-time errors of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub tau: f64,
    pub eu_l2: f64,
    pub eu_h1: f64,
    pub ep_l2: f64,
    pub ew_l2: f64,
    pub ew_h1: f64,
    pub eq: f64,
    /// Smallest SAV bracket over the run.
    pub min_bracket: f64,
}

impl ErrorRow {
    pub const COLUMNS: [&'static str; 6] = ["eu_L2", "eu_H1", "ep_L2", "ew_L2", "ew_H1", "eq"];

    pub fn values(&self) -> [f64; 6] {
        [self.eu_l2, self.eu_h1, self.ep_l2, self.ew_l2, self.ew_h1, self.eq]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// `log₂(e(2τ)/e(τ))` between consecutive rows; `None` for the first row
    /// and wherever the step is not a halving.
    pub fn rates(&self) -> Vec<Option<[f64; 6]>> {
        let mut out = vec![None];
        for pair in self.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if ((a.tau / b.tau) - 2.0).abs() > 1e-9 {
                out.push(None);
                continue;
            }
            let (va, vb) = (a.values(), b.values());
            out.push(Some(std::array::from_fn(|k| (va[k] / vb[k]).log2())));
        }
        out.truncate(self.rows.len());
        out
    }
}

/// Errors of `state` against the interpolated manufactured solution at
/// `state.t`, and `|q − exp(−t/T)|`.
pub fn compute_errors(state: &State, config: &Config) -> ErrorRow {
    let t = state.t;
    let diff = |h: &Field, exact: Field| {
        let values = h.values.iter().zip(&exact.values).map(|(a, b)| a - b).collect();
        field_norms(&Field {
            values,
            space: Arc::clone(&h.space),
        })
    };
    let eu = diff(&state.u, interpolate_vector(&state.u.space, |x| exact_solution(t, x).u));
    let ep = diff(&state.p, interpolate_scalar(&state.p.space, |x| exact_solution(t, x).p));
    let ew = diff(&state.w, interpolate_scalar(&state.w.space, |x| exact_solution(t, x).w));
    ErrorRow {
        tau: 0.0,
        eu_l2: eu.l2,
        eu_h1: eu.h1_semi,
        ep_l2: ep.l2,
        ew_l2: ew.l2,
        ew_h1: ew.h1_semi,
        eq: (state.q - (-t / config.final_time).exp()).abs(),
        min_bracket: f64::INFINITY,
    }
}

/// Manufactured-solution run on the unit square for each `τ`, with
/// `config.h` as the mesh size.
pub fn run_convergence(config: &Config, taus: &[f64]) -> Result<ErrorReport> {
    let mesh = mesh_for(Rect::UNIT, config.h)?;
    let spaces = Spaces::new(mesh);
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let cfg = Config {
            tau,
            ..with_manufactured_forcing(config)
        };
        let u0 = interpolate_vector(&spaces.velocity, |x| exact_solution(0.0, x).u);
        let w0 = interpolate_scalar(&spaces.angular, |x| exact_solution(0.0, x).w);
        let (mut state, systems) = init_stepper(&cfg, u0, w0)?;
        let mut min_bracket = f64::INFINITY;
        for _ in 0..systems.steps {
            state = advance(&state, &systems, &cfg)?;
            min_bracket = min_bracket.min(state.last_step.map_or(f64::INFINITY, |d| d.bracket));
        }
        let mut row = compute_errors(&state, &cfg);
        row.tau = systems.tau;
        row.min_bracket = min_bracket;
        info!("converge tau={} eu={:.3e} eq={:.3e}", row.tau, row.eu_l2, row.eq);
        rows.push(row);
    }
    Ok(ErrorReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub n: usize,
    pub t: f64,
    pub energy: f64,
    pub physical_energy: f64,
    pub q: f64,
    /// `None` at step 0.
    pub s: Option<f64>,
    pub bracket: Option<f64>,
    pub dissipation_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub tau: f64,
    pub nu: f64,
    pub records: Vec<EnergyRecord>,
}

impl EnergySeries {
    pub fn initial_energy(&self) -> f64 {
        self.records[0].energy
    }

    pub fn max_residual(&self) -> f64 {
        self.records
            .iter()
            .filter_map(|r| r.dissipation_residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `Eⁿ⁺¹ − Eⁿ`.
    pub fn max_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_bracket(&self) -> f64 {
        self.records
            .iter()
            .filter_map(|r| r.bracket)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn energy_test_velocity(x: Point) -> [f64; 2] {
    let (a, b) = (x[0], x[1]);
    [
        a * a * (a - 1.0).powi(2) * b * (b - 1.0) * (2.0 * b - 1.0),
        -b * b * (b - 1.0).powi(2) * a * (a - 1.0) * (2.0 * a - 1.0),
    ]
}

pub fn energy_test_rotation(x: Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn record(state: &State, systems: &PreparedSystems, config: &Config, residual: Option<f64>) -> EnergyRecord {
    EnergyRecord {
        n: state.n,
        t: state.t,
        energy: discrete_energy(state, systems, config),
        physical_energy: physical_energy(state, systems, config),
        q: state.q,
        s: state.last_step.map(|d| d.s),
        bracket: state.last_step.map(|d| d.bracket),
        dissipation_residual: residual,
    }
}

/// Unforced decay from the smooth initial data on a unit-square mesh of
/// size `config.h`; returns the series and the final state.
pub fn run_decay(config: &Config) -> Result<(EnergySeries, State)> {
    let cfg = config.clone().without_forcing();
    let spaces = Spaces::new(mesh_for(Rect::UNIT, cfg.h)?);
    let u0 = interpolate_vector(&spaces.velocity, energy_test_velocity);
    let w0 = interpolate_scalar(&spaces.angular, energy_test_rotation);
    let (mut state, systems) = init_stepper(&cfg, u0, w0)?;
    let mut records = vec![record(&state, &systems, &cfg, None)];
    for _ in 0..systems.steps {
        let next = advance(&state, &systems, &cfg)?;
        let r = energy_dissipation_residual(&state, &next, &systems, &cfg);
        records.push(record(&next, &systems, &cfg, Some(r)));
        state = next;
    }
    info!(
        "decay nu={} tau={} E0={:.6e} EN={:.6e}",
        cfg.nu,
        systems.tau,
        records[0].energy,
        records.last().map_or(0.0, |r| r.energy)
    );
    let series = EnergySeries {
        tau: systems.tau,
        nu: cfg.nu,
        records,
    };
    Ok((series, state))
}

/// [`run_decay`] for each `τ`.
pub fn run_stability(config: &Config, taus: &[f64]) -> Result<Vec<EnergySeries>> {
    taus.iter()
        .map(|&tau| run_decay(&Config { tau, ..config.clone() }).map(|(s, _)| s))
        .collect()
}

/// Stirring setup: square `(−1,1)²`, torque `g = 25(x − 1)`, fluid at rest.
pub fn stirring_config(base: &Config) -> Config {
    let mut cfg = base.clone().without_forcing();
    cfg.angular_forcing = Some(Arc::new(|x: Point, _t| 25.0 * (x[0] - 1.0)));
    cfg
}

pub fn stirring_initial_scalar(x: Point) -> f64 {
    if x[1] < 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub phi: ScalarField,
    pub u: Field,
    pub w: Field,
    pub total_variation: f64,
    pub deformation: f64,
}

#[derive(Debug, Clone)]
pub struct StirringRun {
    pub nu: f64,
    pub snapshots: Vec<Snapshot>,
    /// Range of `φ` over all steps.
    pub phi_min: f64,
    pub phi_max: f64,
    pub min_bracket: f64,
    /// `(t, Σ|∇φ||T|)` every step.
    pub variation: Vec<(f64, f64)>,
}

impl StirringRun {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9)
    }

    pub fn variation_at(&self, t: f64) -> Option<f64> {
        self.variation.iter().find(|(s, _)| (s - t).abs() < 1e-9).map(|&(_, v)| v)
    }
}

/// Advance the flow, then transport `φ` by the new velocity, each step.
/// Snapshots are kept at the grid times closest to `snapshot_times`; the
/// run ends at `config.final_time`.
pub fn run_stirring(config: &Config, snapshot_times: &[f64]) -> Result<StirringRun> {
    let cfg = stirring_config(config);
    let mesh = mesh_for(Rect::centered_square(1.0), cfg.h)?;
    let spaces = Spaces::new(Arc::clone(&mesh));
    let (mut state, systems) = init_stepper(
        &cfg,
        Field::zeros(Arc::clone(&spaces.velocity)),
        Field::zeros(Arc::clone(&spaces.angular)),
    )?;
    let phi0 = ScalarField::from_fn(&systems.spaces.pressure, stirring_initial_scalar)?;
    let mut phi = phi0.clone();
    let snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|t| (t / systems.tau).round() as usize)
        .collect();
    let mut run = StirringRun {
        nu: cfg.nu,
        snapshots: Vec::new(),
        phi_min: phi.min,
        phi_max: phi.max,
        min_bracket: f64::INFINITY,
        variation: vec![(0.0, phi.total_variation())],
    };
    let take = |state: &State, phi: &ScalarField, run: &mut StirringRun| {
        if snap_steps.contains(&state.n) {
            run.snapshots.push(Snapshot {
                t: state.t,
                phi: phi.clone(),
                u: state.u.clone(),
                w: state.w.clone(),
                total_variation: phi.total_variation(),
                deformation: phi.l1_distance(&phi0),
            });
        }
    };
    take(&state, &phi, &mut run);
    for _ in 0..systems.steps {
        state = advance(&state, &systems, &cfg)?;
        phi = advect(&phi, &state.u, systems.tau)?;
        run.phi_min = run.phi_min.min(phi.min);
        run.phi_max = run.phi_max.max(phi.max);
        if let Some(d) = state.last_step {
            run.min_bracket = run.min_bracket.min(d.bracket);
        }
        run.variation.push((state.t, phi.total_variation()));
        take(&state, &phi, &mut run);
        if state.n % 100 == 0 {
            info!("stir nu={} t={:.2} tv={:.4}", cfg.nu, state.t, phi.total_variation());
        }
    }
    Ok(run)
}
