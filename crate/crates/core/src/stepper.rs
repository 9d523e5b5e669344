//! First-order SAV time stepping for the micropolar system.
//!
//! The auxiliary scalar `q(t) = exp(-t/T)` multiplies the explicitly treated
//! convection, and its own discrete equation absorbs the work those terms do,
//! so the discrete energy
//!
//! ```text
//! E = ½‖u‖² + ½(j + 4τν_r)‖w‖² + ½q²
//! ```
//!
//! is non-increasing for every `τ`. Writing `S = q exp(t/T)`, each step
//! splits into two linear sub-problems that do not depend on `S`:
//!
//! 1. `(u₁, p₁, w₁)`: previous state plus microrotation coupling (and any
//!    body forcing),
//! 2. `(u₂, p₂, w₂)`: driven by the convection of the previous state,
//!
//! after which `S` solves a scalar linear equation with positive coefficient
//! and the new state is `u₁ + S u₂` (likewise `p`, `w`).
//!
//! In 2D the angular velocity is a scalar, so the grad-div term weighted by
//! `c2` vanishes identically and is not assembled.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_convection_load, assemble_curl, assemble_div, assemble_load,
    assemble_mass, assemble_stiffness, zero_columns, FeSpace, Field, Order,
};
use crate::mesh::{Mesh, Point};
use crate::solve::csr::{axpy, dot};
use crate::solve::{
    prepare_spd, prepare_stokes, SolverOptions, SparseMatrix, SpdSolver, StokesReport,
    StokesSolver,
};

pub type VectorForcing = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
pub type ScalarForcing = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// Physical and numerical parameters of a run.
#[derive(Clone)]
pub struct Config {
    /// Newtonian viscosity ν.
    pub nu: f64,
    /// Microrotation viscosity ν_r.
    pub nu_r: f64,
    /// Micro-inertia j.
    pub inertia: f64,
    /// Angular diffusion c₁ = c_a + c_d.
    pub c1: f64,
    /// Angular grad-div coefficient c₂ = c₀ + c_d − c_a (inactive in 2D).
    pub c2: f64,
    /// Final time T; also the decay scale of the auxiliary variable.
    pub final_time: f64,
    /// Requested time step; rounded so that T/τ is an integer.
    pub tau: f64,
    /// Mesh size used by drivers that build their own meshes.
    pub h: f64,
    pub solver: SolverOptions,
    /// Momentum forcing f(x, t).
    pub momentum_forcing: Option<VectorForcing>,
    /// Angular-momentum forcing g(x, t).
    pub angular_forcing: Option<ScalarForcing>,
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Config")
            .field("nu", &self.nu)
            .field("nu_r", &self.nu_r)
            .field("inertia", &self.inertia)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("final_time", &self.final_time)
            .field("tau", &self.tau)
            .field("h", &self.h)
            .field("solver", &self.solver)
            .field("momentum_forcing", &self.momentum_forcing.is_some())
            .field("angular_forcing", &self.angular_forcing.is_some())
            .finish()
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            nu: 1.0,
            nu_r: 1.0,
            inertia: 1.0,
            c1: 2.0,
            c2: 1.0,
            final_time: 1.0,
            tau: 0.1,
            h: 1.0 / 64.0,
            solver: SolverOptions::default(),
            momentum_forcing: None,
            angular_forcing: None,
        }
    }
}

impl Config {
    /// Effective momentum diffusivity ν₀ = ν + ν_r.
    pub fn nu0(&self) -> f64 {
        self.nu + self.nu_r
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nu", self.nu),
            ("nu_r", self.nu_r),
            ("inertia", self.inertia),
            ("c1", self.c1),
            ("c2", self.c2),
            ("final_time", self.final_time),
            ("tau", self.tau),
            ("h", self.h),
            ("rtol", self.solver.rtol),
            ("rtol_div", self.solver.rtol_div),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of steps and the uniform step `T / N`, `N = round(T / τ)`.
    pub fn time_grid(&self) -> (usize, f64) {
        let n = ((self.final_time / self.tau).round() as usize).max(1);
        (n, self.final_time / n as f64)
    }

    pub fn without_forcing(mut self) -> Self {
        self.momentum_forcing = None;
        self.angular_forcing = None;
        self
    }
}

/// Velocity (vector P2), pressure (P1) and angular-velocity (P2) spaces.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub velocity: Arc<FeSpace>,
    pub pressure: Arc<FeSpace>,
    pub angular: Arc<FeSpace>,
}

impl Spaces {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        Spaces {
            velocity: Arc::new(FeSpace::vector(Arc::clone(&mesh), Order::Quadratic)),
            pressure: Arc::new(FeSpace::scalar(Arc::clone(&mesh), Order::Linear)),
            angular: Arc::new(FeSpace::scalar(mesh, Order::Quadratic)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    pub s: f64,
    /// `(τ+T)/(τT) − exp(2t/T) A₂`; positive by construction.
    pub bracket: f64,
    pub a1: f64,
    pub a2: f64,
    pub energy: f64,
    pub stokes: [StokesReport; 2],
}

#[derive(Debug, Clone)]
pub struct State {
    pub u: Field,
    pub p: Field,
    pub w: Field,
    pub q: f64,
    pub t: f64,
    pub n: usize,
    /// `None` before the first step.
    pub last_step: Option<StepDiagnostics>,
}

/// Constant operators and their prepared solvers.
pub struct PreparedSystems {
    pub spaces: Spaces,
    pub mass_u: SparseMatrix,
    pub stiffness_u: SparseMatrix,
    /// `B`, pressure × velocity, unconstrained.
    pub div: SparseMatrix,
    /// `C`, angular × velocity, unconstrained.
    pub curl: SparseMatrix,
    pub mass_w: SparseMatrix,
    pub stiffness_w: SparseMatrix,
    pub mass_p: SparseMatrix,
    /// Prepared for `M_u/τ + ν₀ K_u` with the pressure constraint.
    pub stokes: StokesSolver,
    /// Prepared for `(j/τ) M_w + c₁ K_w + 4ν_r M_w`.
    pub angular: SpdSolver,
    pub tau: f64,
    pub steps: usize,
}

impl fmt::Debug for PreparedSystems {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreparedSystems")
            .field("velocity_dofs", &self.spaces.velocity.dof_count())
            .field("pressure_dofs", &self.spaces.pressure.dof_count())
            .field("angular_dofs", &self.spaces.angular.dof_count())
            .field("stokes", &self.stokes)
            .field("angular", &self.angular)
            .field("tau", &self.tau)
            .field("steps", &self.steps)
            .finish()
    }
}

/// One auxiliary solution `(u_i, p_i, w_i)`.
#[derive(Debug, Clone)]
pub struct AuxSolution {
    pub u: Field,
    pub p: Field,
    pub w: Field,
    pub stokes: StokesReport,
}

/// Convection of the previous state tested against the basis:
/// `N_u = (uⁿ·∇uⁿ, φ)`, `N_w = (uⁿ·∇wⁿ, ψ)`.
#[derive(Debug, Clone)]
pub struct ConvectionLoads {
    pub n_u: Vec<f64>,
    pub n_w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavUpdate {
    pub s: f64,
    pub q: f64,
    pub bracket: f64,
    pub a1: f64,
    pub a2: f64,
}

fn zero_rows(v: &mut [f64], rows: &[usize]) {
    for &r in rows {
        v[r] = 0.0;
    }
}

fn enforce_zero_boundary(field: &mut Field, name: &str) -> Result<()> {
    let scale = field.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for &d in field.space.boundary_dofs() {
        if field.values[d].abs() > 1e-10 * scale {
            return Err(Error::InvalidConfig(format!(
                "{name} must vanish on the boundary (dof {d} = {:e})",
                field.values[d]
            )));
        }
        field.values[d] = 0.0;
    }
    Ok(())
}

/// Assemble and prepare all constant operators and set `q⁰ = 1`.
pub fn init_stepper(config: &Config, u0: Field, w0: Field) -> Result<(State, PreparedSystems)> {
    config.validate()?;
    let mesh = Arc::clone(u0.space.mesh());
    if !Arc::ptr_eq(&mesh, w0.space.mesh()) {
        return Err(Error::MeshMismatch);
    }
    if u0.space.components() != 2 || u0.space.order() != Order::Quadratic {
        return Err(Error::SpaceMismatch("initial velocity must be vector P2".into()));
    }
    if w0.space.components() != 1 || w0.space.order() != Order::Quadratic {
        return Err(Error::SpaceMismatch("initial angular velocity must be scalar P2".into()));
    }
    let spaces = Spaces {
        velocity: Arc::clone(&u0.space),
        pressure: Arc::new(FeSpace::scalar(Arc::clone(&mesh), Order::Linear)),
        angular: Arc::clone(&w0.space),
    };
    let (mut u0, mut w0) = (u0, w0);
    enforce_zero_boundary(&mut u0, "initial velocity")?;
    enforce_zero_boundary(&mut w0, "initial angular velocity")?;

    let (steps, tau) = config.time_grid();
    let vel = &spaces.velocity;
    let ang = &spaces.angular;

    let mass_u = assemble_mass(vel);
    let stiffness_u = assemble_stiffness(vel);
    let div = assemble_div(vel, &spaces.pressure)?;
    let curl = assemble_curl(vel, ang)?;
    let mass_w = assemble_mass(ang);
    let stiffness_w = assemble_stiffness(ang);
    let mass_p = assemble_mass(&spaces.pressure);

    let a_u = SparseMatrix::linear_combination(1.0 / tau, &mass_u, config.nu0(), &stiffness_u)?;
    let bc_u = vel.boundary_dofs();
    let (a_u, _) = apply_dirichlet(&a_u, &vec![0.0; a_u.rows()], bc_u, &vec![0.0; bc_u.len()])?;
    let div_bc = zero_columns(&div, bc_u);
    let stokes = prepare_stokes(&a_u, &div_bc, &mass_p, &config.solver)?;

    let a_w = SparseMatrix::linear_combination(
        config.inertia / tau + 4.0 * config.nu_r,
        &mass_w,
        config.c1,
        &stiffness_w,
    )?;
    let bc_w = ang.boundary_dofs();
    let (a_w, _) = apply_dirichlet(&a_w, &vec![0.0; a_w.rows()], bc_w, &vec![0.0; bc_w.len()])?;
    let angular = prepare_spd(&a_w, &config.solver)?;

    let p0 = Field::zeros(Arc::clone(&spaces.pressure));
    let systems = PreparedSystems {
        spaces,
        mass_u,
        stiffness_u,
        div,
        curl,
        mass_w,
        stiffness_w,
        mass_p,
        stokes,
        angular,
        tau,
        steps,
    };
    let state = State {
        u: u0,
        p: p0,
        w: w0,
        q: 1.0,
        t: 0.0,
        n: 0,
        last_step: None,
    };
    Ok((state, systems))
}

impl PreparedSystems {
    /// `tⁿ = nτ`, computed without accumulating rounding.
    pub fn time_at(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    fn field_u(&self, v: Vec<f64>) -> Field {
        Field {
            values: v,
            space: Arc::clone(&self.spaces.velocity),
        }
    }

    fn field_p(&self, v: Vec<f64>) -> Field {
        Field {
            values: v,
            space: Arc::clone(&self.spaces.pressure),
        }
    }

    fn field_w(&self, v: Vec<f64>) -> Field {
        Field {
            values: v,
            space: Arc::clone(&self.spaces.angular),
        }
    }

    /// Momentum right-hand side of the first sub-problem:
    /// `M uⁿ/τ + 2ν_r Cᵀ wⁿ + F(tⁿ⁺¹)`.
    fn momentum_rhs1(&self, state: &State, config: &Config, t_next: f64) -> Vec<f64> {
        let mut rhs = self.mass_u.mul_vec(&state.u.values);
        rhs.iter_mut().for_each(|v| *v /= self.tau);
        axpy(
            2.0 * config.nu_r,
            &self.curl.mul_transpose_vec(&state.w.values),
            &mut rhs,
        );
        if let Some(f) = &config.momentum_forcing {
            let load = assemble_load(&self.spaces.velocity, t_next, |p, t, out| {
                out.copy_from_slice(&f(p, t))
            });
            axpy(1.0, &load, &mut rhs);
        }
        zero_rows(&mut rhs, self.spaces.velocity.boundary_dofs());
        rhs
    }

    fn momentum_rhs2(&self, loads: &ConvectionLoads) -> Vec<f64> {
        let mut rhs: Vec<f64> = loads.n_u.iter().map(|v| -v).collect();
        zero_rows(&mut rhs, self.spaces.velocity.boundary_dofs());
        rhs
    }

    /// Angular right-hand side of the first sub-problem:
    /// `(j/τ) M wⁿ + 2ν_r C u₁ + G(tⁿ⁺¹)`.
    fn angular_rhs1(&self, state: &State, config: &Config, u1: &[f64], t_next: f64) -> Vec<f64> {
        let mut rhs = self.mass_w.mul_vec(&state.w.values);
        rhs.iter_mut().for_each(|v| *v *= config.inertia / self.tau);
        axpy(2.0 * config.nu_r, &self.curl.mul_vec(u1), &mut rhs);
        if let Some(g) = &config.angular_forcing {
            let load = assemble_load(&self.spaces.angular, t_next, |p, t, out| out[0] = g(p, t));
            axpy(1.0, &load, &mut rhs);
        }
        zero_rows(&mut rhs, self.spaces.angular.boundary_dofs());
        rhs
    }

    /// `−j N_w + 2ν_r C u₂`.
    fn angular_rhs2(&self, config: &Config, loads: &ConvectionLoads, u2: &[f64]) -> Vec<f64> {
        let mut rhs = self.curl.mul_vec(u2);
        rhs.iter_mut().for_each(|v| *v *= 2.0 * config.nu_r);
        axpy(-config.inertia, &loads.n_w, &mut rhs);
        zero_rows(&mut rhs, self.spaces.angular.boundary_dofs());
        rhs
    }
}

pub fn convection_loads(state: &State, systems: &PreparedSystems) -> Result<ConvectionLoads> {
    Ok(ConvectionLoads {
        n_u: assemble_convection_load(&state.u, &state.u, &systems.spaces.velocity)?,
        n_w: assemble_convection_load(&state.u, &state.w, &systems.spaces.angular)?,
    })
}

/// First sub-problem: generalised Stokes for `(u₁, p₁)`, then the angular
/// equation for `w₁` driven by `curl u₁`.
pub fn solve_aux1(state: &State, systems: &PreparedSystems, config: &Config) -> Result<AuxSolution> {
    let t_next = systems.time_at(state.n + 1);
    let rhs = systems.momentum_rhs1(state, config, t_next);
    let (u, p, report) = systems.stokes.solve_many(&[&rhs])?.pop().expect("one solve");
    let w = systems.angular.solve(&systems.angular_rhs1(state, config, &u, t_next))?;
    Ok(AuxSolution {
        u: systems.field_u(u),
        p: systems.field_p(p),
        w: systems.field_w(w),
        stokes: report,
    })
}

/// Second sub-problem: the same operators driven by `−N_u` and `−j N_w`.
pub fn solve_aux2(
    systems: &PreparedSystems,
    config: &Config,
    loads: &ConvectionLoads,
) -> Result<AuxSolution> {
    let rhs = systems.momentum_rhs2(loads);
    let (u, p, report) = systems.stokes.solve_many(&[&rhs])?.pop().expect("one solve");
    let w = systems.angular.solve(&systems.angular_rhs2(config, loads, &u))?;
    Ok(AuxSolution {
        u: systems.field_u(u),
        p: systems.field_p(p),
        w: systems.field_w(w),
        stokes: report,
    })
}

/// Solve the scalar equation for `S = qⁿ⁺¹ exp(tⁿ⁺¹/T)`:
///
/// ```text
/// ((τ+T)/(τT) − e^{2t/T} A₂) e^{−t/T} S = e^{t/T} A₁ + qⁿ/τ
/// ```
///
/// with `A_i = N_u·u_i + j N_w·w_i`.
pub fn compute_s(
    state: &State,
    systems: &PreparedSystems,
    aux1: &AuxSolution,
    aux2: &AuxSolution,
    loads: &ConvectionLoads,
    config: &Config,
) -> Result<SavUpdate> {
    let tau = systems.tau;
    let big_t = config.final_time;
    let t_next = systems.time_at(state.n + 1);
    let a1 = dot(&loads.n_u, &aux1.u.values) + config.inertia * dot(&loads.n_w, &aux1.w.values);
    let a2 = dot(&loads.n_u, &aux2.u.values) + config.inertia * dot(&loads.n_w, &aux2.w.values);
    let e = (t_next / big_t).exp();
    // τ × bracket, kept in this form so that with A = 0 the update is
    // exactly qⁿ / (1 + τ/T).
    let scaled = 1.0 + tau / big_t - tau * e * e * a2;
    let bracket = scaled / tau;
    if !(bracket > 0.0) {
        return Err(Error::NonPositiveCoefficient(bracket));
    }
    let q = (state.q + tau * e * a1) / scaled;
    Ok(SavUpdate {
        s: q * e,
        q,
        bracket,
        a1,
        a2,
    })
}

/// Recombine the sub-problem solutions into the state at `tⁿ⁺¹`.
pub fn compose(
    state: &State,
    systems: &PreparedSystems,
    config: &Config,
    aux1: &AuxSolution,
    aux2: &AuxSolution,
    sav: &SavUpdate,
) -> State {
    let combine = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + sav.s * y).collect()
    };
    let mut p = combine(&aux1.p.values, &aux2.p.values);
    systems.stokes.project_mean_zero(&mut p);
    let mut next = State {
        u: systems.field_u(combine(&aux1.u.values, &aux2.u.values)),
        p: systems.field_p(p),
        w: systems.field_w(combine(&aux1.w.values, &aux2.w.values)),
        q: sav.q,
        t: systems.time_at(state.n + 1),
        n: state.n + 1,
        last_step: None,
    };
    next.last_step = Some(StepDiagnostics {
        s: sav.s,
        bracket: sav.bracket,
        a1: sav.a1,
        a2: sav.a2,
        energy: discrete_energy(&next, systems, config),
        stokes: [aux1.stokes, aux2.stokes],
    });
    next
}

/// One full step. Both Stokes solves share one batched call, as do both
/// angular solves; `w₁` uses `u₁` and `w₂` uses `u₂`.
pub fn advance(state: &State, systems: &PreparedSystems, config: &Config) -> Result<State> {
    let t_next = systems.time_at(state.n + 1);
    let loads = convection_loads(state, systems)?;

    let r1 = systems.momentum_rhs1(state, config, t_next);
    let r2 = systems.momentum_rhs2(&loads);
    let mut stokes = systems.stokes.solve_many(&[&r1, &r2])?.into_iter();
    let (u1, p1, rep1) = stokes.next().expect("first solve");
    let (u2, p2, rep2) = stokes.next().expect("second solve");

    let g1 = systems.angular_rhs1(state, config, &u1, t_next);
    let g2 = systems.angular_rhs2(config, &loads, &u2);
    let mut ang = systems.angular.solve_many(&[&g1, &g2])?.into_iter();
    let (w1, w2) = (ang.next().expect("w1"), ang.next().expect("w2"));

    let aux1 = AuxSolution {
        u: systems.field_u(u1),
        p: systems.field_p(p1),
        w: systems.field_w(w1),
        stokes: rep1,
    };
    let aux2 = AuxSolution {
        u: systems.field_u(u2),
        p: systems.field_p(p2),
        w: systems.field_w(w2),
        stokes: rep2,
    };
    let sav = compute_s(state, systems, &aux1, &aux2, &loads, config)?;
    Ok(compose(state, systems, config, &aux1, &aux2, &sav))
}

/// `½‖u‖² + ½(j + 4τν_r)‖w‖² + ½q²`.
pub fn discrete_energy(state: &State, systems: &PreparedSystems, config: &Config) -> f64 {
    let ku = systems.mass_u.bilinear(&state.u.values, &state.u.values);
    let kw = systems.mass_w.bilinear(&state.w.values, &state.w.values);
    0.5 * ku + 0.5 * (config.inertia + 4.0 * systems.tau * config.nu_r) * kw + 0.5 * state.q * state.q
}

/// Kinetic energy without the auxiliary terms: `½‖u‖² + ½ j‖w‖²`.
pub fn physical_energy(state: &State, systems: &PreparedSystems, config: &Config) -> f64 {
    let ku = systems.mass_u.bilinear(&state.u.values, &state.u.values);
    let kw = systems.mass_w.bilinear(&state.w.values, &state.w.values);
    0.5 * ku + 0.5 * config.inertia * kw
}

/// `(Eⁿ⁺¹ − Eⁿ) + τν‖∇uⁿ⁺¹‖² + τc₁‖∇wⁿ⁺¹‖² + (τ/T)|qⁿ⁺¹|²`.
///
/// Without forcing this is `≤ 0` up to linear-solver error. The `c₂` term
/// is zero in 2D.
pub fn energy_dissipation_residual(
    prev: &State,
    next: &State,
    systems: &PreparedSystems,
    config: &Config,
) -> f64 {
    let tau = systems.tau;
    let grad_u = systems.stiffness_u.bilinear(&next.u.values, &next.u.values);
    let grad_w = systems.stiffness_w.bilinear(&next.w.values, &next.w.values);
    discrete_energy(next, systems, config) - discrete_energy(prev, systems, config)
        + tau * config.nu * grad_u
        + tau * config.c1 * grad_w
        + tau / config.final_time * next.q * next.q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate_scalar, interpolate_vector};
    use crate::mesh::{build_rect_mesh, Rect};
    use std::f64::consts::PI;

    fn setup(n: usize, config: &Config, zero: bool) -> (State, PreparedSystems) {
        let mesh = Arc::new(build_rect_mesh(n, n, Rect::UNIT).unwrap());
        let sp = Spaces::new(mesh);
        let u0 = interpolate_vector(&sp.velocity, |p| {
            if zero {
                return [0.0, 0.0];
            }
            let (x, y) = (p[0], p[1]);
            [
                x * x * (x - 1.0).powi(2) * y * (y - 1.0) * (2.0 * y - 1.0),
                -y * y * (y - 1.0).powi(2) * x * (x - 1.0) * (2.0 * x - 1.0),
            ]
        });
        let w0 = interpolate_scalar(&sp.angular, |p| {
            if zero {
                0.0
            } else {
                (PI * p[0]).sin() * (PI * p[1]).sin()
            }
        });
        init_stepper(config, u0, w0).unwrap()
    }

    #[test]
    fn initial_state() {
        let cfg = Config::default();
        let (s, sys) = setup(3, &cfg, true);
        assert_eq!(s.q, 1.0);
        assert_eq!(discrete_energy(&s, &sys, &cfg), 0.5);
        let (s, sys) = setup(4, &cfg, false);
        assert!(sys.mass_u.bilinear(&s.u.values, &s.u.values) > 0.0);
        for &d in sys.spaces.velocity.boundary_dofs() {
            assert_eq!(s.u.values[d], 0.0);
        }
        for &d in sys.spaces.angular.boundary_dofs() {
            assert_eq!(s.w.values[d], 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = Config {
            nu: -1.0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("nu must be positive"), "{err}");
        let cfg = Config {
            c2: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn time_grid_rounds_to_uniform_partition() {
        let cfg = Config {
            final_time: 1.0,
            tau: 0.3,
            ..Default::default()
        };
        let (n, tau) = cfg.time_grid();
        assert_eq!(n, 3);
        assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonzero_boundary_data() {
        let mesh = Arc::new(build_rect_mesh(2, 2, Rect::UNIT).unwrap());
        let sp = Spaces::new(mesh);
        let u0 = interpolate_vector(&sp.velocity, |_| [1.0, 0.0]);
        let w0 = Field::zeros(Arc::clone(&sp.angular));
        assert!(init_stepper(&Config::default(), u0, w0).is_err());
    }

    #[test]
    fn zero_data_aux_problems_vanish() {
        let cfg = Config::default();
        let (s, sys) = setup(3, &cfg, true);
        let a1 = solve_aux1(&s, &sys, &cfg).unwrap();
        let loads = convection_loads(&s, &sys).unwrap();
        let a2 = solve_aux2(&sys, &cfg, &loads).unwrap();
        for v in [&a1.u, &a1.p, &a1.w, &a2.u, &a2.p, &a2.w] {
            assert!(v.values.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn s_for_zero_velocity() {
        // A₁ = A₂ = 0, qⁿ = 1, τ = 0.1, T = 1: bracket 11, qⁿ⁺¹ = 10/11.
        let cfg = Config {
            tau: 0.1,
            final_time: 1.0,
            ..Default::default()
        };
        let (s, sys) = setup(2, &cfg, true);
        let loads = convection_loads(&s, &sys).unwrap();
        let a1 = solve_aux1(&s, &sys, &cfg).unwrap();
        let a2 = solve_aux2(&sys, &cfg, &loads).unwrap();
        let up = compute_s(&s, &sys, &a1, &a2, &loads, &cfg).unwrap();
        assert!((up.bracket - 11.0).abs() < 1e-12);
        assert!((up.q - 10.0 / 11.0).abs() < 1e-15);
        assert!((up.s - 10.0 / (11.0 * (-0.1f64).exp())).abs() < 1e-14);
        assert!((up.s - 1.004_700_834_614_225).abs() < 1e-14);
    }

    #[test]
    fn coupling_drives_velocity_from_rotation() {
        let cfg = Config::default();
        let mesh = Arc::new(build_rect_mesh(4, 4, Rect::UNIT).unwrap());
        let sp = Spaces::new(mesh);
        let u0 = Field::zeros(Arc::clone(&sp.velocity));
        let w0 = interpolate_scalar(&sp.angular, |p| (PI * p[0]).sin() * (PI * p[1]).sin());
        let (s, sys) = init_stepper(&cfg, u0, w0).unwrap();
        assert!(sys.curl.mul_transpose_vec(&s.w.values).iter().any(|v| v.abs() > 1e-6));
        let a1 = solve_aux1(&s, &sys, &cfg).unwrap();
        assert!(a1.u.values.iter().any(|v| v.abs() > 1e-6));
        assert!(a1.stokes.divergence_residual <= cfg.solver.rtol_div);

        // u nonzero, w zero: N_w = 0 but w₂ picks up curl u₂.
        let u0 = interpolate_vector(&sp.velocity, |p| {
            let (x, y) = (p[0], p[1]);
            [(PI * x).sin().powi(2) * (2.0 * PI * y).sin(), -(2.0 * PI * x).sin() * (PI * y).sin().powi(2)]
        });
        let (s, sys) = init_stepper(&cfg, u0, Field::zeros(Arc::clone(&sp.angular))).unwrap();
        let loads = convection_loads(&s, &sys).unwrap();
        assert!(loads.n_w.iter().all(|&v| v == 0.0));
        let a2 = solve_aux2(&sys, &cfg, &loads).unwrap();
        assert!(a2.w.values.iter().any(|v| v.abs() > 1e-8));
    }

    #[test]
    fn zero_data_run_follows_scalar_recursion() {
        let cfg = Config {
            tau: 0.1,
            final_time: 1.0,
            ..Default::default()
        };
        let (mut s, sys) = setup(2, &cfg, true);
        let ratio = cfg.final_time / (cfg.final_time + sys.tau);
        for n in 1..=sys.steps {
            let prev = s.clone();
            s = advance(&s, &sys, &cfg).unwrap();
            let expect = ratio.powi(n as i32);
            assert!(((s.q - expect) / expect).abs() < 1e-13);
            assert!(s.u.values.iter().all(|&v| v == 0.0));
            let r = energy_dissipation_residual(&prev, &s, &sys, &cfg);
            let scalar = -sys.tau / cfg.final_time * s.q * s.q + 0.0;
            let expect_r = 0.5 * (s.q * s.q - prev.q * prev.q) - scalar;
            assert!((r - expect_r).abs() < 1e-14);
            assert!(r <= 0.0);
        }
    }

    #[test]
    fn advance_matches_composed_substeps() {
        let cfg = Config {
            nu: 0.1,
            nu_r: 0.1,
            tau: 0.05,
            ..Default::default()
        };
        let (s, sys) = setup(4, &cfg, false);
        let a = advance(&s, &sys, &cfg).unwrap();
        let loads = convection_loads(&s, &sys).unwrap();
        let a1 = solve_aux1(&s, &sys, &cfg).unwrap();
        let a2 = solve_aux2(&sys, &cfg, &loads).unwrap();
        let up = compute_s(&s, &sys, &a1, &a2, &loads, &cfg).unwrap();
        let b = compose(&s, &sys, &cfg, &a1, &a2, &up);
        for (x, y) in a.u.values.iter().zip(&b.u.values) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.w.values.iter().zip(&b.w.values) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.q - b.q).abs() < 1e-15);
    }

    #[test]
    fn one_step_energy_decreases() {
        let cfg = Config {
            nu: 0.01,
            nu_r: 0.01,
            tau: 0.1,
            final_time: 5.0,
            ..Default::default()
        };
        let (s, sys) = setup(6, &cfg, false);
        let e0 = discrete_energy(&s, &sys, &cfg);
        let next = advance(&s, &sys, &cfg).unwrap();
        let e1 = next.last_step.unwrap().energy;
        assert!(e1 <= e0 + 1e-8 * e0);
        assert!(energy_dissipation_residual(&s, &next, &sys, &cfg) <= 1e-8 * e0);
    }
}
