//! WebAssembly bindings for a small interactive demo: energy decay curves,
//! a coarse stirring run stepped from the page, and a convergence table.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use micropolar::experiments::{
    mesh_for, run_convergence, run_decay, stirring_config, stirring_initial_scalar,
    ErrorReport,
};
use micropolar::fem::Field;
use micropolar::io::format_csv_table;
use micropolar::mesh::Rect;
use micropolar::stepper::{advance, init_stepper, Config, PreparedSystems, Spaces, State};
use micropolar::transport::{advect, ScalarField};

fn base(nu: f64, tau: f64, final_time: f64, h: f64) -> Config {
    Config {
        nu,
        nu_r: nu,
        tau,
        final_time,
        h,
        ..Default::default()
    }
}

/// Flattened `[t, E, E_physical, q]` per step of an unforced decay run.
pub fn energy_curve(nu: f64, tau: f64, final_time: f64, h: f64) -> Result<Vec<f64>, String> {
    let (series, _) = run_decay(&base(nu, tau, final_time, h)).map_err(|e| e.to_string())?;
    Ok(series
        .records
        .iter()
        .flat_map(|r| [r.t, r.energy, r.physical_energy, r.q])
        .collect())
}

/// Manufactured-solution errors and rates as CSV text.
pub fn convergence_csv(nu: f64, h: f64, taus: &[f64]) -> Result<String, String> {
    let cfg = Config {
        final_time: 1.0,
        ..base(nu, taus.first().copied().unwrap_or(0.1), 1.0, h)
    };
    let report: ErrorReport = run_convergence(&cfg, taus).map_err(|e| e.to_string())?;
    Ok(format_csv_table(&report))
}

#[wasm_bindgen(js_name = energyCurve)]
pub fn energy_curve_js(nu: f64, tau: f64, final_time: f64, h: f64) -> Result<Vec<f64>, JsError> {
    energy_curve(nu, tau, final_time, h).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = convergenceTable)]
pub fn convergence_table_js(nu: f64, h: f64, taus: Vec<f64>) -> Result<String, JsError> {
    convergence_csv(nu, h, &taus).map_err(|e| JsError::new(&e))
}

const STIR_FINAL_TIME: f64 = 25.0;

/// Passive scalar stirred by the torque-driven flow, advanced on demand.
#[wasm_bindgen]
pub struct Stirring {
    config: Config,
    state: State,
    systems: PreparedSystems,
    phi: ScalarField,
}

impl Stirring {
    pub fn create(nu: f64, tau: f64, h: f64) -> Result<Stirring, String> {
        let config = stirring_config(&base(nu, tau, STIR_FINAL_TIME, h));
        let mesh = mesh_for(Rect::centered_square(1.0), h).map_err(|e| e.to_string())?;
        let spaces = Spaces::new(mesh);
        let (state, systems) = init_stepper(
            &config,
            Field::zeros(Arc::clone(&spaces.velocity)),
            Field::zeros(Arc::clone(&spaces.angular)),
        )
        .map_err(|e| e.to_string())?;
        let phi = ScalarField::from_fn(&systems.spaces.pressure, stirring_initial_scalar)
            .map_err(|e| e.to_string())?;
        Ok(Stirring {
            config,
            state,
            systems,
            phi,
        })
    }

    pub fn advance_by(&mut self, steps: usize) -> Result<(), String> {
        // The time grid ends at the configured final time.
        let steps = steps.min(self.systems.steps - self.state.n);
        for _ in 0..steps {
            self.state = advance(&self.state, &self.systems, &self.config).map_err(|e| e.to_string())?;
            self.phi = advect(&self.phi, &self.state.u, self.systems.tau).map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

#[wasm_bindgen]
impl Stirring {
    #[wasm_bindgen(constructor)]
    pub fn new(nu: f64, tau: f64, h: f64) -> Result<Stirring, JsError> {
        Self::create(nu, tau, h).map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, steps: usize) -> Result<(), JsError> {
        self.advance_by(steps).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn finished(&self) -> bool {
        self.state.n >= self.systems.steps
    }

    #[wasm_bindgen(js_name = totalVariation)]
    pub fn total_variation(&self) -> f64 {
        self.phi.total_variation()
    }

    /// Vertex coordinates, `[x0, y0, x1, y1, ...]`.
    pub fn vertices(&self) -> Vec<f64> {
        self.phi.field.space.mesh().vertices.iter().flatten().copied().collect()
    }

    pub fn triangles(&self) -> Vec<u32> {
        self.phi
            .field
            .space
            .mesh()
            .triangles
            .iter()
            .flatten()
            .map(|&v| v as u32)
            .collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.phi.values().to_vec()
    }
}
