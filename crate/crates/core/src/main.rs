use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use micropolar::experiments::{
    run_convergence, run_decay, run_stability, run_stirring, EnergySeries,
};
use micropolar::io::{
    parse_config_file, resolve_out_dir, write_csv_table, write_energy_series, write_vtk_field,
    Command, Overrides, RunSpec,
};
use micropolar::Result;

/// Micropolar Navier–Stokes experiments.
#[derive(Parser)]
#[command(name = "mns", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Temporal convergence against a manufactured solution.
    Converge(Flags),
    /// Energy decay for a sweep of time steps and viscosities.
    Stability(Flags),
    /// Passive scalar stirred by an applied torque.
    Stir(Flags),
    /// Single unforced run.
    Run(Flags),
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
struct Flags {
    /// `key = value` or JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $MNS_OUT_DIR, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    nur: Option<f64>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    final_time: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    nus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    rtol_div: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// `direct` or `iterative`.
    #[arg(long)]
    solver: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            nu: self.nu,
            nur: self.nur,
            j: self.j,
            c1: self.c1,
            c2: self.c2,
            final_time: self.final_time,
            tau: self.tau,
            h: self.h,
            taus: self.taus.clone(),
            nus: self.nus.clone(),
            snapshots: self.snapshots.clone(),
            rtol: self.rtol,
            rtol_div: self.rtol_div,
            max_iter: self.max_iter,
            solver: self.solver.clone(),
        }
    }
}

fn tag(v: f64) -> String {
    format!("{v}").replace('.', "p")
}

fn energy_name(dir: &Path, s: &EnergySeries) -> PathBuf {
    dir.join(format!("energy_nu{}_tau{}.csv", tag(s.nu), tag(s.tau)))
}

fn execute(spec: &RunSpec) -> Result<()> {
    let out = &spec.out_dir;
    match spec.command {
        Command::Converge => {
            for &nu in &spec.nus {
                let cfg = spec.config_for(nu, spec.taus[0]);
                let report = run_convergence(&cfg, &spec.taus)?;
                let path = out.join(format!("convergence_nu{}.csv", tag(nu)));
                write_csv_table(&report, &path)?;
                println!("{}", path.display());
            }
        }
        Command::Stability => {
            for &nu in &spec.nus {
                let cfg = spec.config_for(nu, spec.taus[0]);
                for series in run_stability(&cfg, &spec.taus)? {
                    let path = energy_name(out, &series);
                    write_energy_series(&series, &path)?;
                    println!(
                        "{} max_residual/E0={:.3e}",
                        path.display(),
                        series.max_residual() / series.initial_energy()
                    );
                }
            }
        }
        Command::Stir => {
            for &nu in &spec.nus {
                let cfg = spec.config_for(nu, spec.config.tau);
                let run = run_stirring(&cfg, &spec.snapshots)?;
                for snap in &run.snapshots {
                    let path = out.join(format!("stir_nu{}_t{}.vtk", tag(nu), tag(snap.t.round())));
                    write_vtk_field(&[("phi", &snap.phi.field), ("u", &snap.u), ("w", &snap.w)], &path)?;
                }
                let mut csv = String::from("t,total_variation\n");
                for (t, v) in &run.variation {
                    csv += &format!("{t},{v:.6e}\n");
                }
                let path = out.join(format!("stir_nu{}_variation.csv", tag(nu)));
                std::fs::create_dir_all(out)?;
                std::fs::write(&path, csv)?;
                println!(
                    "{} phi in [{:.3e}, {:.6}] min_bracket={:.3e}",
                    path.display(),
                    run.phi_min,
                    run.phi_max,
                    run.min_bracket
                );
            }
        }
        Command::Run => {
            let cfg = spec.config_for(spec.nus[0], spec.config.tau);
            let (series, state) = run_decay(&cfg)?;
            let path = energy_name(out, &series);
            write_energy_series(&series, &path)?;
            let vtk = out.join("run_final.vtk");
            write_vtk_field(&[("u", &state.u), ("p", &state.p), ("w", &state.w)], &vtk)?;
            println!("{}\n{}", path.display(), vtk.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Converge(f) => (Command::Converge, f),
        Cmd::Stability(f) => (Command::Stability, f),
        Cmd::Stir(f) => (Command::Stir, f),
        Cmd::Run(f) => (Command::Run, f),
    };
    let result = (|| {
        let file = match &flags.config {
            Some(path) => parse_config_file(path)?,
            None => Overrides::default(),
        };
        let spec = RunSpec::resolve(
            Some(command),
            file.merge(flags.overrides()),
            resolve_out_dir(flags.out.clone()),
        )?;
        info!("{} {:?}", command.name(), spec.config);
        execute(&spec)
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mns {}: error: {e}", command.name());
            ExitCode::FAILURE
        }
    }
}
