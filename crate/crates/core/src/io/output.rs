//! CSV tables, energy series and legacy ASCII VTK snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{EnergySeries, ErrorReport};
use crate::fem::Field;

pub const TABLE_HEADER: &str = "tau,eu_L2,eu_L2_rate,eu_H1,eu_H1_rate,ep_L2,ep_L2_rate,ew_L2,ew_L2_rate,ew_H1,ew_H1_rate,eq,eq_rate";
pub const ENERGY_HEADER: &str = "n,t,E,E_physical,q,S,dissipation_residual";

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn format_csv_table(report: &ErrorReport) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (row, rates) in report.rows.iter().zip(report.rates()) {
        out += &format!("{}", row.tau);
        for (k, v) in row.values().iter().enumerate() {
            let rate = rates.map(|r| format!("{:.2}", r[k])).unwrap_or_default();
            let _ = write!(out, ",{},{}", sci(*v), rate);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv_table(report: &ErrorReport, path: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InvalidConfig("error report has no rows".into()));
    }
    write_file(path, &format_csv_table(report))
}

pub fn format_energy_series(series: &EnergySeries) -> String {
    let mut out = String::from(ENERGY_HEADER);
    out.push('\n');
    for r in &series.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.t,
            sci(r.energy),
            sci(r.physical_energy),
            sci(r.q),
            r.s.map(sci).unwrap_or_default(),
            r.dissipation_residual.map(sci).unwrap_or_default(),
        );
    }
    out
}

pub fn write_energy_series(series: &EnergySeries, path: &Path) -> Result<()> {
    write_file(path, &format_energy_series(series))
}

/// Legacy VTK text for fields sharing one mesh. Only vertex values are
/// written; quadratic midpoint values are dropped.
pub fn format_vtk(fields: &[(&str, &Field)], title: &str) -> Result<String> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidConfig("no fields to write".into()))?;
    let mesh = first.1.space.mesh();
    if fields.iter().any(|(_, f)| !std::sync::Arc::ptr_eq(f.space.mesh(), mesh)) {
        return Err(Error::MeshMismatch);
    }
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {nv} double");
    for p in &mesh.vertices {
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {nv}");
    for (name, field) in fields {
        let v = field.vertex_values();
        match field.space.components() {
            1 => {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(out, "{x}");
                }
            }
            _ => {
                let _ = writeln!(out, "VECTORS {name} double");
                for c in v.chunks(2) {
                    let _ = writeln!(out, "{} {} 0", c[0], c[1]);
                }
            }
        }
    }
    Ok(out)
}

pub fn write_vtk_field(fields: &[(&str, &Field)], path: &Path) -> Result<()> {
    write_file(path, &format_vtk(fields, "micropolar")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{EnergyRecord, ErrorRow};
    use crate::fem::{interpolate_scalar, interpolate_vector, FeSpace, Order};
    use crate::mesh::{build_rect_mesh, Rect};
    use std::sync::Arc;

    fn report(taus: &[f64]) -> ErrorReport {
        ErrorReport {
            rows: taus
                .iter()
                .map(|&tau| ErrorRow {
                    tau,
                    eu_l2: 0.026 * tau,
                    eu_h1: 0.18 * tau,
                    ep_l2: 0.23 * tau,
                    ew_l2: 0.0079 * tau,
                    ew_h1: 0.037 * tau,
                    eq: 0.0,
                    min_bracket: 1.0,
                })
                .collect(),
        }
    }

    #[test]
    fn table_layout() {
        let text = format_csv_table(&report(&[0.2, 0.1, 0.05, 0.025]));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], TABLE_HEADER);
        let first: Vec<_> = lines[1].split(',').collect();
        assert_eq!(first.len(), 13);
        assert_eq!(first[0], "0.2");
        assert_eq!(first[2], "");
        assert_eq!(first[11], "0.000000e0");
        let second: Vec<_> = lines[2].split(',').collect();
        assert_eq!(second[2], "1.00");
    }

    #[test]
    fn table_values_round_trip() {
        let rep = report(&[0.2, 0.1]);
        let text = format_csv_table(&rep);
        let line = text.lines().nth(2).unwrap();
        let row: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((row[0] - 0.1).abs() < 1e-15);
        for (k, expect) in rep.rows[1].values().iter().enumerate() {
            let got = row[1 + 2 * k];
            assert!((got - expect).abs() <= 5e-7 * expect.abs(), "{got} {expect}");
        }
    }

    #[test]
    fn energy_series_layout() {
        let rec = |n: usize| EnergyRecord {
            n,
            t: n as f64 * 0.5,
            energy: 1.0 / (n + 1) as f64,
            physical_energy: 0.1,
            q: 1.0 / (n + 1) as f64,
            s: (n > 0).then_some(1.0),
            bracket: None,
            dissipation_residual: (n > 0).then_some(-1e-3),
        };
        let series = EnergySeries {
            tau: 0.5,
            nu: 0.1,
            records: (0..3).map(rec).collect(),
        };
        let text = format_energy_series(&series);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 2);
        assert_eq!(lines[0], ENERGY_HEADER);
        assert_eq!(lines[1], "0,0,1.000000e0,1.000000e-1,1.000000e0,,");
        assert!(lines[2].ends_with(",1.000000e0,-1.000000e-3"));
    }

    #[test]
    fn vtk_two_triangles() {
        let mesh = Arc::new(build_rect_mesh(1, 1, Rect::UNIT).unwrap());
        let p1 = Arc::new(FeSpace::scalar(Arc::clone(&mesh), Order::Linear));
        let p2v = Arc::new(FeSpace::vector(mesh, Order::Quadratic));
        let phi = interpolate_scalar(&p1, |p| p[0]);
        let u = interpolate_vector(&p2v, |p| [p[1], -p[0]]);
        let text = format_vtk(&[("phi", &phi), ("u", &u)], "t").unwrap();
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        let types = text.split("CELL_TYPES 2\n").nth(1).unwrap();
        assert!(types.starts_with("5\n5\nPOINT_DATA 4\n"));
        assert!(text.contains("SCALARS phi double 1"));
        assert!(text.contains("VECTORS u double"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.vtk");
        write_vtk_field(&[("phi", &phi)], &path).unwrap();
        assert!(fs::read_to_string(path).unwrap().starts_with("# vtk DataFile Version 3.0"));
    }
}
