use micropolar_web::{convergence_csv, energy_curve, Stirring};

#[test]
fn energy_curve_is_non_increasing() {
    let data = energy_curve(0.1, 0.1, 1.0, 1.0 / 8.0).unwrap();
    assert_eq!(data.len(), 4 * 11);
    let energies: Vec<f64> = data.chunks(4).map(|r| r[1]).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!((data[40] - 1.0).abs() < 1e-12);
}

#[test]
fn convergence_table_has_header_and_rows() {
    let csv = convergence_csv(1.0, 1.0 / 8.0, &[0.2, 0.1]).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("tau,eu_L2"));
    assert!(convergence_csv(1.0, 1.0 / 8.0, &[-0.1]).is_err());
}

#[test]
fn stirring_steps_and_stays_bounded() {
    let mut s = Stirring::create(0.1, 0.05, 0.25).unwrap();
    let tv0 = s.total_variation();
    assert!((tv0 - 2.0).abs() < 1e-12);
    s.advance_by(20).unwrap();
    assert!((s.time() - 1.0).abs() < 1e-12);
    assert!(s.phi().iter().all(|v| (0.0..=1.0).contains(v)));
    assert_eq!(s.vertices().len(), 2 * s.phi().len());
    assert_eq!(s.triangles().len() % 3, 0);
    assert!(s.total_variation() > tv0);
    s.advance_by(10_000).unwrap();
    assert!(s.finished());
    assert!((s.time() - 25.0).abs() < 1e-9);
}
