//! Seven-point symmetric rule on the reference triangle, exact through degree 5.

/// Reference-triangle quadrature point `(ξ, η)` and weight, with weights
/// normalised to sum to 1 (multiply by the physical area).
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: f64,
    pub eta: f64,
    pub weight: f64,
}

impl QuadPoint {
    pub fn barycentric(&self) -> [f64; 3] {
        [1.0 - self.xi - self.eta, self.xi, self.eta]
    }
}

pub fn degree5_rule() -> [QuadPoint; 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let p = |xi, eta, weight| QuadPoint { xi, eta, weight };
    [
        p(1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0),
        p(a1, a1, w1),
        p(1.0 - 2.0 * a1, a1, w1),
        p(a1, 1.0 - 2.0 * a1, w1),
        p(a2, a2, w2),
        p(1.0 - 2.0 * a2, a2, w2),
        p(a2, 1.0 - 2.0 * a2, w2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_ref ξ^a η^b = a! b! / (a + b + 2)!, and the reference area is 1/2.
    fn exact_monomial(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn integrates_all_monomials_through_degree_five() {
        let rule = degree5_rule();
        let total: f64 = rule.iter().map(|q| q.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = rule
                    .iter()
                    .map(|q| q.weight * q.xi.powi(a as i32) * q.eta.powi(b as i32))
                    .sum();
                let e = exact_monomial(a, b);
                assert!((q - e).abs() < 1e-14, "ξ^{a} η^{b}: {q} vs {e}");
            }
        }
    }

    #[test]
    fn degree_six_is_not_exact() {
        let rule = degree5_rule();
        let q: f64 = rule.iter().map(|q| q.weight * q.xi.powi(6)).sum();
        assert!((q - exact_monomial(6, 0)).abs() > 1e-8);
    }
}
