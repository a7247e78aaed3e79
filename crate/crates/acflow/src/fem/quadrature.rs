//! Triangle quadrature, exact for polynomials of total degree 5.

/// A quadrature rule in barycentric coordinates; weights sum to 1 and scale by the
/// triangle area.
#[derive(Debug, Clone, Copy)]
pub struct QuadRule {
    pub points: [[f64; 3]; 7],
    pub weights: [f64; 7],
}

/// The 7-point degree-5 rule: centroid plus two symmetric orbits.
pub fn degree5() -> QuadRule {
    let s = 15f64.sqrt();
    let b1 = (6.0 + s) / 21.0;
    let a1 = 1.0 - 2.0 * b1;
    let w1 = (155.0 + s) / 1200.0;
    let b2 = (6.0 - s) / 21.0;
    let a2 = 1.0 - 2.0 * b2;
    let w2 = (155.0 - s) / 1200.0;
    let third = 1.0 / 3.0;
    QuadRule {
        points: [
            [third, third, third],
            [a1, b1, b1],
            [b1, a1, b1],
            [b1, b1, a1],
            [a2, b2, b2],
            [b2, a2, b2],
            [b2, b2, a2],
        ],
        weights: [9.0 / 40.0, w1, w1, w1, w2, w2, w2],
    }
}
