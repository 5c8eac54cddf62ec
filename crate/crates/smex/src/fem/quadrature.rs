//! Symmetric quadrature rules on the reference triangle.
//!
//! Points are stored in barycentric coordinates with weights summing to one,
//! so `integral over T = area(T) * sum w_q f(p_q)`. The degree-1 centroid
//! rule integrates P1 stiffness terms with piecewise-constant coefficients
//! exactly; loads and error norms default to the degree-5 rule; the corner
//! benchmark, whose integrands carry an r^(lambda-1) singularity, uses the
//! degree-7 rule. All points are strictly interior, so integrands that are
//! singular at a vertex are never sampled there.

/// Quadrature rule on the reference triangle: barycentric points and weights
/// normalized to sum to one.
#[derive(Clone, Debug)]
pub struct TriangleQuadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Named rule selection, mirroring the degrees used by the assembly and the
/// error norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    Degree1,
    Degree5,
    Degree7,
}

impl QuadratureRule {
    pub fn build(self) -> TriangleQuadrature {
        match self {
            QuadratureRule::Degree1 => centroid_rule(),
            QuadratureRule::Degree5 => degree5_rule(),
            QuadratureRule::Degree7 => degree7_rule(),
        }
    }
}

pub fn centroid_rule() -> TriangleQuadrature {
    TriangleQuadrature {
        points: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
        weights: vec![1.0],
    }
}

/// Classical 7-point degree-5 rule (centroid plus two symmetric orbits).
pub fn degree5_rule() -> TriangleQuadrature {
    let s15 = 15.0f64.sqrt();
    let w1 = (155.0 + s15) / 1200.0;
    let a1 = (6.0 + s15) / 21.0;
    let b1 = (9.0 - 2.0 * s15) / 21.0;
    let w2 = (155.0 - s15) / 1200.0;
    let a2 = (6.0 - s15) / 21.0;
    let b2 = (9.0 + 2.0 * s15) / 21.0;

    let mut points = vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
    let mut weights = vec![9.0 / 40.0];
    for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            points.push(p);
            weights.push(w);
        }
    }
    TriangleQuadrature { points, weights }
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    // closed-form nodes for n = 4 and n = 5 on [-1, 1], mapped to [0, 1]
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match n {
        4 => {
            let a = (3.0 - 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0;
            let b = (3.0 + 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0;
            let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
            let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
            (
                vec![-b.sqrt(), -a.sqrt(), a.sqrt(), b.sqrt()],
                vec![wb, wa, wa, wb],
            )
        }
        5 => {
            let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => unreachable!("only the orders used by the collapsed rule are provided"),
    };
    (
        nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights.iter().map(|w| 0.5 * w).collect(),
    )
}

/// Collapsed (Duffy) Gauss product rule, exact for total degree 7. The
/// square-to-triangle map (u, v) -> (u(1-v), uv) has Jacobian u, so a
/// degree-7 integrand needs degree 8 in u and 7 in v: 5 x 4 Gauss points.
/// All 20 weights are positive.
pub fn degree7_rule() -> TriangleQuadrature {
    let (ug, uw) = gauss_legendre_01(5);
    let (vg, vw) = gauss_legendre_01(4);
    let mut points = Vec::with_capacity(20);
    let mut weights = Vec::with_capacity(20);
    for (&u, &wu) in ug.iter().zip(&uw) {
        for (&v, &wv) in vg.iter().zip(&vw) {
            let x = u * (1.0 - v);
            let y = u * v;
            points.push([1.0 - x - y, x, y]);
            // factor 2 renormalizes to the unit-sum convention
            weights.push(2.0 * wu * wv * u);
        }
    }
    TriangleQuadrature { points, weights }
}
