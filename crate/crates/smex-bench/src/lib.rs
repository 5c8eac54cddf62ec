//! Shared setup for the solver micro-benchmarks.

use smex::fem::{AnalyticField, QuadratureRule};
use smex::geometry::Point;
use smex::mesh::{generate_disk_annulus, generate_square_split, Mesh};
use smex::transmission::{prepare, DiscreteOperators, ExtensionSource, TransmissionProblem};
use std::f64::consts::PI;
use std::sync::Arc;

pub fn square_mesh(n: usize) -> Mesh {
    generate_square_split(n).expect("valid resolution")
}

pub fn disk_mesh(n: usize) -> Mesh {
    generate_disk_annulus(n).expect("valid resolution")
}

pub fn benchmark_problem() -> TransmissionProblem {
    let source = AnalyticField::new(|p: Point, _| (PI * p.x).sin() * (2.0 * PI * p.y).cos() + 0.3);
    TransmissionProblem::new(1.0, -2.0, source, ExtensionSource::Subdomain1)
        .expect("valid coefficients")
}

pub fn prepared_operators(mesh: Mesh) -> DiscreteOperators {
    prepare(
        &benchmark_problem(),
        Arc::new(mesh),
        QuadratureRule::Degree5,
    )
    .expect("prepare succeeds on generated meshes")
}
