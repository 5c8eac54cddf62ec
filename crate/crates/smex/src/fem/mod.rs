//! P1 Lagrange finite elements: spaces, assembly, projection, error norms.

mod assemble;
mod error_norms;
mod field;
pub mod quadrature;
mod space;

pub use assemble::{
    assemble_interface_mass, assemble_load, assemble_stiffness, element_stiffness, project_control,
    projection_rhs, RegionFilter, TraceTable,
};
pub use error_norms::{
    energy_norm_quadrature, error_norms, export_vertex_values, DiscreteField, ErrorNorms,
};
pub use field::{AnalyticField, PiecewiseConstantCoefficient};
pub use quadrature::{QuadratureRule, TriangleQuadrature};
pub use space::{
    barycentric_point, build_space, restrict_values, restriction_map, scatter_values, DofClass,
    DomainSelector, FeFunction, FunctionSpace, RestrictTarget,
};

use crate::geometry::Region;
use crate::linalg::LinalgError;
use std::fmt;

#[derive(Debug)]
pub enum FemError {
    UnsupportedDegree {
        got: u32,
    },
    ZeroCoefficient,
    NonCoerciveForm {
        region: Region,
        value: f64,
    },
    MeshMismatch,
    CoefficientLength {
        expected: usize,
        got: usize,
    },
    EmptyInterface,
    ZeroExactNorm,
    InconsistentGradient {
        x: f64,
        y: f64,
        analytic: (f64, f64),
        finite_difference: (f64, f64),
    },
    Linalg(LinalgError),
}

impl fmt::Display for FemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FemError::UnsupportedDegree { got } => {
                write!(f, "unsupported degree {got}: only k = 1 is implemented")
            }
            FemError::ZeroCoefficient => write!(f, "piecewise-constant coefficient must be nonzero"),
            FemError::NonCoerciveForm { region, value } => write!(
                f,
                "non-coercive form requested: coefficient {value} on region {region} is not positive"
            ),
            FemError::MeshMismatch => write!(f, "spaces are built over different meshes"),
            FemError::CoefficientLength { expected, got } => {
                write!(f, "coefficient vector length {got}, space has {expected} unknowns")
            }
            FemError::EmptyInterface => write!(f, "mesh has no interface edges"),
            FemError::ZeroExactNorm => write!(f, "exact solution has zero norm on the domain"),
            FemError::InconsistentGradient { x, y, analytic, finite_difference } => write!(
                f,
                "gradient inconsistent with values at ({x}, {y}): analytic {analytic:?}, finite differences {finite_difference:?}"
            ),
            FemError::Linalg(e) => write!(f, "linear algebra: {e}"),
        }
    }
}

impl std::error::Error for FemError {}

impl From<LinalgError> for FemError {
    fn from(e: LinalgError) -> Self {
        FemError::Linalg(e)
    }
}
