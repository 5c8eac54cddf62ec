//! Relative L2 and H1-seminorm errors against analytic solutions.

use super::field::AnalyticField;
use super::quadrature::TriangleQuadrature;
use super::space::{barycentric_point, FeFunction};
use super::FemError;
use crate::geometry::Region;
use std::fmt::Write as _;

/// The discrete field an error is measured for: either a single function on
/// its own domain, or the composite field equal to the global solution on one
/// region and the subdomain solution on the other (the method's output).
#[derive(Clone, Copy, Debug)]
pub enum DiscreteField<'a> {
    Single(&'a FeFunction),
    Composite {
        global: &'a FeFunction,
        sub: &'a FeFunction,
        sub_region: Region,
    },
}

impl<'a> DiscreteField<'a> {
    fn triangles(&self) -> Vec<usize> {
        match self {
            DiscreteField::Single(f) => f.space().triangles().to_vec(),
            DiscreteField::Composite { global, .. } => global.space().triangles().to_vec(),
        }
    }

    fn part_for(&self, triangle: usize) -> &'a FeFunction {
        match self {
            DiscreteField::Single(f) => f,
            DiscreteField::Composite {
                global,
                sub,
                sub_region,
            } => {
                if global.space().mesh().triangles()[triangle].region == *sub_region {
                    sub
                } else {
                    global
                }
            }
        }
    }

    fn mesh(&self) -> &crate::mesh::Mesh {
        match self {
            DiscreteField::Single(f) => f.space().mesh(),
            DiscreteField::Composite { global, .. } => global.space().mesh(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ErrorNorms {
    pub relative_l2: f64,
    pub relative_h1_seminorm: f64,
}

/// Per-triangle quadrature of |u_h - u|^2 and |grad u_h - grad u|^2, each
/// divided by the same quadrature of the exact solution's norm.
pub fn error_norms(
    field: &DiscreteField<'_>,
    exact: &AnalyticField,
    quad: &TriangleQuadrature,
) -> Result<ErrorNorms, FemError> {
    let mesh = field.mesh();
    let mut num_l2 = 0.0;
    let mut den_l2 = 0.0;
    let mut num_h1 = 0.0;
    let mut den_h1 = 0.0;
    for t in field.triangles() {
        let part = field.part_for(t);
        let region = mesh.triangles()[t].region;
        let (pa, pb, pc) = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        let (ghx, ghy) = part.gradient_on(t);
        for (bary, &w) in quad.points.iter().zip(&quad.weights) {
            let p = barycentric_point(pa, pb, pc, *bary);
            let uh = part.eval_barycentric(t, *bary);
            let u = exact.eval(p, region);
            let (gx, gy) = exact.grad(p, region);
            let wa = w * area;
            num_l2 += wa * (uh - u) * (uh - u);
            den_l2 += wa * u * u;
            num_h1 += wa * ((ghx - gx) * (ghx - gx) + (ghy - gy) * (ghy - gy));
            den_h1 += wa * (gx * gx + gy * gy);
        }
    }
    if den_l2 <= 0.0 || den_h1 <= 0.0 {
        return Err(FemError::ZeroExactNorm);
    }
    Ok(ErrorNorms {
        relative_l2: (num_l2 / den_l2).sqrt(),
        relative_h1_seminorm: (num_h1 / den_h1).sqrt(),
    })
}

/// Energy (semi)norm of an analytic field over the triangles of a space,
/// sqrt of integral of metric * |grad w|^2, by quadrature. Serves as the
/// continuous-norm oracle for projection estimates.
pub fn energy_norm_quadrature(
    space: &super::space::FunctionSpace,
    field: &AnalyticField,
    metric: f64,
    quad: &TriangleQuadrature,
) -> f64 {
    let mesh = space.mesh();
    let mut acc = 0.0;
    for &t in space.triangles() {
        let region = mesh.triangles()[t].region;
        let (pa, pb, pc) = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        for (bary, &w) in quad.points.iter().zip(&quad.weights) {
            let p = barycentric_point(pa, pb, pc, *bary);
            let (gx, gy) = field.grad(p, region);
            acc += metric * w * area * (gx * gx + gy * gy);
        }
    }
    acc.sqrt()
}

/// One `<x> <y> <value>` line per mesh vertex of the composite field.
/// Vertices of the subdomain side (interface included) carry the subdomain
/// solution's value; all others carry the global solution's.
pub fn export_vertex_values(field: &DiscreteField<'_>) -> String {
    let mesh = field.mesh();
    let mut values = vec![0.0f64; mesh.num_vertices()];
    // global pass first, then the subdomain side overwrites its vertices
    match field {
        DiscreteField::Composite {
            global,
            sub,
            sub_region,
        } => {
            for (v, val) in values.iter_mut().enumerate() {
                *val = global.vertex_value(v);
            }
            for &t in sub.space().triangles() {
                if mesh.triangles()[t].region == *sub_region {
                    for &v in &mesh.triangles()[t].vertices {
                        values[v] = sub.vertex_value(v);
                    }
                }
            }
        }
        DiscreteField::Single(f) => {
            for (v, val) in values.iter_mut().enumerate() {
                *val = f.vertex_value(v);
            }
        }
    }
    let mut out = String::new();
    for (v, val) in values.iter().enumerate() {
        let p = mesh.point(v);
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", p.x, p.y, val);
    }
    out
}
