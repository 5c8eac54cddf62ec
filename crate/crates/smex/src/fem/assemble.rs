//! Element assembly: stiffness, loads, the interface mass matrix and the
//! energy projection of analytic controls.

use super::field::{AnalyticField, PiecewiseConstantCoefficient};
use super::quadrature::TriangleQuadrature;
use super::space::{barycentric_point, DofClass, FeFunction, FunctionSpace};
use super::FemError;
use crate::geometry::{signed_area_x2, Point, Region};
use crate::linalg::{factorize_spd, SparseSymMatrix};
use crate::mesh::{interface_edges, Mesh};
use std::sync::Arc;

/// Restricts assembly to a subset of the space's triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionFilter {
    All,
    Only(Region),
}

impl RegionFilter {
    fn admits(self, region: Region) -> bool {
        match self {
            RegionFilter::All => true,
            RegionFilter::Only(r) => r == region,
        }
    }
}

/// P1 stiffness matrix of one triangle with a constant coefficient:
/// c * area * grad(phi_i) . grad(phi_j).
pub fn element_stiffness(pa: Point, pb: Point, pc: Point, c: f64) -> [[f64; 3]; 3] {
    let area2 = signed_area_x2(pa, pb, pc);
    // gradient of barycentric i is ((y_j - y_k), (x_k - x_j)) / area2, cyclic
    let b = [pb.y - pc.y, pc.y - pa.y, pa.y - pb.y];
    let d = [pc.x - pb.x, pa.x - pc.x, pb.x - pa.x];
    let scale = c / (2.0 * area2);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = scale * (b[i] * b[j] + d[i] * d[j]);
        }
    }
    k
}

/// Assembles the stiffness form over the filtered triangles of the space,
/// with Dirichlet rows and columns eliminated. The filtered coefficient
/// values must be strictly positive (callers pass the negated value for
/// negative-sign forms, keeping every assembled matrix SPD).
pub fn assemble_stiffness(
    space: &FunctionSpace,
    coeff: &PiecewiseConstantCoefficient,
    filter: RegionFilter,
) -> Result<SparseSymMatrix, FemError> {
    for region in [Region::One, Region::Two] {
        if filter.admits(region) && coeff.value(region) <= 0.0 {
            // only complain about regions the space actually covers
            let covered = space
                .triangles()
                .iter()
                .any(|&t| space.mesh().triangles()[t].region == region);
            if covered {
                return Err(FemError::NonCoerciveForm {
                    region,
                    value: coeff.value(region),
                });
            }
        }
    }

    let mesh = space.mesh();
    let mut triplets = Vec::new();
    for &t in space.triangles() {
        let tri = &mesh.triangles()[t];
        if !filter.admits(tri.region) {
            continue;
        }
        let (pa, pb, pc) = mesh.triangle_points(t);
        let k = element_stiffness(pa, pb, pc, coeff.value(tri.region));
        let classes = tri.vertices.map(|v| space.vertex_class(v));
        for i in 0..3 {
            let DofClass::Free(gi) = classes[i] else {
                continue;
            };
            for j in 0..3 {
                let DofClass::Free(gj) = classes[j] else {
                    continue;
                };
                triplets.push((gi, gj, k[i][j]));
            }
        }
    }
    SparseSymMatrix::from_triplets(space.num_unknowns(), &triplets).map_err(FemError::Linalg)
}

/// Load vector of the filtered triangles: integral of f * phi_i by the given
/// quadrature, Dirichlet entries dropped.
pub fn assemble_load(
    space: &FunctionSpace,
    field: &AnalyticField,
    filter: RegionFilter,
    quad: &TriangleQuadrature,
) -> Vec<f64> {
    let mesh = space.mesh();
    let mut load = vec![0.0; space.num_unknowns()];
    for &t in space.triangles() {
        let tri = &mesh.triangles()[t];
        if !filter.admits(tri.region) {
            continue;
        }
        let (pa, pb, pc) = mesh.triangle_points(t);
        let area = 0.5 * signed_area_x2(pa, pb, pc);
        for (bary, &w) in quad.points.iter().zip(&quad.weights) {
            let p = barycentric_point(pa, pb, pc, *bary);
            let fv = field.eval(p, tri.region) * w * area;
            for (i, &v) in tri.vertices.iter().enumerate() {
                if let DofClass::Free(g) = space.vertex_class(v) {
                    load[g] += fv * bary[i];
                }
            }
        }
    }
    load
}

/// Numbering of the interface vertices, in increasing mesh-vertex order.
#[derive(Clone, Debug)]
pub struct TraceTable {
    vertices: Vec<usize>,
    index_of: Vec<Option<usize>>,
    total_length: f64,
}

impl TraceTable {
    pub fn from_mesh(mesh: &Mesh) -> Result<TraceTable, FemError> {
        let edges = interface_edges(mesh);
        if edges.is_empty() {
            return Err(FemError::EmptyInterface);
        }
        let mut vertices: Vec<usize> = edges.iter().flat_map(|&((a, b), _)| [a, b]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut index_of = vec![None; mesh.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            index_of[v] = Some(i);
        }
        let total_length = edges.iter().map(|&(_, l)| l).sum();
        Ok(TraceTable {
            vertices,
            index_of,
            total_length,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn index_of(&self, vertex: usize) -> Option<usize> {
        self.index_of[vertex]
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Values of a finite-element function at the interface vertices.
    pub fn values_of(&self, f: &FeFunction) -> Vec<f64> {
        self.vertices.iter().map(|&v| f.vertex_value(v)).collect()
    }

    /// Scatters interface-vertex values into a space's unknown vector
    /// (constrained interface vertices are dropped).
    pub fn scatter_into_space(&self, values: &[f64], space: &FunctionSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.num_unknowns()];
        for (&v, &val) in self.vertices.iter().zip(values) {
            if let DofClass::Free(g) = space.vertex_class(v) {
                out[g] += val;
            }
        }
        out
    }
}

/// P1 mass matrix of the interface polyline, indexed by the trace table:
/// each edge of length L contributes L/6 [[2, 1], [1, 2]].
pub fn assemble_interface_mass(
    mesh: &Mesh,
    trace: &TraceTable,
) -> Result<SparseSymMatrix, FemError> {
    let edges = interface_edges(mesh);
    if edges.is_empty() {
        return Err(FemError::EmptyInterface);
    }
    let mut triplets = Vec::new();
    for ((a, b), len) in edges {
        let (ia, ib) = (trace.index_of(a).unwrap(), trace.index_of(b).unwrap());
        triplets.push((ia, ia, len / 3.0));
        triplets.push((ib, ib, len / 3.0));
        triplets.push((ia, ib, len / 6.0));
        triplets.push((ib, ia, len / 6.0));
    }
    SparseSymMatrix::from_triplets(trace.len(), &triplets).map_err(FemError::Linalg)
}

/// Right-hand side of the energy projection: integral of
/// metric * grad(w) . grad(phi_i) over the space's triangles.
pub fn projection_rhs(
    space: &FunctionSpace,
    field: &AnalyticField,
    metric: f64,
    quad: &TriangleQuadrature,
) -> Vec<f64> {
    let mesh = space.mesh();
    let mut rhs = vec![0.0; space.num_unknowns()];
    for &t in space.triangles() {
        let tri = &mesh.triangles()[t];
        let (pa, pb, pc) = mesh.triangle_points(t);
        let area2 = signed_area_x2(pa, pb, pc);
        let area = 0.5 * area2;
        let gb = [pb.y - pc.y, pc.y - pa.y, pa.y - pb.y];
        let gd = [pc.x - pb.x, pa.x - pc.x, pb.x - pa.x];
        for (bary, &w) in quad.points.iter().zip(&quad.weights) {
            let p = barycentric_point(pa, pb, pc, *bary);
            let (wx, wy) = field.grad(p, tri.region);
            let scale = metric * w * area;
            for (i, &v) in tri.vertices.iter().enumerate() {
                if let DofClass::Free(g) = space.vertex_class(v) {
                    rhs[g] += scale * (wx * gb[i] + wy * gd[i]) / area2;
                }
            }
        }
    }
    rhs
}

/// Galerkin projection of an analytic field onto the space in the
/// metric-weighted energy inner product: solves S(metric) c = rhs. The
/// projection is idempotent on discrete functions and never increases the
/// energy norm.
pub fn project_control(
    field: &AnalyticField,
    space: &Arc<FunctionSpace>,
    metric: f64,
    quad: &TriangleQuadrature,
) -> Result<FeFunction, FemError> {
    if metric <= 0.0 {
        return Err(FemError::NonCoerciveForm {
            region: Region::Two,
            value: metric,
        });
    }
    let coeff = PiecewiseConstantCoefficient::uniform(metric)?;
    let stiffness = assemble_stiffness(space, &coeff, RegionFilter::All)?;
    let fact = factorize_spd(&stiffness).map_err(FemError::Linalg)?;
    let rhs = projection_rhs(space, field, metric, quad);
    let coeffs = fact.solve(&rhs).map_err(FemError::Linalg)?;
    FeFunction::new(space.clone(), coeffs)
}
