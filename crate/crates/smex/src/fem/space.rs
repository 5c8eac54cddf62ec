//! P1 Lagrange function spaces on the global domain or one subdomain.
//!
//! The global space constrains every vertex on the outer (Dirichlet)
//! boundary. A subdomain space constrains the vertices on the part of the
//! subdomain boundary that lies on the outer boundary -- interface vertices
//! stay free, except where the interface meets the outer boundary. Under a
//! conforming mesh the subdomain space is exactly the set of restrictions of
//! global functions, which is what `restriction_map` realizes.

use super::FemError;
use crate::geometry::{Point, Region};
use crate::mesh::Mesh;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainSelector {
    Global,
    Subdomain(Region),
}

/// Classification of a mesh vertex relative to one function space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofClass {
    /// Unknown with the given index.
    Free(usize),
    /// In the domain but fixed to zero by the boundary condition.
    Constrained,
    /// Not a vertex of the domain.
    Outside,
}

#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    domain: DomainSelector,
    vertex_class: Vec<DofClass>,
    /// Inverse of the Free(...) entries: unknown index -> mesh vertex.
    unknown_vertex: Vec<usize>,
    /// Triangles belonging to the domain, in mesh order.
    triangles: Vec<usize>,
}

/// Builds the P1 space over the selected domain. Only degree 1 is supported.
pub fn build_space(
    mesh: &Arc<Mesh>,
    domain: DomainSelector,
    degree: u32,
) -> Result<FunctionSpace, FemError> {
    if degree != 1 {
        return Err(FemError::UnsupportedDegree { got: degree });
    }

    let nv = mesh.num_vertices();
    let triangles: Vec<usize> = mesh
        .triangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| match domain {
            DomainSelector::Global => true,
            DomainSelector::Subdomain(r) => t.region == r,
        })
        .map(|(i, _)| i)
        .collect();

    let mut in_domain = vec![false; nv];
    for &t in &triangles {
        for &v in &mesh.triangles()[t].vertices {
            in_domain[v] = true;
        }
    }

    // A vertex is constrained when it is an endpoint of a Dirichlet boundary
    // edge owned by a triangle of the domain. For a subdomain this is exactly
    // the boundary part away from the interface (interface endpoints on the
    // outer boundary are caught because they terminate a Dirichlet edge).
    let owner_region = {
        use std::collections::HashMap;
        let mut map: HashMap<(usize, usize), Region> = HashMap::new();
        for t in mesh.triangles() {
            let [a, b, c] = t.vertices;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = if u < v { (u, v) } else { (v, u) };
                map.insert(key, t.region);
            }
        }
        map
    };
    let mut constrained = vec![false; nv];
    for edge in mesh.boundary_edges() {
        let [a, b] = edge.vertices;
        let key = if a < b { (a, b) } else { (b, a) };
        let in_selected = match (domain, owner_region.get(&key)) {
            (DomainSelector::Global, _) => true,
            (DomainSelector::Subdomain(r), Some(&owner)) => owner == r,
            (DomainSelector::Subdomain(_), None) => false,
        };
        if in_selected {
            constrained[a] = true;
            constrained[b] = true;
        }
    }

    let mut vertex_class = vec![DofClass::Outside; nv];
    let mut unknown_vertex = Vec::new();
    for v in 0..nv {
        if !in_domain[v] {
            continue;
        }
        vertex_class[v] = if constrained[v] {
            DofClass::Constrained
        } else {
            let idx = unknown_vertex.len();
            unknown_vertex.push(v);
            DofClass::Free(idx)
        };
    }

    Ok(FunctionSpace {
        mesh: mesh.clone(),
        domain,
        vertex_class,
        unknown_vertex,
        triangles,
    })
}

impl FunctionSpace {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn domain(&self) -> DomainSelector {
        self.domain
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknown_vertex.len()
    }

    pub fn vertex_class(&self, v: usize) -> DofClass {
        self.vertex_class[v]
    }

    pub fn unknown_vertex(&self, dof: usize) -> usize {
        self.unknown_vertex[dof]
    }

    /// Triangles of the domain, as mesh triangle indices.
    pub fn triangles(&self) -> &[usize] {
        &self.triangles
    }

    pub fn same_mesh(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    /// Nodal interpolant of an analytic field (free vertices only).
    pub fn interpolate(self: &Arc<Self>, field: &super::AnalyticField) -> FeFunction {
        // at a free vertex every incident triangle is in the domain; use any
        // incident region for piecewise fields (they agree at shared vertices
        // of one region, and interface vertices are sampled two-sided by the
        // region of the triangle that owns them -- for nodal interpolation of
        // a continuous field either branch gives the same value)
        let mut region_of_vertex = vec![Region::One; self.mesh.num_vertices()];
        for &t in &self.triangles {
            let tri = &self.mesh.triangles()[t];
            for &v in &tri.vertices {
                region_of_vertex[v] = tri.region;
            }
        }
        let coeffs = self
            .unknown_vertex
            .iter()
            .map(|&v| field.eval(self.mesh.point(v), region_of_vertex[v]))
            .collect();
        FeFunction {
            space: self.clone(),
            coeffs,
        }
    }
}

/// A P1 function: one coefficient per unknown of its space; constrained
/// vertices evaluate to zero.
#[derive(Clone, Debug)]
pub struct FeFunction {
    space: Arc<FunctionSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FunctionSpace>, coeffs: Vec<f64>) -> Result<FeFunction, FemError> {
        if coeffs.len() != space.num_unknowns() {
            return Err(FemError::CoefficientLength {
                expected: space.num_unknowns(),
                got: coeffs.len(),
            });
        }
        Ok(FeFunction { space, coeffs })
    }

    pub fn zero(space: Arc<FunctionSpace>) -> FeFunction {
        let n = space.num_unknowns();
        FeFunction {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn vertex_value(&self, v: usize) -> f64 {
        match self.space.vertex_class(v) {
            DofClass::Free(i) => self.coeffs[i],
            DofClass::Constrained | DofClass::Outside => 0.0,
        }
    }

    /// Value at barycentric coordinates of a mesh triangle.
    pub fn eval_barycentric(&self, triangle: usize, bary: [f64; 3]) -> f64 {
        let tri = &self.space.mesh.triangles()[triangle];
        tri.vertices
            .iter()
            .zip(bary)
            .map(|(&v, b)| b * self.vertex_value(v))
            .sum()
    }

    /// Constant gradient on a mesh triangle.
    pub fn gradient_on(&self, triangle: usize) -> (f64, f64) {
        let tri = &self.space.mesh.triangles()[triangle];
        let [a, b, c] = tri.vertices;
        let (pa, pb, pc) = (
            self.space.mesh.point(a),
            self.space.mesh.point(b),
            self.space.mesh.point(c),
        );
        let area2 = crate::geometry::signed_area_x2(pa, pb, pc);
        let (va, vb, vc) = (
            self.vertex_value(a),
            self.vertex_value(b),
            self.vertex_value(c),
        );
        let gx = (va * (pb.y - pc.y) + vb * (pc.y - pa.y) + vc * (pa.y - pb.y)) / area2;
        let gy = (va * (pc.x - pb.x) + vb * (pa.x - pc.x) + vc * (pb.x - pa.x)) / area2;
        (gx, gy)
    }
}

/// Where a subdomain unknown comes from when restricting a global function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictTarget {
    GlobalDof(usize),
    /// The shared vertex is constrained in the global space (an interface
    /// endpoint on the outer boundary), so the restricted value is zero.
    Zero,
}

/// For every unknown of `sub`, the global unknown holding its value.
pub fn restriction_map(
    global: &FunctionSpace,
    sub: &FunctionSpace,
) -> Result<Vec<RestrictTarget>, FemError> {
    if !global.same_mesh(sub) {
        return Err(FemError::MeshMismatch);
    }
    if global.domain() != DomainSelector::Global
        || !matches!(sub.domain(), DomainSelector::Subdomain(_))
    {
        return Err(FemError::MeshMismatch);
    }
    Ok((0..sub.num_unknowns())
        .map(|dof| match global.vertex_class(sub.unknown_vertex(dof)) {
            DofClass::Free(g) => RestrictTarget::GlobalDof(g),
            _ => RestrictTarget::Zero,
        })
        .collect())
}

/// Applies a restriction map: picks subdomain values out of a global vector.
pub fn restrict_values(map: &[RestrictTarget], global: &[f64]) -> Vec<f64> {
    map.iter()
        .map(|t| match t {
            RestrictTarget::GlobalDof(g) => global[*g],
            RestrictTarget::Zero => 0.0,
        })
        .collect()
}

/// Adjoint of `restrict_values`: scatters subdomain values into an otherwise
/// zero global vector.
pub fn scatter_values(map: &[RestrictTarget], sub: &[f64], global_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; global_len];
    for (t, &v) in map.iter().zip(sub) {
        if let RestrictTarget::GlobalDof(g) = t {
            out[*g] += v;
        }
    }
    out
}

/// Evaluation point helper: barycentric to Cartesian.
pub fn barycentric_point(pa: Point, pb: Point, pc: Point, bary: [f64; 3]) -> Point {
    Point::new(
        bary[0] * pa.x + bary[1] * pb.x + bary[2] * pc.x,
        bary[0] * pa.y + bary[1] * pb.y + bary[2] * pc.y,
    )
}
