//! Interface-conforming triangular meshes.
//!
//! A mesh carries region-labeled triangles (region 1 or 2), labeled boundary
//! edges and the meshsize `h` (maximum edge length). Every triangle must lie
//! entirely inside one region so that the interface between the two regions
//! is a union of mesh edges; `validate` checks this and the other structural
//! invariants.

mod generate;
mod io;

pub use generate::{generate_corner_halfdisk, generate_disk_annulus, generate_square_split};
pub use io::{read_mesh, write_mesh};

use crate::geometry::{signed_area_x2, Point, Region};
use std::collections::HashMap;
use std::fmt;

/// Boundary condition label carried by boundary edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryLabel {
    Dirichlet,
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryLabel::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Which analytic geometry produced the mesh, when known. Used to project
/// refined vertices back onto curved boundaries and to cross-check region
/// labels against the analytic region indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    /// Unit square split by the line x = 1/2.
    SquareSplit,
    /// Unit disk (region 1) inside the annulus 1 < |x| < 2 (region 2).
    DiskAnnulus,
    /// Half-disk |x| < 1, arg in (0, pi), split along the ray arg = pi/4.
    CornerHalfDisk,
    /// No analytic description available (e.g. read from a file).
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub label: BoundaryLabel,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    boundary_edges: Vec<BoundaryEdge>,
    h: f64,
    geometry: GeometryKind,
}

#[derive(Clone, Debug)]
pub enum MeshError {
    InvalidResolution {
        required: usize,
        got: usize,
    },
    DegenerateTriangle {
        triangle: usize,
    },
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    Parse {
        line: usize,
        message: String,
    },
    Semantic {
        line: usize,
        message: String,
    },
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::InvalidResolution { required, got } => {
                write!(f, "resolution must be at least {required}, got {got}")
            }
            MeshError::DegenerateTriangle { triangle } => {
                write!(f, "degenerate triangle {triangle}: repeated vertex index")
            }
            MeshError::IndexOutOfRange { what, index, limit } => {
                write!(f, "{what} index {index} out of range (limit {limit})")
            }
            MeshError::Parse { line, message } => {
                write!(f, "parse error at line {line}: {message}")
            }
            MeshError::Semantic { line, message } => {
                write!(f, "semantic error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for MeshError {}

impl Mesh {
    /// Assembles a mesh, reorienting triangles so their signed area is
    /// positive and computing `h` as the maximum edge length. Out-of-range
    /// indices are tolerated here and reported by `validate`.
    pub fn new(
        vertices: Vec<Point>,
        mut triangles: Vec<Triangle>,
        boundary_edges: Vec<BoundaryEdge>,
        geometry: GeometryKind,
    ) -> Mesh {
        let n = vertices.len();
        let mut h = 0.0f64;
        for tri in triangles.iter_mut() {
            let [a, b, c] = tri.vertices;
            if a >= n || b >= n || c >= n {
                continue;
            }
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            if signed_area_x2(pa, pb, pc) < 0.0 {
                tri.vertices.swap(1, 2);
            }
            h = h
                .max(pa.distance(pb))
                .max(pb.distance(pc))
                .max(pc.distance(pa));
        }
        Mesh {
            vertices,
            triangles,
            boundary_edges,
            h,
            geometry,
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn point(&self, v: usize) -> Point {
        self.vertices[v]
    }

    /// Maximum edge length over all triangles.
    pub fn meshsize(&self) -> f64 {
        self.h
    }

    pub fn geometry(&self) -> GeometryKind {
        self.geometry
    }

    pub fn triangle_points(&self, t: usize) -> (Point, Point, Point) {
        let [a, b, c] = self.triangles[t].vertices;
        (self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let (a, b, c) = self.triangle_points(t);
        0.5 * signed_area_x2(a, b, c)
    }

    pub fn triangle_centroid(&self, t: usize) -> Point {
        let (a, b, c) = self.triangle_points(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Map from undirected edge to the (at most two) incident triangles.
pub(crate) fn edge_incidence(mesh: &Mesh) -> HashMap<(usize, usize), Vec<usize>> {
    let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = tri.vertices;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            map.entry(edge_key(u, v)).or_default().push(t);
        }
    }
    map
}

/// Edges shared by a region-1 and a region-2 triangle, with their Euclidean
/// lengths, sorted by vertex pair.
pub fn interface_edges(mesh: &Mesh) -> Vec<((usize, usize), f64)> {
    let incidence = edge_incidence(mesh);
    let mut out = Vec::new();
    for (&(a, b), tris) in incidence.iter() {
        if tris.len() == 2 && mesh.triangles[tris[0]].region != mesh.triangles[tris[1]].region {
            out.push(((a, b), mesh.vertices[a].distance(mesh.vertices[b])));
        }
    }
    out.sort_by_key(|&(pair, _)| pair);
    out
}

/// Structural and conformity diagnostics for a mesh.
#[derive(Clone, Debug)]
pub struct MeshQualityReport {
    /// Smallest interior angle over all triangles, in radians.
    pub min_angle: f64,
    /// Largest circumradius-to-(2 inradius) ratio; 1 for equilateral.
    pub max_aspect_ratio: f64,
    /// True when every structural invariant holds and, when the analytic
    /// geometry is known, every triangle lies in its labeled region.
    pub conforming: bool,
    pub interface_edge_count: usize,
    /// One entry per violated invariant; empty for a clean mesh.
    pub violations: Vec<String>,
}

impl fmt::Display for MeshQualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "conforming={}", self.conforming)?;
        writeln!(f, "min_angle={:.6}", self.min_angle)?;
        writeln!(f, "max_aspect_ratio={:.6}", self.max_aspect_ratio)?;
        write!(f, "interface_edge_count={}", self.interface_edge_count)?;
        for v in &self.violations {
            write!(f, "\nviolation={v}")?;
        }
        Ok(())
    }
}

/// Signed analytic region indicator: negative inside region 1, positive
/// inside region 2. `None` when the geometry gives no indicator or the point
/// sits where the indicator is undefined (the corner tip lies on the
/// interface, so it never separates the regions).
fn region_indicator(geometry: GeometryKind, p: Point) -> Option<f64> {
    match geometry {
        GeometryKind::SquareSplit => Some(p.x - 0.5),
        GeometryKind::DiskAnnulus => Some(p.norm() - 1.0),
        GeometryKind::CornerHalfDisk => {
            if p.norm() < 1e-12 {
                None
            } else {
                Some(p.y.atan2(p.x) - std::f64::consts::FRAC_PI_4)
            }
        }
        GeometryKind::Custom => None,
    }
}

/// Checks all mesh invariants. Malformed indices are hard errors; every other
/// violated invariant is reported as a flag in the returned report.
pub fn validate(mesh: &Mesh) -> Result<MeshQualityReport, MeshError> {
    let n = mesh.vertices.len();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = tri.vertices;
        for &v in &tri.vertices {
            if v >= n {
                return Err(MeshError::IndexOutOfRange {
                    what: "triangle vertex",
                    index: v,
                    limit: n,
                });
            }
        }
        if a == b || b == c || a == c {
            return Err(MeshError::DegenerateTriangle { triangle: t });
        }
    }
    for edge in mesh.boundary_edges.iter() {
        let [a, b] = edge.vertices;
        for &v in &edge.vertices {
            if v >= n {
                return Err(MeshError::IndexOutOfRange {
                    what: "boundary edge vertex",
                    index: v,
                    limit: n,
                });
            }
        }
        if a == b {
            return Err(MeshError::Semantic {
                line: 0,
                message: format!("boundary edge ({a}, {b}) repeats a vertex"),
            });
        }
    }

    let mut violations = Vec::new();
    let mut min_angle = f64::INFINITY;
    let mut max_aspect = 1.0f64;
    for (t, _) in mesh.triangles.iter().enumerate() {
        let (pa, pb, pc) = mesh.triangle_points(t);
        let area2 = signed_area_x2(pa, pb, pc);
        if area2 <= 0.0 {
            violations.push(format!("triangle {t} has non-positive area"));
            continue;
        }
        let (la, lb, lc) = (pb.distance(pc), pc.distance(pa), pa.distance(pb));
        for (opp, e1, e2) in [(la, lb, lc), (lb, lc, la), (lc, la, lb)] {
            // law of cosines; clamp guards against rounding at right angles
            let cos = ((e1 * e1 + e2 * e2 - opp * opp) / (2.0 * e1 * e2)).clamp(-1.0, 1.0);
            min_angle = min_angle.min(cos.acos());
        }
        let area = 0.5 * area2;
        let aspect = la * lb * lc * (la + lb + lc) / (16.0 * area * area);
        max_aspect = max_aspect.max(aspect);
    }

    let incidence = edge_incidence(mesh);
    for (&(a, b), tris) in incidence.iter() {
        if tris.len() > 2 {
            violations.push(format!(
                "edge ({a}, {b}) shared by {} triangles",
                tris.len()
            ));
        }
    }
    let labeled: HashMap<(usize, usize), usize> = mesh
        .boundary_edges
        .iter()
        .map(|e| (edge_key(e.vertices[0], e.vertices[1]), 0usize))
        .collect();
    for &(a, b) in labeled.keys() {
        match incidence.get(&(a, b)).map(|v| v.len()) {
            Some(1) => {}
            Some(k) => violations.push(format!(
                "labeled boundary edge ({a}, {b}) belongs to {k} triangles"
            )),
            None => violations.push(format!(
                "labeled boundary edge ({a}, {b}) is not a mesh edge"
            )),
        }
    }
    for (&(a, b), tris) in incidence.iter() {
        if tris.len() == 1 && !labeled.contains_key(&(a, b)) {
            violations.push(format!("boundary edge ({a}, {b}) carries no label"));
        }
    }

    // The interface must be a union of simple polylines: at most two
    // interface edges may meet at any vertex.
    let interface = interface_edges(mesh);
    let mut degree: HashMap<usize, usize> = HashMap::new();
    for ((a, b), _) in &interface {
        *degree.entry(*a).or_insert(0) += 1;
        *degree.entry(*b).or_insert(0) += 1;
    }
    for (&v, &d) in degree.iter() {
        if d > 2 {
            violations.push(format!(
                "interface vertex {v} has {d} incident interface edges"
            ));
        }
    }

    // Conformity against the analytic geometry, when known: the region label
    // must match the indicator at the centroid, and no triangle may have
    // vertices strictly on both sides of the interface.
    let mut region_ok = true;
    if mesh.geometry != GeometryKind::Custom {
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if tri.vertices.iter().any(|&v| v >= n) {
                continue;
            }
            if let Some(ind) = region_indicator(mesh.geometry, mesh.triangle_centroid(t)) {
                let expected = if ind < 0.0 { Region::One } else { Region::Two };
                if ind.abs() > 1e-14 && tri.region != expected {
                    region_ok = false;
                    violations.push(format!(
                        "triangle {t} labeled region {} straddles or sits in region {}",
                        tri.region, expected
                    ));
                }
            }
            let (pa, pb, pc) = mesh.triangle_points(t);
            let signs: Vec<f64> = [pa, pb, pc]
                .iter()
                .filter_map(|&p| region_indicator(mesh.geometry, p))
                .collect();
            let eps = 1e-9;
            if signs.iter().any(|&s| s < -eps) && signs.iter().any(|&s| s > eps) {
                region_ok = false;
                violations.push(format!(
                    "triangle {t} has vertices on both sides of the interface"
                ));
            }
        }
    }

    let structural_ok = violations.is_empty();
    Ok(MeshQualityReport {
        min_angle: if mesh.triangles.is_empty() {
            0.0
        } else {
            min_angle
        },
        max_aspect_ratio: max_aspect,
        conforming: structural_ok && region_ok,
        interface_edge_count: interface.len(),
        violations,
    })
}

/// Correspondence between a refined mesh and its parent: new vertex
/// `old_vertex_count + i` is the (possibly projected) midpoint of
/// `edge_parents[i]`.
#[derive(Clone, Debug)]
pub struct RefinementMap {
    pub old_vertex_count: usize,
    pub edge_parents: Vec<(usize, usize)>,
}

/// Uniform red refinement: each triangle is split into four via edge
/// midpoints. Region and boundary labels are inherited; midpoints of curved
/// boundary or interface edges are projected back onto the analytic circles
/// when the generator geometry is known.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    refine_uniform_with_map(mesh).0
}

pub fn refine_uniform_with_map(mesh: &Mesh) -> (Mesh, RefinementMap) {
    let incidence = edge_incidence(mesh);
    let is_interface = |a: usize, b: usize| -> bool {
        incidence
            .get(&edge_key(a, b))
            .map(|tris| {
                tris.len() == 2 && mesh.triangles[tris[0]].region != mesh.triangles[tris[1]].region
            })
            .unwrap_or(false)
    };
    let boundary: HashMap<(usize, usize), BoundaryLabel> = mesh
        .boundary_edges
        .iter()
        .map(|e| (edge_key(e.vertices[0], e.vertices[1]), e.label))
        .collect();

    let mut vertices = mesh.vertices.clone();
    let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edge_parents = Vec::new();
    let mut midpoint = |a: usize,
                        b: usize,
                        vertices: &mut Vec<Point>,
                        parents: &mut Vec<(usize, usize)>|
     -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = midpoint_of.get(&key) {
            return m;
        }
        let mut p = vertices[key.0].midpoint(vertices[key.1]);
        match mesh.geometry {
            GeometryKind::DiskAnnulus => {
                if boundary.contains_key(&key) {
                    p = p.project_to_circle(2.0);
                } else if is_interface(key.0, key.1) {
                    p = p.project_to_circle(1.0);
                }
            }
            GeometryKind::CornerHalfDisk => {
                // boundary edges with both endpoints on y = 0 are straight
                let straight = vertices[key.0].y == 0.0 && vertices[key.1].y == 0.0;
                if boundary.contains_key(&key) && !straight {
                    p = p.project_to_circle(1.0);
                }
            }
            GeometryKind::SquareSplit | GeometryKind::Custom => {}
        }
        let m = vertices.len();
        vertices.push(p);
        midpoint_of.insert(key, m);
        parents.push(key);
        m
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for tri in mesh.triangles.iter() {
        let [a, b, c] = tri.vertices;
        let mab = midpoint(a, b, &mut vertices, &mut edge_parents);
        let mbc = midpoint(b, c, &mut vertices, &mut edge_parents);
        let mca = midpoint(c, a, &mut vertices, &mut edge_parents);
        for vs in [[a, mab, mca], [b, mbc, mab], [c, mca, mbc], [mab, mbc, mca]] {
            triangles.push(Triangle {
                vertices: vs,
                region: tri.region,
            });
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in mesh.boundary_edges.iter() {
        let [a, b] = e.vertices;
        let m = midpoint(a, b, &mut vertices, &mut edge_parents);
        boundary_edges.push(BoundaryEdge {
            vertices: [a, m],
            label: e.label,
        });
        boundary_edges.push(BoundaryEdge {
            vertices: [m, b],
            label: e.label,
        });
    }

    let map = RefinementMap {
        old_vertex_count: mesh.vertices.len(),
        edge_parents,
    };
    (
        Mesh::new(vertices, triangles, boundary_edges, mesh.geometry),
        map,
    )
}
