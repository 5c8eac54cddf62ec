//! Generators for the three reference geometries.
//!
//! All three are deterministic structured meshes. The curved geometries place
//! every nominally-circular vertex exactly on its circle and close the center
//! with a small fan; consecutive rings with different node counts are
//! triangulated by a zipper walk over exact rational angle fractions, so ties
//! (shared angles such as the interface ray) are detected exactly and no
//! triangle ever straddles the interface.

use super::{BoundaryEdge, BoundaryLabel, GeometryKind, Mesh, MeshError, Triangle};
use crate::geometry::{Point, Region};
use std::f64::consts::PI;

/// Unit square (0,1)^2 meshed by a 2n x 2n grid of cells, each split into two
/// triangles. Region 1 is x < 1/2, region 2 is x > 1/2; the line x = 1/2 is a
/// grid line, so the mesh conforms to the interface.
pub fn generate_square_split(n: usize) -> Result<Mesh, MeshError> {
    if n < 1 {
        return Err(MeshError::InvalidResolution {
            required: 1,
            got: n,
        });
    }
    let cells = 2 * n;
    let side = cells + 1;
    let vid = |ix: usize, iy: usize| iy * side + ix;

    let mut vertices = Vec::with_capacity(side * side);
    for iy in 0..side {
        for ix in 0..side {
            vertices.push(Point::new(
                ix as f64 / cells as f64,
                iy as f64 / cells as f64,
            ));
        }
    }

    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for cy in 0..cells {
        for cx in 0..cells {
            let region = if cx < n { Region::One } else { Region::Two };
            let (v00, v10) = (vid(cx, cy), vid(cx + 1, cy));
            let (v01, v11) = (vid(cx, cy + 1), vid(cx + 1, cy + 1));
            triangles.push(Triangle {
                vertices: [v00, v10, v11],
                region,
            });
            triangles.push(Triangle {
                vertices: [v00, v11, v01],
                region,
            });
        }
    }

    let mut boundary_edges = Vec::with_capacity(4 * cells);
    for i in 0..cells {
        for (a, b) in [
            (vid(i, 0), vid(i + 1, 0)),
            (vid(i, cells), vid(i + 1, cells)),
            (vid(0, i), vid(0, i + 1)),
            (vid(cells, i), vid(cells, i + 1)),
        ] {
            boundary_edges.push(BoundaryEdge {
                vertices: [a, b],
                label: BoundaryLabel::Dirichlet,
            });
        }
    }

    Ok(Mesh::new(
        vertices,
        triangles,
        boundary_edges,
        GeometryKind::SquareSplit,
    ))
}

/// One ring of a polar mesh: `start + k` is the vertex at angle fraction
/// `k / intervals` (of the full angular span).
struct Ring {
    start: usize,
    /// Number of angular intervals; a closed ring has `intervals` vertices,
    /// an open arc has `intervals + 1`.
    intervals: usize,
}

/// Triangulates the band between two rings by walking both node lists in
/// increasing angle. Fractions are compared exactly via cross-multiplication,
/// and on a tie the outer pointer advances, which guarantees that a radial
/// edge is created at every angle shared by both rings. Each triangle is
/// emitted with the exact rational angle fractions [lo, hi] it spans, so the
/// caller can assign regions without floating-point angle comparisons.
fn zipper_band(
    inner: &Ring,
    outer: &Ring,
    closed: bool,
    mut emit: impl FnMut([usize; 3], (usize, usize), (usize, usize)),
) {
    let (mi, mo) = (inner.intervals, outer.intervals);
    let node = |ring: &Ring, k: usize| {
        if closed {
            ring.start + k % ring.intervals
        } else {
            ring.start + k
        }
    };
    let (mut i, mut k) = (0usize, 0usize);
    while i < mi || k < mo {
        let advance_outer = if k >= mo {
            false
        } else if i >= mi {
            true
        } else {
            // (k+1)/mo <= (i+1)/mi ?
            (k + 1) * mi <= (i + 1) * mo
        };
        let lo = if i * mo <= k * mi { (i, mi) } else { (k, mo) };
        if advance_outer {
            emit(
                [node(outer, k), node(outer, k + 1), node(inner, i)],
                lo,
                (k + 1, mo),
            );
            k += 1;
        } else {
            emit(
                [node(inner, i), node(outer, k), node(inner, i + 1)],
                lo,
                (i + 1, mi),
            );
            i += 1;
        }
    }
}

/// Unit disk (region 1) inside the annulus 1 < |x| < 2 (region 2), meshed by
/// concentric rings at radii j/n with 4j nodes on ring j, so cells keep a
/// near-unit aspect ratio at every radius. Ring n is the interface circle and
/// ring 2n the Dirichlet outer boundary.
pub fn generate_disk_annulus(n: usize) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidResolution {
            required: 2,
            got: n,
        });
    }
    let mut vertices = vec![Point::new(0.0, 0.0)];
    let mut rings = Vec::with_capacity(2 * n);
    for j in 1..=2 * n {
        let r = j as f64 / n as f64;
        let m = 4 * j;
        let start = vertices.len();
        for k in 0..m {
            let theta = 2.0 * PI * (k as f64 / m as f64);
            vertices.push(Point::new(r * theta.cos(), r * theta.sin()));
        }
        rings.push(Ring {
            start,
            intervals: m,
        });
    }

    let mut triangles = Vec::new();
    // center fan, entirely inside the disk
    let first = &rings[0];
    for k in 0..first.intervals {
        triangles.push(Triangle {
            vertices: [0, first.start + k, first.start + (k + 1) % first.intervals],
            region: Region::One,
        });
    }
    for j in 1..2 * n {
        let region = if j < n { Region::One } else { Region::Two };
        zipper_band(&rings[j - 1], &rings[j], true, |vs, _, _| {
            triangles.push(Triangle {
                vertices: vs,
                region,
            });
        });
    }

    let outer = &rings[2 * n - 1];
    let mut boundary_edges = Vec::with_capacity(outer.intervals);
    for k in 0..outer.intervals {
        boundary_edges.push(BoundaryEdge {
            vertices: [outer.start + k, outer.start + (k + 1) % outer.intervals],
            label: BoundaryLabel::Dirichlet,
        });
    }

    Ok(Mesh::new(
        vertices,
        triangles,
        boundary_edges,
        GeometryKind::DiskAnnulus,
    ))
}

/// Half-disk |x| < 1 with arg(x) in (0, pi), split along the ray arg = pi/4:
/// region 1 is the sector (0, pi/4), region 2 the sector (pi/4, pi). Ring j
/// (radius j/n) carries 4j angular intervals, so the fraction 1/4 -- the
/// interface ray -- is a node angle on every ring and the whole ray is a
/// union of mesh edges meeting at the origin.
pub fn generate_corner_halfdisk(n: usize) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidResolution {
            required: 2,
            got: n,
        });
    }
    let mut vertices = vec![Point::new(0.0, 0.0)];
    let mut rings = Vec::with_capacity(n);
    for j in 1..=n {
        let r = j as f64 / n as f64;
        let m = 4 * j;
        let start = vertices.len();
        for k in 0..=m {
            if k == 0 {
                vertices.push(Point::new(r, 0.0));
            } else if k == m {
                vertices.push(Point::new(-r, 0.0));
            } else {
                let theta = PI * (k as f64 / m as f64);
                vertices.push(Point::new(r * theta.cos(), r * theta.sin()));
            }
        }
        rings.push(Ring {
            start,
            intervals: m,
        });
    }

    // a triangle spanning fractions [lo, hi] is in region 1 iff hi <= 1/4
    let region_of = |lo: (usize, usize), hi: (usize, usize)| -> Region {
        debug_assert!(
            4 * lo.0 >= lo.1 || 4 * hi.0 <= hi.1,
            "triangle straddles the interface ray"
        );
        if 4 * hi.0 <= hi.1 {
            Region::One
        } else {
            Region::Two
        }
    };

    let mut triangles = Vec::new();
    let first = &rings[0];
    for k in 0..first.intervals {
        triangles.push(Triangle {
            vertices: [0, first.start + k, first.start + k + 1],
            region: region_of((k, first.intervals), (k + 1, first.intervals)),
        });
    }
    for j in 1..n {
        zipper_band(&rings[j - 1], &rings[j], false, |vs, lo, hi| {
            triangles.push(Triangle {
                vertices: vs,
                region: region_of(lo, hi),
            });
        });
    }

    let mut boundary_edges = Vec::new();
    let last = &rings[n - 1];
    for k in 0..last.intervals {
        boundary_edges.push(BoundaryEdge {
            vertices: [last.start + k, last.start + k + 1],
            label: BoundaryLabel::Dirichlet,
        });
    }
    // the two straight segments along y = 0: radial chains at fractions 0 and 1
    let mut prev_lo = 0usize;
    let mut prev_hi = 0usize;
    for ring in rings.iter() {
        let (lo, hi) = (ring.start, ring.start + ring.intervals);
        boundary_edges.push(BoundaryEdge {
            vertices: [prev_lo, lo],
            label: BoundaryLabel::Dirichlet,
        });
        boundary_edges.push(BoundaryEdge {
            vertices: [prev_hi, hi],
            label: BoundaryLabel::Dirichlet,
        });
        prev_lo = lo;
        prev_hi = hi;
    }

    Ok(Mesh::new(
        vertices,
        triangles,
        boundary_edges,
        GeometryKind::CornerHalfDisk,
    ))
}
