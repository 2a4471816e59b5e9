//! Structured, graded triangulations of the axisymmetric half-strip
//! (r, z) ∈ [0, r_max] × [0, d] with tagged boundary edges.
//!
//! The Dirichlet/Neumann junction at (a, 0) is always a mesh node. Cells are
//! geometrically graded (ratio `grading`) toward the junction in r and z and
//! toward the axis r = 0, with minimum cell size h²/L per segment so that the
//! corner resolution deepens quadratically under h-refinement.

use crate::analytic::Geometry;
use std::io::Write;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh size h={h} too large, need h < min(d, r_max)/4 = {limit}")]
    StepTooLarge { h: f64, limit: f64 },
    #[error("mesh size must be positive, got {0}")]
    InvalidStep(f64),
    #[error("grading ratio must be >= 1, got {0}")]
    InvalidGrading(f64),
    #[error("window radius a={a} must be below the truncation r_max={r_max}")]
    WindowTooLarge { a: f64, r_max: f64 },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub r: f64,
    pub z: f64,
}

/// Counterclockwise triangle given by node indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub v: [usize; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// r = 0 (essential: ν > 0 forces u = 0 on the axis)
    Axis,
    /// z = 0, r < a (natural Neumann window)
    WindowNeumann,
    /// z = 0, r > a
    BottomDirichlet,
    /// z = d
    TopDirichlet,
    /// r = r_max
    TruncationDirichlet,
}

impl BoundaryTag {
    pub fn is_essential(self) -> bool {
        !matches!(self, BoundaryTag::WindowNeumann)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Axis => "axis",
            BoundaryTag::WindowNeumann => "window_neumann",
            BoundaryTag::BottomDirichlet => "bottom_dirichlet",
            BoundaryTag::TopDirichlet => "top_dirichlet",
            BoundaryTag::TruncationDirichlet => "truncation_dirichlet",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub triangles: Vec<Triangle>,
    pub boundary: Vec<BoundaryEdge>,
    /// Maximum edge length.
    pub h: f64,
    pub geometry: Geometry,
}

/// 1D partition of [0, len] with cell sizes ≤ h, geometrically graded
/// (ratio g) toward the flagged ends down to a floor of h²/len.
fn graded_segment(len: f64, h: f64, g: f64, grade_start: bool, grade_end: bool) -> Vec<f64> {
    assert!(len > 0.0 && h > 0.0 && g >= 1.0);
    let uniform = |n: usize| -> Vec<f64> {
        (0..=n).map(|i| len * i as f64 / n as f64).collect()
    };
    if g <= 1.0 + 1e-12 || (!grade_start && !grade_end) {
        return uniform((len / h).ceil().max(1.0) as usize);
    }
    let h_min = (h * h / len).max(1e-9 * len).min(h);
    let ramp = || -> Vec<f64> {
        let mut sizes = Vec::new();
        let mut s = h_min;
        while s < h * (1.0 - 1e-12) {
            sizes.push(s);
            s *= g;
        }
        sizes
    };
    let start: Vec<f64> = if grade_start { ramp() } else { Vec::new() };
    let end: Vec<f64> = if grade_end { ramp() } else { Vec::new() };
    let s_start: f64 = start.iter().sum();
    let s_end: f64 = end.iter().sum();

    let mut sizes = Vec::new();
    sizes.extend(&start);
    if s_start + s_end < len {
        let n_mid = ((len - s_start - s_end) / h).ceil().max(1.0) as usize;
        sizes.extend(std::iter::repeat(h).take(n_mid));
    }
    sizes.extend(end.iter().rev());

    // Scale so the partition lands exactly on len.
    let total: f64 = sizes.iter().sum();
    let scale = len / total;
    let mut pos = Vec::with_capacity(sizes.len() + 1);
    pos.push(0.0);
    let mut acc = 0.0;
    for s in &sizes {
        acc += s * scale;
        pos.push(acc);
    }
    *pos.last_mut().unwrap() = len;
    pos
}

fn structured_mesh(
    r_lines: Vec<f64>,
    z_lines: Vec<f64>,
    geometry: Geometry,
    window_radius: f64,
) -> Mesh {
    let nr = r_lines.len();
    let nz = z_lines.len();
    // z-fastest ordering keeps the matrix bandwidth at ~nz
    let id = |ir: usize, iz: usize| ir * nz + iz;
    let mut nodes = Vec::with_capacity(nr * nz);
    for &r in &r_lines {
        for &z in &z_lines {
            nodes.push(Node { r, z });
        }
    }
    let mut triangles = Vec::with_capacity(2 * (nr - 1) * (nz - 1));
    for ir in 0..nr - 1 {
        for iz in 0..nz - 1 {
            let n00 = id(ir, iz);
            let n10 = id(ir + 1, iz);
            let n11 = id(ir + 1, iz + 1);
            let n01 = id(ir, iz + 1);
            triangles.push(Triangle { v: [n00, n10, n11] });
            triangles.push(Triangle { v: [n00, n11, n01] });
        }
    }
    let mut boundary = Vec::new();
    let tol = 1e-12 * geometry.r_max.max(geometry.d);
    for ir in 0..nr - 1 {
        let rm = 0.5 * (r_lines[ir] + r_lines[ir + 1]);
        let bottom_tag = if rm < window_radius - tol {
            BoundaryTag::WindowNeumann
        } else {
            BoundaryTag::BottomDirichlet
        };
        boundary.push(BoundaryEdge {
            a: id(ir, 0),
            b: id(ir + 1, 0),
            tag: bottom_tag,
        });
        boundary.push(BoundaryEdge {
            a: id(ir, nz - 1),
            b: id(ir + 1, nz - 1),
            tag: BoundaryTag::TopDirichlet,
        });
    }
    for iz in 0..nz - 1 {
        boundary.push(BoundaryEdge {
            a: id(0, iz),
            b: id(0, iz + 1),
            tag: BoundaryTag::Axis,
        });
        boundary.push(BoundaryEdge {
            a: id(nr - 1, iz),
            b: id(nr - 1, iz + 1),
            tag: BoundaryTag::TruncationDirichlet,
        });
    }
    let h = max_edge(&nodes, &triangles);
    Mesh {
        nodes,
        triangles,
        boundary,
        h,
        geometry,
    }
}

fn max_edge(nodes: &[Node], triangles: &[Triangle]) -> f64 {
    let mut h: f64 = 0.0;
    for t in triangles {
        for k in 0..3 {
            let a = nodes[t.v[k]];
            let b = nodes[t.v[(k + 1) % 3]];
            h = h.max(((a.r - b.r).powi(2) + (a.z - b.z).powi(2)).sqrt());
        }
    }
    h
}

/// Waveguide mesh of [0, r_max] × [0, d] with the Neumann window [0, a) on
/// the bottom; requires a < r_max.
pub fn build_mesh(geometry: &Geometry, h: f64, grading: f64) -> Result<Mesh, MeshError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(MeshError::InvalidStep(h));
    }
    if grading < 1.0 {
        return Err(MeshError::InvalidGrading(grading));
    }
    let limit = geometry.d.min(geometry.r_max) / 4.0;
    if h >= limit {
        return Err(MeshError::StepTooLarge { h, limit });
    }
    if geometry.a > 0.0 && geometry.a >= geometry.r_max {
        return Err(MeshError::WindowTooLarge {
            a: geometry.a,
            r_max: geometry.r_max,
        });
    }
    let a = geometry.a;
    let r_lines = if a > 0.0 {
        // [0, a] graded toward both the axis and the junction, [a, r_max]
        // graded toward the junction; a is a mesh line by construction.
        let mut left = graded_segment(a, h, grading, true, true);
        let right = graded_segment(geometry.r_max - a, h, grading, true, false);
        left.extend(right.iter().skip(1).map(|x| a + x));
        *left.last_mut().unwrap() = geometry.r_max;
        left
    } else {
        graded_segment(geometry.r_max, h, grading, true, false)
    };
    let z_lines = graded_segment(geometry.d, h, grading, true, false);
    Ok(structured_mesh(r_lines, z_lines, *geometry, a))
}

/// Interior-cylinder benchmark mesh of [0, a] × [0, d]: the whole bottom is
/// the Neumann window and the wall r = a carries the Dirichlet condition
/// (tagged TruncationDirichlet).
pub fn build_interior_mesh(d: f64, a: f64, h: f64, grading: f64) -> Result<Mesh, MeshError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(MeshError::InvalidStep(h));
    }
    if grading < 1.0 {
        return Err(MeshError::InvalidGrading(grading));
    }
    let limit = d.min(a) / 4.0;
    if h >= limit {
        return Err(MeshError::StepTooLarge { h, limit });
    }
    let geometry = Geometry::new(d, a, a).expect("valid benchmark geometry");
    let r_lines = graded_segment(a, h, grading, true, false);
    let z_lines = graded_segment(d, h, grading, true, false);
    // window_radius beyond the wall: the entire bottom is Neumann
    Ok(structured_mesh(r_lines, z_lines, geometry, 2.0 * a))
}

/// Uniform red refinement: each triangle splits into 4 similar children,
/// boundary edges split in two with inherited tags, h halves.
pub fn refine(mesh: &Mesh) -> Mesh {
    use std::collections::BTreeMap;
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Node>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let na = nodes[a];
            let nb = nodes[b];
            nodes.push(Node {
                r: 0.5 * (na.r + nb.r),
                z: 0.5 * (na.z + nb.z),
            });
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for t in &mesh.triangles {
        let [a, b, c] = t.v;
        let ab = midpoint(a, b, &mut nodes);
        let bc = midpoint(b, c, &mut nodes);
        let ca = midpoint(c, a, &mut nodes);
        triangles.push(Triangle { v: [a, ab, ca] });
        triangles.push(Triangle { v: [ab, b, bc] });
        triangles.push(Triangle { v: [ca, bc, c] });
        triangles.push(Triangle { v: [ab, bc, ca] });
    }
    let mut boundary = Vec::with_capacity(2 * mesh.boundary.len());
    for e in &mesh.boundary {
        let m = midpoint(e.a, e.b, &mut nodes);
        boundary.push(BoundaryEdge {
            a: e.a,
            b: m,
            tag: e.tag,
        });
        boundary.push(BoundaryEdge {
            a: m,
            b: e.b,
            tag: e.tag,
        });
    }
    let h = max_edge(&nodes, &triangles);
    Mesh {
        nodes,
        triangles,
        boundary,
        h,
        geometry: mesh.geometry,
    }
}

impl Mesh {
    pub fn signed_area(&self, t: &Triangle) -> f64 {
        let [a, b, c] = t.v;
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb.r - pa.r) * (pc.z - pa.z) - (pc.r - pa.r) * (pb.z - pa.z))
    }

    /// Index of the node at the junction (a, 0), if the window is open.
    pub fn junction_node(&self) -> Option<usize> {
        if self.geometry.a <= 0.0 {
            return None;
        }
        let tol = 1e-14 * self.geometry.r_max;
        self.nodes
            .iter()
            .position(|n| (n.r - self.geometry.a).abs() <= tol && n.z.abs() <= tol)
    }

    /// Plain-text export: "nodes N triangles T", node/triangle/boundary lines.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<(), MeshError> {
        let io = |e: std::io::Error| MeshError::Io(e.to_string());
        writeln!(
            w,
            "nodes {} triangles {}",
            self.nodes.len(),
            self.triangles.len()
        )
        .map_err(io)?;
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(w, "{} {:.17e} {:.17e}", i, n.r, n.z).map_err(io)?;
        }
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{} {} {} {}", i, t.v[0], t.v[1], t.v[2]).map_err(io)?;
        }
        for e in &self.boundary {
            writeln!(w, "{} {} {}", e.a, e.b, e.tag.name()).map_err(io)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::collections::HashMap;

    fn geom(d: f64, a: f64, r_max: f64) -> Geometry {
        Geometry::new(d, a, r_max).unwrap()
    }

    /// Interior edges shared by exactly 2 triangles, boundary edges by 1,
    /// and the boundary edge list covers exactly the 1-triangle edges.
    fn check_conformity(mesh: &Mesh) {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let a = t.v[k];
                let b = t.v[(k + 1) % 3];
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut boundary_edges = 0;
        for (_, c) in counts.iter() {
            assert!(*c == 1 || *c == 2, "edge shared by {c} triangles");
            if *c == 1 {
                boundary_edges += 1;
            }
        }
        assert_eq!(boundary_edges, mesh.boundary.len());
        for e in &mesh.boundary {
            let key = (e.a.min(e.b), e.a.max(e.b));
            assert_eq!(counts.get(&key), Some(&1), "tagged edge not on boundary");
        }
    }

    #[test]
    fn uniform_counts_and_tags() {
        let g = geom(1.0, 0.5, 2.0);
        let mesh = build_mesh(&g, 0.24, 1.0).unwrap();
        // uniform: [0,0.5] -> 3 cells, [0.5,2] -> 7 cells, [0,1] -> 5 cells
        let nr = 3 + 7 + 1;
        let nz = 5 + 1;
        assert_eq!(mesh.nodes.len(), nr * nz);
        assert_eq!(mesh.triangles.len(), 2 * (nr - 1) * (nz - 1));
        check_conformity(&mesh);
        let mut tags: HashMap<BoundaryTag, usize> = HashMap::new();
        for e in &mesh.boundary {
            *tags.entry(e.tag).or_insert(0) += 1;
        }
        for tag in [
            BoundaryTag::Axis,
            BoundaryTag::WindowNeumann,
            BoundaryTag::BottomDirichlet,
            BoundaryTag::TopDirichlet,
            BoundaryTag::TruncationDirichlet,
        ] {
            assert!(tags.contains_key(&tag), "missing {tag:?}");
        }
    }

    #[test]
    fn boundary_length_is_rectangle_perimeter() {
        let g = geom(1.0, 0.5, 2.0);
        for grading in [1.0, 1.15, 1.5] {
            let mesh = build_mesh(&g, 0.2, grading).unwrap();
            let total: f64 = mesh
                .boundary
                .iter()
                .map(|e| {
                    let a = mesh.nodes[e.a];
                    let b = mesh.nodes[e.b];
                    ((a.r - b.r).powi(2) + (a.z - b.z).powi(2)).sqrt()
                })
                .sum();
            assert_abs_diff_eq!(total, 2.0 * 2.0 + 2.0 * 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn window_edges_lie_inside_the_window() {
        let g = geom(1.0, 0.7, 3.0);
        let mesh = build_mesh(&g, 0.11, 1.2).unwrap();
        for e in &mesh.boundary {
            if e.tag == BoundaryTag::WindowNeumann {
                let (a, b) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                assert_eq!(a.z, 0.0);
                assert_eq!(b.z, 0.0);
                assert!(a.r <= g.a + 1e-12 && b.r <= g.a + 1e-12);
            }
        }
    }

    #[test]
    fn junction_node_exists_exactly() {
        let g = geom(1.0, 0.7, 3.0);
        let mesh = build_mesh(&g, 0.1, 1.15).unwrap();
        let j = mesh.junction_node().unwrap();
        assert_eq!(mesh.nodes[j].r, 0.7);
        assert_eq!(mesh.nodes[j].z, 0.0);
        let fine = refine(&mesh);
        let jf = fine.junction_node().unwrap();
        assert_eq!(fine.nodes[jf].r, 0.7);
    }

    #[test]
    fn positive_orientation_and_shape_regularity() {
        let g = geom(1.0, 0.5, 2.0);
        let mut mesh = build_mesh(&g, 0.2, 1.3).unwrap();
        for _ in 0..3 {
            let mut min_angle: f64 = f64::INFINITY;
            for t in &mesh.triangles {
                assert!(mesh.signed_area(t) > 0.0);
                let [a, b, c] = t.v;
                let p = [mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]];
                for k in 0..3 {
                    let u = (
                        p[(k + 1) % 3].r - p[k].r,
                        p[(k + 1) % 3].z - p[k].z,
                    );
                    let v = (
                        p[(k + 2) % 3].r - p[k].r,
                        p[(k + 2) % 3].z - p[k].z,
                    );
                    let dot = u.0 * v.0 + u.1 * v.1;
                    let cr = (u.0 * v.1 - u.1 * v.0).abs();
                    min_angle = min_angle.min(cr.atan2(dot));
                }
            }
            // right-triangle families keep a uniform angle floor
            assert!(min_angle > 0.05, "min angle {min_angle}");
            mesh = refine(&mesh);
        }
    }

    #[test]
    fn refinement_quadruples_triangles() {
        let g = geom(1.0, 0.5, 2.0);
        let mesh = build_mesh(&g, 0.2, 1.15).unwrap();
        let fine = refine(&mesh);
        assert_eq!(fine.triangles.len(), 4 * mesh.triangles.len());
        assert_eq!(fine.boundary.len(), 2 * mesh.boundary.len());
        assert_abs_diff_eq!(fine.h, mesh.h / 2.0, epsilon = 1e-12);
        check_conformity(&fine);
        check_conformity(&refine(&fine));
    }

    #[test]
    fn halving_h_roughly_quadruples_uniform_triangles() {
        let g = geom(1.0, 0.5, 2.0);
        // sizes dividing every segment exactly, so no ceiling effects
        let coarse = build_mesh(&g, 0.125, 1.0).unwrap();
        let fine = build_mesh(&g, 0.0625, 1.0).unwrap();
        assert_eq!(fine.triangles.len(), 4 * coarse.triangles.len());
    }

    #[test]
    fn interior_mesh_tags() {
        let mesh = build_interior_mesh(std::f64::consts::PI, 1.0, 0.2, 1.15).unwrap();
        check_conformity(&mesh);
        assert!(mesh
            .boundary
            .iter()
            .all(|e| e.tag != BoundaryTag::BottomDirichlet));
        assert!(mesh
            .boundary
            .iter()
            .any(|e| e.tag == BoundaryTag::WindowNeumann));
        assert!(mesh
            .boundary
            .iter()
            .any(|e| e.tag == BoundaryTag::TruncationDirichlet));
    }

    #[test]
    fn parameter_errors() {
        let g = geom(1.0, 0.5, 2.0);
        assert!(matches!(
            build_mesh(&g, 0.3, 1.0),
            Err(MeshError::StepTooLarge { .. })
        ));
        assert!(build_mesh(&g, -0.1, 1.0).is_err());
        assert!(build_mesh(&g, 0.1, 0.5).is_err());
        let bad = Geometry::new(1.0, 2.0, 2.0).unwrap();
        assert!(matches!(
            build_mesh(&bad, 0.1, 1.0),
            Err(MeshError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn text_export_roundtrips_header() {
        let g = geom(1.0, 0.5, 2.0);
        let mesh = build_mesh(&g, 0.2, 1.0).unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            format!("nodes {} triangles {}", mesh.nodes.len(), mesh.triangles.len())
        );
    }
}
