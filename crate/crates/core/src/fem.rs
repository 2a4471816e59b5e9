//! Per-mode axisymmetric P1 assembly of the weighted stiffness and mass
//! matrices
//!
//!   a_ν(u, v) = ∫∫ (∂_r u ∂_r v + ∂_z u ∂_z v) r + (ν²/r) u v  dr dz,
//!   m(u, v)   = ∫∫ u v r dr dz,
//!
//! the exact real reduction of the complex 3D Aharonov-Bohm form to the
//! angular mode with effective order ν. Essential (Dirichlet) nodes are
//! eliminated by dof removal.

use crate::analytic::FluxMode;
use crate::mesh::{Mesh, Node};
use std::io::Write;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FemError {
    #[error("degenerate triangle (area {0})")]
    DegenerateTriangle(f64),
    #[error("quadrature point with r <= 0 (triangle touching the axis degenerately)")]
    AxisQuadrature,
    #[error("no free degrees of freedom after eliminating essential boundaries")]
    NoFreeDofs,
    #[error("io error: {0}")]
    Io(String),
}

/// Symmetric sparse matrix in CSR with the full (both triangles) pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Build from (row, col, value) triplets; duplicates are summed. Only
    /// entries with row ≤ col need to be supplied when `mirror` is set.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                last = Some((r, c));
            }
            row_ptr[r + 1] = vals.len();
        }
        for r in 0..n {
            if row_ptr[r + 1] < row_ptr[r] {
                row_ptr[r + 1] = row_ptr[r];
            }
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Entrywise A + s·B on the union pattern.
    pub fn add_scaled(&self, other: &SparseSym, s: f64) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((r, *c, *v));
            }
            let (cols, vals) = other.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((r, *c, s * *v));
            }
        }
        SparseSym::from_triplets(self.n, triplets)
    }

    /// Maximum asymmetry |A − Aᵀ| over the stored pattern.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let (tc, tv) = self.row(*c);
                let mirrored = tc
                    .iter()
                    .position(|&cc| cc == r)
                    .map(|p| tv[p])
                    .unwrap_or(0.0);
                worst = worst.max((v - mirrored).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c)] = *v;
            }
        }
        m
    }

    /// Coordinate-format text export (row col value, 17 significant digits).
    pub fn write_coo<W: Write>(&self, w: &mut W) -> Result<(), FemError> {
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.17e}", r, c, v).map_err(|e| FemError::Io(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Node id → free dof index, with essential nodes constrained.
#[derive(Clone, Debug)]
pub struct DofMap {
    node_to_dof: Vec<Option<usize>>,
    pub n_free: usize,
}

impl DofMap {
    /// Constrain every node incident to an essential boundary edge.
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut constrained = vec![false; mesh.nodes.len()];
        for e in &mesh.boundary {
            if e.tag.is_essential() {
                constrained[e.a] = true;
                constrained[e.b] = true;
            }
        }
        Self::from_constrained(&constrained)
    }

    /// All nodes free (unconstrained assembly variant).
    pub fn all_free(n_nodes: usize) -> Self {
        Self::from_constrained(&vec![false; n_nodes])
    }

    fn from_constrained(constrained: &[bool]) -> Self {
        let mut node_to_dof = Vec::with_capacity(constrained.len());
        let mut next = 0usize;
        for &c in constrained {
            if c {
                node_to_dof.push(None);
            } else {
                node_to_dof.push(Some(next));
                next += 1;
            }
        }
        Self {
            node_to_dof,
            n_free: next,
        }
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.node_to_dof[node]
    }

    /// Scatter a free-dof vector back to all nodes (zeros on constrained).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.node_to_dof
            .iter()
            .map(|d| d.map(|i| x[i]).unwrap_or(0.0))
            .collect()
    }
}

/// Strictly-interior quadrature rule exact for degree 2: the three
/// permutations of barycentric (2/3, 1/6, 1/6), each with weight area/3.
const QUAD_BARY: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Local 3×3 stiffness and mass for one triangle.
///
/// The stiffness splits as gradient + potential; both pieces are PSD because
/// every quadrature point has r > 0 and positive weight.
pub fn element_matrices(v: &[Node; 3], nu: f64) -> Result<([[f64; 3]; 3], [[f64; 3]; 3]), FemError> {
    let (grad, pot, mass) = element_parts(v, nu)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = grad[i][j] + pot[i][j];
        }
    }
    Ok((k, mass))
}

fn element_parts(
    v: &[Node; 3],
    nu: f64,
) -> Result<([[f64; 3]; 3], [[f64; 3]; 3], [[f64; 3]; 3]), FemError> {
    let area2 = (v[1].r - v[0].r) * (v[2].z - v[0].z) - (v[2].r - v[0].r) * (v[1].z - v[0].z);
    if area2 <= 0.0 {
        return Err(FemError::DegenerateTriangle(0.5 * area2));
    }
    let area = 0.5 * area2;
    // constant P1 gradients: ∇φ_i = (b_i, c_i)/(2A)
    let b = [
        v[1].z - v[2].z,
        v[2].z - v[0].z,
        v[0].z - v[1].z,
    ];
    let c = [
        v[2].r - v[1].r,
        v[0].r - v[2].r,
        v[1].r - v[0].r,
    ];
    let w = area / 3.0;
    let nu2 = nu * nu;
    let mut grad = [[0.0; 3]; 3];
    let mut pot = [[0.0; 3]; 3];
    let mut mass = [[0.0; 3]; 3];
    for q in &QUAD_BARY {
        let rq = q[0] * v[0].r + q[1] * v[1].r + q[2] * v[2].r;
        if rq <= 0.0 {
            return Err(FemError::AxisQuadrature);
        }
        for i in 0..3 {
            for j in 0..3 {
                grad[i][j] += w * rq * (b[i] * b[j] + c[i] * c[j]) / (area2 * area2);
                pot[i][j] += w * nu2 * q[i] * q[j] / rq;
                mass[i][j] += w * rq * q[i] * q[j];
            }
        }
    }
    Ok((grad, pot, mass))
}

/// Assembled pencil split for invariant checking: stiffness = grad + pot.
pub struct AssemblyParts {
    pub grad: SparseSym,
    pub pot: SparseSym,
    pub mass: SparseSym,
    pub dofmap: DofMap,
}

/// Assemble the global matrices on the free dofs of `dofmap`.
///
/// Elements are visited in mesh order and triplets reduced by a stable sort,
/// so the result is bit-reproducible for a fixed mesh.
pub fn assemble_with_dofmap(
    mesh: &Mesh,
    nu: f64,
    dofmap: DofMap,
) -> Result<AssemblyParts, FemError> {
    if dofmap.n_free == 0 {
        return Err(FemError::NoFreeDofs);
    }
    let n = dofmap.n_free;
    let mut tg = Vec::new();
    let mut tp = Vec::new();
    let mut tm = Vec::new();
    for t in &mesh.triangles {
        let verts = [
            mesh.nodes[t.v[0]],
            mesh.nodes[t.v[1]],
            mesh.nodes[t.v[2]],
        ];
        let (grad, pot, mass) = element_parts(&verts, nu)?;
        for i in 0..3 {
            let Some(di) = dofmap.dof(t.v[i]) else { continue };
            for j in 0..3 {
                let Some(dj) = dofmap.dof(t.v[j]) else { continue };
                tg.push((di, dj, grad[i][j]));
                tp.push((di, dj, pot[i][j]));
                tm.push((di, dj, mass[i][j]));
            }
        }
    }
    Ok(AssemblyParts {
        grad: SparseSym::from_triplets(n, tg),
        pot: SparseSym::from_triplets(n, tp),
        mass: SparseSym::from_triplets(n, tm),
        dofmap,
    })
}

/// Assemble (A, M, dofmap) for the given flux mode with essential boundary
/// nodes eliminated.
pub fn assemble(mesh: &Mesh, mode: &FluxMode) -> Result<(SparseSym, SparseSym, DofMap), FemError> {
    assemble_nu(mesh, mode.nu())
}

/// Assembly by effective order directly (the benchmark path).
pub fn assemble_nu(mesh: &Mesh, nu: f64) -> Result<(SparseSym, SparseSym, DofMap), FemError> {
    let parts = assemble_with_dofmap(mesh, nu, DofMap::from_mesh(mesh))?;
    let a = parts.grad.add_scaled(&parts.pot, 1.0);
    Ok((a, parts.mass, parts.dofmap))
}
