//! Orchestration layer: per-mode FEM solves, mode merging, convergence
//! control, bracket validation against the analytic machinery, and sweep
//! studies over the window radius and the flux.

use crate::analytic::{
    self, bracket, classify, essential_threshold, lower_threshold, Classification, CurveVariant,
    FluxMode, Geometry, OrderConvention, WallCondition,
};
use crate::eigen::{self, EigenPair};
use crate::fem;
use crate::mesh::{self, Mesh};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error(transparent)]
    Bessel(#[from] crate::bessel::BesselError),
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    Fem(#[from] fem::FemError),
    #[error(transparent)]
    Eigen(#[from] eigen::EigenError),
    #[error("sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("sweep range is empty or reversed: [{0}, {1}]")]
    BadRange(f64, f64),
    #[error("convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(u32),
}

/// Discretization and solver controls shared by all studies.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolveParams {
    /// Target mesh size of the coarsest level.
    pub h: f64,
    /// Geometric grading ratio toward the axis, the window junction and the
    /// bottom face.
    pub grading: f64,
    /// Number of uniform refinements beyond the coarsest level.
    pub levels: u32,
    /// Relative eigensolver residual tolerance.
    pub tol: f64,
    /// Threshold margin: only eigenvalues below (1 − δ)(π/d)² are reported.
    pub delta: f64,
    /// Seed for the eigensolver's starting block.
    pub seed: u64,
    /// When set, re-solve at 1.5·r_max and mark eigenvalues whose relative
    /// change stays below 1e-4 as truncation-stable.
    pub rmax_check: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            h: 0.25,
            grading: 1.15,
            levels: 2,
            tol: 1e-8,
            delta: 0.02,
            seed: 0,
            rmax_check: false,
        }
    }
}

const RMAX_STABLE_REL: f64 = 1e-4;

/// Result of one per-mode solve across refinement levels.
#[derive(Clone, Debug, Serialize)]
pub struct ModeResult {
    pub m: i32,
    pub nu: f64,
    /// Mesh size per level, coarsest first.
    pub h_sequence: Vec<f64>,
    /// Eigenvalues below the report limit per level, ascending.
    pub values_by_level: Vec<Vec<f64>>,
    /// Finest-level eigenvalues.
    pub values: Vec<f64>,
    /// Richardson extrapolation from the last two levels, where defined.
    pub extrapolated: Vec<Option<f64>>,
    /// Observed convergence order per eigenvalue from the last level triplet.
    pub observed_order: Vec<Option<f64>>,
    /// Finest-level eigenfunctions expanded to mesh nodes.
    #[serde(skip)]
    pub fields: Vec<Vec<f64>>,
    /// Finest-level mesh (for field export).
    #[serde(skip)]
    pub mesh: Option<Mesh>,
}

/// Richardson extrapolation and observed order for one eigenvalue trace over
/// refinement levels. Returns (extrapolated, order).
fn extrapolate(trace: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = trace.len();
    let order = if n >= 3 {
        let d1 = trace[n - 2] - trace[n - 3];
        let d2 = trace[n - 1] - trace[n - 2];
        if d2 != 0.0 && (d1 / d2) > 1.0 {
            Some((d1 / d2).log2())
        } else {
            None
        }
    } else {
        None
    };
    let extrap = if n >= 2 {
        // assume second order unless a credible observed order is available
        let p = order.filter(|p| (0.5..=4.0).contains(p)).unwrap_or(2.0);
        let fac = 2f64.powf(p) - 1.0;
        Some(trace[n - 1] + (trace[n - 1] - trace[n - 2]) / fac)
    } else {
        None
    };
    (extrap, order)
}

fn solve_on_mesh(
    mesh: &Mesh,
    nu: f64,
    limit: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<EigenPair>, SpectrumError> {
    let (a, m, dofmap) = fem::assemble_nu(mesh, nu)?;
    let pairs = eigen::eigs_below(&a, &m, limit, tol, seed)?;
    Ok(pairs
        .into_iter()
        .map(|p| EigenPair {
            value: p.value,
            vector: dofmap.expand(&p.vector),
        })
        .collect())
}

fn mode_result_from_meshes(
    meshes: &[Mesh],
    mode: &FluxMode,
    limit: f64,
    tol: f64,
    seed: u64,
) -> Result<ModeResult, SpectrumError> {
    let mut values_by_level = Vec::new();
    let mut h_sequence = Vec::new();
    let mut final_pairs: Vec<EigenPair> = Vec::new();
    for (i, mesh) in meshes.iter().enumerate() {
        let pairs = solve_on_mesh(mesh, mode.nu(), limit, tol, seed)?;
        h_sequence.push(mesh.h);
        values_by_level.push(pairs.iter().map(|p| p.value).collect());
        if i + 1 == meshes.len() {
            final_pairs = pairs;
        }
    }
    let values: Vec<f64> = values_by_level.last().cloned().unwrap_or_default();
    let mut extrapolated = Vec::new();
    let mut observed_order = Vec::new();
    for k in 0..values.len() {
        // use only the levels where the k-th eigenvalue exists
        let trace: Vec<f64> = values_by_level
            .iter()
            .filter_map(|lvl| lvl.get(k).copied())
            .collect();
        let (e, o) = extrapolate(&trace);
        extrapolated.push(e);
        observed_order.push(o);
    }
    Ok(ModeResult {
        m: mode.m(),
        nu: mode.nu(),
        h_sequence,
        values_by_level,
        values,
        extrapolated,
        observed_order,
        fields: final_pairs.into_iter().map(|p| p.vector).collect(),
        mesh: meshes.last().cloned(),
    })
}

fn refinement_ladder(base: Mesh, levels: u32) -> Vec<Mesh> {
    let mut meshes = vec![base];
    for _ in 0..levels {
        let next = mesh::refine(meshes.last().unwrap());
        meshes.push(next);
    }
    meshes
}

/// Solve one angular mode: build the graded mesh, run `levels` uniform
/// refinements, and report per-level eigenvalues below (1 − δ)(π/d)² with
/// Richardson extrapolation.
pub fn solve_mode(
    geometry: &Geometry,
    alpha: f64,
    m: i32,
    params: &SolveParams,
) -> Result<ModeResult, SpectrumError> {
    let mode = FluxMode::new(alpha, m)?;
    let limit = (1.0 - params.delta) * essential_threshold(geometry);
    let meshes = refinement_ladder(mesh::build_mesh(geometry, params.h, params.grading)?, params.levels);
    mode_result_from_meshes(&meshes, &mode, limit, params.tol, params.seed)
}

/// One entry of the merged spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct MergedValue {
    pub value: f64,
    pub extrapolated: Option<f64>,
    pub m: i32,
    pub nu: f64,
    /// Analytic two-sided bracket for this eigenvalue index.
    pub bracket: Option<(f64, f64)>,
    /// Set when the r_max stability check ran: true if the value moved by
    /// less than 1e-4 relative under r_max → 1.5 r_max.
    pub rmax_stable: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub geometry: Geometry,
    pub alpha: f64,
    pub mode_range: Vec<i32>,
    pub delta: f64,
    pub essential_threshold: f64,
    pub lower_threshold: f64,
    /// Reporting cutoff (1 − δ)(π/d)².
    pub report_limit: f64,
    pub classification: Classification,
    pub eigenvalues: Vec<MergedValue>,
    pub modes: Vec<ModeResult>,
    /// Human-readable descriptions of any bracket violations beyond the
    /// diagnostic tolerance. Nonempty output is a hard failure for callers.
    pub bracket_violations: Vec<String>,
}

/// Diagnostic slack for bracket containment checks, absorbing discretization
/// error at default resolutions.
pub const BRACKET_SLACK: f64 = 1e-2;

/// Solve all modes in `mode_range`, merge the spectra, attach analytic
/// brackets and classification, and flag bracket violations.
pub fn solve_full(
    geometry: &Geometry,
    alpha: f64,
    mode_range: &[i32],
    params: &SolveParams,
) -> Result<SpectrumResult, SpectrumError> {
    let modes: Vec<ModeResult> = mode_range
        .par_iter()
        .map(|&m| solve_mode(geometry, alpha, m, params))
        .collect::<Result<_, _>>()?;

    let stable_values: Option<Vec<Vec<f64>>> = if params.rmax_check {
        let wide = Geometry::new(geometry.d, geometry.a, 1.5 * geometry.r_max)?;
        let wide_modes: Vec<Vec<f64>> = mode_range
            .par_iter()
            .map(|&m| solve_mode(&wide, alpha, m, params).map(|r| r.values))
            .collect::<Result<_, _>>()?;
        Some(wide_modes)
    } else {
        None
    };

    // merge sorted by value, then mode for determinism
    let mut merged: Vec<MergedValue> = Vec::new();
    for (i, mr) in modes.iter().enumerate() {
        for (k, &v) in mr.values.iter().enumerate() {
            let rmax_stable = stable_values.as_ref().map(|w| {
                w[i].get(k)
                    .map(|&wv| (wv - v).abs() <= RMAX_STABLE_REL * v.abs().max(1.0))
                    .unwrap_or(false)
            });
            merged.push(MergedValue {
                value: v,
                extrapolated: mr.extrapolated.get(k).copied().flatten(),
                m: mr.m,
                nu: mr.nu,
                bracket: None,
                rmax_stable,
            });
        }
    }
    merged.sort_by(|x, y| {
        x.value
            .partial_cmp(&y.value)
            .unwrap()
            .then(x.m.cmp(&y.m))
    });

    let ess = essential_threshold(geometry);
    let mut violations = Vec::new();
    for (k, mv) in merged.iter_mut().enumerate() {
        let (lo, hi) = bracket(k + 1, geometry, alpha, mode_range)?;
        mv.bracket = Some((lo, hi));
        if mv.value < lo - BRACKET_SLACK {
            violations.push(format!(
                "eigenvalue {} = {:.12} below Neumann bracket {:.12} (mode m={})",
                k + 1,
                mv.value,
                lo,
                mv.m
            ));
        }
        if hi < ess && mv.value > hi + BRACKET_SLACK {
            violations.push(format!(
                "eigenvalue {} = {:.12} above Dirichlet bracket {:.12} (mode m={})",
                k + 1,
                mv.value,
                hi,
                mv.m
            ));
        }
    }

    Ok(SpectrumResult {
        geometry: *geometry,
        alpha,
        mode_range: mode_range.to_vec(),
        delta: params.delta,
        essential_threshold: ess,
        lower_threshold: lower_threshold(geometry),
        report_limit: (1.0 - params.delta) * ess,
        classification: classify(geometry, alpha, CurveVariant::Sharp)?,
        eigenvalues: merged,
        modes,
        bracket_violations: violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepKind {
    Radius,
    Flux,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCurve {
    /// Swept parameter: "a" or "alpha".
    pub parameter: String,
    /// Strictly increasing sample points.
    pub samples: Vec<f64>,
    /// Merged eigenvalues per sample (radius sweeps; empty for flux sweeps).
    pub eigenvalues: Vec<Vec<f64>>,
    pub classifications: Vec<Classification>,
    /// First window radius at which the spectrum becomes nonempty, located
    /// by bisection to 1e-3·d (radius sweeps only).
    pub emergence: Option<f64>,
    /// Named analytic curves (flux sweeps: a0/a1, sharp and conservative).
    pub curves: BTreeMap<String, Vec<f64>>,
}

fn count_below(
    geometry: &Geometry,
    alpha: f64,
    mode_range: &[i32],
    params: &SolveParams,
) -> Result<usize, SpectrumError> {
    let limit = (1.0 - params.delta) * essential_threshold(geometry);
    let mut count = 0usize;
    for &m in mode_range {
        let mode = FluxMode::new(alpha, m)?;
        let mesh = refinement_ladder(
            mesh::build_mesh(geometry, params.h, params.grading)?,
            params.levels,
        )
        .pop()
        .unwrap();
        let (a, mm, _) = fem::assemble_nu(&mesh, mode.nu())?;
        count += eigen::inertia_below(&a, &mm, limit)?;
    }
    Ok(count)
}

/// Radius sweep: solve over `steps` window radii in `[a_min, a_max]`, record
/// eigenvalue trajectories, and locate the emergence radius when the count
/// changes from zero to positive between adjacent samples.
pub fn sweep_radius(
    d: f64,
    r_max: f64,
    a_min: f64,
    a_max: f64,
    steps: usize,
    alpha: f64,
    mode_range: &[i32],
    params: &SolveParams,
) -> Result<SweepCurve, SpectrumError> {
    if steps < 2 {
        return Err(SpectrumError::TooFewSteps(steps));
    }
    if !(a_min < a_max) {
        return Err(SpectrumError::BadRange(a_min, a_max));
    }
    let samples: Vec<f64> = (0..steps)
        .map(|i| a_min + (a_max - a_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let results: Vec<SpectrumResult> = samples
        .par_iter()
        .map(|&a| {
            let g = Geometry::new(d, a, r_max)?;
            solve_full(&g, alpha, mode_range, params)
        })
        .collect::<Result<_, _>>()?;

    let mut emergence = None;
    for w in results.windows(2).zip(samples.windows(2)) {
        let ((r0, r1), (a0, a1)) = ((&w.0[0], &w.0[1]), (w.1[0], w.1[1]));
        if r0.eigenvalues.is_empty() && !r1.eigenvalues.is_empty() {
            // bisect the count sign change to 1e-3 d
            let mut lo = a0;
            let mut hi = a1;
            while hi - lo > 1e-3 * d {
                let mid = 0.5 * (lo + hi);
                let g = Geometry::new(d, mid, r_max)?;
                if count_below(&g, alpha, mode_range, params)? > 0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            emergence = Some(0.5 * (lo + hi));
            break;
        }
    }

    Ok(SweepCurve {
        parameter: "a".to_string(),
        samples,
        eigenvalues: results
            .iter()
            .map(|r| r.eigenvalues.iter().map(|m| m.value).collect())
            .collect(),
        classifications: results.iter().map(|r| r.classification).collect(),
        emergence,
        curves: BTreeMap::new(),
    })
}

/// Flux sweep: sample the critical-radius curves a₀(α), a₁(α) in both the
/// sharp and conservative variants over `steps` points of `[alpha_min,
/// alpha_max]`.
pub fn sweep_flux(
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    convention: OrderConvention,
) -> Result<SweepCurve, SpectrumError> {
    if steps < 2 {
        return Err(SpectrumError::TooFewSteps(steps));
    }
    if !(alpha_min < alpha_max) {
        return Err(SpectrumError::BadRange(alpha_min, alpha_max));
    }
    let samples: Vec<f64> = (0..steps)
        .map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let mut curves: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for key in ["a0_sharp", "a1_sharp", "a0_conservative", "a1_conservative"] {
        curves.insert(key.to_string(), Vec::with_capacity(steps));
    }
    for &al in &samples {
        curves.get_mut("a0_sharp").unwrap().push(
            analytic::critical_radius_a0(al, CurveVariant::Sharp, convention)?,
        );
        curves.get_mut("a1_sharp").unwrap().push(
            analytic::critical_radius_a1(al, CurveVariant::Sharp, convention)?,
        );
        curves.get_mut("a0_conservative").unwrap().push(
            analytic::critical_radius_a0(al, CurveVariant::Conservative, convention)?,
        );
        curves.get_mut("a1_conservative").unwrap().push(
            analytic::critical_radius_a1(al, CurveVariant::Conservative, convention)?,
        );
    }
    Ok(SweepCurve {
        parameter: "alpha".to_string(),
        samples,
        eigenvalues: Vec::new(),
        classifications: Vec::new(),
        emergence: None,
        curves,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    /// (h, eigenvalues) rows, h decreasing by halving. Meshes are rebuilt at
    /// each h so the grading floor scales with the resolution.
    pub h_table: Vec<(f64, Vec<f64>)>,
    pub observed_order: Vec<Option<f64>>,
    pub extrapolated: Vec<Option<f64>>,
    /// (r_max, eigenvalues) rows at the coarsest h.
    pub rmax_table: Vec<(f64, Vec<f64>)>,
    /// True if eigenvalues are non-increasing down the r_max table.
    pub rmax_monotone: bool,
}

/// Convergence study for one mode: eigenvalues vs h (rebuilt meshes, h
/// halved `levels − 1` times) and vs r_max at fixed h.
pub fn convergence_study(
    geometry: &Geometry,
    alpha: f64,
    m: i32,
    params: &SolveParams,
    rmax_list: &[f64],
) -> Result<ConvergenceReport, SpectrumError> {
    if params.levels < 3 {
        return Err(SpectrumError::TooFewLevels(params.levels));
    }
    let mode = FluxMode::new(alpha, m)?;
    let limit = (1.0 - params.delta) * essential_threshold(geometry);

    let mut h_table = Vec::new();
    for l in 0..params.levels {
        let h = params.h / 2f64.powi(l as i32);
        let mesh = mesh::build_mesh(geometry, h, params.grading)?;
        let pairs = solve_on_mesh(&mesh, mode.nu(), limit, params.tol, params.seed)?;
        h_table.push((mesh.h, pairs.iter().map(|p| p.value).collect::<Vec<f64>>()));
    }
    let n_vals = h_table.last().map(|(_, v)| v.len()).unwrap_or(0);
    let mut observed_order = Vec::new();
    let mut extrapolated = Vec::new();
    for k in 0..n_vals {
        let trace: Vec<f64> = h_table
            .iter()
            .filter_map(|(_, v)| v.get(k).copied())
            .collect();
        let (e, o) = extrapolate(&trace);
        extrapolated.push(e);
        observed_order.push(o);
    }

    let mut rmax_table = Vec::new();
    for &rm in rmax_list {
        let g = Geometry::new(geometry.d, geometry.a, rm)?;
        let mesh = mesh::build_mesh(&g, params.h, params.grading)?;
        let pairs = solve_on_mesh(&mesh, mode.nu(), limit, params.tol, params.seed)?;
        rmax_table.push((rm, pairs.iter().map(|p| p.value).collect::<Vec<f64>>()));
    }
    let mut rmax_monotone = true;
    for w in rmax_table.windows(2) {
        for (v0, v1) in w[0].1.iter().zip(&w[1].1) {
            if v1 > &(v0 + 1e-9) {
                rmax_monotone = false;
            }
        }
    }

    Ok(ConvergenceReport {
        h_table,
        observed_order,
        extrapolated,
        rmax_table,
        rmax_monotone,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    /// (h, ground state) per level, meshes rebuilt at each h.
    pub h_table: Vec<(f64, f64)>,
    pub analytic: f64,
    pub finest: f64,
    pub relative_error: f64,
    pub observed_order: Option<f64>,
    pub extrapolated: Option<f64>,
}

/// Interior-cylinder benchmark: Dirichlet wall at r = a, Neumann bottom, so
/// the ground state is exactly (x_{ν,1}/a)² + (π/2d)². Exercises the full
/// mesh/assembly/eigensolve chain against a closed form.
pub fn interior_benchmark(
    d: f64,
    a: f64,
    nu: f64,
    params: &SolveParams,
) -> Result<BenchmarkReport, SpectrumError> {
    let order = crate::bessel::BesselOrder::new(nu)?;
    let x1 = crate::bessel::zero_j(order, crate::bessel::ZeroIndex::new(1)?)?;
    let analytic_value = (x1 / a).powi(2) + (std::f64::consts::PI / (2.0 * d)).powi(2);
    let limit = 1.5 * analytic_value;

    let mut h_table = Vec::new();
    for l in 0..=params.levels {
        let h = params.h / 2f64.powi(l as i32);
        let mesh = mesh::build_interior_mesh(d, a, h, params.grading)?;
        let pairs = solve_on_mesh(&mesh, nu, limit, params.tol, params.seed)?;
        let ground = pairs
            .first()
            .map(|p| p.value)
            .ok_or_else(|| SpectrumError::Eigen(eigen::EigenError::NoConvergence(0)))?;
        h_table.push((mesh.h, ground));
    }
    let trace: Vec<f64> = h_table.iter().map(|(_, v)| *v).collect();
    let (extrapolated, observed_order) = extrapolate(&trace);
    let finest = *trace.last().unwrap();
    Ok(BenchmarkReport {
        h_table,
        analytic: analytic_value,
        finest,
        relative_error: (finest - analytic_value).abs() / analytic_value,
        observed_order,
        extrapolated,
    })
}

impl SpectrumResult {
    /// Eigenvalues that pass every reporting gate (below the limit is
    /// guaranteed by construction; r_max stability only when checked).
    pub fn stable_values(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .filter(|m| m.rmax_stable != Some(false))
            .map(|m| m.value)
            .collect()
    }
}

/// Interior eigenvalue pairs for the bracket example in tests and headers.
pub fn interior_ground(geometry: &Geometry, alpha: f64, side: WallCondition) -> Result<f64, SpectrumError> {
    let mut best = f64::INFINITY;
    for &m in &analytic::default_mode_range(alpha) {
        let mode = FluxMode::new(alpha, m)?;
        let evs = analytic::interior_spectrum(geometry, &mode, side, 1)?;
        if let Some(e) = evs.first() {
            best = best.min(e.value);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn fast_params() -> SolveParams {
        SolveParams {
            h: 0.5,
            grading: 1.3,
            levels: 1,
            tol: 1e-7,
            ..Default::default()
        }
    }

    #[test]
    fn no_spectrum_below_critical_radius() {
        // a/d = 0.9/π ≈ 0.286 < a₀(0.5) ≈ 0.428
        let g = Geometry::new(PI, 0.9, 8.0).unwrap();
        let r = solve_mode(&g, 0.5, 0, &fast_params()).unwrap();
        assert!(r.values.is_empty());
    }

    #[test]
    fn spectrum_appears_above_critical_radius_and_obeys_bracket() {
        // a/d = 4/π ≈ 1.27 > a₁(0.5) ≈ 1.1547
        let g = Geometry::new(PI, 4.0, 14.0).unwrap();
        let mut p = fast_params();
        p.levels = 2;
        let r = solve_full(&g, 0.5, &[0, 1], &p).unwrap();
        assert!(!r.eigenvalues.is_empty());
        assert!(r.bracket_violations.is_empty());
        assert_eq!(r.classification, Classification::DiscreteSpectrumExists);
        for mv in &r.eigenvalues {
            assert!(mv.value >= r.lower_threshold - 1e-9);
            assert!(mv.value < r.report_limit);
        }
        // α = 0.5 makes modes m=0 and m=1 exactly degenerate
        let v0: Vec<f64> = r.eigenvalues.iter().filter(|m| m.m == 0).map(|m| m.value).collect();
        let v1: Vec<f64> = r.eigenvalues.iter().filter(|m| m.m == 1).map(|m| m.value).collect();
        assert_eq!(v0.len(), v1.len());
        for (a, b) in v0.iter().zip(&v1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn eigenvalues_decrease_when_the_window_widens() {
        let p = fast_params();
        let mut prev: Option<f64> = None;
        for &a in &[3.2, 3.6, 4.0] {
            let g = Geometry::new(PI, a, 12.0).unwrap();
            let r = solve_mode(&g, 0.5, 0, &p).unwrap();
            let ground = r.values.first().copied().unwrap_or(f64::INFINITY);
            if let Some(prev) = prev {
                assert!(ground <= prev + 1e-9, "a={a}: {ground} vs {prev}");
            }
            prev = Some(ground);
        }
    }

    #[test]
    fn interior_benchmark_converges_to_closed_form() {
        let p = SolveParams {
            h: 0.2,
            grading: 1.3,
            levels: 2,
            tol: 1e-8,
            ..Default::default()
        };
        let r = interior_benchmark(PI, 1.0, 0.5, &p).unwrap();
        assert_abs_diff_eq!(r.analytic, PI * PI + 0.25, epsilon = 1e-12);
        assert!(r.relative_error < 5e-3, "relative error {}", r.relative_error);
        // errors shrink monotonically from above (minimax)
        for w in r.h_table.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9);
            assert!(w[1].1 >= r.analytic - 1e-6);
        }
    }

    #[test]
    fn flux_sweep_curves_are_ordered() {
        let c = sweep_flux(0.05, 0.95, 19, OrderConvention::MinimalOrder).unwrap();
        let a0s = &c.curves["a0_sharp"];
        let a1s = &c.curves["a1_sharp"];
        let a0c = &c.curves["a0_conservative"];
        let a1c = &c.curves["a1_conservative"];
        for i in 0..c.samples.len() {
            let nu = crate::analytic::effective_order(c.samples[i]);
            assert!(a0s[i] < a1s[i]);
            // the closed-form substitutes are genuine lower bounds only for
            // large enough order; below that the inequality flips
            if nu >= 0.4951 {
                assert!(a0c[i] <= a0s[i] + 1e-12);
            } else {
                assert!(a0c[i] > a0s[i]);
            }
            if nu >= 0.25 {
                assert!(a1c[i] <= a1s[i] + 1e-12);
            }
        }
        assert!(c.samples.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn flux_symmetry_under_alpha_reflection() {
        let g = Geometry::new(PI, 4.0, 12.0).unwrap();
        let p = fast_params();
        let r3 = solve_full(&g, 0.3, &[-2, -1, 0, 1, 2, 3], &p).unwrap();
        let r7 = solve_full(&g, 0.7, &[-2, -1, 0, 1, 2, 3], &p).unwrap();
        let v3: Vec<f64> = r3.eigenvalues.iter().map(|m| m.value).collect();
        let v7: Vec<f64> = r7.eigenvalues.iter().map(|m| m.value).collect();
        assert_eq!(v3.len(), v7.len());
        for (a, b) in v3.iter().zip(&v7) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6 * a.abs().max(1.0));
        }
    }

    #[test]
    fn sweep_validation_errors() {
        assert!(matches!(
            sweep_flux(0.2, 0.8, 1, OrderConvention::MinimalOrder),
            Err(SpectrumError::TooFewSteps(1))
        ));
        assert!(matches!(
            sweep_flux(0.8, 0.2, 5, OrderConvention::MinimalOrder),
            Err(SpectrumError::BadRange(..))
        ));
        let p = fast_params();
        assert!(matches!(
            convergence_study(
                &Geometry::new(1.0, 0.5, 2.0).unwrap(),
                0.5,
                0,
                &p,
                &[2.0]
            ),
            Err(SpectrumError::TooFewLevels(1))
        ));
    }
}
