//! Closed-form spectral machinery: interior-cylinder spectra, essential
//! spectrum thresholds, critical window radii a₀(α), a₁(α), classification of
//! the discrete-spectrum regime, and two-sided eigenvalue brackets.

use crate::bessel::{self, BesselError, BesselOrder, ZeroIndex};
use serde::Serialize;
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("flux parameter must not be an integer, got {0}")]
    IntegerFlux(f64),
    #[error("slab width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("window radius must satisfy 0 <= a <= r_max, got a={a}, r_max={r_max}")]
    InvalidRadius { a: f64, r_max: f64 },
    #[error("window radius must be positive for an interior cylinder")]
    NoInteriorCylinder,
    #[error("eigenvalue index {k} exceeds the enumerated count {count}")]
    IndexOutOfRange { k: usize, count: usize },
    #[error("mode range must be nonempty")]
    EmptyModeRange,
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Magnetic flux α (flux = 2πα) with an angular mode m; the effective Bessel
/// order is ν = |m − α|. Requires α ∉ ℤ so that ν > 0 for every mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluxMode {
    alpha: f64,
    m: i32,
    nu: f64,
}

impl FluxMode {
    pub fn new(alpha: f64, m: i32) -> Result<Self, AnalyticError> {
        check_flux(alpha)?;
        Ok(Self {
            alpha,
            m,
            nu: (m as f64 - alpha).abs(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

fn check_flux(alpha: f64) -> Result<(), AnalyticError> {
    if !alpha.is_finite() || alpha == alpha.round() {
        return Err(AnalyticError::IntegerFlux(alpha));
    }
    Ok(())
}

/// Distance from α to the nearest integer; the smallest effective order over
/// all angular modes and the minimizer of the Hardy constant.
pub fn effective_order(alpha: f64) -> f64 {
    (alpha - alpha.round()).abs()
}

/// Slab width d, window radius a and radial truncation r_max (FEM only).
/// a == r_max is permitted for the interior-cylinder benchmark; the waveguide
/// mesh additionally requires a < r_max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Geometry {
    pub d: f64,
    pub a: f64,
    pub r_max: f64,
}

impl Geometry {
    pub fn new(d: f64, a: f64, r_max: f64) -> Result<Self, AnalyticError> {
        if !d.is_finite() || d <= 0.0 {
            return Err(AnalyticError::InvalidWidth(d));
        }
        if !(0.0..=r_max).contains(&a) || !r_max.is_finite() || r_max <= 0.0 {
            return Err(AnalyticError::InvalidRadius { a, r_max });
        }
        Ok(Self { d, a, r_max })
    }
}

/// Boundary condition on the artificial cylinder surface r = a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WallCondition {
    NeumannWall,
    DirichletWall,
}

/// One eigenvalue (x^(')_{ν,n}/a)² + ((2j+1)π/(2d))² of an interior cylinder
/// comparison operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InteriorEigenvalue {
    /// Axial index j ≥ 0.
    pub axial: u32,
    /// Radial index n ≥ 1.
    pub radial: u32,
    pub value: f64,
    pub side: WallCondition,
}

/// Bottom of the essential spectrum, (π/d)².
pub fn essential_threshold(geometry: &Geometry) -> f64 {
    (PI / geometry.d).powi(2)
}

/// Bottom of the spectrum of the all-Neumann-window comparison operator,
/// (π/2d)²; every discrete eigenvalue lies in [lower, essential).
pub fn lower_threshold(geometry: &Geometry) -> f64 {
    (PI / (2.0 * geometry.d)).powi(2)
}

fn radial_zero(nu: f64, n: u32, side: WallCondition) -> Result<f64, BesselError> {
    let order = BesselOrder::new(nu)?;
    let index = ZeroIndex::new(n)?;
    match side {
        WallCondition::DirichletWall => bessel::zero_j(order, index),
        WallCondition::NeumannWall => bessel::zero_j_prime(order, index),
    }
}

/// The `count` smallest interior-cylinder eigenvalues over the (j, n) lattice,
/// sorted ascending.
///
/// The lattice value is monotone in both indices, so a best-first heap
/// expansion yields a globally sorted prefix.
pub fn interior_spectrum(
    geometry: &Geometry,
    mode: &FluxMode,
    side: WallCondition,
    count: usize,
) -> Result<Vec<InteriorEigenvalue>, AnalyticError> {
    if geometry.a <= 0.0 {
        return Err(AnalyticError::NoInteriorCylinder);
    }
    assert!(count >= 1);
    let a = geometry.a;
    let d = geometry.d;
    let kz = |j: u32| ((2.0 * j as f64 + 1.0) * PI / (2.0 * d)).powi(2);

    // Zeros are cached per radial index; the heap orders candidates by value
    // with (j, n) as a deterministic tie-break.
    let mut zeros: Vec<f64> = Vec::new();
    let zero_at = |n: u32, zeros: &mut Vec<f64>| -> Result<f64, AnalyticError> {
        while zeros.len() < n as usize {
            let next = zeros.len() as u32 + 1;
            zeros.push(radial_zero(mode.nu, next, side)?);
        }
        Ok(zeros[(n - 1) as usize])
    };
    let value = |z: f64, j: u32| (z / a).powi(2) + kz(j);

    #[derive(PartialEq)]
    struct Cand {
        value: f64,
        j: u32,
        n: u32,
    }
    impl Eq for Cand {}
    impl Ord for Cand {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // reversed: BinaryHeap is a max-heap
            other
                .value
                .partial_cmp(&self.value)
                .unwrap()
                .then(other.j.cmp(&self.j))
                .then(other.n.cmp(&self.n))
        }
    }
    impl PartialOrd for Cand {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    let z1 = zero_at(1, &mut zeros)?;
    heap.push(Cand {
        value: value(z1, 0),
        j: 0,
        n: 1,
    });
    seen.insert((0u32, 1u32));

    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = heap.pop().expect("heap never empties before count is met");
        out.push(InteriorEigenvalue {
            axial: c.j,
            radial: c.n,
            value: c.value,
            side,
        });
        for (j, n) in [(c.j + 1, c.n), (c.j, c.n + 1)] {
            if seen.insert((j, n)) {
                let z = zero_at(n, &mut zeros)?;
                heap.push(Cand {
                    value: value(z, j),
                    j,
                    n,
                });
            }
        }
    }
    Ok(out)
}

/// Which critical-radius curve: sharp (computed first zeros) or the
/// conservative closed-form floors c₀ = 0.6538 + ν, c₁ = √((3π/4)² + ν²).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveVariant {
    Sharp,
    Conservative,
}

/// Order convention for the critical curves: the physically minimal order
/// ν* = dist(α, ℤ), or the order ν = α verbatim for figure reproduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrderConvention {
    MinimalOrder,
    PaperLiteral,
}

fn curve_order(alpha: f64, convention: OrderConvention) -> f64 {
    match convention {
        OrderConvention::MinimalOrder => effective_order(alpha),
        OrderConvention::PaperLiteral => alpha,
    }
}

/// Critical radius a₀(α) = 2x'_{ν,1}/(√3 π) below which (a/d < a₀) the
/// discrete spectrum is empty.
pub fn critical_radius_a0(
    alpha: f64,
    variant: CurveVariant,
    convention: OrderConvention,
) -> Result<f64, AnalyticError> {
    check_flux(alpha)?;
    let nu = curve_order(alpha, convention);
    let c = match variant {
        CurveVariant::Sharp => bessel::zero_j_prime(BesselOrder::new(nu)?, ZeroIndex::new(1)?)?,
        CurveVariant::Conservative => 0.6538 + nu,
    };
    Ok(2.0 * c / (3f64.sqrt() * PI))
}

/// Critical radius a₁(α) = 2x_{ν,1}/(√3 π) above which (a/d > a₁) the
/// discrete spectrum is nonempty.
pub fn critical_radius_a1(
    alpha: f64,
    variant: CurveVariant,
    convention: OrderConvention,
) -> Result<f64, AnalyticError> {
    check_flux(alpha)?;
    let nu = curve_order(alpha, convention);
    let c = match variant {
        CurveVariant::Sharp => bessel::zero_j(BesselOrder::new(nu)?, ZeroIndex::new(1)?)?,
        CurveVariant::Conservative => ((0.75 * PI).powi(2) + nu * nu).sqrt(),
    };
    Ok(2.0 * c / (3f64.sqrt() * PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    NoDiscreteSpectrum,
    DiscreteSpectrumExists,
    Indeterminate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::NoDiscreteSpectrum => "NoDiscreteSpectrum",
            Classification::DiscreteSpectrumExists => "DiscreteSpectrumExists",
            Classification::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Classify the geometry by a/d against the critical curves. Only the ratio
/// a/d enters, so the result is scale invariant.
pub fn classify(
    geometry: &Geometry,
    alpha: f64,
    variant: CurveVariant,
) -> Result<Classification, AnalyticError> {
    check_flux(alpha)?;
    let ratio = geometry.a / geometry.d;
    let a0 = critical_radius_a0(alpha, variant, OrderConvention::MinimalOrder)?;
    let a1 = critical_radius_a1(alpha, variant, OrderConvention::MinimalOrder)?;
    Ok(if ratio < a0 {
        Classification::NoDiscreteSpectrum
    } else if ratio > a1 {
        Classification::DiscreteSpectrumExists
    } else {
        Classification::Indeterminate
    })
}

/// Default angular mode range {⌊α⌋−2, …, ⌈α⌉+2}; modes further out have
/// interior eigenvalues growing like ν² and cannot contribute low brackets.
pub fn default_mode_range(alpha: f64) -> Vec<i32> {
    let lo = alpha.floor() as i32 - 2;
    let hi = alpha.ceil() as i32 + 2;
    (lo..=hi).collect()
}

/// Two-sided bracket [λ_k(H⁻ᴺ), λ_k(H⁻ᴰ)] for the k-th eigenvalue, with each
/// side's k-th value taken over the merged interior spectra of `mode_range`.
pub fn bracket(
    k: usize,
    geometry: &Geometry,
    alpha: f64,
    mode_range: &[i32],
) -> Result<(f64, f64), AnalyticError> {
    check_flux(alpha)?;
    if mode_range.is_empty() {
        return Err(AnalyticError::EmptyModeRange);
    }
    if k == 0 {
        return Err(AnalyticError::IndexOutOfRange { k, count: 0 });
    }
    let kth = |side: WallCondition| -> Result<f64, AnalyticError> {
        let mut merged = Vec::new();
        for &m in mode_range {
            let mode = FluxMode::new(alpha, m)?;
            let evs = interior_spectrum(geometry, &mode, side, k)?;
            merged.extend(evs.into_iter().map(|e| e.value));
        }
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merged
            .get(k - 1)
            .copied()
            .ok_or(AnalyticError::IndexOutOfRange {
                k,
                count: merged.len(),
            })
    };
    let lo = kth(WallCondition::NeumannWall)?;
    let hi = kth(WallCondition::DirichletWall)?;
    debug_assert!(lo <= hi);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn geom(d: f64, a: f64) -> Geometry {
        Geometry::new(d, a, a + 6.0 * d).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_abs_diff_eq!(essential_threshold(&geom(PI, 1.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(essential_threshold(&geom(1.0, 1.0)), PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(essential_threshold(&geom(2.0, 1.0)), PI * PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lower_threshold(&geom(PI, 1.0)), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(lower_threshold(&geom(1.0, 1.0)), PI * PI / 4.0, epsilon = 1e-12);
        for &d in &[0.3, 1.0, PI, 7.5] {
            let g = geom(d, 1.0);
            assert_abs_diff_eq!(
                essential_threshold(&g) / lower_threshold(&g),
                4.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn interior_ground_states() {
        let mode = FluxMode::new(0.5, 0).unwrap();
        let g = geom(PI, 1.0);
        let d1 = interior_spectrum(&g, &mode, WallCondition::DirichletWall, 1).unwrap();
        assert_abs_diff_eq!(d1[0].value, PI * PI + 0.25, epsilon = 1e-9);
        let n1 = interior_spectrum(&g, &mode, WallCondition::NeumannWall, 1).unwrap();
        assert_abs_diff_eq!(n1[0].value, 1.6085328764616391, epsilon = 1e-8);
        let g2 = geom(PI, 2.0);
        let d2 = interior_spectrum(&g2, &mode, WallCondition::DirichletWall, 1).unwrap();
        assert_abs_diff_eq!(d2[0].value, (PI / 2.0).powi(2) + 0.25, epsilon = 1e-9);
    }

    /// Brute-force oracle: enumerate a large (j, n) block and sort.
    fn brute_interior(g: &Geometry, mode: &FluxMode, side: WallCondition, count: usize) -> Vec<f64> {
        let mut vals = Vec::new();
        for j in 0..40u32 {
            for n in 1..=40u32 {
                let z = radial_zero(mode.nu(), n, side).unwrap();
                let kz = (2.0 * j as f64 + 1.0) * PI / (2.0 * g.d);
                vals.push((z / g.a).powi(2) + kz * kz);
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.truncate(count);
        vals
    }

    #[test]
    fn lattice_enumeration_matches_brute_force() {
        let mode = FluxMode::new(0.3, 1).unwrap();
        let g = geom(1.2, 2.5);
        for side in [WallCondition::NeumannWall, WallCondition::DirichletWall] {
            let fast: Vec<f64> = interior_spectrum(&g, &mode, side, 15)
                .unwrap()
                .iter()
                .map(|e| e.value)
                .collect();
            let slow = brute_interior(&g, &mode, side, 15);
            for (f, s) in fast.iter().zip(&slow) {
                assert_abs_diff_eq!(f, s, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn interior_values_above_lower_threshold_and_ordered_by_wall() {
        let g = geom(PI, 2.0);
        for &m in &[-1, 0, 1, 2] {
            let mode = FluxMode::new(0.5, m).unwrap();
            let nn = interior_spectrum(&g, &mode, WallCondition::NeumannWall, 8).unwrap();
            let dd = interior_spectrum(&g, &mode, WallCondition::DirichletWall, 8).unwrap();
            for e in nn.iter().chain(&dd) {
                assert!(e.value >= lower_threshold(&g));
            }
            // per-(j,n) ordering reduces to x'_{ν,n} < x_{ν,n}
            for n in 1..=4u32 {
                let zp = radial_zero(mode.nu(), n, WallCondition::NeumannWall).unwrap();
                let z = radial_zero(mode.nu(), n, WallCondition::DirichletWall).unwrap();
                assert!(zp < z);
            }
        }
    }

    #[test]
    fn critical_radii_at_half_flux() {
        let a1 = critical_radius_a1(0.5, CurveVariant::Sharp, OrderConvention::MinimalOrder).unwrap();
        assert_abs_diff_eq!(a1, 2.0 / 3f64.sqrt(), epsilon = 1e-10);
        let a0 = critical_radius_a0(0.5, CurveVariant::Sharp, OrderConvention::MinimalOrder).unwrap();
        assert_abs_diff_eq!(a0, 0.4284050405245377, epsilon = 1e-8);
        let a0c =
            critical_radius_a0(0.5, CurveVariant::Conservative, OrderConvention::MinimalOrder).unwrap();
        assert_abs_diff_eq!(a0c, 2.0 * (0.6538 + 0.5) / (3f64.sqrt() * PI), epsilon = 1e-12);
        assert!(a0c < a0);
    }

    #[test]
    fn curves_ordered_over_flux_grid() {
        for i in 1..200 {
            let alpha = i as f64 / 200.0;
            let a0 = critical_radius_a0(alpha, CurveVariant::Sharp, OrderConvention::MinimalOrder).unwrap();
            let a1 = critical_radius_a1(alpha, CurveVariant::Sharp, OrderConvention::MinimalOrder).unwrap();
            assert!(a0 < a1, "a0 < a1 at alpha={alpha}");
            let c1 =
                critical_radius_a1(alpha, CurveVariant::Conservative, OrderConvention::MinimalOrder)
                    .unwrap();
            assert!(c1 <= a1 + 1e-12, "conservative a1 <= sharp at alpha={alpha}");
        }
    }

    #[test]
    fn classification_examples_and_scale_invariance() {
        let v = CurveVariant::Sharp;
        assert_eq!(
            classify(&geom(PI, 1.0), 0.5, v).unwrap(),
            Classification::NoDiscreteSpectrum
        );
        assert_eq!(
            classify(&geom(PI, 4.0), 0.5, v).unwrap(),
            Classification::DiscreteSpectrumExists
        );
        assert_eq!(
            classify(&geom(PI, 3.0), 0.5, v).unwrap(),
            Classification::Indeterminate
        );
        for &s in &[0.1, 2.0, 17.0] {
            let g = Geometry::new(s * PI, s * 3.0, s * (3.0 + 6.0 * PI)).unwrap();
            assert_eq!(classify(&g, 0.5, v).unwrap(), Classification::Indeterminate);
        }
    }

    #[test]
    fn bracket_example_and_scaling() {
        let g = geom(PI, 3.0);
        let (lo, hi) = bracket(1, &g, 0.5, &[0, 1]).unwrap();
        assert_abs_diff_eq!(lo, (1.1655611852072114f64 / 3.0).powi(2) + 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(hi, (PI / 3.0).powi(2) + 0.25, epsilon = 1e-8);
        // widening a shrinks both ends
        let (lo2, hi2) = bracket(1, &geom(PI, 4.0), 0.5, &[0, 1]).unwrap();
        assert!(lo2 < lo && hi2 < hi);
        // a → ∞: both ends → lower threshold
        let (lo3, hi3) = bracket(1, &geom(PI, 1e6), 0.5, &[0, 1]).unwrap();
        assert_abs_diff_eq!(lo3, 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(hi3, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(FluxMode::new(1.0, 0).is_err());
        assert!(FluxMode::new(-2.0, 1).is_err());
        assert!(Geometry::new(0.0, 1.0, 2.0).is_err());
        assert!(Geometry::new(1.0, 3.0, 2.0).is_err());
        assert!(critical_radius_a0(2.0, CurveVariant::Sharp, OrderConvention::MinimalOrder).is_err());
        let g = Geometry::new(1.0, 0.0, 5.0).unwrap();
        let mode = FluxMode::new(0.5, 0).unwrap();
        assert!(matches!(
            interior_spectrum(&g, &mode, WallCondition::NeumannWall, 1),
            Err(AnalyticError::NoInteriorCylinder)
        ));
    }

    #[test]
    fn effective_order_is_distance_to_integers() {
        assert_abs_diff_eq!(effective_order(0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_order(0.7), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_order(2.25), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_order(-1.6), 0.4, epsilon = 1e-15);
    }
}
