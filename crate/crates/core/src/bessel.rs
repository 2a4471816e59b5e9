//! Bessel functions of the first kind of real order, their positive zeros
//! and derivative zeros, and the closed-form zero lower bounds.
//!
//! Evaluation strategy: ascending series where it is cancellation-free
//! (x ≤ 9 or x² ≤ 4(ν+1)), otherwise Miller backward recurrence normalized
//! with Σₖ (ν₀+2k)Γ(ν₀+k)/k! · J_{ν₀+2k}(x) = (x/2)^{ν₀}. Zeros are located
//! by outward marching with a step below the minimal zero gap, which makes
//! the zero index exact, then refined by safeguarded bisection/secant.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BesselError {
    #[error("order must be finite and nonnegative, got {0}")]
    InvalidOrder(f64),
    #[error("argument must be positive and finite, got {0}")]
    InvalidArgument(f64),
    #[error("zero index must be >= 1")]
    InvalidIndex,
    #[error("derivative zeros of J_0 are excluded (convention ambiguity for the first zero)")]
    DerivativeZeroOrderZero,
}

/// Order ν ≥ 0 of a Bessel function of the first kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, BesselError> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(BesselError::InvalidOrder(nu));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// 1-based index of a positive zero, counted in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroIndex(u32);

impl ZeroIndex {
    pub fn new(n: u32) -> Result<Self, BesselError> {
        if n == 0 {
            return Err(BesselError::InvalidIndex);
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// J_ν(x) for ν ≥ 0, x > 0.
///
/// Relative accuracy ~1e-13 for 0 ≤ ν ≤ 50, 0 < x ≤ 200 (away from zeros,
/// where the error stays absolute).
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64, BesselError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(BesselError::InvalidArgument(x));
    }
    let nu = order.value();
    if x <= 9.0 || x * x <= 4.0 * (nu + 1.0) {
        Ok(series_jnu(nu, x))
    } else {
        Ok(miller_jnu(nu, x))
    }
}

/// J'_ν(x) via J'_ν = (J_{ν−1} − J_{ν+1})/2 for ν ≥ 1 and
/// J'_ν = (ν/x)J_ν − J_{ν+1} for ν < 1.
pub fn bessel_j_prime(order: BesselOrder, x: f64) -> Result<f64, BesselError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(BesselError::InvalidArgument(x));
    }
    let nu = order.value();
    if nu >= 1.0 {
        let lo = bessel_j(BesselOrder(nu - 1.0), x)?;
        let hi = bessel_j(BesselOrder(nu + 1.0), x)?;
        Ok(0.5 * (lo - hi))
    } else {
        let j = bessel_j(order, x)?;
        let hi = bessel_j(BesselOrder(nu + 1.0), x)?;
        Ok(nu / x * j - hi)
    }
}

/// n-th positive zero x_{ν,n} of J_ν, absolute error ≤ 1e-12.
pub fn zero_j(order: BesselOrder, index: ZeroIndex) -> Result<f64, BesselError> {
    let nu = order.value();
    let n = index.get();
    // J_ν > 0 on (0, x_{ν,1}); start strictly left of the first zero.
    let start = if nu >= 1.0 { nu } else { 0.5 };
    let f = |x: f64| bessel_j(order, x).unwrap_or(f64::NAN);
    Ok(nth_zero(&f, start, n))
}

/// n-th positive zero x'_{ν,n} of J'_ν, absolute error ≤ 1e-12.
///
/// Requires ν > 0: for ν = 0 the indexing convention of the first zero is
/// ambiguous and the flux constraint α ∉ ℤ keeps every in-scope order positive.
pub fn zero_j_prime(order: BesselOrder, index: ZeroIndex) -> Result<f64, BesselError> {
    let nu = order.value();
    if nu == 0.0 {
        return Err(BesselError::DerivativeZeroOrderZero);
    }
    let n = index.get();
    // J'_ν > 0 on (0, x'_{ν,1}); the first zero collapses like sqrt(2ν) as
    // ν → 0, so the start point must shrink with it.
    let start = if nu >= 1.0 {
        nu
    } else {
        0.25 * (2.0 * nu).sqrt()
    };
    let f = |x: f64| bessel_j_prime(order, x).unwrap_or(f64::NAN);
    Ok(nth_zero(&f, start, n))
}

/// Airy-type constant α_n = 2^{−1/3}·β_n where β_n is the n-th positive root
/// of J_{2/3}((2/3)x^{3/2}) − J_{−2/3}((2/3)x^{3/2}) = 0.
///
/// The roots β_n are the negated zeros of Ai'; the series evaluation used for
/// the two fractional orders is accurate for the arguments reached by n ≤ 8.
pub fn airy_constant(index: ZeroIndex) -> Result<f64, BesselError> {
    let n = index.get();
    let g = |x: f64| {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        series_jnu(2.0 / 3.0, zeta) - series_jnu(-2.0 / 3.0, zeta)
    };
    let beta = nth_zero(&g, 0.05, n);
    Ok(2f64.powf(-1.0 / 3.0) * beta)
}

/// Closed-form lower bound √((n−¼)²π² + ν²) for x_{ν,n}.
pub fn lower_bound_zero(order: BesselOrder, index: ZeroIndex) -> f64 {
    let nu = order.value();
    let n = index.get() as f64;
    ((n - 0.25) * (n - 0.25) * PI * PI + nu * nu).sqrt()
}

/// Closed-form bound ν + α_n·ν^{1/3} for x'_{ν,n}.
///
/// This is a large-order asymptotic; it is a true lower bound only
/// away from small ν at n = 1 (the first derivative zero collapses like
/// √(2ν) while the bound decays like ν^{1/3}).
pub fn lower_bound_zero_prime(order: BesselOrder, index: ZeroIndex) -> Result<f64, BesselError> {
    let nu = order.value();
    if nu <= 0.0 {
        return Err(BesselError::InvalidOrder(nu));
    }
    let alpha_n = airy_constant(index)?;
    Ok(nu + alpha_n * nu.powf(1.0 / 3.0))
}

/// Ascending series Σ (−1)^k (x/2)^{ν+2k} / (k! Γ(ν+k+1)), valid for ν > −1.
///
/// Cancellation-free as long as x ≤ ~9 or the terms decrease from the start.
fn series_jnu(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        if term.abs() <= sum.abs() * 1e-18 + 1e-308 {
            break;
        }
    }
    sum
}

/// Miller backward recurrence for J_ν(x), fractional-order normalization.
fn miller_jnu(nu: f64, x: f64) -> f64 {
    let m = nu.floor() as usize;
    let nu0 = nu - m as f64; // in [0, 1)

    // Start high enough that the trial solution has decayed by ~e^45 between
    // the start order and max(x, ν), burying the contamination below 1e-19.
    let mut mu = x.max(nu).ceil() + 1.0;
    let mut logdrop = 0.0;
    while logdrop < 45.0 {
        mu += 1.0;
        logdrop += (2.0 * mu / x).ln().max(0.05);
    }
    let n_top = (mu - nu0).ceil() as usize;

    let mut f = vec![0.0f64; n_top + 2];
    f[n_top + 1] = 0.0;
    f[n_top] = 1e-30;
    for k in (0..n_top).rev() {
        let ord = nu0 + (k + 1) as f64;
        f[k] = 2.0 * ord / x * f[k + 1] - f[k + 2];
        if f[k].abs() > 1e250 {
            for v in f[k..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }

    let scale = if nu0 < 1e-14 {
        // Integer order: J_0 + 2 Σ J_{2k} = 1.
        let mut s = f[0];
        let mut k = 2;
        while k <= n_top {
            s += 2.0 * f[k];
            k += 2;
        }
        1.0 / s
    } else {
        // Σ_k (ν₀+2k) Γ(ν₀+k)/k! · J_{ν₀+2k}(x) = (x/2)^{ν₀}.
        let mut c = (ln_gamma(nu0 + 1.0)).exp(); // ν₀ Γ(ν₀) = Γ(ν₀+1)
        let mut s = c * f[0];
        let mut k = 0usize;
        while 2 * (k + 1) <= n_top {
            let kf = k as f64;
            c *= (nu0 + 2.0 * kf + 2.0) / (nu0 + 2.0 * kf) * (nu0 + kf) / (kf + 1.0);
            s += c * f[2 * (k + 1)];
            k += 1;
        }
        (0.5 * x).powf(nu0) / s
    };
    f[m] * scale
}

/// Locate the n-th sign change of `f` right of `start` and refine it.
///
/// The marching step (0.5) is below the minimal gap between consecutive
/// zeros of J_ν and J'_ν (≈ 2.9), so sign changes are counted exactly.
fn nth_zero(f: &dyn Fn(f64) -> f64, start: f64, n: u32) -> f64 {
    const STEP: f64 = 0.5;
    let mut lo = start;
    let mut flo = f(lo);
    debug_assert!(
        flo.is_finite() && flo != 0.0,
        "marching must start strictly left of the first zero"
    );
    let mut count = 0;
    loop {
        let hi = lo + STEP;
        let fhi = f(hi);
        if flo.signum() != fhi.signum() && fhi != 0.0 {
            count += 1;
            if count == n {
                return refine_zero(f, lo, hi, flo, fhi);
            }
        } else if fhi == 0.0 {
            // Landed exactly on a zero; nudge past it.
            count += 1;
            if count == n {
                return hi;
            }
        }
        lo = hi;
        flo = fhi;
    }
}

/// Safeguarded secant steps inside a shrinking bisection bracket.
fn refine_zero(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        let mid = {
            let secant = lo - flo * (hi - lo) / (fhi - flo);
            let margin = 0.01 * (hi - lo);
            if secant > lo + margin && secant < hi - margin {
                secant
            } else {
                0.5 * (lo + hi)
            }
        };
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    0.5 * (lo + hi)
}
