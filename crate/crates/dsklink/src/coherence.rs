//! Channel and direction coherence analysis.
//!
//! Two coherence functions govern how long a receiver-side reference stays
//! valid while the receiver moves:
//!
//! - The *channel* coherence function is the classical Clarke/Jakes form
//!   scaled by residual-frequency-offset band overlap,
//!   `J_CCT = ((B - |df - df'|)/B) |J0(2 PI t_c v / lambda)|`. It decays on
//!   the wavelength scale: moving a fraction of `lambda` decorrelates the
//!   channel coefficient.
//! - The *direction* coherence function measures how long the TDoA
//!   fingerprint across a small receive array stays valid. Averaging the
//!   correlation loss `sinc(PI B dTDoA)` over the arrival-angle error
//!   induced by a uniformly random displacement of length `t_c v` gives
//!   `J_DCT = (1/PI) |int_{-PI/2}^{PI/2} sinc(PI (B/c) (q1 (1 - sqrt(1 -
//!   g^2 sin^2 u)) - q2 g sin u)) du|` with `g = t_c v / d`, which decays on
//!   the much larger `d c / (l B)` scale.
//!
//! The direction integral is evaluated with the arcsine-density singularity
//! absorbed by the substitution `z = g sin u` (the integrand above is
//! already in the substituted, everywhere-smooth form), then composite
//! Gauss-Legendre quadrature with panel doubling. A closed-form lower bound
//! `|J0(2 PI (l B / c) g)|` exists for symmetric element radii, and a Monte
//! Carlo oracle recomputes the direction coherence from exact displaced
//! geometry with no small-displacement approximation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::geometry::{toa, Point2D};
use crate::impairments::FreqOffsetPair;
use crate::numerics::{integrate_adaptive, sinc, NumericsError};
use crate::SPEED_OF_LIGHT;

pub use crate::numerics::bessel_j0;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of the coherence evaluations.
#[derive(Debug, Error)]
pub enum CoherenceError {
    /// Displacement reached the transmitter distance scale; the direction
    /// coherence model needs `t_c * v < d`.
    #[error("displacement ratio g = t_c*v/d = {g:.3} is outside the regime g < 1")]
    OutOfRegime {
        /// Normalized displacement `t_c v / d`.
        g: f64,
    },
    /// The closed-form lower bound is proven only for equal element radii.
    #[error("lower bound requires l1 = l2, got l1 = {l1} m, l2 = {l2} m")]
    AsymmetricBound {
        /// First element radius.
        l1: f64,
        /// Second element radius.
        l2: f64,
    },
    /// Quadrature spec outside the supported envelope.
    #[error("quadrature spec invalid: {0}")]
    InvalidQuadratureSpec(String),
    /// The coherence curve never starts above the threshold.
    #[error("curve value at t=0 ({at_zero:.6}) does not exceed threshold {threshold:.6}")]
    ThresholdNotBelowStart {
        /// Curve value at zero lag.
        at_zero: f64,
        /// Requested threshold.
        threshold: f64,
    },
    /// No threshold crossing found within the search horizon.
    #[error("no |J| = {threshold:.4} crossing within t_c <= {t_max:.3e} s")]
    NoCrossing {
        /// Requested threshold.
        threshold: f64,
        /// Search horizon in seconds.
        t_max: f64,
    },
    /// Monte Carlo sample budget below the statistical floor.
    #[error("Monte Carlo needs at least {need} samples, got {got}")]
    TooFewSamples {
        /// Requested sample count.
        got: usize,
        /// Minimum allowed.
        need: usize,
    },
    /// Displacement density requires the step to stay below the distance.
    #[error("density requires step < d, got step = {step} m, d = {d} m")]
    StepNotBelowDistance {
        /// Displacement length in meters.
        step: f64,
        /// Transmitter distance in meters.
        d: f64,
    },
    /// Quadrature did not converge.
    #[error(transparent)]
    Quadrature(#[from] NumericsError),
}

// ---------------------------------------------------------------------------
// Query and quadrature parameters
// ---------------------------------------------------------------------------

/// All parameters entering a coherence evaluation.
///
/// Geometry: transmitter at distance `d`, arrival angle `theta`; two receive
/// elements at polar offsets `(l1, phi1)` and `(l2, phi2)` from the array
/// center. Motion: speed times elapsed time `t_c` gives the displacement.
/// Link: wavelength `lambda`, bandwidth `bandwidth`, residual frequency
/// offsets `df` (before) and `df_prime` (after displacement).
#[derive(Debug, Clone, Copy)]
pub struct CoherenceQuery {
    /// Elapsed (coherence) time in seconds.
    pub t_c: f64,
    /// Receiver speed in meters per second.
    pub speed: f64,
    /// Transmitter distance in meters.
    pub d: f64,
    /// Carrier wavelength in meters.
    pub lambda: f64,
    /// Signal bandwidth in hertz.
    pub bandwidth: f64,
    /// First element radius in meters.
    pub l1: f64,
    /// Second element radius in meters.
    pub l2: f64,
    /// First element angle in radians.
    pub phi1: f64,
    /// Second element angle in radians.
    pub phi2: f64,
    /// Arrival angle in radians.
    pub theta: f64,
    /// Residual frequency offset before displacement, hertz.
    pub df: f64,
    /// Residual frequency offset after displacement, hertz.
    pub df_prime: f64,
}

impl CoherenceQuery {
    /// Normalized displacement in wavelengths, `t_c v / lambda`.
    pub fn f_max(&self) -> f64 {
        self.t_c * self.speed / self.lambda
    }

    /// Normalized displacement in transmitter distances, `t_c v / d`.
    pub fn g_max(&self) -> f64 {
        self.t_c * self.speed / self.d
    }

    /// The frequency-offset pair carried by this query.
    pub fn offsets(&self) -> FreqOffsetPair {
        FreqOffsetPair {
            df: self.df,
            df_prime: self.df_prime,
        }
    }

    /// The same query at a different elapsed time (for curve sweeps).
    pub fn with_t_c(&self, t_c: f64) -> Self {
        Self { t_c, ..*self }
    }
}

/// Quadrature controls for the direction-coherence integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per panel (>= 16).
    pub node_count: usize,
    /// Relative convergence tolerance, in (0, 1e-3].
    pub relative_tolerance: f64,
}

impl QuadratureSpec {
    /// Validated constructor.
    pub fn new(node_count: usize, relative_tolerance: f64) -> Result<Self, CoherenceError> {
        if node_count < 16 {
            return Err(CoherenceError::InvalidQuadratureSpec(format!(
                "node_count must be >= 16, got {node_count}"
            )));
        }
        if !(relative_tolerance > 0.0 && relative_tolerance <= 1e-3) {
            return Err(CoherenceError::InvalidQuadratureSpec(format!(
                "relative_tolerance must lie in (0, 1e-3], got {relative_tolerance:e}"
            )));
        }
        Ok(Self {
            node_count,
            relative_tolerance,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 32,
            relative_tolerance: 1e-10,
        }
    }
}

// ---------------------------------------------------------------------------
// Channel coherence
// ---------------------------------------------------------------------------

/// A coherence value together with the band-overlap regime flag.
#[derive(Debug, Clone, Copy)]
pub struct CctValue {
    /// Coherence in [0, 1].
    pub value: f64,
    /// True when `|df - df_prime| >= B`, in which case the band-overlap
    /// factor has clamped the value to zero.
    pub offset_exceeds_band: bool,
}

/// Channel coherence function
/// `((B - |df - df_prime|)/B) * |J0(2 PI t_c v / lambda)|`.
///
/// When the offset gap reaches the bandwidth the overlap factor clamps to
/// zero and the returned flag marks the out-of-regime evaluation.
pub fn j_cct(q: &CoherenceQuery) -> CctValue {
    let gap = q.offsets().gap();
    if gap >= q.bandwidth {
        return CctValue {
            value: 0.0,
            offset_exceeds_band: true,
        };
    }
    let band = (q.bandwidth - gap) / q.bandwidth;
    CctValue {
        value: band * bessel_j0(2.0 * std::f64::consts::PI * q.f_max()).abs(),
        offset_exceeds_band: false,
    }
}

// ---------------------------------------------------------------------------
// Direction coherence
// ---------------------------------------------------------------------------

/// The TDoA sensitivity coefficients of the element pair:
/// `q1 = l2 cos(theta - phi2) - l1 cos(theta - phi1)` and
/// `q2 = l2 sin(theta - phi2) - l1 sin(theta - phi1)`, both in meters.
pub fn q_coefficients(q: &CoherenceQuery) -> (f64, f64) {
    let q1 = q.l2 * (q.theta - q.phi2).cos() - q.l1 * (q.theta - q.phi1).cos();
    let q2 = q.l2 * (q.theta - q.phi2).sin() - q.l1 * (q.theta - q.phi1).sin();
    (q1, q2)
}

/// Exact direction coherence: the expectation of `sinc(PI B dTDoA)` over
/// the arrival-angle error of a uniformly random displacement,
/// `(1/PI) |int_{-PI/2}^{PI/2} sinc(PI (B/c) (q1 (1 - sqrt(1 - g^2 sin^2 u))
/// - q2 g sin u)) du|`.
///
/// The substitution `z = g sin u` has already absorbed the arcsine-density
/// edge singularity, so the integrand is analytic and panel-doubled
/// Gauss-Legendre converges spectrally.
pub fn j_dct_exact(q: &CoherenceQuery, spec: &QuadratureSpec) -> Result<f64, CoherenceError> {
    QuadratureSpec::new(spec.node_count, spec.relative_tolerance)?;
    let g = q.g_max();
    if !(g < 1.0) {
        return Err(CoherenceError::OutOfRegime { g });
    }
    if q.t_c == 0.0 {
        return Ok(1.0);
    }
    let (q1, q2) = q_coefficients(q);
    let scale = std::f64::consts::PI * q.bandwidth / SPEED_OF_LIGHT;
    let integrand = |u: f64| {
        let s = g * u.sin();
        let root = (1.0 - s * s).sqrt();
        sinc(scale * (q1 * (1.0 - root) - q2 * s))
    };
    let quad = integrate_adaptive(
        integrand,
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        spec.node_count,
        spec.relative_tolerance,
        20,
    )?;
    Ok((quad.value / std::f64::consts::PI).abs())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    /// Estimated coherence, `|mean|`.
    pub value: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

/// Monte Carlo direction coherence from exact displaced geometry.
///
/// Each sample draws a uniformly random heading, translates the two-element
/// array by `t_c * speed`, recomputes both element ToAs exactly (no
/// far-field approximation), and averages `sinc(PI B dTDoA)` where `dTDoA`
/// is the post- minus pre-displacement TDoA. This is the model-free oracle
/// the closed-form integral is validated against.
pub fn j_dct_mc(
    q: &CoherenceQuery,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate, CoherenceError> {
    const MIN_SAMPLES: usize = 10_000;
    if n_samples < MIN_SAMPLES {
        return Err(CoherenceError::TooFewSamples {
            got: n_samples,
            need: MIN_SAMPLES,
        });
    }
    let g = q.g_max();
    if !(g < 1.0) {
        return Err(CoherenceError::OutOfRegime { g });
    }
    if q.t_c == 0.0 {
        return Ok(McEstimate {
            value: 1.0,
            std_error: 0.0,
        });
    }
    let tx = Point2D::new(q.d * q.theta.cos(), q.d * q.theta.sin());
    let e1 = Point2D::new(q.l1 * q.phi1.cos(), q.l1 * q.phi1.sin());
    let e2 = Point2D::new(q.l2 * q.phi2.cos(), q.l2 * q.phi2.sin());
    let base = toa(tx, e2, SPEED_OF_LIGHT) - toa(tx, e1, SPEED_OF_LIGHT);
    let step = q.t_c * q.speed;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n_samples {
        let heading: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let dx = step * heading.cos();
        let dy = step * heading.sin();
        let e1p = Point2D::new(e1.x + dx, e1.y + dy);
        let e2p = Point2D::new(e2.x + dx, e2.y + dy);
        let moved = toa(tx, e2p, SPEED_OF_LIGHT) - toa(tx, e1p, SPEED_OF_LIGHT);
        let value = sinc(std::f64::consts::PI * q.bandwidth * (moved - base));
        sum += value;
        sum2 += value * value;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum2 - n * mean * mean) / (n - 1.0);
    Ok(McEstimate {
        value: mean.abs(),
        std_error: (var.max(0.0) / n).sqrt(),
    })
}

/// Probability density of the arrival-angle error `theta_e` induced by a
/// uniformly random displacement of length `step` at distance `d`:
/// `(1/PI) (d/step) cos(theta_e) / sqrt(1 - (d/step)^2 sin^2(theta_e))` on
/// the support `|sin(theta_e)| <= step/d`, zero outside.
pub fn theta_e_density(theta_e: f64, d: f64, step: f64) -> Result<f64, CoherenceError> {
    if !(step > 0.0 && step < d) {
        return Err(CoherenceError::StepNotBelowDistance { step, d });
    }
    let ratio = d / step;
    let s = theta_e.sin();
    let inside = 1.0 - ratio * ratio * s * s;
    if inside <= 0.0 || theta_e.cos() <= 0.0 {
        return Ok(0.0);
    }
    Ok(ratio * theta_e.cos() / (std::f64::consts::PI * inside.sqrt()))
}

/// Closed-form lower bound on the direction coherence for equal element
/// radii `l1 = l2 = l`: `|J0(2 PI (l B / c) g)|`, `g = t_c v / d`.
///
/// Unlike the exact integral, the bound extends analytically to any `g`.
pub fn j_dct_lower_bound(q: &CoherenceQuery) -> Result<f64, CoherenceError> {
    if q.l1 != q.l2 {
        return Err(CoherenceError::AsymmetricBound { l1: q.l1, l2: q.l2 });
    }
    let arg = 2.0 * std::f64::consts::PI * (q.l1 * q.bandwidth / SPEED_OF_LIGHT) * q.g_max();
    Ok(bessel_j0(arg).abs())
}

// ---------------------------------------------------------------------------
// Coherence-time solvers
// ---------------------------------------------------------------------------

/// Smallest `t_c` where the coherence curve crosses the threshold,
/// `|J(t_c)|^2 = threshold^2`, found by geometric bracketing from zero and
/// bisection to ~1e-13 relative.
///
/// The curve must start above the threshold at `t = 0` and cross within
/// `t_max` (callers typically pass a multiple of `d / v`).
pub fn coherence_time<F: Fn(f64) -> f64>(
    curve: F,
    threshold: f64,
    t_max: f64,
) -> Result<f64, CoherenceError> {
    let thr2 = threshold * threshold;
    let above = |t: f64| {
        let j = curve(t);
        j * j >= thr2
    };
    let at_zero = curve(0.0);
    if !(at_zero * at_zero > thr2) {
        return Err(CoherenceError::ThresholdNotBelowStart {
            at_zero,
            threshold,
        });
    }
    // Expanding scan from a tiny fraction of the horizon; 1.25x steps are
    // fine enough that a first crossing cannot be skipped while the curve
    // is still in its initial descent.
    let mut lo = 0.0;
    let mut hi = t_max * 1e-9;
    while above(hi) {
        lo = hi;
        hi *= 1.25;
        if hi > t_max {
            return Err(CoherenceError::NoCrossing { threshold, t_max });
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The direction-to-channel coherence-time ratio `(d/lambda) (c/(l B))`:
/// how many times longer the TDoA fingerprint outlives the channel
/// coefficient.
pub fn dct_cct_ratio(d: f64, lambda: f64, l: f64, bandwidth: f64) -> f64 {
    debug_assert!(d > 0.0 && lambda > 0.0 && l > 0.0 && bandwidth > 0.0);
    (d / lambda) * (SPEED_OF_LIGHT / (l * bandwidth))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
