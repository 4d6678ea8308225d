//! Exact 2-D propagation geometry.
//!
//! Everything the detector knows about a transmitter is geometric: the
//! time-of-arrival (ToA) of its dominant ray at each receive antenna, and the
//! per-pair time differences (TDoA) that form the transmitter's fingerprint.
//! This module computes those quantities exactly (no far-field
//! approximation), models rigid displacement of the receive array under
//! mobility, provides the mirror-image construction for single-bounce
//! reflections, and exposes the displacement angle relation used by the
//! direction-coherence analysis.
//!
//! Units: positions in meters, times in seconds, angles in radians,
//! frequencies in hertz.

use rand::Rng;
use thiserror::Error;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of geometry construction and evaluation.
#[derive(Debug, Error)]
pub enum GeometryError {
    /// A reflection line was given a zero-length direction vector.
    #[error("reflection line direction must be nonzero")]
    DegenerateReflectionLine,
    /// An antenna array needs at least two elements to form TDoA pairs.
    #[error("an array needs at least 2 elements, got {0}")]
    TooFewElements(usize),
    /// The displacement angle relation is only defined for displacements
    /// smaller than the transmitter distance.
    #[error("displacement step {step} m must be smaller than the distance {d} m")]
    StepExceedsDistance {
        /// Displacement magnitude in meters.
        step: f64,
        /// Transmitter-to-receiver distance in meters.
        d: f64,
    },
}

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

/// A point in the 2-D deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    /// East coordinate in meters.
    pub x: f64,
    /// North coordinate in meters.
    pub y: f64,
}

impl Point2D {
    /// Convenience constructor.
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to `other` in meters.
    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One receive-array element described in polar offsets from the array
/// center: radial distance `l` (meters, >= 0) and azimuth `phi`
/// (radians, normalized to [0, 2*PI)).
#[derive(Debug, Clone, Copy)]
pub struct ArrayElement {
    /// Radial offset from the array center in meters.
    pub l: f64,
    /// Azimuth of the offset in radians, in [0, 2*PI).
    pub phi: f64,
}

/// The receiver's antenna array: a center position plus rigid polar offsets.
///
/// The array never rotates under mobility; displacement translates the
/// center only.
#[derive(Debug, Clone)]
pub struct MdArray {
    /// Array center in the deployment plane.
    pub center: Point2D,
    /// Element offsets; at least two entries.
    elements: Vec<ArrayElement>,
}

impl MdArray {
    /// Builds an array from explicit polar offsets. Angles are normalized to
    /// [0, 2*PI); fails if fewer than two elements are supplied.
    pub fn new(center: Point2D, elements: Vec<ArrayElement>) -> Result<Self, GeometryError> {
        if elements.len() < 2 {
            return Err(GeometryError::TooFewElements(elements.len()));
        }
        let elements = elements
            .into_iter()
            .map(|e| ArrayElement {
                l: e.l,
                phi: normalize_angle(e.phi),
            })
            .collect();
        Ok(Self { center, elements })
    }

    /// Uniform circular array: `n` elements of radius `radius` at angles
    /// `orientation + 2*PI*k/n`.
    pub fn circular(
        center: Point2D,
        n: usize,
        radius: f64,
        orientation: f64,
    ) -> Result<Self, GeometryError> {
        let elements = (0..n)
            .map(|k| ArrayElement {
                l: radius,
                phi: orientation + 2.0 * std::f64::consts::PI * k as f64 / n as f64,
            })
            .collect();
        Self::new(center, elements)
    }

    /// Uniform linear array: `n` elements spaced `spacing` meters apart along
    /// the `orientation` axis, centered on `center`.
    pub fn linear(
        center: Point2D,
        n: usize,
        spacing: f64,
        orientation: f64,
    ) -> Result<Self, GeometryError> {
        let mid = 0.5 * (n as f64 - 1.0);
        let elements = (0..n)
            .map(|k| {
                let offset = (k as f64 - mid) * spacing;
                ArrayElement {
                    l: offset.abs(),
                    phi: if offset >= 0.0 {
                        orientation
                    } else {
                        orientation + std::f64::consts::PI
                    },
                }
            })
            .collect();
        Self::new(center, elements)
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false: construction requires two or more elements.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Polar offsets of element `n`.
    pub fn element(&self, n: usize) -> ArrayElement {
        self.elements[n]
    }

    /// World position of element `n`: `center + l*(cos phi, sin phi)`.
    pub fn element_position(&self, n: usize) -> Point2D {
        let e = self.elements[n];
        Point2D::new(
            self.center.x + e.l * e.phi.cos(),
            self.center.y + e.l * e.phi.sin(),
        )
    }
}

/// Receiver mobility: speed in meters/second (>= 0) and heading in radians.
#[derive(Debug, Clone, Copy)]
pub struct MobilityState {
    /// Speed in meters per second.
    pub speed: f64,
    /// Direction of motion in radians, in [0, 2*PI).
    pub heading: f64,
}

/// The TDoA fingerprint of one transmitter at one array placement: the
/// (N-1)-vector of arrival-time differences relative to the first antenna,
/// plus the carrier frequency that converts delays into phases.
#[derive(Debug, Clone)]
pub struct TdoaFingerprint {
    /// Which transmitter this fingerprint belongs to (alphabet index).
    pub transmitter_index: usize,
    /// Entry k = ToA(antenna k+1) - ToA(antenna 0), in seconds.
    deltas: Vec<f64>,
    /// Carrier frequency in hertz.
    pub carrier: f64,
}

impl TdoaFingerprint {
    /// Number of antennas N (one more than the stored difference count).
    pub fn antenna_count(&self) -> usize {
        self.deltas.len() + 1
    }

    /// Arrival-time difference of antenna `n` relative to antenna 0; zero by
    /// convention for n = 0.
    pub fn delta(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.deltas[n - 1]
        }
    }

    /// Pair delay `ToA(i) - ToA(j) = delta(i) - delta(j)`, the alignment
    /// shift applied to antenna j's signal when correlating it against
    /// antenna i's.
    pub fn pair_delay(&self, i: usize, j: usize) -> f64 {
        self.delta(i) - self.delta(j)
    }

    /// Relabels the fingerprint with its transmitter's alphabet index.
    pub fn with_transmitter_index(mut self, m: usize) -> Self {
        self.transmitter_index = m;
        self
    }
}

/// A reflection line for mirror-image construction: an anchor point and a
/// direction vector (need not be normalized, must be nonzero).
#[derive(Debug, Clone, Copy)]
pub struct ReflectionLine {
    /// Any point on the line.
    pub point: Point2D,
    /// Direction of the line; zero-length directions are rejected.
    pub direction: (f64, f64),
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Time of arrival over the line-of-sight path: Euclidean distance / c.
///
/// `c` is the propagation speed in meters/second and must be positive; the
/// degenerate zero-distance case returns 0.
pub fn toa(tx: Point2D, rx: Point2D, c: f64) -> f64 {
    debug_assert!(c > 0.0, "propagation speed must be positive");
    tx.distance(&rx) / c
}

/// Mirror image of `tx` across `line`. The ToA computed through the image
/// equals the reflected (single-bounce) path length divided by c, which is
/// how non-line-of-sight paths reduce to line-of-sight geometry.
pub fn mirror_image(tx: Point2D, line: ReflectionLine) -> Result<Point2D, GeometryError> {
    let (dx, dy) = line.direction;
    let norm2 = dx * dx + dy * dy;
    if norm2 == 0.0 {
        return Err(GeometryError::DegenerateReflectionLine);
    }
    // Project tx onto the line, then reflect through the foot point.
    let rx = tx.x - line.point.x;
    let ry = tx.y - line.point.y;
    let t = (rx * dx + ry * dy) / norm2;
    let foot = Point2D::new(line.point.x + t * dx, line.point.y + t * dy);
    Ok(Point2D::new(2.0 * foot.x - tx.x, 2.0 * foot.y - tx.y))
}

/// TDoA fingerprint of a transmitter at `tx` seen by `array`: per-element
/// ToA differences relative to element 0, at carrier `f_c`.
///
/// The fingerprint is labeled with transmitter index 0; use
/// [`TdoaFingerprint::with_transmitter_index`] to relabel inside an alphabet.
pub fn fingerprint(
    tx: Point2D,
    array: &MdArray,
    c: f64,
    f_c: f64,
) -> Result<TdoaFingerprint, GeometryError> {
    if array.len() < 2 {
        return Err(GeometryError::TooFewElements(array.len()));
    }
    let t0 = toa(tx, array.element_position(0), c);
    let deltas = (1..array.len())
        .map(|n| toa(tx, array.element_position(n), c) - t0)
        .collect();
    Ok(TdoaFingerprint {
        transmitter_index: 0,
        deltas,
        carrier: f_c,
    })
}

/// Rigid displacement of the array after `t_c` seconds of motion: the center
/// translates by `t_c * speed` along the heading; element offsets are
/// unchanged (no rotation).
pub fn displace(array: &MdArray, mobility: MobilityState, t_c: f64) -> MdArray {
    debug_assert!(t_c >= 0.0, "displacement time must be nonnegative");
    let step = t_c * mobility.speed;
    MdArray {
        center: Point2D::new(
            array.center.x + step * mobility.heading.cos(),
            array.center.y + step * mobility.heading.sin(),
        ),
        elements: array.elements.clone(),
    }
}

/// Change of the transmitter bearing after a displacement of length `step`
/// along `heading`, for a transmitter initially at distance `d` and bearing
/// `theta`: returns `theta - theta'` where `d' e^{j theta'} = d e^{j theta} +
/// step e^{j heading}`.
///
/// Only defined for `step < d` (the displacement must not reach the
/// transmitter).
pub fn theta_e(d: f64, theta: f64, step: f64, heading: f64) -> Result<f64, GeometryError> {
    if step >= d {
        return Err(GeometryError::StepExceedsDistance { step, d });
    }
    if step == 0.0 {
        return Ok(0.0);
    }
    let x = d * theta.cos() + step * heading.cos();
    let y = d * theta.sin() + step * heading.sin();
    let theta_prime = y.atan2(x);
    Ok(wrap_angle(theta - theta_prime))
}

/// Uniform sample over the disk of the given radius centered at the origin,
/// rejecting positions within `clearance` meters of any exclusion point.
/// Used to place the receiver inside the circular cell away from near-field
/// degeneracy at the transmitters.
pub fn sample_disk_position<R: Rng + ?Sized>(
    rng: &mut R,
    radius: f64,
    exclusions: &[Point2D],
    clearance: f64,
) -> Point2D {
    loop {
        let r = radius * rng.gen::<f64>().sqrt();
        let a = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let p = Point2D::new(r * a.cos(), r * a.sin());
        if exclusions.iter().all(|e| p.distance(e) >= clearance) {
            return p;
        }
    }
}

/// Normalizes an angle to [0, 2*PI).
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = a.rem_euclid(two_pi);
    if r == two_pi {
        0.0
    } else {
        r
    }
}

/// Wraps an angle difference to (-PI, PI].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const C: f64 = 3.0e8;

    #[test]
    fn toa_is_distance_over_c() {
        assert_eq!(toa(Point2D::new(0.0, 0.0), Point2D::new(300.0, 0.0), C), 1.0e-6);
        assert_eq!(toa(Point2D::new(4.0, -2.0), Point2D::new(4.0, -2.0), C), 0.0);
        // Long skewed baseline against the double-precision norm.
        let tx = Point2D::new(0.0, 1000.0);
        let rx = Point2D::new(0.005, 0.0);
        let want = (0.005f64.powi(2) + 1000.0f64.powi(2)).sqrt() / C;
        assert!((toa(tx, rx, C) - want).abs() <= 1e-22);
    }

    #[test]
    fn mirror_image_axis_cases() {
        let x_axis = ReflectionLine {
            point: Point2D::new(0.0, 0.0),
            direction: (1.0, 0.0),
        };
        let img = mirror_image(Point2D::new(2.0, 3.0), x_axis).unwrap();
        assert_eq!(img, Point2D::new(2.0, -3.0));

        // A point on the line is a fixed point.
        let img = mirror_image(Point2D::new(7.5, 0.0), x_axis).unwrap();
        assert_eq!(img, Point2D::new(7.5, 0.0));

        // On the 45-degree line through the origin.
        let diag = ReflectionLine {
            point: Point2D::new(0.0, 0.0),
            direction: (1.0, 1.0),
        };
        let img = mirror_image(Point2D::new(1.0, 1.0), diag).unwrap();
        assert!((img.x - 1.0).abs() <= 1e-15 && (img.y - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn mirror_image_rejects_zero_direction() {
        let line = ReflectionLine {
            point: Point2D::new(0.0, 0.0),
            direction: (0.0, 0.0),
        };
        assert!(matches!(
            mirror_image(Point2D::new(1.0, 2.0), line),
            Err(GeometryError::DegenerateReflectionLine)
        ));
    }

    #[test]
    fn fingerprint_simple_path_differences() {
        // Two elements equidistant from the transmitter.
        let array = MdArray::new(
            Point2D::new(0.0, 0.0),
            vec![
                ArrayElement { l: 1.0, phi: 0.5 },
                ArrayElement { l: 1.0, phi: -0.5 },
            ],
        )
        .unwrap();
        let fp = fingerprint(Point2D::new(-50.0, 0.0), &array, C, 30e9).unwrap();
        assert!(fp.delta(1).abs() <= 1e-18);

        // Second element exactly 3 m farther along the boresight.
        let array = MdArray::new(
            Point2D::new(100.0, 0.0),
            vec![
                ArrayElement { l: 2.0, phi: 0.0 },
                ArrayElement { l: 5.0, phi: 0.0 },
            ],
        )
        .unwrap();
        let fp = fingerprint(Point2D::new(0.0, 0.0), &array, C, 30e9).unwrap();
        assert!((fp.delta(1) - 1.0e-8).abs() <= 1e-22);
    }

    #[test]
    fn fingerprint_matches_per_element_toa() {
        let array =
            MdArray::circular(Point2D::new(20.0, -35.0), 7, 0.1, 0.3).unwrap();
        let tx = Point2D::new(100.0 * 0.6, 100.0 * 0.8);
        let fp = fingerprint(tx, &array, C, 30e9).unwrap();
        let t0 = toa(tx, array.element_position(0), C);
        for n in 1..7 {
            let want = toa(tx, array.element_position(n), C) - t0;
            assert!((fp.delta(n) - want).abs() <= 1e-20);
        }
        assert_eq!(fp.antenna_count(), 7);
    }

    #[test]
    fn displace_translates_center_only() {
        let array = MdArray::circular(Point2D::new(1.0, 2.0), 5, 0.1, 0.0).unwrap();
        let same = displace(
            &array,
            MobilityState {
                speed: 12.0,
                heading: 1.0,
            },
            0.0,
        );
        assert_eq!(same.center, array.center);

        let moved = displace(
            &array,
            MobilityState {
                speed: 10.0,
                heading: 0.0,
            },
            1.0,
        );
        assert!((moved.center.x - 11.0).abs() <= 1e-12);
        assert_eq!(moved.center.y, array.center.y);

        let moved = displace(
            &array,
            MobilityState {
                speed: 30.0 / 3.6,
                heading: std::f64::consts::FRAC_PI_2,
            },
            0.5,
        );
        assert!((moved.center.y - (2.0 + 30.0 / 3.6 * 0.5)).abs() <= 1e-12);
        for n in 0..5 {
            let e0 = array.element(n);
            let e1 = moved.element(n);
            assert_eq!(e0.l, e1.l);
            assert_eq!(e0.phi, e1.phi);
        }
    }

    #[test]
    fn theta_e_reference_cases() {
        // Motion directly away from the transmitter does not change bearing.
        let e = theta_e(100.0, 0.7, 3.0, 0.7).unwrap();
        assert!(e.abs() <= 1e-15);

        // Perpendicular unit step at 100 m: |theta_e| = atan(0.01).
        let e = theta_e(100.0, 0.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((e.abs() - 0.00999966668666523821).abs() <= 1e-15);

        assert_eq!(theta_e(100.0, 1.0, 0.0, 2.0).unwrap(), 0.0);

        assert!(matches!(
            theta_e(1.0, 0.0, 1.0, 0.0),
            Err(GeometryError::StepExceedsDistance { .. })
        ));
    }

    #[test]
    fn fingerprint_translation_invariance_in_far_field() {
        // Rigid translation of the array along the transmitter direction by
        // one carrier wavelength leaves the TDoA fingerprint unchanged to
        // below femtosecond scale at d = 100 m, L = 0.1 m.
        let lambda = 0.01;
        let dir = 0.9_f64;
        let tx = Point2D::new(100.0 * dir.cos(), 100.0 * dir.sin());
        let array = MdArray::circular(Point2D::new(0.0, 0.0), 7, 0.1, 0.123).unwrap();
        let translated = MdArray::circular(
            Point2D::new(lambda * dir.cos(), lambda * dir.sin()),
            7,
            0.1,
            0.123,
        )
        .unwrap();
        let fp0 = fingerprint(tx, &array, C, 30e9).unwrap();
        let fp1 = fingerprint(tx, &translated, C, 30e9).unwrap();
        for n in 1..7 {
            assert!(
                (fp0.delta(n) - fp1.delta(n)).abs() < 1e-15,
                "antenna {n}: {} vs {}",
                fp0.delta(n),
                fp1.delta(n)
            );
        }
    }

    #[test]
    fn disk_sampler_respects_bounds_and_clearance() {
        let exclusions: Vec<Point2D> = (0..4)
            .map(|m| {
                let a = 2.0 * std::f64::consts::PI * m as f64 / 4.0;
                Point2D::new(100.0 * a.cos(), 100.0 * a.sin())
            })
            .collect();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let origin = Point2D::new(0.0, 0.0);
        for _ in 0..100_000 {
            let p = sample_disk_position(&mut rng, 100.0, &exclusions, 1.0);
            assert!(p.distance(&origin) <= 100.0);
            for e in &exclusions {
                assert!(p.distance(e) >= 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn pair_delay_is_antisymmetric(
            cx in -50.0f64..50.0,
            cy in -50.0f64..50.0,
            tx in -100.0f64..100.0,
            ty in -100.0f64..100.0,
            orient in 0.0f64..std::f64::consts::TAU,
        ) {
            let array = MdArray::circular(Point2D::new(cx, cy), 7, 0.1, orient).unwrap();
            let txp = Point2D::new(tx, ty);
            let fp = fingerprint(txp, &array, C, 30e9).unwrap();
            for i in 0..7 {
                for j in 0..7 {
                    prop_assert_eq!(fp.pair_delay(i, j), -fp.pair_delay(j, i));
                }
            }
        }

        #[test]
        fn mirror_preserves_distance_to_line_points(
            px in -10.0f64..10.0,
            py in -10.0f64..10.0,
            dx in -2.0f64..2.0,
            dy in -2.0f64..2.0,
            tx in -20.0f64..20.0,
            ty in -20.0f64..20.0,
            t in -5.0f64..5.0,
        ) {
            prop_assume!(dx * dx + dy * dy > 1e-6);
            let line = ReflectionLine {
                point: Point2D::new(px, py),
                direction: (dx, dy),
            };
            let p = Point2D::new(tx, ty);
            let img = mirror_image(p, line).unwrap();
            // Arbitrary point on the line.
            let q = Point2D::new(px + t * dx, py + t * dy);
            prop_assert!((p.distance(&q) - img.distance(&q)).abs() <= 1e-12);
        }

        #[test]
        fn theta_e_satisfies_the_displacement_constraint(
            d in 1.0f64..500.0,
            theta in 0.0f64..std::f64::consts::TAU,
            frac in 0.0001f64..0.5,
            heading in 0.0f64..std::f64::consts::TAU,
        ) {
            let step = frac * d;
            let e = theta_e(d, theta, step, heading).unwrap();
            let theta_prime = theta - e;
            // Imaginary part of the displacement relation in the rotated
            // frame must vanish: d sin(theta_e) + step sin(heading - theta') = 0.
            let residual = d * e.sin() + step * (heading - theta_prime).sin();
            prop_assert!(residual.abs() <= 1e-12 * d.max(1.0),
                "residual {residual} at d={d} step={step}");
        }
    }
}
