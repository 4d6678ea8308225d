//! Transmitter-index detectors: the TDoA-weighted correlation detector,
//! its magnitude variant, a phase-only feature detector, pilot-aided
//! reference estimation, and the channel-matching baseline.
//!
//! The optimal detector for direction keying correlates each antenna pair's
//! received signals at the candidate transmitter's TDoA and rotates the
//! result by the conjugate carrier phase of that TDoA:
//!
//! `S(m) = sum_{i=2..N} (1/(i-1)) sum_{j<i} Re{ w^m_ij C_ij(dtau^m_ij) }`,
//!
//! where `C_ij(delta) = int r_j(t - delta) r_i*(t) dt` and
//! `w^m_ij = exp(-j 2 PI f_c dtau^m_ij)`. For the true transmitter every
//! pair term collapses to `rho^2 E_s` regardless of the common oscillator
//! phase, which cancels inside `C_ij`; that cancellation is the detector's
//! phase-noise immunity and is asserted, not assumed, by the tests.
//!
//! Correlations come from either path: explicit sampled grids (oracle) or
//! precomputed analytic pair statistics (fast Monte Carlo). The magnitude
//! variant drops the weights and sums `|C_ij|`; the feature detector
//! compresses an N-vector observation into a phase-only, scale-invariant
//! feature and matches by inner product. Ties always resolve to the lowest
//! index so decisions are deterministic.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::geometry::TdoaFingerprint;
use crate::waveform::{cross_correlate, SampleGrid, WaveformError};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of reference building and detection.
#[derive(Debug, Error)]
pub enum DetectionError {
    /// Fingerprints with mismatched antenna counts or carriers.
    #[error("inconsistent reference set: {0}")]
    InconsistentReference(String),
    /// A detector needs at least two candidate transmitters.
    #[error("alphabet must have at least 2 transmitters, got {0}")]
    AlphabetTooSmall(usize),
    /// Candidate index outside the reference alphabet.
    #[error("transmitter index {m} outside alphabet of size {m_count}")]
    InvalidTransmitterIndex {
        /// Requested index.
        m: usize,
        /// Alphabet size.
        m_count: usize,
    },
    /// An analytic observation is missing a pair correlation.
    #[error("missing pair correlation for candidate {m}, antennas ({i}, {j})")]
    MissingPairCorrelation {
        /// Candidate transmitter.
        m: usize,
        /// Later antenna of the pair.
        i: usize,
        /// Earlier antenna of the pair.
        j: usize,
    },
    /// Observation shape does not match the reference.
    #[error("observation inconsistent with reference: {0}")]
    InconsistentObservation(String),
    /// Pilot averaging over an empty set.
    #[error("pilot set is empty")]
    EmptyPilotSet,
    /// First-antenna entry too small to de-rotate against.
    #[error("degenerate reference: first-antenna magnitude {mag:.3e} below 1e-12 of norm {norm:.3e}")]
    DegenerateReference {
        /// First-entry magnitude.
        mag: f64,
        /// Vector norm.
        norm: f64,
    },
    /// Sampled-path correlation failure.
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}

// ---------------------------------------------------------------------------
// References
// ---------------------------------------------------------------------------

/// Detector reference for the TDoA detector: the fingerprint alphabet and
/// the precomputed unit-modulus pair weights `exp(-j 2 PI f_c dtau^m_ij)`.
#[derive(Debug, Clone)]
pub struct DskReference {
    fingerprints: Vec<TdoaFingerprint>,
    /// weights[m][pair(i,j)] with pair(i,j) = i(i-1)/2 + j for j < i.
    weights: Vec<Vec<Complex64>>,
    n_antennas: usize,
}

/// Flat index of antenna pair (i, j), j < i.
fn pair_index(i: usize, j: usize) -> usize {
    i * (i - 1) / 2 + j
}

impl DskReference {
    /// Builds the reference from one fingerprint per transmitter; weights
    /// are derived solely from the fingerprints and their carrier.
    pub fn new(fingerprints: Vec<TdoaFingerprint>) -> Result<Self, DetectionError> {
        let first = fingerprints
            .first()
            .ok_or(DetectionError::AlphabetTooSmall(0))?;
        let n = first.antenna_count();
        let carrier = first.carrier;
        for fp in &fingerprints {
            if fp.antenna_count() != n {
                return Err(DetectionError::InconsistentReference(format!(
                    "antenna counts differ: {} vs {}",
                    fp.antenna_count(),
                    n
                )));
            }
            if fp.carrier != carrier {
                return Err(DetectionError::InconsistentReference(format!(
                    "carriers differ: {} Hz vs {} Hz",
                    fp.carrier, carrier
                )));
            }
        }
        let weights = fingerprints
            .iter()
            .map(|fp| {
                let mut w = Vec::with_capacity(n * (n - 1) / 2);
                for i in 1..n {
                    for j in 0..i {
                        let phase =
                            -2.0 * std::f64::consts::PI * carrier * fp.pair_delay(i, j);
                        w.push(Complex64::from_polar(1.0, phase));
                    }
                }
                w
            })
            .collect();
        Ok(Self {
            fingerprints,
            weights,
            n_antennas: n,
        })
    }

    /// Alphabet size M.
    pub fn m_count(&self) -> usize {
        self.fingerprints.len()
    }

    /// Antenna count N.
    pub fn antenna_count(&self) -> usize {
        self.n_antennas
    }

    /// Fingerprint of candidate `m`.
    pub fn fingerprint(&self, m: usize) -> &TdoaFingerprint {
        &self.fingerprints[m]
    }

    /// Alignment shift `dtau^m_ij` for pair (i, j), j < i, in seconds.
    pub fn pair_shift(&self, m: usize, i: usize, j: usize) -> f64 {
        self.fingerprints[m].pair_delay(i, j)
    }

    /// Unit-modulus carrier weight for pair (i, j), j < i.
    pub fn weight(&self, m: usize, i: usize, j: usize) -> Complex64 {
        self.weights[m][pair_index(i, j)]
    }

    fn check_m(&self, m: usize) -> Result<(), DetectionError> {
        if m >= self.m_count() {
            return Err(DetectionError::InvalidTransmitterIndex {
                m,
                m_count: self.m_count(),
            });
        }
        Ok(())
    }
}

/// Channel-coefficient references, one complex N-vector per transmitter.
#[derive(Debug, Clone)]
pub struct CsiReference {
    refs: Vec<Vec<Complex64>>,
}

impl CsiReference {
    /// Validated constructor: nonempty, equal-length, finite vectors.
    pub fn new(refs: Vec<Vec<Complex64>>) -> Result<Self, DetectionError> {
        let first = refs.first().ok_or(DetectionError::AlphabetTooSmall(0))?;
        let n = first.len();
        for (m, h) in refs.iter().enumerate() {
            if h.len() != n || n == 0 {
                return Err(DetectionError::InconsistentReference(format!(
                    "reference {m} has {} entries, expected {n}",
                    h.len()
                )));
            }
            if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(DetectionError::InconsistentReference(format!(
                    "reference {m} has non-finite entries"
                )));
            }
        }
        Ok(Self { refs })
    }

    /// Alphabet size M.
    pub fn m_count(&self) -> usize {
        self.refs.len()
    }

    /// Antenna count N.
    pub fn antenna_count(&self) -> usize {
        self.refs[0].len()
    }

    /// Reference vector of transmitter `m`.
    pub fn vector(&self, m: usize) -> &[Complex64] {
        &self.refs[m]
    }
}

/// Phase-only, amplitude- and common-rotation-invariant feature of an
/// N-vector: the unit-modulus relative phases of antennas 2..N against
/// antenna 1, scaled to unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFeature {
    entries: Vec<Complex64>,
}

impl PhaseFeature {
    /// Extracts the feature from a complex N-vector (N >= 2).
    ///
    /// Entry k is `(h_{k+1}/h_0) / |h_{k+1}/h_0| / sqrt(N-1)`; a zero tail
    /// entry contributes the neutral phase 1. Fails when the first entry is
    /// too small to de-rotate against (magnitude below `1e-12 ||h||`).
    pub fn from_vector(h: &[Complex64]) -> Result<Self, DetectionError> {
        if h.len() < 2 {
            return Err(DetectionError::InconsistentObservation(format!(
                "feature needs at least 2 antennas, got {}",
                h.len()
            )));
        }
        let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mag0 = h[0].norm();
        if mag0 < 1e-12 * norm || norm == 0.0 {
            return Err(DetectionError::DegenerateReference { mag: mag0, norm });
        }
        let scale = 1.0 / ((h.len() - 1) as f64).sqrt();
        let entries = h[1..]
            .iter()
            .map(|&z| {
                let rel = z / h[0];
                let m = rel.norm();
                if m == 0.0 {
                    Complex64::new(scale, 0.0)
                } else {
                    rel / m * scale
                }
            })
            .collect();
        Ok(Self { entries })
    }

    /// The ideal feature of a TDoA fingerprint: relative phases
    /// `exp(-j 2 PI f_c delta_k)` without any amplitude information.
    pub fn from_fingerprint(fp: &TdoaFingerprint) -> Self {
        let n = fp.antenna_count();
        let scale = 1.0 / ((n - 1) as f64).sqrt();
        let entries = (1..n)
            .map(|k| {
                Complex64::from_polar(
                    scale,
                    -2.0 * std::f64::consts::PI * fp.carrier * fp.delta(k),
                )
            })
            .collect();
        Self { entries }
    }

    /// Feature entries ((N-1)-vector, each of magnitude `1/sqrt(N-1)`).
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Inner product magnitude `|<self, other>|`, in [0, 1] for equal-length
    /// features.
    pub fn correlation(&self, other: &PhaseFeature) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            .norm()
    }
}

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

/// Analytic sufficient statistics: the pair correlations
/// `C_ij(dtau^m_ij)` for every candidate m and pair (i, j), j < i.
#[derive(Debug, Clone)]
pub struct PairStatistics {
    n_antennas: usize,
    m_count: usize,
    /// values[m][pair(i,j)]; None marks a pair never filled in.
    values: Vec<Vec<Option<Complex64>>>,
}

impl PairStatistics {
    /// An empty table for `n_antennas` antennas and `m_count` candidates.
    pub fn new(n_antennas: usize, m_count: usize) -> Self {
        let pairs = n_antennas * (n_antennas - 1) / 2;
        Self {
            n_antennas,
            m_count,
            values: vec![vec![None; pairs]; m_count],
        }
    }

    /// Records the correlation of pair (i, j), j < i, at candidate m's shift.
    pub fn set(&mut self, m: usize, i: usize, j: usize, value: Complex64) {
        self.values[m][pair_index(i, j)] = Some(value);
    }

    /// The recorded correlation, if present.
    pub fn get(&self, m: usize, i: usize, j: usize) -> Option<Complex64> {
        self.values[m][pair_index(i, j)]
    }
}

/// One received symbol, in whichever representation the trial produced.
#[derive(Debug, Clone)]
pub enum Observation {
    /// Explicit per-antenna sample grids (oracle path); correlations are
    /// evaluated on demand by band-limited cross-correlation.
    Sampled(Vec<SampleGrid>),
    /// Precomputed pair correlations (fast analytic path).
    Analytic(PairStatistics),
}

/// One pair's contribution to the detector statistic.
#[derive(Debug, Clone, Copy)]
pub struct PairTerm {
    /// Later antenna of the pair.
    pub i: usize,
    /// Earlier antenna of the pair.
    pub j: usize,
    /// Raw correlation `C_ij(dtau^m_ij)`.
    pub correlation: Complex64,
    /// Weighted real part `Re(w^m_ij C_ij)` entering the statistic.
    pub weighted: f64,
}

/// Visits every pair (i, j), j < i, with its correlation at candidate `m`.
fn for_each_pair<F>(
    obs: &Observation,
    reference: &DskReference,
    m: usize,
    mut visit: F,
) -> Result<(), DetectionError>
where
    F: FnMut(usize, usize, Complex64),
{
    reference.check_m(m)?;
    let n = reference.antenna_count();
    match obs {
        Observation::Sampled(grids) => {
            if grids.len() != n {
                return Err(DetectionError::InconsistentObservation(format!(
                    "{} grids for {} antennas",
                    grids.len(),
                    n
                )));
            }
            for i in 1..n {
                for j in 0..i {
                    let shift = reference.pair_shift(m, i, j);
                    let c = cross_correlate(&grids[j], &grids[i], shift)?;
                    visit(i, j, c);
                }
            }
        }
        Observation::Analytic(stats) => {
            if stats.n_antennas != n || stats.m_count != reference.m_count() {
                return Err(DetectionError::InconsistentObservation(format!(
                    "statistics shaped ({}, {}) for reference ({}, {})",
                    stats.n_antennas,
                    stats.m_count,
                    n,
                    reference.m_count()
                )));
            }
            for i in 1..n {
                for j in 0..i {
                    let c = stats
                        .get(m, i, j)
                        .ok_or(DetectionError::MissingPairCorrelation { m, i, j })?;
                    visit(i, j, c);
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Detectors
// ---------------------------------------------------------------------------

/// The detector statistic
/// `S(m) = sum_{i>=1} (1/i) sum_{j<i} Re(w^m_ij C_ij(dtau^m_ij))`
/// (0-based antenna indices; the 1/i factor averages each antenna's pair
/// contributions).
pub fn dsk_statistic(
    obs: &Observation,
    reference: &DskReference,
    m: usize,
) -> Result<f64, DetectionError> {
    let mut acc = 0.0;
    for_each_pair(obs, reference, m, |i, j, c| {
        let w = reference.weight(m, i, j);
        acc += (w * c).re / i as f64;
    })?;
    Ok(acc)
}

/// The magnitude-variant statistic: `sum (1/i) sum_{j<i} |C_ij|`, needing
/// no carrier weights at all.
pub fn dsk_statistic_magnitude(
    obs: &Observation,
    reference: &DskReference,
    m: usize,
) -> Result<f64, DetectionError> {
    let mut acc = 0.0;
    for_each_pair(obs, reference, m, |i, _j, c| {
        acc += c.norm() / i as f64;
    })?;
    Ok(acc)
}

/// The per-pair breakdown of the statistic at candidate `m`, for
/// diagnostics and identity tests.
pub fn dsk_pair_terms(
    obs: &Observation,
    reference: &DskReference,
    m: usize,
) -> Result<Vec<PairTerm>, DetectionError> {
    let mut terms = Vec::with_capacity(reference.antenna_count() * (reference.antenna_count() - 1) / 2);
    for_each_pair(obs, reference, m, |i, j, c| {
        terms.push(PairTerm {
            i,
            j,
            correlation: c,
            weighted: (reference.weight(m, i, j) * c).re,
        });
    })?;
    Ok(terms)
}

fn argmax_lowest<F: FnMut(usize) -> Result<f64, DetectionError>>(
    m_count: usize,
    mut score: F,
) -> Result<usize, DetectionError> {
    if m_count < 2 {
        return Err(DetectionError::AlphabetTooSmall(m_count));
    }
    let mut best = 0;
    let mut best_score = score(0)?;
    for m in 1..m_count {
        let s = score(m)?;
        // Strict inequality keeps the lowest index on ties.
        if s > best_score {
            best = m;
            best_score = s;
        }
    }
    Ok(best)
}

/// The TDoA detector: argmax of [`dsk_statistic`] over the alphabet, ties
/// to the lowest index.
pub fn dsk_detect(obs: &Observation, reference: &DskReference) -> Result<usize, DetectionError> {
    argmax_lowest(reference.m_count(), |m| dsk_statistic(obs, reference, m))
}

/// The magnitude-variant detector: argmax of [`dsk_statistic_magnitude`].
pub fn dsk_detect_magnitude(
    obs: &Observation,
    reference: &DskReference,
) -> Result<usize, DetectionError> {
    argmax_lowest(reference.m_count(), |m| {
        dsk_statistic_magnitude(obs, reference, m)
    })
}

/// Entrywise mean of the pilot vectors (the channel-coefficient estimate).
pub fn estimate_csi_reference(
    pilots: &[Vec<Complex64>],
) -> Result<Vec<Complex64>, DetectionError> {
    let first = pilots.first().ok_or(DetectionError::EmptyPilotSet)?;
    let n = first.len();
    let mut mean = vec![Complex64::new(0.0, 0.0); n];
    for p in pilots {
        if p.len() != n {
            return Err(DetectionError::InconsistentObservation(format!(
                "pilot lengths differ: {} vs {n}",
                p.len()
            )));
        }
        for (acc, v) in mean.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let scale = 1.0 / pilots.len() as f64;
    for v in &mut mean {
        *v *= scale;
    }
    Ok(mean)
}

/// Phase-only feature of the averaged pilot vector.
pub fn estimate_phase_feature(
    pilots: &[Vec<Complex64>],
) -> Result<PhaseFeature, DetectionError> {
    PhaseFeature::from_vector(&estimate_csi_reference(pilots)?)
}

/// Minimum-distance channel matching: `argmin_m ||y - h_m||^2`, ties to
/// the lowest index.
pub fn ssk_detect(y: &[Complex64], reference: &CsiReference) -> Result<usize, DetectionError> {
    if reference.m_count() < 2 {
        return Err(DetectionError::AlphabetTooSmall(reference.m_count()));
    }
    if y.len() != reference.antenna_count() {
        return Err(DetectionError::InconsistentObservation(format!(
            "observation has {} entries, references {}",
            y.len(),
            reference.antenna_count()
        )));
    }
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for m in 0..reference.m_count() {
        let d2: f64 = y
            .iter()
            .zip(reference.vector(m))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        if d2 < best_d2 {
            best = m;
            best_d2 = d2;
        }
    }
    Ok(best)
}

/// Outcome of the feature detector: the decided index and whether the
/// decision was a recorded erasure (degenerate observation resolved by a
/// uniform random pick).
#[derive(Debug, Clone, Copy)]
pub struct FeatureDecision {
    /// Decided transmitter index.
    pub index: usize,
    /// True when the observation's feature was degenerate and the index was
    /// drawn uniformly at random.
    pub erasure: bool,
}

/// Phase-feature detector: `argmax_m |<feature(y), feature_m>|`, ties to
/// the lowest index. A degenerate observation (first antenna effectively
/// zero) cannot be de-rotated; the decision is then drawn uniformly and
/// flagged as an erasure so callers can score it as an error.
pub fn dsk_detect_feature<R: Rng + ?Sized>(
    y: &[Complex64],
    features: &[PhaseFeature],
    rng: &mut R,
) -> Result<FeatureDecision, DetectionError> {
    if features.len() < 2 {
        return Err(DetectionError::AlphabetTooSmall(features.len()));
    }
    let obs = match PhaseFeature::from_vector(y) {
        Ok(f) => f,
        Err(DetectionError::DegenerateReference { .. }) => {
            return Ok(FeatureDecision {
                index: rng.gen_range(0..features.len()),
                erasure: true,
            });
        }
        Err(e) => return Err(e),
    };
    let mut best = 0;
    let mut best_corr = -1.0;
    for (m, f) in features.iter().enumerate() {
        let c = obs.correlation(f);
        if c > best_corr {
            best = m;
            best_corr = c;
        }
    }
    Ok(FeatureDecision {
        index: best,
        erasure: false,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
