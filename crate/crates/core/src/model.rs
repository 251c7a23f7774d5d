//! Domain types for the siting problem and the reference objective evaluation.
//!
//! The placement objective over binary selections `x` of candidate locations is
//! the weighted sum of three terms:
//!
//! * `Z1 = gamma1 * (sum_ij d[i][j] x_j) / P` — average distance from the
//!   points of interest to the selected stations (minimized),
//! * `Z2 = -gamma2 * (sum_ij e[i][j] x_j) / X` — average distance from the
//!   existing stations to the selected ones (maximized, hence the sign), with
//!   `Z2 = 0` when there are no existing stations,
//! * `Z3 = -gamma3 * sum_{i<j} q[i][j] x_i x_j` — pairwise separation between
//!   selected stations (maximized).
//!
//! A fixed number `cs_count` of stations is selected; solvers enforce that via
//! a feasible move set or via the quadratic penalty added in [`crate::qubo`].

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Validation and evaluation failures over the domain types.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("matrix {matrix} has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    DimensionMismatch {
        matrix: &'static str,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("matrix {matrix}[{row}][{col}] = {value} is negative or not finite")]
    BadDistance {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("q[{i}][{j}] = {forward} but q[{j}][{i}] = {backward}; q must be symmetric")]
    AsymmetricQ {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("q[{i}][{i}] = {value}; the diagonal must be zero")]
    NonzeroQDiagonal { i: usize, value: f64 },
    #[error("cs_count {cs} exceeds candidate count {candidates}")]
    CsExceedsCandidates { cs: usize, candidates: usize },
    #[error("cs_count must be at least 1")]
    CsZero,
    #[error("at least one point of interest is required")]
    NoPois,
    #[error("duplicate site id `{0}`")]
    DuplicateSiteId(String),
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("assignment has {got} bits, instance has {expected} candidates")]
    AssignmentLength { expected: usize, got: usize },
    #[error("selection is empty; at least one station is required")]
    EmptySelection,
    #[error("weight {name} = {value} must be finite and non-negative")]
    BadWeight { name: &'static str, value: f64 },
}

/// A point on the sphere, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> GeoPoint<T> {
    /// Checked constructor: latitude in [-90, 90], longitude in [-180, 180].
    pub fn new(lat: T, lon: T) -> Result<Self, ModelError> {
        if !lat.is_finite() || lat < T::of(-90.0) || lat > T::of(90.0) {
            return Err(ModelError::LatitudeOutOfRange(
                lat.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if !lon.is_finite() || lon < T::of(-180.0) || lon > T::of(180.0) {
            return Err(ModelError::LongitudeOutOfRange(
                lon.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { lat, lon })
    }
}

/// What a site is in the input data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    /// Point of interest served by the stations (hotel, restaurant, ...).
    Poi,
    /// Charging station already in operation.
    ExistingCs,
    /// Location where a new station may be placed.
    Candidate,
}

/// A geolocated site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site<T> {
    pub id: String,
    pub point: GeoPoint<T>,
    pub kind: SiteKind,
    /// Free-form category ("hotel", "parking", ...); may be empty.
    #[serde(default)]
    pub tag: String,
}

impl<T: Scalar> Site<T> {
    pub fn new(id: impl Into<String>, point: GeoPoint<T>, kind: SiteKind) -> Self {
        Self {
            id: id.into(),
            point,
            kind,
            tag: String::new(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }
}

/// Binary selection over the candidate locations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Assignment of length `len` with exactly the listed indices selected.
    pub fn from_selected(selected: &[usize], len: usize) -> Self {
        let mut bits = vec![false; len];
        for &j in selected {
            bits[j] = true;
        }
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_selected(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Selected indices in ascending order.
    pub fn selected(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }
}

/// Multipliers blending the three objective terms, plus the weight of the
/// quadratic penalty that enforces the fixed station count in QUBO form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
    pub lambda_card: T,
}

impl<T: Scalar> Weights<T> {
    /// Checked constructor: every weight finite and non-negative.
    pub fn new(gamma1: T, gamma2: T, gamma3: T, lambda_card: T) -> Result<Self, ModelError> {
        let w = Self {
            gamma1,
            gamma2,
            gamma3,
            lambda_card,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("lambda_card", self.lambda_card),
        ] {
            if !value.is_finite() || value < T::zero() {
                return Err(ModelError::BadWeight {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// The default multiplier rule, scaled by the candidate count `e`:
    /// `gamma1 = 4e`, `gamma2 = e/3`, `gamma3 = 1.7e`.
    pub fn gamma_rule(e: usize) -> (T, T, T) {
        let e = T::of_usize(e);
        (e * T::of(4.0), e / T::of(3.0), e * T::of(1.7))
    }

    /// Default weights for an instance: the gamma rule above, plus a penalty
    /// weight `lambda_card = 2 * cs * M * e` where `M` is the largest
    /// magnitude among the objective's linear and quadratic coefficients.
    /// That penalty makes any cardinality violation cost more than the best
    /// possible objective gain, so QUBO minima stay feasible.
    pub fn auto_for(inst: &ProblemInstance<T>) -> Self {
        let (gamma1, gamma2, gamma3) = Self::gamma_rule(inst.candidate_count());
        Self::auto_with_gammas(inst, gamma1, gamma2, gamma3)
    }

    /// Same penalty rule as [`Weights::auto_for`], but for caller-chosen
    /// gammas.
    pub fn auto_with_gammas(inst: &ProblemInstance<T>, gamma1: T, gamma2: T, gamma3: T) -> Self {
        let e = inst.candidate_count();
        let probe = Self {
            gamma1,
            gamma2,
            gamma3,
            lambda_card: T::zero(),
        };
        let mut max_mag = T::zero();
        for a in linear_objective_coeffs(inst, &probe) {
            max_mag = max_mag.max(a.abs());
        }
        for i in 0..e {
            for j in (i + 1)..e {
                max_mag = max_mag.max((gamma3 * inst.pair_dist().get(i, j)).abs());
            }
        }
        // Degenerate all-zero instances still need a binding penalty.
        let lambda_card = if max_mag > T::zero() {
            T::of(2.0) * T::of_usize(inst.cs_count()) * max_mag * T::of_usize(e)
        } else {
            T::one()
        };
        Self {
            gamma1,
            gamma2,
            gamma3,
            lambda_card,
        }
    }
}

/// The three objective terms and their sum for one assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms<T> {
    pub z1: T,
    pub z2: T,
    pub z3: T,
    pub total: T,
}

/// A validated siting instance: site lists, the three distance matrices, and
/// the number of new stations to place. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pois: Vec<Site<T>>,
    existing: Vec<Site<T>>,
    candidates: Vec<Site<T>>,
    cs_count: usize,
    /// POI -> candidate distances, `P x E`, km.
    d: Matrix<T>,
    /// existing-station -> candidate distances, `X x E`, km.
    e: Matrix<T>,
    /// candidate <-> candidate distances, `E x E`, km, symmetric, zero diagonal.
    q: Matrix<T>,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Validating constructor. Checks shapes, finiteness, non-negativity,
    /// symmetry of `q`, id uniqueness, and `1 <= cs_count <= E`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pois: Vec<Site<T>>,
        existing: Vec<Site<T>>,
        candidates: Vec<Site<T>>,
        cs_count: usize,
        d: Matrix<T>,
        e: Matrix<T>,
        q: Matrix<T>,
    ) -> Result<Self, ModelError> {
        let inst = Self {
            pois,
            existing,
            candidates,
            cs_count,
            d,
            e,
            q,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (p, x, n) = (self.pois.len(), self.existing.len(), self.candidates.len());
        if p == 0 {
            return Err(ModelError::NoPois);
        }
        if self.cs_count == 0 {
            return Err(ModelError::CsZero);
        }
        if self.cs_count > n {
            return Err(ModelError::CsExceedsCandidates {
                cs: self.cs_count,
                candidates: n,
            });
        }

        let mut seen = std::collections::HashSet::new();
        for site in self
            .pois
            .iter()
            .chain(self.existing.iter())
            .chain(self.candidates.iter())
        {
            if !seen.insert(site.id.as_str()) {
                return Err(ModelError::DuplicateSiteId(site.id.clone()));
            }
        }

        for (name, m, rows, cols) in [
            ("d", &self.d, p, n),
            ("e", &self.e, x, n),
            ("q", &self.q, n, n),
        ] {
            if m.rows() != rows || m.cols() != cols {
                return Err(ModelError::DimensionMismatch {
                    matrix: name,
                    rows,
                    cols,
                    got_rows: m.rows(),
                    got_cols: m.cols(),
                });
            }
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let v = m.get(i, j);
                    if !v.is_finite() || v < T::zero() {
                        return Err(ModelError::BadDistance {
                            matrix: name,
                            row: i,
                            col: j,
                            value: v.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
            }
        }

        if let Some((i, j, a, b)) = self.q.first_asymmetry() {
            return Err(ModelError::AsymmetricQ {
                i,
                j,
                forward: a.to_f64().unwrap_or(f64::NAN),
                backward: b.to_f64().unwrap_or(f64::NAN),
            });
        }
        for i in 0..n {
            let v = self.q.get(i, i);
            if v != T::zero() {
                return Err(ModelError::NonzeroQDiagonal {
                    i,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    pub fn pois(&self) -> &[Site<T>] {
        &self.pois
    }

    pub fn existing(&self) -> &[Site<T>] {
        &self.existing
    }

    pub fn candidates(&self) -> &[Site<T>] {
        &self.candidates
    }

    /// `P`: number of points of interest.
    pub fn poi_count(&self) -> usize {
        self.pois.len()
    }

    /// `X`: number of existing stations.
    pub fn existing_count(&self) -> usize {
        self.existing.len()
    }

    /// `E`: number of candidate locations (the binary problem size).
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Number of new stations to place.
    pub fn cs_count(&self) -> usize {
        self.cs_count
    }

    /// POI -> candidate distances, km.
    pub fn poi_dist(&self) -> &Matrix<T> {
        &self.d
    }

    /// Existing-station -> candidate distances, km.
    pub fn existing_dist(&self) -> &Matrix<T> {
        &self.e
    }

    /// Candidate pairwise distances, km.
    pub fn pair_dist(&self) -> &Matrix<T> {
        &self.q
    }

    fn check_assignment(&self, x: &Assignment) -> Result<(), ModelError> {
        if x.len() != self.candidate_count() {
            return Err(ModelError::AssignmentLength {
                expected: self.candidate_count(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Reference evaluation of the objective terms for one assignment.
///
/// Defined for every assignment regardless of how many bits are set; the
/// station-count constraint is not checked here.
pub fn objective_components<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    x: &Assignment,
) -> Result<ObjectiveTerms<T>, ModelError> {
    inst.check_assignment(x)?;
    let selected = x.selected();

    let p = T::of_usize(inst.poi_count());
    let mut d_sum = T::zero();
    for &j in &selected {
        for i in 0..inst.poi_count() {
            d_sum = d_sum + inst.poi_dist().get(i, j);
        }
    }
    let z1 = w.gamma1 * d_sum / p;

    let z2 = if inst.existing_count() == 0 {
        T::zero()
    } else {
        let xc = T::of_usize(inst.existing_count());
        let mut e_sum = T::zero();
        for &j in &selected {
            for i in 0..inst.existing_count() {
                e_sum = e_sum + inst.existing_dist().get(i, j);
            }
        }
        -(w.gamma2 * e_sum / xc)
    };

    let mut q_sum = T::zero();
    for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            q_sum = q_sum + inst.pair_dist().get(i, j);
        }
    }
    let z3 = -(w.gamma3 * q_sum);

    Ok(ObjectiveTerms {
        z1,
        z2,
        z3,
        total: z1 + z2 + z3,
    })
}

/// Per-candidate linear objective coefficient:
/// `a_j = gamma1 * colsum(d, j) / P - gamma2 * colsum(e, j) / X` (second term
/// dropped when there are no existing stations). The objective of a selection
/// `S` is `sum_{j in S} a_j + sum_{i<j in S} -gamma3 * q[i][j]`.
pub fn linear_objective_coeffs<T: Scalar>(inst: &ProblemInstance<T>, w: &Weights<T>) -> Vec<T> {
    let p = T::of_usize(inst.poi_count());
    let x = inst.existing_count();
    (0..inst.candidate_count())
        .map(|j| {
            let mut a = w.gamma1 * inst.poi_dist().col_sum(j) / p;
            if x > 0 {
                a = a - w.gamma2 * inst.existing_dist().col_sum(j) / T::of_usize(x);
            }
            a
        })
        .collect()
}

/// Quadratic objective coefficient for the candidate pair `(i, j)`, `i != j`.
pub fn pair_objective_coeff<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    i: usize,
    j: usize,
) -> T {
    -(w.gamma3 * inst.pair_dist().get(i, j))
}
