//! Distance-matrix construction: great-circle (haversine) or an OSRM table
//! service, plus a keyed file cache so network results are fetched once.

mod cache;
mod osrm;

pub use cache::{
    cache_key, load_cache, load_cache_if_match, save_cache, CacheError, CachedMatrices,
};
pub use osrm::OsrmClient;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::model::{GeoPoint, Site};
use crate::scalar::Scalar;

/// Mean Earth radius, km (IUGG).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Failures while building or fetching distance matrices.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistanceError {
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("OSRM endpoint must be a non-empty URL")]
    EmptyEndpoint,
    #[error("OSRM request `{url}` failed: {reason}")]
    Transport { url: String, reason: String },
    #[error("OSRM request `{url}` returned HTTP {status}")]
    HttpStatus { url: String, status: u16 },
    #[error("OSRM response code `{code}` is not Ok")]
    ServiceCode { code: String },
    #[error("OSRM response carries no distance annotations")]
    MissingAnnotations,
    #[error("OSRM reports no route from source {source_index} to destination {destination_index}")]
    UnroutablePair {
        source_index: usize,
        destination_index: usize,
    },
    #[error("malformed OSRM response: {0}")]
    BadResponse(String),
}

/// Which engine produces the distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceBackend {
    /// Great-circle distance on a spherical Earth; pure and offline.
    Haversine,
    /// OSRM `/table` service queried over HTTP.
    OsrmTable { endpoint: String, profile: String },
}

impl DistanceBackend {
    /// OSRM backend with a checked endpoint; empty profile falls back to
    /// "driving".
    pub fn osrm(
        endpoint: impl Into<String>,
        profile: impl Into<String>,
    ) -> Result<Self, DistanceError> {
        let endpoint = endpoint.into().trim_end_matches('/').to_string();
        if endpoint.is_empty() {
            return Err(DistanceError::EmptyEndpoint);
        }
        let profile = profile.into();
        let profile = if profile.is_empty() {
            "driving".to_string()
        } else {
            profile
        };
        Ok(Self::OsrmTable { endpoint, profile })
    }

    /// Stable one-line description, used in provenance and cache keys.
    pub fn descriptor(&self) -> String {
        match self {
            Self::Haversine => "haversine".to_string(),
            Self::OsrmTable { endpoint, profile } => {
                format!("osrm-table profile={profile} endpoint={endpoint}")
            }
        }
    }
}

/// Where a matrix set came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Backend descriptor string, e.g. `haversine`.
    pub backend: String,
    /// Unix retrieval time for network backends; absent for pure ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved_unix: Option<u64>,
}

/// The three matrices a siting instance needs, plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrixSet<T> {
    /// POI -> candidate, `P x E`, km.
    pub d: Matrix<T>,
    /// Existing station -> candidate, `X x E`, km.
    pub e: Matrix<T>,
    /// Candidate <-> candidate, `E x E`, km, symmetric, zero diagonal.
    pub q: Matrix<T>,
    pub provenance: Provenance,
}

/// Great-circle distance in km between two points, spherical Earth model.
pub fn haversine_km<T: Scalar>(a: GeoPoint<T>, b: GeoPoint<T>) -> T {
    let two = T::of(2.0);
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let half_dlat = (lat2 - lat1) / two;
    let half_dlon = (b.lon - a.lon).to_radians() / two;
    let s1 = half_dlat.sin();
    let s2 = half_dlon.sin();
    let h = s1 * s1 + lat1.cos() * lat2.cos() * s2 * s2;
    // Rounding can push h a hair above 1 for near-antipodal pairs.
    let h = h.min(T::one());
    two * T::of(EARTH_RADIUS_KM) * h.sqrt().asin()
}

fn points<T: Scalar>(sites: &[Site<T>]) -> Vec<GeoPoint<T>> {
    sites.iter().map(|s| s.point).collect()
}

/// Build `d`, `e`, `q` for the given site lists with the chosen backend.
///
/// `q` is made exactly symmetric with a zero diagonal: each unordered pair is
/// resolved once, and for routed (possibly asymmetric) distances the larger
/// direction wins, a conservative choice for a separation term that is
/// maximized.
pub fn build_matrices<T: Scalar>(
    pois: &[Site<T>],
    existing: &[Site<T>],
    candidates: &[Site<T>],
    backend: &DistanceBackend,
) -> Result<DistanceMatrixSet<T>, DistanceError> {
    if candidates.is_empty() {
        return Err(DistanceError::NoCandidates);
    }
    let cand_pts = points(candidates);
    let poi_pts = points(pois);
    let exist_pts = points(existing);

    let (d, e, q_raw, provenance) = match backend {
        DistanceBackend::Haversine => {
            let d = Matrix::from_fn(poi_pts.len(), cand_pts.len(), |i, j| {
                haversine_km(poi_pts[i], cand_pts[j])
            });
            let e = Matrix::from_fn(exist_pts.len(), cand_pts.len(), |i, j| {
                haversine_km(exist_pts[i], cand_pts[j])
            });
            let q = Matrix::from_fn(cand_pts.len(), cand_pts.len(), |i, j| {
                haversine_km(cand_pts[i], cand_pts[j])
            });
            let provenance = Provenance {
                backend: backend.descriptor(),
                retrieved_unix: None,
            };
            (d, e, q, provenance)
        }
        DistanceBackend::OsrmTable { endpoint, profile } => {
            let client = OsrmClient::new(endpoint, profile)?;
            let d = if poi_pts.is_empty() {
                Matrix::zeros(0, cand_pts.len())
            } else {
                client.table_km(&poi_pts, &cand_pts)?
            };
            let e = if exist_pts.is_empty() {
                Matrix::zeros(0, cand_pts.len())
            } else {
                client.table_km(&exist_pts, &cand_pts)?
            };
            let q = client.table_km(&cand_pts, &cand_pts)?;
            let provenance = Provenance {
                backend: backend.descriptor(),
                retrieved_unix: Some(unix_now()),
            };
            (d, e, q, provenance)
        }
    };

    Ok(DistanceMatrixSet {
        d,
        e,
        q: symmetrize_max(&q_raw),
        provenance,
    })
}

/// `out[i][j] = out[j][i] = max(m[i][j], m[j][i])`, zero diagonal.
fn symmetrize_max<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m.get(i, j).max(m.get(j, i));
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
