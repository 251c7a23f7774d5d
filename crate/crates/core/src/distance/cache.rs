//! File-backed cache for distance matrix sets.
//!
//! A cache file is valid for exactly one (site coordinates, backend) pair,
//! captured as a SHA-256 key over the coordinate bit patterns in order plus
//! the backend descriptor. Loading checks the key, so a cache can never be
//! reused across edited inputs or a different backend.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DistanceMatrixSet, Provenance};
use crate::files::MatrixDto;
use crate::model::Site;

const FORMAT: &str = "evsite-matrix-cache";
const VERSION: u32 = 1;

/// Cache file failures. A missing file is not an error for
/// [`load_cache_if_match`]; corrupt or foreign files always are.
#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache I/O failed for {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path} is not a usable matrix cache: {reason}")]
    Invalid { path: String, reason: String },
    #[error("{path} has format `{got}`, expected `{FORMAT}`")]
    WrongFormat { path: String, got: String },
    #[error("{path} has version {got}, supported version is {VERSION}")]
    WrongVersion { path: String, got: u32 },
}

/// A loaded cache: the key it was stored under plus the matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedMatrices {
    pub key: String,
    pub set: DistanceMatrixSet<f64>,
}

/// Key for one (coordinates, backend) pair: order-sensitive, exact to the
/// last coordinate bit.
pub fn cache_key(
    pois: &[Site<f64>],
    existing: &[Site<f64>],
    candidates: &[Site<f64>],
    backend_descriptor: &str,
) -> String {
    let mut h = Sha256::new();
    h.update(backend_descriptor.as_bytes());
    for (label, sites) in [(b"p", pois), (b"e", existing), (b"c", candidates)] {
        h.update(label);
        h.update((sites.len() as u64).to_le_bytes());
        for s in sites {
            h.update(s.point.lat.to_bits().to_le_bytes());
            h.update(s.point.lon.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    key: String,
    provenance: Provenance,
    d: MatrixDto,
    e: MatrixDto,
    q: MatrixDto,
}

/// Write the matrices under the given key. Overwrites any existing file.
pub fn save_cache(path: &Path, key: &str, set: &DistanceMatrixSet<f64>) -> Result<(), CacheError> {
    let file = CacheFile {
        format: FORMAT.to_string(),
        version: VERSION,
        key: key.to_string(),
        provenance: set.provenance.clone(),
        d: MatrixDto::from_matrix(&set.d),
        e: MatrixDto::from_matrix(&set.e),
        q: MatrixDto::from_matrix(&set.q),
    };
    let text = serde_json::to_string_pretty(&file).expect("cache file serializes");
    std::fs::write(path, text).map_err(|e| CacheError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Load a cache file unconditionally (key returned for the caller to check).
pub fn load_cache(path: &Path) -> Result<CachedMatrices, CacheError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CacheError::Io {
        path: display.clone(),
        reason: e.to_string(),
    })?;
    let file: CacheFile = serde_json::from_str(&text).map_err(|e| CacheError::Invalid {
        path: display.clone(),
        reason: e.to_string(),
    })?;
    if file.format != FORMAT {
        return Err(CacheError::WrongFormat {
            path: display,
            got: file.format,
        });
    }
    if file.version != VERSION {
        return Err(CacheError::WrongVersion {
            path: display,
            got: file.version,
        });
    }
    let into = |dto: MatrixDto, name: &str| {
        dto.into_matrix(name).map_err(|reason| CacheError::Invalid {
            path: display.clone(),
            reason,
        })
    };
    Ok(CachedMatrices {
        key: file.key,
        set: DistanceMatrixSet {
            d: into(file.d, "d")?,
            e: into(file.e, "e")?,
            q: into(file.q, "q")?,
            provenance: file.provenance,
        },
    })
}

/// Load only if the file exists and was stored under exactly this key;
/// a missing file or a key mismatch yields `None`, corruption an error.
pub fn load_cache_if_match(
    path: &Path,
    key: &str,
) -> Result<Option<DistanceMatrixSet<f64>>, CacheError> {
    if !path.exists() {
        return Ok(None);
    }
    let cached = load_cache(path)?;
    Ok((cached.key == key).then_some(cached.set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{build_matrices, DistanceBackend};
    use crate::model::{GeoPoint, SiteKind};

    type Sites = Vec<Site<f64>>;

    fn site(id: &str, lat: f64, lon: f64, kind: SiteKind) -> Site<f64> {
        Site::new(id, GeoPoint::new(lat, lon).unwrap(), kind)
    }

    fn sample() -> (Sites, Sites, Sites) {
        let pois = vec![site("p0", 38.80, -89.95, SiteKind::Poi)];
        let existing = vec![site("x0", 38.81, -89.96, SiteKind::ExistingCs)];
        let cands = vec![
            site("c0", 38.79, -89.94, SiteKind::Candidate),
            site("c1", 38.82, -89.97, SiteKind::Candidate),
            site("c2", 38.83, -89.91, SiteKind::Candidate),
        ];
        (pois, existing, cands)
    }

    #[test]
    fn round_trip_is_elementwise_equal() {
        let (pois, existing, cands) = sample();
        let backend = DistanceBackend::Haversine;
        let set = build_matrices(&pois, &existing, &cands, &backend).unwrap();
        let key = cache_key(&pois, &existing, &cands, &backend.descriptor());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrices.json");
        save_cache(&path, &key, &set).unwrap();
        let loaded = load_cache(&path).unwrap();
        assert_eq!(loaded.key, key);
        assert_eq!(loaded.set, set);

        let matched = load_cache_if_match(&path, &key).unwrap();
        assert_eq!(matched, Some(set));
    }

    #[test]
    fn zero_row_matrix_keeps_column_count() {
        let (pois, _, cands) = sample();
        let backend = DistanceBackend::Haversine;
        let set = build_matrices(&pois, &[], &cands, &backend).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_cache(&path, "k", &set).unwrap();
        let loaded = load_cache(&path).unwrap();
        assert_eq!((loaded.set.e.rows(), loaded.set.e.cols()), (0, 3));
    }

    #[test]
    fn key_changes_with_coordinates_order_and_backend() {
        let (pois, existing, cands) = sample();
        let base = cache_key(&pois, &existing, &cands, "haversine");

        let mut moved = pois.clone();
        moved[0].point.lat += 1e-12;
        assert_ne!(cache_key(&moved, &existing, &cands, "haversine"), base);

        let mut swapped = cands.clone();
        swapped.swap(0, 1);
        assert_ne!(cache_key(&pois, &existing, &swapped, "haversine"), base);

        assert_ne!(
            cache_key(
                &pois,
                &existing,
                &cands,
                "osrm-table profile=driving endpoint=x"
            ),
            base
        );

        assert_eq!(cache_key(&pois, &existing, &cands, "haversine"), base);
    }

    #[test]
    fn mismatch_and_missing_are_none() {
        let (pois, existing, cands) = sample();
        let backend = DistanceBackend::Haversine;
        let set = build_matrices(&pois, &existing, &cands, &backend).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        assert!(load_cache_if_match(&path, "anything").unwrap().is_none());
        save_cache(&path, "key-a", &set).unwrap();
        assert!(load_cache_if_match(&path, "key-b").unwrap().is_none());
    }

    #[test]
    fn foreign_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");

        std::fs::write(&path, "not json").unwrap();
        assert!(matches!(load_cache(&path), Err(CacheError::Invalid { .. })));

        std::fs::write(
            &path,
            r#"{"format":"other","version":1,"key":"k","provenance":{"backend":"haversine"},
               "d":{"rows":0,"cols":0,"data":[]},"e":{"rows":0,"cols":0,"data":[]},
               "q":{"rows":0,"cols":0,"data":[]}}"#,
        )
        .unwrap();
        assert!(matches!(
            load_cache(&path),
            Err(CacheError::WrongFormat { .. })
        ));

        std::fs::write(
            &path,
            r#"{"format":"evsite-matrix-cache","version":99,"key":"k",
               "provenance":{"backend":"haversine"},
               "d":{"rows":0,"cols":0,"data":[]},"e":{"rows":0,"cols":0,"data":[]},
               "q":{"rows":0,"cols":0,"data":[]}}"#,
        )
        .unwrap();
        assert!(matches!(
            load_cache(&path),
            Err(CacheError::WrongVersion { got: 99, .. })
        ));
    }
}
