//! Minimal OSRM `/table` service client: many-to-many fastest-route
//! distances, meters on the wire, km in the returned matrix.

use serde::Deserialize;

use super::DistanceError;
use crate::matrix::Matrix;
use crate::model::GeoPoint;
use crate::scalar::Scalar;

/// Public OSRM deployments cap table requests; stay at or below 100x100
/// coordinates (10,000 cells) per request.
pub(crate) const MAX_BLOCK: usize = 100;

/// Blocking HTTP client for one OSRM endpoint + profile.
pub struct OsrmClient {
    endpoint: String,
    profile: String,
    http: reqwest::blocking::Client,
}

impl OsrmClient {
    pub fn new(endpoint: &str, profile: &str) -> Result<Self, DistanceError> {
        let endpoint = endpoint.trim_end_matches('/');
        if endpoint.is_empty() {
            return Err(DistanceError::EmptyEndpoint);
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| DistanceError::Transport {
                url: endpoint.to_string(),
                reason: e.to_string(),
            })?;
        Ok(Self {
            endpoint: endpoint.to_string(),
            profile: if profile.is_empty() {
                "driving"
            } else {
                profile
            }
            .to_string(),
            http,
        })
    }

    /// Route distances from every source to every destination, km.
    ///
    /// Requests are chunked into blocks of at most [`MAX_BLOCK`] sources by
    /// [`MAX_BLOCK`] destinations and issued sequentially; blocks are placed
    /// into the result by index, so the assembled matrix does not depend on
    /// request order.
    pub fn table_km<T: Scalar>(
        &self,
        sources: &[GeoPoint<T>],
        destinations: &[GeoPoint<T>],
    ) -> Result<Matrix<T>, DistanceError> {
        let src: Vec<(f64, f64)> = sources
            .iter()
            .map(|p| (p.lat.to_f64().unwrap(), p.lon.to_f64().unwrap()))
            .collect();
        let dst: Vec<(f64, f64)> = destinations
            .iter()
            .map(|p| (p.lat.to_f64().unwrap(), p.lon.to_f64().unwrap()))
            .collect();

        let mut out = Matrix::zeros(src.len(), dst.len());
        for (si, s_block) in src.chunks(MAX_BLOCK).enumerate() {
            for (dj, d_block) in dst.chunks(MAX_BLOCK).enumerate() {
                let row_offset = si * MAX_BLOCK;
                let col_offset = dj * MAX_BLOCK;
                let url = table_url(&self.endpoint, &self.profile, s_block, d_block);
                let body = self.fetch(&url)?;
                let rows = parse_table_response(
                    &body,
                    s_block.len(),
                    d_block.len(),
                    row_offset,
                    col_offset,
                )?;
                for (i, row) in rows.iter().enumerate() {
                    for (j, &km) in row.iter().enumerate() {
                        out.set(row_offset + i, col_offset + j, T::of(km));
                    }
                }
            }
        }
        Ok(out)
    }

    fn fetch(&self, url: &str) -> Result<String, DistanceError> {
        let resp = self
            .http
            .get(url)
            .send()
            .map_err(|e| DistanceError::Transport {
                url: url.to_string(),
                reason: e.to_string(),
            })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| DistanceError::Transport {
            url: url.to_string(),
            reason: e.to_string(),
        })?;
        if !status.is_success() {
            return Err(DistanceError::HttpStatus {
                url: url.to_string(),
                status: status.as_u16(),
            });
        }
        Ok(body)
    }
}

/// `GET {endpoint}/table/v1/{profile}/{lon,lat;...}?sources=...&destinations=...&annotations=distance`
///
/// Coordinates are `(lat, lon)` pairs here but the wire order is
/// longitude-first. Sources come first in the coordinate list, then
/// destinations, with index lists referring to that concatenation.
pub(crate) fn table_url(
    endpoint: &str,
    profile: &str,
    sources: &[(f64, f64)],
    destinations: &[(f64, f64)],
) -> String {
    let coords: Vec<String> = sources
        .iter()
        .chain(destinations.iter())
        .map(|&(lat, lon)| format!("{lon},{lat}"))
        .collect();
    let src_idx: Vec<String> = (0..sources.len()).map(|i| i.to_string()).collect();
    let dst_idx: Vec<String> = (sources.len()..sources.len() + destinations.len())
        .map(|i| i.to_string())
        .collect();
    format!(
        "{endpoint}/table/v1/{profile}/{}?sources={}&destinations={}&annotations=distance",
        coords.join(";"),
        src_idx.join(";"),
        dst_idx.join(";"),
    )
}

#[derive(Deserialize)]
struct TableResponse {
    code: String,
    #[serde(default)]
    distances: Option<Vec<Vec<Option<f64>>>>,
}

/// Decode one table response into km rows. `row_offset`/`col_offset` locate
/// this block in the full matrix so errors name global cell indices.
pub(crate) fn parse_table_response(
    body: &str,
    n_sources: usize,
    n_destinations: usize,
    row_offset: usize,
    col_offset: usize,
) -> Result<Vec<Vec<f64>>, DistanceError> {
    let resp: TableResponse =
        serde_json::from_str(body).map_err(|e| DistanceError::BadResponse(e.to_string()))?;
    if resp.code != "Ok" {
        return Err(DistanceError::ServiceCode { code: resp.code });
    }
    let distances = resp.distances.ok_or(DistanceError::MissingAnnotations)?;
    if distances.len() != n_sources {
        return Err(DistanceError::BadResponse(format!(
            "expected {n_sources} distance rows, got {}",
            distances.len()
        )));
    }
    let mut out = Vec::with_capacity(n_sources);
    for (i, row) in distances.into_iter().enumerate() {
        if row.len() != n_destinations {
            return Err(DistanceError::BadResponse(format!(
                "row {} has {} entries, expected {n_destinations}",
                row_offset + i,
                row.len()
            )));
        }
        let mut km_row = Vec::with_capacity(n_destinations);
        for (j, cell) in row.into_iter().enumerate() {
            let meters = cell.ok_or(DistanceError::UnroutablePair {
                source_index: row_offset + i,
                destination_index: col_offset + j,
            })?;
            if !meters.is_finite() || meters < 0.0 {
                return Err(DistanceError::BadResponse(format!(
                    "distance [{}][{}] = {meters} is not a valid length",
                    row_offset + i,
                    col_offset + j
                )));
            }
            km_row.push(meters / 1000.0);
        }
        out.push(km_row);
    }
    Ok(out)
}
