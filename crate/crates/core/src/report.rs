//! Solution reporting: per-station distance metrics, a human-readable
//! table, and GeoJSON export of all sites with selection flags.

use serde::{Deserialize, Serialize};

use crate::model::{
    objective_components, Assignment, ModelError, ObjectiveTerms, ProblemInstance, SiteKind,
    Weights,
};
use crate::scalar::Scalar;

/// Distance metrics for one selected station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMetrics<T> {
    pub station_id: String,
    /// Index into the candidate list.
    pub candidate_index: usize,
    /// Mean distance from every POI to this station, km.
    pub avg_poi_distance_km: T,
    /// Mean distance from every existing station, km; absent when there are
    /// no existing stations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_existing_distance_km: Option<T>,
}

/// Which solver produced the solution being summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub solver_name: String,
    pub seed: u64,
}

/// Full per-solution report: one row per selected station (in candidate
/// index order), pairwise separation, aggregates, and the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary<T> {
    pub stations: Vec<StationMetrics<T>>,
    /// Mean of q over all unordered pairs of selected stations; 0 for a
    /// single station.
    pub pairwise_avg_km: T,
    /// Mean of the per-station POI averages.
    pub avg_poi_distance_km: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_existing_distance_km: Option<T>,
    pub objective: ObjectiveTerms<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverInfo>,
}

/// Compute the summary for one selection. Weights only influence the
/// objective breakdown; the distance metrics are raw matrix means.
pub fn station_metrics<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
    x: &Assignment,
) -> Result<SolutionSummary<T>, ModelError> {
    let selected = x.selected();
    if x.len() != inst.candidate_count() {
        return Err(ModelError::AssignmentLength {
            expected: inst.candidate_count(),
            got: x.len(),
        });
    }
    if selected.is_empty() {
        return Err(ModelError::EmptySelection);
    }

    let p = T::of_usize(inst.poi_count());
    let stations: Vec<StationMetrics<T>> = selected
        .iter()
        .map(|&j| {
            let avg_poi = inst.poi_dist().col_sum(j) / p;
            let avg_existing = (inst.existing_count() > 0)
                .then(|| inst.existing_dist().col_sum(j) / T::of_usize(inst.existing_count()));
            StationMetrics {
                station_id: inst.candidates()[j].id.clone(),
                candidate_index: j,
                avg_poi_distance_km: avg_poi,
                avg_existing_distance_km: avg_existing,
            }
        })
        .collect();

    let k = selected.len();
    let pairwise_avg_km = if k < 2 {
        T::zero()
    } else {
        let mut sum = T::zero();
        for (t, &i) in selected.iter().enumerate() {
            for &j in &selected[t + 1..] {
                sum = sum + inst.pair_dist().get(i, j);
            }
        }
        sum / T::of_usize(k * (k - 1) / 2)
    };

    let kt = T::of_usize(k);
    let avg_poi_distance_km = stations
        .iter()
        .fold(T::zero(), |acc, s| acc + s.avg_poi_distance_km)
        / kt;
    let avg_existing_distance_km = (inst.existing_count() > 0).then(|| {
        stations.iter().fold(T::zero(), |acc, s| {
            acc + s.avg_existing_distance_km.unwrap()
        }) / kt
    });

    Ok(SolutionSummary {
        stations,
        pairwise_avg_km,
        avg_poi_distance_km,
        avg_existing_distance_km,
        objective: objective_components(inst, w, x)?,
        solver: None,
    })
}

fn km<T: Scalar>(v: T) -> String {
    format!("{:.3}", v.to_f64().unwrap_or(f64::NAN))
}

/// Fixed-width table with km values at 3 decimals.
pub fn render_table<T: Scalar>(summary: &SolutionSummary<T>) -> String {
    let mut out = String::new();
    let id_width = summary
        .stations
        .iter()
        .map(|s| s.station_id.len())
        .max()
        .unwrap_or(7)
        .max("station".len());
    out.push_str(&format!(
        "{:<id_width$}  {:>6}  {:>12}  {:>16}\n",
        "station", "index", "avg POI [km]", "avg existing [km]"
    ));
    for s in &summary.stations {
        let existing = s
            .avg_existing_distance_km
            .map(km)
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{:<id_width$}  {:>6}  {:>12}  {:>16}\n",
            s.station_id,
            s.candidate_index,
            km(s.avg_poi_distance_km),
            existing
        ));
    }
    out.push_str(&format!(
        "pairwise average between stations: {} km\n",
        km(summary.pairwise_avg_km)
    ));
    out.push_str(&format!(
        "aggregate avg POI distance: {} km\n",
        km(summary.avg_poi_distance_km)
    ));
    if let Some(v) = summary.avg_existing_distance_km {
        out.push_str(&format!("aggregate avg existing distance: {} km\n", km(v)));
    }
    let o = &summary.objective;
    out.push_str(&format!(
        "objective: Z1={:.6} Z2={:.6} Z3={:.6} total={:.6}\n",
        o.z1.to_f64().unwrap_or(f64::NAN),
        o.z2.to_f64().unwrap_or(f64::NAN),
        o.z3.to_f64().unwrap_or(f64::NAN),
        o.total.to_f64().unwrap_or(f64::NAN),
    ));
    if let Some(s) = &summary.solver {
        out.push_str(&format!("solver: {} (seed {})\n", s.solver_name, s.seed));
    }
    out
}

/// GeoJSON document types (RFC 7946 point features only).
pub mod geojson {
    use super::*;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct FeatureCollection {
        #[serde(rename = "type")]
        pub kind: String,
        pub features: Vec<Feature>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Feature {
        #[serde(rename = "type")]
        pub kind: String,
        pub geometry: Geometry,
        pub properties: Properties,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Geometry {
        #[serde(rename = "type")]
        pub kind: String,
        /// `[lon, lat]` per the GeoJSON position rule.
        pub coordinates: [f64; 2],
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Properties {
        pub id: String,
        pub site_kind: SiteKind,
        #[serde(default)]
        pub tag: String,
        pub selected: bool,
    }
}

/// Export every site of the instance as one GeoJSON point feature.
/// Candidates carry `selected: true` exactly where `x` selects them; POIs
/// and existing stations are never selected.
pub fn export_geojson<T: Scalar>(
    inst: &ProblemInstance<T>,
    x: &Assignment,
) -> Result<geojson::FeatureCollection, ModelError> {
    if x.len() != inst.candidate_count() {
        return Err(ModelError::AssignmentLength {
            expected: inst.candidate_count(),
            got: x.len(),
        });
    }
    let feature = |site: &crate::model::Site<T>, selected: bool| geojson::Feature {
        kind: "Feature".to_string(),
        geometry: geojson::Geometry {
            kind: "Point".to_string(),
            coordinates: [
                site.point.lon.to_f64().unwrap_or(f64::NAN),
                site.point.lat.to_f64().unwrap_or(f64::NAN),
            ],
        },
        properties: geojson::Properties {
            id: site.id.clone(),
            site_kind: site.kind,
            tag: site.tag.clone(),
            selected,
        },
    };
    let mut features =
        Vec::with_capacity(inst.poi_count() + inst.existing_count() + inst.candidate_count());
    features.extend(inst.pois().iter().map(|s| feature(s, false)));
    features.extend(inst.existing().iter().map(|s| feature(s, false)));
    features.extend(
        inst.candidates()
            .iter()
            .enumerate()
            .map(|(j, s)| feature(s, x.get(j))),
    );
    Ok(geojson::FeatureCollection {
        kind: "FeatureCollection".to_string(),
        features,
    })
}
