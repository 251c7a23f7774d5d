//! Versioned file formats: instance and solution documents (JSON), plus
//! site-list ingestion from GeoJSON or CSV.
//!
//! Serialization is fixed at double precision. `serde_json` prints floats in
//! shortest round-trip form, so write/read cycles reproduce every value
//! bit for bit, and rewriting unchanged data yields byte-identical files
//! (solution files deliberately carry no wall-clock fields).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distance::Provenance;
use crate::matrix::Matrix;
use crate::model::{
    Assignment, GeoPoint, ModelError, ObjectiveTerms, ProblemInstance, Site, SiteKind, Weights,
};
use crate::solvers::SolveReport;

pub const INSTANCE_FORMAT: &str = "evsite-instance";
pub const SOLUTION_FORMAT: &str = "evsite-solution";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("I/O failed for {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("{path} has format `{got}`, expected `{expected}`")]
    WrongFormat {
        path: String,
        expected: &'static str,
        got: String,
    },
    #[error("{path} has version {got}, supported version is {expected}")]
    WrongVersion {
        path: String,
        expected: u32,
        got: u32,
    },
    #[error("cannot infer site format from `{path}`; use .geojson, .json, or .csv")]
    UnknownExtension { path: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn invalid(path: &Path, reason: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Row-major matrix payload with explicit shape, so zero-row matrices keep
/// their column count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct MatrixDto {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixDto {
    pub fn from_matrix(m: &Matrix<f64>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.to_rows(),
        }
    }

    pub fn into_matrix(self, name: &str) -> Result<Matrix<f64>, String> {
        if self.data.len() != self.rows {
            return Err(format!(
                "matrix {name} declares {} rows but has {}",
                self.rows,
                self.data.len()
            ));
        }
        if self.rows == 0 {
            return Ok(Matrix::zeros(0, self.cols));
        }
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(format!(
                    "matrix {name} row {i} has {} entries, expected {}",
                    row.len(),
                    self.cols
                ));
            }
        }
        Matrix::from_rows(self.data).map_err(|e| format!("matrix {name}: {e}"))
    }
}

#[derive(Serialize, Deserialize)]
struct SiteDto {
    id: String,
    lat: f64,
    lon: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    tag: String,
}

impl SiteDto {
    fn from_site(s: &Site<f64>) -> Self {
        Self {
            id: s.id.clone(),
            lat: s.point.lat,
            lon: s.point.lon,
            tag: s.tag.clone(),
        }
    }

    fn into_site(self, kind: SiteKind) -> Result<Site<f64>, ModelError> {
        Ok(Site::new(self.id, GeoPoint::new(self.lat, self.lon)?, kind).with_tag(self.tag))
    }
}

#[derive(Serialize, Deserialize)]
struct SitesDto {
    pois: Vec<SiteDto>,
    existing: Vec<SiteDto>,
    candidates: Vec<SiteDto>,
}

#[derive(Serialize, Deserialize)]
struct MatricesDto {
    provenance: Provenance,
    d: MatrixDto,
    e: MatrixDto,
    q: MatrixDto,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    version: u32,
    cs_count: usize,
    sites: SitesDto,
    matrices: MatricesDto,
}

/// Write a complete instance (sites, matrices, provenance) as JSON.
pub fn write_instance(
    path: &Path,
    inst: &ProblemInstance<f64>,
    provenance: &Provenance,
) -> Result<(), FormatError> {
    let file = InstanceFile {
        format: INSTANCE_FORMAT.to_string(),
        version: FORMAT_VERSION,
        cs_count: inst.cs_count(),
        sites: SitesDto {
            pois: inst.pois().iter().map(SiteDto::from_site).collect(),
            existing: inst.existing().iter().map(SiteDto::from_site).collect(),
            candidates: inst.candidates().iter().map(SiteDto::from_site).collect(),
        },
        matrices: MatricesDto {
            provenance: provenance.clone(),
            d: MatrixDto::from_matrix(inst.poi_dist()),
            e: MatrixDto::from_matrix(inst.existing_dist()),
            q: MatrixDto::from_matrix(inst.pair_dist()),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance file serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Read and fully validate an instance file.
pub fn read_instance(path: &Path) -> Result<(ProblemInstance<f64>, Provenance), FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: InstanceFile =
        serde_json::from_str(&text).map_err(|e| invalid(path, e.to_string()))?;
    if file.format != INSTANCE_FORMAT {
        return Err(FormatError::WrongFormat {
            path: path.display().to_string(),
            expected: INSTANCE_FORMAT,
            got: file.format,
        });
    }
    if file.version != FORMAT_VERSION {
        return Err(FormatError::WrongVersion {
            path: path.display().to_string(),
            expected: FORMAT_VERSION,
            got: file.version,
        });
    }
    let into_sites = |v: Vec<SiteDto>, kind| -> Result<Vec<Site<f64>>, FormatError> {
        v.into_iter()
            .map(|s| s.into_site(kind).map_err(FormatError::from))
            .collect()
    };
    let inst = ProblemInstance::new(
        into_sites(file.sites.pois, SiteKind::Poi)?,
        into_sites(file.sites.existing, SiteKind::ExistingCs)?,
        into_sites(file.sites.candidates, SiteKind::Candidate)?,
        file.cs_count,
        file.matrices
            .d
            .into_matrix("d")
            .map_err(|r| invalid(path, r))?,
        file.matrices
            .e
            .into_matrix("e")
            .map_err(|r| invalid(path, r))?,
        file.matrices
            .q
            .into_matrix("q")
            .map_err(|r| invalid(path, r))?,
    )?;
    Ok((inst, file.matrices.provenance))
}

/// Machine-readable solve outcome. Wall time is intentionally absent so the
/// file is a pure function of instance, weights, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format: String,
    pub version: u32,
    pub solver: String,
    pub seed: u64,
    pub candidate_count: usize,
    pub cs_count: usize,
    pub selected: Vec<usize>,
    pub selected_ids: Vec<String>,
    pub feasible: bool,
    pub best_energy: f64,
    pub objective: ObjectiveTerms<f64>,
    pub weights: Weights<f64>,
    pub read_energies: Vec<f64>,
}

impl SolutionFile {
    pub fn from_report(
        inst: &ProblemInstance<f64>,
        w: &Weights<f64>,
        report: &SolveReport<f64>,
    ) -> Self {
        let selected = report.best.selected();
        let selected_ids = selected
            .iter()
            .map(|&j| inst.candidates()[j].id.clone())
            .collect();
        Self {
            format: SOLUTION_FORMAT.to_string(),
            version: FORMAT_VERSION,
            solver: report.solver_name.clone(),
            seed: report.seed,
            candidate_count: inst.candidate_count(),
            cs_count: inst.cs_count(),
            selected,
            selected_ids,
            feasible: report.feasible,
            best_energy: report.best_energy,
            objective: report.best_objective,
            weights: *w,
            read_energies: report.read_energies.clone(),
        }
    }

    /// The selection as an assignment over `candidate_count` bits.
    pub fn assignment(&self) -> Assignment {
        Assignment::from_selected(&self.selected, self.candidate_count)
    }
}

pub fn write_solution(path: &Path, solution: &SolutionFile) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(solution).expect("solution file serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: SolutionFile =
        serde_json::from_str(&text).map_err(|e| invalid(path, e.to_string()))?;
    if file.format != SOLUTION_FORMAT {
        return Err(FormatError::WrongFormat {
            path: path.display().to_string(),
            expected: SOLUTION_FORMAT,
            got: file.format,
        });
    }
    if file.version != FORMAT_VERSION {
        return Err(FormatError::WrongVersion {
            path: path.display().to_string(),
            expected: FORMAT_VERSION,
            got: file.version,
        });
    }
    if file.selected.iter().any(|&j| j >= file.candidate_count) {
        return Err(invalid(path, "selected index out of candidate range"));
    }
    if file.selected.len() != file.selected_ids.len() {
        return Err(invalid(path, "selected and selected_ids lengths differ"));
    }
    Ok(file)
}

// Lenient GeoJSON ingestion: only `type`, point geometry, and optionally
// `id`/`tag` properties are interpreted; everything else is ignored.
#[derive(Deserialize)]
struct GjDoc {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<GjFeature>,
}

#[derive(Deserialize)]
struct GjFeature {
    geometry: GjGeometry,
    #[serde(default)]
    properties: GjProperties,
}

#[derive(Deserialize)]
struct GjGeometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Vec<f64>,
}

#[derive(Deserialize, Default)]
struct GjProperties {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    tag: Option<String>,
}

fn default_id(kind: SiteKind, index: usize) -> String {
    let prefix = match kind {
        SiteKind::Poi => "poi",
        SiteKind::ExistingCs => "ecs",
        SiteKind::Candidate => "cand",
    };
    format!("{prefix}-{index}")
}

/// Read a GeoJSON FeatureCollection of points as sites of one kind.
/// Features without an `id` property are numbered by position.
pub fn read_sites_geojson(path: &Path, kind: SiteKind) -> Result<Vec<Site<f64>>, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: GjDoc = serde_json::from_str(&text).map_err(|e| invalid(path, e.to_string()))?;
    if doc.kind != "FeatureCollection" {
        return Err(invalid(
            path,
            format!("type `{}` is not FeatureCollection", doc.kind),
        ));
    }
    doc.features
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            if f.geometry.kind != "Point" {
                return Err(invalid(
                    path,
                    format!(
                        "feature {i} has geometry `{}`, expected Point",
                        f.geometry.kind
                    ),
                ));
            }
            let [lon, lat] = match f.geometry.coordinates.as_slice() {
                [lon, lat, ..] => [*lon, *lat],
                _ => {
                    return Err(invalid(
                        path,
                        format!("feature {i} has fewer than 2 coordinates"),
                    ))
                }
            };
            let point = GeoPoint::new(lat, lon).map_err(FormatError::from)?;
            let id = f.properties.id.unwrap_or_else(|| default_id(kind, i));
            Ok(Site::new(id, point, kind).with_tag(f.properties.tag.unwrap_or_default()))
        })
        .collect()
}

#[derive(Deserialize)]
struct CsvSiteRow {
    #[serde(default)]
    id: Option<String>,
    lat: f64,
    lon: f64,
    #[serde(default)]
    tag: Option<String>,
}

/// Read a CSV with headers `id,lat,lon,tag` (`id` and `tag` optional).
pub fn read_sites_csv(path: &Path, kind: SiteKind) -> Result<Vec<Site<f64>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let mut sites = Vec::new();
    for (i, row) in reader.deserialize::<CsvSiteRow>().enumerate() {
        let row = row.map_err(|e| invalid(path, format!("row {}: {e}", i + 1)))?;
        let point = GeoPoint::new(row.lat, row.lon).map_err(FormatError::from)?;
        let id = row
            .id
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| default_id(kind, i));
        sites.push(Site::new(id, point, kind).with_tag(row.tag.unwrap_or_default()));
    }
    Ok(sites)
}

/// Dispatch on the file extension: `.geojson`/`.json` or `.csv`.
pub fn read_sites(path: &Path, kind: SiteKind) -> Result<Vec<Site<f64>>, FormatError> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("geojson") | Some("json") => read_sites_geojson(path, kind),
        Some("csv") => read_sites_csv(path, kind),
        _ => Err(FormatError::UnknownExtension {
            path: path.display().to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::random_instance;
    use crate::generator::{generate_grid_instance, GridSpec, PLANAR_BACKEND};
    use crate::solvers::solve_exact;

    fn planar_provenance() -> Provenance {
        Provenance {
            backend: PLANAR_BACKEND.to_string(),
            retrieved_unix: None,
        }
    }

    #[test]
    fn instance_round_trip_and_byte_determinism() {
        let spec = GridSpec {
            width_km: 10.0,
            height_km: 8.0,
            n_pois: 3,
            n_existing: 2,
            n_candidates: 6,
            cs_count: 2,
            seed: 5,
        };
        let inst: ProblemInstance<f64> = generate_grid_instance(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.json");
        let p2 = dir.path().join("b.json");
        write_instance(&p1, &inst, &planar_provenance()).unwrap();
        write_instance(&p2, &inst, &planar_provenance()).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

        let (loaded, prov) = read_instance(&p1).unwrap();
        assert_eq!(loaded, inst);
        assert_eq!(prov, planar_provenance());
    }

    #[test]
    fn instance_values_survive_bit_exact() {
        // Shortest round-trip printing must reproduce awkward doubles.
        let inst = random_instance(31, 3, 2, 5, 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("inst.json");
        write_instance(&p, &inst, &planar_provenance()).unwrap();
        let (loaded, _) = read_instance(&p).unwrap();
        for (a, b) in inst.pair_dist().iter().zip(loaded.pair_dist().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn instance_file_rejects_foreign_and_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");

        std::fs::write(&p, "{}").unwrap();
        assert!(matches!(
            read_instance(&p),
            Err(FormatError::Invalid { .. })
        ));

        let inst = random_instance(1, 2, 1, 4, 2);
        write_instance(&p, &inst, &planar_provenance()).unwrap();
        let mut text = std::fs::read_to_string(&p).unwrap();
        text = text.replace("\"evsite-instance\"", "\"other\"");
        std::fs::write(&p, &text).unwrap();
        assert!(matches!(
            read_instance(&p),
            Err(FormatError::WrongFormat { .. })
        ));

        write_instance(&p, &inst, &planar_provenance()).unwrap();
        let text = std::fs::read_to_string(&p)
            .unwrap()
            .replace("\"version\": 1", "\"version\": 9");
        std::fs::write(&p, &text).unwrap();
        assert!(matches!(
            read_instance(&p),
            Err(FormatError::WrongVersion { got: 9, .. })
        ));
    }

    #[test]
    fn corrupt_matrix_is_a_model_error() {
        let inst = random_instance(2, 2, 1, 4, 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_instance(&p, &inst, &planar_provenance()).unwrap();
        // Break symmetry of q by editing one off-diagonal entry.
        let mut file: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        file["matrices"]["q"]["data"][0][1] = serde_json::json!(99.0);
        std::fs::write(&p, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(matches!(
            read_instance(&p),
            Err(FormatError::Model(ModelError::AsymmetricQ { .. }))
        ));
    }

    #[test]
    fn solution_round_trip_without_wall_time() {
        let inst = random_instance(3, 3, 2, 6, 2);
        let w = Weights::auto_for(&inst);
        let report = solve_exact(&inst, &w).unwrap();
        let solution = SolutionFile::from_report(&inst, &w, &report);

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sol.json");
        write_solution(&p, &solution).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(!text.contains("wall_time"));

        let loaded = read_solution(&p).unwrap();
        assert_eq!(loaded, solution);
        assert_eq!(loaded.assignment(), report.best);
        assert_eq!(loaded.selected_ids.len(), loaded.selected.len());
    }

    #[test]
    fn solution_file_validation() {
        let inst = random_instance(3, 3, 2, 6, 2);
        let w = Weights::auto_for(&inst);
        let report = solve_exact(&inst, &w).unwrap();
        let mut solution = SolutionFile::from_report(&inst, &w, &report);
        solution.selected = vec![99];
        solution.selected_ids = vec!["x".into()];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sol.json");
        write_solution(&p, &solution).unwrap();
        assert!(matches!(
            read_solution(&p),
            Err(FormatError::Invalid { .. })
        ));
    }

    #[test]
    fn geojson_ingestion_with_and_without_ids() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sites.geojson");
        std::fs::write(
            &p,
            r#"{
              "type": "FeatureCollection",
              "features": [
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [-89.95, 38.80]},
                 "properties": {"id": "hotel-a", "tag": "hotel"}},
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [-89.96, 38.81, 120.0]},
                 "properties": {}}
              ]
            }"#,
        )
        .unwrap();
        let sites = read_sites_geojson(&p, SiteKind::Poi).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].id, "hotel-a");
        assert_eq!(sites[0].tag, "hotel");
        assert_eq!(sites[0].point.lon, -89.95);
        assert_eq!(sites[0].point.lat, 38.80);
        assert_eq!(sites[1].id, "poi-1");
        assert_eq!(sites[1].point.lat, 38.81);
    }

    #[test]
    fn geojson_ingestion_rejects_non_points() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.geojson");
        std::fs::write(
            &p,
            r#"{"type": "FeatureCollection", "features": [
                {"type": "Feature",
                 "geometry": {"type": "LineString", "coordinates": [1.0, 2.0]},
                 "properties": {}}]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_sites_geojson(&p, SiteKind::Poi),
            Err(FormatError::Invalid { .. })
        ));

        std::fs::write(&p, r#"{"type": "Feature", "features": []}"#).unwrap();
        assert!(matches!(
            read_sites_geojson(&p, SiteKind::Poi),
            Err(FormatError::Invalid { .. })
        ));
    }

    #[test]
    fn exported_candidates_reingest_identically() {
        let inst = random_instance(17, 3, 2, 5, 2);
        let x = Assignment::from_selected(&[0, 3], 5);
        let doc = crate::report::export_geojson(&inst, &x).unwrap();
        let candidates_only: Vec<_> = doc
            .features
            .into_iter()
            .filter(|f| f.properties.site_kind == SiteKind::Candidate)
            .collect();
        let doc = crate::report::geojson::FeatureCollection {
            kind: "FeatureCollection".to_string(),
            features: candidates_only,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cands.geojson");
        std::fs::write(&p, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

        let sites = read_sites_geojson(&p, SiteKind::Candidate).unwrap();
        assert_eq!(sites.len(), inst.candidate_count());
        for (a, b) in sites.iter().zip(inst.candidates().iter()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.point.lat.to_bits(), b.point.lat.to_bits());
            assert_eq!(a.point.lon.to_bits(), b.point.lon.to_bits());
        }
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sites.csv");
        std::fs::write(&p, "id,lat,lon,tag\nA,38.8,-89.95,parking\n,38.9,-89.90,\n").unwrap();
        let sites = read_sites_csv(&p, SiteKind::Candidate).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].id, "A");
        assert_eq!(sites[0].tag, "parking");
        assert_eq!(sites[1].id, "cand-1");
        assert_eq!(sites[1].point.lat, 38.9);

        std::fs::write(&p, "lat,lon\n38.8,-89.95\n").unwrap();
        let sites = read_sites_csv(&p, SiteKind::Poi).unwrap();
        assert_eq!(sites[0].id, "poi-0");

        std::fs::write(&p, "id,lat,lon\nA,not-a-number,-89.95\n").unwrap();
        assert!(matches!(
            read_sites_csv(&p, SiteKind::Poi),
            Err(FormatError::Invalid { .. })
        ));
    }

    #[test]
    fn read_sites_dispatches_on_extension() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sites.txt");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(
            read_sites(&p, SiteKind::Poi),
            Err(FormatError::UnknownExtension { .. })
        ));
    }
}
