//! Synthetic benchmark instances: sites placed uniformly at random on a
//! planar rectangle, Euclidean distances, fully determined by the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;
use crate::model::{GeoPoint, ModelError, ProblemInstance, Site, SiteKind};
use crate::scalar::Scalar;

/// Backend descriptor recorded for generated (non-geographic) matrices.
pub const PLANAR_BACKEND: &str = "planar-euclidean";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("{name} = {value} must be finite and > 0")]
    BadExtent { name: &'static str, value: f64 },
    #[error("{name} = {value} km exceeds {max} (planar coordinates are stored in degree fields)")]
    ExtentTooLarge {
        name: &'static str,
        value: f64,
        max: f64,
    },
    #[error("n_pois must be >= 1")]
    NoPois,
    #[error("n_candidates = {candidates} must be >= cs_count = {cs} >= 1")]
    BadCounts { candidates: usize, cs: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters for one synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width_km: f64,
    pub height_km: f64,
    pub n_pois: usize,
    pub n_existing: usize,
    pub n_candidates: usize,
    pub cs_count: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, value, max) in [
            ("width_km", self.width_km, 180.0),
            ("height_km", self.height_km, 90.0),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(GeneratorError::BadExtent { name, value });
            }
            if value > max {
                return Err(GeneratorError::ExtentTooLarge { name, value, max });
            }
        }
        if self.n_pois == 0 {
            return Err(GeneratorError::NoPois);
        }
        if self.cs_count == 0 || self.n_candidates < self.cs_count {
            return Err(GeneratorError::BadCounts {
                candidates: self.n_candidates,
                cs: self.cs_count,
            });
        }
        Ok(())
    }
}

/// Generate a validated instance from a [`GridSpec`].
///
/// Point kilometers land directly in the coordinate fields (`lon` = x,
/// `lat` = y) and distances are planar Euclidean, so generated instances are
/// self-consistent but not geographic. Draw order is POIs, then existing
/// stations, then candidates; one seed always yields the same instance.
pub fn generate_grid_instance<T: Scalar>(
    spec: &GridSpec,
) -> Result<ProblemInstance<T>, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |n: usize, prefix: &str, kind: SiteKind| -> Vec<(f64, f64, Site<T>)> {
        (0..n)
            .map(|i| {
                let x = rng.gen::<f64>() * spec.width_km;
                let y = rng.gen::<f64>() * spec.height_km;
                let point = GeoPoint::new(T::of(y), T::of(x))
                    .expect("validated extents keep coordinates in range");
                (x, y, Site::new(format!("{prefix}-{i}"), point, kind))
            })
            .collect()
    };
    let pois = draw(spec.n_pois, "poi", SiteKind::Poi);
    let existing = draw(spec.n_existing, "ecs", SiteKind::ExistingCs);
    let candidates = draw(spec.n_candidates, "cand", SiteKind::Candidate);

    let dist = |a: &(f64, f64, Site<T>), b: &(f64, f64, Site<T>)| -> T {
        T::of(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
    };
    let d = Matrix::from_fn(pois.len(), candidates.len(), |i, j| {
        dist(&pois[i], &candidates[j])
    });
    let e = Matrix::from_fn(existing.len(), candidates.len(), |i, j| {
        dist(&existing[i], &candidates[j])
    });
    let n = candidates.len();
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(&candidates[i], &candidates[j]);
            q.set(i, j, v);
            q.set(j, i, v);
        }
    }

    let strip = |v: Vec<(f64, f64, Site<T>)>| v.into_iter().map(|(_, _, s)| s).collect();
    Ok(ProblemInstance::new(
        strip(pois),
        strip(existing),
        strip(candidates),
        spec.cs_count,
        d,
        e,
        q,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case_study_spec(seed: u64) -> GridSpec {
        GridSpec {
            width_km: 20.0,
            height_km: 20.0,
            n_pois: 5,
            n_existing: 7,
            n_candidates: 148,
            cs_count: 4,
            seed,
        }
    }

    #[test]
    fn counts_match_spec() {
        let inst: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(7)).unwrap();
        assert_eq!(inst.poi_count(), 5);
        assert_eq!(inst.existing_count(), 7);
        assert_eq!(inst.candidate_count(), 148);
        assert_eq!(inst.cs_count(), 4);
    }

    #[test]
    fn same_seed_same_instance() {
        let a: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(123)).unwrap();
        let b: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(123)).unwrap();
        assert_eq!(a, b);
        let c: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(124)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn distances_bounded_by_rectangle_diagonal() {
        let inst: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(9)).unwrap();
        let diag = (20.0f64.powi(2) * 2.0).sqrt();
        let all = inst
            .poi_dist()
            .iter()
            .chain(inst.existing_dist().iter())
            .chain(inst.pair_dist().iter());
        for v in all {
            assert!((0.0..=diag).contains(&v));
        }
    }

    #[test]
    fn pair_matrix_metric_properties() {
        let inst: ProblemInstance<f64> = generate_grid_instance(&case_study_spec(11)).unwrap();
        let q = inst.pair_dist();
        let n = inst.candidate_count();
        for i in 0..n {
            assert_eq!(q.get(i, i), 0.0);
        }
        // Spot-check symmetry and the triangle inequality.
        for i in (0..n).step_by(17) {
            for j in (0..n).step_by(13) {
                assert_eq!(q.get(i, j), q.get(j, i));
                for k in (0..n).step_by(29) {
                    assert!(q.get(i, j) <= q.get(i, k) + q.get(k, j) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = case_study_spec(0);
        s.width_km = 0.0;
        assert!(matches!(
            generate_grid_instance::<f64>(&s),
            Err(GeneratorError::BadExtent {
                name: "width_km",
                ..
            })
        ));

        let mut s = case_study_spec(0);
        s.height_km = 500.0;
        assert!(matches!(
            generate_grid_instance::<f64>(&s),
            Err(GeneratorError::ExtentTooLarge {
                name: "height_km",
                ..
            })
        ));

        let mut s = case_study_spec(0);
        s.n_pois = 0;
        assert!(matches!(
            generate_grid_instance::<f64>(&s),
            Err(GeneratorError::NoPois)
        ));

        let mut s = case_study_spec(0);
        s.cs_count = 200;
        assert!(matches!(
            generate_grid_instance::<f64>(&s),
            Err(GeneratorError::BadCounts {
                candidates: 148,
                cs: 200
            })
        ));
    }
}
