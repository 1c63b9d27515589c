//! Resumable engine state, written atomically at every tour or iteration
//! boundary.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::{FeatureMask, RngStream};
use crate::mbo::MboSnapshot;
use crate::pso::PsoSnapshot;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "kebab-case")]
pub enum EngineState {
    Mbo(MboSnapshot),
    Pso(PsoSnapshot),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub method: String,
    /// See [`corpus_fingerprint`]; taken on the matrix the engine searched.
    pub fingerprint: String,
    /// Over the engine's (IG-reduced) feature universe.
    pub best_mask: FeatureMask,
    pub f_max: f64,
    /// Completed tours (MBO) or iterations (PSO).
    pub progress: usize,
    /// Root of the engine's random streams; every draw derives from it and `progress`.
    pub rng: RngStream,
    pub elapsed_ms: u64,
    pub state: EngineState,
}

impl Checkpoint {
    pub fn mbo(fingerprint: String, rng: RngStream, snapshot: &MboSnapshot) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            method: "mbo".into(),
            fingerprint,
            best_mask: snapshot.state.b_max.clone(),
            f_max: snapshot.state.f_max,
            progress: snapshot.state.counter,
            rng,
            elapsed_ms: snapshot.elapsed_ms,
            state: EngineState::Mbo(snapshot.clone()),
        }
    }

    pub fn pso(fingerprint: String, rng: RngStream, snapshot: &PsoSnapshot) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            method: "pso".into(),
            fingerprint,
            best_mask: snapshot.swarm.gbest.mask.clone(),
            f_max: snapshot.swarm.gbest.fitness,
            progress: snapshot.iteration,
            rng,
            elapsed_ms: snapshot.elapsed_ms,
            state: EngineState::Pso(snapshot.clone()),
        }
    }

    /// Rejects a checkpoint taken on a different matrix.
    pub fn check_fingerprint(&self, matrix: &DocTermMatrix) -> Result<()> {
        if self.fingerprint != corpus_fingerprint(matrix) {
            return Err(Error::CheckpointFingerprint);
        }
        Ok(())
    }
}

/// SHA-256 over the matrix dimensions and the label multiset (class names
/// with their counts, sorted by name), hex encoded.
pub fn corpus_fingerprint(matrix: &DocTermMatrix) -> String {
    let mut labels: Vec<(&str, usize)> = matrix
        .class_names()
        .iter()
        .map(String::as_str)
        .zip(matrix.class_counts())
        .collect();
    labels.sort();
    let mut h = Sha256::new();
    h.update(format!("docs={}\nfeatures={}\n", matrix.n_docs(), matrix.n_features()));
    for (name, count) in labels {
        h.update(format!("{name}\t{count}\n"));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to a sibling temp file, syncs it, then renames it over
/// `path`, so readers see either the old file or the new one.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn checkpoint_save(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let json = serde_json::to_vec(checkpoint)?;
    write_atomic(path, &json)
}

/// Loads and checks the format version. The fingerprint is checked by the
/// caller against the matrix it is about to resume on.
pub fn checkpoint_load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)?;
    let found = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Format { what: "checkpoint", reason: "missing version field".into() })?;
    if found != u64::from(CHECKPOINT_VERSION) {
        return Err(Error::CheckpointVersion { found: found as u32, expected: CHECKPOINT_VERSION });
    }
    Ok(serde_json::from_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Classifier;
    use crate::heuristic::FitnessEvaluator;
    use crate::mbo::{mbo_run, MboConfig, MboObserver};
    use crate::synthetic::{planted_matrix, PlantedSpec};
    use std::ops::ControlFlow;

    struct Grab(Option<MboSnapshot>);

    impl MboObserver for Grab {
        fn after_tour(&mut self, s: &MboSnapshot) -> ControlFlow<()> {
            self.0 = Some(s.clone());
            ControlFlow::Break(())
        }
    }

    fn sample() -> (DocTermMatrix, Checkpoint) {
        let m = planted_matrix(&PlantedSpec::small(), 11).unwrap();
        let ev = FitnessEvaluator::new(&m, Classifier::naive_bayes(), 5, 11).unwrap();
        let mut grab = Grab(None);
        let cfg = MboConfig { seed: 11, ..MboConfig::default() };
        mbo_run(&ev, &FeatureMask::ones(m.n_features()), &cfg, None, &mut grab).unwrap();
        let cp = Checkpoint::mbo(corpus_fingerprint(&m), RngStream::new(11).child("mbo", 0), &grab.0.unwrap());
        (m, cp)
    }

    #[test]
    fn round_trip() {
        let (m, cp) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        checkpoint_save(&path, &cp).unwrap();
        let back = checkpoint_load(&path).unwrap();
        assert_eq!(back, cp);
        back.check_fingerprint(&m).unwrap();
        assert_eq!(back.progress, 1);
        assert!(!dir.path().join(".cp.json.tmp").exists());
    }

    #[test]
    fn wrong_corpus_is_rejected() {
        let (_, cp) = sample();
        let other = planted_matrix(&PlantedSpec::separable(), 1).unwrap();
        let err = cp.check_fingerprint(&other).unwrap_err();
        assert_eq!(err.to_string(), "checkpoint from a different corpus");
    }

    #[test]
    fn version_and_truncation() {
        let (_, cp) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let mut bumped = cp.clone();
        bumped.version = 99;
        fs::write(&path, serde_json::to_vec(&bumped).unwrap()).unwrap();
        assert!(matches!(checkpoint_load(&path), Err(Error::CheckpointVersion { found: 99, .. })));

        checkpoint_save(&path, &cp).unwrap();
        let bytes = fs::read(&path).unwrap();
        let truncated = dir.path().join("trunc.json");
        fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
        assert!(checkpoint_load(&truncated).is_err());
        // the good file is untouched
        assert_eq!(checkpoint_load(&path).unwrap(), cp);
    }

    #[test]
    fn fingerprint_ignores_row_order_but_not_shape() {
        let a = DocTermMatrix::new(2, vec![vec![], vec![(0, 1.0)]], vec![0, 1], vec!["x".into(), "y".into()]).unwrap();
        let b = DocTermMatrix::new(2, vec![vec![(1, 1.0)], vec![]], vec![1, 0], vec!["y".into(), "x".into()]).unwrap();
        assert_eq!(corpus_fingerprint(&a), corpus_fingerprint(&b));
        let c = DocTermMatrix::new(3, vec![vec![], vec![]], vec![0, 1], vec!["x".into(), "y".into()]).unwrap();
        assert_ne!(corpus_fingerprint(&a), corpus_fingerprint(&c));
    }
}
