//! Dataset manifest: JSON-lines records describing every synthesized sample.
//!
//! The first line is a header naming the schema version, the seeded RNG
//! algorithm, the root seed, and the frame rate; each following line is one
//! self-contained sample record. Frame plans serialize as arrays of source
//! indices with `null` marking blank frames.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::{PerturbedSample, RNG_ALGORITHM};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub schema_version: u32,
    /// Named generator algorithm; every sample seed feeds this RNG.
    pub rng: String,
    pub root_seed: u64,
    pub fps: f64,
}

impl ManifestHeader {
    pub fn new(root_seed: u64, fps: f64) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            rng: RNG_ALGORITHM.to_string(),
            root_seed,
            fps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub samples: Vec<PerturbedSample>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record_type", rename_all = "snake_case")]
enum ManifestLine {
    Header(ManifestHeader),
    Sample(PerturbedSample),
}

/// Writes header and samples as JSON lines.
pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::fs::File::create(path)?;
    let header = ManifestLine::Header(manifest.header.clone());
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for sample in &manifest.samples {
        let line = ManifestLine::Sample(sample.clone());
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

/// Reads a manifest, requiring a leading header with a supported version.
pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let schema_err = |detail: String| Error::Schema {
        path: path.to_path_buf(),
        detail,
    };
    let file = std::fs::File::open(path).map_err(|e| schema_err(e.to_string()))?;
    let mut header: Option<ManifestHeader> = None;
    let mut samples = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(&line)
            .map_err(|e| schema_err(format!("line {}: {e}", lineno + 1)))?;
        match parsed {
            ManifestLine::Header(h) => {
                if h.schema_version != MANIFEST_SCHEMA_VERSION {
                    return Err(schema_err(format!(
                        "unsupported schema_version {}",
                        h.schema_version
                    )));
                }
                if header.replace(h).is_some() {
                    return Err(schema_err("duplicate header record".into()));
                }
            }
            ManifestLine::Sample(s) => {
                if header.is_none() {
                    return Err(schema_err("sample record before header".into()));
                }
                samples.push(s);
            }
        }
    }
    let header = header.ok_or_else(|| schema_err("missing header record".into()))?;
    Ok(DatasetManifest { header, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{gen_keep, gen_mask, gen_shift};
    use crate::temporal::{ActionSegment, AnnotationRecord, TimeInterval};

    fn record() -> AnnotationRecord {
        let segs = vec![
            ActionSegment::new(TimeInterval::new(0.0, 3.0).unwrap(), "one").unwrap(),
            ActionSegment::new(TimeInterval::new(4.0, 7.0).unwrap(), "two").unwrap(),
        ];
        AnnotationRecord::new("v", "p", 8.0, segs).unwrap()
    }

    #[test]
    fn manifest_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("manifest.jsonl");
        let rec = record();
        let manifest = DatasetManifest {
            header: ManifestHeader::new(42, 1.0),
            samples: vec![
                gen_mask(&rec, 1, 1.0).unwrap(),
                gen_shift(&rec, 2, 1.0).unwrap(),
                gen_keep(&rec, 3, 1.0).unwrap(),
            ],
        };
        write_manifest(&path, &manifest).unwrap();
        let loaded = read_manifest(&path).unwrap();
        assert_eq!(loaded, manifest);
        assert_eq!(loaded.header.rng, "chacha8");
    }

    #[test]
    fn blank_frames_serialize_as_null() {
        let rec = record();
        let sample = gen_mask(&rec, 1, 1.0).unwrap();
        let json = serde_json::to_string(&sample).unwrap();
        assert!(json.contains("null"), "{json}");
    }

    #[test]
    fn missing_header_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("manifest.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(read_manifest(&path).is_err());
    }
}
