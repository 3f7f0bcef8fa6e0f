//! Versioned annotation file schema and ingestion.
//!
//! Annotations are one JSON document per corpus with explicit field names:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "videos": [
//!     {
//!       "video_id": "vid_0001",
//!       "procedure_label": "venipuncture",
//!       "duration": 42.0,
//!       "segments": [ {"start": 0.5, "end": 6.0, "caption": "washes hands"} ]
//!     }
//!   ]
//! }
//! ```
//!
//! Validation happens during deserialization: segments are sorted by start,
//! out-of-bounds intervals are rejected (never clipped), and every failure
//! names the offending video and segment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::AnnotationRecord;

pub const ANNOTATION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub schema_version: u32,
    pub videos: Vec<AnnotationRecord>,
}

/// Loads and validates an annotation file.
pub fn parse_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let file: AnnotationFile = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if file.schema_version != ANNOTATION_SCHEMA_VERSION {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            detail: format!(
                "unsupported schema_version {} (expected {})",
                file.schema_version, ANNOTATION_SCHEMA_VERSION
            ),
        });
    }
    Ok(file.videos)
}

/// Writes records under the current schema version.
pub fn write_annotations(path: &Path, records: &[AnnotationRecord]) -> Result<()> {
    let file = AnnotationFile {
        schema_version: ANNOTATION_SCHEMA_VERSION,
        videos: records.to_vec(),
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
