//! The `nncert-corr-v1` JSON document.
//!
//! ```json
//! {"format": "nncert-corr-v1",
//!  "cardinalities": {"x": 2, "y": 1, "z": 2, "a": 2, "b": 2, "c": 2},
//!  "probabilities": [p_0, ..., p_31]}
//! ```
//!
//! Probabilities follow the flat `(x, z, a, b, c)` offset of
//! [`ScenarioShape::offset`]. Parsing only checks structure; call
//! [`Correlation::validate`] to check the numbers.

use serde::{Deserialize, Serialize};

use crate::correlation::{Correlation, ScenarioShape};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "nncert-corr-v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cardinalities {
    x: usize,
    y: usize,
    z: usize,
    a: usize,
    b: usize,
    c: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    cardinalities: Cardinalities,
    probabilities: Vec<f64>,
}

pub fn to_json(corr: &Correlation) -> String {
    let s = corr.shape();
    let doc = Document {
        format: FORMAT_TAG.to_string(),
        cardinalities: Cardinalities {
            x: s.card_x,
            y: s.card_y,
            z: s.card_z,
            a: s.card_a,
            b: s.card_b,
            c: s.card_c,
        },
        probabilities: corr.values().to_vec(),
    };
    // Serialization of plain numbers and strings cannot fail.
    serde_json::to_string_pretty(&doc).expect("serializable document")
}

pub fn from_json(text: &str) -> Result<Correlation> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if doc.format != FORMAT_TAG {
        return Err(Error::Format(format!(
            "unknown format tag {:?}, expected {FORMAT_TAG:?}",
            doc.format
        )));
    }
    let c = &doc.cardinalities;
    let shape = ScenarioShape::new(c.x, c.y, c.z, c.a, c.b, c.c)
        .map_err(|e| Error::Format(e.to_string()))?;
    if let Some(i) = doc.probabilities.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format(format!("probability {i} is not finite")));
    }
    Correlation::new(shape, doc.probabilities)
}

pub fn to_bytes(corr: &Correlation) -> Vec<u8> {
    to_json(corr).into_bytes()
}

pub fn from_bytes(bytes: &[u8]) -> Result<Correlation> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
    from_json(text)
}

pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Correlation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_file(corr: &Correlation, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
    let mut text = to_json(corr);
    text.push('\n');
    std::fs::write(path, text)
}
