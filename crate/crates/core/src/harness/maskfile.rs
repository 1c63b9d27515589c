//! Mask files: `M=<selected count>` on the first line, the bit string on
//! the second. A CSV sidecar lists the selected features.

use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::heuristic::FeatureMask;

pub fn format_mask(mask: &FeatureMask) -> String {
    format!("M={}\n{}\n", mask.count_ones(), mask.to_bit_string())
}

pub fn parse_mask(text: &str) -> Result<FeatureMask> {
    let bad = |reason: String| Error::Format { what: "mask file", reason };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let count: usize = header
        .trim()
        .strip_prefix("M=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad(format!("expected \"M=<count>\", found {header:?}")))?;
    let bits = lines.next().ok_or_else(|| bad("missing bit line".into()))?;
    let mask = FeatureMask::parse_bits(bits.trim())?;
    if mask.count_ones() != count {
        return Err(bad(format!("header says {count} selected, bit line has {}", mask.count_ones())));
    }
    Ok(mask)
}

pub fn write_mask(path: &Path, mask: &FeatureMask) -> Result<()> {
    fs::write(path, format_mask(mask)).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: &Path) -> Result<FeatureMask> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mask(&text)
}

/// `index,term,ig` rows for every selected feature, ascending by index.
pub fn format_sidecar(mask: &FeatureMask, vocab: &Vocabulary, gain: &[f64]) -> String {
    let mut out = String::from("index,term,ig\n");
    for j in mask.ones_iter() {
        let term = vocab.term(j).unwrap_or("");
        out.push_str(&format!("{j},{term},{}\n", gain.get(j).copied().unwrap_or(0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = FeatureMask::parse_bits("1100100110").unwrap();
        let text = format_mask(&m);
        assert_eq!(text, "M=5\n1100100110\n");
        assert_eq!(parse_mask(&text).unwrap(), m);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_mask("").is_err());
        assert!(parse_mask("M=2\n").is_err());
        assert!(parse_mask("N=2\n11\n").is_err());
        assert!(parse_mask("M=3\n11\n").is_err());
        assert!(parse_mask("M=1\n1x\n").is_err());
    }
}
