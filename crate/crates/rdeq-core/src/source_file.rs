//! JSON source-description format.
//!
//! A single document carries the source pmf, the three observation
//! channels, the distortion matrix, and optionally an auxiliary-channel
//! configuration:
//!
//! ```json
//! {
//!   "alphabets": {"x": 2, "y1": 2, "y2": 2, "e": 2, "xhat": 2},
//!   "px": [0.5, 0.5],
//!   "py1_x": [[0.9, 0.1], [0.1, 0.9]],
//!   "py2_x": [[0.9, 0.1], [0.1, 0.9]],
//!   "pe_x":  [[0.7, 0.3], [0.3, 0.7]],
//!   "distortion": [[0.0, 1.0], [1.0, 0.0]],
//!   "d_max": 1.0,
//!   "aux": {
//!     "pu1_y1": [[1.0, 0.0], [0.0, 1.0]],
//!     "pu2_y2": [[1.0, 0.0], [0.0, 1.0]],
//!     "pv1_u1": [[1.0], [1.0]],
//!     "pv2_u2": [[1.0], [1.0]],
//!     "xhat": [[0, 0], [1, 1]]
//!   }
//! }
//! ```
//!
//! The `alphabets` block is optional (sizes are implied by the arrays) but
//! checked when present. Rows whose sums are off by at most `1e-5` are
//! renormalized with a warning; anything worse is rejected with its
//! location. `aux` is optional; commands that need one fall back to a
//! transparent default.

use serde::Deserialize;

use crate::error::Error;
use crate::prob::{CondPmf, Pmf, SourceSpec};
use crate::regions::{AuxConfig, XhatMap};
use crate::Result;

/// Row sums within this tolerance of one are renormalized (with a
/// warning); beyond it the file is rejected. Wide enough to accept a row
/// stated as `0.999999`, strict enough to catch real mistakes.
pub const ROW_SUM_TOL: f64 = 1e-5;

#[derive(Debug, Deserialize)]
struct RawAlphabets {
    x: Option<usize>,
    y1: Option<usize>,
    y2: Option<usize>,
    e: Option<usize>,
    xhat: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct RawAux {
    pu1_y1: Vec<Vec<f64>>,
    pu2_y2: Vec<Vec<f64>>,
    pv1_u1: Vec<Vec<f64>>,
    pv2_u2: Vec<Vec<f64>>,
    xhat: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
struct RawSource {
    alphabets: Option<RawAlphabets>,
    px: Vec<f64>,
    py1_x: Vec<Vec<f64>>,
    py2_x: Vec<Vec<f64>>,
    pe_x: Vec<Vec<f64>>,
    distortion: Vec<Vec<f64>>,
    d_max: f64,
    aux: Option<RawAux>,
}

/// A validated source description plus the optional auxiliary
/// configuration and any renormalization warnings.
#[derive(Debug, Clone)]
pub struct LoadedSource {
    pub source: SourceSpec,
    pub aux: Option<AuxConfig>,
    pub warnings: Vec<String>,
}

fn clean_row(
    name: &str,
    row_idx: usize,
    row: &[f64],
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    for (col, &p) in row.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::BadSourceFile(format!(
                "{name} row {row_idx} column {col}: entry {p} is negative or not finite"
            )));
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::BadSourceFile(format!(
            "{name} row {row_idx} sums to {sum}, off by more than {ROW_SUM_TOL:e}"
        )));
    }
    let mut out = row.to_vec();
    if (sum - 1.0).abs() > crate::PMF_TOL {
        for p in &mut out {
            *p /= sum;
        }
        warnings.push(format!(
            "{name} row {row_idx} summed to {sum}; renormalized"
        ));
    }
    Ok(out)
}

fn clean_channel(
    name: &str,
    rows: &[Vec<f64>],
    expect_rows: Option<usize>,
    warnings: &mut Vec<String>,
) -> Result<CondPmf> {
    if rows.is_empty() {
        return Err(Error::BadSourceFile(format!("{name} has no rows")));
    }
    if let Some(want) = expect_rows {
        if rows.len() != want {
            return Err(Error::BadSourceFile(format!(
                "{name} has {} rows, expected {want}",
                rows.len()
            )));
        }
    }
    let ncols = rows[0].len();
    let mut clean = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::BadSourceFile(format!(
                "{name} row {i} has {} columns, expected {ncols}",
                row.len()
            )));
        }
        clean.push(
            Pmf::new(clean_row(name, i, row, warnings)?)
                .map_err(|e| Error::BadSourceFile(format!("{name} row {i}: {e}")))?,
        );
    }
    CondPmf::new(clean)
}

/// Parses and validates a source description from JSON text.
pub fn parse_source_str(text: &str) -> Result<LoadedSource> {
    let raw: RawSource = serde_json::from_str(text)
        .map_err(|e| Error::BadSourceFile(format!("not valid JSON: {e}")))?;
    let mut warnings = Vec::new();

    let px = Pmf::new(clean_row("px", 0, &raw.px, &mut warnings)?)
        .map_err(|e| Error::BadSourceFile(format!("px: {e}")))?;
    let nx = px.len();
    let py1_x = clean_channel("py1_x", &raw.py1_x, Some(nx), &mut warnings)?;
    let py2_x = clean_channel("py2_x", &raw.py2_x, Some(nx), &mut warnings)?;
    let pe_x = clean_channel("pe_x", &raw.pe_x, Some(nx), &mut warnings)?;

    let source = SourceSpec::new(px, py1_x, py2_x, pe_x, raw.distortion, raw.d_max)?;

    if let Some(a) = &raw.alphabets {
        for (name, stated, actual) in [
            ("x", a.x, source.nx()),
            ("y1", a.y1, source.ny1()),
            ("y2", a.y2, source.ny2()),
            ("e", a.e, source.ne()),
            ("xhat", a.xhat, source.nxhat()),
        ] {
            if let Some(s) = stated {
                if s != actual {
                    return Err(Error::BadSourceFile(format!(
                        "alphabets.{name} = {s} but the arrays imply {actual}"
                    )));
                }
            }
        }
    }

    let aux = match &raw.aux {
        None => None,
        Some(raw_aux) => {
            let pu1_y1 = clean_channel(
                "aux.pu1_y1",
                &raw_aux.pu1_y1,
                Some(source.ny1()),
                &mut warnings,
            )?;
            let pu2_y2 = clean_channel(
                "aux.pu2_y2",
                &raw_aux.pu2_y2,
                Some(source.ny2()),
                &mut warnings,
            )?;
            let nu1 = pu1_y1.n_out();
            let nu2 = pu2_y2.n_out();
            let pv1_u1 = clean_channel("aux.pv1_u1", &raw_aux.pv1_u1, Some(nu1), &mut warnings)?;
            let pv2_u2 = clean_channel("aux.pv2_u2", &raw_aux.pv2_u2, Some(nu2), &mut warnings)?;
            if raw_aux.xhat.len() != nu1 {
                return Err(Error::BadSourceFile(format!(
                    "aux.xhat has {} rows, expected {nu1}",
                    raw_aux.xhat.len()
                )));
            }
            let mut table = Vec::with_capacity(nu1 * nu2);
            for (i, row) in raw_aux.xhat.iter().enumerate() {
                if row.len() != nu2 {
                    return Err(Error::BadSourceFile(format!(
                        "aux.xhat row {i} has {} columns, expected {nu2}",
                        row.len()
                    )));
                }
                for (j, &letter) in row.iter().enumerate() {
                    if letter >= source.nxhat() {
                        return Err(Error::BadSourceFile(format!(
                            "aux.xhat[{i}][{j}] = {letter} outside the reconstruction \
                             alphabet of size {}",
                            source.nxhat()
                        )));
                    }
                    table.push(letter);
                }
            }
            Some(AuxConfig::new(
                pu1_y1,
                pu2_y2,
                pv1_u1,
                pv2_u2,
                XhatMap::new(table, nu1, nu2),
            )?)
        }
    };

    Ok(LoadedSource {
        source,
        aux,
        warnings,
    })
}

/// Reads and validates a source description file.
pub fn parse_source_file(path: &std::path::Path) -> Result<LoadedSource> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadSourceFile(format!("cannot read {}: {e}", path.display())))?;
    parse_source_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "alphabets": {"x": 2, "y1": 2, "y2": 2, "e": 2, "xhat": 2},
        "px": [0.5, 0.5],
        "py1_x": [[0.9, 0.1], [0.1, 0.9]],
        "py2_x": [[0.9, 0.1], [0.1, 0.9]],
        "pe_x":  [[0.7, 0.3], [0.3, 0.7]],
        "distortion": [[0.0, 1.0], [1.0, 0.0]],
        "d_max": 1.0
    }"#;

    #[test]
    fn loads_a_clean_description() {
        let loaded = parse_source_str(GOOD).unwrap();
        assert!(loaded.warnings.is_empty());
        assert!(loaded.aux.is_none());
        assert_eq!(loaded.source.nx(), 2);
        assert!((loaded.source.py1_x.prob(0, 1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn renormalizes_slightly_off_rows_with_a_warning() {
        let off = r#"{
            "px": [0.5, 0.5],
            "py1_x": [[0.899999, 0.1], [0.1, 0.9]],
            "py2_x": [[0.9, 0.1], [0.1, 0.9]],
            "pe_x":  [[0.7, 0.3], [0.3, 0.7]],
            "distortion": [[0.0, 1.0], [1.0, 0.0]],
            "d_max": 1.0
        }"#;
        let loaded = parse_source_str(off).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains("py1_x row 0"));
        let row_sum: f64 = (0..2).map(|c| loaded.source.py1_x.prob(0, c)).sum();
        assert!((row_sum - 1.0).abs() <= crate::PMF_TOL);
    }

    #[test]
    fn rejects_badly_unnormalized_rows() {
        let bad = GOOD.replace("[0.9, 0.1]", "[0.8, 0.1]");
        let err = parse_source_str(&bad).unwrap_err();
        assert!(err.to_string().contains("py1_x row 0"), "{err}");
    }

    #[test]
    fn rejects_negative_entries_with_location() {
        let bad = GOOD.replace("[0.1, 0.9]", "[-0.1, 1.1]");
        let err = parse_source_str(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("py1_x"), "{msg}");
        assert!(msg.contains("column 0"), "{msg}");
    }

    #[test]
    fn rejects_inconsistent_alphabets() {
        let bad = GOOD.replace("\"y1\": 2", "\"y1\": 3");
        let err = parse_source_str(&bad).unwrap_err();
        assert!(err.to_string().contains("alphabets.y1"), "{err}");
    }

    #[test]
    fn loads_an_aux_block() {
        let with_aux = r#"{
            "px": [0.5, 0.5],
            "py1_x": [[0.9, 0.1], [0.1, 0.9]],
            "py2_x": [[0.9, 0.1], [0.1, 0.9]],
            "pe_x":  [[0.7, 0.3], [0.3, 0.7]],
            "distortion": [[0.0, 1.0], [1.0, 0.0]],
            "d_max": 1.0,
            "aux": {
                "pu1_y1": [[1.0, 0.0], [0.0, 1.0]],
                "pu2_y2": [[1.0, 0.0], [0.0, 1.0]],
                "pv1_u1": [[1.0], [1.0]],
                "pv2_u2": [[1.0], [1.0]],
                "xhat": [[0, 0], [1, 1]]
            }
        }"#;
        let loaded = parse_source_str(with_aux).unwrap();
        let aux = loaded.aux.unwrap();
        assert_eq!(aux.nu1(), 2);
        assert_eq!(aux.nv1(), 1);
        assert_eq!(aux.xhat.get(1, 0), 1);
    }

    #[test]
    fn rejects_out_of_range_reconstruction_letters() {
        let bad = r#"{
            "px": [0.5, 0.5],
            "py1_x": [[0.9, 0.1], [0.1, 0.9]],
            "py2_x": [[0.9, 0.1], [0.1, 0.9]],
            "pe_x":  [[0.7, 0.3], [0.3, 0.7]],
            "distortion": [[0.0, 1.0], [1.0, 0.0]],
            "d_max": 1.0,
            "aux": {
                "pu1_y1": [[1.0, 0.0], [0.0, 1.0]],
                "pu2_y2": [[1.0, 0.0], [0.0, 1.0]],
                "pv1_u1": [[1.0], [1.0]],
                "pv2_u2": [[1.0], [1.0]],
                "xhat": [[0, 5], [1, 1]]
            }
        }"#;
        let err = parse_source_str(bad).unwrap_err();
        assert!(err.to_string().contains("xhat[0][1]"), "{err}");
    }
}
