//! File output helpers. Relative paths are joined onto `EPDWAVE_OUT_DIR`
//! when that variable is set, so batch runs can redirect artifacts without
//! touching every flag.

use std::path::{Path, PathBuf};

use crate::CliError;

pub fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("EPDWAVE_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    let full = resolve_out_path(path);
    if let Some(parent) = full.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(&full, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", full.display())))?;
    Ok(full)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("json encode: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// All numeric exports go through this formatter: 17 significant digits, so
/// a CSV round-trips every f64 bit-exactly and reruns diff clean.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(fields: &[f64]) -> String {
    let cells: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
    cells.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatter_round_trips_bits() {
        for &x in &[0.0, 1.0, -1.5, 1.0 / 3.0, 2.4e1, 1.234567890123456e-7] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_row_joins_with_commas() {
        let row = csv_row(&[1.0, 2.5]);
        assert_eq!(row, "1.0000000000000000e0,2.5000000000000000e0");
    }
}
