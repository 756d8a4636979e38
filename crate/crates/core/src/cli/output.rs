//! File emission: fixed-format CSV, JSON sidecars, atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::CliError;
use crate::iof::Port;
use crate::spectra::{Channel, Method, Normalization, Spectrum};

pub const SPECTRUM_HEADER: &str = "omega_offset_gamma,value";
pub const SUMMARY_HEADER: &str =
    "sweep_value,dit_iof,dit_ipm,fwhm_iof,fwhm_ipm,splitting_iof,splitting_ipm,dit_peak_ratio,fwhm_discrepancy_pct";

/// 17 significant digits, round-trip exact.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::with_capacity(48 * s.values.len());
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for (w, v) in s.grid.offsets().iter().zip(&s.values) {
        let _ = writeln!(out, "{},{}", format_value(*w), format_value(*v));
    }
    out
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Metadata written next to every spectrum CSV. Its `config` member is a
/// complete single-method configuration that reproduces the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    pub method: Method,
    pub channel: Channel,
    pub port: Option<Port>,
    pub normalization: Normalization,
    /// Fock cutoff actually used after truncation escalation.
    pub n_max_used: Option<usize>,
    pub points: usize,
    pub wall_clock_seconds: f64,
    pub config: RunConfig,
}

pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

pub fn gnuplot_script(files: &[(&str, &str)], title: &str) -> String {
    let mut s = String::from("set datafile separator ','\nset key top right\n");
    let _ = writeln!(s, "set title '{title}'");
    s.push_str("set xlabel 'offset from cavity frequency (gamma)'\nset ylabel 'transmission'\nplot ");
    let series: Vec<String> = files
        .iter()
        .map(|(file, label)| format!("'{file}' using 1:2 every ::1 with lines title '{label}'"))
        .collect();
    s.push_str(&series.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SystemParams;
    use crate::spectra::FrequencyGrid;

    #[test]
    fn value_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1.0 / 3.0, 6.02e23, 1e-300] {
            let s = format_value(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_value(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 3).unwrap();
        let s = Spectrum::new(grid, vec![0.5, 1.0, 0.5], Method::Iof, Channel::ThroughPort, Normalization::Raw, SystemParams::default())
            .unwrap();
        let csv = spectrum_csv(&s);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], SPECTRUM_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(csv.ends_with('\n'));
        assert_eq!(lines[2], "0.0000000000000000e0,1.0000000000000000e0");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
