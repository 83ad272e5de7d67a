//! Filesystem side of the tool: run directories, sweep tables, CDF files.

use sdnlte::engine::RunOutput;
use sdnlte::metrics::MetricsRecord;
use sdnlte::report::{self, RunManifest, RunStatus};
use sdnlte::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// Writes the CDF and reads it back to check its shape.
pub fn emit_cdf(metrics: &MetricsRecord, path: &Path) -> Result<()> {
    write(path, &report::cdf_csv(&metrics.gbr_cdf)?)?;
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    report::validate_cdf_csv(&bytes).map(|_| ())
}

/// Writes one run's directory and returns its path.
pub fn write_run(out_dir: &Path, run_id: &str, config: &sdnlte::engine::RunConfig, out: &RunOutput) -> Result<PathBuf> {
    let dir = out_dir.join(run_id);
    create_dir(&dir)?;
    write(&dir.join(report::RAW_FILE), &report::raw_csv(&out.raw)?)?;
    write(&dir.join(report::SUMMARY_FILE), &report::summary_json(&out.metrics)?)?;
    write(&dir.join(report::EVENTS_FILE), &report::events_jsonl(&out.events)?)?;
    emit_cdf(&out.metrics, &dir.join(report::CDF_FILE))?;
    let manifest = RunManifest {
        run_id: run_id.to_string(),
        status: RunStatus::Completed,
        error: None,
        files: [report::RAW_FILE, report::SUMMARY_FILE, report::EVENTS_FILE, report::CDF_FILE]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        config: config.clone(),
    };
    write(&dir.join(report::MANIFEST_FILE), &manifest.to_json()?)?;
    Ok(dir)
}

/// Records a failed run so partial sweeps stay self-describing.
pub fn write_failed_run(out_dir: &Path, run_id: &str, config: &sdnlte::engine::RunConfig, err: &Error) -> Result<()> {
    let dir = out_dir.join(run_id);
    create_dir(&dir)?;
    let manifest = RunManifest {
        run_id: run_id.to_string(),
        status: RunStatus::Failed,
        error: Some(err.to_string()),
        files: Vec::new(),
        config: config.clone(),
    };
    write(&dir.join(report::MANIFEST_FILE), &manifest.to_json()?)
}

pub fn write_bytes(out_dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    create_dir(out_dir)?;
    write(&out_dir.join(name), bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sdnlte::metrics::rate_cdf;

    #[test]
    fn cdf_file_for_one_user() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = sdnlte::metrics::compute_metrics(&[], 0, 1.0);
        m.gbr_cdf = rate_cdf(&[120_000.0]);
        let p = dir.path().join("cdf.csv");
        emit_cdf(&m, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "rate_bps,cumulative_fraction\n120000.0,0.0\n120000.0,1.0\n");
    }
}
