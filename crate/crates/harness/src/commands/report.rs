use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{epoch_series, probe, read_epoch_csv, train};
use crate::cli::ReportArgs;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{prepare_out, ManifestGuard, RunManifest, Status};
use crate::plots;

pub const TABLE: &str = "comparison.csv";
pub const TEXT: &str = "comparison.txt";
pub const COLUMNS: [&str; 12] = [
    "run",
    "framework",
    "dataset",
    "seed",
    "epochs",
    "lambda_x",
    "lambda_z",
    "status",
    "accuracy",
    "macro_f1",
    "trainable_params",
    "frozen_params",
];

const MISSING: &str = "n/a";

fn find_probe(run: &Path) -> Option<PathBuf> {
    [run.join("probe").join(probe::RESULT), run.join(probe::RESULT)].into_iter().find(|p| p.is_file())
}

fn run_name(run: &Path) -> String {
    run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| run.display().to_string())
}

/// One table row; probe cells are the JSON numbers printed verbatim.
fn row(run: &Path) -> CliResult<Vec<String>> {
    let manifest = RunManifest::load(run)?;
    let cfg_path = run.join(train::CONFIG);
    let cfg = RunConfig::from_table(RunConfig::read_table(&cfg_path)?)?;
    let mut cells = vec![
        run_name(run),
        cfg.model.framework.to_string(),
        toml::Value::try_from(cfg.data.dataset).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        cfg.model.seed.to_string(),
        cfg.model.epochs.to_string(),
        cfg.model.lambda_x.to_string(),
        cfg.model.lambda_z.to_string(),
        toml::Value::try_from(manifest.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
    ];
    match find_probe(run) {
        Some(p) => {
            let bytes = std::fs::read(&p).map_err(|e| CliError::io(&p, e))?;
            let r: probe::ProbeReport =
                serde_json::from_slice(&bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            cells.extend([
                r.result.accuracy.to_string(),
                r.result.macro_f1.to_string(),
                r.result.trainable_params.to_string(),
                r.result.frozen_params.to_string(),
            ]);
        }
        None => {
            log::warn!("{}: no probe result", run.display());
            cells.extend(std::iter::repeat_n(MISSING.to_string(), 4));
        }
    }
    Ok(cells)
}

fn aligned(rows: &[Vec<String>]) -> String {
    let mut widths = vec![0; COLUMNS.len()];
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    s
}

pub fn run(args: &ReportArgs) -> CliResult<()> {
    for r in &args.runs {
        if !r.join(crate::manifest::FILE).is_file() {
            return Err(CliError::Usage(format!("{} is not a run directory (no manifest.json)", r.display())));
        }
    }
    prepare_out(&args.out, args.force)?;
    let mut guard = ManifestGuard::start(&args.out, RunManifest::new("report".into(), "report"))?;
    let result = (|| -> CliResult<()> {
        let mut rows = vec![COLUMNS.iter().map(|c| c.to_string()).collect::<Vec<_>>()];
        for r in &args.runs {
            rows.push(row(r)?);
            if let Some(history) = read_epoch_csv(&r.join(train::EPOCHS)).filter(|h| !h.is_empty()) {
                let name = format!("plots/{}_loss.svg", run_name(r));
                std::fs::create_dir_all(args.out.join("plots")).map_err(|e| CliError::io(&args.out, e))?;
                plots::loss_curves(&epoch_series(&history), &run_name(r), &args.out.join(&name))?;
                guard.record(&name)?;
            }
        }
        let csv: String = rows.iter().map(|r| r.join(",") + "\n").collect();
        guard.write_artifact(TABLE, csv.as_bytes())?;
        let text = aligned(&rows);
        guard.write_artifact(TEXT, text.as_bytes())?;
        print!("{text}");
        Ok(())
    })();
    match result {
        Ok(()) => guard.finish(Status::Completed, None),
        Err(e) => {
            guard.finish(Status::Failed, Some(e.to_string()))?;
            Err(e)
        }
    }
}
