use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::AnyInstance;
use crate::oracles::csv_err;

use super::config::ExperimentConfig;
use super::experiment::{config_hash, load_instance_file, run_trial, RunRecord};
use super::report::{read_records_file, write_records};

/// Runs every `(grid point, trial)` of `base` not already present in `out`,
/// appending each finished row, then rewrites `out` canonically sorted.
///
/// `parallel` is the worker count (0 picks the rayon default). Returns every
/// record in the file.
pub fn sweep(base: &ExperimentConfig, out: &Path, parallel: usize) -> Result<Vec<RunRecord>> {
    base.validate()?;
    if base.sweep.as_ref().is_none_or(|g| g.is_empty()) {
        return Err(Error::config("sweep needs a nonempty [sweep] grid"));
    }
    let points = base.points()?;

    let mut done: Vec<RunRecord> = if out.exists() {
        read_records_file(out)?
    } else {
        Vec::new()
    };
    let finished: HashSet<(String, u64)> = done.iter().map(|r| (r.config_hash.clone(), r.trial)).collect();

    let mut stored: HashMap<String, Option<AnyInstance>> = HashMap::new();
    let mut tasks = Vec::new();
    for p in &points {
        let hash = config_hash(p);
        for trial in 0..p.trials {
            if !finished.contains(&(hash.clone(), trial)) {
                tasks.push((p, trial, hash.clone()));
            }
        }
        if !stored.contains_key(&hash) {
            stored.insert(hash, load_instance_file(p)?);
        }
    }
    log::info!(
        "sweep: {} grid points, {} rows done, {} to run",
        points.len(),
        finished.len(),
        tasks.len()
    );

    let fresh = !out.exists() || std::fs::metadata(out)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(out)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(BufWriter::new(file));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let mut fresh_rows = Vec::with_capacity(tasks.len());
    std::thread::scope(|s| -> Result<()> {
        let stored = &stored;
        let tasks = &tasks;
        s.spawn(move || {
            pool.install(|| {
                tasks.par_iter().for_each_with(tx, |tx, (p, trial, hash)| {
                    let record = run_trial(p, *trial, stored[hash].as_ref());
                    // the receiver outlives every worker
                    let _ = tx.send(record);
                });
            });
        });
        for record in rx {
            writer.serialize(&record).map_err(csv_err)?;
            writer.flush()?;
            fresh_rows.push(record);
        }
        Ok(())
    })?;
    drop(writer);

    done.extend(fresh_rows);
    let tmp = out.with_extension("csv.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_records(&done, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, out)?;
    super::report::canonical_sort(&mut done);
    Ok(done)
}
