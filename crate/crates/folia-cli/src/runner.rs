//! Scan execution: a bounded worker pool over the (entry, seed, prime)
//! product, idempotent resume from an existing output file, and a single
//! ordered appender so output bytes are deterministic for any --jobs value.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::mpsc;
use std::sync::Mutex;

use crate::commands::{scan_run_line, CmdError, CmdResult};
use crate::formats::{scan_key, ScanConfig, ScanLineKey};

#[derive(Clone, Debug)]
struct Job {
    index: usize,
    n: usize,
    degrees: Vec<u32>,
    seed: u64,
    prime: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ScanSummary {
    pub written: usize,
    pub skipped: usize,
}

/// Keys of the runs already present in the output file. Unparseable lines
/// are ignored rather than fatal, so a partially written tail does not block
/// a resume.
fn completed_keys(path: &Path) -> CmdResult<HashSet<String>> {
    let mut keys = HashSet::new();
    if !path.exists() {
        return Ok(keys);
    }
    let file = std::fs::File::open(path)
        .map_err(|e| CmdError::new(2, format!("cannot open {}: {e}", path.display())))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| CmdError::new(2, format!("cannot read scan output: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(parsed) = serde_json::from_str::<ScanLineKey>(&line) {
            if let Some(key) = parsed.key() {
                keys.insert(key);
            }
        }
    }
    Ok(keys)
}

/// Runs the scan, appending one JSON line per fresh (instance, seed, prime)
/// key. Lines are emitted in the deterministic job order regardless of the
/// worker count.
pub fn execute_scan(
    config: &ScanConfig,
    out_path: &Path,
    jobs: usize,
    default_prime: u64,
) -> CmdResult<ScanSummary> {
    if config.entries.is_empty() {
        return Err(CmdError::new(2, "scan config has no entries"));
    }
    let seeds: Vec<u64> = if config.seeds.is_empty() {
        vec![1]
    } else {
        config.seeds.clone()
    };
    let primes: Vec<u64> = if config.primes.is_empty() {
        vec![default_prime]
    } else {
        config.primes.clone()
    };

    let done = completed_keys(out_path)?;
    let mut queue = VecDeque::new();
    let mut skipped = 0usize;
    let mut index = 0usize;
    for entry in &config.entries {
        for &seed in &seeds {
            for &prime in &primes {
                if done.contains(&scan_key(entry.n, &entry.degrees, seed, prime)) {
                    skipped += 1;
                    continue;
                }
                queue.push_back(Job {
                    index,
                    n: entry.n,
                    degrees: entry.degrees.clone(),
                    seed,
                    prime,
                });
                index += 1;
            }
        }
    }
    let total = queue.len();

    let mut out = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_path)
        .map_err(|e| CmdError::new(2, format!("cannot open {}: {e}", out_path.display())))?;

    let workers = jobs.max(1).min(total.max(1));
    let queue = Mutex::new(queue);
    let (tx, rx) = mpsc::channel::<(usize, String)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let queue = &queue;
            scope.spawn(move || loop {
                let job = match queue.lock().unwrap().pop_front() {
                    Some(j) => j,
                    None => break,
                };
                let line = scan_run_line(job.n, &job.degrees, job.seed, job.prime);
                if tx.send((job.index, line)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // reorder buffer: write strictly in job order
        let mut next = 0usize;
        let mut pending: BTreeMap<usize, String> = BTreeMap::new();
        let mut written = 0usize;
        for (idx, line) in rx {
            pending.insert(idx, line);
            while let Some(line) = pending.remove(&next) {
                writeln!(out, "{line}")
                    .map_err(|e| CmdError::new(2, format!("cannot append scan line: {e}")))?;
                out.flush()
                    .map_err(|e| CmdError::new(2, format!("cannot flush scan output: {e}")))?;
                next += 1;
                written += 1;
            }
        }
        debug_assert!(pending.is_empty());
        Ok(ScanSummary { written, skipped })
    })
}
