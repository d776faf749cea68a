use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::commands::{Context, Outcome};
use crate::error::{LabError, Result, EXIT_INPUT, EXIT_OK};
use crate::formats::{load, write_json};
use crate::{run, Cli, Command};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub jobs: Vec<Job>,
}

/// One invocation: a subcommand and its arguments, without `--out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub name: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub files: Vec<String>,
}

fn check(m: &Manifest) -> Result<()> {
    let mut names: Vec<&str> = m.jobs.iter().map(|j| j.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(LabError::input("job names must be unique"));
    }
    for j in &m.jobs {
        let bad_name = j.name.is_empty() || j.name.contains(['/', '\\']) || j.name == "." || j.name == "..";
        if bad_name {
            return Err(LabError::input(format!("job name {:?} is not a plain directory name", j.name)));
        }
        if j.args.iter().any(|a| a == "--out" || a.starts_with("--out=")) {
            return Err(LabError::input(format!(
                "job {:?} sets --out; batch jobs write to their own directory",
                j.name
            )));
        }
    }
    Ok(())
}

fn run_job(job: &Job, dir: &Path) -> JobStatus {
    let mut argv = vec!["loewner-lab".to_string()];
    argv.extend(job.args.iter().cloned());
    argv.push("--out".into());
    argv.push(dir.display().to_string());
    let status = |code, error: Option<String>, files: Vec<String>| JobStatus {
        name: job.name.clone(),
        exit_code: code,
        error,
        files,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => return status(EXIT_INPUT, Some(e.to_string().trim_end().to_string()), vec![]),
    };
    if matches!(cli.command, Command::Batch { .. }) {
        return status(EXIT_INPUT, Some("batch jobs cannot nest".into()), vec![]);
    }
    match run(&cli) {
        Ok(o) => status(o.code, None, o.files.iter().map(|f| f.display().to_string()).collect()),
        Err(e) => status(e.exit_code(), Some(e.to_string()), vec![]),
    }
}

/// Runs every job on a pool of scoped threads. The summary lists jobs in manifest order and
/// the batch exits with the largest job exit code.
pub fn run_batch(ctx: &Context, manifest: &Path) -> Result<Outcome> {
    let file = load(manifest)?;
    let m: Manifest =
        serde_json::from_slice(&file.bytes).map_err(|e| LabError::input(format!("{}: {e}", file.name)))?;
    if m.version != crate::formats::FORMAT_VERSION {
        return Err(LabError::input(format!("unsupported manifest version {}", m.version)));
    }
    check(&m)?;
    let root = &ctx.config.output_dir;
    std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;

    let results: Mutex<Vec<Option<JobStatus>>> = Mutex::new(vec![None; m.jobs.len()]);
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(m.jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = m.jobs.get(i) else { break };
                let st = run_job(job, &root.join(&job.name));
                results.lock().unwrap()[i] = Some(st);
            });
        }
    });
    let statuses: Vec<JobStatus> =
        results.into_inner().unwrap().into_iter().map(|s| s.expect("every job ran")).collect();
    let code = statuses.iter().map(|s| s.exit_code).max().unwrap_or(EXIT_OK);
    let path = root.join("batch.json");
    write_json(&path, &ctx.report("batch", &[&file], statuses))?;
    Ok(Outcome { files: vec![path], code })
}
