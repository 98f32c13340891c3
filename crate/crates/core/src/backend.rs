//! Execution backends and the resumable job executor.
//!
//! Every benchmark reduces to a list of [`Job`]s (circuit + shot count +
//! stable id). A [`Backend`] turns each job into a [`Measurement`]; the
//! random stream of a job depends only on the root seed and the job id, so
//! results are independent of scheduling and thread count.

use crate::circuit::{Circuit, CircuitJson};
use crate::error::{Error, Result};
use crate::sim::{self, stream_rng, Measurement, NoiseModel, Readout};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Job {
    pub id: String,
    pub circuit: Circuit,
    pub shots: u64,
}

impl Job {
    pub fn new(id: impl Into<String>, circuit: Circuit, shots: u64) -> Self {
        Self { id: id.into(), circuit, shots }
    }
}

/// File-queue configuration for the mock remote backend.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    /// Directory in which per-batch queues are created.
    pub queue_dir: PathBuf,
    /// Executable that understands `worker --queue <dir>`.
    pub worker: PathBuf,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Exact outcome probabilities; shots are only recorded.
    Exact,
    /// Ideal Born-rule shot sampling.
    Sample,
    /// Trajectory sampling under a noise model.
    Noisy(NoiseModel),
    /// Ideal sampling performed by a separate worker process through job files.
    MockRemote(RemoteConfig),
}

impl Backend {
    /// Parses `exact`, `sample`, `noisy:<noise.json>` or `mock-remote`
    /// (the remote worker defaults to the running executable).
    pub fn parse(spec: &str, queue_dir: &Path) -> Result<Self> {
        match spec {
            "exact" => Ok(Backend::Exact),
            "sample" => Ok(Backend::Sample),
            "mock-remote" => Ok(Backend::MockRemote(RemoteConfig {
                queue_dir: queue_dir.to_path_buf(),
                worker: std::env::current_exe()?,
                timeout: Duration::from_secs(600),
            })),
            s => match s.strip_prefix("noisy:") {
                Some(path) => Ok(Backend::Noisy(NoiseModel::load(Path::new(path))?)),
                None => Err(Error::InvalidConfig(format!("unknown backend {s:?}"))),
            },
        }
    }

    pub fn descriptor(&self) -> BackendDescriptor {
        match self {
            Backend::Exact => BackendDescriptor { kind: "exact".into(), noise: None },
            Backend::Sample => BackendDescriptor { kind: "sample".into(), noise: None },
            Backend::Noisy(n) => BackendDescriptor { kind: "noisy".into(), noise: Some(*n) },
            Backend::MockRemote(_) => BackendDescriptor { kind: "mock-remote".into(), noise: None },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Backend::Exact)
    }

    /// Runs every job; the output order matches `jobs`.
    pub fn execute(&self, jobs: &[Job], seed: u64) -> Result<Vec<Measurement>> {
        match self {
            Backend::MockRemote(cfg) => remote_roundtrip(cfg, jobs, seed),
            _ => jobs.par_iter().map(|job| self.execute_one(job, seed)).collect(),
        }
    }

    fn execute_one(&self, job: &Job, seed: u64) -> Result<Measurement> {
        let readout = Readout::of(&job.circuit);
        match self {
            Backend::Exact => {
                let (readout, probs) = sim::exact_distribution(&job.circuit)?;
                Ok(Measurement::exact(job.shots, readout.width(), &probs))
            }
            Backend::Sample => {
                let state = sim::simulate(&job.circuit)?;
                let probs = state.probabilities(&readout.qubits);
                let mut rng = stream_rng(seed, &job.id);
                Ok(Measurement::Counts(sim::measure::sample_outcomes(
                    &probs, &readout, job.shots, &mut rng,
                )))
            }
            Backend::Noisy(noise) => {
                let mut rng = stream_rng(seed, &job.id);
                Ok(Measurement::Counts(sim::sample_noisy(&job.circuit, noise, job.shots, &mut rng)?))
            }
            Backend::MockRemote(_) => unreachable!("remote jobs run in batches"),
        }
    }
}

/// Serializable summary of a backend for manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub noise: Option<NoiseModel>,
}

/// One entry of a remote job queue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobFile {
    pub id: String,
    pub seed: u64,
    pub shots: u64,
    pub circuit: CircuitJson,
}

/// Writes `contents` to `path` via a temporary sibling and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn job_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("job-{k:06}.json"))
}

fn result_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("result-{k:06}.json"))
}

fn error_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("error-{k:06}.txt"))
}

fn remote_roundtrip(cfg: &RemoteConfig, jobs: &[Job], seed: u64) -> Result<Vec<Measurement>> {
    if jobs.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(&cfg.queue_dir)?;
    let dir = tempfile_dir(&cfg.queue_dir)?;
    for (k, job) in jobs.iter().enumerate() {
        let file = JobFile { id: job.id.clone(), seed, shots: job.shots, circuit: job.circuit.to_json() };
        write_atomic(&job_path(&dir, k), &serde_json::to_vec(&file)?)?;
    }
    write_atomic(&dir.join("ready"), jobs.len().to_string().as_bytes())?;
    let results = wait_for_worker(cfg, &dir, jobs.len());
    let _ = fs::remove_dir_all(&dir);
    results
}

fn tempfile_dir(parent: &Path) -> Result<PathBuf> {
    for attempt in 0u32.. {
        let dir = parent.join(format!("batch-{}-{attempt}", std::process::id()));
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn wait_for_worker(cfg: &RemoteConfig, dir: &Path, n: usize) -> Result<Vec<Measurement>> {
    let mut child = Command::new(&cfg.worker)
        .arg("worker")
        .arg("--queue")
        .arg(dir)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Backend(format!("cannot start worker {}: {e}", cfg.worker.display())))?;
    let deadline = Instant::now() + cfg.timeout;
    loop {
        if let Some(status) = child.try_wait()? {
            if !status.success() && !(0..n).any(|k| error_path(dir, k).exists()) {
                return Err(Error::Backend(format!("worker exited with {status}")));
            }
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout(format!("remote batch {}", dir.display())));
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    (0..n)
        .map(|k| {
            if let Ok(msg) = fs::read_to_string(error_path(dir, k)) {
                return Err(Error::MalformedJob(msg));
            }
            let text = fs::read_to_string(result_path(dir, k))
                .map_err(|_| Error::Timeout(format!("result {k} never arrived")))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect()
}

/// Worker side of the mock remote protocol: answers every job file in
/// `dir` with a sampled histogram (or an error file for malformed jobs).
/// Returns the number of malformed jobs.
pub fn serve_queue(dir: &Path) -> Result<usize> {
    let n: usize = fs::read_to_string(dir.join("ready"))
        .map_err(|_| Error::MalformedJob(format!("{} has no ready marker", dir.display())))?
        .trim()
        .parse()
        .map_err(|_| Error::MalformedJob("unreadable ready marker".into()))?;
    let outcomes: Vec<Result<()>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let answer = fs::read_to_string(job_path(dir, k))
                .map_err(|e| Error::MalformedJob(format!("job {k}: {e}")))
                .and_then(|text| {
                    serde_json::from_str::<JobFile>(&text)
                        .map_err(|e| Error::MalformedJob(format!("job {k}: {e}")))
                })
                .and_then(|file| {
                    let circuit = Circuit::from_json(&file.circuit)
                        .map_err(|e| Error::MalformedJob(format!("job {k}: {e}")))?;
                    let job = Job::new(file.id, circuit, file.shots);
                    Backend::Sample.execute_one(&job, file.seed)
                });
            match answer {
                Ok(m) => write_atomic(&result_path(dir, k), &serde_json::to_vec(&m)?),
                Err(e) => {
                    write_atomic(&error_path(dir, k), e.to_string().as_bytes())?;
                    Err(e)
                }
            }
        })
        .collect();
    Ok(outcomes.iter().filter(|r| r.is_err()).count())
}

/// Persists measurements per job id so that an interrupted run can resume.
#[derive(Debug, Clone)]
pub struct HistogramStore {
    dir: PathBuf,
}

impl HistogramStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn load(&self, id: &str) -> Result<Option<Measurement>> {
        match fs::read_to_string(self.path(id)) {
            Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, id: &str, m: &Measurement) -> Result<()> {
        let mut text = serde_json::to_string_pretty(m)?;
        text.push('\n');
        write_atomic(&self.path(id), text.as_bytes())
    }
}

/// Backend plus root seed plus optional persistence.
#[derive(Debug, Clone)]
pub struct Executor {
    pub backend: Backend,
    pub seed: u64,
    pub store: Option<HistogramStore>,
    /// Jobs per checkpoint when persisting.
    pub chunk: usize,
    /// Only stored results are used; a missing one is an error.
    pub offline: bool,
    /// Circuits and shots requested so far.
    pub usage: Arc<Usage>,
}

#[derive(Debug, Default)]
pub struct Usage {
    pub circuits: AtomicU64,
    pub shots: AtomicU64,
}

impl Executor {
    pub fn new(backend: Backend, seed: u64) -> Self {
        Self { backend, seed, store: None, chunk: 256, offline: false, usage: Arc::default() }
    }

    pub fn with_store(mut self, store: HistogramStore) -> Self {
        self.store = Some(store);
        self
    }

    /// Executor that only replays histograms from `store`.
    pub fn replay(store: HistogramStore) -> Self {
        Self { offline: true, ..Self::new(Backend::Exact, 0).with_store(store) }
    }

    /// Runs `jobs`, reusing any stored results and storing new ones after
    /// every chunk.
    pub fn run(&self, jobs: &[Job]) -> Result<Vec<Measurement>> {
        self.usage.circuits.fetch_add(jobs.len() as u64, Ordering::Relaxed);
        self.usage.shots.fetch_add(jobs.iter().map(|j| j.shots).sum(), Ordering::Relaxed);
        let Some(store) = &self.store else {
            return self.backend.execute(jobs, self.seed);
        };
        let mut out: Vec<Option<Measurement>> =
            jobs.iter().map(|j| store.load(&j.id)).collect::<Result<_>>()?;
        let missing: Vec<usize> = (0..jobs.len()).filter(|&k| out[k].is_none()).collect();
        if self.offline {
            if let Some(&k) = missing.first() {
                return Err(Error::MissingData(format!("no stored histogram for {}", jobs[k].id)));
            }
        }
        for chunk in missing.chunks(self.chunk.max(1)) {
            let batch: Vec<Job> = chunk.iter().map(|&k| jobs[k].clone()).collect();
            let results = self.backend.execute(&batch, self.seed)?;
            for (&k, m) in chunk.iter().zip(results) {
                store.save(&jobs[k].id, &m)?;
                out[k] = Some(m);
            }
        }
        Ok(out.into_iter().map(|m| m.expect("filled above")).collect())
    }
}
