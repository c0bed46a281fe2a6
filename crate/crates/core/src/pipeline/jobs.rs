use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum JobKind {
    Suggestions,
    Outline,
    Deck,
    TextGrounding,
    SlideGrounding,
    SlideVariation,
    ImageSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobFailure {
    /// Error code as exposed by the service (`backendFailure`, `cancelled`, ...).
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_reply: Option<String>,
}

impl JobFailure {
    pub fn cancelled() -> Self {
        Self {
            code: "cancelled".into(),
            message: "job was cancelled".into(),
            raw_reply: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Job {
    pub job_id: String,
    pub kind: JobKind,
    pub board_id: String,
    /// Jobs sharing a lane never run concurrently.
    pub lane: String,
    pub input_revision: u64,
    pub status: JobStatus,
    /// Set when the board moved on while the job ran; the result is then
    /// delivered but not applied automatically.
    pub stale: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<JobFailure>,
    pub applied: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JobError {
    #[error("job {0} not found")]
    NotFound(String),
    #[error("a {lane} job ({job_id}) is already in flight for this board")]
    LaneBusy { lane: String, job_id: String },
    #[error("job {job_id} is {status:?}, not done")]
    NotDone { job_id: String, status: JobStatus },
}

/// Job bookkeeping. Status only moves queued → running → done/failed, and a
/// cancelled job stays failed even if its worker finishes later.
#[derive(Debug, Default)]
pub struct JobRegistry {
    jobs: BTreeMap<String, Job>,
    /// (board, lane) → job currently holding it.
    lanes: BTreeMap<(String, String), String>,
    next: u64,
}

impl JobRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn start(
        &mut self,
        kind: JobKind,
        board_id: &str,
        lane: &str,
        input_revision: u64,
    ) -> Result<String, JobError> {
        let key = (board_id.to_string(), lane.to_string());
        if let Some(holder) = self.lanes.get(&key) {
            return Err(JobError::LaneBusy {
                lane: lane.to_string(),
                job_id: holder.clone(),
            });
        }
        self.next += 1;
        let job_id = format!("job-{}", self.next);
        self.lanes.insert(key, job_id.clone());
        self.jobs.insert(
            job_id.clone(),
            Job {
                job_id: job_id.clone(),
                kind,
                board_id: board_id.to_string(),
                lane: lane.to_string(),
                input_revision,
                status: JobStatus::Queued,
                stale: false,
                result: None,
                error: None,
                applied: false,
            },
        );
        Ok(job_id)
    }

    pub fn get(&self, job_id: &str) -> Result<&Job, JobError> {
        self.jobs
            .get(job_id)
            .ok_or_else(|| JobError::NotFound(job_id.to_string()))
    }

    pub fn jobs(&self) -> impl Iterator<Item = &Job> {
        self.jobs.values()
    }

    /// Returns false when the job is no longer queued (e.g. cancelled).
    pub fn mark_running(&mut self, job_id: &str) -> bool {
        match self.jobs.get_mut(job_id) {
            Some(j) if j.status == JobStatus::Queued => {
                j.status = JobStatus::Running;
                true
            }
            _ => false,
        }
    }

    fn release(&mut self, job_id: &str) {
        if let Some(j) = self.jobs.get(job_id) {
            let key = (j.board_id.clone(), j.lane.clone());
            if self.lanes.get(&key).map(String::as_str) == Some(job_id) {
                self.lanes.remove(&key);
            }
        }
    }

    /// Records a result. `current_revision` decides the stale flag. Ignored
    /// unless the job is running.
    pub fn complete(&mut self, job_id: &str, result: Value, current_revision: u64) -> bool {
        let ok = match self.jobs.get_mut(job_id) {
            Some(j) if j.status == JobStatus::Running => {
                j.status = JobStatus::Done;
                j.stale = j.input_revision != current_revision;
                j.result = Some(result);
                true
            }
            _ => false,
        };
        if ok {
            self.release(job_id);
        }
        ok
    }

    pub fn fail(&mut self, job_id: &str, failure: JobFailure) -> bool {
        let ok = match self.jobs.get_mut(job_id) {
            Some(j) if matches!(j.status, JobStatus::Queued | JobStatus::Running) => {
                j.status = JobStatus::Failed;
                j.error = Some(failure);
                true
            }
            _ => false,
        };
        if ok {
            self.release(job_id);
        }
        ok
    }

    /// Cancels a queued or running job. Returns whether anything changed.
    pub fn cancel(&mut self, job_id: &str) -> Result<bool, JobError> {
        self.get(job_id)?;
        Ok(self.fail(job_id, JobFailure::cancelled()))
    }

    pub fn result(&self, job_id: &str) -> Result<&Job, JobError> {
        let job = self.get(job_id)?;
        if job.status != JobStatus::Done {
            return Err(JobError::NotDone {
                job_id: job_id.to_string(),
                status: job.status,
            });
        }
        Ok(job)
    }

    pub fn mark_applied(&mut self, job_id: &str) {
        if let Some(j) = self.jobs.get_mut(job_id) {
            j.applied = true;
        }
    }
}
