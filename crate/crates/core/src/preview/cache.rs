use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::board::TagId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PreviewKind {
    Alternatives,
    Slider,
}

impl PreviewKind {
    pub const ALL: [PreviewKind; 2] = [PreviewKind::Alternatives, PreviewKind::Slider];
}

/// What a read returns. Reads never block and never serve an entry computed
/// for an older tag revision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "camelCase")]
pub enum Lookup<P> {
    Fresh(P),
    Failed(String),
    Pending,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Begin {
    /// A new job was registered.
    Started(String),
    /// A job for this key and revision is already in flight.
    Coalesced(String),
    /// A fresh entry exists; nothing to do.
    Fresh,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CacheMetrics {
    pub scheduled: u64,
    pub coalesced: u64,
    pub fresh_skips: u64,
    pub completed: u64,
    /// Completions dropped because the tag moved on or the job was cancelled.
    pub discarded: u64,
    pub cancelled: u64,
    pub hits: u64,
    pub pending_reads: u64,
}

#[derive(Debug, Clone)]
struct Entry<P> {
    revision: u64,
    value: Result<P, String>,
}

#[derive(Debug, Clone)]
struct Flight {
    job_id: String,
    revision: u64,
}

type Key = (TagId, PreviewKind);

/// Revision-checked preview cache with in-flight job tracking.
///
/// Each entry remembers the tag revision it was computed for. The cache
/// learns current revisions through [`PreviewCache::observe`]; an entry or a
/// completion for an older revision is never served.
#[derive(Debug, Clone)]
pub struct PreviewCache<P> {
    current: HashMap<TagId, u64>,
    entries: BTreeMap<Key, Entry<P>>,
    flights: BTreeMap<Key, Flight>,
    next_job: u64,
    metrics: CacheMetrics,
}

impl<P> Default for PreviewCache<P> {
    fn default() -> Self {
        Self {
            current: HashMap::new(),
            entries: BTreeMap::new(),
            flights: BTreeMap::new(),
            next_job: 0,
            metrics: CacheMetrics::default(),
        }
    }
}

impl<P: Clone> PreviewCache<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn metrics(&self) -> CacheMetrics {
        self.metrics
    }

    pub fn knows(&self, tag: &TagId) -> bool {
        self.current.contains_key(tag)
    }

    pub fn current_revision(&self, tag: &TagId) -> Option<u64> {
        self.current.get(tag).copied()
    }

    /// Records the tag's latest revision. In-flight jobs for older revisions
    /// are cancelled; their ids are returned.
    pub fn observe(&mut self, tag: &TagId, revision: u64) -> Vec<String> {
        let cur = self.current.entry(tag.clone()).or_insert(revision);
        if revision > *cur {
            *cur = revision;
        }
        let cur = *cur;
        let stale: Vec<Key> = self
            .flights
            .iter()
            .filter(|((t, _), f)| t == tag && f.revision < cur)
            .map(|(k, _)| k.clone())
            .collect();
        self.drop_flights(stale)
    }

    fn drop_flights(&mut self, keys: Vec<Key>) -> Vec<String> {
        let ids: Vec<String> = keys
            .into_iter()
            .filter_map(|k| self.flights.remove(&k))
            .map(|f| f.job_id)
            .collect();
        self.metrics.cancelled += ids.len() as u64;
        ids
    }

    fn is_fresh(&self, key: &Key) -> bool {
        match (self.entries.get(key), self.current.get(&key.0)) {
            (Some(e), Some(cur)) => e.revision == *cur,
            _ => false,
        }
    }

    /// Registers a job for `(tag, kind)` at `revision` unless one is
    /// pointless. Observes `revision` first.
    pub fn begin(&mut self, tag: &TagId, kind: PreviewKind, revision: u64) -> (Begin, Vec<String>) {
        let cancelled = self.observe(tag, revision);
        let key = (tag.clone(), kind);
        if self.is_fresh(&key) {
            self.metrics.fresh_skips += 1;
            return (Begin::Fresh, cancelled);
        }
        let cur = self.current[tag];
        if let Some(f) = self.flights.get(&key) {
            if f.revision == cur {
                self.metrics.coalesced += 1;
                return (Begin::Coalesced(f.job_id.clone()), cancelled);
            }
        }
        self.next_job += 1;
        let job_id = format!("pj-{}", self.next_job);
        self.flights.insert(
            key,
            Flight {
                job_id: job_id.clone(),
                revision: cur,
            },
        );
        self.metrics.scheduled += 1;
        (Begin::Started(job_id), cancelled)
    }

    /// Stores a job's outcome if the job is still current. Returns whether
    /// it was stored.
    pub fn complete(&mut self, job_id: &str, value: Result<P, String>) -> bool {
        let Some(key) = self
            .flights
            .iter()
            .find(|(_, f)| f.job_id == job_id)
            .map(|(k, _)| k.clone())
        else {
            self.metrics.discarded += 1;
            return false;
        };
        let flight = self.flights.remove(&key).expect("found above");
        if self.current.get(&key.0) != Some(&flight.revision) {
            self.metrics.discarded += 1;
            return false;
        }
        self.entries.insert(
            key,
            Entry {
                revision: flight.revision,
                value,
            },
        );
        self.metrics.completed += 1;
        true
    }

    /// `None` for a tag the cache has never seen.
    pub fn get(&mut self, tag: &TagId, kind: PreviewKind) -> Option<Lookup<P>> {
        let cur = *self.current.get(tag)?;
        let key = (tag.clone(), kind);
        match self.entries.get(&key) {
            Some(e) if e.revision == cur => {
                self.metrics.hits += 1;
                Some(match &e.value {
                    Ok(p) => Lookup::Fresh(p.clone()),
                    Err(msg) => Lookup::Failed(msg.clone()),
                })
            }
            _ => {
                self.metrics.pending_reads += 1;
                Some(Lookup::Pending)
            }
        }
    }

    /// Drops every entry for `tag` and cancels its in-flight jobs. Unknown
    /// tags are a no-op.
    pub fn invalidate(&mut self, tag: &TagId) -> Vec<String> {
        self.entries.retain(|(t, _), _| t != tag);
        let keys: Vec<Key> = self.flights.keys().filter(|(t, _)| t == tag).cloned().collect();
        self.drop_flights(keys)
    }

    /// Forgets the tag entirely, cancelling its jobs.
    pub fn remove_tag(&mut self, tag: &TagId) -> Vec<String> {
        let cancelled = self.invalidate(tag);
        self.current.remove(tag);
        cancelled
    }

    pub fn in_flight(&self, tag: &TagId) -> Vec<String> {
        self.flights
            .iter()
            .filter(|((t, _), _)| t == tag)
            .map(|(_, f)| f.job_id.clone())
            .collect()
    }

    pub fn in_flight_total(&self) -> usize {
        self.flights.len()
    }
}
