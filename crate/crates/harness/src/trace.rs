//! JSON Lines request traces.
//!
//! ```text
//! {"op":"init","points":[1,2,3],"dist":[[1,2,4],[1,3,6],[2,3,2]]}
//! {"op":"del","id":2}
//! {"op":"add","id":7,"dist":{"1":5,"3":9}}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use dynsteiner::{Metric, MetricError, VertexId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Init { points: Vec<VertexId>, dist: Vec<(VertexId, VertexId, u64)> },
    Add {
        id: VertexId,
        #[serde(with = "id_keys")]
        dist: BTreeMap<VertexId, u64>,
    },
    Del { id: VertexId },
}

/// JSON object keys are strings; inside a tagged enum serde does not
/// convert them back to integers on its own.
mod id_keys {
    use std::collections::BTreeMap;

    use dynsteiner::VertexId;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<VertexId, u64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, v)| (k.0.to_string(), *v)).collect::<BTreeMap<String, u64>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<VertexId, u64>, D::Error> {
        BTreeMap::<String, u64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (VertexId(k), v)).map_err(|_| D::Error::custom(format!("bad vertex id {k:?}"))))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {error}")]
    Parse { line: usize, error: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("request {0}: init must be the first record and appear once")]
    MisplacedInit(usize),
    #[error("request {0}: vertex {1} added twice")]
    DuplicateAdd(usize, VertexId),
    #[error("request {0}: vertex {1} deleted before it was added")]
    DeleteBeforeAdd(usize, VertexId),
    #[error("request {0}: vertex {1} deleted twice")]
    DoubleDelete(usize, VertexId),
    #[error("request {t}: distances of {id} do not cover exactly the alive set (missing {missing:?}, extra {extra:?})")]
    AliveCoverage { t: usize, id: VertexId, missing: Vec<VertexId>, extra: Vec<VertexId> },
    #[error("request {0}: additions are not allowed in a deletion-only run")]
    AddInDeletionOnly(usize),
    #[error("a deletion-only run needs an init record")]
    MissingInit,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub requests: Vec<Request>,
}

impl Trace {
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, TraceError> {
        let mut requests = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            requests.push(serde_json::from_str(&line).map_err(|error| TraceError::Parse { line: i + 1, error })?);
        }
        Ok(Trace { requests })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.requests {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json writes UTF-8")
    }

    pub fn init(&self) -> Option<(&[VertexId], &[(VertexId, VertexId, u64)])> {
        match self.requests.first() {
            Some(Request::Init { points, dist }) => Some((points, dist)),
            _ => None,
        }
    }

    pub fn is_deletion_only(&self) -> bool {
        self.init().is_some() && self.requests[1..].iter().all(|r| matches!(r, Request::Del { .. }))
    }

    /// Checks the request sequence: ids added once, deleted at most once
    /// and only after being added, additions carrying distances to exactly
    /// the alive set.
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut seen = BTreeSet::new();
        let mut alive = BTreeSet::new();
        for (t, r) in self.requests.iter().enumerate() {
            match r {
                Request::Init { points, dist } => {
                    if t != 0 {
                        return Err(TraceError::MisplacedInit(t));
                    }
                    Metric::validate(points, dist)?;
                    seen.extend(points.iter().copied());
                    alive.extend(points.iter().copied());
                }
                Request::Add { id, dist } => {
                    if !seen.insert(*id) {
                        return Err(TraceError::DuplicateAdd(t, *id));
                    }
                    let keys: BTreeSet<VertexId> = dist.keys().copied().collect();
                    if keys != alive {
                        return Err(TraceError::AliveCoverage {
                            t,
                            id: *id,
                            missing: alive.difference(&keys).copied().collect(),
                            extra: keys.difference(&alive).copied().collect(),
                        });
                    }
                    alive.insert(*id);
                }
                Request::Del { id } => {
                    if !seen.contains(id) {
                        return Err(TraceError::DeleteBeforeAdd(t, *id));
                    }
                    if !alive.remove(id) {
                        return Err(TraceError::DoubleDelete(t, *id));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validation for the deletion-only algorithms.
    pub fn validate_deletion_only(&self) -> Result<(), TraceError> {
        self.validate()?;
        if self.init().is_none() {
            return Err(TraceError::MissingInit);
        }
        match self.requests.iter().position(|r| matches!(r, Request::Add { .. })) {
            Some(t) => Err(TraceError::AddInDeletionOnly(t)),
            None => Ok(()),
        }
    }

    /// Rewrites additions that carry distances to every earlier vertex into
    /// the alive-only form by dropping the entries for deleted vertices.
    /// The metric inferred from the result dominates the given one and
    /// agrees with it on alive vertices.
    pub fn restrict_to_alive(&self) -> Trace {
        let mut alive = BTreeSet::new();
        let mut out = Vec::with_capacity(self.requests.len());
        for r in &self.requests {
            match r {
                Request::Init { points, .. } => alive.extend(points.iter().copied()),
                Request::Add { id, dist } => {
                    let dist = dist.iter().filter(|(k, _)| alive.contains(*k)).map(|(&k, &d)| (k, d)).collect();
                    alive.insert(*id);
                    out.push(Request::Add { id: *id, dist });
                    continue;
                }
                Request::Del { id } => {
                    alive.remove(id);
                }
            }
            out.push(r.clone());
        }
        Trace { requests: out }
    }
}
