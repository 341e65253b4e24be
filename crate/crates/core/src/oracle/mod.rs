//! Vector-valued scoring of blocks and products.
//!
//! An [`Oracle`] turns an entity into raw objective values and pushes them
//! through the configured [`ObjectiveSpec`]. Backends:
//!
//! * [`TableOracle`] looks scores up in a CSV table,
//! * [`SyntheticOracle`] computes them from the fingerprint alone,
//! * [`ExternalOracle`] asks a child process over a line protocol.
//!
//! [`CachedOracle`] memoizes any backend by entity id.

mod external;
mod synthetic;
mod table;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

pub use external::{ExternalOracle, DEFAULT_TIMEOUT};
pub use synthetic::{Landscape, SyntheticKind, SyntheticOracle};
pub use table::TableOracle;

use crate::chem::Fingerprint;
use crate::pareto::{ObjectiveSpec, ObjectiveVector, ParetoError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("oracle protocol error: {0}")]
    Protocol(String),
    #[error("oracle reported failure for {id}: {message}")]
    Remote { id: String, message: String },
    #[error("oracle timed out after {0} ms")]
    Timeout(u128),
    #[error("oracle returned {got} values, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Value(#[from] ParetoError),
    #[error("oracle input: {0}")]
    Input(String),
    #[error("io: {0}")]
    Io(String),
}

impl OracleError {
    /// Failures caused by the environment, such as a dead process or a timeout,
    /// rather than by the data.
    pub fn is_protocol_failure(&self) -> bool {
        matches!(
            self,
            OracleError::Protocol(_)
                | OracleError::Remote { .. }
                | OracleError::Timeout(_)
                | OracleError::Io(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRequest {
    pub entity_id: String,
    pub fingerprint: Fingerprint,
    pub block_ids: Vec<String>,
}

impl OracleRequest {
    pub fn new(
        entity_id: impl Into<String>,
        fingerprint: Fingerprint,
        block_ids: Vec<String>,
    ) -> Self {
        Self {
            entity_id: entity_id.into(),
            fingerprint,
            block_ids,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub raw: Vec<f64>,
    pub transformed: ObjectiveVector<f64>,
}

impl OracleResult {
    pub fn from_raw(spec: &ObjectiveSpec, raw: Vec<f64>) -> Result<Self, OracleError> {
        if raw.len() != spec.dim() {
            return Err(OracleError::Dimension {
                expected: spec.dim(),
                got: raw.len(),
            });
        }
        let transformed = spec.apply(&raw)?;
        Ok(Self { raw, transformed })
    }
}

pub trait Oracle: Send + Sync {
    fn spec(&self) -> &ObjectiveSpec;

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError>;

    /// Order-preserving; each entry fails independently.
    fn batch_evaluate(&self, requests: &[OracleRequest]) -> Vec<Result<OracleResult, OracleError>> {
        requests.iter().map(|r| self.evaluate(r)).collect()
    }

    fn dim(&self) -> usize {
        self.spec().dim()
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn spec(&self) -> &ObjectiveSpec {
        (**self).spec()
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        (**self).evaluate(request)
    }

    fn batch_evaluate(&self, requests: &[OracleRequest]) -> Vec<Result<OracleResult, OracleError>> {
        (**self).batch_evaluate(requests)
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn spec(&self) -> &ObjectiveSpec {
        (**self).spec()
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        (**self).evaluate(request)
    }

    fn batch_evaluate(&self, requests: &[OracleRequest]) -> Vec<Result<OracleResult, OracleError>> {
        (**self).batch_evaluate(requests)
    }
}

/// Memoizes successful results by entity id. Failures are not cached.
pub struct CachedOracle<O> {
    inner: O,
    cache: Mutex<HashMap<String, OracleResult>>,
    inner_calls: AtomicU64,
}

impl<O: Oracle> CachedOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
            inner_calls: AtomicU64::new(0),
        }
    }

    /// Number of requests forwarded to the wrapped backend.
    pub fn inner_calls(&self) -> u64 {
        self.inner_calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Oracle> Oracle for CachedOracle<O> {
    fn spec(&self) -> &ObjectiveSpec {
        self.inner.spec()
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        if let Some(hit) = self.cache.lock().unwrap().get(&request.entity_id) {
            return Ok(hit.clone());
        }
        self.inner_calls.fetch_add(1, Ordering::Relaxed);
        let result = self.inner.evaluate(request)?;
        self.cache
            .lock()
            .unwrap()
            .insert(request.entity_id.clone(), result.clone());
        Ok(result)
    }

    fn batch_evaluate(&self, requests: &[OracleRequest]) -> Vec<Result<OracleResult, OracleError>> {
        let mut out: Vec<Option<Result<OracleResult, OracleError>>> = {
            let cache = self.cache.lock().unwrap();
            requests
                .iter()
                .map(|r| cache.get(&r.entity_id).cloned().map(Ok))
                .collect()
        };
        let misses: Vec<usize> = (0..requests.len()).filter(|&i| out[i].is_none()).collect();
        if !misses.is_empty() {
            let pending: Vec<OracleRequest> = misses.iter().map(|&i| requests[i].clone()).collect();
            self.inner_calls
                .fetch_add(pending.len() as u64, Ordering::Relaxed);
            let results = self.inner.batch_evaluate(&pending);
            let mut cache = self.cache.lock().unwrap();
            for (&i, result) in misses.iter().zip(results) {
                if let Ok(r) = &result {
                    cache.insert(requests[i].entity_id.clone(), r.clone());
                }
                out[i] = Some(result);
            }
        }
        out.into_iter()
            .map(|r| r.expect("every slot filled"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: &str, fp: &str) -> OracleRequest {
        OracleRequest::new(id, Fingerprint::from_hex(fp).unwrap(), vec![id.to_string()])
    }

    #[test]
    fn cache_is_transparent() {
        let table = TableOracle::from_csv(
            ObjectiveSpec::identity(2),
            "id,raw_1,raw_2\nA,0.1,0.2\nB,0.3,0.4\n".as_bytes(),
        )
        .unwrap();
        let cached = CachedOracle::new(
            TableOracle::from_csv(
                ObjectiveSpec::identity(2),
                "id,raw_1,raw_2\nA,0.1,0.2\nB,0.3,0.4\n".as_bytes(),
            )
            .unwrap(),
        );
        let reqs = vec![
            req("A", "00"),
            req("B", "00"),
            req("A", "00"),
            req("C", "00"),
        ];
        for _ in 0..2 {
            assert_eq!(cached.batch_evaluate(&reqs), table.batch_evaluate(&reqs));
            for r in &reqs {
                assert_eq!(cached.evaluate(r), table.evaluate(r));
            }
        }
        // first batch forwards all four, after that only the unknown C misses
        assert_eq!(cached.inner_calls(), 4 + 1 + 1 + 1);
    }

    #[test]
    fn batch_reports_errors_positionally() {
        let table = TableOracle::from_csv(
            ObjectiveSpec::identity(1),
            "id,raw_1\nA,0.1\nB,0.3\n".as_bytes(),
        )
        .unwrap();
        let out = table.batch_evaluate(&[req("A", "0"), req("X", "0"), req("B", "0")]);
        assert_eq!(out.len(), 3);
        assert!(out[0].is_ok() && out[2].is_ok());
        assert_eq!(out[1], Err(OracleError::UnknownEntity("X".into())));
        assert_eq!(
            table.batch_evaluate(&[req("A", "0")])[0],
            table.evaluate(&req("A", "0"))
        );
    }
}
