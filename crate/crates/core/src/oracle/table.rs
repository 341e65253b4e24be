use std::collections::HashMap;
use std::io::Read;

use super::{Oracle, OracleError, OracleRequest, OracleResult};
use crate::pareto::ObjectiveSpec;

/// Precomputed scores keyed by entity id, loaded from `id,raw_1,...,raw_D`.
#[derive(Debug, Clone)]
pub struct TableOracle {
    spec: ObjectiveSpec,
    rows: HashMap<String, Vec<f64>>,
}

impl TableOracle {
    pub fn new(spec: ObjectiveSpec, rows: HashMap<String, Vec<f64>>) -> Result<Self, OracleError> {
        for (id, raw) in &rows {
            if raw.len() != spec.dim() {
                return Err(OracleError::Input(format!(
                    "row {id} has {} values, expected {}",
                    raw.len(),
                    spec.dim()
                )));
            }
        }
        Ok(Self { spec, rows })
    }

    pub fn from_csv<R: Read>(spec: ObjectiveSpec, reader: R) -> Result<Self, OracleError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| OracleError::Input(e.to_string()))?
            .clone();
        if headers.get(0) != Some("id") || headers.len() != spec.dim() + 1 {
            return Err(OracleError::Input(format!(
                "expected header id,raw_1..raw_{}, got {}",
                spec.dim(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = HashMap::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| OracleError::Input(format!("line {line}: {e}")))?;
            let id = record[0].to_string();
            let raw = record
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| OracleError::Input(format!("line {line}: {e}")))?;
            if rows.insert(id.clone(), raw).is_some() {
                return Err(OracleError::Input(format!(
                    "line {line}: duplicate id {id}"
                )));
            }
        }
        Self::new(spec, rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Oracle for TableOracle {
    fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        let raw = self
            .rows
            .get(&request.entity_id)
            .ok_or_else(|| OracleError::UnknownEntity(request.entity_id.clone()))?;
        OracleResult::from_raw(&self.spec, raw.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Fingerprint;

    #[test]
    fn dual_target_row() {
        // activity values are placeholders; the docking energies are the
        // reported scores of a dual-target hit against the two kinases
        let csv = "id,raw_1,raw_2,raw_3,raw_4\nP1,0.9,0.8,-11.1,-11.9\n";
        let oracle =
            TableOracle::from_csv(ObjectiveSpec::dual_target_default(), csv.as_bytes()).unwrap();
        let req = OracleRequest::new("P1", Fingerprint::zeros(8), vec![]);
        let out = oracle.evaluate(&req).unwrap();
        let expected = [0.9, 0.8, 0.555, 0.595];
        for (got, want) in out.transformed.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(out.raw, vec![0.9, 0.8, -11.1, -11.9]);
        assert_eq!(oracle.evaluate(&req), oracle.evaluate(&req));
    }

    #[test]
    fn bad_tables() {
        let spec = ObjectiveSpec::identity(2);
        assert!(TableOracle::from_csv(spec.clone(), "name,a,b\nx,1,2\n".as_bytes()).is_err());
        assert!(TableOracle::from_csv(spec.clone(), "id,raw_1\nx,1\n".as_bytes()).is_err());
        assert!(
            TableOracle::from_csv(spec.clone(), "id,raw_1,raw_2\nx,1,zz\n".as_bytes()).is_err()
        );
        assert!(TableOracle::from_csv(spec, "id,raw_1,raw_2\nx,1,2\nx,3,4\n".as_bytes()).is_err());
    }

    #[test]
    fn miss_is_unknown_entity() {
        let oracle =
            TableOracle::from_csv(ObjectiveSpec::identity(1), "id,raw_1\na,0.5\n".as_bytes())
                .unwrap();
        let req = OracleRequest::new("b", Fingerprint::zeros(4), vec![]);
        assert_eq!(
            oracle.evaluate(&req),
            Err(OracleError::UnknownEntity("b".into()))
        );
    }
}
