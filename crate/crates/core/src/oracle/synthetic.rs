use rayon::prelude::*;

use super::{Oracle, OracleError, OracleRequest, OracleResult};
use crate::chem::Fingerprint;
use crate::pareto::ObjectiveSpec;

/// Piecewise-linear map from a bit density in `[0,1]` to a score.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    /// `(density, score)` knots, sorted by density, spanning 0 to 1.
    knots: Vec<(f64, f64)>,
}

impl Landscape {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self, OracleError> {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ok = knots.len() >= 2
            && knots.first().map(|k| k.0) == Some(0.0)
            && knots.last().map(|k| k.0) == Some(1.0)
            && knots
                .iter()
                .all(|&(x, y)| x.is_finite() && (0.0..=1.0).contains(&y))
            && knots.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(OracleError::Input(
                "landscape knots must cover [0,1] with strictly increasing densities and scores in [0,1]".into(),
            ));
        }
        Ok(Self { knots })
    }

    /// A valley: sparse windows look decent, but the optimum lies at full density
    /// beyond a trough of mid densities.
    pub fn deceptive() -> Self {
        Self {
            knots: vec![(0.0, 0.6), (0.5, 0.0), (1.0, 1.0)],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        for w in self.knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        self.knots.last().unwrap().1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    /// Objective `d` is the set-bit fraction of the `d`-th of `D` equal
    /// contiguous fingerprint windows.
    BitFraction,
    /// Window densities pushed through a piecewise-linear landscape.
    DeceptiveFront(Landscape),
}

impl SyntheticKind {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "bit-fraction" => Some(Self::BitFraction),
            "deceptive-front" => Some(Self::DeceptiveFront(Landscape::deceptive())),
            _ => None,
        }
    }
}

/// Pure function of the fingerprint; emits values already in maximize-space.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    kind: SyntheticKind,
    spec: ObjectiveSpec,
}

impl SyntheticOracle {
    pub fn new(kind: SyntheticKind, dim: usize) -> Self {
        Self {
            kind,
            spec: ObjectiveSpec::identity(dim),
        }
    }

    fn window_fractions(&self, fp: &Fingerprint) -> Vec<f64> {
        let dim = self.spec.dim();
        let width = fp.width();
        (0..dim)
            .map(|d| {
                let (start, end) = (d * width / dim, (d + 1) * width / dim);
                if end == start {
                    0.0
                } else {
                    f64::from(fp.count_ones_in(start, end)) / (end - start) as f64
                }
            })
            .collect()
    }
}

impl Oracle for SyntheticOracle {
    fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        let fractions = self.window_fractions(&request.fingerprint);
        let raw = match &self.kind {
            SyntheticKind::BitFraction => fractions,
            SyntheticKind::DeceptiveFront(l) => fractions.into_iter().map(|x| l.eval(x)).collect(),
        };
        OracleResult::from_raw(&self.spec, raw)
    }

    fn batch_evaluate(&self, requests: &[OracleRequest]) -> Vec<Result<OracleResult, OracleError>> {
        requests.par_iter().map(|r| self.evaluate(r)).collect()
    }
}
