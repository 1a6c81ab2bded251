use crate::data::{FeatureVector, LabelId};
use crate::error::{Error, Result};

use super::{Classifier, Prediction, TrainingData};

/// 1-nearest-neighbor under Euclidean distance.
///
/// Confidence is `1 / (1 + d)` with `d` the distance to the nearest stored
/// example. This is a weak heuristic and is unreliable with little training
/// data. Equidistant neighbors resolve to the lowest training index.
#[derive(Debug, Clone)]
pub struct NearestNeighbor {
    points: Vec<(FeatureVector, LabelId)>,
}

impl NearestNeighbor {
    pub fn fit(data: &TrainingData<'_>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(NearestNeighbor {
            points: data.samples.iter().map(|s| (s.x.clone(), s.y)).collect(),
        })
    }
}

impl Classifier for NearestNeighbor {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        let mut best = (f64::INFINITY, LabelId(0));
        for (p, y) in &self.points {
            let d = p.squared_distance(x);
            if d < best.0 {
                best = (d, *y);
            }
        }
        let d = best.0.sqrt();
        Prediction::new(best.1, Some(1.0 / (1.0 + d)))
    }

    fn confidence_supported(&self) -> bool {
        true
    }
}
