use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::qp::{ConstraintSystem, FEAS_TOL};

/// Offset of one affine inequality. A `NegInf` row is dropped from the set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Offset {
    Finite(f64),
    NegInf,
}

impl Offset {
    pub fn finite(self) -> Option<f64> {
        match self {
            Offset::Finite(b) => Some(b),
            Offset::NegInf => None,
        }
    }
}

impl Serialize for Offset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Offset::Finite(b) => s.serialize_f64(*b),
            Offset::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Offset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Offset::Finite(b)),
            Raw::Text(t) if t == "-inf" => Ok(Offset::NegInf),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "offset must be a number or \"-inf\", got {t:?}"
            ))),
        }
    }
}

/// `{ x : b + G x <= 0 }` with rows whose offset is `-inf` ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyhedralJson", into = "PolyhedralJson")]
pub struct PolyhedralSet {
    dim: usize,
    g: Vec<Vec<f64>>,
    b: Vec<Offset>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyhedralJson {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    b: Vec<Offset>,
    dim: usize,
}

impl TryFrom<PolyhedralJson> for PolyhedralSet {
    type Error = LabError;
    fn try_from(j: PolyhedralJson) -> Result<Self> {
        PolyhedralSet::new(j.dim, j.g, j.b)
    }
}

impl From<PolyhedralSet> for PolyhedralJson {
    fn from(p: PolyhedralSet) -> Self {
        PolyhedralJson {
            g: p.g,
            b: p.b,
            dim: p.dim,
        }
    }
}

impl PolyhedralSet {
    pub fn new(dim: usize, g: Vec<Vec<f64>>, b: Vec<Offset>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if g.len() != b.len() {
            return Err(LabError::DimensionMismatch {
                expected: g.len(),
                got: b.len(),
            });
        }
        for row in &g {
            if row.len() != dim {
                return Err(LabError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(LabError::InvalidArgument(
                    "constraint matrix entries must be finite".into(),
                ));
            }
        }
        if b.iter()
            .any(|o| matches!(o, Offset::Finite(x) if !x.is_finite()))
        {
            return Err(LabError::InvalidArgument(
                "finite offsets must be finite numbers; use -inf rows to drop constraints".into(),
            ));
        }
        Ok(Self { dim, g, b })
    }

    pub fn full_space(dim: usize) -> Self {
        Self {
            dim,
            g: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.g
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.b
    }

    /// Row indices that take part in the set (finite offsets).
    pub fn active_rows(&self) -> Vec<usize> {
        (0..self.b.len())
            .filter(|&j| self.b[j].finite().is_some())
            .collect()
    }

    pub fn is_full_space(&self) -> bool {
        self.active_rows().is_empty()
    }

    /// `b + G x` on the finite rows, in `active_rows` order.
    pub fn row_values(&self, x: &[f64]) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.b)
            .filter_map(|(row, o)| {
                o.finite()
                    .map(|b| b + row.iter().zip(x).map(|(g, v)| g * v).sum::<f64>())
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.row_values(x).iter().all(|&v| v <= FEAS_TOL)
    }

    pub fn constraint_system(&self) -> ConstraintSystem {
        let rows = self.active_rows();
        let g = DMatrix::from_fn(rows.len(), self.dim, |i, j| self.g[rows[i]][j]);
        let b = DVector::from_fn(rows.len(), |i, _| {
            self.b[rows[i]].finite().expect("active rows are finite")
        });
        ConstraintSystem { g, b }
    }

    /// Image under `x -> diag(scale) (x - center)`.
    pub fn affine_image(&self, center: &[f64], scale: &[f64]) -> Result<Self> {
        if center.len() != self.dim || scale.len() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                got: center.len().min(scale.len()),
            });
        }
        if scale.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(LabError::InvalidArgument(
                "affine scale must be positive".into(),
            ));
        }
        let g: Vec<Vec<f64>> = self
            .g
            .iter()
            .map(|row| row.iter().zip(scale).map(|(a, s)| a / s).collect())
            .collect();
        let b = self
            .g
            .iter()
            .zip(&self.b)
            .map(|(row, o)| match o {
                Offset::Finite(b) => {
                    Offset::Finite(b + row.iter().zip(center).map(|(a, c)| a * c).sum::<f64>())
                }
                Offset::NegInf => Offset::NegInf,
            })
            .collect();
        Self::new(self.dim, g, b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polyhedral set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::InvalidArgument(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_inf_rows_drop_out() {
        let p = PolyhedralSet::new(
            1,
            vec![vec![1.0], vec![-1.0]],
            vec![Offset::NegInf, Offset::Finite(-1.0)],
        )
        .unwrap();
        assert_eq!(p.active_rows(), vec![1]);
        assert!(p.contains(&[100.0]));
        assert!(!p.contains(&[-2.0]));
    }

    #[test]
    fn json_uses_inf_strings() {
        let p = PolyhedralSet::new(
            2,
            vec![vec![1.0, 1.0], vec![0.0, -1.0]],
            vec![Offset::Finite(0.0), Offset::NegInf],
        )
        .unwrap();
        let text = p.to_json();
        assert!(text.contains("\"-inf\""));
        assert!(text.contains("\"G\""));
        assert_eq!(PolyhedralSet::from_json(&text).unwrap(), p);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(PolyhedralSet::from_json(r#"{"G": [[1.0]], "b": [], "dim": 1}"#).is_err());
        assert!(PolyhedralSet::from_json(r#"{"G": [[1.0]], "b": ["inf"], "dim": 1}"#).is_err());
        assert!(PolyhedralSet::from_json(r#"{"G": [[1.0]], "b": [0], "dim": 1, "x": 1}"#).is_err());
    }

    #[test]
    fn affine_image_matches_pointwise_map() {
        let p = PolyhedralSet::new(2, vec![vec![1.0, -1.0]], vec![Offset::Finite(0.0)]).unwrap();
        let img = p.affine_image(&[0.0, 0.5], &[1.0, 10.0]).unwrap();
        for &(x, y) in &[(0.2, 0.6), (0.7, 0.6), (0.5, 0.5), (-1.0, 0.0)] {
            let mapped = [x, 10.0 * (y - 0.5)];
            assert_eq!(p.contains(&[x, y]), img.contains(&mapped), "({x}, {y})");
        }
    }
}
