//! JSON descriptors for sets and problems.
//!
//! ```json
//! {"halfspace": {"c": [0, 1], "M": 0}}
//! {"polyhedron": {"A": [[1, -1], [-1, -1]], "b": [0, 0]}}
//! {"epigraph": {"kind": "abs", "shift": [0, 1]}}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::lp::LpProblem;
use crate::sets::{EpigraphKind, EpigraphSet, HalfSpace, Polyhedron, ProjectableSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetDescriptor {
    Halfspace {
        c: Vec<f64>,
        #[serde(rename = "M")]
        m: f64,
    },
    Polyhedron {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Epigraph {
        kind: EpigraphKind,
        #[serde(default = "origin")]
        shift: Vec<f64>,
    },
}

fn origin() -> Vec<f64> {
    vec![0.0, 0.0]
}

fn point(v: &[f64]) -> Result<Point> {
    Point::new(v.to_vec())
}

impl SetDescriptor {
    pub fn to_set(&self) -> Result<ProjectableSet> {
        Ok(match self {
            SetDescriptor::Halfspace { c, m } => HalfSpace::new(point(c)?, *m)?.into(),
            SetDescriptor::Polyhedron { a, b } => polyhedron(a, b)?.into(),
            SetDescriptor::Epigraph { kind, shift } => EpigraphSet::new(*kind, point(shift)?)?.into(),
        })
    }
}

fn polyhedron(a: &[Vec<f64>], b: &[f64]) -> Result<Polyhedron> {
    let rows = a.iter().map(|r| point(r)).collect::<Result<Vec<_>>>()?;
    Polyhedron::new(rows, b.to_vec())
}

impl From<&ProjectableSet> for SetDescriptor {
    fn from(s: &ProjectableSet) -> Self {
        match s {
            ProjectableSet::HalfSpace(h) => SetDescriptor::Halfspace { c: h.normal().as_slice().to_vec(), m: h.offset() },
            ProjectableSet::Polyhedron(p) => {
                SetDescriptor::Polyhedron { a: p.rows().iter().map(|r| r.as_slice().to_vec()).collect(), b: p.rhs().to_vec() }
            }
            ProjectableSet::Epigraph(e) => SetDescriptor::Epigraph { kind: e.kind(), shift: e.shift().as_slice().to_vec() },
        }
    }
}

/// `{"c": [...], "A": [[...]], "b": [...], "M": ...}`; `M` may be omitted
/// when the caller supplies it separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpDescriptor {
    pub c: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl LpDescriptor {
    pub fn polyhedron(&self) -> Result<Polyhedron> {
        polyhedron(&self.a, &self.b)
    }

    pub fn objective(&self) -> Result<Point> {
        point(&self.c)
    }

    /// Builds the problem with the given lower bound, or the descriptor's own.
    pub fn to_problem(&self, lower_bound: Option<f64>) -> Result<LpProblem> {
        let m = lower_bound.or(self.m).ok_or_else(|| Error::InvalidDescriptor("missing lower bound \"M\"".into()))?;
        LpProblem::new(self.objective()?, self.polyhedron()?, m)
    }
}

pub fn parse_set(json: &str) -> Result<ProjectableSet> {
    let d: SetDescriptor = serde_json::from_str(json).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
    d.to_set()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let h = parse_set(r#"{"halfspace": {"c": [0, 1], "M": 0}}"#).unwrap();
        assert!(matches!(h, ProjectableSet::HalfSpace(_)));
        let p = parse_set(r#"{"polyhedron": {"A": [[1, -1], [-1, -1]], "b": [0, 0]}}"#).unwrap();
        assert!(matches!(p, ProjectableSet::Polyhedron(_)));
        let e = parse_set(r#"{"epigraph": {"kind": "square", "shift": [0, 1]}}"#).unwrap();
        match e {
            ProjectableSet::Epigraph(e) => {
                assert_eq!(e.kind(), EpigraphKind::Square);
                assert_eq!(e.shift(), &Point::from([0.0, 1.0]));
            }
            _ => panic!("expected epigraph"),
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(parse_set(r#"{"halfspace": {"c": [0, 0], "M": 0}}"#).is_err());
        assert!(parse_set(r#"{"epigraph": {"kind": "cube"}}"#).is_err());
        assert!(parse_set(r#"{"ball": {}}"#).is_err());
        assert!(parse_set("not json").is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let src = r#"{"polyhedron":{"A":[[1.0,2.0],[3.0,-1.0]],"b":[1.0,0.5]}}"#;
        let set = parse_set(src).unwrap();
        let back = serde_json::to_string(&SetDescriptor::from(&set)).unwrap();
        assert_eq!(back, src);
    }

    #[test]
    fn lp_descriptor() {
        let d: LpDescriptor = serde_json::from_str(r#"{"c": [1, 1], "A": [[-1, 0], [0, -1]], "b": [0, 0]}"#).unwrap();
        assert!(matches!(d.to_problem(None), Err(Error::InvalidDescriptor(_))));
        assert_eq!(d.to_problem(Some(-1.0)).unwrap().lower_bound(), -1.0);
    }
}
