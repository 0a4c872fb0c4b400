//! The JSON model document: how graphs and laws are described on disk.
//!
//! Schema: {"family": "tree"|"comb"|"tree+loop"|"finite",
//!          "m"|"alpha": int, "lambda": float, "loop_rate": float?,
//!          "explicit_laws": [{"at": label, "atoms": [{"p": float,
//!          "children": [[label, count], ...]}, ...]}, ...]?}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::comb::Comb;
use crate::geometry::tree::RegularTree;
use crate::law::{ExplicitLaw, OffspringConfig};
use crate::truncation::Truncation;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit_laws: Option<Vec<ExplicitLawDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitLawDoc {
    pub at: String,
    pub atoms: Vec<AtomDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDoc {
    pub p: f64,
    pub children: Vec<(String, u32)>,
}

/// A loaded model ready for solving or simulation.
pub enum Model {
    Tree(RegularTree),
    /// tree+loop at the root, represented on the quotient as a comb with a
    /// loop at the origin of the same rate.
    TreeLoop { tree: RegularTree, loop_rate: f64 },
    Comb(Comb),
    Finite(Arc<Truncation<String>>),
}

impl ModelDoc {
    pub fn tree(m: u32, lambda: f64) -> Self {
        ModelDoc {
            family: "tree".into(),
            m: Some(m),
            alpha: None,
            lambda,
            loop_rate: None,
            explicit_laws: None,
        }
    }

    pub fn tree_loop(m: u32, lambda: f64, loop_rate: f64) -> Self {
        ModelDoc {
            family: "tree+loop".into(),
            m: Some(m),
            alpha: None,
            lambda,
            loop_rate: Some(loop_rate),
            explicit_laws: None,
        }
    }

    pub fn comb(alpha: u32, lambda: f64) -> Self {
        ModelDoc {
            family: "comb".into(),
            m: None,
            alpha: Some(alpha),
            lambda,
            loop_rate: None,
            explicit_laws: None,
        }
    }

    pub fn finite(laws: Vec<ExplicitLawDoc>) -> Self {
        ModelDoc {
            family: "finite".into(),
            m: None,
            alpha: None,
            lambda: 0.0,
            loop_rate: None,
            explicit_laws: Some(laws),
        }
    }

    pub fn load(&self) -> Result<Model> {
        match self.family.as_str() {
            "tree" => Ok(Model::Tree(RegularTree::new(
                self.m.ok_or_else(|| Error::InvalidParam("tree needs m".into()))?,
                self.lambda,
            )?)),
            "tree+loop" => Ok(Model::TreeLoop {
                tree: RegularTree::new(
                    self.m.ok_or_else(|| Error::InvalidParam("tree needs m".into()))?,
                    self.lambda,
                )?,
                loop_rate: self.loop_rate.unwrap_or(0.0),
            }),
            "comb" => Ok(Model::Comb(Comb::new(
                self.alpha
                    .ok_or_else(|| Error::InvalidParam("comb needs alpha".into()))?,
                self.lambda,
            )?)),
            "finite" => {
                let docs = self
                    .explicit_laws
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParam("finite model needs explicit_laws".into()))?;
                let verts: Vec<String> = docs.iter().map(|d| d.at.clone()).collect();
                let laws = docs
                    .iter()
                    .map(|d| {
                        let atoms = d
                            .atoms
                            .iter()
                            .map(|a| {
                                (
                                    a.p,
                                    OffspringConfig::from_counts(a.children.clone()),
                                )
                            })
                            .collect();
                        ExplicitLaw::new(&d.at, atoms)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Finite(Truncation::finite(verts, laws)?))
            }
            other => Err(Error::InvalidParam(format!("unknown family {other}"))),
        }
    }

    /// Quotient parameters (alpha, loop rate at the origin) for tree-family
    /// models; combs are their own quotient.
    pub fn quotient_alpha(&self) -> Result<(u32, f64)> {
        match self.family.as_str() {
            "tree" => Ok((self.m.unwrap_or(3) - 2, 0.0)),
            "tree+loop" => Ok((self.m.unwrap_or(3) - 2, self.loop_rate.unwrap_or(0.0))),
            "comb" => Ok((self.alpha.unwrap_or(1), self.loop_rate.unwrap_or(0.0))),
            other => Err(Error::InvalidParam(format!("no quotient for family {other}"))),
        }
    }
}

/// The shipped finite model whose fixed points are {1/3, 1}: one vertex,
/// empty with probability 1/4, two self-children with probability 3/4.
pub fn finite_quadratic_model() -> ModelDoc {
    ModelDoc::finite(vec![ExplicitLawDoc {
        at: "a".into(),
        atoms: vec![
            AtomDoc {
                p: 0.25,
                children: vec![],
            },
            AtomDoc {
                p: 0.75,
                children: vec![("a".into(), 2)],
            },
        ],
    }])
}

/// The shipped subcritical finite model whose only fixed point is 1.
pub fn finite_subcritical_model() -> ModelDoc {
    ModelDoc::finite(vec![ExplicitLawDoc {
        at: "a".into(),
        atoms: vec![
            AtomDoc {
                p: 0.5,
                children: vec![],
            },
            AtomDoc {
                p: 0.5,
                children: vec![("a".into(), 1)],
            },
        ],
    }])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_json() {
        let doc = ModelDoc::tree(3, 0.35);
        let s = serde_json::to_string(&doc).unwrap();
        let back: ModelDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back.family, "tree");
        assert_eq!(back.m, Some(3));
        assert!(matches!(back.load().unwrap(), Model::Tree(_)));
    }

    #[test]
    fn finite_model_loads() {
        let doc = finite_quadratic_model();
        match doc.load().unwrap() {
            Model::Finite(t) => assert_eq!(t.len(), 1),
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn unknown_family_rejected() {
        let mut doc = ModelDoc::tree(3, 0.35);
        doc.family = "lattice".into();
        assert!(doc.load().is_err());
    }
}
