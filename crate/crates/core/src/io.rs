//! JSON file schemas.
//!
//! Rationals are written as strings, `"p/q"` or `"n"`. On input, JSON numbers
//! are also accepted and read exactly from their decimal text.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::dhm::DhMeasure;
use crate::error::{Error, Result};
use crate::geom::Polytope;
use crate::poly::Poly;
use crate::quad::PiecewisePoly;
use crate::rankone::Profile;
use crate::rational::{format_rational, parse_rational, Q};
use crate::weights::WeightFn;

/// A rational in its string form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Q);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(de::Error::custom(format!("expected a rational, found {other}"))),
        };
        parse_rational(&text).map(Rat).map_err(de::Error::custom)
    }
}

fn rats(xs: &[Q]) -> Vec<Rat> {
    xs.iter().cloned().map(Rat).collect()
}

fn unrat(xs: Vec<Rat>) -> Vec<Q> {
    xs.into_iter().map(|r| r.0).collect()
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<Rat>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FacetFile {
    pub normal: Vec<String>,
    pub offset: Rat,
}

pub fn read_polytope(text: &str) -> Result<Polytope> {
    let file: PolytopeFile = parse_json(text, "polytope")?;
    let vertices: Vec<Vec<Q>> = file.vertices.into_iter().map(unrat).collect();
    if let Some(bad) = vertices.iter().find(|v| v.len() != file.dim) {
        return Err(Error::DimensionMismatch {
            expected: file.dim,
            found: bad.len(),
        });
    }
    let p = Polytope::from_points(&vertices)?;
    if p.dim() != file.dim {
        return Err(Error::DimensionMismatch {
            expected: file.dim,
            found: p.dim(),
        });
    }
    Ok(p)
}

/// V- and H-representation of `p`.
pub fn polytope_json(p: &Polytope) -> serde_json::Value {
    let facets: Vec<FacetFile> = p
        .facets()
        .iter()
        .map(|f| FacetFile {
            normal: f.normal.iter().map(|n| n.to_string()).collect(),
            offset: Rat(f.offset.clone()),
        })
        .collect();
    serde_json::json!({
        "dim": p.dim(),
        "vertices": p.vertices().iter().map(|v| rats(v)).collect::<Vec<_>>(),
        "facets": facets,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermFile {
    pub c: Rat,
    pub a: Rat,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightFile {
    Exp,
    ExpMix { terms: Vec<TermFile> },
}

pub fn read_weight(text: &str) -> Result<WeightFn> {
    match parse_json::<WeightFile>(text, "weight")? {
        WeightFile::Exp => Ok(WeightFn::exp()),
        WeightFile::ExpMix { terms } => WeightFn::exp_mix(terms.into_iter().map(|t| (t.c.0, t.a.0)).collect()),
    }
}

pub fn weight_json(g: &WeightFn) -> serde_json::Value {
    let terms: Vec<TermFile> = g
        .terms()
        .iter()
        .map(|(c, a)| TermFile {
            c: Rat(c.clone()),
            a: Rat(a.clone()),
        })
        .collect();
    serde_json::to_value(WeightFile::ExpMix { terms }).expect("weight serializes")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AtomFile {
    pub t: Rat,
    pub m: Rat,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct DhFile {
    #[serde(default)]
    pub breaks: Vec<Rat>,
    #[serde(default)]
    pub polys: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Rat>,
    #[serde(default)]
    pub atoms: Vec<AtomFile>,
}

impl DhFile {
    pub fn from_measure(dh: &DhMeasure) -> Self {
        let mut file = DhFile::default();
        if let Some(d) = dh.density() {
            file.breaks = rats(d.breaks());
            file.polys = d.polys().iter().map(|p| rats(&p.0)).collect();
            file.mass = Some(Rat(d.mass().clone()));
        }
        file.atoms = dh
            .atoms()
            .iter()
            .map(|(t, m)| AtomFile {
                t: Rat(t.clone()),
                m: Rat(m.clone()),
            })
            .collect();
        file
    }

    pub fn into_measure(self) -> Result<DhMeasure> {
        let density = if self.breaks.is_empty() && self.polys.is_empty() {
            None
        } else {
            let polys = self.polys.into_iter().map(|c| Poly(unrat(c))).collect();
            let d = PiecewisePoly::new(unrat(self.breaks), polys)?;
            if let Some(Rat(m)) = &self.mass {
                if m != d.mass() {
                    return Err(Error::InvalidDensity(format!(
                        "declared mass {} but density integrates to {}",
                        format_rational(m),
                        format_rational(d.mass())
                    )));
                }
            }
            Some(d)
        };
        DhMeasure::new(density, self.atoms.into_iter().map(|a| (a.t.0, a.m.0)).collect())
    }
}

pub fn dh_json(dh: &DhMeasure) -> serde_json::Value {
    serde_json::to_value(DhFile::from_measure(dh)).expect("measure serializes")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfileFile {
    #[serde(rename = "A")]
    pub a: Rat,
    pub dh: DhFile,
    #[serde(default)]
    pub label: String,
}

pub fn read_profile(text: &str) -> Result<Profile> {
    let file: ProfileFile = parse_json(text, "profile")?;
    Profile::new(file.dh.into_measure()?, file.a.0, file.label)
}

pub fn profile_json(p: &Profile) -> serde_json::Value {
    serde_json::to_value(ProfileFile {
        a: Rat(p.a.clone()),
        dh: DhFile::from_measure(&p.dh),
        label: p.label.clone(),
    })
    .expect("profile serializes")
}
