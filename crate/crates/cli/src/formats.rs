//! File formats: the JSON parameter schema shared by all four model
//! families, the tab-separated edge-list format, moment-set JSON and the
//! mixture-component JSON used by `recover`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sbm_ident::mixture::{Atom, MixtureComponent, MixtureComponentSet};
use sbm_ident::moments::{K4Moments, MomentSet, Provenance};
use sbm_ident::params::{
    AffiliationParams, BinaryBlockParams, FiniteStateParams, ModelParams, Validate, WeightFamily,
    WeightedParams,
};
use sbm_ident::sampler::{EdgeValues, SampledGraph};

use crate::error::{io_err, CliError};

/// One JSON schema for every family: a `model` tag plus the blocks that
/// family needs.
#[derive(Debug, Deserialize)]
#[serde(tag = "model")]
pub enum ParamsFile {
    #[serde(rename = "binary")]
    Binary {
        #[serde(rename = "Q")]
        q: usize,
        pi: Vec<f64>,
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
    },
    #[serde(rename = "affiliation")]
    Affiliation {
        #[serde(rename = "Q")]
        q: usize,
        pi: Vec<f64>,
        alpha: f64,
        beta: f64,
    },
    #[serde(rename = "finite")]
    Finite {
        #[serde(rename = "Q")]
        q: usize,
        pi: Vec<f64>,
        kappa: usize,
        #[serde(rename = "Pvec")]
        pvec: Vec<Vec<Vec<f64>>>,
    },
    #[serde(rename = "weighted")]
    Weighted {
        #[serde(rename = "Q")]
        q: usize,
        pi: Vec<f64>,
        sparsity: Vec<Vec<f64>>,
        family: String,
        theta: Vec<Vec<f64>>,
        #[serde(default)]
        cutpoints: Option<Vec<f64>>,
    },
}

/// Parsed parameter file: the model plus optional weighted-model
/// cutpoints used by `check --mode bins`.
pub struct LoadedParams {
    pub model: ModelParams,
    pub cutpoints: Option<Vec<f64>>,
}

pub fn load_params(path: &Path) -> Result<LoadedParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("reading parameter file", e))?;
    let file: ParamsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("parameter file {}: {e}", path.display())))?;
    let (model, cutpoints) = match file {
        ParamsFile::Binary { q, pi, p } => {
            (ModelParams::Binary(BinaryBlockParams { q, pi, p }), None)
        }
        ParamsFile::Affiliation { q, pi, alpha, beta } => (
            ModelParams::Affiliation(AffiliationParams { q, pi, alpha, beta }),
            None,
        ),
        ParamsFile::Finite { q, pi, kappa, pvec } => (
            ModelParams::Finite(FiniteStateParams { q, pi, kappa, pvec }),
            None,
        ),
        ParamsFile::Weighted {
            q,
            pi,
            sparsity,
            family,
            theta,
            cutpoints,
        } => {
            let family = match family.as_str() {
                "truncated-poisson" => WeightFamily::TruncatedPoisson,
                other => {
                    return Err(CliError::Usage(format!(
                        "unsupported weight family {other:?} (supported: \"truncated-poisson\")"
                    )))
                }
            };
            (
                ModelParams::Weighted(WeightedParams {
                    q,
                    pi,
                    sparsity,
                    family,
                    theta,
                }),
                cutpoints,
            )
        }
    };
    let violations = model.violations();
    if !violations.is_empty() {
        return Err(CliError::Usage(format!(
            "invalid parameters: {}",
            violations.join("; ")
        )));
    }
    Ok(LoadedParams { model, cutpoints })
}

fn kind_tag(values: &EdgeValues) -> &'static str {
    match values {
        EdgeValues::Binary(_) => "binary",
        EdgeValues::Finite { .. } => "finite",
        EdgeValues::Weighted(_) => "weighted",
    }
}

/// Edge-list text: a `# n=<N> kind=<...>` header, then one line
/// `i<TAB>j<TAB>value` per node pair with 1 <= i < j <= N. Absent
/// weighted edges are written as 0.
pub fn write_edge_list(g: &SampledGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("# n={} kind={}\n", g.n, kind_tag(&g.values)));
    let mut k = 0usize;
    for i in 0..g.n {
        for j in (i + 1)..g.n {
            let value = match &g.values {
                EdgeValues::Binary(v) => v[k].to_string(),
                EdgeValues::Finite { states, .. } => states[k].to_string(),
                EdgeValues::Weighted(w) => w[k].to_string(),
            };
            out.push_str(&format!("{}\t{}\t{}\n", i + 1, j + 1, value));
            k += 1;
        }
    }
    out
}

pub fn read_edge_list(text: &str) -> Result<SampledGraph, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage("empty edge-list file".to_string()))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| CliError::Usage("edge list must start with a '# n=... kind=...' header".to_string()))?;
    let mut n: Option<usize> = None;
    let mut kind: Option<String> = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("kind=") {
            kind = Some(v.to_string());
        }
    }
    let n = n.ok_or_else(|| CliError::Usage("header misses n=<N>".to_string()))?;
    let kind = kind.ok_or_else(|| CliError::Usage("header misses kind=<...>".to_string()))?;
    if n < 2 {
        return Err(CliError::Usage(format!("edge list needs n >= 2, got {n}")));
    }
    let expected = n * (n - 1) / 2;
    let mut raw = vec![f64::NAN; expected];
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (i, j, v) = (
            parts.next().and_then(|t| t.parse::<usize>().ok()),
            parts.next().and_then(|t| t.parse::<usize>().ok()),
            parts.next().and_then(|t| t.parse::<f64>().ok()),
        );
        let (Some(i), Some(j), Some(v)) = (i, j, v) else {
            return Err(CliError::Usage(format!("bad edge line: {line:?}")));
        };
        if i < 1 || j <= i || j > n {
            return Err(CliError::Usage(format!(
                "edge ({i},{j}) out of range for n={n}"
            )));
        }
        let (i0, j0) = (i - 1, j - 1);
        raw[i0 * n - i0 * (i0 + 1) / 2 + (j0 - i0 - 1)] = v;
    }
    if raw.iter().any(|v| v.is_nan()) {
        return Err(CliError::Usage(format!(
            "edge list does not cover all {expected} node pairs"
        )));
    }
    let values = match kind.as_str() {
        "binary" => {
            if raw.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(CliError::Usage("binary edge values must be 0 or 1".to_string()));
            }
            EdgeValues::Binary(raw.into_iter().map(|v| v as u8).collect())
        }
        "finite" => {
            let states: Vec<u16> = raw.into_iter().map(|v| v as u16).collect();
            let kappa = (states.iter().copied().max().unwrap_or(1) as usize + 1).max(2);
            EdgeValues::Finite { kappa, states }
        }
        "weighted" => EdgeValues::Weighted(raw),
        other => return Err(CliError::Usage(format!("unknown edge-list kind {other:?}"))),
    };
    Ok(SampledGraph {
        n,
        values,
        latent: None,
    })
}

/// Flat JSON view of a moment set.
#[derive(Debug, Serialize, Deserialize)]
pub struct MomentsJson {
    pub m1: f64,
    pub m2: f64,
    pub m31: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m32: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m33: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m41: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m42: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m6: Option<f64>,
}

impl From<&MomentSet> for MomentsJson {
    fn from(ms: &MomentSet) -> Self {
        MomentsJson {
            m1: ms.m1,
            m2: ms.m2,
            m31: ms.m31,
            m32: ms.k4.as_ref().map(|k| k.m32),
            m33: ms.k4.as_ref().map(|k| k.m33),
            m41: ms.k4.as_ref().map(|k| k.m41),
            m42: ms.k4.as_ref().map(|k| k.m42),
            m5: ms.k4.as_ref().map(|k| k.m5),
            m6: ms.k4.as_ref().map(|k| k.m6),
        }
    }
}

impl MomentsJson {
    pub fn into_moment_set(self, provenance: Provenance) -> MomentSet {
        let k4 = match (self.m32, self.m33, self.m41, self.m42, self.m5, self.m6) {
            (Some(m32), Some(m33), Some(m41), Some(m42), Some(m5), Some(m6)) => Some(K4Moments {
                m32,
                m33,
                m41,
                m42,
                m5,
                m6,
            }),
            _ => self.m41.map(|m41| K4Moments {
                m32: f64::NAN,
                m33: f64::NAN,
                m41,
                m42: f64::NAN,
                m5: f64::NAN,
                m6: f64::NAN,
            }),
        };
        MomentSet {
            m1: self.m1,
            m2: self.m2,
            m31: self.m31,
            k4,
            provenance,
        }
    }
}

/// Accepts either a bare moments object or a full report with a
/// `"moments"` field (so `moments` output feeds straight into
/// `estimate`).
pub fn parse_moments_json(text: &str) -> Result<MomentsJson, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("moment input is not valid JSON: {e}")))?;
    let obj = value.get("moments").cloned().unwrap_or(value);
    serde_json::from_value(obj).map_err(|e| CliError::Usage(format!("bad moments object: {e}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentJson {
    pub weight: f64,
    /// One entry per edge coordinate: null for a point mass at zero, a
    /// number for the family kernel parameter.
    pub atoms: Vec<Option<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentsFile {
    pub arity: usize,
    pub components: Vec<ComponentJson>,
    #[serde(default)]
    pub marginal: Option<Vec<ComponentJson>>,
    /// Weights of the all-in components over 2..=Q nodes, for prior
    /// recovery in affiliation mode.
    #[serde(default)]
    pub kn_all_in_weights: Option<Vec<f64>>,
}

pub fn to_component_set(arity: usize, raw: &[ComponentJson]) -> MixtureComponentSet {
    MixtureComponentSet {
        arity,
        components: raw
            .iter()
            .map(|c| MixtureComponent {
                weight: c.weight,
                atoms: c
                    .atoms
                    .iter()
                    .map(|a| match a {
                        None => Atom::Dirac0,
                        Some(t) => Atom::Density(*t),
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn component_set_to_json(set: &MixtureComponentSet) -> Vec<ComponentJson> {
    set.components
        .iter()
        .map(|c| ComponentJson {
            weight: c.weight,
            atoms: c
                .atoms
                .iter()
                .map(|a| match a {
                    Atom::Dirac0 => None,
                    Atom::Density(t) => Some(*t),
                })
                .collect(),
        })
        .collect()
}
