//! The JSON report written by every subcommand.

use std::collections::BTreeMap;

use expband::tac::{Level, SeparableFit};
use expband::{
    Alternative, AlternationCertificate, Approximant, LimitDirection, ModelKind, Taxonomy,
};
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub version: &'static str,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<TaxonomyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartet: Option<[usize; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<AlternativeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<BandDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tac: Option<TacDoc>,
    /// Model parameters in their natural names (demand, ExpAR, simulations).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataDoc>,
    pub warnings: Vec<String>,
    pub timing: TimingDoc,
}

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    /// Hex SHA-256 of the raw input bytes.
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct TaxonomyDoc {
    pub tag: &'static str,
    pub reflect_t: bool,
    pub negate: bool,
    pub witness: Vec<usize>,
}

impl From<&Taxonomy> for TaxonomyDoc {
    fn from(t: &Taxonomy) -> Self {
        TaxonomyDoc {
            tag: t.tag.name(),
            reflect_t: t.orientation.reflect_t,
            negate: t.orientation.negate,
            witness: t.witness.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ModelDoc {
    /// `exponential`, `line`, `constant`, `limit_neg_inf` or `limit_pos_inf`.
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Pointwise values of a limit vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl From<&Approximant<f64>> for ModelDoc {
    fn from(a: &Approximant<f64>) -> Self {
        match a {
            Approximant::Model(m) => match m.kind {
                ModelKind::Exponential => ModelDoc {
                    kind: "exponential",
                    a: Some(m.a),
                    k: Some(m.k),
                    b: Some(m.b),
                    values: None,
                },
                ModelKind::Line => ModelDoc {
                    kind: "line",
                    a: Some(m.a),
                    k: None,
                    b: Some(m.b),
                    values: None,
                },
                ModelKind::Constant => ModelDoc {
                    kind: "constant",
                    a: None,
                    k: None,
                    b: Some(m.b),
                    values: None,
                },
            },
            Approximant::Limit(l) => ModelDoc {
                kind: match l.direction {
                    LimitDirection::NegInf => "limit_neg_inf",
                    LimitDirection::PosInf => "limit_pos_inf",
                },
                a: None,
                k: None,
                b: None,
                values: Some(l.values.clone()),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateDoc {
    pub indices: Vec<usize>,
    /// Sign of the residual at the first index.
    pub delta: i8,
    pub error: f64,
}

impl From<&AlternationCertificate<f64>> for CertificateDoc {
    fn from(c: &AlternationCertificate<f64>) -> Self {
        CertificateDoc {
            indices: c.indices.clone(),
            delta: c.delta,
            error: c.error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SearchDoc {
    pub k: Option<f64>,
    pub bracket_width: Option<f64>,
    pub evals: usize,
}

#[derive(Debug, Serialize)]
pub struct AlternativeDoc {
    pub label: String,
    pub error: f64,
}

impl From<&Alternative<f64>> for AlternativeDoc {
    fn from(a: &Alternative<f64>) -> Self {
        AlternativeDoc {
            label: a.label.clone(),
            error: a.error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BandDoc {
    pub fitted: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct TacDoc {
    pub model: &'static str,
    pub nonlinear: BTreeMap<String, f64>,
    pub linear: BTreeMap<String, f64>,
    pub levels: Vec<LevelDoc>,
    pub evaluations: usize,
    pub skipped_nodes: usize,
}

#[derive(Debug, Serialize)]
pub struct LevelDoc {
    pub rss: f64,
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
}

impl TacDoc {
    pub fn new(
        model: &'static str,
        fit: &SeparableFit<f64>,
        nonlinear_names: Vec<String>,
        linear_names: Vec<String>,
    ) -> Self {
        let level = |l: &Level<f64>| LevelDoc {
            rss: l.rss,
            center: l.center.clone(),
            widths: l.widths.clone(),
        };
        TacDoc {
            model,
            nonlinear: nonlinear_names.into_iter().zip(fit.nonlinear.clone()).collect(),
            linear: linear_names.into_iter().zip(fit.linear.clone()).collect(),
            levels: fit.levels.iter().map(level).collect(),
            evaluations: fit.evaluations,
            skipped_nodes: fit.skipped_nodes,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DataDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Default, Serialize)]
pub struct TimingDoc {
    pub elapsed_seconds: f64,
}
