//! Text file formats for labeled training sets and trained multiclass
//! models. Both formats are line-oriented UTF-8 with shortest round-trip
//! float formatting, so save → load is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::kernel::{KernelKind, KernelSpec};
use super::multiclass::{MulticlassSvmModel, PairModel, TrainingSet};
use super::smo::BinarySvmModel;
use crate::{Error, Result};

/// A training set plus the metadata recorded in its file header: which
/// parameter the labels classify, the subsampled wavelengths the features
/// were built from, and the label → sub-range map.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSetFile {
    pub set: TrainingSet,
    pub parameter: Option<String>,
    pub wavelengths: Vec<f64>,
    pub subranges: BTreeMap<i32, (f64, f64)>,
}

impl TrainingSetFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# training-set version 1\n");
        if let Some(p) = &self.parameter {
            let _ = writeln!(out, "# parameter: {p}");
        }
        if !self.wavelengths.is_empty() {
            let _ = writeln!(out, "# k: {}", self.wavelengths.len());
            let _ = write!(out, "# wavelengths:");
            for w in &self.wavelengths {
                let _ = write!(out, " {w}");
            }
            out.push('\n');
        }
        for (label, (low, high)) in &self.subranges {
            let _ = writeln!(out, "# subrange {label}: {low} {high}");
        }
        for (features, label) in self.set.features.iter().zip(&self.set.labels) {
            let _ = write!(out, "{label}");
            for v in features {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut parameter = None;
        let mut wavelengths = Vec::new();
        let mut declared_k: Option<usize> = None;
        let mut subranges = BTreeMap::new();
        let mut features = Vec::new();
        let mut labels = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(rest) = comment.strip_prefix("parameter:") {
                    parameter = Some(rest.trim().to_string());
                } else if let Some(rest) = comment.strip_prefix("k:") {
                    declared_k = Some(rest.trim().parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad k '{}'", rest.trim()))
                    })?);
                } else if let Some(rest) = comment.strip_prefix("wavelengths:") {
                    wavelengths = rest
                        .split_whitespace()
                        .map(|f| {
                            f.parse().map_err(|_| {
                                Error::parse(origin, lineno, format!("bad wavelength '{f}'"))
                            })
                        })
                        .collect::<Result<_>>()?;
                } else if let Some(rest) = comment.strip_prefix("subrange ") {
                    let (label_part, bounds) = rest.split_once(':').ok_or_else(|| {
                        Error::parse(origin, lineno, "malformed subrange comment".to_string())
                    })?;
                    let label: i32 = label_part.trim().parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad label '{label_part}'"))
                    })?;
                    let parts: Vec<&str> = bounds.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(Error::parse(
                            origin,
                            lineno,
                            "subrange needs two bounds".to_string(),
                        ));
                    }
                    let low: f64 = parts[0].parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad bound '{}'", parts[0]))
                    })?;
                    let high: f64 = parts[1].parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad bound '{}'", parts[1]))
                    })?;
                    subranges.insert(label, (low, high));
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let label_field = fields.next().unwrap();
            let label: i32 = label_field.parse().map_err(|_| {
                Error::parse(origin, lineno, format!("bad label '{label_field}'"))
            })?;
            let row: Vec<f64> = fields
                .map(|f| {
                    f.parse()
                        .map_err(|_| Error::parse(origin, lineno, format!("bad number '{f}'")))
                })
                .collect::<Result<_>>()?;
            if row.is_empty() {
                return Err(Error::parse(
                    origin,
                    lineno,
                    "row has a label but no features".to_string(),
                ));
            }
            labels.push(label);
            features.push(row);
        }

        if let Some(k) = declared_k {
            if !wavelengths.is_empty() && wavelengths.len() != k {
                return Err(Error::parse(
                    origin,
                    0,
                    format!(
                        "header declares k = {k} but lists {} wavelengths",
                        wavelengths.len()
                    ),
                ));
            }
        }
        Ok(Self {
            set: TrainingSet::new(features, labels)?,
            parameter,
            wavelengths,
            subranges,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

pub(crate) fn kernel_tokens(spec: &KernelSpec) -> String {
    let kind = match spec.kind {
        KernelKind::Polynomial => "polynomial",
        KernelKind::Rbf => "rbf",
        KernelKind::Sigmoid => "sigmoid",
    };
    let squared = if spec.rbf_squared { "squared" } else { "unsquared" };
    format!("{kind} {} {squared}", spec.controlling_factor)
}

pub(crate) fn parse_kernel(tokens: &[&str], origin: &str, lineno: usize) -> Result<KernelSpec> {
    if tokens.len() != 3 {
        return Err(Error::parse(
            origin,
            lineno,
            "kernel line needs: kind factor squared|unsquared".to_string(),
        ));
    }
    let kind = match tokens[0] {
        "polynomial" => KernelKind::Polynomial,
        "rbf" => KernelKind::Rbf,
        "sigmoid" => KernelKind::Sigmoid,
        other => {
            return Err(Error::parse(
                origin,
                lineno,
                format!("unknown kernel kind '{other}'"),
            ))
        }
    };
    let controlling_factor: f64 = tokens[1]
        .parse()
        .map_err(|_| Error::parse(origin, lineno, format!("bad factor '{}'", tokens[1])))?;
    let rbf_squared = match tokens[2] {
        "squared" => true,
        "unsquared" => false,
        other => {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected squared|unsquared, found '{other}'"),
            ))
        }
    };
    let spec = KernelSpec {
        kind,
        controlling_factor,
        rbf_squared,
    };
    spec.validate()?;
    Ok(spec)
}

/// Serializes a multiclass model to the versioned text format.
pub fn model_to_text(model: &MulticlassSvmModel) -> Result<String> {
    model.validate()?;
    let kernel = model
        .binary_models
        .first()
        .map(|p| p.model.kernel)
        .ok_or_else(|| Error::Validation("model has no pairwise classifiers".into()))?;
    let dim = model
        .binary_models
        .iter()
        .flat_map(|p| p.model.support_vectors.first())
        .map(Vec::len)
        .next()
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str("format-version 1\n");
    let _ = writeln!(out, "kernel {}", kernel_tokens(&kernel));
    let _ = writeln!(out, "dim {dim}");
    let _ = writeln!(out, "classes {}", model.class_labels.len());
    for label in &model.class_labels {
        let (low, high) = model.class_to_subrange[label];
        let _ = writeln!(out, "class {label} {low} {high}");
    }
    for pair in &model.binary_models {
        let _ = writeln!(
            out,
            "pair {} {} {} {}",
            pair.pos,
            pair.neg,
            pair.model.support_vectors.len(),
            pair.model.bias
        );
        for (sv, ay) in pair.model.support_vectors.iter().zip(&pair.model.alpha_y) {
            let _ = write!(out, "sv {ay}");
            for v in sv {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses the versioned model format back; rejects unknown versions and
/// structurally inconsistent files.
pub fn model_from_text(text: &str, origin: &str) -> Result<MulticlassSvmModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut expect = |what: &str| -> Result<(usize, Vec<String>)> {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 0, format!("unexpected end, wanted {what}")))?;
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.first().map(String::as_str) != Some(what) {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected '{what}' line, found '{line}'"),
            ));
        }
        Ok((lineno, tokens))
    };

    let (lineno, version) = expect("format-version")?;
    if version.get(1).map(String::as_str) != Some("1") {
        return Err(Error::parse(
            origin,
            lineno,
            format!("unsupported format version {:?}", version.get(1)),
        ));
    }
    let (lineno, kernel_line) = expect("kernel")?;
    let token_refs: Vec<&str> = kernel_line[1..].iter().map(String::as_str).collect();
    let kernel = parse_kernel(&token_refs, origin, lineno)?;
    let (lineno, dim_line) = expect("dim")?;
    let dim: usize = dim_line
        .get(1)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(origin, lineno, "bad dim".to_string()))?;
    let (lineno, classes_line) = expect("classes")?;
    let n_classes: usize = classes_line
        .get(1)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(origin, lineno, "bad class count".to_string()))?;

    let mut class_labels = Vec::with_capacity(n_classes);
    let mut class_to_subrange = BTreeMap::new();
    for _ in 0..n_classes {
        let (lineno, class_line) = expect("class")?;
        if class_line.len() != 4 {
            return Err(Error::parse(
                origin,
                lineno,
                "class line needs: label low high".to_string(),
            ));
        }
        let label: i32 = class_line[1]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad class label".to_string()))?;
        let low: f64 = class_line[2]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad low bound".to_string()))?;
        let high: f64 = class_line[3]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad high bound".to_string()))?;
        class_labels.push(label);
        class_to_subrange.insert(label, (low, high));
    }

    let n_pairs = n_classes * (n_classes - 1) / 2;
    let mut binary_models = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let (lineno, pair_line) = expect("pair")?;
        if pair_line.len() != 5 {
            return Err(Error::parse(
                origin,
                lineno,
                "pair line needs: pos neg sv_count bias".to_string(),
            ));
        }
        let pos: i32 = pair_line[1]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad pos label".to_string()))?;
        let neg: i32 = pair_line[2]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad neg label".to_string()))?;
        let sv_count: usize = pair_line[3]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad sv count".to_string()))?;
        let bias: f64 = pair_line[4]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, "bad bias".to_string()))?;
        let mut support_vectors = Vec::with_capacity(sv_count);
        let mut alpha_y = Vec::with_capacity(sv_count);
        for _ in 0..sv_count {
            let (lineno, sv_line) = expect("sv")?;
            if sv_line.len() != dim + 2 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("sv line needs alpha_y plus {dim} values"),
                ));
            }
            let ay: f64 = sv_line[1]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, "bad alpha_y".to_string()))?;
            let sv: Vec<f64> = sv_line[2..]
                .iter()
                .map(|t| {
                    t.parse().map_err(|_| {
                        Error::parse(origin, lineno, format!("bad sv value '{t}'"))
                    })
                })
                .collect::<Result<_>>()?;
            alpha_y.push(ay);
            support_vectors.push(sv);
        }
        binary_models.push(PairModel {
            pos,
            neg,
            model: BinarySvmModel {
                support_vectors,
                alpha_y,
                bias,
                kernel,
            },
        });
    }
    if lines.next().is_some() {
        return Err(Error::parse(
            origin,
            0,
            "trailing content after the last pair".to_string(),
        ));
    }

    let model = MulticlassSvmModel {
        class_labels,
        class_to_subrange,
        binary_models,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &MulticlassSvmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_text(model)?)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MulticlassSvmModel> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    model_from_text(&text, &path.display().to_string())
}
