//! Directory persistence for trained classifier bundles: one metadata file
//! plus one model file per parameter, all in versioned text formats so a
//! reload is bit-exact and artifacts stay inspectable.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::ClassifierBundle;
use crate::forward::structure::IncidenceConfig;
use crate::svm::io::{kernel_tokens, load_model, parse_kernel, save_model};
use crate::{Error, Result};

const META_FILE: &str = "bundle.txt";

fn model_file_name(idx: usize, name: &str) -> String {
    let safe: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("model_{idx}_{safe}.svm")
}

fn floats_line(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes `bundle` into `dir` (created if needed) and returns the files
/// written, metadata first.
pub fn save_bundle(bundle: &ClassifierBundle, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    bundle.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;

    let mut meta = String::from("# classifier-bundle version 1\n");
    let _ = writeln!(meta, "structure-hash {}", bundle.structure_hash);
    let _ = writeln!(meta, "kernel {}", kernel_tokens(&bundle.kernel));
    let _ = writeln!(
        meta,
        "incidence {} {} {}",
        bundle.incidence.angle_deg, bundle.incidence.azimuth_deg, bundle.incidence.truncation_order
    );
    let _ = writeln!(meta, "grid {}", floats_line(&bundle.incidence.wavelength_grid));
    let _ = writeln!(meta, "wavelengths {}", floats_line(&bundle.wavelengths));
    let _ = writeln!(meta, "parameters {}", bundle.models.len());
    let mut written = vec![dir.join(META_FILE)];
    for (idx, (name, model)) in bundle.models.iter().enumerate() {
        let file = model_file_name(idx, name);
        let _ = writeln!(meta, "parameter {idx} {name} {file}");
        let path = dir.join(&file);
        save_model(model, &path)?;
        written.push(path);
    }
    std::fs::write(dir.join(META_FILE), meta)
        .map_err(|e| Error::io(dir.join(META_FILE).display().to_string(), e))?;
    Ok(written)
}

/// Loads a bundle saved by [`save_bundle`], cross-checking the metadata
/// kernel against every stored model.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<ClassifierBundle> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let origin = meta_path.display().to_string();
    let text =
        std::fs::read_to_string(&meta_path).map_err(|e| Error::io(origin.clone(), e))?;

    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(&origin, 1, "empty bundle metadata".to_string()))?;
    if first.trim() != "# classifier-bundle version 1" {
        return Err(Error::parse(
            &origin,
            1,
            format!("unsupported bundle header '{first}'"),
        ));
    }

    let mut structure_hash = None;
    let mut kernel = None;
    let mut incidence_parts = None;
    let mut grid = None;
    let mut wavelengths = None;
    let mut n_params = None;
    let mut model_entries: Vec<(usize, String, String)> = Vec::new();

    for (i, raw) in lines {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_floats = |toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(&origin, lineno, format!("bad number '{t}'")))
                })
                .collect()
        };
        match tokens[0] {
            "structure-hash" if tokens.len() == 2 => {
                structure_hash = Some(tokens[1].to_string());
            }
            "kernel" => kernel = Some(parse_kernel(&tokens[1..], &origin, lineno)?),
            "incidence" if tokens.len() == 4 => {
                let nums = parse_floats(&tokens[1..3])?;
                let trunc: usize = tokens[3].parse().map_err(|_| {
                    Error::parse(&origin, lineno, format!("bad truncation '{}'", tokens[3]))
                })?;
                incidence_parts = Some((nums[0], nums[1], trunc));
            }
            "grid" => grid = Some(parse_floats(&tokens[1..])?),
            "wavelengths" => wavelengths = Some(parse_floats(&tokens[1..])?),
            "parameters" if tokens.len() == 2 => {
                n_params = Some(tokens[1].parse::<usize>().map_err(|_| {
                    Error::parse(&origin, lineno, format!("bad count '{}'", tokens[1]))
                })?);
            }
            "parameter" if tokens.len() == 4 => {
                let idx: usize = tokens[1].parse().map_err(|_| {
                    Error::parse(&origin, lineno, format!("bad index '{}'", tokens[1]))
                })?;
                model_entries.push((idx, tokens[2].to_string(), tokens[3].to_string()));
            }
            other => {
                return Err(Error::parse(
                    &origin,
                    lineno,
                    format!("unrecognized metadata line '{other}'"),
                ))
            }
        }
    }

    let missing = |what: &str| Error::parse(&origin, 0, format!("missing {what} line"));
    let structure_hash = structure_hash.ok_or_else(|| missing("structure-hash"))?;
    let kernel = kernel.ok_or_else(|| missing("kernel"))?;
    let (angle, azimuth, trunc) = incidence_parts.ok_or_else(|| missing("incidence"))?;
    let grid = grid.ok_or_else(|| missing("grid"))?;
    let wavelengths = wavelengths.ok_or_else(|| missing("wavelengths"))?;
    let n_params = n_params.ok_or_else(|| missing("parameters"))?;
    if model_entries.len() != n_params {
        return Err(Error::parse(
            &origin,
            0,
            format!(
                "metadata declares {n_params} parameters but lists {}",
                model_entries.len()
            ),
        ));
    }
    for (want, (idx, _, _)) in model_entries.iter().enumerate() {
        if *idx != want {
            return Err(Error::parse(
                &origin,
                0,
                format!("parameter entries out of order: expected {want}, found {idx}"),
            ));
        }
    }

    let mut models = Vec::with_capacity(n_params);
    for (_, name, file) in model_entries {
        let model = load_model(dir.join(&file))?;
        for pair in &model.binary_models {
            if pair.model.kernel != kernel {
                return Err(Error::Incompatible(format!(
                    "model file {file} uses a different kernel than the bundle metadata"
                )));
            }
        }
        models.push((name, model));
    }

    let bundle = ClassifierBundle {
        wavelengths,
        kernel,
        structure_hash,
        incidence: IncidenceConfig::new(angle, azimuth, grid, trunc)?,
        models,
    };
    bundle.validate()?;
    Ok(bundle)
}
