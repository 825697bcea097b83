//! Buffered run outputs. Nothing touches the disk until every result of a
//! run exists, so a failed run leaves no partial files behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "carnot";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed-width scientific notation, 15 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

pub enum Body {
    Csv {
        columns: &'static str,
        rows: Vec<String>,
    },
    Json(Map<String, Value>),
}

pub struct Artifact {
    pub name: String,
    pub body: Body,
}

impl Artifact {
    pub fn csv(name: impl Into<String>, columns: &'static str, rows: Vec<String>) -> Self {
        Artifact {
            name: name.into(),
            body: Body::Csv { columns, rows },
        }
    }

    /// `value` must serialize to a JSON object.
    pub fn json(name: impl Into<String>, value: Value) -> Self {
        let Value::Object(map) = value else {
            panic!("artifact {} is not a JSON object", name.into())
        };
        Artifact {
            name: name.into(),
            body: Body::Json(map),
        }
    }

    fn render(&self, generator: &Value) -> String {
        match &self.body {
            Body::Csv { columns, rows } => {
                let mut out = format!(
                    "# {TOOL} {VERSION} manifest={}\n{columns}\n",
                    generator["manifest"].as_str().unwrap_or("")
                );
                for row in rows {
                    out.push_str(row);
                    out.push('\n');
                }
                out
            }
            Body::Json(map) => pretty(&with_generator(generator, map)),
        }
    }
}

fn with_generator(generator: &Value, map: &Map<String, Value>) -> Value {
    let mut out = Map::new();
    out.insert("generator".into(), generator.clone());
    out.extend(map.iter().map(|(k, v)| (k.clone(), v.clone())));
    Value::Object(out)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes `<prefix>_manifest.json` and every artifact into `out_dir`.
///
/// The manifest records the subcommand, the resolved inputs and the output
/// names; its SHA-256 tags every file of the run.
pub fn write_run(
    out_dir: &Path,
    prefix: &str,
    inputs: Value,
    artifacts: &[Artifact],
) -> std::io::Result<Vec<PathBuf>> {
    let manifest_name = format!("{prefix}_manifest.json");
    let mut outputs: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
    outputs.push(&manifest_name);
    let manifest = json!({
        "tool": TOOL,
        "version": VERSION,
        "subcommand": prefix.replace('_', "-"),
        "inputs": inputs,
        "outputs": outputs,
    });
    let hash = sha256_hex(
        serde_json::to_string(&manifest)
            .expect("JSON values always serialize")
            .as_bytes(),
    );
    let generator = json!({ "tool": TOOL, "version": VERSION, "manifest": hash });

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(artifacts.len() + 1);
    for a in artifacts {
        let path = out_dir.join(&a.name);
        fs::write(&path, a.render(&generator))?;
        written.push(path);
    }
    let Value::Object(fields) = manifest else {
        unreachable!()
    };
    let path = out_dir.join(&manifest_name);
    fs::write(&path, pretty(&with_generator(&generator, &fields)))?;
    written.push(path);
    Ok(written)
}
