//! Run reports: one self-describing document per invocation, printed as
//! human-readable text or as a single JSON object with stable key order
//! (struct field order; the answer map is alphabetical). Replaying the
//! reported inputs reproduces the answer bit-exactly; only the wall-time
//! field varies between runs.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use kicolor::{Error, FvsResult};

use crate::Format;

#[derive(Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, contents: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        InputDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        }
    }
}

#[derive(Default, Serialize)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<u32>,
}

#[derive(Serialize)]
struct FvsDoc {
    vertices: Vec<u32>,
    size: usize,
    method: String,
    certified_minimum: bool,
}

#[derive(Serialize)]
struct ReportDoc {
    subcommand: String,
    inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fvs: Option<FvsDoc>,
    answer: Map<String, Value>,
    wall_time_ms: f64,
}

pub struct Report {
    doc: ReportDoc,
}

impl Report {
    pub fn new(subcommand: &str, inputs: Vec<InputDigest>) -> Self {
        Report {
            doc: ReportDoc {
                subcommand: subcommand.to_string(),
                inputs,
                params: None,
                fvs: None,
                answer: Map::new(),
                wall_time_ms: 0.0,
            },
        }
    }

    pub fn params_qki(mut self, q: u32, k: u32, i: u32) -> Self {
        self.doc.params = Some(ParamsDoc {
            q: Some(q),
            k: Some(k),
            i: Some(i),
            r: None,
        });
        self
    }

    pub fn params_ki(mut self, k: u32, i: u32) -> Self {
        self.doc.params = Some(ParamsDoc {
            k: Some(k),
            i: Some(i),
            ..Default::default()
        });
        self
    }

    pub fn params_k(mut self, k: u32) -> Self {
        self.doc.params = Some(ParamsDoc {
            k: Some(k),
            ..Default::default()
        });
        self
    }

    pub fn params_rk(mut self, r: u32, k: u32) -> Self {
        self.doc.params = Some(ParamsDoc {
            r: Some(r),
            k: Some(k),
            ..Default::default()
        });
        self
    }

    pub fn fvs(mut self, result: &FvsResult) -> Self {
        self.doc.fvs = Some(FvsDoc {
            vertices: result.vertices.iter().map(|&v| v + 1).collect(),
            size: result.vertices.len(),
            method: result.method.to_string(),
            certified_minimum: result.certified_minimum,
        });
        self
    }

    pub fn answer_bool(mut self, key: &str, value: bool) -> Self {
        self.doc.answer.insert(key.to_string(), Value::Bool(value));
        self
    }

    pub fn answer_u64(mut self, key: &str, value: u64) -> Self {
        self.doc.answer.insert(key.to_string(), Value::from(value));
        self
    }

    pub fn answer_str(mut self, key: &str, value: String) -> Self {
        self.doc
            .answer
            .insert(key.to_string(), Value::String(value));
        self
    }

    pub fn artifact(self, key: &str, path: &Path) -> Self {
        let rendered = path.display().to_string();
        self.answer_str(key, rendered)
    }

    pub fn finish(mut self, started: Instant, format: Format) -> Result<(), Error> {
        self.doc.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
        match format {
            Format::Structured => {
                let json = serde_json::to_string_pretty(&self.doc)
                    .map_err(|e| Error::Domain(format!("report serialization failed: {e}")))?;
                println!("{json}");
            }
            Format::Text => {
                let d = &self.doc;
                println!("subcommand: {}", d.subcommand);
                for input in &d.inputs {
                    println!("input: {} sha256={}", input.path, input.sha256);
                }
                if let Some(p) = &d.params {
                    let mut parts = Vec::new();
                    if let Some(r) = p.r {
                        parts.push(format!("r={r}"));
                    }
                    if let Some(q) = p.q {
                        parts.push(format!("q={q}"));
                    }
                    if let Some(k) = p.k {
                        parts.push(format!("k={k}"));
                    }
                    if let Some(i) = p.i {
                        parts.push(format!("i={i}"));
                    }
                    println!("params: {}", parts.join(" "));
                }
                if let Some(f) = &d.fvs {
                    println!(
                        "fvs: size={} method={} certified_minimum={} vertices={}",
                        f.size,
                        f.method,
                        f.certified_minimum,
                        f.vertices
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    );
                }
                for (key, value) in &d.answer {
                    match value {
                        Value::String(s) if s.contains('\n') => {
                            println!("{key}:");
                            for line in s.lines() {
                                println!("  {line}");
                            }
                        }
                        Value::String(s) => println!("{key}: {s}"),
                        other => println!("{key}: {other}"),
                    }
                }
                println!("wall_time_ms: {:.3}", d.wall_time_ms);
            }
        }
        Ok(())
    }
}
