use std::collections::BTreeMap;
use std::io::BufRead;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use sheetarena_core::sheetspec::{json_schema, json_schema_text, parse_workbook_str, DEFAULT_SYSTEM_PROMPT};
use sheetarena_core::validate_workbook;

use crate::config::ModelConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("no fixture for model `{0}`")]
    NoFixture(String),
    #[error("model `{0}` has no provider configured")]
    NoProvider(String),
    #[error("environment variable `{0}` is not set")]
    MissingKey(String),
    #[error("provider request failed: {0}")]
    Request(String),
    #[error("provider response has no message content")]
    EmptyResponse,
}

/// Everything a model needs to produce one workbook.
#[derive(Debug, Clone)]
pub struct GenerationRequest<'a> {
    pub model: &'a ModelConfig,
    pub prompt: &'a str,
    pub system_prompt: &'a str,
    pub schema: &'a Value,
}

pub trait GeneratorClient: Send + Sync {
    /// Raw model output, expected to be a SheetSpec@2 document.
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, GenerationError>;
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Whether raw output parses and passes validation.
pub fn is_valid_output(raw: &str) -> bool {
    parse_workbook_str(raw).is_ok_and(|wb| validate_workbook(&wb).ok)
}

/// Serves fixture documents keyed by model and prompt hash, with optional
/// per-model fallbacks for any prompt.
#[derive(Debug, Clone, Default)]
pub struct ReplayGenerator {
    exact: BTreeMap<(String, String), String>,
    fallback: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct FixtureLine {
    model: String,
    #[serde(default)]
    prompt: Option<String>,
    #[serde(default)]
    prompt_sha256: Option<String>,
    /// An object is serialized; a string is served verbatim.
    document: Value,
}

impl ReplayGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, model: &str, prompt: &str, document: impl Into<String>) {
        self.exact.insert((model.to_string(), prompt_hash(prompt)), document.into());
    }

    pub fn insert_fallback(&mut self, model: &str, document: impl Into<String>) {
        self.fallback.insert(model.to_string(), document.into());
    }

    /// Lines of `{model, prompt | prompt_sha256 | neither, document}`.
    pub fn from_jsonl(reader: impl BufRead) -> Result<Self, String> {
        let mut g = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let f: FixtureLine = serde_json::from_str(&line).map_err(|e| format!("fixture line {}: {e}", i + 1))?;
            let doc = match f.document {
                Value::String(s) => s,
                other => other.to_string(),
            };
            match (f.prompt, f.prompt_sha256) {
                (Some(p), _) => g.insert(&f.model, &p, doc),
                (None, Some(h)) => {
                    g.exact.insert((f.model, h), doc);
                }
                (None, None) => g.insert_fallback(&f.model, doc),
            }
        }
        Ok(g)
    }
}

impl GeneratorClient for ReplayGenerator {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, GenerationError> {
        let name = &req.model.name;
        self.exact
            .get(&(name.clone(), prompt_hash(req.prompt)))
            .or_else(|| self.fallback.get(name))
            .cloned()
            .ok_or_else(|| GenerationError::NoFixture(name.clone()))
    }
}

/// Chat-completions client with one retry per request.
pub struct HttpGenerator {
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        Self { agent }
    }

    /// Request body for the model's provider.
    pub fn request_body(req: &GenerationRequest<'_>, structured: bool) -> Value {
        let api_model = req
            .model
            .provider
            .as_ref()
            .and_then(|p| p.api_model.clone())
            .unwrap_or_else(|| req.model.name.clone());
        let system = if structured {
            req.system_prompt.to_string()
        } else {
            format!("{}\n\n{}", req.system_prompt, req.schema)
        };
        let mut body = json!({
            "model": api_model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": req.prompt},
            ],
            "max_tokens": req.model.max_tokens,
        });
        if let Some(t) = req.model.temperature {
            body["temperature"] = json!(t);
        }
        if structured {
            body["response_format"] = json!({
                "type": "json_schema",
                "json_schema": {"name": "SheetSpec", "schema": req.schema},
            });
        }
        body
    }

    fn once(&self, req: &GenerationRequest<'_>) -> Result<String, GenerationError> {
        let provider = req
            .model
            .provider
            .as_ref()
            .ok_or_else(|| GenerationError::NoProvider(req.model.name.clone()))?;
        let mut call = self.agent.post(&provider.endpoint);
        if let Some(var) = &provider.api_key_env {
            let key = std::env::var(var).map_err(|_| GenerationError::MissingKey(var.clone()))?;
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let body = Self::request_body(req, provider.structured_outputs);
        let reply: Value = call
            .send_json(&body)
            .map_err(|e| GenerationError::Request(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| GenerationError::Request(e.to_string()))?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or(GenerationError::EmptyResponse)
    }
}

impl GeneratorClient for HttpGenerator {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, GenerationError> {
        match self.once(req) {
            Err(GenerationError::Request(e)) => {
                tracing::warn!(model = %req.model.name, error = %e, "generation failed, retrying once");
                self.once(req)
            }
            other => other,
        }
    }
}

/// The system prompt and schema every generation uses.
pub fn default_prompt_parts() -> (&'static str, Value) {
    (DEFAULT_SYSTEM_PROMPT, json_schema())
}

pub fn schema_text() -> &'static str {
    json_schema_text()
}
