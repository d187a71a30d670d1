use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything that determines a run. Its hash goes into every output.
#[derive(Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub params: BTreeMap<&'static str, String>,
    /// Input name to SHA-256 of its contents.
    pub inputs: BTreeMap<&'static str, String>,
    pub seed: String,
}

impl ExperimentConfig {
    pub fn new(command: &'static str, seed: impl Into<String>) -> Self {
        ExperimentConfig { command, params: BTreeMap::new(), inputs: BTreeMap::new(), seed: seed.into() }
    }

    pub fn param(mut self, name: &'static str, value: impl ToString) -> Self {
        self.params.insert(name, value.to_string());
        self
    }

    pub fn input(mut self, name: &'static str, contents: &str) -> Self {
        self.inputs.insert(name, hex(&Sha256::digest(contents.as_bytes())));
        self
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))[..16].to_string()
    }

    pub fn meta(&self) -> Meta {
        Meta { tool: "oi", version: env!("CARGO_PKG_VERSION"), config_hash: self.hash(), seed: self.seed.clone() }
    }

    /// Comment line heading a CSV table.
    pub fn csv_header(&self) -> String {
        let m = self.meta();
        format!("# {} {} config={} seed={}\n", m.tool, m.version, m.config_hash, m.seed)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: String,
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    meta: Meta,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json<T: Serialize>(config: &ExperimentConfig, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&WithMeta { meta: config.meta(), body }).expect("output serializes");
    s.push('\n');
    s
}
