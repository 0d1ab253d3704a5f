use std::fs;
use std::io::Write;

use drinfeld_core::{Error, Fq, Result};
use serde_json::{json, Map, Value};

use crate::args::OutputArgs;

/// Resolved run configuration, echoed at the top of every output.
pub struct Config {
    map: Map<String, Value>,
}

impl Config {
    pub fn new(command: &str) -> Config {
        let mut map = Map::new();
        map.insert("command".into(), json!(command));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        Config { map }
    }

    pub fn field(self, f: &Fq) -> Config {
        self.set("field", json!(f.describe())).set("q", json!(f.q())).set("modulus", json!(f.modulus()))
    }

    pub fn set(mut self, key: &str, value: Value) -> Config {
        self.map.insert(key.into(), value);
        self
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.map.clone())
    }
}

/// Where results go and whether the header is printed.
pub struct Sink<'a> {
    args: &'a OutputArgs,
    config: Config,
}

impl<'a> Sink<'a> {
    pub fn new(args: &'a OutputArgs, config: Config) -> Sink<'a> {
        Sink { args, config }
    }

    /// JSON result object with the configuration under "config".
    pub fn json(&self, mut result: Map<String, Value>) -> Result<()> {
        if !self.args.no_header {
            result.insert("config".into(), self.config.to_value());
        }
        let text = serde_json::to_string_pretty(&Value::Object(result)).map_err(|e| Error::Io(e.to_string()))?;
        self.write(&(text + "\n"))
    }

    /// Plain text with a `# config` comment line.
    pub fn text(&self, body: &str) -> Result<()> {
        let mut s = String::new();
        if !self.args.no_header {
            s.push_str(&format!("# config {}\n", self.config.to_value()));
        }
        s.push_str(body);
        if !body.ends_with('\n') {
            s.push('\n');
        }
        self.write(&s)
    }

    fn write(&self, s: &str) -> Result<()> {
        match &self.args.out {
            Some(path) => fs::write(path, s).map_err(Error::from),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(s.as_bytes()).map_err(Error::from)
            }
        }
    }
}
