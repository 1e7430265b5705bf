use std::path::Path;

use serde::Serialize;

use crate::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

/// Pretty JSON with the config digest as its first field.
pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    digest: &str,
    body: &T,
) -> Result<serde_json::Value, CliError> {
    let path = dir.join(name);
    let mut value = serde_json::Map::new();
    value.insert("config_digest".into(), digest.into());
    match serde_json::to_value(body).map_err(|e| io(&path, e))? {
        serde_json::Value::Object(fields) => value.extend(fields),
        other => {
            value.insert("data".into(), other);
        }
    }
    let value = serde_json::Value::Object(value);
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| io(&path, e))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(value)
}

/// CSV with a `# config_digest: …` comment line ahead of the header.
pub struct Csv {
    path: std::path::PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl Csv {
    pub fn create(dir: &Path, name: &str, digest: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
        let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(file);
        writer
            .write_record([format!("# config_digest: {digest}")])
            .map_err(|e| io(&path, e))?;
        writer.write_record(header).map_err(|e| io(&path, e))?;
        Ok(Self { path, writer })
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<(), CliError> {
        self.writer
            .write_record(fields)
            .map_err(|e| io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| io(&self.path, e))
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Prints a line, ignoring a closed stdout.
pub fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}
