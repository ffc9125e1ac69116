//! CLI plumbing: error classification, file I/O with positions, report
//! rendering.

use std::fmt;
use std::fs;
use std::path::Path;

use tatejac::{Domain, MapFile, PolyMap, SeriesFile, TateSeries};

/// CLI-level error with its exit code: 1 for contract violations, 2 for I/O
/// and parse failures.
#[derive(Debug)]
pub enum CliError {
    Contract(tatejac::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Contract(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Contract(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<tatejac::Error> for CliError {
    fn from(e: tatejac::Error) -> Self {
        match e {
            // Malformed textual input is an input problem, not a violated
            // mathematical contract.
            tatejac::Error::Parse { .. } => CliError::Io(e.to_string()),
            other => CliError::Contract(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Io(format!(
            "{path}:{}:{}: invalid JSON: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn read_map(path: &str) -> CliResult<PolyMap> {
    let file: MapFile = read_json(path)?;
    Ok(file.to_map()?)
}

pub fn read_series(path: &str) -> CliResult<TateSeries> {
    let file: SeriesFile = read_json(path)?;
    Ok(file.to_series()?)
}

pub fn write_json<T: serde::Serialize>(path: &str, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))
}

pub fn parse_domain(text: &str) -> CliResult<Domain> {
    let spec = tatejac::io::parse_domain_str(text)?;
    Ok(Domain::new(spec)?)
}

/// Parse a comma-separated list of integers.
pub fn parse_u64_list(text: &str, what: &str) -> CliResult<Vec<u64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Io(format!("invalid {what} value {part:?}")))
        })
        .collect()
}

/// Render a JSON report value as indented text for terminal reading.
pub fn render_report(value: &serde_json::Value) {
    fn compact(value: &serde_json::Value) -> String {
        match value {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let obj = match value.as_object() {
        Some(obj) => obj,
        None => {
            println!("{value}");
            return;
        }
    };
    for key in ["kind", "domain", "inputs"] {
        if let Some(v) = obj.get(key) {
            println!("{key}: {}", compact(v));
        }
    }
    if let Some(outcome) = obj.get("outcome").and_then(|o| o.as_object()) {
        println!("outcome:");
        for (k, v) in outcome {
            println!("  {k}: {}", compact(v));
        }
    } else if let Some(outcome) = obj.get("outcome") {
        println!("outcome: {}", compact(outcome));
    }
    for key in ["oracles", "caveats", "notes"] {
        if let Some(items) = obj.get(key).and_then(|o| o.as_array()) {
            if !items.is_empty() {
                println!("{key}:");
                for item in items {
                    println!("  - {}", compact(item));
                }
            }
        }
    }
}

/// Print one report, honoring the JSON flag.
pub fn emit(json: bool, value: &serde_json::Value) -> CliResult<()> {
    if json {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
        println!("{text}");
    } else {
        render_report(value);
    }
    Ok(())
}

/// Print a batch of reports: a JSON array, or text blocks separated by a
/// blank line.
pub fn emit_all(json: bool, values: &[serde_json::Value]) -> CliResult<()> {
    if values.len() == 1 {
        return emit(json, &values[0]);
    }
    if json {
        let text = serde_json::to_string_pretty(&serde_json::Value::Array(values.to_vec()))
            .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
        println!("{text}");
    } else {
        for (i, value) in values.iter().enumerate() {
            if i > 0 {
                println!();
            }
            render_report(value);
        }
    }
    Ok(())
}

/// Run `tasks` with up to `jobs` workers, preserving input order.
pub fn run_parallel<T, F>(jobs: usize, count: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(count.max(1));
    if jobs <= 1 || count <= 1 {
        return (0..count).map(task).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let result = task(i);
                let mut guard = slots_mutex.lock().expect("worker poisoned the slot lock");
                guard[i] = Some(result);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}
