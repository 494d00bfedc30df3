//! CSV rows and atomic output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub const HEADER: &str = "suite,q,g,n,tf_spec,estimate,stderr,reference,abs_error,runtime_ms,seed";

/// Missing-value marker.
pub const NA: &str = "NA";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub suite: String,
    pub q: Option<u64>,
    pub g: Option<usize>,
    pub n: usize,
    pub tf_spec: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub reference: Option<f64>,
    pub runtime_ms: u128,
    pub seed: Option<u64>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

impl ExperimentRecord {
    pub fn abs_error(&self) -> Option<f64> {
        self.reference.map(|r| (self.estimate - r).abs())
    }

    pub fn to_csv(&self) -> String {
        [
            self.suite.clone(),
            opt(self.q),
            opt(self.g),
            self.n.to_string(),
            self.tf_spec.clone(),
            self.estimate.to_string(),
            opt(self.stderr),
            opt(self.reference),
            opt(self.abs_error()),
            self.runtime_ms.to_string(),
            opt(self.seed),
        ]
        .join(",")
    }
}

/// Header plus one line per record.
pub fn render(header: &str, lines: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Writes `text` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, text: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
