//! Reporting for the acceptance run (`cargo test -p onescan-validation`).

use std::time::{Duration, Instant};

/// Result of one criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Runs criteria in order and prints one line per criterion.
#[derive(Debug, Default)]
pub struct Report {
    results: Vec<(String, bool)>,
}

impl Report {
    pub fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {id:>3} {title}: {} [{secs:.1}s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        self.results.push((id.to_string(), v.pass));
    }

    pub fn failed(&self) -> Vec<&str> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect()
    }

    pub fn summary(&self) -> String {
        let failed = self.failed();
        format!(
            "acceptance: {} passed, {} failed{}",
            self.results.len() - failed.len(),
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
        )
    }
}

/// Wall time of `f` together with its value.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}
