//! Line-oriented `key: value` reports shared by audits and verifiers.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    pub fn pass(&mut self, key: impl Into<String>, detail: impl Into<String>) {
        self.push(key, Status::Pass, detail);
    }

    pub fn fail(&mut self, key: impl Into<String>, detail: impl Into<String>) {
        self.push(key, Status::Fail, detail);
    }

    pub fn info(&mut self, key: impl Into<String>, detail: impl Into<String>) {
        self.push(key, Status::Info, detail);
    }

    pub fn check(&mut self, key: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(key, status, detail);
    }

    fn push(&mut self, key: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.entries.push(Entry {
            key: key.into(),
            status,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    /// Appends all entries of `other`, prefixing their keys.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for e in other.entries {
            self.entries.push(Entry {
                key: format!("{prefix}.{}", e.key),
                ..e
            });
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "report: {}", self.title)?;
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            if e.detail.is_empty() {
                writeln!(f, "{}: {tag}", e.key)?;
            } else {
                writeln!(f, "{}: {tag} {}", e.key, e.detail)?;
            }
        }
        writeln!(f, "violations: {}", self.failure_count())?;
        writeln!(
            f,
            "verdict: {}",
            if self.passed() { "pass" } else { "fail" }
        )
    }
}
