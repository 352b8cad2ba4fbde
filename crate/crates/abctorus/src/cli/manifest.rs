use std::fmt;

/// A run manifest: ordered sections of `key = value` lines. Nothing in it
/// depends on time, host or scheduling, so equal runs give equal bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, section: &str, key: impl Into<String>, value: impl fmt::Display) {
        let entry = (key.into(), value.to_string());
        match self.sections.iter_mut().find(|(s, _)| s == section) {
            Some((_, v)) => v.push(entry),
            None => self.sections.push((section.to_string(), vec![entry])),
        }
    }

    /// Records a check verdict under `[checks]`.
    pub fn check(&mut self, key: impl Into<String>, passed: bool) {
        self.set("checks", key, if passed { "pass" } else { "fail" });
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .and_then(|(_, v)| v.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    /// Whether every recorded check passed.
    pub fn all_passed(&self) -> bool {
        self.sections
            .iter()
            .filter(|(s, _)| s == "checks")
            .flat_map(|(_, v)| v)
            .all(|(_, v)| v == "pass")
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# abctorus run manifest")?;
        for (name, entries) in &self.sections {
            writeln!(f, "\n[{name}]")?;
            for (k, v) in entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}
