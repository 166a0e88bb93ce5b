use std::fmt;

/// One verified quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: String,
    pub passed: bool,
    pub measured: f64,
    /// The bound or target the measurement was compared with.
    pub target: f64,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, passed: bool, measured: f64, target: f64) -> Self {
        Self { id: id.into(), passed, measured, target }
    }

    pub fn at_most(id: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(id, measured <= bound, measured, bound)
    }

    pub fn at_least(id: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(id, measured >= bound, measured, bound)
    }

    pub fn close(id: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(id, (measured - target).abs() <= tol, measured, target)
    }
}

impl fmt::Display for CheckRecord {
    /// `id,status,measured,target`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "pass" } else { "fail" };
        write!(f, "{},{},{:e},{:e}", self.id, status, self.measured, self.target)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.records.extend(other.records);
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check,status,measured,target")?;
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
