use std::fmt;

/// A violated value constraint, naming the offending field by its path
/// inside the enclosing document (e.g. `field.discs[0].radius`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub field: String,
    pub reason: String,
}

impl InvariantViolation {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefixes the field path with the name of the containing value.
    pub fn within(mut self, parent: impl AsRef<str>) -> Self {
        let parent = parent.as_ref();
        self.field = if self.field.starts_with('[') {
            format!("{parent}{}", self.field)
        } else {
            format!("{parent}.{}", self.field)
        };
        self
    }
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for InvariantViolation {}

pub(crate) fn ensure(cond: bool, field: &str, reason: impl Into<String>) -> Result<(), InvariantViolation> {
    if cond {
        Ok(())
    } else {
        Err(InvariantViolation::new(field, reason))
    }
}

pub(crate) fn ensure_finite(value: f64, field: &str) -> Result<(), InvariantViolation> {
    ensure(value.is_finite(), field, format!("must be finite, got {value}"))
}
