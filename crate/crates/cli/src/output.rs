//! Deterministic JSON output and diagnostics.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

/// Compact JSON with every float written as 17 significant digits;
/// non-finite floats become `null`.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn write_null<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        CompactFormatter.write_null(w)
    }
}

/// Serializes `value` with [`Sig17`] formatting.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A failure with a stable code and process exit status.
#[derive(Debug)]
pub struct Failure {
    /// Machine-readable code.
    pub code: &'static str,
    /// Process exit status.
    pub exit: i32,
    /// Human-readable message.
    pub message: String,
}

impl Failure {
    pub fn new(code: &'static str, exit: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            exit,
            message: message.into(),
        }
    }

    /// Prefixes the message with what was being done.
    pub fn with_context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    /// Invalid flag value or input content.
    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new("invalid_argument", 4, message)
    }

    /// Diagnostic JSON written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Diag<'a> {
            error: &'a str,
            exit: i32,
            message: &'a str,
        }
        to_json(&Diag {
            error: self.code,
            exit: self.exit,
            message: &self.message,
        })
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        let code = if e.kind() == io::ErrorKind::NotFound {
            "file_not_found"
        } else {
            "io"
        };
        Self::new(code, 3, e.to_string())
    }
}

impl From<iscat_core::GridError> for Failure {
    fn from(e: iscat_core::GridError) -> Self {
        Self::new("invalid_input", 4, e.to_string())
    }
}

impl From<iscat_core::ScatteringError> for Failure {
    fn from(e: iscat_core::ScatteringError) -> Self {
        Self::new("scattering", 5, e.to_string())
    }
}

impl From<iscat_core::HierarchyError> for Failure {
    fn from(e: iscat_core::HierarchyError) -> Self {
        Self::new("hierarchy", 5, e.to_string())
    }
}

impl From<iscat_hopf::HopfError> for Failure {
    fn from(e: iscat_hopf::HopfError) -> Self {
        Self::new("hopf", 5, e.to_string())
    }
}

impl From<iscat_core::EnergyError> for Failure {
    fn from(e: iscat_core::EnergyError) -> Self {
        use iscat_core::EnergyError as E;
        let code = match &e {
            E::PoleOnRay { .. } => "pole_on_ray",
            E::UnsupportedRange { .. } => "unsupported_range",
            E::QuadratureNotConverged { .. } => "quadrature_not_converged",
            E::BranchCut(_) => "branch_cut",
            E::Scattering(_) => "scattering",
            E::Hierarchy(_) => "hierarchy",
        };
        Self::new(code, 5, e.to_string())
    }
}

impl From<iscat_core::EvolveError> for Failure {
    fn from(e: iscat_core::EvolveError) -> Self {
        use iscat_core::EvolveError as E;
        let code = match &e {
            E::BlowupDetected { .. } => "blowup_detected",
            E::InvalidConfig(_) => "invalid_config",
        };
        Self::new(code, 5, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(to_json(&[0.1, 1.0]), "[1.0000000000000001e-1,1.0000000000000000e0]");
        assert_eq!(to_json(&f64::NAN), "null");
    }
}
