//! Strict CSV ingestion: exact two-column headers with unit suffixes,
//! per-row diagnostics with line numbers, monotonicity checks where the
//! schema requires them.

use std::fmt;
use std::path::Path;

/// Named input schemas. Each is a two-column numeric table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// wavelength_nm, counts; ascending wavelength, nonnegative counts.
    Spectrum,
    /// wavelength_nm, efficiency; ascending wavelength, efficiency in (0, 1].
    Response,
    /// voltage_v, peak_freq_ghz; finite values.
    Stark,
    /// time_us|time_ns, counts; ascending time, nonnegative counts.
    Decay,
    /// time_ns, counts; ascending time, nonnegative counts.
    Tcspc,
    /// b_tesla, freq_offset_ghz; finite values.
    Peaks,
    /// freq_ghz|freq_mhz, counts; ascending frequency, nonnegative counts.
    Ple,
}

impl Schema {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "spectrum" => Some(Self::Spectrum),
            "response" => Some(Self::Response),
            "stark" => Some(Self::Stark),
            "decay" => Some(Self::Decay),
            "tcspc" => Some(Self::Tcspc),
            "peaks" => Some(Self::Peaks),
            "ple" => Some(Self::Ple),
            _ => None,
        }
    }

    /// Accepted header lines, in preference order.
    pub fn headers(&self) -> &'static [[&'static str; 2]] {
        match self {
            Self::Spectrum => &[["wavelength_nm", "counts"]],
            Self::Response => &[["wavelength_nm", "efficiency"]],
            Self::Stark => &[["voltage_v", "peak_freq_ghz"]],
            Self::Decay => &[["time_us", "counts"], ["time_ns", "counts"]],
            Self::Tcspc => &[["time_ns", "counts"]],
            Self::Peaks => &[["b_tesla", "freq_offset_ghz"]],
            Self::Ple => &[["freq_ghz", "counts"], ["freq_mhz", "counts"]],
        }
    }

    fn x_ascending(&self) -> bool {
        matches!(
            self,
            Self::Spectrum | Self::Response | Self::Decay | Self::Tcspc | Self::Ple
        )
    }

    fn y_nonnegative(&self) -> bool {
        matches!(self, Self::Spectrum | Self::Decay | Self::Tcspc | Self::Ple)
    }

    fn y_is_efficiency(&self) -> bool {
        matches!(self, Self::Response)
    }
}

/// A parsed two-column table plus the header variant that matched.
#[derive(Debug, Clone)]
pub struct Table {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Header names as found in the file (resolves unit variants).
    pub header: [String; 2],
}

impl Table {
    pub fn rows(&self) -> usize {
        self.x.len()
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x.iter().cloned().zip(self.y.iter().cloned()).collect()
    }
}

#[derive(Debug)]
pub struct CsvErrors {
    pub path: String,
    pub errors: Vec<String>,
}

impl fmt::Display for CsvErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}:", self.path)?;
        for e in &self.errors {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

const MAX_ERRORS: usize = 20;

/// Parse and validate; returns the table or the full diagnostic list.
pub fn load_csv(path: &Path, schema: Schema) -> Result<Table, CsvErrors> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return Err(CsvErrors {
                path: path.display().to_string(),
                errors: vec![format!("cannot read file: {e}")],
            })
        }
    };
    let mut errors: Vec<String> = Vec::new();
    let mut lines = text.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line,
        None => {
            return Err(CsvErrors {
                path: path.display().to_string(),
                errors: vec!["line 1: file is empty (expected a header line)".into()],
            })
        }
    };
    let found: Vec<&str> = header.split(',').map(str::trim).collect();
    let matched = schema
        .headers()
        .iter()
        .find(|h| found.len() == 2 && found[0] == h[0] && found[1] == h[1]);
    let header_names: [String; 2] = match matched {
        Some(h) => [h[0].to_string(), h[1].to_string()],
        None => {
            let expected = schema
                .headers()
                .iter()
                .map(|h| format!("'{},{}'", h[0], h[1]))
                .collect::<Vec<_>>()
                .join(" or ");
            return Err(CsvErrors {
                path: path.display().to_string(),
                errors: vec![format!(
                    "line 1: expected header {expected}, found '{header}'"
                )],
            });
        }
    };

    let mut x: Vec<f64> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if errors.len() >= MAX_ERRORS {
            errors.push("further errors suppressed".into());
            break;
        }
        if line.trim().is_empty() {
            errors.push(format!("line {line_no}: blank line"));
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            errors.push(format!(
                "line {line_no}: expected 2 comma-separated fields, found {}",
                fields.len()
            ));
            continue;
        }
        let mut row = [0.0f64; 2];
        let mut bad = false;
        for (slot, (field, name)) in fields.iter().zip(&header_names).enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row[slot] = v,
                Ok(v) => {
                    errors.push(format!("line {line_no}: {name} = {v} is not finite"));
                    bad = true;
                }
                Err(_) => {
                    errors.push(format!(
                        "line {line_no}: cannot parse {name} from '{field}'"
                    ));
                    bad = true;
                }
            }
        }
        if bad {
            continue;
        }
        if schema.x_ascending() {
            if let Some(&prev) = x.last() {
                if row[0] <= prev {
                    errors.push(format!(
                        "line {line_no}: {} must be strictly ascending ({} after {})",
                        header_names[0], row[0], prev
                    ));
                    continue;
                }
            }
        }
        if schema.y_nonnegative() && row[1] < 0.0 {
            errors.push(format!(
                "line {line_no}: {} must be nonnegative, got {}",
                header_names[1], row[1]
            ));
            continue;
        }
        if schema.y_is_efficiency() && !(row[1] > 0.0 && row[1] <= 1.0) {
            errors.push(format!(
                "line {line_no}: {} must lie in (0, 1], got {}",
                header_names[1], row[1]
            ));
            continue;
        }
        x.push(row[0]);
        y.push(row[1]);
    }

    if x.is_empty() && errors.is_empty() {
        errors.push("no data rows after the header".into());
    }
    if errors.is_empty() {
        Ok(Table {
            x,
            y,
            header: header_names,
        })
    } else {
        Err(CsvErrors {
            path: path.display().to_string(),
            errors,
        })
    }
}

/// Row count on success, diagnostics otherwise.
pub fn validate_csv(path: &Path, schema: Schema) -> Result<usize, CsvErrors> {
    load_csv(path, schema).map(|t| t.rows())
}
