/// Parsed LibSVM-format classification data with dense features.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmData {
    pub xs: Vec<Vec<f64>>,
    /// Labels normalized to `{-1, +1}` (`0` maps to `-1`).
    pub ys: Vec<f64>,
    pub dim: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// Parses LibSVM text: one sample per line, `<label> <index>:<value> ...`
/// with 1-based strictly ascending indices and labels in `{-1, 1}` or
/// `{0, 1}`. Features are densified to `max index` columns, or to
/// `dim_override` when given.
pub fn parse_libsvm(text: &str, dim_override: Option<usize>) -> Result<LibsvmData, ParseError> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| ParseError {
            line: line_no,
            reason,
        };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().ok_or_else(|| err("missing label".into()))?;
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("non-numeric label '{label_tok}'")))?;
        let label = if label == 1.0 {
            1.0
        } else if label == -1.0 || label == 0.0 {
            -1.0
        } else {
            return Err(err(format!("label must be -1, 0, or 1, got {label}")));
        };

        let mut features = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got '{tok}'")))?;
            let index: usize = idx_str
                .parse()
                .map_err(|_| err(format!("non-numeric index '{idx_str}'")))?;
            if index == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if index <= prev_index {
                return Err(err(format!(
                    "indices must be ascending, got {index} after {prev_index}"
                )));
            }
            let value: f64 = val_str
                .parse()
                .map_err(|_| err(format!("non-numeric value '{val_str}'")))?;
            features.push((index, value));
            prev_index = index;
            max_index = max_index.max(index);
        }
        rows.push((label, features));
    }

    let dim = match dim_override {
        Some(d) => {
            if max_index > d {
                return Err(ParseError {
                    line: 0,
                    reason: format!("feature index {max_index} exceeds dimension override {d}"),
                });
            }
            d
        }
        None => max_index,
    };

    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (label, features) in rows {
        let mut x = vec![0.0; dim];
        for (index, value) in features {
            x[index - 1] = value;
        }
        xs.push(x);
        ys.push(label);
    }
    Ok(LibsvmData { xs, ys, dim })
}

/// Serializes to LibSVM text with lossless float formatting; only nonzero
/// features are emitted. `parse_libsvm(to_libsvm_string(d), Some(d.dim))`
/// reproduces `d`.
pub fn to_libsvm_string(data: &LibsvmData) -> String {
    let mut out = String::new();
    for (x, y) in data.xs.iter().zip(&data.ys) {
        out.push_str(if *y > 0.0 { "+1" } else { "-1" });
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                out.push_str(&format!(" {}:{:e}", j + 1, v));
            }
        }
        out.push('\n');
    }
    out
}
