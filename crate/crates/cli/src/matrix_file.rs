//! Plain-text matrices: the first token is `p`, followed by `p` rows of
//! `p` whitespace-separated numbers.

use std::path::Path;

use edgepower_core::nalgebra::DMatrix;

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("empty matrix file")?;
    let p: usize = header
        .parse()
        .map_err(|_| format!("first line must be the dimension p, got {header:?}"))?;
    if p == 0 {
        return Err("dimension p must be positive".into());
    }
    let mut data = Vec::with_capacity(p * p);
    for row in 0..p {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {p} rows, found {row}"))?;
        let before = data.len();
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| format!("row {}: {tok:?} is not a number", row + 1))?;
            if !x.is_finite() {
                return Err(format!("row {}: entries must be finite", row + 1));
            }
            data.push(x);
        }
        let found = data.len() - before;
        if found != p {
            return Err(format!("row {} has {found} entries, expected {p}", row + 1));
        }
    }
    if lines.next().is_some() {
        return Err(format!("trailing content after {p} rows"));
    }
    Ok(DMatrix::from_row_slice(p, p, &data))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_matrix(&text).map_err(|e| format!("{}: {e}", path.display()))
}
