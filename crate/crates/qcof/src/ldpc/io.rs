//! Plain-text serialization of base matrices and lifted codes.
//!
//! Both forms share one layout: a header line `p z checks vars` followed by
//! one line per nonzero entry. Base matrices use `p = 0, z = 0` and store
//! edge multiplicities against base indices; lifted codes store field
//! coefficients against global indices, with `checks` and `vars` giving the
//! base shape. Lines starting with `#` and blank lines are ignored.

use crate::ldpc::base::{BaseMatrix, LdpcError};
use crate::ldpc::lift::LiftedCode;
use std::fmt::Write as _;

/// Serializes a base matrix.
pub fn base_to_text(base: &BaseMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "0 0 {} {}", base.checks(), base.vars()).unwrap();
    for i in 0..base.checks() {
        for j in 0..base.vars() {
            let b = base.entry(i, j);
            if b > 0 {
                writeln!(out, "{i} {j} {b}").unwrap();
            }
        }
    }
    out
}

/// Serializes a lifted code.
pub fn code_to_text(code: &LiftedCode) -> String {
    let (base_checks, base_vars) = code.base_dims();
    let mut out = String::new();
    writeln!(out, "{} {} {} {}", code.p(), code.z(), base_checks, base_vars).unwrap();
    for (r, row) in code.row_entries().iter().enumerate() {
        for &(v, coeff) in row {
            writeln!(out, "{r} {v} {coeff}").unwrap();
        }
    }
    out
}

fn parse_lines(text: &str) -> Result<(Vec<u64>, Vec<[u64; 3]>), LdpcError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| LdpcError::Parse("empty input".into()))?;
    let header: Vec<u64> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| LdpcError::Parse(format!("bad header token {t}"))))
        .collect::<Result<_, _>>()?;
    if header.len() != 4 {
        return Err(LdpcError::Parse("header must have four fields".into()));
    }
    let mut entries = Vec::new();
    for line in lines {
        let toks: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| LdpcError::Parse(format!("bad token {t}"))))
            .collect::<Result<_, _>>()?;
        if toks.len() != 3 {
            return Err(LdpcError::Parse(format!("entry line needs three fields: {line}")));
        }
        entries.push([toks[0], toks[1], toks[2]]);
    }
    Ok((header, entries))
}

/// Parses a base matrix serialized by [`base_to_text`].
pub fn base_from_text(text: &str) -> Result<BaseMatrix, LdpcError> {
    let (header, entries) = parse_lines(text)?;
    if header[0] != 0 || header[1] != 0 {
        return Err(LdpcError::Parse("expected a base matrix header (p = 0, z = 0)".into()));
    }
    let checks = header[2] as usize;
    let vars = header[3] as usize;
    if checks == 0 || vars == 0 {
        return Err(LdpcError::Parse("base matrix must be nonempty".into()));
    }
    let mut rows = vec![vec![0u32; vars]; checks];
    for [i, j, b] in entries {
        let (i, j) = (i as usize, j as usize);
        if i >= checks || j >= vars {
            return Err(LdpcError::Parse(format!("entry ({i}, {j}) out of range")));
        }
        rows[i][j] = b as u32;
    }
    Ok(BaseMatrix::new(rows))
}

/// Parses a lifted code serialized by [`code_to_text`].
///
/// Deserialized codes decode normally; encoding falls back to the dense
/// row-reduction plan, so re-lift from the base matrix when a fast encoder
/// for a large code is needed.
pub fn code_from_text(text: &str) -> Result<LiftedCode, LdpcError> {
    let (header, entries) = parse_lines(text)?;
    let p = header[0];
    let z = header[1] as usize;
    if p < 2 {
        return Err(LdpcError::Parse(format!("invalid field size {p}")));
    }
    if z == 0 {
        return Err(LdpcError::Parse("lift size must be positive".into()));
    }
    let base_checks = header[2] as usize;
    let base_vars = header[3] as usize;
    let n = base_vars * z;
    let n_checks = base_checks * z;
    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n_checks];
    for [r, v, coeff] in entries {
        let (r, v) = (r as usize, v as usize);
        if r >= n_checks || v >= n {
            return Err(LdpcError::Parse(format!("entry ({r}, {v}) out of range")));
        }
        if coeff == 0 || coeff >= p {
            return Err(LdpcError::Parse(format!("coefficient {coeff} outside Z_{p}")));
        }
        rows[r].push((v, coeff));
    }
    Ok(LiftedCode::from_parts(p, z, base_checks, base_vars, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::base::{check_merge, ira_base, ra_base};
    use crate::ldpc::decode::{bp_decode, DecodeOutcome};
    use crate::ldpc::lift::lift;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn base_round_trip() {
        for base in [ra_base(2, 3).unwrap(), ira_base(), check_merge(&ira_base(), 2, 3).unwrap()] {
            let text = base_to_text(&base);
            let back = base_from_text(&text).unwrap();
            assert_eq!(back, base);
        }
    }

    #[test]
    fn code_round_trip_preserves_matrix() {
        let base = check_merge(&ira_base(), 2, 3).unwrap();
        let code = lift(&base, 7, 8, 21).unwrap();
        let text = code_to_text(&code);
        let back = code_from_text(&text).unwrap();
        assert_eq!(back.p(), code.p());
        assert_eq!(back.z(), code.z());
        assert_eq!(back.n(), code.n());
        assert_eq!(back.row_entries(), code.row_entries());
        // Serialization is stable: a second round trip is byte identical.
        assert_eq!(code_to_text(&back), text);
    }

    #[test]
    fn deserialized_code_decodes() {
        let base = ra_base(1, 2).unwrap();
        let code = lift(&base, 7, 32, 8).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..7)).collect();
        let c = code.encode(&w);
        let back = code_from_text(&code_to_text(&code)).unwrap();
        let mut channel = vec![0.01 / 6.0; 7];
        channel[0] = 0.99;
        match bp_decode(&back, &c, &channel, 50) {
            DecodeOutcome::Decoded { codeword, .. } => assert_eq!(codeword, c),
            DecodeOutcome::Failed { .. } => panic!("clean word failed to decode"),
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(base_from_text("").is_err());
        assert!(base_from_text("0 0 1").is_err());
        assert!(base_from_text("0 0 1 2\n0 5 1").is_err());
        assert!(code_from_text("1 4 1 2\n0 0 1").is_err());
        assert!(code_from_text("7 4 1 2\n0 0 9").is_err());
        assert!(base_from_text("7 4 1 2\n0 0 1").is_err());
    }
}
