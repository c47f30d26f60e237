//! Protograph base matrices and rate adjustment by check merging.
//!
//! A base matrix stores edge multiplicities: entry (i, j) counts the parallel
//! edges between check class i and variable class j. Design rate follows from
//! the shape alone. Higher-rate members of a family are produced by
//! replicating the base over disjoint variable classes and merging check rows
//! in a fixed deterministic order, which preserves the variable degree
//! profile. Replicated rows are interleaved so that adjacent rows come from
//! different copies: pairwise merging then joins rows with disjoint variable
//! support, keeping the merged protograph connected without adding parallel
//! edges.

use thiserror::Error;

/// Errors from base matrix construction and lifting.
#[derive(Debug, Error)]
pub enum LdpcError {
    /// The requested design rate cannot be produced by this family.
    #[error("unsupported design rate {num}/{den}")]
    UnsupportedRate { num: u32, den: u32 },
    /// A lifted code could not be built with the requested parameters.
    #[error("lift failed: {0}")]
    Lift(String),
    /// A custom row merge request was malformed.
    #[error("invalid merge: {0}")]
    Merge(String),
    /// A serialized matrix or code could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Edge multiplicity matrix of a protograph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    entries: Vec<Vec<u32>>,
}

impl BaseMatrix {
    /// Builds a base matrix from rows of edge multiplicities.
    ///
    /// Every row and every column must contain at least one edge.
    pub fn new(entries: Vec<Vec<u32>>) -> Self {
        assert!(!entries.is_empty(), "base matrix needs at least one row");
        let cols = entries[0].len();
        assert!(cols > 0, "base matrix needs at least one column");
        for row in &entries {
            assert_eq!(row.len(), cols, "base matrix rows must have equal length");
        }
        for (i, row) in entries.iter().enumerate() {
            assert!(
                row.iter().any(|&b| b > 0),
                "base matrix row {i} has no edges"
            );
        }
        for j in 0..cols {
            assert!(
                entries.iter().any(|row| row[j] > 0),
                "base matrix column {j} has no edges"
            );
        }
        BaseMatrix { entries }
    }

    /// Number of check classes (rows).
    pub fn checks(&self) -> usize {
        self.entries.len()
    }

    /// Number of variable classes (columns).
    pub fn vars(&self) -> usize {
        self.entries[0].len()
    }

    /// Edge multiplicity between check class `i` and variable class `j`.
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    /// Rows of the matrix.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.entries
    }

    /// Design rate 1 - checks/vars, assuming full-rank checks.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.checks() as f64 / self.vars() as f64
    }

    /// Total edge count of check class `i`.
    pub fn row_degree(&self, i: usize) -> u32 {
        self.entries[i].iter().sum()
    }

    /// Total edge count of variable class `j`.
    pub fn col_degree(&self, j: usize) -> u32 {
        self.entries.iter().map(|row| row[j]).sum()
    }
}

/// Base matrix of the repeat-accumulate family at the requested design rate.
///
/// The rate-1/2 core repeats each message symbol four times and accumulates;
/// higher rates such as 2/3 and 4/5 are produced by [`check_merge`].
pub fn ra_base(num: u32, den: u32) -> Result<BaseMatrix, LdpcError> {
    let core = BaseMatrix::new(vec![vec![4, 2]]);
    if num * 2 == den {
        return Ok(core);
    }
    check_merge(&core, num, den)
}

/// Base matrix of the irregular repeat-accumulate family at rate 1/2.
///
/// Variable classes 0 through 3 carry the message; classes 4 through 7 form
/// the accumulator. The double edge at (3, 3) concentrates degree on one
/// message class, which buys threshold at the cost of a denser column.
pub fn ira_base() -> BaseMatrix {
    BaseMatrix::new(vec![
        vec![1, 0, 1, 1, 1, 1, 0, 0],
        vec![0, 1, 1, 1, 0, 1, 1, 0],
        vec![1, 1, 0, 1, 0, 0, 1, 1],
        vec![0, 0, 1, 2, 1, 0, 0, 1],
    ])
}

/// Replicates a base matrix over disjoint variable classes.
///
/// Row k of the result is copy (k mod copies) of base row (k / copies), so
/// consecutive rows come from different copies and share no variable
/// classes. Columns are laid out copy by copy: copy c of base column j lands
/// at column c * vars + j.
pub fn replicate(base: &BaseMatrix, copies: usize) -> BaseMatrix {
    assert!(copies > 0, "replication needs at least one copy");
    let cols = base.vars();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(copies * base.checks());
    for i in 0..base.checks() {
        for rep in 0..copies {
            let mut row = vec![0u32; copies * cols];
            for j in 0..cols {
                row[rep * cols + j] = base.entry(i, j);
            }
            rows.push(row);
        }
    }
    BaseMatrix::new(rows)
}

/// Merges the given pairs of check rows, summing edge multiplicities.
///
/// Each pair (keep, absorb) adds row absorb into row keep; absorbed rows are
/// then removed and the survivors keep their original order. All indices must
/// be in range and distinct across pairs. This is the explicit-pairing
/// counterpart of [`check_merge`], which picks its pairs in index order.
pub fn merge_rows(base: &BaseMatrix, pairs: &[(usize, usize)]) -> Result<BaseMatrix, LdpcError> {
    let n = base.checks();
    let mut used = vec![false; n];
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(LdpcError::Merge(format!(
                "row pair ({a}, {b}) out of range for {n} checks"
            )));
        }
        if a == b || used[a] || used[b] {
            return Err(LdpcError::Merge(format!(
                "row pair ({a}, {b}) reuses a row"
            )));
        }
        used[a] = true;
        used[b] = true;
    }
    let mut rows: Vec<Vec<u32>> = base.rows().to_vec();
    let mut drop = vec![false; n];
    for &(a, b) in pairs {
        let absorbed = rows[b].clone();
        for (acc, add) in rows[a].iter_mut().zip(absorbed.iter()) {
            *acc += *add;
        }
        drop[b] = true;
    }
    let kept: Vec<Vec<u32>> = rows
        .into_iter()
        .zip(drop.iter())
        .filter(|(_, &d)| !d)
        .map(|(row, _)| row)
        .collect();
    Ok(BaseMatrix::new(kept))
}

/// Raises the design rate of a base matrix by replicating and merging checks.
///
/// The base is replicated with [`replicate`] as few times as the target rate
/// allows, then adjacent check rows are summed pairwise in index order, with
/// a cursor that advances past each merged row and wraps, until the check
/// count matches the target rate. Because replication interleaves the copies,
/// every first-pass merge joins rows from different copies. Variable degrees
/// are unchanged; merged checks get the summed degree. Use [`merge_rows`] to
/// pick a different pairing.
pub fn check_merge(base: &BaseMatrix, num: u32, den: u32) -> Result<BaseMatrix, LdpcError> {
    assert!(den > 0, "rate denominator must be positive");
    assert!(num < den, "design rate must be below one");
    let unsupported = LdpcError::UnsupportedRate { num, den };
    // Smallest replication count giving an integer number of merged checks.
    let mut chosen = None;
    for r in 1..=den as usize {
        let total_vars = r * base.vars();
        let scaled = total_vars * (den - num) as usize;
        if scaled % den as usize != 0 {
            continue;
        }
        let target_checks = scaled / den as usize;
        if target_checks == 0 || target_checks > r * base.checks() {
            continue;
        }
        chosen = Some((r, target_checks));
        break;
    }
    let Some((reps, target_checks)) = chosen else {
        return Err(unsupported);
    };
    if reps == 1 && target_checks == base.checks() {
        return Ok(base.clone());
    }
    if target_checks == reps * base.checks() {
        return Err(unsupported);
    }

    let mut rows: Vec<Vec<u32>> = replicate(base, reps).rows().to_vec();

    // Merge adjacent rows until the target check count is reached.
    let mut cursor = 0;
    while rows.len() > target_checks {
        if cursor + 1 >= rows.len() {
            cursor = 0;
        }
        let absorbed = rows.remove(cursor + 1);
        for (acc, b) in rows[cursor].iter_mut().zip(absorbed.iter()) {
            *acc += *b;
        }
        cursor += 1;
    }
    Ok(BaseMatrix::new(rows))
}
