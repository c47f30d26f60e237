//! Circulant lifting of protograph base matrices into working codes.
//!
//! Every base edge expands into a Z x Z cyclic shift block with a nonzero
//! coefficient from Z_p. Shifts for message edges are chosen greedily to
//! avoid length-4 cycles; accumulator edges get the fixed shift pattern that
//! turns each degree-2 chain into one long cycle, which keeps encoding linear
//! time. Codes whose degree-2 structure does not cover every check fall back
//! to a dense row-reduction encoder.

use crate::field::PrimeField;
use crate::ldpc::base::{BaseMatrix, LdpcError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

/// A lifted parity-check code over Z_p with a sparse check matrix.
pub struct LiftedCode {
    field: PrimeField,
    z: usize,
    base_checks: usize,
    base_vars: usize,
    rows: Vec<Vec<(usize, u64)>>,
    cols: Vec<Vec<(usize, u64)>>,
    encoder: Encoder,
}

enum Encoder {
    Chain(ChainPlan),
    Generic(OnceLock<GenericPlan>),
}

/// Accumulator-chain encoder: the parity variables form disjoint cycles in
/// the Tanner graph, solved by one affine propagation pass per cycle.
struct ChainPlan {
    info_base_cols: Vec<usize>,
    orbits: Vec<Orbit>,
    max_orbit: usize,
}

struct Orbit {
    vars: Vec<usize>,
    xi_coeff: Vec<u64>,
    steps: Vec<OrbitStep>,
    closing_check: usize,
    closing_a: u64,
    d_inv: u64,
}

struct OrbitStep {
    check: usize,
    a: u64,
    b_inv: u64,
}

/// Dense fallback encoder from row reduction of the full check matrix.
struct GenericPlan {
    free_cols: Vec<usize>,
    pivots: Vec<(usize, Vec<(usize, u64)>)>,
}

struct Block {
    row: usize,
    col: usize,
    shift: usize,
    coeff: u64,
}

/// Lifts a base matrix to blocklength `vars * z` over Z_p.
///
/// Message-edge shifts are drawn from a seeded generator and scored against
/// a registry of shift differences so that no two variables share two checks
/// whenever the lift size allows it; coefficients are uniform over the
/// nonzero field elements. The same seed always yields the same code.
pub fn lift(base: &BaseMatrix, p: u64, z: usize, seed: u64) -> Result<LiftedCode, LdpcError> {
    assert!(p >= 3, "lifting needs an odd prime modulus");
    assert!(z >= 1, "lift size must be positive");
    let field = PrimeField::new(p);
    let max_mult = (0..base.checks())
        .flat_map(|i| (0..base.vars()).map(move |j| (i, j)))
        .map(|(i, j)| base.entry(i, j))
        .max()
        .unwrap();
    assert!(
        z >= max_mult as usize,
        "lift size {z} is below the largest edge multiplicity {max_mult}"
    );

    // A cover is only usable if every chain admits a nonsingular wrap.
    let cover = if z >= 2 { find_parity_cover(base) } else { None };
    let cover: Option<Vec<(CoverPiece, usize, u64)>> = cover.and_then(|pieces| {
        pieces
            .into_iter()
            .map(|piece| {
                let c_len = match &piece {
                    CoverPiece::SelfLoop { .. } => 1,
                    CoverPiece::Cycle { rows, .. } => rows.len(),
                };
                chain_wrap(field, z, c_len).map(|(t, rho)| (piece, t, rho))
            })
            .collect()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<Block> = Vec::new();
    let mut registry: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut col_blocks: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();

    let place = |blocks: &mut Vec<Block>,
                     registry: &mut HashSet<(usize, usize, usize)>,
                     col_blocks: &mut HashMap<usize, Vec<(usize, usize)>>,
                     b: Block| {
        let existing = col_blocks.entry(b.col).or_default();
        for &(r_e, s_e) in existing.iter() {
            let fwd = (b.row, r_e, (b.shift + z - s_e) % z);
            let rev = (r_e, b.row, (s_e + z - b.shift) % z);
            registry.insert(fwd);
            registry.insert(rev);
        }
        existing.push((b.row, b.shift));
        blocks.push(b);
    };

    // Accumulator chains first: their shifts are structural.
    let mut parity_cols: Vec<usize> = Vec::new();
    if let Some(structures) = &cover {
        for (piece, wrap_shift, rho) in structures {
            match piece {
                CoverPiece::SelfLoop { row, col } => {
                    parity_cols.push(*col);
                    place(
                        &mut blocks,
                        &mut registry,
                        &mut col_blocks,
                        Block { row: *row, col: *col, shift: 0, coeff: 1 },
                    );
                    place(
                        &mut blocks,
                        &mut registry,
                        &mut col_blocks,
                        Block { row: *row, col: *col, shift: *wrap_shift, coeff: *rho },
                    );
                }
                CoverPiece::Cycle { rows, cols } => {
                    parity_cols.extend(cols.iter().copied());
                    let len = rows.len();
                    for k in 0..len {
                        place(
                            &mut blocks,
                            &mut registry,
                            &mut col_blocks,
                            Block { row: rows[k], col: cols[k], shift: 0, coeff: 1 },
                        );
                        if k + 1 < len {
                            place(
                                &mut blocks,
                                &mut registry,
                                &mut col_blocks,
                                Block { row: rows[k + 1], col: cols[k], shift: 0, coeff: 1 },
                            );
                        } else {
                            place(
                                &mut blocks,
                                &mut registry,
                                &mut col_blocks,
                                Block { row: rows[0], col: cols[k], shift: *wrap_shift, coeff: *rho },
                            );
                        }
                    }
                }
            }
        }
    }
    parity_cols.sort_unstable();

    // Message edges: greedy shift selection avoiding registered differences.
    let mut candidates: Vec<usize> = (0..z).collect();
    for i in 0..base.checks() {
        for j in 0..base.vars() {
            if parity_cols.binary_search(&j).is_ok() {
                continue;
            }
            let mult = base.entry(i, j);
            for _ in 0..mult {
                candidates.shuffle(&mut rng);
                let used: HashSet<usize> = col_blocks
                    .get(&j)
                    .map(|v| v.iter().filter(|(r, _)| *r == i).map(|(_, s)| *s).collect())
                    .unwrap_or_default();
                let mut pick = None;
                let mut fallback = None;
                for &s in &candidates {
                    if used.contains(&s) {
                        continue;
                    }
                    if fallback.is_none() {
                        fallback = Some(s);
                    }
                    if !creates_four_cycle(&registry, &col_blocks, z, i, j, s) {
                        pick = Some(s);
                        break;
                    }
                }
                let shift = pick
                    .or(fallback)
                    .expect("lift size admits a distinct shift per parallel edge");
                let coeff = rng.gen_range(1..p);
                place(
                    &mut blocks,
                    &mut registry,
                    &mut col_blocks,
                    Block { row: i, col: j, shift, coeff },
                );
            }
        }
    }

    // Expand blocks to the sparse lifted matrix.
    let n = base.vars() * z;
    let n_checks = base.checks() * z;
    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n_checks];
    for b in &blocks {
        for i in 0..z {
            let check = b.row * z + i;
            let var = b.col * z + (i + b.shift) % z;
            rows[check].push((var, b.coeff));
        }
    }
    for row in rows.iter_mut() {
        row.sort_unstable_by_key(|&(v, _)| v);
        debug_assert!(row.windows(2).all(|w| w[0].0 != w[1].0));
    }
    let cols = transpose(&rows, n);

    let encoder = match cover {
        Some(_) => {
            let plan = build_chain_plan(field, base, z, &parity_cols, &rows, &cols)?;
            Encoder::Chain(plan)
        }
        None => Encoder::Generic(OnceLock::new()),
    };

    Ok(LiftedCode {
        field,
        z,
        base_checks: base.checks(),
        base_vars: base.vars(),
        rows,
        cols,
        encoder,
    })
}

impl LiftedCode {
    /// Builds a code directly from sparse check rows; used for deserialized
    /// and hand-written matrices. Encoding uses the dense fallback.
    pub fn from_rows(p: u64, n: usize, row_entries: Vec<Vec<(usize, u64)>>) -> Self {
        let checks = row_entries.len();
        Self::from_parts(p, 1, checks, n, row_entries)
    }

    pub(crate) fn from_parts(
        p: u64,
        z: usize,
        base_checks: usize,
        base_vars: usize,
        row_entries: Vec<Vec<(usize, u64)>>,
    ) -> Self {
        let field = PrimeField::new(p);
        let n = base_vars * z;
        assert_eq!(row_entries.len(), base_checks * z, "check row count mismatch");
        let mut rows = row_entries;
        for row in rows.iter_mut() {
            for &(col, coeff) in row.iter() {
                assert!(col < n, "column index out of range");
                assert!(coeff >= 1 && coeff < p, "coefficient must be a nonzero residue");
            }
            row.sort_unstable_by_key(|&(v, _)| v);
            assert!(
                row.windows(2).all(|w| w[0].0 != w[1].0),
                "duplicate column in check row"
            );
        }
        let cols = transpose(&rows, n);
        LiftedCode {
            field,
            z,
            base_checks,
            base_vars,
            rows,
            cols,
            encoder: Encoder::Generic(OnceLock::new()),
        }
    }

    pub(crate) fn base_dims(&self) -> (usize, usize) {
        (self.base_checks, self.base_vars)
    }

    /// Field modulus.
    pub fn p(&self) -> u64 {
        self.field.order()
    }

    /// Field of the code symbols.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Lift size.
    pub fn z(&self) -> usize {
        self.z
    }

    /// Blocklength.
    pub fn n(&self) -> usize {
        self.base_vars * self.z
    }

    /// Number of check equations (before any rank loss).
    pub fn n_checks(&self) -> usize {
        self.base_checks * self.z
    }

    /// Message length.
    pub fn k(&self) -> usize {
        match &self.encoder {
            Encoder::Chain(plan) => plan.info_base_cols.len() * self.z,
            Encoder::Generic(cell) => self.generic_plan(cell).free_cols.len(),
        }
    }

    /// True when encoding runs by back substitution along the accumulator
    /// chains; otherwise a dense fallback limited to small codes is used.
    pub fn has_fast_encoder(&self) -> bool {
        matches!(self.encoder, Encoder::Chain(_))
    }

    /// Codeword positions that carry the message systematically, ascending.
    pub fn info_positions(&self) -> Vec<usize> {
        match &self.encoder {
            Encoder::Chain(plan) => {
                let mut out = Vec::with_capacity(plan.info_base_cols.len() * self.z);
                for &bcol in &plan.info_base_cols {
                    out.extend(bcol * self.z..(bcol + 1) * self.z);
                }
                out
            }
            Encoder::Generic(cell) => self.generic_plan(cell).free_cols.clone(),
        }
    }

    /// Encodes a message into a codeword with `H c = 0`.
    pub fn encode(&self, w: &[u64]) -> Vec<u64> {
        let p = self.field.order();
        assert_eq!(w.len(), self.k(), "message length must equal k");
        assert!(w.iter().all(|&x| x < p), "message symbols must lie in Z_p");
        let f = self.field;
        let mut c = vec![0u64; self.n()];
        match &self.encoder {
            Encoder::Chain(plan) => {
                for (idx, &bcol) in plan.info_base_cols.iter().enumerate() {
                    c[bcol * self.z..(bcol + 1) * self.z]
                        .copy_from_slice(&w[idx * self.z..(idx + 1) * self.z]);
                }
                // Right-hand side for the parity chains.
                let mut s = vec![0u64; self.n_checks()];
                for &bcol in &plan.info_base_cols {
                    for v in bcol * self.z..(bcol + 1) * self.z {
                        let x = c[v];
                        if x == 0 {
                            continue;
                        }
                        for &(chk, coeff) in &self.cols[v] {
                            s[chk] = f.add(s[chk], f.mul(coeff, x));
                        }
                    }
                }
                for e in s.iter_mut() {
                    *e = f.neg(*e);
                }
                let mut u = vec![0u64; plan.max_orbit];
                for orbit in &plan.orbits {
                    u[0] = 0;
                    for (k, step) in orbit.steps.iter().enumerate() {
                        let rhs = f.sub(s[step.check], f.mul(step.a, u[k]));
                        u[k + 1] = f.mul(rhs, step.b_inv);
                    }
                    let m = orbit.vars.len();
                    let rhs = f.sub(s[orbit.closing_check], f.mul(orbit.closing_a, u[m - 1]));
                    let xi = f.mul(rhs, orbit.d_inv);
                    for k in 0..m {
                        c[orbit.vars[k]] = f.add(u[k], f.mul(orbit.xi_coeff[k], xi));
                    }
                }
            }
            Encoder::Generic(cell) => {
                let plan = self.generic_plan(cell);
                for (i, &col) in plan.free_cols.iter().enumerate() {
                    c[col] = w[i];
                }
                for (pivot, terms) in &plan.pivots {
                    let mut acc = 0u64;
                    for &(free_idx, coeff) in terms {
                        acc = f.add(acc, f.mul(coeff, w[free_idx]));
                    }
                    c[*pivot] = acc;
                }
            }
        }
        debug_assert!(self.parity_check(&c));
        c
    }

    /// Checks whether `H c = 0`.
    pub fn parity_check(&self, c: &[u64]) -> bool {
        self.unsatisfied_checks(c) == 0
    }

    /// Number of check equations violated by a hard-decision word.
    pub fn unsatisfied_checks(&self, c: &[u64]) -> usize {
        assert_eq!(c.len(), self.n());
        let f = self.field;
        self.rows
            .iter()
            .filter(|row| {
                let mut acc = 0u64;
                for &(v, coeff) in row.iter() {
                    acc = f.add(acc, f.mul(coeff, c[v]));
                }
                acc != 0
            })
            .count()
    }

    pub(crate) fn row_entries(&self) -> &[Vec<(usize, u64)>] {
        &self.rows
    }

    #[cfg(test)]
    pub(crate) fn col_entries(&self) -> &[Vec<(usize, u64)>] {
        &self.cols
    }

    fn generic_plan<'a>(&'a self, cell: &'a OnceLock<GenericPlan>) -> &'a GenericPlan {
        cell.get_or_init(|| build_generic_plan(self.field, &self.rows, self.n()))
    }
}

fn transpose(rows: &[Vec<(usize, u64)>], n: usize) -> Vec<Vec<(usize, u64)>> {
    let mut cols: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &(v, coeff) in row {
            cols[v].push((r, coeff));
        }
    }
    for col in cols.iter_mut() {
        col.sort_unstable_by_key(|&(r, _)| r);
    }
    cols
}

fn creates_four_cycle(
    registry: &HashSet<(usize, usize, usize)>,
    col_blocks: &HashMap<usize, Vec<(usize, usize)>>,
    z: usize,
    row: usize,
    col: usize,
    shift: usize,
) -> bool {
    let Some(existing) = col_blocks.get(&col) else {
        return false;
    };
    let mut fresh: HashSet<(usize, usize, usize)> = HashSet::new();
    for &(r_e, s_e) in existing {
        let fwd = (row, r_e, (shift + z - s_e) % z);
        let rev = (r_e, row, (s_e + z - shift) % z);
        if registry.contains(&fwd) || registry.contains(&rev) {
            return true;
        }
        if !fresh.insert(fwd) || !fresh.insert(rev) {
            return true;
        }
    }
    false
}

enum CoverPiece {
    SelfLoop { row: usize, col: usize },
    Cycle { rows: Vec<usize>, cols: Vec<usize> },
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Picks a wrap shift and coefficient that keep a lifted chain invertible.
///
/// A chain over `c_len` base checks lifts to orbits that pass the wrap block
/// q = z / gcd(z, t) times, picking up a factor (-1)^(c_len q) rho^q; the
/// chain is singular exactly when that factor is one. Small shifts are
/// preferred because t = 1 merges the whole chain into a single long cycle.
/// Some combinations admit no choice at all (for example p = 3 with z a
/// power of two), in which case the caller falls back to the dense encoder.
fn chain_wrap(field: PrimeField, z: usize, c_len: usize) -> Option<(usize, u64)> {
    let p = field.order();
    for t in 1..z {
        let q = z / gcd(z, t);
        let target = if (c_len * q) % 2 == 0 { 1 } else { p - 1 };
        for rho in 1..p {
            if field.pow(rho, q as u64) != target {
                return Some((t, rho));
            }
        }
    }
    None
}

/// Finds degree-2 columns that give every check exactly two chain sockets,
/// preferring high column indices so message classes stay in front. Returns
/// the decomposition into self-loops and simple cycles over check classes.
fn find_parity_cover(base: &BaseMatrix) -> Option<Vec<CoverPiece>> {
    let candidates: Vec<usize> = (0..base.vars()).filter(|&j| base.col_degree(j) == 2).collect();
    if candidates.is_empty() {
        return None;
    }
    // Split candidate columns into row-connected components.
    let mut row_comp: Vec<Option<usize>> = vec![None; base.checks()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &j in &candidates {
        let touching: Vec<usize> = (0..base.checks()).filter(|&i| base.entry(i, j) > 0).collect();
        let mut target: Option<usize> = None;
        for &i in &touching {
            if let Some(cid) = row_comp[i] {
                target = Some(match target {
                    None => cid,
                    Some(t) if t == cid => t,
                    Some(t) => {
                        // Merge component cid into t.
                        let moved = std::mem::take(&mut comps[cid]);
                        comps[t].extend(moved);
                        for rc in row_comp.iter_mut() {
                            if *rc == Some(cid) {
                                *rc = Some(t);
                            }
                        }
                        t
                    }
                });
            }
        }
        let cid = target.unwrap_or_else(|| {
            comps.push(Vec::new());
            comps.len() - 1
        });
        comps[cid].push(j);
        for &i in &touching {
            row_comp[i] = Some(cid);
        }
    }
    if row_comp.iter().any(|rc| rc.is_none()) {
        return None;
    }

    let mut selected: Vec<usize> = Vec::new();
    for comp in comps.iter().filter(|c| !c.is_empty()) {
        if comp.len() > 20 {
            return None;
        }
        let comp_rows: Vec<usize> = (0..base.checks())
            .filter(|&i| comp.iter().any(|&j| base.entry(i, j) > 0))
            .collect();
        let mut best: Option<Vec<usize>> = None;
        for mask in 0u32..(1 << comp.len()) {
            let mut ok = true;
            for &i in &comp_rows {
                let mut deg = 0u32;
                for (b, &j) in comp.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        deg += base.entry(i, j);
                    }
                }
                if deg != 2 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut subset: Vec<usize> = comp
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &j)| j)
                .collect();
            subset.sort_unstable_by(|x, y| y.cmp(x));
            if best.as_ref().map_or(true, |b| subset > *b) {
                best = Some(subset);
            }
        }
        selected.extend(best?);
    }
    selected.sort_unstable();

    // Decompose the selection into self-loops and row cycles.
    let mut pieces: Vec<CoverPiece> = Vec::new();
    let mut edges: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &j in &selected {
        let touching: Vec<(usize, u32)> = (0..base.checks())
            .map(|i| (i, base.entry(i, j)))
            .filter(|&(_, e)| e > 0)
            .collect();
        if touching.len() == 1 {
            pieces.push(CoverPiece::SelfLoop { row: touching[0].0, col: j });
        } else {
            edges.entry(touching[0].0).or_default().push((j, touching[1].0));
            edges.entry(touching[1].0).or_default().push((j, touching[0].0));
        }
    }
    let mut used_cols: HashSet<usize> = HashSet::new();
    for &j in &selected {
        if used_cols.contains(&j) {
            continue;
        }
        let Some(&(start_col, _)) = edges.values().flatten().find(|&&(c, _)| c == j) else {
            continue;
        };
        debug_assert_eq!(start_col, j);
        // Walk the cycle containing column j.
        let endpoints: Vec<usize> = edges
            .iter()
            .filter(|(_, incident)| incident.iter().any(|&(c, _)| c == j))
            .map(|(&r, _)| r)
            .collect();
        let r0 = *endpoints.iter().min().unwrap();
        let mut cycle_rows = vec![r0];
        let mut cycle_cols = vec![j];
        used_cols.insert(j);
        let mut cur = edges[&r0].iter().find(|&&(c, _)| c == j).unwrap().1;
        while cur != r0 {
            cycle_rows.push(cur);
            let &(next_col, next_row) = edges[&cur]
                .iter()
                .find(|&&(c, _)| !used_cols.contains(&c))
                .expect("every cycle row has one unused chain column");
            cycle_cols.push(next_col);
            used_cols.insert(next_col);
            cur = next_row;
        }
        pieces.push(CoverPiece::Cycle { rows: cycle_rows, cols: cycle_cols });
    }
    Some(pieces)
}

fn build_chain_plan(
    field: PrimeField,
    base: &BaseMatrix,
    z: usize,
    parity_cols: &[usize],
    rows: &[Vec<(usize, u64)>],
    cols: &[Vec<(usize, u64)>],
) -> Result<ChainPlan, LdpcError> {
    let f = field;
    let n = base.vars() * z;
    let mut is_parity = vec![false; n];
    for &bcol in parity_cols {
        for v in bcol * z..(bcol + 1) * z {
            is_parity[v] = true;
        }
    }
    // Parity-restricted incidences per check, in column order.
    let parity_of_check: Vec<Vec<(usize, u64)>> = rows
        .iter()
        .map(|row| row.iter().copied().filter(|&(v, _)| is_parity[v]).collect())
        .collect();

    let mut visited = vec![false; n];
    let mut orbits = Vec::new();
    let mut max_orbit = 0;
    for v0 in (0..n).filter(|&v| is_parity[v]) {
        if visited[v0] {
            continue;
        }
        let inc = &cols[v0];
        if inc.len() != 2 {
            return Err(LdpcError::Lift(format!(
                "parity variable {v0} has degree {} instead of 2",
                inc.len()
            )));
        }
        let mut vars: Vec<usize> = vec![v0];
        let mut xi_coeff: Vec<u64> = vec![1];
        let mut steps: Vec<OrbitStep> = Vec::new();
        visited[v0] = true;
        let mut vcur = v0;
        let mut ccur = inc[0].0;
        let (closing_check, closing_a, d_inv) = loop {
            let ents = &parity_of_check[ccur];
            if ents.len() != 2 {
                return Err(LdpcError::Lift(format!(
                    "check {ccur} has {} chain sockets instead of 2",
                    ents.len()
                )));
            }
            let (a, vnext, b) = if ents[0].0 == vcur {
                (ents[0].1, ents[1].0, ents[1].1)
            } else {
                (ents[1].1, ents[0].0, ents[0].1)
            };
            if vnext == v0 {
                let t_last = *xi_coeff.last().unwrap();
                let d = f.add(f.mul(a, t_last), b);
                assert!(d != 0, "chain cycle is singular; wrap coefficient is wrong");
                break (ccur, a, f.inv(d));
            }
            let b_inv = f.inv(b);
            let t_next = f.mul(f.neg(f.mul(a, *xi_coeff.last().unwrap())), b_inv);
            steps.push(OrbitStep { check: ccur, a, b_inv });
            vars.push(vnext);
            xi_coeff.push(t_next);
            visited[vnext] = true;
            let inc_next = &cols[vnext];
            if inc_next.len() != 2 {
                return Err(LdpcError::Lift(format!(
                    "parity variable {vnext} has degree {} instead of 2",
                    inc_next.len()
                )));
            }
            ccur = if inc_next[0].0 == ccur { inc_next[1].0 } else { inc_next[0].0 };
            vcur = vnext;
        };
        max_orbit = max_orbit.max(vars.len());
        orbits.push(Orbit { vars, xi_coeff, steps, closing_check, closing_a, d_inv });
    }

    let info_base_cols: Vec<usize> = (0..base.vars())
        .filter(|j| parity_cols.binary_search(j).is_err())
        .collect();
    Ok(ChainPlan { info_base_cols, orbits, max_orbit })
}

fn build_generic_plan(field: PrimeField, rows: &[Vec<(usize, u64)>], n: usize) -> GenericPlan {
    let m = rows.len();
    assert!(
        m.saturating_mul(n) <= 1 << 23,
        "dense fallback encoder is limited to small codes; build large codes by lifting"
    );
    let f = field;
    let mut mat: Vec<Vec<u64>> = vec![vec![0u64; n]; m];
    for (r, row) in rows.iter().enumerate() {
        for &(v, coeff) in row {
            mat[r][v] = coeff;
        }
    }
    // Row reduce scanning columns right to left, so message positions land in
    // the leading columns.
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut rank = 0usize;
    for col in (0..n).rev() {
        let Some(r) = (rank..m).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, r);
        let inv = f.inv(mat[rank][col]);
        for x in mat[rank].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = mat[rank].clone();
        for r2 in 0..m {
            if r2 != rank && mat[r2][col] != 0 {
                let factor = mat[r2][col];
                for (x, &s) in mat[r2].iter_mut().zip(pivot_row.iter()) {
                    *x = f.sub(*x, f.mul(factor, s));
                }
            }
        }
        pivot_of_row[rank] = Some(col);
        rank += 1;
        if rank == m {
            break;
        }
    }
    let pivot_cols: HashSet<usize> = pivot_of_row.iter().flatten().copied().collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let free_index: HashMap<usize, usize> =
        free_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut pivots = Vec::with_capacity(rank);
    for r in 0..rank {
        let pivot = pivot_of_row[r].unwrap();
        let mut terms = Vec::new();
        for (&col, &idx) in free_index.iter() {
            if mat[r][col] != 0 {
                terms.push((idx, f.neg(mat[r][col])));
            }
        }
        terms.sort_unstable_by_key(|&(idx, _)| idx);
        pivots.push((pivot, terms));
    }
    GenericPlan { free_cols, pivots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::base::{check_merge, ira_base, ra_base};
    use rand::rngs::StdRng;

    fn random_message(code: &LiftedCode, rng: &mut StdRng) -> Vec<u64> {
        (0..code.k()).map(|_| rng.gen_range(0..code.p())).collect()
    }

    fn has_four_cycle(code: &LiftedCode) -> bool {
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        for row in code.row_entries() {
            for i in 0..row.len() {
                for j in i + 1..row.len() {
                    if !seen.insert((row[i].0, row[j].0)) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn ra_half_lift_dimensions_and_parity() {
        let base = ra_base(1, 2).unwrap();
        let code = lift(&base, 7, 16, 1).unwrap();
        assert_eq!(code.n(), 32);
        assert_eq!(code.k(), 16);
        assert_eq!(code.n_checks(), 16);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let w = random_message(&code, &mut rng);
            let c = code.encode(&w);
            assert!(code.parity_check(&c));
        }
    }

    #[test]
    fn encode_is_systematic_and_linear() {
        let base = check_merge(&ira_base(), 2, 3).unwrap();
        let code = lift(&base, 7, 8, 3).unwrap();
        assert_eq!(code.k(), 16 * 8);
        let f = code.field();
        let positions = code.info_positions();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let w = random_message(&code, &mut rng);
            let c = code.encode(&w);
            for (i, &pos) in positions.iter().enumerate() {
                assert_eq!(c[pos], w[i]);
            }
            // Scalar closure: encode(q w) = q encode(w).
            let q = rng.gen_range(1..code.p());
            let qw: Vec<u64> = w.iter().map(|&x| f.mul(q, x)).collect();
            let qc: Vec<u64> = c.iter().map(|&x| f.mul(q, x)).collect();
            assert_eq!(code.encode(&qw), qc);
        }
        assert_eq!(code.encode(&vec![0; code.k()]), vec![0; code.n()]);
    }

    #[test]
    fn chain_encoder_handles_both_wrap_parities() {
        for z in [15, 16] {
            for (name, base) in [
                ("ra", ra_base(1, 2).unwrap()),
                ("ra23", ra_base(2, 3).unwrap()),
                ("ira", ira_base()),
                ("ira23", check_merge(&ira_base(), 2, 3).unwrap()),
            ] {
                let code = lift(&base, 7, z, 11).unwrap();
                let mut rng = StdRng::seed_from_u64(z as u64);
                for _ in 0..20 {
                    let w = random_message(&code, &mut rng);
                    let c = code.encode(&w);
                    assert!(code.parity_check(&c), "parity fails for {name} z={z}");
                }
            }
        }
    }

    #[test]
    fn lift_avoids_short_cycles_at_moderate_size() {
        let base = check_merge(&ira_base(), 2, 3).unwrap();
        for seed in [0, 1, 2] {
            let code = lift(&base, 7, 32, seed).unwrap();
            assert!(!has_four_cycle(&code), "four-cycle at seed {seed}");
        }
        let ra = ra_base(1, 2).unwrap();
        let code = lift(&ra, 251, 128, 4).unwrap();
        assert!(!has_four_cycle(&code));
    }

    #[test]
    fn lift_row_weights_match_base_degrees() {
        let base = check_merge(&ira_base(), 2, 3).unwrap();
        let code = lift(&base, 251, 32, 7).unwrap();
        for (r, row) in code.row_entries().iter().enumerate() {
            let base_row = r / 32;
            assert_eq!(row.len() as u32, base.row_degree(base_row));
        }
        for (v, col) in code.col_entries().iter().enumerate() {
            let base_col = v / 32;
            assert_eq!(col.len() as u32, base.col_degree(base_col));
        }
    }

    #[test]
    fn lift_is_deterministic_in_the_seed() {
        let base = ira_base();
        let a = lift(&base, 7, 32, 42).unwrap();
        let b = lift(&base, 7, 32, 42).unwrap();
        assert_eq!(a.row_entries(), b.row_entries());
        let c = lift(&base, 7, 32, 43).unwrap();
        assert_ne!(a.row_entries(), c.row_entries());
    }

    #[test]
    fn generic_encoder_spans_the_kernel() {
        // A hand-written matrix with no chain structure.
        let code = LiftedCode::from_rows(5, 3, vec![vec![(0, 1), (1, 1)], vec![(1, 1), (2, 1)]]);
        assert_eq!(code.k(), 1);
        assert_eq!(code.info_positions(), vec![0]);
        let mut words = HashSet::new();
        for w in 0..5u64 {
            let c = code.encode(&[w]);
            assert!(code.parity_check(&c));
            assert_eq!(c[0], w);
            words.insert(c);
        }
        assert_eq!(words.len(), 5);
    }

    #[test]
    fn generic_encoder_handles_redundant_rows() {
        // Rank 1 despite two rows: the second is a scalar multiple.
        let code = LiftedCode::from_rows(5, 3, vec![vec![(0, 1), (1, 1)], vec![(0, 2), (1, 2)]]);
        assert_eq!(code.k(), 2);
        for w0 in 0..5u64 {
            for w1 in 0..5u64 {
                let c = code.encode(&[w0, w1]);
                assert!(code.parity_check(&c));
            }
        }
    }

    #[test]
    fn large_prime_lift_encodes() {
        let base = ra_base(2, 3).unwrap();
        let code = lift(&base, 251, 64, 3).unwrap();
        assert_eq!(code.n(), 6 * 64);
        assert_eq!(code.k(), 4 * 64);
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..20 {
            let w = random_message(&code, &mut rng);
            let c = code.encode(&w);
            assert!(code.parity_check(&c));
        }
    }
}
