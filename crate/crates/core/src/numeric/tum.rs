//! Recognition of the two-block sufficient condition for total unimodularity.
//!
//! A `{0, ±1}` matrix passes when its rows split into two blocks such that each
//! block uses a single nonzero sign and every column has at most one nonzero
//! inside each block.

use super::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TumError {
    #[error("entry ({row}, {col}) = {value} is not in {{0, 1, -1}}")]
    NonTernary { row: usize, col: usize, value: Rational },
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
}

fn sign_of(row: &[i8]) -> i8 {
    row.iter().copied().find(|&x| x != 0).unwrap_or(0)
}

/// Whether the matrix has the two-block form. Entries must lie in `{0, ±1}`.
pub fn is_totally_unimodular_bipartite_form(matrix: &[Vec<Rational>]) -> Result<bool, TumError> {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<i8>> = Vec::with_capacity(matrix.len());
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != cols {
            return Err(TumError::Ragged {
                row: i,
                len: row.len(),
                expected: cols,
            });
        }
        let mut out = Vec::with_capacity(cols);
        for (j, x) in row.iter().enumerate() {
            let v = match x.to_i64() {
                Some(0) => 0,
                Some(1) => 1,
                Some(-1) => -1,
                _ => {
                    return Err(TumError::NonTernary {
                        row: i,
                        col: j,
                        value: x.clone(),
                    })
                }
            };
            out.push(v);
        }
        rows.push(out);
    }

    // A row mixing signs cannot sit in any sign-uniform block.
    if rows.iter().any(|r| r.contains(&1) && r.contains(&-1)) {
        return Ok(false);
    }

    // Rows sharing a column's nonzeros must go to different blocks.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
    for j in 0..cols {
        let support: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][j] != 0).collect();
        match support.len() {
            0 | 1 => {}
            2 => {
                adjacency[support[0]].push(support[1]);
                adjacency[support[1]].push(support[0]);
            }
            _ => return Ok(false),
        }
    }

    // 2-colour each component; each component may then be flipped as a whole.
    let mut colour: Vec<Option<bool>> = vec![None; rows.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..rows.len() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let c = colour[i].unwrap();
            for &k in &adjacency[i] {
                match colour[k] {
                    None => {
                        colour[k] = Some(!c);
                        members.push(k);
                        stack.push(k);
                    }
                    Some(ck) if ck == c => return Ok(false),
                    Some(_) => {}
                }
            }
        }
        components.push(members);
    }

    // Each block is either all-nonnegative or all-nonpositive.
    for (first_sign, second_sign) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        let fits = |members: &[usize], flip: bool| {
            members.iter().all(|&i| {
                let s = sign_of(&rows[i]);
                let in_first = colour[i].unwrap() ^ flip;
                s == 0 || s == if in_first { first_sign } else { second_sign }
            })
        };
        if components.iter().all(|m| fits(m, false) || fits(m, true)) {
            return Ok(true);
        }
    }
    Ok(false)
}
