//! Integer evaluation of assignment vectors, independent of the `fairness` module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use super::OracleError;
use crate::fairness::Criterion;
use crate::model::ValuationProfile;
use crate::numeric::Rational;

fn lcm_of<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()))
}

fn scale(values: &[Rational], factor: &BigInt) -> Result<Vec<i128>, OracleError> {
    values
        .iter()
        .map(|x| {
            let scaled = x.numer() * (factor / x.denom());
            i128::try_from(&scaled).map_err(|_| OracleError::Overflow)
        })
        .collect()
}

/// Each row multiplied by the lcm of its own denominators.
pub(crate) fn scale_rows(profile: &ValuationProfile) -> Result<Vec<Vec<i128>>, OracleError> {
    profile
        .rows()
        .iter()
        .map(|row| scale(row, &lcm_of(row.iter())))
        .collect()
}

/// All rows multiplied by one common factor, returned with that factor.
pub(crate) fn scale_common(profile: &ValuationProfile) -> Result<(Vec<Vec<i128>>, BigInt), OracleError> {
    let factor = lcm_of(profile.rows().iter().flatten());
    let rows = profile
        .rows()
        .iter()
        .map(|row| scale(row, &factor))
        .collect::<Result<_, _>>()?;
    Ok((rows, factor))
}

fn top_sum(scratch: &mut [i128], c: usize) -> i128 {
    scratch.sort_unstable_by(|a, b| b.cmp(a));
    scratch.iter().take(c).sum()
}

/// Whether the assignment `owner` (item → agent) satisfies the criterion under `rows`.
pub(crate) fn fair(rows: &[Vec<i128>], owner: &[usize], n: usize, criterion: Criterion, c: usize, scratch: &mut Vec<i128>) -> bool {
    let mut bundle = vec![0i128; n];
    for (i, row) in rows.iter().enumerate() {
        bundle.iter_mut().for_each(|b| *b = 0);
        for (g, &a) in owner.iter().enumerate() {
            bundle[a] += row[g];
        }
        let own = bundle[i];
        let ok = match criterion {
            Criterion::Ef => (0..n).all(|j| {
                if j == i || own >= bundle[j] {
                    return true;
                }
                scratch.clear();
                scratch.extend(owner.iter().zip(row).filter(|(&a, _)| a == j).map(|(_, &x)| x));
                own >= bundle[j] - top_sum(scratch, c)
            }),
            Criterion::Prop => {
                let total: i128 = bundle.iter().sum();
                if own * n as i128 >= total {
                    true
                } else {
                    scratch.clear();
                    scratch.extend(owner.iter().zip(row).filter(|(&a, _)| a != i).map(|(_, &x)| x));
                    (own + top_sum(scratch, c)) * n as i128 >= total
                }
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

pub(crate) fn welfare(rows: &[Vec<i128>], owner: &[usize]) -> i128 {
    owner.iter().enumerate().map(|(g, &a)| rows[a][g]).sum()
}

/// `2`-balanced PROP-`(k1, k2)` for the split where `in_x1[g]` marks `X1`.
pub(crate) fn two_balanced(
    rows: &[&[Vec<i128>]],
    n1: &[usize],
    n2: &[usize],
    in_x1: &[bool],
    k1: usize,
    k2: usize,
    scratch: &mut Vec<i128>,
) -> bool {
    let n = (n1.len() + n2.len()) as i128;
    let side = |group: &[usize], mine: bool, k: usize, scratch: &mut Vec<i128>| {
        group.iter().all(|&i| {
            rows.iter().all(|profile| {
                let row = &profile[i];
                let total: i128 = row.iter().sum();
                let own: i128 = row.iter().zip(in_x1).filter(|(_, &x)| x == mine).map(|(v, _)| v).sum();
                scratch.clear();
                scratch.extend(row.iter().zip(in_x1).filter(|(_, &x)| x != mine).map(|(v, _)| *v));
                (own + top_sum(scratch, k)) * n >= group.len() as i128 * total
            })
        })
    };
    side(n1, true, k1, scratch) && side(n2, false, k2, scratch)
}
