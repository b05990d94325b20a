//! Min-cost injective assignment via the Hungarian algorithm with potentials,
//! O(rows^2 * cols). Rows must not outnumber columns.

use alloc::vec;
use alloc::vec::Vec;

/// Minimum total cost of assigning each row to a distinct column.
///
/// `cost` is a rows x cols matrix with `rows <= cols`; an empty matrix costs 0.
pub(crate) fn min_cost_assignment(cost: &[Vec<u64>]) -> u64 {
    let rows = cost.len();
    if rows == 0 {
        return 0;
    }
    let cols = cost[0].len();
    debug_assert!(rows <= cols);
    debug_assert!(cost.iter().all(|r| r.len() == cols));

    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; row_of[j] is the row matched to column j (0 = none).
    let mut pot_row = vec![0i64; rows + 1];
    let mut pot_col = vec![0i64; cols + 1];
    let mut row_of = vec![0usize; cols + 1];
    let mut prev_col = vec![0usize; cols + 1];

    for row in 1..=rows {
        row_of[0] = row;
        let mut j0 = 0usize;
        let mut min_to = vec![INF; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] as i64 - pot_row[i0] - pot_col[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    prev_col[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    pot_row[row_of[j]] += delta;
                    pot_col[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // augment along the alternating path
        loop {
            let j1 = prev_col[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=cols)
        .filter(|&j| row_of[j] != 0)
        .map(|j| cost[row_of[j] - 1][j - 1])
        .sum()
}
