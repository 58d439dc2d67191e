//! Coordinate-wise trimmed-mean screening.
//!
//! Per coordinate: sort the neighbor values, drop the `b` smallest and the
//! `b` largest, then average the survivors together with the node's own value.
//! The own value is never trimmed. Ties are broken by sender id ascending; the
//! averaged value is independent of that choice since tied entries are equal.
//! Survivors are summed in ascending sender id order, own value last, so the
//! floating-point result is identical across runs and platforms.

use crate::error::{Error, Result};

/// One coordinate's screening input.
#[derive(Debug, Clone)]
pub struct ScreenInput<'a> {
    /// The node's own value for this coordinate.
    pub own: f64,
    /// `(sender id, value)` for every neighbor heard this round.
    pub neighbors: &'a [(usize, f64)],
    /// Trim count `b`.
    pub trim: usize,
}

fn require_enough(node: Option<usize>, neighbors: usize, b: usize) -> Result<()> {
    let min = 2 * b + 1;
    if neighbors < min {
        return Err(Error::InsufficientNeighbors {
            node: node.unwrap_or(usize::MAX),
            neighbors,
            b,
            min,
        });
    }
    Ok(())
}

/// Trim-and-average one coordinate. Returns the screened value and the kept
/// sender ids (sorted), of size `|neighbors| - 2b` exactly.
pub fn trimmed_mean_coordinate(input: &ScreenInput) -> Result<(f64, Vec<usize>)> {
    require_enough(None, input.neighbors.len(), input.trim)?;
    let mut scratch: Vec<(f64, usize)> = input
        .neighbors
        .iter()
        .map(|&(id, v)| (v, id))
        .collect();
    let value = screen_coordinate(input.own, &mut scratch, input.trim);
    let mut kept: Vec<usize> = scratch
        [input.trim..scratch.len() - input.trim]
        .iter()
        .map(|&(_, id)| id)
        .collect();
    kept.sort_unstable();
    Ok((value, kept))
}

/// Sorts `scratch` by (value, sender id) and returns the screened average.
/// After the call, `scratch[b..len-b]` holds the kept entries.
fn screen_coordinate(own: f64, scratch: &mut [(f64, usize)], b: usize) -> f64 {
    scratch.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("non-finite coordinate value")
            .then(a.1.cmp(&b.1))
    });
    let len = scratch.len();
    let kept = &mut scratch[b..len - b];
    // Fixed summation order: ascending sender id, own value last.
    kept.sort_unstable_by_key(|&(_, id)| id);
    let mut sum = 0.0;
    for &(v, _) in kept.iter() {
        sum += v;
    }
    sum += own;
    sum / (kept.len() + 1) as f64
}

/// Apply the screen independently to every coordinate of a d-dimensional
/// iterate. Kept sender sets may differ across coordinates; only the averaged
/// vector is returned.
pub fn screen_and_average(
    own: &[f64],
    received: &[(usize, Vec<f64>)],
    b: usize,
) -> Result<Vec<f64>> {
    require_enough(None, received.len(), b)?;
    let d = own.len();
    for (id, v) in received {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let _ = id;
    }
    let mut out = vec![0.0; d];
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(received.len());
    for k in 0..d {
        scratch.clear();
        scratch.extend(received.iter().map(|(id, v)| (v[k], *id)));
        out[k] = screen_coordinate(own[k], &mut scratch, b);
    }
    Ok(out)
}

/// Per-coordinate kept sender sets, for diagnostics and tests.
pub fn screen_kept_sets(
    own: &[f64],
    received: &[(usize, Vec<f64>)],
    b: usize,
) -> Result<Vec<Vec<usize>>> {
    let d = own.len();
    let mut sets = Vec::with_capacity(d);
    for k in 0..d {
        let column: Vec<(usize, f64)> = received.iter().map(|(id, v)| (*id, v[k])).collect();
        let (_, kept) = trimmed_mean_coordinate(&ScreenInput {
            own: own[k],
            neighbors: &column,
            trim: b,
        })?;
        sets.push(kept);
    }
    Ok(sets)
}
