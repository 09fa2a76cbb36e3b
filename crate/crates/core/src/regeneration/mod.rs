//! Regeneration blocks: exact (visits to a known atom) and approximate
//! (Nummelin splitting with an estimated transition density).

mod density;
mod order;
mod small_set;
mod split;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chain_models::ChainPath;
use crate::error::{invalid, Error, Result};

pub use density::{estimate_transition_density, Bandwidth, PairDensities, TransitionDensity, TransitionDensityEstimate};
pub use order::{estimate_order, OrderContext, OrderEstimate, OrderStep};
pub use small_set::{
    default_candidates, default_grid, evaluate_small_set, select_small_set, select_small_set_with, symmetric_candidates, Phi, SelectionOptions, SmallSetBox,
    SmallSetSpec,
};
pub use split::{split, split_with, SplitOutcome};

/// A 1-based inclusive index range `[start, end]`; empty when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The same range as 0-based positions into a [`ChainPath`].
    pub fn positions(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

/// Regeneration times `τ(1) < ... < τ(l+1)` of a path of length `n` and the
/// blocks they induce: `B_0 = [1, τ(1)]`, `B_j = [τ(j)+1, τ(j+1)]` for
/// `1 <= j <= l`, and the tail `B_{l+1} = [τ(l+1)+1, n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    n: usize,
    regeneration_times: Vec<usize>,
}

impl BlockPartition {
    pub fn from_times(n: usize, regeneration_times: Vec<usize>) -> Result<Self> {
        if regeneration_times.is_empty() {
            return Err(Error::NoRegeneration { visits: 0, regenerations: 0 });
        }
        if regeneration_times.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("regeneration times must be strictly increasing");
        }
        if regeneration_times[0] < 1 || *regeneration_times.last().unwrap() > n {
            return invalid(format!("regeneration times must lie in [1, {n}]"));
        }
        Ok(Self { n, regeneration_times })
    }

    pub fn path_len(&self) -> usize {
        self.n
    }

    pub fn regeneration_times(&self) -> &[usize] {
        &self.regeneration_times
    }

    /// Number of complete blocks `l`.
    pub fn complete_count(&self) -> usize {
        self.regeneration_times.len() - 1
    }

    pub fn first_block(&self) -> Block {
        Block { start: 1, end: self.regeneration_times[0] }
    }

    pub fn last_block(&self) -> Block {
        Block { start: self.regeneration_times.last().unwrap() + 1, end: self.n }
    }

    pub fn complete_blocks(&self) -> impl ExactSizeIterator<Item = Block> + '_ {
        self.regeneration_times.windows(2).map(|w| Block { start: w[0] + 1, end: w[1] })
    }

    /// All `l + 2` blocks in order, including the dropped first and last ones.
    pub fn all_blocks(&self) -> Vec<Block> {
        let mut out = Vec::with_capacity(self.complete_count() + 2);
        out.push(self.first_block());
        out.extend(self.complete_blocks());
        out.push(self.last_block());
        out
    }

    /// `τ(l+1) - τ(1)`, the number of observations in complete blocks.
    pub fn complete_length(&self) -> usize {
        self.regeneration_times.last().unwrap() - self.regeneration_times[0]
    }

    /// CSV with columns `block,start,end,length`; row 0 is `B_0` and the
    /// final row the (possibly empty) tail.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["block", "start", "end", "length"])?;
        for (j, b) in self.all_blocks().iter().enumerate() {
            w.write_record([j.to_string(), b.start.to_string(), b.end.to_string(), b.len().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows: Vec<(usize, usize)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |k: usize| -> Result<usize> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Validation(format!("bad block row {:?}", rec)))
            };
            rows.push((field(1)?, field(2)?));
        }
        if rows.len() < 2 {
            return invalid("block file needs at least the first and the last block");
        }
        let n = rows.last().unwrap().1;
        let times = rows[..rows.len() - 1].iter().map(|&(_, end)| end).collect();
        let p = Self::from_times(n, times)?;
        for (b, &(start, end)) in p.all_blocks().iter().zip(&rows) {
            if b.start != start || b.end != end {
                return invalid("block rows do not tile the path");
            }
        }
        Ok(p)
    }
}

/// Exact regeneration blocks at the visits of `atom` (every `i` with
/// `atom(X_i)`).
pub fn atomic_blocks(path: &ChainPath, atom: impl Fn(&[f64]) -> bool) -> Result<BlockPartition> {
    if path.is_empty() {
        return invalid("path is empty");
    }
    let times: Vec<usize> = path.states().enumerate().filter(|(_, s)| atom(s)).map(|(i, _)| i + 1).collect();
    if times.is_empty() {
        return Err(Error::NoRegeneration { visits: 0, regenerations: 0 });
    }
    BlockPartition::from_times(path.len(), times)
}
