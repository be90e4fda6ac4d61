//! Non-crossing partitions of `{1, …, m}`.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest ground set `enumerate_nc` accepts.
pub const MAX_NC_SIZE: usize = 16;

/// A non-crossing partition of `{1, …, m}`, blocks sorted by minimum element
/// and each block sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NonCrossingPartition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl NonCrossingPartition {
    /// Validates and canonicalizes `blocks` (1-based elements).
    pub fn new(m: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("ground set must be non-empty".into()));
        }
        let mut seen = vec![false; m + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidInput("empty block".into()));
            }
            for &x in b {
                if x == 0 || x > m || seen[x] {
                    return Err(Error::InvalidInput(format!("element {x} out of range or repeated")));
                }
                seen[x] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidInput("blocks do not cover the ground set".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        let p = NonCrossingPartition { m, blocks };
        if let Some((a, b)) = p.find_crossing() {
            return Err(Error::InvalidInput(format!("blocks {a} and {b} cross")));
        }
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }

    /// First pair of crossing block indices, checked over all quadruples.
    pub fn find_crossing(&self) -> Option<(usize, usize)> {
        for (i, a) in self.blocks.iter().enumerate() {
            for (j, b) in self.blocks.iter().enumerate() {
                if i == j {
                    continue;
                }
                // p1 < q1 < p2 < q2 with p's in a, q's in b
                for &p1 in a {
                    for &q1 in b.iter().filter(|&&q| q > p1) {
                        for &p2 in a.iter().filter(|&&p| p > q1) {
                            if b.iter().any(|&q2| q2 > p2) {
                                return Some((i, j));
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// Streams every non-crossing partition of `{1, …, m}` as a block label per
/// element (labels in order of first appearance).
///
/// Element `i` either opens a new block or joins an open block; joining a
/// block closes every block opened after it, which is exactly what rules out
/// crossings. Each partition is produced once.
pub fn for_each_nc_labels<F: FnMut(&[usize])>(m: usize, mut visit: F) -> Result<()> {
    check_size(m)?;
    let mut labels = vec![0usize; m];
    fn recurse<F: FnMut(&[usize])>(
        i: usize,
        next_label: usize,
        labels: &mut Vec<usize>,
        stack: [u8; MAX_NC_SIZE],
        depth: usize,
        visit: &mut F,
    ) {
        if i == labels.len() {
            visit(labels);
            return;
        }
        // open a new block
        labels[i] = next_label;
        let mut opened = stack;
        opened[depth] = next_label as u8;
        recurse(i + 1, next_label + 1, labels, opened, depth + 1, visit);
        // join the open block at depth d, closing everything above it
        for d in (0..depth).rev() {
            labels[i] = stack[d] as usize;
            recurse(i + 1, next_label, labels, stack, d + 1, visit);
        }
    }
    recurse(0, 0, &mut labels, [0; MAX_NC_SIZE], 0, &mut visit);
    Ok(())
}

fn check_size(m: usize) -> Result<()> {
    if m == 0 || m > MAX_NC_SIZE {
        return Err(Error::capacity(
            "non-crossing partition ground set",
            m as u128,
            MAX_NC_SIZE as u128,
        ));
    }
    Ok(())
}

fn labels_to_blocks(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |&l| l + 1);
    let mut blocks = vec![Vec::new(); count];
    for (i, &l) in labels.iter().enumerate() {
        blocks[l].push(i + 1);
    }
    blocks
}

/// All of NC(m), in a deterministic order.
pub fn enumerate_nc(m: usize) -> Result<Vec<NonCrossingPartition>> {
    let mut out = Vec::new();
    for_each_nc_labels(m, |labels| {
        // labels are assigned in order of first element, so blocks are canonical already
        out.push(NonCrossingPartition {
            m,
            blocks: labels_to_blocks(labels),
        });
    })?;
    Ok(out)
}

/// Number of non-crossing partitions of `[2n]` into exactly `k` blocks, all
/// of even size.
pub fn count_even_block_nc(n: usize, k: usize) -> Result<u64> {
    if n == 0 || n > MAX_NC_SIZE / 2 {
        return Err(Error::capacity("even-block count order", n as u128, (MAX_NC_SIZE / 2) as u128));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("block count {k} outside [1, {n}]")));
    }
    let table = block_type_table(2 * n)?;
    Ok(table
        .iter()
        .filter(|(sizes, _)| sizes.len() == k && sizes.iter().all(|s| s % 2 == 0))
        .map(|(_, count)| *count)
        .sum())
}

/// Sorted multiset of block sizes → number of partitions in NC(m) of that type.
pub type BlockTypeTable = BTreeMap<Vec<usize>, u64>;

/// Block-type counts of NC(m), computed once per `m` by streaming the
/// enumeration and cached for the life of the process.
pub fn block_type_table(m: usize) -> Result<std::sync::Arc<BlockTypeTable>> {
    check_size(m)?;
    static CACHE: OnceLock<Mutex<BTreeMap<usize, std::sync::Arc<BlockTypeTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&m) {
        return Ok(t.clone());
    }
    let mut table = BlockTypeTable::new();
    let mut sizes = vec![0usize; m];
    for_each_nc_labels(m, |labels| {
        let blocks = labels.iter().max().map_or(0, |&l| l + 1);
        sizes[..blocks].iter_mut().for_each(|s| *s = 0);
        for &l in labels {
            sizes[l] += 1;
        }
        let mut key = sizes[..blocks].to_vec();
        key.sort_unstable();
        *table.entry(key).or_insert(0) += 1;
    })?;
    let table = std::sync::Arc::new(table);
    cache.lock().unwrap().insert(m, table.clone());
    Ok(table)
}
