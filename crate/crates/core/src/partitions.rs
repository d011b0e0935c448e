//! Set partitions of `[k] = {1, ..., k}`.
//!
//! Every linear equivariant basis element is indexed by a partition of
//! `[l + m]`, and every component of the partition norm by a partition of
//! `[k]`. Partitions are stored in canonical form: blocks ordered by their
//! minimum element, elements ascending inside a block. With that ordering the
//! block index of each element is a restricted-growth string, which is also
//! how [`enumerate_partitions`] generates them.
//!
//! Elements are 1-based in the public API and in the `{{1,2},{3}}` notation.

use std::fmt;
use std::str::FromStr;

use crate::error::{bail, Error, Result};

/// Largest ground set accepted by [`enumerate_partitions`] and [`bell`].
pub const MAX_K: usize = 8;

const BELL: [u64; MAX_K + 1] = [1, 1, 2, 5, 15, 52, 203, 877, 4140];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    // labels[e] = block index of element e + 1; a restricted-growth string
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from arbitrary blocks, validating and canonicalising.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let k: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; k];
        for block in &blocks {
            if block.is_empty() {
                bail!(Argument, "partition contains an empty block");
            }
            for &e in block {
                if e == 0 || e > k {
                    bail!(Argument, "element {e} outside 1..={k}");
                }
                if std::mem::replace(&mut seen[e - 1], true) {
                    bail!(Argument, "element {e} appears in more than one block");
                }
            }
        }
        let mut labels = vec![usize::MAX; k];
        let mut sorted: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        sorted.sort_by_key(|b| b[0]);
        for (idx, b) in sorted.iter().enumerate() {
            for &e in b {
                labels[e - 1] = idx;
            }
        }
        Ok(Self { labels, blocks: sorted })
    }

    /// Builds a partition from a restricted-growth string (0-based block labels).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut next = 0usize;
        for &l in labels {
            if l > next {
                bail!(Argument, "labels {labels:?} are not a restricted-growth string");
            }
            if l == next {
                next += 1;
            }
        }
        let mut blocks = vec![Vec::new(); next];
        for (e, &l) in labels.iter().enumerate() {
            blocks[l].push(e + 1);
        }
        Ok(Self { labels: labels.to_vec(), blocks })
    }

    /// The unique partition of the empty set.
    pub fn empty() -> Self {
        Self { labels: Vec::new(), blocks: Vec::new() }
    }

    /// `{{1}, {2}, ..., {k}}`.
    pub fn singletons(k: usize) -> Self {
        Self::from_labels(&(0..k).collect::<Vec<_>>()).expect("identity labels")
    }

    /// `{{1, ..., k}}` (empty partition for `k = 0`).
    pub fn whole(k: usize) -> Self {
        Self::from_labels(&vec![0; k]).expect("constant labels")
    }

    /// Size of the ground set.
    pub fn k(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks, written `|γ|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block labels of the elements, indexed 0-based by element.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Index of the block holding 1-based element `e`.
    pub fn block_of(&self, e: usize) -> usize {
        self.labels[e - 1]
    }

    /// Strict equivalence-pattern membership: equal values inside each block
    /// and distinct values across blocks.
    pub fn is_member(&self, index: &[usize]) -> Result<bool> {
        self.check_len(index)?;
        Ok(self.matches_strict(index))
    }

    /// Weak membership: equal values inside each block, no constraint across blocks.
    pub fn is_member_weak(&self, index: &[usize]) -> Result<bool> {
        self.check_len(index)?;
        Ok(self.matches_weak(index))
    }

    fn check_len(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.k() {
            bail!(Argument, "index tuple has length {}, partition covers [{}]", index.len(), self.k());
        }
        Ok(())
    }

    pub(crate) fn matches_weak(&self, index: &[usize]) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&e| index[e - 1] == index[b[0] - 1]))
    }

    pub(crate) fn matches_strict(&self, index: &[usize]) -> bool {
        if !self.matches_weak(index) {
            return false;
        }
        for (i, bi) in self.blocks.iter().enumerate() {
            for bj in &self.blocks[i + 1..] {
                if index[bi[0] - 1] == index[bj[0] - 1] {
                    return false;
                }
            }
        }
        true
    }

    /// Restriction to the elements `lo..=hi` (1-based), renumbered from 1.
    /// Blocks that miss the range are dropped.
    pub fn restrict(&self, lo: usize, hi: usize) -> Partition {
        let blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().filter(|&&e| e >= lo && e <= hi).map(|&e| e - lo + 1).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        Partition::new(blocks).expect("restriction of a valid partition")
    }
}

/// All partitions of `[k]` in lexicographic restricted-growth order.
///
/// `1 ≤ k ≤ 8`. The first partition is always `{{1, ..., k}}` and the last
/// `{{1}, ..., {k}}`.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > MAX_K {
        bail!(Bounds, "enumerate_partitions needs 1 <= k <= {MAX_K}, got {k}");
    }
    Ok(partitions_of(k))
}

/// Like [`enumerate_partitions`] but also accepts `k = 0`, which has the
/// single empty partition. Used for invariant (order 0) outputs.
pub(crate) fn partitions_of(k: usize) -> Vec<Partition> {
    assert!(k <= MAX_K, "partitions_of({k}) exceeds the cap");
    if k == 0 {
        return vec![Partition::empty()];
    }
    let mut out = Vec::with_capacity(BELL[k] as usize);
    let mut labels = vec![0usize; k];
    // maxes[i] = max(labels[..i]), with labels[0] fixed at 0
    loop {
        out.push(Partition::from_labels(&labels).expect("generated labels are restricted growth"));
        // advance to the next restricted-growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= prefix_max {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell number: the number of partitions of `[k]`, `1 ≤ k ≤ 8`.
pub fn bell(k: usize) -> Result<u64> {
    if k == 0 || k > MAX_K {
        bail!(Bounds, "bell needs 1 <= k <= {MAX_K}, got {k}");
    }
    Ok(BELL[k])
}

/// Free-function form of [`Partition::is_member`].
pub fn is_member(index: &[usize], gamma: &Partition) -> Result<bool> {
    gamma.is_member(index)
}

/// `gamma` is finer than `beta` when they differ and every block of `beta`
/// lies inside some block of `gamma`.
///
/// This is the reverse of the usual refinement order: here the "finer"
/// partition has the larger blocks, e.g. `{{1,2,3}}` is finer than
/// `{{1,2},{3}}`.
pub fn is_finer(gamma: &Partition, beta: &Partition) -> Result<bool> {
    if gamma.k() != beta.k() {
        bail!(Argument, "ground sets differ: [{}] vs [{}]", gamma.k(), beta.k());
    }
    Ok(gamma != beta && merges(gamma, beta))
}

/// True when every block of `coarse` is a union of blocks of `fine` in the
/// usual sense, i.e. `coarse` is obtained by merging blocks of `fine`.
/// Reflexive.
pub(crate) fn merges(merged: &Partition, base: &Partition) -> bool {
    base.blocks()
        .iter()
        .all(|b| b.iter().all(|&e| merged.block_of(e) == merged.block_of(b[0])))
}

/// Möbius function of the partition lattice between `base` and a partition
/// `merged` obtained by merging its blocks: the product over blocks of
/// `merged` of `(-1)^(c-1) (c-1)!`, `c` the number of `base` blocks inside.
pub(crate) fn mobius(base: &Partition, merged: &Partition) -> i64 {
    debug_assert!(merges(merged, base));
    let mut counts = vec![0i64; merged.len()];
    for b in base.blocks() {
        counts[merged.block_of(b[0])] += 1;
    }
    counts
        .into_iter()
        .map(|c| {
            let fact: i64 = (1..c).product();
            if c % 2 == 0 { -fact } else { fact }
        })
        .product()
}

/// Blocks of a partition of `[l + m]` sorted by which side they touch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IoDecomposition {
    pub l: usize,
    pub m: usize,
    /// Blocks made only of input axes `1..=l`.
    pub s1: Vec<Vec<usize>>,
    /// Blocks holding both input and output axes.
    pub s2: Vec<Vec<usize>>,
    /// Blocks made only of output axes `l+1..=l+m`.
    pub s3: Vec<Vec<usize>>,
}

impl IoDecomposition {
    /// Selection axes: every block cut down to the input axes.
    pub fn selection(&self) -> Vec<Vec<usize>> {
        let l = self.l;
        let mut out: Vec<Vec<usize>> = self
            .s1
            .iter()
            .cloned()
            .chain(self.s2.iter().map(|b| b.iter().copied().filter(|&e| e <= l).collect()))
            .collect();
        out.sort_by_key(|b| b[0]);
        out
    }

    /// Reduction axes, averaged away.
    pub fn reduction(&self) -> &[Vec<usize>] {
        &self.s1
    }

    /// Alignment axes: the output side of each mixed block.
    pub fn alignment(&self) -> Vec<Vec<usize>> {
        let l = self.l;
        self.s2.iter().map(|b| b.iter().copied().filter(|&e| e > l).collect()).collect()
    }

    /// Replication axes.
    pub fn replication(&self) -> &[Vec<usize>] {
        &self.s3
    }
}

/// Splits `gamma` (a partition of `[l + m]`) into input-only, mixed and
/// output-only blocks.
pub fn split_io(gamma: &Partition, l: usize, m: usize) -> Result<IoDecomposition> {
    if gamma.k() != l + m {
        bail!(Argument, "partition covers [{}], expected [{}]", gamma.k(), l + m);
    }
    let mut dec = IoDecomposition { l, m, s1: Vec::new(), s2: Vec::new(), s3: Vec::new() };
    for b in gamma.blocks() {
        let has_in = b.iter().any(|&e| e <= l);
        let has_out = b.iter().any(|&e| e > l);
        match (has_in, has_out) {
            (true, false) => dec.s1.push(b.clone()),
            (true, true) => dec.s2.push(b.clone()),
            _ => dec.s3.push(b.clone()),
        }
    }
    Ok(dec)
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, e) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("partition must be wrapped in braces: {s:?}")))?;
        if inner.is_empty() {
            return Ok(Partition::empty());
        }
        let mut blocks = Vec::new();
        let mut rest = inner;
        loop {
            let body = rest
                .strip_prefix('{')
                .ok_or_else(|| Error::Parse(format!("expected '{{' in {s:?}")))?;
            let close = body.find('}').ok_or_else(|| Error::Parse(format!("unclosed block in {s:?}")))?;
            let block = body[..close]
                .split(',')
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("bad element {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
            rest = &body[close + 1..];
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(',')
                .ok_or_else(|| Error::Parse(format!("expected ',' between blocks in {s:?}")))?;
        }
        Partition::new(blocks).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn three_element_partitions() {
        let got = enumerate_partitions(3).unwrap();
        assert_eq!(got.len(), 5);
        for want in ["{{1,2},{3}}", "{{1},{2,3}}", "{{1,3},{2}}", "{{1},{2},{3}}", "{{1,2,3}}"] {
            assert!(got.contains(&p(want)), "missing {want}");
        }
        assert_eq!(got[0], Partition::whole(3));
        assert_eq!(got[4], Partition::singletons(3));
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_partitions(1).unwrap(), vec![p("{{1}}")]);
        assert_eq!(enumerate_partitions(5).unwrap().len(), 52);
        assert_eq!(bell(1).unwrap(), 1);
        assert_eq!(bell(2).unwrap(), 2);
        assert_eq!(bell(4).unwrap(), 15);
        assert_eq!(enumerate_partitions(8).unwrap().len(), 4140);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(enumerate_partitions(0), Err(Error::Bounds(_))));
        assert!(matches!(enumerate_partitions(9), Err(Error::Bounds(_))));
        assert!(matches!(bell(9), Err(Error::Bounds(_))));
    }

    #[test]
    fn membership() {
        let g = p("{{1,2},{3}}");
        assert!(g.is_member(&[4, 4, 7]).unwrap());
        assert!(!g.is_member(&[1, 2, 3]).unwrap());
        // weak membership would accept this, strict does not
        assert!(!g.is_member(&[4, 4, 4]).unwrap());
        assert!(g.is_member_weak(&[4, 4, 4]).unwrap());
        assert!(p("{{1,2,3}}").is_member(&[2, 2, 2]).unwrap());
        assert!(matches!(g.is_member(&[1, 1]), Err(Error::Argument(_))));
    }

    #[test]
    fn finer_follows_the_reversed_order() {
        assert!(is_finer(&p("{{1,2,3}}"), &p("{{1,2},{3}}")).unwrap());
        assert!(!is_finer(&p("{{1,2},{3}}"), &p("{{1,3},{2}}")).unwrap());
        assert!(!is_finer(&p("{{1,2},{3}}"), &p("{{1,2},{3}}")).unwrap());
        assert!(is_finer(&p("{{1}}"), &p("{{1},{2}}")).is_err());
    }

    #[test]
    fn io_split() {
        let d = split_io(&p("{{1,2},{3,6},{4},{5}}"), 3, 3).unwrap();
        assert_eq!(d.s1, vec![vec![1, 2]]);
        assert_eq!(d.s2, vec![vec![3, 6]]);
        assert_eq!(d.s3, vec![vec![4], vec![5]]);
        assert_eq!(d.selection(), vec![vec![1, 2], vec![3]]);
        assert_eq!(d.alignment(), vec![vec![6]]);

        let d = split_io(&p("{{1},{2}}"), 1, 1).unwrap();
        assert_eq!((d.s1, d.s2, d.s3), (vec![vec![1]], vec![], vec![vec![2]]));

        let d = split_io(&p("{{1,4},{2},{3}}"), 2, 2).unwrap();
        assert_eq!((d.s1, d.s2, d.s3), (vec![vec![2]], vec![vec![1, 4]], vec![vec![3]]));
    }

    #[test]
    fn notation_round_trip() {
        for k in 1..=5 {
            for g in enumerate_partitions(k).unwrap() {
                assert_eq!(g.to_string().parse::<Partition>().unwrap(), g);
            }
        }
        assert_eq!(p("{ {3}, {2,1} }").to_string(), "{{1,2},{3}}");
        assert_eq!(p("{}"), Partition::empty());
        assert!("{{1,1}}".parse::<Partition>().is_err());
        assert!("{{1},{3}}".parse::<Partition>().is_err());
        assert!("{1,2}".parse::<Partition>().is_err());
    }

    #[test]
    fn mobius_values() {
        let base = Partition::singletons(3);
        assert_eq!(mobius(&base, &base), 1);
        assert_eq!(mobius(&base, &p("{{1,2},{3}}")), -1);
        assert_eq!(mobius(&base, &p("{{1,2,3}}")), 2);
        assert_eq!(mobius(&Partition::singletons(4), &p("{{1,2},{3,4}}")), 1);
    }
}
