//! Neighbor-constrained bottom-up segmentation tree.
//!
//! Starting from one leaf per frame, the two temporally adjacent nodes
//! with the smallest Euclidean distance between their model vectors are
//! merged until a single root covers the whole sequence. A node's model is
//! the mean of its member frames. Unlike classical hierarchical clustering
//! only neighboring nodes may unite, so every cut of the tree is a
//! contiguous partition of the timeline.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::features::{euclidean_distance, FeatureSequence};

/// One merge step: `left` and `right` are the joined node ids, `parent`
/// the id of the node they form. The position in [`MergeTree::merges`] is
/// the merge rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub parent: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    model: Vec<f64>,
}

/// Binary dendrogram over frames. Leaves are node ids `0..K` in temporal
/// order; merge `r` creates node id `K + r`.
#[derive(Debug, Clone)]
pub struct MergeTree {
    n_frames: usize,
    nodes: Vec<Node>,
    merges: Vec<Merge>,
}

impl MergeTree {
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Member-frame range `[start, end)` of a node.
    pub fn node_range(&self, id: usize) -> (usize, usize) {
        let n = &self.nodes[id];
        (n.start, n.end)
    }

    /// Model vector (mean of member frames) of a node.
    pub fn node_model(&self, id: usize) -> &[f64] {
        &self.nodes[id].model
    }
}

/// Candidate adjacent pair in the priority queue, ordered ascending by
/// `(distance, left node start)`. Entries go stale when either node is
/// merged away; staleness is detected on pop.
struct PairEntry {
    distance: f64,
    left_start: usize,
    left: usize,
    right: usize,
}

impl PartialEq for PairEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for PairEntry {}
impl PartialOrd for PairEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PairEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest key.
        other
            .distance
            .total_cmp(&self.distance)
            .then(other.left_start.cmp(&self.left_start))
    }
}

/// Build the merge tree of a sequence by iteratively uniting the adjacent
/// node pair with minimal model distance, ties broken toward the smaller
/// left start index. A single-frame sequence yields a lone leaf and no
/// merges.
pub fn build_tree(features: &FeatureSequence) -> MergeTree {
    let k = features.n_frames();
    let mut nodes: Vec<Node> = (0..k)
        .map(|i| Node {
            start: i,
            end: i + 1,
            model: features.row(i).to_vec(),
        })
        .collect();
    let mut merges = Vec::with_capacity(k.saturating_sub(1));

    // Doubly linked list over live nodes, by node id.
    const NONE: usize = usize::MAX;
    let mut prev = vec![NONE; 2 * k];
    let mut next = vec![NONE; 2 * k];
    let mut alive = vec![false; 2 * k];
    for i in 0..k {
        alive[i] = true;
        if i > 0 {
            prev[i] = i - 1;
        }
        if i + 1 < k {
            next[i] = i + 1;
        }
    }

    let mut heap = BinaryHeap::with_capacity(2 * k);
    let push_pair = |heap: &mut BinaryHeap<PairEntry>, nodes: &[Node], l: usize, r: usize| {
        heap.push(PairEntry {
            distance: euclidean_distance(&nodes[l].model, &nodes[r].model),
            left_start: nodes[l].start,
            left: l,
            right: r,
        });
    };
    for i in 0..k.saturating_sub(1) {
        push_pair(&mut heap, &nodes, i, i + 1);
    }

    for _ in 0..k.saturating_sub(1) {
        let entry = loop {
            let e = heap.pop().expect("a valid adjacent pair always remains");
            if alive[e.left] && alive[e.right] && next[e.left] == e.right {
                break e;
            }
        };
        let (l, r) = (entry.left, entry.right);
        let parent = nodes.len();

        // Weighted mean of the children equals the mean over all member
        // frames.
        let cl = (nodes[l].end - nodes[l].start) as f64;
        let cr = (nodes[r].end - nodes[r].start) as f64;
        let model: Vec<f64> = nodes[l]
            .model
            .iter()
            .zip(nodes[r].model.iter())
            .map(|(a, b)| (cl * a + cr * b) / (cl + cr))
            .collect();
        nodes.push(Node {
            start: nodes[l].start,
            end: nodes[r].end,
            model,
        });

        alive[l] = false;
        alive[r] = false;
        alive[parent] = true;
        prev[parent] = prev[l];
        next[parent] = next[r];
        if prev[parent] != NONE {
            next[prev[parent]] = parent;
            push_pair(&mut heap, &nodes, prev[parent], parent);
        }
        if next[parent] != NONE {
            prev[next[parent]] = parent;
            push_pair(&mut heap, &nodes, parent, next[parent]);
        }

        merges.push(Merge {
            left: l,
            right: r,
            parent,
            distance: entry.distance,
        });
    }

    MergeTree {
        n_frames: k,
        nodes,
        merges,
    }
}

/// A contiguous partition of `[0, K)`: a strictly increasing list of
/// interior boundary indices, each marking the first frame of a new
/// segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    boundaries: Vec<usize>,
    n_frames: usize,
}

impl Segmentation {
    pub fn new(boundaries: Vec<usize>, n_frames: usize) -> Result<Self> {
        for (i, &b) in boundaries.iter().enumerate() {
            if b == 0 || b >= n_frames {
                return Err(Error::InvalidBoundary {
                    boundary: b,
                    len: n_frames,
                });
            }
            if i > 0 && boundaries[i - 1] >= b {
                return Err(Error::InvalidParameter(format!(
                    "boundaries must be strictly increasing, got {} then {}",
                    boundaries[i - 1],
                    b
                )));
            }
        }
        Ok(Segmentation {
            boundaries,
            n_frames,
        })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_segments(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Segment ranges `[start, end)` in temporal order.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_segments());
        let mut start = 0;
        for &b in &self.boundaries {
            out.push((start, b));
            start = b;
        }
        out.push((start, self.n_frames));
        out
    }

    /// Index of the segment containing frame `k`.
    pub fn segment_of(&self, k: usize) -> usize {
        self.boundaries.partition_point(|&b| b <= k)
    }
}

/// Cut the tree into `n_segments` parts by undoing the last
/// `n_segments - 1` merges and reading off the boundaries between the
/// surviving nodes.
pub fn cut_tree(tree: &MergeTree, n_segments: usize) -> Result<Segmentation> {
    let k = tree.n_frames();
    if n_segments < 1 || n_segments > k {
        return Err(Error::SegmentCountOutOfRange {
            got: n_segments,
            max: k,
        });
    }
    // Replay the first K - n merges; whatever is never consumed afterwards
    // is a segment.
    let keep = k - n_segments;
    let mut alive = vec![false; tree.nodes.len()];
    alive[..k].fill(true);
    for merge in &tree.merges[..keep] {
        alive[merge.left] = false;
        alive[merge.right] = false;
        alive[merge.parent] = true;
    }
    let mut boundaries: Vec<usize> = alive
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(id, _)| tree.nodes[id].start)
        .filter(|&s| s > 0)
        .collect();
    boundaries.sort_unstable();
    Segmentation::new(boundaries, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_1d(values: &[f64]) -> FeatureSequence {
        FeatureSequence::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    /// Naive O(K^2) replay: rescan every adjacent pair at each step,
    /// recompute models as the mean over raw member frames. Serves as the
    /// independent oracle for the heap-based builder.
    pub(crate) fn oracle_merge_ranges(
        features: &FeatureSequence,
    ) -> Vec<(usize, usize, usize, usize, f64)> {
        #[derive(Clone)]
        struct N {
            start: usize,
            end: usize,
        }
        let k = features.n_frames();
        let p = features.n_features();
        let model = |n: &N| -> Vec<f64> {
            let mut m = vec![0.0; p];
            for i in n.start..n.end {
                for j in 0..p {
                    m[j] += features.get(i, j);
                }
            }
            let c = (n.end - n.start) as f64;
            m.iter().map(|v| v / c).collect()
        };
        let mut nodes: Vec<N> = (0..k).map(|i| N { start: i, end: i + 1 }).collect();
        let mut out = Vec::new();
        while nodes.len() > 1 {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..nodes.len() - 1 {
                let d = euclidean_distance(&model(&nodes[i]), &model(&nodes[i + 1]));
                let better = match best {
                    None => true,
                    Some((bd, bi)) => {
                        d < bd || (d == bd && nodes[i].start < nodes[bi].start)
                    }
                };
                if better {
                    best = Some((d, i));
                }
            }
            let (d, i) = best.unwrap();
            out.push((
                nodes[i].start,
                nodes[i].end,
                nodes[i + 1].start,
                nodes[i + 1].end,
                d,
            ));
            nodes[i].end = nodes[i + 1].end;
            nodes.remove(i + 1);
        }
        out
    }

    fn assert_matches_oracle(features: &FeatureSequence) {
        let tree = build_tree(features);
        let oracle = oracle_merge_ranges(features);
        assert_eq!(tree.merges().len(), oracle.len());
        for (m, o) in tree.merges().iter().zip(oracle.iter()) {
            let (ls, le) = tree.node_range(m.left);
            let (rs, re) = tree.node_range(m.right);
            assert_eq!((ls, le, rs, re), (o.0, o.1, o.2, o.3));
            assert!((m.distance - o.4).abs() <= 1e-9 * (1.0 + o.4.abs()));
        }
    }

    #[test]
    fn hand_example_merge_order() {
        // Two near pairs far apart: (0,1) first (distance 0.5, an exact
        // f64 tie with (2,3), broken leftward), then (2,3), then the two
        // pairs at distance |0.25 - 5.25| = 5.
        let tree = build_tree(&seq_1d(&[0.0, 0.5, 5.0, 5.5]));
        let m = tree.merges();
        assert_eq!(m.len(), 3);
        assert_eq!((m[0].left, m[0].right), (0, 1));
        assert_eq!(m[0].distance, 0.5);
        assert_eq!((m[1].left, m[1].right), (2, 3));
        assert_eq!(m[1].distance, 0.5);
        assert_eq!((m[2].left, m[2].right), (4, 5));
        assert_eq!(m[2].distance, 5.0);
        assert_matches_oracle(&seq_1d(&[0.0, 0.5, 5.0, 5.5]));
        // With 0.1 offsets the pair distances differ by one ulp, so the
        // right pair merges first; greedy and oracle must still agree.
        assert_matches_oracle(&seq_1d(&[0.0, 0.1, 5.0, 5.1]));
    }

    #[test]
    fn single_frame_tree_has_no_merges() {
        let tree = build_tree(&seq_1d(&[3.0]));
        assert_eq!(tree.n_frames(), 1);
        assert!(tree.merges().is_empty());
        let cut = cut_tree(&tree, 1).unwrap();
        assert!(cut.boundaries().is_empty());
    }

    #[test]
    fn root_model_is_global_mean() {
        let s = FeatureSequence::from_rows(vec![
            vec![1.0, 2.0],
            vec![3.0, -1.0],
            vec![0.5, 0.5],
            vec![2.5, 4.0],
            vec![-1.0, 1.5],
        ])
        .unwrap();
        let tree = build_tree(&s);
        let root = tree.merges().last().unwrap().parent;
        assert_eq!(tree.node_range(root), (0, 5));
        for j in 0..2 {
            let mean: f64 = (0..5).map(|i| s.get(i, j)).sum::<f64>() / 5.0;
            assert!((tree.node_model(root)[j] - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn every_merge_joins_contiguous_ranges() {
        let s = seq_1d(&[0.0, 2.0, 2.1, -1.0, 5.0, 5.2, 5.1, 0.3]);
        let tree = build_tree(&s);
        for m in tree.merges() {
            let (_, le) = tree.node_range(m.left);
            let (rs, _) = tree.node_range(m.right);
            assert_eq!(le, rs);
        }
    }

    #[test]
    fn every_node_model_is_the_mean_of_its_frames() {
        let mut rng = crate::pipeline::rng::Rng64::new(23);
        let rows: Vec<Vec<f64>> = (0..17).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let s = FeatureSequence::from_rows(rows).unwrap();
        let tree = build_tree(&s);
        for m in tree.merges() {
            let (start, end) = tree.node_range(m.parent);
            for j in 0..2 {
                let mean: f64 =
                    (start..end).map(|i| s.get(i, j)).sum::<f64>() / (end - start) as f64;
                assert!((tree.node_model(m.parent)[j] - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn matches_rescan_oracle_on_seeded_sequences() {
        let mut rng = crate::pipeline::rng::Rng64::new(7);
        for case in 0..30 {
            let k = 2 + (rng.next_u64() % 29) as usize;
            let p = 1 + (rng.next_u64() % 4) as usize;
            let rows: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..p).map(|_| rng.normal()).collect())
                .collect();
            let s = FeatureSequence::from_rows(rows).unwrap();
            assert_matches_oracle(&s);
            let _ = case;
        }
    }

    #[test]
    fn duplicated_frames_tie_cases_match_oracle() {
        // Exact duplicates force equal linkage distances.
        assert_matches_oracle(&seq_1d(&[1.0, 1.0, 1.0, 1.0, 1.0]));
        assert_matches_oracle(&seq_1d(&[2.0, 2.0, 7.0, 7.0, 2.0, 2.0]));
        assert_matches_oracle(&seq_1d(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]));
        let mut rng = crate::pipeline::rng::Rng64::new(11);
        for _ in 0..20 {
            let k = 4 + (rng.next_u64() % 12) as usize;
            // Values drawn from a tiny alphabet so duplicates abound.
            let rows: Vec<Vec<f64>> = (0..k)
                .map(|_| vec![(rng.next_u64() % 3) as f64])
                .collect();
            assert_matches_oracle(&FeatureSequence::from_rows(rows).unwrap());
        }
    }

    #[test]
    fn determinism_identical_input_identical_merges() {
        let s = seq_1d(&[0.4, 0.4, 1.0, 0.4, 1.0, 1.0, 0.4]);
        let a = build_tree(&s);
        let b = build_tree(&s);
        assert_eq!(a.merges(), b.merges());
    }

    #[test]
    fn cut_tree_hand_example() {
        let tree = build_tree(&seq_1d(&[0.0, 0.5, 5.0, 5.5]));
        assert_eq!(cut_tree(&tree, 2).unwrap().boundaries(), &[2]);
        assert_eq!(cut_tree(&tree, 1).unwrap().boundaries(), &[] as &[usize]);
        assert_eq!(cut_tree(&tree, 4).unwrap().boundaries(), &[1, 2, 3]);
    }

    #[test]
    fn cut_tree_rejects_out_of_range() {
        let tree = build_tree(&seq_1d(&[0.0, 1.0, 2.0]));
        assert!(cut_tree(&tree, 0).is_err());
        assert!(cut_tree(&tree, 4).is_err());
    }

    #[test]
    fn cuts_are_nested() {
        let mut rng = crate::pipeline::rng::Rng64::new(19);
        let rows: Vec<Vec<f64>> = (0..25).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let s = FeatureSequence::from_rows(rows).unwrap();
        let tree = build_tree(&s);
        for n in 2..=25 {
            let coarse = cut_tree(&tree, n - 1).unwrap();
            let fine = cut_tree(&tree, n).unwrap();
            assert_eq!(fine.boundaries().len(), n - 1);
            for b in coarse.boundaries() {
                assert!(fine.boundaries().contains(b), "cut {n} lost boundary {b}");
            }
        }
    }

    #[test]
    fn segmentation_accessors() {
        let seg = Segmentation::new(vec![3, 7], 10).unwrap();
        assert_eq!(seg.n_segments(), 3);
        assert_eq!(seg.segments(), vec![(0, 3), (3, 7), (7, 10)]);
        assert_eq!(seg.segment_of(0), 0);
        assert_eq!(seg.segment_of(3), 1);
        assert_eq!(seg.segment_of(9), 2);
        assert!(Segmentation::new(vec![0], 5).is_err());
        assert!(Segmentation::new(vec![5], 5).is_err());
        assert!(Segmentation::new(vec![3, 3], 5).is_err());
        assert!(Segmentation::new(vec![4, 2], 5).is_err());
    }
}
