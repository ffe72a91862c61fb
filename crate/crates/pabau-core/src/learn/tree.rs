//! Decision stump and gain-ratio decision tree.

use alloc::vec::Vec;

use super::{degenerate_check, Model, TrainingMatrix, TreeNode};

/// Selects the single (feature, polarity) split minimizing misclassification,
/// ties broken by lowest feature id, then by `bit == set` polarity.
pub fn train_stump(matrix: &TrainingMatrix, indices: &[usize], targets: &[bool]) -> Model {
    let selected: Vec<bool> = indices.iter().map(|&i| targets[i]).collect();
    if let Some(constant) = degenerate_check(&selected) {
        return constant;
    }
    let n = indices.len() as f64;
    let mut best: Option<(f64, u32, bool)> = None; // (error, feature, polarity)
    for col in 0..matrix.width {
        let mut set_pos = 0.0;
        let mut set_total = 0.0;
        let mut pos_total = 0.0;
        for &row in indices {
            let y = targets[row];
            if y {
                pos_total += 1.0;
            }
            if matrix.bit(row, col) {
                set_total += 1.0;
                if y {
                    set_pos += 1.0;
                }
            }
        }
        let clear_pos = pos_total - set_pos;
        let clear_total = n - set_total;
        // polarity true: predict positive when the bit is set.
        let err_true = (set_total - set_pos) + clear_pos;
        // polarity false: predict positive when the bit is clear.
        let err_false = set_pos + (clear_total - clear_pos);
        for (err, polarity) in [(err_true, true), (err_false, false)] {
            let err = err / n;
            let better = match best {
                None => true,
                Some((best_err, _, _)) => err < best_err - 1e-12,
            };
            if better {
                best = Some((err, col as u32, polarity));
            }
        }
    }
    let (_, feature, _polarity) = best.expect("non-empty catalog");

    // Per-side score from training purity; the decision is score > 0.
    let side_score = |want_set: bool| -> f64 {
        let mut pos = 0.0;
        let mut total = 0.0;
        for &row in indices {
            if matrix.bit(row, feature as usize) == want_set {
                total += 1.0;
                if targets[row] {
                    pos += 1.0;
                }
            }
        }
        if total == 0.0 {
            // Empty side: fall back to the overall majority.
            let pos_all = indices.iter().filter(|&&r| targets[r]).count() as f64;
            2.0 * pos_all / n - 1.0
        } else {
            2.0 * pos / total - 1.0
        }
    };
    Model::Stump { feature, score_if_set: side_score(true), score_if_clear: side_score(false) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    pub max_depth: u32,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 8, min_leaf: 2 }
    }
}

fn entropy(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let mut h = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            h -= q * libm::log2(q);
        }
    }
    h
}

/// Gain ratio of splitting `indices` on `col`; `None` when a side would be
/// empty or smaller than `min_leaf`.
pub fn gain_ratio(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    col: usize,
    min_leaf: usize,
) -> Option<f64> {
    let n = indices.len() as f64;
    let mut set_total = 0.0;
    let mut set_pos = 0.0;
    let mut pos_total = 0.0;
    for &row in indices {
        if targets[row] {
            pos_total += 1.0;
        }
        if matrix.bit(row, col) {
            set_total += 1.0;
            if targets[row] {
                set_pos += 1.0;
            }
        }
    }
    let clear_total = n - set_total;
    if set_total < min_leaf as f64 || clear_total < min_leaf as f64 {
        return None;
    }
    let parent = entropy(pos_total, n);
    let children = (set_total / n) * entropy(set_pos, set_total)
        + (clear_total / n) * entropy(pos_total - set_pos, clear_total);
    let gain = parent - children;
    let split_info = entropy(set_total, n);
    if split_info <= 0.0 {
        return None;
    }
    Some(gain / split_info)
}

/// Recursive gain-ratio tree without post-pruning. Deterministic: ties break
/// to the lowest feature id.
pub fn train_tree(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    cfg: &TreeConfig,
) -> Model {
    let selected: Vec<bool> = indices.iter().map(|&i| targets[i]).collect();
    if let Some(constant) = degenerate_check(&selected) {
        return constant;
    }
    let mut nodes = Vec::new();
    build_node(matrix, indices, targets, cfg, 0, &mut nodes);
    Model::Tree { nodes }
}

fn leaf_score(indices: &[usize], targets: &[bool]) -> f64 {
    let pos = indices.iter().filter(|&&r| targets[r]).count() as f64;
    2.0 * pos / indices.len() as f64 - 1.0
}

fn build_node(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    cfg: &TreeConfig,
    depth: u32,
    nodes: &mut Vec<TreeNode>,
) -> u32 {
    let id = nodes.len() as u32;
    let pos = indices.iter().filter(|&&r| targets[r]).count();
    let pure = pos == 0 || pos == indices.len();
    if depth >= cfg.max_depth || pure {
        nodes.push(TreeNode::Leaf { score: leaf_score(indices, targets) });
        return id;
    }
    let mut best: Option<(f64, usize)> = None;
    for col in 0..matrix.width {
        if let Some(gr) = gain_ratio(matrix, indices, targets, col, cfg.min_leaf) {
            // Zero-gain splits are kept: they can still enable a separating
            // split below (e.g. XOR), and depth/min_leaf bound the blowup.
            let better = match best {
                None => true,
                Some((best_gr, _)) => gr > best_gr + 1e-12,
            };
            if better {
                best = Some((gr, col));
            }
        }
    }
    let Some((_, feature)) = best else {
        nodes.push(TreeNode::Leaf { score: leaf_score(indices, targets) });
        return id;
    };
    nodes.push(TreeNode::Leaf { score: 0.0 }); // placeholder, patched below
    let (set_rows, clear_rows): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&r| matrix.bit(r, feature));
    let if_clear = build_node(matrix, &clear_rows, targets, cfg, depth + 1, nodes);
    let if_set = build_node(matrix, &set_rows, targets, cfg, depth + 1, nodes);
    nodes[id as usize] = TreeNode::Split { feature: feature as u32, if_clear, if_set };
    id
}

#[cfg(test)]
mod tests {
    use super::super::tests::matrix;
    use super::*;

    #[test]
    fn stump_finds_perfect_separator() {
        // Bit 7 (last) perfectly separates; earlier bits are noise.
        let rows: [&[bool]; 4] = [
            &[true, false, false, false, false, false, false, true],
            &[false, true, false, false, false, false, false, true],
            &[true, false, false, false, false, false, false, false],
            &[false, false, true, false, false, false, false, false],
        ];
        let m = matrix(&rows);
        let targets = [true, true, false, false];
        let model = train_stump(&m, &[0, 1, 2, 3], &targets);
        let Model::Stump { feature, score_if_set, score_if_clear } = model else { panic!() };
        assert_eq!(feature, 7);
        assert!(score_if_set > 0.0);
        assert!(score_if_clear < 0.0);
    }

    #[test]
    fn stump_tie_breaks_to_lowest_feature_id() {
        // Features 3 and 9 are equally perfect separators.
        let rows: [&[bool]; 4] = [
            &[false, false, false, true, false, false, false, false, false, true],
            &[false, false, false, true, false, false, false, false, false, true],
            &[false, false, false, false, false, false, false, false, false, false],
            &[false, false, false, false, false, false, false, false, false, false],
        ];
        let m = matrix(&rows);
        let targets = [true, true, false, false];
        let Model::Stump { feature, .. } = train_stump(&m, &[0, 1, 2, 3], &targets) else {
            panic!()
        };
        assert_eq!(feature, 3);
    }

    #[test]
    fn tree_learns_xor_at_depth_two() {
        let rows: [&[bool]; 4] = [
            &[false, false],
            &[false, true],
            &[true, false],
            &[true, true],
        ];
        let m = matrix(&rows);
        let targets = [false, true, true, false];
        let cfg = TreeConfig { max_depth: 2, min_leaf: 1 };
        let model = train_tree(&m, &[0, 1, 2, 3], &targets, &cfg);
        for (i, v) in m.vectors.iter().enumerate() {
            assert_eq!(model.predict(v).0, targets[i], "row {i}");
        }
    }

    #[test]
    fn zero_depth_tree_is_majority_leaf() {
        let rows: [&[bool]; 3] = [&[true], &[true], &[false]];
        let m = matrix(&rows);
        let targets = [true, false, false];
        let cfg = TreeConfig { max_depth: 0, min_leaf: 1 };
        let model = train_tree(&m, &[0, 1, 2], &targets, &cfg);
        let Model::Tree { ref nodes } = model else { panic!() };
        assert_eq!(nodes.len(), 1);
        // Majority negative -> negative everywhere.
        assert!(!model.predict(&m.vectors[0]).0);
    }
}
