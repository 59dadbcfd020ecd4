use crate::dtree::{DecisionTree, Var};
use crate::tasks::Instance;

fn entropy(pos: usize, total: usize) -> f64 {
    if pos == 0 || pos == total {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Majority label of `idx`; ties go to the label of the latest example.
fn majority(history: &[Instance], idx: &[usize]) -> bool {
    let pos = idx.iter().filter(|&&i| history[i].label).count();
    match (2 * pos).cmp(&idx.len()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => idx.iter().max().map_or(false, |&i| history[i].label),
    }
}

/// Top-down information-gain tree over boolean features, retrained from
/// scratch on `history`. Splits stop at purity, zero gain or when every
/// feature is already on the path. An empty history yields the constant-false tree.
pub fn greedy_retrained_tree(history: &[Instance]) -> DecisionTree {
    if history.is_empty() {
        return DecisionTree::Leaf(false);
    }
    let n = history[0].features.len().min(Var::MAX as usize + 1);
    let idx: Vec<usize> = (0..history.len()).collect();
    let mut used = vec![false; n];
    grow(history, &idx, &mut used, majority(history, &idx))
}

fn grow(history: &[Instance], idx: &[usize], used: &mut [bool], fallback: bool) -> DecisionTree {
    if idx.is_empty() {
        return DecisionTree::Leaf(fallback);
    }
    let total = idx.len();
    let pos = idx.iter().filter(|&&i| history[i].label).count();
    let here = majority(history, idx);
    if pos == 0 || pos == total {
        return DecisionTree::Leaf(here);
    }
    let h = entropy(pos, total);
    let mut best: Option<(f64, usize)> = None;
    for f in 0..used.len() {
        if used[f] {
            continue;
        }
        let (mut on, mut on_pos) = (0, 0);
        for &i in idx {
            if history[i].features[f] {
                on += 1;
                on_pos += history[i].label as usize;
            }
        }
        let off = total - on;
        let gain = h
            - (on as f64 * entropy(on_pos, on) + off as f64 * entropy(pos - on_pos, off))
                / total as f64;
        if gain > 1e-12 && best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, f));
        }
    }
    let Some((_, f)) = best else {
        return DecisionTree::Leaf(here);
    };
    let (t_idx, f_idx): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| history[i].features[f]);
    used[f] = true;
    let t = grow(history, &t_idx, used, here);
    let e = grow(history, &f_idx, used, here);
    used[f] = false;
    DecisionTree::node(f as Var, t, e)
}
