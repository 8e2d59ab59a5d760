//! The test corpus: every labeled poset on a few elements, and every map
//! between two of them.

use std::sync::Arc;

use crate::bits::ElemSet;
use crate::finspace::{FinSpace, PointMap};

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// All partial orders on `n` labeled elements named `a, b, …`.
pub fn labeled_posets(n: usize) -> Vec<FinSpace> {
    assert!((1..=NAMES.len()).contains(&n), "corpus sizes are 1..=6");
    let names = &NAMES[..n];
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let lt = |i: usize, j: usize| {
            i != j
                && pairs
                    .iter()
                    .position(|&p| p == (i, j))
                    .is_some_and(|k| mask >> k & 1 == 1)
        };
        let antisymmetric = pairs.iter().all(|&(i, j)| !(lt(i, j) && lt(j, i)));
        let transitive =
            (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(lt(i, j) && lt(j, k)) || lt(i, k))));
        if antisymmetric && transitive {
            out.push(FinSpace::from_le(names, lt).expect("strict order"));
        }
    }
    out
}

/// Labeled posets of every size `1..=max_size`, smallest first.
pub fn spaces(max_size: usize) -> Vec<Arc<FinSpace>> {
    (1..=max_size)
        .flat_map(labeled_posets)
        .map(Arc::new)
        .collect()
}

/// Every total function `x → y`, in lexicographic order of assignments.
pub fn all_maps(x: &Arc<FinSpace>, y: &Arc<FinSpace>) -> Vec<PointMap> {
    let (n, m) = (x.len(), y.len());
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut a = vec![0; n];
            for slot in a.iter_mut().rev() {
                *slot = k % m;
                k /= m;
            }
            PointMap::new(x.clone(), y.clone(), a).expect("valid assignment")
        })
        .collect()
}

/// Monotone functions only.
pub fn continuous_maps(x: &Arc<FinSpace>, y: &Arc<FinSpace>) -> Vec<PointMap> {
    all_maps(x, y)
        .into_iter()
        .filter(PointMap::is_continuous)
        .collect()
}

/// Ordered pairs of corpus spaces.
pub fn space_pairs(max_x: usize, max_y: usize) -> Vec<(Arc<FinSpace>, Arc<FinSpace>)> {
    let xs = spaces(max_x);
    let ys = spaces(max_y);
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// Calls `visit` on every monotone `x → l` whose value at `p` lies in
/// `allowed[p]`.
pub fn for_each_monotone(
    x: &FinSpace,
    l: &FinSpace,
    allowed: &[ElemSet],
    mut visit: impl FnMut(&[usize]),
) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by_key(|&p| x.down(p).len());
    let mut cur = vec![usize::MAX; x.len()];
    fn rec(
        x: &FinSpace,
        l: &FinSpace,
        allowed: &[ElemSet],
        order: &[usize],
        k: usize,
        cur: &mut [usize],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let Some(&p) = order.get(k) else {
            visit(cur);
            return;
        };
        let mut cands = allowed[p];
        for w in x.down(p).iter().filter(|&w| w != p) {
            cands = cands.intersection(&l.up(cur[w]));
        }
        for v in cands.iter() {
            cur[p] = v;
            rec(x, l, allowed, order, k + 1, cur, visit);
        }
        cur[p] = usize::MAX;
    }
    rec(x, l, allowed, &order, 0, &mut cur, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequence() {
        let counts: Vec<usize> = (1..=4).map(|n| labeled_posets(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 19, 219]);
    }

    #[test]
    fn map_counts() {
        let s = Arc::new(FinSpace::sierpinski());
        assert_eq!(all_maps(&s, &s).len(), 4);
        assert_eq!(continuous_maps(&s, &s).len(), 3);
        let mut n = 0;
        for_each_monotone(&s, &s, &[s.all(), s.all()], |_| n += 1);
        assert_eq!(n, 3);
    }
}
