//! Brute-force reference computations. Sets are `u64` bitmasks, and nothing
//! here calls the algorithms under test; spaces are only read through their
//! order relation.

#![allow(dead_code)]

use envlab::{ElemSet, FinSpace, Lattice, PointMap, UpFamily};

pub fn mask(set: &ElemSet) -> u64 {
    set.iter().fold(0, |m, i| m | 1 << i)
}

pub fn elems(m: u64) -> ElemSet {
    (0..64).filter(|i| m >> i & 1 == 1).collect()
}

/// Every subset of the space closed upwards in the order.
pub fn up_sets(s: &FinSpace) -> Vec<u64> {
    let n = s.len();
    (0..1u64 << n)
        .filter(|&m| {
            (0..n).all(|a| m >> a & 1 == 0 || (0..n).all(|b| !s.le(a, b) || m >> b & 1 == 1))
        })
        .collect()
}

fn preimage(f: &[usize], m: u64) -> u64 {
    f.iter()
        .enumerate()
        .filter(|(_, &y)| m >> y & 1 == 1)
        .fold(0, |acc, (x, _)| acc | 1 << x)
}

/// Largest up-set inside `m`.
pub fn interior(s: &FinSpace, m: u64) -> u64 {
    up_sets(s)
        .into_iter()
        .filter(|&u| u & !m == 0)
        .fold(0, |a, u| a | u)
}

/// O²(Y) by brute force: subsets of the opens of Y (as bitmasks over the
/// list `opens`) that are closed under enlarging the open.
pub struct O2Oracle {
    pub opens: Vec<u64>,
    pub families: Vec<u64>,
}

impl O2Oracle {
    pub fn new(y: &FinSpace) -> Self {
        let opens = up_sets(y);
        let k = opens.len();
        let families = (0..1u64 << k)
            .filter(|&fam| {
                (0..k).all(|i| {
                    fam >> i & 1 == 0
                        || (0..k).all(|j| opens[i] & !opens[j] != 0 || fam >> j & 1 == 1)
                })
            })
            .collect();
        O2Oracle { opens, families }
    }

    /// The opens containing `y`.
    pub fn nu(&self, y: usize) -> u64 {
        self.opens
            .iter()
            .enumerate()
            .filter(|(_, &o)| o >> y & 1 == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// A library family as a bitmask over `opens`.
    pub fn encode(&self, fam: &UpFamily) -> u64 {
        self.opens
            .iter()
            .enumerate()
            .filter(|(_, &o)| fam.contains(&elems(o)))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }
}

/// Visits every assignment `x ↦ cands[x][k]`.
pub fn for_each_choice<T: Copy>(cands: &[Vec<T>], mut visit: impl FnMut(&[T])) {
    fn rec<T: Copy>(cands: &[Vec<T>], cur: &mut Vec<T>, visit: &mut dyn FnMut(&[T])) {
        if cur.len() == cands.len() {
            visit(cur);
            return;
        }
        for &c in &cands[cur.len()] {
            cur.push(c);
            rec(cands, cur, visit);
            cur.pop();
        }
    }
    rec(cands, &mut Vec::new(), &mut visit);
}

/// The pointwise greatest element of `all`, if there is one.
pub fn greatest<T: Clone>(all: &[Vec<T>], le: impl Fn(&T, &T) -> bool) -> Option<Vec<T>> {
    let below = |h: &[T], g: &[T]| h.iter().zip(g).all(|(a, b)| le(a, b));
    // A greatest element replaces any running candidate and is never replaced.
    let mut cand = all.first()?;
    for h in all {
        if below(cand, h) {
            cand = h;
        }
    }
    all.iter().all(|h| below(h, cand)).then(|| cand.clone())
}

/// The greatest monotone `G: X → O²(Y)` with `G(x) ⊆ ν(f(x))`, found by
/// listing every candidate.
pub fn greatest_o2_below(f: &PointMap, o2: &O2Oracle) -> Option<Vec<u64>> {
    let x = f.domain();
    let cands: Vec<Vec<u64>> = (0..x.len())
        .map(|p| {
            let bound = o2.nu(f.apply(p));
            o2.families
                .iter()
                .copied()
                .filter(|&g| g & !bound == 0)
                .collect()
        })
        .collect();
    let mut valid = Vec::new();
    for_each_choice(&cands, |g| {
        let monotone = (0..x.len()).all(|a| (0..x.len()).all(|b| !x.le(a, b) || g[a] & !g[b] == 0));
        if monotone {
            valid.push(g.to_vec());
        }
    });
    greatest(&valid, |a, b| a & !b == 0)
}

/// Pairs `(U, V)` of opens with `U ⊆ f⁻¹(V)`.
pub fn relation_pairs(f: &PointMap) -> Vec<(u64, u64)> {
    let xs = up_sets(f.domain());
    let ys = up_sets(f.codomain());
    let fa = f.assignment();
    ys.iter()
        .flat_map(|&v| {
            let pre = preimage(fa, v);
            xs.iter()
                .filter(move |&&u| u & !pre == 0)
                .map(move |&u| (u, v))
        })
        .collect()
}

type PairLe = dyn Fn(&(u64, u64), &(u64, u64)) -> bool;

/// The greatest monotone self-map of the pair lattice that keeps `V`, found
/// by listing every candidate.
pub fn greatest_fibred_selfmap(pairs: &[(u64, u64)]) -> Option<Vec<(u64, u64)>> {
    let le = |a: &(u64, u64), b: &(u64, u64)| a.0 & !b.0 == 0 && a.1 & !b.1 == 0;
    let n = pairs.len();
    let cands: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&b| pairs[b].1 == pairs[a].1).collect())
        .collect();
    let mut valid: Vec<Vec<(u64, u64)>> = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(
        pairs: &[(u64, u64)],
        cands: &[Vec<usize>],
        cur: &mut Vec<usize>,
        valid: &mut Vec<Vec<(u64, u64)>>,
        le: &PairLe,
    ) {
        let k = cur.len();
        if k == pairs.len() {
            valid.push(cur.iter().map(|&i| pairs[i]).collect());
            return;
        }
        for &c in &cands[k] {
            let ok = (0..k).all(|j| {
                (!le(&pairs[j], &pairs[k]) || le(&pairs[cur[j]], &pairs[c]))
                    && (!le(&pairs[k], &pairs[j]) || le(&pairs[c], &pairs[cur[j]]))
            });
            if ok {
                cur.push(c);
                rec(pairs, cands, cur, valid, le);
                cur.pop();
            }
        }
    }
    rec(pairs, &cands, &mut cur, &mut valid, &le);
    greatest(&valid, le)
}

/// `(int f⁻¹(V), V)`.
pub fn interior_pair(f: &PointMap, v: u64) -> (u64, u64) {
    (interior(f.domain(), preimage(f.assignment(), v)), v)
}

/// Every function between index sets of the given sizes.
pub fn all_functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    let cands: Vec<Vec<usize>> = vec![(0..m).collect(); n];
    let mut out = Vec::new();
    for_each_choice(&cands, |f| out.push(f.to_vec()));
    out
}

pub fn monotone(dom: &FinSpace, cod: &FinSpace, f: &[usize]) -> bool {
    (0..dom.len()).all(|a| (0..dom.len()).all(|b| !dom.le(a, b) || cod.le(f[a], f[b])))
}

/// Greatest monotone `Φ: L → M` with `Φ(ξ_L(y)) ≤ ξ_M(y)`.
pub fn right_extension_oracle(
    m: &Lattice,
    monotone_lm: &[Vec<usize>],
    xi_l: &[usize],
    xi_m: &[usize],
) -> Option<Vec<usize>> {
    let valid: Vec<Vec<usize>> = monotone_lm
        .iter()
        .filter(|phi| xi_l.iter().zip(xi_m).all(|(&a, &b)| m.le(phi[a], b)))
        .cloned()
        .collect();
    greatest(&valid, |&a, &b| m.le(a, b))
}

/// Greatest monotone `lift: A → C` with `ρ ∘ lift = φ`.
pub fn lift_oracle(a: &FinSpace, c: &Lattice, rho: &[usize], phi: &[usize]) -> Option<Vec<usize>> {
    let valid: Vec<Vec<usize>> = all_functions(a.len(), c.len())
        .into_iter()
        .filter(|l| monotone(a, c.space(), l) && (0..a.len()).all(|p| rho[l[p]] == phi[p]))
        .collect();
    greatest(&valid, |&x, &y| c.le(x, y))
}
