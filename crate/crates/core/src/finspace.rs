//! Finite T0 spaces presented as posets under the specialisation order.
//!
//! Opens are the up-sets, continuity is monotonicity, and an element of the
//! double powerspace O²(Y) is an up-closed family of opens, stored by its
//! minimal antichain.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::bits::{ElemSet, MAX_ELEMENTS};
use crate::config::Caps;
use crate::error::{CapKind, Error, Result};

/// A finite poset. Element `i` is below element `j` when every open containing
/// `i` contains `j`.
#[derive(Clone, PartialEq, Eq)]
pub struct FinSpace {
    names: Vec<String>,
    up: Vec<ElemSet>,
    down: Vec<ElemSet>,
}

impl fmt::Debug for FinSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<_> = self
            .strict_pairs()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.names[a], self.names[b]))
            .collect();
        write!(f, "FinSpace{:?}{:?}", self.names, pairs)
    }
}

impl FinSpace {
    /// Reflexive-transitive closure of `le_pairs` over `names`.
    pub fn from_order<S: AsRef<str>>(names: &[S], le_pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if n > MAX_ELEMENTS {
            return Err(Error::cap(CapKind::Elements, n, MAX_ELEMENTS));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        let mut up: Vec<ElemSet> = (0..n).map(ElemSet::singleton).collect();
        for &(a, b) in le_pairs {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::InvalidIndex { index: idx, len: n });
                }
            }
            up[a].insert(b);
        }
        for k in 0..n {
            let uk = up[k];
            for u in up.iter_mut() {
                if u.contains(k) {
                    *u = u.union(&uk);
                }
            }
        }
        for i in 0..n {
            for j in up[i].iter() {
                if j != i && up[j].contains(i) {
                    return Err(Error::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        let mut down = vec![ElemSet::EMPTY; n];
        for (i, u) in up.iter().enumerate() {
            for j in u.iter() {
                down[j].insert(i);
            }
        }
        Ok(FinSpace { names, up, down })
    }

    /// Builds a space from a full order predicate; the predicate is closed
    /// reflexively and transitively like [`FinSpace::from_order`].
    pub fn from_le<S: AsRef<str>>(names: &[S], le: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = names.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && le(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        Self::from_order(names, &pairs)
    }

    pub fn discrete<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::from_order(names, &[])
    }

    /// A chain `names[0] < names[1] < ...`.
    pub fn chain<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let pairs: Vec<_> = (1..names.len()).map(|i| (i - 1, i)).collect();
        Self::from_order(names, &pairs)
    }

    pub fn point() -> Self {
        Self::discrete(&["pt"]).expect("one-point space")
    }

    /// Sierpinski space: `bot < top`, with `{top}` open.
    pub fn sierpinski() -> Self {
        Self::chain(&["bot", "top"]).expect("two-chain")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    #[inline]
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    /// `↑a`, the smallest open containing `a`.
    #[inline]
    pub fn up(&self, a: usize) -> ElemSet {
        self.up[a]
    }

    #[inline]
    pub fn down(&self, a: usize) -> ElemSet {
        self.down[a]
    }

    pub fn all(&self) -> ElemSet {
        ElemSet::full(self.len())
    }

    pub fn up_closure(&self, set: &ElemSet) -> ElemSet {
        set.iter()
            .fold(ElemSet::EMPTY, |acc, i| acc.union(&self.up[i]))
    }

    pub fn down_closure(&self, set: &ElemSet) -> ElemSet {
        set.iter()
            .fold(ElemSet::EMPTY, |acc, i| acc.union(&self.down[i]))
    }

    pub fn is_up_set(&self, set: &ElemSet) -> bool {
        set.iter().all(|i| self.up[i].is_subset(set))
    }

    pub fn is_down_set(&self, set: &ElemSet) -> bool {
        set.iter().all(|i| self.down[i].is_subset(set))
    }

    /// Largest up-set contained in `set`.
    pub fn interior_set(&self, set: &ElemSet) -> ElemSet {
        set.iter().filter(|&i| self.up[i].is_subset(set)).collect()
    }

    /// Smallest down-set containing `set`, computed as the complement of the
    /// interior of the complement.
    pub fn closure_set(&self, set: &ElemSet) -> ElemSet {
        let n = self.len();
        self.interior_set(&set.complement(n)).complement(n)
    }

    pub fn minimal(&self, set: &ElemSet) -> ElemSet {
        set.iter()
            .filter(|&i| self.down[i].intersection(set) == ElemSet::singleton(i))
            .collect()
    }

    pub fn maximal(&self, set: &ElemSet) -> ElemSet {
        set.iter()
            .filter(|&i| self.up[i].intersection(set) == ElemSet::singleton(i))
            .collect()
    }

    /// All pairs `(a, b)` with `a < b`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.up[a].iter() {
                if a != b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_discrete(&self) -> bool {
        (0..self.len()).all(|i| self.up[i] == ElemSet::singleton(i))
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.down[i] == self.all())
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.up[i] == self.all())
    }

    /// Names of the members of `set`, sorted.
    pub fn sorted_names(&self, set: &ElemSet) -> Vec<&str> {
        let mut v: Vec<&str> = set.iter().map(|i| self.names[i].as_str()).collect();
        v.sort_unstable();
        v
    }

    /// `{a,b}` rendering with members sorted by name.
    pub fn render_set(&self, set: &ElemSet) -> String {
        format!("{{{}}}", self.sorted_names(set).join(","))
    }

    /// Report ordering key: cardinality, then sorted member names.
    pub fn canonical_key<'a>(&'a self, set: &ElemSet) -> (usize, Vec<&'a str>) {
        (set.len(), self.sorted_names(set))
    }

    /// Cartesian product with the componentwise order; element `(a, b)` has
    /// index `a * other.len() + b`.
    pub fn product(&self, other: &FinSpace) -> Result<FinSpace> {
        let m = other.len();
        let names: Vec<String> = (0..self.len() * m)
            .map(|k| format!("({},{})", self.names[k / m], other.names[k % m]))
            .collect();
        FinSpace::from_le(&names, |p, q| {
            self.le(p / m, q / m) && other.le(p % m, q % m)
        })
    }

    /// The same poset with the order reversed.
    pub fn dual(&self) -> FinSpace {
        FinSpace::from_le(&self.names, |a, b| self.le(b, a)).expect("dual of a poset")
    }

    /// Returns the induced subposet on `set`, with element `k` of the result
    /// corresponding to the `k`-th member of `set` in increasing index order.
    pub fn subspace(&self, set: &ElemSet) -> Result<FinSpace> {
        let members: Vec<usize> = set.iter().collect();
        let names: Vec<&str> = members.iter().map(|&i| self.name(i)).collect();
        FinSpace::from_le(&names, |a, b| self.le(members[a], members[b]))
    }
}

/// An up-closed subset of a space.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OpenSet(ElemSet);

impl OpenSet {
    pub fn new(space: &FinSpace, members: ElemSet) -> Result<Self> {
        if !members.is_subset(&space.all()) || !space.is_up_set(&members) {
            return Err(Error::NotUpSet(format!("{members:?}")));
        }
        Ok(OpenSet(members))
    }

    pub fn empty() -> Self {
        OpenSet(ElemSet::EMPTY)
    }

    pub fn whole(space: &FinSpace) -> Self {
        OpenSet(space.all())
    }

    pub fn members(&self) -> ElemSet {
        self.0
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(x)
    }

    pub fn is_subset(&self, other: &OpenSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &OpenSet) -> OpenSet {
        OpenSet(self.0.union(&other.0))
    }

    pub fn intersection(&self, other: &OpenSet) -> OpenSet {
        OpenSet(self.0.intersection(&other.0))
    }
}

/// All up-sets of `space`, in the canonical report order (cardinality, then
/// sorted member names), presented also as a poset under inclusion.
#[derive(Clone, Debug)]
pub struct OpensLattice {
    base: Arc<FinSpace>,
    opens: Vec<OpenSet>,
    index: HashMap<ElemSet, usize>,
    order: Arc<FinSpace>,
}

impl OpensLattice {
    pub fn base(&self) -> &Arc<FinSpace> {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn get(&self, i: usize) -> OpenSet {
        self.opens[i]
    }

    pub fn opens(&self) -> &[OpenSet] {
        &self.opens
    }

    pub fn index_of(&self, open: &OpenSet) -> Option<usize> {
        self.index.get(&open.members()).copied()
    }

    pub fn index_of_set(&self, set: &ElemSet) -> Option<usize> {
        self.index.get(set).copied()
    }

    /// O(X) as a space in its own right; element `i` is `self.get(i)`.
    pub fn as_space(&self) -> &Arc<FinSpace> {
        &self.order
    }

    pub fn empty_index(&self) -> usize {
        self.index[&ElemSet::EMPTY]
    }

    pub fn whole_index(&self) -> usize {
        self.index[&self.base.all()]
    }

    pub fn name(&self, i: usize) -> String {
        self.base.render_set(&self.opens[i].members())
    }
}

/// Enumerates the up-sets of `space` (unordered).
pub(crate) fn enumerate_up_sets(space: &FinSpace) -> Vec<ElemSet> {
    // Maximal elements first: a linear extension of the reversed order.
    let n = space.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| space.up(i).len());
    let mut out = Vec::new();
    fn rec(space: &FinSpace, order: &[usize], k: usize, cur: ElemSet, out: &mut Vec<ElemSet>) {
        if k == order.len() {
            out.push(cur);
            return;
        }
        let x = order[k];
        rec(space, order, k + 1, cur, out);
        let mut strict_up = space.up(x);
        strict_up.remove(x);
        if strict_up.is_subset(&cur) {
            rec(space, order, k + 1, cur.with(x), out);
        }
    }
    rec(space, &order, 0, ElemSet::EMPTY, &mut out);
    out
}

/// All opens of `space`.
pub fn opens(space: &Arc<FinSpace>, caps: &Caps) -> Result<OpensLattice> {
    if space.len() > caps.opens {
        return Err(Error::cap(CapKind::Opens, space.len(), caps.opens));
    }
    let mut sets = enumerate_up_sets(space);
    if sets.len() > MAX_ELEMENTS {
        return Err(Error::cap(CapKind::Elements, sets.len(), MAX_ELEMENTS));
    }
    sets.sort_by(|a, b| space.canonical_key(a).cmp(&space.canonical_key(b)));
    let index: HashMap<ElemSet, usize> = sets.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let names: Vec<String> = sets.iter().map(|s| space.render_set(s)).collect();
    let order = FinSpace::from_le(&names, |a, b| sets[a].is_subset(&sets[b]))?;
    Ok(OpensLattice {
        base: space.clone(),
        opens: sets.into_iter().map(OpenSet).collect(),
        index,
        order: Arc::new(order),
    })
}

/// Largest open contained in `set`.
pub fn interior(space: &FinSpace, set: &ElemSet) -> OpenSet {
    OpenSet(space.interior_set(set))
}

/// Smallest closed (down-) set containing `set`.
pub fn closure(space: &FinSpace, set: &ElemSet) -> ElemSet {
    space.closure_set(set)
}

/// An up-closed family of opens of some space, stored as its minimal antichain.
///
/// The antichain is kept sorted, so equal families compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UpFamily {
    gens: Vec<ElemSet>,
}

impl UpFamily {
    /// The empty family.
    pub fn empty() -> Self {
        UpFamily { gens: Vec::new() }
    }

    /// The family of all opens (generated by the empty open).
    pub fn full() -> Self {
        UpFamily {
            gens: vec![ElemSet::EMPTY],
        }
    }

    /// `{ V : U ⊆ V }`.
    pub fn principal(u: ElemSet) -> Self {
        UpFamily { gens: vec![u] }
    }

    /// Family generated by arbitrary sets; the result keeps the minimal ones.
    pub fn from_generators<I: IntoIterator<Item = ElemSet>>(gens: I) -> Self {
        let mut v: Vec<ElemSet> = gens.into_iter().collect();
        v.sort_by_key(|s| (s.len(), *s));
        v.dedup();
        let mut kept: Vec<ElemSet> = Vec::with_capacity(v.len());
        for s in v {
            if !kept.iter().any(|k| k.is_subset(&s)) {
                kept.push(s);
            }
        }
        kept.sort();
        UpFamily { gens: kept }
    }

    /// Validates that every generator is open in `space`.
    pub fn new(space: &FinSpace, gens: Vec<ElemSet>) -> Result<Self> {
        for g in &gens {
            OpenSet::new(space, *g)?;
        }
        Ok(Self::from_generators(gens))
    }

    pub fn generators(&self) -> &[ElemSet] {
        &self.gens
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// `V ∈ self`.
    pub fn contains(&self, v: &ElemSet) -> bool {
        self.gens.iter().any(|g| g.is_subset(v))
    }

    /// Family inclusion (the specialisation order of O²).
    pub fn le(&self, other: &UpFamily) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    pub fn join(&self, other: &UpFamily) -> UpFamily {
        UpFamily::from_generators(self.gens.iter().chain(other.gens.iter()).copied())
    }

    pub fn meet(&self, other: &UpFamily) -> UpFamily {
        let mut v = Vec::with_capacity(self.gens.len() * other.gens.len());
        for a in &self.gens {
            for b in &other.gens {
                v.push(a.union(b));
            }
        }
        UpFamily::from_generators(v)
    }

    /// Meet of an arbitrary collection; the empty meet is the full family.
    pub fn meet_all<'a, I: IntoIterator<Item = &'a UpFamily>>(iter: I) -> UpFamily {
        iter.into_iter()
            .fold(UpFamily::full(), |acc, f| acc.meet(f))
    }

    pub fn join_all<'a, I: IntoIterator<Item = &'a UpFamily>>(iter: I) -> UpFamily {
        UpFamily::from_generators(iter.into_iter().flat_map(|f| f.gens.iter().copied()))
    }

    /// Renders the antichain as `[{a},{b,c}]`.
    pub fn render(&self, space: &FinSpace) -> String {
        let mut gens: Vec<&ElemSet> = self.gens.iter().collect();
        gens.sort_by(|a, b| space.canonical_key(a).cmp(&space.canonical_key(b)));
        let parts: Vec<String> = gens.iter().map(|g| space.render_set(g)).collect();
        format!("[{}]", parts.join(","))
    }
}

/// A total function between the points of two spaces. Continuity is not
/// assumed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointMap {
    domain: Arc<FinSpace>,
    codomain: Arc<FinSpace>,
    assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(
        domain: Arc<FinSpace>,
        codomain: Arc<FinSpace>,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if assignment.len() != domain.len() {
            return Err(Error::Mismatch(format!(
                "assignment has {} entries, domain has {} elements",
                assignment.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&y| y >= codomain.len()) {
            return Err(Error::InvalidIndex {
                index: bad,
                len: codomain.len(),
            });
        }
        Ok(PointMap {
            domain,
            codomain,
            assignment,
        })
    }

    pub fn identity(space: Arc<FinSpace>) -> Self {
        let n = space.len();
        PointMap {
            domain: space.clone(),
            codomain: space,
            assignment: (0..n).collect(),
        }
    }

    pub fn constant(domain: Arc<FinSpace>, codomain: Arc<FinSpace>, c: usize) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, codomain, vec![c; n])
    }

    pub fn domain(&self) -> &Arc<FinSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FinSpace> {
        &self.codomain
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &PointMap) -> Result<PointMap> {
        if self.codomain != g.domain {
            return Err(Error::Mismatch(
                "codomain of f is not the domain of g".into(),
            ));
        }
        Ok(PointMap {
            domain: self.domain.clone(),
            codomain: g.codomain.clone(),
            assignment: self.assignment.iter().map(|&y| g.assignment[y]).collect(),
        })
    }

    pub fn preimage(&self, set: &ElemSet) -> ElemSet {
        (0..self.domain.len())
            .filter(|&x| set.contains(self.assignment[x]))
            .collect()
    }

    pub fn image(&self, set: &ElemSet) -> ElemSet {
        set.iter().map(|x| self.assignment[x]).collect()
    }

    /// Monotone with respect to the specialisation orders.
    pub fn is_continuous(&self) -> bool {
        self.first_discontinuity().is_none()
    }

    pub(crate) fn first_discontinuity(&self) -> Option<(usize, usize)> {
        for a in 0..self.domain.len() {
            for b in self.domain.up(a).iter() {
                if !self.codomain.le(self.assignment[a], self.assignment[b]) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Images of open sets are open. Every open is a union of principal
    /// up-sets, so it suffices to test those.
    pub fn is_open_map(&self) -> bool {
        (0..self.domain.len()).all(|x| self.codomain.is_up_set(&self.image(&self.domain.up(x))))
    }
}

/// Outcome of [`classify_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapClass {
    pub continuous: bool,
    pub open_map: bool,
}

pub fn classify_map(f: &PointMap) -> MapClass {
    MapClass {
        continuous: f.is_continuous(),
        open_map: f.is_open_map(),
    }
}

/// Neighbourhood filter of `x`: the family of opens containing `x`.
pub fn nu(space: &FinSpace, x: usize) -> UpFamily {
    UpFamily::principal(space.up(x))
}

/// `int(f⁻¹(V))`.
pub fn int_preimage(f: &PointMap, v: &OpenSet) -> OpenSet {
    interior(f.domain(), &f.preimage(&v.members()))
}

/// `f(U)` for an open map `f`.
pub fn pushforward(f: &PointMap, u: &OpenSet) -> Result<OpenSet> {
    if let Some(x) =
        (0..f.domain().len()).find(|&x| !f.codomain().is_up_set(&f.image(&f.domain().up(x))))
    {
        let d = f.domain();
        return Err(Error::NotOpenMap(d.render_set(&d.up(x))));
    }
    Ok(OpenSet(f.image(&u.members())))
}

/// `φ**(𝒰) = { W : φ⁻¹(W) ∈ 𝒰 }` for continuous `φ`.
///
/// `φ⁻¹(W) ⊇ A` iff `W ⊇ ↑φ(A)`, so the result is generated by the sets
/// `↑φ(A)` for `A` in the antichain of `𝒰`.
pub fn double_star(phi: &PointMap, family: &UpFamily) -> Result<UpFamily> {
    if let Some((a, b)) = phi.first_discontinuity() {
        let d = phi.domain();
        return Err(Error::NotContinuous(format!(
            "{} <= {} but images are not ordered",
            d.name(a),
            d.name(b)
        )));
    }
    let cod = phi.codomain();
    Ok(UpFamily::from_generators(
        family
            .generators()
            .iter()
            .map(|a| cod.up_closure(&phi.image(a))),
    ))
}

/// `O²(Y)` enumerated as a space, for small `Y`.
#[derive(Clone, Debug)]
pub struct O2Space {
    base: Arc<FinSpace>,
    opens: OpensLattice,
    space: Arc<FinSpace>,
    families: Vec<UpFamily>,
    index: HashMap<UpFamily, usize>,
}

impl O2Space {
    pub fn new(base: &Arc<FinSpace>, caps: &Caps) -> Result<Self> {
        let ol = opens(base, caps)?;
        let o2 = opens(ol.as_space(), caps)?;
        let families: Vec<UpFamily> = o2
            .opens()
            .iter()
            .map(|w| UpFamily::from_generators(w.members().iter().map(|i| ol.get(i).members())))
            .collect();
        let index = families
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        let names: Vec<String> = families.iter().map(|f| f.render(base)).collect();
        let space = FinSpace::from_le(&names, |a, b| families[a].le(&families[b]))?;
        Ok(O2Space {
            base: base.clone(),
            opens: ol,
            space: Arc::new(space),
            families,
            index,
        })
    }

    pub fn base(&self) -> &Arc<FinSpace> {
        &self.base
    }

    pub fn opens(&self) -> &OpensLattice {
        &self.opens
    }

    pub fn space(&self) -> &Arc<FinSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn family(&self, i: usize) -> &UpFamily {
        &self.families[i]
    }

    pub fn families(&self) -> &[UpFamily] {
        &self.families
    }

    pub fn index_of(&self, family: &UpFamily) -> Option<usize> {
        self.index.get(family).copied()
    }

    /// `ν_Y` as a point map `Y → O²(Y)`.
    pub fn nu_map(&self) -> PointMap {
        let assignment = (0..self.base.len())
            .map(|y| self.index[&nu(&self.base, y)])
            .collect();
        PointMap::new(self.base.clone(), self.space.clone(), assignment).expect("nu is total")
    }
}

/// An element of O⁴(Y) = O²(O²(Y)): an up-closed family of opens of O²(Y).
///
/// Each open of O²(Y) is an up-set of families and is stored by its minimal
/// families; the outer list is the minimal antichain of such opens. Nothing
/// here requires enumerating O²(Y).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct O4Family {
    opens: Vec<Vec<UpFamily>>,
}

impl O4Family {
    pub fn empty() -> Self {
        O4Family { opens: Vec::new() }
    }

    /// `ν_{O²(Y)}(𝒰)`: all opens of O²(Y) containing `𝒰`.
    pub fn unit(family: &UpFamily) -> Self {
        O4Family {
            opens: vec![vec![family.clone()]],
        }
    }

    /// Builds the family generated by the given opens of O²(Y), each given by
    /// any generating set of families.
    pub fn from_opens<I: IntoIterator<Item = Vec<UpFamily>>>(opens: I) -> Self {
        let mut normal: Vec<Vec<UpFamily>> = opens.into_iter().map(minimal_families).collect();
        normal.sort();
        normal.dedup();
        // `A ⊆ B` for up-sets given by minimal elements: every generator of A
        // lies above some generator of B.
        let subset =
            |a: &Vec<UpFamily>, b: &Vec<UpFamily>| a.iter().all(|m| b.iter().any(|n| n.le(m)));
        let kept: Vec<Vec<UpFamily>> = normal
            .iter()
            .filter(|a| !normal.iter().any(|b| b != *a && subset(b, a)))
            .cloned()
            .collect();
        O4Family { opens: kept }
    }

    pub fn opens(&self) -> &[Vec<UpFamily>] {
        &self.opens
    }
}

fn minimal_families(v: Vec<UpFamily>) -> Vec<UpFamily> {
    let mut out: Vec<UpFamily> = v
        .iter()
        .filter(|m| !v.iter().any(|n| n != *m && n.le(m)))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `G**(𝒰)` for a continuous `G: Y → O²(Z)` given by its values.
pub fn double_star_o2(values: &[UpFamily], family: &UpFamily) -> O4Family {
    O4Family::from_opens(
        family
            .generators()
            .iter()
            .map(|a| a.iter().map(|y| values[y].clone()).collect()),
    )
}

/// Multiplication `μ_Y : O⁴(Y) → O²(Y)`,
/// `μ(𝔘) = { V ∈ O(Y) : { 𝒰 : V ∈ 𝒰 } ∈ 𝔘 }`.
///
/// The open `{ 𝒰 : V ∈ 𝒰 }` contains a given open of O²(Y) exactly when it
/// contains that open's minimal families.
pub fn mu(base: &Arc<FinSpace>, big: &O4Family, caps: &Caps) -> Result<UpFamily> {
    if base.len() > caps.mu {
        return Err(Error::cap(CapKind::Mu, base.len(), caps.mu));
    }
    let ol = opens(base, caps)?;
    let members = ol.opens().iter().map(|v| v.members()).filter(|v| {
        big.opens()
            .iter()
            .any(|open| open.iter().all(|m| m.contains(v)))
    });
    Ok(UpFamily::from_generators(members))
}

/// The exponential `Y^Z`: monotone maps under the pointwise order.
#[derive(Clone, Debug)]
pub struct Exponential {
    pub space: Arc<FinSpace>,
    /// `maps[k][z]` is the value at `z` of the `k`-th map.
    pub maps: Vec<Vec<usize>>,
}

impl Exponential {
    pub fn index_of(&self, map: &[usize]) -> Option<usize> {
        self.maps.iter().position(|m| m == map)
    }
}

/// All monotone maps between two spaces (unsorted), bounded by `limit`.
pub(crate) fn monotone_maps(z: &FinSpace, y: &FinSpace, limit: usize) -> Result<Vec<Vec<usize>>> {
    let n = z.len();
    // A linear extension of Z, so every element is visited after those below it.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| z.down(i).len());
    let mut out = Vec::new();
    let mut cur = vec![usize::MAX; n];
    fn rec(
        z: &FinSpace,
        y: &FinSpace,
        order: &[usize],
        k: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> bool {
        if k == order.len() {
            out.push(cur.clone());
            return out.len() <= limit;
        }
        let x = order[k];
        // Lower bound: everything already assigned below x.
        let mut allowed = y.all();
        for w in z.down(x).iter() {
            if w != x && cur[w] != usize::MAX {
                allowed = allowed.intersection(&y.up(cur[w]));
            }
        }
        for v in allowed.iter() {
            cur[x] = v;
            if !rec(z, y, order, k + 1, cur, out, limit) {
                return false;
            }
        }
        cur[x] = usize::MAX;
        true
    }
    if !rec(z, y, &order, 0, &mut cur, &mut out, limit) {
        return Err(Error::cap(CapKind::Maps, out.len(), limit));
    }
    Ok(out)
}

pub fn exponential(z: &FinSpace, y: &FinSpace, caps: &Caps) -> Result<Exponential> {
    let mut maps = monotone_maps(z, y, caps.maps)?;
    maps.sort();
    if maps.len() > MAX_ELEMENTS {
        return Err(Error::cap(CapKind::Elements, maps.len(), MAX_ELEMENTS));
    }
    let names: Vec<String> = maps
        .iter()
        .map(|m| {
            let parts: Vec<String> = m
                .iter()
                .enumerate()
                .map(|(zi, &yi)| format!("{}->{}", z.name(zi), y.name(yi)))
                .collect();
            format!("[{}]", parts.join(","))
        })
        .collect();
    let space = FinSpace::from_le(&names, |a, b| {
        (0..z.len()).all(|k| y.le(maps[a][k], maps[b][k]))
    })?;
    Ok(Exponential {
        space: Arc::new(space),
        maps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(s: FinSpace) -> Arc<FinSpace> {
        Arc::new(s)
    }

    #[test]
    fn space_from_order_examples() {
        let p = FinSpace::from_order(&["p"], &[]).unwrap();
        assert_eq!(p.len(), 1);
        let s = FinSpace::from_order(&["bot", "top"], &[(0, 1)]).unwrap();
        assert!(s.le(0, 1) && !s.le(1, 0));
        assert_eq!(
            FinSpace::from_order(&["a", "b"], &[(0, 1), (1, 0)]),
            Err(Error::Cycle("a".into(), "b".into()))
        );
        assert_eq!(
            FinSpace::from_order(&["a", "a"], &[]),
            Err(Error::DuplicateName("a".into()))
        );
        assert!(matches!(
            FinSpace::from_order(&["a"], &[(0, 3)]),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn transitive_closure() {
        let c = FinSpace::from_order(&["a", "b", "c"], &[(0, 1), (1, 2)]).unwrap();
        assert!(c.le(0, 2));
    }

    #[test]
    fn opens_examples() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let o = opens(&s, &caps).unwrap();
        let sets: Vec<ElemSet> = o.opens().iter().map(|u| u.members()).collect();
        assert_eq!(sets, vec![ElemSet::EMPTY, ElemSet::singleton(1), s.all()]);
        let d2 = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        assert_eq!(opens(&d2, &caps).unwrap().len(), 4);
        let d3 = arc(FinSpace::discrete(&["a", "b", "c"]).unwrap());
        assert_eq!(opens(&d3, &caps).unwrap().len(), 8);
        let big =
            arc(FinSpace::discrete(&(0..17).map(|i| i.to_string()).collect::<Vec<_>>()).unwrap());
        assert!(matches!(opens(&big, &caps), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn interior_examples() {
        let s = FinSpace::sierpinski();
        assert_eq!(
            interior(&s, &ElemSet::singleton(0)).members(),
            ElemSet::EMPTY
        );
        assert_eq!(
            interior(&s, &ElemSet::singleton(1)).members(),
            ElemSet::singleton(1)
        );
        let c = FinSpace::chain(&["a", "b", "c"]).unwrap();
        let a_c: ElemSet = [0, 2].into_iter().collect();
        assert_eq!(interior(&c, &a_c).members(), ElemSet::singleton(2));
        assert_eq!(
            closure(&c, &ElemSet::singleton(1)),
            [0, 1].into_iter().collect()
        );
    }

    fn sigma_to_d2() -> PointMap {
        let s = arc(FinSpace::sierpinski());
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        PointMap::new(s, d, vec![0, 1]).unwrap()
    }

    fn d2_to_sigma() -> PointMap {
        let s = arc(FinSpace::sierpinski());
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        PointMap::new(d, s, vec![0, 1]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let id = PointMap::identity(arc(FinSpace::chain(&["a", "b", "c"]).unwrap()));
        assert_eq!(
            classify_map(&id),
            MapClass {
                continuous: true,
                open_map: true
            }
        );
        assert_eq!(
            classify_map(&sigma_to_d2()),
            MapClass {
                continuous: false,
                open_map: true
            }
        );
        assert_eq!(
            classify_map(&d2_to_sigma()),
            MapClass {
                continuous: true,
                open_map: false
            }
        );
    }

    #[test]
    fn nu_examples() {
        let s = FinSpace::sierpinski();
        assert_eq!(nu(&s, 1).generators(), &[ElemSet::singleton(1)]);
        assert_eq!(nu(&s, 0).generators(), &[s.all()]);
        let d = FinSpace::discrete(&["a", "b", "c"]).unwrap();
        for x in 0..3 {
            assert_eq!(nu(&d, x).generators(), &[ElemSet::singleton(x)]);
        }
    }

    #[test]
    fn int_preimage_examples() {
        let f = sigma_to_d2();
        let v0 = OpenSet::new(f.codomain(), ElemSet::singleton(0)).unwrap();
        let v1 = OpenSet::new(f.codomain(), ElemSet::singleton(1)).unwrap();
        assert_eq!(int_preimage(&f, &v0).members(), ElemSet::EMPTY);
        assert_eq!(int_preimage(&f, &v1).members(), ElemSet::singleton(1));
    }

    #[test]
    fn pushforward_examples() {
        let c = arc(FinSpace::chain(&["a", "b", "c"]).unwrap());
        let id = PointMap::identity(c.clone());
        let u = OpenSet::new(&c, [1, 2].into_iter().collect()).unwrap();
        assert_eq!(pushforward(&id, &u).unwrap(), u);
        let k = PointMap::constant(c.clone(), c.clone(), 2).unwrap();
        assert_eq!(
            pushforward(&k, &u).unwrap().members(),
            ElemSet::singleton(2)
        );
        let g = d2_to_sigma();
        let u0 = OpenSet::new(g.domain(), ElemSet::singleton(0)).unwrap();
        assert!(matches!(pushforward(&g, &u0), Err(Error::NotOpenMap(_))));
    }

    #[test]
    fn double_star_examples() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let id = PointMap::identity(s.clone());
        let fam = UpFamily::principal(ElemSet::singleton(1));
        assert_eq!(double_star(&id, &fam).unwrap(), fam);
        // Constant top, full family: every W with top ∈ W... and the empty open too,
        // since the full family contains ∅ and φ⁻¹(∅) = ∅.
        let k = PointMap::constant(s.clone(), s.clone(), 1).unwrap();
        let full = UpFamily::full();
        let got = double_star(&k, &full).unwrap();
        let ol = opens(&s, &caps).unwrap();
        let expected = UpFamily::from_generators(
            ol.opens()
                .iter()
                .map(|w| w.members())
                .filter(|w| full.contains(&k.preimage(w))),
        );
        assert_eq!(got, expected);
        assert!(matches!(
            double_star(&sigma_to_d2(), &fam),
            Err(Error::NotContinuous(_))
        ));
    }

    #[test]
    fn mu_examples() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let fam = UpFamily::principal(ElemSet::singleton(1));
        assert_eq!(mu(&s, &O4Family::unit(&fam), &caps).unwrap(), fam);
        assert_eq!(
            mu(&s, &O4Family::empty(), &caps).unwrap(),
            UpFamily::empty()
        );
        let small = Caps { mu: 1, ..caps };
        assert!(matches!(
            mu(&s, &O4Family::empty(), &small),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn exponential_examples() {
        let caps = Caps::default();
        let s = FinSpace::sierpinski();
        let e = exponential(&s, &s, &caps).unwrap();
        assert_eq!(e.maps, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert!(e.space.le(0, 1) && e.space.le(1, 2));
        let c = FinSpace::chain(&["a", "b", "c"]).unwrap();
        let pt = FinSpace::point();
        assert_eq!(exponential(&pt, &c, &caps).unwrap().space.len(), 3);
        assert_eq!(exponential(&c, &pt, &caps).unwrap().space.len(), 1);
        let tiny = Caps { maps: 2, ..caps };
        assert!(matches!(
            exponential(&s, &s, &tiny),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn o2_space_of_sierpinski() {
        let s = arc(FinSpace::sierpinski());
        let o2 = O2Space::new(&s, &Caps::default()).unwrap();
        // Up-sets of the 3-chain: 4 of them.
        assert_eq!(o2.len(), 4);
        let nu_map = o2.nu_map();
        assert!(nu_map.is_continuous());
    }
}
