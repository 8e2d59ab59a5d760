//! Advice bundles and co-envelopes.
//!
//! An advice bundle is a lattice `A` with a projection `π: A → O(Y)` that
//! preserves finite meets and joins and has a continuous section. The least
//! one for `f` is carved out of the relation lattice `L_f` of pairs `(U, V)`
//! with `U ⊆ f⁻¹(V)`.

use std::sync::Arc;

use crate::bits::ElemSet;
use crate::config::Caps;
use crate::envelope::{ApproxSpace, Envelope};
use crate::error::{Error, Result};
use crate::finspace::{opens, FinSpace, OpensLattice, PointMap};
use crate::lattice::Lattice;

/// The pair lattice `L_f`, ordered componentwise.
#[derive(Clone, Debug)]
pub struct RelationLattice {
    pub x_opens: OpensLattice,
    pub y_opens: OpensLattice,
    /// `(U, V)` as indices into `x_opens` and `y_opens`.
    pub pairs: Vec<(usize, usize)>,
    pub lattice: Lattice,
}

impl RelationLattice {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index_of(&self, u: usize, v: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (u, v))
    }

    /// The fibre label `π_Y(a)` of every element.
    pub fn fibres(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, v)| v).collect()
    }
}

pub fn relation_lattice(f: &PointMap, caps: &Caps) -> Result<RelationLattice> {
    let x_opens = opens(f.domain(), caps)?;
    let y_opens = opens(f.codomain(), caps)?;
    let mut pairs = Vec::new();
    for (vi, v) in y_opens.opens().iter().enumerate() {
        let pre = f.preimage(&v.members());
        for (ui, u) in x_opens.opens().iter().enumerate() {
            if u.members().is_subset(&pre) {
                pairs.push((ui, vi));
            }
        }
    }
    let names: Vec<String> = pairs
        .iter()
        .map(|&(u, v)| format!("({}|{})", x_opens.name(u), y_opens.name(v)))
        .collect();
    let (xs, ys) = (x_opens.as_space(), y_opens.as_space());
    let space = FinSpace::from_le(&names, |a, b| {
        let ((u1, v1), (u2, v2)) = (pairs[a], pairs[b]);
        xs.le(u1, u2) && ys.le(v1, v2)
    })?;
    let lattice = Lattice::new(Arc::new(space))?;
    Ok(RelationLattice {
        x_opens,
        y_opens,
        pairs,
        lattice,
    })
}

/// Greatest monotone `P: L → L` with `fibre(P(a)) = fibre(a)`.
///
/// Starts from the top of every fibre and repairs each violation `a ≤ b`,
/// `P(a) ≰ P(b)` by `P(a) := P(a) ∧ P(b)` until stable. The meet stays in the
/// fibre whenever the fibre labelling preserves meets; otherwise there is no
/// greatest such map in general and an error is returned.
pub fn greatest_constrained_selfmap(lattice: &Lattice, fibre: &[usize]) -> Result<Vec<usize>> {
    let n = lattice.len();
    if fibre.len() != n {
        return Err(Error::Mismatch("one fibre label per element".into()));
    }
    let mut p: Vec<usize> = (0..n)
        .map(|a| {
            let top = lattice.join_all((0..n).filter(|&b| fibre[b] == fibre[a]));
            if fibre[top] == fibre[a] {
                Ok(top)
            } else {
                Err(Error::NotABundle(format!(
                    "fibre of {} has no top",
                    lattice.space().name(a)
                )))
            }
        })
        .collect::<Result<_>>()?;
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in lattice.space().up(a).iter() {
                if !lattice.le(p[a], p[b]) {
                    let m = lattice.meet(p[a], p[b]);
                    if fibre[m] != fibre[a] {
                        return Err(Error::NotABundle(format!(
                            "meet leaves the fibre of {}",
                            lattice.space().name(a)
                        )));
                    }
                    p[a] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(p);
        }
    }
}

/// A lattice `A` with `π: A → O(Y)` preserving finite meets and joins, and the
/// greatest section of `π` when `π` is onto.
#[derive(Clone, Debug)]
pub struct Bundle {
    lattice: Lattice,
    y_opens: OpensLattice,
    y_lattice: Lattice,
    pi: Vec<usize>,
    section: Option<Vec<usize>>,
}

impl Bundle {
    pub fn new(lattice: Lattice, y_opens: OpensLattice, pi: Vec<usize>) -> Result<Self> {
        let y_lattice = Lattice::new(y_opens.as_space().clone())?;
        let n = lattice.len();
        if pi.len() != n || pi.iter().any(|&v| v >= y_opens.len()) {
            return Err(Error::Mismatch(
                "projection table has the wrong shape".into(),
            ));
        }
        if pi[lattice.bottom()] != y_lattice.bottom() || pi[lattice.top()] != y_lattice.top() {
            return Err(Error::NotABundle(
                "projection must preserve top and bottom".into(),
            ));
        }
        for a in 0..n {
            for b in 0..n {
                if pi[lattice.meet(a, b)] != y_lattice.meet(pi[a], pi[b])
                    || pi[lattice.join(a, b)] != y_lattice.join(pi[a], pi[b])
                {
                    return Err(Error::NotABundle(format!(
                        "projection does not preserve the meet or join of {} and {}",
                        lattice.space().name(a),
                        lattice.space().name(b)
                    )));
                }
            }
        }
        let section: Vec<usize> = (0..y_opens.len())
            .map(|v| lattice.join_all((0..n).filter(|&a| y_lattice.le(pi[a], v))))
            .collect();
        let section = section
            .iter()
            .enumerate()
            .all(|(v, &a)| pi[a] == v)
            .then_some(section);
        Ok(Bundle {
            lattice,
            y_opens,
            y_lattice,
            pi,
            section,
        })
    }

    /// `O(Y)` itself, with the identity projection.
    pub fn opens_of(y: &Arc<FinSpace>, caps: &Caps) -> Result<Self> {
        let ol = opens(y, caps)?;
        let lattice = Lattice::new(ol.as_space().clone())?;
        let pi = (0..ol.len()).collect();
        Bundle::new(lattice, ol, pi)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn y_opens(&self) -> &OpensLattice {
        &self.y_opens
    }

    pub fn y_lattice(&self) -> &Lattice {
        &self.y_lattice
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn section(&self) -> Option<&[usize]> {
        self.section.as_deref()
    }
}

/// The least advice bundle `𝔄_f` and the data it is built from.
#[derive(Clone, Debug)]
pub struct AdviceBundle {
    pub rel: RelationLattice,
    /// `P_f` as a table on `L_f`.
    pub pf: Vec<usize>,
    /// Elements of `L_f` in the range of `P_f`, increasing.
    pub af: Vec<usize>,
    pub bundle: Bundle,
    /// `π_Y` restricted to `𝔄_f` is an order isomorphism onto `O(Y)`.
    pub iso_oy: bool,
    pub distributive: bool,
}

impl AdviceBundle {
    /// `σ(V) = P_f(∅, V)` as an index into `L_f`.
    pub fn sigma(&self, v: usize) -> usize {
        let empty = self.rel.x_opens.empty_index();
        self.pf[self
            .rel
            .index_of(empty, v)
            .expect("(∅, V) is always a pair")]
    }

    /// The pair in `L_f` behind an element of `𝔄_f`.
    pub fn pair(&self, a: usize) -> (usize, usize) {
        self.rel.pairs[self.af[a]]
    }

    /// The principal co-envelope on `𝔄_f`, which is the first projection.
    pub fn pi_x(&self) -> Vec<ElemSet> {
        (0..self.af.len())
            .map(|a| self.rel.x_opens.get(self.pair(a).0).members())
            .collect()
    }
}

pub fn advice_bundle(f: &PointMap, caps: &Caps) -> Result<AdviceBundle> {
    let rel = relation_lattice(f, caps)?;
    let pf = greatest_constrained_selfmap(&rel.lattice, &rel.fibres())?;
    let mut af: Vec<usize> = pf.clone();
    af.sort_unstable();
    af.dedup();
    let set: ElemSet = af.iter().copied().collect();
    let sub = Arc::new(rel.lattice.space().subspace(&set)?);
    let lattice = Lattice::new(sub)?;
    let pi: Vec<usize> = af.iter().map(|&a| rel.pairs[a].1).collect();
    let ys = rel.y_opens.as_space();
    let iso_oy = pi.len() == rel.y_opens.len()
        && (0..af.len()).all(|a| (0..af.len()).all(|b| lattice.le(a, b) == ys.le(pi[a], pi[b])));
    let distributive = lattice.is_distributive();
    let bundle = Bundle::new(lattice, rel.y_opens.clone(), pi)?;
    Ok(AdviceBundle {
        rel,
        pf,
        af,
        bundle,
        iso_oy,
        distributive,
    })
}

/// `lift(a) = ⋁ { c : ρ(c) ≤ φ(a) }`, the greatest monotone `lift` with
/// `ρ ∘ lift = φ`.
pub fn greatest_lift(
    c: &Lattice,
    b: &Lattice,
    rho: &[usize],
    sigma: &[usize],
    phi: &PointMap,
) -> Result<PointMap> {
    if rho.len() != c.len() || sigma.len() != b.len() || phi.codomain() != b.space() {
        return Err(Error::Mismatch("lift data has the wrong shape".into()));
    }
    if let Some(v) = (0..b.len()).find(|&v| rho[sigma[v]] != v) {
        return Err(Error::NotASection(format!(
            "rho(sigma({})) differs",
            b.space().name(v)
        )));
    }
    let preserves = rho[c.bottom()] == b.bottom()
        && (0..c.len()).all(|x| (0..c.len()).all(|y| rho[c.join(x, y)] == b.join(rho[x], rho[y])));
    if !preserves {
        return Err(Error::NotJoinPreserving("rho".into()));
    }
    let assignment = (0..phi.domain().len())
        .map(|a| c.join_all((0..c.len()).filter(|&x| b.le(rho[x], phi.apply(a)))))
        .collect();
    PointMap::new(phi.domain().clone(), c.space().clone(), assignment)
}

/// A monotone `F*: A → O(X)` with `F*(a) ⊆ int f⁻¹(π(a))`.
#[derive(Clone, Debug)]
pub struct CoEnvelope {
    bundle: Bundle,
    f: PointMap,
    table: Vec<ElemSet>,
}

impl CoEnvelope {
    pub fn new(bundle: Bundle, f: PointMap, table: Vec<ElemSet>) -> Result<Self> {
        let a = bundle.lattice();
        if table.len() != a.len() {
            return Err(Error::Mismatch("one open per bundle element".into()));
        }
        if f.codomain() != bundle.y_opens().base() {
            return Err(Error::Mismatch("bundle is over a different space".into()));
        }
        let x = f.domain();
        for (i, t) in table.iter().enumerate() {
            if !x.is_up_set(t) || !t.is_subset(&x.all()) {
                return Err(Error::NotUpSet(x.render_set(t)));
            }
            let bound =
                x.interior_set(&f.preimage(&bundle.y_opens().get(bundle.pi()[i]).members()));
            if !t.is_subset(&bound) {
                return Err(Error::NotAnEnvelope(format!(
                    "co-envelope exceeds int f^-1 at {}",
                    a.space().name(i)
                )));
            }
        }
        for i in 0..a.len() {
            for j in a.space().up(i).iter() {
                if !table[i].is_subset(&table[j]) {
                    return Err(Error::NotContinuous("co-envelope is not monotone".into()));
                }
            }
        }
        Ok(CoEnvelope { bundle, f, table })
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn f(&self) -> &PointMap {
        &self.f
    }

    pub fn table(&self) -> &[ElemSet] {
        &self.table
    }
}

/// `F*(a) = ⋂_{a' ≥ a} int f⁻¹(π(a'))`, the greatest monotone map below
/// `int f⁻¹ ∘ π`.
pub fn principal_coenvelope(f: &PointMap, bundle: &Bundle) -> Result<CoEnvelope> {
    if bundle.section().is_none() {
        return Err(Error::NotABundle("projection has no section".into()));
    }
    let x = f.domain();
    let a = bundle.lattice();
    let bound: Vec<ElemSet> = bundle
        .pi()
        .iter()
        .map(|&v| x.interior_set(&f.preimage(&bundle.y_opens().get(v).members())))
        .collect();
    let table = (0..a.len())
        .map(|i| {
            a.space()
                .up(i)
                .iter()
                .fold(x.all(), |acc, j| acc.intersection(&bound[j]))
        })
        .collect();
    CoEnvelope::new(bundle.clone(), f.clone(), table)
}

/// `F* ∘ lift_π(G*)`: a co-envelope of `g ∘ f` on the bundle of `G*`.
pub fn compose_coenvelopes(co_f: &CoEnvelope, co_g: &CoEnvelope) -> Result<CoEnvelope> {
    if co_f.f().codomain() != co_g.f().domain() {
        return Err(Error::Mismatch("f must land in the domain of g".into()));
    }
    let bf = co_f.bundle();
    let section = bf
        .section()
        .ok_or_else(|| Error::NotABundle("projection has no section".into()))?;
    let ol = bf.y_opens();
    let g_star = (0..co_g.table().len())
        .map(|i| {
            ol.index_of_set(&co_g.table()[i])
                .ok_or_else(|| Error::NotUpSet("co-envelope value".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let phi = PointMap::new(
        co_g.bundle().lattice().space().clone(),
        ol.as_space().clone(),
        g_star,
    )?;
    let lift = greatest_lift(bf.lattice(), bf.y_lattice(), bf.pi(), section, &phi)?;
    let table = (0..lift.domain().len())
        .map(|i| co_f.table()[lift.apply(i)])
        .collect();
    CoEnvelope::new(co_g.bundle().clone(), co_f.f().then(co_g.f())?, table)
}

/// `(F, ξ_L) ↦ (F*, ξ_L*)` on the bundle `O(L)`.
pub fn duality(e: &Envelope, caps: &Caps) -> Result<CoEnvelope> {
    let approx = e.approx();
    let l_opens = opens(approx.lattice().space(), caps)?;
    let y_opens = opens(approx.base(), caps)?;
    let pi = l_opens
        .opens()
        .iter()
        .map(|w| {
            let pre = approx.xi().preimage(&w.members());
            y_opens
                .index_of_set(&pre)
                .expect("preimage of an open is open")
        })
        .collect();
    let lattice = Lattice::new(l_opens.as_space().clone())?;
    let bundle = Bundle::new(lattice, y_opens, pi)?;
    let table = l_opens
        .opens()
        .iter()
        .map(|w| {
            (0..e.values().len())
                .filter(|&x| w.contains(e.value(x)))
                .collect()
        })
        .collect();
    CoEnvelope::new(bundle, e.f().clone(), table)
}

/// `(F*, π) ↦ (F, ξ)` with `L = O(A)`, `ξ(y) = { a : y ∈ π(a) }` and
/// `F(x) = { a : x ∈ F*(a) }`.
pub fn duality_inv(c: &CoEnvelope, caps: &Caps) -> Result<Envelope> {
    let bundle = c.bundle();
    let a_opens = opens(bundle.lattice().space(), caps)?;
    let lattice = Lattice::new(a_opens.as_space().clone())?;
    let y = bundle.y_opens().base().clone();
    let xi = (0..y.len())
        .map(|p| {
            let set: ElemSet = (0..bundle.lattice().len())
                .filter(|&a| bundle.y_opens().get(bundle.pi()[a]).contains(p))
                .collect();
            a_opens.index_of_set(&set).expect("pi is monotone")
        })
        .collect();
    let xi = PointMap::new(y, a_opens.as_space().clone(), xi)?;
    let approx = ApproxSpace::new(lattice, xi)?;
    let values = (0..c.f().domain().len())
        .map(|x| {
            let set: ElemSet = (0..c.table().len())
                .filter(|&a| c.table()[a].contains(x))
                .collect();
            a_opens.index_of_set(&set).expect("co-envelope is monotone")
        })
        .collect();
    Envelope::new(approx, c.f().clone(), values)
}
