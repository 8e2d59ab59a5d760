//! Envelopes: best continuous under-approximations of arbitrary maps between
//! finite spaces, with values in a finite lattice or in the double powerspace.

use std::sync::Arc;

use crate::bits::ElemSet;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::finspace::{
    double_star, double_star_o2, exponential, mu, nu, opens, FinSpace, O2Space, OpenSet,
    OpensLattice, PointMap, UpFamily,
};
use crate::lattice::Lattice;

/// A yes/no answer together with the first counterexample in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict<W> {
    pub holds: bool,
    pub counterexample: Option<W>,
}

impl<W> Verdict<W> {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }

    pub fn fail(w: W) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(w),
        }
    }
}

fn check_monotone(dom: &FinSpace, le: impl Fn(usize, usize) -> bool) -> Result<()> {
    for a in 0..dom.len() {
        for b in dom.up(a).iter() {
            if !le(a, b) {
                return Err(Error::NotContinuous(format!(
                    "{} <= {} but values are not ordered",
                    dom.name(a),
                    dom.name(b)
                )));
            }
        }
    }
    Ok(())
}

/// A finite lattice `L` with a continuous inclusion `ξ: Y → L`.
#[derive(Clone, Debug)]
pub struct ApproxSpace {
    lattice: Lattice,
    xi: PointMap,
}

impl ApproxSpace {
    pub fn new(lattice: Lattice, xi: PointMap) -> Result<Self> {
        if xi.codomain() != lattice.space() {
            return Err(Error::Mismatch("xi must land in the lattice".into()));
        }
        check_monotone(xi.domain(), |a, b| lattice.le(xi.apply(a), xi.apply(b)))?;
        Ok(ApproxSpace { lattice, xi })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn xi(&self) -> &PointMap {
        &self.xi
    }

    /// The approximated space `Y`.
    pub fn base(&self) -> &Arc<FinSpace> {
        self.xi.domain()
    }

    /// `(O²(Y), ν_Y)`, with the lattice enumerated.
    pub fn o2(o2: &O2Space) -> Result<Self> {
        let lattice = Lattice::new(o2.space().clone())?;
        ApproxSpace::new(lattice, o2.nu_map())
    }
}

/// A continuous `F: X → L` with `F ≤ ξ_L ∘ f`.
#[derive(Clone, Debug)]
pub struct Envelope {
    approx: ApproxSpace,
    f: PointMap,
    values: Vec<usize>,
}

impl Envelope {
    pub fn new(approx: ApproxSpace, f: PointMap, values: Vec<usize>) -> Result<Self> {
        if f.codomain() != approx.base() {
            return Err(Error::Mismatch(
                "f must land in the approximated space".into(),
            ));
        }
        if values.len() != f.domain().len() {
            return Err(Error::Mismatch(
                "one value per point of X is required".into(),
            ));
        }
        let l = approx.lattice();
        if let Some(&bad) = values.iter().find(|&&v| v >= l.len()) {
            return Err(Error::InvalidIndex {
                index: bad,
                len: l.len(),
            });
        }
        check_monotone(f.domain(), |a, b| l.le(values[a], values[b]))?;
        for (x, &v) in values.iter().enumerate() {
            if !l.le(v, approx.xi().apply(f.apply(x))) {
                return Err(Error::NotAnEnvelope(format!(
                    "value at {} is not below xi(f({}))",
                    f.domain().name(x),
                    f.domain().name(x)
                )));
            }
        }
        Ok(Envelope { approx, f, values })
    }

    pub fn approx(&self) -> &ApproxSpace {
        &self.approx
    }

    pub fn f(&self) -> &PointMap {
        &self.f
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, x: usize) -> usize {
        self.values[x]
    }
}

/// `F(x) = ⋀_{x' ≥ x} ξ(f(x'))`, the greatest envelope of `f` in `approx`.
pub fn principal_envelope(f: &PointMap, approx: &ApproxSpace) -> Result<Envelope> {
    let l = approx.lattice();
    let values = (0..f.domain().len())
        .map(|x| {
            l.meet_all(
                f.domain()
                    .up(x)
                    .iter()
                    .map(|x2| approx.xi().apply(f.apply(x2))),
            )
        })
        .collect();
    Envelope::new(approx.clone(), f.clone(), values)
}

/// A continuous map `X → O²(Y)`, stored pointwise as up-families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct O2Map {
    domain: Arc<FinSpace>,
    base: Arc<FinSpace>,
    values: Vec<UpFamily>,
}

impl O2Map {
    pub fn new(domain: Arc<FinSpace>, base: Arc<FinSpace>, values: Vec<UpFamily>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Mismatch("one family per point is required".into()));
        }
        for v in &values {
            for g in v.generators() {
                OpenSet::new(&base, *g)?;
            }
        }
        check_monotone(&domain, |a, b| values[a].le(&values[b]))?;
        Ok(O2Map {
            domain,
            base,
            values,
        })
    }

    /// `ν_Y ∘ f` for continuous `f`.
    pub fn nu_after(f: &PointMap) -> Result<Self> {
        let cod = f.codomain();
        let values = (0..f.domain().len()).map(|x| nu(cod, f.apply(x))).collect();
        O2Map::new(f.domain().clone(), cod.clone(), values)
    }

    pub fn domain(&self) -> &Arc<FinSpace> {
        &self.domain
    }

    pub fn base(&self) -> &Arc<FinSpace> {
        &self.base
    }

    pub fn values(&self) -> &[UpFamily] {
        &self.values
    }

    pub fn value(&self, x: usize) -> &UpFamily {
        &self.values[x]
    }

    /// `F(x) ≤ ν(f(x))` for every `x`, i.e. every generator of `F(x)` contains `f(x)`.
    pub fn is_envelope_of(&self, f: &PointMap) -> bool {
        f.domain() == &self.domain
            && f.codomain() == &self.base
            && self
                .values
                .iter()
                .enumerate()
                .all(|(x, fam)| fam.generators().iter().all(|g| g.contains(f.apply(x))))
    }

    /// Index form, for use with the generic [`Envelope`].
    pub fn indices(&self, o2: &O2Space) -> Result<Vec<usize>> {
        self.values
            .iter()
            .map(|fam| {
                o2.index_of(fam)
                    .ok_or_else(|| Error::Mismatch("family is not over this base".into()))
            })
            .collect()
    }
}

/// An O²-valued envelope together with the map it envelopes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct O2Envelope {
    f: PointMap,
    map: O2Map,
}

impl O2Envelope {
    pub fn new(f: PointMap, map: O2Map) -> Result<Self> {
        if !map.is_envelope_of(&f) {
            return Err(Error::NotAnEnvelope("F is not below nu o f".into()));
        }
        Ok(O2Envelope { f, map })
    }

    pub fn f(&self) -> &PointMap {
        &self.f
    }

    pub fn map(&self) -> &O2Map {
        &self.map
    }

    pub fn value(&self, x: usize) -> &UpFamily {
        self.map.value(x)
    }

    /// The same envelope in the generic form over `(O²(Y), ν)`.
    pub fn to_envelope(&self, o2: &O2Space) -> Result<Envelope> {
        Envelope::new(ApproxSpace::o2(o2)?, self.f.clone(), self.map.indices(o2)?)
    }
}

/// `F(x) = { V : f(↑x) ⊆ V }`. Needs no enumeration and cannot exceed a cap.
pub fn principal_o2_envelope(f: &PointMap) -> O2Envelope {
    let (dom, cod) = (f.domain(), f.codomain());
    let values = (0..dom.len())
        .map(|x| UpFamily::principal(cod.up_closure(&f.image(&dom.up(x)))))
        .collect();
    let map = O2Map {
        domain: dom.clone(),
        base: cod.clone(),
        values,
    };
    O2Envelope { f: f.clone(), map }
}

/// The envelope that is constantly the empty family.
pub fn empty_o2_envelope(f: &PointMap) -> O2Envelope {
    let map = O2Map {
        domain: f.domain().clone(),
        base: f.codomain().clone(),
        values: vec![UpFamily::empty(); f.domain().len()],
    };
    O2Envelope { f: f.clone(), map }
}

/// `V ↦ F*(V)`, one row per open of `Y` in canonical order.
#[derive(Clone, Debug)]
pub struct StarTable {
    opens: OpensLattice,
    rows: Vec<ElemSet>,
}

impl StarTable {
    pub fn opens(&self) -> &OpensLattice {
        &self.opens
    }

    pub fn rows(&self) -> &[ElemSet] {
        &self.rows
    }

    pub fn row_at(&self, i: usize) -> ElemSet {
        self.rows[i]
    }

    pub fn row(&self, v: &ElemSet) -> Option<ElemSet> {
        self.opens.index_of_set(v).map(|i| self.rows[i])
    }
}

pub fn star(map: &O2Map, caps: &Caps) -> Result<StarTable> {
    let ol = opens(map.base(), caps)?;
    let rows = ol
        .opens()
        .iter()
        .map(|v| {
            (0..map.domain().len())
                .filter(|&x| map.value(x).contains(&v.members()))
                .collect()
        })
        .collect();
    Ok(StarTable { opens: ol, rows })
}

/// The table `V ↦ int f⁻¹(V)`.
pub fn int_preimage_table(f: &PointMap, caps: &Caps) -> Result<StarTable> {
    let ol = opens(f.codomain(), caps)?;
    let rows = ol
        .opens()
        .iter()
        .map(|v| f.domain().interior_set(&f.preimage(&v.members())))
        .collect();
    Ok(StarTable { opens: ol, rows })
}

/// Opens `V` such that `f⁻¹(V)` is a neighbourhood of `x`.
pub fn robust_filter(f: &PointMap, x: usize, caps: &Caps) -> Result<Vec<OpenSet>> {
    let ol = opens(f.codomain(), caps)?;
    let nbhd = f.domain().up(x);
    Ok(ol
        .opens()
        .iter()
        .filter(|v| nbhd.is_subset(&f.preimage(&v.members())))
        .copied()
        .collect())
}

/// Decides whether `F*(V) = int f⁻¹(V)` for every open `V`. The witness is a
/// point `x` and an open `V` robust at `x` that `F(x)` does not contain.
pub fn is_uniformly_universal(
    f: &PointMap,
    map: &O2Map,
    caps: &Caps,
) -> Result<Verdict<(usize, OpenSet)>> {
    if !map.is_envelope_of(f) {
        return Err(Error::NotAnEnvelope("F is not below nu o f".into()));
    }
    let st = star(map, caps)?;
    let ip = int_preimage_table(f, caps)?;
    for (i, v) in st.opens().opens().iter().enumerate() {
        let missing = ip.row_at(i).difference(&st.row_at(i));
        if let Some(x) = missing.first() {
            return Ok(Verdict::fail((x, *v)));
        }
    }
    Ok(Verdict::pass())
}

/// `(G∙F)(x) = { W : G*(W) ∈ F(x) }`.
pub fn compose_o2(g: &O2Map, f: &O2Map, caps: &Caps) -> Result<O2Map> {
    if f.base() != g.domain() {
        return Err(Error::Mismatch("F must land in O²(dom G)".into()));
    }
    let st = star(g, caps)?;
    let values = f
        .values()
        .iter()
        .map(|fx| {
            UpFamily::from_generators(
                st.opens()
                    .opens()
                    .iter()
                    .zip(st.rows())
                    .filter(|(_, row)| fx.contains(row))
                    .map(|(w, _)| w.members()),
            )
        })
        .collect();
    Ok(O2Map {
        domain: f.domain().clone(),
        base: g.base().clone(),
        values,
    })
}

/// Composition of envelopes: an envelope of `g ∘ f`.
pub fn compose_envelopes(g: &O2Envelope, f: &O2Envelope, caps: &Caps) -> Result<O2Envelope> {
    let map = compose_o2(g.map(), f.map(), caps)?;
    O2Envelope::new(f.f().then(g.f())?, map)
}

/// `Φ(l) = ⋀ { ξ_M(y) : ξ_L(y) ≥ l }`, the greatest continuous `Φ` with
/// `Φ ∘ ξ_L ≤ ξ_M`.
pub fn right_extension(l: &ApproxSpace, m: &ApproxSpace) -> Result<PointMap> {
    if l.base() != m.base() {
        return Err(Error::Mismatch("approximation spaces must share Y".into()));
    }
    let ml = m.lattice();
    let assignment = (0..l.lattice().len())
        .map(|a| {
            ml.meet_all(
                (0..l.base().len())
                    .filter(|&y| l.lattice().le(a, l.xi().apply(y)))
                    .map(|y| m.xi().apply(y)),
            )
        })
        .collect();
    PointMap::new(l.lattice().space().clone(), ml.space().clone(), assignment)
}

/// Whether `F` tightens `G`, decided with the greatest right extension.
pub fn tightens(f: &Envelope, g: &Envelope) -> Result<Verdict<PointMap>> {
    let phi = right_extension(f.approx(), g.approx())?;
    let ml = g.approx().lattice();
    let ok = (0..f.values().len()).all(|x| ml.le(g.value(x), phi.apply(f.value(x))));
    Ok(Verdict {
        holds: ok,
        counterexample: ok.then_some(phi),
    })
}

/// `ρ_L(𝒰) = ⋁ { ⋀U : U ∈ 𝒰 }`, with `𝒰` a family of opens of `L`.
pub fn rho(lattice: &Lattice, family: &UpFamily) -> usize {
    lattice.join_all(
        family
            .generators()
            .iter()
            .map(|u| lattice.meet_all(u.iter())),
    )
}

/// An approximation space with a continuous uniformity map `u: L → O²(Y)`.
#[derive(Clone, Debug)]
pub struct UniformApproxSpace {
    approx: ApproxSpace,
    u: Vec<UpFamily>,
}

impl UniformApproxSpace {
    pub fn new(approx: ApproxSpace, u: Vec<UpFamily>) -> Result<Self> {
        O2Map::new(
            approx.lattice().space().clone(),
            approx.base().clone(),
            u.clone(),
        )?;
        Ok(UniformApproxSpace { approx, u })
    }

    pub fn approx(&self) -> &ApproxSpace {
        &self.approx
    }

    pub fn u(&self) -> &[UpFamily] {
        &self.u
    }
}

/// `(O²(Y), id)`.
pub fn o2_uniform_space(o2: &O2Space) -> Result<UniformApproxSpace> {
    UniformApproxSpace::new(ApproxSpace::o2(o2)?, o2.families().to_vec())
}

/// `E(φ) = ρ_M ∘ φ** ∘ u_L` for continuous `φ: Y → M`.
pub fn extension_e(us: &UniformApproxSpace, m: &Lattice, phi: &PointMap) -> Result<PointMap> {
    if phi.domain() != us.approx().base() || phi.codomain() != m.space() {
        return Err(Error::Mismatch("phi must map Y into M".into()));
    }
    let assignment = us
        .u()
        .iter()
        .map(|fam| double_star(phi, fam).map(|d| rho(m, &d)))
        .collect::<Result<Vec<_>>>()?;
    PointMap::new(
        us.approx().lattice().space().clone(),
        m.space().clone(),
        assignment,
    )
}

/// `E(ξ_M) ∘ F ≥ G` pointwise.
pub fn uniformly_tightens(us: &UniformApproxSpace, f: &Envelope, g: &Envelope) -> Result<bool> {
    let m = g.approx();
    let e = extension_e(us, m.lattice(), m.xi())?;
    Ok((0..f.values().len()).all(|x| m.lattice().le(g.value(x), e.apply(f.value(x)))))
}

/// How much of O²(L) the third axiom was checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom3Scope {
    /// Every element of O²(L).
    All,
    /// Joins of any set of ν-images.
    JoinClosure,
    /// ν-images, their pairwise joins and the empty family.
    PairwiseJoins,
}

impl Axiom3Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axiom3Scope::All => "all",
            Axiom3Scope::JoinClosure => "join-closure-of-nu-images",
            Axiom3Scope::PairwiseJoins => "nu-images-pairwise-joins",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    /// First `y` with `u(ξ(y)) ≰ ν(y)`.
    pub ax1: Verdict<usize>,
    /// First `l` with `ρ(ξ**(u(l))) ≱ l`.
    pub ax2: Verdict<usize>,
    /// First tested family where the two sides differ.
    pub ax3: Verdict<UpFamily>,
    pub ax3_scope: Axiom3Scope,
    pub ax3_checked: usize,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.ax1.holds && self.ax2.holds && self.ax3.holds
    }
}

fn axiom3_families(l: &Lattice, caps: &Caps) -> (Vec<UpFamily>, Axiom3Scope) {
    let space = l.space();
    if let Ok(o2) = O2Space::new(space, caps) {
        return (o2.families().to_vec(), Axiom3Scope::All);
    }
    if let Ok(ol) = opens(space, caps) {
        let fams = ol
            .opens()
            .iter()
            .map(|a| {
                UpFamily::from_generators(space.minimal(&a.members()).iter().map(|x| space.up(x)))
            })
            .collect();
        return (fams, Axiom3Scope::JoinClosure);
    }
    let n = space.len();
    let mut fams = vec![UpFamily::empty()];
    for a in 0..n {
        for b in a..n {
            fams.push(UpFamily::from_generators([space.up(a), space.up(b)]));
        }
    }
    (fams, Axiom3Scope::PairwiseJoins)
}

/// Evaluates the three axioms of a uniform approximation space.
pub fn check_uniform_axioms(us: &UniformApproxSpace, caps: &Caps) -> Result<AxiomReport> {
    let approx = us.approx();
    let (y, l) = (approx.base(), approx.lattice());
    let u = us.u();

    let ax1 = (0..y.len())
        .find(|&p| !u[approx.xi().apply(p)].le(&nu(y, p)))
        .map_or_else(Verdict::pass, Verdict::fail);

    let mut ax2 = Verdict::pass();
    for (a, ua) in u.iter().enumerate() {
        let lifted = double_star(approx.xi(), ua)?;
        if !l.le(a, rho(l, &lifted)) {
            ax2 = Verdict::fail(a);
            break;
        }
    }

    let (fams, scope) = axiom3_families(l, caps);
    let mut ax3 = Verdict::pass();
    for fam in &fams {
        let lhs = &u[rho(l, fam)];
        let rhs = mu(y, &double_star_o2(u, fam), caps)?;
        if *lhs != rhs {
            ax3 = Verdict::fail(fam.clone());
            break;
        }
    }
    Ok(AxiomReport {
        ax1,
        ax2,
        ax3,
        ax3_scope: scope,
        ax3_checked: fams.len(),
    })
}

/// The overt-subsets space `V(Y)` with its uniform approximation space
/// `(O²(Y), i, j)`.
#[derive(Clone, Debug)]
pub struct OvertSpace {
    /// Nonempty closed (down-) sets of `Y`, ordered by inclusion.
    pub space: Arc<FinSpace>,
    pub sets: Vec<ElemSet>,
    pub o2: O2Space,
    pub uniform: UniformApproxSpace,
}

impl OvertSpace {
    /// `i(A) = { U : U ∩ A ≠ ∅ }`.
    pub fn i(&self, a: usize) -> UpFamily {
        overt_i(self.o2.base(), &self.sets[a])
    }

    /// `j(𝒰) = { V : V ⊇ { A : A meets every U ∈ 𝒰 } }`.
    pub fn j(&self, family: &UpFamily) -> UpFamily {
        overt_j(&self.sets, family)
    }
}

fn overt_i(y: &FinSpace, a: &ElemSet) -> UpFamily {
    UpFamily::from_generators(a.iter().map(|p| y.up(p)))
}

fn overt_j(sets: &[ElemSet], family: &UpFamily) -> UpFamily {
    let k = sets
        .iter()
        .enumerate()
        .filter(|(_, a)| family.generators().iter().all(|g| g.intersects(a)))
        .map(|(i, _)| i)
        .collect();
    UpFamily::principal(k)
}

pub fn overt_uniform_space(y: &Arc<FinSpace>, caps: &Caps) -> Result<OvertSpace> {
    let o2 = O2Space::new(y, caps)?;
    let dual = y.dual();
    let ol = opens(&Arc::new(dual), caps)?;
    let mut sets: Vec<ElemSet> = ol
        .opens()
        .iter()
        .map(|s| s.members())
        .filter(|s| !s.is_empty())
        .collect();
    sets.sort_by(|a, b| y.canonical_key(a).cmp(&y.canonical_key(b)));
    let names: Vec<String> = sets.iter().map(|s| y.render_set(s)).collect();
    let space = Arc::new(FinSpace::from_le(&names, |a, b| {
        sets[a].is_subset(&sets[b])
    })?);
    let lattice = Lattice::new(o2.space().clone())?;
    let xi_assign = sets
        .iter()
        .map(|a| {
            o2.index_of(&overt_i(y, a))
                .ok_or_else(|| Error::Mismatch("i(A) outside O²(Y)".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let xi = PointMap::new(space.clone(), o2.space().clone(), xi_assign)?;
    let u = o2
        .families()
        .iter()
        .map(|fam| overt_j(&sets, fam))
        .collect();
    let uniform = UniformApproxSpace::new(ApproxSpace::new(lattice, xi)?, u)?;
    Ok(OvertSpace {
        space,
        sets,
        o2,
        uniform,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationReport {
    /// First `l` whose fibre `ξ⁻¹(↑l)` is not closed.
    pub separated: Verdict<usize>,
    /// First `x` with no `U ∋ x` interpolating below `↑x`.
    pub regular: Verdict<usize>,
}

/// Separation properties of `ξ`. Since `↑x` is the smallest open containing
/// `x` and closure is monotone, interpolation reduces to `ξ⁻¹(↑x)` being
/// closed, so a finite approximation space is regular exactly when it is
/// separated.
pub fn separated_regular_check(approx: &ApproxSpace) -> SeparationReport {
    let (y, l) = (approx.base(), approx.lattice());
    let bad = (0..l.len()).find(|&a| {
        let fibre = approx.xi().preimage(&l.space().up(a));
        !y.is_down_set(&fibre)
    });
    let v = bad.map_or_else(Verdict::pass, Verdict::fail);
    SeparationReport {
        separated: v.clone(),
        regular: v,
    }
}

/// `g*L = (L, ξ ∘ g)`.
pub fn pullback_approx(g: &PointMap, approx: &ApproxSpace) -> Result<ApproxSpace> {
    if !g.is_continuous() {
        return Err(Error::NotContinuous(
            "pullback map must be continuous".into(),
        ));
    }
    ApproxSpace::new(approx.lattice().clone(), g.then(approx.xi())?)
}

/// `(ξ_L)_*: Y^Z → L^Z`, postcomposition with `ξ`.
pub fn exponential_approx(approx: &ApproxSpace, z: &FinSpace, caps: &Caps) -> Result<ApproxSpace> {
    let yz = exponential(z, approx.base(), caps)?;
    let lz = exponential(z, approx.lattice().space(), caps)?;
    let assignment = yz
        .maps
        .iter()
        .map(|m| {
            let pushed: Vec<usize> = m.iter().map(|&p| approx.xi().apply(p)).collect();
            lz.index_of(&pushed).expect("postcomposite is monotone")
        })
        .collect();
    let lattice = Lattice::new(lz.space.clone())?;
    let xi = PointMap::new(yz.space.clone(), lz.space.clone(), assignment)?;
    ApproxSpace::new(lattice, xi)
}

/// `K_⊥(Y)` for discrete `Y`: all subsets under reverse inclusion, with a
/// bottom element adjoined.
#[derive(Clone, Debug)]
pub struct KBot {
    base: Arc<FinSpace>,
    lattice: Lattice,
    /// `None` is the adjoined bottom.
    elems: Vec<Option<ElemSet>>,
}

impl KBot {
    pub fn new(base: &Arc<FinSpace>) -> Result<Self> {
        if !base.is_discrete() {
            return Err(Error::Mismatch("K_bot model needs a discrete space".into()));
        }
        let n = base.len();
        let mut elems: Vec<Option<ElemSet>> = vec![None];
        let mut subsets: Vec<ElemSet> = (0..1usize << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        subsets.sort_by(|a, b| base.canonical_key(b).cmp(&base.canonical_key(a)));
        elems.extend(subsets.into_iter().map(Some));
        let names: Vec<String> = elems
            .iter()
            .map(|e| e.map_or("bot".to_string(), |s| base.render_set(&s)))
            .collect();
        let space = FinSpace::from_le(&names, |a, b| match (elems[a], elems[b]) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(p), Some(q)) => q.is_subset(&p),
        })?;
        Ok(KBot {
            base: base.clone(),
            lattice: Lattice::new(Arc::new(space))?,
            elems,
        })
    }

    pub fn base(&self) -> &Arc<FinSpace> {
        &self.base
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn elem(&self, k: usize) -> Option<ElemSet> {
        self.elems[k]
    }

    pub fn index_of(&self, k: Option<ElemSet>) -> usize {
        self.elems
            .iter()
            .position(|e| *e == k)
            .expect("every subset is present")
    }

    /// `y ↦ {y}`.
    pub fn approx(&self) -> Result<ApproxSpace> {
        let xi = (0..self.base.len())
            .map(|y| self.index_of(Some(ElemSet::singleton(y))))
            .collect();
        ApproxSpace::new(
            self.lattice.clone(),
            PointMap::new(self.base.clone(), self.lattice.space().clone(), xi)?,
        )
    }

    /// `i(K) = { U : K ⊆ U }`, and `i(⊥) = ∅`.
    pub fn i(&self, k: usize) -> UpFamily {
        self.elems[k].map_or_else(UpFamily::empty, UpFamily::principal)
    }

    /// Kleisli composite `x ↦ ⋃_{y ∈ F(x)} G(y)`, bottom if any part is bottom.
    pub fn kleisli(g_vals: &[usize], g: &KBot, f_vals: &[usize], f: &KBot) -> Vec<usize> {
        f_vals
            .iter()
            .map(|&k| {
                let composite = f.elems[k].and_then(|set| {
                    set.iter().try_fold(ElemSet::EMPTY, |acc, y| {
                        g.elems[g_vals[y]].map(|s| acc.union(&s))
                    })
                });
                g.index_of(composite)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finspace::monotone_maps;

    fn arc(s: FinSpace) -> Arc<FinSpace> {
        Arc::new(s)
    }

    fn sigma_to_d2() -> PointMap {
        let s = arc(FinSpace::sierpinski());
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        PointMap::new(s, d, vec![0, 1]).unwrap()
    }

    #[test]
    fn principal_envelope_of_step() {
        let caps = Caps::default();
        let f = sigma_to_d2();
        let o2 = O2Space::new(f.codomain(), &caps).unwrap();
        let approx = ApproxSpace::o2(&o2).unwrap();
        let env = principal_envelope(&f, &approx).unwrap();
        let top = o2.family(env.value(1));
        let bot = o2.family(env.value(0));
        assert_eq!(top.generators(), &[ElemSet::singleton(1)]);
        assert_eq!(bot.generators(), &[ElemSet::full(2)]);
        // Every monotone G below ν∘f is below the principal envelope.
        let bound: Vec<usize> = (0..2).map(|x| approx.xi().apply(f.apply(x))).collect();
        let l = approx.lattice();
        for g in monotone_maps(f.domain(), l.space(), usize::MAX).unwrap() {
            if (0..2).all(|x| l.le(g[x], bound[x])) {
                assert!((0..2).all(|x| l.le(g[x], env.value(x))));
            }
        }
        let closed = principal_o2_envelope(&f);
        assert_eq!(closed.map().indices(&o2).unwrap(), env.values());
    }

    #[test]
    fn principal_of_continuous_and_constant() {
        let c = arc(FinSpace::chain(&["a", "b", "c"]).unwrap());
        let id = PointMap::identity(c.clone());
        let env = principal_o2_envelope(&id);
        for x in 0..3 {
            assert_eq!(env.value(x), &nu(&c, x));
        }
        let k = PointMap::constant(c.clone(), c.clone(), 1).unwrap();
        let env = principal_o2_envelope(&k);
        for x in 0..3 {
            assert_eq!(env.value(x), &nu(&c, 1));
        }
    }

    #[test]
    fn star_and_robust_examples() {
        let caps = Caps::default();
        let f = sigma_to_d2();
        let env = principal_o2_envelope(&f);
        let st = star(env.map(), &caps).unwrap();
        assert_eq!(st.row(&ElemSet::singleton(0)), Some(ElemSet::EMPTY));
        assert_eq!(st.row(&ElemSet::singleton(1)), Some(ElemSet::singleton(1)));
        let empty = empty_o2_envelope(&f);
        assert!(star(empty.map(), &caps)
            .unwrap()
            .rows()
            .iter()
            .all(|r| r.is_empty()));
        let rf = robust_filter(&f, 0, &caps).unwrap();
        assert_eq!(
            rf,
            vec![OpenSet::new(f.codomain(), ElemSet::full(2)).unwrap()]
        );
    }

    #[test]
    fn universality_examples() {
        let caps = Caps::default();
        let f = sigma_to_d2();
        assert!(
            is_uniformly_universal(&f, principal_o2_envelope(&f).map(), &caps)
                .unwrap()
                .holds
        );
        let v = is_uniformly_universal(&f, empty_o2_envelope(&f).map(), &caps).unwrap();
        assert!(!v.holds);
        let (x, open) = v.counterexample.unwrap();
        assert!(robust_filter(&f, x, &caps).unwrap().contains(&open));
        let wrong = O2Map::new(
            f.domain().clone(),
            f.codomain().clone(),
            vec![UpFamily::full(); 2],
        )
        .unwrap();
        assert!(matches!(
            is_uniformly_universal(&f, &wrong, &caps),
            Err(Error::NotAnEnvelope(_))
        ));
    }

    #[test]
    fn composition_of_continuous_is_nu() {
        let caps = Caps::default();
        let c = arc(FinSpace::chain(&["a", "b", "c"]).unwrap());
        let s = arc(FinSpace::sierpinski());
        let f = PointMap::new(c.clone(), s.clone(), vec![0, 0, 1]).unwrap();
        let g = PointMap::new(s.clone(), c.clone(), vec![1, 2]).unwrap();
        let gf = compose_o2(
            &O2Map::nu_after(&g).unwrap(),
            &O2Map::nu_after(&f).unwrap(),
            &caps,
        )
        .unwrap();
        assert_eq!(gf, O2Map::nu_after(&f.then(&g).unwrap()).unwrap());
    }

    #[test]
    fn right_extension_single_point() {
        let caps = Caps::default();
        let pt = arc(FinSpace::point());
        let chain = arc(FinSpace::chain(&["0", "1", "2"]).unwrap());
        let l = ApproxSpace::new(
            Lattice::new(chain.clone()).unwrap(),
            PointMap::new(pt.clone(), chain.clone(), vec![1]).unwrap(),
        )
        .unwrap();
        let o2 = O2Space::new(&pt, &caps).unwrap();
        let m = ApproxSpace::o2(&o2).unwrap();
        let phi = right_extension(&l, &m).unwrap();
        let xi_m = m.xi().apply(0);
        assert_eq!(phi.assignment(), &[xi_m, xi_m, m.lattice().top()]);
    }

    #[test]
    fn rho_examples() {
        let caps = Caps::default();
        let d = arc(
            FinSpace::from_order(&["0", "a", "b", "1"], &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap(),
        );
        let l = Lattice::new(d.clone()).unwrap();
        for x in 0..4 {
            assert_eq!(rho(&l, &nu(&d, x)), x);
        }
        assert_eq!(rho(&l, &UpFamily::empty()), l.bottom());
        // Oracle: join over every open in the full family of its meet.
        let ol = opens(&d, &caps).unwrap();
        let all = l.join_all(ol.opens().iter().map(|u| l.meet_all(u.members().iter())));
        assert_eq!(rho(&l, &UpFamily::full()), all);
        assert_eq!(all, l.top());
    }

    #[test]
    fn o2_space_axioms_and_extension() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let o2 = O2Space::new(&s, &caps).unwrap();
        let us = o2_uniform_space(&o2).unwrap();
        let rep = check_uniform_axioms(&us, &caps).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
        assert_eq!(rep.ax3_scope, Axiom3Scope::All);
        let e = extension_e(&us, us.approx().lattice(), us.approx().xi()).unwrap();
        assert_eq!(e, PointMap::identity(o2.space().clone()));
    }

    #[test]
    fn broken_axiom_one() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let o2 = O2Space::new(&s, &caps).unwrap();
        let approx = ApproxSpace::o2(&o2).unwrap();
        // Send everything to the full family: above ν(y) everywhere.
        let u = vec![UpFamily::full(); o2.len()];
        let us = UniformApproxSpace::new(approx, u).unwrap();
        let rep = check_uniform_axioms(&us, &caps).unwrap();
        assert!(!rep.ax1.holds);
        assert_eq!(rep.ax1.counterexample, Some(0));
    }

    #[test]
    fn overt_examples() {
        let caps = Caps::default();
        let pt = arc(FinSpace::point());
        let ov = overt_uniform_space(&pt, &caps).unwrap();
        assert_eq!(ov.space.len(), 1);
        let d2 = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        let ov = overt_uniform_space(&d2, &caps).unwrap();
        assert_eq!(ov.space.len(), 3);
        for a in 0..ov.space.len() {
            assert_eq!(ov.j(&ov.i(a)), nu(&ov.space, a));
            // Oracle for i: filter all opens by intersection.
            let ol = opens(&d2, &caps).unwrap();
            let direct = UpFamily::from_generators(
                ol.opens()
                    .iter()
                    .map(|u| u.members())
                    .filter(|u| u.intersects(&ov.sets[a])),
            );
            assert_eq!(ov.i(a), direct);
        }
        let rep = check_uniform_axioms(&ov.uniform, &caps).unwrap();
        assert!(rep.ax1.holds && rep.ax2.holds, "{rep:?}");
        // j is principal-valued and does not preserve joins, so the third
        // axiom fails already on the empty family and on ν(𝒰) ∨ ν(𝒰').
        assert_eq!(rep.ax3.counterexample, Some(UpFamily::empty()));
        let o2 = &ov.o2;
        let (a, b) = (
            o2.index_of(&nu(&d2, 0)).unwrap(),
            o2.index_of(&nu(&d2, 1)).unwrap(),
        );
        let l = ov.uniform.approx().lattice();
        let joined = ov.j(o2.family(l.join(a, b)));
        let separate = ov.j(o2.family(a)).join(&ov.j(o2.family(b)));
        assert_ne!(joined, separate);
    }

    #[test]
    fn separation_examples() {
        let caps = Caps::default();
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        let rep =
            separated_regular_check(&ApproxSpace::o2(&O2Space::new(&d, &caps).unwrap()).unwrap());
        assert!(rep.separated.holds && rep.regular.holds);
        let s = arc(FinSpace::sierpinski());
        let rep =
            separated_regular_check(&ApproxSpace::o2(&O2Space::new(&s, &caps).unwrap()).unwrap());
        assert!(!rep.separated.holds);
    }

    #[test]
    fn pullback_examples() {
        let caps = Caps::default();
        let s = arc(FinSpace::sierpinski());
        let approx = ApproxSpace::o2(&O2Space::new(&s, &caps).unwrap()).unwrap();
        let id = PointMap::identity(s.clone());
        assert_eq!(pullback_approx(&id, &approx).unwrap().xi(), approx.xi());
        let k = PointMap::constant(s.clone(), s.clone(), 1).unwrap();
        let pb = pullback_approx(&k, &approx).unwrap();
        assert_eq!(pb.xi().apply(0), pb.xi().apply(1));
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        let bad = PointMap::new(s.clone(), d.clone(), vec![0, 1]).unwrap();
        let ad = ApproxSpace::o2(&O2Space::new(&d, &caps).unwrap()).unwrap();
        assert!(matches!(
            pullback_approx(&bad, &ad),
            Err(Error::NotContinuous(_))
        ));
    }

    #[test]
    fn kbot_shape() {
        let d = arc(FinSpace::discrete(&["0", "1"]).unwrap());
        let k = KBot::new(&d).unwrap();
        assert_eq!(k.lattice().len(), 5);
        assert_eq!(k.elem(k.lattice().bottom()), None);
        assert_eq!(k.elem(k.lattice().top()), Some(ElemSet::EMPTY));
        assert!(KBot::new(&arc(FinSpace::sierpinski())).is_err());
    }
}
