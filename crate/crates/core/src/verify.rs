//! Exhaustive property suites over the small-space corpus.
//!
//! Each suite walks every instance up to its size bound, counts the checks it
//! performs and keeps the first failure in corpus order. Instances are sharded
//! with rayon and merged in order, so reports do not depend on scheduling.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::ElemSet;
use crate::bundle::{
    advice_bundle, compose_coenvelopes, duality, duality_inv, greatest_lift, principal_coenvelope,
    AdviceBundle,
};
use crate::config::Caps;
use crate::corpus::{all_maps, continuous_maps, for_each_monotone, labeled_posets, spaces};
use crate::envelope::{
    check_uniform_axioms, compose_o2, exponential_approx, extension_e, is_uniformly_universal,
    o2_uniform_space, overt_uniform_space, principal_envelope, principal_o2_envelope,
    pullback_approx, right_extension, robust_filter, separated_regular_check, star, tightens,
    ApproxSpace, KBot, O2Map,
};
use crate::error::{Error, Result};
use crate::finspace::{
    double_star, double_star_o2, exponential, monotone_maps, mu, nu, opens, FinSpace, O2Space,
    O4Family, PointMap, UpFamily,
};
use crate::lattice::Lattice;

/// Suite names in the order they run.
pub const SUITES: [&str; 13] = [
    "basics",
    "monad-laws",
    "principal-oracle",
    "star-composition",
    "openness-theorem",
    "noetherian",
    "advice-bundles",
    "maximality",
    "uniform-axioms",
    "kbot",
    "separation",
    "general-composition",
    "duality",
];

/// Largest space size a suite enumerates, whatever the requested size.
fn size_bound(name: &str) -> usize {
    match name {
        "basics" | "maximality" => 4,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub requested_size: usize,
    pub effective_size: usize,
    pub instances: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Default, Clone)]
struct Tally {
    instances: u64,
    failures: u64,
    first: Option<String>,
    notes: Vec<String>,
    /// Suite-specific counters, summed on merge.
    aux: [u64; 2],
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.instances += other.instances;
        self.failures += other.failures;
        if self.first.is_none() {
            self.first = other.first;
        }
        self.notes.extend(other.notes);
        self.aux[0] += other.aux[0];
        self.aux[1] += other.aux[1];
    }
}

/// Runs `f` on every item in parallel and merges in item order. The first
/// error in item order wins.
fn sharded<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Tally> + Sync + Send) -> Result<Tally> {
    let parts: Vec<Result<Tally>> = items.par_iter().map(f).collect();
    let mut total = Tally::default();
    for p in parts {
        total.absorb(p?);
    }
    Ok(total)
}

fn space_desc(s: &FinSpace) -> String {
    let rel: Vec<String> = s
        .strict_pairs()
        .iter()
        .map(|&(a, b)| format!("{}<{}", s.name(a), s.name(b)))
        .collect();
    format!("{{{}|{}}}", s.names().join(","), rel.join(","))
}

fn map_desc(f: &PointMap) -> String {
    let d = f.domain();
    let parts: Vec<String> = (0..d.len())
        .map(|x| format!("{}->{}", d.name(x), f.codomain().name(f.apply(x))))
        .collect();
    format!(
        "{} -> {} [{}]",
        space_desc(d),
        space_desc(f.codomain()),
        parts.join(",")
    )
}

fn pairs_of(xs: &[Arc<FinSpace>], ys: &[Arc<FinSpace>]) -> Vec<(Arc<FinSpace>, Arc<FinSpace>)> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

fn int_pre(f: &PointMap, set: &ElemSet) -> ElemSet {
    f.domain().interior_set(&f.preimage(set))
}

/// All monotone maps `x → O²(y)`, as O²-valued maps.
fn o2_maps(x: &Arc<FinSpace>, o2: &O2Space) -> Result<Vec<O2Map>> {
    monotone_maps(x, o2.space(), usize::MAX)?
        .into_iter()
        .map(|m| {
            let values = m.iter().map(|&i| o2.family(i).clone()).collect();
            O2Map::new(x.clone(), o2.base().clone(), values)
        })
        .collect()
}

fn lattices(max: usize) -> Vec<Lattice> {
    (1..=max)
        .flat_map(labeled_posets)
        .filter_map(|s| Lattice::new(Arc::new(s)).ok())
        .collect()
}

fn discrete(n: usize) -> Arc<FinSpace> {
    Arc::new(
        labeled_posets(n)
            .into_iter()
            .find(FinSpace::is_discrete)
            .expect("the antichain is a poset"),
    )
}

/// Runs the named suites (all of them when `names` is empty).
pub fn verify_corpus(max_size: usize, names: &[String], caps: &Caps) -> Result<Vec<SuiteReport>> {
    if !(1..=4).contains(&max_size) {
        return Err(Error::Mismatch(format!(
            "max size must be 1..=4, got {max_size}"
        )));
    }
    for n in names {
        if !SUITES.contains(&n.as_str()) {
            return Err(Error::UnknownName(n.clone()));
        }
    }
    SUITES
        .iter()
        .filter(|s| names.is_empty() || names.iter().any(|n| n == *s))
        .map(|s| run_suite(s, max_size, caps))
        .collect()
}

pub fn run_suite(name: &str, max_size: usize, caps: &Caps) -> Result<SuiteReport> {
    let n = max_size.min(size_bound(name));
    let t = match name {
        "basics" => basics(n, caps),
        "monad-laws" => monad_laws(n, caps),
        "principal-oracle" => principal_oracle(n, caps),
        "star-composition" => star_composition(n, caps),
        "openness-theorem" => openness_theorem(n),
        "noetherian" => noetherian(n, caps),
        "advice-bundles" => advice_bundles(n, caps),
        "maximality" => maximality(n),
        "uniform-axioms" => uniform_axioms(n, caps),
        "kbot" => kbot(n, caps),
        "separation" => separation(n, caps),
        "general-composition" => general_composition(n, caps),
        "duality" => duality_suite(n, caps),
        other => return Err(Error::UnknownName(other.to_string())),
    }?;
    Ok(SuiteReport {
        name: name.to_string(),
        requested_size: max_size,
        effective_size: n,
        instances: t.instances,
        failures: t.failures,
        first_failure: t.first,
        notes: t.notes,
    })
}

/// Opens, interiors, closures, map classification, `ν` and evaluation.
fn basics(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let mut t = sharded(&all, |s| {
        let mut t = Tally::default();
        let subsets: Vec<ElemSet> = (0..1usize << s.len())
            .map(|m| (0..s.len()).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        let up_sets = subsets
            .iter()
            .filter(|set| {
                set.iter()
                    .all(|a| (0..s.len()).all(|b| !s.le(a, b) || set.contains(b)))
            })
            .count();
        t.check(opens(s, caps)?.len() == up_sets, || {
            format!("opens count of {}", space_desc(s))
        });
        for set in &subsets {
            let expected: ElemSet = set.iter().filter(|&a| s.up(a).is_subset(set)).collect();
            t.check(s.interior_set(set) == expected, || {
                format!("interior of {} in {}", s.render_set(set), space_desc(s))
            });
            t.check(s.closure_set(set) == s.down_closure(set), || {
                format!("closure of {} in {}", s.render_set(set), space_desc(s))
            });
        }
        if s.len() <= 3 {
            let nu_map = O2Space::new(s, caps)?.nu_map();
            let injective =
                (0..s.len()).all(|a| (0..a).all(|b| nu_map.apply(a) != nu_map.apply(b)));
            t.check(nu_map.is_continuous() && injective, || {
                format!("nu on {}", space_desc(s))
            });
        }
        Ok(t)
    })?;
    let small = spaces(n.min(3));
    t.absorb(sharded(&pairs_of(&small, &small), |(x, y)| {
        let mut t = Tally::default();
        let y_opens = opens(y, caps)?;
        let x_opens = opens(x, caps)?;
        for f in all_maps(x, y) {
            let cont = y_opens
                .opens()
                .iter()
                .all(|v| x.is_up_set(&f.preimage(&v.members())));
            let open = x_opens
                .opens()
                .iter()
                .all(|u| y.is_up_set(&f.image(&u.members())));
            t.check(f.is_continuous() == cont && f.is_open_map() == open, || {
                format!("classification of {}", map_desc(&f))
            });
        }
        Ok(t)
    })?);
    let tiny = spaces(n.min(2));
    t.absorb(sharded(&pairs_of(&tiny, &tiny), |(z, y)| {
        let mut t = Tally::default();
        let exp = exponential(z, y, caps)?;
        let prod = Arc::new(exp.space.product(z)?);
        let m = z.len();
        let eval = (0..prod.len()).map(|k| exp.maps[k / m][k % m]).collect();
        let eval = PointMap::new(prod, y.clone(), eval)?;
        t.check(eval.is_continuous(), || {
            format!("evaluation {}^{}", space_desc(y), space_desc(z))
        });
        Ok(t)
    })?);
    Ok(t)
}

/// Unit and multiplication laws of the double powerspace monad, functoriality
/// of `**`, naturality of `ν`, and the Kleisli laws.
fn monad_laws(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let mut t = sharded(&all, |y| {
        let mut t = Tally::default();
        let o2 = O2Space::new(y, caps)?;
        let nus: Vec<UpFamily> = (0..y.len()).map(|p| nu(y, p)).collect();
        let id = PointMap::identity(y.clone());
        for fam in o2.families() {
            let r = fam.render(y);
            t.check(mu(y, &O4Family::unit(fam), caps)? == *fam, || {
                format!("mu after nu_O2 at {r} on {}", space_desc(y))
            });
            t.check(mu(y, &double_star_o2(&nus, fam), caps)? == *fam, || {
                format!("mu after nu** at {r} on {}", space_desc(y))
            });
            t.check(double_star(&id, fam)? == *fam, || {
                format!("id** at {r} on {}", space_desc(y))
            });
        }
        Ok(t)
    })?;
    t.absorb(sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        for f in continuous_maps(x, y) {
            for p in 0..x.len() {
                t.check(double_star(&f, &nu(x, p))? == nu(y, f.apply(p)), || {
                    format!("naturality of nu for {} at {}", map_desc(&f), x.name(p))
                });
            }
        }
        Ok(t)
    })?);

    let tiny = spaces(n.min(2));
    let triples: Vec<_> = pairs_of(&tiny, &tiny)
        .into_iter()
        .flat_map(|(x, y)| tiny.iter().map(move |z| (x.clone(), y.clone(), z.clone())))
        .collect();
    t.absorb(sharded(&triples, |(x, y, z)| {
        let mut t = Tally::default();
        let o2x = O2Space::new(x, caps)?;
        for f in continuous_maps(x, y) {
            for g in continuous_maps(y, z) {
                let gf = f.then(&g)?;
                for fam in o2x.families() {
                    let lhs = double_star(&gf, fam)?;
                    let rhs = double_star(&g, &double_star(&f, fam)?)?;
                    t.check(lhs == rhs, || {
                        format!("(g.f)** with f = {}, g = {}", map_desc(&f), map_desc(&g))
                    });
                }
            }
        }
        Ok(t)
    })?);

    // Kleisli units on every continuous O²-valued map.
    t.absorb(sharded(&pairs_of(&tiny, &tiny), |(x, y)| {
        let mut t = Tally::default();
        let nu_y = O2Map::nu_after(&PointMap::identity(y.clone()))?;
        let nu_x = O2Map::nu_after(&PointMap::identity(x.clone()))?;
        for big_f in o2_maps(x, &O2Space::new(y, caps)?)? {
            t.check(compose_o2(&nu_y, &big_f, caps)? == big_f, || {
                "nu . F = F".into()
            });
            // Here the map is read as G: X → O²(Y), precomposed with ν_X.
            t.check(compose_o2(&big_f, &nu_x, caps)? == big_f, || {
                "G . nu = G".into()
            });
        }
        Ok(t)
    })?);

    // Kleisli associativity on envelope-shaped maps.
    let quads: Vec<_> = triples
        .iter()
        .flat_map(|(x, y, z)| {
            tiny.iter()
                .map(move |w| (x.clone(), y.clone(), z.clone(), w.clone()))
        })
        .collect();
    let family_maps = |a: &Arc<FinSpace>, b: &Arc<FinSpace>| -> Result<Vec<O2Map>> {
        let mut out: Vec<O2Map> = all_maps(a, b)
            .iter()
            .map(|f| principal_o2_envelope(f).map().clone())
            .collect();
        for f in continuous_maps(a, b) {
            out.push(O2Map::nu_after(&f)?);
        }
        out.push(O2Map::new(
            a.clone(),
            b.clone(),
            vec![UpFamily::empty(); a.len()],
        )?);
        Ok(out)
    };
    t.absorb(sharded(&quads, |(x, y, z, w)| {
        let mut t = Tally::default();
        let fs = family_maps(x, y)?;
        let gs = family_maps(y, z)?;
        let hs = family_maps(z, w)?;
        for f in &fs {
            for g in &gs {
                let gf = compose_o2(g, f, caps)?;
                for h in &hs {
                    let left = compose_o2(&compose_o2(h, g, caps)?, f, caps)?;
                    let right = compose_o2(h, &gf, caps)?;
                    t.check(left == right, || {
                        format!(
                            "associativity over {} {} {} {}",
                            space_desc(x),
                            space_desc(y),
                            space_desc(z),
                            space_desc(w)
                        )
                    });
                }
            }
        }
        Ok(t)
    })?);
    Ok(t)
}

/// The closed-form principal O² envelope is the greatest monotone map below
/// `ν ∘ f`, found by enumerating all of them.
fn principal_oracle(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        let o2 = O2Space::new(y, caps)?;
        let l = o2.space();
        for f in all_maps(x, y) {
            let bound: Vec<usize> = (0..x.len())
                .map(|p| o2.index_of(&nu(y, f.apply(p))).expect("nu lies in O²"))
                .collect();
            let env = principal_o2_envelope(&f).map().indices(&o2)?;
            let allowed: Vec<ElemSet> = bound.iter().map(|&b| l.down(b)).collect();
            let (mut below, mut attained) = (true, false);
            for_each_monotone(x, l, &allowed, |g| {
                below &= (0..x.len()).all(|p| l.le(g[p], env[p]));
                attained |= g == env.as_slice();
            });
            t.check(below && attained, || {
                format!("principal envelope of {}", map_desc(&f))
            });
        }
        Ok(t)
    })
}

/// `star(G∙F) = star(F) ∘ star(G)`, and `G∙F` agrees with `μ ∘ G** ∘ F`.
fn star_composition(n: usize, caps: &Caps) -> Result<Tally> {
    let tiny = spaces(n.min(2));
    let triples: Vec<_> = pairs_of(&tiny, &tiny)
        .into_iter()
        .flat_map(|(x, y)| tiny.iter().map(move |z| (x.clone(), y.clone(), z.clone())))
        .collect();
    let mut t = sharded(&triples, |(x, y, z)| {
        let fs = o2_maps(x, &O2Space::new(y, caps)?)?;
        let gs = o2_maps(y, &O2Space::new(z, caps)?)?;
        check_star_pairs(&fs, &gs, caps)
    })?;
    // Envelopes of arbitrary maps between spaces of up to three points.
    let all = spaces(n);
    let small = spaces(n.min(2));
    let triples: Vec<_> = pairs_of(&all, &all)
        .into_iter()
        .flat_map(|(x, y)| small.iter().map(move |z| (x.clone(), y.clone(), z.clone())))
        .collect();
    t.absorb(sharded(&triples, |(x, y, z)| {
        let fs: Vec<O2Map> = all_maps(x, y)
            .iter()
            .map(|f| principal_o2_envelope(f).map().clone())
            .collect();
        let gs: Vec<O2Map> = all_maps(y, z)
            .iter()
            .map(|g| principal_o2_envelope(g).map().clone())
            .collect();
        check_star_pairs(&fs, &gs, caps)
    })?);
    Ok(t)
}

fn check_star_pairs(fs: &[O2Map], gs: &[O2Map], caps: &Caps) -> Result<Tally> {
    let mut t = Tally::default();
    for g in gs {
        let sg = star(g, caps)?;
        for f in fs {
            let c = compose_o2(g, f, caps)?;
            let sc = star(&c, caps)?;
            let sf = star(f, caps)?;
            let ok = (0..sg.rows().len()).all(|w| sf.row(&sg.row_at(w)) == Some(sc.row_at(w)));
            t.check(ok, || {
                format!(
                    "star of composite over {} -> {} -> {}",
                    space_desc(f.domain()),
                    space_desc(g.domain()),
                    space_desc(g.base())
                )
            });
            let z = g.base();
            let mut monadic = true;
            for (x, fx) in f.values().iter().enumerate() {
                monadic &= mu(z, &double_star_o2(g.values(), fx), caps)? == *c.value(x);
            }
            t.check(monadic, || {
                format!(
                    "composite vs mu . G** over {} -> {} -> {}",
                    space_desc(f.domain()),
                    space_desc(g.domain()),
                    space_desc(z)
                )
            });
        }
    }
    Ok(t)
}

fn opens_list(s: &FinSpace) -> Vec<ElemSet> {
    crate::finspace::enumerate_up_sets(s)
}

/// `int f⁻¹ ∘ int g⁻¹ ⊆ int (g∘f)⁻¹`, with equality for all `g` exactly
/// when `f` is open, and for all `f` exactly when `g` is continuous.
fn openness_theorem(n: usize) -> Result<Tally> {
    let all = spaces(n);
    let small = spaces(n.min(2));
    let sigma = Arc::new(FinSpace::sierpinski());
    let d2 = Arc::new(FinSpace::discrete(&["0", "1"])?);
    let tests = [sigma.clone(), d2.clone()];
    let eq_for = |f: &PointMap, g: &PointMap, ws: &[ElemSet]| -> Result<bool> {
        let gf = f.then(g)?;
        Ok(ws
            .iter()
            .all(|w| int_pre(f, &int_pre(g, w)) == int_pre(&gf, w)))
    };

    let mut t = sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        for f in all_maps(x, y) {
            for z in small.iter() {
                let ws = opens_list(z);
                for g in all_maps(y, z) {
                    let gf = f.then(&g)?;
                    let ok = ws
                        .iter()
                        .all(|w| int_pre(&f, &int_pre(&g, w)).is_subset(&int_pre(&gf, w)));
                    t.check(ok, || {
                        format!("inclusion for f = {}, g = {}", map_desc(&f), map_desc(&g))
                    });
                }
            }
            for z in &tests {
                let ws = opens_list(z);
                let mut all_eq = true;
                for g in all_maps(y, z) {
                    all_eq &= eq_for(&f, &g, &ws)?;
                }
                t.check(all_eq == f.is_open_map(), || {
                    format!("openness of {} tested into {}", map_desc(&f), space_desc(z))
                });
            }
            t.aux[0] += u64::from(!f.is_open_map());
        }
        Ok(t)
    })?;

    t.absorb(sharded(&pairs_of(&all, &all), |(y, z)| {
        let mut t = Tally::default();
        let ws = opens_list(z);
        for g in all_maps(y, z) {
            for x in all.iter() {
                let mut all_eq = true;
                for f in all_maps(x, y) {
                    all_eq &= eq_for(&f, &g, &ws)?;
                }
                t.check(all_eq == g.is_continuous(), || {
                    format!(
                        "continuity of {} tested from {}",
                        map_desc(&g),
                        space_desc(x)
                    )
                });
            }
        }
        Ok(t)
    })?);

    // f: discrete{0,1} → Σ with 0 ↦ ⊥, 1 ↦ ⊤, and g: Σ → discrete{0,1} the
    // bijection; at W = {0} the left side is empty while int (g∘f)⁻¹(W) = {0}.
    let f = PointMap::new(d2.clone(), sigma.clone(), vec![0, 1])?;
    let g = PointMap::new(sigma, d2.clone(), vec![0, 1])?;
    let w = ElemSet::singleton(0);
    let lhs = int_pre(&f, &int_pre(&g, &w));
    let rhs = int_pre(&f.then(&g)?, &w);
    t.check(lhs.is_empty() && rhs == ElemSet::singleton(0), || {
        "discrete{0,1} -> Sigma witness".into()
    });
    t.notes
        .push(format!("non-open maps exercised: {}", t.aux[0]));
    t.notes.push(format!(
        "witness f = {}, g = {}, W = {{0}}: int f^-1 int g^-1 W = {}, int (g.f)^-1 W = {}",
        map_desc(&f),
        map_desc(&g),
        d2.render_set(&lhs),
        d2.render_set(&rhs)
    ));
    Ok(t)
}

/// Every principal O² envelope of a finite map is uniformly universal.
fn noetherian(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        for f in all_maps(x, y) {
            let env = principal_o2_envelope(&f);
            let verdict = is_uniformly_universal(&f, env.map(), caps)?;
            t.check(verdict.holds, || {
                format!("universality of {}", map_desc(&f))
            });
            let mut robust = true;
            for p in 0..x.len() {
                for v in robust_filter(&f, p, caps)? {
                    robust &= env.value(p).contains(&v.members());
                }
            }
            t.check(robust == verdict.holds, || {
                format!("robust filter vs star table for {}", map_desc(&f))
            });
        }
        Ok(t)
    })
}

fn check_bundle(f: &PointMap, ab: &AdviceBundle, t: &mut Tally) -> Result<()> {
    let rel = &ab.rel;
    let closed = rel.pairs.iter().enumerate().all(|(a, &(_, v))| {
        let u = rel
            .x_opens
            .index_of_set(&int_pre(f, &rel.y_opens.get(v).members()))
            .expect("interior is open");
        rel.index_of(u, v) == Some(ab.pf[a])
    });
    t.check(closed, || format!("P_f closed form for {}", map_desc(f)));
    let fib = rel.fibres();
    let idem = (0..rel.len()).all(|a| ab.pf[ab.pf[a]] == ab.pf[a] && fib[ab.pf[a]] == fib[a]);
    t.check(idem, || {
        format!("P_f idempotent and fibred for {}", map_desc(f))
    });
    t.check(ab.iso_oy, || format!("A_f iso O(Y) for {}", map_desc(f)));
    let co = principal_coenvelope(f, &ab.bundle)?;
    t.check(co.table() == ab.pi_x().as_slice(), || {
        format!("principal co-envelope is pi_X for {}", map_desc(f))
    });
    if rel.len() <= 12 {
        let l = rel.lattice.space();
        let allowed: Vec<ElemSet> = (0..rel.len())
            .map(|a| (0..rel.len()).filter(|&b| fib[b] == fib[a]).collect())
            .collect();
        let (mut below, mut attained) = (true, false);
        for_each_monotone(l, l, &allowed, |p| {
            below &= (0..p.len()).all(|a| l.le(p[a], ab.pf[a]));
            attained |= p == ab.pf.as_slice();
        });
        t.check(below && attained, || {
            format!("P_f vs enumeration for {}", map_desc(f))
        });
    }
    Ok(())
}

/// `P_f` against its closed form and against exhaustive enumeration.
fn advice_bundles(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        for f in all_maps(x, y) {
            let ab = advice_bundle(&f, caps)?;
            check_bundle(&f, &ab, &mut t)?;
        }
        Ok(t)
    })
}

/// Right extensions and greatest lifts against enumeration.
fn maximality(n: usize) -> Result<Tally> {
    let lats = lattices(n);
    let ys = spaces(n.min(2));
    let lat_pairs: Vec<(&Lattice, &Lattice)> = lats
        .iter()
        .flat_map(|l| lats.iter().map(move |m| (l, m)))
        .collect();
    let mut t = sharded(&lat_pairs, |&(l, m)| {
        let mut t = Tally::default();
        let (ls, ms) = (l.space(), m.space());
        let phis = monotone_maps(ls, ms, usize::MAX)?;
        for y in &ys {
            let xl = monotone_maps(y, ls, usize::MAX)?;
            let xm = monotone_maps(y, ms, usize::MAX)?;
            for a in &xl {
                let la =
                    ApproxSpace::new(l.clone(), PointMap::new(y.clone(), ls.clone(), a.clone())?)?;
                for b in &xm {
                    let mb = ApproxSpace::new(
                        m.clone(),
                        PointMap::new(y.clone(), ms.clone(), b.clone())?,
                    )?;
                    let phi = right_extension(&la, &mb)?;
                    let phi = phi.assignment();
                    let mut ok = true;
                    let mut attained = false;
                    for cand in &phis {
                        if (0..y.len()).all(|p| m.le(cand[a[p]], b[p])) {
                            ok &= (0..l.len()).all(|k| m.le(cand[k], phi[k]));
                            attained |= cand.as_slice() == phi;
                        }
                    }
                    t.check(ok && attained, || {
                        format!(
                            "right extension over {} from {} to {}",
                            space_desc(y),
                            space_desc(ls),
                            space_desc(ms)
                        )
                    });
                }
            }
        }
        Ok(t)
    })?;

    t.absorb(sharded(&lat_pairs, |&(c, b)| {
        let mut t = Tally::default();
        let (cs, bs) = (c.space(), b.space());
        for rho in monotone_maps(cs, bs, usize::MAX)? {
            let joins = rho[c.bottom()] == b.bottom()
                && (0..c.len())
                    .all(|p| (0..c.len()).all(|q| rho[c.join(p, q)] == b.join(rho[p], rho[q])));
            if !joins {
                continue;
            }
            let sigma: Vec<usize> = (0..b.len())
                .map(|v| c.join_all((0..c.len()).filter(|&k| b.le(rho[k], v))))
                .collect();
            if (0..b.len()).any(|v| rho[sigma[v]] != v) {
                continue;
            }
            for a in &ys {
                for phi in monotone_maps(a, bs, usize::MAX)? {
                    let phi_map = PointMap::new(a.clone(), bs.clone(), phi.clone())?;
                    let lift = greatest_lift(c, b, &rho, &sigma, &phi_map)?;
                    let lift = lift.assignment();
                    let allowed: Vec<ElemSet> = phi
                        .iter()
                        .map(|&v| (0..c.len()).filter(|&k| rho[k] == v).collect())
                        .collect();
                    let (mut below, mut attained) = (true, false);
                    for_each_monotone(a, cs, &allowed, |cand| {
                        below &= (0..cand.len()).all(|k| c.le(cand[k], lift[k]));
                        attained |= cand == lift;
                    });
                    t.check(below && attained, || {
                        format!(
                            "greatest lift into {} over {}",
                            space_desc(cs),
                            space_desc(bs)
                        )
                    });
                }
            }
        }
        Ok(t)
    })?);
    Ok(t)
}

/// Axioms for `(O²(Y), id)` and for the overt-subsets space, plus the
/// contract of `E`.
fn uniform_axioms(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let small_lats = lattices(n.min(3));
    sharded(&all, |y| {
        let mut t = Tally::default();
        let o2 = O2Space::new(y, caps)?;
        let us = o2_uniform_space(&o2)?;
        let rep = check_uniform_axioms(&us, caps)?;
        t.check(rep.all_hold(), || {
            format!("axioms of O2 on {}", space_desc(y))
        });
        let l = us.approx().lattice();
        let e = extension_e(&us, l, &o2.nu_map())?;
        t.check((0..l.len()).all(|k| e.apply(k) == k), || {
            format!("E(nu) = id on {}", space_desc(y))
        });
        for m in &small_lats {
            for phi in continuous_maps(y, m.space()) {
                let e = extension_e(&us, m, &phi)?;
                let xi = us.approx().xi();
                t.check(
                    (0..y.len()).all(|p| m.le(e.apply(xi.apply(p)), phi.apply(p))),
                    || format!("E(phi) . xi <= phi for {}", map_desc(&phi)),
                );
            }
        }

        let ov = overt_uniform_space(y, caps)?;
        let rep = check_uniform_axioms(&ov.uniform, caps)?;
        t.check(rep.ax1.holds, || {
            format!("overt axiom 1 on {}", space_desc(y))
        });
        t.check(rep.ax2.holds, || {
            format!("overt axiom 2 on {}", space_desc(y))
        });
        let ji = (0..ov.sets.len()).all(|a| ov.j(&ov.i(a)) == nu(&ov.space, a));
        t.check(ji, || format!("overt j . i = nu on {}", space_desc(y)));
        t.check(rep.ax3.holds, || {
            format!(
                "overt axiom 3 on {} at {} (scope {}, {} families)",
                space_desc(y),
                rep.ax3
                    .counterexample
                    .as_ref()
                    .map_or_else(String::new, |c| c.render(o2.space())),
                rep.ax3_scope.as_str(),
                rep.ax3_checked
            )
        });
        Ok(t)
    })
}

/// The `K_⊥` model on discrete spaces.
fn kbot(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let ds: Vec<Arc<FinSpace>> = (1..=n).map(discrete).collect();
    let mut t = sharded(&pairs_of(&all, &ds), |(x, y)| {
        let mut t = Tally::default();
        let kb = KBot::new(y)?;
        let approx = kb.approx()?;
        for f in all_maps(x, y) {
            let g = principal_envelope(&f, &approx)?;
            let big_f = principal_o2_envelope(&f);
            let ok = (0..x.len()).all(|p| {
                let meet = big_f
                    .value(p)
                    .generators()
                    .iter()
                    .fold(y.all(), |acc, u| acc.intersection(u));
                kb.elem(g.value(p)) == Some(meet)
            });
            t.check(ok, || format!("K_bot envelope of {}", map_desc(&f)));
        }
        Ok(t)
    })?;

    let xs = spaces(n.min(2));
    let zs: Vec<Arc<FinSpace>> = (1..=n.min(2)).map(discrete).collect();
    let cases: Vec<_> = pairs_of(&xs, &ds)
        .into_iter()
        .flat_map(|(x, y)| zs.iter().map(move |z| (x.clone(), y.clone(), z.clone())))
        .collect();
    t.absorb(sharded(&cases, |(x, y, z)| {
        let mut t = Tally::default();
        let (ky, kz) = (KBot::new(y)?, KBot::new(z)?);
        let i_map = |k: &KBot, dom: &Arc<FinSpace>, vals: &[usize]| {
            O2Map::new(
                dom.clone(),
                k.base().clone(),
                vals.iter().map(|&v| k.i(v)).collect(),
            )
        };
        let fs = monotone_maps(x, ky.lattice().space(), usize::MAX)?;
        let gs = monotone_maps(y, kz.lattice().space(), usize::MAX)?;
        for g in &gs {
            let ig = i_map(&kz, y, g)?;
            for f in &fs {
                let direct = KBot::kleisli(g, &kz, f, &ky);
                let lhs = i_map(&kz, x, &direct)?;
                let rhs = compose_o2(&ig, &i_map(&ky, x, f)?, caps)?;
                t.check(lhs == rhs, || {
                    format!(
                        "K_bot Kleisli over {} -> {} -> {}",
                        space_desc(x),
                        space_desc(y),
                        space_desc(z)
                    )
                });
            }
        }
        Ok(t)
    })?);
    Ok(t)
}

/// Regularity straight from the interpolation definition.
fn regular_by_definition(approx: &ApproxSpace, caps: &Caps) -> Result<bool> {
    let (y, l) = (approx.base(), approx.lattice());
    let lo = opens(l.space(), caps)?;
    let xi = approx.xi();
    for p in 0..l.len() {
        for v in lo.opens().iter().filter(|v| v.contains(p)) {
            let target = xi.preimage(&v.members());
            let found = lo
                .opens()
                .iter()
                .filter(|u| u.contains(p))
                .any(|u| y.closure_set(&xi.preimage(&u.members())).is_subset(&target));
            if !found {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Separation of `ν_Y`, the regularity shortcut, pullbacks and exponentials.
fn separation(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let mut t = sharded(&all, |y| {
        let mut t = Tally::default();
        let o2 = O2Space::new(y, caps)?;
        let approx = ApproxSpace::o2(&o2)?;
        let rep = separated_regular_check(&approx);
        t.check(rep.separated.holds == y.is_discrete(), || {
            format!("separated iff discrete on {}", space_desc(y))
        });
        if approx.lattice().len() <= caps.opens {
            t.check(
                rep.regular.holds == regular_by_definition(&approx, caps)?,
                || format!("regularity by definition on {}", space_desc(y)),
            );
        }
        Ok(t)
    })?;

    let regular_on = |y: &Arc<FinSpace>| -> Result<Vec<ApproxSpace>> {
        let mut out = Vec::new();
        let o2 = O2Space::new(y, caps)?;
        let nu_approx = ApproxSpace::o2(&o2)?;
        let l = nu_approx.lattice().clone();
        let bottom = PointMap::constant(y.clone(), l.space().clone(), l.bottom())?;
        out.push(ApproxSpace::new(l, bottom)?);
        out.push(nu_approx);
        if y.is_discrete() {
            out.push(KBot::new(y)?.approx()?);
        }
        Ok(out
            .into_iter()
            .filter(|a| separated_regular_check(a).regular.holds)
            .collect())
    };
    t.absorb(sharded(&pairs_of(&all, &all), |(x, y)| {
        let mut t = Tally::default();
        let regs = regular_on(y)?;
        for g in continuous_maps(x, y) {
            for a in &regs {
                let pb = pullback_approx(&g, a)?;
                t.check(separated_regular_check(&pb).regular.holds, || {
                    format!("pullback along {}", map_desc(&g))
                });
            }
        }
        Ok(t)
    })?);
    let tiny = spaces(n.min(2));
    t.absorb(sharded(&pairs_of(&tiny, &tiny), |(y, z)| {
        let mut t = Tally::default();
        for a in regular_on(y)? {
            let e = exponential_approx(&a, z, caps)?;
            t.check(separated_regular_check(&e).regular.holds, || {
                format!("regular exponential {}^{}", space_desc(y), space_desc(z))
            });
        }
        Ok(t)
    })?);
    Ok(t)
}

/// Co-envelope composition against the principal co-envelope of `g ∘ f`
/// under each hypothesis of the composition theorem.
fn general_composition(n: usize, caps: &Caps) -> Result<Tally> {
    let all = spaces(n);
    let zs = spaces(n.min(2));
    let cases: Vec<_> = pairs_of(&all, &all)
        .into_iter()
        .flat_map(|(x, y)| zs.iter().map(move |z| (x.clone(), y.clone(), z.clone())))
        .collect();
    let mut t = sharded(&cases, |(x, y, z)| {
        let mut t = Tally::default();
        let fs: Vec<(PointMap, AdviceBundle)> = all_maps(x, y)
            .into_iter()
            .map(|f| advice_bundle(&f, caps).map(|b| (f, b)))
            .collect::<Result<_>>()?;
        let gs: Vec<(PointMap, AdviceBundle)> = all_maps(y, z)
            .into_iter()
            .map(|g| advice_bundle(&g, caps).map(|b| (g, b)))
            .collect::<Result<_>>()?;
        let ws = opens_list(z);
        for (f, bf) in &fs {
            let co_f = principal_coenvelope(f, &bf.bundle)?;
            for (g, bg) in &gs {
                let co_g = principal_coenvelope(g, &bg.bundle)?;
                let composed = compose_coenvelopes(&co_f, &co_g)?;
                let gf = f.then(g)?;
                let direct = principal_coenvelope(&gf, &bg.bundle)?;
                let equal = composed.table() == direct.table();
                let int_eq = ws
                    .iter()
                    .all(|w| int_pre(f, &int_pre(g, w)) == int_pre(&gf, w));
                let what = || format!("f = {}, g = {}", map_desc(f), map_desc(g));
                if f.is_open_map() {
                    t.check(equal, || format!("f open: {}", what()));
                }
                if g.is_continuous() {
                    t.check(equal, || format!("g continuous: {}", what()));
                }
                if int_eq {
                    t.check(equal, || format!("interior equality: {}", what()));
                }
                if !f.is_open_map() && !g.is_continuous() {
                    t.aux[0] += 1;
                    t.aux[1] += u64::from(!equal);
                }
            }
        }
        Ok(t)
    })?;
    t.notes.push(format!(
        "outside both hypotheses: {} pairs checked, {} with a different composite",
        t.aux[0], t.aux[1]
    ));
    Ok(t)
}

/// Duality followed by its inverse tightens both ways with the original.
fn duality_suite(n: usize, caps: &Caps) -> Result<Tally> {
    let xs = spaces(n);
    let ys = spaces(n.min(2));
    sharded(&pairs_of(&xs, &ys), |(x, y)| {
        let mut t = Tally::default();
        let o2 = O2Space::new(y, caps)?;
        for f in all_maps(x, y) {
            let env = principal_o2_envelope(&f).to_envelope(&o2)?;
            let back = duality_inv(&duality(&env, caps)?, caps)?;
            let both = tightens(&env, &back)?.holds && tightens(&back, &env)?.holds;
            t.check(both, || format!("duality round trip for {}", map_desc(&f)));
        }
        Ok(t)
    })
}
