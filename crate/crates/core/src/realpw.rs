//! Exact piecewise-affine functions on the reals and their cluster-set
//! envelopes with values in finite sets of rationals.
//!
//! All arithmetic is over arbitrary-precision rationals.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::config::Caps;
use crate::error::{CapKind, Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::parse(format!("rational `{s}`"), "expected an integer or p/q");
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::parse(format!("rational `{s}`"), "zero denominator"));
    }
    Ok(Q::new(n, d))
}

/// `p` for integers, `p/q` in lowest terms otherwise.
pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `x ↦ slope·x + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Affine {
    pub slope: Q,
    pub intercept: Q,
}

impl Affine {
    pub fn new(slope: Q, intercept: Q) -> Self {
        Affine { slope, intercept }
    }

    pub fn constant(c: Q) -> Self {
        Affine::new(Q::zero(), c)
    }

    pub fn identity() -> Self {
        Affine::new(Q::one(), Q::zero())
    }

    pub fn eval(&self, x: &Q) -> Q {
        &self.slope * x + &self.intercept
    }

    pub fn is_constant(&self) -> bool {
        self.slope.is_zero()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Affine) -> Affine {
        Affine::new(
            &self.slope * &inner.slope,
            &self.slope * &inner.intercept + &self.intercept,
        )
    }

    /// The unique `x` with `self(x) = y`, for non-constant maps.
    pub fn solve(&self, y: &Q) -> Option<Q> {
        (!self.is_constant()).then(|| (y - &self.intercept) / &self.slope)
    }

    /// `x ↦ self(-x)`.
    fn reflected(&self) -> Affine {
        Affine::new(-&self.slope, self.intercept.clone())
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}*x+{}",
            format_q(&self.slope),
            format_q(&self.intercept)
        )
    }
}

/// Breakpoints `b_1 < … < b_k` with explicit values, and `k + 1` affine pieces
/// on the open intervals between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAFunction {
    breakpoints: Vec<(Q, Q)>,
    pieces: Vec<Affine>,
}

impl PAFunction {
    pub fn new(breakpoints: Vec<(Q, Q)>, pieces: Vec<Affine>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Mismatch(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Mismatch(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PAFunction {
            breakpoints,
            pieces,
        })
    }

    pub fn affine(h: Affine) -> Self {
        PAFunction {
            breakpoints: Vec::new(),
            pieces: vec![h],
        }
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    fn position(&self, x: &Q) -> Position {
        locate(self.breakpoints.iter().map(|(b, _)| b), x)
    }

    pub fn eval(&self, x: &Q) -> Q {
        match self.position(x) {
            Position::At(i) => self.breakpoints[i].1.clone(),
            Position::In(j) => self.pieces[j].eval(x),
        }
    }

    pub fn left_limit(&self, i: usize) -> Q {
        self.pieces[i].eval(&self.breakpoints[i].0)
    }

    pub fn right_limit(&self, i: usize) -> Q {
        self.pieces[i + 1].eval(&self.breakpoints[i].0)
    }

    pub fn is_continuous_at(&self, x: &Q) -> bool {
        match self.position(x) {
            Position::In(_) => true,
            Position::At(i) => {
                let v = &self.breakpoints[i].1;
                self.left_limit(i) == *v && self.right_limit(i) == *v
            }
        }
    }

    /// `x ↦ self(-x)`.
    fn reflected(&self) -> PAFunction {
        PAFunction {
            breakpoints: self
                .breakpoints
                .iter()
                .rev()
                .map(|(b, v)| (-b, v.clone()))
                .collect(),
            pieces: self.pieces.iter().rev().map(Affine::reflected).collect(),
        }
    }

    /// The branch in force just to the right (`right = true`) or left of `x`.
    fn side_branch(&self, x: &Q, right: bool) -> &Affine {
        match self.position(x) {
            Position::In(j) => &self.pieces[j],
            Position::At(i) => &self.pieces[if right { i + 1 } else { i }],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    At(usize),
    /// Open interval `j`, between breakpoints `j - 1` and `j`.
    In(usize),
}

fn locate<'a>(mut bps: impl Iterator<Item = &'a Q>, x: &Q) -> Position {
    let mut j = 0;
    loop {
        match bps.next() {
            None => return Position::In(j),
            Some(b) => match b.cmp(x) {
                Ordering::Less => j += 1,
                Ordering::Equal => return Position::At(j),
                Ordering::Greater => return Position::In(j),
            },
        }
    }
}

/// An element of `K_⊥(ℝ)` restricted to finite unions of closed rational
/// intervals; points are degenerate intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompactSet {
    Bottom,
    Parts(Vec<(Q, Q)>),
}

impl CompactSet {
    /// Disjoint sorted parts; overlapping or touching intervals are merged.
    pub fn from_intervals(mut parts: Vec<(Q, Q)>) -> Result<Self> {
        if parts.iter().any(|(a, b)| a > b) {
            return Err(Error::Mismatch(
                "interval with lower end above upper end".into(),
            ));
        }
        parts.sort();
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        Ok(CompactSet::Parts(out))
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Q>>(points: I) -> Self {
        let set: BTreeSet<&Q> = points.into_iter().collect();
        CompactSet::Parts(set.into_iter().map(|p| (p.clone(), p.clone())).collect())
    }

    pub fn contains(&self, x: &Q) -> bool {
        match self {
            CompactSet::Bottom => false,
            CompactSet::Parts(ps) => ps.iter().any(|(a, b)| a <= x && x <= b),
        }
    }

    /// Order of `K_⊥(ℝ)`: bottom is least, otherwise reverse inclusion.
    pub fn le(&self, other: &CompactSet) -> bool {
        match (self, other) {
            (CompactSet::Bottom, _) => true,
            (_, CompactSet::Bottom) => false,
            (CompactSet::Parts(_), CompactSet::Parts(qs)) => qs
                .iter()
                .all(|(a, b)| self.parts().iter().any(|(c, d)| c <= a && b <= d)),
        }
    }

    pub fn parts(&self) -> &[(Q, Q)] {
        match self {
            CompactSet::Bottom => &[],
            CompactSet::Parts(ps) => ps,
        }
    }

    pub fn is_inside(&self, v: &OpenUnion) -> bool {
        match self {
            CompactSet::Bottom => false,
            CompactSet::Parts(ps) => ps.iter().all(|(a, b)| v.contains_closed(a, b)),
        }
    }
}

/// One end of an open interval.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    Finite(Q),
    PosInf,
}

impl Bound {
    fn lt_q(&self, x: &Q) -> bool {
        match self {
            Bound::NegInf => true,
            Bound::Finite(a) => a < x,
            Bound::PosInf => false,
        }
    }

    fn gt_q(&self, x: &Q) -> bool {
        match self {
            Bound::NegInf => false,
            Bound::Finite(a) => a > x,
            Bound::PosInf => true,
        }
    }

    fn le_q(&self, x: &Q) -> bool {
        self.lt_q(x) || *self == Bound::Finite(x.clone())
    }

    fn ge_q(&self, x: &Q) -> bool {
        self.gt_q(x) || *self == Bound::Finite(x.clone())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("+inf"),
            Bound::Finite(q) => f.write_str(&format_q(q)),
        }
    }
}

/// A finite union of open intervals `(a, b)` with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenUnion {
    parts: Vec<(Bound, Bound)>,
}

impl OpenUnion {
    pub fn new(mut parts: Vec<(Bound, Bound)>) -> Result<Self> {
        if parts.iter().any(|(a, b)| a >= b) {
            return Err(Error::Mismatch("open interval must have a < b".into()));
        }
        parts.sort();
        Ok(OpenUnion { parts })
    }

    pub fn reals() -> Self {
        OpenUnion {
            parts: vec![(Bound::NegInf, Bound::PosInf)],
        }
    }

    pub fn above(v: Q) -> Self {
        OpenUnion {
            parts: vec![(Bound::Finite(v), Bound::PosInf)],
        }
    }

    pub fn below(v: Q) -> Self {
        OpenUnion {
            parts: vec![(Bound::NegInf, Bound::Finite(v))],
        }
    }

    /// `ℝ ∖ {v}`.
    pub fn punctured(v: Q) -> Self {
        OpenUnion {
            parts: vec![
                (Bound::NegInf, Bound::Finite(v.clone())),
                (Bound::Finite(v), Bound::PosInf),
            ],
        }
    }

    pub fn parts(&self) -> &[(Bound, Bound)] {
        &self.parts
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.parts.iter().any(|(a, b)| a.lt_q(x) && b.gt_q(x))
    }

    fn contains_closed(&self, lo: &Q, hi: &Q) -> bool {
        self.parts.iter().any(|(a, b)| a.lt_q(lo) && b.gt_q(hi))
    }

    /// Contains `(r, r + ε)` for some `ε > 0`.
    fn contains_right_of(&self, r: &Q) -> bool {
        self.parts.iter().any(|(a, b)| a.le_q(r) && b.gt_q(r))
    }

    /// Contains `(r - ε, r)` for some `ε > 0`.
    fn contains_left_of(&self, r: &Q) -> bool {
        self.parts.iter().any(|(a, b)| a.lt_q(r) && b.ge_q(r))
    }
}

impl fmt::Display for OpenUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        f.write_str(&parts.join("u"))
    }
}

/// An upper semicontinuous map `ℝ → K_⊥(ℝ)` with finite values: a finite set
/// of affine branches on each open piece and a finite value set at every
/// breakpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAEnvelope {
    breakpoints: Vec<Q>,
    at: Vec<BTreeSet<Q>>,
    pieces: Vec<BTreeSet<Affine>>,
}

impl PAEnvelope {
    pub fn new(
        breakpoints: Vec<Q>,
        at: Vec<BTreeSet<Q>>,
        pieces: Vec<BTreeSet<Affine>>,
    ) -> Result<Self> {
        if at.len() != breakpoints.len() || pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Mismatch(
                "envelope tables have the wrong shape".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Mismatch(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if at.iter().any(BTreeSet::is_empty) || pieces.iter().any(BTreeSet::is_empty) {
            return Err(Error::Mismatch("envelope values must be nonempty".into()));
        }
        Ok(PAEnvelope {
            breakpoints,
            at,
            pieces,
        }
        .canonical())
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn at(&self) -> &[BTreeSet<Q>] {
        &self.at
    }

    pub fn pieces(&self) -> &[BTreeSet<Affine>] {
        &self.pieces
    }

    fn position(&self, x: &Q) -> Position {
        locate(self.breakpoints.iter(), x)
    }

    pub fn values_at(&self, x: &Q) -> BTreeSet<Q> {
        match self.position(x) {
            Position::At(i) => self.at[i].clone(),
            Position::In(j) => self.pieces[j].iter().map(|h| h.eval(x)).collect(),
        }
    }

    pub fn value(&self, x: &Q) -> CompactSet {
        CompactSet::from_points(self.values_at(x).iter())
    }

    /// Drops breakpoints that carry no information: equal branch sets on both
    /// sides and a value set equal to their evaluations.
    fn canonical(self) -> Self {
        let PAEnvelope {
            breakpoints,
            at,
            pieces,
        } = self;
        let mut out_b = Vec::new();
        let mut out_at = Vec::new();
        let mut out_p: Vec<BTreeSet<Affine>> = vec![pieces[0].clone()];
        for (i, (b, vals)) in breakpoints.into_iter().zip(at).enumerate() {
            let right = &pieces[i + 1];
            let left = out_p.last().expect("at least one piece");
            let evals: BTreeSet<Q> = left.iter().map(|h| h.eval(&b)).collect();
            if left == right && evals == vals {
                continue;
            }
            out_b.push(b);
            out_at.push(vals);
            out_p.push(right.clone());
        }
        PAEnvelope {
            breakpoints: out_b,
            at: out_at,
            pieces: out_p,
        }
    }

    /// Envelope condition `f(x) ∈ F(x)` and upper semicontinuity: every
    /// one-sided branch limit at a breakpoint belongs to the value set there.
    pub fn is_envelope_of(&self, f: &PAFunction) -> bool {
        let mut probes: Vec<Q> = self.breakpoints.clone();
        probes.extend(f.breakpoints().iter().map(|(b, _)| b.clone()));
        probes.sort();
        probes.dedup();
        let contains_f = probes
            .iter()
            .all(|x| self.values_at(x).contains(&f.eval(x)))
            && interval_samples(&probes).iter().all(|x| {
                let fb = f.side_branch(x, true);
                let eb = self.position(x);
                match eb {
                    Position::In(j) => self.pieces[j].contains(fb),
                    Position::At(_) => unreachable!("samples avoid breakpoints"),
                }
            });
        let usc = (0..self.breakpoints.len()).all(|i| {
            let b = &self.breakpoints[i];
            self.pieces[i]
                .iter()
                .chain(self.pieces[i + 1].iter())
                .all(|h| self.at[i].contains(&h.eval(b)))
        });
        contains_f && usc
    }
}

/// One rational sample inside each open interval cut out by `points`.
fn interval_samples(points: &[Q]) -> Vec<Q> {
    if points.is_empty() {
        return vec![Q::zero()];
    }
    let mut out = vec![&points[0] - Q::one()];
    for w in points.windows(2) {
        out.push((&w[0] + &w[1]) / q(2));
    }
    out.push(points.last().unwrap() + Q::one());
    out
}

/// The best continuous approximation in `K_⊥(ℝ)`: `{f(x)}` at continuity
/// points and `{left limit, f(b), right limit}` at a breakpoint `b`.
pub fn cluster_envelope(f: &PAFunction) -> PAEnvelope {
    let breakpoints = f.breakpoints().iter().map(|(b, _)| b.clone()).collect();
    let at = (0..f.breakpoints().len())
        .map(|i| {
            [
                f.left_limit(i),
                f.breakpoints()[i].1.clone(),
                f.right_limit(i),
            ]
            .into_iter()
            .collect()
        })
        .collect();
    let pieces = f
        .pieces()
        .iter()
        .map(|h| BTreeSet::from([h.clone()]))
        .collect();
    PAEnvelope {
        breakpoints,
        at,
        pieces,
    }
    .canonical()
}

/// `(G∙F)(x) = ⋃_{y ∈ F(x)} G(y)`.
///
/// The composite is refined at the breakpoints of `F` and at the preimages of
/// the breakpoints of `G` under every non-constant branch of `F`.
pub fn kleisli_compose(g: &PAEnvelope, f: &PAEnvelope, caps: &Caps) -> Result<PAEnvelope> {
    let mut cuts: Vec<Q> = f.breakpoints.clone();
    for (j, branches) in f.pieces.iter().enumerate() {
        let lo = j.checked_sub(1).map(|i| &f.breakpoints[i]);
        let hi = f.breakpoints.get(j);
        for h in branches {
            for c in &g.breakpoints {
                if let Some(x) = h.solve(c) {
                    if lo.is_none_or(|lo| *lo < x) && hi.is_none_or(|hi| x < *hi) {
                        cuts.push(x);
                    }
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    let at: Vec<BTreeSet<Q>> = cuts
        .iter()
        .map(|x| f.values_at(x).iter().flat_map(|y| g.values_at(y)).collect())
        .collect();

    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    for sample in interval_samples(&cuts) {
        let Position::In(j) = f.position(&sample) else {
            unreachable!("samples avoid breakpoints of F")
        };
        let mut set = BTreeSet::new();
        for h in &f.pieces[j] {
            let y = h.eval(&sample);
            match g.position(&y) {
                Position::At(i) => {
                    // Only constant branches can sit on a breakpoint of G
                    // across a whole interval.
                    set.extend(g.at[i].iter().cloned().map(Affine::constant));
                }
                Position::In(m) => set.extend(g.pieces[m].iter().map(|k| k.after(h))),
            }
        }
        if set.len() > caps.branches {
            return Err(Error::cap(CapKind::Branches, set.len(), caps.branches));
        }
        pieces.push(set);
    }
    Ok(PAEnvelope {
        breakpoints: cuts,
        at,
        pieces,
    }
    .canonical())
}

/// Whether some `δ > 0` has `f((x0 - δ, x0 + δ)) ⊆ V`.
pub fn is_robust(f: &PAFunction, x0: &Q, v: &OpenUnion) -> bool {
    if !v.contains(&f.eval(x0)) {
        return false;
    }
    [true, false].into_iter().all(|right| {
        let h = f.side_branch(x0, right);
        let r = h.eval(x0);
        // Moving right, a positive slope approaches r from above.
        match h.slope.cmp(&Q::zero()) {
            Ordering::Equal => v.contains(&r),
            ord if (ord == Ordering::Greater) == right => v.contains_right_of(&r),
            _ => v.contains_left_of(&r),
        }
    })
}

/// A cluster value that is not attained near its breakpoint, with an open
/// set that is robust there yet excludes the value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub breakpoint: Q,
    pub value: Q,
    pub witness: OpenUnion,
}

/// Which side of `v` the values of `h` lie on just to one side of `b`:
/// `Greater` for above, `Less` for below. `h` must not be constant at `v`.
fn approach_side(h: &Affine, b: &Q, v: &Q, right: bool) -> Ordering {
    match h.eval(b).cmp(v) {
        Ordering::Equal => {
            if (h.slope.is_positive()) == right {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
        ord => ord,
    }
}

pub fn universality_defects(f: &PAFunction) -> Vec<Defect> {
    let env = cluster_envelope(f);
    let mut out = Vec::new();
    for (i, (b, fb)) in f.breakpoints().iter().enumerate() {
        let (left, right) = (&f.pieces()[i], &f.pieces()[i + 1]);
        let values = env.values_at(b);
        for v in values {
            let attained = v == *fb
                || (left.is_constant() && left.intercept == v)
                || (right.is_constant() && right.intercept == v);
            if attained {
                continue;
            }
            let sides = [
                fb.cmp(&v),
                approach_side(left, b, &v, false),
                approach_side(right, b, &v, true),
            ];
            let witness = if sides.iter().all(|&s| s == Ordering::Greater) {
                OpenUnion::above(v.clone())
            } else if sides.iter().all(|&s| s == Ordering::Less) {
                OpenUnion::below(v.clone())
            } else {
                OpenUnion::punctured(v.clone())
            };
            out.push(Defect {
                breakpoint: b.clone(),
                value: v,
                witness,
            });
        }
    }
    out
}

/// Default sentinel returned by [`local_modulus`] when every `δ` works.
pub fn default_max_delta() -> Q {
    q(1_000_000)
}

/// The largest `δ` with `f((x0, x0 + δ)) ⊆ (y0 - ε, y0 + ε)`, or `None` when
/// no bound applies. `f` must be continuous at `x0`.
fn right_radius(f: &PAFunction, x0: &Q, eps: &Q) -> Option<Q> {
    let y0 = f.eval(x0);
    let bad = |y: &Q| (y - &y0).abs() >= *eps;
    let mut start = x0.clone();
    let mut j = match f.position(x0) {
        Position::In(j) => j,
        Position::At(i) => i + 1,
    };
    loop {
        let h = &f.pieces()[j];
        if bad(&h.eval(&start)) && start != *x0 {
            return Some(&start - x0);
        }
        let end = f.breakpoints().get(j).map(|(b, _)| b.clone());
        let hits = [&y0 + eps, &y0 - eps]
            .iter()
            .filter_map(|t| h.solve(t))
            .filter(|x| *x > start && end.as_ref().is_none_or(|e| x < e))
            .min();
        if let Some(x) = hits {
            return Some(x - x0);
        }
        let end = end?;
        if bad(&f.breakpoints()[j].1) {
            return Some(end - x0);
        }
        start = end;
        j += 1;
    }
}

/// A `δ > 0` with `f((x0 - δ, x0 + δ)) ⊆ (f(x0) - ε, f(x0) + ε)`, or `None` at
/// a discontinuity. The returned `δ` is the exact supremum, which is rational
/// because every boundary is a root of an affine equation; when no bound
/// exists, `max_delta` is returned.
pub fn local_modulus(f: &PAFunction, x0: &Q, eps: &Q, max_delta: &Q) -> Option<Q> {
    assert!(eps.is_positive(), "epsilon must be positive");
    if !f.is_continuous_at(x0) {
        return None;
    }
    let right = right_radius(f, x0, eps);
    let left = right_radius(&f.reflected(), &-x0, eps);
    let d = [right, left, Some(max_delta.clone())]
        .into_iter()
        .flatten()
        .min()
        .expect("max_delta is always present");
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_f() -> PAFunction {
        PAFunction::new(
            vec![(q(0), q(0))],
            vec![Affine::new(q(-1), q(0)), Affine::constant(q(1))],
        )
        .unwrap()
    }

    fn example_g() -> PAFunction {
        PAFunction::new(
            vec![(q(0), q(1))],
            vec![Affine::new(q(-1), q(0)), Affine::constant(q(1))],
        )
        .unwrap()
    }

    fn set(vals: &[i64]) -> BTreeSet<Q> {
        vals.iter().map(|&v| q(v)).collect()
    }

    #[test]
    fn rationals_round_trip() {
        for s in ["0", "-1", "3/4", "-7/2", "12"] {
            assert_eq!(format_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(format_q(&parse_q("4/2").unwrap()), "2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn cluster_examples() {
        let f = cluster_envelope(&example_f());
        assert_eq!(f.values_at(&q(0)), set(&[0, 1]));
        assert_eq!(f.values_at(&q(-3)), set(&[3]));
        assert_eq!(f.values_at(&q(5)), set(&[1]));
        assert_eq!(cluster_envelope(&example_g()), f);
        let aff = cluster_envelope(
            &PAFunction::new(
                vec![(q(1), q(3))],
                vec![Affine::new(q(2), q(1)), Affine::new(q(2), q(1))],
            )
            .unwrap(),
        );
        assert!(aff.breakpoints().is_empty());
    }

    #[test]
    fn composition_unit() {
        let id = cluster_envelope(&PAFunction::affine(Affine::identity()));
        let caps = Caps::default();
        assert_eq!(kleisli_compose(&id, &id, &caps).unwrap(), id);
        let f = cluster_envelope(&example_f());
        assert_eq!(kleisli_compose(&id, &f, &caps).unwrap(), f);
        assert_eq!(kleisli_compose(&f, &id, &caps).unwrap(), f);
    }

    #[test]
    fn compositions_away_from_zero() {
        let caps = Caps::default();
        let (f, g) = (
            cluster_envelope(&example_f()),
            cluster_envelope(&example_g()),
        );
        for c in [
            kleisli_compose(&g, &f, &caps).unwrap(),
            kleisli_compose(&f, &g, &caps).unwrap(),
        ] {
            for x in [q(-2), q(-1), qf(1, 2), q(3)] {
                assert_eq!(c.values_at(&x), set(&[1]));
            }
            assert!(c
                .pieces()
                .iter()
                .all(|p| *p == BTreeSet::from([Affine::constant(q(1))])));
            assert_eq!(c.values_at(&q(0)), set(&[0, 1]));
        }
    }

    #[test]
    fn branch_cap() {
        let caps = Caps {
            branches: 1,
            ..Caps::default()
        };
        // F constant at G's breakpoint makes every branch of the composite a
        // constant from G's value set there.
        let f = cluster_envelope(&PAFunction::affine(Affine::constant(q(0))));
        let g = cluster_envelope(&example_f());
        assert!(matches!(
            kleisli_compose(&g, &f, &caps),
            Err(Error::CapExceeded { .. })
        ));
        let ok = kleisli_compose(&g, &f, &Caps::default()).unwrap();
        assert_eq!(ok.values_at(&q(7)), set(&[0, 1]));
    }

    #[test]
    fn robust_examples() {
        let above0 = OpenUnion::above(q(0));
        assert!(is_robust(&example_g(), &q(0), &above0));
        assert!(!is_robust(&example_f(), &q(0), &above0));
        assert!(is_robust(&example_f(), &q(0), &OpenUnion::reals()));
        assert!(is_robust(&example_f(), &q(-1), &above0));
    }

    #[test]
    fn defect_examples() {
        assert!(universality_defects(&example_f()).is_empty());
        let d = universality_defects(&example_g());
        assert_eq!(
            d,
            vec![Defect {
                breakpoint: q(0),
                value: q(0),
                witness: OpenUnion::above(q(0))
            }]
        );
        assert!(universality_defects(&PAFunction::affine(Affine::new(q(3), q(1)))).is_empty());
    }

    #[test]
    fn modulus_examples() {
        let m = default_max_delta();
        let f = PAFunction::affine(Affine::new(q(2), q(5)));
        assert_eq!(local_modulus(&f, &q(7), &q(1), &m), Some(qf(1, 2)));
        assert_eq!(local_modulus(&example_f(), &q(0), &q(1), &m), None);
        let c = PAFunction::affine(Affine::constant(q(4)));
        assert_eq!(local_modulus(&c, &q(0), &q(1), &m), Some(m.clone()));
        // f(-1/2) = 1/2 and the branch -x leaves (1/4, 3/4) at both -3/4 and -1/4.
        assert_eq!(
            local_modulus(&example_f(), &qf(-1, 2), &qf(1, 4), &m),
            Some(qf(1, 4))
        );
        // With ε = 1 the values 0 and 1 near the jump stay in range; -x = 3/2 binds.
        assert_eq!(
            local_modulus(&example_f(), &qf(-1, 2), &q(1), &m),
            Some(q(1))
        );
    }

    #[test]
    fn envelope_maximality_at_breakpoints() {
        for f in [example_f(), example_g()] {
            let env = cluster_envelope(&f);
            assert!(env.is_envelope_of(&f));
            for i in 0..env.breakpoints().len() {
                for v in env.at()[i].clone() {
                    let mut smaller = env.clone();
                    smaller.at[i].remove(&v);
                    if smaller.at[i].is_empty() {
                        continue;
                    }
                    assert!(!smaller.is_envelope_of(&f));
                }
                let mut bigger = env.clone();
                bigger.at[i].insert(q(42));
                assert!(bigger.is_envelope_of(&f));
                assert!(CompactSet::from_points(bigger.at[i].iter())
                    .le(&CompactSet::from_points(env.at[i].iter())));
                assert_ne!(bigger, env);
            }
        }
    }

    #[test]
    fn compact_set_order() {
        let a = CompactSet::from_intervals(vec![(q(0), q(2)), (q(1), q(3))]).unwrap();
        assert_eq!(a.parts(), &[(q(0), q(3))]);
        let p = CompactSet::from_points([q(1)].iter());
        assert!(a.le(&p));
        assert!(!p.le(&a));
        assert!(CompactSet::Bottom.le(&p));
    }

    fn small_q() -> impl Strategy<Value = Q> {
        (-4i64..=4, 1i64..=2).prop_map(|(n, d)| qf(n, d))
    }

    fn pa_function() -> impl Strategy<Value = PAFunction> {
        (0usize..=3)
            .prop_flat_map(|k| {
                (
                    proptest::collection::btree_set(-4i64..=4, k),
                    proptest::collection::vec(small_q(), k),
                    proptest::collection::vec((small_q(), small_q()), k + 1),
                )
            })
            .prop_map(|(bs, vals, pieces)| {
                let breakpoints = bs.into_iter().map(q).zip(vals).collect();
                let pieces = pieces.into_iter().map(|(s, c)| Affine::new(s, c)).collect();
                PAFunction::new(breakpoints, pieces).unwrap()
            })
    }

    fn candidate_opens(f: &PAFunction) -> Vec<OpenUnion> {
        let mut ends: BTreeSet<Q> = BTreeSet::new();
        for (i, (_, v)) in f.breakpoints().iter().enumerate() {
            for base in [v.clone(), f.left_limit(i), f.right_limit(i)] {
                for d in [q(0), q(1), q(-1), qf(1, 2), qf(-1, 2)] {
                    ends.insert(&base + d);
                }
            }
        }
        let mut bounds: Vec<Bound> = vec![Bound::NegInf, Bound::PosInf];
        bounds.extend(ends.into_iter().map(Bound::Finite));
        let mut out = Vec::new();
        for a in &bounds {
            for b in &bounds {
                if a < b {
                    out.push(OpenUnion::new(vec![(a.clone(), b.clone())]).unwrap());
                }
            }
        }
        for a in &bounds {
            if let Bound::Finite(v) = a {
                out.push(OpenUnion::punctured(v.clone()));
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn defects_match_robustness(f in pa_function()) {
            let env = cluster_envelope(&f);
            let defects = universality_defects(&f);
            let mut unwitnessed = false;
            for (b, _) in f.breakpoints() {
                let value = env.value(b);
                for v in candidate_opens(&f) {
                    if is_robust(&f, b, &v) && !value.is_inside(&v) {
                        unwitnessed = true;
                    }
                }
            }
            prop_assert_eq!(defects.is_empty(), !unwitnessed);
            for d in &defects {
                prop_assert!(is_robust(&f, &d.breakpoint, &d.witness));
                prop_assert!(!d.witness.contains(&d.value));
            }
        }

        #[test]
        fn composition_is_associative(f in pa_function(), g in pa_function(), h in pa_function()) {
            let caps = Caps::default();
            let (ef, eg, eh) = (cluster_envelope(&f), cluster_envelope(&g), cluster_envelope(&h));
            let left = kleisli_compose(&eh, &kleisli_compose(&eg, &ef, &caps).unwrap(), &caps).unwrap();
            let right = kleisli_compose(&kleisli_compose(&eh, &eg, &caps).unwrap(), &ef, &caps).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn composition_with_identity(f in pa_function()) {
            let caps = Caps::default();
            let id = cluster_envelope(&PAFunction::affine(Affine::identity()));
            let ef = cluster_envelope(&f);
            prop_assert_eq!(kleisli_compose(&id, &ef, &caps).unwrap(), ef.clone());
            prop_assert_eq!(kleisli_compose(&ef, &id, &caps).unwrap(), ef);
        }

        #[test]
        fn cluster_is_envelope(f in pa_function()) {
            prop_assert!(cluster_envelope(&f).is_envelope_of(&f));
        }

        #[test]
        fn modulus_is_valid(f in pa_function(), x0 in small_q(), eps in (1i64..=4).prop_map(|n| qf(n, 2))) {
            let m = default_max_delta();
            if let Some(d) = local_modulus(&f, &x0, &eps, &m) {
                prop_assert!(d.is_positive());
                let y0 = f.eval(&x0);
                // Sample the open interval densely, including points next to its ends.
                let n = 40;
                for k in 1..n {
                    for x in [&x0 - &d * qf(k, n), &x0 + &d * qf(k, n)] {
                        prop_assert!((f.eval(&x) - &y0).abs() < eps);
                    }
                }
                if d < m {
                    // The supremum is tight: slightly larger δ fails.
                    let bigger = &d * qf(1001, 1000);
                    let fails = (1..=200).any(|k| {
                        [&x0 - &bigger * qf(k, 200), &x0 + &bigger * qf(k, 200)]
                            .iter()
                            .any(|x| (f.eval(x) - &y0).abs() >= eps)
                    }) || f.breakpoints().iter().any(|(b, v)| {
                        (b - &x0).abs() < bigger && (v - &y0).abs() >= eps
                    });
                    prop_assert!(fails);
                }
            } else {
                prop_assert!(!f.is_continuous_at(&x0));
            }
        }
    }
}
