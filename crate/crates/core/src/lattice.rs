//! Finite lattices with tabulated meets and joins.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finspace::FinSpace;

/// A finite poset with all binary meets and joins. Finite lattices with a top
/// and bottom are complete, so empty meets and joins are available too.
#[derive(Clone, Debug)]
pub struct Lattice {
    space: Arc<FinSpace>,
    meet: Vec<usize>,
    join: Vec<usize>,
    top: usize,
    bottom: usize,
}

impl Lattice {
    pub fn new(space: Arc<FinSpace>) -> Result<Self> {
        let n = space.len();
        let top = space
            .top()
            .ok_or_else(|| Error::NotALattice("no top element".into()))?;
        let bottom = space
            .bottom()
            .ok_or_else(|| Error::NotALattice("no bottom element".into()))?;
        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for a in 0..n {
            for b in a..n {
                let lower = space.down(a).intersection(&space.down(b));
                let max = space.maximal(&lower);
                if max.len() != 1 {
                    return Err(Error::NotALattice(format!(
                        "{} and {} have no greatest lower bound",
                        space.name(a),
                        space.name(b)
                    )));
                }
                let upper = space.up(a).intersection(&space.up(b));
                let min = space.minimal(&upper);
                if min.len() != 1 {
                    return Err(Error::NotALattice(format!(
                        "{} and {} have no least upper bound",
                        space.name(a),
                        space.name(b)
                    )));
                }
                let (m, j) = (max.first().unwrap(), min.first().unwrap());
                meet[a * n + b] = m;
                meet[b * n + a] = m;
                join[a * n + b] = j;
                join[b * n + a] = j;
            }
        }
        Ok(Lattice {
            space,
            meet,
            join,
            top,
            bottom,
        })
    }

    pub fn space(&self) -> &Arc<FinSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    #[inline]
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.space.le(a, b)
    }

    #[inline]
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b]
    }

    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.len() + b]
    }

    pub fn meet_all<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn join_all<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| {
                    self.meet(a, self.join(b, c)) == self.join(self.meet(a, b), self.meet(a, c))
                })
            })
        })
    }
}
