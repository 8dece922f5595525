//! The finite base: boxes inside a region whose faces lie on the dyadic
//! grid of resolution `2^-L` (relative to the region's side lengths).

use num_traits::Signed;
use rand::Rng;

use crate::error::{GfError, Result};
use crate::formal::Interval;
use crate::rational::{q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseIndex {
    region: Interval,
    level: u32,
}

impl BaseIndex {
    pub fn new(region: Interval, level: u32) -> Result<Self> {
        if level > 16 {
            return Err(GfError::InvalidInterval(format!("base level {level} is above 16")));
        }
        Ok(BaseIndex { region, level })
    }

    /// `(-1, 1)^n` at level `L`.
    pub fn standard(n: usize, level: u32) -> Self {
        BaseIndex { region: Interval::symmetric(n), level }
    }

    pub fn region(&self) -> &Interval {
        &self.region
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn step(&self, k: usize) -> Q {
        (self.region.hi(k) - self.region.lo(k)) / q(1i64 << self.level)
    }

    /// Grid coordinates along axis `k`, both ends included.
    pub fn grid(&self, k: usize) -> Vec<Q> {
        let (lo, h) = (self.region.lo(k), self.step(k));
        (0..=(1i64 << self.level)).map(|i| &lo + &h * q(i)).collect()
    }

    fn on_grid(&self, k: usize, x: &Q) -> bool {
        let t = (x - self.region.lo(k)) / self.step(k);
        t.is_integer() && !t.is_negative() && t <= q(1i64 << self.level)
    }

    pub fn is_base(&self, j: &Interval) -> bool {
        j.dim() == self.dim()
            && self.region.contains(j)
            && (0..self.dim()).all(|k| self.on_grid(k, &j.lo(k)) && self.on_grid(k, &j.hi(k)))
    }

    pub fn check(&self, j: &Interval) -> Result<()> {
        if self.is_base(j) {
            Ok(())
        } else {
            Err(GfError::InvalidInterval(format!("{j} is not a base interval of level {} in {}", self.level, self.region)))
        }
    }

    /// Every base interval contained in `b`.
    pub fn within(&self, b: &Interval) -> Vec<Interval> {
        let mut out: Vec<(Vec<Q>, Vec<Q>)> = vec![(Vec::new(), Vec::new())];
        for k in 0..self.dim() {
            let pts: Vec<Q> = self.grid(k).into_iter().filter(|x| *x >= b.lo(k) && *x <= b.hi(k)).collect();
            let mut next = Vec::new();
            for (lo, hi) in &out {
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        let (mut l, mut h) = (lo.clone(), hi.clone());
                        l.push(pts[i].clone());
                        h.push(pts[j].clone());
                        next.push((l, h));
                    }
                }
            }
            out = next;
        }
        out.into_iter().filter_map(|(l, h)| Interval::from_bounds(l, h).ok()).collect()
    }

    /// A uniformly chosen base interval inside `b` with at least `min_cells`
    /// grid steps per side, when one exists.
    pub fn random_within<R: Rng>(&self, rng: &mut R, b: &Interval, min_cells: usize) -> Option<Interval> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for k in 0..self.dim() {
            let pts: Vec<Q> = self.grid(k).into_iter().filter(|x| *x >= b.lo(k) && *x <= b.hi(k)).collect();
            if pts.len() < min_cells + 1 {
                return None;
            }
            let i = rng.gen_range(0..pts.len() - min_cells);
            let j = rng.gen_range(i + min_cells..pts.len());
            lo.push(pts[i].clone());
            hi.push(pts[j].clone());
        }
        Interval::from_bounds(lo, hi).ok()
    }

    /// A random open cover of the 1-D base interval `u` by a chain of base
    /// intervals with consecutive overlaps.
    pub fn random_chain_cover<R: Rng>(&self, rng: &mut R, u: &Interval) -> Vec<Interval> {
        let pts: Vec<Q> = self.grid(0).into_iter().filter(|x| *x >= u.lo(0) && *x <= u.hi(0)).collect();
        let n = pts.len() - 1;
        // interior cut points x_1 < .. < x_{k-1}; member i spans (x_{i-1}, x_{i+1})
        let mut cuts: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.35)).collect();
        if cuts.is_empty() && n >= 2 {
            cuts.push(rng.gen_range(1..n));
        }
        let mut xs = vec![0usize];
        xs.extend(cuts);
        xs.push(n);
        let mut cover = Vec::new();
        if xs.len() == 2 {
            cover.push(u.clone());
        }
        for w in xs.windows(3) {
            cover.push(Interval::interval_1d(pts[w[0]].clone(), pts[w[2]].clone()).expect("increasing grid points"));
        }
        if rng.gen_bool(0.3) {
            if let Some(extra) = self.random_within(rng, u, 1) {
                cover.push(extra);
            }
        }
        cover
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_and_enumeration() {
        let b = BaseIndex::standard(1, 2);
        assert!(b.is_base(&Interval::interval_1d(qr(-1, 2), q(1)).unwrap()));
        assert!(!b.is_base(&Interval::interval_1d(qr(-1, 3), q(1)).unwrap()));
        assert_eq!(b.within(b.region()).len(), 10);
        let b2 = BaseIndex::standard(2, 1);
        assert_eq!(b2.within(b2.region()).len(), 9);
    }

    #[test]
    fn chain_covers_cover() {
        let b = BaseIndex::standard(1, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = b.random_within(&mut rng, b.region(), 2).unwrap();
            let cover = b.random_chain_cover(&mut rng, &u);
            assert!(cover.iter().all(|i| b.is_base(i) && u.contains(i)));
            assert_eq!(cover.iter().map(|i| i.lo(0)).min().unwrap(), u.lo(0));
            assert_eq!(cover.iter().map(|i| i.hi(0)).max().unwrap(), u.hi(0));
        }
    }
}
