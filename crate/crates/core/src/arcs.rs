//! Exact arc-set arithmetic on the circle.
//!
//! Finite unions of disjoint arcs in `[0, 1)`, closed under intersection
//! and under preimages of the full-branch linear maps `x -> kx mod 1`.
//! This is the machinery behind the exact dynamical-ball and
//! escape-survivor enumerations for the piecewise-linear circle
//! families.

use crate::error::{Error, Result};

/// Hard cap on the number of arcs; enumeration aborts instead of
/// degrading silently.
const MAX_ARCS: usize = 100_000;

/// A finite union of disjoint arcs `[lo, hi)` with `0 <= lo < hi <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet {
            arcs: vec![(0.0, 1.0)],
        }
    }

    /// Single arc `[lo, hi)`, given in any representatives; wraps mod 1
    /// and splits at the cut if needed.
    pub fn arc(lo: f64, hi: f64) -> Self {
        if hi - lo >= 1.0 {
            return ArcSet::full();
        }
        let lo_w = lo.rem_euclid(1.0);
        let len = hi - lo;
        if len <= 0.0 {
            return ArcSet::empty();
        }
        let hi_w = lo_w + len;
        if hi_w <= 1.0 {
            ArcSet {
                arcs: vec![(lo_w, hi_w)],
            }
        } else {
            ArcSet {
                arcs: vec![(0.0, hi_w - 1.0), (lo_w, 1.0)],
            }
        }
    }

    /// Metric ball of radius `r` around `c` on the circle.
    pub fn ball(c: f64, r: f64) -> Self {
        if r >= 0.5 {
            return ArcSet::full();
        }
        ArcSet::arc(c - r, c + r)
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    /// Intersection by a linear sweep over the two sorted arc lists.
    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a_lo, a_hi) = self.arcs[i];
            let (b_lo, b_hi) = other.arcs[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo < hi {
                out.push((lo, hi));
            }
            if a_hi <= b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet { arcs: out }
    }

    /// Preimage under `x -> kx mod 1`: each arc shrinks by `k` and
    /// spreads into `k` translates.
    pub fn preimage_linear(&self, k: u32) -> Result<ArcSet> {
        let k = k as usize;
        if self.arcs.len() * k > MAX_ARCS {
            return Err(Error::Unsupported(format!(
                "arc enumeration exceeded {MAX_ARCS} arcs"
            )));
        }
        let kf = k as f64;
        let mut out = Vec::with_capacity(self.arcs.len() * k);
        for branch in 0..k {
            let off = branch as f64;
            for &(lo, hi) in &self.arcs {
                out.push(((lo + off) / kf, (hi + off) / kf));
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ArcSet { arcs: out })
    }
}
