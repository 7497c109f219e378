//! The named mutual-information quantities of the achievable region, the four
//! rate bounds plus feedback cost they induce, and the two-variable
//! rate-splitting system whose feasibility characterizes the same region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Global slack for the region's non-strict inequalities.
pub const REGION_TOL: f64 = 1e-9;

/// The sixteen mutual-information terms of the two-block coding scheme, in
/// bits. `t_fb*` price the feedback link; `d*` are the receiver's direct
/// decoding rates; `a*` are the cross-transmitter decoding rates of the
/// resolution layer; `b_*` are the receiver-side resolution rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MacMiTerms {
    pub t_fb1: f64,
    pub t_fb2: f64,
    pub t_fba: f64,
    pub t_fbb: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
    pub a1: f64,
    pub a2: f64,
    pub b_w: f64,
    pub b_u1: f64,
    pub b_u2: f64,
    pub b_v1: f64,
    pub b_v2: f64,
    pub b_u12: f64,
    pub b_v12: f64,
}

impl MacMiTerms {
    /// Receiver-side resolution budget for user 1: W, U1 and V1 layers.
    pub fn route1(&self) -> f64 {
        self.b_w + self.b_u1 + self.b_v1
    }

    pub fn route2(&self) -> f64 {
        self.b_w + self.b_u2 + self.b_v2
    }

    /// Joint receiver-side resolution budget.
    pub fn route_sum(&self) -> f64 {
        self.b_w + self.b_u12 + self.b_v12
    }

    /// (name, value) pairs in declaration order, for reports and diffing.
    pub fn fields(&self) -> [(&'static str, f64); 16] {
        [
            ("t_fb1", self.t_fb1),
            ("t_fb2", self.t_fb2),
            ("t_fba", self.t_fba),
            ("t_fbb", self.t_fbb),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d12", self.d12),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b_w", self.b_w),
            ("b_u1", self.b_u1),
            ("b_u2", self.b_u2),
            ("b_v1", self.b_v1),
            ("b_v2", self.b_v2),
            ("b_u12", self.b_u12),
            ("b_v12", self.b_v12),
        ]
    }

    pub fn max_abs_delta(&self, other: &MacMiTerms) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields().iter())
            .map(|((_, x), (_, y))| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// The rate bounds of the achievable region: per-user caps, two sum caps and
/// the feedback-rate cost. The region is
/// { R1 <= r1, R2 <= r2, R1+R2 <= min(sum_a, sum_b) } when rfb >= fb_cost.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionBounds {
    pub r1: f64,
    pub r2: f64,
    pub sum_a: f64,
    pub sum_b: f64,
    pub fb_cost: f64,
}

impl RegionBounds {
    pub fn sum_bound(&self) -> f64 {
        self.sum_a.min(self.sum_b)
    }

    /// Membership of a rate pair, on the closure at `REGION_TOL`.
    pub fn contains(&self, r1: f64, r2: f64, rfb: f64) -> bool {
        rfb >= self.fb_cost - REGION_TOL
            && r1 >= 0.0
            && r2 >= 0.0
            && r1 <= self.r1 + REGION_TOL
            && r2 <= self.r2 + REGION_TOL
            && r1 + r2 <= self.sum_bound() + REGION_TOL
    }

    pub fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("r1", self.r1),
            ("r2", self.r2),
            ("sum_a", self.sum_a),
            ("sum_b", self.sum_b),
            ("fb_cost", self.fb_cost),
        ]
    }

    pub fn max_abs_delta(&self, other: &RegionBounds) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields().iter())
            .map(|((_, x), (_, y))| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Assemble the region bounds from the sixteen terms.
pub fn bounds_from_terms(t: &MacMiTerms) -> RegionBounds {
    let m1 = t.a1.min(t.route1());
    let m2 = t.a2.min(t.route2());
    RegionBounds {
        r1: t.d1 + m1,
        r2: t.d2 + m2,
        sum_a: t.d12 + t.route_sum(),
        sum_b: t.d12 + m1 + m2,
        fb_cost: t.t_fb1.max(t.t_fb2) + t.t_fba + t.t_fbb,
    }
}

/// A feasible rate split: per-user resolution rates R'1, R'2 and the
/// list-resolution index rate R0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSplitWitness {
    pub r1_split: f64,
    pub r2_split: f64,
    pub r0: f64,
    /// Set when the W-layer budget is zero, forcing R0 = 0.
    pub r0_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerFeasibility {
    Feasible(RateSplitWitness),
    Infeasible,
}

impl InnerFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, InnerFeasibility::Feasible(_))
    }
}

/// Decide whether (r1, r2) admits a rate split, i.e. resolution rates
/// R'1 in [max(0, r1-d1), min(a1, route1, r1)] (same for user 2) whose sum
/// lies in [r1+r2-d12, route_sum]. All inequalities are non-strict with
/// slack `REGION_TOL`; the witness R0 is route `b_w`/2 (any value below b_w
/// works, and it never constrains the rate pair).
pub fn inner_feasible(t: &MacMiTerms, r1: f64, r2: f64, rfb: f64) -> InnerFeasibility {
    let eps = REGION_TOL;
    let fb_cost = t.t_fb1.max(t.t_fb2) + t.t_fba + t.t_fbb;
    if rfb < fb_cost - eps {
        return InnerFeasibility::Infeasible;
    }
    let l1 = (r1 - t.d1).max(0.0);
    let u1 = t.a1.min(t.route1()).min(r1);
    let l2 = (r2 - t.d2).max(0.0);
    let u2 = t.a2.min(t.route2()).min(r2);
    if l1 > u1 + eps || l2 > u2 + eps {
        return InnerFeasibility::Infeasible;
    }
    let lo = (l1 + l2).max(r1 + r2 - t.d12);
    let hi = (u1 + u2).min(t.route_sum());
    if lo > hi + eps {
        return InnerFeasibility::Infeasible;
    }
    // distribute the smallest admissible sum over the two intervals
    let s = lo.min(hi).max(l1 + l2);
    let r1_split = l1.max(s - u2).min(u1);
    let r2_split = (s - r1_split).clamp(l2.min(u2), u2);
    let r0_degenerate = t.b_w <= 0.0;
    InnerFeasibility::Feasible(RateSplitWitness {
        r1_split,
        r2_split,
        r0: if r0_degenerate { 0.0 } else { t.b_w / 2.0 },
        r0_degenerate,
    })
}

/// One sampled rate pair on which region membership and rate-split
/// feasibility disagree outside the boundary band.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceDisagreement {
    pub r1: f64,
    pub r2: f64,
    pub bounds_member: bool,
    pub split_feasible: bool,
    pub boundary_distance: f64,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub samples: usize,
    pub boundary_skipped: usize,
    pub disagreements: Vec<EquivalenceDisagreement>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Band around any active bound inside which membership flips are attributed
/// to floating point rather than to a genuine region mismatch.
pub const BOUNDARY_BAND: f64 = 1e-6;

/// Empirically compare the explicit bound description of the region with the
/// rate-splitting system on random rate pairs. Deterministic given `seed`.
pub fn region_equivalence_check(
    t: &MacMiTerms,
    rfb: f64,
    samples: usize,
    seed: u64,
) -> EquivalenceReport {
    let b = bounds_from_terms(t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 0.05 * (b.r1 + b.r2) + 0.01;
    let mut report = EquivalenceReport {
        samples,
        boundary_skipped: 0,
        disagreements: Vec::new(),
    };
    for _ in 0..samples {
        let r1 = rng.gen::<f64>() * (b.r1 + margin);
        let r2 = rng.gen::<f64>() * (b.r2 + margin);
        let member = b.contains(r1, r2, rfb);
        let split = inner_feasible(t, r1, r2, rfb).is_feasible();
        if member == split {
            continue;
        }
        let boundary_distance = (r1 - b.r1)
            .abs()
            .min((r2 - b.r2).abs())
            .min((r1 + r2 - b.sum_a).abs())
            .min((r1 + r2 - b.sum_b).abs())
            .min((rfb - b.fb_cost).abs());
        if boundary_distance <= BOUNDARY_BAND {
            report.boundary_skipped += 1;
        } else {
            report.disagreements.push(EquivalenceDisagreement {
                r1,
                r2,
                bounds_member: member,
                split_feasible: split,
                boundary_distance,
            });
        }
    }
    report
}
