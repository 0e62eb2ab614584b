//! Single-defect mutations for probing validator sensitivity: each kind
//! breaks exactly one stated axiom (possibly dragging dependent axioms down
//! with it) while provably leaving the others intact.

use rand::Rng;

use crate::error::{Error, Result};
use crate::piecewise::{PiecewiseLinear, Side};
use crate::scalar::{int, rat, Scalar};
use crate::system::{Axiom, NSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// One segment slope nudged off the legal set; later breakpoints shift
    /// along so the segment arithmetic stays consistent.
    SlopeSubstitution,
    /// Two adjacent breakpoint positions swapped, breaking monotonicity.
    BreakpointReorder,
    /// One interior breakpoint value displaced, breaking the segment
    /// arithmetic around it.
    ValuePerturbation,
    /// Two adjacent components exchange tails at a contact position where
    /// their graphs part ways, breaking the ordering just after it.
    ComponentSwap,
}

pub const ALL_MUTATIONS: [Mutation; 4] = [
    Mutation::SlopeSubstitution,
    Mutation::BreakpointReorder,
    Mutation::ValuePerturbation,
    Mutation::ComponentSwap,
];

impl Mutation {
    pub fn name(&self) -> &'static str {
        match self {
            Mutation::SlopeSubstitution => "slope-substitution",
            Mutation::BreakpointReorder => "breakpoint-reorder",
            Mutation::ValuePerturbation => "value-perturbation",
            Mutation::ComponentSwap => "component-swap",
        }
    }

    /// The axiom the defect must be reported under.
    pub fn expected_axiom(&self) -> Axiom {
        match self {
            Mutation::SlopeSubstitution => Axiom::SlopeSet,
            Mutation::BreakpointReorder => Axiom::Structure,
            Mutation::ValuePerturbation => Axiom::Continuity,
            Mutation::ComponentSwap => Axiom::Order,
        }
    }

    /// Whether the expected axiom must be the only one reported. Slope and
    /// value defects legitimately drag zero-sum or switch bookkeeping down
    /// with them; the other two are surgical.
    pub fn must_be_exact(&self) -> bool {
        matches!(self, Mutation::BreakpointReorder | Mutation::ComponentSwap)
    }
}

pub fn apply<R: Rng>(s: &NSystem, which: Mutation, rng: &mut R) -> Result<NSystem> {
    match which {
        Mutation::SlopeSubstitution => slope_substitution(s, rng),
        Mutation::BreakpointReorder => breakpoint_reorder(s, rng),
        Mutation::ValuePerturbation => value_perturbation(s, rng),
        Mutation::ComponentSwap => component_swap(s, rng),
    }
}

/// Uniformly chosen mutation kind, then applied.
pub fn random<R: Rng>(s: &NSystem, rng: &mut R) -> Result<(Mutation, NSystem)> {
    let which = ALL_MUTATIONS[rng.gen_range(0..ALL_MUTATIONS.len())];
    Ok((which, apply(s, which, rng)?))
}

fn slope_substitution<R: Rng>(s: &NSystem, rng: &mut R) -> Result<NSystem> {
    let mut out = s.clone();
    let c = rng.gen_range(0..out.n);
    let f = &mut out.components[c];
    let k = rng.gen_range(0..f.slopes.len());
    // Off the legal set {−(n−1), 1} for every n.
    let bad = &f.slopes[k] + rat(1, 3);
    let delta = (&bad - &f.slopes[k]) * (&f.points[k + 1].0 - &f.points[k].0);
    f.slopes[k] = bad;
    for p in f.points.iter_mut().skip(k + 1) {
        p.1 += &delta;
    }
    Ok(out)
}

fn breakpoint_reorder<R: Rng>(s: &NSystem, rng: &mut R) -> Result<NSystem> {
    let mut out = s.clone();
    let candidates: Vec<usize> = (0..out.n)
        .filter(|&c| out.components[c].points.len() >= 4)
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "no component has enough breakpoints to reorder".into(),
        ));
    }
    let c = candidates[rng.gen_range(0..candidates.len())];
    let f = &mut out.components[c];
    let i = rng.gen_range(1..f.points.len() - 2);
    let (a, b) = (f.points[i].0.clone(), f.points[i + 1].0.clone());
    f.points[i].0 = b;
    f.points[i + 1].0 = a;
    Ok(out)
}

fn value_perturbation<R: Rng>(s: &NSystem, rng: &mut R) -> Result<NSystem> {
    let mut out = s.clone();
    let candidates: Vec<usize> = (0..out.n)
        .filter(|&c| out.components[c].points.len() >= 3)
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "no component has an interior breakpoint".into(),
        ));
    }
    let c = candidates[rng.gen_range(0..candidates.len())];
    let f = &mut out.components[c];
    let i = rng.gen_range(1..f.points.len() - 1);
    f.points[i].1 += rat(1, 7);
    Ok(out)
}

/// Contact positions of adjacent components where the right-hand slopes
/// differ, so the swapped tails separate immediately.
fn swap_sites(s: &NSystem) -> Vec<(usize, Scalar)> {
    let mut sites = Vec::new();
    for j in 0..s.n - 1 {
        let a = &s.components[j];
        let b = &s.components[j + 1];
        let mut grid: Vec<Scalar> = a
            .points
            .iter()
            .chain(b.points.iter())
            .map(|(q, _)| q.clone())
            .collect();
        grid.sort();
        grid.dedup();
        for q in grid {
            if q <= int(0) || q >= s.horizon {
                continue;
            }
            let va = a.evaluate(&q).expect("grid position in domain");
            let vb = b.evaluate(&q).expect("grid position in domain");
            if va != vb {
                continue;
            }
            let sa = a.slope_at(&q, Side::Right).expect("interior position");
            let sb = b.slope_at(&q, Side::Right).expect("interior position");
            if sa != sb {
                sites.push((j, q));
            }
        }
    }
    sites
}

/// head's graph up to q_star, then src's graph beyond it.
fn splice_tail(head_src: &PiecewiseLinear, tail_src: &PiecewiseLinear, q_star: &Scalar) -> PiecewiseLinear {
    let mut out = head_src
        .truncated(q_star)
        .expect("contact position is interior");
    let idx = tail_src.points.partition_point(|p| &p.0 <= q_star);
    // Bridging slope: the tail source's segment covering (q_star, next).
    out.slopes.push(tail_src.slopes[idx - 1].clone());
    for (i, p) in tail_src.points.iter().enumerate().skip(idx) {
        out.points.push(p.clone());
        if i < tail_src.slopes.len() {
            out.slopes.push(tail_src.slopes[i].clone());
        }
    }
    out
}

fn component_swap<R: Rng>(s: &NSystem, rng: &mut R) -> Result<NSystem> {
    let sites = swap_sites(s);
    if sites.is_empty() {
        return Err(Error::InvalidArgument(
            "no contact position separates two components".into(),
        ));
    }
    let (j, q_star) = sites[rng.gen_range(0..sites.len())].clone();
    let mut out = s.clone();
    let a = &s.components[j];
    let b = &s.components[j + 1];
    out.components[j] = splice_tail(a, b, &q_star);
    out.components[j + 1] = splice_tail(b, a, &q_star);
    Ok(out)
}
