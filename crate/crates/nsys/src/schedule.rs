//! Schedules driving the builders and the switch-position records they emit.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{factorial, format_rational, Scalar};

/// Growth rules for the driving sequence l_0 < l_1 < ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthRule {
    /// l_i = l0 · (i+1)!, so consecutive ratios are 2, 3, 4, ... — strictly
    /// increasing and unbounded, with l_t ≥ 2·l_{t−1} throughout.
    FactorialLacunary,
}

/// A named driving sequence: rule, scale, and requested epoch count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSpec {
    pub l0: Scalar,
    pub growth: GrowthRule,
    /// Number of build steps; the generated list has `epochs + 1` entries
    /// l_0..l_epochs.
    pub epochs: usize,
}

impl ScheduleSpec {
    pub fn generate(&self) -> Result<Vec<Scalar>> {
        match self.growth {
            GrowthRule::FactorialLacunary => default_lacunary(&self.l0, self.epochs + 1),
        }
    }
}

/// The factorial driving sequence l_i = l0 · (i+1)!, i = 0..count−1.
pub fn default_lacunary(l0: &Scalar, count: usize) -> Result<Vec<Scalar>> {
    if l0 <= &Scalar::zero() {
        return Err(Error::InvalidArgument(format!(
            "l0 = {} must be positive",
            format_rational(l0)
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let f = BigInt::from(factorial(i as u64 + 1));
        out.push(l0 * Scalar::from_integer(f));
    }
    Ok(out)
}

/// One intermediate zigzag band of an alternating build. Node positions form
/// the arithmetic sequence b_k = b0 + k·d for k = 0..=h, with the band value
/// dropping by d/2 per period; the extrema sit at the half-period positions
/// b_k + d/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagPhase {
    pub b0: Scalar,
    /// Full period length (the node spacing).
    pub d: Scalar,
    /// Number of full periods.
    pub h: u64,
    /// Band value at b0 (shared by the two zigzagging components).
    pub v0: Scalar,
    /// Band value at the last node; always in (d/2, d].
    pub v_end: Scalar,
    /// Last node position b_h where the band is abandoned.
    pub q_tilde: Scalar,
    /// Position where the falling component reaches the bottom one.
    pub q_meet: Scalar,
}

impl ZigzagPhase {
    /// Node position b_k.
    pub fn node(&self, k: u64) -> Scalar {
        &self.b0 + &self.d * Scalar::from_integer(BigInt::from(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    /// Boundary closing a stretch built by the maximal recipe.
    Maximal,
    /// Boundary closing an intermediate (zigzag) stretch.
    Intermediate,
}

/// Phase boundary of an alternating build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseMark {
    pub q: Scalar,
    pub kind: PhaseKind,
    /// Template scale of the replayed shape ending here, if any.
    pub scale: Option<Scalar>,
    /// Worst relative distance of the component values at this boundary from
    /// the asymptote (P_1 at −2q, the others at q); recorded for maximal
    /// boundaries.
    pub eps: Option<Scalar>,
}

/// Every switch position a builder computed, grouped by role.
///
/// For maximal builds: `l` is the driving sequence, `r[t-1]` = r_t is the
/// t-th bottom meeting, `w[i-1]` holds the epoch-i top meetings w_i^1..
/// w_i^{n−2}. Alternating builds additionally fill `zigzags` and
/// `phase_marks`, and their `r` collects every bottom meeting in time order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SwitchSchedule {
    pub l: Vec<Scalar>,
    pub r: Vec<Scalar>,
    pub w: Vec<Vec<Scalar>>,
    pub zigzags: Vec<ZigzagPhase>,
    pub phase_marks: Vec<PhaseMark>,
}

impl SwitchSchedule {
    /// r_t (1-based).
    pub fn r_t(&self, t: usize) -> Option<&Scalar> {
        if t == 0 {
            return None;
        }
        self.r.get(t - 1)
    }

    /// The epoch-i top meetings w_i^1..w_i^{n−2} (1-based epoch).
    pub fn w_epoch(&self, i: usize) -> Option<&[Scalar]> {
        if i == 0 {
            return None;
        }
        self.w.get(i - 1).map(|v| v.as_slice())
    }

    /// The last top meeting before r_t, with the convention that the position
    /// preceding r_1 is l_0 itself.
    pub fn last_meet_before(&self, t: usize) -> Option<&Scalar> {
        match t {
            0 => None,
            1 => self.l.first(),
            _ => self.w_epoch(t - 1).and_then(|w| w.last()),
        }
    }

    /// [r_t, l_t]: the bottom component decays here.
    pub fn fall_interval(&self, t: usize) -> Option<(Scalar, Scalar)> {
        Some((self.r_t(t)?.clone(), self.l.get(t)?.clone()))
    }

    /// [l_{t−1}, r_t]: the bottom component rises here.
    pub fn rise_interval(&self, t: usize) -> Option<(Scalar, Scalar)> {
        if t == 0 {
            return None;
        }
        Some((self.l.get(t - 1)?.clone(), self.r_t(t)?.clone()))
    }

    /// [w_{t−1}, r_t]: from the last top meeting down to the bottom meeting.
    pub fn handoff_interval(&self, t: usize) -> Option<(Scalar, Scalar)> {
        Some((self.last_meet_before(t)?.clone(), self.r_t(t)?.clone()))
    }

    /// The maximal-layout event sequence 0, l_0, r_1, l_1, w_1^·, r_2, l_2,
    /// w_2^·, r_3, ... with every adjacent pair required to be non-decreasing.
    /// Returns the merged sequence; coincident neighbors are legal (they occur
    /// when the driving sequence is tight) and can be listed via
    /// [`SwitchSchedule::degenerate_contacts`].
    pub fn interleaving(&self) -> Result<Vec<Scalar>> {
        let mut seq: Vec<Scalar> = vec![Scalar::zero()];
        if let Some(l0) = self.l.first() {
            seq.push(l0.clone());
        }
        for t in 1..self.l.len() {
            if let Some(rt) = self.r_t(t) {
                seq.push(rt.clone());
            }
            seq.push(self.l[t].clone());
            if let Some(wt) = self.w_epoch(t) {
                seq.extend(wt.iter().cloned());
            }
        }
        for pair in seq.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::InvalidArgument(format!(
                    "switch positions out of order: {} after {}",
                    format_rational(&pair[1]),
                    format_rational(&pair[0])
                )));
            }
        }
        Ok(seq)
    }

    /// Positions where consecutive interleaved events coincide (zero-length
    /// stretches of the construction).
    pub fn degenerate_contacts(&self) -> Vec<Scalar> {
        let seq = match self.interleaving() {
            Ok(seq) => seq,
            Err(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        for pair in seq.windows(2) {
            if pair[0] == pair[1] && out.last() != Some(&pair[0]) {
                out.push(pair[0].clone());
            }
        }
        out
    }
}
