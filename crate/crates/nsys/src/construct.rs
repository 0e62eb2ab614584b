//! Builders producing exact systems together with their switch schedules.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::{format_rational, int, rat, Scalar};
use crate::schedule::{default_lacunary, PhaseKind, PhaseMark, SwitchSchedule, ZigzagPhase};
use crate::system::NSystem;

/// Cap on zigzag periods per intermediate stretch; beyond this the build
/// would not finish in reasonable time or memory.
pub const MAX_ZIGZAG_PERIODS: u64 = 10_000_000;

/// Which construction a target table or build refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    Maximal,
    Alternating,
}

/// Componentwise limits (under, over) of P_j(q)/q as the horizon grows, for
/// the two constructions. Defined for n ≥ 3.
pub fn nsystem_targets(kind: ConstructionKind, n: usize) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    if n < 3 {
        return Err(Error::Unsupported {
            n,
            what: "target table needs n >= 3".into(),
        });
    }
    let deficit_half = rat(2 - n as i64, 2);
    let mut under = Vec::with_capacity(n);
    let mut over = Vec::with_capacity(n);
    match kind {
        ConstructionKind::Maximal => {
            under.push(int(1 - n as i64));
            under.push(deficit_half.clone());
            under.resize(n, int(1));
            over.push(deficit_half);
            over.resize(n, int(1));
        }
        ConstructionKind::Alternating => {
            under.push(int(1 - n as i64));
            under.push(deficit_half);
            under.resize(n, int(0));
            over.push(int(0));
            over.resize(n, int(1));
        }
    }
    Ok((under, over))
}

/// Incremental emitter: walks forward in q, switching one slope at a time,
/// and records only materialized breakpoints (zero-length stretches collapse
/// into their endpoints, and a revert at zero distance erases the kink).
struct Tracker {
    n: usize,
    q: Scalar,
    values: Vec<Scalar>,
    active: Vec<Scalar>,
    points: Vec<Vec<(Scalar, Scalar)>>,
    seg_slopes: Vec<Vec<Scalar>>,
}

impl Tracker {
    /// Starts at the origin with P_1 decaying and the rest rising.
    fn new(n: usize) -> Self {
        let mut active = vec![int(1); n];
        active[0] = int(-(n as i64 - 1));
        Tracker {
            n,
            q: Scalar::zero(),
            values: vec![Scalar::zero(); n],
            active,
            points: vec![vec![(Scalar::zero(), Scalar::zero())]; n],
            seg_slopes: vec![Vec::new(); n],
        }
    }

    fn advance(&mut self, dq: &Scalar) {
        debug_assert!(!dq.is_negative());
        if dq.is_zero() {
            return;
        }
        for (v, s) in self.values.iter_mut().zip(&self.active) {
            *v += s * dq;
        }
        self.q += dq;
    }

    fn advance_to(&mut self, q_target: &Scalar) {
        let dq = q_target - &self.q;
        self.advance(&dq);
    }

    fn set_slope(&mut self, c: usize, s: Scalar) {
        if self.active[c] == s {
            return;
        }
        if self.points[c].last().unwrap().0 == self.q {
            // Nothing materialized since the last emitted point. Reverting to
            // the slope of the stored segment makes that point a no-op kink.
            if self.seg_slopes[c].last() == Some(&s) {
                self.points[c].pop();
                self.seg_slopes[c].pop();
            }
            self.active[c] = s;
            return;
        }
        let v = self.values[c].clone();
        self.points[c].push((self.q.clone(), v));
        let old = std::mem::replace(&mut self.active[c], s);
        self.seg_slopes[c].push(old);
    }

    /// Distance until the decaying component `faller` reaches the rising
    /// component `target` below it.
    fn meet_distance(&self, faller: usize, target: usize) -> Scalar {
        let gap = &self.values[faller] - &self.values[target];
        debug_assert!(!gap.is_negative());
        gap / int(self.n as i64)
    }

    fn finish(mut self) -> Vec<PiecewiseLinear> {
        let mut out = Vec::with_capacity(self.n);
        for c in 0..self.n {
            let mut pts = std::mem::take(&mut self.points[c]);
            let mut slopes = std::mem::take(&mut self.seg_slopes[c]);
            if pts.last().unwrap().0 < self.q {
                pts.push((self.q.clone(), self.values[c].clone()));
                slopes.push(self.active[c].clone());
            }
            out.push(PiecewiseLinear::from_parts(pts, slopes));
        }
        out
    }
}

fn check_driving_sequence(l: &[Scalar]) -> Result<()> {
    if l.len() < 2 {
        return Err(Error::InvalidArgument(
            "driving sequence needs at least l_0 and l_1".into(),
        ));
    }
    if !l[0].is_positive() {
        return Err(Error::InvalidArgument(format!(
            "l_0 = {} must be positive",
            format_rational(&l[0])
        )));
    }
    for (i, pair) in l.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument(format!(
                "driving sequence not strictly increasing at l_{}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// [0, l_1]: P_1 decays to l_0, P_2 takes over until they meet at r_1 = 2·l_0,
/// then P_1 decays again. When l_1 = 2·l_0 the final stretch is empty.
fn run_initial_step(t: &mut Tracker, l0: &Scalar, l1: &Scalar, sched: &mut SwitchSchedule) -> Result<()> {
    t.advance_to(l0);
    t.set_slope(0, int(1));
    t.set_slope(1, int(-(t.n as i64 - 1)));
    let dq = t.meet_distance(1, 0);
    t.advance(&dq);
    debug_assert_eq!(t.q, l0 * int(2));
    sched.r.push(t.q.clone());
    t.set_slope(1, int(1));
    t.set_slope(0, int(-(t.n as i64 - 1)));
    if l1 < &t.q {
        return Err(Error::Build {
            epoch: 1,
            reason: format!(
                "bottom meeting r_1 = {} lands beyond l_1 = {}",
                format_rational(&t.q),
                format_rational(l1)
            ),
        });
    }
    t.advance_to(l1);
    Ok(())
}

/// [l_i, l_{i+1}]: the top component decays, handing the decay down at each
/// touch, until P_2 reaches P_1 at r_{i+1}; P_1 then decays to l_{i+1}.
fn run_epoch(t: &mut Tracker, i: usize, l_next: &Scalar, sched: &mut SwitchSchedule) -> Result<()> {
    let fall = int(-(t.n as i64 - 1));
    t.set_slope(0, int(1));
    t.set_slope(t.n - 1, fall.clone());
    let mut faller = t.n - 1;
    let mut meets = Vec::with_capacity(t.n - 2);
    while faller > 1 {
        let target = faller - 1;
        let dq = t.meet_distance(faller, target);
        t.advance(&dq);
        meets.push(t.q.clone());
        t.set_slope(faller, int(1));
        t.set_slope(target, fall.clone());
        faller = target;
    }
    let dq = t.meet_distance(1, 0);
    t.advance(&dq);
    sched.r.push(t.q.clone());
    sched.w.push(meets);
    t.set_slope(1, int(1));
    t.set_slope(0, fall);
    if l_next < &t.q {
        return Err(Error::Build {
            epoch: i + 1,
            reason: format!(
                "bottom meeting r_{} = {} lands beyond l_{} = {}",
                i + 1,
                format_rational(&t.q),
                i + 1,
                format_rational(l_next)
            ),
        });
    }
    t.advance_to(l_next);
    Ok(())
}

/// The greedy construction on a driving sequence l = l_0 < l_1 < ... for
/// n ≥ 3. The bottom meeting of each step must land at or before the next
/// driving position, otherwise the build fails naming the offending epoch.
/// Returns the system on [0, last(l)] and every switch position.
pub fn build_max_system(n: usize, l: &[Scalar]) -> Result<(NSystem, SwitchSchedule)> {
    if n < 3 {
        return Err(Error::Unsupported {
            n,
            what: "builder needs n >= 3".into(),
        });
    }
    check_driving_sequence(l)?;
    let mut t = Tracker::new(n);
    let mut sched = SwitchSchedule {
        l: l.to_vec(),
        ..SwitchSchedule::default()
    };
    run_initial_step(&mut t, &l[0], &l[1], &mut sched)?;
    for i in 1..l.len() - 1 {
        run_epoch(&mut t, i, &l[i + 1], &mut sched)?;
    }
    let horizon = l.last().unwrap().clone();
    Ok((NSystem::new(n, horizon, t.finish()), sched))
}

/// Inputs for the alternating construction (n = 3 only): a factorial prefix
/// of `inner_epochs` steps from `l0`, then `phases` rounds of a zigzag band
/// followed by a replayed decay. `d` is the zigzag period; it must not
/// exceed l0/10 so the band is entered well above its floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingSpec {
    pub n: usize,
    pub d: Scalar,
    pub inner_epochs: usize,
    pub phases: usize,
    pub l0: Scalar,
}

impl AlternatingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n != 3 {
            return Err(Error::Unsupported {
                n: self.n,
                what: "alternating builder is defined for n = 3".into(),
            });
        }
        if !self.l0.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "l0 = {} must be positive",
                format_rational(&self.l0)
            )));
        }
        if !self.d.is_positive() || &self.d * int(10) > self.l0 {
            return Err(Error::InvalidArgument(format!(
                "period d = {} must lie in (0, l0/10]",
                format_rational(&self.d)
            )));
        }
        // One inner epoch leaves the top pair in contact at l_1 = 2l_0, so
        // the band would open with width zero; two epochs are the minimum.
        if self.inner_epochs < 2 {
            return Err(Error::InvalidArgument(
                "inner_epochs must be at least 2".into(),
            ));
        }
        if self.phases == 0 {
            return Err(Error::InvalidArgument("phases must be at least 1".into()));
        }
        Ok(())
    }
}

/// Template scale multiplier A and total-length multiplier B for replay
/// phase p of `phases`. Early phases stay modest so later bands start high;
/// the last one decays long enough (A = 8, B = 256) that the final window is
/// dominated by one template copy.
fn phase_growth(p: usize, phases: usize) -> (Scalar, Scalar) {
    if p == phases {
        (int(8), int(256))
    } else {
        (int(1), int(2 * p as i64 + 6))
    }
}

/// Worst relative distance of the current values from the decay profile
/// (P_1 near −2q, the others near q); meaningful at replay boundaries.
fn profile_deviation(t: &Tracker) -> Scalar {
    let r1 = &t.values[0] / &t.q + int(2);
    let r2 = int(1) - &t.values[1] / &t.q;
    let r3 = int(1) - &t.values[2] / &t.q;
    r1.max(r2).max(r3)
}

fn maximal_mark(t: &Tracker, scale: Option<Scalar>) -> PhaseMark {
    PhaseMark {
        q: t.q.clone(),
        kind: PhaseKind::Maximal,
        scale,
        eps: Some(profile_deviation(t)),
    }
}

/// Zigzag band: P_2 and P_3 trade the decay every half period while their
/// touch value drops by d/2 per period; stops at the last node whose value
/// still exceeds d, then P_2 decays down to P_1. Entered with P_1 decaying.
fn run_intermediate_phase(t: &mut Tracker, d: &Scalar, sched: &mut SwitchSchedule) -> Result<()> {
    let fall = int(-2);
    t.set_slope(0, int(1));
    t.set_slope(2, fall.clone());
    let dq = t.meet_distance(2, 1);
    t.advance(&dq);
    let b0 = t.q.clone();
    let v0 = t.values[1].clone();
    debug_assert_eq!(v0, t.values[2]);
    if &v0 <= d {
        return Err(Error::Build {
            epoch: sched.zigzags.len() + 1,
            reason: format!(
                "zigzag band starts at {} which is not above its period {}",
                format_rational(&v0),
                format_rational(d)
            ),
        });
    }
    // Largest h with v0 − (h−1)·d/2 > d, i.e. h − 1 < 2(v0 − d)/d; the final
    // node value v0 − h·d/2 then lies in (d/2, d].
    let x = (&v0 - d) * int(2) / d;
    let h_int: BigInt = if x.is_integer() {
        x.to_integer()
    } else {
        x.floor().to_integer() + 1
    };
    let h = h_int.to_u64().unwrap_or(u64::MAX);
    if h > MAX_ZIGZAG_PERIODS {
        return Err(Error::Budget {
            what: "zigzag periods".into(),
            required: h_int.to_string(),
            budget: MAX_ZIGZAG_PERIODS.to_string(),
        });
    }
    t.set_slope(2, int(1));
    t.set_slope(1, fall.clone());
    let half = d / int(2);
    for _ in 0..h {
        t.advance(&half);
        t.set_slope(1, int(1));
        t.set_slope(2, fall.clone());
        t.advance(&half);
        t.set_slope(2, int(1));
        t.set_slope(1, fall.clone());
    }
    let q_tilde = t.q.clone();
    let v_end = t.values[1].clone();
    debug_assert_eq!(v_end, t.values[2]);
    debug_assert!(&v_end * int(2) > *d && v_end <= *d);
    let dq = t.meet_distance(1, 0);
    t.advance(&dq);
    let q_meet = t.q.clone();
    sched.r.push(q_meet.clone());
    t.set_slope(1, int(1));
    t.set_slope(0, fall);
    sched.zigzags.push(ZigzagPhase {
        b0,
        d: d.clone(),
        h,
        v0,
        v_end,
        q_tilde,
        q_meet,
    });
    Ok(())
}

/// Replayed decay: P_1 decays for a·q₁, hands up, P_2 decays back down to it,
/// and P_1 decays again until the stretch spans b·(a·q₁) in total. Entered
/// with P_1 decaying at q₁; returns the template scale a·q₁.
fn run_replay_phase(t: &mut Tracker, a: &Scalar, b: &Scalar, sched: &mut SwitchSchedule) -> Scalar {
    let q1 = t.q.clone();
    let scale = a * &q1;
    let q2 = &q1 + b * &scale;
    t.advance(&scale);
    t.set_slope(0, int(1));
    t.set_slope(1, int(-2));
    let dq = t.meet_distance(1, 0);
    t.advance(&dq);
    debug_assert_eq!(t.q, &q1 + &scale * int(2));
    sched.r.push(t.q.clone());
    t.set_slope(1, int(1));
    t.set_slope(0, int(-2));
    t.advance_to(&q2);
    scale
}

/// The alternating construction: maximal prefix, then `phases` rounds of
/// band-then-replay. Returns the system, its schedule, and the phase marks
/// (also stored in the schedule); the horizon is the final replay boundary.
pub fn build_alternating_system(
    spec: &AlternatingSpec,
) -> Result<(NSystem, SwitchSchedule, Vec<PhaseMark>)> {
    spec.validate()?;
    let l = default_lacunary(&spec.l0, spec.inner_epochs + 1)?;
    let mut t = Tracker::new(3);
    let mut sched = SwitchSchedule {
        l: l.clone(),
        ..SwitchSchedule::default()
    };
    run_initial_step(&mut t, &l[0], &l[1], &mut sched)?;
    for i in 1..l.len() - 1 {
        run_epoch(&mut t, i, &l[i + 1], &mut sched)?;
    }
    let mut marks = vec![maximal_mark(&t, None)];
    for p in 1..=spec.phases {
        run_intermediate_phase(&mut t, &spec.d, &mut sched)?;
        marks.push(PhaseMark {
            q: t.q.clone(),
            kind: PhaseKind::Intermediate,
            scale: None,
            eps: None,
        });
        let (a, b) = phase_growth(p, spec.phases);
        let scale = run_replay_phase(&mut t, &a, &b, &mut sched);
        marks.push(maximal_mark(&t, Some(scale)));
    }
    let horizon = t.q.clone();
    sched.phase_marks = marks.clone();
    Ok((NSystem::new(3, horizon, t.finish()), sched, marks))
}
