//! Ratio traces P_j(q)/q over a tail window and the exact inequality checks
//! tying their extrema together.
//!
//! On any linear stretch P(q) = P(a) + s·(q − a) the derivative of P(q)/q is
//! (s·a − P(a))/q², whose sign is constant; the ratio is therefore monotone
//! between breakpoints and its extrema over a window are attained at
//! breakpoints of the component itself.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::scalar::{decimal_digits, format_rational, int, rat, Scalar, DISPLAY_SIG_DIGITS};
use crate::schedule::SwitchSchedule;
use crate::system::NSystem;

/// Exact ratios P_j(q)/q at the breakpoints of component j (1-based) lying in
/// [tail_start, horizon]. Window endpoints are not added: only stored
/// breakpoints can carry extrema, so synthetic sample points would only blur
/// the result. May be empty for a short window.
pub fn phi_trace(s: &NSystem, j: usize, tail_start: &Scalar) -> Result<Vec<(Scalar, Scalar)>> {
    let f = s.component(j).ok_or_else(|| {
        Error::InvalidArgument(format!("component {} of {} does not exist", j, s.n))
    })?;
    if !tail_start.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "tail_start = {} must be positive",
            format_rational(tail_start)
        )));
    }
    if tail_start > &s.horizon {
        return Err(Error::OutOfDomain {
            q: format_rational(tail_start),
            end: format_rational(&s.horizon),
        });
    }
    Ok(f.points
        .iter()
        .filter(|(q, _)| q >= tail_start)
        .map(|(q, v)| (q.clone(), v / q))
        .collect())
}

/// Componentwise extrema of the ratio traces over one tail window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiEstimate {
    pub n: usize,
    /// Minimum ratio per component (1-based index j at position j−1).
    pub under: Vec<Scalar>,
    /// Maximum ratio per component.
    pub over: Vec<Scalar>,
    pub tail_start: Scalar,
    pub horizon: Scalar,
}

impl PhiEstimate {
    /// Largest componentwise distance to a reference (under, over) pair.
    pub fn max_deviation(&self, under: &[Scalar], over: &[Scalar]) -> Scalar {
        debug_assert_eq!(under.len(), self.n);
        debug_assert_eq!(over.len(), self.n);
        let mut worst = Scalar::from_integer(0.into());
        for (mine, target) in self.under.iter().zip(under).chain(self.over.iter().zip(over)) {
            let d = (mine - target).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// Minimum and maximum of every component's ratio trace on
/// [tail_start, horizon]. Every component must have at least one breakpoint
/// in the window.
pub fn estimate_phi(s: &NSystem, tail_start: &Scalar) -> Result<PhiEstimate> {
    let mut under = Vec::with_capacity(s.n);
    let mut over = Vec::with_capacity(s.n);
    for j in 1..=s.n {
        let trace = phi_trace(s, j, tail_start)?;
        let Some(first) = trace.first() else {
            return Err(Error::InvalidArgument(format!(
                "window [{}, {}] contains no breakpoints of component {}",
                format_rational(tail_start),
                format_rational(&s.horizon),
                j
            )));
        };
        let mut lo = first.1.clone();
        let mut hi = first.1.clone();
        for (_, ratio) in &trace[1..] {
            if ratio < &lo {
                lo = ratio.clone();
            }
            if ratio > &hi {
                hi = ratio.clone();
            }
        }
        under.push(lo);
        over.push(hi);
    }
    Ok(PhiEstimate {
        n: s.n,
        under,
        over,
        tail_start: tail_start.clone(),
        horizon: s.horizon.clone(),
    })
}

/// CSV of all ratio traces: one row per breakpoint in the window, columns
/// `q,ratio,component`, values rendered to 12 significant digits.
pub fn trace_csv(s: &NSystem, tail_start: &Scalar) -> Result<String> {
    let mut out = String::from("q,ratio,component\n");
    for j in 1..=s.n {
        for (q, ratio) in phi_trace(s, j, tail_start)? {
            out.push_str(&decimal_digits(&q, DISPLAY_SIG_DIGITS).0);
            out.push(',');
            out.push_str(&decimal_digits(&ratio, DISPLAY_SIG_DIGITS).0);
            out.push(',');
            out.push_str(&j.to_string());
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// lhs ≤ rhs; slack = rhs − lhs.
    Le,
    /// lhs ≥ rhs; slack = lhs − rhs.
    Ge,
    /// lhs = 0 (rhs unused); slack = −|lhs|.
    AbsZero,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::AbsZero => "=0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    /// The check could not be evaluated (a denominator within tol of zero);
    /// lhs/rhs then record the vanishing quantity and 0.
    Indeterminate,
}

/// One checked relation. Under every relation the check is satisfied exactly
/// when slack ≥ −tol, so slack is the uniform margin measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub relation: Relation,
    pub slack: Scalar,
    pub verdict: Verdict,
}

fn check(name: &'static str, lhs: Scalar, rhs: Scalar, relation: Relation, tol: &Scalar) -> InequalityCheck {
    let slack = match relation {
        Relation::Le => &rhs - &lhs,
        Relation::Ge => &lhs - &rhs,
        Relation::AbsZero => -lhs.abs(),
    };
    let verdict = if slack >= -tol.clone() {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    InequalityCheck {
        name,
        lhs,
        rhs,
        relation,
        slack,
        verdict,
    }
}

fn indeterminate(name: &'static str, vanishing: Scalar, relation: Relation) -> InequalityCheck {
    InequalityCheck {
        name,
        lhs: vanishing,
        rhs: int(0),
        relation,
        slack: int(0),
        verdict: Verdict::Indeterminate,
    }
}

/// A bundle of checks; `satisfied` means no row failed (indeterminate rows
/// do not count as failures).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityReport {
    pub rows: Vec<InequalityCheck>,
    pub satisfied: bool,
    /// Which case of a branching check fired, if it branches.
    pub branch: Option<&'static str>,
}

impl InequalityReport {
    fn from_rows(rows: Vec<InequalityCheck>, branch: Option<&'static str>) -> Self {
        let satisfied = rows.iter().all(|r| r.verdict != Verdict::Fails);
        InequalityReport {
            rows,
            satisfied,
            branch,
        }
    }
}

fn require_three(under: &[Scalar], over: &[Scalar], what: &str) -> Result<()> {
    if under.len() != 3 || over.len() != 3 {
        return Err(Error::Unsupported {
            n: under.len().max(over.len()),
            what: format!("{what} is defined for n = 3"),
        });
    }
    Ok(())
}

/// Relations every limit tuple (φ̲₁, φ̲₂, φ̲₃; φ̄₁, φ̄₂, φ̄₃) of a proper
/// 3-system satisfies: the product identity coupling the outer constants,
/// two mixed bounds, and the range of the third constant.
pub fn check_laurent(under: &[Scalar], over: &[Scalar], tol: &Scalar) -> Result<InequalityReport> {
    require_three(under, over, "check_laurent")?;
    let (u1, u3) = (&under[0], &under[2]);
    let (o1, o3) = (&over[0], &over[2]);
    let rows = vec![
        check(
            "product-identity",
            u3 + u3 * o1 + o1,
            int(0),
            Relation::AbsZero,
            tol,
        ),
        check(
            "lower-mixed-bound",
            u1 * int(2) + o3,
            -u3 * (int(3) + u1 + o3 * int(2)),
            Relation::Le,
            tol,
        ),
        check(
            "upper-mixed-bound",
            o3 * int(2) + u1,
            -o1 * (int(3) + o3 + u1 * int(2)),
            Relation::Ge,
            tol,
        ),
        check("third-under-nonnegative", u3.clone(), int(0), Relation::Ge, tol),
        check("third-over-at-most-one", o3.clone(), int(1), Relation::Le, tol),
    ];
    Ok(InequalityReport::from_rows(rows, None))
}

/// Bounds pinning the middle constants from the outer ones. When the third
/// constant reaches 1 the generic bounds degenerate into exact equalities,
/// so the check branches: `sharp` (φ̲₃ < 1 − tol) bounds φ̄₂ and φ̲₂ by the
/// two quotients; `degenerate` asserts the forced values instead. Quotients
/// whose denominator lies within tol of zero are reported indeterminate.
pub fn check_schmidt_summerer(
    under: &[Scalar],
    over: &[Scalar],
    tol: &Scalar,
) -> Result<InequalityReport> {
    require_three(under, over, "check_schmidt_summerer")?;
    let (u1, u2, u3) = (&under[0], &under[1], &under[2]);
    let (o1, o2, o3) = (&over[0], &over[1], &over[2]);
    let sharp = u3 < &(int(1) - tol);
    let rows = if sharp {
        let mut rows = Vec::with_capacity(2);
        let denom_up = int(2) - o1 - o1 * u1;
        if denom_up.abs() <= *tol {
            rows.push(indeterminate("second-over-bound", denom_up, Relation::Le));
        } else {
            let bound = (o1 - u1) / denom_up;
            rows.push(check("second-over-bound", o2.clone(), bound, Relation::Le, tol));
        }
        let denom_lo = int(2) - u3 - o3 * u3;
        if denom_lo.abs() <= *tol {
            rows.push(indeterminate("second-under-bound", denom_lo, Relation::Ge));
        } else {
            let bound = (u3 - o3) / denom_lo;
            rows.push(check("second-under-bound", u2.clone(), bound, Relation::Ge, tol));
        }
        rows
    } else {
        vec![
            check("third-under-equals-one", u3 - int(1), int(0), Relation::AbsZero, tol),
            check("third-over-equals-one", o3 - int(1), int(0), Relation::AbsZero, tol),
            check("second-over-equals-one", o2 - int(1), int(0), Relation::AbsZero, tol),
            check(
                "first-over-equals-second-under",
                o1 - u2,
                int(0),
                Relation::AbsZero,
                tol,
            ),
            check(
                "second-under-equals-minus-half",
                u2 + rat(1, 2),
                int(0),
                Relation::AbsZero,
                tol,
            ),
        ]
    };
    Ok(InequalityReport::from_rows(
        rows,
        Some(if sharp { "sharp" } else { "degenerate" }),
    ))
}

/// Estimates over growing horizons: for each epoch e = 2..E the system is
/// truncated to l_e with the window starting at l_⌈e/2⌉, and the worst
/// componentwise distance to the reference tuple is reported.
pub fn convergence_report(
    s: &NSystem,
    sched: &SwitchSchedule,
    under: &[Scalar],
    over: &[Scalar],
) -> Result<Vec<(usize, Scalar)>> {
    let last = sched.l.len().saturating_sub(1);
    if last < 2 {
        return Err(Error::InvalidArgument(
            "convergence needs a schedule with at least two epochs".into(),
        ));
    }
    let mut out = Vec::with_capacity(last - 1);
    for e in 2..=last {
        let horizon = &sched.l[e];
        let tail = &sched.l[e.div_ceil(2)];
        let comps = s
            .components
            .iter()
            .map(|f| f.truncated(horizon))
            .collect::<Result<Vec<_>>>()?;
        let trunc = NSystem::new(s.n, horizon.clone(), comps);
        let est = estimate_phi(&trunc, tail)?;
        out.push((e, est.max_deviation(under, over)));
    }
    Ok(out)
}
