//! Ordered tuples of piecewise-linear components and the axiom validator.
//!
//! A valid n-system has components P_1 ≤ ... ≤ P_n that start at 0, sum to
//! zero, move with slopes from {-(n-1), 1} with exactly one component decaying
//! at a time, and hand the decaying role downward only where the two involved
//! graphs touch. The validator reports every violation it can attribute to a
//! position; it never errors.

use num_traits::Zero;

use crate::piecewise::PiecewiseLinear;
use crate::scalar::{format_rational, int, Scalar};

/// Tuple of `n` components on the common interval [0, horizon].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NSystem {
    pub n: usize,
    pub horizon: Scalar,
    pub components: Vec<PiecewiseLinear>,
}

impl NSystem {
    pub fn new(n: usize, horizon: Scalar, components: Vec<PiecewiseLinear>) -> Self {
        NSystem {
            n,
            horizon,
            components,
        }
    }

    /// The decaying slope −(n−1) of this system's slope set.
    pub fn falling_slope(&self) -> Scalar {
        int(-(self.n as i64 - 1))
    }

    /// Component by 1-based index, matching the P_j naming.
    pub fn component(&self, j: usize) -> Option<&PiecewiseLinear> {
        if j == 0 {
            return None;
        }
        self.components.get(j - 1)
    }
}

/// The individually checkable requirements on an n-system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// Breakpoints strictly increasing from q = 0, slope/point counts
    /// consistent, all components ending at the shared horizon.
    Structure,
    /// Every stored breakpoint value agrees with the previous breakpoint
    /// extended by the segment slope.
    Continuity,
    /// Every slope lies in {−(n−1), 1}.
    SlopeSet,
    /// P_j(0) = 0 for all j.
    Start,
    /// P_1 ≤ P_2 ≤ ... ≤ P_n everywhere.
    Order,
    /// Σ_j P_j = 0: zero at q = 0 and slope sum zero on every segment.
    ZeroSum,
    /// Exactly one component decays on each open segment.
    OneDecaying,
    /// A component may take over the decaying role from a higher-indexed one
    /// freely; taking it from a lower-indexed one requires the graphs to
    /// touch at the handover position.
    SwitchRule,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Structure => "structure",
            Axiom::Continuity => "continuity",
            Axiom::SlopeSet => "slope-set",
            Axiom::Start => "start",
            Axiom::Order => "order",
            Axiom::ZeroSum => "zero-sum",
            Axiom::OneDecaying => "one-decaying",
            Axiom::SwitchRule => "switch-rule",
        }
    }
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One detected axiom violation, located as precisely as possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    /// Position of the violation (segment start for per-segment findings).
    pub q: Scalar,
    /// 1-based indices of the components involved; empty for global findings.
    pub components: Vec<usize>,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at q = {}: {}",
            self.axiom,
            format_rational(&self.q),
            self.detail
        )
    }
}

/// Recurring-contact counts standing in for properness, which has no
/// first-principles definition available here. A system revisiting both the
/// bottom pair (P_1 = P_2) and the top pair (P_{n-1} = P_n) at two or more
/// positions each is treated as proper; anything shorter is flagged, never
/// failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Properness {
    pub bottom_contacts: usize,
    pub top_contacts: usize,
    pub satisfied: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub properness: Properness,
}

impl ValidationReport {
    /// Distinct axioms that were violated.
    pub fn violated_axioms(&self) -> Vec<Axiom> {
        let mut axioms: Vec<Axiom> = Vec::new();
        for v in &self.violations {
            if !axioms.contains(&v.axiom) {
                axioms.push(v.axiom);
            }
        }
        axioms
    }
}

fn structure_violations(s: &NSystem) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.n < 2 {
        out.push(Violation {
            axiom: Axiom::Structure,
            q: int(0),
            components: vec![],
            detail: format!("n = {} < 2", s.n),
        });
    }
    if s.components.len() != s.n {
        out.push(Violation {
            axiom: Axiom::Structure,
            q: int(0),
            components: vec![],
            detail: format!("{} components for n = {}", s.components.len(), s.n),
        });
        return out;
    }
    for (c, f) in s.components.iter().enumerate() {
        let j = c + 1;
        if f.points.len() < 2 || f.slopes.len() != f.points.len() - 1 {
            out.push(Violation {
                axiom: Axiom::Structure,
                q: int(0),
                components: vec![j],
                detail: format!(
                    "{} breakpoints with {} slopes",
                    f.points.len(),
                    f.slopes.len()
                ),
            });
            continue;
        }
        if !f.points[0].0.is_zero() {
            out.push(Violation {
                axiom: Axiom::Structure,
                q: f.points[0].0.clone(),
                components: vec![j],
                detail: "first breakpoint not at q = 0".into(),
            });
        }
        for pair in f.points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                out.push(Violation {
                    axiom: Axiom::Structure,
                    q: pair[1].0.clone(),
                    components: vec![j],
                    detail: format!(
                        "breakpoint order broken: {} after {}",
                        format_rational(&pair[1].0),
                        format_rational(&pair[0].0)
                    ),
                });
            }
        }
        let end = &f.points.last().unwrap().0;
        if end != &s.horizon {
            out.push(Violation {
                axiom: Axiom::Structure,
                q: end.clone(),
                components: vec![j],
                detail: format!(
                    "component ends at {}, horizon is {}",
                    format_rational(end),
                    format_rational(&s.horizon)
                ),
            });
        }
    }
    out
}

/// Checks every axiom and reports all findings. Structural breakage (which
/// makes positional evaluation meaningless) preempts the pointwise checks.
pub fn validate(s: &NSystem) -> ValidationReport {
    let mut violations = structure_violations(s);
    if !violations.is_empty() {
        return ValidationReport {
            valid: false,
            properness: Properness {
                bottom_contacts: 0,
                top_contacts: 0,
                satisfied: false,
                note: "skipped: structural violations".into(),
            },
            violations,
        };
    }

    let n = s.n;
    let falling = s.falling_slope();
    let rising = int(1);
    let zero = Scalar::zero();

    // Per-component checks: start value, slope membership, stored-value
    // consistency along each segment.
    for (c, f) in s.components.iter().enumerate() {
        let j = c + 1;
        if !f.points[0].1.is_zero() {
            violations.push(Violation {
                axiom: Axiom::Start,
                q: int(0),
                components: vec![j],
                detail: format!("value {} at q = 0", format_rational(&f.points[0].1)),
            });
        }
        for (k, slope) in f.slopes.iter().enumerate() {
            if slope != &falling && slope != &rising {
                violations.push(Violation {
                    axiom: Axiom::SlopeSet,
                    q: f.points[k].0.clone(),
                    components: vec![j],
                    detail: format!(
                        "slope {} outside {{{}, 1}}",
                        format_rational(slope),
                        format_rational(&falling)
                    ),
                });
            }
        }
        for k in 0..f.slopes.len() {
            let (q0, v0) = &f.points[k];
            let (q1, v1) = &f.points[k + 1];
            let extended = v0 + &f.slopes[k] * (q1 - q0);
            if &extended != v1 {
                violations.push(Violation {
                    axiom: Axiom::Continuity,
                    q: q1.clone(),
                    components: vec![j],
                    detail: format!(
                        "stored value {} off the segment line (expected {})",
                        format_rational(v1),
                        format_rational(&extended)
                    ),
                });
            }
        }
    }

    // Union grid of all breakpoint positions.
    let mut grid: Vec<Scalar> = s
        .components
        .iter()
        .flat_map(|f| f.points.iter().map(|p| p.0.clone()))
        .collect();
    grid.sort();
    grid.dedup();

    let mut cursors = vec![0usize; n];
    let mut values: Vec<Scalar> = vec![zero.clone(); n];
    let mut prev_slopes: Option<Vec<Scalar>> = None;
    let mut bottom_contacts = 0usize;
    let mut top_contacts = 0usize;

    for (m, q) in grid.iter().enumerate() {
        for (c, f) in s.components.iter().enumerate() {
            while cursors[c] + 1 < f.points.len() && f.points[cursors[c] + 1].0 <= *q {
                cursors[c] += 1;
            }
            let (qk, vk) = &f.points[cursors[c]];
            values[c] = if qk == q {
                vk.clone()
            } else {
                vk + &f.slopes[cursors[c]] * (q - qk)
            };
        }

        if m == 0 {
            let sum: Scalar = values.iter().sum();
            if !sum.is_zero() {
                violations.push(Violation {
                    axiom: Axiom::ZeroSum,
                    q: q.clone(),
                    components: (1..=n).collect(),
                    detail: format!("component sum {} at q = 0", format_rational(&sum)),
                });
            }
        }

        for c in 0..n - 1 {
            if values[c] > values[c + 1] {
                violations.push(Violation {
                    axiom: Axiom::Order,
                    q: q.clone(),
                    components: vec![c + 1, c + 2],
                    detail: format!(
                        "{} above {}",
                        format_rational(&values[c]),
                        format_rational(&values[c + 1])
                    ),
                });
            }
        }

        if values[0] == values[1] && !q.is_zero() {
            bottom_contacts += 1;
        }
        if values[n - 2] == values[n - 1] && !q.is_zero() {
            top_contacts += 1;
        }

        // Slopes of the cell starting here (none at the final grid point).
        let cell_slopes: Option<Vec<Scalar>> = if m + 1 < grid.len() {
            Some(
                s.components
                    .iter()
                    .enumerate()
                    .map(|(c, f)| f.slopes[cursors[c]].clone())
                    .collect(),
            )
        } else {
            None
        };

        if let Some(cell) = &cell_slopes {
            let slope_sum: Scalar = cell.iter().sum();
            if !slope_sum.is_zero() {
                violations.push(Violation {
                    axiom: Axiom::ZeroSum,
                    q: q.clone(),
                    components: (1..=n).collect(),
                    detail: format!("slope sum {} on segment", format_rational(&slope_sum)),
                });
            }
            let decaying: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|(_, sl)| **sl < zero)
                .map(|(c, _)| c + 1)
                .collect();
            if decaying.len() != 1 {
                violations.push(Violation {
                    axiom: Axiom::OneDecaying,
                    q: q.clone(),
                    components: decaying.clone(),
                    detail: format!("{} decaying components on segment", decaying.len()),
                });
            }

            if let Some(prev) = &prev_slopes {
                // Handover legality at this interior switch position.
                let mut stopped_falling: Vec<usize> = Vec::new();
                let mut started_falling: Vec<usize> = Vec::new();
                for c in 0..n {
                    if prev[c] < zero && cell[c] > zero {
                        stopped_falling.push(c);
                    }
                    if prev[c] > zero && cell[c] < zero {
                        started_falling.push(c);
                    }
                }
                for &i in &stopped_falling {
                    for &j in &started_falling {
                        if i > j && values[i] != values[j] {
                            violations.push(Violation {
                                axiom: Axiom::SwitchRule,
                                q: q.clone(),
                                components: vec![j + 1, i + 1],
                                detail: format!(
                                    "decay handed down from P{} to P{} with values {} and {}",
                                    i + 1,
                                    j + 1,
                                    format_rational(&values[i]),
                                    format_rational(&values[j])
                                ),
                            });
                        }
                    }
                }
            }
        }
        prev_slopes = cell_slopes;
    }

    let satisfied = bottom_contacts >= 2 && top_contacts >= 2;
    let properness = Properness {
        bottom_contacts,
        top_contacts,
        satisfied,
        note: if satisfied {
            format!(
                "recurring contacts: {} bottom, {} top",
                bottom_contacts, top_contacts
            )
        } else {
            format!(
                "flagged: only {} bottom and {} top contact positions (proxy wants 2 of each)",
                bottom_contacts, top_contacts
            )
        },
    };

    ValidationReport {
        valid: violations.is_empty(),
        violations,
        properness,
    }
}
