//! Continuous piecewise-linear functions on a finite interval [0, Q].
//!
//! A function is stored as its breakpoints `(q, value)` together with one
//! slope per segment. The slope list is redundant for a well-formed function
//! (it can be recomputed from consecutive breakpoints) but keeping it lets the
//! system validator detect inconsistent data instead of silently repairing it.

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Scalar};

/// Which one-sided slope to read at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Continuous piecewise-linear function.
///
/// Well-formed data has strictly increasing `points[i].0` starting at 0,
/// `slopes.len() == points.len() - 1`, and every stored value consistent with
/// the slope of the segment leading to it. Construction via [`PiecewiseLinear::from_parts`]
/// does not verify any of this; the system validator reports violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinear {
    pub points: Vec<(Scalar, Scalar)>,
    pub slopes: Vec<Scalar>,
}

impl PiecewiseLinear {
    /// Wraps raw data without validation.
    pub fn from_parts(points: Vec<(Scalar, Scalar)>, slopes: Vec<Scalar>) -> Self {
        PiecewiseLinear { points, slopes }
    }

    /// Builds a function from breakpoints alone, deriving segment slopes.
    pub fn from_breakpoints(points: Vec<(Scalar, Scalar)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two breakpoints".into(),
            ));
        }
        let mut slopes = Vec::with_capacity(points.len() - 1);
        for pair in points.windows(2) {
            let (q0, v0) = &pair[0];
            let (q1, v1) = &pair[1];
            if q1 <= q0 {
                return Err(Error::InvalidArgument(format!(
                    "breakpoints not strictly increasing at q = {}",
                    format_rational(q1)
                )));
            }
            slopes.push((v1 - v0) / (q1 - q0));
        }
        Ok(PiecewiseLinear { points, slopes })
    }

    /// Cheap shape check used by operations that assume well-formed data.
    fn check_shape(&self) -> Result<()> {
        if self.points.len() < 2 || self.slopes.len() != self.points.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "malformed function: {} breakpoints, {} slopes",
                self.points.len(),
                self.slopes.len()
            )));
        }
        Ok(())
    }

    pub fn domain_end(&self) -> &Scalar {
        &self.points.last().expect("non-empty function").0
    }

    /// Exact value at `q`. Values at breakpoints are returned bit-for-bit as
    /// stored; interior positions interpolate along the segment slope.
    pub fn evaluate(&self, q: &Scalar) -> Result<Scalar> {
        self.check_shape()?;
        let start = &self.points[0].0;
        let end = self.domain_end();
        if q < start || q > end {
            return Err(Error::OutOfDomain {
                q: format_rational(q),
                end: format_rational(end),
            });
        }
        // Index of the last breakpoint with position <= q.
        let idx = self.points.partition_point(|p| &p.0 <= q) - 1;
        let (qk, vk) = &self.points[idx];
        if qk == q {
            return Ok(vk.clone());
        }
        Ok(vk + &self.slopes[idx] * (q - qk))
    }

    /// One-sided slope at `q`. The left slope is undefined at 0 and the right
    /// slope is undefined at the domain end.
    pub fn slope_at(&self, q: &Scalar, side: Side) -> Result<Scalar> {
        self.check_shape()?;
        let end = self.domain_end();
        if q < &self.points[0].0 || q > end {
            return Err(Error::OutOfDomain {
                q: format_rational(q),
                end: format_rational(end),
            });
        }
        let idx = match side {
            Side::Left => self.points.partition_point(|p| &p.0 < q),
            Side::Right => self.points.partition_point(|p| &p.0 <= q),
        };
        if idx == 0 || idx > self.slopes.len() {
            let side_name = if side == Side::Left { "left" } else { "right" };
            return Err(Error::InvalidArgument(format!(
                "no {side_name} slope at q = {}",
                format_rational(q)
            )));
        }
        Ok(self.slopes[idx - 1].clone())
    }

    /// Earliest position strictly after `q0` where `self` and `other` agree.
    ///
    /// The common domain is walked cell by cell (cells are delimited by the
    /// union of both breakpoint sets) and each linear difference is solved
    /// exactly. Equality already holding at `q0` is ignored; graphs that then
    /// coincide on an initial run report the first cell boundary after `q0`
    /// (first-equality convention). Returns `None` when the graphs never meet
    /// again before the common domain end.
    pub fn intersect_forward(&self, other: &Self, q0: &Scalar) -> Result<Option<Scalar>> {
        self.check_shape()?;
        other.check_shape()?;
        let end = self.domain_end().min(other.domain_end()).clone();
        if q0 < &self.points[0].0 || q0 < &other.points[0].0 || q0 >= &end {
            return Err(Error::OutOfDomain {
                q: format_rational(q0),
                end: format_rational(&end),
            });
        }

        let mut cuts: Vec<&Scalar> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|p| &p.0)
            .filter(|q| *q > q0 && **q <= end)
            .collect();
        cuts.sort();
        cuts.dedup();

        let mut a = q0.clone();
        let mut da = self.evaluate(&a)? - other.evaluate(&a)?;
        for b in cuts {
            let db = self.evaluate(b)? - other.evaluate(b)?;
            if da.numer().sign() == num_bigint::Sign::NoSign && &a != q0 {
                return Ok(Some(a));
            }
            use num_traits::Zero;
            if !da.is_zero() {
                if db.is_zero() {
                    return Ok(Some(b.clone()));
                }
                if (da.numer().sign() == num_bigint::Sign::Minus)
                    != (db.numer().sign() == num_bigint::Sign::Minus)
                {
                    // Sign change inside the cell: solve the linear crossing.
                    let q_star = &a - &da * (b - &a) / (&db - &da);
                    return Ok(Some(q_star));
                }
            }
            a = b.clone();
            da = db;
        }
        use num_traits::Zero;
        if da.is_zero() && &a != q0 {
            return Ok(Some(a));
        }
        Ok(None)
    }

    /// Restriction to [0, q_end], interpolating a final breakpoint if needed.
    pub fn truncated(&self, q_end: &Scalar) -> Result<Self> {
        self.check_shape()?;
        if q_end <= &self.points[0].0 || q_end > self.domain_end() {
            return Err(Error::OutOfDomain {
                q: format_rational(q_end),
                end: format_rational(self.domain_end()),
            });
        }
        let keep = self.points.partition_point(|p| &p.0 <= q_end);
        let mut points: Vec<(Scalar, Scalar)> = self.points[..keep].to_vec();
        let mut slopes: Vec<Scalar> = self.slopes[..keep - 1].to_vec();
        if &points.last().unwrap().0 != q_end {
            let v = self.evaluate(q_end)?;
            points.push((q_end.clone(), v));
            slopes.push(self.slopes[keep - 1].clone());
        }
        Ok(PiecewiseLinear { points, slopes })
    }

    /// Merges consecutive segments whose slopes agree and whose shared
    /// breakpoint lies exactly on the merged line. Builders may emit
    /// slope-preserving breakpoints (e.g. at epoch boundaries); this removes
    /// them without touching anything inconsistent.
    pub fn canonicalized(&self) -> Self {
        if self.check_shape().is_err() {
            return self.clone();
        }
        let mut points: Vec<(Scalar, Scalar)> = vec![self.points[0].clone()];
        let mut slopes: Vec<Scalar> = Vec::new();
        for i in 1..self.points.len() {
            let slope = &self.slopes[i - 1];
            let cur = &self.points[i];
            let prev = &self.points[i - 1];
            let mergeable = match slopes.last() {
                Some(last) if last == slope => {
                    // The breakpoint being dropped must sit on the extension
                    // of the run that started at the anchor point.
                    let (aq, av) = &points[points.len() - 2];
                    av + last * (&prev.0 - aq) == prev.1
                }
                _ => false,
            };
            if mergeable {
                *points.last_mut().unwrap() = cur.clone();
            } else {
                slopes.push(slope.clone());
                points.push(cur.clone());
            }
        }
        PiecewiseLinear { points, slopes }
    }

    /// Interior breakpoints where the slope turns from negative to positive.
    pub fn local_min_positions(&self) -> Vec<Scalar> {
        use num_traits::Zero;
        let zero = Scalar::zero();
        let mut out = Vec::new();
        for i in 1..self.points.len().saturating_sub(1) {
            if self.slopes[i - 1] < zero && self.slopes[i] > zero {
                out.push(self.points[i].0.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    /// First-fall shape: down at -2 on [0,1], up at +1 to q = 6.
    fn falling_then_rising() -> PiecewiseLinear {
        PiecewiseLinear::from_breakpoints(vec![
            (int(0), int(0)),
            (int(1), int(-2)),
            (int(6), int(3)),
        ])
        .unwrap()
    }

    /// Mirror shape: up at +1 on [0,1], down at -2 to q = 6.
    fn rising_then_falling() -> PiecewiseLinear {
        PiecewiseLinear::from_breakpoints(vec![
            (int(0), int(0)),
            (int(1), int(1)),
            (int(6), int(-9)),
        ])
        .unwrap()
    }

    #[test]
    fn evaluate_interpolates_exactly() {
        let f = falling_then_rising();
        assert_eq!(f.evaluate(&rat(3, 2)).unwrap(), rat(-3, 2));
        assert_eq!(f.evaluate(&int(1)).unwrap(), int(-2));
        assert_eq!(f.evaluate(&int(0)).unwrap(), int(0));
        assert_eq!(f.evaluate(&int(6)).unwrap(), int(3));
        assert!(f.evaluate(&int(7)).is_err());
        assert!(f.evaluate(&rat(-1, 2)).is_err());
    }

    #[test]
    fn breakpoint_values_are_returned_as_stored() {
        // An awkward rational value must come back bit-for-bit, not via
        // re-derivation from the slope.
        let v = rat(22, 7);
        let f = PiecewiseLinear::from_breakpoints(vec![
            (int(0), int(0)),
            (rat(1, 3), v.clone()),
            (int(2), int(0)),
        ])
        .unwrap();
        assert_eq!(f.evaluate(&rat(1, 3)).unwrap(), v);
    }

    #[test]
    fn one_sided_slopes() {
        let f = falling_then_rising();
        assert_eq!(f.slope_at(&int(1), Side::Left).unwrap(), int(-2));
        assert_eq!(f.slope_at(&int(1), Side::Right).unwrap(), int(1));
        assert_eq!(f.slope_at(&rat(1, 2), Side::Left).unwrap(), int(-2));
        assert_eq!(f.slope_at(&rat(1, 2), Side::Right).unwrap(), int(-2));
        assert_eq!(f.slope_at(&int(0), Side::Right).unwrap(), int(-2));
        assert!(f.slope_at(&int(0), Side::Left).is_err());
        assert!(f.slope_at(&int(6), Side::Right).is_err());
        assert_eq!(f.slope_at(&int(6), Side::Left).unwrap(), int(1));
    }

    #[test]
    fn forward_intersection_finds_first_meeting() {
        let f = falling_then_rising();
        let g = rising_then_falling();
        // Gap of 3 at q = 1 closing at combined rate 3.
        assert_eq!(f.intersect_forward(&g, &int(1)).unwrap(), Some(int(2)));
        assert_eq!(f.evaluate(&int(2)).unwrap(), g.evaluate(&int(2)).unwrap());
        // From 0 the initial contact at q0 itself is ignored.
        assert_eq!(f.intersect_forward(&g, &int(0)).unwrap(), Some(int(2)));
    }

    #[test]
    fn parallel_graphs_never_meet() {
        let f = falling_then_rising();
        let mut g = falling_then_rising();
        for (_, v) in g.points.iter_mut() {
            *v += int(1);
        }
        assert_eq!(f.intersect_forward(&g, &int(0)).unwrap(), None);
    }

    #[test]
    fn coincidence_run_reports_its_start() {
        // Graphs differ on [0,2], meet at 2, and stay equal on [2,4].
        let f = PiecewiseLinear::from_breakpoints(vec![
            (int(0), int(0)),
            (int(2), int(2)),
            (int(4), int(4)),
        ])
        .unwrap();
        let g = PiecewiseLinear::from_breakpoints(vec![
            (int(0), int(-2)),
            (int(2), int(2)),
            (int(4), int(4)),
        ])
        .unwrap();
        assert_eq!(f.intersect_forward(&g, &rat(1, 2)).unwrap(), Some(int(2)));
    }

    #[test]
    fn truncation_interpolates_the_cut() {
        let f = falling_then_rising();
        let t = f.truncated(&int(3)).unwrap();
        assert_eq!(t.domain_end(), &int(3));
        assert_eq!(t.evaluate(&int(3)).unwrap(), int(0));
        assert_eq!(t.slopes, vec![int(-2), int(1)]);
        let exact_cut = f.truncated(&int(1)).unwrap();
        assert_eq!(exact_cut.points.len(), 2);
    }

    #[test]
    fn canonicalize_merges_collinear_segments() {
        let f = PiecewiseLinear::from_parts(
            vec![
                (int(0), int(0)),
                (int(1), int(1)),
                (int(2), int(2)),
                (int(3), int(0)),
            ],
            vec![int(1), int(1), int(-2)],
        );
        let c = f.canonicalized();
        assert_eq!(c.points.len(), 3);
        assert_eq!(c.slopes, vec![int(1), int(-2)]);
        assert_eq!(c.evaluate(&rat(3, 2)).unwrap(), rat(3, 2));
    }

    #[test]
    fn local_minima_are_sign_changes() {
        let f = falling_then_rising();
        assert_eq!(f.local_min_positions(), vec![int(1)]);
        let g = rising_then_falling();
        assert!(g.local_min_positions().is_empty());
    }
}
