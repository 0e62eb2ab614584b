//! Exact successive minima of the simultaneous-approximation lattice
//! {(x, x·ξ₁ − y₁, x·ξ₂ − y₂)} under the box gauge
//! max(|x|/T², T|x·ξ₁ − y₁|, T|x·ξ₂ − y₂|).
//!
//! The scan walks x upward keeping integer residues N_j·x mod D_j, so the
//! hot loop performs no rational arithmetic; exact points are materialized
//! only when a candidate can beat the current third minimum.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{factorial, format_rational, int, pow10, to_f64, Scalar};
use crate::system::NSystem;

/// Digit budget for the truncated series denominators.
pub const MAX_XI_DIGITS: u64 = 1_000_000;

/// Hard cap on scan length; longer scans are refused rather than run forever.
pub const MAX_SCAN_LENGTH: u64 = 1_000_000_000_000;

/// Scan length the auto-certifying sample rule is willing to spend per box.
pub const AUTO_SCAN_CAP: u64 = 2_000_000_000;

/// A truncated factorial-exponent decimal vector: coordinate j (1-based,
/// j < n) is the sum of 10^(−(k(n−1)+j)!) over k = 0..terms−1. Exact by
/// construction; `next_exponent` is the first omitted exponent, so results
/// are faithful to the untruncated vector for box scales T well below
/// 10^(next_exponent/3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiVector {
    pub n: usize,
    pub terms: usize,
    pub xi: Vec<Scalar>,
    pub largest_exponent: u64,
    pub next_exponent: u64,
    pub description: String,
}

impl XiVector {
    /// Box scales T up to roughly 10^this are unaffected by the truncation.
    pub fn valid_box_exponent(&self) -> u64 {
        self.next_exponent / 3
    }
}

pub fn liouville_xi(n: usize, terms: usize) -> Result<XiVector> {
    if n < 2 {
        return Err(Error::Unsupported {
            n,
            what: "xi vector needs n >= 2".into(),
        });
    }
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be at least 1".into()));
    }
    let largest_arg = (terms * (n - 1)) as u64;
    let required = if largest_arg <= 20 {
        factorial(largest_arg).to_string()
    } else {
        format!("{largest_arg}! digits")
    };
    let within = largest_arg <= 20 && factorial(largest_arg).to_u64().is_some_and(|f| f <= MAX_XI_DIGITS);
    if !within {
        return Err(Error::Budget {
            what: "xi denominator digits".into(),
            required,
            budget: MAX_XI_DIGITS.to_string(),
        });
    }
    let largest_exponent = factorial(largest_arg).to_u64().unwrap();
    let next_exponent = if largest_arg < 20 {
        factorial(largest_arg + 1).to_u64().unwrap_or(u64::MAX)
    } else {
        u64::MAX
    };
    let mut xi = Vec::with_capacity(n - 1);
    for j in 1..n {
        // Common denominator 10^E where E is this coordinate's largest
        // exponent; each term contributes 10^(E − e).
        let top_arg = ((terms - 1) * (n - 1) + j) as u64;
        let e_max = factorial(top_arg).to_u64().unwrap();
        let mut numer = BigInt::zero();
        for k in 0..terms {
            let e = factorial((k * (n - 1) + j) as u64).to_u64().unwrap();
            numer += pow10(e_max - e);
        }
        xi.push(Scalar::new(numer, pow10(e_max)));
    }
    let description = format!(
        "truncated factorial-exponent decimals: coordinate j sums 10^-(k*{}+j)! \
         for k < {terms}; largest exponent {largest_exponent}, first omitted {}; \
         faithful for box scales below ~10^{}",
        n - 1,
        if next_exponent == u64::MAX {
            "beyond u64".to_string()
        } else {
            next_exponent.to_string()
        },
        if next_exponent == u64::MAX {
            "huge".to_string()
        } else {
            (next_exponent / 3).to_string()
        },
    );
    Ok(XiVector {
        n,
        terms,
        xi,
        largest_exponent,
        next_exponent,
        description,
    })
}

/// Box scale T > 1; the gauge stretches the first axis by T² and shrinks the
/// others by T, so the box has constant volume 8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxParam {
    pub t: Scalar,
}

impl BoxParam {
    pub fn new(t: Scalar) -> Result<Self> {
        if t <= int(1) {
            return Err(Error::InvalidArgument(format!(
                "box scale T = {} must exceed 1",
                format_rational(&t)
            )));
        }
        Ok(BoxParam { t })
    }

    /// ln T, for reporting only.
    pub fn q_float(&self) -> f64 {
        ln_scalar(&self.t)
    }
}

/// An integer lattice point (x, y) carrying its exact residuals
/// x·ξ_j − y_j. The residuals are derived data; `new` recomputes them from
/// (x, y, ξ) so a stored point can always be re-verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePoint {
    pub x: BigInt,
    pub y: Vec<BigInt>,
    pub resid: Vec<Scalar>,
}

impl LatticePoint {
    pub fn new(x: BigInt, y: Vec<BigInt>, xi: &XiVector) -> Self {
        let resid = xi
            .xi
            .iter()
            .zip(&y)
            .map(|(xi_j, y_j)| xi_j * Scalar::from_integer(x.clone()) - Scalar::from_integer(y_j.clone()))
            .collect();
        LatticePoint { x, y, resid }
    }

    /// x = 0 with y = the j-th unit vector (0-based), residual −1 there.
    pub fn unit(j: usize, n: usize) -> Self {
        let mut y = vec![BigInt::zero(); n - 1];
        y[j] = BigInt::one();
        let mut resid = vec![Scalar::zero(); n - 1];
        resid[j] = int(-1);
        LatticePoint {
            x: BigInt::zero(),
            y,
            resid,
        }
    }

    fn coords(&self) -> [BigInt; 3] {
        [self.x.clone(), self.y[0].clone(), self.y[1].clone()]
    }
}

/// max(|x|/T^(n−1), max_j T·|x·ξ_j − y_j|).
pub fn point_norm(p: &LatticePoint, b: &BoxParam) -> Scalar {
    let mut tp = Scalar::one();
    for _ in 0..p.resid.len() {
        tp *= &b.t;
    }
    let mut norm = Scalar::from_integer(p.x.abs()) / tp;
    for r in &p.resid {
        let c = &b.t * r.abs();
        if c > norm {
            norm = c;
        }
    }
    norm
}

fn det3(a: &[BigInt; 3], b: &[BigInt; 3], c: &[BigInt; 3]) -> BigInt {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0])
        + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

fn extends_rank(sel: &[LatticePoint], cand: &LatticePoint) -> bool {
    let c = cand.coords();
    match sel.len() {
        0 => c.iter().any(|v| !v.is_zero()),
        1 => {
            let a = sel[0].coords();
            let minors = [
                &a[0] * &c[1] - &a[1] * &c[0],
                &a[0] * &c[2] - &a[2] * &c[0],
                &a[1] * &c[2] - &a[2] * &c[1],
            ];
            minors.iter().any(|m| !m.is_zero())
        }
        2 => !det3(&sel[0].coords(), &sel[1].coords(), &c).is_zero(),
        _ => false,
    }
}

/// Deterministic candidate order: by norm, then by the integer coordinates.
fn candidate_cmp(a: &(Scalar, LatticePoint), b: &(Scalar, LatticePoint)) -> std::cmp::Ordering {
    a.0.cmp(&b.0)
        .then_with(|| a.1.x.cmp(&b.1.x))
        .then_with(|| a.1.y.cmp(&b.1.y))
}

/// Greedy rank-increasing selection over norm-sorted candidates.
fn greedy_select(mut pool: Vec<(Scalar, LatticePoint)>) -> (Vec<Scalar>, Vec<LatticePoint>) {
    pool.sort_by(candidate_cmp);
    let mut lambda = Vec::with_capacity(3);
    let mut sel: Vec<LatticePoint> = Vec::with_capacity(3);
    for (norm, p) in pool {
        if sel.len() == 3 {
            break;
        }
        if extends_rank(&sel, &p) {
            lambda.push(norm);
            sel.push(p);
        }
    }
    (lambda, sel)
}

/// Successive minima λ₁ ≤ λ₂ ≤ λ₃ with witnesses.
#[derive(Debug, Clone)]
pub struct MinimaResult {
    pub lambda: Vec<Scalar>,
    pub witnesses: Vec<LatticePoint>,
    /// Scan long enough that no unexamined point could matter:
    /// effective x range ≥ λ₃·T².
    pub certified: bool,
    pub x_max: BigInt,
    /// λ₃·T², the x range certification requires.
    pub certification_bound: Scalar,
    /// Candidate x values examined.
    pub scanned: u64,
}

struct U128Walk {
    r: u128,
    step: u128,
    modulus: u128,
}

impl U128Walk {
    fn advance(&mut self) {
        self.r += self.step;
        if self.r >= self.modulus {
            self.r -= self.modulus;
        }
    }
}

struct BigWalk {
    r: BigUint,
    step: BigUint,
    modulus: BigUint,
}

impl BigWalk {
    fn advance(&mut self) {
        self.r += &self.step;
        if self.r >= self.modulus {
            self.r -= &self.modulus;
        }
    }
}

/// Bound on a residual numerator m (over modulus D_j): the point's gauge
/// component T·m/D_j stays below the current λ̂₃ iff m passes the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
enum CutBound {
    All,
    AtMost(BigUint),
    Nothing,
}

impl CutBound {
    fn admits(&self, m: &BigUint) -> bool {
        match self {
            CutBound::All => true,
            CutBound::AtMost(c) => m <= c,
            CutBound::Nothing => false,
        }
    }
}

/// Per-coordinate acceptance cutoffs. `wide` is true while λ̂₃ ≥ T/2, the
/// only regime where a non-nearest y (off by one; further offsets give a
/// component of at least 3T/2 > λ̂₃) can still matter.
struct Cutoffs {
    c: [CutBound; 2],
    x_break: Option<BigInt>,
    wide: bool,
}

impl Cutoffs {
    fn unlimited() -> Self {
        Cutoffs {
            c: [CutBound::All, CutBound::All],
            x_break: None,
            wide: true,
        }
    }

    /// Largest admissible m solves T·m/D < λ̂₃, i.e. m ≤ ceil(λ̂₃·D/T) − 1;
    /// the break point is the largest x with x/T² < λ̂₃.
    fn from_lambda(lambda3: &Scalar, t: &Scalar, d: [&BigInt; 2]) -> Self {
        let half_t = t / int(2);
        let wide = lambda3 >= &half_t;
        let tn = t.numer();
        let td = t.denom();
        let (lp, lq) = (lambda3.numer(), lambda3.denom());
        let bound = |dj: &BigInt| -> CutBound {
            let x = lp * dj * td - BigInt::one();
            if x.sign() == Sign::Minus {
                CutBound::Nothing
            } else {
                CutBound::AtMost((x / (lq * tn)).to_biguint().unwrap())
            }
        };
        let xb = {
            let x = lp * tn * tn - BigInt::one();
            if x.sign() == Sign::Minus {
                Some(BigInt::zero())
            } else {
                Some(x / (lq * td * td))
            }
        };
        Cutoffs {
            c: [bound(d[0]), bound(d[1])],
            x_break: xb,
            wide,
        }
    }
}

struct ScanState<'a> {
    xi: &'a XiVector,
    b: &'a BoxParam,
    d: [BigInt; 2],
    nb: [BigInt; 2],
    pool: Vec<(Scalar, LatticePoint)>, // units + current witnesses
    lambda: Vec<Scalar>,
    witnesses: Vec<LatticePoint>,
    cut: Cutoffs,
}

impl<'a> ScanState<'a> {
    fn new(xi: &'a XiVector, b: &'a BoxParam) -> Self {
        let d = [xi.xi[0].denom().clone(), xi.xi[1].denom().clone()];
        let nb = [xi.xi[0].numer().clone(), xi.xi[1].numer().clone()];
        let mut pool = Vec::with_capacity(6);
        for j in 0..2 {
            let u = LatticePoint::unit(j, 3);
            let norm = point_norm(&u, b);
            pool.push((norm, u));
        }
        let (lambda, witnesses) = greedy_select(pool.clone());
        ScanState {
            xi,
            b,
            d,
            nb,
            pool,
            lambda,
            witnesses,
            cut: Cutoffs::unlimited(),
        }
    }

    fn lambda3(&self) -> Option<&Scalar> {
        self.lambda.get(2)
    }

    /// Offers candidate x given raw residues r_j = N_j·x mod D_j, trying
    /// every rounding whose residual numerator passes the cutoffs: the
    /// nearest one always, the off-by-one side only in the wide regime.
    fn consider(&mut self, x: u64, r: [&BigUint; 2]) {
        let d = [
            self.d[0].to_biguint().unwrap(),
            self.d[1].to_biguint().unwrap(),
        ];
        // bit j set = take the non-nearest rounding in coordinate j
        let masks: &[u8] = if self.cut.wide {
            &[0b00, 0b01, 0b10, 0b11]
        } else {
            &[0b00]
        };
        for &mask in masks {
            let mut ok = true;
            for j in 0..2 {
                let near = r[j].min(&(&d[j] - r[j])).clone();
                let num = if mask & (1 << j) == 0 {
                    near
                } else {
                    &d[j] - &near
                };
                if !self.cut.c[j].admits(&num) {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.accept(x, r, mask);
            }
        }
    }

    fn accept(&mut self, x: u64, r: [&BigUint; 2], mask: u8) {
        let xb = BigInt::from(x);
        let mut y = Vec::with_capacity(2);
        #[allow(clippy::needless_range_loop)]
        for j in 0..2 {
            let num = &self.nb[j] * &xb;
            let rj = BigInt::from(r[j].clone());
            let two_r = &rj + &rj;
            // Rounding side: down keeps residual +r/D, up keeps −(D−r)/D.
            // Nearest is down iff 2r ≤ D; the mask flips the side.
            let down = (two_r <= self.d[j]) ^ (mask & (1 << j) != 0);
            let yj = if down {
                (&num - &rj) / &self.d[j]
            } else {
                (&num + (&self.d[j] - &rj)) / &self.d[j]
            };
            y.push(yj);
        }
        let cand = LatticePoint::new(xb, y, self.xi);
        // Integer multiples of a kept witness are dependent on a point of
        // smaller norm; drop them before any rational work.
        for w in &self.witnesses {
            if w.x.is_zero() {
                continue;
            }
            let (k, rem) = num_integer::Integer::div_rem(&cand.x, &w.x);
            if rem.is_zero() && cand.y[0] == &k * &w.y[0] && cand.y[1] == &k * &w.y[1] {
                return;
            }
        }
        let norm = point_norm(&cand, self.b);
        if let Some(l3) = self.lambda3() {
            if &norm >= l3 {
                return;
            }
        }
        self.pool.push((norm, cand));
        let (lambda, witnesses) = greedy_select(self.pool.clone());
        // Keep only units and current witnesses: anything else is dependent
        // on selected points of no larger norm, hence permanently redundant.
        self.pool.retain(|(_, p)| p.x.is_zero());
        for (l, w) in lambda.iter().zip(&witnesses) {
            if !w.x.is_zero() {
                self.pool.push((l.clone(), w.clone()));
            }
        }
        self.lambda = lambda;
        self.witnesses = witnesses;
        if let Some(l3) = self.lambda.get(2) {
            self.cut = Cutoffs::from_lambda(l3, &self.b.t, [&self.d[0], &self.d[1]]);
        }
    }
}

/// Exact successive minima for n = 3 by scanning x = 1..x_max (negative x
/// mirrors positive and changes nothing), with the two unit directions
/// always available. For each x only nearest roundings matter once
/// λ̂₃ < T/2; in the wide regime the four off-by-one roundings are also
/// gated in, so the scan is exhaustive over every point that could carry a
/// minimum. Stops early once x itself pushes the gauge past λ̂₃.
pub fn successive_minima(xi: &XiVector, b: &BoxParam, x_max: &BigInt) -> Result<MinimaResult> {
    if xi.n != 3 {
        return Err(Error::Unsupported {
            n: xi.n,
            what: "successive minima are computed for n = 3".into(),
        });
    }
    if x_max < &BigInt::one() {
        return Err(Error::InvalidArgument("x_max must be at least 1".into()));
    }
    if x_max > &BigInt::from(MAX_SCAN_LENGTH) {
        return Err(Error::Budget {
            what: "scan length".into(),
            required: x_max.to_string(),
            budget: MAX_SCAN_LENGTH.to_string(),
        });
    }
    let x_cap = x_max.to_u64().unwrap();
    let mut st = ScanState::new(xi, b);
    let small_limit = BigUint::from(u128::MAX / 2);
    let use_small = st.d[0].to_biguint().unwrap() <= small_limit
        && st.d[1].to_biguint().unwrap() <= small_limit;
    let mut scanned = 0u64;
    let mut broke_early = false;

    if use_small {
        let d1 = st.d[0].to_u128().unwrap();
        let d2 = st.d[1].to_u128().unwrap();
        let mut w1 = U128Walk { r: 0, step: st.nb[0].to_u128().unwrap() % d1, modulus: d1 };
        let mut w2 = U128Walk { r: 0, step: st.nb[1].to_u128().unwrap() % d2, modulus: d2 };
        // u128 mirrors of the cutoffs (shifted by one so the hot test is a
        // strict compare), refreshed when λ̂₃ improves.
        let mut c1 = u128::MAX;
        let mut c2 = u128::MAX;
        let mut xb = u64::MAX;
        let mut hot_wide = true;
        let refresh = |st: &ScanState, c1: &mut u128, c2: &mut u128, xb: &mut u64, wide: &mut bool| {
            let tou = |c: &CutBound| -> u128 {
                match c {
                    CutBound::All => u128::MAX,
                    CutBound::AtMost(v) => v.to_u128().map_or(u128::MAX, |x| x.saturating_add(1)),
                    CutBound::Nothing => 0,
                }
            };
            *c1 = tou(&st.cut.c[0]);
            *c2 = tou(&st.cut.c[1]);
            *xb = st
                .cut
                .x_break
                .as_ref()
                .map_or(u64::MAX, |v| v.to_u64().map_or(u64::MAX, |x| x.saturating_add(1)));
            *wide = st.cut.wide;
        };
        for x in 1..=x_cap {
            w1.advance();
            w2.advance();
            scanned += 1;
            if x >= xb {
                broke_early = true;
                break;
            }
            let m1 = w1.r.min(d1 - w1.r);
            let m2 = w2.r.min(d2 - w2.r);
            // Strictly-below tests via the +1-shifted cutoffs.
            let near1 = m1 < c1;
            let near2 = m2 < c2;
            let hit = if hot_wide {
                (near1 || (d1 - m1) < c1) && (near2 || (d2 - m2) < c2)
            } else {
                near1 && near2
            };
            if hit {
                st.consider(x, [&BigUint::from(w1.r), &BigUint::from(w2.r)]);
                refresh(&st, &mut c1, &mut c2, &mut xb, &mut hot_wide);
            }
        }
    } else {
        let d1 = st.d[0].to_biguint().unwrap();
        let d2 = st.d[1].to_biguint().unwrap();
        let mut w1 = BigWalk { r: BigUint::zero(), step: st.nb[0].to_biguint().unwrap() % &d1, modulus: d1.clone() };
        let mut w2 = BigWalk { r: BigUint::zero(), step: st.nb[1].to_biguint().unwrap() % &d2, modulus: d2.clone() };
        for x in 1..=x_cap {
            w1.advance();
            w2.advance();
            scanned += 1;
            if let Some(xb) = &st.cut.x_break {
                if &BigInt::from(x) > xb {
                    broke_early = true;
                    break;
                }
            }
            let m1 = (&w1.r).min(&(&d1 - &w1.r)).clone();
            let m2 = (&w2.r).min(&(&d2 - &w2.r)).clone();
            let ok = |c: &CutBound, m: &BigUint, d: &BigUint, wide: bool| -> bool {
                c.admits(m) || (wide && c.admits(&(d - m)))
            };
            let wide = st.cut.wide;
            if ok(&st.cut.c[0], &m1, &d1, wide) && ok(&st.cut.c[1], &m2, &d2, wide) {
                let r1 = w1.r.clone();
                let r2 = w2.r.clone();
                st.consider(x, [&r1, &r2]);
            }
        }
    }

    let bound = match st.lambda.get(2) {
        Some(l3) => l3 * &b.t * &b.t,
        None => Scalar::zero(),
    };
    let certified = st.lambda.len() == 3
        && (broke_early || Scalar::from_integer(x_max.clone()) >= bound);
    Ok(MinimaResult {
        lambda: st.lambda,
        witnesses: st.witnesses,
        certified,
        x_max: x_max.clone(),
        certification_bound: bound,
        scanned,
    })
}

/// Independent slow oracle: every y in a ±1-padded box around x·ξ, both
/// signs of x, exact norms throughout. Restricted to small instances.
pub fn full_enumeration(xi: &XiVector, b: &BoxParam, x_max: i64) -> Result<MinimaResult> {
    if xi.n != 3 {
        return Err(Error::Unsupported {
            n: xi.n,
            what: "full enumeration is computed for n = 3".into(),
        });
    }
    if !(1..=200).contains(&x_max) || b.t > int(1000) {
        return Err(Error::InvalidArgument(
            "full enumeration is a cross-check: x_max <= 200 and T <= 1000".into(),
        ));
    }
    let mut pool: Vec<(Scalar, LatticePoint)> = Vec::new();
    for j in 0..2 {
        let u = LatticePoint::unit(j, 3);
        pool.push((point_norm(&u, b), u));
    }
    for x in (-x_max..=x_max).filter(|x| *x != 0) {
        let xs = int(x);
        let mut ranges = Vec::with_capacity(2);
        for j in 0..2 {
            let center = &xi.xi[j] * &xs;
            let hi = center.abs().ceil().to_integer().to_i64().unwrap() + 1;
            ranges.push(-hi..=hi);
        }
        for y1 in ranges[0].clone() {
            for y2 in ranges[1].clone() {
                let p = LatticePoint::new(
                    BigInt::from(x),
                    vec![BigInt::from(y1), BigInt::from(y2)],
                    xi,
                );
                pool.push((point_norm(&p, b), p));
            }
        }
    }
    let (lambda, witnesses) = greedy_select(pool);
    let bound = match lambda.get(2) {
        Some(l3) => l3 * &b.t * &b.t,
        None => Scalar::zero(),
    };
    let certified = lambda.len() == 3 && Scalar::from_integer(BigInt::from(x_max)) >= bound;
    Ok(MinimaResult {
        lambda,
        witnesses,
        certified,
        x_max: BigInt::from(x_max),
        certification_bound: bound,
        scanned: 2 * x_max as u64,
    })
}

/// How far each sample scan may go.
#[derive(Debug, Clone)]
pub enum XMaxRule {
    Fixed(BigInt),
    /// ceil(T³) capped at AUTO_SCAN_CAP — enough to certify whenever the
    /// early break engages before the cap.
    AutoCertify,
}

/// One box sample: exact minima plus their logs (floats only at this edge).
#[derive(Debug, Clone)]
pub struct LSample {
    pub t: Scalar,
    pub q: f64,
    pub l: [f64; 3],
    pub lambda: Vec<Scalar>,
    pub certified: bool,
}

impl LSample {
    /// Overlay/compare row shape: (q, logs, certified).
    pub fn row(&self) -> (f64, [f64; 3], bool) {
        (self.q, self.l, self.certified)
    }
}

pub fn l_samples(xi: &XiVector, t_list: &[Scalar], rule: &XMaxRule) -> Result<Vec<LSample>> {
    for pair in t_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument("T list must be increasing".into()));
        }
    }
    let mut out = Vec::with_capacity(t_list.len());
    for t in t_list {
        let b = BoxParam::new(t.clone())?;
        let x_max = match rule {
            XMaxRule::Fixed(v) => v.clone(),
            XMaxRule::AutoCertify => {
                let t3 = (t * t * t).ceil().to_integer();
                t3.min(BigInt::from(AUTO_SCAN_CAP))
            }
        };
        let res = successive_minima(xi, &b, &x_max)?;
        let l = [
            ln_scalar(&res.lambda[0]),
            ln_scalar(&res.lambda[1]),
            ln_scalar(&res.lambda[2]),
        ];
        out.push(LSample {
            t: t.clone(),
            q: b.q_float(),
            l,
            lambda: res.lambda,
            certified: res.certified,
        });
    }
    Ok(out)
}

/// Distance between sampled minima logs and a system's components at the
/// same q = ln T; informational. Samples beyond the horizon are skipped.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub max_dev: f64,
    /// (q, max_j |P_j(q) − L_j(q)|) per usable sample.
    pub rows: Vec<(f64, f64)>,
    pub skipped: usize,
}

/// `rows` uses the overlay shape (q, [L_1, L_2, L_3], certified) shared with
/// the CSV parser, so stored sweeps compare without reconstructing samples.
pub fn compare_to_system(rows_in: &[(f64, [f64; 3], bool)], s: &NSystem) -> CompareReport {
    let mut rows = Vec::with_capacity(rows_in.len());
    let mut skipped = 0usize;
    let mut max_dev = 0.0f64;
    for (q, l, _) in rows_in {
        let Some(q_rat) = Scalar::from_float(*q) else {
            skipped += 1;
            continue;
        };
        if q_rat > s.horizon || q_rat.is_negative() {
            skipped += 1;
            continue;
        }
        let mut dev = 0.0f64;
        for (j, f) in s.components.iter().enumerate().take(3) {
            let p = to_f64(&f.evaluate(&q_rat).unwrap());
            dev = dev.max((p - l[j]).abs());
        }
        rows.push((*q, dev));
        max_dev = max_dev.max(dev);
    }
    CompareReport {
        max_dev,
        rows,
        skipped,
    }
}

/// ln of a positive rational, robust to values outside f64 range.
pub fn ln_scalar(x: &Scalar) -> f64 {
    debug_assert!(x.is_positive());
    ln_big(x.numer()) - ln_big(x.denom())
}

fn ln_big(v: &BigInt) -> f64 {
    let u = v.magnitude();
    let bits = u.bits();
    if bits <= 1000 {
        let f = u.to_f64().unwrap_or(f64::MAX);
        f.ln()
    } else {
        let shift = bits - 53;
        let top = (u >> shift).to_f64().unwrap_or(f64::MAX);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_max_system;
    use crate::scalar::rat;

    fn xi(terms: usize) -> XiVector {
        liouville_xi(3, terms).unwrap()
    }

    fn boxp(t: i64) -> BoxParam {
        BoxParam::new(int(t)).unwrap()
    }

    #[test]
    fn xi_vectors_are_exact() {
        let x1 = xi(1);
        assert_eq!(x1.xi, vec![rat(1, 10), rat(1, 100)]);
        assert_eq!((x1.largest_exponent, x1.next_exponent), (2, 6));
        let x2 = xi(2);
        assert_eq!(x2.xi[0], Scalar::new(BigInt::from(100001), pow10(6)));
        assert_eq!(x2.xi[1], Scalar::new(pow10(22) + BigInt::one(), pow10(24)));
        assert_eq!((x2.largest_exponent, x2.next_exponent), (24, 120));
        assert_eq!(x2.valid_box_exponent(), 40);
    }

    #[test]
    fn xi_budget_is_enforced() {
        assert!(liouville_xi(3, 4).is_ok()); // 8! = 40320 digits
        assert!(matches!(liouville_xi(3, 5), Err(Error::Budget { .. }))); // 10!
        assert!(matches!(liouville_xi(3, 1000), Err(Error::Budget { .. })));
        assert!(liouville_xi(1, 1).is_err());
    }

    #[test]
    fn norms_match_hand_values() {
        let x1 = xi(1);
        let b = boxp(10);
        let p = LatticePoint::new(BigInt::one(), vec![BigInt::zero(), BigInt::zero()], &x1);
        assert_eq!(point_norm(&p, &b), int(1));
        let u = LatticePoint::unit(0, 3);
        assert_eq!(point_norm(&u, &b), int(10));
        // Homogeneity: doubling the point doubles the gauge.
        let p2 = LatticePoint::new(BigInt::from(2), vec![BigInt::zero(), BigInt::zero()], &x1);
        assert_eq!(point_norm(&p2, &b), int(2));
    }

    #[test]
    fn embedded_residuals_recompute() {
        let x2 = xi(2);
        let p = LatticePoint::new(
            BigInt::from(1_000_000),
            vec![BigInt::from(100_001), BigInt::from(10_000)],
            &x2,
        );
        assert_eq!(p.resid[0], int(0));
        assert_eq!(p.resid[1], Scalar::new(BigInt::one(), pow10(18)));
    }

    #[test]
    fn one_term_minima_are_frozen() {
        let x1 = xi(1);
        let r10 = successive_minima(&x1, &boxp(10), &BigInt::from(1000)).unwrap();
        assert_eq!(r10.lambda, vec![int(1), int(1), int(1)]);
        assert!(r10.certified);
        let r100 = successive_minima(&x1, &boxp(100), &BigInt::from(200_000)).unwrap();
        assert_eq!(r100.lambda, vec![rat(1, 100), int(10), int(10)]);
        assert!(r100.certified);
        assert_eq!(r100.witnesses[0].x, BigInt::from(100));
    }

    #[test]
    fn two_term_small_box_has_fine_structure() {
        // At T = 10 the off-grid x = 99 and x = 9 points just undercut the
        // exact-hit at x = 100; x = 90 gets close but is their difference.
        let x2 = xi(2);
        let r = successive_minima(&x2, &boxp(10), &BigInt::from(1000)).unwrap();
        assert_eq!(r.lambda[0], rat(99901, 100_000));
        assert_eq!(r.lambda[1], rat(99991, 100_000));
        assert_eq!(r.lambda[2], int(1));
        assert!(r.certified);
        assert_eq!(r.witnesses[0].x, BigInt::from(99));
        assert_eq!(r.witnesses[1].x, BigInt::from(9));
        assert_eq!(r.witnesses[2].x, BigInt::from(100));
        let prod = &r.lambda[0] * &r.lambda[1] * &r.lambda[2];
        assert!(prod <= int(1) && prod >= rat(1, 6));
    }

    #[test]
    fn scan_equals_full_enumeration_on_small_instances() {
        for terms in [1usize, 2] {
            let x = xi(terms);
            for t in [10i64, 40, 100] {
                for xm in [5i64, 23, 50] {
                    let b = boxp(t);
                    let fast = successive_minima(&x, &b, &BigInt::from(xm)).unwrap();
                    let slow = full_enumeration(&x, &b, xm).unwrap();
                    assert_eq!(
                        fast.lambda, slow.lambda,
                        "terms={terms} T={t} x_max={xm}"
                    );
                }
            }
        }
    }

    #[test]
    fn certification_is_monotone_in_scan_length() {
        let x1 = xi(1);
        let b = boxp(100);
        let a = successive_minima(&x1, &b, &BigInt::from(200_000)).unwrap();
        assert!(a.certified);
        let c = successive_minima(&x1, &b, &BigInt::from(4_000_000)).unwrap();
        assert_eq!(a.lambda, c.lambda);
        assert!(c.certified);
    }

    #[test]
    fn early_break_stops_certified_scans() {
        let x1 = xi(1);
        let res = successive_minima(&x1, &boxp(10), &BigInt::from(900_000_000)).unwrap();
        assert!(res.certified);
        assert_eq!(res.lambda, vec![int(1), int(1), int(1)]);
        assert!(res.scanned < 10_000, "scanned {}", res.scanned);
    }

    #[test]
    fn deep_dip_shows_up_uncertified() {
        let x2 = xi(2);
        let b = BoxParam::new(int(100_000_000)).unwrap();
        let res = successive_minima(&x2, &b, &BigInt::from(2_000_000)).unwrap();
        assert_eq!(res.lambda[0], Scalar::new(BigInt::one(), pow10(10)));
        assert!(!res.certified);
        assert_eq!(res.witnesses[0].x, BigInt::from(1_000_000));
        let ratio = ln_scalar(&res.lambda[0]) / b.q_float();
        assert!((ratio + 1.25).abs() < 1e-9);
    }

    #[test]
    fn samples_report_ordered_logs() {
        let x1 = xi(1);
        let samples = l_samples(&x1, &[int(10), int(100)], &XMaxRule::AutoCertify).unwrap();
        assert_eq!(samples.len(), 2);
        for s in &samples {
            assert!(s.certified);
            assert!(s.l[0] <= s.l[1] && s.l[1] <= s.l[2]);
            assert!((s.q - to_f64(&s.t).ln()).abs() < 1e-12);
        }
        assert!(l_samples(&x1, &[int(100), int(10)], &XMaxRule::AutoCertify).is_err());
    }

    #[test]
    fn comparison_to_matching_trace_is_zero() {
        let (s, _) = build_max_system(3, &[int(1), int(6), int(42)]).unwrap();
        let mk = |q: f64, l: [f64; 3]| (q, l, true);
        let exact = |q: i64| {
            let vals: Vec<f64> = s
                .components
                .iter()
                .map(|f| to_f64(&f.evaluate(&int(q)).unwrap()))
                .collect();
            [vals[0], vals[1], vals[2]]
        };
        let samples = vec![mk(2.0, exact(2)), mk(7.0, exact(7)), mk(50.0, [0.0; 3])];
        let report = compare_to_system(&samples, &s);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.skipped, 1);
        assert_eq!(report.max_dev, 0.0);
    }

    #[test]
    fn scan_guards_fire() {
        let x1 = xi(1);
        assert!(successive_minima(&x1, &boxp(10), &BigInt::zero()).is_err());
        assert!(matches!(
            successive_minima(&x1, &boxp(10), &BigInt::from(10u64.pow(13))),
            Err(Error::Budget { .. })
        ));
        assert!(BoxParam::new(int(1)).is_err());
        assert!(full_enumeration(&x1, &boxp(10), 1000).is_err());
    }
}
