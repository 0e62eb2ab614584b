//! Persistence: systems (with optional construction schedules) as JSON with
//! every rational kept as an exact "numerator/denominator" string, plus the
//! CSV format for minima samples. Round trips are bit-exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LSample, XiVector};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::{decimal_string, format_rational, parse_rational, Scalar};
use crate::schedule::{PhaseKind, PhaseMark, SwitchSchedule, ZigzagPhase};
use crate::system::NSystem;

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    n: usize,
    horizon: String,
    components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<ScheduleDoc>,
}

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    breakpoints: Vec<[String; 2]>,
    slopes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    l: Vec<String>,
    r: Vec<String>,
    w: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    zigzags: Vec<ZigzagDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    phase_marks: Vec<MarkDoc>,
}

#[derive(Serialize, Deserialize)]
struct ZigzagDoc {
    b0: String,
    d: String,
    h: u64,
    v0: String,
    v_end: String,
    q_tilde: String,
    q_meet: String,
}

#[derive(Serialize, Deserialize)]
struct MarkDoc {
    q: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<String>,
}

fn r2s(v: &Scalar) -> String {
    format_rational(v)
}

pub fn to_json(s: &NSystem, sched: Option<&SwitchSchedule>) -> String {
    let doc = SystemDoc {
        n: s.n,
        horizon: r2s(&s.horizon),
        components: s
            .components
            .iter()
            .map(|f| ComponentDoc {
                breakpoints: f
                    .points
                    .iter()
                    .map(|(q, v)| [r2s(q), r2s(v)])
                    .collect(),
                slopes: f.slopes.iter().map(r2s).collect(),
            })
            .collect(),
        schedule: sched.map(|sc| ScheduleDoc {
            l: sc.l.iter().map(r2s).collect(),
            r: sc.r.iter().map(r2s).collect(),
            w: sc
                .w
                .iter()
                .map(|row| row.iter().map(r2s).collect())
                .collect(),
            zigzags: sc
                .zigzags
                .iter()
                .map(|z| ZigzagDoc {
                    b0: r2s(&z.b0),
                    d: r2s(&z.d),
                    h: z.h,
                    v0: r2s(&z.v0),
                    v_end: r2s(&z.v_end),
                    q_tilde: r2s(&z.q_tilde),
                    q_meet: r2s(&z.q_meet),
                })
                .collect(),
            phase_marks: sc
                .phase_marks
                .iter()
                .map(|m| MarkDoc {
                    q: r2s(&m.q),
                    kind: match m.kind {
                        PhaseKind::Maximal => "maximal".into(),
                        PhaseKind::Intermediate => "intermediate".into(),
                    },
                    scale: m.scale.as_ref().map(r2s),
                    eps: m.eps.as_ref().map(r2s),
                })
                .collect(),
        }),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn from_json(text: &str) -> Result<(NSystem, Option<SwitchSchedule>)> {
    let doc: SystemDoc = serde_json::from_str(text)?;
    if doc.n < 2 {
        return Err(Error::Parse {
            what: format!("n = {} is below 2", doc.n),
        });
    }
    if doc.components.len() != doc.n {
        return Err(Error::Parse {
            what: format!(
                "{} components listed for n = {}",
                doc.components.len(),
                doc.n
            ),
        });
    }
    let horizon = parse_rational(&doc.horizon)?;
    let mut components = Vec::with_capacity(doc.n);
    for (idx, c) in doc.components.iter().enumerate() {
        let mut points = Vec::with_capacity(c.breakpoints.len());
        for [q, v] in &c.breakpoints {
            points.push((parse_rational(q)?, parse_rational(v)?));
        }
        let mut slopes = Vec::with_capacity(c.slopes.len());
        for s in &c.slopes {
            slopes.push(parse_rational(s)?);
        }
        let f = PiecewiseLinear::from_breakpoints(points).map_err(|e| Error::Parse {
            what: format!("component {}: {e}", idx + 1),
        })?;
        // The stored slopes are redundant with the breakpoints; a mismatch
        // means the document was edited inconsistently.
        if f.slopes != slopes {
            return Err(Error::Parse {
                what: format!("component {}: slopes disagree with breakpoints", idx + 1),
            });
        }
        if f.domain_end() != &horizon {
            return Err(Error::Parse {
                what: format!(
                    "component {} ends at {} instead of the horizon {}",
                    idx + 1,
                    format_rational(f.domain_end()),
                    doc.horizon
                ),
            });
        }
        components.push(f);
    }
    let system = NSystem::new(doc.n, horizon, components);
    let sched = match doc.schedule {
        None => None,
        Some(sc) => {
            let parse_all = |v: &[String]| -> Result<Vec<Scalar>> {
                v.iter().map(|s| parse_rational(s)).collect()
            };
            let mut w = Vec::with_capacity(sc.w.len());
            for row in &sc.w {
                w.push(parse_all(row)?);
            }
            let mut zigzags = Vec::with_capacity(sc.zigzags.len());
            for z in &sc.zigzags {
                zigzags.push(ZigzagPhase {
                    b0: parse_rational(&z.b0)?,
                    d: parse_rational(&z.d)?,
                    h: z.h,
                    v0: parse_rational(&z.v0)?,
                    v_end: parse_rational(&z.v_end)?,
                    q_tilde: parse_rational(&z.q_tilde)?,
                    q_meet: parse_rational(&z.q_meet)?,
                });
            }
            let mut phase_marks = Vec::with_capacity(sc.phase_marks.len());
            for m in &sc.phase_marks {
                let kind = match m.kind.as_str() {
                    "maximal" => PhaseKind::Maximal,
                    "intermediate" => PhaseKind::Intermediate,
                    other => {
                        return Err(Error::Parse {
                            what: format!("unknown phase kind {other:?}"),
                        })
                    }
                };
                phase_marks.push(PhaseMark {
                    q: parse_rational(&m.q)?,
                    kind,
                    scale: m.scale.as_deref().map(parse_rational).transpose()?,
                    eps: m.eps.as_deref().map(parse_rational).transpose()?,
                });
            }
            Some(SwitchSchedule {
                l: parse_all(&sc.l)?,
                r: parse_all(&sc.r)?,
                w,
                zigzags,
                phase_marks,
            })
        }
    };
    Ok((system, sched))
}

/// { "n": int, "xi": ["p/q", ...], "description": string }
pub fn xi_to_json(xi: &XiVector) -> String {
    #[derive(Serialize)]
    struct XiDoc<'a> {
        n: usize,
        xi: Vec<String>,
        description: &'a str,
    }
    serde_json::to_string_pretty(&XiDoc {
        n: xi.n,
        xi: xi.xi.iter().map(r2s).collect(),
        description: &xi.description,
    })
    .expect("plain data serializes")
}

/// Columns: q, L1..L3 (floats), lambda1..3 (exact strings), certified.
pub fn minima_csv(samples: &[LSample]) -> String {
    let mut out = String::from("q,L1,L2,L3,lambda1,lambda2,lambda3,certified\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.q,
            s.l[0],
            s.l[1],
            s.l[2],
            r2s(&s.lambda[0]),
            r2s(&s.lambda[1]),
            r2s(&s.lambda[2]),
            s.certified
        ));
    }
    out
}

/// The overlay subset of a minima CSV: (q, L1..L3, certified) per row.
pub fn parse_minima_csv(text: &str) -> Result<Vec<(f64, [f64; 3], bool)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                what: format!("minima CSV line {} has {} fields, not 8", i + 1, fields.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                what: format!("bad number {s:?} in minima CSV line {}", i + 1),
            })
        };
        let certified = match fields[7].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse {
                    what: format!("bad certified flag {other:?} in minima CSV line {}", i + 1),
                })
            }
        };
        rows.push((
            num(fields[0])?,
            [num(fields[1])?, num(fields[2])?, num(fields[3])?],
            certified,
        ));
    }
    Ok(rows)
}

/// Decimal table cell: 12 significant digits with a "~" marker on rounding.
pub fn table_cell(v: &Scalar) -> String {
    decimal_string(v, crate::scalar::DISPLAY_SIG_DIGITS)
}
