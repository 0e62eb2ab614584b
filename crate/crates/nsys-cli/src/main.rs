//! `nsys` — build, validate, analyze, and draw n-systems from the terminal.
//!
//! Exit codes: 0 success, 1 usage or unreadable/unparsable input, 2 a system
//! failed validation or an asymptotic check, 3 a construction could not be
//! completed, 4 scan results left uncertified under `--require-certified`.

use std::fs;
use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use nsys::asymptotics::{
    check_laurent, check_schmidt_summerer, convergence_report, estimate_phi, InequalityReport,
    PhiEstimate, Verdict,
};
use nsys::construct::{
    build_alternating_system, build_max_system, nsystem_targets, AlternatingSpec,
    ConstructionKind,
};
use nsys::json::{from_json, minima_csv, parse_minima_csv, table_cell, to_json, xi_to_json};
use nsys::lattice::{compare_to_system, l_samples, liouville_xi, XMaxRule};
use nsys::render::{render_svg, RenderSpec};
use nsys::scalar::{int, parse_rational, Scalar};
use nsys::schedule::{default_lacunary, PhaseKind, SwitchSchedule};
use nsys::{validate, NSystem, ValidationReport};

#[derive(Parser)]
#[command(
    name = "nsys",
    version,
    about = "Exact-arithmetic n-systems: construct, validate, analyze, draw"
)]
struct Cli {
    /// Output file for commands that write one (build, minima, render).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance for asymptotic checks, as a rational like 1/100.
    #[arg(long, global = true, default_value = "1/100", value_parser = scalar_arg)]
    tol: Scalar,

    /// Reserved; every command is deterministic, the value is ignored.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Exit with code 4 when any lattice scan ends uncertified.
    #[arg(long, global = true)]
    require_certified: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a system and write it, with its switch schedule, as JSON.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Check a stored system against every axiom.
    Validate { file: PathBuf },
    /// Estimate a stored system's tail ratios and test the constant bounds.
    Check {
        file: PathBuf,
        /// Which construction's limit constants to compare against.
        #[arg(long, value_enum, default_value_t = TargetKind::Maximal)]
        targets: TargetKind,
        /// Start of the estimation window; defaults to a schedule position
        /// near the middle (or half the horizon without a schedule).
        #[arg(long, value_parser = scalar_arg)]
        tail_start: Option<Scalar>,
    },
    /// Scan boxes for successive minima and write the samples as CSV.
    Minima {
        /// Series terms in each coordinate of the scanned vector.
        #[arg(long, default_value_t = 1)]
        terms: usize,
        /// Comma-separated increasing box parameters T, each > 1.
        #[arg(long, value_delimiter = ',', value_parser = scalar_arg, required = true)]
        boxes: Vec<Scalar>,
        /// Largest |x| to scan; default scans to T³ (capped), which
        /// certifies every box the early-exit bound can cover.
        #[arg(long)]
        x_max: Option<BigInt>,
        /// Also write the scanned vector itself as JSON.
        #[arg(long)]
        xi_out: Option<PathBuf>,
    },
    /// Draw a system, and optionally scanned minima, as SVG.
    Render {
        file: PathBuf,
        /// Minima CSV whose (q, L_j) samples are dotted over the graphs.
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(long, default_value_t = 900)]
        width: u32,
        #[arg(long, default_value_t = 560)]
        height: u32,
        /// Vertical scale; the plotted value is P_j(q) times this.
        #[arg(long, default_value = "1/2", value_parser = scalar_arg)]
        slope_scale: Scalar,
        /// Skip the component end labels and tick captions.
        #[arg(long)]
        no_labels: bool,
        /// Skip the schedule tick marks.
        #[arg(long)]
        no_marks: bool,
    },
    /// Measure how closely sampled minima logs follow a stored system.
    Compare { system: PathBuf, csv: PathBuf },
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Greedy construction: each epoch closes the top gap as fast as the
    /// slope set allows.
    Maximal {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// First schedule entry.
        #[arg(long, default_value = "1", value_parser = scalar_arg)]
        l0: Scalar,
        /// Epoch count for the generated factorial-growth schedule.
        #[arg(long, default_value_t = 12)]
        epochs: usize,
        /// Explicit comma-separated schedule; overrides --l0/--epochs.
        #[arg(long, value_delimiter = ',', value_parser = scalar_arg)]
        schedule: Option<Vec<Scalar>>,
    },
    /// Band construction: a short greedy prefix, then alternating zigzag
    /// stretches and replays (n = 3).
    Alternating {
        #[arg(long, default_value = "1", value_parser = scalar_arg)]
        l0: Scalar,
        /// Zigzag period length; must not exceed l0.
        #[arg(long, value_parser = scalar_arg)]
        d: Scalar,
        /// Epochs in the greedy prefix (at least 2).
        #[arg(long, default_value_t = 2)]
        inner: usize,
        #[arg(long, default_value_t = 1)]
        phases: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    Maximal,
    Alternating,
}

impl From<TargetKind> for ConstructionKind {
    fn from(k: TargetKind) -> Self {
        match k {
            TargetKind::Maximal => ConstructionKind::Maximal,
            TargetKind::Alternating => ConstructionKind::Alternating,
        }
    }
}

fn scalar_arg(s: &str) -> Result<Scalar, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Terminal failure: message for stderr plus the process exit code.
struct Failure {
    code: i32,
    msg: String,
}

fn fail(code: i32, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

impl From<nsys::Error> for Failure {
    fn from(e: nsys::Error) -> Self {
        let code = match &e {
            nsys::Error::Build { .. } => 3,
            _ => 1,
        };
        fail(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        fail(1, e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.msg);
        exit(f.code);
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Build(b) => cmd_build(b, cli.out),
        Cmd::Validate { file } => cmd_validate(&file),
        Cmd::Check {
            file,
            targets,
            tail_start,
        } => cmd_check(&file, targets, tail_start, &cli.tol),
        Cmd::Minima {
            terms,
            boxes,
            x_max,
            xi_out,
        } => cmd_minima(terms, &boxes, x_max, xi_out, cli.out, cli.require_certified),
        Cmd::Render {
            file,
            overlay,
            width,
            height,
            slope_scale,
            no_labels,
            no_marks,
        } => {
            let spec = RenderSpec {
                width,
                height,
                slope_scale,
                labels: !no_labels,
                marks: !no_marks,
            };
            cmd_render(&file, overlay, spec, cli.out)
        }
        Cmd::Compare { system, csv } => cmd_compare(&system, &csv),
    }
}

fn required_out(out: Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    out.ok_or_else(|| fail(1, format!("--out is required for {what}")))
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(1, format!("{}: {e}", path.display())))
}

fn read_system(path: &PathBuf) -> Result<(NSystem, Option<SwitchSchedule>), Failure> {
    let text = read_input(path)?;
    Ok(from_json(&text)?)
}

// ---------------------------------------------------------------- build

fn cmd_build(b: BuildCmd, out: Option<PathBuf>) -> Result<(), Failure> {
    let out = required_out(out, "build")?;
    let (s, sched) = match b {
        BuildCmd::Maximal {
            n,
            l0,
            epochs,
            schedule,
        } => {
            let l = match schedule {
                Some(l) => l,
                None => default_lacunary(&l0, epochs + 1)
                    .map_err(|e| fail(3, e.to_string()))?,
            };
            build_max_system(n, &l).map_err(|e| fail(3, e.to_string()))?
        }
        BuildCmd::Alternating {
            l0,
            d,
            inner,
            phases,
        } => {
            let spec = AlternatingSpec {
                n: 3,
                d,
                inner_epochs: inner,
                phases,
                l0,
            };
            let (s, sched, _) =
                build_alternating_system(&spec).map_err(|e| fail(3, e.to_string()))?;
            (s, sched)
        }
    };
    fs::write(&out, to_json(&s, Some(&sched)))?;
    print_build_summary(&s, &sched);
    println!("wrote {}", out.display());
    Ok(())
}

fn print_build_summary(s: &NSystem, sched: &SwitchSchedule) {
    let breakpoints: usize = s.components.iter().map(|f| f.points.len()).sum();
    println!(
        "n = {}, horizon {}, {} breakpoints",
        s.n,
        table_cell(&s.horizon),
        breakpoints
    );
    if sched.phase_marks.is_empty() {
        println!("{:>5}  {:>16}  {:>16}  top meets", "epoch", "start", "bottom meet");
        for (i, r) in sched.r.iter().enumerate() {
            let tops = match sched.w_epoch(i) {
                Some(ws) if !ws.is_empty() => ws
                    .iter()
                    .map(table_cell)
                    .collect::<Vec<_>>()
                    .join(", "),
                _ => "-".into(),
            };
            println!(
                "{:>5}  {:>16}  {:>16}  {}",
                i,
                table_cell(&sched.l[i]),
                table_cell(r),
                tops
            );
        }
    } else {
        for (i, z) in sched.zigzags.iter().enumerate() {
            println!(
                "zigzag {}: {} periods of length {} from {}, band {} -> {}, leaves at {}",
                i + 1,
                z.h,
                table_cell(&z.d),
                table_cell(&z.b0),
                table_cell(&z.v0),
                table_cell(&z.v_end),
                table_cell(&z.q_tilde),
            );
        }
        println!("{:>5}  {:>16}  {:<12}  {:>16}", "mark", "q", "kind", "scale");
        for (i, m) in sched.phase_marks.iter().enumerate() {
            let kind = match m.kind {
                PhaseKind::Maximal => "maximal",
                PhaseKind::Intermediate => "intermediate",
            };
            let scale = m.scale.as_ref().map(table_cell).unwrap_or_else(|| "-".into());
            println!("{:>5}  {:>16}  {:<12}  {:>16}", i, table_cell(&m.q), kind, scale);
        }
    }
}

// ------------------------------------------------------------- validate

fn print_validation(report: &ValidationReport) {
    for v in &report.violations {
        println!("{v}");
    }
    if !report.properness.satisfied {
        println!("note: {}", report.properness.note);
    }
}

fn cmd_validate(file: &PathBuf) -> Result<(), Failure> {
    let (s, _) = read_system(file)?;
    let report = validate(&s);
    print_validation(&report);
    if report.valid {
        println!(
            "valid: n = {}, horizon {}, every axiom holds",
            s.n,
            table_cell(&s.horizon)
        );
        Ok(())
    } else {
        Err(fail(
            2,
            format!("{} axiom violation(s)", report.violations.len()),
        ))
    }
}

// ---------------------------------------------------------------- check

fn default_tail(s: &NSystem, sched: Option<&SwitchSchedule>) -> Scalar {
    if let Some(sc) = sched {
        // Last replay boundary strictly before the horizon, if any: the
        // window then spans exactly the final band-and-replay round.
        let replays: Vec<&Scalar> = sc
            .phase_marks
            .iter()
            .filter(|m| m.kind == PhaseKind::Maximal && m.q < s.horizon)
            .map(|m| &m.q)
            .collect();
        if let Some(q) = replays.last() {
            return (*q).clone();
        }
        // Greedy schedule: halfway in epoch count.
        if sc.l.len() >= 2 {
            return sc.l[(sc.l.len() - 1).div_ceil(2)].clone();
        }
    }
    &s.horizon / int(2)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "FAILS",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn print_report(title: &str, report: &InequalityReport) {
    match report.branch {
        Some(b) => println!("{title} ({b} branch):"),
        None => println!("{title}:"),
    }
    for r in &report.rows {
        println!(
            "  {:<26} {:>16} {:>2} {:<16} slack {:>16}  {}",
            r.name,
            table_cell(&r.lhs),
            r.relation.to_string(),
            table_cell(&r.rhs),
            table_cell(&r.slack),
            verdict_str(r.verdict)
        );
    }
}

fn print_estimate(est: &PhiEstimate, under: &[Scalar], over: &[Scalar]) {
    println!(
        "tail window [{}, {}]",
        table_cell(&est.tail_start),
        table_cell(&est.horizon)
    );
    println!(
        "{:>3}  {:>16}  {:>16}  {:>16}  {:>16}",
        "j", "ratio under", "ratio over", "target under", "target over"
    );
    for j in 0..est.n {
        println!(
            "{:>3}  {:>16}  {:>16}  {:>16}  {:>16}",
            j + 1,
            table_cell(&est.under[j]),
            table_cell(&est.over[j]),
            table_cell(&under[j]),
            table_cell(&over[j])
        );
    }
}

fn cmd_check(
    file: &PathBuf,
    targets: TargetKind,
    tail_start: Option<Scalar>,
    tol: &Scalar,
) -> Result<(), Failure> {
    let (s, sched) = read_system(file)?;
    let report = validate(&s);
    if !report.valid {
        print_validation(&report);
        return Err(fail(
            2,
            format!("{} axiom violation(s)", report.violations.len()),
        ));
    }
    let kind: ConstructionKind = targets.into();
    let (under, over) = nsystem_targets(kind, s.n)?;
    let tail = tail_start.unwrap_or_else(|| default_tail(&s, sched.as_ref()));
    let est = estimate_phi(&s, &tail)?;
    print_estimate(&est, &under, &over);
    let dev = est.max_deviation(&under, &over);
    println!(
        "max deviation from targets {} (tolerance {})",
        table_cell(&dev),
        table_cell(tol)
    );

    let ok = if s.n == 3 {
        let laurent = check_laurent(&est.under, &est.over, tol)?;
        print_report("outer-constant relations", &laurent);
        let ss = check_schmidt_summerer(&est.under, &est.over, tol)?;
        print_report("middle-constant bounds", &ss);
        laurent.satisfied && ss.satisfied
    } else {
        // No inequality table beyond n = 3; gate on the target distance.
        dev <= *tol
    };

    if kind == ConstructionKind::Maximal && sched.as_ref().is_some_and(|sc| sc.l.len() >= 3) {
        let sc = sched.as_ref().unwrap();
        match convergence_report(&s, sc, &under, &over) {
            Ok(rows) => {
                println!("{:>7}  {:>16}", "epochs", "max deviation");
                for (e, d) in &rows {
                    println!("{:>7}  {:>16}", e, table_cell(d));
                }
            }
            Err(e) => println!("convergence table unavailable: {e}"),
        }
    }

    if ok {
        println!("checks satisfied");
        Ok(())
    } else {
        Err(fail(2, "asymptotic checks failed"))
    }
}

// --------------------------------------------------------------- minima

fn cmd_minima(
    terms: usize,
    boxes: &[Scalar],
    x_max: Option<BigInt>,
    xi_out: Option<PathBuf>,
    out: Option<PathBuf>,
    require_certified: bool,
) -> Result<(), Failure> {
    let out = required_out(out, "minima")?;
    let xi = liouville_xi(3, terms)?;
    println!("{}", xi.description);
    let rule = match x_max {
        Some(v) => XMaxRule::Fixed(v),
        None => XMaxRule::AutoCertify,
    };
    let samples = l_samples(&xi, boxes, &rule)?;
    fs::write(&out, minima_csv(&samples))?;
    if let Some(p) = xi_out {
        fs::write(&p, xi_to_json(&xi))?;
        println!("wrote {}", p.display());
    }
    println!(
        "{:>16}  {:>10}  {:>16}  {:>16}  {:>16}  {:>10}  certified",
        "T", "q", "lambda_1", "lambda_2", "lambda_3", "L_1/q"
    );
    for smp in samples.iter() {
        println!(
            "{:>16}  {:>10.4}  {:>16}  {:>16}  {:>16}  {:>10.6}  {}",
            table_cell(&smp.t),
            smp.q,
            table_cell(&smp.lambda[0]),
            table_cell(&smp.lambda[1]),
            table_cell(&smp.lambda[2]),
            smp.l[0] / smp.q,
            if smp.certified { "yes" } else { "no" }
        );
    }
    let certified = samples.iter().filter(|s| s.certified).count();
    println!("certified {} of {} samples", certified, samples.len());
    println!("wrote {}", out.display());
    if require_certified && certified < samples.len() {
        return Err(fail(
            4,
            format!("{} sample(s) uncertified", samples.len() - certified),
        ));
    }
    Ok(())
}

// --------------------------------------------------------------- render

fn cmd_render(
    file: &PathBuf,
    overlay: Option<PathBuf>,
    spec: RenderSpec,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let out = required_out(out, "render")?;
    if spec.slope_scale <= int(0) {
        return Err(fail(1, "--slope-scale must be positive"));
    }
    let (s, sched) = read_system(file)?;
    let report = validate(&s);
    if !report.valid {
        print_validation(&report);
        return Err(fail(
            2,
            format!("{} axiom violation(s)", report.violations.len()),
        ));
    }
    let rows = match overlay {
        Some(p) => Some(parse_minima_csv(&read_input(&p)?)?),
        None => None,
    };
    let (svg, skipped) = render_svg(&s, sched.as_ref(), rows.as_deref(), &spec);
    fs::write(&out, svg)?;
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} overlay sample(s) outside [0, horizon]");
    }
    println!("wrote {}", out.display());
    Ok(())
}

// -------------------------------------------------------------- compare

fn cmd_compare(system: &PathBuf, csv: &PathBuf) -> Result<(), Failure> {
    let (s, _) = read_system(system)?;
    let rows = parse_minima_csv(&read_input(csv)?)?;
    let report = compare_to_system(&rows, &s);
    println!("{:>10}  {:>12}", "q", "deviation");
    for (q, dev) in &report.rows {
        println!("{:>10.4}  {:>12.6}", q, dev);
    }
    if report.skipped > 0 {
        println!("skipped {} sample(s) outside [0, horizon]", report.skipped);
    }
    println!(
        "max deviation {:.6} over {} sample(s)",
        report.max_dev,
        report.rows.len()
    );
    Ok(())
}
