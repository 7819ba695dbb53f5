use std::fs;

use bcdist::bound::check_inequality_with;
use bcdist::capacity::{
    boundary_rates, caption_literal_rates, containment, region_samples, scenario_from_capacities, split_grid,
    write_region_csv, GaussianBC,
};
use bcdist::membership::{in_outer_region_with, trace_boundary_row, write_boundary_csv, BoundaryRow, SupOptions};
use bcdist::simulate::{run_analog, SimConfig};
use bcdist::verify::{verify_theorems, VerifyOptions};
use bcdist::{BroadcastScenario, DistortionTuple, ExtReal, RawScenario, TauSchedule};
use serde::Serialize;

use crate::output::{to_json, write_manifest, write_output, Failure, RunManifest};
use crate::{Cli, Command, GlobalArgs};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if !(g.tolerance >= 0.0 && g.tolerance.is_finite()) {
        return Err(Failure::input("InvalidTolerance", format!("tolerance {} must be finite and >= 0", g.tolerance)));
    }
    match &cli.command {
        Command::Eval { distortions, tau } => eval(g, distortions, tau),
        Command::Membership {
            distortions,
            at_trivial,
            grid,
        } => membership(g, distortions.as_deref(), *at_trivial, *grid),
        Command::Trace { d1_min, d1_max, points } => trace(g, *d1_min, *d1_max, *points),
        Command::VerifyTheorems { trials, inject_fault } => verify(g, *trials, *inject_fault),
        Command::Figure1 {
            c1,
            c2,
            bandwidths,
            samples,
        } => figure1(g, *c1, *c2, bandwidths, *samples),
        Command::Simulate { samples } => simulate(g, *samples),
    }
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Failure::input("ParseError", format!("--{flag}: cannot parse {s:?} as a finite number"))),
            }
        })
        .collect()
}

fn parse_taus(text: &str) -> Result<Vec<ExtReal>, Failure> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<ExtReal>()
                .map_err(|_| Failure::input("ParseError", format!("--tau: cannot parse {s:?} (use a number or inf)")))
        })
        .collect()
}

/// Scenario file first, then inline flags on top.
fn load_scenario(g: &GlobalArgs) -> Result<BroadcastScenario, Failure> {
    let mut raw = match &g.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::input("Io", format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RawScenario>(&text)
                .map_err(|e| Failure::input("ScenarioParse", format!("{}: {e}", path.display())))?
        }
        None => {
            let missing: Vec<&str> = [
                ("--power", g.power.is_none()),
                ("--noises", g.noises.is_none()),
                ("--bandwidth", g.bandwidth.is_none()),
            ]
            .into_iter()
            .filter_map(|(n, m)| m.then_some(n))
            .collect();
            if !missing.is_empty() {
                return Err(Failure::input(
                    "MissingScenario",
                    format!("pass --scenario FILE or {}", missing.join(", ")),
                ));
            }
            RawScenario {
                power: 0.0,
                noises: Vec::new(),
                bandwidth: 0.0,
                source_var: 1.0,
            }
        }
    };
    if let Some(p) = g.power {
        raw.power = p;
    }
    if let Some(n) = &g.noises {
        raw.noises = parse_list("noises", n)?;
    }
    if let Some(b) = g.bandwidth {
        raw.bandwidth = b;
    }
    if let Some(v) = g.source_var {
        raw.source_var = v;
    }
    Ok(bcdist::validate_scenario(raw)?)
}

fn raw_of(s: &BroadcastScenario) -> RawScenario {
    RawScenario {
        power: s.power(),
        noises: s.noises().to_vec(),
        bandwidth: s.bandwidth(),
        source_var: s.source_var(),
    }
}

/// Prints the payload; with `--out`, also writes it and a manifest.
fn emit<T: Serialize>(g: &GlobalArgs, name: &str, payload: &T, manifest: &mut RunManifest) -> Result<(), Failure> {
    let mut text = to_json(payload)?;
    text.push('\n');
    print!("{text}");
    if let Some(dir) = &g.out {
        write_output(dir, &format!("{name}.json"), text.as_bytes(), manifest)?;
        write_manifest(dir, manifest)?;
    }
    Ok(())
}

fn eval(g: &GlobalArgs, distortions: &str, tau: &str) -> Result<(), Failure> {
    let s = load_scenario(g)?;
    let d = DistortionTuple::new(parse_list("distortions", distortions)?)?;
    let t = TauSchedule::new(parse_taus(tau)?)?;
    let ev = check_inequality_with(&s, &d, &t, g.tolerance)?;
    let mut m = RunManifest::new("eval", Some(raw_of(&s)));
    m.param("distortions", distortions).param("tau", tau).param("tolerance", g.tolerance);
    emit(g, "eval", &ev, &mut m)
}

#[derive(Serialize)]
struct MembershipPayload {
    member: bool,
    margin: f64,
    sup_value: f64,
    rhs: f64,
    distortions: Vec<f64>,
    argmax_tau: Vec<ExtReal>,
    argmax_compact: Vec<f64>,
    grid_value: f64,
    resolution: usize,
    iterations: usize,
    evaluations: usize,
    certified_gap: f64,
}

fn membership(g: &GlobalArgs, distortions: Option<&str>, at_trivial: bool, grid: Option<usize>) -> Result<(), Failure> {
    let s = load_scenario(g)?;
    let d = match distortions {
        Some(text) if !at_trivial => DistortionTuple::new(parse_list("distortions", text)?)?,
        _ => s.trivial_point(),
    };
    let opts = sup_options(grid)?;
    let v = in_outer_region_with(&s, &d, g.tolerance, &opts)?;
    let payload = MembershipPayload {
        member: v.member,
        margin: v.margin,
        sup_value: v.sup.sup_value,
        rhs: s.rhs(),
        distortions: d.values().to_vec(),
        argmax_tau: v.sup.argmax_tau.taus().to_vec(),
        argmax_compact: v.sup.argmax_compact.clone(),
        grid_value: v.sup.grid_value,
        resolution: v.sup.resolution,
        iterations: v.sup.iterations,
        evaluations: v.sup.evaluations,
        certified_gap: v.sup.certified_gap,
    };
    let mut m = RunManifest::new("membership", Some(raw_of(&s)));
    m.param("distortions", distortions.filter(|_| !at_trivial).unwrap_or("trivial"))
        .param("grid", v.sup.resolution)
        .param("tolerance", g.tolerance);
    emit(g, "membership", &payload, &mut m)
}

fn sup_options(grid: Option<usize>) -> Result<SupOptions, Failure> {
    match grid {
        Some(0) => Err(Failure::input("InvalidGrid", "--grid must be at least 1")),
        Some(n) => Ok(SupOptions::with_resolution(n)),
        None => Ok(SupOptions::default()),
    }
}

#[derive(Serialize)]
struct TraceRow {
    d1: f64,
    d2_min: f64,
    d2_trivial: f64,
    gap: f64,
}

#[derive(Serialize)]
struct TraceSummary {
    rows: Vec<TraceRow>,
    min_gap: f64,
    max_gap: f64,
    outputs: Vec<String>,
}

fn trace(g: &GlobalArgs, d1_min: Option<f64>, d1_max: Option<f64>, points: usize) -> Result<(), Failure> {
    let s = load_scenario(g)?;
    if s.receivers() != 2 {
        return Err(Failure::input(
            "UnsupportedReceivers",
            format!("trace needs exactly 2 receivers, got {}", s.receivers()),
        ));
    }
    let ns = s.source_var();
    let d_star = s.trivial_point().values().to_vec();
    let lo = d1_min.unwrap_or(d_star[0]);
    let hi = d1_max.unwrap_or(ns);
    if !(lo > 0.0 && lo <= hi && hi <= ns) || points == 0 {
        return Err(Failure::input(
            "InvalidGrid",
            format!("need 0 < d1-min <= d1-max <= {ns} and points >= 1, got [{lo}, {hi}] x {points}"),
        ));
    }
    // Any D_2 below D_2* is excluded, so half of it is a safe lower bracket.
    let lower = 0.5 * d_star[1];
    let opts = SupOptions::default();
    let mut rows = Vec::with_capacity(points);
    let mut boundary: Vec<BoundaryRow> = Vec::with_capacity(points);
    for i in 0..points {
        let d1 = if points == 1 {
            lo
        } else {
            (lo + (hi - lo) * i as f64 / (points - 1) as f64).min(hi)
        };
        let row = trace_boundary_row(&s, &[d1], (lower, ns), g.tolerance, &opts)?;
        rows.push(TraceRow {
            d1,
            d2_min: row.last_min,
            d2_trivial: d_star[1],
            gap: row.last_min - d_star[1],
        });
        boundary.push(row);
    }

    let dir = g.out.clone().unwrap_or_else(|| ".".into());
    let mut m = RunManifest::new("trace", Some(raw_of(&s)));
    m.param("d1_min", lo)
        .param("d1_max", hi)
        .param("points", points)
        .param("tolerance", g.tolerance);
    let mut csv = String::from("D1,D2_min,D2_trivial,gap\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.d1, r.d2_min, r.d2_trivial, r.gap));
    }
    let trace_path = write_output(&dir, "trace.csv", csv.as_bytes(), &mut m)?;
    let mut buf = Vec::new();
    write_boundary_csv(&boundary, 2, &mut buf)?;
    let boundary_path = write_output(&dir, "boundary.csv", &buf, &mut m)?;
    write_manifest(&dir, &m)?;

    let gaps = rows.iter().map(|r| r.gap);
    let summary = TraceSummary {
        min_gap: gaps.clone().fold(f64::INFINITY, f64::min),
        max_gap: gaps.fold(f64::NEG_INFINITY, f64::max),
        rows,
        outputs: vec![trace_path.display().to_string(), boundary_path.display().to_string()],
    };
    println!("{}", to_json(&summary)?);
    Ok(())
}

fn verify(g: &GlobalArgs, trials: usize, inject_fault: bool) -> Result<(), Failure> {
    let report = verify_theorems(&VerifyOptions {
        trials,
        seed: g.seed,
        inject_fault,
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for suite in &report.suites {
        eprintln!("{}: {}/{}", suite.name, suite.passed, suite.trials);
    }
    let mut m = RunManifest::new("verify-theorems", None);
    m.param("trials", trials).param("seed", g.seed);
    if inject_fault {
        m.param("inject_fault", true);
    }
    emit(g, "verify", &report, &mut m)?;
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.ok()).map(|s| s.name.as_str()).collect();
        Err(Failure::Verification(format!("failing suites: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct Corner {
    b: f64,
    r1_max: f64,
    r2_max: f64,
    corner_error: f64,
}

#[derive(Serialize)]
struct Nesting {
    wider_b: f64,
    narrower_b: f64,
    /// The region at `narrower_b` lies inside the one at `wider_b`.
    contained: bool,
    /// The reverse inclusion fails, so the nesting is strict.
    strict: bool,
}

#[derive(Serialize)]
struct Figure1Summary {
    c1: f64,
    c2: f64,
    bandwidths: Vec<f64>,
    samples: usize,
    caption_literal: bool,
    corners: Vec<Corner>,
    nesting: Vec<Nesting>,
    strictly_nested: bool,
    outputs: Vec<String>,
}

fn figure1(g: &GlobalArgs, c1: f64, c2: f64, bandwidths: &str, samples: usize) -> Result<(), Failure> {
    let mut bs = parse_list("b", bandwidths)?;
    if samples < 2 {
        return Err(Failure::input("InvalidSamples", "--samples must be at least 2"));
    }
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    let channels: Vec<(f64, GaussianBC)> = bs
        .iter()
        .map(|&b| Ok((b, GaussianBC::from(&scenario_from_capacities(c1, c2, b)?))))
        .collect::<Result<_, bcdist::Error>>()?;

    let dir = g.out.clone().unwrap_or_else(|| ".".into());
    let mut m = RunManifest::new("figure1", None);
    m.param("c1", c1)
        .param("c2", c2)
        .param("b", bandwidths)
        .param("samples", samples)
        .param("caption_literal", g.caption_literal);

    let mut corners = Vec::new();
    for (b, ch) in &channels {
        let csv = if g.caption_literal {
            caption_literal_csv(ch, *b, samples)?
        } else {
            let mut buf = Vec::new();
            write_region_csv(&region_samples(ch, *b, samples)?, 2, &mut buf)?;
            buf
        };
        write_output(&dir, &format!("figure1_b{b}.csv"), &csv, &mut m)?;
        let r1_max = boundary_rates(ch, &[1.0, 0.0], *b)?.rates()[0];
        let r2_max = boundary_rates(ch, &[0.0, 1.0], *b)?.rates()[1];
        corners.push(Corner {
            b: *b,
            r1_max,
            r2_max,
            corner_error: (r1_max - c1).abs().max((r2_max - c2).abs()),
        });
    }

    let mut nesting = Vec::new();
    for pair in channels.windows(2) {
        let (b_lo, ch_lo) = &pair[0];
        let (b_hi, ch_hi) = &pair[1];
        let contained = containment(ch_hi, *b_hi, ch_lo, *b_lo, samples)?.is_contained();
        let reverse = containment(ch_lo, *b_lo, ch_hi, *b_hi, samples)?.is_contained();
        nesting.push(Nesting {
            wider_b: *b_lo,
            narrower_b: *b_hi,
            contained,
            strict: contained && !reverse,
        });
    }
    let strictly_nested = nesting.iter().all(|n| n.strict);

    let summary_path = dir.join("figure1_summary.json");
    let mut summary = Figure1Summary {
        c1,
        c2,
        bandwidths: bs,
        samples,
        caption_literal: g.caption_literal,
        corners,
        nesting,
        strictly_nested,
        outputs: m.outputs.clone(),
    };
    summary.outputs.push(summary_path.display().to_string());
    let mut text = to_json(&summary)?;
    text.push('\n');
    write_output(&dir, "figure1_summary.json", text.as_bytes(), &mut m)?;
    write_manifest(&dir, &m)?;
    print!("{text}");
    if strictly_nested {
        Ok(())
    } else {
        Err(Failure::Verification("regions are not strictly nested".into()))
    }
}

fn caption_literal_csv(ch: &GaussianBC, b: f64, samples: usize) -> Result<Vec<u8>, Failure> {
    let mut csv = String::from("alpha,R1,R2\n");
    for split in split_grid(2, samples) {
        let alpha = split[1];
        let (r1, r2) = caption_literal_rates(ch, alpha, b)?;
        csv.push_str(&format!("{alpha},{r1},{r2}\n"));
    }
    Ok(csv.into_bytes())
}

fn simulate(g: &GlobalArgs, samples: usize) -> Result<(), Failure> {
    let s = load_scenario(g)?;
    let raw = raw_of(&s);
    let cfg = SimConfig::new(s, samples, g.seed)?;
    let report = run_analog(&cfg);
    let mut m = RunManifest::new("simulate", Some(raw));
    m.param("samples", samples).param("seed", g.seed);
    emit(g, "simulate", &report, &mut m)
}
