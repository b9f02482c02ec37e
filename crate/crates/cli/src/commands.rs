use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fiberaudit_core::collision::{
    cube_inscribed_sphere_witness, default_tolerance, large_fiber_witness, CollisionWitness,
    SearchOptions,
};
use fiberaudit_core::fibers::{
    boundedness_witness, classify_small, diameter_lower_bound, lemma_witness, sample_approx_fiber,
    union_probe, FiberClass, FiberSampling,
};
use fiberaudit_core::figure::{axis_tube_figure, even_levels, urysohn_figure, FigureCurve};
use fiberaudit_core::geometry::{read_points_csv, write_points_csv};
use fiberaudit_core::quantizer::{code_to_rational, decode, encode, CodecConfig, PrimeCode};
use fiberaudit_core::sampling::derive_seed;
use fiberaudit_core::urysohn::{fiber_geometry, region_separation, small_levels};
use fiberaudit_core::{
    distance, parse_descriptor, serialize_descriptor, BoxBounds, Error, MapDescriptor, MapEval,
    Point,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::parse::{parse_box, parse_list, parse_point};
use crate::report::{canonical_json, to_value, write_output, InputDigest, Report};
use crate::Failure;

pub type Outcome = std::result::Result<i32, Failure>;

const EXIT_OK: i32 = 0;
const EXIT_UNCONVERGED: i32 = 2;

fn read_file(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::from(Error::Io(e)).context(path))
}

fn load_map(
    path: &Path,
    digest: &mut InputDigest,
) -> std::result::Result<(MapDescriptor, Value), Failure> {
    let bytes = read_file(path)?;
    digest.add("map", &bytes);
    let text = String::from_utf8_lossy(&bytes);
    let map = parse_descriptor(&text).map_err(|e| Failure::from(e).context(path))?;
    let doc =
        serde_json::from_str(&serialize_descriptor(&map)).expect("descriptor documents are JSON");
    Ok((map, doc))
}

fn load_points(
    path: &Path,
    label: &str,
    digest: &mut InputDigest,
) -> std::result::Result<Vec<Point>, Failure> {
    let bytes = read_file(path)?;
    digest.add(label, &bytes);
    read_points_csv(bytes.as_slice()).map_err(|e| Failure::from(e).context(path))
}

fn load_codec(path: &Path) -> std::result::Result<CodecConfig, Failure> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Failure::from(Error::from(e)).context(path))
}

struct Clock(Option<Instant>);

impl Clock {
    fn start(enabled: bool) -> Self {
        Clock(enabled.then(Instant::now))
    }

    fn stamp(&self, report: &mut Report) {
        report.wall_time = self.0.map(|t| t.elapsed().as_secs_f64());
    }
}

fn emit(report: &Report, common: &Common) -> std::result::Result<(), Failure> {
    write_output(common.out.as_deref(), &report.render()).map_err(Failure::from)
}

fn search_options(
    search: &SearchArgs,
    seed: u64,
    digest: &mut InputDigest,
) -> std::result::Result<SearchOptions, Failure> {
    let carrier = match &search.carrier {
        Some(path) => Some(
            load_points(path, "carrier", digest)?
                .into_iter()
                .map(Point::into_coords)
                .collect(),
        ),
        None => None,
    };
    Ok(SearchOptions {
        tol: search.tol,
        starts: search.starts.map(|k| k as usize),
        budget: search.budget,
        seed,
        carrier,
    })
}

fn search_config(map: Value, opts: &SearchOptions, m: usize, extra: Value) -> Value {
    let bisection = m == 1 && opts.carrier.as_ref().is_none_or(|c| c.len() == 2);
    let mut cfg = json!({
        "map": map,
        "tol": opts.tol,
        "starts": (!bisection).then(|| opts.starts.unwrap_or(8 * (m + 1))),
        "budget": opts.budget,
        "seed": opts.seed,
        "carrier": opts.carrier,
    });
    if let (Value::Object(c), Value::Object(e)) = (&mut cfg, extra) {
        c.extend(e);
    }
    cfg
}

fn witness_report(
    command: &'static str,
    config: Value,
    digest: InputDigest,
    w: &CollisionWitness,
    clock: &Clock,
    common: &Common,
) -> Outcome {
    let mut report = Report::new(command, config, digest, to_value(w));
    report.evaluations = Some(w.evaluations);
    clock.stamp(&mut report);
    emit(&report, common)?;
    if w.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "fiberaudit: search did not reach the tolerance (defect {:e} > {:e}); best pair reported",
            w.defect, w.tolerance
        );
        Ok(EXIT_UNCONVERGED)
    }
}

pub fn witness(args: &WitnessArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let mut opts = search_options(&args.search, args.common.seed.resolve(), &mut digest)?;
    if opts.tol.is_none() {
        opts.tol = Some(default_tolerance(&map, &Point::origin(map.domain_dim()))?);
    }
    let w = large_fiber_witness(&map, args.radius, &opts)?;
    let config = search_config(doc, &opts, map.codomain_dim(), json!({ "M": args.radius }));
    witness_report("witness", config, digest, &w, &clock, &args.common)
}

pub fn cube_witness(args: &CubeWitnessArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let mut opts = search_options(&args.search, args.common.seed.resolve(), &mut digest)?;
    if opts.tol.is_none() {
        let center = Point::new(vec![0.5; map.domain_dim()])?;
        opts.tol = Some(default_tolerance(&map, &center)?);
    }
    let w = cube_inscribed_sphere_witness(&map, &opts)?;
    let config = search_config(doc, &opts, map.codomain_dim(), json!({}));
    witness_report("cube-witness", config, digest, &w, &clock, &args.common)
}

fn points_csv(points: &[Point]) -> std::result::Result<String, Failure> {
    let mut buf = Vec::new();
    write_points_csv(&mut buf, points)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn fiber(args: &FiberArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let level = parse_point(&args.level, "level")?;
    let bounds = parse_box(&args.sampling.bounds, map.domain_dim())?;
    let sampling = FiberSampling {
        bounds,
        samples: args.sampling.samples as usize,
        refine_steps: args.sampling.refine_steps as usize,
        seed: args.common.seed.resolve(),
    };
    let mut fiber = sample_approx_fiber(&map, &level, args.delta, &sampling)?;

    let csv = match args.format.as_deref() {
        Some(f) => f == "csv",
        None => args
            .common
            .out
            .as_ref()
            .is_some_and(|p| p.extension().is_some_and(|e| e == "csv")),
    };
    if csv {
        write_output(args.common.out.as_deref(), &points_csv(&fiber.points)?)?;
        return Ok(EXIT_OK);
    }

    let config = json!({
        "map": doc,
        "level": level,
        "delta": args.delta,
        "sampling": sampling,
        "M": args.threshold,
    });
    let mut result = json!({
        "kept": fiber.points.len(),
        "drawn": fiber.drawn,
        "diameter_lower_bound": diameter_lower_bound(&fiber).ok(),
    });
    if let Some(m) = args.threshold {
        result["classification"] = match classify_small(&fiber, m) {
            Ok(c) => to_value(&c),
            Err(_) => Value::Null,
        };
    }
    let mut report = Report::new("fiber", config, digest, Value::Null);
    fiber.map_id = Some(report.input_digest.clone());
    result["fiber"] = to_value(&fiber);
    report.result = result;
    clock.stamp(&mut report);
    emit(&report, &args.common)?;
    Ok(EXIT_OK)
}

pub fn lemma(args: &LemmaArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let points = load_points(&args.points, "points", &mut digest)?;
    if points.len() != 3 {
        return Err(Failure::input(format!(
            "{}: expected exactly 3 points, got {}",
            args.points.display(),
            points.len()
        )));
    }
    let w = lemma_witness(
        &map,
        [&points[0], &points[1], &points[2]],
        args.threshold,
        args.tol,
    )?;
    let config = json!({
        "map": doc,
        "points": points,
        "M": args.threshold,
        "tol": args.tol,
    });
    let value_x = map.eval(&w.x)?.coords()[0];
    let value_partner = map.eval(&w.partner)?.coords()[0];
    let mut result = to_value(&w);
    result["value_x"] = json!(value_x);
    result["value_partner"] = json!(value_partner);
    let mut report = Report::new("lemma", config, digest, result);
    clock.stamp(&mut report);
    emit(&report, &args.common)?;
    Ok(EXIT_OK)
}

pub fn probe_union(args: &ProbeUnionArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let candidates = load_points(&args.candidates, "candidates", &mut digest)?;
    let seed = args.common.seed.resolve();

    let mut accepted = Vec::with_capacity(candidates.len());
    let mut rejected = Vec::new();
    match &args.verify_box {
        Some(spec) => {
            let bounds = parse_box(spec, map.domain_dim())?;
            for (i, x) in candidates.iter().enumerate() {
                let sampling = FiberSampling {
                    bounds: bounds.clone(),
                    samples: args.samples as usize,
                    refine_steps: 50,
                    seed: derive_seed(seed, i as u64),
                };
                let level = map.eval(x)?;
                let mut fiber = sample_approx_fiber(&map, &level, args.delta, &sampling)?;
                fiber.points.insert(0, x.clone());
                match classify_small(&fiber, args.threshold)? {
                    FiberClass::PossiblySmall { .. } => accepted.push(x.clone()),
                    FiberClass::NotSmall { distance, .. } => rejected.push(json!({
                        "index": i,
                        "point": x,
                        "distance": distance,
                    })),
                }
            }
        }
        None => accepted.extend(candidates.iter().cloned()),
    }
    if accepted.is_empty() {
        return Err(Failure::input("no candidate passed verification"));
    }
    let probe = union_probe(&map, &accepted, args.threshold, args.tol)?;
    let config = json!({
        "map": doc,
        "candidates": candidates,
        "M": args.threshold,
        "tol": args.tol,
        "seed": seed,
        "verify_box": args.verify_box,
        "delta": args.delta,
        "samples": args.samples,
    });
    let result = json!({
        "probe": probe,
        "accepted": accepted.len(),
        "rejected": rejected,
    });
    let mut report = Report::new("probe-union", config, digest, result);
    clock.stamp(&mut report);
    emit(&report, &args.common)?;
    Ok(EXIT_OK)
}

pub fn boundedness(args: &BoundednessArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let mut digest = InputDigest::default();
    let (map, doc) = load_map(&args.map, &mut digest)?;
    let b = parse_point(&args.b, "b")?;
    let grid = FiberSampling {
        bounds: parse_box(&args.bounds, map.domain_dim())?,
        samples: args.samples as usize,
        refine_steps: 0,
        seed: args.common.seed.resolve(),
    };
    let outcome = boundedness_witness(&map, &b, args.threshold, &grid, args.tol)?;
    let config = json!({
        "map": doc,
        "b": b,
        "M": args.threshold,
        "grid": grid,
        "tol": args.tol,
    });
    let mut report = Report::new("boundedness", config, digest, to_value(&outcome));
    clock.stamp(&mut report);
    emit(&report, &args.common)?;
    Ok(EXIT_OK)
}

pub fn urysohn(args: &UrysohnArgs) -> Outcome {
    let clock = Clock::start(args.common.timing);
    let a = parse_point(&args.a, "a")?;
    let b = parse_point(&args.b, "b")?;
    let result = if let Some(t) = args.level {
        let fiber = fiber_geometry(&a, &b, t)?;
        json!({ "fiber": fiber, "diameter": finite_or_null(fiber.diameter()) })
    } else {
        let m = args.threshold.expect("clap requires --t or --M");
        json!({
            "small_levels": small_levels(&a, &b, m)?,
            "region_separation": region_separation(&a, &b, m)?,
        })
    };
    let config = json!({ "a": a, "b": b, "t": args.level, "M": args.threshold });
    let mut report = Report::new("urysohn", config, InputDigest::default(), result);
    clock.stamp(&mut report);
    emit(&report, &args.common)?;
    Ok(EXIT_OK)
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn quantize(args: &QuantizeArgs) -> Outcome {
    let codec = load_codec(&args.map_config)?;
    let bytes = read_file(&args.input)?;
    let points =
        read_points_csv(bytes.as_slice()).map_err(|e| Failure::from(e).context(&args.input))?;
    let mut out = String::new();
    for (i, x) in points.iter().enumerate() {
        let code =
            encode(&codec, x).map_err(|e| Failure::from(e).context(format!("row {}", i + 1)))?;
        let mut line = to_value(&code);
        if args.rational {
            line["value"] = code_to_rational(&code)
                .iter()
                .map(|r| json!(r.to_string()))
                .collect();
        }
        out.push_str(&serde_json::to_string(&line).expect("codes serialise"));
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(EXIT_OK)
}

pub fn dequantize(args: &DequantizeArgs) -> Outcome {
    let codec = load_codec(&args.map_config)?;
    let bytes = read_file(&args.input)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut centers = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ctx = format!("{} line {}", args.input.display(), i + 1);
        let mut value: Value =
            serde_json::from_str(line).map_err(|e| Failure::from(Error::from(e)).context(&ctx))?;
        if let Value::Object(map) = &mut value {
            map.remove("value");
        }
        let code: PrimeCode = serde_json::from_value(value)
            .map_err(|e| Failure::from(Error::from(e)).context(&ctx))?;
        centers.push(decode(&codec, &code).map_err(|e| Failure::from(e).context(&ctx))?);
    }
    write_output(args.out.as_deref(), &points_csv(&centers)?)?;
    Ok(EXIT_OK)
}

fn write_curves(dir: &Path, curves: &[FigureCurve]) -> std::result::Result<Vec<Value>, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io(e)).context(dir))?;
    curves
        .iter()
        .map(|c| {
            let path = dir.join(c.file_name());
            write_output(Some(&path), &points_csv(&c.points)?)?;
            Ok(json!({ "file": c.file_name(), "label": c.label, "rows": c.points.len() }))
        })
        .collect()
}

fn default_plot_box(a: &Point, b: &Point) -> std::result::Result<BoxBounds, Failure> {
    let mid = a.midpoint(b)?;
    let half = 2.0 * distance(a, b)?;
    Ok(BoxBounds::new(
        mid.coords().iter().map(|c| c - half).collect(),
        mid.coords().iter().map(|c| c + half).collect(),
    )?)
}

fn figure_report(kind: &'static str, config: Value, files: Vec<Value>) -> Outcome {
    let report = Report::new(
        kind,
        config,
        InputDigest::default(),
        json!({ "files": files }),
    );
    write_output(None, &report.render())?;
    Ok(EXIT_OK)
}

pub fn report(args: &ReportArgs) -> Outcome {
    match &args.kind {
        FigureKind::UrysohnFigure(f) => {
            let a = parse_point(&f.a, "a")?;
            let b = parse_point(&f.b, "b")?;
            let plot = match &f.bounds {
                Some(spec) => parse_box(spec, 2)?,
                None => default_plot_box(&a, &b)?,
            };
            let levels = even_levels(f.levels as usize);
            let curves = urysohn_figure(&a, &b, &levels, &plot)?;
            let files = write_curves(&f.out_dir, &curves)?;
            let config =
                json!({ "a": a, "b": b, "levels": levels, "box": plot, "out_dir": f.out_dir });
            figure_report("report urysohn-figure", config, files)
        }
        FigureKind::AxisTubeFigure(f) => {
            let x1 = parse_list(&f.x1, "x1")?;
            let r = parse_list(&f.r, "r")?;
            let radii = match r.len() {
                1 => vec![r[0]; x1.len()],
                k if k == x1.len() => r,
                k => {
                    return Err(Failure::input(format!(
                        "{k} radii for {} positions",
                        x1.len()
                    )))
                }
            };
            let levels: Vec<(f64, f64)> = x1.into_iter().zip(radii).collect();
            let curves = axis_tube_figure(f.dim as usize, &levels)?;
            let files = write_curves(&f.out_dir, &curves)?;
            let config = json!({ "n": f.dim, "levels": levels, "out_dir": f.out_dir });
            figure_report("report axis-tube-figure", config, files)
        }
        FigureKind::FromReport(f) => from_report(&f.report, &f.out_dir),
    }
}

fn from_report(path: &PathBuf, out_dir: &Path) -> Outcome {
    let bytes = read_file(path)?;
    let doc: Value =
        serde_json::from_slice(&bytes).map_err(|e| Failure::from(Error::from(e)).context(path))?;
    let malformed = || Failure::input(format!("{}: malformed report", path.display()));
    let point_at = |v: &Value| -> std::result::Result<Point, Failure> {
        serde_json::from_value(v.clone()).map_err(|_| malformed())
    };
    let curves = match doc["command"].as_str() {
        Some("urysohn") => {
            let a = point_at(&doc["config"]["a"])?;
            let b = point_at(&doc["config"]["b"])?;
            let levels = match doc["config"]["t"].as_f64() {
                Some(t) => vec![t],
                None => {
                    let small = &doc["result"]["small_levels"];
                    vec![
                        small["near_a"]["hi"].as_f64().ok_or_else(malformed)?,
                        small["near_b"]["lo"].as_f64().ok_or_else(malformed)?,
                    ]
                }
            };
            urysohn_figure(&a, &b, &levels, &default_plot_box(&a, &b)?)?
        }
        Some("fiber") => {
            let points: Vec<Point> =
                serde_json::from_value(doc["result"]["fiber"]["points"].clone())
                    .map_err(|_| malformed())?;
            vec![FigureCurve {
                index: 0,
                label: format!("level={}", canonical_json(&doc["config"]["level"]).trim()),
                points,
            }]
        }
        other => {
            return Err(Failure::input(format!(
                "{}: figure data needs a `urysohn` or `fiber` report, got {}",
                path.display(),
                other.map_or("no command".to_string(), |c| format!("`{c}`"))
            )))
        }
    };
    let files = write_curves(out_dir, &curves)?;
    figure_report(
        "report from-report",
        json!({ "report": path, "out_dir": out_dir }),
        files,
    )
}
