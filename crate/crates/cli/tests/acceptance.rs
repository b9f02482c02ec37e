//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use fiberaudit_core::fibers::{classify_small, sample_approx_fiber, FiberClass, FiberSampling};
use fiberaudit_core::quantizer::{
    cell_index, code_to_rational, decode, encode, encode_cell, fiber_diameter, l1_norm_closed_form,
    linf_norm, CellIndex, CodecConfig,
};
use fiberaudit_core::{BigInt, BigRational, BoxBounds, MapDescriptor, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const C1_RADIUS: f64 = 1e6;
const C1_DEFECT: f64 = 1e-9;
const C1_SECONDS: f64 = 1.0;

const C2_RADIUS: f64 = 100.0;
const C2_DEFECT: f64 = 1e-12;
const C2_ITERATIONS: u64 = 80;

const C3_DELTA: f64 = 1e-9;
const C3_SAMPLES: usize = 500;
const C3_CIRCLE_TOL: f64 = 1e-6;
const C3_DIAMETER_TOL: f64 = 1e-3;

const C5_POINTS: usize = 10_000;
const C5_PAIRS: usize = 100_000;
const C5_EPS: f64 = 0.25;

const C6_CUTOFF: i32 = 60;
const C6_TOL: f64 = 1e-12;

const C7_TOL: f64 = 1e-9;
const C7_SECONDS: f64 = 1.0;

const C8_SEEDS: u64 = 100;
const C8_CANDIDATES: usize = 200;
const C8_TUBE_X1: f64 = 1e6;

const C9_MAPS: u64 = 20;
const C9_STARTS: u64 = 100;
const C9_DEFECT: f64 = 1e-6;
const C9_SECONDS: f64 = 10.0;
const C9_RATE: f64 = 0.95;

/// "Exactly" for a separation computed from a normalised direction.
const SEPARATION_REL: f64 = 1e-12;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)*));
        }
    };
}

struct Invocation {
    code: i32,
    output: Vec<u8>,
    seconds: f64,
}

impl Invocation {
    fn report(&self) -> Value {
        serde_json::from_slice(&self.output).expect("report is JSON")
    }
}

struct Recorded {
    args: Vec<OsString>,
    out: PathBuf,
    output: Vec<u8>,
}

struct Cli {
    dir: tempfile::TempDir,
    runs: Vec<Recorded>,
}

impl Cli {
    fn new() -> Self {
        Cli {
            dir: tempfile::tempdir().expect("temp dir"),
            runs: Vec::new(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, contents).expect("write input");
        p
    }

    fn exec(args: &[OsString], out: &Path, threads: &str) -> Invocation {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_fiberaudit"))
            .args(args)
            .arg("--out")
            .arg(out)
            .env("FIBERAUDIT_THREADS", threads)
            .status()
            .expect("spawn fiberaudit");
        let seconds = start.elapsed().as_secs_f64();
        Invocation {
            code: status.code().unwrap_or(-1),
            output: std::fs::read(out).unwrap_or_default(),
            seconds,
        }
    }

    /// Runs the binary with `--out <name>` appended and records the call
    /// for the rerun check.
    fn run(&mut self, name: &str, args: &[&dyn AsRef<std::ffi::OsStr>]) -> Invocation {
        let args: Vec<OsString> = args.iter().map(|a| a.as_ref().to_os_string()).collect();
        let out = self.path(name);
        let inv = Self::exec(&args, &out, "4");
        self.runs.push(Recorded {
            args,
            out,
            output: inv.output.clone(),
        });
        inv
    }
}

fn urysohn_value(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let da: f64 = x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum();
    let db: f64 = x.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    da / (da + db)
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn coords(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("coordinate array")
        .iter()
        .map(|c| c.as_f64().expect("number"))
        .collect()
}

fn urysohn_doc(a: [f64; 2], b: [f64; 2]) -> String {
    format!(
        r#"{{"variant":"urysohn","n":2,"m":1,"a":[{:?},{:?}],"b":[{:?},{:?}]}}"#,
        a[0], a[1], b[0], b[1]
    )
}

fn csv(points: &[Vec<f64>]) -> String {
    points
        .iter()
        .map(|p| {
            p.iter()
                .map(|c| format!("{c:?}"))
                .collect::<Vec<_>>()
                .join(",")
                + "\n"
        })
        .collect()
}

fn criterion_1(cli: &mut Cli) -> Verdict {
    let map = cli.write(
        "projection.json",
        r#"{"variant":"linear","n":3,"m":2,"matrix":[1,0,0,0,1,0]}"#,
    );
    let inv = cli.run(
        "c1.json",
        &[&"witness", &"--map", &map, &"--M", &C1_RADIUS.to_string()],
    );
    ensure!(inv.code == 0, "exit code {}", inv.code);
    let r = &inv.report()["result"];
    let sep = r["separation"].as_f64().unwrap();
    let defect = r["defect"].as_f64().unwrap();
    let (x, xp) = (coords(&r["x"]), coords(&r["x_prime"]));
    let recomputed = dist(&x[..2], &xp[..2]);
    ensure!(
        (sep - 2.0 * C1_RADIUS).abs() <= SEPARATION_REL * 2.0 * C1_RADIUS,
        "separation {sep:e}"
    );
    ensure!(
        (dist(&x, &xp) - 2.0 * C1_RADIUS).abs() <= SEPARATION_REL * 2.0 * C1_RADIUS,
        "pair distance {:e}",
        dist(&x, &xp)
    );
    ensure!(
        defect <= C1_DEFECT && recomputed <= C1_DEFECT,
        "defect {defect:e}, recomputed {recomputed:e}"
    );
    ensure!(inv.seconds < C1_SECONDS, "took {:.3} s", inv.seconds);
    Ok(format!(
        "separation {sep:e}, defect {defect:e}, {:.3} s",
        inv.seconds
    ))
}

fn criterion_2(cli: &mut Cli) -> Verdict {
    let (a, b) = ([0.0, 0.0], [4.0, 0.0]);
    let map = cli.write("urysohn.json", &urysohn_doc(a, b));
    let inv = cli.run(
        "c2.json",
        &[
            &"witness",
            &"--map",
            &map,
            &"--M",
            &C2_RADIUS.to_string(),
            &"--tol",
            &"1e-12",
        ],
    );
    ensure!(inv.code == 0, "exit code {}", inv.code);
    let r = &inv.report()["result"];
    ensure!(r["method"] == "bisection", "method {}", r["method"]);
    let defect = r["defect"].as_f64().unwrap();
    let iterations = r["iterations"].as_u64().unwrap();
    let (x, xp) = (coords(&r["x"]), coords(&r["x_prime"]));
    let recomputed = (urysohn_value(&a, &b, &x) - urysohn_value(&a, &b, &xp)).abs();
    ensure!(defect <= C2_DEFECT, "defect {defect:e}");
    ensure!(
        recomputed <= C2_DEFECT,
        "re-evaluated defect {recomputed:e}"
    );
    ensure!(iterations <= C2_ITERATIONS, "{iterations} iterations");
    ensure!(
        (dist(&x, &xp) - 2.0 * C2_RADIUS).abs() <= SEPARATION_REL * 2.0 * C2_RADIUS,
        "pair distance {:e}",
        dist(&x, &xp)
    );

    // the symmetric instance is solved on the scan grid; an oblique one
    // exercises the bisection itself
    let (a2, b2) = ([0.0, 0.0], [4.0, 1.5]);
    let oblique = cli.write("urysohn_oblique.json", &urysohn_doc(a2, b2));
    let inv = cli.run(
        "c2_oblique.json",
        &[
            &"witness",
            &"--map",
            &oblique,
            &"--M",
            &C2_RADIUS.to_string(),
            &"--tol",
            &"1e-12",
        ],
    );
    ensure!(inv.code == 0, "oblique: exit code {}", inv.code);
    let r = &inv.report()["result"];
    let oblique_iterations = r["iterations"].as_u64().unwrap();
    let (x, xp) = (coords(&r["x"]), coords(&r["x_prime"]));
    let oblique_defect = (urysohn_value(&a2, &b2, &x) - urysohn_value(&a2, &b2, &xp)).abs();
    ensure!(
        oblique_defect <= C2_DEFECT,
        "oblique: re-evaluated defect {oblique_defect:e}"
    );
    ensure!(
        oblique_iterations <= C2_ITERATIONS,
        "oblique: {oblique_iterations} iterations"
    );
    Ok(format!(
        "defect {defect:e}, re-evaluated {recomputed:e}, {iterations} iterations; oblique b: {oblique_defect:e} in {oblique_iterations} iterations"
    ))
}

fn criterion_3(cli: &mut Cli) -> Verdict {
    let map = cli.path("urysohn.json");
    let inv = cli.run(
        "c3.json",
        &[
            &"fiber",
            &"--map",
            &map,
            &"--level",
            &"0.8",
            &"--delta",
            &C3_DELTA.to_string(),
            &"--box",
            &"-2:12,-6:6",
            &"--n",
            &"1000",
        ],
    );
    ensure!(inv.code == 0, "exit code {}", inv.code);
    let r = &inv.report()["result"];
    let points: Vec<Vec<f64>> = r["fiber"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(coords)
        .collect();
    ensure!(
        points.len() >= C3_SAMPLES,
        "only {} refined samples",
        points.len()
    );
    let points = &points[..C3_SAMPLES];
    let (center, radius) = ([16.0 / 3.0, 0.0], 8.0 / 3.0);
    let worst = points
        .iter()
        .map(|p| (dist(p, &center) - radius).abs())
        .fold(0.0, f64::max);
    ensure!(worst <= C3_CIRCLE_TOL, "sample {worst:e} off the circle");
    let residual = points
        .iter()
        .map(|p| (urysohn_value(&[0.0, 0.0], &[4.0, 0.0], p) - 0.8).abs())
        .fold(0.0, f64::max);
    ensure!(residual <= C3_DELTA, "residual {residual:e}");
    let mut diameter: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            diameter = diameter.max(dist(p, q));
        }
    }
    let reported = r["diameter_lower_bound"].as_f64().unwrap();
    ensure!(
        (diameter - 2.0 * radius).abs() <= C3_DIAMETER_TOL,
        "diameter bound {diameter}"
    );
    ensure!(
        (reported - 2.0 * radius).abs() <= C3_DIAMETER_TOL,
        "reported bound {reported}"
    );
    Ok(format!(
        "max circle distance {worst:e}, diameter bound {diameter:.9}"
    ))
}

fn criterion_4(cli: &mut Cli) -> Verdict {
    let config = cli.write(
        "quadrant.json",
        r#"{"n":2,"m":1,"eps":1.0,"scheme":"quadrant"}"#,
    );
    let input = cli.write("c4_points.csv", "0.5,0.5\n1.2,-0.7\n-0.3,2.9\n");
    let inv = cli.run(
        "c4.jsonl",
        &[
            &"quantize",
            &"--map-config",
            &config,
            &"--in",
            &input,
            &"--rational",
        ],
    );
    ensure!(inv.code == 0, "quantize exit code {}", inv.code);
    let text = String::from_utf8(inv.output.clone()).unwrap();
    let values: Vec<String> = text
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["value"][0]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    ensure!(values == ["1", "1/143", "1/245"], "CLI values {values:?}");

    let codec = CodecConfig::quadrant();
    let expected = [(0.5, 0.5, 1), (1.2, -0.7, 143), (-0.3, 2.9, 245)];
    for (x, y, denom) in expected {
        let p = Point::new(vec![x, y]).unwrap();
        let code = encode(&codec, &p).unwrap();
        let exact = BigRational::new(BigInt::from(1), BigInt::from(denom));
        ensure!(
            code_to_rational(&code) == vec![exact],
            "f({x},{y}) is not 1/{denom}"
        );
        let back = decode(&codec, &code).unwrap();
        ensure!(
            cell_index(&codec, &back).unwrap() == cell_index(&codec, &p).unwrap(),
            "decode of f({x},{y}) left the cell"
        );
    }
    let decoded = cli.run(
        "c4_decoded.csv",
        &[
            &"dequantize",
            &"--map-config",
            &config,
            &"--in",
            &cli.path("c4.jsonl"),
        ],
    );
    ensure!(decoded.code == 0, "dequantize exit code {}", decoded.code);
    let centers = String::from_utf8(decoded.output).unwrap();
    ensure!(
        centers.lines().count() == 3,
        "dequantize wrote {} rows",
        centers.lines().count()
    );
    ensure!(
        fiber_diameter(&codec) == std::f64::consts::SQRT_2,
        "fiber diameter {}",
        fiber_diameter(&codec)
    );
    Ok("1, 1/143, 1/245 exact; fiber diameter √2".into())
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio: f64 = 0.0;
    for n in 2..=8 {
        for m in [1, n - 1] {
            let codec = CodecConfig::generic(n, m, C5_EPS).unwrap();
            let bound = 0.5 * C5_EPS * (n as f64).sqrt();
            for _ in 0..C5_POINTS {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
                let p = Point::new(x.clone()).unwrap();
                let back = decode(&codec, &encode(&codec, &p).unwrap()).unwrap();
                let err = dist(&x, back.coords());
                ensure!(err <= bound, "n={n}, m={m}: error {err} at {x:?}");
                worst_ratio = worst_ratio.max(err / bound);
            }
        }
    }

    let mut collisions = 0usize;
    for i in 0..C5_PAIRS {
        let n = 2 + i % 7;
        let m = 1 + (i / 7) % (n - 1);
        let codec = CodecConfig::generic(n, m, C5_EPS).unwrap();
        let first: Vec<i64> = (0..n).map(|_| rng.random_range(-40..=40)).collect();
        let mut second = first.clone();
        if i % 2 == 0 {
            // neighbouring cell
            let axis = rng.random_range(0..n);
            second[axis] += if rng.random_bool(0.5) { 1 } else { -1 };
        } else {
            while second == first {
                second = (0..n).map(|_| rng.random_range(-40..=40)).collect();
            }
        }
        let a = code_to_rational(&encode_cell(&codec, &CellIndex(first)));
        let b = code_to_rational(&encode_cell(&codec, &CellIndex(second)));
        if a == b {
            collisions += 1;
        }
    }
    ensure!(collisions == 0, "{collisions} code collisions");
    Ok(format!(
        "worst error {worst_ratio:.6} of the bound, 0 collisions in {C5_PAIRS} pairs"
    ))
}

fn criterion_6() -> Verdict {
    // quadrant primes (x, y) for ++, −+, +−, −−
    let quadrants = [
        (2.0, 3.0, false, false),
        (5.0, 7.0, true, false),
        (11.0, 13.0, false, true),
        (17.0, 19.0, true, true),
    ];
    let mut sum = 0.0f64;
    for (px, py, neg_x, neg_y) in quadrants {
        let (i0, j0) = (neg_x as i32, neg_y as i32);
        for i in i0..=C6_CUTOFF {
            for j in j0..=C6_CUTOFF {
                sum += f64::powi(px, -i) * f64::powi(py, -j);
            }
        }
    }
    let target = 4877.0 / 1440.0;
    ensure!(
        (sum - target).abs() <= C6_TOL,
        "truncated sum {sum} vs {target}"
    );
    let codec = CodecConfig::quadrant();
    let closed = l1_norm_closed_form(&codec).unwrap();
    ensure!(
        closed == BigRational::new(4877.into(), 1440.into()),
        "closed form {closed}"
    );
    let linf = linf_norm(&codec);
    ensure!(linf == BigRational::from_integer(1.into()), "L∞ {linf}");
    Ok(format!(
        "truncated sum off by {:e}; L¹ = {closed}, L∞ = {linf}",
        (sum - target).abs()
    ))
}

fn criterion_7(cli: &mut Cli) -> Verdict {
    let (a, b) = ([0.0, 0.0], [4.0, 0.0]);
    let map = cli.path("urysohn.json");
    let triples = [
        vec![vec![0.5, 0.3], vec![2.0, 7.0], vec![3.6, -0.2]],
        vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]],
        vec![vec![0.2, 0.0], vec![1.5, 0.5], vec![3.9, 0.1]],
    ];
    let mut worst_gap: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (k, pts) in triples.iter().enumerate() {
        let input = cli.write(&format!("c7_points_{k}.csv"), &csv(pts));
        let inv = cli.run(
            &format!("c7_{k}.json"),
            &[&"lemma", &"--map", &map, &"--points", &input, &"--M", &"1"],
        );
        ensure!(inv.code == 0, "triple {k}: exit code {}", inv.code);
        let r = &inv.report()["result"];
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&i, &j| {
            urysohn_value(&a, &b, &pts[i]).total_cmp(&urysohn_value(&a, &b, &pts[j]))
        });
        let middle = &pts[order[1]];
        let x = coords(&r["x"]);
        let gap = (urysohn_value(&a, &b, &x) - urysohn_value(&a, &b, middle)).abs();
        let d = dist(&x, middle);
        ensure!(
            coords(&r["partner"]) == *middle,
            "triple {k}: partner is not the middle value"
        );
        ensure!(gap <= C7_TOL, "triple {k}: gap {gap:e}");
        ensure!(d >= 1.0 - C7_TOL, "triple {k}: distance {d}");
        ensure!(
            inv.seconds < C7_SECONDS,
            "triple {k}: took {:.3} s",
            inv.seconds
        );
        worst_gap = worst_gap.max(gap);
        slowest = slowest.max(inv.seconds);
    }
    Ok(format!("max gap {worst_gap:e}, slowest {slowest:.3} s"))
}

/// A point on the level set `d(x,p)/d(x,q) = k` (k < 1) around `p`.
fn apollonius_point(p: [f64; 2], q: [f64; 2], k: f64, angle: f64) -> (Vec<f64>, f64) {
    let d = dist(&p, &q);
    let k2 = k * k;
    let center = [
        (p[0] - k2 * q[0]) / (1.0 - k2),
        (p[1] - k2 * q[1]) / (1.0 - k2),
    ];
    let r = k * d / (1.0 - k2);
    (
        vec![center[0] + r * angle.cos(), center[1] + r * angle.sin()],
        r,
    )
}

fn criterion_8(cli: &mut Cli) -> Verdict {
    for seed in 0..C8_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let a = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let d = rng.random_range(2.0..10.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let b = [a[0] + d * phi.cos(), a[1] + d * phi.sin()];
        let m = d / 4.0;
        let candidates: Vec<Vec<f64>> = (0..C8_CANDIDATES)
            .map(|_| {
                let k = rng.random_range(0.005..0.09);
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let (x, r) = if rng.random_bool(0.5) {
                    apollonius_point(a, b, k, angle)
                } else {
                    apollonius_point(b, a, k, angle)
                };
                assert!(2.0 * r < m);
                x
            })
            .collect();
        let lo = [a[0].min(b[0]) - d / 2.0, a[1].min(b[1]) - d / 2.0];
        let hi = [a[0].max(b[0]) + d / 2.0, a[1].max(b[1]) + d / 2.0];
        let verify = format!("{:?}:{:?},{:?}:{:?}", lo[0], hi[0], lo[1], hi[1]);
        let map = cli.write(&format!("c8_map_{seed}.json"), &urysohn_doc(a, b));
        let input = cli.write(&format!("c8_candidates_{seed}.csv"), &csv(&candidates));
        let inv = cli.run(
            &format!("c8_{seed}.json"),
            &[
                &"probe-union",
                &"--map",
                &map,
                &"--candidates",
                &input,
                &"--M",
                &format!("{m:?}"),
                &"--verify-box",
                &verify,
                &"--n",
                &"16",
                &"--seed",
                &seed.to_string(),
            ],
        );
        ensure!(inv.code == 0, "seed {seed}: exit code {}", inv.code);
        let r = &inv.report()["result"];
        ensure!(
            r["probe"]["outcome"] == "anchored",
            "seed {seed}: outcome {}",
            r["probe"]["outcome"]
        );
        ensure!(
            r["accepted"].as_u64() == Some(C8_CANDIDATES as u64),
            "seed {seed}: accepted {}",
            r["accepted"]
        );
    }

    let tube = MapDescriptor::AxisTube { n: 3, m: 2 };
    let m = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut accepted = [0usize; 2];
    let mut widest: f64 = 0.0;
    for (side, x1) in [C8_TUBE_X1, -C8_TUBE_X1].into_iter().enumerate() {
        for i in 0..C8_CANDIDATES {
            let r = rng.random_range(0.0..2.0 * m);
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let x = Point::new(vec![x1, r * angle.cos(), r * angle.sin()]).unwrap();
            let level = Point::new(vec![x1, r]).unwrap();
            let sampling = FiberSampling {
                bounds: BoxBounds::new(
                    vec![x1 - m, -2.5 * m, -2.5 * m],
                    vec![x1 + m, 2.5 * m, 2.5 * m],
                )
                .unwrap(),
                samples: 256,
                refine_steps: 50,
                seed: i as u64,
            };
            let mut fiber = sample_approx_fiber(&tube, &level, 1e-6, &sampling).unwrap();
            fiber.points.insert(0, x.clone());
            if let FiberClass::PossiblySmall { .. } = classify_small(&fiber, m).unwrap() {
                let axis = dist(&x.coords()[1..], &[0.0, 0.0]);
                ensure!(
                    axis < m / 2.0,
                    "verified candidate at distance {axis} from the axis"
                );
                accepted[side] += 1;
                widest = widest.max(axis);
            }
        }
    }
    ensure!(
        accepted[0] > 0 && accepted[1] > 0,
        "no verified tube candidates on one side"
    );
    Ok(format!(
        "{C8_SEEDS} seeds anchored; tube candidates {}+{} all within {widest:.4} < M/2 of the axis, 2e6 apart",
        accepted[0], accepted[1]
    ))
}

fn perturbed_value(w: &[f64], phi: &[f64], x: &[f64]) -> [f64; 2] {
    let mut y = [x[0], x[1]];
    for i in 0..2 {
        let arg: f64 = (0..3).map(|j| w[3 * i + j] * x[j]).sum();
        y[i] += 0.1 * (arg + phi[i]).sin();
    }
    y
}

fn criterion_9(cli: &mut Cli) -> Verdict {
    let mut converged = 0u64;
    let mut worst_defect: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for k in 0..C9_MAPS {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
        let w: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
        let phi: Vec<f64> = (0..2)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        let doc = format!(
            r#"{{"variant":"perturbed","n":3,"m":2,"matrix":[1,0,0,0,1,0],"amplitude":0.1,"frequencies":{w:?},"phases":{phi:?}}}"#
        );
        let map = cli.write(&format!("c9_map_{k}.json"), &doc);
        let inv = cli.run(
            &format!("c9_{k}.json"),
            &[
                &"cube-witness",
                &"--map",
                &map,
                &"--starts",
                &C9_STARTS.to_string(),
                &"--seed",
                &k.to_string(),
            ],
        );
        ensure!(
            inv.code == 0 || inv.code == 2,
            "map {k}: exit code {}",
            inv.code
        );
        ensure!(
            inv.seconds < C9_SECONDS,
            "map {k}: took {:.3} s",
            inv.seconds
        );
        slowest = slowest.max(inv.seconds);
        let r = &inv.report()["result"];
        let (x, xp) = (coords(&r["x"]), coords(&r["x_prime"]));
        let (fx, fxp) = (
            perturbed_value(&w, &phi, &x),
            perturbed_value(&w, &phi, &xp),
        );
        let defect = dist(&fx, &fxp);
        let sep = r["separation"].as_f64().unwrap();
        ensure!(
            (sep - 1.0).abs() <= SEPARATION_REL,
            "map {k}: separation {sep}"
        );
        ensure!(
            x.iter().chain(&xp).all(|c| (0.0..=1.0).contains(c)),
            "map {k}: pair leaves the cube"
        );
        if r["converged"] == true && defect <= C9_DEFECT {
            converged += 1;
            worst_defect = worst_defect.max(defect);
        }
    }
    let rate = converged as f64 / C9_MAPS as f64;
    ensure!(rate >= C9_RATE, "convergence rate {rate}");
    Ok(format!(
        "{converged}/{C9_MAPS} converged, worst defect {worst_defect:e}, slowest {slowest:.3} s"
    ))
}

fn criterion_10(cli: &Cli, library: &[(usize, Verdict)]) -> Verdict {
    let mut differing = Vec::new();
    for run in &cli.runs {
        let rerun = Cli::exec(&run.args, &run.out, "1");
        if rerun.output != run.output || run.output.is_empty() {
            differing.push(run.out.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    ensure!(
        differing.is_empty(),
        "reports differ on rerun: {differing:?}"
    );
    for (id, first) in library {
        let again = match id {
            5 => criterion_5(),
            _ => criterion_6(),
        };
        ensure!(&again == first, "criterion {id} summary differs on rerun");
    }
    Ok(format!(
        "{} reports byte-identical across reruns (4 and 1 threads)",
        cli.runs.len()
    ))
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() {
    let mut cli = Cli::new();
    let c5 = guarded(criterion_5);
    let c6 = guarded(criterion_6);
    let mut verdicts: Vec<(usize, &str, Verdict)> = vec![
        (
            1,
            "projection witness at M = 1e6",
            guarded(|| criterion_1(&mut cli)),
        ),
        (
            2,
            "bisection collision on the two-point map",
            guarded(|| criterion_2(&mut cli)),
        ),
        (
            3,
            "sampled fiber matches the Apollonius circle",
            guarded(|| criterion_3(&mut cli)),
        ),
        (
            4,
            "quadrant codec exact values",
            guarded(|| criterion_4(&mut cli)),
        ),
        (5, "codec round trip and injectivity", c5.clone()),
        (6, "L¹ and L∞ norms of the codec", c6.clone()),
        (
            7,
            "level-crossing lemma witness",
            guarded(|| criterion_7(&mut cli)),
        ),
        (
            8,
            "union probe and axis tube",
            guarded(|| criterion_8(&mut cli)),
        ),
        (
            9,
            "cube witness on perturbed projections",
            guarded(|| criterion_9(&mut cli)),
        ),
    ];
    let library = [(5, c5), (6, c6)];
    verdicts.push((
        10,
        "byte-identical reruns",
        guarded(|| criterion_10(&cli, &library)),
    ));

    let mut failed = 0;
    for (id, title, verdict) in &verdicts {
        match verdict {
            Ok(detail) => println!("PASS criterion {id:>2}: {title} ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:>2}: {title} ({detail})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
