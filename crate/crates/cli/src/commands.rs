use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use curvecross::chain::{verify_chain, ChainOptions, ChainStep};
use curvecross::curve::CurveFile;
use curvecross::exact::{asymptote_ratio, mean_intersections_exact, sobolev_limit_report};
use curvecross::intersection::{count_intersections, count_with_oracle, BruteForceCount};
use curvecross::montecarlo::{count_samples, summarize};
use curvecross::sampling::sample_unit_ball_curve;
use curvecross::{
    CountingConfig, Error, Execution, ExperimentConfig, MeanValue, SeedSpec, SobolevOrder,
};
use serde::Serialize;
use serde_json::Value;

use crate::manifest::{Degrees, ManifestBuilder, RunManifest, TOOL_VERSION};
use crate::{
    CountArgs, CountingArgs, ExactArgs, Failure, Format, ReportFormat, SampleArgs, SimulateArgs,
    VerifyArgs,
};

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_error(path: &Path, e: impl ToString) -> Failure {
    Failure::Io(format!("{}: {}", path.display(), e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize to JSON");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `text` to `out` (or stdout) and, for files that cannot embed it,
/// the manifest next to them.
fn emit(out: Option<&Path>, text: &str, detached: Option<&RunManifest>) -> Outcome {
    match out {
        Some(path) => {
            write_file(path, text)?;
            if let Some(m) = detached {
                write_file(&sidecar(path), &to_json(m))?;
            }
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn counting_config(
    degree: usize,
    r: SobolevOrder,
    args: &CountingArgs,
) -> Result<CountingConfig, Failure> {
    let mut cfg = CountingConfig::for_degree(degree, r);
    if let Some(s) = args.seg_target {
        cfg.seg_target = s;
    }
    if let Some(t) = args.newton_tol {
        cfg.newton_tol = t;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// exact

#[derive(Serialize)]
struct ExactOutput {
    #[serde(rename = "N")]
    n: u64,
    r: u32,
    #[serde(flatten)]
    mean: MeanValue,
    asymptote_ratio: Option<f64>,
    manifest: RunManifest,
}

const CSV_HEADER: &str = "N,numerator,denominator,approx,asymptote_ratio\n";

fn csv_row(n: u64, r: u32) -> String {
    let m = mean_intersections_exact(n, SobolevOrder(r));
    let ratio = if r == 0 && n >= 1 {
        asymptote_ratio(n)
            .map(|v| v.to_string())
            .unwrap_or_default()
    } else {
        String::new()
    };
    format!(
        "{n},{},{},{},{ratio}\n",
        m.exact.numerator(),
        m.exact.denominator(),
        m.approx
    )
}

pub fn exact(args: ExactArgs) -> Outcome {
    let out = args.out.as_deref();
    if let Some(list) = &args.limit {
        let report = sobolev_limit_report(SobolevOrder(args.r), list).map_err(usage)?;
        let degrees = Degrees::Range {
            from: list.first().copied().unwrap_or(0) as usize,
            to: list.last().copied().unwrap_or(0) as usize,
        };
        let manifest = ManifestBuilder::new("exact", degrees)
            .r(args.r)
            .config(&serde_json::json!({"r": args.r, "limit": list}))
            .finish();
        let mut value = serde_json::to_value(&report).expect("report serializes");
        value["manifest"] = serde_json::to_value(&manifest).expect("manifest serializes");
        return emit(out, &to_json(&value), None);
    }
    if let Some(range) = args.sweep {
        if args.format == Some(Format::Json) {
            return Err(usage("--sweep writes CSV only"));
        }
        let manifest = ManifestBuilder::new(
            "exact",
            Degrees::Range {
                from: range.from,
                to: range.to,
            },
        )
        .r(args.r)
        .config(&serde_json::json!({"r": args.r, "sweep": [range.from, range.to]}))
        .finish();
        let mut text = String::from(CSV_HEADER);
        for n in range.from..=range.to {
            text.push_str(&csv_row(n as u64, args.r));
        }
        return emit(out, &text, Some(&manifest));
    }
    let Some(n) = args.n else {
        return Err(usage("one of --N, --sweep or --limit is required"));
    };
    let manifest = ManifestBuilder::new("exact", Degrees::Single(n as usize))
        .r(args.r)
        .config(&serde_json::json!({"N": n, "r": args.r}))
        .finish();
    match args.format.unwrap_or(Format::Json) {
        Format::Csv => emit(
            out,
            &format!("{CSV_HEADER}{}", csv_row(n, args.r)),
            Some(&manifest),
        ),
        Format::Json => {
            let output = ExactOutput {
                n,
                r: args.r,
                mean: mean_intersections_exact(n, SobolevOrder(args.r)),
                asymptote_ratio: if args.r == 0 && n >= 1 {
                    asymptote_ratio(n).ok()
                } else {
                    None
                },
                manifest,
            };
            emit(out, &to_json(&output), None)
        }
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct SimulateSummary<'a> {
    mean: f64,
    variance: f64,
    stderr: f64,
    ci95: (f64, f64),
    exact: &'a MeanValue,
    z_score: f64,
    histogram: &'a BTreeMap<usize, u64>,
    samples_used: u64,
    degenerate_discards: u64,
    discard_rate: f64,
    warning: bool,
    manifest: RunManifest,
}

pub fn simulate(args: SimulateArgs) -> Outcome {
    let r = SobolevOrder(args.r);
    let mut cfg = ExperimentConfig::new(args.n, r, args.samples, args.seed)
        .with_workers(args.workers)
        .with_distribution(args.distribution);
    cfg.counting = counting_config(args.n, r, &args.counting)?;
    cfg.validate().map_err(usage)?;

    let mut config = serde_json::to_value(&cfg).expect("config serializes");
    if let Value::Object(map) = &mut config {
        map.remove("worker_count");
    }
    let builder = ManifestBuilder::new("simulate", Degrees::Single(args.n))
        .r(args.r)
        .seed(args.seed)
        .samples(args.samples)
        .workers(args.workers)
        .config(&config);

    let records = count_samples(&cfg).map_err(usage)?;
    let res = summarize(&cfg, &records);
    let manifest = builder.finish();

    if let Some(path) = &args.samples_csv {
        let mut text = String::from("sample_index,count,degenerate\n");
        for rec in &records {
            let _ = writeln!(
                text,
                "{},{},{}",
                rec.sample_index, rec.count, rec.degenerate
            );
        }
        emit(Some(path), &text, Some(&manifest))?;
    }
    let summary = SimulateSummary {
        mean: res.mean,
        variance: res.variance,
        stderr: res.stderr,
        ci95: res.ci95,
        exact: &res.exact,
        z_score: res.z_score_vs_exact,
        histogram: &res.histogram,
        samples_used: res.samples_used,
        degenerate_discards: res.degenerate_discards,
        discard_rate: res.discard_rate,
        warning: res.warning,
        manifest,
    };
    emit(args.out.as_deref(), &to_json(&summary), None)?;
    if res.warning {
        return Err(Failure::Tolerance(format!(
            "discard rate {:.4} exceeds {}",
            res.discard_rate,
            curvecross::montecarlo::MAX_DISCARD_RATE
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct VerifyOutput<'a> {
    steps: &'a [ChainStep],
    all_passed: bool,
    manifest: RunManifest,
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let degrees: Vec<usize> = (args.n.from..=args.n.to).collect();
    let opts = ChainOptions {
        fiber_attempts: (args.fiber_attempts > 0).then_some(args.fiber_attempts),
        seed: SeedSpec::new(args.seed, 0),
        exec: Execution::Sequential,
    };
    let builder = ManifestBuilder::new(
        "verify",
        Degrees::Range {
            from: args.n.from,
            to: args.n.to,
        },
    )
    .seed(args.seed)
    .samples(args.fiber_attempts)
    .config(&serde_json::json!({
        "N": [args.n.from, args.n.to],
        "fiber_attempts": args.fiber_attempts,
        "seed": args.seed,
    }));
    let report = verify_chain(&degrees, &opts).map_err(|e| match e {
        Error::Precondition(_) => usage(e),
        other => Failure::Tolerance(other.to_string()),
    })?;
    let output = VerifyOutput {
        steps: &report.steps,
        all_passed: report.all_passed(),
        manifest: builder.finish(),
    };
    match args.format {
        ReportFormat::Table => print!("{}", report.to_table()),
        ReportFormat::Json => print!("{}", to_json(&output)),
    }
    if let Some(path) = &args.out {
        write_file(path, &to_json(&output))?;
    }
    if !report.all_passed() {
        let failed = report.steps.iter().filter(|s| !s.passed).count();
        return Err(Failure::Tolerance(format!(
            "{failed} step(s) out of tolerance"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// count

#[derive(Serialize)]
struct CountOutput {
    count: usize,
    degenerate: bool,
    solutions: Vec<[f64; 2]>,
    /// `null` when there are no roots.
    min_abs_det: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<BruteForceCount>,
    manifest: RunManifest,
}

fn read_curve(path: &Path) -> Result<CurveFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file = CurveFile::from_json(&text).map_err(|e| io_error(path, e))?;
    file.curve().map_err(|e| io_error(path, e))?;
    Ok(file)
}

pub fn count(args: CountArgs) -> Outcome {
    let (ff, gf) = (read_curve(&args.f)?, read_curve(&args.g)?);
    if ff.degree != gf.degree {
        return Err(Failure::Io(format!(
            "degree mismatch: {} has N={}, {} has N={}",
            args.f.display(),
            ff.degree,
            args.g.display(),
            gf.degree
        )));
    }
    let (f, g) = (ff.curve().map_err(usage)?, gf.curve().map_err(usage)?);
    let cfg = counting_config(ff.degree, ff.r, &args.counting)?;
    let builder = ManifestBuilder::new("count", Degrees::Single(ff.degree))
        .r(ff.r.0)
        .config(&serde_json::json!({
            "f": args.f.display().to_string(),
            "g": args.g.display().to_string(),
            "counting": cfg,
            "oracle": args.oracle,
        }));
    let (res, oracle) = match args.oracle {
        Some(m) => {
            let (res, oracle) = count_with_oracle(&f, &g, &cfg, m).map_err(usage)?;
            (res, Some(oracle))
        }
        None => (count_intersections(&f, &g, &cfg).map_err(usage)?, None),
    };
    let output = CountOutput {
        count: res.count,
        degenerate: res.degenerate,
        solutions: res.solutions.iter().map(|&(a, b)| [a, b]).collect(),
        min_abs_det: res.min_abs_det.is_finite().then_some(res.min_abs_det),
        oracle,
        manifest: builder.finish(),
    };
    emit(args.out.as_deref(), &to_json(&output), None)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Serialize)]
struct CurveManifest {
    master_seed: u64,
    stream_index: u64,
    #[serde(rename = "N")]
    n: usize,
    r: u32,
    tool_version: &'static str,
}

pub fn sample(args: SampleArgs) -> Outcome {
    let dir = &args.out;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let r = SobolevOrder(args.r);
    let builder = ManifestBuilder::new("sample", Degrees::Single(args.n))
        .r(args.r)
        .seed(args.seed)
        .samples(args.count)
        .config(
            &serde_json::json!({"N": args.n, "r": args.r, "count": args.count, "seed": args.seed}),
        );
    for i in 0..args.count {
        let curve = sample_unit_ball_curve(args.n, r, SeedSpec::new(args.seed, i));
        let path = dir.join(format!("curve_{i:04}.json"));
        let text = CurveFile::new(&curve, r)
            .to_json()
            .map_err(|e| io_error(&path, e))?;
        write_file(&path, &format!("{text}\n"))?;
        let meta = CurveManifest {
            master_seed: args.seed,
            stream_index: i,
            n: args.n,
            r: args.r,
            tool_version: TOOL_VERSION,
        };
        write_file(&sidecar(&path), &to_json(&meta))?;
        println!("{}", path.display());
    }
    write_file(&dir.join("manifest.json"), &to_json(&builder.finish()))
}
