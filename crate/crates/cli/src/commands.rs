use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use clap::CommandFactory;
use pcd_core::distribution::{p_r, QuadratureConfig};
use pcd_core::geometry::EQUILATERAL;
use pcd_core::inference::run_test;
use pcd_core::io::{read_points, write_points};
use pcd_core::simulation::layout::frozen_y10;
use pcd_core::simulation::rng::replicate_rng;
use pcd_core::simulation::{
    gamma_frequency_experiment, gbar_histogram, pi_out_experiment, sample_alternative, size_power_experiment,
    SimConfig,
};
use pcd_core::{delaunay_triangulate, CenterSpec, Expansion, PcdError, PcdParams, Point2, Result};
use serde::Serialize;

use crate::cli::{
    Cli, GenerateArgs, LayoutArg, PrCurveArgs, SimulateArgs, TestArgs, TriangulateArgs,
};
use crate::config::{config_hash, PatternFile, ResolvedPattern, SimFile, TestPlan};

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| PcdError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PcdError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> PcdError {
    PcdError::Io(e.to_string())
}

pub fn test(args: &TestArgs) -> Result<()> {
    let plan = TestPlan::resolve(args)?;
    let x = read_points(&plan.x)?;
    let y = read_points(&plan.y)?;
    let res = run_test(&x, &y, &plan.config)?;
    for w in &res.warnings {
        log::warn!("{w}");
    }
    write_json(args.out.as_deref(), &res)
}

/// Comment header shared by all `simulate` outputs.
fn sim_header(file: &SimFile, pattern: &ResolvedPattern, extra: &[(String, String)]) -> String {
    let mut lines = vec![
        format!("# seed={}", file.seed),
        format!("# config_hash={}", config_hash(file)),
    ];
    lines.extend(pattern.metadata().into_iter().map(|(k, v)| format!("# {k}={v}")));
    lines.extend(extra.iter().map(|(k, v)| format!("# {k}={v}")));
    lines.join("\n") + "\n"
}

fn write_csv<F>(path: &Path, header: &str, fill: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = header.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w).map_err(csv_err)?;
        w.flush()?;
    }
    fs::write(path, buf).map_err(|e| PcdError::Io(format!("{}: {e}", path.display())))
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let file = SimFile::resolve(args)?;
    let pattern = file.pattern.resolve()?;
    fs::create_dir_all(&args.out).map_err(|e| PcdError::Io(format!("{}: {e}", args.out.display())))?;
    let center_r = Expansion::new(file.center_r.unwrap_or(1.5))?;
    let fixed_center = |default: CenterSpec| -> Result<CenterSpec> {
        match file.center.as_deref() {
            Some(s) if !s.eq_ignore_ascii_case("auto") => s.parse(),
            _ => Ok(default),
        }
    };
    let base = |n: usize, params: PcdParams| SimConfig {
        y_source: file.y_source.clone(),
        n,
        alternative: pattern.spec,
        params,
        n_mc: file.n_mc,
        seed: file.seed,
    };

    if let Some(spec) = &file.frequency {
        let params = PcdParams {
            r: center_r,
            center: fixed_center(CenterSpec::CenterOfMass)?,
        };
        let table = gamma_frequency_experiment(&base(0, params), &spec.n, &spec.r)?;
        if table.monotonicity_violations > 0 {
            log::warn!("{} replicates had γ increase with r", table.monotonicity_violations);
        }
        let header = sim_header(
            &file,
            &pattern,
            &[("monotonicity_violations".into(), table.monotonicity_violations.to_string())],
        );
        write_csv(&args.out.join("freq_table.csv"), &header, |w| {
            w.write_record(["n", "r", "center", "gamma", "count", "fraction"])?;
            for row in &table.rows {
                for (k, c) in row.counts.iter().enumerate() {
                    w.write_record([
                        row.n.to_string(),
                        row.r.to_string(),
                        row.center.clone(),
                        k.to_string(),
                        c.to_string(),
                        row.fraction(k).to_string(),
                    ])?;
                }
            }
            Ok(())
        })?;
        log::info!("wrote freq_table.csv ({} cells)", table.rows.len());
    }

    if let Some(spec) = &file.size_power {
        let first = spec.r.first().copied().unwrap_or(1.5);
        let center = match file.center.as_deref() {
            Some(s) if !s.eq_ignore_ascii_case("auto") => s.parse()?,
            _ => CenterSpec::TauVertex(0),
        };
        let params = PcdParams::new(first, center)?;
        let rows = size_power_experiment(&base(spec.n, params), &spec.r, spec.alpha, &file.quadrature)?;
        let header = sim_header(&file, &pattern, &[("alpha".into(), spec.alpha.to_string())]);
        write_csv(&args.out.join("size_power.csv"), &header, |w| {
            w.write_record(["r", "pattern", "n", "n_mc", "statistic", "side", "rejections", "rate", "se", "class"])?;
            for row in &rows {
                w.write_record([
                    row.r.to_string(),
                    row.pattern.clone(),
                    row.n.to_string(),
                    row.n_mc.to_string(),
                    label(&row.statistic),
                    label(&row.side),
                    row.rejections.to_string(),
                    row.rate.to_string(),
                    row.se.to_string(),
                    row.class.map(|c| label(&c)).unwrap_or_default(),
                ])?;
            }
            Ok(())
        })?;
        log::info!("wrote size_power.csv ({} rows)", rows.len());
    }

    if let Some(spec) = &file.pi_out {
        let rows = pi_out_experiment(&spec.m, &spec.n, spec.n_mc.unwrap_or(file.n_mc), file.seed)?;
        let header = sim_header(&file, &pattern, &[]);
        write_csv(&args.out.join("pi_out.csv"), &header, |w| {
            w.write_record(["m", "n_values", "n_mc", "pi_out", "se", "fitted", "residual"])?;
            for row in &rows {
                let ns: Vec<String> = row.n_values.iter().map(usize::to_string).collect();
                w.write_record([
                    row.m.to_string(),
                    ns.join(";"),
                    row.n_mc.to_string(),
                    row.pi_out.to_string(),
                    row.se.to_string(),
                    row.fitted.to_string(),
                    row.residual.to_string(),
                ])?;
            }
            Ok(())
        })?;
        log::info!("wrote pi_out.csv ({} rows)", rows.len());
    }

    if let Some(spec) = &file.histogram {
        let center = match file.center.as_deref() {
            Some(s) if !s.eq_ignore_ascii_case("auto") => s.parse()?,
            _ => CenterSpec::CenterOfMass,
        };
        let rows = gbar_histogram(&base(spec.n, PcdParams { r: spec.r, center }))?;
        let header = sim_header(&file, &pattern, &[("r".into(), spec.r.to_string())]);
        write_csv(&args.out.join("hist_gbar.csv"), &header, |w| {
            w.write_record(["j_m", "gamma_total", "g_bar", "count"])?;
            for row in &rows {
                w.write_record([
                    row.j_m.to_string(),
                    row.gamma_total.to_string(),
                    row.g_bar.to_string(),
                    row.count.to_string(),
                ])?;
            }
            Ok(())
        })?;
        log::info!("wrote hist_gbar.csv ({} bins)", rows.len());
    }
    Ok(())
}

pub fn pr_curve(args: &PrCurveArgs) -> Result<()> {
    if !(args.step > 0.0) || !(args.to >= args.from) || !args.from.is_finite() || !args.to.is_finite() {
        return Err(PcdError::InvalidParameter(
            "need --step > 0 and --to ≥ --from".into(),
        ));
    }
    let mut quad = QuadratureConfig::default();
    if let Some(t) = args.rel_tol {
        quad.rel_tol = t;
    }
    quad.validate()?;
    let count = ((args.to - args.from) / args.step).round() as usize + 1;
    let mut w = csv::Writer::from_writer(open_out(args.out.as_deref())?);
    w.write_record(["r", "p_r", "abs_err"]).map_err(csv_err)?;
    for k in 0..count {
        let r = ((args.from + k as f64 * args.step) * 1e12).round() / 1e12;
        let est = p_r(r, &quad)?;
        w.write_record([r.to_string(), est.value.to_string(), est.abs_err.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let pattern = PatternFile {
        kind: args.pattern,
        epsilon: args.epsilon,
        delta: args.delta,
    }
    .resolve()?;
    let y: Vec<Point2> = match (&args.y, args.layout) {
        (Some(p), _) => read_points(p)?,
        (None, Some(LayoutArg::Equilateral)) => EQUILATERAL.vertices().to_vec(),
        (None, _) => frozen_y10(),
    };
    let tri = delaunay_triangulate(&y)?;
    let mut rng = replicate_rng(args.seed, 0, 0);
    let x = sample_alternative(&tri, args.n, &pattern.spec, &mut rng)?;
    let mut meta = vec![("seed".to_string(), args.seed.to_string())];
    meta.extend(pattern.metadata());
    meta.push(("n".into(), args.n.to_string()));
    meta.push(("m".into(), y.len().to_string()));
    write_points(open_out(args.out.as_deref())?, &x, &meta)
}

pub fn triangulate(args: &TriangulateArgs) -> Result<()> {
    let y = read_points(&args.y)?;
    let tri = delaunay_triangulate(&y)?;
    for w in tri.warnings() {
        log::warn!("{w}");
    }
    write_json(args.out.as_deref(), &tri.export())
}

pub fn docs() -> Result<()> {
    let mut cmd = Cli::command();
    let mut out = io::stdout().lock();
    writeln!(out, "# pcd\n\n{}", cmd.render_long_help())?;
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        if name == "help" {
            continue;
        }
        let sub = cmd.find_subcommand_mut(&name).expect("listed subcommand");
        writeln!(out, "## pcd {name}\n\n{}", sub.render_long_help())?;
    }
    Ok(())
}
