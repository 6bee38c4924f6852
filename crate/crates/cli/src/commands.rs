//! Subcommand implementations. Each returns `Ok(true)` when every checked
//! outcome passes and `Ok(false)` when one fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context as _, Result};
use pmalab::analysis::report::Table;
use pmalab::analysis::{
    c1alpha_exponent_at, default_separation_eps, flat_dichotomy_probe, geometric_range, holder_time_fit,
    interface_exponent, separation_probe, DichotomyOutcome,
};
use pmalab::config::RunConfig;
use pmalab::exact::{build_profile_with_samples, profile_residual};
use pmalab::experiments::{list_experiments, run_experiment};
use pmalab::geometry::{centered_section, flat_set, john_ellipsoid, legendre, slope_box, FlatSet};
use pmalab::grid::csv::{load_grid, save_grid};
use pmalab::grid::{build_domain, GridFunction, Shape};

use crate::{AffineArgs, AnalyzeCommand, Cli, Command, ExperimentCommand, GeometryCommand, PointArgs, SelfSimilarArgs};

pub fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve => solve(cli),
        Command::Selfsimilar(args) => selfsimilar(args, &cli.out),
        Command::Geometry(g) => geometry(g, &cli.out),
        Command::Analyze(a) => analyze(a, &cli.out),
        Command::Experiment(ExperimentCommand::List { filter }) => {
            for spec in list_experiments(filter.as_deref()) {
                println!("{:<22} [{}] {}", spec.name, spec.topics.join(", "), spec.description);
            }
            Ok(true)
        }
        Command::Experiment(ExperimentCommand::Run { name }) => {
            let report = run_experiment(name, cli.seed, Some(&cli.out))?;
            print!("{}", report.summary());
            Ok(report.passed())
        }
    }
}

fn solve(cli: &Cli) -> Result<bool> {
    let Some(path) = &cli.config else { bail!("solve needs --config") };
    let cfg = RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    let run = cfg.solve()?;
    let dir = cli.out.join("snapshots");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for (k, u) in run.snapshots.iter().enumerate() {
        save_grid(u, &dir.join(format!("u_{k:03}.csv")))?;
    }
    let summary = format!(
        "config: {}\nsnapshots: {}\nsteps: {}\nfinal time: {}\n",
        path.display(),
        run.snapshots.len(),
        run.steps,
        run.snapshots.last().map(|u| u.time()).unwrap_or(0.0)
    );
    fs::write(cli.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(true)
}

fn selfsimilar(args: &SelfSimilarArgs, out: &Path) -> Result<bool> {
    let prof = build_profile_with_samples(args.n, args.p, args.extinction, args.samples)?;
    let drift = prof.gstar().energy_drift();
    let res = profile_residual(&prof, 2.0, args.cells, 0.05, 0.3)?;
    fs::create_dir_all(out)?;
    let mut f = fs::File::create(out.join("profile.csv"))?;
    prof.write_csv(&mut f)?;
    let drift_ok = drift <= 1e-6;
    println!("n = {}, p = {}, beta = {}, C = {:.17e}, T = {}", prof.n(), prof.p(), prof.beta(), prof.c_np(), prof.extinction());
    println!("{} first-integral drift: {drift:.3e} (expected <= 1e-6)", verdict(drift_ok));
    println!(
        "info residual of the reduced equation: {:.3e} at spacing {} over {} nodes",
        res.max, res.spacing, res.checked
    );
    println!("wrote {}", out.join("profile.csv").display());
    Ok(drift_ok)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn load(path: &PathBuf) -> Result<GridFunction> {
    load_grid(path).with_context(|| format!("reading {}", path.display()))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<GridFunction>> {
    paths.iter().map(load).collect()
}

fn node_at(u: &GridFunction, x: &[f64]) -> Result<usize> {
    let d = u.domain();
    if x.len() != d.dim() {
        bail!("point has {} coordinates, grid is {}-dimensional", x.len(), d.dim());
    }
    d.nearest_node(x).filter(|&i| d.is_active(i)).with_context(|| format!("no active node near {x:?}"))
}

fn load_point(p: &PointArgs) -> Result<(GridFunction, usize)> {
    let u = load(&p.input)?;
    let i = node_at(&u, &p.at)?;
    Ok((u, i))
}

fn contact(u: &GridFunction, a: &AffineArgs) -> Result<(FlatSet, f64)> {
    let tol = a.tol.unwrap_or(u.domain().spacing().powi(2));
    Ok((flat_set(u, &a.slope, a.offset, tol)?, tol))
}

fn write_to(out: &Path, name: &str, body: impl FnOnce(&mut fs::File) -> pmalab::Result<()>) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    let mut f = fs::File::create(&path)?;
    body(&mut f)?;
    Ok(path)
}

fn geometry(cmd: &GeometryCommand, out: &Path) -> Result<bool> {
    match cmd {
        GeometryCommand::Section { point, height } => {
            let (u, i) = load_point(point)?;
            let s = centered_section(&u, i, *height)?;
            let path = write_to(out, "section.csv", |f| s.write_csv(&u, f))?;
            println!(
                "section: {} nodes, center {:?}, touches boundary {}",
                s.nodes.len(),
                s.center,
                s.touches_boundary
            );
            println!("wrote {}", path.display());
        }
        GeometryCommand::John { point, height } => {
            let (u, i) = load_point(point)?;
            let s = centered_section(&u, i, *height)?;
            let e = john_ellipsoid(&s.points(&u), &s.center)?;
            let path = write_to(out, "ellipsoid.csv", |f| e.write_csv(f))?;
            println!("ellipsoid: volume {:.6e}, center {:?}", e.volume(), e.center());
            println!("wrote {}", path.display());
        }
        GeometryCommand::Flat { input, affine } => {
            let u = load(input)?;
            let (flat, tol) = contact(&u, affine)?;
            let d = u.domain();
            let mut cols = vec!["node".to_string()];
            cols.extend((1..=d.dim()).map(|k| format!("x{k}")));
            cols.push("extremal".into());
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut t = Table::new("flat_set", &cols);
            for &i in &flat.nodes {
                let mut row = vec![i as f64];
                row.extend(d.coords(i));
                row.push(if flat.extremal.contains(&i) { 1.0 } else { 0.0 });
                t.push(row);
            }
            let path = t.emit(out, false)?;
            println!(
                "contact set (tol {tol:.3e}): {} nodes, {} extremal, diameter {:.6}, segment {}",
                flat.nodes.len(),
                flat.extremal.len(),
                flat.diameter,
                flat.contains_segment
            );
            println!("wrote {}", path.display());
        }
        GeometryCommand::Legendre { input, spacing } => {
            let u = load(input)?;
            let (lower, upper) = slope_box(&u);
            let dual = Arc::new(build_domain(Shape::Box { lower: lower.clone(), upper: upper.clone() }, *spacing, 1)?);
            let conj = legendre(&u, &dual)?;
            let path = out.join("legendre.csv");
            fs::create_dir_all(out)?;
            save_grid(&conj, &path)?;
            println!("slope box {lower:?} .. {upper:?}, {} dual nodes", dual.len());
            println!("wrote {}", path.display());
        }
    }
    Ok(true)
}

fn analyze(cmd: &AnalyzeCommand, out: &Path) -> Result<bool> {
    match cmd {
        AnalyzeCommand::Angle { point, dir, h_max, h_min, count } => {
            let (u, i) = load_point(point)?;
            let heights = geometric_range(*h_max, *h_min, *count);
            let est = c1alpha_exponent_at(&u, i, dir, &heights)?;
            let mut t = Table::new("angle", &["height", "opening"]);
            for (h, a) in est.heights.iter().zip(&est.openings) {
                t.push(vec![*h, *a]);
            }
            let path = t.emit(out, true)?;
            match (est.corner, est.alpha_hat) {
                (true, _) => println!("corner: openings stay bounded below, not C1 along this line"),
                (false, Some(a)) => println!("alpha estimate {a:.6}"),
                (false, None) => println!("no fit"),
            }
            println!("wrote {}", path.display());
        }
        AnalyzeCommand::Holder { snapshots, at } => {
            let snaps = load_all(snapshots)?;
            let i = node_at(&snaps[0], at)?;
            let fit = holder_time_fit(&snaps, i)?;
            let mut t = Table::new("holder", &["elapsed", "increment"]);
            for (x, y) in fit.x.iter().zip(&fit.y) {
                t.push(vec![*x, *y]);
            }
            let path = t.emit(out, true)?;
            println!("slope {:.6}, intercept {:.6}, rms residual {:.3e}", fit.slope, fit.intercept, fit.residual);
            println!("wrote {}", path.display());
        }
        AnalyzeCommand::Separation { snapshots, at, radius, eps } => {
            let snaps = load_all(snapshots)?;
            let d = Arc::clone(snaps[0].domain());
            let c = d.coords(node_at(&snaps[0], at)?);
            let region: Vec<usize> = d
                .active_nodes()
                .filter(|&i| d.coords(i).iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= radius + 1e-12)
                .collect();
            let eps = eps.unwrap_or(default_separation_eps(d.spacing(), 1.0));
            let rep = separation_probe(&snaps, &region, eps)?;
            let mut t = Table::new("separation", &["node", "kind", "time"]);
            for (i, cr) in rep.nodes.iter().zip(&rep.crossings) {
                let kind = match cr.as_str() {
                    "instant" => 0.0,
                    "delayed" => 1.0,
                    _ => 2.0,
                };
                t.push(vec![*i as f64, kind, cr.time().unwrap_or(f64::NAN)]);
            }
            let path = t.emit(out, false)?;
            println!(
                "eps {eps:.3e}: {} instant, {} delayed, {} persistent; max rise {:.3e}",
                rep.count("instant"),
                rep.count("delayed"),
                rep.count("persistent"),
                rep.max_rise
            );
            println!("wrote {}", path.display());
        }
        AnalyzeCommand::Interface { input, affine, d_max } => {
            let u = load(input)?;
            let (flat, _) = contact(&u, affine)?;
            let fit = interface_exponent(&u, &flat, &affine.slope, affine.offset, *d_max)?;
            let mut t = Table::new("interface", &["distance", "excess"]);
            for (x, y) in fit.fit.x.iter().zip(&fit.fit.y) {
                t.push(vec![*x, *y]);
            }
            let path = t.emit(out, true)?;
            println!("gamma estimate {:.6} from {} bins (slope {:.6})", fit.gamma, fit.bins, fit.fit.slope);
            println!("wrote {}", path.display());
        }
        AnalyzeCommand::Dichotomy { snapshots, affine, eps_flat } => {
            let snaps = load_all(snapshots)?;
            let last = &snaps[snaps.len() - 1];
            let h = last.domain().spacing();
            let tol = affine.tol.unwrap_or(h * h);
            let eps_flat = eps_flat.unwrap_or(default_separation_eps(h, 1.0));
            let rep = flat_dichotomy_probe(&snaps, &affine.slope, affine.offset, tol, eps_flat)?;
            println!("contact set: {} nodes, segment {}", rep.flat.nodes.len(), rep.flat.contains_segment);
            match &rep.outcome {
                DichotomyOutcome::CoincidesWithInitial { max_change } => {
                    println!("{} (max change {max_change:.3e})", rep.outcome.as_str())
                }
                DichotomyOutcome::ViolationCandidate { nodes, max_change } => {
                    println!("{} at nodes {nodes:?} (max change {max_change:.3e})", rep.outcome.as_str())
                }
                other => println!("{}", other.as_str()),
            }
        }
    }
    Ok(true)
}
