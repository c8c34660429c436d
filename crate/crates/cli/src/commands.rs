use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use seba_core::dynamics::{
    block_markov_demo, flow_map, graph_laplacian_demo, plus_blob_cloud, ulam_build, BickleyFlow, BoxGrid,
};
use seba_core::heuristics::{min_value_profile, scan, select_kr, weyl_rescale};
use seba_core::io::{fmt_f64, read_kv, read_matrix, read_vector, write_kv, write_matrix, write_text, write_vector};
use seba_core::linalg::{qr_orthonormalize, qr_orthonormalize_w, DenseMatrix, LeadingEigOptions, QrOptions, WeightVector};
use seba_core::seba::{seba, EigenBasis, OperatorKind, SebaConfig, BASIS_ORTHONORMAL_TOL};
use seba_core::thresholding::{
    cheeger_threshold, disjoint_support, manual, max_likelihood, partition_unity, per_column, superposition,
    CheegerResult, FeatureAssignment, GridField, ThresholdMethod,
};

use crate::config::Resolver;
use crate::svg::{self, Heatmap, Markers, Series};
use crate::{Cli, Command, Common, Demo, IterArgs};

pub enum Outcome {
    Done,
    NotConverged,
}

const DEFAULT_OUT: &str = "seba-out";

struct Ctx {
    out: PathBuf,
    res: Resolver,
}

impl Ctx {
    fn new(common: &Common, command: &str) -> Result<Self> {
        let out = common.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
        let mut res = Resolver::new(command);
        if let Some(cfg) = &common.config {
            res.push_file(cfg)?;
        }
        let manifest = out.join("manifest.kv");
        if manifest.is_file() && !command.starts_with("demo") {
            res.push_file(&manifest)?;
        }
        res.or("threads", common.threads, rayon::current_num_threads())?;
        Ok(Self { out, res })
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
        let default = self.out.join(default_name).display().to_string();
        let v = self.res.or(key, flag.map(|p| p.display().to_string()), default)?;
        Ok(PathBuf::from(v))
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finish(&self) -> Result<()> {
        self.res.write(&self.out)
    }
}

pub fn dispatch(cli: Cli) -> Result<Outcome> {
    let common = cli.common;
    match cli.command {
        Command::Run { input, weights, r, iter } => cmd_run(&common, input, weights, r, iter),
        Command::Eigengap { input, kind, d, r_max } => cmd_eigengap(&common, input, kind, d, r_max),
        Command::Scan { input, r_max, iter } => cmd_scan(&common, input, r_max, iter),
        Command::Threshold { input, method, levels } => cmd_threshold(&common, input, method, levels),
        Command::Cheeger {
            input,
            column,
            levels,
            refine,
        } => cmd_cheeger(&common, input, column, levels, refine),
        Command::Demo { which } => match which {
            Demo::Bickley {
                nx,
                ny,
                samples,
                t1,
                step,
                k,
            } => demo_bickley(&common, nx, ny, samples, t1, step, k),
            Demo::Graph { spacing, k } => demo_graph(&common, spacing, k),
            Demo::BlockMarkov { sizes, eps } => demo_block_markov(&common, sizes, eps),
        },
    }
}

fn seba_config(ctx: &mut Ctx, iter: &IterArgs) -> Result<SebaConfig> {
    let mu = ctx.res.opt("mu", iter.mu)?;
    let tol = ctx.res.or("tol", iter.tol, 1e-14)?;
    let max_iter = ctx.res.or("max_iter", iter.max_iter, 5000)?;
    Ok(SebaConfig::new(mu, tol, max_iter)?)
}

/// Headerless CSV, like every other table the tool writes.
fn write_table(path: &Path, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    Ok(write_text(path, &s)?)
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Orthonormalises `v` by QR when its columns are not orthonormal (in the
/// weighted inner product when weights are given).
fn ensure_orthonormal(v: DenseMatrix, nu: Option<&WeightVector>) -> Result<(DenseMatrix, bool)> {
    let err = match nu {
        None => v.orthonormality_error(),
        Some(nu) => {
            if nu.len() != v.rows() {
                return Err(seba_core::Error::WeightMismatch {
                    weights: nu.len(),
                    rows: v.rows(),
                }
                .into());
            }
            v.t_matmul(&v.scale_rows(nu.as_slice()))
                .max_abs_diff(&DenseMatrix::identity(v.cols()))
        }
    };
    if err <= BASIS_ORTHONORMAL_TOL {
        return Ok((v, false));
    }
    let q = match nu {
        None => qr_orthonormalize(&v, QrOptions::default())?,
        Some(nu) => qr_orthonormalize_w(&v, nu, QrOptions::default())?,
    };
    Ok((q, true))
}

fn cmd_run(
    common: &Common,
    input: Option<PathBuf>,
    weights: Option<PathBuf>,
    r: Option<usize>,
    iter: IterArgs,
) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "run")?;
    let input = ctx.path("input", input, "V.seba1")?;
    let v = read_matrix(&input)?;
    let r = ctx.res.or("r", r, v.cols())?;
    if r == 0 || r > v.cols() {
        bail!("--r {r} is out of range: {} has {} columns", input.display(), v.cols());
    }
    let v = v.leading_columns(r);
    let weights = ctx.res.opt::<String>("weights", weights.map(|p| p.display().to_string()))?;
    let cfg = seba_config(&mut ctx, &iter)?;
    let nu = match &weights {
        Some(w) => Some(WeightVector::new(read_vector(w)?)?),
        None => None,
    };
    let (v, fixed) = ensure_orthonormal(v, nu.as_ref())?;
    if fixed {
        eprintln!("note: input columns were not orthonormal; orthonormalized by QR");
    }
    ctx.res.note("orthonormalized", fixed);
    let basis = match nu {
        None => EigenBasis::new(v, OperatorKind::Markov, 2)?,
        Some(nu) => EigenBasis::new_weighted(v, nu, OperatorKind::Markov, 2)?,
    };
    let out = seba(&basis, &cfg)?;
    let (minima, min_value) = min_value_profile(&out);

    write_matrix(ctx.file("S.seba1"), &out.s)?;
    write_matrix(ctx.file("S.csv"), &out.s)?;
    write_matrix(ctx.file("S_unit.seba1"), &out.unit_s)?;
    write_matrix(ctx.file("R.seba1"), &out.rotation)?;
    write_vector(ctx.file("minima.csv"), &minima)?;
    let order: Vec<String> = out.order.iter().map(|j| (j + 1).to_string()).collect();
    write_kv(
        ctx.file("metrics.kv"),
        &[
            kv("p", out.rows()),
            kv("r", out.cols()),
            kv("mu", fmt_f64(out.mu)),
            kv("tol", fmt_f64(out.tol)),
            kv("iterations", out.iterations),
            kv("converged", out.converged),
            kv("subspace_error", fmt_f64(out.metrics.subspace_error)),
            kv("absolute_sparsity", fmt_f64(out.metrics.absolute_sparsity)),
            kv("relative_sparsity", fmt_f64(out.metrics.relative_sparsity)),
            kv("min_value", fmt_f64(min_value)),
            kv("minima", join_f64(&minima)),
            kv("order", order.join(",")),
            kv("orthonormalized", fixed),
        ],
    )?;
    ctx.finish()?;
    eprintln!(
        "seba: r = {}, {} iterations, subspace error {:.4}, Min(S) = {:.4}",
        out.cols(),
        out.iterations,
        out.metrics.subspace_error,
        min_value
    );
    if out.converged {
        Ok(Outcome::Done)
    } else {
        eprintln!("warning: not converged after {} iterations; outputs written", out.iterations);
        Ok(Outcome::NotConverged)
    }
}

fn cmd_eigengap(
    common: &Common,
    input: Option<PathBuf>,
    kind: Option<String>,
    d: Option<usize>,
    r_max: Option<usize>,
) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "eigengap")?;
    let input = ctx.path("input", input, "eigenvalues.csv")?;
    let mut values = read_vector(&input)?;
    let kind: OperatorKind = ctx.res.or("kind", kind, "markov".into())?.parse()?;
    let d = ctx.res.or("d", d, 2)?;
    let r_max = ctx.res.or("r_max", r_max, values.len())?;
    values.truncate(r_max);
    let rescaled = weyl_rescale(&values, kind, d)?;
    for w in &rescaled.warnings {
        eprintln!("warning: {w}");
    }
    let flagged = rescaled.significant_drops(1e-9);

    write_table(
        &ctx.file("rescaled.csv"),
        rescaled.values.iter().map(|(r, v)| vec![r.to_string(), fmt_f64(*v)]),
    )?;
    write_table(
        &ctx.file("drops.csv"),
        rescaled.drops.iter().map(|(r, v)| vec![r.to_string(), fmt_f64(*v)]),
    )?;
    let top: Vec<String> = flagged.iter().take(5).map(|(r, _)| r.to_string()).collect();
    write_kv(
        ctx.file("eigengap.kv"),
        &[
            kv("kind", kind),
            kv("d", d),
            kv("count", rescaled.values.len()),
            kv("flagged_drops", flagged.len()),
            kv("largest_drops_at", top.join(",")),
            kv("warnings", rescaled.warnings.len()),
        ],
    )?;
    let plot = svg::line_plot(
        &format!("Weyl-rescaled spectrum ({kind}, d = {d})"),
        "r",
        "rescaled eigenvalue",
        &[Series {
            label: String::new(),
            points: rescaled.values.iter().map(|&(r, v)| (r as f64, v)).collect(),
            color: svg::color(0),
            line: true,
        }],
        &[],
    );
    write_text(ctx.file("eigengap.svg"), &plot)?;
    ctx.finish()?;
    if flagged.is_empty() {
        eprintln!("eigengap: no drops flagged");
    } else {
        eprintln!("eigengap: largest drops after r = {}", top.join(", "));
    }
    Ok(Outcome::Done)
}

fn cmd_scan(common: &Common, input: Option<PathBuf>, r_max: Option<usize>, iter: IterArgs) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "scan")?;
    let input = ctx.path("input", input, "V.seba1")?;
    let v = read_matrix(&input)?;
    let r_max = ctx.res.or("r_max", r_max, v.cols().min(20))?;
    let cfg = seba_config(&mut ctx, &iter)?;
    let (v, fixed) = ensure_orthonormal(v, None)?;
    if fixed {
        eprintln!("note: input columns were not orthonormal; orthonormalized by QR");
    }
    let basis = EigenBasis::new(v, OperatorKind::Markov, 2)?;
    let table = scan(&basis, r_max, &cfg)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    write_table(
        &ctx.file("scan.csv"),
        table.rows.iter().flat_map(|(r, vals)| {
            vals.iter()
                .enumerate()
                .map(move |(k, v)| vec![r.to_string(), (k + 1).to_string(), fmt_f64(*v)])
        }),
    )?;
    write_table(
        &ctx.file("rmin.csv"),
        table.optimal_pairs.iter().map(|(k, r)| vec![k.to_string(), r.to_string()]),
    )?;
    let picks = select_kr(&table)?;
    write_table(
        &ctx.file("selected.csv"),
        picks.iter().map(|(k, r)| vec![k.to_string(), r.to_string()]),
    )?;

    let series: Vec<Series> = (1..=r_max)
        .map(|k| Series {
            label: format!("k = {k}"),
            points: table
                .rows
                .iter()
                .filter(|(r, _)| *r >= k)
                .map(|(r, vals)| (*r as f64, vals[k - 1]))
                .collect(),
            color: svg::color(k - 1),
            line: true,
        })
        .collect();
    let diamonds = Markers {
        points: table
            .optimal_pairs
            .iter()
            .filter_map(|&(k, r)| table.minval(r, k).map(|v| (r as f64, v)))
            .collect(),
        color: "#ffd700",
    };
    write_text(
        ctx.file("scan.svg"),
        &svg::line_plot("Cumulative minimum value", "r", "Min(S, k)", &series, &[diamonds]),
    )?;
    write_text(
        ctx.file("rmin.svg"),
        &svg::line_plot(
            "Smallest minimising r for each k",
            "k",
            "r_min(k)",
            &[Series {
                label: String::new(),
                points: table.optimal_pairs.iter().map(|&(k, r)| (k as f64, r as f64)).collect(),
                color: svg::color(0),
                line: true,
            }],
            &[],
        ),
    )?;
    ctx.finish()?;
    let shown: Vec<String> = picks.iter().map(|(k, r)| format!("({k}, {r})")).collect();
    eprintln!("scan: recommended (k, r): {}", shown.join(" "));
    Ok(Outcome::Done)
}

/// Box grid stored by the Bickley demo; sparse-basis rows follow its box
/// numbering.
struct Geometry {
    grid: BoxGrid,
}

impl Geometry {
    fn load(out: &Path) -> Result<Option<Self>> {
        let path = out.join("grid.kv");
        if !path.is_file() {
            return Ok(None);
        }
        let kv = read_kv(&path)?;
        let get = |k: &str| -> Result<String> {
            kv.iter()
                .find(|(kk, _)| kk == k)
                .map(|(_, v)| v.clone())
                .with_context(|| format!("{}: missing key {k}", path.display()))
        };
        let f = |k: &str| -> Result<f64> { Ok(get(k)?.parse::<f64>()?) };
        let grid = BoxGrid::new(
            get("nx")?.parse()?,
            get("ny")?.parse()?,
            (f("x_min")?, f("x_max")?),
            (f("y_min")?, f("y_max")?),
            get("periodic_x")?.parse()?,
        )?;
        Ok(Some(Self { grid }))
    }

    fn save(grid: &BoxGrid, out: &Path) -> Result<()> {
        Ok(write_kv(
            out.join("grid.kv"),
            &[
                kv("nx", grid.nx),
                kv("ny", grid.ny),
                kv("x_min", fmt_f64(grid.x_range.0)),
                kv("x_max", fmt_f64(grid.x_range.1)),
                kv("y_min", fmt_f64(grid.y_range.0)),
                kv("y_max", fmt_f64(grid.y_range.1)),
                kv("periodic_x", grid.periodic_x),
            ],
        )?)
    }

    /// A column of box values as a field on the grid of box centres, with
    /// node images from `image` (identity when absent).
    fn field(&self, values: &[f64], image: Option<&DenseMatrix>) -> Result<GridField> {
        let g = &self.grid;
        let (dx, dy) = g.box_size();
        let x_hi = if g.periodic_x { g.x_range.1 + 0.5 * dx } else { g.x_range.1 - 0.5 * dx };
        let domain = [g.x_range.0 + 0.5 * dx, x_hi, g.y_range.0 + 0.5 * dy, g.y_range.1 - 0.5 * dy];
        let field = GridField::new(g.nx, g.ny, domain, g.periodic_x, values.to_vec())?;
        let pts = match image {
            Some(m) => (0..m.rows()).map(|b| [m[(b, 0)], m[(b, 1)]]).collect(),
            None => (0..g.len()).map(|b| g.center(b)).collect(),
        };
        Ok(field.with_image(pts)?)
    }

    fn heatmap(&self, title: &str, values: &[f64], overlay: &[Vec<[f64; 2]>]) -> String {
        let g = &self.grid;
        svg::heatmap(&Heatmap {
            title,
            nx: g.nx,
            ny: g.ny,
            x_range: g.x_range,
            y_range: g.y_range,
            values,
            overlay,
            seam: g.periodic_x.then(|| 0.5 * (g.x_range.1 - g.x_range.0)),
        })
    }
}

fn load_image(out: &Path, p: usize) -> Result<Option<DenseMatrix>> {
    let path = out.join("image.seba1");
    if !path.is_file() {
        return Ok(None);
    }
    let m = read_matrix(&path)?;
    if m.rows() != p || m.cols() != 2 {
        bail!("{}: expected {p}x2 image points, found {}x{}", path.display(), m.rows(), m.cols());
    }
    Ok(Some(m))
}

fn require_geometry(out: &Path, p: usize) -> Result<Geometry> {
    let Some(geo) = Geometry::load(out)? else {
        bail!(
            "{} not found; Cheeger thresholds need a grid (run `seba demo bickley` or provide grid.kv)",
            out.join("grid.kv").display()
        );
    };
    if geo.grid.len() != p {
        bail!("grid.kv describes {} boxes but the basis has {p} rows", geo.grid.len());
    }
    Ok(geo)
}

fn sweep_column(
    geo: &Geometry,
    s: &DenseMatrix,
    j: usize,
    image: Option<&DenseMatrix>,
    levels: usize,
    refine: usize,
) -> Result<CheegerResult> {
    let field = geo.field(s.col(j), image)?.refine(refine)?;
    cheeger_threshold(&field, levels).with_context(|| format!("column {}", j + 1))
}

fn write_cheeger_column(ctx: &Ctx, geo: &Geometry, s: &DenseMatrix, j: usize, res: &CheegerResult) -> Result<()> {
    let c = j + 1;
    write_table(
        &ctx.file(&format!("cheeger_{c}.csv")),
        res.levels.iter().filter(|l| l.h.is_some()).map(|l| {
            vec![
                fmt_f64(l.tau),
                fmt_f64(l.h.unwrap_or_default()),
                fmt_f64(l.length),
                fmt_f64(l.image_length),
                fmt_f64(l.area_above),
                fmt_f64(l.area_below),
            ]
        }),
    )?;
    write_table(
        &ctx.file(&format!("contour_{c}.csv")),
        res.contour.iter().enumerate().flat_map(|(k, pl)| {
            let mut pts = pl.points.clone();
            if pl.closed {
                pts.push(pl.points[0]);
            }
            pts.into_iter()
                .map(move |p| vec![(k + 1).to_string(), fmt_f64(p[0]), fmt_f64(p[1])])
        }),
    )?;
    let curve: Vec<(f64, f64)> = res.levels.iter().filter_map(|l| l.h.map(|h| (l.tau, h))).collect();
    write_text(
        ctx.file(&format!("cheeger_{c}.svg")),
        &svg::line_plot(
            &format!("Cheeger ratio, column {c}"),
            "threshold",
            "h",
            &[Series {
                label: String::new(),
                points: curve,
                color: svg::color(0),
                line: true,
            }],
            &[Markers {
                points: vec![(res.tau_star, res.h_star)],
                color: "#ffd700",
            }],
        ),
    )?;
    let overlay: Vec<Vec<[f64; 2]>> = res
        .contour
        .iter()
        .map(|pl| {
            let mut pts = pl.points.clone();
            if pl.closed {
                pts.push(pl.points[0]);
            }
            pts
        })
        .collect();
    write_text(
        ctx.file(&format!("contour_{c}.svg")),
        &geo.heatmap(&format!("Column {c} with its Cheeger contour"), s.col(j), &overlay),
    )?;
    Ok(())
}

fn cmd_cheeger(
    common: &Common,
    input: Option<PathBuf>,
    column: Option<usize>,
    levels: Option<usize>,
    refine: Option<usize>,
) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "cheeger")?;
    let input = ctx.path("input", input, "S.seba1")?;
    let s = read_matrix(&input)?;
    let column = ctx.res.opt("column", column)?;
    let levels = ctx.res.or("levels", levels, 256)?;
    let refine = ctx.res.or("refine", refine, 1)?;
    let geo = require_geometry(&ctx.out, s.rows())?;
    let image = load_image(&ctx.out, s.rows())?;
    let cols: Vec<usize> = match column {
        Some(c) if c == 0 || c > s.cols() => bail!("--column {c} is out of range 1..={}", s.cols()),
        Some(c) => vec![c - 1],
        None => (0..s.cols()).collect(),
    };
    let mut summary = Vec::new();
    for j in cols {
        let res = sweep_column(&geo, &s, j, image.as_ref(), levels, refine)?;
        write_cheeger_column(&ctx, &geo, &s, j, &res)?;
        let c = j + 1;
        summary.push(kv(&format!("column_{c}_tau"), fmt_f64(res.tau_star)));
        summary.push(kv(&format!("column_{c}_h"), fmt_f64(res.h_star)));
        summary.push(kv(
            &format!("column_{c}_flat"),
            format!("{},{}", fmt_f64(res.flat_interval.0), fmt_f64(res.flat_interval.1)),
        ));
        eprintln!("cheeger: column {c}: tau* = {:.4}, h = {:.4}", res.tau_star, res.h_star);
    }
    write_kv(ctx.file("cheeger.kv"), &summary)?;
    ctx.finish()?;
    Ok(Outcome::Done)
}

fn cmd_threshold(
    common: &Common,
    input: Option<PathBuf>,
    method: Option<String>,
    levels: Option<usize>,
) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "threshold")?;
    let input = ctx.path("input", input, "S.seba1")?;
    let s = read_matrix(&input)?;
    let method: ThresholdMethod = ctx.res.or("method", method, "partition-unity".into())?.parse()?;
    let geo = Geometry::load(&ctx.out)?.filter(|g| g.grid.len() == s.rows());
    let fa: FeatureAssignment = match method {
        ThresholdMethod::PartitionUnity => partition_unity(&s),
        ThresholdMethod::DisjointSupport => disjoint_support(&s),
        ThresholdMethod::MaxLikelihood => max_likelihood(&s),
        ThresholdMethod::Manual(t) => manual(&s, t)?,
        ThresholdMethod::Cheeger => {
            let levels = ctx.res.or("levels", levels, 256)?;
            let geo = require_geometry(&ctx.out, s.rows())?;
            let image = load_image(&ctx.out, s.rows())?;
            let mut taus = Vec::with_capacity(s.cols());
            for j in 0..s.cols() {
                let res = sweep_column(&geo, &s, j, image.as_ref(), levels, 1)?;
                write_cheeger_column(&ctx, &geo, &s, j, &res)?;
                taus.push(res.tau_star);
            }
            per_column(&s, &taus)?
        }
    };
    let sup = superposition(&s);

    write_table(
        &ctx.file("labels.csv"),
        fa.labels.iter().enumerate().map(|(i, a)| vec![(i + 1).to_string(), a.to_string()]),
    )?;
    write_matrix(ctx.file("thresholded.seba1"), &fa.thresholded)?;
    write_vector(ctx.file("superposition.csv"), &sup)?;
    let mut meta = vec![kv("method", method), kv("taus", join_f64(&fa.taus))];
    meta.push(kv("unassigned", fa.count(0)));
    for j in 1..=s.cols() {
        meta.push(kv(&format!("count_{j}"), fa.count(j)));
    }
    write_kv(ctx.file("threshold.kv"), &meta)?;

    if let Some(geo) = geo {
        write_text(ctx.file("superposition.svg"), &geo.heatmap("Superposition", &sup, &[]))?;
        let labels: Vec<f64> = fa.labels.iter().map(|&a| a as f64).collect();
        write_text(ctx.file("labels.svg"), &geo.heatmap(&format!("Labels ({method})"), &labels, &[]))?;
        let thr_sup = superposition(&fa.thresholded);
        write_text(
            ctx.file("thresholded_superposition.svg"),
            &geo.heatmap("Superposition after thresholding", &thr_sup, &[]),
        )?;
    }
    ctx.finish()?;
    eprintln!(
        "threshold: {method}, tau = {}, {} of {} rows unassigned",
        fa.taus.first().map_or("-".into(), |t| format!("{t:.4}")),
        fa.count(0),
        s.rows()
    );
    Ok(Outcome::Done)
}

fn demo_bickley(
    common: &Common,
    nx: Option<usize>,
    ny: Option<usize>,
    samples: Option<usize>,
    t1: Option<f64>,
    step: Option<f64>,
    k: Option<usize>,
) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "demo bickley")?;
    let seed = ctx.res.or("seed", common.seed, 1)?;
    let nx = ctx.res.or("nx", nx, 120)?;
    let ny = ctx.res.or("ny", ny, 36)?;
    let samples = ctx.res.or("samples", samples, 100)?;
    let t1 = ctx.res.or("t1", t1, 40.0)?;
    let step = ctx.res.or("step", step, 0.2)?;
    let k = ctx.res.or("k", k, 16)?;
    let flow = BickleyFlow::default();
    let grid = BoxGrid::new(nx, ny, (0.0, flow.period), flow.y_range, true)?;
    if k > grid.len() {
        bail!("--k {k} exceeds the {} boxes", grid.len());
    }
    eprintln!("bickley: building {nx}x{ny} transfer operator ({samples} samples per box)");
    let op = ulam_build(&flow, grid, 0.0, t1, samples, seed, step)?;
    let basis = op.markov_basis(k, LeadingEigOptions::default())?;
    let centres: Vec<[f64; 2]> = (0..grid.len()).map(|b| grid.center(b)).collect();
    let images = flow_map(&flow, &centres, 0.0, t1, step);
    let image = DenseMatrix::from_fn(grid.len(), 2, |b, c| images[b][c]);

    write_matrix(ctx.file("V.seba1"), basis.vectors())?;
    write_vector(ctx.file("eigenvalues.csv"), basis.eigenvalues().unwrap_or(&[]))?;
    write_matrix(ctx.file("image.seba1"), &image)?;
    Geometry::save(&grid, &ctx.out)?;
    write_kv(
        ctx.file("manifest.kv"),
        &[
            kv("demo", "bickley"),
            kv("kind", "markov"),
            kv("d", 2),
            kv("nx", nx),
            kv("ny", ny),
            kv("samples", samples),
            kv("t0", fmt_f64(0.0)),
            kv("t1", fmt_f64(t1)),
            kv("step", fmt_f64(step)),
            kv("seed", seed),
            kv("k", k),
            kv("clamped_samples", op.clamped_samples),
        ],
    )?;
    ctx.finish()?;
    eprintln!("bickley: wrote {} singular vectors to {}", k, ctx.out.display());
    Ok(Outcome::Done)
}

fn demo_graph(common: &Common, spacing: Option<f64>, k: Option<usize>) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "demo graph")?;
    let spacing = ctx.res.or("spacing", spacing, 0.2)?;
    let k = ctx.res.or("k", k, 4)?;
    if !(spacing > 0.0 && spacing <= 0.5) {
        bail!("--spacing must lie in (0, 0.5], got {spacing}");
    }
    let (points, blobs) = plus_blob_cloud(spacing, 1.0, 3.0);
    let demo = graph_laplacian_demo(&points, 1.01 * spacing, k)?;
    let n_ev = demo.spectrum.len().min(20).max(k);

    write_matrix(ctx.file("V.seba1"), demo.basis.vectors())?;
    write_vector(ctx.file("eigenvalues.csv"), &demo.spectrum[..n_ev])?;
    write_table(
        &ctx.file("points.csv"),
        points
            .iter()
            .zip(&blobs)
            .map(|(p, b)| vec![fmt_f64(p[0]), fmt_f64(p[1]), b.to_string()]),
    )?;
    write_kv(
        ctx.file("manifest.kv"),
        &[
            kv("demo", "graph"),
            kv("kind", "neumann"),
            kv("d", 2),
            kv("spacing", fmt_f64(spacing)),
            kv("nodes", points.len()),
            kv("k", k),
        ],
    )?;
    ctx.finish()?;
    eprintln!("graph: {} nodes, {} eigenvectors", points.len(), k);
    Ok(Outcome::Done)
}

fn demo_block_markov(common: &Common, sizes: Option<String>, eps: Option<f64>) -> Result<Outcome> {
    let mut ctx = Ctx::new(common, "demo block-markov")?;
    let seed = ctx.res.or("seed", common.seed, 1)?;
    let sizes_raw = ctx.res.or("sizes", sizes, "50,30,20".into())?;
    let sizes: Vec<usize> = sizes_raw
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad --sizes '{sizes_raw}'"))?;
    let eps = ctx.res.or("eps", eps, 0.05)?;
    let demo = block_markov_demo(&sizes, eps, seed)?;
    let n_ev = demo.singular_values.len().min(10);
    let blocks: Vec<f64> = demo.labels.iter().map(|&l| l as f64).collect();

    write_matrix(ctx.file("V.seba1"), demo.basis.vectors())?;
    write_vector(ctx.file("eigenvalues.csv"), &demo.singular_values[..n_ev])?;
    write_matrix(ctx.file("P.seba1"), &demo.transition)?;
    write_vector(ctx.file("blocks.csv"), &blocks)?;
    write_kv(
        ctx.file("manifest.kv"),
        &[
            kv("demo", "block-markov"),
            kv("kind", "markov"),
            kv("d", 1),
            kv("sizes", &sizes_raw),
            kv("eps", fmt_f64(eps)),
            kv("seed", seed),
        ],
    )?;
    ctx.finish()?;
    eprintln!("block-markov: {} states in {} blocks", demo.labels.len(), sizes.len());
    Ok(Outcome::Done)
}
