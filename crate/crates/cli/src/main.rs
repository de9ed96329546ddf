use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use pathdirac::chain::ChainComplexRep;
use pathdirac::checks::{check_filtration, check_source, CheckConfig, Fault, Source};
use pathdirac::graph::{h1_rank_digraph, h1_rank_hypergraph, AnchorPaths, DEFAULT_PATH_CAP};
use pathdirac::io::{
    parse_digraph, parse_hypergraph, parse_manifest, parse_thresholds, read_to_string, Manifest,
};
use pathdirac::molecular::{parse_molecule_str, run_molecule};
use pathdirac::persistence::{feature_grid, Filtration, GridOptions};
use pathdirac::report::{
    digest, grid_csv, matrix_csv, ComplexSummary, GridRecord, OperatorRecord, ResultDocument,
};
use pathdirac::spectral::{
    dirac_spectrum, dirac_with_cap, features, laplacian, laplacian_spectrum, Feature,
    DEFAULT_MATRIX_CAP, DEFAULT_ZERO_TOL, ZERO_TOL_RANGE,
};
use pathdirac::svg::heatmap;
use pathdirac::{Digraph, Error, Hypergraph};

#[derive(Parser)]
#[command(
    name = "pathdirac",
    version,
    about = "Path complexes, Laplacians and Dirac operators of digraphs and hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of Ω, boundary ranks and Betti numbers.
    Complex {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Digraph)]
        kind: Kind,
        /// Highest degree of the complex.
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Spectra and features of L_0..L_p and D_p.
    Dirac {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Digraph)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Persistent Dirac feature grid of a filtration manifest.
    Persist {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Digraph)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Stage thresholds, overriding any in the manifest.
        #[arg(long)]
        thresholds: Option<String>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Persistent Dirac feature grid of a molecule's bond-distance filtration.
    Molecule {
        xyz: PathBuf,
        #[arg(long)]
        thresholds: String,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Runs the invariant suite on a graph, a manifest, or a seeded random digraph.
    Check {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Kind::Digraph)]
        kind: Kind,
        /// Treat the input as a filtration manifest.
        #[arg(long)]
        manifest: bool,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Seed for basis rotations, and for the random digraph when no input is given.
        #[arg(long, default_value_t = 42)]
        random_seed: u64,
        #[arg(long, value_parser = parse_tol, default_value_t = DEFAULT_ZERO_TOL)]
        tol: f64,
        #[arg(long, hide = true)]
        inject_fault: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Digraph,
    Hypergraph,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Digraph => "digraph",
            Kind::Hypergraph => "hypergraph",
        }
    }
}

#[derive(Args)]
struct Common {
    /// Output directory; without it the JSON document goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write operator matrices (CSV) and the exact complex (JSON).
    #[arg(long)]
    dump_matrices: bool,
    /// Maximum number of allowed paths per degree.
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: usize,
    /// Maximum operator dimension.
    #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
    matrix_cap: usize,
    /// Record wall-clock time in the result document.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SpectralArgs {
    /// Relative zero threshold for eigenvalues, within [1e-12, 1e-6].
    #[arg(long, value_parser = parse_tol, default_value_t = DEFAULT_ZERO_TOL)]
    tol: f64,
    /// Comma-separated features: nullity, mean_pos, gen_mean, min_pos, max, sum_pos, std_pos.
    #[arg(long, default_value = "nullity,mean_pos,gen_mean")]
    features: String,
}

#[derive(Args)]
struct GridArgs {
    /// Worker threads for the grid cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Print cell values on the SVG heatmaps.
    #[arg(long)]
    annotate: bool,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    let (lo, hi) = ZERO_TOL_RANGE;
    if !(lo..=hi).contains(&t) {
        return Err(format!("tolerance must lie in [{lo:e}, {hi:e}]"));
    }
    Ok(t)
}

/// Files to write once every computation has succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<PathBuf>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn write(self, dir: &Path) -> anyhow::Result<()> {
        for (name, contents) in self.files {
            let path = dir.join(&name);
            let parent = path.parent().unwrap_or(dir);
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
            let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
            std::io::Write::write_all(&mut tmp, contents.as_bytes())?;
            tmp.persist(&path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

enum Graph {
    Di(Digraph),
    Hyper(Hypergraph),
}

impl Graph {
    fn load(path: &Path, kind: Kind) -> anyhow::Result<(Graph, Vec<u8>)> {
        let text = read_to_string(path)?;
        let g = match kind {
            Kind::Digraph => Graph::Di(parse_digraph(&text)?),
            Kind::Hypergraph => Graph::Hyper(parse_hypergraph(&text)?),
        };
        Ok((g, text.into_bytes()))
    }

    fn complex(&self, top: usize, cap: usize) -> pathdirac::Result<ChainComplexRep> {
        match self {
            Graph::Di(g) => ChainComplexRep::from_source(g, top, cap),
            Graph::Hyper(h) => ChainComplexRep::from_source(h, top, cap),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<Error>())
                .map_or(2, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let (mut doc, outputs, common, failed) = match cli.command {
        Command::Complex {
            graph,
            kind,
            p,
            common,
        } => {
            let (doc, out) = cmd_complex(&graph, kind, p, &common)?;
            (doc, out, common, false)
        }
        Command::Dirac {
            graph,
            kind,
            p,
            common,
            spectral,
        } => {
            let (doc, out) = cmd_dirac(&graph, kind, p, &common, &spectral)?;
            (doc, out, common, false)
        }
        Command::Persist {
            manifest,
            kind,
            p,
            thresholds,
            common,
            spectral,
            grid,
        } => {
            let (doc, out) = cmd_persist(
                &manifest,
                kind,
                p,
                thresholds.as_deref(),
                &common,
                &spectral,
                &grid,
            )?;
            (doc, out, common, false)
        }
        Command::Molecule {
            xyz,
            thresholds,
            p,
            common,
            spectral,
            grid,
        } => {
            let (doc, out) = cmd_molecule(&xyz, &thresholds, p, &common, &spectral, &grid)?;
            (doc, out, common, false)
        }
        Command::Check {
            input,
            kind,
            manifest,
            p,
            random_seed,
            tol,
            inject_fault,
            common,
        } => {
            let cfg = CheckConfig {
                p,
                tol,
                seed: random_seed,
                fault: if inject_fault {
                    Fault::PerturbDirac
                } else {
                    Fault::None
                },
                path_cap: common.cap,
                matrix_cap: common.matrix_cap,
            };
            let doc = cmd_check(input.as_deref(), kind, manifest, &cfg)?;
            let failed = doc.checks.iter().any(|c| !c.passed);
            for c in &doc.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            (doc, Outputs::default(), common, failed)
        }
    };
    if common.timing {
        doc.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = doc.to_json();
    match &common.out {
        Some(dir) => {
            let mut outputs = outputs;
            outputs.add("result.json", json);
            outputs.write(dir)?;
        }
        None => print!("{json}"),
    }
    Ok(if failed {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_complex(
    path: &Path,
    kind: Kind,
    p: usize,
    common: &Common,
) -> anyhow::Result<(ResultDocument, Outputs)> {
    let (graph, bytes) = Graph::load(path, kind)?;
    let c = graph.complex(p, common.cap)?;
    let mut summary = ComplexSummary::new(kind.name(), &c);
    if p >= 2 {
        let r2 = c.boundary_rank(2)?;
        summary.h1_formula = Some(match &graph {
            Graph::Di(g) => h1_rank_digraph(g, r2)?,
            Graph::Hyper(h) => h1_rank_hypergraph(h, r2)?,
        });
    }
    let mut doc = ResultDocument::new(
        "complex",
        digest(&[&bytes]),
        json!({ "kind": kind.name(), "p": p, "cap": common.cap }),
    );
    doc.complex = Some(summary);
    let mut out = Outputs::default();
    if common.dump_matrices {
        out.add("complex.json", pretty(&c.debug_dump()));
    }
    Ok((doc, out))
}

fn cmd_dirac(
    path: &Path,
    kind: Kind,
    p: usize,
    common: &Common,
    spectral: &SpectralArgs,
) -> anyhow::Result<(ResultDocument, Outputs)> {
    let feats = Feature::parse_list(&spectral.features)?;
    let (graph, bytes) = Graph::load(path, kind)?;
    let c = graph.complex(p + 1, common.cap)?;
    let mut doc = ResultDocument::new(
        "dirac",
        digest(&[&bytes]),
        json!({
            "kind": kind.name(),
            "p": p,
            "tol": spectral.tol,
            "features": feats.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "cap": common.cap,
        }),
    );
    doc.complex = Some(ComplexSummary::new(kind.name(), &c));
    let mut out = Outputs::default();
    for n in 0..=p {
        let l = laplacian(&c, n)?;
        if l.matrix.nrows() > common.matrix_cap {
            return Err(Error::Resource(format!("L_{n} exceeds the matrix cap")).into());
        }
        let s = laplacian_spectrum(&l, spectral.tol)?;
        doc.operators
            .push(OperatorRecord::new("laplacian", n, &s, &features(&s)));
        if common.dump_matrices {
            out.add(format!("matrices/L{n}.csv"), matrix_csv(&l.matrix));
        }
    }
    let d = dirac_with_cap(&c, p, common.matrix_cap)?;
    let s = dirac_spectrum(&d, spectral.tol)?;
    doc.operators
        .push(OperatorRecord::new("dirac", p, &s, &features(&s)));
    if common.dump_matrices {
        out.add(format!("matrices/D{p}.csv"), matrix_csv(&d.matrix));
        out.add("complex.json", pretty(&c.debug_dump()));
    }
    Ok((doc, out))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn load_filtration(
    path: &Path,
    kind: Kind,
    cli_thresholds: Option<&str>,
) -> anyhow::Result<(Filtration, Vec<Vec<u8>>)> {
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let thresholds = cli_thresholds.map(parse_thresholds).transpose()?;
    let mut bytes = vec![text.clone().into_bytes()];
    let f = match parse_manifest(&text, base)? {
        Manifest::Stages(files) => {
            let mut digraphs = Vec::new();
            let mut hypergraphs = Vec::new();
            for file in &files {
                let (g, b) = Graph::load(file, kind)?;
                bytes.push(b);
                match g {
                    Graph::Di(g) => digraphs.push(g),
                    Graph::Hyper(h) => hypergraphs.push(h),
                }
            }
            match kind {
                Kind::Digraph => Filtration::new(digraphs, thresholds)?,
                Kind::Hypergraph => Filtration::from_hypergraphs(&hypergraphs, thresholds)?,
            }
        }
        Manifest::Weighted {
            vertices,
            edges,
            thresholds: listed,
        } => {
            if kind == Kind::Hypergraph {
                bail!(Error::InvalidInput(
                    "weighted manifests describe digraphs only".into()
                ));
            }
            let Some(t) = thresholds.or(listed) else {
                bail!(Error::InvalidInput(
                    "weighted manifest needs thresholds ('# thresholds:' or --thresholds)".into()
                ));
            };
            Filtration::from_weighted_edges(vertices, &edges, &t)?
        }
    };
    Ok((f, bytes))
}

fn grid_outputs(
    doc: &mut ResultDocument,
    out: &mut Outputs,
    grid: &pathdirac::FeatureGrid,
    feats: &[Feature],
    annotate: bool,
) {
    doc.grids.push(GridRecord::new(grid, feats));
    out.add("grid.csv", grid_csv(grid, feats));
    for &f in feats {
        out.add(
            format!("heatmap_{}.svg", f.name()),
            heatmap(grid, f, annotate),
        );
    }
}

fn cmd_persist(
    path: &Path,
    kind: Kind,
    p: usize,
    thresholds: Option<&str>,
    common: &Common,
    spectral: &SpectralArgs,
    grid_args: &GridArgs,
) -> anyhow::Result<(ResultDocument, Outputs)> {
    let feats = Feature::parse_list(&spectral.features)?;
    let (f, bytes) = load_filtration(path, kind, thresholds)?;
    let opts = GridOptions {
        p,
        tol: spectral.tol,
        jobs: grid_args.jobs.max(1),
        path_cap: common.cap,
        matrix_cap: common.matrix_cap,
    };
    let grid = feature_grid(&f, &opts)?;
    let parts: Vec<&[u8]> = bytes.iter().map(Vec::as_slice).collect();
    let mut doc = ResultDocument::new(
        "persist",
        digest(&parts),
        json!({
            "kind": kind.name(),
            "p": p,
            "tol": spectral.tol,
            "features": feats.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "cap": common.cap,
        }),
    );
    let mut out = Outputs::default();
    grid_outputs(&mut doc, &mut out, &grid, &feats, grid_args.annotate);
    Ok((doc, out))
}

fn cmd_molecule(
    path: &Path,
    thresholds: &str,
    p: usize,
    common: &Common,
    spectral: &SpectralArgs,
    grid_args: &GridArgs,
) -> anyhow::Result<(ResultDocument, Outputs)> {
    let feats = Feature::parse_list(&spectral.features)?;
    let t = parse_thresholds(thresholds)?;
    let text = read_to_string(path)?;
    let molecule = parse_molecule_str(&text)?;
    let opts = GridOptions {
        p,
        tol: spectral.tol,
        jobs: grid_args.jobs.max(1),
        path_cap: common.cap,
        matrix_cap: common.matrix_cap,
    };
    let run = run_molecule(molecule, &t, &opts)?;
    let stage_edges: Vec<usize> = run
        .filtration
        .stages()
        .iter()
        .map(|g| g.edges().len())
        .collect();
    let mut doc = ResultDocument::new(
        "molecule",
        digest(&[text.as_bytes()]),
        json!({
            "p": p,
            "tol": spectral.tol,
            "thresholds": t,
            "features": feats.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "atoms": run.molecule.atoms.len(),
            "bonds": run.molecule.bonds.len(),
            "bonds_inferred": run.molecule.bonds_inferred,
            "stage_edge_counts": stage_edges,
        }),
    );
    let mut out = Outputs::default();
    grid_outputs(&mut doc, &mut out, &run.grid, &feats, grid_args.annotate);
    Ok((doc, out))
}

/// Random digraph on 2 to 6 vertices, each ordered pair an edge with probability 0.4.
fn random_digraph(seed: u64) -> pathdirac::Result<Digraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: u32 = rng.random_range(2..=6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(0.4) {
                edges.push((u, v));
            }
        }
    }
    Digraph::on_range(n, &edges)
}

fn cmd_check(
    input: Option<&Path>,
    kind: Kind,
    manifest: bool,
    cfg: &CheckConfig,
) -> anyhow::Result<ResultDocument> {
    let config = json!({
        "kind": kind.name(),
        "p": cfg.p,
        "tol": cfg.tol,
        "random_seed": cfg.seed,
        "manifest": manifest,
    });
    let (checks, digest_value) = match input {
        None => {
            let g = random_digraph(cfg.seed)?;
            let edges: Vec<String> = g.edges().iter().map(|(u, v)| format!("{u} {v}")).collect();
            let text = format!("# vertices: {}\n{}\n", g.vertices().len(), edges.join("\n"));
            (
                check_source(Source::Digraph(&g), cfg)?,
                digest(&[text.as_bytes()]),
            )
        }
        Some(path) if manifest => {
            let (f, bytes) = load_filtration(path, kind, None)?;
            let parts: Vec<&[u8]> = bytes.iter().map(Vec::as_slice).collect();
            (check_filtration(&f, cfg)?, digest(&parts))
        }
        Some(path) => {
            let (g, bytes) = Graph::load(path, kind)?;
            let checks = match &g {
                Graph::Di(g) => check_source(Source::Digraph(g), cfg)?,
                Graph::Hyper(h) => {
                    // make sure the hypergraph path set is within the cap before the suite
                    h.anchor_paths(cfg.p + 1, cfg.path_cap)?;
                    check_source(Source::Hypergraph(h), cfg)?
                }
            };
            (checks, digest(&[&bytes]))
        }
    };
    let mut doc = ResultDocument::new("check", digest_value, config);
    doc.checks = checks;
    Ok(doc)
}
