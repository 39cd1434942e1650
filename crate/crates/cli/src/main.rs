use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use reflectofold_core::coxeter::{check_seed_conditions, diagram_d, parse_diagram, CoxeterMatrix};
use reflectofold_core::doubling::{canonical_sequence, PolytopeState};
use reflectofold_core::flatmfd::{deck_transformations, CuspReport, FlatManifoldClass};
use reflectofold_core::golden::{GoldenTables, SCHEME_TABLES, STATE_TABLES};
use reflectofold_core::label::FacetLabel;
use reflectofold_core::pipeline;
use reflectofold_core::reflectofold::{builtin, check_developability, validate_gluing, GluingScheme, Reflectofold};
use reflectofold_core::svg;
use reflectofold_core::table::LabeledMatrix;

const GOLDEN_ENV: &str = "REFLECTOFOLD_GOLDEN";

#[derive(Parser)]
#[command(name = "reflectofold", version, about = "Doubling, gluing and cusp recognition for the seed Coxeter polytope")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SeedOpt {
    /// Coxeter diagram in the edge-list DSL; defaults to the builtin seed.
    #[arg(long, value_name = "FILE")]
    seed_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every stage and compare against the golden tables.
    Pipeline {
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        seed: SeedOpt,
        /// Corrupt a golden cell, TABLE:TYPE:ROW:COL=VALUE (test hook).
        #[cfg(feature = "test-hooks")]
        #[arg(long, value_name = "SPEC")]
        mutate: Vec<String>,
    },
    /// Emit adjacency tables: t0..t8, tr1..tr4 or all.
    Tables {
        selector: String,
        /// Print cell-level differences against the golden copy.
        #[arg(long)]
        diff: bool,
        /// Write CSV and aligned text files here instead of printing.
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Write face pictures: `P1` for all facets of P1, `P2:1_2` for one.
    Svg {
        selector: String,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
    },
    /// Analyse one gluing scheme: a builtin name or a JSON file.
    Classify {
        scheme: String,
        #[arg(long)]
        json: bool,
    },
    /// Check the seed diagram conditions.
    Seed {
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        seed: SeedOpt,
    },
}

/// Input or usage problem; exit code 2.
struct UsageError(String);

type CmdResult = Result<bool, UsageError>;

fn usage<E: std::fmt::Display>(ctx: &str) -> impl Fn(E) -> UsageError + '_ {
    move |e| UsageError(format!("{ctx}: {e}"))
}

fn load_seed(opt: &SeedOpt) -> Result<CoxeterMatrix, UsageError> {
    match &opt.seed_file {
        None => Ok(diagram_d()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(usage(&p.display().to_string()))?;
            parse_diagram(&text).map_err(usage(&p.display().to_string()))
        }
    }
}

/// Golden tables and whether they are the embedded copy.
fn load_golden() -> Result<(GoldenTables, bool), UsageError> {
    match std::env::var_os(GOLDEN_ENV) {
        None => Ok((GoldenTables::embedded(), true)),
        Some(p) => {
            let ctx = Path::new(&p).display().to_string();
            let text = fs::read_to_string(&p).map_err(usage(&ctx))?;
            Ok((GoldenTables::parse(&text).map_err(usage(&ctx))?, false))
        }
    }
}

fn states() -> Result<Vec<PolytopeState>, UsageError> {
    canonical_sequence(&diagram_d()).map_err(usage("doubling"))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn cmd_pipeline(json: bool, seed: &SeedOpt, mutate: &[String]) -> CmdResult {
    let seed = load_seed(seed)?;
    let (mut golden, mut embedded) = load_golden()?;
    for m in mutate {
        golden.mutate(m).map_err(usage("--mutate"))?;
        embedded = false;
    }
    let report = pipeline::run(&seed, &golden, embedded);
    if json {
        print_json(&report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    if let Some(f) = report.first_failure() {
        eprintln!("error: {f}");
    }
    Ok(report.ok())
}

enum Selector {
    State(usize),
    Scheme(&'static str, &'static str),
}

fn parse_table_selector(s: &str) -> Result<Vec<Selector>, UsageError> {
    if s == "all" {
        let mut v: Vec<Selector> = (0..STATE_TABLES.len()).map(Selector::State).collect();
        v.extend(SCHEME_TABLES.iter().map(|&(t, n)| Selector::Scheme(t, n)));
        return Ok(v);
    }
    if let Some(i) = STATE_TABLES.iter().position(|&t| t == s) {
        return Ok(vec![Selector::State(i)]);
    }
    if let Some(&(t, n)) = SCHEME_TABLES.iter().find(|(t, _)| *t == s) {
        return Ok(vec![Selector::Scheme(t, n)]);
    }
    Err(UsageError(format!("unknown table {s:?}: expected t0..t8, tr1..tr4 or all")))
}

fn analyse(states: &[PolytopeState], g: &GluingScheme) -> Result<Reflectofold, UsageError> {
    let s = states.get(g.base).ok_or_else(|| UsageError(format!("no state P{}", g.base)))?;
    let report = validate_gluing(s, g);
    Reflectofold::new(s, g, &report).map_err(usage(&g.name))
}

fn computed_tables(states: &[PolytopeState], sel: &Selector) -> Result<(String, Vec<(u32, LabeledMatrix)>), UsageError> {
    match sel {
        Selector::State(i) => {
            let s = &states[*i];
            Ok((STATE_TABLES[*i].to_string(), s.compact_types().iter().map(|&t| (t, s.adjacency_matrix(t))).collect()))
        }
        Selector::Scheme(table, name) => {
            let g = builtin(name).map_err(usage(name))?;
            let rf = analyse(states, &g)?;
            Ok((table.to_string(), rf.types.iter().map(|&t| (t, rf.adjacency_matrix(t))).collect()))
        }
    }
}

fn cmd_tables(selector: &str, diff: bool, outdir: Option<&Path>) -> CmdResult {
    let sels = parse_table_selector(selector)?;
    let golden = if diff { Some(load_golden()?.0) } else { None };
    let states = states()?;
    if let Some(dir) = outdir {
        fs::create_dir_all(dir).map_err(usage(&dir.display().to_string()))?;
    }
    let mut total = 0;
    for sel in &sels {
        let (table, mats) = computed_tables(&states, sel)?;
        for (ty, m) in mats {
            match outdir {
                Some(dir) => {
                    for (ext, body) in [("csv", m.to_csv()), ("txt", m.to_text())] {
                        let p = dir.join(format!("{table}_type{ty}.{ext}"));
                        fs::write(&p, body).map_err(usage(&p.display().to_string()))?;
                        println!("wrote {}", p.display());
                    }
                }
                None if !diff => println!("{table} type {ty} ({0}x{0})\n{1}", m.size(), m.to_text()),
                None => {}
            }
            if let Some(g) = &golden {
                let d = match g.matrix(&table, ty) {
                    Some(want) => m.diff(want).iter().map(|d| d.to_string()).collect(),
                    None => vec![format!("no golden table {table} type {ty}")],
                };
                for line in &d {
                    println!("{table} type {ty}: {line}");
                }
                let errata = g.errata_cells(&table, ty).len();
                let note = if errata > 0 { format!(" ({errata} printed cells corrected)") } else { String::new() };
                println!("{table} type {ty}: {} differences{note}", d.len());
                total += d.len();
            }
        }
    }
    if diff {
        println!("{total} differences");
    }
    Ok(total == 0)
}

fn cmd_svg(selector: &str, outdir: &Path) -> CmdResult {
    let (state, facet) = match selector.split_once(':') {
        Some((s, f)) => (s, Some(FacetLabel::parse(f).map_err(usage(f))?)),
        None => (selector, None),
    };
    let n: usize = state
        .strip_prefix('P')
        .and_then(|d| d.parse().ok())
        .filter(|&n| n < STATE_TABLES.len())
        .ok_or_else(|| UsageError(format!("unknown state {state:?}: expected P0..P8")))?;
    let states = states()?;
    let pics = svg::render_state(&states[n], facet.as_ref()).map_err(usage(selector))?;
    fs::create_dir_all(outdir).map_err(usage(&outdir.display().to_string()))?;
    for (name, body) in pics {
        let p = outdir.join(name);
        fs::write(&p, body).map_err(usage(&p.display().to_string()))?;
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn load_scheme(arg: &str) -> Result<GluingScheme, UsageError> {
    if let Ok(g) = builtin(arg) {
        return Ok(g);
    }
    let p = Path::new(arg);
    if !p.exists() {
        return Err(UsageError(format!("{arg:?} is neither a builtin scheme (R_T, R_half, R_quarter, R_HW) nor a file")));
    }
    let text = fs::read_to_string(p).map_err(usage(arg))?;
    GluingScheme::from_json(&text).map_err(usage(arg))
}

fn cmd_classify(arg: &str, json: bool) -> CmdResult {
    let g = load_scheme(arg)?;
    let states = states()?;
    let s = states.get(g.base).ok_or_else(|| UsageError(format!("no state P{}", g.base)))?;
    let report = validate_gluing(s, &g);
    if !report.geometry_valid() {
        if json {
            print_json(&json!({ "scheme": g.name, "gluing": report.to_json() }));
        } else {
            println!("{} on P{}: gluing is not valid", g.name, g.base);
            for v in &report.violations {
                println!("  {v}");
            }
        }
        return Ok(false);
    }
    let rf = Reflectofold::new(s, &g, &report).map_err(usage(&g.name))?;
    let dev = check_developability(&rf);
    let cusp = deck_transformations(&s.i3, &report).and_then(CuspReport::new);
    let manifold = matches!(&cusp, Ok(c) if !matches!(c.class, FlatManifoldClass::NotAManifold | FlatManifoldClass::Unrecognized));
    if json {
        print_json(&json!({
            "scheme": g.name,
            "gluing": report.to_json(),
            "reflectofold": rf.to_json(&dev),
            "cusp": match &cusp {
                Ok(c) => c.to_json(),
                Err(e) => json!({ "error": e.to_string() }),
            },
        }));
    } else {
        println!("{} on P{}", g.name, g.base);
        for v in &report.violations {
            println!("  gluing: {v}");
        }
        for ty in &rf.types {
            println!("  type {ty}: {} classes", rf.classes_of(*ty).count());
        }
        let mark = |b: bool| if b { "pass" } else { "fail" };
        println!("  EF {}, AC {}: {}", mark(dev.ef), mark(dev.ac), if dev.developable() { "developable" } else { "not developable" });
        for v in &dev.violations {
            println!("  {v}");
        }
        match &cusp {
            Ok(c) => println!(
                "  cusp section {} (point group order {}, torsion-free {}, orientable {})",
                c.class,
                c.group.order(),
                c.torsion_free,
                c.orientable
            ),
            Err(e) => println!("  cusp section not classified: {e}"),
        }
    }
    Ok(dev.developable() && manifold)
}

fn cmd_seed(json: bool, seed: &SeedOpt) -> CmdResult {
    let m = load_seed(seed)?;
    let r = check_seed_conditions(&m);
    if json {
        print_json(&serde_json::to_value(&r).expect("seed report serializes"));
    } else {
        print!("{}", r.to_text());
    }
    Ok(r.passes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        #[cfg(feature = "test-hooks")]
        Cmd::Pipeline { json, seed, mutate } => cmd_pipeline(*json, seed, mutate),
        #[cfg(not(feature = "test-hooks"))]
        Cmd::Pipeline { json, seed } => cmd_pipeline(*json, seed, &[]),
        Cmd::Tables { selector, diff, outdir } => cmd_tables(selector, *diff, outdir.as_deref()),
        Cmd::Svg { selector, outdir } => cmd_svg(selector, outdir),
        Cmd::Classify { scheme, json } => cmd_classify(scheme, *json),
        Cmd::Seed { json, seed } => cmd_seed(*json, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
