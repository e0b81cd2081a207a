use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use torusiso::bgq::{
    builtin_machine, midplanes_for_nodes, partition_bisection_bw, MachineSpec, PartitionGeometry,
    NODES_PER_MIDPLANE,
};
use torusiso::golden::{self, Mismatch};
use torusiso::isoperimetry::{bound_general_torus, hypercube_min_perimeter, BoundResult};
use torusiso::oracle::{brute_force_with, OracleOptions, OracleResult};
use torusiso::policy::{
    audit, best_geometry, builtin_policy, compare_machines, default_sizes, enumerate_geometries,
    realizable_sizes, union_of_sizes, worst_geometry, PolicySpec,
};
use torusiso::report::{
    audit_table, comparison_table, render, simulation_table, BandwidthUnit, Format,
    SimulationReport, Table,
};
use torusiso::sim::{simulate_many, TrafficSpec};
use torusiso::{canonicalize, Error, Execution, TorusShape};

use crate::{
    AuditArgs, BoundArgs, Cli, Command, CompareArgs, GeometriesArgs, OracleArgs, ShapeArgs,
    SimulateArgs, SizeArgs,
};

pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } => EXIT_USAGE,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_DOMAIN,
        };
        let mut message = e.to_string();
        if let Error::BudgetExceeded {
            best: Some(best), ..
        } = &e
        {
            message.push_str(&format!(
                "; best perimeter seen {} (not certified minimal), witness {:?}",
                best.min_perimeter, best.witness
            ));
        }
        Failure { code, message }
    }
}

type Outcome = Result<ExitCode, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let format: Format = cli.format.into();
    let (text, code) = match &cli.command {
        Command::Bound(a) => (bound(a, format)?, ExitCode::SUCCESS),
        Command::Oracle(a) => (oracle(a, format)?, ExitCode::SUCCESS),
        Command::Geometries(a) => (geometries(a, format)?, ExitCode::SUCCESS),
        Command::Audit(a) => audit_cmd(a, format)?,
        Command::Compare(a) => compare(a, format)?,
        Command::Simulate(a) => (simulate(a, format)?, ExitCode::SUCCESS),
    };
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", path.display()),
        })?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// A builtin machine name, or else a machine file.
fn resolve_machine(source: &str) -> Result<MachineSpec, Failure> {
    if let Some(m) = builtin_machine(source) {
        return Ok(m);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Failure::usage(format!(
            "{source:?} is neither a builtin machine nor a file"
        )));
    }
    Ok(MachineSpec::parse(&read_file(path)?)?)
}

fn resolve_policy(source: &str) -> Result<PolicySpec, Failure> {
    if let Some(p) = builtin_policy(source) {
        return Ok(p);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Failure::usage(format!(
            "{source:?} is neither a builtin policy nor a file"
        )));
    }
    let name = path
        .file_stem()
        .map_or(source.into(), |s| s.to_string_lossy().into_owned());
    Ok(PolicySpec::parse(name, &read_file(path)?)?)
}

fn shape_of(args: &ShapeArgs) -> Result<TorusShape, Failure> {
    Ok(canonicalize(&args.dims)?.with_length2_multiplicity(args.length2_multiplicity)?)
}

fn requested_sizes(args: &SizeArgs) -> Result<Vec<u64>, Failure> {
    if !args.nodes.is_empty() {
        return args
            .nodes
            .iter()
            .map(|&n| Ok(midplanes_for_nodes(n)?))
            .collect();
    }
    Ok(args.sizes.clone())
}

fn execution(workers: Option<usize>) -> Result<(Execution, Option<rayon::ThreadPool>), Failure> {
    match workers {
        Some(0) => Err(Failure::usage("--workers must be at least 1")),
        Some(1) => Ok((Execution::Sequential, None)),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::usage(format!("cannot start {n} workers: {e}")))?;
            Ok((Execution::Parallel, Some(pool)))
        }
        None => Ok((Execution::Parallel, None)),
    }
}

fn in_pool<R: Send>(pool: Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// Single-record output: `key: value` lines in text, one header row plus
/// one data row in CSV.
fn record<T: Serialize>(format: Format, fields: &[(&str, Option<String>)], document: &T) -> String {
    if format == Format::Text {
        let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        return fields
            .iter()
            .map(|(k, v)| format!("{k:<width$}  {}\n", v.as_deref().unwrap_or("-")))
            .collect();
    }
    let table = Table {
        headers: fields.iter().map(|(k, _)| k.to_string()).collect(),
        rows: vec![fields.iter().map(|(_, v)| v.clone()).collect()],
    };
    render(format, &table, document)
}

/// The bound is derived for regular tori; a simple graph with length-2
/// rings is not regular in that sense, so the bound need not hold there.
fn bound_applies(shape: &TorusShape) -> bool {
    !shape.has_single_length2_edges()
}

#[derive(Serialize)]
struct BoundReport {
    shape: TorusShape,
    t: u64,
    bound: BoundResult,
    attaining_cut: Option<u64>,
    applies_to_arbitrary_cuboids: bool,
}

fn bound(args: &BoundArgs, format: Format) -> Result<String, Failure> {
    let shape = shape_of(&args.shape)?;
    let t = args.shape.t;
    let b = bound_general_torus(&shape, t)?;
    let report = BoundReport {
        shape: shape.clone(),
        t,
        attaining_cut: b.attaining_cuboid.as_ref().map(|c| c.cut_size()),
        applies_to_arbitrary_cuboids: bound_applies(&shape),
        bound: b,
    };
    let b = &report.bound;
    let fields = [
        ("shape", Some(shape.to_string())),
        (
            "length2_multiplicity",
            Some(shape.length2_multiplicity().to_string()),
        ),
        ("t", Some(t.to_string())),
        ("value", Some(fmt_bound(b))),
        ("exact", Some(b.exact_value.is_some().to_string())),
        ("argmin_r", Some(b.argmin_r.to_string())),
        ("covered_product", Some(b.covered_product.to_string())),
        (
            "attaining_cuboid",
            b.attaining_cuboid.as_ref().map(|c| join_sides(c.sides())),
        ),
        ("attaining_cut", report.attaining_cut.map(|c| c.to_string())),
        (
            "bound_applicable",
            Some(report.applies_to_arbitrary_cuboids.to_string()),
        ),
    ];
    Ok(record(format, &fields, &report))
}

fn fmt_bound(b: &BoundResult) -> String {
    match b.exact_value {
        Some(v) => v.to_string(),
        None => format!("{:.6}", b.value),
    }
}

fn join_sides(sides: &[u32]) -> String {
    sides
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

#[derive(Serialize)]
struct OracleReport {
    shape: TorusShape,
    t: u64,
    result: OracleResult,
    bound: BoundResult,
    bound_applicable: bool,
    hypercube_formula: Option<u64>,
    verdict: String,
}

fn oracle(args: &OracleArgs, format: Format) -> Result<String, Failure> {
    let shape = shape_of(&args.shape)?;
    let t = args.shape.t;
    let (exec, pool) = execution(args.workers)?;
    let opts = OracleOptions {
        budget: args.budget,
        prune_translations: !args.no_prune,
        execution: exec,
    };
    let result = in_pool(pool, || brute_force_with(&shape, t, &opts))?;
    let bound = bound_general_torus(&shape, t)?;
    let applicable = bound_applies(&shape);
    let verdict = if bound.attained_by(result.min_perimeter) {
        "attained"
    } else if bound.violated_by(result.min_perimeter) {
        if applicable {
            "below bound (counterexample)"
        } else {
            "below bound (bound not applicable)"
        }
    } else {
        "above bound"
    };
    let hypercube_formula = if shape.dims().iter().all(|&a| a == 2) {
        Some(
            hypercube_min_perimeter(shape.rank() as u32, t)?
                * u64::from(shape.length2_multiplicity()),
        )
    } else {
        None
    };
    let report = OracleReport {
        shape: shape.clone(),
        t,
        result,
        bound,
        bound_applicable: applicable,
        hypercube_formula,
        verdict: verdict.into(),
    };
    let fields = [
        ("shape", Some(shape.to_string())),
        (
            "length2_multiplicity",
            Some(shape.length2_multiplicity().to_string()),
        ),
        ("t", Some(t.to_string())),
        (
            "min_perimeter",
            Some(report.result.min_perimeter.to_string()),
        ),
        (
            "witness",
            Some(
                report
                    .result
                    .witness
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        ),
        (
            "subsets_examined",
            Some(report.result.subsets_examined.to_string()),
        ),
        ("bound", Some(fmt_bound(&report.bound))),
        ("bound_applicable", Some(applicable.to_string())),
        (
            "hypercube_formula",
            hypercube_formula.map(|h| h.to_string()),
        ),
        ("verdict", Some(report.verdict.clone())),
    ];
    Ok(record(format, &fields, &report))
}

#[derive(Serialize)]
struct GeometryRow {
    nodes: u64,
    midplanes: u64,
    rank: usize,
    geometry: PartitionGeometry,
    bw: u64,
}

#[derive(Serialize)]
struct GeometryListing {
    machine: MachineSpec,
    geometries: Vec<GeometryRow>,
}

fn geometries(args: &GeometriesArgs, format: Format) -> Result<String, Failure> {
    let machine = resolve_machine(&args.machine)?;
    let mut sizes = requested_sizes(&args.sizes)?;
    if sizes.is_empty() {
        sizes = realizable_sizes(&machine);
    }
    let mut rows = Vec::new();
    for s in sizes {
        let found = enumerate_geometries(&machine, s);
        if found.is_empty() {
            return Err(Error::NoGeometry {
                machine: machine.name.clone(),
                midplanes: s,
            }
            .into());
        }
        rows.extend(found.into_iter().enumerate().map(|(i, g)| GeometryRow {
            nodes: s * NODES_PER_MIDPLANE,
            midplanes: s,
            rank: i + 1,
            bw: partition_bisection_bw(&g),
            geometry: g,
        }));
    }
    let unit = args.bandwidth.unit();
    let table = Table {
        headers: ["nodes", "midplanes", "rank", "geometry", "bw"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                let bw = match unit {
                    BandwidthUnit::Links => r.bw.to_string(),
                    BandwidthUnit::Gbps => (r.bw as f64 * machine.link_capacity_gbps).to_string(),
                };
                vec![
                    Some(r.nodes.to_string()),
                    Some(r.midplanes.to_string()),
                    Some(r.rank.to_string()),
                    Some(r.geometry.to_string()),
                    Some(bw),
                ]
            })
            .collect(),
    };
    Ok(render(
        format,
        &table,
        &GeometryListing {
            machine,
            geometries: rows,
        },
    ))
}

fn report_mismatches(mismatches: &[Mismatch], what: &str) -> ExitCode {
    if mismatches.is_empty() {
        eprintln!("{what}: all entries match the reference table");
        ExitCode::SUCCESS
    } else {
        for m in mismatches {
            eprintln!("mismatch: {m}");
        }
        eprintln!("{what}: {} mismatches", mismatches.len());
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn is_builtin(machine: &MachineSpec, name: &str) -> bool {
    builtin_machine(name).as_ref() == Some(machine)
}

fn audit_cmd(args: &AuditArgs, format: Format) -> Result<(String, ExitCode), Failure> {
    let machine = resolve_machine(&args.machine)?;
    let policy = resolve_policy(&args.policy)?;
    let mut sizes = requested_sizes(&args.sizes)?;
    if args.all_sizes {
        sizes = realizable_sizes(&machine);
    } else if sizes.is_empty() {
        sizes = default_sizes(&machine, &policy);
    }
    let report = audit(&machine, &policy, &sizes)?;
    let text = render(
        format,
        &audit_table(&report, args.bandwidth.unit()),
        &report,
    );
    let mut code = ExitCode::SUCCESS;
    if args.check_paper {
        let mismatches = if is_builtin(&machine, "mira")
            && policy == builtin_policy("mira-2017").expect("builtin")
        {
            golden::check_mira()?
        } else if is_builtin(&machine, "juqueen")
            && policy.mode == torusiso::policy::PolicyMode::AnyFittingCuboid
        {
            golden::check_juqueen()?
        } else {
            return Err(Failure::usage(
                "reference tables exist for `--machine mira --policy mira-2017` and `--machine juqueen --policy any`",
            ));
        };
        code = report_mismatches(&mismatches, &format!("{} / {}", machine.name, policy.name));
    }
    Ok((text, code))
}

fn compare(args: &CompareArgs, format: Format) -> Result<(String, ExitCode), Failure> {
    let machines = args
        .machines
        .iter()
        .map(|m| resolve_machine(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sizes = requested_sizes(&args.sizes)?;
    if sizes.is_empty() {
        sizes = union_of_sizes(&machines);
    }
    let cmp = compare_machines(&machines, &sizes)?;
    let text = render(format, &comparison_table(&cmp, args.bandwidth.unit()), &cmp);
    let mut code = ExitCode::SUCCESS;
    if args.check_paper {
        let family = golden::JUQUEEN_FAMILY
            .iter()
            .map(|n| builtin_machine(n).expect("builtin"));
        if !machines.iter().cloned().eq(family) {
            return Err(Failure::usage(
                "the reference comparison covers juqueen,juqueen-54,juqueen-48",
            ));
        }
        code = report_mismatches(&golden::check_juqueen_family()?, "JUQUEEN family");
    }
    Ok((text, code))
}

fn simulate(args: &SimulateArgs, format: Format) -> Result<String, Failure> {
    let machine = resolve_machine(&args.machine)?;
    let traffic = TrafficSpec {
        rounds_total: args.rounds,
        warmup_rounds: args.warmup,
        message_gb: args.message_gb,
        link_gbps: args.link_gbps.unwrap_or(machine.link_capacity_gbps),
    };
    traffic.validate()?;
    let geometries: Vec<PartitionGeometry> = match args.size {
        Some(size) => {
            let worst = worst_geometry(&machine, size)?;
            let best = best_geometry(&machine, size)?;
            if worst == best {
                vec![best]
            } else {
                vec![worst, best]
            }
        }
        None => args
            .geometry
            .iter()
            .map(|g| {
                g.parse::<PartitionGeometry>()
                    .map_err(|e| Failure::usage(e.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };
    let (exec, pool) = execution(args.workers)?;
    let results = in_pool(pool, || simulate_many(&geometries, &traffic, exec))?;
    let runs: Vec<(String, _)> = geometries
        .iter()
        .map(|g| g.to_string())
        .zip(results)
        .collect();
    let report = SimulationReport::new(traffic, &runs);
    let mut text = render(format, &simulation_table(&report), &report);
    if format == Format::Text {
        for note in &report.notes {
            text.push_str(&format!("note: {note}\n"));
        }
    }
    Ok(text)
}
