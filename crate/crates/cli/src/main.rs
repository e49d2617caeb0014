use std::collections::BTreeSet;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use adrefine_core::adfam::{fin_upgrade, greedy_adr, RefinementAssignment};
use adrefine_core::catalog::{diagnostics, IdealHandle};
use adrefine_core::coding::{decode, encode, parse_object};
use adrefine_core::forcing::{generic_run, DenseRequest, DEFAULT_BLOCK_BUDGET};
use adrefine_core::meager::{domination_report, dominate, talagrand_witness, verify_talagrand};
use adrefine_core::mixing::{
    antimix_pair, antimix_verify, measure_bound, mixing_report, nest, slalom_avoid, slalom_check, slalom_check_strict,
    splitting_report, GroundFamily, Slalom,
};
use adrefine_core::parse::{parse_partition_list, parse_set, parse_set_list};
use adrefine_core::reduce::{self, ClopenCode, TreeCode};
use adrefine_core::{rado, Coding, Error, FunctionWindow, HomKind, MapExpr, Result, SetExpr};

#[derive(Parser)]
#[command(name = "adrefine", version, about = "Ideals on ω, almost disjoint refinements and their finite combinatorics")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Three-valued membership of a set in an ideal.
    Member {
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Windowed statistics of a set relative to an ideal.
    Diag {
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 256)]
        horizon: u64,
    },
    /// The Talagrand partition of an ideal, with block checks of samples.
    Talagrand {
        #[arg(long)]
        ideal: String,
        /// `;`-separated sample sets.
        #[arg(long)]
        samples: Option<String>,
        /// Number of blocks checked.
        #[arg(long, default_value_t = 30)]
        horizon: u64,
    },
    /// A partition dominating the given ones.
    Dominate {
        /// `;`-separated partitions.
        #[arg(long)]
        partitions: String,
        /// Blocks of the result to certify.
        #[arg(long, default_value_t = 8)]
        horizon: u64,
    },
    /// Almost disjoint refinements: greedy, finite upgrade, forcing run.
    #[command(subcommand)]
    Adr(AdrCommand),
    /// Mixing and splitting checks, anti-mixing pairs, slaloms, measure bounds.
    #[command(subcommand)]
    Mix(MixCommand),
    /// Tree codings, clopen sets and the rectangle search.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// The Rado graph: edges, witnesses, homogeneous sets.
    #[command(subcommand)]
    Rado(RadoCommand),
    /// Encode an object under a coding, or decode a code.
    Encode {
        #[arg(long)]
        coding: String,
        #[arg(long, conflicts_with = "decode")]
        object: Option<String>,
        #[arg(long)]
        decode: Option<u64>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    ideal: String,
    /// `;`-separated target sets.
    #[arg(long)]
    family: String,
    /// Branch words tried per target.
    #[arg(long, default_value_t = 8)]
    budget: usize,
}

#[derive(Subcommand)]
enum AdrCommand {
    /// Greedy refinement by blown-up branches.
    Greedy(FamilyArgs),
    /// Greedy refinement followed by the pseudo-union upgrade.
    Upgrade {
        #[command(flatten)]
        family: FamilyArgs,
        /// `;`-separated chosen sets replacing the greedy step.
        #[arg(long)]
        chosen: Option<String>,
        #[arg(long, default_value_t = 1024)]
        horizon: u64,
    },
    /// A generic descending chain meeting dense requests.
    Forcing {
        #[arg(long)]
        ideal: String,
        #[arg(long)]
        family: String,
        /// `;`-separated requests: `touch α` or `block α N`.
        #[arg(long)]
        requests: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum MixCommand {
    /// Image counts of a function on a ground family.
    Check {
        #[arg(long)]
        f: String,
        #[arg(long)]
        ground: String,
        #[arg(long, default_value_t = 256)]
        horizon: u64,
    },
    /// The anti-mixing pair for a strictly increasing g.
    Pair {
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Bound for the admissible-injection search.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Avoid a random seeded slalom, or one read from a JSON file.
    Slalom {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long)]
        file: Option<String>,
    },
    /// Nest splittings `A0 | A1; B0 | B1; …` into n parts.
    Nest {
        #[arg(long)]
        pairs: String,
        #[arg(long)]
        ground: Option<String>,
        #[arg(long, default_value_t = 256)]
        horizon: u64,
    },
    /// Exact ε and ε^k for the random-function measure bound.
    MeasureBound {
        #[arg(long = "Y")]
        y: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Prime-power image of a tree; nodes separated by `;` or newlines,
    /// closed under prefixes.
    Jtree {
        #[arg(long)]
        tree: String,
    },
    /// Range-clique edges of a tree, optionally checking one set X.
    Edges {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        x: Option<String>,
    },
    /// Pair set of a clopen code below the horizon.
    Clopen {
        /// `d:mask`, `w|w'|…`, `empty` or `full`.
        #[arg(long)]
        clopen: String,
        #[arg(long, default_value_t = 8)]
        horizon: u64,
    },
    /// Rectangle search on X×Y below a bound.
    I0 {
        /// `empty`, `full`, `upper`, `lower`, `random` or `m,n;m,n;…`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 32)]
        horizon: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum RadoCommand {
    /// Whether m and n are adjacent.
    Edge {
        m: u64,
        n: u64,
    },
    /// A vertex joined to all of A and none of B.
    Witness {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// A homogeneous set of the given kind and size.
    Hom {
        #[arg(long, value_parser = ["clique", "independent"])]
        kind: String,
        #[arg(long)]
        n: usize,
    },
}

fn to_value<T: serde::Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| Error::Io(e.to_string()))
}

fn ideal(src: &str) -> Result<IdealHandle> {
    IdealHandle::parse(src)
}

fn set_window(s: &SetExpr, h: u64) -> Result<Value> {
    Ok(json!({ "expr": s.to_string(), "horizon": h, "window": s.window(h)? }))
}

fn naturals(src: &str) -> Result<BTreeSet<u64>> {
    src.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| Error::Malformed(format!("'{s}' is not a natural"))))
        .collect()
}

fn map_window(src: &str, h: u64) -> Result<FunctionWindow> {
    FunctionWindow::from_map(&MapExpr::parse(src)?, h)
}

fn run(cmd: Command) -> Result<Value> {
    match cmd {
        Command::Member { ideal: i, set, horizon } => {
            let i = ideal(&i)?;
            let s = parse_set(&set)?;
            let v = match horizon {
                Some(h) => i.member_at(&s, h)?,
                None => i.member(&s)?,
            };
            let mut out = to_value(&v)?;
            out["ideal"] = json!(i.to_string());
            out["set"] = json!(s.to_string());
            Ok(out)
        }
        Command::Diag { ideal: i, set, horizon } => to_value(&diagnostics(&ideal(&i)?, &parse_set(&set)?, horizon)?),
        Command::Talagrand { ideal: i, samples, horizon } => {
            let i = ideal(&i)?;
            let p = talagrand_witness(&i)?;
            let samples = match samples {
                Some(s) => parse_set_list(&s)?,
                None => Vec::new(),
            };
            let report = verify_talagrand(&p, &i, &samples, horizon)?;
            Ok(json!({ "partition": p.to_string(), "report": to_value(&report)? }))
        }
        Command::Dominate { partitions, horizon } => {
            let ps = parse_partition_list(&partitions)?;
            let r = dominate(&ps)?;
            let records = domination_report(&r, &ps, horizon)?;
            Ok(json!({ "partition": r.to_string(), "horizon": horizon, "records": to_value(&records)? }))
        }
        Command::Adr(c) => run_adr(c),
        Command::Mix(c) => run_mix(c),
        Command::Reduce(c) => run_reduce(c),
        Command::Rado(c) => run_rado(c),
        Command::Encode { coding, object, decode: code } => {
            let c = Coding::from_name(&coding).ok_or_else(|| Error::Malformed(format!("unknown coding '{coding}'")))?;
            match (object, code) {
                (Some(o), _) => {
                    let obj = parse_object(c, &o)?;
                    Ok(json!({ "coding": c.name(), "object": obj.to_string(), "code": encode(c, &obj)? }))
                }
                (None, Some(n)) => {
                    let obj = decode(c, n)?;
                    Ok(json!({ "coding": c.name(), "code": n, "object": obj.to_string() }))
                }
                (None, None) => Err(Error::Precondition("give --object or --decode".into())),
            }
        }
    }
}

fn adr_value(adr: &RefinementAssignment) -> Result<Value> {
    serde_json::from_str(&adr.to_json()?).map_err(|e| Error::Io(e.to_string()))
}

fn run_adr(cmd: AdrCommand) -> Result<Value> {
    match cmd {
        AdrCommand::Greedy(f) => adr_value(&greedy_adr(&ideal(&f.ideal)?, &parse_set_list(&f.family)?, f.budget)?),
        AdrCommand::Upgrade { family: f, chosen, horizon } => {
            let i = ideal(&f.ideal)?;
            let targets = parse_set_list(&f.family)?;
            let adr = match chosen {
                Some(c) => RefinementAssignment::from_sets(&i, &targets, &parse_set_list(&c)?, horizon)?,
                None => greedy_adr(&i, &targets, f.budget)?,
            };
            adr_value(&fin_upgrade(&i, &adr)?)
        }
        AdrCommand::Forcing { ideal: i, family, requests, seed, budget } => {
            let requests = requests
                .split(';')
                .map(str::trim)
                .filter(|r| !r.is_empty())
                .map(DenseRequest::parse)
                .collect::<Result<Vec<_>>>()?;
            let run = generic_run(&parse_set_list(&family)?, &ideal(&i)?, &requests, seed, budget)?;
            let lines = run
                .transcript()?
                .lines()
                .map(|l| serde_json::from_str(l).map_err(|e| Error::Io(e.to_string())))
                .collect::<Result<Vec<Value>>>()?;
            let last: Vec<Value> = run.last().0.iter().map(|(a, s)| json!({ "index": a, "set": s })).collect();
            Ok(json!({ "transcript": lines, "final": last, "freezes": to_value(&run.freezes)? }))
        }
    }
}

fn run_mix(cmd: MixCommand) -> Result<Value> {
    match cmd {
        MixCommand::Check { f, ground, horizon } => {
            let g = GroundFamily::new(parse_set_list(&ground)?, horizon)?;
            to_value(&mixing_report(&map_window(&f, horizon)?, &g, horizon)?)
        }
        MixCommand::Pair { g, k, horizon } => {
            let mut h = 64u64;
            let (xs, ys) = loop {
                match antimix_pair(&map_window(&g, h)?, k) {
                    Ok(p) => break p,
                    Err(_) if h < 1 << 22 => h *= 4,
                    Err(e) => return Err(e),
                }
            };
            let bound = horizon.unwrap_or_else(|| xs.iter().chain(&ys).max().map_or(0, |m| m + 1));
            let window = map_window(&g, bound.max(h).max(ys.iter().max().map_or(0, |m| m + 1)))?;
            let report = antimix_verify(&window, &xs, &ys, bound)?;
            Ok(json!({ "x": xs, "y": ys, "horizon": bound, "report": to_value(&report)? }))
        }
        MixCommand::Slalom { seed, depth, file } => {
            let s = match file {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                    serde_json::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?
                }
                None => Slalom::random(seed, depth),
            };
            let run = slalom_avoid(&s, depth)?;
            let ok = slalom_check(&s, &run.xs, &run.ys, depth);
            if !ok {
                return Err(Error::Verification("slalom output meets a level it should avoid".into()));
            }
            Ok(json!({
                "a": s.a,
                "run": to_value(&run)?,
                "check": ok,
                "strict_check": slalom_check_strict(&s, &run.xs, &run.ys, depth),
            }))
        }
        MixCommand::Nest { pairs, ground, horizon } => {
            let ps = pairs
                .split(';')
                .map(|p| {
                    let (a, b) = p.split_once('|').ok_or_else(|| Error::Malformed(format!("'{p}' is not 'A | B'")))?;
                    Ok((parse_set(a)?, parse_set(b)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let parts = nest(&ps, ps.len() + 1)?;
            let windows = parts.iter().map(|p| set_window(p, horizon)).collect::<Result<Vec<_>>>()?;
            let mut out = json!({ "parts": windows });
            if let Some(g) = ground {
                let g = GroundFamily::new(parse_set_list(&g)?, horizon)?;
                out["splitting"] = to_value(&splitting_report(&parts, &g, horizon)?)?;
            }
            Ok(out)
        }
        MixCommand::MeasureBound { y, n, k } => to_value(&measure_bound(&parse_set(&y)?, n, k)?),
    }
}

fn pair_set(src: &str, b: u64, seed: u64) -> Result<BTreeSet<(u64, u64)>> {
    let all = (0..b).flat_map(|m| (0..b).map(move |n| (m, n)));
    Ok(match src.trim() {
        "empty" => BTreeSet::new(),
        "full" => all.collect(),
        "upper" => all.filter(|(m, n)| m < n).collect(),
        "lower" => all.filter(|(m, n)| m > n).collect(),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.filter(|_| rng.gen_bool(0.5)).collect()
        }
        list => list
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let v: Vec<u64> = naturals(p)?.into_iter().collect();
                let t: Vec<&str> = p.split(',').collect();
                match (t.len(), v.as_slice()) {
                    (2, [a, c]) => Ok((*a, *c)),
                    (2, [a]) => Ok((*a, *a)),
                    _ => Err(Error::Malformed(format!("'{p}' is not a pair m,n"))),
                }
            })
            .collect::<Result<_>>()?,
    })
}

fn run_reduce(cmd: ReduceCommand) -> Result<Value> {
    match cmd {
        ReduceCommand::Jtree { tree } => {
            let t = TreeCode::from_leaves(reduce::parse_nodes(&tree)?);
            let j = reduce::j_tree(&t)?;
            let nodes: Vec<Value> = t
                .nodes
                .iter()
                .map(|s| Ok(json!({ "node": s, "image": reduce::j_node(s)? })))
                .collect::<Result<_>>()?;
            let ambiguous: Vec<Value> =
                j.ambiguous_values().into_iter().map(|(v, ns)| json!({ "value": v, "minimal_nodes": ns })).collect();
            Ok(json!({
                "nodes": nodes,
                "in_tree_prime": j.in_tree_prime,
                "depth": t.depth(),
                "image_depth": j.depth(),
                "ambiguous_values": ambiguous,
            }))
        }
        ReduceCommand::Edges { tree, x } => {
            let t = TreeCode::from_leaves(reduce::parse_nodes(&tree)?);
            let e = reduce::edge_graph(&t);
            let mut out = json!({
                "edges": e.0.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
                "max_clique": e.max_clique(),
                "depth": t.depth(),
                "in_tree_prime": t.in_tree_prime,
            });
            if let Some(x) = x {
                let (clique, node) = reduce::clique_iff_node(&t, &naturals(&x)?)?;
                if clique != node {
                    return Err(Error::Verification("clique and node answers differ".into()));
                }
                out["clique"] = json!(clique);
                out["node"] = json!(node);
            }
            Ok(out)
        }
        ReduceCommand::Clopen { clopen, horizon } => {
            let c = ClopenCode::parse(&clopen)?;
            let pairs = reduce::clopen_to_aset(&c, horizon);
            Ok(json!({
                "clopen": c.to_string(),
                "cylinders": c.cylinders(),
                "measure": adrefine_core::weight::fmt_rational(&c.measure()),
                "horizon": horizon,
                "pairs": pairs.iter().map(|&(m, n)| [m, n]).collect::<Vec<_>>(),
            }))
        }
        ReduceCommand::I0 { a, x, y, horizon, seed } => {
            let a = pair_set(&a, horizon, seed)?;
            let xs: BTreeSet<u64> = parse_set(&x)?.window(horizon)?.into_iter().collect();
            let ys: BTreeSet<u64> = parse_set(&y)?.window(horizon)?.into_iter().collect();
            let o = reduce::i0_search(&a, &xs, &ys)?;
            let mut out = to_value(&o)?;
            out["horizon"] = json!(horizon);
            Ok(out)
        }
    }
}

fn run_rado(cmd: RadoCommand) -> Result<Value> {
    match cmd {
        RadoCommand::Edge { m, n } => Ok(json!({ "m": m, "n": n, "edge": rado::edge(m, n) })),
        RadoCommand::Witness { a, b } => {
            let (a, b) = (naturals(&a)?, naturals(&b)?);
            let n = rado::witness(&a, &b)?;
            Ok(json!({ "a": a, "b": b, "witness": n }))
        }
        RadoCommand::Hom { kind, n } => {
            let kind = if kind == "clique" { HomKind::Clique } else { HomKind::Independent };
            let set = rado::homogeneous(kind, n)?;
            if let Some(p) = rado::homogeneity_violation(kind, &set) {
                return Err(Error::Verification(format!("pair {p:?} breaks homogeneity")));
            }
            Ok(json!({ "kind": kind.name(), "set": set }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(v) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string(&v),
                Format::Pretty => serde_json::to_string_pretty(&v),
            };
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{}", text.expect("JSON values serialize")) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_internal() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
