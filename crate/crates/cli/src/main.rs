//! jetbound: certified lower/upper bounds for Seshadri constants of
//! polarized toric varieties from lattice-point and rank computations.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use jetbound::cache::FileCache;
use jetbound::instance::{self, load, parse_rat_str, Instance};
use jetbound::report;
use jetbound::CliError;
use jetbound_core::bound_engine::{
    max_jet_order_capped, multipoint_seshadri_lower, seshadri_lower_bound, Config, Weights,
};
use jetbound_core::estimation_methods::{
    decomposition_bound_with, degeneration_check, lattice_change_bound, lifting_function_exists,
    LiftingResult,
};
use jetbound_core::jet_matrix::{is_full_jet_rank, jet_conditions, StaircaseIdeal};
use jetbound_core::lattice_geometry::LatticePointSet;
use jetbound_core::derive_seed;

#[derive(Parser)]
#[command(
    name = "jetbound",
    version,
    about = "Certified Seshadri-constant bounds for polarized toric varieties"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct EngineOpts {
    /// Largest dilation factor k in the sweep
    #[arg(long, default_value_t = 6)]
    k_budget: u32,
    /// Random point samples per jets tuple
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Force exact (fraction-free) ranks everywhere
    #[arg(long)]
    certify: bool,
    /// Emit a machine-readable JSON record
    #[arg(long)]
    json: bool,
    /// RNG seed (default: JETBOUND_SEED or a hash of the instance)
    #[arg(long)]
    seed: Option<u64>,
    /// Rank cache directory (default: JETBOUND_CACHE_DIR; off when unset)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Jet separation of one lattice-point set or polytope
    Jets {
        file: PathBuf,
        /// Cap on the tested jet order
        #[arg(long)]
        m_max: Option<u32>,
        /// Staircase ideal file: test rank A_{S,n} instead of the m-sweep
        #[arg(long)]
        ideal: Option<PathBuf>,
        /// Integer jet orders (with --ideal): run the degeneration check
        #[arg(long)]
        weights: Option<String>,
        #[command(flatten)]
        opts: EngineOpts,
    },
    /// One-point k-sweep bounds for s(Delta) = epsilon(X_P, L_P; 1)
    Seshadri {
        file: PathBuf,
        /// Weight tuple m1,m2,... (rationals allowed)
        #[arg(long, default_value = "1")]
        weights: String,
        /// Route through a lattice-change pullback (degree-many copies)
        #[arg(long)]
        lattice_map: Option<PathBuf>,
        #[command(flatten)]
        opts: EngineOpts,
    },
    /// Randomized multipoint lower bounds for s(Delta; mbar)
    Multi {
        file: PathBuf,
        #[arg(long, default_value = "1")]
        weights: String,
        #[command(flatten)]
        opts: EngineOpts,
    },
    /// Pullback bound s(Delta; mbar, ..., mbar) >= s(Delta'; mbar)
    LatticeChange {
        file: PathBuf,
        /// Lattice map file {"matrix": [[...]]}
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "1")]
        weights: String,
        #[command(flatten)]
        opts: EngineOpts,
    },
    /// Regular-decomposition bound via the lifting-function LP
    Decompose {
        /// Target polytope Delta
        parent_file: PathBuf,
        /// Decomposition file {"parent": ..., "pool": ..., "cells": ...}
        cells_file: PathBuf,
        /// Per-cell weight tuples, ";"-separated, "-" to skip a cell
        #[arg(long)]
        weights_per_cell: Option<String>,
        #[command(flatten)]
        opts: EngineOpts,
    },
    /// Inspect or clear the rank cache
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Entry count and location
    Stats {
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Remove all cache entries
    Clear {
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Print the resolved cache directory
    Path {
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            std::process::ExitCode::SUCCESS
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            std::process::ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            std::process::ExitCode::from(2)
        }
    }
}

fn resolve_cache_dir(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| std::env::var_os("JETBOUND_CACHE_DIR").map(PathBuf::from))
}

fn engine_config(opts: &EngineOpts, instance_bytes: &[u8]) -> Result<Config, CliError> {
    if opts.k_budget == 0 {
        return Err(CliError::Input("k budget must be at least 1".into()));
    }
    if opts.trials == 0 {
        return Err(CliError::Input("trials must be at least 1".into()));
    }
    let seed = match opts.seed {
        Some(s) => s,
        None => match std::env::var("JETBOUND_SEED") {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|_| CliError::Input(format!("JETBOUND_SEED is not a u64: {v:?}")))?,
            Err(_) => derive_seed(&[instance_bytes]),
        },
    };
    let cache = match resolve_cache_dir(&opts.cache_dir) {
        Some(dir) => {
            let fc = FileCache::open(&dir)
                .map_err(|e| CliError::Input(format!("cannot open cache dir: {e}")))?;
            Some(Arc::new(fc) as Arc<dyn jetbound_core::bound_engine::RankCache>)
        }
        None => None,
    };
    let mut cfg = Config::new()
        .with_budget(opts.k_budget)
        .with_trials(opts.trials)
        .with_certify(opts.certify)
        .with_seed(seed);
    cfg.cache = cache;
    Ok(cfg)
}

fn parse_weights(s: &str) -> Result<Weights, CliError> {
    let values = s
        .split(',')
        .map(|part| {
            parse_rat_str(part)
                .ok_or_else(|| CliError::Input(format!("cannot parse weight {part:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Weights::new(values)?)
}

fn parse_jet_orders(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Input(format!("cannot parse jet order {part:?}")))
        })
        .collect()
}

/// The target tuple for Delta must be d copies of one block; return the
/// block, which is what the pullback polytope is bounded with.
fn unrepeat_weights(target: &Weights, degree: usize) -> Result<Weights, CliError> {
    let r = target.r();
    if degree == 0 || !r.is_multiple_of(degree) {
        return Err(CliError::Input(format!(
            "weight tuple of length {r} is not {degree} copies of one block \
             (the lattice map has cover degree {degree})"
        )));
    }
    let block = r / degree;
    let values = target.values();
    for (i, v) in values.iter().enumerate() {
        if *v != values[i % block] {
            return Err(CliError::Input(format!(
                "weight tuple must repeat its first {block} entries {degree} times"
            )));
        }
    }
    Ok(Weights::new(values[..block].to_vec())?)
}

fn lattice_set_of(instance: &Instance, what: &str) -> Result<LatticePointSet, CliError> {
    match instance {
        Instance::Polytope(p) => {
            let (p, _) = p.normalize_to_nonneg();
            Ok(p.lattice_points()?)
        }
        Instance::LatticeSet(s) => Ok(s.clone()),
        other => Err(CliError::Input(format!(
            "{what} expects a polytope or lattice-set file, got {}",
            other.kind()
        ))),
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.cmd {
        Cmd::Jets { file, m_max, ideal, weights, opts } => cmd_jets(&file, m_max, ideal, weights, &opts),
        Cmd::Seshadri { file, weights, lattice_map, opts } => {
            cmd_seshadri(&file, &weights, lattice_map, &opts)
        }
        Cmd::Multi { file, weights, opts } => cmd_multi(&file, &weights, &opts),
        Cmd::LatticeChange { file, map, weights, opts } => {
            cmd_lattice_change(&file, &map, &weights, &opts)
        }
        Cmd::Decompose { parent_file, cells_file, weights_per_cell, opts } => {
            cmd_decompose(&parent_file, &cells_file, weights_per_cell.as_deref(), &opts)
        }
        Cmd::Cache { action } => cmd_cache(action),
    }
}

fn cmd_jets(
    file: &Path,
    m_max: Option<u32>,
    ideal: Option<PathBuf>,
    weights: Option<String>,
    opts: &EngineOpts,
) -> Result<String, CliError> {
    let (inst, name) = load(file)?;
    let s = lattice_set_of(&inst, "jets")?;
    let (s_norm, _) = s.normalize_to_nonneg();

    if let Some(ideal_path) = ideal {
        let (ideal_inst, _) = load(&ideal_path)?;
        let Instance::Ideal(staircase) = ideal_inst else {
            return Err(CliError::Input(format!(
                "--ideal expects an ideal file, got {}",
                ideal_inst.kind()
            )));
        };
        if let Some(orders) = weights {
            let mbar = parse_jet_orders(&orders)?;
            let out = degeneration_check(&s_norm, &staircase, &mbar)?;
            if opts.json {
                return Ok(report::value_to_string(&json!({
                    "name": name,
                    "kind": "degeneration-check",
                    "jets": mbar,
                    "colength": out.colength,
                    "rank": out.rank,
                    "separates": out.separates,
                    "certificate": out.certificate.as_ref().map(|c| {
                        c.iter().map(instance::rat_to_string).collect::<Vec<_>>()
                    }),
                })) + "\n");
            }
            let mut text = format!(
                "instance      {name}\ncolength      {}\nrank          {}\n",
                out.colength, out.rank
            );
            if out.separates {
                text.push_str(&format!(
                    "separates {mbar:?}-jets: yes (conditional on the declared flat family)\n"
                ));
            } else {
                text.push_str(&format!("separates {mbar:?}-jets: not certified\n"));
                if let Some(cert) = &out.certificate {
                    text.push_str(&format!(
                        "vanishing witness: {} = 0 on S\n",
                        report::render_certificate(cert, staircase.phi().points())
                    ));
                }
            }
            return Ok(text);
        }
        let out = is_full_jet_rank(&s_norm, &staircase)?;
        if opts.json {
            return Ok(report::value_to_string(&json!({
                "name": name,
                "kind": "ideal-rank",
                "rank": out.rank,
                "needed": out.needed,
                "full": out.full,
                "certificate": out.certificate.as_ref().map(|c| {
                    c.iter().map(instance::rat_to_string).collect::<Vec<_>>()
                }),
            })) + "\n");
        }
        let mut text = format!(
            "instance      {name}\nrank          {} of {} needed\nfull rank     {}\n",
            out.rank, out.needed, out.full
        );
        if let Some(cert) = &out.certificate {
            text.push_str(&format!(
                "vanishing witness: {} = 0 on S\n",
                report::render_certificate(cert, staircase.phi().points())
            ));
        }
        return Ok(text);
    }

    let cfg = engine_config(opts, &s_norm.canonical_bytes())?;
    let jo = max_jet_order_capped(&s_norm, &cfg, m_max)?;
    // failure witness at the boundary, when the counting bound allowed the
    // failing order to be tested at all
    let n = s_norm.ambient_dim();
    let next = u32::try_from(jo.order + 1).unwrap_or(0);
    let boundary = if !s_norm.is_empty() && jet_conditions(next, n) <= s_norm.len() {
        let out = is_full_jet_rank(&s_norm, &StaircaseIdeal::power(next, n))?;
        out.certificate.map(|c| (c, StaircaseIdeal::power(next, n)))
    } else {
        None
    };
    if opts.json {
        return Ok(report::value_to_string(&json!({
            "name": name,
            "kind": "max-jet-order",
            "max_jet_order": jo.order,
            "certified": jo.certified || opts.certify,
            "certificate": boundary.as_ref().map(|(c, _)| {
                c.iter().map(instance::rat_to_string).collect::<Vec<_>>()
            }),
        })) + "\n");
    }
    let label = if jo.certified || opts.certify { "certified" } else { "probabilistic" };
    let mut text = format!(
        "instance      {name}\npoints        {}\nmax jet order {}  [{label}]\n",
        s_norm.len(),
        jo.order
    );
    if let Some((cert, ideal)) = &boundary {
        text.push_str(&format!(
            "failure witness at m = {next}: {} = 0 on S\n",
            report::render_certificate(cert, ideal.phi().points())
        ));
    }
    Ok(text)
}

fn expect_polytope(
    inst: Instance,
    what: &str,
) -> Result<jetbound_core::lattice_geometry::RationalPolytope, CliError> {
    match inst {
        Instance::Polytope(p) => Ok(p),
        other => Err(CliError::Input(format!(
            "{what} expects a polytope file, got {}",
            other.kind()
        ))),
    }
}

fn cmd_seshadri(
    file: &Path,
    weights: &str,
    lattice_map: Option<PathBuf>,
    opts: &EngineOpts,
) -> Result<String, CliError> {
    let (inst, name) = load(file)?;
    let delta = expect_polytope(inst, "seshadri")?;
    let w = parse_weights(weights)?;
    let cfg = engine_config(opts, &delta.canonical_bytes())?;
    let res = if let Some(map_path) = lattice_map {
        let (map_inst, _) = load(&map_path)?;
        let Instance::Map(map) = map_inst else {
            return Err(CliError::Input(format!(
                "--lattice-map expects a lattice-map file, got {}",
                map_inst.kind()
            )));
        };
        let degree = degree_usize(&map)?;
        let block = unrepeat_weights(&w, degree)?;
        lattice_change_bound(&delta, &map, &block, &cfg)?
    } else if w == Weights::unit() {
        seshadri_lower_bound(&delta, &cfg)?
    } else {
        multipoint_seshadri_lower(&delta, &w, &cfg)?
    };
    if opts.json {
        return Ok(report::to_stable_json(&report::bound_json(&name, &res)) + "\n");
    }
    Ok(report::render_bound_human(&name, &res))
}

fn cmd_multi(file: &Path, weights: &str, opts: &EngineOpts) -> Result<String, CliError> {
    let (inst, name) = load(file)?;
    let delta = expect_polytope(inst, "multi")?;
    let w = parse_weights(weights)?;
    let cfg = engine_config(opts, &delta.canonical_bytes())?;
    let res = multipoint_seshadri_lower(&delta, &w, &cfg)?;
    if opts.json {
        return Ok(report::to_stable_json(&report::bound_json(&name, &res)) + "\n");
    }
    Ok(report::render_bound_human(&name, &res))
}

fn degree_usize(map: &jetbound_core::lattice_geometry::LatticeMap) -> Result<usize, CliError> {
    use num_traits::ToPrimitive;
    map.degree()
        .to_usize()
        .ok_or_else(|| CliError::Input("cover degree does not fit usize".into()))
}

fn cmd_lattice_change(
    file: &Path,
    map: &Path,
    weights: &str,
    opts: &EngineOpts,
) -> Result<String, CliError> {
    let (inst, name) = load(file)?;
    let delta = expect_polytope(inst, "lattice-change")?;
    let (map_inst, _) = load(map)?;
    let Instance::Map(map) = map_inst else {
        return Err(CliError::Input(format!(
            "--map expects a lattice-map file, got {}",
            map_inst.kind()
        )));
    };
    let w = parse_weights(weights)?;
    let cfg = engine_config(opts, &delta.canonical_bytes())?;
    let degree = degree_usize(&map)?;
    let block = unrepeat_weights(&w, degree)?;
    let res = lattice_change_bound(&delta, &map, &block, &cfg)?;
    if opts.json {
        return Ok(report::to_stable_json(&report::bound_json(&name, &res)) + "\n");
    }
    let mut text = report::render_bound_human(&name, &res);
    text.push_str(&format!("cover degree  {}\n", map.degree()));
    Ok(text)
}

fn cmd_decompose(
    parent_file: &Path,
    cells_file: &Path,
    weights_per_cell: Option<&str>,
    opts: &EngineOpts,
) -> Result<String, CliError> {
    let (delta_inst, delta_name) = load(parent_file)?;
    let delta = expect_polytope(delta_inst, "decompose")?;
    let (dec_inst, dec_name) = load(cells_file)?;
    let Instance::Decomposition(dec) = dec_inst else {
        return Err(CliError::Input(format!(
            "decomposition file expected, got {}",
            dec_inst.kind()
        )));
    };
    let cells = dec.cells().len();
    let selected = match weights_per_cell {
        None => (0..cells)
            .map(|i| Ok((i, Weights::unit())))
            .collect::<Result<Vec<_>, CliError>>()?,
        Some(entries) => {
            let parts: Vec<&str> = entries.split(';').collect();
            if parts.len() != cells {
                return Err(CliError::Input(format!(
                    "--weights-per-cell has {} entries for {} cells",
                    parts.len(),
                    cells
                )));
            }
            parts
                .iter()
                .enumerate()
                .filter(|(_, p)| p.trim() != "-")
                .map(|(i, p)| Ok((i, parse_weights(p)?)))
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };
    if selected.is_empty() {
        return Err(CliError::Input("no cells selected".into()));
    }

    let mut bytes = delta.canonical_bytes();
    for c in dec.cells() {
        bytes.extend_from_slice(&c.canonical_bytes());
    }
    let cfg = engine_config(opts, &bytes)?;

    let vd = match dec.validate()? {
        jetbound_core::estimation_methods::ValidationOutcome::Valid(vd) => *vd,
        jetbound_core::estimation_methods::ValidationOutcome::Invalid(v) => {
            return Err(CliError::Input(format!("invalid decomposition: {v}")))
        }
    };
    let witness = match lifting_function_exists(&vd)? {
        LiftingResult::Witness(w) => *w,
        LiftingResult::NonRegular(cert) => {
            let summary = cert
                .multipliers
                .iter()
                .map(instance::rat_to_string)
                .collect::<Vec<_>>()
                .join(", ");
            return Err(CliError::Input(format!(
                "decomposition is non-regular: lifting LP infeasible; Farkas multipliers [{summary}]"
            )));
        }
    };
    let out = decomposition_bound_with(&delta, &vd, witness, &selected, &cfg)?;

    if opts.json {
        let per_cell: Vec<_> = out
            .per_cell
            .iter()
            .map(|(idx, b)| {
                json!({
                    "cell": idx,
                    "bound": serde_json::to_value(report::bound_json(&format!("cell-{idx}"), b))
                        .expect("serializable"),
                })
            })
            .collect();
        let witness_json = json!({
            "scale": out.witness.scale().to_string(),
            "affine": out
                .witness
                .affine()
                .iter()
                .map(|(a, b)| json!({
                    "a": a.iter().map(instance::rat_to_string).collect::<Vec<_>>(),
                    "b": instance::rat_to_string(b),
                }))
                .collect::<Vec<_>>(),
        });
        return Ok(report::value_to_string(&json!({
            "name": dec_name,
            "delta": delta_name,
            "valid": true,
            "regular": true,
            "witness": witness_json,
            "per_cell": per_cell,
            "result": serde_json::to_value(report::bound_json(&dec_name, &out.result))
                .expect("serializable"),
        })) + "\n");
    }

    let mut text = format!("decomposition {dec_name}: valid, regular\n");
    text.push_str(&report::render_witness_human(&vd, &out)?);
    for (idx, b) in &out.per_cell {
        text.push_str(&format!(
            "cell {idx}: lower {}  (k = {}, m = {})\n",
            instance::rat_to_string(&b.lower),
            b.k_used,
            b.m_achieved
        ));
    }
    text.push_str(&report::render_bound_human(&delta_name, &out.result));
    Ok(text)
}

fn cmd_cache(action: CacheAction) -> Result<String, CliError> {
    let open = |dir: &Option<PathBuf>| -> Result<FileCache, CliError> {
        let dir = resolve_cache_dir(dir).ok_or_else(|| {
            CliError::Input("no cache directory (set --cache-dir or JETBOUND_CACHE_DIR)".into())
        })?;
        FileCache::open(&dir).map_err(|e| CliError::Input(format!("cannot open cache dir: {e}")))
    };
    match action {
        CacheAction::Stats { cache_dir } => {
            let cache = open(&cache_dir)?;
            Ok(format!(
                "cache dir     {}\nentries       {}\n",
                cache.dir().display(),
                cache.entry_count()
            ))
        }
        CacheAction::Clear { cache_dir } => {
            let cache = open(&cache_dir)?;
            let removed = cache.clear().map_err(|e| CliError::Input(e.to_string()))?;
            Ok(format!("removed {removed} entries\n"))
        }
        CacheAction::Path { cache_dir } => {
            let cache = open(&cache_dir)?;
            Ok(format!("{}\n", cache.dir().display()))
        }
    }
}
