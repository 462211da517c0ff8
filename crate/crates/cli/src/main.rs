//! Command-line surface for the `freeboundary` library: every computation
//! reads a JSON payload (stdin or flags), writes deterministic JSON to
//! stdout, and signals decision outcomes through exit codes.
//!
//! Exit codes: `0` success, `2` invalid input, `3` resource cap exceeded,
//! `4` a computed negative decision (inequivalent, absent witness,
//! uncertified) — distinguishable from errors by the valid JSON response.

use std::io::Read;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use freeboundary::boundary::{theta_set, ClopenSet};
use freeboundary::classify::{classify_gammas, GammaSpec};
use freeboundary::dynsys::{
    check_minimality_finite_level, pv_kernel_rank, tower_level_graph, FiniteLevelSystem,
    OdometerTowerSpec,
};
use freeboundary::ktheory::{connecting_divisors, DiagonalK0};
use freeboundary::subgrp::{SchreierBasis, SchreierGraph};
use freeboundary::supernat::{lambda_iso, seq_equiv, upsilon_iso, SupernaturalNumber};
use freeboundary::Error as CoreError;

const EXIT_OK: i32 = 0;
const EXIT_INVALID: i32 = 2;
const EXIT_CAP: i32 = 3;
const EXIT_NEGATIVE: i32 = 4;

#[derive(Parser)]
#[command(name = "freeboundary", version, about = "Boundary actions of free groups: K-theory, classification, and finite-level dynamics")]
struct Cli {
    /// Pretty-print the JSON response.
    #[arg(long, global = true)]
    pretty: bool,
    /// Size cap for graph/matrix constructions.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Supernatural-number arithmetic and equivalence decisions (JSON on stdin).
    Sn,
    /// Symbolic K-theoretic invariant of a diagonal system (GammaSpec on stdin).
    Invariant,
    /// Classify two diagonal systems (pair of GammaSpecs on stdin).
    Classify,
    /// K-theory of the boundary algebra cut down by a cyclic-kernel subgroup.
    CkK {
        /// Rank of the free group.
        #[arg(long)]
        n: u32,
        /// Index of the subgroup (1 = full group, k = mod-k cyclic kernel).
        #[arg(long)]
        index: usize,
    },
    /// Theta-partition of the boundary for a subgroup basis (graph spec on stdin).
    Theta,
    /// Verify the connecting-map clopen and K0 identities for a cyclic-kernel level.
    VerifyConn {
        #[arg(long)]
        n: u32,
        /// Cyclic-kernel index of the level.
        #[arg(long)]
        k: usize,
    },
    /// Odometer tower schedule, level indices, and optional level graph (JSON on stdin).
    Tower,
    /// Certified kernel rank of the cylinder difference map (JSON on stdin).
    PvRank,
    /// Finite-level minimality certificate (JSON on stdin).
    Minimality,
}

/// How a Schreier graph is specified in payloads.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum GraphSpec {
    Trivial { n: u32 },
    CyclicKernel { n: u32, j: u32, k: usize },
    Explicit { graph: SchreierGraph },
}

impl GraphSpec {
    fn build(self) -> Result<SchreierGraph, CoreError> {
        match self {
            GraphSpec::Trivial { n } => Ok(SchreierGraph::trivial(n)),
            GraphSpec::CyclicKernel { n, j, k } => SchreierGraph::cyclic_kernel(n, j, k),
            GraphSpec::Explicit { graph } => Ok(graph),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Sn => run_sn(),
        Cmd::Invariant => run_invariant(),
        Cmd::Classify => run_classify(),
        Cmd::CkK { n, index } => run_ckk(n, index),
        Cmd::Theta => run_theta(),
        Cmd::VerifyConn { n, k } => run_verify_conn(n, k),
        Cmd::Tower => run_tower(cli.cap),
        Cmd::PvRank => run_pv_rank(cli.cap),
        Cmd::Minimality => run_minimality(cli.cap),
    };
    match outcome {
        Ok((value, code)) => {
            let text = if cli.pretty {
                serde_json::to_string_pretty(&value)
            } else {
                serde_json::to_string(&value)
            }
            .expect("serializable response");
            use std::io::Write;
            // tolerate a closed pipe (e.g. piping into `head`)
            let _ = writeln!(std::io::stdout(), "{text}");
            std::process::exit(code);
        }
        Err(e) => {
            let code = exit_code_of(&e);
            let kind = if code == EXIT_CAP { "resource-cap" } else { "invalid-input" };
            eprintln!("{}", json!({"error": e.to_string(), "kind": kind}));
            std::process::exit(code);
        }
    }
}

fn exit_code_of(e: &CoreError) -> i32 {
    match e {
        CoreError::ResourceCap(_) => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

fn read_payload<T: serde::de::DeserializeOwned>() -> Result<T, CoreError> {
    let mut buf = String::new();
    std::io::stdin()
        .read_to_string(&mut buf)
        .map_err(|e| CoreError::InvalidInput(format!("cannot read stdin: {e}")))?;
    serde_json::from_str(&buf).map_err(|e| CoreError::InvalidInput(format!("bad payload: {e}")))
}

type Outcome = Result<(Value, i32), CoreError>;

// ---------------------------------------------------------------- sn

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SnRequest {
    op: String,
    #[serde(default)]
    args: Vec<SupernaturalNumber>,
    #[serde(default)]
    left: Vec<SupernaturalNumber>,
    #[serde(default)]
    right: Vec<SupernaturalNumber>,
}

fn nth(args: &[SupernaturalNumber], i: usize) -> Result<&SupernaturalNumber, CoreError> {
    args.get(i)
        .ok_or_else(|| CoreError::InvalidInput(format!("op needs at least {} args", i + 1)))
}

fn run_sn() -> Outcome {
    let req: SnRequest = read_payload()?;
    let citations = json!(["supernatural-number-algebra", "sequence-equivalence-criterion"]);
    match req.op.as_str() {
        "normalize" => {
            let a = nth(&req.args, 0)?;
            Ok((json!({"value": a, "display": a.to_string(), "citations": citations}), EXIT_OK))
        }
        "mul" | "lcm" => {
            let a = nth(&req.args, 0)?;
            let b = nth(&req.args, 1)?;
            let v = if req.op == "mul" { a.mul(b) } else { a.lcm(b) };
            Ok((json!({"value": v, "display": v.to_string(), "citations": citations}), EXIT_OK))
        }
        "divides" => {
            let holds = nth(&req.args, 0)?.divides(nth(&req.args, 1)?);
            Ok((
                json!({"holds": holds, "citations": citations}),
                if holds { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }
        "lambdaIso" => {
            let holds = lambda_iso(nth(&req.args, 0)?, nth(&req.args, 1)?);
            Ok((
                json!({"iso": holds, "citations": citations}),
                if holds { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }
        "upsilonIso" => {
            let w = upsilon_iso(nth(&req.args, 0)?, nth(&req.args, 1)?)?;
            let code = if w.is_some() { EXIT_OK } else { EXIT_NEGATIVE };
            let w = w.map(|(x, y)| (x.to_string(), y.to_string()));
            Ok((json!({"witness": w, "citations": citations}), code))
        }
        "seqEquiv" => {
            let w = seq_equiv(&req.left, &req.right)?;
            if let Some(w) = &w {
                w.verify(&req.left, &req.right)?;
            }
            let code = if w.is_some() { EXIT_OK } else { EXIT_NEGATIVE };
            Ok((json!({"witness": w, "citations": citations}), code))
        }
        other => Err(CoreError::InvalidInput(format!("unknown sn op {other:?}"))),
    }
}

// --------------------------------------------------------- invariant

fn validated_gamma(spec: &GammaSpec) -> Result<GammaSpec, CoreError> {
    GammaSpec::new(spec.rank(), spec.factors().to_vec())
}

fn run_invariant() -> Outcome {
    let spec: GammaSpec = read_payload()?;
    let spec = validated_gamma(&spec)?;
    let triple = spec.invariant()?;
    triple.validate()?;
    Ok((
        json!({
            "invariant": triple,
            "citations": ["odometer-tower-invariant"],
        }),
        EXIT_OK,
    ))
}

// ---------------------------------------------------------- classify

#[derive(Deserialize)]
struct ClassifyRequest {
    a: GammaSpec,
    b: GammaSpec,
}

fn run_classify() -> Outcome {
    let req: ClassifyRequest = read_payload()?;
    let a = validated_gamma(&req.a)?;
    let b = validated_gamma(&req.b)?;
    let verdict = classify_gammas(&a, &b)?;
    let code = if verdict.equivalent { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((
        json!({
            "verdict": verdict,
            "citations": ["classification-theorem", "arithmetic-equivalence-criterion"],
        }),
        code,
    ))
}

// -------------------------------------------------------------- ck-k

fn level_graph(n: u32, index: usize) -> Result<SchreierGraph, CoreError> {
    match index {
        0 => Err(CoreError::InvalidInput("index must be positive".into())),
        1 => Ok(SchreierGraph::trivial(n)),
        k => SchreierGraph::cyclic_kernel(n, 1, k),
    }
}

fn run_ckk(n: u32, index: usize) -> Outcome {
    let k0 = DiagonalK0::new(level_graph(n, index)?)?;
    let pres = k0.presentation();
    let unit_order = pres.unit_order()?;
    let mut response = json!({
        "k0": {
            "freeRank": pres.free_rank,
            "torsion": torsion_json(&pres.torsion),
        },
        "unitOrder": bigint_json(&unit_order),
        "k1Rank": k0.k1_rank(),
        "citations": ["cuntz-krieger-boundary-presentation"],
    });
    if index >= 2 {
        let divisors = connecting_divisors(n, index)?;
        response["connectingDivisors"] = torsion_json(&divisors);
    }
    Ok((response, EXIT_OK))
}

fn bigint_json(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(n) => json!(n),
        Err(_) => json!(v.to_string()),
    }
}

fn torsion_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(bigint_json).collect())
}

// -------------------------------------------------------------- theta

fn run_theta() -> Outcome {
    let spec: GraphSpec = read_payload()?;
    let basis = spec.build()?.schreier_basis()?;
    let m = basis.rank() as i32;
    let rank = basis.graph().rank();
    let mut sets = Vec::new();
    let mut union = ClopenSet::empty(rank);
    let mut disjoint = true;
    for x in (1..=m).flat_map(|i| [i, -i]) {
        let t = theta_set(&basis, x)?;
        disjoint &= t.is_disjoint(&union)?;
        union = union.union(&t)?;
        sets.push(json!({
            "letter": x,
            "word": signed_word(&basis, x).to_string(),
            "set": t,
        }));
    }
    let partition = disjoint && union.is_full();
    Ok((
        json!({
            "basisRank": basis.rank(),
            "sets": sets,
            "partition": partition,
            "citations": ["theta-partition-of-the-boundary"],
        }),
        if partition { EXIT_OK } else { EXIT_NEGATIVE },
    ))
}

fn signed_word(basis: &SchreierBasis, x: i32) -> freeboundary::words::ReducedWord {
    let w = &basis.basis().elements()[(x.unsigned_abs() as usize) - 1];
    if x > 0 {
        w.clone()
    } else {
        w.inverse()
    }
}

// -------------------------------------------------------- verify-conn

fn run_verify_conn(n: u32, k: usize) -> Outcome {
    if k < 2 {
        return Err(CoreError::InvalidInput("connecting level requires k >= 2".into()));
    }
    let basis = SchreierGraph::cyclic_kernel(n, 1, k)?.schreier_basis()?;
    let k0 = DiagonalK0::new(basis.graph().clone())?;
    let m = basis.rank() as i32;
    let rank = basis.graph().rank();
    let mut checks = Vec::new();
    let mut push = |name: String, holds: bool| checks.push(json!({"check": name, "holds": holds}));

    // Omega(s) is the disjoint union of the Theta sets of the signed basis
    // letters whose words start with s.
    for s in (1..=rank as i32).flat_map(|i| [i, -i]) {
        let members: Vec<i32> = (1..=m)
            .flat_map(|i| [i, -i])
            .filter(|&x| signed_word(&basis, x).letters()[0] == s)
            .collect();
        let mut union = ClopenSet::empty(rank);
        let mut disjoint = true;
        for &x in &members {
            let t = theta_set(&basis, x)?;
            disjoint &= t.is_disjoint(&union)?;
            union = union.union(&t)?;
        }
        let holds = disjoint && union == ClopenSet::omega(rank, s)?;
        push(format!("omega({s}) = disjoint union of {} theta sets", members.len()), holds);
    }

    // K0 identities, all in cokernel coordinates at coset 0.
    let q = |x: i32| -> Result<Vec<BigInt>, CoreError> {
        k0.k0_vector(&theta_set(&basis, x)?, 0)
    };
    let r = k0.k0_vector(&ClopenSet::full(rank), 0)?;
    let class = |v: &[BigInt]| k0.class_of_vector(v);
    let add = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    };
    let scale = |a: &[BigInt], c: i64| -> Vec<BigInt> { a.iter().map(|x| x * c).collect() };

    for x in 1..=m {
        let holds = class(&add(&q(x)?, &q(-x)?))? == class(&r)?;
        push(format!("[q_{}] + [q_{}] = [r]", signed_word(&basis, x), signed_word(&basis, -x)), holds);
    }
    push("[1] = k [r]".into(), k0.unit_class() == class(&scale(&r, k as i64))?);

    // the class of the full cylinder over each ambient generator, summed
    // over the cosets of the level
    let p = |s: i32| -> Result<Vec<BigInt>, CoreError> {
        let omega = ClopenSet::omega(rank, s)?;
        let mut acc = vec![BigInt::from(0); 2 * rank as usize * k];
        for x in 0..k {
            acc = add(&acc, &k0.k0_vector(&omega, x)?);
        }
        Ok(acc)
    };

    // the distinguished generator: [p_s1] = k [q_{s1^k}] + (k(k-1)(n-1)/2) [r]
    let power_index = (1..=m)
        .find(|&x| {
            let w = signed_word(&basis, x);
            w.letters().len() == k && w.letters().iter().all(|&l| l == 1)
        })
        .ok_or_else(|| CoreError::Precondition("basis has no power of the first generator".into()))?;
    let coeff = (k * (k - 1) * (rank as usize - 1) / 2) as i64;
    let rhs = add(&scale(&q(power_index)?, k as i64), &scale(&r, coeff));
    push(
        format!("[p_1] = {k} [q_{}] + {coeff} [r]", signed_word(&basis, power_index)),
        class(&p(1)?)? == class(&rhs)?,
    );

    // corner classes of the other generators: [p_t] = sum of [q_v] over
    // basis-or-inverse words starting with t
    for t in 2..=rank as i32 {
        let mut acc = vec![BigInt::from(0); 2 * rank as usize * k];
        let mut count = 0;
        for x in (1..=m).flat_map(|i| [i, -i]) {
            if signed_word(&basis, x).letters()[0] == t {
                acc = add(&acc, &q(x)?);
                count += 1;
            }
        }
        let corner = k0.k0_vector(&ClopenSet::omega(rank, t)?, 0)?;
        push(format!("[p_{t}] = sum of {count} [q_v] classes"), class(&corner)? == class(&acc)?);
    }

    let all = checks.iter().all(|c| c["holds"] == json!(true));
    Ok((
        json!({
            "n": n,
            "k": k,
            "basisRank": basis.rank(),
            "checks": checks,
            "allHold": all,
            "citations": ["connecting-map-identities", "theta-partition-of-the-boundary"],
        }),
        if all { EXIT_OK } else { EXIT_NEGATIVE },
    ))
}

// -------------------------------------------------------------- tower

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TowerRequest {
    n: u32,
    factors: Vec<SupernaturalNumber>,
    #[serde(default)]
    levels: Option<Vec<(usize, u64)>>,
    #[serde(default)]
    level_count: Option<usize>,
    #[serde(default)]
    emit_level: Option<usize>,
}

fn run_tower(cap: usize) -> Outcome {
    let req: TowerRequest = read_payload()?;
    let spec = match req.levels {
        Some(levels) => OdometerTowerSpec::new(req.n, req.factors, levels)?,
        None => OdometerTowerSpec::greedy(req.n, req.factors, req.level_count.unwrap_or(4))?,
    };
    let count = spec.levels().len();
    let indices: Vec<u64> =
        (0..=count).map(|m| spec.index_at(m)).collect::<Result<_, _>>()?;
    let mut response = json!({
        "levels": spec.levels(),
        "indices": indices,
        "moduli": spec.moduli_at(count)?,
        "citations": ["odometer-tower-schedule"],
    });
    if let Some(m) = req.emit_level {
        response["graph"] = serde_json::to_value(tower_level_graph(&spec, m, cap)?)
            .map_err(|e| CoreError::InvalidInput(e.to_string()))?;
    }
    Ok((response, EXIT_OK))
}

// ------------------------------------------------------------ pv-rank

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PvRankRequest {
    graph: GraphSpec,
    depth: usize,
}

fn run_pv_rank(cap: usize) -> Outcome {
    let req: PvRankRequest = read_payload()?;
    let graph = req.graph.build()?;
    let states = graph.index() * 2 * graph.rank() as usize;
    if states.saturating_mul(req.depth.max(1)) > cap {
        return Err(CoreError::ResourceCap(format!(
            "depth {} over {} states exceeds cap {cap}",
            req.depth, states
        )));
    }
    let sys = FiniteLevelSystem { graph, boundary_depth: req.depth };
    let report = pv_kernel_rank(&sys, req.depth)?;
    Ok((
        json!({
            "report": report,
            "citations": ["cylinder-difference-kernel-rank"],
        }),
        EXIT_OK,
    ))
}

// --------------------------------------------------------- minimality

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct MinimalityRequest {
    graph: GraphSpec,
    boundary_depth: usize,
    word_length_cap: usize,
}

fn run_minimality(cap: usize) -> Outcome {
    let req: MinimalityRequest = read_payload()?;
    let graph = req.graph.build()?;
    let words_bound = (2 * graph.rank() as usize).pow(req.word_length_cap.min(32) as u32);
    if words_bound > cap {
        return Err(CoreError::ResourceCap(format!(
            "word enumeration of size ~{words_bound} exceeds cap {cap}"
        )));
    }
    let sys = FiniteLevelSystem { graph, boundary_depth: req.boundary_depth };
    let cert = check_minimality_finite_level(&sys, req.word_length_cap)?;
    let code = if cert.certified { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((
        json!({
            "certificate": cert,
            "citations": ["finite-level-minimality"],
        }),
        code,
    ))
}
