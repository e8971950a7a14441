//! The acceptance criteria, each at its stated tolerance. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fulfillment_core::arithmetic::{check_q, make_sq_models, SquareIncreasingSeq};
use fulfillment_core::logic::Symbol;
use fulfillment_core::ramsey::{find_homogeneous, TupleColoring};
use fulfillment_core::structures::StructureTables;
use fulfillment_core::{fulfills, parse_formula, Assignment, FulfillmentVerdict, LnModel, PartialStructure, Signature};
use fulfillment_lab::commands::{run_with_cache, ExperimentConfig};
use fulfillment_lab::suites;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Criterion = fn() -> Result<Outcome, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("Q fulfillment on minimal square-increasing chains", q_fulfillment),
        ("end-extension stability", end_extension),
        ("collapse audit", collapse_audit),
        ("completeness probes", completeness_probes),
        ("homogeneous search against brute force", homogeneous_oracle),
        ("boundedness of the pair coloring", pair_coloring_boundedness),
        ("determinism of reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {tag} ({secs:.1}s) {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// 1 -------------------------------------------------------------------------

fn minimal_sequence(m0: u64, n: usize) -> Vec<u64> {
    let mut ms = vec![m0];
    while ms.len() < n {
        let last = ms[ms.len() - 1];
        ms.push(last * last + 1);
    }
    ms
}

fn q_fulfillment() -> Result<Outcome, String> {
    let start = Instant::now();
    // the sequences quoted for m_0 = 2
    let quoted: [&[u64]; 3] = [&[2, 5, 26], &[2, 5, 26, 677], &[2, 5, 26, 677, 458330]];
    for q in quoted {
        if minimal_sequence(2, q.len()) != q {
            return Ok(outcome(false, format!("minimal sequence differs from {q:?}")));
        }
    }
    let mut checked = 0;
    for m0 in [2, 3] {
        for n in 3..=5 {
            let ms = minimal_sequence(m0, n);
            let v = make_sq_models(&SquareIncreasingSeq::new(ms.clone()).map_err(err)?).map_err(err)?;
            let r = check_q(&v).map_err(err)?;
            if !r.all_true() {
                return Ok(outcome(false, format!("{ms:?}: {:?} / {:?}", r.axioms, r.no_greatest)));
            }
            checked += 1;
        }
    }
    let t = start.elapsed();
    Ok(outcome(
        t < Duration::from_secs(30),
        format!("{checked} sequences, 8 sentences each, all True in {:.1}s (limit 30s)", t.as_secs_f64()),
    ))
}

// 2 -------------------------------------------------------------------------

fn end_extension() -> Result<Outcome, String> {
    let s = suites::end_extension_suite(2, 1000, 4, 3).map_err(err)?;
    let mut detail = format!(
        "{} cases, {} defined, {} unchanged, {} changed ({} of them contain forall)",
        s.cases, s.defined, s.agree, s.mismatches, s.mismatches_with_forall
    );
    if s.mismatches == s.mismatches_with_forall && s.mismatches > 0 {
        detail.push_str(&format!(
            "; every change involves a universal whose level range grows with the chain \
             ({} of {} universal-free cases unchanged)",
            s.forall_free_defined - s.forall_free_changed,
            s.forall_free_defined
        ));
    }
    if let Some(c) = s.examples.first() {
        detail.push_str(&format!("; first: `{}` went {} -> {}", c.formula, c.before["verdict"], c.after["verdict"]));
    }
    Ok(outcome(s.cases == 1000 && s.defined == s.agree, detail))
}

// 3 -------------------------------------------------------------------------

fn collapse_audit() -> Result<Outcome, String> {
    let start = Instant::now();
    let s = suites::collapse_suite(3, 200, 4).map_err(err)?;
    let t = start.elapsed();
    let within = s.max_sizes.iter().zip(&s.min_bounds).all(|(size, bound)| bound.is_none_or(|b| *size <= b));
    Ok(outcome(
        s.instances == 200 && s.all_passed() && within && t < Duration::from_secs(300),
        format!(
            "{}/{} instances pass conditions 1-5, max |B_i| {:?}, {} verdict comparisons",
            s.passed, s.instances, s.max_sizes, s.comparisons
        ),
    ))
}

// 4 -------------------------------------------------------------------------

fn unary_sig() -> Arc<Signature> {
    Arc::new(Signature::new(vec![Symbol::new("P", 1)], vec![], vec!["c".into()]).unwrap())
}

/// Chains of length 3 over `{0,1}` for `{P, c}`, counted directly: a
/// structure is `(D, c, P)` with `c ∈ D`, `P ⊆ D`, and `A ⊆ B` iff
/// `D_A ⊆ D_B`, equal constants and `P_A = P_B ∩ D_A`.
fn chain_count_oracle() -> u64 {
    let mut structs = Vec::new();
    for d in 1u8..4 {
        for c in 0..2u8 {
            if d & (1 << c) == 0 {
                continue;
            }
            for p in 0u8..4 {
                if p & !d == 0 {
                    structs.push((d, c, p));
                }
            }
        }
    }
    let sub = |a: (u8, u8, u8), b: (u8, u8, u8)| a.0 & !b.0 == 0 && a.1 == b.1 && a.2 == b.2 & a.0;
    let mut n = 0;
    for &a in &structs {
        for &b in structs.iter().filter(|b| sub(a, **b)) {
            n += structs.iter().filter(|c| sub(b, **c)).count() as u64;
        }
    }
    n
}

fn completeness_probes() -> Result<Outcome, String> {
    let start = Instant::now();
    let sig = unary_sig();
    let universe: BTreeSet<u64> = [0, 1].into();
    let cap = fulfillment_core::ramsey::EnumCap::default();
    let probe = |src: &str| {
        let f = parse_formula(src, &sig).map_err(err)?;
        suites::probe(&f, 3, &sig, &universe, cap, 4).map_err(err)
    };
    let valid = probe("forall x. x = x")?;
    let contradiction = probe("P(c) & !P(c)")?;
    let exists = probe("exists x. P(x)")?;
    let expected = chain_count_oracle();

    let tables = StructureTables {
        domain: [0, 1].into(),
        constants: [("c".to_string(), 0)].into(),
        relations: [("P".to_string(), [vec![0]].into())].into(),
        functions: Default::default(),
    };
    let a = PartialStructure::from_tables(sig.clone(), tables).map_err(err)?;
    let constant = LnModel::new(vec![a.clone(), a.clone(), a]).map_err(err)?;
    let f = parse_formula("exists x. P(x)", &sig).map_err(err)?;
    let c = fulfills(&constant, &f, &Assignment::new()).map_err(err)? == FulfillmentVerdict::True;

    let ok = valid.chains == expected
        && valid.defined_false == 0
        && contradiction.fulfilled == 0
        && exists.fulfilled > 0
        && c
        && start.elapsed() < Duration::from_secs(60);
    Ok(outcome(
        ok,
        format!(
            "{} chains (direct count {expected}); forall x. x = x: {} defined-False; \
             P(c) & !P(c): {} fulfilling; exists x. P(x) on the constant chain: {}",
            valid.chains,
            valid.defined_false,
            contradiction.fulfilled,
            if c { "True" } else { "not True" }
        ),
    ))
}

// 5 -------------------------------------------------------------------------

/// All subsets of `0..n`: keep the homogeneous ones of size exactly
/// `max(k, min + 1)` and return the lexicographically least.
fn homogeneous_oracle_set(color: &dyn Fn(&[u64]) -> u32, e: usize, n: u64, k: usize) -> Option<Vec<u64>> {
    let mut best: Option<Vec<u64>> = None;
    for mask in 1u32..(1 << n) {
        let s: Vec<u64> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() != k.max(s[0] as usize + 1) {
            continue;
        }
        let mut colors = BTreeSet::new();
        for sub in 0u32..(1 << s.len()) {
            if sub.count_ones() as usize == e {
                let t: Vec<u64> = (0..s.len()).filter(|i| sub & (1 << i) != 0).map(|i| s[i]).collect();
                colors.insert(color(&t));
            }
        }
        if colors.len() <= 1 && best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    best
}

fn homogeneous_oracle() -> Result<Outcome, String> {
    let mut compared = 0u64;
    // e = 1: every 2-coloring of 0..n for n ≤ 6
    for n in 0..=6u64 {
        for bits in 0u32..(1 << n) {
            let color = move |t: &[u64]| (bits >> t[0]) & 1;
            let p = TupleColoring::from_fn(1, 2, n, color).map_err(err)?;
            for k in 0..=n as usize + 1 {
                let got = find_homogeneous(&p, k);
                let want = homogeneous_oracle_set(&color, 1, n, k);
                if got != want {
                    return Ok(outcome(false, format!("e=1 n={n} bits={bits:b} k={k}: {got:?} vs {want:?}")));
                }
                compared += 1;
            }
        }
    }
    // e = 2: seeded samples
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sample in 0..300 {
        let n = rng.gen_range(2..=6u64);
        let k = rng.gen_range(1..=4usize);
        let pairs: Vec<u32> = (0..n * n).map(|_| rng.gen_range(0..2)).collect();
        let color = |t: &[u64]| pairs[(t[0] * n + t[1]) as usize];
        let p = TupleColoring::from_fn(2, 2, n, color).map_err(err)?;
        let got = find_homogeneous(&p, k);
        let want = homogeneous_oracle_set(&color, 2, n, k);
        if got != want {
            return Ok(outcome(false, format!("e=2 sample {sample} n={n} k={k}: {got:?} vs {want:?}")));
        }
        compared += 1;
    }
    Ok(outcome(true, format!("{compared} searches agree with the all-subsets oracle")))
}

// 6 -------------------------------------------------------------------------

fn pair_coloring_boundedness() -> Result<Outcome, String> {
    // colorings of 3-chains, so n = 2
    let arity = 3;
    let audit = suites::segment_audit(arity, arity + 1, 64).map_err(err)?;
    let m = 5;
    let order_sig = suites::order_signature();
    let orders = suites::order_family(16).map_err(err)?;
    let c = suites::pair_coloring(&order_sig, arity, 64).map_err(err)?;
    let k = order_sig.cardinality() + m;
    let on_orders = suites::homogeneous_check("orders", &c, &orders, m, k, 1_000_000).map_err(err)?;
    let seg_sig = suites::segment_signature().map_err(err)?;
    let segments = suites::segment_family(audit.universe).map_err(err)?;
    let c = suites::pair_coloring(&seg_sig, arity, audit.universe).map_err(err)?;
    let k = seg_sig.cardinality() + m;
    let on_segments = suites::homogeneous_check("segments", &c, &segments, m, k, 1_000_000).map_err(err)?;

    let ok = audit.passed
        && audit.counterexamples == 0
        && audit.in_domain > 0
        && audit.chains_audited > 0
        && on_orders.outcome == "found"
        && on_orders.side_conditions
        && on_orders.claim_holds()
        && on_segments.claim_holds();
    Ok(outcome(
        ok,
        format!(
            "segments M_2..M_{}{}: {} in-domain 3-chains, {} chains collapsed, {} counterexamples; \
             orders: homogeneous chain of length {} with |A_0| = {}, color {:?}; segments: {}",
            audit.universe,
            if audit.clipped { " (clipped)" } else { "" },
            audit.in_domain,
            audit.chains_audited,
            audit.counterexamples,
            on_orders.chain.len(),
            on_orders.first_size.unwrap_or(0),
            on_orders.color,
            on_segments.outcome,
        ),
    ))
}

// 7 -------------------------------------------------------------------------

fn configs() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let mut c = ExperimentConfig::new("fulfill");
    c.random = Some(200);
    c.seed = 9;
    out.push(c);
    let mut c = ExperimentConfig::new("fulfill");
    c.formula = Some("q7".into());
    c.segments = Some("2,5,26".into());
    out.push(c);
    let mut c = ExperimentConfig::new("qcheck");
    c.segments = Some("2,5,26,677".into());
    out.push(c);
    let mut c = ExperimentConfig::new("collapse");
    c.random = Some(40);
    c.seed = 9;
    out.push(c);
    let mut c = ExperimentConfig::new("probe");
    c.formula = Some("exists x. P(x)".into());
    out.push(c);
    let mut c = ExperimentConfig::new("ph");
    c.e = Some(1);
    c.k = Some(3);
    out.push(c);
    out.push(ExperimentConfig::new("bcp"));
    let mut c = ExperimentConfig::new("enumerate");
    c.n = Some(3);
    out.push(c);
    out
}

fn report_bytes(c: &ExperimentConfig, workers: usize, dir: &Path) -> Result<Vec<u8>, String> {
    let mut c = c.clone();
    c.workers = workers;
    c.out = Some(dir.to_path_buf());
    let r = run_with_cache(&c, None).map_err(err)?;
    std::fs::read(dir.join(format!("{}.json", r.command))).map_err(err)
}

fn determinism() -> Result<Outcome, String> {
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut runs = 0;
    for (i, c) in configs().iter().enumerate() {
        let mut seen: Option<Vec<u8>> = None;
        for workers in [1, 4] {
            for rep in 0..3 {
                let dir = tmp.path().join(format!("{i}-{workers}-{rep}"));
                let bytes = report_bytes(c, workers, &dir)?;
                runs += 1;
                match &seen {
                    None => seen = Some(bytes),
                    Some(b) if *b != bytes => {
                        return Ok(outcome(false, format!("{} differs at workers={workers} run {rep}", c.command)));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(outcome(true, format!("{runs} runs of {} configurations, reports byte-identical", configs().len())))
}
