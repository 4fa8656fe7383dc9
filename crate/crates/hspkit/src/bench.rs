//! Benchmark plumbing: instance suites, solver execution with query
//! accounting, bound evaluation, and CSV/JSON record emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{closure, GroupElement, GroupSignature, Subgroup};
use crate::oracle::{CountingOracle, HspInstance};
use crate::solvers::{
    decide_abelian, decide_cyclic_prime_power, identify_abelian_checked,
    identify_cyclic_prime_power, Verdict,
};
use crate::verify::{
    self, brute_force_identify, count_subgroups_zpn, fit_scaling_exponent, lower_bound_value,
    upper_bound, AuditConfig,
};

/// Solver selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    DecideCyclic,
    IdentifyCyclic,
    DecideAbelian,
    IdentifyAbelian,
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::DecideCyclic,
        Algorithm::IdentifyCyclic,
        Algorithm::DecideAbelian,
        Algorithm::IdentifyAbelian,
        Algorithm::BruteForce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DecideCyclic => "decide-cyclic",
            Algorithm::IdentifyCyclic => "identify-cyclic",
            Algorithm::DecideAbelian => "decide-abelian",
            Algorithm::IdentifyAbelian => "identify-abelian",
            Algorithm::BruteForce => "brute-force",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == text)
            .ok_or_else(|| Error::UnknownAlgorithm(text.to_string()))
    }

    /// True for algorithms that output a subgroup rather than a verdict.
    pub fn identifies(self) -> bool {
        matches!(
            self,
            Algorithm::IdentifyCyclic | Algorithm::IdentifyAbelian | Algorithm::BruteForce
        )
    }
}

/// One solver execution: instance, algorithm, result, query accounting, and
/// bound evaluation. Serialized to CSV/JSON with the fixed column order
/// `id,sig,gens,orderG,orderH,algo,result,queries_distinct,queries_raw,`
/// `upper_bound,lower_bound,pass,ms`.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub id: String,
    pub sig: String,
    /// Semicolon-separated generator strings of the hidden subgroup.
    pub gens: String,
    pub order_g: u128,
    pub order_h: u64,
    pub algo: String,
    /// Verdict string or recovered-subgroup canonical string.
    pub result: String,
    pub queries_distinct: u64,
    pub queries_raw: u64,
    pub upper_bound: f64,
    /// Worst-case class lower bound when computable; rendered as "n/a"
    /// otherwise.
    pub lower_bound: Option<f64>,
    pub pass: bool,
    pub ms: u64,
    /// For cyclic identification: the exponent j at which the collision
    /// occurred (None for the trivial-subgroup path). Not serialized.
    pub trace_t: Option<u32>,
}

/// Flat row with serde field order matching the CSV columns.
#[derive(Serialize)]
struct Row<'a> {
    id: &'a str,
    sig: &'a str,
    gens: &'a str,
    #[serde(rename = "orderG")]
    order_g: u128,
    #[serde(rename = "orderH")]
    order_h: u64,
    algo: &'a str,
    result: &'a str,
    queries_distinct: u64,
    queries_raw: u64,
    upper_bound: String,
    lower_bound: String,
    pass: bool,
    ms: u64,
}

impl RunRecord {
    fn row(&self) -> Row<'_> {
        Row {
            id: &self.id,
            sig: &self.sig,
            gens: &self.gens,
            order_g: self.order_g,
            order_h: self.order_h,
            algo: &self.algo,
            result: &self.result,
            queries_distinct: self.queries_distinct,
            queries_raw: self.queries_raw,
            upper_bound: format!("{:.4}", self.upper_bound),
            lower_bound: match self.lower_bound {
                Some(lb) => format!("{lb:.4}"),
                None => "n/a".to_string(),
            },
            pass: self.pass,
            ms: self.ms,
        }
    }
}

/// Writes records as CSV with the fixed header.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records as a JSON array keyed identically to the CSV columns.
pub fn write_json<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    let rows: Vec<Row<'_>> = records.iter().map(RunRecord::row).collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// How hidden subgroups are drawn for each signature in a suite.
#[derive(Debug, Clone)]
pub enum SuiteMode {
    /// Every subgroup, enumerated; requires |G| within the small-group cap.
    /// When a lattice is larger than `max_instances_per_signature`, a
    /// deterministic stride sample is taken (always keeping the trivial and
    /// full subgroups).
    AllSubgroups,
    /// Seeded random generator multisets of size 1..=3, deduplicated by
    /// closure; the trivial and full subgroups are always included.
    RandomSubgroups { count: u32, seed: u64 },
    /// Only the trivial subgroup.
    TrivialOnly,
}

/// Configuration of a benchmark suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub signatures: Vec<String>,
    pub mode: SuiteMode,
    pub algorithms: Vec<Algorithm>,
    /// Enumeration cap for closures, oracles, and brute-force cross-checks.
    pub cap: u64,
    /// Largest |G| for which AllSubgroups enumeration is permitted.
    pub small_group_cap: u64,
    pub audit: AuditConfig,
    /// Per-signature instance budget for AllSubgroups sampling.
    pub max_instances_per_signature: usize,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".to_string()));
        }
        if self.signatures.is_empty() {
            return Err(Error::Config("no signatures listed".to_string()));
        }
        for text in &self.signatures {
            let sig = GroupSignature::parse(text)?;
            if matches!(self.mode, SuiteMode::AllSubgroups)
                && sig.order() > self.small_group_cap as u128
            {
                return Err(Error::Config(format!(
                    "all-subgroups mode requires |G| <= {}, but {text} has order {}",
                    self.small_group_cap,
                    sig.order()
                )));
            }
        }
        Ok(())
    }
}

/// Summary statistics of a suite run.
#[derive(Debug, Clone)]
pub struct Summary {
    /// Worst-case distinct queries per (signature, |H|, algorithm) class.
    pub worst_by_class: BTreeMap<(String, u64, String), u64>,
    /// Fitted log-log slope of identify-abelian queries vs |G|/|H|.
    pub fitted_exponent: Option<f64>,
    /// Per-class lower-bound comparisons: (signature, |H|, bound,
    /// worst-case queries, satisfied).
    pub lower_bound_checks: Vec<(String, u64, f64, u64, bool)>,
}

impl Summary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("worst-case distinct queries per class:\n");
        for ((sig, order_h, algo), worst) in &self.worst_by_class {
            s.push_str(&format!("  {sig} |H|={order_h} {algo}: {worst}\n"));
        }
        match self.fitted_exponent {
            Some(e) => s.push_str(&format!("fitted identify-abelian exponent: {e:.4}\n")),
            None => s.push_str("fitted identify-abelian exponent: n/a\n"),
        }
        if self.lower_bound_checks.is_empty() {
            s.push_str("lower-bound comparisons: none available\n");
        } else {
            s.push_str("lower-bound comparisons (worst case >= bound):\n");
            for (sig, order_h, lb, worst, ok) in &self.lower_bound_checks {
                s.push_str(&format!(
                    "  {sig} |H|={order_h}: bound {lb:.4}, worst {worst} -> {}\n",
                    if *ok { "ok" } else { "VIOLATED" }
                ));
            }
        }
        s
    }
}

fn gens_string(gens: &[GroupElement]) -> String {
    gens.iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Runs one algorithm on one instance with a fresh counting oracle, timing
/// the run and evaluating the upper bound.
///
/// Identification results with |G| within the cap are cross-checked against
/// brute force on an independent oracle; a mismatch is a hard error since it
/// signals a solver bug. Decision verdicts are checked against the known
/// hidden subgroup's triviality.
pub fn run_instance(
    id: &str,
    instance: &HspInstance,
    algo: Algorithm,
    audit: &AuditConfig,
    cap: u64,
) -> Result<RunRecord> {
    let sig = instance.signature().clone();
    let mut oracle = CountingOracle::new(instance);
    let started = Instant::now();
    let mut trace_t = None;
    let (result, queries_distinct): (String, u64) = match algo {
        Algorithm::DecideCyclic => {
            let out = decide_cyclic_prime_power(&mut oracle)?;
            check_verdict(instance, out.verdict)?;
            (out.verdict.as_str().to_string(), out.queries)
        }
        Algorithm::DecideAbelian => {
            let out = decide_abelian(&mut oracle, cap)?;
            check_verdict(instance, out.verdict)?;
            (out.verdict.as_str().to_string(), out.queries)
        }
        Algorithm::IdentifyCyclic => {
            let out = identify_cyclic_prime_power(&mut oracle, cap)?;
            let phase = &out.trace[0];
            trace_t = phase.collision.is_some().then_some(phase.t);
            check_identified(instance, &out.recovered, cap)?;
            (out.recovered.canonical_string(), out.queries)
        }
        Algorithm::IdentifyAbelian => {
            let out = identify_abelian_checked(&mut oracle, Some(instance.hidden()), cap)?;
            check_identified(instance, &out.recovered, cap)?;
            (out.recovered.canonical_string(), out.queries)
        }
        Algorithm::BruteForce => {
            let (h, queries) = brute_force_identify(&mut oracle, cap)?;
            check_identified(instance, &h, cap)?;
            (h.canonical_string(), queries)
        }
    };
    let ms = started.elapsed().as_millis() as u64;
    let order_h = instance.hidden().order();
    let ub = upper_bound(audit, algo.name(), &sig, order_h, trace_t)?;
    Ok(RunRecord {
        id: id.to_string(),
        sig: sig.to_string(),
        gens: gens_string(instance.hidden().generators()),
        order_g: sig.order(),
        order_h,
        algo: algo.name().to_string(),
        result,
        queries_distinct,
        queries_raw: oracle.raw_calls(),
        upper_bound: ub,
        lower_bound: if algo.identifies() {
            class_lower_bound(&sig, order_h)
        } else {
            None
        },
        pass: (queries_distinct as f64) <= ub,
        ms,
        trace_t,
    })
}

fn check_verdict(instance: &HspInstance, verdict: Verdict) -> Result<()> {
    let expect = if instance.hidden().is_trivial() {
        Verdict::Trivial
    } else {
        Verdict::NonTrivial
    };
    if verdict != expect {
        return Err(Error::CrossCheckMismatch(format!(
            "verdict {} but |H| = {}",
            verdict.as_str(),
            instance.hidden().order()
        )));
    }
    Ok(())
}

fn check_identified(instance: &HspInstance, recovered: &Subgroup, cap: u64) -> Result<()> {
    if instance.signature().order() > cap as u128 {
        return Ok(());
    }
    if recovered != instance.hidden() {
        return Err(Error::CrossCheckMismatch(format!(
            "recovered {} but hidden subgroup is {}",
            recovered.canonical_string(),
            instance.hidden().canonical_string()
        )));
    }
    Ok(())
}

/// Worst-case identification lower bound of the (G, |H|) class, when the
/// number of candidate subgroups has a known closed form (elementary Abelian
/// G = (Z_p)^n) and the bound is non-vacuous.
fn class_lower_bound(sig: &GroupSignature, order_h: u64) -> Option<f64> {
    let factors = sig.factors();
    let p = factors.first()?.prime;
    if !factors.iter().all(|f| f.prime == p && f.exponent == 1) {
        return None;
    }
    let n = factors.len() as u32;
    let mut k = 0u32;
    let mut rem = order_h;
    while rem % p == 0 {
        rem /= p;
        k += 1;
    }
    if rem != 1 {
        return None;
    }
    let count = count_subgroups_zpn(p, n, k).ok()?;
    lower_bound_value(sig.order(), order_h, count).ok()
}

/// Builds the hidden-subgroup list for one signature under the suite mode.
/// Deterministic: enumeration order, or seeded draws keyed additionally by
/// the signature text.
pub fn suite_subgroups(
    sig: &GroupSignature,
    mode: &SuiteMode,
    cap: u64,
    max_instances: usize,
) -> Result<Vec<Subgroup>> {
    match mode {
        SuiteMode::TrivialOnly => Ok(vec![Subgroup::trivial(sig)]),
        SuiteMode::AllSubgroups => {
            // Count first so oversized lattices can be stride-sampled in
            // lattice-walk order without materializing every subgroup.
            let total = verify::visit_subgroups(sig, cap, |_| {})? as usize;
            if total <= max_instances || max_instances == 0 {
                return verify::enumerate_subgroups(sig, cap);
            }
            let stride = total.div_ceil(max_instances);
            let mut out: Vec<Subgroup> = Vec::with_capacity(max_instances + 1);
            let mut i = 0usize;
            verify::visit_subgroups(sig, cap, |indices| {
                if i % stride == 0 {
                    let elements: Vec<GroupElement> =
                        indices.iter().map(|&idx| sig.element_at(idx)).collect();
                    out.push(Subgroup::from_sorted_elements(Vec::new(), elements));
                }
                i += 1;
            })?;
            // The walk starts at the trivial subgroup; make sure the full
            // group is represented too.
            if !out.iter().any(|h| h.order() as u128 == sig.order()) {
                out.push(closure(sig, &unit_generators(sig), cap)?);
            }
            Ok(out)
        }
        SuiteMode::RandomSubgroups { count, seed } => {
            // Key the stream by signature so different groups in one suite
            // draw independent subgroups.
            let mut key = *seed;
            for b in sig.to_string().bytes() {
                key = key.wrapping_mul(1099511628211).wrapping_add(u64::from(b));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            let order = sig.order();
            if order > cap as u128 {
                return Err(Error::CapExceeded { cap });
            }
            let order = order as u64;
            let mut out = vec![
                Subgroup::trivial(sig),
                closure(sig, &unit_generators(sig), cap)?,
            ];
            let mut attempts = 0u32;
            while (out.len() as u32) < count.saturating_add(2) && attempts < count * 10 {
                attempts += 1;
                let size = rng.gen_range(1..=3usize);
                let gens: Vec<GroupElement> =
                    (0..size).map(|_| sig.element_at(rng.gen_range(0..order))).collect();
                let h = closure(sig, &gens, cap)?;
                if !out.contains(&h) {
                    out.push(h);
                }
            }
            Ok(out)
        }
    }
}

fn unit_generators(sig: &GroupSignature) -> Vec<GroupElement> {
    (0..sig.len()).map(|i| sig.unit(i)).collect()
}

/// Runs the configured suite: for each signature and hidden subgroup, every
/// selected algorithm executes on a fresh oracle. Rows are emitted in
/// deterministic id order; ids are zero-padded counters.
pub fn run_suite(config: &SuiteConfig) -> Result<(Vec<RunRecord>, Summary)> {
    config.validate()?;
    let mut records = Vec::new();
    let mut counter = 0u64;
    for text in &config.signatures {
        let sig = GroupSignature::parse(text)?;
        let subgroups = suite_subgroups(
            &sig,
            &config.mode,
            config.cap,
            config.max_instances_per_signature,
        )?;
        for h in subgroups {
            let instance =
                HspInstance::build(&sig, &pick_generators(&sig, &h), config.cap)?;
            for &algo in &config.algorithms {
                if matches!(algo, Algorithm::DecideCyclic | Algorithm::IdentifyCyclic)
                    && sig.len() != 1
                {
                    continue;
                }
                let id = format!("{counter:06}");
                counter += 1;
                records.push(run_instance(&id, &instance, algo, &config.audit, config.cap)?);
            }
        }
    }
    let summary = summarize(&records);
    Ok((records, summary))
}

/// A small generating set for H: grow greedily from the element list.
fn pick_generators(sig: &GroupSignature, h: &Subgroup) -> Vec<GroupElement> {
    if !h.generators().is_empty() || h.is_trivial() {
        return h.generators().to_vec();
    }
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut have = Subgroup::trivial(sig);
    for e in h.elements() {
        if !have.contains(e) {
            gens.push(e.clone());
            let mut all = have.elements().to_vec();
            all.push(e.clone());
            have = closure(sig, &all, h.order()).expect("closure within H");
            if have.order() == h.order() {
                break;
            }
        }
    }
    gens
}

/// Aggregates worst cases, the scaling fit, and lower-bound comparisons.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut worst_by_class: BTreeMap<(String, u64, String), u64> = BTreeMap::new();
    for r in records {
        let key = (r.sig.clone(), r.order_h, r.algo.clone());
        let w = worst_by_class.entry(key).or_insert(0);
        *w = (*w).max(r.queries_distinct);
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.algo == "identify-abelian" && r.queries_distinct > 0)
        .map(|r| (r.order_g as f64 / r.order_h as f64, r.queries_distinct as f64))
        .filter(|&(x, _)| x >= 1.0)
        .collect();
    let fitted_exponent = fit_scaling_exponent(&points).ok();
    let mut lower_bound_checks = Vec::new();
    for ((sig, order_h, algo), &worst) in &worst_by_class {
        if algo != "identify-abelian" {
            continue;
        }
        let parsed = match GroupSignature::parse(sig) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if let Some(lb) = class_lower_bound(&parsed, *order_h) {
            lower_bound_checks.push((
                sig.clone(),
                *order_h,
                lb,
                worst,
                worst as f64 >= lb.ceil(),
            ));
        }
    }
    Summary { worst_by_class, fitted_exponent, lower_bound_checks }
}

/// All sorted prime-power signatures over the given primes with group order
/// in `[2, max_order]`, in deterministic order. Factors are emitted sorted
/// by (prime, exponent); one representative per multiset.
pub fn signatures_up_to(primes: &[u64], max_order: u64) -> Vec<String> {
    let mut parts: Vec<(u64, u32)> = Vec::new();
    for &p in primes {
        let mut k = 1u32;
        while let Some(v) = p.checked_pow(k) {
            if v > max_order {
                break;
            }
            parts.push((p, k));
            k += 1;
        }
    }
    parts.sort_unstable();
    let mut out = Vec::new();
    let mut stack: Vec<(u64, u32)> = Vec::new();
    fn rec(
        parts: &[(u64, u32)],
        from: usize,
        order: u64,
        max_order: u64,
        stack: &mut Vec<(u64, u32)>,
        out: &mut Vec<String>,
    ) {
        if !stack.is_empty() {
            out.push(
                stack
                    .iter()
                    .map(|&(p, k)| {
                        if k == 1 {
                            p.to_string()
                        } else {
                            format!("{p}^{k}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        for i in from..parts.len() {
            let (p, k) = parts[i];
            let val = p.pow(k);
            if let Some(next) = order.checked_mul(val) {
                if next <= max_order {
                    stack.push((p, k));
                    rec(parts, i, next, max_order, stack, out);
                    stack.pop();
                }
            }
        }
    }
    rec(&parts, 0, 1, max_order, &mut stack, &mut out);
    out.sort();
    out.dedup();
    out
}
