//! Orchestration over the four code families: descriptors and shards,
//! exact-repair verification, failure-pattern sweeps, assignment search and
//! CSV/JSON export of tradeoff data.
//!
//! All randomness comes from one 64-bit seed. Each pattern draws its message
//! from ChaCha8 stream number equal to the pattern's rank in lexicographic
//! order, so results do not depend on scheduling.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambr::AdaptiveMbrCode;
use crate::error::{Error, Result};
use crate::framework::{RepairOutcome, RepairProblem, RepairTranscript};
use crate::gf::{Elem, Field};
use crate::ia::{self, IaCode};
use crate::matrix::{combinations, Matrix};
use crate::mds::{MdsMode, MdsStripeCode};
use crate::pm::{self, PmCode};
use crate::tradeoff::{self, rational_parts, Rational, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pm,
    Ia,
    Mds,
    Ambr,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pm" => Ok(Family::Pm),
            "ia" => Ok(Family::Ia),
            "mds" => Ok(Family::Mds),
            "ambr" => Ok(Family::Ambr),
            _ => Err(Error::InvalidParams(format!("unknown code family {s:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Pm => "pm",
            Family::Ia => "ia",
            Family::Mds => "mds",
            Family::Ambr => "ambr",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DOrRange {
    Single(usize),
    Range([usize; 2]),
}

/// JSON description of a code, enough to rebuild it exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Descriptor {
    Pm { n: usize, k: usize, m: u32, modulus: u32, lambdas: Vec<u16> },
    Ia {
        k: usize,
        m: u32,
        modulus: u32,
        kappa: u16,
        #[serde(rename = "P")]
        p: Vec<Vec<u32>>,
        #[serde(rename = "V")]
        v: Vec<Vec<u32>>,
    },
    Mds { n: usize, k: usize, mode: MdsMode, d_or_range: DOrRange, m: u32, modulus: u32 },
    Ambr { n: usize, k: usize, d_min: usize, d_max: usize, m: u32, modulus: u32 },
}

impl Descriptor {
    pub fn family(&self) -> Family {
        match self {
            Descriptor::Pm { .. } => Family::Pm,
            Descriptor::Ia { .. } => Family::Ia,
            Descriptor::Mds { .. } => Family::Mds,
            Descriptor::Ambr { .. } => Family::Ambr,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub node: usize,
    pub symbols: Vec<u16>,
}

impl Shard {
    pub fn new(node: usize, content: &[Elem]) -> Self {
        Shard { node, symbols: content.iter().map(|x| x.0).collect() }
    }

    pub fn content(&self, field: &Field) -> Result<Vec<Elem>> {
        self.symbols.iter().map(|&v| field.elem(v as u32)).collect()
    }
}

/// Default shape parameters for building a code of a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildSpec {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    /// Helper count: fixed `d` for MDS, `d_min` for adaptive MBR.
    pub d: Option<usize>,
    /// Largest helper count for adaptive codes.
    pub d_max: Option<usize>,
    /// Failure count served by an adaptive MDS code.
    pub e: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum CodeInstance {
    Pm(PmCode),
    Ia(IaCode),
    Mds(MdsStripeCode),
    Ambr(AdaptiveMbrCode),
}

fn field_of(m: u32, modulus: u32) -> Result<Field> {
    Field::new(m, modulus)
}

fn elems(field: &Field, rows: &[Vec<u32>]) -> Result<Matrix> {
    Matrix::from_u32_rows(field, rows)
}

impl CodeInstance {
    /// PM uses `lambda_i = g^i`; IA uses its defaults; MDS is fixed-`d`
    /// unless `e` is given, then adaptive over `k..=n-e`; adaptive MBR
    /// needs `d` (as `d_min`) and optionally `d_max`.
    pub fn build(field: Field, spec: &BuildSpec) -> Result<Self> {
        let BuildSpec { family, n, k, d, d_max, e } = spec.clone();
        Ok(match family {
            Family::Pm => CodeInstance::Pm(PmCode::geometric(field, n, k)?),
            Family::Ia => {
                if n != 2 * k {
                    return Err(Error::InvalidParams(format!("IA codes need n = 2k, got n={n} k={k}")));
                }
                CodeInstance::Ia(IaCode::with_defaults(field, k)?)
            }
            Family::Mds => match e {
                Some(e) => CodeInstance::Mds(MdsStripeCode::adaptive(field, n, k, e)?),
                None => {
                    let d = d.ok_or_else(|| Error::InvalidParams("MDS code needs d or e".into()))?;
                    CodeInstance::Mds(MdsStripeCode::fixed(field, n, k, d)?)
                }
            },
            Family::Ambr => {
                let d_min = d.ok_or_else(|| Error::InvalidParams("adaptive MBR code needs d_min".into()))?;
                CodeInstance::Ambr(AdaptiveMbrCode::new(field, n, k, d_min, d_max.unwrap_or(d_min))?)
            }
        })
    }

    pub fn from_descriptor(desc: &Descriptor) -> Result<Self> {
        Ok(match desc {
            Descriptor::Pm { n, k, m, modulus, lambdas } => {
                let f = field_of(*m, *modulus)?;
                let l = lambdas.iter().map(|&v| f.elem(v as u32)).collect::<Result<Vec<_>>>()?;
                if l.len() != *n {
                    return Err(Error::Malformed(format!("{} lambdas for n = {n}", l.len())));
                }
                CodeInstance::Pm(PmCode::new(f, *n, *k, l)?)
            }
            Descriptor::Ia { k, m, modulus, kappa, p, v } => {
                let f = field_of(*m, *modulus)?;
                let pm = elems(&f, p)?;
                let vm = elems(&f, v)?;
                if pm.rows() != *k {
                    return Err(Error::Malformed(format!("P has {} rows for k = {k}", pm.rows())));
                }
                let kap = f.elem(*kappa as u32)?;
                CodeInstance::Ia(IaCode::new(f, pm, vm, kap)?)
            }
            Descriptor::Mds { n, k, mode, d_or_range, m, modulus } => {
                let f = field_of(*m, *modulus)?;
                let (lo, hi) = match d_or_range {
                    DOrRange::Single(d) => (*d, *d),
                    DOrRange::Range([a, b]) => (*a, *b),
                };
                CodeInstance::Mds(MdsStripeCode::build(f, *n, *k, *mode, lo, hi)?)
            }
            Descriptor::Ambr { n, k, d_min, d_max, m, modulus } => {
                CodeInstance::Ambr(AdaptiveMbrCode::new(field_of(*m, *modulus)?, *n, *k, *d_min, *d_max)?)
            }
        })
    }

    pub fn descriptor(&self) -> Descriptor {
        let f = self.field();
        let (m, modulus) = (f.degree(), f.modulus());
        match self {
            CodeInstance::Pm(c) => Descriptor::Pm {
                n: self.n(),
                k: self.k(),
                m,
                modulus,
                lambdas: c.lambdas().iter().map(|x| x.0).collect(),
            },
            CodeInstance::Ia(c) => Descriptor::Ia {
                k: self.k(),
                m,
                modulus,
                kappa: c.kappa().0,
                p: c.p().to_u32_rows(),
                v: c.v().to_u32_rows(),
            },
            CodeInstance::Mds(c) => {
                let (lo, hi) = c.d_range();
                let d_or_range = match c.mode() {
                    MdsMode::Fixed => DOrRange::Single(lo),
                    MdsMode::Adaptive => DOrRange::Range([lo, hi]),
                };
                Descriptor::Mds { n: self.n(), k: self.k(), mode: c.mode(), d_or_range, m, modulus }
            }
            CodeInstance::Ambr(c) => {
                let (d_min, d_max) = c.d_range();
                Descriptor::Ambr { n: self.n(), k: self.k(), d_min, d_max, m, modulus }
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            CodeInstance::Pm(_) => Family::Pm,
            CodeInstance::Ia(_) => Family::Ia,
            CodeInstance::Mds(_) => Family::Mds,
            CodeInstance::Ambr(_) => Family::Ambr,
        }
    }

    pub fn field(&self) -> &Field {
        use crate::framework::ScalarMsrCode;
        match self {
            CodeInstance::Pm(c) => ScalarMsrCode::field(c),
            CodeInstance::Ia(c) => ScalarMsrCode::field(c),
            CodeInstance::Mds(c) => c.field(),
            CodeInstance::Ambr(c) => c.field(),
        }
    }

    pub fn n(&self) -> usize {
        use crate::framework::ScalarMsrCode;
        match self {
            CodeInstance::Pm(c) => c.n(),
            CodeInstance::Ia(c) => c.n(),
            CodeInstance::Mds(c) => c.n(),
            CodeInstance::Ambr(c) => c.n(),
        }
    }

    pub fn k(&self) -> usize {
        use crate::framework::ScalarMsrCode;
        match self {
            CodeInstance::Pm(c) => ScalarMsrCode::k(c),
            CodeInstance::Ia(c) => ScalarMsrCode::k(c),
            CodeInstance::Mds(c) => c.k(),
            CodeInstance::Ambr(c) => c.k(),
        }
    }

    pub fn message_len(&self) -> usize {
        use crate::framework::ScalarMsrCode;
        match self {
            CodeInstance::Pm(c) => c.message_len(),
            CodeInstance::Ia(c) => c.message_len(),
            CodeInstance::Mds(c) => c.file_len(),
            CodeInstance::Ambr(c) => c.message_len(),
        }
    }

    /// Failure counts the family repairs.
    pub fn e_range(&self) -> (usize, usize) {
        let (n, k) = (self.n(), self.k());
        match self {
            CodeInstance::Pm(_) => (1, (k - 1).min(n - k)),
            CodeInstance::Ia(_) => (1, k),
            CodeInstance::Mds(c) => (k, n - c.d_range().0),
            CodeInstance::Ambr(c) => (1, k.min(n - c.d_range().0)),
        }
    }

    pub fn encode(&self, message: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        match self {
            CodeInstance::Pm(c) => c.encode(message),
            CodeInstance::Ia(c) => c.encode(message),
            CodeInstance::Mds(c) => c.encode(message),
            CodeInstance::Ambr(c) => c.encode(message),
        }
    }

    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        match self {
            CodeInstance::Pm(c) => c.reconstruct(nodes, contents),
            CodeInstance::Ia(c) => c.reconstruct(nodes, contents),
            CodeInstance::Mds(c) => c.reconstruct(nodes, contents),
            CodeInstance::Ambr(c) => c.reconstruct(nodes, contents),
        }
    }

    /// Helpers used when none are given: the lowest-indexed survivors, as
    /// many as the family takes for `e` failures.
    pub fn default_helpers(&self, failed: &[usize]) -> Result<Vec<usize>> {
        let (n, k, e) = (self.n(), self.k(), failed.len());
        let count = match self {
            CodeInstance::Pm(_) => 2 * k - 2 - e + 1,
            CodeInstance::Ia(_) => 2 * k - 1 - e + 1,
            CodeInstance::Mds(c) => {
                let (lo, hi) = c.d_range();
                let d = hi.min(n.saturating_sub(e));
                if d < lo {
                    return Err(Error::InvalidHelperCount(format!("no served d for e = {e}")));
                }
                (lo..=d).rev().find(|&d| c.beta(d).is_ok()).unwrap_or(d)
            }
            CodeInstance::Ambr(c) => c.d_range().1.min(n.saturating_sub(e)),
        };
        let survivors: Vec<usize> = (0..n).filter(|x| !failed.contains(x)).collect();
        if survivors.len() < count {
            return Err(Error::InvalidHelperCount(format!("{} survivors, {count} helpers needed", survivors.len())));
        }
        Ok(survivors[..count].to_vec())
    }

    /// Repairs `failed` from `contents` of the survivors.
    pub fn repair(&self, failed: &[usize], helpers: Option<&[usize]>, content_of: &dyn Fn(usize) -> Vec<Elem>) -> Result<RepairOutcome> {
        let helpers = match helpers {
            Some(h) => h.to_vec(),
            None => self.default_helpers(failed)?,
        };
        let (n, k) = (self.n(), self.k());
        match self {
            CodeInstance::Pm(c) => {
                let p = RepairProblem::new(n, k, 2 * k - 2, failed.to_vec(), helpers)?;
                crate::framework::repair_multi(c, &p, content_of)
            }
            CodeInstance::Ia(c) => {
                let p = RepairProblem::new(n, k, 2 * k - 1, failed.to_vec(), helpers)?;
                crate::framework::repair_multi(c, &p, content_of)
            }
            CodeInstance::Mds(c) => c.repair(failed, &helpers, content_of),
            CodeInstance::Ambr(c) => c.repair_multi(failed, &helpers, content_of),
        }
    }
}

pub fn random_message<R: Rng + ?Sized>(field: &Field, len: usize, rng: &mut R) -> Vec<Elem> {
    let top = field.size() as u32;
    (0..len).map(|_| Elem(rng.random_range(0..top) as u16)).collect()
}

/// Generator for pattern number `stream` under `seed`.
pub fn pattern_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub success: bool,
    pub singular: bool,
    pub transcript: RepairTranscript,
}

/// Encodes `message`, erases `pattern`, repairs and compares bit-exactly.
/// A singular coupling system is a failed outcome with `singular` set.
pub fn verify_exact_repair(code: &CodeInstance, pattern: &[usize], helpers: Option<&[usize]>, message: &[Elem]) -> Result<Verification> {
    let golden = code.encode(message)?;
    let read_erased = std::cell::Cell::new(false);
    let erased = |h: usize| -> Vec<Elem> {
        if pattern.contains(&h) {
            read_erased.set(true);
            return vec![Elem::ZERO; golden[h].len()];
        }
        golden[h].clone()
    };
    match code.repair(pattern, helpers, &erased) {
        Ok(out) => {
            let exact = !read_erased.get()
                && out.contents.len() == pattern.len()
                && pattern.iter().zip(&out.contents).all(|(&f, c)| c == &golden[f]);
            let conserved = out.transcript.total == out.transcript.per_helper.values().sum::<usize>();
            Ok(Verification { success: exact && conserved && out.transcript.success, singular: false, transcript: out.transcript })
        }
        Err(Error::SingularCoupling { .. }) => {
            Ok(Verification { success: false, singular: true, transcript: RepairTranscript::default() })
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sample {
    All,
    Random(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternOutcome {
    pub pattern: Vec<usize>,
    pub success: bool,
    pub bandwidth: usize,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: Family,
    pub code: Descriptor,
    pub e: usize,
    pub seed: u64,
    pub outcomes: Vec<PatternOutcome>,
    pub successes: usize,
    pub failures: usize,
    pub singular: usize,
}

impl SweepReport {
    pub fn singular_patterns(&self) -> Vec<Vec<usize>> {
        self.outcomes.iter().filter(|o| o.singular).map(|o| o.pattern.clone()).collect()
    }
}

/// Verifies every pattern of `e` failures (or a seeded random subset) with
/// default helpers. Outcomes follow lexicographic pattern order.
pub fn run_sweep(code: &CodeInstance, e: usize, sample: Sample, seed: u64) -> Result<SweepReport> {
    let (lo, hi) = code.e_range();
    if e < lo || e > hi {
        return Err(Error::InvalidParams(format!("{} codes repair {lo}..={hi} failures, got e = {e}", code.family())));
    }
    let all = combinations(code.n(), e);
    let chosen: Vec<(usize, Vec<usize>)> = match sample {
        Sample::All => all.into_iter().enumerate().collect(),
        Sample::Random(count) => {
            let mut rng = pattern_rng(seed, u64::MAX);
            let mut idx = index::sample(&mut rng, all.len(), count.min(all.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| (i, all[i].clone())).collect()
        }
    };
    let len = code.message_len();
    let outcomes = chosen
        .into_par_iter()
        .map(|(rank, pattern)| {
            let msg = random_message(code.field(), len, &mut pattern_rng(seed, rank as u64));
            let v = verify_exact_repair(code, &pattern, None, &msg)?;
            Ok(PatternOutcome { bandwidth: v.transcript.total, success: v.success, singular: v.singular, pattern })
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|o| o.success).count();
    let singular = outcomes.iter().filter(|o| o.singular).count();
    Ok(SweepReport {
        family: code.family(),
        code: code.descriptor(),
        e,
        seed,
        failures: outcomes.len() - successes,
        successes,
        singular,
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub descriptor: Descriptor,
    pub trials: usize,
}

/// Seeded search for a PM `lambda` assignment or an IA matrix `P` whose
/// codes repair every pattern of `2..=e_max` failures. Trial 0 is the
/// family's default assignment. MDS and adaptive MBR codes have nothing to
/// search and are rejected.
pub fn search_assignment(family: Family, field: &Field, n: usize, k: usize, e_max: usize, budget: usize, seed: u64) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::InvalidParams("budget must be at least 1".into()));
    }
    match family {
        Family::Pm => {
            let (lambdas, trials) = pm::field_search(field, n, k, e_max, budget, seed)?;
            let code = CodeInstance::Pm(PmCode::new(field.clone(), n, k, lambdas)?);
            confirm(&code, e_max, seed)?;
            Ok(SearchResult { descriptor: code.descriptor(), trials })
        }
        Family::Ia => {
            if n != 2 * k || e_max > k {
                return Err(Error::InvalidParams(format!("IA search needs n = 2k and e_max <= k (n={n} k={k} e_max={e_max})")));
            }
            let mut rng = pattern_rng(seed, u64::MAX - 1);
            for t in 0..budget {
                let code = if t == 0 {
                    IaCode::with_defaults(field.clone(), k)
                } else {
                    ia::random_p(field, k, &mut rng, 1000)
                        .and_then(|p| IaCode::new(field.clone(), p, Matrix::identity(k), ia::default_kappa(field)))
                };
                let Ok(code) = code else { continue };
                let ok = (2..=e_max).all(|e| {
                    combinations(2 * k, e).par_iter().all(|p| code.coupling_det(p).is_ok_and(|d| !d.is_zero()))
                });
                if ok {
                    let inst = CodeInstance::Ia(code);
                    confirm(&inst, e_max, seed)?;
                    return Ok(SearchResult { descriptor: inst.descriptor(), trials: t + 1 });
                }
            }
            Err(Error::NotFound { trials: budget })
        }
        Family::Mds | Family::Ambr => {
            Err(Error::InvalidParams(format!("{family} codes have a fixed construction; use code build")))
        }
    }
}

fn confirm(code: &CodeInstance, e_max: usize, seed: u64) -> Result<()> {
    for e in 1..=e_max {
        let r = run_sweep(code, e, Sample::All, seed)?;
        if r.failures > 0 {
            return Err(Error::NotFound { trials: 0 });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub file_size: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub e: usize,
}

impl From<&SystemParams> for ParamsEcho {
    fn from(p: &SystemParams) -> Self {
        ParamsEcho { file_size: p.file_size.to_string(), n: p.n, k: p.k, d: p.d, e: p.e }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRow {
    pub gamma_num: String,
    pub gamma_den: String,
    pub alpha_num: String,
    pub alpha_den: String,
    pub segment: usize,
}

impl CurveRow {
    fn new(gamma: &Rational, alpha: &Rational, segment: usize) -> Self {
        let (gamma_num, gamma_den) = rational_parts(gamma);
        let (alpha_num, alpha_den) = rational_parts(alpha);
        CurveRow { gamma_num, gamma_den, alpha_num, alpha_den, segment }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveExport {
    pub params: ParamsEcho,
    pub rows: Vec<CurveRow>,
    /// Evenly spaced `gamma` samples between the two extreme points.
    pub dense: Vec<CurveRow>,
}

/// Breakpoints sorted by `gamma`, plus `samples` extra evaluations.
pub fn curve_export(params: &SystemParams, samples: usize) -> Result<CurveExport> {
    let pts = tradeoff::tradeoff_curve(params);
    let rows = pts.iter().map(|p| CurveRow::new(&p.gamma, &p.alpha, p.segment)).collect();
    let mut dense = Vec::new();
    if samples >= 2 && pts.len() >= 2 {
        let lo = pts[0].gamma.clone();
        let hi = pts[pts.len() - 1].gamma.clone();
        for i in 0..samples {
            let g = &lo + (&hi - &lo) * tradeoff::rat(i as i64, (samples - 1) as i64);
            let a = tradeoff::alpha_star(params, &g)?;
            let seg = pts.iter().rposition(|p| p.gamma <= g).map_or(0, |j| pts[j].segment);
            dense.push(CurveRow::new(&g, &a, seg));
        }
    }
    Ok(CurveExport { params: params.into(), rows, dense })
}

impl CurveExport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma_num,gamma_den,alpha_num,alpha_den,segment\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.gamma_num, r.gamma_den, r.alpha_num, r.alpha_den, r.segment);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonExportRow {
    pub alpha: String,
    pub centralized: String,
    pub separate: String,
    pub centralized_fewer: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonExport {
    pub params: ParamsEcho,
    pub rows: Vec<ComparisonExportRow>,
    pub msmr_ratio_same_d: String,
    pub msmr_ratio_fewer: Option<String>,
    pub crossovers: Vec<String>,
}

pub fn comparison_export(params: &SystemParams) -> Result<ComparisonExport> {
    let r = tradeoff::compare_strategies(params)?;
    Ok(ComparisonExport {
        params: params.into(),
        rows: r
            .rows
            .iter()
            .map(|row| ComparisonExportRow {
                alpha: row.alpha.to_string(),
                centralized: row.centralized.to_string(),
                separate: row.separate.to_string(),
                centralized_fewer: row.centralized_fewer.as_ref().map(ToString::to_string),
            })
            .collect(),
        msmr_ratio_same_d: r.msmr_ratio_same_d.to_string(),
        msmr_ratio_fewer: r.msmr_ratio_fewer.as_ref().map(ToString::to_string),
        crossovers: r.crossovers().iter().map(ToString::to_string).collect(),
    })
}

impl ComparisonExport {
    /// One row per storage value; the last column is empty when fewer than
    /// `k` helpers would remain.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,centralized,separate,centralized_fewer\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.alpha, r.centralized, r.separate, r.centralized_fewer.as_deref().unwrap_or(""));
        }
        s
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn emit_curve(params: &SystemParams, path: &Path) -> Result<()> {
    write_file(path, &curve_export(params, 0)?.to_csv())
}

pub fn emit_comparison(params: &SystemParams, path: &Path) -> Result<()> {
    write_file(path, &comparison_export(params)?.to_csv())
}
