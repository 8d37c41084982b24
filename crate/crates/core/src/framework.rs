//! Centralized repair of `e` failed nodes of a scalar (`beta = 1`) MSR code.
//!
//! A central repairer receives `e` symbols from each of `d - e + 1` helpers:
//! one for every failed node, exactly what that helper would send in a
//! single-failure repair. Each failed node would also need one symbol from
//! each of the other `e - 1` failed nodes. Those `e(e - 1)` unknown
//! transfers `s[a -> b]` are linear in the transfers into `a`, which gives a
//! square system `A s = b` (a [`CouplingSystem`]). Once solved, every failed
//! node is regenerated with its ordinary single-failure decoder.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::matrix::{dot, Matrix};

/// Failed nodes and the helpers serving them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairProblem {
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub beta: usize,
}

impl RepairProblem {
    /// Checks disjointness, range and `|helpers| = d - e + 1 >= k`.
    pub fn new(n: usize, k: usize, d: usize, failed: Vec<usize>, helpers: Vec<usize>) -> Result<Self> {
        let e = failed.len();
        if e == 0 {
            return Err(Error::InvalidParams("no failed nodes".into()));
        }
        let fs: BTreeSet<_> = failed.iter().copied().collect();
        let hs: BTreeSet<_> = helpers.iter().copied().collect();
        if fs.len() != e || hs.len() != helpers.len() {
            return Err(Error::InvalidHelperCount("duplicate node index".into()));
        }
        if let Some(&bad) = fs.iter().chain(&hs).find(|&&x| x >= n) {
            return Err(Error::InvalidHelperCount(format!("node {bad} out of range for n = {n}")));
        }
        if !fs.is_disjoint(&hs) {
            return Err(Error::InvalidHelperCount("a failed node cannot help".into()));
        }
        if e > d + 1 || helpers.len() != d + 1 - e {
            return Err(Error::InvalidHelperCount(format!(
                "{} helpers for {e} failures with d = {d}; need d - e + 1",
                helpers.len()
            )));
        }
        if helpers.len() < k {
            return Err(Error::InvalidHelperCount(format!(
                "d - e + 1 = {} is below k = {k}",
                helpers.len()
            )));
        }
        Ok(RepairProblem { failed, helpers, beta: 1 })
    }

    /// Uses the lowest-indexed survivors as helpers.
    pub fn with_default_helpers(n: usize, k: usize, d: usize, failed: Vec<usize>) -> Result<Self> {
        let want = (d + 1).saturating_sub(failed.len());
        let helpers: Vec<usize> = (0..n).filter(|x| !failed.contains(x)).take(want).collect();
        RepairProblem::new(n, k, d, failed, helpers)
    }

    pub fn e(&self) -> usize {
        self.failed.len()
    }

    /// The `d` nodes serving failed node `f` in its emulated single repair,
    /// in ascending order.
    pub fn helpers_of(&self, f: usize) -> Vec<usize> {
        let mut h: Vec<usize> = self
            .helpers
            .iter()
            .chain(&self.failed)
            .copied()
            .filter(|&x| x != f)
            .collect();
        h.sort_unstable();
        h
    }
}

/// Position of the unknown transfer from `failed[i]` to `failed[j]`.
///
/// Pairs are ordered `(0,1), (1,0), (0,2), (2,0), (1,2), (2,1), (0,3), ...`.
pub fn unknown_index(i: usize, j: usize) -> usize {
    assert_ne!(i, j, "a node does not transfer to itself");
    let (a, b) = (i.min(j), i.max(j));
    2 * (b * (b - 1) / 2 + a) + usize::from(i > j)
}

/// Inverse of [`unknown_index`] for `e` failed nodes.
pub fn unknown_pairs(e: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(e * e.saturating_sub(1));
    for b in 1..e {
        for a in 0..b {
            out.push((a, b));
            out.push((b, a));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingSystem {
    pub a: Matrix,
    pub b: Vec<Elem>,
    /// `(source, target)` node ids for each unknown, in [`unknown_index`] order.
    pub index_map: Vec<(usize, usize)>,
}

impl CouplingSystem {
    pub fn det(&self, field: &Field) -> Elem {
        if self.a.rows() == 0 {
            return Elem::ONE;
        }
        self.a.det(field).expect("coupling matrix is square")
    }

    pub fn solve(&self, field: &Field, pattern: &[usize]) -> Result<Vec<Elem>> {
        if self.a.rows() == 0 {
            return Ok(Vec::new());
        }
        self.a.solve_vec(field, &self.b).map_err(|err| match err {
            Error::Singular => Error::SingularCoupling { pattern: pattern.to_vec() },
            other => other,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTranscript {
    pub per_helper: BTreeMap<usize, usize>,
    pub total: usize,
    pub success: bool,
}

impl RepairTranscript {
    pub fn record(&mut self, helper: usize, symbols: usize) {
        *self.per_helper.entry(helper).or_default() += symbols;
        self.total += symbols;
    }
}

/// Regenerated contents, in the order of `RepairProblem::failed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairOutcome {
    pub contents: Vec<Vec<Elem>>,
    pub transcript: RepairTranscript,
}

/// A linear MSR code with `beta = 1` whose single-failure repair fits the
/// centralized framework.
pub trait ScalarMsrCode: Sync {
    fn field(&self) -> &Field;
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn d(&self) -> usize;
    fn alpha(&self) -> usize;
    fn message_len(&self) -> usize;

    /// `alpha x message_len` matrix with `content(node) = G * message`.
    fn node_generator(&self, node: usize) -> Matrix;

    /// Vector `x` such that `from` sends `content(from) . x` to repair `to`.
    fn repair_vector(&self, from: usize, to: usize) -> Vec<Elem>;

    /// Closed-form single-failure repair from transfers of `helpers`.
    fn decode_single(&self, node: usize, helpers: &[usize], transfers: &[Elem]) -> Result<Vec<Elem>>;

    /// Coefficients `c_h` with `s[source -> target] = sum_h c_h s[h -> source]`,
    /// aligned with `helpers_of_source`.
    fn coupling_row(&self, source: usize, target: usize, helpers_of_source: &[usize]) -> Result<Vec<Elem>>;

    fn transfer(&self, from: usize, content: &[Elem], to: usize) -> Elem {
        dot(self.field(), content, &self.repair_vector(from, to))
    }
}

/// The `alpha x d` matrix `D` with `content(node) = D * transfers` for the
/// given helpers, solved from the generator.
pub fn generic_decoder<C: ScalarMsrCode + ?Sized>(code: &C, node: usize, helpers: &[usize]) -> Result<Matrix> {
    let f = code.field();
    let rows: Vec<Vec<Elem>> = helpers
        .iter()
        .map(|&h| code.node_generator(h).transpose().mul_vec(f, &code.repair_vector(h, node)))
        .collect::<Result<_>>()?;
    let t = Matrix::from_rows(&rows)?;
    let g = code.node_generator(node);
    // D T = G  <=>  T^t D^t = G^t
    Ok(t.transpose().solve_consistent(f, &g.transpose())?.transpose())
}

/// Coupling row computed from the generator rather than closed forms.
pub fn generic_coupling_row<C: ScalarMsrCode + ?Sized>(
    code: &C,
    source: usize,
    target: usize,
    helpers_of_source: &[usize],
) -> Result<Vec<Elem>> {
    let dmat = generic_decoder(code, source, helpers_of_source)?;
    dmat.left_mul_vec(code.field(), &code.repair_vector(source, target))
}

/// Builds `A s = b` from the transfers the helpers sent.
/// `received[(h, f)]` is the symbol helper `h` sent for failed node `f`.
pub fn assemble<C: ScalarMsrCode + ?Sized>(
    code: &C,
    problem: &RepairProblem,
    received: &BTreeMap<(usize, usize), Elem>,
) -> Result<CouplingSystem> {
    let f = code.field();
    let pairs = unknown_pairs(problem.e());
    let size = pairs.len();
    let pos: BTreeMap<usize, usize> = problem.failed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut a = Matrix::identity(size);
    let mut b = vec![Elem::ZERO; size];
    let mut index_map = Vec::with_capacity(size);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        let (src, dst) = (problem.failed[i], problem.failed[j]);
        index_map.push((src, dst));
        let hs = problem.helpers_of(src);
        let coefs = code.coupling_row(src, dst, &hs)?;
        for (&h, &c) in hs.iter().zip(&coefs) {
            match pos.get(&h) {
                Some(&l) => a[(row, unknown_index(l, i))] += c,
                None => {
                    let s = received.get(&(h, src)).ok_or_else(|| {
                        Error::Malformed(format!("missing transfer from {h} to {src}"))
                    })?;
                    b[row] += f.mul(c, *s);
                }
            }
        }
    }
    Ok(CouplingSystem { a, b, index_map })
}

/// Solves the coupling system and runs the single-failure decoder of every
/// failed node.
pub fn solve_and_regenerate<C: ScalarMsrCode + ?Sized>(
    code: &C,
    problem: &RepairProblem,
    system: &CouplingSystem,
    received: &BTreeMap<(usize, usize), Elem>,
) -> Result<RepairOutcome> {
    let s = system.solve(code.field(), &problem.failed)?;
    let pos: BTreeMap<usize, usize> = problem.failed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut contents = Vec::with_capacity(problem.e());
    for (j, &node) in problem.failed.iter().enumerate() {
        let hs = problem.helpers_of(node);
        let transfers: Vec<Elem> = hs
            .iter()
            .map(|h| match pos.get(h) {
                Some(&i) => s[unknown_index(i, j)],
                None => received[&(*h, node)],
            })
            .collect();
        contents.push(code.decode_single(node, &hs, &transfers)?);
    }
    let mut transcript = RepairTranscript::default();
    for &(h, _) in received.keys() {
        transcript.record(h, problem.beta);
    }
    transcript.success = true;
    Ok(RepairOutcome { contents, transcript })
}

/// Full centralized repair: helpers compute their transfers from their
/// stored contents, then the repairer assembles, solves and decodes.
pub fn repair_multi<C: ScalarMsrCode + ?Sized>(
    code: &C,
    problem: &RepairProblem,
    content_of: &dyn Fn(usize) -> Vec<Elem>,
) -> Result<RepairOutcome> {
    let mut received = BTreeMap::new();
    for &h in &problem.helpers {
        let w = content_of(h);
        for &f in &problem.failed {
            received.insert((h, f), code.transfer(h, &w, f));
        }
    }
    let system = assemble(code, problem, &received)?;
    solve_and_regenerate(code, problem, &system, &received)
}

/// Ordinary repair of one node from `d` helpers.
pub fn repair_single<C: ScalarMsrCode + ?Sized>(
    code: &C,
    node: usize,
    helpers: &[usize],
    content_of: &dyn Fn(usize) -> Vec<Elem>,
) -> Result<RepairOutcome> {
    if helpers.len() != code.d() || helpers.contains(&node) {
        return Err(Error::InvalidHelperCount(format!(
            "single repair needs d = {} helpers other than node {node}",
            code.d()
        )));
    }
    let mut transcript = RepairTranscript::default();
    let transfers: Vec<Elem> = helpers
        .iter()
        .map(|&h| {
            transcript.record(h, 1);
            code.transfer(h, &content_of(h), node)
        })
        .collect();
    let content = code.decode_single(node, helpers, &transfers)?;
    transcript.success = true;
    Ok(RepairOutcome { contents: vec![content], transcript })
}

/// Coupling matrix for the pattern without any data flowing, for
/// singularity checks.
pub fn coupling_matrix<C: ScalarMsrCode + ?Sized>(code: &C, problem: &RepairProblem) -> Result<CouplingSystem> {
    let mut received = BTreeMap::new();
    for &h in &problem.helpers {
        for &f in &problem.failed {
            received.insert((h, f), Elem::ZERO);
        }
    }
    assemble(code, problem, &received)
}
