//! Product-matrix MSR code with `d = 2k - 2`, `alpha = k - 1`, `beta = 1`.
//!
//! Node `i` stores `psi_i^t M` where `psi_i = [1, l_i, ..., l_i^(d-1)]` and
//! `M = [S1; S2]` stacks two symmetric `alpha x alpha` message matrices.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::framework::{self, CouplingSystem, RepairOutcome, RepairProblem, ScalarMsrCode};
use crate::gf::{Elem, Field};
use crate::matrix::{combinations, Matrix};

#[derive(Clone, Debug)]
pub struct PmCode {
    field: Field,
    n: usize,
    k: usize,
    lambdas: Vec<Elem>,
    psi: Matrix,
    lambda_alpha: Vec<Elem>,
}

fn tri_index(alpha: usize, a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * alpha - a * a.saturating_sub(1) / 2 + (b - a)
}

impl PmCode {
    pub fn new(field: Field, n: usize, k: usize, lambdas: Vec<Elem>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("k = {k}; product-matrix MSR needs k >= 2")));
        }
        let d = 2 * k - 2;
        if n < d + 1 {
            return Err(Error::InvalidParams(format!("n = {n} is below d + 1 = {}", d + 1)));
        }
        if lambdas.len() != n {
            return Err(Error::DimensionMismatch(format!("{} lambdas for n = {n}", lambdas.len())));
        }
        if let Some(bad) = lambdas.iter().find(|&&l| !field.contains(l)) {
            return Err(Error::ElementOutOfRange { value: bad.0 as u32, m: field.degree() });
        }
        let psi = Matrix::vandermonde(&field, &lambdas, d)?;
        let alpha = k - 1;
        let lambda_alpha: Vec<Elem> = lambdas.iter().map(|&l| field.pow(l, alpha as u64)).collect();
        for i in 0..n {
            for j in 0..i {
                if lambda_alpha[i] == lambda_alpha[j] {
                    return Err(Error::InvalidParams(format!(
                        "lambda_{j}^alpha = lambda_{i}^alpha = {}",
                        lambda_alpha[i]
                    )));
                }
            }
        }
        Ok(PmCode { field, n, k, lambdas, psi, lambda_alpha })
    }

    /// `lambda_i = g^i` for the field generator `g` (0-based `i`).
    pub fn geometric(field: Field, n: usize, k: usize) -> Result<Self> {
        let lambdas = (0..n as u64).map(|i| field.gen_pow(i)).collect();
        PmCode::new(field, n, k, lambdas)
    }

    pub fn lambdas(&self) -> &[Elem] {
        &self.lambdas
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    /// `M = [S1; S2]` from `k(k-1)` message symbols: the upper triangle of
    /// `S1` row by row, then that of `S2`.
    pub fn message_matrix(&self, msg: &[Elem]) -> Result<Matrix> {
        if msg.len() != self.message_len() {
            return Err(Error::DimensionMismatch(format!(
                "message of {} symbols, expected {}",
                msg.len(),
                self.message_len()
            )));
        }
        let a = self.alpha();
        let half = a * (a + 1) / 2;
        Ok(Matrix::from_fn(2 * a, a, |r, c| {
            if r < a {
                msg[tri_index(a, r, c)]
            } else {
                msg[half + tri_index(a, r - a, c)]
            }
        }))
    }

    pub fn encode(&self, msg: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        let c = self.psi.mul(&self.field, &self.message_matrix(msg)?)?;
        Ok((0..self.n).map(|i| c.row(i).to_vec()).collect())
    }

    /// Recovers the message from any `k` nodes.
    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        stacked_solve(self, nodes, contents)
    }

    /// Closed-form coefficient of `s[l -> i]` in `s[i -> j] = phi_j^t w_i`
    /// when node `i` is repaired from `helpers_of_i`.
    pub fn coefficient(&self, i: usize, j: usize, l: usize, helpers_of_i: &[usize]) -> Elem {
        let f = &self.field;
        let d = self.d();
        let a = self.alpha();
        // prod_{m in H_i \ {l}} (x - l_m); coefficient h-1 is gamma_h.
        let mut poly = vec![Elem::ZERO; d];
        poly[0] = Elem::ONE;
        let mut deg = 0;
        for &m in helpers_of_i.iter().filter(|&&m| m != l) {
            let lm = self.lambdas[m];
            deg += 1;
            for t in (1..=deg).rev() {
                poly[t] = poly[t - 1] + f.mul(poly[t], lm);
            }
            poly[0] = f.mul(poly[0], lm);
        }
        let eval = |x: Elem| poly.iter().rev().fold(Elem::ZERO, |acc, &c| f.mul(acc, x) + c);
        let denom = eval(self.lambdas[l]);
        let lj = self.lambdas[j];
        let la = self.lambda_alpha[i];
        let mut num = Elem::ZERO;
        let mut pw = Elem::ONE;
        for h in 0..a {
            num += f.mul(poly[h] + f.mul(la, poly[h + a]), pw);
            pw = f.mul(pw, lj);
        }
        f.div(num, denom).expect("distinct lambdas give a nonzero denominator")
    }

    pub fn problem(&self, failed: Vec<usize>) -> Result<RepairProblem> {
        RepairProblem::with_default_helpers(self.n, self.k, self.d(), failed)
    }

    /// Coupling system for a failure pattern, without data.
    pub fn assemble_multi(&self, problem: &RepairProblem) -> Result<CouplingSystem> {
        framework::coupling_matrix(self, problem)
    }

    pub fn repair_multi(&self, problem: &RepairProblem, contents: &[Vec<Elem>]) -> Result<RepairOutcome> {
        framework::repair_multi(self, problem, &|h| contents[h].clone())
    }

    pub fn repair_single(&self, node: usize, helpers: &[usize], contents: &[Vec<Elem>]) -> Result<RepairOutcome> {
        framework::repair_single(self, node, helpers, &|h| contents[h].clone())
    }

    /// Patterns of size `e` whose coupling matrix is singular, with default helpers.
    pub fn singular_patterns(&self, e: usize) -> Result<Vec<Vec<usize>>> {
        singular_patterns(self, e)
    }
}

/// Solves the stacked generator rows of `nodes` for the message.
pub(crate) fn stacked_solve<C: ScalarMsrCode + ?Sized>(
    code: &C,
    nodes: &[usize],
    contents: &[Vec<Elem>],
) -> Result<Vec<Elem>> {
    if nodes.len() != contents.len() {
        return Err(Error::DimensionMismatch("one content row per node".into()));
    }
    let mut distinct = nodes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != code.k() || nodes.len() != code.k() {
        return Err(Error::InvalidParams(format!("reconstruction needs k = {} distinct nodes", code.k())));
    }
    let mut g = Matrix::zeros(0, code.message_len());
    let mut rhs = Vec::with_capacity(code.k() * code.alpha());
    for (&node, w) in nodes.iter().zip(contents) {
        if node >= code.n() || w.len() != code.alpha() {
            return Err(Error::DimensionMismatch(format!("bad content for node {node}")));
        }
        g = g.vstack(&code.node_generator(node))?;
        rhs.extend_from_slice(w);
    }
    Ok(g.solve_consistent(code.field(), &Matrix::column(rhs))?.into_data())
}

pub(crate) fn singular_patterns<C: ScalarMsrCode + ?Sized>(code: &C, e: usize) -> Result<Vec<Vec<usize>>> {
    use rayon::prelude::*;
    let pats = combinations(code.n(), e);
    let flags = pats
        .par_iter()
        .map(|p| {
            let problem = RepairProblem::with_default_helpers(code.n(), code.k(), code.d(), p.clone())?;
            let sys = framework::coupling_matrix(code, &problem)?;
            Ok(sys.det(code.field()).is_zero())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(pats.into_iter().zip(flags).filter(|(_, s)| *s).map(|(p, _)| p).collect())
}

impl ScalarMsrCode for PmCode {
    fn field(&self) -> &Field {
        &self.field
    }
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn d(&self) -> usize {
        2 * self.k - 2
    }
    fn alpha(&self) -> usize {
        self.k - 1
    }
    fn message_len(&self) -> usize {
        self.k * (self.k - 1)
    }

    fn node_generator(&self, node: usize) -> Matrix {
        let a = self.alpha();
        let half = a * (a + 1) / 2;
        let mut g = Matrix::zeros(a, self.message_len());
        for c in 0..a {
            for r in 0..2 * a {
                let idx = if r < a { tri_index(a, r, c) } else { half + tri_index(a, r - a, c) };
                g[(c, idx)] += self.psi[(node, r)];
            }
        }
        g
    }

    fn repair_vector(&self, _from: usize, to: usize) -> Vec<Elem> {
        self.psi.row(to)[..self.alpha()].to_vec()
    }

    fn decode_single(&self, node: usize, helpers: &[usize], transfers: &[Elem]) -> Result<Vec<Elem>> {
        if helpers.len() != self.d() || transfers.len() != self.d() {
            return Err(Error::InvalidHelperCount(format!("need d = {} transfers", self.d())));
        }
        // Psi_H (M phi_i) = transfers; by symmetry M phi_i = [S1 phi_i; S2 phi_i].
        let x = self.psi.select_rows(helpers).solve_vec(&self.field, transfers)?;
        let a = self.alpha();
        let la = self.lambda_alpha[node];
        Ok((0..a).map(|c| x[c] + self.field.mul(la, x[a + c])).collect())
    }

    fn coupling_row(&self, source: usize, target: usize, helpers_of_source: &[usize]) -> Result<Vec<Elem>> {
        Ok(helpers_of_source
            .iter()
            .map(|&l| self.coefficient(source, target, l, helpers_of_source))
            .collect())
    }
}

/// Randomized search for `lambda` assignments whose coupling systems are
/// nonsingular for every pattern of size `2..=e_max`. Trial 0 is the
/// geometric assignment `g^i`. Returns the assignment and the trials used.
pub fn field_search(field: &Field, n: usize, k: usize, e_max: usize, trials: usize, seed: u64) -> Result<(Vec<Elem>, usize)> {
    if k < 2 || e_max == 0 || e_max > k - 1 || e_max > n.saturating_sub(k) {
        return Err(Error::InvalidParams(format!(
            "e_max = {e_max} must satisfy 1 <= e_max <= min(k - 1, n - k) (k = {k}, n = {n})"
        )));
    }
    let q1 = field.size() as u64 - 1;
    let alpha = (k - 1) as u64;
    let distinct_powers = q1 / num_integer::gcd(q1, alpha);
    if (distinct_powers as usize) < n {
        return Err(Error::NotFound { trials: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let lambdas: Vec<Elem> = if t == 0 {
            (0..n as u64).map(|i| field.gen_pow(i)).collect()
        } else {
            index::sample(&mut rng, q1 as usize, n).into_iter().map(|v| Elem(v as u16 + 1)).collect()
        };
        let Ok(code) = PmCode::new(field.clone(), n, k, lambdas) else { continue };
        let mut ok = true;
        for e in 2..=e_max {
            if !code.singular_patterns(e)?.is_empty() {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok((code.lambdas, t + 1));
        }
    }
    Err(Error::NotFound { trials })
}
