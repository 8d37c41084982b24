//! Interference-alignment MSR code with `n = 2k`, `d = 2k - 1`,
//! `alpha = k`, `beta = 1`.
//!
//! Nodes `0..k` are systematic and store `w_j`; nodes `k..2k` are parity
//! and store `wb_i^t = sum_j w_j^t (u_i v_j^t + P[j][i] I)` with
//! `U = kappa^-1 V' P`. Primes denote inverse transposes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::framework::{self, CouplingSystem, RepairOutcome, RepairProblem, ScalarMsrCode};
use crate::gf::{Elem, Field};
use crate::matrix::{combinations, dot, Matrix};

#[derive(Clone, Debug)]
pub struct IaCode {
    field: Field,
    k: usize,
    kappa: Elem,
    p: Matrix,
    v: Matrix,
    u: Matrix,
    p_dual: Matrix,
    p_inv: Matrix,
    u_dual: Matrix,
    v_dual: Matrix,
}

/// Smallest `kappa` with `kappa != 0` and `kappa^2 != 1`.
pub fn default_kappa(field: &Field) -> Elem {
    field
        .elements()
        .find(|&x| !x.is_zero() && field.mul(x, x) != Elem::ONE)
        .expect("fields with m >= 3 have such an element")
}

/// `P[i][j] = g^(i j)`.
pub fn vandermonde_p(field: &Field, k: usize) -> Matrix {
    Matrix::from_fn(k, k, |i, j| field.gen_pow((i * j) as u64))
}

/// `P[i][j] = 1 / (g^i + g^(k + j))`.
pub fn cauchy_p(field: &Field, k: usize) -> Result<Matrix> {
    if 2 * k > field.size() - 1 {
        return Err(Error::FieldTooSmall(format!("Cauchy matrix of order {k} needs {} points", 2 * k)));
    }
    let mut m = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = field.inv(field.gen_pow(i as u64) + field.gen_pow((k + j) as u64))?;
        }
    }
    Ok(m)
}

/// Uniformly random `k x k` matrices, resampled until every square
/// submatrix is invertible.
pub fn random_p<R: Rng + ?Sized>(field: &Field, k: usize, rng: &mut R, max_tries: usize) -> Result<Matrix> {
    let top = field.size() as u32;
    for _ in 0..max_tries {
        let p = Matrix::from_fn(k, k, |_, _| Elem(rng.random_range(1..top) as u16));
        if p.all_square_submatrices_invertible(field) {
            return Ok(p);
        }
    }
    Err(Error::NotFound { trials: max_tries })
}

fn dual(field: &Field, m: &Matrix) -> Result<Matrix> {
    Ok(m.inv(field)?.transpose())
}

/// Split of a failure pattern into systematic and parity positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternShape {
    pub systematic: Vec<usize>,
    pub parity: Vec<usize>,
}

impl IaCode {
    pub fn new(field: Field, p: Matrix, v: Matrix, kappa: Elem) -> Result<Self> {
        let k = p.rows();
        if k == 0 || !p.is_square() || (v.rows(), v.cols()) != (k, k) {
            return Err(Error::DimensionMismatch("P and V must both be k x k".into()));
        }
        if kappa.is_zero() || field.mul(kappa, kappa) == Elem::ONE || !field.contains(kappa) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} needs kappa != 0 and kappa^2 != 1")));
        }
        if !p.all_square_submatrices_invertible(&field) {
            return Err(Error::InvalidParams("P has a singular square submatrix".into()));
        }
        let v_dual = dual(&field, &v).map_err(|_| Error::InvalidParams("V is singular".into()))?;
        let p_inv = p.inv(&field)?;
        let p_dual = p_inv.transpose();
        let u = v_dual.mul(&field, &p)?.scale(&field, field.inv(kappa)?);
        let u_dual = dual(&field, &u)?;
        Ok(IaCode { field, k, kappa, p, v, u, p_dual, p_inv, u_dual, v_dual })
    }

    /// `V = I`, Vandermonde `P` when all its submatrices are invertible and
    /// a Cauchy `P` otherwise, and the default `kappa`.
    pub fn with_defaults(field: Field, k: usize) -> Result<Self> {
        let vp = vandermonde_p(&field, k);
        let p = if vp.all_square_submatrices_invertible(&field) { vp } else { cauchy_p(&field, k)? };
        let kappa = default_kappa(&field);
        IaCode::new(field, p, Matrix::identity(k), kappa)
    }

    pub fn kappa(&self) -> Elem {
        self.kappa
    }
    pub fn p(&self) -> &Matrix {
        &self.p
    }
    pub fn v(&self) -> &Matrix {
        &self.v
    }
    pub fn u(&self) -> &Matrix {
        &self.u
    }
    pub fn p_inv(&self) -> &Matrix {
        &self.p_inv
    }
    pub fn p_dual(&self) -> &Matrix {
        &self.p_dual
    }
    pub fn u_dual(&self) -> &Matrix {
        &self.u_dual
    }
    pub fn v_dual(&self) -> &Matrix {
        &self.v_dual
    }

    pub fn is_systematic(&self, node: usize) -> bool {
        node < self.k
    }

    pub fn shape(&self, pattern: &[usize]) -> PatternShape {
        PatternShape {
            systematic: pattern.iter().copied().filter(|&x| x < self.k).collect(),
            parity: pattern.iter().copied().filter(|&x| x >= self.k).map(|x| x - self.k).collect(),
        }
    }

    /// `G_j^(i) = u_i v_j^t + P[j][i] I`.
    pub fn parity_block(&self, i: usize, j: usize) -> Matrix {
        let f = &self.field;
        Matrix::from_fn(self.k, self.k, |r, c| {
            let mut x = f.mul(self.u[(r, i)], self.v[(c, j)]);
            if r == c {
                x += self.p[(j, i)];
            }
            x
        })
    }

    /// Systematic contents are consecutive runs of `k` data symbols.
    pub fn encode(&self, data: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        let k = self.k;
        if data.len() != k * k {
            return Err(Error::DimensionMismatch(format!("{} data symbols, expected {}", data.len(), k * k)));
        }
        let mut out: Vec<Vec<Elem>> = data.chunks(k).map(<[Elem]>::to_vec).collect();
        for i in 0..k {
            let mut acc = vec![Elem::ZERO; k];
            for j in 0..k {
                let row = self.parity_block(i, j).left_mul_vec(&self.field, &out[j])?;
                for (a, b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        crate::pm::stacked_solve(self, nodes, contents)
    }

    /// `U' - kappa^2/(1+kappa) V e_l e_l^t P'`.
    pub fn systematic_decoder(&self, l: usize) -> Matrix {
        let f = &self.field;
        let c = f.div(f.mul(self.kappa, self.kappa), Elem::ONE + self.kappa).expect("kappa != 1");
        Matrix::from_fn(self.k, self.k, |r, s| self.u_dual[(r, s)] + f.mul(c, f.mul(self.v[(r, l)], self.p_dual[(l, s)])))
    }

    /// `(1-kappa^2) V + (1+kappa) U' e_l e_l^t P^t`.
    pub fn parity_decoder(&self, l: usize) -> Matrix {
        let f = &self.field;
        let a = Elem::ONE + f.mul(self.kappa, self.kappa);
        let b = Elem::ONE + self.kappa;
        Matrix::from_fn(self.k, self.k, |r, s| {
            f.mul(a, self.v[(r, s)]) + f.mul(b, f.mul(self.u_dual[(r, l)], self.p[(s, l)]))
        })
    }

    /// Matrix mapping `w_l` to the interference-free parity combinations
    /// in a systematic repair; the inverse of [`Self::systematic_decoder`].
    pub fn systematic_forward(&self, l: usize) -> Matrix {
        let f = &self.field;
        Matrix::from_fn(self.k, self.k, |i, c| self.u[(c, i)] + f.mul(self.p[(l, i)], self.v_dual[(c, l)]))
    }

    /// Matrix mapping `wb_l` to the combinations used in a parity repair;
    /// the inverse of [`Self::parity_decoder`].
    pub fn parity_forward(&self, l: usize) -> Matrix {
        let f = &self.field;
        let k2 = f.mul(self.kappa, self.kappa);
        let s = f.inv(Elem::ONE + k2).expect("kappa^2 != 1");
        Matrix::from_fn(self.k, self.k, |i, c| {
            f.mul(s, self.v_dual[(c, i)] + f.mul(k2, f.mul(self.p_dual[(i, l)], self.u[(c, l)])))
        })
    }

    pub fn problem(&self, failed: Vec<usize>) -> Result<RepairProblem> {
        RepairProblem::with_default_helpers(2 * self.k, self.k, 2 * self.k - 1, failed)
    }

    pub fn assemble_multi(&self, problem: &RepairProblem) -> Result<CouplingSystem> {
        framework::coupling_matrix(self, problem)
    }

    pub fn repair_multi(&self, problem: &RepairProblem, contents: &[Vec<Elem>]) -> Result<RepairOutcome> {
        framework::repair_multi(self, problem, &|h| contents[h].clone())
    }

    pub fn repair_single(&self, node: usize, contents: &[Vec<Elem>]) -> Result<RepairOutcome> {
        let helpers: Vec<usize> = (0..2 * self.k).filter(|&x| x != node).collect();
        framework::repair_single(self, node, &helpers, &|h| contents[h].clone())
    }

    /// Determinant of the coupling matrix for a pattern.
    pub fn coupling_det(&self, pattern: &[usize]) -> Result<Elem> {
        let p = self.problem(pattern.to_vec())?;
        Ok(self.assemble_multi(&p)?.det(&self.field))
    }

    fn x(&self, l: usize, m: usize) -> Elem {
        // P[l][m] (P^-1)[m][l]
        self.field.mul(self.p[(l, m)], self.p_inv[(m, l)])
    }

    /// Closed-form repairability condition for the shapes with one parity
    /// or one systematic failure (up to three on the other side), two of
    /// each, or failures on one side only.
    pub fn condition_check(&self, pattern: &[usize]) -> Result<bool> {
        let f = &self.field;
        let sh = self.shape(pattern);
        let (s, p) = (&sh.systematic, &sh.parity);
        let value = match (s.len(), p.len()) {
            (_, 0) | (0, _) => return Ok(true),
            (1, 1) | (2, 1) | (3, 1) => {
                let m = p[0];
                s.iter().fold(Elem::ONE, |acc, &l| acc - self.x(l, m))
            }
            (1, 2) | (1, 3) => {
                let l = s[0];
                p.iter().fold(Elem::ONE, |acc, &m| acc - self.x(l, m))
            }
            (2, 2) => {
                let (l1, l2, m1, m2) = (s[0], s[1], p[0], p[1]);
                let pp = |l: usize, m: usize| self.p[(l, m)];
                let qi = |m: usize, l: usize| self.p_inv[(m, l)];
                let mut v = Elem::ONE - self.x(l1, m1) - self.x(l1, m2) - self.x(l2, m1) - self.x(l2, m2);
                v += f.mul(self.x(l1, m1), self.x(l2, m2));
                v += f.mul(self.x(l1, m2), self.x(l2, m1));
                v -= f.mul(f.mul(pp(l1, m1), qi(m1, l2)), f.mul(pp(l2, m2), qi(m2, l1)));
                v -= f.mul(f.mul(pp(l1, m2), qi(m2, l2)), f.mul(pp(l2, m1), qi(m1, l1)));
                v
            }
            (a, b) => {
                return Err(Error::UnsupportedPattern(format!(
                    "{a} systematic and {b} parity failures have no closed-form condition"
                )))
            }
        };
        Ok(!value.is_zero())
    }

    /// Evaluates the conjectured determinant formula
    /// `kappa^(2sp) (1-kappa^2)^(C(s,2)+C(p,2)) * B^e` with
    /// `B = 1 + sum_{L,J} (-1)^|L| det P[L,J] det P^-1[J,L]`.
    pub fn conjecture_eval(&self, pattern: &[usize]) -> Result<ConjectureReport> {
        let f = &self.field;
        let sh = self.shape(pattern);
        let (s, p) = (sh.systematic.len(), sh.parity.len());
        let e = pattern.len();
        let mut bracket = Elem::ONE;
        for size in 1..=s.min(p) {
            for ls in combinations(s, size) {
                let rows: Vec<usize> = ls.iter().map(|&i| sh.systematic[i]).collect();
                for js in combinations(p, size) {
                    let cols: Vec<usize> = js.iter().map(|&i| sh.parity[i]).collect();
                    let a = self.p.submatrix(&rows, &cols).det(f)?;
                    let b = self.p_inv.submatrix(&cols, &rows).det(f)?;
                    // (-1)^|L| vanishes in characteristic 2.
                    bracket += f.mul(a, b);
                }
            }
        }
        let k2 = f.mul(self.kappa, self.kappa);
        let c2 = |x: usize| (x * x.saturating_sub(1) / 2) as u64;
        let rhs = f.mul(
            f.mul(f.pow(k2, (s * p) as u64), f.pow(Elem::ONE + k2, c2(s) + c2(p))),
            f.pow(bracket, e as u64),
        );
        let lhs = self.coupling_det(pattern)?;
        Ok(ConjectureReport { lhs, rhs, equal: lhs == rhs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjectureReport {
    pub lhs: Elem,
    pub rhs: Elem,
    pub equal: bool,
}

impl ScalarMsrCode for IaCode {
    fn field(&self) -> &Field {
        &self.field
    }
    fn n(&self) -> usize {
        2 * self.k
    }
    fn k(&self) -> usize {
        self.k
    }
    fn d(&self) -> usize {
        2 * self.k - 1
    }
    fn alpha(&self) -> usize {
        self.k
    }
    fn message_len(&self) -> usize {
        self.k * self.k
    }

    fn node_generator(&self, node: usize) -> Matrix {
        let k = self.k;
        let mut g = Matrix::zeros(k, k * k);
        if node < k {
            for c in 0..k {
                g[(c, node * k + c)] = Elem::ONE;
            }
        } else {
            let i = node - k;
            for j in 0..k {
                // wb_i[c] = sum_r w_j[r] G_j^(i)[r][c]
                let blk = self.parity_block(i, j);
                for c in 0..k {
                    for r in 0..k {
                        g[(c, j * k + r)] = blk[(r, c)];
                    }
                }
            }
        }
        g
    }

    fn repair_vector(&self, _from: usize, to: usize) -> Vec<Elem> {
        if to < self.k {
            self.v_dual.col(to)
        } else {
            self.u.col(to - self.k)
        }
    }

    fn decode_single(&self, node: usize, helpers: &[usize], transfers: &[Elem]) -> Result<Vec<Elem>> {
        let k = self.k;
        let f = &self.field;
        if helpers.len() != 2 * k - 1 || transfers.len() != helpers.len() {
            return Err(Error::InvalidHelperCount(format!("need all {} other nodes", 2 * k - 1)));
        }
        let mut t = vec![Elem::ZERO; 2 * k];
        let mut seen = vec![false; 2 * k];
        for (&h, &x) in helpers.iter().zip(transfers) {
            if h >= 2 * k || h == node || seen[h] {
                return Err(Error::InvalidHelperCount(format!("bad helper {h} for node {node}")));
            }
            seen[h] = true;
            t[h] = x;
        }
        if node < k {
            let l = node;
            // y_i = sb[i] - sum_{j != l} P[j][i] r[j]
            let y: Vec<Elem> = (0..k)
                .map(|i| {
                    let interference: Elem = (0..k).filter(|&j| j != l).map(|j| f.mul(self.p[(j, i)], t[j])).sum();
                    t[k + i] - interference
                })
                .collect();
            self.systematic_decoder(l).mul_vec(f, &y)
        } else {
            let l = node - k;
            let k2 = f.mul(self.kappa, self.kappa);
            let c = f.div(k2, Elem::ONE + k2)?;
            // z_i = s[i] + kappa^2/(1-kappa^2) sum_{j != l} P'[i][j] rb[j]
            let z: Vec<Elem> = (0..k)
                .map(|i| {
                    let acc: Elem = (0..k).filter(|&j| j != l).map(|j| f.mul(self.p_dual[(i, j)], t[k + j])).sum();
                    t[i] + f.mul(c, acc)
                })
                .collect();
            self.parity_decoder(l).mul_vec(f, &z)
        }
    }

    fn coupling_row(&self, source: usize, target: usize, helpers_of_source: &[usize]) -> Result<Vec<Elem>> {
        let f = &self.field;
        let k = self.k;
        let kap = self.kappa;
        let k2 = f.mul(kap, kap);
        let one = Elem::ONE;
        let pm = |a: usize, b: usize| self.p[(a, b)];
        let pd = |a: usize, b: usize| self.p_dual[(a, b)];
        let coef = |h: usize| -> Result<Elem> {
            Ok(match (source < k, target < k) {
                // s[l -> m]
                (true, false) => {
                    let (l, m) = (source, target - k);
                    let c = f.div(kap, one + kap)?;
                    if h >= k {
                        let j = h - k;
                        let base = f.mul(c, f.mul(pm(l, m), pd(l, j)));
                        if j == m { one - base } else { Elem::ZERO - base }
                    } else {
                        Elem::ZERO - pm(h, m)
                    }
                }
                // r[l1 -> l2]
                (true, true) => {
                    let l2 = target;
                    if h >= k {
                        f.mul(kap, pd(l2, h - k))
                    } else if h == l2 {
                        Elem::ZERO - kap
                    } else {
                        Elem::ZERO
                    }
                }
                // sb[m -> l]
                (false, true) => {
                    let (m, l) = (source - k, target);
                    let kk = f.mul(kap, one + kap);
                    if h < k {
                        let t = f.mul(kk, f.mul(pd(l, m), pm(h, m)));
                        if h == l { one - k2 + t } else { t }
                    } else {
                        f.mul(k2, pd(l, h - k))
                    }
                }
                // rb[m1 -> m2]
                (false, false) => {
                    let m2 = target - k;
                    if h < k {
                        f.mul(f.div(one - k2, kap)?, pm(h, m2))
                    } else if h == target {
                        kap
                    } else {
                        Elem::ZERO
                    }
                }
            })
        };
        helpers_of_source.iter().map(|&h| coef(h)).collect()
    }

    fn transfer(&self, from: usize, content: &[Elem], to: usize) -> Elem {
        dot(&self.field, content, &self.repair_vector(from, to))
    }
}
