//! Adaptive product-matrix MBR code.
//!
//! The message fills `z` symmetric `d_min x d_min` blocks
//! `M_i = [[N_i, L_i], [L_i^t, 0]]`. Node `l` stores `psi_{lz+i}^t M_i` for
//! every block, so `alpha = z d_min = prod(d_min..=d_max)`. With `d` helpers
//! each one sends `alpha / d` symbols, and `e` failures are repaired one
//! after another, reusing the nodes already rebuilt at the central node.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::framework::{RepairOutcome, RepairTranscript};
use crate::gf::{Elem, Field};
use crate::matrix::{combinations, dot, Matrix};
use crate::tradeoff::{rat, Rational};

#[derive(Clone, Debug)]
pub struct AdaptiveMbrCode {
    field: Field,
    n: usize,
    k: usize,
    d_min: usize,
    d_max: usize,
    alpha: usize,
    z: usize,
    psi: Matrix,
    omega: Matrix,
    block_gen: Vec<Matrix>,
}

/// Number of helper sets checked at construction before the check is
/// skipped.
pub const THETA_CHECK_LIMIT: usize = 20_000;

impl AdaptiveMbrCode {
    /// `Psi` rows are `(x, x^2, .., x^d_min)` at `x = 1, 2, .., zn` read as
    /// field elements; `Omega^t` uses the points `g^0 .. g^(z-1)`.
    pub fn new(field: Field, n: usize, k: usize, d_min: usize, d_max: usize) -> Result<Self> {
        let (_, z) = Self::sizes(n, k, d_min, d_max)?;
        if z * n > field.size() - 1 {
            return Err(Error::FieldTooSmall(format!("{} distinct nonzero points needed, field has {}", z * n, field.size() - 1)));
        }
        let pts: Vec<Elem> = (1..=z * n).map(|v| Elem(v as u16)).collect();
        let opts: Vec<Elem> = (0..z).map(|j| field.gen_pow(j as u64)).collect();
        Self::with_points(field, n, k, d_min, d_max, &pts, &opts)
    }

    fn sizes(n: usize, k: usize, d_min: usize, d_max: usize) -> Result<(usize, usize)> {
        if k == 0 || k > d_min || d_min > d_max || d_max >= n {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k <= d_min <= d_max <= n-1, got n={n} k={k} d={d_min}..={d_max}"
            )));
        }
        let alpha = (d_min..=d_max)
            .try_fold(1usize, |a, d| a.checked_mul(d))
            .ok_or_else(|| Error::InvalidParams("alpha overflows".into()))?;
        Ok((alpha, alpha / d_min))
    }

    /// `psi_points` has `zn` distinct nonzero entries, `omega_points` has `z`
    /// distinct entries.
    pub fn with_points(
        field: Field,
        n: usize,
        k: usize,
        d_min: usize,
        d_max: usize,
        psi_points: &[Elem],
        omega_points: &[Elem],
    ) -> Result<Self> {
        let (alpha, z) = Self::sizes(n, k, d_min, d_max)?;
        if psi_points.len() != z * n || omega_points.len() != z {
            return Err(Error::DimensionMismatch(format!("need {} psi points and {z} omega points", z * n)));
        }
        let mut sorted: Vec<u16> = psi_points.iter().map(|x| x.0).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0]));
        }
        if psi_points.iter().any(|x| x.is_zero() || !field.contains(*x)) {
            return Err(Error::InvalidParams("psi points must be nonzero field elements".into()));
        }
        let psi = Matrix::from_fn(z * n, d_min, |r, c| field.pow(psi_points[r], c as u64 + 1));
        let omega = Matrix::vandermonde(&field, omega_points, z)?.transpose();
        let mut code = AdaptiveMbrCode { field, n, k, d_min, d_max, alpha, z, psi, omega, block_gen: Vec::new() };
        code.block_gen = (0..n * z).map(|j| code.block_generator_row(j)).collect();
        code.check_theta()?;
        Ok(code)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d_range(&self) -> (usize, usize) {
        (self.d_min, self.d_max)
    }
    pub fn alpha(&self) -> usize {
        self.alpha
    }
    pub fn z(&self) -> usize {
        self.z
    }
    pub fn psi(&self) -> &Matrix {
        &self.psi
    }
    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    /// Free symbols per block: `k d_min - C(k, 2)`.
    pub fn block_len(&self) -> usize {
        self.k * self.d_min - self.k * (self.k - 1) / 2
    }

    pub fn message_len(&self) -> usize {
        self.z * self.block_len()
    }

    /// Position of `M_i[r][c]` inside a block's message, if not forced zero.
    /// `N` is stored as its upper triangle row by row, then `L` row by row.
    fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let k = self.k;
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        if c < k {
            Some(r * k - r * r.saturating_sub(1) / 2 + (c - r))
        } else if r < k {
            Some(k * (k + 1) / 2 + r * (self.d_min - k) + (c - k))
        } else {
            None
        }
    }

    /// `d_min x block_len` map from a block's message to `psi_j^t M_i`.
    fn block_generator_row(&self, j: usize) -> Matrix {
        let mut g = Matrix::zeros(self.d_min, self.block_len());
        for c in 0..self.d_min {
            for r in 0..self.d_min {
                if let Some(s) = self.slot(r, c) {
                    g[(c, s)] += self.psi[(j, r)];
                }
            }
        }
        g
    }

    pub fn block_matrix(&self, block: &[Elem]) -> Matrix {
        Matrix::from_fn(self.d_min, self.d_min, |r, c| self.slot(r, c).map_or(Elem::ZERO, |s| block[s]))
    }

    /// Full `alpha x message_len` generator of a node.
    pub fn node_generator(&self, node: usize) -> Matrix {
        let (b, dm) = (self.block_len(), self.d_min);
        let mut g = Matrix::zeros(self.alpha, self.message_len());
        for i in 0..self.z {
            let bg = &self.block_gen[node * self.z + i];
            for r in 0..dm {
                for c in 0..b {
                    g[(i * dm + r, i * b + c)] = bg[(r, c)];
                }
            }
        }
        g
    }

    pub fn encode(&self, message: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        if message.len() != self.message_len() {
            return Err(Error::DimensionMismatch(format!("{} message symbols, expected {}", message.len(), self.message_len())));
        }
        let b = self.block_len();
        (0..self.n)
            .map(|l| {
                let mut w = Vec::with_capacity(self.alpha);
                for (i, blk) in message.chunks(b).enumerate() {
                    w.extend(self.block_gen[l * self.z + i].mul_vec(&self.field, blk)?);
                }
                Ok(w)
            })
            .collect()
    }

    /// Solves every block independently from `k` nodes.
    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        self.check_nodes(nodes)?;
        if nodes.len() != self.k || contents.len() != self.k {
            return Err(Error::DimensionMismatch(format!("need exactly k = {} nodes", self.k)));
        }
        if contents.iter().any(|c| c.len() != self.alpha) {
            return Err(Error::DimensionMismatch(format!("shards must have {} symbols", self.alpha)));
        }
        let dm = self.d_min;
        let mut out = Vec::with_capacity(self.message_len());
        for i in 0..self.z {
            let mut a = self.block_gen[nodes[0] * self.z + i].clone();
            for &l in &nodes[1..] {
                a = a.vstack(&self.block_gen[l * self.z + i])?;
            }
            let rhs: Vec<Elem> = contents.iter().flat_map(|c| c[i * dm..(i + 1) * dm].iter().copied()).collect();
            let sol = a.solve_consistent(&self.field, &Matrix::column(rhs)).map_err(|e| match e {
                Error::Malformed(_) => Error::Malformed("contents are not a codeword".into()),
                other => other,
            })?;
            out.extend(sol.into_data());
        }
        Ok(out)
    }

    /// Symbols a helper sends to rebuild `target` when `d` helpers serve it.
    pub fn helper_transfer(&self, helper_content: &[Elem], target: usize, d: usize) -> Vec<Elem> {
        let dm = self.d_min;
        // w_h^t Phi_target: one symbol per block
        let x: Vec<Elem> = (0..self.z)
            .map(|i| dot(&self.field, &helper_content[i * dm..(i + 1) * dm], self.psi.row(target * self.z + i)))
            .collect();
        (0..self.alpha / d).map(|r| dot(&self.field, self.omega.row(r), &x)).collect()
    }

    /// `Theta_H`, columns ordered by helper then transfer index.
    pub fn theta(&self, helpers: &[usize]) -> Matrix {
        let (dm, per) = (self.d_min, self.alpha / helpers.len());
        let mut t = Matrix::zeros(self.alpha, self.alpha);
        for (j, &h) in helpers.iter().enumerate() {
            for r in 0..per {
                for i in 0..self.z {
                    let w = self.omega[(r, i)];
                    for c in 0..dm {
                        t[(i * dm + c, j * per + r)] = self.field.mul(self.psi[(h * self.z + i, c)], w);
                    }
                }
            }
        }
        t
    }

    fn check_theta(&self) -> Result<()> {
        let sets: Vec<Vec<usize>> = (self.d_min..=self.d_max).flat_map(|d| combinations(self.n, d)).collect();
        if sets.len() > THETA_CHECK_LIMIT {
            return Ok(());
        }
        let bad = sets.par_iter().find_first(|h| self.theta(h).rank(&self.field) < self.alpha);
        match bad {
            Some(h) => Err(Error::InvalidParams(format!("Theta is singular for helpers {h:?}"))),
            None => Ok(()),
        }
    }

    fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n];
        for &x in nodes {
            if x >= self.n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidParams(format!("node list {nodes:?} has an invalid or repeated entry")));
            }
        }
        Ok(())
    }

    fn decode(&self, helpers: &[usize], transfers: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        let r: Vec<Elem> = transfers.concat();
        self.theta(helpers).transpose().solve_vec(&self.field, &r)
    }

    pub fn repair_single(&self, failed: usize, helpers: &[usize], content_of: &dyn Fn(usize) -> Vec<Elem>) -> Result<RepairOutcome> {
        self.check_helpers(&[failed], helpers)?;
        let d = helpers.len();
        let mut transcript = RepairTranscript::default();
        let transfers: Vec<Vec<Elem>> = helpers
            .iter()
            .map(|&h| {
                let t = self.helper_transfer(&content_of(h), failed, d);
                transcript.record(h, t.len());
                t
            })
            .collect();
        let content = self.decode(helpers, &transfers)?;
        transcript.success = true;
        Ok(RepairOutcome { contents: vec![content], transcript })
    }

    fn check_helpers(&self, failed: &[usize], helpers: &[usize]) -> Result<()> {
        self.check_nodes(failed)?;
        self.check_nodes(helpers)?;
        let d = helpers.len();
        if d < self.d_min || d > self.d_max {
            return Err(Error::InvalidHelperCount(format!("d = {d} outside {}..={}", self.d_min, self.d_max)));
        }
        if failed.is_empty() || failed.len() > self.k || failed.len() + d > self.n {
            return Err(Error::InvalidHelperCount(format!("e = {} with d = {d} is not served", failed.len())));
        }
        if helpers.iter().any(|h| failed.contains(h)) {
            return Err(Error::InvalidHelperCount("a helper is also failed".into()));
        }
        Ok(())
    }

    /// The first failure uses all `d` helpers. Failure `i + 1` uses the `i`
    /// nodes already rebuilt, at no download cost, plus the lowest-indexed
    /// `d_min - i` helpers.
    pub fn repair_multi(&self, failed: &[usize], helpers: &[usize], content_of: &dyn Fn(usize) -> Vec<Elem>) -> Result<RepairOutcome> {
        self.check_helpers(failed, helpers)?;
        let first = self.repair_single(failed[0], helpers, content_of)?;
        let mut transcript = first.transcript;
        let mut rebuilt: BTreeMap<usize, Vec<Elem>> = BTreeMap::new();
        rebuilt.insert(failed[0], first.contents.into_iter().next().expect("one node"));
        let mut sorted_helpers = helpers.to_vec();
        sorted_helpers.sort_unstable();
        for (i, &f) in failed.iter().enumerate().skip(1) {
            let mut sources: Vec<usize> = failed[..i].to_vec();
            sources.extend_from_slice(&sorted_helpers[..self.d_min - i]);
            let transfers: Vec<Vec<Elem>> = sources
                .iter()
                .map(|&s| match rebuilt.get(&s) {
                    Some(c) => self.helper_transfer(c, f, self.d_min),
                    None => {
                        let t = self.helper_transfer(&content_of(s), f, self.d_min);
                        transcript.record(s, t.len());
                        t
                    }
                })
                .collect();
            let c = self.decode(&sources, &transfers)?;
            rebuilt.insert(f, c);
        }
        transcript.success = true;
        Ok(RepairOutcome { contents: failed.iter().map(|f| rebuilt[f].clone()).collect(), transcript })
    }

    /// `e alpha - C(e, 2) alpha / d_min`.
    pub fn bandwidth_bound(&self, e: usize) -> Rational {
        let e_r = rat(e as i64, 1);
        e_r.clone() * rat(self.alpha as i64, 1) - rat((e * e.saturating_sub(1) / 2) as i64, 1) * rat(self.alpha as i64, self.d_min as i64)
    }

    /// Rank of the generators of `nodes` stacked together.
    pub fn stacked_rank(&self, nodes: &[usize]) -> Result<usize> {
        let mut g = self.node_generator(nodes[0]);
        for &l in &nodes[1..] {
            g = g.vstack(&self.node_generator(l))?;
        }
        Ok(g.rank(&self.field))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code() -> AdaptiveMbrCode {
        AdaptiveMbrCode::new(Field::with_default_modulus(6).unwrap(), 7, 3, 4, 5).unwrap()
    }

    fn message(c: &AdaptiveMbrCode, seed: u16) -> Vec<Elem> {
        let mask = (c.field().size() - 1) as u16;
        (0..c.message_len() as u16).map(|i| Elem((i.wrapping_mul(41) ^ seed.wrapping_mul(7) ^ 9) & mask)).collect()
    }

    #[test]
    fn sizes() {
        let c = code();
        assert_eq!((c.alpha(), c.z(), c.message_len()), (20, 5, 45));
        assert_eq!(c.bandwidth_bound(1), rat(20, 1));
        assert_eq!(c.bandwidth_bound(2), rat(35, 1));
        assert_eq!(c.bandwidth_bound(3), rat(45, 1));
    }

    #[test]
    fn block_layout() {
        let c = code();
        let msg: Vec<Elem> = (1..=9).map(Elem).collect();
        let m = c.block_matrix(&msg);
        assert_eq!(m.transpose(), m);
        assert_eq!(m.to_u32_rows(), vec![vec![1, 2, 3, 7], vec![2, 4, 5, 8], vec![3, 5, 6, 9], vec![7, 8, 9, 0]]);
    }

    #[test]
    fn encode_matches_displayed_formula() {
        let c = code();
        let f = c.field();
        let msg = message(&c, 1);
        let nodes = c.encode(&msg).unwrap();
        for l in 0..7 {
            for i in 0..5 {
                let m = c.block_matrix(&msg[i * 9..(i + 1) * 9]);
                let expect = m.left_mul_vec(f, c.psi().row(l * 5 + i)).unwrap();
                assert_eq!(&nodes[l][i * 4..(i + 1) * 4], expect.as_slice());
            }
        }
        assert!(c.encode(&[Elem::ZERO; 45]).unwrap().iter().flatten().all(|x| x.is_zero()));
    }

    #[test]
    fn degenerate_range_is_plain_mbr() {
        let c = AdaptiveMbrCode::new(Field::with_default_modulus(4).unwrap(), 5, 3, 3, 3).unwrap();
        assert_eq!((c.alpha(), c.z(), c.message_len()), (3, 1, 6));
        let msg = message(&c, 2);
        let nodes = c.encode(&msg).unwrap();
        let r = c.repair_single(0, &[1, 2, 3], &|h| nodes[h].clone()).unwrap();
        assert_eq!(r.contents[0], nodes[0]);
        assert_eq!(r.transcript.total, 3);
    }

    #[test]
    fn reconstruct_from_any_k() {
        let c = code();
        let msg = message(&c, 3);
        let nodes = c.encode(&msg).unwrap();
        for s in combinations(7, 3) {
            let cs: Vec<_> = s.iter().map(|&i| nodes[i].clone()).collect();
            assert_eq!(c.reconstruct(&s, &cs).unwrap(), msg);
        }
    }

    #[test]
    fn single_repair_every_d() {
        let c = code();
        let nodes = c.encode(&message(&c, 4)).unwrap();
        for f in 0..7 {
            for d in 4..=5 {
                let helpers: Vec<usize> = (0..7).filter(|&x| x != f).take(d).collect();
                let r = c.repair_single(f, &helpers, &|h| nodes[h].clone()).unwrap();
                assert_eq!(r.contents[0], nodes[f]);
                assert_eq!(r.transcript.total, 20);
                assert!(r.transcript.per_helper.values().all(|&b| b == 20 / d));
            }
        }
    }

    #[test]
    fn multi_repair_meets_bound() {
        let c = code();
        let nodes = c.encode(&message(&c, 5)).unwrap();
        for e in 1..=3 {
            for failed in combinations(7, e) {
                for d in 4..=5 {
                    if e + d > 7 {
                        continue;
                    }
                    let helpers: Vec<usize> = (0..7).filter(|x| !failed.contains(x)).take(d).collect();
                    let r = c.repair_multi(&failed, &helpers, &|h| nodes[h].clone()).unwrap();
                    for (f, got) in failed.iter().zip(&r.contents) {
                        assert_eq!(got, &nodes[*f]);
                    }
                    assert_eq!(rat(r.transcript.total as i64, 1), c.bandwidth_bound(e));
                    assert_eq!(r.transcript.total, r.transcript.per_helper.values().sum::<usize>());
                }
            }
        }
    }

    #[test]
    fn stacked_rank_matches_entropy() {
        let c = code();
        for e in 1..=3 {
            for s in combinations(7, e) {
                assert_eq!(c.stacked_rank(&s).unwrap(), (e * 4 - e * (e - 1) / 2) * 5);
            }
        }
    }

    #[test]
    fn geometric_points_are_rejected() {
        let f = Field::with_default_modulus(6).unwrap();
        let pts: Vec<Elem> = (0..35).map(|j| f.gen_pow(j)).collect();
        let opts: Vec<Elem> = (0..5).map(|j| f.gen_pow(j)).collect();
        let r = AdaptiveMbrCode::with_points(f, 7, 3, 4, 5, &pts, &opts);
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_bad_requests() {
        let c = code();
        let nodes = c.encode(&message(&c, 6)).unwrap();
        let get = |h: usize| nodes[h].clone();
        assert!(matches!(c.repair_single(0, &[1, 2, 3], &get), Err(Error::InvalidHelperCount(_))));
        assert!(matches!(c.repair_multi(&[0, 1, 2], &[3, 4, 5, 6, 1], &get), Err(Error::InvalidHelperCount(_))));
        assert!(matches!(
            AdaptiveMbrCode::new(Field::with_default_modulus(5).unwrap(), 7, 3, 4, 5),
            Err(Error::FieldTooSmall(_))
        ));
    }
}
