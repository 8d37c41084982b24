//! Striped MDS code for `e >= k` failures.
//!
//! Each node stores `delta` consecutive symbols of a systematic
//! `(n delta, k delta)` Reed-Solomon codeword. A central repairer downloads
//! `k delta / d` symbols from each of `d` helpers, decodes the file and
//! re-encodes the lost shards, for a total of exactly `M = k delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{RepairOutcome, RepairTranscript};
use crate::gf::{Elem, Field};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdsMode {
    /// `delta = d`; only helper counts dividing `k d` are served.
    Fixed,
    /// `delta = lcm(d_min..=d_max)`; every `d` in the range is served.
    Adaptive,
}

#[derive(Clone, Debug)]
pub struct MdsStripeCode {
    field: Field,
    n: usize,
    k: usize,
    mode: MdsMode,
    d_min: usize,
    d_max: usize,
    delta: usize,
    generator: Matrix,
}

fn lcm_range(lo: usize, hi: usize) -> usize {
    (lo..=hi).fold(1, num_integer::lcm)
}

impl MdsStripeCode {
    pub fn fixed(field: Field, n: usize, k: usize, d: usize) -> Result<Self> {
        Self::build(field, n, k, MdsMode::Fixed, d, d)
    }

    /// Serves every `d` in `k..=n-e`.
    pub fn adaptive(field: Field, n: usize, k: usize, e: usize) -> Result<Self> {
        if e >= n {
            return Err(Error::InvalidParams(format!("e = {e} must be below n = {n}")));
        }
        Self::build(field, n, k, MdsMode::Adaptive, k, n - e)
    }

    pub fn build(field: Field, n: usize, k: usize, mode: MdsMode, d_min: usize, d_max: usize) -> Result<Self> {
        if k == 0 || k > n || d_min < k || d_min > d_max || d_max > n {
            return Err(Error::InvalidParams(format!("need 1 <= k <= d_min <= d_max <= n, got n={n} k={k} d={d_min}..={d_max}")));
        }
        if mode == MdsMode::Fixed && d_min != d_max {
            return Err(Error::InvalidParams("fixed mode takes a single d".into()));
        }
        let delta = match mode {
            MdsMode::Fixed => d_min,
            MdsMode::Adaptive => lcm_range(d_min, d_max),
        };
        let len = n * delta;
        if len > field.size() {
            return Err(Error::FieldTooSmall(format!("codeword length {len} exceeds field size {}", field.size())));
        }
        let points: Vec<Elem> = (0..len as u32).map(|v| field.elem(v)).collect::<Result<_>>()?;
        let v = Matrix::vandermonde(&field, &points, k * delta)?;
        let top: Vec<usize> = (0..k * delta).collect();
        let generator = v.mul(&field, &v.select_rows(&top).inv(&field)?)?;
        Ok(MdsStripeCode { field, n, k, mode, d_min, d_max, delta, generator })
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
    pub fn mode(&self) -> MdsMode {
        self.mode
    }
    pub fn d_range(&self) -> (usize, usize) {
        (self.d_min, self.d_max)
    }
    pub fn delta(&self) -> usize {
        self.delta
    }
    pub fn file_len(&self) -> usize {
        self.k * self.delta
    }
    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn encode(&self, file: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        if file.len() != self.file_len() {
            return Err(Error::DimensionMismatch(format!("{} file symbols, expected {}", file.len(), self.file_len())));
        }
        let cw = self.generator.mul_vec(&self.field, file)?;
        Ok(cw.chunks(self.delta).map(<[Elem]>::to_vec).collect())
    }

    fn decode_positions(&self, positions: &[usize], values: &[Elem]) -> Result<Vec<Elem>> {
        self.generator.select_rows(positions).solve_vec(&self.field, values)
    }

    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        check_distinct(nodes, self.n)?;
        if nodes.len() != self.k || contents.len() != self.k {
            return Err(Error::DimensionMismatch(format!("need exactly k = {} nodes", self.k)));
        }
        let mut pos = Vec::with_capacity(self.file_len());
        let mut vals = Vec::with_capacity(self.file_len());
        for (&node, c) in nodes.iter().zip(contents) {
            if c.len() != self.delta {
                return Err(Error::DimensionMismatch(format!("shard of node {node} has {} symbols", c.len())));
            }
            pos.extend(node * self.delta..(node + 1) * self.delta);
            vals.extend_from_slice(c);
        }
        self.decode_positions(&pos, &vals)
    }

    /// Symbols each of `d` helpers sends.
    pub fn beta(&self, d: usize) -> Result<usize> {
        if d < self.d_min || d > self.d_max || !(self.k * self.delta).is_multiple_of(d) {
            return Err(Error::InvalidHelperCount(format!(
                "d = {d} is not served (range {}..={}, k delta = {})",
                self.d_min,
                self.d_max,
                self.k * self.delta
            )));
        }
        Ok(self.k * self.delta / d)
    }

    /// Repairs `failed` (at least `k` nodes) from `helpers`, each sending the
    /// first `k delta / d` symbols of its shard.
    pub fn repair(&self, failed: &[usize], helpers: &[usize], content_of: &dyn Fn(usize) -> Vec<Elem>) -> Result<RepairOutcome> {
        check_distinct(failed, self.n)?;
        check_distinct(helpers, self.n)?;
        if failed.len() < self.k {
            return Err(Error::InvalidParams(format!("{} failures is fewer than k = {}", failed.len(), self.k)));
        }
        if helpers.iter().any(|h| failed.contains(h)) {
            return Err(Error::InvalidHelperCount("a helper is also failed".into()));
        }
        let d = helpers.len();
        if failed.len() + d > self.n {
            return Err(Error::InvalidHelperCount(format!("e + d = {} exceeds n", failed.len() + d)));
        }
        let beta = self.beta(d)?;
        let mut transcript = RepairTranscript::default();
        let mut pos = Vec::with_capacity(self.file_len());
        let mut vals = Vec::with_capacity(self.file_len());
        for &h in helpers {
            let c = content_of(h);
            pos.extend(h * self.delta..h * self.delta + beta);
            vals.extend_from_slice(&c[..beta]);
            transcript.record(h, beta);
        }
        let file = self.decode_positions(&pos, &vals)?;
        let nodes = self.encode(&file)?;
        transcript.success = true;
        Ok(RepairOutcome { contents: failed.iter().map(|&f| nodes[f].clone()).collect(), transcript })
    }
}

fn check_distinct(nodes: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &x in nodes {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidParams(format!("node list {nodes:?} has an invalid or repeated entry")));
        }
    }
    Ok(())
}
