//! The functional storage/bandwidth tradeoff for centralized repair of `e`
//! failures, computed exactly over the rationals.
//!
//! A data collector contacting `k` nodes sees them as a sequence of repair
//! groups `u` (a [`Scenario`]); the information flowing through the cut is
//! [`cut_value`]. The closed forms ([`optimal_scenario`], [`alpha_star`])
//! are cross-checked against exhaustive search ([`min_cut_oracle`],
//! [`alpha_threshold_oracle`]).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn binom2(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

/// Parameters `(M, n, k, d, e)` of a storage system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub file_size: Rational,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub e: usize,
}

impl SystemParams {
    pub fn new(file_size: Rational, n: usize, k: usize, d: usize, e: usize) -> Result<Self> {
        if !file_size.is_positive() {
            return Err(Error::InvalidParams(format!("file size {file_size} must be positive")));
        }
        if k == 0 || e == 0 {
            return Err(Error::InvalidParams("k and e must be at least 1".into()));
        }
        if k > n {
            return Err(Error::InvalidParams(format!("k = {k} exceeds n = {n}")));
        }
        if d < k {
            return Err(Error::InvalidParams(format!("d = {d} is below k = {k}")));
        }
        if d + e > n {
            return Err(Error::InvalidParams(format!("d + e = {} exceeds n = {n}", d + e)));
        }
        Ok(SystemParams { file_size, n, k, d, e })
    }

    /// Parameters with the smallest admissible `n = d + e`.
    pub fn minimal(file_size: Rational, k: usize, d: usize, e: usize) -> Result<Self> {
        SystemParams::new(file_size, d + e, k, d, e)
    }

    pub fn eta(&self) -> usize {
        self.k / self.e
    }

    pub fn r(&self) -> usize {
        self.k % self.e
    }

    /// Same system with a different helper count, growing `n` if needed.
    pub fn with_d(&self, d: usize) -> Result<Self> {
        SystemParams::new(self.file_size.clone(), self.n.max(d + self.e), self.k, d, self.e)
    }

    /// Same system with a different failure count, growing `n` if needed.
    pub fn with_e(&self, e: usize) -> Result<Self> {
        SystemParams::new(self.file_size.clone(), self.n.max(self.d + e), self.k, self.d, e)
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(M={}, n={}, k={}, d={}, e={})", self.file_size, self.n, self.k, self.d, self.e)
    }
}

/// A composition of `k` into repair groups of size at most `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scenario(Vec<usize>);

impl Scenario {
    pub fn new(parts: Vec<usize>, k: usize, e: usize) -> Result<Self> {
        if parts.iter().any(|&p| p == 0 || p > e) {
            return Err(Error::InvalidScenario(format!("{parts:?} has a part outside 1..={e}")));
        }
        if parts.iter().sum::<usize>() != k {
            return Err(Error::InvalidScenario(format!("{parts:?} does not sum to {k}")));
        }
        Ok(Scenario(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
}

impl TradeoffPoint {
    pub fn from_alpha_gamma(alpha: Rational, gamma: Rational, d: usize) -> Self {
        let beta = &gamma / int(d);
        TradeoffPoint { alpha, beta, gamma }
    }
}

/// `sum_i min(u_i * alpha, (d - sum_{j<i} u_j) * beta)`.
pub fn cut_value(u: &Scenario, alpha: &Rational, beta: &Rational, d: usize) -> Result<Rational> {
    if u.0.is_empty() || u.0.contains(&0) {
        return Err(Error::InvalidScenario(format!("{u} has an empty group")));
    }
    if u.total() > d {
        return Err(Error::InvalidScenario(format!("{u} covers more than d = {d} nodes")));
    }
    let mut acc = Rational::zero();
    let mut prefix = 0;
    for &ui in &u.0 {
        let storage = alpha * int(ui);
        let download = beta * int(d - prefix);
        acc += storage.min(download);
        prefix += ui;
    }
    Ok(acc)
}

/// All compositions of `k` into parts in `1..=e`, lexicographically ordered.
pub fn enumerate_scenarios(k: usize, e: usize) -> Vec<Scenario> {
    fn rec(rem: usize, e: usize, cur: &mut Vec<usize>, out: &mut Vec<Scenario>) {
        if rem == 0 {
            out.push(Scenario(cur.clone()));
            return;
        }
        for p in 1..=e.min(rem) {
            cur.push(p);
            rec(rem - p, e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 && e > 0 {
        rec(k, e, &mut Vec::new(), &mut out);
    }
    out
}

fn scaled_i128(alpha: &Rational, beta: &Rational) -> Option<(i128, i128, BigInt)> {
    let den = alpha.denom().lcm(beta.denom());
    let a = (alpha * Rational::from_integer(den.clone())).to_integer().to_i128()?;
    let b = (beta * Rational::from_integer(den.clone())).to_integer().to_i128()?;
    Some((a, b, den))
}

/// Exhaustive minimum of [`cut_value`] over `scenarios`; ties keep the
/// earliest scenario.
pub fn min_cut_over(
    scenarios: &[Scenario],
    d: usize,
    alpha: &Rational,
    beta: &Rational,
) -> Result<(Rational, Scenario)> {
    let first = scenarios
        .first()
        .ok_or_else(|| Error::InvalidScenario("no scenarios to minimize over".into()))?;
    if first.total() > d {
        return Err(Error::InvalidScenario(format!("{first} covers more than d = {d} nodes")));
    }
    if let Some((a, b, den)) = scaled_i128(alpha, beta) {
        // Integer fast path on a common denominator; still exact.
        let value = |u: &Scenario| {
            let mut prefix = 0i128;
            let mut acc = 0i128;
            for &ui in &u.0 {
                acc += (ui as i128 * a).min((d as i128 - prefix) * b);
                prefix += ui as i128;
            }
            acc
        };
        let mut best = (value(first), 0);
        for (i, u) in scenarios.iter().enumerate().skip(1) {
            let v = value(u);
            if v < best.0 {
                best = (v, i);
            }
        }
        let v = Rational::new(BigInt::from(best.0), den);
        return Ok((v, scenarios[best.1].clone()));
    }
    let mut best = (cut_value(first, alpha, beta, d)?, first);
    for u in &scenarios[1..] {
        let v = cut_value(u, alpha, beta, d)?;
        if v < best.0 {
            best = (v, u);
        }
    }
    Ok((best.0, best.1.clone()))
}

pub fn min_cut_oracle(
    params: &SystemParams,
    alpha: &Rational,
    beta: &Rational,
) -> Result<(Rational, Scenario)> {
    min_cut_over(&enumerate_scenarios(params.k, params.e), params.d, alpha, beta)
}

/// Closed-form minimizing scenario.
pub fn optimal_scenario(params: &SystemParams, alpha: &Rational, beta: &Rational) -> Scenario {
    let (k, e, d) = (params.k, params.e, params.d);
    if k <= e {
        return Scenario(vec![k]);
    }
    let (eta, r) = (params.eta(), params.r());
    if r == 0 {
        return Scenario(vec![e; eta]);
    }
    // alpha <= (d + eta*r - eta*e) * beta / r, with ties to [r, e, ..., e]
    let lhs = alpha * int(r);
    let rhs = beta * Rational::from_integer(BigInt::from((d + eta * r) as i64 - (eta * e) as i64));
    let mut parts = vec![e; eta];
    if lhs <= rhs {
        parts.insert(0, r);
    } else {
        parts.push(r);
    }
    Scenario(parts)
}

fn f_break(params: &SystemParams, i: usize) -> Rational {
    let (k, d, e, r) = (params.k as i64, params.d as i64, params.e as i64, params.r() as i64);
    let i = i as i64;
    let den = -k * k - r * r + e * (k - r) + 2 * k * d - e * e * (i * i + i) - 2 * i * e * r;
    &params.file_size * rat(2 * e * d, den)
}

fn g_coef(params: &SystemParams, i: usize) -> Rational {
    let (d, e, r, eta) = (params.d as i64, params.e as i64, params.r() as i64, params.eta() as i64);
    let i = i as i64;
    rat((eta - i) * (-2 * r + e + 2 * d - eta * e - e * i), 2 * d)
}

fn segment_alpha(params: &SystemParams, i: usize, gamma: &Rational) -> Rational {
    let den = int(params.r() + i * params.e);
    (&params.file_size - gamma * g_coef(params, i)) / den
}

/// Smallest feasible total bandwidth.
pub fn gamma_mbmr(params: &SystemParams) -> Rational {
    mbmr_point(params).gamma
}

/// The threshold storage `alpha*(gamma)`.
pub fn alpha_star(params: &SystemParams, gamma: &Rational) -> Result<Rational> {
    let min = gamma_mbmr(params);
    if *gamma < min {
        return Err(Error::InfeasibleBandwidth { gamma: gamma.to_string(), minimum: min.to_string() });
    }
    let msr = &params.file_size / int(params.k);
    if params.k <= params.e {
        return Ok(msr);
    }
    let (eta, r) = (params.eta(), params.r());
    if *gamma >= f_break(params, eta - 1) {
        return Ok(msr);
    }
    let lowest = if r == 0 { 1 } else { 0 };
    for i in (lowest..eta).rev() {
        let lower = if i == 0 { min.clone() } else { f_break(params, i - 1) };
        if *gamma >= lower {
            return Ok(segment_alpha(params, i, gamma));
        }
    }
    unreachable!("gamma >= gamma_MBMR lands in some segment")
}

/// Smallest total bandwidth admitting storage `alpha`.
pub fn gamma_star(params: &SystemParams, alpha: &Rational) -> Result<Rational> {
    let curve = tradeoff_curve(params);
    let last = curve.last().expect("curve is never empty");
    if *alpha < last.alpha {
        return Err(Error::InfeasibleStorage {
            alpha: alpha.to_string(),
            minimum: last.alpha.to_string(),
        });
    }
    if *alpha >= curve[0].alpha {
        return Ok(curve[0].gamma.clone());
    }
    for w in curve.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if *alpha >= q.alpha {
            let t = (&p.alpha - alpha) / (&p.alpha - &q.alpha);
            return Ok(&p.gamma + t * (&q.gamma - &p.gamma));
        }
    }
    unreachable!("alpha >= M/k lands in some segment")
}

pub fn msmr_point(params: &SystemParams) -> TradeoffPoint {
    let alpha = &params.file_size / int(params.k);
    let gamma = if params.k <= params.e {
        params.file_size.clone()
    } else {
        let (k, d, e) = (params.k, params.d, params.e);
        &alpha * int(e * d) / int(d + e - k)
    };
    TradeoffPoint::from_alpha_gamma(alpha, gamma, params.d)
}

pub fn mbmr_point(params: &SystemParams) -> TradeoffPoint {
    if params.k <= params.e {
        return msmr_point(params);
    }
    let (d, e, eta, r) = (params.d, params.e, params.eta(), params.r());
    let m = &params.file_size;
    let (alpha, gamma) = if r == 0 {
        let gamma = m * int(d) / int(d * eta - e * binom2(eta));
        (&gamma / int(e), gamma)
    } else {
        let gamma = m * int(d) / int(d * (eta + 1) - e * binom2(eta + 1));
        let alpha = &gamma * int(d + eta * r - e * eta) / int(r * d);
        (alpha, gamma)
    };
    TradeoffPoint::from_alpha_gamma(alpha, gamma, d)
}

/// A breakpoint of the piecewise-linear threshold curve. The linear piece
/// numbered `segment` starts here; the last point starts the flat part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    pub gamma: Rational,
    pub alpha: Rational,
    pub segment: usize,
}

/// Breakpoints of `alpha*` from the MBMR point up to where it flattens at
/// `M/k`, with gamma ascending.
pub fn tradeoff_curve(params: &SystemParams) -> Vec<CurvePoint> {
    if params.k <= params.e {
        return vec![CurvePoint {
            gamma: params.file_size.clone(),
            alpha: &params.file_size / int(params.k),
            segment: 0,
        }];
    }
    let mut gammas = Vec::new();
    if params.r() != 0 {
        gammas.push(gamma_mbmr(params));
    }
    gammas.extend((0..params.eta()).map(|i| f_break(params, i)));
    gammas
        .into_iter()
        .enumerate()
        .map(|(segment, gamma)| {
            let alpha = alpha_star(params, &gamma).expect("breakpoints are feasible");
            CurvePoint { gamma, alpha, segment }
        })
        .collect()
}

fn scenario_alpha_threshold(u: &Scenario, d: usize, beta: &Rational, m: &Rational) -> Option<Rational> {
    // Caps c_i; the i-th term saturates once alpha >= c_i / u_i.
    let mut prefix = 0;
    let mut terms: Vec<(Rational, usize, Rational)> = Vec::with_capacity(u.0.len());
    for &ui in &u.0 {
        let cap = beta * int(d - prefix);
        terms.push((&cap / int(ui), ui, cap));
        prefix += ui;
    }
    let total: Rational = terms.iter().map(|t| t.2.clone()).sum();
    if total < *m {
        return None;
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut saturated = Rational::zero();
    let mut slope: usize = terms.iter().map(|t| t.1).sum();
    let mut lo = Rational::zero();
    for (bp, ui, cap) in &terms {
        // On [lo, bp] the cut is saturated + alpha * slope.
        let candidate = (m - &saturated) / int(slope);
        if candidate <= *bp {
            return Some(candidate.max(lo));
        }
        saturated += cap;
        slope -= ui;
        lo = bp.clone();
    }
    Some(lo)
}

/// Minimal `alpha` for which every scenario's cut reaches `M` at total
/// bandwidth `gamma`, by exhaustive search. `None` when no `alpha` works.
pub fn alpha_threshold_oracle(params: &SystemParams, gamma: &Rational) -> Option<Rational> {
    let beta = gamma / int(params.d);
    let scenarios = enumerate_scenarios(params.k, params.e);
    let per: Vec<Option<Rational>> = scenarios
        .par_iter()
        .map(|u| scenario_alpha_threshold(u, params.d, &beta, &params.file_size))
        .collect();
    per.into_iter().try_fold(Rational::zero(), |acc, a| a.map(|a| acc.max(a)))
}

/// The minimum-bandwidth cooperative point and whether it meets the
/// centralized tradeoff.
pub fn mbcr_check(params: &SystemParams) -> (TradeoffPoint, bool) {
    let (k, d, e) = (params.k, params.d, params.e);
    let m = &params.file_size;
    let den = int(k * (2 * d + e - k));
    let alpha = m * int(2 * d + e - 1) / &den;
    let gamma = m * int(2 * d * e) / den;
    let on = alpha_star(params, &gamma).is_ok_and(|a| a == alpha);
    (TradeoffPoint::from_alpha_gamma(alpha, gamma, d), on)
}

/// Total bandwidths at one storage value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub alpha: Rational,
    /// Centralized repair of `e` nodes with `d` helpers.
    pub centralized: Rational,
    /// `e` successive single repairs with `d` helpers each.
    pub separate: Rational,
    /// Centralized repair with only `d - e + 1` helpers, when that is at least `k`.
    pub centralized_fewer: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    pub params: SystemParams,
    pub rows: Vec<ComparisonRow>,
    /// Centralized over separate at the minimum-storage point, same `d`.
    pub msmr_ratio_same_d: Rational,
    /// Centralized with `d - e + 1` helpers over separate with `d`.
    pub msmr_ratio_fewer: Option<Rational>,
}

impl ComparisonReport {
    /// Storage values at which the fewer-helpers centralized curve crosses
    /// the separate curve. Both are linear between consecutive rows.
    pub fn crossovers(&self) -> Vec<Rational> {
        let diffs: Vec<Option<(Rational, Rational)>> = self
            .rows
            .iter()
            .map(|r| r.centralized_fewer.as_ref().map(|c| (r.alpha.clone(), c - &r.separate)))
            .collect();
        let mut out = Vec::new();
        for w in diffs.windows(2) {
            let (Some((a0, d0)), Some((a1, d1))) = (&w[0], &w[1]) else { continue };
            if d0.is_zero() {
                out.push(a0.clone());
            } else if !d1.is_zero() && d0.signum() != d1.signum() {
                out.push(a0 + (a1 - a0) * (d0 / (d0 - d1)));
            }
        }
        if let Some(Some((a, d))) = diffs.last() {
            if d.is_zero() {
                out.push(a.clone());
            }
        }
        out.dedup();
        out
    }
}

pub fn compare_strategies(params: &SystemParams) -> Result<ComparisonReport> {
    let single = params.with_e(1)?;
    let e = params.e;
    let fewer_d = params.d + 1 - e;
    let fewer = if fewer_d >= params.k { Some(params.with_d(fewer_d)?) } else { None };

    let mut alphas: Vec<Rational> = tradeoff_curve(params)
        .into_iter()
        .chain(tradeoff_curve(&single))
        .chain(fewer.iter().flat_map(tradeoff_curve))
        .map(|p| p.alpha)
        .collect();
    alphas.sort();
    alphas.dedup();
    let mids: Vec<Rational> = alphas.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
    alphas.extend(mids);
    alphas.sort();

    let rows = alphas
        .into_iter()
        .map(|alpha| -> Result<ComparisonRow> {
            Ok(ComparisonRow {
                centralized: gamma_star(params, &alpha)?,
                separate: gamma_star(&single, &alpha)? * int(e),
                centralized_fewer: fewer.as_ref().map(|p| gamma_star(p, &alpha)).transpose()?,
                alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let sep_msr = msmr_point(&single).gamma * int(e);
    Ok(ComparisonReport {
        params: params.clone(),
        rows,
        msmr_ratio_same_d: msmr_point(params).gamma / &sep_msr,
        msmr_ratio_fewer: fewer.as_ref().map(|p| msmr_point(p).gamma / &sep_msr),
    })
}

/// `(numerator, denominator)` as decimal strings.
pub fn rational_parts(q: &Rational) -> (String, String) {
    (q.numer().to_string(), q.denom().to_string())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Malformed(format!("not a rational number: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams { file_size: Rational::one(), n: 12, k: 8, d: 10, e: 2 }
    }
}
