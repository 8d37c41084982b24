//! Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use multirepair::ambr::AdaptiveMbrCode;
use multirepair::framework::ScalarMsrCode;
use multirepair::ia::{self, IaCode};
use multirepair::matrix::combinations;
use multirepair::mds::MdsStripeCode;
use multirepair::pm::PmCode;
use multirepair::tradeoff::{self, int, rat, SystemParams};
use multirepair::workbench::{self, CodeInstance, Sample};
use multirepair::{Elem, Error, Field, Matrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid() -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for k in 2..=10 {
        for e in 1..=k {
            for d in k..=13 {
                v.push((k, e, d));
            }
        }
    }
    v
}

fn params(k: usize, e: usize, d: usize) -> SystemParams {
    SystemParams::minimal(rat(1, 1), k, d, e).expect("grid params are valid")
}

fn c1_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let tuples = grid();
    let cuts: usize = tuples
        .par_iter()
        .map(|&(k, e, d)| {
            let p = params(k, e, d);
            let scenarios = tradeoff::enumerate_scenarios(k, e);
            let beta = rat(1, 1);
            for i in 1..=100 {
                let alpha = rat((i * (d + 1)) as i64, 100);
                let (oracle, _) = tradeoff::min_cut_over(&scenarios, d, &alpha, &beta).map_err(|x| x.to_string())?;
                let closed = tradeoff::cut_value(&tradeoff::optimal_scenario(&p, &alpha, &beta), &alpha, &beta, d)
                    .map_err(|x| x.to_string())?;
                check(oracle == closed, || format!("cut k={k} e={e} d={d} alpha/beta={alpha}: {closed} vs {oracle}"))?;
            }
            Ok::<usize, String>(100)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let el = t.elapsed();
    check(el < Duration::from_secs(60), || format!("took {el:?}, limit 60 s"))?;

    let thresholds: usize = tuples
        .par_iter()
        .map(|&(k, e, d)| {
            let p = params(k, e, d);
            let lo = tradeoff::gamma_mbmr(&p);
            let hi = tradeoff::msmr_point(&p).gamma * rat(5, 4);
            for i in 0..20 {
                let g = &lo + (&hi - &lo) * rat(i, 19);
                let closed = tradeoff::alpha_star(&p, &g).map_err(|x| x.to_string())?;
                let oracle = tradeoff::alpha_threshold_oracle(&p, &g);
                check(oracle.as_ref() == Some(&closed), || format!("alpha* k={k} e={e} d={d} gamma={g}: {closed} vs {oracle:?}"))?;
            }
            Ok::<usize, String>(20)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!("{} tuples, {cuts} cut comparisons in {el:.2?}; {thresholds} alpha* threshold checks", tuples.len()))
}

fn c2_extreme_points() -> Outcome {
    let mut count = 0;
    for (k, e, d) in grid() {
        let p = params(k, e, d);
        let ms = tradeoff::msmr_point(&p);
        let mb = tradeoff::mbmr_point(&p);
        let a_ms = tradeoff::alpha_star(&p, &ms.gamma).map_err(|x| x.to_string())?;
        let a_mb = tradeoff::alpha_star(&p, &mb.gamma).map_err(|x| x.to_string())?;
        check(a_ms == ms.alpha && ms.alpha == rat(1, k as i64), || format!("MSMR k={k} e={e} d={d}"))?;
        check(a_mb == mb.alpha, || format!("MBMR k={k} e={e} d={d}: {a_mb} vs {}", mb.alpha))?;
        let below = &mb.gamma - rat(1, 1_000_000);
        check(tradeoff::alpha_star(&p, &below).is_err(), || format!("below MBMR feasible k={k} e={e} d={d}"))?;
        let ea = &mb.alpha * int(e);
        if k % e == 0 {
            check(ea == mb.gamma, || format!("e|k: e alpha {ea} != gamma {} (k={k} e={e} d={d})", mb.gamma))?;
        } else {
            check(ea > mb.gamma, || format!("e!|k: e alpha {ea} <= gamma {} (k={k} e={e} d={d})", mb.gamma))?;
        }
        count += 1;
    }
    Ok(format!("{count} parameter tuples"))
}

fn c3_reduction() -> Outcome {
    let mut count = 0;
    for (k, e, d) in grid() {
        if k % e != 0 || d % e != 0 {
            continue;
        }
        let big = params(k, e, d);
        let small = SystemParams::minimal(rat(1, e as i64), k / e, d / e, 1).map_err(|x| x.to_string())?;
        let a = tradeoff::tradeoff_curve(&big);
        let b = tradeoff::tradeoff_curve(&small);
        check(a.len() == b.len(), || format!("k={k} e={e} d={d}: {} vs {} breakpoints", a.len(), b.len()))?;
        for (x, y) in a.iter().zip(&b) {
            check(x.alpha == y.alpha && &x.gamma / int(d) == &y.gamma / int(d / e), || {
                format!("k={k} e={e} d={d}: ({}, {}) vs ({}, {})", x.alpha, x.gamma, y.alpha, y.gamma)
            })?;
        }
        count += 1;
    }
    Ok(format!("{count} divisible tuples equal in (alpha, beta)"))
}

fn c4_mbcr() -> Outcome {
    let mut count = 0;
    let mut on = Vec::new();
    for k in 2..=12 {
        for e in 2..=k {
            for d in k..=12 {
                let p = params(k, e, d);
                let (_, got) = tradeoff::mbcr_check(&p);
                let want = k % e == 1;
                check(got == want, || format!("k={k} e={e} d={d}: got {got}, want {want}"))?;
                if e == 3 && d == k && (7..=9).contains(&k) {
                    on.push((k, got));
                }
                count += 1;
            }
        }
    }
    check(on == vec![(7, true), (8, false), (9, false)], || format!("k=7..9, e=3 cases {on:?}"))?;
    Ok(format!("{count} tuples; k=7/8/9, e=3, d=k -> {:?}", on.iter().map(|x| x.1).collect::<Vec<_>>()))
}

fn message(field: &Field, len: usize, seed: u64) -> Vec<Elem> {
    workbench::random_message(field, len, &mut workbench::pattern_rng(seed, 0))
}

fn c5_pm_example() -> Outcome {
    let t = Instant::now();
    let code = PmCode::geometric(Field::new(8, 0x11D).map_err(|x| x.to_string())?, 11, 6).map_err(|x| x.to_string())?;
    check(code.lambdas()[1] == Elem(2), || "lambda_1 is not g".into())?;
    let cw = code.encode(&message(code.field(), code.message_len(), 5)).map_err(|x| x.to_string())?;
    let mut total = 0;
    for e in 2..=3 {
        let pats = combinations(11, e);
        let n = pats.len();
        pats.par_iter()
            .map(|pat| {
                let pr = code.problem(pat.clone()).map_err(|x| x.to_string())?;
                let r = code.repair_multi(&pr, &cw).map_err(|x| format!("{pat:?}: {x}"))?;
                for (f, c) in pat.iter().zip(&r.contents) {
                    check(c == &cw[*f], || format!("{pat:?}: node {f} differs"))?;
                }
                check(r.transcript.per_helper.values().all(|&b| b == e), || format!("{pat:?}: per-helper bandwidth"))?;
                check(r.transcript.per_helper.len() == 10 - e + 1, || format!("{pat:?}: helper count"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        total += n;
    }
    let el = t.elapsed();
    check(el < Duration::from_secs(30), || format!("took {el:?}, limit 30 s"))?;

    let small = PmCode::geometric(Field::new(6, 0x43).map_err(|x| x.to_string())?, 11, 6).map_err(|x| x.to_string())?;
    let s2 = small.singular_patterns(2).map_err(|x| x.to_string())?;
    let s3 = small.singular_patterns(3).map_err(|x| x.to_string())?;
    check(!s2.is_empty(), || "F_64 has no singular e=2 pattern".into())?;
    Ok(format!("{total} patterns over F_256 in {el:.2?}; F_64 singular e=2 {s2:?}, e=3 {s3:?}"))
}

fn c6_ia_example() -> Outcome {
    let t = Instant::now();
    let f = Field::with_default_modulus(5).map_err(|x| x.to_string())?;
    let vp = ia::vandermonde_p(&f, 4);
    check(vp.all_square_submatrices_invertible(&f), || "Vandermonde P has a singular submatrix".into())?;
    let code = IaCode::with_defaults(f, 4).map_err(|x| x.to_string())?;
    check(code.p() == &vp, || "default P is not the Vandermonde matrix".into())?;
    let cw = code.encode(&message(code.field(), code.message_len(), 6)).map_err(|x| x.to_string())?;
    let mut counts = Vec::new();
    for e in 2..=4 {
        let pats = combinations(8, e);
        pats.par_iter()
            .map(|pat| {
                let r = code.repair_multi(&code.problem(pat.clone()).map_err(|x| x.to_string())?, &cw).map_err(|x| format!("{pat:?}: {x}"))?;
                check(pat.iter().zip(&r.contents).all(|(f, c)| c == &cw[*f]), || format!("{pat:?} differs"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        counts.push(pats.len());
    }
    let el = t.elapsed();
    check(el < Duration::from_secs(30), || format!("took {el:?}, limit 30 s"))?;
    Ok(format!("e=2,3,4: {counts:?} patterns, kappa={} in {el:.2?}", code.kappa()))
}

fn c7_ia_one_sided() -> Outcome {
    let f = Field::with_default_modulus(8).map_err(|x| x.to_string())?;
    let mut count = 0;
    for k in 2..=6 {
        let code = IaCode::with_defaults(f.clone(), k).map_err(|x| x.to_string())?;
        let base = Elem::ONE + f.mul(code.kappa(), code.kappa());
        let cw = code.encode(&message(&f, code.message_len(), k as u64)).map_err(|x| x.to_string())?;
        for e in 1..=k {
            let want = f.pow(base, (e * (e - 1) / 2) as u64);
            for pat in combinations(k, e) {
                for shift in [0, k] {
                    let p: Vec<usize> = pat.iter().map(|x| x + shift).collect();
                    let det = code.coupling_det(&p).map_err(|x| x.to_string())?;
                    check(det == want, || format!("k={k} {p:?}: det {det} != {want}"))?;
                    let r = code.repair_multi(&code.problem(p.clone()).map_err(|x| x.to_string())?, &cw).map_err(|x| x.to_string())?;
                    check(p.iter().zip(&r.contents).all(|(f, c)| c == &cw[*f]), || format!("k={k} {p:?} differs"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} one-sided patterns, k=2..6 over F_256"))
}

fn c8_ia_conditions() -> Outcome {
    let f = Field::with_default_modulus(8).map_err(|x| x.to_string())?;
    let pats: Vec<Vec<usize>> = (2..=4).flat_map(|e| combinations(8, e)).collect();
    let results: Vec<Result<(usize, usize), String>> = (0..1000u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = workbench::pattern_rng(2024, trial);
            let p = ia::random_p(&f, 4, &mut rng, 1000).map_err(|x| x.to_string())?;
            let code = IaCode::new(f.clone(), p, Matrix::identity(4), ia::default_kappa(&f)).map_err(|x| x.to_string())?;
            let mut singular = 0;
            for pat in &pats {
                let cond = code.condition_check(pat).map_err(|x| format!("{pat:?}: {x}"))?;
                let det = code.coupling_det(pat).map_err(|x| x.to_string())?;
                check(cond == !det.is_zero(), || format!("trial {trial} {pat:?}: condition {cond}, det {det}"))?;
                singular += usize::from(det.is_zero());
            }
            Ok((pats.len(), singular))
        })
        .collect();
    let mut checked = 0;
    let mut singular = 0;
    for r in results {
        let (c, s) = r?;
        checked += c;
        singular += s;
    }
    check(singular > 0, || "no singular pattern met; agreement is one-sided".into())?;
    Ok(format!("1000 random P, {checked} pattern checks, {singular} singular, 100% agreement"))
}

fn conjecture_report() -> String {
    let f = Field::with_default_modulus(8).expect("m = 8");
    let mut rng = ChaCha8Rng::seed_from_u64(84);
    let mut agree = 0;
    let trials = 200;
    for _ in 0..trials {
        let p = ia::random_p(&f, 4, &mut rng, 1000).expect("random P");
        let code = IaCode::new(f.clone(), p, Matrix::identity(4), ia::default_kappa(&f)).expect("valid code");
        let e = rng.random_range(2..=4);
        let mut pat: Vec<usize> = rand::seq::index::sample(&mut rng, 8, e).into_vec();
        pat.sort_unstable();
        if code.conjecture_eval(&pat).is_ok_and(|r| r.equal) {
            agree += 1;
        }
    }
    format!("determinant conjecture: {agree}/{trials} random k=4 patterns agree (report only)")
}

fn c9_mds() -> Outcome {
    let f = Field::with_default_modulus(8).map_err(|x| x.to_string())?;
    let mut count = 0;
    for n in 2..=8 {
        for k in 1..=n / 2 {
            for d in k..=n - k {
                let code = MdsStripeCode::fixed(f.clone(), n, k, d).map_err(|x| x.to_string())?;
                let msg = message(&f, code.file_len(), (n * 100 + k * 10 + d) as u64);
                let cw = code.encode(&msg).map_err(|x| x.to_string())?;
                for e in k..=n - d {
                    for pat in combinations(n, e) {
                        let helpers: Vec<usize> = (0..n).filter(|x| !pat.contains(x)).take(d).collect();
                        let r = code.repair(&pat, &helpers, &|h| cw[h].clone()).map_err(|x| format!("n={n} k={k} d={d} {pat:?}: {x}"))?;
                        check(pat.iter().zip(&r.contents).all(|(f, c)| c == &cw[*f]), || format!("n={n} k={k} d={d} {pat:?}"))?;
                        check(r.transcript.total == code.file_len(), || format!("n={n} k={k} d={d} {pat:?}: bandwidth"))?;
                        count += 1;
                    }
                }
            }
        }
    }
    let mut adaptive = 0;
    for e in 2..=5 {
        let code = MdsStripeCode::adaptive(Field::with_default_modulus(9).map_err(|x| x.to_string())?, 7, 2, e).map_err(|x| x.to_string())?;
        let cw = code.encode(&message(code.field(), code.file_len(), e as u64)).map_err(|x| x.to_string())?;
        for d in 2..=7 - e {
            for pat in combinations(7, e) {
                let helpers: Vec<usize> = (0..7).filter(|x| !pat.contains(x)).take(d).collect();
                let r = code.repair(&pat, &helpers, &|h| cw[h].clone()).map_err(|x| format!("adaptive e={e} d={d} {pat:?}: {x}"))?;
                check(pat.iter().zip(&r.contents).all(|(f, c)| c == &cw[*f]), || format!("adaptive e={e} d={d} {pat:?}"))?;
                check(r.transcript.total == code.file_len(), || format!("adaptive e={e} d={d}: bandwidth"))?;
                adaptive += 1;
            }
        }
    }
    Ok(format!("{count} fixed-d repairs at n<=8, {adaptive} adaptive repairs at n=7, k=2"))
}

fn c10_ambr() -> Outcome {
    let code = AdaptiveMbrCode::new(Field::with_default_modulus(6).map_err(|x| x.to_string())?, 7, 3, 4, 5).map_err(|x| x.to_string())?;
    let cw = code.encode(&message(code.field(), code.message_len(), 10)).map_err(|x| x.to_string())?;
    let mut count = 0;
    for e in 1..=3 {
        for d in 4..=5 {
            if e + d > 7 {
                continue;
            }
            for pat in combinations(7, e) {
                let helpers: Vec<usize> = (0..7).filter(|x| !pat.contains(x)).take(d).collect();
                let r = code.repair_multi(&pat, &helpers, &|h| cw[h].clone()).map_err(|x| x.to_string())?;
                check(pat.iter().zip(&r.contents).all(|(f, c)| c == &cw[*f]), || format!("e={e} d={d} {pat:?}"))?;
                let want = int(e) * int(20) - int(e * (e - 1) / 2) * rat(20, 4);
                check(int(r.transcript.total) == want && code.bandwidth_bound(e) == want, || {
                    format!("e={e} d={d} {pat:?}: total {} vs {want}", r.transcript.total)
                })?;
                count += 1;
            }
        }
        for pat in combinations(7, e) {
            let rank = code.stacked_rank(&pat).map_err(|x| x.to_string())?;
            check(rank == (e * 4 - e * (e - 1) / 2) * 5, || format!("rank of {pat:?} is {rank}"))?;
        }
    }
    Ok(format!("{count} repairs meet e*alpha - C(e,2)*alpha/d_min; ranks match"))
}

fn c11_case_two() -> Outcome {
    let mut count = 0;
    for (k, e, d) in grid() {
        if e < 2 || e >= k || d + 1 - e < k {
            continue;
        }
        let r = tradeoff::compare_strategies(&params(k, e, d)).map_err(|x| x.to_string())?;
        let want = rat((d + 1 - e) as i64, d as i64);
        check(r.msmr_ratio_fewer.as_ref() == Some(&want), || format!("k={k} e={e} d={d}: {:?} vs {want}", r.msmr_ratio_fewer))?;
        count += 1;
    }
    Ok(format!("{count} tuples with ratio (d-e+1)/d"))
}

fn random_elem(rng: &mut ChaCha8Rng, f: &Field) -> Elem {
    Elem(rng.random_range(0..f.size() as u32) as u16)
}

fn gf_invariants() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checks = 0;
    for m in 3..=12 {
        let f = Field::with_default_modulus(m).map_err(|x| x.to_string())?;
        for _ in 0..500 {
            let (a, b, c) = (random_elem(&mut rng, &f), random_elem(&mut rng, &f), random_elem(&mut rng, &f));
            check(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c), || format!("assoc m={m}"))?;
            check(f.mul(a, b + c) == f.mul(a, b) + f.mul(a, c), || format!("distrib m={m}"))?;
            check(f.mul(a, b) == f.mul_direct(a, b), || format!("table vs direct m={m}"))?;
            if !a.is_zero() {
                check(f.mul(a, f.inv(a).map_err(|x| x.to_string())?) == Elem::ONE, || format!("inverse m={m}"))?;
            }
            checks += 4;
        }
        for n in 1..=6 {
            let a = Matrix::from_fn(n, n, |_, _| random_elem(&mut rng, &f));
            let b = Matrix::from_fn(n, n, |_, _| random_elem(&mut rng, &f));
            let ab = a.mul(&f, &b).map_err(|x| x.to_string())?;
            let (da, db, dab) = (a.det(&f).map_err(|x| x.to_string())?, b.det(&f).map_err(|x| x.to_string())?, ab.det(&f).map_err(|x| x.to_string())?);
            check(dab == f.mul(da, db), || format!("det multiplicative m={m} n={n}"))?;
            match a.inv(&f) {
                Ok(ai) => check(a.mul(&f, &ai).map_err(|x| x.to_string())? == Matrix::identity(n), || format!("inverse m={m} n={n}"))?,
                Err(Error::Singular) => check(da.is_zero(), || format!("singular with nonzero det m={m}"))?,
                Err(x) => return Err(x.to_string()),
            }
            let pts: Vec<Elem> = rand::seq::index::sample(&mut rng, f.size(), n).into_iter().map(|v| Elem(v as u16)).collect();
            let v = Matrix::vandermonde(&f, &pts, n).map_err(|x| x.to_string())?;
            check(!v.det(&f).map_err(|x| x.to_string())?.is_zero(), || format!("Vandermonde m={m} n={n}"))?;
            checks += 3;
        }
    }
    Ok(checks)
}

fn c12_property_suite() -> Outcome {
    let f5 = Field::with_default_modulus(5).map_err(|x| x.to_string())?;
    let f6 = Field::with_default_modulus(6).map_err(|x| x.to_string())?;
    let f8 = Field::new(8, 0x11D).map_err(|x| x.to_string())?;
    let codes = [
        CodeInstance::Pm(PmCode::geometric(f8, 11, 6).map_err(|x| x.to_string())?),
        CodeInstance::Ia(IaCode::with_defaults(f5, 4).map_err(|x| x.to_string())?),
        CodeInstance::Mds(MdsStripeCode::fixed(f6.clone(), 8, 3, 4).map_err(|x| x.to_string())?),
        CodeInstance::Ambr(AdaptiveMbrCode::new(f6, 7, 3, 4, 5).map_err(|x| x.to_string())?),
    ];
    let per = 2500u64;
    let mut done = 0;
    for (ci, code) in codes.iter().enumerate() {
        let (lo, hi) = code.e_range();
        let ok = (0..per)
            .into_par_iter()
            .map(|i| {
                let mut rng = workbench::pattern_rng(1000 + ci as u64, i);
                let e = rng.random_range(lo..=hi);
                let mut pat = rand::seq::index::sample(&mut rng, code.n(), e).into_vec();
                pat.sort_unstable();
                let msg = workbench::random_message(code.field(), code.message_len(), &mut rng);
                let v = workbench::verify_exact_repair(code, &pat, None, &msg).map_err(|x| x.to_string())?;
                check(v.success, || format!("{} {pat:?} failed (singular {})", code.family(), v.singular))
            })
            .collect::<Result<Vec<_>, _>>()?;
        done += ok.len();
    }
    let zero = CodeInstance::Pm(PmCode::geometric(Field::new(8, 0x11D).map_err(|x| x.to_string())?, 11, 6).map_err(|x| x.to_string())?);
    let z = vec![Elem::ZERO; zero.message_len()];
    check(workbench::verify_exact_repair(&zero, &[0, 1], None, &z).map_err(|x| x.to_string())?.success, || "zero message".into())?;
    let sweep = workbench::run_sweep(&codes[1], 3, Sample::Random(20), 1).map_err(|x| x.to_string())?;
    check(sweep.failures == 0, || "IA sweep".into())?;
    let checks = gf_invariants()?;
    check(ScalarMsrCode::alpha(match &codes[0] {
        CodeInstance::Pm(c) => c,
        _ => unreachable!(),
    }) == 5, || "PM alpha".into())?;
    Ok(format!("{done} round trips across 4 families; {checks} field/matrix invariant checks"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("scenario-oracle equivalence", c1_oracle_equivalence),
        ("extreme points", c2_extreme_points),
        ("divisible reduction", c3_reduction),
        ("cooperative point predicate", c4_mbcr),
        ("PM example", c5_pm_example),
        ("IA example", c6_ia_example),
        ("IA one-sided determinants", c7_ia_one_sided),
        ("IA condition cross-validation", c8_ia_conditions),
        ("MDS e >= k", c9_mds),
        ("adaptive MBR", c10_ambr),
        ("centralized vs separate ratio", c11_case_two),
        ("property suite", c12_property_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let el = t.elapsed();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{el:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{el:.2?}]", i + 1);
            }
        }
    }
    println!("report        {}", conjecture_report());
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
