//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use lrc_core::bounds::{check_ceiling_identities, consecutive_groups, distance_bound, witness_search, BoundQuery};
use lrc_core::field::{Field, Matrix};
use lrc_core::flownet::{build_flownet, extract_code, lemma2_capacity, min_cut_all_dcs, rlnc_verify};
use lrc_core::lrc::{CodeParams, Lrc};
use lrc_core::rs::for_each_subset;
use lrc_core::storesim::{fail_and_repair, fail_node, load_manifest, node_path, repair, retrieve, store};
use lrc_core::verifier::{exact_distance, exact_locality, GeneratorView};
use lrc_core::effective_rate;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail.push_str(&format!(" time={:.2}s limit={}s", took.as_secs_f64(), limit.as_secs()));
    out.pass &= took < limit;
    out
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// The distance bound written out directly.
fn bound_oracle(n: usize, r: usize, m: usize, alpha: usize) -> i64 {
    n as i64 - ceil_div(m, alpha) as i64 - ceil_div(m, r * alpha) as i64 + 2
}

fn paper_example() -> Outcome {
    let params = CodeParams::gf256(6, 4, 2).unwrap();
    let code = Lrc::new(params.clone()).unwrap();
    let gen = code.generator_view();
    let d = exact_distance(&gen).unwrap();
    let bound = distance_bound(&BoundQuery { n: 6, r: 2, file_size: 8, alpha: 3 }).unwrap();
    let localities: Vec<usize> = (0..6).map(|j| exact_locality(&gen, j).unwrap()).collect();
    let rate = effective_rate(&params);

    // Paper node 1 is node 0 here; its peers 2 and 3 are nodes 1 and 2.
    let dir = TempDir::new().unwrap();
    let data: Vec<u8> = (0..240u32).map(|i| (i * 37 % 251) as u8).collect();
    store(&data, &params, dir.path()).unwrap();
    let report = fail_and_repair(dir.path(), 0).unwrap();

    let pass = d == 3
        && bound == 3
        && bound == bound_oracle(6, 2, 8, 3)
        && localities == vec![2; 6]
        && rate == Ratio::new(4, 9)
        && report.contacted == vec![1, 2]
        && report.blocks == 6;
    check(
        pass,
        format!(
            "d={d} bound={bound} locality={localities:?} rate={rate} repair_contacted={:?} blocks={}",
            report.contacted, report.blocks
        ),
    )
}

fn optimality_sweep() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 2..=12 {
        for r in 1..n {
            if n % (r + 1) != 0 {
                continue;
            }
            for k in 1..n {
                if k % (r + 1) == 0 || r > n - (n - k + 1) {
                    continue;
                }
                cases += 1;
                let gen = Lrc::new(CodeParams::gf256(n, k, r).unwrap()).unwrap().generator_view();
                let d = exact_distance(&gen).unwrap() as i64;
                let singleton = (n - k + 1) as i64;
                let bound = distance_bound(&BoundQuery { n, r, file_size: r * k, alpha: r + 1 }).unwrap();
                if d != singleton || bound != singleton || bound != bound_oracle(n, r, r * k, r + 1) {
                    bad.push(format!("({n},{k},{r}): d={d} bound={bound}"));
                }
            }
        }
    }
    check(bad.is_empty() && cases > 0, format!("cases={cases} mismatches={bad:?}"))
}

fn random_invertible(f: &Field, size: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            for e in m.row_mut(i) {
                *e = f.random(rng);
            }
        }
        if m.rank(f) == size {
            return m;
        }
    }
}

/// Random code where the last node of each group is a sum of the others,
/// each twisted by an invertible matrix, so every node is repairable from
/// the rest of its group.
fn planted_code(rng: &mut ChaCha8Rng) -> (GeneratorView, usize) {
    let f = Field::with_bits(8).unwrap();
    loop {
        let r = rng.gen_range(1..=4);
        let groups = rng.gen_range(1..=10 / (r + 1));
        let n = groups * (r + 1);
        let alpha = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=groups * r * alpha);
        if bound_oracle(n, r, m, alpha) < 1 {
            continue;
        }
        let mut mat = Matrix::zeros(m, 0);
        for _ in 0..groups {
            let mut last = Matrix::zeros(m, alpha);
            for _ in 0..r {
                let mut node = Matrix::zeros(m, alpha);
                for i in 0..m {
                    for e in node.row_mut(i) {
                        *e = f.random(rng);
                    }
                }
                let twisted = node.mul(&f, &random_invertible(&f, alpha, rng)).unwrap();
                for i in 0..m {
                    for c in 0..alpha {
                        last[(i, c)] = f.add(last[(i, c)], twisted[(i, c)]);
                    }
                }
                mat = mat.hstack(&node).unwrap();
            }
            mat = mat.hstack(&last).unwrap();
        }
        return (GeneratorView::new(f, n, alpha, mat).unwrap(), r);
    }
}

fn universality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut violations = Vec::new();
    let mut decodable = 0;
    let mut tight = 0;
    for case in 0..200 {
        let (gen, r) = planted_code(&mut rng);
        let n = gen.n();
        let locality = (0..n).map(|j| exact_locality(&gen, j).unwrap()).max().unwrap();
        let d = exact_distance(&gen).unwrap() as i64;
        let bound = distance_bound(&BoundQuery { n, r, file_size: gen.file_size(), alpha: gen.alpha() }).unwrap();
        let witness = witness_search(&gen, &consecutive_groups(n, r)).unwrap().bound(n) as i64;
        decodable += usize::from(d > 0);
        tight += usize::from(d == bound);
        if locality > r || d > bound || d > witness {
            violations.push(format!(
                "case {case}: n={n} r={r} M={} alpha={} locality={locality} d={d} bound={bound} witness={witness}",
                gen.file_size(),
                gen.alpha()
            ));
        }
    }
    check(violations.is_empty(), format!("codes=200 decodable={decodable} meeting_bound={tight} violations={violations:?}"))
}

fn lemma2_agreement() -> Outcome {
    let mut tuples = 0;
    let mut bad = Vec::new();
    for n in 2..=10 {
        for r in 1..n {
            if n % (r + 1) != 0 {
                continue;
            }
            for alpha in 1..=4 {
                for m in 1..=n * alpha {
                    let d = bound_oracle(n, r, m, alpha);
                    if d < 1 || r as i64 > n as i64 - d {
                        continue;
                    }
                    tuples += 1;
                    let net = build_flownet(n, r, m, alpha).unwrap();
                    let cut = min_cut_all_dcs(&net);
                    let fan_in = n + 1 - d as usize;
                    let closed = (fan_in - fan_in / (r + 1)) * alpha;
                    let ceiling = ceil_div(m, alpha) * alpha;
                    let lib = lemma2_capacity(n, r, m, alpha);
                    if cut != closed || cut != ceiling || lib != Ok(cut) {
                        bad.push(format!("(n={n},r={r},M={m},alpha={alpha}): cut={cut} closed={closed} ceil={ceiling}"));
                    }
                }
            }
        }
    }
    check(bad.is_empty() && tuples > 0, format!("tuples={tuples} mismatches={bad:?}"))
}

fn rlnc_achievability() -> Outcome {
    const SEED: u64 = 2024;
    let net = build_flownet(6, 2, 9, 3).unwrap();
    let mut rates = Vec::new();
    for p in [1, 2, 4, 8] {
        let f = Field::with_bits(p).unwrap();
        let report = rlnc_verify(&net, &f, 100, SEED).unwrap();
        rates.push((f.order(), report.passes()));
    }
    let f = Field::with_bits(8).unwrap();
    let report = rlnc_verify(&net, &f, 100, SEED).unwrap();
    let mut uncertified = Vec::new();
    for trial in report.trials.iter().filter(|t| t.passed()) {
        let gen = extract_code(&net, &f, trial).unwrap();
        let d = exact_distance(&gen).unwrap();
        let locality = (0..6).map(|j| exact_locality(&gen, j).unwrap()).max().unwrap();
        if d < 3 || locality > 2 {
            uncertified.push((trial.index, d, locality));
        }
    }
    let passes = report.passes();
    // Context only: a larger sample from an unrelated seed.
    let wide = rlnc_verify(&net, &f, 5000, SEED + 1).unwrap();
    let monotone = rates.windows(2).all(|w| w[0].1 <= w[1].1) && rates[0].1 < rates[3].1;
    check(
        passes >= 90 && uncertified.is_empty() && monotone,
        format!(
            "seed={SEED} gf256_passes={passes}/100 collector_failures={} local_failures={} \
             passes_by_q={rates:?} uncertified={uncertified:?} (5000-trial gf256 rate {:.3})",
            report.collector_failures(),
            report.local_failures(),
            wide.success_rate()
        ),
    )
}

fn durability() -> Outcome {
    let shapes = [(6, 4, 2, 8), (9, 4, 2, 8), (12, 7, 3, 8), (8, 5, 3, 8), (10, 3, 4, 8), (6, 2, 1, 8), (9, 5, 2, 16)];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut losses = 0;
    let mut bad_repairs = 0;
    let mut repairs = 0;
    let mut bytes_total = 0u64;
    for cycle in 0..1000 {
        let (n, k, r, p) = shapes[rng.gen_range(0..shapes.len())];
        let params = CodeParams::new(n, k, r, Field::with_bits(p).unwrap()).unwrap();
        let len = (2f64.powf(rng.gen_range(0.0..20.0)) as usize).min(1 << 20);
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        bytes_total += len as u64;
        let dir = TempDir::new().unwrap();
        store(&data, &params, dir.path()).unwrap();
        let originals: Vec<Vec<u8>> = (0..n).map(|j| fs::read(node_path(dir.path(), j)).unwrap()).collect();

        let mut failed = Vec::new();
        for g in 0..n / (r + 1) {
            if rng.gen_bool(0.6) {
                failed.push(g * (r + 1) + rng.gen_range(0..=r));
            }
        }
        for &j in &failed {
            fail_node(dir.path(), j).unwrap();
        }
        let live: Vec<usize> = (0..n).filter(|j| !failed.contains(j)).collect();
        if retrieve(dir.path(), &live, None).ok().as_ref() != Some(&data) {
            losses += 1;
            eprintln!("cycle {cycle}: retrieval with nodes {failed:?} down failed");
        }
        for &j in &failed {
            repairs += 1;
            match repair(dir.path(), j) {
                Ok(rep) if rep.contacted.len() == r && rep.blocks == r * (r + 1) => {
                    if fs::read(node_path(dir.path(), j)).unwrap() != originals[j] {
                        losses += 1;
                    }
                }
                other => {
                    bad_repairs += 1;
                    eprintln!("cycle {cycle}: repair of {j} gave {other:?}");
                }
            }
        }
        let mut pick: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            pick.swap(i, j);
        }
        if retrieve(dir.path(), &pick[..k], None).ok().as_ref() != Some(&data) {
            losses += 1;
        }
    }

    // Every k-subset of one small instance.
    let dir = TempDir::new().unwrap();
    let data: Vec<u8> = (0..5000).map(|_| rng.gen()).collect();
    store(&data, &CodeParams::gf256(9, 4, 2).unwrap(), dir.path()).unwrap();
    let manifest = load_manifest(dir.path()).unwrap();
    let mut subsets = 0;
    let mut subset_failures = 0;
    for_each_subset(manifest.n, manifest.k, |s| {
        subsets += 1;
        if retrieve(dir.path(), s, None).ok().as_ref() != Some(&data) {
            subset_failures += 1;
        }
    });

    check(
        losses == 0 && bad_repairs == 0 && subset_failures == 0,
        format!(
            "cycles=1000 bytes={bytes_total} losses={losses} repairs={repairs} bad_repairs={bad_repairs} \
             k_subsets={subsets} subset_failures={subset_failures}"
        ),
    )
}

fn identities() -> Outcome {
    let report = check_ceiling_identities(10_000, &mut ChaCha8Rng::seed_from_u64(0x5eed_0007));
    check(
        report.passed() && report.checked == [10_000; 3],
        format!("checked={:?} failures={:?}", report.checked, report.failures),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 paper example (6,4,2)", Duration::from_secs(1), paper_example),
        ("2 optimality sweep n<=12", Duration::from_secs(300), optimality_sweep),
        ("3 bound universality", Duration::from_secs(600), universality),
        ("4 min-cut equals closed form", Duration::from_secs(120), lemma2_agreement),
        ("5 random network coding", Duration::from_secs(120), rlnc_achievability),
        ("6 round-trip durability", Duration::from_secs(600), durability),
        ("7 ceiling identities", Duration::from_secs(60), identities),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let out = timed(limit, run);
        println!("criterion {name}: {} {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
