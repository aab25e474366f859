//! End-to-end acceptance checks, one line per criterion.
//!
//! `cargo test --test acceptance -- --nocapture` shows the report; the
//! `--ignored` run adds the long census rows and DU through n = 12.

use std::collections::HashSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use liftforge::catalog::{
    closure_search, degree2_probe, identities, load_catalog, verify_catalog, CatalogEntry,
    VerifyOptions,
};
use liftforge::diffunif::{ddt_max, du_scaled_table, Scaled};
use liftforge::families::{
    build_chain, build_symmetric, enumerate_symmetric, verify_order_claim, ChainFamilyParams,
    OrderClaim,
};
use liftforge::landscape::{count_conserved, enumerate_conserved};
use liftforge::lifting::{divisor_check, expand, iterate_order, IterateOrder};
use liftforge::search6::{complete_search, count_period_mappings, pool};
use liftforge::{
    compose, decide_proper, induce, is_lifting, Anf, Error, Landscape, LiftExpr, Rule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn run(report: &mut Vec<(String, bool)>, id: &str, f: impl FnOnce() -> Check) {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let (ok, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let line = format!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    // Straight to the handle, so the report shows without --nocapture.
    let _ = writeln!(std::io::stdout(), "{line}");
    report.push((line, ok));
}

fn finish(report: Vec<(String, bool)>) {
    let failed: Vec<_> = report
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(l, _)| l.as_str())
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}

fn rule(expr: &str) -> Rule {
    LiftExpr::parse(expr).unwrap().eval().unwrap()
}

fn mask(n: u32) -> u64 {
    (1u64 << n) - 1
}

fn random_rule(rng: &mut ChaCha8Rng, k: u32) -> Rule {
    loop {
        let table: Vec<bool> = (0..1u32 << k).map(|_| rng.gen()).collect();
        if let Ok(r) = Rule::from_table(k, &table) {
            return r.with_shift(rng.gen_range(-3..=3));
        }
    }
}

/// A composition of one to three conserved landscapes of diameter 4..=6.
fn random_proper(rng: &mut ChaCha8Rng, pool: &[Rule]) -> Rule {
    let mut r = pool[rng.gen_range(0..pool.len())].clone();
    for _ in 0..rng.gen_range(0..=2) {
        let g = &pool[rng.gen_range(0..pool.len())];
        if let Ok(c) = compose(g, &r) {
            if c.k() <= 12 && !c.is_projection() {
                r = c;
            }
        }
    }
    r
}

fn conserved_pool() -> Vec<Rule> {
    (4..=6)
        .flat_map(|k| enumerate_conserved(k).unwrap().landscapes.unwrap())
        .map(|l| l.compile())
        .collect()
}

fn rotate(x: u64, n: u32) -> u64 {
    ((x << 1) | (x >> (n - 1))) & mask(n)
}

fn census() -> Check {
    let expected: [(u32, u64, u64); 9] = [
        (4, 4, 1),
        (5, 14, 4),
        (6, 72, 18),
        (7, 288, 73),
        (8, 1160, 290),
        (9, 4376, 1100),
        (10, 16776, 4194),
        (11, 60646, 15176),
        (12, 219344, 54836),
    ];
    for (k, count, classes) in expected {
        let c = enumerate_conserved(k).map_err(|e| e.to_string())?;
        ensure!(
            (c.count, c.classes) == (count, classes),
            "k={k}: got {}/{} want {count}/{classes}",
            c.count,
            c.classes
        );
        let streamed = count_conserved(k).map_err(|e| e.to_string())?;
        ensure!(
            streamed == (count, classes),
            "k={k}: streamed count {streamed:?}"
        );
    }
    Ok("k=4..12 counts and classes exact (listing and Burnside agree)".into())
}

fn search6() -> Check {
    let want_b = [2u128, 2, 4, 32, 3076];
    for (p, &b) in (1..=5).zip(&want_b) {
        ensure!(
            count_period_mappings(p) == Some(b),
            "b_{p} = {:?}",
            count_period_mappings(p)
        );
    }
    let s2 = complete_search(2, true).map_err(|e| e.to_string())?;
    let s3 = complete_search(3, true).map_err(|e| e.to_string())?;
    for (rep, survivors, functions, classes) in [(&s2, 4296, 20, 10), (&s3, 4564, 56, 30)] {
        let st = &rep.stats;
        ensure!(
            st.combinations == 787_456,
            "s={} combinations {}",
            st.s,
            st.combinations
        );
        ensure!(
            st.survivors == survivors,
            "s={} survivors {}",
            st.s,
            st.survivors
        );
        ensure!(
            st.fixed_windows == 44,
            "s={} fixed windows {}",
            st.s,
            st.fixed_windows
        );
        ensure!(
            (rep.functions.len(), rep.classes) == (functions, classes),
            "s={} gave {}/{}",
            st.s,
            rep.functions.len(),
            rep.classes
        );
    }
    let pooled = pool(&s2, &s3);
    ensure!(
        (pooled.classes.len(), pooled.functions.len()) == (40, 152),
        "pooled {}/{}",
        pooled.classes.len(),
        pooled.functions.len()
    );
    Ok(
        "b_p, 787456 combinations, 4296/4564 survivors, 44 windows, 20/10, 56/30, pooled 40/152"
            .into(),
    )
}

const BODY_TABLE: [(&str, u32, &[u64]); 5] = [
    ("(0★10)", 4, &[192, 224, 240, 216, 216, 216, 216, 216, 216]),
    (
        "(0★110)∘(0★10)",
        5,
        &[128, 144, 144, 136, 132, 132, 132, 132],
    ),
    ("(0-★100)∘(0-★110)", 6, &[192, 224, 224, 216, 240, 216, 216]),
    (
        "(00★10)∘(0★110)∘(0★10)",
        6,
        &[144, 128, 132, 120, 117, 117, 117],
    ),
    ("(0★10)∘(0★110)∘(01★00)", 6, &[80, 104, 84, 72, 72, 72, 72]),
];

fn body_table(n_to: u32) -> Check {
    let exprs: Vec<LiftExpr> = BODY_TABLE
        .iter()
        .map(|(e, _, _)| LiftExpr::parse(e).unwrap())
        .collect();
    let table = du_scaled_table(&exprs, 4, n_to).map_err(|e| e.to_string())?;
    for ((expr, start, values), row) in BODY_TABLE.iter().zip(&table.rows) {
        for n in 4..=n_to {
            let got = row.values[(n - 4) as usize];
            let want = (n >= *start).then(|| Scaled::integer(values[(n - start) as usize]));
            ensure!(got == want, "{expr} n={n}: got {got:?} want {want:?}");
        }
    }
    Ok(format!("five rows exact through n={n_to}"))
}

fn appendix_spot_checks() -> Check {
    let rows: [(&str, [u64; 7]); 3] = [
        ("(0-★100)∘(0-★110)", [24, 56, 112, 216, 480, 864, 1728]),
        ("(0★10)∘(0★110)∘(01★00)", [10, 26, 42, 72, 144, 288, 576]),
        ("(0★110)∘(0★10)∘(10★011)", [16, 24, 46, 96, 194, 388, 776]),
    ];
    for (expr, want) in rows {
        let r = rule(expr);
        for (n, &w) in (6..=12).zip(&want) {
            let (d, (a, b)) = ddt_max(&r, n).map_err(|e| e.to_string())?;
            ensure!(d == w, "{expr} n={n}: {d} != {w}");
            let m = induce(&r, n).unwrap();
            let hits = (0..1u64 << n)
                .filter(|&x| m.apply(x ^ a) ^ m.apply(x) == b)
                .count() as u64;
            ensure!(hits == d, "{expr} n={n}: witness replays to {hits}");
        }
    }
    Ok("degree-3 row and both highlighted rows exact for n=6..12, witnesses replay".into())
}

fn catalog_structure(entries: &[CatalogEntry], required: Vec<liftforge::EquivClassId>) -> Check {
    let report = verify_catalog(
        entries,
        &VerifyOptions {
            du_n_max: Some(12),
            required_classes: required,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        report.entries.len() == 120,
        "{} entries",
        report.entries.len()
    );
    ensure!(
        report.distinct_classes == 120,
        "{} classes",
        report.distinct_classes
    );
    ensure!(
        report.entries.iter().all(|e| e.k == 6 && e.proper),
        "non-diameter-6 or improper entry"
    );
    ensure!(
        report.missing_required.is_empty(),
        "missing {:?}",
        report.missing_required
    );
    ensure!(
        report.mismatches.is_empty(),
        "mismatches {:?}",
        report.mismatches
    );
    Ok(format!(
        "120 diameter-6 proper inequivalent entries, stated degrees and all DU n=6..12 match, 40 search classes contained ({} orbit functions)",
        report.orbit_functions
    ))
}

fn identity_suite() -> Check {
    let checks = identities().map_err(|e| e.to_string())?;
    ensure!(checks.len() == 8, "{} identities", checks.len());
    for c in &checks {
        ensure!(c.holds, "{} ≠ {}", c.lhs, c.rhs);
    }
    let h = rule("(1★001)∘(1★01)");
    let printed =
        Rule::parse_polynomial("x2 ^ x1 (x4 (x3 ^ 1) ^ (x4 ^ 1) x5 (x2 ^ x3 ^ 1))").unwrap();
    ensure!(h == printed && h.k() == 5, "composition example: {h}");
    Ok(
        "six polynomial listings, two landscape-set compositions, diameter-5 composition example"
            .into(),
    )
}

fn property_suites() -> Check {
    const CASES: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let conserved = conserved_pool();

    // Möbius round trip, with the ANF evaluated directly as an oracle.
    for _ in 0..CASES {
        let k = rng.gen_range(1..=12);
        let r = random_rule(&mut rng, k);
        let anf = r.to_anf();
        let back = Rule::from_anf(&anf).unwrap().with_shift(r.shift());
        ensure!(back == r, "round trip failed for {r}");
        let monos = Anf::from_truth_table(r.k(), &r.to_bools())
            .unwrap()
            .monomial_masks();
        for _ in 0..16 {
            let v = rng.gen::<u64>() & mask(r.k());
            let direct = monos.iter().filter(|&&m| v & m == m).count() % 2 == 1;
            ensure!(direct == r.eval(v), "ANF of {r} disagrees at {v:b}");
        }
    }

    // Shift invariance of the induced map.
    for _ in 0..CASES {
        let r = {
            let k = rng.gen_range(1..=7);
            random_rule(&mut rng, k)
        };
        let n = rng.gen_range(r.k().max(2)..=20);
        let m = induce(&r, n).unwrap();
        let x = rng.gen::<u64>() & mask(n);
        ensure!(
            m.apply_placed(rotate(x, n)) == rotate(m.apply_placed(x), n),
            "{r} n={n}"
        );
    }

    // Composition is a homomorphism on induced maps.
    for _ in 0..CASES {
        let f = {
            let k = rng.gen_range(1..=6);
            random_rule(&mut rng, k)
        };
        let g = {
            let k = rng.gen_range(1..=6);
            random_rule(&mut rng, k)
        };
        let h = compose(&g, &f).unwrap();
        let n = rng.gen_range((f.k() + g.k() - 1).max(2)..=18);
        let (mf, mg, mh) = (
            induce(&f, n).unwrap(),
            induce(&g, n).unwrap(),
            induce(&h, n).unwrap(),
        );
        for _ in 0..8 {
            let x = rng.gen::<u64>() & mask(n);
            ensure!(
                mh.apply_placed(x) == mg.apply_placed(mf.apply_placed(x)),
                "{g}∘{f} n={n}"
            );
        }
    }

    // Lifting on n implies lifting on every divisor m ≥ k.
    let mut lifting_cases = 0;
    for case in 0..CASES {
        let r = if case % 2 == 0 {
            random_proper(&mut rng, &conserved)
        } else {
            {
                let k = rng.gen_range(2..=4);
                random_rule(&mut rng, k)
            }
        };
        let n = rng.gen_range(r.k().max(2)..=16);
        lifting_cases += usize::from(is_lifting(&r, n).unwrap());
        for m in (r.k()..n).filter(|m| n % m == 0) {
            ensure!(
                divisor_check(&r, n, m).unwrap(),
                "{r}: lifting on {n} but not on {m}"
            );
        }
    }
    ensure!(
        lifting_cases >= CASES / 4,
        "only {lifting_cases} lifting cases"
    );

    // Every conserved landscape of diameter ≤ 8 is an involution.
    let mut involutions = 0;
    for k in 4..=8 {
        for land in enumerate_conserved(k).unwrap().landscapes.unwrap() {
            let r = land.compile();
            ensure!(
                iterate_order(&r, 2)
                    == IterateOrder::Found {
                        order: 2,
                        offset: 0
                    },
                "{land} squared is not the identity"
            );
            for n in k..=k + 3 {
                let m = induce(&r, n).unwrap();
                for _ in 0..4 {
                    let x = rng.gen::<u64>() & mask(n);
                    ensure!(m.apply_placed(m.apply_placed(x)) == x, "{land} n={n}");
                }
            }
            involutions += 1;
        }
    }

    // Expansion by s is conjugate to the original map when gcd(n, s) = 1.
    let mut expansions = 0;
    while expansions < CASES {
        let f = if expansions % 2 == 0 {
            random_proper(&mut rng, &conserved[..19])
        } else {
            {
                let k = rng.gen_range(2..=4);
                random_rule(&mut rng, k)
            }
        };
        let s = rng.gen_range(2..=4u32);
        let Ok(fs) = expand(&f, s) else { continue };
        let n = rng.gen_range(fs.k()..=fs.k() + 6);
        if gcd(n, s) != 1 || n > 24 {
            continue;
        }
        let (ms, m) = (induce(&fs, n).unwrap(), induce(&f, n).unwrap());
        let permute = |x: u64| (0..n).fold(0u64, |acc, j| acc | ((x >> (j * s % n) & 1) << j));
        let unpermute = |y: u64| (0..n).fold(0u64, |acc, j| acc | ((y >> j & 1) << (j * s % n)));
        for _ in 0..8 {
            let x = rng.gen::<u64>() & mask(n);
            ensure!(
                ms.apply(x) == unpermute(m.apply(permute(x))),
                "{f} s={s} n={n}"
            );
        }
        expansions += 1;
    }

    // Degree, balance, lifting status and per-n DU are class invariants.
    for case in 0..CASES {
        let r = if case % 2 == 0 {
            random_proper(&mut rng, &conserved)
        } else {
            {
                let k = rng.gen_range(2..=5);
                random_rule(&mut rng, k)
            }
        };
        let ns: Vec<u32> = (r.k().max(2)..=r.k().max(2) + 2)
            .filter(|&n| n <= 10)
            .collect();
        let base: Vec<(bool, u64)> = ns
            .iter()
            .map(|&n| (is_lifting(&r, n).unwrap(), ddt_max(&r, n).unwrap().0))
            .collect();
        for g in r.orbit() {
            ensure!(
                g.degree() == r.degree() && g.is_balanced() == r.is_balanced(),
                "{r} vs {g}"
            );
            for (&n, b) in ns.iter().zip(&base) {
                ensure!(
                    (is_lifting(&g, n).unwrap(), ddt_max(&g, n).unwrap().0) == *b,
                    "{r} vs {g} at n={n}"
                );
            }
        }
    }
    Ok(format!(
        "7 suites × ≥{CASES} seeded cases; {involutions} conserved landscapes checked, {lifting_cases} lifting divisor cases"
    ))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn families() -> Check {
    let mut members = 0;
    let mut circular = 0;
    for k in 4..=8 {
        for p in enumerate_symmetric(k) {
            let f = build_symmetric(&p).map_err(|e| e.to_string())?;
            ensure!(decide_proper(&f).unwrap().is_proper(), "{p:?} not proper");
            match verify_order_claim(&f, OrderClaim::PowerOfTwo(p.r_exp)) {
                Ok(holds) => ensure!(holds, "{p:?}: F^(2^{}) ≠ I", p.r_exp),
                Err(Error::Arity { .. }) => {
                    // The iterate outgrows the composition cap; every window
                    // of the iterate sits inside a circular state of length n.
                    let width = (1u32 << p.r_exp) * (k - 1) + 1;
                    for n in k..=width.min(16) {
                        let m = induce(&f, n).unwrap();
                        for x in 0..1u64 << n {
                            let y = (0..1u32 << p.r_exp).fold(x, |y, _| m.apply_placed(y));
                            ensure!(y == x, "{p:?} n={n}");
                        }
                    }
                    circular += 1;
                }
                Err(e) => return Err(e.to_string()),
            }
            members += 1;
        }
    }
    for r in 2..=4 {
        let f = build_chain(ChainFamilyParams::new(r).unwrap()).map_err(|e| e.to_string())?;
        ensure!(
            decide_proper(&f).unwrap().is_proper(),
            "chain r={r} not proper"
        );
        ensure!(
            verify_order_claim(&f, OrderClaim::Exact(r)).unwrap(),
            "chain r={r}: F^{r} ≠ I"
        );
    }
    ensure!(members > 0, "no symmetric members");
    Ok(format!(
        "{members} symmetric members k≤8 proper with F^(2^r)=I ({circular} checked on circular states); chain r=2,3,4 proper with F^r=I"
    ))
}

fn closure_and_probe(entries: &[CatalogEntry]) -> Check {
    let mut counts = Vec::new();
    let mut involutions = 0;
    for (d, budget) in [(6, usize::MAX), (7, usize::MAX), (8, 8_000)] {
        let r = closure_search(d, budget).map_err(|e| e.to_string())?;
        counts.push(r.classes.len());
        involutions = r.involution6_classes;
    }
    ensure!(
        counts.windows(2).all(|w| w[0] <= w[1]),
        "class counts not monotone: {counts:?}"
    );
    ensure!(
        involutions >= 40,
        "only {involutions} involution classes at D=8"
    );
    let probe = degree2_probe(entries).map_err(|e| e.to_string())?;
    ensure!(
        probe.degree2.is_empty(),
        "degree-2 compositions: {:?}",
        probe.degree2
    );
    Ok(format!(
        "classes by D=6,7,8: {counts:?}; {involutions} diameter-6 involution classes at D=8; 0 degree-2 among {} pairs",
        probe.pairs
    ))
}

#[test]
fn acceptance() {
    let mut report = Vec::new();
    let entries = load_catalog().unwrap();
    let mut required = Vec::new();
    run(&mut report, "1 conserved-landscape census", census);
    run(&mut report, "2 search6 replication", || {
        let c = search6();
        let s2 = complete_search(2, true).unwrap();
        let s3 = complete_search(3, true).unwrap();
        required = pool(&s2, &s3).classes.into_iter().collect();
        c
    });
    run(&mut report, "3 DU body table", || body_table(10));
    run(
        &mut report,
        "4 DU appendix spot checks",
        appendix_spot_checks,
    );
    run(&mut report, "5 catalog structure", || {
        catalog_structure(&entries, required.clone())
    });
    run(&mut report, "6 identity suite", identity_suite);
    run(&mut report, "7 property suites", property_suites);
    run(&mut report, "8 families", families);
    run(&mut report, "9 closure and degree-2 probe", || {
        closure_and_probe(&entries)
    });
    finish(report);
}

#[test]
#[ignore = "long: census rows k=13..18 and DU through n=12"]
fn acceptance_long() {
    let mut report = Vec::new();
    run(&mut report, "1L census k=13..18", || {
        let rows: [(u32, u64, u64); 6] = [
            (13, 775_930, 194_047),
            (14, 2_724_072, 681_018),
            (15, 9_394_778, 2_348_878),
            (16, 32_291_160, 8_072_790),
            (17, 109_326_972, 27_332_464),
            (18, 368_586_536, 92_146_634),
        ];
        for (k, count, classes) in rows {
            let got = count_conserved(k).map_err(|e| e.to_string())?;
            ensure!(got == (count, classes), "k={k}: {got:?}");
        }
        Ok("k=13..18 exact".into())
    });
    run(&mut report, "3L DU body table through n=12", || {
        body_table(12)
    });
    finish(report);
}

#[test]
fn landscape_strings_round_trip_through_expressions() {
    // Guards the row labels used above against parser drift.
    let seen: HashSet<String> = BODY_TABLE
        .iter()
        .map(|(e, _, _)| LiftExpr::parse(e).unwrap().to_string())
        .collect();
    assert_eq!(seen.len(), BODY_TABLE.len());
    assert_eq!(Landscape::parse("0★10").unwrap().k(), 4);
}
