//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines come out in order; exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use eqmonoid::collapsing::{self, CollapsingType};
use eqmonoid::endo::{self, DEFAULT_CAP};
use eqmonoid::fixtures::example1;
use eqmonoid::green::{self, MonoidTable};
use eqmonoid::io::parse_word;
use eqmonoid::verify::{self, CheckId, CorpusSpec, RunOptions, Status};
use eqmonoid::{Group, GroupSpec, Subgroup};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn monoid() -> MonoidTable {
    MonoidTable::new(&example1(), DEFAULT_CAP).expect("16 maps")
}

fn id(m: &MonoidTable, word: &str) -> usize {
    let w = parse_word(m.gset(), word).expect("valid word");
    m.id_of(&w).expect("equivariant word")
}

fn corpus() -> CorpusSpec {
    CorpusSpec::parse(include_str!("data/corpus.json")).expect("corpus spec parses")
}

fn criterion_1() -> Outcome {
    let x = example1();
    let start = Instant::now();
    let count = endo::count_endos(&x);
    let elapsed = start.elapsed();
    check(count == 16, || format!("count_endos = {count}"))?;
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("count_endos = 16 in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let m = monoid();
    let gs = green::green_structure(&m);
    let mut sizes: Vec<usize> = gs.l_classes.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    check(sizes == [4, 4, 2, 2, 2, 2], || format!("L-class sizes {sizes:?}"))?;
    let mut pairs = 0;
    for a in 0..m.len() {
        for b in 0..m.len() {
            pairs += 1;
            let kernel = green::l_related(&m, a, b);
            let ideals = green::l_related_by_ideals(&m, a, b);
            let engine = gs.l_of[a] == gs.l_of[b];
            check(kernel == ideals && engine == ideals, || {
                format!("{} vs {}: kernel {kernel}, ideals {ideals}", m.word_string(a), m.word_string(b))
            })?;
        }
    }
    check(pairs == 256, || format!("{pairs} pairs"))?;
    Ok(format!("6 L-classes {sizes:?}; kernel and ideal criteria agree on {pairs} pairs"))
}

fn criterion_3() -> Outcome {
    let x = example1();
    let m = monoid();
    let tau = m.element(id(&m, "(3000)"));
    let kind = collapsing::collapsing_type(&x, tau).map_err(|e| format!("(3000): {e}"))?;
    let expected = CollapsingType::new(&x, Subgroup::trivial(), &x.group().whole());
    check(kind == expected, || format!("(3000) has type {kind:?}"))?;
    check(kind.k_class == vec![x.group().whole()], || format!("K class {:?}", kind.k_class))?;
    for word in ["(0000)", "(3333)"] {
        let f = m.element(id(&m, word));
        check(collapsing::is_elementary_collapsing(&x, f).is_none(), || {
            format!("{word} detected as a collapsing")
        })?;
    }
    check(x.orbits().len() == 3, || format!("{} orbits", x.orbits().len()))?;
    Ok("(3000) has type (trivial, [Z_2]); constants are not collapsings with |X/G| = 3".into())
}

fn criterion_4() -> Outcome {
    let x = example1();
    let m = monoid();
    let f = collapsing::fixing_collapsing(&x, 1, 0).map_err(|e| e.to_string())?;
    let g = collapsing::fixing_collapsing(&x, 1, 3).map_err(|e| e.to_string())?;
    check(f.display(&x).to_string() == "(0003)", || format!("[1↦0] = {}", f.display(&x)))?;
    check(g.display(&x).to_string() == "(0333)", || format!("[1↦3] = {}", g.display(&x)))?;
    let tf = collapsing::collapsing_type(&x, &f).map_err(|e| e.to_string())?;
    let tg = collapsing::collapsing_type(&x, &g).map_err(|e| e.to_string())?;
    let (a, b) = (id(&m, "(0003)"), id(&m, "(0333)"));
    let equal_types = tf == tg;
    let l = green::l_related(&m, a, b);
    let r = green::r_related(&m, a, b);
    check(equal_types && !l && r, || {
        format!("equal types {equal_types}, L {l}, R {r}")
    })?;
    Ok("(0003), (0333): equal types true, L false, R true".into())
}

fn criterion_5() -> Outcome {
    let m = monoid();
    let gs = green::green_structure(&m);
    let census = collapsing::all_collapsings(&m);
    let fixing: Vec<usize> = census.iter().filter(|c| c.fixing.is_some()).map(|c| c.element).collect();
    let units = m.elements().iter().filter(|f| f.is_bijective()).count();
    let constants = m.elements().iter().filter(|f| f.is_constant()).count();
    let summary = format!(
        "{} collapsings, {} fixing, {units} units, {constants} constants, total {}",
        census.len(),
        fixing.len(),
        census.len() + units + constants
    );
    for (i, &a) in fixing.iter().enumerate() {
        for &b in &fixing[i + 1..] {
            check(gs.h_of[a] != gs.h_of[b], || {
                format!("fixing {} and {} are H-related", m.word_string(a), m.word_string(b))
            })?;
        }
    }
    check(
        census.len() == 10 && fixing.len() == 4 && units == 4 && constants == 2 && census.len() + units + constants == 16,
        || format!("expected 10 collapsings, 4 fixing, 4 units, 2 constants, total 16; found {summary}"),
    )?;
    Ok(summary)
}

fn criterion_6() -> Outcome {
    let m = monoid();
    for a in 0..m.len() {
        for b in a + 1..m.len() {
            if m.element(a).image() == m.element(b).image() && !green::r_related(&m, a, b) {
                return Ok(format!(
                    "{} and {} share an image but are not R-related",
                    m.word_string(a),
                    m.word_string(b)
                ));
            }
        }
    }
    Err("every pair with equal images is R-related".into())
}

fn criterion_7() -> Outcome {
    let spec = corpus();
    check(spec.count >= 25, || format!("corpus of {}", spec.count))?;
    let wanted = [
        GroupSpec::Cyclic(2),
        GroupSpec::Cyclic(3),
        GroupSpec::Cyclic(4),
        GroupSpec::klein(),
        GroupSpec::Symmetric(3),
        GroupSpec::Dihedral(4),
    ];
    let groups: Vec<Group> = wanted.iter().map(|s| Group::named(s).expect("named group")).collect();
    let mut seen = BTreeSet::new();
    for i in 0..spec.count {
        let x = verify::random_gset(&spec, i).map_err(|e| e.to_string())?;
        let size = endo::count_endos(&x);
        check(size <= 5000, || format!("G-set {i} has a monoid of {size}"))?;
        let g = groups
            .iter()
            .position(|g| g == x.group())
            .ok_or_else(|| format!("G-set {i} is over an unexpected group"))?;
        seen.insert(g);
    }
    check(seen.len() == groups.len(), || {
        format!("corpus covers only {:?}", seen.iter().map(|&g| wanted[g].to_string()).collect::<Vec<_>>())
    })?;

    let start = Instant::now();
    let reports = verify::run_corpus(&spec, &CheckId::ALL, &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if let Some(r) = reports.iter().find(|r| r.status == Status::Fail) {
        let cex = r.counterexample.as_ref().expect("failures carry a counterexample");
        return Err(format!("{} failed on G-set {}: {}", r.check_id, r.gset, cex.message));
    }
    for c in CheckId::ALL {
        check(
            reports.iter().any(|r| r.check_id == c && r.status == Status::Pass),
            || format!("{c} is vacuous on the whole corpus"),
        )?;
    }
    check(elapsed <= Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    let passes = reports.iter().filter(|r| r.status == Status::Pass).count();
    Ok(format!(
        "P1–P23 over {} G-sets: {passes} passing reports, {} vacuous, in {elapsed:.2?}",
        spec.count,
        reports.len() - passes
    ))
}

fn criterion_8() -> Outcome {
    let spec = corpus();
    let opts = RunOptions {
        extension_samples: 1000,
        ..RunOptions::default()
    };
    let mut cases = 0;
    for i in 0..spec.count {
        let x = verify::random_gset(&spec, i).map_err(|e| e.to_string())?;
        let report = verify::run_checks(&x, &[CheckId::P6], &opts)
            .map_err(|e| e.to_string())?
            .remove(0);
        if let Some(cex) = report.counterexample {
            return Err(format!("G-set {i}: {}", cex.message));
        }
        cases += report.cases;
    }
    let example = verify::run_checks(&example1(), &[CheckId::P6], &opts)
        .map_err(|e| e.to_string())?
        .remove(0);
    check(example.status == Status::Pass, || "Example 1 extension failed".into())?;
    cases += example.cases;
    check(cases > 0, || "no injective restrictions sampled".into())?;
    Ok(format!("{cases} of {cases} sampled injective restrictions extend to bijections"))
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Outcome); 8] = [
        (1, "Example 1 has 16 equivariant maps", criterion_1),
        (2, "Example 1 L-classes, kernel vs ideal oracle", criterion_2),
        (3, "(3000) is a collapsing of type (trivial, [Z_2])", criterion_3),
        (4, "[1↦0], [1↦3]: same type, not L, R", criterion_4),
        (5, "Example 1 collapsing census", criterion_5),
        (6, "equal images without R", criterion_6),
        (7, "property suite over the seeded corpus", criterion_7),
        (8, "extension round-trip", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, title, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {title}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {n} FAIL  {title}: {reason}");
            }
        }
    }
    println!("{} of 8 criteria pass", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
