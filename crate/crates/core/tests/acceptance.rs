//! The ten acceptance criteria, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines are always printed.

use std::time::{Duration, Instant};

use qdlab::harness::{run_check, CheckId, CheckRecord, ExperimentConfig, Tolerances};

const IDENTITY_TOL: f64 = 1e-10;
const EXACT_TOL: f64 = 1e-12;
const PROPORTIONALITY_TOL: f64 = 1e-9;
const COEFFICIENT_TOL: f64 = 1e-9;
const PAIR_TOL: f64 = 1e-8;
const NONCOMMUTING_MIN: f64 = 1e-6;
const SLOPE_MARGIN: f64 = 0.5;

struct Outcome {
    number: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn row(rec: &CheckRecord, label: &str) -> f64 {
    rec.rows
        .iter()
        .find(|r| r.label == label)
        .unwrap_or_else(|| panic!("{}: no row {label}", rec.name))
        .value
}

fn rows_with<'a>(rec: &'a CheckRecord, suffix: &'a str) -> impl Iterator<Item = f64> + 'a {
    rec.rows.iter().filter(move |r| r.label.ends_with(suffix)).map(|r| r.value)
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn run(id: CheckId) -> (CheckRecord, Duration) {
    let start = Instant::now();
    let rec = run_check(id, &ExperimentConfig::single(id)).expect("check runs");
    (rec, start.elapsed())
}

fn criterion(number: usize, title: &'static str, budget: Duration, id: CheckId, judge: impl Fn(&CheckRecord) -> (bool, String)) -> Outcome {
    let (rec, took) = run(id);
    let (ok, detail) = judge(&rec);
    Outcome {
        number,
        title,
        pass: ok && rec.pass && took <= budget,
        detail: format!("{detail}; {:.2}s of {}s", took.as_secs_f64(), budget.as_secs()),
    }
}

fn c1() -> Outcome {
    criterion(1, "product form of A(v) and B(p)", Duration::from_secs(10), CheckId::Prop1, |r| {
        let worst = max_of(r.rows.iter().map(|x| x.value));
        let cases = r.rows.len();
        (cases == 12 && worst <= IDENTITY_TOL, format!("{cases} cases, worst residual {worst:.2e}"))
    })
}

fn c2() -> Outcome {
    criterion(2, "commutation of site projectors", Duration::from_secs(30), CheckId::Lemma1, |r| {
        let c1 = row(r, "Z2/vertex-vertex");
        let c2 = row(r, "Z2/plaquette-plaquette");
        let c3 = row(r, "Z2/same-edge-min");
        (
            c1 <= IDENTITY_TOL && c2 <= IDENTITY_TOL && c3 > NONCOMMUTING_MIN,
            format!("vv {c1:.1e}, pp {c2:.1e}, same-edge min {c3:.3}"),
        )
    })
}

fn c3() -> Outcome {
    criterion(3, "closed ribbons and double representation", Duration::from_secs(30), CheckId::Lemma2, |r| {
        let ribbon = max_of(rows_with(r, "/ribbon").chain(rows_with(r, "/double-register")));
        let algebra = max_of(
            rows_with(r, "/algebra")
                .chain(rows_with(r, "/expectation"))
                .chain(rows_with(r, "/factorization")),
        );
        let groups = ["Z2", "S3"].iter().all(|g| r.rows.iter().any(|x| x.label.starts_with(g)));
        (
            groups && ribbon <= IDENTITY_TOL && algebra <= EXACT_TOL,
            format!("ribbon {ribbon:.1e}, representation {algebra:.1e}"),
        )
    })
}

fn c4() -> Outcome {
    criterion(4, "Z2 2x2 quantum double spectrum", Duration::from_secs(10), CheckId::HqdSpectrum, |r| {
        let e = row(r, "Z2/ground-energy-error");
        let d = row(r, "Z2/degeneracy");
        let dense = row(r, "Z2/dense-degeneracy");
        let comm = row(r, "Z2/projector-commutators");
        (
            e <= 1e-8 && d == 4.0 && dense == 4.0 && comm <= IDENTITY_TOL,
            format!("|E0+8| {e:.1e}, degeneracy {d} (dense {dense}), commutators {comm:.1e}"),
        )
    })
}

fn c5() -> Outcome {
    criterion(5, "leading order, algebraic route", Duration::from_secs(60), CheckId::Thm1Bloch, |r| {
        let mut ok = true;
        let mut parts = Vec::new();
        for l in ["Z2/square/plaquette", "Z2/honeycomb/plaquette"] {
            let coeff = row(r, &format!("{l}/coefficient"));
            let err = row(r, &format!("{l}/coefficient-error"));
            let prop = max_of(
                r.rows
                    .iter()
                    .filter(|x| x.label.starts_with(l) && x.label.contains("/order"))
                    .map(|x| x.value),
            );
            ok &= (coeff + 2.0).abs() / 2.0 <= COEFFICIENT_TOL && err <= COEFFICIENT_TOL && prop <= PROPORTIONALITY_TOL;
            parts.push(format!("{l}: c = {coeff:.12}, residual {prop:.1e}"));
        }
        (ok, parts.join("; "))
    })
}

fn c6() -> Outcome {
    criterion(6, "leading order, spectral route", Duration::from_secs(120), CheckId::Thm1Exact, |r| {
        let sq = row(r, "Z2/square/plaquette/slope");
        let hc = row(r, "Z2/honeycomb/plaquette/slope");
        (
            sq >= 4.0 + SLOPE_MARGIN && hc >= 6.0 + SLOPE_MARGIN,
            format!("slopes {sq:.3} (n=4), {hc:.3} (n=6)"),
        )
    })
}

fn c7() -> Outcome {
    criterion(7, "vertex plus plaquette pair", Duration::from_secs(600), CheckId::Thm1pPair, |r| {
        let l = "Z2/square/pair";
        let coeff = row(r, &format!("{l}/coefficient"));
        let pre = ["ground-commutator", "hop-ground-commutator", "hop-norm-commutator"]
            .iter()
            .map(|k| row(r, &format!("{l}/{k}")))
            .fold(0.0, f64::max);
        let top = row(r, &format!("{l}/order4-pairs"));
        (
            (coeff + 2.0).abs() <= PAIR_TOL && pre <= IDENTITY_TOL && top <= PAIR_TOL,
            format!("dim {}, c = {coeff:.12}, preconditions {pre:.1e}", row(r, &format!("{l}/dim"))),
        )
    })
}

fn c8() -> Outcome {
    criterion(8, "diagram enumeration and reconstruction", Duration::from_secs(120), CheckId::Diagrams, |r| {
        let list = row(r, "n5/order4") == 10.0 && row(r, "n5/order4/eps111") == 6.0 && row(r, "n5/order4/eps101") == 4.0;
        let recon = max_of(rows_with(r, "/reconstruction"));
        let nonspecial = max_of(rows_with(r, "/non-special"));
        (
            list && recon <= PROPORTIONALITY_TOL && nonspecial <= PROPORTIONALITY_TOL,
            format!("n=5 order 4: 6 + 4; reconstruction {recon:.1e}, non-special {nonspecial:.1e}"),
        )
    })
}

fn c9() -> Outcome {
    criterion(9, "index tuples and sign sums", Duration::from_secs(10), CheckId::Combinatorics, |r| {
        let counts = (1..=8).all(|m| {
            let c = row(r, &format!("P{m}/count"));
            c == r.rows.iter().find(|x| x.label == format!("P{m}/count")).unwrap().threshold.unwrap()
                && c <= 4f64.powi(m)
        });
        let signs = (2..=8).all(|n: i32| row(r, &format!("g{n}/sign-sum")) == (-1f64).powi(n - 1));
        (counts && signs, format!("|P_8| = {}", row(r, "P8/count")))
    })
}

fn c10() -> Outcome {
    criterion(10, "wave operator bounds", Duration::from_secs(60), CheckId::Convergence, |r| {
        let worst = max_of(rows_with(r, "-ratio"));
        let refined = row(r, "Z2/square/plaquette/refined-threshold");
        let naive = row(r, "Z2/square/plaquette/naive-threshold");
        (
            worst <= 1.0 && (refined - 1.0 / 16.0).abs() < 1e-15,
            format!("max |U^(m)|/(16 gamma)^m = {worst:.2e}; refined 1/16 vs naive {naive:.4}"),
        )
    })
}

fn main() {
    let defaults = Tolerances::default();
    assert_eq!(defaults.identity, IDENTITY_TOL);
    assert_eq!(defaults.proportionality, PROPORTIONALITY_TOL);
    assert_eq!(defaults.slope_margin, SLOPE_MARGIN);
    assert_eq!(defaults.pair, PAIR_TOL);

    let outcomes = [c1(), c2(), c3(), c4(), c5(), c6(), c7(), c8(), c9(), c10()];
    for o in &outcomes {
        println!(
            "{} criterion {:>2} ({}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.number,
            o.title,
            o.detail
        );
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.number).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
