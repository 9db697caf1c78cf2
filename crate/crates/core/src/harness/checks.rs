use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{CheckId, ExperimentConfig, SiteKind};
use super::instance::{load_group, load_lattice, site_model, site_of, GadgetInstance};
use super::report::{CheckRecord, Comparison, Row};
use super::spectrum::{group_levels, hqd_model, max_pairwise_commutator, torus_ground_degeneracy};
use super::tolerance::Tolerances;
use crate::bloch::{
    convergence_report, count_pm, diagram_check, enumerate_pm, enumerate_valid_diagrams, g_coefficient, g_single,
    is_member, theorem1_algebraic, theorem1_spectral, DiagramRules,
};
use crate::error::Result;
use crate::lattice::LatticeKind;
use crate::linop::dense::hermitian_eigen;
use crate::linop::{lowest_eigenpairs, DENSE_LIMIT};
use crate::ribbon::{check_double_representation, check_lemma1, check_lemma2, check_lemma3, check_proposition1, model_with_all_registers};

use Comparison::{AtLeast, AtMost, Equal};

fn groups_or(cfg: &ExperimentConfig, default: &[&str]) -> Vec<String> {
    match &cfg.group {
        Some(g) => vec![g.clone()],
        None => default.iter().map(|s| s.to_string()).collect(),
    }
}

fn lattices_or(cfg: &ExperimentConfig, default: &[LatticeKind]) -> Vec<LatticeKind> {
    match cfg.lattice {
        Some(k) => vec![k],
        None => default.to_vec(),
    }
}

fn sites_or(cfg: &ExperimentConfig, default: &[SiteKind]) -> Vec<SiteKind> {
    match cfg.site {
        Some(s) => vec![s],
        None => default.to_vec(),
    }
}

pub fn run_check(id: CheckId, cfg: &ExperimentConfig) -> Result<CheckRecord> {
    let start = Instant::now();
    let tol = &cfg.tolerances;
    let rows = match id {
        CheckId::Prop1 => prop1(cfg, tol)?,
        CheckId::Lemma1 => lemma1(cfg, tol)?,
        CheckId::Lemma2 => lemma2(cfg, tol)?,
        CheckId::HqdSpectrum => hqd_spectrum_rows(cfg, tol)?,
        CheckId::Thm1Bloch => thm1_bloch(cfg, tol)?,
        CheckId::Thm1Exact => thm1_exact(cfg, tol)?,
        CheckId::Thm1pPair => thm1p_pair(cfg, tol)?,
        CheckId::Diagrams => diagrams(cfg, tol)?,
        CheckId::Combinatorics => combinatorics(),
        CheckId::Convergence => convergence(cfg)?,
    };
    Ok(CheckRecord::from_rows(id.name(), rows, start.elapsed().as_secs_f64()))
}

fn prop1(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for group in groups_or(cfg, &["Z2", "Z3", "S3"]) {
        let g = load_group(&group)?;
        for kind in lattices_or(cfg, &[LatticeKind::Square, LatticeKind::Honeycomb]) {
            let lat = load_lattice(kind, cfg.size.as_deref())?;
            for site in sites_or(cfg, &[SiteKind::Vertex, SiteKind::Plaquette]) {
                let s = site_of(site, 0);
                let model = site_model(&g, &lat, &[s])?;
                let r = check_proposition1(&model, s)?;
                rows.push(Row::test(format!("{group}/{kind}/{site}"), r.max(), AtMost, tol.identity));
            }
        }
    }
    Ok(rows)
}

fn lemma1(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for group in groups_or(cfg, &["Z2"]) {
        let g = load_group(&group)?;
        let kind = cfg.lattice.unwrap_or(LatticeKind::Square);
        let lat = load_lattice(kind, cfg.size.as_deref().or(Some("2x2")))?;
        let model = model_with_all_registers(g, lat)?;
        let r = check_lemma1(&model)?;
        rows.push(Row::test(format!("{group}/vertex-vertex"), r.claim1_max, AtMost, tol.identity));
        rows.push(Row::test(format!("{group}/plaquette-plaquette"), r.claim2_max, AtMost, tol.identity));
        rows.push(Row::test(
            format!("{group}/same-edge-min"),
            r.claim3_min,
            AtLeast,
            tol.noncommuting_min,
        ));
        rows.push(Row::info(format!("{group}/same-edge-pairs"), r.claim3_pairs as f64));
    }
    Ok(rows)
}

fn lemma2(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for group in groups_or(cfg, &["Z2", "S3"]) {
        let g = load_group(&group)?;
        for kind in lattices_or(cfg, &[LatticeKind::Square]) {
            let lat = load_lattice(kind, cfg.size.as_deref())?;
            for site in sites_or(cfg, &[SiteKind::Vertex, SiteKind::Plaquette]) {
                let s = site_of(site, 0);
                let model = site_model(&g, &lat, &[s])?;
                let r = check_lemma2(&model, s)?;
                let worst = r.generator_residual.max(r.projector_residual).max(r.prefix_residual);
                rows.push(Row::test(format!("{group}/{kind}/{site}/ribbon"), worst, AtMost, tol.identity));
                let full = check_lemma3(&model, s)?;
                rows.push(Row::test(format!("{group}/{kind}/{site}/double-register"), full.max(), AtMost, tol.identity));
            }
        }
        let d = check_double_representation(&g);
        rows.push(Row::test(format!("{group}/algebra"), d.algebra_residual, AtMost, tol.exact));
        rows.push(Row::test(format!("{group}/expectation"), d.expectation_residual, AtMost, tol.exact));
        rows.push(Row::test(format!("{group}/factorization"), d.factorization_residual, AtMost, tol.exact));
    }
    Ok(rows)
}

fn hqd_spectrum_rows(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for group in groups_or(cfg, &["Z2"]) {
        let kind = cfg.lattice.unwrap_or(LatticeKind::Square);
        let model = hqd_model(&group, kind, cfg.size.as_deref())?;
        let lat = model.lattice();
        let h = model.build_hqd()?;
        let expected_energy = -((lat.num_vertices() + lat.num_plaquettes()) as f64);
        let expected_deg = torus_ground_degeneracy(model.group());
        let pairs = lowest_eigenpairs(&h, (expected_deg + 1).min(h.dim()))?;
        let levels = group_levels(&pairs, tol.degeneracy);
        let ground = &levels[0];
        rows.push(Row::test(
            format!("{group}/ground-energy-error"),
            (ground.energy - expected_energy).abs(),
            AtMost,
            tol.degeneracy,
        ));
        rows.push(Row::test(
            format!("{group}/degeneracy"),
            if ground.complete { ground.degeneracy as f64 } else { -1.0 },
            Equal,
            expected_deg as f64,
        ));
        if h.dim() <= DENSE_LIMIT {
            let (vals, _) = hermitian_eigen(&h.to_dense());
            let dense_deg = vals.iter().filter(|&&e| (e - vals[0]).abs() <= tol.degeneracy).count();
            rows.push(Row::test(
                format!("{group}/dense-ground-energy-diff"),
                (vals[0] - ground.energy).abs(),
                AtMost,
                tol.identity,
            ));
            rows.push(Row::test(format!("{group}/dense-degeneracy"), dense_deg as f64, Equal, expected_deg as f64));
        }
        let mut projectors = Vec::new();
        for v in 0..lat.num_vertices() {
            projectors.push(model.vertex_operator(v)?);
        }
        for p in 0..lat.num_plaquettes() {
            projectors.push(model.plaquette_operator(p)?);
        }
        rows.push(Row::test(
            format!("{group}/projector-commutators"),
            max_pairwise_commutator(&projectors)?,
            AtMost,
            tol.identity,
        ));
        // random superpositions of the computed ground states are fixed by every projector
        let dim = h.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let states: Vec<Vec<num_complex::Complex64>> = pairs.states[..ground.degeneracy]
            .iter()
            .map(|s| s.to_dense(dim))
            .collect();
        let mut worst: f64 = 0.0;
        for _ in 0..4 {
            let mut psi = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            for st in &states {
                let c = num_complex::Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                for (x, y) in psi.iter_mut().zip(st) {
                    *x += c * y;
                }
            }
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
            for q in &projectors {
                let out = q.apply(&psi);
                let r = out.iter().zip(&psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(r);
            }
        }
        rows.push(Row::test(format!("{group}/ground-state-stabilized"), worst, AtMost, tol.identity));
    }
    Ok(rows)
}

/// Single-site gadgets used by the leading-order checks: plaquettes on both
/// lattices unless the config narrows it.
fn theorem_instances(cfg: &ExperimentConfig) -> Result<Vec<GadgetInstance>> {
    let mut out = Vec::new();
    for group in groups_or(cfg, &["Z2"]) {
        for kind in lattices_or(cfg, &[LatticeKind::Square, LatticeKind::Honeycomb]) {
            for site in sites_or(cfg, &[SiteKind::Plaquette]) {
                out.push(GadgetInstance::single(&group, kind, cfg.size.as_deref(), site_of(site, 0))?);
            }
        }
    }
    Ok(out)
}

fn algebraic_rows(inst: &GadgetInstance, prop_tol: f64, coeff_tol: f64, rows: &mut Vec<Row>) -> Result<()> {
    let mut series = inst.series()?;
    let r = theorem1_algebraic(&mut series, &inst.gadget, &inst.oracle()?)?;
    let l = &inst.label;
    for o in &r.lower_orders {
        rows.push(Row::test(format!("{l}/order{}", o.order), o.fit.residual, AtMost, prop_tol));
    }
    rows.push(Row::test(format!("{l}/order{}-pair", r.clock_dim), r.top_residual, AtMost, prop_tol));
    rows.push(Row::test(format!("{l}/oracle-fit"), r.coefficient_residual, AtMost, prop_tol));
    rows.push(Row::info(format!("{l}/coefficient"), r.coefficient.re));
    rows.push(Row::test(format!("{l}/coefficient-error"), r.coefficient_rel_error, AtMost, coeff_tol));
    Ok(())
}

fn thm1_bloch(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for inst in theorem_instances(cfg)? {
        algebraic_rows(&inst, tol.proportionality, tol.coefficient, &mut rows)?;
    }
    Ok(rows)
}

fn thm1_exact(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for inst in theorem_instances(cfg)? {
        let r = theorem1_spectral(&inst.gadget, &inst.predicted_unit()?, &cfg.lambda_grid)?;
        for p in &r.points {
            rows.push(Row::info(format!("{}/lambda={}", inst.label, p.lambda), p.residual).at_lambda(p.lambda));
        }
        rows.push(Row::test(
            format!("{}/slope", inst.label),
            r.slope,
            AtLeast,
            r.clock_dim as f64 + tol.slope_margin,
        ));
    }
    Ok(rows)
}

fn thm1p_pair(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let group = cfg.group.clone().unwrap_or_else(|| "Z2".into());
    let kind = cfg.lattice.unwrap_or(LatticeKind::Square);
    let inst = GadgetInstance::pair(&group, kind, cfg.size.as_deref(), 0)?;
    let pre = inst.gadget.preconditions();
    let l = &inst.label;
    let mut rows = vec![
        Row::info(format!("{l}/dim"), inst.gadget.layout().total_dim() as f64),
        Row::test(format!("{l}/ground-commutator"), pre.ground_commutator, AtMost, tol.identity),
        Row::test(format!("{l}/hop-ground-commutator"), pre.ground_hop_commutator, AtMost, tol.identity),
        Row::test(format!("{l}/hop-norm-commutator"), pre.hop_norm_commutator, AtMost, tol.identity),
        Row::test(format!("{l}/proportionality"), pre.proportionality, AtMost, tol.proportionality),
    ];
    let mut series = inst.series()?;
    let r = theorem1_algebraic(&mut series, &inst.gadget, &inst.oracle()?)?;
    for o in &r.lower_orders {
        rows.push(Row::test(format!("{l}/order{}", o.order), o.fit.residual, AtMost, tol.pair));
    }
    rows.push(Row::test(format!("{l}/order{}-pairs", r.clock_dim), r.top_residual, AtMost, tol.pair));
    rows.push(Row::test(format!("{l}/oracle-fit"), r.coefficient_residual, AtMost, tol.pair));
    rows.push(Row::info(format!("{l}/coefficient"), r.coefficient.re));
    rows.push(Row::test(
        format!("{l}/coefficient-error"),
        (r.coefficient - r.expected_coefficient).norm(),
        AtMost,
        tol.pair,
    ));
    Ok(rows)
}

fn diagrams(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let five = DiagramRules::single(5);
    let count = |m: usize| -> Result<Vec<crate::bloch::Diagram>> { enumerate_valid_diagrams(&five, m) };
    rows.push(Row::test("n5/order1", count(1)?.len() as f64, Equal, 0.0));
    rows.push(Row::test("n5/order2", count(2)?.len() as f64, Equal, 2.0));
    let four = count(4)?;
    let with = |pattern: [bool; 3]| four.iter().filter(|d| d.eps[0] == pattern).count() as f64;
    rows.push(Row::test("n5/order4", four.len() as f64, Equal, 10.0));
    rows.push(Row::test("n5/order4/eps111", with([true, true, true]), Equal, 6.0));
    rows.push(Row::test("n5/order4/eps101", with([true, false, true]), Equal, 4.0));

    let mut instances = theorem_instances(cfg)?;
    let group = cfg.group.clone().unwrap_or_else(|| "Z2".into());
    instances.push(GadgetInstance::pair(&group, LatticeKind::Square, None, 0)?);
    for inst in &instances {
        let mut series = inst.series()?;
        for d in diagram_check(&mut series, &inst.gadget, inst.gadget.clock_dim())? {
            let l = format!("{}/order{}", inst.label, d.order);
            rows.push(Row::info(format!("{l}/diagrams"), d.diagrams as f64));
            rows.push(Row::test(format!("{l}/reconstruction"), d.reconstruction_residual, AtMost, tol.proportionality));
            rows.push(Row::test(format!("{l}/non-special"), d.worst_nonspecial_residual, AtMost, tol.proportionality));
        }
    }
    Ok(rows)
}

/// Weak compositions of `m` into `m` parts, filtered by the prefix condition.
fn brute_force_pm(m: usize) -> usize {
    fn rec(m: usize, left: usize, acc: &mut Vec<usize>, count: &mut usize) {
        if acc.len() == m {
            if left == 0 && is_member(acc) {
                *count += 1;
            }
            return;
        }
        for l in 0..=left {
            acc.push(l);
            rec(m, left - l, acc, count);
            acc.pop();
        }
    }
    let mut count = 0;
    rec(m, m, &mut Vec::new(), &mut count);
    count
}

fn combinatorics() -> Vec<Row> {
    let mut rows = Vec::new();
    for m in 1..=8usize {
        let listed = enumerate_pm(m).len();
        let oracle = brute_force_pm(m);
        rows.push(Row::test(format!("P{m}/count"), listed as f64, Equal, oracle as f64));
        rows.push(Row::test(format!("P{m}/recurrence"), count_pm(m) as f64, Equal, oracle as f64));
        rows.push(Row::test(format!("P{m}/bound"), listed as f64, AtMost, 4f64.powi(m as i32)));
    }
    for n in 2..=8usize {
        let expected = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(Row::test(format!("g{n}/sign-sum"), g_single(&vec![true; n - 1]) as f64, Equal, expected));
        rows.push(Row::test(format!("g{n}/resolvent-weights"), g_coefficient(&vec![1; n - 1]), Equal, expected));
    }
    rows
}

fn convergence(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for inst in theorem_instances(cfg)? {
        let mut series = inst.series()?;
        let r = convergence_report(&mut series, &inst.gadget, cfg.order, &cfg.lambda_grid)?;
        let l = &inst.label;
        for row in &r.rows {
            rows.push(Row::test(format!("{l}/U{}-ratio", row.order), row.u_norm / row.refined_bound, AtMost, 1.0));
        }
        rows.push(Row::info(format!("{l}/gamma"), r.gamma));
        rows.push(Row::info(format!("{l}/refined-threshold"), r.refined_threshold));
        rows.push(Row::info(format!("{l}/naive-threshold"), r.naive_threshold));
    }
    Ok(rows)
}
