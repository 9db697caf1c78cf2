//! Ribbon operators on closed loops, the quantum double representation on a
//! |G|^2-dimensional register, and the product forms of the vertex and
//! plaquette projectors built from two-body M operators.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QdError, Result};
use crate::groups::FiniteGroup;
use crate::lattice::Site;
use crate::linop::dense::{projector, re, tensor, CMatrix};
use crate::linop::{embed, operator_norm, Factor, FactorRole, Operator};
use crate::qdmodel::{double_register_id, edge_id, register_id, right_multiplication, LtKind, QdModel};

/// Ribbon label `(h, g)`; its index in `0..|G|^2` is `h + |G| g`, which is also
/// the basis index of `|h>|g>` in the double register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RibbonLabel {
    pub h: usize,
    pub g: usize,
}

impl RibbonLabel {
    pub fn new(h: usize, g: usize) -> Self {
        RibbonLabel { h, g }
    }

    pub fn index(&self, group: &FiniteGroup) -> usize {
        self.h + group.order() * self.g
    }

    pub fn from_index(group: &FiniteGroup, k: usize) -> Self {
        RibbonLabel {
            h: k % group.order(),
            g: k / group.order(),
        }
    }
}

pub fn all_labels(group: &FiniteGroup) -> Vec<RibbonLabel> {
    (0..group.order() * group.order())
        .map(|k| RibbonLabel::from_index(group, k))
        .collect()
}

/// Multiplication structure constant `delta_{h0 h1, h} delta_{g0, g} delta_{g1, g}`.
pub fn lambda_coeff(group: &FiniteGroup, m: RibbonLabel, n: RibbonLabel, k: RibbonLabel) -> u8 {
    (group.mul(m.h, n.h) == k.h && m.g == k.g && n.g == k.g) as u8
}

/// Comultiplication `delta_{g, g0 g1} delta_{h0, h} delta_{h1, g0^-1 h g0}`.
pub fn omega_coeff(group: &FiniteGroup, k: RibbonLabel, m: RibbonLabel, n: RibbonLabel) -> u8 {
    (k.g == group.mul(m.g, n.g) && m.h == k.h && n.h == group.conj(m.g, k.h)) as u8
}

/// Counit weights `e^(h,g) = delta_{g,1}`.
pub fn counit(label: RibbonLabel) -> f64 {
    if label.g == 0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// Triangle with base edge `edge` on the boundary of `plaquette`.
    Plaquette { edge: usize, plaquette: usize },
    /// Triangle crossing `edge` next to its endpoint `vertex`.
    Vertex { edge: usize, vertex: usize },
}

impl Triangle {
    pub fn edge(&self) -> usize {
        match *self {
            Triangle::Plaquette { edge, .. } | Triangle::Vertex { edge, .. } => edge,
        }
    }

    pub fn site(&self) -> Site {
        match *self {
            Triangle::Plaquette { plaquette, .. } => Site::Plaquette(plaquette),
            Triangle::Vertex { vertex, .. } => Site::Vertex(vertex),
        }
    }
}

/// Local |G| x |G| matrix of a triangle operator on its edge:
/// `T^{g^-1}(e, p)` for plaquette triangles, `delta_{g,1} L^h(e, v)` for vertex ones.
pub fn triangle_local(model: &QdModel, t: Triangle, label: RibbonLabel) -> Result<CMatrix> {
    let group = model.group();
    match t {
        Triangle::Plaquette { edge, plaquette } => model.plaquette_local(edge, plaquette, group.inv(label.g)),
        Triangle::Vertex { edge, vertex } => {
            let l = model.vertex_local(edge, vertex, label.h)?;
            if label.g == 0 {
                Ok(l)
            } else {
                Ok(CMatrix::zeros(group.order(), group.order()))
            }
        }
    }
}

pub fn triangle_operator(model: &QdModel, t: Triangle, label: RibbonLabel) -> Result<Operator> {
    model.on_edge(t.edge(), &triangle_local(model, t, label)?)
}

/// All `|G|^2` operators `F^k(t)` of one ribbon, indexed by label index.
#[derive(Debug, Clone)]
pub struct RibbonOperators {
    pub ops: Vec<Operator>,
}

impl RibbonOperators {
    pub fn triangle(model: &QdModel, t: Triangle) -> Result<Self> {
        let ops = all_labels(model.group())
            .into_iter()
            .map(|k| triangle_operator(model, t, k))
            .collect::<Result<_>>()?;
        Ok(RibbonOperators { ops })
    }

    pub fn get(&self, group: &FiniteGroup, label: RibbonLabel) -> &Operator {
        &self.ops[label.index(group)]
    }

    /// `F^k(t0 t1) = sum_{m,n} Omega^k_{mn} F^m(t0) F^n(t1)`, summing only the
    /// nonzero structure constants.
    pub fn concat(group: &FiniteGroup, first: &Self, second: &Self) -> Result<Self> {
        let labels = all_labels(group);
        let mut ops = Vec::with_capacity(labels.len());
        for k in &labels {
            let layout = first.ops[0].layout();
            let mut acc = Operator::zero(layout);
            for m in &labels {
                for n in &labels {
                    if omega_coeff(group, *k, *m, *n) == 0 {
                        continue;
                    }
                    let a = &first.ops[m.index(group)];
                    let b = &second.ops[n.index(group)];
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
            }
            ops.push(acc);
        }
        Ok(RibbonOperators { ops })
    }
}

/// Triangles of the closed clockwise ribbon around `site`, starting at `start_edge`.
pub fn closed_ribbon_triangles(model: &QdModel, site: Site, start_edge: usize) -> Result<Vec<Triangle>> {
    let lattice = model.lattice();
    lattice.check_site(site)?;
    let edges = lattice.site_edges(site);
    let start = edges
        .iter()
        .position(|&e| e == start_edge)
        .ok_or_else(|| QdError::invalid(format!("edge {start_edge} is not incident to {site}")))?;
    let mut rotated = edges;
    rotated.rotate_left(start);
    Ok(rotated
        .into_iter()
        .map(|edge| match site {
            Site::Vertex(vertex) => Triangle::Vertex { edge, vertex },
            Site::Plaquette(plaquette) => Triangle::Plaquette { edge, plaquette },
        })
        .collect())
}

/// All ribbon operators of the closed ribbon around `site`, by left-to-right
/// Omega expansion over its triangles.
pub fn closed_ribbon(model: &QdModel, site: Site, start_edge: usize) -> Result<RibbonOperators> {
    let triangles = closed_ribbon_triangles(model, site, start_edge)?;
    let group = model.group();
    let mut acc = RibbonOperators::triangle(model, triangles[0])?;
    for &t in &triangles[1..] {
        acc = RibbonOperators::concat(group, &acc, &RibbonOperators::triangle(model, t)?)?;
    }
    Ok(acc)
}

pub fn closed_ribbon_operator(model: &QdModel, site: Site, start_edge: usize, label: RibbonLabel) -> Result<Operator> {
    let all = closed_ribbon(model, site, start_edge)?;
    Ok(all.ops[label.index(model.group())].clone())
}

/// `D_j` on the double register from `D_j|k> = sum_m Omega^k_{mj} |m>`.
pub fn qd_generator(group: &FiniteGroup, j: RibbonLabel) -> CMatrix {
    let labels = all_labels(group);
    let d = labels.len();
    let mut m = CMatrix::zeros(d, d);
    for k in &labels {
        for mm in &labels {
            if omega_coeff(group, *k, *mm, j) == 1 {
                m[(mm.index(group), k.index(group))] += re(1.0);
            }
        }
    }
    m
}

/// `C^-1 (|h1><h1| (x) I) C (I (x) L-^{g1})` with `C|(h,g)> = |(g^-1 h g, g)>`.
pub fn qd_generator_factored(group: &FiniteGroup, j: RibbonLabel) -> CMatrix {
    let n = group.order();
    let labels = all_labels(group);
    let d = labels.len();
    let mut c = CMatrix::zeros(d, d);
    for k in &labels {
        let image = RibbonLabel::new(group.conj(k.g, k.h), k.g);
        c[(image.index(group), k.index(group))] = re(1.0);
    }
    let c_inv = c.adjoint();
    let ident = CMatrix::identity(n, n);
    let proj_h = tensor(&[&projector(n, j.h), &ident]);
    let shift = tensor(&[&ident, &crate::qdmodel::single_site_lt(group, LtKind::LMinus, j.g)]);
    c_inv * proj_h * c * shift
}

/// `|Psi> = |G|^-1/2 sum_h |(h,1)>` on the double register.
pub fn double_register_state(group: &FiniteGroup) -> Vec<Complex64> {
    let n = group.order();
    let amp = 1.0 / (n as f64).sqrt();
    let mut psi = vec![re(0.0); n * n];
    for h in group.elements() {
        psi[RibbonLabel::new(h, 0).index(group)] = re(amp);
    }
    psi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Edge coupled to the |G|^2-dimensional double register.
    Full,
    /// Edge coupled to a |G|-dimensional register.
    Reduced,
}

pub fn register_factor(group: &FiniteGroup, site: Site, repr: Representation) -> Factor {
    match repr {
        Representation::Full => Factor::new(double_register_id(site), group.order().pow(2), FactorRole::Register),
        Representation::Reduced => Factor::new(register_id(site), group.order(), FactorRole::Register),
    }
}

/// Register state the M-product is sandwiched in: the double-register vector,
/// the uniform superposition for vertices, or `|1>` for plaquettes.
pub fn register_state(group: &FiniteGroup, site: Site, repr: Representation) -> Vec<Complex64> {
    let n = group.order();
    match (repr, site) {
        (Representation::Full, _) => double_register_state(group),
        (Representation::Reduced, Site::Vertex(_)) => vec![re(1.0 / (n as f64).sqrt()); n],
        (Representation::Reduced, Site::Plaquette(_)) => {
            let mut v = vec![re(0.0); n];
            v[group.identity()] = re(1.0);
            v
        }
    }
}

/// Local matrix of `M(t)` on (edge, register), edge digit fastest.
///
/// Full: `sum_n F^n(t) (x) D_n`. Reduced vertex: `sum_g L^g(e,v) (x) |g><g|`.
/// Reduced plaquette: `sum_g T^g(e,p) (x) R^g` with `R^g|z> = |z g>`, which is
/// what the double-register form reduces to on its second factor.
pub fn m_local(model: &QdModel, t: Triangle, repr: Representation) -> Result<CMatrix> {
    let group = model.group();
    let n = group.order();
    match repr {
        Representation::Full => {
            let d = n * n;
            let mut acc = CMatrix::zeros(n * d, n * d);
            for label in all_labels(group) {
                let f = triangle_local(model, t, label)?;
                if f.iter().all(|z| *z == re(0.0)) {
                    continue;
                }
                acc += tensor(&[&f, &qd_generator(group, label)]);
            }
            Ok(acc)
        }
        Representation::Reduced => {
            let mut acc = CMatrix::zeros(n * n, n * n);
            for g in group.elements() {
                let term = match t {
                    Triangle::Vertex { edge, vertex } => {
                        tensor(&[&model.vertex_local(edge, vertex, g)?, &projector(n, g)])
                    }
                    Triangle::Plaquette { edge, plaquette } => tensor(&[
                        &model.plaquette_local(edge, plaquette, g)?,
                        &right_multiplication(group, g),
                    ]),
                };
                acc += term;
            }
            Ok(acc)
        }
    }
}

/// `M(t)` embedded in a model whose layout holds the site's register.
pub fn m_operator(model: &QdModel, t: Triangle, repr: Representation) -> Result<Operator> {
    let reg = register_factor(model.group(), t.site(), repr).id;
    let eid = edge_id(t.edge());
    embed(model.layout(), &[&eid, &reg], &m_local(model, t, repr)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `M_0 M_1 ... M_{k-1}`
    Forward,
    /// `M_{k-1}^dagger ... M_0^dagger`
    Adjoint,
}

/// Edges-only model for `site` plus one with the site's register appended.
fn site_models(model: &QdModel, site: Site, repr: Representation) -> Result<(QdModel, QdModel)> {
    let base = QdModel::for_sites(model.group().clone(), model.lattice().clone(), &[site], Vec::new())?;
    let ext = base.extended(vec![register_factor(model.group(), site, repr)])?;
    Ok((base, ext))
}

/// `<Psi| M_0 ... M_{k-1} |Psi>` (or the adjoint-ordered product) around a
/// site, as an operator on the site's edges.
pub fn sandwiched_product(model: &QdModel, site: Site, repr: Representation, order: Ordering) -> Result<Operator> {
    let (_, ext) = site_models(model, site, repr)?;
    let start = model.lattice().site_edges(site)[0];
    let triangles = closed_ribbon_triangles(&ext, site, start)?;
    let ms = triangles
        .iter()
        .map(|&t| m_operator(&ext, t, repr))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Operator::identity(ext.layout());
    match order {
        Ordering::Forward => {
            for m in &ms {
                acc = acc.mul(m)?;
            }
        }
        Ordering::Adjoint => {
            for m in ms.iter().rev() {
                acc = acc.mul(&m.adjoint())?;
            }
        }
    }
    let reg = register_factor(model.group(), site, repr).id;
    acc.partial_expectation(&reg, &register_state(model.group(), site, repr))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProductResidual {
    pub forward: f64,
    pub adjoint: f64,
}

impl ProductResidual {
    pub fn max(&self) -> f64 {
        self.forward.max(self.adjoint)
    }
}

fn product_residual(model: &QdModel, site: Site, repr: Representation) -> Result<ProductResidual> {
    let (base, _) = site_models(model, site, repr)?;
    let target = base.site_operator(site)?;
    let mut out = [0.0; 2];
    for (slot, order) in [Ordering::Forward, Ordering::Adjoint].into_iter().enumerate() {
        let prod = sandwiched_product(model, site, repr, order)?;
        out[slot] = operator_norm(&target.sub(&prod)?);
    }
    Ok(ProductResidual {
        forward: out[0],
        adjoint: out[1],
    })
}

/// Spectral-norm residual of the reduced-register product form of `A(v)` or `B(p)`.
pub fn check_proposition1(model: &QdModel, site: Site) -> Result<ProductResidual> {
    product_residual(model, site, Representation::Reduced)
}

/// Same residual with the full double-register representation.
pub fn check_lemma3(model: &QdModel, site: Site) -> Result<ProductResidual> {
    product_residual(model, site, Representation::Full)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedRibbonReport {
    /// max over labels of `|A_g(v) - F^(g,1)(t_v)|` or `|B_g - F^(h,g^-1)(t_p)|`
    pub generator_residual: f64,
    /// `|A(v) - |G|^-1 sum_k e^k F^k|` or the plaquette analogue, also against `F^(h,1)`
    pub projector_residual: f64,
    /// vertex ribbons: prefix identity `F^(h,g)(t_0..t_i) = delta_{g,1} prod L^h`
    pub prefix_residual: f64,
}

/// Compares closed-ribbon operators with the gauge and flux operators at a site.
pub fn check_lemma2(model: &QdModel, site: Site) -> Result<ClosedRibbonReport> {
    let group = model.group();
    let base = QdModel::for_sites(group.clone(), model.lattice().clone(), &[site], Vec::new())?;
    let start = base.lattice().site_edges(site)[0];
    let ribbon = closed_ribbon(&base, site, start)?;
    let labels = all_labels(group);
    let mut generator_residual: f64 = 0.0;
    let mut prefix_residual: f64 = 0.0;
    let mut weighted = Operator::zero(base.layout());
    for k in &labels {
        let w = counit(*k);
        if w != 0.0 {
            weighted = weighted.add(&ribbon.ops[k.index(group)].scale_re(w))?;
        }
    }
    weighted = weighted.scale_re(1.0 / group.order() as f64);
    let projector_op = base.site_operator(site)?;
    let mut projector_residual = operator_norm(&projector_op.sub(&weighted)?);
    match site {
        Site::Vertex(v) => {
            for g in group.elements() {
                let f = &ribbon.ops[RibbonLabel::new(g, 0).index(group)];
                generator_residual = generator_residual.max(operator_norm(&base.gauge_transformation(v, g)?.sub(f)?));
            }
            let triangles = closed_ribbon_triangles(&base, site, start)?;
            let mut acc = RibbonOperators::triangle(&base, triangles[0])?;
            for i in 1..triangles.len() {
                acc = RibbonOperators::concat(group, &acc, &RibbonOperators::triangle(&base, triangles[i])?)?;
                for k in &labels {
                    let expected = if k.g == 0 {
                        let mut prod = Operator::identity(base.layout());
                        for t in &triangles[..=i] {
                            prod = prod.mul(&base.l_operator(t.edge(), v, k.h)?)?;
                        }
                        prod
                    } else {
                        Operator::zero(base.layout())
                    };
                    prefix_residual = prefix_residual.max(operator_norm(&expected.sub(&acc.ops[k.index(group)])?));
                }
            }
        }
        Site::Plaquette(p) => {
            let v = base.lattice().boundary_vertices(p)[0];
            for g in group.elements() {
                let b = base.magnetic_charge(v, p, g)?;
                for h in group.elements() {
                    let f = &ribbon.ops[RibbonLabel::new(h, group.inv(g)).index(group)];
                    generator_residual = generator_residual.max(operator_norm(&b.sub(f)?));
                }
            }
            for h in group.elements() {
                let f = &ribbon.ops[RibbonLabel::new(h, 0).index(group)];
                projector_residual = projector_residual.max(operator_norm(&projector_op.sub(f)?));
            }
        }
    }
    Ok(ClosedRibbonReport {
        generator_residual,
        projector_residual,
        prefix_residual,
    })
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleRepReport {
    /// `|D_m D_n - sum_k Omega^k_{mn} D_k|` maximized over label pairs
    pub algebra_residual: f64,
    /// `|<Psi|D_j|Psi> - e^j/|G||` maximized over labels
    pub expectation_residual: f64,
    /// entrywise difference between the Omega-sum and factored constructions
    pub factorization_residual: f64,
}

/// Identities of the quantum double representation on the double register.
pub fn check_double_representation(group: &FiniteGroup) -> DoubleRepReport {
    let labels = all_labels(group);
    let gens: Vec<CMatrix> = labels.iter().map(|&j| qd_generator(group, j)).collect();
    let psi = nalgebra::DVector::from_vec(double_register_state(group));
    let mut algebra_residual: f64 = 0.0;
    let mut expectation_residual: f64 = 0.0;
    let mut factorization_residual: f64 = 0.0;
    for m in &labels {
        let dm = &gens[m.index(group)];
        for n in &labels {
            let prod = dm * &gens[n.index(group)];
            let mut expected = CMatrix::zeros(prod.nrows(), prod.ncols());
            for k in &labels {
                if omega_coeff(group, *k, *m, *n) == 1 {
                    expected += &gens[k.index(group)];
                }
            }
            algebra_residual = algebra_residual.max(max_entry(&(prod - expected)));
        }
        let ev = (psi.adjoint() * dm * &psi)[(0, 0)];
        expectation_residual = expectation_residual.max((ev - re(counit(*m) / group.order() as f64)).norm());
        factorization_residual = factorization_residual.max(max_entry(&(dm - qd_generator_factored(group, *m))));
    }
    DoubleRepReport {
        algebra_residual,
        expectation_residual,
        factorization_residual,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub claim1_pairs: usize,
    /// largest Frobenius norm (an upper bound on the spectral norm) over claim-1 commutators
    pub claim1_max: f64,
    pub claim2_pairs: usize,
    pub claim2_max: f64,
    pub claim3_pairs: usize,
    /// smallest spectral norm over same-edge vertex/plaquette commutators
    pub claim3_min: f64,
}

/// Model over every edge with one reduced register per vertex and plaquette.
pub fn model_with_all_registers(group: Arc<FiniteGroup>, lattice: Arc<crate::lattice::OrientedLattice>) -> Result<QdModel> {
    let mut extra = Vec::new();
    for v in 0..lattice.num_vertices() {
        extra.push(register_factor(&group, Site::Vertex(v), Representation::Reduced));
    }
    for p in 0..lattice.num_plaquettes() {
        extra.push(register_factor(&group, Site::Plaquette(p), Representation::Reduced));
    }
    let edges = (0..lattice.num_edges()).collect();
    QdModel::with_edges(group, lattice, edges, extra)
}

/// Commutation structure of all M operators on a model holding every register.
pub fn check_lemma1(model: &QdModel) -> Result<Lemma1Report> {
    let lattice = model.lattice();
    let mut vertex_ms: Vec<(usize, Operator)> = Vec::new();
    for v in 0..lattice.num_vertices() {
        for &(e, _) in lattice.star(v) {
            vertex_ms.push((e, m_operator(model, Triangle::Vertex { edge: e, vertex: v }, Representation::Reduced)?));
        }
    }
    let mut plaquette_ms: Vec<(usize, Operator)> = Vec::new();
    for p in 0..lattice.num_plaquettes() {
        for &(e, _) in lattice.boundary(p) {
            plaquette_ms.push((e, m_operator(model, Triangle::Plaquette { edge: e, plaquette: p }, Representation::Reduced)?));
        }
    }
    let both = |a: &Operator, b: &Operator| -> Result<f64> {
        let c1 = a.commutator(b)?.frobenius_norm();
        let c2 = a.commutator(&b.adjoint())?.frobenius_norm();
        Ok(c1.max(c2))
    };
    let mut report = Lemma1Report {
        claim1_pairs: 0,
        claim1_max: 0.0,
        claim2_pairs: 0,
        claim2_max: 0.0,
        claim3_pairs: 0,
        claim3_min: f64::INFINITY,
    };
    for family in [&vertex_ms, &plaquette_ms] {
        for i in 0..family.len() {
            for j in i..family.len() {
                report.claim1_max = report.claim1_max.max(both(&family[i].1, &family[j].1)?);
                report.claim1_pairs += 1;
            }
        }
    }
    for (ev, mv) in &vertex_ms {
        for (ep, mp) in &plaquette_ms {
            if ev == ep {
                let c = operator_norm(&mv.commutator(mp)?);
                report.claim3_min = report.claim3_min.min(c);
                report.claim3_pairs += 1;
            } else {
                report.claim2_max = report.claim2_max.max(both(mv, mp)?);
                report.claim2_pairs += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_cyclic, make_symmetric_3};
    use crate::lattice::{build_honeycomb_torus, build_square_torus};
    use crate::linop::dense::identity;

    fn square_model(group: FiniteGroup, site: Site) -> QdModel {
        let lat = Arc::new(build_square_torus(3, 3).unwrap());
        QdModel::for_sites(Arc::new(group), lat, &[site], Vec::new()).unwrap()
    }

    #[test]
    fn structure_constants() {
        let z2 = make_cyclic(2).unwrap();
        let l = RibbonLabel::new;
        assert_eq!(lambda_coeff(&z2, l(1, 0), l(1, 0), l(0, 0)), 1);
        assert_eq!(lambda_coeff(&z2, l(1, 0), l(1, 1), l(0, 0)), 0);
        // abelian: conjugation trivial
        let z3 = make_cyclic(3).unwrap();
        for k in all_labels(&z3) {
            for m in all_labels(&z3) {
                for n in all_labels(&z3) {
                    let expect = (k.g == z3.mul(m.g, n.g) && m.h == k.h && n.h == k.h) as u8;
                    assert_eq!(omega_coeff(&z3, k, m, n), expect);
                }
            }
        }
        // counit identity sum_m e^m Omega^k_{mj} = delta^k_j, both sides
        let s3 = make_symmetric_3();
        for k in all_labels(&s3) {
            for j in all_labels(&s3) {
                let left: f64 = all_labels(&s3).iter().map(|&m| counit(m) * omega_coeff(&s3, k, m, j) as f64).sum();
                let right: f64 = all_labels(&s3).iter().map(|&m| counit(m) * omega_coeff(&s3, k, j, m) as f64).sum();
                assert_eq!(left, (k == j) as u8 as f64);
                assert_eq!(right, (k == j) as u8 as f64);
            }
        }
        // non-central h in S3: h1 must be the conjugate
        let h = (0..6).find(|&a| s3.label(a) == "(12)").unwrap();
        for g0 in s3.elements() {
            for h1 in s3.elements() {
                let c = omega_coeff(&s3, l(h, g0), l(h, g0), l(h1, 0));
                assert_eq!(c == 1, h1 == s3.conj(g0, h));
            }
        }
    }

    #[test]
    fn triangle_algebra_matches_lambda() {
        for group in [make_cyclic(2).unwrap(), make_symmetric_3()] {
            let m = square_model(group.clone(), Site::Plaquette(4));
            let e = m.lattice().boundary(4)[0].0;
            let v = m.lattice().edge(e).v_minus;
            let mv = QdModel::for_sites(m.group().clone(), m.lattice().clone(), &[Site::Vertex(v)], Vec::new()).unwrap();
            let cases = [
                (m.clone(), Triangle::Plaquette { edge: e, plaquette: 4 }),
                (mv, Triangle::Vertex { edge: e, vertex: v }),
            ];
            for (model, t) in cases {
                let labels = all_labels(&group);
                for a in &labels {
                    for b in &labels {
                        let lhs = triangle_operator(&model, t, *a).unwrap().mul(&triangle_operator(&model, t, *b).unwrap()).unwrap();
                        let mut rhs = Operator::zero(model.layout());
                        for k in &labels {
                            if lambda_coeff(&group, *a, *b, *k) == 1 {
                                rhs = rhs.add(&triangle_operator(&model, t, *k).unwrap()).unwrap();
                            }
                        }
                        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn triangle_examples() {
        let z2 = make_cyclic(2).unwrap();
        let m = square_model(z2.clone(), Site::Vertex(4));
        let (e, _) = m.lattice().star(4)[0];
        let t = Triangle::Vertex { edge: e, vertex: 4 };
        assert!(triangle_operator(&m, t, RibbonLabel::new(1, 1)).unwrap().is_zero());
        let flip = triangle_local(&m, t, RibbonLabel::new(1, 0)).unwrap();
        assert_eq!(flip, crate::qdmodel::single_site_lt(&z2, LtKind::LPlus, 1));
        let mp = square_model(make_symmetric_3(), Site::Plaquette(4));
        let tp = Triangle::Plaquette { edge: mp.lattice().boundary(4)[2].0, plaquette: 4 };
        for g in 0..6 {
            let base = triangle_operator(&mp, tp, RibbonLabel::new(0, g)).unwrap();
            for h in 1..6 {
                assert_eq!(triangle_operator(&mp, tp, RibbonLabel::new(h, g)).unwrap(), base);
            }
        }
        let bad = Triangle::Vertex { edge: e, vertex: 0 };
        assert!(triangle_operator(&m, bad, RibbonLabel::new(0, 0)).is_err());
    }

    #[test]
    fn omega_expansion_is_associative() {
        let group = make_symmetric_3();
        let m = square_model(group.clone(), Site::Plaquette(4));
        let ts = closed_ribbon_triangles(&m, Site::Plaquette(4), m.lattice().boundary(4)[0].0).unwrap();
        let f: Vec<RibbonOperators> = ts[..3].iter().map(|&t| RibbonOperators::triangle(&m, t).unwrap()).collect();
        let left = RibbonOperators::concat(&group, &RibbonOperators::concat(&group, &f[0], &f[1]).unwrap(), &f[2]).unwrap();
        let right = RibbonOperators::concat(&group, &f[0], &RibbonOperators::concat(&group, &f[1], &f[2]).unwrap()).unwrap();
        for (a, b) in left.ops.iter().zip(&right.ops) {
            assert!(a.max_abs_diff(b).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn closed_ribbons_reproduce_site_operators() {
        for group in [make_cyclic(2).unwrap(), make_cyclic(3).unwrap(), make_symmetric_3()] {
            for site in [Site::Vertex(4), Site::Plaquette(4)] {
                let m = square_model(group.clone(), site);
                let r = check_lemma2(&m, site).unwrap();
                assert!(r.generator_residual <= 1e-10, "{} {site}: {r:?}", group.name());
                assert!(r.projector_residual <= 1e-10, "{} {site}: {r:?}", group.name());
                assert!(r.prefix_residual <= 1e-10, "{} {site}: {r:?}", group.name());
            }
        }
    }

    #[test]
    fn vertex_ribbon_start_does_not_matter() {
        let group = make_symmetric_3();
        let m = square_model(group.clone(), Site::Vertex(4));
        let a = m.vertex_operator(4).unwrap();
        for &(e, _) in m.lattice().star(4) {
            let ops = closed_ribbon(&m, Site::Vertex(4), e).unwrap();
            let mut avg = Operator::zero(m.layout());
            for h in group.elements() {
                avg = avg.add(&ops.ops[RibbonLabel::new(h, 0).index(&group)]).unwrap();
            }
            assert!(avg.scale_re(1.0 / 6.0).max_abs_diff(&a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn double_representation_identities() {
        for group in [make_cyclic(3).unwrap(), make_symmetric_3()] {
            let r = check_double_representation(&group);
            assert!(r.algebra_residual <= 1e-12, "{r:?}");
            assert!(r.expectation_residual <= 1e-12, "{r:?}");
            assert!(r.factorization_residual <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn m_operators_are_unitary() {
        for group in [make_cyclic(2).unwrap(), make_symmetric_3()] {
            let g = Arc::new(group.clone());
            // the double register on an S3 hexagon would exceed the dimension cap
            let cases = [
                (Arc::new(build_honeycomb_torus(2, 2).unwrap()), Representation::Reduced),
                (Arc::new(build_square_torus(3, 3).unwrap()), Representation::Full),
            ];
            for (lat, repr) in cases {
                for site in [Site::Vertex(0), Site::Plaquette(0)] {
                    let model = QdModel::for_sites(g.clone(), lat.clone(), &[site], vec![register_factor(&group, site, repr)]).unwrap();
                    for t in closed_ribbon_triangles(&model, site, lat.site_edges(site)[0]).unwrap() {
                        let m = m_operator(&model, t, repr).unwrap();
                        let id = Operator::identity(model.layout());
                        assert!(m.adjoint().mul(&m).unwrap().max_abs_diff(&id).unwrap() <= 1e-10);
                        assert!((operator_norm(&m) - 1.0).abs() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_vertex_m_for_z2_is_controlled_flip() {
        let z2 = make_cyclic(2).unwrap();
        let m = square_model(z2.clone(), Site::Vertex(4));
        let (e, _) = m.lattice().star(4)[0];
        let local = m_local(&m, Triangle::Vertex { edge: e, vertex: 4 }, Representation::Reduced).unwrap();
        let flip = crate::qdmodel::single_site_lt(&z2, LtKind::LPlus, 1);
        let expected = tensor(&[&identity(2), &projector(2, 0)]) + tensor(&[&flip, &projector(2, 1)]);
        assert_eq!(local, expected);
    }

    #[test]
    fn product_forms_reproduce_projectors() {
        for group in [make_cyclic(2).unwrap(), make_symmetric_3()] {
            for lat in [build_square_torus(3, 3).unwrap(), build_honeycomb_torus(2, 2).unwrap()] {
                let lat = Arc::new(lat);
                let m = QdModel::for_sites(Arc::new(group.clone()), lat.clone(), &[Site::Vertex(1)], Vec::new()).unwrap();
                for site in [Site::Vertex(1), Site::Plaquette(1)] {
                    let r = check_proposition1(&m, site).unwrap();
                    assert!(r.max() <= 1e-12, "{} {site}: {r:?}", group.name());
                }
            }
        }
    }

    #[test]
    fn full_and_reduced_products_agree() {
        let group = make_symmetric_3();
        let lat = Arc::new(build_square_torus(3, 3).unwrap());
        let m = QdModel::for_sites(Arc::new(group), lat, &[Site::Vertex(4)], Vec::new()).unwrap();
        for site in [Site::Vertex(4), Site::Plaquette(4)] {
            let full = sandwiched_product(&m, site, Representation::Full, Ordering::Forward).unwrap();
            let reduced = sandwiched_product(&m, site, Representation::Reduced, Ordering::Forward).unwrap();
            assert!(full.max_abs_diff(&reduced).unwrap() <= 1e-12);
            let r = check_lemma3(&m, site).unwrap();
            assert!(r.max() <= 1e-10, "{site}: {r:?}");
        }
    }

    /// Left multiplication on the plaquette register reads the flux in the
    /// opposite order; for S3 the resulting operator differs from B(p).
    #[test]
    fn left_multiplied_plaquette_register_misorders_flux() {
        let run = |group: FiniteGroup| -> f64 {
            let lat = Arc::new(build_square_torus(3, 3).unwrap());
            let site = Site::Plaquette(4);
            let g = Arc::new(group);
            let model = QdModel::for_sites(g.clone(), lat.clone(), &[site], vec![register_factor(&g, site, Representation::Reduced)]).unwrap();
            let reg = register_id(site);
            let n = g.order();
            let mut prod = Operator::identity(model.layout());
            for &(e, _) in lat.boundary(4) {
                let mut local = CMatrix::zeros(n * n, n * n);
                for x in g.elements() {
                    local += tensor(&[
                        &model.plaquette_local(e, 4, x).unwrap(),
                        &crate::qdmodel::single_site_lt(&g, LtKind::LPlus, x),
                    ]);
                }
                prod = prod.mul(&embed(model.layout(), &[&edge_id(e), &reg], &local).unwrap()).unwrap();
            }
            let reduced = prod.partial_expectation(&reg, &register_state(&g, site, Representation::Reduced)).unwrap();
            let base = QdModel::for_sites(g, lat, &[site], Vec::new()).unwrap();
            operator_norm(&base.plaquette_operator(4).unwrap().sub(&reduced).unwrap())
        };
        assert!(run(make_cyclic(3).unwrap()) <= 1e-12);
        assert!(run(make_symmetric_3()) > 0.5);
    }

    #[test]
    fn lemma1_on_small_torus() {
        let lat = Arc::new(build_square_torus(2, 2).unwrap());
        let model = model_with_all_registers(Arc::new(make_cyclic(2).unwrap()), lat).unwrap();
        assert_eq!(model.layout().total_dim(), 1 << 16);
        let r = check_lemma1(&model).unwrap();
        assert!(r.claim1_max <= 1e-10, "{r:?}");
        assert!(r.claim2_max <= 1e-10, "{r:?}");
        assert!(r.claim3_min > 1e-6, "{r:?}");
        assert_eq!(r.claim3_pairs, 8 * 4);
    }
}
