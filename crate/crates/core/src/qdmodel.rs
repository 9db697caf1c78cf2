//! Quantum double Hamiltonian: edge operators, gauge transformations,
//! magnetic charges, vertex/plaquette projectors and `H_QD`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QdError, Result};
use crate::groups::FiniteGroup;
use crate::lattice::{OrientedLattice, Sign, Site};
use crate::linop::dense::{re, CMatrix};
use crate::linop::{check_dim_cap, dim_cap, embed, Factor, FactorRole, Operator, SystemLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtKind {
    LPlus,
    LMinus,
    TPlus,
    TMinus,
}

/// `L+^g |z> = |gz>`, `L-^g |z> = |z g^-1>`, `T+^g = |g><g|`, `T-^g = |g^-1><g^-1|`.
pub fn single_site_lt(group: &FiniteGroup, kind: LtKind, g: usize) -> CMatrix {
    let n = group.order();
    let mut m = CMatrix::zeros(n, n);
    match kind {
        LtKind::LPlus => {
            for z in group.elements() {
                m[(group.mul(g, z), z)] = re(1.0);
            }
        }
        LtKind::LMinus => {
            for z in group.elements() {
                m[(group.mul(z, group.inv(g)), z)] = re(1.0);
            }
        }
        LtKind::TPlus => m[(g, g)] = re(1.0),
        LtKind::TMinus => {
            let gi = group.inv(g);
            m[(gi, gi)] = re(1.0);
        }
    }
    m
}

/// Right multiplication `|z> -> |z g>`; equals `L-^{g^-1}`.
pub fn right_multiplication(group: &FiniteGroup, g: usize) -> CMatrix {
    single_site_lt(group, LtKind::LMinus, group.inv(g))
}

pub fn edge_id(e: usize) -> String {
    format!("e{e}")
}

/// Auxiliary register of the site product forms (dimension |G|).
pub fn register_id(site: Site) -> String {
    format!("R{site}")
}

/// Clock register of a gadget.
pub fn clock_id(site: Site) -> String {
    format!("I{site}")
}

/// Full quantum-double representation register (dimension |G|^2).
pub fn double_register_id(site: Site) -> String {
    format!("D{site}")
}

/// A group and lattice together with a layout holding some of the lattice's
/// edges (in increasing index order) followed by optional extra factors.
#[derive(Debug, Clone)]
pub struct QdModel {
    group: Arc<FiniteGroup>,
    lattice: Arc<OrientedLattice>,
    layout: Arc<SystemLayout>,
    edges: Vec<usize>,
}

impl QdModel {
    /// Every edge of the lattice, nothing else.
    pub fn new(group: Arc<FiniteGroup>, lattice: Arc<OrientedLattice>) -> Result<Self> {
        let edges = (0..lattice.num_edges()).collect();
        Self::with_edges(group, lattice, edges, Vec::new())
    }

    /// Only the edges touching the given sites, plus extra factors.
    pub fn for_sites(
        group: Arc<FiniteGroup>,
        lattice: Arc<OrientedLattice>,
        sites: &[Site],
        extra: Vec<Factor>,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for &s in sites {
            lattice.check_site(s)?;
            edges.extend(lattice.site_edges(s));
        }
        Self::with_edges(group, lattice, edges, extra)
    }

    pub fn with_edges(
        group: Arc<FiniteGroup>,
        lattice: Arc<OrientedLattice>,
        mut edges: Vec<usize>,
        extra: Vec<Factor>,
    ) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if let Some(&e) = edges.iter().find(|&&e| e >= lattice.num_edges()) {
            return Err(QdError::invalid(format!("edge {e} is out of range")));
        }
        let n = group.order();
        check_dim_cap(
            edges.iter().map(|_| n).chain(extra.iter().map(|f| f.dim)),
            dim_cap(),
        )?;
        let mut factors: Vec<Factor> = edges
            .iter()
            .map(|&e| Factor::new(edge_id(e), n, FactorRole::Edge))
            .collect();
        factors.extend(extra);
        let layout = Arc::new(SystemLayout::new(factors)?);
        Ok(QdModel {
            group,
            lattice,
            layout,
            edges,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn lattice(&self) -> &Arc<OrientedLattice> {
        &self.lattice
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Same group, lattice and edges with extra factors appended.
    pub fn extended(&self, extra: Vec<Factor>) -> Result<Self> {
        let mut factors = self.layout.factors().to_vec();
        check_dim_cap(factors.iter().chain(extra.iter()).map(|f| f.dim), dim_cap())?;
        factors.extend(extra);
        Ok(QdModel {
            group: self.group.clone(),
            lattice: self.lattice.clone(),
            layout: Arc::new(SystemLayout::new(factors)?),
            edges: self.edges.clone(),
        })
    }

    fn require_edge(&self, e: usize) -> Result<String> {
        let id = edge_id(e);
        if !self.layout.contains(&id) {
            return Err(QdError::invalid(format!("edge {e} is not part of this model's layout")));
        }
        Ok(id)
    }

    /// A local matrix on one edge.
    pub fn on_edge(&self, e: usize, local: &CMatrix) -> Result<Operator> {
        let id = self.require_edge(e)?;
        embed(&self.layout, &[&id], local)
    }

    /// `L^g(e, v)`: `L-` if `v` is the tail of `e`, `L+` if it is the head.
    pub fn vertex_local(&self, e: usize, v: usize, g: usize) -> Result<CMatrix> {
        let edge = self.lattice.edge(e);
        let kind = if edge.v_minus == v {
            LtKind::LMinus
        } else if edge.v_plus == v {
            LtKind::LPlus
        } else {
            return Err(QdError::invalid(format!("vertex {v} is not an endpoint of edge {e}")));
        };
        Ok(single_site_lt(&self.group, kind, g))
    }

    /// `T^h(e, p)`: `T-` if `p` lies left of `e`, `T+` if it lies right.
    pub fn plaquette_local(&self, e: usize, p: usize, h: usize) -> Result<CMatrix> {
        let edge = self.lattice.edge(e);
        let kind = if edge.p_minus == p {
            LtKind::TMinus
        } else if edge.p_plus == p {
            LtKind::TPlus
        } else {
            return Err(QdError::invalid(format!("plaquette {p} does not border edge {e}")));
        };
        Ok(single_site_lt(&self.group, kind, h))
    }

    pub fn l_operator(&self, e: usize, v: usize, g: usize) -> Result<Operator> {
        self.on_edge(e, &self.vertex_local(e, v, g)?)
    }

    pub fn t_operator(&self, e: usize, p: usize, h: usize) -> Result<Operator> {
        self.on_edge(e, &self.plaquette_local(e, p, h)?)
    }

    /// `A_g(v)`: product of `L^g(e, v)` over the star of `v`.
    pub fn gauge_transformation(&self, v: usize, g: usize) -> Result<Operator> {
        self.lattice.check_site(Site::Vertex(v))?;
        let mut acc = Operator::identity(&self.layout);
        for &(e, _) in self.lattice.star(v) {
            acc = acc.mul(&self.l_operator(e, v, g)?)?;
        }
        Ok(acc)
    }

    /// Group element read off edge `e` when walking the boundary of `p`
    /// clockwise, for edge basis state `z`: the `h` with `T^h(e, p)|z> = |z>`.
    pub fn boundary_element(&self, side: Sign, z: usize) -> usize {
        match side {
            Sign::Plus => z,
            Sign::Minus => self.group.inv(z),
        }
    }

    /// `B_g(v, p)`: sum over `g_{k-1}...g_0 = g` of `prod_i T^{g_i}(e_i, p)`
    /// with the boundary walked clockwise from `v`. Built as the equivalent
    /// diagonal operator.
    pub fn magnetic_charge(&self, v: usize, p: usize, g: usize) -> Result<Operator> {
        self.lattice.check_site(Site::Plaquette(p))?;
        let walk = self.lattice.boundary_from(p, v)?;
        let positions = walk
            .iter()
            .map(|&(e, _)| self.layout.position(&self.require_edge(e)?))
            .collect::<Result<Vec<_>>>()?;
        let diag: Vec<Complex64> = (0..self.layout.total_dim())
            .map(|idx| {
                let prod = walk.iter().zip(&positions).rev().fold(0, |acc, (&(_, side), &pos)| {
                    let gi = self.boundary_element(side, self.layout.digit(idx, pos));
                    self.group.mul(acc, gi)
                });
                if prod == g {
                    re(1.0)
                } else {
                    re(0.0)
                }
            })
            .collect();
        Operator::diagonal(&self.layout, &diag)
    }

    /// `A(v) = |G|^-1 sum_g A_g(v)`
    pub fn vertex_operator(&self, v: usize) -> Result<Operator> {
        let mut acc = Operator::zero(&self.layout);
        for g in self.group.elements() {
            acc = acc.add(&self.gauge_transformation(v, g)?)?;
        }
        Ok(acc.scale_re(1.0 / self.group.order() as f64))
    }

    /// `B(p) = B_1(v, p)` with `v` the first walk vertex of the stored boundary.
    pub fn plaquette_operator(&self, p: usize) -> Result<Operator> {
        self.lattice.check_site(Site::Plaquette(p))?;
        let v = self.lattice.boundary_vertices(p)[0];
        self.magnetic_charge(v, p, self.group.identity())
    }

    pub fn site_operator(&self, site: Site) -> Result<Operator> {
        match site {
            Site::Vertex(v) => self.vertex_operator(v),
            Site::Plaquette(p) => self.plaquette_operator(p),
        }
    }

    /// `H_QD = -sum_v A(v) - sum_p B(p)` over the whole lattice.
    pub fn build_hqd(&self) -> Result<Operator> {
        let mut acc = Operator::zero(&self.layout);
        for v in 0..self.lattice.num_vertices() {
            acc = acc.sub(&self.vertex_operator(v)?)?;
        }
        for p in 0..self.lattice.num_plaquettes() {
            acc = acc.sub(&self.plaquette_operator(p)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_cyclic, make_symmetric_3};
    use crate::lattice::{build_honeycomb_torus, build_square_torus};
    use crate::linop::{lowest_eigenpairs, operator_norm, product};

    fn model(group: FiniteGroup, sites: &[Site]) -> QdModel {
        let lat = Arc::new(build_square_torus(3, 3).unwrap());
        QdModel::for_sites(Arc::new(group), lat, sites, Vec::new()).unwrap()
    }

    #[test]
    fn lt_matrices() {
        let z2 = make_cyclic(2).unwrap();
        let flip = single_site_lt(&z2, LtKind::LPlus, 1);
        assert_eq!(flip, CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]));
        let s3 = make_symmetric_3();
        for kind in [LtKind::LPlus, LtKind::LMinus] {
            assert_eq!(single_site_lt(&s3, kind, 0), CMatrix::identity(6, 6));
        }
        let t1 = single_site_lt(&s3, LtKind::TPlus, 1);
        let t2 = single_site_lt(&s3, LtKind::TPlus, 2);
        assert_eq!(&t1 * &t2, CMatrix::zeros(6, 6));
        // left and right multiplication commute
        for g in s3.elements() {
            for h in s3.elements() {
                let a = single_site_lt(&s3, LtKind::LMinus, g);
                let b = single_site_lt(&s3, LtKind::LPlus, h);
                assert_eq!(&a * &b, &b * &a);
            }
        }
    }

    #[test]
    fn gauge_transformations_form_a_representation() {
        for group in [make_cyclic(3).unwrap(), make_symmetric_3()] {
            let m = model(group.clone(), &[Site::Vertex(4)]);
            assert_eq!(m.gauge_transformation(4, 0).unwrap(), Operator::identity(m.layout()));
            for g in group.elements() {
                for h in group.elements() {
                    let lhs = m.gauge_transformation(4, g).unwrap().mul(&m.gauge_transformation(4, h).unwrap()).unwrap();
                    let rhs = m.gauge_transformation(4, group.mul(g, h)).unwrap();
                    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn z2_star_term_is_four_flips() {
        let m = model(make_cyclic(2).unwrap(), &[Site::Vertex(4)]);
        let x = single_site_lt(m.group(), LtKind::LPlus, 1);
        let flips: Vec<Operator> = m.lattice().star(4).iter().map(|&(e, _)| m.on_edge(e, &x).unwrap()).collect();
        let refs: Vec<&Operator> = flips.iter().collect();
        assert_eq!(m.gauge_transformation(4, 1).unwrap(), product(m.layout(), &refs).unwrap());
    }

    /// Literal sum over boundary tuples of products of `T` projectors.
    fn magnetic_charge_by_tuples(m: &QdModel, v: usize, p: usize, g: usize) -> Operator {
        let walk = m.lattice().boundary_from(p, v).unwrap();
        let n = m.group().order();
        let k = walk.len();
        let mut acc = Operator::zero(m.layout());
        for code in 0..n.pow(k as u32) {
            let tuple: Vec<usize> = (0..k).map(|i| (code / n.pow(i as u32)) % n).collect();
            if m.group().product(tuple.iter().rev().copied()) != g {
                continue;
            }
            let mut term = Operator::identity(m.layout());
            for (i, &(e, _)) in walk.iter().enumerate() {
                term = term.mul(&m.t_operator(e, p, tuple[i]).unwrap()).unwrap();
            }
            acc = acc.add(&term).unwrap();
        }
        acc
    }

    #[test]
    fn magnetic_charges_match_tuple_sums() {
        for group in [make_cyclic(2).unwrap(), make_symmetric_3()] {
            let m = model(group.clone(), &[Site::Plaquette(4)]);
            let verts = m.lattice().boundary_vertices(4);
            let mut total = Operator::zero(m.layout());
            for g in group.elements() {
                let b = m.magnetic_charge(verts[1], 4, g).unwrap();
                assert_eq!(b, magnetic_charge_by_tuples(&m, verts[1], 4, g));
                total = total.add(&b).unwrap();
                for h in group.elements() {
                    let bh = m.magnetic_charge(verts[1], 4, h).unwrap();
                    let prod = b.mul(&bh).unwrap();
                    let expect = if g == h { b.clone() } else { Operator::zero(m.layout()) };
                    assert!(prod.max_abs_diff(&expect).unwrap() < 1e-14);
                }
            }
            assert_eq!(total, Operator::identity(m.layout()));
        }
    }

    #[test]
    fn z2_flux_projector_is_parity() {
        let m = model(make_cyclic(2).unwrap(), &[Site::Plaquette(0)]);
        let b = m.plaquette_operator(0).unwrap();
        for idx in 0..m.layout().total_dim() {
            let parity = m.layout().digits(idx).iter().sum::<usize>() % 2;
            assert_eq!(b.get(idx, idx), re(if parity == 0 { 1.0 } else { 0.0 }));
        }
    }

    #[test]
    fn projectors_and_rotation_independence() {
        let lat = Arc::new(build_honeycomb_torus(2, 2).unwrap());
        let m = QdModel::for_sites(Arc::new(make_symmetric_3()), lat, &[Site::Plaquette(1), Site::Vertex(2)], Vec::new()).unwrap();
        let b = m.plaquette_operator(1).unwrap();
        for v in m.lattice().boundary_vertices(1) {
            assert!(m.magnetic_charge(v, 1, 0).unwrap().max_abs_diff(&b).unwrap() <= 1e-12);
        }
        let a = m.vertex_operator(2).unwrap();
        for x in [&a, &b] {
            assert!(x.mul(x).unwrap().max_abs_diff(x).unwrap() < 1e-10);
            assert!(x.max_abs_diff(&x.adjoint()).unwrap() < 1e-10);
        }
        let outside = (0..8).find(|v| !m.lattice().boundary_vertices(1).contains(v)).unwrap();
        assert!(matches!(m.magnetic_charge(outside, 1, 0), Err(QdError::InvalidArgument(_))));
    }

    #[test]
    fn z2_torus_spectrum() {
        let lat = Arc::new(build_square_torus(2, 2).unwrap());
        let m = QdModel::new(Arc::new(make_cyclic(2).unwrap()), lat).unwrap();
        assert_eq!(m.layout().total_dim(), 256);
        let a0 = m.vertex_operator(0).unwrap();
        assert!((a0.trace().re - 128.0).abs() < 1e-12);
        let h = m.build_hqd().unwrap();
        let pairs = lowest_eigenpairs(&h, 5).unwrap();
        for e in &pairs.energies[..4] {
            assert!((e + 8.0).abs() < 1e-10);
        }
        assert!(pairs.energies[4] > -8.0 + 0.5);
        assert!((operator_norm(&h) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_cap_guards_models() {
        let lat = Arc::new(build_square_torus(2, 2).unwrap());
        let r = QdModel::new(Arc::new(make_symmetric_3()), lat);
        assert!(matches!(r, Err(QdError::ResourceLimit { .. })));
    }
}
