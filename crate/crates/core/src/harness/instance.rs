use std::sync::Arc;

use serde::Serialize;

use super::config::{default_size, GadgetConfig, GadgetMode, SiteKind};
use crate::bloch::BlochSeries;
use crate::error::{QdError, Result};
use crate::gadget::{assembly_sites, build_site_gadgets, site_projector_target, AssemblyMode, Gadget};
use crate::groups::{group_by_name, FiniteGroup};
use crate::lattice::{build_torus, parse_size, LatticeKind, OrientedLattice, Site};
use crate::linop::{check_dim_cap, dim_cap, operator_norm, Operator};
use crate::qdmodel::QdModel;

pub fn load_group(name: &str) -> Result<Arc<FiniteGroup>> {
    Ok(Arc::new(group_by_name(name)?))
}

pub fn load_lattice(kind: LatticeKind, size: Option<&str>) -> Result<Arc<OrientedLattice>> {
    let (w, h) = match size {
        Some(s) => parse_size(s)?,
        None => default_size(kind),
    };
    Ok(Arc::new(build_torus(kind, w, h)?))
}

/// Site model over only the edges of `sites`, so that large groups stay
/// under the dimension cap.
pub fn site_model(group: &Arc<FiniteGroup>, lattice: &Arc<OrientedLattice>, sites: &[Site]) -> Result<QdModel> {
    QdModel::for_sites(group.clone(), lattice.clone(), sites, Vec::new())
}

pub fn site_of(kind: SiteKind, index: usize) -> Site {
    match kind {
        SiteKind::Vertex => Site::Vertex(index),
        SiteKind::Plaquette => Site::Plaquette(index),
    }
}

/// A gadget together with the lattice data needed for its oracles.
#[derive(Debug, Clone)]
pub struct GadgetInstance {
    pub label: String,
    pub model: QdModel,
    pub sites: Vec<Site>,
    pub gadget: Gadget,
}

impl GadgetInstance {
    pub fn new(
        label: impl Into<String>,
        group: &Arc<FiniteGroup>,
        lattice: &Arc<OrientedLattice>,
        sites: Vec<Site>,
        coupled: bool,
    ) -> Result<Self> {
        let first = *sites.first().ok_or_else(|| QdError::invalid("no sites selected"))?;
        let model = site_model(group, lattice, &[first])?;
        let gadget = build_site_gadgets(&model, &sites, coupled)?;
        Ok(GadgetInstance {
            label: label.into(),
            model,
            sites,
            gadget,
        })
    }

    pub fn single(group: &str, kind: LatticeKind, size: Option<&str>, site: Site) -> Result<Self> {
        let g = load_group(group)?;
        let lat = load_lattice(kind, size)?;
        lat.check_site(site)?;
        let what = match site {
            Site::Vertex(_) => "vertex",
            Site::Plaquette(_) => "plaquette",
        };
        Self::new(format!("{group}/{kind}/{what}"), &g, &lat, vec![site], false)
    }

    /// Plaquette `p` and the first vertex of its boundary.
    pub fn pair(group: &str, kind: LatticeKind, size: Option<&str>, p: usize) -> Result<Self> {
        let g = load_group(group)?;
        let lat = load_lattice(kind, size)?;
        lat.check_site(Site::Plaquette(p))?;
        let v = lat.boundary_vertices(p)[0];
        Self::new(
            format!("{group}/{kind}/pair"),
            &g,
            &lat,
            vec![Site::Vertex(v), Site::Plaquette(p)],
            true,
        )
    }

    pub fn assembly(group: &str, kind: LatticeKind, size: Option<&str>, mode: AssemblyMode) -> Result<Self> {
        let g = load_group(group)?;
        let lat = load_lattice(kind, size)?;
        let sites = assembly_sites(&lat, mode);
        let n = crate::gadget::clock_dim_for(&lat);
        let dims = std::iter::repeat(g.order())
            .take(lat.num_edges())
            .chain(sites.iter().flat_map(|_| [g.order(), n]));
        check_dim_cap(dims, dim_cap())?;
        Self::new(format!("{}/{kind}/{mode}", g.name()), &g, &lat, sites, mode == AssemblyMode::Full)
    }

    pub fn from_config(cfg: &GadgetConfig) -> Result<Self> {
        let size = cfg.size.as_deref();
        let i = cfg.site_index;
        match cfg.mode {
            GadgetMode::Vertex => Self::single(&cfg.group, cfg.lattice, size, Site::Vertex(i)),
            GadgetMode::Plaquette => Self::single(&cfg.group, cfg.lattice, size, Site::Plaquette(i)),
            GadgetMode::Pair => Self::pair(&cfg.group, cfg.lattice, size, i),
            GadgetMode::VerticesOnly => Self::assembly(&cfg.group, cfg.lattice, size, AssemblyMode::VerticesOnly),
            GadgetMode::PlaquettesOnly => Self::assembly(&cfg.group, cfg.lattice, size, AssemblyMode::PlaquettesOnly),
            GadgetMode::Full => Self::assembly(&cfg.group, cfg.lattice, size, AssemblyMode::Full),
        }
    }

    /// `sum_s Q(s) (x) G (x) |0..0><0..0|` from the lattice projectors.
    pub fn oracle(&self) -> Result<Operator> {
        site_projector_target(&self.model, &self.sites, &self.gadget)
    }

    /// `(-1)^(n-1) sum_a target(a)`: the predicted order-n coefficient operator.
    pub fn predicted_unit(&self) -> Result<Operator> {
        let n = self.gadget.clock_dim();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        Ok(self.gadget.target_sum()?.scale_re(sign))
    }

    pub fn series(&self) -> Result<BlochSeries> {
        BlochSeries::new(&self.gadget.shifted_h0(), self.gadget.v(), self.gadget.p0())
    }

    pub fn summary(&self) -> Result<GadgetSummary> {
        let g = &self.gadget;
        Ok(GadgetSummary {
            label: self.label.clone(),
            sites: self.sites.iter().map(|s| s.to_string()).collect(),
            factors: g.layout().factors().iter().map(|f| format!("{}:{}", f.id, f.dim)).collect(),
            dim: g.layout().total_dim(),
            clock_dim: g.clock_dim(),
            clocks: g.clock_count(),
            ground_rank: g.ground_rank(),
            v_norm: operator_norm(g.v()),
            v_hermiticity: g.v().hermiticity_defect(),
            idle_sets: g
                .chi()
                .entries()
                .map(|(l, i, s)| IdleSet {
                    gadget: l.to_string(),
                    hop: i,
                    idle: s.iter().cloned().collect(),
                })
                .collect(),
            preconditions: g.preconditions().clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdleSet {
    pub gadget: String,
    pub hop: usize,
    pub idle: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetSummary {
    pub label: String,
    pub sites: Vec<String>,
    pub factors: Vec<String>,
    pub dim: usize,
    pub clock_dim: usize,
    pub clocks: usize,
    pub ground_rank: usize,
    pub v_norm: f64,
    pub v_hermiticity: f64,
    pub idle_sets: Vec<IdleSet>,
    pub preconditions: crate::gadget::PreconditionReport,
}
