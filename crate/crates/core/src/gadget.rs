//! Clock gadgets: a hopping perturbation on an n-level clock whose order-n
//! effective Hamiltonian is an ordered operator product, for one clock or
//! several clocks coupled through idle-projectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};
use crate::lattice::{OrientedLattice, Site};
use crate::linop::dense::{ket_bra, outer};
use crate::linop::{
    check_dim_cap, dim_cap, embed, fit_scalar, sum, Factor, FactorRole, Operator, ScalarFit, SystemLayout,
};
use crate::qdmodel::{clock_id, QdModel};
use crate::ribbon::{closed_ribbon_triangles, m_operator, register_factor, register_state, Representation};

pub const PROPORTIONALITY_TOL: f64 = 1e-9;
pub const COMMUTATION_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-10;

/// One clock gadget: ground projector, ordered hop operators (all on the
/// same system layout) and the id of its clock register.
#[derive(Debug, Clone)]
pub struct GadgetSpec {
    pub label: String,
    pub gamma0: Operator,
    pub ms: Vec<Operator>,
    pub clock_id: String,
}

impl GadgetSpec {
    pub fn new(label: impl Into<String>, gamma0: Operator, ms: Vec<Operator>, clock_id: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if ms.len() < 2 {
            return Err(QdError::invalid(format!("gadget '{label}' needs at least 2 hops, got {}", ms.len())));
        }
        if ms.iter().any(|m| m.layout() != gamma0.layout()) {
            return Err(QdError::invalid(format!("gadget '{label}': hop operators and ground projector live on different layouts")));
        }
        let idem = gamma0.mul(&gamma0)?.max_abs_diff(&gamma0)?;
        let herm = gamma0.hermiticity_defect();
        if idem > PROJECTOR_TOL || herm > PROJECTOR_TOL {
            return Err(QdError::invalid(format!(
                "gadget '{label}': ground operator is not a projector (idempotency {idem:.2e}, hermiticity {herm:.2e})"
            )));
        }
        Ok(GadgetSpec {
            label,
            gamma0,
            ms,
            clock_id: clock_id.into(),
        })
    }

    pub fn clock_dim(&self) -> usize {
        self.ms.len()
    }

    pub fn system_layout(&self) -> &Arc<SystemLayout> {
        self.gamma0.layout()
    }

    /// `G M_0 ... M_{n-1} G + h.c.` for a given projector `G`.
    pub fn target(&self, gamma: &Operator) -> Result<Operator> {
        let mut prod = gamma.clone();
        for m in &self.ms {
            prod = prod.mul(m)?;
        }
        let down = prod.mul(gamma)?;
        down.add(&down.adjoint())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionFit {
    /// "i", "ii", "iii" or "iv"
    pub condition: &'static str,
    pub hop: usize,
    pub fit: ScalarFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionalityReport {
    pub fits: Vec<ConditionFit>,
}

impl ProportionalityReport {
    pub fn holds(&self) -> bool {
        self.fits.iter().all(|f| f.fit.holds(PROPORTIONALITY_TOL))
    }

    pub fn worst_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.fit.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&ConditionFit> {
        self.fits.iter().filter(|f| !f.fit.holds(PROPORTIONALITY_TOL)).collect()
    }
}

/// Scalar fits for the four proportionality conditions, with hop indices
/// taken cyclically.
pub fn proportionality_report(spec: &GadgetSpec) -> Result<ProportionalityReport> {
    let n = spec.clock_dim();
    let ms = &spec.ms;
    let mm: Vec<Operator> = ms.iter().map(|m| m.mul(&m.adjoint())).collect::<Result<_>>()?;
    let mut fits = Vec::new();
    for i in 0..n {
        let next = (i + 1) % n;
        let prev = (i + n - 1) % n;
        let sq = mm[i].mul(&mm[i])?;
        let chain = ms[i].mul(&mm[next])?.mul(&ms[i].adjoint())?;
        fits.push(ConditionFit {
            condition: "i",
            hop: i,
            fit: fit_scalar(&chain, &sq)?,
        });
        fits.push(ConditionFit {
            condition: "ii",
            hop: i,
            fit: fit_scalar(&sq, &mm[i])?,
        });
        let back = ms[prev].adjoint().mul(&ms[prev])?;
        fits.push(ConditionFit {
            condition: "iii",
            hop: i,
            fit: fit_scalar(&mm[i], &back)?,
        });
    }
    let g = &spec.gamma0;
    fits.push(ConditionFit {
        condition: "iv",
        hop: 0,
        fit: fit_scalar(&g.mul(&mm[0])?.mul(g)?, g)?,
    });
    Ok(ProportionalityReport { fits })
}

/// True iff all four conditions hold with a nondegenerate scalar.
pub fn check_proportionality(spec: &GadgetSpec) -> bool {
    proportionality_report(spec).map(|r| r.holds()).unwrap_or(false)
}

/// Clocks that must be idle while a given hop acts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChiMap {
    sets: BTreeMap<(String, usize), BTreeSet<String>>,
}

impl ChiMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: &str, hop: usize, idle: &str) -> Result<()> {
        if label == idle {
            return Err(QdError::invalid(format!("gadget '{label}' cannot require its own clock idle")));
        }
        self.sets.entry((label.to_string(), hop)).or_default().insert(idle.to_string());
        Ok(())
    }

    pub fn get(&self, label: &str, hop: usize) -> Vec<&str> {
        self.sets
            .get(&(label.to_string(), hop))
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.values().all(BTreeSet::is_empty)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, usize, &BTreeSet<String>)> {
        self.sets.iter().map(|((l, i), s)| (l.as_str(), *i, s))
    }
}

/// Largest commutator norms behind the multi-clock preconditions. Values
/// are Frobenius norms, which bound the spectral norm from above.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PreconditionReport {
    pub proportionality: f64,
    /// `[G^a, G^b]`
    pub ground_commutator: f64,
    /// `[M_i^a, G^b]` and `[M_i^a^dagger, G^b]`, a != b
    pub ground_hop_commutator: f64,
    /// `[M_i^a, M_0^b^dagger M_0^b]` and its adjoint version, a != b
    pub hop_norm_commutator: f64,
}

/// Clock gadget Hamiltonian pair on `system (x) clocks`.
#[derive(Debug, Clone)]
pub struct Gadget {
    system: Arc<SystemLayout>,
    layout: Arc<SystemLayout>,
    specs: Vec<GadgetSpec>,
    chi: ChiMap,
    h0: Operator,
    v: Operator,
    p0: Operator,
    preconditions: PreconditionReport,
}

impl Gadget {
    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn system_layout(&self) -> &Arc<SystemLayout> {
        &self.system
    }

    pub fn specs(&self) -> &[GadgetSpec] {
        &self.specs
    }

    pub fn chi(&self) -> &ChiMap {
        &self.chi
    }

    pub fn clock_count(&self) -> usize {
        self.specs.len()
    }

    pub fn clock_dim(&self) -> usize {
        self.specs[0].clock_dim()
    }

    /// `-sum_a G^a (x) |0><0|_a`
    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    /// `H0 + L`, whose ground energy is zero.
    pub fn shifted_h0(&self) -> Operator {
        self.h0
            .add(&Operator::identity(&self.layout).scale_re(self.specs.len() as f64))
            .expect("same layout")
    }

    pub fn v(&self) -> &Operator {
        &self.v
    }

    /// Ground projector of `H0`.
    pub fn p0(&self) -> &Operator {
        &self.p0
    }

    pub fn ground_rank(&self) -> usize {
        self.p0.trace().re.round() as usize
    }

    pub fn preconditions(&self) -> &PreconditionReport {
        &self.preconditions
    }

    pub fn hamiltonian(&self, lambda: f64) -> Operator {
        self.h0.add(&self.v.scale_re(lambda)).expect("same layout")
    }

    /// Idle sets as clock indices, `[clock][hop]`.
    pub fn chi_indices(&self) -> Result<Vec<Vec<Vec<usize>>>> {
        let n = self.clock_dim();
        self.specs
            .iter()
            .map(|s| {
                (0..n)
                    .map(|i| self.chi.get(&s.label, i).into_iter().map(|b| self.index_of(b)).collect())
                    .collect()
            })
            .collect()
    }

    fn index_of(&self, label: &str) -> Result<usize> {
        self.specs
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| QdError::invalid(format!("no gadget labelled '{label}'")))
    }

    pub fn lift(&self, op: &Operator) -> Result<Operator> {
        op.lift(&self.layout)
    }

    /// `|a><b|` on clock `alpha`.
    pub fn clock_op(&self, alpha: usize, a: usize, b: usize) -> Result<Operator> {
        let n = self.clock_dim();
        embed(&self.layout, &[&self.specs[alpha].clock_id], &ket_bra(n, a % n, b % n))
    }

    /// Product of `|0><0|_b` over the clocks idle-coupled to hop `i` of clock `alpha`.
    pub fn chi_projector(&self, alpha: usize, i: usize) -> Result<Operator> {
        let mut acc = Operator::identity(&self.layout);
        for beta in self.chi.get(&self.specs[alpha].label, i) {
            acc = acc.mul(&self.clock_op(self.index_of(beta)?, 0, 0)?)?;
        }
        Ok(acc)
    }

    /// `W_i^dagger = M_i^dagger (x) |i+1><i| (x) chi`
    pub fn hop_up(&self, alpha: usize, i: usize) -> Result<Operator> {
        let m = self.lift(&self.specs[alpha].ms[i].adjoint())?;
        m.mul(&self.clock_op(alpha, i + 1, i)?)?.mul(&self.chi_projector(alpha, i)?)
    }

    /// `W_i = M_i (x) |i><i+1| (x) chi`
    pub fn hop_down(&self, alpha: usize, i: usize) -> Result<Operator> {
        let m = self.lift(&self.specs[alpha].ms[i])?;
        m.mul(&self.clock_op(alpha, i, i + 1)?)?.mul(&self.chi_projector(alpha, i)?)
    }

    /// `G^a (x) |0><0|_a`
    pub fn clock_ground_projector(&self, alpha: usize) -> Result<Operator> {
        self.lift(&self.specs[alpha].gamma0)?.mul(&self.clock_op(alpha, 0, 0)?)
    }

    /// Product of all ground projectors on the system.
    pub fn joint_gamma(&self) -> Result<Operator> {
        let mut g = Operator::identity(&self.system);
        for s in &self.specs {
            g = g.mul(&s.gamma0)?;
        }
        Ok(g)
    }

    /// `(G M_0^a ... M_{n-1}^a G + h.c.) (x) |0...0><0...0|` with `G` the joint projector.
    pub fn target(&self, alpha: usize) -> Result<Operator> {
        let t = self.specs[alpha].target(&self.joint_gamma()?)?;
        self.lift(&t)?.mul(&self.all_clocks_idle()?)
    }

    pub fn target_sum(&self) -> Result<Operator> {
        let parts = (0..self.specs.len()).map(|a| self.target(a)).collect::<Result<Vec<_>>>()?;
        sum(&self.layout, &parts)
    }

    /// `(-1)^(n-1) lambda^n sum_a target(a)`
    pub fn predicted_effective(&self, lambda: f64) -> Result<Operator> {
        let n = self.clock_dim() as i32;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        Ok(self.target_sum()?.scale_re(sign * lambda.powi(n)))
    }

    pub fn all_clocks_idle(&self) -> Result<Operator> {
        let mut acc = Operator::identity(&self.layout);
        for a in 0..self.specs.len() {
            acc = acc.mul(&self.clock_op(a, 0, 0)?)?;
        }
        Ok(acc)
    }

    /// `max_i max(|W_i|, |W_i^dagger|)` over all clocks.
    pub fn gamma_bound(&self) -> Result<f64> {
        let mut g: f64 = 0.0;
        for a in 0..self.specs.len() {
            for i in 0..self.clock_dim() {
                g = g.max(crate::linop::operator_norm(&self.hop_down(a, i)?));
                g = g.max(crate::linop::operator_norm(&self.hop_up(a, i)?));
            }
        }
        Ok(g)
    }
}

fn commutator_norm(a: &Operator, b: &Operator) -> Result<f64> {
    Ok(a.commutator(b)?.frobenius_norm())
}

/// `H0 = -G (x) |0><0|`, `V = sum_i (M_i^dagger (x) |i+1><i| + h.c.)`.
pub fn build_single_clock(spec: GadgetSpec) -> Result<Gadget> {
    build_multi_clock(vec![spec], ChiMap::new())
}

/// Several clocks with idle-projector couplings. Checks the per-gadget
/// proportionality conditions and the cross-gadget commutation conditions.
pub fn build_multi_clock(specs: Vec<GadgetSpec>, chi: ChiMap) -> Result<Gadget> {
    let first = specs.first().ok_or_else(|| QdError::invalid("no gadget specs"))?;
    let system = first.system_layout().clone();
    let n = first.clock_dim();
    let mut labels = BTreeSet::new();
    let mut clocks = BTreeSet::new();
    for s in &specs {
        if s.system_layout() != &system {
            return Err(QdError::invalid(format!("gadget '{}' lives on a different system layout", s.label)));
        }
        if s.clock_dim() != n {
            return Err(QdError::invalid(format!(
                "gadget '{}' has clock dimension {}, expected {n}",
                s.label,
                s.clock_dim()
            )));
        }
        if !labels.insert(s.label.clone()) || !clocks.insert(s.clock_id.clone()) {
            return Err(QdError::invalid(format!("duplicate gadget label or clock id for '{}'", s.label)));
        }
    }
    for (label, hop, idle) in chi.entries() {
        if !labels.contains(label) || hop >= n || idle.iter().any(|b| !labels.contains(b)) {
            return Err(QdError::invalid(format!("idle set for ({label}, {hop}) names an unknown gadget or hop")));
        }
    }

    let mut pre = PreconditionReport::default();
    for s in &specs {
        let r = proportionality_report(s)?;
        pre.proportionality = pre.proportionality.max(r.worst_residual());
        if let Some(f) = r.failures().first() {
            return Err(QdError::precondition(format!(
                "gadget '{}': condition ({}) at hop {} fails (residual {:.3e}, degenerate {})",
                s.label, f.condition, f.hop, f.fit.residual, f.fit.degenerate
            )));
        }
    }
    for (a, sa) in specs.iter().enumerate() {
        for (b, sb) in specs.iter().enumerate() {
            if a == b {
                continue;
            }
            let pair = |what: &str, val: f64| -> Result<()> {
                if val > COMMUTATION_TOL {
                    return Err(QdError::precondition(format!(
                        "{what} fails for ('{}', '{}'): {val:.3e}",
                        sa.label, sb.label
                    )));
                }
                Ok(())
            };
            let gg = commutator_norm(&sa.gamma0, &sb.gamma0)?;
            pre.ground_commutator = pre.ground_commutator.max(gg);
            pair("ground projectors commuting", gg)?;
            let norm_b = sb.ms[0].adjoint().mul(&sb.ms[0])?;
            for m in &sa.ms {
                let md = m.adjoint();
                let c26 = commutator_norm(m, &sb.gamma0)?.max(commutator_norm(&md, &sb.gamma0)?);
                pre.ground_hop_commutator = pre.ground_hop_commutator.max(c26);
                pair("hop / ground projector commutation", c26)?;
                let c27 = commutator_norm(m, &norm_b)?.max(commutator_norm(&md, &norm_b)?);
                pre.hop_norm_commutator = pre.hop_norm_commutator.max(c27);
                pair("hop / first-hop norm commutation", c27)?;
            }
        }
    }

    let mut factors = system.factors().to_vec();
    factors.extend(specs.iter().map(|s| Factor::new(s.clock_id.clone(), n, FactorRole::Clock)));
    check_dim_cap(factors.iter().map(|f| f.dim), dim_cap())?;
    let layout = Arc::new(SystemLayout::new(factors)?);

    let mut g = Gadget {
        system,
        layout: layout.clone(),
        specs,
        chi,
        h0: Operator::zero(&layout),
        v: Operator::zero(&layout),
        p0: Operator::zero(&layout),
        preconditions: pre,
    };
    let mut ground = Vec::new();
    let mut p0 = Operator::identity(&layout);
    for a in 0..g.specs.len() {
        let pa = g.clock_ground_projector(a)?;
        p0 = p0.mul(&pa)?;
        ground.push(pa);
    }
    g.h0 = sum(&layout, &ground)?.scale_re(-1.0);
    g.p0 = p0;
    let mut hops = Vec::new();
    for a in 0..g.specs.len() {
        for i in 0..n {
            let up = g.hop_up(a, i)?;
            hops.push(up.adjoint());
            hops.push(up);
        }
    }
    g.v = sum(&layout, &hops)?;
    Ok(g)
}

/// `sum_s Q(s) (x) G (x) |0...0><0...0|` with `Q(s)` the vertex or plaquette
/// projector of each site, built directly from the lattice model.
pub fn site_projector_target(model: &QdModel, sites: &[Site], gadget: &Gadget) -> Result<Operator> {
    let system = system_model(model, sites)?;
    if system.layout() != gadget.system_layout() {
        return Err(QdError::invalid("sites do not match the gadget's system layout"));
    }
    let projectors = sites.iter().map(|&s| system.site_operator(s)).collect::<Result<Vec<_>>>()?;
    let q = sum(system.layout(), &projectors)?.mul(&gadget.joint_gamma()?)?;
    gadget.lift(&q)?.mul(&gadget.all_clocks_idle()?)
}

/// Clock dimension that puts vertex and plaquette terms at the same order:
/// the longest plaquette boundary.
pub fn clock_dim_for(lattice: &OrientedLattice) -> usize {
    lattice.max_boundary_len()
}

/// Edges of the given sites plus one reduced register per site.
pub fn system_model(model: &QdModel, sites: &[Site]) -> Result<QdModel> {
    let regs = sites
        .iter()
        .map(|&s| register_factor(model.group(), s, Representation::Reduced))
        .collect();
    QdModel::for_sites(model.group().clone(), model.lattice().clone(), sites, regs)
}

/// Gadget for one site on a system model that holds the site's register:
/// `G = I (x) |Psi><Psi|_R`, hops `M(e_i, site)` clockwise, padded with
/// identities up to `n`.
pub fn site_spec(system: &QdModel, site: Site, n: usize) -> Result<GadgetSpec> {
    let group = system.group();
    let reg = register_factor(group, site, Representation::Reduced);
    let psi = register_state(group, site, Representation::Reduced);
    let gamma0 = embed(system.layout(), &[&reg.id], &outer(&psi))?;
    let start = system.lattice().site_edges(site)[0];
    let mut ms = closed_ribbon_triangles(system, site, start)?
        .into_iter()
        .map(|t| m_operator(system, t, Representation::Reduced))
        .collect::<Result<Vec<_>>>()?;
    if ms.len() > n {
        return Err(QdError::invalid(format!("{site} has {} hops, more than the clock dimension {n}", ms.len())));
    }
    while ms.len() < n {
        ms.push(Operator::identity(system.layout()));
    }
    GadgetSpec::new(site.to_string(), gamma0, ms, clock_id(site))
}

/// Idle sets among the given sites: a vertex hop on edge `e` idles the
/// plaquettes on either side of `e`; a plaquette hop on `e` idles both
/// endpoints. Identity pads get none.
pub fn chi_sets(lattice: &OrientedLattice, sites: &[Site]) -> Result<ChiMap> {
    let present: BTreeSet<Site> = sites.iter().copied().collect();
    let mut chi = ChiMap::new();
    for &site in sites {
        lattice.check_site(site)?;
        let label = site.to_string();
        for (i, e) in lattice.site_edges(site).into_iter().enumerate() {
            let edge = lattice.edge(e);
            let others = match site {
                Site::Vertex(_) => [Site::Plaquette(edge.p_minus), Site::Plaquette(edge.p_plus)],
                Site::Plaquette(_) => [Site::Vertex(edge.v_minus), Site::Vertex(edge.v_plus)],
            };
            for o in others {
                if present.contains(&o) {
                    chi.insert(&label, i, &o.to_string())?;
                }
            }
        }
    }
    Ok(chi)
}

/// Multi-clock gadget for the given sites on the union of their edges;
/// with `coupled` the idle sets from [`chi_sets`] are used, otherwise none.
pub fn build_site_gadgets(model: &QdModel, sites: &[Site], coupled: bool) -> Result<Gadget> {
    let n = clock_dim_for(model.lattice());
    let system = system_model(model, sites)?;
    let specs = sites.iter().map(|&s| site_spec(&system, s, n)).collect::<Result<Vec<_>>>()?;
    let chi = if coupled {
        chi_sets(model.lattice(), sites)?
    } else {
        ChiMap::new()
    };
    build_multi_clock(specs, chi)
}

pub fn build_plaquette_gadget(model: &QdModel, p: usize) -> Result<Gadget> {
    build_site_gadgets(model, &[Site::Plaquette(p)], false)
}

pub fn build_vertex_gadget(model: &QdModel, v: usize) -> Result<Gadget> {
    build_site_gadgets(model, &[Site::Vertex(v)], false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssemblyMode {
    VerticesOnly,
    PlaquettesOnly,
    Full,
}

impl FromStr for AssemblyMode {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertices-only" => Ok(AssemblyMode::VerticesOnly),
            "plaquettes-only" => Ok(AssemblyMode::PlaquettesOnly),
            "full" => Ok(AssemblyMode::Full),
            other => Err(QdError::invalid(format!("unknown assembly mode '{other}'"))),
        }
    }
}

impl fmt::Display for AssemblyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssemblyMode::VerticesOnly => "vertices-only",
            AssemblyMode::PlaquettesOnly => "plaquettes-only",
            AssemblyMode::Full => "full",
        })
    }
}

/// Sites used by an assembly mode, vertices first.
pub fn assembly_sites(lattice: &OrientedLattice, mode: AssemblyMode) -> Vec<Site> {
    let mut sites = Vec::new();
    if mode != AssemblyMode::PlaquettesOnly {
        sites.extend((0..lattice.num_vertices()).map(Site::Vertex));
    }
    if mode != AssemblyMode::VerticesOnly {
        sites.extend((0..lattice.num_plaquettes()).map(Site::Plaquette));
    }
    sites
}

/// Every site's gadget on the whole lattice. The dimension is checked
/// against the cap before anything is built.
pub fn build_full_assembly(model: &QdModel, mode: AssemblyMode) -> Result<Gadget> {
    let lattice = model.lattice();
    let sites = assembly_sites(lattice, mode);
    let g = model.group().order();
    let n = clock_dim_for(lattice);
    let dims = std::iter::repeat(g)
        .take(lattice.num_edges())
        .chain(sites.iter().flat_map(|_| [g, n]));
    check_dim_cap(dims, dim_cap())?;
    build_site_gadgets(model, &sites, mode == AssemblyMode::Full)
}
