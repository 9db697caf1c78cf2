use serde::{Deserialize, Serialize};

use super::tuples::enumerate_pm;
use crate::error::{QdError, Result};
use crate::gadget::Gadget;
use crate::linop::Operator;

pub const MAX_DIAGRAM_ORDER: usize = 8;
pub const MAX_DIAGRAM_CLOCKS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `W_i^dagger`: clock `i -> i+1`
    Up,
    /// `W_i`: clock `i+1 -> i`
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow {
    pub clock: usize,
    pub dir: Direction,
}

/// Slot structure of one operator product in a Bloch term.
///
/// `arrows[j-1]` is `Y_j`; `eps[a][j-1]` is the excitation flag of clock `a`
/// between `Y_j` and `Y_(j+1)`. The operator is
/// `P0 Y_1 P(eps_1) Y_2 ... P(eps_(m-1)) Y_m P0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagram {
    pub eps: Vec<Vec<bool>>,
    pub arrows: Vec<Arrow>,
}

/// Clock dimension, clock count and idle sets (`chi[a][i]` lists the clocks
/// that must sit at 0 while hop `i` of clock `a` acts).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramRules {
    pub n: usize,
    pub chi: Vec<Vec<Vec<usize>>>,
}

impl DiagramRules {
    pub fn single(n: usize) -> Self {
        DiagramRules {
            n,
            chi: vec![vec![Vec::new(); n]],
        }
    }

    pub fn for_gadget(g: &Gadget) -> Result<Self> {
        Ok(DiagramRules {
            n: g.clock_dim(),
            chi: g.chi_indices()?,
        })
    }

    pub fn clocks(&self) -> usize {
        self.chi.len()
    }
}

impl Diagram {
    pub fn order(&self) -> usize {
        self.arrows.len()
    }

    /// `c[a][j]`, the height of clock `a` right of `Y_(j+1)`, for `j = 0..=m`;
    /// `c[a][m] = 0`.
    pub fn heights(&self, clocks: usize, n: usize) -> Vec<Vec<usize>> {
        let m = self.order();
        let mut c = vec![vec![0usize; m + 1]; clocks];
        for j in (1..=m).rev() {
            for (a, row) in c.iter_mut().enumerate() {
                let h = row[j];
                let arrow = self.arrows[j - 1];
                row[j - 1] = if arrow.clock != a {
                    h
                } else {
                    match arrow.dir {
                        Direction::Up => (h + 1) % n,
                        Direction::Down => (h + n - 1) % n,
                    }
                };
            }
        }
        c
    }

    /// Hop index carried by slot `j` (1-based) given the heights.
    pub fn hop(&self, j: usize, heights: &[Vec<usize>], n: usize) -> usize {
        let a = self.arrows[j - 1];
        let h = heights[a.clock][j];
        match a.dir {
            Direction::Up => h,
            Direction::Down => (h + n - 1) % n,
        }
    }

    /// Number of excited clocks in each gap.
    pub fn column_sums(&self) -> Vec<usize> {
        let gaps = self.order().saturating_sub(1);
        (0..gaps)
            .map(|j| self.eps.iter().filter(|row| row[j]).count())
            .collect()
    }

    fn eps_at(&self, a: usize, j: usize) -> bool {
        if j == 0 || j >= self.order() {
            false
        } else {
            self.eps[a][j - 1]
        }
    }

    /// Structural validity: each clock path closes, unexcited gaps sit at
    /// height 0, a clock's flag only changes where it moves, and idle sets
    /// are at height 0 whenever their hop acts.
    pub fn is_valid(&self, rules: &DiagramRules) -> bool {
        let m = self.order();
        let clocks = rules.clocks();
        let n = rules.n;
        if m == 0
            || self.eps.len() != clocks
            || self.eps.iter().any(|r| r.len() != m - 1)
            || self.arrows.iter().any(|a| a.clock >= clocks)
        {
            return false;
        }
        let c = self.heights(clocks, n);
        for a in 0..clocks {
            if c[a][0] != 0 {
                return false;
            }
            for j in 1..m {
                if !self.eps[a][j - 1] && c[a][j] != 0 {
                    return false;
                }
            }
        }
        for j in 1..=m {
            let arrow = self.arrows[j - 1];
            for a in 0..clocks {
                if a != arrow.clock && self.eps_at(a, j - 1) != self.eps_at(a, j) {
                    return false;
                }
            }
            let hop = self.hop(j, &c, n);
            if rules.chi[arrow.clock][hop].iter().any(|&b| c[b][j] != 0) {
                return false;
            }
        }
        true
    }

    /// All arrows of `clock` in one direction with that clock excited throughout.
    pub fn special(rules: &DiagramRules, clock: usize, dir: Direction) -> Self {
        let n = rules.n;
        let mut eps = vec![vec![false; n - 1]; rules.clocks()];
        eps[clock] = vec![true; n - 1];
        Diagram {
            eps,
            arrows: vec![Arrow { clock, dir }; n],
        }
    }

    /// Whether this is one of the two all-up / all-down diagrams of some clock.
    pub fn is_special(&self, rules: &DiagramRules) -> bool {
        if self.order() != rules.n {
            return false;
        }
        (0..rules.clocks()).any(|a| {
            *self == Diagram::special(rules, a, Direction::Up) || *self == Diagram::special(rules, a, Direction::Down)
        })
    }
}

/// `h(E, l)`: the coefficient of `P_E` in `S^l`.
pub fn resolvent_weight(e: usize, l: usize) -> f64 {
    match (e, l) {
        (0, 0) => -1.0,
        (_, 0) | (0, _) => 0.0,
        (e, l) => (-(e as f64)).powi(-(l as i32)),
    }
}

/// `g(E_1..E_(m-1)) = sum_{l in P_(m-1)} prod_j h(E_j, l_j)` for gap
/// excitation counts `E_j`.
pub fn g_coefficient(column_sums: &[usize]) -> f64 {
    enumerate_pm(column_sums.len())
        .iter()
        .map(|t| {
            t.entries()
                .iter()
                .zip(column_sums)
                .map(|(&l, &e)| resolvent_weight(e, l))
                .product::<f64>()
        })
        .sum()
}

/// Single-clock sign sum: `(-1)^(m-1) sum (-1)^(sum(eps_i + l_i))` over
/// tuples whose support equals that of `eps`.
pub fn g_single(eps: &[bool]) -> i64 {
    let m = eps.len() + 1;
    let flips: usize = eps.iter().filter(|&&e| e).count();
    let mut total = 0i64;
    for t in enumerate_pm(eps.len()) {
        if t.entries().iter().zip(eps).all(|(&l, &e)| (l > 0) == e) {
            let s = flips + t.entries().iter().sum::<usize>();
            total += if s % 2 == 0 { 1 } else { -1 };
        }
    }
    if (m - 1) % 2 == 0 {
        total
    } else {
        -total
    }
}

/// Every structurally valid diagram of order `m`.
pub fn enumerate_valid_diagrams(rules: &DiagramRules, m: usize) -> Result<Vec<Diagram>> {
    let clocks = rules.clocks();
    let n = rules.n;
    if m == 0 || m > MAX_DIAGRAM_ORDER || m > n {
        return Err(QdError::invalid(format!(
            "diagram order {m} outside 1..=min({n}, {MAX_DIAGRAM_ORDER})"
        )));
    }
    if clocks == 0 || clocks > MAX_DIAGRAM_CLOCKS {
        return Err(QdError::invalid(format!("clock count {clocks} outside 1..={MAX_DIAGRAM_CLOCKS}")));
    }
    let choices: Vec<Arrow> = (0..clocks)
        .flat_map(|clock| [Direction::Up, Direction::Down].map(|dir| Arrow { clock, dir }))
        .collect();
    let mut out = Vec::new();
    let mut arrows = vec![choices[0]; m];
    // slots filled right to left, heights tracked as signed offsets
    fn rec(
        slot: usize,
        offsets: &mut Vec<i64>,
        arrows: &mut Vec<Arrow>,
        choices: &[Arrow],
        rules: &DiagramRules,
        out: &mut Vec<Diagram>,
    ) {
        let n = rules.n as i64;
        if slot == 0 {
            if offsets.iter().all(|&o| o.rem_euclid(n) == 0) {
                expand_eps(arrows, rules, out);
            }
            return;
        }
        for &a in choices {
            let step = if a.dir == Direction::Up { 1 } else { -1 };
            offsets[a.clock] += step;
            let remaining = (slot - 1) as i64;
            let closable = offsets.iter().all(|&o| {
                let r = o.rem_euclid(n);
                r.min(n - r) <= remaining
            });
            if closable {
                arrows[slot - 1] = a;
                rec(slot - 1, offsets, arrows, choices, rules, out);
            }
            offsets[a.clock] -= step;
        }
    }
    let mut offsets = vec![0i64; clocks];
    rec(m, &mut offsets, &mut arrows, &choices, rules, &mut out);
    out.sort();
    Ok(out)
}

fn expand_eps(arrows: &[Arrow], rules: &DiagramRules, out: &mut Vec<Diagram>) {
    let m = arrows.len();
    let clocks = rules.clocks();
    let probe = Diagram {
        eps: vec![vec![true; m - 1]; clocks],
        arrows: arrows.to_vec(),
    };
    let c = probe.heights(clocks, rules.n);
    let free: Vec<(usize, usize)> = (0..clocks)
        .flat_map(|a| (1..m).map(move |j| (a, j)))
        .filter(|&(a, j)| c[a][j] == 0)
        .collect();
    for mask in 0u64..(1u64 << free.len()) {
        let mut d = probe.clone();
        for (bit, &(a, j)) in free.iter().enumerate() {
            d.eps[a][j - 1] = mask >> bit & 1 == 1;
        }
        if d.is_valid(rules) {
            out.push(d);
        }
    }
}

/// Materializes `Theta(eps, Y)` on a gadget, caching hops and projectors.
pub struct ThetaBuilder<'a> {
    gadget: &'a Gadget,
    rules: DiagramRules,
    ground: Vec<Operator>,
    excited: Vec<Operator>,
    up: Vec<Vec<Operator>>,
    down: Vec<Vec<Operator>>,
}

impl<'a> ThetaBuilder<'a> {
    pub fn new(gadget: &'a Gadget) -> Result<Self> {
        let rules = DiagramRules::for_gadget(gadget)?;
        let id = Operator::identity(gadget.layout());
        let mut ground = Vec::new();
        let mut excited = Vec::new();
        let mut up = Vec::new();
        let mut down = Vec::new();
        for a in 0..gadget.clock_count() {
            let p = gadget.clock_ground_projector(a)?;
            excited.push(id.sub(&p)?);
            ground.push(p);
            up.push((0..rules.n).map(|i| gadget.hop_up(a, i)).collect::<Result<Vec<_>>>()?);
            down.push((0..rules.n).map(|i| gadget.hop_down(a, i)).collect::<Result<Vec<_>>>()?);
        }
        Ok(ThetaBuilder {
            gadget,
            rules,
            ground,
            excited,
            up,
            down,
        })
    }

    pub fn rules(&self) -> &DiagramRules {
        &self.rules
    }

    pub fn theta(&self, d: &Diagram) -> Result<Operator> {
        if !d.is_valid(&self.rules) {
            return Err(QdError::invalid("diagram violates the validity rules"));
        }
        let n = self.rules.n;
        let m = d.order();
        let c = d.heights(self.rules.clocks(), n);
        let p0 = self.gadget.p0();
        let mut acc = p0.clone();
        for j in (1..=m).rev() {
            let arrow = d.arrows[j - 1];
            let hop = d.hop(j, &c, n);
            let y = match arrow.dir {
                Direction::Up => &self.up[arrow.clock][hop],
                Direction::Down => &self.down[arrow.clock][hop],
            };
            acc = y.mul(&acc)?;
            if j > 1 {
                for a in 0..self.rules.clocks() {
                    let p = if d.eps[a][j - 2] { &self.excited[a] } else { &self.ground[a] };
                    acc = p.mul(&acc)?;
                }
            }
        }
        p0.mul(&acc)
    }
}

pub fn theta_operator(d: &Diagram, gadget: &Gadget) -> Result<Operator> {
    ThetaBuilder::new(gadget)?.theta(d)
}
