//! Oriented square and honeycomb lattices on the torus.
//!
//! Each edge carries an arrow from `v_minus` to `v_plus`; `p_minus` lies to the
//! left of the arrow and `p_plus` to the right. Stars are listed clockwise
//! starting from the +y direction, boundaries clockwise starting at the
//! smallest edge index. The plane is drawn with y pointing up.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Honeycomb,
}

impl FromStr for LatticeKind {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeKind::Square),
            "honeycomb" => Ok(LatticeKind::Honeycomb),
            _ => Err(QdError::invalid(format!("unknown lattice kind '{s}'"))),
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::Square => write!(f, "square"),
            LatticeKind::Honeycomb => write!(f, "honeycomb"),
        }
    }
}

/// Which end of an edge a vertex sits on, or which side of it a plaquette lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub v_minus: usize,
    pub v_plus: usize,
    pub p_minus: usize,
    pub p_plus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    Vertex(usize),
    Plaquette(usize),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Vertex(v) => write!(f, "v{v}"),
            Site::Plaquette(p) => write!(f, "p{p}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrientedLattice {
    kind: LatticeKind,
    width: usize,
    height: usize,
    num_vertices: usize,
    edges: Vec<Edge>,
    stars: Vec<Vec<(usize, Sign)>>,
    boundaries: Vec<Vec<(usize, Sign)>>,
}

/// Clockwise traversal of one face: (edge, traversed along its arrow).
type FaceWalk = Vec<(usize, bool)>;

struct RawComplex {
    num_vertices: usize,
    /// (v_minus, v_plus, angle of the arrow in degrees)
    edges: Vec<(usize, usize, f64)>,
    faces: Vec<FaceWalk>,
}

impl OrientedLattice {
    fn assemble(kind: LatticeKind, width: usize, height: usize, raw: RawComplex) -> Result<Self> {
        let mut p_minus = vec![usize::MAX; raw.edges.len()];
        let mut p_plus = vec![usize::MAX; raw.edges.len()];
        let mut boundaries = Vec::with_capacity(raw.faces.len());
        for (p, walk) in raw.faces.iter().enumerate() {
            // Walking clockwise keeps the face on the right, so a forward
            // traversal means the face is p_plus of that edge.
            let mut bnd: Vec<(usize, Sign)> = walk
                .iter()
                .map(|&(e, forward)| {
                    let slot = if forward { &mut p_plus[e] } else { &mut p_minus[e] };
                    if *slot != usize::MAX {
                        return Err(QdError::invalid(format!("edge {e} bounds a face side twice")));
                    }
                    *slot = p;
                    Ok((e, if forward { Sign::Plus } else { Sign::Minus }))
                })
                .collect::<Result<_>>()?;
            let start = (0..bnd.len()).min_by_key(|&i| bnd[i].0).unwrap_or(0);
            bnd.rotate_left(start);
            boundaries.push(bnd);
        }
        let mut incident: Vec<Vec<(f64, usize, Sign)>> = vec![Vec::new(); raw.num_vertices];
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (e, &(vm, vp, angle)) in raw.edges.iter().enumerate() {
            if p_minus[e] == usize::MAX || p_plus[e] == usize::MAX {
                return Err(QdError::invalid(format!("edge {e} is not bounded on both sides")));
            }
            incident[vm].push((clockwise_key(angle), e, Sign::Minus));
            incident[vp].push((clockwise_key(angle + 180.0), e, Sign::Plus));
            edges.push(Edge {
                v_minus: vm,
                v_plus: vp,
                p_minus: p_minus[e],
                p_plus: p_plus[e],
            });
        }
        let stars = incident
            .into_iter()
            .map(|mut list| {
                list.sort_by(|a, b| a.0.total_cmp(&b.0));
                list.into_iter().map(|(_, e, s)| (e, s)).collect()
            })
            .collect();
        Ok(OrientedLattice {
            kind,
            width,
            height,
            num_vertices: raw.num_vertices,
            edges,
            stars,
            boundaries,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.boundaries.len()
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.boundaries.len() as i64
    }

    pub fn star(&self, v: usize) -> &[(usize, Sign)] {
        &self.stars[v]
    }

    pub fn boundary(&self, p: usize) -> &[(usize, Sign)] {
        &self.boundaries[p]
    }

    /// Vertex where the clockwise walk around the face enters this boundary edge.
    pub fn walk_start(&self, edge: usize, side: Sign) -> usize {
        let e = &self.edges[edge];
        match side {
            Sign::Plus => e.v_minus,
            Sign::Minus => e.v_plus,
        }
    }

    /// Boundary of `p` rotated so that the walk starts at vertex `v`.
    pub fn boundary_from(&self, p: usize, v: usize) -> Result<Vec<(usize, Sign)>> {
        let bnd = self.boundary(p);
        let start = bnd
            .iter()
            .position(|&(e, s)| self.walk_start(e, s) == v)
            .ok_or_else(|| QdError::invalid(format!("vertex {v} is not on the boundary of plaquette {p}")))?;
        let mut out = bnd.to_vec();
        out.rotate_left(start);
        Ok(out)
    }

    /// Vertices met by the clockwise walk around `p`, in boundary order.
    pub fn boundary_vertices(&self, p: usize) -> Vec<usize> {
        self.boundary(p).iter().map(|&(e, s)| self.walk_start(e, s)).collect()
    }

    pub fn max_boundary_len(&self) -> usize {
        self.boundaries.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn site_edges(&self, site: Site) -> Vec<usize> {
        match site {
            Site::Vertex(v) => self.star(v).iter().map(|&(e, _)| e).collect(),
            Site::Plaquette(p) => self.boundary(p).iter().map(|&(e, _)| e).collect(),
        }
    }

    pub fn check_site(&self, site: Site) -> Result<()> {
        let ok = match site {
            Site::Vertex(v) => v < self.num_vertices,
            Site::Plaquette(p) => p < self.boundaries.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(QdError::invalid(format!("site {site} is out of range")))
        }
    }

    /// Rebuilds each face by walking the star orders: entering a vertex along
    /// an edge, the next edge of the clockwise face walk precedes it in the
    /// vertex's clockwise star.
    pub fn faces_from_stars(&self) -> Vec<Vec<(usize, Sign)>> {
        let mut used = vec![[false; 2]; self.edges.len()];
        let mut faces = Vec::new();
        for e0 in 0..self.edges.len() {
            for forward0 in [true, false] {
                if used[e0][forward0 as usize] {
                    continue;
                }
                let mut face = Vec::new();
                let (mut e, mut forward) = (e0, forward0);
                while !used[e][forward as usize] {
                    used[e][forward as usize] = true;
                    face.push((e, if forward { Sign::Plus } else { Sign::Minus }));
                    let edge = &self.edges[e];
                    let (at, arrival) = if forward {
                        (edge.v_plus, Sign::Plus)
                    } else {
                        (edge.v_minus, Sign::Minus)
                    };
                    let star = self.star(at);
                    let pos = star.iter().position(|&x| x == (e, arrival)).expect("edge in star");
                    let (ne, nend) = star[(pos + star.len() - 1) % star.len()];
                    e = ne;
                    forward = nend == Sign::Minus;
                }
                let start = (0..face.len()).min_by_key(|&i| face[i].0).unwrap_or(0);
                face.rotate_left(start);
                faces.push(face);
            }
        }
        faces
    }
}

fn clockwise_key(angle_deg: f64) -> f64 {
    let k = (90.0 - angle_deg).rem_euclid(360.0);
    // fold values that round to a full turn back to the start
    if k > 359.999 {
        0.0
    } else {
        k
    }
}

fn check_dims(w: usize, h: usize) -> Result<()> {
    if w < 2 || h < 2 {
        return Err(QdError::invalid(format!(
            "torus dimensions must be at least 2x2, got {w}x{h}"
        )));
    }
    Ok(())
}

/// Square torus: vertex `(x, y)` has index `x + w*y`; its +x edge is `2*(x + w*y)`
/// and its +y edge `2*(x + w*y) + 1`; plaquette `(x, y)` has `(x, y)` as its
/// lower-left corner.
pub fn build_square_torus(w: usize, h: usize) -> Result<OrientedLattice> {
    check_dims(w, h)?;
    let cell = |x: usize, y: usize| (x % w) + w * (y % h);
    let hor = |x: usize, y: usize| 2 * cell(x, y);
    let ver = |x: usize, y: usize| 2 * cell(x, y) + 1;
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            edges.push((cell(x, y), cell(x + 1, y), 0.0));
            edges.push((cell(x, y), cell(x, y + 1), 90.0));
        }
    }
    let mut faces = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            faces.push(vec![
                (hor(x, y + 1), true),
                (ver(x + 1, y), false),
                (hor(x, y), false),
                (ver(x, y), true),
            ]);
        }
    }
    OrientedLattice::assemble(
        LatticeKind::Square,
        w,
        h,
        RawComplex {
            num_vertices: w * h,
            edges,
            faces,
        },
    )
}

/// Honeycomb torus with lattice vectors `(sqrt3, 0)` and `(sqrt3/2, 3/2)`.
///
/// Cell `c = x + w*y` holds sublattice sites A = `2c` and B = `2c + 1` (B sits
/// one bond length above A). The three edges of A in cell `c` are `3c` (up, to
/// B of the same cell), `3c + 1` (down-right) and `3c + 2` (down-left), all
/// oriented A to B.
pub fn build_honeycomb_torus(w: usize, h: usize) -> Result<OrientedLattice> {
    check_dims(w, h)?;
    let cell = |x: usize, y: usize| (x % w) + w * (y % h);
    let up = |x: usize, y: usize| 3 * cell(x, y);
    let down_right = |x: usize, y: usize| 3 * cell(x, y) + 1;
    let down_left = |x: usize, y: usize| 3 * cell(x, y) + 2;
    let mut edges = Vec::with_capacity(3 * w * h);
    for y in 0..h {
        for x in 0..w {
            let a = 2 * cell(x, y);
            edges.push((a, 2 * cell(x, y) + 1, 90.0));
            edges.push((a, 2 * cell(x + 1, y + h - 1) + 1, -30.0));
            edges.push((a, 2 * cell(x, y + h - 1) + 1, 210.0));
        }
    }
    let mut faces = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            faces.push(vec![
                (up(x, y), true),
                (down_left(x, y + 1), false),
                (down_right(x, y + 1), true),
                (up(x + 1, y), false),
                (down_left(x + 1, y), true),
                (down_right(x, y), false),
            ]);
        }
    }
    OrientedLattice::assemble(
        LatticeKind::Honeycomb,
        w,
        h,
        RawComplex {
            num_vertices: 2 * w * h,
            edges,
            faces,
        },
    )
}

pub fn build_torus(kind: LatticeKind, w: usize, h: usize) -> Result<OrientedLattice> {
    match kind {
        LatticeKind::Square => build_square_torus(w, h),
        LatticeKind::Honeycomb => build_honeycomb_torus(w, h),
    }
}

/// Parses sizes of the form `3x2`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| QdError::invalid(format!("size '{s}' is not of the form WxH")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| QdError::invalid(format!("size '{s}' is not of the form WxH")))
    };
    Ok((parse(a)?, parse(b)?))
}
