//! Square lattice over the extended domain `X = Ω ∪ Γ` with precomputed
//! discrete balls.
//!
//! `Ω = (-a, a)²` is the open square where the solution is unknown and
//! `Γ` is the collar of width `collar` around it where the boundary datum
//! lives. Nodes sit at integer multiples of `h` and are ordered row-major:
//! ascending `y` first, then ascending `x`.
//!
//! Every interior node uses the same stencil shape: all lattice offsets
//! `(i, j)` with `i² + j² <= m²` where `eps = m·h`, center included. Because
//! `eps < collar`, the whole ball of an interior node is on the board, so the
//! stencil size `k` is the same everywhere.

use crate::error::{Error, Result};

/// Relative slack used when snapping `length / h` to an integer.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Collar,
}

/// A contiguous run of stencil members on one lattice row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct StencilRow {
    /// Linear offset of the leftmost member relative to the center node.
    pub start: isize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    h: f64,
    half_width: f64,
    collar: f64,
    eps: f64,
    radius_units: usize,
    /// Largest lattice index inside `X` (nodes run from `-n` to `n`).
    n: i64,
    /// Largest lattice index inside `Ω`.
    n_interior: i64,
    side: usize,
    nodes: Vec<[f64; 2]>,
    class: Vec<NodeClass>,
    interior: Vec<usize>,
    offsets: Vec<(i64, i64)>,
    linear_offsets: Vec<isize>,
    rows: Vec<StencilRow>,
}

/// Largest integer `i` with `i·h < length`, treating `length/h` within
/// `SNAP` of an integer as that integer.
fn last_index_below(length: f64, h: f64) -> i64 {
    let r = length / h;
    let nearest = r.round();
    if (r - nearest).abs() <= SNAP * nearest.abs().max(1.0) {
        nearest as i64 - 1
    } else {
        r.floor() as i64
    }
}

/// Integer offsets `(i, j)` with `i² + j² <= m²`, sorted by `(j, i)`.
pub fn lattice_ball(m: usize) -> Vec<(i64, i64)> {
    let m = m as i64;
    let mut out = Vec::new();
    for j in -m..=m {
        for i in -m..=m {
            if i * i + j * j <= m * m {
                out.push((i, j));
            }
        }
    }
    out
}

/// Builds the mesh. `eps` must be a positive integer multiple of `h` and
/// strictly smaller than `collar`.
pub fn build_mesh(h: f64, a: f64, collar: f64, eps: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveSpacing(h));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "domain half-width must be positive, got {a}"
        )));
    }
    if !(collar > 0.0) || !collar.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "collar width must be positive, got {collar}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonIntegerRadius { eps, h });
    }
    if eps >= collar {
        return Err(Error::RadiusExceedsCollar { eps, collar });
    }
    let r = eps / h;
    let m = r.round();
    if m < 1.0 || (r - m).abs() > SNAP * m {
        return Err(Error::NonIntegerRadius { eps, h });
    }
    build(h, a, collar, m as usize)
}

impl Mesh {
    /// Same as [`build_mesh`] with the radius given in mesh units.
    pub fn with_radius_units(h: f64, a: f64, collar: f64, m: usize) -> Result<Mesh> {
        if m == 0 {
            return Err(Error::NonIntegerRadius { eps: 0.0, h });
        }
        build_mesh(h, a, collar, m as f64 * h)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn radius_units(&self) -> usize {
        self.radius_units
    }

    /// Nodes per lattice row.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        self.nodes[idx]
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.class[idx] == NodeClass::Interior
    }

    /// Interior node indices in ascending order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn collar_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.is_interior(i))
    }

    /// Stencil size `k`.
    pub fn stencil_size(&self) -> usize {
        self.linear_offsets.len()
    }

    /// Lattice offsets `(di, dj)` of the stencil, in ascending node order.
    pub fn stencil_offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    pub(crate) fn linear_offsets(&self) -> &[isize] {
        &self.linear_offsets
    }

    pub(crate) fn stencil_rows(&self) -> &[StencilRow] {
        &self.rows
    }

    /// Sorted indices of the nodes within `eps` of an interior node,
    /// center included.
    pub fn stencil_of(&self, node: usize) -> Result<Vec<usize>> {
        if node >= self.len() {
            return Err(Error::NodeOutOfRange(node));
        }
        if !self.is_interior(node) {
            return Err(Error::NotInterior(node));
        }
        Ok(self
            .linear_offsets
            .iter()
            .map(|&o| (node as isize + o) as usize)
            .collect())
    }

    /// Lattice indices `(i, j)` of a node; coordinates are `(i·h, j·h)`.
    pub fn lattice_index(&self, idx: usize) -> (i64, i64) {
        let side = self.side as i64;
        let idx = idx as i64;
        (idx % side - self.n, idx / side - self.n)
    }

    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.n || j.abs() > self.n {
            return None;
        }
        Some(((j + self.n) * self.side as i64 + (i + self.n)) as usize)
    }

    /// Node closest to `(x, y)`, clamped to the board.
    pub fn nearest_node(&self, x: f64, y: f64) -> usize {
        let snap = |c: f64| ((c / self.h).round() as i64).clamp(-self.n, self.n);
        self.index_of(snap(x), snap(y)).expect("clamped index")
    }

    /// Largest lattice index `n`: nodes span `-n..=n` in each direction.
    pub fn max_index(&self) -> i64 {
        self.n
    }

    pub fn max_interior_index(&self) -> i64 {
        self.n_interior
    }
}

fn build(h: f64, a: f64, collar: f64, m: usize) -> Result<Mesh> {
    let n = last_index_below(a + collar, h);
    let n_interior = last_index_below(a, h);
    if n_interior < 0 {
        return Err(Error::InvalidGeometry(format!(
            "no lattice node lies inside the open square of half-width {a}"
        )));
    }
    if n_interior + m as i64 > n {
        // the lattice collar is too thin for the ball even though eps < collar
        return Err(Error::RadiusExceedsCollar {
            eps: m as f64 * h,
            collar,
        });
    }
    let side = (2 * n + 1) as usize;
    let mut nodes = Vec::with_capacity(side * side);
    let mut class = Vec::with_capacity(side * side);
    let mut interior = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let idx = nodes.len();
            nodes.push([i as f64 * h, j as f64 * h]);
            if i.abs() <= n_interior && j.abs() <= n_interior {
                class.push(NodeClass::Interior);
                interior.push(idx);
            } else {
                class.push(NodeClass::Collar);
            }
        }
    }

    let offsets = lattice_ball(m);
    let linear_offsets: Vec<isize> = offsets
        .iter()
        .map(|&(i, j)| (j * side as i64 + i) as isize)
        .collect();
    let mut rows: Vec<StencilRow> = Vec::new();
    let mut prev_j = None;
    for (&(_, j), &lin) in offsets.iter().zip(&linear_offsets) {
        if prev_j == Some(j) {
            rows.last_mut().expect("row started").len += 1;
        } else {
            rows.push(StencilRow { start: lin, len: 1 });
            prev_j = Some(j);
        }
    }

    Ok(Mesh {
        h,
        half_width: a,
        collar,
        eps: m as f64 * h,
        radius_units: m,
        n,
        n_interior,
        side,
        nodes,
        class,
        interior,
        offsets,
        linear_offsets,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_circle_counts() {
        for (m, k) in [(1, 5), (3, 29), (5, 81), (10, 317), (15, 709)] {
            assert_eq!(lattice_ball(m).len(), k, "m = {m}");
        }
    }

    #[test]
    fn classification_by_open_square() {
        let mesh = Mesh::with_radius_units(0.05, 1.0, 0.2, 3).unwrap();
        let origin = mesh.nearest_node(0.0, 0.0);
        assert_eq!(mesh.node(origin), [0.0, 0.0]);
        assert!(mesh.is_interior(origin));
        let edge = mesh.nearest_node(1.05, 0.0);
        assert!((mesh.node(edge)[0] - 1.05).abs() < 1e-12);
        assert_eq!(mesh.class(edge), NodeClass::Collar);
        // x = 1 lies on the boundary of the open square
        assert!(!mesh.is_interior(mesh.nearest_node(1.0, 0.0)));
        assert!(mesh.is_interior(mesh.nearest_node(0.95, -0.95)));
    }

    #[test]
    fn h_point_one_layout() {
        // eps must stay below the collar, so use a wider collar than 0.2
        let mesh = Mesh::with_radius_units(0.1, 1.0, 0.4, 3).unwrap();
        assert_eq!(mesh.max_index(), 13);
        assert_eq!(mesh.max_interior_index(), 9);
        assert_eq!(mesh.interior_nodes().len(), 19 * 19);
        assert!(mesh.is_interior(mesh.nearest_node(0.0, 0.0)));
        assert!(!mesh.is_interior(mesh.nearest_node(1.05, 0.0)));
    }

    #[test]
    fn stencils_stay_on_board_and_contain_center() {
        let mesh = Mesh::with_radius_units(0.04, 1.0, 0.2, 4).unwrap();
        for &p in mesh.interior_nodes() {
            let s = mesh.stencil_of(p).unwrap();
            assert_eq!(s.len(), 49);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.binary_search(&p).is_ok());
            let [px, py] = mesh.node(p);
            for q in s {
                let [qx, qy] = mesh.node(q);
                assert!(((qx - px).powi(2) + (qy - py).powi(2)).sqrt() <= mesh.epsilon() + 1e-12);
            }
        }
    }

    #[test]
    fn unit_radius_is_five_point() {
        let mesh = Mesh::with_radius_units(0.1, 1.0, 0.2, 1).unwrap();
        let c = mesh.nearest_node(0.0, 0.0);
        let s = mesh.stencil_of(c).unwrap();
        let side = mesh.side();
        assert_eq!(s, vec![c - side, c - 1, c, c + 1, c + side]);
    }

    #[test]
    fn stencil_of_rejects_collar() {
        let mesh = Mesh::with_radius_units(0.1, 1.0, 0.2, 1).unwrap();
        assert!(matches!(mesh.stencil_of(0), Err(Error::NotInterior(0))));
        assert!(matches!(
            mesh.stencil_of(mesh.len()),
            Err(Error::NodeOutOfRange(_))
        ));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            build_mesh(0.0, 1.0, 0.2, 0.1),
            Err(Error::NonPositiveSpacing(_))
        ));
        assert!(matches!(
            build_mesh(0.1, 1.0, 0.2, 0.2),
            Err(Error::RadiusExceedsCollar { .. })
        ));
        assert!(matches!(
            build_mesh(0.1, 1.0, 0.2, 0.15),
            Err(Error::NonIntegerRadius { .. })
        ));
        assert!(matches!(
            build_mesh(0.1, 1.0, 0.2, 0.05),
            Err(Error::NonIntegerRadius { .. })
        ));
    }

    #[test]
    fn offset_moments_vanish() {
        for m in [1, 3, 5, 10, 15] {
            let ball = lattice_ball(m);
            let sx: i64 = ball.iter().map(|o| o.0).sum();
            let sy: i64 = ball.iter().map(|o| o.1).sum();
            let sq: i64 = ball.iter().map(|o| o.0 * o.0 - o.1 * o.1).sum();
            let sxy: i64 = ball.iter().map(|o| o.0 * o.1).sum();
            assert_eq!((sx, sy, sq, sxy), (0, 0, 0, 0));
        }
    }

    #[test]
    fn deterministic_layout() {
        let a = build_mesh(0.05, 1.0, 0.2, 0.15).unwrap();
        let b = build_mesh(0.05, 1.0, 0.2, 0.15).unwrap();
        assert_eq!(a, b);
    }
}
