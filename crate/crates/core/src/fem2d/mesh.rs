use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Dirichlet support: the listed displacement components are held at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Side { side: Side, fix_x: bool, fix_y: bool },
    Node { node: usize, fix_x: bool, fix_y: bool },
}

impl Support {
    pub fn clamped(side: Side) -> Self {
        Support::Side {
            side,
            fix_x: true,
            fix_y: true,
        }
    }
}

/// Segment of a side, between coordinates `from` and `to` measured along
/// that side (y for left/right, x for bottom/top), carrying the traction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadPatch {
    pub side: Side,
    pub from: f64,
    pub to: f64,
}

/// Structured rectangular mesh of bilinear quadrilaterals.
///
/// Nodes are numbered column by column (`node = ix * (ny + 1) + iy`) so the
/// stiffness bandwidth follows the short side; elements likewise
/// (`elem = ix * ny + iy`). Element corners run counterclockwise from the
/// lower left.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub supports: Vec<Support>,
    pub load: Option<LoadPatch>,
}

impl Mesh {
    pub fn new(width: f64, height: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Precondition(format!(
                "mesh needs at least 2x2 cells, got {nx}x{ny}"
            )));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::Precondition(format!(
                "domain size must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            nx,
            ny,
            supports: Vec::new(),
            load: None,
        })
    }

    /// Cantilever: left edge clamped, load patch of height `patch` centered
    /// on the right edge.
    pub fn cantilever(width: f64, height: f64, nx: usize, ny: usize, patch: f64) -> Result<Self> {
        let mut mesh = Self::new(width, height, nx, ny)?;
        mesh.supports.push(Support::clamped(Side::Left));
        let mid = 0.5 * height;
        mesh.load = Some(LoadPatch {
            side: Side::Right,
            from: mid - 0.5 * patch,
            to: mid + 0.5 * patch,
        });
        Ok(mesh)
    }

    pub fn hx(&self) -> f64 {
        self.width / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.height / self.ny as f64
    }

    pub fn element_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        ix * (self.ny + 1) + iy
    }

    #[inline]
    pub fn node_grid(&self, node: usize) -> (usize, usize) {
        (node / (self.ny + 1), node % (self.ny + 1))
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let (ix, iy) = self.node_grid(node);
        [ix as f64 * self.hx(), iy as f64 * self.hy()]
    }

    #[inline]
    pub fn element(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    #[inline]
    pub fn element_grid(&self, elem: usize) -> (usize, usize) {
        (elem / self.ny, elem % self.ny)
    }

    /// Corner nodes, counterclockwise from lower left.
    #[inline]
    pub fn element_nodes(&self, elem: usize) -> [usize; 4] {
        let (ix, iy) = self.element_grid(elem);
        [
            self.node(ix, iy),
            self.node(ix + 1, iy),
            self.node(ix + 1, iy + 1),
            self.node(ix, iy + 1),
        ]
    }

    pub fn element_centroid(&self, elem: usize) -> [f64; 2] {
        let (ix, iy) = self.element_grid(elem);
        [(ix as f64 + 0.5) * self.hx(), (iy as f64 + 0.5) * self.hy()]
    }

    /// Lower-left and upper-right corners.
    pub fn element_bounds(&self, elem: usize) -> ([f64; 2], [f64; 2]) {
        let (ix, iy) = self.element_grid(elem);
        let (hx, hy) = (self.hx(), self.hy());
        (
            [ix as f64 * hx, iy as f64 * hy],
            [(ix + 1) as f64 * hx, (iy + 1) as f64 * hy],
        )
    }

    /// Nodes on a side, ordered by increasing coordinate along it.
    pub fn side_nodes(&self, side: Side) -> Vec<usize> {
        match side {
            Side::Left => (0..=self.ny).map(|iy| self.node(0, iy)).collect(),
            Side::Right => (0..=self.ny).map(|iy| self.node(self.nx, iy)).collect(),
            Side::Bottom => (0..=self.nx).map(|ix| self.node(ix, 0)).collect(),
            Side::Top => (0..=self.nx).map(|ix| self.node(ix, self.ny)).collect(),
        }
    }

    pub fn side_spacing(&self, side: Side) -> f64 {
        match side {
            Side::Left | Side::Right => self.hy(),
            Side::Bottom | Side::Top => self.hx(),
        }
    }

    /// Constrained degrees of freedom, sorted and deduplicated.
    pub fn fixed_dofs(&self) -> Vec<usize> {
        let mut dofs = Vec::new();
        let mut push = |node: usize, fx: bool, fy: bool| {
            if fx {
                dofs.push(2 * node);
            }
            if fy {
                dofs.push(2 * node + 1);
            }
        };
        for s in &self.supports {
            match *s {
                Support::Side { side, fix_x, fix_y } => {
                    for n in self.side_nodes(side) {
                        push(n, fix_x, fix_y);
                    }
                }
                Support::Node { node, fix_x, fix_y } => push(node, fix_x, fix_y),
            }
        }
        dofs.sort_unstable();
        dofs.dedup();
        dofs
    }

    /// Consistent nodal forces of a uniform traction on the load patch.
    pub fn traction_forces(&self, traction: [f64; 2]) -> Vec<f64> {
        let mut f = vec![0.0; self.n_dofs()];
        let Some(patch) = self.load else {
            return f;
        };
        let nodes = self.side_nodes(patch.side);
        let h = self.side_spacing(patch.side);
        let (lo, hi) = (patch.from.min(patch.to), patch.from.max(patch.to));
        for (k, pair) in nodes.windows(2).enumerate() {
            let (sa, sb) = (k as f64 * h, (k + 1) as f64 * h);
            let (a, b) = (sa.max(lo), sb.min(hi));
            if b <= a {
                continue;
            }
            // ∫ N_a and ∫ N_b over [a, b] with linear shape functions on [sa, sb].
            let int_nb = ((b - sa).powi(2) - (a - sa).powi(2)) / (2.0 * h);
            let int_na = (b - a) - int_nb;
            for c in 0..2 {
                f[2 * pair[0] + c] += traction[c] * int_na;
                f[2 * pair[1] + c] += traction[c] * int_nb;
            }
        }
        f
    }
}

/// One value per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField<T>(pub Vec<T>);

impl<T: Clone> ElementField<T> {
    pub fn filled(mesh: &Mesh, value: T) -> Self {
        Self(vec![value; mesh.n_elements()])
    }
}

impl<T> ElementField<T> {
    pub fn from_vec(mesh: &Mesh, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.n_elements() {
            return Err(Error::Precondition(format!(
                "element field has {} values, mesh has {} elements",
                values.len(),
                mesh.n_elements()
            )));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for ElementField<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for ElementField<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

/// One scalar per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField(pub Vec<f64>);

impl NodeField {
    pub fn filled(mesh: &Mesh, value: f64) -> Self {
        Self(vec![value; mesh.n_nodes()])
    }

    pub fn from_vec(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::Precondition(format!(
                "node field has {} values, mesh has {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        Ok(Self(values))
    }

    pub fn from_fn(mesh: &Mesh, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        Self((0..mesh.n_nodes()).map(|n| f(mesh.node_coords(n))).collect())
    }

    /// Element value as the mean of its four corners.
    pub fn element_mean(&self, mesh: &Mesh, elem: usize) -> f64 {
        let n = mesh.element_nodes(elem);
        0.25 * (self.0[n[0]] + self.0[n[1]] + self.0[n[2]] + self.0[n[3]])
    }

    pub fn to_elements(&self, mesh: &Mesh) -> ElementField<f64> {
        ElementField(
            (0..mesh.n_elements())
                .map(|e| self.element_mean(mesh, e))
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &NodeField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for NodeField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for NodeField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Area-weighted average of element values onto nodes. On a uniform grid
/// this is the plain mean over the (one to four) adjacent elements.
pub fn elements_to_nodes(mesh: &Mesh, values: &[f64]) -> NodeField {
    let mut sum = vec![0.0; mesh.n_nodes()];
    let mut weight = vec![0.0; mesh.n_nodes()];
    let area = mesh.element_area();
    for (e, v) in values.iter().enumerate() {
        for n in mesh.element_nodes(e) {
            sum[n] += area * v;
            weight[n] += area;
        }
    }
    NodeField(sum.iter().zip(&weight).map(|(s, w)| s / w).collect())
}
