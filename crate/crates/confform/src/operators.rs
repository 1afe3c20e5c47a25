//! Discretization of the Laplace-Beltrami operator, area and length
//! measures, and curvature integrals on a [`TriangleMesh`].
//!
//! Curvatures are stored as integrals (angle defects), not densities, so the
//! discrete Gauss-Bonnet identity
//! `sum(integrated_gauss) + sum(integrated_geodesic) = 2 pi chi`
//! holds combinatorially, up to rounding of the angle sums.

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::scalar::{kahan_sum, real, Real};
use crate::sparse::{SymmetricBuilder, SymmetricCsr};

/// Cotangent stiffness, lumped masses, and integrated curvatures of a mesh.
///
/// Immutable after construction; safe to share across concurrent solves.
#[derive(Debug, Clone)]
pub struct DiscreteOperators<T> {
    stiffness: SymmetricCsr<T>,
    interior_mass: Vec<T>,
    boundary_mass: Vec<T>,
    integrated_gauss: Vec<T>,
    integrated_geodesic: Vec<T>,
    is_boundary: Vec<bool>,
    euler_characteristic: i64,
    base_area: T,
    base_boundary_length: T,
    quality: MeshQuality<T>,
}

/// Shape diagnostics emitted alongside the operators. Negative cotangent
/// weights are allowed; on such meshes the discrete maximum principle may
/// fail, which matters for the pointwise monotonicity properties.
#[derive(Debug, Clone)]
pub struct MeshQuality<T> {
    pub min_angle: T,
    pub negative_weight_edges: usize,
    pub min_area: T,
    pub mean_area: T,
}

/// Per-vertex log conformal factor `u`; the unknown of the curvature solves.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalState<T> {
    u: Vec<T>,
}

impl<T: Real> ConformalState<T> {
    pub fn zeros(n: usize) -> Self {
        ConformalState {
            u: vec![T::zero(); n],
        }
    }

    pub fn constant(n: usize, value: T) -> Self {
        ConformalState { u: vec![value; n] }
    }

    pub fn from_vec(u: Vec<T>) -> Self {
        ConformalState { u }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.u
    }

    /// Returns `u + t` at every vertex.
    pub fn shifted(&self, t: T) -> Self {
        ConformalState {
            u: self.u.iter().map(|&x| x + t).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        let mut best = T::zero();
        for (&a, &b) in self.u.iter().zip(&other.u) {
            let d = (a - b).abs();
            if d > best {
                best = d;
            }
        }
        best
    }
}

/// Corner angles of a triangle with side lengths `l` (each opposite the
/// corresponding corner), via the law of cosines.
fn corner_angles<T: Real>(l: [T; 3]) -> [T; 3] {
    let mut angles = [T::zero(); 3];
    for m in 0..3 {
        let a = l[m];
        let b = l[(m + 1) % 3];
        let c = l[(m + 2) % 3];
        let cos = ((b * b + c * c - a * a) / (real::<T>(2.0) * b * c))
            .min(T::one())
            .max(-T::one());
        angles[m] = cos.acos();
    }
    angles
}

/// Numerically stable Heron area from side lengths.
fn triangle_area<T: Real>(l: [T; 3]) -> T {
    let mut s = l;
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let (a, b, c) = (s[0], s[1], s[2]);
    let expr = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    real::<T>(0.25) * expr.max(T::zero()).sqrt()
}

/// Assembles the discrete operators of a valid mesh.
///
/// Fails when a triangle's area falls below `1e-14` of the mean area.
pub fn build_operators<T: Real>(mesh: &TriangleMesh<T>) -> Result<DiscreteOperators<T>> {
    let n = mesh.vertex_count();
    let nt = mesh.triangle_count();

    let areas: Vec<T> = (0..nt).map(|t| triangle_area(mesh.triangle_lengths(t))).collect();
    let mean_area = kahan_sum(areas.iter().copied()) / real::<T>(nt as f64);
    let threshold = real::<T>(1e-14) * mean_area;
    let mut min_area = areas[0];
    for (t, &area) in areas.iter().enumerate() {
        if area < min_area {
            min_area = area;
        }
        if area < threshold {
            return Err(Error::DegenerateTriangle {
                tri: t,
                area: area.to_f64().unwrap_or(0.0),
                mean: mean_area.to_f64().unwrap_or(0.0),
                threshold: 1e-14,
            });
        }
    }

    let mut builder = SymmetricBuilder::new(n);
    let mut angle_sum = vec![T::zero(); n];
    let mut interior_mass = vec![T::zero(); n];
    let third = T::one() / real::<T>(3.0);
    let half = real::<T>(0.5);
    let mut min_angle = T::PI();

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let l = mesh.triangle_lengths(t);
        let angles = corner_angles(l);
        for m in 0..3 {
            let v = tri[m];
            angle_sum[v] += angles[m];
            interior_mass[v] += third * areas[t];
            if angles[m] < min_angle {
                min_angle = angles[m];
            }
            // Cotangent weight for the edge opposite this corner.
            let w = half * angles[m].cos() / angles[m].sin();
            let i = tri[(m + 1) % 3];
            let j = tri[(m + 2) % 3];
            builder.add_off_diagonal(i, j, -w);
            builder.add_diagonal(i, w);
            builder.add_diagonal(j, w);
        }
    }
    let stiffness = builder.build();

    let mut negative_weight_edges = 0usize;
    for i in 0..n {
        let (cols, vals) = stiffness.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j > i && v > T::zero() {
                negative_weight_edges += 1;
            }
        }
    }

    let pi = T::PI();
    let two_pi = pi + pi;
    let mut integrated_gauss = vec![T::zero(); n];
    let mut integrated_geodesic = vec![T::zero(); n];
    let mut is_boundary = vec![false; n];
    for &v in mesh.boundary_loop() {
        is_boundary[v] = true;
    }
    for v in 0..n {
        if is_boundary[v] {
            integrated_geodesic[v] = pi - angle_sum[v];
        } else {
            integrated_gauss[v] = two_pi - angle_sum[v];
        }
    }

    let loop_vertices = mesh.boundary_loop();
    let nb = loop_vertices.len();
    let mut boundary_mass = vec![T::zero(); n];
    for i in 0..nb {
        let a = loop_vertices[i];
        let b = loop_vertices[(i + 1) % nb];
        let e = mesh.edge_index(a, b).expect("boundary edge");
        let l = half * mesh.edge_lengths()[e];
        boundary_mass[a] += l;
        boundary_mass[b] += l;
    }

    let base_area = kahan_sum(areas.iter().copied());
    let base_boundary_length = mesh.base_boundary_length();

    Ok(DiscreteOperators {
        stiffness,
        interior_mass,
        boundary_mass,
        integrated_gauss,
        integrated_geodesic,
        is_boundary,
        euler_characteristic: mesh.euler_characteristic(),
        base_area,
        base_boundary_length,
        quality: MeshQuality {
            min_angle,
            negative_weight_edges,
            min_area,
            mean_area,
        },
    })
}

impl<T: Real> DiscreteOperators<T> {
    pub fn vertex_count(&self) -> usize {
        self.interior_mass.len()
    }

    pub fn stiffness(&self) -> &SymmetricCsr<T> {
        &self.stiffness
    }

    pub fn interior_mass(&self) -> &[T] {
        &self.interior_mass
    }

    /// Half the two incident boundary edge lengths; zero off the boundary.
    pub fn boundary_mass(&self) -> &[T] {
        &self.boundary_mass
    }

    /// Angle defect `2 pi - sum of angles` per interior vertex; zero on the
    /// boundary.
    pub fn integrated_gauss(&self) -> &[T] {
        &self.integrated_gauss
    }

    /// Angle defect `pi - sum of angles` per boundary vertex; zero inside.
    pub fn integrated_geodesic(&self) -> &[T] {
        &self.integrated_geodesic
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler_characteristic
    }

    pub fn base_area(&self) -> T {
        self.base_area
    }

    pub fn base_boundary_length(&self) -> T {
        self.base_boundary_length
    }

    pub fn quality(&self) -> &MeshQuality<T> {
        &self.quality
    }

    /// `sum(integrated_gauss) + sum(integrated_geodesic)`, which equals
    /// `2 pi chi` up to rounding.
    pub fn total_curvature(&self) -> T {
        kahan_sum(
            self.integrated_gauss
                .iter()
                .chain(self.integrated_geodesic.iter())
                .copied(),
        )
    }

    pub fn max_integrated_gauss(&self) -> T {
        self.integrated_gauss
            .iter()
            .fold(T::zero(), |acc, &g| acc.max(g.abs()))
    }

    /// Conformal area and boundary length of the metric `e^{2u} g`.
    pub fn conformal_measures(&self, state: &ConformalState<T>) -> (T, T) {
        assert_eq!(state.len(), self.vertex_count(), "state dimension mismatch");
        let u = state.values();
        let area = kahan_sum(
            self.interior_mass
                .iter()
                .zip(u)
                .map(|(&m, &ui)| m * (ui + ui).exp()),
        );
        let length = kahan_sum(
            self.boundary_mass
                .iter()
                .zip(u)
                .enumerate()
                .filter(|&(v, _)| self.is_boundary[v])
                .map(|(_, (&b, &ui))| b * ui.exp()),
        );
        (area, length)
    }
}

/// Free-function form of [`DiscreteOperators::conformal_measures`].
pub fn conformal_measures<T: Real>(
    ops: &DiscreteOperators<T>,
    state: &ConformalState<T>,
) -> (T, T) {
    ops.conformal_measures(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_flat_torus_with_hole, generate_torus_with_hole, parse_off, TriangleMesh};

    fn square_mesh() -> TriangleMesh<f64> {
        let off = "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 3\n3 0 3 2\n";
        let (pos, tris) = parse_off::<f64>(off).unwrap();
        TriangleMesh::from_positions(&pos, tris).unwrap()
    }

    #[test]
    fn flat_square_gauss_bonnet() {
        let mesh = square_mesh();
        let ops = build_operators(&mesh).unwrap();
        // No interior vertices; the four corner turning angles sum to 2 pi.
        let total: f64 = ops.integrated_geodesic().iter().sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!(ops.integrated_gauss().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn equilateral_triangle_turning_angles() {
        let pos = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 3.0f64.sqrt() / 2.0, 0.0],
        ];
        let mesh = TriangleMesh::from_positions(&pos, vec![[0, 1, 2]]).unwrap();
        let ops = build_operators(&mesh).unwrap();
        for v in 0..3 {
            assert!(
                (ops.integrated_geodesic()[v] - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-14
            );
        }
    }

    #[test]
    fn torus_with_hole_gauss_bonnet_exact() {
        let mesh = generate_torus_with_hole::<f64>(2.0, 0.7, 16, 16, 6).unwrap();
        let ops = build_operators(&mesh).unwrap();
        let total = ops.total_curvature();
        assert!(
            (total + 2.0 * std::f64::consts::PI).abs() < 1e-12,
            "total curvature {total}"
        );
    }

    #[test]
    fn stiffness_kernel_contains_constants() {
        let mesh = generate_torus_with_hole::<f64>(2.0, 0.7, 12, 12, 6).unwrap();
        let ops = build_operators(&mesh).unwrap();
        let n = ops.vertex_count();
        let ones = vec![1.0; n];
        let mut out = vec![0.0; n];
        ops.stiffness().mul_vec(&ones, &mut out);
        let max = out.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert!(max <= 1e-12 * ops.stiffness().max_abs_row_sum());
    }

    #[test]
    fn measures_scale_with_constant_shift() {
        let mesh = generate_torus_with_hole::<f64>(2.0, 0.7, 10, 10, 6).unwrap();
        let ops = build_operators(&mesh).unwrap();
        let zero = ConformalState::zeros(ops.vertex_count());
        let (a0, l0) = ops.conformal_measures(&zero);
        assert!((a0 - ops.base_area()).abs() < 1e-12 * a0);
        assert!((l0 - ops.base_boundary_length()).abs() < 1e-12 * l0);

        let shifted = ConformalState::constant(ops.vertex_count(), 2.0f64.ln());
        let (a2, l2) = ops.conformal_measures(&shifted);
        assert!((a2 - 4.0 * a0).abs() < 1e-12 * a2);
        assert!((l2 - 2.0 * l0).abs() < 1e-12 * l2);
    }

    #[test]
    fn flat_torus_interior_gauss_vanishes() {
        let mesh = generate_flat_torus_with_hole::<f64>(10, 10, 6).unwrap();
        let ops = build_operators(&mesh).unwrap();
        for v in 0..ops.vertex_count() {
            if !ops.is_boundary(v) {
                assert!(ops.integrated_gauss()[v].abs() < 1e-13);
            }
        }
        assert_eq!(ops.quality().negative_weight_edges, 0);
    }

    #[test]
    fn operators_instantiate_in_f32() {
        let mesh = generate_flat_torus_with_hole::<f32>(8, 8, 6).unwrap();
        let ops = build_operators(&mesh).unwrap();
        let total = ops.total_curvature();
        assert!((total + 2.0 * std::f32::consts::PI).abs() < 1e-4, "{total}");
        let (area, length) = ops.conformal_measures(&ConformalState::zeros(ops.vertex_count()));
        assert!(area > 0.0 && length > 0.0);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        // Needle triangle (area ~2e-8) next to a huge one, putting the
        // needle below 1e-14 of the mean area while keeping the strict
        // triangle inequality representable.
        let mesh = TriangleMesh::from_edge_lengths(4, vec![[0, 1, 2], [1, 0, 3]], |a, b| {
            match (a.min(b), a.max(b)) {
                (0, 1) => 2.0,
                (0, 2) | (1, 2) => 1.0 + 3e-16,
                (0, 3) | (1, 3) => 1.0e7,
                _ => unreachable!(),
            }
        })
        .unwrap();
        let err = build_operators(&mesh).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { .. }), "{err}");
    }
}
