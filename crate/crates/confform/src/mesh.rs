//! Triangle meshes of compact orientable surfaces with exactly one boundary
//! loop.
//!
//! The representation is intrinsic: connectivity plus one positive length per
//! undirected edge. Everything downstream (operators, solves, curvature maps)
//! consumes lengths only, so meshes may come from an embedded OFF file or be
//! built combinatorially with prescribed lengths.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

const NONE: usize = usize::MAX;

/// Connectivity and base edge lengths of a compact surface with one boundary
/// component.
#[derive(Debug, Clone)]
pub struct TriangleMesh<T> {
    vertex_count: usize,
    triangles: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_lengths: Vec<T>,
    /// `tri_edges[t][m]` is the edge opposite corner `m` of triangle `t`.
    tri_edges: Vec<[usize; 3]>,
    boundary_loop: Vec<usize>,
    is_boundary: Vec<bool>,
}

impl<T: Real> TriangleMesh<T> {
    /// Builds a mesh from vertex positions in 3-space; edge lengths are the
    /// extrinsic distances.
    pub fn from_positions(positions: &[[T; 3]], triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        Self::from_edge_lengths(n, triangles, |a, b| {
            let pa = positions[a];
            let pb = positions[b];
            let dx = pa[0] - pb[0];
            let dy = pa[1] - pb[1];
            let dz = pa[2] - pb[2];
            (dx * dx + dy * dy + dz * dz).sqrt()
        })
    }

    /// Builds a mesh with lengths supplied per undirected edge. The closure
    /// is called once per edge with `a < b`.
    pub fn from_edge_lengths(
        vertex_count: usize,
        triangles: Vec<[usize; 3]>,
        mut length: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::MeshFormat("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertex_count {
                    return Err(Error::MeshFormat(format!(
                        "triangle {t} references vertex {v} out of range {vertex_count}"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::MeshFormat(format!(
                    "triangle {t} has a repeated vertex"
                )));
            }
        }

        let mut used = vec![false; vertex_count];
        for tri in &triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::MeshFormat(format!(
                "vertex {v} is not used by any triangle"
            )));
        }

        // Undirected edge list, sorted for deterministic binary-search lookup.
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(triangles.len() * 3);
        for tri in &triangles {
            for m in 0..3 {
                let a = tri[(m + 1) % 3];
                let b = tri[(m + 2) % 3];
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let edge_index = |a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            edges.binary_search(&key).expect("edge present")
        };

        let mut tri_edges = vec![[0usize; 3]; triangles.len()];
        // Per undirected edge: counts of the two directed occurrences.
        let mut dir_fwd = vec![0usize; edges.len()];
        let mut dir_bwd = vec![0usize; edges.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for m in 0..3 {
                let a = tri[(m + 1) % 3];
                let b = tri[(m + 2) % 3];
                let e = edge_index(a, b);
                tri_edges[t][m] = e;
                if a < b {
                    dir_fwd[e] += 1;
                } else {
                    dir_bwd[e] += 1;
                }
            }
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            let count = dir_fwd[e] + dir_bwd[e];
            if count > 2 {
                return Err(Error::NonManifoldEdge { a, b, count });
            }
            if count == 2 && (dir_fwd[e] != 1 || dir_bwd[e] != 1) {
                return Err(Error::InconsistentOrientation { a, b });
            }
        }

        // Boundary half-edges keep the direction induced by their unique face.
        let mut boundary_next = vec![NONE; vertex_count];
        let mut boundary_edge_count = 0usize;
        for tri in &triangles {
            for m in 0..3 {
                let a = tri[(m + 1) % 3];
                let b = tri[(m + 2) % 3];
                let e = edge_index(a, b);
                if dir_fwd[e] + dir_bwd[e] == 1 {
                    if boundary_next[a] != NONE {
                        return Err(Error::NonManifoldVertex(a));
                    }
                    boundary_next[a] = b;
                    boundary_edge_count += 1;
                }
            }
        }
        if boundary_edge_count == 0 {
            return Err(Error::NoBoundary);
        }

        let start = boundary_next
            .iter()
            .position(|&n| n != NONE)
            .expect("boundary vertex exists");
        let mut boundary_loop = vec![start];
        let mut cur = boundary_next[start];
        while cur != start {
            if cur == NONE || boundary_loop.len() > boundary_edge_count {
                return Err(Error::MeshFormat(
                    "boundary walk failed to close into a loop".into(),
                ));
            }
            boundary_loop.push(cur);
            cur = boundary_next[cur];
        }
        if boundary_loop.len() != boundary_edge_count {
            // Count the remaining loops for the diagnostic.
            let mut seen = vec![false; vertex_count];
            for &v in &boundary_loop {
                seen[v] = true;
            }
            let mut loops = 1usize;
            for v in 0..vertex_count {
                if boundary_next[v] != NONE && !seen[v] {
                    loops += 1;
                    let mut w = v;
                    while !seen[w] {
                        seen[w] = true;
                        w = boundary_next[w];
                    }
                }
            }
            return Err(Error::MultipleBoundaries(loops));
        }
        let rotate = boundary_loop
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        boundary_loop.rotate_left(rotate);

        let mut is_boundary = vec![false; vertex_count];
        for &v in &boundary_loop {
            is_boundary[v] = true;
        }

        // Vertex connectivity.
        let mut adj_ptr = vec![0usize; vertex_count + 1];
        for &(a, b) in &edges {
            adj_ptr[a + 1] += 1;
            adj_ptr[b + 1] += 1;
        }
        for v in 0..vertex_count {
            adj_ptr[v + 1] += adj_ptr[v];
        }
        let mut adj = vec![0usize; edges.len() * 2];
        let mut cursor = adj_ptr[..vertex_count].to_vec();
        for &(a, b) in &edges {
            adj[cursor[a]] = b;
            cursor[a] += 1;
            adj[cursor[b]] = a;
            cursor[b] += 1;
        }
        let mut visited = vec![false; vertex_count];
        let mut stack = vec![triangles[0][0]];
        visited[triangles[0][0]] = true;
        let mut reached = 1usize;
        while let Some(v) = stack.pop() {
            for &w in &adj[adj_ptr[v]..adj_ptr[v + 1]] {
                if !visited[w] {
                    visited[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        if reached != vertex_count {
            return Err(Error::NotConnected);
        }

        // Umbrella test: the faces incident to each vertex must form a single
        // fan under shared-edge adjacency.
        let mut vf_ptr = vec![0usize; vertex_count + 1];
        for tri in &triangles {
            for &v in tri {
                vf_ptr[v + 1] += 1;
            }
        }
        for v in 0..vertex_count {
            vf_ptr[v + 1] += vf_ptr[v];
        }
        let mut vf = vec![0usize; triangles.len() * 3];
        let mut vf_cursor = vf_ptr[..vertex_count].to_vec();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vf[vf_cursor[v]] = t;
                vf_cursor[v] += 1;
            }
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for v in 0..vertex_count {
            let faces = &vf[vf_ptr[v]..vf_ptr[v + 1]];
            pairs.clear();
            for (slot, &t) in faces.iter().enumerate() {
                let tri = triangles[t];
                for &w in &tri {
                    if w != v {
                        pairs.push((w, slot));
                    }
                }
            }
            pairs.sort_unstable();
            let mut group = vec![NONE; faces.len()];
            fn find(group: &mut [usize], mut x: usize) -> usize {
                while group[x] != x {
                    group[x] = group[group[x]];
                    x = group[x];
                }
                x
            }
            for (i, g) in group.iter_mut().enumerate() {
                *g = i;
            }
            let mut components = faces.len();
            let mut i = 0;
            while i + 1 < pairs.len() {
                if pairs[i].0 == pairs[i + 1].0 {
                    let a = find(&mut group, pairs[i].1);
                    let b = find(&mut group, pairs[i + 1].1);
                    if a != b {
                        group[a] = b;
                        components -= 1;
                    }
                    i += 2;
                } else {
                    i += 1;
                }
            }
            if components != 1 {
                return Err(Error::NonManifoldVertex(v));
            }
        }

        let mut edge_lengths = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let l = length(a, b);
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::MeshFormat(format!(
                    "edge ({a}, {b}) has non-positive or non-finite length"
                )));
            }
            edge_lengths.push(l);
        }
        for (t, te) in tri_edges.iter().enumerate() {
            let l0 = edge_lengths[te[0]];
            let l1 = edge_lengths[te[1]];
            let l2 = edge_lengths[te[2]];
            if !(l0 + l1 > l2 && l1 + l2 > l0 && l2 + l0 > l1) {
                return Err(Error::TriangleInequality {
                    tri: t,
                    l0: l0.to_f64().unwrap_or(f64::NAN),
                    l1: l1.to_f64().unwrap_or(f64::NAN),
                    l2: l2.to_f64().unwrap_or(f64::NAN),
                });
            }
        }

        Ok(TriangleMesh {
            vertex_count,
            triangles,
            edges,
            edge_lengths,
            tri_edges,
            boundary_loop,
            is_boundary,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[T] {
        &self.edge_lengths
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    /// Side lengths of triangle `t`, indexed to oppose each corner.
    pub fn triangle_lengths(&self, t: usize) -> [T; 3] {
        let te = self.tri_edges[t];
        [
            self.edge_lengths[te[0]],
            self.edge_lengths[te[1]],
            self.edge_lengths[te[2]],
        ]
    }

    /// Cyclically ordered vertices of the single boundary component, starting
    /// from the smallest boundary vertex index.
    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Genus from `chi = 1 - 2 genus` (one boundary component).
    pub fn genus(&self) -> i64 {
        (1 - self.euler_characteristic()) / 2
    }

    /// Total length of the boundary loop in the base metric.
    pub fn base_boundary_length(&self) -> T {
        let n = self.boundary_loop.len();
        let mut total = T::zero();
        for i in 0..n {
            let a = self.boundary_loop[i];
            let b = self.boundary_loop[(i + 1) % n];
            let e = self.edge_index(a, b).expect("boundary edge");
            total += self.edge_lengths[e];
        }
        total
    }
}

// ---------------------------------------------------------------------------
// OFF ingestion and emission
// ---------------------------------------------------------------------------

/// Parses ASCII OFF text: header `OFF`, a `V F E` counts line, `V` coordinate
/// lines, then `F` faces of the form `3 i j k` (0-based).
pub fn parse_off<T: Real>(text: &str) -> Result<(Vec<[T; 3]>, Vec<[usize; 3]>)> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());

    let header = lines.next().ok_or_else(|| Error::MeshFormat("empty file".into()))?;
    if header != "OFF" {
        return Err(Error::MeshFormat(format!(
            "expected OFF header, found {header:?}"
        )));
    }
    let counts = lines
        .next()
        .ok_or_else(|| Error::MeshFormat("missing counts line".into()))?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() != 3 {
        return Err(Error::MeshFormat("counts line must be \"V F E\"".into()));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| Error::MeshFormat("bad vertex count".into()))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| Error::MeshFormat("bad face count".into()))?;

    let mut positions = Vec::with_capacity(nv);
    for i in 0..nv {
        let line = lines
            .next()
            .ok_or_else(|| Error::MeshFormat(format!("missing vertex line {i}")))?;
        let mut coords = [T::zero(); 3];
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::MeshFormat(format!(
                "vertex line {i} must have 3 coordinates"
            )));
        }
        for (k, f) in fields.iter().enumerate() {
            let x: f64 = f
                .parse()
                .map_err(|_| Error::MeshFormat(format!("bad coordinate {f:?} on vertex line {i}")))?;
            coords[k] = real(x);
        }
        positions.push(coords);
    }

    let mut triangles = Vec::with_capacity(nf);
    for i in 0..nf {
        let line = lines
            .next()
            .ok_or_else(|| Error::MeshFormat(format!("missing face line {i}")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "3" {
            return Err(Error::MeshFormat(format!(
                "face line {i} must be \"3 i j k\""
            )));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = fields[k + 1]
                .parse()
                .map_err(|_| Error::MeshFormat(format!("bad index on face line {i}")))?;
        }
        triangles.push(tri);
    }
    if lines.next().is_some() {
        return Err(Error::MeshFormat("trailing content after faces".into()));
    }
    Ok((positions, triangles))
}

/// Loads and validates an OFF mesh from disk.
pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<T>> {
    let text = std::fs::read_to_string(path)?;
    let (positions, triangles) = parse_off::<T>(&text)?;
    TriangleMesh::from_positions(&positions, triangles)
}

/// Serializes positions and faces as OFF text with 9 significant digits.
pub fn off_string<T: Real>(positions: &[[T; 3]], triangles: &[[usize; 3]]) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!("{} {} {}\n", positions.len(), triangles.len(), 0));
    for p in positions {
        out.push_str(&format!("{:.8e} {:.8e} {:.8e}\n", p[0], p[1], p[2]));
    }
    for t in triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

/// Writes an OFF file to disk.
pub fn write_off<T: Real>(
    path: impl AsRef<Path>,
    positions: &[[T; 3]],
    triangles: &[[usize; 3]],
) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(off_string(positions, triangles).as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Procedural generators
// ---------------------------------------------------------------------------

/// Regular grid torus embedded in 3-space, diagonally split into triangles.
pub fn torus_grid<T: Real>(
    major_radius: T,
    minor_radius: T,
    nu: usize,
    nv: usize,
) -> (Vec<[T; 3]>, Vec<[usize; 3]>) {
    let two_pi = T::PI() + T::PI();
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let tu = two_pi * real::<T>(i as f64) / real::<T>(nu as f64);
        for j in 0..nv {
            let tv = two_pi * real::<T>(j as f64) / real::<T>(nv as f64);
            let ring = major_radius + minor_radius * tv.cos();
            positions.push([ring * tu.cos(), ring * tu.sin(), minor_radius * tv.sin()]);
        }
    }
    let vid = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v11 = vid(i + 1, j + 1);
            let v01 = vid(i, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    (positions, triangles)
}

/// Orders the grid-torus faces in concentric hexagonal rings around grid
/// vertex (0, 0) and keeps everything but the closest `hole_faces`.
///
/// The diagonally split grid is a triangular lattice; the combinatorial
/// ball of radius `a` around a vertex is a hexagon containing `6 a^2`
/// faces. A hole of `6 a^2` faces is therefore exactly that hexagon and
/// scales to the same parameter-space region when the resolution and the
/// face count are refined together; `hole_faces = 6` is exactly the vertex
/// star. A face's ring is the largest hex-distance of its corners, so the
/// kept region is always a union of full vertex neighborhoods.
fn torus_faces_minus_hole(
    nu: usize,
    nv: usize,
    hole_faces: usize,
    triangles: &[[usize; 3]],
) -> Result<Vec<[usize; 3]>> {
    if hole_faces >= triangles.len() {
        return Err(Error::Generator("hole removal disconnects mesh".into()));
    }
    // Signed wrapped integer offset in [-n/2, n/2).
    let signed = |x: usize, n: usize| {
        let half = n / 2;
        let x = x % n;
        x as i64 - if x >= half { n as i64 } else { 0 }
    };
    // Graph distance from the origin in the triangular lattice whose third
    // edge direction is (1, 1).
    let hexdist = |di: i64, dj: i64| {
        if (di >= 0) == (dj >= 0) {
            di.abs().max(dj.abs())
        } else {
            di.abs() + dj.abs()
        }
    };
    let mut keyed: Vec<(i64, f64, usize)> = triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let mut ring = 0i64;
            let mut ci = 0.0f64;
            let mut cj = 0.0f64;
            // Unwrap corners around the first one so seam-spanning faces
            // keep a coherent centroid.
            let (i0, j0) = (signed(tri[0] / nv, nu), signed(tri[0] % nv, nv));
            for &v in tri {
                let mut di = signed(v / nv, nu) - i0;
                let mut dj = signed(v % nv, nv) - j0;
                if di > nu as i64 / 2 {
                    di -= nu as i64;
                }
                if di < -(nu as i64) / 2 {
                    di += nu as i64;
                }
                if dj > nv as i64 / 2 {
                    dj -= nv as i64;
                }
                if dj < -(nv as i64) / 2 {
                    dj += nv as i64;
                }
                ring = ring.max(hexdist(di + i0, dj + j0));
                ci += (di + i0) as f64;
                cj += (dj + j0) as f64;
            }
            (ring, (ci * ci + cj * cj) / 9.0, t)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    let mut removed = vec![false; triangles.len()];
    for &(_, _, t) in keyed.iter().take(hole_faces) {
        removed[t] = true;
    }
    Ok(triangles
        .iter()
        .enumerate()
        .filter(|&(t, _)| !removed[t])
        .map(|(_, tri)| *tri)
        .collect())
}

/// Drops vertices not referenced by `faces`, reindexing in increasing order.
/// Returns the kept-vertex map (old index per new index) and remapped faces.
fn compact_faces(vertex_count: usize, faces: &[[usize; 3]]) -> (Vec<usize>, Vec<[usize; 3]>) {
    let mut used = vec![false; vertex_count];
    for tri in faces {
        for &v in tri {
            used[v] = true;
        }
    }
    let mut new_of_old = vec![NONE; vertex_count];
    let mut kept = Vec::new();
    for v in 0..vertex_count {
        if used[v] {
            new_of_old[v] = kept.len();
            kept.push(v);
        }
    }
    let remapped = faces
        .iter()
        .map(|tri| [new_of_old[tri[0]], new_of_old[tri[1]], new_of_old[tri[2]]])
        .collect();
    (kept, remapped)
}

fn map_hole_errors(err: Error) -> Error {
    match err {
        Error::NotConnected => Error::Generator("hole removal disconnects mesh".into()),
        Error::MultipleBoundaries(n) => Error::Generator(format!(
            "hole removal creates a second boundary loop ({n} loops)"
        )),
        Error::NonManifoldVertex(v) => Error::Generator(format!(
            "hole removal pinches the surface at vertex {v}"
        )),
        other => other,
    }
}

/// Embedded torus with a one-disk hole: genus 1, one boundary loop, chi = -1.
/// Also returns the (compacted) vertex positions for OFF emission.
pub fn generate_torus_with_hole_embedded<T: Real>(
    major_radius: T,
    minor_radius: T,
    nu: usize,
    nv: usize,
    hole_faces: usize,
) -> Result<(TriangleMesh<T>, Vec<[T; 3]>)> {
    if !(minor_radius > T::zero()) || !(major_radius > minor_radius) {
        return Err(Error::Generator(
            "torus radii must satisfy 0 < minor < major".into(),
        ));
    }
    if nu < 8 || nv < 8 {
        return Err(Error::Generator("nu and nv must be at least 8".into()));
    }
    if hole_faces < 1 {
        return Err(Error::Generator("hole_faces must be at least 1".into()));
    }
    let (positions, triangles) = torus_grid(major_radius, minor_radius, nu, nv);
    let kept_faces = torus_faces_minus_hole(nu, nv, hole_faces, &triangles)?;
    let (kept_vertices, faces) = compact_faces(positions.len(), &kept_faces);
    let kept_positions: Vec<[T; 3]> = kept_vertices.iter().map(|&v| positions[v]).collect();
    let mesh = TriangleMesh::from_positions(&kept_positions, faces).map_err(map_hole_errors)?;
    if mesh.euler_characteristic() != -1 {
        return Err(Error::Generator(format!(
            "hole region is not a disk (chi = {})",
            mesh.euler_characteristic()
        )));
    }
    Ok((mesh, kept_positions))
}

/// Embedded torus with a one-disk hole (mesh only).
pub fn generate_torus_with_hole<T: Real>(
    major_radius: T,
    minor_radius: T,
    nu: usize,
    nv: usize,
    hole_faces: usize,
) -> Result<TriangleMesh<T>> {
    generate_torus_with_hole_embedded(major_radius, minor_radius, nu, nv, hole_faces)
        .map(|(mesh, _)| mesh)
}

/// Combinatorial torus with all edge lengths 1 and a hole around one vertex
/// star. Every triangle is equilateral, so all cotangent weights are equal
/// and positive and the discrete maximum principle holds.
pub fn generate_flat_torus_with_hole<T: Real>(
    nu: usize,
    nv: usize,
    hole_faces: usize,
) -> Result<TriangleMesh<T>> {
    if nu < 8 || nv < 8 {
        return Err(Error::Generator("nu and nv must be at least 8".into()));
    }
    if hole_faces < 1 {
        return Err(Error::Generator("hole_faces must be at least 1".into()));
    }
    let vid = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let kept_faces = torus_faces_minus_hole(nu, nv, hole_faces, &triangles)?;
    let (_, faces) = compact_faces(nu * nv, &kept_faces);
    let count = faces.iter().flatten().copied().max().unwrap_or(0) + 1;
    let mesh =
        TriangleMesh::from_edge_lengths(count, faces, |_, _| T::one()).map_err(map_hole_errors)?;
    if mesh.euler_characteristic() != -1 {
        return Err(Error::Generator(format!(
            "hole region is not a disk (chi = {})",
            mesh.euler_characteristic()
        )));
    }
    Ok(mesh)
}

/// Boundary loop of a raw face list (directed edges appearing once), used
/// while stitching generators. Fails unless there is exactly one loop.
fn single_boundary_loop(faces: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut directed: Vec<(usize, usize)> = Vec::with_capacity(faces.len() * 3);
    for tri in faces {
        for m in 0..3 {
            directed.push((tri[(m + 1) % 3], tri[(m + 2) % 3]));
        }
    }
    let mut sorted = directed.clone();
    sorted.sort_unstable();
    let mut next: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &directed {
        if sorted.binary_search(&(b, a)).is_err() {
            next.push((a, b));
        }
    }
    if next.is_empty() {
        return Err(Error::NoBoundary);
    }
    next.sort_unstable();
    let start = next[0].0;
    let mut loop_vertices = vec![start];
    let mut cur = next[0].1;
    while cur != start {
        let pos = next
            .binary_search_by_key(&cur, |&(a, _)| a)
            .map_err(|_| Error::MeshFormat("open boundary walk".into()))?;
        loop_vertices.push(cur);
        cur = next[pos].1;
        if loop_vertices.len() > next.len() {
            return Err(Error::MeshFormat("boundary walk failed to close".into()));
        }
    }
    if loop_vertices.len() != next.len() {
        return Err(Error::MultipleBoundaries(2));
    }
    Ok(loop_vertices)
}

/// Genus-2 surface with one boundary loop (chi = -3): two grid tori, each
/// with a star removed, bridged along the resulting hexagons, then a third
/// star removed to open the boundary.
pub fn generate_genus2_with_hole<T: Real>(
    major_radius: T,
    minor_radius: T,
    nu: usize,
    nv: usize,
) -> Result<TriangleMesh<T>> {
    if !(minor_radius > T::zero()) || !(major_radius > minor_radius) {
        return Err(Error::Generator(
            "torus radii must satisfy 0 < minor < major".into(),
        ));
    }
    if nu < 8 || nv < 8 {
        return Err(Error::Generator("nu and nv must be at least 8".into()));
    }
    let (positions, triangles) = torus_grid(major_radius, minor_radius, nu, nv);
    let torus_a = torus_faces_minus_hole(nu, nv, 6, &triangles)?;
    let loop_a = single_boundary_loop(&torus_a)?;

    let offset = nu * nv;
    let torus_b: Vec<[usize; 3]> = torus_a
        .iter()
        .map(|tri| [tri[0] + offset, tri[1] + offset, tri[2] + offset])
        .collect();
    let loop_b: Vec<usize> = loop_a.iter().map(|&v| v + offset).collect();

    let m = loop_a.len();
    debug_assert_eq!(m, 6);
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(torus_a.len() * 2 + 2 * m);
    faces.extend_from_slice(&torus_a);
    faces.extend_from_slice(&torus_b);
    // Annulus between loop A (forward) and loop B (reversed) so the glued
    // surface stays consistently oriented.
    let sigma = |i: usize| (m - i % m) % m;
    for i in 0..m {
        let x0 = loop_a[i];
        let x1 = loop_a[(i + 1) % m];
        let y0 = loop_b[sigma(i)];
        let y1 = loop_b[sigma(i + 1)];
        faces.push([x1, x0, y0]);
        faces.push([x1, y0, y1]);
    }

    // Third star, far from the bridged holes, opens the boundary.
    let w0 = (nu / 2) * nv + nv / 2;
    let before = faces.len();
    faces.retain(|tri| !tri.contains(&w0));
    if faces.len() != before - 6 {
        return Err(Error::Generator(
            "boundary star overlaps the bridged region".into(),
        ));
    }

    // Bridge edges get the mean hexagon edge length.
    let dist = |a: usize, b: usize| -> T {
        let pa = positions[a % offset];
        let pb = positions[b % offset];
        let dx = pa[0] - pb[0];
        let dy = pa[1] - pb[1];
        let dz = pa[2] - pb[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    };
    let mut hex_mean = T::zero();
    for i in 0..m {
        hex_mean += dist(loop_a[i], loop_a[(i + 1) % m]);
    }
    hex_mean = hex_mean / real::<T>(m as f64);

    let (kept, compacted) = compact_faces(2 * offset, &faces);
    let count = kept.len();
    let mesh = TriangleMesh::from_edge_lengths(count, compacted, |a, b| {
        let oa = kept[a];
        let ob = kept[b];
        let cross = (oa < offset) != (ob < offset);
        if cross {
            hex_mean
        } else {
            dist(oa, ob)
        }
    })
    .map_err(map_hole_errors)?;
    if mesh.euler_characteristic() != -3 {
        return Err(Error::Generator(format!(
            "expected chi = -3, got {}",
            mesh.euler_characteristic()
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE_OFF: &str = "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 3\n3 0 3 2\n";

    #[test]
    fn parses_flat_square() {
        let (pos, tris) = parse_off::<f64>(SQUARE_OFF).unwrap();
        let mesh = TriangleMesh::from_positions(&pos, tris).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.edge_count(), 5);
        assert_eq!(mesh.triangle_count(), 2);
        assert_eq!(mesh.euler_characteristic(), 1);
        assert_eq!(mesh.boundary_loop().len(), 4);
        assert!((mesh.base_boundary_length() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_closed_tetrahedron() {
        let off = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        let (pos, tris) = parse_off::<f64>(off).unwrap();
        let err = TriangleMesh::from_positions(&pos, tris).unwrap_err();
        assert!(matches!(err, Error::NoBoundary), "{err}");
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        // Three triangles sharing edge (0,1).
        let pos = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let tris = vec![[0, 1, 2], [1, 0, 3], [1, 0, 4]];
        let err = TriangleMesh::from_positions(&pos, tris).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge { .. }), "{err}");
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let pos = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ];
        // Second triangle wound so edge (1,2) repeats in the same direction.
        let tris = vec![[0, 1, 2], [1, 2, 3]];
        let err = TriangleMesh::from_positions(&pos, tris).unwrap_err();
        assert!(matches!(err, Error::InconsistentOrientation { .. }), "{err}");
    }

    #[test]
    fn rejects_two_boundary_loops() {
        // Annulus-like strip: closed triangle ring has two boundary loops.
        let mut pos = Vec::new();
        let n = 8usize;
        for i in 0..n {
            let a = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            pos.push([a.cos(), a.sin(), 0.0]);
        }
        for i in 0..n {
            let a = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            pos.push([2.0 * a.cos(), 2.0 * a.sin(), 0.0]);
        }
        let mut tris = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            tris.push([i, n + i, j]);
            tris.push([j, n + i, n + j]);
        }
        let err = TriangleMesh::from_positions(&pos, tris).unwrap_err();
        assert!(matches!(err, Error::MultipleBoundaries(2)), "{err}");
    }

    #[test]
    fn torus_with_hole_has_chi_minus_one() {
        let mesh = generate_torus_with_hole::<f64>(2.0, 0.7, 24, 12, 6).unwrap();
        assert_eq!(mesh.euler_characteristic(), -1);
        assert_eq!(mesh.genus(), 1);
        assert_eq!(mesh.boundary_loop().len(), 6);

        let coarse = generate_torus_with_hole::<f64>(2.0, 0.7, 8, 8, 6).unwrap();
        assert_eq!(coarse.euler_characteristic(), -1);
    }

    #[test]
    fn torus_hole_star_is_removed() {
        // Removing six faces removes exactly the star of grid vertex (0,0),
        // so the original vertex 0 disappears and the hexagon link remains.
        let (mesh, positions) =
            generate_torus_with_hole_embedded::<f64>(2.0, 0.7, 12, 12, 6).unwrap();
        assert_eq!(mesh.vertex_count(), 12 * 12 - 1);
        assert_eq!(positions.len(), mesh.vertex_count());
        assert_eq!(mesh.triangle_count(), 2 * 12 * 12 - 6);
    }

    #[test]
    fn whole_torus_hole_fails() {
        let err = generate_torus_with_hole::<f64>(2.0, 0.7, 8, 8, 2 * 8 * 8).unwrap_err();
        assert!(err.to_string().contains("disconnects mesh"), "{err}");
    }

    #[test]
    fn off_roundtrip_preserves_topology() {
        let (mesh, positions) =
            generate_torus_with_hole_embedded::<f64>(2.0, 0.7, 10, 10, 6).unwrap();
        let text = off_string(&positions, mesh.triangles());
        let (pos2, tris2) = parse_off::<f64>(&text).unwrap();
        let reloaded = TriangleMesh::from_positions(&pos2, tris2).unwrap();
        assert_eq!(reloaded.euler_characteristic(), -1);
        assert_eq!(reloaded.vertex_count(), mesh.vertex_count());
        assert_eq!(reloaded.boundary_loop(), mesh.boundary_loop());
    }

    #[test]
    fn flat_torus_is_equilateral_with_hole() {
        let mesh = generate_flat_torus_with_hole::<f64>(10, 10, 6).unwrap();
        assert_eq!(mesh.euler_characteristic(), -1);
        assert!(mesh.edge_lengths().iter().all(|&l| l == 1.0));
        assert_eq!(mesh.boundary_loop().len(), 6);
    }

    #[test]
    fn genus2_has_chi_minus_three() {
        let mesh = generate_genus2_with_hole::<f64>(2.0, 0.7, 10, 10).unwrap();
        assert_eq!(mesh.euler_characteristic(), -3);
        assert_eq!(mesh.genus(), 2);
        assert_eq!(mesh.boundary_loop().len(), 6);
    }

    #[test]
    fn single_triangle_chi_one() {
        let pos = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.8, 0.0]];
        let mesh = TriangleMesh::from_positions(&pos, vec![[0, 1, 2]]).unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
        assert_eq!(mesh.boundary_loop(), &[0, 1, 2]);
    }
}
