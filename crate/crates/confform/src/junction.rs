//! Triple junction surfaces: three components sharing one junction curve,
//! compatibility checking, and the weak uniformization by root-finding on
//! the summed curvature map `c_hat(l) = sum_i c_hat_i(l)`.
//!
//! Each `c_hat_i` is strictly increasing from `2 pi chi_i` to infinity, so
//! the sum has a unique root `l0` whenever `chi(M) < 0`. At the root the
//! per-component boundary curvatures `c_i = c_hat_i(l0) / l0` sum to zero
//! and every component realizes the common boundary length `l0`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atlas::CurvatureLengthMap;
use crate::disk::{disk_c_hat, disk_length, rho_from_length, DiskParameter};
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::operators::{build_operators, ConformalState, DiscreteOperators};
use crate::scalar::{kahan_sum, real, Real};
use crate::solver::{solve, CurvatureTarget, SolverOptions};
use crate::threads::worker_cap;

/// One component of a triple junction surface: either a triangulated surface
/// with its operators, or the analytic hyperbolic disk family.
#[derive(Debug, Clone)]
pub enum SurfaceKind<T> {
    Mesh {
        mesh: TriangleMesh<T>,
        ops: DiscreteOperators<T>,
    },
    AnalyticDisk,
}

#[derive(Debug, Clone)]
pub struct SurfaceComponent<T> {
    pub id: String,
    kind: SurfaceKind<T>,
    chi: i64,
}

impl<T: Real> SurfaceComponent<T> {
    pub fn from_mesh(id: impl Into<String>, mesh: TriangleMesh<T>) -> Result<Self> {
        let ops = build_operators(&mesh)?;
        let chi = mesh.euler_characteristic();
        Ok(SurfaceComponent {
            id: id.into(),
            kind: SurfaceKind::Mesh { mesh, ops },
            chi,
        })
    }

    pub fn disk(id: impl Into<String>) -> Self {
        SurfaceComponent {
            id: id.into(),
            kind: SurfaceKind::AnalyticDisk,
            chi: 1,
        }
    }

    pub fn chi(&self) -> i64 {
        self.chi
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.kind, SurfaceKind::AnalyticDisk)
    }

    pub fn kind(&self) -> &SurfaceKind<T> {
        &self.kind
    }

    pub fn boundary_vertex_count(&self) -> usize {
        match &self.kind {
            SurfaceKind::Mesh { mesh, .. } => mesh.boundary_loop().len(),
            SurfaceKind::AnalyticDisk => 0,
        }
    }
}

/// Three components and the junction discretization resolution.
#[derive(Debug, Clone)]
pub struct TripleJunctionSpec<T> {
    components: [SurfaceComponent<T>; 3],
    junction_samples: usize,
    chi_m: i64,
}

impl<T: Real> TripleJunctionSpec<T> {
    pub fn new(components: [SurfaceComponent<T>; 3], junction_samples: usize) -> Result<Self> {
        if junction_samples < 16 {
            return Err(Error::Precondition(
                "junction_samples must be at least 16".into(),
            ));
        }
        let chi_m: i64 = components.iter().map(|c| c.chi()).sum();
        // One junction component forces every chi_i odd, hence chi(M) odd.
        assert!(chi_m % 2 != 0, "chi(M) must be odd, got {chi_m}");
        Ok(TripleJunctionSpec {
            components,
            junction_samples,
            chi_m,
        })
    }

    pub fn components(&self) -> &[SurfaceComponent<T>; 3] {
        &self.components
    }

    pub fn junction_samples(&self) -> usize {
        self.junction_samples
    }

    pub fn chi_m(&self) -> i64 {
        self.chi_m
    }
}

/// Uniformized metric data per component.
#[derive(Debug, Clone)]
pub enum ComponentState<T> {
    Mesh(ConformalState<T>),
    Disk(DiskParameter<T>),
    /// Standard half-sphere (all-disk case): k = +1, geodesic boundary.
    Hemisphere,
}

/// Constant-speed arclength reparameterization of the junction curve onto a
/// component boundary: rows of (t in [0,1), interval index, fraction within
/// the interval). Mesh intervals are boundary edges starting at boundary
/// vertex 0; disk intervals are `junction_samples` uniform arcs.
#[derive(Debug, Clone)]
pub struct Correspondence<T> {
    pub rows: Vec<(T, usize, T)>,
}

/// Output of the weak uniformization.
#[derive(Debug, Clone)]
pub struct MatchResult<T> {
    pub l0: T,
    pub c: [T; 3],
    pub k: T,
    pub states: [ComponentState<T>; 3],
    pub correspondences: [Correspondence<T>; 3],
    pub realized_lengths: [T; 3],
    pub chi: [i64; 3],
    pub chi_m: i64,
    /// |sum_i c_hat_i(l0)| at the accepted root.
    pub root_residual: T,
    /// Bracket history (lo, hi) of the outer bisection.
    pub bisection_trace: Vec<(T, T)>,
}

#[derive(Debug, Clone)]
pub struct MatchOptions<T> {
    pub solver: SolverOptions<T>,
    /// Multiplies the initial bracket guess; uniqueness probes randomize it.
    pub bracket_scale: T,
    /// When set, mesh caches are seeded from a random initialization drawn
    /// from this seed, so probes exercise solver-init independence.
    pub random_init_seed: Option<u64>,
}

impl<T: Real> Default for MatchOptions<T> {
    fn default() -> Self {
        MatchOptions {
            solver: SolverOptions::default(),
            bracket_scale: T::one(),
            random_init_seed: None,
        }
    }
}

enum ComponentEvaluator<'a, T: Real> {
    Mesh(CurvatureLengthMap<'a, T>),
    Disk,
}

impl<'a, T: Real> ComponentEvaluator<'a, T> {
    /// `None` marks an `l` above the component's representable length range,
    /// which the root search reads as "above the root".
    fn c_hat(&mut self, l: T) -> Result<Option<T>> {
        match self {
            ComponentEvaluator::Mesh(map) => map.c_hat_checked(l),
            ComponentEvaluator::Disk => disk_c_hat(l).map(Some),
        }
    }
}

fn c_hat_sum<T: Real>(
    evaluators: &mut [ComponentEvaluator<'_, T>; 3],
    l: T,
) -> Result<Option<(T, [T; 3])>> {
    let mut parts = [T::zero(); 3];
    if worker_cap() >= 2 {
        let results: Vec<Result<Option<T>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = evaluators
                .iter_mut()
                .map(|e| scope.spawn(move || e.c_hat(l)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("component evaluation panicked"))
                .collect()
        });
        for (slot, r) in parts.iter_mut().zip(results) {
            match r? {
                Some(v) => *slot = v,
                None => return Ok(None),
            }
        }
    } else {
        for (slot, e) in parts.iter_mut().zip(evaluators.iter_mut()) {
            match e.c_hat(l)? {
                Some(v) => *slot = v,
                None => return Ok(None),
            }
        }
    }
    Ok(Some((kahan_sum(parts.iter().copied()), parts)))
}

fn build_evaluators<'a, T: Real>(
    spec: &'a TripleJunctionSpec<T>,
    opts: &MatchOptions<T>,
) -> Result<[ComponentEvaluator<'a, T>; 3]> {
    let mut rng = opts.random_init_seed.map(ChaCha8Rng::seed_from_u64);
    let mut out: Vec<ComponentEvaluator<'a, T>> = Vec::with_capacity(3);
    for comp in spec.components() {
        match comp.kind() {
            SurfaceKind::AnalyticDisk => out.push(ComponentEvaluator::Disk),
            SurfaceKind::Mesh { ops, .. } => {
                let mut map =
                    CurvatureLengthMap::new(ops, -T::one(), opts.solver.clone())?;
                if let Some(rng) = rng.as_mut() {
                    let init = ConformalState::from_vec(
                        (0..ops.vertex_count())
                            .map(|_| real::<T>(rng.gen_range(-1.0..1.0)))
                            .collect(),
                    );
                    let target = CurvatureTarget::raw(-T::one(), -T::one());
                    let report = solve(ops, &target, init, &opts.solver)?;
                    map.seed(-T::one(), &report);
                }
                out.push(ComponentEvaluator::Mesh(map));
            }
        }
    }
    Ok(out.try_into().map_err(|_| ()).expect("three evaluators"))
}

/// Pointwise compatibility data of one component along the junction.
#[derive(Debug, Clone)]
pub enum BoundaryCurvature<T> {
    /// Constant geodesic curvature (uniformized metrics, hemispheres).
    Constant { curvature: T, length: T },
    /// Sampled densities at boundary vertices with their normalized
    /// arclength positions.
    Sampled {
        densities: Vec<T>,
        positions: Vec<T>,
        length: T,
    },
}

impl<T: Real> BoundaryCurvature<T> {
    pub fn constant(curvature: T, length: T) -> Self {
        BoundaryCurvature::Constant { curvature, length }
    }

    /// Discrete geodesic-curvature density of the base metric: angle defect
    /// over boundary mass at each boundary vertex.
    pub fn from_base_mesh(mesh: &TriangleMesh<T>, ops: &DiscreteOperators<T>) -> Self {
        let loop_vertices = mesh.boundary_loop();
        let n = loop_vertices.len();
        let total = mesh.base_boundary_length();
        let mut densities = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n);
        let mut acc = T::zero();
        for i in 0..n {
            let v = loop_vertices[i];
            densities.push(ops.integrated_geodesic()[v] / ops.boundary_mass()[v]);
            positions.push(acc / total);
            let w = loop_vertices[(i + 1) % n];
            let e = mesh.edge_index(v, w).expect("boundary edge");
            acc += mesh.edge_lengths()[e];
        }
        BoundaryCurvature::Sampled {
            densities,
            positions,
            length: total,
        }
    }

    fn length(&self) -> T {
        match self {
            BoundaryCurvature::Constant { length, .. } => *length,
            BoundaryCurvature::Sampled { length, .. } => *length,
        }
    }

    fn sample(&self, t: T) -> T {
        match self {
            BoundaryCurvature::Constant { curvature, .. } => *curvature,
            BoundaryCurvature::Sampled {
                densities,
                positions,
                ..
            } => {
                let n = positions.len();
                // Periodic piecewise-linear interpolation.
                let mut seg = n - 1;
                for i in 0..n - 1 {
                    if t >= positions[i] && t < positions[i + 1] {
                        seg = i;
                        break;
                    }
                }
                let (t0, d0) = (positions[seg], densities[seg]);
                let (t1, d1) = if seg + 1 < n {
                    (positions[seg + 1], densities[seg + 1])
                } else {
                    (T::one() + positions[0], densities[0])
                };
                let span = t1 - t0;
                if span <= T::zero() {
                    return d0;
                }
                let s = (t - t0) / span;
                d0 + (d1 - d0) * s
            }
        }
    }
}

/// Max over junction samples of the summed geodesic curvature. All three
/// boundary lengths must agree (relative 1e-6) for the pointwise comparison
/// to make sense.
pub fn check_compatibility<T: Real>(
    spec: &TripleJunctionSpec<T>,
    data: &[BoundaryCurvature<T>; 3],
) -> Result<T> {
    let lengths: Vec<T> = data.iter().map(|d| d.length()).collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let rel = (lengths[i] - lengths[j]).abs() / lengths[i].max(lengths[j]);
            if rel > real::<T>(1e-6) {
                return Err(Error::Precondition(format!(
                    "unequal boundary lengths: {} vs {}",
                    lengths[i], lengths[j]
                )));
            }
        }
    }
    let samples = spec.junction_samples();
    let mut worst = T::zero();
    for j in 0..samples {
        let t = real::<T>(j as f64) / real::<T>(samples as f64);
        let total = data[0].sample(t) + data[1].sample(t) + data[2].sample(t);
        worst = worst.max(total.abs());
    }
    Ok(worst)
}

fn mesh_correspondence<T: Real>(
    mesh: &TriangleMesh<T>,
    state: &ConformalState<T>,
    samples: usize,
) -> Correspondence<T> {
    let loop_vertices = mesh.boundary_loop();
    let n = loop_vertices.len();
    let u = state.values();
    let half = real::<T>(0.5);
    let mut seg_lengths = Vec::with_capacity(n);
    for i in 0..n {
        let a = loop_vertices[i];
        let b = loop_vertices[(i + 1) % n];
        let e = mesh.edge_index(a, b).expect("boundary edge");
        let base = mesh.edge_lengths()[e];
        seg_lengths.push(base * half * (u[a].exp() + u[b].exp()));
    }
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(T::zero());
    for &s in &seg_lengths {
        let last = *cum.last().unwrap();
        cum.push(last + s);
    }
    let total = cum[n];
    let mut rows = Vec::with_capacity(samples);
    for j in 0..samples {
        let t = real::<T>(j as f64) / real::<T>(samples as f64);
        let arc = t * total;
        let mut seg = n - 1;
        for i in 0..n {
            if arc >= cum[i] && arc < cum[i + 1] {
                seg = i;
                break;
            }
        }
        let frac = ((arc - cum[seg]) / seg_lengths[seg]).max(T::zero()).min(T::one());
        rows.push((t, seg, frac));
    }
    Correspondence { rows }
}

fn disk_correspondence<T: Real>(samples: usize) -> Correspondence<T> {
    let rows = (0..samples)
        .map(|j| {
            (
                real::<T>(j as f64) / real::<T>(samples as f64),
                j,
                T::zero(),
            )
        })
        .collect();
    Correspondence { rows }
}

/// Weak uniformization at k = -1: finds the unique `l0` with
/// `sum_i c_hat_i(l0) = 0` by bisection, then re-solves every component at
/// its matched curvature.
pub fn match_junction<T: Real>(
    spec: &TripleJunctionSpec<T>,
    opts: &MatchOptions<T>,
) -> Result<MatchResult<T>> {
    let two_pi = T::PI() + T::PI();
    let chi_m = spec.chi_m();
    if spec.components().iter().all(|c| c.is_disk()) {
        // Bounded below by 6 pi; handled by `all_disk_case`.
        return Err(Error::PositiveEulerCharacteristic {
            chi: 3,
            infimum: (real::<T>(3.0) * two_pi).to_f64().unwrap_or(f64::NAN),
        });
    }
    if chi_m > 0 {
        return Err(Error::PositiveEulerCharacteristic {
            chi: chi_m,
            infimum: (two_pi * real::<T>(chi_m as f64)).to_f64().unwrap_or(f64::NAN),
        });
    }
    for comp in spec.components() {
        if !comp.is_disk() && comp.chi() > 0 {
            return Err(Error::Precondition(format!(
                "mesh component {:?} has chi = {}; disk topologies must use the analytic disk",
                comp.id,
                comp.chi()
            )));
        }
    }

    let mut evaluators = build_evaluators(spec, opts)?;

    // Initial guess: mean base boundary length over mesh components.
    let mut guess = T::zero();
    let mut mesh_count = 0usize;
    for comp in spec.components() {
        if let SurfaceKind::Mesh { ops, .. } = comp.kind() {
            guess += ops.base_boundary_length();
            mesh_count += 1;
        }
    }
    guess = guess / real::<T>(mesh_count as f64) * opts.bracket_scale;

    // Geometric expansion to a sign-straddling bracket. An `l` beyond some
    // component's reachable range reads as a positive sum: the root, if
    // representable at all, lies below it.
    let positive_at = |v: &Option<(T, [T; 3])>| match v {
        None => true,
        Some((value, _)) => *value > T::zero(),
    };
    let first = c_hat_sum(&mut evaluators, guess)?;
    let (mut lo, mut hi);
    if positive_at(&first) {
        hi = guess;
        lo = guess;
        let mut steps = 0;
        loop {
            lo = lo * real::<T>(0.5);
            let v = c_hat_sum(&mut evaluators, lo)?;
            if !positive_at(&v) {
                break;
            }
            steps += 1;
            if steps > 80 {
                return Err(Error::BracketExhausted(
                    "no sign change while shrinking the junction bracket".into(),
                ));
            }
        }
    } else {
        lo = guess;
        hi = guess;
        let mut steps = 0;
        loop {
            hi = hi + hi;
            let v = c_hat_sum(&mut evaluators, hi)?;
            if positive_at(&v) {
                break;
            }
            steps += 1;
            if steps > 80 {
                return Err(Error::BracketExhausted(
                    "no sign change while growing the junction bracket".into(),
                ));
            }
        }
    }

    let tol_hat = real::<T>(1e-7) * (T::one() + (two_pi * real::<T>(chi_m as f64)).abs());
    let half_micro = real::<T>(5e-7);
    let mut trace = Vec::new();
    let mut accepted: Option<(T, T, [T; 3])> = None;
    for _ in 0..300 {
        trace.push((lo, hi));
        let mid = (lo + hi) * real::<T>(0.5);
        let eval = c_hat_sum(&mut evaluators, mid)?;
        if let Some((v, parts)) = eval {
            if v.abs() <= tol_hat && v.abs() <= half_micro * mid {
                accepted = Some((mid, v, parts));
                break;
            }
        }
        if positive_at(&eval) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (l0, root_value, parts) = accepted.ok_or_else(|| {
        Error::BracketExhausted("junction bisection did not meet tolerance in 300 steps".into())
    })?;

    let mut c = [T::zero(); 3];
    for i in 0..3 {
        c[i] = parts[i] / l0;
    }

    let mut states: Vec<ComponentState<T>> = Vec::with_capacity(3);
    let mut correspondences: Vec<Correspondence<T>> = Vec::with_capacity(3);
    let mut realized = [T::zero(); 3];
    let mut chis = [0i64; 3];
    for (i, (comp, evaluator)) in spec
        .components()
        .iter()
        .zip(evaluators.iter_mut())
        .enumerate()
    {
        chis[i] = comp.chi();
        match (comp.kind(), evaluator) {
            (SurfaceKind::Mesh { mesh, .. }, ComponentEvaluator::Mesh(map)) => {
                let report = map.solve_at(c[i])?;
                realized[i] = report.boundary_length;
                correspondences.push(mesh_correspondence(
                    mesh,
                    &report.state,
                    spec.junction_samples(),
                ));
                states.push(ComponentState::Mesh(report.state));
            }
            (SurfaceKind::AnalyticDisk, _) => {
                let p = rho_from_length(l0)?;
                realized[i] = disk_length(p);
                correspondences.push(disk_correspondence(spec.junction_samples()));
                states.push(ComponentState::Disk(p));
            }
            _ => unreachable!("evaluator kinds track component kinds"),
        }
    }

    Ok(MatchResult {
        l0,
        c,
        k: -T::one(),
        states: states.try_into().map_err(|_| ()).expect("three states"),
        correspondences: correspondences
            .try_into()
            .map_err(|_| ())
            .expect("three correspondences"),
        realized_lengths: realized,
        chi: chis,
        chi_m,
        root_residual: root_value.abs(),
        bisection_trace: trace,
    })
}

/// Uniformization when all three components are disks: the standard
/// half-sphere metric on each, k = +1, geodesic boundary (c = 0), equator
/// length 2 pi, identity arclength correspondences.
pub fn all_disk_case<T: Real>(spec: &TripleJunctionSpec<T>) -> Result<MatchResult<T>> {
    if !spec.components().iter().all(|c| c.is_disk()) {
        return Err(Error::Precondition(
            "all_disk_case requires three disk components".into(),
        ));
    }
    let two_pi = T::PI() + T::PI();
    let samples = spec.junction_samples();
    Ok(MatchResult {
        l0: two_pi,
        c: [T::zero(); 3],
        k: T::one(),
        states: [
            ComponentState::Hemisphere,
            ComponentState::Hemisphere,
            ComponentState::Hemisphere,
        ],
        correspondences: [
            disk_correspondence(samples),
            disk_correspondence(samples),
            disk_correspondence(samples),
        ],
        realized_lengths: [two_pi; 3],
        chi: [1, 1, 1],
        chi_m: 3,
        root_residual: T::zero(),
        bisection_trace: Vec::new(),
    })
}

/// Reruns the matcher with randomized brackets and solver initializations;
/// returns the largest relative deviation of `l0`. Solutions are unique, so
/// deviations reflect only root-finder tolerance.
pub fn uniqueness_probe<T: Real>(
    spec: &TripleJunctionSpec<T>,
    result: &MatchResult<T>,
    n_perturb: usize,
    seed: u64,
) -> Result<T> {
    if n_perturb < 1 {
        return Err(Error::Precondition("n_perturb must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for p in 0..n_perturb {
        let scale = real::<T>(rng.gen_range(-0.5..0.5f64).exp());
        let opts = MatchOptions {
            solver: SolverOptions::default(),
            bracket_scale: scale,
            random_init_seed: Some(seed.wrapping_add(p as u64 + 1)),
        };
        let rerun = match_junction(spec, &opts)?;
        let dev = (rerun.l0 - result.l0).abs() / result.l0;
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_flat_torus_with_hole;
    use std::f64::consts::PI;

    fn torus_component(id: &str) -> SurfaceComponent<f64> {
        let mesh = generate_flat_torus_with_hole::<f64>(10, 10, 6).unwrap();
        SurfaceComponent::from_mesh(id, mesh).unwrap()
    }

    fn three_tori() -> TripleJunctionSpec<f64> {
        TripleJunctionSpec::new(
            [
                torus_component("a"),
                torus_component("b"),
                torus_component("c"),
            ],
            32,
        )
        .unwrap()
    }

    #[test]
    fn all_disks_match_hemispheres() {
        let spec = TripleJunctionSpec::<f64>::new(
            [
                SurfaceComponent::disk("d1"),
                SurfaceComponent::disk("d2"),
                SurfaceComponent::disk("d3"),
            ],
            16,
        )
        .unwrap();
        let result = all_disk_case(&spec).unwrap();
        assert_eq!(result.k, 1.0);
        assert_eq!(result.c, [0.0; 3]);
        assert!((result.l0 - 2.0 * PI).abs() < 1e-15);

        let data = [
            BoundaryCurvature::constant(0.0, result.l0),
            BoundaryCurvature::constant(0.0, result.l0),
            BoundaryCurvature::constant(0.0, result.l0),
        ];
        assert_eq!(check_compatibility(&spec, &data).unwrap(), 0.0);

        // match_junction rejects the all-disk spec with a referral.
        let err = match_junction(&spec, &MatchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PositiveEulerCharacteristic { chi: 3, .. }), "{err}");
    }

    #[test]
    fn all_disk_case_rejects_mesh_component() {
        let spec = TripleJunctionSpec::new(
            [
                SurfaceComponent::disk("d1"),
                SurfaceComponent::disk("d2"),
                torus_component("m"),
            ],
            16,
        )
        .unwrap();
        assert!(all_disk_case(&spec).is_err());
    }

    #[test]
    fn positive_chi_specs_are_rejected() {
        let spec = TripleJunctionSpec::new(
            [
                torus_component("m"),
                SurfaceComponent::disk("d1"),
                SurfaceComponent::disk("d2"),
            ],
            16,
        )
        .unwrap();
        assert_eq!(spec.chi_m(), 1);
        let err = match_junction(&spec, &MatchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PositiveEulerCharacteristic { chi: 1, .. }), "{err}");
    }

    #[test]
    fn symmetric_tori_match_at_c_zero() {
        let spec = three_tori();
        let result = match_junction(&spec, &MatchOptions::default()).unwrap();
        let sum: f64 = result.c.iter().sum();
        assert!(sum.abs() <= 1e-6, "sum c = {sum}");
        for &ci in &result.c {
            assert!(ci.abs() <= 1e-6, "c = {ci}");
        }
        // l0 equals the single-surface length at (-1, 0).
        let ops = match spec.components()[0].kind() {
            SurfaceKind::Mesh { ops, .. } => ops,
            _ => unreachable!(),
        };
        let single = crate::solver::solve_default(
            ops,
            &CurvatureTarget::new(-1.0, 0.0).unwrap(),
        )
        .unwrap();
        let rel = (result.l0 - single.boundary_length).abs() / single.boundary_length;
        assert!(rel <= 1e-6, "relative l0 deviation {rel}");

        for (i, &len) in result.realized_lengths.iter().enumerate() {
            let rel = (len - result.l0).abs() / result.l0;
            assert!(rel <= 1e-6, "component {i} length {len} vs {}", result.l0);
        }

        // Width halves each bisection step.
        for w in result.bisection_trace.windows(2) {
            let w0 = w[0].1 - w[0].0;
            let w1 = w[1].1 - w[1].0;
            assert!((w1 - 0.5 * w0).abs() <= 1e-12 * w0, "{w1} vs half of {w0}");
        }
        let bound = 1e-6 * (1.0 + 2.0 * PI * spec.chi_m().abs() as f64);
        assert!(result.root_residual <= bound, "root residual {}", result.root_residual);

        let deviation = uniqueness_probe(&spec, &result, 2, 7).unwrap();
        assert!(deviation <= 1e-6, "probe deviation {deviation}");

        let data = [
            BoundaryCurvature::constant(result.c[0], result.realized_lengths[0]),
            BoundaryCurvature::constant(result.c[1], result.realized_lengths[1]),
            BoundaryCurvature::constant(result.c[2], result.realized_lengths[2]),
        ];
        let residual = check_compatibility(&spec, &data).unwrap();
        assert!(residual <= 1e-6, "compatibility residual {residual}");
    }

    #[test]
    fn correspondences_are_arclength_tables() {
        let spec = three_tori();
        let result = match_junction(&spec, &MatchOptions::default()).unwrap();
        for corr in &result.correspondences {
            assert_eq!(corr.rows.len(), spec.junction_samples());
            for w in corr.rows.windows(2) {
                assert!(w[1].0 > w[0].0);
            }
            for &(t, _, frac) in &corr.rows {
                assert!((0.0..1.0).contains(&t));
                assert!((0.0..=1.0).contains(&frac));
            }
        }
    }

    #[test]
    fn compatibility_requires_equal_lengths() {
        let spec = three_tori();
        let data = [
            BoundaryCurvature::constant(0.0, 1.0),
            BoundaryCurvature::constant(0.0, 2.0),
            BoundaryCurvature::constant(0.0, 1.0),
        ];
        assert!(check_compatibility(&spec, &data).is_err());
    }

    #[test]
    fn probe_requires_at_least_one_perturbation() {
        let spec = three_tori();
        let result = all_disk_case(&TripleJunctionSpec::new(
            [
                SurfaceComponent::disk("1"),
                SurfaceComponent::disk("2"),
                SurfaceComponent::disk("3"),
            ],
            16,
        )
        .unwrap())
        .unwrap();
        let err = uniqueness_probe(&spec, &result, 0, 42).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }
}
