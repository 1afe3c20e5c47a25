//! Tabulation and inversion of the monotone curvature-to-length maps.
//!
//! For a fixed surface, `L(k, c)` and `A(k, c)` are continuous on the
//! admissible domain and strictly increasing along each axis, with
//! `L_hat = c L` and `A_hat = k A` tied by Gauss-Bonnet
//! (`L_hat + A_hat = 2 pi chi`). The inversion `c(l)` runs on bisection
//! alone, inheriting correctness from monotonicity; the linearized
//! derivative is a cross-check elsewhere, never a dependency here.

use crate::error::{Error, Result};
use crate::operators::{ConformalState, DiscreteOperators};
use crate::scalar::{real, Real};
use crate::solver::{
    solve, solve_from, CurvatureTarget, SolveReport, SolverOptions,
};
use crate::threads::worker_cap;

/// One sample of the curvature-to-geometry maps.
#[derive(Debug, Clone)]
pub struct AtlasRow<T> {
    pub k: T,
    pub c: T,
    pub length: T,
    pub area: T,
    pub l_hat: T,
    pub a_hat: T,
    pub converged: bool,
}

impl<T: Real> AtlasRow<T> {
    fn marker(k: T, c: T) -> Self {
        AtlasRow {
            k,
            c,
            length: T::nan(),
            area: T::nan(),
            l_hat: T::nan(),
            a_hat: T::nan(),
            converged: false,
        }
    }

    fn from_report(k: T, c: T, report: &SolveReport<T>) -> Self {
        AtlasRow {
            k,
            c,
            length: report.boundary_length,
            area: report.area,
            l_hat: c * report.boundary_length,
            a_hat: k * report.area,
            converged: report.converged,
        }
    }
}

/// Monotone samples of `c -> L(-1, c)` for one surface.
#[derive(Debug, Clone)]
pub struct BoundaryCurve<T> {
    pub surface_id: String,
    pub samples: Vec<(T, T)>,
    pub chi: i64,
}

impl<T: Real> BoundaryCurve<T> {
    /// Validates strict monotonicity in both coordinates.
    pub fn new(surface_id: String, samples: Vec<(T, T)>, chi: i64) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::Precondition(format!(
                    "boundary curve samples must increase strictly: ({}, {}) then ({}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(BoundaryCurve {
            surface_id,
            samples,
            chi,
        })
    }
}

fn advance_to<T: Real>(
    ops: &DiscreteOperators<T>,
    k: T,
    from: Option<(T, &ConformalState<T>)>,
    c_to: T,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    let target = CurvatureTarget::raw(k, c_to);
    match from {
        None => solve(ops, &target, ConformalState::zeros(ops.vertex_count()), opts),
        Some((c_from, state)) => {
            match solve_from(ops, &target, state.clone(), opts) {
                Ok(report) => Ok(report),
                Err(Error::NonConvergence { .. }) | Err(Error::SingularSystem { .. }) => {
                    // The jump was too large for a direct warm start; walk it
                    // in continuation-sized substeps.
                    let span = (c_to - c_from).abs();
                    let step = opts.continuation_step_c * (-k).sqrt();
                    let n = (span / step).ceil().to_usize().unwrap_or(1).max(1);
                    let mut current = state.clone();
                    let mut report = None;
                    for s in 1..=n {
                        let cs = c_from + (c_to - c_from) * real::<T>(s as f64) / real::<T>(n as f64);
                        let stage = CurvatureTarget::raw(k, cs);
                        let r = solve_from(ops, &stage, current, opts)?;
                        current = r.state.clone();
                        report = Some(r);
                    }
                    Ok(report.expect("at least one substep"))
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn sweep_line<T: Real>(
    ops: &DiscreteOperators<T>,
    k: T,
    c_values: &[T],
    opts: &SolverOptions<T>,
) -> Vec<AtlasRow<T>> {
    let mut order: Vec<usize> = (0..c_values.len()).collect();
    order.sort_by(|&a, &b| c_values[a].partial_cmp(&c_values[b]).unwrap());
    let mut rows = vec![AtlasRow::marker(k, T::zero()); c_values.len()];
    let mut warm: Option<(T, ConformalState<T>)> = None;
    for &idx in &order {
        let c = c_values[idx];
        let target = CurvatureTarget::raw(k, c);
        if !target.is_admissible() {
            rows[idx] = AtlasRow::marker(k, c);
            continue;
        }
        let attempt = advance_to(ops, k, warm.as_ref().map(|(c0, s)| (*c0, s)), c, opts);
        match attempt {
            Ok(report) => {
                rows[idx] = AtlasRow::from_report(k, c, &report);
                warm = Some((c, report.state));
            }
            Err(_) => {
                rows[idx] = AtlasRow::marker(k, c);
                // Leave the warm state at the last converged c.
            }
        }
    }
    rows
}

/// Samples the maps over a (k, c) grid. Inadmissible pairs and failed solves
/// become marker rows (`converged = false`, NaN measures) rather than
/// aborting the sweep. Rows come back k-major in the given k order, with c
/// ascending within each line; lines at distinct k may run concurrently.
pub fn sweep<T: Real>(
    ops: &DiscreteOperators<T>,
    k_values: &[T],
    c_values: &[T],
    opts: &SolverOptions<T>,
) -> Vec<AtlasRow<T>> {
    let workers = worker_cap().min(k_values.len().max(1));
    let mut per_line: Vec<Vec<AtlasRow<T>>> = Vec::with_capacity(k_values.len());
    if workers <= 1 || k_values.len() <= 1 {
        for &k in k_values {
            per_line.push(sweep_line(ops, k, c_values, opts));
        }
    } else {
        let mut slots: Vec<Option<Vec<AtlasRow<T>>>> = vec![None; k_values.len()];
        let chunk = k_values.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (slot_chunk, k_chunk) in slots.chunks_mut(chunk).zip(k_values.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, &k) in slot_chunk.iter_mut().zip(k_chunk) {
                        *slot = Some(sweep_line(ops, k, c_values, opts));
                    }
                });
            }
        });
        per_line.extend(slots.into_iter().map(|s| s.expect("line computed")));
    }
    let mut rows = Vec::with_capacity(k_values.len() * c_values.len());
    for line in per_line {
        let mut order: Vec<usize> = (0..c_values.len()).collect();
        order.sort_by(|&a, &b| c_values[a].partial_cmp(&c_values[b]).unwrap());
        for idx in order {
            rows.push(line[idx].clone());
        }
    }
    rows
}

struct CacheEntry<T> {
    c: T,
    length: T,
    state: ConformalState<T>,
}

/// Cached evaluator of `c -> L(k, c)` at fixed `k < 0`, with bisection
/// inversion. Warm-starts every solve from the nearest cached state.
pub struct CurvatureLengthMap<'a, T> {
    ops: &'a DiscreteOperators<T>,
    k: T,
    opts: SolverOptions<T>,
    cache: Vec<CacheEntry<T>>,
    max_entries: usize,
    reachable_max: Option<T>,
}

impl<'a, T: Real> CurvatureLengthMap<'a, T> {
    pub fn new(ops: &'a DiscreteOperators<T>, k: T, opts: SolverOptions<T>) -> Result<Self> {
        if !(k < T::zero()) {
            return Err(Error::Precondition(
                "length map requires k < 0".into(),
            ));
        }
        opts.validate()?;
        Ok(CurvatureLengthMap {
            ops,
            k,
            opts,
            cache: Vec::new(),
            max_entries: 4096,
            reachable_max: None,
        })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn operators(&self) -> &DiscreteOperators<T> {
        self.ops
    }

    /// Seeds the cache with a precomputed state for c (used by randomized
    /// uniqueness probes to vary solver initializations).
    pub fn seed(&mut self, c: T, report: &SolveReport<T>) {
        self.cache.push(CacheEntry {
            c,
            length: report.boundary_length,
            state: report.state.clone(),
        });
    }

    /// Boundary length of the solve at (k, c).
    pub fn length_at(&mut self, c: T) -> Result<T> {
        let target = CurvatureTarget::raw(self.k, c);
        if !target.is_admissible() {
            return Err(Error::InadmissibleTarget {
                k: self.k.to_f64().unwrap_or(f64::NAN),
                c: c.to_f64().unwrap_or(f64::NAN),
            });
        }
        let eps = real::<T>(1e-14) * (T::one() + c.abs());
        if let Some(entry) = self.cache.iter().find(|e| (e.c - c).abs() <= eps) {
            return Ok(entry.length);
        }
        let warm = self
            .cache
            .iter()
            .min_by(|a, b| (a.c - c).abs().partial_cmp(&(b.c - c).abs()).unwrap());
        let report = advance_to(
            self.ops,
            self.k,
            warm.map(|e| (e.c, &e.state)),
            c,
            &self.opts,
        )?;
        if self.cache.len() >= self.max_entries {
            self.cache.remove(0);
        }
        let length = report.boundary_length;
        self.cache.push(CacheEntry {
            c,
            length,
            state: report.state,
        });
        Ok(length)
    }

    /// Full solve at (k, c), warm-started from the cache.
    pub fn solve_at(&mut self, c: T) -> Result<SolveReport<T>> {
        self.length_at(c)?;
        let eps = real::<T>(1e-14) * (T::one() + c.abs());
        let entry = self
            .cache
            .iter()
            .find(|e| (e.c - c).abs() <= eps)
            .expect("entry just inserted");
        solve_from(
            self.ops,
            &CurvatureTarget::raw(self.k, c),
            entry.state.clone(),
            &self.opts,
        )
    }

    /// Finds c with `L(k, c) = l` to `1e-8 * l`, by bisection on the strictly
    /// increasing length map. The bracket starts at `[-sqrt(-k), near-blowup)`
    /// and the lower end expands geometrically downward until it straddles.
    pub fn invert_length(&mut self, l: T) -> Result<T> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::Precondition(format!(
                "target length must be positive and finite, got {l}"
            )));
        }
        let sqrt_mk = (-self.k).sqrt();
        let c_top = sqrt_mk * (T::one() - real::<T>(1e-3));
        let tol = real::<T>(1e-8) * l;

        // Cached samples tighten the initial bracket for free.
        let mut lo = -sqrt_mk;
        let mut lo_valid = false;
        let mut hi = c_top;
        for e in &self.cache {
            if e.length < l && e.c >= lo {
                lo = e.c;
                lo_valid = true;
            }
            if e.length > l && e.c <= hi {
                hi = e.c;
            }
        }
        if !lo_valid {
            let floor = real::<T>(-1e6) * sqrt_mk;
            loop {
                let length = self.length_at(lo)?;
                if (length - l).abs() <= tol {
                    return Ok(lo);
                }
                if length < l {
                    break;
                }
                lo = lo + lo;
                if lo < floor {
                    return Err(Error::BracketExhausted(format!(
                        "target length {l} below the reachable range at c = {lo}"
                    )));
                }
            }
        }

        for _ in 0..200 {
            let mid = (lo + hi) * real::<T>(0.5);
            let length = self.length_at(mid)?;
            // Match the length and pin c itself: where dL/dc is small the
            // length tolerance alone leaves c coarser than the bracket.
            if (length - l).abs() <= tol
                && hi - lo <= real::<T>(1e-8) * (T::one() + mid.abs())
            {
                return Ok(mid);
            }
            if length < l {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= real::<T>(1e-15) * (T::one() + lo.abs()) {
                if hi >= c_top - real::<T>(1e-12) {
                    return Err(Error::NearBlowup {
                        c: hi.to_f64().unwrap_or(f64::NAN),
                        boundary_length: l.to_f64().unwrap_or(f64::NAN),
                    });
                }
                return Err(Error::BracketExhausted(
                    "length inversion bracket collapsed without matching".into(),
                ));
            }
        }
        Err(Error::BracketExhausted(
            "length inversion did not converge in 200 bisection steps".into(),
        ))
    }

    /// `c_hat(l) = l * c(l)` where `L(k, c(l)) = l`.
    pub fn c_hat(&mut self, l: T) -> Result<T> {
        Ok(l * self.invert_length(l)?)
    }

    /// Largest boundary length the solver represents: `L(k, c)` at the
    /// near-blow-up cap `c = sqrt(-k) (1 - 1e-3)`. Computed once and cached.
    pub fn reachable_max(&mut self) -> Result<T> {
        if let Some(v) = self.reachable_max {
            return Ok(v);
        }
        let c_top = (-self.k).sqrt() * (T::one() - real::<T>(1e-3));
        let v = self.length_at(c_top)?;
        self.reachable_max = Some(v);
        Ok(v)
    }

    /// Like [`c_hat`](Self::c_hat), but returns `None` when `l` exceeds the
    /// reachable length range instead of failing, so root finders can treat
    /// such `l` as lying above the root.
    pub fn c_hat_checked(&mut self, l: T) -> Result<Option<T>> {
        if l > self.reachable_max()? {
            return Ok(None);
        }
        self.c_hat(l).map(Some)
    }
}

/// One-shot inversion with a cold cache.
pub fn invert_length<T: Real>(
    ops: &DiscreteOperators<T>,
    l: T,
    opts: &SolverOptions<T>,
) -> Result<T> {
    CurvatureLengthMap::new(ops, -T::one(), opts.clone())?.invert_length(l)
}

/// Checks the exact scaling identity with two cold-start solves: if `u`
/// solves (k, c) then `u + log lambda` solves `(k / lambda^2, c / lambda)`.
/// Returns the largest of the state, length, and area deviations.
pub fn verify_scaling<T: Real>(
    ops: &DiscreteOperators<T>,
    k: T,
    c: T,
    lambda: T,
    opts: &SolverOptions<T>,
) -> Result<T> {
    if !(k < T::zero()) || !(lambda > T::zero()) {
        return Err(Error::Precondition(
            "verify_scaling requires k < 0 and lambda > 0".into(),
        ));
    }
    let base = CurvatureTarget::new(k, c)?;
    let scaled = CurvatureTarget::new(k / (lambda * lambda), c / lambda)?;
    let r1 = solve(ops, &base, ConformalState::zeros(ops.vertex_count()), opts)?;
    let r2 = solve(ops, &scaled, ConformalState::zeros(ops.vertex_count()), opts)?;
    let shifted = r1.state.shifted(lambda.ln());
    let dev_u = r2.state.max_abs_diff(&shifted);
    let dev_l = ((r2.boundary_length - lambda * r1.boundary_length)
        / (lambda * r1.boundary_length))
        .abs();
    let dev_a = ((r2.area - lambda * lambda * r1.area) / (lambda * lambda * r1.area)).abs();
    Ok(dev_u.max(dev_l).max(dev_a))
}
