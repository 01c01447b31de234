//! Self-occlusion detection and limb-length-driven depth recovery.
//!
//! When keypoints line up along a camera ray the sensor reports the depth of
//! the nearest surface for all of them. For each such group, one member (the
//! occluder) is assumed to carry its true depth; the others slide along their
//! viewing rays, no nearer than the reported depth, until the limb lengths
//! around the group match the calibration. Every member is tried as the
//! occluder and the assignment with the lowest residual wins.
//!
//! The residual minimized per group is `Σ (‖p_a − p_b‖² − L²)²` over the
//! calibrated limbs touching the group, in m⁴.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Vector3};

use super::{BodyPart, Keypoint2D, LimbCalibration, Skeleton3D};

/// Parts whose 2D keypoints lie within `threshold_px` of each other,
/// closed transitively. Only detected keypoints (confidence > 0) take part,
/// and only groups of two or more are returned, each sorted by part.
pub fn detect_occlusions(keypoints: &[Keypoint2D], threshold_px: f64) -> Vec<Vec<BodyPart>> {
    let kps: Vec<&Keypoint2D> = keypoints.iter().filter(|k| k.confidence > 0.0).collect();
    let mut parent: Vec<usize> = (0..kps.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..kps.len() {
        for j in i + 1..kps.len() {
            let d = ((kps[i].u - kps[j].u).powi(2) + (kps[i].v - kps[j].v).powi(2)).sqrt();
            if d < threshold_px {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<BodyPart>> = BTreeMap::new();
    for (i, kp) in kps.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(kp.part);
    }
    let mut out: Vec<Vec<BodyPart>> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|mut g| {
            g.sort();
            g.dedup();
            g
        })
        .collect();
    out.sort();
    out
}

/// Stopping rules and depth bounds for the per-group solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Valid sensor range in meters; latent depths are projected into it.
    pub depth_range: (f64, f64),
    pub max_iterations: usize,
    /// Objective threshold in m⁴.
    pub objective_tol: f64,
    /// Step-length threshold in m.
    pub step_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            depth_range: (0.2, 10.0),
            max_iterations: 200,
            objective_tol: 1e-10,
            step_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStatus {
    Resolved,
    /// Iteration budget exhausted; the best iterate was kept.
    NotConverged,
    /// No calibrated limb touches the group; its parts were invalidated.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOutcome {
    pub parts: Vec<BodyPart>,
    pub status: GroupStatus,
    /// Part kept at its measured depth.
    pub occluder: Option<BodyPart>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
enum End {
    Var(usize),
    Fixed(Vector3<f64>),
}

#[derive(Debug, Clone, Copy)]
struct Term {
    a: End,
    b: End,
    len_sq: f64,
}

/// Least-squares problem over the depths of a group's members.
struct GroupProblem {
    rays: Vec<Vector3<f64>>,
    terms: Vec<Term>,
}

impl GroupProblem {
    fn point(&self, e: End, d: &[f64]) -> Vector3<f64> {
        match e {
            End::Var(i) => self.rays[i] * d[i],
            End::Fixed(p) => p,
        }
    }

    fn objective(&self, d: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s = (self.point(t.a, d) - self.point(t.b, d)).norm_squared() - t.len_sq;
                s * s
            })
            .sum()
    }

    /// Objective, gradient and exact Hessian.
    fn derivatives(&self, d: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = d.len();
        let mut f = 0.0;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for t in &self.terms {
            let delta = self.point(t.a, d) - self.point(t.b, d);
            let s = delta.norm_squared() - t.len_sq;
            f += s * s;
            // ∂s/∂d_i and ∂²s/∂d_i∂d_j for the (at most two) variables involved
            let mut ds: Vec<(usize, f64, Vector3<f64>)> = Vec::with_capacity(2);
            if let End::Var(i) = t.a {
                ds.push((i, 2.0 * delta.dot(&self.rays[i]), self.rays[i]));
            }
            if let End::Var(j) = t.b {
                ds.push((j, -2.0 * delta.dot(&self.rays[j]), -self.rays[j]));
            }
            for &(i, si, ri) in &ds {
                g[i] += 2.0 * s * si;
                for &(j, sj, rj) in &ds {
                    let s_ij = 2.0 * ri.dot(&rj);
                    h[(i, j)] += 2.0 * si * sj + 2.0 * s * s_ij;
                }
            }
        }
        (f, g, h)
    }

    /// Projected damped Newton within `[lo, hi]`.
    fn solve(&self, mut d: Vec<f64>, lo: &[f64], hi: &[f64], cfg: &SolverConfig) -> (Vec<f64>, f64, usize, bool) {
        let n = d.len();
        for i in 0..n {
            d[i] = d[i].clamp(lo[i], hi[i]);
        }
        let mut lambda = 1e-6;
        let mut iterations = 0;
        let (mut f, mut g, mut h) = self.derivatives(&d);
        while iterations < cfg.max_iterations {
            if f < cfg.objective_tol {
                return (d, f, iterations, true);
            }
            iterations += 1;
            let free: Vec<usize> = (0..n)
                .filter(|&i| lo[i] < hi[i] && !(d[i] <= lo[i] && g[i] > 0.0) && !(d[i] >= hi[i] && g[i] < 0.0))
                .collect();
            if free.is_empty() {
                return (d, f, iterations, true);
            }
            let m = free.len();
            let hf = DMatrix::from_fn(m, m, |r, c| h[(free[r], free[c])]);
            let gf = DVector::from_fn(m, |r, _| g[free[r]]);
            let mut accepted = false;
            while lambda < 1e12 {
                let damped = &hf + DMatrix::identity(m, m) * lambda;
                let Some(chol) = damped.cholesky() else {
                    lambda *= 4.0;
                    continue;
                };
                let step = chol.solve(&(-&gf));
                let mut trial = d.clone();
                for (k, &i) in free.iter().enumerate() {
                    trial[i] = (d[i] + step[k]).clamp(lo[i], hi[i]);
                }
                let f_trial = self.objective(&trial);
                if f_trial < f {
                    let moved = trial.iter().zip(&d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    d = trial;
                    lambda = (lambda / 3.0).max(1e-12);
                    (f, g, h) = self.derivatives(&d);
                    accepted = true;
                    if moved < cfg.step_tol {
                        return (d, f, iterations, true);
                    }
                    break;
                }
                lambda *= 4.0;
            }
            if !accepted {
                // no descent direction left at any damping: a stationary point
                return (d, f, iterations, true);
            }
        }
        let converged = f < cfg.objective_tol;
        (d, f, iterations, converged)
    }
}

/// Residual of the limb lengths around `parts` for the skeleton as it stands.
/// Zero exactly when every calibrated limb touching the group has its
/// calibrated length.
pub fn group_objective(skel: &Skeleton3D, parts: &[BodyPart], calib: &LimbCalibration) -> f64 {
    calib
        .limbs()
        .filter(|(l, _)| parts.iter().any(|&p| l.touches(p)))
        .filter_map(|(l, len)| skel.limb_length(l).map(|d| (d * d - len * len).powi(2)))
        .sum()
}

/// Re-estimates the depths of each occlusion group independently. Parts
/// outside the groups are never modified.
pub fn resolve_occlusions(
    skel: &Skeleton3D,
    groups: &[Vec<BodyPart>],
    calib: &LimbCalibration,
    cfg: &SolverConfig,
) -> (Skeleton3D, Vec<GroupOutcome>) {
    let mut out = skel.clone();
    let mut outcomes = Vec::with_capacity(groups.len());
    for group in groups {
        outcomes.push(resolve_group(skel, &mut out, group, calib, cfg));
    }
    (out, outcomes)
}

fn resolve_group(
    input: &Skeleton3D,
    out: &mut Skeleton3D,
    group: &[BodyPart],
    calib: &LimbCalibration,
    cfg: &SolverConfig,
) -> GroupOutcome {
    let members: Vec<(BodyPart, Vector3<f64>)> = group.iter().filter_map(|&p| input.get(p).map(|v| (p, v))).collect();
    let index_of = |p: BodyPart| members.iter().position(|(q, _)| *q == p);
    let mut terms = Vec::new();
    let mut incident: Vec<Vec<f64>> = vec![Vec::new(); members.len()];
    for (limb, len) in calib.limbs() {
        let (ia, ib) = (index_of(limb.0), index_of(limb.1));
        let end = |idx: Option<usize>, part: BodyPart| match idx {
            Some(i) => Some(End::Var(i)),
            None => input.get(part).map(End::Fixed),
        };
        if ia.is_none() && ib.is_none() {
            continue;
        }
        let (Some(a), Some(b)) = (end(ia, limb.0), end(ib, limb.1)) else {
            continue;
        };
        for i in [ia, ib].into_iter().flatten() {
            incident[i].push(len);
        }
        terms.push(Term {
            a,
            b,
            len_sq: len * len,
        });
    }
    let mut outcome = GroupOutcome {
        parts: group.to_vec(),
        status: GroupStatus::Resolved,
        occluder: None,
        objective: 0.0,
        iterations: 0,
    };
    if members.len() < 2 {
        return outcome;
    }
    if terms.is_empty() {
        for &p in group {
            out.invalidate(p);
        }
        outcome.status = GroupStatus::Unresolved;
        return outcome;
    }
    let rays: Vec<Vector3<f64>> = members.iter().map(|(_, p)| p / p.z).collect();
    let observed: Vec<f64> = members.iter().map(|(_, p)| p.z).collect();
    let problem = GroupProblem { rays, terms };
    let (range_lo, range_hi) = cfg.depth_range;

    let mut best: Option<(Vec<f64>, f64, usize, bool, usize)> = None;
    for front in 0..members.len() {
        let mut lo = Vec::with_capacity(members.len());
        let mut hi = Vec::with_capacity(members.len());
        let mut init = Vec::with_capacity(members.len());
        for i in 0..members.len() {
            if i == front {
                lo.push(observed[i]);
                hi.push(observed[i]);
                init.push(observed[i]);
                continue;
            }
            let floor = observed[i].max(range_lo);
            lo.push(floor);
            hi.push(range_hi.max(floor));
            // start one limb length behind the occluding surface
            let link = calib
                .limbs()
                .find(|(l, _)| l.touches(members[i].0) && l.other(members[i].0) == Some(members[front].0))
                .map(|(_, len)| len)
                .or_else(|| incident[i].iter().copied().reduce(f64::min))
                .unwrap_or(0.0);
            init.push(observed[i] + link / problem.rays[i].norm());
        }
        let (d, f, iters, converged) = problem.solve(init, &lo, &hi, cfg);
        let better = match &best {
            None => true,
            Some((_, bf, ..)) => f < *bf,
        };
        if better {
            best = Some((d, f, iters, converged, front));
        }
    }
    let (d, f, iters, converged, front) = best.expect("at least two members");
    for (i, (part, _)) in members.iter().enumerate() {
        out.set(*part, problem.rays[i] * d[i]);
    }
    outcome.status = if converged {
        GroupStatus::Resolved
    } else {
        GroupStatus::NotConverged
    };
    outcome.occluder = Some(members[front].0);
    outcome.objective = f;
    outcome.iterations = iters;
    outcome
}
