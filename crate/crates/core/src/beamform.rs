//! Max-min multicast beamforming: the per-pRB semidefinite relaxation on
//! the spectahedron and rank-one beamformer recovery.
//!
//! The relaxed problem `maximize min_v Tr(G H_v)` over `{G >= 0, Tr G = 1}`
//! is attacked from both sides. A matrix exponentiated-gradient ascent
//! (entropic mirror descent) produces a feasible primal iterate, refined by
//! exact pairwise mixing of a small candidate pool. The reported value is
//! certified through the dual
//! `min_{lambda in simplex} lambda_max(sum_v lambda_v H_v)`,
//! minimized by golden section (two users) or the ellipsoid method: any
//! dual point upper-bounds the primal, so `extracted <= value` always.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::hermitian::{
    eig_hermitian, expm_hermitian_normalized, sqrt_psd, top_eigenpair, C64, CMat,
};

/// One pRB's multicast instance: `H_v = h_v h_v^H` per associated agent.
#[derive(Debug, Clone)]
pub struct MulticastProblem {
    pub h_matrices: Vec<CMat>,
}

#[derive(Debug, Error)]
pub enum BeamformError {
    #[error("multicast problem has no users")]
    Empty,
    #[error("matrix {0} is not Hermitian")]
    NotHermitian(usize),
    #[error("matrix {0} has mismatched dimension")]
    DimensionMismatch(usize),
}

impl MulticastProblem {
    pub fn new(h_matrices: Vec<CMat>) -> Result<Self, BeamformError> {
        if h_matrices.is_empty() {
            return Err(BeamformError::Empty);
        }
        let n = h_matrices[0].n;
        for (idx, m) in h_matrices.iter().enumerate() {
            if m.n != n {
                return Err(BeamformError::DimensionMismatch(idx));
            }
            let scale = m.frobenius_norm().max(1.0);
            if !m.is_hermitian(1e-9 * scale) {
                return Err(BeamformError::NotHermitian(idx));
            }
        }
        Ok(MulticastProblem { h_matrices })
    }

    pub fn from_channels(channels: &[Vec<C64>]) -> Result<Self, BeamformError> {
        if channels.is_empty() {
            return Err(BeamformError::Empty);
        }
        Ok(MulticastProblem {
            h_matrices: channels.iter().map(|h| CMat::outer(h)).collect(),
        })
    }

    pub fn n_users(&self) -> usize {
        self.h_matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.h_matrices[0].n
    }
}

/// Result of the relaxed solve.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Feasible primal iterate (Hermitian, PSD, unit trace).
    pub g_matrix: CMat,
    /// Certified optimal value (dual upper bound meeting the primal).
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solved beam for one pRB.
#[derive(Debug, Clone)]
pub struct BeamSolution {
    pub g_matrix: CMat,
    /// Extracted unit-norm beamformer.
    pub beamformer: Vec<C64>,
    pub sdp_value: f64,
    pub extracted_value: f64,
    pub converged: bool,
}

fn min_trace(g: &CMat, hs: &[CMat]) -> (usize, f64) {
    let mut best_idx = 0;
    let mut best = f64::INFINITY;
    for (idx, h) in hs.iter().enumerate() {
        let t = g.trace_product(h);
        if t < best {
            best = t;
            best_idx = idx;
        }
    }
    (best_idx, best)
}

/// Exact maximizer of `min_v ((1-t) a_v + t b_v)` over `t in [0, 1]`.
/// Candidate points are the endpoints and all pairwise line crossings.
fn best_mix(a: &[f64], b: &[f64]) -> (f64, f64) {
    let eval = |t: f64| {
        a.iter()
            .zip(b)
            .map(|(&av, &bv)| (1.0 - t) * av + t * bv)
            .fold(f64::INFINITY, f64::min)
    };
    let mut best_t = 0.0;
    let mut best_v = eval(0.0);
    let mut consider = |t: f64| {
        if (0.0..=1.0).contains(&t) {
            let v = eval(t);
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
    };
    consider(1.0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let denom = (b[i] - a[i]) - (b[j] - a[j]);
            if denom.abs() > 1e-300 {
                consider((a[j] - a[i]) / denom);
            }
        }
    }
    (best_t, best_v)
}

struct Candidate {
    g: CMat,
    traces: Vec<f64>,
}

impl Candidate {
    fn new(g: CMat, hs: &[CMat]) -> Candidate {
        let traces = hs.iter().map(|h| g.trace_product(h)).collect();
        Candidate { g, traces }
    }

    fn value(&self) -> f64 {
        self.traces.iter().fold(f64::INFINITY, |m, &t| m.min(t))
    }
}

/// Entropic mirror ascent on the spectahedron. The log-domain potential
/// accumulates the subgradient of the active minimum (ties to the lowest
/// user index), step `0.1 / max_v ||H_v||`. Returns the best iterate, its
/// value, whether the plateau stop fired, and the iterations used.
fn mirror_ascent(
    hs: &[CMat],
    max_iters: usize,
    plateau_tol: f64,
) -> (CMat, f64, bool, usize) {
    let n = hs[0].n;
    let max_norm = hs
        .iter()
        .map(|h| top_eigenpair(h).0)
        .fold(0.0f64, f64::max);
    let mut g = CMat::identity(n).scale(1.0 / n as f64);
    if max_norm <= 0.0 {
        return (g, 0.0, true, 0);
    }
    let step = 0.1 / max_norm;
    let mut potential = CMat::zeros(n);
    let (_, mut best_value) = min_trace(&g, hs);
    let mut best_g = g.clone();
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut plateaued = false;

    for iter in 0..max_iters {
        iterations = iter + 1;
        let (active, value) = min_trace(&g, hs);
        if value > best_value + plateau_tol * best_value.abs().max(1e-12) {
            best_value = value;
            best_g = g.clone();
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 50 {
                plateaued = true;
                break;
            }
        }
        potential.add_scaled(&hs[active], step);
        g = expm_hermitian_normalized(&potential);
    }
    (best_g, best_value, plateaued, iterations)
}

/// Golden-section minimization of a 1-D convex function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Dual function `lambda_max(sum_v lambda_v H_v)` and a maximizing
/// eigenvector.
fn dual_value(hs: &[CMat], lambda: &[f64]) -> (f64, Vec<C64>) {
    let n = hs[0].n;
    let mut a = CMat::zeros(n);
    for (h, &l) in hs.iter().zip(lambda) {
        if l != 0.0 {
            a.add_scaled(h, l);
        }
    }
    top_eigenpair(&a)
}

/// Minimize the dual over the user simplex. Returns the best value seen
/// (an upper bound on the primal) and its mixing weights.
fn minimize_dual(hs: &[CMat], tol: f64) -> (f64, Vec<f64>) {
    let v = hs.len();
    let seed = match v {
        1 => {
            let (lam, _) = top_eigenpair(&hs[0]);
            return (lam, vec![1.0]);
        }
        2 => {
            let f = |t: f64| dual_value(hs, &[t, 1.0 - t]).0;
            let (t, val) = golden_min(f, 0.0, 1.0, 90);
            // Endpoints can win when one user dominates.
            let mut best = (val, vec![t, 1.0 - t]);
            for cand in [0.0, 1.0] {
                let fv = f(cand);
                if fv < best.0 {
                    best = (fv, vec![cand, 1.0 - cand]);
                }
            }
            best
        }
        _ => minimize_dual_ellipsoid(hs, tol),
    };
    polish_dual(hs, seed)
}

/// Line-search descent from a near-optimal dual point: golden section along
/// segments toward every simplex vertex and the uniform point squeezes out
/// the ellipsoid's residual gap on smooth instances.
fn polish_dual(hs: &[CMat], seed: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    let v = hs.len();
    let (mut best_val, mut best_lambda) = seed;
    let uniform = vec![1.0 / v as f64; v];
    for _pass in 0..4 {
        let mut improved = false;
        for target in 0..=v {
            let dir: &[f64] = if target == v {
                &uniform
            } else {
                // vertex e_target, built on the fly below
                &[]
            };
            let mix = |t: f64| -> Vec<f64> {
                (0..v)
                    .map(|i| {
                        let d = if target == v {
                            dir[i]
                        } else if i == target {
                            1.0
                        } else {
                            0.0
                        };
                        (1.0 - t) * best_lambda[i] + t * d
                    })
                    .collect()
            };
            let f = |t: f64| dual_value(hs, &mix(t)).0;
            let (t, val) = golden_min(f, 0.0, 1.0, 70);
            if val < best_val - 1e-15 * best_val.abs().max(1e-12) {
                best_lambda = mix(t);
                best_val = val;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    (best_val, best_lambda)
}

fn minimize_dual_ellipsoid(hs: &[CMat], tol: f64) -> (f64, Vec<f64>) {
    let v = hs.len();
    let d = v - 1;
    let mut x = vec![1.0 / v as f64; d];
    // Shape matrix of the ellipsoid, initialized to a ball containing the
    // simplex slice.
    let r0: f64 = 1.5;
    let mut p = vec![0.0; d * d];
    for i in 0..d {
        p[i * d + i] = r0 * r0;
    }
    let full = |x: &[f64]| {
        let mut lambda = Vec::with_capacity(v);
        lambda.extend_from_slice(x);
        lambda.push(1.0 - x.iter().sum::<f64>());
        lambda
    };

    let mut best_val = f64::INFINITY;
    let mut best_lambda = full(&x);
    let iters = (8.0 * d as f64 * (d + 1) as f64 * (4.0 / tol).ln()).ceil() as usize;
    let iters = iters.clamp(400, 20_000);

    for _ in 0..iters {
        // Separating cut for simplex violations, else objective subgradient.
        let mut g = vec![0.0; d];
        let sum: f64 = x.iter().sum();
        if let Some(neg) = (0..d).find(|&i| x[i] < 0.0) {
            g[neg] = -1.0;
        } else if sum > 1.0 {
            g.iter_mut().for_each(|gi| *gi = 1.0);
        } else {
            let lambda = full(&x);
            let (val, u) = dual_value(hs, &lambda);
            if val < best_val {
                best_val = val;
                best_lambda = lambda;
            }
            let quads: Vec<f64> = hs.iter().map(|h| h.quad_form(&u)).collect();
            for i in 0..d {
                g[i] = quads[i] - quads[v - 1];
            }
        }

        // Standard central-cut ellipsoid update.
        let mut pg = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                pg[i] += p[i * d + j] * g[j];
            }
        }
        let gpg: f64 = g.iter().zip(&pg).map(|(gi, pgi)| gi * pgi).sum();
        if gpg <= 1e-300 {
            break;
        }
        let denom = gpg.sqrt();
        let d1 = d as f64;
        for i in 0..d {
            x[i] -= pg[i] / denom / (d1 + 1.0);
        }
        let scale = d1 * d1 / (d1 * d1 - 1.0).max(1e-12);
        for i in 0..d {
            for j in 0..d {
                p[i * d + j] =
                    scale * (p[i * d + j] - 2.0 / (d1 + 1.0) * pg[i] * pg[j] / gpg);
            }
        }
        // Re-symmetrize against drift.
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (p[i * d + j] + p[j * d + i]);
                p[i * d + j] = avg;
                p[j * d + i] = avg;
            }
        }
    }
    (best_val, best_lambda)
}

/// Solve the relaxed max-min multicast problem for one pRB.
///
/// `max_iters` bounds the mirror-ascent iterations; `tol` is the relative
/// accuracy target for the certified value.
pub fn solve_multicast_sdp(
    prob: &MulticastProblem,
    max_iters: usize,
    tol: f64,
) -> Result<SdpSolution, BeamformError> {
    let hs = &prob.h_matrices;
    let n = prob.dim();

    if hs.len() == 1 {
        // Single user: the top eigenpair is exact (maximal-ratio beam).
        let (lam, u) = top_eigenpair(&hs[0]);
        let mut g = CMat::outer(&u);
        g.symmetrize();
        return Ok(SdpSolution {
            g_matrix: g,
            value: lam,
            converged: true,
            iterations: 0,
        });
    }

    let (g_meg, _meg_value, plateaued, iterations) = mirror_ascent(hs, max_iters, 1e-6);
    let (dual_ub, dual_lambda) = minimize_dual(hs, tol.max(1e-9));

    // Candidate pool: mirror-ascent iterate, the eigenvectors of the
    // optimal dual mix (the primal support lives in its top eigenspace),
    // per-user maximal-ratio beams, and the uniform matrix.
    let mut candidates: Vec<Candidate> = Vec::new();
    candidates.push(Candidate::new(g_meg, hs));
    let n_f = n as f64;
    candidates.push(Candidate::new(CMat::identity(n).scale(1.0 / n_f), hs));
    let mut a_star = CMat::zeros(n);
    for (h, &l) in hs.iter().zip(&dual_lambda) {
        a_star.add_scaled(h, l);
    }
    let star_eig = eig_hermitian(&a_star);
    for vec in &star_eig.vectors {
        candidates.push(Candidate::new(CMat::outer(vec), hs));
    }
    // Phase mixes of the two leading eigenvectors cover rank-one optima
    // hiding inside a degenerate top eigenspace.
    if n >= 2 {
        let (u1, u2) = (&star_eig.vectors[0], &star_eig.vectors[1]);
        for k in 0..8 {
            let rot = C64::from_polar(
                std::f64::consts::FRAC_1_SQRT_2,
                2.0 * std::f64::consts::PI * k as f64 / 8.0,
            );
            let mixed: Vec<C64> = u1
                .iter()
                .zip(u2)
                .map(|(a, b)| a * std::f64::consts::FRAC_1_SQRT_2 + b * rot)
                .collect();
            candidates.push(Candidate::new(CMat::outer(&mixed), hs));
        }
    }
    for h in hs {
        let (lam, u) = top_eigenpair(h);
        if lam > 0.0 {
            candidates.push(Candidate::new(CMat::outer(&u), hs));
        }
    }

    // Exact pairwise mixing polish: convex combinations stay feasible and
    // their per-user traces combine linearly.
    let mut best_idx = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.value() > candidates[best_idx].value() {
            best_idx = i;
        }
    }
    let mut best = Candidate {
        g: candidates[best_idx].g.clone(),
        traces: candidates[best_idx].traces.clone(),
    };
    for _pass in 0..3 {
        let mut improved = false;
        for cand in &candidates {
            let (t, val) = best_mix(&best.traces, &cand.traces);
            if val > best.value() + 1e-15 * best.value().abs().max(1e-12) {
                let mut g = best.g.scale(1.0 - t);
                g.add_scaled(&cand.g, t);
                let traces = best
                    .traces
                    .iter()
                    .zip(&cand.traces)
                    .map(|(&a, &b)| (1.0 - t) * a + t * b)
                    .collect();
                best = Candidate { g, traces };
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }

    let primal_value = best.value();
    let mut g_final = best.g;
    g_final.symmetrize();
    let tr = g_final.trace().re;
    if (tr - 1.0).abs() > 1e-14 && tr > 0.0 {
        g_final = g_final.scale(1.0 / tr);
    }
    let value = dual_ub.max(primal_value);
    let gap = (value - primal_value).abs();
    let converged = plateaued || gap <= tol * value.abs().max(1e-12);

    Ok(SdpSolution {
        g_matrix: g_final,
        value,
        converged,
        iterations,
    })
}

/// Worst-user beamforming gain `min_v |h_v^H g|^2`.
pub fn multicast_min_gain(g: &[C64], h_list: &[Vec<C64>]) -> Result<f64, BeamformError> {
    if h_list.is_empty() {
        return Err(BeamformError::Empty);
    }
    Ok(h_list
        .iter()
        .map(|h| {
            let dot: C64 = h.iter().zip(g).map(|(hv, gv)| hv.conj() * gv).sum();
            dot.norm_sqr()
        })
        .fold(f64::INFINITY, f64::min))
}

fn normalize(v: &mut [C64]) -> bool {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return false;
    }
    v.iter_mut().for_each(|c| *c /= norm);
    true
}

/// Recover a unit-norm beamformer from the relaxed solution.
///
/// Candidates: the principal eigenvector of `G`, `n_rand` Gaussian
/// randomizations `G^{1/2} xi`, each user's maximal-ratio beam, and
/// phase-aligned equal-gain pairs (these settle ties when `G`'s top
/// eigenspace is degenerate). The candidate with the largest worst-user
/// gain wins; earlier candidates win ties.
pub fn extract_beamformer(
    g: &CMat,
    h_list: &[Vec<C64>],
    n_rand: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<C64>, f64) {
    assert!(!h_list.is_empty(), "extraction needs at least one user");
    let n = g.n;
    let mut best: Option<(Vec<C64>, f64)> = None;
    let mut offer = |candidate: Vec<C64>, h_list: &[Vec<C64>]| {
        let gain = multicast_min_gain(&candidate, h_list).expect("nonempty");
        match &best {
            Some((_, cur)) if *cur >= gain => {}
            _ => best = Some((candidate, gain)),
        }
    };

    let eig = eig_hermitian(g);
    offer(eig.vectors[0].clone(), h_list);

    let root = sqrt_psd(g);
    for _ in 0..n_rand {
        let xi: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        let mut cand = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                cand[i] += root[(i, j)] * xi[j];
            }
        }
        if normalize(&mut cand) {
            offer(cand, h_list);
        }
    }

    let mut unit_users: Vec<Vec<C64>> = Vec::new();
    for h in h_list {
        let mut u = h.clone();
        if normalize(&mut u) {
            offer(u.clone(), h_list);
            unit_users.push(u);
        }
    }

    // Equal-gain pair sweep over a fixed phase grid.
    let phases = 64;
    for i in 0..unit_users.len() {
        for j in (i + 1)..unit_users.len() {
            for k in 0..phases {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / phases as f64;
                let rot = C64::from_polar(1.0, phi);
                let mut cand: Vec<C64> = unit_users[i]
                    .iter()
                    .zip(&unit_users[j])
                    .map(|(a, b)| a + b * rot)
                    .collect();
                if normalize(&mut cand) {
                    offer(cand, h_list);
                }
            }
        }
    }

    best.expect("at least one candidate")
}

/// Convenience wrapper: solve the relaxation and recover a beam.
pub fn solve_and_extract(
    prob: &MulticastProblem,
    channels: &[Vec<C64>],
    max_iters: usize,
    tol: f64,
    n_rand: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BeamSolution, BeamformError> {
    let sol = solve_multicast_sdp(prob, max_iters, tol)?;
    let (beamformer, extracted_value) = extract_beamformer(&sol.g_matrix, channels, n_rand, rng);
    Ok(BeamSolution {
        g_matrix: sol.g_matrix,
        beamformer,
        sdp_value: sol.value,
        extracted_value,
        converged: sol.converged,
    })
}
