//! Analog beam codebooks and the digital precoding schemes.
//!
//! All schemes share the two-stage hybrid structure: an analog stage whose
//! columns are steering vectors picked from a per-user codebook, and a
//! low-dimensional digital stage designed on the resulting effective
//! channel. The transmit power constraint is enforced through the scalar
//! eta = ||F_RF * F_BB||_F^2, so the radiated power is exactly the budget
//! after scaling by sqrt(p_t / eta).

use crate::channel::ChannelRealization;
use crate::geometry::{ura_response, UraConfig};
use crate::linalg::{herm_gen_eig, solve_hermitian_pd, svd, ComplexMatrix, LinalgError};
use crate::{Error, Result};
use num_complex::Complex64;

/// Steering-vector codebooks for one link: transmit responses at the ray
/// departure angles and receive responses at the ray arrival angles.
#[derive(Debug, Clone)]
pub struct Codebooks {
    /// Transmit codebook, one column per ray.
    pub a_t: ComplexMatrix,
    /// Receive codebook, one column per ray.
    pub a_r: ComplexMatrix,
}

/// Builds the analog codebooks of a link from its ray geometry.
pub fn build_codebooks(desired: &ChannelRealization, tp: &UraConfig, ue: &UraConfig) -> Codebooks {
    assert!(
        !desired.rays.is_empty(),
        "a realization always carries rays"
    );
    let n_t = tp.num_elements();
    let n_r = ue.num_elements();
    let mut a_t = ComplexMatrix::zeros(n_t, desired.rays.len());
    let mut a_r = ComplexMatrix::zeros(n_r, desired.rays.len());
    for (j, ray) in desired.rays.iter().enumerate() {
        a_t.set_column(j, &ura_response(tp, ray.aod_azimuth, ray.aod_elevation));
        a_r.set_column(j, &ura_response(ue, ray.aoa_azimuth, ray.aoa_elevation));
    }
    Codebooks { a_t, a_r }
}

/// Analog stage produced by greedy codebook selection.
#[derive(Debug, Clone)]
pub struct RfSelection {
    pub f_rf: ComplexMatrix,
    pub w_rf: ComplexMatrix,
    /// Codebook column indices behind `f_rf`, in selection order.
    pub tx_indices: Vec<usize>,
    /// Codebook column indices behind `w_rf`, in selection order.
    pub rx_indices: Vec<usize>,
    /// Final coupling objective ||w_rf^H h f_rf||_F^2.
    pub objective: f64,
}

/// Greedy joint selection of analog beams maximizing the coupled channel
/// energy ||w_rf^H h f_rf||_F^2.
///
/// Each step adds the transmit and receive codebook columns (jointly while
/// both sides still need chains) that raise the objective the most given
/// the columns already fixed. Columns are not repeated while unused ones
/// remain; an exhausted codebook falls back to reuse with a diagnostic.
pub fn rf_select_max(
    h: &ComplexMatrix,
    cb: &Codebooks,
    n_tx_chains: usize,
    n_rx_chains: usize,
) -> Result<RfSelection> {
    if cb.a_t.cols() == 0 || cb.a_r.cols() == 0 {
        return Err(Error::Config("empty analog codebook".into()));
    }
    if n_tx_chains == 0 || n_rx_chains == 0 {
        return Err(Error::Config("chain counts must be at least one".into()));
    }
    let coupling = cb.a_r.h().mul(h).mul(&cb.a_t);
    let (nr, nt) = (coupling.rows(), coupling.cols());
    let gain = |i: usize, j: usize| coupling[(i, j)].norm_sqr();

    let mut tx_sel: Vec<usize> = Vec::with_capacity(n_tx_chains);
    let mut rx_sel: Vec<usize> = Vec::with_capacity(n_rx_chains);
    let mut warned = false;
    let mut candidates = |sel: &[usize], total: usize| -> Vec<usize> {
        let unused: Vec<usize> = (0..total).filter(|c| !sel.contains(c)).collect();
        if unused.is_empty() {
            if !warned {
                log::warn!(
                    "analog codebook exhausted ({total} beams); reusing columns to fill chains"
                );
                warned = true;
            }
            (0..total).collect()
        } else {
            unused
        }
    };

    for _ in 0..n_tx_chains.max(n_rx_chains) {
        let tx_adding = tx_sel.len() < n_tx_chains;
        let rx_adding = rx_sel.len() < n_rx_chains;
        match (tx_adding, rx_adding) {
            (true, true) => {
                let tx_cand = candidates(&tx_sel, nt);
                let rx_cand = candidates(&rx_sel, nr);
                let mut best = (rx_cand[0], tx_cand[0], f64::NEG_INFINITY);
                for &i in &rx_cand {
                    let row_fixed: f64 = tx_sel.iter().map(|&j| gain(i, j)).sum();
                    for &j in &tx_cand {
                        let col_fixed: f64 = rx_sel.iter().map(|&i2| gain(i2, j)).sum();
                        let delta = gain(i, j) + row_fixed + col_fixed;
                        if delta > best.2 {
                            best = (i, j, delta);
                        }
                    }
                }
                rx_sel.push(best.0);
                tx_sel.push(best.1);
            }
            (true, false) => {
                let tx_cand = candidates(&tx_sel, nt);
                let mut best = (tx_cand[0], f64::NEG_INFINITY);
                for &j in &tx_cand {
                    let delta: f64 = rx_sel.iter().map(|&i| gain(i, j)).sum();
                    if delta > best.1 {
                        best = (j, delta);
                    }
                }
                tx_sel.push(best.0);
            }
            (false, true) => {
                let rx_cand = candidates(&rx_sel, nr);
                let mut best = (rx_cand[0], f64::NEG_INFINITY);
                for &i in &rx_cand {
                    let delta: f64 = tx_sel.iter().map(|&j| gain(i, j)).sum();
                    if delta > best.1 {
                        best = (i, delta);
                    }
                }
                rx_sel.push(best.0);
            }
            (false, false) => unreachable!("loop bound matches chain counts"),
        }
    }

    let objective = rx_sel
        .iter()
        .map(|&i| tx_sel.iter().map(|&j| gain(i, j)).sum::<f64>())
        .sum();
    Ok(RfSelection {
        f_rf: cb.a_t.take_columns(&tx_sel),
        w_rf: cb.a_r.take_columns(&rx_sel),
        tx_indices: tx_sel,
        rx_indices: rx_sel,
        objective,
    })
}

/// Complete two-stage weights of one user under one scheme.
#[derive(Debug, Clone)]
pub struct HybridWeights {
    pub f_rf: ComplexMatrix,
    pub f_bb: ComplexMatrix,
    pub w_rf: ComplexMatrix,
    pub w_bb: ComplexMatrix,
    /// Power scalar ||f_rf * f_bb||_F^2; dividing the transmit signal by
    /// sqrt(eta) pins radiated power to the budget.
    pub eta: f64,
}

impl HybridWeights {
    pub fn new(
        f_rf: ComplexMatrix,
        f_bb: ComplexMatrix,
        w_rf: ComplexMatrix,
        w_bb: ComplexMatrix,
    ) -> Self {
        let eta = power_scalar(&f_rf, &f_bb);
        Self {
            f_rf,
            f_bb,
            w_rf,
            w_bb,
            eta,
        }
    }
}

/// Power normalization scalar eta = ||f_rf * f_bb||_F^2.
pub fn power_scalar(f_rf: &ComplexMatrix, f_bb: &ComplexMatrix) -> f64 {
    f_rf.mul(f_bb).frob_norm_sq()
}

/// Matched-filter combiner w_bb = effective * f_bb, normalized to unit
/// Frobenius norm.
pub fn matched_combiner(effective: &ComplexMatrix, f_bb: &ComplexMatrix) -> Result<ComplexMatrix> {
    let product = effective.mul(f_bb);
    let norm = product.frob_norm();
    if norm <= 0.0 {
        return Err(Error::Domain(
            "matched combiner is undefined for a vanishing effective channel".into(),
        ));
    }
    Ok(product.scale_re(1.0 / norm))
}

/// Eigenmode transmission on the effective channel: the digital precoder
/// takes the top right singular vectors, the combiner the top left
/// singular vectors of the precoded effective channel.
pub fn baseline_scheme(
    effective: &ComplexMatrix,
    n_streams: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let k = effective.rows().min(effective.cols());
    if n_streams == 0 || n_streams > k {
        return Err(Error::Config(format!(
            "stream count {n_streams} outside 1..={k} for a {}x{} effective channel",
            effective.rows(),
            effective.cols()
        )));
    }
    let f_bb = svd(effective)?.v.leading_columns(n_streams);
    let w_bb = svd(&effective.mul(&f_bb))?.u.leading_columns(n_streams);
    Ok((f_bb, w_bb))
}

/// Leakage-steered analog selection with eigenmode digital precoding and an
/// orthogonal-matching-pursuit hybrid combiner.
///
/// The first analog column minimizes the power leaked into the stacked
/// other-user channels (each scaled by the inverse square root of its path
/// loss); the remaining columns maximize the desired-channel energy. The
/// digital combiner approximates the optimal eigenmode combiner with
/// receive-codebook columns refit by least squares.
pub fn lsp_scheme(
    desired: &ChannelRealization,
    leakage: &[&ChannelRealization],
    cb: &Codebooks,
    n_streams: usize,
    n_tx_chains: usize,
    n_rx_chains: usize,
) -> Result<HybridWeights> {
    if n_tx_chains == 0 || n_rx_chains == 0 {
        return Err(Error::Config("chain counts must be at least one".into()));
    }
    let n_beams = cb.a_t.cols();
    if n_beams == 0 {
        return Err(Error::Config("empty analog codebook".into()));
    }

    // Column gains of the desired channel: ||h a_j||^2 per codebook column.
    let desired_proj = desired.h.mul(&cb.a_t);
    let signal_gain: Vec<f64> = (0..n_beams).map(|j| desired_proj.col_norm_sq(j)).collect();

    // First column: least leakage through the stacked interfered channels,
    // or best signal when there is nobody to protect.
    let first = if leakage.is_empty() {
        argmax(&signal_gain)
    } else {
        let scaled: Vec<ComplexMatrix> = leakage
            .iter()
            .map(|link| link.h.scale_re(link.path_loss_linear.sqrt().recip()))
            .collect();
        let stack = ComplexMatrix::vstack(&scaled.iter().collect::<Vec<_>>());
        let leaked = stack.mul(&cb.a_t);
        let leak_gain: Vec<f64> = (0..n_beams).map(|j| leaked.col_norm_sq(j)).collect();
        argmin(&leak_gain)
    };

    let mut tx_sel = vec![first];
    // Remaining columns: the objective is a sum of per-column energies, so
    // the greedy choice is the top remaining signal gains.
    let mut order: Vec<usize> = (0..n_beams).filter(|&j| j != first).collect();
    order.sort_by(|&a, &b| {
        signal_gain[b]
            .partial_cmp(&signal_gain[a])
            .expect("finite gains")
    });
    let mut warned = false;
    while tx_sel.len() < n_tx_chains {
        let next = order.get(tx_sel.len() - 1).copied().unwrap_or_else(|| {
            if !warned {
                log::warn!(
                    "analog codebook exhausted ({n_beams} beams); reusing columns to fill chains"
                );
                warned = true;
            }
            // Reuse the strongest signal column.
            order.first().copied().unwrap_or(first)
        });
        tx_sel.push(next);
    }
    let f_rf = cb.a_t.take_columns(&tx_sel);

    // Digital precoder: eigenmodes of the precoded desired channel.
    let precoded = desired.h.mul(&f_rf);
    let k = precoded.rows().min(precoded.cols());
    if n_streams == 0 || n_streams > k {
        return Err(Error::Config(format!(
            "stream count {n_streams} outside 1..={k} for the precoded channel"
        )));
    }
    let f_bb = svd(&precoded)?.v.leading_columns(n_streams);

    // Optimal digital combiner, then its codebook decomposition.
    let w_opt = svd(&precoded.mul(&f_bb))?.u.leading_columns(n_streams);
    let (w_rf, w_bb) = omp_combiner(&w_opt, &cb.a_r, n_rx_chains)?;

    Ok(HybridWeights::new(f_rf, f_bb, w_rf, w_bb))
}

/// Orthogonal matching pursuit: approximate `target` with `n_chains`
/// codebook columns and a least-squares baseband matrix.
fn omp_combiner(
    target: &ComplexMatrix,
    codebook: &ComplexMatrix,
    n_chains: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n_beams = codebook.cols();
    let target_norm = target.frob_norm();
    let mut selected: Vec<usize> = Vec::with_capacity(n_chains);
    let mut residual = target.clone();
    let mut warned = false;
    for _ in 0..n_chains {
        let mut pool: Vec<usize> = (0..n_beams).filter(|j| !selected.contains(j)).collect();
        if pool.is_empty() {
            if !warned {
                log::warn!(
                    "receive codebook exhausted ({n_beams} beams); reusing columns to fill chains"
                );
                warned = true;
            }
            pool = (0..n_beams).collect();
        }
        // A residual already below rounding noise carries no direction;
        // correlate against the target itself to fill the chain.
        let reference = if residual.frob_norm() <= 1e-12 * target_norm.max(f64::MIN_POSITIVE) {
            target
        } else {
            &residual
        };
        let correlation = codebook.h().mul(reference);
        let best = pool
            .iter()
            .copied()
            .max_by(|&a, &b| {
                correlation
                    .row_norm_sq(a)
                    .partial_cmp(&correlation.row_norm_sq(b))
                    .expect("finite correlations")
            })
            .expect("candidate pool is non-empty");
        selected.push(best);

        let chosen = codebook.take_columns(&selected);
        let coeffs = least_squares(&chosen, target)?;
        residual = target.sub(&chosen.mul(&coeffs));
    }
    let w_rf = codebook.take_columns(&selected);
    let w_bb = least_squares(&w_rf, target)?;
    Ok((w_rf, w_bb))
}

/// Least-squares fit x minimizing ||a x - b||_F, with a small ridge retry
/// when the Gram matrix is numerically singular (duplicated columns).
fn least_squares(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = a.h().mul(a).hermitian_part();
    let rhs = a.h().mul(b);
    match solve_hermitian_pd(&gram, &rhs) {
        Ok(x) => Ok(x),
        Err(LinalgError::NotPositiveDefinite { .. }) => {
            let n = gram.rows();
            let ridge = (gram.trace().re / n as f64).max(f64::MIN_POSITIVE) * 1e-9;
            let mut regularized = gram;
            for i in 0..n {
                regularized[(i, i)] += Complex64::new(ridge, 0.0);
            }
            solve_hermitian_pd(&regularized, &rhs).map_err(Error::from)
        }
        Err(e) => Err(e.into()),
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite values"))
        .expect("non-empty slice")
        .0
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite values"))
        .expect("non-empty slice")
        .0
}

/// Diagnostics of the leakage-regularized fixed point.
#[derive(Debug, Clone)]
pub struct SlnrSolverState {
    /// Final regularization weight applied to the leakage Gram matrix.
    pub gamma: f64,
    /// Power-scalar iterates, starting at the stream count.
    pub eta_iterates: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Budget of generalized eigensolves for resolving the noise weight.
pub const SLNR_MAX_ITERATIONS: usize = 50;
/// Relative tolerance on the noise weight's consistency with the power
/// scalar it must be proportional to.
pub const SLNR_TOLERANCE: f64 = 1e-6;
/// Largest acceptable eigensolution step height, relative to the noise
/// weight, when the root sits inside a discontinuity of the power scalar.
const SLNR_STEP_SLACK: f64 = 1e-3;

/// Leakage-regularized precoding: the digital precoder maximizes the ratio
/// of desired signal power to leaked-plus-noise power.
///
/// The precoder columns are an orthonormal basis of the span of the
/// leading generalized eigenvectors of the pair (effective^H effective,
/// leakage^H leakage + gamma I). The noise weight gamma couples to the
/// power scalar eta through the transmit constraint, gamma proportional to
/// eta, while eta depends on gamma through the eigenproblem; gamma is
/// therefore found as the root of a scalar residual, with secant steps
/// safeguarded by bisection. The combiner is the matched filter on the
/// precoded effective channel, normalized to unit Frobenius norm.
#[allow(clippy::too_many_arguments)]
pub fn slnr_scheme(
    desired_eff: &ComplexMatrix,
    leakage_eff: &ComplexMatrix,
    w_rf: &ComplexMatrix,
    f_rf: &ComplexMatrix,
    p_t: f64,
    n_0: f64,
    n_streams: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, SlnrSolverState)> {
    slnr_scheme_with_cap(
        desired_eff,
        leakage_eff,
        w_rf,
        f_rf,
        p_t,
        n_0,
        n_streams,
        SLNR_MAX_ITERATIONS,
    )
}

/// [`slnr_scheme`] with an explicit iteration cap; the cap exists for
/// exercising the non-convergence error path.
#[allow(clippy::too_many_arguments)]
pub fn slnr_scheme_with_cap(
    desired_eff: &ComplexMatrix,
    leakage_eff: &ComplexMatrix,
    w_rf: &ComplexMatrix,
    f_rf: &ComplexMatrix,
    p_t: f64,
    n_0: f64,
    n_streams: usize,
    max_iterations: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, SlnrSolverState)> {
    if n_streams == 0 || n_streams > desired_eff.cols() {
        return Err(Error::Config(format!(
            "stream count {n_streams} outside 1..={}",
            desired_eff.cols()
        )));
    }
    if !(p_t > 0.0) {
        return Err(Error::Config(format!(
            "transmit power must be positive, got {p_t}"
        )));
    }
    if n_0 < 0.0 {
        return Err(Error::Config(format!(
            "noise power must be non-negative, got {n_0}"
        )));
    }
    let signal_gram = desired_eff.h().mul(desired_eff).hermitian_part();
    let leakage_gram = leakage_eff.h().mul(leakage_eff).hermitian_part();
    let rx_energy = w_rf.frob_norm_sq();
    // The transmit constraint fixes the noise weight at gamma =
    // coupling * eta, while eta = |F_RF F_BB|_F^2 depends on gamma through
    // the eigenproblem. gamma is therefore the root of the scalar residual
    // coupling * eta(gamma) - gamma. Secant steps give superlinear
    // convergence where plain re-substitution contracts too slowly (the
    // interference-limited regime, where gamma is comparable to the
    // smallest leakage eigenvalue); bisection against the bracket keeps
    // each step sane. The residual at gamma = 0 is nonnegative, so zero is
    // a permanent lower bracket, and an upper bracket appears with the
    // first negative residual. Each evaluation costs one eigensolve.
    let coupling = n_0 * rx_energy / (p_t * n_streams as f64);

    let mut iterates = vec![n_streams as f64];
    let mut iterations = 0;
    let mut lo = 0.0_f64;
    let mut hi: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut gamma = coupling * n_streams as f64;
    while iterations < max_iterations {
        iterations += 1;
        let f_bb = leading_generalized_vectors(&signal_gram, &leakage_gram, gamma, n_streams)?;
        let eta = power_scalar(f_rf, &f_bb);
        iterates.push(eta);
        let target = coupling * eta;
        let residual = target - gamma;
        // The eigensolution can switch subspaces discontinuously where
        // generalized eigenvalues cross; when the root falls inside such a
        // step, the bracket collapses to adjacent floats with the residual
        // stuck above tolerance on both sides. The subspaces on either side
        // of the step are equally good to within the step height, so accept
        // the step point when that height is physically negligible.
        let bracket_collapsed = hi.is_some_and(|h| h - lo <= h * 1e-13);
        if residual.abs() <= SLNR_TOLERANCE * target
            || (bracket_collapsed && residual.abs() <= SLNR_STEP_SLACK * target)
        {
            let w_bb = matched_combiner(desired_eff, &f_bb)?;
            // Reporting the weight as the exact image of the returned
            // precoder makes the proportionality between the weight and the
            // power scalar hold to machine precision.
            let state = SlnrSolverState {
                gamma: target,
                eta_iterates: iterates,
                iterations,
                converged: true,
            };
            return Ok((f_bb, w_bb, state));
        }
        if residual > 0.0 {
            lo = lo.max(gamma);
        } else {
            hi = Some(hi.map_or(gamma, |h| h.min(gamma)));
        }
        let secant = prev.and_then(|(g, r)| {
            let denom = residual - r;
            (denom != 0.0).then(|| gamma - residual * (gamma - g) / denom)
        });
        let mut next = secant.filter(|g| g.is_finite()).unwrap_or(target);
        match hi {
            Some(h) => {
                if !(next > lo && next < h) {
                    next = 0.5 * (lo + h);
                }
            }
            None => {
                if next <= lo {
                    next = target.max(2.0 * gamma);
                }
            }
        }
        prev = Some((gamma, residual));
        gamma = next;
    }
    Err(Error::FixedPointDiverged {
        iterations,
        eta_iterates: iterates,
    })
}

/// Orthonormal basis of the span of the top `n` generalized eigenvectors
/// of (signal, leakage + gamma I). Orthonormal columns make the transmit
/// power scalar a function of the selected subspace alone, which keeps it
/// well defined when eigenvalues cluster and the individual eigenvectors
/// are ambiguous. A singular regularized leakage matrix (gamma = 0 with
/// rank-deficient leakage) falls back to a relative ridge, as does a
/// numerically dependent eigenbasis.
fn leading_generalized_vectors(
    signal_gram: &ComplexMatrix,
    leakage_gram: &ComplexMatrix,
    gamma: f64,
    n: usize,
) -> Result<ComplexMatrix> {
    let dim = leakage_gram.rows();
    let build = |extra: f64| -> ComplexMatrix {
        let mut b = leakage_gram.clone();
        for i in 0..dim {
            b[(i, i)] += Complex64::new(gamma + extra, 0.0);
        }
        b
    };
    let mut extra = 0.0;
    for _ in 0..4 {
        match herm_gen_eig(signal_gram, &build(extra)) {
            Ok((_, t)) => {
                if let Some(f_bb) = orthonormal_leading_columns(&t, n) {
                    return Ok(f_bb);
                }
            }
            Err(LinalgError::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        let scale = (leakage_gram.trace().re / dim as f64)
            .max(signal_gram.trace().re / dim as f64)
            .max(f64::MIN_POSITIVE);
        extra = if extra == 0.0 {
            scale * 1e-12
        } else {
            extra * 1e3
        };
    }
    Err(LinalgError::NotPositiveDefinite {
        index: 0,
        pivot: 0.0,
    }
    .into())
}

/// Gram-Schmidt on the leading `n` columns, with a re-orthogonalization
/// pass for stability. Returns `None` when a column collapses to numerical
/// zero against the ones before it.
fn orthonormal_leading_columns(t: &ComplexMatrix, n: usize) -> Option<ComplexMatrix> {
    let mut q = t.leading_columns(n);
    let rows = q.rows();
    for j in 0..n {
        let full = q.col_norm_sq(j).sqrt();
        for _ in 0..2 {
            for i in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for r in 0..rows {
                    proj += q[(r, i)].conj() * q[(r, j)];
                }
                for r in 0..rows {
                    let basis = q[(r, i)];
                    q[(r, j)] -= proj * basis;
                }
            }
        }
        let norm = q.col_norm_sq(j).sqrt();
        if !(norm > full * 1e-12) {
            return None;
        }
        for r in 0..rows {
            q[(r, j)] /= norm;
        }
    }
    Some(q)
}

/// Ratio-trace leakage objective of a precoder: trace((f^H b f)^-1
/// (f^H a f)) with a the signal Gram matrix and b the regularized leakage
/// Gram matrix. Invariant under right-multiplication of `f_bb` by any
/// invertible matrix, so only the column space matters.
pub fn slnr_objective(
    f_bb: &ComplexMatrix,
    signal_gram: &ComplexMatrix,
    leakage_gram_regularized: &ComplexMatrix,
) -> Result<f64> {
    let num = f_bb.h().mul(&signal_gram.mul(f_bb)).hermitian_part();
    let den = f_bb
        .h()
        .mul(&leakage_gram_regularized.mul(f_bb))
        .hermitian_part();
    let solved = solve_hermitian_pd(&den, &num)?;
    Ok(solved.trace().re)
}

/// Matched-reverse precoding: the digital precoder is the conjugate
/// transpose of the user's own effective channel. Needs the stream count
/// to equal the number of receive chains; depends on nothing but the
/// desired link, so transmission points need not exchange channel state.
pub fn gmr_scheme(effective: &ComplexMatrix, n_streams: usize) -> Result<ComplexMatrix> {
    if effective.rows() != n_streams {
        return Err(Error::Config(format!(
            "matched-reverse precoding needs streams == receive chains, got {} streams for {} chains",
            n_streams,
            effective.rows()
        )));
    }
    Ok(effective.h())
}

/// Rank report of a stacked multi-user effective channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZfRankReport {
    /// Numerical rank (squared singular values above 1e-10 of the largest).
    pub rank: usize,
    /// Upper bound from the matrix shape.
    pub max_rank: usize,
    /// Whether the stacked Gram matrix is invertible, i.e. rank equals the
    /// total number of stacked receive chains.
    pub invertible: bool,
}

/// Checks whether zero-forcing across all stacked users is feasible: the
/// stacked effective channel (total receive chains by transmit chains)
/// must have full row rank for its Gram matrix to be invertible.
pub fn zf_rank_check(stacked_effective: &ComplexMatrix) -> Result<ZfRankReport> {
    let s = svd(stacked_effective)?.s;
    let largest_sq = s.first().map(|v| v * v).unwrap_or(0.0);
    let rank = if largest_sq == 0.0 {
        0
    } else {
        s.iter().filter(|v| *v * *v > 1e-10 * largest_sq).count()
    };
    Ok(ZfRankReport {
        rank,
        max_rank: stacked_effective.rows().min(stacked_effective.cols()),
        invertible: rank == stacked_effective.rows(),
    })
}
