//! Link metrics: noise budget, interference covariance, spectral
//! efficiency, power decomposition, and channel eigenvalue profiles.
//!
//! Transmitted symbols and noise are never sampled. Every metric is
//! closed-form in the weight matrices and channel realizations, so results
//! are deterministic given the drop.

use crate::beamforming::HybridWeights;
use crate::linalg::{herm_gen_eig, svd, ComplexMatrix, LinalgError};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Converts a dBm figure to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Radio budget shared by every link of a campaign.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinkBudget {
    /// Per-user transmit power at the panel input, dBm.
    pub transmit_power_dbm: f64,
    /// Receiver noise figure, dB.
    pub noise_figure_db: f64,
    /// Signal bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Carrier frequency, GHz.
    pub carrier_ghz: f64,
}

impl LinkBudget {
    pub fn new(
        transmit_power_dbm: f64,
        noise_figure_db: f64,
        bandwidth_hz: f64,
        carrier_ghz: f64,
    ) -> Result<Self> {
        if !(bandwidth_hz > 0.0) {
            return Err(Error::Config(format!(
                "bandwidth must be positive, got {bandwidth_hz} Hz"
            )));
        }
        if !(carrier_ghz > 0.0) {
            return Err(Error::Config(format!(
                "carrier must be positive, got {carrier_ghz} GHz"
            )));
        }
        Ok(Self {
            transmit_power_dbm,
            noise_figure_db,
            bandwidth_hz,
            carrier_ghz,
        })
    }

    /// Thermal noise power after the receiver noise figure:
    /// -174 dBm/Hz + 10 log10(bandwidth) + noise figure.
    pub fn noise_power_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm())
    }

    pub fn transmit_power_watts(&self) -> f64 {
        dbm_to_watts(self.transmit_power_dbm)
    }
}

/// Per-user outcome of one realization under one scheme. Powers are in
/// watts; the record carries enough identity to reproduce its drop.
#[derive(Debug, Clone, Serialize)]
pub struct UserResult {
    /// Scheme identifier (stable, filesystem-safe).
    pub scheme: String,
    /// Monte Carlo realization index within the campaign.
    pub drop_index: usize,
    /// Serving cell (sector) index.
    pub cell: usize,
    /// User index within the serving cell.
    pub user_in_cell: usize,
    /// Campaign seed the drop derives from.
    pub seed: u64,
    /// Eq.-style analytic rate, bit/s/Hz; never negative.
    pub spectral_efficiency: f64,
    /// Received desired-signal power, watts.
    pub signal_power: f64,
    /// Received inter-user plus inter-cell interference power, watts.
    pub interference_power: f64,
    /// Whether the desired link was line of sight.
    pub los: bool,
    /// True when the noise-plus-interference whitening matrix was
    /// numerically singular and a relative ridge was applied.
    pub whitening_regularized: bool,
}

/// One interfering transmission seen by the target user: the interferer's
/// transmit cascade through the channel from its transmission point to the
/// target, with the path loss of that cross link.
#[derive(Debug, Clone, Copy)]
pub struct InterfererTerm<'a> {
    /// Channel from the interfering transmission point to the target user.
    pub channel_to_target: &'a ComplexMatrix,
    /// Linear path loss of that cross link.
    pub path_loss_linear: f64,
    pub f_rf: &'a ComplexMatrix,
    pub f_bb: &'a ComplexMatrix,
    /// The interferer's power scalar ||f_rf f_bb||_F^2.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Interference covariance at the target user's antenna ports:
/// sum over interferers of (p_t / (eta * path_loss)) * (H F)(H F)^H.
///
/// Entries are accumulated with compensated summation so the result is
/// independent of interferer order to well below 1e-9 relative error.
/// The result is exactly Hermitian by construction and positive
/// semidefinite up to rounding.
pub fn interference_covariance(
    n_receive: usize,
    terms: &[InterfererTerm],
    p_t_watts: f64,
) -> ComplexMatrix {
    let mut re = vec![KahanSum::default(); n_receive * n_receive];
    let mut im = vec![KahanSum::default(); n_receive * n_receive];
    for term in terms {
        assert_eq!(
            term.channel_to_target.rows(),
            n_receive,
            "interferer channel height must match the target's antenna count"
        );
        let cascade = term.channel_to_target.mul(term.f_rf).mul(term.f_bb);
        let scale = p_t_watts / (term.eta * term.path_loss_linear);
        for i in 0..n_receive {
            for j in i..n_receive {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..cascade.cols() {
                    acc += cascade[(i, k)] * cascade[(j, k)].conj();
                }
                acc *= scale;
                re[i * n_receive + j].add(acc.re);
                im[i * n_receive + j].add(acc.im);
            }
        }
    }
    let mut d = ComplexMatrix::zeros(n_receive, n_receive);
    for i in 0..n_receive {
        d[(i, i)] = Complex64::new(re[i * n_receive + i].sum, 0.0);
        for j in i + 1..n_receive {
            let value = Complex64::new(re[i * n_receive + j].sum, im[i * n_receive + j].sum);
            d[(i, j)] = value;
            d[(j, i)] = value.conj();
        }
    }
    d
}

/// Spectral efficiency of one user plus the regularization flag.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEfficiency {
    /// Rate in bit/s/Hz; never negative.
    pub bits_per_hz: f64,
    /// True when the whitening matrix needed a ridge to invert.
    pub regularized: bool,
}

/// Analytic rate of the target link:
/// log2 det(I + p_t/(eta*PL) * (W^H (N_0 I + D) W)^-1 W^H H F F^H H^H W)
/// with W = w_rf w_bb and F = f_rf f_bb.
///
/// Evaluated through the generalized eigenvalues of the signal and
/// whitening forms, which is the numerically stable reading of the
/// determinant. A singular whitening matrix gets a 1e-12 * trace ridge
/// and the outcome is flagged.
pub fn spectral_efficiency(
    weights: &HybridWeights,
    channel: &ComplexMatrix,
    path_loss_linear: f64,
    interference: &ComplexMatrix,
    budget: &LinkBudget,
) -> Result<SpectralEfficiency> {
    let w = weights.w_rf.mul(&weights.w_bb);
    let n_0 = budget.noise_power_watts();
    // Whitening form: W^H (N_0 I + D) W.
    let noise_part = w.h().mul(&w).scale_re(n_0);
    let interference_part = w.h().mul(&interference.mul(&w));
    let whitening = noise_part.add(&interference_part).hermitian_part();
    // Signal form: p_t/(eta*PL) * (W^H H F)(W^H H F)^H.
    let coupled = w.h().mul(&channel.mul(&weights.f_rf).mul(&weights.f_bb));
    let scale = budget.transmit_power_watts() / (weights.eta * path_loss_linear);
    let signal = coupled.mul(&coupled.h()).scale_re(scale).hermitian_part();

    let (eigenvalues, regularized) = match herm_gen_eig(&signal, &whitening) {
        Ok((values, _)) => (values, false),
        Err(LinalgError::NotPositiveDefinite { .. }) => {
            let ridge = whitening.trace().re * 1e-12;
            if !(ridge > 0.0) {
                return Err(Error::Domain(
                    "whitening matrix has non-positive trace; the combiner is degenerate".into(),
                ));
            }
            let mut ridged = whitening.clone();
            for i in 0..ridged.rows() {
                ridged[(i, i)] += Complex64::new(ridge, 0.0);
            }
            let (values, _) = herm_gen_eig(&signal, &ridged)?;
            (values, true)
        }
        Err(e) => return Err(e.into()),
    };
    let bits_per_hz: f64 = eigenvalues
        .iter()
        .map(|&lambda| (1.0 + lambda.max(0.0)).log2())
        .sum();
    Ok(SpectralEfficiency {
        bits_per_hz: bits_per_hz.max(0.0),
        regularized,
    })
}

/// Received signal and interference powers of the target link, in watts.
///
/// Signal: p_t/(eta*PL) * ||w_bb^H w_rf^H H f_rf f_bb||_F^2.
/// Interference: trace(w_bb^H w_rf^H D w_rf w_bb).
pub fn power_decomposition(
    weights: &HybridWeights,
    channel: &ComplexMatrix,
    path_loss_linear: f64,
    interference: &ComplexMatrix,
    budget: &LinkBudget,
) -> (f64, f64) {
    let w = weights.w_rf.mul(&weights.w_bb);
    let coupled = w.h().mul(&channel.mul(&weights.f_rf).mul(&weights.f_bb));
    let scale = budget.transmit_power_watts() / (weights.eta * path_loss_linear);
    let signal = scale * coupled.frob_norm_sq();
    let leak = w.h().mul(&interference.mul(&w)).trace().re.max(0.0);
    (signal, leak)
}

/// Leading eigenvalues of H H^H in descending order, computed through the
/// singular values of H for accuracy.
pub fn eigenvalue_profile(h: &ComplexMatrix, top_n: usize) -> Result<Vec<f64>> {
    assert!(
        top_n <= h.rows(),
        "profile length {top_n} exceeds the antenna count {}",
        h.rows()
    );
    let s = svd(h)?.s;
    let mut profile: Vec<f64> = s.iter().map(|v| v * v).collect();
    profile.resize(top_n.max(profile.len()), 0.0);
    profile.truncate(top_n);
    Ok(profile)
}

/// Number of eigenvalues within `span_db` decibels of the largest; the
/// effective stream count a link supports.
pub fn rank_within_db(profile: &[f64], span_db: f64) -> usize {
    let largest = profile.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return 0;
    }
    let floor = largest * 10f64.powf(-span_db / 10.0);
    profile.iter().filter(|&&v| v >= floor).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::baseline_scheme;
    use crate::linalg::herm_eigen;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
    }

    fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
        svd(&random_matrix(n, n, seed)).unwrap().u
    }

    fn table_budget() -> LinkBudget {
        LinkBudget::new(35.2, 10.0, 1e8, 28.0).unwrap()
    }

    fn identity_weights(n: usize) -> HybridWeights {
        let eye = ComplexMatrix::identity(n);
        HybridWeights::new(eye.clone(), eye.clone(), eye.clone(), eye)
    }

    #[test]
    fn noise_power_matches_the_link_budget_identity() {
        let budget = table_budget();
        assert!((budget.noise_power_dbm() - -84.0).abs() < 1e-12);
        let watts = budget.noise_power_watts();
        assert!((watts - 10f64.powf(-11.4)).abs() < 1e-24);
        assert!((budget.transmit_power_watts() - 10f64.powf(0.52)).abs() < 1e-12);
        assert!(LinkBudget::new(35.2, 10.0, 0.0, 28.0).is_err());
        assert!(LinkBudget::new(35.2, 10.0, 1e8, -1.0).is_err());
    }

    #[test]
    fn no_interferers_give_a_zero_covariance() {
        let d = interference_covariance(4, &[], 3.3);
        assert_eq!(d.rows(), 4);
        assert!(d.frob_norm() == 0.0);
    }

    #[test]
    fn hand_built_interferer_stays_in_its_subspace() {
        // The interferer's cascade reaches the target only on the second
        // antenna: H f = [0, 2-i]^T, so D = s * diag(0, |2-i|^2).
        let channel = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(2.0, -1.0), c(0.0, 0.0)],
        ]);
        let f_rf = ComplexMatrix::identity(2);
        let f_bb = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]]);
        let (p_t, eta, pl) = (2.0, 0.5, 4.0);
        let term = InterfererTerm {
            channel_to_target: &channel,
            path_loss_linear: pl,
            f_rf: &f_rf,
            f_bb: &f_bb,
            eta,
        };
        let d = interference_covariance(2, &[term], p_t);
        let scale = p_t / (eta * pl);
        assert!((d[(1, 1)].re - scale * 5.0).abs() < 1e-12);
        assert_eq!(d[(0, 0)], c(0.0, 0.0));
        assert_eq!(d[(0, 1)], c(0.0, 0.0));
        assert!((d.trace().re - scale * 5.0).abs() < 1e-12);
    }

    fn random_terms(
        n_receive: usize,
        count: usize,
        seed: u64,
    ) -> Vec<(ComplexMatrix, ComplexMatrix, ComplexMatrix, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|k| {
                let channel = random_matrix(n_receive, 16, seed * 100 + k as u64);
                let f_rf = random_matrix(16, 4, seed * 100 + 50 + k as u64);
                let f_bb = random_matrix(4, 2, seed * 100 + 80 + k as u64);
                let eta = f_rf.mul(&f_bb).frob_norm_sq();
                let pl = 1.0 + rng.random::<f64>() * 9.0;
                (channel, f_rf, f_bb, eta, pl)
            })
            .collect()
    }

    fn as_terms(
        storage: &[(ComplexMatrix, ComplexMatrix, ComplexMatrix, f64, f64)],
    ) -> Vec<InterfererTerm<'_>> {
        storage
            .iter()
            .map(|(ch, f_rf, f_bb, eta, pl)| InterfererTerm {
                channel_to_target: ch,
                path_loss_linear: *pl,
                f_rf,
                f_bb,
                eta: *eta,
            })
            .collect()
    }

    #[test]
    fn covariance_trace_matches_per_term_oracle() {
        let storage = random_terms(4, 5, 7);
        let terms = as_terms(&storage);
        let p_t = 3.3;
        let d = interference_covariance(4, &terms, p_t);
        // Independent oracle: trace of each term is the scaled squared
        // Frobenius norm of its cascade.
        let expect: f64 = storage
            .iter()
            .map(|(ch, f_rf, f_bb, eta, pl)| {
                p_t / (eta * pl) * ch.mul(f_rf).mul(f_bb).frob_norm_sq()
            })
            .sum();
        assert!((d.trace().re - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn covariance_is_order_invariant_hermitian_and_psd() {
        let storage = random_terms(6, 12, 9);
        let mut terms = as_terms(&storage);
        let d1 = interference_covariance(6, &terms, 3.3);
        terms.reverse();
        terms.swap(0, 5);
        let d2 = interference_covariance(6, &terms, 3.3);
        assert!(d1.sub(&d2).frob_norm() <= 1e-9 * d1.frob_norm());

        assert!(d1.sub(&d1.h()).frob_norm() <= 1e-12 * d1.frob_norm());
        let (eigs, _) = herm_eigen(&d1).unwrap();
        let min = eigs.last().copied().unwrap();
        assert!(min >= -1e-12 * d1.trace().re, "min eigenvalue {min}");
    }

    #[test]
    fn scalar_link_collapses_to_the_shannon_formula() {
        let budget = table_budget();
        let weights = identity_weights(1);
        let channel = ComplexMatrix::identity(1);
        let d = ComplexMatrix::zeros(1, 1);
        let se = spectral_efficiency(&weights, &channel, 1.0, &d, &budget).unwrap();
        let snr = budget.transmit_power_watts() / budget.noise_power_watts();
        let expect = (1.0 + snr).log2();
        assert!(!se.regularized);
        assert!((se.bits_per_hz - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn diagonal_link_sums_per_stream_rates() {
        let budget = table_budget();
        let weights = identity_weights(2);
        let gains = [3e-5, 1.2e-5];
        let channel = ComplexMatrix::from_rows(&[
            vec![c(gains[0], 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, gains[1])],
        ]);
        let d = ComplexMatrix::zeros(2, 2);
        let pl = 1e9;
        let se = spectral_efficiency(&weights, &channel, pl, &d, &budget).unwrap();
        // Independent per-stream oracle; eta = ||I_2||_F^2 = 2.
        let expect: f64 = gains
            .iter()
            .map(|g| {
                let snr =
                    budget.transmit_power_watts() * g * g / (2.0 * pl * budget.noise_power_watts());
                (1.0 + snr).log2()
            })
            .sum();
        assert!((se.bits_per_hz - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn rank_one_link_matches_the_hand_snr() {
        let budget = table_budget();
        let w_rf = random_matrix(4, 2, 21);
        let w_bb = random_matrix(2, 1, 22);
        let f_rf = random_matrix(8, 2, 23);
        let f_bb = random_matrix(2, 1, 24);
        let weights = HybridWeights::new(f_rf.clone(), f_bb.clone(), w_rf.clone(), w_bb.clone());
        let channel = random_matrix(4, 8, 25).scale_re(1e-5);
        let d = ComplexMatrix::zeros(4, 4);
        let pl = 1e8;
        let se = spectral_efficiency(&weights, &channel, pl, &d, &budget).unwrap();
        let w = w_rf.mul(&w_bb);
        let coupled = w.h().mul(&channel.mul(&f_rf).mul(&f_bb));
        let snr = budget.transmit_power_watts() * coupled.frob_norm_sq()
            / (weights.eta * pl * budget.noise_power_watts() * w.frob_norm_sq());
        let expect = (1.0 + snr).log2();
        assert!((se.bits_per_hz - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn louder_noise_strictly_reduces_the_rate() {
        let quiet = table_budget();
        let loud = LinkBudget::new(35.2, 13.0103, 1e8, 28.0).unwrap();
        let eff = random_matrix(4, 4, 31);
        let (f_bb, w_bb) = baseline_scheme(&eff, 2).unwrap();
        let weights = HybridWeights::new(
            ComplexMatrix::identity(4),
            f_bb,
            ComplexMatrix::identity(4),
            w_bb,
        );
        let d = ComplexMatrix::zeros(4, 4);
        let channel = eff.scale_re(1e-5);
        let a = spectral_efficiency(&weights, &channel, 1e6, &d, &quiet).unwrap();
        let b = spectral_efficiency(&weights, &channel, 1e6, &d, &loud).unwrap();
        assert!(a.bits_per_hz > b.bits_per_hz);
    }

    #[test]
    fn rate_is_invariant_under_matched_unitary_rotations() {
        let budget = table_budget();
        let eff = random_matrix(4, 4, 41);
        let (f_bb, w_bb) = baseline_scheme(&eff, 2).unwrap();
        let f_rf = random_matrix(16, 4, 42);
        let w_rf = random_matrix(8, 4, 43);
        let channel = random_matrix(8, 16, 44).scale_re(1e-4);
        let storage = random_terms(8, 3, 45);
        let d = interference_covariance(8, &as_terms(&storage), 3.3).scale_re(1e-14);

        let base = HybridWeights::new(f_rf.clone(), f_bb.clone(), w_rf.clone(), w_bb.clone());
        let se0 = spectral_efficiency(&base, &channel, 1e8, &d, &budget).unwrap();

        let u = random_unitary(2, 46);
        let v = random_unitary(2, 47);
        let rotated = HybridWeights::new(f_rf, f_bb.mul(&u), w_rf, w_bb.mul(&v));
        assert!((rotated.eta - base.eta).abs() <= 1e-9 * base.eta);
        let se1 = spectral_efficiency(&rotated, &channel, 1e8, &d, &budget).unwrap();
        assert!(
            (se0.bits_per_hz - se1.bits_per_hz).abs() <= 1e-9 * se0.bits_per_hz.max(1.0),
            "{} vs {}",
            se0.bits_per_hz,
            se1.bits_per_hz
        );
    }

    #[test]
    fn singular_whitening_is_ridged_and_flagged() {
        let budget = table_budget();
        // Two identical receive chains make W rank one, so the whitening
        // matrix is singular but has positive trace.
        let col = random_matrix(4, 1, 51);
        let w_rf = ComplexMatrix::from_fn(4, 2, |r, _| col[(r, 0)]);
        let weights = HybridWeights::new(
            random_matrix(8, 2, 52),
            random_matrix(2, 2, 53),
            w_rf,
            ComplexMatrix::identity(2),
        );
        let channel = random_matrix(4, 8, 54).scale_re(1e-5);
        let d = ComplexMatrix::zeros(4, 4);
        let se = spectral_efficiency(&weights, &channel, 1e8, &d, &budget).unwrap();
        assert!(se.regularized);
        assert!(se.bits_per_hz.is_finite());
        assert!(se.bits_per_hz >= 0.0);
    }

    #[test]
    fn power_split_scales_and_vanishes_as_expected() {
        let budget = table_budget();
        let weights = identity_weights(2);
        let channel = random_matrix(2, 2, 61);
        let d = ComplexMatrix::zeros(2, 2);
        let (signal, leak) = power_decomposition(&weights, &channel, 1e6, &d, &budget);
        assert_eq!(leak, 0.0);
        let expect = budget.transmit_power_watts() / (2.0 * 1e6) * channel.frob_norm_sq();
        assert!((signal - expect).abs() <= 1e-12 * expect);

        let (halved, _) = power_decomposition(&weights, &channel, 2e6, &d, &budget);
        assert_eq!(
            halved,
            signal / 2.0,
            "doubling path loss halves signal power exactly"
        );

        let storage = random_terms(2, 4, 62);
        let d = interference_covariance(2, &as_terms(&storage), 3.3);
        let (_, leak) = power_decomposition(&weights, &channel, 1e6, &d, &budget);
        let oracle = d.trace().re; // W = I_2 here.
        assert!((leak - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn eigenvalue_profile_matches_its_contracts() {
        let profile = eigenvalue_profile(&ComplexMatrix::identity(8), 4).unwrap();
        assert_eq!(profile, vec![1.0, 1.0, 1.0, 1.0]);

        let rank_one = random_matrix(6, 1, 71).mul(&random_matrix(1, 12, 72));
        let profile = eigenvalue_profile(&rank_one, 4).unwrap();
        assert!(profile[1] < 1e-10 * profile[0]);

        // Independent oracle: Hermitian eigenvalues of H H^H.
        let h = random_matrix(6, 9, 73);
        let profile = eigenvalue_profile(&h, 6).unwrap();
        let (eigs, _) = herm_eigen(&h.mul(&h.h())).unwrap();
        for (a, b) in profile.iter().zip(eigs.iter()) {
            assert!((a - b).abs() <= 1e-9 * eigs[0], "{a} vs {b}");
        }
    }

    #[test]
    fn db_rank_counts_eigenvalues_near_the_peak() {
        assert_eq!(rank_within_db(&[1.0, 0.5, 0.009, 0.0], 20.0), 2);
        assert_eq!(rank_within_db(&[1.0, 0.011, 0.01, 0.0099], 20.0), 3);
        assert_eq!(rank_within_db(&[], 20.0), 0);
        assert_eq!(rank_within_db(&[4.0, 4.0, 4.0, 4.0], 20.0), 4);
    }
}
