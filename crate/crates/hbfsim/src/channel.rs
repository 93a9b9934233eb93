//! Clustered narrowband channel realizations with distance-dependent path
//! loss and line-of-sight state.
//!
//! A realization is a sum of plane-wave rays grouped into clusters. Each
//! ray carries a complex gain, departure and arrival angles, and a
//! polarization coupling matrix; the matrix entries keep unit co-polar
//! magnitude while the cross-polar magnitude follows the profile's
//! cross-polarization ratio. Ray gains are normalized so their squared
//! magnitudes sum to one, which pins the average channel energy to the
//! array sizes and leaves large-scale effects entirely to the separate
//! path-loss term.

use crate::geometry::{element_gain, spatial_phases, LinkGeometry, UraConfig};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Speed of light in vacuum, meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How many clusters a realization draws.
#[derive(Debug, Clone)]
pub enum ClusterCount {
    Fixed(usize),
    /// Discrete distribution over counts; weights need not be normalized.
    Weighted(Vec<(usize, f64)>),
}

impl ClusterCount {
    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            ClusterCount::Fixed(n) => *n,
            ClusterCount::Weighted(table) => {
                let total: f64 = table.iter().map(|(_, w)| w).sum();
                let mut u = rng.random::<f64>() * total;
                for (count, weight) in table {
                    u -= weight;
                    if u < 0.0 {
                        return *count;
                    }
                }
                table.last().expect("weighted table is non-empty").0
            }
        }
    }

    #[cfg(test)]
    fn max_count(&self) -> usize {
        match self {
            ClusterCount::Fixed(n) => *n,
            ClusterCount::Weighted(table) => table.iter().map(|(c, _)| *c).max().unwrap_or(0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            ClusterCount::Fixed(n) => *n > 0,
            ClusterCount::Weighted(table) => {
                !table.is_empty()
                    && table.iter().all(|&(c, w)| c > 0 && w >= 0.0)
                    && table.iter().map(|(_, w)| w).sum::<f64>() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "cluster count distribution is empty or degenerate".into(),
            ))
        }
    }
}

/// Line-of-sight probability as a function of horizontal distance.
#[derive(Debug, Clone)]
pub enum LosCurve {
    /// Fixed probability; handy for tests and stress configurations.
    Constant(f64),
    /// Inverse-distance family: within `guaranteed_m` the probability is
    /// one, beyond it the probability decays with the distance scale
    /// `decay_m`, and `exponent` sharpens the rolloff.
    InverseDistance {
        guaranteed_m: f64,
        decay_m: f64,
        exponent: f64,
    },
}

impl LosCurve {
    fn validate(&self) -> Result<()> {
        match self {
            LosCurve::Constant(p) if (0.0..=1.0).contains(p) => Ok(()),
            LosCurve::Constant(p) => Err(Error::Config(format!(
                "line-of-sight probability {p} outside [0, 1]"
            ))),
            LosCurve::InverseDistance {
                guaranteed_m,
                decay_m,
                exponent,
            } => {
                if *guaranteed_m > 0.0 && *decay_m > 0.0 && *exponent > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "line-of-sight curve parameters must be positive".into(),
                    ))
                }
            }
        }
    }
}

/// Statistical description of a propagation environment. The two presets
/// bracket the regimes of interest: many comparably weak clusters versus a
/// handful of dominant lobes.
#[derive(Debug, Clone)]
pub struct ChannelProfile {
    pub name: String,
    pub cluster_count: ClusterCount,
    pub rays_per_cluster: usize,
    /// Standard deviation of cluster centers around the line-of-sight
    /// direction, degrees.
    pub aod_azimuth_spread: f64,
    pub aoa_azimuth_spread: f64,
    pub aod_elevation_spread: f64,
    pub aoa_elevation_spread: f64,
    /// Standard deviation of ray offsets around their cluster center.
    pub ray_azimuth_spread: f64,
    pub ray_elevation_spread: f64,
    /// Cluster power decay exponent: power proportional to exp(-decay * x)
    /// with x standard exponential. Larger values concentrate energy in
    /// fewer clusters.
    pub cluster_decay: f64,
    /// Per-cluster lognormal power jitter, dB.
    pub cluster_shadow_sigma_db: f64,
    pub los_curve: LosCurve,
    /// Path-loss exponents for the close-in reference model.
    pub pathloss_exponent_los: f64,
    pub pathloss_exponent_nlos: f64,
    /// Lognormal shadow-fading deviations, dB.
    pub shadow_sigma_los_db: f64,
    pub shadow_sigma_nlos_db: f64,
    /// Cross-polarization ratio statistics, dB.
    pub xpr_mean_db: f64,
    pub xpr_sigma_db: f64,
    /// Specular-to-diffuse power ratio under line of sight, dB.
    pub rician_k_db: f64,
}

impl ChannelProfile {
    /// Rich-scattering environment: a dozen clusters of similar strength,
    /// wide arrival spread, moderate specular dominance.
    pub fn many_weak_clusters() -> Self {
        Self {
            name: "many-weak-clusters".into(),
            cluster_count: ClusterCount::Fixed(12),
            rays_per_cluster: 4,
            aod_azimuth_spread: 15.0,
            aoa_azimuth_spread: 40.0,
            aod_elevation_spread: 2.0,
            aoa_elevation_spread: 6.0,
            ray_azimuth_spread: 3.0,
            ray_elevation_spread: 1.0,
            cluster_decay: 1.5,
            cluster_shadow_sigma_db: 3.0,
            los_curve: LosCurve::InverseDistance {
                guaranteed_m: 18.0,
                decay_m: 36.0,
                exponent: 1.0,
            },
            pathloss_exponent_los: 2.0,
            pathloss_exponent_nlos: 3.2,
            shadow_sigma_los_db: 4.0,
            shadow_sigma_nlos_db: 7.8,
            xpr_mean_db: 9.0,
            xpr_sigma_db: 3.0,
            rician_k_db: 9.0,
        }
    }

    /// Sparse environment: at most five lobes with steep power decay, tight
    /// angular spread, and a strongly dominant specular component.
    pub fn few_strong_lobes() -> Self {
        Self {
            name: "few-strong-lobes".into(),
            cluster_count: ClusterCount::Weighted(vec![
                (1, 0.20),
                (2, 0.40),
                (3, 0.20),
                (4, 0.12),
                (5, 0.08),
            ]),
            rays_per_cluster: 8,
            aod_azimuth_spread: 10.0,
            aoa_azimuth_spread: 30.0,
            aod_elevation_spread: 1.5,
            aoa_elevation_spread: 4.0,
            ray_azimuth_spread: 2.0,
            ray_elevation_spread: 0.8,
            cluster_decay: 6.0,
            cluster_shadow_sigma_db: 5.0,
            los_curve: LosCurve::InverseDistance {
                guaranteed_m: 27.0,
                decay_m: 71.0,
                exponent: 2.0,
            },
            pathloss_exponent_los: 2.1,
            pathloss_exponent_nlos: 3.4,
            shadow_sigma_los_db: 3.6,
            shadow_sigma_nlos_db: 9.7,
            xpr_mean_db: 10.0,
            xpr_sigma_db: 4.0,
            rician_k_db: 22.0,
        }
    }

    /// Looks up a preset by its hyphenated name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "many-weak-clusters" => Ok(Self::many_weak_clusters()),
            "few-strong-lobes" => Ok(Self::few_strong_lobes()),
            other => Err(Error::Config(format!(
                "unknown channel profile '{other}' (expected 'many-weak-clusters' or 'few-strong-lobes')"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cluster_count.validate()?;
        self.los_curve.validate()?;
        if self.rays_per_cluster == 0 {
            return Err(Error::Config("rays_per_cluster must be positive".into()));
        }
        for (label, v) in [
            ("aod_azimuth_spread", self.aod_azimuth_spread),
            ("aoa_azimuth_spread", self.aoa_azimuth_spread),
            ("aod_elevation_spread", self.aod_elevation_spread),
            ("aoa_elevation_spread", self.aoa_elevation_spread),
            ("ray_azimuth_spread", self.ray_azimuth_spread),
            ("ray_elevation_spread", self.ray_elevation_spread),
            ("cluster_decay", self.cluster_decay),
            ("cluster_shadow_sigma_db", self.cluster_shadow_sigma_db),
            ("shadow_sigma_los_db", self.shadow_sigma_los_db),
            ("shadow_sigma_nlos_db", self.shadow_sigma_nlos_db),
            ("xpr_sigma_db", self.xpr_sigma_db),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{label} must be non-negative, got {v}"
                )));
            }
        }
        if self.pathloss_exponent_los < 1.0 || self.pathloss_exponent_nlos < 1.0 {
            return Err(Error::Config(
                "path-loss exponents below one are not physical".into(),
            ));
        }
        Ok(())
    }
}

/// One plane-wave ray. Angles are global, degrees. The coupling matrix has
/// one row per receive polarization and one column per transmit
/// polarization; co-polar entries have unit magnitude.
#[derive(Debug, Clone)]
pub struct Ray {
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    /// Complex gain; squared magnitudes sum to one over a realization.
    pub gain: Complex64,
    /// Polarization coupling, receive-major: coupling[rx][tx].
    pub coupling: Vec<Vec<Complex64>>,
}

/// One narrowband channel draw for a single link.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Receive-by-transmit channel matrix, small-scale only (path loss is
    /// kept separate).
    pub h: ComplexMatrix,
    /// Linear power attenuation of the link; always at least free space.
    pub path_loss_linear: f64,
    pub los: bool,
    pub rays: Vec<Ray>,
}

/// Probability of line of sight at a horizontal distance in meters.
pub fn los_probability(distance_m: f64, profile: &ChannelProfile) -> f64 {
    match &profile.los_curve {
        LosCurve::Constant(p) => *p,
        LosCurve::InverseDistance {
            guaranteed_m,
            decay_m,
            exponent,
        } => {
            let near = (guaranteed_m / distance_m).min(1.0);
            let through = (-distance_m / decay_m).exp();
            (near * (1.0 - through) + through).powf(*exponent)
        }
    }
}

/// Free-space path loss in dB at `distance_m` for a carrier in GHz.
fn free_space_db(distance_m: f64, carrier_ghz: f64) -> f64 {
    let freq_hz = carrier_ghz * 1e9;
    20.0 * (4.0 * std::f64::consts::PI * distance_m * freq_hz / SPEED_OF_LIGHT).log10()
}

/// Close-in path loss in dB: free space at one meter plus a distance power
/// law plus lognormal shadow fading, floored at free space for the same
/// distance so a draw never beats vacuum propagation.
pub fn path_loss_db<R: Rng>(
    distance_m: f64,
    los: bool,
    carrier_ghz: f64,
    profile: &ChannelProfile,
    rng: &mut R,
) -> Result<f64> {
    if !(distance_m >= 1.0) {
        return Err(Error::Domain(format!(
            "path-loss model needs distance >= 1 m, got {distance_m}"
        )));
    }
    let (exponent, sigma) = if los {
        (profile.pathloss_exponent_los, profile.shadow_sigma_los_db)
    } else {
        (profile.pathloss_exponent_nlos, profile.shadow_sigma_nlos_db)
    };
    let anchor = free_space_db(1.0, carrier_ghz);
    let shadow: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng) * sigma;
    let pl = anchor + 10.0 * exponent * distance_m.log10() + shadow;
    Ok(pl.max(free_space_db(distance_m, carrier_ghz)))
}

/// Draws one channel realization for a link.
///
/// Draw order is fixed and documented so that a given generator stream
/// always produces the same realization: line-of-sight state, shadow
/// fading, cluster count, per-cluster power and center angles, then
/// per-ray offsets, gain phase, cross-polarization ratio, and coupling
/// phases, cluster by cluster.
pub fn generate_channel<R: Rng>(
    tp: &UraConfig,
    ue: &UraConfig,
    geometry: &LinkGeometry,
    carrier_ghz: f64,
    profile: &ChannelProfile,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if carrier_ghz <= 0.0 {
        return Err(Error::Domain(format!(
            "carrier must be positive, got {carrier_ghz} GHz"
        )));
    }
    let los = rng.random::<f64>() < los_probability(geometry.distance_2d, profile);
    let pl_db = path_loss_db(geometry.distance_3d(), los, carrier_ghz, profile, rng)?;

    let aod_az0 = geometry.azimuth;
    let aod_el0 = geometry.departure_elevation();
    let aoa_az0 = geometry.arrival_azimuth();
    let aoa_el0 = geometry.arrival_elevation();

    let normal = |rng: &mut R| -> f64 {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
    };

    let cluster_count = profile.cluster_count.sample(rng);
    let mut cluster_power = Vec::with_capacity(cluster_count);
    let mut cluster_angles = Vec::with_capacity(cluster_count);
    for _ in 0..cluster_count {
        let x: f64 = Exp1.sample(rng);
        let jitter_db = normal(rng) * profile.cluster_shadow_sigma_db;
        cluster_power.push((-profile.cluster_decay * x).exp() * 10f64.powf(-jitter_db / 10.0));
        cluster_angles.push([
            aod_az0 + normal(rng) * profile.aod_azimuth_spread,
            aod_el0 + normal(rng) * profile.aod_elevation_spread,
            aoa_az0 + normal(rng) * profile.aoa_azimuth_spread,
            aoa_el0 + normal(rng) * profile.aoa_elevation_spread,
        ]);
    }
    let power_total: f64 = cluster_power.iter().sum();
    // Diffuse power budget: everything, or the non-specular share when a
    // line-of-sight ray is present.
    let k_linear = 10f64.powf(profile.rician_k_db / 10.0);
    let diffuse_share = if los { 1.0 / (k_linear + 1.0) } else { 1.0 };

    let mut rays = Vec::with_capacity(cluster_count * profile.rays_per_cluster + 1);
    if los {
        // Specular ray: deterministic phase from the path length, identity
        // co-polar coupling with the cross-polar sign flip of a reflection-
        // free polarized wave.
        let wavelength = SPEED_OF_LIGHT / (carrier_ghz * 1e9);
        let cycles = geometry.distance_3d() / wavelength;
        let phase = -2.0 * std::f64::consts::PI * cycles.fract();
        let amp = (k_linear / (k_linear + 1.0)).sqrt();
        let mut coupling = vec![vec![Complex64::ZERO; tp.polarizations]; ue.polarizations];
        for (r, row) in coupling.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                if r == c {
                    *entry = if r == 0 {
                        Complex64::ONE
                    } else {
                        -Complex64::ONE
                    };
                }
            }
        }
        rays.push(Ray {
            aod_azimuth: aod_az0,
            aod_elevation: aod_el0,
            aoa_azimuth: aoa_az0,
            aoa_elevation: aoa_el0,
            gain: Complex64::from_polar(amp, phase),
            coupling,
        });
    }
    for (power, center) in cluster_power.iter().zip(&cluster_angles) {
        let ray_power = diffuse_share * power / power_total / profile.rays_per_cluster as f64;
        let amp = ray_power.sqrt();
        for _ in 0..profile.rays_per_cluster {
            let aod_azimuth = center[0] + normal(rng) * profile.ray_azimuth_spread;
            let aod_elevation = center[1] + normal(rng) * profile.ray_elevation_spread;
            let aoa_azimuth = center[2] + normal(rng) * profile.ray_azimuth_spread;
            let aoa_elevation = center[3] + normal(rng) * profile.ray_elevation_spread;
            let gain = Complex64::from_polar(amp, rng.random::<f64>() * 2.0 * std::f64::consts::PI);
            let cross_mag = if tp.polarizations.min(ue.polarizations) > 1 {
                let xpr_db = profile.xpr_mean_db + normal(rng) * profile.xpr_sigma_db;
                10f64.powf(-xpr_db / 20.0)
            } else {
                0.0
            };
            let mut coupling = vec![vec![Complex64::ZERO; tp.polarizations]; ue.polarizations];
            for (r, row) in coupling.iter_mut().enumerate() {
                for (c, entry) in row.iter_mut().enumerate() {
                    let mag = if r == c { 1.0 } else { cross_mag };
                    let phi = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    *entry = Complex64::from_polar(mag, phi);
                }
            }
            rays.push(Ray {
                aod_azimuth,
                aod_elevation,
                aoa_azimuth,
                aoa_elevation,
                gain,
                coupling,
            });
        }
    }

    // Exact unit energy across ray gains.
    let energy: f64 = rays.iter().map(|r| r.gain.norm_sqr()).sum();
    let scale = energy.sqrt().recip();
    for ray in rays.iter_mut() {
        ray.gain *= scale;
    }

    let h = assemble(tp, ue, &rays);
    Ok(ChannelRealization {
        h,
        path_loss_linear: 10f64.powf(pl_db / 10.0),
        los,
        rays,
    })
}

/// Sums the per-ray rank-one (per polarization pair) contributions into
/// the channel matrix. Each ray contributes with unit Frobenius norm times
/// its gain, element patterns, and the sqrt(n_r n_t) array factor.
fn assemble(tp: &UraConfig, ue: &UraConfig, rays: &[Ray]) -> ComplexMatrix {
    let s_t = tp.spatial_elements();
    let s_r = ue.spatial_elements();
    let n_t = tp.num_elements();
    let n_r = ue.num_elements();
    let mut h = ComplexMatrix::zeros(n_r, n_t);
    let array_factor = ((n_r * n_t) as f64).sqrt();
    for ray in rays {
        let g_t = element_gain(
            ray.aod_azimuth - tp.boresight_azimuth,
            ray.aod_elevation,
            tp.role,
        );
        let g_r = element_gain(
            ray.aoa_azimuth - ue.boresight_azimuth,
            ray.aoa_elevation,
            ue.role,
        );
        let pattern = 10f64.powf((g_t + g_r) / 20.0);
        let coupling_norm: f64 = ray
            .coupling
            .iter()
            .flatten()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if coupling_norm == 0.0 {
            continue;
        }
        let t_phases = spatial_phases(tp, ray.aod_azimuth, ray.aod_elevation);
        let r_phases = spatial_phases(ue, ray.aoa_azimuth, ray.aoa_elevation);
        let weight =
            ray.gain * pattern * array_factor / (coupling_norm * ((s_r * s_t) as f64).sqrt());
        for (p_r, row) in ray.coupling.iter().enumerate() {
            for (p_t, &coupling) in row.iter().enumerate() {
                if coupling == Complex64::ZERO {
                    continue;
                }
                let w = weight * coupling;
                for (i, &rp) in r_phases.iter().enumerate() {
                    let wr = w * rp;
                    let row_base = (p_r * s_r + i) * n_t + p_t * s_t;
                    let data = h.data_mut();
                    for (j, &tph) in t_phases.iter().enumerate() {
                        data[row_base + j] += wr * tph.conj();
                    }
                }
            }
        }
    }
    h
}
