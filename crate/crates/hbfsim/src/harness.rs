//! Campaign orchestration: configuration, the Monte Carlo runner, and
//! empirical CDF summaries.
//!
//! One campaign runs `realizations` independent drops. Each drop places
//! `users_per_cell` users in every sector, generates the channel from every
//! transmission point to every user, designs weights for each configured
//! scheme, and evaluates the analytic metrics. Realizations are independent
//! tasks with random streams derived from (seed, realization index), so
//! results do not depend on scheduling or worker count.

use crate::beamforming::{
    baseline_scheme, build_codebooks, gmr_scheme, lsp_scheme, matched_combiner, rf_select_max,
    slnr_scheme, Codebooks, HybridWeights, RfSelection,
};
use crate::channel::{generate_channel, ChannelProfile, ChannelRealization};
use crate::geometry::{drop_users, wrap_deg, LinkGeometry, SectorLayout, UraConfig};
use crate::metrics::{
    interference_covariance, power_decomposition, spectral_efficiency, InterfererTerm, LinkBudget,
    UserResult,
};
use crate::seed::{derive_rng, STAGE_CHANNEL, STAGE_DROP};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Number of co-sited sectors; the layout is fixed at one three-sector site.
pub const NUM_CELLS: usize = 3;

/// Weight-design scheme identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Eigenmode transmission on the effective channel.
    Baseline,
    /// Leakage-steered analog selection with eigenmode baseband weights.
    Lsp,
    /// Leakage-regularized digital precoding.
    Slnr,
    /// Matched-reverse precoding without inter-user coordination.
    Gmr,
}

impl Scheme {
    /// Stable, filesystem-safe identifier.
    pub fn id(&self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Lsp => "lsp",
            Scheme::Slnr => "slnr",
            Scheme::Gmr => "gmr",
        }
    }

    pub fn all() -> [Scheme; 4] {
        [Scheme::Baseline, Scheme::Lsp, Scheme::Slnr, Scheme::Gmr]
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "baseline" => Ok(Scheme::Baseline),
            "lsp" => Ok(Scheme::Lsp),
            "slnr" => Ok(Scheme::Slnr),
            "gmr" => Ok(Scheme::Gmr),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected baseline, lsp, slnr, or gmr)"
            ))),
        }
    }
}

/// Panel dimensions of one array, configuration-level view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayShape {
    pub rows: usize,
    pub cols: usize,
    pub polarizations: usize,
}

impl ArrayShape {
    pub fn num_elements(&self) -> usize {
        self.rows * self.cols * self.polarizations
    }

    fn to_config(self, template: UraConfig) -> UraConfig {
        UraConfig {
            rows: self.rows,
            cols: self.cols,
            polarizations: self.polarizations,
            ..template
        }
    }

    /// Sector panel with the transmit spacing/gain conventions.
    pub fn tp_config(self, boresight_azimuth: f64) -> UraConfig {
        self.to_config(UraConfig::transmit_panel(boresight_azimuth))
    }

    /// Handset panel with the receive conventions.
    pub fn ue_config(self, boresight_azimuth: f64) -> UraConfig {
        self.to_config(UraConfig::user_panel(boresight_azimuth))
    }
}

fn default_carrier_ghz() -> f64 {
    28.0
}
fn default_bandwidth_hz() -> f64 {
    100e6
}
fn default_tx_power_dbm() -> f64 {
    35.2
}
fn default_noise_figure_db() -> f64 {
    10.0
}
fn default_cell_radius_m() -> f64 {
    200.0
}
fn default_min_distance_m() -> f64 {
    10.0
}
fn default_users_per_cell() -> usize {
    3
}
fn default_streams_per_user() -> usize {
    2
}
fn default_tp_chains_per_user() -> usize {
    4
}
fn default_ue_chains() -> usize {
    4
}
fn default_tp_array() -> ArrayShape {
    ArrayShape {
        rows: 8,
        cols: 16,
        polarizations: 2,
    }
}
fn default_ue_array() -> ArrayShape {
    ArrayShape {
        rows: 2,
        cols: 2,
        polarizations: 2,
    }
}
fn default_profile() -> String {
    "many-weak-clusters".to_string()
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Baseline, Scheme::Lsp, Scheme::Slnr]
}
fn default_realizations() -> usize {
    50
}
fn default_seed() -> u64 {
    1
}

/// Complete experiment manifest. Every field has a default, so a config
/// file only states what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Carrier frequency, GHz.
    #[serde(default = "default_carrier_ghz")]
    pub carrier_ghz: f64,
    /// Signal bandwidth, Hz.
    #[serde(default = "default_bandwidth_hz")]
    pub bandwidth_hz: f64,
    /// Per-user transmit power, dBm.
    #[serde(default = "default_tx_power_dbm")]
    pub tx_power_dbm: f64,
    /// Receiver noise figure, dB.
    #[serde(default = "default_noise_figure_db")]
    pub noise_figure_db: f64,
    /// Sector radius, meters.
    #[serde(default = "default_cell_radius_m")]
    pub cell_radius_m: f64,
    /// Minimum user distance from the site, meters.
    #[serde(default = "default_min_distance_m")]
    pub min_distance_m: f64,
    /// Users dropped in each sector (K).
    #[serde(default = "default_users_per_cell")]
    pub users_per_cell: usize,
    /// Spatial streams per user (N_S).
    #[serde(default = "default_streams_per_user")]
    pub streams_per_user: usize,
    /// Transmit RF chains reserved per user.
    #[serde(default = "default_tp_chains_per_user")]
    pub tp_chains_per_user: usize,
    /// Receive RF chains at each user.
    #[serde(default = "default_ue_chains")]
    pub ue_chains: usize,
    /// Sector panel shape.
    #[serde(default = "default_tp_array")]
    pub tp_array: ArrayShape,
    /// Handset panel shape.
    #[serde(default = "default_ue_array")]
    pub ue_array: ArrayShape,
    /// Channel statistics preset name.
    #[serde(default = "default_profile")]
    pub profile: String,
    /// Schemes to evaluate, in report order.
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    /// Monte Carlo realizations.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Campaign seed; every random stream derives from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes through the field defaults")
    }
}

impl CampaignConfig {
    /// Parses a TOML manifest.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        Ok(cfg)
    }

    /// Reads and parses a TOML manifest file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(
            self.tx_power_dbm,
            self.noise_figure_db,
            self.bandwidth_hz,
            self.carrier_ghz,
        )
    }

    pub fn channel_profile(&self) -> Result<ChannelProfile> {
        ChannelProfile::by_name(&self.profile)
    }

    /// Checks every invariant that must hold before any computation:
    /// stream/chain consistency, the matched-reverse stream requirement,
    /// array and layout sanity, and profile existence.
    pub fn validate(&self) -> Result<()> {
        self.budget()?;
        self.channel_profile()?.validate()?;
        SectorLayout::new(self.cell_radius_m, self.min_distance_m).validate()?;
        self.tp_array.tp_config(0.0).validate()?;
        self.ue_array.ue_config(0.0).validate()?;
        if self.users_per_cell == 0 {
            return Err(Error::Config("users_per_cell must be at least one".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least one".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("the scheme list is empty".into()));
        }
        let chain_cap = self.tp_chains_per_user.min(self.ue_chains);
        if self.streams_per_user == 0 || self.streams_per_user > chain_cap {
            return Err(Error::Config(format!(
                "streams_per_user {} outside 1..={chain_cap} (bounded by the chain counts)",
                self.streams_per_user
            )));
        }
        if self.tp_chains_per_user > self.tp_array.num_elements()
            || self.ue_chains > self.ue_array.num_elements()
        {
            return Err(Error::Config(
                "chain counts cannot exceed the element counts of their arrays".into(),
            ));
        }
        if self.schemes.contains(&Scheme::Gmr) && self.streams_per_user != self.ue_chains {
            return Err(Error::Config(format!(
                "matched-reverse precoding needs streams_per_user ({}) equal to ue_chains ({})",
                self.streams_per_user, self.ue_chains
            )));
        }
        Ok(())
    }
}

/// Everything a campaign produces: the per-user records in deterministic
/// order (realization-major, then scheme, then user) and the number of
/// channel matrices generated.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub results: Vec<UserResult>,
    pub channel_count: usize,
}

impl CampaignOutcome {
    /// Spectral-efficiency values of one scheme, in record order.
    pub fn scheme_values(&self, scheme: Scheme) -> Vec<f64> {
        self.results
            .iter()
            .filter(|r| r.scheme == scheme.id())
            .map(|r| r.spectral_efficiency)
            .collect()
    }
}

/// Runs the full Monte Carlo campaign described by `cfg`.
///
/// With the `parallel` feature (default) realizations run on the rayon
/// pool; without it they run sequentially. Both paths produce identical
/// results because each realization derives its own random streams.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutcome> {
    cfg.validate()?;
    let budget = cfg.budget()?;
    let profile = cfg.channel_profile()?;
    let layout = SectorLayout::new(cfg.cell_radius_m, cfg.min_distance_m);

    let task = |r: usize| realization_task(cfg, &layout, &budget, &profile, r);

    #[cfg(feature = "parallel")]
    let per_realization: Vec<(Vec<UserResult>, usize)> = {
        use rayon::prelude::*;
        (0..cfg.realizations)
            .into_par_iter()
            .map(task)
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_realization: Vec<(Vec<UserResult>, usize)> =
        (0..cfg.realizations).map(task).collect::<Result<_>>()?;

    let mut results =
        Vec::with_capacity(cfg.realizations * cfg.schemes.len() * cfg.users_per_cell * NUM_CELLS);
    let mut channel_count = 0;
    for (records, count) in per_realization {
        results.extend(records);
        channel_count += count;
    }
    Ok(CampaignOutcome {
        results,
        channel_count,
    })
}

/// Channel table of one realization: `links[user][tp]` plus the geometry
/// every link shares.
struct RealizationChannels {
    links: Vec<Vec<ChannelRealization>>,
    count: usize,
}

fn generate_drop_channels(
    cfg: &CampaignConfig,
    layout: &SectorLayout,
    profile: &ChannelProfile,
    tp_configs: &[UraConfig; NUM_CELLS],
    r: usize,
) -> Result<(RealizationChannels, Vec<UraConfig>)> {
    let mut drop_rng = derive_rng(cfg.seed, &[STAGE_DROP, r as u64]);
    let drop = drop_users(layout, cfg.users_per_cell, &mut drop_rng);
    let n_users = drop.users.len();

    let mut links = Vec::with_capacity(n_users);
    let mut ue_configs = Vec::with_capacity(n_users);
    let mut count = 0;
    for u in 0..n_users {
        let geometry = LinkGeometry::from_drop(layout, &drop, u);
        // The handset panel faces the site.
        let ue_cfg = cfg.ue_array.ue_config(wrap_deg(geometry.arrival_azimuth()));
        let mut per_tp = Vec::with_capacity(NUM_CELLS);
        for (i, tp_cfg) in tp_configs.iter().enumerate() {
            let mut rng = derive_rng(cfg.seed, &[STAGE_CHANNEL, r as u64, u as u64, i as u64]);
            per_tp.push(generate_channel(
                tp_cfg,
                &ue_cfg,
                &geometry,
                cfg.carrier_ghz,
                profile,
                &mut rng,
            )?);
            count += 1;
        }
        links.push(per_tp);
        ue_configs.push(ue_cfg);
    }
    Ok((RealizationChannels { links, count }, ue_configs))
}

fn realization_task(
    cfg: &CampaignConfig,
    layout: &SectorLayout,
    budget: &LinkBudget,
    profile: &ChannelProfile,
    r: usize,
) -> Result<(Vec<UserResult>, usize)> {
    let tp_configs = sector_panels(cfg, layout);
    let (channels, ue_configs) = generate_drop_channels(cfg, layout, profile, &tp_configs, r)?;
    let n_users = channels.links.len();
    let n_receive = cfg.ue_array.num_elements();
    let p_t = budget.transmit_power_watts();
    let serving = |u: usize| u / cfg.users_per_cell;

    // Analog stage per user on the serving link, shared by every scheme
    // that designs its baseband weights on the effective channel.
    let mut codebooks: Vec<Codebooks> = Vec::with_capacity(n_users);
    let mut rf: Vec<RfSelection> = Vec::with_capacity(n_users);
    let mut effectives: Vec<crate::linalg::ComplexMatrix> = Vec::with_capacity(n_users);
    for u in 0..n_users {
        let c = serving(u);
        let desired = &channels.links[u][c];
        let cb = build_codebooks(desired, &tp_configs[c], &ue_configs[u]);
        let sel = rf_select_max(&desired.h, &cb, cfg.tp_chains_per_user, cfg.ue_chains)?;
        effectives.push(sel.w_rf.h().mul(&desired.h).mul(&sel.f_rf));
        codebooks.push(cb);
        rf.push(sel);
    }

    let mut records = Vec::with_capacity(cfg.schemes.len() * n_users);
    for &scheme in &cfg.schemes {
        let mut weights: Vec<HybridWeights> = Vec::with_capacity(n_users);
        for u in 0..n_users {
            let c = serving(u);
            let desired = &channels.links[u][c];
            let w = match scheme {
                Scheme::Baseline => {
                    let (f_bb, w_bb) = baseline_scheme(&effectives[u], cfg.streams_per_user)?;
                    HybridWeights::new(rf[u].f_rf.clone(), f_bb, rf[u].w_rf.clone(), w_bb)
                }
                Scheme::Lsp => {
                    let leakage: Vec<&ChannelRealization> = (0..n_users)
                        .filter(|&m| m != u)
                        .map(|m| &channels.links[m][c])
                        .collect();
                    lsp_scheme(
                        desired,
                        &leakage,
                        &codebooks[u],
                        cfg.streams_per_user,
                        cfg.tp_chains_per_user,
                        cfg.ue_chains,
                    )?
                }
                Scheme::Slnr => {
                    let scaled = effectives[u].scale_re(desired.path_loss_linear.sqrt().recip());
                    let blocks: Vec<crate::linalg::ComplexMatrix> = (0..n_users)
                        .filter(|&m| m != u)
                        .map(|m| {
                            let cross = &channels.links[m][c];
                            rf[m]
                                .w_rf
                                .h()
                                .mul(&cross.h)
                                .mul(&rf[u].f_rf)
                                .scale_re(cross.path_loss_linear.sqrt().recip())
                        })
                        .collect();
                    let refs: Vec<&crate::linalg::ComplexMatrix> = blocks.iter().collect();
                    let leakage_eff = crate::linalg::ComplexMatrix::vstack(&refs);
                    let (f_bb, w_bb, _) = slnr_scheme(
                        &scaled,
                        &leakage_eff,
                        &rf[u].w_rf,
                        &rf[u].f_rf,
                        p_t,
                        budget.noise_power_watts(),
                        cfg.streams_per_user,
                    )?;
                    HybridWeights::new(rf[u].f_rf.clone(), f_bb, rf[u].w_rf.clone(), w_bb)
                }
                Scheme::Gmr => {
                    let f_bb = gmr_scheme(&effectives[u], cfg.streams_per_user)?;
                    let w_bb = matched_combiner(&effectives[u], &f_bb)?;
                    HybridWeights::new(rf[u].f_rf.clone(), f_bb, rf[u].w_rf.clone(), w_bb)
                }
            };
            weights.push(w);
        }

        for u in 0..n_users {
            let c = serving(u);
            let desired = &channels.links[u][c];
            let terms: Vec<InterfererTerm<'_>> = (0..n_users)
                .filter(|&m| m != u)
                .map(|m| {
                    let cross = &channels.links[u][serving(m)];
                    InterfererTerm {
                        channel_to_target: &cross.h,
                        path_loss_linear: cross.path_loss_linear,
                        f_rf: &weights[m].f_rf,
                        f_bb: &weights[m].f_bb,
                        eta: weights[m].eta,
                    }
                })
                .collect();
            let d = interference_covariance(n_receive, &terms, p_t);
            let se = spectral_efficiency(
                &weights[u],
                &desired.h,
                desired.path_loss_linear,
                &d,
                budget,
            )?;
            let (signal, interference) = power_decomposition(
                &weights[u],
                &desired.h,
                desired.path_loss_linear,
                &d,
                budget,
            );
            records.push(UserResult {
                scheme: scheme.id().to_string(),
                drop_index: r,
                cell: c,
                user_in_cell: u % cfg.users_per_cell,
                seed: cfg.seed,
                spectral_efficiency: se.bits_per_hz,
                signal_power: signal,
                interference_power: interference,
                los: desired.los,
                whitening_regularized: se.regularized,
            });
        }
    }
    Ok((records, channels.count))
}

fn sector_panels(cfg: &CampaignConfig, layout: &SectorLayout) -> [UraConfig; NUM_CELLS] {
    [
        cfg.tp_array.tp_config(layout.boresights[0]),
        cfg.tp_array.tp_config(layout.boresights[1]),
        cfg.tp_array.tp_config(layout.boresights[2]),
    ]
}

/// Writes every channel matrix of the campaign as JSON lines, regenerated
/// deterministically from the configuration. One record per (realization,
/// user, transmission point); intended for small runs, as each record
/// carries the full receive-by-transmit matrix.
pub fn dump_channels(cfg: &CampaignConfig, path: &Path) -> Result<()> {
    cfg.validate()?;
    let profile = cfg.channel_profile()?;
    let layout = SectorLayout::new(cfg.cell_radius_m, cfg.min_distance_m);
    let tp_configs = sector_panels(cfg, &layout);
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    for r in 0..cfg.realizations {
        let (channels, _) = generate_drop_channels(cfg, &layout, &profile, &tp_configs, r)?;
        for (u, per_tp) in channels.links.iter().enumerate() {
            for (i, link) in per_tp.iter().enumerate() {
                let record = ChannelDump {
                    drop_index: r,
                    user: u,
                    tp: i,
                    rows: link.h.rows(),
                    cols: link.h.cols(),
                    path_loss_db: 10.0 * link.path_loss_linear.log10(),
                    los: link.los,
                    re: link.h.data().iter().map(|v| v.re).collect(),
                    im: link.h.data().iter().map(|v| v.im).collect(),
                };
                let line =
                    serde_json::to_string(&record).map_err(|e| Error::Serialize(e.to_string()))?;
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ChannelDump {
    drop_index: usize,
    user: usize,
    tp: usize,
    rows: usize,
    cols: usize,
    path_loss_db: f64,
    los: bool,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Empirical distribution of one scalar metric: sorted values with
/// probabilities i/n, plus interpolated percentiles.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSeries {
    values: Vec<f64>,
    probabilities: Vec<f64>,
}

/// Builds the empirical CDF of `values`. Probability i/n is attached to
/// the i-th sorted value (1-based), so the last point has probability 1.
pub fn cdf(values: &[f64]) -> Result<CdfSeries> {
    if values.is_empty() {
        return Err(Error::Domain(
            "cannot build a distribution from no samples".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("distribution samples must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let n = sorted.len() as f64;
    let probabilities = (1..=sorted.len()).map(|i| i as f64 / n).collect();
    Ok(CdfSeries {
        values: sorted,
        probabilities,
    })
}

impl CdfSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Percentile by linear interpolation between order statistics: the
    /// p-th percentile sits at fractional position (n-1) * p / 100.
    pub fn percentile(&self, percent: f64) -> f64 {
        assert!(
            (0.0..=100.0).contains(&percent),
            "percentile outside 0..=100"
        );
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let position = (n - 1) as f64 * percent / 100.0;
        let lower = position.floor() as usize;
        let upper = position.ceil() as usize;
        let fraction = position - lower as f64;
        self.values[lower] * (1.0 - fraction) + self.values[upper] * fraction
    }

    pub fn median(&self) -> f64 {
        self.percentile(50.0)
    }
}

/// Estimates the largest sector radius whose cell-edge percentile of the
/// single-link SNR still meets `target_snr_db`.
///
/// The SNR model is a deliberate scalar heuristic: transmit power plus
/// peak element gain plus full coherent array gain, minus sampled path
/// loss, minus noise power. It ranks radii for planning purposes and is
/// not a substitute for running the campaign.
pub fn coverage_radius(
    cfg: &CampaignConfig,
    target_snr_db: f64,
    edge_percentile: f64,
    samples: usize,
) -> Result<f64> {
    if !(0.0..=100.0).contains(&edge_percentile) {
        return Err(Error::Config(format!(
            "edge percentile must be within 0..=100, got {edge_percentile}"
        )));
    }
    if samples == 0 {
        return Err(Error::Config(
            "coverage estimation needs at least one sample".into(),
        ));
    }
    let budget = cfg.budget()?;
    let profile = cfg.channel_profile()?;
    let fixed_gain_db = cfg.tx_power_dbm
        + cfg.tp_array.tp_config(0.0).element_gain_max
        + 10.0 * (cfg.tp_array.num_elements() as f64).log10()
        - budget.noise_power_dbm();

    let edge_snr = |radius: f64| -> Result<f64> {
        let mut rng = derive_rng(cfg.seed, &[u64::from_le_bytes(*b"coverage")]);
        let layout = SectorLayout::new(radius, cfg.min_distance_m);
        let mut snrs = Vec::with_capacity(samples);
        for _ in 0..samples {
            let drop = drop_users(&layout, 1, &mut rng);
            let geometry = LinkGeometry::from_drop(&layout, &drop, 0);
            let los = crate::channel::los_probability(geometry.distance_2d, &profile)
                >= rng.random::<f64>();
            let pl_db = crate::channel::path_loss_db(
                geometry.distance_3d(),
                los,
                cfg.carrier_ghz,
                &profile,
                &mut rng,
            )?;
            snrs.push(fixed_gain_db - pl_db);
        }
        Ok(cdf(&snrs)?.percentile(edge_percentile))
    };

    let (mut lo, mut hi) = (cfg.min_distance_m + 1.0, 10_000.0);
    if edge_snr(lo)? < target_snr_db {
        return Err(Error::Domain(format!(
            "target {target_snr_db} dB unreachable even at {lo} m"
        )));
    }
    if edge_snr(hi)? >= target_snr_db {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if edge_snr(mid)? >= target_snr_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
