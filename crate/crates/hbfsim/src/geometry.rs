//! Array geometry, sector layout, and user placement.
//!
//! Angle conventions used throughout the crate: azimuth is measured in
//! degrees counterclockwise from the x axis in the horizontal plane,
//! elevation in degrees above the horizon. Steering phases are referenced
//! to an array's boresight azimuth with the panel mounted vertically, so a
//! wave from boresight at zero elevation hits all elements in phase.

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Which end of a link an array sits on; selects the element pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementRole {
    /// Transmission point: sectoral elements with 65 degree half-power
    /// widths in both planes and an 8 dBi peak.
    Tp,
    /// User equipment: omnidirectional 0 dBi elements.
    Ue,
}

/// Uniform rectangular array of dual- or single-polarized elements.
///
/// Elements are indexed polarization-major: index = p * rows * cols +
/// r * cols + c. Co-located polarizations share a phase center, so the
/// steering vector repeats its spatial block per polarization.
#[derive(Debug, Clone)]
pub struct UraConfig {
    pub rows: usize,
    pub cols: usize,
    pub polarizations: usize,
    /// Horizontal element pitch in wavelengths.
    pub spacing_azimuth: f64,
    /// Vertical element pitch in wavelengths.
    pub spacing_elevation: f64,
    /// Mounting azimuth of the panel normal, degrees.
    pub boresight_azimuth: f64,
    /// Peak element gain in dBi; informational for reports.
    pub element_gain_max: f64,
    pub role: ElementRole,
}

impl UraConfig {
    /// 256-element transmit panel: 8 rows by 16 columns, two polarizations,
    /// half-wavelength horizontal and full-wavelength vertical pitch.
    pub fn transmit_panel(boresight_azimuth: f64) -> Self {
        Self {
            rows: 8,
            cols: 16,
            polarizations: 2,
            spacing_azimuth: 0.5,
            spacing_elevation: 1.0,
            boresight_azimuth,
            element_gain_max: 8.0,
            role: ElementRole::Tp,
        }
    }

    /// Eight-element user panel: 2 by 2, two polarizations.
    pub fn user_panel(boresight_azimuth: f64) -> Self {
        Self {
            rows: 2,
            cols: 2,
            polarizations: 2,
            spacing_azimuth: 0.5,
            spacing_elevation: 1.0,
            boresight_azimuth,
            element_gain_max: 0.0,
            role: ElementRole::Ue,
        }
    }

    pub fn spatial_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols * self.polarizations
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config(
                "array needs at least one row and column".into(),
            ));
        }
        if !(1..=2).contains(&self.polarizations) {
            return Err(Error::Config(format!(
                "polarizations must be 1 or 2, got {}",
                self.polarizations
            )));
        }
        if self.spacing_azimuth <= 0.0 || self.spacing_elevation <= 0.0 {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        Ok(())
    }
}

/// Wraps an angle in degrees to [-180, 180).
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(360.0);
    if a >= 180.0 {
        a -= 360.0;
    }
    a
}

/// Element gain in dB toward the given direction. `azimuth_off_boresight`
/// and `elevation` are in degrees.
///
/// The sectoral pattern is parabolic in each plane with 65 degree
/// half-power width, a 30 dB per-plane floor, a 30 dB total floor, and an
/// 8 dBi peak. User elements are isotropic at 0 dBi.
pub fn element_gain(azimuth_off_boresight: f64, elevation: f64, role: ElementRole) -> f64 {
    match role {
        ElementRole::Ue => 0.0,
        ElementRole::Tp => {
            let az = wrap_deg(azimuth_off_boresight);
            let a_az = (12.0 * (az / 65.0).powi(2)).min(30.0);
            let a_el = (12.0 * (elevation / 65.0).powi(2)).min(30.0);
            8.0 - (a_az + a_el).min(30.0)
        }
    }
}

/// Per-element phase factors (unit magnitude) of the spatial grid toward a
/// global azimuth and elevation, row-major over rows then columns. Both
/// polarization ports of an element share its phase center, so the spatial
/// profile is polarization independent.
pub fn spatial_phases(cfg: &UraConfig, azimuth: f64, elevation: f64) -> Vec<Complex64> {
    let az_off = wrap_deg(azimuth - cfg.boresight_azimuth).to_radians();
    let el = elevation.to_radians();
    let k_az = 2.0 * std::f64::consts::PI * cfg.spacing_azimuth * az_off.sin() * el.cos();
    let k_el = 2.0 * std::f64::consts::PI * cfg.spacing_elevation * el.sin();
    let mut phases = Vec::with_capacity(cfg.spatial_elements());
    for r in 0..cfg.rows {
        for c in 0..cfg.cols {
            phases.push(Complex64::from_polar(
                1.0,
                (c as f64) * k_az + (r as f64) * k_el,
            ));
        }
    }
    phases
}

/// Unit-norm steering vector of the array toward a global azimuth and
/// elevation, as an n x 1 matrix with n = rows * cols * polarizations.
pub fn ura_response(cfg: &UraConfig, azimuth: f64, elevation: f64) -> ComplexMatrix {
    let phases = spatial_phases(cfg, azimuth, elevation);
    let spatial = cfg.spatial_elements();
    let n = cfg.num_elements();
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = ComplexMatrix::zeros(n, 1);
    for (s, &e) in phases.iter().enumerate() {
        for p in 0..cfg.polarizations {
            v[(p * spatial + s, 0)] = e * amp;
        }
    }
    v
}

/// Three-sector site serving a ring between a minimum distance and the
/// cell radius in each 120 degree sector.
#[derive(Debug, Clone)]
pub struct SectorLayout {
    pub site: [f64; 2],
    /// Sector boresight azimuths in degrees, one per cell.
    pub boresights: [f64; 3],
    pub cell_radius: f64,
    pub min_distance: f64,
    pub tp_height: f64,
    pub ue_height: f64,
}

impl SectorLayout {
    pub fn new(cell_radius: f64, min_distance: f64) -> Self {
        Self {
            site: [0.0, 0.0],
            boresights: [30.0, 150.0, 270.0],
            cell_radius,
            min_distance,
            tp_height: 10.0,
            ue_height: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_distance > 0.0) {
            return Err(Error::Config(
                "minimum drop distance must be positive".into(),
            ));
        }
        if !(self.cell_radius > self.min_distance) {
            return Err(Error::Config(format!(
                "cell radius {} must exceed the minimum drop distance {}",
                self.cell_radius, self.min_distance
            )));
        }
        if !(self.tp_height > 0.0) || !(self.ue_height > 0.0) {
            return Err(Error::Config("antenna heights must be positive".into()));
        }
        Ok(())
    }
}

/// One placed user.
#[derive(Debug, Clone)]
pub struct DroppedUser {
    /// Serving cell index, 0..3.
    pub cell: usize,
    /// Horizontal position in meters.
    pub position: [f64; 2],
}

/// User positions for one Monte Carlo realization, cell-major: users of
/// cell 0 first, then cell 1, then cell 2.
#[derive(Debug, Clone)]
pub struct UserDrop {
    pub users: Vec<DroppedUser>,
}

impl UserDrop {
    /// Horizontal distance from the site to user `idx`.
    pub fn distance_2d(&self, layout: &SectorLayout, idx: usize) -> f64 {
        let p = self.users[idx].position;
        ((p[0] - layout.site[0]).powi(2) + (p[1] - layout.site[1]).powi(2)).sqrt()
    }

    /// Azimuth from the site toward user `idx`, degrees.
    pub fn azimuth_from_site(&self, layout: &SectorLayout, idx: usize) -> f64 {
        let p = self.users[idx].position;
        (p[1] - layout.site[1])
            .atan2(p[0] - layout.site[0])
            .to_degrees()
    }
}

/// Draws `users_per_cell` user positions per sector, uniform over each
/// sector's area between the minimum distance and the cell radius.
///
/// The radial inverse-CDF transform keeps density uniform in area: with u
/// uniform on [0, 1), r = sqrt(r_min^2 + u (R^2 - r_min^2)).
pub fn drop_users<R: Rng>(layout: &SectorLayout, users_per_cell: usize, rng: &mut R) -> UserDrop {
    let r_min_sq = layout.min_distance * layout.min_distance;
    let span_sq = layout.cell_radius * layout.cell_radius - r_min_sq;
    let mut users = Vec::with_capacity(3 * users_per_cell);
    for (cell, &boresight) in layout.boresights.iter().enumerate() {
        for _ in 0..users_per_cell {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let r = (r_min_sq + u * span_sq).sqrt();
            let az = (boresight + (v - 0.5) * 120.0).to_radians();
            users.push(DroppedUser {
                cell,
                position: [layout.site[0] + r * az.cos(), layout.site[1] + r * az.sin()],
            });
        }
    }
    UserDrop { users }
}

/// Geometry of one transmission-point-to-user link.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    /// Horizontal distance in meters.
    pub distance_2d: f64,
    /// Azimuth from the transmission point toward the user, degrees.
    pub azimuth: f64,
    pub tp_height: f64,
    pub ue_height: f64,
}

impl LinkGeometry {
    pub fn from_drop(layout: &SectorLayout, drop: &UserDrop, user_idx: usize) -> Self {
        Self {
            distance_2d: drop.distance_2d(layout, user_idx),
            azimuth: drop.azimuth_from_site(layout, user_idx),
            tp_height: layout.tp_height,
            ue_height: layout.ue_height,
        }
    }

    pub fn distance_3d(&self) -> f64 {
        let dh = self.tp_height - self.ue_height;
        (self.distance_2d * self.distance_2d + dh * dh).sqrt()
    }

    /// Elevation of the user as seen from the transmission point.
    pub fn departure_elevation(&self) -> f64 {
        (self.ue_height - self.tp_height)
            .atan2(self.distance_2d)
            .to_degrees()
    }

    /// Elevation of the transmission point as seen from the user.
    pub fn arrival_elevation(&self) -> f64 {
        (self.tp_height - self.ue_height)
            .atan2(self.distance_2d)
            .to_degrees()
    }

    /// Azimuth from the user toward the transmission point.
    pub fn arrival_azimuth(&self) -> f64 {
        wrap_deg(self.azimuth + 180.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::derive_rng;

    #[test]
    fn wrap_deg_covers_branch_points() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-190.0), 170.0);
        assert_eq!(wrap_deg(180.0), -180.0);
        assert_eq!(wrap_deg(-180.0), -180.0);
        assert_eq!(wrap_deg(360.0), 0.0);
        assert_eq!(wrap_deg(45.0), 45.0);
    }

    #[test]
    fn element_gain_hand_values() {
        // Peak on boresight; 12 dB down at one half-power width in either
        // plane; per-plane and total attenuation floors at 30 dB.
        assert_eq!(element_gain(0.0, 0.0, ElementRole::Tp), 8.0);
        assert_eq!(element_gain(65.0, 0.0, ElementRole::Tp), -4.0);
        assert_eq!(element_gain(0.0, 65.0, ElementRole::Tp), -4.0);
        assert_eq!(element_gain(65.0, 65.0, ElementRole::Tp), -16.0);
        assert_eq!(element_gain(179.0, 0.0, ElementRole::Tp), -22.0);
        assert_eq!(element_gain(179.0, 80.0, ElementRole::Tp), -22.0);
        for (az, el) in [(0.0, 0.0), (65.0, 10.0), (-170.0, 80.0)] {
            assert_eq!(element_gain(az, el, ElementRole::Ue), 0.0);
        }
    }

    #[test]
    fn element_gain_wraps_azimuth() {
        let a = element_gain(350.0, 0.0, ElementRole::Tp);
        let b = element_gain(-10.0, 0.0, ElementRole::Tp);
        assert_eq!(a, b);
    }

    #[test]
    fn steering_vector_is_unit_norm() {
        let cfg = UraConfig::transmit_panel(30.0);
        for (az, el) in [(30.0, 0.0), (75.0, -5.3), (-120.0, 12.0)] {
            let v = ura_response(&cfg, az, el);
            assert_eq!(v.rows(), 256);
            assert!((v.frob_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn broadside_response_has_uniform_phase() {
        let cfg = UraConfig::user_panel(150.0);
        let v = ura_response(&cfg, 150.0, 0.0);
        let expect = 1.0 / (8.0f64).sqrt();
        for i in 0..8 {
            assert!((v[(i, 0)].re - expect).abs() < 1e-12);
            assert!(v[(i, 0)].im.abs() < 1e-12);
        }
    }

    #[test]
    fn two_element_endfire_phase() {
        // One row of two elements at half-wavelength pitch: a wave from 90
        // degrees off boresight arrives with a pi phase step.
        let cfg = UraConfig {
            rows: 1,
            cols: 2,
            polarizations: 1,
            spacing_azimuth: 0.5,
            spacing_elevation: 1.0,
            boresight_azimuth: 0.0,
            element_gain_max: 0.0,
            role: ElementRole::Ue,
        };
        let v = ura_response(&cfg, 90.0, 0.0);
        let amp = 1.0 / (2.0f64).sqrt();
        assert!((v[(0, 0)] - Complex64::new(amp, 0.0)).norm() < 1e-12);
        assert!((v[(1, 0)] - Complex64::new(-amp, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn horizon_response_is_conjugate_symmetric_in_azimuth() {
        let cfg = UraConfig::transmit_panel(0.0);
        let plus = ura_response(&cfg, 37.0, 0.0);
        let minus = ura_response(&cfg, -37.0, 0.0);
        for i in 0..plus.rows() {
            assert!((plus[(i, 0)].conj() - minus[(i, 0)]).norm() < 1e-12);
        }
    }

    #[test]
    fn polarization_blocks_share_phases() {
        let cfg = UraConfig::transmit_panel(30.0);
        let v = ura_response(&cfg, 52.0, -7.0);
        let spatial = cfg.spatial_elements();
        for s in 0..spatial {
            assert_eq!(v[(s, 0)], v[(spatial + s, 0)]);
        }
    }

    #[test]
    fn drops_stay_inside_sector_bounds() {
        let layout = SectorLayout::new(50.0, 10.0);
        let mut rng = derive_rng(3, &[1]);
        let drop = drop_users(&layout, 4, &mut rng);
        assert_eq!(drop.users.len(), 12);
        for idx in 0..drop.users.len() {
            let d = drop.distance_2d(&layout, idx);
            assert!(d >= 10.0 && d <= 50.0, "distance {d} outside ring");
            let cell = drop.users[idx].cell;
            assert_eq!(cell, idx / 4, "cell-major ordering");
            let az = drop.azimuth_from_site(&layout, idx);
            let off = wrap_deg(az - layout.boresights[cell]).abs();
            assert!(off <= 60.0 + 1e-9, "azimuth offset {off} outside sector");
        }
    }

    #[test]
    fn drop_radius_matches_uniform_area_mean() {
        // Uniform density over a ring gives mean radius
        // (2/3) (R^3 - r^3) / (R^2 - r^2); for r = 10, R = 50 that is
        // (2/3) * 124000 / 2400 = 34.4444...
        let layout = SectorLayout::new(50.0, 10.0);
        let mut rng = derive_rng(11, &[2]);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..2500 {
            let drop = drop_users(&layout, 4, &mut rng);
            for idx in 0..drop.users.len() {
                sum += drop.distance_2d(&layout, idx);
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let expect =
            (2.0 / 3.0) * (50.0f64.powi(3) - 10.0f64.powi(3)) / (50.0f64.powi(2) - 10.0f64.powi(2));
        assert!(
            (mean - expect).abs() < 0.25,
            "mean radius {mean} vs {expect} over {count} draws"
        );
    }

    #[test]
    fn drops_are_seed_deterministic() {
        let layout = SectorLayout::new(100.0, 5.0);
        let a = drop_users(&layout, 3, &mut derive_rng(9, &[1, 4]));
        let b = drop_users(&layout, 3, &mut derive_rng(9, &[1, 4]));
        for (x, y) in a.users.iter().zip(&b.users) {
            assert_eq!(x.position, y.position);
        }
    }

    #[test]
    fn link_geometry_derives_angles_and_distance() {
        let layout = SectorLayout::new(50.0, 10.0);
        let drop = UserDrop {
            users: vec![DroppedUser {
                cell: 0,
                position: [30.0, 40.0],
            }],
        };
        let geom = LinkGeometry::from_drop(&layout, &drop, 0);
        assert!((geom.distance_2d - 50.0).abs() < 1e-12);
        // Height difference 8.5 m over 50 m horizontal.
        assert!((geom.distance_3d() - (50.0f64.powi(2) + 8.5f64.powi(2)).sqrt()).abs() < 1e-12);
        assert!((geom.azimuth - 53.13010235415598).abs() < 1e-9);
        assert!((geom.arrival_azimuth() - (53.13010235415598 - 180.0)).abs() < 1e-9);
        assert!(geom.departure_elevation() < 0.0);
        assert!(geom.arrival_elevation() > 0.0);
        assert!((geom.departure_elevation() + geom.arrival_elevation()).abs() < 1e-12);
    }

    #[test]
    fn layout_validation_rejects_bad_radii() {
        assert!(SectorLayout::new(50.0, 10.0).validate().is_ok());
        assert!(SectorLayout::new(10.0, 10.0).validate().is_err());
        assert!(SectorLayout::new(50.0, 0.0).validate().is_err());
    }

    #[test]
    fn array_validation_rejects_bad_shapes() {
        assert!(UraConfig::transmit_panel(30.0).validate().is_ok());
        let mut bad = UraConfig::user_panel(0.0);
        bad.polarizations = 3;
        assert!(bad.validate().is_err());
        let mut bad = UraConfig::user_panel(0.0);
        bad.spacing_azimuth = 0.0;
        assert!(bad.validate().is_err());
    }
}
