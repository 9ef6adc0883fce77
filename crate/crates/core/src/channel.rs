// SPDX-License-Identifier: Apache-2.0

//! Uplink channel realizations: Rayleigh small-scale fading, path-loss based
//! large-scale fading, their real-valued equivalents and the Gram quantities
//! the crossbar detector consumes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::RngStream;

/// Cell geometry, radio parameters and fading statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    /// Base-station antennas (R).
    pub antennas: usize,
    /// Single-antenna user terminals (K).
    pub users: usize,
    pub cell_radius_m: f64,
    /// Transmit power per user terminal.
    pub tx_power_dbm: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Per-dimension standard deviation of the small-scale fading entries.
    pub sigma_g: f64,
    pub pathloss_exponent: f64,
    /// Path loss at the 1 m reference distance.
    pub pathloss_ref_db: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            antennas: 64,
            users: 4,
            cell_radius_m: 150.0,
            tx_power_dbm: 20.0,
            carrier_freq_hz: 2e9,
            bandwidth_hz: 25e6,
            noise_figure_db: 7.0,
            sigma_g: std::f64::consts::FRAC_1_SQRT_2,
            pathloss_exponent: 3.76,
            pathloss_ref_db: 38.46,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.antennas < self.users {
            return Err(Error::Config(format!(
                "need antennas >= users >= 1, got R={} K={}",
                self.antennas, self.users
            )));
        }
        if !(self.cell_radius_m > 0.0) {
            return Err(Error::Config("cell_radius_m must be positive".into()));
        }
        if !(self.sigma_g > 0.0) {
            return Err(Error::Config("sigma_g must be positive".into()));
        }
        Ok(())
    }

    pub fn sigma_g2(&self) -> f64 {
        self.sigma_g * self.sigma_g
    }

    /// `2Rσg²`, the mean of the Gram diagonal.
    pub fn gram_mean(&self) -> f64 {
        2.0 * self.antennas as f64 * self.sigma_g2()
    }

    /// Log-distance path loss in dB, distances below 1 m are clamped.
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        self.pathloss_ref_db + 10.0 * self.pathloss_exponent * distance_m.max(1.0).log10()
    }

    pub fn lambda_at(&self, distance_m: f64) -> f64 {
        10f64.powf(-self.pathloss_db(distance_m) / 10.0)
    }

    /// Thermal noise power over the bandwidth, plus noise figure, in mW.
    pub fn noise_power_mw(&self) -> f64 {
        let dbm = -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db;
        10f64.powf(dbm / 10.0)
    }

    pub fn tx_power_mw(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 10.0)
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        CMat::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|k| self.get(r, k) * other.get(k, c)).sum()
        })
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum()).collect()
    }

    /// Hermitian Gram matrix `selfᴴ·self`.
    pub fn gram(&self) -> CMat {
        CMat::from_fn(self.cols, self.cols, |i, j| {
            (0..self.rows).map(|r| self.get(r, i).conj() * self.get(r, j)).sum()
        })
    }

    /// Scales column `k` by `s[k]`.
    pub fn scale_columns(&self, s: &[f64]) -> CMat {
        assert_eq!(s.len(), self.cols);
        CMat::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * s[c])
    }
}

/// Stacks a complex vector as `[Re; Im]`.
pub fn stack(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

/// Real-valued equivalent `[[Re, −Im], [Im, Re]]` of a complex matrix.
pub fn realify(m: &CMat) -> Mat {
    let (r, c) = (m.rows, m.cols);
    Mat::from_fn(2 * r, 2 * c, |i, j| {
        let z = m.get(i % r, j % c);
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Small-scale fading matrix with i.i.d. `CN(0, 2σg²)` entries.
pub fn draw_ssfc(params: &ScenarioParams, stream: &mut RngStream) -> Result<CMat> {
    if !(params.sigma_g > 0.0) {
        return Err(Error::Config("sigma_g must be positive".into()));
    }
    let s = params.sigma_g;
    Ok(CMat::from_fn(params.antennas, params.users, |_, _| {
        let re = s * stream.gaussian();
        let im = s * stream.gaussian();
        Complex64::new(re, im)
    }))
}

/// Distances of `K` terminals dropped uniformly over the cell disc.
pub fn draw_distances(params: &ScenarioParams, stream: &mut RngStream) -> Vec<f64> {
    (0..params.users)
        .map(|_| (params.cell_radius_m * stream.uniform().sqrt()).max(1.0))
        .collect()
}

/// Large-scale fading coefficients of randomly placed terminals.
pub fn place_uts(params: &ScenarioParams, stream: &mut RngStream) -> Result<Vec<f64>> {
    if !(params.cell_radius_m > 0.0) {
        return Err(Error::Config("cell_radius_m must be positive".into()));
    }
    Ok(draw_distances(params, stream).into_iter().map(|d| params.lambda_at(d)).collect())
}

/// Gram-decomposition quantities of a real-valued SSFC matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    /// `GᵀG`
    pub w: Mat,
    /// `W − 2Rσg²·I`
    pub x: Mat,
    pub q_zf: Vec<f64>,
    pub q_mmse: Vec<f64>,
    /// `ρ/λ_k`, repeated for the real and imaginary halves.
    pub p: Vec<f64>,
}

pub fn build_gram(g: &Mat, lambda: &[f64], params: &ScenarioParams, rho: f64) -> Result<Gram> {
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NonPositiveLambda { index, value });
    }
    if g.cols() != 2 * lambda.len() {
        return Err(Error::Dimension(format!(
            "G has {} columns for {} users",
            g.cols(),
            lambda.len()
        )));
    }
    let n = g.cols();
    let mean = params.gram_mean();
    let w = g.t_matmul(g);
    let mut x = w.clone();
    for i in 0..n {
        x[(i, i)] -= mean;
    }
    let p: Vec<f64> = lambda.iter().chain(lambda).map(|l| rho / l).collect();
    let q_zf = vec![mean; n];
    let q_mmse = q_zf.iter().zip(&p).map(|(q, p)| q + p).collect();
    Ok(Gram { w, x, q_zf, q_mmse, p })
}

/// One channel use: small- and large-scale fading plus everything derived
/// from them.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub g_c: CMat,
    pub lambda: Vec<f64>,
    pub h_c: CMat,
    pub g: Mat,
    /// Diagonal of Λ: `√λ_k`, repeated for both halves.
    pub lambda_sqrt: Vec<f64>,
    pub h: Mat,
    pub gram: Gram,
    pub rho: f64,
}

impl ChannelRealization {
    pub fn new(params: &ScenarioParams, g_c: CMat, lambda: Vec<f64>, rho: f64) -> Result<Self> {
        if g_c.cols() != lambda.len() {
            return Err(Error::Dimension("lambda length differs from user count".into()));
        }
        let g = realify(&g_c);
        let gram = build_gram(&g, &lambda, params, rho)?;
        let sqrt: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
        let h_c = g_c.scale_columns(&sqrt);
        let lambda_sqrt: Vec<f64> = sqrt.iter().chain(&sqrt).copied().collect();
        let h = Mat::from_fn(g.rows(), g.cols(), |r, c| g[(r, c)] * lambda_sqrt[c]);
        Ok(ChannelRealization { g_c, lambda, h_c, g, lambda_sqrt, h, gram, rho })
    }

    pub fn users(&self) -> usize {
        self.lambda.len()
    }

    pub fn antennas(&self) -> usize {
        self.g_c.rows()
    }

    /// The Q matrix diagonal matching a detector.
    pub fn q(&self, mmse: bool) -> &[f64] {
        if mmse {
            &self.gram.q_mmse
        } else {
            &self.gram.q_zf
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: usize, k: usize) -> ScenarioParams {
        ScenarioParams { antennas: r, users: k, ..Default::default() }
    }

    fn random_cmat(s: &mut RngStream, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| Complex64::new(s.gaussian(), s.gaussian()))
    }

    #[test]
    fn ssfc_shape() {
        let p = params(64, 4);
        let g = draw_ssfc(&p, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!((g.rows(), g.cols()), (64, 4));
        let gr = realify(&g);
        assert_eq!((gr.rows(), gr.cols()), (128, 8));
    }

    #[test]
    fn ssfc_rejects_zero_sigma() {
        let p = ScenarioParams { sigma_g: 0.0, ..params(4, 2) };
        assert!(draw_ssfc(&p, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn ssfc_per_dimension_variance() {
        // 10^5 complex entries at σg² = 0.5
        let p = ScenarioParams { sigma_g: 0.5f64.sqrt(), ..params(1000, 100) };
        let g = draw_ssfc(&p, &mut RngStream::new(3, 0)).unwrap();
        let n = (g.rows() * g.cols()) as f64;
        let mut re2 = 0.0;
        let mut im2 = 0.0;
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                re2 += g.get(r, c).re.powi(2);
                im2 += g.get(r, c).im.powi(2);
            }
        }
        assert!((re2 / n - 0.5).abs() < 0.01, "{}", re2 / n);
        assert!((im2 / n - 0.5).abs() < 0.01, "{}", im2 / n);
    }

    #[test]
    fn pathloss_at_100m() {
        let p = ScenarioParams::default();
        assert!((p.pathloss_db(100.0) - 113.66).abs() < 1e-12);
        let expected = 10f64.powf(-11.366);
        assert!((p.lambda_at(100.0) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_distances_give_equal_lambda() {
        let p = ScenarioParams::default();
        let l: Vec<f64> = [40.0; 4].iter().map(|&d| p.lambda_at(d)).collect();
        assert!(l.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn placement_within_cell_and_min_distance() {
        let p = ScenarioParams { users: 2000, antennas: 2000, ..Default::default() };
        let d = draw_distances(&p, &mut RngStream::new(11, 0));
        assert!(d.iter().all(|&x| (1.0..=150.0).contains(&x)));
        // area-uniform: P(d < R/2) = 1/4
        let inner = d.iter().filter(|&&x| x < 75.0).count() as f64 / d.len() as f64;
        assert!((inner - 0.25).abs() < 0.03, "{inner}");
        let lam = place_uts(&p, &mut RngStream::new(11, 0)).unwrap();
        assert!(lam.iter().zip(&d).all(|(l, &x)| *l == p.lambda_at(x)));
    }

    #[test]
    fn noise_power_for_25mhz() {
        let p = ScenarioParams::default();
        let dbm = 10.0 * p.noise_power_mw().log10();
        assert!((dbm - (-174.0 + 10.0 * 25e6f64.log10() + 7.0)).abs() < 1e-9);
    }

    #[test]
    fn realify_real_only_is_block_diagonal() {
        let m = CMat::from_fn(3, 2, |r, c| Complex64::new((r * 2 + c) as f64 + 1.0, 0.0));
        let r = realify(&m);
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(r[(i, j)], m.get(i, j).re);
                assert_eq!(r[(i + 3, j + 2)], m.get(i, j).re);
                assert_eq!(r[(i, j + 2)], 0.0);
                assert_eq!(r[(i + 3, j)], 0.0);
            }
        }
    }

    #[test]
    fn realify_of_i_times_identity() {
        let m = CMat::from_fn(2, 2, |r, c| if r == c { Complex64::i() } else { Complex64::new(0.0, 0.0) });
        let expected = Mat::from_rows(&[
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        assert_eq!(realify(&m), expected);
    }

    #[test]
    fn realify_matches_complex_product() {
        let mut s = RngStream::new(5, 0);
        let h = random_cmat(&mut s, 6, 3);
        let x: Vec<Complex64> = (0..3).map(|_| Complex64::new(s.gaussian(), s.gaussian())).collect();
        let lhs = realify(&h).matvec(&stack(&x));
        let rhs = stack(&h.matvec(&x));
        assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn realify_is_a_ring_homomorphism() {
        let mut s = RngStream::new(6, 0);
        let a = random_cmat(&mut s, 4, 3);
        let b = random_cmat(&mut s, 3, 5);
        let c = random_cmat(&mut s, 4, 3);
        let prod = realify(&a.matmul(&b)).sub(&realify(&a).matmul(&realify(&b)));
        assert!(prod.max_abs() < 1e-12);
        let sum = realify(&a.add(&c)).sub(&realify(&a).add(&realify(&c)));
        assert!(sum.max_abs() < 1e-15);
    }

    #[test]
    fn scalar_gram_case() {
        let p = ScenarioParams { sigma_g: 0.5f64.sqrt(), ..params(1, 1) };
        let g = realify(&CMat::from_fn(1, 1, |_, _| Complex64::new(1.0, 0.0)));
        let gram = build_gram(&g, &[1.0], &p, 0.0).unwrap();
        assert!(gram.w.sub(&Mat::identity(2)).max_abs() < 1e-15);
        assert!(gram.x.max_abs() < 1e-15);
    }

    #[test]
    fn gram_rejects_non_positive_lambda() {
        let p = params(2, 2);
        let g = Mat::identity(4);
        assert!(matches!(
            build_gram(&g, &[1.0, 0.0], &p, 0.1),
            Err(Error::NonPositiveLambda { index: 1, .. })
        ));
    }

    #[test]
    fn realization_invariants() {
        let p = ScenarioParams::default();
        let mut s = RngStream::new(8, 0);
        for _ in 0..20 {
            let g_c = draw_ssfc(&p, &mut s).unwrap();
            let lambda = place_uts(&p, &mut s).unwrap();
            let rho = 1e-3;
            let ch = ChannelRealization::new(&p, g_c.clone(), lambda.clone(), rho).unwrap();

            // H = GΛ
            let gl = ch.g.matmul(&Mat::diag(&ch.lambda_sqrt));
            assert!(ch.h.sub(&gl).max_abs() <= 1e-12 * ch.h.max_abs());
            assert!(ch.h.sub(&realify(&ch.h_c)).max_abs() <= 1e-12 * ch.h.max_abs());

            // W symmetric, block form from the complex Gram matrix
            let w = &ch.gram.w;
            let k = p.users;
            let wc = g_c.gram();
            for i in 0..k {
                for j in 0..k {
                    let tol = 1e-12 * w.max_abs();
                    assert!((w[(i, j)] - w[(j, i)]).abs() <= tol);
                    assert!((w[(i, j)] - w[(i + k, j + k)]).abs() <= tol);
                    assert!((w[(i, j + k)] + w[(i + k, j)]).abs() <= tol);
                    assert!((w[(i, j)] - wc.get(i, j).re).abs() <= tol);
                    assert!((w[(i + k, j)] - wc.get(i, j).im).abs() <= tol);
                }
                assert!(wc.get(i, i).im.abs() <= 1e-12 * w.max_abs());
            }

            // X = W − 2Rσg² I, Q and P
            for i in 0..2 * k {
                for j in 0..2 * k {
                    let expect = w[(i, j)] - if i == j { p.gram_mean() } else { 0.0 };
                    assert_eq!(ch.gram.x[(i, j)], expect);
                }
                assert_eq!(ch.gram.q_zf[i], p.gram_mean());
                assert_eq!(ch.gram.p[i], rho / lambda[i % k]);
                assert_eq!(ch.gram.q_mmse[i], ch.gram.q_zf[i] + ch.gram.p[i]);
            }

            // HᵀH = Λ GᵀG Λ
            let hth = ch.h.t_matmul(&ch.h);
            let lgl = Mat::diag(&ch.lambda_sqrt).matmul(w).matmul(&Mat::diag(&ch.lambda_sqrt));
            assert!(hth.sub(&lgl).max_abs() <= 1e-10 * hth.max_abs());
        }
    }

    #[test]
    fn gram_entries_match_brute_force() {
        let p = params(16, 3);
        let g = realify(&draw_ssfc(&p, &mut RngStream::new(2, 0)).unwrap());
        let gram = build_gram(&g, &[1.0; 3], &p, 0.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let brute: f64 = (0..32).map(|r| g[(r, i)] * g[(r, j)]).sum();
                assert!((gram.w[(i, j)] - brute).abs() <= 1e-12 * brute.abs().max(1.0));
            }
        }
    }

    #[test]
    fn off_diagonal_gram_means_vanish() {
        let p = params(64, 4);
        let mut s = RngStream::new(13, 0);
        let draws = 2000;
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..draws {
            let wc = draw_ssfc(&p, &mut s).unwrap().gram();
            re += wc.get(0, 1).re;
            im += wc.get(0, 1).im;
        }
        // off-diagonal std is sqrt(2R)σg² = 5.66; 5 standard errors of the mean
        let tol = 5.0 * 5.66 / (draws as f64).sqrt();
        assert!((re / draws as f64).abs() < tol);
        assert!((im / draws as f64).abs() < tol);
    }
}
