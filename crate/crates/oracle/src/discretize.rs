use nalgebra::{Complex, Matrix4, SMatrix, SVector, SymmetricEigen};
use optoforce_core::dynamics::scaled_drift_matrix;
use optoforce_core::LinearModel;

pub(crate) type Mat5 = SMatrix<f64, 5, 5>;
pub(crate) type Vec5 = SVector<f64, 5>;

/// Exact one-step map for the state (q, P, X, Y, I) in zero-point units,
/// where I is the homodyne output integrated over the step (reset each
/// step, so its column of `phi` is unused).
#[derive(Debug, Clone)]
pub struct Discretization {
    pub dt: f64,
    pub phi: Mat5,
    /// Covariance of the one-step noise increment.
    pub covariance: Mat5,
    /// Square root of `covariance` (L·Lᵀ = covariance).
    pub noise_root: Mat5,
}

fn augmented_drift(model: &LinearModel, theta: f64) -> Mat5 {
    let a = scaled_drift_matrix(model);
    let mut m = Mat5::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = a[i][j];
        }
    }
    let port = (2.0 * model.kappa).sqrt();
    m[(4, 2)] = port * theta.sin();
    m[(4, 3)] = port * theta.cos();
    m
}

/// Diffusion matrix of (F, X_in, Y_in) mapped onto the augmented state.
fn diffusion(model: &LinearModel, theta: f64) -> Mat5 {
    // B maps (F, X_in, Y_in) with intensities (2γ n_th, ½, ½)
    let port = (2.0 * model.kappa).sqrt();
    let mut b = SMatrix::<f64, 5, 3>::zeros();
    b[(1, 0)] = 1.0;
    b[(2, 1)] = port;
    b[(3, 2)] = port;
    b[(4, 1)] = -theta.sin();
    b[(4, 2)] = -theta.cos();
    let n_th = optoforce_core::params::constants::K_B * model.temperature
        / (optoforce_core::params::constants::HBAR * model.omega_m);
    let q = SMatrix::<f64, 3, 3>::from_diagonal(&nalgebra::Vector3::new(2.0 * model.gamma * n_th, 0.5, 0.5));
    b * q * b.transpose()
}

impl Discretization {
    /// Van Loan: exp([[-A, D], [0, Aᵀ]]·dt) gives Φ and the increment
    /// covariance without truncation error.
    pub fn new(model: &LinearModel, theta: f64, dt: f64) -> Self {
        let a = augmented_drift(model, theta);
        let d = diffusion(model, theta);
        let mut big = SMatrix::<f64, 10, 10>::zeros();
        big.fixed_view_mut::<5, 5>(0, 0).copy_from(&(-a * dt));
        big.fixed_view_mut::<5, 5>(0, 5).copy_from(&(d * dt));
        big.fixed_view_mut::<5, 5>(5, 5).copy_from(&(a.transpose() * dt));
        let e = big.exp();
        let phi = e.fixed_view::<5, 5>(5, 5).transpose();
        let mut covariance = phi * e.fixed_view::<5, 5>(0, 5);
        covariance = (covariance + covariance.transpose()) * 0.5;
        let eig = SymmetricEigen::new(covariance);
        let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let noise_root = eig.eigenvectors * Mat5::from_diagonal(&sqrt_vals);
        Self {
            dt,
            phi,
            covariance,
            noise_root,
        }
    }

    #[inline]
    pub(crate) fn step(&self, state: &Vec5, normals: &Vec5) -> Vec5 {
        let mut s = *state;
        s[4] = 0.0;
        self.phi * s + self.noise_root * normals
    }
}

/// Exact two-sided PSD of the sampled record S_k = I_k/dt produced by the
/// integrator, evaluated at angular frequency `omega` (no statistics
/// involved). Differs from the continuous-time spectrum only by the
/// step average and aliasing.
pub fn discrete_homodyne_psd(disc: &Discretization, omega: f64) -> f64 {
    let z = Complex::from_polar(1.0, omega * disc.dt);
    let phi_ss: Matrix4<f64> = disc.phi.fixed_view::<4, 4>(0, 0).into_owned();
    let mut m = Matrix4::<Complex<f64>>::identity() * z;
    m -= phi_ss.map(|v| Complex::new(v, 0.0));
    let h = m.try_inverse().expect("unit circle hit an eigenvalue of the step map");
    let row = disc.phi.fixed_view::<1, 4>(4, 0).map(|v| Complex::new(v, 0.0)) * h;
    let t = SMatrix::<Complex<f64>, 1, 5>::from_iterator(
        row.iter().copied().chain(std::iter::once(Complex::new(1.0, 0.0))),
    );
    let q = disc.covariance.map(|v| Complex::new(v, 0.0));
    let v = t * q * t.adjoint();
    v[(0, 0)].re / disc.dt
}
