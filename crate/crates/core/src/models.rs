//! Input-affine agent dynamics `ẋ = f(x) + g(x)u` with a scalar input and
//! the coupling primitive `α`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::riccati::{solve_ari, LinearDesign};

/// Scalar feedback primitive `α : ℝⁿ → ℝ`.
#[derive(Clone)]
pub enum Feedback {
    /// `α(x) = K x`.
    Linear(Vec<f64>),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Feedback {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Feedback::Linear(k) => k.iter().zip(x).map(|(a, b)| a * b).sum(),
            Feedback::Custom(f) => f(x),
        }
    }

    /// `α(x) = Kx` from a `1×n` gain.
    pub fn from_gain(k: &Matrix, n: usize) -> Result<Self> {
        if k.shape() != (1, n) {
            return Err(Error::DimensionMismatch(format!(
                "gain is {}x{}, expected 1x{n}",
                k.rows(),
                k.cols()
            )));
        }
        Ok(Feedback::Linear(k.row_slice(0).to_vec()))
    }
}

impl fmt::Debug for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Linear(k) => f.debug_tuple("Linear").field(k).finish(),
            Feedback::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Dynamics of one agent. Implementations are pure and thread-safe.
pub trait AgentModel: Send + Sync {
    fn name(&self) -> &str;

    fn state_dim(&self) -> usize;

    /// Writes `f(x)` into `out`.
    fn drift(&self, x: &[f64], out: &mut [f64]);

    /// Writes `g(x)` into `out`.
    fn input_field(&self, x: &[f64], out: &mut [f64]);

    /// `α(x)`.
    fn feedback(&self, x: &[f64]) -> f64;

    fn drift_jacobian(&self, x: &[f64]) -> Matrix;

    fn input_jacobian(&self, x: &[f64]) -> Matrix;

    /// Named scalar parameters, for reports.
    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn f(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.drift(x, &mut out);
        out
    }

    fn g(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.input_field(x, &mut out);
        out
    }
}

fn check_linear(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", a.rows(), a.cols())));
    }
    if b.shape() != (a.rows(), 1) {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, expected {}x1 (scalar input)",
            b.rows(),
            b.cols(),
            a.rows()
        )));
    }
    Ok(b.col_vec(0))
}

/// `ẋ = Ax + Bu`, `α(x) = Kx`.
#[derive(Debug, Clone)]
pub struct LinearAgent {
    a: Matrix,
    b: Vec<f64>,
    feedback: Feedback,
}

impl LinearAgent {
    pub fn new(a: Matrix, b: Matrix, k: Matrix) -> Result<Self> {
        let b = check_linear(&a, &b)?;
        let feedback = Feedback::from_gain(&k, a.rows())?;
        Ok(Self { a, b, feedback })
    }

    pub fn from_design(design: &LinearDesign) -> Result<Self> {
        Self::new(design.a.clone(), design.b.clone(), design.gain.clone())
    }
}

impl AgentModel for LinearAgent {
    fn name(&self) -> &str {
        "linear"
    }

    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.a.row_slice(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn input_field(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
    }

    fn feedback(&self, x: &[f64]) -> f64 {
        self.feedback.eval(x)
    }

    fn drift_jacobian(&self, _x: &[f64]) -> Matrix {
        self.a.clone()
    }

    fn input_jacobian(&self, _x: &[f64]) -> Matrix {
        Matrix::zeros(self.a.rows(), self.a.rows())
    }
}

/// `ẋ = Ax + γ·tanh(x) + Bu` (componentwise `tanh`), `α(x) = Kx`.
///
/// The input field is constant and `∂f/∂x = A + γ·diag(sech²(xᵢ))` stays
/// within `γ` of `A`, so a Riccati certificate for `(A, B)` with enough
/// slack certifies the whole model.
#[derive(Debug, Clone)]
pub struct TanhAgent {
    linear: LinearAgent,
    gamma: f64,
}

impl TanhAgent {
    pub fn new(a: Matrix, b: Matrix, gamma: f64, k: Matrix) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma = {gamma} must be nonnegative")));
        }
        Ok(Self {
            linear: LinearAgent::new(a, b, k)?,
            gamma,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl AgentModel for TanhAgent {
    fn name(&self) -> &str {
        "tanh"
    }

    fn state_dim(&self) -> usize {
        self.linear.state_dim()
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        self.linear.drift(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.gamma * xi.tanh();
        }
    }

    fn input_field(&self, x: &[f64], out: &mut [f64]) {
        self.linear.input_field(x, out);
    }

    fn feedback(&self, x: &[f64]) -> f64 {
        self.linear.feedback(x)
    }

    fn drift_jacobian(&self, x: &[f64]) -> Matrix {
        let mut j = self.linear.a.clone();
        for (i, xi) in x.iter().enumerate() {
            let sech = 1.0 / xi.cosh();
            j[(i, i)] += self.gamma * sech * sech;
        }
        j
    }

    fn input_jacobian(&self, x: &[f64]) -> Matrix {
        self.linear.input_jacobian(x)
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("gamma".into(), self.gamma)]
    }
}

/// Lorenz-type parameters as they enter
/// `f(x) = (a(x₂−x₁), x₁(b−x₃)−x₂, x₁x₂−cx₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LorenzParams {
    /// `a = 10, b = 8/3, c = 28`, taken literally.
    pub const LITERAL: Self = Self {
        a: 10.0,
        b: 8.0 / 3.0,
        c: 28.0,
    };

    /// `a = 10, b = 28, c = 8/3`: the chaotic regime for this placement of
    /// `b` and `c`.
    pub const CHAOTIC: Self = Self {
        a: 10.0,
        b: 28.0,
        c: 8.0 / 3.0,
    };
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self::LITERAL
    }
}

/// Lorenz agent with input field `g(x) = (1, 2 + sin x₁, 0)`.
#[derive(Debug, Clone)]
pub struct LorenzAgent {
    params: LorenzParams,
    feedback: Feedback,
}

impl LorenzAgent {
    pub fn new(params: LorenzParams, feedback: Feedback) -> Self {
        Self { params, feedback }
    }

    pub fn params(&self) -> LorenzParams {
        self.params
    }

    /// Drift Jacobian at the origin.
    pub fn linearization(params: LorenzParams) -> Matrix {
        let LorenzParams { a, b, c } = params;
        Matrix::from_rows(&[[-a, a, 0.0], [b, -1.0, 0.0], [0.0, 0.0, -c]]).expect("3x3")
    }
}

impl AgentModel for LorenzAgent {
    fn name(&self) -> &str {
        "lorenz"
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        let LorenzParams { a, b, c } = self.params;
        out[0] = a * (x[1] - x[0]);
        out[1] = x[0] * (b - x[2]) - x[1];
        out[2] = x[0] * x[1] - c * x[2];
    }

    fn input_field(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        out[1] = 2.0 + x[0].sin();
        out[2] = 0.0;
    }

    fn feedback(&self, x: &[f64]) -> f64 {
        self.feedback.eval(x)
    }

    fn drift_jacobian(&self, x: &[f64]) -> Matrix {
        let LorenzParams { a, b, c } = self.params;
        Matrix::from_rows(&[
            [-a, a, 0.0],
            [b - x[2], -1.0, -x[0]],
            [x[1], x[0], -c],
        ])
        .expect("3x3")
    }

    fn input_jacobian(&self, x: &[f64]) -> Matrix {
        let mut j = Matrix::zeros(3, 3);
        j[(1, 0)] = x[0].cos();
        j
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("a".into(), self.params.a),
            ("b".into(), self.params.b),
            ("c".into(), self.params.c),
        ]
    }
}

/// Input field of the Lorenz agent frozen at the origin.
pub fn lorenz_input_at_origin() -> Matrix {
    Matrix::column(&[1.0, 2.0, 0.0]).expect("3x1")
}

/// Linear feedback for the Lorenz agent from a Riccati design on the
/// linearization at the origin, with `g` frozen at `(1, 2, 0)`.
///
/// The returned certificate is flagged approximate: it is exact only for
/// the linearized, frozen-input system.
pub fn default_lorenz_alpha(params: LorenzParams, rho: f64, mu: f64) -> Result<LinearDesign> {
    let a = LorenzAgent::linearization(params);
    let b = lorenz_input_at_origin();
    let mut design = solve_ari(&a, &b, rho, mu)?;
    design.certificate = design.certificate.mark_approximate();
    Ok(design)
}

/// Lorenz agent wired with [`default_lorenz_alpha`].
pub fn lorenz_with_default_alpha(
    params: LorenzParams,
    rho: f64,
    mu: f64,
) -> Result<(LorenzAgent, LinearDesign)> {
    let design = default_lorenz_alpha(params, rho, mu)?;
    let feedback = Feedback::from_gain(&design.gain, 3)?;
    Ok((LorenzAgent::new(params, feedback), design))
}

/// A point on the uncontrolled attractor: the free drift integrated from
/// `(1, 1, 1)` for 10 time units with RK4, step `1e-3`.
pub fn lorenz_attractor_point(params: LorenzParams) -> [f64; 3] {
    let agent = LorenzAgent::new(params, Feedback::Linear(vec![0.0; 3]));
    let h = 1e-3;
    let mut x = [1.0, 1.0, 1.0];
    let f = |x: &[f64; 3]| {
        let mut out = [0.0; 3];
        agent.drift(x, &mut out);
        out
    };
    let add = |x: &[f64; 3], k: &[f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
    for _ in 0..10_000 {
        let k1 = f(&x);
        let k2 = f(&add(&x, &k1, h / 2.0));
        let k3 = f(&add(&x, &k2, h / 2.0));
        let k4 = f(&add(&x, &k3, h));
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}
