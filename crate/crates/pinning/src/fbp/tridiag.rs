use crate::scalar::Real;

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[0]` and `upper[n-1]` are ignored. `rhs` is overwritten by the
/// solution; `upper` is used as scratch.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &mut [T], rhs: &mut [T]) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return;
    }
    let mut beta = diag[0];
    upper[0] = upper[0] / beta;
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * upper[i - 1];
        if i + 1 < n {
            upper[i] = upper[i] / beta;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - upper[i] * rhs[i + 1];
    }
}

/// One θ-step of `u_t = u_yy / w² + u_y (a + b y) / w` on `y ∈ [0, 1]`,
/// the heat equation on `[l(t), l(t) + w(t)]` written in the front-fixed
/// coordinate `y = (x - l) / w`, with `a = l'` and `b = w'` constant over
/// the step. Dirichlet data are `(left, right)` at the new time level.
pub(crate) struct MappedStep<T> {
    pub w_old: T,
    pub w_new: T,
    pub l_dot: T,
    pub w_dot: T,
    pub dt: T,
    pub theta: T,
    pub left: T,
    pub right: T,
}

impl<T: Real> MappedStep<T> {
    pub fn apply(&self, u: &[T], out: &mut Vec<T>, scratch: &mut Scratch<T>) {
        let n = u.len() - 1;
        let dy = T::one() / T::from_count(n);
        let half = T::lit(0.5);
        let m = n - 1;
        scratch.resize(m);
        let th = self.theta;
        let ex = T::one() - th;
        let d_old = T::one() / (self.w_old * self.w_old * dy * dy);
        let d_new = T::one() / (self.w_new * self.w_new * dy * dy);
        for j in 1..n {
            let y = T::from_count(j) * dy;
            let drift = self.l_dot + y * self.w_dot;
            let c_old = drift / self.w_old * half / dy;
            let c_new = drift / self.w_new * half / dy;
            let lap = u[j + 1] - (u[j] + u[j]) + u[j - 1];
            let grad = u[j + 1] - u[j - 1];
            let k = j - 1;
            scratch.rhs[k] = u[j] + ex * self.dt * (d_old * lap + c_old * grad);
            scratch.lower[k] = -th * self.dt * (d_new - c_new);
            scratch.diag[k] = T::one() + th * self.dt * (d_new + d_new);
            scratch.upper[k] = -th * self.dt * (d_new + c_new);
        }
        scratch.rhs[0] = scratch.rhs[0] - scratch.lower[0] * self.left;
        scratch.rhs[m - 1] = scratch.rhs[m - 1] - scratch.upper[m - 1] * self.right;
        solve_tridiagonal(&scratch.lower, &scratch.diag, &mut scratch.upper, &mut scratch.rhs);
        out.clear();
        out.push(self.left);
        out.extend_from_slice(&scratch.rhs[..m]);
        out.push(self.right);
    }
}

#[derive(Default)]
pub(crate) struct Scratch<T> {
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
    rhs: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn resize(&mut self, m: usize) {
        for v in [&mut self.lower, &mut self.diag, &mut self.upper, &mut self.rhs] {
            v.resize(m, T::zero());
        }
    }
}
