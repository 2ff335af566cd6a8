//! Action of a matrix exponential on a vector, `exp(tA) v`, by restarted
//! Krylov projection with a posteriori local error control (the scheme used
//! by Expokit's `expv`).

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};

/// Matrix-free linear operator.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[T], y: &mut [T]);

    /// Any upper bound on an induced norm of `A`; only used to pick the first
    /// step size.
    fn norm_bound(&self) -> f64;
}

#[derive(Copy, Clone, Debug)]
pub struct KrylovOptions {
    /// Local error tolerance per unit time, relative to `‖v‖`.
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-10,
            krylov_dim: 30,
            max_steps: 100_000,
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub steps: usize,
    pub rejected: usize,
    pub matvecs: usize,
    /// Sum of the accepted local error estimates.
    pub error_estimate: f64,
}

const MAX_REJECTIONS: usize = 20;

fn norm<T: ComplexField<RealField = f64> + Copy>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

fn round_step(x: f64) -> f64 {
    // two significant digits, rounded up
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let s = 10f64.powf(x.log10().floor() - 1.0);
    (x / s).ceil() * s
}

/// `exp(tA) v` for `t ≥ 0`.
pub fn expmv<T, A>(op: &A, t: f64, v: &[T], opts: &KrylovOptions) -> Result<(Vec<T>, KrylovStats)>
where
    T: ComplexField<RealField = f64> + Copy,
    A: LinearOperator<T> + ?Sized,
{
    let n = op.dim();
    assert_eq!(v.len(), n, "vector length does not match operator");
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
    }
    let mut stats = KrylovStats::default();
    let mut w = v.to_vec();
    let vnorm = norm(v);
    if t == 0.0 || vnorm == 0.0 {
        return Ok((w, stats));
    }

    let m = opts.krylov_dim.min(n).max(1);
    let tol = opts.tol * vnorm;
    let anorm = op.norm_bound().max(f64::MIN_POSITIVE);
    let btol = 1e-7_f64.min(opts.tol) * anorm * vnorm;
    let gamma = 0.9;
    let delta = 1.2;

    let mut t_now = 0.0;
    let mf = m as f64;
    let fact = ((mf + 1.0) / std::f64::consts::E).powf(mf + 1.0)
        * (2.0 * std::f64::consts::PI * (mf + 1.0)).sqrt();
    let mut t_new = (1.0 / anorm) * ((fact * tol) / (4.0 * vnorm * anorm)).powf(1.0 / mf);
    t_new = round_step(t_new).min(t);

    let mut basis: Vec<Vec<T>> = (0..=m).map(|_| vec![T::zero(); n]).collect();
    let mut p = vec![T::zero(); n];

    while t_now < t {
        stats.steps += 1;
        if stats.steps > opts.max_steps {
            return Err(Error::NonConvergence(format!(
                "exceeded {} steps at t = {t_now:e} of {t:e} ({} rejected, {} matvecs)",
                opts.max_steps, stats.rejected, stats.matvecs
            )));
        }
        let mut t_step = (t - t_now).min(t_new);
        let beta = norm(&w);
        if beta == 0.0 {
            break;
        }
        let inv = T::from_real(1.0 / beta);
        for (b, x) in basis[0].iter_mut().zip(&w) {
            *b = *x * inv;
        }
        let mut h = DMatrix::<T>::zeros(m + 2, m + 2);
        let mut mb = m;
        let mut k1 = 2usize;
        for j in 0..m {
            op.apply(&basis[j], &mut p);
            stats.matvecs += 1;
            for _pass in 0..2 {
                for i in 0..=j {
                    let hij = basis[i]
                        .iter()
                        .zip(&p)
                        .fold(T::zero(), |acc, (a, b)| acc + a.conjugate() * *b);
                    for (x, b) in p.iter_mut().zip(&basis[i]) {
                        *x -= hij * *b;
                    }
                    h[(i, j)] += hij;
                }
            }
            let s = norm(&p);
            if s < btol {
                k1 = 0;
                mb = j + 1;
                t_step = t - t_now;
                break;
            }
            h[(j + 1, j)] = T::from_real(s);
            let inv = T::from_real(1.0 / s);
            for (b, x) in basis[j + 1].iter_mut().zip(&p) {
                *b = *x * inv;
            }
        }
        let mut avnorm = 0.0;
        if k1 != 0 {
            h[(m + 1, m)] = T::one();
            op.apply(&basis[m], &mut p);
            stats.matvecs += 1;
            avnorm = norm(&p);
        }

        let mut rejections = 0;
        let (f, err_loc, xm) = loop {
            let mx = mb + k1;
            let sub = h.view((0, 0), (mx, mx)).into_owned() * T::from_real(t_step);
            let f = sub.exp();
            if k1 == 0 {
                break (f, btol, 1.0 / mf);
            }
            let p1 = f[(m, 0)].modulus() * beta;
            let p2 = f[(m + 1, 0)].modulus() * beta * avnorm;
            let (err, xm) = if p1 > 10.0 * p2 {
                (p2, 1.0 / mf)
            } else if p1 > p2 {
                (p1 * p2 / (p1 - p2), 1.0 / mf)
            } else {
                (p1, 1.0 / (mf - 1.0).max(1.0))
            };
            if err <= delta * t_step * tol {
                break (f, err, xm);
            }
            rejections += 1;
            stats.rejected += 1;
            if rejections > MAX_REJECTIONS {
                return Err(Error::NonConvergence(format!(
                    "step size collapsed to {t_step:e} at t = {t_now:e}: local error {err:e} > {:e}",
                    delta * t_step * tol
                )));
            }
            t_step = round_step(gamma * t_step * (t_step * tol / err).powf(xm));
        };

        let mx = mb + k1.saturating_sub(1);
        w.iter_mut().for_each(|x| *x = T::zero());
        for (i, b) in basis.iter().enumerate().take(mx) {
            let c = f[(i, 0)] * T::from_real(beta);
            for (x, y) in w.iter_mut().zip(b) {
                *x += c * *y;
            }
        }
        t_now += t_step;
        stats.error_estimate += err_loc;
        if k1 != 0 {
            t_new = round_step(gamma * t_step * (t_step * tol / err_loc.max(f64::MIN_POSITIVE)).powf(xm));
        } else {
            t_new = t - t_now;
        }
        if t - t_now < 1e-15 * t {
            break;
        }
    }
    Ok((w, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use num_complex::Complex64;

    struct Dense<T: ComplexField>(DMatrix<T>);

    impl<T: ComplexField<RealField = f64> + Copy> LinearOperator<T> for Dense<T> {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[T], y: &mut [T]) {
            let r = &self.0 * DVector::from_column_slice(x);
            y.copy_from_slice(r.as_slice());
        }
        fn norm_bound(&self) -> f64 {
            self.0.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
        }
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn matches_dense_exponential_real() {
        let n = 60;
        let mut seed = 7;
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| lcg(&mut seed));
        let v: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
        let op = Dense(a.clone());
        for t in [0.0, 0.3, 2.0, 7.5] {
            let (w, _) = expmv(&op, t, &v, &KrylovOptions::default()).unwrap();
            let exact = (a.clone() * t).exp() * DVector::from_column_slice(&v);
            let err = (DVector::from_column_slice(&w) - &exact).norm() / exact.norm().max(1.0);
            assert!(err < 1e-9, "t={t}: {err}");
        }
    }

    #[test]
    fn matches_dense_exponential_complex_stiff() {
        let n = 40;
        let mut seed = 11;
        // skew part plus a spread of decay rates
        let a = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let re = if i == j { -(i as f64) * 0.5 } else { 0.1 * lcg(&mut seed) };
            Complex64::new(re, 2.0 * lcg(&mut seed))
        });
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(lcg(&mut seed), lcg(&mut seed))).collect();
        let op = Dense(a.clone());
        for t in [0.1, 1.0, 10.0] {
            let (w, _) = expmv(&op, t, &v, &KrylovOptions::default()).unwrap();
            let exact = (a.clone() * Complex64::new(t, 0.0)).exp() * DVector::from_column_slice(&v);
            let diff = (DVector::from_column_slice(&w) - &exact).norm();
            assert!(diff < 1e-9 * DVector::from_column_slice(&v).norm(), "t={t}: {diff}");
        }
    }

    #[test]
    fn small_invariant_subspace_breaks_down_happily() {
        let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0, -3.0, -4.0]));
        let v = vec![1.0, 0.0, 0.0, 0.0];
        let (w, stats) = expmv(&Dense(a), 2.0, &v, &KrylovOptions::default()).unwrap();
        assert!((w[0] - (-2.0f64).exp()).abs() < 1e-13);
        assert_eq!(stats.steps, 1);
    }

    #[test]
    fn negative_time_is_rejected() {
        let a = DMatrix::<f64>::identity(2, 2);
        assert!(expmv(&Dense(a), -1.0, &[1.0, 0.0], &KrylovOptions::default()).is_err());
    }
}
