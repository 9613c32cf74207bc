//! Homogeneous self-dual interior-point method with Mehrotra
//! predictor-corrector steps.
//!
//! Works on the canonical form
//!
//! ```text
//! minimize c^T x   s.t.   G x + s = h,  s >= 0,   A x = b
//! ```
//!
//! with dual `maximize -h^T z - b^T y  s.t.  G^T z + A^T y + c = 0, z >= 0`.
//! The Newton systems reduce to
//!
//! ```text
//! [ G^T D G   A^T ] [dx]   [r1]
//! [ A         0   ] [dy] = [r2]         D = diag(z / s)
//! ```
//!
//! which a [`KktSystem`] factors and solves; everything else is generic.

use alloc::vec;
use alloc::vec::Vec;

use super::LpStatus;
use crate::math::{dot, norm_inf};

/// Problem data and Newton-system solver for the interior-point iteration.
pub(crate) trait KktSystem {
    fn num_vars(&self) -> usize;
    fn num_ineq(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn c(&self) -> &[f64];
    fn h(&self) -> &[f64];
    fn b(&self) -> &[f64];
    /// `out = G x`
    fn mul_g(&self, x: &[f64], out: &mut [f64]);
    /// `out = G^T z`
    fn mul_gt(&self, z: &[f64], out: &mut [f64]);
    /// `out = A x`
    fn mul_a(&self, x: &[f64], out: &mut [f64]);
    /// `out = A^T y`
    fn mul_at(&self, y: &[f64], out: &mut [f64]);
    /// Factors the reduced system for row weights `d > 0`.
    fn factor(&mut self, d: &[f64]) -> Result<(), Breakdown>;
    /// Overwrites `(r1, r2)` with an approximate solution `(dx, dy)`.
    fn solve(&self, r1: &mut [f64], r2: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Breakdown;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IpmOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub iter_limit: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { feas_tol: 1e-8, gap_tol: 1e-8, iter_limit: 200 }
    }
}

/// Iterate returned by [`solve`].
///
/// * `Optimal`: `x, s` primal and `y, z` dual solutions.
/// * `Infeasible`: `(y, z)` satisfies `G^T z + A^T y ~ 0`, `z >= 0`,
///   `-h^T z - b^T y = 1`.
/// * `Unbounded`: `x` satisfies `A x ~ 0`, `G x <= 0`, `c^T x = -1`.
#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub pobj: f64,
    pub dobj: f64,
    pub iterations: usize,
}

struct Workspace<'a, K: KktSystem> {
    kkt: &'a mut K,
    d: Vec<f64>,
}

impl<K: KktSystem> Workspace<'_, K> {
    fn mul_m(&self, x: &[f64], out: &mut [f64]) {
        let mut gx = vec![0.0; self.kkt.num_ineq()];
        self.kkt.mul_g(x, &mut gx);
        for (g, d) in gx.iter_mut().zip(&self.d) {
            *g *= d;
        }
        self.kkt.mul_gt(&gx, out);
    }

    /// Solves `[0 A^T G^T; A 0 0; G 0 -D^{-1}] (dx, dy, dz) = (px, py, pz)`.
    fn solve_full(&self, px: &[f64], py: &[f64], pz: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (nv, m, p) = (self.kkt.num_vars(), self.kkt.num_ineq(), self.kkt.num_eq());
        let dpz: Vec<f64> = pz.iter().zip(&self.d).map(|(a, b)| a * b).collect();
        let mut r1 = vec![0.0; nv];
        self.kkt.mul_gt(&dpz, &mut r1);
        for (a, b) in r1.iter_mut().zip(px) {
            *a += b;
        }
        let r2 = py.to_vec();

        let mut dx = r1.clone();
        let mut dy = r2.clone();
        self.kkt.solve(&mut dx, &mut dy);

        // iterative refinement against the exact operator
        let scale = 1.0 + norm_inf(&r1).max(norm_inf(&r2));
        let mut mx = vec![0.0; nv];
        let mut aty = vec![0.0; nv];
        let mut ax = vec![0.0; p];
        for _ in 0..3 {
            self.mul_m(&dx, &mut mx);
            self.kkt.mul_at(&dy, &mut aty);
            self.kkt.mul_a(&dx, &mut ax);
            let mut e1: Vec<f64> = (0..nv).map(|i| r1[i] - mx[i] - aty[i]).collect();
            let mut e2: Vec<f64> = (0..p).map(|i| r2[i] - ax[i]).collect();
            let err = norm_inf(&e1).max(norm_inf(&e2));
            if err <= 1e-14 * scale {
                break;
            }
            self.kkt.solve(&mut e1, &mut e2);
            for (a, b) in dx.iter_mut().zip(&e1) {
                *a += b;
            }
            for (a, b) in dy.iter_mut().zip(&e2) {
                *a += b;
            }
        }

        let mut gdx = vec![0.0; m];
        self.kkt.mul_g(&dx, &mut gdx);
        let dz = (0..m).map(|i| self.d[i] * (gdx[i] - pz[i])).collect();
        (dx, dy, dz)
    }
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut alpha: f64 = f64::INFINITY;
    for (a, da) in v.iter().zip(dv) {
        if *da < 0.0 {
            alpha = alpha.min(-a / da);
        }
    }
    alpha
}

pub(crate) fn solve<K: KktSystem>(kkt: &mut K, opts: &IpmOptions) -> IpmResult {
    let (nv, m, p) = (kkt.num_vars(), kkt.num_ineq(), kkt.num_eq());
    let c = kkt.c().to_vec();
    let h = kkt.h().to_vec();
    let b = kkt.b().to_vec();
    let (cn, hn, bn) = (1.0 + norm_inf(&c), 1.0 + norm_inf(&h), 1.0 + norm_inf(&b));

    let mut x = vec![0.0; nv];
    let mut y = vec![0.0; p];
    let mut z = vec![1.0; m];
    let mut s = vec![1.0; m];
    let (mut tau, mut kappa) = (1.0_f64, 1.0_f64);

    let mut ws = Workspace { kkt, d: vec![1.0; m] };
    let mut rx = vec![0.0; nv];
    let mut ry = vec![0.0; p];
    let mut rz = vec![0.0; m];
    let mut tmp_n = vec![0.0; nv];
    let mut stalls = 0;

    let mut status = LpStatus::IterationLimit;
    let mut iterations = 0;
    while iterations < opts.iter_limit {
        // residuals of the homogeneous embedding
        ws.kkt.mul_at(&y, &mut rx);
        ws.kkt.mul_gt(&z, &mut tmp_n);
        for i in 0..nv {
            rx[i] += tmp_n[i] + c[i] * tau;
        }
        ws.kkt.mul_a(&x, &mut ry);
        for i in 0..p {
            ry[i] -= b[i] * tau;
        }
        ws.kkt.mul_g(&x, &mut rz);
        for i in 0..m {
            rz[i] += s[i] - h[i] * tau;
        }
        let cx = dot(&c, &x);
        let by = dot(&b, &y);
        let hz = dot(&h, &z);
        let rt = kappa + cx + by + hz;
        let mu = (dot(&s, &z) + tau * kappa) / (m + 1) as f64;

        // termination
        let pobj = cx / tau;
        let dobj = -(by + hz) / tau;
        let pres = (norm_inf(&ry) / bn).max(norm_inf(&rz) / hn) / tau;
        let dres = norm_inf(&rx) / cn / tau;
        let gap = (pobj - dobj).abs();
        if pres <= opts.feas_tol
            && dres <= opts.feas_tol
            && gap <= opts.gap_tol * pobj.abs().min(dobj.abs()).max(1.0)
        {
            status = LpStatus::Optimal;
            break;
        }
        if tau < kappa {
            let dd = -(by + hz);
            if dd > 0.0 {
                // ||A^T y + G^T z|| with the c*tau term removed
                let res = (0..nv).map(|i| (rx[i] - c[i] * tau).abs()).fold(0.0, f64::max);
                if res / dd <= opts.feas_tol {
                    y.iter_mut().for_each(|v| *v /= dd);
                    z.iter_mut().for_each(|v| *v /= dd);
                    status = LpStatus::Infeasible;
                    break;
                }
            }
            if -cx > 0.0 {
                let mut res: f64 = 0.0;
                for i in 0..p {
                    res = res.max((ry[i] + b[i] * tau).abs());
                }
                for i in 0..m {
                    res = res.max(rz[i] + h[i] * tau - s[i]).max(0.0);
                }
                if res / -cx <= opts.feas_tol {
                    let scale = -cx;
                    x.iter_mut().for_each(|v| *v /= scale);
                    status = LpStatus::Unbounded;
                    break;
                }
            }
        }

        for i in 0..m {
            ws.d[i] = z[i] / s[i];
        }
        if ws.kkt.factor(&ws.d).is_err() {
            break;
        }
        iterations += 1;

        // direction for the tau component
        let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
        let (vx, vy, vz) = ws.solve_full(&neg_c, &b, &h);
        let denom = dot(&c, &vx) + dot(&b, &vy) + dot(&h, &vz) - kappa / tau;

        let direction = |eta: f64, rs: &[f64], rk: f64| {
            let px: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
            let py: Vec<f64> = ry.iter().map(|v| -eta * v).collect();
            let pz: Vec<f64> = (0..m).map(|i| -eta * rz[i] - rs[i] / z[i]).collect();
            let (ux, uy, uz) = ws.solve_full(&px, &py, &pz);
            let dtau = (-eta * rt - rk / tau - dot(&c, &ux) - dot(&b, &uy) - dot(&h, &uz)) / denom;
            let dx: Vec<f64> = (0..nv).map(|i| ux[i] + dtau * vx[i]).collect();
            let dy: Vec<f64> = (0..p).map(|i| uy[i] + dtau * vy[i]).collect();
            let dz: Vec<f64> = (0..m).map(|i| uz[i] + dtau * vz[i]).collect();
            let ds: Vec<f64> = (0..m).map(|i| (rs[i] - s[i] * dz[i]) / z[i]).collect();
            let dkappa = (rk - kappa * dtau) / tau;
            (dx, dy, dz, ds, dtau, dkappa)
        };
        let step_len = |dz: &[f64], ds: &[f64], dtau: f64, dkappa: f64| {
            let mut a = max_step(&z, dz).min(max_step(&s, ds));
            if dtau < 0.0 {
                a = a.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-kappa / dkappa);
            }
            a
        };

        // predictor
        let rs_aff: Vec<f64> = (0..m).map(|i| -s[i] * z[i]).collect();
        let (_, _, dz_a, ds_a, dtau_a, dkappa_a) = direction(1.0, &rs_aff, -tau * kappa);
        let alpha_a = step_len(&dz_a, &ds_a, dtau_a, dkappa_a).min(1.0);
        let mut mu_a = (tau + alpha_a * dtau_a) * (kappa + alpha_a * dkappa_a);
        for i in 0..m {
            mu_a += (s[i] + alpha_a * ds_a[i]) * (z[i] + alpha_a * dz_a[i]);
        }
        mu_a /= (m + 1) as f64;
        let sigma = { let r = (mu_a / mu).clamp(0.0, 1.0); r * r * r };

        // corrector
        let rs: Vec<f64> = (0..m).map(|i| -s[i] * z[i] + sigma * mu - ds_a[i] * dz_a[i]).collect();
        let rk = -tau * kappa + sigma * mu - dtau_a * dkappa_a;
        let (dx, dy, dz, ds, dtau, dkappa) = direction(1.0 - sigma, &rs, rk);
        let alpha = (0.99 * step_len(&dz, &ds, dtau, dkappa)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-12 {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        }

        for i in 0..nv {
            x[i] += alpha * dx[i];
        }
        for i in 0..p {
            y[i] += alpha * dy[i];
        }
        for i in 0..m {
            z[i] += alpha * dz[i];
            s[i] += alpha * ds[i];
        }
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if !(tau.is_finite() && kappa.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            break;
        }
    }

    let (pobj, dobj) = match status {
        LpStatus::Optimal => {
            x.iter_mut().for_each(|v| *v /= tau);
            y.iter_mut().for_each(|v| *v /= tau);
            z.iter_mut().for_each(|v| *v /= tau);
            s.iter_mut().for_each(|v| *v /= tau);
            (dot(&c, &x), -dot(&b, &y) - dot(&h, &z))
        }
        LpStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
        LpStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        LpStatus::IterationLimit => {
            let t = tau.max(f64::MIN_POSITIVE);
            for v in x.iter_mut().chain(y.iter_mut()).chain(z.iter_mut()).chain(s.iter_mut()) {
                *v /= t;
            }
            (dot(&c, &x), -(dot(&b, &y) + dot(&h, &z)))
        }
    };
    IpmResult { status, x, y, z, pobj, dobj, iterations }
}
