//! Ordinary least squares via Householder QR on mean-centered columns.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Features, N_FEATURES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Features,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &Features) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Columns whose remaining norm after orthogonalization falls below this
/// fraction of their original norm are treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares fit `y ≈ X w + b`.
///
/// Columns are centered so the intercept drops out of the decomposition,
/// then `X_c = Q R` is formed with Householder reflections applied in place
/// to both `X_c` and `y_c`, and `R w = Qᵀ y_c` is back-substituted.
pub fn fit_linear(train: &Dataset) -> Result<LinearModel> {
    let n = train.len();
    if n <= N_FEATURES {
        return Err(Error::TooFewRecords {
            needed: N_FEATURES + 1,
            got: n,
        });
    }
    let y = train.labels()?;
    let p = N_FEATURES;

    let mut x_mean = [0.0; N_FEATURES];
    for r in train.records() {
        for (m, v) in x_mean.iter_mut().zip(&r.features) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m /= n as f64);
    let y_mean = y.iter().sum::<f64>() / n as f64;

    // Column-major working copy of the centered design.
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|j| train.records().iter().map(|r| r.features[j] - x_mean[j]).collect())
        .collect();
    let mut b: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();

    let mut r_diag = [0.0; N_FEATURES];
    for k in 0..p {
        let alpha_norm = norm(&a[k][k..]);
        if !(alpha_norm > RANK_TOLERANCE * col_norms[k]) {
            return Err(Error::RankDeficient { column: k });
        }
        // Reflect a[k][k..] onto -sign(a_kk) * ||.|| e_1.
        let alpha = if a[k][k] >= 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|t| t * t).sum();
        r_diag[k] = alpha;
        if v_norm_sq == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(s, t)| s * t).sum();
            let f = 2.0 * dot / v_norm_sq;
            for (c, s) in col.iter_mut().zip(&v) {
                *c -= f * s;
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
        a[k][k] = alpha;
    }

    let mut w = [0.0; N_FEATURES];
    for k in (0..p).rev() {
        let s: f64 = (k + 1..p).map(|j| a[j][k] * w[j]).sum();
        w[k] = (b[k] - s) / r_diag[k];
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient { column: p - 1 });
    }
    let intercept = y_mean - w.iter().zip(&x_mean).map(|(wi, mi)| wi * mi).sum::<f64>();
    Ok(LinearModel {
        weights: w,
        intercept,
    })
}

fn norm(v: &[f64]) -> f64 {
    // Scaled to avoid overflow on raw-unit columns.
    let scale = v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|t| (t / scale) * (t / scale)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ProcessRecord;
    use crate::seeds::rng_from;
    use rand::Rng;

    fn random_x(n: usize, seed: u64) -> Vec<Features> {
        let mut rng = rng_from(seed);
        (0..n).map(|_| std::array::from_fn(|_| rng.random::<f64>() * 4.0 - 2.0)).collect()
    }

    #[test]
    fn recovers_single_slope() {
        // y = 2 x1 + 1, other features zero.
        let x: Vec<Features> = (0..20)
            .map(|i| {
                let mut r = [0.0; 8];
                r[0] = i as f64 * 0.37 - 3.0;
                r
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        // Constant zero columns are dependent on the intercept, so this must fail...
        let d = Dataset::from_rows(&x, &y).unwrap();
        assert!(matches!(fit_linear(&d), Err(Error::RankDeficient { column: 1 })));

        // ...while tiny independent jitter in the other columns is identifiable.
        let mut rng = rng_from(5);
        let x: Vec<Features> = x
            .into_iter()
            .map(|mut r| {
                for v in r.iter_mut().skip(1) {
                    *v = rng.random::<f64>() - 0.5;
                }
                r
            })
            .collect();
        let d = Dataset::from_rows(&x, &y).unwrap();
        let m = fit_linear(&d).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
        for w in &m.weights[1..] {
            assert!(w.abs() < 1e-9);
        }
    }

    #[test]
    fn exact_coefficients() {
        let truth = [0.5, -1.25, 3.0, 0.0, 2.0, -0.75, 1.5, 0.1];
        let x = random_x(60, 2);
        let y: Vec<f64> = x.iter().map(|r| -4.0 + r.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>()).collect();
        let m = fit_linear(&Dataset::from_rows(&x, &y).unwrap()).unwrap();
        for (w, t) in m.weights.iter().zip(&truth) {
            assert!((w - t).abs() < 1e-9);
        }
        assert!((m.intercept + 4.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target() {
        let x = random_x(40, 3);
        let m = fit_linear(&Dataset::from_rows(&x, &vec![7.5; 40]).unwrap()).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert!((m.intercept - 7.5).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let x: Vec<Features> = random_x(30, 4)
            .into_iter()
            .map(|mut r| {
                r[5] = r[2];
                r
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        assert!(matches!(
            fit_linear(&Dataset::from_rows(&x, &y).unwrap()),
            Err(Error::RankDeficient { column: 5 })
        ));
    }

    #[test]
    fn too_few_rows() {
        let x = random_x(8, 1);
        assert!(matches!(
            fit_linear(&Dataset::from_rows(&x, &[0.0; 8]).unwrap()),
            Err(Error::TooFewRecords { .. })
        ));
    }

    #[test]
    fn residuals_orthogonal_to_columns_and_ones() {
        let mut rng = rng_from(9);
        let x = random_x(500, 8);
        let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[3] * r[4] + rng.random::<f64>()).collect();
        let records: Vec<_> = x.iter().zip(&y).map(|(r, v)| ProcessRecord::new(*r, Some(*v))).collect();
        let m = fit_linear(&Dataset::new(records).unwrap()).unwrap();
        let resid: Vec<f64> = x.iter().zip(&y).map(|(r, v)| v - m.predict(r)).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..8 {
            let dot: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            assert!(dot.abs() < 1e-8, "column {j}: {dot}");
        }
    }
}
