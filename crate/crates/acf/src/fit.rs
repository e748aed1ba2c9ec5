//! Least-squares fit of `Phi(r) = a0 - 2 a2 r^2 + a4 r^4`.

use crate::error::{AcfError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticFit {
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub residual_norm: f64,
}

/// Solves the least-squares problem in the basis `(1, -2 r^2, r^4)` by
/// modified Gram-Schmidt QR.
pub fn fit_quartic(r: &[f64], phi: &[f64]) -> Result<QuarticFit> {
    if r.len() != phi.len() {
        return Err(AcfError::InvalidInput("radius and value counts differ".into()));
    }
    let mut distinct: Vec<f64> = r.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(AcfError::RankDeficient);
    }
    let m = r.len();
    let mut q: Vec<Vec<f64>> = vec![
        vec![1.0; m],
        r.iter().map(|x| -2.0 * x * x).collect(),
        r.iter().map(|x| x.powi(4)).collect(),
    ];
    let mut rr = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            rr[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(b, a)| *b -= d * a);
        }
        let norm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(AcfError::RankDeficient);
        }
        rr[j][j] = norm;
        q[j].iter_mut().for_each(|x| *x /= norm);
    }
    let qtb: Vec<f64> = q.iter().map(|col| col.iter().zip(phi).map(|(a, b)| a * b).sum()).collect();
    let mut c = [0.0; 3];
    for j in (0..3).rev() {
        let s: f64 = (j + 1..3).map(|k| rr[j][k] * c[k]).sum();
        c[j] = (qtb[j] - s) / rr[j][j];
    }
    let residual_norm = r
        .iter()
        .zip(phi)
        .map(|(x, y)| {
            let x2 = x * x;
            (c[0] - 2.0 * c[1] * x2 + c[2] * x2 * x2 - y).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(QuarticFit { a0: c[0], a2: c[1], a4: c[2], residual_norm })
}
