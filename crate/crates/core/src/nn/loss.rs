use super::Matrix;
use crate::error::{Error, Result};

/// Mean softmax cross-entropy over the batch and its gradient with respect
/// to the logits, `(softmax − onehot) / batch`.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let (n, c) = logits.shape();
    if labels.len() != n {
        return Err(Error::Dimension {
            op: "softmax_cross_entropy",
            left: logits.shape(),
            right: (labels.len(), 1),
        });
    }
    if n == 0 {
        return Err(Error::EmptySet("softmax_cross_entropy: empty batch".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::LabelOutOfRange {
            label: bad,
            num_classes: c,
        });
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, c);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        loss += log_z - row[y];
        let g = grad.row_mut(i);
        for (gj, &v) in g.iter_mut().zip(row) {
            *gj = (v - log_z).exp() * inv_n;
        }
        g[y] -= inv_n;
    }
    Ok((loss * inv_n, grad))
}

/// Row-wise argmax; ties go to the lowest column.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
