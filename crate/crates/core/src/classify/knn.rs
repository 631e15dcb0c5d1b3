use crate::error::{Error, Result};
use crate::nn::Matrix;

/// 1-nearest-neighbour labels under Euclidean distance. Exact distance ties
/// go to the lowest training row.
pub fn knn_predict(train: &Matrix, labels: &[usize], query: &Matrix) -> Result<Vec<usize>> {
    if train.rows() == 0 {
        return Err(Error::EmptySet("knn_predict: empty training set".into()));
    }
    if train.rows() != labels.len() {
        return Err(Error::Dimension {
            op: "knn_predict",
            left: train.shape(),
            right: (labels.len(), 1),
        });
    }
    if train.cols() != query.cols() {
        return Err(Error::Dimension {
            op: "knn_predict",
            left: train.shape(),
            right: query.shape(),
        });
    }
    Ok((0..query.rows())
        .map(|q| {
            let x = query.row(q);
            let mut best = (f64::INFINITY, 0usize);
            for i in 0..train.rows() {
                let dist: f64 = train.row(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist < best.0 {
                    best = (dist, i);
                }
            }
            labels[best.1]
        })
        .collect())
}

/// [`knn_predict`] with the queries split across `threads` workers.
pub fn knn_predict_parallel(train: &Matrix, labels: &[usize], query: &Matrix, threads: usize) -> Result<Vec<usize>> {
    let threads = threads.max(1).min(query.rows().max(1));
    if threads == 1 {
        return knn_predict(train, labels, query);
    }
    let chunk = query.rows().div_ceil(threads);
    let parts: Vec<Result<Vec<usize>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let start = (t * chunk).min(query.rows());
                let end = ((t + 1) * chunk).min(query.rows());
                let q = query.slice_rows(start, end);
                s.spawn(move || knn_predict(train, labels, &q))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("knn worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(query.rows());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
