use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Guards the inverse-distance weight of an exact match.
const DISTANCE_FLOOR: f64 = 1e-9;

/// Distance-weighted k-nearest-neighbour vote over stored training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub points: Array2<f64>,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl KnnModel {
    pub(crate) fn new(points: Array2<f64>, labels: Vec<usize>, k: usize) -> Self {
        Self { points, labels, k }
    }

    /// `P × N` row-stochastic class weights. Neighbours at equal distance are
    /// taken in stored order.
    pub(crate) fn probabilities(&self, x: ArrayView2<'_, f64>, classes: usize) -> Array2<f64> {
        let train_sq: Array1<f64> = self.points.map_axis(Axis(1), |r| r.dot(&r));
        let cross = x.dot(&self.points.t());
        let k = self.k.min(self.points.nrows());
        let mut out = Array2::zeros((x.nrows(), classes));
        let mut order: Vec<usize> = Vec::with_capacity(self.points.nrows());
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let q = x.row(i);
            let q_sq = q.dot(&q);
            let dist: Vec<f64> = cross
                .row(i)
                .iter()
                .zip(&train_sq)
                .map(|(c, t)| (q_sq + t - 2.0 * c).max(0.0).sqrt())
                .collect();
            order.clear();
            order.extend(0..dist.len());
            order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            for &j in &order[..k] {
                row[self.labels[j]] += 1.0 / (dist[j] + DISTANCE_FLOOR);
            }
            let total = row.sum();
            row.mapv_inplace(|v| v / total);
        }
        out
    }
}
