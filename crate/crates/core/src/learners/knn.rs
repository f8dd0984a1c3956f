use crate::data::matrix::dist;
use crate::data::Matrix;
use crate::error::{Error, Result};

/// Exact Euclidean nearest neighbours over all rows of a matrix, or over a
/// subset of them. Results are row indices of the underlying matrix, ordered
/// by `(distance, row index)`.
#[derive(Debug, Clone)]
pub struct KnnIndex<'a> {
    data: &'a Matrix,
    members: Option<Vec<usize>>,
}

impl<'a> KnnIndex<'a> {
    pub fn new(data: &'a Matrix) -> Self {
        KnnIndex { data, members: None }
    }

    pub fn over(data: &'a Matrix, members: Vec<usize>) -> Self {
        KnnIndex { data, members: Some(members) }
    }

    pub fn len(&self) -> usize {
        self.members.as_ref().map_or(self.data.rows(), Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn candidates(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.members {
            Some(m) => Box::new(m.iter().copied()),
            None => Box::new(0..self.data.rows()),
        }
    }

    /// `k` nearest references to `x`, skipping row `exclude` if given.
    pub fn query(&self, x: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
        let mut cand: Vec<(f64, usize)> = self
            .candidates()
            .filter(|&i| Some(i) != exclude)
            .map(|i| (dist(x, self.data.row(i)), i))
            .collect();
        if k > cand.len() {
            return Err(Error::invalid_param(format!(
                "k={k} exceeds {} available references",
                cand.len()
            )));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() && k > 0 {
            cand.select_nth_unstable_by(k - 1, cmp);
        }
        cand.truncate(k);
        cand.sort_unstable_by(cmp);
        Ok(cand.into_iter().map(|(_, i)| i).collect())
    }

    /// Neighbours of a row that is itself in the index.
    pub fn query_row(&self, row: usize, k: usize) -> Result<Vec<usize>> {
        self.query(self.data.row(row), k, Some(row))
    }
}

/// Mode of the labels with the lowest class id winning ties.
pub fn vote(labels: impl IntoIterator<Item = usize>, n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for y in labels {
        counts[y] += 1;
    }
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}
