use crate::classifier::{argmax_lowest, LogitsMatrix};

/// One pseudo-label candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub confidence: f64,
}

/// Candidates grouped by predicted class.
pub type Candidates = Vec<Vec<Candidate>>;

/// Per-class accepted candidates, equal in count across classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSet {
    pub per_class: Vec<Vec<Candidate>>,
}

impl SelectionSet {
    pub fn total(&self) -> usize {
        self.per_class.iter().map(Vec::len).sum()
    }

    pub fn per_class_count(&self) -> usize {
        self.per_class.first().map_or(0, Vec::len)
    }

    /// `(id, class, confidence)` triples, class-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.per_class
            .iter()
            .enumerate()
            .flat_map(|(c, list)| list.iter().map(move |cand| (cand.id, c, cand.confidence)))
    }
}

/// Column `p` (sample `ids[p]`) becomes a candidate for its argmax class iff
/// its maximum entry strictly exceeds `xi`.
pub fn threshold_select(fused: &LogitsMatrix, ids: &[usize], xi: f64) -> Candidates {
    assert_eq!(fused.sample_count(), ids.len(), "one id per column");
    let mut out = vec![Vec::new(); fused.class_count()];
    for (col, &id) in fused.values().columns().into_iter().zip(ids) {
        let (class, confidence) = argmax_lowest(col.iter().copied());
        if confidence > xi {
            out[class].push(Candidate { id, confidence });
        }
    }
    out
}

/// Keeps the `k` most confident candidates of every class, `k` being the
/// smallest class count. Equal confidences go to the lower id.
pub fn balance_classes(candidates: &Candidates) -> SelectionSet {
    let k = candidates.iter().map(Vec::len).min().unwrap_or(0);
    let per_class = candidates
        .iter()
        .map(|list| {
            let mut sorted = list.clone();
            sorted.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.id.cmp(&b.id)));
            sorted.truncate(k);
            sorted
        })
        .collect();
    SelectionSet { per_class }
}
