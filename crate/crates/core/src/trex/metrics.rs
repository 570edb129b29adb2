use std::collections::BTreeSet;

/// Realized false discovery and true positive proportions; duplicates are ignored.
pub fn fdp_tpp(selected: &[usize], truth: &[usize]) -> (f64, f64) {
    let sel: BTreeSet<usize> = selected.iter().copied().collect();
    let tru: BTreeSet<usize> = truth.iter().copied().collect();
    let hits = sel.intersection(&tru).count();
    let false_hits = sel.len() - hits;
    let fdp = false_hits as f64 / sel.len().max(1) as f64;
    let tpp = hits as f64 / tru.len().max(1) as f64;
    (fdp, tpp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let (f, t) = fdp_tpp(&[1, 2, 4], &[1, 2, 3]);
        assert_eq!((f, t), (1.0 / 3.0, 2.0 / 3.0));
        assert_eq!(fdp_tpp(&[], &[1, 2]), (0.0, 0.0));
        assert_eq!(fdp_tpp(&[5], &[]), (1.0, 0.0));
        assert_eq!(fdp_tpp(&[], &[]), (0.0, 0.0));
    }
}
