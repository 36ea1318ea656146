//! Sparse class histograms, sorted by class id.

pub(crate) type Hist = Vec<(usize, u64)>;

pub(crate) fn merge(a: &Hist, b: &Hist) -> Hist {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Classes present in both histograms with their two counts.
pub(crate) fn common<'a>(a: &'a Hist, b: &'a Hist) -> impl Iterator<Item = (usize, u64, u64)> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let item = (a[i].0, a[i].1, b[j].1);
                    i += 1;
                    j += 1;
                    return Some(item);
                }
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_common() {
        let a = vec![(0, 2), (3, 1)];
        let b = vec![(1, 4), (3, 5)];
        assert_eq!(merge(&a, &b), vec![(0, 2), (1, 4), (3, 6)]);
        assert_eq!(common(&a, &b).collect::<Vec<_>>(), vec![(3, 1, 5)]);
    }
}
