use crate::error::{Error, Result};

/// Mean over users of the fraction of long-tail items among their top K.
pub fn aplt_at_k(lists: &[Vec<usize>], tail: &[bool], k: usize) -> Result<f64> {
    if lists.is_empty() || k == 0 {
        return Err(Error::UndefinedMetric("APLT over no lists".into()));
    }
    let total: f64 =
        lists.iter().map(|l| l.iter().take(k).filter(|&&i| tail[i]).count() as f64 / k as f64).sum();
    Ok(total / lists.len() as f64)
}

/// Number of appearances of each item across all lists.
pub fn exposure_counts(lists: &[Vec<usize>], n_items: usize) -> Vec<u64> {
    let mut e = vec![0u64; n_items];
    for l in lists {
        for &i in l {
            e[i] += 1;
        }
    }
    e
}

/// `(Ē_head − Ē_tail) / (Ē_head + Ē_tail)` where `Ē_g` is the mean exposure
/// per item of group `g`.
pub fn delta_exp(lists: &[Vec<usize>], tail: &[bool]) -> Result<f64> {
    let n_tail = tail.iter().filter(|t| **t).count();
    let n_head = tail.len() - n_tail;
    if n_tail == 0 || n_head == 0 {
        return Err(Error::UndefinedMetric("ΔExp needs nonempty head and tail groups".into()));
    }
    let e = exposure_counts(lists, tail.len());
    let (mut head, mut tl) = (0u64, 0u64);
    for (i, &c) in e.iter().enumerate() {
        if tail[i] {
            tl += c;
        } else {
            head += c;
        }
    }
    let mh = head as f64 / n_head as f64;
    let mt = tl as f64 / n_tail as f64;
    if mh + mt == 0.0 {
        return Err(Error::UndefinedMetric("ΔExp with zero total exposure".into()));
    }
    Ok((mh - mt) / (mh + mt))
}

/// Gini index of per-item exposure over the whole catalog, zero-exposure
/// items included.
pub fn gini(lists: &[Vec<usize>], n_items: usize) -> Result<f64> {
    if n_items < 2 {
        return Err(Error::UndefinedMetric("Gini needs at least two items".into()));
    }
    let mut e = exposure_counts(lists, n_items);
    let total: u64 = e.iter().sum();
    if total == 0 {
        return Err(Error::UndefinedMetric("Gini with zero total exposure".into()));
    }
    e.sort_unstable();
    let n = n_items as f64;
    let weighted: f64 = e.iter().enumerate().map(|(i, &c)| (2.0 * (i + 1) as f64 - n - 1.0) * c as f64).sum();
    Ok(weighted / (n * total as f64))
}

/// Fraction of the catalog recommended to at least one user.
pub fn coverage(lists: &[Vec<usize>], n_items: usize) -> f64 {
    let mut seen = vec![false; n_items];
    for l in lists {
        for &i in l {
            seen[i] = true;
        }
    }
    seen.iter().filter(|s| **s).count() as f64 / n_items as f64
}
