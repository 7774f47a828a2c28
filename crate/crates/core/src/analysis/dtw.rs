use super::mfcc::FeatureMatrix;

/// Dynamic time warping distance between two feature sequences.
///
/// Local cost is the Euclidean distance between frames. The symmetric step
/// pattern charges horizontal and vertical moves once and diagonal moves
/// twice, so every path has weight `n + m` and the accumulated cost is
/// divided by it. Returns `+inf` if either sequence is empty.
pub fn dtw_distance(a: &FeatureMatrix, b: &FeatureMatrix) -> f64 {
    let (ra, rb) = (a.rows(), b.rows());
    let (n, m) = (ra.len(), rb.len());
    if n == 0 || m == 0 {
        return f64::INFINITY;
    }
    let cost = |i: usize, j: usize| -> f64 {
        ra[i]
            .iter()
            .zip(&rb[j])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };

    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..n {
        for j in 0..m {
            let d = cost(i, j);
            cur[j] = if i == 0 && j == 0 {
                2.0 * d
            } else {
                let up = if i > 0 { prev[j] + d } else { f64::INFINITY };
                let left = if j > 0 { cur[j - 1] + d } else { f64::INFINITY };
                let diag = if i > 0 && j > 0 {
                    prev[j - 1] + 2.0 * d
                } else {
                    f64::INFINITY
                };
                up.min(left).min(diag)
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1] / (n + m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::new(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn zero_on_identical() {
        let a = fm(&[&[1.0, 2.0], &[3.0, 4.0], &[0.0, -1.0]]);
        assert_eq!(dtw_distance(&a, &a), 0.0);
    }

    #[test]
    fn absorbs_time_stretch() {
        let a = fm(&[&[0.0], &[1.0], &[2.0]]);
        let b = fm(&[&[0.0], &[0.0], &[1.0], &[1.0], &[2.0], &[2.0]]);
        assert_eq!(dtw_distance(&a, &b), 0.0);
    }

    #[test]
    fn hand_computed_value() {
        // single frames: 2*d / 2
        let a = fm(&[&[0.0, 0.0]]);
        let b = fm(&[&[3.0, 4.0]]);
        assert_eq!(dtw_distance(&a, &b), 5.0);
        // 1 vs 2 frames: path (0,0)->(0,1): 2*5 + 5 over 3
        let c = fm(&[&[3.0, 4.0], &[3.0, 4.0]]);
        assert!((dtw_distance(&a, &c) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_is_infinite() {
        let a = fm(&[&[1.0]]);
        assert_eq!(dtw_distance(&a, &FeatureMatrix::new(vec![])), f64::INFINITY);
    }
}
