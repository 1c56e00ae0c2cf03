//! Dataset ingestion (MovieLens rating files, dense CSV), synthetic
//! generation, train/test splitting, and held-out RMSE evaluation.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair, MaskedMatrix};
use crate::rng::SplitMix64;

/// MovieLens release formats. The published statistics pin the full shape
/// even when a subset of ids is present in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MovieLensFormat {
    Ml100k,
    Ml1m,
    Ml10m,
}

impl MovieLensFormat {
    fn separator(self) -> &'static str {
        match self {
            MovieLensFormat::Ml100k => "\t",
            _ => "::",
        }
    }

    /// (users, movies) from the dataset statistics.
    pub fn table_shape(self) -> (usize, usize) {
        match self {
            MovieLensFormat::Ml100k => (943, 1682),
            MovieLensFormat::Ml1m => (6040, 3952),
            MovieLensFormat::Ml10m => (71567, 10681),
        }
    }
}

/// A loaded rating matrix together with the id remapping: row `i` of the
/// matrix is the user with original id `user_ids[i]`, and likewise for
/// columns, so predictions map back to original ids.
#[derive(Debug, Clone)]
pub struct MovieLensData {
    pub matrix: MaskedMatrix,
    pub user_ids: Vec<u64>,
    pub item_ids: Vec<u64>,
}

/// Parse a MovieLens rating file: `user<sep>item<sep>rating[<sep>timestamp]`
/// per line. Ids are mapped to 0-based dense indices preserving id order;
/// the shape comes from the published statistics table unless the file
/// contains more distinct ids.
pub fn load_movielens(path: impl AsRef<Path>, format: MovieLensFormat) -> Result<MovieLensData> {
    let text = std::fs::read_to_string(path)?;
    load_movielens_str(&text, format)
}

pub fn load_movielens_str(text: &str, format: MovieLensFormat) -> Result<MovieLensData> {
    let sep = format.separator();
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(sep).collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected user{sep}item{sep}rating, got {line:?}"),
            });
        }
        let parse_err = |what: &str| Error::Parse {
            line: lineno + 1,
            message: format!("bad {what} in {line:?}"),
        };
        let user: u64 = fields[0].trim().parse().map_err(|_| parse_err("user id"))?;
        let item: u64 = fields[1].trim().parse().map_err(|_| parse_err("item id"))?;
        let rating: f64 = fields[2].trim().parse().map_err(|_| parse_err("rating"))?;
        raw.push((user, item, rating));
    }
    if raw.is_empty() {
        return Err(Error::Parse { line: 1, message: "empty rating file".into() });
    }

    let mut user_ids: Vec<u64> = raw.iter().map(|r| r.0).collect();
    user_ids.sort_unstable();
    user_ids.dedup();
    let mut item_ids: Vec<u64> = raw.iter().map(|r| r.1).collect();
    item_ids.sort_unstable();
    item_ids.dedup();

    let (table_rows, table_cols) = format.table_shape();
    let rows = table_rows.max(user_ids.len());
    let cols = table_cols.max(item_ids.len());

    let entries = raw
        .into_iter()
        .map(|(u, i, v)| {
            let row = user_ids.binary_search(&u).expect("id collected above");
            let col = item_ids.binary_search(&i).expect("id collected above");
            (row, col, v)
        })
        .collect();
    Ok(MovieLensData { matrix: MaskedMatrix::from_triples(rows, cols, entries)?, user_ids, item_ids })
}

/// Train/test split of a rating matrix with disjoint index sets.
#[derive(Debug, Clone)]
pub struct RatingDataset {
    pub train: MaskedMatrix,
    pub test: MaskedMatrix,
    /// (min, max) rating over the full matrix.
    pub scale: (f64, f64),
}

/// Global uniform partition by entry: a seeded Fisher-Yates shuffle, then
/// the first `round(frac * n)` entries form the training set.
pub fn split_train_test(m: &MaskedMatrix, frac: f64, seed: u64) -> Result<RatingDataset> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidInput("split fraction must lie in (0, 1)".into()));
    }
    if m.is_empty() {
        return Err(Error::InvalidInput("cannot split an empty matrix".into()));
    }
    let n = m.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        order.swap(i, j);
    }
    let n_train = ((frac * n as f64).round() as usize).clamp(1, n - 1);
    let entries = m.entries();
    let train: Vec<_> = order[..n_train].iter().map(|&i| entries[i]).collect();
    let test: Vec<_> = order[n_train..].iter().map(|&i| entries[i]).collect();
    let scale = m.min_max_value().expect("nonempty");
    Ok(RatingDataset {
        train: MaskedMatrix::from_triples(m.rows(), m.cols(), train)?,
        test: MaskedMatrix::from_triples(m.rows(), m.cols(), test)?,
        scale,
    })
}

/// Root mean squared error of the factor predictions over the held-out
/// entries; each prediction `(UZ)_ij` is formed per entry without
/// materializing the dense product.
pub fn test_rmse(x: &FactorPair, test: &MaskedMatrix) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let k = x.inner_dim();
    let mut acc = 0.0;
    for &(i, j, v) in test.entries() {
        let mut pred = 0.0;
        for l in 0..k {
            pred += x.u.at(i, l) * x.z.at(l, j);
        }
        let r = v - pred;
        acc += r * r;
    }
    Ok((acc / test.len() as f64).sqrt())
}

/// Dense matrix with i.i.d. uniform [lo, hi) entries in row-major fill
/// order from the documented in-repo generator.
pub fn synthetic_dense(rows: usize, cols: usize, seed: u64, lo: f64, hi: f64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    DenseMatrix::from_raw(rows, cols, (0..rows * cols).map(|_| rng.uniform(lo, hi)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_ml100k_file() {
        let data = load_movielens_str("1\t1\t5\t0\n2\t2\t3\t0\n", MovieLensFormat::Ml100k).unwrap();
        assert_eq!(data.matrix.len(), 2);
        let values: Vec<f64> = data.matrix.entries().iter().map(|e| e.2).collect();
        assert_eq!(values, vec![5.0, 3.0]);
        // shape comes from the statistics table
        assert_eq!(data.matrix.shape(), (943, 1682));
        assert_eq!(data.user_ids, vec![1, 2]);
    }

    #[test]
    fn ml1m_separator_and_half_stars() {
        let data = load_movielens_str("7::9::3.5::0\n", MovieLensFormat::Ml10m).unwrap();
        assert_eq!(data.matrix.entries()[0].2, 3.5);
        assert_eq!(data.matrix.shape(), (71567, 10681));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = load_movielens_str("1\t1\t5\n2\tbad\t3\n", MovieLensFormat::Ml100k).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_movielens_str("", MovieLensFormat::Ml100k).is_err());
    }

    #[test]
    fn split_is_deterministic_disjoint_and_sized() {
        let entries: Vec<_> = (0..10).map(|i| (i, i % 3, i as f64)).collect();
        let m = MaskedMatrix::from_triples(10, 3, entries).unwrap();
        let a = split_train_test(&m, 0.8, 3).unwrap();
        let b = split_train_test(&m, 0.8, 3).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.train.len(), 8);
        assert_eq!(a.test.len(), 2);
        for e in a.test.entries() {
            assert!(!a.train.entries().contains(e));
        }
        assert_eq!(a.train.len() + a.test.len(), m.len());
    }

    #[test]
    fn split_disjointness_large() {
        let mut rng = SplitMix64::new(5);
        let mut seen = std::collections::BTreeSet::new();
        let mut entries = Vec::new();
        while entries.len() < 1000 {
            let i = rng.index(100);
            let j = rng.index(50);
            if seen.insert((i, j)) {
                entries.push((i, j, rng.uniform(1.0, 5.0)));
            }
        }
        let m = MaskedMatrix::from_triples(100, 50, entries).unwrap();
        let ds = split_train_test(&m, 0.8, 11).unwrap();
        let train: std::collections::BTreeSet<_> =
            ds.train.entries().iter().map(|e| (e.0, e.1)).collect();
        for e in ds.test.entries() {
            assert!(!train.contains(&(e.0, e.1)));
        }
    }

    #[test]
    fn rmse_examples() {
        let u = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let z = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let x = FactorPair::new(u, z).unwrap();
        // exact predictions
        let exact =
            MaskedMatrix::from_triples(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(test_rmse(&x, &exact).unwrap(), 0.0);
        // single entry with error 2
        let off = MaskedMatrix::from_triples(2, 2, vec![(0, 0, 3.0)]).unwrap();
        assert_eq!(test_rmse(&x, &off).unwrap(), 2.0);
        // empty test set rejected
        let empty = MaskedMatrix::from_triples(2, 2, vec![]).unwrap();
        assert!(test_rmse(&x, &empty).is_err());
    }

    #[test]
    fn rmse_matches_dense_product() {
        let mut rng = SplitMix64::new(9);
        let u = DenseMatrix::from_raw(4, 2, (0..8).map(|_| rng.uniform(-1.0, 1.0)).collect());
        let z = DenseMatrix::from_raw(2, 3, (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect());
        let x = FactorPair::new(u, z).unwrap();
        let dense = x.product();
        let test =
            MaskedMatrix::from_triples(4, 3, vec![(0, 0, 1.0), (2, 1, -0.5), (3, 2, 0.25)])
                .unwrap();
        let mut acc = 0.0;
        for &(i, j, v) in test.entries() {
            acc += (v - dense.at(i, j)).powi(2);
        }
        let expect = (acc / 3.0).sqrt();
        assert!((test_rmse(&x, &test).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn synthetic_dense_contract() {
        let a = synthetic_dense(4, 3, 7, 0.0, 1.0);
        assert_eq!(a.shape(), (4, 3));
        assert!(a.data().iter().all(|&v| (0.0..1.0).contains(&v)));
        let b = synthetic_dense(4, 3, 7, 0.0, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn published_table_shapes() {
        assert_eq!(MovieLensFormat::Ml100k.table_shape(), (943, 1682));
        assert_eq!(MovieLensFormat::Ml1m.table_shape(), (6040, 3952));
        assert_eq!(MovieLensFormat::Ml10m.table_shape(), (71567, 10681));
    }

    #[test]
    fn rmse_invariant_under_consistent_permutation() {
        let mut rng = SplitMix64::new(21);
        let u = DenseMatrix::from_raw(4, 2, (0..8).map(|_| rng.uniform(-1.0, 1.0)).collect());
        let z = DenseMatrix::from_raw(2, 3, (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect());
        let x = FactorPair::new(u, z).unwrap();
        let test =
            MaskedMatrix::from_triples(4, 3, vec![(0, 1, 0.4), (2, 0, -1.0), (3, 2, 0.9)])
                .unwrap();
        let base = test_rmse(&x, &test).unwrap();

        // permute rows of U and the test row indices the same way
        let perm = [2usize, 0, 3, 1];
        let mut pu = vec![0.0; 8];
        for (new, &old) in perm.iter().enumerate() {
            pu[new * 2] = x.u.at(old, 0);
            pu[new * 2 + 1] = x.u.at(old, 1);
        }
        let inverse =
            |old: usize| perm.iter().position(|&p| p == old).expect("permutation is total");
        let permuted_entries: Vec<_> =
            test.entries().iter().map(|&(i, j, v)| (inverse(i), j, v)).collect();
        let permuted_test = MaskedMatrix::from_triples(4, 3, permuted_entries).unwrap();
        let permuted_x =
            FactorPair::new(DenseMatrix::from_raw(4, 2, pu), x.z.clone()).unwrap();
        let permuted = test_rmse(&permuted_x, &permuted_test).unwrap();
        assert!((base - permuted).abs() < 1e-15);
    }
}
