//! LIBSVM text ingestion and 1D partitioning.
//!
//! Each line is `label idx:val idx:val ...` with 1-based, strictly
//! increasing feature indices. Files omit trailing all-zero features, so a
//! declared feature count may widen the parsed matrix to the published
//! dimension.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{CsrBuilder, CsrMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub matrix: CsrMatrix,
    pub labels: Vec<f64>,
    pub name: String,
}

impl LabeledDataset {
    pub fn new(matrix: CsrMatrix, labels: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if labels.len() != matrix.num_rows() {
            return Err(Error::dim(format!("{} labels for {} rows", labels.len(), matrix.num_rows())));
        }
        Ok(Self { matrix, labels, name: name.into() })
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.num_rows()
    }

    pub fn num_cols(&self) -> usize {
        self.matrix.num_cols()
    }

    /// Fails unless every label is exactly `-1` or `+1`.
    pub fn require_binary_labels(&self) -> Result<()> {
        match self.labels.iter().position(|&b| b != 1.0 && b != -1.0) {
            Some(i) => Err(Error::Config(format!(
                "label {} on row {} is not ±1; SVM solvers need binary labels",
                self.labels[i],
                i + 1
            ))),
            None => Ok(()),
        }
    }
}

/// Parses LIBSVM text. `num_features` widens the column count when given.
pub fn parse_libsvm<R: BufRead>(reader: R, name: &str, num_features: Option<usize>) -> Result<LabeledDataset> {
    let mut builder = CsrBuilder::new(usize::MAX);
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    let mut entries = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok.parse().map_err(|_| parse_err(format!("label {label_tok:?} is not a number")))?;
        if !label.is_finite() {
            return Err(parse_err(format!("label {label_tok:?} is not finite")));
        }

        entries.clear();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| parse_err(format!("malformed pair {tok:?}")))?;
            let idx: usize =
                idx.parse().map_err(|_| parse_err(format!("feature index {idx:?} is not a positive integer")))?;
            if idx == 0 {
                return Err(parse_err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(parse_err(format!("feature index {idx} does not increase after {prev}")));
            }
            let val: f64 = val.parse().map_err(|_| parse_err(format!("value {val:?} is not a number")))?;
            if !val.is_finite() {
                return Err(parse_err(format!("value {val:?} is not finite")));
            }
            prev = idx;
            entries.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        builder.push_row(entries.iter().copied())?;
        labels.push(label);
    }

    let num_cols = match num_features {
        Some(n) if n < max_index => {
            return Err(Error::Config(format!("declared {n} features but data uses index {max_index}")))
        }
        Some(n) => n,
        None => max_index,
    };
    let raw = builder.finish();
    let matrix = CsrMatrix::new(
        raw.num_rows(),
        num_cols,
        raw.row_offsets().to_vec(),
        raw.col_indices().to_vec(),
        raw.values().to_vec(),
    )?;
    LabeledDataset::new(matrix, labels, name)
}

pub fn read_libsvm_file(path: &Path, num_features: Option<usize>) -> Result<LabeledDataset> {
    let file = File::open(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_libsvm(BufReader::new(file), &name, num_features)
}

/// Writes LIBSVM text; values use shortest round-trip formatting.
pub fn write_libsvm<W: Write>(dataset: &LabeledDataset, mut out: W) -> Result<()> {
    for (r, label) in dataset.labels.iter().enumerate() {
        write!(out, "{label}")?;
        let (cols, vals) = dataset.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            write!(out, " {}:{v}", c + 1)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axis {
    Rows,
    Cols,
}

/// Contiguous, balanced split of one dimension over `P` workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub axis: Axis,
    pub ranges: Vec<Range<usize>>,
}

impl Partition {
    pub fn even(len: usize, axis: Axis, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("need at least one worker".into()));
        }
        if workers > len {
            return Err(Error::Config(format!("{workers} workers for a dimension of size {len}")));
        }
        let base = len / workers;
        let extra = len % workers;
        let mut ranges = Vec::with_capacity(workers);
        let mut start = 0;
        for w in 0..workers {
            let size = base + usize::from(w < extra);
            ranges.push(start..start + size);
            start += size;
        }
        Ok(Self { axis, ranges })
    }

    pub fn workers(&self) -> usize {
        self.ranges.len()
    }
}

/// Row partition for Lasso, column partition for SVM.
pub fn partition(dataset: &LabeledDataset, axis: Axis, workers: usize) -> Result<Partition> {
    let len = match axis {
        Axis::Rows => dataset.num_rows(),
        Axis::Cols => dataset.num_cols(),
    };
    Partition::even(len, axis, workers)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetStats {
    pub num_rows: usize,
    pub num_cols: usize,
    pub nnz: usize,
    pub density_percent: f64,
}

pub fn dataset_stats(dataset: &LabeledDataset) -> DatasetStats {
    DatasetStats {
        num_rows: dataset.num_rows(),
        num_cols: dataset.num_cols(),
        nnz: dataset.matrix.nnz(),
        density_percent: 100.0 * dataset.matrix.density(),
    }
}

/// Seeded random instances for tests and benchmarks.
pub mod synthetic {
    use super::*;

    /// Sparse uniform matrix with roughly `density` fill; every row gets at
    /// least one entry. Labels are a noisy response of a sparse linear model.
    pub fn regression(m: usize, n: usize, density: f64, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = random_matrix(m, n, density, &mut rng);
        let truth: Vec<f64> = (0..n).map(|j| if j % 3 == 0 { rng.gen_range(-2.0..2.0) } else { 0.0 }).collect();
        let mut labels = crate::matrix::spmv(&matrix, &truth).expect("shapes agree");
        for b in &mut labels {
            *b += 0.1 * rng.gen_range(-1.0..1.0);
        }
        LabeledDataset::new(matrix, labels, format!("regression-{m}x{n}-s{seed}")).unwrap()
    }

    /// Binary labels given by the side of a random hyperplane through the
    /// origin, so the data are linearly separable.
    pub fn separable(m: usize, n: usize, density: f64, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = random_matrix(m, n, density, &mut rng);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scores = crate::matrix::spmv(&matrix, &w).expect("shapes agree");
        let labels = scores
            .iter()
            .enumerate()
            .map(|(i, s)| if *s > 0.0 || (*s == 0.0 && i % 2 == 0) { 1.0 } else { -1.0 })
            .collect();
        LabeledDataset::new(matrix, labels, format!("separable-{m}x{n}-s{seed}")).unwrap()
    }

    /// Same sparsity pattern generator as above, labels uniformly ±1.
    pub fn random_labels(m: usize, n: usize, density: f64, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = random_matrix(m, n, density, &mut rng);
        let labels = (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        LabeledDataset::new(matrix, labels, format!("labels-{m}x{n}-s{seed}")).unwrap()
    }

    fn random_matrix(m: usize, n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix {
        let value = Uniform::new(-1.0, 1.0);
        let mut builder = CsrBuilder::new(n);
        for r in 0..m {
            let forced = r % n.max(1);
            let mut row = Vec::new();
            for c in 0..n {
                if c == forced || rng.gen_bool(density.clamp(0.0, 1.0)) {
                    let v: f64 = value.sample(rng);
                    row.push((c, if v == 0.0 { 0.5 } else { v }));
                }
            }
            builder.push_row(row).expect("increasing columns");
        }
        builder.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        parse_libsvm(text.as_bytes(), "t", None)
    }

    #[test]
    fn single_line() {
        let d = parse("+1 3:1.5 7:2.0\n").unwrap();
        assert_eq!(d.num_rows(), 1);
        assert_eq!(d.num_cols(), 7);
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.matrix.row(0), (&[2usize, 6][..], &[1.5, 2.0][..]));
    }

    #[test]
    fn empty_feature_list_is_zero_row() {
        let d = parse("-1\n+1 1:2\n").unwrap();
        assert_eq!(d.labels, vec![-1.0, 1.0]);
        assert_eq!(d.matrix.row(0).0.len(), 0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("1 1:2\n1 2:x\n", 2),
            ("1 1:2 1:3\n", 1),
            ("1 2:1 1:3\n", 1),
            ("1 0:1\n", 1),
            ("+1 1:1\n\nabc 1:1\n", 3),
            ("1 3\n", 1),
        ] {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn declared_feature_count() {
        let d = parse_libsvm("1 2:1\n".as_bytes(), "t", Some(10)).unwrap();
        assert_eq!(d.num_cols(), 10);
        assert!(parse_libsvm("1 20:1\n".as_bytes(), "t", Some(10)).is_err());
    }

    #[test]
    fn partitions() {
        let r = |v: &[(usize, usize)]| v.iter().map(|(a, b)| *a..*b).collect::<Vec<_>>();
        assert_eq!(Partition::even(10, Axis::Rows, 2).unwrap().ranges, r(&[(0, 5), (5, 10)]));
        assert_eq!(Partition::even(10, Axis::Rows, 3).unwrap().ranges, r(&[(0, 4), (4, 7), (7, 10)]));
        assert_eq!(Partition::even(10, Axis::Rows, 1).unwrap().ranges, r(&[(0, 10)]));
        assert!(matches!(Partition::even(3, Axis::Cols, 4), Err(Error::Config(_))));
        assert!(Partition::even(3, Axis::Cols, 0).is_err());
    }

    #[test]
    fn identity_stats() {
        let d = LabeledDataset::new(CsrMatrix::identity(2), vec![1.0, -1.0], "id").unwrap();
        let s = dataset_stats(&d);
        assert_eq!((s.num_rows, s.num_cols, s.nnz), (2, 2, 2));
        assert_eq!(s.density_percent, 50.0);
    }

    #[test]
    fn binary_label_check() {
        let d = parse("1 1:1\n-1 1:2\n").unwrap();
        assert!(d.require_binary_labels().is_ok());
        let d = parse("1 1:1\n0.5 1:2\n").unwrap();
        assert!(matches!(d.require_binary_labels(), Err(Error::Config(_))));
    }
}
