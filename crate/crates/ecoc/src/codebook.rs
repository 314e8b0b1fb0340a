//! Ternary codebooks: construction, distances, validation, serialization.
//!
//! A codebook is a `k x L` matrix over `{-1, 0, +1}`. Row `r` is the codeword
//! of class `r`; column `c` defines one binary task that separates the
//! classes marked `+1` from those marked `-1`, ignoring classes marked `0`.
//!
//! All distances use the generalized Hamming metric
//! `d(u, v) = sum_i (1 - u_i * v_i) / 2`, in which agreeing signs contribute
//! 0, opposing signs contribute 1, and any position where either entry is 0
//! contributes 1/2. On pure sign vectors this is the ordinary Hamming
//! distance.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Entry domain of a codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// Entries in `{-1, +1}`.
    Binary,
    /// Entries in `{-1, 0, +1}`.
    Ternary,
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Binary => write!(f, "binary"),
            Alphabet::Ternary => write!(f, "ternary"),
        }
    }
}

/// Provenance carried alongside a codebook through serialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CodebookMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_tau: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

impl CodebookMetadata {
    fn is_empty(&self) -> bool {
        *self == CodebookMetadata::default()
    }
}

/// A `k x L` code matrix over `{-1, 0, +1}` with provenance metadata.
///
/// Construction only enforces shape and entry domain; structural soundness
/// (distinct rows, columns covering both signs, no duplicate or, for binary
/// codebooks, negated columns) is reported by [`Codebook::validate`] so that
/// defective matrices can be represented, inspected, and repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    k: usize,
    n_columns: usize,
    alphabet: Alphabet,
    /// Row-major, length `k * n_columns`.
    entries: Vec<i8>,
    pub metadata: CodebookMetadata,
}

/// Structural defect found by [`Codebook::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodebookViolation {
    ZeroEntryInBinary { row: usize, column: usize },
    IdenticalRows { a: usize, b: usize },
    ColumnMissingPlus { column: usize },
    ColumnMissingMinus { column: usize },
    IdenticalColumns { a: usize, b: usize },
    ComplementaryColumns { a: usize, b: usize },
}

impl fmt::Display for CodebookViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CodebookViolation::*;
        match self {
            ZeroEntryInBinary { row, column } => {
                write!(f, "zero entry at ({row}, {column}) in a binary codebook")
            }
            IdenticalRows { a, b } => write!(f, "rows {a} and {b} are identical"),
            ColumnMissingPlus { column } => write!(f, "column {column} has no +1 entry"),
            ColumnMissingMinus { column } => write!(f, "column {column} has no -1 entry"),
            IdenticalColumns { a, b } => write!(f, "columns {a} and {b} are identical"),
            ComplementaryColumns { a, b } => {
                write!(f, "columns {a} and {b} are entrywise negations")
            }
        }
    }
}

/// Pairwise distance matrices of a codebook.
#[derive(Debug, Clone)]
pub struct DistanceSummary {
    /// `k x k`, symmetric, zero diagonal.
    pub row_distances: Vec<Vec<f64>>,
    /// `L x L`, symmetric, zero diagonal.
    pub column_distances: Vec<Vec<f64>>,
    /// Minimum off-diagonal row distance; the design objective.
    pub min_row_distance: f64,
}

/// Generalized Hamming distance between two `{-1, 0, +1}` slices.
pub fn generalized_hamming(u: &[i8], v: &[i8]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut twice: i32 = 0;
    for (&a, &b) in u.iter().zip(v) {
        twice += i32::from(1 - a * b);
    }
    f64::from(twice) / 2.0
}

impl Codebook {
    /// Builds a codebook from row-major entries. Fails on shape mismatch or
    /// entries outside `{-1, 0, +1}`.
    pub fn from_entries(
        k: usize,
        n_columns: usize,
        alphabet: Alphabet,
        entries: Vec<i8>,
    ) -> Result<Codebook> {
        if k < 2 {
            return Err(Error::invalid("codebook", format!("need k >= 2 rows, got {k}")));
        }
        if n_columns == 0 {
            return Err(Error::EmptyCodebook {
                context: "codebook construction with zero columns".into(),
            });
        }
        if entries.len() != k * n_columns {
            return Err(Error::invalid(
                "codebook",
                format!("{k}x{n_columns} needs {} entries, got {}", k * n_columns, entries.len()),
            ));
        }
        if let Some(pos) = entries.iter().position(|e| !(-1..=1).contains(e)) {
            return Err(Error::invalid(
                "codebook",
                format!("entry {} at flat index {pos} is outside {{-1, 0, +1}}", entries[pos]),
            ));
        }
        Ok(Codebook {
            k,
            n_columns,
            alphabet,
            entries,
            metadata: CodebookMetadata::default(),
        })
    }

    /// Builds a codebook from equal-length rows.
    pub fn from_rows(rows: Vec<Vec<i8>>, alphabet: Alphabet) -> Result<Codebook> {
        let k = rows.len();
        let n_columns = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_columns) {
            return Err(Error::invalid("codebook", "rows have unequal lengths".to_string()));
        }
        let entries = rows.into_iter().flatten().collect();
        Codebook::from_entries(k, n_columns, alphabet, entries)
    }

    /// Canonical exhaustive binary code on `k` classes: `2^(k-1) - 1`
    /// columns, every class dichotomy with row 0 fixed to `+1`, exactly once.
    ///
    /// Column `c` encodes the integer `c` in binary on rows `1..k` with bit 1
    /// mapped to `+1`, row 1 carrying the most significant bit. The all-ones
    /// pattern `c = 2^(k-1) - 1` duplicates no dichotomy and is excluded by
    /// the column count.
    pub fn exhaustive(k: usize) -> Result<Codebook> {
        if !(2..=20).contains(&k) {
            return Err(Error::SizeLimit {
                what: "exhaustive codebook",
                param: "k",
                min: 2,
                max: 20,
                value: k,
            });
        }
        let n_columns = (1usize << (k - 1)) - 1;
        let mut entries = vec![0i8; k * n_columns];
        entries[..n_columns].fill(1);
        for i in 1..k {
            let row = &mut entries[i * n_columns..(i + 1) * n_columns];
            let shift = k - 1 - i;
            for (c, e) in row.iter_mut().enumerate() {
                *e = if (c >> shift) & 1 == 1 { 1 } else { -1 };
            }
        }
        let mut m = Codebook::from_entries(k, n_columns, Alphabet::Binary, entries)?;
        m.metadata.generator = Some("exhaustive".into());
        Ok(m)
    }

    /// One-vs-all binary code: column `c` puts class `c` against the rest.
    ///
    /// For `k >= 3` this is the `k x k` sign matrix with `+1` on the
    /// diagonal. For `k = 2` the two such columns would be negations of each
    /// other, so the code degenerates to the single column `[+1, -1]`.
    pub fn one_vs_all(k: usize) -> Result<Codebook> {
        if k < 2 {
            return Err(Error::invalid("one-vs-all codebook", format!("need k >= 2, got {k}")));
        }
        let n_columns = if k == 2 { 1 } else { k };
        let mut entries = vec![-1i8; k * n_columns];
        for c in 0..n_columns {
            entries[c * n_columns + c] = 1;
        }
        let mut m = Codebook::from_entries(k, n_columns, Alphabet::Binary, entries)?;
        m.metadata.generator = Some("one-vs-all".into());
        Ok(m)
    }

    /// One-vs-one ternary code: one column per unordered class pair `(p, q)`
    /// with `p < q` in lexicographic order, `+1` at `p`, `-1` at `q`, `0`
    /// elsewhere.
    pub fn one_vs_one(k: usize) -> Result<Codebook> {
        if k < 2 {
            return Err(Error::invalid("one-vs-one codebook", format!("need k >= 2, got {k}")));
        }
        let n_columns = k * (k - 1) / 2;
        let mut entries = vec![0i8; k * n_columns];
        let mut c = 0;
        for p in 0..k {
            for q in p + 1..k {
                entries[p * n_columns + c] = 1;
                entries[q * n_columns + c] = -1;
                c += 1;
            }
        }
        let mut m = Codebook::from_entries(k, n_columns, Alphabet::Ternary, entries)?;
        m.metadata.generator = Some("one-vs-one".into());
        Ok(m)
    }

    /// Draws `trials` random codebooks and keeps the structurally valid one
    /// with the largest minimum row distance (first drawn wins ties).
    ///
    /// Dense draws put `+1` or `-1` with probability 1/2 each; sparse draws
    /// put `0` with probability 1/2 and each sign with probability 1/4. Fails
    /// if no trial passes [`Codebook::validate`].
    pub fn random(
        k: usize,
        n_columns: usize,
        alphabet: Alphabet,
        trials: usize,
        seed: u64,
    ) -> Result<Codebook> {
        if trials == 0 {
            return Err(Error::invalid("random codebook", "need at least one trial".to_string()));
        }
        let mut best: Option<(f64, Codebook)> = None;
        for m in random_candidates(k, n_columns, alphabet, seed).take(trials) {
            let m = m?;
            if !m.validate().is_empty() {
                continue;
            }
            let d = m.distance_summary().min_row_distance;
            if best.as_ref().map_or(true, |(bd, _)| d > *bd) {
                best = Some((d, m));
            }
        }
        match best {
            Some((_, mut m)) => {
                m.metadata.generator = Some(match alphabet {
                    Alphabet::Binary => "random-dense".into(),
                    Alphabet::Ternary => "random-sparse".into(),
                });
                m.metadata.seed = Some(seed);
                Ok(m)
            }
            None => Err(Error::GenerationExhausted { trials }),
        }
    }

    /// Keeps the columns whose sign counts satisfy `|#(+1) - #(-1)| <= tau`,
    /// preserving order. Fails if nothing survives.
    pub fn filter_balanced(&self, tau: u32) -> Result<Codebook> {
        let keep: Vec<usize> = (0..self.n_columns)
            .filter(|&c| {
                let (mut plus, mut minus) = (0i64, 0i64);
                for r in 0..self.k {
                    match self.get(r, c) {
                        1 => plus += 1,
                        -1 => minus += 1,
                        _ => {}
                    }
                }
                (plus - minus).unsigned_abs() <= u64::from(tau)
            })
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyCodebook {
                context: format!("balance filter tau={tau} removed all {} columns", self.n_columns),
            });
        }
        let mut entries = Vec::with_capacity(self.k * keep.len());
        for r in 0..self.k {
            entries.extend(keep.iter().map(|&c| self.get(r, c)));
        }
        let mut m = Codebook::from_entries(self.k, keep.len(), self.alphabet, entries)?;
        m.metadata = self.metadata.clone();
        m.metadata.balance_tau = Some(tau);
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn get(&self, row: usize, column: usize) -> i8 {
        self.entries[row * self.n_columns + column]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.n_columns..(row + 1) * self.n_columns]
    }

    pub fn column(&self, column: usize) -> Vec<i8> {
        (0..self.k).map(|r| self.get(r, column)).collect()
    }

    /// Generalized Hamming distance between rows `r` and `s`.
    pub fn row_distance(&self, r: usize, s: usize) -> f64 {
        generalized_hamming(self.row(r), self.row(s))
    }

    /// Generalized Hamming distance between columns `s` and `t`.
    pub fn column_distance(&self, s: usize, t: usize) -> f64 {
        generalized_hamming(&self.column(s), &self.column(t))
    }

    /// Materializes a new codebook from a subset of columns, in the given
    /// order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Codebook> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_columns) {
            return Err(Error::invalid(
                "column selection",
                format!("index {c} out of range for {} columns", self.n_columns),
            ));
        }
        let mut entries = Vec::with_capacity(self.k * columns.len());
        for r in 0..self.k {
            entries.extend(columns.iter().map(|&c| self.get(r, c)));
        }
        let mut m = Codebook::from_entries(self.k, columns.len(), self.alphabet, entries)?;
        m.metadata = self.metadata.clone();
        Ok(m)
    }

    /// Full pairwise row and column distance matrices. Quadratic in each
    /// dimension; intended for design-sized codebooks, not exhaustive codes
    /// at large `k`.
    pub fn distance_summary(&self) -> DistanceSummary {
        let row_distances = symmetric_matrix(self.k, |a, b| self.row_distance(a, b));
        let column_distances = symmetric_matrix(self.n_columns, |a, b| self.column_distance(a, b));
        let mut min_row = f64::INFINITY;
        for a in 0..self.k {
            for b in a + 1..self.k {
                min_row = min_row.min(row_distances[a][b]);
            }
        }
        DistanceSummary {
            row_distances,
            column_distances,
            min_row_distance: min_row,
        }
    }

    /// Reports every structural defect. An empty result means the codebook
    /// satisfies all invariants of its alphabet.
    pub fn validate(&self) -> Vec<CodebookViolation> {
        let mut out = Vec::new();
        if self.alphabet == Alphabet::Binary {
            for r in 0..self.k {
                for c in 0..self.n_columns {
                    if self.get(r, c) == 0 {
                        out.push(CodebookViolation::ZeroEntryInBinary { row: r, column: c });
                    }
                }
            }
        }
        for a in 0..self.k {
            for b in a + 1..self.k {
                if self.row(a) == self.row(b) {
                    out.push(CodebookViolation::IdenticalRows { a, b });
                }
            }
        }
        let mut first_seen: HashMap<Vec<i8>, usize> = HashMap::new();
        for c in 0..self.n_columns {
            let col = self.column(c);
            if !col.contains(&1) {
                out.push(CodebookViolation::ColumnMissingPlus { column: c });
            }
            if !col.contains(&-1) {
                out.push(CodebookViolation::ColumnMissingMinus { column: c });
            }
            if let Some(&a) = first_seen.get(&col) {
                out.push(CodebookViolation::IdenticalColumns { a, b: c });
            } else {
                if self.alphabet == Alphabet::Binary {
                    let negated: Vec<i8> = col.iter().map(|e| -e).collect();
                    if let Some(&a) = first_seen.get(&negated) {
                        out.push(CodebookViolation::ComplementaryColumns { a, b: c });
                    }
                }
                first_seen.insert(col, c);
            }
        }
        out
    }

    /// Plain integer CSV, one row per line, no header.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for r in 0..self.k {
            let line: Vec<String> = self.row(r).iter().map(i8::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses the CSV form. Alphabet is inferred: any zero entry makes the
    /// codebook ternary. Metadata does not survive the CSV round trip.
    pub fn from_csv_str(text: &str, source_name: &str) -> Result<Codebook> {
        let mut rows: Vec<Vec<i8>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let v: i64 = field.trim().parse().map_err(|_| {
                    Error::format(source_name, line_no, format!("'{}' is not an integer", field.trim()))
                })?;
                if !(-1..=1).contains(&v) {
                    return Err(Error::format(
                        source_name,
                        line_no,
                        format!("entry {v} is outside {{-1, 0, +1}}"),
                    ));
                }
                row.push(v as i8);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::format(
                        source_name,
                        line_no,
                        format!("row has {} entries, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::format(source_name, 1, "no rows"));
        }
        let alphabet = if rows.iter().flatten().any(|&e| e == 0) {
            Alphabet::Ternary
        } else {
            Alphabet::Binary
        };
        Codebook::from_rows(rows, alphabet)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Codebook> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Codebook::from_csv_str(&text, &path.display().to_string())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("codebook serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Codebook> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Codebook> {
        Codebook::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// The raw draw stream behind [`Codebook::random`], before validity
/// filtering and selection. Exposed so population statistics of a seed can
/// be recomputed independently of the selection rule.
pub fn random_candidates(
    k: usize,
    n_columns: usize,
    alphabet: Alphabet,
    seed: u64,
) -> impl Iterator<Item = Result<Codebook>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || {
        let entries: Vec<i8> = (0..k * n_columns)
            .map(|_| match alphabet {
                Alphabet::Binary => {
                    if rng.random::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
                Alphabet::Ternary => match rng.random_range(0..4u8) {
                    0 | 1 => 0,
                    2 => 1,
                    _ => -1,
                },
            })
            .collect();
        Codebook::from_entries(k, n_columns, alphabet, entries)
    })
}

fn symmetric_matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = f(a, b);
            m[a][b] = d;
            m[b][a] = d;
        }
    }
    m
}

#[derive(Serialize, Deserialize)]
struct CodebookWire {
    k: usize,
    #[serde(rename = "L")]
    n_columns: usize,
    alphabet: Alphabet,
    entries: Vec<Vec<i8>>,
    #[serde(default, skip_serializing_if = "CodebookMetadata::is_empty")]
    metadata: CodebookMetadata,
}

impl Serialize for Codebook {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CodebookWire {
            k: self.k,
            n_columns: self.n_columns,
            alphabet: self.alphabet,
            entries: (0..self.k).map(|r| self.row(r).to_vec()).collect(),
            metadata: self.metadata.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Codebook {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = CodebookWire::deserialize(deserializer)?;
        let mut m = Codebook::from_rows(wire.entries, wire.alphabet).map_err(serde::de::Error::custom)?;
        if m.k != wire.k || m.n_columns != wire.n_columns {
            return Err(serde::de::Error::custom(format!(
                "declared shape {}x{} does not match entries {}x{}",
                wire.k, wire.n_columns, m.k, m.n_columns
            )));
        }
        m.metadata = wire.metadata;
        Ok(m)
    }
}
