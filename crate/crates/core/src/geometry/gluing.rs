//! Neumann-Zagier gluing systems: edge rows built internally, cusp rows
//! ingested from a gluing-data file, and the full-rank row selection the
//! Newton solver works with.

use crate::error::{Error, Result};
use crate::numeric::{intmat, IMat};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Edge,
    Cusp,
}

/// One row of `z^A z''^B = (-1)^nu`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluingRow {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub nu: i64,
    pub kind: RowKind,
}

#[derive(Clone, Debug)]
pub struct GluingSystem {
    pub num_tets: usize,
    pub rows: Vec<GluingRow>,
}

/// Ingested gluing data: equation rows plus low-precision shape seeds,
/// field-compatible with standard gluing-equation exports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluingFile {
    pub num_tetrahedra: usize,
    pub rows: Vec<GluingRow>,
    pub seeds: Vec<SeedShape>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedShape {
    pub re: String,
    pub im: String,
}

impl GluingSystem {
    /// Assemble from internally built edge rows and an ingested file:
    /// the file's edge rows must match the internal ones up to order,
    /// and its cusp rows are adopted.
    pub fn assemble(edge_rows: Vec<GluingRow>, file: &GluingFile) -> Result<GluingSystem> {
        let n = if edge_rows.is_empty() {
            file.num_tetrahedra
        } else {
            edge_rows[0].a.len()
        };
        if file.num_tetrahedra != n {
            return Err(Error::BadInput(format!(
                "gluing file has {} tetrahedra, complex has {n}",
                file.num_tetrahedra
            )));
        }
        let mut unmatched: Vec<&GluingRow> = file
            .rows
            .iter()
            .filter(|r| r.kind == RowKind::Edge)
            .collect();
        for row in &edge_rows {
            let pos = unmatched
                .iter()
                .position(|r| r.a == row.a && r.b == row.b && r.nu == row.nu);
            match pos {
                Some(p) => {
                    unmatched.remove(p);
                }
                None => {
                    return Err(Error::BadInput(
                        "internal edge equation missing from ingested gluing data".into(),
                    ))
                }
            }
        }
        if !unmatched.is_empty() {
            return Err(Error::BadInput(
                "ingested gluing data has extra edge equations".into(),
            ));
        }
        let mut rows = edge_rows;
        for r in file.rows.iter().filter(|r| r.kind == RowKind::Cusp) {
            if r.a.len() != n || r.b.len() != n {
                return Err(Error::BadInput("cusp row has wrong length".into()));
            }
            rows.push(r.clone());
        }
        Ok(GluingSystem { num_tets: n, rows })
    }

    /// (A|B) as one integer matrix.
    pub fn ab_matrix(&self) -> IMat {
        let n = self.num_tets;
        let mut m = IMat::zero(self.rows.len(), 2 * n);
        for (i, r) in self.rows.iter().enumerate() {
            for j in 0..n {
                m[(i, j)] = r.a[j];
                m[(i, n + j)] = r.b[j];
            }
        }
        m
    }

    /// Select a square full-rank subsystem: greedy over rows, preferring
    /// cusp rows last (edge rows carry the combinatorics; cusp rows top
    /// up the rank). Errors when the total rank is deficient.
    pub fn select_square(&self) -> Result<Vec<usize>> {
        let n = self.num_tets;
        let mut picked: Vec<usize> = Vec::new();
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let order: Vec<usize> = {
            let mut edge: Vec<usize> = (0..self.rows.len())
                .filter(|&i| self.rows[i].kind == RowKind::Edge)
                .collect();
            let cusp: Vec<usize> = (0..self.rows.len())
                .filter(|&i| self.rows[i].kind == RowKind::Cusp)
                .collect();
            edge.extend(cusp);
            edge
        };
        for i in order {
            if picked.len() == n {
                break;
            }
            let r = &self.rows[i];
            let mut cand: Vec<i64> = r.a.clone();
            cand.extend(r.b.iter().cloned());
            rows.push(cand);
            let m = IMat::from_rows(rows.clone());
            if intmat::rank(&m) == rows.len() {
                picked.push(i);
            } else {
                rows.pop();
            }
        }
        if picked.len() != n {
            return Err(Error::RankDeficient);
        }
        Ok(picked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_square_drops_dependent_rows() {
        // two identical edge rows plus one cusp row on 2 tets
        let e = GluingRow {
            a: vec![1, 1],
            b: vec![1, 1],
            nu: 0,
            kind: RowKind::Edge,
        };
        let c = GluingRow {
            a: vec![1, 0],
            b: vec![0, -1],
            nu: 0,
            kind: RowKind::Cusp,
        };
        let sys = GluingSystem {
            num_tets: 2,
            rows: vec![e.clone(), e, c],
        };
        let sel = sys.select_square().unwrap();
        assert_eq!(sel.len(), 2);
        assert!(sel.contains(&0));
        assert!(sel.contains(&2));
    }
}
