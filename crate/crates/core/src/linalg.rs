//! Exact linear algebra over rationals, sized for the handful of states
//! that the Markov partitions here produce.

use num_traits::{One, Zero};

use crate::scalar::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form, returning the pivot column of each nonzero row.
pub fn rref(mut m: Matrix) -> (Matrix, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let lead = m[row][col].clone();
        for v in m[row].iter_mut() {
            *v = &*v / &lead;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot = m[row].clone();
                for (v, p) in m[r].iter_mut().zip(&pivot) {
                    *v = &*v - &factor * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (m, pivots)
}

/// A basis vector of the kernel when the kernel is one-dimensional.
pub fn null_vector(m: Matrix) -> Option<Vec<Rational>> {
    let cols = m.first().map_or(0, Vec::len);
    let (reduced, pivots) = rref(m);
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -reduced[row][free].clone();
    }
    Some(v)
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| m.iter().map(|row| row[c].clone()).collect())
        .collect()
}

pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

/// `v·M` for a row vector `v`.
pub fn vec_mat(v: &[Rational], m: &Matrix) -> Vec<Rational> {
    mat_vec(&transpose(m), v)
}

pub fn minus_identity(m: &Matrix) -> Matrix {
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| if i == j { v - Rational::one() } else { v.clone() })
                .collect()
        })
        .collect()
}
