//! Standard conic form `min <C, X> s.t. <A_k, X> = b_k, X in K` where `K` is
//! a product of Hermitian PSD cones and nonnegative orthants.

use std::collections::BTreeMap;

use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cone {
    Psd(usize),
    Nonneg(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Psd(n) | Cone::Nonneg(n) => n,
        }
    }

    pub fn zero(&self) -> Block {
        match *self {
            Cone::Psd(n) => Block::Psd(ComplexMatrix::zeros(n, n)),
            Cone::Nonneg(n) => Block::Lp(vec![0.0; n]),
        }
    }

    pub fn identity(&self, s: f64) -> Block {
        match *self {
            Cone::Psd(n) => Block::Psd(ComplexMatrix::identity(n).scale(s)),
            Cone::Nonneg(n) => Block::Lp(vec![s; n]),
        }
    }
}

/// One cone's component of a point.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Block {
    Psd(ComplexMatrix),
    Lp(Vec<f64>),
}

impl Block {
    pub fn psd(&self) -> &ComplexMatrix {
        match self {
            Block::Psd(m) => m,
            Block::Lp(_) => panic!("expected a PSD block"),
        }
    }

    /// Real inner product `Re Tr(A^dagger B)` or the vector dot product.
    pub fn inner(&self, other: &Block) -> f64 {
        match (self, other) {
            (Block::Psd(a), Block::Psd(b)) => a.inner(b),
            (Block::Lp(a), Block::Lp(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            _ => panic!("cone mismatch"),
        }
    }

    pub fn axpy(&mut self, s: f64, other: &Block) {
        match (self, other) {
            (Block::Psd(a), Block::Psd(b)) => a.axpy(C64::new(s, 0.0), b),
            (Block::Lp(a), Block::Lp(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += s * y;
                }
            }
            _ => panic!("cone mismatch"),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Block::Psd(a) => a.max_abs(),
            Block::Lp(a) => a.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// Sparse coefficients of one constraint restricted to one cone.
#[derive(Clone, Debug)]
pub(crate) struct Part {
    pub cone: usize,
    pub entries: Vec<(usize, usize, C64)>,
    /// Entries grouped by row: `(row, [(col, value)])`.
    pub by_row: Vec<(usize, Vec<(usize, C64)>)>,
}

#[derive(Clone, Debug)]
pub(crate) struct StdConstraint {
    pub parts: Vec<Part>,
}

/// Coefficients of one constraint grouped by cone: `(cone, [(i, j, value)])`.
pub type RawTerms = Vec<(usize, Vec<(usize, usize, C64)>)>;

impl StdConstraint {
    /// Merges duplicate positions and drops exact zeros.
    pub fn new(raw: RawTerms) -> Self {
        let mut merged: BTreeMap<usize, BTreeMap<(usize, usize), C64>> = BTreeMap::new();
        for (cone, entries) in raw {
            let slot = merged.entry(cone).or_default();
            for (i, j, v) in entries {
                *slot.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        let parts = merged
            .into_iter()
            .map(|(cone, m)| {
                let entries: Vec<_> = m
                    .into_iter()
                    .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                    .map(|((i, j), v)| (i, j, v))
                    .collect();
                let mut by_row: Vec<(usize, Vec<(usize, C64)>)> = Vec::new();
                for &(i, j, v) in &entries {
                    match by_row.last_mut() {
                        Some((r, cols)) if *r == i => cols.push((j, v)),
                        _ => by_row.push((i, vec![(j, v)])),
                    }
                }
                Part {
                    cone,
                    entries,
                    by_row,
                }
            })
            .filter(|p| !p.entries.is_empty())
            .collect();
        Self { parts }
    }

    pub fn frobenius_on(&self, cone: usize) -> f64 {
        self.parts
            .iter()
            .filter(|p| p.cone == cone)
            .flat_map(|p| p.entries.iter())
            .map(|e| e.2.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StdForm {
    pub cones: Vec<Cone>,
    pub c: Vec<Block>,
    pub a: Vec<StdConstraint>,
    pub b: Vec<f64>,
    /// For every cone, the `(constraint, part index)` pairs touching it.
    pub touch: Vec<Vec<(usize, usize)>>,
    /// For every PSD cone, the union of coefficient positions.
    pub pattern: Vec<Vec<(usize, usize)>>,
}

impl StdForm {
    pub fn new(
        cones: Vec<Cone>,
        objective: Vec<Vec<(usize, usize, C64)>>,
        a: Vec<StdConstraint>,
        b: Vec<f64>,
    ) -> Self {
        let c = cones
            .iter()
            .zip(objective)
            .map(|(cone, entries)| {
                let mut blk = cone.zero();
                match &mut blk {
                    Block::Psd(m) => {
                        for (i, j, v) in entries {
                            m[(i, j)] += v;
                        }
                    }
                    Block::Lp(x) => {
                        for (i, j, v) in entries {
                            if i == j {
                                x[i] += v.re;
                            }
                        }
                    }
                }
                blk
            })
            .collect();
        let mut touch = vec![Vec::new(); cones.len()];
        for (k, con) in a.iter().enumerate() {
            for (pi, p) in con.parts.iter().enumerate() {
                touch[p.cone].push((k, pi));
            }
        }
        let pattern = cones
            .iter()
            .enumerate()
            .map(|(ci, cone)| match cone {
                Cone::Psd(n) => {
                    let mut seen = vec![false; n * n];
                    let mut pat = Vec::new();
                    for &(k, pi) in &touch[ci] {
                        for &(i, j, _) in &a[k].parts[pi].entries {
                            if !seen[i * n + j] {
                                seen[i * n + j] = true;
                                pat.push((i, j));
                            }
                        }
                    }
                    pat.sort_unstable();
                    pat
                }
                Cone::Nonneg(_) => Vec::new(),
            })
            .collect();
        Self {
            cones,
            c,
            a,
            b,
            touch,
            pattern,
        }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Barrier degree: total order of the cone.
    pub fn nu(&self) -> f64 {
        self.cones.iter().map(Cone::dim).sum::<usize>() as f64
    }

    /// `A(X)`.
    pub fn apply(&self, x: &[Block]) -> Vec<f64> {
        self.a
            .iter()
            .map(|con| {
                con.parts
                    .iter()
                    .map(|p| match &x[p.cone] {
                        Block::Psd(m) => p
                            .entries
                            .iter()
                            .map(|&(i, j, a)| a.re * m[(i, j)].re + a.im * m[(i, j)].im)
                            .sum::<f64>(),
                        Block::Lp(v) => p.entries.iter().map(|&(i, _, a)| a.re * v[i]).sum(),
                    })
                    .sum()
            })
            .collect()
    }

    /// `A^*(y) = sum_k y_k A_k`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<Block> {
        let mut out: Vec<Block> = self.cones.iter().map(Cone::zero).collect();
        for (con, &yk) in self.a.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for p in &con.parts {
                match &mut out[p.cone] {
                    Block::Psd(m) => {
                        for &(i, j, a) in &p.entries {
                            m[(i, j)] += a * yk;
                        }
                    }
                    Block::Lp(v) => {
                        for &(i, _, a) in &p.entries {
                            v[i] += a.re * yk;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn objective(&self, x: &[Block]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c.inner(x)).sum()
    }
}

pub(crate) fn inner_all(a: &[Block], b: &[Block]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

pub(crate) fn norm_all(a: &[Block]) -> f64 {
    a.iter().map(Block::norm_sq).sum::<f64>().sqrt()
}
