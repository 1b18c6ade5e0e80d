//! User-facing SDP description and its compilation to standard conic form.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::sdp::standard::{Cone, RawTerms, StdConstraint, StdForm};

/// Index of a variable block inside an [`SdpProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Hermitian `X >= 0`.
    Psd,
    /// Hermitian `0 <= X <= I`.
    Box,
    /// Real vector `x >= 0`; coefficients use the diagonal entries only.
    Nonneg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

/// Which real coordinate of a Hermitian entry a functional reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Sparse Hermitian coefficient matrix `A`; the functional is `Tr(A X)`.
///
/// Both triangles are stored explicitly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coef {
    pub(crate) entries: Vec<(usize, usize, C64)>,
}

impl Coef {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)` (once on the diagonal,
    /// where only the real part is kept).
    pub fn add(&mut self, i: usize, j: usize, v: C64) -> &mut Self {
        if i == j {
            self.entries.push((i, i, C64::new(v.re, 0.0)));
        } else {
            self.entries.push((i, j, v));
            self.entries.push((j, i, v.conj()));
        }
        self
    }

    /// `X_ii` with weight `w`.
    pub fn diag(i: usize, w: f64) -> Self {
        let mut c = Self::new();
        c.add(i, i, C64::new(w, 0.0));
        c
    }

    /// `Re X_ij` or `Im X_ij` (for `i == j` only `Re` is meaningful).
    pub fn part(i: usize, j: usize, part: Part) -> Self {
        let mut c = Self::new();
        c.add_part(i, j, part, 1.0);
        c
    }

    /// Adds `w * Re X_ij` or `w * Im X_ij`.
    pub fn add_part(&mut self, i: usize, j: usize, part: Part, w: f64) -> &mut Self {
        if i == j {
            if part == Part::Re {
                self.entries.push((i, i, C64::new(w, 0.0)));
            }
            return self;
        }
        match part {
            Part::Re => {
                self.entries.push((i, j, C64::new(0.5 * w, 0.0)));
                self.entries.push((j, i, C64::new(0.5 * w, 0.0)));
            }
            Part::Im => {
                self.entries.push((i, j, C64::new(0.0, 0.5 * w)));
                self.entries.push((j, i, C64::new(0.0, -0.5 * w)));
            }
        }
        self
    }

    /// `Tr X` scaled by `w`.
    pub fn trace(n: usize, w: f64) -> Self {
        let mut c = Self::new();
        for i in 0..n {
            c.add(i, i, C64::new(w, 0.0));
        }
        c
    }

    /// Dense Hermitian coefficient; entries below `1e-300` are dropped.
    pub fn dense(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut c = Self::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v.norm() > 1e-300 {
                    c.entries.push((i, j, if i == j { C64::new(v.re, 0.0) } else { v }));
                }
            }
        }
        c
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for e in &mut self.entries {
            e.2 *= s;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Evaluates `Tr(A X)` on a dense matrix.
    pub fn eval(&self, x: &ComplexMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, a)| a.re * x[(i, j)].re + a.im * x[(i, j)].im)
            .sum()
    }

    /// Evaluates on a nonnegative vector block (diagonal entries).
    pub fn eval_vec(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == e.1)
            .map(|&(i, _, a)| a.re * x[i])
            .sum()
    }

    fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.0.max(e.1)).max()
    }
}

#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub dim: usize,
    pub kind: BlockKind,
}

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub terms: Vec<(BlockId, Coef)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear objective over PSD / box / nonnegative blocks with scalar linear
/// constraints.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub(crate) blocks: Vec<BlockSpec>,
    pub(crate) objective: Vec<(BlockId, Coef)>,
    pub(crate) direction: Objective,
    pub(crate) constraints: Vec<LinearConstraint>,
}

impl SdpProblem {
    pub fn new(direction: Objective) -> Self {
        Self {
            blocks: Vec::new(),
            objective: Vec::new(),
            direction,
            constraints: Vec::new(),
        }
    }

    pub fn add_block(&mut self, dim: usize, kind: BlockKind) -> BlockId {
        self.blocks.push(BlockSpec { dim, kind });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_objective(&mut self, block: BlockId, coef: Coef) -> &mut Self {
        self.objective.push((block, coef));
        self
    }

    /// Adds a constraint and returns its index.
    pub fn add_constraint(&mut self, terms: Vec<(BlockId, Coef)>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(LinearConstraint { terms, sense, rhs });
        self.constraints.len() - 1
    }

    /// Entrywise equality `sum_t L_t(X_t) = rhs` for `n x n` Hermitian
    /// expressions. `term` maps `(i, j, part)` to the terms of that real
    /// coordinate. Returns the constraint indices in row-major upper order.
    pub fn add_hermitian_equality(
        &mut self,
        n: usize,
        rhs: &ComplexMatrix,
        mut term: impl FnMut(usize, usize, Part) -> Vec<(BlockId, Coef)>,
    ) -> Vec<usize> {
        let mut ids = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in i..n {
                ids.push(self.add_constraint(term(i, j, Part::Re), Sense::Eq, rhs[(i, j)].re));
                if i != j {
                    ids.push(self.add_constraint(term(i, j, Part::Im), Sense::Eq, rhs[(i, j)].im));
                }
            }
        }
        ids
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn direction(&self) -> Objective {
        self.direction
    }

    /// Checks dimensions and index ranges.
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidArgument("problem has no variable blocks".into()));
        }
        if self.blocks.iter().any(|b| b.dim == 0) {
            return Err(Error::InvalidArgument("zero-sized block".into()));
        }
        let check = |b: BlockId, c: &Coef| -> Result<()> {
            let spec = self
                .blocks
                .get(b.0)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown block {}", b.0)))?;
            if let Some(mx) = c.max_index() {
                if mx >= spec.dim {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient index {mx} outside block of size {}",
                        spec.dim
                    )));
                }
            }
            if c.entries.iter().any(|e| !e.2.re.is_finite() || !e.2.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if spec.kind == BlockKind::Nonneg && c.entries.iter().any(|e| e.0 != e.1) {
                return Err(Error::InvalidArgument(
                    "nonnegative blocks only take diagonal coefficients".into(),
                ));
            }
            Ok(())
        };
        for (b, c) in &self.objective {
            check(*b, c)?;
        }
        for con in &self.constraints {
            if !con.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for (b, c) in &con.terms {
                check(*b, c)?;
            }
        }
        Ok(())
    }

    /// Lowers to `min <C, X> s.t. <A_k, X> = b_k, X in K`.
    pub(crate) fn compile(&self) -> Result<Compiled> {
        self.validate()?;
        let mut cones = Vec::new();
        let mut block_cone = Vec::with_capacity(self.blocks.len());
        let mut box_slack = Vec::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            match b.kind {
                BlockKind::Psd => {
                    block_cone.push(cones.len());
                    cones.push(Cone::Psd(b.dim));
                }
                BlockKind::Nonneg => {
                    block_cone.push(cones.len());
                    cones.push(Cone::Nonneg(b.dim));
                }
                BlockKind::Box => {
                    block_cone.push(cones.len());
                    cones.push(Cone::Psd(b.dim));
                    box_slack.push((bi, cones.len()));
                    cones.push(Cone::Psd(b.dim));
                }
            }
        }
        let n_ineq = self
            .constraints
            .iter()
            .filter(|c| c.sense != Sense::Eq)
            .count();
        let slack_cone = (n_ineq > 0).then(|| {
            cones.push(Cone::Nonneg(n_ineq));
            cones.len() - 1
        });

        let sign = match self.direction {
            Objective::Minimize => 1.0,
            Objective::Maximize => -1.0,
        };
        let mut objective: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); cones.len()];
        for (b, c) in &self.objective {
            let cone = block_cone[b.0];
            objective[cone].extend(c.entries.iter().map(|&(i, j, v)| (i, j, v * sign)));
        }

        let mut constraints = Vec::new();
        let mut b = Vec::new();
        let mut slack_idx = 0;
        for con in &self.constraints {
            let mut parts: RawTerms = Vec::new();
            for (blk, c) in &con.terms {
                let cone = block_cone[blk.0];
                match parts.iter_mut().find(|p| p.0 == cone) {
                    Some(p) => p.1.extend_from_slice(&c.entries),
                    None => parts.push((cone, c.entries.clone())),
                }
            }
            if con.sense != Sense::Eq {
                let s = if con.sense == Sense::Le { 1.0 } else { -1.0 };
                parts.push((
                    slack_cone.expect("slack cone exists"),
                    vec![(slack_idx, slack_idx, C64::new(s, 0.0))],
                ));
                slack_idx += 1;
            }
            constraints.push(StdConstraint::new(parts));
            b.push(con.rhs);
        }
        let user_constraints = constraints.len();
        for &(bi, scone) in &box_slack {
            let n = self.blocks[bi].dim;
            let xcone = block_cone[bi];
            for i in 0..n {
                for j in i..n {
                    for part in [Part::Re, Part::Im] {
                        if i == j && part == Part::Im {
                            continue;
                        }
                        let c = Coef::part(i, j, part);
                        constraints.push(StdConstraint::new(vec![
                            (xcone, c.entries.clone()),
                            (scone, c.entries),
                        ]));
                        b.push(if i == j { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        Ok(Compiled {
            form: StdForm::new(cones, objective, constraints, b),
            block_cone,
            user_constraints,
            sign,
        })
    }
}

pub(crate) struct Compiled {
    pub form: StdForm,
    pub block_cone: Vec<usize>,
    pub user_constraints: usize,
    pub sign: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn part_functionals_read_entries() {
        let x = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(i as f64 + 1.0, 0.0)
            } else if i < j {
                C64::new(0.3 * (i + j) as f64, 0.7 * j as f64)
            } else {
                C64::new(0.3 * (i + j) as f64, -0.7 * i as f64)
            }
        });
        assert!((Coef::part(0, 2, Part::Re).eval(&x) - x[(0, 2)].re).abs() < 1e-15);
        assert!((Coef::part(0, 2, Part::Im).eval(&x) - x[(0, 2)].im).abs() < 1e-15);
        assert!((Coef::part(1, 1, Part::Re).eval(&x) - 2.0).abs() < 1e-15);
        assert!((Coef::trace(3, 1.0).eval(&x) - 6.0).abs() < 1e-15);
        let d = Coef::dense(&x);
        assert!((d.eval(&x) - x.trace_product(&x).re).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_out_of_range_indices() {
        let mut p = SdpProblem::new(Objective::Minimize);
        let b = p.add_block(2, BlockKind::Psd);
        p.add_constraint(vec![(b, Coef::diag(2, 1.0))], Sense::Eq, 1.0);
        assert!(p.validate().is_err());
        assert!(SdpProblem::new(Objective::Minimize).validate().is_err());
    }
}
