//! Linear algebra over GF(2) and over subfields represented inside the big field.

use super::{FieldCtx, FieldElem, Subfield};
use crate::error::{Error, Result};

/// Rank over GF(2) of elements viewed as coefficient bit-vectors.
pub fn gf2_rank(vectors: &[FieldElem]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let bits = first.words().len() * 64;
    // pivots[b] holds a reduced row whose highest set bit is b
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; bits];
    let mut rank = 0;
    for v in vectors {
        let mut row = v.words().to_vec();
        while let Some(top) = super::arith::degree_of(&row) {
            match &pivots[top] {
                Some(p) => {
                    for (a, b) in row.iter_mut().zip(p) {
                        *a ^= b;
                    }
                }
                None => {
                    pivots[top] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// An ordered basis of the full field over one of its subfields.
#[derive(Debug, Clone)]
pub struct BasisOverSubfield {
    subfield: Subfield,
    vectors: Vec<FieldElem>,
}

impl BasisOverSubfield {
    /// Checks the count and independence (via GF(2) rank of all products
    /// with a GF(2)-basis of the subfield) before accepting the vectors.
    pub fn new(ctx: &FieldCtx, subfield: Subfield, vectors: Vec<FieldElem>) -> Result<Self> {
        let m = subfield.degree_bits();
        let want = ctx.degree() / m;
        if vectors.len() != want {
            return Err(Error::NotABasis(format!(
                "{} vectors given, GF(2^{}) over GF(2^{m}) needs {want}",
                vectors.len(),
                ctx.degree()
            )));
        }
        let rank = spanned_rank(ctx, &subfield, &vectors)?;
        if rank != ctx.degree() {
            return Err(Error::NotABasis(format!("GF(2) rank {rank} < {}", ctx.degree())));
        }
        Ok(BasisOverSubfield { subfield, vectors })
    }

    pub fn subfield(&self) -> &Subfield {
        &self.subfield
    }

    pub fn vectors(&self) -> &[FieldElem] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Σ coeffs[i]·vectors[i].
    pub fn combine(&self, ctx: &FieldCtx, coeffs: &[FieldElem]) -> FieldElem {
        let mut acc = ctx.zero();
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            acc.add_assign(&ctx.mul(c, v));
        }
        acc
    }
}

/// GF(2) rank of the subfield span of `vectors`.
pub fn spanned_rank(ctx: &FieldCtx, sub: &Subfield, vectors: &[FieldElem]) -> Result<usize> {
    let sigma = ctx.subfield_gf2_basis(sub)?;
    let mut all = Vec::with_capacity(vectors.len() * sigma.len());
    for v in vectors {
        for s in &sigma {
            all.push(ctx.mul(v, s));
        }
    }
    Ok(gf2_rank(&all))
}

/// Trace-dual basis: Tr(b_i·d_j) = δ_ij with the trace onto the basis subfield.
pub fn dual_basis(ctx: &FieldCtx, b: &BasisOverSubfield) -> Result<BasisOverSubfield> {
    let sub = b.subfield();
    let n = b.len();
    let mut gram = vec![vec![ctx.zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let t = ctx.trace_to(&ctx.mul(&b.vectors[i], &b.vectors[j]), sub);
            debug_assert!(ctx.is_in_subfield(&t, sub));
            gram[i][j] = t.clone();
            gram[j][i] = t;
        }
    }
    let x = invert(ctx, gram)?;
    // The Gram matrix is symmetric, so its inverse is too: d_i = Σ_j X_ij b_j.
    let vectors = x.iter().map(|row| b.combine(ctx, row)).collect();
    Ok(BasisOverSubfield {
        subfield: sub.clone(),
        vectors,
    })
}

/// Gauss-Jordan inversion with "first nonzero" pivoting.
pub fn invert(ctx: &FieldCtx, mut a: Vec<Vec<FieldElem>>) -> Result<Vec<Vec<FieldElem>>> {
    let n = a.len();
    let mut inv: Vec<Vec<FieldElem>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { ctx.one() } else { ctx.zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularGram)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = ctx.inv(&a[col][col])?;
        for j in 0..n {
            a[col][j] = ctx.mul(&a[col][j], &scale);
            inv[col][j] = ctx.mul(&inv[col][j], &scale);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = ctx.mul(&f, &a[col][j]);
                a[r][j].add_assign(&t);
                let t = ctx.mul(&f, &inv[col][j]);
                inv[r][j].add_assign(&t);
            }
        }
    }
    Ok(inv)
}

/// Rebuilds x = Σ traces[j]·dual[j] from the coordinates Tr(b_j·x).
pub fn reconstruct(ctx: &FieldCtx, dual: &BasisOverSubfield, traces: &[FieldElem]) -> FieldElem {
    dual.combine(ctx, traces)
}
