use crate::curvature::CurvaturePair;
use crate::symkit::{vec_dot, vec_norm, SymMat};

/// Curvature-condition tolerance: updates with
/// `y . s <= eps_y ||y|| ||s||` are skipped.
pub const DEFAULT_EPS_Y: f64 = 0.5;

/// Classical BFGS update
/// `B+ = B - (B s)(B s)^T / (s . B s) + y y^T / (y . s)`,
/// used as the baseline the Bayesian estimate is compared against. The
/// update is skipped (returning `b` unchanged) when the curvature condition
/// fails, which also covers `y . s <= 0`.
pub fn bfgs_update(b: &SymMat, pair: &CurvaturePair, eps_y: f64) -> SymMat {
    assert_eq!(b.dim(), pair.s.len(), "dimension mismatch");
    let s = &pair.s;
    let y = &pair.y_bar;
    let ys = vec_dot(y, s);
    if ys <= eps_y * vec_norm(y) * vec_norm(s) {
        return b.clone();
    }
    let bs = b.matvec(s);
    let sbs = vec_dot(s, &bs);
    let mut next = b.clone();
    next.axpy(-1.0 / sbs, &SymMat::sym_outer(&bs, &bs));
    next.axpy(1.0 / ys, &SymMat::sym_outer(y, y));
    next
}
