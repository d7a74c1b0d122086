//! Higher-order mean curvatures `H_k`/`sigma_k`, Newton transformations
//! `T_k`, their multi-normal polarizations, and the brute-force
//! generalized-Kronecker-delta oracle that anchors all of them.
//!
//! Sign convention. A packet is built from a shape operator together with
//! the causal sign `eps_nu` of its normal. The principal curvatures are the
//! eigenvalues of `eps_nu * shape`, so for Riemannian normals (`eps = +1`)
//! nothing changes, while for the timelike normal of a spacelike hypersurface
//! in de Sitter space the sign flip makes the slice `{r = r0}` have principal
//! curvatures `-tanh r0`. With this choice one single set of integral
//! identities covers all four ambient families with no per-space sign
//! corrections.
//!
//! Construction strategy: `sigma_k` comes from the stable elementary
//! symmetric recurrence over the eigenvalues; `T_k` is assembled in the
//! eigenbasis (diagonal entries are leave-one-out elementary symmetric
//! functions) and rotated back. The recursion `T_k = H_k I - A T_{k-1}` is
//! kept as a cross-check, not as the construction path. The epsilon oracle
//! evaluates the permutation sums literally and is the correctness anchor
//! for everything here (`m <= 6`).

use crate::error::{LabError, Result};
use crate::immersion::PointFrame;
use crate::linalg::{jacobi_eigen, Mat};

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Principal curvatures, `H_k`, `sigma_k` and Newton transformations of one
/// shape operator.
#[derive(Debug, Clone)]
pub struct CurvaturePacket {
    pub m: usize,
    pub eps_nu: f64,
    /// Principal curvatures (ascending; eigenvalues of `eps_nu * shape`).
    pub lambdas: Vec<f64>,
    /// `H_0..H_m` (elementary symmetric functions of the lambdas).
    pub h: Vec<f64>,
    /// `sigma_k = H_k / C(m,k)`.
    pub sigma: Vec<f64>,
    /// `T_0..T_{m-1}` in the basis the shape operator was given in.
    pub t: Vec<Mat>,
}

impl CurvaturePacket {
    /// Build a packet from a symmetric shape operator and its normal sign.
    pub fn from_shape(shape: &Mat, eps_nu: f64) -> Result<CurvaturePacket> {
        let m = shape.n;
        let scale = shape.frobenius().max(1.0);
        if shape.symmetry_drift() > 1e-12 * scale {
            return Err(LabError::Contract(format!(
                "shape operator asymmetric beyond tolerance (drift {:.2e})",
                shape.symmetry_drift()
            )));
        }
        let adjusted = if eps_nu < 0.0 { shape.scaled(-1.0) } else { shape.symmetrized() };
        let (lambdas, v) = jacobi_eigen(&adjusted)?;

        let h = elementary_symmetric(&lambdas);
        let sigma: Vec<f64> = (0..=m).map(|k| h[k] / binomial(m, k)).collect();

        // T_k diagonal in the eigenbasis: e_k of the other eigenvalues.
        let mut t = Vec::with_capacity(m);
        for k in 0..m {
            let mut diag = vec![0.0; m];
            for (i, d) in diag.iter_mut().enumerate() {
                let others: Vec<f64> = lambdas
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &l)| l)
                    .collect();
                *d = elementary_symmetric(&others)[k];
            }
            let tk = v.matmul(&Mat::diag(&diag)).matmul(&v.transpose());
            t.push(tk.symmetrized());
        }

        Ok(CurvaturePacket { m, eps_nu, lambdas, h, sigma, t })
    }

    /// The sign-adjusted shape operator the packet diagonalized.
    pub fn adjusted_shape(&self, shape: &Mat) -> Mat {
        if self.eps_nu < 0.0 {
            shape.scaled(-1.0)
        } else {
            shape.clone()
        }
    }
}

/// Stable elementary symmetric functions `e_0..e_n` of the given values.
pub fn elementary_symmetric(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &x) in vals.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

const EPS_ORACLE_MAX_DIM: usize = 6;

/// `H_k(nu_1, ..., nu_k)` by the literal permutation sum
/// `(1/k!) sum eps^{i_1..i_k}_{j_1..j_k} A^1_{i_1 j_1} ... A^k_{i_k j_k}`.
pub fn epsilon_h(shape_ops: &[Mat]) -> Result<f64> {
    let k = shape_ops.len();
    if k == 0 {
        return Ok(1.0);
    }
    let m = shape_ops[0].n;
    check_oracle_args(shape_ops, m)?;
    if k > m {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut subset = vec![0usize; k];
    for_each_subset(m, k, &mut subset, &mut |idx: &[usize]| {
        // Sum over arrangements of the subset into the row slots times
        // permutations of the column slots relative to the rows.
        for_each_permutation(idx, &mut |rows: &[usize]| {
            for_each_signed_permutation(rows, &mut |cols: &[usize], sign: f64| {
                let mut prod = sign;
                for t in 0..k {
                    prod *= shape_ops[t][(rows[t], cols[t])];
                }
                total += prod;
            });
        });
    });
    Ok(total / factorial(k))
}

/// `T_k(nu_1, ..., nu_k)` by the literal permutation sum with the extra free
/// index pair. Identically zero for `k = m` (no index tuples remain).
pub fn epsilon_t(shape_ops: &[Mat]) -> Result<Mat> {
    let k = shape_ops.len();
    let m = if k == 0 { 0 } else { shape_ops[0].n };
    if k == 0 {
        return Err(LabError::Argument("epsilon_t needs at least one operator".into()));
    }
    check_oracle_args(shape_ops, m)?;
    let mut t = Mat::zeros(m);
    if k + 1 > m {
        return Ok(t);
    }
    let mut subset = vec![0usize; k + 1];
    for_each_subset(m, k + 1, &mut subset, &mut |idx: &[usize]| {
        for_each_permutation(idx, &mut |rows: &[usize]| {
            for_each_signed_permutation(rows, &mut |cols: &[usize], sign: f64| {
                // Slot 0 is the free (i, j) pair of T^i_j.
                let mut prod = sign;
                for t_slot in 0..k {
                    prod *= shape_ops[t_slot][(rows[t_slot + 1], cols[t_slot + 1])];
                }
                // (T_k)^i_j accumulates at row j, column i: the matrix acts as
                // T(e_i) = sum_j T^j_i e_j; we store T[(i,j)] = T_i^j acting on
                // row vectors consistently with Mat::apply. Using symmetric
                // operators in orthonormal bases, T is symmetric anyway.
                t[(rows[0], cols[0])] += prod;
            });
        });
    });
    Ok(t.scaled(1.0 / factorial(k)))
}

/// Ground-truth `(H_k, T_k)` for a list of `k` shape operators.
pub fn epsilon_oracle(shape_ops: &[Mat]) -> Result<(f64, Mat)> {
    Ok((epsilon_h(shape_ops)?, epsilon_t(shape_ops)?))
}

fn check_oracle_args(shape_ops: &[Mat], m: usize) -> Result<()> {
    if m > EPS_ORACLE_MAX_DIM {
        return Err(LabError::Size(format!(
            "epsilon oracle limited to m <= {EPS_ORACLE_MAX_DIM} (got {m})"
        )));
    }
    for s in shape_ops {
        if s.n != m {
            return Err(LabError::Argument("operator dimension mismatch".into()));
        }
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Visit all strictly increasing index subsets of size `k` from `0..m`.
fn for_each_subset(m: usize, k: usize, buf: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn rec(m: usize, k: usize, start: usize, depth: usize, buf: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if depth == k {
            f(buf);
            return;
        }
        for i in start..m {
            buf[depth] = i;
            rec(m, k, i + 1, depth + 1, buf, f);
        }
    }
    rec(m, k, 0, 0, buf, f);
}

/// Visit all arrangements (permutations) of `idx`.
fn for_each_permutation(idx: &[usize], f: &mut impl FnMut(&[usize])) {
    let mut buf = idx.to_vec();
    permute(&mut buf, 0, f);
}

fn permute(buf: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    if at == buf.len() {
        f(buf);
        return;
    }
    for i in at..buf.len() {
        buf.swap(at, i);
        permute(buf, at + 1, f);
        buf.swap(at, i);
    }
}

/// Visit all permutations of `base` along with the permutation sign relative
/// to `base` itself.
fn for_each_signed_permutation(base: &[usize], f: &mut impl FnMut(&[usize], f64)) {
    let k = base.len();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        let cols: Vec<usize> = perm.iter().map(|&p| base[p]).collect();
        f(&cols, perm_sign(&perm));
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

fn perm_sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Polarized curvature data for a list of (not necessarily distinct) normals.
#[derive(Debug, Clone)]
pub struct MultiNormalPacket {
    pub shape_ops: Vec<Mat>,
    pub h_k: f64,
    pub sigma_k: f64,
    /// `T_k(nu_1..nu_k)`; the zero matrix when `k = m`.
    pub t_k: Mat,
}

/// Multi-normal curvature packet from a frame and a list of normal indices.
pub fn multi_normal(frame: &PointFrame, normal_indices: &[usize]) -> Result<MultiNormalPacket> {
    let m = 2usize;
    let k = normal_indices.len();
    if k > m {
        return Err(LabError::Size(format!("multi_normal needs k <= m = {m}, got k = {k}")));
    }
    let mut shape_ops = Vec::with_capacity(k);
    for &beta in normal_indices {
        let s = frame.shape_onb.get(beta).ok_or_else(|| {
            LabError::Argument(format!("normal index {beta} out of range"))
        })?;
        shape_ops.push(s.clone());
    }
    let h_k = epsilon_h(&shape_ops)?;
    let t_k = epsilon_t(&shape_ops)?;
    Ok(MultiNormalPacket { shape_ops, h_k, sigma_k: h_k / binomial(m, k), t_k })
}

/// Same polarization for explicit operators (used with `X^perp` in a slot).
pub fn multi_normal_ops(ops: &[Mat]) -> Result<MultiNormalPacket> {
    let m = if ops.is_empty() { 2 } else { ops[0].n };
    let h_k = epsilon_h(ops)?;
    let t_k = if ops.is_empty() { Mat::identity(m) } else { epsilon_t(ops)? };
    Ok(MultiNormalPacket { shape_ops: ops.to_vec(), h_k, sigma_k: h_k / binomial(m, ops.len()), t_k })
}

/// Maximum norm of the normal-bundle derivative of the `beta`-th frame
/// normal over a sample grid: zero for frames parallel in the normal bundle.
pub fn parallel_check(
    imm: &crate::immersion::Immersion,
    normal_index: usize,
    samples: usize,
) -> Result<f64> {
    if imm.codim() < 2 {
        return Err(LabError::Argument(
            "parallel_check needs codimension >= 2".into(),
        ));
    }
    let space = imm.ambient;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..samples {
        for j in 0..samples {
            let u = [
                (i as f64 + 0.5) / samples as f64 * imm.axes[0].length(),
                (j as f64 + 0.5) / samples as f64 * imm.axes[1].length(),
            ];
            let frame = imm.frame(u)?;
            for axis in 0..2 {
                let mut up = u;
                up[axis] += h;
                let mut um = u;
                um[axis] -= h;
                let (fp, fm) = (imm.frame(up)?, imm.frame(um)?);
                let dnu: Vec<f64> = fp.normals[normal_index]
                    .v
                    .iter()
                    .zip(&fm.normals[normal_index].v)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect();
                // Normal-bundle component of the derivative (the component
                // along nu_beta itself vanishes since the frame is unit).
                let mut norm2 = 0.0;
                for (gamma, nu) in frame.normals.iter().enumerate() {
                    if gamma == normal_index {
                        continue;
                    }
                    let c = space.inner(&dnu, &nu.v);
                    norm2 += c * c;
                }
                worst = worst.max(norm2.sqrt());
            }
        }
    }
    Ok(worst)
}
