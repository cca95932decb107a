//! State-space models under the `G(s) = C(-sI - A)^{-1} B + D` convention.
//!
//! Realization uses a residue (Gilbert) construction when every entry has
//! simple poles, and otherwise per-column controllable canonical blocks
//! followed by a staircase reduction to the minimal subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    all_finite, block_diag, dagger, fmt_c, fro, hstack, identity, rank, singular_values, solve, svd_sorted,
    CMat, C64, ONE, ZERO,
};
use crate::tfio::{Poly, RationalFunction, RationalGrid};
use crate::tolerance::Tolerances;

/// Normalization record: the model is expressed in `s~ = 2 s / s0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub s0: f64,
    pub dimensionless: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
    scale: Option<Scale>,
}

impl StateSpace {
    /// Validates even doubled-up dimensions and finiteness.
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let ns = a.nrows();
        let ms = d.nrows();
        if a.ncols() != ns {
            return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if ns % 2 != 0 {
            return Err(Error::Dimension(format!("state dimension {ns} is odd")));
        }
        if d.ncols() != ms || ms % 2 != 0 || ms == 0 {
            return Err(Error::Dimension(format!("D is {}x{}", d.nrows(), d.ncols())));
        }
        if b.shape() != (ns, ms) {
            return Err(Error::Dimension(format!("B is {}x{}, expected {ns}x{ms}", b.nrows(), b.ncols())));
        }
        if c.shape() != (ms, ns) {
            return Err(Error::Dimension(format!("C is {}x{}, expected {ms}x{ns}", c.nrows(), c.ncols())));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !all_finite(m) {
                return Err(Error::NonFinite(name.into()));
            }
        }
        Ok(StateSpace { a, b, c, d, scale: None })
    }

    /// Static system with feedthrough `d`.
    pub fn static_gain(d: CMat) -> Result<Self> {
        let m = d.nrows();
        Self::new(CMat::zeros(0, 0), CMat::zeros(0, m), CMat::zeros(m, 0), d)
    }

    pub fn with_scale(mut self, scale: Option<Scale>) -> Self {
        self.scale = scale;
        self
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }
    pub fn b(&self) -> &CMat {
        &self.b
    }
    pub fn c(&self) -> &CMat {
        &self.c
    }
    pub fn d(&self) -> &CMat {
        &self.d
    }
    pub fn scale(&self) -> Option<Scale> {
        self.scale
    }

    /// Mode count.
    pub fn n(&self) -> usize {
        self.a.nrows() / 2
    }

    /// Channel count.
    pub fn m(&self) -> usize {
        self.d.nrows() / 2
    }

    /// Applies `x = T x'`: returns `(T^-1 A T, T^-1 B, C T, D)`.
    pub fn similarity(&self, t: &CMat) -> Result<Self> {
        let ab = hstack(&[&(&self.a * t), &self.b]);
        let sol = solve(t, &ab).ok_or_else(|| Error::Numerical("similarity transform is singular".into()))?;
        let ns = self.a.nrows();
        let a = sol.columns(0, ns).into_owned();
        let b = sol.columns(ns, self.b.ncols()).into_owned();
        Ok(StateSpace::new(a, b, &self.c * t, self.d.clone())?.with_scale(self.scale))
    }
}

/// Anything with a matrix-valued frequency response.
pub trait FrequencyResponse {
    fn ports(&self) -> usize;
    fn response(&self, s: C64) -> Result<CMat>;
}

impl FrequencyResponse for StateSpace {
    fn ports(&self) -> usize {
        self.d.nrows()
    }
    fn response(&self, s: C64) -> Result<CMat> {
        ss_to_tf(self, s)
    }
}

impl FrequencyResponse for RationalGrid {
    fn ports(&self) -> usize {
        self.rows()
    }
    fn response(&self, s: C64) -> Result<CMat> {
        self.evaluate(s)
    }
}

/// `C(-sI - A)^{-1} B + D` by linear solve.
pub fn ss_to_tf(ss: &StateSpace, s: C64) -> Result<CMat> {
    ss_to_tf_with_cond(ss, s, Tolerances::default().singular).map(|(g, _)| g)
}

/// Like [`ss_to_tf`], also returning the 2-norm condition number of `-sI - A`.
pub fn ss_to_tf_with_cond(ss: &StateSpace, s: C64, singular_tol: f64) -> Result<(CMat, f64)> {
    let ns = ss.a.nrows();
    if ns == 0 {
        return Ok((ss.d.clone(), 1.0));
    }
    let mut m = -&ss.a;
    for i in 0..ns {
        m[(i, i)] -= s;
    }
    let sv = singular_values(&m);
    let (smax, smin) = (sv[0], *sv.last().unwrap());
    if smin < singular_tol * fro(&ss.a).max(1.0) {
        return Err(Error::Singular {
            s: fmt_c(s),
            sigma_min: smin,
        });
    }
    let x = solve(&m, &ss.b).ok_or_else(|| Error::Singular {
        s: fmt_c(s),
        sigma_min: smin,
    })?;
    Ok((&ss.c * x + &ss.d, smax / smin))
}

/// Rescales to the dimensionless variable `s~ = 2 s / s0`.
pub fn normalize(ss: &StateSpace, s0: f64) -> Result<StateSpace> {
    if ss.scale.is_some() {
        return Err(Error::AlreadyNormalized);
    }
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::InvalidParameter(format!("reference rate {s0} must be positive")));
    }
    let ka = 2.0 / s0;
    let kb = ka.sqrt();
    Ok(StateSpace {
        a: ss.a.scale(ka),
        b: ss.b.scale(kb),
        c: ss.c.scale(kb),
        d: ss.d.clone(),
        scale: Some(Scale { s0, dimensionless: true }),
    })
}

/// Inverse of [`normalize`].
pub fn denormalize(ss: &StateSpace) -> Result<StateSpace> {
    let sc = ss.scale.ok_or(Error::NotNormalized)?;
    let ka = sc.s0 / 2.0;
    let kb = ka.sqrt();
    Ok(StateSpace {
        a: ss.a.scale(ka),
        b: ss.b.scale(kb),
        c: ss.c.scale(kb),
        d: ss.d.clone(),
        scale: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub controllable_rank: usize,
    pub observable_rank: usize,
    pub minimal: bool,
}

fn krylov(a: &CMat, b: &CMat) -> CMat {
    let ns = a.nrows();
    let na = fro(a);
    let a = if na > 0.0 { a.scale(1.0 / na) } else { a.clone() };
    let mut blocks = vec![b.clone()];
    for k in 1..ns {
        let next = &a * &blocks[k - 1];
        blocks.push(next);
    }
    let refs: Vec<&CMat> = blocks.iter().collect();
    hstack(&refs)
}

/// Ranks of the controllability and observability matrices.
pub fn minimality_report(ss: &StateSpace) -> MinimalityReport {
    minimality_report_with(ss, Tolerances::default().rank)
}

pub fn minimality_report_with(ss: &StateSpace, rank_tol: f64) -> MinimalityReport {
    let ns = ss.a.nrows();
    if ns == 0 {
        return MinimalityReport {
            controllable_rank: 0,
            observable_rank: 0,
            minimal: true,
        };
    }
    let cr = rank(&krylov(&ss.a, &ss.b), rank_tol);
    let or = rank(&krylov(&dagger(&ss.a), &dagger(&ss.c)), rank_tol);
    MinimalityReport {
        controllable_rank: cr,
        observable_rank: or,
        minimal: cr == ns && or == ns,
    }
}

fn cluster_tol(p: C64, tol: f64) -> f64 {
    tol * p.norm().max(1.0)
}

/// Strictly proper part with common factors removed.
fn strictly_proper(g: &RationalFunction, d: C64) -> Result<RationalFunction> {
    let num = g.num().sub(&g.den().scale(d));
    RationalFunction::new(Poly::new(num.coeffs().to_vec()), g.den().clone()).map(|r| r.reduce())
}

/// Distinct roots with multiplicities, merging roots closer than the cluster tolerance.
fn clustered_roots(p: &Poly, tol: f64) -> Result<Vec<(C64, usize)>> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for r in p.roots()? {
        match out.iter_mut().find(|(q, _)| (*q - r).norm() <= cluster_tol(*q, tol)) {
            Some(slot) => slot.1 += 1,
            None => out.push((r, 1)),
        }
    }
    Ok(out)
}

fn check_rank_gap(sv: &[f64], threshold: f64, what: &str) -> Result<()> {
    if let Some(s) = sv.iter().find(|&&s| s > threshold / 100.0 && s <= threshold * 100.0) {
        return Err(Error::AmbiguousRank(format!(
            "{what}: singular value {s:.3e} within two decades of threshold {threshold:.3e}"
        )));
    }
    Ok(())
}

/// Minimal realization of a proper doubled-up rational grid.
pub fn tf_to_minimal_ss(grid: &RationalGrid) -> Result<StateSpace> {
    tf_to_minimal_ss_with(grid, &Tolerances::default())
}

pub fn tf_to_minimal_ss_with(grid: &RationalGrid, tol: &Tolerances) -> Result<StateSpace> {
    if let Some((row, col)) = grid.first_improper() {
        return Err(Error::Improper { row, col });
    }
    let (p, q) = (grid.rows(), grid.cols());
    if p != q || p % 2 != 0 {
        return Err(Error::Dimension(format!("transfer grid is {p}x{q}; expected square with even size")));
    }
    let d = CMat::from_fn(p, q, |i, j| grid.get(i, j).limit_at_infinity());
    let mut sp = Vec::with_capacity(p * q);
    for i in 0..p {
        for j in 0..q {
            sp.push(strictly_proper(grid.get(i, j), d[(i, j)])?);
        }
    }
    let sp = RationalGrid::new(p, q, sp)?;

    let ss = match gilbert(&sp, &d, tol)? {
        Some(ss) => ss,
        None => {
            let ss = canonical_columns(&sp, &d, tol)?;
            staircase(&ss, tol)?
        }
    };
    if ss.a.nrows() % 2 != 0 {
        return Err(Error::OddStateDimension(ss.a.nrows()));
    }
    let rep = minimality_report_with(&ss, tol.rank);
    if !rep.minimal {
        return Err(Error::AmbiguousRank(format!(
            "realization of order {} has controllable rank {} and observable rank {}",
            ss.a.nrows(),
            rep.controllable_rank,
            rep.observable_rank
        )));
    }
    Ok(ss)
}

/// Residue construction; `None` when some entry has a repeated pole.
fn gilbert(sp: &RationalGrid, d: &CMat, tol: &Tolerances) -> Result<Option<StateSpace>> {
    let (p, q) = (sp.rows(), sp.cols());
    let mut entry_roots: Vec<Vec<C64>> = Vec::with_capacity(p * q);
    let mut poles: Vec<C64> = Vec::new();
    for g in sp.entries() {
        if g.is_zero() {
            entry_roots.push(Vec::new());
            continue;
        }
        let rts = clustered_roots(g.den(), tol.pole_cluster)?;
        if rts.iter().any(|&(_, k)| k > 1) {
            return Ok(None);
        }
        let rts: Vec<C64> = rts.into_iter().map(|(r, _)| r).collect();
        for &r in &rts {
            if !poles.iter().any(|&z| (z - r).norm() <= cluster_tol(z, tol.pole_cluster)) {
                poles.push(r);
            }
        }
        entry_roots.push(rts);
    }
    poles.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut a_blocks = Vec::new();
    let mut b_blocks = Vec::new();
    let mut c_blocks = Vec::new();
    for &pole in &poles {
        let mut neg_res = CMat::zeros(p, q);
        for i in 0..p {
            for j in 0..q {
                let g = sp.get(i, j);
                if let Some(&r) = entry_roots[i * q + j]
                    .iter()
                    .find(|&&r| (r - pole).norm() <= cluster_tol(pole, tol.pole_cluster))
                {
                    neg_res[(i, j)] = -(g.num().eval(r) / g.den().derivative().eval(r));
                }
            }
        }
        let (u, sv, vh) = svd_sorted(&neg_res);
        let smax = sv.first().copied().unwrap_or(0.0);
        let threshold = tol.rank * smax;
        check_rank_gap(&sv, threshold, "residue rank")?;
        let r = sv.iter().filter(|&&s| s > threshold).count();
        if r == 0 {
            continue;
        }
        a_blocks.push(identity(r).scale(-1.0).map(|z| z * pole));
        if r == p && p == q {
            b_blocks.push(identity(r));
            c_blocks.push(neg_res);
        } else {
            let mut cu = u.columns(0, r).into_owned();
            for k in 0..r {
                let f = sv[k];
                cu.column_mut(k).iter_mut().for_each(|z| *z *= f);
            }
            b_blocks.push(vh.rows(0, r).into_owned());
            c_blocks.push(cu);
        }
    }
    let a = block_diag(&a_blocks);
    let b = {
        let refs: Vec<&CMat> = b_blocks.iter().collect();
        if refs.is_empty() {
            CMat::zeros(0, q)
        } else {
            crate::linalg::vstack(&refs)
        }
    };
    let c = {
        let refs: Vec<&CMat> = c_blocks.iter().collect();
        if refs.is_empty() {
            CMat::zeros(p, 0)
        } else {
            hstack(&refs)
        }
    };
    if a.nrows() % 2 != 0 {
        return Err(Error::OddStateDimension(a.nrows()));
    }
    StateSpace::new(a, b, c, d.clone()).map(Some)
}

/// Block-diagonal controllable canonical realization, one block per input column.
fn canonical_columns(sp: &RationalGrid, d: &CMat, tol: &Tolerances) -> Result<StateSpace> {
    let (p, q) = (sp.rows(), sp.cols());
    let mut a_blocks = Vec::new();
    let mut b_cols: Vec<CMat> = Vec::new();
    let mut c_blocks = Vec::new();
    for j in 0..q {
        let mut lcm: Vec<(C64, usize)> = Vec::new();
        for i in 0..p {
            let g = sp.get(i, j);
            if g.is_zero() {
                continue;
            }
            for (r, k) in clustered_roots(g.den(), tol.pole_cluster)? {
                match lcm.iter_mut().find(|(z, _)| (*z - r).norm() <= cluster_tol(*z, tol.pole_cluster)) {
                    Some(slot) => slot.1 = slot.1.max(k),
                    None => lcm.push((r, k)),
                }
            }
        }
        let roots: Vec<C64> = lcm.iter().flat_map(|&(r, k)| std::iter::repeat_n(r, k)).collect();
        let order = roots.len();
        if order == 0 {
            continue;
        }
        let dj = Poly::from_roots(&roots);
        // Realize H(sigma) = G(-sigma) in standard form; then A = A_c under the negative-s convention.
        let dj_ref = dj.reflect();
        let lead = dj_ref.leading();
        let den_coeffs: Vec<C64> = dj_ref.coeffs().iter().map(|z| z / lead).collect();
        let mut cj = CMat::zeros(p, order);
        for i in 0..p {
            let g = sp.get(i, j);
            if g.is_zero() {
                continue;
            }
            let den = g.den().monic();
            let num = g.num().scale(ONE / g.den().leading());
            let (cofactor, _) = dj.divrem(&den);
            let nj = num.mul(&cofactor).reflect();
            for k in 0..order {
                cj[(i, k)] = nj.coeff(k) / lead;
            }
        }
        let aj = CMat::from_fn(order, order, |r, c| {
            if r + 1 == c {
                ONE
            } else if r == order - 1 {
                -den_coeffs[c]
            } else {
                ZERO
            }
        });
        let mut bj = CMat::zeros(order, q);
        bj[(order - 1, j)] = ONE;
        a_blocks.push(aj);
        b_cols.push(bj);
        c_blocks.push(cj);
    }
    let a = block_diag(&a_blocks);
    let b = if b_cols.is_empty() {
        CMat::zeros(0, q)
    } else {
        let refs: Vec<&CMat> = b_cols.iter().collect();
        crate::linalg::vstack(&refs)
    };
    let c = if c_blocks.is_empty() {
        CMat::zeros(p, 0)
    } else {
        let refs: Vec<&CMat> = c_blocks.iter().collect();
        hstack(&refs)
    };
    Ok(StateSpace { a, b, c, d: d.clone(), scale: None })
}

/// Orthonormal basis of the reachable subspace of `(a, b)` by block Arnoldi.
fn reachable_basis(a: &CMat, b: &CMat, rank_tol: f64) -> Result<CMat> {
    let ns = a.nrows();
    let na = fro(a);
    let a = if na > 0.0 { a.scale(1.0 / na) } else { a.clone() };
    let nb = fro(b);
    if nb == 0.0 {
        return Ok(CMat::zeros(ns, 0));
    }
    let orth = |m: &CMat, basis: &CMat| -> CMat {
        let mut w = m.clone();
        for _ in 0..2 {
            if basis.ncols() > 0 {
                w -= basis * (dagger(basis) * &w);
            }
        }
        w
    };
    let (u, sv, _) = svd_sorted(&b.scale(1.0 / nb));
    let threshold = rank_tol * sv[0];
    check_rank_gap(&sv, threshold, "input range")?;
    let r = sv.iter().filter(|&&s| s > threshold).count();
    let mut basis = u.columns(0, r).into_owned();
    let mut fresh = basis.clone();
    while basis.ncols() < ns && fresh.ncols() > 0 {
        let w = orth(&(&a * &fresh), &basis);
        let (u, sv, _) = svd_sorted(&w);
        check_rank_gap(&sv, rank_tol, "reachable subspace")?;
        let r = sv.iter().filter(|&&s| s > rank_tol).count();
        fresh = u.columns(0, r).into_owned();
        basis = hstack(&[&basis, &fresh]);
    }
    Ok(basis)
}

/// Restricts to the controllable, then observable, subspace.
fn staircase(ss: &StateSpace, tol: &Tolerances) -> Result<StateSpace> {
    let q1 = reachable_basis(&ss.a, &ss.b, tol.rank)?;
    let a1 = dagger(&q1) * &ss.a * &q1;
    let b1 = dagger(&q1) * &ss.b;
    let c1 = &ss.c * &q1;
    let q2 = reachable_basis(&dagger(&a1), &dagger(&c1), tol.rank)?;
    let a2 = dagger(&q2) * &a1 * &q2;
    let b2 = dagger(&q2) * &b1;
    let c2 = &c1 * &q2;
    if a2.nrows() % 2 != 0 {
        return Err(Error::OddStateDimension(a2.nrows()));
    }
    StateSpace::new(a2, b2, c2, ss.d.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::tfio::{assemble_doubled_up, TransferMatrix};

    fn doubled(expr: &str) -> RationalGrid {
        let tm = TransferMatrix::from_json(&format!(r#"{{"m": 1, "entries": [["{expr}"]]}}"#)).unwrap();
        assemble_doubled_up(&tm)
    }

    #[test]
    fn dimensionless_filter_matrices() {
        let ss = tf_to_minimal_ss(&doubled("(s - 2)/(s + 2)")).unwrap();
        assert_eq!(ss.a(), &identity(2).scale(2.0));
        assert_eq!(ss.b(), &identity(2));
        assert_eq!(ss.c(), &identity(2).scale(4.0));
        assert_eq!(ss.d(), &identity(2));
    }

    #[test]
    fn static_identity_has_no_states() {
        let ss = tf_to_minimal_ss(&doubled("1")).unwrap();
        assert_eq!(ss.n(), 0);
        assert_eq!(ss.d(), &identity(2));
    }

    #[test]
    fn improper_rejected() {
        assert!(matches!(
            tf_to_minimal_ss(&doubled("s^2/(s + 1)")),
            Err(Error::Improper { .. })
        ));
    }

    #[test]
    fn repeated_pole_uses_fallback() {
        let g = doubled("1/(s + 1)^2");
        let ss = tf_to_minimal_ss(&g).unwrap();
        assert_eq!(ss.n(), 2);
        for s in [c(0.3, 1.0), c(-0.2, -2.0), c(2.0, 0.1)] {
            let e = (ss_to_tf(&ss, s).unwrap() - g.evaluate(s).unwrap()).norm();
            assert!(e < 1e-8, "{e}");
        }
    }

    #[test]
    fn normalize_round_trip() {
        let ss = tf_to_minimal_ss(&doubled("(s - 3)/(s + 3)")).unwrap();
        let back = denormalize(&normalize(&ss, 3.0).unwrap()).unwrap();
        assert!((back.a() - ss.a()).norm() < 1e-14);
        assert!(matches!(
            normalize(&normalize(&ss, 3.0).unwrap(), 3.0),
            Err(Error::AlreadyNormalized)
        ));
    }

    #[test]
    fn singular_evaluation() {
        let ss = tf_to_minimal_ss(&doubled("(s - 2)/(s + 2)")).unwrap();
        assert!(matches!(ss_to_tf(&ss, re(-2.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn duplicated_state_is_not_minimal() {
        let a = identity(4);
        let b = crate::linalg::vstack(&[&identity(2), &identity(2)]);
        let cm = hstack(&[&identity(2), &identity(2)]);
        let ss = StateSpace::new(a, b, cm, identity(2)).unwrap();
        let rep = minimality_report(&ss);
        assert!(!rep.minimal);
        assert_eq!(rep.controllable_rank, 2);
    }
}
