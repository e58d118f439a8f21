//! Sampling-based property checkers for reduction formulas (convexity,
//! commutativity) and exact topology counting.

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gcp::ReductionKind;
use crate::matrix::{DistanceMatrix, MatrixKind};
use crate::me::{run_addition, InsertionOrder, WeightScheme};
use crate::phylo::robinson_foulds;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    HoldsOnSample { trials: u64 },
    Counterexample { witness: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnSample { .. })
    }
}

/// Reduction-formula families the checkers understand: the cluster
/// reductions plus the NJ matrix reduction and greedy OLS insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Gcp(ReductionKind),
    Nj,
    Gme,
}

impl CheckKind {
    pub fn from_name(name: &str) -> Option<CheckKind> {
        match name {
            "nj" => Some(CheckKind::Nj),
            "gme" => Some(CheckKind::Gme),
            other => ReductionKind::from_name(other).map(CheckKind::Gcp),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Gcp(k) => k.name(),
            CheckKind::Nj => "nj",
            CheckKind::Gme => "gme",
        }
    }
}

/// NJ reduction of a pair towards remaining node k simplifies to
/// (D_ik + D_jk - D_ij) / 2 because the two branch lengths sum to D_ij.
fn nj_reduced(d_ik: f64, d_jk: f64, d_ij: f64) -> f64 {
    0.5 * (d_ik + d_jk - d_ij)
}

/// Does the reduced distance stay within [min(D_ik, D_jk), max(...)]?
pub fn check_convexity(kind: CheckKind, trials: u64, seed: u64) -> Result<Verdict> {
    if trials == 0 {
        return Err(Error::domain("convexity check needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let d_ik = rng.gen_range(0.0..10.0);
        let d_jk = rng.gen_range(0.0..10.0);
        let d_ij = rng.gen_range(0.0..10.0);
        let (si, sj) = (rng.gen_range(1..6usize), rng.gen_range(1..6usize));
        let d_uk = match kind {
            CheckKind::Gcp(k) => crate::gcp::reduce(k, si, sj, d_ik, d_jk, d_ij),
            CheckKind::Nj => nj_reduced(d_ik, d_jk, d_ij),
            CheckKind::Gme => {
                return Err(Error::domain(
                    "convexity is defined for matrix reductions, not insertion schemes",
                ))
            }
        };
        let (lo, hi) = (d_ik.min(d_jk), d_ik.max(d_jk));
        if d_uk < lo - TOL || d_uk > hi + TOL {
            return Ok(Verdict::Counterexample {
                witness: format!(
                    "D_ik={:.6} D_jk={:.6} D_ij={:.6} |C_i|={} |C_j|={} -> D_uk={:.6} outside [{:.6}, {:.6}]",
                    d_ik, d_jk, d_ij, si, sj, d_uk, lo, hi
                ),
            });
        }
    }
    Ok(Verdict::HoldsOnSample { trials })
}

/// Does reducing {C1,C2} before {C3,C4} give the same distance between
/// the two merged clusters as the opposite order?
pub fn check_commutativity(kind: CheckKind, trials: u64, seed: u64) -> Result<Verdict> {
    if trials == 0 {
        return Err(Error::domain("commutativity check needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if kind == CheckKind::Gme {
        return gme_order_dependence(trials, &mut rng);
    }
    for _ in 0..trials {
        // distances among four clusters, indexed pairwise
        let mut d = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let v = rng.gen_range(0.1..10.0);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        let sizes: [usize; 4] = core::array::from_fn(|_| rng.gen_range(1..6));
        let pair_reduce = |d_ik: f64, d_jk: f64, d_ij: f64, si: usize, sj: usize| match kind {
            CheckKind::Gcp(k) => crate::gcp::reduce(k, si, sj, d_ik, d_jk, d_ij),
            CheckKind::Nj => nj_reduced(d_ik, d_jk, d_ij),
            CheckKind::Gme => unreachable!(),
        };
        // order A: u = C1+C2 first, then v = C3+C4
        let d_u3 = pair_reduce(d[0][2], d[1][2], d[0][1], sizes[0], sizes[1]);
        let d_u4 = pair_reduce(d[0][3], d[1][3], d[0][1], sizes[0], sizes[1]);
        let d_uv_a = pair_reduce(d_u3, d_u4, d[2][3], sizes[2], sizes[3]);
        // order B: v = C3+C4 first, then u = C1+C2
        let d_v1 = pair_reduce(d[0][2], d[0][3], d[2][3], sizes[2], sizes[3]);
        let d_v2 = pair_reduce(d[1][2], d[1][3], d[2][3], sizes[2], sizes[3]);
        let d_uv_b = pair_reduce(d_v1, d_v2, d[0][1], sizes[0], sizes[1]);
        if (d_uv_a - d_uv_b).abs() > TOL {
            return Ok(Verdict::Counterexample {
                witness: format!(
                    "four-cluster distances {:?}, sizes {:?}: orders give {:.9} vs {:.9}",
                    d, sizes, d_uv_a, d_uv_b
                ),
            });
        }
    }
    Ok(Verdict::HoldsOnSample { trials })
}

/// Greedy OLS addition is order-dependent; exhibit two insertion orders
/// with different topologies.
fn gme_order_dependence(trials: u64, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    for trial in 0..trials {
        let n = 6;
        let labels: Vec<String> = (0..n).map(|i| format!("T{}", i)).collect();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(1.0..10.0);
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        let d = DistanceMatrix::new(labels, e, MatrixKind::Generic)?;
        let a = run_addition(&d, WeightScheme::Ols, InsertionOrder::Input)?;
        let b = run_addition(&d, WeightScheme::Ols, InsertionOrder::Random(trial))?;
        if robinson_foulds(&a, &b) > 0 {
            return Ok(Verdict::Counterexample {
                witness: format!(
                    "random 6-taxon matrix (trial {}): input order and shuffled order disagree",
                    trial
                ),
            });
        }
    }
    Ok(Verdict::HoldsOnSample { trials })
}

fn double_factorial_odd(top: u64) -> BigUint {
    // product of odd numbers 1, 3, ..., top
    let mut acc = BigUint::from(1u32);
    let mut k = 1u64;
    while k <= top {
        acc *= BigUint::from(k);
        k += 2;
    }
    acc
}

/// Number of unrooted binary topologies on n labeled leaves:
/// (2n-5)! / (2^(n-3) (n-3)!) = (2n-5)!!.
pub fn unrooted_topology_count(n: u64) -> Result<BigUint> {
    if n < 3 {
        return Err(Error::domain(format!(
            "unrooted topology count needs n >= 3, got {}",
            n
        )));
    }
    Ok(double_factorial_odd(2 * n - 5))
}

/// Number of rooted binary topologies: (2n-3)! / (2^(n-2) (n-2)!) = (2n-3)!!.
pub fn rooted_topology_count(n: u64) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::domain(format!(
            "rooted topology count needs n >= 2, got {}",
            n
        )));
    }
    Ok(double_factorial_odd(2 * n - 3))
}

pub fn tree_topology_counts(n: u64) -> Result<(BigUint, BigUint)> {
    Ok((unrooted_topology_count(n)?, rooted_topology_count(n)?))
}
