#![allow(dead_code)]

use std::path::PathBuf;

use mindep::format::parse_table_file;
use mindep::table::ContingencyTable;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load(name: &str) -> ContingencyTable {
    parse_table_file(&std::fs::read(data_path(name)).unwrap()).unwrap()
}

pub fn antitoxin() -> ContingencyTable {
    load("antitoxin.json")
}

pub fn alcohol() -> ContingencyTable {
    load("alcohol.json")
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `a (a+1) ... (a+n-1)`, i.e. `Γ(a+n)/Γ(a)`.
pub fn rising(a: &BigRational, n: u64) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, k| acc * (a + BigRational::from_integer(BigInt::from(k))))
}

pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub fn ln_rational(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Exact Dirichlet-multinomial probability of `counts` under a Dirichlet
/// with rational parameters, evaluated as a rational and then logged.
pub fn exact_saturated_log_ml(alpha: &[BigRational], counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let total: BigRational = alpha.iter().fold(BigRational::zero(), |acc, a| acc + a);
    let mut p = BigRational::from_integer(factorial(n));
    for (a, &c) in alpha.iter().zip(counts) {
        p = p * rising(a, c) / BigRational::from_integer(factorial(c));
    }
    p /= rising(&total, n);
    ln_rational(&p)
}

/// All tables with `cells` cells and total at most `max_n`.
pub fn all_tables(cells: usize, max_n: u64) -> Vec<Vec<u64>> {
    fn go(prefix: &mut Vec<u64>, cells: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() == cells {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            go(prefix, cells, left - c, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), cells, max_n, &mut out);
    out
}

/// `log Γ(80) − log Γ(37.25) − log Γ(42.75)` from
/// `Γ(k + 1/4) = Γ(1/4) rising(1/4, k)`, the same for 3/4, and
/// `Γ(1/4) Γ(3/4) = π √2`.
pub fn exact_log_dk_37_25_42_75() -> f64 {
    let denom = rising(&rat(1, 4), 37) * rising(&rat(3, 4), 42);
    ln_bigint(&factorial(79)) - ln_rational(&denom) - (std::f64::consts::PI * 2f64.sqrt()).ln()
}

/// Prior Monte Carlo estimate of `f(n | G)` for the 2×2×2 gamma graph with
/// corner at variable `corner`, where every Dirichlet piece is two-celled
/// and can be drawn as a Beta. Returns `(mean, standard error)`.
pub fn gamma_prior_mc(counts: &[f64; 8], alpha: &[f64; 8], corner: usize, draws: usize, seed: u64) -> (f64, f64) {
    let idx = |c: [usize; 3]| c[0] + 2 * c[1] + 4 * c[2];
    let ends: Vec<usize> = (0..3).filter(|&v| v != corner).collect();
    let (e1, e2) = (ends[0], ends[1]);
    let cell = |vc: usize, v1: usize, v2: usize| {
        let mut c = [0; 3];
        c[corner] = vc;
        c[e1] = v1;
        c[e2] = v2;
        idx(c)
    };
    // conditional of the corner given each endpoint pair
    let cond: Vec<Beta<f64>> = (0..4)
        .map(|k| {
            let (v1, v2) = (k % 2, k / 2);
            Beta::new(alpha[cell(0, v1, v2)], alpha[cell(1, v1, v2)]).unwrap()
        })
        .collect();
    let marg = |e: usize| {
        let a1: f64 = (0..8).filter(|i| (i >> e) & 1 == 0).map(|i| alpha[i]).sum();
        let a2: f64 = (0..8).filter(|i| (i >> e) & 1 == 1).map(|i| alpha[i]).sum();
        Beta::new(a1, a2).unwrap()
    };
    let (m1, m2) = (marg(e1), marg(e2));
    let n: f64 = counts.iter().sum();
    let log_k = mindep::special::ln_gamma(n + 1.0) - counts.iter().map(|c| mindep::special::ln_gamma(c + 1.0)).sum::<f64>();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let pc: Vec<f64> = cond.iter().map(|b| b.sample(&mut rng)).collect();
        let p1 = m1.sample(&mut rng);
        let p2 = m2.sample(&mut rng);
        let mut log_l = log_k;
        for vc in 0..2 {
            for v1 in 0..2 {
                for v2 in 0..2 {
                    let pcorner = if vc == 0 { pc[v1 + 2 * v2] } else { 1.0 - pc[v1 + 2 * v2] };
                    let pe1 = if v1 == 0 { p1 } else { 1.0 - p1 };
                    let pe2 = if v2 == 0 { p2 } else { 1.0 - p2 };
                    let c = counts[cell(vc, v1, v2)];
                    if c > 0.0 {
                        log_l += c * (pcorner * pe1 * pe2).ln();
                    }
                }
            }
        }
        let l = log_l.exp();
        sum += l;
        sum_sq += l * l;
    }
    let t = draws as f64;
    let mean = sum / t;
    let var = (sum_sq / t - mean * mean) * t / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// λ for binary variables from the ±1 contrast definition: the average over
/// the marginal's cells of `log π_M` weighted by the product of `+1` (level
/// 2) or `-1` (level 1) over the effect's variables.
pub fn binary_lambda_oracle(pi: &[f64], marginal: &[usize], effect: &[usize]) -> f64 {
    let m = marginal.len();
    let mut acc = 0.0;
    for local in 0..(1usize << m) {
        let mut p = 0.0;
        for (k, &x) in pi.iter().enumerate() {
            if marginal.iter().enumerate().all(|(j, &v)| ((k >> v) & 1) == ((local >> j) & 1)) {
                p += x;
            }
        }
        let sign: f64 = effect
            .iter()
            .map(|v| {
                let j = marginal.iter().position(|u| u == v).unwrap();
                if (local >> j) & 1 == 1 { 1.0 } else { -1.0 }
            })
            .product();
        acc += sign * p.ln();
    }
    acc / (1usize << m) as f64
}
