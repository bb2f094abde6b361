//! Arithmetic tables and the Goldston–Yıldırım weights.
//!
//! A [`SieveTable`] is built once with a linear (smallest-prime-factor) sieve
//! and is immutable afterwards. `Λ_R(n) = Σ_{k<R, k|n} μ(k) log(R/k)` is
//! evaluated pointwise through the factorisation of `n`, or in bulk over an
//! interval with [`NuWeights`], which sieves by the squarefree `k < R`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, precondition, Error, Result};
use crate::numeric::{csum, gcd, ln, CompensatedSum};

/// Default ceiling on table size (entries); roughly 1.8 GB at 9 bytes per entry.
pub const DEFAULT_MAX_LIMIT: u64 = 200_000_000;

/// At most this many distinct primes divide an integer below 2^32.
const MAX_DISTINCT: usize = 10;

/// Möbius, totient and smallest-prime-factor tables for `1..=limit`.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u32,
    spf: Vec<u32>,
    mobius: Vec<i8>,
    phi: Vec<u32>,
    primes: Vec<u32>,
}

/// Distinct prime factors of an integer with multiplicities.
#[derive(Debug, Clone, Copy)]
pub struct Factorization {
    primes: [u32; MAX_DISTINCT],
    exps: [u8; MAX_DISTINCT],
    len: usize,
}

impl Factorization {
    pub fn primes(&self) -> &[u32] {
        &self.primes[..self.len]
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps[..self.len]
    }

    pub fn is_squarefree(&self) -> bool {
        self.exponents().iter().all(|&e| e == 1)
    }

    /// Squarefree divisors `d` with their Möbius values, in no particular order.
    pub fn squarefree_divisors(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        (0u32..1 << self.len).map(move |mask| {
            let mut d = 1u64;
            let mut sign = 1i8;
            for (i, &p) in self.primes().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    d *= p as u64;
                    sign = -sign;
                }
            }
            (d, sign)
        })
    }
}

impl SieveTable {
    /// Builds the tables for `1..=limit` with the default capacity ceiling.
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_capacity(limit, DEFAULT_MAX_LIMIT)
    }

    pub fn with_capacity(limit: u64, max_limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(domain!("sieve limit must be at least 1"));
        }
        if limit > max_limit || limit > u32::MAX as u64 - 1 {
            return Err(Error::Capacity {
                requested: limit,
                limit: max_limit.min(u32::MAX as u64 - 1),
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut mobius = vec![0i8; n + 1];
        let mut phi = vec![0u32; n + 1];
        let mut primes = Vec::new();
        mobius[1] = 1;
        phi[1] = 1;
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                mobius[i] = -1;
                phi[i] = i as u32 - 1;
                primes.push(i as u32);
            }
            for &p in &primes {
                let m = i * p as usize;
                if p > spf[i] || m > n {
                    break;
                }
                spf[m] = p;
                if p == spf[i] {
                    mobius[m] = 0;
                    phi[m] = phi[i] * p;
                } else {
                    mobius[m] = -mobius[i];
                    phi[m] = phi[i] * (p - 1);
                }
            }
        }
        Ok(Self {
            limit: limit as u32,
            spf,
            mobius,
            phi,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.limit as u64 {
            Err(domain!("argument {n} outside table range 1..={}", self.limit))
        } else {
            Ok(n as usize)
        }
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        self.check(n).map(|i| self.mobius[i])
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| self.phi[i] as u64)
    }

    /// Smallest prime factor; `spf(1) = 1`.
    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| if i == 1 { 1 } else { self.spf[i] as u64 })
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n).map(|i| i >= 2 && self.spf[i] as usize == i)
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        let mut x = self.check(n)?;
        let mut f = Factorization {
            primes: [0; MAX_DISTINCT],
            exps: [0; MAX_DISTINCT],
            len: 0,
        };
        while x > 1 {
            let p = self.spf[x];
            let mut e = 0u8;
            while x % p as usize == 0 {
                x /= p as usize;
                e += 1;
            }
            f.primes[f.len] = p;
            f.exps[f.len] = e;
            f.len += 1;
        }
        Ok(f)
    }

    pub fn divisor_count(&self, n: u64) -> Result<u64> {
        let f = self.factorize(n)?;
        Ok(f.exponents().iter().map(|&e| e as u64 + 1).product())
    }

    /// `log p` at primes, zero elsewhere.
    pub fn prime_weight(&self, n: u64) -> Result<f64> {
        Ok(if self.is_prime(n)? { ln(n as f64) } else { 0.0 })
    }

    /// Number of primes `≤ x` (for `x ≤ limit`).
    pub fn prime_count(&self, x: u64) -> u64 {
        self.primes.partition_point(|&p| p as u64 <= x) as u64
    }

    /// Partial twin-prime constant over the odd primes of the table.
    pub fn twin_constant(&self) -> f64 {
        twin_product(self.primes.iter().map(|&p| p as u64))
    }

    /// `Λ_R(n)` by summing over the squarefree divisors of `n` below `R`.
    pub fn lambda_r(&self, n: u64, level: &SieveLevel) -> Result<f64> {
        let f = self.factorize(n)?;
        Ok(csum(f.squarefree_divisors().filter_map(|(d, mu)| {
            let d = d as f64;
            (d < level.r).then(|| mu as f64 * (level.log_r - ln(d)))
        })))
    }

    /// `ν(n) = Λ_R(n)² / log R`.
    pub fn nu_weight(&self, n: u64, level: &SieveLevel) -> Result<f64> {
        let l = self.lambda_r(n, level)?;
        Ok(l * l / level.log_r)
    }
}

/// Sieve level `R > 1` with its cached logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SieveLevel {
    r: f64,
    log_r: f64,
}

impl SieveLevel {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(domain!("sieve level must be a finite real > 1, got {r}"));
        }
        Ok(Self { r, log_r: ln(r) })
    }

    /// `R = T^θ`.
    pub fn from_exponent(t: f64, theta: f64) -> Result<Self> {
        Self::new(crate::numeric::pow(t, theta))
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn log_r(&self) -> f64 {
        self.log_r
    }
}

/// Bulk evaluation of `Λ_R` and `ν` over intervals.
///
/// Holds the pairs `(k, μ(k) log(R/k))` for squarefree `k < R`; each interval
/// is sieved by adding the coefficient to every multiple of `k`.
#[derive(Debug, Clone)]
pub struct NuWeights {
    level: SieveLevel,
    terms: Vec<(u64, f64)>,
}

impl NuWeights {
    pub fn new(level: SieveLevel, table: &SieveTable) -> Result<Self> {
        let kmax = libm::ceil(level.r) as u64 - 1;
        if kmax > table.limit() {
            return Err(Error::Capacity {
                requested: kmax,
                limit: table.limit(),
            });
        }
        let terms = (1..=kmax)
            .filter(|&k| (k as f64) < level.r)
            .filter_map(|k| {
                let mu = table.mobius[k as usize];
                (mu != 0).then(|| (k, mu as f64 * (level.log_r - ln(k as f64))))
            })
            .collect();
        Ok(Self { level, terms })
    }

    pub fn level(&self) -> &SieveLevel {
        &self.level
    }

    /// `Λ_R(n)` for `n` in `lo..hi` (requires `lo ≥ 1`).
    pub fn lambda_range(&self, lo: u64, hi: u64) -> Vec<f64> {
        debug_assert!(lo >= 1);
        let len = hi.saturating_sub(lo) as usize;
        let mut acc = vec![0.0; len];
        for &(k, c) in &self.terms {
            let first = lo.div_ceil(k) * k;
            let mut m = first;
            while m < hi {
                acc[(m - lo) as usize] += c;
                m += k;
            }
        }
        acc
    }

    /// `ν(n)` for `n` in `lo..hi`.
    pub fn nu_range(&self, lo: u64, hi: u64) -> Vec<f64> {
        let inv = 1.0 / self.level.log_r;
        let mut v = self.lambda_range(lo, hi);
        for x in &mut v {
            *x = *x * *x * inv;
        }
        v
    }
}

/// `∏ (1 − 1/(p−1)²)` over the odd primes of the iterator.
fn twin_product(primes: impl Iterator<Item = u64>) -> f64 {
    primes.filter(|&p| p > 2).fold(1.0, |acc, p| {
        let q = (p - 1) as f64;
        acc * (1.0 - 1.0 / (q * q))
    })
}

/// Primes up to `n` by the sieve of Eratosthenes.
fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Partial product for the twin-prime constant `C₂` over odd primes `≤ cutoff`.
pub fn twin_constant(prime_cutoff: u64) -> f64 {
    twin_product(primes_up_to(prime_cutoff).into_iter())
}

/// The singular series `𝔖₂` with a fixed approximation of `C₂`.
#[derive(Debug, Clone, Copy)]
pub struct SingularSeries {
    c2: f64,
}

impl SingularSeries {
    pub fn new(prime_cutoff: u64) -> Self {
        Self {
            c2: twin_constant(prime_cutoff),
        }
    }

    pub fn from_table(table: &SieveTable) -> Self {
        Self {
            c2: table.twin_constant(),
        }
    }

    pub fn twin_constant(&self) -> f64 {
        self.c2
    }

    /// `𝔖₂(k)` by trial division: 0 for odd `k`, else `2C₂ ∏_{p | k/2, p > 2} (p−1)/(p−2)`.
    pub fn eval(&self, k: u64) -> f64 {
        if k == 0 || k % 2 == 1 {
            return 0.0;
        }
        let mut n = k / 2;
        while n % 2 == 0 {
            n /= 2;
        }
        let mut value = 2.0 * self.c2;
        let mut p = 3;
        while p * p <= n {
            if n % p == 0 {
                value *= (p - 1) as f64 / (p - 2) as f64;
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 2;
        }
        if n > 1 {
            value *= (n - 1) as f64 / (n - 2) as f64;
        }
        value
    }

    /// `𝔖₂(a·b)` for coprime `a, b` within the table, without forming `a·b`.
    pub fn eval_coprime_product(&self, a: u64, b: u64, table: &SieveTable) -> Result<f64> {
        if (a % 2 == 1) && (b % 2 == 1) {
            return Ok(0.0);
        }
        let mut value = 2.0 * self.c2;
        for n in [a, b] {
            for &p in table.factorize(n)?.primes() {
                if p > 2 {
                    value *= (p - 1) as f64 / (p - 2) as f64;
                }
            }
        }
        Ok(value)
    }
}

/// `𝔖₂(k)` with `C₂` truncated at `prime_cutoff`.
pub fn singular_series(k: u64, prime_cutoff: u64) -> f64 {
    SingularSeries::new(prime_cutoff).eval(k)
}

/// Left side, main term and their difference for one of the sieve identities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            residual: lhs - rhs,
        }
    }
}

/// Denominator in the first sieve identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DivisorWeight {
    /// `μ(d)/d`, main term `k/φ(k)`.
    Unit,
    /// `μ(d)/φ(d)`, main term `𝔖₂(k)`.
    Phi,
}

fn check_level_in_table(r: f64, table: &SieveTable) -> Result<u64> {
    if !(r >= 2.0) {
        return Err(domain!("R must be at least 2, got {r}"));
    }
    let rf = libm::floor(r) as u64;
    if rf > table.limit() {
        return Err(Error::Capacity {
            requested: rf,
            limit: table.limit(),
        });
    }
    Ok(rf)
}

/// `Σ_{d≤R,(d,k)=1} μ(d)/w(d) · log(R/d)` against `k/φ(k)` or `𝔖₂(k)`.
pub fn goldston_lemma1(
    r: f64,
    k: u64,
    weight: DivisorWeight,
    table: &SieveTable,
) -> Result<IdentityCheck> {
    let rf = check_level_in_table(r, table)?;
    if k == 0 || k as f64 > r {
        return Err(domain!("k must satisfy 1 ≤ k ≤ R, got k={k}, R={r}"));
    }
    let log_r = ln(r);
    let mut s = CompensatedSum::new();
    for d in 1..=rf {
        let mu = table.mobius[d as usize];
        if mu == 0 || gcd(d, k) != 1 {
            continue;
        }
        let w = match weight {
            DivisorWeight::Unit => d as f64,
            DivisorWeight::Phi => table.phi[d as usize] as f64,
        };
        s.add(mu as f64 / w * (log_r - ln(d as f64)));
    }
    let rhs = match weight {
        DivisorWeight::Unit => k as f64 / table.euler_phi(k)? as f64,
        DivisorWeight::Phi => SingularSeries::from_table(table).eval(k),
    };
    Ok(IdentityCheck::new(s.value(), rhs))
}

/// `Σ_{d≤R,(d,k)=1} μ²(d)/φ(d) · 𝔖₂(dk)` against `log R`.
pub fn goldston_lemma2(r: f64, k: u64, table: &SieveTable) -> Result<IdentityCheck> {
    let rf = check_level_in_table(r, table)?;
    if k == 0 || k as f64 > r {
        return Err(domain!("k must satisfy 1 ≤ k ≤ R, got k={k}, R={r}"));
    }
    let series = SingularSeries::from_table(table);
    let mut s = CompensatedSum::new();
    for d in 1..=rf {
        if table.mobius[d as usize] == 0 || gcd(d, k) != 1 {
            continue;
        }
        let sg = series.eval_coprime_product(d, k, table)?;
        if sg != 0.0 {
            s.add(sg / table.phi[d as usize] as f64);
        }
    }
    Ok(IdentityCheck::new(s.value(), ln(r)))
}

/// Average of `Λ_R²` along the progression `qn + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProgressionAverageReport {
    pub lhs: f64,
    pub main_term: f64,
    pub residual: f64,
    pub start: u64,
    pub length: u64,
    pub q: u64,
    pub j: u64,
    /// `|I| < R²`: the `O(R²/|I|)` error term dominates.
    pub low_confidence: bool,
}

/// `(1/|I|) Σ_{n∈I} Λ_R(qn+j)²` over `I = start..start+length` against `(q/φ(q)) log R`.
pub fn nu_progression_average(
    start: u64,
    length: u64,
    q: u64,
    j: u64,
    level: &SieveLevel,
    table: &SieveTable,
) -> Result<ProgressionAverageReport> {
    if q == 0 || length == 0 || start == 0 {
        return Err(domain!("need q ≥ 1, start ≥ 1 and a non-empty interval"));
    }
    if gcd(j, q) != 1 {
        return Err(domain!("residue j={j} is not coprime to q={q}"));
    }
    let top = q * (start + length - 1) + j;
    if top > table.limit() {
        return Err(Error::Capacity {
            requested: top,
            limit: table.limit(),
        });
    }
    let mut s = CompensatedSum::new();
    for n in start..start + length {
        let l = table.lambda_r(q * n + j, level)?;
        s.add(l * l);
    }
    let lhs = s.value() / length as f64;
    let main_term = q as f64 / table.euler_phi(q)? as f64 * level.log_r;
    Ok(ProgressionAverageReport {
        lhs,
        main_term,
        residual: lhs - main_term,
        start,
        length,
        q,
        j,
        low_confidence: (length as f64) < level.r * level.r,
    })
}

/// Both sides of the Siegel–Walfisz statement for `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiegelWalfiszReport {
    pub weighted: f64,
    pub coprime_side: f64,
    pub residual: f64,
}

/// Compares `(1/|I|) Σ f(n) ν(n)` with `(q/(φ(q)|I|)) Σ_{(n,q)=1} f(n)`.
///
/// `f` is given by its values on residues `0..q` and is rescaled to sup norm 1.
pub fn siegel_walfisz_check(
    start: u64,
    length: u64,
    f: &[f64],
    level: &SieveLevel,
    table: &SieveTable,
) -> Result<SiegelWalfiszReport> {
    let q = f.len() as u64;
    if q == 0 || start == 0 {
        return Err(domain!("need a non-empty residue table and start ≥ 1"));
    }
    let min_len = libm::ceil(q as f64 * level.r * level.r * level.r) as u64;
    if length < min_len {
        return Err(precondition!(
            "interval length {length} is below the required minimum q·R³ = {min_len}"
        ));
    }
    let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(domain!("residue table must have a finite non-zero sup norm"));
    }
    let weights = NuWeights::new(*level, table)?;
    let phi_q = table.euler_phi(q)? as f64;
    let mut weighted = CompensatedSum::new();
    let mut coprime = CompensatedSum::new();
    const CHUNK: u64 = 1 << 16;
    let end = start + length;
    let mut lo = start;
    while lo < end {
        let hi = (lo + CHUNK).min(end);
        for (i, nu) in weights.nu_range(lo, hi).into_iter().enumerate() {
            let n = lo + i as u64;
            let fv = f[(n % q) as usize] / scale;
            weighted.add(fv * nu);
            if gcd(n, q) == 1 {
                coprime.add(fv);
            }
        }
        lo = hi;
    }
    let len = length as f64;
    let weighted = weighted.value() / len;
    let coprime_side = q as f64 / (phi_q * len) * coprime.value();
    Ok(SiegelWalfiszReport {
        weighted,
        coprime_side,
        residual: weighted - coprime_side,
    })
}

/// `(1/N) Σ_{n≤N} ν(n)`.
pub fn nu_average(n_max: u64, level: &SieveLevel, table: &SieveTable) -> Result<f64> {
    let weights = NuWeights::new(*level, table)?;
    let mut parts = Vec::new();
    const CHUNK: u64 = 1 << 16;
    let mut lo = 1;
    while lo <= n_max {
        let hi = (lo + CHUNK).min(n_max + 1);
        parts.push(csum(weights.nu_range(lo, hi)));
        lo = hi;
    }
    Ok(crate::numeric::pairwise_sum(&parts) / n_max as f64)
}

/// `Σ_{k<R} 1/(k log(R/k))`, the first error sum in the progression estimate.
pub fn first_error_sum(r: f64) -> f64 {
    let kmax = libm::ceil(r) as u64 - 1;
    csum((1..=kmax).map(|k| {
        let k = k as f64;
        1.0 / (k * ln(r / k))
    }))
}

/// `Σ_{k<R} 1/(φ(k) log²(R/k))`, the second error sum.
pub fn second_error_sum(r: f64, table: &SieveTable) -> Result<f64> {
    let kmax = libm::ceil(r) as u64 - 1;
    if kmax > table.limit() {
        return Err(Error::Capacity {
            requested: kmax,
            limit: table.limit(),
        });
    }
    Ok(csum((1..=kmax).map(|k| {
        let l = ln(r / k as f64);
        1.0 / (table.phi[k as usize] as f64 * l * l)
    })))
}
