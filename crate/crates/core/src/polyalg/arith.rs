/// Classical Möbius function.
pub fn mobius(n: u64) -> i32 {
    assert!(n >= 1, "mobius is defined for n >= 1");
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n % k == 0 {
            small.push(k);
            if k * k != n {
                large.push(n / k);
            }
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Number of points of exact period `n` of a degree-`d` polynomial,
/// `Σ_{k|n} μ(n/k) d^k`.
pub fn nu(d: u64, n: u64) -> u64 {
    let total: i128 = divisors(n)
        .into_iter()
        .map(|k| mobius(n / k) as i128 * (d as i128).pow(k as u32))
        .sum();
    total as u64
}
