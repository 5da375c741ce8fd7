//! Explicit t-wise independent sample spaces.
//!
//! Functions `[n] -> [q]` are the evaluations of every polynomial of degree
//! below `t` over the field `GF(q^m)`, at the nonzero points `1..=n`,
//! followed by projection to the lowest base-`q` coordinate. Evaluations of a
//! uniformly random polynomial at `t` distinct points are uniform over the
//! field, and the projection has equal-sized fibers, so the family is exactly
//! t-wise independent. `m` is the least exponent with `q^m > n`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleSpaceError {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("t and n must be at least 1")]
    Degenerate,
    #[error("sample space would hold {size} functions, cap is {cap}")]
    TooLarge { size: u128, cap: u128 },
}

/// `(p, e)` with `q = p^e`, if `q` is a prime power.
pub fn prime_power(q: usize) -> Option<(usize, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|&d| q.is_multiple_of(d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Smallest prime power `>= x` (at least 2).
pub fn next_prime_power(x: usize) -> usize {
    (x.max(2)..)
        .find(|&q| prime_power(q).is_some())
        .expect("prime powers are unbounded")
}

/// Polynomials over `Z_p`, lowest coefficient first, trailing zeros trimmed.
type Poly = Vec<usize>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[usize], m: &[usize], p: usize) -> Poly {
    let mut a = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = inverse_mod(m[dm], p);
    while a.len() > dm {
        let top = a.len() - 1;
        let factor = a[top] * lead_inv % p;
        if factor != 0 {
            for (i, &c) in m.iter().enumerate() {
                let idx = top - dm + i;
                a[idx] = (a[idx] + p * p - factor * c % p) % p;
            }
        }
        a.pop();
        a = trim(a);
    }
    trim(a)
}

fn inverse_mod(x: usize, p: usize) -> usize {
    (1..p)
        .find(|&y| x * y % p == 1)
        .expect("nonzero element of a prime field")
}

fn digits(mut x: usize, p: usize, len: usize) -> Poly {
    let mut d = Vec::with_capacity(len);
    for _ in 0..len {
        d.push(x % p);
        x /= p;
    }
    d
}

fn is_irreducible(f: &[usize], p: usize) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut g = digits(low, p, d);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// `GF(p^r)` with elements encoded as integers whose base-`p` digits are
/// polynomial coefficients.
struct Field {
    p: usize,
    r: usize,
    modulus: Poly,
}

impl Field {
    fn new(p: usize, r: usize) -> Self {
        let modulus = (0..p.pow(r as u32))
            .map(|low| {
                let mut f = digits(low, p, r);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .expect("irreducible polynomials exist in every degree");
        Field { p, r, modulus }
    }

    fn add(&self, x: usize, y: usize) -> usize {
        let (dx, dy) = (digits(x, self.p, self.r), digits(y, self.p, self.r));
        self.encode(
            &dx.iter()
                .zip(&dy)
                .map(|(a, b)| (a + b) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        let (dx, dy) = (digits(x, self.p, self.r), digits(y, self.p, self.r));
        let mut prod = vec![0; 2 * self.r];
        for (i, a) in dx.iter().enumerate() {
            for (j, b) in dy.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % self.p;
            }
        }
        self.encode(&poly_rem(&trim(prod), &self.modulus, self.p))
    }

    fn encode(&self, d: &[usize]) -> usize {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    pub n: usize,
    pub t: usize,
    pub q: usize,
    /// `m` with field order `q^m`.
    pub extension: u32,
    /// `functions[f][i]` is the value of function `f` at position `i`.
    pub functions: Vec<Vec<u32>>,
}

impl SampleSpace {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Least `m` with `q^m > n`, and the resulting space size `q^(m t)`
/// (`None` if it overflows `u128`).
pub fn space_size(n: usize, t: usize, q: usize) -> Result<(u32, Option<u128>), SampleSpaceError> {
    prime_power(q).ok_or(SampleSpaceError::NotPrimePower(q))?;
    if n == 0 || t == 0 {
        return Err(SampleSpaceError::Degenerate);
    }
    let mut m = 1u32;
    while (q as u128).pow(m) <= n as u128 {
        m += 1;
    }
    let size = u32::try_from(t)
        .ok()
        .and_then(|t| m.checked_mul(t))
        .and_then(|e| (q as u128).checked_pow(e));
    Ok((m, size))
}

pub fn twise_space(n: usize, t: usize, q: usize) -> Result<SampleSpace, SampleSpaceError> {
    twise_space_capped(n, t, q, u128::MAX)
}

/// As [`twise_space`], refusing to build more than `cap` functions.
pub fn twise_space_capped(
    n: usize,
    t: usize,
    q: usize,
    cap: u128,
) -> Result<SampleSpace, SampleSpaceError> {
    let (m, size) = space_size(n, t, q)?;
    let size = size.unwrap_or(u128::MAX);
    if size > cap {
        return Err(SampleSpaceError::TooLarge { size, cap });
    }
    let (p, e) = prime_power(q).expect("checked above");
    let field = Field::new(p, e as usize * m as usize);
    let order = q.pow(m);

    // x^j for every point and power, reused across polynomials
    let powers: Vec<Vec<usize>> = (1..=n)
        .map(|x| {
            let mut row = vec![1];
            for _ in 1..t {
                row.push(field.mul(*row.last().expect("nonempty"), x));
            }
            row
        })
        .collect();

    let mut functions = Vec::with_capacity(size as usize);
    let mut coeffs = vec![0usize; t];
    loop {
        let values = powers
            .iter()
            .map(|pw| {
                let v = coeffs
                    .iter()
                    .zip(pw)
                    .fold(0, |acc, (&c, &xp)| field.add(acc, field.mul(c, xp)));
                (v % q) as u32
            })
            .collect();
        functions.push(values);
        let mut i = 0;
        loop {
            if i == t {
                return Ok(SampleSpace {
                    n,
                    t,
                    q,
                    extension: m,
                    functions,
                });
            }
            coeffs[i] += 1;
            if coeffs[i] < order {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}
