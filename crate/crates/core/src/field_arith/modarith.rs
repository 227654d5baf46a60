//! Word-sized modular arithmetic for residue fields of prime ideals.

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Euler's criterion in `F_p` for an odd prime `p`.
pub(crate) fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub(crate) fn inverse_mod(a: u64, p: u64) -> u64 {
    // p prime
    pow_mod(a, p - 2, p)
}

/// Tonelli–Shanks square root modulo an odd prime. Returns `None` for non-residues.
pub(crate) fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// The residue field `F_p[w]/(w^2 - trace*w - constant)` of an inert prime.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QuadraticExtension {
    pub p: u64,
    pub trace: u64,
    pub constant: u64,
}

impl QuadraticExtension {
    pub fn mul(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        // (a0 + a1 w)(b0 + b1 w) with w^2 = trace*w + constant
        let a1b1 = mul_mod(a.1, b.1, p);
        let c0 = add_mod(mul_mod(a.0, b.0, p), mul_mod(a1b1, self.constant, p), p);
        let c1 = add_mod(
            add_mod(mul_mod(a.0, b.1, p), mul_mod(a.1, b.0, p), p),
            mul_mod(a1b1, self.trace, p),
            p,
        );
        (c0, c1)
    }

    pub fn pow(&self, mut base: (u64, u64), mut exp: u128) -> (u64, u64) {
        let mut acc = (1 % self.p, 0);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_mod_matches_brute_force() {
        for &p in &[3u64, 5, 7, 11, 13, 17, 41, 97, 113, 257] {
            for a in 0..p {
                let brute = (0..p).find(|x| x * x % p == a);
                match sqrt_mod(a, p) {
                    Some(r) => {
                        assert_eq!(r * r % p, a);
                        assert!(brute.is_some());
                    }
                    None => assert!(brute.is_none(), "a={a} p={p}"),
                }
            }
        }
    }

    #[test]
    fn legendre_small() {
        assert_eq!(legendre(5, 11), 1);
        assert_eq!(legendre(2, 5), -1);
        assert_eq!(legendre(10, 5), 0);
    }

    #[test]
    fn extension_field_order() {
        // F_9 = F_3[w]/(w^2 - w - 1): every nonzero element has order dividing 8.
        let f = QuadraticExtension { p: 3, trace: 1, constant: 1 };
        for a0 in 0..3 {
            for a1 in 0..3 {
                if (a0, a1) == (0, 0) {
                    continue;
                }
                assert_eq!(f.pow((a0, a1), 8), (1, 0));
            }
        }
    }
}
