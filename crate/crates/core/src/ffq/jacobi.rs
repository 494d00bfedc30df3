use super::{raw, FieldOrder, MonicPoly, Poly};

/// Jacobi symbol (B/A) for monic A, by reciprocity descent.
///
/// Each step reduces B mod A, pulls out the leading coefficient c of B (contributing
/// `legendre(c)^deg A`), and flips the pair with the sign (−1)^{((q−1)/2)·deg A·deg B}.
/// For deg A = 0 the symbol is 1.
pub fn jacobi(b: &Poly, a: &MonicPoly) -> i8 {
    assert_eq!(b.field(), a.field(), "jacobi: mismatched fields");
    let mut num = b.coeffs().to_vec();
    let mut den = a.coeffs().to_vec();
    jacobi_raw(&mut num, &mut den, a.field())
}

/// Slice form of [`jacobi`]; `den` must be monic. Both buffers are consumed as workspace.
pub fn jacobi_raw(num: &mut Vec<u64>, den: &mut Vec<u64>, f: FieldOrder) -> i8 {
    let flips = f.reciprocity_flips();
    let mut sign = 1i8;
    loop {
        let dd = den.len() - 1;
        if dd == 0 {
            return sign;
        }
        raw::rem_monic(num, den, f);
        if num.is_empty() {
            return 0;
        }
        let dn = num.len() - 1;
        let lead = num[dn];
        if lead != 1 {
            if dd % 2 == 1 {
                sign *= f.legendre(lead);
            }
            raw::make_monic(num, f);
        }
        if dn == 0 {
            return sign;
        }
        if flips && dd % 2 == 1 && dn % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(num, den);
    }
}
