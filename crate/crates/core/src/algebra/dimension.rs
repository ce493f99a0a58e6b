//! Closed-form dimension counts.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::module::ModuleFamily;
use crate::indices::binomial;
use crate::{Error, Result};

/// `dim W` for a module family: `dim S^{r−1}₀ℝ^{n+2}` for the scalar family,
/// `dim Λ²ℝ^{n+2}` for the adjoint family.
pub fn module_dimension(family: ModuleFamily, n: usize) -> Result<usize> {
    match family {
        ModuleFamily::Scalar { r } => {
            if r < 1 {
                return Err(Error::InvalidArgument("r must be at least 1".into()));
            }
            let trace = if r >= 3 {
                binomial(n + r - 2, r - 3)
            } else {
                0
            };
            Ok(binomial(n + r, r - 1) - trace)
        }
        ModuleFamily::Adjoint => Ok((n + 2) * (n + 1) / 2),
    }
}

/// `dim Sʳ₀ℝⁿ`.
pub fn tracefree_symmetric_dimension(n: usize, r: usize) -> usize {
    let trace = if r >= 2 {
        binomial(n + r - 3, r - 2)
    } else {
        0
    };
    binomial(n + r - 1, r) - trace
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Dimension of the space of conformal Killing tensors of valence `k`,
/// `(n+k−3)!(n+k−2)!(n+2k)! / (k!(k+1)!(n−2)!n!(n+2k−3)!)`.
pub fn killing_tensor_dimension_big(n: usize, k: usize) -> Result<BigUint> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "conformal Killing count needs n ≥ 3, got {n}"
        )));
    }
    let num = factorial(n + k - 3) * factorial(n + k - 2) * factorial(n + 2 * k);
    let den = factorial(k)
        * factorial(k + 1)
        * factorial(n - 2)
        * factorial(n)
        * factorial(n + 2 * k - 3);
    if (&num % &den) != BigUint::zero() {
        return Err(Error::Invariant(format!(
            "conformal Killing count for n={n}, k={k} is not an integer"
        )));
    }
    Ok(num / den)
}

pub fn killing_tensor_dimension(n: usize, k: usize) -> Result<usize> {
    killing_tensor_dimension_big(n, k)?
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument(format!("count for n={n}, k={k} overflows usize")))
}

/// The closed form `(n+2r−2)·(n+2r−2)!/(n!(r−1)!)` sometimes quoted for the
/// scalar family. It does not agree with the dimension of the constructed
/// module beyond `r = 1`; it is evaluated only to report that discrepancy.
pub fn quoted_scalar_formula(n: usize, r: usize) -> Result<BigUint> {
    if r < 1 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let m = n + 2 * r - 2;
    let num = BigUint::from(m) * factorial(m);
    let den = factorial(n) * factorial(r - 1);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_counts() {
        for n in 2..=6 {
            assert_eq!(
                module_dimension(ModuleFamily::Scalar { r: 2 }, n).unwrap(),
                n + 2
            );
            assert_eq!(
                module_dimension(ModuleFamily::Scalar { r: 1 }, n).unwrap(),
                1
            );
        }
        assert_eq!(
            module_dimension(ModuleFamily::Scalar { r: 3 }, 2).unwrap(),
            9
        );
        assert_eq!(tracefree_symmetric_dimension(3, 2), 5);
        assert_eq!(tracefree_symmetric_dimension(3, 3), 7);
        assert_eq!(tracefree_symmetric_dimension(2, 3), 2);
    }

    #[test]
    fn conformal_killing_vectors() {
        for n in 3..=8 {
            assert_eq!(
                killing_tensor_dimension(n, 1).unwrap(),
                (n + 1) * (n + 2) / 2
            );
        }
        assert!(killing_tensor_dimension(2, 1).is_err());
    }

    #[test]
    fn conformal_killing_two_tensors_in_three_dimensions() {
        // (2!·3!·7!)/(2!·3!·1!·3!·4!) = 35
        assert_eq!(killing_tensor_dimension(3, 2).unwrap(), 35);
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let big = killing_tensor_dimension_big(40, 30).unwrap();
        assert!(big > BigUint::from(u64::MAX));
    }

    #[test]
    fn quoted_formula_disagrees_at_r_three() {
        assert_eq!(quoted_scalar_formula(2, 3).unwrap(), BigUint::from(1080u32));
        assert_ne!(
            module_dimension(ModuleFamily::Scalar { r: 3 }, 2).unwrap(),
            1080
        );
    }
}
