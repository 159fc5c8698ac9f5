use crate::direct_integral::{Element, System};
use crate::error::{Error, Result};
use crate::majorants::{check_len, MajorantProfile};
use crate::scalar::{fiber_norm_sq, Scalar};

/// Largest `N * sum_i d_i` the oracle will materialize.
pub const ORACLE_BUDGET: usize = 10_000_000;

/// `S_N*` by brute force: builds every prefix element, then scans them atom
/// by atom.
pub fn oracle_majorant<S: Scalar>(system: &System<S>, a: &[S], n: usize) -> Result<MajorantProfile> {
    check_len(system, a, n)?;
    let cost = n.saturating_mul(system.fibers.total_dim());
    if cost > ORACLE_BUDGET {
        return Err(Error::Budget(format!(
            "oracle needs {cost} stored scalars, budget is {ORACLE_BUDGET}"
        )));
    }
    let mut prefixes: Vec<Element<S>> = Vec::with_capacity(n);
    let mut acc = Element::zeros(&system.fibers);
    for (c, phi) in a[..n].iter().zip(system.elements()) {
        acc.axpy(*c, phi);
        prefixes.push(acc.clone());
    }
    let atoms = system.fibers.len();
    let mut values = vec![0.0; atoms];
    let mut argmax = vec![1; atoms];
    for (i, (v, arg)) in values.iter_mut().zip(argmax.iter_mut()).enumerate() {
        for (j, p) in prefixes.iter().enumerate() {
            let norm = fiber_norm_sq(p.block(i)).sqrt();
            if norm > *v {
                *v = norm;
                *arg = j + 1;
            }
        }
    }
    Ok(MajorantProfile::from_values(system, values, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorants::majorant;
    use crate::systems::{generate, SystemKind, SystemSpec};

    #[test]
    fn basis_example() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::StandardBasis, 2)).unwrap();
        let m = oracle_majorant(&s, &[3.0, 4.0], 2).unwrap();
        assert_eq!(m.values, vec![3.0, 4.0]);
        let z = oracle_majorant(&s, &[0.0, 0.0], 2).unwrap();
        assert_eq!(z.values, vec![0.0, 0.0]);
    }

    #[test]
    fn agrees_with_streaming() {
        let spec = SystemSpec::minimal(SystemKind::RandomQr, 40)
            .with_fiber_dim(3)
            .with_seed(11);
        let s: System<f64> = generate(&spec).unwrap();
        let a: Vec<f64> = (1..=40).map(|n| (n as f64).sin()).collect();
        assert_eq!(oracle_majorant(&s, &a, 40).unwrap(), majorant(&s, &a, 40).unwrap());
    }

    #[test]
    fn budget_enforced() {
        let s: System<f64> = generate(&SystemSpec::minimal(SystemKind::StandardBasis, 4000)).unwrap();
        assert!(matches!(
            oracle_majorant(&s, &vec![1.0; 4000], 4000),
            Err(Error::Budget(_))
        ));
    }
}
