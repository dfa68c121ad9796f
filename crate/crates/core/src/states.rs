//! Canonical fixture states used across the test suites and exposed through
//! the CLI. All entries are exact rational/root constants.

use crate::error::{MpnfError, Result};
use crate::linalg::C64;
use crate::tensor::MultiTensor;

/// Identifier of a canonical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalState {
    /// (|00⟩+|11⟩)/√2.
    Bell,
    /// (|0…0⟩+|1…1⟩)/√2 on `parties` qubits.
    Ghz { parties: usize },
    /// |001⟩+|010⟩+|100⟩ (normalized on request).
    W,
    /// Bell pair on parties 1,2 tensored with a Bell pair on parties 3,4.
    TwoBellProduct,
    /// (|000⟩+|011⟩+|102⟩+|113⟩)/2 — the 2×2×4 analogue of the GHZ state.
    Ghz224,
    /// 1/√3|000⟩+1/√6|011⟩+1/√6|101⟩+1/√3|112⟩ — the 2×2×3 analogue.
    Ghz223,
    /// a(|0000⟩+|1111⟩)+|0110⟩+|0101⟩; finite normal form reachable only by
    /// unbounded filters.
    UnboundedExample { a: f64 },
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Build a canonical state. With `normalized` the result has unit norm;
/// otherwise the leading coefficient is 1 (the "plain ket sum" form).
pub fn make(id: CanonicalState, normalized: bool) -> Result<MultiTensor> {
    let t = match id {
        CanonicalState::Bell => {
            let mut t = MultiTensor::zeros(vec![2, 2])?;
            t.set(&[0, 0], re(1.0))?;
            t.set(&[1, 1], re(1.0))?;
            t
        }
        CanonicalState::Ghz { parties } => {
            if parties < 2 {
                return Err(MpnfError::UnknownState(format!("ghz with {parties} parties")));
            }
            let mut t = MultiTensor::zeros(vec![2; parties])?;
            t.set(&vec![0; parties], re(1.0))?;
            t.set(&vec![1; parties], re(1.0))?;
            t
        }
        CanonicalState::W => {
            let mut t = MultiTensor::zeros(vec![2, 2, 2])?;
            t.set(&[0, 0, 1], re(1.0))?;
            t.set(&[0, 1, 0], re(1.0))?;
            t.set(&[1, 0, 0], re(1.0))?;
            t
        }
        CanonicalState::TwoBellProduct => {
            let mut t = MultiTensor::zeros(vec![2, 2, 2, 2])?;
            for ij in 0..2usize {
                for kl in 0..2usize {
                    t.set(&[ij, ij, kl, kl], re(1.0))?;
                }
            }
            t
        }
        CanonicalState::Ghz224 => {
            let mut t = MultiTensor::zeros(vec![2, 2, 4])?;
            t.set(&[0, 0, 0], re(1.0))?;
            t.set(&[0, 1, 1], re(1.0))?;
            t.set(&[1, 0, 2], re(1.0))?;
            t.set(&[1, 1, 3], re(1.0))?;
            t
        }
        CanonicalState::Ghz223 => {
            let mut t = MultiTensor::zeros(vec![2, 2, 3])?;
            let half_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            t.set(&[0, 0, 0], re(1.0))?;
            t.set(&[0, 1, 1], re(half_sqrt2))?;
            t.set(&[1, 0, 1], re(half_sqrt2))?;
            t.set(&[1, 1, 2], re(1.0))?;
            t
        }
        CanonicalState::UnboundedExample { a } => {
            let mut t = MultiTensor::zeros(vec![2, 2, 2, 2])?;
            t.set(&[0, 0, 0, 0], re(a))?;
            t.set(&[1, 1, 1, 1], re(a))?;
            t.set(&[0, 1, 1, 0], re(1.0))?;
            t.set(&[0, 1, 0, 1], re(1.0))?;
            t
        }
    };
    if normalized {
        t.normalized()
    } else {
        Ok(t)
    }
}

/// Parse a CLI-facing state name, e.g. `ghz3`, `w`, `ghz-224`.
pub fn parse_name(name: &str, a: Option<f64>) -> Result<CanonicalState> {
    let lower = name.to_ascii_lowercase().replace('_', "-");
    if let Some(rest) = lower.strip_prefix("ghz") {
        match rest {
            "-224" | "224" => return Ok(CanonicalState::Ghz224),
            "-223" | "223" => return Ok(CanonicalState::Ghz223),
            "" => return Ok(CanonicalState::Ghz { parties: 3 }),
            _ => {
                if let Ok(p) = rest.trim_start_matches('-').parse::<usize>() {
                    return Ok(CanonicalState::Ghz { parties: p });
                }
            }
        }
    }
    match lower.as_str() {
        "bell" => Ok(CanonicalState::Bell),
        "w" => Ok(CanonicalState::W),
        "two-bell-product" | "bellxbell" => Ok(CanonicalState::TwoBellProduct),
        "unbounded" | "unbounded-example" => {
            Ok(CanonicalState::UnboundedExample { a: a.unwrap_or(0.5) })
        }
        _ => Err(MpnfError::UnknownState(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::tensor::pure_to_density;

    #[test]
    fn ghz3_entries() {
        let g = make(CanonicalState::Ghz { parties: 3 }, true).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.get(&[0, 0, 0]).unwrap().re - s).abs() < 1e-15);
        assert!((g.get(&[1, 1, 1]).unwrap().re - s).abs() < 1e-15);
        assert!((g.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w_has_three_equal_entries() {
        let w = make(CanonicalState::W, true).unwrap();
        let v = 1.0 / 3.0f64.sqrt();
        for idx in [[0usize, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert!((w.get(&idx).unwrap().re - v).abs() < 1e-15);
        }
    }

    #[test]
    fn ghz223_third_party_reduced_operator_is_maximally_mixed() {
        let g = make(CanonicalState::Ghz223, true).unwrap();
        let r = pure_to_density(&g).partial_trace(2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((r[[i, j]] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn normal_form_fixtures_have_maximally_mixed_reductions() {
        for id in [
            CanonicalState::Ghz { parties: 3 },
            CanonicalState::Ghz { parties: 4 },
            CanonicalState::Ghz224,
            CanonicalState::Ghz223,
            CanonicalState::TwoBellProduct,
        ] {
            let psi = make(id, true).unwrap();
            for k in 0..psi.party_count() {
                let r = psi.reduced_density(k).unwrap();
                let n = r.nrows();
                let mut dev = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { 1.0 / n as f64 } else { 0.0 };
                        dev += (r[[i, j]] - C64::new(expect, 0.0)).norm_sqr();
                    }
                }
                assert!(dev.sqrt() < 1e-12, "{id:?} party {k}");
            }
        }
    }

    #[test]
    fn w_is_not_in_normal_form() {
        let w = make(CanonicalState::W, true).unwrap();
        let r = w.reduced_density(0).unwrap();
        let dev = linalg::frobenius(
            &(&r - &linalg::identity(2).mapv(|z| z * C64::new(0.5, 0.0))),
        );
        assert!(dev > 0.2);
    }

    #[test]
    fn unbounded_example_entries() {
        let t = make(CanonicalState::UnboundedExample { a: 0.7 }, false).unwrap();
        assert!((t.get(&[0, 0, 0, 0]).unwrap().re - 0.7).abs() < 1e-15);
        assert!((t.get(&[0, 1, 1, 0]).unwrap().re - 1.0).abs() < 1e-15);
        assert!((t.get(&[0, 1, 0, 1]).unwrap().re - 1.0).abs() < 1e-15);
        assert!((t.norm2() - (2.0 * 0.49 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn name_parsing() {
        assert_eq!(parse_name("ghz4", None).unwrap(), CanonicalState::Ghz { parties: 4 });
        assert_eq!(parse_name("GHZ-224", None).unwrap(), CanonicalState::Ghz224);
        assert_eq!(parse_name("w", None).unwrap(), CanonicalState::W);
        assert!(parse_name("nope", None).is_err());
    }
}
