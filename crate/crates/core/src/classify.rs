//! Five-class entanglement classification of three-mode states.
//!
//! | class | parties with non-positive partial transpose |
//! |-------|---------------------------------------------|
//! | 1     | all three (fully inseparable)               |
//! | 2     | two (one-mode biseparable)                  |
//! | 3     | one (two-mode biseparable)                  |
//! | 4     | none, not fully separable (bound entangled) |
//! | 5     | none, fully separable                       |

use serde::Serialize;

use crate::cm::{require_valid, twisted_heisenberg_check, CorrelationMatrix, Party};
use crate::error::{Error, Result};
use crate::linalg::ToleranceConfig;
use crate::sepcrit::{is_fully_separable, SepDecision};

/// Per-party flags; `true` means the partial transpose is NOT positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[allow(non_snake_case)]
pub struct NptFlags {
    pub A: bool,
    pub B: bool,
    pub C: bool,
}

impl NptFlags {
    pub fn get(&self, party: Party) -> bool {
        match party {
            Party::A => self.A,
            Party::B => self.B,
            Party::C => self.C,
        }
    }

    pub fn count(&self) -> usize {
        [self.A, self.B, self.C].iter().filter(|&&f| f).count()
    }

    pub fn npt_parties(&self) -> Vec<Party> {
        Party::ALL.into_iter().filter(|&p| self.get(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class_label: u8,
    pub npt_flags: NptFlags,
    /// Smallest eigenvalue of the partially transposed `γ - iJ`, per party.
    pub min_eigs: [f64; 3],
    pub sep_decision: Option<SepDecision>,
}

/// PPT test per party. A minimum eigenvalue within the tolerance band below
/// zero counts as positive, since boundary states sit exactly at zero.
pub fn npt_flags(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<(NptFlags, [f64; 3])> {
    if gamma.n_modes() != 3 {
        return Err(Error::InvalidArgument(format!(
            "classification needs three modes, got {}",
            gamma.n_modes()
        )));
    }
    require_valid(gamma, tol)?;
    let mut flags = [false; 3];
    let mut mins = [0.0; 3];
    for (k, party) in Party::ALL.into_iter().enumerate() {
        let check = twisted_heisenberg_check(gamma, Some(party), tol.psd)?;
        flags[k] = !check.verdict;
        mins[k] = check.min_eigenvalue;
    }
    Ok((
        NptFlags {
            A: flags[0],
            B: flags[1],
            C: flags[2],
        },
        mins,
    ))
}

pub fn classify(gamma: &CorrelationMatrix, tol: &ToleranceConfig) -> Result<Classification> {
    let (flags, min_eigs) = npt_flags(gamma, tol)?;
    let (class_label, sep_decision) = match flags.count() {
        3 => (1, None),
        2 => (2, None),
        1 => (3, None),
        _ => {
            let d = is_fully_separable(gamma, tol)?;
            (if d.separable { 5 } else { 4 }, Some(d))
        }
    };
    Ok(Classification {
        class_label,
        npt_flags: flags,
        min_eigs,
        sep_decision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;

    fn two_mode_squeezed_plus_vacuum(c: f64) -> CorrelationMatrix {
        let a = (1.0 + c * c).sqrt();
        let mut g = RMat::identity(6, 6);
        for k in 0..4 {
            g[(k, k)] = a;
        }
        g[(0, 2)] = c;
        g[(2, 0)] = c;
        g[(1, 3)] = -c;
        g[(3, 1)] = -c;
        CorrelationMatrix::new(g).unwrap()
    }

    #[test]
    fn vacuum_is_class_five() {
        let c = classify(&CorrelationMatrix::identity(3), &ToleranceConfig::default()).unwrap();
        assert_eq!(c.class_label, 5);
        assert_eq!(c.npt_flags.count(), 0);
        assert!(c.sep_decision.unwrap().separable);
    }

    #[test]
    fn two_mode_squeezing_is_class_two() {
        let cm = two_mode_squeezed_plus_vacuum(0.3);
        let c = classify(&cm, &ToleranceConfig::default()).unwrap();
        assert_eq!(
            c.npt_flags,
            NptFlags {
                A: true,
                B: true,
                C: false
            }
        );
        assert_eq!(c.class_label, 2);
        assert!(c.sep_decision.is_none());
        assert_eq!(c.npt_flags.npt_parties(), vec![Party::A, Party::B]);
    }

    #[test]
    fn invalid_input_is_rejected() {
        let cm = CorrelationMatrix::new(RMat::identity(6, 6) * 0.5).unwrap();
        assert!(matches!(
            classify(&cm, &ToleranceConfig::default()),
            Err(Error::PreconditionViolation(_))
        ));
    }
}
