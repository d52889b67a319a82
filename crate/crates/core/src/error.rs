use core::fmt;

/// Errors surfaced by construction and numeric routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Fewer than two arms where a comparison is required.
    TooFewArms { k: usize },
    /// A success probability lies outside the open interval (0, 1).
    OutOfRange { arm: usize, value: f64 },
    /// Two arms share the maximal mean; the best arm must be unique.
    TiedBestArm { first: usize, second: usize },
    /// Instance label outside 1..=k.
    LabelOutOfRange { label: usize, k: usize },
    /// Vectors that must share the arm dimension do not.
    LengthMismatch { expected: usize, got: usize },
    /// A Beta parameter is non-positive or non-finite.
    NonPositiveParameter { name: &'static str, value: f64 },
    /// Success count exceeds trial count.
    InvalidCounts { successes: u64, trials: u64 },
    /// Every probability-of-best entry is exactly 0 or 1, so the
    /// exploration-sampling normalizer is undefined.
    DegenerateBelief,
    /// KL divergence reference point is 0 or 1 (divergent).
    DivergentReference { q: f64 },
    /// Rate function requires theta1 > thetaj, both in (0, 1).
    ThetaOrderViolated { theta1: f64, thetaj: f64 },
    /// Exactly two arms required.
    NotTwoArms { k: usize },
    /// Reachable state space exceeds the configured cap.
    StateSpaceTooLarge { states: u64, cap: u64 },
    /// Outcome path space exceeds the configured cap.
    PathSpaceTooLarge { cap: u64 },
    /// Not enough usable points for a fit.
    TooFewPoints { needed: usize, usable: usize },
    /// A count or size parameter that must be positive is zero.
    ZeroParameter { name: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewArms { k } => write!(f, "need at least 2 arms, got {k}"),
            Error::OutOfRange { arm, value } => {
                write!(f, "theta[{arm}] = {value} outside the open interval (0, 1)")
            }
            Error::TiedBestArm { first, second } => {
                write!(f, "arms {first} and {second} tie for the best mean")
            }
            Error::LabelOutOfRange { label, k } => {
                write!(f, "instance label {label} outside 1..={k}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} arms, got {got}")
            }
            Error::NonPositiveParameter { name, value } => {
                write!(f, "{name} must be positive and finite, got {value}")
            }
            Error::InvalidCounts { successes, trials } => {
                write!(f, "successes {successes} exceed trials {trials}")
            }
            Error::DegenerateBelief => {
                write!(f, "all probability-of-best entries are 0 or 1; exploration shares undefined")
            }
            Error::DivergentReference { q } => {
                write!(f, "KL reference {q} is on the boundary; divergence is infinite")
            }
            Error::ThetaOrderViolated { theta1, thetaj } => {
                write!(f, "rate function needs theta1 > thetaj in (0,1), got {theta1} <= {thetaj}")
            }
            Error::NotTwoArms { k } => write!(f, "exactly 2 arms required, got {k}"),
            Error::StateSpaceTooLarge { states, cap } => {
                write!(f, "state space has {states} states, cap is {cap}")
            }
            Error::PathSpaceTooLarge { cap } => {
                write!(f, "outcome path space exceeds cap of {cap} paths")
            }
            Error::TooFewPoints { needed, usable } => {
                write!(f, "need at least {needed} usable points, got {usable}")
            }
            Error::ZeroParameter { name } => write!(f, "{name} must be at least 1"),
        }
    }
}

impl core::error::Error for Error {}
