use std::fmt;

use crate::scalar::Scalar;

/// A transition weight. `Infinity` only belongs to the `min-inf` domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> Weight<S> {
    pub fn finite(value: S) -> Self {
        Weight::Finite(value)
    }

    /// Parses `inf`, `∞`, or a rational `p/q`.
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "inf" | "∞" => Some(Weight::Infinity),
            t => S::parse_scalar(t).map(Weight::Finite),
        }
    }
}

impl<S: fmt::Display> fmt::Display for Weight<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(v) => write!(f, "{v}"),
            Weight::Infinity => f.write_str("inf"),
        }
    }
}

/// The built-in commutative monoids for weighted transition systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Monoid {
    /// (ℕ, +, 0)
    NatPlus,
    /// (ℚ, +, 0)
    RatPlus,
    /// (ℚ≥0 ∪ {∞}, min, ∞)
    MinInf,
}

impl Monoid {
    pub const ALL: [Monoid; 3] = [Monoid::NatPlus, Monoid::RatPlus, Monoid::MinInf];

    pub fn name(self) -> &'static str {
        match self {
            Monoid::NatPlus => "nat-plus",
            Monoid::RatPlus => "rat-plus",
            Monoid::MinInf => "min-inf",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Monoid::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn unit<S: Scalar>(self) -> Weight<S> {
        match self {
            Monoid::NatPlus | Monoid::RatPlus => Weight::Finite(S::zero()),
            Monoid::MinInf => Weight::Infinity,
        }
    }

    pub fn is_unit<S: Scalar>(self, w: &Weight<S>) -> bool {
        *w == self.unit()
    }

    pub fn combine<S: Scalar>(self, a: &Weight<S>, b: &Weight<S>) -> Weight<S> {
        match self {
            Monoid::MinInf => std::cmp::min(a, b).clone(),
            Monoid::NatPlus | Monoid::RatPlus => match (a, b) {
                (Weight::Finite(x), Weight::Finite(y)) => Weight::Finite(x.clone() + y.clone()),
                // outside the domain; absorbing keeps the operation total
                _ => Weight::Infinity,
            },
        }
    }

    pub fn sum<'a, S: Scalar>(self, items: impl IntoIterator<Item = &'a Weight<S>>) -> Weight<S> {
        items
            .into_iter()
            .fold(self.unit(), |acc, w| self.combine(&acc, w))
    }

    /// Whether guards may compare elements of this monoid.
    ///
    /// `rat-plus` is left unordered: its numeric order is not compatible with
    /// the monoid operation (adding a negative weight decreases).
    pub fn is_ordered(self) -> bool {
        matches!(self, Monoid::NatPlus | Monoid::MinInf)
    }

    pub fn is_idempotent(self) -> bool {
        matches!(self, Monoid::MinInf)
    }

    /// Domain membership.
    pub fn contains<S: Scalar>(self, w: &Weight<S>) -> bool {
        match (self, w) {
            (Monoid::NatPlus, Weight::Finite(v)) => v.is_integral() && v.is_non_negative(),
            (Monoid::RatPlus, Weight::Finite(_)) => true,
            (Monoid::MinInf, Weight::Finite(v)) => v.is_non_negative(),
            (Monoid::MinInf, Weight::Infinity) => true,
            (_, Weight::Infinity) => false,
        }
    }
}

impl fmt::Display for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use num_rational::BigRational;
    use proptest::prelude::*;

    type W = Weight<BigRational>;

    fn arb_weight(m: Monoid) -> impl Strategy<Value = W> {
        (-20i64..20, 1i64..5, any::<bool>()).prop_map(move |(n, d, inf)| match m {
            Monoid::NatPlus => Weight::Finite(int(n.abs())),
            Monoid::RatPlus => Weight::Finite(ratio(n, d)),
            Monoid::MinInf if inf => Weight::Infinity,
            Monoid::MinInf => Weight::Finite(ratio(n.abs(), d)),
        })
    }

    fn arb_monoid() -> impl Strategy<Value = Monoid> {
        prop_oneof![Just(Monoid::NatPlus), Just(Monoid::RatPlus), Just(Monoid::MinInf)]
    }

    proptest! {
        #[test]
        fn monoid_laws_hold_on_samples(
            (m, a, b, c) in arb_monoid().prop_flat_map(|m| (Just(m), arb_weight(m), arb_weight(m), arb_weight(m)))
        ) {
            prop_assert_eq!(m.combine(&a, &b), m.combine(&b, &a));
            prop_assert_eq!(m.combine(&m.combine(&a, &b), &c), m.combine(&a, &m.combine(&b, &c)));
            prop_assert_eq!(m.combine(&a, &m.unit()), a.clone());
            prop_assert!(m.contains(&a));
        }
    }

    #[test]
    fn names_round_trip() {
        for m in Monoid::ALL {
            assert_eq!(Monoid::from_name(m.name()), Some(m));
        }
        assert_eq!(Monoid::from_name("max-plus"), None);
    }

    #[test]
    fn domains() {
        assert!(!Monoid::NatPlus.contains(&W::Finite(ratio(1, 2))));
        assert!(!Monoid::NatPlus.contains(&W::Infinity));
        assert!(!Monoid::MinInf.contains(&W::Finite(int(-1))));
        assert!(Monoid::RatPlus.contains(&W::Finite(int(-1))));
        assert_eq!(W::parse("inf"), Some(W::Infinity));
        assert_eq!(W::parse("3/6"), Some(W::Finite(ratio(1, 2))));
    }
}
