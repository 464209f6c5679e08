//! Usage algebras: partial commutative monoids with computable leftovers.
//!
//! An algebra is presented by its decision procedure [`UsageAlgebra::split`]:
//! `split(x, y) == Some(z)` holds exactly when `x` can be split into `y` and
//! the leftover `z`. Three instances ship with every [`AlgebraSet`]: linear
//! (`lin`), graded (`gra`) and shared (`sha`).

mod laws;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use laws::{check_law, check_laws, Law, LawViolation};

/// A carrier value. Its meaning is given by the algebra it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Usage(pub u32);

/// Identifies an algebra registered in an [`AlgebraSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlgId(pub u16);

impl AlgId {
    pub const LIN: AlgId = AlgId(0);
    pub const GRA: AlgId = AlgId(1);
    pub const SHA: AlgId = AlgId(2);
}

/// The values an algebra exposes for exhaustive or sampled law checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    /// The whole carrier.
    Finite(Vec<Usage>),
    /// A bounded sample of an infinite carrier.
    Sampled(Vec<Usage>),
}

impl Carrier {
    pub fn values(&self) -> &[Usage] {
        match self {
            Carrier::Finite(v) | Carrier::Sampled(v) => v,
        }
    }
}

pub trait UsageAlgebra: fmt::Debug + Send + Sync {
    /// Short identifier used in the surface syntax (`lin`, `gra`, ...).
    fn name(&self) -> &str;

    fn zero(&self) -> Usage;

    /// The element counting a single input or output.
    fn one(&self) -> Usage;

    /// The leftover `z` with `x ·= y ⊹ z`, if any.
    fn split(&self, x: Usage, y: Usage) -> Option<Usage>;

    fn contains(&self, x: Usage) -> bool;

    fn carrier(&self) -> Carrier;

    /// The `x` with `x ·= y ⊹ z`, if any. Not part of the algebra interface
    /// proper; generators and folds use it. The default searches the carrier.
    fn compose(&self, y: Usage, z: Usage) -> Option<Usage> {
        self.carrier()
            .values()
            .iter()
            .copied()
            .find(|&x| self.split(x, y) == Some(z))
    }

    fn parse(&self, text: &str) -> Option<Usage> {
        text.parse().ok().map(Usage).filter(|&u| self.contains(u))
    }

    fn format(&self, x: Usage) -> String {
        x.0.to_string()
    }
}

/// Use exactly once: `0 ·= 0 ⊹ 0`, `1 ·= 1 ⊹ 0`, `1 ·= 0 ⊹ 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linear;

impl UsageAlgebra for Linear {
    fn name(&self) -> &str {
        "lin"
    }
    fn zero(&self) -> Usage {
        Usage(0)
    }
    fn one(&self) -> Usage {
        Usage(1)
    }
    fn split(&self, x: Usage, y: Usage) -> Option<Usage> {
        match (x.0, y.0) {
            (0, 0) => Some(Usage(0)),
            (1, 1) => Some(Usage(0)),
            (1, 0) => Some(Usage(1)),
            _ => None,
        }
    }
    fn contains(&self, x: Usage) -> bool {
        x.0 <= 1
    }
    fn carrier(&self) -> Carrier {
        Carrier::Finite(vec![Usage(0), Usage(1)])
    }
    fn compose(&self, y: Usage, z: Usage) -> Option<Usage> {
        match (y.0, z.0) {
            (0, 0) => Some(Usage(0)),
            (1, 0) | (0, 1) => Some(Usage(1)),
            _ => None,
        }
    }
}

/// Use exactly `n` times: `x ·= y ⊹ z` iff `x = y + z`.
#[derive(Clone, Copy, Debug)]
pub struct Graded {
    /// Upper end of the law-checking sample.
    pub sample_bound: u32,
}

impl Default for Graded {
    fn default() -> Self {
        Graded { sample_bound: 32 }
    }
}

impl UsageAlgebra for Graded {
    fn name(&self) -> &str {
        "gra"
    }
    fn zero(&self) -> Usage {
        Usage(0)
    }
    fn one(&self) -> Usage {
        Usage(1)
    }
    fn split(&self, x: Usage, y: Usage) -> Option<Usage> {
        x.0.checked_sub(y.0).map(Usage)
    }
    fn contains(&self, _x: Usage) -> bool {
        true
    }
    fn carrier(&self) -> Carrier {
        Carrier::Sampled((0..=self.sample_bound).map(Usage).collect())
    }
    fn compose(&self, y: Usage, z: Usage) -> Option<Usage> {
        y.0.checked_add(z.0).map(Usage)
    }
}

/// Unrestricted use: the single element `ω`, with `ω ·= ω ⊹ ω`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Shared;

impl UsageAlgebra for Shared {
    fn name(&self) -> &str {
        "sha"
    }
    fn zero(&self) -> Usage {
        Usage(0)
    }
    fn one(&self) -> Usage {
        Usage(0)
    }
    fn split(&self, x: Usage, y: Usage) -> Option<Usage> {
        (x.0 == 0 && y.0 == 0).then_some(Usage(0))
    }
    fn contains(&self, x: Usage) -> bool {
        x.0 == 0
    }
    fn carrier(&self) -> Carrier {
        Carrier::Finite(vec![Usage(0)])
    }
    fn compose(&self, y: Usage, z: Usage) -> Option<Usage> {
        self.split(y, z)
    }
    fn parse(&self, text: &str) -> Option<Usage> {
        (text == "w").then_some(Usage(0))
    }
    fn format(&self, _x: Usage) -> String {
        "w".to_string()
    }
}

/// Input and output multiplicities of one channel, both drawn from one algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UsagePair {
    pub input: Usage,
    pub output: Usage,
}

impl UsagePair {
    pub const fn new(input: Usage, output: Usage) -> Self {
        UsagePair { input, output }
    }

    /// `ℓ∅ = (0, 0)`
    pub fn empty(alg: &dyn UsageAlgebra) -> Self {
        Self::new(alg.zero(), alg.zero())
    }

    /// `ℓi = (1, 0)`
    pub fn input_only(alg: &dyn UsageAlgebra) -> Self {
        Self::new(alg.one(), alg.zero())
    }

    /// `ℓo = (0, 1)`
    pub fn output_only(alg: &dyn UsageAlgebra) -> Self {
        Self::new(alg.zero(), alg.one())
    }

    /// `ℓ# = (1, 1)`
    pub fn both(alg: &dyn UsageAlgebra) -> Self {
        Self::new(alg.one(), alg.one())
    }

    /// Both components set to `y`, as given to a freshly restricted channel.
    pub fn balanced(y: Usage) -> Self {
        Self::new(y, y)
    }

    pub fn belongs_to(&self, alg: &dyn UsageAlgebra) -> bool {
        alg.contains(self.input) && alg.contains(self.output)
    }

    pub fn display<'a>(&self, alg: &'a dyn UsageAlgebra) -> PairDisplay<'a> {
        PairDisplay { pair: *self, alg }
    }
}

pub struct PairDisplay<'a> {
    pair: UsagePair,
    alg: &'a dyn UsageAlgebra,
}

impl fmt::Display for PairDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})",
            self.alg.format(self.pair.input),
            self.alg.format(self.pair.output)
        )
    }
}

/// Componentwise split of a pair.
pub fn split_pair(alg: &dyn UsageAlgebra, x: UsagePair, y: UsagePair) -> Option<UsagePair> {
    Some(UsagePair::new(
        alg.split(x.input, y.input)?,
        alg.split(x.output, y.output)?,
    ))
}

/// Componentwise composition of a pair; see [`UsageAlgebra::compose`].
pub fn compose_pair(alg: &dyn UsageAlgebra, y: UsagePair, z: UsagePair) -> Option<UsagePair> {
    Some(UsagePair::new(
        alg.compose(y.input, z.input)?,
        alg.compose(y.output, z.output)?,
    ))
}

/// `check_split(x, y, z)` decides the ternary relation `x ·= y ⊹ z`.
pub fn check_split(alg: &dyn UsageAlgebra, x: Usage, y: Usage, z: Usage) -> bool {
    alg.split(x, y) == Some(z)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("algebra name `{0}` is already registered")]
    DuplicateName(String),
    #[error("algebra `{name}` violates its laws: {violation}")]
    Laws {
        name: String,
        violation: LawViolation,
    },
}

/// The indexed family of algebras a typing context may draw from.
///
/// Frozen once built: registration consumes and returns the set.
#[derive(Clone, Debug)]
pub struct AlgebraSet {
    algebras: Vec<Arc<dyn UsageAlgebra>>,
}

impl AlgebraSet {
    /// `lin`, `gra` and `sha` under [`AlgId::LIN`], [`AlgId::GRA`], [`AlgId::SHA`].
    pub fn standard() -> Self {
        AlgebraSet {
            algebras: vec![
                Arc::new(Linear),
                Arc::new(Graded::default()),
                Arc::new(Shared),
            ],
        }
    }

    /// Adds a user algebra after checking every law over its carrier (or sample).
    pub fn register(mut self, alg: Arc<dyn UsageAlgebra>) -> Result<(Self, AlgId), RegistryError> {
        let name = alg.name().to_string();
        if self.by_name(&name).is_some() {
            return Err(RegistryError::DuplicateName(name));
        }
        check_laws(alg.as_ref()).map_err(|violation| RegistryError::Laws {
            name: name.clone(),
            violation,
        })?;
        let id = AlgId(self.algebras.len() as u16);
        self.algebras.push(alg);
        Ok((self, id))
    }

    pub fn get(&self, id: AlgId) -> Option<&dyn UsageAlgebra> {
        self.algebras.get(id.0 as usize).map(|a| a.as_ref())
    }

    /// Like [`AlgebraSet::get`], for ids already validated against this set.
    pub fn alg(&self, id: AlgId) -> &dyn UsageAlgebra {
        self.get(id)
            .unwrap_or_else(|| panic!("algebra {id:?} is not registered"))
    }

    pub fn by_name(&self, name: &str) -> Option<AlgId> {
        self.algebras
            .iter()
            .position(|a| a.name() == name)
            .map(|p| AlgId(p as u16))
    }

    pub fn ids(&self) -> impl Iterator<Item = AlgId> + '_ {
        (0..self.algebras.len()).map(|p| AlgId(p as u16))
    }

    pub fn len(&self) -> usize {
        self.algebras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.algebras.is_empty()
    }

    pub fn empty(&self, id: AlgId) -> UsagePair {
        UsagePair::empty(self.alg(id))
    }
    pub fn input_only(&self, id: AlgId) -> UsagePair {
        UsagePair::input_only(self.alg(id))
    }
    pub fn output_only(&self, id: AlgId) -> UsagePair {
        UsagePair::output_only(self.alg(id))
    }
    pub fn both(&self, id: AlgId) -> UsagePair {
        UsagePair::both(self.alg(id))
    }

    pub fn split_pair(&self, id: AlgId, x: UsagePair, y: UsagePair) -> Option<UsagePair> {
        split_pair(self.alg(id), x, y)
    }

    pub fn compose_pair(&self, id: AlgId, y: UsagePair, z: UsagePair) -> Option<UsagePair> {
        compose_pair(self.alg(id), y, z)
    }

    pub fn fmt_pair(&self, id: AlgId, x: UsagePair) -> String {
        format!("{} {}", self.alg(id).name(), x.display(self.alg(id)))
    }
}

impl Default for AlgebraSet {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: u32) -> Usage {
        Usage(x)
    }

    #[test]
    fn linear_table() {
        assert_eq!(Linear.split(u(1), u(1)), Some(u(0)));
        assert_eq!(Linear.split(u(1), u(0)), Some(u(1)));
        assert_eq!(Linear.split(u(0), u(0)), Some(u(0)));
        assert_eq!(Linear.split(u(0), u(1)), None);
    }

    #[test]
    fn graded_subtracts() {
        assert_eq!(Graded::default().split(u(3), u(1)), Some(u(2)));
        assert_eq!(Graded::default().split(u(1), u(3)), None);
    }

    #[test]
    fn shared_is_single_point() {
        assert_eq!(Shared.split(u(0), u(0)), Some(u(0)));
        assert_eq!(Shared.zero(), Shared.one());
        assert_eq!(Shared.format(u(0)), "w");
        assert_eq!(Shared.parse("w"), Some(u(0)));
        assert_eq!(Shared.parse("0"), None);
    }

    #[test]
    fn pair_split_egvar() {
        let lin = &Linear;
        assert_eq!(
            split_pair(lin, UsagePair::both(lin), UsagePair::input_only(lin)),
            Some(UsagePair::output_only(lin))
        );
    }

    #[test]
    fn pair_split_identity() {
        let gra = &Graded::default();
        for a in 0..4 {
            for b in 0..4 {
                let x = UsagePair::new(u(a), u(b));
                assert_eq!(split_pair(gra, x, UsagePair::empty(gra)), Some(x));
            }
        }
    }

    #[test]
    fn graded_pair_split() {
        let gra = &Graded::default();
        let got = split_pair(gra, UsagePair::new(u(2), u(3)), UsagePair::new(u(1), u(3)));
        assert_eq!(got, Some(UsagePair::new(u(1), u(0))));
        assert_eq!(
            split_pair(gra, UsagePair::new(u(0), u(3)), UsagePair::new(u(1), u(0))),
            None
        );
    }

    #[test]
    fn self_split_leaves_zero() {
        for x in 0..2 {
            assert_eq!(Linear.split(u(x), u(x)), Some(u(0)));
        }
        for x in 0..=32 {
            assert_eq!(Graded::default().split(u(x), u(x)), Some(u(0)));
        }
    }

    #[test]
    fn check_split_agrees() {
        assert!(check_split(&Linear, u(1), u(0), u(1)));
        assert!(!check_split(&Linear, u(1), u(0), u(0)));
    }

    #[test]
    fn standard_registry() {
        let algs = AlgebraSet::standard();
        assert_eq!(algs.by_name("lin"), Some(AlgId::LIN));
        assert_eq!(algs.by_name("gra"), Some(AlgId::GRA));
        assert_eq!(algs.by_name("sha"), Some(AlgId::SHA));
        assert_eq!(algs.len(), 3);
        assert_eq!(
            algs.fmt_pair(AlgId::SHA, algs.both(AlgId::SHA)),
            "sha (w,w)"
        );
    }

    #[derive(Debug)]
    struct Broken;

    impl UsageAlgebra for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn zero(&self) -> Usage {
            Usage(0)
        }
        fn one(&self) -> Usage {
            Usage(1)
        }
        // Resources spring into life: 0 ·= 1 ⊹ 0.
        fn split(&self, x: Usage, y: Usage) -> Option<Usage> {
            Some(Usage(x.0.saturating_sub(y.0)))
        }
        fn contains(&self, x: Usage) -> bool {
            x.0 <= 3
        }
        fn carrier(&self) -> Carrier {
            Carrier::Finite((0..=3).map(Usage).collect())
        }
    }

    /// Max-plus-style saturating counter capped at 2; a lawful algebra that
    /// is not one of the built-ins.
    #[derive(Debug)]
    struct Modest;

    impl UsageAlgebra for Modest {
        fn name(&self) -> &str {
            "modest"
        }
        fn zero(&self) -> Usage {
            Usage(0)
        }
        fn one(&self) -> Usage {
            Usage(1)
        }
        fn split(&self, x: Usage, y: Usage) -> Option<Usage> {
            (x.0 <= 2)
                .then(|| x.0.checked_sub(y.0))
                .flatten()
                .map(Usage)
        }
        fn contains(&self, x: Usage) -> bool {
            x.0 <= 2
        }
        fn carrier(&self) -> Carrier {
            Carrier::Finite((0..=2).map(Usage).collect())
        }
    }

    #[test]
    fn registration_runs_laws() {
        let err = AlgebraSet::standard()
            .register(Arc::new(Broken))
            .unwrap_err();
        assert!(matches!(err, RegistryError::Laws { .. }), "{err}");

        let (algs, id) = AlgebraSet::standard().register(Arc::new(Modest)).unwrap();
        assert_eq!(id, AlgId(3));
        assert_eq!(algs.by_name("modest"), Some(id));

        let dup = algs.register(Arc::new(Linear)).unwrap_err();
        assert_eq!(dup, RegistryError::DuplicateName("lin".into()));
    }
}
