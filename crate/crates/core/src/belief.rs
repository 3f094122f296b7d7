//! Finite-frame Dempster-Shafer machinery.
//!
//! A [`Frame`] is an ordered list of at most [`MAX_ATOMS`] atom labels. Subsets
//! of the frame are encoded as bit patterns over that ordering ([`Subset`]), so
//! intersection is a bitwise AND and the power set can be enumerated directly.
//!
//! A [`MassFunction`] is a normal basic belief assignment: non-negative masses
//! on non-empty subsets that sum to one. Values are immutable once built;
//! [`dempster_combine`] always produces a fresh mass function.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported frame.
pub const MAX_ATOMS: usize = 16;

/// Tolerance on `sum(m) == 1` when a mass function is built.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Combined masses below this are dropped before renormalizing.
pub const DROP_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("mass functions are defined on different frames")]
    FrameMismatch,
    #[error("subset {0:#x} is not contained in the frame")]
    NotInFrame(u32),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("invalid focal element: {0}")]
    InvalidFocal(String),
    #[error("invalid mass: {0}")]
    InvalidMass(String),
    #[error("total conflict between combined mass functions")]
    TotalConflict,
}

pub type Result<T, E = BeliefError> = std::result::Result<T, E>;

/// A subset of a frame, as a bit pattern over the frame's atom ordering.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u16);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u16) -> Self {
        Subset(bits)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subset({:#b})", self.0)
    }
}

/// An ordered frame of discernment.
///
/// Cloning is cheap; the labels are shared.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    atoms: Arc<[String]>,
}

impl Frame {
    pub fn new<I, S>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(BeliefError::InvalidFrame("frame has no atoms".into()));
        }
        if atoms.len() > MAX_ATOMS {
            return Err(BeliefError::InvalidFrame(format!(
                "{} atoms exceeds the limit of {MAX_ATOMS}",
                atoms.len()
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.is_empty() {
                return Err(BeliefError::InvalidFrame("empty atom label".into()));
            }
            if atoms[..i].contains(a) {
                return Err(BeliefError::InvalidFrame(format!("duplicate atom `{a}`")));
            }
        }
        Ok(Frame { atoms: atoms.into() })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The whole frame (Ω).
    pub fn full(&self) -> Subset {
        Subset(((1u32 << self.atoms.len()) - 1) as u16)
    }

    pub fn atom(&self, label: &str) -> Result<Subset> {
        self.atoms
            .iter()
            .position(|a| a == label)
            .map(|i| Subset(1 << i))
            .ok_or_else(|| BeliefError::UnknownAtom(label.to_string()))
    }

    pub fn subset(&self, labels: &[&str]) -> Result<Subset> {
        labels
            .iter()
            .try_fold(Subset::EMPTY, |acc, l| Ok(acc.union(self.atom(l)?)))
    }

    pub fn contains(&self, s: Subset) -> bool {
        s.is_subset_of(self.full())
    }

    fn check(&self, s: Subset) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(BeliefError::NotInFrame(s.0 as u32))
        }
    }

    /// Labels of the atoms in `s`, in frame order.
    pub fn labels(&self, s: Subset) -> Vec<&str> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| s.0 & (1 << i) != 0)
            .map(|(_, a)| a.as_str())
            .collect()
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.atoms.iter()).finish()
    }
}

/// A normal basic belief assignment over a [`Frame`].
///
/// Focal elements are kept sorted by their bit pattern and only non-zero
/// masses are stored.
#[derive(Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: Vec<(Subset, f64)>,
}

impl MassFunction {
    /// Builds a mass function, merging repeated subsets and dropping zeros.
    pub fn new<I>(frame: Frame, masses: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
        for (s, m) in masses {
            frame.check(s)?;
            if !(0.0..=1.0).contains(&m) {
                return Err(BeliefError::InvalidMass(format!("{m} is outside [0, 1]")));
            }
            if s.is_empty() {
                if m > 0.0 {
                    return Err(BeliefError::InvalidMass("the empty set must carry zero mass".into()));
                }
                continue;
            }
            *acc.entry(s).or_insert(0.0) += m;
        }
        let total: f64 = acc.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(BeliefError::InvalidMass(format!("masses sum to {total}")));
        }
        let focal = acc.into_iter().filter(|&(_, m)| m > 0.0).collect();
        Ok(MassFunction { frame, focal })
    }

    /// Convenience constructor from atom labels, e.g. `[(&["I"][..], 0.5), ...]`.
    pub fn from_labels(frame: &Frame, masses: &[(&[&str], f64)]) -> Result<Self> {
        let items = masses
            .iter()
            .map(|(labels, m)| Ok((frame.subset(labels)?, *m)))
            .collect::<Result<Vec<_>>>()?;
        MassFunction::new(frame.clone(), items)
    }

    /// Total ignorance: m(Ω) = 1.
    pub fn vacuous(frame: Frame) -> Self {
        let full = frame.full();
        MassFunction {
            frame,
            focal: vec![(full, 1.0)],
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Focal elements with their masses, ordered by bit pattern.
    pub fn focal_elements(&self) -> &[(Subset, f64)] {
        &self.focal
    }

    /// Mass of `subset`; zero for non-focal subsets.
    pub fn mass_of(&self, subset: Subset) -> Result<f64> {
        self.frame.check(subset)?;
        Ok(self.get(subset))
    }

    /// Like [`mass_of`](Self::mass_of) without the frame check.
    pub(crate) fn get(&self, subset: Subset) -> f64 {
        self.focal
            .binary_search_by_key(&subset, |&(s, _)| s)
            .map(|i| self.focal[i].1)
            .unwrap_or(0.0)
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal[0].0 == self.frame.full()
    }

    /// Largest absolute per-subset difference to `other` (same frame assumed).
    pub fn max_abs_diff(&self, other: &MassFunction) -> f64 {
        let mut keys: Vec<Subset> = self.focal.iter().chain(other.focal.iter()).map(|&(s, _)| s).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|s| (self.get(s) - other.get(s)).abs())
            .fold(0.0, f64::max)
    }

    fn canonical_cmp(&self, other: &MassFunction) -> Ordering {
        for (a, b) in self.focal.iter().zip(other.focal.iter()) {
            let o = a.0.cmp(&b.0).then(a.1.total_cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.focal.len().cmp(&other.focal.len())
    }
}

impl fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for &(s, m) in &self.focal {
            map.entry(&format_args!("{{{}}}", self.frame.labels(s).join(",")), &m);
        }
        map.finish()
    }
}

/// Simple BBA with at most two focal elements: m(focal) = 1 − α, m(Ω) = α.
pub fn simple_bba(frame: &Frame, focal: Subset, alpha: f64) -> Result<MassFunction> {
    frame.check(focal)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(BeliefError::InvalidMass(format!("alpha {alpha} is outside [0, 1]")));
    }
    if focal.is_empty() {
        return Err(BeliefError::InvalidFocal("focal element is empty".into()));
    }
    let full = frame.full();
    if focal == full && alpha < 1.0 {
        return Err(BeliefError::InvalidFocal(
            "focal element must be a proper subset of the frame".into(),
        ));
    }
    MassFunction::new(frame.clone(), [(focal, 1.0 - alpha), (full, alpha)])
}

/// Dempster's rule of combination.
///
/// Conflict mass K is the total product mass landing on the empty set; the
/// remaining products are renormalized by 1 − K. Operands are visited in a
/// canonical order so that `combine(a, b)` and `combine(b, a)` are bitwise
/// identical.
pub fn dempster_combine(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    if m1.frame != m2.frame {
        return Err(BeliefError::FrameMismatch);
    }
    let (a, b) = match m1.canonical_cmp(m2) {
        Ordering::Greater => (m2, m1),
        _ => (m1, m2),
    };
    let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for &(s1, x) in &a.focal {
        for &(s2, y) in &b.focal {
            let inter = s1.intersect(s2);
            if inter.is_empty() {
                conflict += x * y;
            } else {
                *acc.entry(inter).or_insert(0.0) += x * y;
            }
        }
    }
    let norm = 1.0 - conflict;
    if norm <= f64::EPSILON || acc.is_empty() {
        return Err(BeliefError::TotalConflict);
    }
    let kept: Vec<(Subset, f64)> = acc
        .into_iter()
        .map(|(s, m)| (s, m / norm))
        .filter(|&(_, m)| m >= DROP_THRESHOLD)
        .collect();
    let total: f64 = kept.iter().map(|&(_, m)| m).sum();
    let focal = kept.into_iter().map(|(s, m)| (s, (m / total).min(1.0))).collect();
    Ok(MassFunction {
        frame: a.frame.clone(),
        focal,
    })
}

/// Left fold of [`dempster_combine`]. `None` for an empty input.
pub fn combine_all<'a, I>(masses: I) -> Option<Result<MassFunction>>
where
    I: IntoIterator<Item = &'a MassFunction>,
{
    let mut it = masses.into_iter();
    let first = it.next()?.clone();
    Some(it.try_fold(first, |acc, m| dempster_combine(&acc, m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega() -> Frame {
        Frame::new(["I", "P"]).unwrap()
    }

    #[test]
    fn frame_rejects_bad_labels() {
        assert!(Frame::new(Vec::<String>::new()).is_err());
        assert!(Frame::new(["a", "a"]).is_err());
        assert!(Frame::new(["a", ""]).is_err());
        assert!(Frame::new((0..17).map(|i| i.to_string())).is_err());
        assert_eq!(
            Frame::new((0..16).map(|i| i.to_string())).unwrap().full().bits(),
            u16::MAX
        );
    }

    #[test]
    fn simple_bba_examples() {
        let f = omega();
        let i = f.atom("I").unwrap();
        let m = simple_bba(&f, i, 0.2).unwrap();
        assert!((m.mass_of(i).unwrap() - 0.8).abs() < 1e-15);
        assert!((m.mass_of(f.full()).unwrap() - 0.2).abs() < 1e-15);

        assert!(simple_bba(&f, i, 1.0).unwrap().is_vacuous());
        let cat = simple_bba(&f, i, 0.0).unwrap();
        assert_eq!(cat.focal_elements(), &[(i, 1.0)]);
    }

    #[test]
    fn simple_bba_errors() {
        let f = omega();
        assert!(matches!(
            simple_bba(&f, Subset::EMPTY, 0.5),
            Err(BeliefError::InvalidFocal(_))
        ));
        assert!(matches!(
            simple_bba(&f, f.full(), 0.5),
            Err(BeliefError::InvalidFocal(_))
        ));
        assert!(simple_bba(&f, f.full(), 1.0).unwrap().is_vacuous());
        assert!(simple_bba(&f, f.atom("I").unwrap(), 1.5).is_err());
        assert!(matches!(
            simple_bba(&f, Subset::from_bits(0b100), 0.5),
            Err(BeliefError::NotInFrame(_))
        ));
    }

    #[test]
    fn constructor_validates() {
        let f = omega();
        let i = f.atom("I").unwrap();
        assert!(MassFunction::new(f.clone(), [(i, 0.5)]).is_err());
        assert!(MassFunction::new(f.clone(), [(i, -0.1), (f.full(), 1.1)]).is_err());
        assert!(MassFunction::new(f.clone(), [(Subset::EMPTY, 0.2), (i, 0.8)]).is_err());
        let merged = MassFunction::new(f.clone(), [(i, 0.25), (i, 0.25), (f.full(), 0.5)]).unwrap();
        assert_eq!(merged.mass_of(i).unwrap(), 0.5);
    }

    #[test]
    fn three_atom_combination() {
        let f = Frame::new(["Pe", "Pa", "Ma"]).unwrap();
        let m1 = MassFunction::from_labels(&f, &[(&["Pe", "Pa"], 0.5), (&["Ma"], 0.5)]).unwrap();
        let m2 = MassFunction::from_labels(
            &f,
            &[(&["Pe", "Pa"], 0.3), (&["Ma", "Pa"], 0.3), (&["Pe", "Pa", "Ma"], 0.4)],
        )
        .unwrap();
        let c = dempster_combine(&m1, &m2).unwrap();
        let q = |l: &[&str]| c.mass_of(f.subset(l).unwrap()).unwrap();
        assert!((q(&["Pa"]) - 0.1765).abs() < 1e-4);
        assert!((q(&["Pe", "Pa"]) - 0.4118).abs() < 1e-4);
        assert!((q(&["Ma"]) - 0.4118).abs() < 1e-4);
        assert_eq!(q(&["Pe"]), 0.0);
        assert_eq!(q(&["Pe", "Pa", "Ma"]), 0.0);
        assert_eq!(c.focal_elements().len(), 3);
    }

    #[test]
    fn indicator_pair_example() {
        // 9 focal products; K = 0.5*0.5 + 0.3*0.4 = 0.37.
        let f = omega();
        let m1 = MassFunction::from_labels(&f, &[(&["I"], 0.5), (&["P"], 0.3), (&["I", "P"], 0.2)]).unwrap();
        let m2 = MassFunction::from_labels(&f, &[(&["I"], 0.4), (&["P"], 0.5), (&["I", "P"], 0.1)]).unwrap();
        let c = dempster_combine(&m1, &m2).unwrap();
        let expect_i = (0.5 * 0.4 + 0.5 * 0.1 + 0.2 * 0.4) / 0.63;
        let expect_p = (0.3 * 0.5 + 0.3 * 0.1 + 0.2 * 0.5) / 0.63;
        let expect_o = (0.2 * 0.1) / 0.63;
        assert!((c.mass_of(f.atom("I").unwrap()).unwrap() - expect_i).abs() < 1e-12);
        assert!((c.mass_of(f.atom("P").unwrap()).unwrap() - expect_p).abs() < 1e-12);
        assert!((c.mass_of(f.full()).unwrap() - expect_o).abs() < 1e-12);
        assert!((expect_i - 0.5238).abs() < 1e-4);
        assert!((expect_p - 0.4444).abs() < 1e-4);
        assert!((expect_o - 0.0317).abs() < 1e-4);
    }

    #[test]
    fn total_conflict_is_an_error() {
        let f = omega();
        let a = MassFunction::from_labels(&f, &[(&["I"], 1.0)]).unwrap();
        let b = MassFunction::from_labels(&f, &[(&["P"], 1.0)]).unwrap();
        assert_eq!(dempster_combine(&a, &b), Err(BeliefError::TotalConflict));
    }

    #[test]
    fn frame_mismatch() {
        let a = MassFunction::vacuous(omega());
        let b = MassFunction::vacuous(Frame::new(["Pos", "Neg", "Neut"]).unwrap());
        assert_eq!(dempster_combine(&a, &b), Err(BeliefError::FrameMismatch));
    }

    #[test]
    fn mass_of_queries() {
        let f = omega();
        let v = MassFunction::vacuous(f.clone());
        assert_eq!(v.mass_of(f.full()).unwrap(), 1.0);
        assert_eq!(v.mass_of(f.atom("I").unwrap()).unwrap(), 0.0);
        assert!(v.mass_of(Subset::from_bits(0b1000)).is_err());
    }

    #[test]
    fn combine_all_folds() {
        assert!(combine_all(std::iter::empty()).is_none());
        let f = omega();
        let m = MassFunction::from_labels(&f, &[(&["I"], 0.3), (&["I", "P"], 0.7)]).unwrap();
        let one = combine_all([&m]).unwrap().unwrap();
        assert_eq!(one, m);
    }
}
