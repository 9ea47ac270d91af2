//! Equivalence games for the interleaving and non-interleaving relations.
//!
//! Every relation is decided as a game between an attacker, who picks a
//! leading transition, and a defender, who answers on the other side with a
//! transition carrying the same label (up to the alias bijection) and
//! satisfying the relation's independence constraints against the events
//! paired so far. Each position must also pass the static test on frames.

mod game;
mod replay;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, TermError};
use crate::independence::{indep_event, indep_loc};
use crate::knowledge::TestWitness;
use crate::lts::{matching_transitions, Event, ExplorationBounds, LocationLabel, Transition};
use crate::syntax::{ActionLabel, ExtendedProcess, Process};
use crate::term::{Alias, AliasMap, Theory};

pub use game::{solve, GameStats};
pub use replay::witness_replay;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    PreI,
    SimI,
    BisimI,
    SimSt,
    BisimSt,
    SimHp,
    BisimHp,
    FsimSt,
    FsimHp,
    SimInd,
    BisimInd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndepParam {
    /// Independence of locations only.
    Structural,
    /// Independence of events, including output freshness.
    Full,
}

impl IndepParam {
    pub fn holds(self, e0: &Event, e1: &Event) -> bool {
        match self {
            IndepParam::Structural => indep_loc(&e0.loc, &e1.loc),
            IndepParam::Full => indep_event(e0, e1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationKind {
    pub base: Base,
    pub indep: Option<IndepParam>,
}

/// How the pairing of events evolves along a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Interleaving,
    St,
    Hp,
    Located,
}

pub const ALL_RELATIONS: [&str; 13] = [
    "presim-i",
    "sim-i",
    "bisim-i",
    "sim-st",
    "bisim-st",
    "sim-hp",
    "bisim-hp",
    "fsim-st",
    "fsim-hp",
    "sim-iloc",
    "bisim-iloc",
    "sim-ifull",
    "bisim-ifull",
];

impl RelationKind {
    pub fn new(base: Base) -> Self {
        assert!(
            !matches!(base, Base::SimInd | Base::BisimInd),
            "located relations need an independence parameter"
        );
        RelationKind { base, indep: None }
    }

    pub fn located(bisim: bool, param: IndepParam) -> Self {
        RelationKind {
            base: if bisim { Base::BisimInd } else { Base::SimInd },
            indep: Some(param),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let k = |b| Some(RelationKind::new(b));
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "presim-i" | "pre-i" => k(Base::PreI),
            "sim-i" => k(Base::SimI),
            "bisim-i" => k(Base::BisimI),
            "sim-st" => k(Base::SimSt),
            "bisim-st" => k(Base::BisimSt),
            "sim-hp" => k(Base::SimHp),
            "bisim-hp" => k(Base::BisimHp),
            "fsim-st" => k(Base::FsimSt),
            "fsim-hp" => k(Base::FsimHp),
            "sim-iloc" | "sim-ind-structural" => Some(RelationKind::located(false, IndepParam::Structural)),
            "bisim-iloc" | "bisim-ind-structural" => Some(RelationKind::located(true, IndepParam::Structural)),
            "sim-ifull" | "sim-ind-full" => Some(RelationKind::located(false, IndepParam::Full)),
            "bisim-ifull" | "bisim-ind-full" => Some(RelationKind::located(true, IndepParam::Full)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.base, self.indep) {
            (Base::PreI, _) => "presim-i",
            (Base::SimI, _) => "sim-i",
            (Base::BisimI, _) => "bisim-i",
            (Base::SimSt, _) => "sim-st",
            (Base::BisimSt, _) => "bisim-st",
            (Base::SimHp, _) => "sim-hp",
            (Base::BisimHp, _) => "bisim-hp",
            (Base::FsimSt, _) => "fsim-st",
            (Base::FsimHp, _) => "fsim-hp",
            (Base::SimInd, Some(IndepParam::Structural)) => "sim-iloc",
            (Base::BisimInd, Some(IndepParam::Structural)) => "bisim-iloc",
            (Base::SimInd, _) => "sim-ifull",
            (Base::BisimInd, _) => "bisim-ifull",
        }
    }

    pub fn is_bisim(&self) -> bool {
        matches!(self.base, Base::BisimI | Base::BisimSt | Base::BisimHp | Base::BisimInd)
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.base, Base::FsimSt | Base::FsimHp)
    }

    pub fn family(&self) -> Family {
        match self.base {
            Base::PreI | Base::SimI | Base::BisimI => Family::Interleaving,
            Base::SimSt | Base::BisimSt | Base::FsimSt => Family::St,
            Base::SimHp | Base::BisimHp | Base::FsimHp => Family::Hp,
            Base::SimInd | Base::BisimInd => Family::Located,
        }
    }

    /// Static clause: one-way implication for presimilarity, equivalence
    /// otherwise.
    pub fn static_iff(&self) -> bool {
        self.base != Base::PreI
    }

    /// The simulation underlying a bisimulation; simulations map to
    /// themselves.
    pub fn sim_part(&self) -> RelationKind {
        let base = match self.base {
            Base::BisimI => Base::SimI,
            Base::BisimSt => Base::SimSt,
            Base::BisimHp => Base::SimHp,
            Base::BisimInd => Base::SimInd,
            b => b,
        };
        RelationKind {
            base,
            indep: self.indep,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// The parts of an event that independence looks at.
pub type Skeleton = (LocationLabel, Option<Alias>, BTreeSet<Alias>);

pub fn skeleton(e: &Event) -> Skeleton {
    (e.loc.clone(), e.action.output_alias().cloned(), e.action.fa())
}

/// Pairs (left event, right event), sorted by skeleton first so that
/// pairings with equal skeletons list them in the same order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventPairing {
    pub pairs: Vec<(Event, Event)>,
}

impl EventPairing {
    pub fn new(mut pairs: Vec<(Event, Event)>) -> Self {
        pairs.sort_by_cached_key(|(a, b)| (skeleton(a), skeleton(b), a.clone(), b.clone()));
        pairs.dedup();
        EventPairing { pairs }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn inverse(&self) -> EventPairing {
        EventPairing::new(self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect())
    }

    pub fn dom(&self) -> impl Iterator<Item = &Event> {
        self.pairs.iter().map(|(a, _)| a)
    }

    pub fn ran(&self) -> impl Iterator<Item = &Event> {
        self.pairs.iter().map(|(_, b)| b)
    }

    pub fn skeletons(&self) -> Vec<(Skeleton, Skeleton)> {
        self.pairs.iter().map(|(a, b)| (skeleton(a), skeleton(b))).collect()
    }

    pub fn position(&self, pair: &(Event, Event)) -> Option<usize> {
        self.pairs.iter().position(|p| p == pair)
    }

    pub fn subset(&self, idx: &[usize]) -> EventPairing {
        EventPairing::new(idx.iter().map(|&i| self.pairs[i].clone()).collect())
    }

    pub fn with(&self, pair: (Event, Event)) -> EventPairing {
        let mut v = self.pairs.clone();
        v.push(pair);
        EventPairing::new(v)
    }
}

/// One position of a game: `left R^{rho,pairing} right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameConfig {
    pub left: ExtendedProcess,
    pub right: ExtendedProcess,
    pub rho: AliasMap,
    pub pairing: EventPairing,
    pub kind: RelationKind,
    pub depth_used: usize,
}

impl GameConfig {
    pub fn initial(kind: RelationKind, p: &Process, q: &Process) -> Self {
        GameConfig {
            left: ExtendedProcess::from_process(p.clone()),
            right: ExtendedProcess::from_process(q.clone()),
            rho: AliasMap::id(),
            pairing: EventPairing::default(),
            kind,
            depth_used: 0,
        }
    }

    /// The same position seen with the right side leading.
    pub fn swapped(&self) -> GameConfig {
        GameConfig {
            left: self.right.clone(),
            right: self.left.clone(),
            rho: self.rho.inverse(),
            pairing: self.pairing.inverse(),
            kind: self.kind,
            depth_used: self.depth_used,
        }
    }
}

/// Requirements on a defender's answer: for every listed event of the
/// defender's side, whether the answer must be independent of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FollowerConstraints {
    pub param: IndepParam,
    pub required: Vec<(Event, bool)>,
}

impl FollowerConstraints {
    pub fn none() -> Self {
        FollowerConstraints {
            param: IndepParam::Full,
            required: Vec::new(),
        }
    }

    pub fn admits(&self, e: &Event) -> bool {
        self.required.iter().all(|(d, want)| self.param.holds(e, d) == *want)
    }
}

/// An attacker move: the leading event and the pairs it keeps, as indices
/// into the current pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadPlan {
    pub retained: Vec<usize>,
    pub constraints: FollowerConstraints,
}

/// Legal ways to lead with `e` from the left of `cfg`, each with the
/// constraints the defender must meet. For ST relations the kept pairs are
/// the maximal set of running events independent of `e`, or every subset of
/// it when `exhaustive` is set.
pub fn lead_plans(cfg: &GameConfig, e: &Event, exhaustive: bool) -> Vec<LeadPlan> {
    let pairs = &cfg.pairing.pairs;
    match cfg.kind.family() {
        Family::Interleaving => vec![LeadPlan {
            retained: Vec::new(),
            constraints: FollowerConstraints::none(),
        }],
        Family::St => {
            let max: Vec<usize> = (0..pairs.len()).filter(|&i| indep_event(e, &pairs[i].0)).collect();
            let subsets: Vec<Vec<usize>> = if exhaustive {
                (0..(1u64 << max.len()))
                    .rev()
                    .map(|mask| {
                        max.iter()
                            .enumerate()
                            .filter(|(j, _)| mask & (1 << j) != 0)
                            .map(|(_, &i)| i)
                            .collect()
                    })
                    .collect()
            } else {
                vec![max]
            };
            subsets
                .into_iter()
                .map(|retained| LeadPlan {
                    constraints: FollowerConstraints {
                        param: IndepParam::Full,
                        required: retained.iter().map(|&i| (pairs[i].1.clone(), true)).collect(),
                    },
                    retained,
                })
                .collect()
        }
        Family::Hp => {
            let (s1, s2) = hp_partition(&cfg.pairing, e);
            let mut required: Vec<(Event, bool)> = s1.ran().map(|d| (d.clone(), true)).collect();
            required.extend(s2.ran().map(|d| (d.clone(), false)));
            let retained = (0..pairs.len()).filter(|&i| indep_event(e, &pairs[i].0)).collect();
            vec![LeadPlan {
                retained,
                constraints: FollowerConstraints {
                    param: IndepParam::Full,
                    required,
                },
            }]
        }
        Family::Located => {
            let param = cfg.kind.indep.unwrap_or(IndepParam::Full);
            vec![LeadPlan {
                retained: (0..pairs.len()).collect(),
                constraints: FollowerConstraints {
                    param,
                    required: pairs.iter().map(|(d, d2)| (d2.clone(), param.holds(e, d))).collect(),
                },
            }]
        }
    }
}

/// ST leader moves from the left with maximal retention: each enabled event,
/// its target, and the pairs kept.
pub fn leader_moves_st(
    cfg: &GameConfig,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Vec<(Event, ExtendedProcess, EventPairing)>, TermError> {
    let mut out = Vec::new();
    for (e, target) in crate::lts::enabled_transitions(&cfg.left, theory, bounds)? {
        let plan = lead_plans(cfg, &e, false).remove(0);
        out.push((e, target, cfg.pairing.subset(&plan.retained)));
    }
    Ok(out)
}

/// Splits the pairing into pairs whose left event is independent of `e` and
/// the rest.
pub fn hp_partition(s: &EventPairing, e: &Event) -> (EventPairing, EventPairing) {
    let (s1, s2): (Vec<_>, Vec<_>) = s.pairs.iter().cloned().partition(|(d, _)| indep_event(e, d));
    (EventPairing::new(s1), EventPairing::new(s2))
}

/// A defender answer: the extended alias map, the event, the target and
/// whether it lies beyond the replication bound.
pub type Answer = (AliasMap, Event, ExtendedProcess, bool);

/// Defender answers on the right to the left event `lead`: right transitions
/// with the same label under an extension of `rho` that meet `constraints`.
/// Answers needing more replication than the bounds allow are included and
/// flagged.
pub fn follower_match(
    cfg: &GameConfig,
    lead: &Event,
    constraints: &FollowerConstraints,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Vec<Answer>, TermError> {
    let wanted = lead.action.apply_alias_map(&cfg.rho);
    let cands = matching_transitions(&cfg.right, theory, bounds, &wanted)?;
    Ok(admissible_answers(cfg, lead, constraints, &cands))
}

/// Filters candidate right transitions carrying the label of `lead`.
pub(crate) fn admissible_answers(
    cfg: &GameConfig,
    lead: &Event,
    constraints: &FollowerConstraints,
    cands: &[Transition],
) -> Vec<Answer> {
    let mut out = Vec::new();
    for t in cands {
        if !constraints.admits(&t.event) {
            continue;
        }
        let rho = match (lead.action.output_alias(), t.event.action.output_alias()) {
            (Some(a), Some(b)) => match cfg.rho.with(a.clone(), b.clone()) {
                Ok(r) => r,
                Err(_) => continue,
            },
            _ => cfg.rho.clone(),
        };
        out.push((rho, t.event.clone(), t.target.clone(), t.frontier));
    }
    out
}

/// Failure clause of the failure-sensitive relations: a right event, allowed
/// against the running right events, that no left event mirrors under the
/// matching constraints on the left. No continuation is required.
pub fn failure_round(
    cfg: &GameConfig,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Option<Event>, TermError> {
    if !cfg.kind.is_failure() {
        return Ok(None);
    }
    let moves = crate::lts::step(&cfg.right, theory, bounds, game::input_mode(bounds))?;
    unmirrored(cfg, &moves, |label| {
        matching_transitions(&cfg.left, theory, bounds, label)
    })
}

pub(crate) fn unmirrored<V: AsRef<Vec<Transition>>>(
    cfg: &GameConfig,
    right_moves: &[Transition],
    mut left_matching: impl FnMut(&ActionLabel) -> Result<V, TermError>,
) -> Result<Option<Event>, TermError> {
    let inv = cfg.rho.inverse();
    for t in right_moves {
        let required = failure_constraints(cfg, &t.event);
        let mirror = t.event.action.apply_alias_map(&inv);
        let ok = left_matching(&mirror)?
            .as_ref()
            .iter()
            .any(|m| required.admits(&m.event));
        if !ok {
            return Ok(Some(t.event.clone()));
        }
    }
    Ok(None)
}

/// Constraints on a left mirror of the right event `e`.
pub(crate) fn failure_constraints(cfg: &GameConfig, e: &Event) -> FollowerConstraints {
    let pairs = &cfg.pairing.pairs;
    let required = match cfg.kind.family() {
        Family::Hp => pairs.iter().map(|(d, d2)| (d.clone(), indep_event(e, d2))).collect(),
        _ => pairs
            .iter()
            .filter(|(_, d2)| indep_event(e, d2))
            .map(|(d, _)| (d.clone(), true))
            .collect(),
    };
    FollowerConstraints {
        param: IndepParam::Full,
        required,
    }
}

/// Whether adding `new_pair` keeps the history consistent: each paired
/// event is independent of a history event exactly when its partner is
/// independent of the partner's counterpart.
pub fn i_consistency_filter(history: &EventPairing, new_pair: &(Event, Event), param: IndepParam) -> bool {
    history
        .pairs
        .iter()
        .all(|(d, d2)| param.holds(&new_pair.0, d) == param.holds(&new_pair.1, d2))
}

/// Whole-history consistency.
pub fn is_i_consistent(history: &EventPairing, param: IndepParam) -> bool {
    let p = &history.pairs;
    (0..p.len()).all(|i| (i + 1..p.len()).all(|j| param.holds(&p[i].0, &p[j].0) == param.holds(&p[i].1, &p[j].1)))
}

/// A winning attacker strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The frames disagree on a test.
    Static { test: TestWitness },
    /// `side` can perform `event` and the other side has no mirror.
    Failure { side: Side, event: Event },
    /// `side` leads with `event`, keeping the listed running pairs; every
    /// admissible answer leads to a position won again.
    Move {
        side: Side,
        event: Event,
        /// Running (left, right) pairs kept across the move.
        retained: Vec<(Event, Event)>,
        responses: Vec<Response>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub event: Event,
    pub next: Witness,
}

impl Witness {
    /// Number of rounds along the longest branch.
    pub fn depth(&self) -> usize {
        match self {
            Witness::Static { .. } | Witness::Failure { .. } => 0,
            Witness::Move { responses, .. } => 1 + responses.iter().map(|r| r.next.depth()).max().unwrap_or(0),
        }
    }

    /// The same strategy with the roles of the two processes exchanged.
    pub fn mirrored(&self) -> Witness {
        match self {
            Witness::Static { test } => Witness::Static { test: test.swapped() },
            Witness::Failure { side, event } => Witness::Failure {
                side: side.other(),
                event: event.clone(),
            },
            Witness::Move {
                side,
                event,
                retained,
                responses,
            } => Witness::Move {
                side: side.other(),
                event: event.clone(),
                retained: EventPairing::new(retained.iter().map(|(a, b)| (b.clone(), a.clone())).collect()).pairs,
                responses: responses
                    .iter()
                    .map(|r| Response {
                        event: r.event.clone(),
                        next: r.next.mirrored(),
                    })
                    .collect(),
            },
        }
    }

    /// Leading events and static tests reachable in the strategy.
    pub fn mentions_static(&self) -> bool {
        match self {
            Witness::Static { .. } => true,
            Witness::Failure { .. } => false,
            Witness::Move { responses, .. } => responses.iter().any(|r| r.next.mentions_static()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    Related {
        /// No replication or game-depth bound was reached.
        exact: bool,
        bounds: ExplorationBounds,
        /// Positions proved related.
        relation_size: usize,
        caveat: String,
    },
    Distinguished {
        witness: Witness,
        bounds: ExplorationBounds,
    },
}

impl Verdict {
    pub fn is_related(&self) -> bool {
        matches!(self, Verdict::Related { .. })
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Verdict::Related { exact, .. } => *exact,
            Verdict::Distinguished { .. } => true,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Distinguished { witness, .. } => Some(witness),
            Verdict::Related { .. } => None,
        }
    }

    /// `related-exact`, `related-bounded` or `distinguished`.
    pub fn class(&self) -> &'static str {
        match self {
            Verdict::Related { exact: true, .. } => "related-exact",
            Verdict::Related { exact: false, .. } => "related-bounded",
            Verdict::Distinguished { .. } => "distinguished",
        }
    }
}

/// Switches that do not change the relation being decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Let the ST attacker keep any subset of the independent running pairs
    /// instead of the maximal one.
    pub st_exhaustive: bool,
}

/// Prepares theory and bounds for comparing `p` and `q`: their symbols join
/// the signature and their free names join the public constants.
pub fn prepare(p: &Process, q: &Process, theory: &Theory, bounds: &ExplorationBounds) -> (Theory, ExplorationBounds) {
    let mut t = theory.clone();
    let mut syms = BTreeSet::new();
    p.symbols(&mut syms);
    q.symbols(&mut syms);
    t.add_symbols(syms);
    let mut b = bounds.clone();
    b.add_consts_from(&[p, q]);
    (t, b)
}

pub fn check(
    kind: RelationKind,
    p: &Process,
    q: &Process,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Verdict, Error> {
    check_with(kind, p, q, theory, bounds, CheckOptions::default())
}

pub fn check_with(
    kind: RelationKind,
    p: &Process,
    q: &Process,
    theory: &Theory,
    bounds: &ExplorationBounds,
    opts: CheckOptions,
) -> Result<Verdict, Error> {
    let (theory, bounds) = prepare(p, q, theory, bounds);
    let cfg = GameConfig::initial(kind, p, q);
    let (verdict, _) = solve(&cfg, &theory, &bounds, opts)?;
    Ok(verdict)
}

pub(crate) const RECIPE_CAVEAT: &str =
    "attacker inputs and static tests range over recipes up to the configured depths only";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Message;

    fn out(alias: &str, at: &str) -> Event {
        Event::new(
            ActionLabel::Output {
                chan: Message::var("a"),
                alias: Alias::parse(alias).unwrap(),
            },
            LocationLabel::parse(at).unwrap(),
        )
    }

    #[test]
    fn relation_names_round_trip() {
        for n in ALL_RELATIONS {
            assert_eq!(RelationKind::parse(n).unwrap().name(), n);
        }
        assert!(RelationKind::parse("bogus").is_none());
    }

    #[test]
    fn hp_partition_examples() {
        let running = EventPairing::new(vec![(out("l", "[]"), out("0l", "0[]"))]);
        let c = Event::new(
            ActionLabel::Output {
                chan: Message::var("c"),
                alias: Alias::parse("1l").unwrap(),
            },
            LocationLabel::parse("[]").unwrap(),
        );
        let (s1, s2) = hp_partition(&running, &c);
        assert!(s1.is_empty());
        assert_eq!(s2, running);
        let (e1, e2) = hp_partition(&EventPairing::default(), &c);
        assert!(e1.is_empty() && e2.is_empty());
        let two = EventPairing::new(vec![
            (out("10l", "10[]"), out("10l", "10[]")),
            (out("11l", "11[]"), out("11l", "11[]")),
        ]);
        let (t1, t2) = hp_partition(&two, &out("0l", "0[]"));
        assert_eq!((t1.len(), t2.len()), (2, 0));
    }

    #[test]
    fn consistency_of_histories() {
        assert!(i_consistency_filter(
            &EventPairing::default(),
            &(out("0l", "0[]"), out("l", "[]")),
            IndepParam::Full
        ));
        let h = EventPairing::new(vec![(out("0l", "0[]"), out("0l", "0[]"))]);
        assert!(!i_consistency_filter(
            &h,
            &(out("1l", "1[]"), out("l1", "[]")),
            IndepParam::Structural
        ));
        assert!(i_consistency_filter(
            &h,
            &(out("1l", "1[]"), out("1l", "1[]")),
            IndepParam::Structural
        ));
    }
}
