//! Located transitions of extended processes.
//!
//! Transitions are derived in two stages. [`Deriver`] walks the process body
//! and produces raw transitions carrying message values (the channel as a
//! term, the payload of an output, a hole for an input). The top level then
//! turns values into attacker-facing labels: channels are replaced by recipes
//! over the frame, outputs are recorded in the frame under a fresh located
//! alias, and inputs are instantiated with attacker recipes.
//!
//! Replication is unfolded lazily with a symmetry reduction: only the first
//! split-off copy of `!P` moves on its own, and only the first two copies
//! communicate with each other. Every other copy is a relocation of those.
//! Transitions that would need more unfoldings than `repl_unfold` are still
//! produced but flagged as frontier transitions.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, TermError};
use crate::independence::indep_event;
use crate::knowledge::{frame_classes, recipe_enum, Class};
use crate::syntax::{apply_proc_subst, ActionLabel, ExtendedProcess, Guard, Process};
use crate::term::{Alias, Atom, Bits, Message, Name, Substitution, Theory};

pub const DEFAULT_RECIPE_DEPTH: usize = 2;
pub const DEFAULT_TEST_DEPTH: usize = 3;
pub const DEFAULT_REPL_UNFOLD: u32 = 2;
pub const DEFAULT_GAME_DEPTH: usize = 12;
pub const DEFAULT_STATE_BUDGET: usize = 100_000;
/// Public constant added to every pool so the attacker always owns a name.
pub const FRESH_CONST: &str = "w0";

/// `s[t]`: `prefix` records the path through parallel compositions and
/// `choice` the path through sums.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub prefix: Bits,
    pub choice: Bits,
}

impl Location {
    pub fn new(prefix: &str, choice: &str) -> Self {
        Location {
            prefix: Bits::parse(prefix).expect("bit string"),
            choice: Bits::parse(choice).expect("bit string"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (p, rest) = s.split_once('[')?;
        let c = rest.strip_suffix(']')?;
        Some(Location {
            prefix: Bits::parse(p)?,
            choice: Bits::parse(c)?,
        })
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.prefix, self.choice)
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocationLabel {
    Single(Location),
    /// Only on communications: output side and input side locations, in
    /// the order of the parallel composition they meet in.
    Pair(Location, Location),
}

impl LocationLabel {
    pub fn single(prefix: &str, choice: &str) -> Self {
        LocationLabel::Single(Location::new(prefix, choice))
    }

    pub fn pair(l: Location, r: Location) -> Self {
        LocationLabel::Pair(l, r)
    }

    fn map(&self, f: impl Fn(&Location) -> Location) -> LocationLabel {
        match self {
            LocationLabel::Single(l) => LocationLabel::Single(f(l)),
            LocationLabel::Pair(a, b) => LocationLabel::Pair(f(a), f(b)),
        }
    }

    pub fn prepend_prefix(&self, bit: u8) -> LocationLabel {
        self.map(|l| Location {
            prefix: l.prefix.prepend(bit),
            choice: l.choice.clone(),
        })
    }

    fn prepend_choice(&self, bit: u8) -> LocationLabel {
        self.map(|l| Location {
            prefix: l.prefix.clone(),
            choice: l.choice.prepend(bit),
        })
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',')?;
            return Some(LocationLabel::Pair(
                Location::parse(a.trim())?,
                Location::parse(b.trim())?,
            ));
        }
        Location::parse(s).map(LocationLabel::Single)
    }
}

impl fmt::Display for LocationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationLabel::Single(l) => write!(f, "{l}"),
            LocationLabel::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl fmt::Debug for LocationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub action: ActionLabel,
    pub loc: LocationLabel,
}

impl Event {
    pub fn new(action: ActionLabel, loc: LocationLabel) -> Self {
        Event { action, loc }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.action, self.loc)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Finite bounds on the quantifications of the semantics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationBounds {
    /// Application depth of attacker recipes used as channels and inputs.
    pub recipe_depth: usize,
    /// Application depth of recipes used in static tests.
    pub test_depth: usize,
    pub public_consts: BTreeSet<Name>,
    /// Copies of each replication that may be split off along a path.
    pub repl_unfold: u32,
    /// Rounds of an equivalence game before it is cut off.
    pub game_depth: usize,
    pub state_budget: usize,
}

impl Default for ExplorationBounds {
    fn default() -> Self {
        ExplorationBounds {
            recipe_depth: DEFAULT_RECIPE_DEPTH,
            test_depth: DEFAULT_TEST_DEPTH,
            public_consts: [Name::from(FRESH_CONST)].into_iter().collect(),
            repl_unfold: DEFAULT_REPL_UNFOLD,
            game_depth: DEFAULT_GAME_DEPTH,
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

impl ExplorationBounds {
    /// Default bounds with the constant pool drawn from the free names of
    /// the given processes.
    pub fn for_processes(ps: &[&Process]) -> Self {
        let mut b = ExplorationBounds::default();
        b.add_consts_from(ps);
        b
    }

    pub fn add_consts_from(&mut self, ps: &[&Process]) {
        for p in ps {
            self.public_consts.extend(p.free_vars());
        }
    }

    /// Applies `key=value` overrides separated by commas. Keys: `depth`,
    /// `test`, `unfold`, `game`, `states`, `consts` (joined with `+`).
    pub fn apply_overrides(&mut self, spec: &str) -> Result<(), String> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let num = || v.trim().parse::<usize>().map_err(|_| format!("`{v}` is not a number"));
            match k.trim() {
                "depth" => self.recipe_depth = num()?,
                "test" => self.test_depth = num()?,
                "unfold" => self.repl_unfold = num()? as u32,
                "game" => self.game_depth = num()?,
                "states" => self.state_budget = num()?,
                "consts" => self.public_consts.extend(v.split('+').map(|c| Name::from(c.trim()))),
                other => return Err(format!("unknown bound `{other}`")),
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExplorationBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let consts: Vec<&str> = self.public_consts.iter().map(|c| &**c).collect();
        write!(
            f,
            "depth={},test={},unfold={},game={} consts={{{}}}",
            self.recipe_depth,
            self.test_depth,
            self.repl_unfold,
            self.game_depth,
            consts.join(",")
        )
    }
}

// ---------------------------------------------------------------------------
// Raw derivation.

#[derive(Clone, Debug)]
enum RawAct {
    Out { chan: Message, payload: Message },
    In { chan: Message, hole: Name },
    Tau,
}

#[derive(Clone, Debug)]
struct Raw {
    act: RawAct,
    loc: LocationLabel,
    /// Names extruded on the way up, outermost first.
    binders: Vec<Name>,
    residual: Process,
    frontier: bool,
}

struct Deriver<'a> {
    theory: &'a Theory,
    unfold: u32,
    next: usize,
}

impl<'a> Deriver<'a> {
    fn fresh(&mut self) -> Name {
        let n: Name = Arc::from(format!("_{}", self.next));
        self.next += 1;
        n
    }

    fn derive(&mut self, p: &Process) -> Result<Vec<Raw>, TermError> {
        match p {
            Process::Nil => Ok(Vec::new()),
            Process::Guarded(g) => self.derive_guard(g),
            Process::New(x, body) => {
                let z = self.fresh();
                let renamed = apply_proc_subst(body, &Substitution::var(x, Message::Var(z.clone())));
                let mut out = self.derive(&renamed)?;
                for r in &mut out {
                    r.binders.insert(0, z.clone());
                }
                Ok(out)
            }
            Process::Par(l, r) => {
                let lt = self.derive(l)?;
                let rt = self.derive(r)?;
                let mut out = Vec::with_capacity(lt.len() + rt.len());
                for t in &lt {
                    out.push(Raw {
                        act: t.act.clone(),
                        loc: t.loc.prepend_prefix(0),
                        binders: t.binders.clone(),
                        residual: Process::Par(Arc::new(t.residual.clone()), r.clone()),
                        frontier: t.frontier,
                    });
                }
                for t in &rt {
                    out.push(Raw {
                        act: t.act.clone(),
                        loc: t.loc.prepend_prefix(1),
                        binders: t.binders.clone(),
                        residual: Process::Par(l.clone(), Arc::new(t.residual.clone())),
                        frontier: t.frontier,
                    });
                }
                for (a, b, c) in self.closes(&lt, &rt, 1) {
                    out.push(Raw {
                        act: RawAct::Tau,
                        loc: LocationLabel::Pair(a.0, b.0),
                        binders: c.0,
                        residual: Process::par(a.1, b.1),
                        frontier: c.1,
                    });
                }
                Ok(out)
            }
            Process::Bang(body, count) => {
                let copy = self.derive(body)?;
                let mut out = Vec::new();
                let rest1 = Process::Bang(body.clone(), count + 1);
                for t in &copy {
                    out.push(Raw {
                        act: t.act.clone(),
                        loc: t.loc.prepend_prefix(0),
                        binders: t.binders.clone(),
                        residual: Process::par(t.residual.clone(), rest1.clone()),
                        frontier: t.frontier || count + 1 > self.unfold,
                    });
                }
                // the second copy sits at 1.0 under the unfolding P | (P | !P)
                let second = self.derive(body)?;
                let second: Vec<Raw> = second
                    .into_iter()
                    .map(|mut t| {
                        t.loc = t.loc.prepend_prefix(0);
                        t
                    })
                    .collect();
                let rest2 = Process::Bang(body.clone(), count + 2);
                for (a, b, c) in self.closes(&copy, &second, 1) {
                    out.push(Raw {
                        act: RawAct::Tau,
                        loc: LocationLabel::Pair(a.0, b.0),
                        binders: c.0,
                        residual: Process::par(a.1, Process::par(b.1, rest2.clone())),
                        frontier: c.1 || count + 2 > self.unfold,
                    });
                }
                Ok(out)
            }
        }
    }

    /// Communications between a left and a right component. Each result is
    /// ((left location, left residual), (right location, right residual),
    /// (binders, frontier)).
    #[allow(clippy::type_complexity)]
    fn closes(
        &mut self,
        left: &[Raw],
        right: &[Raw],
        right_bit: u8,
    ) -> Vec<((Location, Process), (Location, Process), (Vec<Name>, bool))> {
        let mut out = Vec::new();
        let single = |l: &LocationLabel, bit: u8| match l.prepend_prefix(bit) {
            LocationLabel::Single(x) => x,
            LocationLabel::Pair(..) => unreachable!("communication partners have single locations"),
        };
        for a in left {
            for b in right {
                let (a_res, b_res) = match (&a.act, &b.act) {
                    (RawAct::Out { chan: c1, payload }, RawAct::In { chan: c2, hole }) if c1 == c2 => (
                        a.residual.clone(),
                        apply_proc_subst(&b.residual, &Substitution::var(hole, payload.clone())),
                    ),
                    (RawAct::In { chan: c1, hole }, RawAct::Out { chan: c2, payload }) if c1 == c2 => (
                        apply_proc_subst(&a.residual, &Substitution::var(hole, payload.clone())),
                        b.residual.clone(),
                    ),
                    _ => continue,
                };
                let mut binders = a.binders.clone();
                binders.extend(b.binders.iter().cloned());
                out.push((
                    (single(&a.loc, 0), a_res),
                    (single(&b.loc, right_bit), b_res),
                    (binders, a.frontier || b.frontier),
                ));
            }
        }
        out
    }

    fn derive_guard(&mut self, g: &Guard) -> Result<Vec<Raw>, TermError> {
        let here = LocationLabel::Single(Location::default());
        match g {
            Guard::In(c, x, body) => {
                let hole = self.fresh();
                let residual = apply_proc_subst(body, &Substitution::var(x, Message::Var(hole.clone())));
                Ok(vec![Raw {
                    act: RawAct::In {
                        chan: self.theory.normalize(c)?,
                        hole,
                    },
                    loc: here,
                    binders: Vec::new(),
                    residual,
                    frontier: false,
                }])
            }
            Guard::Out(c, n, body) => Ok(vec![Raw {
                act: RawAct::Out {
                    chan: self.theory.normalize(c)?,
                    payload: self.theory.normalize(n)?,
                },
                loc: here,
                binders: Vec::new(),
                residual: (**body).clone(),
                frontier: false,
            }]),
            Guard::Match(m, n, h) => {
                if self.theory.eq_mod(m, n)? {
                    self.derive_guard(h)
                } else {
                    Ok(Vec::new())
                }
            }
            Guard::Mismatch(m, n, h) => {
                if self.theory.eq_mod(m, n)? {
                    Ok(Vec::new())
                } else {
                    self.derive_guard(h)
                }
            }
            Guard::Sum(l, r) => {
                let mut out = self.derive_guard(l)?;
                for t in &mut out {
                    t.loc = t.loc.prepend_choice(0);
                }
                let mut rt = self.derive_guard(r)?;
                for t in &mut rt {
                    t.loc = t.loc.prepend_choice(1);
                }
                out.extend(rt);
                Ok(out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Top level.

/// How inputs are instantiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputMode {
    /// Every recipe up to the depth, deduplicated modulo the theory.
    Recipes,
    /// One recipe per (value under the frame, free aliases) class.
    ValueClasses,
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub event: Event,
    pub target: ExtendedProcess,
    /// Needs more replication unfoldings than the bounds allow.
    pub frontier: bool,
}

/// Channel recipes per channel value: the least recipe for each set of free
/// aliases.
pub struct Knowledge {
    classes: Vec<Class>,
    by_value: HashMap<Message, Vec<usize>>,
}

impl Knowledge {
    pub fn new(frame: &Substitution, theory: &Theory, bounds: &ExplorationBounds) -> Result<Self, TermError> {
        let classes = frame_classes(frame, &bounds.public_consts, bounds.recipe_depth, theory)?;
        let mut by_value: HashMap<Message, Vec<usize>> = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            by_value.entry(c.values[0].clone()).or_default().push(i);
        }
        Ok(Knowledge { classes, by_value })
    }

    pub fn channel_recipes(&self, value: &Message) -> Vec<&Message> {
        self.by_value
            .get(value)
            .map(|ix| ix.iter().map(|&i| &self.classes[i].recipe).collect())
            .unwrap_or_default()
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }
}

/// Least `s l_i` not in the frame's domain.
pub fn fresh_alias(frame: &Substitution, prefix: &Bits) -> Alias {
    let mut i = 0;
    loop {
        let a = Alias::new(prefix.clone(), i);
        if frame.get_alias(&a).is_none() {
            return a;
        }
        i += 1;
    }
}

fn deriver<'a>(a: &ExtendedProcess, theory: &'a Theory, bounds: &ExplorationBounds) -> Deriver<'a> {
    Deriver {
        theory,
        unfold: bounds.repl_unfold,
        next: a.max_canonical_index().map_or(0, |k| k + 1),
    }
}

fn extend_binders(a: &ExtendedProcess, extra: &[Name]) -> Vec<Name> {
    let mut b = a.binders.clone();
    b.extend(extra.iter().cloned());
    b
}

/// All transitions of `a`, including frontier ones, with targets in
/// canonical form. Input payloads range over `mode`.
pub fn step(
    a: &ExtendedProcess,
    theory: &Theory,
    bounds: &ExplorationBounds,
    mode: InputMode,
) -> Result<Vec<Transition>, TermError> {
    let raws = deriver(a, theory, bounds).derive(&a.body)?;
    if raws.is_empty() {
        return Ok(Vec::new());
    }
    let know = Knowledge::new(&a.frame, theory, bounds)?;
    let payloads: Vec<(Message, Message)> = if raws.iter().any(|r| matches!(r.act, RawAct::In { .. })) {
        match mode {
            InputMode::Recipes => recipe_enum(&a.dom(), &bounds.public_consts, bounds.recipe_depth, theory)?
                .into_iter()
                .map(|r| {
                    let v = theory.normalize(&r.apply(&a.frame))?;
                    Ok((r, v))
                })
                .collect::<Result<_, TermError>>()?,
            InputMode::ValueClasses => know
                .classes()
                .iter()
                .map(|c| (c.recipe.clone(), c.values[0].clone()))
                .collect(),
        }
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    for r in raws {
        match &r.act {
            RawAct::Tau => out.push(Transition {
                event: Event::new(ActionLabel::Tau, r.loc.clone()),
                target: ExtendedProcess {
                    binders: extend_binders(a, &r.binders),
                    frame: a.frame.clone(),
                    body: r.residual.clone(),
                }
                .struct_key(),
                frontier: r.frontier,
            }),
            RawAct::Out { chan, payload } => {
                let prefix = match &r.loc {
                    LocationLabel::Single(l) => l.prefix.clone(),
                    LocationLabel::Pair(..) => unreachable!("outputs have single locations"),
                };
                let alias = fresh_alias(&a.frame, &prefix);
                let mut frame = a.frame.clone();
                frame.insert(Atom::Alias(alias.clone()), payload.clone());
                let target = ExtendedProcess {
                    binders: extend_binders(a, &r.binders),
                    frame,
                    body: r.residual.clone(),
                }
                .struct_key();
                for m in know.channel_recipes(chan) {
                    out.push(Transition {
                        event: Event::new(
                            ActionLabel::Output {
                                chan: m.clone(),
                                alias: alias.clone(),
                            },
                            r.loc.clone(),
                        ),
                        target: target.clone(),
                        frontier: r.frontier,
                    });
                }
            }
            RawAct::In { chan, hole } => {
                let recipes = know.channel_recipes(chan);
                if recipes.is_empty() {
                    continue;
                }
                for (n, value) in &payloads {
                    let body = apply_proc_subst(&r.residual, &Substitution::var(hole, value.clone()));
                    let target = ExtendedProcess {
                        binders: extend_binders(a, &r.binders),
                        frame: a.frame.clone(),
                        body,
                    }
                    .struct_key();
                    for m in &recipes {
                        out.push(Transition {
                            event: Event::new(
                                ActionLabel::FreeInput {
                                    chan: (*m).clone(),
                                    payload: n.clone(),
                                },
                                r.loc.clone(),
                            ),
                            target: target.clone(),
                            frontier: r.frontier,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Transitions answering a given label: the channel and payload are fixed
/// values, so only matching derivations are kept. `alias` is chosen by
/// location as usual.
pub fn matching_transitions(
    a: &ExtendedProcess,
    theory: &Theory,
    bounds: &ExplorationBounds,
    label: &ActionLabel,
) -> Result<Vec<Transition>, TermError> {
    let raws = deriver(a, theory, bounds).derive(&a.body)?;
    let mut out = Vec::new();
    let value = |m: &Message| theory.normalize(&m.apply(&a.frame));
    match label {
        ActionLabel::Tau => {
            for r in raws {
                if matches!(r.act, RawAct::Tau) {
                    out.push(Transition {
                        event: Event::new(ActionLabel::Tau, r.loc.clone()),
                        target: ExtendedProcess {
                            binders: extend_binders(a, &r.binders),
                            frame: a.frame.clone(),
                            body: r.residual,
                        }
                        .struct_key(),
                        frontier: r.frontier,
                    });
                }
            }
        }
        ActionLabel::Output { chan: m, .. } => {
            let k = value(m)?;
            for r in raws {
                if let RawAct::Out { chan, payload } = &r.act {
                    if *chan != k {
                        continue;
                    }
                    let prefix = match &r.loc {
                        LocationLabel::Single(l) => l.prefix.clone(),
                        LocationLabel::Pair(..) => unreachable!("outputs have single locations"),
                    };
                    let alias = fresh_alias(&a.frame, &prefix);
                    let mut frame = a.frame.clone();
                    frame.insert(Atom::Alias(alias.clone()), payload.clone());
                    out.push(Transition {
                        event: Event::new(ActionLabel::Output { chan: m.clone(), alias }, r.loc.clone()),
                        target: ExtendedProcess {
                            binders: extend_binders(a, &r.binders),
                            frame,
                            body: r.residual.clone(),
                        }
                        .struct_key(),
                        frontier: r.frontier,
                    });
                }
            }
        }
        ActionLabel::FreeInput { chan: m, payload: n } => {
            let k = value(m)?;
            let v = value(n)?;
            for r in raws {
                if let RawAct::In { chan, hole } = &r.act {
                    if *chan != k {
                        continue;
                    }
                    let body = apply_proc_subst(&r.residual, &Substitution::var(hole, v.clone()));
                    out.push(Transition {
                        event: Event::new(label.clone(), r.loc.clone()),
                        target: ExtendedProcess {
                            binders: extend_binders(a, &r.binders),
                            frame: a.frame.clone(),
                            body,
                        }
                        .struct_key(),
                        frontier: r.frontier,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The transitions of `a` within the bounds. Inputs range over
/// [`input_instances`]; frontier transitions are left out.
pub fn enabled_transitions(
    a: &ExtendedProcess,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Vec<(Event, ExtendedProcess)>, TermError> {
    Ok(step(a, theory, bounds, InputMode::Recipes)?
        .into_iter()
        .filter(|t| !t.frontier)
        .map(|t| (t.event, t.target))
        .collect())
}

/// Attacker recipes used as input payloads in state `a`.
pub fn input_instances(
    a: &ExtendedProcess,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Vec<Message>, TermError> {
    recipe_enum(&a.dom(), &bounds.public_consts, bounds.recipe_depth, theory)
}

/// Explicit transition graph.
#[derive(Clone, Debug, Serialize)]
pub struct Lts {
    #[serde(serialize_with = "ser_states")]
    pub states: Vec<ExtendedProcess>,
    pub edges: Vec<(usize, Event, usize)>,
    /// Some replication was cut at the unfolding bound.
    pub truncated: bool,
}

fn ser_states<S: serde::Serializer>(states: &[ExtendedProcess], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(states.len()))?;
    for st in states {
        seq.serialize_element(&st.to_string())?;
    }
    seq.end()
}

/// Breadth-first closure of [`enabled_transitions`], states identified up
/// to structural congruence.
pub fn reachable_lts(a: &ExtendedProcess, theory: &Theory, bounds: &ExplorationBounds) -> Result<Lts, Error> {
    let start = a.struct_key();
    let mut index: BTreeMap<ExtendedProcess, usize> = BTreeMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        for t in step(&s, theory, bounds, InputMode::Recipes)? {
            if t.frontier {
                truncated = true;
                continue;
            }
            let j = match index.get(&t.target) {
                Some(&j) => j,
                None => {
                    if states.len() >= bounds.state_budget {
                        return Err(Error::StateBudget(bounds.state_budget));
                    }
                    let j = states.len();
                    states.push(t.target.clone());
                    index.insert(t.target, j);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, t.event, j));
        }
    }
    Ok(Lts {
        states,
        edges,
        truncated,
    })
}

/// A square that fails to close: from `state`, `first` then `second` and
/// `second` then `first` do not both exist or do not meet.
#[derive(Clone, Debug, Serialize)]
pub struct DiamondViolation {
    pub state: String,
    pub first: Event,
    pub second: Event,
    pub reason: String,
}

/// Checks that every pair of distinct independent coinitial events commutes
/// up to structural congruence, over all reachable states.
pub fn diamond_check(
    a: &ExtendedProcess,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Vec<DiamondViolation>, Error> {
    let lts = reachable_lts(a, theory, bounds)?;
    let mut out_edges: Vec<Vec<(Event, usize)>> = vec![Vec::new(); lts.states.len()];
    for (i, e, j) in &lts.edges {
        out_edges[*i].push((e.clone(), *j));
    }
    let find = |s: usize, e: &Event| out_edges[s].iter().find(|(f, _)| f == e).map(|(_, t)| *t);
    let mut violations = Vec::new();
    for (s, outs) in out_edges.iter().enumerate() {
        for (x, (e0, t0)) in outs.iter().enumerate() {
            for (e1, t1) in outs.iter().skip(x + 1) {
                if e0 == e1 || !indep_event(e0, e1) {
                    continue;
                }
                let reach = |from: usize, e: &Event| -> Option<Option<usize>> {
                    // None: the step needs more unfolding than allowed
                    match find(from, e) {
                        Some(t) => Some(Some(t)),
                        None => {
                            let all = step(&lts.states[from], theory, bounds, InputMode::Recipes).ok()?;
                            if all.iter().any(|t| &t.event == e && t.frontier) {
                                None
                            } else {
                                Some(None)
                            }
                        }
                    }
                };
                let (Some(u0), Some(u1)) = (reach(*t0, e1), reach(*t1, e0)) else {
                    continue;
                };
                let reason = match (u0, u1) {
                    (Some(a0), Some(a1)) if a0 == a1 => continue,
                    (Some(_), Some(_)) => "the two orders reach different states".to_string(),
                    (None, _) => format!("{e1} is disabled after {e0}"),
                    (_, None) => format!("{e0} is disabled after {e1}"),
                };
                violations.push(DiamondViolation {
                    state: lts.states[s].to_string(),
                    first: e0.clone(),
                    second: e1.clone(),
                    reason,
                });
            }
        }
    }
    Ok(violations)
}

/// Collapses guarded processes that can never move and drops unused top
/// binders. Used to identify game positions that differ only in garbage.
pub fn collect_garbage(a: &ExtendedProcess, theory: &Theory) -> Result<ExtendedProcess, TermError> {
    let body = gc_proc(&a.body, theory)?;
    Ok(ExtendedProcess {
        binders: a.binders.clone(),
        frame: a.frame.clone(),
        body,
    }
    .drop_unused_binders())
}

fn gc_proc(p: &Process, theory: &Theory) -> Result<Process, TermError> {
    Ok(match p {
        Process::Nil => Process::Nil,
        Process::New(x, q) => {
            let q2 = gc_proc(q, theory)?;
            if q2.is_nil() {
                Process::Nil
            } else {
                Process::New(x.clone(), Arc::new(q2))
            }
        }
        Process::Par(q, r) => Process::par(gc_proc(q, theory)?, gc_proc(r, theory)?),
        Process::Bang(q, c) => Process::Bang(Arc::new(gc_proc(q, theory)?), *c),
        Process::Guarded(g) => match simplify_guard(g, theory)? {
            None => Process::Nil,
            Some(h) => Process::Guarded(h),
        },
    })
}

/// `None` when the guard can never fire. Conditions that already hold are
/// dropped; they add nothing to locations. Summands are kept in place so
/// that choice bits are unchanged.
fn simplify_guard(g: &Arc<Guard>, theory: &Theory) -> Result<Option<Arc<Guard>>, TermError> {
    Ok(match &**g {
        Guard::In(..) | Guard::Out(..) => Some(g.clone()),
        Guard::Match(m, n, h) => {
            if theory.eq_mod(m, n)? {
                simplify_guard(h, theory)?
            } else {
                None
            }
        }
        Guard::Mismatch(m, n, h) => {
            if theory.eq_mod(m, n)? {
                None
            } else {
                simplify_guard(h, theory)?
            }
        }
        Guard::Sum(h, k) => match (simplify_guard(h, theory)?, simplify_guard(k, theory)?) {
            (None, None) => None,
            (h2, k2) => Some(Arc::new(Guard::Sum(
                h2.unwrap_or_else(|| h.clone()),
                k2.unwrap_or_else(|| k.clone()),
            ))),
        },
    })
}
