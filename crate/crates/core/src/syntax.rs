//! Processes, extended processes and action labels; printing, capture-avoiding
//! substitution, alpha-canonical forms and structural congruence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::term::{Alias, AliasMap, Atom, Message, Name, Substitution, Symbol};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    Nil,
    New(Name, Arc<Process>),
    Par(Arc<Process>, Arc<Process>),
    /// Replication; the counter records how many copies have been split off
    /// along the current path.
    Bang(Arc<Process>, u32),
    Guarded(Arc<Guard>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    In(Message, Name, Arc<Process>),
    Out(Message, Message, Arc<Process>),
    Match(Message, Message, Arc<Guard>),
    Mismatch(Message, Message, Arc<Guard>),
    Sum(Arc<Guard>, Arc<Guard>),
}

impl Process {
    pub fn new_name(x: &str, p: Process) -> Process {
        Process::New(Arc::from(x), Arc::new(p))
    }

    pub fn par(p: Process, q: Process) -> Process {
        Process::Par(Arc::new(p), Arc::new(q))
    }

    pub fn bang(p: Process) -> Process {
        Process::Bang(Arc::new(p), 0)
    }

    pub fn guard(g: Guard) -> Process {
        Process::Guarded(Arc::new(g))
    }

    pub fn input(chan: Message, x: &str, p: Process) -> Process {
        Process::guard(Guard::In(chan, Arc::from(x), Arc::new(p)))
    }

    pub fn output(chan: Message, payload: Message, p: Process) -> Process {
        Process::guard(Guard::Out(chan, payload, Arc::new(p)))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Nil)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Process::Nil => {}
            Process::New(x, p) => {
                bound.push(x.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            Process::Par(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Process::Bang(p, _) => p.collect_free(bound, out),
            Process::Guarded(g) => g.collect_free(bound, out),
        }
    }

    /// Every name occurring in the process, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Process::Nil => {}
            Process::New(x, p) => {
                out.insert(x.clone());
                p.all_names(out);
            }
            Process::Par(p, q) => {
                p.all_names(out);
                q.all_names(out);
            }
            Process::Bang(p, _) => p.all_names(out),
            Process::Guarded(g) => g.all_names(out),
        }
    }

    pub fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Process::Nil => {}
            Process::New(_, p) | Process::Bang(p, _) => p.symbols(out),
            Process::Par(p, q) => {
                p.symbols(out);
                q.symbols(out);
            }
            Process::Guarded(g) => g.symbols(out),
        }
    }

    pub fn has_aliases(&self) -> bool {
        match self {
            Process::Nil => false,
            Process::New(_, p) | Process::Bang(p, _) => p.has_aliases(),
            Process::Par(p, q) => p.has_aliases() || q.has_aliases(),
            Process::Guarded(g) => g.has_aliases(),
        }
    }

    pub fn has_bang(&self) -> bool {
        match self {
            Process::Nil => false,
            Process::Bang(..) => true,
            Process::New(_, p) => p.has_bang(),
            Process::Par(p, q) => p.has_bang() || q.has_bang(),
            Process::Guarded(g) => g.has_bang(),
        }
    }

    /// Resets all replication counters.
    pub fn reset_counters(&self) -> Process {
        match self {
            Process::Nil => Process::Nil,
            Process::New(x, p) => Process::New(x.clone(), Arc::new(p.reset_counters())),
            Process::Par(p, q) => Process::Par(Arc::new(p.reset_counters()), Arc::new(q.reset_counters())),
            Process::Bang(p, _) => Process::Bang(Arc::new(p.reset_counters()), 0),
            Process::Guarded(g) => Process::Guarded(Arc::new(g.reset_counters())),
        }
    }
}

impl Guard {
    pub fn body_is_sum(&self) -> bool {
        matches!(self, Guard::Sum(..))
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let msg = |m: &Message, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            for v in m.free_vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Guard::In(c, x, p) => {
                msg(c, bound, out);
                bound.push(x.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            Guard::Out(c, n, p) => {
                msg(c, bound, out);
                msg(n, bound, out);
                p.collect_free(bound, out);
            }
            Guard::Match(m, n, g) | Guard::Mismatch(m, n, g) => {
                msg(m, bound, out);
                msg(n, bound, out);
                g.collect_free(bound, out);
            }
            Guard::Sum(g, h) => {
                g.collect_free(bound, out);
                h.collect_free(bound, out);
            }
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Guard::In(c, x, p) => {
                c.collect_vars(out);
                out.insert(x.clone());
                p.all_names(out);
            }
            Guard::Out(c, n, p) => {
                c.collect_vars(out);
                n.collect_vars(out);
                p.all_names(out);
            }
            Guard::Match(m, n, g) | Guard::Mismatch(m, n, g) => {
                m.collect_vars(out);
                n.collect_vars(out);
                g.all_names(out);
            }
            Guard::Sum(g, h) => {
                g.all_names(out);
                h.all_names(out);
            }
        }
    }

    fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Guard::In(c, _, p) => {
                c.symbols(out);
                p.symbols(out);
            }
            Guard::Out(c, n, p) => {
                c.symbols(out);
                n.symbols(out);
                p.symbols(out);
            }
            Guard::Match(m, n, g) | Guard::Mismatch(m, n, g) => {
                m.symbols(out);
                n.symbols(out);
                g.symbols(out);
            }
            Guard::Sum(g, h) => {
                g.symbols(out);
                h.symbols(out);
            }
        }
    }

    fn has_aliases(&self) -> bool {
        match self {
            Guard::In(c, _, p) => c.has_aliases() || p.has_aliases(),
            Guard::Out(c, n, p) => c.has_aliases() || n.has_aliases() || p.has_aliases(),
            Guard::Match(m, n, g) | Guard::Mismatch(m, n, g) => m.has_aliases() || n.has_aliases() || g.has_aliases(),
            Guard::Sum(g, h) => g.has_aliases() || h.has_aliases(),
        }
    }

    fn has_bang(&self) -> bool {
        match self {
            Guard::In(_, _, p) | Guard::Out(_, _, p) => p.has_bang(),
            Guard::Match(_, _, g) | Guard::Mismatch(_, _, g) => g.has_bang(),
            Guard::Sum(g, h) => g.has_bang() || h.has_bang(),
        }
    }

    fn reset_counters(&self) -> Guard {
        match self {
            Guard::In(c, x, p) => Guard::In(c.clone(), x.clone(), Arc::new(p.reset_counters())),
            Guard::Out(c, n, p) => Guard::Out(c.clone(), n.clone(), Arc::new(p.reset_counters())),
            Guard::Match(m, n, g) => Guard::Match(m.clone(), n.clone(), Arc::new(g.reset_counters())),
            Guard::Mismatch(m, n, g) => Guard::Mismatch(m.clone(), n.clone(), Arc::new(g.reset_counters())),
            Guard::Sum(g, h) => Guard::Sum(Arc::new(g.reset_counters()), Arc::new(h.reset_counters())),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing. The output is accepted by the parser and reproduces the same tree.

fn is_cond(g: &Guard) -> bool {
    matches!(g, Guard::Match(..) | Guard::Mismatch(..))
}

impl Process {
    fn fmt_par(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Par(p, q) => {
                p.fmt_sum(f)?;
                write!(f, " | ")?;
                q.fmt_par(f)
            }
            _ => self.fmt_sum(f),
        }
    }

    fn fmt_sum(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Guarded(g) if g.body_is_sum() => g.fmt_sum(f),
            Process::Par(..) => {
                write!(f, "(")?;
                self.fmt_par(f)?;
                write!(f, ")")
            }
            _ => self.fmt_unary(f),
        }
    }

    fn fmt_unary(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => write!(f, "0"),
            Process::New(x, p) => {
                write!(f, "new {x}.")?;
                p.fmt_unary(f)
            }
            Process::Bang(p, _) => {
                write!(f, "!")?;
                p.fmt_unary(f)
            }
            Process::Guarded(g) => g.fmt_unary(f),
            Process::Par(..) => {
                write!(f, "(")?;
                self.fmt_par(f)?;
                write!(f, ")")
            }
        }
    }

    fn fmt_cont(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            Ok(())
        } else {
            write!(f, ".")?;
            self.fmt_unary(f)
        }
    }
}

impl Guard {
    fn fmt_sum(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Sum(g, h) => {
                if g.body_is_sum() || is_cond(g) {
                    write!(f, "(")?;
                    g.fmt_sum(f)?;
                    write!(f, ")")?;
                } else {
                    g.fmt_unary(f)?;
                }
                write!(f, " + ")?;
                h.fmt_sum(f)
            }
            _ => self.fmt_unary(f),
        }
    }

    fn fmt_unary(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::In(c, x, p) => {
                write!(f, "in({c},{x})")?;
                p.fmt_cont(f)
            }
            Guard::Out(c, n, p) => {
                write!(f, "out({c},{n})")?;
                p.fmt_cont(f)
            }
            Guard::Match(m, n, g) => {
                write!(f, "[{m} = {n}] ")?;
                g.fmt_unary(f)
            }
            Guard::Mismatch(m, n, g) => {
                write!(f, "[{m} != {n}] ")?;
                g.fmt_unary(f)
            }
            Guard::Sum(..) => {
                write!(f, "(")?;
                self.fmt_sum(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_par(f)
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_sum(f)
    }
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// Capture-avoiding substitution of messages for variables.

/// Picks a variant of `base` that is not in `avoid`.
pub fn fresh_variant(base: &str, avoid: &BTreeSet<Name>) -> Name {
    if let Some(idx) = canonical_index(base) {
        let mut k = idx + 1;
        loop {
            let cand: Name = Arc::from(format!("_{k}"));
            if !avoid.contains(&cand) {
                return cand;
            }
            k += 1;
        }
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let mut k = 1usize;
    loop {
        let cand: Name = Arc::from(format!("{stem}{k}"));
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Index of a machine-generated name `_k`.
pub fn canonical_index(name: &str) -> Option<usize> {
    name.strip_prefix('_').and_then(|s| s.parse().ok())
}

/// Applies a substitution whose domain holds variables, renaming binders
/// that would capture names of the substitution's range.
pub fn apply_proc_subst(p: &Process, s: &Substitution) -> Process {
    let map: BTreeMap<Name, Message> = s
        .iter()
        .filter_map(|(k, v)| match k {
            Atom::Var(x) => Some((x.clone(), v.clone())),
            Atom::Alias(_) => None,
        })
        .collect();
    subst_proc(p, &map)
}

fn range_vars(map: &BTreeMap<Name, Message>) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for v in map.values() {
        v.collect_vars(&mut out);
    }
    out
}

fn subst_msg(m: &Message, map: &BTreeMap<Name, Message>) -> Message {
    match m {
        Message::Var(x) => map.get(x).cloned().unwrap_or_else(|| m.clone()),
        Message::Alias(_) => m.clone(),
        Message::App(f, args) => Message::App(f.clone(), args.iter().map(|a| subst_msg(a, map)).collect()),
    }
}

/// Enters the scope of binder `x` over `body`: returns the binder to use and
/// the map to apply inside.
fn enter_binder(
    x: &Name,
    body_free: impl FnOnce() -> BTreeSet<Name>,
    map: &BTreeMap<Name, Message>,
) -> (Name, BTreeMap<Name, Message>) {
    let mut inner = map.clone();
    inner.remove(x);
    if inner.is_empty() {
        return (x.clone(), inner);
    }
    let ran = range_vars(&inner);
    if !ran.contains(x) {
        return (x.clone(), inner);
    }
    let mut avoid = ran;
    avoid.extend(inner.keys().cloned());
    avoid.extend(body_free());
    let z = fresh_variant(x, &avoid);
    inner.insert(x.clone(), Message::Var(z.clone()));
    (z, inner)
}

fn subst_proc(p: &Process, map: &BTreeMap<Name, Message>) -> Process {
    if map.is_empty() {
        return p.clone();
    }
    match p {
        Process::Nil => Process::Nil,
        Process::New(x, body) => {
            let (z, inner) = enter_binder(x, || body.free_vars(), map);
            Process::New(z, Arc::new(subst_proc(body, &inner)))
        }
        Process::Par(a, b) => Process::Par(Arc::new(subst_proc(a, map)), Arc::new(subst_proc(b, map))),
        Process::Bang(a, c) => Process::Bang(Arc::new(subst_proc(a, map)), *c),
        Process::Guarded(g) => Process::Guarded(Arc::new(subst_guard(g, map))),
    }
}

fn subst_guard(g: &Guard, map: &BTreeMap<Name, Message>) -> Guard {
    match g {
        Guard::In(c, x, body) => {
            let (z, inner) = enter_binder(x, || body.free_vars(), map);
            Guard::In(subst_msg(c, map), z, Arc::new(subst_proc(body, &inner)))
        }
        Guard::Out(c, n, body) => Guard::Out(subst_msg(c, map), subst_msg(n, map), Arc::new(subst_proc(body, map))),
        Guard::Match(m, n, h) => Guard::Match(subst_msg(m, map), subst_msg(n, map), Arc::new(subst_guard(h, map))),
        Guard::Mismatch(m, n, h) => {
            Guard::Mismatch(subst_msg(m, map), subst_msg(n, map), Arc::new(subst_guard(h, map)))
        }
        Guard::Sum(a, b) => Guard::Sum(Arc::new(subst_guard(a, map)), Arc::new(subst_guard(b, map))),
    }
}

// ---------------------------------------------------------------------------
// Extended processes.

/// `new x1..xn.(frame | body)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedProcess {
    pub binders: Vec<Name>,
    pub frame: Substitution,
    pub body: Process,
}

impl ExtendedProcess {
    /// `id | p`.
    pub fn from_process(p: Process) -> Self {
        ExtendedProcess {
            binders: Vec::new(),
            frame: Substitution::id(),
            body: p,
        }
    }

    pub fn dom(&self) -> BTreeSet<Alias> {
        self.frame.alias_dom()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = self.body.free_vars();
        for (_, m) in self.frame.iter() {
            m.collect_vars(&mut out);
        }
        for b in &self.binders {
            out.remove(b);
        }
        out
    }

    /// Largest `k` such that `_k` occurs anywhere in the state.
    pub fn max_canonical_index(&self) -> Option<usize> {
        let mut names: BTreeSet<Name> = self.binders.iter().cloned().collect();
        self.body.all_names(&mut names);
        for (_, m) in self.frame.iter() {
            m.collect_vars(&mut names);
        }
        names.iter().filter_map(|n| canonical_index(n)).max()
    }

    /// Renames the top binders to `_0.._n` in their current order and every
    /// inner binder in traversal order after them.
    pub fn alpha_canonical(&self) -> ExtendedProcess {
        let order: Vec<Name> = dedup_keep_last(&self.binders);
        canonicalize(self, &order, order.len())
    }

    /// Canonical representative of the structural congruence class: top
    /// binders sorted by first use (frame first, then body), unused binders
    /// dropped from the ordering but still counted.
    pub fn struct_key(&self) -> ExtendedProcess {
        let live = dedup_keep_last(&self.binders);
        let used = first_use_order(self, &live);
        let mut order = used.clone();
        for b in &live {
            if !used.contains(b) {
                order.push(b.clone());
            }
        }
        canonicalize(self, &order, order.len())
    }

    /// Drops top binders that occur nowhere.
    pub fn drop_unused_binders(&self) -> ExtendedProcess {
        let fv = {
            let mut s = self.body.free_vars();
            for (_, m) in self.frame.iter() {
                m.collect_vars(&mut s);
            }
            s
        };
        let mut seen = BTreeSet::new();
        let mut binders = Vec::new();
        for b in self.binders.iter().rev() {
            if fv.contains(b) && seen.insert(b.clone()) {
                binders.push(b.clone());
            }
        }
        binders.reverse();
        ExtendedProcess {
            binders,
            frame: self.frame.clone(),
            body: self.body.clone(),
        }
    }
}

/// Later binders shadow earlier ones with the same name; keep the last.
fn dedup_keep_last(binders: &[Name]) -> Vec<Name> {
    let mut seen = BTreeSet::new();
    let mut out: Vec<Name> = binders
        .iter()
        .rev()
        .filter(|b| seen.insert((*b).clone()))
        .cloned()
        .collect();
    out.reverse();
    out
}

fn first_use_order(a: &ExtendedProcess, binders: &[Name]) -> Vec<Name> {
    let top: BTreeSet<Name> = binders.iter().cloned().collect();
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    let mut note = |x: &Name, order: &mut Vec<Name>| {
        if top.contains(x) && seen.insert(x.clone()) {
            order.push(x.clone());
        }
    };
    for (_, m) in a.frame.iter() {
        msg_order(m, &mut |x| note(x, &mut order));
    }
    proc_order(&a.body, &mut Vec::new(), &mut |x| note(x, &mut order));
    order
}

fn msg_order(m: &Message, f: &mut impl FnMut(&Name)) {
    match m {
        Message::Var(x) => f(x),
        Message::Alias(_) => {}
        Message::App(_, args) => args.iter().for_each(|a| msg_order(a, f)),
    }
}

fn proc_order(p: &Process, bound: &mut Vec<Name>, f: &mut impl FnMut(&Name)) {
    match p {
        Process::Nil => {}
        Process::New(x, q) => {
            bound.push(x.clone());
            proc_order(q, bound, f);
            bound.pop();
        }
        Process::Par(q, r) => {
            proc_order(q, bound, f);
            proc_order(r, bound, f);
        }
        Process::Bang(q, _) => proc_order(q, bound, f),
        Process::Guarded(g) => guard_order(g, bound, f),
    }
}

fn guard_order(g: &Guard, bound: &mut Vec<Name>, f: &mut impl FnMut(&Name)) {
    let free = |m: &Message, bound: &Vec<Name>, f: &mut dyn FnMut(&Name)| {
        msg_order(m, &mut |x| {
            if !bound.contains(x) {
                f(x)
            }
        })
    };
    match g {
        Guard::In(c, x, q) => {
            free(c, bound, f);
            bound.push(x.clone());
            proc_order(q, bound, f);
            bound.pop();
        }
        Guard::Out(c, n, q) => {
            free(c, bound, f);
            free(n, bound, f);
            proc_order(q, bound, f);
        }
        Guard::Match(m, n, h) | Guard::Mismatch(m, n, h) => {
            free(m, bound, f);
            free(n, bound, f);
            guard_order(h, bound, f);
        }
        Guard::Sum(h, k) => {
            guard_order(h, bound, f);
            guard_order(k, bound, f);
        }
    }
}

struct Canon {
    next: usize,
}

impl Canon {
    fn fresh(&mut self) -> Name {
        let n: Name = Arc::from(format!("_{}", self.next));
        self.next += 1;
        n
    }
}

fn rename_msg(m: &Message, env: &BTreeMap<Name, Name>) -> Message {
    match m {
        Message::Var(x) => match env.get(x) {
            Some(y) => Message::Var(y.clone()),
            None => m.clone(),
        },
        Message::Alias(_) => m.clone(),
        Message::App(f, args) => Message::App(f.clone(), args.iter().map(|a| rename_msg(a, env)).collect()),
    }
}

fn canonicalize(a: &ExtendedProcess, order: &[Name], count: usize) -> ExtendedProcess {
    let mut env = BTreeMap::new();
    let mut binders = Vec::with_capacity(count);
    for (i, b) in order.iter().enumerate() {
        let n: Name = Arc::from(format!("_{i}"));
        env.insert(b.clone(), n.clone());
        binders.push(n);
    }
    let frame = a.frame.map_values(|m| rename_msg(m, &env));
    let mut canon = Canon { next: count };
    let body = canon_proc(&a.body, &env, &mut canon);
    ExtendedProcess { binders, frame, body }
}

fn canon_proc(p: &Process, env: &BTreeMap<Name, Name>, c: &mut Canon) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::New(x, q) => {
            let z = c.fresh();
            let mut inner = env.clone();
            inner.insert(x.clone(), z.clone());
            Process::New(z, Arc::new(canon_proc(q, &inner, c)))
        }
        Process::Par(q, r) => {
            let q2 = canon_proc(q, env, c);
            let r2 = canon_proc(r, env, c);
            Process::Par(Arc::new(q2), Arc::new(r2))
        }
        Process::Bang(q, k) => Process::Bang(Arc::new(canon_proc(q, env, c)), *k),
        Process::Guarded(g) => Process::Guarded(Arc::new(canon_guard(g, env, c))),
    }
}

fn canon_guard(g: &Guard, env: &BTreeMap<Name, Name>, c: &mut Canon) -> Guard {
    match g {
        Guard::In(ch, x, q) => {
            let z = c.fresh();
            let mut inner = env.clone();
            inner.insert(x.clone(), z.clone());
            Guard::In(rename_msg(ch, env), z, Arc::new(canon_proc(q, &inner, c)))
        }
        Guard::Out(ch, n, q) => Guard::Out(rename_msg(ch, env), rename_msg(n, env), Arc::new(canon_proc(q, env, c))),
        Guard::Match(m, n, h) => Guard::Match(rename_msg(m, env), rename_msg(n, env), Arc::new(canon_guard(h, env, c))),
        Guard::Mismatch(m, n, h) => {
            Guard::Mismatch(rename_msg(m, env), rename_msg(n, env), Arc::new(canon_guard(h, env, c)))
        }
        Guard::Sum(h, k) => {
            let h2 = canon_guard(h, env, c);
            let k2 = canon_guard(k, env, c);
            Guard::Sum(Arc::new(h2), Arc::new(k2))
        }
    }
}

/// Equality up to frame equality, alpha-renaming and permutation of the top
/// binders. Parallel composition is neither commutative nor associative here.
pub fn struct_congruent(a: &ExtendedProcess, b: &ExtendedProcess) -> bool {
    a.struct_key() == b.struct_key()
}

impl fmt::Display for ExtendedProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binders.is_empty() && self.frame.is_empty() {
            return write!(f, "{}", self.body);
        }
        if !self.binders.is_empty() {
            write!(f, "new ")?;
            for (i, b) in self.binders.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{b}")?;
            }
            write!(f, ".")?;
        }
        write!(f, "{{")?;
        for (i, (k, v)) in self.frame.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} := {v}")?;
        }
        write!(f, "}} | ")?;
        self.body.fmt_par(f)
    }
}

impl fmt::Debug for ExtendedProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// Action labels.

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionLabel {
    /// `M N`: input on channel recipe `M` of payload recipe `N`.
    FreeInput {
        chan: Message,
        payload: Message,
    },
    /// `M(alpha)`: output on channel recipe `M`, payload recorded under `alpha`.
    Output {
        chan: Message,
        alias: Alias,
    },
    Tau,
}

impl ActionLabel {
    pub fn fv(&self) -> BTreeSet<Name> {
        match self {
            ActionLabel::FreeInput { chan, payload } => {
                let mut s = chan.free_vars();
                payload.collect_vars(&mut s);
                s
            }
            ActionLabel::Output { chan, .. } => chan.free_vars(),
            ActionLabel::Tau => BTreeSet::new(),
        }
    }

    /// Free aliases; for an output only those of the channel, since the
    /// emitted alias is bound by the output.
    pub fn fa(&self) -> BTreeSet<Alias> {
        match self {
            ActionLabel::FreeInput { chan, payload } => {
                let mut s = chan.free_aliases();
                payload.collect_aliases(&mut s);
                s
            }
            ActionLabel::Output { chan, .. } => chan.free_aliases(),
            ActionLabel::Tau => BTreeSet::new(),
        }
    }

    pub fn output_alias(&self) -> Option<&Alias> {
        match self {
            ActionLabel::Output { alias, .. } => Some(alias),
            _ => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ActionLabel::Tau)
    }

    /// Homomorphic extension of an alias map; `tau` is fixed.
    pub fn apply_alias_map(&self, rho: &AliasMap) -> ActionLabel {
        match self {
            ActionLabel::FreeInput { chan, payload } => ActionLabel::FreeInput {
                chan: chan.rename_aliases(rho),
                payload: payload.rename_aliases(rho),
            },
            ActionLabel::Output { chan, alias } => ActionLabel::Output {
                chan: chan.rename_aliases(rho),
                alias: rho.image(alias),
            },
            ActionLabel::Tau => ActionLabel::Tau,
        }
    }
}

pub fn label_fv(pi: &ActionLabel) -> BTreeSet<Name> {
    pi.fv()
}

pub fn label_fa(pi: &ActionLabel) -> BTreeSet<Alias> {
    pi.fa()
}

pub fn apply_alias_map(pi: &ActionLabel, rho: &AliasMap) -> ActionLabel {
    pi.apply_alias_map(rho)
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::FreeInput { chan, payload } => write!(f, "{chan} {payload}"),
            ActionLabel::Output { chan, alias } => write!(f, "^{chan}({alias})"),
            ActionLabel::Tau => write!(f, "tau"),
        }
    }
}

impl fmt::Debug for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
