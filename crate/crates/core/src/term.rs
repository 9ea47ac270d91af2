//! Messages, substitutions and equality modulo a convergent rewrite system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TermError;

/// Identifier for variables and function symbols.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Default rewrite step budget for a single `normalize` call.
pub const DEFAULT_STEP_BUDGET: usize = 10_000;

/// A string over {0,1}. Used for alias prefixes and both parts of a location.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bits(pub Vec<u8>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn prepend(&self, bit: u8) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(bit);
        v.extend_from_slice(&self.0);
        Bits(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(0),
                '1' => Some(1),
                _ => None,
            })
            .collect::<Option<Vec<u8>>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{self}'")
    }
}

/// A located alias `s l_i`: a prefix string and an alias-variable index.
///
/// Printed as the prefix followed by `l`, with the index appended when it is
/// non-zero (`0l`, `01l`, `l2`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alias {
    pub prefix: Bits,
    pub stem: u32,
}

impl Alias {
    pub fn new(prefix: Bits, stem: u32) -> Self {
        Alias { prefix, stem }
    }

    /// Parses the printed form, e.g. `0l`, `l`, `10l3`.
    pub fn parse(s: &str) -> Option<Self> {
        let idx = s.find('l')?;
        let prefix = Bits::parse(&s[..idx])?;
        let rest = &s[idx + 1..];
        let stem = if rest.is_empty() { 0 } else { rest.parse().ok()? };
        Some(Alias { prefix, stem })
    }
}

impl fmt::Display for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}l", self.prefix)?;
        if self.stem > 0 {
            write!(f, "{}", self.stem)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: Name,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Self {
        Symbol {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Message {
    Var(Name),
    Alias(Alias),
    App(Symbol, Vec<Message>),
}

impl Message {
    pub fn var(n: &str) -> Self {
        Message::Var(Arc::from(n))
    }

    pub fn alias(prefix: &str, stem: u32) -> Self {
        Message::Alias(Alias::new(Bits::parse(prefix).expect("bit string"), stem))
    }

    pub fn app(f: &str, args: Vec<Message>) -> Self {
        Message::App(Symbol::new(f, args.len()), args)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Message::App(_, args) => 1 + args.iter().map(Message::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Function-application nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Message::App(_, args) => 1 + args.iter().map(Message::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Message::Var(x) => {
                out.insert(x.clone());
            }
            Message::Alias(_) => {}
            Message::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn free_aliases(&self) -> BTreeSet<Alias> {
        let mut out = BTreeSet::new();
        self.collect_aliases(&mut out);
        out
    }

    pub fn collect_aliases(&self, out: &mut BTreeSet<Alias>) {
        match self {
            Message::Var(_) => {}
            Message::Alias(a) => {
                out.insert(a.clone());
            }
            Message::App(_, args) => args.iter().for_each(|a| a.collect_aliases(out)),
        }
    }

    pub fn has_aliases(&self) -> bool {
        match self {
            Message::Var(_) => false,
            Message::Alias(_) => true,
            Message::App(_, args) => args.iter().any(Message::has_aliases),
        }
    }

    pub fn mentions_var(&self, x: &str) -> bool {
        match self {
            Message::Var(y) => &**y == x,
            Message::Alias(_) => false,
            Message::App(_, args) => args.iter().any(|a| a.mentions_var(x)),
        }
    }

    pub fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Message::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.symbols(out));
        }
    }

    /// Replaces every atom in the substitution's domain.
    pub fn apply(&self, s: &Substitution) -> Message {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Message::Var(x) => s
                .map
                .get(&Atom::Var(x.clone()))
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Message::Alias(a) => s
                .map
                .get(&Atom::Alias(a.clone()))
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Message::App(f, args) => Message::App(f.clone(), args.iter().map(|m| m.apply(s)).collect()),
        }
    }

    /// Replaces a single variable.
    pub fn replace_var(&self, x: &str, by: &Message) -> Message {
        match self {
            Message::Var(y) if &**y == x => by.clone(),
            Message::App(f, args) => Message::App(f.clone(), args.iter().map(|m| m.replace_var(x, by)).collect()),
            _ => self.clone(),
        }
    }

    pub fn rename_aliases(&self, rho: &AliasMap) -> Message {
        match self {
            Message::Alias(a) => Message::Alias(rho.image(a)),
            Message::App(f, args) => Message::App(f.clone(), args.iter().map(|m| m.rename_aliases(rho)).collect()),
            Message::Var(_) => self.clone(),
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Var(x) => write!(f, "{x}"),
            Message::Alias(a) => write!(f, "{a}"),
            Message::App(sym, args) => {
                write!(f, "{}(", sym.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Domain element of a substitution.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Atom {
    Var(Name),
    Alias(Alias),
}

impl Atom {
    pub fn to_message(&self) -> Message {
        match self {
            Atom::Var(x) => Message::Var(x.clone()),
            Atom::Alias(a) => Message::Alias(a.clone()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(x) => write!(f, "{x}"),
            Atom::Alias(a) => write!(f, "{a}"),
        }
    }
}

/// A finite substitution, applied in suffix form. Identity entries are never
/// stored, so `dom` is exactly the set of keys.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<Atom, Message>,
}

impl Substitution {
    pub fn id() -> Self {
        Substitution::default()
    }

    pub fn singleton(a: Atom, m: Message) -> Self {
        let mut s = Substitution::id();
        s.insert(a, m);
        s
    }

    pub fn alias(a: Alias, m: Message) -> Self {
        Substitution::singleton(Atom::Alias(a), m)
    }

    pub fn var(x: &str, m: Message) -> Self {
        Substitution::singleton(Atom::Var(Arc::from(x)), m)
    }

    pub fn insert(&mut self, a: Atom, m: Message) {
        if a.to_message() == m {
            self.map.remove(&a);
        } else {
            self.map.insert(a, m);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, a: &Atom) -> Option<&Message> {
        self.map.get(a)
    }

    pub fn get_alias(&self, a: &Alias) -> Option<&Message> {
        self.map.get(&Atom::Alias(a.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &Message)> {
        self.map.iter()
    }

    pub fn dom(&self) -> BTreeSet<Atom> {
        self.map.keys().cloned().collect()
    }

    /// Aliases in the domain (all of them, for an active substitution).
    pub fn alias_dom(&self) -> BTreeSet<Alias> {
        self.map
            .keys()
            .filter_map(|k| match k {
                Atom::Alias(a) => Some(a.clone()),
                Atom::Var(_) => None,
            })
            .collect()
    }

    pub fn ran(&self) -> Vec<&Message> {
        self.map.values().collect()
    }

    /// `self ∘ other`: apply `self`, then `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::id();
        for (k, v) in &self.map {
            out.insert(k.clone(), v.apply(other));
        }
        for (k, v) in &other.map {
            if !self.map.contains_key(k) {
                out.insert(k.clone(), v.clone());
            }
        }
        out
    }

    /// Keeps only the entries whose key lies in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Atom>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(&Message) -> Message) -> Substitution {
        let mut out = Substitution::id();
        for (k, v) in &self.map {
            out.insert(k.clone(), f(v));
        }
        out
    }

    pub fn try_map_values(
        &self,
        mut f: impl FnMut(&Message) -> Result<Message, TermError>,
    ) -> Result<Substitution, TermError> {
        let mut out = Substitution::id();
        for (k, v) in &self.map {
            out.insert(k.clone(), f(v)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return write!(f, "id");
        }
        write!(f, "{{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Injective finite map between aliases. Aliases outside the domain are fixed.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AliasMap {
    map: BTreeMap<Alias, Alias>,
}

impl AliasMap {
    pub fn id() -> Self {
        AliasMap::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Alias, Alias)>) -> Result<Self, TermError> {
        let mut m = AliasMap::id();
        for (a, b) in pairs {
            m.extend(a, b)?;
        }
        Ok(m)
    }

    /// Adds `a -> b`, rejecting anything that would break injectivity or
    /// rebind `a`.
    pub fn extend(&mut self, a: Alias, b: Alias) -> Result<(), TermError> {
        if let Some(old) = self.map.get(&a) {
            if *old != b {
                return Err(TermError::AliasRebound(a.to_string()));
            }
            return Ok(());
        }
        if self.map.values().any(|v| *v == b) {
            return Err(TermError::NotInjective(b.to_string()));
        }
        self.map.insert(a, b);
        Ok(())
    }

    pub fn with(&self, a: Alias, b: Alias) -> Result<Self, TermError> {
        let mut m = self.clone();
        m.extend(a, b)?;
        Ok(m)
    }

    pub fn image(&self, a: &Alias) -> Alias {
        self.map.get(a).cloned().unwrap_or_else(|| a.clone())
    }

    pub fn get(&self, a: &Alias) -> Option<&Alias> {
        self.map.get(a)
    }

    pub fn inverse(&self) -> AliasMap {
        AliasMap {
            map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let ran: BTreeSet<_> = self.map.values().collect();
        ran.len() == self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Alias, &Alias)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn restrict(&self, keep: &BTreeSet<Alias>) -> AliasMap {
        AliasMap {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Parses `0l->1l,1l->0l`.
    pub fn parse(s: &str) -> Result<Self, TermError> {
        let mut m = AliasMap::id();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (l, r) = part
                .split_once("->")
                .ok_or_else(|| TermError::BadAliasMap(part.to_string()))?;
            let a = Alias::parse(l.trim()).ok_or_else(|| TermError::BadAliasMap(l.to_string()))?;
            let b = Alias::parse(r.trim()).ok_or_else(|| TermError::BadAliasMap(r.to_string()))?;
            m.extend(a, b)?;
        }
        Ok(m)
    }
}

impl fmt::Display for AliasMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} -> {b}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for AliasMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RewriteRule {
    pub lhs: Message,
    pub rhs: Message,
}

impl RewriteRule {
    pub fn new(lhs: Message, rhs: Message) -> Result<Self, TermError> {
        if lhs.has_aliases() || rhs.has_aliases() {
            return Err(TermError::AliasInRule(format!("{lhs} -> {rhs}")));
        }
        if matches!(lhs, Message::Var(_)) {
            return Err(TermError::VariableLhs(format!("{lhs} -> {rhs}")));
        }
        let lv = lhs.free_vars();
        if !rhs.free_vars().is_subset(&lv) {
            return Err(TermError::UnboundRhsVar(format!("{lhs} -> {rhs}")));
        }
        Ok(RewriteRule { lhs, rhs })
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

fn match_pattern(pat: &Message, t: &Message, env: &mut BTreeMap<Name, Message>) -> bool {
    match pat {
        Message::Var(x) => match env.get(x) {
            Some(bound) => bound == t,
            None => {
                env.insert(x.clone(), t.clone());
                true
            }
        },
        Message::Alias(a) => matches!(t, Message::Alias(b) if a == b),
        Message::App(f, pargs) => match t {
            Message::App(g, targs) if f == g => pargs.iter().zip(targs).all(|(p, a)| match_pattern(p, a, env)),
            _ => false,
        },
    }
}

fn instantiate(t: &Message, env: &BTreeMap<Name, Message>) -> Message {
    match t {
        Message::Var(x) => env.get(x).cloned().unwrap_or_else(|| t.clone()),
        Message::Alias(_) => t.clone(),
        Message::App(f, args) => Message::App(f.clone(), args.iter().map(|a| instantiate(a, env)).collect()),
    }
}

/// An equational theory presented as a convergent rewrite system together
/// with the signature it ranges over.
#[derive(Clone, Default, Debug)]
pub struct Theory {
    pub rules: Vec<RewriteRule>,
    pub signature: BTreeSet<Symbol>,
    pub step_budget: usize,
}

impl Theory {
    pub fn empty() -> Self {
        Theory {
            rules: Vec::new(),
            signature: BTreeSet::new(),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn new(rules: Vec<RewriteRule>) -> Self {
        let mut signature = BTreeSet::new();
        for r in &rules {
            r.lhs.symbols(&mut signature);
            r.rhs.symbols(&mut signature);
        }
        Theory {
            rules,
            signature,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    /// Symmetric encryption and pairing, plus an uninterpreted hash.
    pub fn dolev_yao() -> Self {
        let x = || Message::var("x");
        let y = || Message::var("y");
        let rules = vec![
            RewriteRule::new(Message::app("dec", vec![Message::app("enc", vec![x(), y()]), y()]), x()),
            RewriteRule::new(Message::app("fst", vec![Message::app("pair", vec![x(), y()])]), x()),
            RewriteRule::new(Message::app("snd", vec![Message::app("pair", vec![x(), y()])]), y()),
        ]
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .expect("preset rules are well formed");
        let mut t = Theory::new(rules);
        t.signature.insert(Symbol::new("h", 1));
        t
    }

    pub fn add_symbols(&mut self, syms: impl IntoIterator<Item = Symbol>) {
        self.signature.extend(syms);
    }

    /// Innermost normalization.
    pub fn normalize(&self, m: &Message) -> Result<Message, TermError> {
        if self.rules.is_empty() {
            return Ok(m.clone());
        }
        let mut steps = 0usize;
        self.norm(m, &mut steps)
    }

    fn norm(&self, m: &Message, steps: &mut usize) -> Result<Message, TermError> {
        match m {
            Message::App(f, args) => {
                let nargs = args
                    .iter()
                    .map(|a| self.norm(a, steps))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = Message::App(f.clone(), nargs);
                self.rewrite_root(t, steps)
            }
            _ => Ok(m.clone()),
        }
    }

    /// `t` has normalized arguments; rewrite at the root until stuck.
    fn rewrite_root(&self, t: Message, steps: &mut usize) -> Result<Message, TermError> {
        for r in &self.rules {
            let mut env = BTreeMap::new();
            if match_pattern(&r.lhs, &t, &mut env) {
                *steps += 1;
                if *steps > self.step_budget {
                    return Err(TermError::StepBudget(self.step_budget));
                }
                let rhs = instantiate(&r.rhs, &env);
                return self.norm_nf_args(rhs, steps);
            }
        }
        Ok(t)
    }

    // rhs instances are built from normal forms, but may contain new redexes
    fn norm_nf_args(&self, m: Message, steps: &mut usize) -> Result<Message, TermError> {
        self.norm(&m, steps)
    }

    /// Normalization of `f(args)` where every argument is already normal.
    pub fn apply_normal(&self, f: &Symbol, args: Vec<Message>) -> Result<Message, TermError> {
        if self.rules.is_empty() {
            return Ok(Message::App(f.clone(), args));
        }
        let mut steps = 0;
        self.rewrite_root(Message::App(f.clone(), args), &mut steps)
    }

    pub fn eq_mod(&self, m: &Message, n: &Message) -> Result<bool, TermError> {
        if m == n {
            return Ok(true);
        }
        Ok(self.normalize(m)? == self.normalize(n)?)
    }

    /// Parses the line-oriented theory format: `lhs -> rhs`, `#` comments.
    pub fn parse(text: &str) -> Result<Self, TermError> {
        let mut rules = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (l, r) = line.split_once("->").ok_or_else(|| TermError::TheorySyntax {
                line: lineno + 1,
                msg: "expected `lhs -> rhs`".into(),
            })?;
            let lhs = crate::parse::parse_message(l).map_err(|e| TermError::TheorySyntax {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            let rhs = crate::parse::parse_message(r).map_err(|e| TermError::TheorySyntax {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            rules.push(RewriteRule::new(lhs, rhs)?);
        }
        let theory = Theory::new(rules);
        let mut arities: BTreeMap<Name, usize> = BTreeMap::new();
        for s in &theory.signature {
            if let Some(old) = arities.insert(s.name.clone(), s.arity) {
                if old != s.arity {
                    return Err(TermError::Arity(s.name.to_string()));
                }
            }
        }
        Ok(theory)
    }
}

/// Normal form of `m` under `rules`.
pub fn normalize(m: &Message, rules: &[RewriteRule]) -> Result<Message, TermError> {
    Theory::new(rules.to_vec()).normalize(m)
}

pub fn eq_mod_e(m: &Message, n: &Message, rules: &[RewriteRule]) -> Result<bool, TermError> {
    Theory::new(rules.to_vec()).eq_mod(m, n)
}
