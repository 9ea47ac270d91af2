//! Non-interleaving operational semantics for the applied pi-calculus and a
//! game-based checker for the spectrum of behavioural relations built on it:
//! interleaving presimilarity and (bi)similarity, ST- and HP-(bi)similarity,
//! their failure-sensitive variants, and located (bi)similarity.

pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod independence;
pub mod knowledge;
pub mod lts;
pub mod parse;
pub mod syntax;
pub mod term;

pub use error::{Error, ParseError, TermError};
pub use term::{Alias, AliasMap, Bits, Message, Name, RewriteRule, Substitution, Symbol, Theory};
