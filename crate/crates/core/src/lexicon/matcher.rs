use std::collections::HashMap;

use super::KeywordBank;
use crate::corpus::for_each_token;
use crate::error::{Error, Result};

const ROOT: u32 = 0;

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<Box<str>, u32>,
    /// Banks having a phrase that ends at this node.
    banks: u64,
}

/// One-pass matcher for all banks of a measurement.
///
/// Phrases of every bank go into a single token trie. Scanning keeps the set
/// of trie states reachable from recent start positions, so each token costs
/// at most one hash lookup per live partial match (bounded by the longest
/// phrase length). The scan stops as soon as every bank has matched.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    nodes: Vec<Node>,
    all: u64,
    max_depth: usize,
}

impl KeywordMatcher {
    pub fn new(banks: &[KeywordBank]) -> Result<Self> {
        if banks.is_empty() || banks.len() > 64 {
            return Err(Error::InvalidInput(format!(
                "matcher supports 1 to 64 banks, got {}",
                banks.len()
            )));
        }
        let mut nodes = vec![Node::default()];
        let mut max_depth = 0;
        for (bit, bank) in banks.iter().enumerate() {
            for phrase in bank.phrases() {
                max_depth = max_depth.max(phrase.len());
                let mut at = ROOT;
                for tok in phrase {
                    let next = nodes.len() as u32;
                    let child = *nodes[at as usize]
                        .children
                        .entry(tok.as_str().into())
                        .or_insert(next);
                    if child == next {
                        nodes.push(Node::default());
                    }
                    at = child;
                }
                nodes[at as usize].banks |= 1 << bit;
            }
        }
        let all = if banks.len() == 64 {
            u64::MAX
        } else {
            (1u64 << banks.len()) - 1
        };
        Ok(Self {
            nodes,
            all,
            max_depth,
        })
    }

    /// Bitmask of banks (in construction order) matched by `tokens`.
    pub fn matched_banks<S: AsRef<str>>(&self, tokens: &[S]) -> u64 {
        let mut scan = Scan::new(self);
        for t in tokens {
            if scan.push(t.as_ref()) {
                break;
            }
        }
        scan.found
    }

    /// Bitmask of matched banks, tokenizing `text` on the fly.
    pub fn matched_banks_in_text(&self, text: &str) -> u64 {
        let mut scan = Scan::new(self);
        // for_each_token has no early exit; skip work once complete.
        for_each_token(text, |t| {
            if scan.found != self.all {
                scan.push(t);
            }
        });
        scan.found
    }

    /// True iff every bank matches.
    pub fn classify<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        self.matched_banks(tokens) == self.all
    }

    pub fn classify_text(&self, text: &str) -> bool {
        self.matched_banks_in_text(text) == self.all
    }
}

struct Scan<'m> {
    m: &'m KeywordMatcher,
    live: Vec<u32>,
    next: Vec<u32>,
    found: u64,
}

impl<'m> Scan<'m> {
    fn new(m: &'m KeywordMatcher) -> Self {
        Self {
            m,
            live: Vec::with_capacity(m.max_depth),
            next: Vec::with_capacity(m.max_depth),
            found: 0,
        }
    }

    /// Feed one token; returns true once all banks are found.
    fn push(&mut self, tok: &str) -> bool {
        self.next.clear();
        for &state in self.live.iter().chain(std::iter::once(&ROOT)) {
            let node = &self.m.nodes[state as usize];
            if let Some(&child) = node.children.get(tok) {
                let c = &self.m.nodes[child as usize];
                self.found |= c.banks;
                if !c.children.is_empty() {
                    self.next.push(child);
                }
            }
        }
        std::mem::swap(&mut self.live, &mut self.next);
        self.found == self.m.all
    }
}
