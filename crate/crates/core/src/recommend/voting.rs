//! Weighted ranked-choice elections where the voters are QoS metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ProviderId, QosMetric};
use crate::error::{Error, Result};

/// Weighted totals closer than this count as tied.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ballot {
    pub voter: QosMetric,
    pub weight: f64,
    /// Best first.
    pub ranking: Vec<ProviderId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionResult {
    pub winner: ProviderId,
    /// Final score per candidate in ascending id order. For instant runoff
    /// these are the last round's tallies (eliminated candidates at 0).
    pub tallies: Vec<(ProviderId, f64)>,
    /// Instant runoff elimination order.
    pub eliminated: Vec<ProviderId>,
    /// Condorcet had no unique pairwise leader.
    pub paradox: bool,
    /// Elementary reads and comparisons performed.
    pub operations: u64,
}

/// Validated ballots over a common candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    ballots: Vec<Ballot>,
    /// Ascending ids.
    candidates: Vec<ProviderId>,
    /// `ranks[b][c]`: position of candidate index `c` on ballot `b`.
    ranks: Vec<Vec<usize>>,
    /// `order[b][r]`: candidate index at position `r` on ballot `b`.
    order: Vec<Vec<usize>>,
}

impl Election {
    pub fn new(ballots: Vec<Ballot>) -> Result<Self> {
        let first = ballots.first().ok_or_else(|| Error::InvalidInput("election needs ballots".into()))?;
        let mut candidates = first.ranking.clone();
        candidates.sort_unstable();
        if candidates.is_empty() || candidates.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("ballot ranking must be non-empty without repeats".into()));
        }
        let index = |id: ProviderId| candidates.binary_search(&id).ok();
        let mut ranks = Vec::with_capacity(ballots.len());
        let mut order = Vec::with_capacity(ballots.len());
        for b in &ballots {
            if !(b.weight.is_finite() && b.weight >= 0.0) {
                return Err(Error::InvalidInput("ballot weight must be finite and non-negative".into()));
            }
            if b.ranking.len() != candidates.len() {
                return Err(Error::InvalidInput("ballots rank different candidate sets".into()));
            }
            let mut r = vec![usize::MAX; candidates.len()];
            let mut o = Vec::with_capacity(candidates.len());
            for (pos, &id) in b.ranking.iter().enumerate() {
                let c = index(id).ok_or_else(|| Error::InvalidInput("ballots rank different candidate sets".into()))?;
                if r[c] != usize::MAX {
                    return Err(Error::InvalidInput("ballot ranks a candidate twice".into()));
                }
                r[c] = pos;
                o.push(c);
            }
            ranks.push(r);
            order.push(o);
        }
        Ok(Self { ballots, candidates, ranks, order })
    }

    pub fn candidates(&self) -> &[ProviderId] {
        &self.candidates
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    fn total_weight(&self) -> f64 {
        self.ballots.iter().map(|b| b.weight).sum()
    }

    /// Highest score; ties within [`TIE_EPSILON`] go to the lower id.
    fn argmax(&self, scores: &[f64]) -> usize {
        let mut best = 0;
        for c in 1..scores.len() {
            if scores[c] > scores[best] + TIE_EPSILON {
                best = c;
            }
        }
        best
    }

    fn tallies(&self, scores: &[f64]) -> Vec<(ProviderId, f64)> {
        self.candidates.iter().copied().zip(scores.iter().copied()).collect()
    }

    /// Each ballot's weight goes to its first choice.
    pub fn plurality(&self) -> ElectionResult {
        let u = self.candidates.len();
        let mut scores = vec![0.0; u];
        for (b, o) in self.ballots.iter().zip(&self.order) {
            scores[o[0]] += b.weight;
        }
        ElectionResult {
            winner: self.candidates[self.argmax(&scores)],
            tallies: self.tallies(&scores),
            eliminated: Vec::new(),
            paradox: false,
            operations: (self.ballots.len() + u - 1) as u64,
        }
    }

    /// Rank `r` (1-based) earns `u - r + 1` points times the ballot weight.
    pub fn borda(&self) -> ElectionResult {
        let u = self.candidates.len();
        let mut scores = vec![0.0; u];
        for (b, o) in self.ballots.iter().zip(&self.order) {
            for (pos, &c) in o.iter().enumerate() {
                scores[c] += (u - pos) as f64 * b.weight;
            }
        }
        ElectionResult {
            winner: self.candidates[self.argmax(&scores)],
            tallies: self.tallies(&scores),
            eliminated: Vec::new(),
            paradox: false,
            operations: (self.ballots.len() * u + u - 1) as u64,
        }
    }

    /// Repeated weighted first-choice counts. A candidate wins with more than
    /// half the total weight (or as the last one standing); otherwise the
    /// weakest is eliminated, drawing among exact ties with `seed`.
    pub fn instant_runoff(&self, seed: u64) -> ElectionResult {
        let u = self.candidates.len();
        let half = self.total_weight() / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut active = vec![true; u];
        let mut pointer = vec![0usize; self.ballots.len()];
        let mut eliminated = Vec::new();
        let mut operations = 0u64;
        loop {
            let mut scores = vec![0.0; u];
            for (bi, b) in self.ballots.iter().enumerate() {
                operations += 1;
                while !active[self.order[bi][pointer[bi]]] {
                    pointer[bi] += 1;
                    operations += 1;
                }
                scores[self.order[bi][pointer[bi]]] += b.weight;
            }
            let alive: Vec<usize> = (0..u).filter(|&c| active[c]).collect();
            operations += alive.len() as u64 - 1;
            let leader = alive.iter().copied().fold(alive[0], |best, c| {
                if scores[c] > scores[best] + TIE_EPSILON {
                    c
                } else {
                    best
                }
            });
            if alive.len() == 1 || scores[leader] > half + TIE_EPSILON {
                return ElectionResult {
                    winner: self.candidates[leader],
                    tallies: self.tallies(&scores),
                    eliminated,
                    paradox: false,
                    operations,
                };
            }
            let low = alive.iter().map(|&c| scores[c]).fold(f64::INFINITY, f64::min);
            let weakest: Vec<usize> = alive.iter().copied().filter(|&c| scores[c] <= low + TIE_EPSILON).collect();
            let out = if weakest.len() == 1 { weakest[0] } else { weakest[rng.gen_range(0..weakest.len())] };
            active[out] = false;
            eliminated.push(self.candidates[out]);
        }
    }

    /// `support[a][b]`: total weight of ballots ranking candidate index `a`
    /// above `b`.
    pub fn pairwise_support(&self) -> Vec<Vec<f64>> {
        let u = self.candidates.len();
        let mut support = vec![vec![0.0; u]; u];
        for (b, r) in self.ballots.iter().zip(&self.ranks) {
            for a in 0..u {
                for c in 0..u {
                    if r[a] < r[c] {
                        support[a][c] += b.weight;
                    }
                }
            }
        }
        support
    }

    /// Head-to-head contests between every pair; the candidate with the most
    /// pairwise wins takes the election. Without a unique leader the result is
    /// flagged as a paradox and drawn among the leaders with `seed`.
    pub fn condorcet(&self, seed: u64) -> ElectionResult {
        let u = self.candidates.len();
        let support = self.pairwise_support();
        let mut wins = vec![0.0; u];
        for a in 0..u {
            for c in a + 1..u {
                if support[a][c] > support[c][a] + TIE_EPSILON {
                    wins[a] += 1.0;
                } else if support[c][a] > support[a][c] + TIE_EPSILON {
                    wins[c] += 1.0;
                }
            }
        }
        let top = wins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let leaders: Vec<usize> = (0..u).filter(|&c| wins[c] == top).collect();
        let paradox = leaders.len() > 1;
        let winner = if paradox {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            leaders[rng.gen_range(0..leaders.len())]
        } else {
            leaders[0]
        };
        let pairs = (u * (u - 1) / 2) as u64;
        ElectionResult {
            winner: self.candidates[winner],
            tallies: self.tallies(&wins),
            eliminated: Vec::new(),
            paradox,
            operations: 2 * self.ballots.len() as u64 * pairs + pairs + (u as u64 - 1),
        }
    }
}
