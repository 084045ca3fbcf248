use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A source of bounded choices that records what it hands out.
///
/// Generators draw every decision from here. A recorded sequence can be
/// replayed, and an edited one replays to a structurally smaller case:
/// past the end of the sequence every choice is 0, and generators put their
/// simplest option at 0.
#[derive(Clone, Debug)]
pub struct Choices {
    rng: Option<ChaCha8Rng>,
    replay: Vec<u32>,
    pos: usize,
    recorded: Vec<u32>,
}

impl Choices {
    /// Fresh random choices for case `case` of run `seed`. Each case gets its
    /// own ChaCha stream, so cases are independent of evaluation order.
    pub fn random(seed: u64, case: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(case);
        Self {
            rng: Some(rng),
            replay: Vec::new(),
            pos: 0,
            recorded: Vec::new(),
        }
    }

    pub fn replay(seq: &[u32]) -> Self {
        Self {
            rng: None,
            replay: seq.to_vec(),
            pos: 0,
            recorded: Vec::new(),
        }
    }

    /// A value in `0..n`. `n` must be positive.
    pub fn choose(&mut self, n: usize) -> usize {
        assert!(n > 0, "choose from an empty range");
        let raw = match &mut self.rng {
            Some(rng) => rng.gen_range(0..n as u32),
            None => {
                let v = self.replay.get(self.pos).copied().unwrap_or(0);
                self.pos += 1;
                v
            }
        };
        let v = raw % n as u32;
        self.recorded.push(v);
        v as usize
    }

    /// True with probability about `num / den`.
    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        // Choice 0 must be the simpler branch, so "no" comes first.
        self.choose(den) >= den - num
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.choose(items.len())])
        }
    }

    pub fn recorded(&self) -> &[u32] {
        &self.recorded
    }

    pub fn into_recorded(self) -> Vec<u32> {
        self.recorded
    }
}

/// Candidate simplifications of a choice sequence, roughly smallest first.
pub fn shrink_candidates(seq: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let n = seq.len();
    let mut len = n / 2;
    while len > 0 {
        out.push(seq[..n - len].to_vec());
        len /= 2;
    }
    let mut chunk = n / 2;
    while chunk > 0 {
        let mut start = 0;
        while start + chunk <= n {
            let mut s = seq[..start].to_vec();
            s.extend_from_slice(&seq[start + chunk..]);
            out.push(s);
            start += chunk;
        }
        chunk /= 2;
    }
    for i in 0..n {
        if seq[i] > 0 {
            let mut s = seq.to_vec();
            s[i] = 0;
            out.push(s);
            if seq[i] > 1 {
                let mut s = seq.to_vec();
                s[i] -= 1;
                out.push(s);
            }
        }
    }
    out
}

/// Greedy shrink: repeatedly take the first candidate that still fails.
/// `fails` must be deterministic. Returns the smallest failing sequence found.
pub fn shrink(seq: Vec<u32>, budget: usize, mut fails: impl FnMut(&[u32]) -> bool) -> Vec<u32> {
    let mut best = seq;
    let mut tries = 0;
    'outer: loop {
        for cand in shrink_candidates(&best) {
            if tries >= budget {
                break 'outer;
            }
            tries += 1;
            if fails(&cand) {
                best = cand;
                continue 'outer;
            }
        }
        break;
    }
    best
}
