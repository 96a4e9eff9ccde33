use std::collections::VecDeque;

/// Per-arm counts and sums over the last `τ` plays.
///
/// Sums are updated incrementally and re-accumulated from the buffer every
/// `τ` pushes so floating-point drift stays bounded.
#[derive(Debug, Clone)]
pub struct WindowStats {
    tau: usize,
    buffer: VecDeque<(usize, f64, f64)>,
    count: Vec<usize>,
    reward: Vec<f64>,
    cost: Vec<f64>,
    since_resum: usize,
}

impl WindowStats {
    pub fn new(arms: usize, tau: usize) -> Self {
        assert!(tau >= 1, "window length must be positive");
        Self {
            tau,
            buffer: VecDeque::with_capacity(tau),
            count: vec![0; arms],
            reward: vec![0.0; arms],
            cost: vec![0.0; arms],
            since_resum: 0,
        }
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn num_arms(&self) -> usize {
        self.count.len()
    }

    pub fn push(&mut self, arm: usize, reward: f64, cost: f64) {
        if self.buffer.len() == self.tau {
            let (old, r, c) = self.buffer.pop_front().expect("full buffer");
            self.count[old] -= 1;
            if self.count[old] == 0 {
                self.reward[old] = 0.0;
                self.cost[old] = 0.0;
            } else {
                self.reward[old] -= r;
                self.cost[old] -= c;
            }
        }
        self.buffer.push_back((arm, reward, cost));
        self.count[arm] += 1;
        self.reward[arm] += reward;
        self.cost[arm] += cost;

        self.since_resum += 1;
        if self.since_resum >= self.tau {
            let (_, reward, cost) = self.recompute();
            self.reward = reward;
            self.cost = cost;
            self.since_resum = 0;
        }
    }

    /// `N(τ, i)`.
    pub fn count(&self, arm: usize) -> usize {
        self.count[arm]
    }

    pub fn reward_sum(&self, arm: usize) -> f64 {
        self.reward[arm]
    }

    pub fn cost_sum(&self, arm: usize) -> f64 {
        self.cost[arm]
    }

    /// `(r̄, c̄)` over the window, `None` if the arm is absent from it.
    pub fn means(&self, arm: usize) -> Option<(f64, f64)> {
        let n = self.count[arm];
        (n > 0).then(|| (self.reward[arm] / n as f64, self.cost[arm] / n as f64))
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Counts and sums accumulated from scratch over the buffer.
    pub fn recompute(&self) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
        let arms = self.num_arms();
        let mut count = vec![0; arms];
        let mut reward = vec![0.0; arms];
        let mut cost = vec![0.0; arms];
        for &(arm, r, c) in &self.buffer {
            count[arm] += 1;
            reward[arm] += r;
            cost[arm] += c;
        }
        (count, reward, cost)
    }
}

/// Full-history per-arm statistics used by the stationary baselines.
#[derive(Debug, Clone)]
pub struct HistoryStats {
    count: Vec<usize>,
    reward: Vec<f64>,
    cost: Vec<f64>,
    ratio: Vec<f64>,
}

impl HistoryStats {
    pub fn new(arms: usize) -> Self {
        Self {
            count: vec![0; arms],
            reward: vec![0.0; arms],
            cost: vec![0.0; arms],
            ratio: vec![0.0; arms],
        }
    }

    pub fn num_arms(&self) -> usize {
        self.count.len()
    }

    pub fn push(&mut self, arm: usize, reward: f64, cost: f64) {
        self.count[arm] += 1;
        self.reward[arm] += reward;
        self.cost[arm] += cost;
        self.ratio[arm] += reward / cost;
    }

    pub fn count(&self, arm: usize) -> usize {
        self.count[arm]
    }

    pub fn means(&self, arm: usize) -> Option<(f64, f64)> {
        let n = self.count[arm];
        (n > 0).then(|| (self.reward[arm] / n as f64, self.cost[arm] / n as f64))
    }

    /// Average of the per-pull ratios `r/c`.
    pub fn mean_ratio(&self, arm: usize) -> Option<f64> {
        let n = self.count[arm];
        (n > 0).then(|| self.ratio[arm] / n as f64)
    }
}
