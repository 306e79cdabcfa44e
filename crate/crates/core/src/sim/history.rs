use crate::model::State;

#[derive(Clone, Copy, Default)]
struct Node {
    x: State,
    f: State,
}

/// Ring buffer of past grid states and derivatives with cubic Hermite
/// interpolation between nodes. Positions are measured in steps; anything at
/// or before 0 reads the constant initial history.
pub(crate) struct History {
    initial: State,
    step: f64,
    nodes: Vec<Node>,
}

impl History {
    pub fn new(initial: State, step: f64, max_lag_steps: f64) -> Self {
        let cap = max_lag_steps.ceil() as usize + 3;
        History {
            initial,
            step,
            nodes: vec![Node::default(); cap],
        }
    }

    fn slot(&self, n: usize) -> usize {
        n % self.nodes.len()
    }

    pub fn push(&mut self, n: usize, x: State) {
        let i = self.slot(n);
        self.nodes[i] = Node { x, f: [0.0; 4] };
    }

    pub fn set_derivative(&mut self, n: usize, f: State) {
        let i = self.slot(n);
        self.nodes[i].f = f;
    }

    /// Value of `channel` at fractional grid position `pos`, which must not
    /// exceed the newest stored node.
    pub fn value(&self, pos: f64, channel: usize) -> f64 {
        if pos <= 0.0 {
            return self.initial[channel];
        }
        let mut k = pos.floor();
        let mut s = pos - k;
        if s > 1.0 - 1e-9 {
            k += 1.0;
            s = 0.0;
        }
        let k = k as usize;
        let a = &self.nodes[self.slot(k)];
        if s < 1e-9 {
            return a.x[channel];
        }
        let b = &self.nodes[self.slot(k + 1)];
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * a.x[channel]
            + h10 * self.step * a.f[channel]
            + h01 * b.x[channel]
            + h11 * self.step * b.f[channel]
    }
}
