use std::collections::HashMap;

use super::{bump_value, pow_value, wrap_value, Func, Kind, ScalarField, Var};

#[derive(Clone, Debug)]
enum Instr {
    Const(f64),
    X,
    Y,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, f64),
    Unary(Func, usize),
    Bump(usize, i32),
    Wrap(usize, f64),
}

/// A linearized evaluation program for several fields at once.
///
/// Shared subtrees (including those shared between a field and its
/// derivatives) are evaluated exactly once per call.
#[derive(Clone, Debug)]
pub struct Tape {
    instrs: Vec<Instr>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn new(roots: &[ScalarField]) -> Self {
        let mut tape = Tape {
            instrs: Vec::new(),
            outputs: Vec::with_capacity(roots.len()),
        };
        let mut slots = HashMap::new();
        for r in roots {
            let slot = tape.emit(r, &mut slots);
            tape.outputs.push(slot);
        }
        tape
    }

    fn emit(&mut self, f: &ScalarField, slots: &mut HashMap<usize, usize>) -> usize {
        if let Some(&s) = slots.get(&f.id()) {
            return s;
        }
        let instr = match &f.node().kind {
            Kind::Const(c) => Instr::Const(*c),
            Kind::Var(Var::X) => Instr::X,
            Kind::Var(Var::Y) => Instr::Y,
            Kind::Add(a, b) => Instr::Add(self.emit(a, slots), self.emit(b, slots)),
            Kind::Sub(a, b) => Instr::Sub(self.emit(a, slots), self.emit(b, slots)),
            Kind::Mul(a, b) => Instr::Mul(self.emit(a, slots), self.emit(b, slots)),
            Kind::Div(a, b) => Instr::Div(self.emit(a, slots), self.emit(b, slots)),
            Kind::Neg(a) => Instr::Neg(self.emit(a, slots)),
            Kind::Pow(a, p) => Instr::Pow(self.emit(a, slots), *p),
            Kind::Unary(func, a) => Instr::Unary(*func, self.emit(a, slots)),
            Kind::Bump(a, k) => Instr::Bump(self.emit(a, slots), *k),
            Kind::Wrap(a, p) => Instr::Wrap(self.emit(a, slots), *p),
        };
        self.instrs.push(instr);
        let slot = self.instrs.len() - 1;
        slots.insert(f.id(), slot);
        slot
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every root at `(x, y)` into `out` using `scratch` as the
    /// register file.
    pub fn eval_with(&self, x: f64, y: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        scratch.reserve(self.instrs.len());
        for ins in &self.instrs {
            let v = match *ins {
                Instr::Const(c) => c,
                Instr::X => x,
                Instr::Y => y,
                Instr::Add(a, b) => scratch[a] + scratch[b],
                Instr::Sub(a, b) => scratch[a] - scratch[b],
                Instr::Mul(a, b) => scratch[a] * scratch[b],
                Instr::Div(a, b) => scratch[a] / scratch[b],
                Instr::Neg(a) => -scratch[a],
                Instr::Pow(a, p) => pow_value(scratch[a], p),
                Instr::Unary(f, a) => f.apply(scratch[a]),
                Instr::Bump(a, k) => bump_value(scratch[a], k),
                Instr::Wrap(a, p) => wrap_value(scratch[a], p),
            };
            scratch.push(v);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot];
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        let mut scratch = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_with(x, y, &mut scratch, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tape_matches_tree_evaluation() {
        let x = ScalarField::x();
        let y = ScalarField::y();
        let f = (&x * &y).sin() / (x.square() + 1.0) + y.smooth_step();
        let roots = [f.clone(), f.dx(), f.dy(), f.dx().dy()];
        let tape = Tape::new(&roots);
        for p in [[0.2, 0.4], [-1.0, 0.9], [3.0, -2.0]] {
            let vals = tape.eval(p[0], p[1]);
            for (r, v) in roots.iter().zip(&vals) {
                assert_eq!(r.value(p[0], p[1]), *v);
            }
        }
    }

    #[test]
    fn shared_nodes_are_emitted_once() {
        let x = ScalarField::x();
        let s = x.sin();
        let f = &s * &s + &s;
        let tape = Tape::new(&[f]);
        // x, sin, mul, add
        assert_eq!(tape.len(), 4);
    }
}
