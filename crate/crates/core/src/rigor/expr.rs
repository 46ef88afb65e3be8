//! Hash-consed expression DAG, symbolic differentiation, and compiled tapes
//! evaluated over any [`Scalar`]: `f64`, [`Interval`] or the second-order
//! [`Jet2`].

use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use super::interval::Interval;
use crate::error::RigorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    /// Enclosure of a constant; `lo == hi` when it is exactly representable.
    Const(Interval),
    Var(u8),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Neg(NodeId),
    Exp(NodeId),
    Ln(NodeId),
    Tanh(NodeId),
    Sqrt(NodeId),
    Sech2(NodeId),
    /// `x^c` for a constant exponent and positive base.
    Pow(NodeId, Interval),
    PowI(NodeId, i32),
    /// `(Q(a) − Q(b))/(a² − b²)` with `Q(x) = √2x/sinh(√2x)`.
    QDivDiff(NodeId, NodeId),
}

type Key = (u8, u64, u64, u64);

impl Node {
    fn key(&self) -> Key {
        let id = |n: &NodeId| n.0 as u64;
        match self {
            Node::Const(c) => (0, c.lo.to_bits(), c.hi.to_bits(), 0),
            Node::Var(k) => (1, *k as u64, 0, 0),
            Node::Add(a, b) => (2, id(a), id(b), 0),
            Node::Sub(a, b) => (3, id(a), id(b), 0),
            Node::Mul(a, b) => (4, id(a), id(b), 0),
            Node::Div(a, b) => (5, id(a), id(b), 0),
            Node::Neg(a) => (6, id(a), 0, 0),
            Node::Exp(a) => (7, id(a), 0, 0),
            Node::Ln(a) => (8, id(a), 0, 0),
            Node::Tanh(a) => (9, id(a), 0, 0),
            Node::Sqrt(a) => (10, id(a), 0, 0),
            Node::Sech2(a) => (11, id(a), 0, 0),
            Node::Pow(a, c) => (12, id(a), c.lo.to_bits(), c.hi.to_bits()),
            Node::PowI(a, k) => (13, id(a), *k as i64 as u64, 0),
            Node::QDivDiff(a, b) => (14, id(a), id(b), 0),
        }
    }

    fn children(&self) -> [Option<NodeId>; 2] {
        match *self {
            Node::Const(_) | Node::Var(_) => [None, None],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::QDivDiff(a, b) => {
                [Some(a), Some(b)]
            }
            Node::Neg(a)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Tanh(a)
            | Node::Sqrt(a)
            | Node::Sech2(a)
            | Node::Pow(a, _)
            | Node::PowI(a, _) => [Some(a), None],
        }
    }

    fn remap(&self, f: impl Fn(NodeId) -> NodeId) -> Node {
        match *self {
            Node::Const(c) => Node::Const(c),
            Node::Var(k) => Node::Var(k),
            Node::Add(a, b) => Node::Add(f(a), f(b)),
            Node::Sub(a, b) => Node::Sub(f(a), f(b)),
            Node::Mul(a, b) => Node::Mul(f(a), f(b)),
            Node::Div(a, b) => Node::Div(f(a), f(b)),
            Node::Neg(a) => Node::Neg(f(a)),
            Node::Exp(a) => Node::Exp(f(a)),
            Node::Ln(a) => Node::Ln(f(a)),
            Node::Tanh(a) => Node::Tanh(f(a)),
            Node::Sqrt(a) => Node::Sqrt(f(a)),
            Node::Sech2(a) => Node::Sech2(f(a)),
            Node::Pow(a, c) => Node::Pow(f(a), c),
            Node::PowI(a, k) => Node::PowI(f(a), k),
            Node::QDivDiff(a, b) => Node::QDivDiff(f(a), f(b)),
        }
    }
}

/// Append-only node store. Children always precede parents, so node ids are a
/// topological order.
#[derive(Default)]
pub struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Key, NodeId>,
    diff_memo: HashMap<(NodeId, u8), NodeId>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.0 as usize]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        let key = node.key();
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.index.insert(key, id);
        id
    }

    fn as_const(&self, id: NodeId) -> Option<Interval> {
        match self.node(id) {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_exact(&self, id: NodeId, v: f64) -> bool {
        self.as_const(id).is_some_and(|c| c.lo == v && c.hi == v)
    }

    pub fn constant(&mut self, v: f64) -> NodeId {
        self.intern(Node::Const(Interval::point(v)))
    }

    /// A decimal literal such as 4.2 that has no exact binary representation.
    pub fn decimal(&mut self, v: f64) -> NodeId {
        self.intern(Node::Const(Interval::around(v)))
    }

    pub fn interval(&mut self, c: Interval) -> NodeId {
        self.intern(Node::Const(c))
    }

    pub fn var(&mut self, k: u8) -> NodeId {
        self.intern(Node::Var(k))
    }

    /// Folds two constants through interval arithmetic; falls back to the
    /// unfolded node when the fold trips a guard.
    fn fold2(
        &mut self,
        a: NodeId,
        b: NodeId,
        op: fn(&Interval, &Interval) -> Result<Interval, RigorError>,
        node: Node,
    ) -> NodeId {
        if let (Some(x), Some(y)) = (self.as_const(a), self.as_const(b)) {
            if let Ok(c) = op(&x, &y) {
                return self.interval(c);
            }
        }
        self.intern(node)
    }

    fn fold1(&mut self, a: NodeId, op: fn(&Interval) -> Result<Interval, RigorError>, node: Node) -> NodeId {
        if let Some(x) = self.as_const(a) {
            if let Ok(c) = op(&x) {
                return self.interval(c);
            }
        }
        self.intern(node)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.is_exact(a, 0.0) {
            return b;
        }
        if self.is_exact(b, 0.0) {
            return a;
        }
        if let Node::Neg(nb) = self.node(b) {
            return self.sub(a, nb);
        }
        // canonical operand order so that a+b and b+a share a node
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.fold2(a, b, Interval::add, Node::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return self.constant(0.0);
        }
        if self.is_exact(b, 0.0) {
            return a;
        }
        if self.is_exact(a, 0.0) {
            return self.neg(b);
        }
        if let Node::Neg(nb) = self.node(b) {
            return self.add(a, nb);
        }
        self.fold2(a, b, Interval::sub, Node::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.is_exact(a, 0.0) || self.is_exact(b, 0.0) {
            return self.constant(0.0);
        }
        if self.is_exact(a, 1.0) {
            return b;
        }
        if self.is_exact(b, 1.0) {
            return a;
        }
        if a == b {
            return self.powi(a, 2);
        }
        if self.is_exact(a, -1.0) {
            return self.neg(b);
        }
        if self.is_exact(b, -1.0) {
            return self.neg(a);
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.fold2(a, b, Interval::mul, Node::Mul(a, b))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if self.is_exact(a, 0.0) {
            return self.constant(0.0);
        }
        if self.is_exact(b, 1.0) {
            return a;
        }
        self.fold2(a, b, Interval::div, Node::Div(a, b))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        match self.node(a) {
            Node::Neg(x) => x,
            Node::Const(c) => self.interval(c.neg()),
            _ => self.intern(Node::Neg(a)),
        }
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.fold1(a, Interval::exp, Node::Exp(a))
    }

    pub fn ln(&mut self, a: NodeId) -> NodeId {
        self.fold1(a, Interval::ln, Node::Ln(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.fold1(a, Interval::tanh, Node::Tanh(a))
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        self.fold1(a, Interval::sqrt, Node::Sqrt(a))
    }

    pub fn sech2(&mut self, a: NodeId) -> NodeId {
        self.fold1(a, Interval::sech2, Node::Sech2(a))
    }

    pub fn pow(&mut self, a: NodeId, c: Interval) -> NodeId {
        if c.lo == c.hi && c.lo == c.lo.trunc() && c.lo.abs() <= 16.0 {
            return self.powi(a, c.lo as i32);
        }
        if let Some(x) = self.as_const(a) {
            if let Ok(v) = x.pow(&c) {
                return self.interval(v);
            }
        }
        self.intern(Node::Pow(a, c))
    }

    pub fn powi(&mut self, a: NodeId, k: i32) -> NodeId {
        match k {
            0 => self.constant(1.0),
            1 => a,
            _ => {
                if let Some(x) = self.as_const(a) {
                    if let Ok(v) = x.powi(k) {
                        return self.interval(v);
                    }
                }
                self.intern(Node::PowI(a, k))
            }
        }
    }

    pub fn q_divdiff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.intern(Node::QDivDiff(a, b))
    }

    pub fn scale(&mut self, c: f64, a: NodeId) -> NodeId {
        let k = self.constant(c);
        self.mul(k, a)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn diff(&mut self, id: NodeId, var: u8) -> Result<NodeId, RigorError> {
        if let Some(&d) = self.diff_memo.get(&(id, var)) {
            return Ok(d);
        }
        let d = match self.node(id) {
            Node::Const(_) => self.constant(0.0),
            Node::Var(k) => self.constant(if k == var { 1.0 } else { 0.0 }),
            Node::Add(a, b) => {
                let (da, db) = (self.diff(a, var)?, self.diff(b, var)?);
                self.add(da, db)
            }
            Node::Sub(a, b) => {
                let (da, db) = (self.diff(a, var)?, self.diff(b, var)?);
                self.sub(da, db)
            }
            Node::Mul(a, b) => {
                let (da, db) = (self.diff(a, var)?, self.diff(b, var)?);
                let l = self.mul(da, b);
                let r = self.mul(a, db);
                self.add(l, r)
            }
            Node::Div(a, b) => {
                // (a' − (a/b)·b')/b
                let (da, db) = (self.diff(a, var)?, self.diff(b, var)?);
                let q = self.mul(id, db);
                let num = self.sub(da, q);
                self.div(num, b)
            }
            Node::Neg(a) => {
                let da = self.diff(a, var)?;
                self.neg(da)
            }
            Node::Exp(a) => {
                let da = self.diff(a, var)?;
                self.mul(id, da)
            }
            Node::Ln(a) => {
                let da = self.diff(a, var)?;
                self.div(da, a)
            }
            Node::Tanh(a) => {
                let da = self.diff(a, var)?;
                let s2 = self.sech2(a);
                self.mul(s2, da)
            }
            Node::Sqrt(a) => {
                let da = self.diff(a, var)?;
                let two = self.scale(2.0, id);
                self.div(da, two)
            }
            Node::Sech2(a) => {
                let da = self.diff(a, var)?;
                let th = self.tanh(a);
                let p = self.mul(id, th);
                let p = self.scale(-2.0, p);
                self.mul(p, da)
            }
            Node::Pow(a, c) => {
                let da = self.diff(a, var)?;
                let cm1 = c.sub(&Interval::point(1.0))?;
                let lower = self.pow(a, cm1);
                let k = self.interval(c);
                let p = self.mul(k, lower);
                self.mul(p, da)
            }
            Node::PowI(a, k) => {
                let da = self.diff(a, var)?;
                let lower = self.powi(a, k - 1);
                let p = self.scale(k as f64, lower);
                self.mul(p, da)
            }
            Node::QDivDiff(..) => return Err(RigorError::NotDifferentiable("q_divdiff")),
        };
        self.diff_memo.insert((id, var), d);
        Ok(d)
    }

    /// Compiles the subgraph reachable from `root` into a standalone tape.
    pub fn compile(&self, root: NodeId, nvars: usize) -> Expr {
        let mut reach = vec![false; root.0 as usize + 1];
        reach[root.0 as usize] = true;
        for k in (0..=root.0 as usize).rev() {
            if !reach[k] {
                continue;
            }
            for c in self.nodes[k].children().into_iter().flatten() {
                reach[c.0 as usize] = true;
            }
        }
        let mut remap = vec![u32::MAX; reach.len()];
        let mut nodes = Vec::new();
        for (k, &r) in reach.iter().enumerate() {
            if r {
                remap[k] = nodes.len() as u32;
                nodes.push(self.nodes[k].remap(|c| NodeId(remap[c.0 as usize])));
            }
        }
        Expr { nodes, nvars }
    }
}

/// A compiled expression: nodes in topological order, root last.
#[derive(Clone, Debug)]
pub struct Expr {
    nodes: Vec<Node>,
    nvars: usize,
}

impl Expr {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, RigorError> {
        assert_eq!(vars.len(), self.nvars, "wrong number of variables");
        let mut vals: Vec<S> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let at = |id: NodeId| &vals[id.0 as usize];
            let v = match *node {
                Node::Const(c) => S::constant(&c),
                Node::Var(k) => vars[k as usize].clone(),
                Node::Add(a, b) => at(a).add(at(b))?,
                Node::Sub(a, b) => at(a).sub(at(b))?,
                Node::Mul(a, b) => at(a).mul(at(b))?,
                Node::Div(a, b) => at(a).div(at(b))?,
                Node::Neg(a) => at(a).neg(),
                Node::Exp(a) => at(a).exp()?,
                Node::Ln(a) => at(a).ln()?,
                Node::Tanh(a) => at(a).tanh()?,
                Node::Sqrt(a) => at(a).sqrt()?,
                Node::Sech2(a) => at(a).sech2()?,
                Node::Pow(a, c) => at(a).pow(&c)?,
                Node::PowI(a, k) => at(a).powi(k)?,
                Node::QDivDiff(a, b) => at(a).q_divdiff(at(b))?,
            };
            vals.push(v);
        }
        Ok(vals.pop().expect("nonempty tape"))
    }

    pub fn eval_f64(&self, vars: &[f64]) -> f64 {
        self.eval(vars).unwrap_or(f64::NAN)
    }
}

/// Number types an [`Expr`] can be evaluated over.
pub trait Scalar: Clone + Sized {
    fn constant(c: &Interval) -> Self;
    fn add(&self, o: &Self) -> Result<Self, RigorError>;
    fn sub(&self, o: &Self) -> Result<Self, RigorError>;
    fn mul(&self, o: &Self) -> Result<Self, RigorError>;
    fn div(&self, o: &Self) -> Result<Self, RigorError>;
    fn neg(&self) -> Self;
    fn exp(&self) -> Result<Self, RigorError>;
    fn ln(&self) -> Result<Self, RigorError>;
    fn tanh(&self) -> Result<Self, RigorError>;
    fn sqrt(&self) -> Result<Self, RigorError>;
    fn sech2(&self) -> Result<Self, RigorError>;
    fn pow(&self, c: &Interval) -> Result<Self, RigorError>;
    fn powi(&self, k: i32) -> Result<Self, RigorError>;
    fn q_divdiff(&self, o: &Self) -> Result<Self, RigorError>;
}

impl Scalar for Interval {
    fn constant(c: &Interval) -> Self {
        *c
    }
    fn add(&self, o: &Self) -> Result<Self, RigorError> {
        Interval::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self, RigorError> {
        Interval::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self, RigorError> {
        Interval::mul(self, o)
    }
    fn div(&self, o: &Self) -> Result<Self, RigorError> {
        Interval::div(self, o)
    }
    fn neg(&self) -> Self {
        Interval::neg(self)
    }
    fn exp(&self) -> Result<Self, RigorError> {
        Interval::exp(self)
    }
    fn ln(&self) -> Result<Self, RigorError> {
        Interval::ln(self)
    }
    fn tanh(&self) -> Result<Self, RigorError> {
        Interval::tanh(self)
    }
    fn sqrt(&self) -> Result<Self, RigorError> {
        Interval::sqrt(self)
    }
    fn sech2(&self) -> Result<Self, RigorError> {
        Interval::sech2(self)
    }
    fn pow(&self, c: &Interval) -> Result<Self, RigorError> {
        Interval::pow(self, c)
    }
    fn powi(&self, k: i32) -> Result<Self, RigorError> {
        Interval::powi(self, k)
    }
    fn q_divdiff(&self, o: &Self) -> Result<Self, RigorError> {
        Interval::q_divdiff(self, o)
    }
}

/// Point value of `(Q(y) − Q(z))/(y² − z²)`.
pub fn q_divdiff_point(y: f64, z: f64) -> f64 {
    let q = |x: f64| {
        let v = SQRT_2 * x;
        if v == 0.0 {
            1.0
        } else {
            v / v.sinh()
        }
    };
    if (y - z).abs() > 1e-4 * y.abs().max(z.abs()).max(1.0) {
        return (q(y) - q(z)) / (y * y - z * z);
    }
    // mean value κ(v) = −Ñ(v)/S(v)² at the midpoint; O(|y−z|²) accurate
    let v = SQRT_2 * 0.5 * (y + z);
    let (nt, sc) = if v < 0.5 {
        let v2 = v * v;
        // p = v^{2k}, f = (2k+1)!; the Ñ term of index k+1 is 2(k+1)p/(2k+3)!
        let (mut nt, mut sc, mut p, mut f) = (0.0, 0.0, 1.0, 1.0);
        for k in 0..10 {
            let kk = k as f64;
            sc += p / f;
            let next_f = f * (2.0 * kk + 2.0) * (2.0 * kk + 3.0);
            nt += 2.0 * (kk + 1.0) * p / next_f;
            p *= v2;
            f = next_f;
        }
        (nt, sc)
    } else {
        ((v * v.cosh() - v.sinh()) / (v * v * v), v.sinh() / v)
    };
    -nt / (sc * sc)
}

impl Scalar for f64 {
    fn constant(c: &Interval) -> Self {
        if c.lo == c.hi {
            c.lo
        } else {
            c.mid()
        }
    }
    fn add(&self, o: &Self) -> Result<Self, RigorError> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, RigorError> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, RigorError> {
        Ok(self * o)
    }
    fn div(&self, o: &Self) -> Result<Self, RigorError> {
        if *o == 0.0 {
            return Err(RigorError::Guard("division by zero"));
        }
        Ok(self / o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Result<Self, RigorError> {
        Ok(f64::exp(*self))
    }
    fn ln(&self) -> Result<Self, RigorError> {
        if *self <= 0.0 {
            return Err(RigorError::Guard("log of a nonpositive value"));
        }
        Ok(f64::ln(*self))
    }
    fn tanh(&self) -> Result<Self, RigorError> {
        Ok(f64::tanh(*self))
    }
    fn sqrt(&self) -> Result<Self, RigorError> {
        if *self < 0.0 {
            return Err(RigorError::Guard("sqrt of a negative value"));
        }
        Ok(f64::sqrt(*self))
    }
    fn sech2(&self) -> Result<Self, RigorError> {
        Ok(1.0 / f64::cosh(*self).powi(2))
    }
    fn pow(&self, c: &Interval) -> Result<Self, RigorError> {
        if *self <= 0.0 {
            return Err(RigorError::Guard("pow with a nonpositive base"));
        }
        Ok(self.powf(<f64 as Scalar>::constant(c)))
    }
    fn powi(&self, k: i32) -> Result<Self, RigorError> {
        Ok(f64::powi(*self, k))
    }
    fn q_divdiff(&self, o: &Self) -> Result<Self, RigorError> {
        Ok(q_divdiff_point(*self, *o))
    }
}

/// Value, gradient and Hessian of a function of two variables, carried
/// through the chain rule. Hessian entries are ordered `[xx, xy, yy]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub dd: [f64; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Jet2 {
        Jet2 { v, d: [0.0; 2], dd: [0.0; 3] }
    }

    /// The `k`-th coordinate function evaluated at `v`.
    pub fn variable(v: f64, k: usize) -> Jet2 {
        let mut d = [0.0; 2];
        d[k] = 1.0;
        Jet2 { v, d, dd: [0.0; 3] }
    }

    /// Applies `g` with `g(v), g′(v), g″(v)` given.
    fn chain(&self, g0: f64, g1: f64, g2: f64) -> Jet2 {
        let d = self.d;
        Jet2 {
            v: g0,
            d: [g1 * d[0], g1 * d[1]],
            dd: [
                g1 * self.dd[0] + g2 * d[0] * d[0],
                g1 * self.dd[1] + g2 * d[0] * d[1],
                g1 * self.dd[2] + g2 * d[1] * d[1],
            ],
        }
    }
}

impl Scalar for Jet2 {
    fn constant(c: &Interval) -> Self {
        Jet2::constant(<f64 as Scalar>::constant(c))
    }
    fn add(&self, o: &Self) -> Result<Self, RigorError> {
        Ok(Jet2 {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
            dd: [self.dd[0] + o.dd[0], self.dd[1] + o.dd[1], self.dd[2] + o.dd[2]],
        })
    }
    fn sub(&self, o: &Self) -> Result<Self, RigorError> {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Result<Self, RigorError> {
        let (a, b) = (self, o);
        Ok(Jet2 {
            v: a.v * b.v,
            d: [a.v * b.d[0] + b.v * a.d[0], a.v * b.d[1] + b.v * a.d[1]],
            dd: [
                a.v * b.dd[0] + b.v * a.dd[0] + 2.0 * a.d[0] * b.d[0],
                a.v * b.dd[1] + b.v * a.dd[1] + a.d[0] * b.d[1] + a.d[1] * b.d[0],
                a.v * b.dd[2] + b.v * a.dd[2] + 2.0 * a.d[1] * b.d[1],
            ],
        })
    }
    fn div(&self, o: &Self) -> Result<Self, RigorError> {
        if o.v == 0.0 {
            return Err(RigorError::Guard("division by zero"));
        }
        let r = 1.0 / o.v;
        self.mul(&o.chain(r, -r * r, 2.0 * r * r * r))
    }
    fn neg(&self) -> Self {
        Jet2 { v: -self.v, d: [-self.d[0], -self.d[1]], dd: [-self.dd[0], -self.dd[1], -self.dd[2]] }
    }
    fn exp(&self) -> Result<Self, RigorError> {
        let e = self.v.exp();
        Ok(self.chain(e, e, e))
    }
    fn ln(&self) -> Result<Self, RigorError> {
        if self.v <= 0.0 {
            return Err(RigorError::Guard("log of a nonpositive value"));
        }
        let r = 1.0 / self.v;
        Ok(self.chain(self.v.ln(), r, -r * r))
    }
    fn tanh(&self) -> Result<Self, RigorError> {
        let th = self.v.tanh();
        let s2 = 1.0 / self.v.cosh().powi(2);
        Ok(self.chain(th, s2, -2.0 * th * s2))
    }
    fn sqrt(&self) -> Result<Self, RigorError> {
        if self.v <= 0.0 {
            return Err(RigorError::Guard("sqrt at a nonpositive value"));
        }
        let r = self.v.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * self.v)))
    }
    fn sech2(&self) -> Result<Self, RigorError> {
        let th = self.v.tanh();
        let s2 = 1.0 / self.v.cosh().powi(2);
        Ok(self.chain(s2, -2.0 * s2 * th, -2.0 * s2 * s2 + 4.0 * s2 * th * th))
    }
    fn pow(&self, c: &Interval) -> Result<Self, RigorError> {
        if self.v <= 0.0 {
            return Err(RigorError::Guard("pow with a nonpositive base"));
        }
        let c = <f64 as Scalar>::constant(c);
        let x = self.v;
        let p = x.powf(c - 2.0);
        Ok(self.chain(p * x * x, c * p * x, c * (c - 1.0) * p))
    }
    fn powi(&self, k: i32) -> Result<Self, RigorError> {
        let x = self.v;
        let kf = k as f64;
        Ok(self.chain(x.powi(k), kf * x.powi(k - 1), kf * (kf - 1.0) * x.powi(k - 2)))
    }
    fn q_divdiff(&self, _o: &Self) -> Result<Self, RigorError> {
        Err(RigorError::NotDifferentiable("q_divdiff"))
    }
}
