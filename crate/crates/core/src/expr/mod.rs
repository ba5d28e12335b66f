//! Dog-AI programs: pair-rooted expression trees over real numbers.
//!
//! The root is always `pair`, its two branches compute the x and y force.
//! Interior nodes are drawn from [`Op`]; leaves are parameter references
//! or ephemeral constants. Depth counts the root at 0, so a tree whose
//! branches are single leaves has depth 1.

mod sexp;

pub use sexp::{parse_tree, ParseError, ParseErrorKind};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Interior operators. `pair` is not listed: it only exists as the root,
/// which [`ExprTree`] represents structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Neg,
    Sub,
    Add,
    Mul,
    /// Protected division: a zero denominator yields 1.
    Div,
    /// `qif(a, b, c, d)` is `c` when `a <= b`, else `d`.
    Qif,
}

impl Op {
    pub const ALL: [Op; 6] = [Op::Neg, Op::Sub, Op::Add, Op::Mul, Op::Div, Op::Qif];

    pub fn arity(self) -> usize {
        match self {
            Op::Neg => 1,
            Op::Sub | Op::Add | Op::Mul | Op::Div => 2,
            Op::Qif => 4,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Neg => "neg",
            Op::Sub => "-",
            Op::Add => "+",
            Op::Mul => "*",
            Op::Div => "div",
            Op::Qif => "qif",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.symbol() == s)
    }
}

pub const PAIR_SYMBOL: &str = "pair";

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Index into the active terminal set.
    Param(usize),
    Const(f64),
    /// Operator applied to exactly `op.arity()` children.
    Apply(Op, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Expr::Param(i) => params[*i],
            Expr::Const(c) => *c,
            Expr::Apply(op, args) => {
                let arg = |i: usize| args[i].eval(params);
                match op {
                    Op::Neg => -arg(0),
                    Op::Sub => arg(0) - arg(1),
                    Op::Add => arg(0) + arg(1),
                    Op::Mul => arg(0) * arg(1),
                    Op::Div => {
                        let (num, den) = (arg(0), arg(1));
                        if den == 0.0 {
                            1.0
                        } else {
                            num / den
                        }
                    }
                    Op::Qif => {
                        if arg(0) <= arg(1) {
                            arg(2)
                        } else {
                            arg(3)
                        }
                    }
                }
            }
        }
    }

    /// Height of this subtree; a leaf has height 0.
    pub fn height(&self) -> usize {
        match self {
            Expr::Apply(_, args) => 1 + args.iter().map(Expr::height).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Apply(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Expr::Apply(..))
    }

    /// Preorder lookup; `id` 0 is `self`. Returns the node and its depth
    /// relative to `self`.
    fn locate(&self, id: usize, depth: usize) -> Option<(&Expr, usize)> {
        if id == 0 {
            return Some((self, depth));
        }
        let Expr::Apply(_, args) = self else { return None };
        let mut offset = 1;
        for child in args {
            let n = child.size();
            if id < offset + n {
                return child.locate(id - offset, depth + 1);
            }
            offset += n;
        }
        None
    }

    fn locate_mut(&mut self, id: usize) -> Option<&mut Expr> {
        if id == 0 {
            return Some(self);
        }
        let Expr::Apply(_, args) = self else { return None };
        let mut offset = 1;
        for child in args {
            let n = child.size();
            if id < offset + n {
                return child.locate_mut(id - offset);
            }
            offset += n;
        }
        None
    }

    fn visit<'a>(&'a self, depth: usize, f: &mut impl FnMut(&'a Expr, usize)) {
        f(self, depth);
        if let Expr::Apply(_, args) = self {
            for child in args {
                child.visit(depth + 1, f);
            }
        }
    }
}

/// A complete program: `(pair x-branch y-branch)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprTree {
    pub branches: [Expr; 2],
}

/// Preorder position of a node; 0 is the `pair` root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("parameter index {index} out of range for {arity} terminals")]
    ParamOutOfRange { index: usize, arity: usize },
    #[error("{op} expects {expected} arguments, found {found}")]
    WrongArity {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite constant {0}")]
    NonFiniteConstant(f64),
    #[error("tree depth {depth} exceeds limit {limit}")]
    TooDeep { depth: usize, limit: usize },
}

impl ExprTree {
    pub fn new(x: Expr, y: Expr) -> Self {
        ExprTree { branches: [x, y] }
    }

    /// Evaluates both branches, giving the `(x, y)` output.
    pub fn eval(&self, params: &[f64]) -> (f64, f64) {
        (self.branches[0].eval(params), self.branches[1].eval(params))
    }

    pub fn depth(&self) -> usize {
        1 + self.branches[0].height().max(self.branches[1].height())
    }

    pub fn size(&self) -> usize {
        1 + self.branches[0].size() + self.branches[1].size()
    }

    /// Checks arities, parameter indices, constants and the depth limit.
    pub fn validate(&self, arity: usize, d_max: usize) -> Result<(), TreeError> {
        fn check(e: &Expr, arity: usize) -> Result<(), TreeError> {
            match e {
                Expr::Param(i) if *i >= arity => Err(TreeError::ParamOutOfRange { index: *i, arity }),
                Expr::Const(c) if !c.is_finite() => Err(TreeError::NonFiniteConstant(*c)),
                Expr::Apply(op, args) => {
                    if args.len() != op.arity() {
                        return Err(TreeError::WrongArity {
                            op: op.symbol(),
                            expected: op.arity(),
                            found: args.len(),
                        });
                    }
                    args.iter().try_for_each(|a| check(a, arity))
                }
                _ => Ok(()),
            }
        }
        self.branches.iter().try_for_each(|b| check(b, arity))?;
        let depth = self.depth();
        if depth > d_max {
            return Err(TreeError::TooDeep { depth, limit: d_max });
        }
        Ok(())
    }

    /// The subtree at `id` and its depth in the whole tree, or `None` for
    /// the root (which is not an [`Expr`]) and out-of-range ids.
    pub fn subtree(&self, id: NodeId) -> Option<(&Expr, usize)> {
        let id = id.0.checked_sub(1)?;
        let left = self.branches[0].size();
        if id < left {
            self.branches[0].locate(id, 1)
        } else {
            self.branches[1].locate(id - left, 1)
        }
    }

    /// Swaps in `replacement` at `id`, returning what was there.
    ///
    /// Panics if `id` is the root or out of range.
    pub fn replace_subtree(&mut self, id: NodeId, replacement: Expr) -> Expr {
        let idx = id.0.checked_sub(1).expect("the pair root cannot be replaced");
        let left = self.branches[0].size();
        let slot = if idx < left {
            self.branches[0].locate_mut(idx)
        } else {
            self.branches[1].locate_mut(idx - left)
        };
        std::mem::replace(slot.expect("node id out of range"), replacement)
    }

    /// Uniformly random node. With `exclude_root` the `pair` root is never chosen.
    pub fn select_node<R: Rng + ?Sized>(&self, rng: &mut R, exclude_root: bool) -> NodeId {
        let lo = usize::from(exclude_root);
        NodeId(rng.random_range(lo..self.size()))
    }

    /// Calls `f(node, depth)` on every non-root node in preorder.
    pub fn for_each_node<'a>(&'a self, mut f: impl FnMut(&'a Expr, usize)) {
        for b in &self.branches {
            b.visit(1, &mut f);
        }
    }

    /// Renders with generic `p<i>` parameter names.
    pub fn to_sexp(&self) -> String {
        sexp::serialize(self, &[])
    }

    /// Renders with the given terminal labels.
    pub fn to_sexp_with(&self, labels: &[&str]) -> String {
        sexp::serialize(self, labels)
    }

    /// Builds a random tree whose branches are each grown with `depth_budget`.
    pub fn random<R: Rng + ?Sized>(depth_budget: usize, arity: usize, method: GrowMethod, rng: &mut R) -> Self {
        let x = grow_random(depth_budget, arity, method, rng);
        let y = grow_random(depth_budget, arity, method, rng);
        ExprTree::new(x, y)
    }
}

impl std::fmt::Display for ExprTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_sexp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowMethod {
    /// Operators everywhere above the budget, leaves exactly at it.
    Full,
    /// Each node is a leaf or an operator with probability ½; leaves are
    /// forced at the budget.
    Grow,
}

/// Leaf: a parameter reference or a standard-normal constant, ½ each.
pub fn random_terminal<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Expr {
    if arity > 0 && rng.random_bool(0.5) {
        Expr::Param(rng.random_range(0..arity))
    } else {
        Expr::Const(rng.sample(StandardNormal))
    }
}

/// Random subtree of height at most `depth_budget`.
pub fn grow_random<R: Rng + ?Sized>(depth_budget: usize, arity: usize, method: GrowMethod, rng: &mut R) -> Expr {
    let leaf = depth_budget == 0
        || match method {
            GrowMethod::Full => false,
            GrowMethod::Grow => rng.random_bool(0.5),
        };
    if leaf {
        return random_terminal(arity, rng);
    }
    let op = Op::ALL[rng.random_range(0..Op::ALL.len())];
    let args = (0..op.arity())
        .map(|_| grow_random(depth_budget - 1, arity, method, rng))
        .collect();
    Expr::Apply(op, args)
}
