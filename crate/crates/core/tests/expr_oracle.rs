//! Tree evaluation checked against a separate interpreter that works on the
//! serialized text, never touching `Expr`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shepherd::expr::{Expr, ExprTree, GrowMethod, Op};

enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokens(text: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        let Some(c) = rest.chars().next() else { return out };
        match c {
            '(' => {
                out.push(Tok::Open);
                rest = &rest[1..];
            }
            ')' => {
                out.push(Tok::Close);
                rest = &rest[1..];
            }
            _ => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                out.push(Tok::Atom(&rest[..end]));
                rest = &rest[end..];
            }
        }
    }
}

/// Evaluates the expression starting at `toks[*at]`, advancing past it.
fn naive(toks: &[Tok], at: &mut usize, params: &[f64]) -> f64 {
    let tok = &toks[*at];
    *at += 1;
    match tok {
        Tok::Atom(a) => match a.strip_prefix('p') {
            Some(i) => params[i.parse::<usize>().unwrap()],
            None => a.parse().unwrap(),
        },
        Tok::Open => {
            let Tok::Atom(head) = toks[*at] else {
                panic!("operator expected")
            };
            *at += 1;
            let mut args = Vec::new();
            while !matches!(toks[*at], Tok::Close) {
                args.push(naive(toks, at, params));
            }
            *at += 1;
            match (head, args.as_slice()) {
                ("neg", [a]) => -a,
                ("-", [a, b]) => a - b,
                ("+", [a, b]) => a + b,
                ("*", [a, b]) => a * b,
                ("div", [a, b]) => {
                    if *b == 0.0 {
                        1.0
                    } else {
                        a / b
                    }
                }
                ("qif", [a, b, c, d]) => {
                    if a <= b {
                        *c
                    } else {
                        *d
                    }
                }
                _ => panic!("bad node {head} with {} args", args.len()),
            }
        }
        Tok::Close => panic!("unexpected )"),
    }
}

fn naive_pair(text: &str, params: &[f64]) -> (f64, f64) {
    let toks = tokens(text);
    assert!(matches!(toks[1], Tok::Atom("pair")));
    let mut at = 2;
    let x = naive(&toks, &mut at, params);
    let y = naive(&toks, &mut at, params);
    assert!(matches!(toks[at], Tok::Close));
    (x, y)
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn param_vector(rng: &mut ChaCha8Rng, arity: usize) -> Vec<f64> {
    (0..arity)
        .map(|_| match rng.random_range(0..10) {
            0 => 0.0,
            1 => -0.0,
            2 => rng.random_range(-3..=3) as f64,
            _ => rng.random_range(-200.0..200.0),
        })
        .collect()
}

#[test]
fn random_trees_match_naive_interpreter() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    for i in 0..10_000 {
        let arity = if i % 2 == 0 { 4 } else { 12 };
        let method = if i % 3 == 0 { GrowMethod::Full } else { GrowMethod::Grow };
        let budget = rng.random_range(0..=7);
        let tree = ExprTree::random(budget, arity, method, &mut rng);
        let text = tree.to_sexp();
        let params = param_vector(&mut rng, arity);
        let (x, y) = tree.eval(&params);
        let (nx, ny) = naive_pair(&text, &params);
        assert!(
            same(x, nx) && same(y, ny),
            "{text} on {params:?}: ({x}, {y}) vs ({nx}, {ny})"
        );
    }
}

fn apply(op: Op, args: Vec<Expr>) -> Expr {
    Expr::Apply(op, args)
}

#[test]
fn forced_boundaries_match_naive_interpreter() {
    let p = Expr::Param;
    let c = Expr::Const;
    let cases = vec![
        apply(Op::Div, vec![p(0), c(0.0)]),
        apply(Op::Div, vec![p(0), c(-0.0)]),
        apply(Op::Div, vec![p(0), apply(Op::Sub, vec![p(1), p(1)])]),
        apply(Op::Div, vec![c(0.0), c(0.0)]),
        apply(Op::Div, vec![p(0), c(1e-300)]),
        apply(Op::Qif, vec![p(0), p(0), c(1.0), c(2.0)]),
        apply(Op::Qif, vec![p(0), p(1), p(2), p(3)]),
        apply(Op::Qif, vec![c(0.0), c(-0.0), c(1.0), c(2.0)]),
        apply(
            Op::Qif,
            vec![apply(Op::Div, vec![c(1.0), c(0.0)]), c(1.0), c(3.0), c(4.0)],
        ),
        apply(Op::Mul, vec![c(1e300), c(1e300)]),
        apply(
            Op::Sub,
            vec![
                apply(Op::Mul, vec![c(1e300), c(1e300)]),
                apply(Op::Mul, vec![c(1e300), c(1e300)]),
            ],
        ),
        apply(
            Op::Qif,
            vec![
                apply(
                    Op::Sub,
                    vec![
                        apply(Op::Mul, vec![c(1e300), c(1e300)]),
                        apply(Op::Mul, vec![c(1e300), c(1e300)]),
                    ],
                ),
                c(0.0),
                c(5.0),
                c(6.0),
            ],
        ),
    ];
    let vectors = [
        vec![0.0, 0.0, 0.0, 0.0],
        vec![1.5, 1.5, -2.0, 7.0],
        vec![-0.0, 0.0, 3.0, -3.0],
        vec![2.0, 1.0, 9.0, 8.0],
    ];
    for expr in cases {
        let tree = ExprTree::new(expr.clone(), apply(Op::Neg, vec![expr]));
        let text = tree.to_sexp();
        for params in &vectors {
            let (x, y) = tree.eval(params);
            let (nx, ny) = naive_pair(&text, params);
            assert!(same(x, nx) && same(y, ny), "{text} on {params:?}");
        }
    }
    // frozen anchors
    let t = ExprTree::new(
        apply(Op::Div, vec![c(5.0), c(0.0)]),
        apply(Op::Qif, vec![c(2.0), c(2.0), c(7.0), c(8.0)]),
    );
    assert_eq!(t.eval(&[0.0; 4]), (1.0, 7.0));
}
