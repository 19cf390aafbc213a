#![allow(dead_code)]

/// Direct finite-difference solve of `u'''' = ψ` with Navier data, used as
/// an independent oracle for the Green's-function quadrature.
///
/// Interior equations use the five-point stencil
/// `(u[i-2] − 4u[i-1] + 6u[i] − 4u[i+1] + u[i+2]) / h⁴ = ψ(x_i)`, with ghost
/// values eliminated through `(u[-1] − 2u[0] + u[1]) / h² = u''(0)` and the
/// mirror condition at `x = 1`. The pentadiagonal system is solved by
/// banded Gaussian elimination.
pub fn fd_navier_solve(n: usize, psi: impl Fn(f64) -> f64, bc: [f64; 4]) -> Vec<f64> {
    let [c1, c2, c3, c4] = bc;
    let h = 1.0 / n as f64;
    let h4 = h.powi(4);
    let m = n - 1;
    let mut band = Band::new(m, 2);
    let mut rhs = vec![0.0; m];
    #[allow(clippy::needless_range_loop)]
    for k in 0..m {
        let i = k + 1;
        let x = i as f64 * h;
        rhs[k] = h4 * psi(x);
        let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
        for (off, &c) in stencil.iter().enumerate() {
            let j = i as isize + off as isize - 2;
            match j {
                -1 => {
                    // u[-1] = 2c1 − u[1] + h²c3
                    band.add(k, 0, -c);
                    rhs[k] -= c * (2.0 * c1 + h * h * c3);
                }
                0 => rhs[k] -= c * c1,
                j if j as usize == n => rhs[k] -= c * c2,
                j if j as usize == n + 1 => {
                    // u[n+1] = 2c2 − u[n-1] + h²c4
                    band.add(k, m - 1, -c);
                    rhs[k] -= c * (2.0 * c2 + h * h * c4);
                }
                j => band.add(k, j as usize - 1, c),
            }
        }
    }
    let interior = band.solve(rhs);
    let mut u = Vec::with_capacity(n + 1);
    u.push(c1);
    u.extend(interior);
    u.push(c2);
    u
}

struct Band {
    n: usize,
    w: usize,
    // row-major storage of columns i-w ..= i+w
    a: Vec<f64>,
}

impl Band {
    fn new(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            a: vec![0.0; n * (2 * w + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (2 * self.w + 1) + (j + self.w - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.w >= i && j <= i + self.w);
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.w < i || j > i + self.w || j >= self.n {
            0.0
        } else {
            self.a[self.idx(i, j)]
        }
    }

    fn solve(mut self, mut b: Vec<f64>) -> Vec<f64> {
        let (n, w) = (self.n, self.w);
        for k in 0..n {
            let pivot = self.get(k, k);
            assert!(pivot.abs() > 1e-300, "zero pivot");
            for i in k + 1..(k + w + 1).min(n) {
                let factor = self.get(i, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in k..(k + w + 1).min(n) {
                    let v = self.get(k, j);
                    self.add(i, j, -factor * v);
                }
                b[i] -= factor * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..(i + w + 1).min(n))
                .map(|j| self.get(i, j) * x[j])
                .sum();
            x[i] = (b[i] - s) / self.get(i, i);
        }
        x
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Random expression source over `x` and `y`, built directly as text.
pub fn random_expr_source(rng: &mut impl rand::Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => format!("{}", rng.gen_range(0..40) as f64 / 8.0),
            1 => "pi".into(),
            2 => "e".into(),
            3 => "x".into(),
            _ => "y".into(),
        };
    }
    let sub = |rng: &mut _| random_expr_source(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 => format!("{} * {}", sub(rng), sub(rng)),
        3 => format!("({}) / ({})", sub(rng), sub(rng)),
        4 => format!("({})^{}", sub(rng), rng.gen_range(0..4)),
        5 => format!("-({})", sub(rng)),
        _ => {
            let f = ["sin", "cos", "exp", "sqrt", "abs", "log"][rng.gen_range(0..6)];
            format!("{f}({})", sub(rng))
        }
    }
}

/// Single-pass evaluator of the expression grammar; builds no tree.
pub struct RefEval<'a> {
    s: &'a [u8],
    i: usize,
    x: f64,
    y: f64,
}

impl<'a> RefEval<'a> {
    pub fn eval(src: &'a str, x: f64, y: f64) -> f64 {
        let mut r = Self {
            s: src.as_bytes(),
            i: 0,
            x,
            y,
        };
        let v = r.expr();
        assert_eq!(r.peek(), None, "trailing input in {src}");
        v
    }

    fn peek(&mut self) -> Option<u8> {
        while self.i < self.s.len() && self.s[self.i] == b' ' {
            self.i += 1;
        }
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> f64 {
        let mut v = self.term();
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.term();
            v = if c == b'+' { v + r } else { v - r };
        }
        v
    }

    fn term(&mut self) -> f64 {
        let mut v = self.unary();
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            let r = self.unary();
            v = if c == b'*' { v * r } else { v / r };
        }
        v
    }

    fn unary(&mut self) -> f64 {
        if self.peek() == Some(b'-') {
            self.i += 1;
            return -self.unary();
        }
        let base = self.atom();
        if self.peek() == Some(b'^') {
            self.i += 1;
            let p = self.unary();
            if p.fract() == 0.0 && p.abs() <= 64.0 {
                let mut acc = 1.0;
                for _ in 0..p.abs() as u32 {
                    acc *= base;
                }
                return if p < 0.0 { 1.0 / acc } else { acc };
            }
            return base.powf(p);
        }
        base
    }

    fn atom(&mut self) -> f64 {
        if self.peek() == Some(b'(') {
            self.i += 1;
            let v = self.expr();
            assert_eq!(self.peek(), Some(b')'));
            self.i += 1;
            return v;
        }
        let start = self.i;
        if self.s[start].is_ascii_digit() {
            while self.i < self.s.len()
                && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.')
            {
                self.i += 1;
            }
            return std::str::from_utf8(&self.s[start..self.i])
                .unwrap()
                .parse()
                .unwrap();
        }
        while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
            self.i += 1;
        }
        match &self.s[start..self.i] {
            b"x" => self.x,
            b"y" => self.y,
            b"pi" => std::f64::consts::PI,
            b"e" => std::f64::consts::E,
            name => {
                let a = self.atom();
                match name {
                    b"sin" => a.sin(),
                    b"cos" => a.cos(),
                    b"exp" => a.exp(),
                    b"sqrt" => a.sqrt(),
                    b"abs" => a.abs(),
                    b"log" => a.ln(),
                    _ => panic!("unknown function"),
                }
            }
        }
    }
}
