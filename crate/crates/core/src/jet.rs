//! Truncated Taylor series in one variable, used for exact normal derivatives of closed-form
//! profiles.
//!
//! ```text
//!   c[k] = f^(k)(x0) / k!,   k = 0 .. 4
//! ```
//!
//! Each call to [`Jet::deriv`] drops the highest available order.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 4;
const N: usize = ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; N],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `d^k f / dx^k` at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    /// `[f, f', f'', f''']`.
    pub fn derivatives(&self) -> [f64; 4] {
        [self.derivative(0), self.derivative(1), self.derivative(2), self.derivative(3)]
    }

    pub fn deriv(&self) -> Jet {
        let mut c = [0.0; N];
        for k in 0..N - 1 {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Antiderivative with value `c0` at the expansion point.
    pub fn integ(&self, c0: f64) -> Jet {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    pub fn scale(&self, a: f64) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v *= a;
        }
        Jet { c }
    }

    /// `f(self)` given `[f, f', f'', f''', f'''']` at `self.value()`.
    pub fn compose(&self, fd: [f64; N]) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(fd[0]);
        let mut power = Jet::constant(1.0);
        let mut fact = 1.0;
        for (k, &f) in fd.iter().enumerate().skip(1) {
            power = power * delta;
            fact *= k as f64;
            out = out + power.scale(f / fact);
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose([e; N])
    }

    pub fn powf(&self, g: f64) -> Jet {
        let x = self.c[0];
        let mut fd = [0.0; N];
        let mut coef = 1.0;
        for (k, v) in fd.iter_mut().enumerate() {
            *v = coef * x.powf(g - k as f64);
            coef *= g - k as f64;
        }
        self.compose(fd)
    }

    pub fn erf(&self) -> Jet {
        // series of erf(x0 + s) in s: integrate 2/sqrt(pi) exp(-(x0 + s)^2)
        let x0 = Jet::variable(self.c[0]);
        let series = (x0 * x0)
            .scale(-1.0)
            .exp()
            .scale(std::f64::consts::FRAC_2_SQRT_PI)
            .integ(libm::erf(self.c[0]));
        let mut delta = *self;
        delta.c[0] = 0.0;
        series.compose_series(&delta)
    }

    /// Evaluates a Taylor series in the shift variable at a jet with zero constant term.
    fn compose_series(&self, delta: &Jet) -> Jet {
        let mut out = Jet::constant(self.c[0]);
        let mut power = Jet::constant(1.0);
        for k in 1..N {
            power = power * *delta;
            out = out + power.scale(self.c[k]);
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..N {
            c[k] += o.c[k];
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..N {
            c[k] -= o.c[k];
        }
        Jet { c }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; N];
        for i in 0..N {
            for j in 0..N - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for i in 1..=k {
                s -= o.c[i] * q[k - i];
            }
            q[k] = s / o.c[0];
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, a: f64) -> Jet {
        let mut c = self.c;
        c[0] += a;
        Jet { c }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, a: f64) -> Jet {
        self.scale(a)
    }
}
