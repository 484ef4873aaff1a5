/// Quintic Hermite interpolation on one interval from values, first and
/// second derivatives at both ends.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Quintic {
    pub x0: f64,
    pub width: f64,
    pub y0: [f64; 3],
    pub y1: [f64; 3],
}

impl Quintic {
    /// `(p, p', p'')` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let h = self.width;
        let s = (x - self.x0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let basis = [
            1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
            s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
            0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
            10.0 * s3 - 15.0 * s4 + 6.0 * s5,
            -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
            0.5 * (s3 - 2.0 * s4 + s5),
        ];
        let d1 = [
            -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
            1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
            0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
            30.0 * s2 - 60.0 * s3 + 30.0 * s4,
            -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
            0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4),
        ];
        let d2 = [
            -60.0 * s + 180.0 * s2 - 120.0 * s3,
            -36.0 * s + 96.0 * s2 - 60.0 * s3,
            0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3),
            60.0 * s - 180.0 * s2 + 120.0 * s3,
            -24.0 * s + 84.0 * s2 - 60.0 * s3,
            0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3),
        ];
        let c = [
            self.y0[0],
            h * self.y0[1],
            h * h * self.y0[2],
            self.y1[0],
            h * self.y1[1],
            h * h * self.y1[2],
        ];
        let dot = |b: &[f64; 6]| b.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>();
        [dot(&basis), dot(&d1) / h, dot(&d2) / (h * h)]
    }

    /// Solves `p(x) = target` on the interval, assuming `p` is monotone
    /// increasing there.
    pub fn solve_increasing(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (self.x0, self.x0 + self.width);
        let f0 = self.y0[0];
        let f1 = self.y1[0];
        let mut x = if f1 > f0 { lo + (target - f0) / (f1 - f0) * self.width } else { 0.5 * (lo + hi) };
        x = x.clamp(lo, hi);
        for _ in 0..200 {
            let [p, dp, _] = self.eval(x);
            let r = p - target;
            if r == 0.0 {
                return x;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - r / dp;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= f64::EPSILON * x.abs().max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintics() {
        let p = |x: f64| [x.powi(5) - 2.0 * x * x + 1.0, 5.0 * x.powi(4) - 4.0 * x, 20.0 * x.powi(3) - 4.0];
        let q = Quintic { x0: 0.5, width: 1.5, y0: p(0.5), y1: p(2.0) };
        for k in 0..=10 {
            let x = 0.5 + 0.15 * k as f64;
            let got = q.eval(x);
            let want = p(x);
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-11, "{i}: {} vs {}", got[i], want[i]);
            }
        }
        let exp = |x: f64| [x.exp(), x.exp(), x.exp()];
        let q = Quintic { x0: 0.0, width: 1.0, y0: exp(0.0), y1: exp(1.0) };
        let x = q.solve_increasing(2.0);
        assert!((x - 2f64.ln()).abs() < 1e-4);
    }
}
