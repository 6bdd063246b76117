//! Dormand–Prince 5(4) with the standard 4th-order continuous extension.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub type State = [f64; 2];

/// Interpolation data for one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rc: [State; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; 2];
        for i in 0..2 {
            let rc = |k: usize| self.rc[k][i];
            y[i] = rc(0) + th * (rc(1) + th1 * (rc(2) + th * (rc(3) + th1 * rc(4))));
        }
        y
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

pub struct StepOutcome {
    pub y: State,
    pub k_end: State,
    pub err: f64,
    pub segment: DenseSegment,
}

/// One trial step from (t, y) with derivative k1 = f(t, y).
pub fn try_step<F, E>(f: &mut F, t: f64, y: &State, k1: &State, h: f64, tol: &Tolerances) -> Result<StepOutcome, E>
where
    F: FnMut(f64, &State) -> Result<State, E>,
{
    let comb = |coef: &[(f64, &State)]| -> State {
        let mut out = *y;
        for (c, k) in coef {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };
    let k2 = f(t + C2 * h, &comb(&[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(&[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(t + h, &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let ynew = comb(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &ynew)?;
    let mut err2 = 0.0;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
        err2 += (e / sc) * (e / sc);
    }
    let mut rc = [[0.0; 2]; 5];
    for i in 0..2 {
        let dy = ynew[i] - y[i];
        let bspl = h * k1[i] - dy;
        rc[0][i] = y[i];
        rc[1][i] = dy;
        rc[2][i] = bspl;
        rc[3][i] = dy - h * k7[i] - bspl;
        rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(StepOutcome { y: ynew, k_end: k7, err: (err2 / 2.0).sqrt(), segment: DenseSegment { t0: t, h, rc } })
}

/// Step-size update factor for an error ratio.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(tol: Tolerances) -> (State, Vec<DenseSegment>) {
        // y0' = y1, y1' = -y0 on [0, 10]
        let mut f = |_t: f64, y: &State| -> Result<State, ()> { Ok([y[1], -y[0]]) };
        let (mut t, mut y) = (0.0, [0.0, 1.0]);
        let mut h: f64 = 1e-3;
        let mut segs = Vec::new();
        while t < 10.0 {
            h = h.min(10.0 - t);
            let k1 = f(t, &y).unwrap();
            let out = try_step(&mut f, t, &y, &k1, h, &tol).unwrap();
            if out.err <= 1.0 {
                t += h;
                y = out.y;
                segs.push(out.segment);
            }
            h *= step_factor(out.err);
        }
        (y, segs)
    }

    #[test]
    fn harmonic_oscillator() {
        let (y, segs) = run(Tolerances::default());
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        for s in segs.iter().step_by(7) {
            let tm = s.t0 + 0.37 * s.h;
            let ym = s.eval(tm);
            assert!((ym[0] - tm.sin()).abs() < 1e-8, "dense output at {tm}");
        }
    }

    #[test]
    fn error_scales_with_tolerance() {
        let e1 = (run(Tolerances { rtol: 1e-6, atol: 1e-8 }).0[0] - 10f64.sin()).abs();
        let e2 = (run(Tolerances { rtol: 1e-9, atol: 1e-11 }).0[0] - 10f64.sin()).abs();
        assert!(e2 < e1 / 50.0, "{e1} {e2}");
    }
}
