use super::{Formula, Signal, StlError};

/// Robustness assigned to `true`. Finite so it stays MILP-representable.
pub const DEFAULT_TOP: f64 = 1000.0;

/// Quantitative monitor. `top` is the value of `true` (and of an empty minimum).
#[derive(Debug, Clone, Copy)]
pub struct Monitor {
    pub top: f64,
}

impl Default for Monitor {
    fn default() -> Self {
        Self { top: DEFAULT_TOP }
    }
}

impl Monitor {
    pub fn new(top: f64) -> Self {
        Self { top }
    }

    pub fn robustness(&self, phi: &Formula, s: &Signal, t: usize) -> Result<f64, StlError> {
        let need = t + phi.horizon();
        if need > s.last_step() {
            return Err(StlError::HorizonExceeded { needed: need, last: s.last_step() });
        }
        self.rho(phi, s, t)
    }

    pub fn satisfied(&self, phi: &Formula, s: &Signal, t: usize) -> Result<bool, StlError> {
        Ok(self.robustness(phi, s, t)? >= 0.0)
    }

    fn rho(&self, phi: &Formula, s: &Signal, t: usize) -> Result<f64, StlError> {
        Ok(match phi {
            Formula::True => self.top,
            Formula::Pred(e) => {
                let sample = &s.samples()[t];
                e.eval_with(|n| s.var_index(n).map(|i| sample[i]))
                    .map_err(StlError::UnknownVariable)?
            }
            Formula::Not(f) => -self.rho(f, s, t)?,
            Formula::And(a, b) => self.rho(a, s, t)?.min(self.rho(b, s, t)?),
            Formula::Or(a, b) => self.rho(a, s, t)?.max(self.rho(b, s, t)?),
            Formula::Always(i, f) => {
                let mut acc = f64::INFINITY;
                for k in i.steps() {
                    acc = acc.min(self.rho(f, s, t + k)?);
                }
                acc
            }
            Formula::Eventually(i, f) => {
                let mut acc = f64::NEG_INFINITY;
                for k in i.steps() {
                    acc = acc.max(self.rho(f, s, t + k)?);
                }
                acc
            }
            Formula::Until(i, a, b) => {
                // max over t1 in [t+lo, t+hi] of min(rho(b, t1), min_{t <= t2 < t1} rho(a, t2))
                let mut best = f64::NEG_INFINITY;
                let mut prefix = self.top;
                let mut k = 0usize;
                for t1 in t..=t + i.hi as usize {
                    while t + k < t1 {
                        prefix = prefix.min(self.rho(a, s, t + k)?);
                        k += 1;
                    }
                    if t1 >= t + i.lo as usize {
                        best = best.max(self.rho(b, s, t1)?.min(prefix));
                    }
                }
                best
            }
        })
    }
}

pub fn robustness(phi: &Formula, s: &Signal, t: usize) -> Result<f64, StlError> {
    Monitor::default().robustness(phi, s, t)
}

/// Boolean satisfaction; `rho >= 0` counts as satisfied.
pub fn satisfied(phi: &Formula, s: &Signal, t: usize) -> Result<bool, StlError> {
    Monitor::default().satisfied(phi, s, t)
}

pub fn horizon(phi: &Formula) -> usize {
    phi.horizon()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::{parse_stl, AffineExpr, Interval};

    fn alt() -> Signal {
        Signal::scalar("alt", &[6.0, 3.0, 5.5]).unwrap()
    }

    #[test]
    fn always_altitude_example() {
        let phi = parse_stl("G[0,2](alt - 5 > 0)").unwrap();
        assert_eq!(robustness(&phi, &alt(), 0).unwrap(), -2.0);
        assert!(!satisfied(&phi, &alt(), 0).unwrap());
    }

    #[test]
    fn eventually_altitude_example() {
        let phi = parse_stl("F[0,2](alt - 5 > 0)").unwrap();
        assert_eq!(robustness(&phi, &alt(), 0).unwrap(), 1.0);
        assert!(satisfied(&phi, &alt(), 0).unwrap());
    }

    #[test]
    fn threshold_is_zero_and_satisfied() {
        let s = Signal::scalar("alt", &[5.0]).unwrap();
        let phi = Formula::Pred(AffineExpr::var("alt").offset(-5.0));
        assert_eq!(robustness(&phi, &s, 0).unwrap(), 0.0);
        assert!(satisfied(&phi, &s, 0).unwrap());
    }

    #[test]
    fn true_is_top() {
        assert_eq!(robustness(&Formula::True, &alt(), 2).unwrap(), DEFAULT_TOP);
        assert!(satisfied(&Formula::True, &alt(), 0).unwrap());
    }

    #[test]
    fn horizon_examples() {
        let p = Formula::Pred(AffineExpr::var("p"));
        assert_eq!(horizon(&p), 0);
        let i01 = Interval::new(0, 1).unwrap();
        let nested = Formula::always(i01, Formula::eventually(i01, p.clone()));
        assert_eq!(horizon(&nested), 2);
        assert_eq!(horizon(&Formula::always(Interval::new(0, 2).unwrap(), p)), 2);
    }

    #[test]
    fn horizon_overflow_is_an_error() {
        let phi = parse_stl("G[0,3](alt > 0)").unwrap();
        assert!(matches!(
            robustness(&phi, &alt(), 0),
            Err(StlError::HorizonExceeded { needed: 3, last: 2 })
        ));
    }

    #[test]
    fn unknown_variable_is_an_error() {
        let phi = parse_stl("speed > 0").unwrap();
        assert!(matches!(robustness(&phi, &alt(), 0), Err(StlError::UnknownVariable(v)) if v == "speed"));
    }

    #[test]
    fn until_matches_hand_computation() {
        // a = (1, 2, -1, 3), b = (-5, -1, 4, 0); a U[1,2] b at t = 0
        let s = Signal::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, -5.0], vec![2.0, -1.0], vec![-1.0, 4.0], vec![3.0, 0.0]],
        )
        .unwrap();
        let phi = parse_stl("(a > 0) U[1,2] (b > 0)").unwrap();
        // t1 = 1: min(-1, a0=1) = -1 ; t1 = 2: min(4, min(1, 2)) = 1
        assert_eq!(robustness(&phi, &s, 0).unwrap(), 1.0);
    }
}
