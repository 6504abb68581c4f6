use crate::data::Dataset;

/// Margins are clamped to this magnitude before exponentiation.
pub const MARGIN_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    #[default]
    Exponential,
    Logistic,
}

impl Loss {
    pub fn value(self, m: f64) -> f64 {
        match self {
            Loss::Exponential => (-m).exp(),
            Loss::Logistic => {
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
        }
    }

    /// Derivative with respect to the margin (always negative).
    pub fn derivative(self, m: f64) -> f64 {
        match self {
            Loss::Exponential => -(-m).exp(),
            Loss::Logistic => {
                if m > 0.0 {
                    let e = (-m).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + m.exp())
                }
            }
        }
    }
}

impl std::str::FromStr for Loss {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "exponential" | "exp" => Ok(Loss::Exponential),
            "logistic" => Ok(Loss::Logistic),
            other => Err(crate::error::Error::InvalidParameter(format!("unknown loss `{other}`"))),
        }
    }
}

/// Feature rows `[x_inv, x_sp]` and labels, flattened for the hot loop.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub rows: Vec<f64>,
    pub y: Vec<f64>,
    pub d: usize,
}

impl Design {
    pub fn new(data: &Dataset) -> Self {
        let d = data.dim();
        let mut rows = Vec::with_capacity(d * data.len());
        for p in data.points() {
            rows.extend_from_slice(&p.x_inv);
            rows.extend_from_slice(&p.x_sp);
        }
        Self {
            rows,
            y: data.labels().collect(),
            d,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    fn margin(&self, i: usize, w: &[f64], clamps: &mut u64) -> f64 {
        let m = self.y[i] * crate::data::dot(w, self.x(i));
        if m.abs() > MARGIN_CLAMP {
            *clamps += 1;
            m.clamp(-MARGIN_CLAMP, MARGIN_CLAMP)
        } else {
            m
        }
    }

    pub fn mean_loss(&self, loss: Loss, w: &[f64], clamps: &mut u64) -> f64 {
        let s: f64 = (0..self.len()).map(|i| loss.value(self.margin(i, w, clamps))).sum();
        s / self.len() as f64
    }

    /// Mean-loss gradient over `idx`, accumulated sequentially in index order.
    pub fn grad_over(
        &self,
        loss: Loss,
        w: &[f64],
        idx: impl Iterator<Item = usize>,
        out: &mut [f64],
        clamps: &mut u64,
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut count = 0usize;
        for i in idx {
            let coef = loss.derivative(self.margin(i, w, clamps)) * self.y[i];
            for (o, x) in out.iter_mut().zip(self.x(i)) {
                *o += coef * x;
            }
            count += 1;
        }
        if count > 0 {
            let inv = 1.0 / count as f64;
            out.iter_mut().for_each(|v| *v *= inv);
        }
    }
}

/// Mean training loss at `w = [w_inv, w_sp]`.
pub fn mean_loss(data: &Dataset, loss: Loss, w: &[f64]) -> f64 {
    Design::new(data).mean_loss(loss, w, &mut 0)
}

/// Gradient of [`mean_loss`] with respect to `w`.
pub fn loss_gradient(data: &Dataset, loss: Loss, w: &[f64]) -> Vec<f64> {
    let design = Design::new(data);
    let mut g = vec![0.0; design.d];
    design.grad_over(loss, w, 0..design.len(), &mut g, &mut 0);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_stable_at_extremes() {
        assert_eq!(Loss::Logistic.value(800.0), 0.0);
        assert!((Loss::Logistic.value(-800.0) - 800.0).abs() < 1e-9);
        assert!((Loss::Logistic.value(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(Loss::Logistic.derivative(0.0), -0.5);
        assert!(Loss::Logistic.derivative(-800.0) == -1.0);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for loss in [Loss::Exponential, Loss::Logistic] {
            for m in [-3.0, -0.4, 0.0, 0.7, 5.0] {
                let h = 1e-6;
                let fd = (loss.value(m + h) - loss.value(m - h)) / (2.0 * h);
                assert!((fd - loss.derivative(m)).abs() < 1e-7 * (1.0 + fd.abs()));
            }
        }
    }
}
