//! Flat term list for fast value / gradient / Hessian evaluation inside the
//! sphere optimizers.

use crate::linalg::Mat;
use crate::poly::HomPoly;
use crate::scalar::Scalar;

pub(crate) struct CompiledPoly<T> {
    n: usize,
    terms: Vec<(T, Vec<(usize, u32)>)>,
}

impl<T: Scalar> CompiledPoly<T> {
    pub(crate) fn new(p: &HomPoly<T>, scale: T) -> Self {
        let terms = p
            .terms()
            .map(|(e, &c)| {
                let support = e
                    .as_slice()
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(i, &a)| (i, a))
                    .collect();
                (c * scale, support)
            })
            .collect();
        Self { n: p.n(), terms }
    }

    pub(crate) fn value(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .map(|(c, s)| s.iter().fold(*c, |acc, &(i, a)| acc * x[i].powi(a as i32)))
            .sum()
    }

    /// Value and gradient.
    pub(crate) fn value_grad(&self, x: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut val = T::zero();
        for (c, s) in &self.terms {
            val = val + s.iter().fold(*c, |acc, &(i, a)| acc * x[i].powi(a as i32));
            for (pos, &(i, a)) in s.iter().enumerate() {
                let mut t = *c * T::lit(a as f64) * x[i].powi(a as i32 - 1);
                for (q, &(j, b)) in s.iter().enumerate() {
                    if q != pos {
                        t = t * x[j].powi(b as i32);
                    }
                }
                grad[i] = grad[i] + t;
            }
        }
        val
    }

    pub(crate) fn hessian(&self, x: &[T]) -> Mat<T> {
        let mut h = Mat::zeros(self.n, self.n);
        for (c, s) in &self.terms {
            for (p1, &(i, a)) in s.iter().enumerate() {
                // diagonal
                if a >= 2 {
                    let mut t = *c * T::lit((a * (a - 1)) as f64) * x[i].powi(a as i32 - 2);
                    for (q, &(j, b)) in s.iter().enumerate() {
                        if q != p1 {
                            t = t * x[j].powi(b as i32);
                        }
                    }
                    h[(i, i)] = h[(i, i)] + t;
                }
                for (p2, &(j, b)) in s.iter().enumerate().skip(p1 + 1) {
                    let mut t = *c
                        * T::lit((a * b) as f64)
                        * x[i].powi(a as i32 - 1)
                        * x[j].powi(b as i32 - 1);
                    for (q, &(l, e)) in s.iter().enumerate() {
                        if q != p1 && q != p2 {
                            t = t * x[l].powi(e as i32);
                        }
                    }
                    h[(i, j)] = h[(i, j)] + t;
                    h[(j, i)] = h[(j, i)] + t;
                }
            }
        }
        h
    }
}
