//! Seeded random polynomial generators.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::low_rank::hard_family;
use crate::poly::{compositions, multinomial_unchecked, Exponent, HomPoly};
use crate::scalar::Scalar;
use crate::sphere::random_unit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenModel {
    /// `p_α = g_α·√binom(d; α)`: isotropic in the Bombieri geometry.
    BombieriGaussian,
    /// A handful of random monomials with Gaussian coefficients.
    Sparse { terms: usize },
    /// `Σ xᵢ²` (degree forced to 2).
    HardFamily,
    /// `Σᵢ (uᵢ·x)^d` over `rank` random unit directions, plus `noise` times a
    /// unit-norm Bombieri-Gaussian polynomial.
    PlantedLowRank { rank: usize, noise: f64 },
}

impl fmt::Display for GenModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BombieriGaussian => write!(f, "bombieri-gaussian"),
            Self::Sparse { terms } => write!(f, "sparse({terms})"),
            Self::HardFamily => write!(f, "hard-family"),
            Self::PlantedLowRank { rank, .. } => write!(f, "planted-lowrank({rank})"),
        }
    }
}

/// Parses `name` or `name(arg)` / `name:arg`.
impl FromStr for GenModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = if let Some(open) = s.find('(') {
            let close = s
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced model string `{s}`")))?;
            (&s[..open], Some(&close[open + 1..]))
        } else if let Some((a, b)) = s.split_once(':') {
            (a, Some(b))
        } else {
            (s, None)
        };
        let num = |default: usize| -> Result<usize> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad model argument `{a}`"))),
            }
        };
        match name {
            "bombieri-gaussian" => Ok(Self::BombieriGaussian),
            "sparse" => Ok(Self::Sparse { terms: num(4)? }),
            "hard-family" => Ok(Self::HardFamily),
            "planted-lowrank" => Ok(Self::PlantedLowRank {
                rank: num(1)?,
                noise: 0.0,
            }),
            other => Err(Error::Parse(format!("unknown model `{other}`"))),
        }
    }
}

fn normal<T: Scalar>(rng: &mut impl Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn bombieri_gaussian<T: Scalar>(n: usize, d: u32, rng: &mut impl Rng) -> Result<HomPoly<T>> {
    let mut p = HomPoly::zero(n, d)?;
    let mut alpha = vec![0u32; n];
    compositions(&mut alpha, 0, d, &mut |a| {
        let w = T::lit(multinomial_unchecked(a) as f64).sqrt();
        p.add_term(Exponent::new(a.to_vec()), normal::<T>(rng) * w);
    });
    Ok(p)
}

pub fn sparse<T: Scalar>(n: usize, d: u32, terms: usize, rng: &mut impl Rng) -> Result<HomPoly<T>> {
    let mut p = HomPoly::zero(n, d)?;
    for _ in 0..terms {
        let mut a = vec![0u32; n];
        for _ in 0..d {
            a[rng.random_range(0..n)] += 1;
        }
        p.add_term(Exponent::new(a), normal::<T>(rng));
    }
    Ok(p)
}

pub fn planted_lowrank<T: Scalar>(
    n: usize,
    d: u32,
    rank: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<HomPoly<T>> {
    let mut p = HomPoly::zero(n, d)?;
    for _ in 0..rank {
        let u: Vec<T> = random_unit(rng, n);
        p = p.add(&HomPoly::pow_linear(&u, d)?)?;
    }
    if noise > 0.0 {
        let g = bombieri_gaussian::<T>(n, d, rng)?;
        let gn = g.bombieri_norm();
        p = p.add_scaled(&g, T::lit(noise) / gn)?;
    }
    Ok(p)
}

/// Generates a polynomial from `model` with a `ChaCha8` stream seeded by `seed`.
pub fn generate<T: Scalar>(model: GenModel, n: usize, d: u32, seed: u64) -> Result<HomPoly<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match model {
        GenModel::BombieriGaussian => bombieri_gaussian(n, d, &mut rng),
        GenModel::Sparse { terms } => sparse(n, d, terms, &mut rng),
        GenModel::HardFamily => hard_family(n),
        GenModel::PlantedLowRank { rank, noise } => planted_lowrank(n, d, rank, noise, &mut rng),
    }
}
