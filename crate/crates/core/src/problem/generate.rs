use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{fixtures, validate, BseHamiltonian};
use crate::error::{Error, Result};
use crate::matkernel::{c64, CMatrix, STRUCTURE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    RandomComplex,
    RandomReal,
    DefectiveFixture,
    BreakdownFixture,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::RandomComplex,
        GeneratorKind::RandomReal,
        GeneratorKind::DefectiveFixture,
        GeneratorKind::BreakdownFixture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::RandomComplex => "random-complex",
            GeneratorKind::RandomReal => "random-real",
            GeneratorKind::DefectiveFixture => "defective-fixture",
            GeneratorKind::BreakdownFixture => "breakdown-fixture",
        }
    }

    pub fn is_fixture(self) -> bool {
        matches!(self, GeneratorKind::DefectiveFixture | GeneratorKind::BreakdownFixture)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Ignored by the fixture kinds.
    pub n: usize,
    pub seed: u64,
    /// Multiplies the random entries.
    pub scale: f64,
    /// Added to the diagonal of `A`, pushing the spectrum away from the imaginary axis.
    pub gap: f64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            n,
            seed,
            scale: 1.0,
            gap: 0.0,
        }
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// One-line description written as a Matrix Market comment.
    pub fn describe(&self) -> String {
        if self.kind.is_fixture() {
            format!("generated kind={}", self.kind)
        } else {
            format!(
                "generated kind={} n={} seed={} scale={} gap={}",
                self.kind, self.n, self.seed, self.scale, self.gap
            )
        }
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> CMatrix {
    // Draw row by row so the layout of the random stream is easy to reason about.
    let mut vals = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = StandardNormal.sample(rng);
        if complex {
            let im: f64 = StandardNormal.sample(rng);
            vals.push(c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
        } else {
            vals.push(c64::new(re, 0.0));
        }
    }
    CMatrix::from_fn(n, n, |i, j| vals[i * n + j])
}

pub fn generate(spec: &GeneratorSpec) -> Result<BseHamiltonian> {
    let (a, b) = match spec.kind {
        GeneratorKind::BreakdownFixture => fixtures::breakdown(),
        GeneratorKind::DefectiveFixture => fixtures::defective(),
        GeneratorKind::RandomComplex | GeneratorKind::RandomReal => {
            if spec.n == 0 {
                return Err(Error::InvalidArgument("n must be at least 1".into()));
            }
            if !spec.scale.is_finite() || spec.scale <= 0.0 {
                return Err(Error::NonPositive {
                    what: "scale",
                    value: spec.scale,
                });
            }
            if !spec.gap.is_finite() {
                return Err(Error::InvalidArgument("gap must be finite".into()));
            }
            let complex = spec.kind == GeneratorKind::RandomComplex;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let g = normal_matrix(&mut rng, spec.n, complex);
            let k = normal_matrix(&mut rng, spec.n, complex);
            let s = spec.scale * 0.5;
            let a = CMatrix::from_fn(spec.n, spec.n, |i, j| {
                let v = (g[(i, j)] + g[(j, i)].conj()) * s;
                if i == j {
                    v + spec.gap
                } else {
                    v
                }
            });
            let b = CMatrix::from_fn(spec.n, spec.n, |i, j| (k[(i, j)] + k[(j, i)]) * s);
            (a, b)
        }
    };
    validate(a, b, STRUCTURE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel;

    #[test]
    fn kind_round_trip() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.as_str().parse::<GeneratorKind>().unwrap(), k);
        }
        assert!(matches!("gaussian".parse::<GeneratorKind>(), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn random_is_deterministic() {
        let spec = GeneratorSpec::new(GeneratorKind::RandomComplex, 3, 7);
        let p = generate(&spec).unwrap();
        let q = generate(&spec).unwrap();
        assert_eq!(**p.a(), **q.a());
        assert_eq!(**p.b(), **q.b());
        let r = generate(&GeneratorSpec::new(GeneratorKind::RandomComplex, 3, 8)).unwrap();
        assert_ne!(**p.a(), **r.a());
    }

    #[test]
    fn random_real_has_no_imaginary_part() {
        let p = generate(&GeneratorSpec::new(GeneratorKind::RandomReal, 4, 1)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(p.a()[(i, j)].im, 0.0);
                assert_eq!(p.b()[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn gap_shifts_the_diagonal() {
        let base = GeneratorSpec::new(GeneratorKind::RandomComplex, 4, 2);
        let p = generate(&base).unwrap();
        let q = generate(&base.clone().with_gap(5.0)).unwrap();
        let d = &**q.a() - &**p.a();
        assert!((d - matkernel::scale(&matkernel::identity(4), c64::new(5.0, 0.0))).norm_l2() < 1e-14);
    }

    #[test]
    fn zero_size_rejected() {
        let spec = GeneratorSpec::new(GeneratorKind::RandomReal, 0, 0);
        assert!(matches!(generate(&spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fixtures_match_printed_entries() {
        let p = generate(&GeneratorSpec::new(GeneratorKind::DefectiveFixture, 0, 0)).unwrap();
        assert_eq!(p.n(), 7);
        assert_eq!(p.a()[(0, 1)], c64::new(10.378, 0.0));
        assert_eq!(p.a()[(3, 4)], c64::new(-3.7710, 2.7569));
        assert_eq!(p.b()[(4, 4)], c64::new(4.0704e-1, 6.0156e-5));
        assert_eq!(p.a()[(0, 3)], c64::new(0.0, 0.0));

        let p = generate(&GeneratorSpec::new(GeneratorKind::BreakdownFixture, 0, 0)).unwrap();
        assert_eq!(p.n(), 5);
        assert_eq!(p.a()[(0, 0)], c64::new(0.6607, 0.0));
        assert_eq!(p.b()[(4, 4)], c64::new(-0.2548, -0.7032));
        // The printed fixture is exactly Hermitian / symmetric.
        assert_eq!(p.defects, (0.0, 0.0));
    }

    #[test]
    fn printed_f5_singular_values() {
        let s = matkernel::singular_values(&fixtures::breakdown_f5()).unwrap();
        let want = [1.9376, 1.9376, 1.9376, 1.9376, 1.0];
        for (got, want) in s.iter().zip(want) {
            assert!((got - want).abs() < 1e-3, "{s:?}");
        }
    }
}
