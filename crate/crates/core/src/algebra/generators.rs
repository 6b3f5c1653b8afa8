use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::matrix::RationalMatrix;
use super::rational::Rational5;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub label: String,
    pub matrix: RationalMatrix,
}

/// A finite symmetric generating set with an explicit involution `s ↦ s⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<Generator>,
    inverse: Vec<usize>,
    floats: Vec<Vec<f64>>,
}

impl GeneratorSet {
    /// The empty generating set of the trivial group acting on `R^dim`.
    pub fn trivial(dim: usize) -> Self {
        GeneratorSet {
            dim,
            generators: Vec::new(),
            inverse: Vec::new(),
            floats: Vec::new(),
        }
    }

    /// Builds a generating set. `pairs` declares the involution; a label may be
    /// paired with itself when the generator is an involution.
    pub fn new(dim: usize, generators: Vec<(String, RationalMatrix)>, pairs: &[(String, String)]) -> Result<Self> {
        let problems = diagnose(dim, &generators, pairs);
        if let Some(first) = problems.into_iter().next() {
            return Err(Error::Input(first));
        }
        let index_of = |l: &str| generators.iter().position(|(g, _)| g == l).unwrap();
        let mut inverse = alloc::vec![usize::MAX; generators.len()];
        for (a, b) in pairs {
            let (ia, ib) = (index_of(a), index_of(b));
            inverse[ia] = ib;
            inverse[ib] = ia;
        }
        let floats = generators.iter().map(|(_, m)| m.to_f64()).collect();
        Ok(GeneratorSet {
            dim,
            generators: generators
                .into_iter()
                .map(|(label, matrix)| Generator { label, matrix })
                .collect(),
            inverse,
            floats,
        })
    }

    /// Convenience constructor: each listed matrix `g` together with its
    /// transpose, labelled `label` and `LABEL` (upper-cased). Only valid for
    /// orthogonal matrices.
    pub fn from_rotations(dim: usize, rotations: &[(&str, RationalMatrix)]) -> Result<Self> {
        let mut gens = Vec::new();
        let mut pairs = Vec::new();
        for (label, m) in rotations {
            let inv_label = label.to_uppercase();
            let inv = m.transpose();
            if inv == *m {
                gens.push((label.to_string(), m.clone()));
                pairs.push((label.to_string(), label.to_string()));
            } else {
                gens.push((label.to_string(), m.clone()));
                gens.push((inv_label.clone(), inv));
                pairs.push((label.to_string(), inv_label));
            }
        }
        Self::new(dim, gens, &pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn matrix(&self, i: usize) -> &RationalMatrix {
        &self.generators[i].matrix
    }

    /// Row-major floating-point copy of generator `i`.
    pub fn matrix_f64(&self, i: usize) -> &[f64] {
        &self.floats[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.generators[i].label
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }

    /// Index of the inverse of generator `i`.
    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }

    /// Declared involution as label pairs, each unordered pair listed once.
    pub fn involution_pairs(&self) -> Vec<(String, String)> {
        (0..self.len())
            .filter(|&i| self.inverse[i] >= i)
            .map(|i| (self.label(i).to_string(), self.label(self.inverse[i]).to_string()))
            .collect()
    }

    pub fn labels_of(&self, word: &[usize]) -> Vec<String> {
        word.iter().map(|&i| self.label(i).to_string()).collect()
    }

    /// Reverse of `word` with every letter replaced by its inverse.
    pub fn inverse_word(&self, word: &[usize]) -> Vec<usize> {
        word.iter().rev().map(|&i| self.inverse[i]).collect()
    }
}

/// Static checks on a candidate generating set. An empty result means
/// [`GeneratorSet::new`] will accept it.
pub fn diagnose(dim: usize, generators: &[(String, RationalMatrix)], pairs: &[(String, String)]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, (label, m)) in generators.iter().enumerate() {
        if m.dim() != dim {
            out.push(format!("generator {label}: dimension {} does not match {dim}", m.dim()));
            continue;
        }
        if m.is_identity() {
            out.push(format!("generator {label} is the identity"));
        }
        if generators[..i].iter().any(|(l, _)| l == label) {
            out.push(format!("duplicate label {label}"));
        }
        if let Some((other, _)) = generators[..i].iter().find(|(_, o)| o == m) {
            out.push(format!("generators {other} and {label} are the same matrix"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let find = |l: &str| generators.iter().find(|(g, _)| g == l);
    let mut seen: Vec<&str> = Vec::new();
    for (a, b) in pairs {
        let (Some((_, ma)), Some((_, mb))) = (find(a), find(b)) else {
            out.push(format!("involution pair ({a}, {b}) names an unknown label"));
            continue;
        };
        let labels: &[&str] = if a == b { &[a.as_str()] } else { &[a.as_str(), b.as_str()] };
        for &l in labels {
            if seen.contains(&l) {
                out.push(format!("label {l} appears in more than one involution pair"));
            }
            seen.push(l);
        }
        if !(ma * mb).is_identity() {
            out.push(format!("involution pair ({a}, {b}) is not inverse: product is not the identity"));
        }
    }
    for (label, _) in generators {
        if !seen.contains(&label.as_str()) {
            out.push(format!("generator {label} has no declared inverse: not closed under inverse"));
        }
    }
    out
}

/// Exact product of the word's matrices, left to right. The empty word is the identity.
pub fn word_eval(word: &[&str], gens: &GeneratorSet) -> Result<RationalMatrix> {
    let idx = word
        .iter()
        .map(|l| gens.index_of(l).ok_or_else(|| Error::Input(format!("unknown generator label {l:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(word_eval_indices(&idx, gens))
}

pub fn word_eval_indices(word: &[usize], gens: &GeneratorSet) -> RationalMatrix {
    let mut m = RationalMatrix::identity(gens.dim());
    for &i in word {
        m = &m * gens.matrix(i);
    }
    m
}

/// `MᵀM = I` and `det M = 1`, both checked exactly.
pub fn verify_special_orthogonal(m: &RationalMatrix) -> bool {
    (&m.transpose() * m).is_identity() && m.determinant().is_one()
}

fn q(s: &str) -> Rational5 {
    s.parse().expect("library constant")
}

fn matrix(dim: usize, entries: &[&str]) -> RationalMatrix {
    let e: Vec<Rational5> = entries.iter().map(|s| q(s)).collect();
    RationalMatrix::from_entries(dim, &e).expect("library constant")
}

/// Shipped generating sets.
pub mod library {
    use super::*;

    /// Rotation of `R^3` by `arccos(3/5)` about the z-axis.
    pub fn rotation_z() -> RationalMatrix {
        matrix(3, &["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"])
    }

    /// Rotation of `R^3` by `arccos(3/5)` about the x-axis.
    pub fn rotation_x() -> RationalMatrix {
        matrix(3, &["1", "0", "0", "0", "3/5", "-4/5", "0", "4/5", "3/5"])
    }

    /// The two `arccos(3/5)` rotations about the x- and z-axes with their
    /// inverses, acting on `S^2`. Labels `x, X, z, Z`.
    pub fn lps_s2() -> GeneratorSet {
        GeneratorSet::from_rotations(3, &[("x", rotation_x()), ("z", rotation_z())]).expect("library constant")
    }

    /// Rotation of the circle by the irrational angle `arccos(3/5)`. Labels `r, R`.
    pub fn rational_rotation_s1() -> GeneratorSet {
        GeneratorSet::from_rotations(2, &[("r", matrix(2, &["3/5", "-4/5", "4/5", "3/5"]))]).expect("library constant")
    }

    /// Quarter turn of the circle, a rotation of order 4. Labels `q, Q`.
    pub fn quarter_turn_s1() -> GeneratorSet {
        GeneratorSet::from_rotations(2, &[("q", matrix(2, &["0", "-1", "1", "0"]))]).expect("library constant")
    }

    /// Cyclic coordinate permutation of `R^dim` (order `dim`). `dim` must be
    /// odd so that the permutation is special orthogonal. Labels `c, C`.
    pub fn cyclic_permutation(dim: usize) -> Result<GeneratorSet> {
        if dim < 3 || dim % 2 == 0 {
            return Err(Error::Input(format!("cyclic permutation needs odd dim >= 3, got {dim}")));
        }
        let mut e = alloc::vec![0i64; dim * dim];
        for i in 0..dim {
            e[((i + 1) % dim) * dim + i] = 1;
        }
        GeneratorSet::from_rotations(dim, &[("c", RationalMatrix::from_integers(dim, &e)?)])
    }

    /// Looks a shipped set up by name.
    pub fn by_name(name: &str) -> Result<GeneratorSet> {
        match name {
            "lps-s2" => Ok(lps_s2()),
            "rotation-s1" => Ok(rational_rotation_s1()),
            "quarter-turn-s1" => Ok(quarter_turn_s1()),
            "cyclic-5" => cyclic_permutation(5),
            _ => {
                if let Some(d) = name.strip_prefix("trivial-") {
                    let d: usize = d.parse().map_err(|_| Error::Input(format!("bad trivial dimension in {name:?}")))?;
                    return Ok(GeneratorSet::trivial(d));
                }
                Err(Error::Input(format!("unknown generator set {name:?}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;

    #[test]
    fn word_eval_examples() {
        let g = lps_s2();
        assert!(word_eval(&[], &g).unwrap().is_identity());
        for l in ["x", "X", "z", "Z"] {
            let inv = g.label(g.inverse(g.index_of(l).unwrap())).to_string();
            assert!(word_eval(&[l, &inv], &g).unwrap().is_identity());
        }
        let zz = word_eval(&["z", "z"], &g).unwrap();
        assert_eq!(zz, matrix(3, &["-7/25", "-24/25", "0", "24/25", "-7/25", "0", "0", "0", "1"]));
        assert!(matches!(word_eval(&["y"], &g), Err(Error::Input(_))));
    }

    #[test]
    fn special_orthogonal_checks() {
        assert!(verify_special_orthogonal(&RationalMatrix::identity(3)));
        assert!(verify_special_orthogonal(&rotation_z()));
        assert!(verify_special_orthogonal(&rotation_x()));
        let flip = RationalMatrix::from_integers(3, &[1, 0, 0, 0, 1, 0, 0, 0, -1]).unwrap();
        assert!(!verify_special_orthogonal(&flip));
        let shear = RationalMatrix::from_integers(2, &[1, 1, 0, 1]).unwrap();
        assert!(!verify_special_orthogonal(&shear));
    }

    #[test]
    fn diagnostics() {
        let z = rotation_z();
        let asym = diagnose(3, &[("z".into(), z.clone())], &[]);
        assert!(asym.iter().any(|d| d.contains("not closed under inverse")));
        let wrong_pair = diagnose(3, &[("z".into(), z.clone()), ("w".into(), z.clone())], &[("z".into(), "w".into())]);
        assert!(!wrong_pair.is_empty());
        let ident = diagnose(3, &[("e".into(), RationalMatrix::identity(3))], &[("e".into(), "e".into())]);
        assert!(ident.iter().any(|d| d.contains("identity")));
        let good = diagnose(
            3,
            &[("z".into(), z.clone()), ("Z".into(), z.transpose())],
            &[("z".into(), "Z".into())],
        );
        assert!(good.is_empty(), "{good:?}");
    }

    #[test]
    fn library_sets_are_symmetric() {
        for g in [lps_s2(), rational_rotation_s1(), quarter_turn_s1(), cyclic_permutation(5).unwrap()] {
            for i in 0..g.len() {
                assert!((g.matrix(i) * g.matrix(g.inverse(i))).is_identity());
                assert!(verify_special_orthogonal(g.matrix(i)));
            }
        }
        assert!(cyclic_permutation(4).is_err());
    }
}
