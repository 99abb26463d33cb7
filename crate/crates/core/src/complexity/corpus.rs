//! The seeded corpus of finite classes the lemma verifiers run against.
//!
//! A handful of canonical classes with known dimensions anchor the corpus;
//! the remainder are seeded random tables kept small enough that every
//! verifier (exact Rademacher, hull enumeration, exhaustive shattering)
//! stays well inside its capacity limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FiniteClassTable;

/// A corpus entry: the tabulated class plus fixed `{+1,-1}` labels for the
/// loss-composition checks.
#[derive(Debug, Clone)]
pub struct VerificationClass {
    pub name: String,
    pub table: FiniteClassTable,
    pub labels: Vec<i8>,
}

impl VerificationClass {
    /// Behavior rows as reals: `{-1,+1}` for binary tables, raw label values
    /// otherwise.
    pub fn real_rows(&self) -> Vec<Vec<f64>> {
        if self.table.arity() == 2 {
            self.table.to_signs().expect("binary table")
        } else {
            self.table.to_reals()
        }
    }
}

fn canonical(name: &str, rows: Vec<Vec<u32>>, arity: u32) -> VerificationClass {
    let table = FiniteClassTable::new(rows, arity).expect("canonical class is well-formed");
    let labels = (0..table.points())
        .map(|i| if i.is_multiple_of(2) { 1 } else { -1 })
        .collect();
    VerificationClass {
        name: format!("canonical/{name}"),
        table,
        labels,
    }
}

/// `count` classes, deterministic in `seed`. The first five are canonical;
/// the rest are random tables with `2 <= m <= 12`, at most 5 hypotheses, and
/// label arity in `{2, 3, 4}`.
pub fn verification_corpus(seed: u64, count: usize) -> Vec<VerificationClass> {
    let mut out = Vec::with_capacity(count);

    let full_binary_3: Vec<Vec<u32>> = (0..8u32)
        .map(|mask| (0..3).map(|i| mask >> i & 1).collect())
        .collect();
    let canon = [
        canonical("singleton", vec![vec![0, 1]], 2),
        canonical("antipodal-pair", vec![vec![1, 1], vec![0, 0]], 2),
        canonical("full-binary-m3", full_binary_3, 2),
        canonical(
            "all-binary-m2",
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            2,
        ),
        canonical("three-labels-one-point", vec![vec![0], vec![1], vec![2]], 3),
    ];
    for c in canon {
        if out.len() < count {
            out.push(c);
        }
    }

    let mut idx = out.len();
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64);
        let m = rng.random_range(2..=12usize);
        let arity = rng.random_range(2..=4u32);
        let n = rng.random_range(1..=5usize);
        let behaviors: Vec<Vec<u32>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0..arity)).collect())
            .collect();
        let table = FiniteClassTable::new(behaviors, arity).expect("generated rows are in range");
        let labels = (0..m)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        out.push(VerificationClass {
            name: format!("random/{idx:02}"),
            table,
            labels,
        });
        idx += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_sized() {
        let a = verification_corpus(7, 50);
        let b = verification_corpus(7, 50);
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.table, y.table);
            assert_eq!(x.labels, y.labels);
            assert_eq!(x.name, y.name);
        }
    }

    #[test]
    fn corpus_respects_verifier_capacities() {
        for class in verification_corpus(123, 60) {
            assert!(class.table.points() <= 12, "{}", class.name);
            assert!(class.table.hypotheses() <= 16, "{}", class.name);
            assert_eq!(class.labels.len(), class.table.points());
        }
    }

    #[test]
    fn different_seeds_change_the_random_tail() {
        let a = verification_corpus(1, 10);
        let b = verification_corpus(2, 10);
        assert!(a.iter().zip(&b).skip(5).any(|(x, y)| x.table != y.table));
    }
}
