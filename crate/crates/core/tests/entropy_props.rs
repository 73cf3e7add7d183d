use proptest::prelude::*;
use qwiretap::random;
use qwiretap::{conditional_mutual_information, tensor, von_neumann, LabeledOperator, Register};

fn random_state(name: &str, d: usize, rank: usize, rng: &mut random::SeededRng) -> LabeledOperator {
    LabeledOperator::state(vec![Register::new(name, d)], random::density_matrix(d, rank.clamp(1, d), rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn entropy_is_additive_on_products(da in 1usize..5, db in 1usize..5, ra in 1usize..5, rb in 1usize..5, seed: u64) {
        let mut rng = random::rng(seed);
        let a = random_state("A", da, ra, &mut rng);
        let b = random_state("B", db, rb, &mut rng);
        let joint = von_neumann(&tensor(&a, &b).unwrap()).unwrap();
        let sum = von_neumann(&a).unwrap() + von_neumann(&b).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9, "{joint} vs {sum}");
    }

    #[test]
    fn strong_subadditivity(d in prop::array::uniform3(1usize..4), rank in 1usize..9, seed: u64) {
        let mut rng = random::rng(seed);
        let total: usize = d.iter().product();
        let regs = vec![Register::new("A", d[0]), Register::new("B", d[1]), Register::new("C", d[2])];
        let rho = LabeledOperator::state(regs, random::density_matrix(total, rank.min(total), &mut rng)).unwrap();
        let cmi = conditional_mutual_information(&rho, &["A"], &["C"], &["B"]).unwrap();
        prop_assert!(cmi >= -1e-9, "I(A;C|B) = {cmi}");
    }

    #[test]
    fn entropy_is_bounded_by_log_dimension(d in 1usize..7, rank in 1usize..7, seed: u64) {
        let mut rng = random::rng(seed);
        let s = von_neumann(&random_state("A", d, rank, &mut rng)).unwrap();
        prop_assert!(s >= -1e-12 && s <= (d as f64).log2() + 1e-9);
    }
}
