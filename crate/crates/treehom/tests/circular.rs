use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use treehom::circular::{
    extract_witness, has_circular_n_exhaustive, implication_check, protects, protects_split,
    verify_circular_n, CircularNWitness,
};
use treehom::digraph::{Digraph, Walk};
use treehom::generate::{random_tree, GenConfig};
use treehom::pattern::detect_pattern;

#[test]
fn extracted_witnesses_verify() {
    let mut fired = 0;
    for seed in 0..600u64 {
        let t = random_tree(&GenConfig::new(seed, 4 + seed as usize % 40));
        if let Some(w) = extract_witness(&t).unwrap() {
            fired += 1;
            assert!(verify_circular_n(&w, &t), "seed {seed}");
            assert!(implication_check(&w, &t), "seed {seed}");
        }
    }
    assert!(fired > 100);
}

#[test]
fn exhaustive_circular_n_matches_recognizer() {
    for seed in 0..300u64 {
        let t = random_tree(&GenConfig::new(seed, 2 + seed as usize % 10));
        assert_eq!(
            has_circular_n_exhaustive(&t),
            detect_pattern(&t).unwrap().is_some(),
            "seed {seed}: {:?}",
            t.sorted_arcs()
        );
    }
}

#[test]
fn witnesses_reverse_with_the_tree() {
    for seed in 0..200u64 {
        let t = random_tree(&GenConfig::new(seed, 12));
        if let Some(w) = extract_witness(&t).unwrap() {
            let r = t.reversed();
            let rw = CircularNWitness { x: w.x.flipped(), y: w.y.flipped(), z: w.z.flipped() };
            assert!(verify_circular_n(&rw, &r), "seed {seed}");
        }
    }
}

fn random_walk(rng: &mut SplitMix64, t: &Digraph, start: usize, steps: &[bool]) -> Option<Walk> {
    let mut vs = vec![start];
    for &f in steps {
        let cur = *vs.last().unwrap();
        let nb = if f { t.out_neighbors(cur) } else { t.in_neighbors(cur) };
        if nb.is_empty() {
            return None;
        }
        vs.push(nb[rng.gen_range(0..nb.len())]);
    }
    Some(Walk::new(vs, steps.to_vec()))
}

#[test]
fn protects_direct_matches_split() {
    let mut rng = SplitMix64::seed_from_u64(11);
    let mut checked = 0;
    while checked < 3000 {
        let t = random_tree(&GenConfig::new(rng.gen(), rng.gen_range(2..=15)));
        let len = rng.gen_range(0..=12);
        let steps: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
        let mut walks = Vec::new();
        for _ in 0..3 {
            let start = rng.gen_range(0..t.n());
            walks.extend(random_walk(&mut rng, &t, start, &steps));
        }
        let [x, y, z] = &walks[..] else { continue };
        assert_eq!(protects(z, y, x, &t).unwrap(), protects_split(z, y, x, &t).unwrap());
        checked += 1;
    }
}
