use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use treehom::construct::decompose;
use treehom::digraph::Walk;
use treehom::generate::{random_path, GenConfig};
use treehom::pattern::detect_pattern;
use treehom::waves::{is_wave, path_constructibility_check, path_derivation, wave_decompose, BlockKind, Block};

fn walk(forward: Vec<bool>) -> Walk {
    Walk::new((0..=forward.len()).collect(), forward)
}

/// Direction changes with probability 1 - bias, so high bias gives long runs.
fn biased_path(rng: &mut SplitMix64, n: usize, bias: f64) -> Walk {
    let mut dir = rng.gen_bool(0.5);
    let forward = (1..n)
        .map(|_| {
            if !rng.gen_bool(bias) {
                dir = !dir;
            }
            dir
        })
        .collect();
    walk(forward)
}

fn sample_paths(count: usize, seed: u64) -> Vec<Walk> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|s| {
            let n = rng.gen_range(1..=40);
            if s % 5 == 0 {
                let g = random_path(&GenConfig::new(rng.gen(), n));
                Walk::from_vertices(&g, &(0..n).collect::<Vec<_>>()).unwrap()
            } else {
                biased_path(&mut rng, n, [0.5, 0.7, 0.85, 0.95][s % 4])
            }
        })
        .collect()
}

fn assert_wave_blocks(w: &Walk, blocks: &[Block]) {
    let hs: Vec<usize> = blocks.iter().filter(|b| b.kind == BlockKind::Q).map(|b| b.height).collect();
    for pair in hs.windows(2) {
        assert!(pair[0] > pair[1], "{hs:?}");
    }
    assert_eq!(blocks.first().unwrap().start, 0);
    assert_eq!(blocks.last().unwrap().end, w.len());
    for pair in blocks.windows(2) {
        assert_eq!(pair[0].end, pair[1].start);
    }
    assert!(is_wave(w));
}

#[test]
fn three_characterizations_agree() {
    let paths = sample_paths(4000, 11);
    let mut free = 0;
    for (i, p) in paths.iter().enumerate() {
        let t = p.to_digraph();
        let pattern_free = detect_pattern(&t).unwrap().is_none();
        free += usize::from(pattern_free);
        let d = wave_decompose(p);
        assert_eq!(d.is_ok(), pattern_free, "sample {i}: {:?} {:?}", p.forward, d.err());
        assert_eq!(path_constructibility_check(p), pattern_free, "sample {i}: {:?}", p.forward);
        assert_eq!(path_derivation(p).is_some(), pattern_free, "sample {i}");
        assert_eq!(decompose(&t).is_ok(), pattern_free, "sample {i}");
        if let Ok(d) = d {
            assert_eq!(d.reassemble().unwrap(), *p, "sample {i}");
            assert_wave_blocks(&d.u, &d.u_blocks);
            assert_wave_blocks(&d.v, &d.v_blocks);
            let a = d.a.height();
            assert!(d.a.vertices.len() == 1 || (d.a.vertices.len() == 3 && a == 1 && d.a.levels()[0] == 0));
        }
    }
    assert!(free > 1000 && free < 3900, "{free}");
}

#[test]
fn path_derivations_realize_the_path() {
    for p in sample_paths(1500, 12) {
        if let Some(d) = path_derivation(&p) {
            let r = d.realize().unwrap();
            assert_eq!(r.original_arcs().len(), p.len());
            let mut want = p.to_digraph().sorted_arcs();
            want.sort_unstable();
            let mut got = r.original_arcs();
            got.sort_unstable();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn reversal_toggles_flag() {
    for p in sample_paths(1500, 13) {
        let r = p.flipped();
        let (a, b) = (wave_decompose(&p), wave_decompose(&r));
        assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            if !p.is_empty() {
                assert_ne!(a.reversed, b.reversed, "{:?}", p.forward);
            }
            assert_eq!(b.reassemble().unwrap(), r);
        }
    }
}

#[test]
fn equal_height_blocks_are_not_a_wave() {
    let w = walk(vec![true, true, false, true, false, false, true, true]);
    assert!(!is_wave(&w));
    assert!(wave_decompose(&w).is_err());
}

#[test]
fn single_full_height_block_with_valley_connector() {
    // down 2 then a Z3 valley then up 3
    let w = walk(vec![false, false, true, false, true, true, true]);
    let d = wave_decompose(&w).unwrap();
    assert_eq!(d.a.vertices, vec![2, 3, 4]);
    assert_eq!(d.reassemble().unwrap(), w);
}

proptest! {
    #[test]
    fn decompositions_reassemble(forward in proptest::collection::vec(any::<bool>(), 0..40)) {
        let p = walk(forward);
        if let Ok(d) = wave_decompose(&p) {
            prop_assert_eq!(d.reassemble().unwrap(), p.clone());
            prop_assert!(is_wave(&d.u) && is_wave(&d.v));
        }
        prop_assert_eq!(wave_decompose(&p).is_ok(), path_constructibility_check(&p));
    }
}
