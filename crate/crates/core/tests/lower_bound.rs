use bsg_core::lower_bound::*;
use bsg_core::Rat;

fn twice_area(cell: &LowerBoundCell) -> Rat {
    let n = 1i64 << cell.b;
    let v = cell.vertices();
    let p = |i: usize, j: usize| Rat::frac(v[i][j] as i64, n);
    let d = (p(1, 0) - p(0, 0)) * (p(2, 1) - p(0, 1)) - (p(2, 0) - p(0, 0)) * (p(1, 1) - p(0, 1));
    d.abs()
}

#[test]
fn triangles_tile_the_simplex() {
    for b in 1..=3 {
        let cells = triangulate(b).unwrap();
        let total: Rat = cells.iter().map(twice_area).sum();
        assert_eq!(total, Rat::one());
        for (i, a) in cells.iter().enumerate() {
            let ra = a.region();
            let mut expected: Vec<Vec<Rat>> = a
                .vertices()
                .iter()
                .map(|v| v.iter().map(|&c| Rat::frac(c as i64, 1 << b)).collect())
                .collect();
            expected.sort();
            assert_eq!(ra.vertices().unwrap(), expected);
            if b <= 2 {
                for c in &cells[i + 1..] {
                    assert!(!ra.meet(&c.region()).unwrap().is_full_dim());
                }
            }
        }
    }
}

#[test]
fn families_verify() {
    for b in 1..=2 {
        for cell in triangulate(b).unwrap() {
            let r = verify_construction(&build_instance(&cell), &cell).unwrap();
            assert!(r.passed(), "B={b} cell {}: {r:?}", cell.cell_id);
            assert!(r.max_bits <= 2 * b as u64 + 3);
        }
    }
}

#[test]
fn sweep_regret_scales_with_the_family() {
    let small = hardness_demo(2, 8, 64, 5).unwrap();
    let large = hardness_demo(3, 32, 64, 5).unwrap();
    let ratio = (&large.mean_regret / &small.mean_regret).to_f64();
    assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn demo_is_deterministic() {
    let a = hardness_demo(2, 3, 40, 11).unwrap();
    let b = hardness_demo(2, 3, 40, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
