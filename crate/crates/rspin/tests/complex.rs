mod common;

use rspin::complex_builder::{
    build_complex, cell_components, solve_orientation_cocycle, topology_report, BuildError,
};
use rspin::orientation::Sign;
use rspin::point_insertion::BoundaryType;

#[test]
fn circle_cells_split_six_and_six() {
    let (r, h, b, i) = common::CIRCLE;
    let x = build_complex(r, h, b, i).unwrap();
    let single = x.cells.iter().filter(|c| c.components().len() == 1).count();
    assert_eq!((single, x.cells.len() - single), (6, 6));
    assert_eq!(x.pairs.len() * 2, 24);
    assert!(x.free.is_empty());
}

#[test]
fn sphere_cells_by_component_count() {
    let (r, h, b, i) = common::SPHERE;
    let x = build_complex(r, h, b, i).unwrap();
    let mut by = [0; 4];
    for c in &x.cells {
        by[c.components().len()] += 1;
    }
    assert_eq!(by, [0, 2, 8, 6]);
    for comp in cell_components(&x) {
        let hex: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&c| x.facets[c].len() == 6)
            .collect();
        assert_eq!(hex.len(), 2);
    }
}

#[test]
fn every_facet_is_paired_or_free() {
    for (r, h, b, i) in [common::CIRCLE, common::SPHERE] {
        let x = build_complex(r, h, b, i).unwrap();
        let mut seen = std::collections::BTreeMap::new();
        for p in &x.pairs {
            *seen.entry(p.bi).or_insert(0) += 1;
            *seen.entry(p.ai).or_insert(0) += 1;
        }
        for &(c, f, k) in &x.free {
            assert!(matches!(
                k,
                BoundaryType::Cb | BoundaryType::R | BoundaryType::NsPlus
            ));
            *seen.entry((c, f)).or_insert(0) += 1;
        }
        let total: usize = x.facets.iter().map(|f| f.len()).sum();
        assert_eq!(seen.len(), total);
        assert!(seen.values().all(|&n| n == 1));
    }
}

#[test]
fn signs_and_cocycle() {
    for (r, h, b, i) in [common::CIRCLE, common::SPHERE] {
        let x = build_complex(r, h, b, i).unwrap();
        assert!(x.pairs.iter().all(|p| p.sign.sign == Sign::Minus));
        let s = solve_orientation_cocycle(&x).unwrap();
        // s(C) s(D) = +1 along every pair, so the cocycle is constant per component.
        for p in &x.pairs {
            assert_eq!(s[p.bi.0], s[p.ai.0]);
        }
    }
}

#[test]
fn one_dimensional_complexes_with_free_boundary() {
    // Closed components are circles and the others are segments.
    for (r, h, b, i) in common::moduli_params(&[3, 4, 5], 4, 1, 1)
        .into_iter()
        .filter(|p| p.2.len() + 2 * p.3.len() == 4)
    {
        let x = build_complex(r, h, &b, &i).unwrap();
        let t = topology_report(&x);
        assert!(t.perfect_matching, "{r} {h} {b:?} {i:?}");
        assert!(t.manifold_check);
        assert!(t.all_pairs_opposite);
        assert_eq!(t.closed, x.free.is_empty());
        let free_total: usize = t.free_census.values().sum();
        assert_eq!(free_total, x.free.len());
        for c in &t.components {
            assert!(
                c.euler == 0 || c.euler == 1,
                "1-dim component has euler {}",
                c.euler
            );
            assert_eq!(c.closed, c.euler == 0, "{r} {h} {b:?} {i:?}: {c:?}");
        }
    }
}

#[test]
fn two_dimensional_complexes_are_surfaces() {
    for (r, h, b, i) in common::moduli_params(&[2, 3, 4], 3, 1, 2)
        .into_iter()
        .filter(|p| p.2.len() + 2 * p.3.len() == 5)
    {
        let x = build_complex(r, h, &b, &i).unwrap_or_else(|e| panic!("{r} {h} {b:?} {i:?}: {e}"));
        let t = topology_report(&x);
        assert!(t.perfect_matching && t.manifold_check && t.all_pairs_opposite);
        for c in &t.components {
            if c.closed {
                // Orientable closed surfaces have even euler characteristic at most 2.
                assert!(
                    c.euler <= 2 && c.euler % 2 == 0,
                    "{r} {h} {b:?} {i:?}: {}",
                    c.euler
                );
            }
        }
    }
}

#[test]
fn empty_and_out_of_range() {
    let x = build_complex(9, 0, &[7, 7], &[]).unwrap();
    assert!(x.cells.is_empty());
    assert_eq!(topology_report(&x).euler, 0);
    assert!(matches!(
        build_complex(2, 0, &[0; 6], &[]),
        Err(BuildError::UnsupportedDimension(3))
    ));
}
