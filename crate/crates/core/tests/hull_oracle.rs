use gausspoly::hull::{self, euler_defect, is_vertex_oracle, triangulated_hull};
use gausspoly::{convex_hull, sample_poisson_gaussian, PointSet, SeedPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet {
    let mut pts = PointSet::new(d);
    for _ in 0..n {
        let p: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        pts.push(&p);
    }
    pts
}

#[test]
fn vertex_sets_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for inst in 0..400 {
        let d = 2 + inst % 3;
        let n = rng.random_range(d + 1..=30);
        let pts = gaussian_cloud(&mut rng, n, d);
        let p = convex_hull(&pts).unwrap();
        let oracle: Vec<usize> = (0..n).filter(|&i| is_vertex_oracle(&pts, i)).collect();
        assert_eq!(p.vertex_indices(), oracle, "instance {inst}, d = {d}, n = {n}");
        assert_eq!(euler_defect(&p.f_vector), 0);
        if d == 3 {
            let f0 = p.f_vector[0];
            assert_eq!(p.f_vector[1], 3 * f0 - 6);
            assert_eq!(p.f_vector[2], 2 * f0 - 4);
        }
    }
}

#[test]
fn twenty_points_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = gaussian_cloud(&mut rng, 20, 2);
    let p = convex_hull(&pts).unwrap();
    for i in 0..20 {
        assert_eq!(p.vertex_indices().contains(&i), is_vertex_oracle(&pts, i));
    }
    assert_eq!(p.f_vector[0], p.f_vector[1]);
}

#[test]
fn non_vertices_lie_inside_every_facet() {
    let s = sample_poisson_gaussian(2000.0, 4, SeedPath::new(3)).unwrap();
    let p = convex_hull(&s.points).unwrap();
    let verts = p.vertex_indices();
    for (i, x) in s.points.iter().enumerate() {
        if verts.binary_search(&i).is_err() {
            assert!(hull::contains_strictly(&p, x));
        }
    }
    assert_eq!(euler_defect(&p.f_vector), 0);
}

#[test]
fn incidence_double_counts_faces() {
    let s = sample_poisson_gaussian(500.0, 3, SeedPath::new(9)).unwrap();
    let p = convex_hull(&s.points).unwrap();
    for j in 0..3 {
        let total: usize = hull::incidence_counts(&p, j).iter().sum();
        assert_eq!(total as u64, (j as u64 + 1) * p.f_vector[j]);
        let direct: usize = p.vertex_indices().iter().map(|&v| hull::vertex_face_incidence(&p, v, j).unwrap()).sum();
        assert_eq!(direct, total);
    }
}

#[test]
fn planar_area_matches_hit_or_miss() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pts = gaussian_cloud(&mut rng, 60, 2);
    let p = convex_hull(&pts).unwrap();
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for v in &p.vertices {
        for k in 0..2 {
            lo[k] = lo[k].min(v.coords[k]);
            hi[k] = hi[k].max(v.coords[k]);
        }
    }
    let shots = 1_000_000;
    let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let hits = (0..shots)
        .filter(|_| {
            let x = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
            hull::contains_strictly(&p, &x)
        })
        .count();
    let frac = hits as f64 / shots as f64;
    let est = frac * box_area;
    let se = box_area * (frac * (1.0 - frac) / shots as f64).sqrt();
    assert!((est - p.volume).abs() <= 3.0 * se, "{est} vs {} (se {se})", p.volume);
}

#[test]
fn interior_point_leaves_volume_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in 2..=5 {
        let pts = gaussian_cloud(&mut rng, 40, d);
        let p = convex_hull(&pts).unwrap();
        let mut more = pts.clone();
        more.push(&hull::vertex_centroid(&p));
        let q = convex_hull(&more).unwrap();
        assert_eq!(p.vertex_indices(), q.vertex_indices());
        assert!((p.volume - q.volume).abs() <= 1e-12 * p.volume);
    }
}

#[test]
fn six_dimensional_hull_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = gaussian_cloud(&mut rng, 80, 6);
    let p = convex_hull(&pts).unwrap();
    assert_eq!(euler_defect(&p.f_vector), 0);
    let t = triangulated_hull(&pts).unwrap();
    assert_eq!(p, t);
}
