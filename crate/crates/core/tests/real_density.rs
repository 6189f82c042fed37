use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubic_core::local_arith::{leray_density_real, RealDensityOptions, RealRegion, SurfaceModel};

fn load(name: &str) -> SurfaceModel {
    let path = format!("{}/../../data/surfaces/{name}.surface", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

fn opts(samples: u64, seed: u64) -> RealDensityOptions {
    RealDensityOptions { samples, seed, ..Default::default() }
}

#[test]
fn published_component_measures() {
    let s = load("sqrtm15");
    let r = leray_density_real(&s, RealRegion::Full, opts(1 << 17, 11));
    assert!(12 * r.samples_per_chart >= 1_000_000);
    assert_eq!(r.components.len(), 2);
    for (c, published) in r.components.iter().zip([1.9179, 1.1673]) {
        assert!((c.value - published).abs() < 3.0 * c.stderr, "{c:?} vs {published}");
    }
    let single = leray_density_real(&load("sqrtm5"), RealRegion::Full, opts(1 << 15, 3));
    assert_eq!(single.components.len(), 1);
}

#[test]
fn empty_region_and_scaling() {
    let s = load("sqrtm15");
    let e = leray_density_real(&s, RealRegion::Empty, opts(1 << 15, 1));
    assert_eq!(e.total.value, 0.0);
    let a = leray_density_real(&s, RealRegion::Full, opts(1 << 15, 5));
    let b = leray_density_real(&s, RealRegion::Full, opts(1 << 16, 5));
    let ratio = b.total.stderr / a.total.stderr;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1, "{ratio}");
}

#[test]
fn reproducible_across_thread_counts() {
    let s = load("sqrt10");
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| leray_density_real(&s, RealRegion::Full, opts(40_000, 9)))
    };
    assert_eq!(run(1), run(4));
}

/// `τ_∞ = Σ_i ∫_{x_i = 1} δ(F)`, estimated as `32·P(|F(y)| < ε)/(2ε)` for `y`
/// uniform on the four faces `x_i = 1` of the cube (total volume 32).
#[test]
fn agrees_with_face_shell_oracle() {
    for name in ["sqrtm15", "sqrt10"] {
        let s = load(name);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, eps) = (8_000_000u64, 0.01);
        let hits = (0..n)
            .filter(|_| {
                let mut x = [(); 4].map(|_| rng.gen_range(-1.0..1.0));
                x[rng.gen_range(0..4)] = 1.0;
                s.eval_f64(&x).abs() < eps
            })
            .count() as f64;
        let frac = hits / n as f64;
        let oracle = 32.0 * frac / (2.0 * eps);
        let oracle_err = 32.0 * (frac / n as f64).sqrt() / (2.0 * eps);
        let r = leray_density_real(&s, RealRegion::Full, opts(1 << 16, 4));
        let tol = 3.0 * (oracle_err.powi(2) + r.total.stderr.powi(2)).sqrt();
        assert!((r.total.value - oracle).abs() < tol, "{name}: {} vs {oracle} ± {oracle_err}", r.total.value);
    }
}
