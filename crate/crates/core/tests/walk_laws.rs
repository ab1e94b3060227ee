//! Monte Carlo checks of the walk generators against moments computed by hand
//! or by enumeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use roughwalk::walks::{
    dirichlet_kappa, gen_annealed_rwre_walk, gen_iid_walk, gen_periodic_env_walk, gen_rotating_drift, gen_rwre_walk,
    sample_dirichlet_site, DirichletParams, EnvironmentLaw, LazyEnvironment, SiteDistribution, StepLaw,
};
use roughwalk::DiscretePath;

/// Mean and covariance of `X_n` over replicas.
fn endpoint_moments(paths: impl Iterator<Item = DiscretePath<f64>>) -> ([f64; 2], [[f64; 2]; 2], usize) {
    let mut ends = Vec::new();
    for p in paths {
        let e = p.increment(0, p.len()).unwrap();
        ends.push([e[0], e[1]]);
    }
    let k = ends.len() as f64;
    let mean = [ends.iter().map(|e| e[0]).sum::<f64>() / k, ends.iter().map(|e| e[1]).sum::<f64>() / k];
    let mut cov = [[0.0; 2]; 2];
    for e in &ends {
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += (e[i] - mean[i]) * (e[j] - mean[j]) / (k - 1.0);
            }
        }
    }
    (mean, cov, ends.len())
}

/// Per-step covariance of a finite law by enumeration.
fn law_covariance(law: &StepLaw) -> [[f64; 2]; 2] {
    let m = law.mean();
    let mut c = [[0.0; 2]; 2];
    for (s, w) in law.atoms() {
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += w * (s[i] - m[i]) * (s[j] - m[j]);
            }
        }
    }
    c
}

#[test]
fn srw_endpoint_moments() {
    let law = StepLaw::simple_random_walk(2);
    let per_step = law_covariance(&law);
    assert_eq!(per_step, [[0.5, 0.0], [0.0, 0.5]]);
    let n = 10_000;
    let replicas = 10_000;
    let (mean, cov, _) = endpoint_moments((0..replicas).map(|r| gen_iid_walk(&law, n, 900 + r).unwrap()));
    let bound = 3.0 / ((n * replicas as usize) as f64).sqrt();
    for m in mean {
        assert!((m / n as f64).abs() < bound, "{mean:?}");
    }
    for i in 0..2 {
        assert!((cov[i][i] / n as f64 - 0.5).abs() < 0.025, "{cov:?}");
    }
    assert!((cov[0][1] / n as f64).abs() < 0.025);
}

#[test]
fn rotating_drift_speed_and_covariance() {
    let path = gen_rotating_drift(0.7, 100_000, 3).unwrap();
    let end = path.increment(0, path.len()).unwrap();
    // Every four steps the drift cancels, so X_n stays within one unit of a
    // zero-mean martingale.
    assert!(end.iter().all(|x| (x / 1e5).abs() < 0.01), "{end:?}");

    for p in [0.3, 0.7] {
        let target = 2.0 * p * (1.0 - p);
        let n = 1_000;
        let (_, cov, _) = endpoint_moments((0..10_000).map(|r| gen_rotating_drift(p, n, 50_000 + r).unwrap()));
        for i in 0..2 {
            assert!((cov[i][i] / n as f64 / target - 1.0).abs() < 0.05, "p={p}: {cov:?}");
        }
    }
}

#[test]
fn rotating_drift_at_one_is_a_loop() {
    let path = gen_rotating_drift(1.0, 8, 0).unwrap();
    let expected = [[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]];
    for (k, s) in path.steps().enumerate() {
        assert_eq!(s, expected[k % 4]);
    }
    assert_eq!(gen_periodic_env_walk(1.0, 8, 5).unwrap(), path);
}

#[test]
fn periodic_environment_has_zero_speed() {
    let path = gen_periodic_env_walk(0.7, 100_000, 4).unwrap();
    let end = path.increment(0, path.len()).unwrap();
    assert!(end.iter().all(|x| (x / 1e5).abs() < 0.01), "{end:?}");
}

#[test]
fn dirichlet_sites_concentrate_for_large_alpha() {
    let params = DirichletParams::new(vec![1e4; 4]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let w = sample_dirichlet_site(&params, &mut rng);
        worst = worst.max(w.probs().iter().map(|p| (p - 0.25).abs()).fold(0.0, f64::max));
    }
    assert!(worst < 0.02, "{worst}");
}

fn component_means(alpha: Vec<f64>, samples: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let params = DirichletParams::new(alpha).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<SiteDistribution> = (0..samples).map(|_| sample_dirichlet_site(&params, &mut rng)).collect();
    let k = samples as f64;
    let means: Vec<f64> = (0..4).map(|e| draws.iter().map(|w| w.probs()[e]).sum::<f64>() / k).collect();
    let ses = (0..4)
        .map(|e| {
            let var = draws.iter().map(|w| (w.probs()[e] - means[e]).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect();
    (means, ses)
}

#[test]
fn dirichlet_component_means() {
    for alpha in [vec![9.0, 1.0, 1.0, 1.0], vec![0.3, 2.0, 0.5, 1.2]] {
        let total: f64 = alpha.iter().sum();
        let (means, ses) = component_means(alpha.clone(), 10_000, 2);
        for e in 0..4 {
            assert!((means[e] - alpha[e] / total).abs() < 3.0 * ses[e], "{alpha:?}: {means:?}");
        }
    }
    let (means, ses) = component_means(vec![2.0; 4], 10_000, 3);
    for e in 1..4 {
        let se = (ses[0].powi(2) + ses[e].powi(2)).sqrt();
        assert!((means[0] - means[e]).abs() < 3.0 * se, "{means:?}");
    }
}

#[test]
fn deterministic_environment_moves_right() {
    let site = SiteDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let mut env = LazyEnvironment::new(EnvironmentLaw::Fixed(site), 0);
    let path = gen_rwre_walk(&mut env, 100, 7).unwrap();
    assert!(path.steps().all(|s| s == [1.0, 0.0]));
}

#[test]
fn quenched_walks_agree_on_shared_prefix() {
    let law = EnvironmentLaw::Dirichlet(DirichletParams::new(vec![1.0; 4]).unwrap());
    let mut a = LazyEnvironment::new(law.clone(), 77);
    let mut b = LazyEnvironment::new(law, 77).with_cache_limit(3);
    let pa = gen_rwre_walk(&mut a, 2_000, 5).unwrap();
    let pb = gen_rwre_walk(&mut b, 2_000, 5).unwrap();
    assert_eq!(pa, pb);
    assert!(b.cached_sites() <= 3);
}

#[test]
fn dirichlet_walk_drifts_along_e1() {
    let law = EnvironmentLaw::Dirichlet(DirichletParams::new(vec![9.0, 1.0, 1.0, 1.0]).unwrap());
    let n = 10_000;
    let ends: Vec<f64> = (0..50).map(|r| gen_annealed_rwre_walk(&law, n, 300 + r).unwrap().increment(0, n).unwrap()[0] / n as f64).collect();
    let k = ends.len() as f64;
    let mean = ends.iter().sum::<f64>() / k;
    let se = (ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
    // One-sided 99% confidence.
    assert!(mean - 2.33 * se > 0.0, "mean {mean} se {se}");
}

#[test]
fn kappa_examples() {
    let k = dirichlet_kappa(&DirichletParams::new(vec![9.0, 1.0, 1.0, 1.0]).unwrap());
    assert_eq!(k.kappa, 14.0);
    assert!(k.admits_rough_limit());
    let k = dirichlet_kappa(&DirichletParams::new(vec![4.0, 1.0, 1.0, 1.0]).unwrap());
    assert_eq!(k.kappa, 9.0);
    assert!(k.is_ballistic());
    assert!(!dirichlet_kappa(&DirichletParams::new(vec![3.0; 4]).unwrap()).is_ballistic());
}
