//! Quick randomized self-checks of the structural identities, small enough
//! to run on every invocation of a `check` command.

use nalgebra::DVector;

use crate::abelian_solver::{polytope_P, solve_torus_target, torus_image};
use crate::convex_oracle::{fd_check_along, hull_build, hull_membership};
use crate::measures::{gradient_f, pushforward, DiscreteMeasure};
use crate::model_space::{act, exp_p, kak_decompose, kempf_ness, momentum_p, mu_beta, ModelSpace};
use crate::nonabelian_solver::balance;
use crate::sampling;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed defect.
    pub defect: f64,
    pub tolerance: f64,
}

type Check = fn(&ModelSpace, &mut rand_chacha::ChaCha8Rng) -> f64;

const CHECKS: [(&str, f64, Check); 8] = [
    ("kempf_ness_derivative", 1e-6, kempf_ness_derivative),
    ("cocycle", 1e-10, cocycle),
    ("equivariance", 1e-10, equivariance),
    ("hull_containment", 1e-10, hull_containment),
    ("kak_reconstruction", 1e-9, kak_reconstruction),
    ("torus_round_trip", 1e-8, torus_round_trip),
    ("vertex_uniform_balanced", 1e-8, vertex_uniform_balanced),
    ("momentum_spectrum", 1e-12, momentum_spectrum),
];

const TRIALS: usize = 10;

/// Runs every check on `model` with a generator seeded by `seed`. Each
/// check gets its own stream, so the outcome of one does not depend on
/// which others ran.
pub fn run_checks(model: &ModelSpace, seed: u64) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, tolerance, check))| {
            let mut rng = sampling::seeded_rng(seed.wrapping_add(i as u64));
            let defect = check(model, &mut rng);
            CheckOutcome { name, passed: defect < *tolerance, defect, tolerance: *tolerance }
        })
        .collect()
}

fn kempf_ness_derivative(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let x = sampling::random_point(model, rng);
            let beta = sampling::random_p(model, 1.0, rng);
            let along = |t: &DVector<f64>| kempf_ness(&x, &exp_p(&(&beta * t[0])));
            fd_check_along(
                along,
                &DVector::zeros(1),
                &DVector::from_element(1, mu_beta(&x, &beta)),
                &[DVector::from_element(1, 1.0)],
                1e-5,
            )
            .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

fn cocycle(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let x = sampling::random_point(model, rng);
            let a = sampling::random_group(model, 1e3, rng);
            let b = sampling::random_group(model, 1e3, rng);
            (kempf_ness(&x, &a.compose(&b)) - kempf_ness(&x, &b) - kempf_ness(&act(&b, &x), &a)).abs()
        })
        .fold(0.0, f64::max)
}

fn equivariance(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let nu = sampling::random_measure(model, 5, rng);
            let k = sampling::random_k(model, rng);
            (&gradient_f(&pushforward(&k, &nu)) - &gradient_f(&nu).adjoint_action(&k)).norm()
        })
        .fold(0.0, f64::max)
}

fn hull_containment(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let nu = sampling::random_measure(model, 4, rng);
            let points: Vec<_> = nu.atoms().iter().map(|x| model.p_coords(&momentum_p(x))).collect();
            let Ok(body) = hull_build(&points, model.p_dim()) else {
                return f64::INFINITY;
            };
            hull_membership(&model.p_coords(&gradient_f(&nu)), &body, 1e-10)
                .map_or(f64::INFINITY, |m| (-m.margin).max(0.0))
        })
        .fold(0.0, f64::max)
}

fn kak_reconstruction(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let g = sampling::random_group(model, 1e3, rng);
            kak_decompose(&g).reconstruct().distance(&g)
        })
        .fold(0.0, f64::max)
}

fn torus_round_trip(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (0..TRIALS)
        .map(|_| {
            let nu = sampling::random_full_support_measure(model, 4, 0.1, 1.0, rng);
            let alpha = sampling::random_a(model, 1.0, rng);
            let target = torus_image(&nu, &alpha);
            match solve_torus_target(&nu, &target, 1e-10, 200) {
                Ok(report) if report.status.is_converged() => (&torus_image(&nu, &report.solution) - &target).norm(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

fn vertex_uniform_balanced(model: &ModelSpace, _rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let nu = DiscreteMeasure::vertex_uniform(*model);
    let zero = crate::model_space::PElement::zero(model.ambient_dim());
    match balance(&nu, &zero, 1e-10, 10) {
        Ok(report) if report.status.is_converged() => report.solution.cartan_p.norm(),
        _ => f64::INFINITY,
    }
}

/// `μ_p(x)` has eigenvalues `1 − 1/m` once and `−1/m` otherwise, so it is a
/// vertex of `P` after diagonalizing.
fn momentum_spectrum(model: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let m = model.ambient_dim() as f64;
    let body = polytope_P(model);
    (0..TRIALS)
        .map(|_| {
            let mu = momentum_p(&sampling::random_point(model, rng));
            let eig = mu.eigenvalues();
            let (top, rest) = eig.split_last().expect("nonempty");
            let spectrum = rest.iter().map(|l| (l + 1.0 / m).abs()).fold((top - 1.0 + 1.0 / m).abs(), f64::max);
            let vertex = DVector::from_vec(eig.clone());
            spectrum.max((-body.facet_margin(&vertex)).max(0.0))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_on_small_models() {
        for model in [ModelSpace::real(1).unwrap(), ModelSpace::real(2).unwrap(), ModelSpace::complex(2).unwrap()] {
            for outcome in run_checks(&model, 7) {
                assert!(outcome.passed, "{model} {}: {:e}", outcome.name, outcome.defect);
            }
        }
    }

    #[test]
    fn outcomes_are_deterministic() {
        let model = ModelSpace::complex(1).unwrap();
        assert_eq!(run_checks(&model, 3), run_checks(&model, 3));
    }
}
