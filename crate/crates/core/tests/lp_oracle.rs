use commsynth::reachlp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best vertex by brute force: every choice of `n` hyperplanes among the rows
/// and the bounds `x_j = 0`. `None` when no vertex is feasible.
fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp
        .constraints()
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for &(j, v) in &c.coeffs {
                a[j] = v;
            }
            (a, c.rhs)
        })
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        planes.push((a, 0.0));
    }
    let sign = if lp.sense() == Sense::Maximize { 1.0 } else { -1.0 };
    let mut best: Option<f64> = None;
    let mut pick = Vec::new();
    choose(planes.len(), n, 0, &mut pick, &mut |idx| {
        let a = Mat::from_fn(n, n, |r, c| planes[idx[r]].0[c]);
        if a.determinant().abs() < 1e-12 {
            return;
        }
        let b = Mat::from_fn(n, 1, |r, _| planes[idx[r]].1);
        let sol = a.partial_piv_lu().solve(&b);
        let x: Vec<f64> = (0..n).map(|r| sol[(r, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return;
        }
        if lp.max_violation(&x) > 1e-9 {
            return;
        }
        let val = lp.evaluate(&x);
        if best.map_or(true, |b| sign * val > sign * b) {
            best = Some(val);
        }
    });
    best
}

fn choose(m: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..m {
        pick.push(i);
        choose(m, k, i + 1, pick, f);
        pick.pop();
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(n, sense);
    for j in 0..n {
        lp.set_objective(j, rng.gen_range(-3..=3) as f64);
    }
    // keeps the region bounded
    lp.add_constraint((0..n).map(|j| (j, 1.0)).collect(), Relation::Le, rng.gen_range(1..=10) as f64);
    for _ in 0..rng.gen_range(0..=4) {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-4..=4) as f64));
            }
        }
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
        lp.add_constraint(coeffs, rel, rng.gen_range(-3..=6) as f64);
    }
    if rng.gen_bool(0.2) {
        lp.fix_zero(rng.gen_range(0..n));
    }
    lp
}

fn fixings_as_rows(lp: &LinearProgram) -> LinearProgram {
    let mut out = lp.clone();
    for j in 0..lp.num_vars() {
        if lp.is_fixed_zero(j) {
            out.add_constraint(vec![(j, 1.0)], Relation::Eq, 0.0);
        }
    }
    out
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut infeasible = 0;
    for case in 0..50 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        match vertex_optimum(&fixings_as_rows(&lp)) {
            Some(best) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective_value - best).abs() <= 1e-6, "case {case}: {} vs {best}", sol.objective_value);
                assert!(lp.is_feasible(&sol.values), "case {case}");
            }
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
            }
        }
    }
    assert!(infeasible < 50);
}
