use radiomap_core::planner::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(travel: &[Vec<f64>], label: &str) -> bool {
    let m = travel.len();
    let mut all_ok = true;
    let mut lines = Vec::new();
    for n in [3usize, 9, 15] {
        let matrix = CollectionMatrix::new(m).unwrap();
        let start = Configuration::new((0..n).collect(), m).unwrap();
        let plan = plan_multi(&matrix, n, &start, travel).unwrap();
        let base = baseline_greedy(&matrix, n, &start, travel, &BaselineOptions::default()).unwrap();
        let ok_count = plan.transition_count() <= base.plan.transition_count();
        let ok_cost = plan.total_cost < base.plan.total_cost;
        let ok_bounds = match n {
            9 => (7..=13).contains(&plan.transition_count()),
            15 => (3..=5).contains(&plan.transition_count()),
            _ => true,
        };
        all_ok &= ok_count && ok_cost && ok_bounds;
        lines.push(format!(
            "  n={n:2}: plan {:3}tr {:7.1} | base {:3}tr {:7.1} | ratio {:.2} bounds={}",
            plan.transition_count(), plan.total_cost,
            base.plan.transition_count(), base.plan.total_cost,
            base.plan.total_cost / plan.total_cost, ok_bounds
        ));
    }
    println!("{label}: {}", if all_ok { "ALL PASS" } else { "FAIL" });
    for l in lines { println!("{l}"); }
    all_ok
}

fn floyd(mut d: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = d.len();
    for k in 0..m { for i in 0..m { for j in 0..m {
        let t = d[i][k] + d[k][j];
        if t < d[i][j] { d[i][j] = t; }
    }}}
    d
}

fn main() {
    let m = 22;
    let mut pass = 0;
    let mut total = 0;
    for seed in 1u64..=20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen_range(0.0..60.0), rng.gen_range(0.0..40.0))).collect();
        let d: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| {
            if i == j { 0.0 } else {
                let dx = pts[i].0 - pts[j].0; let dy = pts[i].1 - pts[j].1;
                (dx*dx + dy*dy).sqrt().max(8.0)
            }
        }).collect()).collect();
        total += 1;
        if check(&d, &format!("scatter-floor seed {seed}")) { pass += 1; }
    }
    println!("passed {pass}/{total}");
}
