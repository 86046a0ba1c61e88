//! Acceptance criteria, one line of output per criterion.
//!
//! Run with `cargo test -p rudin-shapiro --test acceptance`. The target has
//! its own `main`, so the report is printed on every run.

use std::f64::consts::{PI, TAU};

use rudin_shapiro::crossing::{
    check_lemma_3_1, theorem_2_2_bound, verify_sign_change_argument, verify_theorem_2_1,
    verify_theorem_2_2,
};
use rudin_shapiro::distribution::{
    mahler_of, mahler_via_roots, moment, planar_distribution, predicted_moment, value_distribution,
    ROOT_PRODUCT_MAX_LEVEL,
};
use rudin_shapiro::eval::identity_deviations;
use rudin_shapiro::{build_rs_pair, Budget};

const OVERSAMPLE: usize = 16;

struct Outcome {
    name: &'static str,
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Outcome {
            name,
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn identities() -> Outcome {
    let mut o = Outcome::new("identity suite, k = 2..18");
    let mut worst = 0.0f64;
    for k in 2..=18 {
        let pair = build_rs_pair(k).unwrap();
        let n = pair.len();
        let dev = identity_deviations(&pair, n * OVERSAMPLE, &Budget::default()).unwrap();
        let tol = 1e-6 * n as f64;
        o.check(dev.parallelogram < tol, || {
            format!("k={k}: |P|^2+|Q|^2-2n off by {:e}", dev.parallelogram)
        });
        o.check(dev.reflection < tol, || {
            format!("k={k}: |Q(-z)|-|P(z)| off by {:e}", dev.reflection)
        });
        o.check(dev.antisymmetry < tol, || {
            format!("k={k}: R(t)+R(t+pi)-2n off by {:e}", dev.antisymmetry)
        });
        worst = worst.max(dev.max_deviation() / n as f64);
    }
    o.detail = format!("worst deviation / n = {worst:.3e} (tol 1e-6)");
    o
}

fn subgrid_doubling() -> Outcome {
    let mut o = Outcome::new("lemma at the n-th roots of unity, k = 2..18");
    let mut worst = 0.0f64;
    for k in 2..=18 {
        let sqrt_n = ((1usize << k) as f64).sqrt();
        let r = check_lemma_3_1(k).unwrap();
        o.check(r < 1e-6 * sqrt_n, || format!("k={k}: residual {r:e}"));
        worst = worst.max(r / sqrt_n);
    }
    o.detail = format!("worst residual / sqrt(n) = {worst:.3e} (tol 1e-6)");
    o
}

fn zeros_at_level_n() -> Outcome {
    let mut o = Outcome::new("R_k = n zeros and intervals, k = 2..18");
    let mut tightest = f64::INFINITY;
    for k in 2..=18 {
        let r = verify_theorem_2_1(k, OVERSAMPLE).unwrap();
        o.check(r.zero_count > r.n / 4, || {
            format!("k={k}: {} zeros < {}", r.zero_count, r.n / 4 + 1)
        });
        o.check(r.interval_hits >= r.n / 2 + 2, || {
            format!("k={k}: {} intervals < {}", r.interval_hits, r.n / 2 + 2)
        });
        tightest = tightest.min(r.zero_count as f64 / (r.n / 4 + 1) as f64);
    }
    let r = verify_theorem_2_1(2, OVERSAMPLE).unwrap();
    let angles = r.crossings.angles();
    o.check(angles.len() == 4, || {
        format!("k=2: {} zeros, expected 4", angles.len())
    });
    let mut worst = 0.0f64;
    for target in [0.0, PI / 2.0, PI, 1.5 * PI] {
        let d = angles
            .iter()
            .map(|&a| circular_distance(a, target))
            .fold(f64::INFINITY, f64::min);
        o.check(d < 1e-8, || {
            format!("k=2: zero near {target} missed by {d:e}")
        });
        worst = worst.max(d);
    }
    o.detail = format!("smallest count / bound = {tightest:.3}; k=2 zeros within {worst:.1e} rad");
    o
}

fn zeros_off_level() -> Outcome {
    let mut o = Outcome::new("R_k = (1+eta)n counts, k in {14,16,18}");
    o.check(
        theorem_2_2_bound(1 << 18, 0.25, 0.05).unwrap() == 26215,
        || "k=18, eta=0.25: bound is not 26215".into(),
    );
    let mut tightest = f64::INFINITY;
    for k in [14, 16, 18] {
        for eta in [0.1, 0.25, 0.4] {
            let plus = verify_theorem_2_2(k, eta, 0.05, OVERSAMPLE).unwrap();
            let minus = verify_theorem_2_2(k, -eta, 0.05, OVERSAMPLE).unwrap();
            for r in [&plus, &minus] {
                o.check(r.zero_count >= r.bound, || {
                    format!("k={k}, eta={}: {} < {}", r.eta, r.zero_count, r.bound)
                });
                tightest = tightest.min(r.zero_count as f64 / r.bound as f64);
            }
            o.check(plus.zero_count == minus.zero_count, || {
                format!(
                    "k={k}, eta=±{eta}: counts {} and {} differ",
                    plus.zero_count, minus.zero_count
                )
            });
        }
    }
    o.detail = format!("smallest count / bound = {tightest:.3}");
    o
}

fn sign_change_argument() -> Outcome {
    let mut o = Outcome::new("sign changes of R_{k-2}(t_j) - n/4, k = 2..16");
    let mut worst = 0.0f64;
    for k in 2..=16 {
        let r = verify_sign_change_argument(k).unwrap();
        let n = r.n;
        o.check(r.sign_changes + 2 <= n / 2, || {
            format!("k={k}: {} sign changes > n/2 - 2", r.sign_changes)
        });
        o.check(r.qualifying_pairs >= n / 2 + 2, || {
            format!("k={k}: {} qualifying pairs < n/2 + 2", r.qualifying_pairs)
        });
        o.check(r.qualifying_with_crossing == r.qualifying_pairs, || {
            format!(
                "k={k}: only {} of {} qualifying intervals hold a crossing",
                r.qualifying_with_crossing, r.qualifying_pairs
            )
        });
        worst = worst.max(r.sign_changes as f64 / (n / 2 - 2).max(1) as f64);
    }
    o.detail = format!("largest sign changes / (n/2 - 2) = {worst:.3}");
    o
}

fn moments() -> Outcome {
    let mut o = Outcome::new("moments: M_2 exact for k <= 18, q in {4,6,8} at k = 18");
    for k in 0..=18 {
        let n = 1usize << k;
        let r = moment(k, 2.0, n * OVERSAMPLE).unwrap();
        let rel = (r.estimate / (n as f64).sqrt() - 1.0).abs();
        o.check(rel < 1e-12, || {
            format!("k={k}: M_2 off by {rel:e} relative")
        });
    }
    let n = 1usize << 18;
    let mut ratios = Vec::new();
    for q in [4.0, 6.0, 8.0] {
        let r = moment(18, q, n * OVERSAMPLE).unwrap();
        let ratio = r.estimate / predicted_moment(n, q);
        o.check((ratio - 1.0).abs() < 0.05, || {
            format!("q={q}: ratio {ratio}")
        });
        ratios.push(format!("{ratio:.6}"));
    }
    o.detail = format!("k=18 ratios {}", ratios.join(", "));
    o
}

fn distribution() -> Outcome {
    let mut o = Outcome::new("value distribution: KS and planar cells");
    let mut previous = f64::INFINITY;
    let mut trail = Vec::new();
    for k in [10, 12, 14, 16, 18] {
        let n = 1usize << k;
        let h = value_distribution(k, n * OVERSAMPLE, 64).unwrap();
        o.check(h.ks_statistic < previous, || {
            format!("k={k}: KS {} not below {previous}", h.ks_statistic)
        });
        previous = h.ks_statistic;
        trail.push(format!("{:.2e}", h.ks_statistic));
    }
    o.check(previous < 0.05, || format!("k=18: KS {previous}"));
    let planar = planar_distribution(18, 1 << 22, 16).unwrap();
    o.check(planar.max_cell_error < 0.02, || {
        format!("G=16: max cell error {}", planar.max_cell_error)
    });
    o.detail = format!(
        "KS {}; max cell error {:.2e}",
        trail.join(" > "),
        planar.max_cell_error
    );
    o
}

fn mahler() -> Outcome {
    let mut o = Outcome::new("Mahler measure: quadrature vs roots for k <= 8, M_0 < sqrt(n)");
    let budget = Budget::new(1 << 22);
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let pair = build_rs_pair(k).unwrap();
        let n = pair.len();
        let q = mahler_of(&pair.p, n * OVERSAMPLE, 40.0, &budget)
            .unwrap()
            .quadrature;
        o.check(q.estimate < (n as f64).sqrt(), || {
            format!("k={k}: M_0 = {} not below sqrt(n)", q.estimate)
        });
        if k <= ROOT_PRODUCT_MAX_LEVEL {
            let r = mahler_via_roots(&pair.p, ROOT_PRODUCT_MAX_LEVEL).unwrap();
            let rel = (q.estimate / r.estimate - 1.0).abs();
            o.check(rel < 1e-6, || {
                format!("k={k}: quadrature {} vs roots {}", q.estimate, r.estimate)
            });
            worst = worst.max(rel);
        }
    }
    o.detail = format!("worst relative disagreement {worst:.2e} (tol 1e-6)");
    o
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        identities,
        subgrid_doubling,
        zeros_at_level_n,
        zeros_off_level,
        sign_change_argument,
        moments,
        distribution,
        mahler,
    ];
    let mut failed = Vec::new();
    for (i, criterion) in criteria.iter().enumerate() {
        let o = criterion();
        let status = if o.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("[{status}] {}. {} {}", i + 1, o.name, o.detail);
        for f in &o.failures {
            println!("       {f}");
        }
        if !o.failures.is_empty() {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
