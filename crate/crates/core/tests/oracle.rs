//! Enumeration against independent closed forms and linear solves.

use wsaw::enumerate::{green, Enumerator};
use wsaw::lattice::{Domain, Point};
use wsaw::srw::green_exact;
use wsaw::walks::ModelParams;

fn pt(c: &[i64]) -> Point {
    Point::new(c.to_vec())
}

#[test]
fn simple_walk_matches_dense_solve() {
    let mut combos = 0;
    for d in 1..=2usize {
        for spec in ["box:1", "box:2", "posbox:2", "box:3&halfspace:0"] {
            let dom = Domain::parse(spec, d).unwrap();
            for beta in [0.02, 0.1, 0.2, 0.45 / d as f64] {
                let exact = green_exact(d, beta, &dom).unwrap();
                let en = Enumerator::new(0.0, 20).unwrap();
                let pts = dom.points().unwrap();
                for x in pts.iter().take(3) {
                    let row = en.row(beta, &dom, x).unwrap();
                    for y in &pts {
                        let e = row.get(y);
                        let want = exact.get(x, y).unwrap();
                        let tol = 1e-13 * want;
                        assert!(
                            e.lower - tol <= want && want <= e.upper + tol,
                            "{spec} d={d} beta={beta} {x}->{y}: {want} not in [{}, {}]",
                            e.lower,
                            e.upper
                        );
                    }
                }
                combos += 1;
            }
        }
    }
    assert!(combos >= 8);
}

#[test]
fn one_dimensional_closed_forms() {
    let full = Domain::full(1);
    for beta in [0.05, 0.2, 0.35, 0.45] {
        // λ = 1 on Z: only the straight walk survives
        let p = ModelParams::new(1, 1.0, beta).unwrap();
        for k in 0..6i64 {
            let e = green(&p, &full, &pt(&[0]), &pt(&[k]), 16).unwrap();
            let want = beta.powi(k as i32);
            assert!(e.contains(want) || (e.lower - want).abs() <= 1e-15 * want, "k={k}");
        }
        // λ = 0 on Z: generating function of the simple walk
        let p = ModelParams::new(1, 0.0, beta).unwrap();
        let s = (1.0 - 4.0 * beta * beta).sqrt();
        for k in 0..5i64 {
            let e = green(&p, &full, &pt(&[0]), &pt(&[k]), 40).unwrap();
            let want = ((1.0 - s) / (2.0 * beta)).powi(k as i32) / s;
            let tol = 1e-12 * want;
            assert!(e.lower - tol <= want && want <= e.upper + tol, "beta={beta} k={k}: {e:?} vs {want}");
            assert!(e.width() < 10.0 * (2.0 * beta).powi(40) * want + 1e-12, "beta={beta} k={k}: {e:?}");
        }
    }
}

#[test]
fn self_avoiding_two_point_counts() {
    // numbers of self-avoiding walks from the origin on Z^2 with 1..6 steps
    let counts = [4u64, 12, 36, 100, 284, 780];
    let full = Domain::full(2);
    let beta = 0.1;
    let p = ModelParams::new(2, 1.0, beta).unwrap();
    let row = wsaw::enumerate::green_row(&p, &full, &Point::origin(2), 6).unwrap();
    let mut want = 1.0;
    for (n, c) in counts.iter().enumerate() {
        want += *c as f64 * beta.powi(n as i32 + 1);
    }
    let (lo, hi) = {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (y, _) in row.entries() {
            let (a, b) = row.partial(&y);
            lo += a;
            hi += b;
        }
        (lo, hi)
    };
    assert!(lo <= want * (1.0 + 1e-14) && want <= hi * (1.0 + 1e-14), "{lo} {want} {hi}");
}
