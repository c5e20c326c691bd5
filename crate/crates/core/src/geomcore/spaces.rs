//! Standard embedded spaces.

use super::expr::Expr;
use super::space::Space;

fn v(i: usize) -> Expr {
    Expr::var(i)
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn point() -> Space {
    Space::new("Point", vec![], vec![], 0).unwrap()
}

pub fn euclidean(name: &str, n: usize) -> Space {
    let coords: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
    Space::new(name, coords, vec![], n).unwrap()
}

pub fn r2(name: &str) -> Space {
    Space::free(name, &["x", "y"])
}

/// `S^1` as the unit circle `(c, s)`.
pub fn circle(name: &str) -> Space {
    Space::new(name, names(&["c", "s"]), vec![v(0) * v(0) + v(1) * v(1) - Expr::c(1.0)], 1).unwrap()
}

/// `SE(2)` as `(x, y, c, s)`: world position and heading on the unit circle.
pub fn se2(name: &str) -> Space {
    Space::new(name, names(&["x", "y", "c", "s"]), vec![v(2) * v(2) + v(3) * v(3) - Expr::c(1.0)], 3).unwrap()
}

/// `SE(3)` as `(a, R)` in `R^12`, `R` row-major, with the six independent
/// entries of `R^T R - I` as residuals and `det R > 0` enforced by the solver.
pub fn se3(name: &str) -> Space {
    let mut coords = names(&["a1", "a2", "a3"]);
    for i in 1..=3 {
        for j in 1..=3 {
            coords.push(format!("r{}{}", i, j));
        }
    }
    let r = |i: usize, j: usize| v(3 + 3 * i + j);
    let mut res = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            let dot = Expr::sum((0..3).map(|k| r(k, i) * r(k, j)));
            res.push(if i == j { dot - Expr::c(1.0) } else { dot });
        }
    }
    let block = [3, 4, 5, 6, 7, 8, 9, 10, 11];
    Space::new(name, coords, res, 6).unwrap().with_rotation_blocks(vec![block]).unwrap()
}

/// `R x S^1` as `(w, theta)` with `w` a planar vector orthogonal to the unit
/// vector `theta`: coordinates `(wx, wy, c, s)`.
pub fn line_heading(name: &str) -> Space {
    Space::new(
        name,
        names(&["wx", "wy", "c", "s"]),
        vec![v(2) * v(2) + v(3) * v(3) - Expr::c(1.0), v(0) * v(2) + v(1) * v(3)],
        2,
    )
    .unwrap()
}

/// Oriented lines in `R^3`: `(x, v)` with `|v| = 1` and `x . v = 0`, where
/// `x` is the foot of the perpendicular from the origin.
pub fn oriented_lines(name: &str) -> Space {
    Space::new(
        name,
        names(&["x1", "x2", "x3", "v1", "v2", "v3"]),
        vec![
            v(3) * v(3) + v(4) * v(4) + v(5) * v(5) - Expr::c(1.0),
            v(0) * v(3) + v(1) * v(4) + v(2) * v(5),
        ],
        4,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declared_dims_match_rank() {
        for (s, d) in [
            (point(), 0),
            (euclidean("R3", 3), 3),
            (circle("S1"), 1),
            (se2("SE2"), 3),
            (se3("SE3"), 6),
            (line_heading("RxS1"), 2),
            (oriented_lines("X"), 4),
        ] {
            assert_eq!(s.dim(), d);
            s.verify_dim(6, 11).unwrap();
        }
    }
}
