use crate::polyline::Point;

/// Centred box `{|α| ≤ alpha_half, |β| ≤ beta_half}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbBox {
    pub alpha_half: f64,
    pub beta_half: f64,
}

impl AbBox {
    pub fn contains(&self, p: Point) -> bool {
        p[0].abs() <= self.alpha_half && p[1].abs() <= self.beta_half
    }
}

fn clip_half_plane(input: &[Point], inside: impl Fn(Point) -> bool, cross: impl Fn(Point, Point) -> Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(input.len() + 4);
    let n = input.len();
    for i in 0..n {
        let cur = input[i];
        let prev = input[(i + n - 1) % n];
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(cross(prev, cur)),
            (false, true) => {
                out.push(cross(prev, cur));
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out
}

fn cross_at(a: Point, b: Point, axis: usize, value: f64) -> Point {
    let s = (value - a[axis]) / (b[axis] - a[axis]);
    let mut p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    p[axis] = value;
    p
}

/// Sutherland–Hodgman clipping of a closed polygon against the box.
///
/// A non-convex input may come back as several pieces joined by zero-width
/// slivers along the box edges; the enclosed area is still exact.
pub fn clip_to_box(poly: &[Point], b: AbBox) -> Vec<Point> {
    let mut v = poly.to_vec();
    let planes = [
        (0usize, b.alpha_half, 1.0),
        (0, -b.alpha_half, -1.0),
        (1, b.beta_half, 1.0),
        (1, -b.beta_half, -1.0),
    ];
    for (axis, value, dir) in planes {
        if v.is_empty() {
            break;
        }
        v = clip_half_plane(
            &v,
            |p| dir * (p[axis] - value) <= 0.0,
            |a, c| cross_at(a, c, axis, value),
        );
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyline::shoelace;

    #[test]
    fn square_clipped_by_box() {
        let sq = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let out = clip_to_box(&sq, AbBox { alpha_half: 0.5, beta_half: 2.0 });
        assert!((shoelace(&out) - 2.0).abs() < 1e-15);
        let none = clip_to_box(&[[3.0, 3.0], [4.0, 3.0], [4.0, 4.0]], AbBox { alpha_half: 1.0, beta_half: 1.0 });
        assert!(shoelace(&none).abs() == 0.0);
    }

    #[test]
    fn nonconvex_area_is_exact() {
        // A U shape whose two arms leave and re-enter the box.
        let u = vec![
            [-2.0, 0.0], [2.0, 0.0], [2.0, 3.0], [1.0, 3.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, 3.0], [-2.0, 3.0],
        ];
        let b = AbBox { alpha_half: 1.5, beta_half: 2.0 };
        // Inside the box: bottom bar 3 × 1 plus two arms 0.5 × 1 each.
        assert!((shoelace(&clip_to_box(&u, b)).abs() - 4.0).abs() < 1e-14);
    }
}
