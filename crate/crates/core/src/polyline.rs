//! Planar polygonal curves with a refinement bound.

use std::fmt::Write as _;

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    closed: bool,
    max_seg: f64,
}

impl Polyline {
    /// Builds a curve, dropping consecutive duplicate vertices (and, for a closed
    /// curve, a last vertex repeating the first).
    pub fn new(vertices: Vec<Point>, closed: bool, max_seg: f64) -> Self {
        let mut v: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if v.last() != Some(&p) {
                v.push(p);
            }
        }
        if closed && v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        Self {
            vertices: v,
            closed,
            max_seg,
        }
    }

    /// Straight segment from `a` to `b`, pre-split to respect `max_seg`.
    pub fn segment(a: Point, b: Point, max_seg: f64) -> Self {
        let mut p = Self::new(vec![a, b], false, max_seg);
        p.refine();
        p
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertices_mut(&mut self) -> &mut [Point] {
        &mut self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn max_seg(&self) -> f64 {
        self.max_seg
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn segment_count(&self) -> usize {
        match (self.closed, self.vertices.len()) {
            (_, 0 | 1) => 0,
            (true, n) => n,
            (false, n) => n - 1,
        }
    }

    fn seg(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.seg(i);
                dist(a, b)
            })
            .sum()
    }

    pub fn max_segment_len(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.seg(i);
                dist(a, b)
            })
            .fold(0.0, f64::max)
    }

    /// Inserts equally spaced vertices so that no segment exceeds `max_seg`.
    /// Returns the number of vertices added.
    pub fn refine(&mut self) -> usize {
        if !(self.max_seg > 0.0) || self.segment_count() == 0 {
            return 0;
        }
        let before = self.vertices.len();
        let mut out = Vec::with_capacity(before);
        for i in 0..self.segment_count() {
            let (a, b) = self.seg(i);
            out.push(a);
            let pieces = (dist(a, b) / self.max_seg).ceil() as usize;
            for k in 1..pieces {
                let s = k as f64 / pieces as f64;
                out.push(lerp(a, b, s));
            }
        }
        if !self.closed {
            out.push(*self.vertices.last().unwrap());
        }
        self.vertices = out;
        self.vertices.len() - before
    }

    /// Shoelace area, positive for counter-clockwise curves. Open curves are
    /// treated as closed by their chord.
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(&self.vertices, p)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            closed: self.closed,
            max_seg: self.max_seg,
        }
    }

    /// CSV rows `tag,vertex,a,b` without a header.
    pub fn write_csv_rows(&self, tag: usize, out: &mut String) {
        for (i, p) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{tag},{i},{:.16e},{:.16e}", p[0], p[1]);
        }
    }
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[inline]
pub fn lerp(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

pub fn shoelace(v: &[Point]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

pub fn point_in_polygon(v: &[Point], p: Point) -> bool {
    let n = v.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_square_area_and_containment() {
        let sq = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], true, 0.1);
        assert_eq!(sq.signed_area(), 1.0);
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
        assert_eq!(sq.length(), 4.0);
    }

    #[test]
    fn duplicates_are_dropped() {
        let p = Polyline::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], true, 1.0);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn refine_splits_open_segment() {
        let mut p = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0]], false, 0.3);
        assert_eq!(p.refine(), 3);
        assert!(p.max_segment_len() <= 0.3);
        assert_eq!(p.vertices().last(), Some(&[1.0, 0.0]));
    }

    proptest! {
        #[test]
        fn refinement_preserves_area_and_bounds_segments(
            pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..12),
            max_seg in 0.01f64..0.5,
        ) {
            let v: Vec<Point> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let mut p = Polyline::new(v, true, max_seg);
            let a0 = p.signed_area();
            p.refine();
            prop_assert!(p.max_segment_len() <= max_seg * (1.0 + 1e-12));
            prop_assert!((p.signed_area() - a0).abs() <= 1e-12 * (1.0 + a0.abs()));
        }
    }
}
