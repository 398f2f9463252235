/// A location in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance. Travel distances are symmetric.
#[inline]
pub fn distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    (dx * dx + dy * dy).sqrt()
}

#[inline]
pub(crate) fn distance_sq(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    dx * dx + dy * dy
}

/// Axis-aligned search rectangle for new facility coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self::new(0.0, 10.0, 0.0, 10.0)
    }
}

impl SearchBox {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    /// Bounding box of `points`, expanded by `margin` times the side length on
    /// every side. Returns `None` for an empty slice.
    pub fn around<I: IntoIterator<Item = Point>>(points: I, margin: f64) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
        for p in it {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let mx = (x1 - x0) * margin;
        let my = (y1 - y0) * margin;
        Some(Self::new(x0 - mx, x1 + mx, y0 - my, y1 + my))
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    /// Bounds `(lo, hi)` of flattened coordinate `k` in `(x1, y1, x2, y2, ...)`.
    pub(crate) fn bounds_of(&self, k: usize) -> (f64, f64) {
        if k.is_multiple_of(2) {
            (self.x_min, self.x_max)
        } else {
            (self.y_min, self.y_max)
        }
    }

    pub(crate) fn clamp_coord(&self, k: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds_of(k);
        v.clamp(lo, hi)
    }
}
