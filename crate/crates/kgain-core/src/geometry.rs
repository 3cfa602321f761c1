//! Axis-aligned pixel rectangles: clipping and exact union area.
//!
//! Coordinates are integer pixels with the origin at the top-left corner of a
//! frame. A rectangle covers the half-open region `[x, x+w) x [y, y+h)`, so
//! areas are exact integers and union computations have no floating-point
//! error.

/// A clipped, non-negative pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelRect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    /// Right edge (exclusive).
    pub fn x1(&self) -> u32 {
        self.x + self.w
    }

    /// Bottom edge (exclusive).
    pub fn y1(&self) -> u32 {
        self.y + self.h
    }

    pub fn contains_pixel(&self, px: u32, py: u32) -> bool {
        px >= self.x && px < self.x1() && py >= self.y && py < self.y1()
    }
}

/// Clip a possibly out-of-frame box (given as signed origin plus extent) to
/// `[0, frame_w] x [0, frame_h]`. Boxes fully outside collapse to zero area.
pub fn clip_box(x: i64, y: i64, w: i64, h: i64, frame_w: u32, frame_h: u32) -> PixelRect {
    let x0 = x.clamp(0, frame_w as i64);
    let y0 = y.clamp(0, frame_h as i64);
    let x1 = x.saturating_add(w.max(0)).clamp(0, frame_w as i64);
    let y1 = y.saturating_add(h.max(0)).clamp(0, frame_h as i64);
    PixelRect {
        x: x0 as u32,
        y: y0 as u32,
        w: (x1 - x0) as u32,
        h: (y1 - y0) as u32,
    }
}

/// Exact area of the union of a set of rectangles, by coordinate compression:
/// the plane is cut into the grid induced by all rectangle edges and each grid
/// cell is either fully covered or fully uncovered.
pub fn union_area(rects: &[PixelRect]) -> u64 {
    let live: Vec<&PixelRect> = rects.iter().filter(|r| !r.is_empty()).collect();
    if live.is_empty() {
        return 0;
    }
    let mut xs: Vec<u32> = live.iter().flat_map(|r| [r.x, r.x1()]).collect();
    let mut ys: Vec<u32> = live.iter().flat_map(|r| [r.y, r.y1()]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();

    let mut total = 0u64;
    for xi in 0..xs.len() - 1 {
        let (x0, x1) = (xs[xi], xs[xi + 1]);
        for yi in 0..ys.len() - 1 {
            let (y0, y1) = (ys[yi], ys[yi + 1]);
            let covered = live
                .iter()
                .any(|r| r.x <= x0 && r.x1() >= x1 && r.y <= y0 && r.y1() >= y1);
            if covered {
                total += (x1 - x0) as u64 * (y1 - y0) as u64;
            }
        }
    }
    total
}
